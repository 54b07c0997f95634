//! Minimization of polynomial Hamiltonians over pure Gaussian states and
//! the stationarity certificate: at a stationary point the Wick-reordered
//! Hamiltonian in the adapted operators has no linear (K) and no pairing
//! (O) coefficients.
//!
//! The chart around a state is theta |-> U e^{i phi(y)} e^{i X_theta} with
//! X_theta = theta_ij a_i^dag a_j^dag + conj(theta)_ij a_j a_i and
//! phi(y) = y_i a_i^dag + conj(y)_i a_i. In this convention a single bosonic
//! mode with theta = beta real transforms with P = cosh(2 beta),
//! |Q| = sinh(2 beta); the fermionic chart is nondegenerate for
//! ||theta|| < pi/4.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};

type CMat = DMatrix<Complex64>;
type CVec = DVector<Complex64>;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Statistics {
    Bosonic,
    Fermionic,
}

/// A normal-ordered operator word (a^dag)^dag_indices (a)^ann_indices with
/// canonically sorted index lists (strictly increasing for fermions).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct OpWord {
    pub dag: Vec<usize>,
    pub ann: Vec<usize>,
}

impl OpWord {
    pub fn degree(&self) -> usize {
        self.dag.len() + self.ann.len()
    }

    pub fn adjoint(&self) -> OpWord {
        OpWord {
            dag: self.ann.clone(),
            ann: self.dag.clone(),
        }
    }

    /// Sign picked up by reversing an index block of length n (fermions).
    fn reversal_sign(n: usize) -> f64 {
        if (n / 2) % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }
}

/// A polynomial Hamiltonian sum_w c_w (a^dag)^alpha a^beta of degree <= 4 in
/// canonical normal-ordered form.
#[derive(Debug, Clone)]
pub struct PolynomialHamiltonian {
    pub statistics: Statistics,
    pub n_modes: usize,
    pub terms: BTreeMap<OpWord, Complex64>,
}

impl PolynomialHamiltonian {
    pub fn new(statistics: Statistics, n_modes: usize) -> Self {
        Self {
            statistics,
            n_modes,
            terms: BTreeMap::new(),
        }
    }

    /// Adds `coeff` times the word with the given creator/annihilator
    /// indices (in the written operator order). The word is canonicalized;
    /// for fermions repeated indices vanish and sorting carries the sign.
    pub fn add_term(&mut self, dag: &[usize], ann: &[usize], coeff: Complex64) {
        if coeff == ZERO {
            return;
        }
        let mut sign = 1.0;
        let mut dag_v = dag.to_vec();
        let mut ann_v = ann.to_vec();
        match self.statistics {
            Statistics::Bosonic => {
                dag_v.sort_unstable();
                ann_v.sort_unstable();
            }
            Statistics::Fermionic => {
                match sort_with_parity(&mut dag_v) {
                    Some(s) => sign *= s,
                    None => return,
                }
                match sort_with_parity(&mut ann_v) {
                    Some(s) => sign *= s,
                    None => return,
                }
            }
        }
        let word = OpWord {
            dag: dag_v,
            ann: ann_v,
        };
        let entry = self.terms.entry(word).or_insert(ZERO);
        *entry += coeff * sign;
        if entry.norm() < 1e-300 {
            // keep the map tidy
        }
    }

    /// Adds coeff * word + conj(coeff) * word^dag. Self-adjoint words
    /// require a real coefficient.
    pub fn add_hermitian(&mut self, dag: &[usize], ann: &[usize], coeff: Complex64) {
        let mut probe = PolynomialHamiltonian::new(self.statistics, self.n_modes);
        probe.add_term(dag, ann, coeff);
        for (word, c) in probe.terms {
            let adj = word.adjoint();
            if adj == word {
                self.add_term(&word.dag, &word.ann, Complex64::new(c.re, 0.0));
            } else {
                let rs = match self.statistics {
                    Statistics::Fermionic => {
                        OpWord::reversal_sign(word.dag.len()) * OpWord::reversal_sign(word.ann.len())
                    }
                    Statistics::Bosonic => 1.0,
                };
                self.add_term(&word.dag, &word.ann, c);
                self.add_term(&adj.dag, &adj.ann, c.conj() * rs);
            }
        }
    }

    pub fn degree(&self) -> usize {
        self.terms.keys().map(|w| w.degree()).max().unwrap_or(0)
    }

    pub fn is_even(&self) -> bool {
        self.terms.keys().all(|w| w.degree() % 2 == 0)
    }

    /// Checks index ranges, degree cap and hermiticity of the coefficient
    /// table.
    pub fn validate(&self) -> Result<()> {
        for (word, &c) in &self.terms {
            if word.degree() > 4 {
                return Err(Error::UnsupportedDegree {
                    degree: word.degree(),
                });
            }
            if word.dag.iter().chain(&word.ann).any(|&i| i >= self.n_modes) {
                return Err(Error::Hamiltonian(format!(
                    "mode index out of range in {word:?}"
                )));
            }
            let adj = word.adjoint();
            let rs = match self.statistics {
                Statistics::Fermionic => {
                    OpWord::reversal_sign(word.dag.len()) * OpWord::reversal_sign(word.ann.len())
                }
                Statistics::Bosonic => 1.0,
            };
            let expected = c.conj() * rs;
            let found = self.terms.get(&adj).copied().unwrap_or(ZERO);
            if (found - expected).norm() > 1e-12 * (1.0 + c.norm()) {
                return Err(Error::Hamiltonian(format!(
                    "not hermitian at {word:?}: adjoint coefficient {found} != {expected}"
                )));
            }
        }
        Ok(())
    }
}

/// Sorts ascending, returning the permutation sign, or None on a repeat.
fn sort_with_parity(v: &mut [usize]) -> Option<f64> {
    let mut sign = 1.0;
    for i in 1..v.len() {
        let mut j = i;
        while j > 0 && v[j - 1] > v[j] {
            v.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    for w in v.windows(2) {
        if w[0] == w[1] {
            return None;
        }
    }
    Some(sign)
}

/// Pure-Gaussian-state parameters: the pairing matrix theta (symmetric for
/// bosons, antisymmetric for fermions), the bosonic displacement y, and for
/// odd fermionic states the unit vector of the extra Pin generator.
#[derive(Debug, Clone)]
pub struct GaussianParams {
    pub statistics: Statistics,
    pub theta: CMat,
    pub y: Option<CVec>,
    pub odd_vector: Option<CVec>,
}

impl GaussianParams {
    pub fn vacuum(statistics: Statistics, n: usize) -> Self {
        Self {
            statistics,
            theta: CMat::zeros(n, n),
            y: None,
            odd_vector: None,
        }
    }

    pub fn n_modes(&self) -> usize {
        self.theta.nrows()
    }
}

/// Bogoliubov transformation data in the direction a_i = P b + Q b^dag + xi,
/// where b are the operators adapted to the state.
#[derive(Debug, Clone)]
pub struct BogMatrices {
    pub p: CMat,
    pub q: CMat,
    pub xi: CVec,
}

/// Forward transformation b = p a + q a^dag + xi of the unitary U with
/// state U Omega. Composition and the group structure live here.
#[derive(Debug, Clone)]
pub struct Frame {
    pub statistics: Statistics,
    pub p: CMat,
    pub q: CMat,
    pub xi: CVec,
}

impl Frame {
    pub fn identity(statistics: Statistics, n: usize) -> Self {
        Self {
            statistics,
            p: CMat::identity(n, n),
            q: CMat::zeros(n, n),
            xi: CVec::zeros(n),
        }
    }

    /// Frame of W * T (the step T acts first): used to move in a chart
    /// around the current state. For U = A B the forward maps compose as
    /// p_U = p_B p_A + q_B conj(q_A).
    pub fn compose_right(&self, step: &Frame) -> Frame {
        Frame {
            statistics: self.statistics,
            p: &step.p * &self.p + &step.q * self.q.conjugate(),
            q: &step.p * &self.q + &step.q * self.p.conjugate(),
            xi: &step.p * &self.xi + &step.q * self.xi.conjugate() + &step.xi,
        }
    }

    /// Group-relation residual: bosons pp^H - qq^H = 1, p q^T symmetric;
    /// fermions pp^H + qq^H = 1, p q^T antisymmetric.
    pub fn relation_residual(&self) -> f64 {
        let n = self.p.nrows();
        let id = CMat::identity(n, n);
        let (unit, pqt) = match self.statistics {
            Statistics::Bosonic => (
                &self.p * self.p.adjoint() - &self.q * self.q.adjoint() - id,
                &self.p * self.q.transpose() - (&self.p * self.q.transpose()).transpose(),
            ),
            Statistics::Fermionic => (
                &self.p * self.p.adjoint() + &self.q * self.q.adjoint() - id,
                &self.p * self.q.transpose() + (&self.p * self.q.transpose()).transpose(),
            ),
        };
        unit.iter()
            .chain(pqt.iter())
            .map(|c| c.norm())
            .fold(0.0, f64::max)
    }
}

/// f(M) for hermitian M via the spectral decomposition.
fn hermitian_fn(m: &CMat, f: impl Fn(f64) -> f64) -> CMat {
    let se = m.clone().symmetric_eigen();
    let diag = CVec::from_iterator(
        se.eigenvalues.len(),
        se.eigenvalues.iter().map(|&l| Complex64::new(f(l.max(0.0)), 0.0)),
    );
    &se.eigenvectors * CMat::from_diagonal(&diag) * se.eigenvectors.adjoint()
}

fn max_eigenvalue(m: &CMat) -> f64 {
    m.clone()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .fold(0.0f64, |a, &b| a.max(b))
}

/// Forward matrices of e^{i X_theta}: p = C(2 sqrt(M)), q = -i S(2 sqrt(M))
/// M^{-1/2} theta with M = theta theta^dag, where (C, S) = (cosh, sinh) for
/// bosons and (cos, sin) for fermions.
fn rotation_frame(statistics: Statistics, theta: &CMat) -> Result<Frame> {
    let n = theta.nrows();
    let m = theta * theta.adjoint();
    if statistics == Statistics::Fermionic {
        let norm = max_eigenvalue(&m).sqrt();
        if norm >= std::f64::consts::FRAC_PI_4 {
            return Err(Error::DegenerateChart {
                norm,
                limit: std::f64::consts::FRAC_PI_4,
            });
        }
    }
    let (p, s_over_x) = match statistics {
        Statistics::Bosonic => (
            hermitian_fn(&m, |l| (2.0 * l.sqrt()).cosh()),
            hermitian_fn(&m, |l| {
                let x = l.sqrt();
                if x < 1e-150 {
                    2.0
                } else {
                    (2.0 * x).sinh() / x
                }
            }),
        ),
        Statistics::Fermionic => (
            hermitian_fn(&m, |l| (2.0 * l.sqrt()).cos()),
            hermitian_fn(&m, |l| {
                let x = l.sqrt();
                if x < 1e-150 {
                    2.0
                } else {
                    (2.0 * x).sin() / x
                }
            }),
        ),
    };
    let q = -(s_over_x * theta).map(|c| c * I);
    Ok(Frame {
        statistics,
        p,
        q,
        xi: CVec::zeros(n),
    })
}

/// Forward frame of the odd Pin generator V_u = u a^dag + conj(u) a,
/// |u| = 1: V a_i V^dag = u_i (u a^dag + conj(u) a) - a_i.
fn odd_generator_frame(u: &CVec) -> Frame {
    let n = u.len();
    let mut p = CMat::zeros(n, n);
    let mut q = CMat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            p[(i, j)] = u[i] * u[j].conj();
            q[(i, j)] = u[i] * u[j];
        }
        p[(i, i)] -= ONE;
    }
    Frame {
        statistics: Statistics::Fermionic,
        p,
        q,
        xi: CVec::zeros(n),
    }
}

/// Forward frame of U = e^{i phi(y)} e^{i X_theta} (V_u for odd fermionic
/// states, applied first).
pub fn forward_frame(params: &GaussianParams) -> Result<Frame> {
    let mut frame = rotation_frame(params.statistics, &params.theta)?;
    if let Some(u) = &params.odd_vector {
        if params.statistics != Statistics::Fermionic {
            return Err(Error::Hamiltonian(
                "odd generators exist only for fermions".into(),
            ));
        }
        let v = odd_generator_frame(u);
        // U = e^{iX} V: V acts first, so its matrices multiply on the left
        frame = Frame {
            statistics: Statistics::Fermionic,
            p: &v.p * &frame.p + &v.q * frame.q.conjugate(),
            q: &v.p * &frame.q + &v.q * frame.p.conjugate(),
            xi: CVec::zeros(u.len()),
        };
    }
    if let Some(y) = &params.y {
        // e^{i phi(y)} a e^{-i phi(y)} = a - i y
        let shift = CVec::from_iterator(y.len(), y.iter().map(|c| -I * c));
        frame.xi = &frame.p * &shift + &frame.q * shift.conjugate();
    }
    Ok(frame)
}

/// The linear-transformation data (P, Q, xi) with a = P b + Q b^dag + xi.
pub fn bogoliubov_matrices(params: &GaussianParams) -> Result<BogMatrices> {
    let f = forward_frame(params)?;
    Ok(invert_frame(&f))
}

fn invert_frame(f: &Frame) -> BogMatrices {
    match f.statistics {
        Statistics::Bosonic => BogMatrices {
            p: f.p.adjoint(),
            q: -f.q.transpose(),
            xi: f.q.transpose() * f.xi.conjugate() - f.p.adjoint() * &f.xi,
        },
        Statistics::Fermionic => BogMatrices {
            p: f.p.adjoint(),
            q: f.q.transpose(),
            xi: CVec::zeros(f.xi.len()),
        },
    }
}

/// Wick-reordered coefficients of H in the adapted operators:
/// H = B + conj(K) b + K b^dag + (pair terms O) + D b^dag b + higher.
#[derive(Debug, Clone)]
pub struct WickForm {
    pub b: f64,
    pub k: CVec,
    pub o: CMat,
    pub d: CMat,
    pub higher: BTreeMap<OpWord, Complex64>,
}

impl WickForm {
    pub fn norm_k(&self) -> f64 {
        self.k.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn norm_o(&self) -> f64 {
        self.o.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Elem {
    Dag(usize),
    Ann(usize),
}

/// Accumulating normal-ordered polynomial over words.
#[derive(Debug, Clone, Default)]
struct NormalPoly {
    terms: BTreeMap<OpWord, Complex64>,
}

impl NormalPoly {
    fn constant(c: Complex64) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(
            OpWord {
                dag: vec![],
                ann: vec![],
            },
            c,
        );
        Self { terms }
    }

    fn add(&mut self, word: OpWord, c: Complex64) {
        let entry = self.terms.entry(word).or_insert(ZERO);
        *entry += c;
    }
}

/// word * b_i (bosons: plain insert; fermions pick up the parity of the
/// transposition count). Returns None for a fermionic repeat.
fn append_annihilator(word: &OpWord, i: usize, statistics: Statistics) -> Option<(OpWord, f64)> {
    let mut ann = word.ann.clone();
    match statistics {
        Statistics::Bosonic => {
            let pos = ann.partition_point(|&x| x <= i);
            ann.insert(pos, i);
            Some((
                OpWord {
                    dag: word.dag.clone(),
                    ann,
                },
                1.0,
            ))
        }
        Statistics::Fermionic => {
            if ann.contains(&i) {
                return None;
            }
            let pos = ann.partition_point(|&x| x < i);
            let moves = ann.len() - pos;
            ann.insert(pos, i);
            Some((
                OpWord {
                    dag: word.dag.clone(),
                    ann,
                },
                if moves % 2 == 0 { 1.0 } else { -1.0 },
            ))
        }
    }
}

/// Insert a creator into the dag block of a word with no annihilators.
fn insert_creator(word: &OpWord, i: usize, statistics: Statistics) -> Option<(OpWord, f64)> {
    debug_assert!(word.ann.is_empty() || !word.dag.is_empty() || true);
    let mut dag = word.dag.clone();
    match statistics {
        Statistics::Bosonic => {
            let pos = dag.partition_point(|&x| x <= i);
            dag.insert(pos, i);
            Some((
                OpWord {
                    dag,
                    ann: word.ann.clone(),
                },
                1.0,
            ))
        }
        Statistics::Fermionic => {
            if dag.contains(&i) {
                return None;
            }
            let pos = dag.partition_point(|&x| x < i);
            let moves = dag.len() - pos;
            dag.insert(pos, i);
            Some((
                OpWord {
                    dag,
                    ann: word.ann.clone(),
                },
                if moves % 2 == 0 { 1.0 } else { -1.0 },
            ))
        }
    }
}

/// word * b_i^dag, normal-ordered by commuting past the annihilator block:
/// b_j b_i^dag = delta_ij +- b_i^dag b_j.
fn append_creator(word: &OpWord, i: usize, statistics: Statistics, coeff: Complex64, out: &mut NormalPoly) {
    if word.ann.is_empty() {
        if let Some((w, s)) = insert_creator(word, i, statistics) {
            out.add(w, coeff * s);
        }
        return;
    }
    let mut ann = word.ann.clone();
    let j = ann.pop().unwrap();
    let stem = OpWord {
        dag: word.dag.clone(),
        ann,
    };
    // contraction with the adjacent annihilator
    if j == i {
        out.add(stem.clone(), coeff);
    }
    // commuted part: (stem * b_i^dag) * b_j with the statistics sign
    let sign = match statistics {
        Statistics::Bosonic => 1.0,
        Statistics::Fermionic => -1.0,
    };
    let mut inner = NormalPoly::default();
    append_creator(&stem, i, statistics, coeff * sign, &mut inner);
    for (w, c) in inner.terms {
        if let Some((w2, s2)) = append_annihilator(&w, j, statistics) {
            out.add(w2, c * s2);
        }
    }
}

/// Substitutes a = P b + Q b^dag + xi into H and normal-orders, producing
/// the exact Wick coefficients in the adapted operators.
pub fn wick_reorder(h: &PolynomialHamiltonian, params: &GaussianParams) -> Result<WickForm> {
    let mats = bogoliubov_matrices(params)?;
    wick_reorder_mats(h, &mats)
}

/// The same reordering from raw transformation data.
pub fn wick_reorder_mats(h: &PolynomialHamiltonian, mats: &BogMatrices) -> Result<WickForm> {
    h.validate()?;
    let n = h.n_modes;
    let stat = h.statistics;
    let mut total = NormalPoly::default();
    for (word, &coeff) in &h.terms {
        // operator sequence of the canonical word, left to right
        let seq: Vec<Elem> = word
            .dag
            .iter()
            .map(|&i| Elem::Dag(i))
            .chain(word.ann.iter().map(|&i| Elem::Ann(i)))
            .collect();
        let mut poly = NormalPoly::constant(coeff);
        for elem in seq {
            // linear form of the substituted operator:
            // a_j     = sum_i P[j,i] b_i + Q[j,i] b_i^dag + xi_j
            // a_j^dag = sum_i conj(P[j,i]) b_i^dag + conj(Q[j,i]) b_i + conj(xi_j)
            let mut next = NormalPoly::default();
            for (w, c) in &poly.terms {
                match elem {
                    Elem::Ann(j) => {
                        for i in 0..n {
                            let cp = *c * mats.p[(j, i)];
                            if cp != ZERO {
                                if let Some((w2, s)) = append_annihilator(w, i, stat) {
                                    next.add(w2, cp * s);
                                }
                            }
                            let cq = *c * mats.q[(j, i)];
                            if cq != ZERO {
                                append_creator(w, i, stat, cq, &mut next);
                            }
                        }
                        let cs = *c * mats.xi[j];
                        if cs != ZERO {
                            next.add(w.clone(), cs);
                        }
                    }
                    Elem::Dag(j) => {
                        for i in 0..n {
                            let cp = *c * mats.p[(j, i)].conj();
                            if cp != ZERO {
                                append_creator(w, i, stat, cp, &mut next);
                            }
                            let cq = *c * mats.q[(j, i)].conj();
                            if cq != ZERO {
                                if let Some((w2, s)) = append_annihilator(w, i, stat) {
                                    next.add(w2, cq * s);
                                }
                            }
                        }
                        let cs = *c * mats.xi[j].conj();
                        if cs != ZERO {
                            next.add(w.clone(), cs);
                        }
                    }
                }
            }
            poly = next;
        }
        for (w, c) in poly.terms {
            total.add(w, c);
        }
    }

    let mut b = ZERO;
    let mut k = CVec::zeros(n);
    let mut o = CMat::zeros(n, n);
    let mut d = CMat::zeros(n, n);
    let mut higher = BTreeMap::new();
    for (word, c) in total.terms {
        if c.norm() == 0.0 {
            continue;
        }
        match (word.dag.len(), word.ann.len()) {
            (0, 0) => b = c,
            (1, 0) => k[word.dag[0]] = c,
            (0, 1) => {
                // hermiticity partner of K; checked below
            }
            (1, 1) => d[(word.dag[0], word.ann[0])] = c,
            (2, 0) => {
                let (i, j) = (word.dag[0], word.dag[1]);
                match stat {
                    Statistics::Bosonic => {
                        if i == j {
                            o[(i, i)] = c;
                        } else {
                            o[(i, j)] = c / 2.0;
                            o[(j, i)] = c / 2.0;
                        }
                    }
                    Statistics::Fermionic => {
                        o[(i, j)] = -c / 2.0;
                        o[(j, i)] = c / 2.0;
                    }
                }
            }
            (0, 2) => {
                // conjugate pair block; implied by hermiticity
            }
            _ => {
                higher.insert(word, c);
            }
        }
    }
    Ok(WickForm {
        b: b.re,
        k,
        o,
        d,
        higher,
    })
}

/// Families of Theorem cases (1)-(4).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    EvenBosonic,
    FullBosonic,
    EvenFermionic,
    OddFermionic,
}

impl Family {
    pub fn statistics(self) -> Statistics {
        match self {
            Family::EvenBosonic | Family::FullBosonic => Statistics::Bosonic,
            Family::EvenFermionic | Family::OddFermionic => Statistics::Fermionic,
        }
    }

    fn requires_even(self) -> bool {
        !matches!(self, Family::FullBosonic)
    }

    fn has_displacement(self) -> bool {
        matches!(self, Family::FullBosonic)
    }

    /// Real coordinate dimension of the local chart.
    fn chart_dim(self, n: usize) -> usize {
        let theta = match self.statistics() {
            Statistics::Bosonic => n * (n + 1) / 2,
            Statistics::Fermionic => n * (n - 1) / 2,
        };
        2 * theta + if self.has_displacement() { 2 * n } else { 0 }
    }
}

/// Chart step (theta', y') from real coordinates.
fn chart_params(family: Family, n: usize, x: &[f64]) -> GaussianParams {
    let mut theta = CMat::zeros(n, n);
    let mut idx = 0;
    match family.statistics() {
        Statistics::Bosonic => {
            for i in 0..n {
                for j in i..n {
                    let c = Complex64::new(x[idx], x[idx + 1]);
                    idx += 2;
                    theta[(i, j)] = c;
                    theta[(j, i)] = c;
                }
            }
        }
        Statistics::Fermionic => {
            for i in 0..n {
                for j in (i + 1)..n {
                    let c = Complex64::new(x[idx], x[idx + 1]);
                    idx += 2;
                    theta[(i, j)] = c;
                    theta[(j, i)] = -c;
                }
            }
        }
    }
    let y = if family.has_displacement() {
        let mut v = CVec::zeros(n);
        for i in 0..n {
            v[i] = Complex64::new(x[idx], x[idx + 1]);
            idx += 2;
        }
        Some(v)
    } else {
        None
    };
    debug_assert_eq!(idx, x.len());
    GaussianParams {
        statistics: family.statistics(),
        theta,
        y,
        odd_vector: None,
    }
}

/// Analytic gradient of the energy over the local chart at the current
/// state, read off the Wick coefficients: the first-order expansion is
/// B + 4 Im(sum theta_ij^bar O_ij) + 2 Im(sum y_i^bar K_i) for bosons and
/// B - 4 Im(sum theta_ij^bar O_ij) for fermions.
fn chart_gradient(family: Family, wf: &WickForm) -> Vec<f64> {
    let n = wf.k.len();
    let mut g = Vec::with_capacity(family.chart_dim(n));
    match family.statistics() {
        Statistics::Bosonic => {
            for i in 0..n {
                for j in i..n {
                    if i == j {
                        g.push(4.0 * wf.o[(i, i)].im);
                        g.push(-4.0 * wf.o[(i, i)].re);
                    } else {
                        g.push(8.0 * wf.o[(i, j)].im);
                        g.push(-8.0 * wf.o[(i, j)].re);
                    }
                }
            }
        }
        Statistics::Fermionic => {
            for i in 0..n {
                for j in (i + 1)..n {
                    g.push(-8.0 * wf.o[(i, j)].im);
                    g.push(8.0 * wf.o[(i, j)].re);
                }
            }
        }
    }
    if family.has_displacement() {
        for i in 0..n {
            g.push(2.0 * wf.k[i].im);
            g.push(-2.0 * wf.k[i].re);
        }
    }
    g
}

/// Extracts canonical GaussianParams from a forward frame.
///
/// The pairing matrix is c = -p^{-1} q; theta inverts the functional
/// calculus of the chart. For odd fermionic states the even part is
/// recovered by stripping the reference generator (V_u^2 = 1).
pub fn extract_params(frame: &Frame, odd_reference: Option<&CVec>) -> Result<GaussianParams> {
    let n = frame.p.nrows();
    match frame.statistics {
        Statistics::Bosonic => {
            let p_inv = frame
                .p
                .clone()
                .try_inverse()
                .ok_or(Error::DegenerateChart {
                    norm: f64::INFINITY,
                    limit: 1.0,
                })?;
            let c = -(&p_inv * &frame.q);
            let c = (&c + &c.transpose()) * Complex64::new(0.5, 0.0);
            let w = &c * c.adjoint();
            // theta = -i artanh(sqrt(w)) / (2 sqrt(w)) * c
            let fw = hermitian_fn(&w, |l| {
                let x = l.sqrt().min(1.0 - 1e-15);
                if x < 1e-150 {
                    0.5
                } else {
                    x.atanh() / (2.0 * x)
                }
            });
            let theta = (fw * &c).map(|z| -I * z);
            let theta = (&theta + &theta.transpose()) * Complex64::new(0.5, 0.0);
            // displacement: <a> = q^T conj(xi) - p^H xi = i y
            let mean = frame.q.transpose() * frame.xi.conjugate() - frame.p.adjoint() * &frame.xi;
            let y = CVec::from_iterator(n, mean.iter().map(|z| -I * z));
            let y = if y.iter().all(|z| z.norm() < 1e-300) {
                None
            } else {
                Some(y)
            };
            Ok(GaussianParams {
                statistics: Statistics::Bosonic,
                theta,
                y,
                odd_vector: None,
            })
        }
        Statistics::Fermionic => {
            let (even, odd_vec) = match odd_reference {
                None => (frame.clone(), None),
                Some(u0) => {
                    // W = E V_{u0} with V^2 = 1, so E = W V_{u0}
                    let v = odd_generator_frame(u0);
                    let even = Frame {
                        statistics: Statistics::Fermionic,
                        p: &v.p * &frame.p + &v.q * frame.q.conjugate(),
                        q: &v.p * &frame.q + &v.q * frame.p.conjugate(),
                        xi: CVec::zeros(n),
                    };
                    (even, Some(u0))
                }
            };
            let p_inv = even.p.clone().try_inverse().ok_or(Error::DegenerateChart {
                norm: f64::INFINITY,
                limit: std::f64::consts::FRAC_PI_4,
            })?;
            let c = -(&p_inv * &even.q);
            let c = (&c - &c.transpose()) * Complex64::new(0.5, 0.0);
            let w = &c * c.adjoint();
            let fw = hermitian_fn(&w, |l| {
                let x = l.sqrt();
                if x < 1e-150 {
                    0.5
                } else {
                    x.atan() / (2.0 * x)
                }
            });
            let theta = (fw * &c).map(|z| -I * z);
            let theta = (&theta - &theta.transpose()) * Complex64::new(0.5, 0.0);
            let odd_vector = match odd_vec {
                None => None,
                Some(u0) => {
                    // E = e^{iX_theta} Gamma(r): p_E = p_Gamma p_X, and the
                    // unitary rotation has p_Gamma = r^dag
                    let rot = rotation_frame(Statistics::Fermionic, &theta)?;
                    let p_rot_inv =
                        rot.p.clone().try_inverse().ok_or(Error::DegenerateChart {
                            norm: f64::INFINITY,
                            limit: std::f64::consts::FRAC_PI_4,
                        })?;
                    let p_gamma = &even.p * p_rot_inv;
                    let r = p_gamma.adjoint();
                    let u = &r * u0;
                    let norm = u.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                    Some(u / Complex64::new(norm, 0.0))
                }
            };
            Ok(GaussianParams {
                statistics: Statistics::Fermionic,
                theta,
                y: None,
                odd_vector,
            })
        }
    }
}

/// Options for [`minimize`].
#[derive(Debug, Clone)]
pub struct MinimizeOptions {
    pub restarts: usize,
    pub seed: u64,
    pub grad_tol: f64,
    pub max_iters: usize,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        Self {
            restarts: 8,
            seed: 1,
            grad_tol: 1e-9,
            max_iters: 120,
        }
    }
}

/// Result of one minimization.
#[derive(Debug, Clone)]
pub struct MinimizeOutcome {
    pub params: GaussianParams,
    pub energy: f64,
    pub grad_norm: f64,
    pub iterations: usize,
}

fn grad_norm(g: &[f64]) -> f64 {
    g.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Damped quasi-second-order descent over the Gaussian family.
///
/// Steps live in the local chart around the running state; the analytic
/// chart gradient comes from the Wick coefficients (K, O), the local
/// Hessian from central differences of that gradient. Random restarts guard
/// against the non-convexity of B.
pub fn minimize(
    h: &PolynomialHamiltonian,
    family: Family,
    opts: &MinimizeOptions,
) -> Result<MinimizeOutcome> {
    use rand::SeedableRng;
    h.validate()?;
    if h.statistics != family.statistics() {
        return Err(Error::Hamiltonian(
            "family statistics do not match the Hamiltonian".into(),
        ));
    }
    if family.requires_even() && !h.is_even() {
        return Err(Error::Hamiltonian(
            "even/odd families need an even Hamiltonian".into(),
        ));
    }
    let n = h.n_modes;
    let outcomes: Vec<Result<MinimizeOutcome>> = (0..opts.restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(
                opts.seed.wrapping_add(r as u64).wrapping_mul(0x9e3779b97f4a7c15),
            );
            minimize_single(h, family, n, opts, &mut rng, r == 0)
        })
        .collect();
    let mut best: Option<MinimizeOutcome> = None;
    let mut last_grad = f64::INFINITY;
    for oc in outcomes.into_iter().flatten() {
        last_grad = last_grad.min(oc.grad_norm);
        if oc.grad_norm <= opts.grad_tol {
            let better = match &best {
                None => true,
                Some(b) => oc.energy < b.energy,
            };
            if better {
                best = Some(oc);
            }
        }
    }
    best.ok_or(Error::NoStationaryPoint {
        grad_norm: last_grad,
        restarts: opts.restarts,
    })
}

fn minimize_single(
    h: &PolynomialHamiltonian,
    family: Family,
    n: usize,
    opts: &MinimizeOptions,
    rng: &mut impl Rng,
    from_origin: bool,
) -> Result<MinimizeOutcome> {
    let dim = family.chart_dim(n);
    // starting frame: vacuum for the first restart, random elsewhere
    let start_coords: Vec<f64> = if from_origin {
        vec![0.0; dim]
    } else {
        (0..dim).map(|_| rng.gen_range(-0.25..0.25)).collect()
    };
    let start = chart_params(family, n, &start_coords);
    let mut frame = forward_frame(&start)?;
    let odd_ref: Option<CVec> = if family == Family::OddFermionic {
        let mut u = CVec::zeros(n);
        u[0] = ONE;
        let v = odd_generator_frame(&u);
        frame = frame.compose_right(&v);
        Some(u)
    } else {
        None
    };

    let eval_grad = |frame: &Frame| -> Result<(f64, Vec<f64>)> {
        let wf = wick_reorder_mats(h, &invert_frame(frame))?;
        Ok((wf.b, chart_gradient(family, &wf)))
    };

    let (mut energy, mut grad) = eval_grad(&frame)?;
    let mut iterations = 0;
    let mut lambda = 1e-3;
    while iterations < opts.max_iters {
        let gn = grad_norm(&grad);
        if gn <= opts.grad_tol {
            break;
        }
        iterations += 1;
        // central-difference Hessian of the analytic chart gradient
        let fd = 1e-4;
        let mut hess = vec![0.0; dim * dim];
        for m in 0..dim {
            let mut xp = vec![0.0; dim];
            xp[m] = fd;
            let fp = frame.compose_right(&forward_frame(&chart_params(family, n, &xp))?);
            let (_, gp) = eval_grad(&fp)?;
            xp[m] = -fd;
            let fm = frame.compose_right(&forward_frame(&chart_params(family, n, &xp))?);
            let (_, gm) = eval_grad(&fm)?;
            for i in 0..dim {
                hess[i * dim + m] = (gp[i] - gm[i]) / (2.0 * fd);
            }
        }
        // symmetrize
        for i in 0..dim {
            for j in (i + 1)..dim {
                let avg = 0.5 * (hess[i * dim + j] + hess[j * dim + i]);
                hess[i * dim + j] = avg;
                hess[j * dim + i] = avg;
            }
        }
        // Levenberg-damped Newton step with backtracking
        let mut accepted = false;
        for _ in 0..40 {
            let mut a = nalgebra::DMatrix::<f64>::zeros(dim, dim);
            for i in 0..dim {
                for j in 0..dim {
                    a[(i, j)] = hess[i * dim + j];
                }
                a[(i, i)] += lambda;
            }
            let rhs = nalgebra::DVector::<f64>::from_iterator(dim, grad.iter().map(|&x| -x));
            let step = match a.lu().solve(&rhs) {
                Some(s) => s,
                None => {
                    lambda *= 10.0;
                    continue;
                }
            };
            // keep fermionic chart steps inside the nondegenerate ball
            let step_norm = step.iter().map(|x| x * x).sum::<f64>().sqrt();
            let capped = if step_norm > 0.5 {
                &step * (0.5 / step_norm)
            } else {
                step.clone()
            };
            let coords: Vec<f64> = capped.iter().copied().collect();
            let trial_params = chart_params(family, n, &coords);
            let trial = match forward_frame(&trial_params) {
                Ok(t) => frame.compose_right(&t),
                Err(_) => {
                    lambda *= 10.0;
                    continue;
                }
            };
            match eval_grad(&trial) {
                Ok((e2, g2)) => {
                    let predicted: f64 =
                        grad.iter().zip(capped.iter()).map(|(g, s)| g * s).sum();
                    if e2 < energy + 1e-4 * predicted.min(0.0) || e2 < energy {
                        frame = trial;
                        energy = e2;
                        grad = g2;
                        lambda = (lambda * 0.3).max(1e-12);
                        accepted = true;
                        break;
                    }
                    lambda *= 10.0;
                }
                Err(_) => {
                    lambda *= 10.0;
                }
            }
        }
        if !accepted {
            break;
        }
    }
    let gn = grad_norm(&grad);
    let params = extract_params(&frame, odd_ref.as_ref())?;
    // canonical parameters must reproduce the state energy
    let check = wick_reorder(h, &params)?;
    if (check.b - energy).abs() > 1e-6 * (1.0 + energy.abs()) {
        return Err(Error::InternalConsistency {
            what: "canonical parameter extraction",
            rel: (check.b - energy).abs() / (1.0 + energy.abs()),
        });
    }
    Ok(MinimizeOutcome {
        params,
        energy,
        grad_norm: gn,
        iterations,
    })
}

/// The stationarity certificate at `params`: sup norms of K and O, the
/// diagonal matrix D, and (for the full bosonic family) its smallest
/// eigenvalue.
#[derive(Debug, Clone)]
pub struct Certificate {
    pub b: f64,
    pub norm_k: f64,
    pub norm_o: f64,
    pub d: CMat,
    pub min_eig_d: Option<f64>,
}

pub fn beliaev_certificate(
    h: &PolynomialHamiltonian,
    params: &GaussianParams,
    check_d_positive: bool,
) -> Result<Certificate> {
    let wf = wick_reorder(h, params)?;
    let min_eig_d = if check_d_positive {
        Some(
            wf.d.clone()
                .symmetric_eigen()
                .eigenvalues
                .iter()
                .fold(f64::INFINITY, |a, &b| a.min(b)),
        )
    } else {
        None
    };
    Ok(Certificate {
        b: wf.b,
        norm_k: wf.norm_k(),
        norm_o: wf.norm_o(),
        d: wf.d,
        min_eig_d,
    })
}

// ---------------------------------------------------------------------------
// Truncated-Fock oracle
// ---------------------------------------------------------------------------

/// Occupation basis of the truncated Fock space: every mode capped at
/// `cutoff` occupation for bosons, at 1 for fermions.
#[derive(Debug, Clone)]
pub struct FockBasis {
    pub statistics: Statistics,
    pub n_modes: usize,
    pub cutoff: usize,
    pub states: Vec<Vec<usize>>,
    index: std::collections::HashMap<Vec<usize>, usize>,
}

impl FockBasis {
    pub fn new(statistics: Statistics, n_modes: usize, cutoff: usize, bound: usize) -> Result<Self> {
        let cap = match statistics {
            Statistics::Bosonic => cutoff,
            Statistics::Fermionic => 1,
        };
        let dim = (cap + 1).checked_pow(n_modes as u32).unwrap_or(usize::MAX);
        if dim > bound {
            return Err(Error::OracleTooLarge { dim, bound });
        }
        let mut states = Vec::with_capacity(dim);
        let mut cur = vec![0usize; n_modes];
        loop {
            states.push(cur.clone());
            let mut k = n_modes;
            loop {
                if k == 0 {
                    let index = states
                        .iter()
                        .enumerate()
                        .map(|(i, s)| (s.clone(), i))
                        .collect();
                    return Ok(Self {
                        statistics,
                        n_modes,
                        cutoff: cap,
                        states,
                        index,
                    });
                }
                k -= 1;
                if cur[k] < cap {
                    cur[k] += 1;
                    for c in cur.iter_mut().skip(k + 1) {
                        *c = 0;
                    }
                    break;
                }
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    fn lookup(&self, state: &[usize]) -> Option<usize> {
        self.index.get(state).copied()
    }
}

/// Applies a normal-ordered word to a basis ket; returns (target, amplitude)
/// or None if the result leaves the truncated space.
fn apply_word(
    basis: &FockBasis,
    word: &OpWord,
    ket: &[usize],
) -> Option<(usize, f64)> {
    let mut occ = ket.to_vec();
    let mut amp = 1.0f64;
    let jw_sign = |occ: &[usize], i: usize| -> f64 {
        let swaps: usize = occ[..i].iter().sum();
        if swaps % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    };
    for &i in word.ann.iter().rev() {
        if occ[i] == 0 {
            return None;
        }
        match basis.statistics {
            Statistics::Bosonic => {
                amp *= (occ[i] as f64).sqrt();
            }
            Statistics::Fermionic => {
                amp *= jw_sign(&occ, i);
            }
        }
        occ[i] -= 1;
    }
    for &i in word.dag.iter().rev() {
        match basis.statistics {
            Statistics::Bosonic => {
                if occ[i] >= basis.cutoff {
                    return None;
                }
                amp *= ((occ[i] + 1) as f64).sqrt();
            }
            Statistics::Fermionic => {
                if occ[i] == 1 {
                    return None;
                }
                amp *= jw_sign(&occ, i);
            }
        }
        occ[i] += 1;
    }
    basis.lookup(&occ).map(|idx| (idx, amp))
}

/// Dense hermitian matrix of H on the truncated basis.
pub fn hamiltonian_matrix(h: &PolynomialHamiltonian, basis: &FockBasis) -> Result<CMat> {
    h.validate()?;
    let dim = basis.dim();
    let mut m = CMat::zeros(dim, dim);
    for (word, &coeff) in &h.terms {
        for (col, ket) in basis.states.iter().enumerate() {
            if let Some((row, amp)) = apply_word(basis, word, ket) {
                m[(row, col)] += coeff * amp;
            }
        }
    }
    // defensively hermitize away multiplication-order roundoff
    let m = (&m + &m.adjoint()) * Complex64::new(0.5, 0.0);
    Ok(m)
}

/// Oracle result: the lowest eigenvalues of H on the truncated basis.
#[derive(Debug, Clone)]
pub struct OracleResult {
    pub dim: usize,
    pub eigenvalues: Vec<f64>,
}

/// Brute-force validation oracle: dense diagonalization of H on the
/// truncated occupation basis.
pub fn fock_oracle(
    h: &PolynomialHamiltonian,
    cutoff: usize,
    bound: usize,
) -> Result<OracleResult> {
    let basis = FockBasis::new(h.statistics, h.n_modes, cutoff, bound)?;
    let m = hamiltonian_matrix(h, &basis)?;
    let mut eig: Vec<f64> = m.symmetric_eigen().eigenvalues.iter().copied().collect();
    eig.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(OracleResult {
        dim: basis.dim(),
        eigenvalues: eig,
    })
}

/// The normalized Gaussian state vector of `params` on a truncated basis,
/// built independently of the Wick machinery (pairing exponential series,
/// displacement series, odd generator): an oracle for expectation values.
pub fn gaussian_state_vector(params: &GaussianParams, basis: &FockBasis) -> Result<CVec> {
    let n = params.n_modes();
    let frame = forward_frame(params)?;
    let dim = basis.dim();

    // pairing matrix c = -p^{-1} q of the even part
    let apply_dagdag = |coef: &CMat, v: &CVec| -> CVec {
        let mut out = CVec::zeros(dim);
        for (col, ket) in basis.states.iter().enumerate() {
            if v[col] == ZERO {
                continue;
            }
            for i in 0..n {
                for j in 0..n {
                    if coef[(i, j)] == ZERO {
                        continue;
                    }
                    let word = OpWord {
                        dag: vec![i, j],
                        ann: vec![],
                    };
                    // raw (unsorted) application a_i^dag a_j^dag
                    let mut occ = ket.clone();
                    let mut amp = 1.0;
                    let mut ok = true;
                    let _ = &word;
                    for &m in [j, i].iter() {
                        match basis.statistics {
                            Statistics::Bosonic => {
                                if occ[m] >= basis.cutoff {
                                    ok = false;
                                    break;
                                }
                                amp *= ((occ[m] + 1) as f64).sqrt();
                                occ[m] += 1;
                            }
                            Statistics::Fermionic => {
                                if occ[m] == 1 {
                                    ok = false;
                                    break;
                                }
                                let swaps: usize = occ[..m].iter().sum();
                                if swaps % 2 == 1 {
                                    amp = -amp;
                                }
                                occ[m] += 1;
                            }
                        }
                    }
                    if ok {
                        if let Some(row) = basis.lookup(&occ) {
                            out[row] += coef[(i, j)] * v[col] * amp;
                        }
                    }
                }
            }
        }
        out
    };

    match params.statistics {
        Statistics::Bosonic => {
            let p_inv = frame.p.clone().try_inverse().ok_or(Error::DegenerateChart {
                norm: f64::INFINITY,
                limit: 1.0,
            })?;
            let c = -(p_inv * &frame.q);
            // exp(1/2 c_ij a_i^dag a_j^dag) |0>
            let vac = basis.lookup(&vec![0; n]).unwrap();
            let mut psi = CVec::zeros(dim);
            psi[vac] = ONE;
            let half_c = &c * Complex64::new(0.5, 0.0);
            let mut term = psi.clone();
            for k in 1..200 {
                term = apply_dagdag(&half_c, &term) / Complex64::new(k as f64, 0.0);
                let tn = term.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                psi += &term;
                if tn < 1e-16 {
                    break;
                }
            }
            // displacement e^{i phi(y)} = e^{(iy) a^dag} e^{-conj(iy) a} e^{-|y|^2/2}
            if let Some(y) = &params.y {
                let alpha: Vec<Complex64> = y.iter().map(|z| I * z).collect();
                // annihilation series
                let mut out = psi.clone();
                let mut term = psi.clone();
                for k in 1..200 {
                    let mut next = CVec::zeros(dim);
                    for (col, ket) in basis.states.iter().enumerate() {
                        if term[col] == ZERO {
                            continue;
                        }
                        for (i, a) in alpha.iter().enumerate() {
                            if ket[i] == 0 {
                                continue;
                            }
                            let mut occ = ket.clone();
                            let amp = (occ[i] as f64).sqrt();
                            occ[i] -= 1;
                            if let Some(row) = basis.lookup(&occ) {
                                next[row] += -a.conj() * term[col] * amp;
                            }
                        }
                    }
                    term = next / Complex64::new(k as f64, 0.0);
                    let tn = term.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                    out += &term;
                    if tn < 1e-16 {
                        break;
                    }
                }
                // creation series
                let mut out2 = out.clone();
                let mut term = out.clone();
                for k in 1..200 {
                    let mut next = CVec::zeros(dim);
                    for (col, ket) in basis.states.iter().enumerate() {
                        if term[col] == ZERO {
                            continue;
                        }
                        for (i, a) in alpha.iter().enumerate() {
                            if ket[i] >= basis.cutoff {
                                continue;
                            }
                            let mut occ = ket.clone();
                            let amp = ((occ[i] + 1) as f64).sqrt();
                            occ[i] += 1;
                            if let Some(row) = basis.lookup(&occ) {
                                next[row] += *a * term[col] * amp;
                            }
                        }
                    }
                    term = next / Complex64::new(k as f64, 0.0);
                    let tn = term.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                    out2 += &term;
                    if tn < 1e-16 {
                        break;
                    }
                }
                psi = out2;
            }
            let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            Ok(psi / Complex64::new(norm, 0.0))
        }
        Statistics::Fermionic => {
            // start from the vacuum or the 1-particle odd state
            let mut psi = CVec::zeros(dim);
            if let Some(u) = &params.odd_vector {
                for i in 0..n {
                    let mut occ = vec![0usize; n];
                    occ[i] = 1;
                    if let Some(row) = basis.lookup(&occ) {
                        psi[row] = u[i];
                    }
                }
            } else {
                psi[basis.lookup(&vec![0; n]).unwrap()] = ONE;
            }
            // exact unitary e^{i X_theta} on the 2^n space
            let mut x = CMat::zeros(dim, dim);
            for (col, ket) in basis.states.iter().enumerate() {
                for i in 0..n {
                    for j in 0..n {
                        let t = params.theta[(i, j)];
                        if t != ZERO {
                            // theta_ij a_i^dag a_j^dag
                            let mut occ = ket.clone();
                            let mut amp = 1.0;
                            let mut ok = true;
                            for &m in [j, i].iter() {
                                if occ[m] == 1 {
                                    ok = false;
                                    break;
                                }
                                let swaps: usize = occ[..m].iter().sum();
                                if swaps % 2 == 1 {
                                    amp = -amp;
                                }
                                occ[m] += 1;
                            }
                            if ok {
                                if let Some(row) = basis.lookup(&occ) {
                                    x[(row, col)] += t * amp;
                                }
                            }
                        }
                        let tc = params.theta[(i, j)].conj();
                        if tc != ZERO {
                            // conj(theta)_ij a_j a_i
                            let mut occ = ket.clone();
                            let mut amp = 1.0;
                            let mut ok = true;
                            for &m in [i, j].iter() {
                                if occ[m] == 0 {
                                    ok = false;
                                    break;
                                }
                                let swaps: usize = occ[..m].iter().sum();
                                if swaps % 2 == 1 {
                                    amp = -amp;
                                }
                                occ[m] -= 1;
                            }
                            if ok {
                                if let Some(row) = basis.lookup(&occ) {
                                    x[(row, col)] += tc * amp;
                                }
                            }
                        }
                    }
                }
            }
            let se = x.symmetric_eigen();
            let phases = CVec::from_iterator(
                se.eigenvalues.len(),
                se.eigenvalues.iter().map(|&l| (I * l).exp()),
            );
            let u_mat = &se.eigenvectors * CMat::from_diagonal(&phases) * se.eigenvectors.adjoint();
            let psi = u_mat * psi;
            let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            Ok(psi / Complex64::new(norm, 0.0))
        }
    }
}

/// <psi|M|psi> for a normalized vector.
pub fn expectation(m: &CMat, psi: &CVec) -> f64 {
    (psi.adjoint() * m * psi)[(0, 0)].re
}

// ---------------------------------------------------------------------------
// Random Hamiltonian generators (bounded below by construction)
// ---------------------------------------------------------------------------

/// Random even quartic Hamiltonian: an arbitrary even quadratic part plus a
/// repulsive density-density quartic part (bosons) or a fully random even
/// quartic part (fermions, bounded automatically).
pub fn random_even_quartic(
    statistics: Statistics,
    n: usize,
    rng: &mut impl Rng,
) -> PolynomialHamiltonian {
    let mut h = PolynomialHamiltonian::new(statistics, n);
    let mut c = |rng: &mut dyn rand::RngCore| {
        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    };
    // quadratic: number-type and pairing terms
    for i in 0..n {
        for j in i..n {
            if i == j {
                h.add_hermitian(&[i], &[j], Complex64::new(rng.gen_range(0.2..1.5), 0.0));
            } else {
                h.add_hermitian(&[i], &[j], 0.5 * c(rng));
            }
        }
    }
    for i in 0..n {
        for j in i..n {
            if statistics == Statistics::Fermionic && i == j {
                continue;
            }
            h.add_hermitian(&[i, j], &[], 0.4 * c(rng));
        }
    }
    match statistics {
        Statistics::Bosonic => {
            // repulsive two-body part keeps B bounded below
            for i in 0..n {
                for j in 0..n {
                    let w = rng.gen_range(0.2..0.8);
                    h.add_term(&[i, j], &[j, i], Complex64::new(w, 0.0));
                }
            }
        }
        Statistics::Fermionic => {
            for i in 0..n {
                for j in (i + 1)..n {
                    for k in 0..n {
                        for l in (k + 1)..n {
                            if rng.gen_bool(0.5) {
                                h.add_hermitian(&[i, j], &[l, k], 0.3 * c(rng));
                            }
                        }
                    }
                }
            }
        }
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn cplx(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_params(
        family: Family,
        n: usize,
        scale: f64,
        rng: &mut impl Rng,
    ) -> GaussianParams {
        let dim = family.chart_dim(n);
        let coords: Vec<f64> = (0..dim).map(|_| rng.gen_range(-scale..scale)).collect();
        chart_params(family, n, &coords)
    }

    #[test]
    fn identity_transform_at_origin() {
        for stat in [Statistics::Bosonic, Statistics::Fermionic] {
            let params = GaussianParams::vacuum(stat, 3);
            let m = bogoliubov_matrices(&params).unwrap();
            assert!((m.p.clone() - CMat::identity(3, 3)).norm() < 1e-15);
            assert!(m.q.norm() < 1e-15);
            assert!(m.xi.norm() < 1e-15);
        }
    }

    #[test]
    fn scalar_bosonic_rotation() {
        // theta = beta real: P = cosh(2 beta), |Q| = sinh(2 beta)
        let beta = 0.37;
        let mut params = GaussianParams::vacuum(Statistics::Bosonic, 1);
        params.theta[(0, 0)] = cplx(beta, 0.0);
        let m = bogoliubov_matrices(&params).unwrap();
        assert!((m.p[(0, 0)].re - (2.0 * beta).cosh()).abs() < 1e-14);
        assert!((m.q[(0, 0)].norm() - (2.0 * beta).sinh()).abs() < 1e-14);
    }

    #[test]
    fn group_relations_random() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        for family in [Family::FullBosonic, Family::EvenFermionic] {
            for _ in 0..20 {
                let params = random_params(family, 3, 0.3, &mut rng);
                let f = forward_frame(&params).unwrap();
                assert!(f.relation_residual() < 1e-12);
                // inverse relations quoted in the interface
                let m = bogoliubov_matrices(&params).unwrap();
                let n = 3;
                let id = CMat::identity(n, n);
                let sign = match family.statistics() {
                    Statistics::Bosonic => -1.0,
                    Statistics::Fermionic => 1.0,
                };
                let unit = &m.p * m.p.adjoint()
                    + (&m.q * m.q.adjoint()).map(|z| z * sign)
                    - id;
                assert!(unit.norm() < 1e-12);
                let pqt = &m.p * m.q.transpose();
                let residual = match family.statistics() {
                    Statistics::Bosonic => (&pqt - pqt.transpose()).norm(),
                    Statistics::Fermionic => (&pqt + pqt.transpose()).norm(),
                };
                assert!(residual < 1e-12);
            }
        }
    }

    #[test]
    fn group_composition() {
        // frame of params1 then params2 composes via the matrix product rule
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for family in [Family::EvenBosonic, Family::EvenFermionic] {
            let p1 = random_params(family, 3, 0.2, &mut rng);
            let p2 = random_params(family, 3, 0.2, &mut rng);
            let f1 = forward_frame(&p1).unwrap();
            let f2 = forward_frame(&p2).unwrap();
            let composed = f1.compose_right(&f2);
            assert!(composed.relation_residual() < 1e-12);
        }
    }

    #[test]
    fn fermionic_chart_boundary() {
        let mut params = GaussianParams::vacuum(Statistics::Fermionic, 2);
        params.theta[(0, 1)] = cplx(0.9, 0.0); // norm 0.9 > pi/4
        params.theta[(1, 0)] = cplx(-0.9, 0.0);
        assert!(matches!(
            bogoliubov_matrices(&params),
            Err(Error::DegenerateChart { .. })
        ));
    }

    #[test]
    fn wick_number_operator_at_vacuum() {
        let mut h = PolynomialHamiltonian::new(Statistics::Bosonic, 1);
        h.add_term(&[0], &[0], cplx(0.7, 0.0));
        let wf = wick_reorder(&h, &GaussianParams::vacuum(Statistics::Bosonic, 1)).unwrap();
        assert_eq!(wf.b, 0.0);
        assert_eq!(wf.norm_k(), 0.0);
        assert_eq!(wf.norm_o(), 0.0);
        assert!((wf.d[(0, 0)] - cplx(0.7, 0.0)).norm() < 1e-15);
        assert!(wf.higher.is_empty());
    }

    #[test]
    fn wick_matches_fock_expectation() {
        // <state|H|state> from the independent basis construction equals B
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for (family, n, cutoff) in [
            (Family::FullBosonic, 2, 20),
            (Family::EvenBosonic, 2, 20),
            (Family::EvenFermionic, 3, 1),
            (Family::OddFermionic, 3, 1),
        ] {
            let stat = family.statistics();
            let h = random_even_quartic(stat, n, &mut rng);
            // small parameters keep the bosonic truncation error far below
            // the comparison tolerance (quartic moments weight the tails)
            let mut params = random_params(family, n, 0.08, &mut rng);
            if family == Family::OddFermionic {
                let mut u = CVec::zeros(n);
                u[0] = cplx(0.6, 0.0);
                u[1] = cplx(0.0, 0.8);
                params.odd_vector = Some(u);
            }
            let wf = wick_reorder(&h, &params).unwrap();
            let basis = FockBasis::new(stat, n, cutoff, 100_000).unwrap();
            let m = hamiltonian_matrix(&h, &basis).unwrap();
            let psi = gaussian_state_vector(&params, &basis).unwrap();
            let e = expectation(&m, &psi);
            assert!(
                (wf.b - e).abs() < 1e-8 * (1.0 + e.abs()),
                "{family:?}: wick B = {} vs oracle {}",
                wf.b,
                e
            );
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for family in [
            Family::EvenBosonic,
            Family::FullBosonic,
            Family::EvenFermionic,
            Family::OddFermionic,
        ] {
            let n = match family.statistics() {
                Statistics::Bosonic => 2,
                Statistics::Fermionic => 3,
            };
            let h = random_even_quartic(family.statistics(), n, &mut rng);
            let mut frame = forward_frame(&random_params(family, n, 0.15, &mut rng)).unwrap();
            if family == Family::OddFermionic {
                let mut u = CVec::zeros(n);
                u[0] = ONE;
                frame = frame.compose_right(&odd_generator_frame(&u));
            }
            let wf = wick_reorder_mats(&h, &invert_frame(&frame)).unwrap();
            let grad = chart_gradient(family, &wf);
            let dim = family.chart_dim(n);
            let fd = 1e-5;
            for m in 0..dim {
                let mut x = vec![0.0; dim];
                x[m] = fd;
                let ep = wick_reorder_mats(
                    &h,
                    &invert_frame(
                        &frame.compose_right(&forward_frame(&chart_params(family, n, &x)).unwrap()),
                    ),
                )
                .unwrap()
                .b;
                x[m] = -fd;
                let em = wick_reorder_mats(
                    &h,
                    &invert_frame(
                        &frame.compose_right(&forward_frame(&chart_params(family, n, &x)).unwrap()),
                    ),
                )
                .unwrap()
                .b;
                let numeric = (ep - em) / (2.0 * fd);
                let scale = 1.0 + numeric.abs().max(grad[m].abs());
                assert!(
                    (numeric - grad[m]).abs() / scale < 1e-6,
                    "{family:?} coord {m}: analytic {} vs numeric {}",
                    grad[m],
                    numeric
                );
            }
        }
    }

    #[test]
    fn shifted_oscillator_displaced_minimum() {
        // H = w a^dag a + lambda (a^dag + a): B_min = -lambda^2 / w at
        // <a> = -lambda / w, i.e. y = i lambda / w
        let (w, lambda) = (1.3, 0.4);
        let mut h = PolynomialHamiltonian::new(Statistics::Bosonic, 1);
        h.add_term(&[0], &[0], cplx(w, 0.0));
        h.add_hermitian(&[0], &[], cplx(lambda, 0.0));
        let mut params = GaussianParams::vacuum(Statistics::Bosonic, 1);
        let mut y = CVec::zeros(1);
        y[0] = cplx(0.0, lambda / w);
        params.y = Some(y);
        let wf = wick_reorder(&h, &params).unwrap();
        assert!((wf.b - (-lambda * lambda / w)).abs() < 1e-13);
        assert!(wf.norm_k() < 1e-13);
        assert!(wf.norm_o() < 1e-14);
        assert!((wf.d[(0, 0)] - cplx(w, 0.0)).norm() < 1e-13);
    }

    #[test]
    fn scalar_pairing_analytic_minimum() {
        // H = A a^dag a + (B2/2)(a^dag a^dag + aa): theta = i beta,
        // tanh(4 beta) = B2 / A, B = (sqrt(A^2 - B2^2) - A)/2
        let (a, b2) = (2.0, 1.1);
        let mut h = PolynomialHamiltonian::new(Statistics::Bosonic, 1);
        h.add_term(&[0], &[0], cplx(a, 0.0));
        h.add_hermitian(&[0, 0], &[], cplx(b2 / 2.0, 0.0));
        let beta = 0.25 * (b2 / a).atanh();
        let mut params = GaussianParams::vacuum(Statistics::Bosonic, 1);
        params.theta[(0, 0)] = cplx(0.0, beta);
        let wf = wick_reorder(&h, &params).unwrap();
        let want = ((a * a - b2 * b2).sqrt() - a) / 2.0;
        assert!((wf.b - want).abs() < 1e-13, "B {} vs {}", wf.b, want);
        assert!(wf.norm_o() < 1e-12);
        assert!((wf.d[(0, 0)].re - (a * a - b2 * b2).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn minimize_quadratic_bosonic() {
        let (a, b2) = (2.0, 1.1);
        let mut h = PolynomialHamiltonian::new(Statistics::Bosonic, 1);
        h.add_term(&[0], &[0], cplx(a, 0.0));
        h.add_hermitian(&[0, 0], &[], cplx(b2 / 2.0, 0.0));
        let opts = MinimizeOptions {
            restarts: 4,
            ..Default::default()
        };
        let out = minimize(&h, Family::EvenBosonic, &opts).unwrap();
        let want = ((a * a - b2 * b2).sqrt() - a) / 2.0;
        assert!(out.grad_norm <= 1e-9);
        assert!((out.energy - want).abs() < 1e-9);
        let cert = beliaev_certificate(&h, &out.params, false).unwrap();
        assert!(cert.norm_k < 1e-6 && cert.norm_o < 1e-6);
        assert!((cert.d[(0, 0)].re - (a * a - b2 * b2).sqrt()).abs() < 1e-6);
    }

    #[test]
    fn minimize_quartic_vacuum_stationary() {
        // H = w a^dag a + u a^dag a^dag a a: the vacuum is stationary and
        // optimal for the even family
        let mut h = PolynomialHamiltonian::new(Statistics::Bosonic, 1);
        h.add_term(&[0], &[0], cplx(1.0, 0.0));
        h.add_term(&[0, 0], &[0, 0], cplx(0.5, 0.0));
        let wf = wick_reorder(&h, &GaussianParams::vacuum(Statistics::Bosonic, 1)).unwrap();
        let grad = chart_gradient(Family::EvenBosonic, &wf);
        assert!(grad_norm(&grad) < 1e-14);
        let out = minimize(&h, Family::EvenBosonic, &MinimizeOptions::default()).unwrap();
        assert!(out.energy.abs() < 1e-10);
        assert!(out.params.theta.norm() < 1e-4);
    }

    #[test]
    fn minimize_fermionic_pairing_toy() {
        // two fermionic modes with attractive pairing: quadratic, so the
        // Gaussian minimum equals the exact ground energy
        let (eps, g) = (0.5, 0.8);
        let mut h = PolynomialHamiltonian::new(Statistics::Fermionic, 2);
        h.add_term(&[0], &[0], cplx(eps, 0.0));
        h.add_term(&[1], &[1], cplx(eps, 0.0));
        h.add_hermitian(&[0, 1], &[], cplx(-g, 0.0));
        let out = minimize(&h, Family::EvenFermionic, &MinimizeOptions::default()).unwrap();
        let oracle = fock_oracle(&h, 1, 1000).unwrap();
        let e0 = oracle.eigenvalues[0];
        // exact: min(0, eps - sqrt(eps^2 + g^2))
        let exact = (eps - (eps * eps + g * g).sqrt()).min(0.0);
        assert!((e0 - exact).abs() < 1e-12);
        assert!((out.energy - e0).abs() < 1e-8, "{} vs {e0}", out.energy);
        assert!(out.energy < 0.0);
        let cert = beliaev_certificate(&h, &out.params, false).unwrap();
        assert!(cert.norm_k < 1e-7 && cert.norm_o < 1e-7);
        // grid scan over the Gaussian family cannot beat the minimizer
        let basis = FockBasis::new(Statistics::Fermionic, 2, 1, 1000).unwrap();
        let m = hamiltonian_matrix(&h, &basis).unwrap();
        for t in 0..30 {
            let beta = -0.7 + 0.05 * t as f64;
            let mut params = GaussianParams::vacuum(Statistics::Fermionic, 2);
            params.theta[(0, 1)] = cplx(0.0, beta);
            params.theta[(1, 0)] = cplx(0.0, -beta);
            let psi = gaussian_state_vector(&params, &basis).unwrap();
            let e = expectation(&m, &psi);
            assert!(e >= out.energy - 1e-9);
        }
    }

    #[test]
    fn oracle_trivial_and_shifted() {
        let mut h = PolynomialHamiltonian::new(Statistics::Bosonic, 1);
        h.add_term(&[0], &[0], cplx(1.0, 0.0));
        let r = fock_oracle(&h, 10, 1000).unwrap();
        assert!(r.eigenvalues[0].abs() < 1e-12);

        let (w, lambda) = (1.0, 0.6);
        let mut h = PolynomialHamiltonian::new(Statistics::Bosonic, 1);
        h.add_term(&[0], &[0], cplx(w, 0.0));
        h.add_hermitian(&[0], &[], cplx(lambda, 0.0));
        let r = fock_oracle(&h, 60, 1000).unwrap();
        assert!((r.eigenvalues[0] - (-lambda * lambda / w)).abs() < 1e-8);
    }

    #[test]
    fn oracle_too_large_reported() {
        let h = PolynomialHamiltonian::new(Statistics::Bosonic, 3);
        assert!(matches!(
            fock_oracle(&h, 40, 1000),
            Err(Error::OracleTooLarge { .. })
        ));
    }

    #[test]
    fn unsupported_degree_rejected() {
        let mut h = PolynomialHamiltonian::new(Statistics::Bosonic, 1);
        h.add_term(&[0, 0, 0], &[0, 0], cplx(1.0, 0.0));
        assert!(matches!(
            wick_reorder(&h, &GaussianParams::vacuum(Statistics::Bosonic, 1)),
            Err(Error::UnsupportedDegree { .. })
        ));
    }

    #[test]
    fn variational_bound_random_trials() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        for _ in 0..6 {
            let h = random_even_quartic(Statistics::Bosonic, 2, &mut rng);
            let oracle = fock_oracle(&h, 12, 100_000).unwrap();
            let e0 = oracle.eigenvalues[0];
            for _ in 0..5 {
                let params = random_params(Family::FullBosonic, 2, 0.3, &mut rng);
                let wf = wick_reorder(&h, &params).unwrap();
                assert!(wf.b >= e0, "B {} below oracle {}", wf.b, e0);
            }
        }
        for _ in 0..6 {
            let h = random_even_quartic(Statistics::Fermionic, 3, &mut rng);
            let oracle = fock_oracle(&h, 1, 100_000).unwrap();
            let e0 = oracle.eigenvalues[0];
            for _ in 0..5 {
                let params = random_params(Family::EvenFermionic, 3, 0.2, &mut rng);
                let wf = wick_reorder(&h, &params).unwrap();
                assert!(wf.b >= e0, "B {} below oracle {}", wf.b, e0);
            }
        }
    }

    #[test]
    fn extraction_roundtrip() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
        for family in [Family::FullBosonic, Family::EvenFermionic, Family::OddFermionic] {
            let n = 3;
            let h = random_even_quartic(family.statistics(), n, &mut rng);
            let mut frame = forward_frame(&random_params(family, n, 0.2, &mut rng)).unwrap();
            let odd_ref = if family == Family::OddFermionic {
                let mut u = CVec::zeros(n);
                u[0] = ONE;
                frame = frame.compose_right(&odd_generator_frame(&u));
                Some(u)
            } else {
                None
            };
            // a second chart step, then extraction must preserve the state
            let step = random_params(family, n, 0.15, &mut rng);
            frame = frame.compose_right(&forward_frame(&step).unwrap());
            let b_direct = wick_reorder_mats(&h, &invert_frame(&frame)).unwrap().b;
            let params = extract_params(&frame, odd_ref.as_ref()).unwrap();
            let b_canon = wick_reorder(&h, &params).unwrap().b;
            assert!(
                (b_direct - b_canon).abs() < 1e-9 * (1.0 + b_direct.abs()),
                "{family:?}: {b_direct} vs {b_canon}"
            );
        }
    }

    #[test]
    fn beliaev_certificate_perturbation_slope() {
        // perturbing theta away from a stationary point grows |O| linearly
        let (a, b2) = (2.0, 1.1);
        let mut h = PolynomialHamiltonian::new(Statistics::Bosonic, 1);
        h.add_term(&[0], &[0], cplx(a, 0.0));
        h.add_hermitian(&[0, 0], &[], cplx(b2 / 2.0, 0.0));
        let beta = 0.25 * (b2 / a).atanh();
        let mut params = GaussianParams::vacuum(Statistics::Bosonic, 1);
        params.theta[(0, 0)] = cplx(0.0, beta);
        let slopes: Vec<f64> = [1e-3, 2e-3]
            .iter()
            .map(|&d| {
                let mut p = params.clone();
                p.theta[(0, 0)] += cplx(0.0, d);
                wick_reorder(&h, &p).unwrap().norm_o() / d
            })
            .collect();
        assert!((slopes[0] - slopes[1]).abs() / slopes[0] < 0.05);
        assert!(slopes[0] > 0.1);
    }

    #[test]
    fn full_bosonic_minimum_has_positive_d() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(29);
        let h = random_even_quartic(Statistics::Bosonic, 2, &mut rng);
        let out = minimize(&h, Family::FullBosonic, &MinimizeOptions::default()).unwrap();
        let cert = beliaev_certificate(&h, &out.params, true).unwrap();
        assert!(cert.norm_k <= 1e-6 && cert.norm_o <= 1e-6);
        assert!(cert.min_eig_d.unwrap() >= -1e-9);
    }
}
