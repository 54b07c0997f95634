//! Improved Bogoliubov method for the grand-canonical Bose gas: variational
//! coefficients f_k and g_k, the chemical-potential condition, damped
//! fixed-point iteration of S_k = g_k / D(k), and the stationarity
//! residuals (linear coefficient and pairing coefficient of the rotated
//! Hamiltonian).
//!
//! Kinetic convention in this module is t = 1/2 (the one-body term is
//! k^2/2 - mu). The Bogoliubov rotation covers the nonzero modes; the zero
//! mode is handled by the Weyl displacement alpha = sqrt(L^d kappa_c) e^{i tau},
//! with kappa_c the prescribed condensate density.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{Lattice, MomentumVector, PotentialSpec};
use crate::spectrum::DispersionTable;

/// Pure Gaussian trial state: condensate amplitude |alpha|, phase tau and
/// the pairing map S_k = 2 s_k c_k over nonzero modes. The number map
/// C_k = c_k^2 + |s_k|^2 is determined by the hyperbolic constraint
/// C_k = sqrt(1 + |S_k|^2).
#[derive(Debug, Clone)]
pub struct VariationalState {
    pub lattice: Lattice,
    pub potential: PotentialSpec,
    pub alpha_mod: f64,
    pub tau: f64,
    pub s: BTreeMap<MomentumVector, Complex64>,
}

/// Which form of f_k to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FForm {
    /// f_k = k^2/2 - mu + |alpha|^2 (v(0)+v(k))/L^d + sum (v(0)+v(k'-k)) |s_k'|^2 / L^d
    ExplicitMu,
    /// the mu-eliminated form obtained from the stationarity of B in alpha
    MuEliminated,
}

/// Wick coefficients of the rotated grand-canonical Hamiltonian.
#[derive(Debug, Clone)]
pub struct VariationalCoefficients {
    pub f: BTreeMap<MomentumVector, f64>,
    pub g: BTreeMap<MomentumVector, Complex64>,
    pub d: BTreeMap<MomentumVector, f64>,
    pub o: BTreeMap<MomentumVector, Complex64>,
    pub c_lin: Complex64,
    pub b: f64,
}

impl VariationalState {
    /// The state S = 0 (coherent state of the condensate mode only).
    pub fn condensate_only(
        lattice: Lattice,
        potential: PotentialSpec,
        kappa_c: f64,
        tau: f64,
    ) -> Result<Self> {
        if kappa_c < 0.0 {
            return Err(Error::Config(format!(
                "condensate density must be >= 0, got {kappa_c}"
            )));
        }
        let alpha_mod = (lattice.volume() * kappa_c).sqrt();
        let s = lattice
            .nonzero_points()
            .map(|p| (p.clone(), Complex64::new(0.0, 0.0)))
            .collect();
        Ok(Self {
            lattice,
            potential,
            alpha_mod,
            tau,
            s,
        })
    }

    pub fn alpha(&self) -> Complex64 {
        Complex64::from_polar(self.alpha_mod, self.tau)
    }

    /// C_k = sqrt(1 + |S_k|^2).
    pub fn c_of(&self, s: Complex64) -> f64 {
        (1.0 + s.norm_sqr()).sqrt()
    }

    /// Recovers (c_k, s_k) from (S_k, C_k): c_k = sqrt((C_k+1)/2),
    /// s_k = S_k / (2 c_k).
    pub fn raw_cs(&self, s_cap: Complex64) -> (f64, Complex64) {
        let c_cap = self.c_of(s_cap);
        let c = ((c_cap + 1.0) / 2.0).sqrt();
        (c, s_cap / (2.0 * c))
    }

    fn mode_data(&self) -> Result<ModeData> {
        let lat = &self.lattice;
        let v = &self.potential;
        let modes: Vec<MomentumVector> = self.s.keys().cloned().collect();
        let m = modes.len();
        let norms: Vec<f64> = modes.iter().map(|p| lat.norm(p)).collect();
        let vhat: Vec<f64> = norms
            .iter()
            .map(|&r| v.hat_radial(r))
            .collect::<Result<_>>()?;
        let mut vdiff = vec![0.0; m * m];
        for i in 0..m {
            for j in 0..m {
                let dm = modes[i].sub(&modes[j]);
                vdiff[i * m + j] = v.hat_radial(lat.norm(&dm))?;
            }
        }
        Ok(ModeData {
            modes,
            norms,
            vhat,
            vdiff,
            vhat0: v.hat_radial(0.0)?,
        })
    }
}

struct ModeData {
    modes: Vec<MomentumVector>,
    norms: Vec<f64>,
    vhat: Vec<f64>,
    /// v_hat(k_i - k_j), row-major
    vdiff: Vec<f64>,
    vhat0: f64,
}

/// The chemical potential fixed by stationarity of B in alpha:
///
///   mu = v(0)|alpha|^2/L^d + sum_k (v(0)+v(k)) |s_k|^2 / L^d
///        - e^{2 i tau} sum_k v(k) conj(s_k) c_k / L^d.
///
/// The last term is real on phase-locked states; its real part is returned.
pub fn chemical_potential(st: &VariationalState) -> Result<f64> {
    if st.alpha_mod == 0.0 {
        return Err(Error::CondensateFreeState);
    }
    let data = st.mode_data()?;
    let vol = st.lattice.volume();
    let mut occupancy = 0.0;
    let mut pairing = Complex64::new(0.0, 0.0);
    for (i, p) in data.modes.iter().enumerate() {
        let s_cap = st.s[p];
        occupancy += (data.vhat0 + data.vhat[i]) * (st.c_of(s_cap) - 1.0) / 2.0;
        pairing += data.vhat[i] * s_cap.conj() / 2.0;
    }
    let phase = Complex64::from_polar(1.0, 2.0 * st.tau);
    let mu = data.vhat0 * st.alpha_mod * st.alpha_mod / vol + occupancy / vol
        - (phase * pairing).re / vol;
    Ok(mu)
}

/// Evaluates f_k, g_k, the diagonal coefficient D(k), the pairing residual
/// O(k), the linear coefficient C and the energy B at the given chemical
/// potential.
pub fn coefficients(st: &VariationalState, mu: f64, form: FForm) -> Result<VariationalCoefficients> {
    let data = st.mode_data()?;
    let vol = st.lattice.volume();
    let m = data.modes.len();
    let alpha = st.alpha();
    let alpha2 = alpha * alpha;
    let phase = Complex64::from_polar(1.0, 2.0 * st.tau);
    let s_caps: Vec<Complex64> = data.modes.iter().map(|p| st.s[p]).collect();
    let c_caps: Vec<f64> = s_caps.iter().map(|&s| st.c_of(s)).collect();

    // scalar sums shared by both f-forms
    let mut sum_v_sbar = Complex64::new(0.0, 0.0); // sum v(k') conj(S_k')
    for i in 0..m {
        sum_v_sbar += data.vhat[i] * s_caps[i].conj();
    }

    let mut f = BTreeMap::new();
    let mut g = BTreeMap::new();
    let mut d = BTreeMap::new();
    let mut o = BTreeMap::new();
    for i in 0..m {
        let kin = 0.5 * data.norms[i] * data.norms[i];
        let fk = match form {
            FForm::ExplicitMu => {
                let mut occ = 0.0;
                for j in 0..m {
                    occ += (data.vhat0 + data.vdiff[j * m + i]) * (c_caps[j] - 1.0) / 2.0;
                }
                kin - mu
                    + st.alpha_mod * st.alpha_mod * (data.vhat0 + data.vhat[i]) / vol
                    + occ / vol
            }
            FForm::MuEliminated => {
                let mut occ = 0.0;
                for j in 0..m {
                    occ += (data.vdiff[j * m + i] - data.vhat[j]) * (c_caps[j] - 1.0) / 2.0;
                }
                kin + st.alpha_mod * st.alpha_mod * data.vhat[i] / vol
                    + occ / vol
                    + (phase * sum_v_sbar).re / (2.0 * vol)
            }
        };
        let mut pair = Complex64::new(0.0, 0.0);
        for j in 0..m {
            pair += data.vdiff[j * m + i] * s_caps[j] / 2.0;
        }
        let gk = alpha2 * data.vhat[i] / vol - pair / vol;
        let s_cap = s_caps[i];
        let c_cap = c_caps[i];
        // D(k) = C_k f_k - Re(S_k conj(g_k)); O(k) = -S_k f_k + C_k g_k
        let dk = c_cap * fk - (s_cap * gk.conj()).re;
        let ok = -s_cap * fk + c_cap * gk;
        let p = data.modes[i].clone();
        f.insert(p.clone(), fk);
        g.insert(p.clone(), gk);
        d.insert(p.clone(), dk);
        o.insert(p, ok);
    }

    // linear coefficient (mode-zero rotation is trivial: c_0 = 1, s_0 = 0)
    let mut t1 = data.vhat0 * st.alpha_mod * st.alpha_mod / vol - mu;
    for i in 0..m {
        t1 += (data.vhat0 + data.vhat[i]) * (c_caps[i] - 1.0) / (2.0 * vol);
    }
    let mut w_bar = Complex64::new(0.0, 0.0); // sum v(k) S_k / (2 L^d)
    for i in 0..m {
        w_bar += data.vhat[i] * s_caps[i] / (2.0 * vol);
    }
    let c_lin = alpha * t1 - alpha.conj() * w_bar;

    // energy B of the rotated Hamiltonian
    let a2 = st.alpha_mod * st.alpha_mod;
    let mut b = -mu * a2 + data.vhat0 * a2 * a2 / (2.0 * vol);
    for i in 0..m {
        let kin = 0.5 * data.norms[i] * data.norms[i];
        let occ = (c_caps[i] - 1.0) / 2.0;
        b += (kin - mu + (data.vhat0 + data.vhat[i]) * a2 / vol) * occ;
        b -= data.vhat[i] * (alpha.conj() * alpha.conj() * s_caps[i]).re / (2.0 * vol);
    }
    let mut quad_pair = Complex64::new(0.0, 0.0);
    let mut quad_occ = 0.0;
    for i in 0..m {
        for j in 0..m {
            quad_pair += data.vdiff[i * m + j] * s_caps[i] * s_caps[j].conj() / 8.0;
            quad_occ += (data.vhat0 + data.vdiff[i * m + j])
                * (c_caps[i] - 1.0)
                * (c_caps[j] - 1.0)
                / 8.0;
        }
    }
    b += quad_pair.re / vol + quad_occ / vol;

    Ok(VariationalCoefficients {
        f,
        g,
        d,
        o,
        c_lin,
        b,
    })
}

/// One damped fixed-point step: S_k <- (1-gamma) S_k + gamma g_k / D(k)
/// with f, g from the mu-eliminated forms. Only the sgn f_k = +1 branch is
/// accepted; f_k <= |g_k| reports a dynamical instability at the offending
/// mode.
pub fn iterate(st: &VariationalState, gamma: f64) -> Result<VariationalState> {
    if !(0.0 < gamma && gamma <= 1.0) {
        return Err(Error::Config(format!("damping must be in (0, 1], got {gamma}")));
    }
    let coef = coefficients(st, 0.0, FForm::MuEliminated)?;
    let mut next = st.clone();
    for (p, s_cap) in next.s.iter_mut() {
        let fk = coef.f[p];
        let gk = coef.g[p];
        if fk <= gk.norm() {
            return Err(Error::DynamicalInstability {
                mode: p.n.clone(),
                f: fk,
                g_abs: gk.norm(),
            });
        }
        let dk = (fk * fk - gk.norm_sqr()).sqrt();
        let target = gk / dk;
        *s_cap = (1.0 - gamma) * *s_cap + gamma * target;
    }
    Ok(next)
}

/// The branch dispersion D(k) = sqrt(f_k^2 - |g_k|^2) evaluated from the
/// current state (the D an undamped step would assign). At a fixed point it
/// coincides with the Wick coefficient D(k).
pub fn solution_dispersion(st: &VariationalState) -> Result<BTreeMap<MomentumVector, f64>> {
    let coef = coefficients(st, 0.0, FForm::MuEliminated)?;
    let mut out = BTreeMap::new();
    for (p, &fk) in &coef.f {
        let gk = coef.g[p];
        if fk <= gk.norm() {
            return Err(Error::DynamicalInstability {
                mode: p.n.clone(),
                f: fk,
                g_abs: gk.norm(),
            });
        }
        out.insert(p.clone(), (fk * fk - gk.norm_sqr()).sqrt());
    }
    Ok(out)
}

/// Stationarity residuals at the given chemical potential: |C| and
/// max_k |O(k)|, both of which vanish at stationary points of B.
pub fn residuals(st: &VariationalState, mu: f64) -> Result<(f64, f64)> {
    let coef = coefficients(st, mu, FForm::ExplicitMu)?;
    let max_o = coef.o.values().map(|o| o.norm()).fold(0.0, f64::max);
    Ok((coef.c_lin.norm(), max_o))
}

/// Summary of a converged (or halted) fixed-point run.
#[derive(Debug, Clone)]
pub struct ImprovedSolution {
    pub state: VariationalState,
    pub mu: f64,
    pub b: f64,
    pub iterations: usize,
    pub residual_c: f64,
    pub residual_o: f64,
    pub converged: bool,
    pub coefficients: VariationalCoefficients,
}

/// Iterates from S = 0 until max(|dS|, |dC|) < `step_tol` and
/// max |O(k)| < `residual_tol`, or the iteration ceiling is hit.
pub fn solve(
    lattice: Lattice,
    potential: PotentialSpec,
    kappa_c: f64,
    gamma: f64,
    step_tol: f64,
    residual_tol: f64,
    ceiling: usize,
) -> Result<ImprovedSolution> {
    let mut st = VariationalState::condensate_only(lattice, potential, kappa_c, 0.0)?;
    let mut iterations = 0;
    let mut step = f64::INFINITY;
    while iterations < ceiling {
        let next = iterate(&st, gamma)?;
        step = st
            .s
            .iter()
            .map(|(p, &s_old)| {
                let s_new = next.s[p];
                let dc = (st.c_of(s_new) - st.c_of(s_old)).abs();
                (s_new - s_old).norm().max(dc)
            })
            .fold(0.0, f64::max);
        st = next;
        iterations += 1;
        if step < step_tol {
            let mu = chemical_potential(&st)?;
            let (_, res_o) = residuals(&st, mu)?;
            if res_o < residual_tol {
                break;
            }
        }
    }
    let mu = chemical_potential(&st)?;
    let coef = coefficients(&st, mu, FForm::ExplicitMu)?;
    let residual_c = coef.c_lin.norm();
    let residual_o = coef.o.values().map(|o| o.norm()).fold(0.0, f64::max);
    let converged = step < step_tol && residual_o < residual_tol;
    if !converged {
        return Err(Error::IterationCeiling {
            ceiling,
            residual: residual_o,
        });
    }
    Ok(ImprovedSolution {
        mu,
        b: coef.b,
        iterations,
        residual_c,
        residual_o,
        converged,
        coefficients: coef,
        state: st,
    })
}

/// The converged dispersion D(k) as a table for the spectrum module.
pub fn dispersion_table(sol: &ImprovedSolution) -> DispersionTable {
    DispersionTable {
        step: sol.state.lattice.spacing(),
        values: sol.coefficients.d.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{lattice_points, LatticeSpec};

    fn small_lattice() -> Lattice {
        // 2 pi / L = 0.5, cutoff 1.1: modes {-2,-1,1,2} * 0.5
        lattice_points(&LatticeSpec::new(1, 4.0 * std::f64::consts::PI, 1.1).unwrap()).unwrap()
    }

    fn paper_lattice() -> Lattice {
        crate::bogoliubov::paper_lattice(1, 3.0).unwrap()
    }

    /// phase-locked random state: S_k = sigma_k e^{2 i tau}, sigma real
    fn random_state(lat: Lattice, v: PotentialSpec, tau: f64, seed: u64) -> VariationalState {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut st = VariationalState::condensate_only(lat, v, 1.3, tau).unwrap();
        let phase = Complex64::from_polar(1.0, 2.0 * tau);
        for (p, s) in st.s.clone() {
            let _ = s;
            let sigma: f64 = rng.gen_range(-0.4..0.4);
            st.s.insert(p, phase * sigma);
        }
        // evenness S_{-k} = S_k
        for (p, s) in st.s.clone() {
            st.s.insert(p.negated(), s);
        }
        st
    }

    #[test]
    fn first_iteration_closed_form() {
        // S = 0, kappa_c = 1: f = k^2/2 + v(k), g = v(k) e^{2 i tau},
        // D = sqrt((k^2/2)^2 + k^2 v(k))
        let lat = paper_lattice();
        let v = PotentialSpec::v1();
        let st = VariationalState::condensate_only(lat, v.clone(), 1.0, 0.3).unwrap();
        let coef = coefficients(&st, 0.0, FForm::MuEliminated).unwrap();
        let disp = solution_dispersion(&st).unwrap();
        for (p, &fk) in &coef.f {
            let k = st.lattice.norm(p);
            let vh = v.hat_radial(k).unwrap();
            assert!((fk - (0.5 * k * k + vh)).abs() < 1e-12);
            let g = coef.g[p];
            assert!((g.norm() - vh).abs() < 1e-12);
            assert!((g.arg() - 0.6).abs() < 1e-12 || vh == 0.0);
            let d = disp[p];
            let want = ((0.5 * k * k) * (0.5 * k * k) + k * k * vh).sqrt();
            assert!((d - want).abs() < 1e-12, "D mismatch at {p}: {d} vs {want}");
        }
    }

    #[test]
    fn free_gas_is_trivial() {
        let lat = small_lattice();
        let st = VariationalState::condensate_only(lat, PotentialSpec::Zero, 1.0, 0.0).unwrap();
        let coef = coefficients(&st, 0.0, FForm::ExplicitMu).unwrap();
        for (p, &fk) in &coef.f {
            let k = st.lattice.norm(p);
            assert!((fk - 0.5 * k * k).abs() < 1e-15);
            assert_eq!(coef.g[p], Complex64::new(0.0, 0.0));
            assert!((coef.d[p] - fk).abs() < 1e-15);
        }
        let (rc, ro) = residuals(&st, 0.0).unwrap();
        assert_eq!((rc, ro), (0.0, 0.0));
    }

    #[test]
    fn dwa_forms_match_raw_cs_on_phase_locked_states() {
        // recompute O, D from raw (c_k, s_k) and compare
        let st = random_state(small_lattice(), PotentialSpec::v1(), 0.7, 21);
        let mu = chemical_potential(&st).unwrap();
        let coef = coefficients(&st, mu, FForm::ExplicitMu).unwrap();
        for (p, &s_cap) in &st.s {
            let (c, s) = st.raw_cs(s_cap);
            let fk = coef.f[p];
            let gk = coef.g[p];
            let o_raw = -2.0 * c * s * fk + s * s * gk.conj() + c * c * gk;
            let d_raw = fk * (c * c + s.norm_sqr()) - c * ((s * gk.conj()) + (s.conj() * gk)).re;
            assert!((o_raw - coef.o[p]).norm() < 1e-12);
            assert!((d_raw - coef.d[p]).abs() < 1e-12);
        }
    }

    #[test]
    fn chemical_potential_condensate_only() {
        let lat = small_lattice();
        let vol = lat.volume();
        let kappa = 2.5;
        let st =
            VariationalState::condensate_only(lat, PotentialSpec::v1(), kappa, 0.0).unwrap();
        assert!((st.alpha_mod - (vol * kappa).sqrt()).abs() < 1e-12);
        let mu = chemical_potential(&st).unwrap();
        assert!((mu - kappa * 0.1).abs() < 1e-12);
        let zero = VariationalState::condensate_only(
            small_lattice(),
            PotentialSpec::Zero,
            1.0,
            0.0,
        )
        .unwrap();
        assert_eq!(chemical_potential(&zero).unwrap(), 0.0);
    }

    #[test]
    fn chemical_potential_single_pair_closed_form() {
        // one mode pair +-k0 with prescribed S: hand-evaluated three-term sum
        let spec = LatticeSpec::new(1, 4.0 * std::f64::consts::PI, 0.6).unwrap();
        let lat = lattice_points(&spec).unwrap();
        let v = PotentialSpec::v1();
        let mut st = VariationalState::condensate_only(lat, v.clone(), 1.0, 0.0).unwrap();
        let sigma = 0.3;
        for (_, s) in st.s.iter_mut() {
            *s = Complex64::new(sigma, 0.0);
        }
        let vol = st.lattice.volume();
        let k0 = 0.5;
        let vh0 = 0.1;
        let vhk = v.hat_radial(k0).unwrap();
        let c_cap = (1.0f64 + sigma * sigma).sqrt();
        let occ = (vh0 + vhk) * (c_cap - 1.0) / 2.0;
        let pair = vhk * sigma / 2.0;
        let want =
            vh0 * st.alpha_mod * st.alpha_mod / vol + 2.0 * occ / vol - 2.0 * pair / vol;
        let got = chemical_potential(&st).unwrap();
        assert!((got - want).abs() < 1e-14, "{got} vs {want}");
    }

    #[test]
    fn condensate_free_state_rejected() {
        let st = VariationalState::condensate_only(
            small_lattice(),
            PotentialSpec::v1(),
            0.0,
            0.0,
        )
        .unwrap();
        assert!(matches!(
            chemical_potential(&st),
            Err(Error::CondensateFreeState)
        ));
    }

    #[test]
    fn residuals_at_condensate_only_state() {
        // C vanishes at mu = kappa v(0) but O(k) = kappa v(k) e^{2 i tau}
        let lat = paper_lattice();
        let v = PotentialSpec::v1();
        let kappa = 1.0;
        let st = VariationalState::condensate_only(lat, v.clone(), kappa, 0.4).unwrap();
        let (rc, ro) = residuals(&st, kappa * 0.1).unwrap();
        assert!(rc < 1e-12);
        let vmax = st
            .s
            .keys()
            .map(|p| v.hat_radial(st.lattice.norm(p)).unwrap())
            .fold(0.0, f64::max);
        assert!((ro - kappa * vmax).abs() < 1e-12);
        assert!(ro > 0.0);
    }

    #[test]
    fn iteration_converges_and_certifies() {
        let lat = small_lattice();
        let v = PotentialSpec::v1();
        let mut st = VariationalState::condensate_only(lat, v, 1.0, 0.0).unwrap();
        for _ in 0..200 {
            st = iterate(&st, 1.0).unwrap();
        }
        let mu = chemical_potential(&st).unwrap();
        let (_, ro) = residuals(&st, mu).unwrap();
        assert!(ro < 1e-8, "residual {ro}");
        // fixed point: one more undamped step changes nothing
        let next = iterate(&st, 1.0).unwrap();
        for (p, &s) in &st.s {
            assert!((next.s[p] - s).norm() < 1e-12);
        }
        // g_k conj(s_k) real at the fixed point
        let coef = coefficients(&st, mu, FForm::ExplicitMu).unwrap();
        for (p, &s) in &st.s {
            assert!((coef.g[p] * s.conj()).im.abs() < 1e-12);
        }
    }

    #[test]
    fn solve_driver_reports_summary() {
        let sol = solve(
            paper_lattice(),
            PotentialSpec::v1(),
            1.0,
            0.5,
            1e-10,
            1e-8,
            10_000,
        )
        .unwrap();
        assert!(sol.converged);
        assert!(sol.residual_o < 1e-8);
        assert!(sol.residual_c < 1e-8);
        // hyperbolic constraint
        for (_, &s) in &sol.state.s {
            let c = sol.state.c_of(s);
            assert!((c * c - s.norm_sqr() - 1.0).abs() < 1e-12);
        }
        // phonon slope D(k)/|k| near sqrt(kappa v(0)) at the two smallest
        // modes of the one-iteration point (the converged point is gapped)
        let start = VariationalState::condensate_only(
            paper_lattice(),
            PotentialSpec::v1(),
            1.0,
            0.0,
        )
        .unwrap();
        let first = solution_dispersion(&start).unwrap();
        let slope = (1.0f64 * 0.1).sqrt();
        for n in [-1i64, 1] {
            let p = MomentumVector::new(vec![n]);
            let d = first[&p];
            let k = start.lattice.norm(&p);
            assert!(
                (d / k - slope).abs() / slope < 0.05,
                "slope at n={n}: {} vs {slope}",
                d / k
            );
        }
    }

    #[test]
    fn gauge_covariance() {
        // tau -> tau + delta rotates g and S by e^{2 i delta}, leaves f, D, B
        let delta = 0.9;
        let st0 = random_state(small_lattice(), PotentialSpec::v1(), 0.0, 77);
        let mut st1 = st0.clone();
        st1.tau = delta;
        let rot = Complex64::from_polar(1.0, 2.0 * delta);
        for (_, s) in st1.s.iter_mut() {
            *s *= rot;
        }
        let mu0 = chemical_potential(&st0).unwrap();
        let mu1 = chemical_potential(&st1).unwrap();
        assert!((mu0 - mu1).abs() < 1e-12);
        let c0 = coefficients(&st0, mu0, FForm::ExplicitMu).unwrap();
        let c1 = coefficients(&st1, mu0, FForm::ExplicitMu).unwrap();
        for (p, &f0) in &c0.f {
            assert!((f0 - c1.f[p]).abs() < 1e-12);
            assert!((c0.d[p] - c1.d[p]).abs() < 1e-12);
            assert!((c0.g[p] * rot - c1.g[p]).norm() < 1e-12);
        }
        assert!((c0.b - c1.b).abs() < 1e-12);
    }

    #[test]
    fn instability_reported() {
        // an artificially huge pairing with tiny kinetic term trips f <= |g|
        let spec = LatticeSpec::new(1, 4.0 * std::f64::consts::PI, 0.6).unwrap();
        let lat = lattice_points(&spec).unwrap();
        let v = PotentialSpec::Tabulated {
            samples: vec![(0.0, 5.0), (0.4, 5.0), (0.7, 5.0), (1.2, 5.0)],
        };
        let mut st = VariationalState::condensate_only(lat, v, 1.0, 0.0).unwrap();
        for (_, s) in st.s.iter_mut() {
            *s = Complex64::new(-0.999, 0.0) * 50.0;
        }
        let r = iterate(&st, 1.0);
        assert!(matches!(r, Err(Error::DynamicalInstability { .. })));
    }
}
