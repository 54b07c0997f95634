//! Exact low-lying energy-momentum spectrum of the truncated mean-field
//! Bose Hamiltonian
//!
//!   H = sum_k |k|^2 a_k^dag a_k
//!     + (1/2N) sum delta(k1+k2-k3-k4) v_hat(k2-k3) a_k1^dag a_k2^dag a_k3 a_k4
//!
//! on momentum-conserving occupation sectors, compared against the
//! Bogoliubov prediction on the same truncated mode set.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use serde::Serialize;

use crate::bogoliubov;
use crate::error::{Error, Result};
use crate::model::{v_real_zero, Lattice, MomentumVector, PotentialSpec};
use crate::spectrum::{self, DispersionTable};

/// Occupation basis of the (N, P) sector over the modes of a lattice.
#[derive(Debug, Clone)]
pub struct SectorBasis {
    pub n_particles: usize,
    pub total_momentum: MomentumVector,
    pub modes: Vec<MomentumVector>,
    pub step: f64,
    pub states: Vec<Vec<u8>>,
    index: HashMap<Vec<u8>, usize>,
}

impl SectorBasis {
    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn lookup(&self, occ: &[u8]) -> Option<usize> {
        self.index.get(occ).copied()
    }
}

/// Enumerates every occupation vector with sum N and exact integer total
/// momentum P, in lexicographic order. Errors if the dimension exceeds
/// `bound`.
pub fn build_basis(
    n_particles: usize,
    lat: &Lattice,
    total_momentum: &MomentumVector,
    bound: usize,
) -> Result<SectorBasis> {
    if n_particles > u8::MAX as usize {
        return Err(Error::Config(format!(
            "particle number {n_particles} exceeds the occupation encoding"
        )));
    }
    let modes: Vec<MomentumVector> = lat.points().to_vec();
    let d = lat.spec.d;
    let m = modes.len();
    // per-suffix componentwise min/max of a single-mode momentum
    let mut suffix_min = vec![vec![i64::MAX; d]; m + 1];
    let mut suffix_max = vec![vec![i64::MIN; d]; m + 1];
    for i in (0..m).rev() {
        for c in 0..d {
            suffix_min[i][c] = suffix_min[i + 1][c].min(modes[i].n[c]);
            suffix_max[i][c] = suffix_max[i + 1][c].max(modes[i].n[c]);
        }
    }
    let mut states: Vec<Vec<u8>> = Vec::new();
    let mut occ = vec![0u8; m];
    let mut rem_p = total_momentum.n.clone();

    fn dfs(
        modes: &[MomentumVector],
        suffix_min: &[Vec<i64>],
        suffix_max: &[Vec<i64>],
        idx: usize,
        remaining: usize,
        rem_p: &mut Vec<i64>,
        occ: &mut Vec<u8>,
        states: &mut Vec<Vec<u8>>,
        bound: usize,
    ) -> Result<()> {
        let d = rem_p.len();
        if remaining == 0 {
            if rem_p.iter().all(|&c| c == 0) {
                if states.len() >= bound {
                    return Err(Error::SectorTooLarge {
                        dim: states.len() + 1,
                        bound,
                    });
                }
                states.push(occ.clone());
            }
            return Ok(());
        }
        if idx == modes.len() {
            return Ok(());
        }
        let r = remaining as i64;
        for c in 0..d {
            let lo = r * suffix_min[idx][c];
            let hi = r * suffix_max[idx][c];
            if rem_p[c] < lo || rem_p[c] > hi {
                return Ok(());
            }
        }
        for count in 0..=remaining as u8 {
            occ[idx] = count;
            for c in 0..d {
                rem_p[c] -= count as i64 * modes[idx].n[c];
            }
            dfs(
                modes, suffix_min, suffix_max, idx + 1,
                remaining - count as usize, rem_p, occ, states, bound,
            )?;
            for c in 0..d {
                rem_p[c] += count as i64 * modes[idx].n[c];
            }
        }
        occ[idx] = 0;
        Ok(())
    }

    if n_particles == 0 {
        if total_momentum.is_zero() {
            states.push(vec![0u8; m]);
        }
    } else {
        dfs(
            &modes,
            &suffix_min,
            &suffix_max,
            0,
            n_particles,
            &mut rem_p,
            &mut occ,
            &mut states,
            bound,
        )?;
    }
    states.sort();
    let index = states
        .iter()
        .enumerate()
        .map(|(i, s)| (s.clone(), i))
        .collect();
    Ok(SectorBasis {
        n_particles,
        total_momentum: total_momentum.clone(),
        modes,
        step: lat.spacing(),
        states,
        index,
    })
}

/// Sparse symmetric matrix in row-major adjacency form.
#[derive(Debug, Clone)]
pub struct SparseHamiltonian {
    pub dim: usize,
    pub rows: Vec<Vec<(usize, f64)>>,
}

impl SparseHamiltonian {
    pub fn matvec(&self, v: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|x| *x = 0.0);
        for (r, row) in self.rows.iter().enumerate() {
            let mut acc = 0.0;
            for &(c, val) in row {
                acc += val * v[c];
            }
            out[r] = acc;
        }
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let mut m = nalgebra::DMatrix::zeros(self.dim, self.dim);
        for (r, row) in self.rows.iter().enumerate() {
            for &(c, val) in row {
                m[(r, c)] = val;
            }
        }
        m
    }

    pub fn is_diagonal(&self) -> bool {
        self.rows
            .iter()
            .enumerate()
            .all(|(r, row)| row.iter().all(|&(c, _)| c == r))
    }
}

/// Matrix elements of the truncated mean-field Hamiltonian on a sector
/// basis. Interaction terms scattering outside the mode set are dropped;
/// hermiticity is exact by construction (only the lower triangle is
/// generated, then mirrored).
pub fn build_hamiltonian(basis: &SectorBasis, v: &PotentialSpec) -> Result<SparseHamiltonian> {
    let m = basis.modes.len();
    let n = basis.n_particles.max(1) as f64;
    let step = basis.step;
    // pairwise v_hat(k2 - k3) table
    let mut vdiff = vec![0.0; m * m];
    for a in 0..m {
        for b in 0..m {
            let dm = basis.modes[a].sub(&basis.modes[b]);
            let r = step * (dm.norm2_int() as f64).sqrt();
            vdiff[a * m + b] = v.hat_radial(r)?;
        }
    }
    // canonical kinetic fold shared with the spectrum module: per-particle
    // energies sorted by (energy, mode), summed left to right
    let mode_e: Vec<f64> = basis
        .modes
        .iter()
        .map(|p| {
            let k = step * (p.norm2_int() as f64).sqrt();
            k * k
        })
        .collect();
    let mut kinetic_order: Vec<usize> = (0..m).collect();
    kinetic_order.sort_by(|&a, &b| {
        mode_e[a]
            .partial_cmp(&mode_e[b])
            .unwrap()
            .then_with(|| basis.modes[a].n.cmp(&basis.modes[b].n))
    });
    // mode sum lookup: (k3, k4) -> list of (k1, k2) with k1 + k2 = k3 + k4
    let mode_index: HashMap<&MomentumVector, usize> = basis
        .modes
        .iter()
        .enumerate()
        .map(|(i, p)| (p, i))
        .collect();
    let mut pair_partners: HashMap<Vec<i64>, Vec<(usize, usize)>> = HashMap::new();
    for k1 in 0..m {
        for k2 in 0..m {
            let s = basis.modes[k1].add(&basis.modes[k2]);
            pair_partners.entry(s.n).or_default().push((k1, k2));
        }
    }

    let assemble_row = |col: usize| -> Vec<(usize, usize, f64)> {
        let ket = &basis.states[col];
        let mut entries: BTreeMap<usize, f64> = BTreeMap::new();
        // kinetic diagonal in the canonical fold order
        let mut kin = 0.0;
        for &i in &kinetic_order {
            for _ in 0..ket[i] {
                kin += mode_e[i];
            }
        }
        *entries.entry(col).or_insert(0.0) += kin;
        // interaction: ordered pairs (k3, k4) annihilated, (k1, k2) created
        for k4 in 0..m {
            if ket[k4] == 0 {
                continue;
            }
            for k3 in 0..m {
                let need = if k3 == k4 { 2 } else { 1 };
                if (ket[k3] as usize) < need {
                    continue;
                }
                let amp34 = if k3 == k4 {
                    (ket[k4] as f64 * (ket[k4] as f64 - 1.0)).sqrt()
                } else {
                    (ket[k4] as f64 * ket[k3] as f64).sqrt()
                };
                let total = basis.modes[k3].add(&basis.modes[k4]);
                let Some(partners) = pair_partners.get(&total.n) else {
                    continue;
                };
                for &(k1, k2) in partners {
                    // occupation after a_{k3} a_{k4}
                    let mut occ = ket.clone();
                    occ[k4] -= 1;
                    occ[k3] -= 1;
                    let amp12 = if k1 == k2 {
                        ((occ[k1] as f64 + 1.0) * (occ[k1] as f64 + 2.0)).sqrt()
                    } else {
                        ((occ[k1] as f64 + 1.0) * (occ[k2] as f64 + 1.0)).sqrt()
                    };
                    occ[k2] += 1;
                    occ[k1] += 1;
                    let row = basis
                        .lookup(&occ)
                        .expect("momentum conservation keeps scattering inside the sector");
                    if row < col {
                        continue; // mirrored from the transpose partner
                    }
                    let val = vdiff[k2 * m + k3] * amp34 * amp12 / (2.0 * n);
                    *entries.entry(row).or_insert(0.0) += val;
                }
            }
        }
        entries.into_iter().map(|(r, val)| (r, col, val)).collect()
    };

    let chunks: Vec<Vec<(usize, usize, f64)>> =
        (0..basis.dim()).into_par_iter().map(assemble_row).collect();
    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); basis.dim()];
    for chunk in chunks {
        for (r, c, val) in chunk {
            if val != 0.0 {
                rows[r].push((c, val));
                if r != c {
                    rows[c].push((r, val));
                }
            }
        }
    }
    for row in rows.iter_mut() {
        row.sort_by_key(|&(c, _)| c);
    }
    Ok(SparseHamiltonian {
        dim: basis.dim(),
        rows,
    })
}

/// The `m` lowest eigenvalues: sorted diagonal for diagonal matrices, dense
/// solver up to dimension 2000, Lanczos with full reorthogonalization above
/// (residuals certified below 1e-9).
pub fn low_spectrum(h: &SparseHamiltonian, m: usize) -> Result<Vec<f64>> {
    let m = m.min(h.dim);
    if h.dim == 0 {
        return Ok(vec![]);
    }
    if h.is_diagonal() {
        let mut diag: Vec<f64> = (0..h.dim)
            .map(|r| {
                h.rows[r]
                    .iter()
                    .find(|&&(c, _)| c == r)
                    .map(|&(_, v)| v)
                    .unwrap_or(0.0)
            })
            .collect();
        diag.sort_by(|a, b| a.partial_cmp(b).unwrap());
        diag.truncate(m);
        return Ok(diag);
    }
    if h.dim <= 2000 {
        let dense = h.to_dense();
        let mut eig: Vec<f64> = dense
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .copied()
            .collect();
        eig.sort_by(|a, b| a.partial_cmp(b).unwrap());
        eig.truncate(m);
        Ok(eig)
    } else {
        lanczos_lowest(h, m, 1e-9)
    }
}

/// Lanczos with full two-pass reorthogonalization and a deterministic start
/// vector; Ritz values accepted when the residual |beta_k y_last| drops
/// below `tol` (absolute, scaled by the spectral width estimate).
fn lanczos_lowest(h: &SparseHamiltonian, want: usize, tol: f64) -> Result<Vec<f64>> {
    let dim = h.dim;
    let max_krylov = dim.min(60.max(6 * want + 40));
    // deterministic pseudo-random start vector
    let mut v0: Vec<f64> = (0..dim)
        .map(|i| {
            let x = (i as f64 + 1.0) * 0.754877666246693;
            (x - x.floor()) - 0.5 + 1e-3
        })
        .collect();
    normalize(&mut v0);
    let mut basis = vec![v0];
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut w = vec![0.0; dim];
    let mut iterations_left = 4;
    loop {
        let j = alphas.len();
        h.matvec(&basis[j], &mut w);
        let a = dot(&w, &basis[j]);
        alphas.push(a);
        for (wi, vi) in w.iter_mut().zip(&basis[j]) {
            *wi -= a * vi;
        }
        if j > 0 {
            let b = betas[j - 1];
            for (wi, vi) in w.iter_mut().zip(&basis[j - 1]) {
                *wi -= b * vi;
            }
        }
        // full reorthogonalization, two passes
        for _ in 0..2 {
            for vi in &basis {
                let c = dot(&w, vi);
                for (wj, vj) in w.iter_mut().zip(vi) {
                    *wj -= c * vj;
                }
            }
        }
        let b = dot(&w, &w).sqrt();
        let done_krylov = j + 1 >= max_krylov || b < 1e-13;
        if !done_krylov {
            betas.push(b);
            basis.push(w.iter().map(|x| x / b).collect());
        }
        // convergence check on the tridiagonal Ritz values
        if done_krylov || (j >= 2 * want + 10 && j % 10 == 0) {
            let k = alphas.len();
            let mut t = nalgebra::DMatrix::<f64>::zeros(k, k);
            for i in 0..k {
                t[(i, i)] = alphas[i];
                if i + 1 < k {
                    t[(i, i + 1)] = betas[i];
                    t[(i + 1, i)] = betas[i];
                }
            }
            let se = t.symmetric_eigen();
            let mut order: Vec<usize> = (0..k).collect();
            order.sort_by(|&x, &y| se.eigenvalues[x].partial_cmp(&se.eigenvalues[y]).unwrap());
            let beta_last = if done_krylov { 0.0 } else { betas[k - 1] };
            let mut ok = k >= want;
            let mut max_res = 0.0f64;
            for &idx in order.iter().take(want) {
                let res = (beta_last * se.eigenvectors[(k - 1, idx)]).abs();
                max_res = max_res.max(res);
                if res > tol {
                    ok = false;
                }
            }
            if ok || b < 1e-13 {
                if !ok && b < 1e-13 {
                    // invariant subspace smaller than requested accuracy scope
                    if k < want {
                        return Err(Error::EigensolverNonConvergence {
                            residual: max_res,
                            tol,
                        });
                    }
                }
                return Ok(order
                    .into_iter()
                    .take(want)
                    .map(|i| se.eigenvalues[i])
                    .collect());
            }
            if done_krylov {
                iterations_left -= 1;
                if iterations_left == 0 {
                    return Err(Error::EigensolverNonConvergence {
                        residual: max_res,
                        tol,
                    });
                }
            }
        }
        if done_krylov && b >= 1e-13 {
            betas.push(b);
            basis.push(w.iter().map(|x| x / b).collect());
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(v: &mut [f64]) {
    let n = dot(v, v).sqrt();
    v.iter_mut().for_each(|x| *x /= n);
}

/// One row of the spectrum comparison.
#[derive(Debug, Clone, Serialize)]
pub struct EdRow {
    pub momentum: Vec<i64>,
    pub level: usize,
    pub k_n: f64,
    pub k_bog: f64,
    pub diff: f64,
}

/// Full comparison report between exact diagonalization and the Bogoliubov
/// prediction on the same truncated mode set.
#[derive(Debug, Clone, Serialize)]
pub struct EdReport {
    pub n_particles: usize,
    pub e_n: f64,
    pub e_bog_truncated: f64,
    pub prediction: f64,
    pub vhat0: f64,
    pub lemma_lower_bound: f64,
    pub lemma_upper_ok: bool,
    pub lemma_lower_ok: bool,
    pub rows: Vec<EdRow>,
}

#[derive(Debug, Clone)]
pub struct CompareOptions {
    pub max_level: usize,
    pub sector_bound: usize,
    pub eig_tolerance: f64,
}

impl Default for CompareOptions {
    fn default() -> Self {
        Self {
            max_level: 3,
            sector_bound: 200_000,
            eig_tolerance: 1e-9,
        }
    }
}

/// Runs the comparison of the spec: E_N and K_N^j(p) from exact
/// diagonalization against 1/2 v_hat(0) (N-1) + E_Bog and K_Bog^j(p), plus
/// the ground-state sandwich
/// 0 >= E_N - (N-1) v_hat(0)/2 >= (v_hat(0) - L^d v(0)) / 2.
pub fn compare_with_bogoliubov(
    n_particles: usize,
    lat: &Lattice,
    v: &PotentialSpec,
    opts: &CompareOptions,
) -> Result<EdReport> {
    let zero = MomentumVector::zero(lat.spec.d);
    let base = build_basis(n_particles, lat, &zero, opts.sector_bound)?;
    let hm = build_hamiltonian(&base, v)?;
    let ground = low_spectrum(&hm, opts.max_level + 1)?;
    let e_n = ground[0];

    let ebog = bogoliubov::bogoliubov_energy(lat, v)?;
    let vhat0 = v.hat_radial(0.0)?;
    let prediction = 0.5 * vhat0 * (n_particles as f64 - 1.0) + ebog;

    // Bogoliubov levels on the same truncated modes
    let disp = DispersionTable::from_fn(lat, |l, p| bogoliubov::elementary_dispersion(v, l, p))?;
    let e_min = disp.values.values().fold(f64::INFINITY, |a, &b| a.min(b));
    let e_max = disp.values.values().fold(0.0f64, |a, &b| a.max(b));
    // cap covering max_level quasiparticle levels everywhere
    let kappa = e_max * (opts.max_level as f64 + 2.0);
    let max_n = ((kappa / e_min).ceil() as usize + 1).min(n_particles.max(2));
    let table = spectrum::enumerate_excitations(&disp, kappa, max_n)?;

    let mut rows = Vec::new();
    for p in lat.points() {
        let spec_levels: Vec<f64> = if p.is_zero() {
            ground.iter().skip(1).map(|e| e - e_n).collect()
        } else {
            let sector = build_basis(n_particles, lat, p, opts.sector_bound)?;
            if sector.dim() == 0 {
                continue;
            }
            let hp = build_hamiltonian(&sector, v)?;
            low_spectrum(&hp, opts.max_level)?
                .into_iter()
                .map(|e| e - e_n)
                .collect()
        };
        for (j, &k_n) in spec_levels.iter().enumerate().take(opts.max_level) {
            let k_bog = table.level(p, j + 1).unwrap_or(f64::INFINITY);
            rows.push(EdRow {
                momentum: p.n.clone(),
                level: j + 1,
                k_n,
                k_bog,
                diff: k_n - k_bog,
            });
        }
    }

    let lemma_lower = 0.5 * (vhat0 - lat.volume() * v_real_zero(v, lat.spec.d)?);
    let excess = e_n - 0.5 * vhat0 * (n_particles as f64 - 1.0);
    Ok(EdReport {
        n_particles,
        e_n,
        e_bog_truncated: ebog,
        prediction,
        vhat0,
        lemma_lower_bound: lemma_lower,
        lemma_upper_ok: excess <= opts.eig_tolerance,
        lemma_lower_ok: excess >= lemma_lower - opts.eig_tolerance,
        rows,
    })
}
