//! Spin-1/2 Hartree-Fock-Bogoliubov (BCS) treatment of the homogeneous
//! Fermi gas: kernels alpha and beta, gap functions delta(k) and xi(k),
//! the self-consistent superconducting iteration, the normal (Hartree-Fock)
//! solution and the dispersion D(k) = sqrt(xi^2 + delta^2).
//!
//! Kinetic convention: tau(k) = |k|^2 - mu.

use crate::error::{Error, Result};
use crate::model::{Lattice, MomentumVector, PotentialSpec};
use crate::spectrum::DispersionTable;

/// Symmetric interaction kernels over the mode list, row-major m x m.
#[derive(Debug, Clone)]
pub struct Kernels {
    pub m: usize,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
}

impl Kernels {
    pub fn alpha_at(&self, i: usize, j: usize) -> f64 {
        self.alpha[i * self.m + j]
    }

    pub fn beta_at(&self, i: usize, j: usize) -> f64 {
        self.beta[i * self.m + j]
    }
}

/// The mode list, kinetic samples and kernels of one HFB problem.
#[derive(Debug, Clone)]
pub struct HfbModel {
    pub modes: Vec<MomentumVector>,
    pub step: f64,
    pub volume: f64,
    pub tau: Vec<f64>,
    pub kernels: Kernels,
}

/// BCS trial state: the angle 2 theta_k per mode.
#[derive(Debug, Clone)]
pub struct GapState {
    pub theta2: Vec<f64>,
}

/// Gap functions and the energy of a BCS state.
#[derive(Debug, Clone)]
pub struct GapFunctions {
    pub delta: Vec<f64>,
    pub xi: Vec<f64>,
    pub d: Vec<f64>,
    pub b: f64,
}

/// Local-potential kernels: alpha(k,k') = (V(k-k') + V(k+k'))/2,
/// beta(k,k') = 2 V(0) - V(k-k'). Sum and difference momenta must be inside
/// the potential's domain (tabulated kinds refuse extrapolation).
pub fn kernels_from_local_potential(
    v: &PotentialSpec,
    lat: &Lattice,
    modes: &[MomentumVector],
) -> Result<Kernels> {
    let m = modes.len();
    let mut alpha = vec![0.0; m * m];
    let mut beta = vec![0.0; m * m];
    let v0 = v.hat_radial(0.0)?;
    for i in 0..m {
        for j in 0..m {
            let diff = v.hat_radial(lat.norm(&modes[i].sub(&modes[j])))?;
            let sum = v.hat_radial(lat.norm(&modes[i].add(&modes[j])))?;
            alpha[i * m + j] = 0.5 * (diff + sum);
            beta[i * m + j] = 2.0 * v0 - diff;
        }
    }
    Ok(Kernels { m, alpha, beta })
}

impl HfbModel {
    /// All modes of `lat` (including the zero mode) with tau(k) = |k|^2 - mu.
    pub fn from_lattice(lat: &Lattice, mu: f64, kernels: Kernels) -> Result<Self> {
        let modes: Vec<MomentumVector> = lat.points().to_vec();
        if kernels.m != modes.len() {
            return Err(Error::Config(format!(
                "kernel size {} does not match mode count {}",
                kernels.m,
                modes.len()
            )));
        }
        let tau = modes
            .iter()
            .map(|p| {
                let k = lat.norm(p);
                k * k - mu
            })
            .collect();
        Ok(Self {
            modes,
            step: lat.spacing(),
            volume: lat.volume(),
            tau,
            kernels,
        })
    }

    /// Explicit mode list with raw kinetic samples (used by toy problems).
    pub fn from_parts(
        modes: Vec<MomentumVector>,
        step: f64,
        volume: f64,
        tau: Vec<f64>,
        kernels: Kernels,
    ) -> Result<Self> {
        if kernels.m != modes.len() || tau.len() != modes.len() {
            return Err(Error::Config("mode, tau and kernel sizes must agree".into()));
        }
        Ok(Self {
            modes,
            step,
            volume,
            tau,
            kernels,
        })
    }

    pub fn vacuum_state(&self) -> GapState {
        GapState {
            theta2: vec![0.0; self.modes.len()],
        }
    }
}

/// delta, xi, D and B of a BCS state:
///
///   delta(k) = (1/2L^d) sum alpha(k,k') sin 2theta_k'
///   xi(k)    = tau(k) + (1/2L^d) sum beta(k,k') (1 - cos 2theta_k')
///   B        = sum tau (1-cos) + (1/4L^d) [sum sin alpha sin + sum (1-cos) beta (1-cos)]
pub fn gap_functions(st: &GapState, model: &HfbModel) -> GapFunctions {
    let m = model.modes.len();
    let vol = model.volume;
    let sin2: Vec<f64> = st.theta2.iter().map(|t| t.sin()).collect();
    let omc: Vec<f64> = st.theta2.iter().map(|t| 1.0 - t.cos()).collect();
    let mut delta = vec![0.0; m];
    let mut xi = vec![0.0; m];
    let mut d = vec![0.0; m];
    for i in 0..m {
        let mut ds = 0.0;
        let mut xs = 0.0;
        for j in 0..m {
            ds += model.kernels.alpha_at(i, j) * sin2[j];
            xs += model.kernels.beta_at(i, j) * omc[j];
        }
        delta[i] = ds / (2.0 * vol);
        xi[i] = model.tau[i] + xs / (2.0 * vol);
        d[i] = (xi[i] * xi[i] + delta[i] * delta[i]).sqrt();
    }
    let mut b = 0.0;
    for i in 0..m {
        b += model.tau[i] * omc[i];
    }
    let mut quad = 0.0;
    for i in 0..m {
        for j in 0..m {
            quad += sin2[i] * model.kernels.alpha_at(i, j) * sin2[j]
                + omc[i] * model.kernels.beta_at(i, j) * omc[j];
        }
    }
    b += quad / (4.0 * vol);
    GapFunctions { delta, xi, d, b }
}

/// Stationarity residual max_k |delta cos 2theta + xi sin 2theta|.
pub fn stationarity_residual(st: &GapState, gf: &GapFunctions) -> f64 {
    st.theta2
        .iter()
        .enumerate()
        .map(|(i, t)| (gf.delta[i] * t.cos() + gf.xi[i] * t.sin()).abs())
        .fold(0.0, f64::max)
}

fn wrap_angle(x: f64) -> f64 {
    use std::f64::consts::PI;
    let mut y = x % (2.0 * PI);
    if y > PI {
        y -= 2.0 * PI;
    } else if y <= -PI {
        y += 2.0 * PI;
    }
    y
}

/// One damped step of the superconducting self-consistency
/// sin 2theta = -delta/D, cos 2theta = xi/D, blended in angle space.
pub fn superconducting_iteration(
    st: &GapState,
    model: &HfbModel,
    damping: f64,
) -> Result<GapState> {
    if !(0.0 < damping && damping <= 1.0) {
        return Err(Error::Config(format!(
            "damping must be in (0, 1], got {damping}"
        )));
    }
    let gf = gap_functions(st, model);
    let mut next = st.clone();
    for i in 0..model.modes.len() {
        if gf.delta[i] == 0.0 && gf.xi[i] == 0.0 {
            return Err(Error::DegenerateMode {
                mode: model.modes[i].n.clone(),
            });
        }
        let target = (-gf.delta[i]).atan2(gf.xi[i]);
        next.theta2[i] = wrap_angle(st.theta2[i] + damping * wrap_angle(target - st.theta2[i]));
    }
    Ok(next)
}

/// Converged summary of one branch.
#[derive(Debug, Clone)]
pub struct HfbSolution {
    pub state: GapState,
    pub gap_functions: GapFunctions,
    pub iterations: usize,
    pub residual: f64,
}

/// Runs the superconducting iteration from the default seed
/// sin 2theta_k ~ -eps0 exp(-|k|^2/2) until the angles settle and the
/// stationarity residual drops below `residual_tol`.
pub fn solve_superconducting(
    model: &HfbModel,
    damping: f64,
    eps0: f64,
    residual_tol: f64,
    ceiling: usize,
) -> Result<HfbSolution> {
    let mut st = GapState {
        theta2: model
            .modes
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let k = model.step * (p.norm2_int() as f64).sqrt();
                let _ = i;
                -eps0 * (-0.5 * k * k).exp()
            })
            .collect(),
    };
    let mut iterations = 0;
    loop {
        let next = superconducting_iteration(&st, model, damping)?;
        let step: f64 = st
            .theta2
            .iter()
            .zip(&next.theta2)
            .map(|(a, b)| wrap_angle(b - a).abs())
            .fold(0.0, f64::max);
        st = next;
        iterations += 1;
        let gf = gap_functions(&st, model);
        let residual = stationarity_residual(&st, &gf);
        if step < 1e-14 || residual < residual_tol {
            // a final undamped polish tightens the residual
            if residual < residual_tol {
                return Ok(HfbSolution {
                    gap_functions: gf,
                    state: st,
                    iterations,
                    residual,
                });
            }
        }
        if iterations >= ceiling {
            return Err(Error::IterationCeiling {
                ceiling,
                residual,
            });
        }
    }
}

/// The normal (Hartree-Fock) solution: sin 2theta = 0 and cos 2theta_k =
/// sgn xi(k), iterated to sign self-consistency. Modes with xi < 0 are the
/// occupied ones.
pub fn normal_solution(model: &HfbModel) -> Result<HfbSolution> {
    use std::f64::consts::PI;
    let m = model.modes.len();
    let mut signs = vec![1.0f64; m];
    let ceiling = 200;
    for iterations in 1..=ceiling {
        // cos 2theta = sign, so theta2 is 0 (empty) or pi (occupied)
        let st = GapState {
            theta2: signs
                .iter()
                .map(|&s| if s > 0.0 { 0.0 } else { PI })
                .collect(),
        };
        let gf = gap_functions(&st, model);
        let new_signs: Vec<f64> = gf
            .xi
            .iter()
            .map(|&x| if x >= 0.0 { 1.0 } else { -1.0 })
            .collect();
        if new_signs == signs {
            let residual = stationarity_residual(&st, &gf);
            return Ok(HfbSolution {
                gap_functions: gf,
                state: st,
                iterations,
                residual,
            });
        }
        signs = new_signs;
    }
    Err(Error::NormalSolutionUnstable { iterations: ceiling })
}

/// The quasiparticle dispersion table k -> sqrt(xi^2 + delta^2) of a
/// converged state, for the spectrum module.
pub fn hfb_dispersion(st: &GapState, model: &HfbModel) -> DispersionTable {
    let gf = gap_functions(st, model);
    let values = model
        .modes
        .iter()
        .enumerate()
        .map(|(i, p)| (p.clone(), gf.d[i]))
        .collect();
    DispersionTable {
        step: model.step,
        values,
    }
}

/// The identity obtained by summing sin 2theta_k times the delta definition:
/// sum sin^2 2theta sqrt(delta^2 + xi^2) + (1/2L^d) sum sin alpha sin = 0
/// at superconducting fixed points. Returns (lhs, rhs) for inspection.
pub fn pairing_identity(st: &GapState, model: &HfbModel) -> (f64, f64) {
    let gf = gap_functions(st, model);
    let sin2: Vec<f64> = st.theta2.iter().map(|t| t.sin()).collect();
    let lhs: f64 = (0..model.modes.len())
        .map(|i| sin2[i] * sin2[i] * gf.d[i])
        .sum();
    let mut quad = 0.0;
    for i in 0..model.modes.len() {
        for j in 0..model.modes.len() {
            quad += sin2[i] * model.kernels.alpha_at(i, j) * sin2[j];
        }
    }
    (lhs, -quad / (2.0 * model.volume))
}

/// An attractive separable toy kernel alpha(k,k') = -g w(k) w(k') with the
/// Gaussian envelope w(k) = exp(-|k|^2/4), beta = 0.
pub fn separable_attractive_kernels(
    modes: &[MomentumVector],
    step: f64,
    g: f64,
) -> Kernels {
    let m = modes.len();
    let w: Vec<f64> = modes
        .iter()
        .map(|p| {
            let k = step * (p.norm2_int() as f64).sqrt();
            (-0.25 * k * k).exp()
        })
        .collect();
    let mut alpha = vec![0.0; m * m];
    for i in 0..m {
        for j in 0..m {
            alpha[i * m + j] = -g * w[i] * w[j];
        }
    }
    Kernels {
        m,
        alpha,
        beta: vec![0.0; m * m],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{lattice_points, LatticeSpec};
    use crate::spectrum;

    fn unit_lattice(cutoff: f64) -> Lattice {
        lattice_points(&LatticeSpec::new(1, 2.0 * std::f64::consts::PI, cutoff).unwrap()).unwrap()
    }

    fn toy_model(g: f64, mu: f64) -> HfbModel {
        let lat = unit_lattice(2.5);
        let modes: Vec<MomentumVector> = lat.points().to_vec();
        let kernels = separable_attractive_kernels(&modes, lat.spacing(), g);
        let tau = modes
            .iter()
            .map(|p| {
                let k = lat.norm(p);
                k * k - mu
            })
            .collect();
        HfbModel::from_parts(modes, lat.spacing(), lat.volume(), tau, kernels).unwrap()
    }

    #[test]
    fn kernels_constant_potential() {
        let lat = unit_lattice(1.5);
        let v = PotentialSpec::Tabulated {
            samples: vec![(0.0, 0.7), (10.0, 0.7)],
        };
        let k = kernels_from_local_potential(&v, &lat, lat.points()).unwrap();
        for i in 0..k.m {
            for j in 0..k.m {
                assert!((k.alpha_at(i, j) - 0.7).abs() < 1e-15);
                assert!((k.beta_at(i, j) - 0.7).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn kernels_gaussian_diagonal_and_symmetry() {
        let lat = unit_lattice(2.5);
        let v = PotentialSpec::Gaussian { a: 1.2, b: 3.0 };
        let k = kernels_from_local_potential(&v, &lat, lat.points()).unwrap();
        for (i, p) in lat.points().iter().enumerate() {
            let twok = lat.norm(&p.add(p));
            let want = 0.5 * (1.2 + v.hat_radial(twok).unwrap());
            assert!((k.alpha_at(i, i) - want).abs() < 1e-14);
            for j in 0..k.m {
                assert_eq!(k.alpha_at(i, j), k.alpha_at(j, i));
                assert_eq!(k.beta_at(i, j), k.beta_at(j, i));
                assert!(k.beta_at(i, j) >= 0.0);
            }
        }
    }

    #[test]
    fn kernels_refuse_extrapolation() {
        let lat = unit_lattice(2.5);
        let v = PotentialSpec::Tabulated {
            samples: vec![(0.0, 0.5), (2.5, 0.4)],
        };
        // k + k' reaches |p| = 4 which is outside the table
        assert!(matches!(
            kernels_from_local_potential(&v, &lat, lat.points()),
            Err(Error::ExtrapolationRefused { .. })
        ));
    }

    #[test]
    fn vacuum_state_gap_functions() {
        let model = toy_model(4.0, 1.5);
        let st = model.vacuum_state();
        let gf = gap_functions(&st, &model);
        assert!(gf.delta.iter().all(|&d| d == 0.0));
        for (i, &x) in gf.xi.iter().enumerate() {
            assert_eq!(x, model.tau[i]);
        }
        assert_eq!(gf.b, 0.0);
    }

    #[test]
    fn superconducting_matches_bisection_oracle() {
        // separable kernel: 1 = (g/2V) sum w^2 / sqrt(tau^2 + Delta^2 w^2)
        let g = 8.0;
        let mu = 1.5;
        let model = toy_model(g, mu);
        let sol = solve_superconducting(&model, 0.6, 1e-3, 1e-10, 20_000).unwrap();
        let w: Vec<f64> = model
            .modes
            .iter()
            .map(|p| {
                let k = model.step * (p.norm2_int() as f64).sqrt();
                (-0.25 * k * k).exp()
            })
            .collect();
        let vol = model.volume;
        let gap_rhs = |delta: f64| -> f64 {
            let mut s = 0.0;
            for i in 0..model.modes.len() {
                s += w[i] * w[i]
                    / (model.tau[i] * model.tau[i] + delta * delta * w[i] * w[i]).sqrt();
            }
            g / (2.0 * vol) * s
        };
        // bisection for gap_rhs(Delta) = 1
        let (mut lo, mut hi) = (0.0, 100.0);
        assert!(gap_rhs(lo) > 1.0, "kernel too weak for a nontrivial solution");
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if gap_rhs(mid) > 1.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let delta_star = 0.5 * (lo + hi);
        // delta(k) = Delta w(k) at the fixed point
        let gf = &sol.gap_functions;
        for i in 0..model.modes.len() {
            assert!(
                (gf.delta[i].abs() - delta_star * w[i]).abs() < 1e-7,
                "mode {i}: {} vs {}",
                gf.delta[i].abs(),
                delta_star * w[i]
            );
        }
        assert!(sol.residual <= 1e-10);
    }

    #[test]
    fn superconducting_beats_normal_on_attractive_kernel() {
        let model = toy_model(8.0, 1.5);
        let sup = solve_superconducting(&model, 0.6, 1e-3, 1e-10, 20_000).unwrap();
        let norm = normal_solution(&model).unwrap();
        assert!(sup.gap_functions.b < norm.gap_functions.b);
        // resa9 identity at the superconducting fixed point
        let (lhs, rhs) = pairing_identity(&sup.state, &model);
        assert!(lhs > 0.0);
        assert!((lhs - rhs).abs() / lhs.abs() < 1e-8);
        // stationarity residual at both fixed points
        assert!(sup.residual <= 1e-8);
        assert!(norm.residual <= 1e-12);
    }

    #[test]
    fn repulsive_kernel_collapses_to_normal() {
        // alpha >= 0 pointwise (local Gaussian potential), empty band
        let lat = unit_lattice(2.5);
        let v = PotentialSpec::Gaussian { a: 0.8, b: 4.0 };
        let kernels = kernels_from_local_potential(&v, &lat, lat.points()).unwrap();
        let model = HfbModel::from_lattice(&lat, -0.5, kernels).unwrap();
        let sol = solve_superconducting(&model, 0.5, 1e-3, 1e-12, 20_000).unwrap();
        let dmax = sol
            .gap_functions
            .delta
            .iter()
            .fold(0.0f64, |a, &b| a.max(b.abs()));
        assert!(dmax <= 1e-10, "delta did not collapse: {dmax}");
    }

    #[test]
    fn normal_solution_fermi_sea() {
        // free case: occupied modes are exactly the Fermi ball, B = sum 2 tau
        let lat = unit_lattice(2.5);
        let m = lat.points().len();
        let kernels = Kernels {
            m,
            alpha: vec![0.0; m * m],
            beta: vec![0.0; m * m],
        };
        let mu = 1.5;
        let model = HfbModel::from_lattice(&lat, mu, kernels).unwrap();
        let sol = normal_solution(&model).unwrap();
        let mut want_b = 0.0;
        for (i, p) in model.modes.iter().enumerate() {
            let k2 = lat.norm(p) * lat.norm(p);
            let occupied = sol.state.theta2[i] != 0.0;
            assert_eq!(occupied, k2 < mu, "mode {p}");
            if occupied {
                want_b += 2.0 * model.tau[i];
            }
        }
        assert!((sol.gap_functions.b - want_b).abs() < 1e-12);
        assert!(want_b < 0.0);
    }

    #[test]
    fn normal_solution_empty_band() {
        let model = toy_model(0.5, -1.0);
        let sol = normal_solution(&model).unwrap();
        assert!(sol.state.theta2.iter().all(|&t| t == 0.0));
        assert_eq!(sol.gap_functions.b, 0.0);
    }

    #[test]
    fn dispersion_shapes() {
        // delta = const, xi = k^2 - mu gives omega = sqrt((k^2-mu)^2 + gamma^2)
        let model = toy_model(8.0, 1.5);
        let sup = solve_superconducting(&model, 0.6, 1e-3, 1e-10, 20_000).unwrap();
        let table = hfb_dispersion(&sup.state, &model);
        // even in k
        for (p, &v) in table.values.iter() {
            assert_eq!(table.values[&p.negated()], v);
        }
        // positive gap at the superconducting point
        assert!(spectrum::energy_gap(&table) > 0.0);
        // normal branch reproduces |xi|
        let norm = normal_solution(&model).unwrap();
        let tn = hfb_dispersion(&norm.state, &model);
        for (i, p) in model.modes.iter().enumerate() {
            assert!((tn.values[p] - norm.gap_functions.xi[i].abs()).abs() < 1e-13);
        }
    }

    #[test]
    fn degenerate_mode_detected() {
        // tau = 0 and no coupling: delta = xi = 0 at every mode
        let lat = unit_lattice(1.5);
        let m = lat.points().len();
        let kernels = Kernels {
            m,
            alpha: vec![0.0; m * m],
            beta: vec![0.0; m * m],
        };
        let model =
            HfbModel::from_parts(lat.points().to_vec(), lat.spacing(), lat.volume(), vec![0.0; m], kernels)
                .unwrap();
        let st = model.vacuum_state();
        assert!(matches!(
            superconducting_iteration(&st, &model, 0.5),
            Err(Error::DegenerateMode { .. })
        ));
    }
}
