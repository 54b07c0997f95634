//! Bogoliubov approximation for the mean-field Bose gas: elementary
//! dispersion, diagonalization coefficients, the Bogoliubov energy (lattice
//! sum and infinite-volume density), and the ground-state prediction.
//!
//! Kinetic convention in this module is t = 1 (the Laplacian enters as
//! |p|^2 without the 1/2).

use crate::error::{Error, Result};
use crate::model::{Lattice, LatticeSpec, MomentumVector, PotentialSpec};
use crate::quad;

/// Coefficients of the Bogoliubov rotation diagonalizing the quadratic
/// Hamiltonian at momentum p: A_p = |p|^2 + v_hat(p), B_p = v_hat(p),
/// alpha_p = tanh(2 beta_p), c_p = cosh(2 beta_p), s_p = sinh(2 beta_p).
#[derive(Debug, Clone, Copy)]
pub struct BogoliubovCoefficients {
    pub a_p: f64,
    pub b_p: f64,
    pub alpha_p: f64,
    pub beta_p: f64,
    pub c_p: f64,
    pub s_p: f64,
}

/// e_p = |p| sqrt(|p|^2 + 2 v_hat(p)) evaluated at physical |p|.
///
/// The rho*lambda-scaled variant of the dispersion is obtained by
/// pre-scaling the potential (`PotentialSpec::scaled`).
pub fn elementary_dispersion_radial(v: &PotentialSpec, p_abs: f64) -> Result<f64> {
    if p_abs == 0.0 {
        return Ok(0.0);
    }
    let vh = v.hat_radial(p_abs)?;
    Ok(p_abs * (p_abs * p_abs + 2.0 * vh).sqrt())
}

/// e_p at a lattice momentum.
pub fn elementary_dispersion(v: &PotentialSpec, lat: &Lattice, p: &MomentumVector) -> Result<f64> {
    elementary_dispersion_radial(v, lat.norm(p))
}

/// Bogoliubov rotation coefficients at physical momentum |p| > 0.
///
/// alpha is evaluated through the cancellation-free form
/// alpha = B / (A + sqrt(A^2 - B^2)), which is algebraically equal to
/// (A - sqrt(A^2 - B^2)) / B.
pub fn bogoliubov_coefficients_radial(v: &PotentialSpec, p_abs: f64) -> Result<BogoliubovCoefficients> {
    let vh = v.hat_radial(p_abs)?;
    let p2 = p_abs * p_abs;
    let a = p2 + vh;
    let b = vh;
    // A^2 - B^2 = |p|^2 (|p|^2 + 2 v_hat) = e_p^2
    let e = p_abs * (p2 + 2.0 * vh).sqrt();
    let alpha = if b > 0.0 { b / (a + e) } else { 0.0 };
    let c = 1.0 / (1.0 - alpha * alpha).sqrt();
    let s = alpha * c;
    let beta = 0.5 * alpha.atanh();
    Ok(BogoliubovCoefficients {
        a_p: a,
        b_p: b,
        alpha_p: alpha,
        beta_p: beta,
        c_p: c,
        s_p: s,
    })
}

pub fn bogoliubov_coefficients(
    v: &PotentialSpec,
    lat: &Lattice,
    p: &MomentumVector,
) -> Result<BogoliubovCoefficients> {
    bogoliubov_coefficients_radial(v, lat.norm(p))
}

/// Compensated (Kahan) accumulator.
#[derive(Debug, Default, Clone, Copy)]
pub struct KahanSum {
    sum: f64,
    carry: f64,
}

impl KahanSum {
    pub fn add(&mut self, x: f64) {
        let y = x - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum
    }
}

/// Both evaluations of the Bogoliubov energy over the nonzero modes of a
/// lattice:
///
/// - `sum`: -1/2 sum (|p|^2 + v_hat(p) - e_p)
/// - `alt`: -1/2 sum v_hat(p)^2 / (|p|^2 + v_hat(p) + e_p)
///
/// Terms are accumulated in ascending |p| with compensated summation.
#[derive(Debug, Clone, Copy)]
pub struct BogoliubovEnergy {
    pub sum: f64,
    pub alt: f64,
}

pub fn bogoliubov_energy_both(lat: &Lattice, v: &PotentialSpec) -> Result<BogoliubovEnergy> {
    let mut modes: Vec<&MomentumVector> = lat.nonzero_points().collect();
    modes.sort_by(|a, b| {
        a.norm2_int()
            .cmp(&b.norm2_int())
            .then_with(|| a.n.cmp(&b.n))
    });
    let mut acc_sum = KahanSum::default();
    let mut acc_alt = KahanSum::default();
    for p in modes {
        let p_abs = lat.norm(p);
        let vh = v.hat_radial(p_abs)?;
        let p2 = p_abs * p_abs;
        let e = p_abs * (p2 + 2.0 * vh).sqrt();
        acc_sum.add(p2 + vh - e);
        acc_alt.add(vh * vh / (p2 + vh + e));
    }
    Ok(BogoliubovEnergy {
        sum: -0.5 * acc_sum.value(),
        alt: -0.5 * acc_alt.value(),
    })
}

/// E_Bog with the internal dual-formula consistency check (1e-10 relative).
pub fn bogoliubov_energy(lat: &Lattice, v: &PotentialSpec) -> Result<f64> {
    let e = bogoliubov_energy_both(lat, v)?;
    let scale = e.sum.abs().max(e.alt.abs());
    if scale > 0.0 {
        let rel = (e.sum - e.alt).abs() / scale;
        if rel > 1e-10 {
            return Err(Error::InternalConsistency {
                what: "Bogoliubov energy formulas",
                rel,
            });
        }
    }
    Ok(e.sum)
}

/// Infinite-volume energy density at scaling parameter s = rho*lambda:
///
///   s/2 * v_hat(0) - (2 (2 pi)^d)^{-1} int (|p|^2 + s v_hat - |p| sqrt(|p|^2 + 2 s v_hat)) dp
///
/// reduced to a radial quadrature, absolute tolerance 1e-9. The integrand is
/// evaluated through the cancellation-free v_hat^2 form.
pub fn energy_density_integral(v: &PotentialSpec, d: usize, rho_lambda: f64) -> Result<f64> {
    if rho_lambda < 0.0 {
        return Err(Error::Config(format!(
            "rho*lambda must be >= 0, got {rho_lambda}"
        )));
    }
    if rho_lambda == 0.0 || *v == PotentialSpec::Zero {
        return Ok(0.0);
    }
    let tol = 1e-9;
    let vh0 = v.hat_radial(0.0)?;
    let integrand = |r: f64| -> f64 {
        let vh = rho_lambda * v.hat_radial(r).unwrap_or(0.0);
        let r2 = r * r;
        let e = r * (r2 + 2.0 * vh).sqrt();
        vh * vh / (r2 + vh + e) * r.powi(d as i32 - 1)
    };
    // extend the radial range until the increment is negligible
    let mut r_hi = match v {
        PotentialSpec::Gaussian { b, .. } => 6.0 * b.sqrt(),
        PotentialSpec::Tabulated { samples } => samples[samples.len() - 1].0,
        PotentialSpec::Zero => unreachable!(),
    };
    let (mut radial, mut residual) = quad::adaptive_simpson(&integrand, 0.0, r_hi, tol * 0.1)?;
    if matches!(v, PotentialSpec::Gaussian { .. }) {
        loop {
            let (inc, inc_res) = quad::adaptive_simpson(&integrand, r_hi, 2.0 * r_hi, tol * 0.1)?;
            radial += inc;
            residual += inc_res;
            r_hi *= 2.0;
            if inc.abs() < tol * 0.01 {
                break;
            }
        }
    }
    if residual > tol {
        return Err(Error::QuadratureNonConvergence { residual, tol });
    }
    let two_pi_d = (2.0 * std::f64::consts::PI).powi(d as i32);
    let integral = quad::unit_sphere_area(d) * radial;
    Ok(0.5 * rho_lambda * vh0 - integral / (2.0 * two_pi_d))
}

/// Theorem-5.1 prediction for the ground-state energy of the mean-field
/// Hamiltonian: v_hat(0) (N - 1) / 2 + E_Bog.
pub fn ground_state_prediction(n_particles: usize, lat: &Lattice, v: &PotentialSpec) -> Result<f64> {
    if n_particles < 2 {
        return Err(Error::Config(format!(
            "particle number must be >= 2, got {n_particles}"
        )));
    }
    let vh0 = v.hat_radial(0.0)?;
    Ok(0.5 * vh0 * (n_particles as f64 - 1.0) + bogoliubov_energy(lat, v)?)
}

/// Convenience: a lattice in the paper's units 2 pi / L = 0.15.
pub fn paper_lattice(d: usize, cutoff: f64) -> Result<Lattice> {
    let side = 2.0 * std::f64::consts::PI / 0.15;
    crate::model::lattice_points(&LatticeSpec::new(d, side, cutoff)?)
}
