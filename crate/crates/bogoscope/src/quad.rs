//! Adaptive quadrature on finite intervals.

use crate::error::{Error, Result};

/// Adaptive Simpson integration of `f` over `[a, b]` to absolute tolerance
/// `tol`. Returns the integral together with an error estimate.
///
/// Fails with [`Error::QuadratureNonConvergence`] if the recursion-depth
/// budget is exhausted before the local error estimates drop below the
/// tolerance.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> Result<(f64, f64)> {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = simpson(a, b, fa, fm, fb);
    let mut residual = 0.0;
    let value = recurse(f, a, b, fa, fm, fb, whole, tol, 48, &mut residual);
    if residual > tol {
        return Err(Error::QuadratureNonConvergence { residual, tol });
    }
    Ok((value, residual))
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn recurse<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: usize,
    residual: &mut f64,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let err = (left + right - whole) / 15.0;
    if err.abs() <= tol || depth == 0 {
        if depth == 0 {
            *residual += err.abs();
        }
        return left + right + err;
    }
    let half = 0.5 * tol;
    recurse(f, a, m, fa, flm, fm, left, half, depth - 1, residual)
        + recurse(f, m, b, fm, frm, fb, right, half, depth - 1, residual)
}

/// Surface measure of the unit sphere S^{d-1} in R^d, i.e. 2 pi^{d/2} / Gamma(d/2).
pub fn unit_sphere_area(d: usize) -> f64 {
    use std::f64::consts::PI;
    // Gamma(d/2) by the recursion Gamma(x+1) = x Gamma(x) from Gamma(1/2) or Gamma(1).
    let mut gamma;
    let mut x;
    if d % 2 == 0 {
        gamma = 1.0; // Gamma(1)
        x = 1.0;
    } else {
        gamma = PI.sqrt(); // Gamma(1/2)
        x = 0.5;
    }
    while x + 1e-9 < d as f64 / 2.0 {
        gamma *= x;
        x += 1.0;
    }
    2.0 * PI.powf(d as f64 / 2.0) / gamma
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_polynomial_exactly() {
        let (v, _) = adaptive_simpson(&|x| x * x * x - 2.0 * x, 0.0, 2.0, 1e-12).unwrap();
        assert!((v - 0.0).abs() < 1e-12);
    }

    #[test]
    fn integrates_gaussian() {
        // int_{-8}^{8} exp(-x^2) dx ~ sqrt(pi)
        let (v, _) = adaptive_simpson(&|x| (-x * x).exp(), -8.0, 8.0, 1e-12).unwrap();
        assert!((v - std::f64::consts::PI.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn sphere_areas() {
        assert!((unit_sphere_area(1) - 2.0).abs() < 1e-14);
        assert!((unit_sphere_area(2) - 2.0 * std::f64::consts::PI).abs() < 1e-13);
        assert!((unit_sphere_area(3) - 4.0 * std::f64::consts::PI).abs() < 1e-13);
    }
}
