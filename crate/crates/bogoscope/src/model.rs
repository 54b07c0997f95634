//! Momentum lattices, two-body potentials and the plain-text run
//! configuration shared by every other module.
//!
//! Momenta are stored as exact integer multiples of the mode spacing
//! 2*pi/L, so momentum-conservation checks are integer comparisons and the
//! generated grids are exactly symmetric under negation.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use crate::error::{Error, Result};
use crate::quad;

/// A lattice momentum, stored as the integer vector `n` with physical value
/// `(2*pi/L) * n`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MomentumVector {
    pub n: Vec<i64>,
}

impl MomentumVector {
    pub fn new(n: Vec<i64>) -> Self {
        Self { n }
    }

    pub fn zero(d: usize) -> Self {
        Self { n: vec![0; d] }
    }

    pub fn is_zero(&self) -> bool {
        self.n.iter().all(|&c| c == 0)
    }

    pub fn negated(&self) -> Self {
        Self {
            n: self.n.iter().map(|&c| -c).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            n: self
                .n
                .iter()
                .zip(&other.n)
                .map(|(&a, &b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self {
            n: self
                .n
                .iter()
                .zip(&other.n)
                .map(|(&a, &b)| a - b)
                .collect(),
        }
    }

    /// Squared integer norm |n|^2.
    pub fn norm2_int(&self) -> i64 {
        self.n.iter().map(|&c| c * c).sum()
    }
}

impl fmt::Display for MomentumVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.n.iter().map(|c| c.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// Specification of a momentum lattice: dimension, box side length and a
/// Euclidean cutoff on |p|.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeSpec {
    pub d: usize,
    pub side_length: f64,
    pub cutoff: f64,
}

impl LatticeSpec {
    pub fn new(d: usize, side_length: f64, cutoff: f64) -> Result<Self> {
        if d == 0 {
            return Err(Error::Config("dimension must be positive".into()));
        }
        if !(side_length.is_finite() && side_length >= 1.0) {
            return Err(Error::Config(format!(
                "side length must be finite and >= 1, got {side_length}"
            )));
        }
        if !(cutoff.is_finite() && cutoff > 0.0) {
            return Err(Error::Config(format!(
                "cutoff must be finite and positive, got {cutoff}"
            )));
        }
        Ok(Self {
            d,
            side_length,
            cutoff,
        })
    }

    /// Mode spacing 2*pi/L.
    pub fn spacing(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.side_length
    }

    /// Box volume L^d.
    pub fn volume(&self) -> f64 {
        self.side_length.powi(self.d as i32)
    }
}

/// A generated momentum lattice: the set { p in (2 pi / L) Z^d : |p| <= cutoff },
/// ordered lexicographically on the integer components.
#[derive(Debug, Clone)]
pub struct Lattice {
    pub spec: LatticeSpec,
    points: Vec<MomentumVector>,
}

impl Lattice {
    pub fn points(&self) -> &[MomentumVector] {
        &self.points
    }

    /// Lattice points excluding the origin, in lexicographic order.
    pub fn nonzero_points(&self) -> impl Iterator<Item = &MomentumVector> {
        self.points.iter().filter(|p| !p.is_zero())
    }

    pub fn spacing(&self) -> f64 {
        self.spec.spacing()
    }

    pub fn volume(&self) -> f64 {
        self.spec.volume()
    }

    /// Physical components (2 pi / L) n_i.
    pub fn physical(&self, p: &MomentumVector) -> Vec<f64> {
        let h = self.spacing();
        p.n.iter().map(|&c| h * c as f64).collect()
    }

    /// Physical Euclidean norm |p|.
    pub fn norm(&self, p: &MomentumVector) -> f64 {
        self.spacing() * (p.norm2_int() as f64).sqrt()
    }

    pub fn contains(&self, p: &MomentumVector) -> bool {
        let h = self.spacing();
        let r2 = (p.norm2_int() as f64) * h * h;
        r2 <= self.spec.cutoff * self.spec.cutoff * (1.0 + 1e-12)
    }
}

/// Enumerates the momentum lattice of `spec`.
///
/// The result always contains the origin and is closed under negation.
/// Requesting a cutoff below the mode spacing is an error: the nonzero part
/// of the grid would be empty and every downstream sum degenerate.
pub fn lattice_points(spec: &LatticeSpec) -> Result<Lattice> {
    let h = spec.spacing();
    if spec.cutoff < h {
        return Err(Error::EmptyNonzeroLattice {
            cutoff: spec.cutoff,
            spacing: h,
        });
    }
    let nmax = (spec.cutoff / h).floor() as i64;
    let r2_cut = (spec.cutoff / h) * (spec.cutoff / h) * (1.0 + 1e-12);
    let mut points = Vec::new();
    let mut current = vec![-nmax; spec.d];
    loop {
        let n2: i64 = current.iter().map(|&c| c * c).sum();
        if (n2 as f64) <= r2_cut {
            points.push(MomentumVector::new(current.clone()));
        }
        // lexicographic odometer
        let mut axis = spec.d;
        loop {
            if axis == 0 {
                return Ok(Lattice {
                    spec: spec.clone(),
                    points,
                });
            }
            axis -= 1;
            if current[axis] < nmax {
                current[axis] += 1;
                for c in current.iter_mut().skip(axis + 1) {
                    *c = -nmax;
                }
                break;
            }
        }
    }
}

/// A two-body potential given through its Fourier transform v_hat(p) >= 0.
///
/// All supported kinds are radial, so evenness v_hat(p) = v_hat(-p) holds by
/// construction.
#[derive(Debug, Clone, PartialEq)]
pub enum PotentialSpec {
    /// v_hat(p) = a * exp(-|p|^2 / b)
    Gaussian { a: f64, b: f64 },
    /// Samples (|p|, v_hat) with monotone piecewise-cubic interpolation.
    /// Queries outside the sampled range are refused.
    Tabulated { samples: Vec<(f64, f64)> },
    Zero,
}

impl PotentialSpec {
    /// The paper's figure potential v1: v_hat(p) = exp(-p^2/5)/10.
    pub fn v1() -> Self {
        PotentialSpec::Gaussian { a: 0.1, b: 5.0 }
    }

    /// The paper's figure potential v2: v_hat(p) = 15 exp(-p^2/2)/2.
    pub fn v2() -> Self {
        PotentialSpec::Gaussian { a: 7.5, b: 2.0 }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            PotentialSpec::Gaussian { a, b } => {
                if !(a.is_finite() && *a >= 0.0) {
                    return Err(Error::Config(format!("gaussian amplitude must be >= 0, got {a}")));
                }
                if !(b.is_finite() && *b > 0.0) {
                    return Err(Error::Config(format!("gaussian width^2 must be > 0, got {b}")));
                }
            }
            PotentialSpec::Tabulated { samples } => {
                if samples.len() < 2 {
                    return Err(Error::Config("tabulated potential needs >= 2 samples".into()));
                }
                for w in samples.windows(2) {
                    if w[1].0 <= w[0].0 {
                        return Err(Error::Config("tabulated |p| samples must be strictly increasing".into()));
                    }
                }
                if samples.iter().any(|&(r, v)| r < 0.0 || v < 0.0 || !v.is_finite()) {
                    return Err(Error::Config("tabulated potential must have |p| >= 0 and v_hat >= 0".into()));
                }
            }
            PotentialSpec::Zero => {}
        }
        Ok(())
    }

    /// Returns a copy with v_hat scaled by `g >= 0`.
    pub fn scaled(&self, g: f64) -> Self {
        match self {
            PotentialSpec::Gaussian { a, b } => PotentialSpec::Gaussian { a: a * g, b: *b },
            PotentialSpec::Tabulated { samples } => PotentialSpec::Tabulated {
                samples: samples.iter().map(|&(r, v)| (r, v * g)).collect(),
            },
            PotentialSpec::Zero => PotentialSpec::Zero,
        }
    }

    /// v_hat as a function of |p|.
    pub fn hat_radial(&self, p_abs: f64) -> Result<f64> {
        match self {
            PotentialSpec::Gaussian { a, b } => Ok(a * (-p_abs * p_abs / b).exp()),
            PotentialSpec::Zero => Ok(0.0),
            PotentialSpec::Tabulated { samples } => {
                let lo = samples[0].0;
                let hi = samples[samples.len() - 1].0;
                if p_abs < lo - 1e-12 || p_abs > hi + 1e-12 {
                    return Err(Error::ExtrapolationRefused { p_abs, lo, hi });
                }
                Ok(pchip_eval(samples, p_abs.clamp(lo, hi)))
            }
        }
    }
}

/// v_hat evaluated at a lattice momentum.
pub fn potential_hat(spec: &PotentialSpec, lat: &Lattice, p: &MomentumVector) -> Result<f64> {
    spec.hat_radial(lat.norm(p))
}

/// The real-space value v(0) = (2 pi)^{-d} * integral of v_hat.
///
/// For the Gaussian kind this is the closed form a (pi b)^{d/2} / (2 pi)^d;
/// for tabulated potentials the radial integral over the sampled range is
/// used, which requires the last sample to have decayed to (numerical) zero.
pub fn v_real_zero(spec: &PotentialSpec, d: usize) -> Result<f64> {
    use std::f64::consts::PI;
    match spec {
        PotentialSpec::Zero => Ok(0.0),
        PotentialSpec::Gaussian { a, b } => Ok(a * (PI * b).powf(d as f64 / 2.0) / (2.0 * PI).powi(d as i32)),
        PotentialSpec::Tabulated { samples } => {
            let max_v = samples.iter().map(|&(_, v)| v).fold(0.0, f64::max);
            let last = samples[samples.len() - 1].1;
            if last > 1e-9 * max_v.max(1e-300) {
                return Err(Error::DivergentInverseTransform { last });
            }
            let lo = samples[0].0;
            let hi = samples[samples.len() - 1].0;
            let integrand = |r: f64| pchip_eval(samples, r) * r.powi(d as i32 - 1);
            let (radial, _) = quad::adaptive_simpson(&integrand, lo, hi, 1e-12)?;
            Ok(quad::unit_sphere_area(d) * radial / (2.0 * PI).powi(d as i32))
        }
    }
}

/// Monotone piecewise-cubic (Fritsch-Carlson) interpolation. Slopes are
/// limited so the interpolant stays within the data range on every interval,
/// preserving nonnegativity of nonnegative samples.
fn pchip_eval(samples: &[(f64, f64)], x: f64) -> f64 {
    let n = samples.len();
    let seg = match samples.partition_point(|&(r, _)| r <= x) {
        0 => 0,
        k if k >= n => n - 2,
        k => k - 1,
    };
    let (x0, y0) = samples[seg];
    let (x1, y1) = samples[seg + 1];
    let h = x1 - x0;
    let delta = (y1 - y0) / h;

    // shape-preserving three-point endpoint slope
    let endpoint = |h0: f64, h1: f64, d0: f64, d1: f64| -> f64 {
        let m = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
        if m * d0 <= 0.0 {
            0.0
        } else if d0 * d1 < 0.0 && m.abs() > 3.0 * d0.abs() {
            3.0 * d0
        } else {
            m
        }
    };
    let slope_at = |i: usize| -> f64 {
        if i == 0 {
            if n == 2 {
                return secant(samples, 0);
            }
            let h0 = samples[1].0 - samples[0].0;
            let h1 = samples[2].0 - samples[1].0;
            endpoint(h0, h1, secant(samples, 0), secant(samples, 1))
        } else if i == n - 1 {
            if n == 2 {
                return secant(samples, 0);
            }
            let h0 = samples[n - 1].0 - samples[n - 2].0;
            let h1 = samples[n - 2].0 - samples[n - 3].0;
            endpoint(h0, h1, secant(samples, n - 2), secant(samples, n - 3))
        } else {
            let d0 = secant(samples, i - 1);
            let d1 = secant(samples, i);
            if d0 * d1 <= 0.0 {
                0.0
            } else {
                // harmonic mean of the adjacent secants
                let w0 = 2.0 * (samples[i + 1].0 - samples[i].0) + (samples[i].0 - samples[i - 1].0);
                let w1 = (samples[i + 1].0 - samples[i].0) + 2.0 * (samples[i].0 - samples[i - 1].0);
                (w0 + w1) / (w0 / d0 + w1 / d1)
            }
        }
    };
    let mut m0 = slope_at(seg);
    let mut m1 = slope_at(seg + 1);
    if delta == 0.0 {
        m0 = 0.0;
        m1 = 0.0;
    } else {
        // Fritsch-Carlson limiter
        let a = m0 / delta;
        let b = m1 / delta;
        let r = (a * a + b * b).sqrt();
        if r > 3.0 {
            m0 = 3.0 * a / r * delta;
            m1 = 3.0 * b / r * delta;
        }
    }
    let t = (x - x0) / h;
    let h00 = (1.0 + 2.0 * t) * (1.0 - t) * (1.0 - t);
    let h10 = t * (1.0 - t) * (1.0 - t);
    let h01 = t * t * (3.0 - 2.0 * t);
    let h11 = t * t * (t - 1.0);
    h00 * y0 + h10 * h * m0 + h01 * y1 + h11 * h * m1
}

fn secant(samples: &[(f64, f64)], i: usize) -> f64 {
    (samples[i + 1].1 - samples[i].1) / (samples[i + 1].0 - samples[i].0)
}

/// A parsed run configuration (line-oriented `key=value` text).
///
/// Recognized keys: `dim`, `side_length`, `cutoff`, `potential.kind`
/// (`gaussian` | `tabulated` | `zero`), `potential.a`, `potential.b`,
/// `potential.table_path`. Blank lines and lines starting with `#` are
/// ignored.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub lattice: LatticeSpec,
    pub potential: PotentialSpec,
    /// Unrecognized keys, kept for module-specific parameter blocks.
    pub extra: BTreeMap<String, String>,
}

impl RunConfig {
    pub fn parse(text: &str, base_dir: Option<&Path>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected key=value, got {line:?}", lineno + 1))
            })?;
            map.insert(key.trim().to_string(), value.trim().to_string());
        }
        let take_f64 = |map: &mut BTreeMap<String, String>, key: &str| -> Result<f64> {
            let raw = map
                .remove(key)
                .ok_or_else(|| Error::Config(format!("missing key {key}")))?;
            raw.parse::<f64>()
                .map_err(|_| Error::Config(format!("key {key}: not a number: {raw:?}")))
        };
        let dim_raw = map
            .remove("dim")
            .ok_or_else(|| Error::Config("missing key dim".into()))?;
        let dim: usize = dim_raw
            .parse()
            .map_err(|_| Error::Config(format!("key dim: not an integer: {dim_raw:?}")))?;
        let side_length = take_f64(&mut map, "side_length")?;
        let cutoff = take_f64(&mut map, "cutoff")?;
        let lattice = LatticeSpec::new(dim, side_length, cutoff)?;

        let kind = map
            .remove("potential.kind")
            .ok_or_else(|| Error::Config("missing key potential.kind".into()))?;
        let potential = match kind.as_str() {
            "zero" => PotentialSpec::Zero,
            "gaussian" => {
                let a = take_f64(&mut map, "potential.a")?;
                let b = take_f64(&mut map, "potential.b")?;
                PotentialSpec::Gaussian { a, b }
            }
            "tabulated" => {
                let rel = map
                    .remove("potential.table_path")
                    .ok_or_else(|| Error::Config("missing key potential.table_path".into()))?;
                let path = match base_dir {
                    Some(dir) => dir.join(&rel),
                    None => rel.clone().into(),
                };
                let text = std::fs::read_to_string(&path)?;
                PotentialSpec::Tabulated {
                    samples: parse_table(&text)?,
                }
            }
            other => return Err(Error::Config(format!("unknown potential.kind {other:?}"))),
        };
        potential.validate()?;
        Ok(Self {
            lattice,
            potential,
            extra: map,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text, path.parent())
    }
}

/// Two-column whitespace-separated (|p|, v_hat) samples.
fn parse_table(text: &str) -> Result<Vec<(f64, f64)>> {
    let mut samples = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut cols = line.split_whitespace();
        let parse = |tok: Option<&str>| -> Result<f64> {
            tok.ok_or_else(|| Error::Config(format!("table line {}: expected two columns", lineno + 1)))?
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("table line {}: not a number", lineno + 1)))
        };
        let r = parse(cols.next())?;
        let v = parse(cols.next())?;
        samples.push((r, v));
    }
    Ok(samples)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lattice_1d_unit_spacing() {
        // L = 2 pi gives spacing 1; cutoff 2.5 keeps n in {-2..2}.
        let spec = LatticeSpec::new(1, 2.0 * std::f64::consts::PI, 2.5).unwrap();
        let lat = lattice_points(&spec).unwrap();
        let ns: Vec<i64> = lat.points().iter().map(|p| p.n[0]).collect();
        assert_eq!(ns, vec![-2, -1, 0, 1, 2]);
    }

    #[test]
    fn lattice_paper_units() {
        // 2 pi / L = 0.15, cutoff 0.31 -> physical momenta {-0.30,-0.15,0,0.15,0.30}
        let side = 2.0 * std::f64::consts::PI / 0.15;
        let spec = LatticeSpec::new(1, side, 0.31).unwrap();
        let lat = lattice_points(&spec).unwrap();
        let ps: Vec<f64> = lat.points().iter().map(|p| lat.physical(p)[0]).collect();
        assert_eq!(ps.len(), 5);
        for (got, want) in ps.iter().zip([-0.30, -0.15, 0.0, 0.15, 0.30]) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn lattice_2d_euclidean_ball() {
        let spec = LatticeSpec::new(2, 2.0 * std::f64::consts::PI, 1.0).unwrap();
        let lat = lattice_points(&spec).unwrap();
        assert_eq!(lat.points().len(), 5);
        assert!(lat.points().contains(&MomentumVector::new(vec![0, 0])));
        assert!(lat.points().contains(&MomentumVector::new(vec![1, 0])));
        assert!(!lat.points().contains(&MomentumVector::new(vec![1, 1])));
    }

    #[test]
    fn lattice_symmetric_under_negation() {
        let spec = LatticeSpec::new(2, 9.0, 2.3).unwrap();
        let lat = lattice_points(&spec).unwrap();
        for p in lat.points() {
            assert!(lat.points().contains(&p.negated()));
        }
        assert!(lat.points().contains(&MomentumVector::zero(2)));
        // odd point count in every axis-aligned slice through the origin
        let on_axis = lat.points().iter().filter(|p| p.n[1] == 0).count();
        assert_eq!(on_axis % 2, 1);
    }

    #[test]
    fn lattice_empty_nonzero_error_below_spacing() {
        let spec = LatticeSpec::new(1, 2.0 * std::f64::consts::PI, 0.5).unwrap();
        assert!(matches!(
            lattice_points(&spec),
            Err(Error::EmptyNonzeroLattice { .. })
        ));
    }

    #[test]
    fn potential_hat_values() {
        let v1 = PotentialSpec::v1();
        assert!((v1.hat_radial(0.0).unwrap() - 0.1).abs() < 1e-15);
        let g = PotentialSpec::Gaussian { a: 7.5, b: 2.0 };
        assert!((g.hat_radial(1.0).unwrap() - 7.5 * (-0.5f64).exp()).abs() < 1e-14);
        assert_eq!(PotentialSpec::Zero.hat_radial(3.0).unwrap(), 0.0);
    }

    #[test]
    fn potential_even_on_lattice() {
        let spec = LatticeSpec::new(2, 7.0, 2.0).unwrap();
        let lat = lattice_points(&spec).unwrap();
        let v = PotentialSpec::Gaussian { a: 1.3, b: 2.2 };
        for p in lat.points() {
            let a = potential_hat(&v, &lat, p).unwrap();
            let b = potential_hat(&v, &lat, &p.negated()).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn v_real_zero_gaussian_1d() {
        // (1/10) sqrt(5 pi) / (2 pi)
        let v = PotentialSpec::v1();
        let want = 0.1 * (5.0 * std::f64::consts::PI).sqrt() / (2.0 * std::f64::consts::PI);
        assert!((v_real_zero(&v, 1).unwrap() - want).abs() < 1e-14);
    }

    #[test]
    fn v_real_zero_gaussian_2d() {
        let v = PotentialSpec::Gaussian { a: 1.0, b: 1.0 };
        let want = 1.0 / (4.0 * std::f64::consts::PI);
        assert!((v_real_zero(&v, 2).unwrap() - want).abs() < 1e-14);
        assert_eq!(v_real_zero(&PotentialSpec::Zero, 2).unwrap(), 0.0);
    }

    #[test]
    fn v_real_zero_matches_quadrature() {
        // quadrature of v_hat over [-R, R]^d converges to (2 pi)^d v(0)
        for (d, a, b) in [(1usize, 0.1, 5.0), (2, 1.0, 1.0)] {
            let v = PotentialSpec::Gaussian { a, b };
            let r = 10.0 * b.sqrt();
            let one_d = |x: f64| (-x * x / b).exp();
            let (line, _) = quad::adaptive_simpson(&one_d, -r, r, 1e-13).unwrap();
            let integral = a * line.powi(d as i32);
            let closed = v_real_zero(&v, d).unwrap() * (2.0 * std::f64::consts::PI).powi(d as i32);
            assert!((integral - closed).abs() / closed < 1e-8);
        }
    }

    #[test]
    fn tabulated_refuses_extrapolation() {
        let t = PotentialSpec::Tabulated {
            samples: vec![(0.0, 1.0), (1.0, 0.5), (2.0, 0.1)],
        };
        assert!(t.hat_radial(1.5).is_ok());
        assert!(matches!(
            t.hat_radial(2.5),
            Err(Error::ExtrapolationRefused { .. })
        ));
    }

    #[test]
    fn tabulated_gaussian_interp_accuracy_and_positivity() {
        let samples: Vec<(f64, f64)> = (0..=60)
            .map(|i| {
                let r = i as f64 * 0.1;
                (r, 0.1 * (-r * r / 5.0).exp())
            })
            .collect();
        let t = PotentialSpec::Tabulated { samples };
        t.validate().unwrap();
        for i in 0..=300 {
            let r = i as f64 * 0.02;
            let got = t.hat_radial(r).unwrap();
            let want = 0.1 * (-r * r / 5.0).exp();
            assert!(got >= 0.0);
            // monotone limiting costs some accuracy near the flat peak
            assert!((got - want).abs() < 5e-5, "r={r} got={got} want={want}");
        }
    }

    #[test]
    fn tabulated_v_real_zero_divergence_check() {
        let bad = PotentialSpec::Tabulated {
            samples: vec![(0.0, 1.0), (1.0, 0.9)],
        };
        assert!(matches!(
            v_real_zero(&bad, 1),
            Err(Error::DivergentInverseTransform { .. })
        ));
        let good: Vec<(f64, f64)> = (0..=200)
            .map(|i| {
                let r = i as f64 * 0.1;
                (r, (-r * r / 5.0).exp() * 0.1)
            })
            .collect();
        let t = PotentialSpec::Tabulated { samples: good };
        let want = v_real_zero(&PotentialSpec::v1(), 1).unwrap();
        let got = v_real_zero(&t, 1).unwrap();
        assert!((got - want).abs() / want < 1e-6);
    }

    #[test]
    fn config_roundtrip() {
        let text = "# comment\ndim = 1\nside_length = 41.88790204786391\ncutoff = 3\npotential.kind = gaussian\npotential.a = 0.1\npotential.b = 5\nkappa = 2.5\n";
        let cfg = RunConfig::parse(text, None).unwrap();
        assert_eq!(cfg.lattice.d, 1);
        assert_eq!(cfg.potential, PotentialSpec::v1());
        assert_eq!(cfg.extra.get("kappa").map(String::as_str), Some("2.5"));
    }

    #[test]
    fn config_rejects_garbage() {
        assert!(RunConfig::parse("dim = 1\nside_length = x\n", None).is_err());
        assert!(RunConfig::parse("not a key value line", None).is_err());
    }
}
