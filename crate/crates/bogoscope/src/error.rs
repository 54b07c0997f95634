//! Error type shared by all modules.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty nonzero lattice: cutoff {cutoff} is below the mode spacing {spacing}")]
    EmptyNonzeroLattice { cutoff: f64, spacing: f64 },

    #[error("extrapolation refused: |p| = {p_abs} outside tabulated range [{lo}, {hi}]")]
    ExtrapolationRefused { p_abs: f64, lo: f64, hi: f64 },

    #[error("divergent inverse transform: tabulated potential has no integrable tail (last sample {last})")]
    DivergentInverseTransform { last: f64 },

    #[error("quadrature did not converge: residual estimate {residual} above tolerance {tol}")]
    QuadratureNonConvergence { residual: f64, tol: f64 },

    #[error("internal consistency failure: {what} disagree by relative {rel}")]
    InternalConsistency { what: &'static str, rel: f64 },

    #[error("enumeration not well-founded: dispersion is {value} at nonzero mode {mode:?}")]
    EnumerationNotWellFounded { mode: Vec<i64>, value: f64 },

    #[error("unreachable momentum {momentum:?} with at most {max_n} parts")]
    UnreachableMomentum { momentum: Vec<i64>, max_n: usize },

    #[error("condensate-free state: the chemical-potential condition divides by |alpha|^2")]
    CondensateFreeState,

    #[error("dynamical instability at mode {mode:?}: f = {f}, |g| = {g_abs}")]
    DynamicalInstability { mode: Vec<i64>, f: f64, g_abs: f64 },

    #[error("degenerate mode {mode:?}: delta and xi vanish simultaneously")]
    DegenerateMode { mode: Vec<i64> },

    #[error("normal solution did not stabilize after {iterations} sign sweeps")]
    NormalSolutionUnstable { iterations: usize },

    #[error("iteration ceiling {ceiling} reached without convergence: residual {residual}")]
    IterationCeiling { ceiling: usize, residual: f64 },

    #[error("degenerate chart: fermionic pairing matrix has ||theta|| = {norm} >= {limit}")]
    DegenerateChart { norm: f64, limit: f64 },

    #[error("unsupported degree {degree}: Wick reordering is implemented for degree <= 4")]
    UnsupportedDegree { degree: usize },

    #[error("no stationary point found: last gradient norm {grad_norm} after {restarts} restarts")]
    NoStationaryPoint { grad_norm: f64, restarts: usize },

    #[error("oracle too large: dimension {dim} exceeds bound {bound}")]
    OracleTooLarge { dim: usize, bound: usize },

    #[error("sector too large: dimension {dim} exceeds bound {bound}")]
    SectorTooLarge { dim: usize, bound: usize },

    #[error("eigensolver did not converge: residual {residual} above {tol}")]
    EigensolverNonConvergence { residual: f64, tol: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid Hamiltonian: {0}")]
    Hamiltonian(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
