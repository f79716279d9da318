use thiserror::Error;

/// Crate-wide error type; variants are tagged by the subsystem that raised them.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("syntax error at {line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },

    #[error("semantic error at {line}:{col}: {msg}")]
    Semantic { line: usize, col: usize, msg: String },

    #[error("family validation failed: {0}")]
    Validation(String),

    #[error("point outside chart domain: |z| = {radius:.6e} not in [{lo:.6e}, {hi:.6e}]")]
    OutsideDomain { radius: f64, lo: f64, hi: f64 },

    #[error("root finding failed: {0}")]
    RootFind(String),

    #[error("base point within rho_cut of a discriminant point (|dx| = {dist:.3e} < {rho:.3e})")]
    NearDiscriminant { dist: f64, rho: f64 },

    #[error("rank-deficient jet (branch point): ||fx ^ fy|| = {wedge_norm:.3e}")]
    RankDeficient { wedge_norm: f64 },

    #[error("quadrature budget exhausted: error estimate {err:.3e} above tolerance {tol:.3e}")]
    QuadratureBudget { err: f64, tol: f64 },

    #[error("slice is tangent to the sphere at eps = {eps}: {msg}")]
    TangentSlice { eps: f64, msg: String },

    #[error("curve tracing failed: {0}")]
    Trace(String),

    #[error("integer snap failed: raw value {raw} is {dist:.3} from the nearest integer (threshold {threshold})")]
    SnapFailure { raw: f64, dist: f64, threshold: f64 },

    #[error("s-limit did not stabilise at eps = {eps}: last delta {delta:.3e} above {threshold:.3e}")]
    NotStabilised { eps: f64, delta: f64, threshold: f64 },

    #[error("stereographic pole too close to a curve (distance {dist:.3e})")]
    PoleTooClose { dist: f64 },

    #[error("push-off collides with the slice (min distance {dist:.3e})")]
    PushOffCollision { dist: f64 },

    #[error("vector field check failed: {0}")]
    VectorField(String),

    #[error("minimality check failed: max |trace B| = {trace:.3e} above {tol:.3e}")]
    NotMinimal { trace: f64, tol: f64 },

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error("unknown analysis `{0}`")]
    UnknownAnalysis(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("consistency check `{name}` failed: {detail}")]
    Inconsistency { name: String, detail: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
