use std::path::PathBuf;

/// Errors raised by the library.
#[derive(Debug, thiserror::Error)]
pub enum MubError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("length {0} is not a perfect square")]
    NotPerfectSquare(usize),

    #[error("{what} is not Hermitian: entries ({p},{q}) and ({q},{p}) differ by {residual:e}")]
    NotHermitian {
        what: &'static str,
        p: usize,
        q: usize,
        residual: f64,
    },

    #[error("non-finite value at position {0}")]
    NonFinite(usize),

    #[error("state vector is not normalized: |norm^2 - 1| = {0:e}")]
    NotNormalized(f64),

    #[error("index {name} = {value} out of range 0..{bound}")]
    IndexOutOfRange {
        name: &'static str,
        value: i64,
        bound: i64,
    },

    #[error("Proposition 3 requires prime d (got d = {0})")]
    NotPrime(i64),

    #[error("basis labels must differ (a = b = {0})")]
    SameBasis(i64),

    #[error("invalid Gauss sum parameters (u={u}, v={v}, w={w}): {}", .violations.join("; "))]
    InvalidGaussParams {
        u: i64,
        v: i64,
        w: i64,
        violations: Vec<String>,
    },

    #[error("zero-norm vector")]
    ZeroNorm,

    #[error("empty family")]
    EmptyFamily,

    #[error("Jacobi iteration did not converge in {sweeps} sweeps (off-diagonal mass {off_diagonal:e})")]
    NoConvergence { sweeps: usize, off_diagonal: f64 },

    #[error("degenerate top eigenvalue: gap {gap:e} below tolerance {tol:e}")]
    DegenerateTop { gap: f64, tol: f64 },

    #[error("not a rank-1 projector: {0}")]
    NotRankOne(String),

    #[error("projector (a={a}, alpha={alpha}): {source}")]
    AtProjector {
        a: usize,
        alpha: usize,
        #[source]
        source: Box<MubError>,
    },

    #[error("degenerate factor (a={a}, alpha={alpha}): Tr(B^dag B) = {trace:e}")]
    DegenerateFactor { a: usize, alpha: usize, trace: f64 },

    #[error("projector (a={a}, alpha={alpha}) has eigenvalue {eigenvalue:e}; no square root")]
    NegativeEigenvalue {
        a: usize,
        alpha: usize,
        eigenvalue: f64,
    },

    #[error("constructed family failed verification: {0}")]
    UnverifiedConstruction(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid document: {0}")]
    InvalidDocument(String),

    #[error("parse error: {0}")]
    Parse(#[from] serde_json::Error),

    #[error("{}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, MubError>;

impl MubError {
    pub(crate) fn at(self, a: usize, alpha: usize) -> Self {
        MubError::AtProjector {
            a,
            alpha,
            source: Box::new(self),
        }
    }
}
