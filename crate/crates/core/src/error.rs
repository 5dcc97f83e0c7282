use thiserror::Error;

/// Errors raised by the geometric and numerical routines of this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("coordinates are not privileged: term of weighted degree {degree} in component {component}")]
    NotPrivileged { component: usize, degree: i64 },

    #[error("remainder field {generator} does not vanish at the origin")]
    BadCentering { generator: usize },

    #[error("bracket-generating condition not verified up to depth {0}")]
    HormanderUndecided(usize),

    #[error("vector is not horizontal (least-squares residual {residual:e}{})", .time.map(|t| format!(" at t = {t}")).unwrap_or_default())]
    NotHorizontal { residual: f64, time: Option<f64> },

    #[error("could not extend the horizontal frame to a nondegenerate local frame")]
    FrameExtensionFailed,

    #[error("trajectory left the coordinate box |x| <= {bound} at t = {time}")]
    DomainEscape { bound: f64, time: f64 },

    #[error("covector has zero Hamiltonian, geodesic is trivial")]
    DegenerateCovector,

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("time window [0, {window}] exceeds the rescaled curve domain [0, {available}]")]
    Window { window: f64, available: f64 },

    #[error("lift base point mismatch: |pi(g0) - gamma(0)| = {0:e}")]
    LiftBase(f64),

    #[error("metric is too close to singular for the curvature oracle (eigenvalue ratio {0:e})")]
    OracleConditioning(f64),

    #[error("parameter gate failed after {0} iterations")]
    GateFailed(usize),

    #[error("estimate failed: {0}")]
    EstimateFailed(String),

    #[error("density must be positive on the support (index {0})")]
    Density(usize),

    #[error("transport plan: {0}")]
    Plan(String),

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("optimizer did not converge: {0}")]
    NonConvergence(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::Dimension { expected, got })
    }
}
