use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Two patches overlap, or a generator could not place every patch.
    #[error("infeasible layout: {0}")]
    InfeasibleLayout(String),

    #[error("singular geometry: {0}")]
    SingularGeometry(String),

    /// The truncated capacitance expansion produced a value outside `(0, r_R)`.
    #[error("capacitance expansion out of range: G_p = {g_p} um is not in (0, {r_r}) um")]
    ExpansionOutOfRange { g_p: f64, r_r: f64 },

    /// `zeta(w)` is too close to zero and the neighbouring rates used for
    /// extrapolation are too; perturb `w` and retry.
    #[error("zeta(w) = {zeta:e} is numerically zero at w = {w}; perturb w")]
    NearSingularZeta { w: f64, zeta: f64 },

    #[error("parse error at line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("trend check failed: {0}")]
    TrendViolation(String),
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
