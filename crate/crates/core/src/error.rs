use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("rotation axis is not a unit vector (norm {0})")]
    NonUnitAxis(f64),
    #[error("geodesic endpoints are antipodal")]
    AntipodalGeodesic,
    #[error("trace mismatch: {left} vs {right}")]
    TraceMismatch { left: f64, right: f64 },
    #[error("elements are not conjugate (exactly one is central)")]
    NotConjugate,
    #[error("value {value} outside admissible range [{min}, {max}]")]
    OutOfRange { value: f64, min: f64, max: f64 },
    #[error("word contains tau but the representation has no T coordinate")]
    MissingTau,
    #[error("projection did not converge: best residual {best:e} after {iterations} iterations")]
    NotConverged { best: f64, iterations: usize },
    #[error("no intertwiner: best residual {gap:e}")]
    NoIntertwiner { gap: f64 },
    #[error("continuation failed in {stage} at t = {t}")]
    ContinuationFailed { stage: String, t: f64 },
    #[error("residual {residual:e} exceeds tolerance {tol:e}")]
    ResidualTooLarge { residual: f64, tol: f64 },
    #[error("label {label} is not valid for n = {n}")]
    LabelOutOfRange { label: String, n: i64 },
    #[error("label mismatch: {left} vs {right}")]
    LabelMismatch { left: String, right: String },
    #[error("point cannot be classified: {0}")]
    Unclassifiable(String),
    #[error("bisection budget exhausted at depth {depth}")]
    BudgetExhausted { depth: usize },
    #[error("parse error: {0}")]
    Parse(String),
}
