use alloc::string::String;

/// Errors raised by body construction, quadrature and the transform pipeline.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("expected a unit vector, got norm {norm}")]
    NonUnit { norm: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid body descriptor: {field}: {reason}")]
    InvalidBody { field: String, reason: String },

    #[error("linear map is singular (|det| = {det:e})")]
    SingularMap { det: f64 },

    #[error("integrand is not finite at node {node} ({value})")]
    NonFinite { node: usize, value: f64 },

    #[error("radial function {value:e} at node {node} is too small to invert")]
    DivisionBlowUp { node: usize, value: f64 },

    #[error("body {body} was built on rule {built}, refusing to combine with rule {requested}")]
    MixedRules {
        body: String,
        built: String,
        requested: String,
    },

    #[error("body has zero volume")]
    ZeroVolume,

    #[error("operation requires a convex body, got {0}")]
    NotConvex(String),

    #[error("operation requires a cylinder set, got {0}")]
    NotCylindrical(String),

    #[error("point is not on the boundary (distance {distance:e})")]
    NotOnBoundary { distance: f64 },

    #[error("rule {kind} is not available in dimension {dim}")]
    UnsupportedRule { kind: &'static str, dim: usize },

    #[error("cannot parse rule spec {0:?}")]
    RuleSpec(String),

    #[error("sampler acceptance rate {rate:e} is below the 1e-3 floor")]
    LowAcceptance { rate: f64 },
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
