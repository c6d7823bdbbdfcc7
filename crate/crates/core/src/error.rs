use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("evaluation error in `{context}`: {message}")]
    Eval { context: String, message: String },
    #[error("model error: {0}")]
    Model(String),
    #[error("elapse of {delay} is ill-defined: `{transition}` has date {date}")]
    IllDefinedElapse {
        transition: String,
        delay: String,
        date: String,
    },
    #[error("transition `{0}` has no latest date (unbounded interval)")]
    UnboundedLatest(String),
    #[error("cannot fire `{0}`: {1}")]
    NotFirable(String, String),
    #[error("unbounded maximization over a non-affine fickle function in `{0}`")]
    UnsupportedUnboundedMax(String),
    #[error("fickle expression `{0}` is not linear in theta and not flagged monotone")]
    NonLinearTheta(String),
    #[error("domain mismatch: {0}")]
    DomainMismatch(String),
    #[error("net is not weak: {0}")]
    NotWeak(String),
    #[error("more than {cap} reachable configurations")]
    OverCap { cap: usize },
    #[error("malformed expanded state: {0}")]
    MalformedExpandedState(String),
    #[error("internal error: {0}")]
    Internal(String),
    #[error("{0}")]
    Parse(#[from] crate::io::ParseErrors),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn eval(context: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Eval {
            context: context.into(),
            message: message.into(),
        }
    }
}
