use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grammar: {0}")]
    InvalidGrammar(String),
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("wrong distribution variant: {0}")]
    WrongVariant(&'static str),
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("mapping error: no configuration for symbol {0:?}")]
    UnknownSymbol(char),
    #[error("infeasible request: {0}")]
    Infeasible(String),
    #[error("metric undefined: {0}")]
    UndefinedMetric(String),
    #[error("fit failed: {0}")]
    Fit(String),
    #[error("unknown experiment {0:?}")]
    UnknownExperiment(String),
    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
