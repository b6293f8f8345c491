use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("chart point t={t} lies outside [{t_min}, {t_max}]")]
    Domain { t: f64, t_min: f64, t_max: f64 },

    #[error("surface has no boundary component {0}")]
    UnknownComponent(usize),

    #[error("invalid surface: {0}")]
    InvalidSurface(String),

    #[error("glue rule misuse: {0}")]
    Glue(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("configuration: {0}")]
    Config(String),

    #[error("numerical failure: {0}")]
    Numeric(String),

    #[error("tables are not comparable: {0}")]
    Incomparable(String),

    #[error("polyline contract violated: {0}")]
    Polyline(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("grid node {node} failed: {source}")]
    Node {
        node: String,
        #[source]
        source: Box<Error>,
    },

    #[error("malformed lens table: {0}")]
    Format(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
