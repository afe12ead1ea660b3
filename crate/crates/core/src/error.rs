use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid knot data: {0}")]
    InvalidKnots(String),
    #[error("invalid space parameters: {0}")]
    InvalidSpace(String),
    #[error("parameter {0} outside [0,1]")]
    OutOfDomain(f64),
    #[error("degenerate geometry: det J = {det} at ({z1}, {z2})")]
    DegenerateGeometry { det: f64, z1: f64, z2: f64 },
    #[error("geometry inversion did not converge for point ({0}, {1})")]
    InversionFailed(f64, f64),
    #[error("non-conforming patch interface: {0}")]
    Conformity(String),
    #[error("invalid boundary specification: {0}")]
    Boundary(String),
    #[error("singular system: {0}")]
    Singular(String),
    #[error("problem too large: {0}")]
    Budget(String),
    #[error("unknown case `{0}`")]
    UnknownCase(String),
    #[error("unsupported configuration: {0}")]
    Unsupported(String),
    #[error("i/o: {0}")]
    Io(String),
    #[error("parse: {0}")]
    Parse(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
