use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid property table: {0}")]
    InvalidTable(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("mesh error: {0}")]
    Mesh(String),

    #[error("activation error: {0}")]
    Activation(String),

    #[error("schedule error: {0}")]
    Schedule(String),

    #[error("singular wall system: {0}")]
    SingularWall(String),

    #[error("linear solver did not converge after {iterations} iterations (relative residual {residual:.3e})")]
    CgNotConverged { iterations: usize, residual: f64 },

    #[error("Picard iteration did not converge after {iterations} iterations (relative change {change:.3e})")]
    PicardNotConverged { iterations: usize, change: f64 },

    #[error("non-positive diagonal in system row {row}: {value}")]
    NotSpd { row: usize, value: f64 },

    #[error("step {step} (t = {time} s): {source}")]
    Step {
        step: usize,
        time: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error("metrics error: {0}")]
    Metrics(String),

    #[error("calibration error: {0}")]
    Calibration(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn at_step(self, step: usize, time: f64) -> Self {
        Error::Step {
            step,
            time,
            source: Box::new(self),
        }
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}
