use thiserror::Error;

/// Errors surfaced by graph loading, training and attack construction.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at {path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },

    #[error("node index {index} out of range for graph with {num_nodes} nodes")]
    NodeIndex { index: usize, num_nodes: usize },

    #[error("label {label} out of range for {num_labels} labels")]
    Label { label: usize, num_labels: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("training diverged at epoch {epoch} (loss {loss})")]
    Training { epoch: usize, loss: f64 },

    #[error("perturbation invariant violated: {0}")]
    Perturbation(String),

    #[error("contract violated: {0}")]
    Contract(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
