use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Structural problems in input data: bad indices, degenerate triangles,
    /// inverted layout triangles, malformed seams, and the like.
    #[error("invalid {what}: {detail}")]
    Invalid { what: &'static str, detail: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: std::path::PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error in {path}: {detail}")]
    Parse {
        path: std::path::PathBuf,
        detail: String,
    },

    #[error("solver failure in {stage}: {detail}")]
    Solver { stage: &'static str, detail: String },

    /// Displaced body stopped approaching the target between outer transfer
    /// iterations. Carries the per-iteration max-gap history (cm).
    #[error("transfer stalled: body-to-target gap not reducing, history {history:?}")]
    TransferStalled { history: Vec<f64> },

    #[error("simulation diverged at layer {layer} substep {substep}: {detail}")]
    SimulationDiverged {
        layer: i32,
        substep: u64,
        detail: String,
    },

    #[error("pipeline stage `{stage}` failed: {source}")]
    Stage {
        stage: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn invalid(what: &'static str, detail: impl Into<String>) -> Self {
        Error::Invalid {
            what,
            detail: detail.into(),
        }
    }

    pub fn io(path: impl Into<std::path::PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn parse(path: impl Into<std::path::PathBuf>, detail: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            detail: detail.into(),
        }
    }

    pub fn solver(stage: &'static str, detail: impl Into<String>) -> Self {
        Error::Solver {
            stage,
            detail: detail.into(),
        }
    }

    pub fn in_stage(self, stage: impl Into<String>) -> Self {
        Error::Stage {
            stage: stage.into(),
            source: Box::new(self),
        }
    }
}
