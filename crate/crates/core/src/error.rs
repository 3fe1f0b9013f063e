use thiserror::Error;

/// Error type shared by all modules of the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// A problem structure violates one of its invariants.
    #[error("invalid problem structure: {0}")]
    Structure(String),

    /// An adjacency or transition matrix violates one of its invariants.
    #[error("invalid matrix: {0}")]
    Matrix(String),

    /// A preset id that the library does not know.
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    /// Malformed graph input (edge list or label file).
    #[error("graph input: {0}")]
    Graph(String),

    /// Invalid encoder, dynamics or experiment configuration.
    #[error("invalid config: {0}")]
    Config(String),

    /// Predicted and truth labelings have different lengths.
    #[error("label length mismatch: predicted {predicted}, truth {truth}")]
    LabelLength { predicted: usize, truth: usize },

    /// Malformed artifact file (map CSV, dendrogram text, results JSON).
    #[error("artifact parse: {0}")]
    Artifact(String),

    /// A trial failed; carries the trial index for multi-trial runs.
    #[error("trial {trial}: {source}")]
    Trial {
        trial: u32,
        #[source]
        source: Box<Error>,
    },

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
