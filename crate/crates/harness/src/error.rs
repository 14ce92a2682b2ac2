use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("manifest error: {0}")]
    Manifest(String),

    #[error("{theorem} cross-check needs the {artifact} analysis in the manifest")]
    MissingArtifact { theorem: &'static str, artifact: &'static str },

    #[error(transparent)]
    Core(#[from] chainlab_core::Error),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, HarnessError>;
