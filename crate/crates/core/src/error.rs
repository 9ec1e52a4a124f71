use thiserror::Error;

use crate::dp::DpError;
use crate::graphs::DecompositionError;
use crate::model::instance::InstanceError;
use crate::model::ModelError;

/// Any failure surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error(transparent)]
    Decomposition(#[from] DecompositionError),
    #[error(transparent)]
    Dp(#[from] DpError),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}
