//! Stepwise covariate selection in which a covariate enters only if it beats
//! independent Gaussian-noise covariates.

pub mod distfn;
pub mod error;
pub mod glm;
pub mod ingest;
mod index_serde;
pub mod linalg;
pub mod parallel;
pub mod robust;
pub mod select;
pub mod sim;

pub use error::{Error, Result};
pub use linalg::Dataset;
pub use parallel::Workers;
pub use select::{SelectionTrace, SelectorConfig};
