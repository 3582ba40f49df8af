pub mod dataio;
pub mod dataset;
pub mod error;
pub mod exec;
pub mod fractal;
pub mod harness;
pub mod knn;
pub mod lfwa;
pub mod select;

pub use dataset::Dataset;
pub use error::{Error, Result};
pub use exec::Execution;
