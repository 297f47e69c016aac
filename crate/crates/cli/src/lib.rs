//! Command-line front end for NetLines: dataset ingestion, training,
//! prediction, evaluation protocols and model files.

pub mod commands;
pub mod error;
pub mod model;
pub mod protocol;
pub mod report;
pub mod train;

pub use error::{CliError, CliResult};
pub use model::{BinaryModel, Classifier, ModelFile};
pub use report::{EvalReport, RunRecord};
pub use train::{fit, Mode, TrainLog, TrainOptions};
