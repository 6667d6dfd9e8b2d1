//! Reproducible experiment drivers behind the command-line tool: random
//! instance blocks, table rendering, speed calibration and the validation
//! suite.

pub mod blocks;
pub mod calibrate;
pub mod random;
pub mod report;
pub mod solve;
pub mod validate;

pub use blocks::{BlockId, BlockResult, BlockSummary, ExperimentBlock, ResultRow};
pub use calibrate::{calibrate, CalibrationReport};
pub use solve::{solve, SolveReport};
pub use validate::{run_validation, CheckResult, ValidateOptions, ValidationReport};
