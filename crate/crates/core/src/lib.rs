//! Change-point analysis of monthly civic complaint series against
//! legislative activity.

pub mod cli;
pub mod error;
pub mod ingest;
pub mod parallel;
pub mod pipeline;
pub mod report;
pub mod seasonal;
pub mod segmentation;
pub mod stats;
pub mod synth;

pub use error::{Error, Result};
pub use ingest::{CategoryMatrix, MonthSpan, YearMonth};
pub use parallel::Execution;
