//! Loading datasets and manuscript-extracted statistics.

mod dataset;
mod report;
mod stats;

pub use dataset::{load_csv, read_csv, Column, CsvOptions, DatasetMatrix};
pub use report::{load_report, parse_report, ReportedStats};
pub use stats::{compute_stats, ComputedStats, Slope, DEFAULT_PAIR_CAP};
