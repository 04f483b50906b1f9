//! Rule-based code smell detection for indentation-delimited (Python-style)
//! source trees.
//!
//! The pipeline runs in fixed stages: discover and sanitize files
//! ([`ingest`]), model lines and blocks ([`line_model`]), apply the smell
//! rules ([`detectors`]), then aggregate and serialize ([`report`]).

pub mod cli;
pub mod config;
pub mod detectors;
pub mod error;
pub mod ingest;
pub mod line_model;
pub mod pipeline;
pub mod report;

pub use config::{DuplicateScope, Normalization, ScanConfig, Thresholds};
pub use detectors::{SmellFinding, SmellKind};
pub use error::{ConfigError, ReportError, ScanError};
pub use pipeline::{scan, ScanResult};
