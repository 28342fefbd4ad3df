//! Institutional-grammar extraction and longitudinal change metrics for
//! version-controlled governance documents.
//!
//! The pipeline runs ingest → normalize → parse → label → metrics → infer →
//! report; each stage is a module with pure functions plus JSON Lines / CSV
//! record types so stages can also be driven one at a time from the CLI.

pub mod error;
pub mod exec;
pub mod ig;
pub mod inference;
pub mod ingest;
pub mod io;
pub mod metrics;
pub mod normalize;
pub mod reliability;
pub mod report;
pub mod rng;
pub mod taxonomy;
pub mod text;

pub use error::{Error, Result};
pub use exec::Execution;
pub use ig::{InstitutionalStatement, Parser, Snapshot};
pub use metrics::{CategoryDistribution, Feature, RepoMetrics};
pub use report::{run_pipeline, RunConfig};
pub use taxonomy::{ActionCategory, LabeledStatement, Lexicons, RoleCategory};
