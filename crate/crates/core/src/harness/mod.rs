//! Experiment harness: seeded families, suites of ratio checks, and report I/O.

pub mod config;
pub mod family;
pub mod report;
pub mod suites;

pub use config::HarnessConfig;
pub use family::{FamilyKind, Member};
pub use report::{BandSummary, Claim, RatioReport, Record, Status};
pub use suites::{run, run_suite, Suite};
