//! Desk-scale reproduction of the login study: password and device
//! variants, measured from trigger to verdict.

mod plan;
mod report;
mod run;
pub mod schedule;

pub use plan::{Sampling, StudyPlan, VariantPlan};
pub use report::{emit_report, parse_structured, structured_report, text_table, ReportFormat};
pub use run::{run_study, BenchError, ClockMode, RunOptions, RunSummary, Transport, VariantSummary};
