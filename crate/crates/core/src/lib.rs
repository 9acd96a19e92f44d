//! Data readiness reports for structured datasets.
//!
//! The library ingests delimited text files into typed, content-addressed
//! datasets, profiles them, scores eight quality dimensions with evidence
//! and recommendations, applies declarative remediation plans, records every
//! operation in a hash-chained lineage ledger, and assembles the whole story
//! into a nine-section readiness report (JSON, Markdown, or HTML).
//!
//! Start with the runnable examples:
//!
//! - `profile_basics` — ingest a file and inspect its profile
//! - `quality_assessment` — score the eight quality dimensions
//! - `remediation_plan` — parse and apply a remediation plan
//! - `lineage_audit` — verify and replay a tamper-evident ledger
//! - `full_report` — produce a complete readiness report
//! - `report_diff` — compare two report runs
//!
//! A thin `readiness` binary exposes the same pipeline as subcommands.

pub mod canonical_json;
pub mod cli;
pub mod dataset;
pub mod knn;
pub mod lineage;
pub mod profile;
pub mod quality;
pub mod remediate;
pub mod report;
pub mod settings;
pub mod stats;
pub mod synth;

pub use dataset::{
    canonical_bytes, canonical_hash, load_dataset, write_dataset, Cell, Column, Dataset,
    DatasetError, Digest, IngestConfig, Role, TypeOverride, ValueType,
};
pub use lineage::{LineageEntry, LineageError, LineageLedger, Operation, OperationDetail};
pub use profile::{profile_dataset, DataProfile};
pub use quality::{
    assess, AssessConfig, AssessError, Dimension, QualityAssessment, QualityFinding,
    Recommendation,
};
pub use remediate::{
    apply_plan, apply_step, parse_plan, Actor, ApplyError, ChangeSummary, Persona, PlanError,
    RemediationPlan, RemediationStep, StepAction, StepError,
};
pub use report::{
    build_report, diff_reports, load_sidecar, render_diff_markdown, render_html, render_markdown,
    ReadinessReport, ReportDiff, ReportError, ReportInputs, Sidecar, UpdatedInputs,
};
pub use settings::{load_settings, Settings, SettingsError};

/// Name recorded in reports and ledger entries.
pub const TOOL_NAME: &str = env!("CARGO_PKG_NAME");
/// Version recorded in reports and ledger entries.
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
