//! Declarative remediation plans: parsing, validation, and application.
//!
//! A plan is an ordered list of steps, each a fully parameterized
//! transformation with a rationale and an accountable actor. Plans are
//! documents rather than interactive sessions so that every change to a
//! dataset can be replayed byte-for-byte from the lineage ledger.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::dataset::Digest;

/// A role in the data workflow, recorded on plans, steps, and ledger
/// entries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Persona {
    DataSteward,
    SubjectMatterExpert,
    DataScientist,
    MlEngineer,
    DataGovernanceOfficer,
    Other,
}

impl Persona {
    pub const ALL: [Persona; 6] = [
        Persona::DataSteward,
        Persona::SubjectMatterExpert,
        Persona::DataScientist,
        Persona::MlEngineer,
        Persona::DataGovernanceOfficer,
        Persona::Other,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Persona::DataSteward => "data_steward",
            Persona::SubjectMatterExpert => "subject_matter_expert",
            Persona::DataScientist => "data_scientist",
            Persona::MlEngineer => "ml_engineer",
            Persona::DataGovernanceOfficer => "data_governance_officer",
            Persona::Other => "other",
        }
    }
}

impl fmt::Display for Persona {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Persona {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Persona::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| {
                format!(
                    "unknown persona {s:?} (expected one of: {})",
                    Persona::ALL.map(Persona::name).join(", ")
                )
            })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Actor {
    pub name: String,
    pub persona: Persona,
}

impl Actor {
    pub fn new(name: impl Into<String>, persona: Persona) -> Self {
        Actor {
            name: name.into(),
            persona,
        }
    }

    /// The tool itself, used as the author of machine-generated
    /// recommendations and automatic pipeline entries.
    pub fn tool() -> Self {
        Actor::new(crate::TOOL_NAME, Persona::Other)
    }
}

impl fmt::Display for Actor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({})", self.name, self.persona)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ImputeStrategy {
    Mean,
    Median,
    Mode,
    Constant(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TextTransform {
    Trim,
    Lowercase,
    Map(BTreeMap<String, String>),
}

/// A remediation step's kind and parameters. Sampling kinds carry mandatory
/// seeds so application is deterministic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum StepAction {
    Impute {
        column: String,
        strategy: ImputeStrategy,
    },
    /// Drop rows with a missing cell in any of `columns` (all columns when
    /// absent).
    DropRowsMissing {
        #[serde(skip_serializing_if = "Option::is_none", default)]
        columns: Option<Vec<String>>,
    },
    DropColumn {
        column: String,
    },
    CapOutliers {
        columns: Vec<String>,
        multiplier: f64,
    },
    DropOutlierRows {
        columns: Vec<String>,
        multiplier: f64,
    },
    Oversample {
        ratio: f64,
        seed: u64,
    },
    Undersample {
        ratio: f64,
        seed: u64,
    },
    Dedupe,
    NormalizeValues {
        column: String,
        transforms: Vec<TextTransform>,
    },
    DropFlaggedLabels {
        k: usize,
        threshold: f64,
    },
}

impl StepAction {
    pub fn kind(&self) -> &'static str {
        match self {
            StepAction::Impute { .. } => "impute",
            StepAction::DropRowsMissing { .. } => "drop_rows_missing",
            StepAction::DropColumn { .. } => "drop_column",
            StepAction::CapOutliers { .. } => "cap_outliers",
            StepAction::DropOutlierRows { .. } => "drop_outlier_rows",
            StepAction::Oversample { .. } => "oversample",
            StepAction::Undersample { .. } => "undersample",
            StepAction::Dedupe => "dedupe",
            StepAction::NormalizeValues { .. } => "normalize_values",
            StepAction::DropFlaggedLabels { .. } => "drop_flagged_labels",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RemediationStep {
    #[serde(flatten)]
    pub action: StepAction,
    pub rationale: String,
    pub actor: Actor,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RemediationPlan {
    pub plan_id: String,
    pub actor: Actor,
    pub created_at: DateTime<Utc>,
    pub steps: Vec<RemediationStep>,
}

/// Exact effect of one applied step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChangeSummary {
    pub step_kind: String,
    pub rows_before: u64,
    pub rows_after: u64,
    pub columns_before: u64,
    pub columns_after: u64,
    /// Cells whose value changed in place (imputations, caps, normalized
    /// tokens). Row additions/removals are visible in the row counts.
    pub cells_modified: u64,
    pub input_digest: Digest,
    pub output_digest: Digest,
}

#[derive(Debug, thiserror::Error)]
pub enum PlanError {
    #[error("plan syntax error: {0}")]
    Syntax(String),
    #[error("{0}")]
    Invalid(String),
    #[error("step {index}: unknown step kind {kind:?}")]
    UnknownStepKind { index: usize, kind: String },
    #[error("step {index} ({kind}): missing parameter {name:?}")]
    MissingParameter {
        index: usize,
        kind: String,
        name: String,
    },
    #[error("step {index} ({kind}): invalid parameter {name:?}: {message}")]
    InvalidParameterValue {
        index: usize,
        kind: String,
        name: String,
        message: String,
    },
}

mod parse;
pub use parse::parse_plan;

pub(crate) mod apply;
pub use apply::{apply_plan, apply_step, ApplyError, StepError};
