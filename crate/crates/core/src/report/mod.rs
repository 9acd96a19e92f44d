//! Readiness report assembly: nine fixed sections combining metadata,
//! profiles, assessments, lineage, and governance into one reviewable
//! document, serializable as JSON and renderable as Markdown or HTML.

use std::collections::BTreeMap;
use std::path::Path;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, Digest};
use crate::lineage::{LineageEntry, LineageError, LineageLedger, OperationDetail};
use crate::profile::DataProfile;
use crate::quality::{Dimension, QualityAssessment};
use crate::remediate::Actor;

mod render;
mod sidecar;

pub use render::{render_diff_markdown, render_html, render_markdown};
pub use sidecar::{load_sidecar, parse_sidecar, Sidecar, SidecarError, SidecarGovernance};

/// Version of the report JSON layout.
pub const SCHEMA_VERSION: &str = "1.0.0";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToolInfo {
    pub name: String,
    pub version: String,
}

impl ToolInfo {
    pub fn current() -> Self {
        ToolInfo {
            name: crate::TOOL_NAME.to_string(),
            version: crate::TOOL_VERSION.to_string(),
        }
    }
}

/// Section 1: identity and context of the dataset under review.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasicMetadata {
    pub dataset_name: String,
    pub source_path: String,
    pub data_type: String,
    pub version_label: String,
    pub dataset_digest: Digest,
    pub row_count: u64,
    pub column_count: u64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub updated_version_label: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub updated_digest: Option<Digest>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub updated_row_count: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub updated_column_count: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub description: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub owner: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub license: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub collection_process: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub intended_use: Option<String>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty", default)]
    pub custom: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionSummary {
    pub dimension: Dimension,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub baseline_score: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub updated_score: Option<f64>,
    /// `updated - baseline`, when both are defined.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub delta: Option<f64>,
}

/// Section 2: the whole story in one screen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub baseline_overall_score: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub updated_overall_score: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub overall_delta: Option<f64>,
    pub remediation_step_count: u64,
    pub dimensions: Vec<DimensionSummary>,
    pub headline: String,
}

/// Section 7: the verified operation history.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineageSection {
    pub ledger_path: String,
    /// Always true in a built report; building fails on a broken chain.
    pub verified: bool,
    pub entries: Vec<LineageEntry>,
}

/// Section 8: accountability and regulatory context.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataGovernance {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub steward: Option<String>,
    pub regulations: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub contains_personal_data: Option<bool>,
    pub protected_attributes: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub notes: Option<String>,
    /// Every distinct actor on the ledger, in order of first appearance.
    pub actors: Vec<Actor>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReference {
    pub metric_id: String,
    pub dimension: Dimension,
    pub description: String,
}

/// Section 9: what the numbers mean and how they were computed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct References {
    pub metric_catalog: Vec<MetricReference>,
    pub conventions: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReadinessReport {
    pub schema_version: String,
    pub tool: ToolInfo,
    pub generated_at: DateTime<Utc>,
    pub basic_metadata: BasicMetadata,
    pub summary: Summary,
    pub baseline_profile: DataProfile,
    pub baseline_assessment: QualityAssessment,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub updated_profile: Option<DataProfile>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub updated_assessment: Option<QualityAssessment>,
    pub lineage: LineageSection,
    pub governance: DataGovernance,
    pub references: References,
}

impl ReadinessReport {
    /// The assessment describing the dataset as it stands now.
    pub fn final_assessment(&self) -> &QualityAssessment {
        self.updated_assessment.as_ref().unwrap_or(&self.baseline_assessment)
    }

    pub fn final_profile(&self) -> &DataProfile {
        self.updated_profile.as_ref().unwrap_or(&self.baseline_profile)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error("{stage} digest {found} does not match the dataset digest {expected}")]
    StaleInput {
        stage: &'static str,
        expected: Digest,
        found: Digest,
    },
    #[error("ledger begins at digest {found}, but the baseline dataset digest is {expected}")]
    LedgerBaselineMismatch { expected: Digest, found: Digest },
    #[error("updated dataset digest {found} does not match the ledger's final output {expected}")]
    UpdatedMismatch { expected: Digest, found: Digest },
    #[error("ledger records remediation ending at digest {expected}, but no updated dataset was supplied")]
    MissingUpdated { expected: Digest },
    #[error(transparent)]
    Lineage(#[from] LineageError),
}

/// Everything a report is assembled from. Digests must be mutually
/// consistent; [`build_report`] refuses to assemble a report that tells a
/// story the artifacts do not support.
pub struct ReportInputs<'a> {
    pub baseline: &'a Dataset,
    pub baseline_profile: &'a DataProfile,
    pub baseline_assessment: &'a QualityAssessment,
    pub updated: Option<UpdatedInputs<'a>>,
    pub ledger: &'a LineageLedger,
    pub sidecar: Option<&'a Sidecar>,
    pub generated_at: DateTime<Utc>,
}

pub struct UpdatedInputs<'a> {
    pub dataset: &'a Dataset,
    pub profile: &'a DataProfile,
    pub assessment: &'a QualityAssessment,
}

pub fn build_report(inputs: ReportInputs<'_>) -> Result<ReadinessReport, ReportError> {
    let baseline_digest = inputs.baseline.digest();
    check_digest(
        "baseline profile",
        baseline_digest,
        inputs.baseline_profile.dataset_digest,
    )?;
    check_digest(
        "baseline assessment",
        baseline_digest,
        inputs.baseline_assessment.dataset_digest,
    )?;
    if let Some(updated) = &inputs.updated {
        let updated_digest = updated.dataset.digest();
        check_digest("updated profile", updated_digest, updated.profile.dataset_digest)?;
        check_digest(
            "updated assessment",
            updated_digest,
            updated.assessment.dataset_digest,
        )?;
    }

    let entries = inputs.ledger.verify()?;
    if let Some(first) = entries.first() {
        if first.input_digest != baseline_digest {
            return Err(ReportError::LedgerBaselineMismatch {
                expected: baseline_digest,
                found: first.input_digest,
            });
        }
    }
    // Walking the remediation entries from the baseline must land exactly on
    // the updated dataset (or back on the baseline when nothing was applied).
    let final_output = entries
        .iter()
        .filter(|e| matches!(e.operation_detail, OperationDetail::RemediationStep { .. }))
        .next_back()
        .map_or(baseline_digest, |e| e.output_digest);
    match &inputs.updated {
        Some(updated) => {
            if updated.dataset.digest() != final_output {
                return Err(ReportError::UpdatedMismatch {
                    expected: final_output,
                    found: updated.dataset.digest(),
                });
            }
        }
        None => {
            if final_output != baseline_digest {
                return Err(ReportError::MissingUpdated {
                    expected: final_output,
                });
            }
        }
    }

    let sidecar = inputs.sidecar.cloned().unwrap_or_default();
    let basic_metadata = basic_metadata(&inputs, &sidecar);
    let summary = summarize(&inputs, &entries);
    let governance = governance(&inputs, &sidecar, &entries);

    Ok(ReadinessReport {
        schema_version: SCHEMA_VERSION.to_string(),
        tool: ToolInfo::current(),
        generated_at: inputs.generated_at,
        basic_metadata,
        summary,
        baseline_profile: inputs.baseline_profile.clone(),
        baseline_assessment: inputs.baseline_assessment.clone(),
        updated_profile: inputs.updated.as_ref().map(|u| u.profile.clone()),
        updated_assessment: inputs.updated.as_ref().map(|u| u.assessment.clone()),
        lineage: LineageSection {
            ledger_path: inputs.ledger.path().display().to_string(),
            verified: true,
            entries,
        },
        governance,
        references: references(),
    })
}

fn check_digest(stage: &'static str, expected: Digest, found: Digest) -> Result<(), ReportError> {
    if expected != found {
        return Err(ReportError::StaleInput {
            stage,
            expected,
            found,
        });
    }
    Ok(())
}

fn basic_metadata(inputs: &ReportInputs<'_>, sidecar: &Sidecar) -> BasicMetadata {
    let source_path = inputs.baseline.source_path().to_string();
    let dataset_name = sidecar.name.clone().unwrap_or_else(|| {
        Path::new(&source_path)
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| source_path.clone())
    });
    BasicMetadata {
        dataset_name,
        source_path,
        data_type: "structured".to_string(),
        version_label: inputs.baseline.version_label().to_string(),
        dataset_digest: inputs.baseline.digest(),
        row_count: inputs.baseline.row_count() as u64,
        column_count: inputs.baseline.column_count() as u64,
        updated_version_label: inputs
            .updated
            .as_ref()
            .map(|u| u.dataset.version_label().to_string()),
        updated_digest: inputs.updated.as_ref().map(|u| u.dataset.digest()),
        updated_row_count: inputs.updated.as_ref().map(|u| u.dataset.row_count() as u64),
        updated_column_count: inputs
            .updated
            .as_ref()
            .map(|u| u.dataset.column_count() as u64),
        description: sidecar.description.clone(),
        owner: sidecar.owner.clone(),
        license: sidecar.license.clone(),
        collection_process: sidecar.collection_process.clone(),
        intended_use: sidecar.intended_use.clone(),
        custom: sidecar.custom.clone(),
    }
}

fn score_of(assessment: &QualityAssessment, dimension: Dimension) -> Option<f64> {
    assessment.finding(dimension).and_then(|f| f.score)
}

fn summarize(inputs: &ReportInputs<'_>, entries: &[LineageEntry]) -> Summary {
    let baseline = inputs.baseline_assessment;
    let updated = inputs.updated.as_ref().map(|u| u.assessment);
    let remediation_step_count = entries
        .iter()
        .filter(|e| matches!(e.operation_detail, OperationDetail::RemediationStep { .. }))
        .count() as u64;

    let mut dimensions = Vec::new();
    for dimension in Dimension::ALL {
        let baseline_score = score_of(baseline, dimension);
        let updated_score = updated.and_then(|a| score_of(a, dimension));
        if baseline.finding(dimension).is_none()
            && updated.map_or(true, |a| a.finding(dimension).is_none())
        {
            continue;
        }
        let delta = match (baseline_score, updated_score) {
            (Some(b), Some(u)) => Some(u - b),
            _ => None,
        };
        dimensions.push(DimensionSummary {
            dimension,
            baseline_score,
            updated_score,
            delta,
        });
    }

    let baseline_overall_score = baseline.overall_score;
    let updated_overall_score = updated.and_then(|a| a.overall_score);
    let overall_delta = match (baseline_overall_score, updated_overall_score) {
        (Some(b), Some(u)) => Some(u - b),
        _ => None,
    };
    let headline = match (baseline_overall_score, updated_overall_score) {
        (Some(b), Some(u)) => format!(
            "Overall readiness {} from {b:.4} to {u:.4} after {remediation_step_count} remediation steps.",
            if u >= b { "improved" } else { "declined" },
        ),
        (Some(b), None) => format!(
            "Overall readiness is {b:.4}; no remediation has been applied."
        ),
        _ => "No quality dimension was applicable to this dataset.".to_string(),
    };

    Summary {
        baseline_overall_score,
        updated_overall_score,
        overall_delta,
        remediation_step_count,
        dimensions,
        headline,
    }
}

fn governance(
    inputs: &ReportInputs<'_>,
    sidecar: &Sidecar,
    entries: &[LineageEntry],
) -> DataGovernance {
    let mut actors: Vec<Actor> = Vec::new();
    for entry in entries {
        if !actors.contains(&entry.actor) {
            actors.push(entry.actor.clone());
        }
    }
    let mut protected_attributes = sidecar.governance.protected_attributes.clone();
    if let Some(column) = inputs.baseline.protected_column() {
        if !protected_attributes.contains(&column.name) {
            protected_attributes.push(column.name.clone());
        }
    }
    DataGovernance {
        steward: sidecar.governance.steward.clone(),
        regulations: sidecar.governance.regulations.clone(),
        contains_personal_data: sidecar.governance.contains_personal_data,
        protected_attributes,
        notes: sidecar.governance.notes.clone(),
        actors,
    }
}

fn references() -> References {
    let descriptions: [(Dimension, &str); 8] = [
        (
            Dimension::MissingValues,
            "1 minus the fraction of missing cells across feature and target columns.",
        ),
        (
            Dimension::Outliers,
            "1 minus the fraction of numeric feature values outside the Tukey fences (quartiles via the type-7 rule).",
        ),
        (
            Dimension::ClassImbalance,
            "Shannon entropy of the target class counts, normalized so a balanced target scores 1.",
        ),
        (
            Dimension::LabelNoise,
            "1 minus the fraction of labeled rows whose k nearest labeled neighbors (squared Euclidean distance over min-max scaled numeric features) mostly disagree with the row's label.",
        ),
        (
            Dimension::Correlation,
            "1 minus the fraction of measurable column pairs whose association (Pearson r for numeric pairs, Cramer's V for categorical pairs) meets the configured threshold.",
        ),
        (
            Dimension::DataHomogeneity,
            "Mean over feature and target columns of the fraction of present values that parse as the column's declared type.",
        ),
        (
            Dimension::Duplicates,
            "1 minus the fraction of rows that exactly duplicate an earlier row.",
        ),
        (
            Dimension::DataBias,
            "Disparate impact: the minimum over protected groups of the favorable-outcome rate divided by the maximum, judged against the four-fifths rule.",
        ),
    ];
    References {
        metric_catalog: descriptions
            .into_iter()
            .map(|(dimension, description)| MetricReference {
                metric_id: dimension.metric_id().to_string(),
                dimension,
                description: description.to_string(),
            })
            .collect(),
        conventions: vec![
            "Dataset digests are SHA-256 over a canonical CSV serialization: UTF-8, LF line endings, comma delimiter, RFC 4180 quoting only where needed, missing cells as empty fields, reals in shortest round-trip notation.".to_string(),
            "All scores lie in [0, 1]; higher is better. The overall score is the mean of the defined dimension scores.".to_string(),
            "Quantiles use the type-7 (linear interpolation) rule; standard deviations are population standard deviations.".to_string(),
            "The lineage ledger is an append-only JSON Lines file; each entry's hash covers its canonical serialization and chains to the previous entry, so any edit is detectable and the remediation history is replayable.".to_string(),
            "Sampling remediation steps carry explicit seeds; replaying a plan reproduces output datasets digest-for-digest.".to_string(),
        ],
    }
}

/// A compact comparison of two reports' final states. Antisymmetric: swapping
/// the arguments negates every delta.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDiff {
    pub report_a: ReportStamp,
    pub report_b: ReportStamp,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub overall_delta: Option<f64>,
    pub row_count_delta: i64,
    pub column_count_delta: i64,
    pub dimensions: Vec<DimensionDelta>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportStamp {
    pub generated_at: DateTime<Utc>,
    pub version_label: String,
    pub dataset_digest: Digest,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub overall_score: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionDelta {
    pub dimension: Dimension,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub score_a: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub score_b: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub delta: Option<f64>,
}

fn stamp(report: &ReadinessReport) -> ReportStamp {
    let assessment = report.final_assessment();
    ReportStamp {
        generated_at: report.generated_at,
        version_label: assessment.version_label.clone(),
        dataset_digest: assessment.dataset_digest,
        overall_score: assessment.overall_score,
    }
}

/// Compare the final states of two reports (`b` minus `a`).
pub fn diff_reports(a: &ReadinessReport, b: &ReadinessReport) -> ReportDiff {
    let fa = a.final_assessment();
    let fb = b.final_assessment();
    let mut dimensions = Vec::new();
    for dimension in Dimension::ALL {
        if fa.finding(dimension).is_none() && fb.finding(dimension).is_none() {
            continue;
        }
        let score_a = score_of(fa, dimension);
        let score_b = score_of(fb, dimension);
        let delta = match (score_a, score_b) {
            (Some(x), Some(y)) => Some(y - x),
            _ => None,
        };
        dimensions.push(DimensionDelta {
            dimension,
            score_a,
            score_b,
            delta,
        });
    }
    let overall_delta = match (fa.overall_score, fb.overall_score) {
        (Some(x), Some(y)) => Some(y - x),
        _ => None,
    };
    ReportDiff {
        report_a: stamp(a),
        report_b: stamp(b),
        overall_delta,
        row_count_delta: b.final_profile().row_count as i64 - a.final_profile().row_count as i64,
        column_count_delta: b.final_profile().column_count as i64
            - a.final_profile().column_count as i64,
        dimensions,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{Cell, Column, Role, ValueType};
    use crate::lineage::{EntryDraft, Operation};
    use crate::profile::profile_dataset;
    use crate::quality::{assess, AssessConfig};
    use crate::remediate::{apply_plan, Persona, RemediationPlan, RemediationStep, StepAction};

    fn ts() -> DateTime<Utc> {
        DateTime::from_timestamp(1_700_000_000, 0).unwrap()
    }

    fn sample_dataset() -> Dataset {
        let mut values: Vec<Cell> = (0..30).map(|i| Cell::Int(i % 29)).collect();
        values[7] = Cell::Missing;
        let x = Column::new("x", ValueType::Integer, Role::Feature, values);
        let labels: Vec<Cell> = (0..30)
            .map(|i| Cell::Text(if i < 24 { "no".into() } else { "yes".into() }))
            .collect();
        let label = Column::new("label", ValueType::Text, Role::Target, labels);
        Dataset::from_columns(vec![x, label], "data/loans.csv", "baseline").unwrap()
    }

    struct Fixture {
        _dir: tempfile::TempDir,
        ledger: LineageLedger,
        baseline: Dataset,
        baseline_profile: DataProfile,
        baseline_assessment: QualityAssessment,
        updated: Dataset,
        updated_profile: DataProfile,
        updated_assessment: QualityAssessment,
    }

    fn fixture() -> Fixture {
        let dir = tempfile::tempdir().unwrap();
        let ledger = LineageLedger::open(dir.path().join("ledger.jsonl"));
        let baseline = sample_dataset();
        let config = AssessConfig::default();
        let baseline_profile = profile_dataset(&baseline, ts());
        let baseline_assessment = assess(&baseline, &baseline_profile, &config, ts()).unwrap();

        ledger
            .append(EntryDraft {
                timestamp: ts(),
                actor: Actor::tool(),
                operation: Operation::Ingest,
                operation_detail: OperationDetail::Ingest {
                    source_path: baseline.source_path().to_string(),
                    row_count: baseline.row_count() as u64,
                    column_count: baseline.column_count() as u64,
                },
                input_digest: baseline.digest(),
                output_digest: baseline.digest(),
            })
            .unwrap();

        let plan = RemediationPlan {
            plan_id: "p1".to_string(),
            actor: Actor::new("dana", Persona::DataSteward),
            created_at: ts(),
            steps: vec![RemediationStep {
                action: StepAction::Impute {
                    column: "x".to_string(),
                    strategy: crate::remediate::ImputeStrategy::Median,
                },
                rationale: "gaps are random".to_string(),
                actor: Actor::new("dana", Persona::DataSteward),
            }],
        };
        let updated = apply_plan(&baseline, &plan, Some(&ledger), ts())
            .unwrap()
            .with_version_label("remediated");
        let updated_profile = profile_dataset(&updated, ts());
        let updated_assessment = assess(&updated, &updated_profile, &config, ts()).unwrap();
        Fixture {
            _dir: dir,
            ledger,
            baseline,
            baseline_profile,
            baseline_assessment,
            updated,
            updated_profile,
            updated_assessment,
        }
    }

    fn report_from(f: &Fixture, sidecar: Option<&Sidecar>) -> ReadinessReport {
        build_report(ReportInputs {
            baseline: &f.baseline,
            baseline_profile: &f.baseline_profile,
            baseline_assessment: &f.baseline_assessment,
            updated: Some(UpdatedInputs {
                dataset: &f.updated,
                profile: &f.updated_profile,
                assessment: &f.updated_assessment,
            }),
            ledger: &f.ledger,
            sidecar,
            generated_at: ts(),
        })
        .unwrap()
    }

    #[test]
    fn report_assembles_and_round_trips() {
        let f = fixture();
        let sidecar = parse_sidecar(
            "[dataset]\nname = \"loans\"\nowner = \"credit\"\n[governance]\nsteward = \"Dana\"\n",
        )
        .unwrap();
        let report = report_from(&f, Some(&sidecar));

        assert_eq!(report.schema_version, SCHEMA_VERSION);
        assert_eq!(report.basic_metadata.dataset_name, "loans");
        assert_eq!(report.basic_metadata.data_type, "structured");
        assert_eq!(report.basic_metadata.dataset_digest, f.baseline.digest());
        assert_eq!(report.basic_metadata.updated_digest, Some(f.updated.digest()));
        assert_eq!(report.summary.remediation_step_count, 1);
        assert!(report.summary.baseline_overall_score.is_some());
        assert_eq!(report.lineage.entries.len(), 2);
        assert!(report.lineage.verified);
        // dana appears on the ledger after the tool's ingest entry.
        assert_eq!(report.governance.actors.len(), 2);
        assert_eq!(report.governance.steward.as_deref(), Some("Dana"));
        assert_eq!(report.references.metric_catalog.len(), 8);

        let json = serde_json::to_string(&report).unwrap();
        let back: ReadinessReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, report);
    }

    #[test]
    fn dataset_name_falls_back_to_the_file_stem() {
        let f = fixture();
        let report = report_from(&f, None);
        assert_eq!(report.basic_metadata.dataset_name, "loans");
    }

    #[test]
    fn stale_profile_is_rejected() {
        let f = fixture();
        let err = build_report(ReportInputs {
            baseline: &f.baseline,
            baseline_profile: &f.updated_profile, // wrong dataset
            baseline_assessment: &f.baseline_assessment,
            updated: None,
            ledger: &f.ledger,
            sidecar: None,
            generated_at: ts(),
        })
        .unwrap_err();
        assert!(
            matches!(err, ReportError::StaleInput { stage: "baseline profile", .. }),
            "{err:?}"
        );
    }

    #[test]
    fn updated_dataset_must_match_the_ledger_tail() {
        let f = fixture();
        let err = build_report(ReportInputs {
            baseline: &f.baseline,
            baseline_profile: &f.baseline_profile,
            baseline_assessment: &f.baseline_assessment,
            updated: Some(UpdatedInputs {
                // Claiming the baseline is the remediated output contradicts
                // the ledger.
                dataset: &f.baseline,
                profile: &f.baseline_profile,
                assessment: &f.baseline_assessment,
            }),
            ledger: &f.ledger,
            sidecar: None,
            generated_at: ts(),
        })
        .unwrap_err();
        assert!(matches!(err, ReportError::UpdatedMismatch { .. }), "{err:?}");
    }

    #[test]
    fn foreign_ledger_is_rejected() {
        let f = fixture();
        let dir = tempfile::tempdir().unwrap();
        let other = LineageLedger::open(dir.path().join("other.jsonl"));
        other
            .append(EntryDraft {
                timestamp: ts(),
                actor: Actor::tool(),
                operation: Operation::Ingest,
                operation_detail: OperationDetail::Ingest {
                    source_path: "elsewhere.csv".to_string(),
                    row_count: 1,
                    column_count: 1,
                },
                input_digest: Digest([9u8; 32]),
                output_digest: Digest([9u8; 32]),
            })
            .unwrap();
        let err = build_report(ReportInputs {
            baseline: &f.baseline,
            baseline_profile: &f.baseline_profile,
            baseline_assessment: &f.baseline_assessment,
            updated: None,
            ledger: &other,
            sidecar: None,
            generated_at: ts(),
        })
        .unwrap_err();
        assert!(
            matches!(err, ReportError::LedgerBaselineMismatch { .. }),
            "{err:?}"
        );
    }

    #[test]
    fn diff_is_antisymmetric() {
        let f = fixture();
        let with_update = report_from(&f, None);
        let baseline_only = build_report(ReportInputs {
            baseline: &f.baseline,
            baseline_profile: &f.baseline_profile,
            baseline_assessment: &f.baseline_assessment,
            updated: None,
            ledger: &f.ledger,
            sidecar: None,
            generated_at: ts(),
        });
        // A baseline-only report over this ledger is inconsistent: the
        // ledger records a remediation the report would not show.
        assert!(
            matches!(baseline_only, Err(ReportError::MissingUpdated { .. })),
            "{baseline_only:?}"
        );

        let ab = diff_reports(&with_update, &with_update);
        assert_eq!(ab.overall_delta, Some(0.0));
        assert_eq!(ab.row_count_delta, 0);
        for d in &ab.dimensions {
            assert!(d.delta.is_none() || d.delta == Some(0.0));
        }

        let f2 = fixture();
        let other = report_from(&f2, None);
        let forward = diff_reports(&with_update, &other);
        let backward = diff_reports(&other, &with_update);
        match (forward.overall_delta, backward.overall_delta) {
            (Some(x), Some(y)) => assert!((x + y).abs() < 1e-15),
            (a, b) => panic!("{a:?} {b:?}"),
        }
        assert_eq!(forward.row_count_delta, -backward.row_count_delta);
        assert_eq!(forward.column_count_delta, -backward.column_count_delta);
        for (df, db) in forward.dimensions.iter().zip(&backward.dimensions) {
            assert_eq!(df.dimension, db.dimension);
            match (df.delta, db.delta) {
                (Some(x), Some(y)) => assert!((x + y).abs() < 1e-15),
                (None, None) => {}
                (a, b) => panic!("{a:?} {b:?}"),
            }
        }
        // The diff reads final states: the updated side of each report.
        assert_eq!(forward.report_a.version_label, "remediated");
        assert_eq!(forward.report_a.dataset_digest, f.updated.digest());
    }
}
