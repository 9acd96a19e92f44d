//! Quality and readiness scoring across eight fixed dimensions.
//!
//! Each enabled dimension yields one finding: a score in [0, 1] where higher
//! is better (or no score when the dimension does not apply to the dataset),
//! supporting evidence, a plain-language explanation, and at least one
//! recommendation — a concrete remediation step where the data needs work,
//! or standing advice where it does not. The overall readiness score is the
//! mean of the defined dimension scores.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, Digest};
use crate::profile::DataProfile;
use crate::remediate::RemediationStep;

mod detectors;

/// At most this many supporting row indices are kept per finding; counts in
/// the evidence detail stay exact.
pub const MAX_EVIDENCE_ROWS: usize = 1000;

/// The assessed quality dimensions, in report order.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(rename_all = "snake_case")]
pub enum Dimension {
    MissingValues,
    Outliers,
    ClassImbalance,
    LabelNoise,
    Correlation,
    DataHomogeneity,
    Duplicates,
    DataBias,
}

impl Dimension {
    pub const ALL: [Dimension; 8] = [
        Dimension::MissingValues,
        Dimension::Outliers,
        Dimension::ClassImbalance,
        Dimension::LabelNoise,
        Dimension::Correlation,
        Dimension::DataHomogeneity,
        Dimension::Duplicates,
        Dimension::DataBias,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Dimension::MissingValues => "missing_values",
            Dimension::Outliers => "outliers",
            Dimension::ClassImbalance => "class_imbalance",
            Dimension::LabelNoise => "label_noise",
            Dimension::Correlation => "correlation",
            Dimension::DataHomogeneity => "data_homogeneity",
            Dimension::Duplicates => "duplicates",
            Dimension::DataBias => "data_bias",
        }
    }

    /// Identifier of the metric scoring this dimension.
    pub fn metric_id(self) -> &'static str {
        match self {
            Dimension::MissingValues => "missing_cell_fraction",
            Dimension::Outliers => "iqr_outlier_rate",
            Dimension::ClassImbalance => "normalized_class_entropy",
            Dimension::LabelNoise => "kdn_label_noise_rate",
            Dimension::Correlation => "pairwise_correlation_rate",
            Dimension::DataHomogeneity => "type_dominance_rate",
            Dimension::Duplicates => "duplicate_row_rate",
            Dimension::DataBias => "disparate_impact_ratio",
        }
    }

    /// Human-readable heading used in rendered reports.
    pub fn title(self) -> &'static str {
        match self {
            Dimension::MissingValues => "Missing Values",
            Dimension::Outliers => "Outliers",
            Dimension::ClassImbalance => "Class Imbalance",
            Dimension::LabelNoise => "Label Noise",
            Dimension::Correlation => "Correlation",
            Dimension::DataHomogeneity => "Data Homogeneity",
            Dimension::Duplicates => "Duplicates",
            Dimension::DataBias => "Data Bias",
        }
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// What a finding is grounded in: the columns involved, up to
/// [`MAX_EVIDENCE_ROWS`] 0-based row indices, and metric-specific detail.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evidence {
    pub columns: Vec<String>,
    pub row_indices: Vec<u64>,
    pub total_rows: u64,
    pub detail: BTreeMap<String, serde_json::Value>,
}

/// Advice attached to a finding. Every scored finding carries at least one;
/// where the data needs work the advice includes a ready-to-run plan step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Recommendation {
    pub summary: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub suggested_step: Option<RemediationStep>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QualityFinding {
    pub dimension: Dimension,
    pub metric_id: String,
    /// Absent when the dimension does not apply (the explanation says why).
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub score: Option<f64>,
    pub evidence: Evidence,
    pub explanation: String,
    pub recommendations: Vec<Recommendation>,
}

/// Assessment settings. All thresholds are validated before use; unknown
/// keys in a config file are rejected rather than silently dropped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AssessConfig {
    /// Pairs with |correlation| at or above this are flagged.
    pub correlation_threshold: f64,
    /// Tukey fence multiplier for outlier detection.
    pub outlier_iqr_multiplier: f64,
    /// Neighbor count for the label-noise metric.
    pub label_noise_k: usize,
    /// Rows whose neighbor disagreement exceeds this fraction are flagged.
    pub label_noise_threshold: f64,
    /// Disparate-impact ratios below this are flagged (0.8 = four-fifths).
    pub disparate_impact_threshold: f64,
    /// Target value counted as the favorable outcome for the bias metric.
    pub favorable_value: Option<String>,
    pub enabled_dimensions: BTreeSet<Dimension>,
    /// Seed carried into recommended sampling steps.
    pub random_seed: u64,
}

impl Default for AssessConfig {
    fn default() -> Self {
        AssessConfig {
            correlation_threshold: 0.8,
            outlier_iqr_multiplier: 1.5,
            label_noise_k: 5,
            label_noise_threshold: 0.5,
            disparate_impact_threshold: 0.8,
            favorable_value: None,
            enabled_dimensions: Dimension::ALL.into_iter().collect(),
            random_seed: 0,
        }
    }
}

impl AssessConfig {
    pub fn validate(&self) -> Result<(), String> {
        let unit = [
            ("correlation_threshold", self.correlation_threshold),
            ("label_noise_threshold", self.label_noise_threshold),
            ("disparate_impact_threshold", self.disparate_impact_threshold),
        ];
        for (name, v) in unit {
            if !v.is_finite() || v <= 0.0 || v > 1.0 {
                return Err(format!("{name} must be in (0, 1], got {v}"));
            }
        }
        if !self.outlier_iqr_multiplier.is_finite() || self.outlier_iqr_multiplier <= 0.0 {
            return Err(format!(
                "outlier_iqr_multiplier must be positive, got {}",
                self.outlier_iqr_multiplier
            ));
        }
        if self.label_noise_k == 0 {
            return Err("label_noise_k must be at least 1".to_string());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QualityAssessment {
    pub dataset_digest: Digest,
    pub version_label: String,
    pub generated_at: DateTime<Utc>,
    /// Mean of the defined dimension scores; absent when none applied.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub overall_score: Option<f64>,
    pub findings: Vec<QualityFinding>,
    pub config_snapshot: AssessConfig,
}

impl QualityAssessment {
    pub fn finding(&self, dimension: Dimension) -> Option<&QualityFinding> {
        self.findings.iter().find(|f| f.dimension == dimension)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum AssessError {
    #[error("invalid assessment config: {0}")]
    Config(String),
    #[error("profile digest {profile} does not match dataset digest {dataset}")]
    ProfileMismatch { profile: Digest, dataset: Digest },
}

/// Score every enabled dimension. The profile must describe exactly this
/// dataset (matching digests); it supplies the correlation structure.
pub fn assess(
    dataset: &Dataset,
    profile: &DataProfile,
    config: &AssessConfig,
    generated_at: DateTime<Utc>,
) -> Result<QualityAssessment, AssessError> {
    config.validate().map_err(AssessError::Config)?;
    if profile.dataset_digest != dataset.digest() {
        return Err(AssessError::ProfileMismatch {
            profile: profile.dataset_digest,
            dataset: dataset.digest(),
        });
    }

    let mut findings = Vec::new();
    for dimension in Dimension::ALL {
        if !config.enabled_dimensions.contains(&dimension) {
            continue;
        }
        findings.push(match dimension {
            Dimension::MissingValues => detectors::missing_values(dataset),
            Dimension::Outliers => detectors::outliers(dataset, config),
            Dimension::ClassImbalance => detectors::class_imbalance(dataset, config),
            Dimension::LabelNoise => detectors::label_noise(dataset, config),
            Dimension::Correlation => detectors::correlation(dataset, profile, config),
            Dimension::DataHomogeneity => detectors::data_homogeneity(dataset),
            Dimension::Duplicates => detectors::duplicates(dataset),
            Dimension::DataBias => detectors::data_bias(dataset, config),
        });
    }

    let defined: Vec<f64> = findings.iter().filter_map(|f| f.score).collect();
    let overall_score = if defined.is_empty() {
        None
    } else {
        Some(defined.iter().sum::<f64>() / defined.len() as f64)
    };

    Ok(QualityAssessment {
        dataset_digest: dataset.digest(),
        version_label: dataset.version_label().to_string(),
        generated_at,
        overall_score,
        findings,
        config_snapshot: config.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{Cell, Column, Role, ValueType};
    use crate::profile::profile_dataset;

    fn ts() -> DateTime<Utc> {
        DateTime::from_timestamp(1_700_000_000, 0).unwrap()
    }

    fn assess_now(dataset: &Dataset, config: &AssessConfig) -> QualityAssessment {
        let profile = profile_dataset(dataset, ts());
        assess(dataset, &profile, config, ts()).unwrap()
    }

    /// Two well-separated clusters, balanced classes, nothing missing or
    /// duplicated, no outliers, no violations. 30 distinct feature values
    /// keep the feature out of categorical territory (and so out of the
    /// correlation pairing, which needs two columns of the same class).
    fn pristine() -> Dataset {
        let mut values: Vec<Cell> = (1..=15).map(Cell::Int).collect();
        values.extend((101..=115).map(Cell::Int));
        let x = Column::new("x", ValueType::Integer, Role::Feature, values);
        let labels: Vec<Cell> = (0..30)
            .map(|i| Cell::Text(if i < 15 { "A".into() } else { "B".into() }))
            .collect();
        let label = Column::new("label", ValueType::Text, Role::Target, labels);
        Dataset::from_columns(vec![x, label], "mem", "baseline").unwrap()
    }

    #[test]
    fn pristine_dataset_scores_a_perfect_overall() {
        let config = AssessConfig {
            label_noise_k: 1,
            ..AssessConfig::default()
        };
        let assessment = assess_now(&pristine(), &config);
        assert_eq!(assessment.findings.len(), 8);
        for finding in &assessment.findings {
            match finding.dimension {
                // No numeric column pairs, no protected column.
                Dimension::Correlation | Dimension::DataBias => {
                    assert_eq!(finding.score, None, "{:?}", finding.dimension);
                    assert!(finding.recommendations.is_empty());
                }
                // Perfect scores still carry standing advice, never a step.
                _ => {
                    assert_eq!(finding.score, Some(1.0), "{:?}", finding.dimension);
                    assert_eq!(finding.recommendations.len(), 1);
                    assert!(finding.recommendations[0].suggested_step.is_none());
                    assert!(!finding.recommendations[0].summary.is_empty());
                }
            }
        }
        assert_eq!(assessment.overall_score, Some(1.0));
    }

    #[test]
    fn findings_follow_the_fixed_dimension_order() {
        let assessment = assess_now(&pristine(), &AssessConfig::default());
        let got: Vec<Dimension> = assessment.findings.iter().map(|f| f.dimension).collect();
        assert_eq!(got, Dimension::ALL.to_vec());
    }

    #[test]
    fn disabled_dimensions_are_omitted() {
        let config = AssessConfig {
            enabled_dimensions: [Dimension::MissingValues, Dimension::Duplicates]
                .into_iter()
                .collect(),
            ..AssessConfig::default()
        };
        let assessment = assess_now(&pristine(), &config);
        let got: Vec<Dimension> = assessment.findings.iter().map(|f| f.dimension).collect();
        assert_eq!(got, vec![Dimension::MissingValues, Dimension::Duplicates]);
        assert_eq!(assessment.overall_score, Some(1.0));
    }

    #[test]
    fn stale_profile_is_rejected() {
        let ds = pristine();
        let other = Dataset::from_columns(
            vec![Column::new(
                "x",
                ValueType::Integer,
                Role::Feature,
                vec![Cell::Int(1)],
            )],
            "mem",
            "baseline",
        )
        .unwrap();
        let stale = profile_dataset(&other, ts());
        let err = assess(&ds, &stale, &AssessConfig::default(), ts()).unwrap_err();
        assert!(matches!(err, AssessError::ProfileMismatch { .. }), "{err:?}");
    }

    #[test]
    fn config_validation_rejects_bad_thresholds() {
        let cases = [
            AssessConfig {
                correlation_threshold: 0.0,
                ..AssessConfig::default()
            },
            AssessConfig {
                correlation_threshold: 1.5,
                ..AssessConfig::default()
            },
            AssessConfig {
                label_noise_k: 0,
                ..AssessConfig::default()
            },
            AssessConfig {
                outlier_iqr_multiplier: -1.0,
                ..AssessConfig::default()
            },
            AssessConfig {
                disparate_impact_threshold: f64::NAN,
                ..AssessConfig::default()
            },
        ];
        for config in cases {
            assert!(config.validate().is_err());
        }
        assert!(AssessConfig::default().validate().is_ok());
    }

    #[test]
    fn assessment_round_trips_through_json() {
        let ds = pristine();
        let assessment = assess_now(&ds, &AssessConfig::default());
        let json = serde_json::to_string(&assessment).unwrap();
        let back: QualityAssessment = serde_json::from_str(&json).unwrap();
        assert_eq!(back, assessment);
    }

    #[test]
    fn dimension_names_are_stable() {
        let names: Vec<&str> = Dimension::ALL.iter().map(|d| d.name()).collect();
        assert_eq!(
            names,
            vec![
                "missing_values",
                "outliers",
                "class_imbalance",
                "label_noise",
                "correlation",
                "data_homogeneity",
                "duplicates",
                "data_bias",
            ]
        );
        let json = serde_json::to_string(&Dimension::LabelNoise).unwrap();
        assert_eq!(json, "\"label_noise\"");
    }
}
