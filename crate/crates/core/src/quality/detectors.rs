//! One detector per quality dimension. Detectors never fail: a dimension
//! that cannot be computed returns a finding without a score whose
//! explanation says why.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use serde_json::json;

use super::{AssessConfig, Dimension, Evidence, QualityFinding, Recommendation, MAX_EVIDENCE_ROWS};
use crate::dataset::{cell_token, token_matches, Column, Dataset, Role};
use crate::knn::NoiseSpace;
use crate::profile::{CorrelationMethod, DataProfile};
use crate::remediate::{Actor, ImputeStrategy, RemediationStep, StepAction, TextTransform};
use crate::stats;

fn pct(fraction: f64) -> String {
    format!("{:.1}%", 100.0 * fraction)
}

fn recommend(action: StepAction, rationale: impl Into<String>) -> Recommendation {
    let rationale = rationale.into();
    Recommendation {
        summary: rationale.clone(),
        suggested_step: Some(RemediationStep {
            action,
            rationale,
            actor: Actor::tool(),
        }),
    }
}

fn advice(summary: impl Into<String>) -> Recommendation {
    Recommendation {
        summary: summary.into(),
        suggested_step: None,
    }
}

fn capped(rows: impl IntoIterator<Item = usize>) -> Vec<u64> {
    rows.into_iter()
        .take(MAX_EVIDENCE_ROWS)
        .map(|r| r as u64)
        .collect()
}

fn finding(
    dimension: Dimension,
    metric_id: &str,
    score: f64,
    evidence: Evidence,
    explanation: String,
    recommendations: Vec<Recommendation>,
) -> QualityFinding {
    QualityFinding {
        dimension,
        metric_id: metric_id.to_string(),
        score: Some(score),
        evidence,
        explanation,
        recommendations,
    }
}

fn not_applicable(
    dimension: Dimension,
    metric_id: &str,
    total_rows: u64,
    reason: &str,
) -> QualityFinding {
    QualityFinding {
        dimension,
        metric_id: metric_id.to_string(),
        score: None,
        evidence: Evidence {
            columns: Vec::new(),
            row_indices: Vec::new(),
            total_rows,
            detail: BTreeMap::new(),
        },
        explanation: format!("Not applicable: {reason}."),
        recommendations: Vec::new(),
    }
}

/// Feature and target columns: the cells that feed a model.
fn scored_columns(dataset: &Dataset) -> Vec<&Column> {
    dataset
        .columns()
        .iter()
        .filter(|c| matches!(c.role, Role::Feature | Role::Target))
        .collect()
}

fn sorted_numeric(column: &Column) -> Vec<f64> {
    let mut values: Vec<f64> = column.cells.iter().filter_map(|c| c.as_f64()).collect();
    values.sort_unstable_by(f64::total_cmp);
    values
}

pub(super) fn missing_values(dataset: &Dataset) -> QualityFinding {
    let metric = Dimension::MissingValues.metric_id();
    let rows = dataset.row_count();
    let scope = scored_columns(dataset);
    if scope.is_empty() || rows == 0 {
        return not_applicable(
            Dimension::MissingValues,
            metric,
            rows as u64,
            "no feature or target cells to scan",
        );
    }

    let mut column_counts: BTreeMap<String, u64> = BTreeMap::new();
    let mut affected_rows: BTreeSet<usize> = BTreeSet::new();
    let mut missing_cells = 0u64;
    let mut affected: Vec<&Column> = Vec::new();
    for column in &scope {
        let mut count = 0u64;
        for (r, cell) in column.cells.iter().enumerate() {
            if cell.is_missing() {
                count += 1;
                affected_rows.insert(r);
            }
        }
        if count > 0 {
            column_counts.insert(column.name.clone(), count);
            affected.push(column);
        }
        missing_cells += count;
    }

    let total_cells = (scope.len() * rows) as u64;
    let fraction = missing_cells as f64 / total_cells as f64;
    let mut recommendations: Vec<Recommendation> = affected
        .iter()
        .map(|column| {
            let count = column_counts[&column.name];
            let strategy = if column.value_type.is_numeric() && !column.categorical {
                ImputeStrategy::Median
            } else {
                ImputeStrategy::Mode
            };
            let how = match strategy {
                ImputeStrategy::Median => "median",
                _ => "mode",
            };
            recommend(
                StepAction::Impute {
                    column: column.name.clone(),
                    strategy,
                },
                format!(
                    "fill {count} missing values in {:?} with the column {how}",
                    column.name
                ),
            )
        })
        .collect();
    if recommendations.is_empty() {
        recommendations.push(advice(
            "No cells need filling; re-assess after the next data delivery.",
        ));
    }

    let explanation = if missing_cells == 0 {
        format!(
            "No missing cells across {} scored columns ({rows} rows).",
            scope.len()
        )
    } else {
        format!(
            "{missing_cells} of {total_cells} cells ({}) across {} scored columns are missing; {} columns affected.",
            pct(fraction),
            scope.len(),
            affected.len()
        )
    };
    let mut detail = BTreeMap::new();
    if missing_cells > 0 {
        detail.insert(
            "column_missing_counts".to_string(),
            serde_json::to_value(&column_counts).unwrap(),
        );
        detail.insert("affected_row_count".to_string(), json!(affected_rows.len()));
    }
    finding(
        Dimension::MissingValues,
        metric,
        1.0 - fraction,
        Evidence {
            columns: affected.iter().map(|c| c.name.clone()).collect(),
            row_indices: capped(affected_rows),
            total_rows: rows as u64,
            detail,
        },
        explanation,
        recommendations,
    )
}

pub(super) fn outliers(dataset: &Dataset, config: &AssessConfig) -> QualityFinding {
    let metric = Dimension::Outliers.metric_id();
    let multiplier = config.outlier_iqr_multiplier;
    let mut scanned = 0u64;
    let mut flagged = 0u64;
    let mut flagged_rows: BTreeSet<usize> = BTreeSet::new();
    let mut affected: Vec<String> = Vec::new();
    let mut column_counts: BTreeMap<String, u64> = BTreeMap::new();
    let mut fences: BTreeMap<String, serde_json::Value> = BTreeMap::new();

    for column in dataset.columns() {
        if column.role != Role::Feature || !column.value_type.is_numeric() {
            continue;
        }
        let values = sorted_numeric(column);
        if values.is_empty() {
            continue;
        }
        scanned += values.len() as u64;
        let (lo, hi) = stats::iqr_fences(&values, multiplier);
        let mut count = 0u64;
        for (r, cell) in column.cells.iter().enumerate() {
            if let Some(v) = cell.as_f64() {
                if v < lo || v > hi {
                    count += 1;
                    flagged_rows.insert(r);
                }
            }
        }
        if count > 0 {
            affected.push(column.name.clone());
            column_counts.insert(column.name.clone(), count);
            fences.insert(column.name.clone(), json!([lo, hi]));
            flagged += count;
        }
    }

    if scanned == 0 {
        return not_applicable(
            Dimension::Outliers,
            metric,
            dataset.row_count() as u64,
            "no numeric feature values",
        );
    }

    let rate = flagged as f64 / scanned as f64;
    let recommendations = if flagged > 0 {
        vec![
            recommend(
                StepAction::CapOutliers {
                    columns: affected.clone(),
                    multiplier,
                },
                format!("clamp {flagged} outlying values to the {multiplier}x IQR fences"),
            ),
            recommend(
                StepAction::DropOutlierRows {
                    columns: affected.clone(),
                    multiplier,
                },
                "alternatively, drop the rows carrying outlying values".to_string(),
            ),
        ]
    } else {
        vec![advice(format!(
            "All numeric feature values sit inside the {multiplier}x IQR fences; revisit the fences as the data grows."
        ))]
    };
    let explanation = format!(
        "{flagged} of {scanned} numeric feature values ({}) fall outside the {multiplier}x IQR fences.",
        pct(rate)
    );
    let mut detail = BTreeMap::new();
    if flagged > 0 {
        detail.insert(
            "column_outlier_counts".to_string(),
            serde_json::to_value(&column_counts).unwrap(),
        );
        detail.insert("fences".to_string(), serde_json::Value::Object(fences.into_iter().collect()));
    }
    finding(
        Dimension::Outliers,
        metric,
        1.0 - rate,
        Evidence {
            columns: affected,
            row_indices: capped(flagged_rows),
            total_rows: dataset.row_count() as u64,
            detail,
        },
        explanation,
        recommendations,
    )
}

pub(super) fn class_imbalance(dataset: &Dataset, config: &AssessConfig) -> QualityFinding {
    let metric = Dimension::ClassImbalance.metric_id();
    let rows = dataset.row_count() as u64;
    let Some(target) = dataset.target_column() else {
        return not_applicable(
            Dimension::ClassImbalance,
            metric,
            rows,
            "no target column is designated",
        );
    };
    let mut counts: BTreeMap<String, u64> = BTreeMap::new();
    for cell in &target.cells {
        if !cell.is_missing() {
            *counts.entry(cell_token(cell).into_owned()).or_insert(0) += 1;
        }
    }
    if counts.is_empty() {
        return not_applicable(
            Dimension::ClassImbalance,
            metric,
            rows,
            "the target column has no labeled rows",
        );
    }

    let values: Vec<u64> = counts.values().copied().collect();
    let score = stats::normalized_entropy(&values);
    let recommendations = if counts.len() == 1 {
        vec![advice(
            "Resampling cannot help a single-class target; collect rows for the missing outcome classes at the source.",
        )]
    } else if score < 1.0 {
        vec![
            recommend(
                StepAction::Oversample {
                    ratio: 1.0,
                    seed: config.random_seed,
                },
                "replicate minority-class rows until all classes match the majority".to_string(),
            ),
            recommend(
                StepAction::Undersample {
                    ratio: 1.0,
                    seed: config.random_seed,
                },
                "alternatively, trim majority classes down to the minority count".to_string(),
            ),
        ]
    } else {
        vec![advice(
            "Class counts are exactly balanced; no resampling is needed.",
        )]
    };
    let explanation = if counts.len() == 1 {
        format!(
            "The target {:?} contains a single class; no classifier can be trained on it as-is.",
            target.name
        )
    } else {
        format!(
            "Normalized class entropy over {:?} is {score:.4} across {} classes.",
            target.name,
            counts.len()
        )
    };
    let mut detail = BTreeMap::new();
    detail.insert(
        "class_counts".to_string(),
        serde_json::to_value(&counts).unwrap(),
    );
    finding(
        Dimension::ClassImbalance,
        metric,
        score,
        Evidence {
            columns: vec![target.name.clone()],
            row_indices: Vec::new(),
            total_rows: rows,
            detail,
        },
        explanation,
        recommendations,
    )
}

pub(super) fn label_noise(dataset: &Dataset, config: &AssessConfig) -> QualityFinding {
    let metric = Dimension::LabelNoise.metric_id();
    let rows = dataset.row_count();
    let k = config.label_noise_k;
    if rows <= k {
        return not_applicable(
            Dimension::LabelNoise,
            metric,
            rows as u64,
            "fewer rows than neighbors requested",
        );
    }
    let Some(space) = NoiseSpace::build(dataset) else {
        return not_applicable(
            Dimension::LabelNoise,
            metric,
            rows as u64,
            "requires a target column and at least one usable numeric feature",
        );
    };
    let labeled = space.labels.iter().flatten().count();
    if labeled < 2 {
        return not_applicable(
            Dimension::LabelNoise,
            metric,
            rows as u64,
            "fewer than two labeled rows",
        );
    }

    let threshold = config.label_noise_threshold;
    let scores = space.kdn_scores(k);
    let flagged: Vec<usize> = scores
        .iter()
        .enumerate()
        .filter(|(_, s)| matches!(s, Some(v) if *v > threshold))
        .map(|(r, _)| r)
        .collect();
    let rate = flagged.len() as f64 / labeled as f64;

    let recommendations = if flagged.is_empty() {
        vec![advice(
            "No row's label disagrees with its neighborhood beyond the threshold; revisit after label edits.",
        )]
    } else {
        vec![recommend(
            StepAction::DropFlaggedLabels { k, threshold },
            format!(
                "drop the {} rows whose labels disagree with their neighborhood",
                flagged.len()
            ),
        )]
    };
    let explanation = format!(
        "{} of {labeled} labeled rows ({}) have more than {} of their {k} nearest labeled neighbors disagreeing with their label.",
        flagged.len(),
        pct(rate),
        pct(threshold),
    );
    let mut detail = BTreeMap::new();
    detail.insert("k".to_string(), json!(k));
    detail.insert("threshold".to_string(), json!(threshold));
    detail.insert("labeled_rows".to_string(), json!(labeled));
    detail.insert("flagged_rows".to_string(), json!(flagged.len()));

    let mut columns = space.feature_columns.clone();
    columns.push(dataset.target_column().unwrap().name.clone());
    finding(
        Dimension::LabelNoise,
        metric,
        1.0 - rate,
        Evidence {
            columns,
            row_indices: capped(flagged),
            total_rows: rows as u64,
            detail,
        },
        explanation,
        recommendations,
    )
}

pub(super) fn correlation(
    dataset: &Dataset,
    profile: &DataProfile,
    config: &AssessConfig,
) -> QualityFinding {
    let metric = Dimension::Correlation.metric_id();
    let rows = dataset.row_count() as u64;
    let defined: Vec<_> = profile
        .correlations
        .entries
        .iter()
        .filter(|e| e.defined)
        .collect();
    if defined.is_empty() {
        return not_applicable(
            Dimension::Correlation,
            metric,
            rows,
            "no measurable column pairs",
        );
    }
    let threshold = config.correlation_threshold;
    let flagged: Vec<_> = defined
        .iter()
        .filter(|e| e.value.unwrap_or(0.0).abs() >= threshold)
        .copied()
        .collect();
    let rate = flagged.len() as f64 / defined.len() as f64;

    let mut columns: Vec<String> = Vec::new();
    let mut recommendations = Vec::new();
    let mut dropped: BTreeSet<String> = BTreeSet::new();
    for entry in &flagged {
        for name in [&entry.column_a, &entry.column_b] {
            if !columns.contains(name) {
                columns.push(name.clone());
            }
        }
        // Drop the pair member carrying less information: more missing
        // values, ties broken toward the later column.
        let a = dataset.column(&entry.column_a).unwrap();
        let b = dataset.column(&entry.column_b).unwrap();
        let missing_a = a.cells.len() as u64 - a.non_missing_count();
        let missing_b = b.cells.len() as u64 - b.non_missing_count();
        let drop = if missing_a > missing_b {
            &entry.column_a
        } else if missing_b > missing_a {
            &entry.column_b
        } else {
            let ia = dataset.column_index(&entry.column_a).unwrap();
            let ib = dataset.column_index(&entry.column_b).unwrap();
            if ia > ib {
                &entry.column_a
            } else {
                &entry.column_b
            }
        };
        if dropped.insert(drop.clone()) {
            let method = match entry.method {
                CorrelationMethod::Pearson => "r",
                CorrelationMethod::CramersV => "V",
            };
            recommendations.push(recommend(
                StepAction::DropColumn {
                    column: drop.clone(),
                },
                format!(
                    "{:?} and {:?} are strongly associated ({method} = {:.4}); drop the less complete of the two",
                    entry.column_a,
                    entry.column_b,
                    entry.value.unwrap_or(0.0)
                ),
            ));
        }
    }
    if recommendations.is_empty() {
        recommendations.push(advice(
            "No column pair reaches the association threshold; no columns need pruning.",
        ));
    }

    let explanation = format!(
        "{} of {} measurable column pairs ({}) are associated at or above {threshold}.",
        flagged.len(),
        defined.len(),
        pct(rate),
    );
    let mut detail = BTreeMap::new();
    if !flagged.is_empty() {
        detail.insert(
            "flagged_pairs".to_string(),
            serde_json::to_value(&flagged).unwrap(),
        );
    }
    finding(
        Dimension::Correlation,
        metric,
        1.0 - rate,
        Evidence {
            columns,
            row_indices: Vec::new(),
            total_rows: rows,
            detail,
        },
        explanation,
        recommendations,
    )
}

pub(super) fn data_homogeneity(dataset: &Dataset) -> QualityFinding {
    let metric = Dimension::DataHomogeneity.metric_id();
    let rows = dataset.row_count();
    let scope = scored_columns(dataset);
    if scope.is_empty() || rows == 0 {
        return not_applicable(
            Dimension::DataHomogeneity,
            metric,
            rows as u64,
            "no feature or target cells to scan",
        );
    }

    let mut column_scores = Vec::with_capacity(scope.len());
    let mut affected: Vec<String> = Vec::new();
    let mut violating_rows: BTreeSet<usize> = BTreeSet::new();
    let mut column_detail: BTreeMap<String, serde_json::Value> = BTreeMap::new();
    let mut recommendations = Vec::new();

    for column in &scope {
        let non_missing = column.non_missing_count();
        let fraction = if non_missing == 0 {
            0.0
        } else {
            column.type_violations as f64 / non_missing as f64
        };
        column_scores.push(1.0 - fraction);
        if column.type_violations == 0 {
            continue;
        }
        affected.push(column.name.clone());

        let mut token_counts: BTreeMap<String, u64> = BTreeMap::new();
        for (r, cell) in column.cells.iter().enumerate() {
            if cell.is_missing() {
                continue;
            }
            let token = cell_token(cell);
            if !token_matches(&token, column.value_type) {
                violating_rows.insert(r);
                *token_counts.entry(token.into_owned()).or_insert(0) += 1;
            }
        }
        let mut ranked: Vec<(&String, &u64)> = token_counts.iter().collect();
        ranked.sort_by(|a, b| b.1.cmp(a.1).then(a.0.cmp(b.0)));
        let samples: Vec<String> = ranked.iter().take(5).map(|(t, _)| (*t).clone()).collect();

        column_detail.insert(
            column.name.clone(),
            json!({
                "declared_type": column.value_type.name(),
                "dominant_type": column.dominant_type.name(),
                "dominance": column.dominance,
                "violations": column.type_violations,
                "sample_tokens": samples,
            }),
        );
        let map: BTreeMap<String, String> = samples
            .iter()
            .map(|t| (t.clone(), String::new()))
            .collect();
        recommendations.push(recommend(
            StepAction::NormalizeValues {
                column: column.name.clone(),
                transforms: vec![TextTransform::Map(map)],
            },
            format!(
                "convert the {} unparseable values in {:?} to missing, then impute",
                column.type_violations, column.name
            ),
        ));
    }
    if recommendations.is_empty() {
        recommendations.push(advice(
            "Every value parses as its column's declared type; no normalization is needed.",
        ));
    }

    let score = column_scores.iter().sum::<f64>() / column_scores.len() as f64;
    let explanation = if affected.is_empty() {
        format!(
            "All values in {} scored columns parse as their declared types.",
            scope.len()
        )
    } else {
        format!(
            "{} of {} scored columns contain values that do not parse as their declared type; mean per-column type conformance is {}.",
            affected.len(),
            scope.len(),
            pct(score),
        )
    };
    let mut detail = BTreeMap::new();
    if !column_detail.is_empty() {
        detail.insert(
            "columns".to_string(),
            serde_json::Value::Object(column_detail.into_iter().collect()),
        );
    }
    finding(
        Dimension::DataHomogeneity,
        metric,
        score,
        Evidence {
            columns: affected,
            row_indices: capped(violating_rows),
            total_rows: rows as u64,
            detail,
        },
        explanation,
        recommendations,
    )
}

pub(super) fn duplicates(dataset: &Dataset) -> QualityFinding {
    let metric = Dimension::Duplicates.metric_id();
    let rows = dataset.row_count();
    if rows == 0 {
        return not_applicable(Dimension::Duplicates, metric, 0, "dataset has no rows");
    }
    let mut seen: HashSet<Vec<String>> = HashSet::with_capacity(rows);
    let mut dup_rows: Vec<usize> = Vec::new();
    for r in 0..rows {
        let key: Vec<String> = dataset
            .columns()
            .iter()
            .map(|c| cell_token(&c.cells[r]).into_owned())
            .collect();
        if !seen.insert(key) {
            dup_rows.push(r);
        }
    }
    let rate = dup_rows.len() as f64 / rows as f64;
    let recommendations = if dup_rows.is_empty() {
        vec![advice(
            "No row exactly duplicates another; deduplication is not needed.",
        )]
    } else {
        vec![recommend(
            StepAction::Dedupe,
            format!(
                "remove {} rows that exactly duplicate an earlier row",
                dup_rows.len()
            ),
        )]
    };
    let explanation = format!(
        "{} of {rows} rows ({}) exactly duplicate an earlier row.",
        dup_rows.len(),
        pct(rate),
    );
    let mut detail = BTreeMap::new();
    detail.insert("duplicate_rows".to_string(), json!(dup_rows.len()));
    detail.insert("distinct_rows".to_string(), json!(seen.len()));
    finding(
        Dimension::Duplicates,
        metric,
        1.0 - rate,
        Evidence {
            columns: Vec::new(),
            row_indices: capped(dup_rows),
            total_rows: rows as u64,
            detail,
        },
        explanation,
        recommendations,
    )
}

pub(super) fn data_bias(dataset: &Dataset, config: &AssessConfig) -> QualityFinding {
    let metric = Dimension::DataBias.metric_id();
    let rows = dataset.row_count() as u64;
    let Some(protected) = dataset.protected_column() else {
        return not_applicable(
            Dimension::DataBias,
            metric,
            rows,
            "no protected column is designated",
        );
    };
    let Some(target) = dataset.target_column() else {
        return not_applicable(
            Dimension::DataBias,
            metric,
            rows,
            "no target column is designated",
        );
    };
    let Some(favorable) = config.favorable_value.as_deref() else {
        return not_applicable(
            Dimension::DataBias,
            metric,
            rows,
            "no favorable target value is configured",
        );
    };

    // (favorable count, total count) per protected group, over rows where
    // both the group and the label are present.
    let mut groups: BTreeMap<String, (u64, u64)> = BTreeMap::new();
    for (g, t) in protected.cells.iter().zip(&target.cells) {
        if g.is_missing() || t.is_missing() {
            continue;
        }
        let entry = groups.entry(cell_token(g).into_owned()).or_insert((0, 0));
        entry.1 += 1;
        if cell_token(t) == favorable {
            entry.0 += 1;
        }
    }
    if groups.len() < 2 {
        return not_applicable(
            Dimension::DataBias,
            metric,
            rows,
            "fewer than two protected groups with labeled rows",
        );
    }

    let rates: BTreeMap<String, f64> = groups
        .iter()
        .map(|(g, (fav, total))| (g.clone(), *fav as f64 / *total as f64))
        .collect();
    // First strictly smaller/larger wins, so ties resolve to the earlier
    // group token.
    let mut iter = rates.iter();
    let first = iter.next().unwrap();
    let (mut min_group, mut min_rate) = (first.0.clone(), *first.1);
    let (mut max_group, mut max_rate) = (first.0.clone(), *first.1);
    for (g, r) in iter {
        if *r < min_rate {
            min_group = g.clone();
            min_rate = *r;
        }
        if *r > max_rate {
            max_group = g.clone();
            max_rate = *r;
        }
    }
    if max_rate == 0.0 {
        return not_applicable(
            Dimension::DataBias,
            metric,
            rows,
            "the favorable outcome never occurs",
        );
    }

    let score = min_rate / max_rate;
    let threshold = config.disparate_impact_threshold;
    let flagged = score < threshold;
    let least_favored_rows: Vec<usize> = protected
        .cells
        .iter()
        .enumerate()
        .filter(|(r, g)| {
            !g.is_missing()
                && !target.cells[*r].is_missing()
                && cell_token(g) == min_group.as_str()
        })
        .map(|(r, _)| r)
        .collect();

    let recommendations = if flagged {
        vec![recommend(
            StepAction::Oversample {
                ratio: 1.0,
                seed: config.random_seed,
            },
            format!(
                "rebalance classes before training and route the {:?} vs {:?} outcome gap to a subject-matter review; resampling alone cannot certify fairness",
                min_group, max_group
            ),
        )]
    } else {
        vec![advice(format!(
            "The disparate impact ratio meets the {threshold} threshold; keep monitoring group outcome rates as the data shifts."
        ))]
    };
    let explanation = format!(
        "Group {min_group:?} receives the favorable outcome {favorable:?} at {} vs {} for group {max_group:?}; disparate impact ratio {score:.4} ({} threshold {threshold}).",
        pct(min_rate),
        pct(max_rate),
        if flagged { "below" } else { "meets" },
    );
    let mut detail = BTreeMap::new();
    detail.insert(
        "group_rates".to_string(),
        serde_json::to_value(&rates).unwrap(),
    );
    detail.insert(
        "group_counts".to_string(),
        serde_json::to_value(
            groups
                .iter()
                .map(|(g, (_, total))| (g.clone(), *total))
                .collect::<BTreeMap<String, u64>>(),
        )
        .unwrap(),
    );
    detail.insert("favorable_value".to_string(), json!(favorable));
    detail.insert("least_favored_group".to_string(), json!(min_group));
    detail.insert("most_favored_group".to_string(), json!(max_group));
    finding(
        Dimension::DataBias,
        metric,
        score,
        Evidence {
            columns: vec![protected.name.clone(), target.name.clone()],
            row_indices: capped(least_favored_rows),
            total_rows: rows,
            detail,
        },
        explanation,
        recommendations,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{Cell, ValueType};
    use crate::profile::profile_dataset;
    use crate::quality::{assess, QualityAssessment};
    use chrono::DateTime;

    fn ts() -> chrono::DateTime<chrono::Utc> {
        DateTime::from_timestamp(1_700_000_000, 0).unwrap()
    }

    fn assess_now(dataset: &Dataset, config: &AssessConfig) -> QualityAssessment {
        let profile = profile_dataset(dataset, ts());
        assess(dataset, &profile, config, ts()).unwrap()
    }

    fn step_kinds(f: &QualityFinding) -> Vec<&'static str> {
        f.recommendations
            .iter()
            .filter_map(|r| r.suggested_step.as_ref())
            .map(|s| s.action.kind())
            .collect()
    }

    fn step(f: &QualityFinding, i: usize) -> &RemediationStep {
        f.recommendations[i].suggested_step.as_ref().unwrap()
    }

    fn int_col(name: &str, values: &[Option<i64>], role: Role) -> Column {
        Column::new(
            name,
            ValueType::Integer,
            role,
            values
                .iter()
                .map(|v| v.map_or(Cell::Missing, Cell::Int))
                .collect(),
        )
    }

    fn text_col(name: &str, values: &[&str], role: Role) -> Column {
        Column::new(
            name,
            ValueType::Text,
            role,
            values
                .iter()
                .map(|s| {
                    if s.is_empty() {
                        Cell::Missing
                    } else {
                        Cell::Text(s.to_string())
                    }
                })
                .collect(),
        )
    }

    #[test]
    fn missing_five_cells_in_a_ten_by_ten_grid_scores_095() {
        // Ten integer feature columns, ten rows; c1 loses three cells and c2
        // loses two.
        let mut columns: Vec<Column> = (1..=10)
            .map(|i| {
                int_col(
                    &format!("c{i}"),
                    &(0..10).map(|r| Some((i * 100 + r) as i64)).collect::<Vec<_>>(),
                    Role::Feature,
                )
            })
            .collect();
        columns[0].cells[0] = Cell::Missing;
        columns[0].cells[3] = Cell::Missing;
        columns[0].cells[7] = Cell::Missing;
        columns[1].cells[2] = Cell::Missing;
        columns[1].cells[3] = Cell::Missing;
        let ds = Dataset::from_columns(columns, "mem", "baseline").unwrap();

        let f = missing_values(&ds);
        assert!((f.score.unwrap() - 0.95).abs() < 1e-12, "{:?}", f.score);
        assert_eq!(f.evidence.columns, vec!["c1", "c2"]);
        assert_eq!(f.evidence.row_indices, vec![0, 2, 3, 7]);
        assert_eq!(f.recommendations.len(), 2);
        assert_eq!(
            f.evidence.detail["column_missing_counts"],
            json!({"c1": 3, "c2": 2})
        );
    }

    #[test]
    fn missing_strategy_follows_column_shape() {
        // 30 distinct values defeat the categorical tag, so the numeric
        // column gets a median; the text column gets a mode.
        let mut nums: Vec<Option<i64>> = (0..30).map(|i| Some(i)).collect();
        nums[4] = None;
        let words: Vec<&str> = (0..30).map(|i| if i == 9 { "" } else { "w" }).collect();
        let ds = Dataset::from_columns(
            vec![
                int_col("a", &nums, Role::Feature),
                text_col("b", &words, Role::Feature),
            ],
            "mem",
            "baseline",
        )
        .unwrap();
        let f = missing_values(&ds);
        let strategies: Vec<_> = f
            .recommendations
            .iter()
            .filter_map(|r| r.suggested_step.as_ref())
            .map(|s| match &s.action {
                StepAction::Impute { column, strategy } => (column.clone(), strategy.clone()),
                other => panic!("{other:?}"),
            })
            .collect();
        assert_eq!(
            strategies,
            vec![
                ("a".to_string(), ImputeStrategy::Median),
                ("b".to_string(), ImputeStrategy::Mode),
            ]
        );
    }

    #[test]
    fn one_outlier_in_ten_values_scores_09() {
        let values: Vec<Option<i64>> = (1..=9).map(Some).chain([Some(100)]).collect();
        let ds = Dataset::from_columns(
            vec![int_col("v", &values, Role::Feature)],
            "mem",
            "baseline",
        )
        .unwrap();
        let f = outliers(&ds, &AssessConfig::default());
        assert!((f.score.unwrap() - 0.9).abs() < 1e-12);
        assert_eq!(f.evidence.columns, vec!["v"]);
        assert_eq!(f.evidence.row_indices, vec![9]);
        assert_eq!(f.evidence.detail["fences"], json!({"v": [-3.5, 14.5]}));
        assert_eq!(step_kinds(&f), vec!["cap_outliers", "drop_outlier_rows"]);
    }

    #[test]
    fn outliers_not_applicable_without_numeric_features() {
        let ds = Dataset::from_columns(
            vec![text_col("t", &["a", "b", "c"], Role::Feature)],
            "mem",
            "baseline",
        )
        .unwrap();
        let f = outliers(&ds, &AssessConfig::default());
        assert_eq!(f.score, None);
        assert!(f.explanation.starts_with("Not applicable"));
    }

    #[test]
    fn ninety_ten_imbalance_matches_the_frozen_entropy() {
        let labels: Vec<&str> = (0..100).map(|i| if i < 90 { "no" } else { "yes" }).collect();
        let ds = Dataset::from_columns(
            vec![
                int_col(
                    "x",
                    &(0..100).map(|i| Some(i as i64)).collect::<Vec<_>>(),
                    Role::Feature,
                ),
                text_col("label", &labels, Role::Target),
            ],
            "mem",
            "baseline",
        )
        .unwrap();
        let f = class_imbalance(&ds, &AssessConfig::default());
        assert!(
            (f.score.unwrap() - 0.4689955935892812).abs() < 1e-12,
            "{:?}",
            f.score
        );
        assert_eq!(
            f.evidence.detail["class_counts"],
            json!({"no": 90, "yes": 10})
        );
        assert_eq!(step_kinds(&f), vec!["oversample", "undersample"]);
        match &step(&f, 0).action {
            StepAction::Oversample { ratio, seed } => {
                assert_eq!(*ratio, 1.0);
                assert_eq!(*seed, 0);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn single_class_target_scores_zero_without_a_sampling_fix() {
        let ds = Dataset::from_columns(
            vec![
                int_col("x", &[Some(1), Some(2), Some(3)], Role::Feature),
                text_col("label", &["same", "same", "same"], Role::Target),
            ],
            "mem",
            "baseline",
        )
        .unwrap();
        let f = class_imbalance(&ds, &AssessConfig::default());
        assert_eq!(f.score, Some(0.0));
        // Advice only: resampling cannot conjure a second class.
        assert_eq!(f.recommendations.len(), 1);
        assert!(f.recommendations[0].suggested_step.is_none());
        assert!(f.recommendations[0].summary.contains("collect"));
    }

    #[test]
    fn label_noise_flags_the_minority_cluster() {
        let ds = Dataset::from_columns(
            vec![
                int_col(
                    "x",
                    &[Some(0), Some(1), Some(2), Some(10), Some(11), Some(12)],
                    Role::Feature,
                ),
                text_col("label", &["A", "A", "B", "B", "B", "B"], Role::Target),
            ],
            "mem",
            "baseline",
        )
        .unwrap();
        let config = AssessConfig {
            label_noise_k: 3,
            ..AssessConfig::default()
        };
        // Rows 0-2 all have kDN 2/3 > 0.5; rows 3-5 have 0.
        let f = label_noise(&ds, &config);
        assert!((f.score.unwrap() - 0.5).abs() < 1e-12, "{:?}", f.score);
        assert_eq!(f.evidence.row_indices, vec![0, 1, 2]);
        assert_eq!(f.evidence.columns, vec!["x", "label"]);
        assert_eq!(f.recommendations.len(), 1);
        assert_eq!(
            step(&f, 0).action,
            StepAction::DropFlaggedLabels {
                k: 3,
                threshold: 0.5
            }
        );
    }

    #[test]
    fn label_noise_not_applicable_cases() {
        // No target column.
        let ds = Dataset::from_columns(
            vec![int_col("x", &(0..10).map(Some).collect::<Vec<_>>(), Role::Feature)],
            "mem",
            "baseline",
        )
        .unwrap();
        assert_eq!(label_noise(&ds, &AssessConfig::default()).score, None);

        // Too few rows for k.
        let ds = Dataset::from_columns(
            vec![
                int_col("x", &[Some(1), Some(2), Some(9)], Role::Feature),
                text_col("label", &["A", "A", "B"], Role::Target),
            ],
            "mem",
            "baseline",
        )
        .unwrap();
        let config = AssessConfig {
            label_noise_k: 3,
            ..AssessConfig::default()
        };
        let f = label_noise(&ds, &config);
        assert_eq!(f.score, None);
        assert!(f.explanation.contains("fewer rows"));
    }

    #[test]
    fn correlation_flags_one_of_three_pairs_and_drops_the_gappier_column() {
        let a: Vec<Option<i64>> = (0..30).map(|i| Some(i)).collect();
        let mut b: Vec<Option<i64>> = (0..30).map(|i| Some(2 * i)).collect();
        b[0] = None; // b is the less complete of the flagged pair
        let c: Vec<Option<i64>> = (0..30).map(|i| Some((i * 7) % 30)).collect();
        let ds = Dataset::from_columns(
            vec![
                int_col("a", &a, Role::Feature),
                int_col("b", &b, Role::Feature),
                int_col("c", &c, Role::Feature),
            ],
            "mem",
            "baseline",
        )
        .unwrap();
        let profile = profile_dataset(&ds, ts());
        let f = correlation(&ds, &profile, &AssessConfig::default());
        // Three defined pairs, one flagged: 1 - 1/3.
        assert!((f.score.unwrap() - 2.0 / 3.0).abs() < 1e-12, "{:?}", f.score);
        assert_eq!(f.evidence.columns, vec!["a", "b"]);
        assert_eq!(f.recommendations.len(), 1);
        assert_eq!(
            step(&f, 0).action,
            StepAction::DropColumn {
                column: "b".to_string()
            }
        );
    }

    #[test]
    fn correlation_tie_drops_the_later_column() {
        // Perfectly associated categorical pair with equal missing counts.
        let u: Vec<&str> = (0..20).map(|i| if i < 10 { "x" } else { "y" }).collect();
        let v: Vec<&str> = (0..20).map(|i| if i < 10 { "p" } else { "q" }).collect();
        let ds = Dataset::from_columns(
            vec![
                text_col("u", &u, Role::Feature),
                text_col("v", &v, Role::Feature),
            ],
            "mem",
            "baseline",
        )
        .unwrap();
        let profile = profile_dataset(&ds, ts());
        let f = correlation(&ds, &profile, &AssessConfig::default());
        assert_eq!(f.score, Some(0.0));
        assert_eq!(
            step(&f, 0).action,
            StepAction::DropColumn {
                column: "v".to_string()
            }
        );
    }

    #[test]
    fn correlation_not_applicable_without_pairs() {
        let ds = Dataset::from_columns(
            vec![int_col("x", &(0..30).map(Some).collect::<Vec<_>>(), Role::Feature)],
            "mem",
            "baseline",
        )
        .unwrap();
        let profile = profile_dataset(&ds, ts());
        let f = correlation(&ds, &profile, &AssessConfig::default());
        assert_eq!(f.score, None);
    }

    #[test]
    fn homogeneity_two_column_example_scores_0875() {
        // zip: 6 of 8 values parse as integers -> per-column 0.75; name is
        // clean -> 1.0; mean 0.875.
        let zip = Column::new(
            "zip",
            ValueType::Integer,
            Role::Feature,
            vec![
                Cell::Int(75001),
                Cell::Int(75002),
                Cell::Text("unknown".into()),
                Cell::Int(75004),
                Cell::Int(75005),
                Cell::Text("unknown".into()),
                Cell::Int(75007),
                Cell::Int(75008),
            ],
        );
        let name = text_col(
            "name",
            &["a", "b", "c", "d", "e", "f", "g", "h"],
            Role::Feature,
        );
        let ds = Dataset::from_columns(vec![zip, name], "mem", "baseline").unwrap();
        let f = data_homogeneity(&ds);
        assert!((f.score.unwrap() - 0.875).abs() < 1e-12, "{:?}", f.score);
        assert_eq!(f.evidence.columns, vec!["zip"]);
        assert_eq!(f.evidence.row_indices, vec![2, 5]);
        assert_eq!(
            f.evidence.detail["columns"]["zip"]["sample_tokens"],
            json!(["unknown"])
        );
        assert_eq!(f.recommendations.len(), 1);
        assert_eq!(
            step(&f, 0).action,
            StepAction::NormalizeValues {
                column: "zip".to_string(),
                transforms: vec![TextTransform::Map(
                    [("unknown".to_string(), String::new())].into_iter().collect()
                )],
            }
        );
    }

    #[test]
    fn one_duplicate_in_four_rows_scores_075() {
        let ds = Dataset::from_columns(
            vec![
                int_col("a", &[Some(1), Some(2), Some(1), Some(3)], Role::Feature),
                text_col("b", &["x", "y", "x", "z"], Role::Feature),
            ],
            "mem",
            "baseline",
        )
        .unwrap();
        let f = duplicates(&ds);
        assert!((f.score.unwrap() - 0.75).abs() < 1e-12, "{:?}", f.score);
        assert_eq!(f.evidence.row_indices, vec![2]);
        assert_eq!(f.evidence.detail["duplicate_rows"], json!(1));
        assert_eq!(f.evidence.detail["distinct_rows"], json!(3));
        assert_eq!(f.recommendations.len(), 1);
        assert_eq!(step(&f, 0).action, StepAction::Dedupe);
    }

    #[test]
    fn disparate_impact_half_is_flagged() {
        // m: 8 of 10 favorable; f: 4 of 10 -> DI = 0.5.
        let sex: Vec<&str> = (0..20).map(|i| if i < 10 { "m" } else { "f" }).collect();
        let approved: Vec<&str> = (0..20)
            .map(|i| match i {
                0..=7 => "yes",
                8..=9 => "no",
                10..=13 => "yes",
                _ => "no",
            })
            .collect();
        let ds = Dataset::from_columns(
            vec![
                text_col("sex", &sex, Role::Protected),
                text_col("approved", &approved, Role::Target),
            ],
            "mem",
            "baseline",
        )
        .unwrap();
        let config = AssessConfig {
            favorable_value: Some("yes".to_string()),
            ..AssessConfig::default()
        };
        let f = data_bias(&ds, &config);
        assert_eq!(f.score, Some(0.5));
        assert_eq!(f.evidence.columns, vec!["sex", "approved"]);
        assert_eq!(
            f.evidence.detail["group_rates"],
            json!({"f": 0.4, "m": 0.8})
        );
        assert_eq!(f.evidence.detail["least_favored_group"], json!("f"));
        assert_eq!(f.evidence.row_indices, (10..20).collect::<Vec<u64>>());
        assert_eq!(f.recommendations.len(), 1);
        assert_eq!(step(&f, 0).action.kind(), "oversample");
    }

    #[test]
    fn bias_not_applicable_without_prerequisites() {
        let sex: Vec<&str> = (0..20).map(|i| if i < 10 { "m" } else { "f" }).collect();
        let approved: Vec<&str> = (0..20).map(|i| if i % 2 == 0 { "yes" } else { "no" }).collect();
        let ds = Dataset::from_columns(
            vec![
                text_col("sex", &sex, Role::Protected),
                text_col("approved", &approved, Role::Target),
            ],
            "mem",
            "baseline",
        )
        .unwrap();
        // No favorable value configured.
        let f = data_bias(&ds, &AssessConfig::default());
        assert_eq!(f.score, None);
        assert!(f.explanation.contains("favorable"));

        // Favorable value that never occurs.
        let config = AssessConfig {
            favorable_value: Some("maybe".to_string()),
            ..AssessConfig::default()
        };
        let f = data_bias(&ds, &config);
        assert_eq!(f.score, None);
        assert!(f.explanation.contains("never occurs"));
    }

    #[test]
    fn bias_meeting_the_threshold_is_not_flagged() {
        // m: 5 of 10; f: 5 of 10 -> DI = 1.0.
        let sex: Vec<&str> = (0..20).map(|i| if i < 10 { "m" } else { "f" }).collect();
        let approved: Vec<&str> = (0..20).map(|i| if i % 2 == 0 { "yes" } else { "no" }).collect();
        let ds = Dataset::from_columns(
            vec![
                text_col("sex", &sex, Role::Protected),
                text_col("approved", &approved, Role::Target),
            ],
            "mem",
            "baseline",
        )
        .unwrap();
        let config = AssessConfig {
            favorable_value: Some("yes".to_string()),
            ..AssessConfig::default()
        };
        let f = data_bias(&ds, &config);
        assert_eq!(f.score, Some(1.0));
        assert_eq!(f.recommendations.len(), 1);
        assert!(f.recommendations[0].suggested_step.is_none());
    }

    #[test]
    fn evidence_row_indices_are_capped() {
        let n = MAX_EVIDENCE_ROWS + 100;
        let mut values: Vec<Option<i64>> = vec![None; n];
        values[0] = Some(1); // keep the column non-degenerate
        let anchor: Vec<Option<i64>> = (0..n).map(|i| Some(i as i64)).collect();
        let ds = Dataset::from_columns(
            vec![
                int_col("gappy", &values, Role::Feature),
                int_col("anchor", &anchor, Role::Feature),
            ],
            "mem",
            "baseline",
        )
        .unwrap();
        let f = missing_values(&ds);
        assert_eq!(f.evidence.row_indices.len(), MAX_EVIDENCE_ROWS);
        assert_eq!(f.evidence.detail["affected_row_count"], json!(n - 1));
    }

    #[test]
    fn full_assessment_on_a_flawed_dataset_recommends_for_every_imperfection() {
        // One dataset touching several dimensions at once.
        let sex: Vec<&str> = (0..20).map(|i| if i < 10 { "m" } else { "f" }).collect();
        let approved: Vec<&str> = (0..20)
            .map(|i| match i {
                0..=7 => "yes",
                8..=9 => "no",
                10..=13 => "yes",
                _ => "no",
            })
            .collect();
        let mut age: Vec<Option<i64>> = (0..20).map(|i| Some(20 + i as i64)).collect();
        age[3] = None;
        age[19] = Some(900); // outlier
        let ds = Dataset::from_columns(
            vec![
                int_col("age", &age, Role::Feature),
                text_col("sex", &sex, Role::Protected),
                text_col("approved", &approved, Role::Target),
            ],
            "mem",
            "baseline",
        )
        .unwrap();
        let config = AssessConfig {
            favorable_value: Some("yes".to_string()),
            label_noise_k: 3,
            ..AssessConfig::default()
        };
        let assessment = assess_now(&ds, &config);
        assert_eq!(assessment.findings.len(), 8);
        for f in &assessment.findings {
            if let Some(score) = f.score {
                assert!((0.0..=1.0).contains(&score), "{:?} {score}", f.dimension);
            }
        }
        // Overall is the mean of the defined scores.
        let defined: Vec<f64> = assessment.findings.iter().filter_map(|f| f.score).collect();
        let mean = defined.iter().sum::<f64>() / defined.len() as f64;
        assert!((assessment.overall_score.unwrap() - mean).abs() < 1e-12);
        // Imperfect-but-fixable dimensions carry at least one concrete step.
        for f in &assessment.findings {
            if matches!(
                f.dimension,
                Dimension::MissingValues | Dimension::Outliers | Dimension::ClassImbalance
            ) {
                assert!(f.score.unwrap() < 1.0, "{:?}", f.dimension);
                assert!(!step_kinds(f).is_empty(), "{:?}", f.dimension);
            }
        }
        // Every scored finding has advice; every suggested step is the tool's.
        for f in &assessment.findings {
            assert!(
                f.score.is_none() || !f.recommendations.is_empty(),
                "{:?}",
                f.dimension
            );
            for rec in &f.recommendations {
                assert!(!rec.summary.is_empty());
                if let Some(s) = &rec.suggested_step {
                    assert_eq!(s.actor, Actor::tool());
                    assert!(!s.rationale.is_empty());
                }
            }
        }
    }
}
