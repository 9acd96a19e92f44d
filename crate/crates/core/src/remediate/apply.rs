//! Step and plan application. Every step is a pure function of its input
//! dataset and parameters (including seeds), so identical inputs produce
//! digest-identical outputs on any platform — the property the lineage
//! ledger's replay relies on.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use chrono::{DateTime, Utc};
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::dataset::{cell_from_token, cell_token, Cell, Column, Dataset, DatasetError, ValueType};
use crate::knn::NoiseSpace;
use crate::lineage::{EntryDraft, LineageError, LineageLedger, Operation, OperationDetail};
use crate::stats;

use super::{ChangeSummary, ImputeStrategy, RemediationPlan, RemediationStep, StepAction, TextTransform};

#[derive(Debug, thiserror::Error)]
pub enum StepError {
    #[error("column not found: {0}")]
    ColumnNotFound(String),
    #[error("column {column}: {message}")]
    TypeMismatch { column: String, message: String },
    #[error("not applicable: {0}")]
    NotApplicable(String),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
}

#[derive(Debug, thiserror::Error)]
pub enum ApplyError {
    #[error("step {index} ({kind}) failed: {source}")]
    Step {
        index: usize,
        kind: String,
        #[source]
        source: StepError,
    },
    #[error(transparent)]
    Ledger(#[from] LineageError),
}

/// Apply one step, returning the transformed dataset and an exact account of
/// what changed.
pub fn apply_step(
    dataset: &Dataset,
    step: &RemediationStep,
) -> Result<(Dataset, ChangeSummary), StepError> {
    let (columns, cells_modified) = transform(dataset, &step.action)?;
    let output = Dataset::from_columns(
        columns,
        dataset.source_path().to_string(),
        dataset.version_label().to_string(),
    )?;
    let summary = ChangeSummary {
        step_kind: step.action.kind().to_string(),
        rows_before: dataset.row_count() as u64,
        rows_after: output.row_count() as u64,
        columns_before: dataset.column_count() as u64,
        columns_after: output.column_count() as u64,
        cells_modified,
        input_digest: dataset.digest(),
        output_digest: output.digest(),
    };
    Ok((output, summary))
}

/// Apply a whole plan in order. One ledger entry is appended per successful
/// step (when a ledger is given); a failing step appends nothing for itself
/// and the error names its 1-based index.
pub fn apply_plan(
    dataset: &Dataset,
    plan: &RemediationPlan,
    ledger: Option<&LineageLedger>,
    now: DateTime<Utc>,
) -> Result<Dataset, ApplyError> {
    let mut current = dataset.clone();
    for (i, step) in plan.steps.iter().enumerate() {
        let (next, summary) = apply_step(&current, step).map_err(|source| ApplyError::Step {
            index: i + 1,
            kind: step.action.kind().to_string(),
            source,
        })?;
        if let Some(ledger) = ledger {
            ledger.append(EntryDraft {
                timestamp: now,
                actor: step.actor.clone(),
                operation: Operation::RemediationStep,
                operation_detail: OperationDetail::RemediationStep {
                    step: step.clone(),
                    summary: summary.clone(),
                },
                input_digest: summary.input_digest,
                output_digest: summary.output_digest,
            })?;
        }
        current = next;
    }
    Ok(current)
}

/// Compute the transformed column set and the number of in-place cell edits.
fn transform(dataset: &Dataset, action: &StepAction) -> Result<(Vec<Column>, u64), StepError> {
    match action {
        StepAction::Impute { column, strategy } => impute(dataset, column, strategy),
        StepAction::DropRowsMissing { columns } => drop_rows_missing(dataset, columns.as_deref()),
        StepAction::DropColumn { column } => {
            let idx = require_column(dataset, column)?;
            let columns = dataset
                .columns()
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != idx)
                .map(|(_, c)| c.clone())
                .collect();
            Ok((columns, 0))
        }
        StepAction::CapOutliers {
            columns,
            multiplier,
        } => cap_outliers(dataset, columns, *multiplier),
        StepAction::DropOutlierRows {
            columns,
            multiplier,
        } => drop_outlier_rows(dataset, columns, *multiplier),
        StepAction::Oversample { ratio, seed } => oversample(dataset, *ratio, *seed),
        StepAction::Undersample { ratio, seed } => undersample(dataset, *ratio, *seed),
        StepAction::Dedupe => dedupe(dataset),
        StepAction::NormalizeValues { column, transforms } => {
            normalize_values(dataset, column, transforms)
        }
        StepAction::DropFlaggedLabels { k, threshold } => {
            drop_flagged_labels(dataset, *k, *threshold)
        }
    }
}

fn require_column(dataset: &Dataset, name: &str) -> Result<usize, StepError> {
    dataset
        .column_index(name)
        .ok_or_else(|| StepError::ColumnNotFound(name.to_string()))
}

/// Keep exactly the rows for which `keep` is true, across all columns.
fn retain_rows(dataset: &Dataset, keep: &[bool]) -> Vec<Column> {
    dataset
        .columns()
        .iter()
        .map(|c| {
            let mut col = c.clone();
            col.cells = c
                .cells
                .iter()
                .zip(keep)
                .filter(|(_, k)| **k)
                .map(|(cell, _)| cell.clone())
                .collect();
            col
        })
        .collect()
}

fn sorted_numeric(column: &Column) -> Vec<f64> {
    let mut values: Vec<f64> = column.cells.iter().filter_map(Cell::as_f64).collect();
    values.sort_unstable_by(f64::total_cmp);
    values
}

fn impute(
    dataset: &Dataset,
    name: &str,
    strategy: &ImputeStrategy,
) -> Result<(Vec<Column>, u64), StepError> {
    let idx = require_column(dataset, name)?;
    let column = &dataset.columns()[idx];

    let replacement: Cell = match strategy {
        ImputeStrategy::Mean | ImputeStrategy::Median => {
            if !column.value_type.is_numeric() {
                return Err(StepError::TypeMismatch {
                    column: name.to_string(),
                    message: format!(
                        "mean/median imputation requires a numeric column, found {}",
                        column.value_type
                    ),
                });
            }
            let values = sorted_numeric(column);
            if values.is_empty() {
                return Err(StepError::NotApplicable(format!(
                    "column {name} has no non-missing values to impute from"
                )));
            }
            let v = match strategy {
                ImputeStrategy::Mean => stats::mean(&values).unwrap(),
                _ => stats::quantile_type7(&values, 0.5),
            };
            match column.value_type {
                // Keep integer columns integral: round half away from zero.
                ValueType::Integer => Cell::Int(v.round() as i64),
                _ => Cell::Real(v),
            }
        }
        ImputeStrategy::Mode => {
            let mut counts: BTreeMap<String, u64> = BTreeMap::new();
            for cell in &column.cells {
                if !cell.is_missing() {
                    *counts.entry(cell_token(cell).into_owned()).or_insert(0) += 1;
                }
            }
            // Highest count wins; ties keep the smallest token.
            let Some((token, _)) = counts
                .iter()
                .max_by(|a, b| a.1.cmp(b.1).then_with(|| b.0.cmp(a.0)))
            else {
                return Err(StepError::NotApplicable(format!(
                    "column {name} has no non-missing values to impute from"
                )));
            };
            cell_from_token(token, column.value_type)
        }
        ImputeStrategy::Constant(token) => {
            if token.is_empty() {
                return Err(StepError::TypeMismatch {
                    column: name.to_string(),
                    message: "constant imputation value must be non-empty".to_string(),
                });
            }
            let cell = cell_from_token(token, column.value_type);
            if column.value_type == ValueType::Real && matches!(cell, Cell::Text(_)) {
                // A non-finite constant would round-trip to missing again.
                if token.parse::<f64>().is_ok() {
                    return Err(StepError::TypeMismatch {
                        column: name.to_string(),
                        message: format!("constant {token:?} is not a finite real"),
                    });
                }
            }
            cell
        }
    };

    let mut columns = dataset.columns().to_vec();
    let mut modified = 0u64;
    for cell in &mut columns[idx].cells {
        if cell.is_missing() {
            *cell = replacement.clone();
            modified += 1;
        }
    }
    Ok((columns, modified))
}

fn drop_rows_missing(
    dataset: &Dataset,
    subset: Option<&[String]>,
) -> Result<(Vec<Column>, u64), StepError> {
    let indices: Vec<usize> = match subset {
        Some(names) => names
            .iter()
            .map(|n| require_column(dataset, n))
            .collect::<Result<_, _>>()?,
        None => (0..dataset.column_count()).collect(),
    };
    let keep: Vec<bool> = (0..dataset.row_count())
        .map(|r| {
            indices
                .iter()
                .all(|&c| !dataset.columns()[c].cells[r].is_missing())
        })
        .collect();
    Ok((retain_rows(dataset, &keep), 0))
}

/// Per-column Tukey fences computed from this step's input data.
fn fences_for(
    dataset: &Dataset,
    names: &[String],
    multiplier: f64,
) -> Result<Vec<(usize, f64, f64)>, StepError> {
    let mut out = Vec::with_capacity(names.len());
    for name in names {
        let idx = require_column(dataset, name)?;
        let column = &dataset.columns()[idx];
        if !column.value_type.is_numeric() {
            return Err(StepError::TypeMismatch {
                column: name.clone(),
                message: format!("outlier fences require a numeric column, found {}", column.value_type),
            });
        }
        let values = sorted_numeric(column);
        if values.is_empty() {
            continue;
        }
        let (lo, hi) = stats::iqr_fences(&values, multiplier);
        out.push((idx, lo, hi));
    }
    Ok(out)
}

fn cap_outliers(
    dataset: &Dataset,
    names: &[String],
    multiplier: f64,
) -> Result<(Vec<Column>, u64), StepError> {
    let fences = fences_for(dataset, names, multiplier)?;
    let mut columns = dataset.columns().to_vec();
    let mut modified = 0u64;
    for (idx, lo, hi) in fences {
        let is_integer = columns[idx].value_type == ValueType::Integer;
        for cell in &mut columns[idx].cells {
            let Some(v) = cell.as_f64() else { continue };
            if v < lo {
                *cell = if is_integer {
                    Cell::Int(lo.ceil() as i64)
                } else {
                    Cell::Real(lo)
                };
                modified += 1;
            } else if v > hi {
                *cell = if is_integer {
                    Cell::Int(hi.floor() as i64)
                } else {
                    Cell::Real(hi)
                };
                modified += 1;
            }
        }
    }
    Ok((columns, modified))
}

fn drop_outlier_rows(
    dataset: &Dataset,
    names: &[String],
    multiplier: f64,
) -> Result<(Vec<Column>, u64), StepError> {
    let fences = fences_for(dataset, names, multiplier)?;
    let mut keep = vec![true; dataset.row_count()];
    for (idx, lo, hi) in fences {
        for (r, cell) in dataset.columns()[idx].cells.iter().enumerate() {
            if let Some(v) = cell.as_f64() {
                if v < lo || v > hi {
                    keep[r] = false;
                }
            }
        }
    }
    Ok((retain_rows(dataset, &keep), 0))
}

/// Uniform index in `[0, n)` by rejection sampling, so the draw sequence is
/// identical on every platform.
pub(crate) fn uniform_index(rng: &mut ChaCha8Rng, n: usize) -> usize {
    debug_assert!(n > 0);
    let n = n as u64;
    let zone = u64::MAX - (u64::MAX % n);
    loop {
        let x = rng.next_u64();
        if x < zone {
            return (x % n) as usize;
        }
    }
}

/// Row indices per target class, in ascending class-token order.
fn class_rows(dataset: &Dataset) -> Result<BTreeMap<String, Vec<usize>>, StepError> {
    let target = dataset.target_column().ok_or_else(|| {
        StepError::NotApplicable("sampling requires a target column".to_string())
    })?;
    let mut classes: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for (r, cell) in target.cells.iter().enumerate() {
        if !cell.is_missing() {
            classes.entry(cell_token(cell).into_owned()).or_default().push(r);
        }
    }
    if classes.is_empty() {
        return Err(StepError::NotApplicable(
            "sampling requires at least one labeled row".to_string(),
        ));
    }
    Ok(classes)
}

fn oversample(dataset: &Dataset, ratio: f64, seed: u64) -> Result<(Vec<Column>, u64), StepError> {
    let classes = class_rows(dataset)?;
    let max = classes.values().map(Vec::len).max().unwrap() as u64;
    let floor_count = (ratio * max as f64).ceil() as u64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut additions: Vec<usize> = Vec::new();
    for rows in classes.values() {
        let need = floor_count.saturating_sub(rows.len() as u64);
        for _ in 0..need {
            additions.push(rows[uniform_index(&mut rng, rows.len())]);
        }
    }
    let mut columns = dataset.columns().to_vec();
    for col in &mut columns {
        col.cells.reserve(additions.len());
    }
    for &src in &additions {
        for col in &mut columns {
            let cell = col.cells[src].clone();
            col.cells.push(cell);
        }
    }
    Ok((columns, 0))
}

fn undersample(dataset: &Dataset, ratio: f64, seed: u64) -> Result<(Vec<Column>, u64), StepError> {
    let classes = class_rows(dataset)?;
    let min = classes.values().map(Vec::len).min().unwrap() as u64;
    let cap = (min as f64 / ratio).floor() as u64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut removed: BTreeSet<usize> = BTreeSet::new();
    for rows in classes.values() {
        let excess = (rows.len() as u64).saturating_sub(cap) as usize;
        if excess == 0 {
            continue;
        }
        // Partial Fisher–Yates: the first `excess` slots are the removals.
        let mut pool = rows.clone();
        for i in 0..excess {
            let j = i + uniform_index(&mut rng, pool.len() - i);
            pool.swap(i, j);
            removed.insert(pool[i]);
        }
    }
    let keep: Vec<bool> = (0..dataset.row_count())
        .map(|r| !removed.contains(&r))
        .collect();
    Ok((retain_rows(dataset, &keep), 0))
}

fn dedupe(dataset: &Dataset) -> Result<(Vec<Column>, u64), StepError> {
    let mut seen: HashSet<Vec<String>> = HashSet::with_capacity(dataset.row_count());
    let keep: Vec<bool> = (0..dataset.row_count())
        .map(|r| {
            let key: Vec<String> = dataset
                .columns()
                .iter()
                .map(|c| cell_token(&c.cells[r]).into_owned())
                .collect();
            seen.insert(key)
        })
        .collect();
    Ok((retain_rows(dataset, &keep), 0))
}

fn normalize_values(
    dataset: &Dataset,
    name: &str,
    transforms: &[TextTransform],
) -> Result<(Vec<Column>, u64), StepError> {
    let idx = require_column(dataset, name)?;
    let column = &dataset.columns()[idx];
    if column.value_type != ValueType::Text && !column.categorical {
        return Err(StepError::TypeMismatch {
            column: name.to_string(),
            message: "normalize_values requires a text or categorical column".to_string(),
        });
    }
    let value_type = column.value_type;
    let mut columns = dataset.columns().to_vec();
    let mut modified = 0u64;
    for cell in &mut columns[idx].cells {
        if cell.is_missing() {
            continue;
        }
        let original = cell_token(cell).into_owned();
        let mut token = original.clone();
        for t in transforms {
            match t {
                TextTransform::Trim => token = token.trim().to_string(),
                TextTransform::Lowercase => token = token.to_lowercase(),
                TextTransform::Map(map) => {
                    if let Some(to) = map.get(&token) {
                        token = to.clone();
                    }
                }
            }
        }
        if token != original {
            // An emptied token has no canonical non-missing form.
            *cell = if token.is_empty() {
                Cell::Missing
            } else {
                cell_from_token(&token, value_type)
            };
            modified += 1;
        }
    }
    Ok((columns, modified))
}

fn drop_flagged_labels(
    dataset: &Dataset,
    k: usize,
    threshold: f64,
) -> Result<(Vec<Column>, u64), StepError> {
    let space = NoiseSpace::build(dataset).ok_or_else(|| {
        StepError::NotApplicable(
            "label-noise filtering requires a target column and at least one usable numeric feature"
                .to_string(),
        )
    })?;
    let scores = space.kdn_scores(k);
    let keep: Vec<bool> = scores
        .iter()
        .map(|s| !matches!(s, Some(v) if *v > threshold))
        .collect();
    Ok((retain_rows(dataset, &keep), 0))
}
