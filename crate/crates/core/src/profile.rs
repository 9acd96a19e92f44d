//! Dataset profiling: per-column statistics, value distributions, pattern
//! summaries, and pairwise correlations.

use std::collections::BTreeMap;
use std::collections::BTreeSet;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::dataset::{cell_token, Column, Dataset, Digest, Role, ValueType};
use crate::stats;

pub const DEFAULT_HISTOGRAM_BINS: usize = 10;

/// Summary statistics over the non-missing numeric cells of a column.
/// `std_dev` is the population standard deviation: the profile describes the
/// dataset itself, not a sample estimate of something larger.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NumericSummary {
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    pub median: f64,
    pub std_dev: f64,
    pub q1: f64,
    pub q3: f64,
}

/// Value distribution. Numeric columns get equal-width bins (half-open
/// except the last, which includes the maximum); categorical columns get
/// exact per-value counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Histogram {
    Numeric { edges: Vec<f64>, counts: Vec<u64> },
    Categories { counts: BTreeMap<String, u64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryCount {
    pub value: String,
    pub count: u64,
}

/// The most common character-class generalization of a column's values
/// (digits→`D`, letters→`A`, everything else literal) and the fraction of
/// non-missing values it covers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternSummary {
    pub pattern: String,
    pub coverage: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnProfile {
    pub name: String,
    pub declared_type: ValueType,
    pub categorical: bool,
    pub role: Role,
    pub missing_count: u64,
    pub missing_fraction: f64,
    pub unique_count: u64,
    pub type_violation_count: u64,
    pub dominant_type: ValueType,
    pub dominance: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub numeric: Option<NumericSummary>,
    /// Top 10 values by count (ties broken by value) for categorical and
    /// text columns; empty for plain numeric columns.
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub top_values: Vec<CategoryCount>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub dominant_pattern: Option<PatternSummary>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub histogram: Option<Histogram>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrelationMethod {
    Pearson,
    CramersV,
}

/// One unordered column pair. `value` is absent exactly when `defined` is
/// false (constant column, too few paired observations, or a degenerate
/// contingency table).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationEntry {
    pub column_a: String,
    pub column_b: String,
    pub method: CorrelationMethod,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub value: Option<f64>,
    pub defined: bool,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CorrelationMatrix {
    pub entries: Vec<CorrelationEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataProfile {
    pub dataset_digest: Digest,
    pub source_path: String,
    pub version_label: String,
    pub row_count: u64,
    pub column_count: u64,
    pub column_profiles: Vec<ColumnProfile>,
    pub correlations: CorrelationMatrix,
    pub generated_at: DateTime<Utc>,
}

/// Profile every column and every eligible column pair. Deterministic for a
/// given dataset digest; `generated_at` is the only caller-supplied input.
pub fn profile_dataset(dataset: &Dataset, generated_at: DateTime<Utc>) -> DataProfile {
    let column_profiles = dataset
        .columns()
        .iter()
        .map(|c| profile_column(c, dataset.row_count()))
        .collect();
    DataProfile {
        dataset_digest: dataset.digest(),
        source_path: dataset.source_path().to_string(),
        version_label: dataset.version_label().to_string(),
        row_count: dataset.row_count() as u64,
        column_count: dataset.column_count() as u64,
        column_profiles,
        correlations: correlations(dataset),
        generated_at,
    }
}

pub fn profile_column(column: &Column, row_count: usize) -> ColumnProfile {
    let missing_count = column.cells.iter().filter(|c| c.is_missing()).count() as u64;
    let missing_fraction = if row_count == 0 {
        0.0
    } else {
        missing_count as f64 / row_count as f64
    };

    let tokens: Vec<String> = column
        .cells
        .iter()
        .filter(|c| !c.is_missing())
        .map(|c| cell_token(c).into_owned())
        .collect();
    let unique_count = tokens.iter().collect::<BTreeSet<_>>().len() as u64;

    let mut numeric_values: Vec<f64> = column.cells.iter().filter_map(|c| c.as_f64()).collect();
    numeric_values.sort_unstable_by(f64::total_cmp);

    let numeric = if column.value_type.is_numeric() && !numeric_values.is_empty() {
        Some(NumericSummary {
            min: numeric_values[0],
            max: *numeric_values.last().unwrap(),
            mean: stats::mean(&numeric_values).unwrap(),
            median: stats::quantile_type7(&numeric_values, 0.5),
            std_dev: stats::population_std_dev(&numeric_values).unwrap(),
            q1: stats::quantile_type7(&numeric_values, 0.25),
            q3: stats::quantile_type7(&numeric_values, 0.75),
        })
    } else {
        None
    };

    let pattern_eligible = column.value_type == ValueType::Text || column.categorical;
    let (top_values, dominant_pattern) = if pattern_eligible {
        (top_values(&tokens, 10), Some(detect_pattern(&tokens)))
    } else {
        (Vec::new(), None)
    };

    let histogram = if column.value_type.is_numeric() && !column.categorical {
        numeric_histogram(&numeric_values, DEFAULT_HISTOGRAM_BINS)
    } else if column.categorical || column.value_type == ValueType::Boolean {
        let mut counts = BTreeMap::new();
        for t in &tokens {
            *counts.entry(t.clone()).or_insert(0u64) += 1;
        }
        Some(Histogram::Categories { counts })
    } else {
        None
    };

    ColumnProfile {
        name: column.name.clone(),
        declared_type: column.value_type,
        categorical: column.categorical,
        role: column.role,
        missing_count,
        missing_fraction,
        unique_count,
        type_violation_count: column.type_violations,
        dominant_type: column.dominant_type,
        dominance: column.dominance,
        numeric,
        top_values,
        dominant_pattern,
        histogram,
    }
}

fn top_values(tokens: &[String], k: usize) -> Vec<CategoryCount> {
    let mut counts: BTreeMap<&str, u64> = BTreeMap::new();
    for t in tokens {
        *counts.entry(t).or_insert(0) += 1;
    }
    let mut pairs: Vec<(&str, u64)> = counts.into_iter().collect();
    // Highest count first; ties resolve to the lexicographically smaller value.
    pairs.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
    pairs
        .into_iter()
        .take(k)
        .map(|(value, count)| CategoryCount {
            value: value.to_string(),
            count,
        })
        .collect()
}

/// Generalize each value character by character (digit→`D`, letter→`A`,
/// other characters kept literally) and return the most frequent
/// generalization with its coverage fraction.
pub fn detect_pattern(tokens: &[String]) -> PatternSummary {
    if tokens.is_empty() {
        return PatternSummary {
            pattern: String::new(),
            coverage: 0.0,
        };
    }
    let mut counts: BTreeMap<String, u64> = BTreeMap::new();
    for t in tokens {
        let generalized: String = t
            .chars()
            .map(|c| {
                if c.is_ascii_digit() {
                    'D'
                } else if c.is_alphabetic() {
                    'A'
                } else {
                    c
                }
            })
            .collect();
        *counts.entry(generalized).or_insert(0) += 1;
    }
    // BTreeMap iteration order makes the tie-break (smallest pattern) stable.
    let (pattern, count) = counts
        .into_iter()
        .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0)))
        .unwrap();
    PatternSummary {
        pattern,
        coverage: count as f64 / tokens.len() as f64,
    }
}

/// Equal-width histogram over sorted values. A constant column gets a single
/// bin centered on the value, half a unit wide on each side.
fn numeric_histogram(sorted: &[f64], bins: usize) -> Option<Histogram> {
    if sorted.is_empty() || bins == 0 {
        return None;
    }
    let (min, max) = (sorted[0], sorted[sorted.len() - 1]);
    let single_bin = |min: f64, max: f64| Histogram::Numeric {
        edges: vec![min - 0.5, max + 0.5],
        counts: vec![sorted.len() as u64],
    };
    if min == max {
        return Some(single_bin(min, max));
    }
    let width = (max - min) / bins as f64;
    let edges: Vec<f64> = (0..=bins)
        .map(|i| if i == bins { max } else { min + i as f64 * width })
        .collect();
    if edges.windows(2).any(|w| w[0] >= w[1]) {
        // Range too small for distinct edges at this precision.
        return Some(single_bin(min, max));
    }
    let mut counts = vec![0u64; bins];
    for &v in sorted {
        let idx = (((v - min) / (max - min)) * bins as f64) as usize;
        counts[idx.min(bins - 1)] += 1;
    }
    Some(Histogram::Numeric { edges, counts })
}

/// Sample Pearson correlation over paired observations. `None` when fewer
/// than two pairs or either side has zero variance.
pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    assert_eq!(x.len(), y.len());
    let n = x.len();
    if n < 2 {
        return None;
    }
    let mx = stats::mean(x).unwrap();
    let my = stats::mean(y).unwrap();
    let mut cov = 0.0;
    let mut vx = 0.0;
    let mut vy = 0.0;
    for (a, b) in x.iter().zip(y) {
        let dx = a - mx;
        let dy = b - my;
        cov += dx * dy;
        vx += dx * dx;
        vy += dy * dy;
    }
    if vx == 0.0 || vy == 0.0 {
        return None;
    }
    Some((cov / (vx.sqrt() * vy.sqrt())).clamp(-1.0, 1.0))
}

/// Cramér's V from the r×c contingency table of paired category labels, no
/// bias correction. `None` when the table has fewer than two rows or columns
/// or fewer than two observations.
pub fn cramers_v(a: &[&str], b: &[&str]) -> Option<f64> {
    assert_eq!(a.len(), b.len());
    let n = a.len();
    if n < 2 {
        return None;
    }
    let rows: BTreeSet<&str> = a.iter().copied().collect();
    let cols: BTreeSet<&str> = b.iter().copied().collect();
    let k = rows.len().min(cols.len());
    if k < 2 {
        return None;
    }
    let mut table: BTreeMap<(&str, &str), f64> = BTreeMap::new();
    let mut row_totals: BTreeMap<&str, f64> = BTreeMap::new();
    let mut col_totals: BTreeMap<&str, f64> = BTreeMap::new();
    for (ra, cb) in a.iter().zip(b) {
        *table.entry((ra, cb)).or_insert(0.0) += 1.0;
        *row_totals.entry(ra).or_insert(0.0) += 1.0;
        *col_totals.entry(cb).or_insert(0.0) += 1.0;
    }
    let n = n as f64;
    let mut chi2 = 0.0;
    for (r, rt) in &row_totals {
        for (c, ct) in &col_totals {
            let expected = rt * ct / n;
            let observed = table.get(&(*r, *c)).copied().unwrap_or(0.0);
            let d = observed - expected;
            chi2 += d * d / expected;
        }
    }
    Some((chi2 / (n * (k as f64 - 1.0))).sqrt().clamp(0.0, 1.0))
}

/// A column's standing for pairwise correlation. Numeric wins when a column
/// is both (a low-cardinality integer column tagged categorical still
/// correlates linearly with other numeric columns).
fn correlation_class(column: &Column) -> (bool, bool) {
    let numeric = column.value_type.is_numeric();
    let categorical = column.categorical || column.value_type == ValueType::Boolean;
    (numeric, categorical)
}

fn correlations(dataset: &Dataset) -> CorrelationMatrix {
    let eligible: Vec<&Column> = dataset
        .columns()
        .iter()
        .filter(|c| !matches!(c.role, Role::Identifier | Role::Ignore))
        .collect();
    let mut entries = Vec::new();
    for i in 0..eligible.len() {
        for j in (i + 1)..eligible.len() {
            let (a, b) = (eligible[i], eligible[j]);
            let (a_num, a_cat) = correlation_class(a);
            let (b_num, b_cat) = correlation_class(b);
            let entry = if a_num && b_num {
                let mut xs = Vec::new();
                let mut ys = Vec::new();
                for (ca, cb) in a.cells.iter().zip(&b.cells) {
                    if let (Some(x), Some(y)) = (ca.as_f64(), cb.as_f64()) {
                        xs.push(x);
                        ys.push(y);
                    }
                }
                let value = pearson(&xs, &ys);
                CorrelationEntry {
                    column_a: a.name.clone(),
                    column_b: b.name.clone(),
                    method: CorrelationMethod::Pearson,
                    defined: value.is_some(),
                    value,
                }
            } else if a_cat && b_cat {
                let mut xs = Vec::new();
                let mut ys = Vec::new();
                for (ca, cb) in a.cells.iter().zip(&b.cells) {
                    if !ca.is_missing() && !cb.is_missing() {
                        xs.push(cell_token(ca).into_owned());
                        ys.push(cell_token(cb).into_owned());
                    }
                }
                let xr: Vec<&str> = xs.iter().map(String::as_str).collect();
                let yr: Vec<&str> = ys.iter().map(String::as_str).collect();
                let value = cramers_v(&xr, &yr);
                CorrelationEntry {
                    column_a: a.name.clone(),
                    column_b: b.name.clone(),
                    method: CorrelationMethod::CramersV,
                    defined: value.is_some(),
                    value,
                }
            } else {
                continue;
            };
            entries.push(entry);
        }
    }
    CorrelationMatrix { entries }
}
