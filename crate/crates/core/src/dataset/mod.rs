//! Typed, content-addressed tabular datasets.
//!
//! A [`Dataset`] is an ordered list of typed columns with a SHA-256 digest
//! over its canonical byte form (see [`canon`]). Datasets are immutable after
//! construction: every transformation produces a new value, so the digest is
//! always trustworthy and safe to record in the lineage ledger.

mod canon;
mod infer;
mod load;

pub use canon::{canonical_bytes, canonical_hash, cell_token, write_dataset};
pub use infer::{infer_column, token_matches, Inference};
pub use load::load_dataset;

use std::collections::BTreeMap;
use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

/// One value in a column. `Text` preserves the source token exactly; trimming
/// or case-folding is a remediation, never an ingest side effect.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Missing,
    Int(i64),
    /// Always finite. Non-finite source tokens become `Missing` with an
    /// ingest warning.
    Real(f64),
    Bool(bool),
    Text(String),
}

impl Cell {
    pub fn is_missing(&self) -> bool {
        matches!(self, Cell::Missing)
    }

    /// Numeric view of the cell, if it has one.
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Int(v) => Some(*v as f64),
            Cell::Real(v) => Some(*v),
            _ => None,
        }
    }
}

/// Base value types, ordered from most to least specific for inference
/// tie-breaking. `1`/`0` columns count as Integer, not Boolean: boolean
/// requires `true`/`false` tokens (case-insensitive), which avoids
/// mislabeling binary-coded features.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValueType {
    Boolean,
    Integer,
    Real,
    Text,
}

impl ValueType {
    pub fn is_numeric(self) -> bool {
        matches!(self, ValueType::Integer | ValueType::Real)
    }

    pub fn name(self) -> &'static str {
        match self {
            ValueType::Boolean => "boolean",
            ValueType::Integer => "integer",
            ValueType::Real => "real",
            ValueType::Text => "text",
        }
    }
}

impl fmt::Display for ValueType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// How a column participates in assessment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    #[default]
    Feature,
    Target,
    Protected,
    Identifier,
    Ignore,
}

impl Role {
    pub fn name(self) -> &'static str {
        match self {
            Role::Feature => "feature",
            Role::Target => "target",
            Role::Protected => "protected",
            Role::Identifier => "identifier",
            Role::Ignore => "ignore",
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Declared-type override for a named column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TypeOverride {
    Integer,
    Real,
    Boolean,
    Text,
    /// Categorical is a tag over an inferred base type, not a cell type.
    Categorical,
}

/// A 32-byte SHA-256 content digest, serialized as lowercase hex.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Digest(pub [u8; 32]);

impl Digest {
    pub const ZERO: Digest = Digest([0u8; 32]);

    pub fn to_hex(self) -> String {
        hex::encode(self.0)
    }

    pub fn from_hex(s: &str) -> Result<Self, DatasetError> {
        let bytes = hex::decode(s).map_err(|_| DatasetError::BadDigest(s.to_string()))?;
        let arr: [u8; 32] = bytes
            .try_into()
            .map_err(|_| DatasetError::BadDigest(s.to_string()))?;
        Ok(Digest(arr))
    }
}

impl fmt::Display for Digest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

impl fmt::Debug for Digest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

impl Serialize for Digest {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_hex())
    }
}

impl<'de> Deserialize<'de> for Digest {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        Digest::from_hex(&s).map_err(serde::de::Error::custom)
    }
}

/// One typed column. `type_violations` counts non-missing cells whose source
/// token did not parse as the declared type; `dominant_type`/`dominance`
/// record the most specific candidate type and the fraction of non-missing
/// tokens matching it, which is what the homogeneity detector scores.
#[derive(Debug, Clone)]
pub struct Column {
    pub name: String,
    pub value_type: ValueType,
    pub categorical: bool,
    pub role: Role,
    pub cells: Vec<Cell>,
    pub type_violations: u64,
    pub dominant_type: ValueType,
    pub dominance: f64,
    categorical_forced: bool,
}

impl Column {
    /// A column with derived fields unset; [`Dataset::from_columns`] fills
    /// them in.
    pub fn new(name: impl Into<String>, value_type: ValueType, role: Role, cells: Vec<Cell>) -> Self {
        Column {
            name: name.into(),
            value_type,
            categorical: false,
            role,
            cells,
            type_violations: 0,
            dominant_type: ValueType::Text,
            dominance: 1.0,
            categorical_forced: false,
        }
    }

    /// Pin the categorical tag on, regardless of the cardinality rule.
    pub fn with_forced_categorical(mut self) -> Self {
        self.categorical_forced = true;
        self
    }

    pub fn non_missing_count(&self) -> u64 {
        self.cells.iter().filter(|c| !c.is_missing()).count() as u64
    }

    /// True when the column participates in categorical machinery (imbalance,
    /// Cramér's V, bias groups): either tagged categorical or boolean-based.
    pub fn is_categorical_like(&self) -> bool {
        self.categorical || self.value_type == ValueType::Boolean
    }
}

/// Ingest settings. Missing-token comparison is exact (case-sensitive, no
/// trimming). Unknown keys in a config file are rejected rather than
/// silently dropped.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IngestConfig {
    pub missing_tokens: BTreeSet<String>,
    pub delimiter: char,
    pub has_header: bool,
    /// Fraction in (0.5, 1]: a candidate type must match at least this
    /// fraction of non-missing tokens to become the declared type.
    pub type_dominance_threshold: f64,
    pub roles: BTreeMap<String, Role>,
    pub type_overrides: BTreeMap<String, TypeOverride>,
    pub version_label: String,
}

impl Default for IngestConfig {
    fn default() -> Self {
        IngestConfig {
            missing_tokens: ["", "NA", "N/A", "null", "NaN", "?"]
                .into_iter()
                .map(str::to_string)
                .collect(),
            delimiter: ',',
            has_header: true,
            type_dominance_threshold: 0.95,
            roles: BTreeMap::new(),
            type_overrides: BTreeMap::new(),
            version_label: "baseline".to_string(),
        }
    }
}

impl IngestConfig {
    pub fn validate(&self) -> Result<(), DatasetError> {
        if !(self.type_dominance_threshold > 0.5 && self.type_dominance_threshold <= 1.0) {
            return Err(DatasetError::Config(format!(
                "type_dominance_threshold must be in (0.5, 1], got {}",
                self.type_dominance_threshold
            )));
        }
        if !self.delimiter.is_ascii() {
            return Err(DatasetError::Config(
                "delimiter must be a single ASCII character".to_string(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum DatasetError {
    #[error("file not found: {0}")]
    FileNotFound(String),
    #[error("parse error at row {row}: {message}")]
    Parse { row: u64, message: String },
    #[error("dataset has no data rows")]
    EmptyDataset,
    #[error("duplicate column name: {0}")]
    DuplicateColumnName(String),
    #[error("dataset must have at least one column")]
    NoColumns,
    #[error("column {column}: cell count {cells} does not match row count {rows}")]
    RaggedColumn {
        column: String,
        cells: usize,
        rows: usize,
    },
    #[error("column {column} has role {role} but is neither categorical nor boolean")]
    RoleConstraint { column: String, role: Role },
    #[error("invalid ingest configuration: {0}")]
    Config(String),
    #[error("invalid digest string: {0}")]
    BadDigest(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// An immutable typed table. Construct with [`Dataset::from_columns`] or
/// [`load_dataset`]; all invariants (equal column lengths, unique names,
/// digest over canonical bytes) are enforced at construction.
#[derive(Debug, Clone)]
pub struct Dataset {
    columns: Vec<Column>,
    row_count: usize,
    source_path: String,
    version_label: String,
    digest: Digest,
    ingest_warnings: Vec<String>,
}

impl Dataset {
    /// Build a dataset, deriving per-column dominance records, violation
    /// counts, and categorical tags from the current cells, then fingerprint
    /// the canonical form.
    pub fn from_columns(
        mut columns: Vec<Column>,
        source_path: impl Into<String>,
        version_label: impl Into<String>,
    ) -> Result<Self, DatasetError> {
        if columns.is_empty() {
            return Err(DatasetError::NoColumns);
        }
        let row_count = columns[0].cells.len();
        let mut seen = BTreeSet::new();
        for col in &columns {
            if col.name.is_empty() {
                return Err(DatasetError::Parse {
                    row: 1,
                    message: "empty column name".to_string(),
                });
            }
            if !seen.insert(col.name.clone()) {
                return Err(DatasetError::DuplicateColumnName(col.name.clone()));
            }
            if col.cells.len() != row_count {
                return Err(DatasetError::RaggedColumn {
                    column: col.name.clone(),
                    cells: col.cells.len(),
                    rows: row_count,
                });
            }
        }
        for col in &mut columns {
            derive_column_record(col, row_count);
        }
        for col in &columns {
            if matches!(col.role, Role::Target | Role::Protected) && !col.is_categorical_like() {
                return Err(DatasetError::RoleConstraint {
                    column: col.name.clone(),
                    role: col.role,
                });
            }
        }
        let mut ds = Dataset {
            columns,
            row_count,
            source_path: source_path.into(),
            version_label: version_label.into(),
            digest: Digest::ZERO,
            ingest_warnings: Vec::new(),
        };
        ds.digest = canonical_hash(&ds);
        Ok(ds)
    }

    pub(crate) fn push_warning(&mut self, warning: String) {
        self.ingest_warnings.push(warning);
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn column(&self, name: &str) -> Option<&Column> {
        self.columns.iter().find(|c| c.name == name)
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    pub fn row_count(&self) -> usize {
        self.row_count
    }

    pub fn column_count(&self) -> usize {
        self.columns.len()
    }

    pub fn source_path(&self) -> &str {
        &self.source_path
    }

    pub fn version_label(&self) -> &str {
        &self.version_label
    }

    /// Relabel this dataset version. Labels are metadata: the digest is
    /// unchanged.
    pub fn with_version_label(mut self, label: impl Into<String>) -> Self {
        self.version_label = label.into();
        self
    }

    /// SHA-256 of the canonical serialization. Covers data content only, not
    /// metadata, so lineage replay can verify transformations independently
    /// of annotations.
    pub fn digest(&self) -> Digest {
        self.digest
    }

    /// Warnings recorded at ingest (for example non-finite real tokens that
    /// became missing). Not part of the digest.
    pub fn ingest_warnings(&self) -> &[String] {
        &self.ingest_warnings
    }

    pub fn target_column(&self) -> Option<&Column> {
        self.columns.iter().find(|c| c.role == Role::Target)
    }

    pub fn protected_column(&self) -> Option<&Column> {
        self.columns.iter().find(|c| c.role == Role::Protected)
    }
}

/// Type a token under `ty`. Tokens that do not parse stay as text (and so
/// count as type violations); non-finite reals are kept as text too, rather
/// than silently becoming missing, since this path handles caller-supplied
/// values, not source-file ingestion.
pub(crate) fn cell_from_token(token: &str, ty: ValueType) -> Cell {
    match ty {
        ValueType::Integer => token
            .parse::<i64>()
            .map_or_else(|_| Cell::Text(token.to_string()), Cell::Int),
        ValueType::Real => match token.parse::<f64>() {
            Ok(v) if v.is_finite() => Cell::Real(v),
            _ => Cell::Text(token.to_string()),
        },
        ValueType::Boolean => {
            if token.eq_ignore_ascii_case("true") {
                Cell::Bool(true)
            } else if token.eq_ignore_ascii_case("false") {
                Cell::Bool(false)
            } else {
                Cell::Text(token.to_string())
            }
        }
        ValueType::Text => Cell::Text(token.to_string()),
    }
}

/// Recompute the dominance record, declared-type violation count, and
/// categorical tag from the column's current cells.
fn derive_column_record(col: &mut Column, row_count: usize) {
    let tokens: Vec<String> = col
        .cells
        .iter()
        .filter(|c| !c.is_missing())
        .map(|c| cell_token(c).into_owned())
        .collect();
    let token_refs: Vec<&str> = tokens.iter().map(String::as_str).collect();

    let record = infer::dominance_record(&token_refs);
    col.dominant_type = record.dominant_type;
    col.dominance = record.dominance;
    col.type_violations = token_refs
        .iter()
        .filter(|t| !token_matches(t, col.value_type))
        .count() as u64;

    let distinct: BTreeSet<&str> = token_refs.iter().copied().collect();
    let by_rule = distinct.len() <= infer::categorical_limit(row_count)
        && !tokens.is_empty()
        && matches!(
            col.value_type,
            ValueType::Text | ValueType::Integer | ValueType::Boolean
        );
    col.categorical = col.categorical_forced || by_rule;
}

#[cfg(test)]
mod tests {
    use super::*;

    fn int_col(name: &str, values: &[i64]) -> Column {
        Column::new(
            name,
            ValueType::Integer,
            Role::Feature,
            values.iter().map(|v| Cell::Int(*v)).collect(),
        )
    }

    #[test]
    fn digest_changes_with_content_and_column_order() {
        let a = Dataset::from_columns(
            vec![int_col("x", &[1, 2, 3]), int_col("y", &[4, 5, 6])],
            "mem",
            "baseline",
        )
        .unwrap();
        let b = Dataset::from_columns(
            vec![int_col("x", &[1, 2, 3]), int_col("y", &[4, 5, 7])],
            "mem",
            "baseline",
        )
        .unwrap();
        let c = Dataset::from_columns(
            vec![int_col("y", &[4, 5, 6]), int_col("x", &[1, 2, 3])],
            "mem",
            "baseline",
        )
        .unwrap();
        assert_ne!(a.digest(), b.digest());
        assert_ne!(a.digest(), c.digest());

        let a2 = Dataset::from_columns(
            vec![int_col("x", &[1, 2, 3]), int_col("y", &[4, 5, 6])],
            "elsewhere",
            "v2",
        )
        .unwrap();
        // Digest covers data content only, not metadata.
        assert_eq!(a.digest(), a2.digest());
    }

    #[test]
    fn duplicate_and_empty_names_rejected() {
        let err = Dataset::from_columns(
            vec![int_col("x", &[1]), int_col("x", &[2])],
            "mem",
            "baseline",
        )
        .unwrap_err();
        assert!(matches!(err, DatasetError::DuplicateColumnName(_)));

        let err =
            Dataset::from_columns(vec![int_col("", &[1])], "mem", "baseline").unwrap_err();
        assert!(matches!(err, DatasetError::Parse { .. }));
    }

    #[test]
    fn target_role_requires_categorical_or_boolean() {
        let mut many = int_col("t", &(0..100).collect::<Vec<_>>());
        many.role = Role::Target;
        let err = Dataset::from_columns(
            vec![many, int_col("x", &(0..100).map(|v| v * 2).collect::<Vec<_>>())],
            "mem",
            "baseline",
        )
        .unwrap_err();
        assert!(matches!(err, DatasetError::RoleConstraint { .. }));

        // 100 rows, 2 distinct values: tagged categorical, so the role is fine.
        let few = Column::new(
            "t",
            ValueType::Integer,
            Role::Target,
            (0..100).map(|i| Cell::Int(i % 2)).collect(),
        );
        let ds = Dataset::from_columns(
            vec![few, int_col("x", &(0..100).collect::<Vec<_>>())],
            "mem",
            "baseline",
        )
        .unwrap();
        assert!(ds.column("t").unwrap().categorical);
    }

    #[test]
    fn dominance_record_derived_from_cells() {
        let col = Column::new(
            "mixed",
            ValueType::Text,
            Role::Feature,
            vec![
                Cell::Text("1".into()),
                Cell::Text("2".into()),
                Cell::Text("3".into()),
                Cell::Text("x".into()),
            ],
        );
        let ds = Dataset::from_columns(vec![col], "mem", "baseline").unwrap();
        let c = ds.column("mixed").unwrap();
        assert_eq!(c.dominant_type, ValueType::Integer);
        assert_eq!(c.dominance, 0.75);
        assert_eq!(c.type_violations, 0); // declared Text: every token is text
    }
}
