//! Column type inference over raw source tokens.

use super::ValueType;

/// Outcome of inference for one column.
#[derive(Debug, Clone, PartialEq)]
pub struct Inference {
    /// Declared type: the winning candidate when its match fraction reaches
    /// the dominance threshold, otherwise `Text`.
    pub value_type: ValueType,
    /// Non-missing tokens that do not parse as the declared type.
    pub violations: u64,
    /// Best-matching candidate regardless of threshold (`Text` only when no
    /// candidate matches at all).
    pub dominant_type: ValueType,
    /// Fraction of non-missing tokens matching `dominant_type`.
    pub dominance: f64,
    /// Low-cardinality tag; only text, integer, and boolean columns qualify.
    pub categorical: bool,
}

/// Does `token` parse as `ty` under canonical rules? Boolean accepts only
/// `true`/`false` case-insensitively (so `1`/`0` columns stay integer); real
/// accepts any finite `f64` token; text accepts everything.
pub fn token_matches(token: &str, ty: ValueType) -> bool {
    match ty {
        ValueType::Boolean => {
            token.eq_ignore_ascii_case("true") || token.eq_ignore_ascii_case("false")
        }
        ValueType::Integer => token.parse::<i64>().is_ok(),
        ValueType::Real => token.parse::<f64>().map(f64::is_finite).unwrap_or(false),
        ValueType::Text => true,
    }
}

pub(crate) struct DominanceRecord {
    pub dominant_type: ValueType,
    pub dominance: f64,
}

/// Best candidate type by match fraction; ties break toward the more
/// specific type (boolean > integer > real, since every integer token is
/// also a real token).
pub(crate) fn dominance_record(tokens: &[&str]) -> DominanceRecord {
    if tokens.is_empty() {
        return DominanceRecord {
            dominant_type: ValueType::Text,
            dominance: 1.0,
        };
    }
    let total = tokens.len() as f64;
    let candidates = [ValueType::Boolean, ValueType::Integer, ValueType::Real];
    let mut best: Option<(ValueType, f64)> = None;
    for ty in candidates {
        let matched = tokens.iter().filter(|t| token_matches(t, ty)).count();
        if matched == 0 {
            continue;
        }
        let fraction = matched as f64 / total;
        // Strict `>` keeps the earlier (more specific) candidate on ties.
        if best.map_or(true, |(_, f)| fraction > f) {
            best = Some((ty, fraction));
        }
    }
    match best {
        Some((dominant_type, dominance)) => DominanceRecord {
            dominant_type,
            dominance,
        },
        None => DominanceRecord {
            dominant_type: ValueType::Text,
            dominance: 1.0,
        },
    }
}

/// Distinct-value ceiling for the categorical tag: `max(20, 5% of rows)`.
pub(crate) fn categorical_limit(row_count: usize) -> usize {
    20usize.max((row_count as f64 * 0.05).floor() as usize)
}

/// Infer a column's declared type from its non-missing source tokens.
/// `row_count` is the dataset's full row count (used by the cardinality
/// rule), which can exceed `tokens.len()` when some cells are missing.
pub fn infer_column(tokens: &[&str], row_count: usize, threshold: f64) -> Inference {
    let record = dominance_record(tokens);
    let value_type = if record.dominance >= threshold {
        record.dominant_type
    } else {
        ValueType::Text
    };
    let violations = tokens
        .iter()
        .filter(|t| !token_matches(t, value_type))
        .count() as u64;
    let distinct: std::collections::BTreeSet<&str> = tokens.iter().copied().collect();
    let categorical = !tokens.is_empty()
        && distinct.len() <= categorical_limit(row_count)
        && matches!(
            value_type,
            ValueType::Text | ValueType::Integer | ValueType::Boolean
        );
    Inference {
        value_type,
        violations,
        dominant_type: record.dominant_type,
        dominance: record.dominance,
        categorical,
    }
}
