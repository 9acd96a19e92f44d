//! Plan document parsing. Validation is hand-rolled over the parsed TOML
//! tree so that errors name the offending step, parameter, and constraint
//! instead of surfacing as generic deserialization failures.

use std::collections::BTreeMap;
use std::str::FromStr;

use chrono::{DateTime, Utc};
use toml::Value;

use super::{
    Actor, ImputeStrategy, Persona, PlanError, RemediationPlan, RemediationStep, StepAction,
    TextTransform,
};

/// Parse and validate a plan document. `default_created_at` is used when the
/// document does not carry its own `created_at`.
pub fn parse_plan(
    source: &str,
    default_created_at: DateTime<Utc>,
) -> Result<RemediationPlan, PlanError> {
    let root: Value = source
        .parse()
        .map_err(|e: toml::de::Error| PlanError::Syntax(e.to_string()))?;
    let table = root
        .as_table()
        .ok_or_else(|| PlanError::Invalid("plan document must be a table".to_string()))?;
    for key in table.keys() {
        if !matches!(key.as_str(), "plan_id" | "actor" | "created_at" | "steps") {
            return Err(PlanError::Invalid(format!(
                "unknown top-level key {key:?}"
            )));
        }
    }

    let plan_id = match table.get("plan_id").and_then(Value::as_str) {
        Some(s) if !s.is_empty() => s.to_string(),
        Some(_) => return Err(PlanError::Invalid("plan_id must be non-empty".to_string())),
        None => {
            return Err(PlanError::Invalid(
                "missing required field plan_id (string)".to_string(),
            ))
        }
    };

    let created_at = match table.get("created_at") {
        None => default_created_at,
        Some(v) => parse_timestamp(v)?,
    };

    let actor = parse_actor(table.get("actor"))?;

    let steps_value = table
        .get("steps")
        .ok_or_else(|| PlanError::Invalid("missing required field steps".to_string()))?;
    let steps_raw = steps_value
        .as_array()
        .ok_or_else(|| PlanError::Invalid("steps must be an array of tables".to_string()))?;
    if steps_raw.is_empty() {
        return Err(PlanError::Invalid(
            "a plan must contain at least one step".to_string(),
        ));
    }

    let mut steps = Vec::with_capacity(steps_raw.len());
    for (i, raw) in steps_raw.iter().enumerate() {
        steps.push(parse_step(i + 1, raw, &actor)?);
    }

    Ok(RemediationPlan {
        plan_id,
        actor,
        created_at,
        steps,
    })
}

fn parse_timestamp(value: &Value) -> Result<DateTime<Utc>, PlanError> {
    let text = match value {
        Value::String(s) => s.clone(),
        // TOML has a native datetime type; normalize through its display form.
        Value::Datetime(d) => d.to_string(),
        other => {
            return Err(PlanError::Invalid(format!(
                "created_at must be an RFC 3339 timestamp, got {other:?}"
            )))
        }
    };
    DateTime::parse_from_rfc3339(&text)
        .map(|t| t.with_timezone(&Utc))
        .map_err(|e| PlanError::Invalid(format!("created_at: {e}")))
}

fn parse_actor(value: Option<&Value>) -> Result<Actor, PlanError> {
    let table = value
        .and_then(Value::as_table)
        .ok_or_else(|| PlanError::Invalid("missing required table [actor]".to_string()))?;
    for key in table.keys() {
        if !matches!(key.as_str(), "name" | "persona") {
            return Err(PlanError::Invalid(format!("actor: unknown key {key:?}")));
        }
    }
    let name = match table.get("name").and_then(Value::as_str) {
        Some(s) if !s.is_empty() => s.to_string(),
        _ => {
            return Err(PlanError::Invalid(
                "actor.name must be a non-empty string".to_string(),
            ))
        }
    };
    let persona_raw = table
        .get("persona")
        .and_then(Value::as_str)
        .ok_or_else(|| PlanError::Invalid("actor.persona must be a string".to_string()))?;
    let persona = Persona::from_str(persona_raw).map_err(PlanError::Invalid)?;
    Ok(Actor { name, persona })
}

/// Accessor over a step's `params` table that tracks which keys were
/// consumed, so leftovers can be reported as errors.
struct Params {
    index: usize,
    kind: String,
    table: toml::map::Map<String, Value>,
}

impl Params {
    fn missing(&self, name: &str) -> PlanError {
        PlanError::MissingParameter {
            index: self.index,
            kind: self.kind.clone(),
            name: name.to_string(),
        }
    }

    fn invalid(&self, name: &str, message: impl Into<String>) -> PlanError {
        PlanError::InvalidParameterValue {
            index: self.index,
            kind: self.kind.clone(),
            name: name.to_string(),
            message: message.into(),
        }
    }

    fn take(&mut self, name: &str) -> Option<Value> {
        self.table.remove(name)
    }

    fn req_string(&mut self, name: &str) -> Result<String, PlanError> {
        match self.take(name) {
            Some(Value::String(s)) if !s.is_empty() => Ok(s),
            Some(_) => Err(self.invalid(name, "expected a non-empty string")),
            None => Err(self.missing(name)),
        }
    }

    fn req_number(&mut self, name: &str) -> Result<f64, PlanError> {
        match self.take(name) {
            Some(Value::Float(f)) => Ok(f),
            Some(Value::Integer(i)) => Ok(i as f64),
            Some(_) => Err(self.invalid(name, "expected a number")),
            None => Err(self.missing(name)),
        }
    }

    fn req_ratio(&mut self, name: &str) -> Result<f64, PlanError> {
        let v = self.req_number(name)?;
        if v.is_finite() && v > 0.0 && v <= 1.0 {
            Ok(v)
        } else {
            Err(self.invalid(name, format!("{v} is outside (0, 1]")))
        }
    }

    fn req_multiplier(&mut self, name: &str) -> Result<f64, PlanError> {
        let v = self.req_number(name)?;
        if v.is_finite() && v > 0.0 {
            Ok(v)
        } else {
            Err(self.invalid(name, format!("{v} is not a positive number")))
        }
    }

    fn req_u64(&mut self, name: &str) -> Result<u64, PlanError> {
        match self.take(name) {
            Some(Value::Integer(i)) if i >= 0 => Ok(i as u64),
            Some(_) => Err(self.invalid(name, "expected a non-negative integer")),
            None => Err(self.missing(name)),
        }
    }

    fn column_list(&mut self, name: &str) -> Result<Vec<String>, PlanError> {
        let raw = self.take(name).ok_or_else(|| self.missing(name))?;
        let arr = raw
            .as_array()
            .ok_or_else(|| self.invalid(name, "expected an array of column names"))?;
        if arr.is_empty() {
            return Err(self.invalid(name, "column list must be non-empty"));
        }
        arr.iter()
            .map(|v| match v.as_str() {
                Some(s) if !s.is_empty() => Ok(s.to_string()),
                _ => Err(self.invalid(name, "column names must be non-empty strings")),
            })
            .collect()
    }

    fn finish(self) -> Result<(), PlanError> {
        match self.table.keys().next() {
            None => Ok(()),
            Some(extra) => {
                let msg = format!("parameter not recognized for kind {:?}", self.kind);
                Err(PlanError::InvalidParameterValue {
                    index: self.index,
                    kind: self.kind,
                    name: extra.clone(),
                    message: msg,
                })
            }
        }
    }
}

fn scalar_to_token(params: &Params, name: &str, value: Value) -> Result<String, PlanError> {
    match value {
        Value::String(s) => Ok(s),
        Value::Integer(i) => Ok(i.to_string()),
        Value::Float(f) => Ok(format!("{f:?}")),
        Value::Boolean(b) => Ok(b.to_string()),
        _ => Err(params.invalid(name, "expected a scalar value")),
    }
}

fn parse_step(index: usize, raw: &Value, actor: &Actor) -> Result<RemediationStep, PlanError> {
    let table = raw
        .as_table()
        .ok_or_else(|| PlanError::Invalid(format!("step {index}: expected a table")))?;
    for key in table.keys() {
        if !matches!(key.as_str(), "kind" | "params" | "rationale") {
            return Err(PlanError::Invalid(format!(
                "step {index}: unknown key {key:?}"
            )));
        }
    }
    let kind = table
        .get("kind")
        .and_then(Value::as_str)
        .ok_or_else(|| PlanError::Invalid(format!("step {index}: missing kind (string)")))?
        .to_string();
    let rationale = match table.get("rationale") {
        None => String::new(),
        Some(Value::String(s)) => s.clone(),
        Some(_) => {
            return Err(PlanError::Invalid(format!(
                "step {index}: rationale must be a string"
            )))
        }
    };
    let params_table = match table.get("params") {
        None => toml::map::Map::new(),
        Some(Value::Table(t)) => t.clone(),
        Some(_) => {
            return Err(PlanError::Invalid(format!(
                "step {index}: params must be a table"
            )))
        }
    };
    let mut params = Params {
        index,
        kind: kind.clone(),
        table: params_table,
    };

    let action = match kind.as_str() {
        "impute" => {
            let column = params.req_string("column")?;
            let strategy_name = params.req_string("strategy")?;
            let strategy = match strategy_name.as_str() {
                "mean" => ImputeStrategy::Mean,
                "median" => ImputeStrategy::Median,
                "mode" => ImputeStrategy::Mode,
                "constant" => {
                    let raw = params.take("value").ok_or_else(|| params.missing("value"))?;
                    let token = scalar_to_token(&params, "value", raw)?;
                    if token.is_empty() {
                        // An empty token is indistinguishable from a missing
                        // cell in canonical form.
                        return Err(params.invalid("value", "constant must be non-empty"));
                    }
                    ImputeStrategy::Constant(token)
                }
                other => {
                    return Err(params.invalid(
                        "strategy",
                        format!("unknown strategy {other:?} (mean, median, mode, constant)"),
                    ))
                }
            };
            StepAction::Impute { column, strategy }
        }
        "drop_rows_missing" => {
            let columns = if params.table.contains_key("columns") {
                Some(params.column_list("columns")?)
            } else {
                None
            };
            StepAction::DropRowsMissing { columns }
        }
        "drop_column" => StepAction::DropColumn {
            column: params.req_string("column")?,
        },
        "cap_outliers" => StepAction::CapOutliers {
            columns: params.column_list("columns")?,
            multiplier: params.req_multiplier("multiplier")?,
        },
        "drop_outlier_rows" => StepAction::DropOutlierRows {
            columns: params.column_list("columns")?,
            multiplier: params.req_multiplier("multiplier")?,
        },
        "oversample" => StepAction::Oversample {
            ratio: params.req_ratio("ratio")?,
            seed: params.req_u64("seed")?,
        },
        "undersample" => StepAction::Undersample {
            ratio: params.req_ratio("ratio")?,
            seed: params.req_u64("seed")?,
        },
        "dedupe" => StepAction::Dedupe,
        "normalize_values" => {
            let column = params.req_string("column")?;
            let raw = params
                .take("transforms")
                .ok_or_else(|| params.missing("transforms"))?;
            let arr = raw
                .as_array()
                .filter(|a| !a.is_empty())
                .ok_or_else(|| {
                    params.invalid("transforms", "expected a non-empty array of transforms")
                })?;
            let mut transforms = Vec::with_capacity(arr.len());
            for entry in arr {
                transforms.push(parse_transform(&params, entry)?);
            }
            StepAction::NormalizeValues { column, transforms }
        }
        "drop_flagged_labels" => {
            let k = params.req_u64("k")?;
            if k == 0 {
                return Err(params.invalid("k", "neighbor count must be at least 1"));
            }
            StepAction::DropFlaggedLabels {
                k: k as usize,
                threshold: params.req_ratio("threshold")?,
            }
        }
        other => {
            return Err(PlanError::UnknownStepKind {
                index,
                kind: other.to_string(),
            })
        }
    };
    params.finish()?;

    Ok(RemediationStep {
        action,
        rationale,
        actor: actor.clone(),
    })
}

fn parse_transform(params: &Params, entry: &Value) -> Result<TextTransform, PlanError> {
    match entry {
        Value::String(s) => match s.as_str() {
            "trim" => Ok(TextTransform::Trim),
            "lowercase" => Ok(TextTransform::Lowercase),
            other => Err(params.invalid(
                "transforms",
                format!("unknown transform {other:?} (trim, lowercase, or a map table)"),
            )),
        },
        Value::Table(t) => {
            let map_value = t.get("map").ok_or_else(|| {
                params.invalid("transforms", "transform tables must have a single key: map")
            })?;
            if t.len() != 1 {
                return Err(
                    params.invalid("transforms", "transform tables must have a single key: map")
                );
            }
            let entries = map_value
                .as_table()
                .ok_or_else(|| params.invalid("transforms", "map must be a table"))?;
            let mut map = BTreeMap::new();
            for (from, to) in entries {
                map.insert(
                    from.clone(),
                    scalar_to_token(params, "transforms", to.clone())?,
                );
            }
            Ok(TextTransform::Map(map))
        }
        _ => Err(params.invalid(
            "transforms",
            "each transform must be a string or a { map = {...} } table",
        )),
    }
}
