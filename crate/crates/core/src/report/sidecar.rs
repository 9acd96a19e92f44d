//! Sidecar metadata files: a small TOML document next to the data file that
//! carries what the data itself cannot say — name, ownership, licensing, and
//! governance context.

use std::collections::BTreeMap;
use std::path::Path;

use toml::Value;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Sidecar {
    pub name: Option<String>,
    pub description: Option<String>,
    pub owner: Option<String>,
    pub license: Option<String>,
    pub collection_process: Option<String>,
    pub intended_use: Option<String>,
    /// Unrecognized `[dataset]` keys, stringified.
    pub custom: BTreeMap<String, String>,
    pub governance: SidecarGovernance,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SidecarGovernance {
    pub steward: Option<String>,
    pub regulations: Vec<String>,
    pub contains_personal_data: Option<bool>,
    pub protected_attributes: Vec<String>,
    pub notes: Option<String>,
}

#[derive(Debug, thiserror::Error)]
pub enum SidecarError {
    #[error("sidecar i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("sidecar syntax error: {0}")]
    Syntax(String),
    #[error("sidecar describes a {data_type:?} dataset; only \"structured\" is supported")]
    Unsupported { data_type: String },
    #[error("invalid sidecar: {0}")]
    Invalid(String),
}

pub fn load_sidecar(path: impl AsRef<Path>) -> Result<Sidecar, SidecarError> {
    let source = std::fs::read_to_string(path)?;
    parse_sidecar(&source)
}

pub fn parse_sidecar(source: &str) -> Result<Sidecar, SidecarError> {
    let root: Value = source
        .parse()
        .map_err(|e: toml::de::Error| SidecarError::Syntax(e.to_string()))?;
    let Value::Table(mut root) = root else {
        return Err(SidecarError::Invalid("expected a TOML table".to_string()));
    };

    let mut sidecar = Sidecar::default();
    if let Some(dataset) = root.remove("dataset") {
        let Value::Table(table) = dataset else {
            return Err(SidecarError::Invalid("[dataset] must be a table".to_string()));
        };
        parse_dataset_table(table, &mut sidecar)?;
    }
    if let Some(governance) = root.remove("governance") {
        let Value::Table(table) = governance else {
            return Err(SidecarError::Invalid(
                "[governance] must be a table".to_string(),
            ));
        };
        sidecar.governance = parse_governance_table(table)?;
    }
    if let Some(key) = root.keys().next() {
        return Err(SidecarError::Invalid(format!(
            "unexpected top-level key {key:?} (expected [dataset] and [governance])"
        )));
    }
    Ok(sidecar)
}

fn opt_string(value: Value, key: &str) -> Result<String, SidecarError> {
    match value {
        Value::String(s) => Ok(s),
        other => Err(SidecarError::Invalid(format!(
            "{key} must be a string, got {}",
            other.type_str()
        ))),
    }
}

fn string_list(value: Value, key: &str) -> Result<Vec<String>, SidecarError> {
    let Value::Array(items) = value else {
        return Err(SidecarError::Invalid(format!("{key} must be an array of strings")));
    };
    items
        .into_iter()
        .map(|v| opt_string(v, key))
        .collect()
}

fn parse_dataset_table(
    table: toml::map::Map<String, Value>,
    sidecar: &mut Sidecar,
) -> Result<(), SidecarError> {
    for (key, value) in table {
        match key.as_str() {
            "name" => sidecar.name = Some(opt_string(value, "dataset.name")?),
            "description" => {
                sidecar.description = Some(opt_string(value, "dataset.description")?)
            }
            "owner" => sidecar.owner = Some(opt_string(value, "dataset.owner")?),
            "license" => sidecar.license = Some(opt_string(value, "dataset.license")?),
            "collection_process" => {
                sidecar.collection_process =
                    Some(opt_string(value, "dataset.collection_process")?)
            }
            "intended_use" => {
                sidecar.intended_use = Some(opt_string(value, "dataset.intended_use")?)
            }
            "data_type" => {
                let data_type = opt_string(value, "dataset.data_type")?;
                if data_type != "structured" {
                    return Err(SidecarError::Unsupported { data_type });
                }
            }
            _ => {
                let rendered = match value {
                    Value::String(s) => s,
                    Value::Integer(n) => n.to_string(),
                    Value::Float(f) => format!("{f:?}"),
                    Value::Boolean(b) => b.to_string(),
                    Value::Datetime(d) => d.to_string(),
                    other => {
                        return Err(SidecarError::Invalid(format!(
                            "dataset.{key} must be a scalar, got {}",
                            other.type_str()
                        )))
                    }
                };
                sidecar.custom.insert(key, rendered);
            }
        }
    }
    Ok(())
}

fn parse_governance_table(
    table: toml::map::Map<String, Value>,
) -> Result<SidecarGovernance, SidecarError> {
    let mut governance = SidecarGovernance::default();
    for (key, value) in table {
        match key.as_str() {
            "steward" => governance.steward = Some(opt_string(value, "governance.steward")?),
            "regulations" => {
                governance.regulations = string_list(value, "governance.regulations")?
            }
            "contains_personal_data" => match value {
                Value::Boolean(b) => governance.contains_personal_data = Some(b),
                other => {
                    return Err(SidecarError::Invalid(format!(
                        "governance.contains_personal_data must be a boolean, got {}",
                        other.type_str()
                    )))
                }
            },
            "protected_attributes" => {
                governance.protected_attributes =
                    string_list(value, "governance.protected_attributes")?
            }
            "notes" => governance.notes = Some(opt_string(value, "governance.notes")?),
            other => {
                return Err(SidecarError::Invalid(format!(
                    "unexpected governance key {other:?}"
                )))
            }
        }
    }
    Ok(governance)
}
