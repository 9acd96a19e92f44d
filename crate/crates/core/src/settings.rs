//! On-disk configuration: a single TOML file with optional `[ingest]` and
//! `[assess]` tables mapping directly onto [`IngestConfig`] and
//! [`AssessConfig`]. Absent tables and keys fall back to defaults; unknown
//! keys and invalid values are errors.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dataset::{DatasetError, IngestConfig};
use crate::quality::AssessConfig;

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Settings {
    pub ingest: IngestConfig,
    pub assess: AssessConfig,
}

#[derive(Debug, thiserror::Error)]
pub enum SettingsError {
    #[error("cannot read settings: {0}")]
    Io(#[from] std::io::Error),
    #[error("invalid settings file: {0}")]
    Syntax(String),
    #[error(transparent)]
    Ingest(#[from] DatasetError),
    #[error("invalid assessment configuration: {0}")]
    Assess(String),
}

pub fn load_settings(path: impl AsRef<Path>) -> Result<Settings, SettingsError> {
    parse_settings(&std::fs::read_to_string(path)?)
}

pub fn parse_settings(source: &str) -> Result<Settings, SettingsError> {
    let settings: Settings =
        toml::from_str(source).map_err(|e| SettingsError::Syntax(e.to_string()))?;
    settings.ingest.validate()?;
    settings.assess.validate().map_err(SettingsError::Assess)?;
    Ok(settings)
}
