//! Application configuration from TOML or JSON.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::engine::EngineConfig;
use crate::error::{Error, Result};
use crate::gateway::ProviderConfig;
use crate::rubric::Lexicon;

/// Environment variable that overrides the configuration path.
pub const CONFIG_ENV: &str = "DEBATE_ARENA_CONFIG";

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct AppConfig {
    pub data_dir: Option<PathBuf>,
    pub providers: ProviderConfig,
    pub engine: EngineConfig,
    /// Replaces the shipped fallacy lexicon.
    pub lexicon_path: Option<PathBuf>,
}

impl AppConfig {
    /// Parses `.json` files as JSON and anything else as TOML.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
        AppConfig::parse(&text, json).map_err(|e| match e {
            Error::InvalidArgument(msg) => Error::invalid(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn parse(text: &str, json: bool) -> Result<Self> {
        let config: AppConfig = if json {
            serde_json::from_str(text).map_err(|e| Error::invalid(e.to_string()))?
        } else {
            toml::from_str(text).map_err(|e| Error::invalid(e.to_string()))?
        };
        config.validate()?;
        Ok(config)
    }

    /// Loads from `DEBATE_ARENA_CONFIG` when set, else from `path`, else
    /// returns the defaults.
    pub fn resolve(path: Option<&Path>) -> Result<Self> {
        let from_env = std::env::var_os(CONFIG_ENV)
            .filter(|v| !v.is_empty())
            .map(PathBuf::from);
        match from_env.as_deref().or(path) {
            Some(p) => AppConfig::load(p),
            None => Ok(AppConfig::default()),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.providers.validate()?;
        self.engine.validate()
    }

    pub fn lexicon(&self) -> Result<Lexicon> {
        match &self.lexicon_path {
            Some(p) => Lexicon::load(p),
            None => Ok(Lexicon::default()),
        }
    }
}
