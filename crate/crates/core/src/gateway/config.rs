use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Routing key for language-model work.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProviderRole {
    Topic,
    Opponent,
    Assistant,
    Evaluator,
}

impl ProviderRole {
    pub const ALL: [ProviderRole; 4] = [
        ProviderRole::Topic,
        ProviderRole::Opponent,
        ProviderRole::Assistant,
        ProviderRole::Evaluator,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ProviderRole::Topic => "topic",
            ProviderRole::Opponent => "opponent",
            ProviderRole::Assistant => "assistant",
            ProviderRole::Evaluator => "evaluator",
        }
    }
}

impl fmt::Display for ProviderRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ProviderRole {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ProviderRole::ALL
            .into_iter()
            .find(|r| r.as_str() == s)
            .ok_or_else(|| Error::invalid(format!("unknown provider role {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProviderKind {
    Http,
    Stub,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProviderEntry {
    pub kind: ProviderKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub endpoint: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    /// Name of the environment variable holding the bearer token.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub token_env: Option<String>,
    #[serde(default = "default_timeout_ms")]
    pub timeout_ms: u64,
    #[serde(default = "default_max_tokens")]
    pub max_tokens: u32,
    #[serde(default = "default_temperature")]
    pub temperature: f64,
}

fn default_timeout_ms() -> u64 {
    30_000
}

fn default_max_tokens() -> u32 {
    400
}

fn default_temperature() -> f64 {
    0.7
}

impl ProviderEntry {
    pub fn stub() -> Self {
        ProviderEntry {
            kind: ProviderKind::Stub,
            endpoint: None,
            model: None,
            token_env: None,
            timeout_ms: default_timeout_ms(),
            max_tokens: default_max_tokens(),
            temperature: default_temperature(),
        }
    }

    pub fn http(endpoint: impl Into<String>, model: impl Into<String>) -> Self {
        ProviderEntry {
            kind: ProviderKind::Http,
            endpoint: Some(endpoint.into()),
            model: Some(model.into()),
            ..ProviderEntry::stub()
        }
    }

    fn validate(&self, role: ProviderRole) -> Result<()> {
        if self.timeout_ms == 0 {
            return Err(Error::invalid(format!("{role}: timeout_ms must be positive")));
        }
        if !(self.temperature >= 0.0 && self.temperature.is_finite()) {
            return Err(Error::invalid(format!("{role}: temperature must be non-negative")));
        }
        if self.kind == ProviderKind::Http {
            if self.endpoint.as_deref().unwrap_or("").is_empty() {
                return Err(Error::invalid(format!("{role}: http provider needs an endpoint")));
            }
            if self.model.as_deref().unwrap_or("").is_empty() {
                return Err(Error::invalid(format!("{role}: http provider needs a model")));
            }
        }
        Ok(())
    }
}

/// Role-to-provider routing table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ProviderConfig {
    pub roles: BTreeMap<ProviderRole, ProviderEntry>,
}

impl Default for ProviderConfig {
    fn default() -> Self {
        ProviderConfig::all_stub()
    }
}

impl ProviderConfig {
    pub fn all_stub() -> Self {
        ProviderConfig {
            roles: ProviderRole::ALL
                .into_iter()
                .map(|r| (r, ProviderEntry::stub()))
                .collect(),
        }
    }

    /// Every role must be mapped and every entry well-formed.
    pub fn validate(&self) -> Result<()> {
        for role in ProviderRole::ALL {
            self.roles
                .get(&role)
                .ok_or_else(|| Error::invalid(format!("no provider configured for role {role}")))?
                .validate(role)?;
        }
        Ok(())
    }
}
