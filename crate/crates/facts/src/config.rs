//! Server configuration: a TOML file whose fields can each be overridden on
//! the command line.

use std::path::Path;
use std::time::Duration;

use facts_core::params::DEFAULT_LAMBDA;
use facts_core::UserId;
use serde::{Deserialize, Serialize};

use crate::error::FactsError;
use crate::server::Credential;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServerConfig {
    pub listen: String,
    /// Number of registered users `c`.
    pub users: usize,
    /// Complaint cap per epoch.
    pub n: u64,
    /// Audit threshold.
    pub t: u64,
    /// Per-user complaint quota `L`.
    pub quota: u32,
    pub lambda: u32,
    pub session_deadline_ms: u64,
    /// Automatic epoch rollover period; `None` keeps one epoch until reset.
    pub epoch_length_secs: Option<u64>,
    /// Re-run TestCount on audit requests before opening the tag.
    pub audit_recheck: bool,
}

impl Default for ServerConfig {
    fn default() -> Self {
        ServerConfig {
            listen: "127.0.0.1:7420".into(),
            users: 100,
            n: 100_000,
            t: 100,
            quota: 10,
            lambda: DEFAULT_LAMBDA,
            session_deadline_ms: 5_000,
            epoch_length_secs: None,
            audit_recheck: false,
        }
    }
}

impl ServerConfig {
    pub fn load(path: &Path) -> Result<Self, FactsError> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text)
    }

    pub fn from_toml(text: &str) -> Result<Self, FactsError> {
        toml::from_str(text).map_err(|e| FactsError::Config(e.to_string()))
    }

    pub fn session_deadline(&self) -> Duration {
        Duration::from_millis(self.session_deadline_ms)
    }

    pub fn epoch_length(&self) -> Option<Duration> {
        self.epoch_length_secs.map(Duration::from_secs)
    }
}

/// Credentials written by `facts serve` for the client commands.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CredentialsFile {
    pub server: String,
    /// Hex Ed25519 verifying key.
    pub server_key: String,
    pub users: Vec<CredentialEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CredentialEntry {
    pub id: String,
    /// Hex bearer token.
    pub token: String,
}

impl CredentialsFile {
    pub fn new(server: String, server_key: &[u8; 32], creds: &[Credential]) -> Self {
        CredentialsFile {
            server,
            server_key: hex::encode(server_key),
            users: creds
                .iter()
                .map(|c| CredentialEntry {
                    id: c.id.to_string(),
                    token: hex::encode(c.token),
                })
                .collect(),
        }
    }

    pub fn load(path: &Path) -> Result<Self, FactsError> {
        serde_json::from_str(&std::fs::read_to_string(path)?).map_err(|e| FactsError::Config(e.to_string()))
    }

    pub fn save(&self, path: &Path) -> Result<(), FactsError> {
        let text = serde_json::to_string_pretty(self).map_err(|e| FactsError::Config(e.to_string()))?;
        std::fs::write(path, text)?;
        Ok(())
    }

    /// The named user's credential, or the first one.
    pub fn credential(&self, user: Option<&str>) -> Result<Credential, FactsError> {
        let entry = match user {
            Some(u) => self.users.iter().find(|e| e.id == u),
            None => self.users.first(),
        }
        .ok_or_else(|| FactsError::Config(format!("no credentials for {}", user.unwrap_or("any user"))))?;
        let token = hex::decode(&entry.token)
            .ok()
            .and_then(|t| <[u8; 32]>::try_from(t).ok())
            .ok_or_else(|| FactsError::Config(format!("bad token for {}", entry.id)))?;
        Ok(Credential {
            id: UserId::new(entry.id.clone())?,
            token,
        })
    }
}
