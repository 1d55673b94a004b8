//! Service configuration, read from TOML.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use committee_core::{EngineConfig, ScorerConfig, StrategyParams};
use serde::{Deserialize, Serialize};

/// Environment variable naming the config file.
pub const CONFIG_ENV: &str = "COMMITTEE_CONFIG";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ApiConfig {
    pub corpus_path: PathBuf,
    pub port: u16,
    /// Days since the Unix epoch used as "today"; wall clock when absent.
    pub now_override: Option<i64>,
    pub seed: u64,
    /// Folder snapshots and trace logs are written here when set.
    pub snapshot_dir: Option<PathBuf>,
    pub scorer: ScorerConfig,
    pub batch_size: usize,
    pub per_strategy: usize,
    pub recency_window_days: i64,
    pub pool_size: usize,
    pub default_visible: usize,
}

impl Default for ApiConfig {
    fn default() -> Self {
        let s = StrategyParams::default();
        let e = EngineConfig::default();
        ApiConfig {
            corpus_path: PathBuf::from("corpus.jsonl"),
            port: 8080,
            now_override: None,
            seed: 0,
            snapshot_dir: None,
            scorer: ScorerConfig::default(),
            batch_size: s.batch_size,
            per_strategy: s.per_strategy,
            recency_window_days: s.recency_window_days,
            pool_size: s.pool_size,
            default_visible: e.default_visible,
        }
    }
}

impl ApiConfig {
    pub fn from_toml(text: &str) -> anyhow::Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        Self::from_toml(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    /// `explicit` wins over the environment variable; with neither, defaults.
    pub fn resolve(explicit: Option<&Path>) -> anyhow::Result<Self> {
        match explicit {
            Some(p) => Self::load(p),
            None => match std::env::var_os(CONFIG_ENV) {
                Some(p) => Self::load(Path::new(&p)),
                None => Ok(Self::default()),
            },
        }
    }

    pub fn engine_config(&self) -> EngineConfig {
        EngineConfig {
            scorer: self.scorer,
            strategy: StrategyParams {
                recency_window_days: self.recency_window_days,
                pool_size: self.pool_size,
                batch_size: self.batch_size,
                per_strategy: self.per_strategy,
                ..StrategyParams::default()
            },
            default_visible: self.default_visible,
            ..EngineConfig::default()
        }
    }

    pub fn now_day(&self) -> i64 {
        self.now_override.unwrap_or_else(today)
    }
}

/// Days since the Unix epoch, UTC.
pub fn today() -> i64 {
    chrono::Utc::now().timestamp().div_euclid(86_400)
}

/// Milliseconds since the Unix epoch.
pub fn now_millis() -> u64 {
    chrono::Utc::now().timestamp_millis().max(0) as u64
}
