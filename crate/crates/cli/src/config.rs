//! Settings resolved from flags, then environment, then the config file.

use std::path::Path;

use drq_core::mars::MarsConfig;
use drq_core::mutation::ChatClientSpec;
use serde::Deserialize;

use crate::failure::Failure;

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub jobs: Option<usize>,
    pub mars: MarsSection,
    pub battle: BattleSection,
    pub drq: DrqSection,
    pub llm: ServiceSection,
    pub embed: ServiceSection,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MarsSection {
    pub preset: Option<String>,
    pub core_size: Option<u32>,
    pub max_cycles: Option<u32>,
    pub max_processes: Option<u32>,
    pub max_length: Option<u32>,
    pub min_separation: Option<u32>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BattleSection {
    pub seeds: Option<u32>,
    pub rng: Option<u64>,
    pub tie_epsilon: Option<f64>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DrqSection {
    pub rounds: Option<u32>,
    pub k: Option<String>,
    pub iters: Option<u64>,
    pub bins: Option<u32>,
    pub batch_size: Option<usize>,
    pub selection_candidates: Option<usize>,
    pub init_with_champions: Option<bool>,
}

/// An HTTP model service: chat for mutation, embeddings for analysis.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServiceSection {
    pub endpoint: Option<String>,
    pub model: Option<String>,
    pub key: Option<String>,
    pub timeout_secs: Option<f64>,
    pub max_retries: Option<u32>,
    pub temperature: Option<f64>,
    pub max_in_flight: Option<usize>,
    /// Directory of prompt templates (chat service only).
    pub prompts: Option<String>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, Failure> {
        let Some(path) = path else { return Ok(FileConfig::default()) };
        let text = std::fs::read_to_string(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
    }
}

pub fn preset(name: &str) -> Result<MarsConfig, Failure> {
    match name.to_ascii_lowercase().as_str() {
        "paper" => Ok(MarsConfig::PAPER),
        "desk" => Ok(MarsConfig::DESK),
        other => Err(Failure::input(format!("unknown preset `{other}` (expected paper or desk)"))),
    }
}

/// Flag values for the simulator; unset fields fall back to the file, then
/// to `base`.
#[derive(Clone, Debug, Default, clap::Args)]
pub struct MarsArgs {
    /// Base settings: paper (core 8000) or desk (core 800).
    #[arg(long)]
    pub preset: Option<String>,
    #[arg(long)]
    pub core_size: Option<u32>,
    /// Timesteps per battle.
    #[arg(long)]
    pub cycles: Option<u32>,
    /// Process limit per warrior.
    #[arg(long)]
    pub max_processes: Option<u32>,
    #[arg(long)]
    pub max_length: Option<u32>,
    /// Minimum gap between loaded warriors.
    #[arg(long)]
    pub min_distance: Option<u32>,
}

impl MarsArgs {
    pub fn resolve(&self, file: &MarsSection, base: MarsConfig) -> Result<MarsConfig, Failure> {
        let base = match self.preset.as_deref().or(file.preset.as_deref()) {
            Some(name) => preset(name)?,
            None => base,
        };
        let cfg = MarsConfig {
            core_size: self.core_size.or(file.core_size).unwrap_or(base.core_size),
            max_cycles: self.cycles.or(file.max_cycles).unwrap_or(base.max_cycles),
            max_processes: self.max_processes.or(file.max_processes).unwrap_or(base.max_processes),
            max_length: self.max_length.or(file.max_length).unwrap_or(base.max_length),
            min_separation: self.min_distance.or(file.min_separation).unwrap_or(base.min_separation),
        };
        cfg.validate().map_err(|e| Failure::input(e.to_string()))?;
        Ok(cfg)
    }

    pub fn is_set(&self) -> bool {
        self.preset.is_some()
            || self.core_size.is_some()
            || self.cycles.is_some()
            || self.max_processes.is_some()
            || self.max_length.is_some()
            || self.min_distance.is_some()
    }
}

#[derive(Clone, Debug, Default, clap::Args)]
pub struct BattleArgs {
    /// Independent placements averaged per battle.
    #[arg(long)]
    pub seeds: Option<u32>,
    /// Base seed for placements.
    #[arg(long)]
    pub rng: Option<u64>,
    /// Mean-fitness gap below which a 1-on-1 is a tie.
    #[arg(long)]
    pub tie_epsilon: Option<f64>,
}

pub struct BattleSettings {
    pub seeds: u32,
    pub rng: u64,
    pub tie_epsilon: f64,
}

impl BattleArgs {
    pub fn resolve(&self, file: &BattleSection) -> Result<BattleSettings, Failure> {
        let seeds = self.seeds.or(file.seeds).unwrap_or(20);
        if seeds == 0 {
            return Err(Failure::input("--seeds must be at least 1"));
        }
        let tie_epsilon = self.tie_epsilon.or(file.tie_epsilon).unwrap_or(drq_core::battle::DEFAULT_TIE_EPSILON);
        if !(tie_epsilon >= 0.0) {
            return Err(Failure::input("--tie-epsilon must be non-negative"));
        }
        Ok(BattleSettings { seeds, rng: self.rng.or(file.rng).unwrap_or(0), tie_epsilon })
    }
}

/// Reads `{prefix}_{name}` from the environment, ignoring empty values.
fn env_var(prefix: &str, name: &str) -> Option<String> {
    std::env::var(format!("{prefix}_{name}")).ok().filter(|v| !v.is_empty())
}

/// Endpoint, model and key with flags over `DRQ_LLM_*` / `DRQ_EMBED_*`
/// over the file section.
pub struct ServiceSettings {
    pub endpoint: Option<String>,
    pub model: Option<String>,
    pub key: Option<String>,
    pub timeout_secs: Option<f64>,
    pub max_retries: Option<u32>,
    pub temperature: Option<f64>,
    pub max_in_flight: Option<usize>,
    pub prompts: Option<String>,
}

impl ServiceSettings {
    pub fn resolve(flags: (Option<&str>, Option<&str>), env_prefix: &str, file: &ServiceSection) -> ServiceSettings {
        ServiceSettings {
            endpoint: flags.0.map(str::to_string).or_else(|| env_var(env_prefix, "ENDPOINT")).or(file.endpoint.clone()),
            model: flags.1.map(str::to_string).or_else(|| env_var(env_prefix, "MODEL")).or(file.model.clone()),
            key: env_var(env_prefix, "KEY").or(file.key.clone()),
            timeout_secs: file.timeout_secs,
            max_retries: file.max_retries,
            temperature: file.temperature,
            max_in_flight: file.max_in_flight,
            prompts: file.prompts.clone(),
        }
    }

    pub fn client_spec(&self, what: &str) -> Result<ChatClientSpec, Failure> {
        let endpoint = self.endpoint.clone().ok_or_else(|| Failure::input(format!("no {what} endpoint configured")))?;
        let model = self.model.clone().ok_or_else(|| Failure::input(format!("no {what} model configured")))?;
        let mut spec = ChatClientSpec::new(endpoint, model);
        spec.api_key = self.key.clone();
        if let Some(t) = self.timeout_secs {
            spec.timeout_secs = t;
        }
        if let Some(r) = self.max_retries {
            spec.max_retries = r;
        }
        if let Some(t) = self.temperature {
            spec.temperature = t;
        }
        if let Some(n) = self.max_in_flight {
            spec.max_in_flight = n.max(1);
        }
        if !(spec.timeout_secs > 0.0) {
            return Err(Failure::input(format!("{what} timeout must be positive")));
        }
        Ok(spec)
    }
}
