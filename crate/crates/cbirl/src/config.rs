//! Experiment configuration (TOML). Unknown keys are rejected with their
//! full key path.

use std::path::{Path, PathBuf};

use cbirl_core::agent::AgentConfig;
use cbirl_core::case_base::RewardConfig;
use cbirl_core::env::{discretize_action_space, ChainWorld, GridWorld, MountainCar, PointMass};
use cbirl_core::equality::EqualityNetConfig;
use serde::{Deserialize, Serialize};

use crate::formats;
use crate::world::World;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("config key `{key}`: {message}")]
    Parse { key: String, message: String },
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum EnvConfig {
    Chain {
        cells: usize,
    },
    /// Either an open `width` x `height` grid or a map file.
    Grid {
        #[serde(default)]
        width: Option<usize>,
        #[serde(default)]
        height: Option<usize>,
        #[serde(default)]
        map: Option<PathBuf>,
    },
    MountainCar,
    PointMass {
        #[serde(default = "default_action_count")]
        actions: usize,
        #[serde(default)]
        action_seed: u64,
    },
}

fn default_action_count() -> usize {
    20
}

impl EnvConfig {
    /// Builds the environment. Relative map paths resolve against `base`.
    pub fn build(&self, base: &Path) -> Result<World, ConfigError> {
        let invalid = |e: &dyn std::fmt::Display| ConfigError::Invalid(e.to_string());
        Ok(match self {
            EnvConfig::Chain { cells } => World::chain(ChainWorld::new(*cells).map_err(|e| invalid(&e))?),
            EnvConfig::Grid { width, height, map } => match (width, height, map) {
                (None, None, Some(map)) => {
                    let text = formats::read(&base.join(map)).map_err(|e| invalid(&e))?;
                    World::grid(formats::parse_map(&text).map_err(|e| invalid(&e))?)
                }
                (Some(w), Some(h), None) => World::grid(GridWorld::open(*w, *h).map_err(|e| invalid(&e))?),
                _ => return Err(ConfigError::Invalid("grid needs either `map` or both `width` and `height`".into())),
            },
            EnvConfig::MountainCar => World::mountain_car(MountainCar),
            EnvConfig::PointMass { actions, action_seed } => World::point_mass(
                discretize_action_space(PointMass::new(), *actions, *action_seed).map_err(|e| invalid(&e))?,
            ),
        })
    }
}

/// Known scaling endpoints; when absent the harness measures them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Baselines {
    pub random: f64,
    pub expert: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExpertConfig {
    /// Environment steps of true-reward Q-learning.
    pub steps: usize,
    /// Minimum mean greedy true return for the expert to be accepted.
    pub threshold: f64,
    pub agent: AgentConfig,
    /// Seed of the expert's own training run.
    pub train_seed: u64,
    /// First seed tried when recording; later seeds are tried on failure.
    pub record_seed: u64,
    pub record_attempts: usize,
    /// Keep the frozen states after target entry in the recorded trajectory,
    /// so it spans the whole fixed-length episode.
    pub include_frozen_tail: bool,
    pub random_episodes: usize,
    pub expert_episodes: usize,
}

impl Default for ExpertConfig {
    fn default() -> Self {
        Self {
            steps: 50_000,
            threshold: 0.95,
            agent: AgentConfig {
                q_init: 1.0,
                ..AgentConfig::default()
            },
            train_seed: 0,
            record_seed: 0,
            record_attempts: 10,
            include_frozen_tail: false,
            random_episodes: 100,
            expert_episodes: 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub env: EnvConfig,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default = "default_total_steps")]
    pub total_steps: usize,
    #[serde(default = "default_eval_every")]
    pub eval_every: usize,
    #[serde(default = "default_eval_episodes")]
    pub eval_episodes: usize,
    #[serde(default = "default_subsample_k")]
    pub subsample_k: usize,
    /// Trajectory file with the (already subsampled) case base.
    #[serde(default)]
    pub case_base: Option<PathBuf>,
    #[serde(default)]
    pub baselines: Option<Baselines>,
    #[serde(default)]
    pub expert: ExpertConfig,
    #[serde(default)]
    pub reward: RewardConfig,
    #[serde(default)]
    pub equality: EqualityNetConfig,
    #[serde(default)]
    pub agent: AgentConfig,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sweep: Vec<SweepVariant>,
}

fn default_seeds() -> Vec<u64> {
    vec![0, 1, 2]
}
fn default_total_steps() -> usize {
    50_000
}
fn default_eval_every() -> usize {
    10_000
}
fn default_eval_episodes() -> usize {
    20
}
fn default_subsample_k() -> usize {
    10
}

/// One hyperparameter set of a sweep; unset fields keep the base value.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepVariant {
    pub name: String,
    pub tau: Option<f64>,
    pub mu: Option<f64>,
    pub alpha: Option<f64>,
    pub window_frame: Option<usize>,
    pub nu: Option<usize>,
}

impl ExperimentConfig {
    pub fn new(env: EnvConfig) -> Self {
        Self {
            env,
            seeds: default_seeds(),
            total_steps: default_total_steps(),
            eval_every: default_eval_every(),
            eval_episodes: default_eval_episodes(),
            subsample_k: default_subsample_k(),
            case_base: None,
            baselines: None,
            expert: ExpertConfig::default(),
            reward: RewardConfig::default(),
            equality: EqualityNetConfig::default(),
            agent: AgentConfig::default(),
            sweep: Vec::new(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let de = toml::Deserializer::parse(text).map_err(|e| ConfigError::Parse {
            key: String::from("<document>"),
            message: e.to_string(),
        })?;
        let cfg: Self = serde_path_to_error::deserialize(de).map_err(|e| ConfigError::Parse {
            key: e.path().to_string(),
            message: e.inner().message().to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration is always serialisable")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |what: &str, e: &dyn std::fmt::Display| ConfigError::Invalid(format!("{what}: {e}"));
        if self.seeds.is_empty() {
            return Err(ConfigError::Invalid("seeds must not be empty".into()));
        }
        if self.total_steps == 0 || self.eval_every == 0 || self.eval_episodes == 0 {
            return Err(ConfigError::Invalid(
                "total_steps, eval_every and eval_episodes must be >= 1".into(),
            ));
        }
        if self.subsample_k == 0 {
            return Err(ConfigError::Invalid("subsample_k must be >= 1".into()));
        }
        self.reward.validate().map_err(|e| invalid("reward", &e))?;
        self.equality.validate().map_err(|e| invalid("equality", &e))?;
        self.agent.validate().map_err(|e| invalid("agent", &e))?;
        self.expert.agent.validate().map_err(|e| invalid("expert.agent", &e))?;
        if self.expert.record_attempts == 0 || self.expert.random_episodes == 0 || self.expert.expert_episodes == 0 {
            return Err(ConfigError::Invalid(
                "expert.record_attempts, random_episodes and expert_episodes must be >= 1".into(),
            ));
        }
        if let Some(b) = self.baselines {
            if b.random == b.expert {
                return Err(ConfigError::Invalid("baselines: degenerate scaling (random == expert)".into()));
            }
        }
        for v in &self.sweep {
            self.apply(v).map_err(|e| ConfigError::Invalid(format!("sweep variant `{}`: {e}", v.name)))?;
        }
        Ok(())
    }

    /// The configuration with a sweep variant's overrides applied.
    pub fn apply(&self, variant: &SweepVariant) -> Result<Self, ConfigError> {
        let mut cfg = self.clone();
        cfg.sweep.clear();
        if let Some(v) = variant.tau {
            cfg.reward.tau = v;
        }
        if let Some(v) = variant.mu {
            cfg.reward.mu = v;
        }
        if let Some(v) = variant.alpha {
            cfg.reward.alpha = v;
        }
        if let Some(v) = variant.window_frame {
            cfg.equality.window_frame = v;
        }
        if let Some(v) = variant.nu {
            cfg.equality.nu = v;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// The sweep's variants, or five around the current threshold and
    /// shaping coefficient when none are configured.
    pub fn sweep_variants(&self) -> Vec<SweepVariant> {
        if !self.sweep.is_empty() {
            return self.sweep.clone();
        }
        let tau = self.reward.tau;
        [
            ("base", None, None),
            ("tau-low", Some((tau - 0.2).max(0.05)), None),
            ("tau-high", Some((tau + 0.05).min(0.99)), None),
            ("alpha-half", None, Some(0.5)),
            ("alpha-zero", None, Some(0.0)),
        ]
        .into_iter()
        .map(|(name, tau, alpha)| SweepVariant {
            name: name.into(),
            tau,
            alpha,
            ..SweepVariant::default()
        })
        .collect()
    }
}
