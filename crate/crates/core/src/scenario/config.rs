//! Scenario configuration: a TOML file whose keys mirror the command-line
//! flags, with flags taking precedence.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::consensus::NodeStrategy;
use crate::qchain::AttackKind;
use crate::timeline::PhotonId;

/// Upper bound on chain length: 10 blocks is a 20-qubit dense state.
pub const MAX_BLOCKS: usize = 10;
/// Upper bound on network size, one proposal qubit per node.
pub const MAX_NODES: usize = 16;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("config error in `{field}`: {message}")]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            field: field.into(),
            message: message.into(),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ScenarioKind {
    #[default]
    Roundtrip,
    Tamper,
    Consensus,
    Network,
    Compare,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

/// State a block source hands out for verification.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum SourceState {
    /// `(|0…0⟩ + |1…1⟩)/√2`
    #[default]
    Ghz,
    /// `|0…0⟩`
    Product,
}

/// `index:strategy`, e.g. `2:flip_report`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DishonestSpec {
    pub node: usize,
    pub strategy: NodeStrategy,
}

impl FromStr for DishonestSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (index, strategy) = s
            .split_once(':')
            .ok_or_else(|| format!("expected index:strategy, got {s:?}"))?;
        Ok(Self {
            node: index
                .parse()
                .map_err(|_| format!("bad node index {index:?}"))?,
            strategy: strategy.parse()?,
        })
    }
}

impl fmt::Display for DishonestSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.node, self.strategy)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AttackTarget {
    /// Whichever chain photon is newest when the attack runs.
    Live,
    Photon(PhotonId),
}

/// `kind:target`, where target is a photon id or `live`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AttackSpec {
    pub kind: AttackKind,
    pub target: AttackTarget,
}

impl Default for AttackSpec {
    fn default() -> Self {
        Self {
            kind: AttackKind::BitFlip,
            target: AttackTarget::Live,
        }
    }
}

impl FromStr for AttackSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (kind, target) = s.split_once(':').unwrap_or((s, "live"));
        let target = if target == "live" {
            AttackTarget::Live
        } else {
            AttackTarget::Photon(PhotonId(
                target
                    .parse()
                    .map_err(|_| format!("bad photon id {target:?}"))?,
            ))
        };
        Ok(Self {
            kind: kind.parse()?,
            target,
        })
    }
}

impl fmt::Display for AttackSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.target {
            AttackTarget::Live => write!(f, "{}:live", self.kind),
            AttackTarget::Photon(id) => write!(f, "{}:{}", self.kind, id.0),
        }
    }
}

macro_rules! string_serde {
    ($ty:ty) => {
        impl Serialize for $ty {
            fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                s.collect_str(self)
            }
        }

        impl<'de> Deserialize<'de> for $ty {
            fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
                String::deserialize(d)?
                    .parse()
                    .map_err(serde::de::Error::custom)
            }
        }
    };
}

string_serde!(DishonestSpec);
string_serde!(AttackSpec);

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: ScenarioKind,
    pub seed: u64,
    pub blocks: usize,
    pub nodes: usize,
    pub dishonest: Vec<DishonestSpec>,
    pub trials: usize,
    pub attack: AttackSpec,
    /// State the source distributes in `consensus` and `network` runs.
    pub state: SourceState,
    /// Block tampered with in the `compare` scenario.
    pub tamper_index: usize,
    /// Not echoed into reports, so equal runs written to different paths match.
    #[serde(skip_serializing)]
    pub output_path: Option<PathBuf>,
    pub format: Format,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            scenario: ScenarioKind::Roundtrip,
            seed: 0,
            blocks: 3,
            nodes: 3,
            dishonest: Vec::new(),
            trials: 100,
            attack: AttackSpec::default(),
            state: SourceState::Ghz,
            tamper_index: 2,
            output_path: None,
            format: Format::Json,
        }
    }
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| {
            let field = e
                .message()
                .split('`')
                .nth(1)
                .unwrap_or("config")
                .to_string();
            ConfigError::new(field, e.message().trim().to_string())
        })
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.blocks == 0 || self.blocks > MAX_BLOCKS {
            return Err(ConfigError::new(
                "blocks",
                format!("must be in 1..={MAX_BLOCKS}, got {}", self.blocks),
            ));
        }
        let min_nodes = match self.scenario {
            ScenarioKind::Consensus | ScenarioKind::Network => 2,
            _ => 1,
        };
        if self.nodes < min_nodes || self.nodes > MAX_NODES {
            return Err(ConfigError::new(
                "nodes",
                format!("must be in {min_nodes}..={MAX_NODES}, got {}", self.nodes),
            ));
        }
        if let Some(d) = self.dishonest.iter().find(|d| d.node >= self.nodes) {
            return Err(ConfigError::new(
                "dishonest",
                format!("node index {} must be < nodes ({})", d.node, self.nodes),
            ));
        }
        if self.trials == 0 {
            return Err(ConfigError::new("trials", "must be at least 1"));
        }
        if self.scenario == ScenarioKind::Compare && self.tamper_index >= self.blocks {
            return Err(ConfigError::new(
                "tamper_index",
                format!(
                    "must be < blocks ({}), got {}",
                    self.blocks, self.tamper_index
                ),
            ));
        }
        Ok(())
    }

    /// Per-node strategies: honest unless listed in `dishonest` (last entry wins).
    pub fn strategies(&self) -> Vec<NodeStrategy> {
        let mut out = vec![NodeStrategy::Honest; self.nodes];
        for d in &self.dishonest {
            if let Some(slot) = out.get_mut(d.node) {
                *slot = d.strategy;
            }
        }
        out
    }
}
