//! JSON snapshots of a policy and of a level buffer.
//!
//! Floats are written with shortest round-trip formatting and read back with
//! exact parsing, so a policy survives a save/load cycle bit for bit.

use std::path::Path;

use serde::{Deserialize, Serialize};
use ued_core::curriculum::{BufferEntry, LevelBuffer, ReplacementRule, ReplayConfig};
use ued_core::diversity::CosineKernel;
use ued_core::learner::PolicyParams;
use ued_core::maze::MazeConfig;

use crate::error::{read_to_string, write, LabError, Result};

pub const POLICY_FORMAT_VERSION: u32 = 1;
pub const BUFFER_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicySnapshot {
    pub format_version: u32,
    pub family_id: String,
    /// Observation dimension.
    pub d: usize,
    pub num_actions: usize,
    pub version: u64,
    /// Row-major, one row of `d` weights per action.
    pub actor_weights: Vec<f64>,
    pub critic_weights: Vec<f64>,
}

impl PolicySnapshot {
    pub fn new(params: &PolicyParams, family_id: &str) -> Self {
        Self {
            format_version: POLICY_FORMAT_VERSION,
            family_id: family_id.into(),
            d: params.dim,
            num_actions: params.num_actions,
            version: params.version,
            actor_weights: params.actor_weights.clone(),
            critic_weights: params.critic_weights.clone(),
        }
    }

    pub fn params(&self) -> ued_core::Result<PolicyParams> {
        PolicyParams::from_parts(
            self.num_actions,
            self.d,
            self.actor_weights.clone(),
            self.critic_weights.clone(),
            self.version,
        )
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("finite weights serialize")
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write(path, self.to_json() + "\n")
    }

    pub fn from_json(text: &str, path: &Path) -> Result<Self> {
        let snap: Self = serde_json::from_str(text).map_err(|e| LabError::parse(path, e.to_string()))?;
        if snap.format_version != POLICY_FORMAT_VERSION {
            return Err(LabError::parse(
                path,
                format!("unsupported policy format_version {}", snap.format_version),
            ));
        }
        snap.params().map_err(|e| LabError::parse(path, e.to_string()))?;
        Ok(snap)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&read_to_string(path)?, path)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleTag {
    Diversity,
    LearningPotential,
}

impl From<ReplacementRule> for RuleTag {
    fn from(r: ReplacementRule) -> Self {
        match r {
            ReplacementRule::Diversity => RuleTag::Diversity,
            ReplacementRule::LearningPotential => RuleTag::LearningPotential,
        }
    }
}

impl From<RuleTag> for ReplacementRule {
    fn from(r: RuleTag) -> Self {
        match r {
            RuleTag::Diversity => ReplacementRule::Diversity,
            RuleTag::LearningPotential => ReplacementRule::LearningPotential,
        }
    }
}

/// A buffer as stored: configuration plus every entry with its cached
/// scores and counters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BufferSnapshot {
    pub format_version: u32,
    /// Grid the level encodings refer to.
    pub maze: MazeConfig,
    pub config: ReplayConfig,
    pub rule: RuleTag,
    pub zero_norm_epsilon: f64,
    pub entries: Vec<BufferEntry>,
}

impl BufferSnapshot {
    pub fn new(buffer: &LevelBuffer, maze: MazeConfig) -> Self {
        Self {
            format_version: BUFFER_FORMAT_VERSION,
            maze,
            config: *buffer.config(),
            rule: buffer.rule().into(),
            zero_norm_epsilon: buffer.kernel().zero_norm_epsilon,
            entries: buffer.entries().to_vec(),
        }
    }

    /// Snapshot of a strategy that keeps no buffer.
    pub fn empty(maze: MazeConfig, config: ReplayConfig, zero_norm_epsilon: f64) -> Self {
        Self {
            format_version: BUFFER_FORMAT_VERSION,
            maze,
            config,
            rule: RuleTag::Diversity,
            zero_norm_epsilon,
            entries: Vec::new(),
        }
    }

    /// Rebuilds the buffer, keeping the stored cached scores as they are.
    pub fn buffer(&self) -> ued_core::Result<LevelBuffer> {
        LevelBuffer::from_parts(
            self.config,
            self.rule.into(),
            CosineKernel {
                zero_norm_epsilon: self.zero_norm_epsilon,
            },
            self.entries.clone(),
        )
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("finite scores serialize")
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write(path, self.to_json() + "\n")
    }

    pub fn from_json(text: &str, path: &Path) -> Result<Self> {
        let snap: Self = serde_json::from_str(text).map_err(|e| LabError::parse(path, e.to_string()))?;
        if snap.format_version != BUFFER_FORMAT_VERSION {
            return Err(LabError::parse(
                path,
                format!("unsupported buffer format_version {}", snap.format_version),
            ));
        }
        snap.buffer().map_err(|e| LabError::parse(path, e.to_string()))?;
        Ok(snap)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&read_to_string(path)?, path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn awkward_floats_round_trip_exactly() {
        let values = [
            0.1,
            1.0 / 3.0,
            -2.5e-300,
            5e-324,
            1.7976931348623157e308,
            -0.0,
            0.30000000000000004,
        ];
        let mut params = PolicyParams::zeros(3, 3);
        params
            .actor_weights
            .iter_mut()
            .zip(values.iter().cycle())
            .for_each(|(w, v)| *w = *v);
        params.critic_weights = vec![values[1], values[2], values[3]];
        params.version = 42;
        let snap = PolicySnapshot::new(&params, "maze");
        let back = PolicySnapshot::from_json(&snap.to_json(), Path::new("p.json")).unwrap();
        let restored = back.params().unwrap();
        let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<u64>>();
        assert_eq!(bits(&restored.actor_weights), bits(&params.actor_weights));
        assert_eq!(bits(&restored.critic_weights), bits(&params.critic_weights));
        assert_eq!(restored.version, 42);
    }

    #[test]
    fn mismatched_weight_count_is_a_parse_error() {
        let mut snap = PolicySnapshot::new(&PolicyParams::zeros(3, 2), "maze");
        snap.actor_weights.pop();
        let err = PolicySnapshot::from_json(&snap.to_json(), Path::new("p.json")).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn corrupt_buffer_is_a_parse_error() {
        let err = BufferSnapshot::from_json("{\"format_version\": 1,", Path::new("b.json")).unwrap_err();
        assert!(matches!(err, LabError::Parse { .. }));
    }
}
