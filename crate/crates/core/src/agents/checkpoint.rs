//! Versioned binary checkpoints.
//!
//! Layout: the 8-byte magic, a little-endian `u32` format version, a `u32`
//! header length followed by a JSON header, then for each agent the policy
//! and value parameters as little-endian `f32` runs whose lengths come from
//! the header.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::nn::PolicySpec;
use crate::env::{AgentRole, EnvMode};
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 8] = b"CHPLCKPT";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct AgentParams {
    pub role: AgentRole,
    pub spec: PolicySpec,
    pub value_steps: usize,
    pub policy: Vec<f32>,
    pub value: Vec<f32>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub update: usize,
    pub mode: EnvMode,
    /// Digest of the training configuration that produced the parameters.
    pub train_digest: String,
    pub agents: Vec<AgentParams>,
}

#[derive(Serialize, Deserialize)]
struct Header {
    update: usize,
    mode: EnvMode,
    train_digest: String,
    agents: Vec<AgentHeader>,
}

#[derive(Serialize, Deserialize)]
struct AgentHeader {
    role: AgentRole,
    spec: PolicySpec,
    value_steps: usize,
    policy_len: usize,
    value_len: usize,
}

impl Checkpoint {
    pub fn to_bytes(&self) -> Vec<u8> {
        let header = Header {
            update: self.update,
            mode: self.mode,
            train_digest: self.train_digest.clone(),
            agents: self
                .agents
                .iter()
                .map(|a| AgentHeader {
                    role: a.role,
                    spec: a.spec.clone(),
                    value_steps: a.value_steps,
                    policy_len: a.policy.len(),
                    value_len: a.value.len(),
                })
                .collect(),
        };
        let json = serde_json::to_vec(&header).expect("header serializes");
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        out.extend_from_slice(&(json.len() as u32).to_le_bytes());
        out.extend_from_slice(&json);
        for a in &self.agents {
            for v in a.policy.iter().chain(&a.value) {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8], path: &Path) -> Result<Self> {
        let bad = |m: &str| Error::format(path, m.to_string());
        let mut cur = bytes;
        let mut take = |n: usize| -> Result<&[u8]> {
            if cur.len() < n {
                return Err(bad("truncated checkpoint"));
            }
            let (head, rest) = cur.split_at(n);
            cur = rest;
            Ok(head)
        };
        if take(8)? != MAGIC {
            return Err(bad("not a checkpoint file"));
        }
        let version = u32::from_le_bytes(take(4)?.try_into().unwrap());
        if version != FORMAT_VERSION {
            return Err(bad(&format!("unsupported checkpoint version {version}")));
        }
        let hlen = u32::from_le_bytes(take(4)?.try_into().unwrap()) as usize;
        let header: Header =
            serde_json::from_slice(take(hlen)?).map_err(|e| bad(&format!("checkpoint header: {e}")))?;
        let mut floats = |n: usize| -> Result<Vec<f32>> {
            Ok(take(4 * n)?
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
                .collect())
        };
        let mut agents = Vec::with_capacity(header.agents.len());
        for a in header.agents {
            let policy = floats(a.policy_len)?;
            let value = floats(a.value_len)?;
            agents.push(AgentParams {
                role: a.role,
                spec: a.spec,
                value_steps: a.value_steps,
                policy,
                value,
            });
        }
        if !cur.is_empty() {
            return Err(bad("trailing bytes after checkpoint"));
        }
        Ok(Checkpoint {
            update: header.update,
            mode: header.mode,
            train_digest: header.train_digest,
            agents,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Checkpoint::from_bytes(&bytes, path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agents::nn::ConvSpec;

    fn sample() -> Checkpoint {
        Checkpoint {
            update: 7,
            mode: EnvMode::Navigator,
            train_digest: "abc".into(),
            agents: vec![
                AgentParams {
                    role: AgentRole::Thermal,
                    spec: PolicySpec {
                        in_channels: 4,
                        grid_n: 3,
                        hidden: vec![ConvSpec::new(2, 3, 1)],
                    },
                    value_steps: 2,
                    policy: vec![1.5, -0.25, f32::MIN_POSITIVE],
                    value: vec![0.0, 1.0, 2.0],
                },
                AgentParams {
                    role: AgentRole::Wire,
                    spec: PolicySpec {
                        in_channels: 5,
                        grid_n: 3,
                        hidden: vec![],
                    },
                    value_steps: 2,
                    policy: vec![3.0],
                    value: vec![-1.0, 0.5, 0.25],
                },
            ],
        }
    }

    #[test]
    fn round_trip() {
        let c = sample();
        let back = Checkpoint::from_bytes(&c.to_bytes(), Path::new("x")).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn rejects_corruption() {
        let bytes = sample().to_bytes();
        assert!(Checkpoint::from_bytes(&bytes[..bytes.len() - 1], Path::new("x")).is_err());
        let mut wrong = bytes.clone();
        wrong[0] = b'X';
        assert!(Checkpoint::from_bytes(&wrong, Path::new("x")).is_err());
        let mut version = bytes;
        version[8] = 9;
        assert!(Checkpoint::from_bytes(&version, Path::new("x")).is_err());
    }
}
