//! Network checkpoints.
//!
//! Layout:
//!
//! ```text
//! QMLP-CHECKPOINT 1\n
//! <header: one line of JSON>\n
//! <parameter blocks: little-endian f64, row-major, in header order>
//! ```
//!
//! The header records the network kind, its configuration and the label and
//! shape of every block, so a reader can size the payload without knowing
//! the network type. Values are widened to `f64` on write regardless of the
//! in-memory scalar type.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nets::{ActionScale, Actor, ArchitectureConfig, Critic};
use crate::nn::{Matrix, ParamBlock};
use crate::scalar::Scalar;

pub const MAGIC: &str = "QMLP-CHECKPOINT 1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "network", rename_all = "lowercase")]
pub enum NetworkRecord {
    Actor {
        config: ArchitectureConfig,
        obs_dim: usize,
        action_low: Vec<f64>,
        action_high: Vec<f64>,
    },
    Critic {
        obs_dim: usize,
        act_dim: usize,
        hidden: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockRecord {
    pub label: String,
    pub rows: usize,
    pub cols: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointHeader {
    pub record: NetworkRecord,
    pub blocks: Vec<BlockRecord>,
    /// Free-form metadata such as the training step.
    #[serde(default)]
    pub meta: serde_json::Map<String, serde_json::Value>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub header: CheckpointHeader,
    pub blocks: Vec<Matrix<f64>>,
}

impl Checkpoint {
    fn from_blocks<T: Scalar>(record: NetworkRecord, params: &[&ParamBlock<T>]) -> Self {
        let blocks = params
            .iter()
            .map(|p| {
                let data = p.value.as_slice().iter().map(|v| v.as_f64()).collect();
                Matrix::from_vec(p.value.rows(), p.value.cols(), data).expect("shape preserved")
            })
            .collect();
        let header = CheckpointHeader {
            record,
            blocks: params
                .iter()
                .map(|p| BlockRecord {
                    label: p.label.clone(),
                    rows: p.value.rows(),
                    cols: p.value.cols(),
                })
                .collect(),
            meta: Default::default(),
        };
        Self { header, blocks }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let header = serde_json::to_string(&self.header).expect("header serializes");
        let payload: usize = self.blocks.iter().map(|b| b.len() * 8).sum();
        let mut out = Vec::with_capacity(MAGIC.len() + header.len() + 2 + payload);
        out.extend_from_slice(MAGIC.as_bytes());
        out.push(b'\n');
        out.extend_from_slice(header.as_bytes());
        out.push(b'\n');
        for block in &self.blocks {
            for v in block.as_slice() {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let bad = |detail: &str| Error::Format {
            what: "checkpoint",
            detail: detail.to_string(),
        };
        let magic_end = bytes.iter().position(|&b| b == b'\n').ok_or_else(|| bad("missing magic line"))?;
        if &bytes[..magic_end] != MAGIC.as_bytes() {
            return Err(bad("unrecognized magic line"));
        }
        let rest = &bytes[magic_end + 1..];
        let header_end = rest.iter().position(|&b| b == b'\n').ok_or_else(|| bad("missing header line"))?;
        let header: CheckpointHeader =
            serde_json::from_slice(&rest[..header_end]).map_err(|e| bad(&format!("header: {e}")))?;
        let mut payload = &rest[header_end + 1..];
        let expected: usize = header.blocks.iter().map(|b| b.rows * b.cols * 8).sum();
        if payload.len() != expected {
            return Err(bad(&format!("payload is {} bytes, header describes {expected}", payload.len())));
        }
        let mut blocks = Vec::with_capacity(header.blocks.len());
        for rec in &header.blocks {
            let n = rec.rows * rec.cols;
            let data = payload[..n * 8]
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
                .collect();
            payload = &payload[n * 8..];
            blocks.push(Matrix::from_vec(rec.rows, rec.cols, data)?);
        }
        Ok(Self { header, blocks })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
        fs::write(path, self.to_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes)
    }

    fn restore_into<T: Scalar>(&self, params: Vec<&mut ParamBlock<T>>) -> Result<()> {
        if params.len() != self.blocks.len() {
            return Err(Error::Format {
                what: "checkpoint",
                detail: format!("{} blocks stored, network has {}", self.blocks.len(), params.len()),
            });
        }
        for ((p, block), rec) in params.into_iter().zip(&self.blocks).zip(&self.header.blocks) {
            if p.label != rec.label {
                return Err(Error::Format {
                    what: "checkpoint",
                    detail: format!("block `{}` stored where `{}` expected", rec.label, p.label),
                });
            }
            let data = block.as_slice().iter().map(|&v| T::lit(v)).collect();
            p.set_value(Matrix::from_vec(block.rows(), block.cols(), data)?)?;
        }
        Ok(())
    }
}

impl<T: Scalar> Actor<T> {
    pub fn to_checkpoint(&self) -> Checkpoint {
        let record = NetworkRecord::Actor {
            config: self.config().clone(),
            obs_dim: self.obs_dim(),
            action_low: self.scale().low.iter().map(|v| v.as_f64()).collect(),
            action_high: self.scale().high.iter().map(|v| v.as_f64()).collect(),
        };
        Checkpoint::from_blocks(record, &self.params())
    }

    pub fn from_checkpoint(ckpt: &Checkpoint) -> Result<Self> {
        let NetworkRecord::Actor {
            config,
            obs_dim,
            action_low,
            action_high,
        } = &ckpt.header.record
        else {
            return Err(Error::Format {
                what: "checkpoint",
                detail: "expected an actor checkpoint".into(),
            });
        };
        let scale = ActionScale::new(
            action_low.iter().map(|&v| T::lit(v)).collect(),
            action_high.iter().map(|&v| T::lit(v)).collect(),
        )?;
        let mut actor = Actor::build(config, *obs_dim, scale, 0)?;
        ckpt.restore_into(actor.params_mut())?;
        Ok(actor)
    }
}

impl<T: Scalar> Critic<T> {
    pub fn to_checkpoint(&self) -> Checkpoint {
        let record = NetworkRecord::Critic {
            obs_dim: self.obs_dim(),
            act_dim: self.act_dim(),
            hidden: self.hidden(),
        };
        Checkpoint::from_blocks(record, &self.params())
    }

    pub fn from_checkpoint(ckpt: &Checkpoint) -> Result<Self> {
        let NetworkRecord::Critic {
            obs_dim,
            act_dim,
            hidden,
        } = ckpt.header.record
        else {
            return Err(Error::Format {
                what: "checkpoint",
                detail: "expected a critic checkpoint".into(),
            });
        };
        let mut critic = Critic::build(obs_dim, act_dim, hidden, 0)?;
        ckpt.restore_into(critic.params_mut())?;
        Ok(critic)
    }
}
