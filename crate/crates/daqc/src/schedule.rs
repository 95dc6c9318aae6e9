//! Schedules: analog blocks of a fixed resource Hamiltonian interleaved with
//! single-qubit rotation layers.
//!
//! Blocks apply in order, so `[L, A(t), L']` realizes `L' e^{iHt} L`.

use serde::{Deserialize, Serialize};

use crate::error::{DaqcError, Result};
use crate::hamiltonian::SpinHamiltonian;
use crate::layer::{AxisAngle, RotationLayer};

pub const SCHEDULE_VERSION: u32 = 1;

const MERGE_TOL: f64 = 1e-13;

#[derive(Clone, Debug, PartialEq)]
pub enum Block {
    /// `e^{i sign H_I duration}`; `sign = -1` marks a sign-inverted block, which
    /// only a stepwise executor can realize.
    Analog { duration: f64, sign: f64 },
    /// Single-qubit layer; `width` is the nominal pulse width when banged.
    Layer { layer: RotationLayer, width: Option<f64> },
}

impl Block {
    pub fn is_analog(&self) -> bool {
        matches!(self, Block::Analog { .. })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Schedule {
    n_qubits: usize,
    base: SpinHamiltonian,
    blocks: Vec<Block>,
    steps: Vec<usize>,
}

impl Schedule {
    pub fn new(base: SpinHamiltonian) -> Self {
        Schedule {
            n_qubits: base.n_qubits(),
            base,
            blocks: Vec::new(),
            steps: Vec::new(),
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn base(&self) -> &SpinHamiltonian {
        &self.base
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// Block indices at which Trotter steps begin.
    pub fn step_starts(&self) -> &[usize] {
        &self.steps
    }

    pub fn mark_step(&mut self) {
        self.steps.push(self.blocks.len());
    }

    /// Appends an analog block; exact zeros are skipped and consecutive blocks
    /// with the same sign are fused.
    pub fn push_analog(&mut self, duration: f64, sign: f64) {
        if duration == 0.0 {
            return;
        }
        let at_boundary = self.steps.last() == Some(&self.blocks.len());
        if let (false, Some(Block::Analog { duration: d, sign: s })) = (at_boundary, self.blocks.last_mut()) {
            if *s == sign {
                *d += duration;
                return;
            }
        }
        self.blocks.push(Block::Analog { duration, sign });
    }

    /// Appends a layer, composing it with a directly preceding layer.
    pub fn push_layer(&mut self, layer: RotationLayer) {
        let layer = layer.simplified(MERGE_TOL);
        if layer.active_qubits().is_empty() {
            return;
        }
        let at_boundary = self.steps.last() == Some(&self.blocks.len());
        if let (false, Some(Block::Layer { layer: prev, .. })) = (at_boundary, self.blocks.last_mut()) {
            let merged = prev.then(&layer).simplified(MERGE_TOL);
            if merged.active_qubits().is_empty() {
                self.blocks.pop();
            } else {
                *prev = merged;
            }
            return;
        }
        self.blocks.push(Block::Layer { layer, width: None });
    }

    /// `layer`, analog block, `layer^dag`: evolves under `layer . H_I . layer^dag`.
    pub fn push_sandwich(&mut self, layer: &RotationLayer, duration: f64, sign: f64) {
        if duration == 0.0 {
            return;
        }
        self.push_layer(layer.clone());
        self.push_analog(duration, sign);
        self.push_layer(layer.adjoint());
    }

    /// Appends all blocks of `other`, which must share the base Hamiltonian.
    pub fn append(&mut self, other: &Schedule) -> Result<()> {
        if other.base != self.base {
            return Err(DaqcError::Format("appended schedule has a different base Hamiltonian".into()));
        }
        for b in &other.blocks {
            match b {
                Block::Analog { duration, sign } => self.push_analog(*duration, *sign),
                Block::Layer { layer, .. } => self.push_layer(layer.clone()),
            }
        }
        Ok(())
    }

    /// Sets the nominal width of every layer.
    pub fn with_width(mut self, width: f64) -> Self {
        for b in &mut self.blocks {
            if let Block::Layer { width: w, .. } = b {
                *w = Some(width);
            }
        }
        self
    }

    pub fn analog_durations(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.blocks.iter().filter_map(|b| match b {
            Block::Analog { duration, sign } => Some((*duration, *sign)),
            _ => None,
        })
    }

    pub fn analog_count(&self) -> usize {
        self.analog_durations().count()
    }

    pub fn layer_count(&self) -> usize {
        self.blocks.len() - self.analog_count()
    }

    /// Sum of analog block durations.
    pub fn total_analog_time(&self) -> f64 {
        self.analog_durations().map(|(d, _)| d.abs()).sum()
    }

    pub fn has_inverted_blocks(&self) -> bool {
        self.analog_durations().any(|(_, s)| s < 0.0)
    }

    /// Analog time inside each Trotter step (one entry when no steps are marked).
    pub fn step_times(&self) -> Vec<f64> {
        let mut bounds: Vec<usize> = self.steps.clone();
        if bounds.first() != Some(&0) {
            bounds.insert(0, 0);
        }
        bounds.push(self.blocks.len());
        bounds
            .windows(2)
            .map(|w| {
                self.blocks[w[0]..w[1]]
                    .iter()
                    .map(|b| match b {
                        Block::Analog { duration, .. } => duration.abs(),
                        _ => 0.0,
                    })
                    .sum()
            })
            .collect()
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(&ScheduleDoc::try_from(self)?).map_err(|e| DaqcError::Format(e.to_string()))
    }

    pub fn from_json(s: &str) -> Result<Schedule> {
        let doc: ScheduleDoc = serde_json::from_str(s).map_err(|e| DaqcError::Format(e.to_string()))?;
        Schedule::try_from(doc)
    }
}

/// File form of a schedule.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScheduleDoc {
    pub version: u32,
    pub n_qubits: usize,
    pub base: SpinHamiltonian,
    pub blocks: Vec<BlockDoc>,
    #[serde(default)]
    pub steps: Vec<usize>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum BlockDoc {
    Analog {
        duration: f64,
        #[serde(default = "plus_one")]
        sign: f64,
    },
    Layer {
        qubits: Vec<Option<AxisAngle>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        width: Option<f64>,
    },
}

fn plus_one() -> f64 {
    1.0
}

impl TryFrom<&Schedule> for ScheduleDoc {
    type Error = DaqcError;

    fn try_from(s: &Schedule) -> Result<Self> {
        let blocks = s
            .blocks
            .iter()
            .map(|b| {
                Ok(match b {
                    Block::Analog { duration, sign } => BlockDoc::Analog {
                        duration: *duration,
                        sign: *sign,
                    },
                    Block::Layer { layer, width } => BlockDoc::Layer {
                        qubits: layer.axis_angles()?,
                        width: *width,
                    },
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ScheduleDoc {
            version: SCHEDULE_VERSION,
            n_qubits: s.n_qubits,
            base: s.base.clone(),
            blocks,
            steps: s.steps.clone(),
        })
    }
}

impl TryFrom<ScheduleDoc> for Schedule {
    type Error = DaqcError;

    fn try_from(doc: ScheduleDoc) -> Result<Self> {
        if doc.version != SCHEDULE_VERSION {
            return Err(DaqcError::Format(format!("unsupported schedule version {}", doc.version)));
        }
        if doc.base.n_qubits() != doc.n_qubits {
            return Err(DaqcError::DimensionMismatch {
                expected: doc.n_qubits,
                found: doc.base.n_qubits(),
            });
        }
        let mut blocks = Vec::with_capacity(doc.blocks.len());
        for b in doc.blocks {
            blocks.push(match b {
                BlockDoc::Analog { duration, sign } => {
                    if !duration.is_finite() || (sign != 1.0 && sign != -1.0) {
                        return Err(DaqcError::Format(format!("bad analog block ({duration}, {sign})")));
                    }
                    Block::Analog { duration, sign }
                }
                BlockDoc::Layer { qubits, width } => {
                    if qubits.len() != doc.n_qubits {
                        return Err(DaqcError::DimensionMismatch {
                            expected: doc.n_qubits,
                            found: qubits.len(),
                        });
                    }
                    let ops = qubits
                        .iter()
                        .map(|q| q.as_ref().map(AxisAngle::unitary).transpose())
                        .collect::<Result<Vec<_>>>()?;
                    Block::Layer {
                        layer: RotationLayer::from_ops(ops)?,
                        width,
                    }
                }
            });
        }
        if doc.steps.iter().any(|&s| s > blocks.len()) {
            return Err(DaqcError::Format("step boundary past the last block".into()));
        }
        Ok(Schedule {
            n_qubits: doc.n_qubits,
            base: doc.base,
            blocks,
            steps: doc.steps,
        })
    }
}
