//! Feasibility-stopped training of a single embedding.

use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::feasibility::{check_feasibility, DistanceMetrics};
use crate::graph::Graph;
use crate::layout::Embedding;
use crate::loss::{loss_with_adjacency, LossBreakdown};
use crate::model::{build_model, Mode};
use crate::optim::{AdamW, AdamWConfig};
use crate::physics::RegisterLimits;

pub const DEFAULT_LEARNING_RATE: f64 = 1e-3;
pub const DEFAULT_WEIGHT_DECAY: f64 = 0.01;
pub const DEFAULT_MAX_EPOCHS: usize = 5000;

/// Mixed into the seed of the dropout stream so it differs from the
/// initialization stream.
const DROPOUT_STREAM: u64 = 0x9E37_79B9_7F4A_7C15;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainOptions {
    pub learning_rate: f64,
    pub weight_decay: f64,
    pub max_epochs: usize,
    pub seed: u64,
    pub record_trace: bool,
}

impl Default for TrainOptions {
    fn default() -> Self {
        TrainOptions {
            learning_rate: DEFAULT_LEARNING_RATE,
            weight_decay: DEFAULT_WEIGHT_DECAY,
            max_epochs: DEFAULT_MAX_EPOCHS,
            seed: 0,
            record_trace: true,
        }
    }
}

impl TrainOptions {
    pub fn with_seed(self, seed: u64) -> Self {
        TrainOptions { seed, ..self }
    }
}

/// Per-epoch record: eval-mode loss after the update and its feasibility.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub epoch: usize,
    #[serde(flatten)]
    pub loss: LossBreakdown,
    pub feasible: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    /// Number of optimizer steps taken; 0 when the input was already feasible.
    pub epochs_used: usize,
    pub feasible: bool,
    pub loss_trace: Vec<TraceRecord>,
    pub final_embedding: Embedding,
    pub final_metrics: DistanceMetrics,
}

impl TrainReport {
    /// One JSON object per line.
    pub fn write_trace_jsonl<W: Write>(&self, mut writer: W) -> Result<()> {
        for record in &self.loss_trace {
            serde_json::to_writer(&mut writer, record)?;
            writer.write_all(b"\n")?;
        }
        Ok(())
    }
}

/// Trains a fresh model on the single input `initial` until its eval-mode
/// output passes the feasibility check or `max_epochs` is reached.
pub fn train_embed(
    g: &Graph,
    initial: &Embedding,
    limits: &RegisterLimits,
    opts: &TrainOptions,
) -> Result<TrainReport> {
    if g.n() != initial.n() {
        return Err(Error::SizeMismatch {
            embedding: initial.n(),
            graph: g.n(),
        });
    }
    if initial.dims() != limits.dims {
        return Err(Error::ShapeMismatch(format!(
            "initial embedding is {}-d, limits are {}-d",
            initial.dims(),
            limits.dims
        )));
    }
    if !(opts.learning_rate > 0.0) || opts.max_epochs == 0 {
        return Err(Error::InvalidParameter(
            "learning rate must be positive and max_epochs at least 1".into(),
        ));
    }

    let start = check_feasibility(initial, g, limits)?;
    if start.feasible {
        return Ok(TrainReport {
            epochs_used: 0,
            feasible: true,
            loss_trace: Vec::new(),
            final_embedding: initial.clone(),
            final_metrics: start.metrics,
        });
    }

    let mut model = build_model(g.n(), limits.dims, opts.seed)?;
    let mut optimizer = AdamW::for_model(&model);
    let cfg = AdamWConfig {
        learning_rate: opts.learning_rate,
        weight_decay: opts.weight_decay,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ DROPOUT_STREAM);
    let adjacent = g.adjacency_by_pair();
    let mut trace = Vec::new();
    let mut last = None;

    for epoch in 1..=opts.max_epochs {
        let (grads, _) = model.gradients(initial, &adjacent, limits, Mode::Train, &mut rng)?;
        optimizer.step(&mut model.layers, &grads, &cfg)?;

        let (coords, distances) = model.forward(initial, Mode::Eval, &mut rng)?;
        let report = check_feasibility(&coords, g, limits)?;
        if opts.record_trace {
            trace.push(TraceRecord {
                epoch,
                loss: loss_with_adjacency(&distances, &adjacent, limits),
                feasible: report.feasible,
            });
        }
        let done = report.feasible;
        last = Some((epoch, coords, report));
        if done {
            break;
        }
    }

    let (epochs_used, final_embedding, report) = last.expect("at least one epoch");
    Ok(TrainReport {
        epochs_used,
        feasible: report.feasible,
        loss_trace: trace,
        final_embedding,
        final_metrics: report.metrics,
    })
}
