//! The coordinate-transforming autoencoder and its fixed distance heads.
//!
//! Layout of the coordinate layers is axis-major: the first `n` nodes hold
//! x-coordinates, the next `n` hold y, and in 3D the last `n` hold z. The
//! trainable part is a stack of dense layers
//! `dims·n → 64 → 36 → 18 → 9 → 18 → 36 → 64 → dims·n` with ReLU and dropout on
//! every hidden layer and `50·tanh` on the output. Two sparse layers with fixed
//! weights turn the output coordinates into per-axis differences (`DiffL`) and
//! then into squared pair distances (`DistL`); a square root yields distances.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::pair_count;
use crate::layout::{Embedding, REGISTER_RADIUS};
use crate::loss::{loss_gradient, loss_with_adjacency, LossBreakdown};
use crate::physics::{check_dims, RegisterLimits};

pub const HIDDEN_WIDTHS: [usize; 7] = [64, 36, 18, 9, 18, 36, 64];
pub const DROPOUT_P: f64 = 0.5;
/// Output activation is `OUTPUT_SCALE · tanh`; inputs are divided by it.
pub const OUTPUT_SCALE: f64 = REGISTER_RADIUS;
/// Added under the final square root so coincident points keep finite gradients.
pub const SQRT_GUARD: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Dropout active.
    Train,
    Eval,
}

/// Fully connected layer; `weights` is `outputs × inputs`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub inputs: usize,
    pub outputs: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Dense {
    /// Uniform `±1/√fan_in` initialization for weights and biases.
    fn init(inputs: usize, outputs: usize, rng: &mut ChaCha8Rng) -> Self {
        let bound = 1.0 / (inputs as f64).sqrt();
        let weights = (0..inputs * outputs).map(|_| rng.gen_range(-bound..bound)).collect();
        let bias = (0..outputs).map(|_| rng.gen_range(-bound..bound)).collect();
        Dense {
            inputs,
            outputs,
            weights,
            bias,
        }
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.weights
            .chunks_exact(self.inputs)
            .zip(&self.bias)
            .map(|(row, b)| row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + b)
            .collect()
    }

    fn zeros_like(&self) -> Dense {
        Dense {
            inputs: self.inputs,
            outputs: self.outputs,
            weights: vec![0.0; self.weights.len()],
            bias: vec![0.0; self.bias.len()],
        }
    }
}

/// Sparse `±1` map from coordinates to per-axis pair differences.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffHead {
    plus: Vec<usize>,
    minus: Vec<usize>,
}

impl DiffHead {
    fn new(n: usize, dims: usize) -> Self {
        let nodes = dims * pair_count(n);
        let mut plus = vec![0; nodes];
        let mut minus = vec![0; nodes];
        for axis in 0..dims {
            for i in 1..=n {
                for j in i + 1..=n {
                    let node = diff_node_index(axis, i, j, n) - 1;
                    plus[node] = axis * n + i - 1;
                    minus[node] = axis * n + j - 1;
                }
            }
        }
        DiffHead { plus, minus }
    }

    pub fn nodes(&self) -> usize {
        self.plus.len()
    }

    /// `(plus, minus)` coordinate nodes wired into diff node `k` (0-based).
    pub fn wiring(&self, k: usize) -> (usize, usize) {
        (self.plus[k], self.minus[k])
    }

    fn apply(&self, coords: &[f64]) -> Vec<f64> {
        self.plus
            .iter()
            .zip(&self.minus)
            .map(|(&p, &m)| coords[p] - coords[m])
            .collect()
    }
}

/// 1-based `DiffL` node holding the `axis` difference of pair `(i, j)`.
///
/// x: `(i-1)(n-1) - C(i-1,2) + j - i`;
/// y: `(n-1)(n/2 + i-1) - C(i-1,2) + j - i`;
/// z: `(n-1)(n + i-1) - C(i-1,2) + j - i`.
pub fn diff_node_index(axis: usize, i: usize, j: usize, n: usize) -> usize {
    let tail = j - i;
    let c = pair_count(i - 1);
    match axis {
        0 => (i - 1) * (n - 1) - c + tail,
        // (n-1)·n/2 is an integer for every n
        1 => (n - 1) * n / 2 + (n - 1) * (i - 1) - c + tail,
        2 => (n - 1) * (n + i - 1) - c + tail,
        _ => unreachable!("axis out of range"),
    }
}

/// Sums squared differences of the same pair across axes: `β_k = Σ_a α²_{a·P + k}`.
#[derive(Debug, Clone, PartialEq)]
pub struct DistHead {
    pairs: usize,
    dims: usize,
}

impl DistHead {
    pub fn nodes(&self) -> usize {
        self.pairs
    }

    fn apply(&self, squared: &[f64]) -> Vec<f64> {
        (0..self.pairs)
            .map(|k| (0..self.dims).map(|a| squared[a * self.pairs + k]).sum())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeanModel {
    n: usize,
    dims: usize,
    pub(crate) layers: Vec<Dense>,
    diff: DiffHead,
    dist: DistHead,
    dropout_p: f64,
}

/// Gradient of the loss with respect to every trainable layer.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: Vec<Dense>,
}

impl Gradients {
    pub fn max_abs(&self) -> f64 {
        self.layers
            .iter()
            .flat_map(|l| l.weights.iter().chain(&l.bias))
            .fold(0.0, |m, g| m.max(g.abs()))
    }

    /// Same ordering as [`GeanModel::parameters`].
    pub fn flatten(&self) -> Vec<f64> {
        flatten_layers(&self.layers)
    }
}

fn flatten_layers(layers: &[Dense]) -> Vec<f64> {
    layers
        .iter()
        .flat_map(|l| l.weights.iter().chain(&l.bias).copied())
        .collect()
}

/// Intermediate values kept for the backward pass.
struct Trace {
    /// Input to each dense layer.
    inputs: Vec<Vec<f64>>,
    /// Pre-activations of hidden layers.
    pre: Vec<Vec<f64>>,
    /// Dropout multipliers per hidden layer (all 1 in eval mode).
    masks: Vec<Vec<f64>>,
    /// tanh of the output pre-activations.
    tanh: Vec<f64>,
    coords: Vec<f64>,
    diffs: Vec<f64>,
    distances: Vec<f64>,
}

pub fn build_model(n: usize, dims: usize, seed: u64) -> Result<GeanModel> {
    check_dims(dims)?;
    if n < 2 {
        return Err(Error::TooFewQubits(n));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut widths = vec![dims * n];
    widths.extend(HIDDEN_WIDTHS);
    widths.push(dims * n);
    let layers = widths.windows(2).map(|w| Dense::init(w[0], w[1], &mut rng)).collect();
    Ok(GeanModel {
        n,
        dims,
        layers,
        diff: DiffHead::new(n, dims),
        dist: DistHead {
            pairs: pair_count(n),
            dims,
        },
        dropout_p: DROPOUT_P,
    })
}

impl GeanModel {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    /// Node counts from the input layer through `CoordL`.
    pub fn layer_widths(&self) -> Vec<usize> {
        let mut w = vec![self.layers[0].inputs];
        w.extend(self.layers.iter().map(|l| l.outputs));
        w
    }

    pub fn layers(&self) -> &[Dense] {
        &self.layers
    }

    pub fn diff_head(&self) -> &DiffHead {
        &self.diff
    }

    pub fn dist_head(&self) -> &DistHead {
        &self.dist
    }

    pub fn parameter_count(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.bias.len()).sum()
    }

    /// All trainable values, layer by layer, weights (row-major) before biases.
    pub fn parameters(&self) -> Vec<f64> {
        flatten_layers(&self.layers)
    }

    pub fn set_parameters(&mut self, values: &[f64]) -> Result<()> {
        let expected = self.parameter_count();
        if values.len() != expected {
            return Err(Error::LengthMismatch {
                expected,
                got: values.len(),
            });
        }
        let mut rest = values;
        for l in &mut self.layers {
            let (w, tail) = rest.split_at(l.weights.len());
            l.weights.copy_from_slice(w);
            let (b, tail) = tail.split_at(l.bias.len());
            l.bias.copy_from_slice(b);
            rest = tail;
        }
        Ok(())
    }

    /// Overrides the dropout probability; 0 disables dropout, as gradient checks need.
    pub fn set_dropout(&mut self, p: f64) -> Result<()> {
        if !(0.0..1.0).contains(&p) {
            return Err(Error::InvalidParameter(format!(
                "dropout probability {p} not in [0, 1)"
            )));
        }
        self.dropout_p = p;
        Ok(())
    }

    fn check_input(&self, input: &Embedding) -> Result<()> {
        if input.n() != self.n || input.dims() != self.dims {
            return Err(Error::ShapeMismatch(format!(
                "model expects {} points in {}-d, got {} in {}-d",
                self.n,
                self.dims,
                input.n(),
                input.dims()
            )));
        }
        Ok(())
    }

    /// Point-major µm coordinates to axis-major network inputs.
    fn encode(&self, input: &Embedding) -> Vec<f64> {
        let mut x = vec![0.0; self.dims * self.n];
        for (i, p) in input.points().enumerate() {
            for (a, v) in p.iter().enumerate() {
                x[a * self.n + i] = v / OUTPUT_SCALE;
            }
        }
        x
    }

    fn decode(&self, coords: &[f64]) -> Embedding {
        let mut out = Vec::with_capacity(coords.len());
        for i in 0..self.n {
            for a in 0..self.dims {
                out.push(coords[a * self.n + i]);
            }
        }
        Embedding::new(self.dims, out).expect("finite network output")
    }

    fn run(&self, x: Vec<f64>, mode: Mode, rng: &mut ChaCha8Rng) -> Trace {
        let hidden = self.layers.len() - 1;
        let keep = 1.0 - self.dropout_p;
        let mut inputs = Vec::with_capacity(self.layers.len());
        let mut pre = Vec::with_capacity(hidden);
        let mut masks = Vec::with_capacity(hidden);
        let mut h = x;
        for layer in &self.layers[..hidden] {
            let z = layer.apply(&h);
            let mask: Vec<f64> = match mode {
                Mode::Train if self.dropout_p > 0.0 => z
                    .iter()
                    .map(|_| if rng.gen::<f64>() < keep { 1.0 / keep } else { 0.0 })
                    .collect(),
                _ => vec![1.0; z.len()],
            };
            let next = z.iter().zip(&mask).map(|(v, m)| v.max(0.0) * m).collect();
            inputs.push(std::mem::replace(&mut h, next));
            pre.push(z);
            masks.push(mask);
        }
        let out = self.layers[hidden].apply(&h);
        inputs.push(h);
        let tanh: Vec<f64> = out.iter().map(|v| v.tanh()).collect();
        let coords: Vec<f64> = tanh.iter().map(|t| OUTPUT_SCALE * t).collect();
        let diffs = self.diff.apply(&coords);
        let squared: Vec<f64> = diffs.iter().map(|a| a * a).collect();
        let distances = self
            .dist
            .apply(&squared)
            .into_iter()
            .map(|b| (b + SQRT_GUARD).sqrt())
            .collect();
        Trace {
            inputs,
            pre,
            masks,
            tanh,
            coords,
            diffs,
            distances,
        }
    }

    /// Transformed coordinates and pair distances (pair-index order).
    pub fn forward(&self, input: &Embedding, mode: Mode, rng: &mut ChaCha8Rng) -> Result<(Embedding, Vec<f64>)> {
        self.check_input(input)?;
        let trace = self.run(self.encode(input), mode, rng);
        Ok((self.decode(&trace.coords), trace.distances))
    }

    /// Reverse-mode gradient of the total loss. The dropout mask drawn for the
    /// forward value is reused for the backward pass.
    pub fn gradients(
        &self,
        input: &Embedding,
        adjacent: &[bool],
        limits: &RegisterLimits,
        mode: Mode,
        rng: &mut ChaCha8Rng,
    ) -> Result<(Gradients, LossBreakdown)> {
        self.check_input(input)?;
        if adjacent.len() != self.dist.pairs {
            return Err(Error::LengthMismatch {
                expected: self.dist.pairs,
                got: adjacent.len(),
            });
        }
        let trace = self.run(self.encode(input), mode, rng);
        let breakdown = loss_with_adjacency(&trace.distances, adjacent, limits);
        let d_dist = loss_gradient(&trace.distances, adjacent, limits);

        // d = √(β + guard), β = Σ α², α = c⁺ − c⁻
        let pairs = self.dist.pairs;
        let mut d_coords = vec![0.0; trace.coords.len()];
        for (k, (&g, &d)) in d_dist.iter().zip(&trace.distances).enumerate() {
            if g == 0.0 {
                continue;
            }
            let d_beta = g / (2.0 * d);
            for a in 0..self.dims {
                let node = a * pairs + k;
                let d_alpha = d_beta * 2.0 * trace.diffs[node];
                let (p, m) = self.diff.wiring(node);
                d_coords[p] += d_alpha;
                d_coords[m] -= d_alpha;
            }
        }
        let mut delta: Vec<f64> = d_coords
            .iter()
            .zip(&trace.tanh)
            .map(|(g, t)| g * OUTPUT_SCALE * (1.0 - t * t))
            .collect();

        let mut grads: Vec<Dense> = self.layers.iter().map(Dense::zeros_like).collect();
        for idx in (0..self.layers.len()).rev() {
            let layer = &self.layers[idx];
            let input = &trace.inputs[idx];
            let grad = &mut grads[idx];
            for (o, &dz) in delta.iter().enumerate() {
                if dz == 0.0 {
                    continue;
                }
                grad.bias[o] = dz;
                let row = &mut grad.weights[o * layer.inputs..(o + 1) * layer.inputs];
                for (w, x) in row.iter_mut().zip(input) {
                    *w = dz * x;
                }
            }
            if idx == 0 {
                break;
            }
            let mut back = vec![0.0; layer.inputs];
            for (o, &dz) in delta.iter().enumerate() {
                if dz == 0.0 {
                    continue;
                }
                let row = &layer.weights[o * layer.inputs..(o + 1) * layer.inputs];
                for (b, w) in back.iter_mut().zip(row) {
                    *b += dz * w;
                }
            }
            // through dropout and ReLU of the previous hidden layer
            let pre = &trace.pre[idx - 1];
            let mask = &trace.masks[idx - 1];
            delta = back
                .iter()
                .zip(pre)
                .zip(mask)
                .map(|((b, z), m)| if *z > 0.0 { b * m } else { 0.0 })
                .collect();
        }
        Ok((Gradients { layers: grads }, breakdown))
    }
}
