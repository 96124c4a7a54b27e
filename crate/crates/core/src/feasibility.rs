//! Exact constraint checking for register embeddings.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::layout::{Embedding, REGISTER_RADIUS};
use crate::physics::RegisterLimits;

/// Pair-distance summary; a field is `None` when its pair class is empty.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct DistanceMetrics {
    pub r_min: Option<f64>,
    pub r_max: Option<f64>,
    /// Largest distance between adjacent qubits.
    pub r_adj: Option<f64>,
    /// Smallest distance between non-adjacent qubits.
    pub r_nonadj: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Constraint {
    MaxDist,
    MinDist,
    AdjTooFar,
    NonAdjTooClose,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub i: usize,
    pub j: usize,
    pub d_um: f64,
    pub constraint: Constraint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub feasible: bool,
    pub violations: Vec<Violation>,
    pub metrics: DistanceMetrics,
    /// Informational only: every point lies within the register disk/ball.
    pub within_register: bool,
}

fn check_size(e: &Embedding, g: &Graph) -> Result<()> {
    if e.n() != g.n() {
        return Err(Error::SizeMismatch {
            embedding: e.n(),
            graph: g.n(),
        });
    }
    Ok(())
}

fn fold(slot: &mut Option<f64>, d: f64, pick: fn(f64, f64) -> f64) {
    *slot = Some(slot.map_or(d, |cur| pick(cur, d)));
}

pub fn distance_metrics(e: &Embedding, g: &Graph) -> Result<DistanceMetrics> {
    check_size(e, g)?;
    let mut m = DistanceMetrics::default();
    let n = e.n();
    for i in 0..n {
        for j in i + 1..n {
            let d = e.distance(i, j);
            fold(&mut m.r_min, d, f64::min);
            fold(&mut m.r_max, d, f64::max);
            if g.is_adjacent(i + 1, j + 1) {
                fold(&mut m.r_adj, d, f64::max);
            } else {
                fold(&mut m.r_nonadj, d, f64::min);
            }
        }
    }
    Ok(m)
}

/// Checks every pair against the register bounds and the unit-disk pattern:
/// `d_min ≤ d ≤ d_max` for all pairs, `d ≤ r_b` for edges and `d > r_b` for
/// non-edges. Comparisons are exact.
pub fn check_feasibility(e: &Embedding, g: &Graph, limits: &RegisterLimits) -> Result<FeasibilityReport> {
    check_size(e, g)?;
    if e.dims() != limits.dims {
        return Err(Error::ShapeMismatch(format!(
            "embedding is {}-d, limits are {}-d",
            e.dims(),
            limits.dims
        )));
    }
    let mut violations = Vec::new();
    let n = e.n();
    for i in 0..n {
        for j in i + 1..n {
            let d = e.distance(i, j);
            let mut flag = |constraint| {
                violations.push(Violation {
                    i: i + 1,
                    j: j + 1,
                    d_um: d,
                    constraint,
                })
            };
            if !(d <= limits.d_max) {
                flag(Constraint::MaxDist);
            }
            if !(d >= limits.d_min) {
                flag(Constraint::MinDist);
            }
            if g.is_adjacent(i + 1, j + 1) {
                if !(d <= limits.r_blockade) {
                    flag(Constraint::AdjTooFar);
                }
            } else if !(d > limits.r_blockade) {
                flag(Constraint::NonAdjTooClose);
            }
        }
    }
    Ok(FeasibilityReport {
        feasible: violations.is_empty(),
        violations,
        metrics: distance_metrics(e, g)?,
        within_register: e.max_norm() <= REGISTER_RADIUS,
    })
}
