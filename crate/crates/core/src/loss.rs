//! Four-term hinge loss on pair distances.
//!
//! Every term is averaged over all `C(n, 2)` pairs, with the adjacency mask
//! applied inside the average for the two pattern terms.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{pair_count, Graph};
use crate::physics::RegisterLimits;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LossBreakdown {
    /// Pairs beyond `d_max`.
    pub loss1: f64,
    /// Pairs closer than `d_min`.
    pub loss2: f64,
    /// Adjacent pairs beyond the blockade radius.
    pub loss3: f64,
    /// Non-adjacent pairs within the blockade radius plus margin.
    pub loss4: f64,
    pub total: f64,
}

/// Loss for a distance vector in pair-index order.
pub fn loss(distances: &[f64], g: &Graph, limits: &RegisterLimits) -> Result<LossBreakdown> {
    let expected = pair_count(g.n());
    if distances.len() != expected {
        return Err(Error::LengthMismatch {
            expected,
            got: distances.len(),
        });
    }
    Ok(loss_with_adjacency(distances, &g.adjacency_by_pair(), limits))
}

pub(crate) fn loss_with_adjacency(distances: &[f64], adjacent: &[bool], limits: &RegisterLimits) -> LossBreakdown {
    let far = limits.r_blockade + limits.epsilon;
    let mut out = LossBreakdown::default();
    for (&d, &adj) in distances.iter().zip(adjacent) {
        out.loss1 += (d.max(limits.d_max) - limits.d_max).abs();
        out.loss2 += (d.min(limits.d_min) - limits.d_min).abs();
        if adj {
            out.loss3 += (d.max(limits.r_blockade) - limits.r_blockade).abs();
        } else {
            out.loss4 += (d.min(far) - far).abs();
        }
    }
    let pairs = distances.len().max(1) as f64;
    out.loss1 /= pairs;
    out.loss2 /= pairs;
    out.loss3 /= pairs;
    out.loss4 /= pairs;
    out.total = out.loss1 + out.loss2 + out.loss3 + out.loss4;
    out
}

/// `∂ total / ∂ d` per pair. Kinks take the zero subgradient.
pub(crate) fn loss_gradient(distances: &[f64], adjacent: &[bool], limits: &RegisterLimits) -> Vec<f64> {
    let far = limits.r_blockade + limits.epsilon;
    let unit = 1.0 / distances.len().max(1) as f64;
    distances
        .iter()
        .zip(adjacent)
        .map(|(&d, &adj)| {
            let mut g = 0.0;
            if d > limits.d_max {
                g += unit;
            }
            if d < limits.d_min {
                g -= unit;
            }
            if adj {
                if d > limits.r_blockade {
                    g += unit;
                }
            } else if d < far {
                g -= unit;
            }
            g
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn limits() -> RegisterLimits {
        RegisterLimits::new(4.0, 100.0, 10.26, 0.1, 2).unwrap()
    }

    #[test]
    fn hand_evaluated_examples() {
        let l = limits();
        let all_adjacent = loss(&[10.26; 6], &Graph::complete(4), &l).unwrap();
        assert_eq!(all_adjacent.total, 0.0);

        let far = loss(&[110.0], &Graph::empty(2), &l).unwrap();
        assert_eq!(
            far,
            LossBreakdown {
                loss1: 10.0,
                loss2: 0.0,
                loss3: 0.0,
                loss4: 0.0,
                total: 10.0
            }
        );

        let close = loss(&[3.0], &Graph::complete(2), &l).unwrap();
        assert_eq!(
            close,
            LossBreakdown {
                loss1: 0.0,
                loss2: 1.0,
                loss3: 0.0,
                loss4: 0.0,
                total: 1.0
            }
        );
    }

    #[test]
    fn averages_over_all_pairs() {
        // path 1-2-3: pairs (1,2) adj, (1,3) non-adj, (2,3) adj
        let l = limits();
        let b = loss(&[13.26, 5.36, 10.0], &Graph::path(3), &l).unwrap();
        assert!((b.loss3 - 3.0 / 3.0).abs() < 1e-12);
        assert!((b.loss4 - 5.0 / 3.0).abs() < 1e-12);
        assert_eq!((b.loss1, b.loss2), (0.0, 0.0));
    }

    #[test]
    fn length_is_checked() {
        assert_eq!(
            loss(&[1.0, 2.0], &Graph::path(3), &limits()),
            Err(Error::LengthMismatch { expected: 3, got: 2 })
        );
    }

    #[test]
    fn gradient_matches_differences() {
        let l = limits();
        let adj = [true, false, true, false];
        let d = [120.0, 2.0, 12.0, 9.0];
        let grad = loss_gradient(&d, &adj, &l);
        let h = 1e-6;
        for k in 0..d.len() {
            let mut up = d;
            up[k] += h;
            let mut down = d;
            down[k] -= h;
            let fd =
                (loss_with_adjacency(&up, &adj, &l).total - loss_with_adjacency(&down, &adj, &l).total) / (2.0 * h);
            assert!((fd - grad[k]).abs() < 1e-8, "{k}: {fd} vs {}", grad[k]);
        }
    }
}
