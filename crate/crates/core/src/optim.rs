//! AdamW with decoupled weight decay on weight matrices only.

use crate::error::{Error, Result};
use crate::model::{Dense, GeanModel, Gradients};

pub const BETA1: f64 = 0.9;
pub const BETA2: f64 = 0.999;
pub const ADAM_EPSILON: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct AdamW {
    m: Vec<Dense>,
    v: Vec<Dense>,
    step: u32,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamWConfig {
    pub learning_rate: f64,
    pub weight_decay: f64,
}

impl AdamW {
    pub fn new(params: &[Dense]) -> Self {
        let zeros: Vec<Dense> = params
            .iter()
            .map(|l| Dense {
                inputs: l.inputs,
                outputs: l.outputs,
                weights: vec![0.0; l.weights.len()],
                bias: vec![0.0; l.bias.len()],
            })
            .collect();
        AdamW {
            m: zeros.clone(),
            v: zeros,
            step: 0,
        }
    }

    pub fn for_model(model: &GeanModel) -> Self {
        Self::new(model.layers())
    }

    pub fn steps_taken(&self) -> u32 {
        self.step
    }

    /// One update of `params` in place.
    pub fn step(&mut self, params: &mut [Dense], grads: &Gradients, cfg: &AdamWConfig) -> Result<()> {
        let shapes_agree = params.len() == grads.layers.len()
            && params.len() == self.m.len()
            && params.iter().zip(&grads.layers).zip(&self.m).all(|((p, g), m)| {
                p.weights.len() == g.weights.len()
                    && p.bias.len() == g.bias.len()
                    && p.weights.len() == m.weights.len()
                    && p.bias.len() == m.bias.len()
            });
        if !shapes_agree {
            return Err(Error::ShapeMismatch(
                "optimizer, parameter and gradient shapes differ".into(),
            ));
        }
        self.step += 1;
        let t = self.step as i32;
        let correction1 = 1.0 - BETA1.powi(t);
        let correction2 = 1.0 - BETA2.powi(t);
        let update = |theta: &mut [f64], g: &[f64], m: &mut [f64], v: &mut [f64], decay: f64| {
            for k in 0..theta.len() {
                theta[k] -= cfg.learning_rate * decay * theta[k];
                m[k] = BETA1 * m[k] + (1.0 - BETA1) * g[k];
                v[k] = BETA2 * v[k] + (1.0 - BETA2) * g[k] * g[k];
                let m_hat = m[k] / correction1;
                let v_hat = v[k] / correction2;
                theta[k] -= cfg.learning_rate * m_hat / (v_hat.sqrt() + ADAM_EPSILON);
            }
        };
        for (((p, g), m), v) in params.iter_mut().zip(&grads.layers).zip(&mut self.m).zip(&mut self.v) {
            update(
                &mut p.weights,
                &g.weights,
                &mut m.weights,
                &mut v.weights,
                cfg.weight_decay,
            );
            update(&mut p.bias, &g.bias, &mut m.bias, &mut v.bias, 0.0);
        }
        Ok(())
    }
}
