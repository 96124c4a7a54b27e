//! Register limits derived from the machine's physical parameters.
//!
//! Units throughout are µm, µs and rad. The reduced Planck constant is folded
//! into the interaction coefficient, so `c6_over_hbar` is in rad·µm⁶/µs.

use std::f64::consts::{PI, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Interaction coefficient that reproduces a 10.26 µm maximum blockade radius
/// at a 3 µs coherence limit: `π · 10.26⁶ / (√2 · 3)`.
pub const DEFAULT_C6_OVER_HBAR: f64 = 8.6377e5;
pub const DEFAULT_COHERENCE_TIME_US: f64 = 3.0;
/// Minimum pair distance allowed by the trap hardware.
pub const DEFAULT_D_MIN: f64 = 4.0;
/// Register diameter; all pair distances must stay below it.
pub const DEFAULT_D_MAX: f64 = 100.0;
pub const DEFAULT_EPSILON: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicsSpec {
    pub c6_over_hbar: f64,
    pub coherence_time_limit: f64,
    /// When absent the minimum frequency allowed by the coherence limit is used.
    pub rabi_frequency: Option<f64>,
}

impl Default for PhysicsSpec {
    fn default() -> Self {
        PhysicsSpec {
            c6_over_hbar: DEFAULT_C6_OVER_HBAR,
            coherence_time_limit: DEFAULT_COHERENCE_TIME_US,
            rabi_frequency: None,
        }
    }
}

impl PhysicsSpec {
    pub fn validate(&self) -> Result<()> {
        positive("c6_over_hbar", self.c6_over_hbar)?;
        positive("coherence_time_limit", self.coherence_time_limit)?;
        if let Some(rabi) = self.rabi_frequency {
            positive("rabi_frequency", rabi)?;
        }
        Ok(())
    }

    /// The explicit Rabi frequency, or the minimum one for the coherence limit.
    pub fn effective_rabi(&self) -> Result<f64> {
        match self.rabi_frequency {
            Some(rabi) => Ok(rabi),
            None => min_rabi_frequency(self.coherence_time_limit),
        }
    }
}

fn positive(name: &'static str, value: f64) -> Result<()> {
    // also rejects NaN
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPositive { name, value })
    }
}

/// `Ω = π / (√2 · t)`: the slowest pulse that still reaches the maximally
/// entangled state within `t_limit`.
pub fn min_rabi_frequency(t_limit: f64) -> Result<f64> {
    if !(t_limit > 0.0) {
        return Err(Error::NonPositiveTime(t_limit));
    }
    Ok(PI / (SQRT_2 * t_limit))
}

/// `r_b = (C₆ / ħΩ)^(1/6)`.
pub fn blockade_radius(spec: &PhysicsSpec) -> Result<f64> {
    let rabi = spec.rabi_frequency.ok_or(Error::MissingRabi)?;
    positive("rabi_frequency", rabi)?;
    positive("c6_over_hbar", spec.c6_over_hbar)?;
    Ok((spec.c6_over_hbar / rabi).powf(1.0 / 6.0))
}

/// `r̃_b = (√2 · C₆ · t̃ / (ħπ))^(1/6)`, the largest usable blockade radius.
pub fn max_blockade_radius(spec: &PhysicsSpec) -> Result<f64> {
    if !(spec.coherence_time_limit > 0.0) {
        return Err(Error::NonPositiveTime(spec.coherence_time_limit));
    }
    positive("c6_over_hbar", spec.c6_over_hbar)?;
    Ok((SQRT_2 * spec.c6_over_hbar * spec.coherence_time_limit / PI).powf(1.0 / 6.0))
}

/// Geometric constraints for a register.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegisterLimits {
    pub d_min: f64,
    pub d_max: f64,
    pub r_blockade: f64,
    pub epsilon: f64,
    pub dims: usize,
}

impl RegisterLimits {
    pub fn new(d_min: f64, d_max: f64, r_blockade: f64, epsilon: f64, dims: usize) -> Result<Self> {
        check_dims(dims)?;
        if !(d_min > 0.0 && d_min < r_blockade && r_blockade < d_max && d_max.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "limits must satisfy 0 < d_min < r_blockade < d_max, got {d_min}, {r_blockade}, {d_max}"
            )));
        }
        positive("epsilon", epsilon)?;
        Ok(RegisterLimits {
            d_min,
            d_max,
            r_blockade,
            epsilon,
            dims,
        })
    }

    pub fn with_dims(self, dims: usize) -> Result<Self> {
        check_dims(dims)?;
        Ok(RegisterLimits { dims, ..self })
    }
}

pub(crate) fn check_dims(dims: usize) -> Result<()> {
    match dims {
        2 | 3 => Ok(()),
        other => Err(Error::BadDims(other)),
    }
}

/// Hardware distance bounds with the blockade radius taken at the coherence limit.
pub fn default_limits(spec: &PhysicsSpec, dims: usize) -> Result<RegisterLimits> {
    check_dims(dims)?;
    RegisterLimits::new(
        DEFAULT_D_MIN,
        DEFAULT_D_MAX,
        max_blockade_radius(spec)?,
        DEFAULT_EPSILON,
        dims,
    )
}

/// Physics config file: `{"c6_over_hbar", "coherence_time_us", "rabi_rad_per_us", "dims"}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicsConfig {
    pub c6_over_hbar: f64,
    pub coherence_time_us: f64,
    #[serde(default)]
    pub rabi_rad_per_us: Option<f64>,
    pub dims: usize,
}

impl Default for PhysicsConfig {
    fn default() -> Self {
        PhysicsConfig {
            c6_over_hbar: DEFAULT_C6_OVER_HBAR,
            coherence_time_us: DEFAULT_COHERENCE_TIME_US,
            rabi_rad_per_us: None,
            dims: 2,
        }
    }
}

impl PhysicsConfig {
    pub fn spec(&self) -> PhysicsSpec {
        PhysicsSpec {
            c6_over_hbar: self.c6_over_hbar,
            coherence_time_limit: self.coherence_time_us,
            rabi_frequency: self.rabi_rad_per_us,
        }
    }

    pub fn limits(&self) -> Result<RegisterLimits> {
        let spec = self.spec();
        spec.validate()?;
        default_limits(&spec, self.dims)
    }
}
