//! Unit disk graph embedding for neutral-atom qubit registers.
//!
//! Given the adjacency pattern of a QUBO problem, find qubit coordinates such
//! that adjacent qubits sit within the blockade radius, non-adjacent qubits sit
//! beyond it, and every pair respects the register's minimum and maximum
//! distances. Coordinates are produced by a small autoencoder whose output is
//! wired through fixed layers computing all pair distances, trained against a
//! hinge loss on those distances until the embedding is feasible.

// Validation is written as `!(x > 0.0)` so that NaN inputs are rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod export;
pub mod feasibility;
pub mod graph;
pub mod layout;
pub mod loss;
pub mod model;
pub mod optim;
pub mod physics;
pub mod qubo;
pub mod train;

pub use error::{Error, Result};
pub use feasibility::{check_feasibility, distance_metrics, DistanceMetrics, FeasibilityReport};
pub use graph::{Graph, ScreeningReport};
pub use layout::Embedding;
pub use loss::{loss, LossBreakdown};
pub use model::{build_model, GeanModel, Mode};
pub use physics::{default_limits, PhysicsSpec, RegisterLimits};
pub use qubo::QuboInstance;
pub use train::{train_embed, TrainOptions, TrainReport};
