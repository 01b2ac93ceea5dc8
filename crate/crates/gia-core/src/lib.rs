//! Black-box evasion attacks on graph node classifiers.
//!
//! The pipeline: load or generate a graph, train a linear surrogate on
//! propagated features, solve a closed-form box LP per (candidate, neighbor,
//! label) to find bounded feature perturbations, merge them into one
//! perturbation per candidate, greedily select a budgeted set of low-degree
//! targets by influence, and measure how the attack transfers to a two-layer
//! graph convolution victim.
//!
//! All numerics are generic over the scalar type; use the `*32`/`*64`
//! aliases below (or `f64` directly) for concrete work.

pub mod error;
pub mod eval;
pub mod graph;
pub mod influence;
pub mod perturb;
pub mod rng;
pub mod scalar;
pub mod surrogate;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Graph32 = graph::Graph<f32>;
pub type Graph64 = graph::Graph<f64>;
pub type PropagationOperator32 = graph::PropagationOperator<f32>;
pub type PropagationOperator64 = graph::PropagationOperator<f64>;
pub type SurrogateModel32 = surrogate::SurrogateModel<f32>;
pub type SurrogateModel64 = surrogate::SurrogateModel<f64>;
pub type FeaturePerturbation32 = perturb::FeaturePerturbation<f32>;
pub type FeaturePerturbation64 = perturb::FeaturePerturbation<f64>;
pub type PerturbationDomain32 = perturb::PerturbationDomain<f32>;
pub type PerturbationDomain64 = perturb::PerturbationDomain<f64>;
pub type VictimGcn32 = eval::VictimGcn<f32>;
pub type VictimGcn64 = eval::VictimGcn<f64>;
