//! Dense-block fraud detection on bipartite "who buys from where" graphs.
//!
//! The pipeline samples many small subgraphs from a user/merchant
//! transaction graph, runs an iterated greedy densest-block peeler on each
//! of them, and majority-votes the per-subgraph detections:
//!
//! * [`bigraph`] holds the graph model, edge-list ingestion and subgraph
//!   construction.
//! * [`density`] defines the log-degree-penalized density score and the
//!   heap-based peeling that finds one dense block.
//! * [`detect`] repeats the peeling on the residual graph and truncates the
//!   block list where the score curve drops.
//! * [`sampling`] provides random edge, one-side node and two-side node
//!   samplers.
//! * [`ensemble`] runs sample→detect in parallel and tallies votes.
//! * [`synth`] generates planted-block benchmark graphs.
//! * [`eval`] scores detections against a user blacklist.
//!
//! Score-carrying types are generic over the floating point type through
//! [`Scalar`]; the `*64` aliases below are what the CLI uses.

pub mod bigraph;
pub mod cli;
pub mod density;
pub mod detect;
pub mod ensemble;
mod error;
pub mod eval;
pub mod sampling;
mod scalar;
pub mod synth;

pub use bigraph::{BipartiteGraph, NodeLabels, NodeRef, ParsedEdgeList, SampledSubgraph, Side};
pub use density::{
    brute_force_densest, density_score, merchant_edge_weights, peel_densest, peel_sequence,
    DensityParams, MerchantWeights, PeelPriority, PeelSequence, PeelStats, ScoredBlock,
};
pub use detect::{detect_blocks, second_difference, truncating_point, DensityTrace, DetectConfig, Detection};
pub use ensemble::{apply_mva, derive_seeds, run_ensemble, EnsembleConfig, EnsembleRun, MvaResult, VoteTally};
pub use error::{Error, Result};
pub use eval::{evaluate, sweep_threshold, EvalReport};
pub use sampling::SamplerKind;
pub use scalar::Scalar;
pub use synth::{generate, BlockSpec, GroundTruth, SynthConfig};

pub type DensityParams64 = DensityParams<f64>;
pub type DensityParams32 = DensityParams<f32>;
pub type MerchantWeights64 = MerchantWeights<f64>;
pub type MerchantWeights32 = MerchantWeights<f32>;
pub type ScoredBlock64 = ScoredBlock<f64>;
pub type ScoredBlock32 = ScoredBlock<f32>;
pub type DetectConfig64 = DetectConfig<f64>;
pub type DetectConfig32 = DetectConfig<f32>;
pub type Detection64 = Detection<f64>;
pub type DensityTrace64 = DensityTrace<f64>;
pub type EnsembleConfig64 = EnsembleConfig<f64>;
pub type EnsembleConfig32 = EnsembleConfig<f32>;
