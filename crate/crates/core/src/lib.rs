//! Diversified multiple tree (DMT) ensembles and the machinery around them.
//!
//! A DMT model is a short list of C4.5 decision trees built one after another,
//! where every tree is forbidden from testing an attribute that an earlier tree
//! already used. The trees are combined by a simple or weighted vote.
//!
//! The crate also carries the comparison ensembles (bagging, AdaBoost.M1,
//! random forests and randomized C4.5 "random trees"), Gaussian noise
//! injection for robustness studies, stratified fold assignment and the
//! Wilcoxon signed-rank test.
//!
//! Everything here is pure computation over in-memory data and builds with
//! `no_std` + `alloc`. File formats, the parallel experiment driver and the
//! command-line runner live in the `dmt` crate.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod cv;
pub mod dataset;
pub mod dmt;
pub mod ensemble;
mod error;
pub mod math;
pub mod model;
pub mod noise;
pub mod rng;
pub mod stats;
pub mod synth;
pub mod tree;
pub mod vote;

pub use dataset::{AttributeKind, AttributeSchema, Dataset, NormalizationStats, Schema, Value};
pub use dmt::{build_dmt, DmtModel, VotingScheme};
pub use ensemble::{EnsembleKind, EnsembleModel, RandomSplitParams};
pub use error::{Error, Result};
pub use model::{Method, Model};
pub use noise::{NoiseSpec, SigmaSource};
pub use tree::{DecisionTree, Node, SplitTest, TreeParams};
pub use vote::VoteBreakdown;
