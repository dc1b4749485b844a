//! Forecasting behavioural tipping of transformer language models between a
//! desirable basin `B` and an undesirable basin `D`.
//!
//! The crate works on hidden states exported in the HSF fixture format
//! ([`hsf`]) and provides:
//!
//! - [`basin`]: basin centroids, the order parameter `x = C·(D−B)`, the
//!   closed-form tipping index and the one-step timing rule;
//! - [`cohesion`]: cluster cohesion of the mixed-species cosine graph;
//! - [`toy`]: a single transformer block (multi-head attention, RMSNorm,
//!   SwiGLU) driven by greedy decoding over lifted `A/B/D` embeddings;
//! - [`regime`]: the noisy logistic-like map, trajectory symbolisation and
//!   the seven-regime classifier;
//! - [`corpus`]: turn-level design matrices, clustered logistic GEE and the
//!   role-preserving shuffled null;
//! - [`service`]: per-conversation sessions that re-forecast after every turn.

pub mod basin;
pub mod cohesion;
pub mod corpus;
pub mod error;
pub mod fixtures;
pub mod hsf;
pub mod regime;
#[cfg(feature = "service")]
pub mod service;
pub mod toy;
pub mod vector;

pub use error::{Error, Result};
pub use hsf::{Group, Label, LabeledStateSet};
