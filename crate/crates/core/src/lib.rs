//! Cost-aware cascade text classification.
//!
//! A calibrated logistic regression over precomputed document embeddings
//! labels every document; those it is unsure about are sent to an LLM.
//! The crate also provides the evaluation harness: stratified folds,
//! threshold tuning, effectiveness statistics and time/dollar/CO₂ costs.

// Negated comparisons reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod classifier;
pub mod corpus;
pub mod cost;
pub mod embed_store;
pub mod error;
pub mod harness;
pub mod llm;
pub mod metrics;
pub mod router;

pub use error::{Error, Result};
