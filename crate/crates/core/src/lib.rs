//! Gradient-based parameter activation analysis for small decoder-only
//! transformers: per-weight first-order saliency, layer-wise cosine similarity
//! between inputs (LLMDcos), activation-informed sparsity schedules with Wanda
//! pruning, and the evaluation utilities used to check them.

pub mod activation;
pub mod autodiff;
pub mod cli;
pub mod config;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod llmdcos;
pub mod model;
pub mod pruning;
pub mod report;
pub mod stats;
pub mod tokenizer;

pub use error::{Error, Result};
