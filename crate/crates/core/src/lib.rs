//! Coalesced and sparse Tsetlin machines trained as a graph of clause
//! blocks, with compiled rule-set inference, explanations and C export.

pub mod config;
pub mod dataio;
pub mod dataset;
pub mod dense;
pub mod error;
pub mod executor;
pub mod export;
pub mod feedback;
pub mod literals;
pub mod memory;
pub mod model;
pub mod predictor;
pub mod rng;
pub mod sparse;
pub mod tuning;

pub use config::Config;
pub use dataset::{Dataset, DenseDataset, SparseDataset};
pub use error::{Error, Result};
pub use executor::{evaluate, train, EpochMetrics, TrainRun, Trainer};
pub use model::{argmax, Bank, Model};
pub use predictor::{Explanation, ExplanationLevel, Rule, RuleSet};
pub use rng::{derive_stream, RngStream};
pub use sparse::SparseExample;
