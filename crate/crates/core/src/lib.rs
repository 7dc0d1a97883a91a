//! Claim verification against a sentence-level Wikipedia index.
//!
//! The pipeline runs in two halves. Retrieval extracts keyword phrases from a
//! claim and turns them into title and body queries against an inverted index
//! where every sentence is its own document. Decision scores each candidate
//! with a convolution-augmented decomposable attention network, filters noise
//! with a part-of-speech point system and picks a label plus up to five
//! evidence sentences.
//!
//! The numeric core ([`nn`], [`pipeline::ProbabilityMatrix`]) is generic over
//! the [`Scalar`] type. The aliases below fix the precision used by the
//! command-line tools.

pub mod config;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod index;
pub mod io;
pub mod keywords;
pub mod label;
pub mod nn;
pub mod pipeline;
pub mod pos;
pub mod scalar;
pub mod text;

pub use config::{PipelineConfig, RunConfig};
pub use error::{Error, Result};
pub use label::Label;
pub use scalar::Scalar;

/// Entailment model in the precision used for inference and training by default.
pub type Model = nn::EntailmentModel<f64>;
/// Single-precision entailment model.
pub type ModelF32 = nn::EntailmentModel<f32>;
/// Probability matrix over candidates at default precision.
pub type ProbabilityMatrix = pipeline::ProbabilityMatrix<f64>;
