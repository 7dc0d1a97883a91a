//! Entailment network: decomposable attention plus a convolution branch over
//! the attention matrix, with a hand-written backward pass.

mod conv;
pub mod data;
pub mod gradcheck;
mod layers;
mod mat;
mod model;
mod persist;
pub mod train;

pub use conv::{conv_positions, ConvCache, ConvFeature, CONV_KERNEL};
pub use data::{evidence_pairs, generate_nei_pairs, read_pairs, synthetic_pairs, write_pairs, TrainingPair};
pub use layers::{FeedForward, FeedForwardCache, Linear};
pub use mat::{softmax_inplace, Mat};
pub use model::{ConvGate, EntailmentDistribution, EntailmentModel, ModelConfig, Params, Vocab, UNK};
pub use persist::{MODEL_FORMAT_VERSION, MODEL_MAGIC};
pub use train::{accuracy, fit, train, TrainConfig, TrainOutcome};
