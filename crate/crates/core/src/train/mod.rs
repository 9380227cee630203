//! Pairwise BPR training with uniform and hard negative sampling.

mod config;
mod hard;
mod loss;
mod sampler;
mod trainer;

pub use config::{HardFamilies, ModelKind, TrainConfig, ABLATION_NAMES};
pub use hard::{sample_hard, HardCandidateIndex};
pub use loss::{bpr_loss, log_sigmoid, sigmoid, softplus};
pub use sampler::{
    sample_positive, sample_uniform_batch, sample_uniform_negative, TrainTriple, UniformSampler,
};
pub use trainer::{
    freeze, init_model, train, train_graph, FrozenModel, LogRecord, Phase, TrainOutcome,
    TrainStatus, TrainingLog,
};
