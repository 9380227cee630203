//! Dataset files, splits, the synthetic generator and checkpoints.

mod checkpoint;
mod dataset;
mod fsutil;
mod split;
mod synth;

pub use checkpoint::{
    checkpoint_size, decode_checkpoint, encode_checkpoint, load_checkpoint, save_checkpoint,
    Checkpoint, CHECKPOINT_MAGIC, CHECKPOINT_VERSION,
};
pub use dataset::{load_dataset, save_dataset, Dataset, DatasetStats, Provenance};
pub use fsutil::atomic_write;
pub use split::{split, Interactions, Split, SplitSpec};
pub use synth::{synth_generate, write_affinity, SynthDataset, SynthSpec};
