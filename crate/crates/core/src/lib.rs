//! Bundle recommendation with a two-level graph convolutional network.
//!
//! Users, items and bundles form a tripartite graph. Item-level propagation
//! runs over user–item edges and pools items into bundles; bundle-level
//! propagation runs over user–bundle edges plus bundle–bundle edges weighted
//! by item overlap. Training is BPR with an optional second phase of hard
//! negatives.
//!
//! ```no_run
//! use bgcn::data::{load_dataset, split, SplitSpec};
//! use bgcn::train::{train, TrainConfig};
//!
//! let ds = load_dataset("data/youshu".as_ref())?;
//! let sp = split(&ds, &SplitSpec::default())?;
//! let out = train(&TrainConfig::default(), &ds, &sp)?;
//! println!("best epoch {:?}", out.best_epoch);
//! # Ok::<(), bgcn::Error>(())
//! ```

pub mod cli;
pub mod data;
mod error;
pub mod eval;
pub mod gradcheck;
pub mod graph;
pub mod model;
pub mod numeric;
pub mod train;

pub use error::{Error, Result};
