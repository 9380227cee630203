//! BGCN propagation, scoring and gradients, plus the MF-BPR baseline.

mod backward;
mod forward;
mod mf;
mod params;
mod propagation;
mod switches;

pub use backward::{bgcn_loss, bgcn_loss_and_grad};
pub use forward::{forward, BundleLevel, ItemLevel, PropagatedEmbeddings};
pub use mf::{mf_bpr_loss, mf_bpr_loss_and_grad, MfParams};
pub use params::{glorot_uniform, BgcnParams, Parameters};
pub use propagation::{DropoutMasks, LayerMasks, PropagationGraph};
pub use switches::{AblationSwitches, B2bMode};

/// Default LeakyReLU negative slope.
pub const DEFAULT_LEAKY_SLOPE: f64 = 0.01;

/// Parameters of either trainable model.
#[derive(Debug, Clone, PartialEq)]
pub enum TrainedModel {
    Bgcn(BgcnParams),
    Mf(MfParams),
}

impl TrainedModel {
    pub fn num_users(&self) -> usize {
        match self {
            TrainedModel::Bgcn(p) => p.num_users(),
            TrainedModel::Mf(p) => p.num_users(),
        }
    }

    pub fn num_bundles(&self) -> usize {
        match self {
            TrainedModel::Bgcn(p) => p.num_bundles(),
            TrainedModel::Mf(p) => p.num_bundles(),
        }
    }

    pub fn tensor_names(&self) -> Vec<String> {
        match self {
            TrainedModel::Bgcn(p) => p.tensor_names(),
            TrainedModel::Mf(p) => p.tensor_names(),
        }
    }

    pub fn tensors(&self) -> Vec<&crate::numeric::DenseMatrix> {
        match self {
            TrainedModel::Bgcn(p) => p.tensors(),
            TrainedModel::Mf(p) => p.tensors(),
        }
    }
}
