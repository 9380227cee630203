use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::{OverlapWeights, TripartiteGraph};
use crate::numeric::{make_dropout_mask, DenseMatrix, SparseMatrix};

use super::{AblationSwitches, B2bMode};

/// A normalized adjacency together with its transpose for the backward pass.
#[derive(Debug, Clone)]
pub(crate) struct Adjacency {
    pub(crate) fwd: SparseMatrix,
    pub(crate) bwd: SparseMatrix,
}

impl Adjacency {
    fn new(m: SparseMatrix) -> Self {
        Self {
            bwd: m.transpose(),
            fwd: m,
        }
    }
}

/// The adjacencies one forward/backward pair propagates over.
///
/// Normally identical to the graph's normalized matrices; under node dropout
/// the rows of dropped nodes are zeroed and kept rows are rescaled by
/// `1/(1-rate)`.
#[derive(Debug, Clone)]
pub struct PropagationGraph {
    pub(crate) user_items: Adjacency,
    pub(crate) item_users: Adjacency,
    pub(crate) bundle_items: Adjacency,
    pub(crate) user_bundles: Adjacency,
    pub(crate) bundle_users: Adjacency,
    pub(crate) bundle_bundles: Option<Adjacency>,
    num_users: usize,
    num_items: usize,
    num_bundles: usize,
}

impl PropagationGraph {
    pub fn new(
        graph: &TripartiteGraph,
        overlap: Option<&OverlapWeights>,
        switches: &AblationSwitches,
    ) -> Result<Self> {
        let bb = Self::b2b_matrix(overlap, switches)?;
        Ok(Self::assemble(
            graph,
            graph.norm_user_item().clone(),
            graph.norm_item_user().clone(),
            graph.norm_user_bundle().clone(),
            graph.norm_bundle_user().clone(),
            bb,
        ))
    }

    /// Same as [`new`](Self::new) with node dropout applied to every
    /// propagation adjacency (pooling is left intact).
    pub fn with_node_dropout<R: Rng + ?Sized>(
        graph: &TripartiteGraph,
        overlap: Option<&OverlapWeights>,
        switches: &AblationSwitches,
        rate: f64,
        rng: &mut R,
    ) -> Result<Self> {
        if rate == 0.0 {
            return Self::new(graph, overlap, switches);
        }
        assert!((0.0..1.0).contains(&rate), "node dropout rate {rate}");
        let mut keep = |n: usize| -> Vec<f64> {
            (0..n)
                .map(|_| {
                    if rng.gen::<f64>() < rate {
                        0.0
                    } else {
                        1.0 / (1.0 - rate)
                    }
                })
                .collect()
        };
        let users = keep(graph.num_users());
        let items = keep(graph.num_items());
        let bundles = keep(graph.num_bundles());
        let bb = Self::b2b_matrix(overlap, switches)?.map(|m| m.scale_rows(&bundles));
        Ok(Self::assemble(
            graph,
            graph.norm_user_item().scale_rows(&users),
            graph.norm_item_user().scale_rows(&items),
            graph.norm_user_bundle().scale_rows(&users),
            graph.norm_bundle_user().scale_rows(&bundles),
            bb,
        ))
    }

    fn b2b_matrix(
        overlap: Option<&OverlapWeights>,
        switches: &AblationSwitches,
    ) -> Result<Option<SparseMatrix>> {
        if !switches.uses_b2b() {
            return Ok(None);
        }
        let overlap = overlap.ok_or_else(|| {
            Error::config("b2b", "overlap weights required when b2b propagation is on")
        })?;
        Ok(Some(match switches.b2b {
            B2bMode::Weighted => overlap.weights().clone(),
            B2bMode::Unweighted => overlap.uniform(),
            B2bMode::None => unreachable!(),
        }))
    }

    fn assemble(
        graph: &TripartiteGraph,
        ui: SparseMatrix,
        iu: SparseMatrix,
        ub: SparseMatrix,
        bu: SparseMatrix,
        bb: Option<SparseMatrix>,
    ) -> Self {
        Self {
            user_items: Adjacency::new(ui),
            item_users: Adjacency::new(iu),
            bundle_items: Adjacency::new(graph.norm_bundle_item().clone()),
            user_bundles: Adjacency::new(ub),
            bundle_users: Adjacency::new(bu),
            bundle_bundles: bb.map(Adjacency::new),
            num_users: graph.num_users(),
            num_items: graph.num_items(),
            num_bundles: graph.num_bundles(),
        }
    }

    pub fn num_users(&self) -> usize {
        self.num_users
    }

    pub fn num_items(&self) -> usize {
        self.num_items
    }

    pub fn num_bundles(&self) -> usize {
        self.num_bundles
    }

    /// The b2b matrix in use, if any.
    pub fn bundle_bundle(&self) -> Option<&SparseMatrix> {
        self.bundle_bundles.as_ref().map(|a| &a.fwd)
    }
}

/// Message-dropout masks for one propagation layer, one per aggregate.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerMasks {
    pub user_items: DenseMatrix,
    pub item_users: DenseMatrix,
    pub user_bundles: DenseMatrix,
    pub bundle_users: DenseMatrix,
    pub bundle_bundles: DenseMatrix,
}

/// Per-layer message-dropout masks shared by a forward and its backward.
#[derive(Debug, Clone, PartialEq)]
pub struct DropoutMasks {
    pub layers: Vec<LayerMasks>,
}

impl DropoutMasks {
    pub fn sample<R: Rng + ?Sized>(
        num_users: usize,
        num_items: usize,
        num_bundles: usize,
        dim: usize,
        layers: usize,
        rate: f64,
        rng: &mut R,
    ) -> Self {
        let layers = (0..layers)
            .map(|_| LayerMasks {
                user_items: make_dropout_mask(num_users, dim, rate, rng),
                item_users: make_dropout_mask(num_items, dim, rate, rng),
                user_bundles: make_dropout_mask(num_users, dim, rate, rng),
                bundle_users: make_dropout_mask(num_bundles, dim, rate, rng),
                bundle_bundles: make_dropout_mask(num_bundles, dim, rate, rng),
            })
            .collect();
        Self { layers }
    }
}
