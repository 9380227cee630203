//! Finite-difference verification of the BGCN gradients on a tiny graph.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::graph::{OverlapWeights, TripartiteGraph};
use crate::model::{
    bgcn_loss, bgcn_loss_and_grad, AblationSwitches, BgcnParams, DropoutMasks, Parameters,
    PropagationGraph, DEFAULT_LEAKY_SLOPE,
};
use crate::numeric::{finite_diff_grad, relative_error};
use crate::train::TrainTriple;

pub const TOY_USERS: usize = 5;
pub const TOY_ITEMS: usize = 8;
pub const TOY_BUNDLES: usize = 4;
pub const TOY_DIM: usize = 8;
pub const TOY_LAYERS: usize = 2;

/// Pass threshold on the per-tensor relative error.
pub const GRADCHECK_TOLERANCE: f64 = 1e-4;

/// The fixed toy graph plus seeded parameters, masks and a batch.
pub struct ToyInstance {
    pub graph: TripartiteGraph,
    pub overlap: OverlapWeights,
    pub params: BgcnParams,
    pub masks: DropoutMasks,
    pub batch: Vec<TrainTriple>,
    pub lambda: f64,
}

pub fn toy_instance(seed: u64) -> Result<ToyInstance> {
    let ub = [
        (0, 0),
        (0, 2),
        (1, 1),
        (2, 3),
        (2, 0),
        (3, 2),
        (4, 1),
        (4, 3),
    ];
    let ui = [
        (0, 0),
        (0, 1),
        (0, 4),
        (1, 2),
        (1, 3),
        (2, 5),
        (2, 6),
        (3, 4),
        (3, 7),
        (4, 1),
        (4, 6),
        (4, 7),
    ];
    let bi = [
        (0, 0),
        (0, 1),
        (0, 2),
        (1, 2),
        (1, 3),
        (2, 4),
        (2, 5),
        (2, 0),
        (3, 6),
        (3, 7),
        (3, 5),
    ];
    let graph = TripartiteGraph::build(&ub, &ui, &bi, TOY_USERS, TOY_BUNDLES, TOY_ITEMS)?;
    let overlap = OverlapWeights::build(&graph);
    let mut params = BgcnParams::init(TOY_USERS, TOY_BUNDLES, TOY_ITEMS, TOY_DIM, TOY_LAYERS, seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xabcdef);
    // nonzero biases so their gradients are exercised away from init
    for b in params
        .item_biases
        .iter_mut()
        .chain(params.bundle_biases.iter_mut())
    {
        for v in b.as_mut_slice() {
            *v = rng.gen_range(-0.1..0.1);
        }
    }
    let masks = DropoutMasks::sample(
        TOY_USERS,
        TOY_ITEMS,
        TOY_BUNDLES,
        TOY_DIM,
        TOY_LAYERS,
        0.2,
        &mut rng,
    );
    let batch = vec![
        TrainTriple::new(0, 0, 1, false),
        TrainTriple::new(1, 1, 3, false),
        TrainTriple::new(2, 3, 2, true),
        TrainTriple::new(3, 2, 0, false),
        TrainTriple::new(4, 3, 0, true),
        TrainTriple::new(0, 2, 3, false),
    ];
    Ok(ToyInstance {
        graph,
        overlap,
        params,
        masks,
        batch,
        lambda: 1e-3,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TensorCheck {
    pub switches: AblationSwitches,
    pub tensor: String,
    pub rel_error: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct GradCheckReport {
    pub entries: Vec<TensorCheck>,
}

impl GradCheckReport {
    pub fn max_error(&self) -> f64 {
        self.entries.iter().map(|e| e.rel_error).fold(0.0, f64::max)
    }

    pub fn passed(&self) -> bool {
        self.entries
            .iter()
            .all(|e| e.rel_error < GRADCHECK_TOLERANCE)
    }

    pub fn to_table(&self) -> String {
        let mut s = String::new();
        for e in &self.entries {
            let flag = if e.rel_error < GRADCHECK_TOLERANCE {
                "ok"
            } else {
                "FAIL"
            };
            let _ = writeln!(
                s,
                "{:<32} {:<16} {:.3e} {flag}",
                e.switches.to_string(),
                e.tensor,
                e.rel_error
            );
        }
        s
    }
}

/// Checks every tensor under every combination in `combos`.
///
/// `corrupt` perturbs one analytic gradient entry as a negative control.
pub fn gradcheck_suite(
    seed: u64,
    combos: &[AblationSwitches],
    corrupt: bool,
) -> Result<GradCheckReport> {
    let toy = toy_instance(seed)?;
    let slope = DEFAULT_LEAKY_SLOPE;
    let eps = 1e-6;
    let mut report = GradCheckReport::default();
    for sw in combos {
        sw.validate()?;
        let adj = PropagationGraph::new(&toy.graph, sw.uses_b2b().then_some(&toy.overlap), sw)?;
        let masks = Some(&toy.masks);
        let (_, mut grads) =
            bgcn_loss_and_grad(&toy.params, &adj, sw, masks, &toy.batch, toy.lambda, slope)?;
        if corrupt {
            grads.users.as_mut_slice()[0] += 1.0;
        }
        let names = toy.params.tensor_names();
        for (k, name) in names.iter().enumerate() {
            let numeric = finite_diff_grad(
                |t| {
                    let mut p = toy.params.clone();
                    *p.tensors_mut()[k] = t.clone();
                    bgcn_loss(&p, &adj, sw, masks, &toy.batch, toy.lambda, slope)
                        .expect("toy loss evaluates")
                },
                toy.params.tensors()[k],
                eps,
            );
            report.entries.push(TensorCheck {
                switches: *sw,
                tensor: name.clone(),
                rel_error: relative_error(grads.tensors()[k], &numeric),
            });
        }
    }
    Ok(report)
}
