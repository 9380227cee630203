use crate::error::{Error, Result};
use crate::numeric::{leaky_relu_grad_mask, DenseMatrix};
use crate::train::{log_sigmoid, sigmoid, TrainTriple};

use super::forward::{BundleLevel, ItemLevel};
use super::propagation::Adjacency;
use super::{forward, AblationSwitches, BgcnParams, DropoutMasks, Parameters, PropagationGraph};

/// Mini-batch objective `Σ −ln σ(ŷ_ub − ŷ_uc) + λ‖Θ‖²`.
pub fn bgcn_loss(
    params: &BgcnParams,
    adj: &PropagationGraph,
    switches: &AblationSwitches,
    masks: Option<&DropoutMasks>,
    batch: &[TrainTriple],
    lambda: f64,
    slope: f64,
) -> Result<f64> {
    let emb = forward(params, adj, switches, masks, slope)?;
    let data: f64 = batch
        .iter()
        .map(|t| {
            let x = emb.predict(t.user as usize, t.pos as usize)
                - emb.predict(t.user as usize, t.neg as usize);
            -log_sigmoid(x)
        })
        .sum();
    Ok(data + lambda * params.sum_squares())
}

fn zeros_layers(n: usize, rows: usize, dim: usize) -> Vec<DenseMatrix> {
    (0..n).map(|_| DenseMatrix::zeros(rows, dim)).collect()
}

/// Accumulates `coef · src.row(s)` into `dst.row(d)`.
fn add_row(dst: &mut DenseMatrix, d: usize, src: &DenseMatrix, s: usize, coef: f64) {
    let src_row = src.row(s);
    for (o, v) in dst.row_mut(d).iter_mut().zip(src_row) {
        *o += coef * v;
    }
}

/// Gradient through `h = self + mask ⊙ (A · src)`: returns `Aᵀ (mask ⊙ dh)`.
fn aggregate_back(
    adj: &Adjacency,
    dh: &DenseMatrix,
    mask: Option<&DenseMatrix>,
) -> Result<DenseMatrix> {
    match mask {
        Some(m) => adj.bwd.spmm(&dh.hadamard(m)?),
        None => adj.bwd.spmm(dh),
    }
}

/// Backprop through `out = σ(input · W + b)`; returns the gradient w.r.t. `input`.
fn transform_back(
    d_out: &DenseMatrix,
    pre: &DenseMatrix,
    input: &DenseMatrix,
    weight: &DenseMatrix,
    grad_w: &mut DenseMatrix,
    grad_b: &mut DenseMatrix,
    slope: f64,
) -> Result<DenseMatrix> {
    let dz = d_out.hadamard(&leaky_relu_grad_mask(pre, slope))?;
    grad_w.add_assign(&input.t_matmul(&dz)?)?;
    grad_b.add_assign(&dz.col_sums())?;
    dz.matmul_t(weight)
}

fn ensure_finite(m: &DenseMatrix, what: impl FnOnce() -> String) -> Result<()> {
    if m.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFinite(what()))
    }
}

#[allow(clippy::too_many_arguments)]
fn item_level_back(
    params: &BgcnParams,
    adj: &PropagationGraph,
    masks: Option<&DropoutMasks>,
    level: &ItemLevel,
    mut d_users: Vec<DenseMatrix>,
    d_bundles: Vec<DenseMatrix>,
    grads: &mut BgcnParams,
    slope: f64,
) -> Result<()> {
    let mut d_items = d_bundles
        .iter()
        .map(|g| adj.bundle_items.bwd.spmm(g))
        .collect::<Result<Vec<_>>>()?;
    for l in (0..params.num_layers()).rev() {
        let lm = masks.map(|m| &m.layers[l]);
        let du = transform_back(
            &d_users[l + 1],
            &level.user_pre[l],
            &level.user_in[l],
            &params.item_weights[l],
            &mut grads.item_weights[l],
            &mut grads.item_biases[l],
            slope,
        )?;
        let di = transform_back(
            &d_items[l + 1],
            &level.item_pre[l],
            &level.item_in[l],
            &params.item_weights[l],
            &mut grads.item_weights[l],
            &mut grads.item_biases[l],
            slope,
        )?;
        d_users[l].add_assign(&du)?;
        d_users[l].add_assign(&aggregate_back(
            &adj.item_users,
            &di,
            lm.map(|m| &m.item_users),
        )?)?;
        d_items[l].add_assign(&di)?;
        d_items[l].add_assign(&aggregate_back(
            &adj.user_items,
            &du,
            lm.map(|m| &m.user_items),
        )?)?;
        ensure_finite(&d_users[l], || {
            format!("item level layer {} user gradient", l + 1)
        })?;
        ensure_finite(&d_items[l], || {
            format!("item level layer {} item gradient", l + 1)
        })?;
    }
    grads.users.add_assign(&d_users[0])?;
    grads.items.add_assign(&d_items[0])?;
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn bundle_level_back(
    params: &BgcnParams,
    adj: &PropagationGraph,
    masks: Option<&DropoutMasks>,
    level: &BundleLevel,
    mut d_users: Vec<DenseMatrix>,
    mut d_bundles: Vec<DenseMatrix>,
    grads: &mut BgcnParams,
    slope: f64,
) -> Result<()> {
    for l in (0..params.num_layers()).rev() {
        let lm = masks.map(|m| &m.layers[l]);
        let du = transform_back(
            &d_users[l + 1],
            &level.user_pre[l],
            &level.user_in[l],
            &params.bundle_weights[l],
            &mut grads.bundle_weights[l],
            &mut grads.bundle_biases[l],
            slope,
        )?;
        let db = transform_back(
            &d_bundles[l + 1],
            &level.bundle_pre[l],
            &level.bundle_in[l],
            &params.bundle_weights[l],
            &mut grads.bundle_weights[l],
            &mut grads.bundle_biases[l],
            slope,
        )?;
        d_users[l].add_assign(&du)?;
        d_users[l].add_assign(&aggregate_back(
            &adj.bundle_users,
            &db,
            lm.map(|m| &m.bundle_users),
        )?)?;
        d_bundles[l].add_assign(&db)?;
        d_bundles[l].add_assign(&aggregate_back(
            &adj.user_bundles,
            &du,
            lm.map(|m| &m.user_bundles),
        )?)?;
        if let Some(bb) = &adj.bundle_bundles {
            d_bundles[l].add_assign(&aggregate_back(bb, &db, lm.map(|m| &m.bundle_bundles))?)?;
        }
        ensure_finite(&d_users[l], || {
            format!("bundle level layer {} user gradient", l + 1)
        })?;
        ensure_finite(&d_bundles[l], || {
            format!("bundle level layer {} bundle gradient", l + 1)
        })?;
    }
    grads.users.add_assign(&d_users[0])?;
    grads.bundles.add_assign(&d_bundles[0])?;
    Ok(())
}

/// Loss and exact gradients for every parameter tensor.
///
/// `masks` must be the same masks (or lack thereof) a paired forward used;
/// `adj` carries any node dropout.
#[allow(clippy::too_many_arguments)]
pub fn bgcn_loss_and_grad(
    params: &BgcnParams,
    adj: &PropagationGraph,
    switches: &AblationSwitches,
    masks: Option<&DropoutMasks>,
    batch: &[TrainTriple],
    lambda: f64,
    slope: f64,
) -> Result<(f64, BgcnParams)> {
    let emb = forward(params, adj, switches, masks, slope)?;
    let layers = params.num_layers();
    let dim = params.dim();
    let (m, n) = (params.num_users(), params.num_bundles());

    let mut grads = params.zeros_like();
    for (g, p) in grads.tensors_mut().into_iter().zip(params.tensors()) {
        g.axpy(2.0 * lambda, p)?;
    }

    let mut loss = 0.0;
    let mut d_item = emb.item.as_ref().map(|_| {
        (
            zeros_layers(layers + 1, m, dim),
            zeros_layers(layers + 1, n, dim),
        )
    });
    let mut d_bundle = emb.bundle.as_ref().map(|_| {
        (
            zeros_layers(layers + 1, m, dim),
            zeros_layers(layers + 1, n, dim),
        )
    });

    for t in batch {
        let (u, b, c) = (t.user as usize, t.pos as usize, t.neg as usize);
        let x = emb.predict(u, b) - emb.predict(u, c);
        loss -= log_sigmoid(x);
        // d/dx of −ln σ(x)
        let coef = -sigmoid(-x);
        if let (Some(level), Some((du, db))) = (&emb.item, d_item.as_mut()) {
            for l in 0..=layers {
                add_row(&mut du[l], u, &level.bundles[l], b, coef);
                add_row(&mut du[l], u, &level.bundles[l], c, -coef);
                add_row(&mut db[l], b, &level.users[l], u, coef);
                add_row(&mut db[l], c, &level.users[l], u, -coef);
            }
        }
        if let (Some(level), Some((du, db))) = (&emb.bundle, d_bundle.as_mut()) {
            for l in 0..=layers {
                add_row(&mut du[l], u, &level.bundles[l], b, coef);
                add_row(&mut du[l], u, &level.bundles[l], c, -coef);
                add_row(&mut db[l], b, &level.users[l], u, coef);
                add_row(&mut db[l], c, &level.users[l], u, -coef);
            }
        }
    }
    loss += lambda * params.sum_squares();
    if !loss.is_finite() {
        return Err(Error::NonFinite("mini-batch loss".into()));
    }

    if let (Some(level), Some((du, db))) = (&emb.item, d_item) {
        item_level_back(params, adj, masks, level, du, db, &mut grads, slope)?;
    }
    if let (Some(level), Some((du, db))) = (&emb.bundle, d_bundle) {
        bundle_level_back(params, adj, masks, level, du, db, &mut grads, slope)?;
    }
    Ok((loss, grads))
}
