use crate::error::{Error, Result};
use crate::numeric::{concat_rows, leaky_relu, DenseMatrix};

use super::propagation::{Adjacency, DropoutMasks};
use super::{AblationSwitches, BgcnParams, PropagationGraph};

/// Item-level layers `0..=L` plus the cached layer inputs and pre-activations.
#[derive(Debug, Clone)]
pub struct ItemLevel {
    pub users: Vec<DenseMatrix>,
    pub items: Vec<DenseMatrix>,
    /// Item pooling of `items[ℓ]`, for every layer including 0.
    pub bundles: Vec<DenseMatrix>,
    pub(crate) user_in: Vec<DenseMatrix>,
    pub(crate) item_in: Vec<DenseMatrix>,
    pub(crate) user_pre: Vec<DenseMatrix>,
    pub(crate) item_pre: Vec<DenseMatrix>,
}

/// Bundle-level layers `0..=L` plus cached inputs and pre-activations.
#[derive(Debug, Clone)]
pub struct BundleLevel {
    pub users: Vec<DenseMatrix>,
    pub bundles: Vec<DenseMatrix>,
    pub(crate) user_in: Vec<DenseMatrix>,
    pub(crate) bundle_in: Vec<DenseMatrix>,
    pub(crate) user_pre: Vec<DenseMatrix>,
    pub(crate) bundle_pre: Vec<DenseMatrix>,
}

/// Output of a full-graph forward pass.
///
/// The four concatenations hold layers `0..=L` side by side, so each is
/// `(L+1)·d` wide. Disabled levels are `None`.
#[derive(Debug, Clone)]
pub struct PropagatedEmbeddings {
    pub item: Option<ItemLevel>,
    pub bundle: Option<BundleLevel>,
    pub item_users_cat: Option<DenseMatrix>,
    pub item_bundles_cat: Option<DenseMatrix>,
    pub bundle_users_cat: Option<DenseMatrix>,
    pub bundle_bundles_cat: Option<DenseMatrix>,
    num_users: usize,
    num_bundles: usize,
}

fn aggregate(
    adj: &Adjacency,
    src: &DenseMatrix,
    mask: Option<&DenseMatrix>,
) -> Result<DenseMatrix> {
    let agg = adj.fwd.spmm(src)?;
    match mask {
        Some(m) => agg.hadamard(m),
        None => Ok(agg),
    }
}

fn transform(
    input: &DenseMatrix,
    weight: &DenseMatrix,
    bias: &DenseMatrix,
    slope: f64,
) -> Result<(DenseMatrix, DenseMatrix)> {
    let mut pre = input.matmul(weight)?;
    pre.add_row_broadcast(bias)?;
    let out = leaky_relu(&pre, slope);
    Ok((pre, out))
}

fn check_masks(masks: Option<&DropoutMasks>, layers: usize) -> Result<()> {
    match masks {
        Some(m) if m.layers.len() != layers => Err(Error::shape(
            "forward",
            format!(
                "{} mask layers for {layers} propagation layers",
                m.layers.len()
            ),
        )),
        _ => Ok(()),
    }
}

fn item_level(
    params: &BgcnParams,
    adj: &PropagationGraph,
    masks: Option<&DropoutMasks>,
    slope: f64,
) -> Result<ItemLevel> {
    let layers = params.num_layers();
    let mut users = vec![params.users.clone()];
    let mut items = vec![params.items.clone()];
    let (mut user_in, mut item_in, mut user_pre, mut item_pre) =
        (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for l in 0..layers {
        let lm = masks.map(|m| &m.layers[l]);
        let h_u = users[l].add(&aggregate(
            &adj.user_items,
            &items[l],
            lm.map(|m| &m.user_items),
        )?)?;
        let h_i = items[l].add(&aggregate(
            &adj.item_users,
            &users[l],
            lm.map(|m| &m.item_users),
        )?)?;
        let (z_u, p) = transform(&h_u, &params.item_weights[l], &params.item_biases[l], slope)?;
        let (z_i, q) = transform(&h_i, &params.item_weights[l], &params.item_biases[l], slope)?;
        user_in.push(h_u);
        item_in.push(h_i);
        user_pre.push(z_u);
        item_pre.push(z_i);
        users.push(p);
        items.push(q);
    }
    let bundles = items
        .iter()
        .map(|q| adj.bundle_items.fwd.spmm(q))
        .collect::<Result<Vec<_>>>()?;
    Ok(ItemLevel {
        users,
        items,
        bundles,
        user_in,
        item_in,
        user_pre,
        item_pre,
    })
}

fn bundle_level(
    params: &BgcnParams,
    adj: &PropagationGraph,
    masks: Option<&DropoutMasks>,
    slope: f64,
) -> Result<BundleLevel> {
    let layers = params.num_layers();
    let mut users = vec![params.users.clone()];
    let mut bundles = vec![params.bundles.clone()];
    let (mut user_in, mut bundle_in, mut user_pre, mut bundle_pre) =
        (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for l in 0..layers {
        let lm = masks.map(|m| &m.layers[l]);
        let h_u = users[l].add(&aggregate(
            &adj.user_bundles,
            &bundles[l],
            lm.map(|m| &m.user_bundles),
        )?)?;
        let mut h_b = bundles[l].add(&aggregate(
            &adj.bundle_users,
            &users[l],
            lm.map(|m| &m.bundle_users),
        )?)?;
        if let Some(bb) = &adj.bundle_bundles {
            h_b.add_assign(&aggregate(bb, &bundles[l], lm.map(|m| &m.bundle_bundles))?)?;
        }
        let (z_u, p) = transform(
            &h_u,
            &params.bundle_weights[l],
            &params.bundle_biases[l],
            slope,
        )?;
        let (z_b, r) = transform(
            &h_b,
            &params.bundle_weights[l],
            &params.bundle_biases[l],
            slope,
        )?;
        user_in.push(h_u);
        bundle_in.push(h_b);
        user_pre.push(z_u);
        bundle_pre.push(z_b);
        users.push(p);
        bundles.push(r);
    }
    Ok(BundleLevel {
        users,
        bundles,
        user_in,
        bundle_in,
        user_pre,
        bundle_pre,
    })
}

fn cat(layers: &[DenseMatrix]) -> Result<DenseMatrix> {
    concat_rows(&layers.iter().collect::<Vec<_>>())
}

/// Full-graph two-level propagation.
pub fn forward(
    params: &BgcnParams,
    adj: &PropagationGraph,
    switches: &AblationSwitches,
    masks: Option<&DropoutMasks>,
    slope: f64,
) -> Result<PropagatedEmbeddings> {
    switches.validate()?;
    check_masks(masks, params.num_layers())?;
    if params.num_users() != adj.num_users()
        || params.num_items() != adj.num_items()
        || params.num_bundles() != adj.num_bundles()
    {
        return Err(Error::shape(
            "forward",
            format!(
                "params {}u/{}i/{}b vs graph {}u/{}i/{}b",
                params.num_users(),
                params.num_items(),
                params.num_bundles(),
                adj.num_users(),
                adj.num_items(),
                adj.num_bundles()
            ),
        ));
    }
    let item = switches
        .item_level
        .then(|| item_level(params, adj, masks, slope))
        .transpose()?;
    let bundle = switches
        .bundle_level
        .then(|| bundle_level(params, adj, masks, slope))
        .transpose()?;
    let (item_users_cat, item_bundles_cat) = match &item {
        Some(lv) => (Some(cat(&lv.users)?), Some(cat(&lv.bundles)?)),
        None => (None, None),
    };
    let (bundle_users_cat, bundle_bundles_cat) = match &bundle {
        Some(lv) => (Some(cat(&lv.users)?), Some(cat(&lv.bundles)?)),
        None => (None, None),
    };
    Ok(PropagatedEmbeddings {
        item,
        bundle,
        item_users_cat,
        item_bundles_cat,
        bundle_users_cat,
        bundle_bundles_cat,
        num_users: params.num_users(),
        num_bundles: params.num_bundles(),
    })
}

fn level_dot(
    users: &Option<DenseMatrix>,
    bundles: &Option<DenseMatrix>,
    u: usize,
    b: usize,
) -> f64 {
    match (users, bundles) {
        (Some(p), Some(r)) => crate::numeric::dense::dot(p.row(u), r.row(b)),
        _ => 0.0,
    }
}

impl PropagatedEmbeddings {
    pub fn num_users(&self) -> usize {
        self.num_users
    }

    pub fn num_bundles(&self) -> usize {
        self.num_bundles
    }

    /// `⟨p*_{u,1}, r*_{b,1}⟩ + ⟨p*_{u,2}, r*_{b,2}⟩`, skipping disabled levels.
    pub fn predict(&self, u: usize, b: usize) -> f64 {
        level_dot(&self.item_users_cat, &self.item_bundles_cat, u, b)
            + level_dot(&self.bundle_users_cat, &self.bundle_bundles_cat, u, b)
    }

    /// Scores of user `u` against every bundle.
    pub fn score_user(&self, u: usize, out: &mut [f64]) {
        assert_eq!(out.len(), self.num_bundles);
        out.iter_mut().for_each(|v| *v = 0.0);
        for (users, bundles) in [
            (&self.item_users_cat, &self.item_bundles_cat),
            (&self.bundle_users_cat, &self.bundle_bundles_cat),
        ] {
            if let (Some(p), Some(r)) = (users, bundles) {
                let pu = p.row(u);
                for (b, o) in out.iter_mut().enumerate() {
                    *o += crate::numeric::dense::dot(pu, r.row(b));
                }
            }
        }
    }
}
