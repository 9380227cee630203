//! The user–item–bundle graph and the bundle–item–bundle overlap weights.

use crate::error::{Error, Result};
use crate::numeric::SparseMatrix;

/// Relation along which [`TripartiteGraph::neighbors`] looks up neighbors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    UserItems,
    ItemUsers,
    UserBundles,
    BundleUsers,
    BundleItems,
    ItemBundles,
}

/// Users, bundles and items joined by three binary relations.
///
/// `ub` should hold only the training user–bundle interactions; `ui` and `bi`
/// are side information and are kept whole.
#[derive(Debug, Clone)]
pub struct TripartiteGraph {
    num_users: usize,
    num_bundles: usize,
    num_items: usize,
    ub: SparseMatrix,
    ui: SparseMatrix,
    bi: SparseMatrix,
    bu: SparseMatrix,
    iu: SparseMatrix,
    ib: SparseMatrix,
    norm_ui: SparseMatrix,
    norm_iu: SparseMatrix,
    norm_bi: SparseMatrix,
    norm_ub: SparseMatrix,
    norm_bu: SparseMatrix,
}

impl TripartiteGraph {
    /// Builds all relation matrices and their row-normalized forms.
    ///
    /// Duplicate pairs collapse to a single edge. Every bundle must contain
    /// at least one item.
    pub fn build(
        ub_pairs: &[(u32, u32)],
        ui_pairs: &[(u32, u32)],
        bi_pairs: &[(u32, u32)],
        num_users: usize,
        num_bundles: usize,
        num_items: usize,
    ) -> Result<Self> {
        let ub = SparseMatrix::from_pairs(num_users, num_bundles, ub_pairs)?;
        let ui = SparseMatrix::from_pairs(num_users, num_items, ui_pairs)?;
        let bi = SparseMatrix::from_pairs(num_bundles, num_items, bi_pairs)?;
        if let Some(b) = (0..num_bundles).find(|&b| bi.row_nnz(b) == 0) {
            return Err(Error::Load {
                path: "bundle_item".into(),
                line: 0,
                msg: format!("bundle {b} has no items"),
            });
        }
        let bu = ub.transpose();
        let iu = ui.transpose();
        let ib = bi.transpose();
        Ok(Self {
            num_users,
            num_bundles,
            num_items,
            norm_ui: ui.row_normalized(),
            norm_iu: iu.row_normalized(),
            norm_bi: bi.row_normalized(),
            norm_ub: ub.row_normalized(),
            norm_bu: bu.row_normalized(),
            ub,
            ui,
            bi,
            bu,
            iu,
            ib,
        })
    }

    pub fn num_users(&self) -> usize {
        self.num_users
    }

    pub fn num_bundles(&self) -> usize {
        self.num_bundles
    }

    pub fn num_items(&self) -> usize {
        self.num_items
    }

    pub fn user_bundle(&self) -> &SparseMatrix {
        &self.ub
    }

    pub fn user_item(&self) -> &SparseMatrix {
        &self.ui
    }

    pub fn bundle_item(&self) -> &SparseMatrix {
        &self.bi
    }

    pub fn item_bundle(&self) -> &SparseMatrix {
        &self.ib
    }

    /// Mean over a user's items.
    pub fn norm_user_item(&self) -> &SparseMatrix {
        &self.norm_ui
    }

    /// Mean over an item's users.
    pub fn norm_item_user(&self) -> &SparseMatrix {
        &self.norm_iu
    }

    /// Mean over a bundle's items (pooling).
    pub fn norm_bundle_item(&self) -> &SparseMatrix {
        &self.norm_bi
    }

    pub fn norm_user_bundle(&self) -> &SparseMatrix {
        &self.norm_ub
    }

    pub fn norm_bundle_user(&self) -> &SparseMatrix {
        &self.norm_bu
    }

    fn relation(&self, rel: Relation) -> &SparseMatrix {
        match rel {
            Relation::UserItems => &self.ui,
            Relation::ItemUsers => &self.iu,
            Relation::UserBundles => &self.ub,
            Relation::BundleUsers => &self.bu,
            Relation::BundleItems => &self.bi,
            Relation::ItemBundles => &self.ib,
        }
    }

    /// Sorted, deduplicated neighbor ids of `id` under `rel`.
    pub fn neighbors(&self, rel: Relation, id: usize) -> Result<&[u32]> {
        let m = self.relation(rel);
        if id >= m.rows() {
            return Err(Error::Index {
                what: "node",
                index: id,
                len: m.rows(),
            });
        }
        Ok(m.row_indices(id))
    }

    pub fn user_bundle_degree(&self, u: usize) -> usize {
        self.ub.row_nnz(u)
    }
}

/// How raw shared-item counts are turned into β weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OverlapKind {
    /// Shared-item count, row-normalized.
    #[default]
    Count,
    /// Shared count over union size, row-normalized. Experimental.
    Jaccard,
}

/// β weights on the bundle–item–bundle meta-path.
///
/// Zero diagonal, nonnegative entries, and every nonempty row sums to 1.
/// The support is symmetric; values are not, since rows normalize separately.
#[derive(Debug, Clone)]
pub struct OverlapWeights {
    counts: SparseMatrix,
    weights: SparseMatrix,
}

impl OverlapWeights {
    pub fn build(graph: &TripartiteGraph) -> Self {
        Self::build_with(graph, OverlapKind::Count)
    }

    pub fn build_with(graph: &TripartiteGraph, kind: OverlapKind) -> Self {
        let n = graph.num_bundles();
        let bi = graph.bundle_item();
        let ib = graph.item_bundle();
        let mut acc = vec![0u32; n];
        let mut touched: Vec<u32> = Vec::new();
        let mut count_rows = Vec::with_capacity(n);
        for b in 0..n {
            for &i in bi.row_indices(b) {
                for &other in ib.row_indices(i as usize) {
                    if other as usize == b {
                        continue;
                    }
                    if acc[other as usize] == 0 {
                        touched.push(other);
                    }
                    acc[other as usize] += 1;
                }
            }
            touched.sort_unstable();
            let row: Vec<(u32, f64)> = touched
                .iter()
                .map(|&c| (c, f64::from(acc[c as usize])))
                .collect();
            for &c in &touched {
                acc[c as usize] = 0;
            }
            touched.clear();
            count_rows.push(row);
        }
        let counts = SparseMatrix::from_sorted_rows(n, count_rows);
        let raw = match kind {
            OverlapKind::Count => counts.clone(),
            OverlapKind::Jaccard => {
                let rows = (0..n)
                    .map(|b| {
                        let size_b = bi.row_nnz(b) as f64;
                        counts
                            .row_indices(b)
                            .iter()
                            .zip(counts.row_values(b))
                            .map(|(&c, &shared)| {
                                let union = size_b + bi.row_nnz(c as usize) as f64 - shared;
                                (c, shared / union)
                            })
                            .collect()
                    })
                    .collect();
                SparseMatrix::from_sorted_rows(n, rows)
            }
        };
        Self {
            weights: raw.row_normalized(),
            counts,
        }
    }

    /// Raw shared-item counts `|items(b) ∩ items(b′)|`, diagonal excluded.
    pub fn counts(&self) -> &SparseMatrix {
        &self.counts
    }

    /// Normalized β.
    pub fn weights(&self) -> &SparseMatrix {
        &self.weights
    }

    /// Same support as β with uniform `1/|M_b|` weights.
    pub fn uniform(&self) -> SparseMatrix {
        let mut binary = self.counts.clone();
        let rows = (0..binary.rows())
            .map(|b| binary.row_indices(b).iter().map(|&c| (c, 1.0)).collect())
            .collect();
        binary = SparseMatrix::from_sorted_rows(self.counts.cols(), rows);
        binary.row_normalized()
    }

    pub fn num_bundles(&self) -> usize {
        self.counts.rows()
    }
}

/// Partition of users by training user–bundle degree.
#[derive(Debug, Clone, PartialEq)]
pub struct SparsityGroups {
    boundaries: Vec<usize>,
    group_of: Vec<usize>,
}

impl SparsityGroups {
    /// Group `g` holds users with `boundaries[g-1] <= degree < boundaries[g]`.
    pub fn new(graph: &TripartiteGraph, boundaries: &[usize]) -> Result<Self> {
        if boundaries.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::config(
                "group_boundaries",
                format!("{boundaries:?} not strictly increasing"),
            ));
        }
        let group_of = (0..graph.num_users())
            .map(|u| {
                let deg = graph.user_bundle_degree(u);
                boundaries.iter().take_while(|&&b| deg >= b).count()
            })
            .collect();
        Ok(Self {
            boundaries: boundaries.to_vec(),
            group_of,
        })
    }

    pub fn num_groups(&self) -> usize {
        self.boundaries.len() + 1
    }

    pub fn group_of(&self, user: usize) -> usize {
        self.group_of[user]
    }

    pub fn members(&self, group: usize) -> Vec<usize> {
        (0..self.group_of.len())
            .filter(|&u| self.group_of[u] == group)
            .collect()
    }

    /// Human-readable degree range, e.g. `0-3` or `16+`.
    pub fn label(&self, group: usize) -> String {
        let lo = if group == 0 {
            0
        } else {
            self.boundaries[group - 1]
        };
        match self.boundaries.get(group) {
            Some(&hi) => format!("{lo}-{}", hi - 1),
            None => format!("{lo}+"),
        }
    }
}

/// Default sparsity boundaries: 0–3, 4–15 and 16+ training interactions.
pub const DEFAULT_GROUP_BOUNDARIES: [usize; 2] = [4, 16];
