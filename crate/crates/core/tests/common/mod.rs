//! Loop-based reference implementations shared by the integration tests.
#![allow(dead_code)]

use bgcn::model::{AblationSwitches, B2bMode, BgcnParams, DropoutMasks};
use rand::Rng;

pub type Mat = Vec<Vec<f64>>;

pub fn zeros(r: usize, c: usize) -> Mat {
    vec![vec![0.0; c]; r]
}

pub fn to_mat(m: &bgcn::numeric::DenseMatrix) -> Mat {
    (0..m.rows()).map(|r| m.row(r).to_vec()).collect()
}

pub fn indicator(rows: usize, cols: usize, pairs: &[(u32, u32)]) -> Mat {
    let mut m = zeros(rows, cols);
    for &(a, b) in pairs {
        m[a as usize][b as usize] = 1.0;
    }
    m
}

pub fn transpose(m: &Mat, cols: usize) -> Mat {
    let mut t = zeros(cols, m.len());
    for (r, row) in m.iter().enumerate() {
        for (c, &v) in row.iter().enumerate() {
            t[c][r] = v;
        }
    }
    t
}

pub fn row_normalize(m: &Mat) -> Mat {
    m.iter()
        .map(|row| {
            let s: f64 = row.iter().sum();
            if s == 0.0 {
                row.clone()
            } else {
                row.iter().map(|v| v / s).collect()
            }
        })
        .collect()
}

pub fn matmul(a: &Mat, b: &Mat) -> Mat {
    let (n, k, m) = (a.len(), b.len(), b.first().map_or(0, |r| r.len()));
    let mut out = zeros(n, m);
    for i in 0..n {
        for j in 0..m {
            let mut s = 0.0;
            for t in 0..k {
                s += a[i][t] * b[t][j];
            }
            out[i][j] = s;
        }
    }
    out
}

/// `β` from pairwise shared-item counts, diagonal excluded.
pub fn b2b_dense(bi: &Mat, mode: B2bMode) -> Option<Mat> {
    let n = bi.len();
    let mut shared = zeros(n, n);
    for b in 0..n {
        for c in 0..n {
            if b != c {
                shared[b][c] = bi[b].iter().zip(&bi[c]).map(|(x, y)| x * y).sum();
            }
        }
    }
    match mode {
        B2bMode::None => None,
        B2bMode::Weighted => Some(row_normalize(&shared)),
        B2bMode::Unweighted => Some(row_normalize(
            &shared
                .iter()
                .map(|r| r.iter().map(|&v| if v > 0.0 { 1.0 } else { 0.0 }).collect())
                .collect(),
        )),
    }
}

fn act(x: f64, slope: f64) -> f64 {
    if x > 0.0 {
        x
    } else {
        slope * x
    }
}

/// `σ((self + mask ⊙ A·other) W + b)` row by row.
fn layer(selfm: &Mat, agg: &[Mat], w: &Mat, b: &[f64], slope: f64) -> Mat {
    let d = w.len();
    let mut out = zeros(selfm.len(), d);
    for r in 0..selfm.len() {
        let h: Vec<f64> = (0..d)
            .map(|k| selfm[r][k] + agg.iter().map(|a| a[r][k]).sum::<f64>())
            .collect();
        for c in 0..d {
            let mut z = b[c];
            for k in 0..d {
                z += h[k] * w[k][c];
            }
            out[r][c] = act(z, slope);
        }
    }
    out
}

fn masked(a: Mat, mask: Option<&bgcn::numeric::DenseMatrix>) -> Mat {
    match mask {
        None => a,
        Some(m) => a
            .iter()
            .enumerate()
            .map(|(r, row)| {
                row.iter()
                    .enumerate()
                    .map(|(c, v)| v * m.get(r, c))
                    .collect()
            })
            .collect(),
    }
}

pub struct RawGraph {
    pub users: usize,
    pub bundles: usize,
    pub items: usize,
    pub ub: Vec<(u32, u32)>,
    pub ui: Vec<(u32, u32)>,
    pub bi: Vec<(u32, u32)>,
}

/// Full score table `M × N` computed with plain loops.
pub fn dense_scores(
    g: &RawGraph,
    p: &BgcnParams,
    sw: &AblationSwitches,
    masks: Option<&DropoutMasks>,
    slope: f64,
) -> Mat {
    let ui = indicator(g.users, g.items, &g.ui);
    let ub = indicator(g.users, g.bundles, &g.ub);
    let bi = indicator(g.bundles, g.items, &g.bi);
    let a_ui = row_normalize(&ui);
    let a_iu = row_normalize(&transpose(&ui, g.items));
    let a_ub = row_normalize(&ub);
    let a_bu = row_normalize(&transpose(&ub, g.bundles));
    let a_bi = row_normalize(&bi);
    let bb = if sw.bundle_level {
        b2b_dense(&bi, sw.b2b)
    } else {
        None
    };
    let layers = p.num_layers();
    let mut scores = zeros(g.users, g.bundles);
    let mut add_level = |us: &[Mat], bs: &[Mat]| {
        for u in 0..g.users {
            for b in 0..g.bundles {
                for l in 0..=layers {
                    scores[u][b] += us[l][u]
                        .iter()
                        .zip(&bs[l][b])
                        .map(|(x, y)| x * y)
                        .sum::<f64>();
                }
            }
        }
    };
    if sw.item_level {
        let mut us = vec![to_mat(&p.users)];
        let mut is = vec![to_mat(&p.items)];
        for l in 0..layers {
            let m = masks.map(|m| &m.layers[l]);
            let w = to_mat(&p.item_weights[l]);
            let b = p.item_biases[l].row(0).to_vec();
            let agg_u = masked(matmul(&a_ui, &is[l]), m.map(|m| &m.user_items));
            let agg_i = masked(matmul(&a_iu, &us[l]), m.map(|m| &m.item_users));
            let nu = layer(&us[l], &[agg_u], &w, &b, slope);
            let ni = layer(&is[l], &[agg_i], &w, &b, slope);
            us.push(nu);
            is.push(ni);
        }
        let rs: Vec<Mat> = is.iter().map(|q| matmul(&a_bi, q)).collect();
        add_level(&us, &rs);
    }
    if sw.bundle_level {
        let mut us = vec![to_mat(&p.users)];
        let mut rs = vec![to_mat(&p.bundles)];
        for l in 0..layers {
            let m = masks.map(|m| &m.layers[l]);
            let w = to_mat(&p.bundle_weights[l]);
            let b = p.bundle_biases[l].row(0).to_vec();
            let agg_u = masked(matmul(&a_ub, &rs[l]), m.map(|m| &m.user_bundles));
            let mut aggs_b = vec![masked(matmul(&a_bu, &us[l]), m.map(|m| &m.bundle_users))];
            if let Some(bb) = &bb {
                aggs_b.push(masked(matmul(bb, &rs[l]), m.map(|m| &m.bundle_bundles)));
            }
            let nu = layer(&us[l], &[agg_u], &w, &b, slope);
            let nr = layer(&rs[l], &aggs_b, &w, &b, slope);
            us.push(nu);
            rs.push(nr);
        }
        add_level(&us, &rs);
    }
    scores
}

/// Random tripartite graph where every bundle has at least one item.
pub fn random_graph<R: Rng>(rng: &mut R, max: usize) -> RawGraph {
    let users = rng.gen_range(1..=max);
    let bundles = rng.gen_range(1..=max);
    let items = rng.gen_range(1..=max);
    let density = rng.gen_range(0.05..0.5);
    let mut pairs = |rows: usize, cols: usize| -> Vec<(u32, u32)> {
        let mut v = Vec::new();
        for r in 0..rows {
            for c in 0..cols {
                if rng.gen_bool(density) {
                    v.push((r as u32, c as u32));
                }
            }
        }
        v
    };
    let ub = pairs(users, bundles);
    let ui = pairs(users, items);
    let mut bi = pairs(bundles, items);
    for b in 0..bundles as u32 {
        if !bi.iter().any(|&(x, _)| x == b) {
            bi.push((b, rng.gen_range(0..items as u32)));
        }
    }
    bi.sort_unstable();
    RawGraph {
        users,
        bundles,
        items,
        ub,
        ui,
        bi,
    }
}

pub fn random_switches<R: Rng>(rng: &mut R) -> AblationSwitches {
    let all = AblationSwitches::all();
    all[rng.gen_range(0..all.len())]
}

/// Independent Recall@K / NDCG@K straight from the definitions.
pub fn reference_metrics(ranked: &[u32], truth: &[u32], k: usize) -> (f64, f64) {
    let top: Vec<u32> = ranked.iter().take(k).copied().collect();
    let hits: Vec<bool> = top.iter().map(|b| truth.contains(b)).collect();
    let recall = hits.iter().filter(|&&h| h).count() as f64 / truth.len() as f64;
    let mut dcg = 0.0;
    for (i, &h) in hits.iter().enumerate() {
        if h {
            dcg += 1.0 / ((i as f64) + 2.0).ln() * std::f64::consts::LN_2;
        }
    }
    let mut idcg = 0.0;
    for i in 0..truth.len().min(k) {
        idcg += 1.0 / ((i as f64) + 2.0).ln() * std::f64::consts::LN_2;
    }
    (recall, dcg / idcg)
}

/// Hard candidates by exhaustive enumeration.
pub fn brute_force_hard(
    g: &RawGraph,
    train_ub: &[(u32, u32)],
    tau: f64,
    min_overlap: usize,
) -> (Vec<Vec<u32>>, Vec<Vec<u32>>) {
    let has = |pairs: &[(u32, u32)], a: usize, b: usize| pairs.contains(&(a as u32, b as u32));
    let items_of =
        |b: usize| -> Vec<usize> { (0..g.items).filter(|&i| has(&g.bi, b, i)).collect() };
    let coverage = (0..g.users)
        .map(|u| {
            (0..g.bundles)
                .filter(|&c| !has(train_ub, u, c))
                .filter(|&c| {
                    let its = items_of(c);
                    let liked = its.iter().filter(|&&i| has(&g.ui, u, i)).count();
                    liked as f64 / its.len() as f64 >= tau
                })
                .map(|c| c as u32)
                .collect()
        })
        .collect();
    let overlap = (0..g.bundles)
        .map(|b| {
            let mine = items_of(b);
            (0..g.bundles)
                .filter(|&c| c != b)
                .filter(|&c| items_of(c).iter().filter(|i| mine.contains(i)).count() >= min_overlap)
                .map(|c| c as u32)
                .collect()
        })
        .collect();
    (coverage, overlap)
}
