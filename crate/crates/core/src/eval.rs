//! Full-ranking top-K evaluation.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;

use crate::data::Interactions;
use crate::error::{Error, Result};
use crate::graph::SparsityGroups;
use crate::model::{MfParams, PropagatedEmbeddings};
use crate::numeric::DenseMatrix;

/// Anything that can score one user against every bundle.
pub trait Scorer: Sync {
    fn num_users(&self) -> usize;
    fn num_bundles(&self) -> usize;
    fn score_user(&self, u: usize, out: &mut [f64]);
}

impl Scorer for PropagatedEmbeddings {
    fn num_users(&self) -> usize {
        PropagatedEmbeddings::num_users(self)
    }
    fn num_bundles(&self) -> usize {
        PropagatedEmbeddings::num_bundles(self)
    }
    fn score_user(&self, u: usize, out: &mut [f64]) {
        PropagatedEmbeddings::score_user(self, u, out)
    }
}

impl Scorer for MfParams {
    fn num_users(&self) -> usize {
        MfParams::num_users(self)
    }
    fn num_bundles(&self) -> usize {
        MfParams::num_bundles(self)
    }
    fn score_user(&self, u: usize, out: &mut [f64]) {
        for (b, o) in out.iter_mut().enumerate() {
            *o = self.score(u, b);
        }
    }
}

/// A user × bundle score table, e.g. ground-truth affinities.
impl Scorer for DenseMatrix {
    fn num_users(&self) -> usize {
        self.rows()
    }
    fn num_bundles(&self) -> usize {
        self.cols()
    }
    fn score_user(&self, u: usize, out: &mut [f64]) {
        out.copy_from_slice(self.row(u));
    }
}

/// Bundle ids by descending score, ties by ascending id; `exclude` must be sorted.
pub fn rank_bundles(scores: &[f64], exclude: &[u32]) -> Vec<u32> {
    let mut ids: Vec<u32> = (0..scores.len() as u32)
        .filter(|b| exclude.binary_search(b).is_err())
        .collect();
    ids.sort_by(|&a, &b| {
        scores[b as usize]
            .total_cmp(&scores[a as usize])
            .then(a.cmp(&b))
    });
    ids
}

/// `|top-K ∩ truth| / |truth|`; `truth` sorted and nonempty.
pub fn recall_at_k(ranked: &[u32], truth: &[u32], k: usize) -> f64 {
    debug_assert!(!truth.is_empty());
    let hits = ranked
        .iter()
        .take(k)
        .filter(|b| truth.binary_search(b).is_ok())
        .count();
    hits as f64 / truth.len() as f64
}

pub fn ndcg_at_k(ranked: &[u32], truth: &[u32], k: usize) -> f64 {
    debug_assert!(!truth.is_empty());
    let dcg: f64 = ranked
        .iter()
        .take(k)
        .enumerate()
        .filter(|(_, b)| truth.binary_search(b).is_ok())
        .map(|(pos, _)| 1.0 / ((pos + 2) as f64).log2())
        .sum();
    let idcg: f64 = (0..truth.len().min(k))
        .map(|pos| 1.0 / ((pos + 2) as f64).log2())
        .sum();
    dcg / idcg
}

/// Mean metrics over a set of evaluated users.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricBlock {
    pub users: usize,
    /// Indexed like [`EvalReport::ks`].
    pub recall: Vec<f64>,
    pub ndcg: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupReport {
    pub label: String,
    pub metrics: MetricBlock,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub ks: Vec<usize>,
    pub overall: MetricBlock,
    pub groups: Vec<GroupReport>,
}

struct UserResult {
    recall: Vec<f64>,
    ndcg: Vec<f64>,
}

fn mean_block(results: &[(usize, &UserResult)], nk: usize) -> MetricBlock {
    let mut recall = vec![0.0; nk];
    let mut ndcg = vec![0.0; nk];
    for (_, r) in results {
        for j in 0..nk {
            recall[j] += r.recall[j];
            ndcg[j] += r.ndcg[j];
        }
    }
    let n = results.len().max(1) as f64;
    MetricBlock {
        users: results.len(),
        recall: recall.into_iter().map(|v| v / n).collect(),
        ndcg: ndcg.into_iter().map(|v| v / n).collect(),
    }
}

/// Options for [`evaluate`].
#[derive(Clone, Copy)]
pub struct EvalOptions<'a> {
    pub ks: &'a [usize],
    pub groups: Option<&'a SparsityGroups>,
    /// Worker threads; 1 evaluates inline.
    pub threads: usize,
}

impl Default for EvalOptions<'_> {
    fn default() -> Self {
        Self {
            ks: &[20, 40, 80],
            groups: None,
            threads: 1,
        }
    }
}

/// Ranks every bundle not in `exclude` for each user with nonempty `truth`.
pub fn evaluate(
    scorer: &dyn Scorer,
    truth: &Interactions,
    exclude: &Interactions,
    opts: EvalOptions<'_>,
) -> Result<EvalReport> {
    if opts.ks.is_empty() || opts.ks.contains(&0) {
        return Err(Error::config("ks", "need at least one positive K"));
    }
    let n_users = scorer.num_users();
    if truth.num_users() != n_users || truth.num_bundles() != scorer.num_bundles() {
        return Err(Error::shape(
            "evaluate",
            format!(
                "scorer {}x{} vs interactions {}x{}",
                n_users,
                scorer.num_bundles(),
                truth.num_users(),
                truth.num_bundles()
            ),
        ));
    }
    let one = |u: usize| -> Option<UserResult> {
        let t = truth.of_user(u);
        if t.is_empty() {
            return None;
        }
        let mut scores = vec![0.0; scorer.num_bundles()];
        scorer.score_user(u, &mut scores);
        let ranked = rank_bundles(&scores, exclude.of_user(u));
        Some(UserResult {
            recall: opts
                .ks
                .iter()
                .map(|&k| recall_at_k(&ranked, t, k))
                .collect(),
            ndcg: opts.ks.iter().map(|&k| ndcg_at_k(&ranked, t, k)).collect(),
        })
    };
    let per_user: Vec<Option<UserResult>> = if opts.threads > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(opts.threads)
            .build()
            .map_err(|e| Error::config("threads", e.to_string()))?;
        pool.install(|| (0..n_users).into_par_iter().map(one).collect())
    } else {
        (0..n_users).map(one).collect()
    };
    let evaluated: Vec<(usize, &UserResult)> = per_user
        .iter()
        .enumerate()
        .filter_map(|(u, r)| r.as_ref().map(|r| (u, r)))
        .collect();
    let nk = opts.ks.len();
    let groups = match opts.groups {
        Some(g) => (0..g.num_groups())
            .map(|gi| {
                let members: Vec<_> = evaluated
                    .iter()
                    .filter(|(u, _)| g.group_of(*u) == gi)
                    .copied()
                    .collect();
                GroupReport {
                    label: g.label(gi),
                    metrics: mean_block(&members, nk),
                }
            })
            .collect(),
        None => Vec::new(),
    };
    Ok(EvalReport {
        ks: opts.ks.to_vec(),
        overall: mean_block(&evaluated, nk),
        groups,
    })
}

impl EvalReport {
    fn index(&self, k: usize) -> Option<usize> {
        self.ks.iter().position(|&x| x == k)
    }

    pub fn recall(&self, k: usize) -> Option<f64> {
        self.index(k).map(|j| self.overall.recall[j])
    }

    pub fn ndcg(&self, k: usize) -> Option<f64> {
        self.index(k).map(|j| self.overall.ndcg[j])
    }

    fn blocks(&self) -> impl Iterator<Item = (&str, &MetricBlock)> {
        std::iter::once(("all", &self.overall))
            .chain(self.groups.iter().map(|g| (g.label.as_str(), &g.metrics)))
    }

    /// Human-readable table, one row per group.
    pub fn to_table(&self) -> String {
        let mut s = format!("{:<8} {:>6}", "group", "users");
        for k in &self.ks {
            let _ = write!(
                s,
                " {:>9} {:>9}",
                format!("Recall@{k}"),
                format!("NDCG@{k}")
            );
        }
        s.push('\n');
        for (label, b) in self.blocks() {
            let _ = write!(s, "{label:<8} {:>6}", b.users);
            for j in 0..self.ks.len() {
                let _ = write!(s, " {:>9.4} {:>9.4}", b.recall[j], b.ndcg[j]);
            }
            s.push('\n');
        }
        s
    }

    /// Tab-separated `metric K group value` rows, plus a `users` count per group.
    pub fn to_tsv(&self) -> String {
        let mut s = String::from("metric\tk\tgroup\tvalue\n");
        for (label, b) in self.blocks() {
            let _ = writeln!(s, "users\t-\t{label}\t{}", b.users);
            for (j, k) in self.ks.iter().enumerate() {
                let _ = writeln!(s, "recall\t{k}\t{label}\t{:.6}", b.recall[j]);
                let _ = writeln!(s, "ndcg\t{k}\t{label}\t{:.6}", b.ndcg[j]);
            }
        }
        s
    }

    /// Flat `recall@K` / `ndcg@K` map of the overall block.
    pub fn to_map(&self) -> BTreeMap<String, f64> {
        let mut m = BTreeMap::new();
        for (j, k) in self.ks.iter().enumerate() {
            m.insert(format!("recall@{k}"), self.overall.recall[j]);
            m.insert(format!("ndcg@{k}"), self.overall.ndcg[j]);
        }
        m
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Entrywise median of the overall blocks of reports sharing the same Ks.
pub fn median_report(reports: &[EvalReport]) -> Result<EvalReport> {
    let first = reports
        .first()
        .ok_or_else(|| Error::config("reports", "need at least one report"))?;
    if reports.iter().any(|r| r.ks != first.ks) {
        return Err(Error::shape(
            "median_report",
            "reports use different K sets",
        ));
    }
    let nk = first.ks.len();
    let col = |f: &dyn Fn(&EvalReport) -> f64| median(reports.iter().map(f).collect());
    Ok(EvalReport {
        ks: first.ks.clone(),
        overall: MetricBlock {
            users: first.overall.users,
            recall: (0..nk).map(|j| col(&|r| r.overall.recall[j])).collect(),
            ndcg: (0..nk).map(|j| col(&|r| r.overall.ndcg[j])).collect(),
        },
        groups: Vec::new(),
    })
}

/// Side-by-side comparison of several labelled runs at one K.
pub fn ablation_table(rows: &[(String, EvalReport)], k: usize) -> String {
    let mut s = format!(
        "{:<16} {:>9} {:>9} {:>8}\n",
        "variant",
        format!("Recall@{k}"),
        format!("NDCG@{k}"),
        "vs first"
    );
    let base = rows.first().and_then(|(_, r)| r.recall(k));
    for (name, r) in rows {
        let recall = r.recall(k).unwrap_or(f64::NAN);
        let ndcg = r.ndcg(k).unwrap_or(f64::NAN);
        let rel = match base {
            Some(b) if b > 0.0 => format!("{:+.1}%", 100.0 * (recall - b) / b),
            _ => "-".into(),
        };
        let _ = writeln!(s, "{name:<16} {recall:>9.4} {ndcg:>9.4} {rel:>8}");
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ties_break_by_id_and_exclusions_drop() {
        assert_eq!(rank_bundles(&[1.0; 4], &[]), vec![0, 1, 2, 3]);
        assert_eq!(rank_bundles(&[0.0, f64::INFINITY, 0.5], &[1]), vec![2, 0]);
    }

    #[test]
    fn metric_fixtures() {
        let ranked = [5, 3, 9, 1];
        assert_eq!(recall_at_k(&ranked, &[1, 3, 5, 9], 4), 1.0);
        assert_eq!(recall_at_k(&ranked, &[0, 2], 4), 0.0);
        assert_eq!(recall_at_k(&ranked, &[0, 2, 4, 5], 2), 0.25);
        assert_eq!(ndcg_at_k(&ranked, &[5], 3), 1.0);
        assert!((ndcg_at_k(&ranked, &[3], 2) - 1.0 / 3f64.log2()).abs() < 1e-15);
    }

    #[test]
    fn report_means_match_hand_average() {
        // u0: truth {0}, ranked 2,0,1 -> recall@1 0, ndcg@2 1/log2(3)
        // u1: no truth, skipped
        // u2: truth {1,2}, ranked 1,2,0 -> recall@1 0.5, ndcg@2 1
        let scores = DenseMatrix::from_rows(&[
            vec![0.5, 0.1, 0.9],
            vec![0.0, 0.0, 0.0],
            vec![0.0, 0.9, 0.5],
        ])
        .unwrap();
        let truth = Interactions::from_pairs(3, 3, &[(0, 0), (2, 1), (2, 2)]);
        let none = Interactions::from_pairs(3, 3, &[]);
        let r = evaluate(
            &scores,
            &truth,
            &none,
            EvalOptions {
                ks: &[1, 2],
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(r.overall.users, 2);
        assert!((r.recall(1).unwrap() - 0.25).abs() < 1e-15);
        let nd = (1.0 / 3f64.log2() + 1.0) / 2.0;
        assert!((r.ndcg(2).unwrap() - nd).abs() < 1e-15);
        let par = evaluate(
            &scores,
            &truth,
            &none,
            EvalOptions {
                ks: &[1, 2],
                groups: None,
                threads: 3,
            },
        )
        .unwrap();
        assert_eq!(par, r);
    }
}
