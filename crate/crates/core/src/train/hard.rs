use rand::Rng;

use crate::data::Interactions;
use crate::graph::{OverlapWeights, TripartiteGraph};

use super::{sample_uniform_negative, HardFamilies};

/// Precomputed hard-negative candidates.
///
/// * coverage candidates of user `u`: bundles `c` with no training
///   interaction where the share of `c`'s items that `u` interacted with is
///   at least `tau`;
/// * overlap candidates of bundle `b`: bundles sharing at least
///   `min_overlap` items with `b`.
#[derive(Debug, Clone, PartialEq)]
pub struct HardCandidateIndex {
    coverage: Vec<Vec<u32>>,
    overlap: Vec<Vec<u32>>,
    tau: f64,
}

impl HardCandidateIndex {
    pub fn build(
        graph: &TripartiteGraph,
        overlap: &OverlapWeights,
        train: &Interactions,
        tau: f64,
        min_overlap: u32,
    ) -> Self {
        assert!(tau > 0.0 && tau <= 1.0, "tau {tau} outside (0, 1]");
        let n = graph.num_bundles();
        let bi = graph.bundle_item();
        let ib = graph.item_bundle();
        let ui = graph.user_item();
        let mut hits = vec![0u32; n];
        let mut touched = Vec::new();
        let coverage = (0..graph.num_users())
            .map(|u| {
                for &i in ui.row_indices(u) {
                    for &c in ib.row_indices(i as usize) {
                        if hits[c as usize] == 0 {
                            touched.push(c);
                        }
                        hits[c as usize] += 1;
                    }
                }
                touched.sort_unstable();
                let positives = train.of_user(u);
                let row: Vec<u32> = touched
                    .iter()
                    .copied()
                    .filter(|&c| {
                        let cov = f64::from(hits[c as usize]) / bi.row_nnz(c as usize) as f64;
                        cov >= tau && positives.binary_search(&c).is_err()
                    })
                    .collect();
                for &c in &touched {
                    hits[c as usize] = 0;
                }
                touched.clear();
                row
            })
            .collect();
        let counts = overlap.counts();
        let overlap = (0..n)
            .map(|b| {
                counts
                    .row_indices(b)
                    .iter()
                    .zip(counts.row_values(b))
                    .filter(|(_, &v)| v >= f64::from(min_overlap))
                    .map(|(&c, _)| c)
                    .collect()
            })
            .collect();
        Self {
            coverage,
            overlap,
            tau,
        }
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// Sorted coverage candidates of `user`.
    pub fn coverage_candidates(&self, user: usize) -> &[u32] {
        &self.coverage[user]
    }

    /// Sorted overlap candidates of `bundle`.
    pub fn overlap_candidates(&self, bundle: usize) -> &[u32] {
        &self.overlap[bundle]
    }

    /// Union of the enabled families for `(user, pos)`, minus the user's
    /// training positives, sorted.
    pub fn candidates(
        &self,
        user: usize,
        pos: usize,
        families: HardFamilies,
        train: &Interactions,
    ) -> Vec<u32> {
        let empty: &[u32] = &[];
        let cov = if families.item() {
            self.coverage_candidates(user)
        } else {
            empty
        };
        let ovl = if families.bundle() {
            self.overlap_candidates(pos)
        } else {
            empty
        };
        let positives = train.of_user(user);
        let mut out = Vec::with_capacity(cov.len() + ovl.len());
        let (mut i, mut j) = (0, 0);
        while i < cov.len() || j < ovl.len() {
            let next = match (cov.get(i), ovl.get(j)) {
                (Some(&a), Some(&b)) if a == b => {
                    i += 1;
                    j += 1;
                    a
                }
                (Some(&a), Some(&b)) if a < b => {
                    i += 1;
                    a
                }
                (Some(_), Some(&b)) => {
                    j += 1;
                    b
                }
                (Some(&a), None) => {
                    i += 1;
                    a
                }
                (None, Some(&b)) => {
                    j += 1;
                    b
                }
                (None, None) => unreachable!(),
            };
            if positives.binary_search(&next).is_err() {
                out.push(next);
            }
        }
        out
    }
}

/// Draws a negative for `(user, pos)`: from the hard candidates with
/// probability `p_hard`, otherwise (or when no candidate exists) uniformly.
///
/// Returns `None` only if `user` has no negative at all.
pub fn sample_hard<R: Rng + ?Sized>(
    user: usize,
    pos: usize,
    index: &HardCandidateIndex,
    families: HardFamilies,
    p_hard: f64,
    train: &Interactions,
    rng: &mut R,
) -> Option<(u32, bool)> {
    if families != HardFamilies::None && p_hard > 0.0 && rng.gen::<f64>() < p_hard {
        let cands = index.candidates(user, pos, families, train);
        if !cands.is_empty() {
            return Some((cands[rng.gen_range(0..cands.len())], true));
        }
    }
    sample_uniform_negative(train, user, rng).map(|c| (c, false))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    // u0 interacted with i0,i1; bundles: b0={i0}, b1={i0,i1,i2}, b2={i3}, b3={i2,i3}
    fn fixture() -> (TripartiteGraph, OverlapWeights, Interactions) {
        let ub = [(0, 0)];
        let g = TripartiteGraph::build(
            &ub,
            &[(0, 0), (0, 1), (1, 3)],
            &[(0, 0), (1, 0), (1, 1), (1, 2), (2, 3), (3, 2), (3, 3)],
            2,
            4,
            4,
        )
        .unwrap();
        let ov = OverlapWeights::build(&g);
        let train = Interactions::from_pairs(2, 4, &ub);
        (g, ov, train)
    }

    #[test]
    fn coverage_two_thirds_is_candidate() {
        let (g, ov, train) = fixture();
        let idx = HardCandidateIndex::build(&g, &ov, &train, 0.5, 1);
        // b1 coverage 2/3, b0 is a positive and excluded
        assert_eq!(idx.coverage_candidates(0), &[1]);
        let strict = HardCandidateIndex::build(&g, &ov, &train, 0.8, 1);
        assert!(strict.coverage_candidates(0).is_empty());
        // u1 covers all of b2 and half of b3
        assert_eq!(idx.coverage_candidates(1), &[2, 3]);
    }

    #[test]
    fn overlap_candidates_exclude_disjoint() {
        let (g, ov, train) = fixture();
        let idx = HardCandidateIndex::build(&g, &ov, &train, 0.5, 1);
        assert_eq!(idx.overlap_candidates(0), &[1]);
        assert_eq!(idx.overlap_candidates(2), &[3]);
        assert!(!idx.overlap_candidates(0).contains(&2));
    }

    #[test]
    fn candidates_union_skips_positives() {
        let (g, ov, train) = fixture();
        let idx = HardCandidateIndex::build(&g, &ov, &train, 0.3, 1);
        let c = idx.candidates(0, 0, HardFamilies::Both, &train);
        assert!(!c.contains(&0));
        assert_eq!(c, vec![1]);
        // u1: coverage {b2, b3}, overlap of b1 {b0, b3}
        assert_eq!(
            idx.candidates(1, 1, HardFamilies::Both, &train),
            vec![0, 2, 3]
        );
        assert_eq!(idx.candidates(1, 1, HardFamilies::Item, &train), vec![2, 3]);
        assert_eq!(idx.candidates(0, 0, HardFamilies::Bundle, &train), vec![1]);
    }

    #[test]
    fn p_hard_zero_matches_uniform_stream() {
        let (g, ov, train) = fixture();
        let idx = HardCandidateIndex::build(&g, &ov, &train, 0.5, 1);
        let mut a = ChaCha8Rng::seed_from_u64(9);
        let mut b = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..100 {
            let (c, hard) =
                sample_hard(0, 0, &idx, HardFamilies::Both, 0.0, &train, &mut a).unwrap();
            assert!(!hard);
            assert_eq!(Some(c), sample_uniform_negative(&train, 0, &mut b));
        }
    }

    #[test]
    fn empty_candidates_fall_back() {
        let (g, ov, train) = fixture();
        let idx = HardCandidateIndex::build(&g, &ov, &train, 1.0, 5);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let (c, hard) =
                sample_hard(0, 0, &idx, HardFamilies::Both, 1.0, &train, &mut rng).unwrap();
            assert!(!hard);
            assert_ne!(c, 0);
        }
    }

    #[test]
    fn hard_fraction_tracks_p_hard() {
        let (g, ov, train) = fixture();
        let idx = HardCandidateIndex::build(&g, &ov, &train, 0.5, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let n = 100_000;
        let hard = (0..n)
            .filter(|_| {
                sample_hard(0, 0, &idx, HardFamilies::Both, 0.8, &train, &mut rng)
                    .unwrap()
                    .1
            })
            .count();
        let f = hard as f64 / n as f64;
        assert!((f - 0.8).abs() < 0.01, "hard fraction {f}");
    }
}
