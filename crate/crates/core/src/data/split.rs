use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

use super::Dataset;

/// User–bundle pairs indexed by user, each user's bundles sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interactions {
    num_bundles: usize,
    per_user: Vec<Vec<u32>>,
    pairs: Vec<(u32, u32)>,
}

impl Interactions {
    pub fn from_pairs(num_users: usize, num_bundles: usize, pairs: &[(u32, u32)]) -> Self {
        let mut per_user = vec![Vec::new(); num_users];
        for &(u, b) in pairs {
            per_user[u as usize].push(b);
        }
        for row in per_user.iter_mut() {
            row.sort_unstable();
            row.dedup();
        }
        let pairs = per_user
            .iter()
            .enumerate()
            .flat_map(|(u, bs)| bs.iter().map(move |&b| (u as u32, b)))
            .collect();
        Self {
            num_bundles,
            per_user,
            pairs,
        }
    }

    pub fn num_users(&self) -> usize {
        self.per_user.len()
    }

    pub fn num_bundles(&self) -> usize {
        self.num_bundles
    }

    pub fn of_user(&self, u: usize) -> &[u32] {
        &self.per_user[u]
    }

    pub fn contains(&self, u: usize, b: u32) -> bool {
        self.per_user[u].binary_search(&b).is_ok()
    }

    /// All pairs sorted by `(user, bundle)`.
    pub fn pairs(&self) -> &[(u32, u32)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Per-user union of two interaction sets.
    pub fn union(&self, other: &Interactions) -> Interactions {
        let mut pairs = self.pairs.clone();
        pairs.extend_from_slice(&other.pairs);
        Interactions::from_pairs(self.num_users(), self.num_bundles, &pairs)
    }
}

/// Ratios and seed of the per-user user–bundle split.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitSpec {
    pub train: f64,
    pub val: f64,
    pub test: f64,
    pub seed: u64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        Self {
            train: 0.7,
            val: 0.1,
            test: 0.2,
            seed: 0,
        }
    }
}

impl SplitSpec {
    pub fn validate(&self) -> Result<()> {
        let all = [self.train, self.val, self.test];
        if all.iter().any(|r| !(0.0..=1.0).contains(r))
            || (all.iter().sum::<f64>() - 1.0).abs() > 1e-9
        {
            return Err(Error::config(
                "split",
                format!("ratios {all:?} must be in [0,1] and sum to 1"),
            ));
        }
        Ok(())
    }
}

/// Train/validation/test user–bundle interactions. User–item and bundle–item
/// relations are not split.
#[derive(Debug, Clone, PartialEq)]
pub struct Split {
    pub train: Interactions,
    pub val: Interactions,
    pub test: Interactions,
}

/// Users with fewer than this many interactions go entirely to train.
const MIN_SPLIT_INTERACTIONS: usize = 3;

/// Per-user seeded shuffle then ratio cut of the user–bundle pairs.
pub fn split(ds: &Dataset, spec: &SplitSpec) -> Result<Split> {
    spec.validate()?;
    let all = Interactions::from_pairs(ds.num_users, ds.num_bundles, &ds.user_bundle);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (mut train, mut val, mut test) = (Vec::new(), Vec::new(), Vec::new());
    for u in 0..ds.num_users {
        let mut bundles = all.of_user(u).to_vec();
        let n = bundles.len();
        if n < MIN_SPLIT_INTERACTIONS {
            train.extend(bundles.iter().map(|&b| (u as u32, b)));
            continue;
        }
        bundles.shuffle(&mut rng);
        let n_test = (n as f64 * spec.test).round() as usize;
        let n_val = (n as f64 * spec.val).round() as usize;
        let n_train = n - n_test - n_val;
        let (tr, rest) = bundles.split_at(n_train);
        let (va, te) = rest.split_at(n_val);
        train.extend(tr.iter().map(|&b| (u as u32, b)));
        val.extend(va.iter().map(|&b| (u as u32, b)));
        test.extend(te.iter().map(|&b| (u as u32, b)));
    }
    let mk = |pairs: &[(u32, u32)]| Interactions::from_pairs(ds.num_users, ds.num_bundles, pairs);
    Ok(Split {
        train: mk(&train),
        val: mk(&val),
        test: mk(&test),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dataset() -> Dataset {
        let mut ub: Vec<(u32, u32)> = (0..10).map(|b| (0, b)).collect();
        ub.extend([(1, 3), (1, 4)]);
        ub.extend((0..5).map(|b| (2, b * 2)));
        let bi = (0..12).map(|b| (b, 0)).collect();
        Dataset::new(3, 12, 1, ub, vec![], bi).unwrap()
    }

    #[test]
    fn ratios_and_small_users() {
        let s = split(&dataset(), &SplitSpec::default()).unwrap();
        assert_eq!(
            (
                s.train.of_user(0).len(),
                s.val.of_user(0).len(),
                s.test.of_user(0).len()
            ),
            (7, 1, 2)
        );
        assert_eq!(s.train.of_user(1), &[3, 4]);
        assert!(s.val.of_user(1).is_empty() && s.test.of_user(1).is_empty());
        assert!(!s.train.of_user(2).is_empty());
    }

    #[test]
    fn partition_is_exact() {
        let ds = dataset();
        let s = split(&ds, &SplitSpec::default()).unwrap();
        let mut all: Vec<(u32, u32)> = s
            .train
            .pairs()
            .iter()
            .chain(s.val.pairs())
            .chain(s.test.pairs())
            .copied()
            .collect();
        all.sort_unstable();
        assert_eq!(all, ds.user_bundle);
    }

    #[test]
    fn seeded_determinism() {
        let ds = dataset();
        let a = split(
            &ds,
            &SplitSpec {
                seed: 1,
                ..Default::default()
            },
        )
        .unwrap();
        let b = split(
            &ds,
            &SplitSpec {
                seed: 1,
                ..Default::default()
            },
        )
        .unwrap();
        let c = split(
            &ds,
            &SplitSpec {
                seed: 2,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn bad_ratios_rejected() {
        let spec = SplitSpec {
            train: 0.8,
            ..Default::default()
        };
        assert!(split(&dataset(), &spec).is_err());
    }
}
