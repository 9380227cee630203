use log::warn;
use rand::Rng;

use crate::data::Interactions;

/// One BPR training example: `user` prefers `pos` over `neg`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TrainTriple {
    pub user: u32,
    pub pos: u32,
    pub neg: u32,
    /// Negative came from the hard-candidate index.
    pub hard: bool,
}

impl TrainTriple {
    pub fn new(user: u32, pos: u32, neg: u32, hard: bool) -> Self {
        Self {
            user,
            pos,
            neg,
            hard,
        }
    }
}

/// Uniform bundle that `user` has no training interaction with, if any exists.
pub fn sample_uniform_negative<R: Rng + ?Sized>(
    train: &Interactions,
    user: usize,
    rng: &mut R,
) -> Option<u32> {
    let n = train.num_bundles();
    let positives = train.of_user(user);
    if positives.len() >= n {
        return None;
    }
    if positives.len() * 2 <= n {
        loop {
            let c = rng.gen_range(0..n as u32);
            if positives.binary_search(&c).is_err() {
                return Some(c);
            }
        }
    }
    // dense users: pick the k-th non-positive directly
    let mut k = rng.gen_range(0..(n - positives.len()) as u32);
    let mut prev = 0u32;
    for &p in positives {
        let gap = p - prev;
        if k < gap {
            return Some(prev + k);
        }
        k -= gap;
        prev = p + 1;
    }
    Some(prev + k)
}

/// Uniform positive pair whose user still has at least one negative.
///
/// Returns `None` only when every user with positives interacted with all
/// bundles.
pub fn sample_positive<R: Rng + ?Sized>(
    train: &Interactions,
    rng: &mut R,
    saturated_warned: &mut bool,
) -> Option<(u32, u32)> {
    let pairs = train.pairs();
    if pairs.is_empty() {
        return None;
    }
    for _ in 0..1000 {
        let (u, b) = pairs[rng.gen_range(0..pairs.len())];
        if train.of_user(u as usize).len() < train.num_bundles() {
            return Some((u, b));
        }
        if !*saturated_warned {
            warn!("user {u} interacted with every bundle; resampling positive");
            *saturated_warned = true;
        }
    }
    None
}

/// Uniform-negative sampler carrying its own warn-once state.
#[derive(Debug, Default)]
pub struct UniformSampler {
    warned: bool,
}

impl UniformSampler {
    pub fn sample<R: Rng + ?Sized>(
        &mut self,
        train: &Interactions,
        size: usize,
        rng: &mut R,
    ) -> Vec<TrainTriple> {
        let mut out = Vec::with_capacity(size);
        for _ in 0..size {
            let Some((u, b)) = sample_positive(train, rng, &mut self.warned) else {
                break;
            };
            let c = sample_uniform_negative(train, u as usize, rng)
                .expect("sample_positive guarantees a negative exists");
            out.push(TrainTriple::new(u, b, c, false));
        }
        out
    }
}

/// `size` triples with uniformly drawn positives and uniform negatives.
pub fn sample_uniform_batch<R: Rng + ?Sized>(
    train: &Interactions,
    size: usize,
    rng: &mut R,
) -> Vec<TrainTriple> {
    UniformSampler::default().sample(train, size, rng)
}
