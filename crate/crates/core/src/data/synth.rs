use std::path::Path;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::numeric::dense::dot;
use crate::numeric::DenseMatrix;

use super::{atomic_write, Dataset};

/// Parameters of the planted-structure generator.
///
/// Users and items get latent factors; bundles are drawn around a random
/// "theme" item so similar bundles share items. A user's bundle affinity is
/// the mean affinity of its items plus `bundle_effect` times a separate
/// user–bundle latent term that item interactions cannot explain.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub users: usize,
    pub bundles: usize,
    pub items: usize,
    pub latent_dim: usize,
    pub items_per_bundle: (usize, usize),
    /// Bundles are sampled from the `theme_pool × size` items closest to the theme.
    pub theme_pool: f64,
    pub items_per_user: (usize, usize),
    pub bundles_per_user: (usize, usize),
    /// Noise on user–bundle choices, relative to the affinity spread.
    pub noise: f64,
    /// Noise on user–item choices, relative to the affinity spread.
    pub item_noise: f64,
    pub bundle_effect: f64,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            users: 200,
            bundles: 100,
            items: 500,
            latent_dim: 8,
            items_per_bundle: (5, 15),
            theme_pool: 3.0,
            items_per_user: (20, 40),
            bundles_per_user: (8, 14),
            noise: 0.1,
            item_noise: 0.1,
            bundle_effect: 1.0,
            seed: 0,
        }
    }
}

fn parse<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim()
        .parse()
        .map_err(|_| Error::config(key, format!("cannot parse {v:?}")))
}

fn parse_range(key: &str, v: &str) -> Result<(usize, usize)> {
    let (a, b) = v
        .split_once('-')
        .ok_or_else(|| Error::config(key, format!("expected MIN-MAX, got {v:?}")))?;
    Ok((parse(key, a)?, parse(key, b)?))
}

impl SynthSpec {
    pub fn set(&mut self, key: &str, v: &str) -> Result<()> {
        match key.trim() {
            "users" => self.users = parse(key, v)?,
            "bundles" => self.bundles = parse(key, v)?,
            "items" => self.items = parse(key, v)?,
            "latent_dim" => self.latent_dim = parse(key, v)?,
            "items_per_bundle" => self.items_per_bundle = parse_range(key, v)?,
            "theme_pool" => self.theme_pool = parse(key, v)?,
            "items_per_user" => self.items_per_user = parse_range(key, v)?,
            "bundles_per_user" => self.bundles_per_user = parse_range(key, v)?,
            "noise" => self.noise = parse(key, v)?,
            "item_noise" => self.item_noise = parse(key, v)?,
            "bundle_effect" => self.bundle_effect = parse(key, v)?,
            "seed" => self.seed = parse(key, v)?,
            other => return Err(Error::config(other, "unknown synth key")),
        }
        Ok(())
    }

    /// Parses `key=value` lines over the defaults and validates.
    pub fn from_kv_text(text: &str) -> Result<Self> {
        let mut spec = Self::default();
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                Error::config(
                    format!("line {}", n + 1),
                    format!("expected key=value, got {line:?}"),
                )
            })?;
            spec.set(k, v)?;
        }
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("users", self.users),
            ("bundles", self.bundles),
            ("items", self.items),
            ("latent_dim", self.latent_dim),
        ];
        for (field, v) in positive {
            if v == 0 {
                return Err(Error::config(field, "must be positive"));
            }
        }
        let ranges = [
            ("items_per_bundle", self.items_per_bundle, self.items),
            ("items_per_user", self.items_per_user, self.items),
            ("bundles_per_user", self.bundles_per_user, self.bundles),
        ];
        for (field, (lo, hi), cap) in ranges {
            if lo == 0 || lo > hi || hi > cap {
                return Err(Error::config(
                    field,
                    format!("range {lo}-{hi} invalid (cap {cap})"),
                ));
            }
        }
        for (field, v) in [("noise", self.noise), ("item_noise", self.item_noise)] {
            if !(0.0..1.0).contains(&v) {
                return Err(Error::config(field, format!("{v} outside [0,1)")));
            }
        }
        if !(self.theme_pool >= 1.0) {
            return Err(Error::config("theme_pool", "must be >= 1"));
        }
        if !(self.bundle_effect >= 0.0) {
            return Err(Error::config("bundle_effect", "must be >= 0"));
        }
        Ok(())
    }
}

/// A generated dataset with its ground-truth user–bundle affinities.
#[derive(Debug, Clone)]
pub struct SynthDataset {
    pub dataset: Dataset,
    pub affinity: DenseMatrix,
}

fn normal_matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> DenseMatrix {
    let data = (0..rows * cols)
        .map(|_| rng.sample(StandardNormal))
        .collect();
    DenseMatrix::from_vec(rows, cols, data).expect("sized by construction")
}

/// Indices of the `k` largest scores, ties broken by lower index.
fn top_k(scores: &[f64], k: usize) -> Vec<u32> {
    let mut idx: Vec<u32> = (0..scores.len() as u32).collect();
    idx.sort_by(|&a, &b| {
        scores[b as usize]
            .total_cmp(&scores[a as usize])
            .then(a.cmp(&b))
    });
    idx.truncate(k);
    idx.sort_unstable();
    idx
}

pub fn synth_generate(spec: &SynthSpec) -> Result<SynthDataset> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let k = spec.latent_dim;
    let scale = 1.0 / (k as f64).sqrt();
    let user_f = normal_matrix(spec.users, k, &mut rng);
    let item_f = normal_matrix(spec.items, k, &mut rng);
    let user_bf = normal_matrix(spec.users, k, &mut rng);
    let bundle_f = normal_matrix(spec.bundles, k, &mut rng);

    let mut bundle_items: Vec<Vec<u32>> = Vec::with_capacity(spec.bundles);
    for _ in 0..spec.bundles {
        let size = rng.gen_range(spec.items_per_bundle.0..=spec.items_per_bundle.1);
        let theme = rng.gen_range(0..spec.items);
        let sim: Vec<f64> = (0..spec.items)
            .map(|i| dot(item_f.row(i), item_f.row(theme)))
            .collect();
        let pool_size = ((size as f64 * spec.theme_pool).ceil() as usize).clamp(size, spec.items);
        let pool = top_k(&sim, pool_size);
        let mut chosen: Vec<u32> = sample(&mut rng, pool.len(), size)
            .into_iter()
            .map(|j| pool[j])
            .collect();
        chosen.sort_unstable();
        bundle_items.push(chosen);
    }

    let mut item_aff = DenseMatrix::zeros(spec.users, spec.items);
    for u in 0..spec.users {
        for i in 0..spec.items {
            item_aff.set(u, i, scale * dot(user_f.row(u), item_f.row(i)));
        }
    }
    let mut affinity = DenseMatrix::zeros(spec.users, spec.bundles);
    for u in 0..spec.users {
        for (b, items) in bundle_items.iter().enumerate() {
            let mean = items
                .iter()
                .map(|&i| item_aff.get(u, i as usize))
                .sum::<f64>()
                / items.len() as f64;
            let own = scale * dot(user_bf.row(u), bundle_f.row(b));
            affinity.set(u, b, mean + spec.bundle_effect * own);
        }
    }
    let spread = |m: &DenseMatrix| {
        let n = m.len() as f64;
        let mean = m.as_slice().iter().sum::<f64>() / n;
        (m.as_slice().iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt()
    };
    let item_sd = spread(&item_aff);
    let bundle_sd = spread(&affinity);

    let mut user_item = Vec::new();
    let mut user_bundle = Vec::new();
    for u in 0..spec.users {
        let n_items = rng.gen_range(spec.items_per_user.0..=spec.items_per_user.1);
        let noisy: Vec<f64> = item_aff
            .row(u)
            .iter()
            .map(|&a| a + spec.item_noise * item_sd * rng.sample::<f64, _>(StandardNormal))
            .collect();
        user_item.extend(top_k(&noisy, n_items).into_iter().map(|i| (u as u32, i)));

        let n_bundles = rng.gen_range(spec.bundles_per_user.0..=spec.bundles_per_user.1);
        let noisy: Vec<f64> = affinity
            .row(u)
            .iter()
            .map(|&a| a + spec.noise * bundle_sd * rng.sample::<f64, _>(StandardNormal))
            .collect();
        user_bundle.extend(top_k(&noisy, n_bundles).into_iter().map(|b| (u as u32, b)));
    }
    let bundle_item = bundle_items
        .iter()
        .enumerate()
        .flat_map(|(b, items)| items.iter().map(move |&i| (b as u32, i)))
        .collect();
    let dataset = Dataset::new(
        spec.users,
        spec.bundles,
        spec.items,
        user_bundle,
        user_item,
        bundle_item,
    )?;
    Ok(SynthDataset { dataset, affinity })
}

/// Writes the affinity table: one line per user, tab-separated scores.
pub fn write_affinity(synth: &SynthDataset, path: &Path) -> Result<()> {
    let mut s = String::new();
    for u in 0..synth.affinity.rows() {
        let row: Vec<String> = synth
            .affinity
            .row(u)
            .iter()
            .map(|v| format!("{v:.6}"))
            .collect();
        s.push_str(&row.join("\t"));
        s.push('\n');
    }
    atomic_write(path, s.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SynthSpec {
        SynthSpec {
            users: 30,
            bundles: 20,
            items: 60,
            items_per_bundle: (3, 6),
            items_per_user: (5, 10),
            bundles_per_user: (3, 6),
            ..Default::default()
        }
    }

    #[test]
    fn noiseless_positives_are_top_affinity() {
        let spec = SynthSpec {
            noise: 0.0,
            ..small()
        };
        let s = synth_generate(&spec).unwrap();
        let train = crate::data::Interactions::from_pairs(30, 20, &s.dataset.user_bundle);
        for u in 0..30 {
            let pos = train.of_user(u);
            let expected = top_k(s.affinity.row(u), pos.len());
            assert_eq!(pos, &expected[..]);
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let a = synth_generate(&small()).unwrap();
        let b = synth_generate(&small()).unwrap();
        assert_eq!(a.dataset, b.dataset);
        let c = synth_generate(&SynthSpec { seed: 1, ..small() }).unwrap();
        assert_ne!(a.dataset, c.dataset);
    }

    #[test]
    fn invalid_noise_names_field() {
        let err = SynthSpec::from_kv_text("noise=1.0").unwrap_err();
        assert!(err.to_string().contains("noise"));
        let spec = SynthSpec::from_kv_text("users=10\nbundles_per_user=2-4\n").unwrap();
        assert_eq!(spec.users, 10);
        assert_eq!(spec.bundles_per_user, (2, 4));
    }
}
