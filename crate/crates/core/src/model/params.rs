use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::numeric::DenseMatrix;

/// A fixed, ordered collection of named parameter tensors.
pub trait Parameters: Clone {
    fn tensor_names(&self) -> Vec<String>;
    fn tensors(&self) -> Vec<&DenseMatrix>;
    fn tensors_mut(&mut self) -> Vec<&mut DenseMatrix>;

    /// Same shapes, all zeros.
    fn zeros_like(&self) -> Self {
        let mut out = self.clone();
        for t in out.tensors_mut() {
            *t = DenseMatrix::zeros(t.rows(), t.cols());
        }
        out
    }

    /// `‖Θ‖²` over every tensor.
    fn sum_squares(&self) -> f64 {
        self.tensors().iter().map(|t| t.sum_squares()).sum()
    }

    fn num_entries(&self) -> usize {
        self.tensors().iter().map(|t| t.len()).sum()
    }

    fn is_finite(&self) -> bool {
        self.tensors().iter().all(|t| t.is_finite())
    }
}

/// Glorot-uniform matrix, bound `sqrt(6 / (rows + cols))`.
pub fn glorot_uniform<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> DenseMatrix {
    let bound = (6.0 / (rows + cols) as f64).sqrt();
    let data = (0..rows * cols)
        .map(|_| rng.gen_range(-bound..=bound))
        .collect();
    DenseMatrix::from_vec(rows, cols, data).expect("length matches by construction")
}

/// Embedding tables and per-layer transforms.
///
/// Layer `ℓ` of the item level applies `item_weights[ℓ]`/`item_biases[ℓ]` to
/// both user and item updates; the bundle level shares
/// `bundle_weights[ℓ]`/`bundle_biases[ℓ]` between user and bundle updates.
/// Transforms act on row vectors: `h · W + b`.
#[derive(Debug, Clone, PartialEq)]
pub struct BgcnParams {
    pub users: DenseMatrix,
    pub items: DenseMatrix,
    pub bundles: DenseMatrix,
    pub item_weights: Vec<DenseMatrix>,
    pub item_biases: Vec<DenseMatrix>,
    pub bundle_weights: Vec<DenseMatrix>,
    pub bundle_biases: Vec<DenseMatrix>,
}

impl BgcnParams {
    /// Deterministic Glorot initialization with zero biases.
    pub fn init(
        num_users: usize,
        num_bundles: usize,
        num_items: usize,
        dim: usize,
        layers: usize,
        seed: u64,
    ) -> Self {
        assert!(num_users > 0 && num_bundles > 0 && num_items > 0 && dim > 0);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let users = glorot_uniform(num_users, dim, &mut rng);
        let items = glorot_uniform(num_items, dim, &mut rng);
        let bundles = glorot_uniform(num_bundles, dim, &mut rng);
        let item_weights = (0..layers)
            .map(|_| glorot_uniform(dim, dim, &mut rng))
            .collect();
        let bundle_weights = (0..layers)
            .map(|_| glorot_uniform(dim, dim, &mut rng))
            .collect();
        let zero_bias = || (0..layers).map(|_| DenseMatrix::zeros(1, dim)).collect();
        Self {
            users,
            items,
            bundles,
            item_weights,
            item_biases: zero_bias(),
            bundle_weights,
            bundle_biases: zero_bias(),
        }
    }

    pub fn dim(&self) -> usize {
        self.users.cols()
    }

    pub fn num_layers(&self) -> usize {
        self.item_weights.len()
    }

    pub fn num_users(&self) -> usize {
        self.users.rows()
    }

    pub fn num_items(&self) -> usize {
        self.items.rows()
    }

    pub fn num_bundles(&self) -> usize {
        self.bundles.rows()
    }
}

impl Parameters for BgcnParams {
    fn tensor_names(&self) -> Vec<String> {
        let mut names = vec!["users".to_string(), "items".into(), "bundles".into()];
        for l in 0..self.num_layers() {
            names.push(format!("item_weight.{l}"));
            names.push(format!("item_bias.{l}"));
        }
        for l in 0..self.num_layers() {
            names.push(format!("bundle_weight.{l}"));
            names.push(format!("bundle_bias.{l}"));
        }
        names
    }

    fn tensors(&self) -> Vec<&DenseMatrix> {
        let mut out = vec![&self.users, &self.items, &self.bundles];
        for (w, b) in self.item_weights.iter().zip(&self.item_biases) {
            out.push(w);
            out.push(b);
        }
        for (w, b) in self.bundle_weights.iter().zip(&self.bundle_biases) {
            out.push(w);
            out.push(b);
        }
        out
    }

    fn tensors_mut(&mut self) -> Vec<&mut DenseMatrix> {
        let mut out = vec![&mut self.users, &mut self.items, &mut self.bundles];
        for (w, b) in self
            .item_weights
            .iter_mut()
            .zip(self.item_biases.iter_mut())
        {
            out.push(w);
            out.push(b);
        }
        for (w, b) in self
            .bundle_weights
            .iter_mut()
            .zip(self.bundle_biases.iter_mut())
        {
            out.push(w);
            out.push(b);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn init_is_deterministic() {
        let a = BgcnParams::init(5, 4, 8, 8, 2, 42);
        let b = BgcnParams::init(5, 4, 8, 8, 2, 42);
        assert_eq!(a, b);
        assert_ne!(a, BgcnParams::init(5, 4, 8, 8, 2, 43));
    }

    #[test]
    fn shapes_and_bounds() {
        let p = BgcnParams::init(100, 30, 50, 64, 2, 1);
        assert_eq!(p.item_weights.len(), 2);
        assert!(p.item_weights.iter().all(|w| w.shape() == (64, 64)));
        assert!(p.users.max_abs() <= (6.0f64 / 128.0).sqrt());
        assert_eq!(p.item_biases[1].max_abs(), 0.0);
        assert_eq!(p.tensor_names().len(), p.tensors().len());
        assert_eq!(p.tensor_names()[3], "item_weight.0");
    }
}
