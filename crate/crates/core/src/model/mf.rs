use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::numeric::dense::dot;
use crate::numeric::DenseMatrix;
use crate::train::{log_sigmoid, sigmoid, TrainTriple};

use super::{glorot_uniform, Parameters};

/// Matrix factorization baseline: separate user and bundle factor tables.
#[derive(Debug, Clone, PartialEq)]
pub struct MfParams {
    pub users: DenseMatrix,
    pub bundles: DenseMatrix,
}

impl MfParams {
    pub fn init(num_users: usize, num_bundles: usize, dim: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self {
            users: glorot_uniform(num_users, dim, &mut rng),
            bundles: glorot_uniform(num_bundles, dim, &mut rng),
        }
    }

    pub fn score(&self, u: usize, b: usize) -> f64 {
        dot(self.users.row(u), self.bundles.row(b))
    }

    pub fn num_users(&self) -> usize {
        self.users.rows()
    }

    pub fn num_bundles(&self) -> usize {
        self.bundles.rows()
    }

    pub fn dim(&self) -> usize {
        self.users.cols()
    }
}

impl Parameters for MfParams {
    fn tensor_names(&self) -> Vec<String> {
        vec!["mf_users".into(), "mf_bundles".into()]
    }

    fn tensors(&self) -> Vec<&DenseMatrix> {
        vec![&self.users, &self.bundles]
    }

    fn tensors_mut(&mut self) -> Vec<&mut DenseMatrix> {
        vec![&mut self.users, &mut self.bundles]
    }
}

pub fn mf_bpr_loss(params: &MfParams, batch: &[TrainTriple], lambda: f64) -> f64 {
    let data: f64 = batch
        .iter()
        .map(|t| {
            let (u, b, c) = (t.user as usize, t.pos as usize, t.neg as usize);
            -log_sigmoid(params.score(u, b) - params.score(u, c))
        })
        .sum();
    data + lambda * params.sum_squares()
}

pub fn mf_bpr_loss_and_grad(
    params: &MfParams,
    batch: &[TrainTriple],
    lambda: f64,
) -> Result<(f64, MfParams)> {
    let mut grads = params.zeros_like();
    grads.users.axpy(2.0 * lambda, &params.users)?;
    grads.bundles.axpy(2.0 * lambda, &params.bundles)?;
    let mut loss = lambda * params.sum_squares();
    let d = params.dim();
    for t in batch {
        let (u, b, c) = (t.user as usize, t.pos as usize, t.neg as usize);
        let x = params.score(u, b) - params.score(u, c);
        loss -= log_sigmoid(x);
        let coef = -sigmoid(-x);
        for k in 0..d {
            let pu = params.users.get(u, k);
            let rb = params.bundles.get(b, k);
            let rc = params.bundles.get(c, k);
            grads.users.row_mut(u)[k] += coef * (rb - rc);
            grads.bundles.row_mut(b)[k] += coef * pu;
            grads.bundles.row_mut(c)[k] -= coef * pu;
        }
    }
    if !loss.is_finite() {
        return Err(Error::NonFinite("MF-BPR loss".into()));
    }
    Ok((loss, grads))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{finite_diff_grad, relative_error};

    #[test]
    fn orthogonal_and_aligned_factors() {
        let p = MfParams {
            users: DenseMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 3.0]]).unwrap(),
            bundles: DenseMatrix::from_rows(&[vec![0.0, 2.0], vec![5.0, 0.0]]).unwrap(),
        };
        assert_eq!(p.score(0, 0), 0.0);
        assert_eq!(p.score(1, 0), 6.0);
        assert_eq!(p.score(0, 1), 5.0);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let params = MfParams::init(4, 5, 3, 9);
        let batch = [
            TrainTriple::new(0, 1, 2, false),
            TrainTriple::new(3, 0, 4, false),
            TrainTriple::new(0, 4, 1, true),
        ];
        let lambda = 1e-2;
        let (_, grads) = mf_bpr_loss_and_grad(&params, &batch, lambda).unwrap();
        let num_u = finite_diff_grad(
            |m| {
                let p = MfParams {
                    users: m.clone(),
                    bundles: params.bundles.clone(),
                };
                mf_bpr_loss(&p, &batch, lambda)
            },
            &params.users,
            1e-5,
        );
        let num_b = finite_diff_grad(
            |m| {
                let p = MfParams {
                    users: params.users.clone(),
                    bundles: m.clone(),
                };
                mf_bpr_loss(&p, &batch, lambda)
            },
            &params.bundles,
            1e-5,
        );
        assert!(relative_error(&grads.users, &num_u) < 1e-6);
        assert!(relative_error(&grads.bundles, &num_b) < 1e-6);
    }
}
