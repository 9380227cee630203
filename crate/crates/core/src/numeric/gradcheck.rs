use super::DenseMatrix;

/// Central-difference gradient of `loss` at `params`.
pub fn finite_diff_grad(
    mut loss: impl FnMut(&DenseMatrix) -> f64,
    params: &DenseMatrix,
    eps: f64,
) -> DenseMatrix {
    assert!(eps > 0.0);
    let mut work = params.clone();
    let mut grad = DenseMatrix::zeros(params.rows(), params.cols());
    for k in 0..params.len() {
        let orig = work.as_slice()[k];
        work.as_mut_slice()[k] = orig + eps;
        let up = loss(&work);
        work.as_mut_slice()[k] = orig - eps;
        let down = loss(&work);
        work.as_mut_slice()[k] = orig;
        grad.as_mut_slice()[k] = (up - down) / (2.0 * eps);
    }
    grad
}

/// Largest entrywise error, scaled by the larger of the two gradients'
/// magnitudes (floored at `1e-8` so all-zero tensors compare absolutely).
pub fn relative_error(analytic: &DenseMatrix, numeric: &DenseMatrix) -> f64 {
    let scale = analytic.max_abs().max(numeric.max_abs()).max(1e-8);
    analytic.max_abs_diff(numeric) / scale
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_at_three() {
        let w = DenseMatrix::from_vec(1, 1, vec![3.0]).unwrap();
        let g = finite_diff_grad(|m| m.get(0, 0).powi(2), &w, 1e-5);
        assert!((g.get(0, 0) - 6.0).abs() < 1e-6);
    }

    #[test]
    fn constant_is_flat() {
        let w = DenseMatrix::from_vec(2, 2, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let g = finite_diff_grad(|_| 7.5, &w, 1e-5);
        assert_eq!(g.max_abs(), 0.0);
    }
}
