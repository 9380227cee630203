use crate::error::{Error, Result};

use super::DenseMatrix;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            lr: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// Moment accumulators for one parameter tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub config: AdamConfig,
    pub step: u64,
    m: DenseMatrix,
    v: DenseMatrix,
}

impl AdamState {
    pub fn new(rows: usize, cols: usize, config: AdamConfig) -> Self {
        Self {
            config,
            step: 0,
            m: DenseMatrix::zeros(rows, cols),
            v: DenseMatrix::zeros(rows, cols),
        }
    }

    pub fn for_param(param: &DenseMatrix, config: AdamConfig) -> Self {
        Self::new(param.rows(), param.cols(), config)
    }
}

/// One bias-corrected Adam update in place. `name` labels errors.
pub fn adam_step(
    name: &str,
    params: &mut DenseMatrix,
    grads: &DenseMatrix,
    state: &mut AdamState,
) -> Result<()> {
    if !params.same_shape(grads) || !params.same_shape(&state.m) {
        return Err(Error::shape(
            "adam_step",
            format!(
                "{name}: params {:?}, grads {:?}, state {:?}",
                params.shape(),
                grads.shape(),
                state.m.shape()
            ),
        ));
    }
    if !grads.is_finite() {
        return Err(Error::NonFinite(format!("gradient of {name}")));
    }
    state.step += 1;
    let AdamConfig {
        lr,
        beta1,
        beta2,
        eps,
    } = state.config;
    let t = state.step as i32;
    let bc1 = 1.0 - beta1.powi(t);
    let bc2 = 1.0 - beta2.powi(t);
    let p = params.as_mut_slice();
    let m = state.m.as_mut_slice();
    let v = state.v.as_mut_slice();
    for (((p, &g), m), v) in p.iter_mut().zip(grads.as_slice()).zip(m).zip(v) {
        *m = beta1 * *m + (1.0 - beta1) * g;
        *v = beta2 * *v + (1.0 - beta2) * g * g;
        let m_hat = *m / bc1;
        let v_hat = *v / bc2;
        *p -= lr * m_hat / (v_hat.sqrt() + eps);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar(v: f64) -> DenseMatrix {
        DenseMatrix::from_vec(1, 1, vec![v]).unwrap()
    }

    #[test]
    fn zero_gradient_leaves_params() {
        let mut p = scalar(1.5);
        let mut st = AdamState::for_param(&p, AdamConfig::default());
        adam_step("w", &mut p, &scalar(0.0), &mut st).unwrap();
        assert_eq!(p.get(0, 0), 1.5);
        assert_eq!(st.step, 1);
    }

    #[test]
    fn first_step_moves_by_lr() {
        for g in [3.0, -0.02, 1e3] {
            let mut p = scalar(0.0);
            let cfg = AdamConfig {
                lr: 0.1,
                ..Default::default()
            };
            let mut st = AdamState::for_param(&p, cfg);
            adam_step("w", &mut p, &scalar(g), &mut st).unwrap();
            let delta = p.get(0, 0);
            assert_eq!(delta.signum(), -g.signum());
            assert!((delta.abs() - 0.1).abs() < 1e-6 * 0.1 / g.abs().min(1.0) + 1e-9);
        }
    }

    #[test]
    fn converges_on_quadratic() {
        let cfg = AdamConfig {
            lr: 0.1,
            ..Default::default()
        };
        let mut w = scalar(0.0);
        let mut st = AdamState::for_param(&w, cfg);
        for _ in 0..500 {
            let g = scalar(2.0 * (w.get(0, 0) - 3.0));
            adam_step("w", &mut w, &g, &mut st).unwrap();
        }
        assert!((w.get(0, 0) - 3.0).abs() < 1e-2, "w = {}", w.get(0, 0));
    }

    #[test]
    fn rejects_non_finite_and_bad_shape() {
        let mut p = scalar(0.0);
        let mut st = AdamState::for_param(&p, AdamConfig::default());
        let err = adam_step("users", &mut p, &scalar(f64::NAN), &mut st).unwrap_err();
        assert!(err.to_string().contains("users"));
        assert!(adam_step("w", &mut p, &DenseMatrix::zeros(2, 1), &mut st).is_err());
    }

    #[test]
    fn deterministic() {
        let run = || {
            let mut p = DenseMatrix::from_vec(1, 3, vec![0.1, -0.2, 0.3]).unwrap();
            let g = DenseMatrix::from_vec(1, 3, vec![0.7, 0.01, -4.0]).unwrap();
            let mut st = AdamState::for_param(&p, AdamConfig::default());
            for _ in 0..10 {
                adam_step("w", &mut p, &g, &mut st).unwrap();
            }
            p.into_vec().iter().map(|v| v.to_bits()).collect::<Vec<_>>()
        };
        assert_eq!(run(), run());
    }
}
