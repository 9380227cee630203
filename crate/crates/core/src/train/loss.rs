/// `ln(1 + e^x)` without overflow.
#[inline]
pub fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// `ln σ(x) = −softplus(−x)`.
#[inline]
pub fn log_sigmoid(x: f64) -> f64 {
    -softplus(-x)
}

#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `Σ −ln σ(pos − neg) + λ·‖Θ‖²`, with `‖Θ‖²` passed in precomputed.
pub fn bpr_loss(pos: &[f64], neg: &[f64], theta_sq: f64, lambda: f64) -> f64 {
    assert_eq!(pos.len(), neg.len(), "score vectors differ in length");
    let data: f64 = pos.iter().zip(neg).map(|(p, n)| -log_sigmoid(p - n)).sum();
    data + lambda * theta_sq
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn examples() {
        assert!((bpr_loss(&[0.3], &[0.3], 0.0, 0.0) - std::f64::consts::LN_2).abs() < 1e-15);
        assert!(bpr_loss(&[20.0], &[0.0], 0.0, 0.0) < 1e-8);
        assert!((bpr_loss(&[], &[], 4.0, 1e-3) - 0.004).abs() < 1e-15);
    }

    #[test]
    fn extreme_margins_stay_finite() {
        assert!(bpr_loss(&[-1e4], &[1e4], 0.0, 0.0).is_finite());
        assert_eq!(sigmoid(-1e4), 0.0);
        assert_eq!(sigmoid(1e4), 1.0);
    }

    proptest! {
        #[test]
        fn strictly_decreasing_in_margin(a in -30.0f64..30.0, delta in 0.01f64..5.0) {
            prop_assert!(bpr_loss(&[a + delta], &[0.0], 0.0, 0.0) < bpr_loss(&[a], &[0.0], 0.0, 0.0));
        }
    }
}
