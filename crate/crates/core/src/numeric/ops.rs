use rand::Rng;

use crate::error::{Error, Result};

use super::DenseMatrix;

/// Elementwise `max(x, slope * x)` for `slope` in `[0, 1)`.
pub fn leaky_relu(x: &DenseMatrix, slope: f64) -> DenseMatrix {
    debug_assert!(x.is_finite(), "leaky_relu input contains non-finite values");
    x.map(|v| if v > 0.0 { v } else { slope * v })
}

/// Derivative of [`leaky_relu`] evaluated at the pre-activation.
pub fn leaky_relu_grad_mask(pre: &DenseMatrix, slope: f64) -> DenseMatrix {
    pre.map(|v| if v > 0.0 { 1.0 } else { slope })
}

/// Joins equal-height matrices side by side, in order.
pub fn concat_rows(layers: &[&DenseMatrix]) -> Result<DenseMatrix> {
    let Some(first) = layers.first() else {
        return Ok(DenseMatrix::zeros(0, 0));
    };
    let rows = first.rows();
    if let Some(bad) = layers.iter().find(|m| m.rows() != rows) {
        return Err(Error::shape(
            "concat_rows",
            format!("row count {} vs {rows}", bad.rows()),
        ));
    }
    let cols: usize = layers.iter().map(|m| m.cols()).sum();
    let mut out = DenseMatrix::zeros(rows, cols);
    for r in 0..rows {
        let mut offset = 0;
        let out_row = out.row_mut(r);
        for m in layers {
            out_row[offset..offset + m.cols()].copy_from_slice(m.row(r));
            offset += m.cols();
        }
    }
    Ok(out)
}

/// Inverse of [`concat_rows`] for blocks of the given widths.
pub fn split_cols(m: &DenseMatrix, widths: &[usize]) -> Result<Vec<DenseMatrix>> {
    if widths.iter().sum::<usize>() != m.cols() {
        return Err(Error::shape(
            "split_cols",
            format!("widths {widths:?} for {} cols", m.cols()),
        ));
    }
    let mut out: Vec<DenseMatrix> = widths
        .iter()
        .map(|&w| DenseMatrix::zeros(m.rows(), w))
        .collect();
    for r in 0..m.rows() {
        let mut offset = 0;
        for block in out.iter_mut() {
            let w = block.cols();
            block
                .row_mut(r)
                .copy_from_slice(&m.row(r)[offset..offset + w]);
            offset += w;
        }
    }
    Ok(out)
}

/// Inverted dropout mask: each entry is 0 with probability `rate`, else `1/(1-rate)`.
pub fn make_dropout_mask<R: Rng + ?Sized>(
    rows: usize,
    cols: usize,
    rate: f64,
    rng: &mut R,
) -> DenseMatrix {
    assert!(
        (0.0..1.0).contains(&rate),
        "dropout rate {rate} outside [0,1)"
    );
    if rate == 0.0 {
        return DenseMatrix::filled(rows, cols, 1.0);
    }
    let keep = 1.0 / (1.0 - rate);
    let mut m = DenseMatrix::zeros(rows, cols);
    for v in m.as_mut_slice() {
        if rng.gen::<f64>() >= rate {
            *v = keep;
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn leaky_relu_examples() {
        let x = DenseMatrix::from_vec(1, 3, vec![2.0, -1.0, 0.0]).unwrap();
        assert_eq!(leaky_relu(&x, 0.01).as_slice(), &[2.0, -0.01, 0.0]);
    }

    #[test]
    fn concat_examples() {
        let a = DenseMatrix::from_vec(1, 2, vec![1.0, 2.0]).unwrap();
        let b = DenseMatrix::from_vec(1, 2, vec![3.0, 4.0]).unwrap();
        assert_eq!(concat_rows(&[&a]).unwrap(), a);
        assert_eq!(
            concat_rows(&[&a, &b]).unwrap().as_slice(),
            &[1.0, 2.0, 3.0, 4.0]
        );
        let d = DenseMatrix::zeros(3, 64);
        assert_eq!(concat_rows(&[&d, &d, &d]).unwrap().cols(), 192);
        assert!(concat_rows(&[&a, &DenseMatrix::zeros(2, 2)]).is_err());
    }

    #[test]
    fn dropout_rate_zero_is_ones() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let m = make_dropout_mask(4, 5, 0.0, &mut rng);
        assert!(m.as_slice().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn dropout_zero_fraction_and_unbiased() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let m = make_dropout_mask(1000, 100, 0.5, &mut rng);
        let zeros = m.as_slice().iter().filter(|&&v| v == 0.0).count() as f64 / 1e5;
        assert!((zeros - 0.5).abs() < 0.01, "zero fraction {zeros}");

        let x = DenseMatrix::from_vec(
            1000,
            100,
            (0..100_000).map(|_| rng.gen_range(0.5..1.5)).collect(),
        )
        .unwrap();
        let masked = x.hadamard(&m).unwrap();
        let mean = |d: &DenseMatrix| d.as_slice().iter().sum::<f64>() / d.len() as f64;
        let rel = (mean(&masked) - mean(&x)).abs() / mean(&x);
        assert!(rel < 0.02, "relative mean shift {rel}");
    }

    proptest! {
        #[test]
        fn leaky_relu_limits(vals in proptest::collection::vec(-10.0f64..10.0, 1..20)) {
            let x = DenseMatrix::from_vec(1, vals.len(), vals.clone()).unwrap();
            let relu = leaky_relu(&x, 0.0);
            for (r, v) in relu.as_slice().iter().zip(&vals) {
                prop_assert_eq!(*r, v.max(0.0));
            }
            let ident = x.map(|v| if v > 0.0 { v } else { 1.0 * v });
            prop_assert_eq!(ident, x);
        }

        #[test]
        fn split_inverts_concat(rows in 1usize..5, widths in proptest::collection::vec(1usize..4, 1..4), seed in 0u64..1000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let blocks: Vec<DenseMatrix> = widths.iter().map(|&w| {
                DenseMatrix::from_vec(rows, w, (0..rows * w).map(|_| rng.gen()).collect()).unwrap()
            }).collect();
            let refs: Vec<&DenseMatrix> = blocks.iter().collect();
            let joined = concat_rows(&refs).unwrap();
            prop_assert_eq!(split_cols(&joined, &widths).unwrap(), blocks);
        }
    }
}
