use crate::error::{Error, Result};

use super::DenseMatrix;

/// Compressed sparse row matrix.
///
/// Column indices are strictly increasing within each row, so a row can be
/// read as a sorted neighbor list.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    indptr: Vec<usize>,
    indices: Vec<u32>,
    values: Vec<f64>,
}

impl SparseMatrix {
    pub fn empty(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            indptr: vec![0; rows + 1],
            indices: Vec::new(),
            values: Vec::new(),
        }
    }

    /// Validates and wraps a raw CSR triple.
    pub fn from_parts(
        rows: usize,
        cols: usize,
        indptr: Vec<usize>,
        indices: Vec<u32>,
        values: Vec<f64>,
    ) -> Result<Self> {
        let bad = |detail: String| Err(Error::shape("SparseMatrix::from_parts", detail));
        if indptr.len() != rows + 1 || indptr[0] != 0 {
            return bad(format!("indptr length {} for {rows} rows", indptr.len()));
        }
        if indices.len() != values.len() || *indptr.last().unwrap() != indices.len() {
            return bad("indptr/indices/values lengths disagree".into());
        }
        for r in 0..rows {
            if indptr[r] > indptr[r + 1] {
                return bad(format!("indptr decreases at row {r}"));
            }
            let row = &indices[indptr[r]..indptr[r + 1]];
            if row.windows(2).any(|w| w[0] >= w[1]) {
                return bad(format!("row {r} column indices not strictly increasing"));
            }
            if row.last().is_some_and(|&c| c as usize >= cols) {
                return bad(format!("row {r} has column >= {cols}"));
            }
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("SparseMatrix values".into()));
        }
        Ok(Self {
            rows,
            cols,
            indptr,
            indices,
            values,
        })
    }

    /// Binary matrix with a 1 at every listed `(row, col)`; duplicates collapse.
    pub fn from_pairs(rows: usize, cols: usize, pairs: &[(u32, u32)]) -> Result<Self> {
        let mut per_row: Vec<Vec<u32>> = vec![Vec::new(); rows];
        for &(r, c) in pairs {
            if r as usize >= rows {
                return Err(Error::Index {
                    what: "sparse row",
                    index: r as usize,
                    len: rows,
                });
            }
            if c as usize >= cols {
                return Err(Error::Index {
                    what: "sparse column",
                    index: c as usize,
                    len: cols,
                });
            }
            per_row[r as usize].push(c);
        }
        let mut indptr = Vec::with_capacity(rows + 1);
        let mut indices = Vec::with_capacity(pairs.len());
        indptr.push(0);
        for mut row in per_row {
            row.sort_unstable();
            row.dedup();
            indices.extend_from_slice(&row);
            indptr.push(indices.len());
        }
        let values = vec![1.0; indices.len()];
        Ok(Self {
            rows,
            cols,
            indptr,
            indices,
            values,
        })
    }

    /// From per-row sorted `(col, value)` lists.
    pub(crate) fn from_sorted_rows(cols: usize, rows: Vec<Vec<(u32, f64)>>) -> Self {
        let mut indptr = Vec::with_capacity(rows.len() + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        indptr.push(0);
        let n = rows.len();
        for row in rows {
            debug_assert!(row.windows(2).all(|w| w[0].0 < w[1].0));
            for (c, v) in row {
                indices.push(c);
                values.push(v);
            }
            indptr.push(indices.len());
        }
        Self {
            rows: n,
            cols,
            indptr,
            indices,
            values,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn indptr(&self) -> &[usize] {
        &self.indptr
    }

    pub fn indices(&self) -> &[u32] {
        &self.indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Sorted column indices of row `r`.
    pub fn row_indices(&self, r: usize) -> &[u32] {
        &self.indices[self.indptr[r]..self.indptr[r + 1]]
    }

    pub fn row_values(&self, r: usize) -> &[f64] {
        &self.values[self.indptr[r]..self.indptr[r + 1]]
    }

    pub fn row_nnz(&self, r: usize) -> usize {
        self.indptr[r + 1] - self.indptr[r]
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let idx = self.row_indices(r);
        match idx.binary_search(&(c as u32)) {
            Ok(k) => self.row_values(r)[k],
            Err(_) => 0.0,
        }
    }

    /// Divides every stored value by its row sum; empty rows stay empty.
    pub fn row_normalized(&self) -> SparseMatrix {
        let mut out = self.clone();
        for r in 0..self.rows {
            let range = self.indptr[r]..self.indptr[r + 1];
            let sum: f64 = self.values[range.clone()].iter().sum();
            if sum != 0.0 {
                out.values[range].iter_mut().for_each(|v| *v /= sum);
            }
        }
        out
    }

    /// Multiplies row `r` by `factors[r]`, dropping rows that become zero.
    pub fn scale_rows(&self, factors: &[f64]) -> SparseMatrix {
        assert_eq!(factors.len(), self.rows);
        let rows = (0..self.rows)
            .map(|r| {
                let f = factors[r];
                if f == 0.0 {
                    Vec::new()
                } else {
                    self.row_indices(r)
                        .iter()
                        .zip(self.row_values(r))
                        .map(|(&c, &v)| (c, v * f))
                        .collect()
                }
            })
            .collect();
        SparseMatrix::from_sorted_rows(self.cols, rows)
    }

    pub fn transpose(&self) -> SparseMatrix {
        let mut counts = vec![0usize; self.cols + 1];
        for &c in &self.indices {
            counts[c as usize + 1] += 1;
        }
        for c in 0..self.cols {
            counts[c + 1] += counts[c];
        }
        let indptr = counts.clone();
        let mut next = counts;
        let mut indices = vec![0u32; self.nnz()];
        let mut values = vec![0.0; self.nnz()];
        // rows are visited in increasing order, so each output row stays sorted
        for r in 0..self.rows {
            for k in self.indptr[r]..self.indptr[r + 1] {
                let c = self.indices[k] as usize;
                let dst = next[c];
                indices[dst] = r as u32;
                values[dst] = self.values[k];
                next[c] += 1;
            }
        }
        SparseMatrix {
            rows: self.cols,
            cols: self.rows,
            indptr,
            indices,
            values,
        }
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(self.rows, self.cols);
        for r in 0..self.rows {
            for (&c, &v) in self.row_indices(r).iter().zip(self.row_values(r)) {
                out.set(r, c as usize, v);
            }
        }
        out
    }

    /// `self · dense`. Rows without entries produce zero rows.
    pub fn spmm(&self, dense: &DenseMatrix) -> Result<DenseMatrix> {
        if self.cols != dense.rows() {
            return Err(Error::shape(
                "spmm",
                format!(
                    "sparse {}x{} · dense {}x{}",
                    self.rows,
                    self.cols,
                    dense.rows(),
                    dense.cols()
                ),
            ));
        }
        let mut out = DenseMatrix::zeros(self.rows, dense.cols());
        for r in 0..self.rows {
            let out_row = out.row_mut(r);
            for (&c, &v) in self.row_indices(r).iter().zip(self.row_values(r)) {
                for (o, &x) in out_row.iter_mut().zip(dense.row(c as usize)) {
                    *o += v * x;
                }
            }
        }
        Ok(out)
    }

    /// Row sums as a vector.
    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.rows)
            .map(|r| self.row_values(r).iter().sum())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_sparse(rng: &mut ChaCha8Rng, rows: usize, cols: usize, density: f64) -> SparseMatrix {
        let rows_vec = (0..rows)
            .map(|_| {
                let mut row = Vec::new();
                for c in 0..cols as u32 {
                    if rng.gen_bool(density) {
                        row.push((c, rng.gen_range(-2.0..2.0)));
                    }
                }
                row
            })
            .collect();
        SparseMatrix::from_sorted_rows(cols, rows_vec)
    }

    #[test]
    fn identity_spmm_is_identity() {
        let eye = SparseMatrix::from_pairs(3, 3, &[(0, 0), (1, 1), (2, 2)]).unwrap();
        let b = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0], vec![5.0, 6.0]]).unwrap();
        assert_eq!(eye.spmm(&b).unwrap(), b);
    }

    #[test]
    fn half_half_row_is_mean() {
        let a = SparseMatrix::from_parts(1, 3, vec![0, 2], vec![0, 1], vec![0.5, 0.5]).unwrap();
        let b = DenseMatrix::from_rows(&[vec![2.0, 2.0], vec![4.0, 6.0], vec![9.0, 9.0]]).unwrap();
        assert_eq!(a.spmm(&b).unwrap().as_slice(), &[3.0, 4.0]);
    }

    #[test]
    fn spmm_matches_dense_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let a = random_sparse(&mut rng, 5, 5, 0.4);
            let b =
                DenseMatrix::from_vec(5, 3, (0..15).map(|_| rng.gen_range(-1.0..1.0)).collect())
                    .unwrap();
            let sparse = a.spmm(&b).unwrap();
            let dense = a.to_dense().matmul(&b).unwrap();
            assert!(sparse.max_abs_diff(&dense) < 1e-12);
        }
    }

    #[test]
    fn spmm_shape_error() {
        let a = SparseMatrix::empty(2, 3);
        assert!(a.spmm(&DenseMatrix::zeros(2, 2)).is_err());
    }

    #[test]
    fn empty_rows_give_zero_rows() {
        let a = SparseMatrix::from_pairs(3, 2, &[(0, 1)])
            .unwrap()
            .row_normalized();
        let out = a.spmm(&DenseMatrix::filled(2, 2, 5.0)).unwrap();
        assert_eq!(out.row(1), &[0.0, 0.0]);
        assert_eq!(out.row(0), &[5.0, 5.0]);
    }

    #[test]
    fn from_parts_rejects_bad_csr() {
        assert!(SparseMatrix::from_parts(1, 3, vec![0, 2], vec![1, 1], vec![1.0, 1.0]).is_err());
        assert!(SparseMatrix::from_parts(1, 3, vec![0, 1], vec![3], vec![1.0]).is_err());
        assert!(SparseMatrix::from_parts(2, 3, vec![0, 1], vec![0], vec![1.0]).is_err());
        assert!(SparseMatrix::from_parts(1, 3, vec![0, 1], vec![0], vec![f64::NAN]).is_err());
    }

    #[test]
    fn transpose_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_sparse(&mut rng, 6, 4, 0.5);
        assert_eq!(a.transpose().transpose(), a);
        assert_eq!(a.transpose().to_dense(), a.to_dense().transpose());
    }

    #[test]
    fn pairs_dedup_and_normalize() {
        let a = SparseMatrix::from_pairs(2, 3, &[(0, 2), (0, 0), (0, 2), (1, 1)]).unwrap();
        assert_eq!(a.nnz(), 3);
        assert_eq!(a.row_indices(0), &[0, 2]);
        let n = a.row_normalized();
        assert_eq!(n.row_values(0), &[0.5, 0.5]);
        assert!(SparseMatrix::from_pairs(2, 3, &[(2, 0)]).is_err());
    }
}
