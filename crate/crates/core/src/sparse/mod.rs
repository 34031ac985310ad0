//! Compressed sparse row storage for symmetric positive definite matrices.
//!
//! [`SparseMatrix`] is the only representation used for the large operands.
//! It is immutable once built; every constructor validates the CSR layout and
//! records whether the matrix is exactly symmetric.

mod gen;
mod io;

pub use gen::{lap1d, lap2d, random_spd, random_spd_with_condition};
pub use io::{
    read_matrix_market, read_vector, write_matrix_market, write_vector, MatrixMarketReader,
};

use crate::dense::DenseMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    n_rows: usize,
    n_cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
    symmetric: bool,
}

impl SparseMatrix {
    /// Builds a matrix from raw CSR arrays.
    pub fn from_csr(
        n_rows: usize,
        n_cols: usize,
        row_ptr: Vec<usize>,
        col_idx: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        if row_ptr.len() != n_rows + 1 {
            return Err(Error::InvalidStructure(format!(
                "row_ptr has length {}, expected {}",
                row_ptr.len(),
                n_rows + 1
            )));
        }
        if row_ptr[0] != 0 {
            return Err(Error::InvalidStructure("row_ptr[0] must be 0".into()));
        }
        if col_idx.len() != values.len() || row_ptr[n_rows] != values.len() {
            return Err(Error::InvalidStructure(format!(
                "row_ptr ends at {} but {} column indices and {} values were given",
                row_ptr[n_rows],
                col_idx.len(),
                values.len()
            )));
        }
        for row in 0..n_rows {
            let (start, end) = (row_ptr[row], row_ptr[row + 1]);
            if start > end {
                return Err(Error::InvalidStructure(format!(
                    "row_ptr decreases at row {row}"
                )));
            }
            let cols = &col_idx[start..end];
            if let Some(&c) = cols.iter().find(|&&c| c >= n_cols) {
                return Err(Error::InvalidStructure(format!(
                    "column index {c} out of range in row {row}"
                )));
            }
            if cols.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidStructure(format!(
                    "column indices not strictly increasing in row {row}"
                )));
            }
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("sparse matrix values"));
        }
        let mut m = SparseMatrix {
            n_rows,
            n_cols,
            row_ptr,
            col_idx,
            values,
            symmetric: false,
        };
        m.symmetric = m.check_symmetric();
        Ok(m)
    }

    /// Builds a matrix from `(row, col, value)` triplets. Duplicates are summed.
    pub fn from_triplets(
        n_rows: usize,
        n_cols: usize,
        triplets: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Result<Self> {
        let mut entries: Vec<(usize, usize, f64)> = triplets.into_iter().collect();
        if let Some(&(r, c, _)) = entries
            .iter()
            .find(|&&(r, c, _)| r >= n_rows || c >= n_cols)
        {
            return Err(Error::InvalidStructure(format!(
                "entry ({r}, {c}) outside a {n_rows}x{n_cols} matrix"
            )));
        }
        entries.sort_by_key(|&(r, c, _)| (r, c));

        let mut row_ptr = vec![0usize; n_rows + 1];
        let mut col_idx = Vec::with_capacity(entries.len());
        let mut values: Vec<f64> = Vec::with_capacity(entries.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in entries {
            if last == Some((r, c)) {
                *values.last_mut().expect("duplicate follows an entry") += v;
                continue;
            }
            row_ptr[r + 1] += 1;
            col_idx.push(c);
            values.push(v);
            last = Some((r, c));
        }
        for r in 0..n_rows {
            row_ptr[r + 1] += row_ptr[r];
        }
        Self::from_csr(n_rows, n_cols, row_ptr, col_idx, values)
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal(&vec![1.0; n]).expect("unit diagonal is finite")
    }

    pub fn diagonal(diag: &[f64]) -> Result<Self> {
        let n = diag.len();
        Self::from_csr(n, n, (0..=n).collect(), (0..n).collect(), diag.to_vec())
    }

    /// Sparse copy of a dense matrix, dropping exact zeros.
    pub fn from_dense(m: &DenseMatrix) -> Result<Self> {
        let triplets = (0..m.rows())
            .flat_map(|i| (0..m.cols()).map(move |j| (i, j)))
            .filter_map(|(i, j)| {
                let v = m[(i, j)];
                (v != 0.0).then_some((i, j, v))
            });
        Self::from_triplets(m.rows(), m.cols(), triplets)
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn is_square(&self) -> bool {
        self.n_rows == self.n_cols
    }

    /// Symmetry flag computed when the matrix was built.
    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    /// Iterates the stored entries of one row as `(col, value)`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[range.clone()]
            .iter()
            .copied()
            .zip(self.values[range].iter().copied())
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n_rows).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v)))
    }

    /// Stored value at `(i, j)`, zero when absent.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.col_idx[range.clone()].binary_search(&j) {
            Ok(k) => self.values[range.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn diag(&self) -> Vec<f64> {
        (0..self.n_rows.min(self.n_cols))
            .map(|i| self.get(i, i))
            .collect()
    }

    pub fn transpose(&self) -> SparseMatrix {
        let mut counts = vec![0usize; self.n_cols + 1];
        for &c in &self.col_idx {
            counts[c + 1] += 1;
        }
        for c in 0..self.n_cols {
            counts[c + 1] += counts[c];
        }
        let row_ptr = counts.clone();
        let mut next = counts;
        let mut col_idx = vec![0usize; self.nnz()];
        let mut values = vec![0.0; self.nnz()];
        for i in 0..self.n_rows {
            for (j, v) in self.row(i) {
                let slot = next[j];
                col_idx[slot] = i;
                values[slot] = v;
                next[j] += 1;
            }
        }
        SparseMatrix {
            n_rows: self.n_cols,
            n_cols: self.n_rows,
            row_ptr,
            col_idx,
            values,
            symmetric: self.symmetric,
        }
    }

    fn check_symmetric(&self) -> bool {
        if !self.is_square() {
            return false;
        }
        let t = self.transpose();
        t.row_ptr == self.row_ptr && t.col_idx == self.col_idx && t.values == self.values
    }

    /// `y = A x`, checked.
    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n_cols {
            return Err(Error::DimensionMismatch {
                context: "matvec",
                expected: self.n_cols,
                found: x.len(),
            });
        }
        let mut y = vec![0.0; self.n_rows];
        self.apply(x, &mut y);
        Ok(y)
    }

    /// `y = A x` into a preallocated buffer. Panics on length mismatch.
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.n_cols, "apply: input length");
        assert_eq!(y.len(), self.n_rows, "apply: output length");
        for (i, yi) in y.iter_mut().enumerate() {
            let (start, end) = (self.row_ptr[i], self.row_ptr[i + 1]);
            let mut acc = 0.0;
            for k in start..end {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            *yi = acc;
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn scaled(&self, c: f64) -> SparseMatrix {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= c);
        out
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut d = DenseMatrix::zeros(self.n_rows, self.n_cols);
        for (i, j, v) in self.triplets() {
            d[(i, j)] = v;
        }
        d
    }
}

/// `alpha * A + beta * B` over the union of both sparsity patterns.
pub fn pencil_combine(
    alpha: f64,
    a: &SparseMatrix,
    beta: f64,
    b: &SparseMatrix,
) -> Result<SparseMatrix> {
    if a.n_rows != b.n_rows || a.n_cols != b.n_cols {
        return Err(Error::DimensionMismatch {
            context: "pencil_combine",
            expected: a.n_rows * a.n_cols,
            found: b.n_rows * b.n_cols,
        });
    }
    let mut row_ptr = Vec::with_capacity(a.n_rows + 1);
    let mut col_idx = Vec::with_capacity(a.nnz().max(b.nnz()));
    let mut values = Vec::with_capacity(a.nnz().max(b.nnz()));
    row_ptr.push(0);
    for i in 0..a.n_rows {
        let mut ra = a.row(i).peekable();
        let mut rb = b.row(i).peekable();
        loop {
            let (c, v) = match (ra.peek().copied(), rb.peek().copied()) {
                (None, None) => break,
                (Some((ca, va)), None) => {
                    ra.next();
                    (ca, alpha * va)
                }
                (None, Some((cb, vb))) => {
                    rb.next();
                    (cb, beta * vb)
                }
                (Some((ca, va)), Some((cb, vb))) => {
                    if ca < cb {
                        ra.next();
                        (ca, alpha * va)
                    } else if cb < ca {
                        rb.next();
                        (cb, beta * vb)
                    } else {
                        ra.next();
                        rb.next();
                        (ca, alpha * va + beta * vb)
                    }
                }
            };
            col_idx.push(c);
            values.push(v);
        }
        row_ptr.push(col_idx.len());
    }
    let symmetric = a.symmetric && b.symmetric;
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("pencil_combine"));
    }
    Ok(SparseMatrix {
        n_rows: a.n_rows,
        n_cols: a.n_cols,
        row_ptr,
        col_idx,
        values,
        symmetric,
    })
}
