//! Symmetric sparse matrices in compressed-row form.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

/// Symmetric matrix stored as full CSR (both triangles), columns sorted per row.
///
/// Symmetry is exact by construction: every constructor inserts `(i, j)` and
/// `(j, i)` from the same value.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSymMatrix {
    dim: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseSymMatrix {
    /// Builds from upper-or-lower triplets; each off-diagonal `(i, j, v)` is
    /// mirrored. Duplicate coordinates are summed. Off-diagonal zeros are dropped.
    pub fn from_triplets(dim: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        let mut entries: Vec<(usize, usize, f64)> = Vec::with_capacity(triplets.len() * 2);
        for &(i, j, v) in triplets {
            if i >= dim || j >= dim {
                return Err(Error::DimensionMismatch(format!(
                    "entry ({i}, {j}) outside a {dim}x{dim} matrix"
                )));
            }
            entries.push((i, j, v));
            if i != j {
                entries.push((j, i, v));
            }
        }
        entries.sort_by_key(|a| (a.0, a.1));

        let mut row_ptr = vec![0usize; dim + 1];
        let mut col_idx = Vec::with_capacity(entries.len());
        let mut values: Vec<f64> = Vec::with_capacity(entries.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in entries {
            if last == Some((i, j)) {
                *values.last_mut().expect("entry exists") += v;
                continue;
            }
            last = Some((i, j));
            col_idx.push(j);
            values.push(v);
            row_ptr[i + 1] += 1;
        }
        for i in 0..dim {
            row_ptr[i + 1] += row_ptr[i];
        }
        let mut m = SparseSymMatrix {
            dim,
            row_ptr,
            col_idx,
            values,
        };
        m.drop_offdiagonal_zeros();
        Ok(m)
    }

    pub fn diagonal(diag: &[f64]) -> Self {
        let dim = diag.len();
        SparseSymMatrix {
            dim,
            row_ptr: (0..=dim).collect(),
            col_idx: (0..dim).collect(),
            values: diag.to_vec(),
        }
    }

    fn drop_offdiagonal_zeros(&mut self) {
        if !self
            .values
            .iter()
            .zip(self.row_iter_indices())
            .any(|(&v, (i, j))| v == 0.0 && i != j)
        {
            return;
        }
        let mut row_ptr = vec![0usize; self.dim + 1];
        let mut col_idx = Vec::with_capacity(self.col_idx.len());
        let mut values = Vec::with_capacity(self.values.len());
        for i in 0..self.dim {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = self.col_idx[k];
                if self.values[k] != 0.0 || i == j {
                    col_idx.push(j);
                    values.push(self.values[k]);
                }
            }
            row_ptr[i + 1] = col_idx.len();
        }
        self.row_ptr = row_ptr;
        self.col_idx = col_idx;
        self.values = values;
    }

    fn row_iter_indices(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.dim).flat_map(move |i| {
            self.col_idx[self.row_ptr[i]..self.row_ptr[i + 1]]
                .iter()
                .map(move |&j| (i, j))
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// `(column, value)` pairs of row `i`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[r.clone()]
            .iter()
            .copied()
            .zip(self.values[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.col_idx[r.clone()].binary_search(&j) {
            Ok(k) => self.values[r.start + k],
            Err(_) => 0.0,
        }
    }

    /// Diagonal entries (zero where not stored).
    pub fn diag(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.get(i, i)).collect()
    }

    /// Sum of each row's values, accumulated in column order.
    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.row(i).map(|(_, v)| v).sum()).collect()
    }

    pub fn is_diagonal(&self) -> bool {
        self.row_iter_indices().all(|(i, j)| i == j)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `y = A x`, writing into a caller-owned buffer.
    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.dim);
        debug_assert_eq!(y.len(), self.dim);
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            *yi = acc;
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dim];
        self.mul_vec_into(x, &mut y);
        y
    }

    /// `xᵀ A x`.
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        (0..self.dim)
            .map(|i| x[i] * self.row(i).map(|(j, v)| v * x[j]).sum::<f64>())
            .sum()
    }

    /// Exact structural and numerical symmetry check.
    pub fn is_symmetric(&self) -> bool {
        self.row_iter_indices()
            .zip(self.values.iter())
            .all(|((i, j), &v)| self.get(j, i).to_bits() == v.to_bits())
    }

    /// Principal submatrix on `keep` (original indices, ascending).
    pub fn principal_submatrix(&self, keep: &[usize]) -> SparseSymMatrix {
        let mut new_index = vec![usize::MAX; self.dim];
        for (new, &old) in keep.iter().enumerate() {
            new_index[old] = new;
        }
        let mut row_ptr = Vec::with_capacity(keep.len() + 1);
        row_ptr.push(0);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        for &old in keep {
            for (j, v) in self.row(old) {
                if new_index[j] != usize::MAX {
                    col_idx.push(new_index[j]);
                    values.push(v);
                }
            }
            row_ptr.push(col_idx.len());
        }
        SparseSymMatrix {
            dim: keep.len(),
            row_ptr,
            col_idx,
            values,
        }
    }

    /// Symmetric permutation `P A Pᵀ` where new index `perm[i]` takes old row `i`.
    pub fn permuted(&self, perm: &[usize]) -> Result<SparseSymMatrix> {
        if perm.len() != self.dim {
            return Err(Error::DimensionMismatch("permutation length".into()));
        }
        let triplets: Vec<(usize, usize, f64)> = self
            .row_iter_indices()
            .zip(self.values.iter())
            .filter(|((i, j), _)| i <= j)
            .map(|((i, j), &v)| (perm[i], perm[j], v))
            .collect();
        SparseSymMatrix::from_triplets(self.dim, &triplets)
    }

    /// Row-major dense copy, for small matrices.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut out = vec![vec![0.0; self.dim]; self.dim];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, v) in self.row(i) {
                row[j] = v;
            }
        }
        out
    }

    /// MatrixMarket coordinate format, `symmetric` variant (lower triangle).
    pub fn to_matrix_market(&self) -> String {
        let lower: Vec<(usize, usize, f64)> = self
            .row_iter_indices()
            .zip(self.values.iter())
            .filter(|((i, j), _)| j <= i)
            .map(|((i, j), &v)| (i, j, v))
            .collect();
        let mut out = String::from("%%MatrixMarket matrix coordinate real symmetric\n");
        let _ = writeln!(out, "{} {} {}", self.dim, self.dim, lower.len());
        for (i, j, v) in lower {
            let _ = writeln!(out, "{} {} {:e}", i + 1, j + 1, v);
        }
        out
    }

    pub fn write_matrix_market(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_matrix_market()).map_err(|e| Error::io(path, e))
    }
}
