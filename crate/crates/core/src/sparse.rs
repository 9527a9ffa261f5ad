//! Sparse linear operators in coordinate form.
//!
//! Assembly produces (row, col, value) triplets; [`SparseOperator::from_triplets`]
//! sums duplicates and stores a compressed-row layout for products. Desk-scale
//! problems only, so no fancy storage tricks.

use std::io::Write;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SparseError {
    #[error("dimension mismatch: operator is {rows}x{cols}, argument has length {got}")]
    Dimension { rows: usize, cols: usize, got: usize },
    #[error("triplet ({row},{col}) outside {rows}x{cols}")]
    OutOfBounds { row: usize, col: usize, rows: usize, cols: usize },
}

/// A sparse linear map between indexed value spaces.
#[derive(Debug, Clone)]
pub struct SparseOperator {
    rows: usize,
    cols: usize,
    /// Sorted by (row, col); no duplicate coordinates.
    entries: Vec<(usize, usize, f64)>,
    /// Offsets into `entries` per row (CSR-style, length rows + 1).
    row_ptr: Vec<usize>,
}

impl SparseOperator {
    /// Builds the operator from raw triplets; duplicate coordinates are summed.
    pub fn from_triplets(
        rows: usize,
        cols: usize,
        triplets: Vec<(usize, usize, f64)>,
    ) -> Result<Self, SparseError> {
        let mut entries = triplets;
        for &(r, c, _) in &entries {
            if r >= rows || c >= cols {
                return Err(SparseError::OutOfBounds { row: r, col: c, rows, cols });
            }
        }
        entries.sort_unstable_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut merged: Vec<(usize, usize, f64)> = Vec::with_capacity(entries.len());
        for (r, c, v) in entries {
            match merged.last_mut() {
                Some(last) if last.0 == r && last.1 == c => last.2 += v,
                _ => merged.push((r, c, v)),
            }
        }
        let mut row_ptr = vec![0usize; rows + 1];
        for &(r, _, _) in &merged {
            row_ptr[r + 1] += 1;
        }
        for i in 0..rows {
            row_ptr[i + 1] += row_ptr[i];
        }
        Ok(Self { rows, cols, entries: merged, row_ptr })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[(usize, usize, f64)] {
        &self.entries
    }

    /// Entries of one row, as (col, value) pairs.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.entries[self.row_ptr[r]..self.row_ptr[r + 1]]
            .iter()
            .map(|&(_, c, v)| (c, v))
    }

    /// y = A x
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>, SparseError> {
        if x.len() != self.cols {
            return Err(SparseError::Dimension { rows: self.rows, cols: self.cols, got: x.len() });
        }
        let mut y = vec![0.0; self.rows];
        for &(r, c, v) in &self.entries {
            y[r] += v * x[c];
        }
        Ok(y)
    }

    /// y = Aᵀ x
    pub fn apply_transpose(&self, x: &[f64]) -> Result<Vec<f64>, SparseError> {
        if x.len() != self.rows {
            return Err(SparseError::Dimension { rows: self.cols, cols: self.rows, got: x.len() });
        }
        let mut y = vec![0.0; self.cols];
        for &(r, c, v) in &self.entries {
            y[c] += v * x[r];
        }
        Ok(y)
    }

    pub fn transpose(&self) -> SparseOperator {
        let triplets = self.entries.iter().map(|&(r, c, v)| (c, r, v)).collect();
        SparseOperator::from_triplets(self.cols, self.rows, triplets).expect("transposed bounds")
    }

    /// C = A B (self is A).
    pub fn multiply(&self, other: &SparseOperator) -> Result<SparseOperator, SparseError> {
        if self.cols != other.rows {
            return Err(SparseError::Dimension {
                rows: other.rows,
                cols: other.cols,
                got: self.cols,
            });
        }
        let mut triplets = Vec::new();
        for r in 0..self.rows {
            for (k, va) in self.row(r) {
                for (c, vb) in other.row(k) {
                    triplets.push((r, c, va * vb));
                }
            }
        }
        SparseOperator::from_triplets(self.rows, other.cols, triplets)
    }

    /// Maximum relative asymmetry |A - Aᵀ| / max|A|; 0 for empty operators.
    pub fn asymmetry(&self) -> f64 {
        let t = self.transpose();
        let scale = self
            .entries
            .iter()
            .map(|e| e.2.abs())
            .fold(0.0f64, f64::max)
            .max(1e-300);
        let mut worst = 0.0f64;
        let mut i = 0;
        let mut j = 0;
        // Both entry lists are sorted by (row, col); walk them together.
        while i < self.entries.len() || j < t.entries.len() {
            let a = self.entries.get(i);
            let b = t.entries.get(j);
            match (a, b) {
                (Some(&(ra, ca, va)), Some(&(rb, cb, vb))) => match (ra, ca).cmp(&(rb, cb)) {
                    std::cmp::Ordering::Equal => {
                        worst = worst.max((va - vb).abs());
                        i += 1;
                        j += 1;
                    }
                    std::cmp::Ordering::Less => {
                        worst = worst.max(va.abs());
                        i += 1;
                    }
                    std::cmp::Ordering::Greater => {
                        worst = worst.max(vb.abs());
                        j += 1;
                    }
                },
                (Some(&(_, _, va)), None) => {
                    worst = worst.max(va.abs());
                    i += 1;
                }
                (None, Some(&(_, _, vb))) => {
                    worst = worst.max(vb.abs());
                    j += 1;
                }
                (None, None) => break,
            }
        }
        worst / scale
    }

    /// Dense copy for small operators in tests and debugging.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut m = vec![vec![0.0; self.cols]; self.rows];
        for &(r, c, v) in &self.entries {
            m[r][c] = v;
        }
        m
    }

    /// Writes `row col value` lines for cross-checking against another implementation.
    pub fn write_triplets<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        for &(r, c, v) in &self.entries {
            writeln!(w, "{} {} {}", r, c, v)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicates_are_summed() {
        let op = SparseOperator::from_triplets(2, 2, vec![(0, 0, 1.0), (0, 0, 2.0), (1, 1, 5.0)])
            .unwrap();
        assert_eq!(op.nnz(), 2);
        assert_eq!(op.to_dense()[0][0], 3.0);
    }

    #[test]
    fn apply_and_transpose_agree() {
        let op =
            SparseOperator::from_triplets(2, 3, vec![(0, 0, 1.0), (0, 2, -2.0), (1, 1, 4.0)])
                .unwrap();
        let y = op.apply(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(y, vec![-5.0, 8.0]);
        let z = op.apply_transpose(&[1.0, 1.0]).unwrap();
        assert_eq!(z, vec![1.0, 4.0, -2.0]);
    }

    #[test]
    fn multiply_matches_dense() {
        let a = SparseOperator::from_triplets(2, 2, vec![(0, 0, 2.0), (0, 1, 1.0), (1, 1, 3.0)])
            .unwrap();
        let b = SparseOperator::from_triplets(2, 2, vec![(0, 0, 1.0), (1, 0, -1.0), (1, 1, 2.0)])
            .unwrap();
        let c = a.multiply(&b).unwrap().to_dense();
        assert_eq!(c, vec![vec![1.0, 2.0], vec![-3.0, 6.0]]);
    }

    #[test]
    fn out_of_bounds_rejected() {
        assert!(SparseOperator::from_triplets(1, 1, vec![(1, 0, 1.0)]).is_err());
    }
}
