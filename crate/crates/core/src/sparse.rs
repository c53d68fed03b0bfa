//! Sparse symmetric stochastic matrices with exact rational entries.
//!
//! Every off-diagonal entry is an integer count over a common denominator;
//! the diagonal holds the remaining mass of each row.

use std::fmt::Write as _;

use num_bigint::BigInt;
use num_rational::BigRational;
use rayon::prelude::*;

use crate::Error;

/// Rows per task in parallel loops. Fixed so that reductions do not depend
/// on the size of the thread pool.
pub const CHUNK: usize = 1024;

#[derive(Clone, Debug)]
pub struct SparseSymmetricStochastic {
    dim: usize,
    denom: u64,
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    counts: Vec<u64>,
    diag: Vec<u64>,
}

impl SparseSymmetricStochastic {
    /// Builds from per-row off-diagonal `(column, count)` lists. Rows are
    /// sorted; duplicate columns are merged.
    pub fn from_rows(denom: u64, rows: Vec<Vec<(u32, u64)>>) -> Result<Self, Error> {
        if denom == 0 {
            return Err(Error::InvalidArgument("zero denominator".into()));
        }
        let dim = rows.len();
        let mut row_ptr = Vec::with_capacity(dim + 1);
        let mut cols = Vec::new();
        let mut counts = Vec::new();
        let mut diag = Vec::with_capacity(dim);
        row_ptr.push(0);
        for (i, mut row) in rows.into_iter().enumerate() {
            row.sort_unstable();
            let start = cols.len();
            for (j, c) in row {
                if j as usize >= dim {
                    return Err(Error::InvalidArgument(format!("column {j} out of range")));
                }
                if j as usize == i || c == 0 {
                    continue;
                }
                if cols.len() > start && *cols.last().unwrap() == j {
                    *counts.last_mut().unwrap() += c;
                } else {
                    cols.push(j);
                    counts.push(c);
                }
            }
            let off: u64 = counts[start..].iter().sum();
            if off > denom {
                return Err(Error::Invariant(format!("row {i} has mass above one")));
            }
            diag.push(denom - off);
            row_ptr.push(cols.len());
        }
        Ok(SparseSymmetricStochastic {
            dim,
            denom,
            row_ptr,
            cols,
            counts,
            diag,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn denominator(&self) -> u64 {
        self.denom
    }

    pub fn nnz_off_diagonal(&self) -> usize {
        self.cols.len()
    }

    /// Off-diagonal `(column, count)` entries of row `i`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, u64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[r.clone()]
            .iter()
            .zip(&self.counts[r])
            .map(|(&j, &c)| (j as usize, c))
    }

    pub fn count(&self, i: usize, j: usize) -> u64 {
        if i == j {
            return self.diag[i];
        }
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.cols[r.clone()].binary_search(&(j as u32)) {
            Ok(pos) => self.counts[r.start + pos],
            Err(_) => 0,
        }
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.count(i, j) as f64 / self.denom as f64
    }

    pub fn exact(&self, i: usize, j: usize) -> BigRational {
        BigRational::new(BigInt::from(self.count(i, j)), BigInt::from(self.denom))
    }

    pub fn diagonal(&self, i: usize) -> f64 {
        self.value(i, i)
    }

    /// `(P + I)/2`, still exact.
    pub fn lazy(&self) -> Self {
        SparseSymmetricStochastic {
            dim: self.dim,
            denom: 2 * self.denom,
            row_ptr: self.row_ptr.clone(),
            cols: self.cols.clone(),
            counts: self.counts.clone(),
            diag: self.diag.iter().map(|d| d + self.denom).collect(),
        }
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.dim)
            .into_par_iter()
            .all(|i| self.row(i).all(|(j, c)| self.count(j, i) == c))
    }

    /// Row sums are one by construction; this rechecks the stored data.
    pub fn is_stochastic(&self) -> bool {
        (0..self.dim).all(|i| self.row(i).map(|(_, c)| c).sum::<u64>() + self.diag[i] == self.denom)
    }

    /// `y = P x`, each row summed sequentially.
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.dim);
        assert_eq!(y.len(), self.dim);
        let scale = 1.0 / self.denom as f64;
        y.par_chunks_mut(CHUNK).enumerate().for_each(|(c, out)| {
            let base = c * CHUNK;
            for (off, yi) in out.iter_mut().enumerate() {
                let i = base + off;
                let mut acc = self.diag[i] as f64 * x[i];
                for (j, cnt) in self.row(i) {
                    acc += cnt as f64 * x[j];
                }
                *yi = acc * scale;
            }
        });
    }

    /// `(Pf)(x)` for rational `f`.
    pub fn matvec_exact(&self, f: &[BigRational]) -> Vec<BigRational> {
        let d = BigInt::from(self.denom);
        (0..self.dim)
            .into_par_iter()
            .map(|i| {
                let mut acc = &f[i] * BigInt::from(self.diag[i]);
                for (j, c) in self.row(i) {
                    acc += &f[j] * BigInt::from(c);
                }
                acc / d.clone()
            })
            .collect()
    }

    pub fn is_connected(&self) -> bool {
        if self.dim == 0 {
            return true;
        }
        let mut seen = vec![false; self.dim];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut reached = 1;
        while let Some(v) = stack.pop() {
            for (u, _) in self.row(v) {
                if !seen[u] {
                    seen[u] = true;
                    reached += 1;
                    stack.push(u);
                }
            }
        }
        reached == self.dim
    }

    /// Row-major dense copy.
    pub fn to_dense(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.dim * self.dim];
        for i in 0..self.dim {
            m[i * self.dim + i] = self.diagonal(i);
            for (j, c) in self.row(i) {
                m[i * self.dim + j] = c as f64 / self.denom as f64;
            }
        }
        m
    }

    /// All nonzero entries as `i j p/q` lines in reduced form.
    pub fn to_triplets(&self) -> String {
        let mut s = String::new();
        for i in 0..self.dim {
            let mut entries: Vec<(usize, u64)> = self.row(i).collect();
            if self.diag[i] > 0 {
                entries.push((i, self.diag[i]));
            }
            entries.sort_unstable();
            for (j, c) in entries {
                let q = BigRational::new(BigInt::from(c), BigInt::from(self.denom));
                let _ = writeln!(s, "{i} {j} {}/{}", q.numer(), q.denom());
            }
        }
        s
    }
}

/// Dot product with a fixed reduction tree.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    let partial: Vec<f64> = a
        .par_chunks(CHUNK)
        .zip(b.par_chunks(CHUNK))
        .map(|(x, y)| x.iter().zip(y).map(|(p, q)| p * q).sum::<f64>())
        .collect();
    partial.iter().sum()
}

pub fn sum(a: &[f64]) -> f64 {
    let partial: Vec<f64> = a.par_chunks(CHUNK).map(|x| x.iter().sum::<f64>()).collect();
    partial.iter().sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_state() -> SparseSymmetricStochastic {
        SparseSymmetricStochastic::from_rows(4, vec![vec![(1, 1)], vec![(0, 1)]]).unwrap()
    }

    #[test]
    fn entries_and_lazy() {
        let p = two_state();
        assert_eq!(p.value(0, 1), 0.25);
        assert_eq!(p.diagonal(0), 0.75);
        assert!(p.is_symmetric() && p.is_stochastic() && p.is_connected());
        let l = p.lazy();
        assert_eq!(l.value(0, 1), 0.125);
        assert_eq!(l.diagonal(1), 0.875);
        assert_eq!(p.to_triplets(), "0 0 3/4\n0 1 1/4\n1 0 1/4\n1 1 3/4\n");
    }

    #[test]
    fn matvec_matches_dense() {
        let p = two_state();
        let mut y = vec![0.0; 2];
        p.matvec(&[1.0, -1.0], &mut y);
        assert_eq!(y, vec![0.5, -0.5]);
    }

    #[test]
    fn rejects_overfull_row() {
        assert!(SparseSymmetricStochastic::from_rows(1, vec![vec![(1, 2)], vec![]]).is_err());
    }
}
