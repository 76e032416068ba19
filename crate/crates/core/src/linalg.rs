//! Small linear-algebra helpers: a compressed-row symmetric matrix and a
//! banded Cholesky factorization for the stiffness solves.

use crate::error::{Error, Result};

/// Compressed sparse rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Csr {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl Csr {
    /// Builds from unsorted triplets; duplicates are summed.
    pub fn from_triplets(n: usize, mut triplets: Vec<(usize, usize, f64)>) -> Self {
        triplets.sort_by_key(|t| (t.0, t.1));
        let mut row_ptr = vec![0usize; n + 1];
        let mut cols = Vec::with_capacity(triplets.len());
        let mut vals: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            if last == Some((r, c)) {
                *vals.last_mut().unwrap() += v;
            } else {
                cols.push(c);
                vals.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..n {
            row_ptr[r + 1] += row_ptr[r];
        }
        Self {
            n,
            row_ptr,
            cols,
            vals,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.cols[span.clone()]
            .iter()
            .copied()
            .zip(self.vals[span].iter().copied())
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.row(r).find(|(j, _)| *j == c).map_or(0.0, |(_, v)| v)
    }

    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        for (r, out) in y.iter_mut().enumerate().take(self.n) {
            let mut acc = 0.0;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.vals[k] * x[self.cols[k]];
            }
            *out = acc;
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.mul_vec_into(x, &mut y);
        y
    }
}

/// `L Lᵀ` factorization of a symmetric positive definite band matrix.
#[derive(Debug, Clone)]
pub struct BandCholesky {
    n: usize,
    bw: usize,
    /// Row `i` stores columns `i - bw ..= i` (out-of-range slots unused).
    l: Vec<f64>,
}

impl BandCholesky {
    pub fn factor(n: usize, bw: usize, entry: impl Fn(usize, usize) -> f64) -> Result<Self> {
        let stride = bw + 1;
        let mut l = vec![0.0; n * stride];
        let at = |i: usize, j: usize| i * stride + (j + bw - i);
        for i in 0..n {
            let lo = i.saturating_sub(bw);
            for j in lo..=i {
                let klo = lo.max(j.saturating_sub(bw));
                let mut s = entry(i, j);
                for k in klo..j {
                    s -= l[at(i, k)] * l[at(j, k)];
                }
                if i == j {
                    if !(s > 0.0) {
                        return Err(Error::LinearSolve(format!(
                            "matrix not positive definite at pivot {i} (value {s:e})"
                        )));
                    }
                    l[at(i, i)] = s.sqrt();
                } else {
                    l[at(i, j)] = s / l[at(j, j)];
                }
            }
        }
        Ok(Self { n, bw, l })
    }

    #[allow(clippy::needless_range_loop)]
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let stride = self.bw + 1;
        let at = |i: usize, j: usize| i * stride + (j + self.bw - i);
        let mut y = b.to_vec();
        for i in 0..self.n {
            let lo = i.saturating_sub(self.bw);
            let mut s = y[i];
            for k in lo..i {
                s -= self.l[at(i, k)] * y[k];
            }
            y[i] = s / self.l[at(i, i)];
        }
        for i in (0..self.n).rev() {
            let hi = (i + self.bw).min(self.n - 1);
            let mut s = y[i];
            for k in i + 1..=hi {
                s -= self.l[at(k, i)] * y[k];
            }
            y[i] = s / self.l[at(i, i)];
        }
        y
    }
}
