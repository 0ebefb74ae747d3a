//! Compressed-row symmetric matrices and Jacobi-preconditioned CG.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Build the pattern from per-row column lists (sorted and deduplicated
    /// here); values start at zero.
    pub fn from_rows(mut rows: Vec<Vec<usize>>) -> Self {
        let n = rows.len();
        let mut row_ptr = Vec::with_capacity(n + 1);
        row_ptr.push(0);
        let mut cols = Vec::new();
        for r in rows.iter_mut() {
            r.sort_unstable();
            r.dedup();
            cols.extend_from_slice(r);
            row_ptr.push(cols.len());
        }
        let values = vec![0.0; cols.len()];
        Self {
            n,
            row_ptr,
            cols,
            values,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.cols.len()
    }

    /// Storage position of entry (row, col), if it is in the pattern.
    pub fn position(&self, row: usize, col: usize) -> Option<usize> {
        let (a, b) = (self.row_ptr[row], self.row_ptr[row + 1]);
        self.cols[a..b].binary_search(&col).ok().map(|p| a + p)
    }

    pub fn clear(&mut self) {
        self.values.iter_mut().for_each(|v| *v = 0.0);
    }

    #[inline]
    pub fn add_at(&mut self, pos: usize, v: f64) {
        self.values[pos] += v;
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.position(row, col).map_or(0.0, |p| self.values[p])
    }

    pub fn row(&self, row: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let (a, b) = (self.row_ptr[row], self.row_ptr[row + 1]);
        self.cols[a..b]
            .iter()
            .copied()
            .zip(self.values[a..b].iter().copied())
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn mul_into(&self, x: &[f64], y: &mut [f64]) {
        for i in 0..self.n {
            let (a, b) = (self.row_ptr[i], self.row_ptr[i + 1]);
            let mut s = 0.0;
            for p in a..b {
                s += self.values[p] * x[self.cols[p]];
            }
            y[i] = s;
        }
    }

    /// Fix the listed rows to prescribed values by symmetric elimination.
    /// `fixed[i]` holds the prescribed value of row `i`, if any.
    pub fn eliminate(&mut self, rhs: &mut [f64], fixed: &[Option<f64>]) {
        for i in 0..self.n {
            let (a, b) = (self.row_ptr[i], self.row_ptr[i + 1]);
            if let Some(v) = fixed[i] {
                for p in a..b {
                    self.values[p] = if self.cols[p] == i { 1.0 } else { 0.0 };
                }
                rhs[i] = v;
            } else {
                for p in a..b {
                    if let Some(v) = fixed[self.cols[p]] {
                        rhs[i] -= self.values[p] * v;
                        self.values[p] = 0.0;
                    }
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgStats {
    pub iterations: usize,
    pub residual: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Solve `A x = b` starting from the incoming `x`. Stops when the residual
/// norm drops below `tol` times the initial residual (or a tiny multiple of
/// `|b|`). Fails after `10 n` iterations.
pub fn conjugate_gradient(a: &CsrMatrix, b: &[f64], x: &mut [f64], tol: f64) -> Result<CgStats> {
    let n = a.n();
    let diag = a.diagonal();
    if let Some((row, &value)) = diag.iter().enumerate().find(|(_, d)| !(**d > 0.0)) {
        return Err(Error::NotSpd { row, value });
    }
    let inv: Vec<f64> = diag.iter().map(|d| 1.0 / d).collect();
    let mut r = vec![0.0; n];
    a.mul_into(x, &mut r);
    for i in 0..n {
        r[i] = b[i] - r[i];
    }
    let r0 = dot(&r, &r).sqrt();
    let bn = dot(b, b).sqrt();
    let target = (tol * r0).max(1e-15 * bn);
    if r0 <= target || r0 == 0.0 {
        return Ok(CgStats {
            iterations: 0,
            residual: 0.0,
        });
    }
    let mut z: Vec<f64> = r.iter().zip(&inv).map(|(r, d)| r * d).collect();
    let mut p = z.clone();
    let mut q = vec![0.0; n];
    let mut rz = dot(&r, &z);
    let max_iter = 10 * n.max(1);
    for it in 1..=max_iter {
        a.mul_into(&p, &mut q);
        let pq = dot(&p, &q);
        if !(pq > 0.0) {
            return Err(Error::NotSpd { row: 0, value: pq });
        }
        let alpha = rz / pq;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * q[i];
        }
        let rn = dot(&r, &r).sqrt();
        if rn <= target {
            return Ok(CgStats {
                iterations: it,
                residual: rn / r0,
            });
        }
        for i in 0..n {
            z[i] = r[i] * inv[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::CgNotConverged {
        iterations: max_iter,
        residual: dot(&r, &r).sqrt() / r0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian(n: usize) -> CsrMatrix {
        let rows = (0..n)
            .map(|i| {
                let mut r = vec![i];
                if i > 0 {
                    r.push(i - 1);
                }
                if i + 1 < n {
                    r.push(i + 1);
                }
                r
            })
            .collect();
        let mut a = CsrMatrix::from_rows(rows);
        for i in 0..n {
            let p = a.position(i, i).unwrap();
            a.add_at(p, 2.0 + 0.1);
            if i > 0 {
                let p = a.position(i, i - 1).unwrap();
                a.add_at(p, -1.0);
            }
            if i + 1 < n {
                let p = a.position(i, i + 1).unwrap();
                a.add_at(p, -1.0);
            }
        }
        a
    }

    #[test]
    fn cg_solves_tridiagonal() {
        let a = laplacian(50);
        let xe: Vec<f64> = (0..50).map(|i| (i as f64 * 0.3).sin()).collect();
        let mut b = vec![0.0; 50];
        a.mul_into(&xe, &mut b);
        let mut x = vec![0.0; 50];
        conjugate_gradient(&a, &b, &mut x, 1e-12).unwrap();
        for (u, v) in x.iter().zip(&xe) {
            assert!((u - v).abs() < 1e-9);
        }
    }

    #[test]
    fn elimination_keeps_symmetry() {
        let mut a = laplacian(5);
        let mut b = vec![1.0; 5];
        let mut fixed = vec![None; 5];
        fixed[0] = Some(3.0);
        a.eliminate(&mut b, &fixed);
        assert_eq!(a.get(0, 1), 0.0);
        assert_eq!(a.get(1, 0), 0.0);
        assert_eq!(b[0], 3.0);
        assert_eq!(b[1], 1.0 + 3.0);
        let mut x = vec![0.0; 5];
        conjugate_gradient(&a, &b, &mut x, 1e-12).unwrap();
        assert!((x[0] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn zero_diagonal_is_rejected() {
        let a = CsrMatrix::from_rows(vec![vec![0], vec![1]]);
        let mut x = vec![0.0; 2];
        assert!(matches!(
            conjugate_gradient(&a, &[1.0, 1.0], &mut x, 1e-9),
            Err(Error::NotSpd { .. })
        ));
    }
}
