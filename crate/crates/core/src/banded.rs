//! Banded LU with partial pivoting, in the column-major band layout used by
//! LAPACK `gbtrf`: entry `(i, j)` lives at `ab[j][kl + ku + i - j]`, with `kl`
//! extra superdiagonals reserved for pivoting fill.

#![allow(clippy::needless_range_loop)]

use crate::error::{Error, Result};
use crate::{c0, C64};

#[derive(Debug, Clone)]
pub struct BandedMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    ld: usize,
    ab: Vec<C64>,
}

impl BandedMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let ld = 2 * kl + ku + 1;
        Self {
            n,
            kl,
            ku,
            ld,
            ab: vec![c0(); ld * n],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(i + self.ku + self.kl >= j && i <= j + self.kl);
        j * self.ld + self.kl + self.ku + i - j
    }

    pub fn in_band(&self, i: usize, j: usize) -> bool {
        i < self.n && j < self.n && i + self.ku >= j && i <= j + self.kl
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        if i + self.ku + self.kl >= j && i <= j + self.kl && i < self.n && j < self.n {
            self.ab[self.idx(i, j)]
        } else {
            c0()
        }
    }

    /// Sets an entry inside the declared band.
    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        assert!(self.in_band(i, j), "({i}, {j}) outside band");
        let k = self.idx(i, j);
        self.ab[k] = v;
    }

    pub fn matvec(&self, x: &[C64]) -> Vec<C64> {
        let mut y = vec![c0(); self.n];
        for j in 0..self.n {
            let lo = j.saturating_sub(self.ku);
            let hi = (j + self.kl).min(self.n - 1);
            for i in lo..=hi {
                y[i] += self.ab[self.idx(i, j)] * x[j];
            }
        }
        y
    }

    /// Factors in place; the matrix must not have been factored before.
    pub fn factor(mut self) -> Result<BandedLu> {
        let n = self.n;
        let (kl, ku) = (self.kl, self.ku);
        let mut piv = vec![0usize; n];
        for k in 0..n {
            let imax = (k + kl).min(n - 1);
            let jmax = (k + ku + kl).min(n - 1);
            let mut p = k;
            let mut best = self.ab[self.idx(k, k)].norm();
            for i in k + 1..=imax {
                let v = self.ab[self.idx(i, k)].norm();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best == 0.0 {
                return Err(Error::Solver(format!(
                    "banded matrix is singular at column {k}"
                )));
            }
            piv[k] = p;
            if p != k {
                for j in k..=jmax {
                    let (a, b) = (self.idx(k, j), self.idx(p, j));
                    self.ab.swap(a, b);
                }
            }
            let pivot = self.ab[self.idx(k, k)];
            for i in k + 1..=imax {
                let ik = self.idx(i, k);
                let l = self.ab[ik] / pivot;
                self.ab[ik] = l;
                if l == c0() {
                    continue;
                }
                for j in k + 1..=jmax {
                    let kj = self.ab[self.idx(k, j)];
                    let ij = self.idx(i, j);
                    self.ab[ij] -= l * kj;
                }
            }
        }
        Ok(BandedLu { lu: self, piv })
    }
}

#[derive(Debug, Clone)]
pub struct BandedLu {
    lu: BandedMatrix,
    piv: Vec<usize>,
}

impl BandedLu {
    pub fn solve(&self, rhs: &[C64]) -> Vec<C64> {
        let a = &self.lu;
        let n = a.n;
        let mut b = rhs.to_vec();
        for k in 0..n {
            b.swap(k, self.piv[k]);
            let imax = (k + a.kl).min(n - 1);
            for i in k + 1..=imax {
                let l = a.ab[a.idx(i, k)];
                let bk = b[k];
                b[i] -= l * bk;
            }
        }
        for k in (0..n).rev() {
            let jmax = (k + a.ku + a.kl).min(n - 1);
            let mut s = b[k];
            for j in k + 1..=jmax {
                s -= a.ab[a.idx(k, j)] * b[j];
            }
            b[k] = s / a.ab[a.idx(k, k)];
        }
        b
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, DVector};
    use rand::{RngExt, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_banded(n: usize, kl: usize, ku: usize, seed: u64) -> BandedMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut a = BandedMatrix::zeros(n, kl, ku);
        for j in 0..n {
            for i in j.saturating_sub(ku)..=(j + kl).min(n - 1) {
                a.set(
                    i,
                    j,
                    C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5),
                );
            }
        }
        a
    }

    #[test]
    fn solve_matches_dense() {
        let n = 40;
        let a = random_banded(n, 2, 2, 7);
        let dense = DMatrix::from_fn(n, n, |i, j| a.get(i, j));
        let rhs: Vec<C64> = (0..n).map(|i| C64::new(i as f64, 1.0)).collect();
        let x = a.clone().factor().unwrap().solve(&rhs);
        let expected = dense.lu().solve(&DVector::from_vec(rhs.clone())).unwrap();
        for i in 0..n {
            assert!((x[i] - expected[i]).norm() < 1e-9 * (1.0 + expected[i].norm()));
        }
        let back = a.matvec(&x);
        for i in 0..n {
            assert!((back[i] - rhs[i]).norm() < 1e-10);
        }
    }

    #[test]
    fn pivoting_handles_zero_diagonal() {
        let mut a = BandedMatrix::zeros(3, 1, 1);
        a.set(0, 1, C64::new(1.0, 0.0));
        a.set(1, 0, C64::new(1.0, 0.0));
        a.set(2, 2, C64::new(2.0, 0.0));
        let x = a.factor().unwrap().solve(&[
            C64::new(3.0, 0.0),
            C64::new(4.0, 0.0),
            C64::new(2.0, 0.0),
        ]);
        assert!((x[0] - C64::new(4.0, 0.0)).norm() < 1e-15);
        assert!((x[1] - C64::new(3.0, 0.0)).norm() < 1e-15);
        assert!((x[2] - C64::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn singular_is_reported() {
        let a = BandedMatrix::zeros(4, 1, 1);
        assert!(matches!(a.factor(), Err(Error::Solver(_))));
    }
}
