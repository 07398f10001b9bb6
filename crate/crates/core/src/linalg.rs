//! Banded LU factorization with partial pivoting.
//!
//! Storage follows the LAPACK `gbtrf` layout: column `j` holds rows
//! `j - kl - ku ..= j + kl`, the extra `kl` super-diagonals receiving the
//! fill-in produced by row interchanges.

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    ldab: usize,
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let ldab = 2 * kl + ku + 1;
        BandMatrix {
            n,
            kl,
            ku,
            ldab,
            data: vec![0.0; ldab * n],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(i + self.kl + self.ku >= j && i <= j + self.kl);
        j * self.ldab + self.kl + self.ku + i - j
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i + self.ku < j || i > j + self.kl {
            0.0
        } else {
            self.data[self.idx(i, j)]
        }
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        assert!(
            i + self.ku >= j && i <= j + self.kl,
            "entry ({i}, {j}) outside the band"
        );
        let k = self.idx(i, j);
        self.data[k] = v;
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let k = self.idx(i, j);
        self.data[k] += v;
    }

    /// `y = A x` (before factorization).
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for (j, xj) in x.iter().enumerate() {
            let lo = j.saturating_sub(self.ku);
            let hi = (j + self.kl).min(self.n - 1);
            for (i, yi) in y.iter_mut().enumerate().take(hi + 1).skip(lo) {
                *yi += self.data[self.idx(i, j)] * xj;
            }
        }
        y
    }

    /// Factorizes in place. Fails only on an exactly zero pivot column.
    pub fn factorize(mut self) -> Result<BandLu> {
        let n = self.n;
        let kl = self.kl;
        let kv = self.kl + self.ku;
        let mut ipiv = vec![0usize; n];
        let mut ju = 0usize;
        let mut min_pivot = f64::INFINITY;
        let mut max_pivot: f64 = 0.0;
        for j in 0..n {
            let km = kl.min(n - 1 - j);
            let mut p = 0;
            let mut best = self.data[self.idx(j, j)].abs();
            for i in 1..=km {
                let v = self.data[self.idx(j + i, j)].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            ipiv[j] = j + p;
            if best == 0.0 || !best.is_finite() {
                return Err(Error::SingularJacobian);
            }
            min_pivot = min_pivot.min(best);
            max_pivot = max_pivot.max(best);
            ju = ju.max((j + self.ku + p).min(n - 1));
            if p != 0 {
                for c in j..=ju {
                    let a = self.idx(j, c);
                    let b = self.idx(j + p, c);
                    self.data.swap(a, b);
                }
            }
            let piv = self.data[self.idx(j, j)];
            for i in 1..=km {
                let k = self.idx(j + i, j);
                self.data[k] /= piv;
            }
            for c in j + 1..=ju {
                let ujc = self.data[self.idx(j, c)];
                if ujc == 0.0 {
                    continue;
                }
                for i in 1..=km {
                    let l = self.data[self.idx(j + i, j)];
                    let k = self.idx(j + i, c);
                    self.data[k] -= l * ujc;
                }
            }
        }
        debug_assert!(kv == self.kl + self.ku);
        Ok(BandLu {
            a: self,
            ipiv,
            pivot_ratio: min_pivot / max_pivot,
        })
    }
}

#[derive(Debug, Clone)]
pub struct BandLu {
    a: BandMatrix,
    ipiv: Vec<usize>,
    pivot_ratio: f64,
}

impl BandLu {
    /// Smallest over largest pivot magnitude; a crude conditioning indicator.
    pub fn pivot_ratio(&self) -> f64 {
        self.pivot_ratio
    }

    pub fn solve_in_place(&self, b: &mut [f64]) {
        let a = &self.a;
        let n = a.n;
        let kv = a.kl + a.ku;
        for j in 0..n {
            let p = self.ipiv[j];
            if p != j {
                b.swap(j, p);
            }
            let km = a.kl.min(n - 1 - j);
            let bj = b[j];
            if bj != 0.0 {
                for i in 1..=km {
                    b[j + i] -= a.data[a.idx(j + i, j)] * bj;
                }
            }
        }
        for j in (0..n).rev() {
            b[j] /= a.data[a.idx(j, j)];
            let bj = b[j];
            if bj != 0.0 {
                for i in j.saturating_sub(kv)..j {
                    b[i] -= a.data[a.idx(i, j)] * bj;
                }
            }
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}
