// Copyright 2026 The qtransport Authors
// SPDX-License-Identifier: Apache-2.0

//! LU factorization of complex banded matrices without pivoting.
//!
//! Only used for Cayley-form propagators 1 + i·a·H with H real symmetric,
//! whose Hermitian part is the identity; elimination without pivoting is
//! stable for that class.

#![allow(clippy::needless_range_loop)]

use num_complex::Complex64;

#[derive(Debug, Clone)]
pub(crate) struct BandedLu {
    n: usize,
    half_bandwidth: usize,
    // Row-major band storage: entry (i, j) lives at i·w + (j + p − i).
    lu: Vec<Complex64>,
}

impl BandedLu {
    /// Factorizes the n×n matrix with entries `entry(i, j)` for |i − j| ≤ p.
    /// Returns `None` on a zero pivot.
    pub(crate) fn factor(
        n: usize,
        half_bandwidth: usize,
        entry: impl Fn(usize, usize) -> Complex64,
    ) -> Option<Self> {
        let p = half_bandwidth;
        let w = 2 * p + 1;
        let mut lu = vec![Complex64::new(0.0, 0.0); n * w];
        for i in 0..n {
            for j in i.saturating_sub(p)..(i + p + 1).min(n) {
                lu[i * w + j + p - i] = entry(i, j);
            }
        }
        for k in 0..n {
            let pivot = lu[k * w + p];
            if pivot.norm_sqr() == 0.0 {
                return None;
            }
            for i in k + 1..(k + p + 1).min(n) {
                let l = lu[i * w + k + p - i] / pivot;
                lu[i * w + k + p - i] = l;
                for j in k + 1..(k + p + 1).min(n) {
                    let ukj = lu[k * w + j + p - k];
                    lu[i * w + j + p - i] -= l * ukj;
                }
            }
        }
        Some(Self {
            n,
            half_bandwidth: p,
            lu,
        })
    }

    /// Solves A·x = b in place.
    pub(crate) fn solve_in_place(&self, b: &mut [Complex64]) {
        debug_assert_eq!(b.len(), self.n);
        let p = self.half_bandwidth;
        let w = 2 * p + 1;
        for i in 0..self.n {
            let mut acc = b[i];
            for j in i.saturating_sub(p)..i {
                acc -= self.lu[i * w + j + p - i] * b[j];
            }
            b[i] = acc;
        }
        for i in (0..self.n).rev() {
            let mut acc = b[i];
            for j in i + 1..(i + p + 1).min(self.n) {
                acc -= self.lu[i * w + j + p - i] * b[j];
            }
            b[i] = acc / self.lu[i * w + p];
        }
    }
}
