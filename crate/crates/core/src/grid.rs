// Copyright 2026 The qtransport Authors
// SPDX-License-Identifier: Apache-2.0

//! Uniform position and wave-vector grids.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Uniform 1D position grid; node `j` sits at `x_min + j·dx`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpatialGrid {
    x_min: f64,
    dx: f64,
    n_points: usize,
}

impl SpatialGrid {
    pub fn new(x_min: f64, dx: f64, n_points: usize) -> Result<Self> {
        if !(dx > 0.0) || !dx.is_finite() || !x_min.is_finite() {
            return Err(Error::Config(format!(
                "grid spacing must be positive and finite, got {dx}"
            )));
        }
        if n_points < 2 {
            return Err(Error::Config(format!(
                "grid needs at least 2 points, got {n_points}"
            )));
        }
        Ok(Self {
            x_min,
            dx,
            n_points,
        })
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x(self.n_points - 1)
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn len(&self) -> usize {
        self.n_points
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn x(&self, j: usize) -> f64 {
        self.x_min + j as f64 * self.dx
    }

    pub fn nodes(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        (0..self.n_points).map(move |j| self.x(j))
    }

    /// Length of the closed box `[x_min, x_max]`.
    pub fn span(&self) -> f64 {
        (self.n_points - 1) as f64 * self.dx
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.x_min && x <= self.x_max()
    }

    /// Index of the node closest to `x`, clamped to the box.
    pub fn nearest_index(&self, x: f64) -> usize {
        let j = ((x - self.x_min) / self.dx).round();
        j.clamp(0.0, (self.n_points - 1) as f64) as usize
    }

    /// Two grids are compatible when they describe the same nodes.
    pub fn same_as(&self, other: &SpatialGrid) -> bool {
        self == other
    }

    pub(crate) fn ensure_same(&self, other: &SpatialGrid, what: &str) -> Result<()> {
        if self.same_as(other) {
            Ok(())
        } else {
            Err(Error::Shape(format!(
                "{what}: grid ({}, {}, {}) differs from ({}, {}, {})",
                other.x_min, other.dx, other.n_points, self.x_min, self.dx, self.n_points
            )))
        }
    }
}

/// Builds the grid with `n_points` nodes spanning `[x_min, x_max]` inclusive.
pub fn make_grid(x_min: f64, x_max: f64, n_points: usize) -> Result<SpatialGrid> {
    if !(x_max > x_min) {
        return Err(Error::Config(format!(
            "grid span must be positive, got [{x_min}, {x_max}]"
        )));
    }
    if n_points < 2 {
        return Err(Error::Config(format!(
            "grid needs at least 2 points, got {n_points}"
        )));
    }
    SpatialGrid::new(x_min, (x_max - x_min) / (n_points - 1) as f64, n_points)
}

/// Zero-centred uniform wave-vector grid; node `l` sits at `k_min + l·dk`
/// with `k_min = -(n/2)·dk`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentumGrid {
    k_min: f64,
    dk: f64,
    n_points: usize,
}

impl MomentumGrid {
    fn centred(dk: f64, n_points: usize) -> Self {
        Self {
            k_min: -((n_points / 2) as f64) * dk,
            dk,
            n_points,
        }
    }

    pub fn k_min(&self) -> f64 {
        self.k_min
    }

    pub fn k_max(&self) -> f64 {
        self.k(self.n_points - 1)
    }

    pub fn dk(&self) -> f64 {
        self.dk
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    #[inline]
    pub fn k(&self, l: usize) -> f64 {
        self.k_min + l as f64 * self.dk
    }

    pub fn nodes(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        (0..self.n_points).map(move |l| self.k(l))
    }

    pub fn contains(&self, k: f64) -> bool {
        k >= self.k_min && k <= self.k_max()
    }

    pub fn nearest_index(&self, k: f64) -> usize {
        let l = ((k - self.k_min) / self.dk).round();
        l.clamp(0.0, (self.n_points - 1) as f64) as usize
    }
}

/// FFT-conjugate grid of `g`: same node count, `dk = 2π/(n·dx)`.
pub fn conjugate_momentum_grid(g: &SpatialGrid) -> MomentumGrid {
    MomentumGrid::centred(2.0 * PI / (g.n_points as f64 * g.dx), g.n_points)
}

/// Wave-vector grid on which the discrete Wigner transform of `g` is exact:
/// same node count, `dk = π/(n·dx)`.
///
/// For a fixed phase-space position the relative coordinate x′ advances in
/// steps of 2·dx, so the transform is periodic in k with period π/dx; the
/// FFT-conjugate grid would cover that period twice and alias offsets that
/// differ by n·dx.
pub fn wigner_momentum_grid(g: &SpatialGrid) -> MomentumGrid {
    MomentumGrid::centred(PI / (g.n_points as f64 * g.dx), g.n_points)
}
