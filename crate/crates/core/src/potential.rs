// Copyright 2026 The qtransport Authors
// SPDX-License-Identifier: Apache-2.0

//! Static potential-energy profiles.

use ndarray::Array1;

use crate::error::{Error, Result};
use crate::grid::SpatialGrid;

/// Potential energy V(xⱼ) in eV.
#[derive(Debug, Clone, PartialEq)]
pub struct Potential {
    grid: SpatialGrid,
    values: Array1<f64>,
}

impl Potential {
    pub fn from_values(grid: SpatialGrid, values: Array1<f64>) -> Result<Self> {
        if values.len() != grid.n_points() {
            return Err(Error::Shape(format!(
                "{} potential values for a {}-point grid",
                values.len(),
                grid.n_points()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("potential must be finite".into()));
        }
        Ok(Self { grid, values })
    }

    pub fn grid(&self) -> &SpatialGrid {
        &self.grid
    }

    pub fn values(&self) -> &Array1<f64> {
        &self.values
    }

    /// Value at the node nearest to `x`.
    pub fn at(&self, x: f64) -> f64 {
        self.values[self.grid.nearest_index(x)]
    }

    /// Σⱼ [V(xⱼ) ≠ 0]·dx: measure of the non-zero support.
    pub fn support_length(&self) -> f64 {
        self.values.iter().filter(|&&v| v != 0.0).count() as f64 * self.grid.dx()
    }
}

/// V ≡ 0.
pub fn free_potential(g: &SpatialGrid) -> Potential {
    Potential {
        grid: *g,
        values: Array1::zeros(g.n_points()),
    }
}

/// Symmetric double barrier: two barriers of `barrier_width` and `height`
/// whose inner edges are `well_width` apart, centred on `center`.
///
/// A node belongs to a barrier when its cell centre (the node itself) lies
/// in the barrier. Membership is decided on u = |x − center| with the
/// half-open rule inner ≤ u < outer, so the profile is mirror-symmetric
/// wherever the mirror image of a node is also a node, and a lattice aligned
/// with the barrier edges gets exactly width/dx cells per barrier.
pub fn double_barrier(
    g: &SpatialGrid,
    center: f64,
    barrier_width: f64,
    height: f64,
    well_width: f64,
) -> Result<Potential> {
    if !(barrier_width > 0.0) || !(well_width >= 0.0) || !height.is_finite() || !center.is_finite()
    {
        return Err(Error::Config(format!(
            "double barrier needs positive barrier width and non-negative well width, got {barrier_width} and {well_width}"
        )));
    }
    let inner = 0.5 * well_width;
    let outer = inner + barrier_width;
    if center - outer < g.x_min() || center + outer > g.x_max() {
        return Err(Error::Config(format!(
            "double barrier [{}, {}] nm does not fit in the box [{}, {}] nm",
            center - outer,
            center + outer,
            g.x_min(),
            g.x_max()
        )));
    }
    let slack = 1e-9 * g.dx();
    let values = Array1::from_iter(g.nodes().map(|x| {
        let u = (x - center).abs();
        if u >= inner - slack && u < outer - slack {
            height
        } else {
            0.0
        }
    }));
    Ok(Potential { grid: *g, values })
}
