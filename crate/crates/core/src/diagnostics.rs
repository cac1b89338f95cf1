// Copyright 2026 The qtransport Authors
// SPDX-License-Identifier: Apache-2.0

//! Physicality diagnostics on charge densities.
//!
//! All integrals use the rectangle rule, matching state normalization.

use crate::error::{Error, Result};
use crate::state::{ChargeDensity, PureState};

/// Default distance from either wall inside which mass counts as leaked, nm.
pub const LEAK_MARGIN_NM: f64 = 5.0;
/// Largest leaked mass treated as negligible.
pub const LEAK_THRESHOLD: f64 = 1e-6;

/// Run of consecutive violating nodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NegativeCluster {
    pub x_start: f64,
    pub x_end: f64,
    /// Position and value of the deepest node in the run.
    pub x_min: f64,
    pub q_min: f64,
    /// Σ Q·dx over the run.
    pub integral: f64,
    pub nodes: usize,
}

/// Nodes where Q < −tolerance at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct NegativityReport {
    pub time: f64,
    pub tolerance: f64,
    /// (x, Q) sorted by x.
    pub violations: Vec<(f64, f64)>,
    pub global_min: (f64, f64),
    pub clusters: Vec<NegativeCluster>,
}

impl NegativityReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }

    /// Whether any violation lies within `radius` of `x`.
    pub fn has_violation_near(&self, x: f64, radius: f64) -> bool {
        self.violations
            .iter()
            .any(|&(xv, _)| (xv - x).abs() <= radius)
    }

    /// Number of violations within `radius` of `x`.
    pub fn violations_near(&self, x: f64, radius: f64) -> usize {
        self.violations
            .iter()
            .filter(|&&(xv, _)| (xv - x).abs() <= radius)
            .count()
    }
}

/// Lists every node with Q < −`tol`.
pub fn scan_negativity(q: &ChargeDensity, tol: f64, time: f64) -> Result<NegativityReport> {
    if !(tol >= 0.0) {
        return Err(Error::Precondition(format!(
            "negativity tolerance must be non-negative, got {tol}"
        )));
    }
    let g = q.grid();
    let dx = g.dx();
    let mut violations = Vec::new();
    let mut clusters: Vec<NegativeCluster> = Vec::new();
    let mut last: Option<usize> = None;
    for (j, &v) in q.values().iter().enumerate() {
        if v >= -tol {
            continue;
        }
        let x = g.x(j);
        violations.push((x, v));
        match (last, clusters.last_mut()) {
            (Some(prev), Some(c)) if prev + 1 == j => {
                c.x_end = x;
                c.integral += v * dx;
                c.nodes += 1;
                if v < c.q_min {
                    c.q_min = v;
                    c.x_min = x;
                }
            }
            _ => clusters.push(NegativeCluster {
                x_start: x,
                x_end: x,
                x_min: x,
                q_min: v,
                integral: v * dx,
                nodes: 1,
            }),
        }
        last = Some(j);
    }
    Ok(NegativityReport {
        time,
        tolerance: tol,
        violations,
        global_min: q.min(),
        clusters,
    })
}

/// Table-style split of ∫Q dx into positive and negative parts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormDecomposition {
    pub positive: f64,
    pub negative: f64,
    pub total: f64,
}

/// positive = ∫max(Q, 0) dx, negative = ∫min(Q, 0) dx, total = ∫Q dx.
pub fn norm_decomposition(q: &ChargeDensity) -> NormDecomposition {
    let dx = q.grid().dx();
    let mut positive = 0.0;
    let mut negative = 0.0;
    for &v in q.values() {
        if v > 0.0 {
            positive += v;
        } else {
            negative += v;
        }
    }
    NormDecomposition {
        positive: positive * dx,
        negative: negative * dx,
        total: q.integral(),
    }
}

/// (R, T) = (∫_{x<divider} Q dx, ∫_{x≥divider} Q dx).
pub fn transmission_reflection(q: &ChargeDensity, divider: f64) -> Result<(f64, f64)> {
    let g = q.grid();
    if !g.contains(divider) {
        return Err(Error::Precondition(format!(
            "divider {divider} nm outside the box [{}, {}] nm",
            g.x_min(),
            g.x_max()
        )));
    }
    let mut r = 0.0;
    let mut t = 0.0;
    for (x, &v) in g.nodes().zip(q.values()) {
        if x < divider {
            r += v;
        } else {
            t += v;
        }
    }
    Ok((r * g.dx(), t * g.dx()))
}

/// ∫Q dx over the nodes within `margin` of either wall.
pub fn boundary_leak(q: &ChargeDensity, margin: f64) -> Result<f64> {
    let g = q.grid();
    if !(margin >= 0.0) || margin >= 0.5 * g.span() {
        return Err(Error::Precondition(format!(
            "leak margin {margin} nm must be below half the box span {} nm",
            0.5 * g.span()
        )));
    }
    let (lo, hi) = (g.x_min() + margin, g.x_max() - margin);
    let sum: f64 = g
        .nodes()
        .zip(q.values())
        .filter(|(x, _)| *x < lo || *x > hi)
        .map(|(_, v)| v)
        .sum();
    Ok(sum * g.dx())
}

/// Probability of `psi` within `margin` of either wall.
pub fn boundary_leak_state(psi: &PureState, margin: f64) -> Result<f64> {
    boundary_leak(&ChargeDensity::new(*psi.grid(), psi.density())?, margin)
}
