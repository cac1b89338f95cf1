// Copyright 2026 The qtransport Authors
// SPDX-License-Identifier: Apache-2.0

//! Pure states, signed ensembles and the charge density they produce.
//!
//! Norms and integrals use the rectangle rule on the spatial grid,
//! ‖ψ‖² = Σⱼ |ψ(xⱼ)|²·dx, which is also the rule used to normalize
//! every constructed state.

use ndarray::Array1;
use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::grid::{conjugate_momentum_grid, MomentumGrid, SpatialGrid};

/// Construction parameters of a Gaussian packet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianMeta {
    /// Centre, nm.
    pub x0: f64,
    /// Central wave vector, nm⁻¹.
    pub k0: f64,
    /// Width parameter a₀ in exp(−(x−x₀)²/a₀²), nm.
    pub a0: f64,
}

/// A wave function sampled on a [`SpatialGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    grid: SpatialGrid,
    amplitudes: Array1<Complex64>,
    meta: Option<GaussianMeta>,
}

impl PureState {
    /// Wraps `amplitudes` and rescales them to unit norm.
    pub fn normalized(grid: SpatialGrid, amplitudes: Array1<Complex64>) -> Result<Self> {
        if amplitudes.len() != grid.n_points() {
            return Err(Error::Shape(format!(
                "{} amplitudes for a {}-point grid",
                amplitudes.len(),
                grid.n_points()
            )));
        }
        if amplitudes
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::Degenerate("non-finite amplitude".into()));
        }
        let mut state = Self {
            grid,
            amplitudes,
            meta: None,
        };
        let norm = state.norm_squared().sqrt();
        if !(norm > 0.0) {
            return Err(Error::Degenerate("state has zero norm".into()));
        }
        state.amplitudes.mapv_inplace(|z| z / norm);
        Ok(state)
    }

    /// Wraps amplitudes as they are. Used by the propagator, whose output
    /// must not be renormalized.
    pub(crate) fn from_raw(
        grid: SpatialGrid,
        amplitudes: Array1<Complex64>,
        meta: Option<GaussianMeta>,
    ) -> Self {
        debug_assert_eq!(amplitudes.len(), grid.n_points());
        Self {
            grid,
            amplitudes,
            meta,
        }
    }

    pub fn grid(&self) -> &SpatialGrid {
        &self.grid
    }

    pub fn amplitudes(&self) -> &Array1<Complex64> {
        &self.amplitudes
    }

    pub fn meta(&self) -> Option<&GaussianMeta> {
        self.meta.as_ref()
    }

    pub(crate) fn with_meta(mut self, meta: Option<GaussianMeta>) -> Self {
        self.meta = meta;
        self
    }

    pub fn norm_squared(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.grid.dx()
    }

    /// ⟨self|other⟩ on the grid.
    pub fn inner(&self, other: &PureState) -> Result<Complex64> {
        self.grid.ensure_same(&other.grid, "inner product")?;
        let s: Complex64 = self
            .amplitudes
            .iter()
            .zip(other.amplitudes.iter())
            .map(|(a, b)| a.conj() * b)
            .sum();
        Ok(s * self.grid.dx())
    }

    /// |⟨self|other⟩|.
    pub fn overlap(&self, other: &PureState) -> Result<f64> {
        Ok(self.inner(other)?.norm())
    }

    /// |ψ(xⱼ)|² at every node.
    pub fn density(&self) -> Array1<f64> {
        self.amplitudes.mapv(|z| z.norm_sqr())
    }

    pub fn mean_position(&self) -> f64 {
        let num: f64 = self
            .grid
            .nodes()
            .zip(self.amplitudes.iter())
            .map(|(x, z)| x * z.norm_sqr())
            .sum();
        let den: f64 = self.amplitudes.iter().map(|z| z.norm_sqr()).sum();
        num / den
    }

    /// Root-mean-square spread of |ψ|² about its mean, nm.
    pub fn position_spread(&self) -> f64 {
        let mean = self.mean_position();
        let num: f64 = self
            .grid
            .nodes()
            .zip(self.amplitudes.iter())
            .map(|(x, z)| (x - mean).powi(2) * z.norm_sqr())
            .sum();
        let den: f64 = self.amplitudes.iter().map(|z| z.norm_sqr()).sum();
        (num / den).sqrt()
    }

    /// |φ(k)|² on the FFT-conjugate grid, normalized so Σ|φ|²·dk = ‖ψ‖².
    pub fn momentum_distribution(&self) -> (MomentumGrid, Array1<f64>) {
        let kg = conjugate_momentum_grid(&self.grid);
        let n = self.grid.n_points();
        let mut buf: Vec<Complex64> = self.amplitudes.to_vec();
        FftPlanner::new().plan_fft_forward(n).process(&mut buf);
        // FFT bin b carries wave vector b·dk (aliased into [k_min, k_max]).
        let scale = self.grid.dx() * self.grid.dx() / (2.0 * std::f64::consts::PI);
        let half = n / 2;
        let dist = Array1::from_shape_fn(n, |l| buf[(l + n - half) % n].norm_sqr() * scale);
        (kg, dist)
    }

    /// ⟨k⟩ from the momentum distribution, nm⁻¹.
    pub fn mean_wavevector(&self) -> f64 {
        let (kg, dist) = self.momentum_distribution();
        let num: f64 = kg.nodes().zip(dist.iter()).map(|(k, p)| k * p).sum();
        num / dist.sum()
    }
}

/// Unit-norm Gaussian packet ψ(x) ∝ e^{ik₀(x−x₀)}·exp(−(x−x₀)²/a₀²).
///
/// The analytic prefactor is replaced by renormalization on the grid.
/// Packets closer than 3·a₀ to a box edge are accepted; see
/// [`packet_fits`].
pub fn gaussian_packet(g: &SpatialGrid, x0: f64, k0: f64, a0: f64) -> Result<PureState> {
    if !(a0 > 0.0) || !a0.is_finite() {
        return Err(Error::Config(format!(
            "packet width a0 must be positive, got {a0}"
        )));
    }
    if !x0.is_finite() || !k0.is_finite() {
        return Err(Error::Config(
            "packet centre and wave vector must be finite".into(),
        ));
    }
    let amplitudes = Array1::from_iter(g.nodes().map(|x| {
        let u = x - x0;
        Complex64::from_polar((-(u * u) / (a0 * a0)).exp(), k0 * u)
    }));
    Ok(PureState::normalized(*g, amplitudes)
        .map_err(|_| Error::Config(format!("packet at x0 = {x0} nm has no support on the grid")))?
        .with_meta(Some(GaussianMeta { x0, k0, a0 })))
}

/// Whether a packet centred at `x0` keeps a 3·a₀ margin from both box edges.
pub fn packet_fits(g: &SpatialGrid, x0: f64, a0: f64) -> bool {
    x0 - 3.0 * a0 >= g.x_min() && x0 + 3.0 * a0 <= g.x_max()
}

/// Normalized pointwise combination Σᵢ cᵢ ψᵢ.
pub fn superpose(states: &[PureState], coefficients: &[Complex64]) -> Result<PureState> {
    if states.is_empty() {
        return Err(Error::Degenerate("superposition of no states".into()));
    }
    if states.len() != coefficients.len() {
        return Err(Error::Shape(format!(
            "{} states but {} coefficients",
            states.len(),
            coefficients.len()
        )));
    }
    let grid = *states[0].grid();
    for s in &states[1..] {
        grid.ensure_same(s.grid(), "superpose")?;
    }
    let mut sum = Array1::<Complex64>::zeros(grid.n_points());
    let mut scale = 0.0;
    for (s, &c) in states.iter().zip(coefficients) {
        sum.scaled_add(c, s.amplitudes());
        scale += c.norm_sqr() * s.norm_squared();
    }
    let norm_sq = sum.iter().map(|z| z.norm_sqr()).sum::<f64>() * grid.dx();
    if !(norm_sq > 1e-24 * scale) {
        return Err(Error::Degenerate(
            "coefficients cancel the superposition".into(),
        ));
    }
    PureState::normalized(grid, sum)
}

/// One (weight, state) pair of a [`SignedEnsemble`].
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleTerm {
    pub weight: f64,
    pub state: PureState,
}

/// ρ = Σᵢ wᵢ |ψᵢ⟩⟨ψᵢ| with real, possibly negative, weights.
#[derive(Debug, Clone, PartialEq)]
pub struct SignedEnsemble {
    terms: Vec<EnsembleTerm>,
    electron_count: u32,
}

impl SignedEnsemble {
    pub fn new(terms: Vec<EnsembleTerm>, electron_count: u32) -> Result<Self> {
        let Some(first) = terms.first() else {
            return Err(Error::Degenerate("ensemble has no terms".into()));
        };
        let grid = *first.state.grid();
        for t in &terms[1..] {
            grid.ensure_same(t.state.grid(), "ensemble term")?;
        }
        if terms.iter().any(|t| !t.weight.is_finite()) {
            return Err(Error::Degenerate("non-finite ensemble weight".into()));
        }
        if electron_count == 0 {
            return Err(Error::Config("electron count must be at least 1".into()));
        }
        Ok(Self {
            terms,
            electron_count,
        })
    }

    /// Single-electron ensemble holding one pure state with weight 1.
    pub fn pure(state: PureState) -> Self {
        Self {
            terms: vec![EnsembleTerm { weight: 1.0, state }],
            electron_count: 1,
        }
    }

    pub fn from_pairs(
        pairs: impl IntoIterator<Item = (f64, PureState)>,
        electron_count: u32,
    ) -> Result<Self> {
        Self::new(
            pairs
                .into_iter()
                .map(|(weight, state)| EnsembleTerm { weight, state })
                .collect(),
            electron_count,
        )
    }

    pub fn terms(&self) -> &[EnsembleTerm] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn electron_count(&self) -> u32 {
        self.electron_count
    }

    pub fn with_electron_count(mut self, electron_count: u32) -> Result<Self> {
        if electron_count == 0 {
            return Err(Error::Config("electron count must be at least 1".into()));
        }
        self.electron_count = electron_count;
        Ok(self)
    }

    pub fn grid(&self) -> &SpatialGrid {
        self.terms[0].state.grid()
    }

    pub fn weights(&self) -> Vec<f64> {
        self.terms.iter().map(|t| t.weight).collect()
    }

    /// Σᵢ wᵢ, compensated so that a ±w pair cancels exactly.
    pub fn trace(&self) -> f64 {
        let mut sum = 0.0f64;
        let mut carry = 0.0f64;
        for t in &self.terms {
            let next = sum + t.weight;
            carry += if sum.abs() >= t.weight.abs() {
                (sum - next) + t.weight
            } else {
                (t.weight - next) + sum
            };
            sum = next;
        }
        sum + carry
    }

    pub fn all_weights_nonnegative(&self) -> bool {
        self.terms.iter().all(|t| t.weight >= 0.0)
    }

    /// Concatenation of two term lists (electron counts add).
    pub fn concat(&self, other: &SignedEnsemble) -> Result<Self> {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Self::new(terms, self.electron_count + other.electron_count)
    }

    pub(crate) fn from_parts_unchecked(terms: Vec<EnsembleTerm>, electron_count: u32) -> Self {
        Self {
            terms,
            electron_count,
        }
    }

    pub(crate) fn terms_mut(&mut self) -> &mut Vec<EnsembleTerm> {
        &mut self.terms
    }

    /// Charge centroid ∫x·Q dx / ∫Q dx.
    pub fn centroid(&self) -> f64 {
        let q = charge_density(self);
        let num: f64 = self
            .grid()
            .nodes()
            .zip(q.values().iter())
            .map(|(x, v)| x * v)
            .sum();
        num / q.values().sum()
    }
}

/// Probability (charge) density on the spatial grid, nm⁻¹.
#[derive(Debug, Clone, PartialEq)]
pub struct ChargeDensity {
    grid: SpatialGrid,
    values: Array1<f64>,
}

impl ChargeDensity {
    pub fn new(grid: SpatialGrid, values: Array1<f64>) -> Result<Self> {
        if values.len() != grid.n_points() {
            return Err(Error::Shape(format!(
                "{} density values for a {}-point grid",
                values.len(),
                grid.n_points()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn grid(&self) -> &SpatialGrid {
        &self.grid
    }

    pub fn values(&self) -> &Array1<f64> {
        &self.values
    }

    /// ∫Q dx (rectangle rule).
    pub fn integral(&self) -> f64 {
        self.values.sum() * self.grid.dx()
    }

    /// (x, Q) of the smallest value; the first node wins ties.
    pub fn min(&self) -> (f64, f64) {
        let mut best = (0, self.values[0]);
        for (j, &v) in self.values.iter().enumerate() {
            if v < best.1 {
                best = (j, v);
            }
        }
        (self.grid.x(best.0), best.1)
    }
}

/// Q(xⱼ) = Σᵢ wᵢ·|ψᵢ(xⱼ)|², accumulated in term order.
pub fn charge_density(e: &SignedEnsemble) -> ChargeDensity {
    let grid = *e.grid();
    let mut values = Array1::<f64>::zeros(grid.n_points());
    for t in e.terms() {
        values.zip_mut_with(t.state.amplitudes(), |q, z| *q += t.weight * z.norm_sqr());
    }
    ChargeDensity { grid, values }
}
