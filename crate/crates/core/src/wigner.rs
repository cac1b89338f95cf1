// Copyright 2026 The qtransport Authors
// SPDX-License-Identifier: Apache-2.0

//! Discrete Wigner–Weyl transform.
//!
//! For ρ(a, b) = Σᵢ wᵢ ψᵢ(x_a) ψᵢ*(x_b) the field is sampled at the
//! phase-space positions X_s = x_min + s·dx/2 and computed as
//!
//! ```text
//! F(X_s, k) = (dx/π) Σ_m ρ((s+m)/2, (s−m)/2) e^{−ik·m·dx},   m ≡ s (mod 2)
//! ```
//!
//! i.e. F = (1/2π) Σ ρ(X + x′/2, X − x′/2) e^{−ikx′} Δx′ with the relative
//! offset x′ = m·dx on its natural step Δx′ = 2dx. Offsets leaving the box
//! contribute zero. Even rows s = 2j sit on grid nodes; odd rows sit on cell
//! midpoints. The sum is 2π/(2dx)-periodic in k, which is why fields use the
//! [`wigner_momentum_grid`] (dk = π/(n·dx)); on it the transform is exactly
//! invertible and the node-row marginal Σ_k F·dk equals ρ(x_j, x_j).
//!
//! k is a wave vector in nm⁻¹ and ħ does not appear: Q(x) = ∫F dk.

use std::f64::consts::PI;
use std::sync::Arc;

use ndarray::{Array1, Array2, ArrayView1};
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::grid::{wigner_momentum_grid, MomentumGrid, SpatialGrid};
use crate::state::{ChargeDensity, PureState, SignedEnsemble};

/// Convention tag written alongside every emitted field.
pub const CONVENTION: &str =
    "k=wavevector[1/nm];F=(1/2pi)sum rho(X+x'/2,X-x'/2)exp(-ikx')dx';Q=sum_k F dk";

/// Which phase-space rows a [`WignerField`] holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WignerLattice {
    /// One row per grid node, X = x_j.
    Nodes,
    /// Rows at every half step, X = x_min + s·dx/2 for s = 0..2n−2. Needed
    /// for the inverse transform.
    HalfStep,
}

/// Real field F(X, k) on a phase-space lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct WignerField {
    grid: SpatialGrid,
    kgrid: MomentumGrid,
    lattice: WignerLattice,
    // rows × kgrid.n_points(), row-major.
    values: Array2<f64>,
    imaginary_residue: f64,
}

impl WignerField {
    /// Wraps externally produced values (for instance a field read back from
    /// disk). `values` must have one row per lattice row and one column per
    /// k node.
    pub fn from_parts(
        grid: SpatialGrid,
        kgrid: MomentumGrid,
        lattice: WignerLattice,
        values: Array2<f64>,
    ) -> Result<Self> {
        let rows = lattice_rows(&grid, lattice);
        if values.dim() != (rows, kgrid.n_points()) {
            return Err(Error::Shape(format!(
                "Wigner values {:?} do not match lattice {rows} × {}",
                values.dim(),
                kgrid.n_points()
            )));
        }
        Ok(Self {
            grid,
            kgrid,
            lattice,
            values,
            imaginary_residue: 0.0,
        })
    }

    pub fn grid(&self) -> &SpatialGrid {
        &self.grid
    }

    pub fn kgrid(&self) -> &MomentumGrid {
        &self.kgrid
    }

    pub fn lattice(&self) -> WignerLattice {
        self.lattice
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn convention(&self) -> &'static str {
        CONVENTION
    }

    /// Largest |Im| dropped when the field was computed.
    pub fn imaginary_residue(&self) -> f64 {
        self.imaginary_residue
    }

    /// Phase-space position of row `r`.
    pub fn row_position(&self, r: usize) -> f64 {
        match self.lattice {
            WignerLattice::Nodes => self.grid.x(r),
            WignerLattice::HalfStep => self.grid.x_min() + 0.5 * r as f64 * self.grid.dx(),
        }
    }

    /// Row at grid node `j`.
    pub fn node_row(&self, j: usize) -> ArrayView1<'_, f64> {
        match self.lattice {
            WignerLattice::Nodes => self.values.row(j),
            WignerLattice::HalfStep => self.values.row(2 * j),
        }
    }

    /// Smallest value and its (X, k).
    pub fn min(&self) -> (f64, f64, f64) {
        let mut best = (0, 0, f64::INFINITY);
        for ((r, l), &v) in self.values.indexed_iter() {
            if v < best.2 {
                best = (r, l, v);
            }
        }
        (self.row_position(best.0), self.kgrid.k(best.1), best.2)
    }
}

fn lattice_rows(grid: &SpatialGrid, lattice: WignerLattice) -> usize {
    match lattice {
        WignerLattice::Nodes => grid.n_points(),
        WignerLattice::HalfStep => 2 * grid.n_points() - 1,
    }
}

/// Dense ρ(a, b) on grid nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrixGrid {
    grid: SpatialGrid,
    values: Array2<Complex64>,
}

impl DensityMatrixGrid {
    pub fn from_values(grid: SpatialGrid, values: Array2<Complex64>) -> Result<Self> {
        let n = grid.n_points();
        if values.dim() != (n, n) {
            return Err(Error::Shape(format!(
                "density matrix {:?} on a {n}-point grid",
                values.dim()
            )));
        }
        Ok(Self { grid, values })
    }

    /// ρ(a, b) = Σᵢ wᵢ ψᵢ(x_a) ψᵢ*(x_b), accumulated in term order.
    pub fn from_ensemble(e: &SignedEnsemble) -> Self {
        let grid = *e.grid();
        let n = grid.n_points();
        let mut values = Array2::<Complex64>::zeros((n, n));
        for t in e.terms() {
            let psi = t.state.amplitudes();
            for ((a, b), v) in values.indexed_iter_mut() {
                *v += t.weight * psi[a] * psi[b].conj();
            }
        }
        Self { grid, values }
    }

    pub fn grid(&self) -> &SpatialGrid {
        &self.grid
    }

    pub fn values(&self) -> &Array2<Complex64> {
        &self.values
    }

    /// Σⱼ ρ(x_j, x_j)·dx.
    pub fn trace(&self) -> f64 {
        self.values.diag().iter().map(|z| z.re).sum::<f64>() * self.grid.dx()
    }

    /// max |ρ(a, b) − ρ*(b, a)|.
    pub fn hermiticity_residual(&self) -> f64 {
        let n = self.grid.n_points();
        let mut worst = 0.0f64;
        for a in 0..n {
            for b in a..n {
                worst = worst.max((self.values[[a, b]] - self.values[[b, a]].conj()).norm());
            }
        }
        worst
    }

    /// Real part of the diagonal as a charge density.
    pub fn diagonal(&self) -> ChargeDensity {
        ChargeDensity::new(self.grid, self.values.diag().mapv(|z| z.re)).expect("square matrix")
    }
}

fn ensure_wigner_grid(grid: &SpatialGrid, kg: &MomentumGrid) -> Result<()> {
    let expected = wigner_momentum_grid(grid);
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * b.abs().max(1e-300);
    if kg.n_points() != expected.n_points()
        || !close(kg.dk(), expected.dk())
        || !close(kg.k_min(), expected.k_min())
    {
        return Err(Error::Shape(format!(
            "momentum grid (k_min {}, dk {}, n {}) is not the Wigner grid of the spatial grid (k_min {}, dk {}, n {})",
            kg.k_min(),
            kg.dk(),
            kg.n_points(),
            expected.k_min(),
            expected.dk(),
            expected.n_points()
        )));
    }
    Ok(())
}

// Shared per-grid tables for the row transforms.
struct RowKernel {
    n: usize,
    dx: f64,
    kgrid: MomentumGrid,
    fft: Arc<dyn Fft<f64>>,
    ifft: Arc<dyn Fft<f64>>,
    // e^{2πi r/n}
    roots: Vec<Complex64>,
    // e^{−i k_l dx}, the extra phase of odd rows.
    odd_phase: Vec<Complex64>,
}

impl RowKernel {
    fn new(grid: &SpatialGrid) -> Self {
        let n = grid.n_points();
        let mut planner = FftPlanner::new();
        let kgrid = wigner_momentum_grid(grid);
        Self {
            n,
            dx: grid.dx(),
            kgrid,
            fft: planner.plan_fft_forward(n),
            ifft: planner.plan_fft_inverse(n),
            roots: (0..n)
                .map(|r| Complex64::from_polar(1.0, 2.0 * PI * r as f64 / n as f64))
                .collect(),
            odd_phase: (0..n)
                .map(|l| {
                    let offset = l as i64 - (n / 2) as i64;
                    Complex64::from_polar(1.0, -PI * offset as f64 / n as f64)
                })
                .collect(),
        }
    }

    // e^{−2i q dx k_min} = e^{2πi q·(n/2)/n}, from an exact integer residue.
    fn shift(&self, q: i64) -> Complex64 {
        let r = (q * (self.n / 2) as i64).rem_euclid(self.n as i64) as usize;
        self.roots[r]
    }

    // Offsets q (m = 2q + p) that keep both (s+m)/2 and (s−m)/2 in the box.
    fn q_range(&self, s: usize) -> (usize, usize, std::ops::RangeInclusive<i64>) {
        let p = s % 2;
        let a0 = ((s + p) / 2) as i64;
        let b0 = ((s - p) / 2) as i64;
        let last = self.n as i64 - 1;
        (
            a0 as usize,
            b0 as usize,
            (-a0).max(b0 - last)..=(last - a0).min(b0),
        )
    }

    /// Row s of the forward transform. Returns the largest discarded |Im|.
    fn forward_row(
        &self,
        s: usize,
        rho: &dyn Fn(usize, usize) -> Complex64,
        buf: &mut [Complex64],
        out: &mut [f64],
    ) -> f64 {
        buf.fill(Complex64::new(0.0, 0.0));
        let (a0, b0, qs) = self.q_range(s);
        for q in qs {
            let a = (a0 as i64 + q) as usize;
            let b = (b0 as i64 - q) as usize;
            buf[q.rem_euclid(self.n as i64) as usize] += rho(a, b) * self.shift(q);
        }
        self.fft.process(buf);
        let scale = self.dx / PI;
        let mut residue = 0.0f64;
        for l in 0..self.n {
            let z = if s % 2 == 1 {
                buf[l] * self.odd_phase[l]
            } else {
                buf[l]
            };
            out[l] = scale * z.re;
            residue = residue.max((scale * z.im).abs());
        }
        residue
    }
}

fn ensemble_rho(e: &SignedEnsemble) -> impl Fn(usize, usize) -> Complex64 + Sync + '_ {
    let amps: Vec<(f64, &Array1<Complex64>)> = e
        .terms()
        .iter()
        .map(|t| (t.weight, t.state.amplitudes()))
        .collect();
    move |a, b| {
        let mut acc = Complex64::new(0.0, 0.0);
        for (w, psi) in &amps {
            acc += *w * psi[a] * psi[b].conj();
        }
        acc
    }
}

fn forward(
    grid: &SpatialGrid,
    kg: &MomentumGrid,
    lattice: WignerLattice,
    rho: &(dyn Fn(usize, usize) -> Complex64 + Sync),
) -> Result<WignerField> {
    ensure_wigner_grid(grid, kg)?;
    let kernel = RowKernel::new(grid);
    let n = grid.n_points();
    let rows = lattice_rows(grid, lattice);
    let mut values = vec![0.0; rows * n];
    let residue = values
        .par_chunks_mut(n)
        .enumerate()
        .map_init(
            || vec![Complex64::new(0.0, 0.0); n],
            |buf, (r, out)| {
                let s = match lattice {
                    WignerLattice::Nodes => 2 * r,
                    WignerLattice::HalfStep => r,
                };
                kernel.forward_row(s, rho, buf, out)
            },
        )
        .reduce(|| 0.0, f64::max);
    Ok(WignerField {
        grid: *grid,
        kgrid: kernel.kgrid,
        lattice,
        values: Array2::from_shape_vec((rows, n), values).expect("row-major buffer"),
        imaginary_residue: residue,
    })
}

/// Wigner field of |ψ⟩⟨ψ| on node rows.
pub fn wigner_from_state(psi: &PureState, kg: &MomentumGrid) -> Result<WignerField> {
    wigner_from_ensemble(&SignedEnsemble::pure(psi.clone()), kg)
}

/// Wigner field of Σᵢ wᵢ|ψᵢ⟩⟨ψᵢ| on node rows.
pub fn wigner_from_ensemble(e: &SignedEnsemble, kg: &MomentumGrid) -> Result<WignerField> {
    forward(e.grid(), kg, WignerLattice::Nodes, &ensemble_rho(e))
}

/// Wigner field of an ensemble on the half-step lattice.
pub fn wigner_from_ensemble_full(e: &SignedEnsemble, kg: &MomentumGrid) -> Result<WignerField> {
    forward(e.grid(), kg, WignerLattice::HalfStep, &ensemble_rho(e))
}

/// Wigner field of an explicit density matrix on the half-step lattice.
pub fn wigner_from_density_matrix(
    rho: &DensityMatrixGrid,
    kg: &MomentumGrid,
) -> Result<WignerField> {
    let v = &rho.values;
    forward(&rho.grid, kg, WignerLattice::HalfStep, &|a, b| v[[a, b]])
}

/// Inverse transform ρ(a, b) = Σ_k F((x_a + x_b)/2, k)·e^{ik(x_a − x_b)}·dk.
///
/// Needs a half-step field: node rows alone only determine ρ(a, b) for
/// even a + b.
pub fn density_matrix_from_wigner(f: &WignerField) -> Result<DensityMatrixGrid> {
    if f.lattice != WignerLattice::HalfStep {
        return Err(Error::Precondition(
            "inverse Wigner transform needs the half-step lattice".into(),
        ));
    }
    ensure_wigner_grid(&f.grid, &f.kgrid)?;
    let kernel = RowKernel::new(&f.grid);
    let n = f.grid.n_points();
    let dk = f.kgrid.dk();
    let rows: Vec<(usize, Vec<Complex64>)> = (0..2 * n - 1)
        .into_par_iter()
        .map(|s| {
            let mut buf: Vec<Complex64> = f
                .values
                .row(s)
                .iter()
                .enumerate()
                .map(|(l, &v)| {
                    if s % 2 == 1 {
                        v * kernel.odd_phase[l].conj()
                    } else {
                        Complex64::new(v, 0.0)
                    }
                })
                .collect();
            kernel.ifft.process(&mut buf);
            (s, buf)
        })
        .collect();
    let mut values = Array2::<Complex64>::zeros((n, n));
    for (s, buf) in rows {
        let (a0, b0, qs) = kernel.q_range(s);
        for q in qs {
            let a = (a0 as i64 + q) as usize;
            let b = (b0 as i64 - q) as usize;
            values[[a, b]] = dk * kernel.shift(q).conj() * buf[q.rem_euclid(n as i64) as usize];
        }
    }
    Ok(DensityMatrixGrid {
        grid: f.grid,
        values,
    })
}

/// Q(x_j) = Σ_k F(x_j, k)·dk on the node rows.
pub fn marginal_position(f: &WignerField) -> ChargeDensity {
    let dk = f.kgrid.dk();
    let values =
        Array1::from_iter((0..f.grid.n_points()).map(|j| f.node_row(j).iter().sum::<f64>() * dk));
    ChargeDensity::new(f.grid, values).expect("one row per node")
}

/// P(k) = Σ_X F(X, k)·ΔX with ΔX = dx on node rows and dx/2 on the
/// half-step lattice. On the half-step lattice P(k) = |φ(k)|² exactly, with
/// φ(k) = (dx/√2π) Σⱼ ψ(x_j) e^{−ikx_j}.
pub fn marginal_momentum(f: &WignerField) -> Array1<f64> {
    let step = match f.lattice {
        WignerLattice::Nodes => f.grid.dx(),
        WignerLattice::HalfStep => 0.5 * f.grid.dx(),
    };
    let mut p = Array1::<f64>::zeros(f.kgrid.n_points());
    for row in f.values.rows() {
        p.zip_mut_with(&row, |acc, v| *acc += v);
    }
    p.mapv_inplace(|v| v * step);
    p
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{conjugate_momentum_grid, make_grid};
    use crate::state::{charge_density, gaussian_packet, superpose, EnsembleTerm};
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    // Direct double sum over the offset lattice, one (X, k) sample at a time.
    fn brute_force(rho: &Array2<Complex64>, grid: &SpatialGrid, s: usize, k: f64) -> f64 {
        let n = grid.n_points() as i64;
        let dx = grid.dx();
        let mut acc = Complex64::new(0.0, 0.0);
        for m in -(2 * n)..=(2 * n) {
            if (s as i64 + m).rem_euclid(2) != 0 {
                continue;
            }
            let a = (s as i64 + m) / 2;
            let b = (s as i64 - m) / 2;
            if a < 0 || b < 0 || a >= n || b >= n {
                continue;
            }
            acc += rho[[a as usize, b as usize]] * Complex64::from_polar(1.0, -k * m as f64 * dx);
        }
        acc.re * dx / PI
    }

    fn random_ensemble(rng: &mut ChaCha8Rng, grid: SpatialGrid, rank: usize) -> SignedEnsemble {
        let terms = (0..rank)
            .map(|_| {
                let amps = Array1::from_iter((0..grid.n_points()).map(|_| {
                    Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
                }));
                EnsembleTerm {
                    weight: rng.random_range(-1.0..1.5),
                    state: PureState::normalized(grid, amps).unwrap(),
                }
            })
            .collect();
        SignedEnsemble::new(terms, 1).unwrap()
    }

    #[test]
    fn forward_matches_brute_force_and_inverts() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in [64usize, 63] {
            let grid = make_grid(-3.0, 9.6, n).unwrap();
            let kg = wigner_momentum_grid(&grid);
            for rank in 1..=3 {
                let e = random_ensemble(&mut rng, grid, rank);
                let rho = DensityMatrixGrid::from_ensemble(&e);
                let f = wigner_from_ensemble_full(&e, &kg).unwrap();
                assert!(f.imaginary_residue() < 1e-12);
                for s in 0..2 * n - 1 {
                    for l in 0..n {
                        let want = brute_force(rho.values(), &grid, s, kg.k(l));
                        assert!(
                            (f.values()[[s, l]] - want).abs() < 1e-10,
                            "n {n} s {s} l {l}"
                        );
                    }
                }
                let back = density_matrix_from_wigner(&f).unwrap();
                let err = (back.values() - rho.values())
                    .mapv(|z| z.norm())
                    .fold(0.0f64, |a, &b| a.max(b));
                assert!(err < 1e-10, "roundtrip error {err}");
                let g = wigner_from_density_matrix(&rho, &kg).unwrap();
                assert_eq!(g.values(), f.values());
            }
        }
    }

    #[test]
    fn node_rows_are_even_half_step_rows() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let grid = make_grid(0.0, 10.0, 40).unwrap();
        let kg = wigner_momentum_grid(&grid);
        let e = random_ensemble(&mut rng, grid, 2);
        let nodes = wigner_from_ensemble(&e, &kg).unwrap();
        let full = wigner_from_ensemble_full(&e, &kg).unwrap();
        for j in 0..40 {
            assert_eq!(nodes.node_row(j), full.node_row(j));
            assert_eq!(nodes.row_position(j), full.row_position(2 * j));
        }
    }

    #[test]
    fn pure_state_recovers_rank_one_matrix() {
        let grid = make_grid(0.0, 30.0, 64).unwrap();
        let psi = gaussian_packet(&grid, 14.0, 1.1, 3.0).unwrap();
        let f = wigner_from_ensemble_full(
            &SignedEnsemble::pure(psi.clone()),
            &wigner_momentum_grid(&grid),
        )
        .unwrap();
        let rho = density_matrix_from_wigner(&f).unwrap();
        let a = psi.amplitudes();
        for ((i, j), v) in rho.values().indexed_iter() {
            assert!((v - a[i] * a[j].conj()).norm() < 1e-8);
        }
        assert!(rho.hermiticity_residual() < 1e-10);
        assert_abs_diff_eq!(rho.trace(), 1.0, epsilon = 1e-8);
        let diag = rho.diagonal();
        let q = marginal_position(&f);
        for j in 0..64 {
            assert!((diag.values()[j] - q.values()[j]).abs() < 1e-10);
        }
    }

    #[test]
    fn inverse_needs_half_step_lattice() {
        let grid = make_grid(0.0, 30.0, 32).unwrap();
        let psi = gaussian_packet(&grid, 14.0, 0.0, 3.0).unwrap();
        let f = wigner_from_state(&psi, &wigner_momentum_grid(&grid)).unwrap();
        assert!(matches!(
            density_matrix_from_wigner(&f),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn non_wigner_momentum_grid_is_rejected() {
        let grid = make_grid(0.0, 30.0, 32).unwrap();
        let psi = gaussian_packet(&grid, 14.0, 0.0, 3.0).unwrap();
        let other = make_grid(0.0, 60.0, 32).unwrap();
        assert!(matches!(
            wigner_from_state(&psi, &conjugate_momentum_grid(&grid)),
            Err(Error::Shape(_))
        ));
        assert!(matches!(
            wigner_from_state(&psi, &wigner_momentum_grid(&other)),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn gaussian_at_rest_is_nonnegative() {
        let grid = make_grid(0.0, 120.0, 600).unwrap();
        let psi = gaussian_packet(&grid, 60.0, 0.0, 10.0).unwrap();
        let f = wigner_from_state(&psi, &wigner_momentum_grid(&grid)).unwrap();
        assert!(f.min().2 >= -1e-10, "min {:?}", f.min());
    }

    #[test]
    fn marginal_position_is_density() {
        let grid = make_grid(0.0, 600.0, 3000).unwrap();
        let parts: Vec<_> = [250.0, 280.0, 310.0]
            .iter()
            .map(|&x0| gaussian_packet(&grid, x0, 0.69, 15.0).unwrap())
            .collect();
        let psi_b = superpose(&parts, &[Complex64::new(1.0, 0.0); 3]).unwrap();
        let f = wigner_from_state(&psi_b, &wigner_momentum_grid(&grid)).unwrap();
        let q = marginal_position(&f);
        let direct = psi_b.density();
        for j in 0..3000 {
            assert!((q.values()[j] - direct[j]).abs() < 1e-10);
        }
        // Interference between neighbouring packets shows up as negative fringes.
        let (x, _, v) = f.min();
        assert!(v < -1e-3, "min {v}");
        assert!(x > 250.0 && x < 310.0, "fringe at {x}");
    }

    #[test]
    fn momentum_marginal_peaks_at_k0() {
        let grid = make_grid(0.0, 300.0, 1200).unwrap();
        let kg = wigner_momentum_grid(&grid);
        let psi = gaussian_packet(&grid, 150.0, 0.69, 15.0).unwrap();
        let e = SignedEnsemble::pure(psi.clone());
        for f in [
            wigner_from_ensemble(&e, &kg).unwrap(),
            wigner_from_ensemble_full(&e, &kg).unwrap(),
        ] {
            let p = marginal_momentum(&f);
            let peak = p
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.total_cmp(b.1))
                .unwrap()
                .0;
            assert_abs_diff_eq!(kg.k(peak), 0.69, epsilon = kg.dk());
            assert_abs_diff_eq!(p.sum() * kg.dk(), 1.0, epsilon = 1e-8);
        }
        // Half-step marginal against the direct Fourier sum.
        let full = wigner_from_ensemble_full(&e, &kg).unwrap();
        let p = marginal_momentum(&full);
        for l in (0..1200).step_by(37) {
            let k = kg.k(l);
            let phi: Complex64 = grid
                .nodes()
                .zip(psi.amplitudes().iter())
                .map(|(x, z)| z * Complex64::from_polar(1.0, -k * x))
                .sum::<Complex64>()
                * grid.dx()
                / (2.0 * PI).sqrt();
            assert!((p[l] - phi.norm_sqr()).abs() < 1e-10);
        }
    }

    #[test]
    fn symmetric_state_gives_mirror_symmetric_field() {
        let grid = make_grid(0.0, 100.0, 401).unwrap();
        let c = 50.0;
        let amps = Array1::from_iter(grid.nodes().map(|x| {
            let u = x - c;
            Complex64::new((-(u * u) / 40.0).exp() * (1.0 + 0.3 * (0.5 * u).cos()), 0.0)
        }));
        let psi = PureState::normalized(grid, amps).unwrap();
        let f = wigner_from_state(&psi, &wigner_momentum_grid(&grid)).unwrap();
        let jc = grid.nearest_index(c);
        for u in 0..=jc {
            for l in 0..401 {
                assert!((f.node_row(jc + u)[l] - f.node_row(jc - u)[l]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn linear_over_concatenation_and_cancellation() {
        let grid = make_grid(0.0, 60.0, 128).unwrap();
        let kg = wigner_momentum_grid(&grid);
        let psi = gaussian_packet(&grid, 20.0, 0.8, 4.0).unwrap();
        let phi = gaussian_packet(&grid, 35.0, -0.5, 6.0).unwrap();
        let a = SignedEnsemble::from_pairs([(0.7, psi.clone())], 1).unwrap();
        let b = SignedEnsemble::from_pairs([(0.3, phi.clone())], 1).unwrap();
        let both = wigner_from_ensemble(&a.concat(&b).unwrap(), &kg).unwrap();
        let sum = wigner_from_ensemble(&a, &kg).unwrap().values()
            + wigner_from_ensemble(&b, &kg).unwrap().values();
        assert!((both.values() - &sum).iter().all(|d| d.abs() < 1e-12));

        let cancel =
            SignedEnsemble::from_pairs([(1.0, psi.clone()), (-1.0, psi), (1.0, phi.clone())], 1)
                .unwrap();
        assert_eq!(
            wigner_from_ensemble(&cancel, &kg).unwrap().values(),
            wigner_from_state(&phi, &kg).unwrap().values()
        );
        assert_eq!(
            charge_density(&cancel).values(),
            charge_density(&SignedEnsemble::pure(phi)).values()
        );
    }

    #[test]
    fn from_parts_checks_shape() {
        let grid = make_grid(0.0, 10.0, 8).unwrap();
        let kg = wigner_momentum_grid(&grid);
        assert!(
            WignerField::from_parts(grid, kg, WignerLattice::Nodes, Array2::zeros((8, 8))).is_ok()
        );
        assert!(
            WignerField::from_parts(grid, kg, WignerLattice::HalfStep, Array2::zeros((8, 8)))
                .is_err()
        );
    }
}
