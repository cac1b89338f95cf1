// Copyright 2026 The qtransport Authors
// SPDX-License-Identifier: Apache-2.0

//! Unitary propagation of pure states under H₀ = −(ħ²/2m*)∂²ₓ + V(x).
//!
//! The propagator is the Crank–Nicolson (Cayley) map
//! ψ ← (1 + iτH/2ħ)⁻¹(1 − iτH/2ħ)ψ on a finite-difference Hamiltonian with
//! hard walls just outside the box. The map is unitary for any τ, so every
//! step preserves the grid norm up to rounding. A transport step `dt` may be
//! split into several equal substeps τ = dt/substeps to reduce the Cayley
//! phase error; snapshots only ever fall on whole transport steps.
//!
//! Ensembles are propagated term by term: weights never change under
//! evolution.

use ndarray::Array1;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::banded::BandedLu;
use crate::error::{Error, Result};
use crate::grid::SpatialGrid;
use crate::potential::Potential;
use crate::state::{EnsembleTerm, GaussianMeta, PureState, SignedEnsemble};
use crate::units::UnitSystem;

/// Finite-difference approximation of −∂²ₓ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stencil {
    /// Second-order three-point stencil.
    ThreePoint,
    /// Fourth-order five-point stencil.
    FivePoint,
}

impl Stencil {
    /// Coefficients c₀, c₁, … of −∂²ψ ≈ (c₀ψⱼ + Σₘ cₘ(ψⱼ₊ₘ + ψⱼ₋ₘ))/dx².
    pub fn coefficients(self) -> &'static [f64] {
        match self {
            Stencil::ThreePoint => &[2.0, -1.0],
            Stencil::FivePoint => &[5.0 / 2.0, -4.0 / 3.0, 1.0 / 12.0],
        }
    }

    pub fn half_bandwidth(self) -> usize {
        self.coefficients().len() - 1
    }

    pub fn name(self) -> &'static str {
        match self {
            Stencil::ThreePoint => "three-point",
            Stencil::FivePoint => "five-point",
        }
    }
}

/// Banded real-symmetric Hamiltonian on the grid, eV.
#[derive(Debug, Clone)]
pub struct Hamiltonian {
    diagonal: Vec<f64>,
    // off[m − 1] couples nodes m apart.
    off: Vec<f64>,
}

impl Hamiltonian {
    pub fn new(
        potential: &Potential,
        relative_mass: f64,
        stencil: Stencil,
        units: &UnitSystem,
    ) -> Result<Self> {
        if !(relative_mass > 0.0) || !relative_mass.is_finite() {
            return Err(Error::Config(format!(
                "effective mass must be positive, got {relative_mass}"
            )));
        }
        let dx = potential.grid().dx();
        let kinetic =
            units.hbar * units.hbar / (2.0 * units.effective_mass(relative_mass) * dx * dx);
        let c = stencil.coefficients();
        Ok(Self {
            diagonal: potential
                .values()
                .iter()
                .map(|v| kinetic * c[0] + v)
                .collect(),
            off: c[1..].iter().map(|cm| kinetic * cm).collect(),
        })
    }

    /// Kinetic part only (V ≡ 0).
    pub fn kinetic(
        grid: &SpatialGrid,
        relative_mass: f64,
        stencil: Stencil,
        units: &UnitSystem,
    ) -> Result<Self> {
        Self::new(
            &crate::potential::free_potential(grid),
            relative_mass,
            stencil,
            units,
        )
    }

    pub fn len(&self) -> usize {
        self.diagonal.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diagonal.is_empty()
    }

    fn entry(&self, i: usize, j: usize) -> f64 {
        match i.abs_diff(j) {
            0 => self.diagonal[i],
            m if m <= self.off.len() => self.off[m - 1],
            _ => 0.0,
        }
    }

    /// H·ψ with zero amplitude outside the box.
    pub fn apply(&self, psi: &[Complex64]) -> Vec<Complex64> {
        let n = psi.len();
        let mut out: Vec<Complex64> = psi
            .iter()
            .zip(&self.diagonal)
            .map(|(z, d)| z * *d)
            .collect();
        for (idx, &c) in self.off.iter().enumerate() {
            let m = idx + 1;
            for j in 0..n.saturating_sub(m) {
                out[j] += psi[j + m] * c;
                out[j + m] += psi[j] * c;
            }
        }
        out
    }

    /// ⟨ψ|H|ψ⟩ / ⟨ψ|ψ⟩, eV.
    pub fn expectation(&self, psi: &PureState) -> f64 {
        let amps = psi.amplitudes().as_slice().expect("contiguous amplitudes");
        let h = self.apply(amps);
        let num: f64 = amps.iter().zip(&h).map(|(a, b)| (a.conj() * b).re).sum();
        let den: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        num / den
    }
}

/// Mean kinetic energy ⟨ψ|−(ħ²/2m*)∂²ₓ|ψ⟩ evaluated with `stencil`, eV.
pub fn kinetic_energy(
    psi: &PureState,
    relative_mass: f64,
    stencil: Stencil,
    units: &UnitSystem,
) -> Result<f64> {
    Ok(Hamiltonian::kinetic(psi.grid(), relative_mass, stencil, units)?.expectation(psi))
}

/// Precomputed Cayley propagator for one transport step.
#[derive(Debug, Clone)]
pub struct Propagator {
    grid: SpatialGrid,
    potential: Potential,
    dt: f64,
    relative_mass: f64,
    stencil: Stencil,
    substeps: usize,
    units: UnitSystem,
    hamiltonian: Hamiltonian,
    // i·τ/(2ħ), signed: negative for the time-reversed propagator.
    half_phase: f64,
    lu: BandedLu,
}

impl Propagator {
    pub fn new(
        potential: &Potential,
        dt: f64,
        relative_mass: f64,
        stencil: Stencil,
        substeps: usize,
        units: UnitSystem,
    ) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::Config(format!(
                "time step must be positive, got {dt}"
            )));
        }
        Self::build(potential, dt, relative_mass, stencil, substeps, units)
    }

    fn build(
        potential: &Potential,
        dt: f64,
        relative_mass: f64,
        stencil: Stencil,
        substeps: usize,
        units: UnitSystem,
    ) -> Result<Self> {
        if substeps == 0 {
            return Err(Error::Config("substeps must be at least 1".into()));
        }
        let hamiltonian = Hamiltonian::new(potential, relative_mass, stencil, &units)?;
        let half_phase = dt / substeps as f64 / (2.0 * units.hbar);
        let n = potential.grid().n_points();
        let lu = BandedLu::factor(n, stencil.half_bandwidth(), |i, j| {
            let id = if i == j { 1.0 } else { 0.0 };
            Complex64::new(id, half_phase * hamiltonian.entry(i, j))
        })
        .ok_or_else(|| Error::Degenerate("singular Crank–Nicolson matrix".into()))?;
        Ok(Self {
            grid: *potential.grid(),
            potential: potential.clone(),
            dt,
            relative_mass,
            stencil,
            substeps,
            units,
            hamiltonian,
            half_phase,
            lu,
        })
    }

    /// Propagator for −dt: the exact inverse of [`Propagator::step`].
    pub fn reversed(&self) -> Result<Self> {
        Self::build(
            &self.potential,
            -self.dt,
            self.relative_mass,
            self.stencil,
            self.substeps,
            self.units,
        )
    }

    pub fn grid(&self) -> &SpatialGrid {
        &self.grid
    }

    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    /// Signed transport step, fs.
    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn relative_mass(&self) -> f64 {
        self.relative_mass
    }

    pub fn stencil(&self) -> Stencil {
        self.stencil
    }

    pub fn substeps(&self) -> usize {
        self.substeps
    }

    pub fn units(&self) -> &UnitSystem {
        &self.units
    }

    pub fn hamiltonian(&self) -> &Hamiltonian {
        &self.hamiltonian
    }

    /// ⟨H₀⟩ of `psi`, eV.
    pub fn energy(&self, psi: &PureState) -> f64 {
        self.hamiltonian.expectation(psi)
    }

    fn advance(&self, amps: &mut [Complex64]) {
        let i_half = Complex64::new(0.0, self.half_phase);
        for _ in 0..self.substeps {
            let h = self.hamiltonian.apply(amps);
            for (a, hb) in amps.iter_mut().zip(h) {
                *a -= i_half * hb;
            }
            self.lu.solve_in_place(amps);
        }
    }

    /// Advances `psi` by one transport step.
    pub fn step(&self, psi: &PureState) -> Result<PureState> {
        self.grid.ensure_same(psi.grid(), "propagator step")?;
        let mut amps = psi.amplitudes().to_vec();
        self.advance(&mut amps);
        Ok(PureState::from_raw(self.grid, Array1::from(amps), None))
    }

    /// Advances `psi` by `n` transport steps.
    pub fn step_n(&self, psi: &PureState, n: usize) -> Result<PureState> {
        self.grid.ensure_same(psi.grid(), "propagator step")?;
        let mut amps = psi.amplitudes().to_vec();
        for _ in 0..n {
            self.advance(&mut amps);
        }
        Ok(PureState::from_raw(self.grid, Array1::from(amps), None))
    }

    /// Number of whole steps closest to `span`.
    pub fn steps_for(&self, span: f64) -> usize {
        (span / self.dt.abs()).round().max(0.0) as usize
    }
}

/// Norm bookkeeping accumulated while stepping.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct NormDrift {
    /// Largest |Δ‖ψ‖²| over any single transport step of any term.
    pub max_step: f64,
    /// Largest |‖ψ(t_end)‖² − ‖ψ(t_start)‖²| over all terms.
    pub cumulative: f64,
}

impl NormDrift {
    pub fn merge(self, other: NormDrift) -> NormDrift {
        NormDrift {
            max_step: self.max_step.max(other.max_step),
            cumulative: self.cumulative.max(other.cumulative),
        }
    }
}

/// Snapshots of an ensemble taken during [`evolve_ensemble`].
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub requested_times: Vec<f64>,
    /// Times of the step boundaries the snapshots were taken at.
    pub times: Vec<f64>,
    pub snapshots: Vec<SignedEnsemble>,
    pub final_time: f64,
    pub final_ensemble: SignedEnsemble,
    pub norm_drift: NormDrift,
}

/// Step index and actual time for each requested snapshot time.
pub fn snap_times(dt: f64, t_from: f64, t_to: f64, requested: &[f64]) -> Result<Vec<(usize, f64)>> {
    let slack = 1e-9 * dt.abs().max(1.0);
    let mut out: Vec<(usize, f64)> = Vec::with_capacity(requested.len());
    for &t in requested {
        if !(t >= t_from - slack && t <= t_to + slack) {
            return Err(Error::Config(format!(
                "snapshot time {t} fs outside [{t_from}, {t_to}] fs"
            )));
        }
        let n = ((t - t_from) / dt).round() as usize;
        if let Some(&(prev, _)) = out.last() {
            if n <= prev {
                return Err(Error::Config(format!(
                    "snapshot times must map to strictly increasing steps; {t} fs collides with an earlier time"
                )));
            }
        }
        out.push((n, t_from + n as f64 * dt));
    }
    Ok(out)
}

/// Evolves every term of `e` from `t_from` to `t_to`, recording the ensemble
/// at the step boundary nearest to each of `snapshot_times`.
pub fn evolve_ensemble(
    p: &Propagator,
    e: &SignedEnsemble,
    t_from: f64,
    t_to: f64,
    snapshot_times: &[f64],
) -> Result<Trajectory> {
    if !(t_to >= t_from) {
        return Err(Error::Config(format!(
            "evolution span [{t_from}, {t_to}] fs is reversed"
        )));
    }
    p.grid.ensure_same(e.grid(), "evolve ensemble")?;
    let total_steps = p.steps_for(t_to - t_from);
    let snaps = snap_times(p.dt, t_from, t_to, snapshot_times)?;
    let dx = p.grid.dx();

    struct TermRun {
        snapshots: Vec<PureState>,
        last: PureState,
        drift: NormDrift,
    }

    let runs: Vec<TermRun> = e
        .terms()
        .par_iter()
        .map(|term| {
            let mut amps = term.state.amplitudes().to_vec();
            let norm = |a: &[Complex64]| a.iter().map(|z| z.norm_sqr()).sum::<f64>() * dx;
            let start = norm(&amps);
            let mut prev = start;
            let mut drift = NormDrift::default();
            let mut snapshots = Vec::with_capacity(snaps.len());
            let mut next = 0;
            for n in 0..=total_steps {
                while next < snaps.len() && snaps[next].0 == n {
                    snapshots.push(PureState::from_raw(
                        p.grid,
                        Array1::from(amps.clone()),
                        None,
                    ));
                    next += 1;
                }
                if n == total_steps {
                    break;
                }
                p.advance(&mut amps);
                let now = norm(&amps);
                drift.max_step = drift.max_step.max((now - prev).abs());
                prev = now;
            }
            drift.cumulative = (prev - start).abs();
            TermRun {
                snapshots,
                last: PureState::from_raw(p.grid, Array1::from(amps), None),
                drift,
            }
        })
        .collect();

    let rebuild = |pick: &dyn Fn(&TermRun) -> PureState| {
        SignedEnsemble::from_parts_unchecked(
            e.terms()
                .iter()
                .zip(&runs)
                .map(|(t, r)| EnsembleTerm {
                    weight: t.weight,
                    state: pick(r),
                })
                .collect(),
            e.electron_count(),
        )
    };
    let snapshots = (0..snaps.len())
        .map(|i| rebuild(&|r: &TermRun| r.snapshots[i].clone()))
        .collect();
    let final_ensemble = rebuild(&|r: &TermRun| r.last.clone());
    let norm_drift = runs
        .iter()
        .fold(NormDrift::default(), |acc, r| acc.merge(r.drift));
    Ok(Trajectory {
        requested_times: snapshot_times.to_vec(),
        times: snaps.iter().map(|s| s.1).collect(),
        snapshots,
        final_time: t_from + total_steps as f64 * p.dt,
        final_ensemble,
        norm_drift,
    })
}

/// Closed-form free evolution of the packet e^{ik₀(x−x₀)}·exp(−(x−x₀)²/a₀²)
/// after time `t` (fs), renormalized on `grid`.
///
/// ψ(x,t) ∝ s^{−1/2}·exp(−(x−x₀−vt)²/(a₀²s) + ik₀(x−x₀) − iħk₀²t/(2m*))
/// with s = 1 + 2iħt/(m*a₀²) and v = ħk₀/m*; the envelope width grows as
/// a₀·√(1 + 4ħ²t²/(m*²a₀⁴)).
pub fn analytic_free_gaussian(
    grid: &SpatialGrid,
    meta: GaussianMeta,
    relative_mass: f64,
    t: f64,
    units: &UnitSystem,
) -> Result<PureState> {
    if !(t >= 0.0) {
        return Err(Error::Config(format!(
            "analytic oracle needs t ≥ 0, got {t}"
        )));
    }
    if t == 0.0 {
        return crate::state::gaussian_packet(grid, meta.x0, meta.k0, meta.a0);
    }
    let GaussianMeta { x0, k0, a0 } = meta;
    if !(a0 > 0.0) {
        return Err(Error::Config(format!(
            "packet width a0 must be positive, got {a0}"
        )));
    }
    let m = units.effective_mass(relative_mass);
    let v = units.hbar * k0 / m;
    let s = Complex64::new(1.0, 2.0 * units.hbar * t / (m * a0 * a0));
    let prefactor = s.sqrt().inv();
    let global_phase = units.hbar * k0 * k0 * t / (2.0 * m);
    let amplitudes = Array1::from_iter(grid.nodes().map(|x| {
        let u = x - x0;
        let drift = u - v * t;
        let exponent =
            -(drift * drift) / (s * a0 * a0) + Complex64::new(0.0, k0 * u - global_phase);
        prefactor * exponent.exp()
    }));
    Ok(PureState::normalized(*grid, amplitudes)?.with_meta(Some(meta)))
}

/// Width a₀·√(1 + 4ħ²t²/(m*²a₀⁴)) of a freely spreading packet at time `t`.
pub fn free_width(a0: f64, relative_mass: f64, t: f64, units: &UnitSystem) -> f64 {
    let m = units.effective_mass(relative_mass);
    let r = 2.0 * units.hbar * t / (m * a0 * a0);
    a0 * (1.0 + r * r).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_grid, SpatialGrid};
    use crate::potential::{double_barrier, free_potential};
    use crate::state::{gaussian_packet, superpose};
    use approx::assert_abs_diff_eq;

    const MASS: f64 = 0.2;

    fn reference_box() -> SpatialGrid {
        make_grid(0.0, 600.0, 3000).unwrap()
    }

    fn free_prop(g: &SpatialGrid, substeps: usize) -> Propagator {
        Propagator::new(
            &free_potential(g),
            3.0,
            MASS,
            Stencil::FivePoint,
            substeps,
            UnitSystem::default(),
        )
        .unwrap()
    }

    fn reference_beam(g: &SpatialGrid) -> PureState {
        let parts: Vec<_> = [250.0, 280.0, 310.0]
            .iter()
            .map(|&x0| gaussian_packet(g, x0, 0.69, 15.0).unwrap())
            .collect();
        superpose(&parts, &[Complex64::new(1.0, 0.0); 3]).unwrap()
    }

    #[test]
    fn step_preserves_norm() {
        let g = reference_box();
        let p = free_prop(&g, 4);
        let psi = gaussian_packet(&g, 250.0, 0.69, 15.0).unwrap();
        let next = p.step(&psi).unwrap();
        assert!((next.norm_squared() - psi.norm_squared()).abs() < 1e-12);
    }

    #[test]
    fn step_solves_the_cayley_system() {
        let g = make_grid(0.0, 40.0, 101).unwrap();
        let v = double_barrier(&g, 20.0, 1.0, 0.3, 2.0).unwrap();
        for stencil in [Stencil::ThreePoint, Stencil::FivePoint] {
            let p = Propagator::new(&v, 0.7, MASS, stencil, 1, UnitSystem::default()).unwrap();
            let psi = gaussian_packet(&g, 15.0, 0.5, 3.0).unwrap();
            let out = p.step(&psi).unwrap();
            let a = Complex64::new(0.0, p.half_phase);
            let lhs: Vec<_> = {
                let h = p.hamiltonian.apply(out.amplitudes().as_slice().unwrap());
                out.amplitudes()
                    .iter()
                    .zip(h)
                    .map(|(z, hz)| z + a * hz)
                    .collect()
            };
            let rhs: Vec<_> = {
                let h = p.hamiltonian.apply(psi.amplitudes().as_slice().unwrap());
                psi.amplitudes()
                    .iter()
                    .zip(h)
                    .map(|(z, hz)| z - a * hz)
                    .collect()
            };
            for (l, r) in lhs.iter().zip(&rhs) {
                assert!((l - r).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn free_packet_moves_at_group_velocity() {
        let g = reference_box();
        let p = free_prop(&g, 16);
        let psi = gaussian_packet(&g, 200.0, 0.69, 15.0).unwrap();
        let n = 100;
        let out = p.step_n(&psi, n).unwrap();
        let v = UnitSystem::default().group_velocity(0.69, MASS);
        assert_abs_diff_eq!(
            out.mean_position() - 200.0,
            n as f64 * 3.0 * v,
            epsilon = 0.05
        );
    }

    #[test]
    fn free_evolution_conserves_momentum() {
        let g = reference_box();
        let p = free_prop(&g, 4);
        let psi = gaussian_packet(&g, 200.0, 0.69, 15.0).unwrap();
        let out = p.step_n(&psi, 50).unwrap();
        assert_abs_diff_eq!(out.mean_wavevector(), psi.mean_wavevector(), epsilon = 1e-9);
    }

    #[test]
    fn matches_analytic_free_gaussian() {
        let g = reference_box();
        let meta = GaussianMeta {
            x0: 150.0,
            k0: 0.69,
            a0: 15.0,
        };
        let units = UnitSystem::default();
        let psi0 = analytic_free_gaussian(&g, meta, MASS, 0.0, &units).unwrap();
        let out = free_prop(&g, 16).step_n(&psi0, 220).unwrap();
        let exact = analytic_free_gaussian(&g, meta, MASS, 660.0, &units).unwrap();
        let overlap = out.overlap(&exact).unwrap();
        assert!(overlap >= 1.0 - 1e-4, "overlap {overlap}");
    }

    #[test]
    fn three_point_stencil_saturates_below_oracle_gate() {
        // The second-order stencil's dispersion error dominates once the
        // time error is removed; this is why the five-point stencil is default.
        let g = reference_box();
        let meta = GaussianMeta {
            x0: 150.0,
            k0: 0.69,
            a0: 15.0,
        };
        let units = UnitSystem::default();
        let psi0 = analytic_free_gaussian(&g, meta, MASS, 0.0, &units).unwrap();
        let p = Propagator::new(
            &free_potential(&g),
            3.0,
            MASS,
            Stencil::ThreePoint,
            16,
            units,
        )
        .unwrap();
        let out = p.step_n(&psi0, 220).unwrap();
        let exact = analytic_free_gaussian(&g, meta, MASS, 660.0, &units).unwrap();
        assert!(out.overlap(&exact).unwrap() < 1.0 - 1e-3);
    }

    #[test]
    fn analytic_oracle_at_zero_is_the_packet() {
        let g = reference_box();
        let meta = GaussianMeta {
            x0: 250.0,
            k0: 0.69,
            a0: 15.0,
        };
        let a = analytic_free_gaussian(&g, meta, MASS, 0.0, &UnitSystem::default()).unwrap();
        let b = gaussian_packet(&g, 250.0, 0.69, 15.0).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn analytic_oracle_drift_and_width() {
        let g = reference_box();
        let units = UnitSystem::default();
        let meta = GaussianMeta {
            x0: 250.0,
            k0: 0.69,
            a0: 15.0,
        };
        let psi = analytic_free_gaussian(&g, meta, MASS, 6.0, &units).unwrap();
        assert_abs_diff_eq!(psi.mean_position() - 250.0, 2.4, epsilon = 0.01);
        let a_t = free_width(15.0, MASS, 6.0, &units);
        // |ψ|² standard deviation is a(t)/2.
        assert_abs_diff_eq!(psi.position_spread(), a_t / 2.0, epsilon = 1e-6);
        assert!(a_t > 15.0 && a_t < 15.01);
    }

    #[test]
    fn time_reversal_recovers_initial_state() {
        let g = reference_box();
        let v = double_barrier(&g, 350.0, 0.8, 0.2, 4.0).unwrap();
        let fwd =
            Propagator::new(&v, 3.0, MASS, Stencil::FivePoint, 2, UnitSystem::default()).unwrap();
        let back = fwd.reversed().unwrap();
        let psi = reference_beam(&g);
        let there = fwd.step_n(&psi, 60).unwrap();
        let again = back.step_n(&there, 60).unwrap();
        let fidelity = psi.overlap(&again).unwrap().powi(2);
        assert!(fidelity >= 1.0 - 1e-8, "fidelity {fidelity}");
    }

    #[test]
    fn step_is_linear() {
        let g = make_grid(0.0, 200.0, 800).unwrap();
        let v = double_barrier(&g, 100.0, 0.8, 0.2, 4.0).unwrap();
        let p =
            Propagator::new(&v, 3.0, MASS, Stencil::FivePoint, 3, UnitSystem::default()).unwrap();
        let a = gaussian_packet(&g, 70.0, 0.69, 10.0).unwrap();
        let b = gaussian_packet(&g, 120.0, -0.3, 8.0).unwrap();
        let (ca, cb) = (Complex64::new(0.3, -1.2), Complex64::new(-0.7, 0.4));
        let mixed = PureState::from_raw(g, a.amplitudes() * ca + b.amplitudes() * cb, None);
        let lhs = p.step(&mixed).unwrap();
        let sa = p.step(&a).unwrap();
        let sb = p.step(&b).unwrap();
        for j in 0..g.n_points() {
            let rhs = sa.amplitudes()[j] * ca + sb.amplitudes()[j] * cb;
            assert!((lhs.amplitudes()[j] - rhs).norm() < 1e-10);
        }
    }

    #[test]
    fn energy_is_conserved() {
        let g = reference_box();
        let v = double_barrier(&g, 350.0, 0.8, 0.2, 4.0).unwrap();
        let p =
            Propagator::new(&v, 3.0, MASS, Stencil::FivePoint, 4, UnitSystem::default()).unwrap();
        let psi = reference_beam(&g);
        let e0 = p.energy(&psi);
        let mut cur = psi;
        for _ in 0..11 {
            cur = p.step_n(&cur, 20).unwrap();
            assert!(((p.energy(&cur) - e0) / e0).abs() < 1e-6);
        }
    }

    #[test]
    fn reference_packet_energy() {
        let g = reference_box();
        let units = UnitSystem::default();
        for x0 in [250.0, 280.0, 310.0] {
            let psi = gaussian_packet(&g, x0, 0.69, 15.0).unwrap();
            let e = kinetic_energy(&psi, MASS, Stencil::FivePoint, &units).unwrap();
            assert_abs_diff_eq!(e, 0.09, epsilon = 0.002);
        }
    }

    #[test]
    fn ensemble_snapshots_and_consistency() {
        let g = reference_box();
        let p = free_prop(&g, 2);
        let psi = gaussian_packet(&g, 250.0, 0.69, 15.0).unwrap();
        let e = SignedEnsemble::pure(psi.clone());
        let traj = evolve_ensemble(&p, &e, 0.0, 30.0, &[]).unwrap();
        assert!(traj.snapshots.is_empty());
        assert_eq!(traj.final_time, 30.0);
        let bare = p.step_n(&psi, 10).unwrap();
        assert_eq!(
            traj.final_ensemble.terms()[0].state.amplitudes(),
            bare.amplitudes()
        );

        let traj = evolve_ensemble(&p, &e, 0.0, 660.0, &[0.0, 6.0, 315.0, 660.0]).unwrap();
        assert_eq!(traj.snapshots.len(), 4);
        assert_eq!(traj.times, vec![0.0, 6.0, 315.0, 660.0]);
        assert!(traj.snapshots.iter().all(|s| s.weights() == vec![1.0]));
        assert!(traj.norm_drift.max_step < 1e-12);
        assert!(traj.norm_drift.cumulative < 1e-9);
    }

    #[test]
    fn snapshots_snap_to_nearest_step() {
        let snaps = snap_times(3.0, 0.0, 30.0, &[4.0, 10.6, 29.0]).unwrap();
        assert_eq!(snaps, vec![(1, 3.0), (4, 12.0), (10, 30.0)]);
        assert!(matches!(
            snap_times(3.0, 0.0, 30.0, &[31.0]),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            snap_times(3.0, 0.0, 30.0, &[3.0, 3.5]),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn weights_survive_evolution() {
        let g = make_grid(0.0, 200.0, 600).unwrap();
        let p = free_prop(&g, 1);
        let e = SignedEnsemble::from_pairs(
            [
                (1.3, gaussian_packet(&g, 80.0, 0.4, 8.0).unwrap()),
                (-0.3, gaussian_packet(&g, 90.0, -0.4, 12.0).unwrap()),
            ],
            1,
        )
        .unwrap();
        let traj = evolve_ensemble(&p, &e, 0.0, 9.0, &[3.0, 9.0]).unwrap();
        for s in &traj.snapshots {
            assert_eq!(s.weights(), vec![1.3, -0.3]);
        }
    }

    #[test]
    fn grid_mismatch_is_a_shape_error() {
        let p = free_prop(&reference_box(), 1);
        let other = gaussian_packet(&make_grid(0.0, 100.0, 500).unwrap(), 50.0, 0.0, 5.0).unwrap();
        assert!(matches!(p.step(&other), Err(Error::Shape(_))));
    }

    #[test]
    fn rejects_bad_parameters() {
        let g = reference_box();
        let v = free_potential(&g);
        let u = UnitSystem::default();
        assert!(Propagator::new(&v, 0.0, MASS, Stencil::FivePoint, 1, u).is_err());
        assert!(Propagator::new(&v, 3.0, 0.0, Stencil::FivePoint, 1, u).is_err());
        assert!(Propagator::new(&v, 3.0, MASS, Stencil::FivePoint, 0, u).is_err());
    }
}
