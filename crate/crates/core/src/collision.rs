// Copyright 2026 The qtransport Authors
// SPDX-License-Identifier: Apache-2.0

//! Instantaneous collision events on signed ensembles.
//!
//! Two models:
//!
//! * H.E. (Hamiltonian-eigenstate): a wide packet ψ_P at the final wave
//!   vector is added with weight +w and a wide packet ψ_N at the initial wave
//!   vector is removed with weight −w. ψ_N is not a member of the ensemble,
//!   so nothing keeps the charge density non-negative once the terms evolve
//!   apart.
//! * G.S. (general-state): weight only moves between states that are
//!   already present, so every weight stays non-negative.

use ndarray::Array2;

use crate::diagnostics::{boundary_leak_state, LEAK_MARGIN_NM, LEAK_THRESHOLD};
use crate::error::{Error, Result};
use crate::evolution::free_width;
use crate::state::{charge_density, gaussian_packet, EnsembleTerm, PureState, SignedEnsemble};
use crate::units::UnitSystem;

/// Nodes with |ψ|²·dx below this are ignored by the safe-weight scans.
pub const SUPPORT_FLOOR: f64 = 1e-14;

/// How the H.E. weight w is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightMode {
    /// w = β·[`max_safe_weight`] with 0 < β ≤ 1.
    AutoMaxSafe {
        beta: f64,
    },
    Explicit(f64),
}

/// Parameters of an H.E. collision event.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeCollisionSpec {
    /// Scattering time, fs.
    pub t_s: f64,
    /// Initial wave vector, carried by ψ_N, nm⁻¹.
    pub k0: f64,
    /// Final wave vector, carried by ψ_P, nm⁻¹.
    pub k_f: f64,
    /// Width of the original packets, nm.
    pub a0: f64,
    /// Reference centre at t = 0. `None` uses the charge centroid of the
    /// pre-collision ensemble moved back by ħk₀t_S/m*.
    pub x0_ref: Option<f64>,
    pub relative_mass: f64,
    pub weight_mode: WeightMode,
}

/// Width 2a₀·√(1 + 4ħ²t²/(m*²a₀⁴)) of the collision packets at time `t`.
pub fn collision_width(a0: f64, relative_mass: f64, t: f64, units: &UnitSystem) -> f64 {
    2.0 * free_width(a0, relative_mass, t, units)
}

/// ψ_P, ψ_N and where they were placed.
#[derive(Debug, Clone, PartialEq)]
pub struct CollisionPackets {
    pub psi_p: PureState,
    pub psi_n: PureState,
    pub x0_ref: f64,
    pub x0s: f64,
    pub a0s: f64,
}

/// Builds the two wide packets of an H.E. event for `e_pre` at t_S.
///
/// Both share the envelope exp(−(x−x_{0S})²/a_{0S}²) with
/// x_{0S} = x0_ref + (ħk₀/m*)·t_S; ψ_N carries k₀ and ψ_P carries k_F.
pub fn build_collision_packets(
    e_pre: &SignedEnsemble,
    spec: &HeCollisionSpec,
    units: &UnitSystem,
) -> Result<CollisionPackets> {
    if !(spec.t_s > 0.0) {
        return Err(Error::Config(format!(
            "collision time must be positive, got {}",
            spec.t_s
        )));
    }
    if !(spec.a0 > 0.0) {
        return Err(Error::Config(format!(
            "packet width a0 must be positive, got {}",
            spec.a0
        )));
    }
    let v = units.group_velocity(spec.k0, spec.relative_mass);
    let x0_ref = spec
        .x0_ref
        .unwrap_or_else(|| e_pre.centroid() - v * spec.t_s);
    let x0s = x0_ref + v * spec.t_s;
    let a0s = collision_width(spec.a0, spec.relative_mass, spec.t_s, units);
    let grid = e_pre.grid();
    let psi_n = gaussian_packet(grid, x0s, spec.k0, a0s)?;
    let psi_p = gaussian_packet(grid, x0s, spec.k_f, a0s)?;
    for (name, psi) in [("ψ_N", &psi_n), ("ψ_P", &psi_p)] {
        let leak = boundary_leak_state(psi, LEAK_MARGIN_NM)?;
        if leak > LEAK_THRESHOLD {
            return Err(Error::Config(format!(
                "collision packet {name} (centre {x0s} nm, width {a0s} nm) puts {leak:.3e} of its mass \
                 within {LEAK_MARGIN_NM} nm of a wall"
            )));
        }
    }
    Ok(CollisionPackets {
        psi_p,
        psi_n,
        x0_ref,
        x0s,
        a0s,
    })
}

fn supported_q(e_pre: &SignedEnsemble, psi_n: &PureState) -> Result<ndarray::Array1<f64>> {
    e_pre.grid().ensure_same(psi_n.grid(), "collision packet")?;
    let q = charge_density(e_pre);
    let dx = e_pre.grid().dx();
    for (j, z) in psi_n.amplitudes().iter().enumerate() {
        if z.norm_sqr() * dx > SUPPORT_FLOOR && q.values()[j] <= 0.0 {
            return Err(Error::Precondition(format!(
                "pre-collision charge density is {} at x = {} nm where ψ_N is supported",
                q.values()[j],
                e_pre.grid().x(j)
            )));
        }
    }
    Ok(q.values().clone())
}

fn check_beta(beta: f64) -> Result<()> {
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(Error::Precondition(format!(
            "safety factor must lie in (0, 1], got {beta}"
        )));
    }
    Ok(())
}

/// Largest w for which Q_pre + w(|ψ_P|² − |ψ_N|²) ≥ 0 at every node, capped
/// at the ensemble trace, times `beta`.
///
/// Only nodes where (|ψ_N|² − |ψ_P|²)·dx exceeds [`SUPPORT_FLOOR`] constrain
/// w. When ψ_P and ψ_N have identical moduli (k_F = −k₀ on a shared
/// envelope) no node does and the trace cap decides.
pub fn max_safe_weight(
    e_pre: &SignedEnsemble,
    psi_p: &PureState,
    psi_n: &PureState,
    beta: f64,
) -> Result<f64> {
    check_beta(beta)?;
    e_pre.grid().ensure_same(psi_p.grid(), "collision packet")?;
    let q = supported_q(e_pre, psi_n)?;
    let dx = e_pre.grid().dx();
    let mut bound = e_pre.trace();
    if !(bound > 0.0) {
        return Err(Error::Precondition(format!(
            "ensemble trace must be positive, got {bound}"
        )));
    }
    for ((zp, zn), &qj) in psi_p
        .amplitudes()
        .iter()
        .zip(psi_n.amplitudes())
        .zip(q.iter())
    {
        let deficit = zn.norm_sqr() - zp.norm_sqr();
        if deficit * dx > SUPPORT_FLOOR {
            bound = bound.min(qj / deficit);
        }
    }
    Ok(beta * bound)
}

/// β·min Q_pre/|ψ_N|² over the support of ψ_N: the bound obtained when the
/// added packet is ignored. Always ≤ the exact bound before capping, and
/// far smaller when the packets are much wider than the ensemble.
pub fn subtraction_bound(e_pre: &SignedEnsemble, psi_n: &PureState, beta: f64) -> Result<f64> {
    check_beta(beta)?;
    let q = supported_q(e_pre, psi_n)?;
    let dx = e_pre.grid().dx();
    let mut bound = f64::INFINITY;
    for (zn, &qj) in psi_n.amplitudes().iter().zip(q.iter()) {
        let d = zn.norm_sqr();
        if d * dx > SUPPORT_FLOOR {
            bound = bound.min(qj / d);
        }
    }
    Ok(beta * bound)
}

/// Result of an H.E. event.
#[derive(Debug, Clone, PartialEq)]
pub struct HeCollision {
    pub ensemble: SignedEnsemble,
    pub weight: f64,
    /// [`max_safe_weight`] at β = 1.
    pub max_safe_weight: f64,
    /// [`subtraction_bound`] at β = 1.
    pub subtraction_bound: f64,
    pub packets: CollisionPackets,
}

/// Appends (+w, ψ_P) and (−w, ψ_N) and checks Q(x, t_S⁺) ≥ 0 at every node.
pub fn apply_he_collision(
    e_pre: &SignedEnsemble,
    spec: &HeCollisionSpec,
    units: &UnitSystem,
) -> Result<HeCollision> {
    let packets = build_collision_packets(e_pre, spec, units)?;
    let safe = max_safe_weight(e_pre, &packets.psi_p, &packets.psi_n, 1.0)?;
    let conservative = subtraction_bound(e_pre, &packets.psi_n, 1.0)?;
    let weight = match spec.weight_mode {
        WeightMode::AutoMaxSafe { beta } => {
            check_beta(beta)?;
            beta * safe
        }
        WeightMode::Explicit(w) => w,
    };
    if !(weight > 0.0) || !weight.is_finite() {
        return Err(Error::Config(format!(
            "collision weight must be positive and finite, got {weight}"
        )));
    }
    let mut terms = e_pre.terms().to_vec();
    terms.push(EnsembleTerm {
        weight,
        state: packets.psi_p.clone(),
    });
    terms.push(EnsembleTerm {
        weight: -weight,
        state: packets.psi_n.clone(),
    });
    let ensemble = SignedEnsemble::new(terms, e_pre.electron_count())?;
    let (x, q) = charge_density(&ensemble).min();
    if q < 0.0 {
        return Err(Error::Safety(format!(
            "collision weight {weight} leaves Q = {q:e} at x = {x} nm just after scattering (safe bound {safe})"
        )));
    }
    Ok(HeCollision {
        ensemble,
        weight,
        max_safe_weight: safe,
        subtraction_bound: conservative,
        packets,
    })
}

/// Outcome of [`calibrate_weight`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Calibration {
    pub weight: f64,
    /// Negative norm reached at `weight`.
    pub achieved: f64,
    pub target: f64,
    /// Whether the target lies in the achievable range.
    pub reachable: bool,
    /// Negative norm at w = 0 and at w = w_max.
    pub range: (f64, f64),
    pub iterations: usize,
}

/// Σⱼ min(Q_B + w(Q_P − Q_N), 0)·dx.
pub fn negative_norm_at(q_b: &[f64], q_p: &[f64], q_n: &[f64], dx: f64, w: f64) -> f64 {
    let mut acc = 0.0;
    for ((b, p), n) in q_b.iter().zip(q_p).zip(q_n) {
        let v = b + w * p - w * n;
        if v < 0.0 {
            acc += v;
        }
    }
    acc * dx
}

/// Finds w in [0, w_max] whose later negative norm equals `target` (< 0).
///
/// `q_b` is the charge density of the unscattered ensemble and `q_p`,
/// `q_n` are |ψ_P|², |ψ_N|², all evolved to the calibration time. With
/// Q_B ≥ 0 the negative norm is non-increasing in w, so bisection applies.
/// If the target lies outside the reachable range the endpoint closest to it
/// is returned with `reachable = false`.
pub fn calibrate_weight(
    q_b: &[f64],
    q_p: &[f64],
    q_n: &[f64],
    dx: f64,
    target: f64,
    w_max: f64,
) -> Result<Calibration> {
    if q_b.len() != q_p.len() || q_b.len() != q_n.len() {
        return Err(Error::Shape(
            "calibration densities differ in length".into(),
        ));
    }
    if !(target < 0.0) || !(w_max > 0.0) {
        return Err(Error::Config(format!(
            "calibration needs a negative target and positive w_max, got {target} and {w_max}"
        )));
    }
    let f = |w| negative_norm_at(q_b, q_p, q_n, dx, w);
    let range = (f(0.0), f(w_max));
    if range.1 > target {
        return Ok(Calibration {
            weight: w_max,
            achieved: range.1,
            target,
            reachable: false,
            range,
            iterations: 0,
        });
    }
    let (mut lo, mut hi) = (0.0, w_max);
    let mut iterations = 0;
    while iterations < 200 && hi - lo > 1e-14 * w_max {
        let mid = 0.5 * (lo + hi);
        if f(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }
    let weight = 0.5 * (lo + hi);
    Ok(Calibration {
        weight,
        achieved: f(weight),
        target,
        reachable: true,
        range,
        iterations,
    })
}

/// Parameters of a G.S. event.
#[derive(Debug, Clone, PartialEq)]
pub struct GsCollisionSpec {
    /// Index of the scattering member.
    pub source_index: usize,
    /// Electrons occupying the source state, M_i.
    pub occupation: u32,
    pub final_state: PureState,
}

/// Moves weight 1/M from the source member to a new term (1/M, ψ_F), where
/// M is the ensemble's electron count, then drops terms whose weight is
/// exactly zero.
pub fn apply_gs_collision(
    e_pre: &SignedEnsemble,
    spec: &GsCollisionSpec,
) -> Result<SignedEnsemble> {
    let Some(source) = e_pre.terms().get(spec.source_index) else {
        return Err(Error::Precondition(format!(
            "source index {} out of range for {} terms",
            spec.source_index,
            e_pre.len()
        )));
    };
    if spec.occupation < 1 {
        return Err(Error::Precondition(
            "source occupation is below one: nothing to scatter out of".into(),
        ));
    }
    if spec.occupation > e_pre.electron_count() {
        return Err(Error::Precondition(format!(
            "source occupation {} exceeds the electron count {}",
            spec.occupation,
            e_pre.electron_count()
        )));
    }
    e_pre
        .grid()
        .ensure_same(spec.final_state.grid(), "final state")?;
    let share = 1.0 / e_pre.electron_count() as f64;
    let remaining = source.weight - share;
    if remaining < 0.0 {
        return Err(Error::Precondition(format!(
            "source weight {} is smaller than one electron's share {share}",
            source.weight
        )));
    }
    let mut terms = e_pre.terms().to_vec();
    terms[spec.source_index].weight = remaining;
    terms.push(EnsembleTerm {
        weight: share,
        state: spec.final_state.clone(),
    });
    terms.retain(|t| t.weight != 0.0);
    SignedEnsemble::new(terms, e_pre.electron_count())
}

/// Z[i][j] ≥ 0: rate from member j to member i, fs⁻¹.
#[derive(Debug, Clone, PartialEq)]
pub struct RateMatrix {
    z: Array2<f64>,
}

impl RateMatrix {
    pub fn new(z: Array2<f64>) -> Result<Self> {
        if z.nrows() != z.ncols() {
            return Err(Error::Shape(format!(
                "rate matrix must be square, got {:?}",
                z.dim()
            )));
        }
        if z.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::Config(
                "rates must be finite and non-negative".into(),
            ));
        }
        if z.diag().iter().any(|&v| v != 0.0) {
            return Err(Error::Config("rate matrix diagonal must be zero".into()));
        }
        Ok(Self { z })
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            z: Array2::zeros((n, n)),
        }
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.z
    }

    pub fn len(&self) -> usize {
        self.z.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.z.is_empty()
    }

    /// Σᵢ Z[i][j]: total rate out of member j.
    pub fn out_rate(&self, j: usize) -> f64 {
        self.z.column(j).sum()
    }

    /// Largest `dt` for which [`general_collision_step`] cannot overdraw.
    pub fn max_step(&self) -> f64 {
        let worst = (0..self.len())
            .map(|j| self.out_rate(j))
            .fold(0.0, f64::max);
        if worst == 0.0 {
            f64::INFINITY
        } else {
            2.0 * std::f64::consts::PI / worst
        }
    }
}

/// wᵢ ← wᵢ + (dt/2π)·Σⱼ (Zᵢⱼwⱼ − Zⱼᵢwᵢ).
pub fn general_collision_step(
    e: &SignedEnsemble,
    z: &RateMatrix,
    dt: f64,
) -> Result<SignedEnsemble> {
    if z.len() != e.len() {
        return Err(Error::Shape(format!(
            "{}×{} rate matrix for {} terms",
            z.len(),
            z.len(),
            e.len()
        )));
    }
    if !e.all_weights_nonnegative() {
        return Err(Error::Precondition(
            "rate steps need non-negative weights".into(),
        ));
    }
    if !(dt >= 0.0) {
        return Err(Error::Config(format!(
            "rate step must be non-negative, got {dt}"
        )));
    }
    let c = dt / (2.0 * std::f64::consts::PI);
    let keep: Vec<f64> = (0..z.len()).map(|j| 1.0 - c * z.out_rate(j)).collect();
    if let Some(j) = keep.iter().position(|&k| k < 0.0) {
        return Err(Error::StepSize(format!(
            "dt = {dt} fs overdraws member {j}: dt·(out rate)/2π = {} > 1",
            c * z.out_rate(j)
        )));
    }
    let w = e.weights();
    let mut out = e.clone();
    for (i, term) in out.terms_mut().iter_mut().enumerate() {
        let gain: f64 = (0..w.len()).map(|j| z.z[[i, j]] * w[j]).sum();
        term.weight = w[i] * keep[i] + c * gain;
    }
    Ok(out)
}
