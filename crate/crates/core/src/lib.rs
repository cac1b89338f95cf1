// Copyright 2026 The qtransport Authors
// SPDX-License-Identifier: Apache-2.0

//! One-dimensional quantum transport with explicit signed ensembles.
//!
//! A density matrix is kept as a list of weighted pure states,
//! ρ = Σᵢ wᵢ |ψᵢ⟩⟨ψᵢ|, where the weights may be negative. Each state is
//! propagated under the effective-mass Schrödinger equation, and the
//! phase-space picture is recovered on demand through a discrete
//! Wigner–Weyl transform. Two collision models act on the ensemble:
//!
//! * a Boltzmann-style operator over Hamiltonian eigenstates, which adds a
//!   packet at the final wave vector and subtracts a packet at the initial
//!   one ([`collision::apply_he_collision`]);
//! * a general-state operator, which only moves weight between states that
//!   are already members of the ensemble ([`collision::apply_gs_collision`],
//!   [`collision::general_collision_step`]).
//!
//! The [`diagnostics`] module measures how far the resulting charge density
//! departs from non-negativity.

#![allow(clippy::neg_cmp_op_on_partial_ord)]
//!
//! Units are nm, fs and eV throughout; see [`units`].

pub mod collision;
pub mod diagnostics;
pub mod error;
pub mod evolution;
pub mod grid;
pub mod potential;
pub mod state;
pub mod units;
pub mod wigner;

mod banded;

pub use error::{Error, Result};
pub use grid::{MomentumGrid, SpatialGrid};
pub use num_complex::Complex64;
pub use potential::Potential;
pub use state::{ChargeDensity, EnsembleTerm, GaussianMeta, PureState, SignedEnsemble};
pub use units::UnitSystem;
