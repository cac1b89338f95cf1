// Copyright 2026 The qtransport Authors
// SPDX-License-Identifier: Apache-2.0

//! Unit system: lengths in nm, times in fs, energies in eV.
//!
//! Masses therefore carry units of eV·fs²/nm². The free-electron mass is
//! derived from its rest energy and the speed of light rather than typed in,
//! so the constant set stays self-consistent.

/// Reduced Planck constant in eV·fs (CODATA 2018).
pub const HBAR_EV_FS: f64 = 0.658_211_956_9;

/// Electron rest energy m₀c² in eV (CODATA 2018).
pub const ELECTRON_REST_ENERGY_EV: f64 = 510_998.950_00;

/// Speed of light in nm/fs.
pub const SPEED_OF_LIGHT_NM_PER_FS: f64 = 299.792_458;

/// ħ and the free-electron mass m₀ expressed in (nm, fs, eV).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitSystem {
    /// eV·fs
    pub hbar: f64,
    /// eV·fs²/nm²
    pub electron_rest_mass: f64,
}

impl UnitSystem {
    pub const fn nm_fs_ev() -> Self {
        Self {
            hbar: HBAR_EV_FS,
            electron_rest_mass: ELECTRON_REST_ENERGY_EV
                / (SPEED_OF_LIGHT_NM_PER_FS * SPEED_OF_LIGHT_NM_PER_FS),
        }
    }

    /// Mass of a carrier with relative effective mass `relative` (m*/m₀).
    pub fn effective_mass(&self, relative: f64) -> f64 {
        relative * self.electron_rest_mass
    }

    /// ħ²/(2m₀) in eV·nm².
    pub fn kinetic_prefactor(&self) -> f64 {
        self.hbar * self.hbar / (2.0 * self.electron_rest_mass)
    }

    /// Group velocity ħk/m* in nm/fs.
    pub fn group_velocity(&self, k: f64, relative_mass: f64) -> f64 {
        self.hbar * k / self.effective_mass(relative_mass)
    }

    /// Plane-wave kinetic energy ħ²k²/(2m*) in eV.
    pub fn plane_wave_energy(&self, k: f64, relative_mass: f64) -> f64 {
        self.hbar * self.hbar * k * k / (2.0 * self.effective_mass(relative_mass))
    }
}

impl Default for UnitSystem {
    fn default() -> Self {
        Self::nm_fs_ev()
    }
}
