//! Dimensionless unit conventions.
//!
//! Rates and energies are measured in units of the single-atom free-space
//! decay rate Γ0, lengths in units of the transition wavelength λ0 and times
//! in units of 1/Γ0. The bare transition frequency ω0 never enters the
//! numerics: every Hamiltonian is written in terms of detunings from it.

use std::f64::consts::TAU;

/// Single-atom free-space decay rate (rate and energy unit).
pub const GAMMA0: f64 = 1.0;

/// Transition wavelength (length unit).
pub const LAMBDA0: f64 = 1.0;

/// Free-space wavenumber k0 = 2π/λ0.
pub const K0: f64 = TAU / LAMBDA0;

/// Separations below this are treated as overlapping atoms.
pub const MIN_ATOM_SEPARATION: f64 = 1e-3 * LAMBDA0;

/// The unit system shared by every module. It carries no state; it exists so
/// that configs and reports can echo the conventions they were produced with.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct UnitSystem {
    pub gamma0: f64,
    pub lambda0: f64,
    pub k0: f64,
}

impl Default for UnitSystem {
    fn default() -> Self {
        Self {
            gamma0: GAMMA0,
            lambda0: LAMBDA0,
            k0: K0,
        }
    }
}

impl UnitSystem {
    pub fn time_unit(&self) -> f64 {
        1.0 / self.gamma0
    }
}
