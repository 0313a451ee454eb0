//! Free-space dyadic Green's function for ẑ-polarized dipoles and the
//! derived two-atom couplings.
//!
//! All atoms are polarized along the chain axis, so only the zz component of
//! the tensor is ever needed:
//!
//! ```text
//! G_zz(R) = e^{ik0R} / (4π k0 R) · [ (1 + i/x − 1/x²) + n_z² (−1 − 3i/x + 3/x²) ],   x = k0 R
//! ```
//!
//! with `n_z` the z component of the unit separation vector.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{AwqError, Result};
use crate::units::{GAMMA0, K0};

pub type Point = [f64; 3];

/// Dimer parity: `Anti` is the λ = −1 (subradiant) combination, `Sym` the
/// λ = +1 (superradiant) one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Parity {
    #[serde(rename = "-1")]
    Anti,
    #[serde(rename = "+1")]
    Sym,
}

impl Parity {
    pub fn sign(self) -> f64 {
        match self {
            Parity::Anti => -1.0,
            Parity::Sym => 1.0,
        }
    }

    pub fn from_sign(sign: i32) -> Option<Self> {
        match sign {
            -1 => Some(Parity::Anti),
            1 => Some(Parity::Sym),
            _ => None,
        }
    }

    pub fn both() -> [Parity; 2] {
        [Parity::Anti, Parity::Sym]
    }
}

/// Coherent and dissipative parts of the coupling −3πΓ0·G_zz between two atoms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairCoupling {
    /// Coherent exchange g (Γ0 units).
    pub g: f64,
    /// Dissipative rate γ (Γ0 units).
    pub gamma: f64,
}

impl PairCoupling {
    /// Complex amplitude g − iγ/2.
    pub fn amplitude(&self) -> Complex64 {
        Complex64::new(self.g, -0.5 * self.gamma)
    }

    fn from_amplitude(a: Complex64) -> Self {
        Self {
            g: a.re,
            gamma: -2.0 * a.im,
        }
    }
}

fn distance(r1: &Point, r2: &Point) -> (f64, f64) {
    let dx = r1[0] - r2[0];
    let dy = r1[1] - r2[1];
    let dz = r1[2] - r2[2];
    let r = (dx * dx + dy * dy + dz * dz).sqrt();
    (r, dz)
}

/// zz component of the free-space Green's tensor between two distinct points.
pub fn greens_zz(r1: &Point, r2: &Point) -> Result<Complex64> {
    let (r, dz) = distance(r1, r2);
    if r == 0.0 {
        return Err(AwqError::CoincidentPoints);
    }
    Ok(greens_zz_at(r, dz / r))
}

fn greens_zz_at(r: f64, nz: f64) -> Complex64 {
    let x = K0 * r;
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let nz2 = nz * nz;
    let bracket = Complex64::new(1.0 - inv2, inv) + nz2 * Complex64::new(3.0 * inv2 - 1.0, -3.0 * inv);
    let phase = Complex64::new(x.cos(), x.sin());
    phase * bracket / (4.0 * PI * K0 * r)
}

/// The pair coupling −3πΓ0·G_zz(r1, r2). Coincident points return the
/// single-atom self term (g, γ) = (0, Γ0).
pub fn pair_amplitude(r1: &Point, r2: &Point) -> PairCoupling {
    let (r, dz) = distance(r1, r2);
    if r == 0.0 {
        return PairCoupling { g: 0.0, gamma: GAMMA0 };
    }
    PairCoupling::from_amplitude(-3.0 * PI * GAMMA0 * greens_zz_at(r, dz / r))
}

/// Pair coupling for two atoms on a common line parallel to ẑ, from the
/// closed form
///
/// ```text
/// g/Γ0 = −3/(2x³) [cos x + x sin x],   γ/Γ0 = −3/x³ [x cos x − sin x],   x = k0 r
/// ```
///
/// Below x ≈ 1e-2 the series expansions are used to avoid cancellation.
pub fn axial_pair_coupling(r: f64) -> PairCoupling {
    let x = K0 * r;
    let (s, c) = x.sin_cos();
    let x3 = x * x * x;
    let g = -1.5 / x3 * (c + x * s);
    let gamma = if x < 1e-2 {
        // γ = 1 − x²/5 + x⁴/70 − ...
        let x2 = x * x;
        1.0 - x2 / 5.0 + x2 * x2 / 70.0
    } else {
        -3.0 / x3 * (x * c - s)
    };
    PairCoupling {
        g: g * GAMMA0,
        gamma: gamma * GAMMA0,
    }
}

/// Energy shift E_λ − ω0^imp and linewidth Γ_0λ of the two dimer eigenstates
/// for atoms separated by `r_ab` along ẑ.
pub fn dimer_eigenpair(r_ab: f64, parity: Parity) -> Result<(f64, f64)> {
    if !(r_ab > 0.0) {
        return Err(AwqError::Domain(format!("dimer separation must be positive, got {r_ab}")));
    }
    let pc = axial_pair_coupling(r_ab);
    let s = parity.sign();
    Ok((s * pc.g, GAMMA0 + s * pc.gamma))
}
