//! Geometry and drive description of a chain with impurity dimers.
//!
//! Raw scenario files are deserialized into [`RawScenario`] and validated by
//! [`build_config`]. Mathematical domain violations are errors; physical
//! regime violations (strong drive, nearby dimers) only produce diagnostics,
//! since the full Hamiltonian stays simulable outside the perturbative regime.

use serde::{Deserialize, Serialize};

use crate::error::{AwqError, Result};
use crate::greens::{pair_amplitude, Parity, Point};
use crate::units::{UnitSystem, MIN_ATOM_SEPARATION};

/// Default bound on |−3πΓ0·G_zz| between atoms of different dimers.
pub const DEFAULT_DIMER_CROSSTALK: f64 = 1e-2;

/// Regime of validity of the Raman elimination: Δ ≥ 5Γ0 and Ω ≤ Γ0/2.
pub const RAMAN_MIN_DETUNING: f64 = 5.0;
pub const RAMAN_MAX_RABI: f64 = 0.5;

/// A uniform chain of `n` atoms with spacing `d`, centered at z = 0.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainGeometry {
    n: usize,
    d: f64,
    positions: Vec<f64>,
}

impl ChainGeometry {
    pub fn new(n: usize, d: f64) -> Result<Self> {
        if n < 2 {
            return Err(AwqError::InvalidConfig(format!("chain needs at least 2 atoms, got {n}")));
        }
        if !(d > 0.0) || !d.is_finite() {
            return Err(AwqError::InvalidConfig(format!("lattice spacing must be positive, got {d}")));
        }
        if d >= 0.5 {
            return Err(AwqError::InvalidConfig(format!(
                "lattice spacing {d} is not subwavelength (need d < λ0/2)"
            )));
        }
        let center = (n as f64 + 1.0) / 2.0;
        let positions = (1..=n).map(|i| d * (i as f64 - center)).collect();
        Ok(Self { n, d, positions })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    /// Site positions z_i = d·(i − (N+1)/2), i = 1..N.
    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn site(&self, i: usize) -> Point {
        [0.0, 0.0, self.positions[i]]
    }

    /// Total chain length N·d.
    pub fn length(&self) -> f64 {
        self.n as f64 * self.d
    }

    /// Whether `z` coincides (to 1e-9 λ0) with a midpoint between neighbouring sites.
    pub fn is_midpoint(&self, z: f64) -> bool {
        let first = self.positions[0] + 0.5 * self.d;
        let u = (z - first) / self.d;
        let idx = u.round();
        (u - idx).abs() * self.d < 1e-9 && idx >= 0.0 && (idx as usize) < self.n - 1
    }

    /// The chain-site midpoint nearest to `z`.
    pub fn nearest_midpoint(&self, z: f64) -> f64 {
        let first = self.positions[0] + 0.5 * self.d;
        let idx = ((z - first) / self.d).round().clamp(0.0, (self.n - 2) as f64);
        first + idx * self.d
    }
}

/// Two impurity atoms at (h, 0, ρ ∓ ρ0) prepared in the state with parity λ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DimerSpec {
    pub center: f64,
    pub rho0: f64,
    pub h: f64,
    pub parity: Parity,
}

impl DimerSpec {
    /// Atom "a" sits at ρ − ρ0, atom "b" at ρ + ρ0.
    pub fn atom_a(&self) -> Point {
        [self.h, 0.0, self.center - self.rho0]
    }

    pub fn atom_b(&self) -> Point {
        [self.h, 0.0, self.center + self.rho0]
    }

    pub fn atoms(&self) -> [Point; 2] {
        [self.atom_a(), self.atom_b()]
    }

    /// Intra-dimer separation r_ab = 2ρ0.
    pub fn r_ab(&self) -> f64 {
        2.0 * self.rho0
    }

    /// Aligned with the chain: ρ0 = d/2 and the center on a site midpoint.
    pub fn is_aligned(&self, chain: &ChainGeometry) -> bool {
        (self.rho0 - 0.5 * chain.d()).abs() < 1e-12 && chain.is_midpoint(self.center)
    }
}

/// Raman drive on the |g1⟩ ↔ |e⟩ transition of every impurity atom.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RamanDrive {
    /// Rabi frequency Ω (Γ0 units).
    pub omega: f64,
    /// Detuning Δ (Γ0 units).
    pub delta: f64,
}

impl RamanDrive {
    pub fn in_regime(&self) -> bool {
        self.delta >= RAMAN_MIN_DETUNING && self.omega <= RAMAN_MAX_RABI
    }

    /// Amplitude rescaling Ω/(2Δ) of the effective dimer–chain coupling.
    pub fn coupling_scale(&self) -> f64 {
        self.omega / (2.0 * self.delta)
    }

    /// Linewidth rescaling Ω²/(4Δ²).
    pub fn linewidth_scale(&self) -> f64 {
        let s = self.coupling_scale();
        s * s
    }

    /// Second-order light shift −Ω²/(4Δ) of |g1⟩.
    pub fn light_shift(&self) -> f64 {
        -self.omega * self.omega / (4.0 * self.delta)
    }
}

/// Validated system description.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    pub units: UnitSystem,
    pub chain: ChainGeometry,
    pub dimers: Vec<DimerSpec>,
    pub raman: Option<RamanDrive>,
    /// δω = ω0^imp − ω0 (Γ0 units).
    pub impurity_detuning: f64,
    /// Non-fatal regime warnings collected during validation.
    pub diagnostics: Vec<String>,
}

impl SystemConfig {
    /// ω0^imp′ = ω0^imp − Δ − Ω²/(4Δ), or ω0^imp when undriven.
    pub fn dressed_dimer_energy(&self) -> f64 {
        match self.raman {
            Some(r) => self.impurity_detuning - r.delta + r.light_shift(),
            None => self.impurity_detuning,
        }
    }

    /// Inverse of [`dressed_dimer_energy`](Self::dressed_dimer_energy): the raw
    /// impurity detuning that places ω0^imp′ at `target`.
    pub fn impurity_detuning_for(&self, target: f64) -> f64 {
        match self.raman {
            Some(r) => target + r.delta - r.light_shift(),
            None => target,
        }
    }

    /// A copy with the impurity detuned so that ω0^imp′ = `target`.
    pub fn with_dressed_energy(&self, target: f64) -> Self {
        let mut out = self.clone();
        out.impurity_detuning = self.impurity_detuning_for(target);
        out
    }

    pub fn to_raw(&self) -> RawScenario {
        RawScenario {
            chain: RawChain {
                n: self.chain.n(),
                d: self.chain.d(),
            },
            dimers: self
                .dimers
                .iter()
                .map(|dm| RawDimer {
                    center: dm.center,
                    rho0: Some(dm.rho0),
                    h: Some(dm.h),
                    parity: Some(dm.parity.sign() as i32),
                })
                .collect(),
            raman: self.raman,
            impurity_detuning: self.impurity_detuning,
            dimer_crosstalk_threshold: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawChain {
    pub n: usize,
    pub d: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawDimer {
    pub center: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parity: Option<i32>,
}

/// Scenario file layout. All numbers are in [`UnitSystem`] units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawScenario {
    pub chain: RawChain,
    #[serde(default)]
    pub dimers: Vec<RawDimer>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub raman: Option<RamanDrive>,
    #[serde(default)]
    pub impurity_detuning: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dimer_crosstalk_threshold: Option<f64>,
}

/// Validate raw parameters into a [`SystemConfig`].
pub fn build_config(raw: &RawScenario) -> Result<SystemConfig> {
    let chain = ChainGeometry::new(raw.chain.n, raw.chain.d)?;
    let d = chain.d();
    let mut diagnostics = Vec::new();

    if !raw.impurity_detuning.is_finite() {
        return Err(AwqError::InvalidConfig("impurity_detuning must be finite".into()));
    }

    let mut dimers = Vec::with_capacity(raw.dimers.len());
    for (i, rd) in raw.dimers.iter().enumerate() {
        let rho0 = rd.rho0.unwrap_or(0.5 * d);
        let h = rd.h.unwrap_or(d);
        let parity = match rd.parity {
            None => Parity::Anti,
            Some(p) => Parity::from_sign(p).ok_or_else(|| {
                AwqError::InvalidConfig(format!("dimer {i}: parity must be -1 or +1, got {p}"))
            })?,
        };
        if !rd.center.is_finite() {
            return Err(AwqError::InvalidConfig(format!("dimer {i}: center must be finite")));
        }
        if !(h > 0.0) || !h.is_finite() {
            return Err(AwqError::InvalidConfig(format!("dimer {i}: standoff h must be positive, got {h}")));
        }
        if !(rho0 > 0.0) || rho0 > 0.5 * d + 1e-12 {
            return Err(AwqError::InvalidConfig(format!(
                "dimer {i}: half-separation rho0 must lie in (0, d/2], got {rho0}"
            )));
        }
        let dm = DimerSpec {
            center: rd.center,
            rho0,
            h,
            parity,
        };
        if dm.r_ab() >= 0.5 {
            diagnostics.push(format!(
                "dimer {i}: r_ab = {} is not below λ0/2; no subradiant dimer state",
                dm.r_ab()
            ));
        }
        if dm.center.abs() + rho0 > chain.length() / 2.0 {
            diagnostics.push(format!("dimer {i}: sits beyond the chain ends"));
        }
        dimers.push(dm);
    }

    check_overlaps(&chain, &dimers)?;

    let threshold = raw.dimer_crosstalk_threshold.unwrap_or(DEFAULT_DIMER_CROSSTALK);
    for i in 0..dimers.len() {
        for j in (i + 1)..dimers.len() {
            let worst = dimers[i]
                .atoms()
                .iter()
                .flat_map(|a| dimers[j].atoms().map(|b| pair_amplitude(a, &b).amplitude().norm()))
                .fold(0.0, f64::max);
            if worst >= threshold {
                diagnostics.push(format!(
                    "dimers {i} and {j}: direct free-space coupling {worst:.3e} exceeds {threshold:.1e}"
                ));
            }
        }
    }

    if let Some(r) = raw.raman {
        if !(r.omega >= 0.0) || !r.omega.is_finite() {
            return Err(AwqError::InvalidConfig(format!("Rabi frequency must be non-negative, got {}", r.omega)));
        }
        if !r.delta.is_finite() || r.delta == 0.0 {
            return Err(AwqError::InvalidConfig(format!("Raman detuning must be finite and nonzero, got {}", r.delta)));
        }
        if !r.in_regime() {
            diagnostics.push(format!(
                "Raman drive (Ω = {}, Δ = {}) is outside Δ ≥ {RAMAN_MIN_DETUNING}Γ0, Ω ≤ {RAMAN_MAX_RABI}Γ0",
                r.omega, r.delta
            ));
        }
    }

    Ok(SystemConfig {
        units: UnitSystem::default(),
        chain,
        dimers,
        raman: raw.raman,
        impurity_detuning: raw.impurity_detuning,
        diagnostics,
    })
}

fn check_overlaps(chain: &ChainGeometry, dimers: &[DimerSpec]) -> Result<()> {
    let too_close = |first: String, second: String, sep: f64| AwqError::AtomsTooClose {
        first,
        second,
        separation: sep,
        min_separation: MIN_ATOM_SEPARATION,
    };
    let atoms: Vec<(String, Point)> = dimers
        .iter()
        .enumerate()
        .flat_map(|(i, dm)| [(format!("dimer {i} atom a"), dm.atom_a()), (format!("dimer {i} atom b"), dm.atom_b())])
        .collect();
    for (i, (la, a)) in atoms.iter().enumerate() {
        for (lb, b) in &atoms[i + 1..] {
            let sep = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt();
            if sep < MIN_ATOM_SEPARATION {
                return Err(too_close(la.clone(), lb.clone(), sep));
            }
        }
        // Chain atoms lie on the z axis; the nearest one bounds the separation.
        let z = a[2];
        let nearest = chain
            .positions()
            .iter()
            .map(|zc| (zc - z).abs())
            .fold(f64::INFINITY, f64::min);
        let sep = (a[0] * a[0] + a[1] * a[1] + nearest * nearest).sqrt();
        if sep < MIN_ATOM_SEPARATION {
            return Err(too_close(la.clone(), "chain".into(), sep));
        }
    }
    Ok(())
}
