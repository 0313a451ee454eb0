#![allow(dead_code)]

use awq_core::chain::{build_chain_hamiltonian, diagonalize_chain, ModeSpectrum};
use awq_core::config::{build_config, RamanDrive, RawChain, RawDimer, RawScenario, SystemConfig};
use awq_core::coupling::{coupling_table, CouplingTable, EnvelopeKind};

pub const D: f64 = 0.25;

pub fn dimer(center: f64) -> RawDimer {
    RawDimer { center, rho0: None, h: None, parity: None }
}

pub fn scenario(n: usize, centers: &[f64], omega: f64, delta: f64) -> SystemConfig {
    let raw = RawScenario {
        chain: RawChain { n, d: D },
        dimers: centers.iter().map(|&c| dimer(c)).collect(),
        raman: Some(RamanDrive { omega, delta }),
        impurity_detuning: 0.0,
        dimer_crosstalk_threshold: None,
    };
    build_config(&raw).unwrap()
}

/// Drive used for in-band emission: Ω = 0.2, Δ = 8.
pub fn in_band(n: usize, centers: &[f64]) -> SystemConfig {
    scenario(n, centers, 0.2, 8.0)
}

/// Weak drive used in the band gap: Ω = 0.03, Δ = 200.
pub fn gap_drive(n: usize, centers: &[f64]) -> SystemConfig {
    scenario(n, centers, 0.03, 200.0)
}

pub fn spectrum(config: &SystemConfig) -> ModeSpectrum {
    diagonalize_chain(&build_chain_hamiltonian(&config.chain)).unwrap()
}

pub fn solve(config: &SystemConfig) -> (ModeSpectrum, CouplingTable) {
    let s = spectrum(config);
    let c = coupling_table(config, &s, EnvelopeKind::Finite).unwrap();
    (s, c)
}

/// Two dimer centers on chain midpoints, `m` lattice spacings apart.
pub fn pair(m: usize) -> [f64; 2] {
    let a = -((m / 2) as f64) * D;
    [a, a + m as f64 * D]
}
