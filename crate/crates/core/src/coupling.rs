//! Couplings of impurity atoms, dimers and plaquettes to chain modes.
//!
//! Every coupling factorizes into a mode-independent lattice sum (the
//! "magnitude", carrying no 1/√N) and an envelope that depends on where the
//! impurity sits along a finite chain. Envelopes of the finite-chain ansatz
//! carry the √(2/(N+1)) normalization.

use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

use num_complex::Complex64;

use crate::chain::{ansatz_mode, ModeSpectrum};
use crate::config::{ChainGeometry, DimerSpec, SystemConfig};
use crate::error::{AwqError, Result};
use crate::greens::{pair_amplitude, Parity, Point};
use crate::par;
use crate::units::K0;

/// Orders |m| that are always summed before the stopping rule applies.
const MIN_ORDER: i32 = 5;
/// Largest |m| before the lattice sum is declared divergent.
const MAX_ORDER: i32 = 64;
const SUM_RTOL: f64 = 1e-12;

/// (1 − κ²)·H0⁽¹⁾(k0 h √(1 − κ²)) with the evanescent branch Im√ ≥ 0.
fn lattice_term(kappa: f64, h: f64) -> Result<Complex64> {
    let q = 1.0 - kappa * kappa;
    if q.abs() < 1e-14 {
        // (1 − κ²) ln|1 − κ²| → 0 at the light line.
        return Ok(Complex64::new(0.0, 0.0));
    }
    let sf = |e: complex_bessel::Error| AwqError::SpecialFunction(format!("{e:?}"));
    if q > 0.0 {
        let x = K0 * h * q.sqrt();
        let h0 = complex_bessel::hankel1(0.0, Complex64::new(x, 0.0)).map_err(sf)?;
        Ok(h0 * q)
    } else {
        // H0⁽¹⁾(i s) = −(2i/π) K0(s); the scaled form avoids underflow errors.
        let s = K0 * h * (-q).sqrt();
        let k0s = complex_bessel::besselk_scaled(0.0, Complex64::new(s, 0.0)).map_err(sf)?.re * (-s).exp();
        Ok(Complex64::new(0.0, -2.0 / PI * k0s * q))
    }
}

/// Σ_m w(m)·(1 − κ_m²)·H0⁽¹⁾(...), summed symmetrically in m until the last
/// pair of terms is negligible.
fn lattice_sum(k: f64, h: f64, d: f64, weight: impl Fn(i32) -> f64) -> Result<Complex64> {
    let term = |m: i32| -> Result<Complex64> {
        let w = weight(m);
        if w == 0.0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        Ok(lattice_term(k / K0 + m as f64 / d, h)? * w)
    };
    let mut acc = term(0)?;
    for m in 1..=MAX_ORDER {
        let pair = term(m)? + term(-m)?;
        acc += pair;
        let last = pair.norm();
        if m >= MIN_ORDER && last <= SUM_RTOL * acc.norm() {
            return Ok(acc);
        }
    }
    Err(AwqError::LatticeSumDiverged {
        max_order: MAX_ORDER,
        partial_re: acc.re,
        partial_im: acc.im,
    })
}

fn check_domain(k: f64, h: f64, d: f64) -> Result<()> {
    if !(h > 0.0) {
        return Err(AwqError::Domain(format!("standoff h must be positive, got {h}")));
    }
    if !(d > 0.0) {
        return Err(AwqError::Domain(format!("lattice spacing must be positive, got {d}")));
    }
    if k.abs() > PI / d * (1.0 + 1e-12) {
        return Err(AwqError::Domain(format!("|k| = {} exceeds the zone edge π/d", k.abs())));
    }
    Ok(())
}

/// |g_k| − i|γ_k|/2 of a single atom at standoff `h` from an infinite chain:
///
/// ```text
/// −(3i/8d) Σ_m (1 − κ_m²) H0⁽¹⁾(k0 h √(1 − κ_m²)),   κ_m = k/k0 + m/d
/// ```
pub fn single_atom_coupling(k: f64, h: f64, d: f64) -> Result<Complex64> {
    check_domain(k, h, d)?;
    let s = lattice_sum(k, h, d, |_| 1.0)?;
    Ok(Complex64::new(0.0, -3.0 / (8.0 * d)) * s)
}

/// |g_k^λ| − i|γ_k^λ|/2 of a dimer with half-separation `rho0` centered on a
/// chain-site midpoint. At ρ0 = d/2 this is √2·sin(kd/2) (λ = −1) or
/// √2·cos(kd/2) (λ = +1) times the single-atom sum; below d/2 the phase
/// factor sin[kρ0 + (2ρ0/d − 1)πm] (or its cosine) enters each lattice term.
pub fn dimer_coupling(k: f64, h: f64, d: f64, parity: Parity, rho0: f64) -> Result<Complex64> {
    check_domain(k, h, d)?;
    if !(rho0 > 0.0) || rho0 > 0.5 * d * (1.0 + 1e-12) {
        return Err(AwqError::Domain(format!("rho0 must lie in (0, d/2], got {rho0}")));
    }
    let pref = Complex64::new(0.0, -3.0 / (4.0 * SQRT_2 * d));
    if (rho0 - 0.5 * d).abs() <= 1e-12 * d {
        let f = match parity {
            Parity::Anti => (0.5 * k * d).sin(),
            Parity::Sym => (0.5 * k * d).cos(),
        };
        if f == 0.0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        return Ok(pref * f * lattice_sum(k, h, d, |_| 1.0)?);
    }
    let phase = |m: i32| k * rho0 + (2.0 * rho0 / d - 1.0) * PI * m as f64;
    let s = match parity {
        Parity::Anti => lattice_sum(k, h, d, |m| phase(m).sin())?,
        Parity::Sym => lattice_sum(k, h, d, |m| phase(m).cos())?,
    };
    Ok(pref * s)
}

/// Finite-chain envelope ξ_{k_ν}^λ(ρ) of a dimer centered at `rho`.
///
/// For λ = −1 it is c·sin(k_ν ρ) for odd ν and −c·cos(k_ν ρ) for even ν; for
/// λ = +1 it is c·cos(k_ν ρ) for odd ν and c·sin(k_ν ρ) for even ν, with
/// c = √(2/(N+1)). The sign of the λ = −1, even-ν branch makes the product
/// of envelope and magnitude equal to the real-space matrix element
/// ⟨dimer|H|ξ_ν⟩ for both parities at once.
pub fn finite_envelope(nu: usize, rho: f64, parity: Parity, geometry: &ChainGeometry) -> f64 {
    let n = geometry.n();
    assert!((1..=n).contains(&nu), "mode index {nu} outside 1..={n}");
    let k = crate::chain::ansatz_k(nu, n, geometry.d());
    let c = (2.0 / (n as f64 + 1.0)).sqrt();
    let odd = nu % 2 == 1;
    match (parity, odd) {
        (Parity::Anti, true) => c * (k * rho).sin(),
        (Parity::Anti, false) => -c * (k * rho).cos(),
        (Parity::Sym, true) => c * (k * rho).cos(),
        (Parity::Sym, false) => c * (k * rho).sin(),
    }
}

/// Bloch-wave envelope e^{ikρ}/√N of an infinite chain.
pub fn infinite_envelope(k: f64, rho: f64, n: usize) -> Complex64 {
    Complex64::from_polar(1.0 / (n as f64).sqrt(), k * rho)
}

/// Envelope convention used when tabulating couplings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnvelopeKind {
    Finite,
    Infinite,
}

/// A coupling split into its lattice-sum magnitude and its envelope.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingAmplitude {
    /// |g| − i|γ|/2.
    pub magnitude: Complex64,
    pub envelope: Complex64,
}

impl CouplingAmplitude {
    /// g̃ = ξ·(|g| − i|γ|/2).
    pub fn total(&self) -> Complex64 {
        self.envelope * self.magnitude
    }
}

/// Couplings of every dimer to every chain mode, for both parities.
#[derive(Debug, Clone)]
pub struct CouplingTable {
    /// Indexed `[dimer][nu - 1]`.
    pub anti: Vec<Vec<CouplingAmplitude>>,
    pub sym: Vec<Vec<CouplingAmplitude>>,
}

impl CouplingTable {
    pub fn get(&self, dimer: usize, parity: Parity, nu: usize) -> CouplingAmplitude {
        match parity {
            Parity::Anti => self.anti[dimer][nu - 1],
            Parity::Sym => self.sym[dimer][nu - 1],
        }
    }

    pub fn total(&self, dimer: usize, parity: Parity, nu: usize) -> Complex64 {
        self.get(dimer, parity, nu).total()
    }

    pub fn n_dimers(&self) -> usize {
        self.anti.len()
    }

    /// A copy with every mode outside `keep` zeroed.
    pub fn masked(&self, keep: impl Fn(usize) -> bool) -> Self {
        let zero = CouplingAmplitude {
            magnitude: Complex64::new(0.0, 0.0),
            envelope: Complex64::new(0.0, 0.0),
        };
        let mask = |rows: &Vec<Vec<CouplingAmplitude>>| {
            rows.iter()
                .map(|r| r.iter().enumerate().map(|(i, c)| if keep(i + 1) { *c } else { zero }).collect())
                .collect()
        };
        Self {
            anti: mask(&self.anti),
            sym: mask(&self.sym),
        }
    }
}

/// Tabulate closed-form couplings of each configured dimer to each mode of
/// `spectrum`. Mode rows are evaluated concurrently.
pub fn coupling_table(config: &SystemConfig, spectrum: &ModeSpectrum, kind: EnvelopeKind) -> Result<CouplingTable> {
    let d = config.chain.d();
    let n = spectrum.n;
    let mut anti = Vec::with_capacity(config.dimers.len());
    let mut sym = Vec::with_capacity(config.dimers.len());
    for dm in &config.dimers {
        let rows: Vec<Result<(CouplingAmplitude, CouplingAmplitude)>> = par::map(&spectrum.modes, |m| {
            let ga = dimer_coupling(m.k, dm.h, d, Parity::Anti, dm.rho0)?;
            let gs = dimer_coupling(m.k, dm.h, d, Parity::Sym, dm.rho0)?;
            let (ea, es) = match kind {
                EnvelopeKind::Finite => (
                    Complex64::from(finite_envelope(m.nu, dm.center, Parity::Anti, &config.chain)),
                    Complex64::from(finite_envelope(m.nu, dm.center, Parity::Sym, &config.chain)),
                ),
                EnvelopeKind::Infinite => {
                    let e = infinite_envelope(m.k, dm.center, n);
                    (e, e)
                }
            };
            Ok((
                CouplingAmplitude {
                    magnitude: ga,
                    envelope: ea,
                },
                CouplingAmplitude {
                    magnitude: gs,
                    envelope: es,
                },
            ))
        });
        let mut ra = Vec::with_capacity(n);
        let mut rs = Vec::with_capacity(n);
        for r in rows {
            let (a, s) = r?;
            ra.push(a);
            rs.push(s);
        }
        anti.push(ra);
        sym.push(rs);
    }
    Ok(CouplingTable { anti, sym })
}

/// Real-space couplings −3πΓ0·G_zz(r, z_j) from a point to every chain site.
pub fn site_couplings(point: &Point, geometry: &ChainGeometry) -> Vec<Complex64> {
    (0..geometry.n())
        .map(|j| pair_amplitude(point, &geometry.site(j)).amplitude())
        .collect()
}

/// Brute-force matrix element ⟨dimer λ|H|ξ_ν⟩ from the real-space couplings.
pub fn brute_force_dimer_coupling(dimer: &DimerSpec, parity: Parity, nu: usize, geometry: &ChainGeometry) -> Complex64 {
    let xi = ansatz_mode(nu, geometry);
    let a = site_couplings(&dimer.atom_a(), geometry);
    let b = site_couplings(&dimer.atom_b(), geometry);
    let s = parity.sign();
    xi.iter()
        .zip(a.iter().zip(&b))
        .map(|(x, (ga, gb))| (ga + gb * s) * (x * FRAC_1_SQRT_2))
        .sum()
}

/// The plaquette state (|A⟩ − |B⟩ − |C⟩ + |D⟩)/2 on four atoms: A, B at
/// standoff h (lower and upper z), C, D at standoff h + d.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaquetteState {
    pub atoms: [Point; 4],
    pub amplitudes: [f64; 4],
}

/// Build the plaquette from a config holding two dimers with a common center
/// and half-separation, at standoffs h and h + d.
pub fn plaquette_state(config: &SystemConfig) -> Result<PlaquetteState> {
    let d = config.chain.d();
    let [inner, outer] = match config.dimers.as_slice() {
        [a, b] => {
            if a.h <= b.h {
                [*a, *b]
            } else {
                [*b, *a]
            }
        }
        _ => return Err(AwqError::InvalidConfig("a plaquette needs exactly two dimers".into())),
    };
    let aligned = (inner.center - outer.center).abs() < 1e-12
        && (inner.rho0 - outer.rho0).abs() < 1e-12
        && ((outer.h - inner.h) - d).abs() < 1e-12;
    if !aligned {
        return Err(AwqError::InvalidConfig(
            "plaquette dimers must share center and rho0 and sit at standoffs h and h + d".into(),
        ));
    }
    Ok(PlaquetteState {
        atoms: [inner.atom_a(), inner.atom_b(), outer.atom_a(), outer.atom_b()],
        amplitudes: [0.5, -0.5, -0.5, 0.5],
    })
}

impl PlaquetteState {
    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a * a).sum::<f64>().sqrt()
    }

    /// Free-space decay rate ⟨ψ|γ|ψ⟩ from the four-atom dissipative couplings.
    pub fn free_space_linewidth(&self) -> f64 {
        let mut s = 0.0;
        for (i, ai) in self.atoms.iter().enumerate() {
            for (j, aj) in self.atoms.iter().enumerate() {
                s += self.amplitudes[i] * self.amplitudes[j] * pair_amplitude(ai, aj).gamma;
            }
        }
        s
    }

    /// Brute-force matrix element ⟨ψ|H|ξ_ν⟩.
    pub fn mode_coupling(&self, nu: usize, geometry: &ChainGeometry) -> Complex64 {
        let xi = ansatz_mode(nu, geometry);
        let mut s = Complex64::new(0.0, 0.0);
        for (atom, amp) in self.atoms.iter().zip(self.amplitudes) {
            let g = site_couplings(atom, geometry);
            s += g.iter().zip(&xi).map(|(g, x)| g * (x * amp)).sum::<Complex64>();
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const D: f64 = 0.25;

    #[test]
    fn guided_coupling_is_real() {
        let g = single_atom_coupling(0.9 * PI / D, D, D).unwrap();
        assert!(g.im.abs() < 1e-9, "{g}");
        assert!(g.re > 0.0);
    }

    #[test]
    fn transverse_decay() {
        let k = 0.9 * PI / D;
        let near = single_atom_coupling(k, D, D).unwrap().norm();
        let far = single_atom_coupling(k, 4.0, D).unwrap().norm();
        assert!(far < 1e-3 * near);
    }

    #[test]
    fn coupling_is_even_in_k() {
        for &f in &[0.1, 0.4, 0.77] {
            let k = f * PI / D;
            let a = single_atom_coupling(k, D, D).unwrap();
            let b = single_atom_coupling(-k, D, D).unwrap();
            assert!((a - b).norm() < 1e-12 * a.norm());
        }
    }

    #[test]
    fn domain_errors() {
        assert!(single_atom_coupling(1.0, 0.0, D).is_err());
        assert!(single_atom_coupling(1.1 * PI / D, D, D).is_err());
        assert!(dimer_coupling(1.0, D, D, Parity::Anti, 0.2).is_err());
        assert!(matches!(
            single_atom_coupling(0.5 * PI / D, 1e-4, D),
            Err(AwqError::LatticeSumDiverged { .. })
        ));
    }

    #[test]
    fn parity_zeros() {
        assert!(dimer_coupling(0.0, D, D, Parity::Anti, D / 2.0).unwrap().norm() < 1e-15);
        assert!(dimer_coupling(PI / D, D, D, Parity::Sym, D / 2.0).unwrap().norm() < 1e-15);
    }

    #[test]
    fn dimer_is_sqrt2_sine_times_atom() {
        for i in 1..40 {
            let k = i as f64 / 40.0 * PI / D;
            let atom = single_atom_coupling(k, D, D).unwrap();
            let anti = dimer_coupling(k, D, D, Parity::Anti, D / 2.0).unwrap();
            let sym = dimer_coupling(k, D, D, Parity::Sym, D / 2.0).unwrap();
            assert!((anti.norm() - SQRT_2 * (k * D / 2.0).sin() * atom.norm()).abs() < 1e-12 * atom.norm());
            let sum = anti.norm_sqr() + sym.norm_sqr();
            assert!((sum - 2.0 * atom.norm_sqr()).abs() < 1e-10 * atom.norm_sqr());
        }
    }

    #[test]
    fn general_rho0_reduces_to_aligned() {
        let k = 0.8 * PI / D;
        for p in Parity::both() {
            let a = dimer_coupling(k, D, D, p, D / 2.0).unwrap();
            let b = dimer_coupling(k, D, D, p, D / 2.0 * (1.0 - 1e-9)).unwrap();
            assert!((a - b).norm() < 1e-6 * a.norm());
        }
    }

    #[test]
    fn envelope_properties() {
        let g = ChainGeometry::new(50, D).unwrap();
        let c = (2.0 / 51.0f64).sqrt();
        for nu in 1..=50 {
            for p in Parity::both() {
                for &rho in &[-1.3, 0.0, 0.125, 2.6] {
                    assert!(finite_envelope(nu, rho, p, &g).abs() <= c + 1e-15);
                }
            }
            if nu % 2 == 1 {
                assert_eq!(finite_envelope(nu, 0.0, Parity::Anti, &g), 0.0);
            } else {
                assert_eq!(finite_envelope(nu, 0.0, Parity::Sym, &g), 0.0);
            }
        }
    }

    #[test]
    fn plaquette_basics() {
        let raw = crate::config::RawScenario {
            chain: crate::config::RawChain { n: 50, d: D },
            dimers: vec![
                crate::config::RawDimer {
                    center: 0.0,
                    rho0: None,
                    h: Some(D),
                    parity: None,
                },
                crate::config::RawDimer {
                    center: 0.0,
                    rho0: None,
                    h: Some(2.0 * D),
                    parity: None,
                },
            ],
            raman: None,
            impurity_detuning: 0.0,
            dimer_crosstalk_threshold: None,
        };
        let cfg = crate::config::build_config(&raw).unwrap();
        let p = plaquette_state(&cfg).unwrap();
        assert!((p.norm() - 1.0).abs() < 1e-15);
        // Reflections z → −z swap (A, B) and (C, D); x-reflection about the
        // plaquette center swaps (A, C) and (B, D). Both flip the sign.
        let a = p.amplitudes;
        assert_eq!([a[1], a[0], a[3], a[2]], a.map(|x| -x));
        assert_eq!([a[2], a[3], a[0], a[1]], a.map(|x| -x));
        let (_, gamma_dimer) = crate::greens::dimer_eigenpair(D, Parity::Anti).unwrap();
        assert!(p.free_space_linewidth() < gamma_dimer);
    }
}
