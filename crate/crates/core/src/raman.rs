//! Raman-driven Hamiltonians and their effective reductions.
//!
//! Every builder emits its matrix in the canonical frame: energies measured
//! from ω0, rotating with the drive, so chain sites sit at 0, impurity |e⟩
//! levels at ω0^imp and |g1⟩ levels at ω0^imp − Δ.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use serde::Serialize;

use crate::chain::{build_chain_hamiltonian, ModeSpectrum};
use crate::config::{DimerSpec, RamanDrive, SystemConfig};
use crate::coupling::{site_couplings, CouplingTable};
use crate::error::{AwqError, Result};
use crate::greens::{axial_pair_coupling, pair_amplitude, Parity};
use crate::hamiltonian::{Atom, BasisLabel, EffectiveHamiltonian, Level};
use crate::linalg::CMat;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

fn drive(config: &SystemConfig) -> Result<RamanDrive> {
    config
        .raman
        .ok_or_else(|| AwqError::InvalidConfig("this model needs a Raman drive".into()))
}

/// E_λ − ω0^imp and Γ_0λ of a dimer.
fn dimer_levels(dm: &DimerSpec, parity: Parity) -> (f64, f64) {
    let pc = axial_pair_coupling(dm.r_ab());
    let s = parity.sign();
    (s * pc.g, 1.0 + s * pc.gamma)
}

/// Δ_λ − iΓ_0λ/2: complex detuning between |g1⟩ and the |e⟩ dimer state λ.
fn raman_denominator(dm: &DimerSpec, r: &RamanDrive, parity: Parity) -> Complex64 {
    let (shift, width) = dimer_levels(dm, parity);
    Complex64::new(r.delta + shift, -0.5 * width)
}

/// Second-order shift −(Ω²/4)/(Δ_− − iΓ_0−/2) of the antisymmetric |g1⟩
/// dimer state. Its imaginary part is −Γ′/2 up to O(Γ0²/Δ²).
pub fn exact_light_shift(config: &SystemConfig, dimer: usize) -> Result<Complex64> {
    let r = drive(config)?;
    let dm = &config.dimers[dimer];
    Ok(-0.25 * r.omega * r.omega / raman_denominator(dm, &r, Parity::Anti))
}

/// Impurity detuning that places the second-order dressed energy of the
/// antisymmetric |g1⟩ state of `dimer` at `target`.
pub fn impurity_detuning_for_exact(config: &SystemConfig, dimer: usize, target: f64) -> Result<f64> {
    let r = drive(config)?;
    Ok(target + r.delta - exact_light_shift(config, dimer)?.re)
}

fn impurity_block(config: &SystemConfig, m: &mut CMat, offset: usize, with_ground: bool) {
    let per = if with_ground { 4 } else { 2 };
    let wd = config.impurity_detuning;
    for (i, dm) in config.dimers.iter().enumerate() {
        let base = offset + per * i;
        let ie = |a: usize| base + a * per / 2;
        let pc = pair_amplitude(&dm.atom_a(), &dm.atom_b()).amplitude();
        m[(ie(0), ie(0))] = Complex64::new(wd, -0.5);
        m[(ie(1), ie(1))] = Complex64::new(wd, -0.5);
        m[(ie(0), ie(1))] = pc;
        m[(ie(1), ie(0))] = pc;
        if let (true, Some(r)) = (with_ground, config.raman) {
            for a in 0..2 {
                let g = ie(a) + 1;
                m[(g, g)] = Complex64::new(wd - r.delta, 0.0);
                m[(g, ie(a))] = Complex64::new(0.5 * r.omega, 0.0);
                m[(ie(a), g)] = Complex64::new(0.5 * r.omega, 0.0);
            }
        }
    }
}

fn chain_impurity_block(config: &SystemConfig, m: &mut CMat, offset: usize, per: usize) {
    let n = config.chain.n();
    for (i, dm) in config.dimers.iter().enumerate() {
        for (a, atom) in dm.atoms().iter().enumerate() {
            let row = offset + per * i + a * per / 2;
            for (j, g) in site_couplings(atom, &config.chain).into_iter().enumerate() {
                m[(row, j)] = g;
                m[(j, row)] = g;
            }
        }
    }
    debug_assert!(offset == n);
}

fn chain_block(config: &SystemConfig, m: &mut CMat) {
    let h = build_chain_hamiltonian(&config.chain);
    let n = config.chain.n();
    for i in 0..n {
        for j in 0..n {
            m[(i, j)] = h.matrix[(i, j)];
        }
    }
}

/// Real-space Hamiltonian of chain sites plus, per impurity atom, |e⟩ and
/// |g1⟩. Basis size N + 4·(number of dimers).
pub fn build_full_raman(config: &SystemConfig) -> Result<EffectiveHamiltonian> {
    drive(config)?;
    let n = config.chain.n();
    let dim = n + 4 * config.dimers.len();
    let mut m = CMat::zeros(dim, dim);
    chain_block(config, &mut m);
    impurity_block(config, &mut m, n, true);
    chain_impurity_block(config, &mut m, n, 4);
    let mut basis: Vec<BasisLabel> = (1..=n).map(BasisLabel::Site).collect();
    for i in 0..config.dimers.len() {
        for atom in [Atom::A, Atom::B] {
            for level in [Level::E, Level::G1] {
                basis.push(BasisLabel::Atom { dimer: i, atom, level });
            }
        }
    }
    EffectiveHamiltonian::new(m, basis)
}

/// Real-space Hamiltonian without drive: chain sites plus the |e⟩ level of
/// every impurity atom. Basis size N + 2·(number of dimers).
pub fn build_full_undriven(config: &SystemConfig) -> Result<EffectiveHamiltonian> {
    let n = config.chain.n();
    let dim = n + 2 * config.dimers.len();
    let mut m = CMat::zeros(dim, dim);
    chain_block(config, &mut m);
    impurity_block(config, &mut m, n, false);
    chain_impurity_block(config, &mut m, n, 2);
    let mut basis: Vec<BasisLabel> = (1..=n).map(BasisLabel::Site).collect();
    for i in 0..config.dimers.len() {
        for atom in [Atom::A, Atom::B] {
            basis.push(BasisLabel::Atom { dimer: i, atom, level: Level::E });
        }
    }
    EffectiveHamiltonian::new(m, basis)
}

/// Simplified model: antisymmetric |g1⟩ dimer states plus guided modes.
///
/// Dimers sit at ω0^imp′ − iΓ′/2 with ω0^imp′ = ω0^imp − Δ − Ω²/(4Δ) and
/// Γ′ = (Ω²/4Δ²)Γ_0−; they couple to mode ν through −(Ω/2Δ)·g̃_ν^−. The sign
/// comes from the elimination of |e⟩ and does not affect populations.
pub fn build_effective_raman(config: &SystemConfig, spectrum: &ModeSpectrum, couplings: &CouplingTable) -> Result<EffectiveHamiltonian> {
    let r = drive(config)?;
    check_table(config, spectrum, couplings)?;
    let guided: Vec<usize> = spectrum.guided().map(|m| m.nu).collect();
    let nd = config.dimers.len();
    let dim = nd + guided.len();
    let mut m = CMat::zeros(dim, dim);
    let scale = r.coupling_scale();
    let omega_p = config.dressed_dimer_energy();
    for (i, dm) in config.dimers.iter().enumerate() {
        let (_, g0m) = dimer_levels(dm, Parity::Anti);
        m[(i, i)] = Complex64::new(omega_p, -0.5 * r.linewidth_scale() * g0m);
        for (c, &nu) in guided.iter().enumerate() {
            let g = -scale * couplings.total(i, Parity::Anti, nu);
            m[(i, nd + c)] = g;
            m[(nd + c, i)] = g;
        }
    }
    for (c, &nu) in guided.iter().enumerate() {
        m[(nd + c, nd + c)] = spectrum.mode(nu).eigenvalue();
    }
    let mut basis: Vec<BasisLabel> = (0..nd).map(|i| BasisLabel::Dimer { dimer: i, parity: Parity::Anti }).collect();
    basis.extend(guided.iter().map(|&nu| BasisLabel::Mode(nu)));
    EffectiveHamiltonian::new(m, basis)
}

/// Second-order eliminated model with both |g1⟩ dimer parities and every
/// chain mode, including the mode–mode correction
/// −Σ_{i,λ} g̃_ν^{iλ} g̃_ν′^{iλ}/(Δ_λ − iΓ_0λ/2).
pub fn build_full_effective(config: &SystemConfig, spectrum: &ModeSpectrum, couplings: &CouplingTable) -> Result<EffectiveHamiltonian> {
    let r = drive(config)?;
    check_table(config, spectrum, couplings)?;
    let n = spectrum.n;
    let nd = config.dimers.len();
    let dim = 2 * nd + n;
    let mut m = CMat::zeros(dim, dim);
    let half_omega = 0.5 * r.omega;
    let base = config.impurity_detuning - r.delta;
    for (i, dm) in config.dimers.iter().enumerate() {
        for (p, parity) in Parity::both().into_iter().enumerate() {
            let row = 2 * i + p;
            let den = raman_denominator(dm, &r, parity);
            m[(row, row)] = base - half_omega * half_omega / den;
            let gs: Vec<Complex64> = (1..=n).map(|nu| couplings.total(i, parity, nu)).collect();
            for a in 0..n {
                let g = -half_omega * gs[a] / den;
                m[(row, 2 * nd + a)] = g;
                m[(2 * nd + a, row)] = g;
                let ga = gs[a] / den;
                for b in 0..n {
                    m[(2 * nd + a, 2 * nd + b)] -= ga * gs[b];
                }
            }
        }
    }
    for nu in 1..=n {
        let a = 2 * nd + nu - 1;
        m[(a, a)] += spectrum.mode(nu).eigenvalue();
    }
    let mut basis = Vec::with_capacity(dim);
    for i in 0..nd {
        for parity in Parity::both() {
            basis.push(BasisLabel::Dimer { dimer: i, parity });
        }
    }
    basis.extend((1..=n).map(BasisLabel::Mode));
    EffectiveHamiltonian::new(m, basis)
}

fn check_table(config: &SystemConfig, spectrum: &ModeSpectrum, couplings: &CouplingTable) -> Result<()> {
    if couplings.n_dimers() != config.dimers.len() || couplings.anti.iter().any(|r| r.len() != spectrum.n) {
        return Err(AwqError::BasisMismatch("coupling table does not match config and spectrum".into()));
    }
    Ok(())
}

/// Corrections from adiabatically eliminating the symmetric dimer state and
/// the superradiant modes (k < k0) of an undriven dimer.
#[derive(Debug, Clone, Serialize)]
pub struct EliminationCorrections {
    /// A^λ = Σ_{k<k0} (g̃_k^λ)²/(Δ_k − iΓ_k/2), Δ_k = J_k − E_−.
    pub a_minus: Complex64,
    pub a_plus: Complex64,
    /// B = Σ_{k<k0} g̃_k^− g̃_k^+/(Δ_k − iΓ_k/2).
    pub b: Complex64,
    /// Δ_+ = E_+ − E_−.
    pub delta_plus: f64,
    /// D = Δ_+ − A^+ − iΓ_0+/2.
    pub denominator: Complex64,
    /// E_− − iΓ_0−/2 before and after the corrections.
    pub e_minus: Complex64,
    pub e_minus_corrected: Complex64,
    /// (ν, shift) of each guided mode energy: −(g̃_ν^+)²/D.
    pub mode_shifts: Vec<(usize, Complex64)>,
    /// (ν, corrected g̃_ν^−) = g̃_ν^− + B g̃_ν^+/D.
    pub corrected_couplings: Vec<(usize, Complex64)>,
}

impl EliminationCorrections {
    pub fn energy_correction(&self) -> Complex64 {
        self.e_minus_corrected - self.e_minus
    }
}

/// Schur-complement elimination for one undriven dimer.
pub fn adiabatic_corrections(config: &SystemConfig, spectrum: &ModeSpectrum, couplings: &CouplingTable, dimer: usize) -> Result<EliminationCorrections> {
    check_table(config, spectrum, couplings)?;
    let dm = config
        .dimers
        .get(dimer)
        .ok_or_else(|| AwqError::InvalidConfig(format!("no dimer {dimer}")))?;
    let (sm, wm) = dimer_levels(dm, Parity::Anti);
    let (sp, wp) = dimer_levels(dm, Parity::Sym);
    let e_minus_re = config.impurity_detuning + sm;
    let mut a_minus = ZERO;
    let mut a_plus = ZERO;
    let mut b = ZERO;
    for mode in spectrum.modes.iter().filter(|m| !m.guided) {
        let gm = couplings.total(dimer, Parity::Anti, mode.nu);
        let gp = couplings.total(dimer, Parity::Sym, mode.nu);
        let dk = mode.energy - e_minus_re;
        if dk.abs() < 0.5 * mode.gamma && gm.norm().max(gp.norm()) > 1e-9 {
            return Err(AwqError::Resonance(format!(
                "superradiant mode nu = {} lies within its linewidth of the dimer energy",
                mode.nu
            )));
        }
        let den = Complex64::new(dk, -0.5 * mode.gamma);
        a_minus += gm * gm / den;
        a_plus += gp * gp / den;
        b += gm * gp / den;
    }
    let delta_plus = sp - sm;
    let denominator = Complex64::new(delta_plus, -0.5 * wp) - a_plus;
    let e_minus = Complex64::new(e_minus_re, -0.5 * wm);
    let e_minus_corrected = e_minus - a_minus - b * b / denominator;
    let mut mode_shifts = Vec::new();
    let mut corrected_couplings = Vec::new();
    for mode in spectrum.guided() {
        let gm = couplings.total(dimer, Parity::Anti, mode.nu);
        let gp = couplings.total(dimer, Parity::Sym, mode.nu);
        mode_shifts.push((mode.nu, -gp * gp / denominator));
        corrected_couplings.push((mode.nu, gm + b * gp / denominator));
    }
    Ok(EliminationCorrections {
        a_minus,
        a_plus,
        b,
        delta_plus,
        denominator,
        e_minus,
        e_minus_corrected,
        mode_shifts,
        corrected_couplings,
    })
}

/// Undriven single-dimer model over {antisymmetric dimer, guided modes} with
/// the elimination corrections applied.
pub fn build_adiabatic_effective(config: &SystemConfig, spectrum: &ModeSpectrum, couplings: &CouplingTable) -> Result<EffectiveHamiltonian> {
    if config.dimers.len() != 1 {
        return Err(AwqError::InvalidConfig("the adiabatic model handles exactly one dimer".into()));
    }
    let c = adiabatic_corrections(config, spectrum, couplings, 0)?;
    let guided: Vec<usize> = spectrum.guided().map(|m| m.nu).collect();
    let dim = 1 + guided.len();
    let mut m = CMat::zeros(dim, dim);
    m[(0, 0)] = c.e_minus_corrected;
    for (a, &nu) in guided.iter().enumerate() {
        let g = c.corrected_couplings[a].1;
        m[(0, a + 1)] = g;
        m[(a + 1, 0)] = g;
        let gpa = couplings.total(0, Parity::Sym, nu);
        for (b, &nu2) in guided.iter().enumerate() {
            let gpb = couplings.total(0, Parity::Sym, nu2);
            m[(a + 1, b + 1)] = -gpa * gpb / c.denominator;
        }
        m[(a + 1, a + 1)] += spectrum.mode(nu).eigenvalue();
    }
    let mut basis = vec![BasisLabel::Dimer { dimer: 0, parity: Parity::Anti }];
    basis.extend(guided.iter().map(|&nu| BasisLabel::Mode(nu)));
    EffectiveHamiltonian::new(m, basis)
}

/// Dimer state (|a⟩ + λ|b⟩)/√2 on a pair of basis indices.
pub fn pair_state(dim: usize, ia: usize, ib: usize, parity: Parity) -> Vec<Complex64> {
    let mut v = vec![ZERO; dim];
    v[ia] = Complex64::new(FRAC_1_SQRT_2, 0.0);
    v[ib] = Complex64::new(parity.sign() * FRAC_1_SQRT_2, 0.0);
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{build_chain_hamiltonian, diagonalize_chain};
    use crate::config::{build_config, RawChain, RawDimer, RawScenario};
    use crate::coupling::{coupling_table, EnvelopeKind};
    use crate::linalg;

    fn config(n: usize, dimers: &[f64], raman: Option<RamanDrive>) -> SystemConfig {
        build_config(&RawScenario {
            chain: RawChain { n, d: 0.25 },
            dimers: dimers
                .iter()
                .map(|&c| RawDimer {
                    center: c,
                    rho0: None,
                    h: None,
                    parity: None,
                })
                .collect(),
            raman,
            impurity_detuning: 0.0,
            dimer_crosstalk_threshold: None,
        })
        .unwrap()
    }

    #[test]
    fn full_raman_dimension_and_symmetry() {
        let cfg = config(100, &[-5.0, 5.0], Some(RamanDrive { omega: 0.2, delta: 8.0 }));
        let h = build_full_raman(&cfg).unwrap();
        assert_eq!(h.dim(), 108);
        assert!(h.is_symmetric(0.0));
        assert!(h.gain_bound().unwrap() <= 1e-9);
    }

    #[test]
    fn isolated_dimer_dressing() {
        // Without the chain, the g1 antisymmetric state sits at
        // ω0^imp′ − iΓ′/2 up to O(Ω²Γ0/Δ²).
        let r = RamanDrive { omega: 0.2, delta: 8.0 };
        let cfg = config(2, &[3.0], Some(r));
        let h = build_full_raman(&cfg).unwrap();
        let n = 2;
        let block = CMat::from_fn(4, 4, |i, j| h.matrix[(n + i, n + j)]);
        let e = linalg::eig(&block).unwrap();
        let target = Complex64::new(cfg.dressed_dimer_energy(), 0.0);
        let best = e.values.iter().min_by(|a, b| (*a - target).norm().total_cmp(&(*b - target).norm())).unwrap();
        let (_, g0m) = crate::greens::dimer_eigenpair(0.25, Parity::Anti).unwrap();
        let gp = r.linewidth_scale() * g0m;
        let tol = r.omega * r.omega / (r.delta * r.delta);
        assert!((best.re - cfg.dressed_dimer_energy()).abs() < tol);
        // Γ′ is quoted at Δ; the dimer shift moves the |e⟩ state to Δ − g_ab.
        let (shift, _) = dimer_levels(&cfg.dimers[0], Parity::Anti);
        let scaled = gp * (r.delta / (r.delta + shift)).powi(2);
        assert!((-2.0 * best.im - scaled).abs() < 1e-2 * scaled);
        let exact = exact_light_shift(&cfg, 0).unwrap();
        assert!((best - Complex64::new(-r.delta, 0.0) - exact).norm() < 1e-6);
    }

    #[test]
    fn effective_model_scalings() {
        let r = RamanDrive { omega: 0.2, delta: 8.0 };
        let cfg = config(40, &[0.0], Some(r));
        let s = diagonalize_chain(&build_chain_hamiltonian(&cfg.chain)).unwrap();
        let t = coupling_table(&cfg, &s, EnvelopeKind::Finite).unwrap();
        let h = build_effective_raman(&cfg, &s, &t).unwrap();
        let gp = -2.0 * h.matrix[(0, 0)].im;
        assert!((gp - 1.5625e-4 * (1.0 - 24.0 / std::f64::consts::PI.powi(3))).abs() < 1e-12);
        assert!((gp - 3.531e-5).abs() < 1e-8);
        for (c, b) in h.basis.iter().enumerate().skip(1) {
            if let BasisLabel::Mode(nu) = *b {
                let ratio = h.matrix[(0, c)].norm() / t.total(0, Parity::Anti, nu).norm();
                if t.total(0, Parity::Anti, nu).norm() > 0.0 {
                    assert!((ratio - 0.0125).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn corrections_vanish_without_superradiant_coupling() {
        let cfg = config(60, &[0.0], None);
        let s = diagonalize_chain(&build_chain_hamiltonian(&cfg.chain)).unwrap();
        let t = coupling_table(&cfg, &s, EnvelopeKind::Finite).unwrap();
        let guided_only = t.masked(|nu| s.mode(nu).guided);
        let c = adiabatic_corrections(&cfg, &s, &guided_only, 0).unwrap();
        assert_eq!(c.a_minus, ZERO);
        assert_eq!(c.a_plus, ZERO);
        assert_eq!(c.b, ZERO);
        assert!(c.energy_correction().norm() == 0.0);
    }
}
