//! Dimer–dimer couplings mediated by the chain when the dimers sit in the
//! band gap, and the error budget of a Rabi exchange.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::chain::{band_edge_closed_form, fit_band_edge, ModeSpectrum};
use crate::config::SystemConfig;
use crate::coupling::{dimer_coupling, CouplingTable};
use crate::error::{AwqError, Result};
use crate::greens::{dimer_eigenpair, Parity};

/// Band-edge quantities shared by the closed forms.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct EdgeParameters {
    pub n: usize,
    pub d: f64,
    /// Band curvature from the infinite-chain closed form.
    pub a_d: f64,
    /// Γ_μ ≈ γ_N μ²/N² near the edge (fitted).
    pub gamma_n: f64,
    /// J_{π/d}, extrapolated from the top modes.
    pub j_edge: f64,
    /// J_{k_N}, the highest discrete mode.
    pub j_top: f64,
    /// Ω/2Δ.
    pub coupling_scale: f64,
    /// |G^−(π/d)|: N-independent dimer coupling magnitude at the edge.
    pub g_edge: f64,
    /// Γ_0− of the bare dimer.
    pub gamma0_minus: f64,
    /// Γ′_{0−} = (Ω/2Δ)²Γ_0−.
    pub gamma_prime: f64,
}

impl EdgeParameters {
    /// g′_{π/d} = (Ω/2Δ)|G^−(π/d)|/√N.
    pub fn g_prime(&self) -> f64 {
        self.coupling_scale * self.g_edge / (self.n as f64).sqrt()
    }

    /// Ã_d = A_d + iγ_N/2.
    pub fn a_tilde(&self) -> Complex64 {
        Complex64::new(self.a_d, 0.5 * self.gamma_n)
    }
}

pub fn edge_parameters(config: &SystemConfig, spectrum: &ModeSpectrum, dimer: usize) -> Result<EdgeParameters> {
    let r = config
        .raman
        .ok_or_else(|| AwqError::InvalidConfig("band-gap couplings need a Raman drive".into()))?;
    let dm = config
        .dimers
        .get(dimer)
        .ok_or_else(|| AwqError::InvalidConfig(format!("no dimer {dimer}")))?;
    let fit = fit_band_edge(spectrum)?;
    let d = spectrum.d;
    let (_, g0m) = dimer_eigenpair(dm.r_ab(), Parity::Anti)?;
    Ok(EdgeParameters {
        n: spectrum.n,
        d,
        a_d: band_edge_closed_form(d)?,
        gamma_n: fit.gamma_n,
        j_edge: fit.j_edge,
        j_top: spectrum.top_energy(),
        coupling_scale: r.coupling_scale(),
        g_edge: dimer_coupling(PI / d, dm.h, d, Parity::Anti, dm.rho0)?.norm(),
        gamma0_minus: g0m,
        gamma_prime: r.linewidth_scale() * g0m,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CouplingMethod {
    Discrete,
    Continuum,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct LongRangeCoupling {
    pub g_eff: Complex64,
    /// e^{i(π/d)(ρ_i−ρ_j)} for the continuum form, 1 for the discrete sum
    /// (whose envelopes already carry the sign).
    pub phase: Complex64,
    /// √(A_d/δ) when δ > 0.
    pub l: Option<f64>,
    /// ω0^imp′ − J_{π/d}.
    pub delta: f64,
    /// ω0^imp′ − J_{k_N}.
    pub delta2: f64,
    /// Re g_eff / δ (or / δ2 when δ ≤ 0).
    pub epsilon: f64,
    pub method: CouplingMethod,
}

fn epsilon_of(g: Complex64, delta: f64, delta2: f64) -> f64 {
    if delta > 0.0 {
        g.re / delta
    } else {
        g.re / delta2
    }
}

/// (Ω/2Δ)² Σ_{guided ν} g̃_ν^i g̃_ν^j / (ω0^imp′ − J_ν + iΓ_ν/2) with the
/// finite-chain envelopes.
pub fn g_eff_discrete(config: &SystemConfig, spectrum: &ModeSpectrum, couplings: &CouplingTable, edge: &EdgeParameters, i: usize, j: usize) -> Result<LongRangeCoupling> {
    if i >= couplings.n_dimers() || j >= couplings.n_dimers() {
        return Err(AwqError::InvalidConfig(format!("dimer index out of range: {i}, {j}")));
    }
    let omega = config.dressed_dimer_energy();
    let mut acc = Complex64::new(0.0, 0.0);
    for m in spectrum.guided() {
        let det = omega - m.energy;
        if det.abs() < m.gamma {
            return Err(AwqError::Resonance(format!(
                "dimer energy within one linewidth of mode nu = {} (detuning {det:.3e})",
                m.nu
            )));
        }
        let gi = couplings.total(i, Parity::Anti, m.nu);
        let gj = couplings.total(j, Parity::Anti, m.nu);
        acc += gi * gj / Complex64::new(det, 0.5 * m.gamma);
    }
    let g = acc * edge.coupling_scale * edge.coupling_scale;
    let delta = omega - edge.j_edge;
    let delta2 = omega - edge.j_top;
    Ok(LongRangeCoupling {
        g_eff: g,
        phase: Complex64::new(1.0, 0.0),
        l: (delta > 0.0).then(|| (edge.a_d / delta).sqrt()),
        delta,
        delta2,
        epsilon: epsilon_of(g, delta, delta2),
        method: CouplingMethod::Discrete,
    })
}

/// g_eff = Nπg′²/(2√(Ã_d δ))·e^{−(π/d)|ρ_i−ρ_j|/l}, l = √(Ã_d/δ).
pub fn g_eff_continuum(edge: &EdgeParameters, separation: f64, delta: f64) -> Result<LongRangeCoupling> {
    if !(delta > 0.0) {
        return Err(AwqError::Domain(format!("continuum coupling needs delta > 0, got {delta}")));
    }
    let at = edge.a_tilde();
    let ng2 = (edge.coupling_scale * edge.g_edge).powi(2);
    let inv_l = (delta / at).sqrt();
    let g = PI * ng2 / (2.0 * (at * delta).sqrt()) * (-(PI / edge.d) * separation.abs() * inv_l).exp();
    let delta2 = delta + edge.j_edge - edge.j_top;
    Ok(LongRangeCoupling {
        g_eff: g,
        phase: Complex64::from_polar(1.0, PI / edge.d * separation),
        l: Some((edge.a_d / delta).sqrt()),
        delta,
        delta2,
        epsilon: epsilon_of(g, delta, delta2),
        method: CouplingMethod::Continuum,
    })
}

/// Reference level for a detuning.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Reference {
    /// δ, measured from J_{π/d}.
    BandEdge,
    /// δ2, measured from J_{k_N}.
    TopMode,
}

impl Reference {
    pub fn level(self, edge: &EdgeParameters) -> f64 {
        match self {
            Reference::BandEdge => edge.j_edge,
            Reference::TopMode => edge.j_top,
        }
    }
}

/// Bisection in log x for the root of a decreasing f on [lo, hi].
fn log_bisect(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> Result<f64>) -> Result<f64> {
    let (flo, fhi) = (f(lo)?, f(hi)?);
    if !(flo > 0.0 && fhi < 0.0) {
        return Err(AwqError::Domain(format!("no sign change on [{lo:.3e}, {hi:.3e}]")));
    }
    for _ in 0..200 {
        let mid = (lo * hi).sqrt();
        if f(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi / lo - 1.0 < 1e-13 {
            break;
        }
    }
    Ok((lo * hi).sqrt())
}

/// Detuning x from `reference` for which Re g_eff^{ij}/x = ε with the
/// discrete sum. Returns the tuned config and its coupling.
pub fn tune_to_epsilon(
    config: &SystemConfig,
    spectrum: &ModeSpectrum,
    couplings: &CouplingTable,
    edge: &EdgeParameters,
    epsilon: f64,
    reference: Reference,
) -> Result<(SystemConfig, LongRangeCoupling)> {
    if !(epsilon > 0.0) {
        return Err(AwqError::Domain(format!("epsilon must be positive, got {epsilon}")));
    }
    let level = reference.level(edge);
    let lo_bound = match reference {
        Reference::BandEdge => 1e-14,
        // stay outside the top mode's linewidth
        Reference::TopMode => 1.01 * spectrum.mode(spectrum.n).gamma.max(1e-14),
    };
    let f = |x: f64| -> Result<f64> {
        let cfg = config.with_dressed_energy(level + x);
        let g = g_eff_discrete(&cfg, spectrum, couplings, edge, 0, 1)?;
        Ok(g.g_eff.re / x - epsilon)
    };
    let x = log_bisect(lo_bound, 1e3, f)?;
    let cfg = config.with_dressed_energy(level + x);
    let g = g_eff_discrete(&cfg, spectrum, couplings, edge, 0, 1)?;
    Ok((cfg, g))
}

/// δ with Re g_eff_continuum(δ)/δ = ε, using real A_d in the exponent so
/// that the ε-δ relation can be inverted in closed form.
pub fn continuum_delta_for_epsilon(edge: &EdgeParameters, separation: f64, epsilon: f64) -> Result<f64> {
    let real_edge = EdgeParameters { gamma_n: 0.0, ..*edge };
    log_bisect(1e-16, 1e3, |x| Ok(g_eff_continuum(&real_edge, separation, x)?.g_eff.re / x - epsilon))
}

/// g_eff/Γ′_{0−} = (ε^{1/3}/Γ_0−)(Δ/Ω)^{2/3}(Nπ|g^−_{π/d}|²/√A_d)^{2/3}
/// ·e^{−(2π/3d)|ρ_i−ρ_j|/l}, with l at the self-consistent δ(ε).
pub fn g_eff_ratio(config: &SystemConfig, edge: &EdgeParameters, separation: f64, epsilon: f64) -> Result<f64> {
    let r = config
        .raman
        .ok_or_else(|| AwqError::InvalidConfig("band-gap ratio needs a Raman drive".into()))?;
    let delta = continuum_delta_for_epsilon(edge, separation, epsilon)?;
    let l = (edge.a_d / delta).sqrt();
    let core = PI * edge.g_edge * edge.g_edge / edge.a_d.sqrt();
    Ok(epsilon.cbrt() / edge.gamma0_minus
        * (r.delta / r.omega).powf(2.0 / 3.0)
        * core.powf(2.0 / 3.0)
        * (-(2.0 * PI / (3.0 * edge.d)) * separation.abs() / l).exp())
}

/// Upper bound (5/2)·N·ε^{3/2}·√(g′_{π/d}/A_d) on the chain population.
/// Here ε is the single-mode ratio g′_{π/d}/δ, not g_eff/δ.
pub fn chain_population_bound(edge: &EdgeParameters, epsilon: f64) -> f64 {
    2.5 * edge.n as f64 * epsilon.powf(1.5) * (edge.g_prime() / edge.a_d).sqrt()
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ErrorBudget {
    /// πΓ′_{0−}/Re g_eff.
    pub decay_term: f64,
    /// 2π|Im g_eff|/Re g_eff.
    pub linewidth_term: f64,
    /// Bound on the chain population; reported, not added to the total.
    pub chain_bound: f64,
    /// decay_term + linewidth_term.
    pub total: f64,
}

pub fn error_budget(edge: &EdgeParameters, coupling: &LongRangeCoupling) -> Result<ErrorBudget> {
    let g = coupling.g_eff;
    if !(g.re > 0.0) {
        return Err(AwqError::Domain(format!("error budget needs Re g_eff > 0, got {:.3e}", g.re)));
    }
    let detuning = if coupling.delta > 0.0 { coupling.delta } else { coupling.delta2 };
    let decay_term = PI * edge.gamma_prime / g.re;
    let linewidth_term = 2.0 * PI * g.im.abs() / g.re;
    Ok(ErrorBudget {
        decay_term,
        linewidth_term,
        chain_bound: chain_population_bound(edge, edge.g_prime() / detuning),
        total: decay_term + linewidth_term,
    })
}

/// Single-mode protocol detuned by δ2 above the top mode.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct OptimalProtocol {
    pub n: usize,
    /// |g^−_{π/d}|: per-mode coupling √|g̃^i_{k_N} g̃^j_{k_N}| with the
    /// finite-chain envelopes.
    pub g_mode: f64,
    pub gamma_n: f64,
    pub gamma0_minus: f64,
    /// |g^−_{π/d}|/√(N²Γ_0−/γ_N).
    pub delta2_opt: f64,
    /// Minimum of the two-term error, 2π√(Γ_0−γ_N)/(N|g^−_{π/d}|).
    pub error_opt: f64,
    /// (2π/|g^−_{π/d}|)√Γ_0−/N^{3/2}, which assumes γ_N = 1/N.
    pub error_opt_closed_form: f64,
}

impl OptimalProtocol {
    /// πΓ_0−δ2/|g|² + πγ_N/(N²δ2).
    pub fn two_term_error(&self, delta2: f64) -> f64 {
        let n2 = (self.n * self.n) as f64;
        PI * self.gamma0_minus * delta2 / (self.g_mode * self.g_mode) + PI * self.gamma_n / (n2 * delta2)
    }
}

pub fn optimal_protocol(spectrum: &ModeSpectrum, couplings: &CouplingTable, edge: &EdgeParameters, i: usize, j: usize) -> OptimalProtocol {
    let top = spectrum.n;
    let g_mode = (couplings.total(i, Parity::Anti, top) * couplings.total(j, Parity::Anti, top))
        .norm()
        .sqrt();
    let nf = edge.n as f64;
    OptimalProtocol {
        n: edge.n,
        g_mode,
        gamma_n: edge.gamma_n,
        gamma0_minus: edge.gamma0_minus,
        delta2_opt: g_mode / (nf * nf * edge.gamma0_minus / edge.gamma_n).sqrt(),
        error_opt: 2.0 * PI * (edge.gamma0_minus * edge.gamma_n).sqrt() / (nf * g_mode),
        error_opt_closed_form: 2.0 * PI / g_mode * edge.gamma0_minus.sqrt() / nf.powf(1.5),
    }
}
