//! In-band emission: golden-rule rates, Markovian fits and the onset of
//! retardation effects.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::fit::{log_fit, LinearFit};
use super::propagate::{geometric_grid, Method, Propagator, Trajectory};
use crate::chain::{ansatz_mode, ModeSpectrum};
use crate::config::SystemConfig;
use crate::coupling::{coupling_table, dimer_coupling, CouplingTable, EnvelopeKind};
use crate::error::{AwqError, Result};
use crate::greens::{dimer_eigenpair, Parity};
use crate::hamiltonian::{BasisLabel, EffectiveHamiltonian};
use crate::raman::{build_effective_raman, build_full_effective, build_full_raman, exact_light_shift, impurity_detuning_for_exact};

pub const DEFAULT_ONSET_THRESHOLD: f64 = 0.06;
pub const DEFAULT_TIME_POINTS: usize = 3000;
pub const DEFAULT_T_MAX_FACTOR: f64 = 5.0;
pub const MIN_R2: f64 = 0.99;

/// Which Hamiltonian a measurement propagates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    /// Antisymmetric |g1⟩ dimers plus guided modes.
    #[default]
    Effective,
    /// Both dimer parities, all modes and the mode–mode correction.
    FullEffective,
    /// Real-space chain plus |e⟩, |g1⟩ on every impurity atom.
    FullRaman,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MarkovOptions {
    pub model: Model,
    /// Relative deviation from the Markovian prediction that marks t_NM.
    pub onset_threshold: f64,
    pub time_points: usize,
    /// t_max in units of 1/Γ_FGR.
    pub t_max_factor: f64,
}

impl Default for MarkovOptions {
    fn default() -> Self {
        Self {
            model: Model::Effective,
            onset_threshold: DEFAULT_ONSET_THRESHOLD,
            time_points: DEFAULT_TIME_POINTS,
            t_max_factor: DEFAULT_T_MAX_FACTOR,
        }
    }
}

/// Γ_FGR = 2d(Ω/2Δ)²|G^−(k)|²/∂_kJ for the antisymmetric |g1⟩ state of
/// `dimer`. Equivalent to 2Nd g′²/∂_kJ with g′ averaged over the standing
/// wave envelope, hence independent of N.
pub fn fgr_rate(config: &SystemConfig, spectrum: &ModeSpectrum, k: f64, dimer: usize) -> Result<f64> {
    let r = config
        .raman
        .ok_or_else(|| AwqError::InvalidConfig("golden-rule rate needs a Raman drive".into()))?;
    let dm = config
        .dimers
        .get(dimer)
        .ok_or_else(|| AwqError::InvalidConfig(format!("no dimer {dimer}")))?;
    let d = spectrum.d;
    let nu = spectrum.nearest_nu(k);
    if !spectrum.mode(nu).guided {
        return Err(AwqError::Domain(format!("k d/pi = {} is outside the guided band", k * d / std::f64::consts::PI)));
    }
    let vg = spectrum.group_velocity(nu);
    if vg < 1e-3 * d {
        return Err(AwqError::BandEdge(format!("group velocity {vg:.3e} below 1e-3 d at nu = {nu}")));
    }
    let g = dimer_coupling(k, dm.h, d, Parity::Anti, dm.rho0)?;
    Ok(2.0 * d * r.coupling_scale().powi(2) * g.norm_sqr() / vg)
}

/// Free-space linewidth Γ′_{0−} of the driven antisymmetric state of
/// `dimer`: (Ω/2Δ)²Γ_{0−} in the simplified model, −2 Im of the exact
/// second-order shift (detuning Δ − g_ab from the |e⟩ dimer state) otherwise.
pub fn residual_linewidth(config: &SystemConfig, dimer: usize, model: Model) -> Result<f64> {
    let r = config
        .raman
        .ok_or_else(|| AwqError::InvalidConfig("residual linewidth needs a Raman drive".into()))?;
    match model {
        Model::Effective => {
            let (_, g0m) = dimer_eigenpair(config.dimers[dimer].r_ab(), Parity::Anti)?;
            Ok(r.linewidth_scale() * g0m)
        }
        _ => Ok(-2.0 * exact_light_shift(config, dimer)?.im),
    }
}

/// Per-mode populations |Σ_i ξ_ν(z_i) ψ_i|² of a real-space trajectory, or the
/// mode amplitudes directly for a trajectory in the mode basis. Returns
/// `[time][ν − 1]`.
pub fn mode_populations(trajectory: &Trajectory, spectrum: &ModeSpectrum) -> Result<Vec<Vec<f64>>> {
    let n = spectrum.n;
    let sites: Vec<Option<usize>> = (1..=n)
        .map(|i| trajectory.basis.iter().position(|b| *b == BasisLabel::Site(i)))
        .collect();
    if sites.iter().all(Option::is_some) {
        let geom = crate::config::ChainGeometry::new(n, spectrum.d)?;
        let xi: Vec<Vec<f64>> = (1..=n).map(|nu| ansatz_mode(nu, &geom)).collect();
        let idx: Vec<usize> = sites.into_iter().flatten().collect();
        return Ok(trajectory
            .amplitudes
            .iter()
            .map(|psi| {
                xi.iter()
                    .map(|x| {
                        let a: Complex64 = x.iter().zip(&idx).map(|(c, &i)| *c * psi[i]).sum();
                        a.norm_sqr()
                    })
                    .collect()
            })
            .collect());
    }
    let modes: Vec<Option<usize>> = (1..=n)
        .map(|nu| trajectory.basis.iter().position(|b| *b == BasisLabel::Mode(nu)))
        .collect();
    if modes.iter().all(Option::is_none) {
        return Err(AwqError::BasisMismatch("trajectory has no chain degrees of freedom".into()));
    }
    Ok(trajectory
        .amplitudes
        .iter()
        .map(|psi| modes.iter().map(|m| m.map_or(0.0, |i| psi[i].norm_sqr())).collect())
        .collect())
}

/// Copy of `config` with every dimer's antisymmetric |g1⟩ state at `energy`.
pub fn tuned_config(config: &SystemConfig, energy: f64, model: Model) -> Result<SystemConfig> {
    match model {
        Model::Effective => Ok(config.with_dressed_energy(energy)),
        _ => {
            let mut out = config.clone();
            out.impurity_detuning = impurity_detuning_for_exact(config, 0, energy)?;
            Ok(out)
        }
    }
}

pub fn build_model(config: &SystemConfig, spectrum: &ModeSpectrum, couplings: &CouplingTable, model: Model) -> Result<EffectiveHamiltonian> {
    match model {
        Model::Effective => build_effective_raman(config, spectrum, couplings),
        Model::FullEffective => build_full_effective(config, spectrum, couplings),
        Model::FullRaman => build_full_raman(config),
    }
}

/// (1/√n)Σ_i |dimer_i, −⟩ in the basis of `h`.
pub fn symmetric_dimer_state(h: &EffectiveHamiltonian, n_dimers: usize) -> Result<Vec<Complex64>> {
    let mut psi = vec![Complex64::new(0.0, 0.0); h.dim()];
    let w = 1.0 / (n_dimers as f64).sqrt();
    for i in 0..n_dimers {
        for (a, b) in psi.iter_mut().zip(h.dimer_state(i, Parity::Anti)?) {
            *a += w * b;
        }
    }
    Ok(psi)
}

#[derive(Debug, Clone, Serialize)]
pub struct MarkovReport {
    pub nu: usize,
    pub k_d_over_pi: f64,
    pub energy: f64,
    pub model: Model,
    pub gamma_1d: f64,
    pub gamma0_tot: f64,
    pub purcell: f64,
    pub gamma_fgr: f64,
    pub gamma_prime: f64,
    pub group_velocity: f64,
    pub tau: f64,
    /// None when the population never leaves the Markovian prediction.
    pub t_nm: Option<f64>,
    pub fit_window: (f64, f64),
    pub norm_fit_window: (f64, f64),
    pub fit: LinearFit,
    pub norm_fit: LinearFit,
    pub fit_ok: bool,
    /// Largest dimer population in [t_NM, 1.5 t_NM] minus the population at t_NM.
    pub post_onset_rise: Option<f64>,
    pub method: Method,
    pub diagnostics: Vec<String>,
}

/// Time series written alongside a report.
#[derive(Debug, Clone, Serialize)]
pub struct TimeSeries {
    pub times: Vec<f64>,
    pub columns: Vec<(String, Vec<f64>)>,
}

pub struct MarkovOutcome {
    pub report: MarkovReport,
    pub series: TimeSeries,
}

struct DecayAnalysis {
    t_nm: Option<f64>,
    window: (f64, f64),
    fit: LinearFit,
}

/// Markovian intercept from the early window, onset detection, then the fit
/// on [t_min, 0.8·t_NM].
fn analyse_decay(times: &[f64], pop: &[f64], rate: f64, t_min: f64, t_end: f64, threshold: f64) -> Result<DecayAnalysis> {
    let early: Vec<f64> = times
        .iter()
        .zip(pop)
        .filter(|(t, p)| **t >= t_min && **t <= 1.5 * t_min && **p > 0.0)
        .map(|(t, p)| p.ln() + rate * t)
        .collect();
    if early.is_empty() {
        return Err(AwqError::NonMarkovian("no samples in the early Markovian window".into()));
    }
    let a = early.iter().sum::<f64>() / early.len() as f64;
    let t_nm = times
        .iter()
        .zip(pop)
        .filter(|(t, _)| **t >= t_min)
        .find(|(t, p)| {
            let pred = (a - rate * **t).exp();
            ((**p - pred) / pred).abs() > threshold
        })
        .map(|(t, _)| *t);
    let hi = 0.8 * t_nm.unwrap_or(t_end);
    if hi <= t_min {
        return Err(AwqError::NonMarkovian(format!(
            "Markovian window is empty: onset at {:.4e} before t_min = {t_min:.4e}",
            t_nm.unwrap_or(t_end)
        )));
    }
    let fit = log_fit(times, pop, t_min, hi).map_err(|e| AwqError::NonMarkovian(format!("fit window too short: {e}")))?;
    Ok(DecayAnalysis {
        t_nm,
        window: (t_min, hi),
        fit,
    })
}

/// Tune a single driven dimer to mode ν, propagate and extract Γ_1D, Γ0^tot
/// and the non-Markovian onset.
pub fn markov_report(config: &SystemConfig, spectrum: &ModeSpectrum, nu: usize, options: &MarkovOptions) -> Result<MarkovOutcome> {
    if config.dimers.len() != 1 {
        return Err(AwqError::InvalidConfig(format!("markov report needs one dimer, got {}", config.dimers.len())));
    }
    if !(1..=spectrum.n).contains(&nu) || !spectrum.mode(nu).guided {
        return Err(AwqError::Domain(format!("nu = {nu} is not a guided mode")));
    }
    let mode = spectrum.mode(nu);
    let cfg = tuned_config(config, mode.energy, options.model)?;
    let couplings = coupling_table(&cfg, spectrum, EnvelopeKind::Finite)?;
    let h = build_model(&cfg, spectrum, &couplings, options.model)?;
    let psi0 = h.dimer_state(0, Parity::Anti)?;
    let gamma_fgr = fgr_rate(&cfg, spectrum, mode.k, 0)?;
    let gamma_prime = residual_linewidth(&cfg, 0, options.model)?;
    let vg = spectrum.group_velocity(nu);
    let tau = spectrum.n as f64 * spectrum.d / vg;

    let t_max = options.t_max_factor / gamma_fgr;
    let times = geometric_grid(1e-2_f64.min(0.01 * t_max), t_max, options.time_points);
    let prop = Propagator::new(&h, &psi0)?;
    let traj = prop.trajectory(&times)?;
    let pop = traj.state_population(&psi0);
    let norm = traj.norm();
    let chain = traj.chain_population();

    let mut diagnostics = traj.diagnostics.clone();
    let t_min = (2.0 / gamma_fgr).min(0.2 * tau);
    if t_min < 2.0 / gamma_fgr {
        diagnostics.push(format!("t_min shortened from 2/Gamma_FGR to 0.2 tau = {t_min:.4e}"));
    }
    let rate = gamma_fgr + gamma_prime;
    let da = analyse_decay(&times, &pop, rate, t_min, t_max, options.onset_threshold)?;
    let norm_fit = log_fit(&times, &norm, da.window.0, da.window.1)?;
    let gamma_1d = -da.fit.slope - gamma_prime;
    let fit_ok = da.fit.r2 >= MIN_R2 && norm_fit.r2 >= MIN_R2;
    if !fit_ok {
        diagnostics.push(format!("fit quality below R^2 = {MIN_R2}: population {:.5}, norm {:.5}", da.fit.r2, norm_fit.r2));
    }
    let post_onset_rise = da.t_nm.map(|t0| {
        let base = interp(&times, &pop, t0);
        times
            .iter()
            .zip(&pop)
            .filter(|(t, _)| **t >= t0 && **t <= 1.5 * t0)
            .map(|(_, p)| p - base)
            .fold(0.0, f64::max)
    });
    let report = MarkovReport {
        nu,
        k_d_over_pi: mode.k_d_over_pi(spectrum.d),
        energy: mode.energy,
        model: options.model,
        gamma_1d,
        gamma0_tot: -norm_fit.slope,
        purcell: gamma_1d / gamma_prime,
        gamma_fgr,
        gamma_prime,
        group_velocity: vg,
        tau,
        t_nm: da.t_nm,
        fit_window: da.window,
        norm_fit_window: da.window,
        fit: da.fit,
        norm_fit,
        fit_ok,
        post_onset_rise,
        method: prop.method,
        diagnostics,
    };
    let series = TimeSeries {
        times,
        columns: vec![("pop_dimer0_minus".into(), pop), ("pop_chain".into(), chain), ("norm".into(), norm)],
    };
    Ok(MarkovOutcome { report, series })
}

fn interp(times: &[f64], y: &[f64], t: f64) -> f64 {
    match times.iter().position(|x| *x >= t) {
        Some(0) | None => y[times.len().min(y.len()) - 1],
        Some(i) => {
            let f = (t - times[i - 1]) / (times[i] - times[i - 1]);
            y[i - 1] + f * (y[i] - y[i - 1])
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SuperradiancePoint {
    pub energy: f64,
    pub nu: usize,
    pub k_d_over_pi: f64,
    pub gamma_fit: f64,
    pub gamma_fgr: f64,
    pub ratio: f64,
    pub fit_window: (f64, f64),
    pub r2: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuperradianceScan {
    pub n_dimers: usize,
    pub points: Vec<SuperradiancePoint>,
    /// Energy ranges where the ratio reaches n(1 − 0.1).
    pub windows: Vec<(f64, f64)>,
}

/// Collective decay of (1/√n)Σ_i|dimer_i, −⟩ at one dimer energy, relative
/// to the single-dimer golden rule at the nearest guided mode.
pub fn superradiance_point(config: &SystemConfig, spectrum: &ModeSpectrum, energy: f64, options: &MarkovOptions) -> Result<SuperradiancePoint> {
    let n = config.dimers.len();
    if n == 0 {
        return Err(AwqError::InvalidConfig("superradiance needs at least one dimer".into()));
    }
    let nu = spectrum
        .guided()
        .min_by(|a, b| (a.energy - energy).abs().total_cmp(&(b.energy - energy).abs()))
        .ok_or(AwqError::InsufficientGuidedModes { needed: 1, found: 0 })?
        .nu;
    let mode = spectrum.mode(nu);
    let cfg = tuned_config(config, energy, options.model)?;
    let couplings = coupling_table(&cfg, spectrum, EnvelopeKind::Finite)?;
    let h = build_model(&cfg, spectrum, &couplings, options.model)?;
    let psi0 = symmetric_dimer_state(&h, n)?;
    let gamma_fgr = fgr_rate(&cfg, spectrum, mode.k, 0)?;
    let gamma_prime = residual_linewidth(&cfg, 0, options.model)?;
    let tau = spectrum.n as f64 * spectrum.d / spectrum.group_velocity(nu);
    let t_min = (2.0 / (n as f64 * gamma_fgr)).min(0.2 * tau);
    let t_end = 0.8 * tau;
    if t_end <= t_min {
        return Err(AwqError::NonMarkovian("collective decay window is empty".into()));
    }
    let times = geometric_grid(1e-2_f64.min(0.01 * t_min), t_end, options.time_points);
    let prop = Propagator::new(&h, &psi0)?;
    let states = prop.states(&times)?;
    let dimer_states: Vec<Vec<Complex64>> = (0..n).map(|i| h.dimer_state(i, Parity::Anti)).collect::<Result<_>>()?;
    let pop: Vec<f64> = states
        .iter()
        .map(|psi| dimer_states.iter().map(|w| super::propagate::overlap(w, psi).norm_sqr()).sum())
        .collect();
    let fit = log_fit(&times, &pop, t_min, t_end)?;
    let gamma_fit = -fit.slope - gamma_prime;
    Ok(SuperradiancePoint {
        energy,
        nu,
        k_d_over_pi: mode.k_d_over_pi(spectrum.d),
        gamma_fit,
        gamma_fgr,
        ratio: gamma_fit / gamma_fgr,
        fit_window: (t_min, t_end),
        r2: fit.r2,
    })
}

/// Scan dimer energies in parallel; output order follows `energies`.
pub fn superradiance_scan(config: &SystemConfig, spectrum: &ModeSpectrum, energies: &[f64], options: &MarkovOptions) -> Result<SuperradianceScan> {
    let n = config.dimers.len();
    let points = crate::par::map(energies, |&e| superradiance_point(config, spectrum, e, options))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let target = n as f64 * 0.9;
    let mut windows = Vec::new();
    let mut open: Option<f64> = None;
    let mut last = f64::NAN;
    for p in &points {
        match (p.ratio >= target, open) {
            (true, None) => open = Some(p.energy),
            (false, Some(s)) => {
                windows.push((s, last));
                open = None;
            }
            _ => {}
        }
        last = p.energy;
    }
    if let Some(s) = open {
        windows.push((s, last));
    }
    Ok(SuperradianceScan { n_dimers: n, points, windows })
}
