//! Exchange of an excitation between two dimers through the band gap.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::markov::{build_model, Model, TimeSeries};
use super::propagate::{overlap, uniform_grid, Method, Propagator};
use crate::chain::ModeSpectrum;
use crate::config::SystemConfig;
use crate::coupling::{coupling_table, EnvelopeKind};
use crate::error::{AwqError, Result};
use crate::greens::Parity;

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RabiOptions {
    pub model: Model,
    /// Samples per π/Re g_eff.
    pub points_per_period: usize,
    /// Search horizon in units of π/Re g_eff.
    pub search_periods: f64,
    /// Extent of the written time series in units of π/Re g_eff.
    pub output_periods: f64,
}

impl Default for RabiOptions {
    fn default() -> Self {
        Self {
            model: Model::Effective,
            points_per_period: 400,
            search_periods: 10.0,
            output_periods: 3.0,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RabiReport {
    /// Time of the first relative maximum of dimer 0 after one exchange.
    pub t_return: f64,
    pub p_return: f64,
    /// 1 − p_return.
    pub error: f64,
    /// π/t_return.
    pub re_g_measured: f64,
    pub re_g_expected: f64,
    /// Largest dimer-1 population before t_return and when it occurs.
    pub t_transfer: f64,
    pub p_transfer: f64,
    pub max_chain_population: f64,
    pub model: Model,
    pub method: Method,
    pub diagnostics: Vec<String>,
}

pub struct RabiOutcome {
    pub report: RabiReport,
    pub series: TimeSeries,
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Maximize f on [a, b] by golden-section search.
fn golden_max(mut a: f64, mut b: f64, f: impl Fn(f64) -> Result<f64>, tol: f64) -> Result<(f64, f64)> {
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    while (b - a).abs() > tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d)?;
        }
    }
    Ok(if fc > fd { (c, fc) } else { (d, fd) })
}

/// Start in dimer 0's antisymmetric state and locate the first relative
/// maximum of its population after the excitation has visited dimer 1.
/// `re_g_expected` sets the time scale.
pub fn rabi_report(config: &SystemConfig, spectrum: &ModeSpectrum, re_g_expected: f64, options: &RabiOptions) -> Result<RabiOutcome> {
    if config.dimers.len() != 2 {
        return Err(AwqError::InvalidConfig(format!("rabi report needs two dimers, got {}", config.dimers.len())));
    }
    if !(re_g_expected.is_finite() && re_g_expected > 0.0) {
        return Err(AwqError::Domain(format!("expected coupling {re_g_expected} must be positive")));
    }
    let couplings = coupling_table(config, spectrum, EnvelopeKind::Finite)?;
    let h = build_model(config, spectrum, &couplings, options.model)?;
    let w1 = h.dimer_state(0, Parity::Anti)?;
    let w2 = h.dimer_state(1, Parity::Anti)?;
    let prop = Propagator::new(&h, &w1)?;
    let unit = std::f64::consts::PI / re_g_expected;
    let t_max = options.search_periods * unit;
    let n_samples = (options.search_periods * options.points_per_period as f64).ceil() as usize;
    let times = uniform_grid(t_max, n_samples);
    let p1 = prop.overlap_populations(&w1, &times)?;

    let overdamped = || AwqError::Overdamped { t_max };
    let i_low = p1.iter().position(|p| *p < 0.5).ok_or_else(overdamped)?;
    let i_high = (i_low..p1.len()).find(|&i| p1[i] > 0.5).ok_or_else(overdamped)?;
    let mut i_peak = i_high;
    while i_peak + 1 < p1.len() && p1[i_peak + 1] >= p1[i_peak] {
        i_peak += 1;
    }
    if i_peak + 1 == p1.len() {
        return Err(overdamped());
    }
    let pop1 = |t: f64| -> Result<f64> { Ok(overlap(&w1, &prop.state(t)?).norm_sqr()) };
    let dt = times[1] - times[0];
    let (t_return, p_return) = golden_max(times[i_peak] - dt, times[i_peak] + dt, pop1, 1e-9 * t_max)?;

    let out_end = (options.output_periods * unit).max(t_return);
    let n_out = ((out_end / dt).ceil() as usize).max(1);
    let out_times = uniform_grid(out_end, n_out);
    let traj = prop.trajectory(&out_times)?;
    let series_p1 = traj.state_population(&w1);
    let series_p2 = traj.state_population(&w2);
    let chain = traj.chain_population();
    let norm = traj.norm();
    let before: Vec<usize> = (0..out_times.len()).filter(|&i| out_times[i] <= t_return).collect();
    let (i_tr, p_transfer) = before
        .iter()
        .map(|&i| (i, series_p2[i]))
        .fold((0, f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc });
    let max_chain = before.iter().map(|&i| chain[i]).fold(0.0, f64::max);

    let report = RabiReport {
        t_return,
        p_return,
        error: (1.0 - p_return).clamp(0.0, 1.0),
        re_g_measured: std::f64::consts::PI / t_return,
        re_g_expected,
        t_transfer: out_times[i_tr],
        p_transfer,
        max_chain_population: max_chain,
        model: options.model,
        method: prop.method,
        diagnostics: prop.diagnostics.clone(),
    };
    let series = TimeSeries {
        times: out_times,
        columns: vec![
            ("pop_dimer0_minus".into(), series_p1),
            ("pop_dimer1_minus".into(), series_p2),
            ("pop_chain".into(), chain),
            ("norm".into(), norm),
        ],
    };
    Ok(RabiOutcome { report, series })
}

/// Dimer-0 population under the same model at the given times; used for the
/// decoupled-limit check.
pub fn dimer_population(config: &SystemConfig, spectrum: &ModeSpectrum, model: Model, times: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let couplings = coupling_table(config, spectrum, EnvelopeKind::Finite)?;
    let h = build_model(config, spectrum, &couplings, model)?;
    let w1 = h.dimer_state(0, Parity::Anti)?;
    let w2: Vec<Complex64> = if config.dimers.len() > 1 { h.dimer_state(1, Parity::Anti)? } else { vec![Complex64::new(0.0, 0.0); h.dim()] };
    let prop = Propagator::new(&h, &w1)?;
    Ok((prop.overlap_populations(&w1, times)?, prop.overlap_populations(&w2, times)?))
}
