//! One function per subcommand, each turning a scenario into tables and a
//! report body. `summary` gives the single-row form used by scans.

use std::f64::consts::PI;

use awq_core::bandgap::{
    edge_parameters, error_budget, g_eff_discrete, optimal_protocol, tune_to_epsilon, EdgeParameters, ErrorBudget,
    LongRangeCoupling, OptimalProtocol, Reference,
};
use awq_core::chain::{band_edge_closed_form, build_chain_hamiltonian, diagonalize_chain, fit_band_edge, ModeSpectrum};
use awq_core::config::SystemConfig;
use awq_core::coupling::{coupling_table, CouplingTable, EnvelopeKind};
use awq_core::dynamics::{
    build_model, fgr_rate, geometric_grid, markov_report, rabi_report, superradiance_scan, symmetric_dimer_state,
    tuned_config, MarkovOptions, Propagator, RabiOptions, RabiReport, TimeSeries,
};
use awq_core::greens::Parity;
use awq_core::par;
use serde_json::{json, Value};

use crate::output::{Artifact, Cell, Table};
use crate::scenario::{Envelope, Initial, Scenario, Tuning};
use crate::Failure;

pub const COMMANDS: [&str; 7] = ["band", "coupling", "evolve", "purcell-scan", "superradiance", "bandgap-rabi", "bandgap"];

pub fn run(command: &str, sc: &Scenario) -> Result<Artifact, Failure> {
    match command {
        "band" => band(sc),
        "coupling" => coupling(sc),
        "evolve" => evolve(sc),
        "purcell-scan" => purcell_scan(sc),
        "superradiance" => superradiance(sc),
        "bandgap-rabi" => bandgap_rabi(sc),
        "bandgap" => bandgap(sc),
        other => Err(Failure::Validation(format!("unknown command `{other}`"))),
    }
}

fn spectrum(config: &SystemConfig) -> Result<ModeSpectrum, Failure> {
    Ok(diagonalize_chain(&build_chain_hamiltonian(&config.chain))?)
}

fn to_value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).unwrap_or(Value::Null)
}

fn band(sc: &Scenario) -> Result<Artifact, Failure> {
    let s = spectrum(&sc.config)?;
    let mut table = Table::new(&["nu", "k_d_over_pi", "J_over_Gamma0", "Gamma_over_Gamma0", "parity", "guided"]);
    for m in &s.modes {
        table.push(vec![
            m.nu.into(),
            m.k_d_over_pi(s.d).into(),
            m.energy.into(),
            m.gamma.into(),
            m.parity.as_str().into(),
            m.guided.into(),
        ]);
    }
    let fit = fit_band_edge(&s);
    let sub = s.most_subradiant();
    let report = json!({
        "n": s.n,
        "d": s.d,
        "band_edge_fit": fit.as_ref().map(to_value).unwrap_or_else(|e| json!({ "error": e.to_string() })),
        "a_d_closed_form": band_edge_closed_form(s.d).ok(),
        "most_subradiant": { "nu": sub.nu, "gamma": sub.gamma },
        "guided_modes": s.guided().count(),
        "diagnostics": s.diagnostics,
    });
    Ok(Artifact { table, report, extra: vec![] })
}

fn coupling(sc: &Scenario) -> Result<Artifact, Failure> {
    let run = &sc.run;
    if run.dimer >= sc.config.dimers.len() {
        return Err(Failure::Validation(format!(
            "run.dimer = {} but the scenario has {} dimers",
            run.dimer,
            sc.config.dimers.len()
        )));
    }
    let s = spectrum(&sc.config)?;
    let kind = match run.envelope {
        Envelope::Finite => EnvelopeKind::Finite,
        Envelope::Infinite => EnvelopeKind::Infinite,
    };
    let t = coupling_table(&sc.config, &s, kind)?;
    let mut table = Table::new(&["k_d_over_pi", "re_g", "im_g", "re_gamma_half", "im_gamma_half", "parity", "mode_parity"]);
    for m in &s.modes {
        for p in Parity::both() {
            let a = t.get(run.dimer, p, m.nu);
            // g − iγ/2 = ξ·(|g| − i|γ|/2)
            let g = a.envelope * a.magnitude.re;
            let gh = a.envelope * (-a.magnitude.im);
            table.push(vec![
                m.k_d_over_pi(s.d).into(),
                g.re.into(),
                g.im.into(),
                gh.re.into(),
                gh.im.into(),
                (if p == Parity::Anti { "-1" } else { "+1" }).into(),
                m.parity.as_str().into(),
            ]);
        }
    }
    let report = json!({ "dimer": run.dimer, "envelope": run.envelope, "modes": s.n });
    Ok(Artifact { table, report, extra: vec![] })
}

/// The dimer energy placed on the mode nearest to `run.kd_over_pi`, if set,
/// with the matching golden-rule rate.
fn resonant(sc: &Scenario, s: &ModeSpectrum) -> Result<(SystemConfig, Option<(usize, f64)>), Failure> {
    match sc.run.kd_over_pi {
        None => Ok((sc.config.clone(), None)),
        Some(kd) => {
            let nu = s.nearest_nu(kd * PI / s.d);
            let cfg = tuned_config(&sc.config, s.mode(nu).energy, sc.run.model)?;
            let rate = fgr_rate(&cfg, s, s.mode(nu).k, 0)?;
            Ok((cfg, Some((nu, rate))))
        }
    }
}

struct Evolution {
    series: TimeSeries,
    report: Value,
}

fn evolution(sc: &Scenario) -> Result<Evolution, Failure> {
    let run = &sc.run;
    if sc.config.dimers.is_empty() {
        return Err(Failure::Validation("evolve needs at least one dimer".into()));
    }
    let s = spectrum(&sc.config)?;
    let (cfg, res) = resonant(sc, &s)?;
    let t_max = match (run.t_max, res) {
        (Some(t), _) => t,
        (None, Some((_, rate))) => run.markov.t_max_factor / rate,
        (None, None) => return Err(Failure::Validation("evolve needs run.t_max or run.kd_over_pi".into())),
    };
    if !(t_max > 0.0 && t_max.is_finite()) || run.points < 2 {
        return Err(Failure::Validation(format!("bad time grid: t_max = {t_max}, points = {}", run.points)));
    }
    let couplings = coupling_table(&cfg, &s, EnvelopeKind::Finite)?;
    let h = build_model(&cfg, &s, &couplings, run.model)?;
    let psi0 = match run.initial {
        Initial::Dimer => h.dimer_state(0, Parity::Anti)?,
        Initial::Symmetric => symmetric_dimer_state(&h, cfg.dimers.len())?,
    };
    let times = geometric_grid(t_max * 1e-5, t_max, run.points);
    let prop = Propagator::new(&h, &psi0)?;
    let traj = prop.trajectory(&times)?;
    let mut columns = vec![];
    for i in 0..cfg.dimers.len() {
        columns.push((format!("pop_dimer{i}_minus"), traj.state_population(&h.dimer_state(i, Parity::Anti)?)));
    }
    columns.push(("pop_chain".into(), traj.chain_population()));
    columns.push(("norm".into(), traj.norm()));
    let norm = traj.norm();
    let report = json!({
        "model": run.model,
        "initial": run.initial,
        "dressed_energy": cfg.dressed_dimer_energy(),
        "nu": res.map(|r| r.0),
        "gamma_fgr": res.map(|r| r.1),
        "t_max": t_max,
        "dimension": h.dim(),
        "method": prop.method,
        "final_norm": norm.last(),
        "max_norm_increase": traj.max_norm_increase(),
        "diagnostics": prop.diagnostics,
    });
    Ok(Evolution { series: TimeSeries { times, columns }, report })
}

fn evolve(sc: &Scenario) -> Result<Artifact, Failure> {
    let e = evolution(sc)?;
    Ok(Artifact { table: Table::from_series(&e.series), report: e.report, extra: vec![] })
}

fn markov_options(sc: &Scenario) -> MarkovOptions {
    MarkovOptions { model: sc.run.model, ..sc.run.markov }
}

fn rabi_options(sc: &Scenario) -> RabiOptions {
    RabiOptions { model: sc.run.model, ..sc.run.rabi }
}

/// Distinct modes nearest to the k d/π grid, in grid order.
fn grid_modes(sc: &Scenario, s: &ModeSpectrum) -> Result<Vec<usize>, Failure> {
    let kds = match sc.run.kd_over_pi {
        Some(kd) => vec![kd],
        None => sc.run.kd_grid()?,
    };
    let mut nus: Vec<usize> = kds.iter().map(|kd| s.nearest_nu(kd * PI / s.d)).collect();
    nus.dedup();
    Ok(nus)
}

fn purcell_scan(sc: &Scenario) -> Result<Artifact, Failure> {
    let s = spectrum(&sc.config)?;
    let nus = grid_modes(sc, &s)?;
    let opts = markov_options(sc);
    let outcomes = par::map(&nus, |&nu| markov_report(&sc.config, &s, nu, &opts));
    let mut table = Table::new(&[
        "k_d_over_pi",
        "nu",
        "J_over_Gamma0",
        "gamma_1d",
        "gamma0_tot",
        "gamma_fgr",
        "gamma_prime",
        "purcell",
        "purcell_fgr",
        "tau",
        "t_nm",
        "r2",
        "fit_ok",
        "post_onset_rise",
        "status",
    ]);
    let mut extra = vec![];
    let mut reports = vec![];
    let mut failed = 0;
    for (&nu, out) in nus.iter().zip(outcomes) {
        let m = s.mode(nu);
        match out {
            Ok(o) => {
                let r = &o.report;
                table.push(vec![
                    m.k_d_over_pi(s.d).into(),
                    nu.into(),
                    m.energy.into(),
                    r.gamma_1d.into(),
                    r.gamma0_tot.into(),
                    r.gamma_fgr.into(),
                    r.gamma_prime.into(),
                    r.purcell.into(),
                    (r.gamma_fgr / r.gamma_prime).into(),
                    r.tau.into(),
                    r.t_nm.into(),
                    r.fit.r2.into(),
                    r.fit_ok.into(),
                    r.post_onset_rise.into(),
                    "ok".into(),
                ]);
                if sc.run.write_series {
                    extra.push((format!("_nu{nu}"), Table::from_series(&o.series)));
                }
                reports.push(to_value(r));
            }
            Err(e) => {
                failed += 1;
                let mut row = vec![m.k_d_over_pi(s.d).into(), nu.into(), m.energy.into()];
                row.extend(vec![Cell::Empty; 11]);
                row.push(Cell::Text(format!("error: {e}")));
                table.push(row);
                reports.push(json!({ "nu": nu, "error": e.to_string() }));
            }
        }
    }
    let report = json!({ "options": opts, "points": reports, "failed_points": failed });
    Ok(Artifact { table, report, extra })
}

fn superradiance(sc: &Scenario) -> Result<Artifact, Failure> {
    let s = spectrum(&sc.config)?;
    let nus = grid_modes(sc, &s)?;
    let energies: Vec<f64> = nus.iter().map(|&nu| s.mode(nu).energy).collect();
    let scan = superradiance_scan(&sc.config, &s, &energies, &markov_options(sc))?;
    let mut table = Table::new(&["k_d_over_pi", "nu", "J_over_Gamma0", "ratio", "gamma_fit", "gamma_fgr", "r2"]);
    for p in &scan.points {
        table.push(vec![
            p.k_d_over_pi.into(),
            p.nu.into(),
            p.energy.into(),
            p.ratio.into(),
            p.gamma_fit.into(),
            p.gamma_fgr.into(),
            p.r2.into(),
        ]);
    }
    Ok(Artifact { table, report: to_value(&scan), extra: vec![] })
}

struct Gap {
    config: SystemConfig,
    spectrum: ModeSpectrum,
    edge: EdgeParameters,
    coupling: LongRangeCoupling,
    budget: ErrorBudget,
    protocol: OptimalProtocol,
}

fn gap(sc: &Scenario) -> Result<Gap, Failure> {
    let cfg = &sc.config;
    if cfg.dimers.len() != 2 {
        return Err(Failure::Validation(format!(
            "band-gap commands need two dimers (or run.separation_over_d), got {}",
            cfg.dimers.len()
        )));
    }
    let s = spectrum(cfg)?;
    let c: CouplingTable = coupling_table(cfg, &s, EnvelopeKind::Finite)?;
    let edge = edge_parameters(cfg, &s, 0)?;
    let protocol = optimal_protocol(&s, &c, &edge, 0, 1);
    let at = |level: f64| -> Result<(SystemConfig, LongRangeCoupling), Failure> {
        let tuned = cfg.with_dressed_energy(level);
        let g = g_eff_discrete(&tuned, &s, &c, &edge, 0, 1)?;
        Ok((tuned, g))
    };
    let (config, coupling) = match (sc.run.tuning, sc.run.detuning) {
        (Tuning::Optimal, _) => at(edge.j_top + protocol.delta2_opt)?,
        (Tuning::BandEdge, Some(x)) => at(edge.j_edge + x)?,
        (Tuning::TopMode, Some(x)) => at(edge.j_top + x)?,
        (Tuning::BandEdge, None) => tune_to_epsilon(cfg, &s, &c, &edge, sc.run.epsilon, Reference::BandEdge)?,
        (Tuning::TopMode, None) => tune_to_epsilon(cfg, &s, &c, &edge, sc.run.epsilon, Reference::TopMode)?,
    };
    let budget = error_budget(&edge, &coupling)?;
    Ok(Gap { config, spectrum: s, edge, coupling, budget, protocol })
}

fn gap_report(sc: &Scenario, g: &Gap, rabi: Option<&RabiReport>) -> Value {
    json!({
        "tuning": sc.run.tuning,
        "edge": to_value(&g.edge),
        "coupling": to_value(&g.coupling),
        "error_budget": to_value(&g.budget),
        "optimal_protocol": to_value(&g.protocol),
        "rabi": rabi.map(to_value),
        "dressed_energy": g.config.dressed_dimer_energy(),
        "impurity_detuning": g.config.impurity_detuning,
    })
}

fn bandgap_rabi(sc: &Scenario) -> Result<Artifact, Failure> {
    let g = gap(sc)?;
    let out = rabi_report(&g.config, &g.spectrum, g.coupling.g_eff.re, &rabi_options(sc))?;
    let report = gap_report(sc, &g, Some(&out.report));
    Ok(Artifact { table: Table::from_series(&out.series), report, extra: vec![] })
}

const BANDGAP_HEADER: [&str; 10] =
    ["N", "L_over_d", "epsilon", "delta", "delta2", "re_geff", "im_geff", "l", "error_budget_total", "error_measured"];

fn bandgap_row(sc: &Scenario) -> Result<(Vec<Cell>, Value), Failure> {
    let g = gap(sc)?;
    let rabi = if sc.run.measure {
        Some(rabi_report(&g.config, &g.spectrum, g.coupling.g_eff.re, &rabi_options(sc))?.report)
    } else {
        None
    };
    let d = g.config.chain.d();
    let sep = (g.config.dimers[1].center - g.config.dimers[0].center).abs();
    let row = vec![
        g.spectrum.n.into(),
        (sep / d).into(),
        g.coupling.epsilon.into(),
        g.coupling.delta.into(),
        g.coupling.delta2.into(),
        g.coupling.g_eff.re.into(),
        g.coupling.g_eff.im.into(),
        g.coupling.l.into(),
        g.budget.total.into(),
        rabi.as_ref().map(|r| r.error).into(),
    ];
    Ok((row, gap_report(sc, &g, rabi.as_ref())))
}

fn bandgap(sc: &Scenario) -> Result<Artifact, Failure> {
    let (row, report) = bandgap_row(sc)?;
    let mut table = Table::new(&BANDGAP_HEADER);
    table.push(row);
    Ok(Artifact { table, report, extra: vec![] })
}

/// Column names of the single-row form of `command`.
pub fn summary_header(command: &str) -> Result<Vec<&'static str>, Failure> {
    Ok(match command {
        "band" => vec!["N", "a_d", "gamma_n", "j_edge", "j_top", "min_gamma"],
        "evolve" => vec!["t_max", "final_norm", "final_pop_chain", "final_pop_dimer0_minus"],
        "bandgap-rabi" => vec!["t_return", "error", "re_g_measured", "re_g_expected", "p_transfer", "max_chain_population"],
        "bandgap" => BANDGAP_HEADER.to_vec(),
        other => {
            return Err(Failure::Validation(format!(
                "`{other}` cannot be scanned; use one of band, evolve, bandgap-rabi, bandgap"
            )))
        }
    })
}

pub fn summary(command: &str, sc: &Scenario) -> Result<(Vec<Cell>, Value), Failure> {
    match command {
        "band" => {
            let s = spectrum(&sc.config)?;
            let fit = fit_band_edge(&s)?;
            let row = vec![
                s.n.into(),
                fit.a_d.into(),
                fit.gamma_n.into(),
                fit.j_edge.into(),
                s.top_energy().into(),
                s.most_subradiant().gamma.into(),
            ];
            Ok((row, to_value(&fit)))
        }
        "evolve" => {
            let e = evolution(sc)?;
            let last = |name: &str| {
                e.series
                    .columns
                    .iter()
                    .find(|(n, _)| n == name)
                    .and_then(|(_, v)| v.last().copied())
            };
            let row = vec![
                e.series.times.last().copied().into(),
                last("norm").into(),
                last("pop_chain").into(),
                last("pop_dimer0_minus").into(),
            ];
            Ok((row, e.report))
        }
        "bandgap-rabi" => {
            let g = gap(sc)?;
            let r = rabi_report(&g.config, &g.spectrum, g.coupling.g_eff.re, &rabi_options(sc))?.report;
            let row = vec![
                r.t_return.into(),
                r.error.into(),
                r.re_g_measured.into(),
                r.re_g_expected.into(),
                r.p_transfer.into(),
                r.max_chain_population.into(),
            ];
            Ok((row, gap_report(sc, &g, Some(&r))))
        }
        "bandgap" => bandgap_row(sc),
        other => Err(summary_header(other).err().unwrap_or_else(|| Failure::Validation(format!("unknown command `{other}`")))),
    }
}
