mod common;

use awq_core::bandgap::*;
use awq_core::dynamics::{linear_fit, rabi_report, RabiOptions};
use common::*;
use std::f64::consts::PI;

#[test]
fn self_coupling_is_dissipative_and_real_at_large_detuning() {
    let cfg = gap_drive(100, &pair(14));
    let (s, c) = solve(&cfg);
    let e = edge_parameters(&cfg, &s, 0).unwrap();
    for delta in [1e-4, 1e-2, 1.0] {
        let g = g_eff_discrete(&cfg.with_dressed_energy(e.j_edge + delta), &s, &c, &e, 0, 0).unwrap();
        assert!(g.g_eff.im <= 0.0);
        assert!(g.g_eff.re > 0.0);
    }
    let near = g_eff_discrete(&cfg.with_dressed_energy(e.j_edge + 1e-3), &s, &c, &e, 0, 0).unwrap();
    let far = g_eff_discrete(&cfg.with_dressed_energy(e.j_edge + 1.0), &s, &c, &e, 0, 0).unwrap();
    assert!((far.g_eff.im / far.g_eff.re).abs() < (near.g_eff.im / near.g_eff.re).abs());
}

#[test]
fn resonance_is_rejected() {
    let cfg = gap_drive(50, &pair(6));
    let (s, c) = solve(&cfg);
    let e = edge_parameters(&cfg, &s, 0).unwrap();
    let on_top = cfg.with_dressed_energy(e.j_top);
    assert!(g_eff_discrete(&on_top, &s, &c, &e, 0, 1).is_err());
    assert!(g_eff_continuum(&e, 1.0, 0.0).is_err());
    assert!(g_eff_continuum(&e, 1.0, -1e-3).is_err());
}

#[test]
fn coupling_is_local() {
    let delta_of = |m: usize| {
        let cfg = gap_drive(200, &pair(m));
        let (s, c) = solve(&cfg);
        let e = edge_parameters(&cfg, &s, 0).unwrap();
        let tc = cfg.with_dressed_energy(e.j_edge + 0.5);
        g_eff_discrete(&tc, &s, &c, &e, 0, 1).unwrap().g_eff.norm()
    };
    // l = √(A_d/0.5) ≈ 2.9 in units of d/π, so 60d is many lengths
    let (near, far) = (delta_of(2), delta_of(60));
    assert!(far < 1e-3 * near, "{far} vs {near}");
    let e = edge_parameters(&gap_drive(100, &pair(2)), &spectrum(&gap_drive(100, &pair(2))), 0).unwrap();
    let mags: Vec<f64> = (1..30).map(|m| g_eff_continuum(&e, m as f64 * D, 0.05).unwrap().g_eff.norm()).collect();
    assert!(mags.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn continuum_is_independent_of_n() {
    let vals: Vec<_> = [100, 200, 400]
        .iter()
        .map(|&n| {
            let cfg = gap_drive(n, &pair(14));
            let e = edge_parameters(&cfg, &spectrum(&cfg), 0).unwrap();
            (g_eff_continuum(&e, 14.0 * D, 1e-3).unwrap().g_eff, g_eff_ratio(&cfg, &e, 14.0 * D, 2e-3).unwrap())
        })
        .collect();
    for (g, r) in &vals[1..] {
        assert!(((g - vals[0].0).norm() / vals[0].0.norm()) < 5e-3);
        assert!((r / vals[0].1 - 1.0).abs() < 1e-6);
    }
}

#[test]
fn interaction_length_from_distance_scan() {
    let mut xs = vec![];
    let mut ys = vec![];
    let mut l = 0.0;
    for m in 6..=20 {
        let cfg = gap_drive(200, &pair(m));
        let (s, c) = solve(&cfg);
        let e = edge_parameters(&cfg, &s, 0).unwrap();
        let delta = e.a_d / 100.0;
        let g = g_eff_discrete(&cfg.with_dressed_energy(e.j_edge + delta), &s, &c, &e, 0, 1).unwrap();
        xs.push(m as f64 * D);
        ys.push(g.g_eff.norm().ln());
        l = g.l.unwrap();
    }
    let fit = linear_fit(&xs, &ys).unwrap();
    let l_fit = -(PI / D) / fit.slope;
    assert!((l_fit / l - 1.0).abs() < 0.1, "{l_fit} vs {l}");
}

#[test]
fn discrete_approaches_continuum() {
    let rel = |n: usize, div: f64| {
        let cfg = gap_drive(n, &pair(14));
        let (s, c) = solve(&cfg);
        let e = edge_parameters(&cfg, &s, 0).unwrap();
        let delta = e.a_d / div;
        let g = g_eff_discrete(&cfg.with_dressed_energy(e.j_edge + delta), &s, &c, &e, 0, 1).unwrap();
        let gc = g_eff_continuum(&e, 14.0 * D, delta).unwrap();
        (g.g_eff - gc.g_eff * gc.phase).norm() / gc.g_eff.norm()
    };
    let by_n: Vec<f64> = [100, 200, 400, 800].iter().map(|&n| rel(n, 400.0)).collect();
    assert!(by_n.windows(2).all(|w| w[1] < w[0]), "{by_n:?}");
    // the remaining gap is the finite-δ error of the parabolic band
    let by_delta: Vec<f64> = [100.0, 400.0, 1600.0].iter().map(|&div| rel(800, div)).collect();
    assert!(by_delta.windows(2).all(|w| w[1] < w[0]), "{by_delta:?}");
}

#[test]
fn continuum_overestimates_near_the_edge() {
    let cfg = gap_drive(100, &pair(14));
    let (s, c) = solve(&cfg);
    let e = edge_parameters(&cfg, &s, 0).unwrap();
    let (_, g) = tune_to_epsilon(&cfg, &s, &c, &e, 2e-3, Reference::BandEdge).unwrap();
    let gc = g_eff_continuum(&e, 14.0 * D, g.delta).unwrap();
    assert!(gc.g_eff.norm() > g.g_eff.re);
    assert!((g.epsilon - 2e-3).abs() < 1e-9);
}

#[test]
fn ratio_scales_with_drive() {
    let cfg = gap_drive(100, &pair(14));
    let e = edge_parameters(&cfg, &spectrum(&cfg), 0).unwrap();
    let mut stronger = cfg.clone();
    stronger.raman.as_mut().unwrap().delta *= 8.0;
    let r1 = g_eff_ratio(&cfg, &e, 14.0 * D, 2e-3).unwrap();
    let r8 = g_eff_ratio(&stronger, &e, 14.0 * D, 2e-3).unwrap();
    assert!((r8 / r1 - 4.0).abs() < 1e-10);
}

#[test]
fn ratio_matches_continuum_at_self_consistent_detuning() {
    let cfg = gap_drive(100, &pair(14));
    let e = edge_parameters(&cfg, &spectrum(&cfg), 0).unwrap();
    let real = EdgeParameters { gamma_n: 0.0, ..e };
    for m in [2usize, 8, 14, 30] {
        for eps in [1e-4, 2e-3, 1e-2] {
            let sep = m as f64 * D;
            let delta = continuum_delta_for_epsilon(&e, sep, eps).unwrap();
            let g = g_eff_continuum(&real, sep, delta).unwrap().g_eff.re;
            let r = g_eff_ratio(&cfg, &e, sep, eps).unwrap();
            assert!(((g / e.gamma_prime) / r - 1.0).abs() < 1e-8, "m {m} eps {eps}");
        }
    }
}

#[test]
fn chain_bound_scaling() {
    let cfg = gap_drive(100, &pair(14));
    let e = edge_parameters(&cfg, &spectrum(&cfg), 0).unwrap();
    assert_eq!(chain_population_bound(&e, 0.0), 0.0);
    let r = chain_population_bound(&e, 0.02) / chain_population_bound(&e, 0.01);
    assert!((r - 2.0 * 2f64.sqrt()).abs() < 1e-12);
}

#[test]
fn optimal_detuning_minimizes_two_term_error() {
    let cfg = gap_drive(100, &pair(14));
    let (s, c) = solve(&cfg);
    let e = edge_parameters(&cfg, &s, 0).unwrap();
    let op = optimal_protocol(&s, &c, &e, 0, 1);
    // brute-force log grid over four decades
    let (mut best, mut arg) = (f64::INFINITY, 0.0);
    for i in 0..=40_000 {
        let x = op.delta2_opt * 10f64.powf(-2.0 + 4.0 * i as f64 / 40_000.0);
        let v = op.two_term_error(x);
        if v < best {
            best = v;
            arg = x;
        }
    }
    assert!((arg / op.delta2_opt - 1.0).abs() < 0.01);
    assert!((best / op.error_opt - 1.0).abs() < 1e-6);
    let n2 = 100.0 * 100.0;
    let a = PI * op.gamma0_minus * op.delta2_opt / (op.g_mode * op.g_mode);
    let b = PI * op.gamma_n / (n2 * op.delta2_opt);
    assert!((a / b - 1.0).abs() < 1e-12);
}

#[test]
fn optimal_error_falls_with_n() {
    let errs: Vec<f64> = [100, 200, 400]
        .iter()
        .map(|&n| {
            let cfg = gap_drive(n, &pair(14));
            let (s, c) = solve(&cfg);
            let e = edge_parameters(&cfg, &s, 0).unwrap();
            optimal_protocol(&s, &c, &e, 0, 1).error_opt_closed_form
        })
        .collect();
    for w in errs.windows(2) {
        assert!((w[1] / w[0] - 0.5).abs() < 0.05, "{errs:?}");
    }
}

#[test]
fn error_budget_terms() {
    let cfg = gap_drive(100, &pair(14));
    let (s, c) = solve(&cfg);
    let e = edge_parameters(&cfg, &s, 0).unwrap();
    let (_, g) = tune_to_epsilon(&cfg, &s, &c, &e, 2e-3, Reference::BandEdge).unwrap();
    let b = error_budget(&e, &g).unwrap();
    assert!(b.decay_term >= 0.0 && b.linewidth_term >= 0.0 && b.chain_bound >= 0.0);
    assert!(b.total >= b.decay_term.max(b.linewidth_term));
}

#[test]
fn rabi_exchange_in_the_gap() {
    let cfg = gap_drive(100, &pair(14));
    let (s, c) = solve(&cfg);
    let e = edge_parameters(&cfg, &s, 0).unwrap();
    let (tuned, g) = tune_to_epsilon(&cfg, &s, &c, &e, 2e-3, Reference::BandEdge).unwrap();
    let b = error_budget(&e, &g).unwrap();
    let r = rabi_report(&tuned, &s, g.g_eff.re, &RabiOptions::default()).unwrap().report;
    assert!((r.re_g_measured / g.g_eff.re - 1.0).abs() < 0.1);
    assert!((r.error / b.total - 1.0).abs() < 0.25);
    assert!(r.p_transfer > 0.8);
    assert!(r.max_chain_population <= b.chain_bound);
}
