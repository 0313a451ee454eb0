mod common;

use awq_core::chain::ansatz_mode;
use awq_core::config::{build_config, ChainGeometry, RamanDrive, RawChain, RawScenario};
use awq_core::coupling::{coupling_table, finite_envelope, EnvelopeKind};
use awq_core::dynamics::*;
use awq_core::greens::{dimer_eigenpair, Parity};
use awq_core::hamiltonian::{BasisLabel, EffectiveHamiltonian};
use awq_core::linalg::CMat;
use common::dimer;
use num_complex::Complex64;
use proptest::prelude::*;

fn passive(n: usize, entries: &[(f64, f64, f64)]) -> EffectiveHamiltonian {
    // Hermitian part minus i/2·MMᵀ with real M
    let e = |i: usize, j: usize| entries[i * n + j];
    let h = CMat::from_fn(n, n, |i, j| {
        let mm: f64 = (0..n).map(|k| e(i, k).2 * e(j, k).2).sum();
        Complex64::new(0.5 * (e(i, j).0 + e(j, i).0), 0.5 * (e(i, j).1 - e(j, i).1) - 0.05 * mm)
    });
    EffectiveHamiltonian::new(h, (1..=n).map(BasisLabel::Site).collect()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn dimer_linewidths_sum_to_two(r in 1e-3f64..3.0) {
        let (_, minus) = dimer_eigenpair(r, Parity::Anti).unwrap();
        let (_, plus) = dimer_eigenpair(r, Parity::Sym).unwrap();
        prop_assert!((minus + plus - 2.0).abs() < 1e-12);
        prop_assert!(minus >= -1e-15 && plus >= -1e-15);
    }

    #[test]
    fn ansatz_is_orthonormal(n in 2usize..160, d in 0.05f64..0.49) {
        let g = ChainGeometry::new(n, d).unwrap();
        let modes: Vec<Vec<f64>> = (1..=n).map(|nu| ansatz_mode(nu, &g)).collect();
        for a in 0..n {
            for b in a..n {
                let dot: f64 = modes[a].iter().zip(&modes[b]).map(|(x, y)| x * y).sum();
                let want = if a == b { 1.0 } else { 0.0 };
                prop_assert!((dot - want).abs() < 1e-12, "({a}, {b}): {dot}");
            }
        }
    }

    #[test]
    fn centered_dimer_selection_rules(half in 2usize..100, d in 0.1f64..0.45) {
        let n = 2 * half;
        let g = ChainGeometry::new(n, d).unwrap();
        for nu in 1..=n {
            let anti = finite_envelope(nu, 0.0, Parity::Anti, &g);
            let sym = finite_envelope(nu, 0.0, Parity::Sym, &g);
            if nu % 2 == 1 {
                prop_assert_eq!(anti, 0.0);
                prop_assert!(sym != 0.0);
            } else {
                prop_assert_eq!(sym, 0.0);
                prop_assert!(anti != 0.0);
            }
        }
        let raw = RawScenario {
            chain: RawChain { n, d },
            dimers: vec![dimer(0.0)],
            raman: None,
            impurity_detuning: 0.0,
            dimer_crosstalk_threshold: None,
        };
        let cfg = build_config(&raw).unwrap();
        let s = common::spectrum(&cfg);
        let t = coupling_table(&cfg, &s, EnvelopeKind::Finite).unwrap();
        for nu in (1..=n).step_by(2) {
            prop_assert_eq!(t.total(0, Parity::Anti, nu).norm(), 0.0);
            prop_assert_eq!(t.total(0, Parity::Sym, nu + 1).norm(), 0.0);
        }
    }

    #[test]
    fn norm_is_monotone(
        n in 10usize..50,
        d in 0.15f64..0.4,
        offset in -3i32..3,
        omega in 0.05f64..0.5,
        delta in 5.0f64..50.0,
        model in prop_oneof![Just(Model::Effective), Just(Model::FullEffective), Just(Model::FullRaman)],
    ) {
        let g = ChainGeometry::new(n, d).unwrap();
        let center = g.nearest_midpoint(offset as f64 * d);
        let raw = RawScenario {
            chain: RawChain { n, d },
            dimers: vec![dimer(center)],
            raman: Some(RamanDrive { omega, delta }),
            impurity_detuning: 0.0,
            dimer_crosstalk_threshold: None,
        };
        let cfg = build_config(&raw).unwrap();
        let s = common::spectrum(&cfg);
        let table = coupling_table(&cfg, &s, EnvelopeKind::Finite).unwrap();
        let h = build_model(&cfg, &s, &table, model).unwrap();
        let psi0 = h.dimer_state(0, Parity::Anti).unwrap();
        let traj = propagate(&h, &psi0, &geometric_grid(1e-2, 1e3, 200)).unwrap();
        prop_assert!(traj.max_norm_increase() < 1e-10, "{}", traj.max_norm_increase());
    }

    #[test]
    fn propagators_agree(
        n in 3usize..20,
        entries in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0), 400),
        t_end in 1.0f64..200.0,
    ) {
        let h = passive(n, &entries);
        let mut psi0: Vec<Complex64> = (0..n).map(|i| Complex64::new(entries[i].1, entries[i].2)).collect();
        let norm = psi0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        prop_assume!(norm > 1e-3);
        psi0.iter_mut().for_each(|z| *z /= norm);
        let times = uniform_grid(t_end, 20);
        let a = Propagator::with_method(&h, &psi0, Method::Eigen).unwrap().trajectory(&times).unwrap();
        let b = Propagator::with_method(&h, &psi0, Method::Integrator).unwrap().trajectory(&times).unwrap();
        for (x, y) in a.amplitudes.iter().zip(&b.amplitudes) {
            for (p, q) in x.iter().zip(y) {
                prop_assert!((p - q).norm() < 1e-6, "{}", (p - q).norm());
            }
        }
    }
}
