use super::*;
use crate::error::Error;
use crate::measures::{ks_two_sample, Sample};
use crate::model::{Drift, InitialLaw, MainJump, Rate};
use statrs::distribution::{ChiSquared, ContinuousCDF, Discrete, Poisson};

fn collateral_only(alpha: f64, c: f64) -> ModelSpec {
    ModelSpec {
        alpha,
        drift: Drift::Zero,
        main_jump: MainJump::Zero,
        rate: Rate::Constant { c },
        initial: InitialLaw::Uniform { lo: -1.0, hi: 1.0 },
    }
}

fn full_half() -> ModelSpec {
    ModelSpec {
        alpha: 0.5,
        drift: Drift::TanhToMean { beta: 0.5 },
        main_jump: MainJump::TanhRestoring { kappa: 0.3 },
        rate: Rate::Sigmoid { c0: 1.0, c1: 1.0 },
        initial: InitialLaw::Uniform { lo: -1.0, hi: 1.0 },
    }
}

fn half_law() -> DoaLaw {
    DoaLaw::symmetric_pareto(0.5, 1.0).unwrap()
}

#[test]
fn single_particle_never_moves_without_drift_or_main_jumps() {
    let b = simulate_finite(
        &collateral_only(0.5, 3.0),
        1,
        5.0,
        &half_law(),
        &SeedTree::new(1),
    )
    .unwrap();
    assert!(b.accepted_events().count() > 0);
    let p = b.path(0);
    assert!(p.iter().all(|&x| x == p[0]));
}

#[test]
fn zero_horizon_returns_initial_state() {
    let b = simulate_finite(&full_half(), 7, 0.0, &half_law(), &SeedTree::new(2)).unwrap();
    assert_eq!(b.len(), 1);
    assert!(b.events().is_empty());
}

#[test]
fn rejects_bad_inputs() {
    let law = half_law();
    assert!(simulate_finite(&full_half(), 0, 1.0, &law, &SeedTree::new(1)).is_err());
    let law15 = DoaLaw::symmetric_pareto(1.5, 1.0).unwrap();
    assert!(simulate_finite(&full_half(), 4, 1.0, &law15, &SeedTree::new(1)).is_err());
}

#[test]
fn overflow_aborts_with_event_index() {
    let spec = collateral_only(0.01, 10.0);
    let law = DoaLaw::symmetric_pareto(0.01, 1.0).unwrap();
    let err = simulate_finite(&spec, 50, 10.0, &law, &SeedTree::new(3)).unwrap_err();
    assert!(matches!(err, Error::NonFiniteEvent { .. }), "{err}");
    assert!(err.is_numeric());
}

#[test]
fn constant_rate_event_count_is_poisson() {
    // With f = sup f every candidate is accepted: count ~ Poisson(N c T).
    let (n, c, t) = (10usize, 1.0, 2.0);
    let spec = collateral_only(0.5, c);
    let root = SeedTree::new(77);
    let counts: Vec<u64> = (0..500)
        .map(|r| {
            let b = simulate_finite(&spec, n, t, &half_law(), &root.subtree("rep", r)).unwrap();
            assert!(b.events().iter().all(|e| e.accepted));
            b.events().len() as u64
        })
        .collect();
    let pois = Poisson::new(n as f64 * c * t).unwrap();
    // bins [0,13], 14..=27 one each, [28, inf)
    let mut edges = vec![0u64];
    edges.extend(14..=28);
    let mut chi2 = 0.0;
    for w in 0..edges.len() {
        let lo = edges[w];
        let hi = edges.get(w + 1).copied();
        let p: f64 = match hi {
            Some(h) => (lo..h).map(|k| pois.pmf(k)).sum(),
            None => 1.0 - (0..lo).map(|k| pois.pmf(k)).sum::<f64>(),
        };
        let obs = counts
            .iter()
            .filter(|&&k| k >= lo && hi.is_none_or(|h| k < h))
            .count() as f64;
        let exp = 500.0 * p;
        assert!(exp >= 5.0, "bin {lo} expected {exp}");
        chi2 += (obs - exp).powi(2) / exp;
    }
    let dof = (edges.len() - 1) as f64;
    let p = 1.0 - ChiSquared::new(dof).unwrap().cdf(chi2);
    assert!(p > 0.01, "chi2 {chi2} p {p}");
}

#[test]
fn driftless_displacement_is_collateral_minus_self() {
    let b = simulate_finite(
        &collateral_only(0.7, 2.0),
        20,
        3.0,
        &DoaLaw::symmetric_pareto(0.7, 1.0).unwrap(),
        &SeedTree::new(4),
    )
    .unwrap();
    for i in 0..20 {
        let d = decompose_trajectory(&b, i).unwrap();
        let p = b.path(i);
        for k in 0..b.len() {
            assert_eq!(d.drift[k], 0.0);
            assert_eq!(d.main_jumps[k], 0.0);
            let lhs = p[k] - p[0];
            let rhs = d.collateral[k] - d.self_collateral[k];
            assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + rhs.abs()));
        }
    }
}

#[test]
fn cumulated_intensity_constant_rate_is_exact() {
    let b = simulate_finite(
        &collateral_only(0.5, 1.0),
        5,
        2.0,
        &half_law(),
        &SeedTree::new(5),
    )
    .unwrap();
    let tc = cumulated_intensity(&b);
    for (t, a) in tc.knots.iter().zip(&tc.values) {
        assert_eq!(t, a);
    }
    let b = simulate_finite(
        &collateral_only(0.5, 2.5),
        5,
        2.0,
        &half_law(),
        &SeedTree::new(5),
    )
    .unwrap();
    assert_eq!(*cumulated_intensity(&b).values.last().unwrap(), 2.5 * 2.0);
}

#[test]
fn cumulated_intensity_respects_rate_bounds() {
    let spec = full_half();
    for seed in 0..5 {
        let b = simulate_finite(&spec, 30, 3.0, &half_law(), &SeedTree::new(seed)).unwrap();
        let tc = cumulated_intensity(&b);
        assert_eq!(tc.values[0], 0.0);
        assert!(tc.bound_violation(spec.f_lower(), spec.f_upper()) <= 1e-12);
        // brute-force pair check on a prefix of the grid
        let m = tc.knots.len().min(300);
        for s in 0..m {
            for t in s + 1..m {
                let da = tc.values[t] - tc.values[s];
                let dt = tc.knots[t] - tc.knots[s];
                assert!(da >= spec.f_lower() * dt - 1e-12 && da <= spec.f_upper() * dt + 1e-12);
            }
        }
    }
}

#[test]
fn time_change_inverse_roundtrip() {
    let b = simulate_finite(&full_half(), 10, 2.0, &half_law(), &SeedTree::new(6)).unwrap();
    let tc = cumulated_intensity(&b);
    for t in [0.1, 0.5, 1.3, 1.99] {
        let a = tc.value_at(t);
        assert!((tc.inverse(a).unwrap() - t).abs() < 1e-9);
    }
    assert!(tc.inverse(1e9).is_none());
}

#[test]
fn decomposition_without_events_is_pure_drift() {
    let spec = full_half();
    let b = simulate_finite(&spec, 3, 1e-4, &half_law(), &SeedTree::new(8)).unwrap();
    assert!(b.events().is_empty());
    for i in 0..3 {
        let d = decompose_trajectory(&b, i).unwrap();
        assert!(d
            .collateral
            .iter()
            .chain(&d.self_collateral)
            .chain(&d.main_jumps)
            .all(|&v| v == 0.0));
        let p = b.path(i);
        assert!((d.drift.last().unwrap() - (p.last().unwrap() - p[0])).abs() < 1e-15);
    }
    assert!(decompose_trajectory(&b, 3).is_err());
}

#[test]
fn single_event_hand_computation() {
    let spec = collateral_only(0.5, 1.0);
    let ev = EventRecord {
        time: 0.5,
        particle: 0,
        accepted: true,
        u: Some(2.0),
        main_jump: 0.0,
    };
    let b = TrajectoryBundle::replay(&spec, vec![0.0; 16], 1.0, vec![ev]).unwrap();
    let d0 = decompose_trajectory(&b, 0).unwrap();
    let d3 = decompose_trajectory(&b, 3).unwrap();
    let last = b.len() - 1;
    assert_eq!(d0.collateral[last], 0.0078125);
    assert_eq!(d0.self_collateral[last], 0.0078125);
    assert_eq!(d3.self_collateral[last], 0.0);
    assert_eq!(b.final_state()[0], 0.0);
    assert_eq!(b.final_state()[5], 0.0078125);
}

#[test]
fn decomposition_reconstructs_full_model() {
    let spec = full_half();
    for seed in 0..3 {
        let b = simulate_finite(&spec, 25, 3.0, &half_law(), &SeedTree::new(seed)).unwrap();
        assert!(b.accepted_events().any(|e| e.main_jump != 0.0));
        for i in 0..25 {
            let d = decompose_trajectory(&b, i).unwrap();
            assert!(d.reconstruction_error(&b) <= 1e-9 * 3.0);
        }
    }
}

#[test]
fn transformed_times_examples() {
    let spec = collateral_only(0.5, 2.0);
    let b = TrajectoryBundle::replay(&spec, vec![0.0; 4], 1.0, vec![]).unwrap();
    assert!(transformed_event_times(&b).is_empty());

    let (n, c) = (4usize, 2.0);
    let events = (1..=6)
        .map(|k| EventRecord {
            time: k as f64 / (n as f64 * c),
            particle: k % n,
            accepted: true,
            u: Some(1.0),
            main_jump: 0.0,
        })
        .collect();
    let b = TrajectoryBundle::replay(&spec, vec![0.0; n], 1.0, events).unwrap();
    let s = transformed_event_times(&b);
    for (k, v) in s.iter().enumerate() {
        assert!((v - (k + 1) as f64).abs() < 1e-12);
    }
}

#[test]
fn replay_validates_log() {
    let spec = collateral_only(0.5, 1.0);
    let bad = EventRecord {
        time: 0.5,
        particle: 0,
        accepted: true,
        u: None,
        main_jump: 0.0,
    };
    assert!(TrajectoryBundle::replay(&spec, vec![0.0; 2], 1.0, vec![bad]).is_err());
    let late = EventRecord {
        time: 2.0,
        particle: 0,
        accepted: false,
        u: None,
        main_jump: 0.0,
    };
    assert!(TrajectoryBundle::replay(&spec, vec![0.0; 2], 1.0, vec![late]).is_err());
}

#[test]
fn event_log_invariants_and_collateral_symmetry() {
    let b = simulate_finite(&full_half(), 12, 4.0, &half_law(), &SeedTree::new(9)).unwrap();
    assert!(b.events().windows(2).all(|w| w[0].time < w[1].time));
    assert!(b.events().iter().all(|e| e.accepted == e.u.is_some()));
    assert!(b.events().iter().any(|e| !e.accepted));
    for (k, kind) in b.kinds().iter().enumerate() {
        if let GridKind::Accepted(idx) = *kind {
            let ev = b.events()[idx];
            let d = ev.u.unwrap() * b.collateral_scale;
            let (pre, post) = (b.left_limit(k), b.state(k));
            for j in 0..b.n {
                if j == ev.particle {
                    assert_eq!(post[j], pre[j] + ev.main_jump);
                } else {
                    assert_eq!(post[j], pre[j] + d);
                }
            }
        }
    }
}

#[test]
fn rejected_candidates_leave_state_unchanged() {
    let spec = ModelSpec {
        drift: Drift::Zero,
        ..full_half()
    };
    let b = simulate_finite(&spec, 12, 4.0, &half_law(), &SeedTree::new(10)).unwrap();
    for k in 1..b.len() {
        if let GridKind::Rejected(_) = b.kinds()[k] {
            assert_eq!(b.state(k), b.state(k - 1));
        }
    }
}

#[test]
fn deterministic_bit_for_bit() {
    let run = || simulate_finite(&full_half(), 15, 2.0, &half_law(), &SeedTree::new(123)).unwrap();
    let (a, b) = (run(), run());
    assert_eq!(a.grid(), b.grid());
    assert_eq!(a.events(), b.events());
    for k in 0..a.len() {
        assert!(a
            .state(k)
            .iter()
            .zip(b.state(k))
            .all(|(x, y)| x.to_bits() == y.to_bits()));
    }
}

#[test]
fn permutation_equivariance() {
    let spec = full_half();
    let n = 9;
    let seeds = SeedTree::new(31);
    let x0: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin()).collect();
    let sigma = [3usize, 0, 7, 1, 8, 2, 6, 4, 5];
    let mut y0 = vec![0.0; n];
    for i in 0..n {
        y0[sigma[i]] = x0[i];
    }
    let base = FiniteOptions {
        initial_positions: Some(x0),
        ..Default::default()
    };
    let perm = FiniteOptions {
        initial_positions: Some(y0),
        index_map: Some(sigma.to_vec()),
        ..Default::default()
    };
    let a = simulate_finite_with(&spec, n, 3.0, &half_law(), &seeds, &base).unwrap();
    let b = simulate_finite_with(&spec, n, 3.0, &half_law(), &seeds, &perm).unwrap();
    assert_eq!(a.grid(), b.grid());
    for k in 0..a.len() {
        for (i, &j) in sigma.iter().enumerate() {
            assert_eq!(a.state(k)[i].to_bits(), b.state(k)[j].to_bits());
        }
    }
    for (ea, eb) in a.events().iter().zip(b.events()) {
        assert_eq!(sigma[ea.particle], eb.particle);
        assert_eq!(ea.u, eb.u);
    }
}

#[test]
fn snapshots_match_full_bundle() {
    let spec = full_half();
    let seeds = SeedTree::new(41);
    let times = [0.0, 0.5, 1.0];
    let opts = FiniteOptions {
        stops: times.to_vec(),
        ..Default::default()
    };
    let full = simulate_finite_with(&spec, 8, 1.0, &half_law(), &seeds, &opts).unwrap();
    let snaps = snapshots_finite(
        &spec,
        8,
        1.0,
        &half_law(),
        &seeds,
        &times,
        &FiniteOptions::default(),
    )
    .unwrap();
    assert_eq!(snaps.len(), 3);
    for (t, xs) in &snaps {
        assert_eq!(full.state_at(*t), &xs[..]);
    }
}

#[test]
fn fast_path_matches_full_simulation_in_law() {
    let (n, c) = (16usize, 1.0);
    let law = half_law();
    let spec = ModelSpec {
        initial: InitialLaw::PointMass { x: 0.0 },
        ..collateral_only(0.5, c)
    };
    let root = SeedTree::new(55);
    let reps = 3000;
    let full: Vec<f64> = (0..reps)
        .map(|r| {
            let b = simulate_finite(&spec, n, 1.0, &law, &root.subtree("full", r)).unwrap();
            let d = decompose_trajectory(&b, 0).unwrap();
            *d.collateral.last().unwrap()
        })
        .collect();
    let fast: Vec<f64> = (0..reps)
        .map(|r| collateral_sum_fast(n, c, 1.0, &law, &mut root.stream("fast", r)).unwrap())
        .collect();
    let ks = ks_two_sample(&Sample::new(full).unwrap(), &Sample::new(fast).unwrap());
    assert!(ks.p_value > 0.001, "{ks:?}");
}

#[test]
fn zero_collateral_scale_switches_off_interaction() {
    let spec = collateral_only(0.5, 2.0);
    let opts = FiniteOptions {
        collateral_scale: Some(0.0),
        ..Default::default()
    };
    let b = simulate_finite_with(&spec, 10, 2.0, &half_law(), &SeedTree::new(3), &opts).unwrap();
    assert!(b.accepted_events().count() > 0);
    assert_eq!(b.final_state(), b.state(0));
}
