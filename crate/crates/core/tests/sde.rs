use skpha::legendre::DualEntropy;
use skpha::parisi::*;
use skpha::pha::{run_pha, PhaParams};
use skpha::potential::Objective;
use skpha::sde::*;
use skpha::SkInstance;
use std::sync::{Arc, OnceLock};

fn small_solution() -> Arc<ParisiSolution> {
    static SOL: OnceLock<Arc<ParisiSolution>> = OnceLock::new();
    SOL.get_or_init(|| {
        let mu = ParisiMeasure::from_atoms(&[(0.3, 0.2), (0.6, 0.6), (1.0, 1.0)]).unwrap();
        Arc::new(solve_pde(&mu, 1.5, &PdeGrid::default()).unwrap())
    })
    .clone()
}

fn minimized(beta: f64) -> ParisiMeasure {
    minimize_measure(beta, &MinimizeOptions::new(40)).unwrap().measure
}

#[test]
fn without_drift_the_dual_process_is_brownian() {
    let beta = 1.3;
    let sol = solve_pde(&ParisiMeasure::delta1(), beta, &PdeGrid::default()).unwrap();
    let ens = simulate_dual(&sol, &SimConfig::new(0.5, 20_000, 2).with_dt(1e-3).recording(vec![0.25, 0.5])).unwrap();
    for t in [0.25, 0.5] {
        let xs = ens.snapshot(t).unwrap();
        let p = xs.len() as f64;
        let var = xs.iter().map(|x| x * x).sum::<f64>() / p;
        let m4 = xs.iter().map(|x| x.powi(4)).sum::<f64>() / p;
        let target = 2.0 * beta * beta * t;
        assert!((var - target).abs() <= 3.0 * standard_error(var, m4, xs.len()), "t={t}: {var} vs {target}");
    }
}

#[test]
fn primal_process_is_centered_and_satisfies_the_isometry() {
    let de = DualEntropy::new(small_solution(), 1e-3).unwrap();
    let ens = simulate_primal(&de, &SimConfig::new(0.6, 20_000, 3).with_dt(1e-3).recording(vec![0.3, 0.6])).unwrap();
    let p = ens.paths();
    for t in [0.3, 0.6] {
        let m = ens.moments_at(t);
        assert!(m.mean.abs() <= 3.0 * standard_error(m.mean, m.second, p), "t={t}: {}", m.mean);
    }
    for (t, var, iso) in ito_isometry_gap(&ens).into_iter().step_by(100) {
        let se = standard_error(ens.moments_at(t).second, ens.moments_at(t).fourth, p);
        assert!((var - iso).abs() <= 3.0 * se + 2.0 * 1e-3, "t={t}: {var} vs {iso}");
    }
}

#[test]
fn unregularized_paths_stay_in_the_cube() {
    let de = DualEntropy::new(small_solution(), 0.0).unwrap();
    let ens = simulate_primal(&de, &SimConfig::new(0.6, 5_000, 4).with_dt(5e-4)).unwrap();
    assert!(ens.snapshot(0.6).unwrap().iter().all(|y| y.abs() <= 1.0));
    assert_eq!(ens.clamp_events, 0);
}

#[test]
fn closeness_vanishes_without_regularization_and_grows_with_time() {
    let de = DualEntropy::new(small_solution(), 0.0).unwrap();
    let cfg = SimConfig::new(0.5, 2_000, 5).with_dt(1e-3).recording(vec![0.1, 0.3, 0.5]);
    assert!(gamma_closeness_check(&de, &cfg).unwrap().iter().all(|r| r.distance == 0.0));
    let rows = gamma_closeness_check(&de.with_gamma(1e-3).unwrap(), &cfg).unwrap();
    for w in rows.windows(2) {
        assert!(w[1].distance >= w[0].distance - 3.0 * w[1].se, "{w:?}");
    }
    for r in &rows {
        assert!(r.distance <= r.bound + 3.0 * r.se, "{r:?}");
    }
}

#[test]
fn mapped_dual_paths_match_the_primal_law() {
    let sol = small_solution();
    let (paths, dt, t) = (20_000, 5e-4, 0.3);
    let cfg = SimConfig::new(t, paths, 6).with_dt(dt);
    let dual = simulate_dual(&sol, &cfg).unwrap();
    let mapped = &map_to_primal(&sol, &dual).unwrap()[0];
    let primal = simulate_primal(&DualEntropy::new(sol, 0.0).unwrap(), &SimConfig { seed: 7, ..cfg }).unwrap();
    let w2 = wasserstein2_1d(mapped, primal.snapshot(t).unwrap()).unwrap();
    let scale = 1.0 / (paths as f64).sqrt() + dt;
    assert!(w2 <= 3.0 * scale, "{w2} > {}", 3.0 * scale);
}

#[test]
fn trivial_measure_has_no_entropy_gain() {
    let beta = 1.0;
    let mu = ParisiMeasure::delta0();
    let de = DualEntropy::new(Arc::new(solve_pde(&mu, beta, &PdeGrid::default()).unwrap()), 0.0).unwrap();
    let ens = simulate_primal(&de, &SimConfig::new(0.0, 100, 1)).unwrap();
    let r = entropy_along_process(&de, &ens, mu.q_star()).unwrap();
    assert_eq!(r.q, 0.0);
    assert!(r.estimate.value.abs() < 1e-12 && r.estimate.target == 0.0, "{r:?}");
}

#[test]
fn entropy_along_the_process_matches_the_energy_target() {
    let beta = 2.0;
    let mu = minimized(beta);
    let q = mu.q_star();
    let de = DualEntropy::new(Arc::new(solve_pde(&mu, beta, &PdeGrid::default()).unwrap()), 0.0).unwrap();
    let dt = 5e-4;
    let ens = simulate_primal(&de, &SimConfig::new(q, 10_000, 8).with_dt(dt)).unwrap();
    let r = entropy_along_process(&de, &ens, q).unwrap();
    assert!((r.energy - energy_target(&mu, beta)).abs() < 1e-12);
    assert!(r.estimate.within(3.0, 2.0 * dt), "{r:?}");
}

#[test]
fn energy_target_grows_with_beta() {
    let e: Vec<f64> = [1.0, 1.5, 2.0].iter().map(|&b| energy_target(&minimized(b), b)).collect();
    assert!(e.windows(2).all(|w| w[1] > w[0]), "{e:?}");
}

#[test]
fn convergence_report_starts_at_zero() {
    let mu = ParisiMeasure::from_atoms(&[(0.3, 0.2), (0.6, 0.6), (1.0, 1.0)]).unwrap();
    let obj = Objective::new(
        Arc::new(SkInstance::sample(200, 1).unwrap()),
        DualEntropy::new(small_solution(), 1e-3).unwrap(),
        1.5,
    )
    .unwrap();
    let p = PhaParams { eta: 0.05, ..PhaParams::new(1.5) };
    let traj = run_pha(&obj, &p).unwrap();
    let times = traj.times();
    let cfg = SimConfig::new(*times.last().unwrap(), 2_000, 2).recording(times);
    let ens = simulate_primal(obj.dual(), &cfg).unwrap();
    let rows = convergence_report(&traj, &ens).unwrap();
    assert_eq!(rows.len(), p.step_count(mu.q_star()) + 1);
    assert_eq!(rows[0].w2, 0.0);
    assert!(rows.iter().all(|r| r.w2.is_finite() && r.w2 < 1.0));
    let other = simulate_primal(&obj.dual().with_gamma(1e-2).unwrap(), &cfg).unwrap();
    assert!(convergence_report(&traj, &other).is_err());
}
