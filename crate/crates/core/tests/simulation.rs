use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use spatial_polling::experiments::corpus;
use spatial_polling::kernels::drift::{energy_drift, population_drift, scan_success_after_arrivals};
use spatial_polling::simulator::*;
use spatial_polling::*;

fn exp_params(lambda: f64, r: f64) -> SystemParams {
    SystemParams::new(lambda, r, 1.0, InterpollingDistribution::exponential(1.0).unwrap()).unwrap()
}

fn det_params(lambda: f64, r: f64) -> SystemParams {
    SystemParams::new(lambda, r, 1.0, InterpollingDistribution::deterministic(1.0).unwrap()).unwrap()
}

fn empty() -> Configuration {
    Configuration::empty(1.0).unwrap()
}

#[test]
fn light_traffic_path_is_often_empty() {
    let path = run_path(&exp_params(0.1, 0.1), 10_000, 1, &empty()).unwrap();
    assert_eq!(path.population.len(), 10_001);
    assert!(path.empty_fraction() > 0.3, "{}", path.empty_fraction());
}

#[test]
fn heavy_traffic_path_is_rarely_empty() {
    let path = run_path(&exp_params(0.9, 0.1), 10_000, 1, &empty()).unwrap();
    assert!(path.empty_fraction() < 0.05, "{}", path.empty_fraction());
}

#[test]
fn overloaded_path_grows() {
    let path = run_path(&exp_params(1.1, 0.1), 10_000, 2, &empty()).unwrap();
    assert!(path.population[10_000] > 100);
}

#[test]
fn paths_are_reproducible_and_snapshots_match_populations() {
    let p = exp_params(0.6, 0.15);
    let init = Configuration::from_locations(1.0, [0.2, 0.2, 0.7]).unwrap();
    let a = run_path_with_snapshots(&p, 500, 42, &init, &[0, 10, 500]).unwrap();
    let b = run_path_with_snapshots(&p, 500, 42, &init, &[0, 10, 500]).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.snapshots.len(), 3);
    assert_eq!(a.snapshots[0].1, init);
    for (t, z) in &a.snapshots {
        assert_eq!(z.total_variation(), a.population[*t as usize]);
    }
    let c = run_path(&p, 500, 43, &init).unwrap();
    assert_ne!(a.population, c.population);
}

#[test]
fn zero_steps_rejected() {
    assert!(run_path(&exp_params(0.5, 0.1), 0, 0, &empty()).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn population_bookkeeping(lambda in 0.05f64..2.0, r in 0.01f64..0.5, seed in any::<u64>()) {
        let path = run_path(&exp_params(lambda, r), 300, seed, &empty()).unwrap();
        prop_assert_eq!(path.population.len(), 301);
        for t in 0..300 {
            let expected = path.population[t] as i64 + i64::from(path.arrivals[t]) - i64::from(path.served[t]);
            prop_assert_eq!(path.population[t + 1] as i64, expected);
        }
    }

    #[test]
    fn larger_radius_never_has_more_customers(lambda in 0.2f64..1.5, r in 0.01f64..0.5, seed in any::<u64>()) {
        let init = Configuration::from_locations(1.0, [0.1, 0.4, 0.4, 0.9]).unwrap();
        let c = coupled_paths(&exp_params(lambda, r), &[0.5, r], 500, seed, &init).unwrap();
        prop_assert!(c.dominated(0, 1));
    }
}

#[test]
fn emptying_bound_for_small_populations() {
    let p = exp_params(0.5, 0.1);
    let eps = p.interpolling().mixed_poisson_pmf(p.lambda(), 0).unwrap();
    let m = p.ball_measure();
    let starts = [
        Configuration::from_locations(1.0, [0.3]).unwrap(),
        Configuration::from_locations(1.0, [0.3, 0.8]).unwrap(),
        Configuration::from_locations(1.0, [0.1, 0.1, 0.6]).unwrap(),
    ];
    for (i, z) in starts.iter().enumerate() {
        let n = z.total_variation();
        let reps = 1_000_000;
        let prob = emptying_probability(z, &p, n, reps, i as u64).unwrap();
        let bound = (eps * m).powi(n as i32);
        let se = (bound * (1.0 - bound) / reps as f64).sqrt();
        assert!(prob >= bound - 4.0 * se, "n={n}: {prob} < {bound}");
    }
}

#[test]
fn drift_monte_carlo_matches_exact_population_and_energy() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let p = exp_params(0.7, 0.1);
    let ep = EnergyParams::auto(0.1, 1.0).unwrap();
    for i in 0..4 {
        let z = corpus::random_positive(&mut rng, 1.0, 10, 3);
        let exact_pop = population_drift(&z, &p).unwrap();
        let mc = drift_monte_carlo(&z, &p, DriftFunctional::Population, 200_000, i).unwrap();
        assert!((mc.value - exact_pop).abs() < 4.0 * mc.stderr, "{mc:?} vs {exact_pop}");
        let via_scan = p.load() - scan_success_after_arrivals(&z, &p);
        assert!((via_scan - exact_pop).abs() < 1e-12);
        let exact_h = energy_drift(&z, &p, &ep).unwrap();
        let mc = drift_monte_carlo(&z, &p, DriftFunctional::Energy(ep), 200_000, 100 + i).unwrap();
        assert!((mc.value - exact_h).abs() < 4.0 * mc.stderr, "{mc:?} vs {exact_h}");
    }
}

#[test]
fn drift_from_empty_with_deterministic_times() {
    // A point is missed by all of n uniform r-balls with probability
    // (1 - 2r)^n, so from empty the drift is λ - (1 - e^{-2rλ}).
    let p = det_params(0.8, 0.1);
    let closed = 0.8 - (1.0 - (-0.16f64).exp());
    let exact = population_drift(&empty(), &p).unwrap();
    assert!((exact - closed).abs() < 1e-12, "{exact} vs {closed}");
    let mc = drift_monte_carlo(&empty(), &p, DriftFunctional::Population, 400_000, 5).unwrap();
    assert!((mc.value - closed).abs() < 4.0 * mc.stderr, "{mc:?} vs {closed}");
}

#[test]
fn seminorm_drift_is_negative_above_the_threshold() {
    let p = exp_params(0.5, 0.25);
    let ep = EnergyParams::auto(0.25, 1.0).unwrap();
    let g = p.interpolling();
    let consts = lyapunov::drift_constants(p.lambda(), g.s1(), g.s2(), &ep).unwrap();
    let (n, alpha) = lyapunov::seminorm_drift_threshold(&consts, &ep).unwrap();
    assert!(alpha > 0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut configs = vec![
        Configuration::cluster(1.0, 0.5, n as u32 + 1).unwrap(),
        Configuration::cluster(1.0, 0.5, 200).unwrap(),
        corpus::uniform(&mut rng, 1.0, n as usize + 5),
        corpus::two_cluster(&mut rng, 1.0, 20, 30),
    ];
    configs.push(corpus::uniform(&mut rng, 1.0, 80));
    for (i, z) in configs.iter().enumerate() {
        assert!(z.total_variation() > n);
        let f = DriftFunctional::Seminorm(ep);
        let mc = drift_monte_carlo(z, &p, f, 100_000, i as u64).unwrap();
        assert!(mc.value + alpha < 4.0 * mc.stderr, "config {i}: drift {mc:?}, alpha {alpha}");
    }
}

#[test]
fn exponential_seminorm_drift_is_estimated() {
    let p = exp_params(0.5, 0.25);
    let ep = EnergyParams::auto(0.25, 1.0).unwrap();
    let z = Configuration::cluster(1.0, 0.1, 50).unwrap();
    let f = DriftFunctional::ExpSeminorm { params: ep, beta: 0.5 };
    let mc = drift_monte_carlo(&z, &p, f, 20_000, 1).unwrap();
    let v0 = f.to_functional().eval(&z);
    assert!(mc.value < 0.0 && mc.value > -v0, "{mc:?}");
}

#[test]
fn light_traffic_stationary_mean() {
    let est = stationary_estimate(&exp_params(0.1, 0.1), 5000, 10_000_000, 11).unwrap();
    assert!((est.mean_population - 0.5).abs() < 0.125, "{est:?}");
    assert_eq!(est.method, EstimateMethod::Regenerative);
}

#[test]
fn vanishing_arrival_rate_gives_vanishing_mean() {
    let est = stationary_estimate(&exp_params(1e-4, 0.1), 2000, 10_000_000, 2).unwrap();
    assert!(est.mean_population < 5e-3, "{est:?}");
}

#[test]
fn full_circle_scan_matches_scalar_queue() {
    let g = InterpollingDistribution::deterministic(1.0).unwrap();
    let sp = stationary_estimate(&det_params(0.5, 0.5), 100_000, 50_000_000, 21).unwrap();
    let oracle = autonomous_queue_oracle(0.5, &g, 500_000, 22).unwrap();
    assert!(sp.agrees_with(&oracle), "{sp:?} {oracle:?}");
}

#[test]
fn scalar_queue_absorbs_without_arrivals_and_grows_when_overloaded() {
    let g = InterpollingDistribution::exponential(1.0).unwrap();
    let tiny = autonomous_queue_path(1e-9, &g, 1000, 1).unwrap();
    assert!(tiny.iter().all(|&n| n == 0));
    let over = autonomous_queue_path(1.3, &g, 40_000, 1).unwrap();
    let early: f64 = over[1..10_001].iter().sum::<u64>() as f64 / 10_000.0;
    let late: f64 = over[30_001..].iter().sum::<u64>() as f64 / 10_000.0;
    assert!(late > early + 1000.0, "{early} {late}");
}

#[test]
fn regeneration_is_consistent_across_seed_sets() {
    let p = exp_params(0.5, 0.1);
    let a = stationary_estimate_with(
        &p,
        &StationaryOptions {
            min_cycles: 3000,
            max_steps: 10_000_000,
            seed: 100,
            workers: 2,
        },
    )
    .unwrap();
    let b = stationary_estimate(&p, 3000, 10_000_000, 200).unwrap();
    assert!(a.agrees_with(&b), "{a:?} {b:?}");
}

#[test]
fn laplace_identity_holds_in_light_traffic() {
    let p = exp_params(0.1, 0.1);
    let sample = laplace_sample(&p, 300_000, 4).unwrap();
    for theta in [1.0, 20.0] {
        let res = laplace_residual(&p, theta, &sample).unwrap();
        assert!(res.within(3.0), "{res:?}");
    }
}

#[test]
fn laplace_residual_vanishes_without_arrivals() {
    let p = exp_params(1e-9, 0.1);
    let sample = laplace_sample(&p, 10_000, 1).unwrap();
    let res = laplace_residual(&p, 1.0, &sample).unwrap();
    assert!((res.lhs - 1.0).abs() < 1e-6);
    assert!(res.residual.abs() < 1e-6);
}

#[test]
fn heavier_load_has_flatter_tail() {
    let light = stationary_run(&exp_params(0.5, 0.1), 400_000, 1).unwrap();
    let heavy = stationary_run(&exp_params(0.9, 0.1), 2_000_000, 1).unwrap();
    let fl = tail_geometric_fit(&light).unwrap();
    let fh = tail_geometric_fit(&heavy).unwrap();
    assert!(fl.r_squared > 0.95 && fh.rate < 0.0);
    assert!(fh.rate > fl.rate, "{} vs {}", fh.rate, fl.rate);
}
