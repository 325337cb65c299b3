use bellcheck_core::engine::{
    chsh_report, correlation_band, empirical_table, frequency_band, per_pair_correlations,
    run_experiment, run_experiment_with, RunOptions, Schedule, HOEFFDING_DELTA,
};
use bellcheck_core::quantum::{run_quantum_experiment, singlet_correlation, AnglePair};
use bellcheck_core::zoo;
use bellcheck_core::{Outcome, Scalar, SettingPair, TrialRecord};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn mean(values: impl Iterator<Item = Outcome>) -> f64 {
    let (sum, n) = values.fold((0i64, 0usize), |(s, n), o| {
        (s + i64::from(o.value()), n + 1)
    });
    sum as f64 / n as f64
}

#[test]
fn cosine_sign_estimates_converge_across_seeds() {
    let model = zoo::by_name("cosine-sign", None).unwrap();
    let exact = per_pair_correlations(model.as_ref()).unwrap().to_f64();
    let n = 100_000;
    let band = correlation_band(n, HOEFFDING_DELTA);
    let mut exceed = [0; 4];
    for seed in 0..100 {
        let table = empirical_table(&run_experiment(model.as_ref(), n, seed).unwrap()).unwrap();
        for (k, pair) in SettingPair::ALL.into_iter().enumerate() {
            if (table.get(pair) - exact.get(pair)).abs() > band {
                exceed[k] += 1;
            }
        }
    }
    assert!(exceed.iter().all(|&k| k <= 3), "{exceed:?}");
}

#[test]
fn interleaved_schedule_estimates_the_same_quantity() {
    let model = zoo::by_name("dice-coin", None).unwrap();
    let options = RunOptions {
        threads: None,
        schedule: Schedule::Interleaved,
    };
    let log = run_experiment_with(model.as_ref(), 50_000, 3, &options).unwrap();
    assert_eq!(log.total_trials(), 200_000);
    let report = chsh_report(&log).unwrap();
    let exact = per_pair_correlations(model.as_ref()).unwrap();
    for (pair, e) in report.table.entries() {
        let band = correlation_band(log.series(pair).len(), HOEFFDING_DELTA);
        assert!((e - exact.get(pair).as_f64()).abs() <= band);
    }
}

#[test]
fn quantum_trials_match_singlet_and_do_not_signal() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let n = 40_000;
    let corr_band = correlation_band(n, HOEFFDING_DELTA);
    let freq_band = 2.0 * frequency_band(n, HOEFFDING_DELTA);
    for seed in 0..10 {
        let mut angle = || rng.random_range(-std::f64::consts::PI..std::f64::consts::PI);
        let angles = AnglePair::new(angle(), angle(), angle(), angle()).unwrap();
        let log = run_quantum_experiment(&angles, n, seed, &RunOptions::default()).unwrap();
        for pair in SettingPair::ALL {
            let series: &[TrialRecord] = log.series(pair);
            assert!(series.iter().all(|r| r.lambda.is_none()));
            let (a, b) = angles.angles(pair);
            let e = mean(series.iter().map(|r| r.alice * r.bob));
            assert!(
                (e - singlet_correlation(a, b)).abs() <= corr_band,
                "{pair} at seed {seed}"
            );
            // A ±1 mean is 2p - 1, so its band is twice the frequency band.
            assert!(mean(series.iter().map(|r| r.alice)).abs() <= freq_band);
            assert!(mean(series.iter().map(|r| r.bob)).abs() <= freq_band);
        }
    }
}
