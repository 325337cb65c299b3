//! End-to-end acceptance checks. Runs without the libtest harness so the
//! criteria execute one after another with undisturbed timings and always
//! print their verdicts.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, PI};
use std::time::{Duration, Instant};

use bellcheck_core::engine::{
    chsh_report, class_frequencies, correlation_band, frequency_band, mi_diagnostic,
    per_pair_correlations, pooled_class_weights, run_experiment, run_experiment_with,
    sampled_mi_tolerance, theoretical_chsh, theoretical_correlations, ClassWeights, RunOptions,
    Schedule,
};
use bellcheck_core::fine::{
    chsh_criterion, jp_feasible, jp_from_lhv, jp_of_model, random_statistics, statistics_of,
};
use bellcheck_core::ghz::{check_satisfiable, evaluate, ghz_constraint_system};
use bellcheck_core::quantum::{quantum_chsh, AnglePair};
use bellcheck_core::report::{run_report, to_json, RunSpec, QUANTUM_MODEL};
use bellcheck_core::zoo::{self, MODEL_NAMES};
use bellcheck_core::{
    Behavior, BehaviorStatistics, CorrelationTable, LhvModel, Outcome, Rational, Scalar,
    SettingIndex, SettingPair,
};
use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Criterion = (&'static str, Option<Duration>, fn() -> Verdict);

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn rat(p: i64, q: i64) -> Rational {
    Rational::new(p.into(), q.into())
}

fn sign(o: Outcome) -> i64 {
    if o == Outcome::Plus {
        1
    } else {
        -1
    }
}

/// CHSH combination of one deterministic behavior, written out by hand.
fn class_chsh(b: &Behavior) -> i64 {
    let (a1, a2, b1, b2) = (sign(b.a1), sign(b.a2), sign(b.b1), sign(b.b2));
    a1 * b1 - a1 * b2 + a2 * b1 + a2 * b2
}

/// Correlations straight from a model's source distribution and responses.
fn source_correlations(model: &dyn LhvModel, pair: SettingPair) -> Rational {
    model
        .exact_source(pair)
        .expect("zoo models publish a source")
        .into_iter()
        .map(|(lambda, p)| {
            let product = sign(model.respond_alice(pair.alice, &lambda))
                * sign(model.respond_bob(pair.bob, &lambda));
            p * rat(product, 1)
        })
        .sum()
}

fn lhv_bound() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(0xb0);
    let behaviors = Behavior::all();
    let mut exceptions = 0;
    let mut mismatches = 0;
    for trial in 0..10_000 {
        // Mix dense vectors with sparse ones that sit on vertices and edges.
        let support = if trial % 2 == 0 {
            16
        } else {
            rng.random_range(1..=3)
        };
        let mut raw = BTreeMap::new();
        for _ in 0..support {
            let b = behaviors[rng.random_range(0..16)];
            *raw.entry(b).or_insert(0i64) += rng.random_range(1..=1_000_000);
        }
        let total: i64 = raw.values().sum();
        let weights: BTreeMap<Behavior, Rational> =
            raw.iter().map(|(b, k)| (*b, rat(*k, total))).collect();
        let expected: Rational = weights.iter().map(|(b, w)| w * rat(class_chsh(b), 1)).sum();
        let s = theoretical_chsh(&ClassWeights::new(weights).unwrap()).s;
        if s.abs() > rat(2, 1) {
            exceptions += 1;
        }
        if s != expected {
            mismatches += 1;
        }
    }
    verdict(
        exceptions == 0 && mismatches == 0,
        format!("10000 vectors, {exceptions} exceed 2, {mismatches} oracle mismatches"),
    )
}

fn dice_reproduction() -> Verdict {
    let dice = zoo::by_name("dice-coin", None).unwrap();
    // a^λ b^(λ+1) averaged over a fair die, with index 1 = +1 and index 2 = -1.
    let coin = |i: SettingIndex| if i == SettingIndex::One { 1i64 } else { -1 };
    let oracle = |pair: SettingPair| -> Rational {
        (1..=6u32)
            .map(|l| rat(coin(pair.alice).pow(l) * coin(pair.bob).pow(l + 1), 6))
            .sum()
    };
    let exact = per_pair_correlations(dice.as_ref()).unwrap();
    let expected = CorrelationTable::new(rat(1, 1), rat(0, 1), rat(0, 1), rat(-1, 1)).unwrap();
    let oracle_ok = SettingPair::ALL
        .iter()
        .all(|&p| oracle(p) == *expected.get(p));
    let s = theoretical_chsh(&pooled_class_weights(dice.as_ref()).unwrap()).s;
    let analytic_ok = exact == expected && s.is_zero() && oracle_ok;

    let n = 100_000;
    let band = correlation_band(n, 0.01);
    let mut exceed = [0usize; 4];
    for seed in 0..100 {
        let report = chsh_report(&run_experiment(dice.as_ref(), n, seed).unwrap()).unwrap();
        for (slot, pair) in exceed.iter_mut().zip(SettingPair::ALL) {
            if (report.table.get(pair) - expected.get(pair).as_f64()).abs() > band {
                *slot += 1;
            }
        }
    }
    let sampled_ok = exceed.iter().all(|&k| k <= 3);
    verdict(
        analytic_ok && sampled_ok,
        format!("exact (1,0,0,-1) S=0: {analytic_ok}; exceedances per series over 100 seeds: {exceed:?} (band {band:.5})"),
    )
}

fn quantum_violation() -> Verdict {
    let angles = AnglePair::new(0.0, FRAC_PI_2, PI / 4.0, 3.0 * PI / 4.0).unwrap();
    let oracle = -2.0 * 2f64.sqrt();
    let s = quantum_chsh(&angles);
    let analytic_ok = (s - oracle).abs() <= 1e-12;
    let report = run_report(&RunSpec {
        angles: Some(angles),
        ..RunSpec::new(QUANTUM_MODEL, 1_000_000, 2024)
    })
    .unwrap();
    let s_star = report.chsh.s_star.abs();
    let sampled_ok = (2.80..=2.86).contains(&s_star);
    verdict(
        analytic_ok && sampled_ok,
        format!("S = {s:.15}, |S*| = {s_star:.5} at N = 1e6"),
    )
}

fn ghz_unsatisfiable() -> Verdict {
    let five = check_satisfiable(&ghz_constraint_system(FRAC_PI_2, true).unwrap()).unwrap();
    let four_system = ghz_constraint_system(FRAC_PI_2, false).unwrap();
    let four = check_satisfiable(&four_system).unwrap();
    let witness_ok = four.witness.as_ref().is_some_and(|w| {
        four_system
            .iter()
            .all(|c| evaluate(c, w) == Some(c.target()))
    });

    // Independent count: the eight values A0 Aφ A2φ B0 C0 Cφ D0 Dφ as bits.
    let mut oracle_four = 0;
    let mut oracle_five = 0;
    for bits in 0u32..256 {
        let v = |k: u32| if bits >> k & 1 == 1 { -1i32 } else { 1 };
        let (a0, ap, a2p, b0, c0, cp, d0, dp) = (v(0), v(1), v(2), v(3), v(4), v(5), v(6), v(7));
        let base = a0 * b0 * c0 * d0 == -1
            && ap * b0 * cp * d0 == -1
            && ap * b0 * c0 * dp == -1
            && a2p * b0 * cp * dp == -1;
        if base {
            oracle_four += 1;
            if a2p * b0 * c0 * d0 == 1 {
                oracle_five += 1;
            }
        }
    }
    let pass = !five.satisfiable
        && five.assignments_checked == 256
        && five.satisfying_assignments == oracle_five
        && four.satisfiable
        && witness_ok
        && four.satisfying_assignments == oracle_four;
    verdict(
        pass,
        format!(
            "five constraints: satisfiable={} checked={}; four: {} of 256 satisfy (oracle {oracle_four}), witness valid={witness_ok}",
            five.satisfiable, five.assignments_checked, four.satisfying_assignments
        ),
    )
}

fn random_zero_marginal_table<R: Rng>(rng: &mut R) -> BehaviorStatistics<Rational> {
    let q = rng.random_range(1..=12i64);
    let mut e = || rat(rng.random_range(-q..=q), q);
    BehaviorStatistics::zero_marginals(CorrelationTable::new(e(), e(), e(), e()).unwrap()).unwrap()
}

fn fine_equivalence() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(0xf1);
    let mut disagreements = 0;
    let mut bad_witness = 0;
    let mut feasible = 0;
    for k in 0..10_000 {
        let stats = if k % 2 == 0 {
            random_zero_marginal_table(&mut rng)
        } else {
            random_statistics(&mut rng, true)
        };
        let out = jp_feasible(&stats);
        let criterion = chsh_criterion(&stats.correlations);
        if out.feasible != criterion.all_pass {
            disagreements += 1;
        }
        if out.feasible {
            feasible += 1;
            if out.witness.as_ref().map(statistics_of) != Some(stats.clone()) {
                bad_witness += 1;
            }
        }
    }
    verdict(
        disagreements == 0 && bad_witness == 0 && feasible > 0 && feasible < 10_000,
        format!("{disagreements} disagreements, {feasible} feasible / 10000, {bad_witness} witnesses off"),
    )
}

fn fine_soundness() -> Verdict {
    let mut failures = Vec::new();
    for name in MODEL_NAMES {
        let model = zoo::by_name(name, None).unwrap();
        let weights = pooled_class_weights(model.as_ref()).unwrap();
        let via_jp = statistics_of(&jp_from_lhv(&weights)).correlations;
        let via_classes = theoretical_correlations(&weights);
        // Pooled correlations computed from the raw source, pair by pair.
        let oracle = CorrelationTable::from_fn(|pair| {
            SettingPair::ALL
                .iter()
                .map(|&src| source_correlations_at(model.as_ref(), src, pair))
                .sum::<Rational>()
                / rat(4, 1)
        })
        .unwrap();
        let same_jp = statistics_of(&jp_of_model(model.as_ref()).unwrap()).correlations == via_jp;
        if via_jp != via_classes || via_jp != oracle || !same_jp {
            failures.push(name);
        }
        if model.declares_mi() {
            let direct =
                CorrelationTable::from_fn(|pair| source_correlations(model.as_ref(), pair))
                    .unwrap();
            if direct != via_jp {
                failures.push(name);
            }
        }
    }
    verdict(
        failures.is_empty(),
        format!("{} models, mismatches: {failures:?}", MODEL_NAMES.len()),
    )
}

/// `E_pair` under the source the model uses for setting pair `src`.
fn source_correlations_at(model: &dyn LhvModel, src: SettingPair, pair: SettingPair) -> Rational {
    model
        .exact_source(src)
        .unwrap()
        .into_iter()
        .map(|(lambda, p)| {
            p * rat(
                sign(model.respond_alice(pair.alice, &lambda))
                    * sign(model.respond_bob(pair.bob, &lambda)),
                1,
            )
        })
        .sum()
}

fn class_cap() -> Verdict {
    let n = 250_000;
    let mut worst = 0;
    let mut dice_ok = false;
    let mut dice_detail = String::new();
    for name in MODEL_NAMES {
        let model = zoo::by_name(name, None).unwrap();
        let log = run_experiment(model.as_ref(), n, 17).unwrap();
        let freqs = class_frequencies(&log, model.as_ref()).unwrap();
        worst = worst
            .max(freqs.classes().len())
            .max(freqs.max_class_count());
        if name == "dice-coin" {
            let band = frequency_band(n, 0.01);
            let classes = freqs.classes();
            let expected: Vec<Behavior> = ["+-++", "+++-"]
                .iter()
                .map(|s| s.parse().unwrap())
                .collect();
            dice_ok = classes.len() == 2
                && expected.iter().all(|c| classes.contains(c))
                && freqs
                    .pairs()
                    .all(|(_, f)| f.values().all(|p| (p - 0.5).abs() <= band));
            dice_detail = format!("dice classes {}, band {band:.5}", classes.len());
        }
    }
    verdict(
        worst <= 16 && dice_ok,
        format!(
            "max classes over {} models at 1e6 trials: {worst}; {dice_detail}",
            MODEL_NAMES.len()
        ),
    )
}

fn mi_diagnostics() -> Verdict {
    let n = 100_000;
    let tolerance = sampled_mi_tolerance(n);
    let diagnose = |name: &str| {
        let model = zoo::by_name(name, None).unwrap();
        let log = run_experiment(model.as_ref(), n, 5).unwrap();
        let mi =
            mi_diagnostic(&class_frequencies(&log, model.as_ref()).unwrap(), tolerance).unwrap();
        (mi, chsh_report(&log).unwrap())
    };
    let (dice, _) = diagnose("dice-coin");
    let (cosine, _) = diagnose("cosine-sign");
    let (conspiracy, report) = diagnose("conspiracy");
    let s_ok = (report.s_star - 4.0).abs() <= 4.0 * report.hoeffding_epsilon;
    verdict(
        dice.holds && cosine.holds && !conspiracy.holds && s_ok && report.significant_violation,
        format!(
            "dice dev {:.4}, cosine dev {:.4}, conspiracy dev {:.4} (tol {tolerance:.4}), conspiracy S* = {}",
            dice.max_deviation, cosine.max_deviation, conspiracy.max_deviation, report.s_star
        ),
    )
}

fn reproducibility() -> Verdict {
    let models = MODEL_NAMES.iter().copied().chain([QUANTUM_MODEL]);
    let mut configs = Vec::new();
    for (k, model) in models.cycle().take(20).enumerate() {
        let schedule = if k % 3 == 2 {
            Schedule::Interleaved
        } else {
            Schedule::Independent
        };
        configs.push(RunSpec {
            schedule,
            ..RunSpec::new(model, 2_000 + 500 * k, 1_000 + k as u64)
        });
    }
    let identical = configs
        .iter()
        .filter(|spec| {
            let one = to_json(
                &run_report(&RunSpec {
                    threads: Some(1),
                    ..(*spec).clone()
                })
                .unwrap(),
            );
            let many = to_json(
                &run_report(&RunSpec {
                    threads: Some(4),
                    ..(*spec).clone()
                })
                .unwrap(),
            );
            // A direct engine run with the default pool must agree as well.
            let direct = (spec.model != QUANTUM_MODEL).then(|| {
                let model = zoo::by_name(&spec.model, None).unwrap();
                let options = RunOptions {
                    threads: Some(3),
                    schedule: spec.schedule,
                };
                chsh_report(
                    &run_experiment_with(model.as_ref(), spec.n_per_series, spec.seed, &options)
                        .unwrap(),
                )
                .unwrap()
            });
            let parsed: bellcheck_core::report::RunReport = serde_json::from_str(&one).unwrap();
            one == many && direct.is_none_or(|d| d == parsed.chsh)
        })
        .count();
    verdict(
        identical == configs.len(),
        format!(
            "{identical}/{} configurations byte-identical",
            configs.len()
        ),
    )
}

fn main() {
    let criteria: [Criterion; 9] = [
        (
            "1 LHV bound over random class weights",
            Some(Duration::from_secs(5)),
            lhv_bound,
        ),
        (
            "2 dice-coin exact values and seed sweep",
            Some(Duration::from_secs(30)),
            dice_reproduction,
        ),
        (
            "3 singlet violation",
            Some(Duration::from_secs(60)),
            quantum_violation,
        ),
        (
            "4 GHZ unsatisfiability",
            Some(Duration::from_secs(1)),
            ghz_unsatisfiable,
        ),
        (
            "5 joint probability iff CHSH facets",
            Some(Duration::from_secs(60)),
            fine_equivalence,
        ),
        (
            "6 joint probability of LHV models",
            Some(Duration::from_secs(1)),
            fine_soundness,
        ),
        ("7 at most sixteen classes", None, class_cap),
        (
            "8 measurement-independence diagnostic",
            None,
            mi_diagnostics,
        ),
        ("9 worker-count reproducibility", None, reproducibility),
    ];
    let mut failed = 0;
    for (name, limit, check) in criteria {
        let start = Instant::now();
        let v = check();
        let elapsed = start.elapsed();
        let in_time = limit.is_none_or(|l| elapsed < l);
        let pass = v.pass && in_time;
        if !pass {
            failed += 1;
        }
        let budget = limit.map_or(String::new(), |l| format!(" / {}s", l.as_secs()));
        println!(
            "{} criterion {name}: {} [{:.2}s{budget}]",
            if pass { "PASS" } else { "FAIL" },
            v.detail,
            elapsed.as_secs_f64()
        );
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
