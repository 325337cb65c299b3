//! Experiment runner and CHSH statistics.
//!
//! The empirical path runs four series of trials and estimates each
//! correlation as the mean product of clicks. The analytic path works on
//! distributions over the sixteen behavior classes, where the CHSH value is a
//! convex combination of per-class values `C = ±2`.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, ModelError, Result};
use crate::model::{behavior_of, Behavior, CorrelationTable, LhvModel, SettingPair, TrialRecord};
use crate::rng::{self, TrialRng};
use crate::scalar::{from_usize, two, Rational, Scalar};

/// Confidence parameter used for every reported band (99% two-sided).
pub const HOEFFDING_DELTA: f64 = 0.01;

/// Tolerance for the exact-path measurement-independence check.
pub const EXACT_MI_TOLERANCE: f64 = 1e-12;

/// How trials are assigned to setting pairs.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Schedule {
    /// `n` trials per pair, one independent series per pair.
    #[default]
    Independent,
    /// `4n` trials, each choosing its setting pair uniformly at random.
    Interleaved,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunOptions {
    /// Worker threads; `None` uses the ambient rayon pool.
    pub threads: Option<usize>,
    pub schedule: Schedule,
}

/// Four series of trial records, one per setting pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrialLog {
    series: [Vec<TrialRecord>; 4],
    seed: u64,
    n_per_series: usize,
    schedule: Schedule,
}

impl TrialLog {
    pub fn series(&self, pair: SettingPair) -> &[TrialRecord] {
        &self.series[pair.ordinal()]
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Requested trials per series. Interleaved logs hold `4n` trials in
    /// total with randomly sized series.
    pub fn n_per_series(&self) -> usize {
        self.n_per_series
    }

    pub fn schedule(&self) -> Schedule {
        self.schedule
    }

    pub fn total_trials(&self) -> usize {
        self.series.iter().map(Vec::len).sum()
    }
}

/// Shared trial generator for LHV and quantum runs.
pub(crate) fn generate_log<F>(
    n_per_series: usize,
    seed: u64,
    domain: u64,
    options: &RunOptions,
    trial: F,
) -> Result<TrialLog>
where
    F: Fn(&mut TrialRng, SettingPair) -> Result<TrialRecord> + Sync,
{
    if n_per_series == 0 {
        return Err(Error::EmptyRun);
    }
    let series = rng::with_workers(options.threads, || -> Result<[Vec<TrialRecord>; 4]> {
        match options.schedule {
            Schedule::Independent => {
                let mut out: [Vec<TrialRecord>; 4] = Default::default();
                for pair in SettingPair::ALL {
                    let stream = rng::series_stream(domain, pair.ordinal());
                    out[pair.ordinal()] = (0..n_per_series as u64)
                        .into_par_iter()
                        .map(|index| trial(&mut rng::trial_rng(seed, stream, index), pair))
                        .collect::<Result<Vec<_>>>()?;
                }
                Ok(out)
            }
            Schedule::Interleaved => {
                let stream = rng::series_stream(domain, rng::INTERLEAVED_PAIR);
                let trials = (0..4 * n_per_series as u64)
                    .into_par_iter()
                    .map(|index| {
                        let mut stream_rng = rng::trial_rng(seed, stream, index);
                        let pair = SettingPair::ALL[stream_rng.random_range(0..4)];
                        trial(&mut stream_rng, pair)
                    })
                    .collect::<Result<Vec<_>>>()?;
                let mut out: [Vec<TrialRecord>; 4] = Default::default();
                for record in trials {
                    out[record.pair.ordinal()].push(record);
                }
                Ok(out)
            }
        }
    })?;
    Ok(TrialLog {
        series,
        seed,
        n_per_series,
        schedule: options.schedule,
    })
}

/// Runs four independent series of `n_per_series` trials of `model`.
pub fn run_experiment(model: &dyn LhvModel, n_per_series: usize, seed: u64) -> Result<TrialLog> {
    run_experiment_with(model, n_per_series, seed, &RunOptions::default())
}

pub fn run_experiment_with(
    model: &dyn LhvModel,
    n_per_series: usize,
    seed: u64,
    options: &RunOptions,
) -> Result<TrialLog> {
    generate_log(
        n_per_series,
        seed,
        rng::LHV_DOMAIN,
        options,
        |stream, pair| {
            let lambda = model.sample_lambda(stream, Some(pair))?;
            Ok(TrialRecord {
                pair,
                alice: model.respond_alice(pair.alice, &lambda),
                bob: model.respond_bob(pair.bob, &lambda),
                lambda: Some(lambda),
            })
        },
    )
}

/// Mean of `A·B` over a series.
pub fn estimate_correlation(series: &[TrialRecord]) -> Result<f64> {
    if series.is_empty() {
        return Err(Error::EmptySeries);
    }
    let sum: i64 = series.iter().map(|r| i64::from(r.product())).sum();
    Ok(sum as f64 / series.len() as f64)
}

pub fn empirical_table(log: &TrialLog) -> Result<CorrelationTable> {
    let mut entries = [0.0; 4];
    for pair in SettingPair::ALL {
        entries[pair.ordinal()] = estimate_correlation(log.series(pair))?;
    }
    let [e11, e12, e21, e22] = entries;
    CorrelationTable::new(e11, e12, e21, e22)
}

/// `S = E11 - E12 + E21 + E22`.
pub fn chsh_statistic<T: Scalar>(table: &CorrelationTable<T>) -> T {
    table.e11.clone() - table.e12.clone() + table.e21.clone() + table.e22.clone()
}

/// Hoeffding half-width for the mean of `n` variables valued in `[-1, 1]`:
/// `sqrt(2 ln(2/δ) / n)`.
pub fn correlation_band(n: usize, delta: f64) -> f64 {
    (2.0 * (2.0 / delta).ln() / n as f64).sqrt()
}

/// Hoeffding half-width for a relative frequency (mean of `{0, 1}` variables):
/// `sqrt(ln(2/δ) / (2n))`.
pub fn frequency_band(n: usize, delta: f64) -> f64 {
    ((2.0 / delta).ln() / (2.0 * n as f64)).sqrt()
}

/// Tolerance for the sampled-path MI check: three frequency bands at 99%.
pub fn sampled_mi_tolerance(n_per_series: usize) -> f64 {
    3.0 * frequency_band(n_per_series, HOEFFDING_DELTA)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChshReport {
    pub table: CorrelationTable,
    pub s_star: f64,
    /// `|S*| <= 2`.
    pub bound_satisfied: bool,
    /// `|S*|` exceeds 2 by more than the sum of the four correlation bands.
    pub significant_violation: bool,
    pub n_per_series: usize,
    /// 99% half-width per correlation, for the shortest series.
    pub hoeffding_epsilon: f64,
}

pub fn chsh_report(log: &TrialLog) -> Result<ChshReport> {
    let table = empirical_table(log)?;
    let s_star = chsh_statistic(&table);
    let shortest = SettingPair::ALL
        .iter()
        .map(|&p| log.series(p).len())
        .min()
        .unwrap_or(0);
    let hoeffding_epsilon = correlation_band(shortest, HOEFFDING_DELTA);
    Ok(ChshReport {
        table,
        s_star,
        bound_satisfied: s_star.abs() <= 2.0,
        significant_violation: s_star.abs() > 2.0 + 4.0 * hoeffding_epsilon,
        n_per_series: log.n_per_series(),
        hoeffding_epsilon,
    })
}

/// Relative frequency of each behavior class, per setting pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassFrequencies {
    per_pair: BTreeMap<SettingPair, BTreeMap<Behavior, f64>>,
}

impl ClassFrequencies {
    pub fn new(per_pair: BTreeMap<SettingPair, BTreeMap<Behavior, f64>>) -> Result<Self> {
        for (pair, classes) in &per_pair {
            if classes.len() > 16 {
                return Err(Error::InvalidFrequencies(format!(
                    "{pair} has {} classes",
                    classes.len()
                )));
            }
            if classes.values().any(|&f| !(f >= 0.0)) {
                return Err(Error::InvalidFrequencies(format!(
                    "{pair} has a negative frequency"
                )));
            }
            let total: f64 = classes.values().sum();
            if (total - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidFrequencies(format!(
                    "{pair} frequencies sum to {total}"
                )));
            }
        }
        Ok(ClassFrequencies { per_pair })
    }

    pub fn pair(&self, pair: SettingPair) -> Option<&BTreeMap<Behavior, f64>> {
        self.per_pair.get(&pair)
    }

    pub fn pairs(&self) -> impl Iterator<Item = (&SettingPair, &BTreeMap<Behavior, f64>)> {
        self.per_pair.iter()
    }

    /// Largest number of classes seen in any one pair.
    pub fn max_class_count(&self) -> usize {
        self.per_pair.values().map(BTreeMap::len).max().unwrap_or(0)
    }

    /// Distinct classes across all pairs.
    pub fn classes(&self) -> BTreeSet<Behavior> {
        self.per_pair
            .values()
            .flat_map(|m| m.keys().copied())
            .collect()
    }
}

pub fn class_frequencies(log: &TrialLog, model: &dyn LhvModel) -> Result<ClassFrequencies> {
    let mut per_pair = BTreeMap::new();
    for pair in SettingPair::ALL {
        let series = log.series(pair);
        if series.is_empty() {
            continue;
        }
        let mut counts: BTreeMap<Behavior, usize> = BTreeMap::new();
        for record in series {
            let lambda = record
                .lambda
                .as_ref()
                .ok_or(Error::MissingHiddenVariables)?;
            *counts.entry(behavior_of(model, lambda)).or_default() += 1;
        }
        let n = series.len() as f64;
        per_pair.insert(
            pair,
            counts.into_iter().map(|(b, c)| (b, c as f64 / n)).collect(),
        );
    }
    ClassFrequencies::new(per_pair)
}

/// A probability distribution over behavior classes.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassWeights<T = Rational> {
    weights: BTreeMap<Behavior, T>,
}

impl<T: Scalar> ClassWeights<T> {
    /// Validates non-negativity and normalization (exactly for rationals,
    /// to `1e-12` for floats). Zero weights are dropped.
    pub fn new(weights: BTreeMap<Behavior, T>) -> Result<Self> {
        if let Some((b, w)) = weights.iter().find(|(_, w)| !(**w >= T::zero())) {
            return Err(Error::InvalidWeights(format!("weight of {b} is {w:?}")));
        }
        let total = weights.values().fold(T::zero(), |acc, w| acc + w.clone());
        if !((total.clone() - T::one()).abs() <= T::sum_tolerance()) {
            return Err(Error::InvalidWeights(format!("weights sum to {total:?}")));
        }
        let weights = weights.into_iter().filter(|(_, w)| !w.is_zero()).collect();
        Ok(ClassWeights { weights })
    }

    pub fn point(behavior: Behavior) -> Self {
        ClassWeights {
            weights: BTreeMap::from([(behavior, T::one())]),
        }
    }

    pub fn uniform() -> Self {
        let w = T::one() / from_usize::<T>(16);
        ClassWeights {
            weights: Behavior::all()
                .into_iter()
                .map(|b| (b, w.clone()))
                .collect(),
        }
    }

    pub fn get(&self, behavior: &Behavior) -> T {
        self.weights.get(behavior).cloned().unwrap_or_else(T::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Behavior, &T)> {
        self.weights.iter()
    }

    /// Classes with non-zero weight.
    pub fn support_len(&self) -> usize {
        self.weights.len()
    }

    pub fn into_map(self) -> BTreeMap<Behavior, T> {
        self.weights
    }
}

/// Exact class weights seen by one setting pair.
pub fn exact_class_weights(model: &dyn LhvModel, pair: SettingPair) -> Result<ClassWeights> {
    let source = model.exact_source(pair).ok_or(ModelError::NoExactSource {
        model: model.name(),
    })?;
    let mut weights: BTreeMap<Behavior, Rational> = BTreeMap::new();
    for (lambda, p) in source {
        *weights.entry(behavior_of(model, &lambda)).or_default() += p;
    }
    ClassWeights::new(weights)
}

/// The single class distribution of a measurement-independent model. Fails
/// when the per-pair distributions differ.
pub fn mi_class_weights(model: &dyn LhvModel) -> Result<ClassWeights> {
    let reference = exact_class_weights(model, SettingPair::ALL[0])?;
    for &pair in &SettingPair::ALL[1..] {
        if exact_class_weights(model, pair)? != reference {
            return Err(ModelError::NotMeasurementIndependent {
                model: model.name(),
            }
            .into());
        }
    }
    Ok(reference)
}

/// Average of the four per-pair class distributions. Equals
/// [`mi_class_weights`] for measurement-independent models.
pub fn pooled_class_weights(model: &dyn LhvModel) -> Result<ClassWeights> {
    let mut pooled: BTreeMap<Behavior, Rational> = BTreeMap::new();
    let quarter = crate::scalar::ratio(1, 4);
    for pair in SettingPair::ALL {
        for (b, w) in exact_class_weights(model, pair)?.iter() {
            *pooled.entry(*b).or_default() += w * &quarter;
        }
    }
    ClassWeights::new(pooled)
}

/// Exact frequencies of every pair, for the exact-path MI check.
pub fn exact_class_frequencies(model: &dyn LhvModel) -> Result<ClassFrequencies> {
    let mut per_pair = BTreeMap::new();
    for pair in SettingPair::ALL {
        let weights = exact_class_weights(model, pair)?;
        per_pair.insert(
            pair,
            weights.iter().map(|(b, w)| (*b, w.as_f64())).collect(),
        );
    }
    ClassFrequencies::new(per_pair)
}

/// `E(a_i, b_k) = Σ_j w_j A_i(j) B_k(j)`.
pub fn theoretical_correlations<T: Scalar>(weights: &ClassWeights<T>) -> CorrelationTable<T> {
    let entry = |pair: SettingPair| {
        weights.iter().fold(T::zero(), |acc, (b, w)| {
            acc + w.clone() * T::from_int(i64::from(b.product(pair).value()))
        })
    };
    CorrelationTable::from_fn(entry).expect("convex combination of ±1 stays in [-1, 1]")
}

/// Correlations where each pair uses its own class distribution. Differs
/// from [`theoretical_correlations`] only for models without measurement
/// independence.
pub fn per_pair_correlations(model: &dyn LhvModel) -> Result<CorrelationTable<Rational>> {
    let mut entries: [Rational; 4] = Default::default();
    for pair in SettingPair::ALL {
        entries[pair.ordinal()] = theoretical_correlations(&exact_class_weights(model, pair)?)
            .get(pair)
            .clone();
    }
    let [e11, e12, e21, e22] = entries;
    CorrelationTable::new(e11, e12, e21, e22)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TheoreticalChsh<T> {
    pub s: T,
    /// `C(λ_j)` for every class in the support.
    pub per_class_c: BTreeMap<Behavior, i8>,
}

/// `S = Σ_j w_j C(λ_j)`.
///
/// # Panics
///
/// If `|S| > 2` (beyond `1e-9` on the float path). That would mean the class
/// algebra is broken, not that the input is unusual.
pub fn theoretical_chsh<T: Scalar>(weights: &ClassWeights<T>) -> TheoreticalChsh<T> {
    let per_class_c: BTreeMap<Behavior, i8> =
        weights.iter().map(|(b, _)| (*b, b.chsh_value())).collect();
    let s = weights.iter().fold(T::zero(), |acc, (b, w)| {
        acc + w.clone() * T::from_int(i64::from(per_class_c[b]))
    });
    assert!(
        s.abs() <= two::<T>() + T::bound_slack(),
        "CHSH bound broken by a class distribution: S = {s:?}"
    );
    TheoreticalChsh { s, per_class_c }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MiDiagnostic {
    pub holds: bool,
    pub worst_pair: SettingPair,
    pub worst_class: Behavior,
    pub max_deviation: f64,
}

/// Compares every pair's class frequencies with those of pair (1,1).
pub fn mi_diagnostic(freqs: &ClassFrequencies, tolerance: f64) -> Result<MiDiagnostic> {
    for pair in SettingPair::ALL {
        if freqs.pair(pair).is_none() {
            return Err(Error::MissingPair(pair));
        }
    }
    let reference = freqs.pair(SettingPair::ALL[0]).expect("checked above");
    let classes = freqs.classes();
    let mut worst = MiDiagnostic {
        holds: true,
        worst_pair: SettingPair::ALL[1],
        worst_class: *classes
            .first()
            .expect("normalized frequencies are non-empty"),
        max_deviation: 0.0,
    };
    for &pair in &SettingPair::ALL[1..] {
        let other = freqs.pair(pair).expect("checked above");
        for class in &classes {
            let p_ref = reference.get(class).copied().unwrap_or(0.0);
            let p = other.get(class).copied().unwrap_or(0.0);
            let deviation = (p - p_ref).abs();
            if deviation > worst.max_deviation {
                worst.max_deviation = deviation;
                worst.worst_pair = pair;
                worst.worst_class = *class;
            }
        }
    }
    worst.holds = worst.max_deviation <= tolerance;
    Ok(worst)
}
