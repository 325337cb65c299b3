//! Joint-probability existence for CHSH statistics.
//!
//! A joint probability is a distribution over the sixteen behaviors that
//! reproduces all marginals and pairwise correlations. Existence is decided
//! by an exact linear feasibility solve and cross-checked against the eight
//! CHSH facets.

use std::collections::BTreeMap;

use num_traits::Zero;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::engine::{pooled_class_weights, ClassWeights};
use crate::error::{Error, Result};
use crate::model::{Behavior, CorrelationTable, LhvModel, SettingIndex, SettingPair};
use crate::scalar::{from_usize, two, Rational, Scalar};
use crate::simplex;

/// Single-party expectations `⟨A_i⟩`, `⟨B_k⟩`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Marginals<T = f64> {
    pub a1: T,
    pub a2: T,
    pub b1: T,
    pub b2: T,
}

impl<T: Scalar> Marginals<T> {
    pub fn zero() -> Self {
        Marginals {
            a1: T::zero(),
            a2: T::zero(),
            b1: T::zero(),
            b2: T::zero(),
        }
    }

    pub fn alice(&self, index: SettingIndex) -> &T {
        match index {
            SettingIndex::One => &self.a1,
            SettingIndex::Two => &self.a2,
        }
    }

    pub fn bob(&self, index: SettingIndex) -> &T {
        match index {
            SettingIndex::One => &self.b1,
            SettingIndex::Two => &self.b2,
        }
    }

    fn entries(&self) -> [&T; 4] {
        [&self.a1, &self.a2, &self.b1, &self.b2]
    }
}

/// Observable statistics of a CHSH experiment: four correlations and four
/// marginals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BehaviorStatistics<T = f64> {
    pub correlations: CorrelationTable<T>,
    pub marginals: Marginals<T>,
}

impl<T: Scalar> BehaviorStatistics<T> {
    /// Checks ranges and that each pair's four outcome probabilities
    /// `(1 + s·m_a + t·m_b + s·t·E) / 4` are non-negative.
    pub fn new(correlations: CorrelationTable<T>, marginals: Marginals<T>) -> Result<Self> {
        let correlations = CorrelationTable::new(
            correlations.e11,
            correlations.e12,
            correlations.e21,
            correlations.e22,
        )
        .map_err(|e| Error::InvalidStatistics(e.to_string()))?;
        for m in marginals.entries() {
            if !(m.abs() <= T::one()) {
                return Err(Error::InvalidStatistics(format!(
                    "marginal {m:?} outside [-1, 1]"
                )));
            }
        }
        let slack = T::bound_slack();
        for pair in SettingPair::ALL {
            let (ma, mb, e) = (
                marginals.alice(pair.alice),
                marginals.bob(pair.bob),
                correlations.get(pair),
            );
            for (s, t) in [(1, 1), (1, -1), (-1, 1), (-1, -1)] {
                let cell = T::one()
                    + T::from_int(s) * ma.clone()
                    + T::from_int(t) * mb.clone()
                    + T::from_int(s * t) * e.clone();
                if cell < -slack.clone() {
                    return Err(Error::InvalidStatistics(format!(
                        "P(A={s:+}, B={t:+}) < 0 for pair {pair}"
                    )));
                }
            }
        }
        Ok(BehaviorStatistics {
            correlations,
            marginals,
        })
    }

    pub fn zero_marginals(correlations: CorrelationTable<T>) -> Result<Self> {
        BehaviorStatistics::new(correlations, Marginals::zero())
    }

    pub fn has_zero_marginals(&self) -> bool {
        self.marginals.entries().iter().all(|m| m.is_zero())
    }

    pub fn to_f64(&self) -> BehaviorStatistics<f64> {
        BehaviorStatistics {
            correlations: self.correlations.to_f64(),
            marginals: Marginals {
                a1: self.marginals.a1.as_f64(),
                a2: self.marginals.a2.as_f64(),
                b1: self.marginals.b1.as_f64(),
                b2: self.marginals.b2.as_f64(),
            },
        }
    }
}

/// A distribution over the sixteen behaviors.
#[derive(Debug, Clone, PartialEq)]
pub struct JointProbability<T = f64> {
    weights: ClassWeights<T>,
}

impl<T: Scalar> JointProbability<T> {
    pub fn new(weights: BTreeMap<Behavior, T>) -> Result<Self> {
        Ok(JointProbability {
            weights: ClassWeights::new(weights)?,
        })
    }

    pub fn weights(&self) -> &ClassWeights<T> {
        &self.weights
    }

    pub fn get(&self, behavior: &Behavior) -> T {
        self.weights.get(behavior)
    }
}

/// The joint probability of a hidden-variable model is its distribution over
/// behavior classes.
pub fn jp_from_lhv<T: Scalar>(class_weights: &ClassWeights<T>) -> JointProbability<T> {
    JointProbability {
        weights: class_weights.clone(),
    }
}

/// [`jp_from_lhv`] on a model's exact (pair-averaged) class weights.
pub fn jp_of_model(model: &dyn LhvModel) -> Result<JointProbability<Rational>> {
    Ok(jp_from_lhv(&pooled_class_weights(model)?))
}

pub fn statistics_of<T: Scalar>(jp: &JointProbability<T>) -> BehaviorStatistics<T> {
    let expect = |f: &dyn Fn(&Behavior) -> i8| {
        jp.weights.iter().fold(T::zero(), |acc, (b, w)| {
            acc + w.clone() * T::from_int(i64::from(f(b)))
        })
    };
    let correlations = CorrelationTable::from_fn(|pair| expect(&|b| b.product(pair).value()))
        .expect("convex combination of ±1 stays in [-1, 1]");
    let marginals = Marginals {
        a1: expect(&|b| b.a1.value()),
        a2: expect(&|b| b.a2.value()),
        b1: expect(&|b| b.b1.value()),
        b2: expect(&|b| b.b2.value()),
    };
    BehaviorStatistics {
        correlations,
        marginals,
    }
}

/// One CHSH facet: `sign · (E11 + E12 + E21 + E22 - 2·E_negated) <= 2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Facet<T = f64> {
    pub negated: SettingPair,
    pub sign: i8,
    pub value: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriterionResult<T = f64> {
    pub all_pass: bool,
    pub max_facet_value: T,
    pub worst: Facet<T>,
}

/// All eight facet values, in `(negated pair, sign)` order with `+` first.
pub fn facet_values<T: Scalar>(table: &CorrelationTable<T>) -> Vec<Facet<T>> {
    let total = table
        .entries()
        .iter()
        .fold(T::zero(), |acc, (_, e)| acc + (*e).clone());
    let mut facets = Vec::with_capacity(8);
    for pair in SettingPair::ALL {
        let v = total.clone() - two::<T>() * table.get(pair).clone();
        facets.push(Facet {
            negated: pair,
            sign: 1,
            value: v.clone(),
        });
        facets.push(Facet {
            negated: pair,
            sign: -1,
            value: -v,
        });
    }
    facets
}

/// Evaluates the eight CHSH facets; passes iff every one is at most 2.
pub fn chsh_criterion<T: Scalar>(table: &CorrelationTable<T>) -> CriterionResult<T> {
    let worst = facet_values(table)
        .into_iter()
        .reduce(|best, f| if f.value > best.value { f } else { best })
        .expect("eight facets");
    CriterionResult {
        all_pass: worst.value <= two::<T>() + T::bound_slack(),
        max_facet_value: worst.value.clone(),
        worst,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Feasibility<T = f64> {
    pub feasible: bool,
    pub witness: Option<JointProbability<T>>,
    /// Most violated CHSH facet, when the statistics are infeasible and one
    /// is violated.
    pub certificate: Option<Facet<T>>,
    /// Minimal L1 distance between the statistics and any joint probability.
    pub residual: f64,
}

/// Decides whether a joint probability reproduces `stats`.
///
/// Solved exactly over rationals; `f64` input is converted exactly and
/// accepted when the minimal residual is within `1e-9`.
pub fn jp_feasible<T: Scalar>(stats: &BehaviorStatistics<T>) -> Feasibility<T> {
    let exact = |v: &T| v.to_rational().expect("validated statistics are finite");
    let behaviors = Behavior::all();
    let mut rows: Vec<Vec<Rational>> = Vec::with_capacity(9);
    let mut rhs: Vec<Rational> = Vec::with_capacity(9);
    let row = |f: &dyn Fn(&Behavior) -> i8| -> Vec<Rational> {
        behaviors
            .iter()
            .map(|b| Rational::from_int(i64::from(f(b))))
            .collect()
    };
    rows.push(row(&|_| 1));
    rhs.push(Rational::from_int(1));
    for index in SettingIndex::BOTH {
        rows.push(row(&|b| b.alice(index).value()));
        rhs.push(exact(stats.marginals.alice(index)));
    }
    for index in SettingIndex::BOTH {
        rows.push(row(&|b| b.bob(index).value()));
        rhs.push(exact(stats.marginals.bob(index)));
    }
    for pair in SettingPair::ALL {
        rows.push(row(&|b| b.product(pair).value()));
        rhs.push(exact(stats.correlations.get(pair)));
    }

    let solved = simplex::phase_one(&rows, &rhs);
    let tolerance = T::bound_slack().to_rational().expect("finite tolerance");
    let feasible = solved.residual <= tolerance;
    let witness = feasible.then(|| {
        let total = solved
            .solution
            .iter()
            .fold(Rational::zero(), |acc, w| acc + w);
        let weights = behaviors
            .iter()
            .zip(&solved.solution)
            .filter(|(_, w)| !w.is_zero())
            .map(|(b, w)| (*b, T::from_rational(&(w / &total))))
            .collect();
        JointProbability::new(weights).expect("normalized non-negative solution")
    });
    let certificate = if feasible {
        None
    } else {
        let criterion = chsh_criterion(&stats.correlations);
        (!criterion.all_pass).then_some(criterion.worst)
    };
    Feasibility {
        feasible,
        witness,
        certificate,
        residual: solved.residual.as_f64(),
    }
}

/// Random exact statistics for property checks.
///
/// Draws a behavior distribution with small integer weights (symmetrized
/// under global sign flip when `zero_marginals`), then pushes the statistics
/// outward along a random direction so both feasible and infeasible cases
/// occur. Perturbed points that leave the valid statistics region are pulled
/// back toward the start a few times, then replaced by the start itself.
pub fn random_statistics<R: Rng + ?Sized>(
    rng: &mut R,
    zero_marginals: bool,
) -> BehaviorStatistics<Rational> {
    let mut raw = [0i64; 16];
    while raw.iter().all(|&k| k == 0) {
        for k in raw.iter_mut() {
            *k = rng.random_range(0..=8);
        }
    }
    let behaviors = Behavior::all();
    let mut weights: BTreeMap<Behavior, Rational> = BTreeMap::new();
    let total: i64 = raw.iter().sum();
    for (b, &k) in behaviors.iter().zip(&raw) {
        let w = Rational::from_int(k) / Rational::from_int(total);
        if zero_marginals {
            let half = &w / from_usize::<Rational>(2);
            *weights.entry(*b).or_default() += half.clone();
            *weights.entry(b.negate()).or_default() += half;
        } else {
            *weights.entry(*b).or_default() += w;
        }
    }
    let base = statistics_of(&JointProbability::new(weights).expect("normalized"));

    let step = |rng: &mut R| Rational::from_int(rng.random_range(-4..=4)) / Rational::from_int(8);
    let direction_e: Vec<Rational> = (0..4).map(|_| step(rng)).collect();
    let direction_m: Vec<Rational> = (0..4)
        .map(|_| {
            if zero_marginals {
                Rational::zero()
            } else {
                step(rng)
            }
        })
        .collect();
    let mut scale = Rational::from_int(rng.random_range(0..=4)) / Rational::from_int(2);
    let clamp = |v: Rational| v.clamp(Rational::from_int(-1), Rational::from_int(1));
    for _ in 0..8 {
        let e: Vec<Rational> = SettingPair::ALL
            .iter()
            .zip(&direction_e)
            .map(|(p, d)| clamp(base.correlations.get(*p) + &scale * d))
            .collect();
        let m: Vec<Rational> = base
            .marginals
            .entries()
            .iter()
            .zip(&direction_m)
            .map(|(v, d)| clamp(*v + &scale * d))
            .collect();
        let table = CorrelationTable::new(e[0].clone(), e[1].clone(), e[2].clone(), e[3].clone())
            .expect("clamped entries");
        let marginals = Marginals {
            a1: m[0].clone(),
            a2: m[1].clone(),
            b1: m[2].clone(),
            b2: m[3].clone(),
        };
        if let Ok(stats) = BehaviorStatistics::new(table, marginals) {
            return stats;
        }
        scale /= from_usize::<Rational>(2);
    }
    base
}
