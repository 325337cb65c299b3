//! Singlet-state statistics: the quantum side of the CHSH comparison.
//!
//! Sign convention: `E(a, b) = -cos(a - b)`, perfect anticorrelation at equal
//! settings. Trials are sampled directly from the outcome distribution and
//! carry no hidden variable.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::engine::{chsh_statistic, generate_log, RunOptions, TrialLog};
use crate::error::{Error, Result};
use crate::model::{
    CorrelationTable, Outcome, Party, Setting, SettingIndex, SettingPair, TrialRecord,
};
use crate::rng::{self, TrialRng};

/// Measurement angles (radians) for the four settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnglePair {
    pub a1: f64,
    pub a2: f64,
    pub b1: f64,
    pub b2: f64,
}

impl AnglePair {
    pub fn new(a1: f64, a2: f64, b1: f64, b2: f64) -> Result<Self> {
        for angle in [a1, a2, b1, b2] {
            if !angle.is_finite() {
                return Err(Error::NonFiniteAngle(angle));
            }
        }
        Ok(AnglePair { a1, a2, b1, b2 })
    }

    /// `(0, π/2, π/4, 3π/4)`, where the singlet reaches `|S| = 2√2`.
    pub fn tsirelson() -> Self {
        AnglePair {
            a1: 0.0,
            a2: FRAC_PI_2,
            b1: FRAC_PI_4,
            b2: 3.0 * FRAC_PI_4,
        }
    }

    pub fn alice(&self, index: SettingIndex) -> f64 {
        match index {
            SettingIndex::One => self.a1,
            SettingIndex::Two => self.a2,
        }
    }

    pub fn bob(&self, index: SettingIndex) -> f64 {
        match index {
            SettingIndex::One => self.b1,
            SettingIndex::Two => self.b2,
        }
    }

    pub fn setting(&self, party: Party, index: SettingIndex) -> Setting {
        let angle = match party {
            Party::Alice => self.alice(index),
            Party::Bob => self.bob(index),
        };
        Setting::with_angle(party, index, angle).expect("angles validated on construction")
    }

    pub fn angles(&self, pair: SettingPair) -> (f64, f64) {
        (self.alice(pair.alice), self.bob(pair.bob))
    }
}

impl Default for AnglePair {
    fn default() -> Self {
        AnglePair::tsirelson()
    }
}

pub fn singlet_correlation(a: f64, b: f64) -> f64 {
    -(a - b).cos()
}

/// Draws `(A, B)` with `P(A, B) = (1 - A·B·cos(a - b)) / 4`.
///
/// `A` is a fair coin; `B = -A` with probability `(1 + cos(a - b)) / 2`.
pub fn sample_quantum_trial(a: f64, b: f64, rng: &mut TrialRng) -> (Outcome, Outcome) {
    let alice = if rng.random::<bool>() {
        Outcome::Plus
    } else {
        Outcome::Minus
    };
    let p_opposite = (1.0 + (a - b).cos()) / 2.0;
    let bob = if rng.random::<f64>() < p_opposite {
        alice.flip()
    } else {
        alice
    };
    (alice, bob)
}

pub fn quantum_table(angles: &AnglePair) -> CorrelationTable {
    CorrelationTable::from_fn(|pair| {
        let (a, b) = angles.angles(pair);
        singlet_correlation(a, b)
    })
    .expect("cosines lie in [-1, 1]")
}

pub fn quantum_chsh(angles: &AnglePair) -> f64 {
    chsh_statistic(&quantum_table(angles))
}

/// `2√2`.
pub fn tsirelson_bound() -> f64 {
    2.0 * std::f64::consts::SQRT_2
}

/// Four series of singlet trials at `angles`.
pub fn run_quantum_experiment(
    angles: &AnglePair,
    n_per_series: usize,
    seed: u64,
    options: &RunOptions,
) -> Result<TrialLog> {
    generate_log(
        n_per_series,
        seed,
        rng::QUANTUM_DOMAIN,
        options,
        |stream, pair| {
            let (a, b) = angles.angles(pair);
            let (alice, bob) = sample_quantum_trial(a, b, stream);
            Ok(TrialRecord {
                pair,
                alice,
                bob,
                lambda: None,
            })
        },
    )
}
