//! Canonical hidden-variable models.

use std::f64::consts::TAU;

use rand::Rng;

use crate::error::{Error, ModelError, Result};
use crate::model::{Behavior, HiddenVariable, LhvModel, Outcome, SettingIndex, SettingPair};
use crate::quantum::AnglePair;
use crate::rng::TrialRng;
use crate::scalar::{ratio, Rational};

/// Names accepted by [`by_name`], in listing order.
pub const MODEL_NAMES: [&str; 5] = [
    "dice-coin",
    "cosine-sign",
    "conspiracy",
    "constant",
    "uniform-classes",
];

pub fn by_name(name: &str, angles: Option<AnglePair>) -> Result<Box<dyn LhvModel>> {
    Ok(match name {
        "dice-coin" => Box::new(DiceCoinModel),
        "cosine-sign" => Box::new(CosineSignModel::new(angles.unwrap_or_default())),
        "conspiracy" => Box::new(ConspiracyModel),
        "constant" => Box::new(ConstantModel),
        "uniform-classes" => Box::new(UniformClassesModel),
        other => return Err(Error::UnknownModel(other.to_string())),
    })
}

pub fn describe(name: &str) -> Option<&'static str> {
    Some(match name {
        "dice-coin" => "fair die at the source; A(a,λ) = a^λ, B(b,λ) = b^(λ+1), settings ±1",
        "cosine-sign" => "λ on a 720-point circle; A = sign cos(a-λ), B = -sign cos(b-λ)",
        "conspiracy" => "source reads the setting pair; violates measurement independence, S = 4",
        "constant" => "every click is +1",
        "uniform-classes" => "λ uniform over the sixteen behavior classes",
        _ => return None,
    })
}

fn foreign_tag(model: &str, lambda: &HiddenVariable) -> ! {
    panic!("hidden variable {lambda:?} is outside the domain of `{model}`")
}

fn uniform_source(
    tags: impl Iterator<Item = HiddenVariable>,
    size: i64,
) -> Vec<(HiddenVariable, Rational)> {
    tags.map(|t| (t, ratio(1, size))).collect()
}

/// A die is thrown at the source; each side evaluates a power of its coin.
///
/// Setting index 1 is the coin value `+1`, index 2 is `-1`:
/// `A(a, λ) = a^λ`, `B(b, λ) = b^(λ+1)` with `λ ∈ {1, …, 6}`.
#[derive(Debug, Clone, Copy, Default)]
pub struct DiceCoinModel;

impl DiceCoinModel {
    fn coin(setting: SettingIndex) -> i64 {
        match setting {
            SettingIndex::One => 1,
            SettingIndex::Two => -1,
        }
    }

    fn power(base: i64, exponent: i64) -> Outcome {
        if base == -1 && exponent % 2 != 0 {
            Outcome::Minus
        } else {
            Outcome::Plus
        }
    }

    fn face(lambda: &HiddenVariable) -> i64 {
        match lambda {
            HiddenVariable::Int(face @ 1..=6) => *face,
            other => foreign_tag("dice-coin", other),
        }
    }
}

impl LhvModel for DiceCoinModel {
    fn name(&self) -> &'static str {
        "dice-coin"
    }

    fn respond_alice(&self, setting: SettingIndex, lambda: &HiddenVariable) -> Outcome {
        Self::power(Self::coin(setting), Self::face(lambda))
    }

    fn respond_bob(&self, setting: SettingIndex, lambda: &HiddenVariable) -> Outcome {
        Self::power(Self::coin(setting), Self::face(lambda) + 1)
    }

    fn sample_lambda(
        &self,
        rng: &mut TrialRng,
        _pair: Option<SettingPair>,
    ) -> Result<HiddenVariable, ModelError> {
        Ok(HiddenVariable::Int(rng.random_range(1..=6)))
    }

    fn declares_mi(&self) -> bool {
        true
    }

    fn exact_source(&self, _pair: SettingPair) -> Option<Vec<(HiddenVariable, Rational)>> {
        Some(uniform_source((1..=6).map(HiddenVariable::Int), 6))
    }
}

/// Number of grid points on the λ circle of [`CosineSignModel`].
pub const COSINE_GRID: i64 = 720;

/// Sign of a cosine with `sign(0) = +1`; values within `1e-12` of zero count
/// as zero so grid points on a boundary resolve the same way every time.
fn cosine_sign(x: f64) -> Outcome {
    let c = x.cos();
    if c.abs() < 1e-12 {
        Outcome::Plus
    } else {
        Outcome::sign_of(c)
    }
}

/// Hidden direction `λ` on a discretized circle:
/// `A = sign cos(a - λ)`, `B = -sign cos(b - λ)`.
#[derive(Debug, Clone, Copy)]
pub struct CosineSignModel {
    angles: AnglePair,
}

impl CosineSignModel {
    pub fn new(angles: AnglePair) -> Self {
        CosineSignModel { angles }
    }

    pub fn angles(&self) -> &AnglePair {
        &self.angles
    }

    fn direction(lambda: &HiddenVariable) -> f64 {
        match lambda {
            HiddenVariable::Int(j @ 0..COSINE_GRID) => TAU * (*j as f64) / COSINE_GRID as f64,
            other => foreign_tag("cosine-sign", other),
        }
    }
}

impl Default for CosineSignModel {
    fn default() -> Self {
        CosineSignModel::new(AnglePair::tsirelson())
    }
}

impl LhvModel for CosineSignModel {
    fn name(&self) -> &'static str {
        "cosine-sign"
    }

    fn respond_alice(&self, setting: SettingIndex, lambda: &HiddenVariable) -> Outcome {
        cosine_sign(self.angles.alice(setting) - Self::direction(lambda))
    }

    fn respond_bob(&self, setting: SettingIndex, lambda: &HiddenVariable) -> Outcome {
        cosine_sign(self.angles.bob(setting) - Self::direction(lambda)).flip()
    }

    fn sample_lambda(
        &self,
        rng: &mut TrialRng,
        _pair: Option<SettingPair>,
    ) -> Result<HiddenVariable, ModelError> {
        Ok(HiddenVariable::Int(rng.random_range(0..COSINE_GRID)))
    }

    fn declares_mi(&self) -> bool {
        true
    }

    fn exact_source(&self, _pair: SettingPair) -> Option<Vec<(HiddenVariable, Rational)>> {
        Some(uniform_source(
            (0..COSINE_GRID).map(HiddenVariable::Int),
            COSINE_GRID,
        ))
    }
}

/// The source picks, for each setting pair, a class whose product has the
/// sign of that pair's CHSH term, so every series is perfectly (anti)correlated
/// and `S = 4`. Responses read the class straight from the tag.
#[derive(Debug, Clone, Copy, Default)]
pub struct ConspiracyModel;

impl ConspiracyModel {
    /// Distinct class per pair with `A_i B_k` equal to the pair's CHSH sign.
    pub fn class_for(pair: SettingPair) -> Behavior {
        let code = match pair.ordinal() {
            0 => "++++",
            1 => "+++-",
            2 => "----",
            _ => "+-+-",
        };
        code.parse().expect("valid behavior literal")
    }

    fn class(lambda: &HiddenVariable) -> Behavior {
        match lambda {
            HiddenVariable::Class(b) => *b,
            other => foreign_tag("conspiracy", other),
        }
    }
}

impl LhvModel for ConspiracyModel {
    fn name(&self) -> &'static str {
        "conspiracy"
    }

    fn respond_alice(&self, setting: SettingIndex, lambda: &HiddenVariable) -> Outcome {
        Self::class(lambda).alice(setting)
    }

    fn respond_bob(&self, setting: SettingIndex, lambda: &HiddenVariable) -> Outcome {
        Self::class(lambda).bob(setting)
    }

    fn sample_lambda(
        &self,
        _rng: &mut TrialRng,
        pair: Option<SettingPair>,
    ) -> Result<HiddenVariable, ModelError> {
        let pair = pair.ok_or(ModelError::SettingsRequired {
            model: "conspiracy",
        })?;
        Ok(HiddenVariable::Class(Self::class_for(pair)))
    }

    fn declares_mi(&self) -> bool {
        false
    }

    fn exact_source(&self, pair: SettingPair) -> Option<Vec<(HiddenVariable, Rational)>> {
        Some(vec![(
            HiddenVariable::Class(Self::class_for(pair)),
            ratio(1, 1),
        )])
    }
}

/// `A ≡ +1`, `B ≡ +1`.
#[derive(Debug, Clone, Copy, Default)]
pub struct ConstantModel;

impl LhvModel for ConstantModel {
    fn name(&self) -> &'static str {
        "constant"
    }

    fn respond_alice(&self, _: SettingIndex, _: &HiddenVariable) -> Outcome {
        Outcome::Plus
    }

    fn respond_bob(&self, _: SettingIndex, _: &HiddenVariable) -> Outcome {
        Outcome::Plus
    }

    fn sample_lambda(
        &self,
        _rng: &mut TrialRng,
        _pair: Option<SettingPair>,
    ) -> Result<HiddenVariable, ModelError> {
        Ok(HiddenVariable::Int(0))
    }

    fn declares_mi(&self) -> bool {
        true
    }

    fn exact_source(&self, _pair: SettingPair) -> Option<Vec<(HiddenVariable, Rational)>> {
        Some(vec![(HiddenVariable::Int(0), ratio(1, 1))])
    }
}

/// `λ` uniform over the sixteen class codes; responses decode the class.
#[derive(Debug, Clone, Copy, Default)]
pub struct UniformClassesModel;

impl UniformClassesModel {
    fn class(lambda: &HiddenVariable) -> Behavior {
        match lambda {
            HiddenVariable::Int(code @ 0..=15) => Behavior::from_code(*code as u8),
            other => foreign_tag("uniform-classes", other),
        }
    }
}

impl LhvModel for UniformClassesModel {
    fn name(&self) -> &'static str {
        "uniform-classes"
    }

    fn respond_alice(&self, setting: SettingIndex, lambda: &HiddenVariable) -> Outcome {
        Self::class(lambda).alice(setting)
    }

    fn respond_bob(&self, setting: SettingIndex, lambda: &HiddenVariable) -> Outcome {
        Self::class(lambda).bob(setting)
    }

    fn sample_lambda(
        &self,
        rng: &mut TrialRng,
        _pair: Option<SettingPair>,
    ) -> Result<HiddenVariable, ModelError> {
        Ok(HiddenVariable::Int(rng.random_range(0..16)))
    }

    fn declares_mi(&self) -> bool {
        true
    }

    fn exact_source(&self, _pair: SettingPair) -> Option<Vec<(HiddenVariable, Rational)>> {
        Some(uniform_source((0..16).map(HiddenVariable::Int), 16))
    }
}
