//! Domain types and the local hidden-variable model contract.

use std::fmt;
use std::ops::Mul;
use std::str::FromStr;

use ordered_float::OrderedFloat;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, ModelError, Result};
use crate::rng::TrialRng;
use crate::scalar::{Rational, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Party {
    Alice,
    Bob,
}

/// Which of a party's two settings is in use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(u8)]
pub enum SettingIndex {
    One = 1,
    Two = 2,
}

impl SettingIndex {
    pub const BOTH: [SettingIndex; 2] = [SettingIndex::One, SettingIndex::Two];

    pub fn get(self) -> u8 {
        self as u8
    }
}

impl TryFrom<u8> for SettingIndex {
    type Error = Error;

    fn try_from(v: u8) -> Result<Self> {
        match v {
            1 => Ok(SettingIndex::One),
            2 => Ok(SettingIndex::Two),
            other => Err(Error::Unsupported(format!(
                "setting index {other} (expected 1 or 2)"
            ))),
        }
    }
}

/// A measurement setting. The index is the canonical key; the angle is an
/// optional decoration used by angle-parameterized models.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Setting {
    pub party: Party,
    pub index: SettingIndex,
    angle: Option<f64>,
}

impl Setting {
    pub fn new(party: Party, index: SettingIndex) -> Self {
        Setting {
            party,
            index,
            angle: None,
        }
    }

    pub fn with_angle(party: Party, index: SettingIndex, angle: f64) -> Result<Self> {
        if !angle.is_finite() {
            return Err(Error::NonFiniteAngle(angle));
        }
        Ok(Setting {
            party,
            index,
            angle: Some(angle),
        })
    }

    pub fn angle(&self) -> Option<f64> {
        self.angle
    }
}

/// Setting pair `(i, k)`: Alice uses `a_i`, Bob uses `b_k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SettingPair {
    pub alice: SettingIndex,
    pub bob: SettingIndex,
}

impl SettingPair {
    /// The four pairs in table order: (1,1), (1,2), (2,1), (2,2).
    pub const ALL: [SettingPair; 4] = [
        SettingPair::new(SettingIndex::One, SettingIndex::One),
        SettingPair::new(SettingIndex::One, SettingIndex::Two),
        SettingPair::new(SettingIndex::Two, SettingIndex::One),
        SettingPair::new(SettingIndex::Two, SettingIndex::Two),
    ];

    pub const fn new(alice: SettingIndex, bob: SettingIndex) -> Self {
        SettingPair { alice, bob }
    }

    pub fn from_indices(i: u8, k: u8) -> Result<Self> {
        Ok(SettingPair::new(i.try_into()?, k.try_into()?))
    }

    /// Position in [`SettingPair::ALL`].
    pub fn ordinal(self) -> usize {
        2 * (self.alice as usize - 1) + (self.bob as usize - 1)
    }

    /// Sign of this pair's term in `S = E11 - E12 + E21 + E22`.
    pub fn chsh_sign(self) -> i8 {
        if self == SettingPair::ALL[1] {
            -1
        } else {
            1
        }
    }
}

impl fmt::Display for SettingPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.alice.get(), self.bob.get())
    }
}

impl Serialize for SettingPair {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(&format_args!("{}{}", self.alice.get(), self.bob.get()))
    }
}

impl<'de> Deserialize<'de> for SettingPair {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        let digits: Vec<u8> = s.bytes().map(|c| c.wrapping_sub(b'0')).collect();
        match digits[..] {
            [i, k] => SettingPair::from_indices(i, k).map_err(serde::de::Error::custom),
            _ => Err(serde::de::Error::custom(format!("setting pair `{s}`"))),
        }
    }
}

/// A detector click, `-1` or `+1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(i8)]
pub enum Outcome {
    Minus = -1,
    Plus = 1,
}

impl Outcome {
    pub fn value(self) -> i8 {
        self as i8
    }

    /// `+1` for non-negative input, `-1` otherwise.
    pub fn sign_of(x: f64) -> Self {
        if x >= 0.0 {
            Outcome::Plus
        } else {
            Outcome::Minus
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Outcome::Plus => Outcome::Minus,
            Outcome::Minus => Outcome::Plus,
        }
    }

    fn symbol(self) -> char {
        match self {
            Outcome::Plus => '+',
            Outcome::Minus => '-',
        }
    }
}

impl Mul for Outcome {
    type Output = Outcome;

    fn mul(self, rhs: Outcome) -> Outcome {
        if self == rhs {
            Outcome::Plus
        } else {
            Outcome::Minus
        }
    }
}

impl TryFrom<i64> for Outcome {
    type Error = Error;

    fn try_from(v: i64) -> Result<Self> {
        match v {
            1 => Ok(Outcome::Plus),
            -1 => Ok(Outcome::Minus),
            other => Err(Error::Unsupported(format!(
                "outcome {other} (expected -1 or +1)"
            ))),
        }
    }
}

impl Serialize for Outcome {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_i8(self.value())
    }
}

impl<'de> Deserialize<'de> for Outcome {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        Outcome::try_from(i64::deserialize(deserializer)?).map_err(serde::de::Error::custom)
    }
}

/// Hidden-variable tag. Models choose the variant; the engine only compares
/// tags for equality and hands them back to the model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum HiddenVariable {
    Int(i64),
    Real(OrderedFloat<f64>),
    Class(Behavior),
}

impl HiddenVariable {
    /// Canonical real-valued tag; `None` for NaN.
    pub fn real(x: f64) -> Option<Self> {
        if x.is_nan() {
            None
        } else {
            // -0.0 and 0.0 must be the same tag.
            Some(HiddenVariable::Real(OrderedFloat(x + 0.0)))
        }
    }
}

/// The outcomes a hidden variable assigns to all four settings: one of the
/// sixteen effective hidden-variable classes of a CHSH experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Behavior {
    pub a1: Outcome,
    pub a2: Outcome,
    pub b1: Outcome,
    pub b2: Outcome,
}

impl Behavior {
    pub const fn new(a1: Outcome, a2: Outcome, b1: Outcome, b2: Outcome) -> Self {
        Behavior { a1, a2, b1, b2 }
    }

    /// All sixteen behaviors, in lexicographic order of `(a1, a2, b1, b2)`
    /// with `-1 < +1`.
    pub fn all() -> [Behavior; 16] {
        std::array::from_fn(|code| Behavior::from_code(code as u8))
    }

    /// Bit `3` is `a1`, bit `0` is `b2`; a set bit means `+1`.
    pub fn from_code(code: u8) -> Self {
        let bit = |shift: u8| {
            if code >> shift & 1 == 1 {
                Outcome::Plus
            } else {
                Outcome::Minus
            }
        };
        Behavior::new(bit(3), bit(2), bit(1), bit(0))
    }

    pub fn code(self) -> u8 {
        let bit = |o: Outcome, shift: u8| u8::from(o == Outcome::Plus) << shift;
        bit(self.a1, 3) | bit(self.a2, 2) | bit(self.b1, 1) | bit(self.b2, 0)
    }

    pub fn alice(self, index: SettingIndex) -> Outcome {
        match index {
            SettingIndex::One => self.a1,
            SettingIndex::Two => self.a2,
        }
    }

    pub fn bob(self, index: SettingIndex) -> Outcome {
        match index {
            SettingIndex::One => self.b1,
            SettingIndex::Two => self.b2,
        }
    }

    pub fn product(self, pair: SettingPair) -> Outcome {
        self.alice(pair.alice) * self.bob(pair.bob)
    }

    /// `C = A1B1 - A1B2 + A2B1 + A2B2`, always `-2` or `+2`.
    pub fn chsh_value(self) -> i8 {
        SettingPair::ALL
            .iter()
            .map(|&p| p.chsh_sign() * self.product(p).value())
            .sum()
    }

    pub fn negate(self) -> Self {
        Behavior::new(
            self.a1.flip(),
            self.a2.flip(),
            self.b1.flip(),
            self.b2.flip(),
        )
    }
}

impl fmt::Display for Behavior {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for o in [self.a1, self.a2, self.b1, self.b2] {
            write!(f, "{}", o.symbol())?;
        }
        Ok(())
    }
}

impl FromStr for Behavior {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parsed: Vec<Outcome> = s
            .chars()
            .map(|c| match c {
                '+' => Ok(Outcome::Plus),
                '-' => Ok(Outcome::Minus),
                other => Err(Error::Unsupported(format!("behavior symbol `{other}`"))),
            })
            .collect::<Result<_>>()?;
        match parsed[..] {
            [a1, a2, b1, b2] => Ok(Behavior::new(a1, a2, b1, b2)),
            _ => Err(Error::Unsupported(format!(
                "behavior `{s}` must have four symbols"
            ))),
        }
    }
}

impl Serialize for Behavior {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Behavior {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// One trial of one series. Quantum trials carry no hidden variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialRecord {
    pub pair: SettingPair,
    pub alice: Outcome,
    pub bob: Outcome,
    pub lambda: Option<HiddenVariable>,
}

impl TrialRecord {
    pub fn product(&self) -> i8 {
        (self.alice * self.bob).value()
    }
}

/// The four correlations `E(a_i, b_k)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationTable<T = f64> {
    pub e11: T,
    pub e12: T,
    pub e21: T,
    pub e22: T,
}

impl<T: Scalar> CorrelationTable<T> {
    pub fn new(e11: T, e12: T, e21: T, e22: T) -> Result<Self> {
        let table = CorrelationTable { e11, e12, e21, e22 };
        for (pair, e) in table.entries() {
            if !(e.abs() <= T::one()) {
                return Err(Error::InvalidTable(format!(
                    "E{pair} = {e:?} is outside [-1, 1]"
                )));
            }
        }
        Ok(table)
    }

    pub fn from_fn(mut f: impl FnMut(SettingPair) -> T) -> Result<Self> {
        let [p11, p12, p21, p22] = SettingPair::ALL;
        CorrelationTable::new(f(p11), f(p12), f(p21), f(p22))
    }

    pub fn get(&self, pair: SettingPair) -> &T {
        match pair.ordinal() {
            0 => &self.e11,
            1 => &self.e12,
            2 => &self.e21,
            _ => &self.e22,
        }
    }

    pub fn entries(&self) -> [(SettingPair, &T); 4] {
        SettingPair::ALL.map(|p| (p, self.get(p)))
    }

    pub fn to_f64(&self) -> CorrelationTable<f64> {
        CorrelationTable {
            e11: self.e11.as_f64(),
            e12: self.e12.as_f64(),
            e21: self.e21.as_f64(),
            e22: self.e22.as_f64(),
        }
    }
}

/// A deterministic local hidden-variable model.
///
/// Responses must be pure functions of the setting index and the tag. A model
/// that declares measurement independence must sample its tag without looking
/// at the setting pair.
pub trait LhvModel: Send + Sync {
    fn name(&self) -> &'static str;

    fn respond_alice(&self, setting: SettingIndex, lambda: &HiddenVariable) -> Outcome;

    fn respond_bob(&self, setting: SettingIndex, lambda: &HiddenVariable) -> Outcome;

    fn sample_lambda(
        &self,
        rng: &mut TrialRng,
        pair: Option<SettingPair>,
    ) -> std::result::Result<HiddenVariable, ModelError>;

    fn declares_mi(&self) -> bool;

    /// Exact source distribution over a finite tag domain, as seen by the
    /// given setting pair. Models without one return `None`.
    fn exact_source(&self, pair: SettingPair) -> Option<Vec<(HiddenVariable, Rational)>>;
}

/// The equivalence class of `lambda` under the model's responses.
pub fn behavior_of(model: &dyn LhvModel, lambda: &HiddenVariable) -> Behavior {
    Behavior::new(
        model.respond_alice(SettingIndex::One, lambda),
        model.respond_alice(SettingIndex::Two, lambda),
        model.respond_bob(SettingIndex::One, lambda),
        model.respond_bob(SettingIndex::Two, lambda),
    )
}
