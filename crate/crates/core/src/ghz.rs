//! Four-station GHZ correlations and exhaustive LHV satisfiability.
//!
//! A deterministic local model assigns one `±1` value to every
//! `(station, angle)` variable. The perfect-correlation constraints are
//! parity constraints over those variables, so satisfiability is decided by
//! enumerating every assignment.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Outcome;

/// Largest variable count [`check_satisfiable`] will enumerate.
pub const MAX_VARIABLES: usize = 24;

/// Angles closer than this (after reduction modulo 2π) name the same variable.
pub const ANGLE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Station {
    A,
    B,
    C,
    D,
}

impl fmt::Display for Station {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

/// `Π factors = target`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductConstraint {
    factors: Vec<(Station, f64)>,
    target: Outcome,
}

impl ProductConstraint {
    pub fn new(factors: Vec<(Station, f64)>, target: Outcome) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::Unsupported(
                "product constraint without factors".into(),
            ));
        }
        if let Some(&(_, angle)) = factors.iter().find(|(_, a)| !a.is_finite()) {
            return Err(Error::NonFiniteAngle(angle));
        }
        Ok(ProductConstraint { factors, target })
    }

    pub fn factors(&self) -> &[(Station, f64)] {
        &self.factors
    }

    pub fn target(&self) -> Outcome {
        self.target
    }
}

/// A `(station, angle)` variable with its angle reduced to `[0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Variable {
    pub station: Station,
    pub angle: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SatResult {
    pub satisfiable: bool,
    /// Lowest-index satisfying assignment.
    pub witness: Option<Vec<(Variable, Outcome)>>,
    /// Always `2^variables`: the whole space is enumerated.
    pub assignments_checked: u64,
    pub satisfying_assignments: u64,
    pub variables: Vec<Variable>,
}

/// `-cos(a + b - c - d)`.
pub fn ghz_correlation(a: f64, b: f64, c: f64, d: f64) -> f64 {
    -(a + b - c - d).cos()
}

fn reduce_angle(angle: f64) -> f64 {
    let r = angle.rem_euclid(TAU);
    if TAU - r <= ANGLE_TOLERANCE {
        0.0
    } else {
        r
    }
}

fn same_angle(x: f64, y: f64) -> bool {
    let d = (x - y).abs();
    d <= ANGLE_TOLERANCE || TAU - d <= ANGLE_TOLERANCE
}

/// Distance of `x` from the nearest multiple of `period`.
fn off_multiple(x: f64, period: f64) -> f64 {
    let r = x.rem_euclid(period);
    r.min(period - r)
}

/// The four perfect-correlation constraints with `a + b - c - d = 0`:
///
/// ```text
/// A(0)  B(0) C(0) D(0) = -1
/// A(φ)  B(0) C(φ) D(0) = -1
/// A(φ)  B(0) C(0) D(φ) = -1
/// A(2φ) B(0) C(φ) D(φ) = -1
/// ```
///
/// With `include_fifth`, appends `A(π) B(0) C(0) D(0) = +1` (`a + b - c - d = π`),
/// which needs `φ = π/2`.
pub fn ghz_constraint_system(phi: f64, include_fifth: bool) -> Result<Vec<ProductConstraint>> {
    if !phi.is_finite() {
        return Err(Error::NonFiniteAngle(phi));
    }
    if off_multiple(phi, PI) <= ANGLE_TOLERANCE {
        return Err(Error::DegeneratePhi(phi));
    }
    use Station::*;
    let minus = Outcome::Minus;
    let mut system = vec![
        ProductConstraint::new(vec![(A, 0.0), (B, 0.0), (C, 0.0), (D, 0.0)], minus)?,
        ProductConstraint::new(vec![(A, phi), (B, 0.0), (C, phi), (D, 0.0)], minus)?,
        ProductConstraint::new(vec![(A, phi), (B, 0.0), (C, 0.0), (D, phi)], minus)?,
        ProductConstraint::new(vec![(A, 2.0 * phi), (B, 0.0), (C, phi), (D, phi)], minus)?,
    ];
    if include_fifth {
        if off_multiple(phi - FRAC_PI_2, TAU) > ANGLE_TOLERANCE {
            return Err(Error::Unsupported(format!(
                "the fifth constraint is only defined for phi = pi/2, got {phi}"
            )));
        }
        system.push(ProductConstraint::new(
            vec![(A, 2.0 * phi), (B, 0.0), (C, 0.0), (D, 0.0)],
            Outcome::Plus,
        )?);
    }
    Ok(system)
}

/// Parity form of one constraint: bit `v` of `mask` is set when variable `v`
/// appears an odd number of times. A set bit in an assignment means `-1`.
struct Parity {
    mask: u32,
    odd_target: bool,
}

fn collect_variables(constraints: &[ProductConstraint]) -> (Vec<Variable>, Vec<Vec<usize>>) {
    let mut variables: Vec<Variable> = Vec::new();
    let mut indices = Vec::with_capacity(constraints.len());
    for constraint in constraints {
        let mut row = Vec::with_capacity(constraint.factors.len());
        for &(station, angle) in &constraint.factors {
            let angle = reduce_angle(angle);
            let id = match variables
                .iter()
                .position(|v| v.station == station && same_angle(v.angle, angle))
            {
                Some(id) => id,
                None => {
                    variables.push(Variable { station, angle });
                    variables.len() - 1
                }
            };
            row.push(id);
        }
        indices.push(row);
    }
    (variables, indices)
}

/// Enumerates all `±1` assignments of the distinct variables.
pub fn check_satisfiable(constraints: &[ProductConstraint]) -> Result<SatResult> {
    let (variables, indices) = collect_variables(constraints);
    if variables.len() > MAX_VARIABLES {
        return Err(Error::TooManyVariables {
            found: variables.len(),
            limit: MAX_VARIABLES,
        });
    }
    let parities: Vec<Parity> = constraints
        .iter()
        .zip(&indices)
        .map(|(c, row)| Parity {
            mask: row.iter().fold(0u32, |m, &v| m ^ (1 << v)),
            odd_target: c.target == Outcome::Minus,
        })
        .collect();
    let space: u64 = 1 << variables.len();
    let satisfies = |bits: u32| {
        parities
            .iter()
            .all(|p| ((bits & p.mask).count_ones() % 2 == 1) == p.odd_target)
    };
    let (satisfying, first) = (0..space)
        .into_par_iter()
        .filter(|&bits| satisfies(bits as u32))
        .fold(|| (0u64, u64::MAX), |(n, lo), bits| (n + 1, lo.min(bits)))
        .reduce(
            || (0, u64::MAX),
            |(n1, lo1), (n2, lo2)| (n1 + n2, lo1.min(lo2)),
        );
    let witness = (satisfying > 0).then(|| {
        variables
            .iter()
            .enumerate()
            .map(|(v, var)| {
                let value = if first >> v & 1 == 1 {
                    Outcome::Minus
                } else {
                    Outcome::Plus
                };
                (*var, value)
            })
            .collect()
    });
    Ok(SatResult {
        satisfiable: satisfying > 0,
        witness,
        assignments_checked: space,
        satisfying_assignments: satisfying,
        variables,
    })
}

/// Product of a constraint's factors under an assignment, looked up by
/// station and angle.
pub fn evaluate(
    constraint: &ProductConstraint,
    assignment: &[(Variable, Outcome)],
) -> Option<Outcome> {
    constraint
        .factors
        .iter()
        .try_fold(Outcome::Plus, |acc, &(station, angle)| {
            let angle = reduce_angle(angle);
            assignment
                .iter()
                .find(|(v, _)| v.station == station && same_angle(v.angle, angle))
                .map(|(_, o)| acc * *o)
        })
}
