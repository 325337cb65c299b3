//! Phase-1 simplex over exact rationals.
//!
//! Finds `x >= 0` minimizing the L1 residual of `A x = b` by adding one
//! artificial variable per row. Bland's rule keeps it from cycling.

use num_traits::{One, Signed, Zero};

use crate::scalar::Rational;

pub(crate) struct PhaseOne {
    /// Minimal `Σ |b - A x|` over `x >= 0`.
    pub residual: Rational,
    pub solution: Vec<Rational>,
}

pub(crate) fn phase_one(a: &[Vec<Rational>], b: &[Rational]) -> PhaseOne {
    let m = a.len();
    let n = a.first().map_or(0, Vec::len);
    let width = n + m + 1;
    let rhs = width - 1;

    // Rows with b >= 0, artificial columns n..n+m forming the initial basis.
    let mut tableau: Vec<Vec<Rational>> = Vec::with_capacity(m);
    for (i, (row, bi)) in a.iter().zip(b).enumerate() {
        let flip = bi.is_negative();
        let mut t = vec![Rational::zero(); width];
        for (j, v) in row.iter().enumerate() {
            t[j] = if flip { -v } else { v.clone() };
        }
        t[n + i] = Rational::one();
        t[rhs] = if flip { -bi } else { bi.clone() };
        tableau.push(t);
    }
    let mut basis: Vec<usize> = (n..n + m).collect();

    // Reduced costs for min Σ artificials; the last entry is -z.
    let mut cost = vec![Rational::zero(); width];
    for row in &tableau {
        for j in (0..n).chain(std::iter::once(rhs)) {
            cost[j] -= &row[j];
        }
    }

    while let Some(q) = (0..n + m).find(|&j| cost[j].is_negative()) {
        let mut leave: Option<(usize, Rational)> = None;
        for (i, row) in tableau.iter().enumerate() {
            if !row[q].is_positive() {
                continue;
            }
            let ratio = &row[rhs] / &row[q];
            let better = match &leave {
                None => true,
                Some((r, best)) => ratio < *best || (ratio == *best && basis[i] < basis[*r]),
            };
            if better {
                leave = Some((i, ratio));
            }
        }
        // Phase one is bounded below by zero, so an entering column always
        // has a positive entry.
        let (r, _) = leave.expect("phase-one objective is bounded");
        pivot(&mut tableau, &mut cost, r, q);
        basis[r] = q;
    }

    let mut solution = vec![Rational::zero(); n];
    for (i, &var) in basis.iter().enumerate() {
        if var < n {
            solution[var] = tableau[i][rhs].clone();
        }
    }
    PhaseOne {
        residual: -cost[rhs].clone(),
        solution,
    }
}

fn pivot(tableau: &mut [Vec<Rational>], cost: &mut [Rational], r: usize, q: usize) {
    let inv = tableau[r][q].recip();
    for v in tableau[r].iter_mut() {
        if !v.is_zero() {
            *v *= &inv;
        }
    }
    let pivot_row = tableau[r].clone();
    let eliminate = |row: &mut [Rational]| {
        let factor = row[q].clone();
        if factor.is_zero() {
            return;
        }
        for (v, p) in row.iter_mut().zip(&pivot_row) {
            if !p.is_zero() {
                *v -= &factor * p;
            }
        }
    };
    for (i, row) in tableau.iter_mut().enumerate() {
        if i != r {
            eliminate(row);
        }
    }
    eliminate(cost);
}
