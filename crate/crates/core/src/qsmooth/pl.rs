//! The piecewise-linear retraction `π(x, y)`: `min` on the closed positive
//! quadrant, `max` on the closed negative quadrant, 0 elsewhere. It is
//! continuous and retracts the diagonal, but it is not differentiable along
//! the diagonal.

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use super::linalg::{format_rational, Q};

pub fn pl_retraction(x: &Q, y: &Q) -> Q {
    let zero = Q::zero();
    if *x >= zero && *y >= zero {
        x.min(y).clone()
    } else if *x <= zero && *y <= zero {
        x.max(y).clone()
    } else {
        zero
    }
}

/// The three region formulas, each applied regardless of region.
fn region_formulas(x: &Q, y: &Q) -> [Q; 3] {
    [x.min(y).clone(), x.max(y).clone(), Q::zero()]
}

/// Regions whose closure contains `(x, y)`.
fn regions_at(x: &Q, y: &Q) -> Vec<usize> {
    let zero = Q::zero();
    let mut out = Vec::new();
    if *x >= zero && *y >= zero {
        out.push(0);
    }
    if *x <= zero && *y <= zero {
        out.push(1);
    }
    // Closure of the mixed-sign region: x*y <= 0.
    if (x * y) <= zero {
        out.push(2);
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DerivativeWitness {
    pub point: [String; 2],
    pub step: String,
    /// `(π(t+h, t) - π(t, t)) / h`.
    pub right_quotient: String,
    /// `(π(t-h, t) - π(t, t)) / (-h)`.
    pub left_quotient: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PlReport {
    pub grid_bound: String,
    pub grid_points: usize,
    pub diagonal_retraction: bool,
    pub axes_collapse: bool,
    pub continuity: bool,
    pub first_failure: Option<[String; 2]>,
    pub witness: Option<DerivativeWitness>,
}

impl PlReport {
    pub fn ok(&self) -> bool {
        self.diagonal_retraction && self.axes_collapse && self.continuity && self.witness.is_some()
    }
}

/// Checks the retraction identities and continuity on the grid
/// `{ k·bound/100 : -100 ≤ k ≤ 100 }²` (40401 points), then exhibits
/// mismatched one-sided partial difference quotients at a diagonal point.
pub fn pl_retraction_check(grid_bound: &Q) -> PlReport {
    const STEPS: i64 = 100;
    let bound = grid_bound.abs();
    let bound = if bound.is_zero() { Q::one() } else { bound };
    let coords: Vec<Q> = (-STEPS..=STEPS).map(|k| &bound * Q::new(k.into(), STEPS.into())).collect();
    let zero = Q::zero();
    let mut diagonal = true;
    let mut axes = true;
    let mut continuity = true;
    let mut first_failure = None;
    let mut points = 0;
    for x in &coords {
        diagonal &= pl_retraction(x, x) == *x;
        axes &= pl_retraction(x, &zero).is_zero() && pl_retraction(&zero, x).is_zero();
        for y in &coords {
            points += 1;
            let v = pl_retraction(x, y);
            let formulas = region_formulas(x, y);
            // Every region touching the point must give the same value.
            let agree = regions_at(x, y).into_iter().all(|r| formulas[r] == v);
            if !agree && first_failure.is_none() {
                first_failure = Some([format_rational(x), format_rational(y)]);
            }
            continuity &= agree;
        }
    }
    let t = &bound / Q::from_integer(2.into());
    let h = &bound / Q::from_integer(STEPS.into());
    let base = pl_retraction(&t, &t);
    let right = (pl_retraction(&(&t + &h), &t) - &base) / &h;
    let left = (pl_retraction(&(&t - &h), &t) - &base) / -&h;
    let witness = (right != left).then(|| DerivativeWitness {
        point: [format_rational(&t), format_rational(&t)],
        step: format_rational(&h),
        right_quotient: format_rational(&right),
        left_quotient: format_rational(&left),
    });
    PlReport {
        grid_bound: format_rational(&bound),
        grid_points: points,
        diagonal_retraction: diagonal,
        axes_collapse: axes,
        continuity,
        first_failure,
        witness,
    }
}
