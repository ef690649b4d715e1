//! Seeded random cospans with planted rational intersection points.
//!
//! Generator: `ChaCha8Rng::seed_from_u64(seed)`, drawn in this order per
//! instance: `a ∈ 0..=3`, `b ∈ 0..=3`, `c ∈ 1..=3`; base coordinates `x`
//! then `y` as `n/d` with `n ∈ -3..=3`, `d ∈ 1..=2`; then for each target
//! coordinate a shared constant in `-3..=3`, and for each leg (left first)
//! linear coefficients in `-2..=2` followed by coefficients in `-1..=1` for
//! every quadratic monomial `u_i u_j`, `i ≤ j`, written in the shifted
//! coordinates `u = x - x_p`. Every fourth instance (index ≡ 3 mod 4) has the
//! linear part of target coordinate 0 zeroed on both legs, which forces a
//! non-transverse point.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::cospan::{CospanPresentation, PolynomialMap, RationalPoint};
use super::linalg::{q, Q};
use super::poly::Poly;
use crate::Result;

#[derive(Clone, Debug)]
pub struct CorpusInstance {
    pub index: usize,
    pub cospan: CospanPresentation,
    pub point: RationalPoint,
    pub degenerate: bool,
}

fn rational(rng: &mut ChaCha8Rng) -> Q {
    let n: i64 = rng.gen_range(-3..=3);
    let d: i64 = rng.gen_range(1..=2);
    Q::new(n.into(), d.into())
}

/// A leg with prescribed constant terms, expanded from shifted coordinates.
fn leg(rng: &mut ChaCha8Rng, base: &[Q], constants: &[Q], flat_first: bool) -> Result<PolynomialMap> {
    let n = base.len();
    let mut comps = Vec::with_capacity(constants.len());
    for (r, c0) in constants.iter().enumerate() {
        let mut p = Poly::constant(n, c0.clone());
        for i in 0..n {
            let a: i64 = rng.gen_range(-2..=2);
            if !(flat_first && r == 0) {
                p = p.add(&Poly::var(n, i).scale(&q(a)));
            }
        }
        for i in 0..n {
            for j in i..n {
                let a: i64 = rng.gen_range(-1..=1);
                p = p.add(&Poly::var(n, i).mul(&Poly::var(n, j)).scale(&q(a)));
            }
        }
        comps.push(p);
    }
    // u_i = x_i - x_p,i.
    let unshift: Vec<Poly> = (0..n)
        .map(|i| Poly::var(n, i).sub(&Poly::constant(n, base[i].clone())))
        .collect();
    let comps = comps
        .into_iter()
        .map(|p| if n == 0 { Ok(p) } else { p.substitute(&unshift) })
        .collect::<Result<Vec<_>>>()?;
    PolynomialMap::new(n, comps)
}

pub fn instance(rng: &mut ChaCha8Rng, index: usize) -> Result<CorpusInstance> {
    let a = rng.gen_range(0..=3usize);
    let b = rng.gen_range(0..=3usize);
    let c = rng.gen_range(1..=3usize);
    let x: Vec<Q> = (0..a).map(|_| rational(rng)).collect();
    let y: Vec<Q> = (0..b).map(|_| rational(rng)).collect();
    let constants: Vec<Q> = (0..c).map(|_| q(rng.gen_range(-3..=3))).collect();
    let degenerate = index % 4 == 3;
    let left = leg(rng, &x, &constants, degenerate)?;
    let right = leg(rng, &y, &constants, degenerate)?;
    let cospan = CospanPresentation::new(left, right)?;
    let point = RationalPoint::on(&cospan, x, y)?;
    Ok(CorpusInstance {
        index,
        cospan,
        point,
        degenerate,
    })
}

pub fn corpus(seed: u64, count: usize) -> Result<Vec<CorpusInstance>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|i| instance(&mut rng, i)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qsmooth::cospan::is_transverse;

    #[test]
    fn deterministic_and_planted() {
        let a = corpus(7, 20).unwrap();
        let b = corpus(7, 20).unwrap();
        for (u, v) in a.iter().zip(&b) {
            assert_eq!(u.cospan, v.cospan);
            assert_eq!(u.point, v.point);
            u.point.check(&u.cospan).unwrap();
        }
        assert_ne!(corpus(8, 20).unwrap()[0].cospan, a[0].cospan);
    }

    #[test]
    fn degenerate_instances_are_not_transverse() {
        for inst in corpus(7, 40).unwrap().iter().filter(|i| i.degenerate) {
            assert!(!is_transverse(&inst.cospan, &inst.point).unwrap());
        }
    }
}
