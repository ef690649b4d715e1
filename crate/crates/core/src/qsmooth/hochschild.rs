//! The Hochschild simplicial algebra of a cospan: level `n` is polynomials on
//! `X × Z^n × Y`.
//!
//! Indexing: level `n` carries `n` copies of `Z`, named `z1..zn`. Faces
//! `d_0..d_{n+1}` go from level `n+1` to level `n`: `d_0` puts `f(x)` into
//! `z1`, `d_{n+1}` puts `g(y)` into the last block, and `d_i` for `0 < i <
//! n+1` sets `z_{i+1} = z_i`. Degeneracy `s_j` from level `n` to `n+1`
//! forgets `z_{j+1}`.

use serde::Serialize;

use super::cospan::CospanPresentation;
use super::model::hochschild_model;
use super::poly::Poly;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VariableBlock {
    pub name: String,
    pub start: usize,
    pub len: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HochschildLevel {
    pub level: usize,
    pub nvars: usize,
    pub blocks: Vec<VariableBlock>,
}

pub fn hochschild_level(c: &CospanPresentation, n: usize) -> HochschildLevel {
    let mut blocks = vec![VariableBlock {
        name: "x".into(),
        start: 0,
        len: c.a(),
    }];
    for k in 1..=n {
        blocks.push(VariableBlock {
            name: format!("z{k}"),
            start: c.a() + (k - 1) * c.c(),
            len: c.c(),
        });
    }
    blocks.push(VariableBlock {
        name: "y".into(),
        start: c.a() + n * c.c(),
        len: c.b(),
    });
    HochschildLevel {
        level: n,
        nvars: c.a() + n * c.c() + c.b(),
        blocks,
    }
}

/// `d_i F` for `F` at level `n+1`, landing in level `n`.
pub fn hochschild_face(c: &CospanPresentation, n: usize, i: usize, f: &Poly) -> Result<Poly> {
    if i > n + 1 {
        return Err(Error::BoundExceeded {
            what: "face index",
            value: i,
            limit: n + 1,
        });
    }
    hochschild_model(c, n + 1).face(n + 1, i, f)
}

/// `s_j F` for `F` at level `n`, landing in level `n+1`.
pub fn hochschild_degeneracy(c: &CospanPresentation, n: usize, j: usize, f: &Poly) -> Result<Poly> {
    if j > n {
        return Err(Error::BoundExceeded {
            what: "degeneracy index",
            value: j,
            limit: n,
        });
    }
    hochschild_model(c, n + 1).degeneracy(n, j, f)
}

/// `Σ (-1)^i d_i F` for `F` at level `n+1`.
pub fn hochschild_differential(c: &CospanPresentation, n: usize, f: &Poly) -> Result<Poly> {
    hochschild_model(c, n + 1).differential(n + 1, f)
}

/// Monotone maps `[n] -> [1]`, encoded by how many vertices go to 0.
pub fn interval_maps(n: usize) -> Vec<Vec<u8>> {
    let mut out = Vec::new();
    for bits in 0u32..(1 << (n + 1)) {
        let v: Vec<u8> = (0..=n).map(|i| ((bits >> i) & 1) as u8).collect();
        if v.windows(2).all(|w| w[0] <= w[1]) {
            out.push(v);
        }
    }
    out.sort_by_key(|v| std::cmp::Reverse(zeros(v)));
    out
}

fn zeros(v: &[u8]) -> usize {
    v.iter().filter(|&&x| x == 0).count()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IntervalReport {
    pub n: usize,
    pub count: usize,
    pub count_ok: bool,
    pub faces_ok: bool,
    pub degeneracies_ok: bool,
}

impl IntervalReport {
    pub fn ok(&self) -> bool {
        self.count_ok && self.faces_ok && self.degeneracies_ok
    }
}

/// Brute-force check that `Hom([n],[1])` has `n+2` elements and that, on
/// the encoding by number of zeros `t ∈ 0..=n+1`, precomposition with the
/// coface `δ^i` sends `t` to `t` if `t ≤ i` and `t-1` otherwise (labels `i`
/// and `i+1` are identified), while precomposition with `σ^j` sends `t` to
/// `t` if `t ≤ j` and `t+1` otherwise (label `j+1` is skipped).
pub fn interval_map_report(n: usize) -> IntervalReport {
    let maps = interval_maps(n);
    let count = maps.len();
    let mut faces_ok = true;
    if n >= 1 {
        for i in 0..=n {
            for v in &maps {
                // δ^i: [n-1] -> [n] skips i.
                let pulled: Vec<u8> = (0..n).map(|k| v[if k < i { k } else { k + 1 }]).collect();
                let t = zeros(v);
                let rule = if t <= i { t } else { t - 1 };
                faces_ok &= zeros(&pulled) == rule;
            }
        }
    }
    let mut degeneracies_ok = true;
    for j in 0..=n {
        for v in &maps {
            // σ^j: [n+1] -> [n] repeats j.
            let pulled: Vec<u8> = (0..=n + 1).map(|k| v[if k <= j { k } else { k - 1 }]).collect();
            let t = zeros(v);
            let rule = if t <= j { t } else { t + 1 };
            degeneracies_ok &= zeros(&pulled) == rule;
        }
    }
    IntervalReport {
        n,
        count,
        count_ok: count == n + 2,
        faces_ok,
        degeneracies_ok,
    }
}

/// Binomial coefficients `C(codim, k)`, the Betti numbers of the exterior
/// algebra on a `codim`-dimensional space.
pub fn koszul_betti(codim: usize) -> Vec<usize> {
    let mut row = vec![1usize];
    for _ in 0..codim {
        let mut next = vec![1usize; row.len() + 1];
        for k in 1..row.len() {
            next[k] = row[k - 1] + row[k];
        }
        row = next;
    }
    row
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qsmooth::cospan::PolynomialMap;
    use crate::qsmooth::linalg::q;

    #[test]
    fn level_descriptors() {
        let c = CospanPresentation::axes();
        assert_eq!(hochschild_level(&c, 1).nvars, 4);
        let lp = CospanPresentation::point_loop();
        let l = hochschild_level(&lp, 2);
        assert_eq!(l.nvars, 2);
        assert_eq!(l.blocks.iter().map(|b| b.name.as_str()).collect::<Vec<_>>(), ["x", "z1", "z2", "y"]);
        assert_eq!(hochschild_level(&c, 0).blocks.len(), 2);
    }

    #[test]
    fn point_loop_faces() {
        let c = CospanPresentation::point_loop();
        let f = Poly::parse("x0x1", 2).unwrap();
        assert_eq!(hochschild_face(&c, 1, 0, &f).unwrap(), Poly::zero(1));
        assert_eq!(hochschild_face(&c, 1, 1, &f).unwrap(), Poly::parse("x0^2", 1).unwrap());
        assert_eq!(hochschild_face(&c, 1, 2, &f).unwrap(), Poly::zero(1));
        assert!(hochschild_face(&c, 1, 3, &f).is_err());
        assert_eq!(hochschild_differential(&c, 1, &f).unwrap(), Poly::parse("-x0^2", 1).unwrap());
        let g = Poly::parse("x0^2", 1).unwrap();
        assert_eq!(hochschild_differential(&c, 0, &g).unwrap(), Poly::zero(0));
    }

    #[test]
    fn constants_are_fixed() {
        let c = CospanPresentation::axes();
        let k = Poly::constant(6, q(7));
        for i in 0..=2 {
            assert_eq!(hochschild_face(&c, 1, i, &k).unwrap(), Poly::constant(4, q(7)));
        }
    }

    #[test]
    fn spot_identity() {
        let c = CospanPresentation::point_loop();
        let f = Poly::parse("x0x1^2", 2).unwrap();
        // Level 2 -> 1 -> 0.
        let lhs = hochschild_face(&c, 0, 0, &hochschild_face(&c, 1, 2, &f).unwrap()).unwrap();
        let rhs = hochschild_face(&c, 0, 1, &hochschild_face(&c, 1, 0, &f).unwrap()).unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn boundary_squared_vanishes() {
        let c = CospanPresentation::new(
            PolynomialMap::parse(1, &["x0^2 - 1", "3x0"]).unwrap(),
            PolynomialMap::parse(2, &["x0x1", "x1^3 + x0"]).unwrap(),
        )
        .unwrap();
        // Level 2 has 1 + 4 + 2 = 7 variables.
        let f = Poly::parse("x0x2x5 + x3^3 - 2x1x6^2 + x4x4x0", 7).unwrap();
        let d1 = hochschild_differential(&c, 1, &f).unwrap();
        let d0 = hochschild_differential(&c, 0, &d1).unwrap();
        assert!(d0.is_zero());
    }

    #[test]
    fn interval_maps_count_and_rules() {
        assert_eq!(interval_maps(2).len(), 4);
        for n in 0..=4 {
            assert!(interval_map_report(n).ok(), "n = {n}");
        }
    }

    #[test]
    fn koszul() {
        assert_eq!(koszul_betti(0), vec![1]);
        assert_eq!(koszul_betti(1), vec![1, 1]);
        assert_eq!(koszul_betti(2), vec![1, 2, 1]);
        assert_eq!(koszul_betti(4), vec![1, 4, 6, 4, 1]);
    }
}
