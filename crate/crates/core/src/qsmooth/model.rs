//! Cosimplicial affine spaces built from a cospan: every level is a product
//! of copies of `X`, `Y` and `Z`, and every structure map sends each factor
//! to one factor of the other level, possibly through `f` or `g`.
//!
//! Polynomial functions on such a thing form a simplicial algebra; the faces
//! and degeneracies act by substitution.

use super::cospan::{reshape, CospanPresentation};
use super::linalg::Q;
use super::poly::Poly;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Obj {
    X,
    Z,
    Y,
}

/// How one factor of the target level is obtained from a factor of the
/// source level.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Leg {
    Identity,
    /// Through `f: X -> Z`.
    Left,
    /// Through `g: Y -> Z`.
    Right,
}

/// Factor `source` of the other level, pushed along `leg`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Slot {
    pub source: usize,
    pub leg: Leg,
}

#[derive(Clone, Debug)]
pub struct CosimplicialModel {
    cospan: CospanPresentation,
    levels: Vec<Vec<Obj>>,
    /// `cofaces[k][i][t]`: factor `t` of level `k` from level `k-1`.
    cofaces: Vec<Vec<Vec<Slot>>>,
    /// `codegeneracies[k][j][t]`: factor `t` of level `k` from level `k+1`.
    codegeneracies: Vec<Vec<Vec<Slot>>>,
    offsets: Vec<Vec<usize>>,
}

impl CosimplicialModel {
    pub(crate) fn new(
        cospan: CospanPresentation,
        levels: Vec<Vec<Obj>>,
        cofaces: Vec<Vec<Vec<Slot>>>,
        codegeneracies: Vec<Vec<Vec<Slot>>>,
    ) -> Self {
        let dim = |o: Obj| match o {
            Obj::X => cospan.a(),
            Obj::Y => cospan.b(),
            Obj::Z => cospan.c(),
        };
        let offsets = levels
            .iter()
            .map(|objs| {
                let mut acc = 0;
                let mut out = Vec::with_capacity(objs.len() + 1);
                for &o in objs {
                    out.push(acc);
                    acc += dim(o);
                }
                out.push(acc);
                out
            })
            .collect();
        CosimplicialModel {
            cospan,
            levels,
            cofaces,
            codegeneracies,
            offsets,
        }
    }

    pub fn cospan(&self) -> &CospanPresentation {
        &self.cospan
    }

    /// Highest level built.
    pub fn top(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn factors(&self, k: usize) -> &[Obj] {
        &self.levels[k]
    }

    pub fn nvars(&self, k: usize) -> usize {
        *self.offsets[k].last().unwrap()
    }

    /// First variable of factor `t` at level `k`.
    pub fn offset(&self, k: usize, t: usize) -> usize {
        self.offsets[k][t]
    }

    fn check_level(&self, k: usize) -> Result<()> {
        if k > self.top() {
            return Err(Error::BoundExceeded {
                what: "level",
                value: k,
                limit: self.top(),
            });
        }
        Ok(())
    }

    /// Images of the level-`to` variables as polynomials in the level-`from`
    /// variables, for the structure map given by `slots`.
    fn images(&self, to: usize, from: usize, slots: &[Slot]) -> Vec<Poly> {
        let n = self.nvars(from);
        let mut out = Vec::with_capacity(self.nvars(to));
        for (t, slot) in slots.iter().enumerate() {
            let obj = self.levels[to][t];
            let src = self.offset(from, slot.source);
            match slot.leg {
                Leg::Identity => {
                    let width = self.offsets[to][t + 1] - self.offsets[to][t];
                    out.extend((0..width).map(|v| Poly::var(n, src + v)));
                }
                Leg::Left => {
                    debug_assert_eq!(obj, Obj::Z);
                    out.extend(self.cospan.left().shifted_components(src, n));
                }
                Leg::Right => {
                    debug_assert_eq!(obj, Obj::Z);
                    out.extend(self.cospan.right().shifted_components(src, n));
                }
            }
        }
        out
    }

    /// Substitution images for `d_i`: level `k` variables in level `k-1`.
    pub fn face_images(&self, k: usize, i: usize) -> Result<Vec<Poly>> {
        self.check_level(k)?;
        if k == 0 || i > k {
            return Err(Error::BoundExceeded {
                what: "face index",
                value: i,
                limit: k,
            });
        }
        Ok(self.images(k, k - 1, &self.cofaces[k][i]))
    }

    /// Substitution images for `s_j`: level `k` variables in level `k+1`.
    pub fn degeneracy_images(&self, k: usize, j: usize) -> Result<Vec<Poly>> {
        self.check_level(k + 1)?;
        if j > k {
            return Err(Error::BoundExceeded {
                what: "degeneracy index",
                value: j,
                limit: k,
            });
        }
        Ok(self.images(k, k + 1, &self.codegeneracies[k][j]))
    }

    /// `d_i F` for `F` at level `k`.
    pub fn face(&self, k: usize, i: usize, f: &Poly) -> Result<Poly> {
        self.check_poly(k, f)?;
        let images = self.face_images(k, i)?;
        Ok(reshape(f.substitute(&images)?, self.nvars(k - 1)))
    }

    /// `s_j F` for `F` at level `k`.
    pub fn degeneracy(&self, k: usize, j: usize, f: &Poly) -> Result<Poly> {
        self.check_poly(k, f)?;
        let images = self.degeneracy_images(k, j)?;
        Ok(reshape(f.substitute(&images)?, self.nvars(k + 1)))
    }

    /// `Σ (-1)^i d_i F` for `F` at level `k >= 1`.
    pub fn differential(&self, k: usize, f: &Poly) -> Result<Poly> {
        let mut out = Poly::zero(self.nvars(k.saturating_sub(1)));
        for i in 0..=k {
            let d = self.face(k, i, f)?;
            out = if i % 2 == 0 { out.add(&d) } else { out.sub(&d) };
        }
        Ok(out)
    }

    fn check_poly(&self, k: usize, f: &Poly) -> Result<()> {
        self.check_level(k)?;
        if f.nvars() != self.nvars(k) {
            return Err(Error::DimensionMismatch {
                what: "polynomial at this level",
                expected: self.nvars(k),
                got: f.nvars(),
            });
        }
        Ok(())
    }

    /// The base point at level `k` over the point `(x, y)` of the classical
    /// intersection: `x` on `X`, `y` on `Y`, `f(x)` on `Z`.
    pub fn base_point(&self, k: usize, x: &[Q], y: &[Q]) -> Result<Vec<Q>> {
        let z = self.cospan.left().eval(x)?;
        let mut out = Vec::with_capacity(self.nvars(k));
        for o in &self.levels[k] {
            match o {
                Obj::X => out.extend_from_slice(x),
                Obj::Y => out.extend_from_slice(y),
                Obj::Z => out.extend_from_slice(&z),
            }
        }
        Ok(out)
    }

    /// Checks every simplicial identity on the generators (the variables)
    /// of each level up to the top. Returns the number of checks or the
    /// first failing identity.
    pub fn identity_report(&self) -> Result<(usize, Option<String>)> {
        let top = self.top();
        let mut checked = 0;
        let gens = |k: usize| (0..self.nvars(k)).map(move |v| Poly::var(self.nvars(k), v));
        // d_i d_j = d_{j-1} d_i, i < j, on level k.
        for k in 2..=top {
            for j in 1..=k {
                for i in 0..j {
                    for g in gens(k) {
                        checked += 1;
                        let lhs = self.face(k - 1, i, &self.face(k, j, &g)?)?;
                        let rhs = self.face(k - 1, j - 1, &self.face(k, i, &g)?)?;
                        if lhs != rhs {
                            return Ok((checked, Some(format!("d{i} d{j} = d{} d{i} at level {k}", j - 1))));
                        }
                    }
                }
            }
        }
        // s_i s_j = s_{j+1} s_i, i <= j, on level k (landing in k+2).
        for k in 0..top.saturating_sub(1) {
            for j in 0..=k {
                for i in 0..=j {
                    for g in gens(k) {
                        checked += 1;
                        let lhs = self.degeneracy(k + 1, i, &self.degeneracy(k, j, &g)?)?;
                        let rhs = self.degeneracy(k + 1, j + 1, &self.degeneracy(k, i, &g)?)?;
                        if lhs != rhs {
                            return Ok((checked, Some(format!("s{i} s{j} = s{} s{i} at level {k}", j + 1))));
                        }
                    }
                }
            }
        }
        // d_i s_j on level k: s_j lands in k+1, d_i returns to k.
        for k in 0..top {
            for j in 0..=k {
                for i in 0..=k + 1 {
                    for g in gens(k) {
                        checked += 1;
                        let lhs = self.face(k + 1, i, &self.degeneracy(k, j, &g)?)?;
                        let rhs = if i == j || i == j + 1 {
                            g.clone()
                        } else if i < j {
                            self.degeneracy(k - 1, j - 1, &self.face(k, i, &g)?)?
                        } else {
                            self.degeneracy(k - 1, j, &self.face(k, i - 1, &g)?)?
                        };
                        if lhs != rhs {
                            return Ok((checked, Some(format!("d{i} s{j} at level {k}"))));
                        }
                    }
                }
            }
        }
        Ok((checked, None))
    }
}

/// Level `n` is `X × Z^n × Y`; `d_0` feeds `f(x)` into the first `Z`,
/// `d_n` feeds `g(y)` into the last, interior faces duplicate, and `s_j`
/// forgets the `(j+1)`-st `Z`.
pub fn hochschild_model(cospan: &CospanPresentation, top: usize) -> CosimplicialModel {
    let levels: Vec<Vec<Obj>> = (0..=top)
        .map(|n| {
            let mut v = vec![Obj::X];
            v.extend(std::iter::repeat(Obj::Z).take(n));
            v.push(Obj::Y);
            v
        })
        .collect();
    let id = |source| Slot {
        source,
        leg: Leg::Identity,
    };
    let cofaces = (0..=top)
        .map(|n| {
            if n == 0 {
                return vec![];
            }
            (0..=n)
                .map(|i| {
                    let mut slots = vec![id(0)];
                    for k in 1..=n {
                        let slot = if i == 0 {
                            if k == 1 {
                                Slot {
                                    source: 0,
                                    leg: Leg::Left,
                                }
                            } else {
                                id(k - 1)
                            }
                        } else if i == n && k == n {
                            Slot {
                                source: n,
                                leg: Leg::Right,
                            }
                        } else if k <= i {
                            id(k)
                        } else {
                            id(k - 1)
                        };
                        slots.push(slot);
                    }
                    slots.push(id(n));
                    slots
                })
                .collect()
        })
        .collect();
    let codegeneracies = (0..top)
        .map(|n| {
            (0..=n)
                .map(|j| {
                    let mut slots = vec![id(0)];
                    for k in 1..=n {
                        slots.push(if k <= j { id(k) } else { id(k + 1) });
                    }
                    slots.push(id(n + 2));
                    slots
                })
                .collect()
        })
        .collect();
    CosimplicialModel::new(cospan.clone(), levels, cofaces, codegeneracies)
}

/// `k`-simplices of the nerve of `X -> Z <- Y`: weakly increasing chains
/// of length `k+1`, listed in lexicographic order.
pub fn nerve_simplices(k: usize) -> Vec<Vec<Obj>> {
    let mut out = Vec::new();
    // Chains are constant, or some X's or Y's followed by at least one Z.
    for first in [Obj::X, Obj::Y] {
        for zeros in (1..=k + 1).rev() {
            let mut c = vec![first; zeros];
            c.extend(std::iter::repeat(Obj::Z).take(k + 1 - zeros));
            out.push(c);
        }
    }
    out.push(vec![Obj::Z; k + 1]);
    out.sort();
    out
}

/// The cosimplicial replacement of the cospan diagram: level `k` is the
/// product over nerve `k`-simplices of the value at the last vertex. Deleting
/// the last vertex pushes along the last arrow; every other coface and every
/// codegeneracy is a projection.
pub fn nerve_model(cospan: &CospanPresentation, top: usize) -> CosimplicialModel {
    let simplices: Vec<Vec<Vec<Obj>>> = (0..=top + 1).map(nerve_simplices).collect();
    let index = |k: usize, s: &[Obj]| simplices[k].iter().position(|t| t == s).expect("nerve closed");
    let levels: Vec<Vec<Obj>> = (0..=top).map(|k| simplices[k].iter().map(|s| *s.last().unwrap()).collect()).collect();
    let cofaces = (0..=top)
        .map(|k| {
            if k == 0 {
                return vec![];
            }
            (0..=k)
                .map(|i| {
                    simplices[k]
                        .iter()
                        .map(|s| {
                            let mut face = s.clone();
                            face.remove(i);
                            let leg = if i < k || s[k - 1] == s[k] {
                                Leg::Identity
                            } else if s[k - 1] == Obj::X {
                                Leg::Left
                            } else {
                                Leg::Right
                            };
                            Slot {
                                source: index(k - 1, &face),
                                leg,
                            }
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    let codegeneracies = (0..top)
        .map(|k| {
            (0..=k)
                .map(|j| {
                    simplices[k]
                        .iter()
                        .map(|s| {
                            let mut deg = s.clone();
                            deg.insert(j, s[j]);
                            Slot {
                                source: index(k + 1, &deg),
                                leg: Leg::Identity,
                            }
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    CosimplicialModel::new(cospan.clone(), levels, cofaces, codegeneracies)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qsmooth::cospan::PolynomialMap;

    fn random_cospan() -> CospanPresentation {
        CospanPresentation::new(
            PolynomialMap::parse(2, &["x0^2 + x1", "x0x1 - 3"]).unwrap(),
            PolynomialMap::parse(1, &["x0^3", "2x0 + 1/2"]).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn hochschild_identities_hold() {
        for c in [CospanPresentation::point_loop(), CospanPresentation::axes(), random_cospan()] {
            let (checked, fail) = hochschild_model(&c, 4).identity_report().unwrap();
            assert!(checked > 0);
            assert_eq!(fail, None);
        }
    }

    #[test]
    fn nerve_identities_hold() {
        for c in [CospanPresentation::point_loop(), random_cospan()] {
            let (_, fail) = nerve_model(&c, 3).identity_report().unwrap();
            assert_eq!(fail, None);
        }
    }

    #[test]
    fn nerve_counts() {
        for k in 0..5 {
            assert_eq!(nerve_simplices(k).len(), 2 * k + 3);
        }
    }

    #[test]
    fn broken_model_detected() {
        let c = CospanPresentation::point_loop();
        let mut m = hochschild_model(&c, 3);
        // Make d_0 at level 2 behave like d_1.
        m.cofaces[2][0] = m.cofaces[2][1].clone();
        let (_, fail) = m.identity_report().unwrap();
        assert!(fail.is_some());
    }
}
