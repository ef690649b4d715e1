//! Polynomial cospans `X -> Z <- Y`, rational points on the classical
//! intersection, and the two-term tangent complex.

use num_traits::Zero;

use super::linalg::{Matrix, Q};
use super::poly::Poly;
use crate::{Error, Result};

/// A polynomial map `ℚ^a -> ℚ^c`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolynomialMap {
    source_dim: usize,
    components: Vec<Poly>,
}

impl PolynomialMap {
    pub fn new(source_dim: usize, components: Vec<Poly>) -> Result<Self> {
        if let Some((k, p)) = components.iter().enumerate().find(|(_, p)| p.nvars() != source_dim) {
            return Err(Error::invariant(
                "poly_map_arity",
                format!("component {k} has {} variables, expected {source_dim}", p.nvars()),
            ));
        }
        Ok(PolynomialMap {
            source_dim,
            components,
        })
    }

    pub fn parse(source_dim: usize, polys: &[&str]) -> Result<Self> {
        let comps = polys.iter().map(|s| Poly::parse(s, source_dim)).collect::<Result<Vec<_>>>()?;
        Self::new(source_dim, comps)
    }

    pub fn identity(n: usize) -> Self {
        PolynomialMap {
            source_dim: n,
            components: (0..n).map(|i| Poly::var(n, i)).collect(),
        }
    }

    pub fn source_dim(&self) -> usize {
        self.source_dim
    }

    pub fn target_dim(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[Poly] {
        &self.components
    }

    pub fn eval(&self, p: &[Q]) -> Result<Vec<Q>> {
        self.check_point(p)?;
        self.components.iter().map(|f| f.eval(p)).collect()
    }

    fn check_point(&self, p: &[Q]) -> Result<()> {
        if p.len() != self.source_dim {
            return Err(Error::DimensionMismatch {
                what: "point in map source",
                expected: self.source_dim,
                got: p.len(),
            });
        }
        Ok(())
    }

    /// Composite `self ∘ inner`.
    pub fn compose(&self, inner: &PolynomialMap) -> Result<PolynomialMap> {
        if inner.target_dim() != self.source_dim {
            return Err(Error::DimensionMismatch {
                what: "composable maps",
                expected: self.source_dim,
                got: inner.target_dim(),
            });
        }
        let comps = self
            .components
            .iter()
            .map(|f| f.substitute(&inner.components))
            .collect::<Result<Vec<_>>>()?;
        // A map out of ℚ^0 has components with zero variables whatever the
        // inner map, so the source is always the inner source.
        PolynomialMap::new(inner.source_dim, comps.into_iter().map(|p| reshape(p, inner.source_dim)).collect())
    }

    /// The components with variables renumbered: variable `i` becomes
    /// `offset + i` among `nvars`.
    pub fn shifted_components(&self, offset: usize, nvars: usize) -> Vec<Poly> {
        let images: Vec<Poly> = (0..self.source_dim).map(|i| Poly::var(nvars, offset + i)).collect();
        self.components
            .iter()
            .map(|f| reshape(f.substitute(&images).expect("arity checked"), nvars))
            .collect()
    }
}

/// Substituting into a polynomial with no variables yields a polynomial with
/// no variables; this lifts such a constant into `nvars` variables.
pub(crate) fn reshape(p: Poly, nvars: usize) -> Poly {
    if p.nvars() == nvars {
        p
    } else {
        assert_eq!(p.nvars(), 0);
        p.widen(nvars)
    }
}

/// The Jacobian `c×a` matrix of `f` at `p`.
pub fn jacobian(f: &PolynomialMap, p: &[Q]) -> Result<Matrix> {
    f.check_point(p)?;
    let mut m = Matrix::zeros(f.target_dim(), f.source_dim());
    for (r, comp) in f.components.iter().enumerate() {
        for c in 0..f.source_dim {
            m.set(r, c, comp.derivative(c).eval(p)?);
        }
    }
    Ok(m)
}

/// A cospan `X = ℚ^a -> Z = ℚ^c <- Y = ℚ^b`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CospanPresentation {
    left: PolynomialMap,
    right: PolynomialMap,
}

impl CospanPresentation {
    pub fn new(left: PolynomialMap, right: PolynomialMap) -> Result<Self> {
        if left.target_dim() != right.target_dim() {
            return Err(Error::invariant(
                "cospan_targets_equal",
                format!("left lands in dimension {}, right in {}", left.target_dim(), right.target_dim()),
            ));
        }
        Ok(CospanPresentation { left, right })
    }

    /// `pt -> ℚ <- pt`, both legs hitting the origin.
    pub fn point_loop() -> Self {
        Self::new(
            PolynomialMap::parse(0, &["0"]).unwrap(),
            PolynomialMap::parse(0, &["0"]).unwrap(),
        )
        .unwrap()
    }

    /// `ℚ -> ℚ <- pt`, `x ↦ x²` against the origin.
    pub fn square_against_point() -> Self {
        Self::new(
            PolynomialMap::parse(1, &["x0^2"]).unwrap(),
            PolynomialMap::parse(0, &["0"]).unwrap(),
        )
        .unwrap()
    }

    /// The two coordinate axes in the plane.
    pub fn axes() -> Self {
        Self::new(
            PolynomialMap::parse(1, &["x0", "0"]).unwrap(),
            PolynomialMap::parse(1, &["0", "x0"]).unwrap(),
        )
        .unwrap()
    }

    pub fn left(&self) -> &PolynomialMap {
        &self.left
    }

    pub fn right(&self) -> &PolynomialMap {
        &self.right
    }

    pub fn a(&self) -> usize {
        self.left.source_dim()
    }

    pub fn b(&self) -> usize {
        self.right.source_dim()
    }

    pub fn c(&self) -> usize {
        self.left.target_dim()
    }
}

/// Coordinates `(x, y)` with `f(x) = g(y)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalPoint {
    x: Vec<Q>,
    y: Vec<Q>,
}

impl RationalPoint {
    pub fn on(c: &CospanPresentation, x: Vec<Q>, y: Vec<Q>) -> Result<Self> {
        let fx = c.left.eval(&x)?;
        let gy = c.right.eval(&y)?;
        if fx != gy {
            return Err(Error::invariant(
                "point_on_intersection",
                "f(x) differs from g(y)".to_string(),
            ));
        }
        Ok(RationalPoint { x, y })
    }

    /// The unique point when both sources are zero-dimensional.
    pub fn empty_on(c: &CospanPresentation) -> Result<Self> {
        Self::on(c, vec![], vec![])
    }

    pub fn origin(c: &CospanPresentation) -> Result<Self> {
        Self::on(c, vec![Q::zero(); c.a()], vec![Q::zero(); c.b()])
    }

    pub fn x(&self) -> &[Q] {
        &self.x
    }

    pub fn y(&self) -> &[Q] {
        &self.y
    }

    /// Re-validates against a (possibly different) cospan.
    pub fn check(&self, c: &CospanPresentation) -> Result<()> {
        Self::on(c, self.x.clone(), self.y.clone()).map(|_| ())
    }

    /// The common image `f(x) = g(y)`.
    pub fn image(&self, c: &CospanPresentation) -> Result<Vec<Q>> {
        c.left.eval(&self.x)
    }
}

/// A bounded chain complex of finite-dimensional rational spaces.
///
/// `dims[k]` sits in degree `lowest + k`; `boundaries[k]` maps degree
/// `lowest + k + 1` to `lowest + k`, so it is `dims[k] × dims[k+1]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChainComplex {
    lowest: i32,
    dims: Vec<usize>,
    boundaries: Vec<Matrix>,
}

impl ChainComplex {
    pub fn new(lowest: i32, dims: Vec<usize>, boundaries: Vec<Matrix>) -> Result<Self> {
        if boundaries.len() + 1 != dims.len().max(1) {
            return Err(Error::DimensionMismatch {
                what: "boundary count",
                expected: dims.len().saturating_sub(1),
                got: boundaries.len(),
            });
        }
        for (k, d) in boundaries.iter().enumerate() {
            if d.rows() != dims[k] || d.cols() != dims[k + 1] {
                return Err(Error::DimensionMismatch {
                    what: "chain boundary shape",
                    expected: dims[k] * dims[k + 1],
                    got: d.rows() * d.cols(),
                });
            }
        }
        for k in 1..boundaries.len() {
            if !boundaries[k - 1].mul(&boundaries[k]).is_zero() {
                return Err(Error::invariant(
                    "chain_boundary_squared",
                    format!("composite through degree {} is nonzero", lowest + k as i32),
                ));
            }
        }
        Ok(ChainComplex {
            lowest,
            dims,
            boundaries,
        })
    }

    pub fn lowest_degree(&self) -> i32 {
        self.lowest
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn boundaries(&self) -> &[Matrix] {
        &self.boundaries
    }

    /// `(degree, dim H)` from the lowest degree up.
    pub fn homology(&self) -> Vec<(i32, usize)> {
        let ranks: Vec<usize> = self.boundaries.iter().map(Matrix::rank).collect();
        (0..self.dims.len())
            .map(|k| {
                let out = if k == 0 { 0 } else { ranks[k - 1] };
                let inc = ranks.get(k).copied().unwrap_or(0);
                (self.lowest + k as i32, self.dims[k] - out - inc)
            })
            .collect()
    }

    pub fn homology_in(&self, degree: i32) -> usize {
        self.homology().into_iter().find(|&(d, _)| d == degree).map_or(0, |(_, h)| h)
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.homology()
            .into_iter()
            .map(|(d, h)| if d.rem_euclid(2) == 0 { h as i64 } else { -(h as i64) })
            .sum()
    }

    /// Degreewise direct sum of complexes with the same degree range.
    pub fn direct_sum(&self, other: &ChainComplex) -> Result<ChainComplex> {
        if self.lowest != other.lowest || self.dims.len() != other.dims.len() {
            return Err(Error::Precondition("direct sum needs matching degree ranges".into()));
        }
        let dims = self.dims.iter().zip(&other.dims).map(|(a, b)| a + b).collect();
        let boundaries = self
            .boundaries
            .iter()
            .zip(&other.boundaries)
            .map(|(a, b)| block_diagonal(a, b))
            .collect();
        ChainComplex::new(self.lowest, dims, boundaries)
    }
}

pub(crate) fn block_diagonal(a: &Matrix, b: &Matrix) -> Matrix {
    let mut m = Matrix::zeros(a.rows() + b.rows(), a.cols() + b.cols());
    for r in 0..a.rows() {
        for c in 0..a.cols() {
            m.set(r, c, a.get(r, c).clone());
        }
    }
    for r in 0..b.rows() {
        for c in 0..b.cols() {
            m.set(a.rows() + r, a.cols() + c, b.get(r, c).clone());
        }
    }
    m
}

/// The block `(df_p | -dg_p)`, a `c × (a+b)` matrix.
pub fn tangent_map(c: &CospanPresentation, p: &RationalPoint) -> Result<Matrix> {
    p.check(c)?;
    let df = jacobian(&c.left, &p.x)?;
    let dg = jacobian(&c.right, &p.y)?;
    Ok(df.hstack(&dg.scale(&-Q::from_integer(1.into()))))
}

/// `ℚ^a ⊕ ℚ^b -> ℚ^c` in degrees 0 and -1; `H₋₁` is the cokernel.
pub fn tangent_complex(c: &CospanPresentation, p: &RationalPoint) -> Result<ChainComplex> {
    let d = tangent_map(c, p)?;
    ChainComplex::new(-1, vec![c.c(), c.a() + c.b()], vec![d])
}

pub fn virtual_dimension(c: &CospanPresentation) -> i64 {
    c.a() as i64 + c.b() as i64 - c.c() as i64
}

pub fn is_transverse(c: &CospanPresentation, p: &RationalPoint) -> Result<bool> {
    Ok(tangent_map(c, p)?.rank() == c.c())
}

/// `X×Y -> Z×Z <- Z` with `(f, g)` on the left and the diagonal on the right.
pub fn diagonal_representation(c: &CospanPresentation) -> CospanPresentation {
    let (a, b, n) = (c.a(), c.b(), c.c());
    let mut left = c.left.shifted_components(0, a + b);
    left.extend(c.right.shifted_components(a, a + b));
    let mut right: Vec<Poly> = (0..n).map(|i| Poly::var(n, i)).collect();
    right.extend((0..n).map(|i| Poly::var(n, i)));
    CospanPresentation::new(
        PolynomialMap::new(a + b, left).expect("arity by construction"),
        PolynomialMap::new(n, right).expect("arity by construction"),
    )
    .expect("targets agree by construction")
}

/// The point `((x, y), f(x))` of the diagonal representation.
pub fn diagonal_point(c: &CospanPresentation, p: &RationalPoint) -> Result<RationalPoint> {
    let z = p.image(c)?;
    let mut xy = p.x.clone();
    xy.extend(p.y.iter().cloned());
    RationalPoint::on(&diagonal_representation(c), xy, z)
}

/// `X₁×X₂ -> Z₁×Z₂ <- Y₁×Y₂`.
pub fn product(c1: &CospanPresentation, c2: &CospanPresentation) -> CospanPresentation {
    let pair = |m1: &PolynomialMap, m2: &PolynomialMap| {
        let n = m1.source_dim() + m2.source_dim();
        let mut comps = m1.shifted_components(0, n);
        comps.extend(m2.shifted_components(m1.source_dim(), n));
        PolynomialMap::new(n, comps).expect("arity by construction")
    };
    CospanPresentation::new(pair(&c1.left, &c2.left), pair(&c1.right, &c2.right))
        .expect("targets agree by construction")
}

pub fn product_point(
    c1: &CospanPresentation,
    p1: &RationalPoint,
    c2: &CospanPresentation,
    p2: &RationalPoint,
) -> Result<RationalPoint> {
    let cat = |u: &[Q], v: &[Q]| u.iter().chain(v).cloned().collect::<Vec<Q>>();
    RationalPoint::on(&product(c1, c2), cat(&p1.x, &p2.x), cat(&p1.y, &p2.y))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qsmooth::linalg::q;

    #[test]
    fn jacobian_examples() {
        let sq = PolynomialMap::parse(1, &["x0^2"]).unwrap();
        assert_eq!(jacobian(&sq, &[q(0)]).unwrap(), Matrix::from_i64(&[vec![0]]));
        let id = PolynomialMap::identity(3);
        assert_eq!(jacobian(&id, &[q(5), q(-1), q(2)]).unwrap(), Matrix::identity(3));
        let f = PolynomialMap::parse(2, &["x0x1", "x0+x1"]).unwrap();
        assert_eq!(jacobian(&f, &[q(1), q(2)]).unwrap(), Matrix::from_i64(&[vec![2, 1], vec![1, 1]]));
        assert!(jacobian(&f, &[q(1)]).is_err());
    }

    #[test]
    fn tangent_complex_examples() {
        let axes = CospanPresentation::axes();
        let o = RationalPoint::origin(&axes).unwrap();
        let t = tangent_complex(&axes, &o).unwrap();
        assert_eq!(t.boundaries()[0].scale(&q(1)), Matrix::from_i64(&[vec![1, 0], vec![0, -1]]));
        assert_eq!(t.homology(), vec![(-1, 0), (0, 0)]);

        let lp = CospanPresentation::point_loop();
        let t = tangent_complex(&lp, &RationalPoint::empty_on(&lp).unwrap()).unwrap();
        assert_eq!(t.dims(), &[1, 0]);
        assert_eq!(t.homology(), vec![(-1, 1), (0, 0)]);

        let sq = CospanPresentation::square_against_point();
        let t = tangent_complex(&sq, &RationalPoint::origin(&sq).unwrap()).unwrap();
        assert!(t.boundaries()[0].is_zero());
        assert_eq!(t.homology(), vec![(-1, 1), (0, 1)]);
    }

    #[test]
    fn vdim_and_transversality() {
        assert_eq!(virtual_dimension(&CospanPresentation::square_against_point()), 0);
        assert_eq!(virtual_dimension(&CospanPresentation::point_loop()), -1);
        let axes = CospanPresentation::axes();
        assert!(is_transverse(&axes, &RationalPoint::origin(&axes).unwrap()).unwrap());
        let sq = CospanPresentation::square_against_point();
        assert!(!is_transverse(&sq, &RationalPoint::origin(&sq).unwrap()).unwrap());
        let parabola = CospanPresentation::new(
            PolynomialMap::parse(1, &["x0", "x0^2"]).unwrap(),
            PolynomialMap::parse(1, &["x0", "0"]).unwrap(),
        )
        .unwrap();
        // Tangent at the origin: (df | -dg) = [[1, -1], [0, 0]] has rank 1.
        let o = RationalPoint::origin(&parabola).unwrap();
        assert_eq!(tangent_map(&parabola, &o).unwrap().rank(), 1);
        assert!(!is_transverse(&parabola, &o).unwrap());
        let against_y_axis = CospanPresentation::new(
            PolynomialMap::parse(1, &["x0", "x0^2"]).unwrap(),
            PolynomialMap::parse(1, &["0", "x0"]).unwrap(),
        )
        .unwrap();
        assert!(is_transverse(&against_y_axis, &RationalPoint::origin(&against_y_axis).unwrap()).unwrap());
    }

    #[test]
    fn off_intersection_rejected() {
        let axes = CospanPresentation::axes();
        let err = RationalPoint::on(&axes, vec![q(1)], vec![q(0)]).unwrap_err();
        assert_eq!(err.kind(), "point_on_intersection");
    }

    #[test]
    fn diagonal_form_matches() {
        for c in [CospanPresentation::axes(), CospanPresentation::square_against_point()] {
            let p = RationalPoint::origin(&c).unwrap();
            let d = diagonal_representation(&c);
            let dp = diagonal_point(&c, &p).unwrap();
            assert_eq!(virtual_dimension(&d), virtual_dimension(&c));
            assert_eq!(is_transverse(&d, &dp).unwrap(), is_transverse(&c, &p).unwrap());
            assert_eq!(
                tangent_complex(&d, &dp).unwrap().homology().iter().map(|h| h.1).collect::<Vec<_>>(),
                tangent_complex(&c, &p).unwrap().homology().iter().map(|h| h.1).collect::<Vec<_>>()
            );
        }
    }

    #[test]
    fn products_add() {
        let c1 = CospanPresentation::axes();
        let c2 = CospanPresentation::square_against_point();
        let c = product(&c1, &c2);
        assert_eq!(virtual_dimension(&c), virtual_dimension(&c1) + virtual_dimension(&c2));
        let p1 = RationalPoint::origin(&c1).unwrap();
        let p2 = RationalPoint::origin(&c2).unwrap();
        let p = product_point(&c1, &p1, &c2, &p2).unwrap();
        let sum = tangent_complex(&c1, &p1).unwrap().direct_sum(&tangent_complex(&c2, &p2).unwrap()).unwrap();
        assert_eq!(tangent_complex(&c, &p).unwrap().homology(), sum.homology());
    }
}
