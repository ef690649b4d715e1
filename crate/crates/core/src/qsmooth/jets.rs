//! Order-`N` jets at a rational point, the simplicial vector spaces of jets
//! over a cosimplicial model, and their normalized homology.

use std::collections::HashMap;

use num_traits::Zero;

use super::cospan::{CospanPresentation, RationalPoint};
use super::linalg::{Matrix, Q};
use super::model::{hochschild_model, nerve_model, CosimplicialModel};
use super::poly::{Exponents, Poly};
use crate::{Error, Result};

/// Largest level dimension a jet complex may reach.
pub const MAX_LEVEL_DIM: usize = 4096;

/// Polynomials in `n` variables modulo monomials of degree above `N`.
#[derive(Clone, Debug)]
pub struct JetAlgebra {
    nvars: usize,
    order: u32,
    basis: Vec<Exponents>,
    index: HashMap<Exponents, usize>,
}

impl JetAlgebra {
    pub fn new(nvars: usize, order: u32) -> Self {
        let mut basis = Vec::new();
        for d in 0..=order {
            let mut cur = vec![0u32; nvars];
            monomials_of_degree(nvars, d, 0, &mut cur, &mut basis);
        }
        let index = basis.iter().enumerate().map(|(i, e)| (e.clone(), i)).collect();
        JetAlgebra {
            nvars,
            order,
            basis,
            index,
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Monomials by increasing degree, lexicographically decreasing inside a
    /// degree.
    pub fn basis(&self) -> &[Exponents] {
        &self.basis
    }

    pub fn index_of(&self, e: &[u32]) -> Option<usize> {
        self.index.get(e).copied()
    }

    /// Coefficient vector of a polynomial already written in the shifted
    /// coordinates; terms above the order are dropped.
    pub fn coordinates(&self, p: &Poly) -> Vec<Q> {
        let mut v = vec![Q::zero(); self.dim()];
        for (e, c) in p.terms() {
            if let Some(i) = self.index_of(e) {
                v[i] = c.clone();
            }
        }
        v
    }

    /// The jet at `base` of a polynomial in the original coordinates.
    pub fn jet_at(&self, p: &Poly, base: &[Q]) -> Result<Vec<Q>> {
        let shifted = shift(p, base)?;
        Ok(self.coordinates(&shifted.truncate(self.order)))
    }

    pub fn element(&self, v: &[Q]) -> Poly {
        let mut p = Poly::zero(self.nvars);
        for (e, c) in self.basis.iter().zip(v) {
            if !c.is_zero() {
                p = p.add(&Poly::monomial(e.clone(), c.clone()));
            }
        }
        p
    }

    /// Product in the truncated algebra.
    pub fn mul(&self, a: &[Q], b: &[Q]) -> Vec<Q> {
        let p = self.element(a).mul_truncated(&self.element(b), self.order);
        self.coordinates(&p)
    }
}

fn monomials_of_degree(n: usize, d: u32, at: usize, cur: &mut Vec<u32>, out: &mut Vec<Exponents>) {
    if at + 1 >= n {
        if n == 0 {
            if d == 0 {
                out.push(vec![]);
            }
            return;
        }
        cur[at] = d;
        out.push(cur.clone());
        cur[at] = 0;
        return;
    }
    for k in (0..=d).rev() {
        cur[at] = k;
        monomials_of_degree(n, d - k, at + 1, cur, out);
    }
    cur[at] = 0;
}

/// `p(base + u)` as a polynomial in `u`.
fn shift(p: &Poly, base: &[Q]) -> Result<Poly> {
    let n = p.nvars();
    if base.len() != n {
        return Err(Error::DimensionMismatch {
            what: "jet base point",
            expected: n,
            got: base.len(),
        });
    }
    let images: Vec<Poly> = (0..n).map(|i| Poly::var(n, i).add(&Poly::constant(n, base[i].clone()))).collect();
    if n == 0 {
        return Ok(p.clone());
    }
    p.substitute(&images)
}

/// Matrix of the algebra map `F ↦ F ∘ φ` from jets at `target_base` (in
/// `target`'s variables) to jets at `source_base`, where `images` gives
/// `φ` on the target variables as polynomials in the source variables.
fn substitution_matrix(
    source: &JetAlgebra,
    target: &JetAlgebra,
    images: &[Poly],
    source_base: &[Q],
    target_base: &[Q],
) -> Result<Matrix> {
    let order = source.order;
    let mut shifted = Vec::with_capacity(images.len());
    for (v, img) in images.iter().enumerate() {
        let s = shift(img, source_base)?.sub(&Poly::constant(source.nvars, target_base[v].clone()));
        if !s.coefficient(&vec![0; source.nvars]).is_zero() {
            return Err(Error::invariant(
                "jet_base_point_preserved",
                format!("structure map moves coordinate {v} of the base point"),
            ));
        }
        shifted.push(s.truncate(order));
    }
    let mut m = Matrix::zeros(source.dim(), target.dim());
    let mut images_of: HashMap<&Exponents, Poly> = HashMap::new();
    for (col, e) in target.basis.iter().enumerate() {
        let img = match e.iter().position(|&x| x > 0) {
            None => Poly::one(source.nvars),
            Some(j) => {
                let mut prev = e.clone();
                prev[j] -= 1;
                let base = &images_of[&target.basis[target.index[&prev]]];
                base.mul_truncated(&shifted[j], order)
            }
        };
        for (row, c) in source.coordinates(&img).into_iter().enumerate() {
            if !c.is_zero() {
                m.set(row, col, c);
            }
        }
        images_of.insert(e, img);
    }
    Ok(m)
}

/// Levels `0..=L` of finite-dimensional spaces with face and degeneracy
/// matrices; `faces[k][i]` maps level `k` to `k-1`, `degeneracies[k][j]`
/// maps level `k` to `k+1`.
#[derive(Clone, Debug)]
pub struct SimplicialVectorSpace {
    dims: Vec<usize>,
    faces: Vec<Vec<Matrix>>,
    degeneracies: Vec<Vec<Matrix>>,
}

impl SimplicialVectorSpace {
    pub fn new(dims: Vec<usize>, faces: Vec<Vec<Matrix>>, degeneracies: Vec<Vec<Matrix>>) -> Result<Self> {
        let top = dims.len().checked_sub(1).ok_or_else(|| Error::Precondition("no levels".into()))?;
        let shape_ok = faces.len() == top + 1
            && degeneracies.len() == top
            && faces[0].is_empty()
            && (1..=top).all(|k| {
                faces[k].len() == k + 1 && faces[k].iter().all(|d| d.rows() == dims[k - 1] && d.cols() == dims[k])
            })
            && (0..top).all(|k| {
                degeneracies[k].len() == k + 1
                    && degeneracies[k].iter().all(|s| s.rows() == dims[k + 1] && s.cols() == dims[k])
            });
        if !shape_ok {
            return Err(Error::invariant("simplicial_operator_shape", "operator counts or sizes are wrong"));
        }
        let out = SimplicialVectorSpace {
            dims,
            faces,
            degeneracies,
        };
        if let (_, Some(fail)) = out.identity_report() {
            return Err(Error::invariant("simplicial_identities", fail));
        }
        Ok(out)
    }

    pub fn top(&self) -> usize {
        self.dims.len() - 1
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn face(&self, k: usize, i: usize) -> &Matrix {
        &self.faces[k][i]
    }

    pub fn degeneracy(&self, k: usize, j: usize) -> &Matrix {
        &self.degeneracies[k][j]
    }

    /// Every simplicial identity as a matrix equation; returns the number
    /// checked and the first failure.
    pub fn identity_report(&self) -> (usize, Option<String>) {
        let top = self.top();
        let mut checked = 0;
        for k in 2..=top {
            for j in 1..=k {
                for i in 0..j {
                    checked += 1;
                    let lhs = self.faces[k - 1][i].mul(&self.faces[k][j]);
                    let rhs = self.faces[k - 1][j - 1].mul(&self.faces[k][i]);
                    if lhs != rhs {
                        return (checked, Some(format!("d{i} d{j} = d{} d{i} at level {k}", j - 1)));
                    }
                }
            }
        }
        for k in 0..top.saturating_sub(1) {
            for j in 0..=k {
                for i in 0..=j {
                    checked += 1;
                    let lhs = self.degeneracies[k + 1][i].mul(&self.degeneracies[k][j]);
                    let rhs = self.degeneracies[k + 1][j + 1].mul(&self.degeneracies[k][i]);
                    if lhs != rhs {
                        return (checked, Some(format!("s{i} s{j} = s{} s{i} at level {k}", j + 1)));
                    }
                }
            }
        }
        for k in 0..top {
            for j in 0..=k {
                for i in 0..=k + 1 {
                    checked += 1;
                    let lhs = self.faces[k + 1][i].mul(&self.degeneracies[k][j]);
                    let rhs = if i == j || i == j + 1 {
                        Matrix::identity(self.dims[k])
                    } else if i < j {
                        self.degeneracies[k - 1][j - 1].mul(&self.faces[k][i])
                    } else {
                        self.degeneracies[k - 1][j].mul(&self.faces[k][i - 1])
                    };
                    if lhs != rhs {
                        return (checked, Some(format!("d{i} s{j} at level {k}")));
                    }
                }
            }
        }
        (checked, None)
    }

    /// The faces `d_1..d_k` stacked, whose kernel is the normalized piece.
    fn interior_stack(&self, k: usize) -> Matrix {
        let blocks: Vec<&Matrix> = self.faces[k][1..].iter().collect();
        Matrix::vstack_all(&blocks, self.dims[k])
    }

    /// `dim N_k` where `N_k = ⋂_{i≥1} ker d_i`.
    pub fn normalized_dim(&self, k: usize) -> usize {
        if k == 0 {
            self.dims[0]
        } else {
            self.dims[k] - self.interior_stack(k).rank()
        }
    }

    /// Rank of `d_0: N_k -> N_{k-1}`.
    pub fn normalized_boundary_rank(&self, k: usize) -> usize {
        if k == 0 {
            return 0;
        }
        let d = self.interior_stack(k);
        d.vstack(&self.faces[k][0]).rank() - d.rank()
    }

    /// A basis of `N_k` as vectors in level `k`.
    pub fn normalized_basis(&self, k: usize) -> Vec<Vec<Q>> {
        if k == 0 {
            return Matrix::identity(self.dims[0]).to_rows();
        }
        self.interior_stack(k).kernel()
    }

    /// Image of `d_0: N_k -> level k-1`, as a matrix whose columns span it.
    pub fn normalized_image(&self, k: usize) -> Matrix {
        let basis = self.normalized_basis(k);
        let images: Vec<Vec<Q>> = basis.iter().map(|v| self.faces[k][0].mul_vec(v)).collect();
        Matrix::from_columns(self.dims[k - 1], &images)
    }

    /// `β_0..β_{L-1}` of the normalized complex.
    pub fn betti(&self) -> Vec<usize> {
        let top = self.top();
        let ranks: Vec<usize> = (0..=top).map(|k| self.normalized_boundary_rank(k)).collect();
        (0..top)
            .map(|k| self.normalized_dim(k) - ranks[k] - ranks[k + 1])
            .collect()
    }

    /// `Σ (-1)^i d_i` from level `k` to `k-1`.
    pub fn alternating_boundary(&self, k: usize) -> Matrix {
        let mut out = Matrix::zeros(self.dims[k - 1], self.dims[k]);
        for (i, d) in self.faces[k].iter().enumerate() {
            out = if i % 2 == 0 { out.add(d) } else { out.add(&d.scale(&-Q::from_integer(1.into()))) };
        }
        out
    }

    /// `β_0..β_{L-1}` of the unnormalized complex; equal to [`Self::betti`].
    pub fn unnormalized_betti(&self) -> Vec<usize> {
        let top = self.top();
        let ranks: Vec<usize> =
            (0..=top).map(|k| if k == 0 { 0 } else { self.alternating_boundary(k).rank() }).collect();
        (0..top).map(|k| self.dims[k] - ranks[k] - ranks[k + 1]).collect()
    }
}

/// Jets of order `order` at the base point, tensored with `ℚ^m`, over every
/// level of the model.
pub fn jet_complex(model: &CosimplicialModel, p: &RationalPoint, order: u32, m: usize) -> Result<SimplicialVectorSpace> {
    p.check(model.cospan())?;
    if order < 1 {
        return Err(Error::Precondition("jet order must be at least 1".into()));
    }
    if m < 1 {
        return Err(Error::Precondition("target dimension must be at least 1".into()));
    }
    let top = model.top();
    let algebras: Vec<JetAlgebra> = (0..=top).map(|k| JetAlgebra::new(model.nvars(k), order)).collect();
    for a in &algebras {
        if a.dim() * m > MAX_LEVEL_DIM {
            return Err(Error::BoundExceeded {
                what: "jet level dimension",
                value: a.dim() * m,
                limit: MAX_LEVEL_DIM,
            });
        }
    }
    let bases: Vec<Vec<Q>> = (0..=top).map(|k| model.base_point(k, p.x(), p.y())).collect::<Result<_>>()?;
    let mut faces = vec![vec![]];
    for k in 1..=top {
        let level = (0..=k)
            .map(|i| {
                let images = model.face_images(k, i)?;
                let mat = substitution_matrix(&algebras[k - 1], &algebras[k], &images, &bases[k - 1], &bases[k])?;
                Ok(mat.kron_identity(m))
            })
            .collect::<Result<Vec<_>>>()?;
        faces.push(level);
    }
    let mut degeneracies = Vec::new();
    for k in 0..top {
        let level = (0..=k)
            .map(|j| {
                let images = model.degeneracy_images(k, j)?;
                let mat = substitution_matrix(&algebras[k + 1], &algebras[k], &images, &bases[k + 1], &bases[k])?;
                Ok(mat.kron_identity(m))
            })
            .collect::<Result<Vec<_>>>()?;
        degeneracies.push(level);
    }
    let dims = algebras.iter().map(|a| a.dim() * m).collect();
    SimplicialVectorSpace::new(dims, faces, degeneracies)
}

fn check_levels(levels: usize) -> Result<()> {
    if levels < 2 {
        return Err(Error::Precondition("at least two levels are needed".into()));
    }
    Ok(())
}

/// Jets over the Hochschild model, levels `0..=levels`.
pub fn jet_mapping_complex(
    c: &CospanPresentation,
    p: &RationalPoint,
    order: u32,
    levels: usize,
    m: usize,
) -> Result<SimplicialVectorSpace> {
    check_levels(levels)?;
    jet_complex(&hochschild_model(c, levels), p, order, m)
}

/// `β_0..β_{levels-1}` of the jet model of the mapping space.
pub fn mapping_space_betti(
    c: &CospanPresentation,
    p: &RationalPoint,
    order: u32,
    levels: usize,
    m: usize,
) -> Result<Vec<usize>> {
    Ok(jet_mapping_complex(c, p, order, levels, m)?.betti())
}

/// The same computation over the nerve model.
pub fn nerve_cosimplicial_betti(
    c: &CospanPresentation,
    p: &RationalPoint,
    order: u32,
    levels: usize,
    m: usize,
) -> Result<Vec<usize>> {
    check_levels(levels)?;
    Ok(jet_complex(&nerve_model(c, levels), p, order, m)?.betti())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qsmooth::linalg::q;

    fn binomial(n: usize, k: usize) -> usize {
        (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
    }

    #[test]
    fn jet_algebra_basis() {
        for n in 0..4 {
            for d in 0..5 {
                let a = JetAlgebra::new(n, d);
                assert_eq!(a.dim(), binomial(n + d as usize, d as usize));
            }
        }
        let a = JetAlgebra::new(1, 2);
        let x = a.coordinates(&Poly::var(1, 0));
        assert_eq!(a.mul(&x, &a.mul(&x, &x)), vec![q(0); 3]);
    }

    #[test]
    fn jets_shift_to_base() {
        let a = JetAlgebra::new(1, 2);
        let p = Poly::parse("x0^3", 1).unwrap();
        // (1+u)^3 = 1 + 3u + 3u^2 + u^3.
        assert_eq!(a.jet_at(&p, &[q(1)]).unwrap(), vec![q(1), q(3), q(3)]);
    }

    #[test]
    fn point_loop_dimensions() {
        let c = CospanPresentation::point_loop();
        let p = RationalPoint::empty_on(&c).unwrap();
        let s = jet_mapping_complex(&c, &p, 2, 3, 1).unwrap();
        assert_eq!(s.dims(), &[1, 3, 6, 10]);
        let s = jet_mapping_complex(&c, &p, 2, 3, 2).unwrap();
        assert_eq!(s.dims(), &[2, 6, 12, 20]);
    }

    #[test]
    fn point_loop_betti() {
        let c = CospanPresentation::point_loop();
        let p = RationalPoint::empty_on(&c).unwrap();
        for m in 1..=2 {
            let s = jet_mapping_complex(&c, &p, 3, 3, m).unwrap();
            let b = s.betti();
            assert_eq!(&b[..2], &[m, m]);
            assert_eq!(b, s.unnormalized_betti());
        }
    }

    #[test]
    fn linear_part_characterization() {
        let c = CospanPresentation::point_loop();
        let p = RationalPoint::empty_on(&c).unwrap();
        let order = 4;
        let s = jet_mapping_complex(&c, &p, order, 3, 1).unwrap();
        let image = s.normalized_image(2);
        let full = s.alternating_boundary(2);
        let a = JetAlgebra::new(1, order);
        for e in a.basis() {
            let v = a.coordinates(&Poly::monomial(e.clone(), q(1)));
            let linear = e[0] == 1;
            assert_eq!(full.in_column_space(&v), !linear, "unnormalized, degree {}", e[0]);
            if e[0] > 0 {
                assert_eq!(image.in_column_space(&v), !linear, "normalized, degree {}", e[0]);
            }
        }
    }

    #[test]
    fn axes_have_no_loops() {
        let c = CospanPresentation::axes();
        let p = RationalPoint::origin(&c).unwrap();
        let b = mapping_space_betti(&c, &p, 2, 2, 1).unwrap();
        assert_eq!(b[1], 0);
    }

    #[test]
    fn nerve_agrees_on_point_loop() {
        let c = CospanPresentation::point_loop();
        let p = RationalPoint::empty_on(&c).unwrap();
        let n = nerve_cosimplicial_betti(&c, &p, 2, 2, 1).unwrap();
        let h = mapping_space_betti(&c, &p, 2, 2, 1).unwrap();
        assert_eq!(&n[..2], &h[..2]);
    }

    #[test]
    fn guards() {
        let c = CospanPresentation::point_loop();
        let p = RationalPoint::empty_on(&c).unwrap();
        assert!(mapping_space_betti(&c, &p, 0, 3, 1).is_err());
        assert!(mapping_space_betti(&c, &p, 2, 1, 1).is_err());
        assert!(mapping_space_betti(&c, &p, 40, 3, 1).is_err());
    }
}
