//! Truncated simplicial sets, hypercovers of finite spaces, and the passage
//! between atlases and hypercovers.
//!
//! A level-`n` simplex of the shape `ι*I` of a poset `I` is an antitone map
//! from the nonempty subsets of `{0..n}` into `I`: enlarging a subset moves
//! to a smaller index. Its label under a diagram `U` is `U` evaluated at the
//! value on the full subset. Faces and degeneracies act by precomposition
//! with the direct image of the coface and codegeneracy maps.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, OnceLock};

use fixedbitset::FixedBitSet;
use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use sha2::{Digest, Sha256};

use crate::atlas::AtlasDiagram;
use crate::error::{Error, Result};
use crate::lattice::{FinitePoset, FiniteSpace, PointSet};
use crate::sheaf::{GluingProblem, Presheaf};

pub const DEFAULT_TRUNCATION: usize = 3;

/// Limits applied when building `ι*I`.
#[derive(Clone, Copy, Debug)]
pub struct ShapeBounds {
    pub max_truncation: usize,
    pub max_simplices: usize,
}

impl Default for ShapeBounds {
    fn default() -> Self {
        ShapeBounds {
            max_truncation: DEFAULT_TRUNCATION,
            max_simplices: 1 << 20,
        }
    }
}

/// Levels `0..=N` with face maps `d_i` and degeneracies `s_j`.
///
/// `faces[n][i][σ]` is `d_i σ` for a level-`n` simplex, `n >= 1`;
/// `degeneracies[n][j][σ]` is `s_j σ` for `n < N`.
pub struct TruncatedSimplicialSet {
    sizes: Vec<usize>,
    faces: Vec<Vec<Vec<usize>>>,
    degeneracies: Vec<Vec<Vec<usize>>>,
    ids: Vec<Vec<String>>,
    spheres: Vec<OnceLock<Vec<SphereEntry>>>,
}

impl fmt::Debug for TruncatedSimplicialSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TruncatedSimplicialSet")
            .field("sizes", &self.sizes)
            .finish()
    }
}

/// Outcome of an exhaustive simplicial-identity check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdentityReport {
    pub checked: usize,
    pub failure: Option<String>,
}

/// A compatible tuple of facets `(τ_0, …, τ_{n+1})` at level `n`:
/// `d_i τ_j = d_{j-1} τ_i` for `i < j`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BoundarySphere {
    pub dim: usize,
    pub facets: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct SphereEntry {
    pub sphere: BoundarySphere,
    pub fillings: Vec<usize>,
}

impl TruncatedSimplicialSet {
    /// Simplex ids default to `"n:k"`.
    pub fn new(
        sizes: Vec<usize>,
        faces: Vec<Vec<Vec<usize>>>,
        degeneracies: Vec<Vec<Vec<usize>>>,
    ) -> Result<Self> {
        let ids = sizes
            .iter()
            .enumerate()
            .map(|(n, &k)| (0..k).map(|s| format!("{n}:{s}")).collect())
            .collect();
        Self::with_ids(sizes, faces, degeneracies, ids)
    }

    pub fn with_ids(
        sizes: Vec<usize>,
        faces: Vec<Vec<Vec<usize>>>,
        degeneracies: Vec<Vec<Vec<usize>>>,
        ids: Vec<Vec<String>>,
    ) -> Result<Self> {
        let set = Self::unchecked(sizes, faces, degeneracies, ids)?;
        if let Some(why) = set.identity_report().failure {
            return Err(Error::invariant("simplicial_identities", why));
        }
        Ok(set)
    }

    fn unchecked(
        sizes: Vec<usize>,
        faces: Vec<Vec<Vec<usize>>>,
        degeneracies: Vec<Vec<Vec<usize>>>,
        ids: Vec<Vec<String>>,
    ) -> Result<Self> {
        if sizes.is_empty() {
            return Err(Error::invariant("simplicial_levels", "no levels"));
        }
        let top = sizes.len() - 1;
        let shape_err = |what: String| Err(Error::invariant("simplicial_operator_shape", what));
        if faces.len() != top + 1 || !faces[0].is_empty() {
            return shape_err("face table must have one entry per level, empty at level 0".into());
        }
        for n in 1..=top {
            if faces[n].len() != n + 1 {
                return shape_err(format!("level {n} needs {} face maps", n + 1));
            }
            for (i, d) in faces[n].iter().enumerate() {
                if d.len() != sizes[n] || d.iter().any(|&t| t >= sizes[n - 1]) {
                    return shape_err(format!("face d_{i} on level {n} is not a map of levels"));
                }
            }
        }
        if degeneracies.len() != top {
            return shape_err(format!("degeneracy table needs {top} levels"));
        }
        for n in 0..top {
            if degeneracies[n].len() != n + 1 {
                return shape_err(format!("level {n} needs {} degeneracies", n + 1));
            }
            for (j, s) in degeneracies[n].iter().enumerate() {
                if s.len() != sizes[n] || s.iter().any(|&t| t >= sizes[n + 1]) {
                    return shape_err(format!("degeneracy s_{j} on level {n} is not a map of levels"));
                }
            }
        }
        if ids.len() != sizes.len() || ids.iter().zip(&sizes).any(|(v, &k)| v.len() != k) {
            return shape_err("one id per simplex".into());
        }
        let spheres = (0..=top).map(|_| OnceLock::new()).collect();
        Ok(TruncatedSimplicialSet {
            sizes,
            faces,
            degeneracies,
            ids,
            spheres,
        })
    }

    pub fn truncation(&self) -> usize {
        self.sizes.len() - 1
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn level_size(&self, n: usize) -> usize {
        self.sizes[n]
    }

    pub fn total_size(&self) -> usize {
        self.sizes.iter().sum()
    }

    /// `d_i` applied to a level-`n` simplex.
    pub fn face(&self, n: usize, i: usize, s: usize) -> usize {
        self.faces[n][i][s]
    }

    /// `s_j` applied to a level-`n` simplex.
    pub fn degeneracy(&self, n: usize, j: usize, s: usize) -> usize {
        self.degeneracies[n][j][s]
    }

    pub fn id(&self, n: usize, s: usize) -> &str {
        &self.ids[n][s]
    }

    pub fn ids(&self) -> &[Vec<String>] {
        &self.ids
    }

    pub fn find_id(&self, id: &str) -> Option<(usize, usize)> {
        self.ids
            .iter()
            .enumerate()
            .find_map(|(n, v)| v.iter().position(|x| x == id).map(|s| (n, s)))
    }

    /// Checks every simplicial identity expressible within the truncation.
    pub fn identity_report(&self) -> IdentityReport {
        let top = self.truncation();
        let mut checked = 0;
        let fail = |what: String, checked| IdentityReport {
            checked,
            failure: Some(what),
        };
        for n in 2..=top {
            for j in 1..=n {
                for i in 0..j {
                    for s in 0..self.sizes[n] {
                        checked += 1;
                        let l = self.face(n - 1, i, self.face(n, j, s));
                        let r = self.face(n - 1, j - 1, self.face(n, i, s));
                        if l != r {
                            return fail(format!("d_{i} d_{j} != d_{} d_{i} on {}", j - 1, self.ids[n][s]), checked);
                        }
                    }
                }
            }
        }
        for n in 0..top {
            for j in 0..=n {
                for i in 0..=n + 1 {
                    for s in 0..self.sizes[n] {
                        checked += 1;
                        let l = self.face(n + 1, i, self.degeneracy(n, j, s));
                        let r = if i < j {
                            self.degeneracy(n - 1, j - 1, self.face(n, i, s))
                        } else if i == j || i == j + 1 {
                            s
                        } else {
                            self.degeneracy(n - 1, j, self.face(n, i - 1, s))
                        };
                        if l != r {
                            return fail(format!("d_{i} s_{j} relation fails on {}", self.ids[n][s]), checked);
                        }
                    }
                }
            }
        }
        for n in 0..top.saturating_sub(1) {
            for j in 0..=n {
                for i in 0..=j {
                    for s in 0..self.sizes[n] {
                        checked += 1;
                        let l = self.degeneracy(n + 1, i, self.degeneracy(n, j, s));
                        let r = self.degeneracy(n + 1, j + 1, self.degeneracy(n, i, s));
                        if l != r {
                            return fail(format!("s_{i} s_{j} != s_{} s_{i} on {}", j + 1, self.ids[n][s]), checked);
                        }
                    }
                }
            }
        }
        IdentityReport {
            checked,
            failure: None,
        }
    }

    fn facet_tuple(&self, n: usize, s: usize) -> Vec<usize> {
        (0..=n).map(|i| self.face(n, i, s)).collect()
    }

    /// All boundary spheres of dimension `dim` (facets at level `dim - 1`)
    /// with their fillings, computed once and cached.
    pub fn sphere_table(&self, dim: usize) -> Result<&[SphereEntry]> {
        if dim == 0 || dim > self.truncation() {
            return Err(Error::BoundExceeded {
                what: "sphere dimension",
                value: dim,
                limit: self.truncation(),
            });
        }
        Ok(self.spheres[dim].get_or_init(|| self.build_spheres(dim)))
    }

    fn build_spheres(&self, dim: usize) -> Vec<SphereEntry> {
        let n = dim - 1;
        let mut by_boundary: HashMap<Vec<usize>, Vec<usize>> = HashMap::new();
        for s in 0..self.sizes[dim] {
            by_boundary.entry(self.facet_tuple(dim, s)).or_default().push(s);
        }
        let mut out = Vec::new();
        let mut emit = |facets: Vec<usize>| {
            let fillings = by_boundary.get(&facets).cloned().unwrap_or_default();
            out.push(SphereEntry {
                sphere: BoundarySphere { dim, facets },
                fillings,
            });
        };
        if n == 0 {
            for a in 0..self.sizes[0] {
                for b in 0..self.sizes[0] {
                    emit(vec![a, b]);
                }
            }
            return out;
        }
        let mut by_face0: HashMap<usize, Vec<usize>> = HashMap::new();
        for s in 0..self.sizes[n] {
            by_face0.entry(self.face(n, 0, s)).or_default().push(s);
        }
        let mut tuple = Vec::with_capacity(dim + 1);
        for t0 in 0..self.sizes[n] {
            tuple.clear();
            tuple.push(t0);
            self.extend_sphere(n, &by_face0, &mut tuple, &mut emit);
        }
        out
    }

    fn extend_sphere(
        &self,
        n: usize,
        by_face0: &HashMap<usize, Vec<usize>>,
        tuple: &mut Vec<usize>,
        emit: &mut impl FnMut(Vec<usize>),
    ) {
        let j = tuple.len();
        if j == n + 2 {
            emit(tuple.clone());
            return;
        }
        let key = self.face(n, j - 1, tuple[0]);
        let Some(candidates) = by_face0.get(&key) else {
            return;
        };
        for &t in candidates {
            let ok = (1..j).all(|i| self.face(n, i, t) == self.face(n, j - 1, tuple[i]));
            if ok {
                tuple.push(t);
                self.extend_sphere(n, by_face0, tuple, emit);
                tuple.pop();
            }
        }
    }

    /// Whether the facets form a boundary sphere.
    pub fn is_sphere(&self, sphere: &BoundarySphere) -> bool {
        let n = match sphere.dim.checked_sub(1) {
            Some(n) if sphere.dim <= self.truncation() => n,
            _ => return false,
        };
        if sphere.facets.len() != n + 2 || sphere.facets.iter().any(|&t| t >= self.sizes[n]) {
            return false;
        }
        if n == 0 {
            return true;
        }
        let f = &sphere.facets;
        (0..f.len()).all(|j| (0..j).all(|i| self.face(n, i, f[j]) == self.face(n, j - 1, f[i])))
    }

    /// Top simplices whose boundary is the given sphere.
    pub fn fillings(&self, sphere: &BoundarySphere) -> Result<Vec<usize>> {
        if !self.is_sphere(sphere) {
            return Err(Error::Precondition("facets do not form a boundary sphere".into()));
        }
        let dim = sphere.dim;
        Ok((0..self.sizes[dim])
            .filter(|&s| self.facet_tuple(dim, s) == sphere.facets)
            .collect())
    }
}

/// `ι*I` truncated at level `N`, remembering each simplex as a map on subsets.
#[derive(Debug)]
pub struct IotaShape {
    poset: FinitePoset,
    /// `simplices[n][σ][S - 1]` is the value on the subset with bitmask `S`.
    simplices: Vec<Vec<Vec<u8>>>,
    set: Arc<TruncatedSimplicialSet>,
}

/// Builds `ι*I` up to level `N` within the default bounds.
pub fn iota_test(index: &FinitePoset, truncation: usize) -> Result<IotaShape> {
    iota_test_with(index, truncation, ShapeBounds::default())
}

pub fn iota_test_with(index: &FinitePoset, truncation: usize, bounds: ShapeBounds) -> Result<IotaShape> {
    if truncation > bounds.max_truncation {
        return Err(Error::BoundExceeded {
            what: "truncation",
            value: truncation,
            limit: bounds.max_truncation,
        });
    }
    if index.len() > u8::MAX as usize {
        return Err(Error::BoundExceeded {
            what: "index size",
            value: index.len(),
            limit: u8::MAX as usize,
        });
    }
    let mut simplices = Vec::with_capacity(truncation + 1);
    let mut total = 0;
    for n in 0..=truncation {
        let level = antitone_maps(index, n, bounds.max_simplices.saturating_sub(total))?;
        total += level.len();
        simplices.push(level);
    }
    let lookup: Vec<HashMap<&[u8], usize>> = simplices
        .iter()
        .map(|lvl| lvl.iter().enumerate().map(|(k, t)| (t.as_slice(), k)).collect())
        .collect();
    let mut faces = vec![Vec::new()];
    for n in 1..=truncation {
        let maps = (0..=n)
            .map(|i| {
                simplices[n]
                    .iter()
                    .map(|theta| {
                        let image: Vec<u8> = (1..(1u32 << n)).map(|s| theta[coface(s, i) as usize - 1]).collect();
                        lookup[n - 1][image.as_slice()]
                    })
                    .collect()
            })
            .collect();
        faces.push(maps);
    }
    let mut degeneracies = Vec::new();
    for n in 0..truncation {
        let maps = (0..=n)
            .map(|j| {
                simplices[n]
                    .iter()
                    .map(|theta| {
                        let image: Vec<u8> = (1..(1u32 << (n + 2)))
                            .map(|s| theta[codegeneracy(s, j) as usize - 1])
                            .collect();
                        lookup[n + 1][image.as_slice()]
                    })
                    .collect()
            })
            .collect();
        degeneracies.push(maps);
    }
    let ids = simplices
        .iter()
        .enumerate()
        .map(|(n, lvl)| lvl.iter().map(|t| simplex_id(index, n, t)).collect())
        .collect();
    let set = TruncatedSimplicialSet::with_ids(
        simplices.iter().map(Vec::len).collect(),
        faces,
        degeneracies,
        ids,
    )?;
    Ok(IotaShape {
        poset: index.clone(),
        simplices,
        set: Arc::new(set),
    })
}

/// Direct image of a subset of `{0..n-1}` under the coface skipping `i`.
fn coface(s: u32, i: usize) -> u32 {
    let low = s & ((1 << i) - 1);
    let high = (s >> i) << (i + 1);
    low | high
}

/// Direct image of a subset of `{0..n+1}` under the codegeneracy hitting `j` twice.
fn codegeneracy(s: u32, j: usize) -> u32 {
    let low = s & ((1 << (j + 1)) - 1);
    let high = s >> (j + 1);
    low | (high << j)
}

fn simplex_id(index: &FinitePoset, n: usize, theta: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(n.to_le_bytes());
    for &t in theta {
        h.update(index.label(t as usize).as_bytes());
        h.update([0]);
    }
    let digest = h.finalize();
    let hex: String = digest.iter().take(6).map(|b| format!("{b:02x}")).collect();
    format!("{n}-{hex}")
}

/// Antitone maps from the nonempty subsets of `{0..n}` to `I`, sorted.
fn antitone_maps(index: &FinitePoset, n: usize, limit: usize) -> Result<Vec<Vec<u8>>> {
    let width = n + 1;
    let count = (1usize << width) - 1;
    let mut order: Vec<u32> = (1..=count as u32).collect();
    order.sort_by_key(|s| std::cmp::Reverse(s.count_ones()));
    let mut out = Vec::new();
    let mut theta = vec![0u8; count];
    fn go(
        index: &FinitePoset,
        order: &[u32],
        width: usize,
        pos: usize,
        theta: &mut Vec<u8>,
        out: &mut Vec<Vec<u8>>,
        limit: usize,
    ) -> Result<()> {
        if pos == order.len() {
            if out.len() >= limit {
                return Err(Error::BoundExceeded {
                    what: "simplex count",
                    value: out.len() + 1,
                    limit,
                });
            }
            out.push(theta.clone());
            return Ok(());
        }
        let s = order[pos];
        'cand: for x in 0..index.len() {
            for b in 0..width {
                let sup = s | (1 << b);
                if sup != s && !index.leq(theta[sup as usize - 1] as usize, x) {
                    continue 'cand;
                }
            }
            theta[s as usize - 1] = x as u8;
            go(index, order, width, pos + 1, theta, out, limit)?;
        }
        Ok(())
    }
    go(index, &order, width, 0, &mut theta, &mut out, limit)?;
    out.sort();
    Ok(out)
}

impl IotaShape {
    pub fn poset(&self) -> &FinitePoset {
        &self.poset
    }

    pub fn set(&self) -> &Arc<TruncatedSimplicialSet> {
        &self.set
    }

    pub fn truncation(&self) -> usize {
        self.set.truncation()
    }

    /// The map on subsets underlying a simplex, indexed by bitmask minus one.
    pub fn simplex(&self, n: usize, s: usize) -> &[u8] {
        &self.simplices[n][s]
    }

    /// Value on the full subset.
    pub fn final_value(&self, n: usize, s: usize) -> usize {
        *self.simplices[n][s].last().expect("nonempty") as usize
    }

    /// The level-`n` simplex given by a map on subsets, if it exists.
    pub fn lookup(&self, n: usize, theta: &[u8]) -> Option<usize> {
        self.simplices.get(n)?.binary_search_by(|t| t.as_slice().cmp(theta)).ok()
    }

    /// Labels `σ ↦ U(σ(full))` for a diagram over this shape's poset.
    pub fn labels_for(&self, assignment: &[PointSet]) -> Vec<Vec<PointSet>> {
        (0..=self.truncation())
            .map(|n| {
                (0..self.set.level_size(n))
                    .map(|s| assignment[self.final_value(n, s)])
                    .collect()
            })
            .collect()
    }

    /// The values of a sphere's facets on every proper nonempty subset of
    /// `{0..dim}`, indexed by bitmask minus one (the full mask is absent).
    pub fn sphere_data(&self, sphere: &BoundarySphere) -> Vec<u8> {
        let dim = sphere.dim;
        let n = dim - 1;
        let full = (1u32 << (dim + 1)) - 1;
        (1..full)
            .map(|s| {
                let j = (0..=dim).find(|&j| s & (1 << j) == 0).expect("proper subset");
                let theta = self.simplex(n, sphere.facets[j]);
                // subset of the j-th facet, renumbered by skipping j
                let low = s & ((1 << j) - 1);
                let high = s >> (j + 1);
                let t = low | (high << j);
                theta[t as usize - 1]
            })
            .collect()
    }
}

/// A truncated simplicial set labelled by opens, functorial in the sense that
/// `U_σ ⊆ U_{d_i σ}` and `U_σ ⊆ U_{s_j σ}`.
#[derive(Clone, Debug)]
pub struct IndexedHypercover {
    shape: Arc<TruncatedSimplicialSet>,
    space: FiniteSpace,
    labels: Vec<Vec<PointSet>>,
}

/// Why a labelled shape fails the hypercover condition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum HypercoverFailure {
    NotCovering { missing: PointSet },
    Sphere {
        sphere: BoundarySphere,
        missing: PointSet,
    },
}

impl IndexedHypercover {
    pub fn new(shape: Arc<TruncatedSimplicialSet>, space: FiniteSpace, labels: Vec<Vec<PointSet>>) -> Result<Self> {
        if labels.len() != shape.sizes.len() {
            return Err(Error::DimensionMismatch {
                what: "hypercover levels",
                expected: shape.sizes.len(),
                got: labels.len(),
            });
        }
        for (n, lvl) in labels.iter().enumerate() {
            if lvl.len() != shape.sizes[n] {
                return Err(Error::DimensionMismatch {
                    what: "hypercover labels",
                    expected: shape.sizes[n],
                    got: lvl.len(),
                });
            }
            if let Some(s) = lvl.iter().position(|&u| !space.is_open(u)) {
                return Err(Error::invariant(
                    "hypercover_labels_open",
                    format!("label of {} is not open", shape.id(n, s)),
                ));
            }
        }
        let h = IndexedHypercover {
            shape,
            space,
            labels,
        };
        if let Some(why) = h.functoriality_failure() {
            return Err(Error::invariant("hypercover_labels_functorial", why));
        }
        Ok(h)
    }

    fn functoriality_failure(&self) -> Option<String> {
        let sh = &self.shape;
        for n in 0..=sh.truncation() {
            for s in 0..sh.sizes[n] {
                let u = self.labels[n][s];
                if n > 0 {
                    for i in 0..=n {
                        if !u.is_subset(self.labels[n - 1][sh.face(n, i, s)]) {
                            return Some(format!("U of {} is not inside U of its face d_{i}", sh.id(n, s)));
                        }
                    }
                }
                if n < sh.truncation() {
                    for j in 0..=n {
                        if !u.is_subset(self.labels[n + 1][sh.degeneracy(n, j, s)]) {
                            return Some(format!("U of {} is not inside U of s_{j}", sh.id(n, s)));
                        }
                    }
                }
            }
        }
        None
    }

    pub fn shape(&self) -> &Arc<TruncatedSimplicialSet> {
        &self.shape
    }

    pub fn space(&self) -> &FiniteSpace {
        &self.space
    }

    pub fn labels(&self) -> &[Vec<PointSet>] {
        &self.labels
    }

    pub fn label(&self, n: usize, s: usize) -> PointSet {
        self.labels[n][s]
    }

    pub fn truncation(&self) -> usize {
        self.shape.truncation()
    }

    /// First failure of the hypercover condition through spheres of
    /// dimension `up_to`.
    pub fn hypercover_failure(&self, up_to: usize) -> Result<Option<HypercoverFailure>> {
        if up_to > self.truncation() {
            return Err(Error::BoundExceeded {
                what: "hypercover level",
                value: up_to,
                limit: self.truncation(),
            });
        }
        let full = self.space.full();
        let covered = self.labels[0].iter().fold(PointSet::EMPTY, |a, &u| a.union(u));
        if covered != full {
            return Ok(Some(HypercoverFailure::NotCovering {
                missing: PointSet(full.0 & !covered.0),
            }));
        }
        for dim in 1..=up_to {
            let n = dim - 1;
            for entry in self.shape.sphere_table(dim)? {
                let target = entry
                    .sphere
                    .facets
                    .iter()
                    .fold(full, |a, &t| a.intersection(self.labels[n][t]));
                let union = entry
                    .fillings
                    .iter()
                    .fold(PointSet::EMPTY, |a, &f| a.union(self.labels[dim][f]));
                if !target.is_subset(union) {
                    return Ok(Some(HypercoverFailure::Sphere {
                        sphere: entry.sphere.clone(),
                        missing: PointSet(target.0 & !union.0),
                    }));
                }
            }
        }
        Ok(None)
    }

    pub fn is_hypercover(&self, up_to: usize) -> Result<bool> {
        Ok(self.hypercover_failure(up_to)?.is_none())
    }
}

/// Fillings of a sphere in a hypercover's shape.
pub fn enumerate_fillings(h: &IndexedHypercover, sphere: &BoundarySphere) -> Result<Vec<usize>> {
    if sphere.dim > h.truncation() {
        return Err(Error::BoundExceeded {
            what: "sphere dimension",
            value: sphere.dim,
            limit: h.truncation(),
        });
    }
    h.shape.fillings(sphere)
}

/// `ι*U`: the shape `ι*I` labelled by `U` at the value on the full subset.
pub fn atlas_to_hypercover(u: &AtlasDiagram, truncation: usize) -> Result<IndexedHypercover> {
    let shape = iota_test(u.index(), truncation)?;
    atlas_to_hypercover_on(&shape, u)
}

/// As [`atlas_to_hypercover`], reusing a prebuilt shape of `u`'s index.
pub fn atlas_to_hypercover_on(shape: &IotaShape, u: &AtlasDiagram) -> Result<IndexedHypercover> {
    if shape.poset != *u.index() {
        return Err(Error::Precondition("shape was built for a different index".into()));
    }
    IndexedHypercover::new(shape.set.clone(), u.space().clone(), shape.labels_for(u.assignment()))
}

/// The diagram read off a hypercover and the atlas verdicts.
#[derive(Clone, Debug)]
pub struct HypercoverAtlas {
    /// Diagram over the quotient of the simplices by the preorder generated
    /// by `σ <= d_i σ` and `σ <= s_j σ`.
    pub diagram: Option<AtlasDiagram>,
    /// Members of each class as `(level, simplex)`.
    pub classes: Vec<Vec<(usize, usize)>>,
    /// Lowest level met by each class.
    pub class_dims: Vec<usize>,
    /// Pairs of classes of dimensions `p, q` are checked when `p + q + 1 <= horizon`.
    pub horizon: usize,
    pub atlas_verdict: bool,
    pub joins_verdict: bool,
    pub failure: Option<String>,
}

impl HypercoverAtlas {
    pub fn verdict(&self) -> bool {
        self.atlas_verdict && self.joins_verdict
    }
}

/// Reads a hypercover as a diagram of opens and checks the atlas conditions.
///
/// The atlas verdict checks the cover and every pair of classes whose joins
/// fit inside the truncation. The joins verdict checks that the simplices
/// `ν` with front face `σ` and back face `τ` cover `U_σ ∩ U_τ`.
pub fn hypercover_to_atlas(h: &IndexedHypercover) -> Result<HypercoverAtlas> {
    let sh = &h.shape;
    let top = sh.truncation();
    let mut offset = vec![0; top + 2];
    for n in 0..=top {
        offset[n + 1] = offset[n] + sh.sizes[n];
    }
    let total = offset[top + 1];
    let mut g: DiGraph<(), ()> = DiGraph::with_capacity(total, 0);
    for _ in 0..total {
        g.add_node(());
    }
    let node = |n: usize, s: usize| petgraph::graph::NodeIndex::new(offset[n] + s);
    for n in 0..=top {
        for s in 0..sh.sizes[n] {
            if n > 0 {
                for i in 0..=n {
                    g.add_edge(node(n, s), node(n - 1, sh.face(n, i, s)), ());
                }
            }
            if n < top {
                for j in 0..=n {
                    g.add_edge(node(n, s), node(n + 1, sh.degeneracy(n, j, s)), ());
                }
            }
        }
    }
    // Components come out with successors first.
    let sccs = tarjan_scc(&g);
    let k = sccs.len();
    let mut comp = vec![0; total];
    for (c, members) in sccs.iter().enumerate() {
        for v in members {
            comp[v.index()] = c;
        }
    }
    let mut reach: Vec<FixedBitSet> = Vec::with_capacity(k);
    for (c, members) in sccs.iter().enumerate() {
        let mut r = FixedBitSet::with_capacity(k);
        r.insert(c);
        for v in members {
            for w in g.neighbors(*v) {
                let d = comp[w.index()];
                if d != c {
                    r.union_with(&reach[d]);
                }
            }
        }
        reach.push(r);
    }
    let level_of = |v: usize| (0..=top).find(|&n| v < offset[n + 1]).expect("in range");
    let mut classes: Vec<Vec<(usize, usize)>> = sccs
        .iter()
        .map(|m| {
            let mut v: Vec<(usize, usize)> = m
                .iter()
                .map(|x| {
                    let n = level_of(x.index());
                    (n, x.index() - offset[n])
                })
                .collect();
            v.sort();
            v
        })
        .collect();
    // Canonical class order: by first member.
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| classes[a].cmp(&classes[b]));
    let mut rank = vec![0; k];
    for (r, &c) in order.iter().enumerate() {
        rank[c] = r;
    }
    let mut below = vec![FixedBitSet::with_capacity(k); k];
    for c in 0..k {
        for d in reach[c].ones() {
            below[rank[d]].insert(rank[c]);
        }
    }
    classes = order.iter().map(|&c| std::mem::take(&mut classes[c])).collect();
    let class_dims: Vec<usize> = classes.iter().map(|m| m[0].0).collect();

    let mut failure = None;
    let mut class_labels = Vec::with_capacity(k);
    for m in &classes {
        let (n0, s0) = m[0];
        let u = h.labels[n0][s0];
        if failure.is_none() && m.iter().any(|&(n, s)| h.labels[n][s] != u) {
            failure = Some(format!("labels are not constant on the class of {}", sh.id(n0, s0)));
        }
        class_labels.push(u);
    }
    let labels: Vec<String> = classes.iter().map(|m| sh.id(m[0].0, m[0].1).to_string()).collect();
    let diagram = if failure.is_none() {
        let poset = FinitePoset::from_downsets(labels, below)?;
        Some(AtlasDiagram::new(poset, h.space.clone(), class_labels.clone())?)
    } else {
        None
    };

    let full = h.space.full();
    let mut atlas_verdict = failure.is_none();
    if let Some(d) = &diagram {
        let covered = d.covered();
        if covered != full {
            atlas_verdict = false;
            failure = Some(format!("classes miss points {}", h.space.open_id(PointSet(full.0 & !covered.0))));
        }
        let idx = d.index();
        'pairs: for a in 0..k {
            for b in a..k {
                if !atlas_verdict {
                    break 'pairs;
                }
                if class_dims[a] + class_dims[b] + 1 > top {
                    continue;
                }
                let meet = class_labels[a].intersection(class_labels[b]);
                let lower = idx
                    .lower_bounds(a, b)
                    .fold(PointSet::EMPTY, |acc, c| acc.union(class_labels[c]));
                if lower != meet {
                    atlas_verdict = false;
                    failure = Some(format!(
                        "common lower bounds of {} and {} do not cover their intersection",
                        idx.label(a),
                        idx.label(b)
                    ));
                }
            }
        }
    }

    let (joins_verdict, joins_failure) = joins_check(h);
    if failure.is_none() {
        failure = joins_failure;
    }
    Ok(HypercoverAtlas {
        diagram,
        classes,
        class_dims,
        horizon: top,
        atlas_verdict,
        joins_verdict,
        failure,
    })
}

fn joins_check(h: &IndexedHypercover) -> (bool, Option<String>) {
    let sh = &h.shape;
    let top = sh.truncation();
    let full = h.space.full();
    let covered = h.labels[0].iter().fold(PointSet::EMPTY, |a, &u| a.union(u));
    if covered != full {
        return (false, Some("level-0 labels do not cover the space".into()));
    }
    // (p, σ, τ) ↦ union of U_ν over ν of level p+q+1 with front σ and back τ
    let mut joins: HashMap<(usize, usize, usize), PointSet> = HashMap::new();
    for m in 1..=top {
        for nu in 0..sh.sizes[m] {
            for p in 0..m {
                let q = m - 1 - p;
                let mut front = nu;
                for lvl in ((p + 1)..=m).rev() {
                    front = sh.face(lvl, lvl, front);
                }
                let mut back = nu;
                for lvl in ((q + 1)..=m).rev() {
                    back = sh.face(lvl, 0, back);
                }
                let e = joins.entry((p, front, back)).or_insert(PointSet::EMPTY);
                *e = e.union(h.labels[m][nu]);
            }
        }
    }
    for p in 0..top {
        for q in 0..(top - p) {
            for s in 0..sh.sizes[p] {
                for t in 0..sh.sizes[q] {
                    let meet = h.labels[p][s].intersection(h.labels[q][t]);
                    let union = joins.get(&(p, s, t)).copied().unwrap_or(PointSet::EMPTY);
                    if !meet.is_subset(union) {
                        return (
                            false,
                            Some(format!(
                                "joins of {} and {} miss points {}",
                                sh.id(p, s),
                                sh.id(q, t),
                                h.space.open_id(PointSet(meet.0 & !union.0))
                            )),
                        );
                    }
                }
            }
        }
    }
    (true, None)
}

/// Comparison of simplicial and semisimplicial fillings of a sphere.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FillingComparison {
    pub simplicial: usize,
    pub semisimplicial: usize,
    pub surjective: bool,
    pub bijective: bool,
}

/// Maps each simplicial filling to its value on the full subset and
/// compares with the indices below every facet's final value.
pub fn semisimplicial_filling_surjectivity(shape: &IotaShape, sphere: &BoundarySphere) -> Result<FillingComparison> {
    let fillings = shape.set.fillings(sphere)?;
    let n = sphere.dim - 1;
    let finals: Vec<usize> = sphere.facets.iter().map(|&t| shape.final_value(n, t)).collect();
    let semi: Vec<usize> = (0..shape.poset.len())
        .filter(|&x| finals.iter().all(|&f| shape.poset.leq(x, f)))
        .collect();
    let mut image: Vec<usize> = fillings.iter().map(|&f| shape.final_value(sphere.dim, f)).collect();
    image.sort();
    let distinct = {
        let mut d = image.clone();
        d.dedup();
        d
    };
    let surjective = semi.iter().all(|x| distinct.binary_search(x).is_ok());
    Ok(FillingComparison {
        simplicial: fillings.len(),
        semisimplicial: semi.len(),
        surjective,
        bijective: surjective && distinct.len() == image.len() && distinct.len() == semi.len(),
    })
}

/// Sizes of the two limits compared by [`delta_refinement_limit_check`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RefinementLimits {
    pub index_limit: usize,
    pub refined_limit: usize,
    pub bijective: bool,
}

/// Compares `lim_I F(U_i)` with the limit of `F` over simplices of `ι*I` of
/// levels `0..=levels`, along `σ → d_i σ` and `σ → s_j σ`. The canonical map
/// sends a family `(x_i)` to `σ ↦ x_{σ(full)}`.
pub fn delta_refinement_limit_check(u: &AtlasDiagram, f: &Presheaf, levels: usize) -> Result<RefinementLimits> {
    if f.space() != u.space() {
        return Err(Error::Precondition("presheaf and diagram live on different spaces".into()));
    }
    let shape = iota_test(u.index(), levels)?;
    let open_of = |p: PointSet| u.space().open_index(p).expect("labels are open");
    let idx = u.index();
    let nodes: Vec<usize> = u.assignment().iter().map(|&p| open_of(p)).collect();
    let arrows: Vec<(usize, usize)> = (0..idx.len())
        .flat_map(|i| (0..idx.len()).filter(move |&j| i != j && idx.leq(i, j)).map(move |j| (i, j)))
        .collect();
    let edges: Vec<(usize, usize, usize)> = arrows.iter().map(|&(a, b)| (a, b, nodes[a])).collect();
    let base = GluingProblem::new(u.space(), None, nodes.clone(), &edges)?.families(f, None);

    let sh = shape.set();
    let mut offset = vec![0; levels + 2];
    for n in 0..=levels {
        offset[n + 1] = offset[n] + sh.level_size(n);
    }
    let mut r_nodes = Vec::with_capacity(offset[levels + 1]);
    let mut r_arrows = Vec::new();
    for n in 0..=levels {
        for s in 0..sh.level_size(n) {
            r_nodes.push(nodes[shape.final_value(n, s)]);
            let me = offset[n] + s;
            if n > 0 {
                for i in 0..=n {
                    r_arrows.push((me, offset[n - 1] + sh.face(n, i, s)));
                }
            }
            if n < levels {
                for j in 0..=n {
                    r_arrows.push((me, offset[n + 1] + sh.degeneracy(n, j, s)));
                }
            }
        }
    }
    let r_edges: Vec<(usize, usize, usize)> = r_arrows.iter().map(|&(a, b)| (a, b, r_nodes[a])).collect();
    let refined = GluingProblem::new(u.space(), None, r_nodes, &r_edges)?.families(f, None);
    let mut images: Vec<Vec<usize>> = base
        .iter()
        .map(|x| {
            (0..=levels)
                .flat_map(|n| (0..sh.level_size(n)).map(move |s| (n, s)))
                .map(|(n, s)| x[shape.final_value(n, s)])
                .collect()
        })
        .collect();
    images.sort();
    images.dedup();
    let mut refined_sorted = refined.clone();
    refined_sorted.sort();
    Ok(RefinementLimits {
        index_limit: base.len(),
        refined_limit: refined.len(),
        bijective: images.len() == base.len() && images == refined_sorted,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::FiniteSpace;

    fn v_poset() -> FinitePoset {
        FinitePoset::from_label_pairs(&["k", "a", "b"], &[("k", "a"), ("k", "b")]).unwrap()
    }

    /// Monotone maps from nonempty subsets of {0..n} into I^op, by brute force.
    fn brute_count(index: &FinitePoset, n: usize) -> usize {
        let m = (1usize << (n + 1)) - 1;
        let k = index.len();
        let mut count = 0;
        let total = k.pow(m as u32);
        for code in 0..total {
            let mut c = code;
            let theta: Vec<usize> = (0..m)
                .map(|_| {
                    let v = c % k;
                    c /= k;
                    v
                })
                .collect();
            let ok = (1..=m).all(|s| (1..=m).all(|t| s & t != s || index.leq(theta[t - 1], theta[s - 1])));
            if ok {
                count += 1;
            }
        }
        count
    }

    #[test]
    fn iota_level_counts() {
        let one = iota_test(&FinitePoset::chain(1), 3).unwrap();
        assert_eq!(one.set().sizes(), &[1, 1, 1, 1]);
        let anti = iota_test(&FinitePoset::antichain(&["a", "b"]), 2).unwrap();
        assert_eq!(anti.set().level_size(0), 2);
        assert_eq!(anti.set().level_size(1), 2);
        let chain = FinitePoset::chain(2);
        let sh = iota_test(&chain, 2).unwrap();
        assert_eq!(sh.set().level_size(1), brute_count(&chain, 1));
        assert_eq!(sh.set().level_size(2), brute_count(&chain, 2));
        let v = v_poset();
        let sh = iota_test(&v, 2).unwrap();
        for n in 0..=2 {
            assert_eq!(sh.set().level_size(n), brute_count(&v, n));
        }
    }

    #[test]
    fn identities_hold_on_iota_shapes() {
        for p in [FinitePoset::chain(3), v_poset(), FinitePoset::antichain(&["a", "b"])] {
            let sh = iota_test(&p, 3).unwrap();
            let r = sh.set().identity_report();
            assert!(r.failure.is_none(), "{r:?}");
            assert!(r.checked > 0);
        }
    }

    #[test]
    fn broken_identity_is_rejected() {
        // two vertices, one edge whose degeneracy data is inconsistent
        let err = TruncatedSimplicialSet::new(
            vec![2, 2],
            vec![vec![], vec![vec![0, 1], vec![0, 1]]],
            vec![vec![vec![1, 0]]],
        )
        .unwrap_err();
        assert_eq!(err.kind(), "simplicial_identities");
    }

    #[test]
    fn truncation_guard() {
        assert!(iota_test(&FinitePoset::chain(2), 4).is_err());
        let tight = ShapeBounds {
            max_truncation: 3,
            max_simplices: 5,
        };
        assert!(iota_test_with(&FinitePoset::chain(3), 2, tight).is_err());
    }

    #[test]
    fn disjoint_atlas_is_hypercover() {
        let x = FiniteSpace::discrete(2);
        let u = AtlasDiagram::new(
            FinitePoset::antichain(&["i", "j"]),
            x.clone(),
            vec![PointSet::singleton(0), PointSet::singleton(1)],
        )
        .unwrap();
        let h = atlas_to_hypercover(&u, 3).unwrap();
        assert_eq!(h.labels()[0], vec![PointSet::singleton(0), PointSet::singleton(1)]);
        assert!(h.is_hypercover(3).unwrap());
        let r = hypercover_to_atlas(&h).unwrap();
        assert!(r.verdict(), "{r:?}");
    }

    #[test]
    fn trivial_atlas_gives_constant_hypercover() {
        let x = FiniteSpace::sierpinski();
        let h = atlas_to_hypercover(&AtlasDiagram::trivial(&x), 3).unwrap();
        for n in 0..=3 {
            assert_eq!(h.labels()[n], vec![x.full()]);
        }
        assert!(h.is_hypercover(3).unwrap());
    }

    #[test]
    fn missing_binary_fillings_fail() {
        let x = FiniteSpace::indiscrete(2);
        let u = AtlasDiagram::new(FinitePoset::antichain(&["i", "j"]), x.clone(), vec![x.full(), x.full()]).unwrap();
        let h = atlas_to_hypercover(&u, 2).unwrap();
        match h.hypercover_failure(2).unwrap() {
            Some(HypercoverFailure::Sphere { sphere, .. }) => assert_eq!(sphere.dim, 1),
            other => panic!("{other:?}"),
        }
        assert!(!hypercover_to_atlas(&h).unwrap().verdict());
    }

    #[test]
    fn filtered_point_hypercover() {
        let pt = FiniteSpace::point();
        let u = AtlasDiagram::constant(v_poset(), &pt, pt.full()).unwrap();
        assert!(atlas_to_hypercover(&u, 3).unwrap().is_hypercover(3).unwrap());
    }

    #[test]
    fn fillings_of_v_poset() {
        let v = v_poset();
        let sh = iota_test(&v, 2).unwrap();
        let vert = |l: &str| sh.lookup(0, &[v.index_of(l).unwrap() as u8]).unwrap();
        let s = BoundarySphere {
            dim: 1,
            facets: vec![vert("b"), vert("a")],
        };
        let fills = sh.set().fillings(&s).unwrap();
        let values: Vec<&str> = fills.iter().map(|&f| v.label(sh.final_value(1, f))).collect();
        assert_eq!(values, vec!["k"]);

        let anti = FinitePoset::antichain(&["a", "b"]);
        let sh = iota_test(&anti, 1).unwrap();
        let s = BoundarySphere {
            dim: 1,
            facets: vec![0, 1],
        };
        assert!(sh.set().fillings(&s).unwrap().is_empty());

        // degenerate sphere: all facets equal the same vertex
        let sh = iota_test(&v, 2).unwrap();
        let a = vert("a");
        let s = BoundarySphere {
            dim: 1,
            facets: vec![a, a],
        };
        let fills = sh.set().fillings(&s).unwrap();
        assert!(fills.contains(&sh.set().degeneracy(0, 0, a)));
    }

    #[test]
    fn sphere_tables_match_direct_fillings() {
        let sh = iota_test(&v_poset(), 3).unwrap();
        for dim in 1..=3 {
            for e in sh.set().sphere_table(dim).unwrap() {
                assert!(sh.set().is_sphere(&e.sphere));
                assert_eq!(sh.set().fillings(&e.sphere).unwrap(), e.fillings);
            }
        }
    }

    #[test]
    fn sphere_data_is_monotone_on_faces() {
        let v = v_poset();
        let sh = iota_test(&v, 3).unwrap();
        for e in sh.set().sphere_table(2).unwrap() {
            let data = sh.sphere_data(&e.sphere);
            for s in 1..7u32 {
                for t in 1..7u32 {
                    if s & t == s {
                        assert!(v.leq(data[t as usize - 1] as usize, data[s as usize - 1] as usize));
                    }
                }
            }
        }
    }

    #[test]
    fn filling_surjectivity_on_shapes() {
        for p in [FinitePoset::chain(1), v_poset(), FinitePoset::chain(3)] {
            let sh = iota_test(&p, 3).unwrap();
            for dim in 1..=3 {
                for e in sh.set().sphere_table(dim).unwrap() {
                    let c = semisimplicial_filling_surjectivity(&sh, &e.sphere).unwrap();
                    assert!(c.surjective && c.bijective, "{c:?}");
                }
            }
        }
        let sh = iota_test(&FinitePoset::chain(1), 2).unwrap();
        let c = semisimplicial_filling_surjectivity(
            &sh,
            &BoundarySphere {
                dim: 1,
                facets: vec![0, 0],
            },
        )
        .unwrap();
        assert_eq!((c.simplicial, c.semisimplicial), (1, 1));
    }

    #[test]
    fn functoriality_is_enforced() {
        let x = FiniteSpace::discrete(2);
        let sh = iota_test(&FinitePoset::chain(2), 1).unwrap();
        let mut labels = sh.labels_for(&[PointSet::singleton(0), x.full()]);
        // put a 1-simplex label outside its faces
        let last = labels[1].len() - 1;
        labels[1][last] = PointSet::singleton(1);
        labels[1][0] = x.full();
        let err = IndexedHypercover::new(sh.set().clone(), x, labels).unwrap_err();
        assert_eq!(err.kind(), "hypercover_labels_functorial");
    }

    #[test]
    fn non_atlas_fails_both_ways() {
        // V-poset on the discrete 2-point space with U_k too small
        let x = FiniteSpace::discrete(2);
        let u = AtlasDiagram::new(v_poset(), x.clone(), vec![PointSet::EMPTY, x.full(), x.full()]).unwrap();
        assert!(!u.is_atlas());
        let h = atlas_to_hypercover(&u, 3).unwrap();
        assert!(!h.is_hypercover(2).unwrap());
        assert!(!hypercover_to_atlas(&h).unwrap().verdict());
    }

    #[test]
    fn tautological_atlas_round_trip() {
        let x = FiniteSpace::sierpinski();
        let h = atlas_to_hypercover(&AtlasDiagram::tautological(&x), 3).unwrap();
        assert!(h.is_hypercover(3).unwrap());
        let r = hypercover_to_atlas(&h).unwrap();
        assert!(r.verdict(), "{:?}", r.failure);
        assert!(r.diagram.is_some());
    }

    #[test]
    fn ids_are_deterministic() {
        let a = iota_test(&v_poset(), 2).unwrap();
        let b = iota_test(&v_poset(), 2).unwrap();
        assert_eq!(a.set().ids(), b.set().ids());
        assert_eq!(a.set().find_id(a.set().id(2, 3)), Some((2, 3)));
    }
}
