//! Set-valued presheaves on finite spaces: descent along atlases and
//! hypercovers, sheafification, and local isomorphisms.
//!
//! Opens are referred to by their index in [`FiniteSpace::opens`]; sections
//! over an open are the integers `0..size`.

use std::collections::HashMap;

use crate::atlas::AtlasDiagram;
use crate::error::{Error, Result};
use crate::lattice::{pull_into, FinitePoset, FiniteSpace, PointSet};
use crate::simplicial::IndexedHypercover;

/// A presheaf of finite sets on the opens of a finite space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Presheaf {
    space: FiniteSpace,
    sizes: Vec<usize>,
    /// `tables[u * k + v]` restricts sections over `u` to `v ⊆ u`; empty
    /// when `v ⊄ u`.
    tables: Vec<Vec<usize>>,
}

fn subset(space: &FiniteSpace, v: usize, u: usize) -> bool {
    space.opens()[v].is_subset(space.opens()[u])
}

/// Maximal proper subopens of each open.
pub(crate) fn lower_covers(space: &FiniteSpace) -> Vec<Vec<usize>> {
    let k = space.opens().len();
    (0..k)
        .map(|u| {
            (0..k)
                .filter(|&v| v != u && subset(space, v, u))
                .filter(|&v| !(0..k).any(|w| w != u && w != v && subset(space, v, w) && subset(space, w, u)))
                .collect()
        })
        .collect()
}

impl Presheaf {
    /// Builds a presheaf from restriction maps along some inclusions. Every
    /// covering inclusion must be given; the rest are composed and all given
    /// maps must agree with the composites.
    pub fn new(space: FiniteSpace, sizes: Vec<usize>, restrictions: &[(usize, usize, Vec<usize>)]) -> Result<Self> {
        let k = space.opens().len();
        if sizes.len() != k {
            return Err(Error::DimensionMismatch {
                what: "presheaf sections",
                expected: k,
                got: sizes.len(),
            });
        }
        let mut given: HashMap<(usize, usize), &Vec<usize>> = HashMap::new();
        for (u, v, map) in restrictions {
            if *u >= k || *v >= k || !subset(&space, *v, *u) {
                return Err(Error::invariant(
                    "presheaf_restriction_inclusion",
                    format!("restriction {u} -> {v} is not along an inclusion"),
                ));
            }
            given.insert((*u, *v), map);
        }
        let covers = lower_covers(&space);
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by_key(|&u| space.opens()[u].len());
        let mut tables = vec![Vec::new(); k * k];
        for &u in &order {
            tables[u * k + u] = (0..sizes[u]).collect();
            for &c in &covers[u] {
                let map = given.get(&(u, c)).ok_or_else(|| {
                    Error::invariant(
                        "presheaf_restriction_missing",
                        format!(
                            "no restriction from {} to {}",
                            space.open_id(space.opens()[u]),
                            space.open_id(space.opens()[c])
                        ),
                    )
                })?;
                check_map(map, sizes[u], sizes[c])?;
                tables[u * k + c] = (*map).clone();
            }
            for v in 0..k {
                if v == u || !subset(&space, v, u) || covers[u].contains(&v) {
                    continue;
                }
                let c = *covers[u].iter().find(|&&c| subset(&space, v, c)).expect("some cover contains v");
                let composed: Vec<usize> = tables[u * k + c].iter().map(|&s| tables[c * k + v][s]).collect();
                tables[u * k + v] = composed;
            }
        }
        for ((u, v), map) in given {
            check_map(map, sizes[u], sizes[v])?;
            if *map != tables[u * k + v] {
                return Err(Error::invariant(
                    "presheaf_composition",
                    format!(
                        "restriction {} -> {} disagrees with composite",
                        space.open_id(space.opens()[u]),
                        space.open_id(space.opens()[v])
                    ),
                ));
            }
        }
        Self::from_tables(space, sizes, tables)
    }

    /// Builds a presheaf from a full restriction table, checking identities
    /// and composition for every chain `w ⊆ v ⊆ u`.
    pub fn from_tables(space: FiniteSpace, sizes: Vec<usize>, tables: Vec<Vec<usize>>) -> Result<Self> {
        let k = space.opens().len();
        if sizes.len() != k || tables.len() != k * k {
            return Err(Error::DimensionMismatch {
                what: "presheaf table",
                expected: k * k,
                got: tables.len(),
            });
        }
        for u in 0..k {
            for v in 0..k {
                if subset(&space, v, u) {
                    check_map(&tables[u * k + v], sizes[u], sizes[v])?;
                }
            }
            if tables[u * k + u].iter().enumerate().any(|(s, &t)| s != t) {
                return Err(Error::invariant(
                    "presheaf_identity",
                    format!("restriction to {} itself is not the identity", space.open_id(space.opens()[u])),
                ));
            }
        }
        for u in 0..k {
            for v in 0..k {
                if v == u || !subset(&space, v, u) {
                    continue;
                }
                for w in 0..k {
                    if w == v || !subset(&space, w, v) {
                        continue;
                    }
                    for s in 0..sizes[u] {
                        if tables[v * k + w][tables[u * k + v][s]] != tables[u * k + w][s] {
                            return Err(Error::invariant(
                                "presheaf_composition",
                                format!(
                                    "restrictions {} -> {} -> {} do not compose",
                                    space.open_id(space.opens()[u]),
                                    space.open_id(space.opens()[v]),
                                    space.open_id(space.opens()[w])
                                ),
                            ));
                        }
                    }
                }
            }
        }
        Ok(Presheaf { space, sizes, tables })
    }

    pub(crate) fn from_tables_unchecked(space: FiniteSpace, sizes: Vec<usize>, tables: Vec<Vec<usize>>) -> Self {
        Presheaf { space, sizes, tables }
    }

    /// The constant presheaf with `n` sections everywhere.
    pub fn constant(space: &FiniteSpace, n: usize) -> Self {
        let k = space.opens().len();
        let tables = (0..k * k)
            .map(|x| {
                if subset(space, x % k, x / k) {
                    (0..n).collect()
                } else {
                    Vec::new()
                }
            })
            .collect();
        Presheaf::from_tables_unchecked(space.clone(), vec![n; k], tables)
    }

    /// One section over opens inside `members`, none elsewhere. `members`
    /// must be downward closed.
    pub fn subterminal(space: &FiniteSpace, members: &[usize]) -> Result<Self> {
        let k = space.opens().len();
        let inside: Vec<bool> = (0..k).map(|u| members.contains(&u)).collect();
        for u in 0..k {
            for v in 0..k {
                if inside[u] && subset(space, v, u) && !inside[v] {
                    return Err(Error::invariant("sieve_downward_closed", "members are not downward closed"));
                }
            }
        }
        let sizes: Vec<usize> = inside.iter().map(|&b| b as usize).collect();
        let tables = (0..k * k)
            .map(|x| {
                let (u, v) = (x / k, x % k);
                if subset(space, v, u) {
                    vec![0; sizes[u]]
                } else {
                    Vec::new()
                }
            })
            .collect();
        Ok(Presheaf::from_tables_unchecked(space.clone(), sizes, tables))
    }

    /// `Hom(-, V)`: one section over opens inside `V`, none elsewhere.
    pub fn representable(space: &FiniteSpace, v: PointSet) -> Result<Self> {
        let vi = space
            .open_index(v)
            .ok_or_else(|| Error::Precondition(format!("{} is not open", space.open_id(v))))?;
        let members: Vec<usize> = (0..space.opens().len()).filter(|&u| subset(space, u, vi)).collect();
        Self::subterminal(space, &members)
    }

    pub fn empty(space: &FiniteSpace) -> Self {
        Self::constant(space, 0)
    }

    /// Pointwise product; the pair `(a, b)` is encoded as `a * |G(U)| + b`.
    pub fn product(&self, other: &Presheaf) -> Result<Presheaf> {
        if self.space != other.space {
            return Err(Error::Precondition("presheaves live on different spaces".into()));
        }
        let k = self.n_opens();
        let sizes: Vec<usize> = (0..k).map(|u| self.sizes[u] * other.sizes[u]).collect();
        let tables = (0..k * k)
            .map(|x| {
                let (u, v) = (x / k, x % k);
                if !subset(&self.space, v, u) {
                    return Vec::new();
                }
                (0..sizes[u])
                    .map(|s| {
                        let (a, b) = (s / other.sizes[u], s % other.sizes[u]);
                        self.restrict(u, v, a) * other.sizes[v] + other.restrict(u, v, b)
                    })
                    .collect()
            })
            .collect();
        Ok(Presheaf::from_tables_unchecked(self.space.clone(), sizes, tables))
    }

    pub fn space(&self) -> &FiniteSpace {
        &self.space
    }

    pub fn n_opens(&self) -> usize {
        self.sizes.len()
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn size(&self, u: usize) -> usize {
        self.sizes[u]
    }

    /// Restriction of section `s` over open `u` to open `v ⊆ u`.
    #[inline]
    pub fn restrict(&self, u: usize, v: usize, s: usize) -> usize {
        self.tables[u * self.sizes.len() + v][s]
    }

    pub fn table(&self, u: usize, v: usize) -> &[usize] {
        &self.tables[u * self.sizes.len() + v]
    }

    pub fn open_of(&self, p: PointSet) -> Result<usize> {
        self.space
            .open_index(p)
            .ok_or_else(|| Error::Precondition(format!("{} is not open", self.space.open_id(p))))
    }
}

fn check_map(map: &[usize], from: usize, to: usize) -> Result<()> {
    if map.len() != from || map.iter().any(|&t| t >= to) {
        return Err(Error::invariant(
            "presheaf_restriction_range",
            format!("restriction table of length {} into {to} sections, expected length {from}", map.len()),
        ));
    }
    Ok(())
}

/// Families `(x_p)` of sections over opens `U_p` subject to agreements
/// `x_a|W = x_b|W`, optionally compared with the sections over a target open
/// containing every `U_p`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GluingProblem {
    target: Option<usize>,
    parts: Vec<usize>,
    edges: Vec<(usize, usize, usize)>,
    order: Vec<usize>,
    forced: Vec<Option<usize>>,
    checks: Vec<Vec<(usize, usize, usize)>>,
}

/// What the comparison map `F(S) → families` looks like.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GluingReport {
    pub sections: usize,
    /// Families found, capped at `sections + 1`.
    pub families: usize,
    pub injective: bool,
    pub surjective: bool,
}

impl GluingReport {
    pub fn bijective(&self) -> bool {
        self.injective && self.surjective
    }
}

impl GluingProblem {
    pub fn new(space: &FiniteSpace, target: Option<usize>, parts: Vec<usize>, edges: &[(usize, usize, usize)]) -> Result<Self> {
        let k = space.opens().len();
        if parts.iter().any(|&p| p >= k) || target.is_some_and(|t| t >= k) {
            return Err(Error::UnknownElement("open index out of range".into()));
        }
        if let Some(t) = target {
            if parts.iter().any(|&p| !subset(space, p, t)) {
                return Err(Error::Precondition("a part is not inside the target".into()));
            }
        }
        let mut es: Vec<(usize, usize, usize)> = Vec::with_capacity(edges.len());
        for &(a, b, w) in edges {
            if a >= parts.len() || b >= parts.len() || w >= k {
                return Err(Error::UnknownElement("edge endpoint out of range".into()));
            }
            if !subset(space, w, parts[a]) || !subset(space, w, parts[b]) {
                return Err(Error::Precondition("agreement open is not inside both parts".into()));
            }
            if a != b {
                es.push((a.min(b), a.max(b), w));
            }
        }
        es.sort_unstable();
        es.dedup();
        // Large opens first, so smaller parts are usually forced.
        let mut order: Vec<usize> = (0..parts.len()).collect();
        order.sort_by_key(|&p| (std::cmp::Reverse(space.opens()[parts[p]].len()), p));
        let mut pos = vec![0; parts.len()];
        for (i, &p) in order.iter().enumerate() {
            pos[p] = i;
        }
        let mut forced = vec![None; parts.len()];
        let mut checks = vec![Vec::new(); parts.len()];
        for &(a, b, w) in &es {
            let (early, late) = if pos[a] < pos[b] { (a, b) } else { (b, a) };
            let at = pos[late];
            if w == parts[late] && forced[at].is_none() {
                forced[at] = Some(early);
            }
            checks[at].push((a, b, w));
        }
        Ok(GluingProblem {
            target,
            parts,
            edges: es,
            order,
            forced,
            checks,
        })
    }

    /// Limit over an index poset: parts `U_i`, agreements along covering pairs.
    pub fn limit(u: &AtlasDiagram) -> Result<Self> {
        let space = u.space();
        let opens = open_indices(space, u.assignment())?;
        let target = open_index(space, u.covered())?;
        let edges: Vec<(usize, usize, usize)> = u
            .index()
            .covering_pairs()
            .into_iter()
            .map(|(i, j)| (i, j, opens[i]))
            .collect();
        Self::new(space, Some(target), opens, &edges)
    }

    /// Equalizer of level-0 sections over level-1 simplices.
    pub fn equalizer(h: &IndexedHypercover) -> Result<Self> {
        if h.truncation() < 1 {
            return Err(Error::Precondition("hypercover needs level 1".into()));
        }
        let space = h.space();
        let parts = open_indices(space, &h.labels()[0])?;
        let covered = h.labels()[0].iter().fold(PointSet::EMPTY, |a, &u| a.union(u));
        let target = open_index(space, covered)?;
        let shape = h.shape();
        let mut edges = Vec::with_capacity(shape.level_size(1));
        for t in 0..shape.level_size(1) {
            let w = open_index(space, h.label(1, t))?;
            edges.push((shape.face(1, 1, t), shape.face(1, 0, t), w));
        }
        Self::new(space, Some(target), parts, &edges)
    }

    /// Matching families on a family of opens ordered by inclusion.
    pub fn sieve(space: &FiniteSpace, target: Option<usize>, members: Vec<usize>) -> Result<Self> {
        let n = members.len();
        let mut edges = Vec::new();
        for a in 0..n {
            for b in 0..n {
                let (u, v) = (members[a], members[b]);
                if a != b && subset(space, u, v) {
                    let covered = (0..n).any(|c| {
                        let w = members[c];
                        c != a && c != b && subset(space, u, w) && subset(space, w, v)
                    });
                    if !covered {
                        edges.push((a, b, u));
                    }
                }
            }
        }
        Self::new(space, target, members, &edges)
    }

    /// Natural transformations out of `a`, as families over its elements
    /// `(U, s)`. With a target `S`, compares against `F(S)` through the map
    /// sending a section to its restrictions; this is precomposition with
    /// `a → Hom(-, S)` when every element lies over an open inside `S`.
    pub fn elements(a: &Presheaf, target: Option<usize>) -> Result<Self> {
        let space = a.space();
        let k = a.n_opens();
        let mut offset = vec![0; k + 1];
        for u in 0..k {
            offset[u + 1] = offset[u] + a.size(u);
        }
        let mut parts = Vec::with_capacity(offset[k]);
        for u in 0..k {
            parts.extend(std::iter::repeat(u).take(a.size(u)));
        }
        let covers = lower_covers(space);
        let mut edges = Vec::new();
        for u in 0..k {
            for &v in &covers[u] {
                for s in 0..a.size(u) {
                    edges.push((offset[v] + a.restrict(u, v, s), offset[u] + s, v));
                }
            }
        }
        Self::new(space, target, parts, &edges)
    }

    pub fn target(&self) -> Option<usize> {
        self.target
    }

    pub fn parts(&self) -> &[usize] {
        &self.parts
    }

    pub fn edges(&self) -> &[(usize, usize, usize)] {
        &self.edges
    }

    /// All families, or the first `cap` in search order.
    pub fn families(&self, f: &Presheaf, cap: Option<usize>) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        if cap == Some(0) {
            return out;
        }
        let mut x = vec![0; self.parts.len()];
        self.search(f, 0, &mut x, &mut out, cap.unwrap_or(usize::MAX));
        out
    }

    fn search(&self, f: &Presheaf, pos: usize, x: &mut Vec<usize>, out: &mut Vec<Vec<usize>>, cap: usize) -> bool {
        if pos == self.order.len() {
            out.push(x.clone());
            return out.len() >= cap;
        }
        let a = self.order[pos];
        let ua = self.parts[a];
        let (lo, hi) = match self.forced[pos] {
            Some(b) => {
                let v = f.restrict(self.parts[b], ua, x[b]);
                (v, v + 1)
            }
            None => (0, f.size(ua)),
        };
        for v in lo..hi {
            x[a] = v;
            let ok = self.checks[pos]
                .iter()
                .all(|&(p, q, w)| f.restrict(self.parts[p], w, x[p]) == f.restrict(self.parts[q], w, x[q]));
            if ok && self.search(f, pos + 1, x, out, cap) {
                return true;
            }
        }
        false
    }

    /// Image of a target section.
    pub fn restrictions_of(&self, f: &Presheaf, s: usize) -> Vec<usize> {
        let t = self.target.expect("problem has a target");
        self.parts.iter().map(|&p| f.restrict(t, p, s)).collect()
    }

    pub fn report(&self, f: &Presheaf) -> GluingReport {
        let t = self.target.expect("problem has a target");
        let n = f.size(t);
        let mut images: Vec<Vec<usize>> = (0..n).map(|s| self.restrictions_of(f, s)).collect();
        images.sort_unstable();
        images.dedup();
        let families = self.families(f, Some(n + 1)).len();
        GluingReport {
            sections: n,
            families,
            injective: images.len() == n,
            surjective: families == images.len(),
        }
    }

    /// Whether `F(S)` maps bijectively onto the families.
    pub fn glues(&self, f: &Presheaf) -> bool {
        let t = self.target.expect("problem has a target");
        let n = f.size(t);
        for s in 0..n {
            for s2 in 0..s {
                if self.parts.iter().all(|&p| f.restrict(t, p, s) == f.restrict(t, p, s2)) {
                    return false;
                }
            }
        }
        self.families(f, Some(n + 1)).len() == n
    }
}

fn open_index(space: &FiniteSpace, p: PointSet) -> Result<usize> {
    space
        .open_index(p)
        .ok_or_else(|| Error::Precondition(format!("{} is not open", space.open_id(p))))
}

fn open_indices(space: &FiniteSpace, ps: &[PointSet]) -> Result<Vec<usize>> {
    ps.iter().map(|&p| open_index(space, p)).collect()
}

/// Whether `F(⋃U_i)` maps bijectively onto the limit of `F(U_i)` over `I`.
pub fn descent_check(f: &Presheaf, u: &AtlasDiagram) -> Result<bool> {
    Ok(descent_report(f, u)?.bijective())
}

pub fn descent_report(f: &Presheaf, u: &AtlasDiagram) -> Result<GluingReport> {
    if f.space() != u.space() {
        return Err(Error::Precondition("presheaf and atlas live on different spaces".into()));
    }
    Ok(GluingProblem::limit(u)?.report(f))
}

/// Whether the sections over the union of the level-0 labels map
/// bijectively onto the equalizer of level-0 sections over level-1 faces.
pub fn hypercover_descent_check(f: &Presheaf, h: &IndexedHypercover) -> Result<bool> {
    if f.space() != h.space() {
        return Err(Error::Precondition("presheaf and hypercover live on different spaces".into()));
    }
    Ok(GluingProblem::equalizer(h)?.glues(f))
}

/// Opens inside the minimal open of some point of `S`: the smallest sieve
/// covering `S`.
pub fn minimal_covering_sieve(space: &FiniteSpace, s: usize) -> Vec<usize> {
    let target = space.opens()[s];
    let mins: Vec<PointSet> = target.iter().map(|p| space.minimal_open(p)).collect();
    (0..space.opens().len())
        .filter(|&v| mins.iter().any(|m| space.opens()[v].is_subset(*m)))
        .collect()
}

/// Every covering sieve of every open, as `(open, members)`.
pub fn covering_sieves(space: &FiniteSpace) -> Vec<(usize, Vec<usize>)> {
    let k = space.opens().len();
    let mut out = Vec::new();
    for s in 0..k {
        let inside: Vec<usize> = (0..k).filter(|&v| subset(space, v, s)).collect();
        let base = minimal_covering_sieve(space, s);
        let extra: Vec<usize> = inside.iter().copied().filter(|v| !base.contains(v)).collect();
        for mask in 0u64..(1 << extra.len()) {
            let mut members = base.clone();
            members.extend(extra.iter().enumerate().filter(|(b, _)| mask >> b & 1 == 1).map(|(_, &v)| v));
            members.sort_unstable();
            let closed = members
                .iter()
                .all(|&m| (0..k).all(|v| !subset(space, v, m) || members.contains(&v)));
            if closed {
                out.push((s, members));
            }
        }
    }
    out
}

/// Descent for the minimal covering sieve of every open.
pub fn is_sheaf(f: &Presheaf) -> bool {
    sheaf_failure(f).is_none()
}

/// The first open over which `f` fails to glue.
pub fn sheaf_failure(f: &Presheaf) -> Option<usize> {
    let space = f.space();
    (0..f.n_opens()).find(|&s| {
        let p = GluingProblem::sieve(space, Some(s), minimal_covering_sieve(space, s)).expect("valid sieve");
        !p.glues(f)
    })
}

/// A natural transformation between presheaves on the same space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PresheafMap {
    source: Presheaf,
    target: Presheaf,
    components: Vec<Vec<usize>>,
}

impl PresheafMap {
    pub fn new(source: Presheaf, target: Presheaf, components: Vec<Vec<usize>>) -> Result<Self> {
        if source.space() != target.space() {
            return Err(Error::Precondition("presheaves live on different spaces".into()));
        }
        let k = source.n_opens();
        if components.len() != k {
            return Err(Error::DimensionMismatch {
                what: "map components",
                expected: k,
                got: components.len(),
            });
        }
        for u in 0..k {
            check_map(&components[u], source.size(u), target.size(u))?;
        }
        let space = source.space();
        for u in 0..k {
            for v in 0..k {
                if !subset(space, v, u) {
                    continue;
                }
                for s in 0..source.size(u) {
                    if target.restrict(u, v, components[u][s]) != components[v][source.restrict(u, v, s)] {
                        return Err(Error::invariant(
                            "presheaf_map_natural",
                            format!(
                                "square for {} -> {} does not commute",
                                space.open_id(space.opens()[u]),
                                space.open_id(space.opens()[v])
                            ),
                        ));
                    }
                }
            }
        }
        Ok(PresheafMap {
            source,
            target,
            components,
        })
    }

    pub fn identity(f: &Presheaf) -> Self {
        let components = f.sizes().iter().map(|&n| (0..n).collect()).collect();
        PresheafMap {
            source: f.clone(),
            target: f.clone(),
            components,
        }
    }

    /// The unique map to a subterminal presheaf that has sections wherever
    /// `f` does.
    pub fn to_subterminal(f: &Presheaf, t: &Presheaf) -> Result<Self> {
        let components = (0..f.n_opens()).map(|u| vec![0; f.size(u)]).collect();
        Self::new(f.clone(), t.clone(), components)
    }

    pub fn source(&self) -> &Presheaf {
        &self.source
    }

    pub fn target(&self) -> &Presheaf {
        &self.target
    }

    pub fn component(&self, u: usize) -> &[usize] {
        &self.components[u]
    }

    /// `other ∘ self`.
    pub fn then(&self, other: &PresheafMap) -> Result<PresheafMap> {
        if self.target != other.source {
            return Err(Error::Precondition("maps are not composable".into()));
        }
        let components = self
            .components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| a.iter().map(|&s| b[s]).collect())
            .collect();
        Ok(PresheafMap {
            source: self.source.clone(),
            target: other.target.clone(),
            components,
        })
    }

    pub fn is_isomorphism(&self) -> bool {
        self.components.iter().enumerate().all(|(u, c)| {
            let mut seen = vec![false; self.target.size(u)];
            c.iter().for_each(|&t| seen[t] = true);
            c.len() == self.target.size(u) && seen.iter().all(|&b| b)
        })
    }
}

/// Fibre product `A ×_B C` with its projections to `C` and `A`.
#[derive(Clone, Debug)]
pub struct PresheafPullback {
    pub object: Presheaf,
    pub to_base: PresheafMap,
    pub to_other: PresheafMap,
}

/// Pulls `psi: A → B` back along `phi: C → B`, pointwise.
pub fn pullback(psi: &PresheafMap, phi: &PresheafMap) -> Result<PresheafPullback> {
    if psi.target != phi.target {
        return Err(Error::Precondition("maps do not share a codomain".into()));
    }
    let a = &psi.source;
    let c = &phi.source;
    let space = a.space().clone();
    let k = a.n_opens();
    let pairs: Vec<Vec<(usize, usize)>> = (0..k)
        .map(|u| {
            let mut v = Vec::new();
            for x in 0..a.size(u) {
                for y in 0..c.size(u) {
                    if psi.components[u][x] == phi.components[u][y] {
                        v.push((x, y));
                    }
                }
            }
            v
        })
        .collect();
    let index: Vec<HashMap<(usize, usize), usize>> = pairs
        .iter()
        .map(|v| v.iter().enumerate().map(|(i, &p)| (p, i)).collect())
        .collect();
    let sizes: Vec<usize> = pairs.iter().map(Vec::len).collect();
    let tables = (0..k * k)
        .map(|z| {
            let (u, v) = (z / k, z % k);
            if !subset(&space, v, u) {
                return Vec::new();
            }
            pairs[u]
                .iter()
                .map(|&(x, y)| index[v][&(a.restrict(u, v, x), c.restrict(u, v, y))])
                .collect()
        })
        .collect();
    let object = Presheaf::from_tables_unchecked(space, sizes, tables);
    let to_base = PresheafMap::new(
        object.clone(),
        c.clone(),
        pairs.iter().map(|v| v.iter().map(|p| p.1).collect()).collect(),
    )?;
    let to_other = PresheafMap::new(
        object.clone(),
        a.clone(),
        pairs.iter().map(|v| v.iter().map(|p| p.0).collect()).collect(),
    )?;
    Ok(PresheafPullback {
        object,
        to_base,
        to_other,
    })
}

/// A section of the codomain over `open` that does not lift locally.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalIsoFailure {
    pub open: usize,
    pub section: usize,
}

/// Whether, for every open `S` and section `b` over `S`, the lifts
/// `(V, a)` with `ψ(a) = b|V`, ordered by restriction, form a site for `S`.
pub fn is_local_isomorphism(psi: &PresheafMap) -> Result<bool> {
    Ok(local_isomorphism_failure(psi)?.is_none())
}

pub fn local_isomorphism_failure(psi: &PresheafMap) -> Result<Option<LocalIsoFailure>> {
    let a = &psi.source;
    let b = &psi.target;
    let space = a.space();
    let k = a.n_opens();
    for s in 0..k {
        let (sub, embedding) = space.subspace(space.opens()[s])?;
        for sec in 0..b.size(s) {
            let mut elems = Vec::new();
            for v in 0..k {
                if !subset(space, v, s) {
                    continue;
                }
                let tb = b.restrict(s, v, sec);
                for x in 0..a.size(v) {
                    if psi.components[v][x] == tb {
                        elems.push((v, x));
                    }
                }
            }
            let labels: Vec<String> = elems
                .iter()
                .map(|&(v, x)| format!("{}#{x}", space.open_id(space.opens()[v])))
                .collect();
            let leq: Vec<Vec<bool>> = elems
                .iter()
                .map(|&(v, x)| {
                    elems
                        .iter()
                        .map(|&(w, y)| subset(space, v, w) && a.restrict(w, v, y) == x)
                        .collect()
                })
                .collect();
            let poset = FinitePoset::new(labels, &leq)?;
            let assignment = elems
                .iter()
                .map(|&(v, _)| pull_into(space.opens()[v], &embedding))
                .collect();
            let d = AtlasDiagram::new(poset, sub.clone(), assignment)?;
            if !d.is_site() {
                return Ok(Some(LocalIsoFailure { open: s, section: sec }));
            }
        }
    }
    Ok(None)
}

/// Whether precomposition `Hom(B, F) → Hom(A, F)` with `psi: A → B` is a bijection.
pub fn is_local_wrt(f: &Presheaf, psi: &PresheafMap) -> Result<bool> {
    Ok(LocalityCheck::new(psi)?.holds(f))
}

/// [`is_local_wrt`] for one fixed `psi` against many presheaves.
#[derive(Clone, Debug)]
pub struct LocalityCheck {
    source: GluingProblem,
    target: GluingProblem,
    /// Position in a `Hom(B, F)` family of the image of each element of `A`.
    pulled: Vec<usize>,
}

impl LocalityCheck {
    pub fn new(psi: &PresheafMap) -> Result<Self> {
        let a = &psi.source;
        let b = &psi.target;
        let mut offset_b = vec![0; b.n_opens() + 1];
        for u in 0..b.n_opens() {
            offset_b[u + 1] = offset_b[u] + b.size(u);
        }
        let pulled = (0..a.n_opens())
            .flat_map(|u| (0..a.size(u)).map(move |x| (u, x)))
            .map(|(u, x)| offset_b[u] + psi.components[u][x])
            .collect();
        Ok(LocalityCheck {
            source: GluingProblem::elements(a, None)?,
            target: GluingProblem::elements(b, None)?,
            pulled,
        })
    }

    pub fn holds(&self, f: &Presheaf) -> bool {
        let homs_b = self.target.families(f, None);
        let mut images: Vec<Vec<usize>> = homs_b
            .iter()
            .map(|h| self.pulled.iter().map(|&i| h[i]).collect())
            .collect();
        images.sort_unstable();
        images.dedup();
        images.len() == homs_b.len() && self.source.families(f, Some(homs_b.len() + 1)).len() == homs_b.len()
    }
}

/// The presheaf `colim_I Hom(-, U_i)` and its map to `Hom(-, ⋃U_i)`.
/// Sections over `V` are the connected components of `{ i : V ⊆ U_i }`.
pub fn atlas_colimit(u: &AtlasDiagram) -> Result<PresheafMap> {
    let space = u.space();
    let k = space.opens().len();
    let idx = u.index();
    let n = idx.len();
    let comps: Vec<Vec<usize>> = (0..k)
        .map(|v| {
            let over: Vec<usize> = (0..n).filter(|&i| space.opens()[v].is_subset(u.open(i))).collect();
            let mut comp = vec![usize::MAX; n];
            let mut next = 0;
            for &start in &over {
                if comp[start] != usize::MAX {
                    continue;
                }
                let mut stack = vec![start];
                comp[start] = next;
                while let Some(x) = stack.pop() {
                    for &y in &over {
                        if comp[y] == usize::MAX && (idx.leq(x, y) || idx.leq(y, x)) {
                            comp[y] = next;
                            stack.push(y);
                        }
                    }
                }
                next += 1;
            }
            comp
        })
        .collect();
    let sizes: Vec<usize> = comps
        .iter()
        .map(|c| c.iter().filter(|&&x| x != usize::MAX).max().map_or(0, |m| m + 1))
        .collect();
    let tables = (0..k * k)
        .map(|z| {
            let (w, v) = (z / k, z % k);
            if !subset(space, v, w) {
                return Vec::new();
            }
            (0..sizes[w])
                .map(|c| {
                    let i = comps[w].iter().position(|&x| x == c).expect("component has a member");
                    comps[v][i]
                })
                .collect()
        })
        .collect();
    let colim = Presheaf::from_tables(space.clone(), sizes, tables)?;
    let rep = Presheaf::representable(space, u.covered())?;
    PresheafMap::to_subterminal(&colim, &rep)
}

/// Result of sheafification: the sheaf and the unit map from the input.
#[derive(Clone, Debug)]
pub struct Sheafification {
    pub sheaf: Presheaf,
    pub unit: PresheafMap,
    pub rounds: usize,
}

/// One plus-construction step over minimal covering sieves.
pub fn plus(f: &Presheaf) -> Result<PresheafMap> {
    let space = f.space();
    let k = f.n_opens();
    let sieves: Vec<Vec<usize>> = (0..k).map(|s| minimal_covering_sieve(space, s)).collect();
    let mut fams: Vec<Vec<Vec<usize>>> = Vec::with_capacity(k);
    for (s, members) in sieves.iter().enumerate() {
        let p = GluingProblem::sieve(space, Some(s), members.clone())?;
        let mut v = p.families(f, None);
        v.sort_unstable();
        fams.push(v);
    }
    let lookup: Vec<HashMap<&[usize], usize>> = fams
        .iter()
        .map(|v| v.iter().enumerate().map(|(i, x)| (x.as_slice(), i)).collect())
        .collect();
    let sizes: Vec<usize> = fams.iter().map(Vec::len).collect();
    let mut tables = vec![Vec::new(); k * k];
    for s in 0..k {
        for t in 0..k {
            if !subset(space, t, s) {
                continue;
            }
            let pos: Vec<usize> = sieves[t]
                .iter()
                .map(|m| sieves[s].iter().position(|x| x == m).expect("smaller sieve"))
                .collect();
            tables[s * k + t] = fams[s]
                .iter()
                .map(|fam| {
                    let proj: Vec<usize> = pos.iter().map(|&p| fam[p]).collect();
                    lookup[t][proj.as_slice()]
                })
                .collect();
        }
    }
    let out = Presheaf::from_tables(space.clone(), sizes, tables)?;
    let unit = (0..k)
        .map(|s| {
            (0..f.size(s))
                .map(|x| {
                    let fam: Vec<usize> = sieves[s].iter().map(|&m| f.restrict(s, m, x)).collect();
                    lookup[s][fam.as_slice()]
                })
                .collect()
        })
        .collect();
    PresheafMap::new(f.clone(), out, unit)
}

/// Iterates the plus construction until the result is a sheaf.
pub fn sheafify(f: &Presheaf) -> Result<Sheafification> {
    let mut unit = PresheafMap::identity(f);
    let mut rounds = 0;
    while !is_sheaf(unit.target()) {
        let step = plus(unit.target())?;
        unit = unit.then(&step)?;
        rounds += 1;
        if rounds > 3 {
            return Err(Error::Precondition("plus construction did not stabilise".into()));
        }
    }
    Ok(Sheafification {
        sheaf: unit.target().clone(),
        unit,
        rounds,
    })
}
