//! Atlases and sites of finite spaces.
//!
//! An [`AtlasDiagram`] is a monotone map from an index poset into the opens of
//! a [`FiniteSpace`]. The diagram is an atlas when the opens cover the space
//! and every pairwise intersection `U_i ∩ U_j` is the union of the `U_k` with
//! `k` below both `i` and `j`. Assignments need not be injective.

use std::fmt;

use crate::error::{Error, Result};
use crate::lattice::{pull_into, FinitePoset, FiniteSpace, PointSet, Sieve, DEFAULT_SIEVE_BOUND};

/// A monotone diagram `I → 𝒰(X)` of open subsets.
#[derive(Clone, PartialEq, Eq)]
pub struct AtlasDiagram {
    index: FinitePoset,
    space: FiniteSpace,
    assignment: Vec<PointSet>,
}

impl fmt::Debug for AtlasDiagram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let assignment: Vec<(String, String)> = (0..self.index.len())
            .map(|i| {
                (
                    self.index.label(i).to_string(),
                    self.space.open_id(self.assignment[i]),
                )
            })
            .collect();
        f.debug_struct("AtlasDiagram")
            .field("space", &self.space)
            .field("index", &self.index)
            .field("assignment", &assignment)
            .finish()
    }
}

/// Why a diagram fails the cover form of the atlas condition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AtlasFailure {
    /// Points of the space not covered by any `U_i`.
    NotCovering { missing: PointSet },
    /// Points of `U_i ∩ U_j` not covered by any `U_k`, `k <= i, j`.
    Intersection { i: usize, j: usize, missing: PointSet },
}

impl AtlasDiagram {
    pub fn new(index: FinitePoset, space: FiniteSpace, assignment: Vec<PointSet>) -> Result<Self> {
        if assignment.len() != index.len() {
            return Err(Error::DimensionMismatch {
                what: "diagram assignment",
                expected: index.len(),
                got: assignment.len(),
            });
        }
        for (i, &u) in assignment.iter().enumerate() {
            if !space.is_open(u) {
                return Err(Error::invariant(
                    "assignment_values_open",
                    format!("U_{} = {} is not open", index.label(i), space.open_id(u)),
                ));
            }
        }
        for i in 0..index.len() {
            for j in 0..index.len() {
                if index.leq(i, j) && !assignment[i].is_subset(assignment[j]) {
                    return Err(Error::invariant(
                        "assignment_monotone",
                        format!(
                            "{} <= {} but U_{} ⊄ U_{}",
                            index.label(i),
                            index.label(j),
                            index.label(i),
                            index.label(j)
                        ),
                    ));
                }
            }
        }
        Ok(AtlasDiagram {
            index,
            space,
            assignment,
        })
    }

    /// The one-element diagram picking the whole space.
    pub fn trivial(space: &FiniteSpace) -> Self {
        let full = space.full();
        Self::new(FinitePoset::chain(1), space.clone(), vec![full]).expect("trivial atlas")
    }

    /// The identity `𝒰(X) → 𝒰(X)`.
    pub fn tautological(space: &FiniteSpace) -> Self {
        Self::new(space.frame_of(), space.clone(), space.opens().to_vec()).expect("tautological atlas")
    }

    /// The constant diagram with value `open`.
    pub fn constant(index: FinitePoset, space: &FiniteSpace, open: PointSet) -> Result<Self> {
        let n = index.len();
        Self::new(index, space.clone(), vec![open; n])
    }

    /// The inclusion of a family of opens, ordered by inclusion.
    pub fn inclusion(space: &FiniteSpace, opens: &[PointSet]) -> Result<Self> {
        let mut opens = opens.to_vec();
        opens.sort();
        opens.dedup();
        let labels = opens.iter().map(|&o| space.open_id(o)).collect();
        let leq: Vec<Vec<bool>> = opens
            .iter()
            .map(|a| opens.iter().map(|b| a.is_subset(*b)).collect())
            .collect();
        Self::new(FinitePoset::new(labels, &leq)?, space.clone(), opens)
    }

    pub fn index(&self) -> &FinitePoset {
        &self.index
    }

    pub fn space(&self) -> &FiniteSpace {
        &self.space
    }

    pub fn assignment(&self) -> &[PointSet] {
        &self.assignment
    }

    pub fn open(&self, i: usize) -> PointSet {
        self.assignment[i]
    }

    /// The Yoneda extension `K ↦ ⋃_{k∈K} U_k`.
    pub fn union_of(&self, sieve: &Sieve) -> PointSet {
        sieve
            .members()
            .fold(PointSet::EMPTY, |acc, k| acc.union(self.assignment[k]))
    }

    pub fn covered(&self) -> PointSet {
        self.assignment
            .iter()
            .fold(PointSet::EMPTY, |acc, &u| acc.union(u))
    }

    /// First failure of the cover condition, scanning pairs in index order.
    pub fn cover_condition_failure(&self) -> Option<AtlasFailure> {
        let full = self.space.full();
        let covered = self.covered();
        if covered != full {
            return Some(AtlasFailure::NotCovering {
                missing: PointSet(full.0 & !covered.0),
            });
        }
        let n = self.index.len();
        for i in 0..n {
            for j in i..n {
                let meet = self.assignment[i].intersection(self.assignment[j]);
                let below = self
                    .index
                    .lower_bounds(i, j)
                    .fold(PointSet::EMPTY, |acc, k| acc.union(self.assignment[k]));
                if below != meet {
                    return Some(AtlasFailure::Intersection {
                        i,
                        j,
                        missing: PointSet(meet.0 & !below.0),
                    });
                }
            }
        }
        None
    }

    /// `⋃ U_i = X` and `U_i ∩ U_j = ⋃_{k <= i, j} U_k` for all `i, j`.
    pub fn is_atlas_cover_condition(&self) -> bool {
        self.cover_condition_failure().is_none()
    }

    /// Shorthand for the cover condition.
    pub fn is_atlas(&self) -> bool {
        self.is_atlas_cover_condition()
    }

    /// Whether the Yoneda extension `𝒰(I) → 𝒰(X)` preserves binary meets
    /// and sends the top sieve to `X`.
    pub fn is_atlas_meet_condition(&self, bound: usize) -> Result<bool> {
        let sieves = self.index.sieve_lattice(bound)?;
        if self.union_of(&self.index.top_sieve()) != self.space.full() {
            return Ok(false);
        }
        let images: Vec<PointSet> = sieves.iter().map(|s| self.union_of(s)).collect();
        for (a, ia) in sieves.iter().zip(&images) {
            for (b, ib) in sieves.iter().zip(&images) {
                if self.union_of(&a.meet(b)) != ia.intersection(*ib) {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    pub fn is_atlas_meet_condition_default(&self) -> Result<bool> {
        self.is_atlas_meet_condition(DEFAULT_SIEVE_BOUND)
    }

    /// An atlas whose Yoneda extension is onto: every open is the union of
    /// the `U_k` it contains.
    pub fn is_site(&self) -> bool {
        self.is_atlas() && self.site_gap().is_none()
    }

    /// An open that is not a union of members of the diagram, if any.
    pub fn site_gap(&self) -> Option<PointSet> {
        self.space.opens().iter().copied().find(|&v| {
            let inside = self
                .assignment
                .iter()
                .filter(|u| u.is_subset(v))
                .fold(PointSet::EMPTY, |acc, &u| acc.union(u));
            inside != v
        })
    }

    /// The largest sieve whose members land inside `v`.
    pub fn sieve_below(&self, v: PointSet) -> Sieve {
        self.index
            .sieve((0..self.index.len()).filter(|&i| self.assignment[i].is_subset(v)))
            .expect("monotone preimage of a down-set is a sieve")
    }

    /// Restriction to a sieve `K`, as a diagram of the open subspace `U_K`.
    pub fn restrict_to_sieve(&self, sieve: &Sieve) -> Result<AtlasDiagram> {
        if !self.index.is_sieve(sieve.bits()) {
            return Err(Error::invariant("sieve_downward_closed", format!("{sieve:?}")));
        }
        let members: Vec<usize> = sieve.members().collect();
        let target = self.union_of(sieve);
        let (sub, embedding) = self.space.subspace(target)?;
        let assignment = members
            .iter()
            .map(|&k| pull_into(self.assignment[k], &embedding))
            .collect();
        AtlasDiagram::new(self.index.subposet(&members), sub, assignment)
    }

    /// Pullback along a continuous map into this diagram's space.
    pub fn pullback(&self, f: &ContinuousMap) -> Result<PullbackAtlas> {
        if f.target != self.space {
            return Err(Error::Precondition(
                "map target differs from the diagram's space".into(),
            ));
        }
        let assignment = self.assignment.iter().map(|&u| f.preimage(u)).collect();
        let diagram = AtlasDiagram::new(self.index.clone(), f.source.clone(), assignment)?;
        Ok(PullbackAtlas {
            diagram,
            input_was_atlas: self.is_atlas(),
        })
    }
}

/// Result of [`AtlasDiagram::pullback`]; the pullback of a non-atlas is still
/// returned, flagged.
#[derive(Clone, Debug)]
pub struct PullbackAtlas {
    pub diagram: AtlasDiagram,
    pub input_was_atlas: bool,
}

/// A continuous map of finite spaces.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContinuousMap {
    source: FiniteSpace,
    target: FiniteSpace,
    point_map: Vec<usize>,
}

impl ContinuousMap {
    pub fn new(source: FiniteSpace, target: FiniteSpace, point_map: Vec<usize>) -> Result<Self> {
        if point_map.len() != source.n_points() {
            return Err(Error::DimensionMismatch {
                what: "point map",
                expected: source.n_points(),
                got: point_map.len(),
            });
        }
        if let Some(&bad) = point_map.iter().find(|&&q| q >= target.n_points()) {
            return Err(Error::UnknownElement(format!("target point #{bad}")));
        }
        let map = ContinuousMap {
            source,
            target,
            point_map,
        };
        for &v in map.target.opens() {
            let pre = map.preimage(v);
            if !map.source.is_open(pre) {
                return Err(Error::invariant(
                    "map_continuous",
                    format!("preimage of {} is not open", map.target.open_id(v)),
                ));
            }
        }
        Ok(map)
    }

    pub fn identity(space: &FiniteSpace) -> Self {
        Self::new(space.clone(), space.clone(), (0..space.n_points()).collect()).expect("identity")
    }

    /// Inclusion of the open subspace on `u`.
    pub fn open_inclusion(space: &FiniteSpace, u: PointSet) -> Result<Self> {
        let (sub, embedding) = space.subspace(u)?;
        Self::new(sub, space.clone(), embedding)
    }

    pub fn source(&self) -> &FiniteSpace {
        &self.source
    }

    pub fn target(&self) -> &FiniteSpace {
        &self.target
    }

    pub fn preimage(&self, v: PointSet) -> PointSet {
        PointSet::from_indices((0..self.point_map.len()).filter(|&p| v.contains(self.point_map[p])))
    }
}

/// Atlas completion of an open cover: indexed by the inhabited subsets `J`
/// of the cover, ordered by reverse inclusion, with `U_J = ⋂_{j∈J} U_j`.
pub fn atlas_completion(space: &FiniteSpace, cover: &[PointSet]) -> Result<AtlasDiagram> {
    const MAX_COVER: usize = 12;
    if cover.len() > MAX_COVER {
        return Err(Error::BoundExceeded {
            what: "cover size for atlas completion",
            value: cover.len(),
            limit: MAX_COVER,
        });
    }
    let covered = cover.iter().fold(PointSet::EMPTY, |acc, &u| acc.union(u));
    if covered != space.full() {
        return Err(Error::Precondition(format!(
            "cover misses {}",
            space.open_id(PointSet(space.full().0 & !covered.0))
        )));
    }
    let n = cover.len();
    let subsets: Vec<u32> = (1u32..(1u32 << n)).collect();
    let labels = subsets
        .iter()
        .map(|&s| {
            let ids: Vec<String> = (0..n).filter(|j| s >> j & 1 == 1).map(|j| j.to_string()).collect();
            format!("{{{}}}", ids.join(","))
        })
        .collect();
    let leq: Vec<Vec<bool>> = subsets
        .iter()
        .map(|&a| subsets.iter().map(|&b| a & b == b).collect())
        .collect();
    let assignment = subsets
        .iter()
        .map(|&s| {
            (0..n)
                .filter(|j| s >> j & 1 == 1)
                .fold(space.full(), |acc, j| acc.intersection(cover[j]))
        })
        .collect();
    AtlasDiagram::new(FinitePoset::new(labels, &leq)?, space.clone(), assignment)
}

/// A monotone map `η: J → 𝒰(I)` into the sieves of an index poset.
#[derive(Clone, Debug)]
pub struct SieveMap {
    pub domain: FinitePoset,
    pub sieves: Vec<Sieve>,
}

impl SieveMap {
    pub fn new(domain: FinitePoset, sieves: Vec<Sieve>) -> Result<Self> {
        if sieves.len() != domain.len() {
            return Err(Error::DimensionMismatch {
                what: "sieve map",
                expected: domain.len(),
                got: sieves.len(),
            });
        }
        for a in 0..domain.len() {
            for b in 0..domain.len() {
                if domain.leq(a, b) && !sieves[a].is_subset(&sieves[b]) {
                    return Err(Error::invariant(
                        "sieve_map_monotone",
                        format!("{} <= {} but η is not increasing", domain.label(a), domain.label(b)),
                    ));
                }
            }
        }
        Ok(SieveMap { domain, sieves })
    }

    /// Binary meets and the empty meet are preserved, checked over all pairs:
    /// `η(a) ∩ η(b) = ⋃_{c <= a, b} η(c)` and `⋃_a η(a) = I`.
    pub fn left_exactness_failure(&self, index: &FinitePoset) -> Option<String> {
        let top = self
            .sieves
            .iter()
            .fold(Sieve::empty(index.len()), |acc, s| acc.join(s));
        if top != index.top_sieve() {
            return Some("η does not preserve the empty meet".into());
        }
        let n = self.domain.len();
        for a in 0..n {
            for b in a..n {
                let meet = self.sieves[a].meet(&self.sieves[b]);
                let below = self
                    .domain
                    .lower_bounds(a, b)
                    .fold(Sieve::empty(index.len()), |acc, c| acc.join(&self.sieves[c]));
                if meet != below {
                    return Some(format!(
                        "η({}) ∧ η({}) is not covered by η of common lower bounds",
                        self.domain.label(a),
                        self.domain.label(b)
                    ));
                }
            }
        }
        None
    }
}

impl SieveMap {
    /// Left exactness measured in `𝒰(X)` through the Yoneda extension of `u`:
    /// `U(η(a) ∩ η(b)) = U(⋃_{c <= a, b} η(c))` and `U(⋃_a η(a)) = X`.
    pub fn relative_left_exactness_failure(&self, u: &AtlasDiagram) -> Option<String> {
        let n_i = u.index().len();
        let top = self
            .sieves
            .iter()
            .fold(Sieve::empty(n_i), |acc, s| acc.join(s));
        if u.union_of(&top) != u.space().full() {
            return Some("U(⋃ η) does not cover X".into());
        }
        let n = self.domain.len();
        for a in 0..n {
            for b in a..n {
                let meet = u.union_of(&self.sieves[a].meet(&self.sieves[b]));
                let below = self
                    .domain
                    .lower_bounds(a, b)
                    .fold(PointSet::EMPTY, |acc, c| acc.union(u.union_of(&self.sieves[c])));
                if meet != below {
                    return Some(format!(
                        "U(η({}) ∧ η({})) differs from the union over common lower bounds",
                        self.domain.label(a),
                        self.domain.label(b)
                    ));
                }
            }
        }
        None
    }
}

/// The diagram over `I↓J = {(i, j) : i ∈ η(j)}`, pulled back along the
/// projection to `I`.
#[derive(Clone, Debug)]
pub struct ComposedAtlas {
    pub diagram: AtlasDiagram,
    /// For each index of the result, the pair `(i, j)` it stands for.
    pub pairs: Vec<(usize, usize)>,
}

impl ComposedAtlas {
    /// The containment witness `j` with `U_k ⊆ V_j` for index `k`.
    pub fn witness(&self, k: usize) -> usize {
        self.pairs[k].1
    }
}

/// Composition of atlases along a left exact `η: J → 𝒰(I)`.
///
/// Checks that `η` is left exact, that `j ↦ U_{η(j)}` is an atlas of `X`,
/// and that each restriction `U|η(j)` is an atlas of `U_{η(j)}`.
pub fn compose_atlases(u: &AtlasDiagram, eta: &SieveMap) -> Result<ComposedAtlas> {
    let index = u.index();
    if let Some(why) = eta.left_exactness_failure(index) {
        return Err(Error::Precondition(format!("η is not left exact: {why}")));
    }
    let outer = AtlasDiagram::new(
        eta.domain.clone(),
        u.space().clone(),
        eta.sieves.iter().map(|s| u.union_of(s)).collect(),
    )?;
    if !outer.is_atlas() {
        return Err(Error::Precondition("U|J is not an atlas of X".into()));
    }
    for (j, s) in eta.sieves.iter().enumerate() {
        if !u.restrict_to_sieve(s)?.is_atlas() {
            return Err(Error::Precondition(format!(
                "U|I↓{} is not an atlas of U_{}",
                eta.domain.label(j),
                eta.domain.label(j)
            )));
        }
    }
    Ok(slice_product(u, eta))
}

fn slice_product(u: &AtlasDiagram, eta: &SieveMap) -> ComposedAtlas {
    let index = u.index();
    let mut pairs = Vec::new();
    for j in 0..eta.domain.len() {
        for i in eta.sieves[j].members() {
            pairs.push((i, j));
        }
    }
    let labels = pairs
        .iter()
        .map(|&(i, j)| format!("({},{})", index.label(i), eta.domain.label(j)))
        .collect();
    let leq: Vec<Vec<bool>> = pairs
        .iter()
        .map(|&(i, j)| {
            pairs
                .iter()
                .map(|&(i2, j2)| index.leq(i, i2) && eta.domain.leq(j, j2))
                .collect()
        })
        .collect();
    let poset = FinitePoset::new(labels, &leq).expect("subposet of a product");
    let assignment = pairs.iter().map(|&(i, _)| u.open(i)).collect();
    let diagram =
        AtlasDiagram::new(poset, u.space().clone(), assignment).expect("pullback of a monotone map");
    ComposedAtlas { diagram, pairs }
}

/// Subordination of a site `U|I` to an atlas `V|J` of the same space, via
/// `η(j) = { i : U_i ⊆ V_j }`.
pub fn subordinate(site: &AtlasDiagram, atlas: &AtlasDiagram) -> Result<ComposedAtlas> {
    if site.space() != atlas.space() {
        return Err(Error::Precondition("site and atlas live on different spaces".into()));
    }
    if !site.is_site() {
        return Err(Error::Precondition("first argument is not a site".into()));
    }
    if !atlas.is_atlas() {
        return Err(Error::Precondition("second argument is not an atlas".into()));
    }
    let sieves = (0..atlas.index().len())
        .map(|j| site.sieve_below(atlas.open(j)))
        .collect();
    let eta = SieveMap::new(atlas.index().clone(), sieves)?;
    // The right adjoint is left exact only after applying U: members with
    // U_i outside every V_j are dropped, so the strict check does not apply.
    if let Some(why) = eta.relative_left_exactness_failure(site) {
        return Err(Error::Precondition(format!("η is not left exact over U: {why}")));
    }
    let composed = slice_product(site, &eta);
    if !composed.diagram.is_site() {
        return Err(Error::Precondition("subordinated diagram is not a site".into()));
    }
    Ok(composed)
}

/// Checks that `V_i ⊆ U_i` and `V_i ∩ U_j = V_j` for `j <= i`, and returns `V`
/// as a diagram of the open subspace `⋃ V_i`.
pub fn cartesian_subfamily(u: &AtlasDiagram, v: &[PointSet]) -> Result<Option<AtlasDiagram>> {
    if v.len() != u.index().len() {
        return Err(Error::DimensionMismatch {
            what: "subfamily",
            expected: u.index().len(),
            got: v.len(),
        });
    }
    let n = v.len();
    for i in 0..n {
        if !v[i].is_subset(u.open(i)) || !u.space().is_open(v[i]) {
            return Ok(None);
        }
        for j in 0..n {
            if u.index().leq(j, i) && v[i].intersection(u.open(j)) != v[j] {
                return Ok(None);
            }
        }
    }
    let union = v.iter().fold(PointSet::EMPTY, |acc, &x| acc.union(x));
    let (sub, embedding) = u.space().subspace(union)?;
    let assignment = v.iter().map(|&x| pull_into(x, &embedding)).collect();
    Ok(Some(AtlasDiagram::new(u.index().clone(), sub, assignment)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn disjoint_two() -> AtlasDiagram {
        let x = FiniteSpace::discrete(2);
        AtlasDiagram::new(
            FinitePoset::antichain(&["i", "j"]),
            x,
            vec![PointSet(0b01), PointSet(0b10)],
        )
        .unwrap()
    }

    fn v_poset() -> FinitePoset {
        FinitePoset::from_label_pairs(&["k", "i", "j"], &[("k", "i"), ("k", "j")]).unwrap()
    }

    #[test]
    fn cover_condition_examples() {
        assert!(disjoint_two().is_atlas_cover_condition());
        let x = FiniteSpace::discrete(2);
        let both_full = AtlasDiagram::new(
            FinitePoset::antichain(&["i", "j"]),
            x.clone(),
            vec![x.full(), x.full()],
        )
        .unwrap();
        assert!(!both_full.is_atlas_cover_condition());
        assert_eq!(
            both_full.cover_condition_failure(),
            Some(AtlasFailure::Intersection {
                i: 0,
                j: 1,
                missing: x.full()
            })
        );
        // V-poset with U_k = U_i ∩ U_j: an atlas whenever U_i ∪ U_j = X.
        let d3 = FiniteSpace::discrete(3);
        for &ui in d3.opens() {
            for &uj in d3.opens() {
                let diag = AtlasDiagram::new(v_poset(), d3.clone(), vec![ui.intersection(uj), ui, uj])
                    .unwrap();
                assert_eq!(diag.is_atlas_cover_condition(), ui.union(uj) == d3.full());
            }
        }
    }

    #[test]
    fn meet_condition_examples() {
        assert!(disjoint_two().is_atlas_meet_condition(12).unwrap());
        for sp in [FiniteSpace::sierpinski(), FiniteSpace::discrete(2), FiniteSpace::discrete(3)] {
            assert!(AtlasDiagram::trivial(&sp).is_atlas_meet_condition(12).unwrap());
            assert!(AtlasDiagram::tautological(&sp).is_atlas_meet_condition(12).unwrap());
        }
    }

    #[test]
    fn site_examples() {
        for sp in [FiniteSpace::sierpinski(), FiniteSpace::discrete(3), FiniteSpace::indiscrete(2)] {
            assert!(AtlasDiagram::tautological(&sp).is_site());
        }
        assert!(disjoint_two().is_site());
        // Basis example: singletons and X on the discrete 3-point space.
        let d3 = FiniteSpace::discrete(3);
        let basis = AtlasDiagram::inclusion(
            &d3,
            &[PointSet::EMPTY, PointSet(1), PointSet(2), PointSet(4), d3.full()],
        )
        .unwrap();
        assert!(basis.is_site());
        let not_basis =
            AtlasDiagram::inclusion(&d3, &[PointSet::EMPTY, PointSet(3), PointSet(4), d3.full()]).unwrap();
        assert!(not_basis.is_atlas());
        assert!(!not_basis.is_site());
        assert_eq!(not_basis.site_gap(), Some(PointSet(1)));
    }

    #[test]
    fn completion_examples() {
        let x = FiniteSpace::discrete(2);
        let one = atlas_completion(&x, &[x.full()]).unwrap();
        assert_eq!(one.index().len(), 1);
        let two = atlas_completion(&x, &[PointSet(0b01), x.full()]).unwrap();
        assert_eq!(two.index().len(), 3);
        assert!(two.is_atlas());
        let d3 = FiniteSpace::discrete(3);
        let three = atlas_completion(&d3, &[PointSet(0b011), PointSet(0b110), PointSet(0b101)]).unwrap();
        assert_eq!(three.index().len(), 7);
        assert!(three.is_atlas());
        assert!(atlas_completion(&d3, &[PointSet(0b011)]).is_err());
    }

    #[test]
    fn pullback_examples() {
        let x = FiniteSpace::discrete(2);
        let a = disjoint_two();
        let id = ContinuousMap::identity(&x);
        let p = a.pullback(&id).unwrap();
        assert_eq!(p.diagram, a);
        assert!(p.input_was_atlas);

        // Constant map from a point into X, filtered constant atlas stays an atlas.
        let pt = FiniteSpace::point();
        let c = ContinuousMap::new(pt.clone(), x.clone(), vec![0]).unwrap();
        let consta = AtlasDiagram::constant(v_poset(), &x, x.full()).unwrap();
        let p = consta.pullback(&c).unwrap();
        assert!(p.diagram.is_atlas());
        assert!(p.diagram.assignment().iter().all(|&u| u == pt.full()));

        // Inclusion of an open subspace pulls the tautological atlas back to
        // the tautological atlas of the subspace (as a non-injective diagram).
        let d3 = FiniteSpace::discrete(3);
        let inc = ContinuousMap::open_inclusion(&d3, PointSet(0b011)).unwrap();
        let p = AtlasDiagram::tautological(&d3).pullback(&inc).unwrap();
        assert!(p.diagram.is_atlas());
        let mut images: Vec<PointSet> = p.diagram.assignment().to_vec();
        images.sort();
        images.dedup();
        assert_eq!(images, inc.source().opens().to_vec());

        // Non-atlas: still returned, flagged.
        let bad = AtlasDiagram::new(
            FinitePoset::antichain(&["i", "j"]),
            x.clone(),
            vec![x.full(), x.full()],
        )
        .unwrap();
        assert!(!bad.pullback(&id).unwrap().input_was_atlas);
    }

    #[test]
    fn continuity_checked() {
        let s = FiniteSpace::sierpinski();
        let d = FiniteSpace::discrete(2);
        // identity on points from Sierpiński to discrete is not continuous
        let e = ContinuousMap::new(s, d, vec![0, 1]);
        assert!(matches!(e, Err(Error::Invariant { name: "map_continuous", .. })));
    }

    #[test]
    fn restriction_examples() {
        let a = AtlasDiagram::tautological(&FiniteSpace::discrete(2));
        let whole = a.restrict_to_sieve(&a.index().top_sieve()).unwrap();
        assert_eq!(whole, a);
        let empty = a.restrict_to_sieve(&Sieve::empty(a.index().len())).unwrap();
        assert_eq!(empty.space().n_points(), 0);
        assert!(empty.index().is_empty());
        assert!(empty.is_atlas());
        let v = disjoint_two();
        let r = v.restrict_to_sieve(&v.index().downset(0).unwrap()).unwrap();
        assert!(r.is_atlas());
        assert_eq!(r.space().n_points(), 1);
        let mut bits = fixedbitset::FixedBitSet::with_capacity(3);
        bits.insert(1);
        let vp = AtlasDiagram::constant(v_poset(), &FiniteSpace::point(), PointSet(1)).unwrap();
        assert!(vp.index().sieve([1]).is_err());
    }

    #[test]
    fn compose_trivial_outer() {
        let u = disjoint_two();
        let eta = SieveMap::new(FinitePoset::chain(1), vec![u.index().top_sieve()]).unwrap();
        let c = compose_atlases(&u, &eta).unwrap();
        assert_eq!(c.diagram.index().len(), u.index().len());
        assert_eq!(c.diagram.assignment(), u.assignment());
        assert!(c.diagram.is_atlas());
    }

    #[test]
    fn compose_rejects_non_left_exact() {
        let u = disjoint_two();
        // η picks the same full sieve twice over an antichain: meet not covered.
        let eta = SieveMap::new(
            FinitePoset::antichain(&["p", "q"]),
            vec![u.index().top_sieve(), u.index().top_sieve()],
        )
        .unwrap();
        assert!(matches!(compose_atlases(&u, &eta), Err(Error::Precondition(_))));
    }

    #[test]
    fn subordinate_examples() {
        let d3 = FiniteSpace::discrete(3);
        let taut = AtlasDiagram::tautological(&d3);
        let triv = AtlasDiagram::trivial(&d3);
        let s = subordinate(&taut, &triv).unwrap();
        assert_eq!(s.diagram.index().len(), taut.index().len());
        assert!(s.diagram.is_site());

        let cover = atlas_completion(&d3, &[PointSet(0b011), PointSet(0b110)]).unwrap();
        let s = subordinate(&taut, &cover).unwrap();
        assert!(s.diagram.is_site());
        for k in 0..s.diagram.index().len() {
            assert!(s.diagram.open(k).is_subset(cover.open(s.witness(k))));
        }
        // Direct construction oracle: the distinct member opens are exactly
        // the opens contained in some V_j.
        let mut got: Vec<PointSet> = s.diagram.assignment().to_vec();
        got.sort();
        got.dedup();
        let want: Vec<PointSet> = d3
            .opens()
            .iter()
            .copied()
            .filter(|o| cover.assignment().iter().any(|v| o.is_subset(*v)))
            .collect();
        assert_eq!(got, want);

        let both = subordinate(&taut, &taut).unwrap();
        assert!(both.diagram.is_site());
        assert!(subordinate(&cover, &taut).is_err());
    }

    #[test]
    fn cartesian_descent_small() {
        let d3 = FiniteSpace::discrete(3);
        let u = atlas_completion(&d3, &[PointSet(0b011), PointSet(0b110)]).unwrap();
        // V = U ∩ W for an open W is Cartesian
        let w = PointSet(0b101);
        let v: Vec<PointSet> = u.assignment().iter().map(|x| x.intersection(w)).collect();
        let d = cartesian_subfamily(&u, &v).unwrap().expect("cartesian");
        assert!(d.is_atlas());
    }
}
