//! Exhaustive and seeded property sweeps.
//!
//! Every suite enumerates its instances in a fixed order, evaluates them in
//! parallel, and reduces in enumeration order, so reports are identical for
//! any thread count. The first disagreeing instance is serialized as the
//! counterexample.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::atlas::AtlasDiagram;
use crate::io::{AtlasJson, CospanJson, PointJson, PresheafJson};
use crate::lattice::{FinitePoset, FiniteSpace, PointSet};
use crate::qsmooth::corpus::corpus;
use crate::qsmooth::cospan::{is_transverse, tangent_complex, CospanPresentation, RationalPoint};
use crate::qsmooth::hochschild::interval_map_report;
use crate::qsmooth::jets::{jet_mapping_complex, nerve_cosimplicial_betti};
use crate::qsmooth::model::{hochschild_model, CosimplicialModel};
use crate::qsmooth::poly::Poly;
use crate::sheaf::{
    atlas_colimit, covering_sieves, is_local_isomorphism, minimal_covering_sieve, GluingProblem, LocalityCheck,
    Presheaf, PresheafMap,
};
use crate::simplicial::{atlas_to_hypercover_on, iota_test, IotaShape};
use crate::{Error, Result};

pub const SUITES: [&str; 5] = [
    "atlas-equiv",
    "hypercover-equiv",
    "sheaf-local",
    "transversality",
    "simplicial-identities",
];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SweepBounds {
    /// Largest number of points of an enumerated space.
    pub points: usize,
    /// Largest index poset.
    pub poset: usize,
    pub trunc: usize,
    pub jet: u32,
    pub levels: usize,
    pub corpus: usize,
    pub seed: u64,
}

impl Default for SweepBounds {
    fn default() -> Self {
        SweepBounds {
            points: 3,
            poset: 3,
            trunc: 3,
            jet: 2,
            levels: 3,
            corpus: 50,
            seed: 7,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SweepReport {
    pub suite: String,
    pub instances: usize,
    pub agree: usize,
    /// Suite-specific tallies.
    pub counts: BTreeMap<String, usize>,
    pub counterexample: Option<Value>,
}

impl SweepReport {
    pub fn passed(&self) -> bool {
        self.agree == self.instances && self.counterexample.is_none()
    }
}

fn ceiling(what: &'static str, value: usize, limit: usize) -> Result<()> {
    if value > limit {
        return Err(Error::BoundExceeded { what, value, limit });
    }
    Ok(())
}

pub fn run(suite: &str, bounds: &SweepBounds) -> Result<SweepReport> {
    match suite {
        "atlas-equiv" => atlas_equivalence(bounds),
        "hypercover-equiv" => hypercover_equivalence(bounds),
        "sheaf-local" => sheaf_locality(bounds),
        "transversality" => transversality(bounds),
        "simplicial-identities" => simplicial_identities(bounds),
        other => Err(Error::Precondition(format!(
            "unknown suite `{other}`; expected one of {}",
            SUITES.join(", ")
        ))),
    }
}

/// Every topology on `n` labelled points, in mask order.
pub fn topologies(n: usize) -> Vec<FiniteSpace> {
    assert!(n <= 4, "topology enumeration is bounded by 4 points");
    let full = PointSet::full(n);
    let middle: Vec<PointSet> = (1..full.0).map(PointSet).collect();
    let points: Vec<String> = (0..n).map(|i| format!("p{i}")).collect();
    let mut out = Vec::new();
    for mask in 0u64..(1 << middle.len()) {
        let mut opens = vec![PointSet::EMPTY];
        opens.extend(middle.iter().enumerate().filter(|(b, _)| mask >> b & 1 == 1).map(|(_, &s)| s));
        if n > 0 {
            opens.push(full);
        }
        let closed = opens.iter().all(|&a| {
            opens
                .iter()
                .all(|&b| opens.contains(&a.union(b)) && opens.contains(&a.intersection(b)))
        });
        if closed {
            out.push(FiniteSpace::new(points.clone(), opens).expect("closed family"));
        }
    }
    out
}

/// Every partial order on `n` labelled elements.
pub fn posets(n: usize) -> Vec<FinitePoset> {
    assert!(n <= 4, "poset enumeration is bounded by 4 elements");
    let labels: Vec<String> = (0..n).map(|i| format!("i{i}")).collect();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).filter(|(i, j)| i != j).collect();
    let mut out = Vec::new();
    for mask in 0u64..(1 << pairs.len()) {
        let mut leq = vec![vec![false; n]; n];
        for (i, row) in leq.iter_mut().enumerate() {
            row[i] = true;
        }
        for (b, &(i, j)) in pairs.iter().enumerate() {
            if mask >> b & 1 == 1 {
                leq[i][j] = true;
            }
        }
        let antisymmetric = pairs.iter().all(|&(i, j)| !(leq[i][j] && leq[j][i]));
        let transitive = (0..n).all(|i| (0..n).all(|j| (0..n).all(|k| !(leq[i][j] && leq[j][k]) || leq[i][k])));
        if antisymmetric && transitive {
            out.push(FinitePoset::new(labels.clone(), &leq).expect("partial order"));
        }
    }
    out
}

/// Every monotone assignment of opens to the elements of `index`.
pub fn monotone_diagrams(index: &FinitePoset, space: &FiniteSpace) -> Vec<AtlasDiagram> {
    let order = index.linear_extension();
    let opens = space.opens();
    let mut out = Vec::new();
    let mut assignment = vec![PointSet::EMPTY; index.len()];
    fn go(
        depth: usize,
        order: &[usize],
        index: &FinitePoset,
        space: &FiniteSpace,
        opens: &[PointSet],
        assignment: &mut Vec<PointSet>,
        out: &mut Vec<AtlasDiagram>,
    ) {
        if depth == order.len() {
            out.push(AtlasDiagram::new(index.clone(), space.clone(), assignment.clone()).expect("monotone"));
            return;
        }
        let i = order[depth];
        for &o in opens {
            // Elements earlier in the linear extension are never above `i`.
            if order[..depth]
                .iter()
                .all(|&j| !index.leq(j, i) || assignment[j].is_subset(o))
            {
                assignment[i] = o;
                go(depth + 1, order, index, space, opens, assignment, out);
            }
        }
    }
    go(0, &order, index, space, opens, &mut assignment, &mut out);
    out
}

struct Tally {
    instances: usize,
    agree: usize,
    counts: BTreeMap<String, usize>,
    counterexample: Option<Value>,
}

impl Tally {
    fn new() -> Self {
        Tally {
            instances: 0,
            agree: 0,
            counts: BTreeMap::new(),
            counterexample: None,
        }
    }

    fn bump(&mut self, key: &str, by: usize) {
        *self.counts.entry(key.to_string()).or_default() += by;
    }

    fn merge(mut self, other: Tally) -> Tally {
        self.instances += other.instances;
        self.agree += other.agree;
        for (k, v) in other.counts {
            *self.counts.entry(k).or_default() += v;
        }
        if self.counterexample.is_none() {
            self.counterexample = other.counterexample;
        }
        self
    }

    fn record(&mut self, ok: bool, witness: impl FnOnce() -> Value) {
        self.instances += 1;
        if ok {
            self.agree += 1;
        } else if self.counterexample.is_none() {
            self.counterexample = Some(witness());
        }
    }

    fn report(self, suite: &str) -> SweepReport {
        SweepReport {
            suite: suite.to_string(),
            instances: self.instances,
            agree: self.agree,
            counts: self.counts,
            counterexample: self.counterexample,
        }
    }
}

fn spaces_up_to(points: usize) -> Vec<FiniteSpace> {
    (0..=points).flat_map(topologies).collect()
}

fn posets_up_to(n: usize) -> Vec<FinitePoset> {
    (0..=n).flat_map(posets).collect()
}

/// Cover condition against meet condition on every monotone diagram.
fn atlas_equivalence(b: &SweepBounds) -> Result<SweepReport> {
    ceiling("points", b.points, 4)?;
    ceiling("poset size", b.poset, 4)?;
    let spaces = spaces_up_to(b.points);
    let posets = posets_up_to(b.poset);
    let jobs: Vec<(&FiniteSpace, &FinitePoset)> = spaces.iter().flat_map(|s| posets.iter().map(move |p| (s, p))).collect();
    let parts = jobs
        .par_iter()
        .map(|&(space, index)| {
            let mut t = Tally::new();
            for u in monotone_diagrams(index, space) {
                let cover = u.is_atlas_cover_condition();
                let meet = u.is_atlas_meet_condition_default()?;
                if cover {
                    t.bump("atlases", 1);
                }
                t.record(cover == meet, || {
                    json!({"atlas": AtlasJson::from_model(&u), "cover_condition": cover, "meet_condition": meet})
                });
            }
            Ok(t)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(parts.into_iter().fold(Tally::new(), Tally::merge).report("atlas-equiv"))
}

/// Atlas predicate against the hypercover predicate of `ι*U` at levels 1 and 2.
fn hypercover_equivalence(b: &SweepBounds) -> Result<SweepReport> {
    ceiling("points", b.points, 4)?;
    ceiling("poset size", b.poset, 3)?;
    let spaces = spaces_up_to(b.points);
    let shapes = posets_up_to(b.poset)
        .iter()
        .map(|p| iota_test(p, 2))
        .collect::<Result<Vec<_>>>()?;
    let jobs: Vec<(&FiniteSpace, &IotaShape)> = spaces.iter().flat_map(|s| shapes.iter().map(move |p| (s, p))).collect();
    let parts = jobs
        .par_iter()
        .map(|&(space, shape)| {
            let mut t = Tally::new();
            for u in monotone_diagrams(shape.poset(), space) {
                let atlas = u.is_atlas();
                let h = atlas_to_hypercover_on(shape, &u)?;
                let level1 = h.is_hypercover(1)?;
                let level2 = h.is_hypercover(2)?;
                if atlas {
                    t.bump("atlases", 1);
                }
                if level1 == level2 {
                    t.bump("level_agree", 1);
                }
                t.record(atlas == level2 && level1 == level2, || {
                    json!({"atlas": AtlasJson::from_model(&u), "is_atlas": atlas, "hypercover_level_1": level1, "hypercover_level_2": level2})
                });
            }
            Ok(t)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(parts.into_iter().fold(Tally::new(), Tally::merge).report("hypercover-equiv"))
}

/// Whether `u` satisfies the atlas conditions for the open it covers.
pub fn is_atlas_of_covered(u: &AtlasDiagram) -> bool {
    let n = u.index().len();
    (0..n).all(|i| {
        (i..n).all(|j| {
            let below = u
                .index()
                .lower_bounds(i, j)
                .fold(PointSet::EMPTY, |acc, k| acc.union(u.open(k)));
            below == u.open(i).intersection(u.open(j))
        })
    })
}

/// The test family for one space in the sheaf-local suite.
struct LocalFamily {
    sheaf: Vec<GluingProblem>,
    atlases: Vec<GluingProblem>,
    hypercovers: Vec<GluingProblem>,
    locals: Vec<LocalityCheck>,
    local_isos: usize,
}

fn push_unique<T: PartialEq>(v: &mut Vec<T>, x: T) {
    if !v.contains(&x) {
        v.push(x);
    }
}

fn local_family(space: &FiniteSpace, shapes: &[IotaShape]) -> Result<LocalFamily> {
    let k = space.opens().len();
    let sheaf = (0..k)
        .map(|s| GluingProblem::sieve(space, Some(s), minimal_covering_sieve(space, s)))
        .collect::<Result<Vec<_>>>()?;
    let mut diagrams = Vec::new();
    for shape in shapes {
        for u in monotone_diagrams(shape.poset(), space) {
            if is_atlas_of_covered(&u) {
                diagrams.push((Some(shape), u));
            }
        }
    }
    for (_, members) in covering_sieves(space) {
        let opens: Vec<PointSet> = members.iter().map(|&m| space.opens()[m]).collect();
        diagrams.push((None, AtlasDiagram::inclusion(space, &opens)?));
    }
    let mut atlases = Vec::new();
    let mut hypercovers = Vec::new();
    let mut maps: Vec<PresheafMap> = Vec::new();
    for (shape, u) in &diagrams {
        push_unique(&mut atlases, GluingProblem::limit(u)?);
        let h = match shape {
            Some(s) => atlas_to_hypercover_on(s, u)?,
            None => atlas_to_hypercover_on(&iota_test(u.index(), 1)?, u)?,
        };
        push_unique(&mut hypercovers, GluingProblem::equalizer(&h)?);
        push_unique(&mut maps, atlas_colimit(u)?);
    }
    for (s, members) in covering_sieves(space) {
        let sub = Presheaf::subterminal(space, &members)?;
        let rep = Presheaf::representable(space, space.opens()[s])?;
        push_unique(&mut maps, PresheafMap::to_subterminal(&sub, &rep)?);
    }
    for psi in &maps {
        if !is_local_isomorphism(psi)? {
            return Err(Error::invariant(
                "family_maps_are_local_isomorphisms",
                format!("a test map on a {}-point space is not a local isomorphism", space.n_points()),
            ));
        }
    }
    let locals = maps.iter().map(LocalityCheck::new).collect::<Result<Vec<_>>>()?;
    Ok(LocalFamily {
        sheaf,
        atlases,
        hypercovers,
        locals,
        local_isos: maps.len(),
    })
}

/// Depth-first search over presheaves with the given section counts.
/// `order(n)` lists the codes `0..n` of the maps to try at a branch, and
/// the search stops once `visit` returns `false`.
fn search_presheaves(
    space: &FiniteSpace,
    sizes: &[usize],
    order: &mut dyn FnMut(usize) -> Vec<usize>,
    visit: &mut dyn FnMut(&[Vec<usize>]) -> bool,
) {
    struct Ctx<'a> {
        k: usize,
        sizes: &'a [usize],
        covers: &'a [Vec<usize>],
        below: &'a [Vec<usize>],
        opens: &'a [PointSet],
    }

    type Order<'a> = &'a mut dyn FnMut(usize) -> Vec<usize>;
    type Visit<'a> = &'a mut dyn FnMut(&[Vec<usize>]) -> bool;

    // Chooses the maps from open `u` to its lower covers, then fills in the
    // composite restrictions and checks they agree. Returns `false` to stop.
    fn step(c: &Ctx, u: usize, ci: usize, tables: &mut Vec<Vec<usize>>, order: Order, visit: Visit) -> bool {
        let k = c.k;
        if u == k {
            return visit(tables);
        }
        if ci == c.covers[u].len() {
            for &w in &c.below[u] {
                if c.covers[u].contains(&w) {
                    continue;
                }
                let mut composite: Option<Vec<usize>> = None;
                for &v in &c.covers[u] {
                    if !c.opens[w].is_subset(c.opens[v]) {
                        continue;
                    }
                    let t: Vec<usize> = tables[u * k + v].iter().map(|&x| tables[v * k + w][x]).collect();
                    match &composite {
                        None => composite = Some(t),
                        Some(prev) if *prev != t => return true,
                        _ => {}
                    }
                }
                tables[u * k + w] = composite.expect("some cover contains w");
            }
            return step(c, u + 1, 0, tables, order, visit);
        }
        let v = c.covers[u][ci];
        let (from, to) = (c.sizes[u], c.sizes[v]);
        if to == 0 && from > 0 {
            return true;
        }
        for code in order(to.pow(from as u32)) {
            let mut map = Vec::with_capacity(from);
            let mut rest = code;
            for _ in 0..from {
                map.push(rest % to);
                rest /= to;
            }
            tables[u * k + v] = map;
            if !step(c, u, ci + 1, tables, order, visit) {
                return false;
            }
        }
        true
    }

    let k = space.opens().len();
    let opens = space.opens();
    let covers = crate::sheaf::lower_covers(space);
    let below: Vec<Vec<usize>> = (0..k)
        .map(|u| (0..k).filter(|&w| w != u && opens[w].is_subset(opens[u])).collect())
        .collect();
    let mut tables: Vec<Vec<usize>> = (0..k * k)
        .map(|z| if z / k == z % k { (0..sizes[z / k]).collect() } else { Vec::new() })
        .collect();
    let ctx = Ctx {
        k,
        sizes,
        covers: &covers,
        below: &below,
        opens,
    };
    step(&ctx, 0, 0, &mut tables, order, visit);
}

/// Calls `visit` on every presheaf on `space` with the given section counts.
pub fn for_each_presheaf(space: &FiniteSpace, sizes: &[usize], mut visit: impl FnMut(Presheaf)) {
    search_presheaves(space, sizes, &mut |n| (0..n).collect(), &mut |t| {
        visit(Presheaf::from_tables_unchecked(space.clone(), sizes.to_vec(), t.to_vec()));
        true
    });
}

/// The first presheaf found when every branch is tried in a random order,
/// or `None` when no presheaf has these section counts.
pub fn random_presheaf<R: rand::Rng>(space: &FiniteSpace, sizes: &[usize], rng: &mut R) -> Option<Presheaf> {
    use rand::seq::SliceRandom;
    let mut found = None;
    search_presheaves(
        space,
        sizes,
        &mut |n| {
            let mut v: Vec<usize> = (0..n).collect();
            v.shuffle(rng);
            v
        },
        &mut |t| {
            found = Some(Presheaf::from_tables_unchecked(space.clone(), sizes.to_vec(), t.to_vec()));
            false
        },
    );
    found
}

/// All section-count vectors with entries `0..=max`.
fn size_vectors(k: usize, max: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..k {
        out = out
            .into_iter()
            .flat_map(|v| {
                (0..=max).map(move |s| {
                    let mut w = v.clone();
                    w.push(s);
                    w
                })
            })
            .collect();
    }
    out
}

/// Presheaf count per space, for cross-checking the enumerator.
pub fn count_presheaves(space: &FiniteSpace, max: usize) -> usize {
    size_vectors(space.opens().len(), max)
        .iter()
        .map(|sizes| {
            let mut n = 0;
            for_each_presheaf(space, sizes, |_| n += 1);
            n
        })
        .sum()
}

/// The four verdicts compared by the sheaf-local suite.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct LocalVerdicts {
    pub sheaf: bool,
    pub atlas_descent: bool,
    pub hypercover_descent: bool,
    pub local: bool,
}

impl LocalVerdicts {
    pub fn agree(&self) -> bool {
        self.sheaf == self.atlas_descent && self.atlas_descent == self.hypercover_descent && self.hypercover_descent == self.local
    }
}

impl LocalFamily {
    fn verdicts(&self, f: &Presheaf) -> LocalVerdicts {
        LocalVerdicts {
            sheaf: self.sheaf.iter().all(|p| p.glues(f)),
            atlas_descent: self.atlases.iter().all(|p| p.report(f).bijective()),
            hypercover_descent: self.hypercovers.iter().all(|p| p.glues(f)),
            local: self.locals.iter().all(|l| l.holds(f)),
        }
    }
}

/// Builds the sheaf-local test family of `f`'s space and evaluates `f`.
pub fn local_verdicts(f: &Presheaf) -> Result<LocalVerdicts> {
    let shapes = posets_up_to(3)
        .iter()
        .map(|p| iota_test(p, 2))
        .collect::<Result<Vec<_>>>()?;
    Ok(local_family(f.space(), &shapes)?.verdicts(f))
}

/// Sheaf condition against descent for atlases, descent for hypercovers,
/// and locality for local isomorphisms, on every small presheaf.
fn sheaf_locality(b: &SweepBounds) -> Result<SweepReport> {
    ceiling("points", b.points, 3)?;
    const MAX_SECTIONS: usize = 2;
    let shapes = posets_up_to(3)
        .iter()
        .map(|p| iota_test(p, 2))
        .collect::<Result<Vec<_>>>()?;
    let spaces = spaces_up_to(b.points);
    let families = spaces
        .par_iter()
        .map(|s| local_family(s, &shapes))
        .collect::<Result<Vec<_>>>()?;
    let mut meta = Tally::new();
    for f in &families {
        meta.bump("atlas_problems", f.atlases.len());
        meta.bump("hypercover_problems", f.hypercovers.len());
        meta.bump("local_isomorphisms", f.local_isos);
    }
    let jobs: Vec<(usize, Vec<usize>)> = spaces
        .iter()
        .enumerate()
        .flat_map(|(i, s)| size_vectors(s.opens().len(), MAX_SECTIONS).into_iter().map(move |v| (i, v)))
        .collect();
    let parts: Vec<Tally> = jobs
        .par_iter()
        .map(|(i, sizes)| {
            let fam = &families[*i];
            let mut t = Tally::new();
            for_each_presheaf(&spaces[*i], sizes, |f| {
                let v = fam.verdicts(&f);
                if v.sheaf {
                    t.bump("sheaves", 1);
                }
                t.record(v.agree(), || json!({"presheaf": PresheafJson::from_model(&f), "verdicts": v}));
            });
            t
        })
        .collect();
    Ok(parts.into_iter().fold(meta, Tally::merge).report("sheaf-local"))
}

/// `is_transverse` against `H_{-1} = 0`, and the Euler characteristic
/// against `a + b - c`, on the seeded corpus.
fn transversality(b: &SweepBounds) -> Result<SweepReport> {
    ceiling("corpus size", b.corpus, 10_000)?;
    let instances = corpus(b.seed, b.corpus)?;
    let parts = instances
        .par_iter()
        .map(|inst| {
            let mut t = Tally::new();
            let transverse = is_transverse(&inst.cospan, &inst.point)?;
            let tc = tangent_complex(&inst.cospan, &inst.point)?;
            let h_minus = tc.homology_in(-1);
            let euler = tc.euler_characteristic();
            let vdim = inst.cospan.a() as i64 + inst.cospan.b() as i64 - inst.cospan.c() as i64;
            if transverse {
                t.bump("transverse", 1);
            }
            let ok = transverse == (h_minus == 0) && euler == vdim && !(inst.degenerate && transverse);
            t.record(ok, || {
                json!({
                    "index": inst.index,
                    "cospan": CospanJson::from_model(&inst.cospan),
                    "point": PointJson::from_model(&inst.point),
                    "transverse": transverse,
                    "h_minus_1": h_minus,
                    "euler": euler,
                    "a_plus_b_minus_c": vdim,
                })
            });
            Ok(t)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(parts.into_iter().fold(Tally::new(), Tally::merge).report("transversality"))
}

/// A polynomial touching every variable linearly and quadratically.
pub fn generic_poly(nvars: usize) -> Poly {
    let mut p = Poly::zero(nvars);
    for i in 0..nvars {
        let x = Poly::var(nvars, i);
        p = p.add(&x.scale(&crate::qsmooth::linalg::q(i as i64 + 1))).add(&x.mul(&x));
        if i + 1 < nvars {
            p = p.add(&x.mul(&Poly::var(nvars, i + 1)));
        }
    }
    p
}

/// `d∘d = 0` on a generic polynomial at each level of a model.
pub fn boundary_squared_zero(model: &CosimplicialModel) -> Result<bool> {
    for k in 2..=model.top() {
        let f = generic_poly(model.nvars(k));
        let dd = model.differential(k - 1, &model.differential(k, &f)?)?;
        if !dd.is_zero() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Simplicial identities for `ι*` shapes, the symbolic Hochschild model,
/// the jet complexes, and the face rule for `Hom(Δ_n, Δ_1)`.
fn simplicial_identities(b: &SweepBounds) -> Result<SweepReport> {
    ceiling("poset size", b.poset, 3)?;
    ceiling("truncation", b.trunc, 4)?;
    ceiling("corpus size", b.corpus, 1_000)?;
    let mut t = Tally::new();
    let shapes = posets_up_to(b.poset)
        .par_iter()
        .map(|p| Ok((p.clone(), iota_test(p, b.trunc)?.set().identity_report())))
        .collect::<Result<Vec<_>>>()?;
    for (p, r) in shapes {
        t.bump("iota_identity_checks", r.checked);
        t.record(r.failure.is_none(), || {
            json!({"kind": "iota", "poset": crate::io::PosetJson::from_model(&p), "failure": format!("{:?}", r.failure)})
        });
    }

    let mut cospans: Vec<(CospanPresentation, RationalPoint)> = vec![
        (CospanPresentation::point_loop(), RationalPoint::origin(&CospanPresentation::point_loop())?),
        (CospanPresentation::square_against_point(), RationalPoint::origin(&CospanPresentation::square_against_point())?),
        (CospanPresentation::axes(), RationalPoint::origin(&CospanPresentation::axes())?),
    ];
    cospans.extend(corpus(b.seed, b.corpus)?.into_iter().map(|i| (i.cospan, i.point)));
    let parts = cospans
        .par_iter()
        .enumerate()
        .map(|(idx, (c, p))| {
            let mut t = Tally::new();
            let model = hochschild_model(c, 4);
            let (checked, failure) = model.identity_report()?;
            t.bump("hochschild_symbolic_checks", checked);
            let squared = boundary_squared_zero(&model)?;
            let witness = |kind: &str, detail: String| {
                json!({"kind": kind, "instance": idx, "cospan": CospanJson::from_model(c), "failure": detail})
            };
            t.record(failure.is_none(), || witness("hochschild_symbolic", failure.clone().unwrap_or_default()));
            t.record(squared, || witness("boundary_squared", "d∘d is not zero".into()));
            // Small cospans only: jet levels grow like a power of the variable count.
            if c.a() + c.b() + b.levels * c.c() <= 6 {
                let jets = jet_mapping_complex(c, p, b.jet, b.levels, 1)?;
                let (checked, failure) = jets.identity_report();
                t.bump("jet_matrix_checks", checked);
                t.bump("jet_complexes", 1);
                t.record(failure.is_none(), || witness("jet_matrix", failure.clone().unwrap_or_default()));
            }
            Ok(t)
        })
        .collect::<Result<Vec<_>>>()?;
    t = parts.into_iter().fold(t, Tally::merge);

    let c = CospanPresentation::point_loop();
    let origin = RationalPoint::origin(&c)?;
    let nerve = nerve_cosimplicial_betti(&c, &origin, b.jet, b.levels, 1)?;
    t.bump("nerve_complexes", nerve.len().min(1));
    for n in 0..=4 {
        let r = interval_map_report(n);
        t.record(r.ok(), || json!({"kind": "interval_maps", "report": r}));
    }
    Ok(t.report("simplicial-identities"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn topology_counts() {
        // Labelled topologies on 0..4 points.
        let counts: Vec<usize> = (0..=4).map(|n| topologies(n).len()).collect();
        assert_eq!(counts, vec![1, 1, 4, 29, 355]);
    }

    #[test]
    fn poset_counts() {
        let counts: Vec<usize> = (0..=4).map(|n| posets(n).len()).collect();
        assert_eq!(counts, vec![1, 1, 3, 19, 219]);
    }

    #[test]
    fn presheaf_counts() {
        let per_n: Vec<usize> = (0..=2)
            .map(|n| topologies(n).iter().map(|s| count_presheaves(s, 2)).sum())
            .collect();
        assert_eq!(per_n, vec![3, 11, 354]);
    }

    #[test]
    fn enumerated_presheaves_are_valid() {
        let s = FiniteSpace::sierpinski();
        let mut seen = 0;
        for sizes in size_vectors(3, 2) {
            for_each_presheaf(&s, &sizes, |f| {
                let tables = (0..9).map(|z| f.table(z / 3, z % 3).to_vec()).collect();
                Presheaf::from_tables(s.clone(), f.sizes().to_vec(), tables).unwrap();
                seen += 1;
            });
        }
        assert!(seen > 0);
    }

    #[test]
    fn monotone_diagram_count() {
        // Chains U0 ⊆ U1 in the three opens of the Sierpiński space.
        let chain = FinitePoset::chain(2);
        assert_eq!(monotone_diagrams(&chain, &FiniteSpace::sierpinski()).len(), 6);
    }

    #[test]
    fn small_sweeps_pass() {
        let b = SweepBounds {
            points: 2,
            poset: 2,
            corpus: 8,
            ..SweepBounds::default()
        };
        for suite in ["atlas-equiv", "hypercover-equiv", "sheaf-local", "transversality"] {
            let r = run(suite, &b).unwrap();
            assert!(r.passed(), "{r:?}");
            assert!(r.instances > 0);
        }
    }

    #[test]
    fn bounds_are_enforced() {
        let b = SweepBounds {
            points: 5,
            ..SweepBounds::default()
        };
        assert_eq!(run("atlas-equiv", &b).unwrap_err().kind(), "bound_exceeded");
        assert!(run("nope", &SweepBounds::default()).is_err());
    }
}
