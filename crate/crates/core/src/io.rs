//! JSON documents for every input and output format.
//!
//! Points and poset elements are referred to by label; opens by their list of
//! point labels or, as map keys, by the canonical id `{a,b}`. Output maps are
//! `BTreeMap`s so serialization is byte-deterministic.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::sync::Arc;

pub use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::atlas::{AtlasDiagram, ContinuousMap, SieveMap};
use crate::lattice::{FinitePoset, FiniteSpace, PointSet};
use crate::qsmooth::cospan::{CospanPresentation, PolynomialMap, RationalPoint};
use crate::qsmooth::linalg::{format_rational, parse_rational};
use crate::sheaf::{Presheaf, PresheafMap};
use crate::simplicial::{IndexedHypercover, TruncatedSimplicialSet};
use crate::{Error, Result};

/// A poset element named by label or by position.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ElementRef {
    Index(usize),
    Label(String),
}

impl ElementRef {
    fn resolve(&self, p: &FinitePoset) -> Result<usize> {
        match self {
            ElementRef::Index(i) if *i < p.len() => Ok(*i),
            ElementRef::Index(i) => Err(Error::UnknownElement(format!("#{i}"))),
            ElementRef::Label(l) => p.index_of(l),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PosetJson {
    pub elements: Vec<String>,
    /// Generating pairs `[i, j]` meaning `i <= j`; the closure is taken.
    #[serde(default)]
    pub leq: Vec<(ElementRef, ElementRef)>,
}

impl PosetJson {
    pub fn from_model(p: &FinitePoset) -> Self {
        PosetJson {
            elements: p.labels().to_vec(),
            leq: p
                .covering_pairs()
                .into_iter()
                .map(|(i, j)| (ElementRef::Label(p.label(i).into()), ElementRef::Label(p.label(j).into())))
                .collect(),
        }
    }

    pub fn to_model(&self) -> Result<FinitePoset> {
        let bare = FinitePoset::antichain(&self.elements);
        let pairs = self
            .leq
            .iter()
            .map(|(a, b)| Ok((a.resolve(&bare)?, b.resolve(&bare)?)))
            .collect::<Result<Vec<_>>>()?;
        FinitePoset::from_pairs(self.elements.clone(), &pairs)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceJson {
    pub points: Vec<String>,
    pub opens: Vec<Vec<String>>,
}

impl SpaceJson {
    pub fn from_model(s: &FiniteSpace) -> Self {
        SpaceJson {
            points: s.points().to_vec(),
            opens: s.opens().iter().map(|&o| s.labels_of(o)).collect(),
        }
    }

    pub fn to_model(&self) -> Result<FiniteSpace> {
        FiniteSpace::from_labels(&self.points, &self.opens)
    }
}

fn open_by_id(space: &FiniteSpace, id: &str) -> Result<usize> {
    let inner = id
        .trim()
        .strip_prefix('{')
        .and_then(|s| s.strip_suffix('}'))
        .ok_or_else(|| Error::UnknownElement(format!("open id `{id}`")))?;
    let labels: Vec<&str> = inner.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
    let set = space.set_from_labels(&labels)?;
    space
        .open_index(set)
        .ok_or_else(|| Error::invariant("open_id_is_open", format!("{id} is not an open set")))
}

fn open_set(space: &FiniteSpace, labels: &[String]) -> Result<PointSet> {
    let set = space.set_from_labels(labels)?;
    if !space.is_open(set) {
        return Err(Error::invariant(
            "assignment_values_open",
            format!("{} is not open", space.open_id(set)),
        ));
    }
    Ok(set)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtlasJson {
    pub space: SpaceJson,
    pub index: PosetJson,
    /// Index label to the points of its open.
    pub assignment: BTreeMap<String, Vec<String>>,
}

impl AtlasJson {
    pub fn from_model(u: &AtlasDiagram) -> Self {
        let idx = u.index();
        AtlasJson {
            space: SpaceJson::from_model(u.space()),
            index: PosetJson::from_model(idx),
            assignment: (0..idx.len())
                .map(|i| (idx.label(i).to_string(), u.space().labels_of(u.open(i))))
                .collect(),
        }
    }

    pub fn to_model(&self) -> Result<AtlasDiagram> {
        let space = self.space.to_model()?;
        let index = self.index.to_model()?;
        for key in self.assignment.keys() {
            index.index_of(key)?;
        }
        let assignment = (0..index.len())
            .map(|i| {
                let labels = self
                    .assignment
                    .get(index.label(i))
                    .ok_or_else(|| Error::invariant("assignment_total", format!("no open for `{}`", index.label(i))))?;
                space.set_from_labels(labels)
            })
            .collect::<Result<Vec<_>>>()?;
        AtlasDiagram::new(index, space, assignment)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoverJson {
    pub space: SpaceJson,
    pub cover: Vec<Vec<String>>,
}

impl CoverJson {
    pub fn to_model(&self) -> Result<(FiniteSpace, Vec<PointSet>)> {
        let space = self.space.to_model()?;
        let cover = self.cover.iter().map(|o| open_set(&space, o)).collect::<Result<Vec<_>>>()?;
        Ok((space, cover))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContinuousMapJson {
    pub source: SpaceJson,
    pub target: SpaceJson,
    /// Source point label to target point label.
    pub map: BTreeMap<String, String>,
}

impl ContinuousMapJson {
    pub fn to_model(&self) -> Result<ContinuousMap> {
        let source = self.source.to_model()?;
        let target = self.target.to_model()?;
        let point_map = source
            .points()
            .iter()
            .map(|p| {
                let q = self
                    .map
                    .get(p)
                    .ok_or_else(|| Error::invariant("map_total", format!("point `{p}` has no image")))?;
                target.point_index(q)
            })
            .collect::<Result<Vec<_>>>()?;
        ContinuousMap::new(source, target, point_map)
    }
}

/// `η: J → sieves of I`, for composing atlases.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SieveMapJson {
    pub domain: PosetJson,
    /// Element of `J` to the members of its sieve in `I`.
    pub sieves: BTreeMap<String, Vec<String>>,
}

impl SieveMapJson {
    pub fn to_model(&self, index: &FinitePoset) -> Result<SieveMap> {
        let domain = self.domain.to_model()?;
        let sieves = (0..domain.len())
            .map(|j| {
                let members = self
                    .sieves
                    .get(domain.label(j))
                    .ok_or_else(|| Error::invariant("sieve_map_total", format!("no sieve for `{}`", domain.label(j))))?;
                let idx = members.iter().map(|l| index.index_of(l)).collect::<Result<Vec<_>>>()?;
                index.sieve(idx)
            })
            .collect::<Result<Vec<_>>>()?;
        SieveMap::new(domain, sieves)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HypercoverLevelJson {
    pub simplices: Vec<String>,
    pub labels: BTreeMap<String, Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HypercoverJson {
    pub space: SpaceJson,
    pub levels: Vec<HypercoverLevelJson>,
    /// Simplex id (level ≥ 1) to the ids of `d_0σ, …, d_nσ`.
    pub faces: BTreeMap<String, Vec<String>>,
    /// Simplex id (below the top level) to the ids of `s_0σ, …, s_nσ`.
    pub degeneracies: BTreeMap<String, Vec<String>>,
}

impl HypercoverJson {
    pub fn from_model(h: &IndexedHypercover) -> Self {
        let sh = h.shape();
        let space = h.space();
        let top = sh.truncation();
        let mut faces = BTreeMap::new();
        let mut degeneracies = BTreeMap::new();
        let levels = (0..=top)
            .map(|n| {
                let ids = &sh.ids()[n];
                for s in 0..sh.level_size(n) {
                    if n > 0 {
                        faces.insert(ids[s].clone(), (0..=n).map(|i| sh.id(n - 1, sh.face(n, i, s)).to_string()).collect());
                    }
                    if n < top {
                        degeneracies.insert(
                            ids[s].clone(),
                            (0..=n).map(|j| sh.id(n + 1, sh.degeneracy(n, j, s)).to_string()).collect(),
                        );
                    }
                }
                HypercoverLevelJson {
                    simplices: ids.clone(),
                    labels: (0..sh.level_size(n)).map(|s| (ids[s].clone(), space.labels_of(h.label(n, s)))).collect(),
                }
            })
            .collect();
        HypercoverJson {
            space: SpaceJson::from_model(space),
            levels,
            faces,
            degeneracies,
        }
    }

    pub fn to_model(&self) -> Result<IndexedHypercover> {
        let space = self.space.to_model()?;
        if self.levels.is_empty() {
            return Err(Error::invariant("simplicial_levels", "no levels"));
        }
        let top = self.levels.len() - 1;
        let mut position: BTreeMap<&str, (usize, usize)> = BTreeMap::new();
        for (n, lvl) in self.levels.iter().enumerate() {
            for (s, id) in lvl.simplices.iter().enumerate() {
                if position.insert(id.as_str(), (n, s)).is_some() {
                    return Err(Error::invariant("simplex_ids_unique", format!("duplicate id `{id}`")));
                }
            }
        }
        let find = |id: &str, level: usize| -> Result<usize> {
            match position.get(id) {
                Some(&(n, s)) if n == level => Ok(s),
                Some(&(n, _)) => Err(Error::invariant(
                    "simplicial_operator_shape",
                    format!("`{id}` is at level {n}, expected {level}"),
                )),
                None => Err(Error::UnknownElement(id.to_string())),
            }
        };
        let operator = |map: &BTreeMap<String, Vec<String>>, n: usize, arity: usize, to: usize, what: &str| {
            let lvl = &self.levels[n];
            let mut out = vec![Vec::with_capacity(lvl.simplices.len()); arity];
            for id in &lvl.simplices {
                let imgs = map
                    .get(id)
                    .ok_or_else(|| Error::invariant("simplicial_operator_shape", format!("no {what} for `{id}`")))?;
                if imgs.len() != arity {
                    return Err(Error::invariant(
                        "simplicial_operator_shape",
                        format!("`{id}` has {} {what}, expected {arity}", imgs.len()),
                    ));
                }
                for (i, img) in imgs.iter().enumerate() {
                    out[i].push(find(img, to)?);
                }
            }
            Ok(out)
        };
        let mut faces = vec![vec![]];
        for n in 1..=top {
            faces.push(operator(&self.faces, n, n + 1, n - 1, "faces")?);
        }
        let degeneracies = (0..top)
            .map(|n| operator(&self.degeneracies, n, n + 1, n + 1, "degeneracies"))
            .collect::<Result<Vec<_>>>()?;
        let sizes = self.levels.iter().map(|l| l.simplices.len()).collect();
        let ids = self.levels.iter().map(|l| l.simplices.clone()).collect();
        let shape = TruncatedSimplicialSet::with_ids(sizes, faces, degeneracies, ids)?;
        let labels = self
            .levels
            .iter()
            .map(|lvl| {
                lvl.simplices
                    .iter()
                    .map(|id| {
                        let pts = lvl
                            .labels
                            .get(id)
                            .ok_or_else(|| Error::invariant("hypercover_labels_total", format!("no label for `{id}`")))?;
                        space.set_from_labels(pts)
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        IndexedHypercover::new(Arc::new(shape), space, labels)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RestrictionJson {
    pub from: String,
    pub to: String,
    pub map: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PresheafJson {
    pub space: SpaceJson,
    /// Open id to the number of sections over it.
    pub sections: BTreeMap<String, usize>,
    /// Restrictions along at least every covering inclusion `V ⋖ U`.
    pub restrictions: Vec<RestrictionJson>,
}

impl PresheafJson {
    pub fn from_model(f: &Presheaf) -> Self {
        let space = f.space();
        let opens = space.opens();
        let covers = crate::sheaf::lower_covers(space);
        let mut restrictions = Vec::new();
        for u in 0..opens.len() {
            for &v in &covers[u] {
                restrictions.push(RestrictionJson {
                    from: space.open_id(opens[u]),
                    to: space.open_id(opens[v]),
                    map: f.table(u, v).to_vec(),
                });
            }
        }
        restrictions.sort_by(|a, b| (&a.from, &a.to).cmp(&(&b.from, &b.to)));
        PresheafJson {
            space: SpaceJson::from_model(space),
            sections: (0..opens.len()).map(|u| (space.open_id(opens[u]), f.size(u))).collect(),
            restrictions,
        }
    }

    pub fn to_model(&self) -> Result<Presheaf> {
        let space = self.space.to_model()?;
        let k = space.opens().len();
        let mut sizes = vec![None; k];
        for (id, &n) in &self.sections {
            sizes[open_by_id(&space, id)?] = Some(n);
        }
        let sizes = sizes
            .into_iter()
            .enumerate()
            .map(|(u, s)| {
                s.ok_or_else(|| {
                    Error::invariant("presheaf_sections_total", format!("no sections given over {}", space.open_id(space.opens()[u])))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let restrictions = self
            .restrictions
            .iter()
            .map(|r| Ok((open_by_id(&space, &r.from)?, open_by_id(&space, &r.to)?, r.map.clone())))
            .collect::<Result<Vec<_>>>()?;
        Presheaf::new(space, sizes, &restrictions)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PresheafMapJson {
    pub source: PresheafJson,
    pub target: PresheafJson,
    /// Open id to the component table.
    pub components: BTreeMap<String, Vec<usize>>,
}

impl PresheafMapJson {
    pub fn from_model(m: &PresheafMap) -> Self {
        let space = m.source().space();
        PresheafMapJson {
            source: PresheafJson::from_model(m.source()),
            target: PresheafJson::from_model(m.target()),
            components: (0..space.opens().len())
                .map(|u| (space.open_id(space.opens()[u]), m.component(u).to_vec()))
                .collect(),
        }
    }

    pub fn to_model(&self) -> Result<PresheafMap> {
        let source = self.source.to_model()?;
        let target = self.target.to_model()?;
        if source.space() != target.space() {
            return Err(Error::Precondition("source and target live on different spaces".into()));
        }
        let k = source.n_opens();
        let mut comps = vec![None; k];
        for (id, c) in &self.components {
            comps[open_by_id(source.space(), id)?] = Some(c.clone());
        }
        let comps = comps
            .into_iter()
            .enumerate()
            .map(|(u, c)| c.ok_or_else(|| Error::invariant("presheaf_map_total", format!("no component over open #{u}"))))
            .collect::<Result<Vec<_>>>()?;
        PresheafMap::new(source, target, comps)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolynomialMapJson {
    pub vars: usize,
    pub polys: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CospanJson {
    pub left: PolynomialMapJson,
    pub right: PolynomialMapJson,
}

impl CospanJson {
    pub fn from_model(c: &CospanPresentation) -> Self {
        let side = |m: &PolynomialMap| PolynomialMapJson {
            vars: m.source_dim(),
            polys: m.components().iter().map(|p| p.to_string()).collect(),
        };
        CospanJson {
            left: side(c.left()),
            right: side(c.right()),
        }
    }

    pub fn to_model(&self) -> Result<CospanPresentation> {
        let side = |m: &PolynomialMapJson| {
            let polys: Vec<&str> = m.polys.iter().map(String::as_str).collect();
            PolynomialMap::parse(m.vars, &polys)
        };
        CospanPresentation::new(side(&self.left)?, side(&self.right)?)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointJson {
    #[serde(default)]
    pub x: Vec<String>,
    #[serde(default)]
    pub y: Vec<String>,
}

impl PointJson {
    pub fn from_model(p: &RationalPoint) -> Self {
        PointJson {
            x: p.x().iter().map(format_rational).collect(),
            y: p.y().iter().map(format_rational).collect(),
        }
    }

    pub fn to_model(&self, c: &CospanPresentation) -> Result<RationalPoint> {
        let parse = |v: &[String]| {
            v.iter()
                .enumerate()
                .map(|(i, s)| {
                    parse_rational(s).ok_or_else(|| Error::Parse {
                        pos: i,
                        msg: format!("`{s}` is not a rational p/q"),
                    })
                })
                .collect::<Result<Vec<_>>>()
        };
        RationalPoint::on(c, parse(&self.x)?, parse(&self.y)?)
    }
}

pub fn from_str<T: DeserializeOwned>(s: &str) -> Result<T> {
    Ok(serde_json::from_str(s)?)
}

pub fn from_file<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Precondition(format!("cannot read {}: {e}", path.display())))?;
    from_str(&text)
}

/// Pretty JSON with a trailing newline.
pub fn to_string<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simplicial::atlas_to_hypercover;

    fn sample_space() -> FiniteSpace {
        FiniteSpace::from_labels(&["a", "b", "c"], &[vec![], vec!["a"], vec!["b"], vec!["a", "b"], vec!["a", "b", "c"]])
            .unwrap()
    }

    #[test]
    fn poset_accepts_labels_and_indices() {
        let j: PosetJson = from_str(r#"{"elements":["p","q","r"],"leq":[["p","q"],[1,2]]}"#).unwrap();
        let p = j.to_model().unwrap();
        assert!(p.leq(0, 2));
        assert_eq!(PosetJson::from_model(&p).to_model().unwrap(), p);
        assert!(from_str::<PosetJson>(r#"{"elements":[],"extra":1}"#).is_err());
    }

    #[test]
    fn atlas_round_trip() {
        let u = AtlasDiagram::inclusion(&sample_space(), &[PointSet(1), PointSet(2)]).unwrap();
        let j = AtlasJson::from_model(&u);
        assert_eq!(j.to_model().unwrap(), u);
        let text = to_string(&j);
        assert_eq!(to_string(&from_str::<AtlasJson>(&text).unwrap()), text);
    }

    #[test]
    fn atlas_errors_name_invariants() {
        let bad = r#"{"space":{"points":["a","b"],"opens":[[],["a"],["a","b"]]},
            "index":{"elements":["i"]},"assignment":{"i":["b"]}}"#;
        let err = from_str::<AtlasJson>(bad).unwrap().to_model().unwrap_err();
        assert_eq!(err.kind(), "assignment_values_open");
    }

    #[test]
    fn hypercover_round_trip() {
        let u = AtlasDiagram::inclusion(&sample_space(), &[PointSet(1), PointSet(2), PointSet(7)]).unwrap();
        let h = atlas_to_hypercover(&u, 2).unwrap();
        let j = HypercoverJson::from_model(&h);
        let back = j.to_model().unwrap();
        assert_eq!(back.labels(), h.labels());
        assert_eq!(HypercoverJson::from_model(&back), j);
    }

    #[test]
    fn presheaf_round_trip() {
        let f = Presheaf::representable(&sample_space(), PointSet(3)).unwrap();
        let j = PresheafJson::from_model(&f);
        assert_eq!(j.to_model().unwrap(), f);
        let m = PresheafMap::identity(&f);
        assert_eq!(PresheafMapJson::from_model(&m).to_model().unwrap(), m);
    }

    #[test]
    fn cospan_and_point() {
        let c: CospanJson = from_str(r#"{"left":{"vars":1,"polys":["x0^2"]},"right":{"vars":0,"polys":["0"]}}"#).unwrap();
        let c = c.to_model().unwrap();
        assert_eq!(CospanJson::from_model(&c).to_model().unwrap(), c);
        let p: PointJson = from_str(r#"{"x":["0/3"]}"#).unwrap();
        assert!(p.to_model(&c).is_ok());
        let off: PointJson = from_str(r#"{"x":["1/2"]}"#).unwrap();
        assert_eq!(off.to_model(&c).unwrap_err().kind(), "point_on_intersection");
    }
}
