//! Finite posets, sieves and finite frames.
//!
//! A [`FinitePoset`] stores its order as one down-set bitset per element, so
//! sieve meets and joins are word-level bit operations. A [`FiniteSpace`]
//! stores its opens explicitly as [`PointSet`] bitmasks over at most 64 points;
//! this keeps non-T0 and non-Alexandrov topologies expressible.

use std::cmp::Ordering;
use std::fmt;

use fixedbitset::FixedBitSet;

use crate::error::{Error, Result};

/// Default ceiling on `|I|` for operations that enumerate all sieves.
pub const DEFAULT_SIEVE_BOUND: usize = 12;

/// Maximum number of points of a [`FiniteSpace`].
pub const MAX_POINTS: usize = 64;

/// A set of points of a finite space, as a bitmask over point indices.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct PointSet(pub u64);

impl PointSet {
    pub const EMPTY: PointSet = PointSet(0);

    pub fn full(n: usize) -> Self {
        if n >= 64 {
            PointSet(u64::MAX)
        } else {
            PointSet((1u64 << n) - 1)
        }
    }

    pub fn singleton(p: usize) -> Self {
        PointSet(1u64 << p)
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(it: I) -> Self {
        PointSet(it.into_iter().fold(0, |acc, p| acc | (1u64 << p)))
    }

    #[inline]
    pub fn contains(self, p: usize) -> bool {
        self.0 >> p & 1 == 1
    }

    #[inline]
    pub fn union(self, other: Self) -> Self {
        PointSet(self.0 | other.0)
    }

    #[inline]
    pub fn intersection(self, other: Self) -> Self {
        PointSet(self.0 & other.0)
    }

    #[inline]
    pub fn is_subset(self, other: Self) -> bool {
        self.0 & !other.0 == 0
    }

    #[inline]
    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        let bits = self.0;
        (0..64).filter(move |p| bits >> p & 1 == 1)
    }
}

impl fmt::Debug for PointSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// Lexicographic comparison of two membership vectors, element 0 first.
fn lex_cmp(a: &FixedBitSet, b: &FixedBitSet, len: usize) -> Ordering {
    for i in 0..len {
        match (a.contains(i), b.contains(i)) {
            (false, true) => return Ordering::Less,
            (true, false) => return Ordering::Greater,
            _ => {}
        }
    }
    Ordering::Equal
}

/// A downward-closed subset of a [`FinitePoset`].
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Sieve {
    members: FixedBitSet,
}

impl Sieve {
    pub fn empty(len: usize) -> Self {
        Sieve {
            members: FixedBitSet::with_capacity(len),
        }
    }

    pub fn contains(&self, i: usize) -> bool {
        self.members.contains(i)
    }

    pub fn members(&self) -> impl Iterator<Item = usize> + '_ {
        self.members.ones()
    }

    pub fn bits(&self) -> &FixedBitSet {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_clear()
    }

    pub fn meet(&self, other: &Sieve) -> Sieve {
        let mut members = self.members.clone();
        members.intersect_with(&other.members);
        Sieve { members }
    }

    pub fn join(&self, other: &Sieve) -> Sieve {
        let mut members = self.members.clone();
        members.union_with(&other.members);
        Sieve { members }
    }

    pub fn is_subset(&self, other: &Sieve) -> bool {
        self.members.is_subset(&other.members)
    }
}

impl Ord for Sieve {
    fn cmp(&self, other: &Self) -> Ordering {
        let len = self.members.len().max(other.members.len());
        lex_cmp(&self.members, &other.members, len)
    }
}

impl PartialOrd for Sieve {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Sieve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.members.ones()).finish()
    }
}

/// A finite partially ordered set with labelled elements.
#[derive(Clone, PartialEq, Eq)]
pub struct FinitePoset {
    labels: Vec<String>,
    /// `below[i]` is the principal down-set `{ j : j <= i }`.
    below: Vec<FixedBitSet>,
}

impl fmt::Debug for FinitePoset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let pairs: Vec<(&str, &str)> = self
            .covering_pairs()
            .into_iter()
            .map(|(i, j)| (self.labels[i].as_str(), self.labels[j].as_str()))
            .collect();
        f.debug_struct("FinitePoset")
            .field("elements", &self.labels)
            .field("covers", &pairs)
            .finish()
    }
}

impl FinitePoset {
    /// Builds a poset from a relation matrix, taking the reflexive-transitive
    /// closure. Cycles (antisymmetry failures after closure) are rejected.
    pub fn new(labels: Vec<String>, leq: &[Vec<bool>]) -> Result<Self> {
        let n = labels.len();
        check_unique(&labels, "poset_labels_unique")?;
        if leq.len() != n || leq.iter().any(|row| row.len() != n) {
            return Err(Error::invariant(
                "poset_matrix_square",
                format!("expected a {n}x{n} relation matrix"),
            ));
        }
        let mut rel: Vec<Vec<bool>> = leq.to_vec();
        for (i, row) in rel.iter_mut().enumerate() {
            row[i] = true;
        }
        // Warshall
        for k in 0..n {
            for i in 0..n {
                if rel[i][k] {
                    for j in 0..n {
                        if rel[k][j] {
                            rel[i][j] = true;
                        }
                    }
                }
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if rel[i][j] && rel[j][i] {
                    return Err(Error::invariant(
                        "poset_antisymmetry",
                        format!("`{}` and `{}` lie on a cycle", labels[i], labels[j]),
                    ));
                }
            }
        }
        let below = (0..n)
            .map(|j| {
                let mut b = FixedBitSet::with_capacity(n);
                for (i, row) in rel.iter().enumerate() {
                    if row[j] {
                        b.insert(i);
                    }
                }
                b
            })
            .collect();
        Ok(FinitePoset { labels, below })
    }

    /// Builds a poset from principal down-sets that are already closed.
    /// Reflexivity, transitivity and antisymmetry are verified.
    pub fn from_downsets(labels: Vec<String>, below: Vec<FixedBitSet>) -> Result<Self> {
        let n = labels.len();
        check_unique(&labels, "poset_labels_unique")?;
        if below.len() != n {
            return Err(Error::DimensionMismatch {
                what: "poset down-sets",
                expected: n,
                got: below.len(),
            });
        }
        let below: Vec<FixedBitSet> = below
            .into_iter()
            .map(|mut b| {
                b.grow(n);
                b
            })
            .collect();
        for (j, b) in below.iter().enumerate() {
            if b.len() > n || !b.contains(j) {
                return Err(Error::invariant(
                    "poset_reflexive",
                    format!("`{}` is not below itself", labels[j]),
                ));
            }
            for i in b.ones() {
                if !below[i].is_subset(b) {
                    return Err(Error::invariant(
                        "poset_transitive",
                        format!("down-set of `{}` is not closed", labels[j]),
                    ));
                }
                if i != j && below[i].contains(j) {
                    return Err(Error::invariant(
                        "poset_antisymmetry",
                        format!("`{}` and `{}` lie on a cycle", labels[i], labels[j]),
                    ));
                }
            }
        }
        Ok(FinitePoset { labels, below })
    }

    /// Builds a poset from generating pairs `(i, j)` meaning `i <= j`.
    pub fn from_pairs(labels: Vec<String>, pairs: &[(usize, usize)]) -> Result<Self> {
        let n = labels.len();
        let mut leq = vec![vec![false; n]; n];
        for &(i, j) in pairs {
            if i >= n || j >= n {
                return Err(Error::UnknownElement(format!("#{}", i.max(j))));
            }
            leq[i][j] = true;
        }
        Self::new(labels, &leq)
    }

    /// Builds a poset from generating pairs given by label.
    pub fn from_label_pairs<S: AsRef<str>>(labels: &[S], pairs: &[(S, S)]) -> Result<Self> {
        let labels: Vec<String> = labels.iter().map(|s| s.as_ref().to_string()).collect();
        let find = |l: &str| {
            labels
                .iter()
                .position(|x| x == l)
                .ok_or_else(|| Error::UnknownElement(l.to_string()))
        };
        let idx = pairs
            .iter()
            .map(|(a, b)| Ok((find(a.as_ref())?, find(b.as_ref())?)))
            .collect::<Result<Vec<_>>>()?;
        Self::from_pairs(labels, &idx)
    }

    /// The chain `0 <= 1 <= ... <= n-1`, labelled by decimal indices.
    pub fn chain(n: usize) -> Self {
        let labels = (0..n).map(|i| i.to_string()).collect();
        let pairs: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        Self::from_pairs(labels, &pairs).expect("chains are posets")
    }

    pub fn antichain<S: AsRef<str>>(labels: &[S]) -> Self {
        let labels = labels.iter().map(|s| s.as_ref().to_string()).collect();
        Self::from_pairs(labels, &[]).expect("antichains are posets")
    }

    /// The poset with no elements.
    pub fn empty() -> Self {
        FinitePoset {
            labels: Vec::new(),
            below: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::UnknownElement(label.to_string()))
    }

    #[inline]
    pub fn leq(&self, i: usize, j: usize) -> bool {
        self.below[j].contains(i)
    }

    /// Pairs `(i, j)` with `i < j` and nothing strictly between.
    pub fn covering_pairs(&self) -> Vec<(usize, usize)> {
        let n = self.len();
        let mut out = Vec::new();
        for j in 0..n {
            for i in self.below[j].ones() {
                if i == j {
                    continue;
                }
                let between = (0..n).any(|k| k != i && k != j && self.leq(i, k) && self.leq(k, j));
                if !between {
                    out.push((i, j));
                }
            }
        }
        out
    }

    /// The smallest sieve containing `i`.
    pub fn downset(&self, i: usize) -> Result<Sieve> {
        if i >= self.len() {
            return Err(Error::UnknownElement(format!("#{i}")));
        }
        Ok(Sieve {
            members: self.below[i].clone(),
        })
    }

    pub fn downset_of(&self, label: &str) -> Result<Sieve> {
        self.downset(self.index_of(label)?)
    }

    /// Common lower bounds of `i` and `j`.
    pub fn lower_bounds(&self, i: usize, j: usize) -> impl Iterator<Item = usize> + '_ {
        self.below[i].intersection(&self.below[j])
    }

    /// Whether a membership set is downward closed.
    pub fn is_sieve(&self, members: &FixedBitSet) -> bool {
        members
            .ones()
            .all(|j| j < self.len() && self.below[j].is_subset(members))
    }

    /// Validates a set of element indices as a sieve.
    pub fn sieve<I: IntoIterator<Item = usize>>(&self, members: I) -> Result<Sieve> {
        let mut bits = FixedBitSet::with_capacity(self.len());
        for m in members {
            if m >= self.len() {
                return Err(Error::UnknownElement(format!("#{m}")));
            }
            bits.insert(m);
        }
        if !self.is_sieve(&bits) {
            return Err(Error::invariant(
                "sieve_downward_closed",
                format!("{:?} is not downward closed", bits.ones().collect::<Vec<_>>()),
            ));
        }
        Ok(Sieve { members: bits })
    }

    /// The sieve generated by an arbitrary subset.
    pub fn generated_sieve<I: IntoIterator<Item = usize>>(&self, gens: I) -> Sieve {
        let mut bits = FixedBitSet::with_capacity(self.len());
        for g in gens {
            bits.union_with(&self.below[g]);
        }
        Sieve { members: bits }
    }

    pub fn top_sieve(&self) -> Sieve {
        let mut bits = FixedBitSet::with_capacity(self.len());
        bits.insert_range(..);
        Sieve { members: bits }
    }

    /// All sieves of the poset, in lexicographic bitset order.
    pub fn sieve_lattice(&self, bound: usize) -> Result<Vec<Sieve>> {
        let n = self.len();
        if n > bound {
            return Err(Error::BoundExceeded {
                what: "poset size for sieve enumeration",
                value: n,
                limit: bound,
            });
        }
        // Sieves are generated by antichains; a DFS over elements in index
        // order deciding membership yields them without scanning all subsets.
        let mut out = Vec::new();
        let mut current = FixedBitSet::with_capacity(n);
        self.sieve_dfs(0, &mut current, &mut out);
        out.sort();
        Ok(out)
    }

    fn sieve_dfs(&self, i: usize, current: &mut FixedBitSet, out: &mut Vec<Sieve>) {
        if i == self.len() {
            if self.is_sieve(current) {
                out.push(Sieve {
                    members: current.clone(),
                });
            }
            return;
        }
        // Excluding i: every element above i must also be excluded, which the
        // final check enforces.
        self.sieve_dfs(i + 1, current, out);
        // Including i requires every j < i (already decided) below i to be in.
        let ok = self.below[i].ones().all(|j| j >= i || current.contains(j));
        if ok {
            current.insert(i);
            self.sieve_dfs(i + 1, current, out);
            current.set(i, false);
        }
    }

    /// Inhabited, and every pair of elements has a common lower bound.
    pub fn is_filtered(&self) -> bool {
        let n = self.len();
        n > 0 && (0..n).all(|i| (0..n).all(|j| self.lower_bounds(i, j).next().is_some()))
    }

    pub fn opposite(&self) -> FinitePoset {
        let n = self.len();
        let below = (0..n)
            .map(|j| {
                let mut b = FixedBitSet::with_capacity(n);
                for i in 0..n {
                    if self.leq(j, i) {
                        b.insert(i);
                    }
                }
                b
            })
            .collect();
        FinitePoset {
            labels: self.labels.clone(),
            below,
        }
    }

    /// A linear extension: every element appears after everything below it.
    pub fn linear_extension(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by_key(|&i| self.below[i].count_ones(..));
        order
    }

    /// The induced order on a subset of elements, in the given order.
    pub fn subposet(&self, elements: &[usize]) -> FinitePoset {
        let labels = elements.iter().map(|&i| self.labels[i].clone()).collect();
        let leq: Vec<Vec<bool>> = elements
            .iter()
            .map(|&i| elements.iter().map(|&j| self.leq(i, j)).collect())
            .collect();
        FinitePoset::new(labels, &leq).expect("restriction of a partial order")
    }

    /// Relation matrix, `m[i][j] = (i <= j)`.
    pub fn leq_matrix(&self) -> Vec<Vec<bool>> {
        let n = self.len();
        (0..n).map(|i| (0..n).map(|j| self.leq(i, j)).collect()).collect()
    }
}

fn check_unique(labels: &[String], name: &'static str) -> Result<()> {
    let mut seen = std::collections::HashSet::new();
    for l in labels {
        if !seen.insert(l.as_str()) {
            return Err(Error::invariant(name, format!("duplicate label `{l}`")));
        }
    }
    Ok(())
}

/// A finite topological space given by its points and the explicit list of
/// its open sets.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FiniteSpace {
    points: Vec<String>,
    /// Sorted by bitmask value; `opens[0]` is the empty set.
    opens: Vec<PointSet>,
}

impl fmt::Debug for FiniteSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let opens: Vec<String> = self.opens.iter().map(|&o| self.open_id(o)).collect();
        f.debug_struct("FiniteSpace")
            .field("points", &self.points)
            .field("opens", &opens)
            .finish()
    }
}

impl FiniteSpace {
    pub fn new(points: Vec<String>, opens: Vec<PointSet>) -> Result<Self> {
        check_unique(&points, "space_points_unique")?;
        let n = points.len();
        if n > MAX_POINTS {
            return Err(Error::BoundExceeded {
                what: "number of points",
                value: n,
                limit: MAX_POINTS,
            });
        }
        let full = PointSet::full(n);
        let mut opens = opens;
        opens.sort();
        opens.dedup();
        if let Some(bad) = opens.iter().find(|o| !o.is_subset(full)) {
            return Err(Error::invariant(
                "opens_within_points",
                format!("{bad:?} mentions an unknown point"),
            ));
        }
        if opens.first() != Some(&PointSet::EMPTY) {
            return Err(Error::invariant("space_contains_empty", "the empty set is not open"));
        }
        if !opens.contains(&full) {
            return Err(Error::invariant("space_contains_full", "the full point set is not open"));
        }
        for &a in &opens {
            for &b in &opens {
                if opens.binary_search(&a.intersection(b)).is_err() {
                    return Err(Error::invariant(
                        "opens_closed_under_intersection",
                        format!("{a:?} ∩ {b:?} is not open"),
                    ));
                }
                if opens.binary_search(&a.union(b)).is_err() {
                    return Err(Error::invariant(
                        "opens_closed_under_union",
                        format!("{a:?} ∪ {b:?} is not open"),
                    ));
                }
            }
        }
        Ok(FiniteSpace { points, opens })
    }

    /// Builds a space from point labels and opens given as lists of labels.
    pub fn from_labels<S: AsRef<str>>(points: &[S], opens: &[Vec<S>]) -> Result<Self> {
        let points: Vec<String> = points.iter().map(|s| s.as_ref().to_string()).collect();
        let opens = opens
            .iter()
            .map(|o| {
                o.iter()
                    .map(|l| {
                        points
                            .iter()
                            .position(|p| p == l.as_ref())
                            .ok_or_else(|| Error::UnknownElement(l.as_ref().to_string()))
                    })
                    .collect::<Result<Vec<_>>>()
                    .map(PointSet::from_indices)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(points, opens)
    }

    fn numbered(n: usize) -> Vec<String> {
        (1..=n).map(|i| i.to_string()).collect()
    }

    /// Points labelled `1..=n`, every subset open.
    pub fn discrete(n: usize) -> Self {
        let opens = (0..(1u64 << n)).map(PointSet).collect();
        Self::new(Self::numbered(n), opens).expect("discrete topology")
    }

    pub fn indiscrete(n: usize) -> Self {
        Self::new(Self::numbered(n), vec![PointSet::EMPTY, PointSet::full(n)]).expect("indiscrete")
    }

    /// Points `a`, `b` with opens ∅, {a}, {a,b}.
    pub fn sierpinski() -> Self {
        Self::new(
            vec!["a".into(), "b".into()],
            vec![PointSet::EMPTY, PointSet(1), PointSet(3)],
        )
        .expect("Sierpiński space")
    }

    /// The one-point space.
    pub fn point() -> Self {
        Self::discrete(1)
    }

    /// The Alexandrov topology of a poset: opens are the up-closed subsets.
    pub fn alexandrov(order: &FinitePoset) -> Result<Self> {
        let n = order.len();
        if n > 20 {
            return Err(Error::BoundExceeded {
                what: "points for Alexandrov enumeration",
                value: n,
                limit: 20,
            });
        }
        let opens = (0..(1u64 << n))
            .map(PointSet)
            .filter(|s| {
                s.iter()
                    .all(|x| (0..n).all(|y| !order.leq(x, y) || s.contains(y)))
            })
            .collect();
        Self::new(order.labels().to_vec(), opens)
    }

    pub fn points(&self) -> &[String] {
        &self.points
    }

    pub fn n_points(&self) -> usize {
        self.points.len()
    }

    pub fn opens(&self) -> &[PointSet] {
        &self.opens
    }

    pub fn full(&self) -> PointSet {
        PointSet::full(self.points.len())
    }

    pub fn is_open(&self, s: PointSet) -> bool {
        self.opens.binary_search(&s).is_ok()
    }

    pub fn open_index(&self, s: PointSet) -> Option<usize> {
        self.opens.binary_search(&s).ok()
    }

    /// Opens contained in `s`, in canonical order.
    pub fn opens_within(&self, s: PointSet) -> impl Iterator<Item = PointSet> + '_ {
        self.opens.iter().copied().filter(move |o| o.is_subset(s))
    }

    /// Canonical textual id of a point set, e.g. `{a,b}`.
    pub fn open_id(&self, s: PointSet) -> String {
        let names: Vec<&str> = s.iter().map(|p| self.points[p].as_str()).collect();
        format!("{{{}}}", names.join(","))
    }

    pub fn point_index(&self, label: &str) -> Result<usize> {
        self.points
            .iter()
            .position(|p| p == label)
            .ok_or_else(|| Error::UnknownElement(label.to_string()))
    }

    pub fn set_from_labels<S: AsRef<str>>(&self, labels: &[S]) -> Result<PointSet> {
        labels
            .iter()
            .map(|l| self.point_index(l.as_ref()))
            .collect::<Result<Vec<_>>>()
            .map(PointSet::from_indices)
    }

    pub fn labels_of(&self, s: PointSet) -> Vec<String> {
        s.iter().map(|p| self.points[p].clone()).collect()
    }

    /// The open subspace on `u`, with the embedding of its points.
    pub fn subspace(&self, u: PointSet) -> Result<(FiniteSpace, Vec<usize>)> {
        if !self.is_open(u) {
            return Err(Error::Precondition(format!(
                "{} is not open",
                self.open_id(u)
            )));
        }
        let embedding: Vec<usize> = u.iter().collect();
        let points = embedding.iter().map(|&p| self.points[p].clone()).collect();
        let opens = self
            .opens_within(u)
            .map(|o| pull_into(o, &embedding))
            .collect();
        Ok((FiniteSpace::new(points, opens)?, embedding))
    }

    /// The smallest open containing point `p`.
    pub fn minimal_open(&self, p: usize) -> PointSet {
        self.opens
            .iter()
            .filter(|o| o.contains(p))
            .fold(self.full(), |acc, &o| acc.intersection(o))
    }

    /// The opens ordered by inclusion.
    pub fn frame_of(&self) -> FinitePoset {
        let labels = self.opens.iter().map(|&o| self.open_id(o)).collect();
        let n = self.opens.len();
        let leq: Vec<Vec<bool>> = (0..n)
            .map(|i| (0..n).map(|j| self.opens[i].is_subset(self.opens[j])).collect())
            .collect();
        FinitePoset::new(labels, &leq).expect("inclusion is a partial order")
    }
}

/// Re-expresses a subset of the ambient points in subspace coordinates.
pub fn pull_into(s: PointSet, embedding: &[usize]) -> PointSet {
    PointSet::from_indices(
        embedding
            .iter()
            .enumerate()
            .filter(|(_, &p)| s.contains(p))
            .map(|(k, _)| k),
    )
}

/// Pushes a subspace point set back into ambient coordinates.
pub fn push_out(s: PointSet, embedding: &[usize]) -> PointSet {
    PointSet::from_indices(s.iter().map(|k| embedding[k]))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v_poset() -> FinitePoset {
        FinitePoset::from_label_pairs(&["k", "a", "b"], &[("k", "a"), ("k", "b")]).unwrap()
    }

    /// Brute-force oracle: scan the relation matrix row by row.
    fn scan_downset(p: &FinitePoset, i: usize) -> Vec<usize> {
        let m = p.leq_matrix();
        (0..p.len()).filter(|&j| m[j][i]).collect()
    }

    #[test]
    fn downset_examples() {
        let chain = FinitePoset::chain(3);
        assert_eq!(chain.downset(1).unwrap().members().collect::<Vec<_>>(), vec![0, 1]);
        let anti = FinitePoset::antichain(&["a", "b"]);
        assert_eq!(anti.downset_of("a").unwrap().members().collect::<Vec<_>>(), vec![0]);
        let v = v_poset();
        let a = v.index_of("a").unwrap();
        let got: Vec<usize> = v.downset(a).unwrap().members().collect();
        assert_eq!(got, scan_downset(&v, a));
        assert_eq!(got, vec![0, 1]);
        assert!(matches!(v.downset_of("z"), Err(Error::UnknownElement(_))));
    }

    #[test]
    fn is_sieve_examples() {
        let chain = FinitePoset::chain(2);
        let mk = |v: &[usize]| {
            let mut b = FixedBitSet::with_capacity(2);
            v.iter().for_each(|&i| b.insert(i));
            b
        };
        assert!(chain.is_sieve(&mk(&[0])));
        assert!(!chain.is_sieve(&mk(&[1])));
        assert!(chain.is_sieve(&mk(&[])));
        assert!(chain.sieve([1]).is_err());
    }

    #[test]
    fn sieve_lattice_examples() {
        let one = FinitePoset::chain(1);
        let l = one.sieve_lattice(DEFAULT_SIEVE_BOUND).unwrap();
        assert_eq!(l.len(), 2);
        assert!(l[0].is_empty() && l[1].len() == 1);
        assert_eq!(FinitePoset::antichain(&["a", "b"]).sieve_lattice(12).unwrap().len(), 4);
        let chain = FinitePoset::chain(2).sieve_lattice(12).unwrap();
        let sets: Vec<Vec<usize>> = chain.iter().map(|s| s.members().collect()).collect();
        assert_eq!(sets, vec![vec![], vec![0], vec![0, 1]]);
        assert!(matches!(
            FinitePoset::chain(13).sieve_lattice(12),
            Err(Error::BoundExceeded { .. })
        ));
    }

    #[test]
    fn filtered_examples() {
        assert!(FinitePoset::chain(3).is_filtered());
        assert!(!FinitePoset::antichain(&["a", "b"]).is_filtered());
        assert!(v_poset().is_filtered());
        assert!(!FinitePoset::empty().is_filtered());
    }

    #[test]
    fn cycles_rejected() {
        let err = FinitePoset::from_pairs(vec!["a".into(), "b".into()], &[(0, 1), (1, 0)]);
        assert!(matches!(err, Err(Error::Invariant { name: "poset_antisymmetry", .. })));
        let dup = FinitePoset::from_pairs(vec!["a".into(), "a".into()], &[]);
        assert!(matches!(dup, Err(Error::Invariant { name: "poset_labels_unique", .. })));
    }

    #[test]
    fn transitive_closure_taken() {
        let p = FinitePoset::from_pairs(vec!["0".into(), "1".into(), "2".into()], &[(0, 1), (1, 2)])
            .unwrap();
        assert!(p.leq(0, 2));
        assert_eq!(p.covering_pairs(), vec![(0, 1), (1, 2)]);
    }

    #[test]
    fn frame_examples() {
        let s = FiniteSpace::sierpinski().frame_of();
        assert_eq!(s.len(), 3);
        assert!(s.leq(0, 1) && s.leq(1, 2));
        let d = FiniteSpace::discrete(2).frame_of();
        assert_eq!(d.len(), 4);
        assert_eq!(d.covering_pairs().len(), 4);
        let ind = FiniteSpace::indiscrete(2).frame_of();
        assert_eq!(ind.len(), 2);
        assert!(ind.leq(0, 1));
    }

    #[test]
    fn space_validation_names_invariant() {
        let pts: Vec<String> = vec!["a".into(), "b".into()];
        let e = FiniteSpace::new(pts.clone(), vec![PointSet(0), PointSet(1), PointSet(2), PointSet(3)])
            .map(|_| ());
        assert!(e.is_ok());
        let e = FiniteSpace::new(pts.clone(), vec![PointSet(1), PointSet(3)]);
        assert!(matches!(e, Err(Error::Invariant { name: "space_contains_empty", .. })));
        let e = FiniteSpace::new(pts, vec![PointSet(0), PointSet(1), PointSet(2)]);
        assert!(matches!(e, Err(Error::Invariant { name: "space_contains_full", .. })));
        let e = FiniteSpace::new(
            vec!["a".into(), "b".into(), "c".into()],
            vec![PointSet(0), PointSet(3), PointSet(6), PointSet(7)],
        );
        assert!(matches!(
            e,
            Err(Error::Invariant { name: "opens_closed_under_intersection", .. })
        ));
    }

    #[test]
    fn alexandrov_of_chain_is_sierpinski_like() {
        let sp = FiniteSpace::alexandrov(&FinitePoset::chain(2)).unwrap();
        assert_eq!(sp.opens().len(), 3);
        assert!(sp.is_open(PointSet::singleton(1)));
        assert!(!sp.is_open(PointSet::singleton(0)));
    }

    #[test]
    fn subspace_reindexes() {
        let d = FiniteSpace::discrete(3);
        let (sub, emb) = d.subspace(PointSet(0b101)).unwrap();
        assert_eq!(sub.n_points(), 2);
        assert_eq!(emb, vec![0, 2]);
        assert_eq!(sub.opens().len(), 4);
        assert_eq!(push_out(PointSet(0b10), &emb), PointSet(0b100));
    }
}
