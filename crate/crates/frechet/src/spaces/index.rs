//! Finite index sets, their elements, and relations between them.
//!
//! Index sets are built from initial segments `⟨n⟩ = {1..n}` by Cartesian
//! product and disjoint sum. Every index set is finite and comes with a
//! fixed enumeration order, so positions `0..card` are stable across runs.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};

/// A finite index set: a segment `⟨n⟩`, a product `X×Y` or a disjoint sum `X+Y`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum IndexSet {
    /// The initial segment `{1, …, n}`; `n = 0` gives the empty set.
    Seg(usize),
    /// Cartesian product.
    Prod(Box<IndexSet>, Box<IndexSet>),
    /// Disjoint (tagged) union.
    DisjSum(Box<IndexSet>, Box<IndexSet>),
}

impl IndexSet {
    pub fn seg(n: usize) -> Self {
        IndexSet::Seg(n)
    }

    pub fn prod(left: IndexSet, right: IndexSet) -> Self {
        IndexSet::Prod(Box::new(left), Box::new(right))
    }

    pub fn disj_sum(left: IndexSet, right: IndexSet) -> Self {
        IndexSet::DisjSum(Box::new(left), Box::new(right))
    }

    /// Number of elements.
    pub fn card(&self) -> usize {
        match self {
            IndexSet::Seg(n) => *n,
            IndexSet::Prod(x, y) => x.card() * y.card(),
            IndexSet::DisjSum(x, y) => x.card() + y.card(),
        }
    }

    /// All elements in the fixed total order: segments ascending, products
    /// row-major (left index outer), sums left branch before right branch.
    pub fn enumerate(&self) -> Vec<IndexValue> {
        match self {
            IndexSet::Seg(n) => (1..=*n).map(IndexValue::Num).collect(),
            IndexSet::Prod(x, y) => {
                let ys = y.enumerate();
                x.enumerate()
                    .into_iter()
                    .flat_map(|xv| {
                        ys.iter()
                            .map(move |yv| IndexValue::pair(xv.clone(), yv.clone()))
                    })
                    .collect()
            }
            IndexSet::DisjSum(x, y) => x
                .enumerate()
                .into_iter()
                .map(IndexValue::inl)
                .chain(y.enumerate().into_iter().map(IndexValue::inr))
                .collect(),
        }
    }

    /// Position of `v` in the enumeration, if `v ∈ self`.
    pub fn position(&self, v: &IndexValue) -> Option<usize> {
        match (self, v) {
            (IndexSet::Seg(n), IndexValue::Num(i)) => {
                if *i >= 1 && i <= n {
                    Some(i - 1)
                } else {
                    None
                }
            }
            (IndexSet::Prod(x, y), IndexValue::Pair(a, b)) => {
                Some(x.position(a)? * y.card() + y.position(b)?)
            }
            (IndexSet::DisjSum(x, _), IndexValue::Inl(a)) => x.position(a),
            (IndexSet::DisjSum(x, y), IndexValue::Inr(b)) => Some(x.card() + y.position(b)?),
            _ => None,
        }
    }

    pub fn contains(&self, v: &IndexValue) -> bool {
        self.position(v).is_some()
    }

    /// Element at enumeration position `pos`.
    pub fn value_at(&self, pos: usize) -> Result<IndexValue> {
        if pos >= self.card() {
            return Err(Error::dim(format!(
                "index position {pos} out of range for set of cardinality {}",
                self.card()
            )));
        }
        match self {
            IndexSet::Seg(_) => Ok(IndexValue::Num(pos + 1)),
            IndexSet::Prod(x, y) => {
                let yc = y.card();
                Ok(IndexValue::pair(x.value_at(pos / yc)?, y.value_at(pos % yc)?))
            }
            IndexSet::DisjSum(x, y) => {
                let xc = x.card();
                if pos < xc {
                    Ok(IndexValue::inl(x.value_at(pos)?))
                } else {
                    Ok(IndexValue::inr(y.value_at(pos - xc)?))
                }
            }
        }
    }
}

impl fmt::Display for IndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IndexSet::Seg(n) => write!(f, "{n}"),
            IndexSet::Prod(x, y) => write!(f, "({x}*{y})"),
            IndexSet::DisjSum(x, y) => write!(f, "({x}+{y})"),
        }
    }
}

/// An element of an index set.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum IndexValue {
    /// Element of a segment, 1-based.
    Num(usize),
    /// Element of a product.
    Pair(Box<IndexValue>, Box<IndexValue>),
    /// Left injection into a disjoint sum.
    Inl(Box<IndexValue>),
    /// Right injection into a disjoint sum.
    Inr(Box<IndexValue>),
}

impl IndexValue {
    pub fn pair(a: IndexValue, b: IndexValue) -> Self {
        IndexValue::Pair(Box::new(a), Box::new(b))
    }

    pub fn inl(a: IndexValue) -> Self {
        IndexValue::Inl(Box::new(a))
    }

    pub fn inr(b: IndexValue) -> Self {
        IndexValue::Inr(Box::new(b))
    }
}

impl fmt::Display for IndexValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IndexValue::Num(i) => write!(f, "{i}"),
            IndexValue::Pair(a, b) => write!(f, "({a},{b})"),
            IndexValue::Inl(a) => write!(f, "inl {a}"),
            IndexValue::Inr(b) => write!(f, "inr {b}"),
        }
    }
}

/// A finite relation `R ⊆ X×Y`, stored as a deduplicated, ordered pair set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Relation {
    domain: IndexSet,
    codomain: IndexSet,
    pairs: BTreeSet<(IndexValue, IndexValue)>,
}

impl Relation {
    /// Builds a relation, checking that every pair lies in `domain × codomain`.
    pub fn new(
        domain: IndexSet,
        codomain: IndexSet,
        pairs: impl IntoIterator<Item = (IndexValue, IndexValue)>,
    ) -> Result<Self> {
        let pairs: BTreeSet<_> = pairs.into_iter().collect();
        for (x, y) in &pairs {
            if !domain.contains(x) {
                return Err(Error::dim(format!("relation pair ({x},{y}): {x} ∉ domain")));
            }
            if !codomain.contains(y) {
                return Err(Error::dim(format!("relation pair ({x},{y}): {y} ∉ codomain")));
            }
        }
        Ok(Relation {
            domain,
            codomain,
            pairs,
        })
    }

    pub fn domain(&self) -> &IndexSet {
        &self.domain
    }

    pub fn codomain(&self) -> &IndexSet {
        &self.codomain
    }

    pub fn pairs(&self) -> impl Iterator<Item = &(IndexValue, IndexValue)> {
        self.pairs.iter()
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// The reversed relation `Rᵀ = {(y,x) | (x,y) ∈ R}`.
    pub fn transpose(&self) -> Relation {
        Relation {
            domain: self.codomain.clone(),
            codomain: self.domain.clone(),
            pairs: self
                .pairs
                .iter()
                .map(|(x, y)| (y.clone(), x.clone()))
                .collect(),
        }
    }

    /// Relational composition `R;S = {(x,z) | ∃y. (x,y)∈R, (y,z)∈S}`.
    ///
    /// Returns `None` when some `(x,z)` is reachable through more than one
    /// `y`: a plain pair set cannot carry that multiplicity, so reductions
    /// over `R` then `S` would not equal the reduction over `R;S`.
    pub fn compose(&self, then: &Relation) -> Option<Relation> {
        if self.codomain != then.domain {
            return None;
        }
        let mut seen = BTreeSet::new();
        for (x, y) in &self.pairs {
            for (y2, z) in &then.pairs {
                if y == y2 && !seen.insert((x.clone(), z.clone())) {
                    return None;
                }
            }
        }
        Some(Relation {
            domain: self.domain.clone(),
            codomain: then.codomain.clone(),
            pairs: seen,
        })
    }

    /// The identity relation on `x`.
    pub fn identity(x: &IndexSet) -> Relation {
        Relation {
            domain: x.clone(),
            codomain: x.clone(),
            pairs: x.enumerate().into_iter().map(|v| (v.clone(), v)).collect(),
        }
    }

    /// The full relation `X × Y`.
    pub fn all_pairs(x: &IndexSet, y: &IndexSet) -> Relation {
        let ys = y.enumerate();
        Relation {
            domain: x.clone(),
            codomain: y.clone(),
            pairs: x
                .enumerate()
                .into_iter()
                .flat_map(|xv| ys.iter().map(move |yv| (xv.clone(), yv.clone())))
                .collect(),
        }
    }

    /// The prefix relation `{(i,j) | 1 ≤ i ≤ j ≤ n}` on `⟨n⟩`.
    pub fn scan(n: usize) -> Relation {
        let seg = IndexSet::Seg(n);
        Relation {
            domain: seg.clone(),
            codomain: seg,
            pairs: (1..=n)
                .flat_map(|i| (i..=n).map(move |j| (IndexValue::Num(i), IndexValue::Num(j))))
                .collect(),
        }
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (x, y)) in self.pairs.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "({x},{y})")?;
        }
        write!(f, "}}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn card_follows_structure() {
        assert_eq!(IndexSet::Seg(3).card(), 3);
        assert_eq!(IndexSet::prod(IndexSet::Seg(2), IndexSet::Seg(3)).card(), 6);
        assert_eq!(
            IndexSet::disj_sum(IndexSet::Seg(1), IndexSet::Seg(2)).card(),
            3
        );
        assert_eq!(IndexSet::Seg(0).card(), 0);
    }

    #[test]
    fn enumerate_is_bijective_with_positions() {
        let sets = [
            IndexSet::Seg(4),
            IndexSet::prod(IndexSet::Seg(2), IndexSet::Seg(3)),
            IndexSet::disj_sum(
                IndexSet::prod(IndexSet::Seg(2), IndexSet::Seg(2)),
                IndexSet::Seg(3),
            ),
        ];
        for x in &sets {
            let all = x.enumerate();
            assert_eq!(all.len(), x.card());
            for (pos, v) in all.iter().enumerate() {
                assert_eq!(x.position(v), Some(pos));
                assert_eq!(&x.value_at(pos).unwrap(), v);
            }
        }
    }

    #[test]
    fn disj_sum_order_is_left_then_right() {
        let x = IndexSet::disj_sum(IndexSet::Seg(1), IndexSet::Seg(2));
        let vals = x.enumerate();
        assert_eq!(
            vals,
            vec![
                IndexValue::inl(IndexValue::Num(1)),
                IndexValue::inr(IndexValue::Num(1)),
                IndexValue::inr(IndexValue::Num(2)),
            ]
        );
    }

    #[test]
    fn prod_order_is_row_major() {
        let x = IndexSet::prod(IndexSet::Seg(2), IndexSet::Seg(2));
        let vals: Vec<String> = x.enumerate().iter().map(|v| v.to_string()).collect();
        assert_eq!(vals, vec!["(1,1)", "(1,2)", "(2,1)", "(2,2)"]);
    }

    #[test]
    fn relation_rejects_out_of_range_pairs() {
        let err = Relation::new(
            IndexSet::Seg(2),
            IndexSet::Seg(2),
            [(IndexValue::Num(3), IndexValue::Num(1))],
        );
        assert!(err.is_err());
    }

    #[test]
    fn transpose_swaps_pairs() {
        let r = Relation::scan(3);
        let t = r.transpose();
        assert_eq!(t.len(), r.len());
        for (x, y) in r.pairs() {
            assert!(t.pairs().any(|(a, b)| a == y && b == x));
        }
    }

    #[test]
    fn compose_detects_multiplicity() {
        // 1 -> {1,2} then {1,2} -> 1 has two paths from 1 to 1.
        let r = Relation::all_pairs(&IndexSet::Seg(1), &IndexSet::Seg(2));
        let s = Relation::all_pairs(&IndexSet::Seg(2), &IndexSet::Seg(1));
        assert!(r.compose(&s).is_none());

        let id = Relation::identity(&IndexSet::Seg(3));
        let scan = Relation::scan(3);
        assert_eq!(id.compose(&scan), Some(scan.clone()));
        assert_eq!(scan.compose(&id), Some(scan));
    }
}
