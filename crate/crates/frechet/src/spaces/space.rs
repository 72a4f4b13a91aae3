//! Hilbert-space shape terms.
//!
//! A `SpaceTerm` describes one of the constructible finite-dimensional
//! spaces: the trivial space, the scalar field, finite direct sums (tuples
//! for inhomogeneous families, copowers for homogeneous ones) and tensor
//! products. Shapes carry no data; concrete elements live in
//! [`Vector`](super::vector::Vector).

use std::fmt;

use super::index::IndexSet;

/// The shape of a constructible Hilbert space.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum SpaceTerm {
    /// The trivial space containing only 0.
    Zero,
    /// The scalar field ℝ.
    Scalar,
    /// Finite inhomogeneous direct sum `V₁ ⊕ … ⊕ Vₙ`.
    Tuple(Vec<SpaceTerm>),
    /// Copower `∏^X V`: one copy of `V` per element of `X`.
    Pow(IndexSet, Box<SpaceTerm>),
    /// Tensor product `U ⊗ V`.
    Tensor(Box<SpaceTerm>, Box<SpaceTerm>),
}

impl SpaceTerm {
    pub fn tuple(items: impl IntoIterator<Item = SpaceTerm>) -> Self {
        SpaceTerm::Tuple(items.into_iter().collect())
    }

    pub fn pow(index: IndexSet, body: SpaceTerm) -> Self {
        SpaceTerm::Pow(index, Box::new(body))
    }

    pub fn tensor(left: SpaceTerm, right: SpaceTerm) -> Self {
        SpaceTerm::Tensor(Box::new(left), Box::new(right))
    }

    /// `∏^⟨n⟩ℝ`, the space of n-vectors of scalars.
    pub fn rn(n: usize) -> Self {
        SpaceTerm::pow(IndexSet::Seg(n), SpaceTerm::Scalar)
    }

    /// The pair space `V × W`.
    pub fn pair(left: SpaceTerm, right: SpaceTerm) -> Self {
        SpaceTerm::Tuple(vec![left, right])
    }

    pub fn dim(&self) -> usize {
        match self {
            SpaceTerm::Zero => 0,
            SpaceTerm::Scalar => 1,
            SpaceTerm::Tuple(items) => items.iter().map(SpaceTerm::dim).sum(),
            SpaceTerm::Pow(x, body) => x.card() * body.dim(),
            SpaceTerm::Tensor(u, v) => u.dim() * v.dim(),
        }
    }

    /// Whether this shape is a direct-sum family (tuple or copower).
    pub fn is_family(&self) -> bool {
        matches!(self, SpaceTerm::Tuple(_) | SpaceTerm::Pow(_, _))
    }

    /// Number of components of a family shape.
    pub fn family_len(&self) -> Option<usize> {
        match self {
            SpaceTerm::Tuple(items) => Some(items.len()),
            SpaceTerm::Pow(x, _) => Some(x.card()),
            _ => None,
        }
    }

    /// Component space at position `at` of a family shape.
    pub fn component(&self, at: usize) -> Option<&SpaceTerm> {
        match self {
            SpaceTerm::Tuple(items) => items.get(at),
            SpaceTerm::Pow(x, body) => (at < x.card()).then_some(body.as_ref()),
            _ => None,
        }
    }

    /// All component spaces of a family shape.
    pub fn components(&self) -> Option<Vec<SpaceTerm>> {
        match self {
            SpaceTerm::Tuple(items) => Some(items.clone()),
            SpaceTerm::Pow(x, body) => Some(vec![(**body).clone(); x.card()]),
            _ => None,
        }
    }

    /// Structural equality up to the identification `∏^X V = ⊕_{x∈X} V`:
    /// a copower and the tuple of its components describe the same space.
    pub fn equiv(&self, other: &SpaceTerm) -> bool {
        match (self, other) {
            (SpaceTerm::Zero, SpaceTerm::Zero) => true,
            (SpaceTerm::Scalar, SpaceTerm::Scalar) => true,
            (SpaceTerm::Tensor(a, b), SpaceTerm::Tensor(c, d)) => a.equiv(c) && b.equiv(d),
            (a, b) if a.is_family() && b.is_family() => {
                if a.family_len() != b.family_len() {
                    return false;
                }
                let n = a.family_len().unwrap();
                (0..n).all(|i| a.component(i).unwrap().equiv(b.component(i).unwrap()))
            }
            _ => false,
        }
    }
}

impl fmt::Display for SpaceTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpaceTerm::Zero => write!(f, "0"),
            SpaceTerm::Scalar => write!(f, "R"),
            SpaceTerm::Tuple(items) => {
                write!(f, "(")?;
                for (i, s) in items.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{s}")?;
                }
                write!(f, ")")
            }
            SpaceTerm::Pow(x, body) => write!(f, "[{x}]{body}"),
            SpaceTerm::Tensor(u, v) => {
                let wrap = |s: &SpaceTerm| matches!(s, SpaceTerm::Tensor(_, _));
                if wrap(u) {
                    write!(f, "({u})")?;
                } else {
                    write!(f, "{u}")?;
                }
                write!(f, " (x) ")?;
                if wrap(v) {
                    write!(f, "({v})")
                } else {
                    write!(f, "{v}")
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dims_follow_structure() {
        assert_eq!(SpaceTerm::pow(IndexSet::Seg(3), SpaceTerm::Scalar).dim(), 3);
        assert_eq!(
            SpaceTerm::tensor(SpaceTerm::rn(2), SpaceTerm::rn(3)).dim(),
            6
        );
        assert_eq!(
            SpaceTerm::tuple([SpaceTerm::Scalar, SpaceTerm::rn(2)]).dim(),
            3
        );
        assert_eq!(SpaceTerm::Zero.dim(), 0);
    }

    #[test]
    fn copower_and_tuple_of_copies_are_equivalent() {
        let pow = SpaceTerm::rn(3);
        let tup = SpaceTerm::tuple([SpaceTerm::Scalar, SpaceTerm::Scalar, SpaceTerm::Scalar]);
        assert!(pow.equiv(&tup));
        assert!(tup.equiv(&pow));
        assert_ne!(pow, tup);

        let nested_pow = SpaceTerm::pow(IndexSet::Seg(2), SpaceTerm::rn(2));
        let nested_tup = SpaceTerm::tuple([
            SpaceTerm::tuple([SpaceTerm::Scalar, SpaceTerm::Scalar]),
            SpaceTerm::rn(2),
        ]);
        assert!(nested_pow.equiv(&nested_tup));
    }

    #[test]
    fn inequivalent_shapes() {
        assert!(!SpaceTerm::rn(2).equiv(&SpaceTerm::rn(3)));
        assert!(!SpaceTerm::Zero.equiv(&SpaceTerm::Scalar));
        assert!(!SpaceTerm::rn(1).equiv(&SpaceTerm::Scalar));
        assert!(!SpaceTerm::tensor(SpaceTerm::Scalar, SpaceTerm::Scalar).equiv(&SpaceTerm::Scalar));
    }
}
