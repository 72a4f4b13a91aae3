//! Concrete elements of constructible spaces.
//!
//! Direct-sum elements store their components; tensor elements are kept as
//! formal sums of scaled pure tensors and are only identified modulo the
//! vector-space axioms — equality of tensor values is decided through
//! coordinates, never syntactically. This keeps rank-1 data (such as the
//! derivative payloads produced by differentiation) compact.

use rand::Rng;

use crate::error::{Error, Result};

use super::index::IndexSet;
use super::space::SpaceTerm;

/// One scaled pure tensor `coeff · (left ⊗ right)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorTerm {
    pub coeff: f64,
    pub left: Vector,
    pub right: Vector,
}

/// A concrete element of a [`SpaceTerm`].
#[derive(Debug, Clone, PartialEq)]
pub enum Vector {
    /// The zero of an arbitrary space.
    Zero(SpaceTerm),
    /// An element of ℝ.
    Scalar(f64),
    /// An element of an inhomogeneous direct sum.
    Tuple(Vec<Vector>),
    /// An element of a copower `∏^X V`, components in enumeration order.
    Map(IndexSet, Vec<Vector>),
    /// A formal sum of scaled pure tensors; empty sum is the zero of
    /// `left ⊗ right`.
    Tensor {
        left: SpaceTerm,
        right: SpaceTerm,
        terms: Vec<TensorTerm>,
    },
}

impl Vector {
    pub fn scalar(x: f64) -> Self {
        Vector::Scalar(x)
    }

    pub fn tuple(items: impl IntoIterator<Item = Vector>) -> Self {
        Vector::Tuple(items.into_iter().collect())
    }

    /// An element of `∏^⟨n⟩ℝ` from raw scalars.
    pub fn rn(values: impl IntoIterator<Item = f64>) -> Self {
        let items: Vec<Vector> = values.into_iter().map(Vector::Scalar).collect();
        Vector::Map(IndexSet::Seg(items.len()), items)
    }

    pub fn map(index: IndexSet, items: impl IntoIterator<Item = Vector>) -> Self {
        Vector::Map(index, items.into_iter().collect())
    }

    /// The zero vector of `space`.
    pub fn zero(space: &SpaceTerm) -> Self {
        Vector::Zero(space.clone())
    }

    /// A pure tensor `u ⊗ v`.
    pub fn pure_tensor(u: Vector, v: Vector) -> Result<Self> {
        let left = u.shape()?;
        let right = v.shape()?;
        Ok(Vector::Tensor {
            left,
            right,
            terms: vec![TensorTerm {
                coeff: 1.0,
                left: u,
                right: v,
            }],
        })
    }

    /// The unique shape this value inhabits.
    pub fn shape(&self) -> Result<SpaceTerm> {
        match self {
            Vector::Zero(s) => Ok(s.clone()),
            Vector::Scalar(_) => Ok(SpaceTerm::Scalar),
            Vector::Tuple(items) => Ok(SpaceTerm::Tuple(
                items.iter().map(Vector::shape).collect::<Result<_>>()?,
            )),
            Vector::Map(x, items) => {
                if items.len() != x.card() {
                    return Err(Error::shape(format!(
                        "copower value has {} components but index set has cardinality {}",
                        items.len(),
                        x.card()
                    )));
                }
                let Some(first) = items.first() else {
                    return Err(Error::shape(
                        "empty copower value has no unique shape; use the zero vector",
                    ));
                };
                let body = first.shape()?;
                for item in &items[1..] {
                    if !item.shape()?.equiv(&body) {
                        return Err(Error::shape("copower components differ in shape"));
                    }
                }
                Ok(SpaceTerm::Pow(x.clone(), Box::new(body)))
            }
            Vector::Tensor { left, right, terms } => {
                for t in terms {
                    if !t.left.shape()?.equiv(left) || !t.right.shape()?.equiv(right) {
                        return Err(Error::shape("tensor term factor shape mismatch"));
                    }
                }
                Ok(SpaceTerm::tensor(left.clone(), right.clone()))
            }
        }
    }

    /// Checks this value against an expected shape (up to equivalence).
    pub fn matches(&self, space: &SpaceTerm) -> bool {
        self.shape().map(|s| s.equiv(space)).unwrap_or(false)
    }

    /// Components of a direct-sum value, materializing zeros as needed.
    pub fn family_items(&self) -> Result<Vec<Vector>> {
        match self {
            Vector::Tuple(items) => Ok(items.clone()),
            Vector::Map(_, items) => Ok(items.clone()),
            Vector::Zero(s) => {
                let comps = s.components().ok_or_else(|| {
                    Error::shape(format!("expected a direct-sum value, got zero of {s}"))
                })?;
                Ok(comps.iter().map(Vector::zero).collect())
            }
            other => Err(Error::shape(format!(
                "expected a direct-sum value, got {}",
                other.shape().map(|s| s.to_string()).unwrap_or_default()
            ))),
        }
    }

    /// Rebuilds a family value in the container kind dictated by `shape`.
    pub fn family_like(shape: &SpaceTerm, items: Vec<Vector>) -> Vector {
        match shape {
            SpaceTerm::Pow(x, body) => {
                if items.is_empty() {
                    Vector::Zero(SpaceTerm::Pow(x.clone(), body.clone()))
                } else {
                    Vector::Map(x.clone(), items)
                }
            }
            _ => Vector::Tuple(items),
        }
    }

    /// The formal tensor terms of a tensor-space value.
    pub fn tensor_terms(&self) -> Result<Vec<TensorTerm>> {
        match self {
            Vector::Tensor { terms, .. } => Ok(terms.clone()),
            Vector::Zero(SpaceTerm::Tensor(_, _)) => Ok(Vec::new()),
            other => Err(Error::shape(format!(
                "expected a tensor value, got {}",
                other.shape().map(|s| s.to_string()).unwrap_or_default()
            ))),
        }
    }

    /// Swaps the factors of every pure term: `Σ c·(u⊗v) ↦ Σ c·(v⊗u)`.
    pub fn transpose_tensor(&self) -> Result<Vector> {
        match self {
            Vector::Tensor { left, right, terms } => Ok(Vector::Tensor {
                left: right.clone(),
                right: left.clone(),
                terms: terms
                    .iter()
                    .map(|t| TensorTerm {
                        coeff: t.coeff,
                        left: t.right.clone(),
                        right: t.left.clone(),
                    })
                    .collect(),
            }),
            Vector::Zero(SpaceTerm::Tensor(u, v)) => {
                Ok(Vector::Zero(SpaceTerm::tensor((**v).clone(), (**u).clone())))
            }
            _ => Err(Error::shape("transpose requires a tensor value")),
        }
    }

    pub fn add(&self, other: &Vector) -> Result<Vector> {
        let s = self.shape()?;
        let t = other.shape()?;
        if !s.equiv(&t) {
            return Err(Error::shape(format!("cannot add values of shapes {s} and {t}")));
        }
        match (self, other) {
            (Vector::Zero(_), w) => Ok(w.clone()),
            (v, Vector::Zero(_)) => Ok(v.clone()),
            (Vector::Scalar(a), Vector::Scalar(b)) => Ok(Vector::Scalar(a + b)),
            (Vector::Tensor { left, right, terms }, w) => {
                let mut all = terms.clone();
                all.extend(w.tensor_terms()?);
                Ok(Vector::Tensor {
                    left: left.clone(),
                    right: right.clone(),
                    terms: all,
                })
            }
            (v, w) => {
                let items = v
                    .family_items()?
                    .iter()
                    .zip(w.family_items()?.iter())
                    .map(|(a, b)| a.add(b))
                    .collect::<Result<Vec<_>>>()?;
                Ok(Vector::family_like(&s, items))
            }
        }
    }

    pub fn sub(&self, other: &Vector) -> Result<Vector> {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, k: f64) -> Vector {
        match self {
            Vector::Zero(s) => Vector::Zero(s.clone()),
            Vector::Scalar(a) => Vector::Scalar(k * a),
            Vector::Tuple(items) => Vector::Tuple(items.iter().map(|v| v.scale(k)).collect()),
            Vector::Map(x, items) => {
                Vector::Map(x.clone(), items.iter().map(|v| v.scale(k)).collect())
            }
            Vector::Tensor { left, right, terms } => Vector::Tensor {
                left: left.clone(),
                right: right.clone(),
                terms: terms
                    .iter()
                    .map(|t| TensorTerm {
                        coeff: k * t.coeff,
                        left: t.left.clone(),
                        right: t.right.clone(),
                    })
                    .collect(),
            },
        }
    }

    /// The inner product. Symmetric, bilinear and positive definite; on
    /// tensors it is `(u₁⊗v₁) ⊙ (u₂⊗v₂) = (u₁⊙u₂)·(v₁⊙v₂)` extended
    /// bilinearly to formal sums.
    pub fn inner(&self, other: &Vector) -> Result<f64> {
        let s = self.shape()?;
        let t = other.shape()?;
        if !s.equiv(&t) {
            return Err(Error::shape(format!(
                "inner product requires matching shapes, got {s} and {t}"
            )));
        }
        match (self, other) {
            (Vector::Zero(_), _) | (_, Vector::Zero(_)) => Ok(0.0),
            (Vector::Scalar(a), Vector::Scalar(b)) => Ok(a * b),
            (v @ Vector::Tensor { .. }, w) | (v, w @ Vector::Tensor { .. }) => {
                let mut acc = 0.0;
                for a in v.tensor_terms()? {
                    for b in w.tensor_terms()? {
                        acc += a.coeff * b.coeff * a.left.inner(&b.left)? * a.right.inner(&b.right)?;
                    }
                }
                Ok(acc)
            }
            (v, w) => {
                let mut acc = 0.0;
                for (a, b) in v.family_items()?.iter().zip(w.family_items()?.iter()) {
                    acc += a.inner(b)?;
                }
                Ok(acc)
            }
        }
    }

    pub fn norm(&self) -> Result<f64> {
        Ok(self.inner(self)?.sqrt())
    }

    /// Tensor contraction of values: `∗ : (W⊗V) × (V⊗U) → W⊗U` with
    /// `(w⊗v) ∗ (v′⊗u) = (v⊙v′)·(w⊗u)`, extended bilinearly.
    pub fn contract(&self, other: &Vector) -> Result<Vector> {
        let (w_sp, v_sp) = match self.shape()? {
            SpaceTerm::Tensor(a, b) => ((*a).clone(), (*b).clone()),
            s => return Err(Error::shape(format!("contraction left operand not a tensor: {s}"))),
        };
        let (v_sp2, u_sp) = match other.shape()? {
            SpaceTerm::Tensor(a, b) => ((*a).clone(), (*b).clone()),
            s => return Err(Error::shape(format!("contraction right operand not a tensor: {s}"))),
        };
        if !v_sp.equiv(&v_sp2) {
            return Err(Error::shape(format!(
                "contraction middle factors differ: {v_sp} vs {v_sp2}"
            )));
        }
        let mut terms = Vec::new();
        for a in self.tensor_terms()? {
            for b in other.tensor_terms()? {
                let k = a.coeff * b.coeff * a.right.inner(&b.left)?;
                terms.push(TensorTerm {
                    coeff: k,
                    left: a.left.clone(),
                    right: b.right.clone(),
                });
            }
        }
        Ok(Vector::Tensor {
            left: w_sp,
            right: u_sp,
            terms,
        })
    }

    /// Coordinates with respect to the fixed orthonormal basis. Tensor
    /// coordinates are Kronecker-ordered: left factor outer, right inner.
    pub fn to_coords(&self) -> Result<Vec<f64>> {
        match self {
            Vector::Zero(s) => Ok(vec![0.0; s.dim()]),
            Vector::Scalar(a) => Ok(vec![*a]),
            Vector::Tuple(items) => {
                let mut out = Vec::new();
                for v in items {
                    out.extend(v.to_coords()?);
                }
                Ok(out)
            }
            Vector::Map(_, items) => {
                let mut out = Vec::new();
                for v in items {
                    out.extend(v.to_coords()?);
                }
                Ok(out)
            }
            Vector::Tensor { left, right, terms } => {
                let (dl, dr) = (left.dim(), right.dim());
                let mut out = vec![0.0; dl * dr];
                for t in terms {
                    let lc = t.left.to_coords()?;
                    let rc = t.right.to_coords()?;
                    for (i, li) in lc.iter().enumerate() {
                        if *li == 0.0 {
                            continue;
                        }
                        for (j, rj) in rc.iter().enumerate() {
                            out[i * dr + j] += t.coeff * li * rj;
                        }
                    }
                }
                Ok(out)
            }
        }
    }

    /// Rebuilds a value of `space` from coordinates.
    pub fn from_coords(space: &SpaceTerm, coords: &[f64]) -> Result<Vector> {
        if coords.len() != space.dim() {
            return Err(Error::dim(format!(
                "expected {} coordinates for {space}, got {}",
                space.dim(),
                coords.len()
            )));
        }
        match space {
            SpaceTerm::Zero => Ok(Vector::Zero(SpaceTerm::Zero)),
            SpaceTerm::Scalar => Ok(Vector::Scalar(coords[0])),
            SpaceTerm::Tuple(items) => {
                let mut out = Vec::with_capacity(items.len());
                let mut at = 0;
                for s in items {
                    out.push(Vector::from_coords(s, &coords[at..at + s.dim()])?);
                    at += s.dim();
                }
                Ok(Vector::Tuple(out))
            }
            SpaceTerm::Pow(x, body) => {
                if x.card() == 0 {
                    return Ok(Vector::Zero(space.clone()));
                }
                let mut out = Vec::with_capacity(x.card());
                let mut at = 0;
                for _ in 0..x.card() {
                    out.push(Vector::from_coords(body, &coords[at..at + body.dim()])?);
                    at += body.dim();
                }
                Ok(Vector::Map(x.clone(), out))
            }
            SpaceTerm::Tensor(u, v) => {
                // One pure term per left-basis row with a nonzero slice.
                let dv = v.dim();
                let mut terms = Vec::new();
                for i in 0..u.dim() {
                    let row = &coords[i * dv..(i + 1) * dv];
                    if row.iter().all(|c| *c == 0.0) {
                        continue;
                    }
                    terms.push(TensorTerm {
                        coeff: 1.0,
                        left: basis(u, i)?,
                        right: Vector::from_coords(v, row)?,
                    });
                }
                Ok(Vector::Tensor {
                    left: (**u).clone(),
                    right: (**v).clone(),
                    terms,
                })
            }
        }
    }

    /// Coordinate-wise comparison with absolute tolerance.
    pub fn approx_eq(&self, other: &Vector, tol: f64) -> bool {
        match (self.to_coords(), other.to_coords()) {
            (Ok(a), Ok(b)) => {
                a.len() == b.len() && a.iter().zip(&b).all(|(x, y)| (x - y).abs() <= tol)
            }
            _ => false,
        }
    }
}

/// The `i`-th basis vector of `space` (enumeration order).
pub fn basis(space: &SpaceTerm, i: usize) -> Result<Vector> {
    let d = space.dim();
    if i >= d {
        return Err(Error::dim(format!("basis index {i} out of range for dim {d}")));
    }
    let mut coords = vec![0.0; d];
    coords[i] = 1.0;
    Vector::from_coords(space, &coords)
}

/// A random element of `space` with coordinates in [-1, 1]. Tensor spaces
/// are sampled as short formal sums of random pure tensors so the
/// formal-sum code paths are exercised, not just coordinate bases.
pub fn random_vector<R: Rng + ?Sized>(space: &SpaceTerm, rng: &mut R) -> Vector {
    match space {
        SpaceTerm::Zero => Vector::Zero(SpaceTerm::Zero),
        SpaceTerm::Scalar => Vector::Scalar(rng.random_range(-1.0..=1.0)),
        SpaceTerm::Tuple(items) => {
            Vector::Tuple(items.iter().map(|s| random_vector(s, rng)).collect())
        }
        SpaceTerm::Pow(x, body) => {
            if x.card() == 0 {
                return Vector::Zero(space.clone());
            }
            Vector::Map(
                x.clone(),
                (0..x.card()).map(|_| random_vector(body, rng)).collect(),
            )
        }
        SpaceTerm::Tensor(u, v) => {
            let k = rng.random_range(1..=3);
            Vector::Tensor {
                left: (**u).clone(),
                right: (**v).clone(),
                terms: (0..k)
                    .map(|_| TensorTerm {
                        coeff: rng.random_range(-1.0..=1.0),
                        left: random_vector(u, rng),
                        right: random_vector(v, rng),
                    })
                    .collect(),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn r2r2() -> SpaceTerm {
        SpaceTerm::tensor(SpaceTerm::rn(2), SpaceTerm::rn(2))
    }

    #[test]
    fn add_is_componentwise() {
        let v = Vector::rn([1.0, 2.0]);
        let w = Vector::rn([3.0, 4.0]);
        assert_eq!(v.add(&w).unwrap().to_coords().unwrap(), vec![4.0, 6.0]);
    }

    #[test]
    fn add_zero_is_identity() {
        let v = Vector::tuple([Vector::Scalar(1.0), Vector::rn([2.0, 3.0])]);
        let z = Vector::zero(&v.shape().unwrap());
        assert_eq!(z.add(&v).unwrap(), v);
        assert!(v.add(&z).unwrap().approx_eq(&v, 0.0));
    }

    #[test]
    fn add_rejects_shape_mismatch() {
        let v = Vector::rn([1.0, 2.0]);
        let w = Vector::rn([1.0, 2.0, 3.0]);
        assert!(matches!(v.add(&w), Err(Error::Shape(_))));
    }

    #[test]
    fn scale_multiplies_tensor_coefficients() {
        let t = Vector::pure_tensor(Vector::rn([1.0, 0.0]), Vector::rn([0.0, 1.0])).unwrap();
        let s = t.scale(2.0);
        match &s {
            Vector::Tensor { terms, .. } => {
                assert_eq!(terms.len(), 1);
                assert_eq!(terms[0].coeff, 2.0);
            }
            _ => panic!("expected tensor"),
        }
        assert_eq!(s.to_coords().unwrap(), vec![0.0, 2.0, 0.0, 0.0]);
    }

    #[test]
    fn inner_is_dot_product_in_coordinates() {
        let v = Vector::rn([1.0, 2.0, 3.0]);
        let w = Vector::rn([4.0, 5.0, 6.0]);
        assert_eq!(v.inner(&w).unwrap(), 32.0);
        let z = Vector::zero(&v.shape().unwrap());
        assert_eq!(v.inner(&z).unwrap(), 0.0);
    }

    #[test]
    fn tensor_inner_multiplies_factor_inners() {
        // u=(1,2), v=(3,0): (u⊙u)·(v⊙v) = 5·9 = 45
        let u = Vector::rn([1.0, 2.0]);
        let v = Vector::rn([3.0, 0.0]);
        let uv = Vector::pure_tensor(u, v).unwrap();
        assert_eq!(uv.inner(&uv).unwrap(), 45.0);
    }

    #[test]
    fn kronecker_coordinates() {
        let t = Vector::pure_tensor(Vector::rn([1.0, 0.0]), Vector::rn([0.0, 1.0])).unwrap();
        assert_eq!(t.to_coords().unwrap(), vec![0.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn from_coords_round_trips() {
        let spaces = [
            SpaceTerm::tuple([SpaceTerm::Scalar, SpaceTerm::Scalar]),
            SpaceTerm::rn(4),
            r2r2(),
            SpaceTerm::tuple([SpaceTerm::rn(2), r2r2()]),
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for s in &spaces {
            let v = random_vector(s, &mut rng);
            let c = v.to_coords().unwrap();
            let w = Vector::from_coords(s, &c).unwrap();
            assert_eq!(w.to_coords().unwrap(), c);
        }
        let direct = Vector::from_coords(
            &SpaceTerm::tuple([SpaceTerm::Scalar, SpaceTerm::Scalar]),
            &[7.0, 9.0],
        )
        .unwrap();
        assert_eq!(direct, Vector::tuple([Vector::Scalar(7.0), Vector::Scalar(9.0)]));
    }

    #[test]
    fn basis_vectors_are_unit_coordinates() {
        let b = basis(&SpaceTerm::rn(2), 0).unwrap();
        assert_eq!(b.to_coords().unwrap(), vec![1.0, 0.0]);
        assert!(basis(&SpaceTerm::rn(2), 2).is_err());
    }

    #[test]
    fn tensor_bilinearity_in_coordinates() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let u1 = random_vector(&SpaceTerm::rn(2), &mut rng);
            let u2 = random_vector(&SpaceTerm::rn(2), &mut rng);
            let v = random_vector(&SpaceTerm::rn(3), &mut rng);
            let lhs = Vector::pure_tensor(u1.add(&u2).unwrap(), v.clone()).unwrap();
            let rhs = Vector::pure_tensor(u1.clone(), v.clone())
                .unwrap()
                .add(&Vector::pure_tensor(u2.clone(), v.clone()).unwrap())
                .unwrap();
            assert!(lhs.approx_eq(&rhs, 1e-12));
        }
    }

    #[test]
    fn tensor_inner_matches_coordinate_dot() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..20 {
            let a = random_vector(&r2r2(), &mut rng);
            let b = random_vector(&r2r2(), &mut rng);
            let direct = a.inner(&b).unwrap();
            let dot: f64 = a
                .to_coords()
                .unwrap()
                .iter()
                .zip(b.to_coords().unwrap())
                .map(|(x, y)| x * y)
                .sum();
            assert!((direct - dot).abs() <= 1e-12, "{direct} vs {dot}");
        }
    }

    #[test]
    fn contraction_law_on_pure_tensors() {
        // ((1,0)⊗(0,1)) ∗ ((0,1)⊗(2,3)) = ((0,1)⊙(0,1))·((1,0)⊗(2,3))
        let a = Vector::pure_tensor(Vector::rn([1.0, 0.0]), Vector::rn([0.0, 1.0])).unwrap();
        let b = Vector::pure_tensor(Vector::rn([0.0, 1.0]), Vector::rn([2.0, 3.0])).unwrap();
        let c = a.contract(&b).unwrap();
        let expect = Vector::pure_tensor(Vector::rn([1.0, 0.0]), Vector::rn([2.0, 3.0])).unwrap();
        assert!(c.approx_eq(&expect, 1e-12));
    }
}
