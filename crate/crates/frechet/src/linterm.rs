//! The combinatory language of linear functions.
//!
//! `LinTerm` is the codomain of differentiation: derivatives and adjoints
//! are values of this type, and stay symbolic until applied. Every term
//! carries enough shape annotation for [`infer_types`] to assign it a
//! unique signature, and [`apply`] evaluates it on concrete vectors.

use std::fmt;

use crate::error::{Error, Result};
use crate::spaces::{IndexSet, Relation, SpaceTerm, Vector};

/// The signature `domain ⊸ codomain` of a linear term.
#[derive(Debug, Clone, PartialEq)]
pub struct TypeSig {
    pub dom: SpaceTerm,
    pub cod: SpaceTerm,
}

impl fmt::Display for TypeSig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -o {}", self.dom, self.cod)
    }
}

/// Natural unitary operators: isometric linear isomorphisms whose inverses
/// are also their adjoints. Each carries the space context that pins its
/// signature.
#[derive(Debug, Clone, PartialEq)]
pub enum UnitaryOp {
    /// `V ≅ ℝ⊗V`, `bra v = 1⊗v`.
    Bra(SpaceTerm),
    /// `ℝ⊗V ≅ V`, `ibra (k⊗v) = k·v`.
    IBra(SpaceTerm),
    /// `V ≅ V⊗ℝ`, `ket v = v⊗1`.
    Ket(SpaceTerm),
    /// `V⊗ℝ ≅ V`, `iket (v⊗k) = k·v`.
    IKet(SpaceTerm),
    /// `V⊗W ≅ W⊗V`.
    Transpose(SpaceTerm, SpaceTerm),
    /// `(U⊗V)⊗W ≅ U⊗(V⊗W)`.
    Assoc(SpaceTerm, SpaceTerm, SpaceTerm),
    AssocInv(SpaceTerm, SpaceTerm, SpaceTerm),
    /// `(⊕_x V_x)⊗W ≅ ⊕_x (V_x⊗W)`.
    Distrib { family: SpaceTerm, factor: SpaceTerm },
    DistribInv { family: SpaceTerm, factor: SpaceTerm },
    /// `(⊕_x V_x) ⊕ (⊕_x W_x) ≅ ⊕_x (V_x ⊕ W_x)`.
    Zip { left: SpaceTerm, right: SpaceTerm },
    Unzip { left: SpaceTerm, right: SpaceTerm },
}

/// The pair space `⊕_x (V_x ⊕ W_x)` zip maps into. Copower shape is kept
/// when both families are copowers over the same index set.
fn zipped_family(left: &SpaceTerm, right: &SpaceTerm) -> Result<SpaceTerm> {
    let (nl, nr) = match (left.family_len(), right.family_len()) {
        (Some(a), Some(b)) => (a, b),
        _ => {
            return Err(Error::ty(
                "zip",
                format!("zip expects two direct-sum families, got {left} and {right}"),
            ))
        }
    };
    if nl != nr {
        return Err(Error::ty(
            "zip",
            format!("zip families have different lengths: {nl} vs {nr}"),
        ));
    }
    if let (SpaceTerm::Pow(x, v), SpaceTerm::Pow(y, w)) = (left, right) {
        if x == y {
            return Ok(SpaceTerm::pow(
                x.clone(),
                SpaceTerm::pair((**v).clone(), (**w).clone()),
            ));
        }
    }
    Ok(SpaceTerm::Tuple(
        (0..nl)
            .map(|i| {
                SpaceTerm::pair(
                    left.component(i).unwrap().clone(),
                    right.component(i).unwrap().clone(),
                )
            })
            .collect(),
    ))
}

impl UnitaryOp {
    pub fn signature(&self) -> Result<TypeSig> {
        let sig = |dom, cod| Ok(TypeSig { dom, cod });
        match self {
            UnitaryOp::Bra(v) => sig(v.clone(), SpaceTerm::tensor(SpaceTerm::Scalar, v.clone())),
            UnitaryOp::IBra(v) => sig(SpaceTerm::tensor(SpaceTerm::Scalar, v.clone()), v.clone()),
            UnitaryOp::Ket(v) => sig(v.clone(), SpaceTerm::tensor(v.clone(), SpaceTerm::Scalar)),
            UnitaryOp::IKet(v) => sig(SpaceTerm::tensor(v.clone(), SpaceTerm::Scalar), v.clone()),
            UnitaryOp::Transpose(v, w) => sig(
                SpaceTerm::tensor(v.clone(), w.clone()),
                SpaceTerm::tensor(w.clone(), v.clone()),
            ),
            UnitaryOp::Assoc(u, v, w) => sig(
                SpaceTerm::tensor(SpaceTerm::tensor(u.clone(), v.clone()), w.clone()),
                SpaceTerm::tensor(u.clone(), SpaceTerm::tensor(v.clone(), w.clone())),
            ),
            UnitaryOp::AssocInv(u, v, w) => sig(
                SpaceTerm::tensor(u.clone(), SpaceTerm::tensor(v.clone(), w.clone())),
                SpaceTerm::tensor(SpaceTerm::tensor(u.clone(), v.clone()), w.clone()),
            ),
            UnitaryOp::Distrib { family, factor } => {
                let comps = family.components().ok_or_else(|| {
                    Error::ty("distrib", format!("{family} is not a direct-sum family"))
                })?;
                let cod = match family {
                    SpaceTerm::Pow(x, body) => SpaceTerm::pow(
                        x.clone(),
                        SpaceTerm::tensor((**body).clone(), factor.clone()),
                    ),
                    _ => SpaceTerm::Tuple(
                        comps
                            .iter()
                            .map(|c| SpaceTerm::tensor(c.clone(), factor.clone()))
                            .collect(),
                    ),
                };
                sig(SpaceTerm::tensor(family.clone(), factor.clone()), cod)
            }
            UnitaryOp::DistribInv { family, factor } => {
                let inv = UnitaryOp::Distrib {
                    family: family.clone(),
                    factor: factor.clone(),
                }
                .signature()?;
                sig(inv.cod, inv.dom)
            }
            UnitaryOp::Zip { left, right } => sig(
                SpaceTerm::pair(left.clone(), right.clone()),
                zipped_family(left, right)?,
            ),
            UnitaryOp::Unzip { left, right } => sig(
                zipped_family(left, right)?,
                SpaceTerm::pair(left.clone(), right.clone()),
            ),
        }
    }

    /// The inverse operator, which is also the adjoint.
    pub fn inverse(&self) -> UnitaryOp {
        match self {
            UnitaryOp::Bra(v) => UnitaryOp::IBra(v.clone()),
            UnitaryOp::IBra(v) => UnitaryOp::Bra(v.clone()),
            UnitaryOp::Ket(v) => UnitaryOp::IKet(v.clone()),
            UnitaryOp::IKet(v) => UnitaryOp::Ket(v.clone()),
            UnitaryOp::Transpose(v, w) => UnitaryOp::Transpose(w.clone(), v.clone()),
            UnitaryOp::Assoc(u, v, w) => UnitaryOp::AssocInv(u.clone(), v.clone(), w.clone()),
            UnitaryOp::AssocInv(u, v, w) => UnitaryOp::Assoc(u.clone(), v.clone(), w.clone()),
            UnitaryOp::Distrib { family, factor } => UnitaryOp::DistribInv {
                family: family.clone(),
                factor: factor.clone(),
            },
            UnitaryOp::DistribInv { family, factor } => UnitaryOp::Distrib {
                family: family.clone(),
                factor: factor.clone(),
            },
            UnitaryOp::Zip { left, right } => UnitaryOp::Unzip {
                left: left.clone(),
                right: right.clone(),
            },
            UnitaryOp::Unzip { left, right } => UnitaryOp::Zip {
                left: left.clone(),
                right: right.clone(),
            },
        }
    }

    fn apply(&self, v: &Vector) -> Result<Vector> {
        match self {
            UnitaryOp::Bra(_) => Vector::pure_tensor(Vector::Scalar(1.0), v.clone()),
            UnitaryOp::Ket(_) => Vector::pure_tensor(v.clone(), Vector::Scalar(1.0)),
            UnitaryOp::IBra(space) => {
                let mut acc = Vector::zero(space);
                for t in v.tensor_terms()? {
                    let k = t.left.to_coords()?[0];
                    acc = acc.add(&t.right.scale(t.coeff * k))?;
                }
                Ok(acc)
            }
            UnitaryOp::IKet(space) => {
                let mut acc = Vector::zero(space);
                for t in v.tensor_terms()? {
                    let k = t.right.to_coords()?[0];
                    acc = acc.add(&t.left.scale(t.coeff * k))?;
                }
                Ok(acc)
            }
            UnitaryOp::Transpose(_, _) => v.transpose_tensor(),
            UnitaryOp::Assoc(u_sp, v_sp, w_sp) => {
                let mut terms = Vec::new();
                for t in v.tensor_terms()? {
                    for inner in t.left.tensor_terms()? {
                        terms.push(crate::spaces::TensorTerm {
                            coeff: t.coeff * inner.coeff,
                            left: inner.left.clone(),
                            right: Vector::pure_tensor(inner.right.clone(), t.right.clone())?,
                        });
                    }
                }
                Ok(Vector::Tensor {
                    left: u_sp.clone(),
                    right: SpaceTerm::tensor(v_sp.clone(), w_sp.clone()),
                    terms,
                })
            }
            UnitaryOp::AssocInv(u_sp, v_sp, w_sp) => {
                let mut terms = Vec::new();
                for t in v.tensor_terms()? {
                    for inner in t.right.tensor_terms()? {
                        terms.push(crate::spaces::TensorTerm {
                            coeff: t.coeff * inner.coeff,
                            left: Vector::pure_tensor(t.left.clone(), inner.left.clone())?,
                            right: inner.right.clone(),
                        });
                    }
                }
                Ok(Vector::Tensor {
                    left: SpaceTerm::tensor(u_sp.clone(), v_sp.clone()),
                    right: w_sp.clone(),
                    terms,
                })
            }
            UnitaryOp::Distrib { family, factor } => {
                let n = family.family_len().unwrap_or(0);
                let mut per_comp: Vec<Vec<crate::spaces::TensorTerm>> = vec![Vec::new(); n];
                for t in v.tensor_terms()? {
                    let comps = t.left.family_items()?;
                    for (i, c) in comps.into_iter().enumerate() {
                        per_comp[i].push(crate::spaces::TensorTerm {
                            coeff: t.coeff,
                            left: c,
                            right: t.right.clone(),
                        });
                    }
                }
                let sig = self.signature()?;
                let items = per_comp
                    .into_iter()
                    .enumerate()
                    .map(|(i, terms)| Vector::Tensor {
                        left: family.component(i).unwrap().clone(),
                        right: factor.clone(),
                        terms,
                    })
                    .collect();
                Ok(Vector::family_like(&sig.cod, items))
            }
            UnitaryOp::DistribInv { family, factor } => {
                let comps = v.family_items()?;
                let fam_comps = family.components().ok_or_else(|| {
                    Error::ty("distrib_inv", format!("{family} is not a family"))
                })?;
                let mut terms = Vec::new();
                for (i, comp) in comps.iter().enumerate() {
                    for t in comp.tensor_terms()? {
                        // inj_i of the left factor into the family
                        let injected = (0..fam_comps.len())
                            .map(|j| {
                                if j == i {
                                    t.left.clone()
                                } else {
                                    Vector::zero(&fam_comps[j])
                                }
                            })
                            .collect();
                        terms.push(crate::spaces::TensorTerm {
                            coeff: t.coeff,
                            left: Vector::family_like(family, injected),
                            right: t.right.clone(),
                        });
                    }
                }
                Ok(Vector::Tensor {
                    left: family.clone(),
                    right: factor.clone(),
                    terms,
                })
            }
            UnitaryOp::Zip { .. } => {
                let halves = v.family_items()?;
                if halves.len() != 2 {
                    return Err(Error::shape("zip expects a pair of families"));
                }
                let (a, b) = (halves[0].family_items()?, halves[1].family_items()?);
                let sig = self.signature()?;
                let items = a
                    .into_iter()
                    .zip(b)
                    .map(|(x, y)| Vector::tuple([x, y]))
                    .collect();
                Ok(Vector::family_like(&sig.cod, items))
            }
            UnitaryOp::Unzip { left, right } => {
                let pairs = v.family_items()?;
                let mut xs = Vec::with_capacity(pairs.len());
                let mut ys = Vec::with_capacity(pairs.len());
                for p in &pairs {
                    let comps = p.family_items()?;
                    if comps.len() != 2 {
                        return Err(Error::shape("unzip expects a family of pairs"));
                    }
                    xs.push(comps[0].clone());
                    ys.push(comps[1].clone());
                }
                Ok(Vector::tuple([
                    Vector::family_like(left, xs),
                    Vector::family_like(right, ys),
                ]))
            }
        }
    }
}

/// A symbolic linear function.
#[derive(Debug, Clone, PartialEq)]
pub enum LinTerm {
    /// Identity on `V`.
    Id(SpaceTerm),
    /// The zero map `V ⊸ W`.
    Zero { dom: SpaceTerm, cod: SpaceTerm },
    /// Composition `g • f` (apply `f` first).
    Comp(Box<LinTerm>, Box<LinTerm>),
    /// Pointwise sum of two parallel maps.
    Plus(Box<LinTerm>, Box<LinTerm>),
    /// Scalar multiplication `(k·) : V ⊸ V`.
    Scale { factor: f64, space: SpaceTerm },
    /// Left contraction section `(v ∗) : V⊗U ⊸ W⊗U` for `v ∈ W⊗V`;
    /// `passive` is the uninvolved factor `U`.
    ContractL { payload: Vector, passive: SpaceTerm },
    /// Right contraction section `(∗ w) : W⊗V ⊸ W⊗U` for `w ∈ V⊗U`;
    /// `passive` is the uninvolved factor `W`.
    ContractR { payload: Vector, passive: SpaceTerm },
    /// Injection of the `at`-th component into a direct-sum family.
    Inj { family: SpaceTerm, at: usize },
    /// Projection onto the `at`-th component of a direct-sum family.
    Proj { family: SpaceTerm, at: usize },
    /// Componentwise application `Π_x f_x` between families. With
    /// `over = Some(X)` both families are copowers over `X` (all items must
    /// share one signature); with `None` they are tuples.
    ParMap {
        over: Option<IndexSet>,
        items: Vec<LinTerm>,
    },
    /// `∏^X f`: one map applied across a copower.
    PowMap { index: IndexSet, item: Box<LinTerm> },
    /// `⟨f₁,…,fₙ⟩ : V ⊸ W₁⊕…⊕Wₙ`, duplicating the input.
    Fanout { items: Vec<LinTerm> },
    /// Relational reduction `red_R : ∏^X V ⊸ ∏^Y V`.
    Red { rel: Relation, body: SpaceTerm },
    Unitary(UnitaryOp),
}

impl LinTerm {
    pub fn comp(g: LinTerm, f: LinTerm) -> LinTerm {
        LinTerm::Comp(Box::new(g), Box::new(f))
    }

    /// Composition of a chain, first element applied first.
    pub fn pipeline(stages: impl IntoIterator<Item = LinTerm>) -> Option<LinTerm> {
        stages.into_iter().reduce(|acc, next| LinTerm::comp(next, acc))
    }

    pub fn plus(f: LinTerm, g: LinTerm) -> LinTerm {
        LinTerm::Plus(Box::new(f), Box::new(g))
    }

    pub fn scale(factor: f64, space: SpaceTerm) -> LinTerm {
        LinTerm::Scale { factor, space }
    }

    pub fn zero(dom: SpaceTerm, cod: SpaceTerm) -> LinTerm {
        LinTerm::Zero { dom, cod }
    }

    pub fn inj(family: SpaceTerm, at: usize) -> LinTerm {
        LinTerm::Inj { family, at }
    }

    pub fn proj(family: SpaceTerm, at: usize) -> LinTerm {
        LinTerm::Proj { family, at }
    }

    pub fn par(items: Vec<LinTerm>) -> LinTerm {
        LinTerm::ParMap { over: None, items }
    }

    pub fn par_pow(index: IndexSet, items: Vec<LinTerm>) -> LinTerm {
        LinTerm::ParMap {
            over: Some(index),
            items,
        }
    }

    pub fn pow_map(index: IndexSet, item: LinTerm) -> LinTerm {
        LinTerm::PowMap {
            index,
            item: Box::new(item),
        }
    }

    pub fn fanout(items: Vec<LinTerm>) -> LinTerm {
        LinTerm::Fanout { items }
    }

    pub fn red(rel: Relation, body: SpaceTerm) -> LinTerm {
        LinTerm::Red { rel, body }
    }

    pub fn contract_l(payload: Vector, passive: SpaceTerm) -> LinTerm {
        LinTerm::ContractL { payload, passive }
    }

    pub fn contract_r(payload: Vector, passive: SpaceTerm) -> LinTerm {
        LinTerm::ContractR { payload, passive }
    }
}

/// Infers the unique signature of `f`, or fails with a path into the term.
pub fn infer_types(f: &LinTerm) -> Result<TypeSig> {
    let sig = |dom: SpaceTerm, cod: SpaceTerm| Ok(TypeSig { dom, cod });
    match f {
        LinTerm::Id(v) => sig(v.clone(), v.clone()),
        LinTerm::Zero { dom, cod } => sig(dom.clone(), cod.clone()),
        LinTerm::Scale { space, .. } => sig(space.clone(), space.clone()),
        LinTerm::Comp(g, h) => {
            let fs = infer_types(h).map_err(|e| e.in_path("comp.rhs"))?;
            let gs = infer_types(g).map_err(|e| e.in_path("comp.lhs"))?;
            if !fs.cod.equiv(&gs.dom) {
                return Err(Error::ty(
                    "comp",
                    format!("cannot compose: inner codomain {} vs outer domain {}", fs.cod, gs.dom),
                ));
            }
            sig(fs.dom, gs.cod)
        }
        LinTerm::Plus(a, b) => {
            let sa = infer_types(a).map_err(|e| e.in_path("plus.lhs"))?;
            let sb = infer_types(b).map_err(|e| e.in_path("plus.rhs"))?;
            if !sa.dom.equiv(&sb.dom) || !sa.cod.equiv(&sb.cod) {
                return Err(Error::ty(
                    "plus",
                    format!("summands have different signatures: {sa} vs {sb}"),
                ));
            }
            Ok(sa)
        }
        LinTerm::ContractL { payload, passive } => {
            let p = payload.shape().map_err(|e| e.in_path("contractL"))?;
            match p {
                SpaceTerm::Tensor(w, v) => sig(
                    SpaceTerm::tensor((*v).clone(), passive.clone()),
                    SpaceTerm::tensor((*w).clone(), passive.clone()),
                ),
                other => Err(Error::ty(
                    "contractL",
                    format!("payload must live in a tensor space, got {other}"),
                )),
            }
        }
        LinTerm::ContractR { payload, passive } => {
            let p = payload.shape().map_err(|e| e.in_path("contractR"))?;
            match p {
                SpaceTerm::Tensor(v, u) => sig(
                    SpaceTerm::tensor(passive.clone(), (*v).clone()),
                    SpaceTerm::tensor(passive.clone(), (*u).clone()),
                ),
                other => Err(Error::ty(
                    "contractR",
                    format!("payload must live in a tensor space, got {other}"),
                )),
            }
        }
        LinTerm::Inj { family, at } => {
            let comp = family.component(*at).ok_or_else(|| {
                Error::ty("inj", format!("component {at} out of range for {family}"))
            })?;
            sig(comp.clone(), family.clone())
        }
        LinTerm::Proj { family, at } => {
            let comp = family.component(*at).ok_or_else(|| {
                Error::ty("proj", format!("component {at} out of range for {family}"))
            })?;
            sig(family.clone(), comp.clone())
        }
        LinTerm::ParMap { over, items } => {
            let sigs = items
                .iter()
                .enumerate()
                .map(|(i, t)| infer_types(t).map_err(|e| e.in_path(&format!("par[{i}]"))))
                .collect::<Result<Vec<_>>>()?;
            match over {
                Some(x) => {
                    if x.card() != items.len() {
                        return Err(Error::ty(
                            "par",
                            format!("{} items over index set of cardinality {}", items.len(), x.card()),
                        ));
                    }
                    let first = sigs.first().ok_or_else(|| {
                        Error::ty("par", "parallel map over an index set needs at least one item")
                    })?;
                    for s in &sigs {
                        if !s.dom.equiv(&first.dom) || !s.cod.equiv(&first.cod) {
                            return Err(Error::ty(
                                "par",
                                "components of a copower parallel map must share one signature",
                            ));
                        }
                    }
                    sig(
                        SpaceTerm::pow(x.clone(), first.dom.clone()),
                        SpaceTerm::pow(x.clone(), first.cod.clone()),
                    )
                }
                None => sig(
                    SpaceTerm::Tuple(sigs.iter().map(|s| s.dom.clone()).collect()),
                    SpaceTerm::Tuple(sigs.iter().map(|s| s.cod.clone()).collect()),
                ),
            }
        }
        LinTerm::PowMap { index, item } => {
            let s = infer_types(item).map_err(|e| e.in_path("pow"))?;
            sig(
                SpaceTerm::pow(index.clone(), s.dom),
                SpaceTerm::pow(index.clone(), s.cod),
            )
        }
        LinTerm::Fanout { items } => {
            let sigs = items
                .iter()
                .enumerate()
                .map(|(i, t)| infer_types(t).map_err(|e| e.in_path(&format!("fanout[{i}]"))))
                .collect::<Result<Vec<_>>>()?;
            let first = sigs
                .first()
                .ok_or_else(|| Error::ty("fanout", "fanout needs at least one item"))?;
            for s in &sigs {
                if !s.dom.equiv(&first.dom) {
                    return Err(Error::ty("fanout", "fanout items must share one domain"));
                }
            }
            sig(
                first.dom.clone(),
                SpaceTerm::Tuple(sigs.iter().map(|s| s.cod.clone()).collect()),
            )
        }
        LinTerm::Red { rel, body } => sig(
            SpaceTerm::pow(rel.domain().clone(), body.clone()),
            SpaceTerm::pow(rel.codomain().clone(), body.clone()),
        ),
        LinTerm::Unitary(u) => u.signature(),
    }
}

/// Evaluates `f` on `v`.
pub fn apply(f: &LinTerm, v: &Vector) -> Result<Vector> {
    match f {
        LinTerm::Id(dom) => {
            if !v.matches(dom) {
                return Err(Error::shape(format!("identity on {dom} applied to other shape")));
            }
            Ok(v.clone())
        }
        LinTerm::Zero { dom, cod } => {
            if !v.matches(dom) {
                return Err(Error::shape(format!("zero map on {dom} applied to other shape")));
            }
            Ok(Vector::zero(cod))
        }
        LinTerm::Scale { factor, space } => {
            if !v.matches(space) {
                return Err(Error::shape(format!("scaling on {space} applied to other shape")));
            }
            Ok(v.scale(*factor))
        }
        LinTerm::Comp(g, h) => apply(g, &apply(h, v)?),
        LinTerm::Plus(a, b) => apply(a, v)?.add(&apply(b, v)?),
        LinTerm::ContractL { payload, .. } => payload.contract(v),
        LinTerm::ContractR { payload, .. } => v.contract(payload),
        LinTerm::Inj { family, at } => {
            let comps = family
                .components()
                .ok_or_else(|| Error::ty("inj", format!("{family} is not a family")))?;
            let items = comps
                .iter()
                .enumerate()
                .map(|(i, c)| if i == *at { v.clone() } else { Vector::zero(c) })
                .collect();
            Ok(Vector::family_like(family, items))
        }
        LinTerm::Proj { at, .. } => {
            let items = v.family_items()?;
            items
                .get(*at)
                .cloned()
                .ok_or_else(|| Error::shape(format!("projection {at} out of range")))
        }
        LinTerm::ParMap { over, items } => {
            let parts = v.family_items()?;
            if parts.len() != items.len() {
                return Err(Error::shape(format!(
                    "parallel map of {} components applied to {} components",
                    items.len(),
                    parts.len()
                )));
            }
            let outs = items
                .iter()
                .zip(&parts)
                .map(|(t, p)| apply(t, p))
                .collect::<Result<Vec<_>>>()?;
            match over {
                Some(x) => Ok(Vector::family_like(
                    &SpaceTerm::pow(x.clone(), SpaceTerm::Zero),
                    outs,
                )),
                None => Ok(Vector::Tuple(outs)),
            }
        }
        LinTerm::PowMap { index, item } => {
            let parts = v.family_items()?;
            let outs = parts
                .iter()
                .map(|p| apply(item, p))
                .collect::<Result<Vec<_>>>()?;
            Ok(Vector::family_like(
                &SpaceTerm::pow(index.clone(), SpaceTerm::Zero),
                outs,
            ))
        }
        LinTerm::Fanout { items } => {
            let outs = items
                .iter()
                .map(|t| apply(t, v))
                .collect::<Result<Vec<_>>>()?;
            Ok(Vector::Tuple(outs))
        }
        LinTerm::Red { rel, body } => {
            let parts = v.family_items()?;
            let x = rel.domain();
            let y = rel.codomain();
            if parts.len() != x.card() {
                return Err(Error::shape(format!(
                    "reduction over {} applied to {} components",
                    x.card(),
                    parts.len()
                )));
            }
            let mut out: Vec<Vector> = vec![Vector::zero(body); y.card()];
            for (xv, yv) in rel.pairs() {
                let xi = x
                    .position(xv)
                    .ok_or_else(|| Error::dim(format!("{xv} not in relation domain")))?;
                let yi = y
                    .position(yv)
                    .ok_or_else(|| Error::dim(format!("{yv} not in relation codomain")))?;
                out[yi] = out[yi].add(&parts[xi])?;
            }
            Ok(Vector::family_like(
                &SpaceTerm::pow(y.clone(), body.clone()),
                out,
            ))
        }
        LinTerm::Unitary(u) => u.apply(v),
    }
}

/// Node count of a term; embedded vector and relation payloads count as one
/// node each, space annotations are free.
pub fn term_size(f: &LinTerm) -> usize {
    match f {
        LinTerm::Id(_)
        | LinTerm::Zero { .. }
        | LinTerm::Scale { .. }
        | LinTerm::Inj { .. }
        | LinTerm::Proj { .. }
        | LinTerm::Unitary(_) => 1,
        LinTerm::ContractL { .. } | LinTerm::ContractR { .. } | LinTerm::Red { .. } => 2,
        LinTerm::Comp(g, h) => 1 + term_size(g) + term_size(h),
        LinTerm::Plus(a, b) => 1 + term_size(a) + term_size(b),
        LinTerm::ParMap { items, .. } | LinTerm::Fanout { items } => {
            1 + items.iter().map(term_size).sum::<usize>()
        }
        LinTerm::PowMap { item, .. } => 1 + term_size(item),
    }
}

/// Derived combinators, each defined by the composite of primitives it
/// abbreviates (so adjoints come for free).
pub mod derived {
    use super::*;

    /// `rep_Y : V ⊸ ∏^Y V`, replication: `red_{⟨1⟩×Y} • inj₁`.
    pub fn rep(y: &IndexSet, body: &SpaceTerm) -> LinTerm {
        let one = IndexSet::Seg(1);
        LinTerm::comp(
            LinTerm::red(Relation::all_pairs(&one, y), body.clone()),
            LinTerm::inj(SpaceTerm::pow(one, body.clone()), 0),
        )
    }

    /// `Σ_Y : ∏^Y V ⊸ V`, summation: `proj₁ • red_{Y×⟨1⟩}`.
    pub fn sum(y: &IndexSet, body: &SpaceTerm) -> LinTerm {
        let one = IndexSet::Seg(1);
        LinTerm::comp(
            LinTerm::proj(SpaceTerm::pow(one.clone(), body.clone()), 0),
            LinTerm::red(Relation::all_pairs(y, &one), body.clone()),
        )
    }

    /// Binary addition `+ : V×V ⊸ V` as `Σ_⟨2⟩`.
    pub fn vec_plus(body: &SpaceTerm) -> LinTerm {
        sum(&IndexSet::Seg(2), body)
    }

    /// `dup : V ⊸ V×V` as `rep_⟨2⟩`.
    pub fn dup(body: &SpaceTerm) -> LinTerm {
        rep(&IndexSet::Seg(2), body)
    }

    /// Prefix sums `scan_n = red_{{(i,j) | i ≤ j}}`.
    pub fn scan(n: usize, body: &SpaceTerm) -> LinTerm {
        LinTerm::red(Relation::scan(n), body.clone())
    }

    /// Fan-in `[g₁,…,gₙ] : W₁⊕…⊕Wₙ ⊸ V` as `Σ_X • Π g_x`.
    pub fn fanin(items: Vec<LinTerm>) -> Result<LinTerm> {
        let first = items
            .first()
            .ok_or_else(|| Error::ty("fanin", "fanin needs at least one item"))?;
        let cod = infer_types(first)?.cod;
        let n = items.len();
        Ok(LinTerm::comp(
            sum(&IndexSet::Seg(n), &cod),
            LinTerm::par(items),
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::basis;

    fn r(n: usize) -> SpaceTerm {
        SpaceTerm::rn(n)
    }

    #[test]
    fn red_signature_is_copower_to_copower() {
        let f = LinTerm::red(
            Relation::all_pairs(&IndexSet::Seg(3), &IndexSet::Seg(1)),
            SpaceTerm::Scalar,
        );
        let s = infer_types(&f).unwrap();
        assert_eq!(s.dom, r(3));
        assert_eq!(s.cod, r(1));
    }

    #[test]
    fn comp_types_thread_through() {
        let u = r(2);
        let v = r(3);
        let f = LinTerm::comp(LinTerm::Id(v.clone()), LinTerm::zero(u.clone(), v.clone()));
        let s = infer_types(&f).unwrap();
        assert_eq!(s.dom, u);
        assert_eq!(s.cod, v);

        let bad = LinTerm::comp(LinTerm::zero(u, v), LinTerm::Id(r(4)));
        assert!(matches!(infer_types(&bad), Err(Error::Type { .. })));
    }

    #[test]
    fn scan_reduction_computes_prefix_sums() {
        let f = derived::scan(3, &SpaceTerm::Scalar);
        let out = apply(&f, &Vector::rn([1.0, 2.0, 3.0])).unwrap();
        assert_eq!(out.to_coords().unwrap(), vec![1.0, 3.0, 6.0]);
    }

    #[test]
    fn contract_l_applies_the_contraction_law() {
        let payload =
            Vector::pure_tensor(Vector::rn([1.0, 0.0]), Vector::rn([0.0, 1.0])).unwrap();
        let f = LinTerm::contract_l(payload, r(2));
        let arg = Vector::pure_tensor(Vector::rn([0.0, 1.0]), Vector::rn([2.0, 3.0])).unwrap();
        let out = apply(&f, &arg).unwrap();
        let expect =
            Vector::pure_tensor(Vector::rn([1.0, 0.0]), Vector::rn([2.0, 3.0])).unwrap();
        assert!(out.approx_eq(&expect, 1e-12));
    }

    #[test]
    fn transpose_swaps_factors() {
        let u = Vector::rn([1.0, 2.0]);
        let v = Vector::rn([3.0, 4.0, 5.0]);
        let t = Vector::pure_tensor(u.clone(), v.clone()).unwrap();
        let f = LinTerm::Unitary(UnitaryOp::Transpose(r(2), r(3)));
        let out = apply(&f, &t).unwrap();
        let expect = Vector::pure_tensor(v, u).unwrap();
        assert!(out.approx_eq(&expect, 1e-12));
    }

    #[test]
    fn dup_replicates_and_plus_sums() {
        let d = derived::dup(&SpaceTerm::Scalar);
        let out = apply(&d, &Vector::Scalar(5.0)).unwrap();
        assert_eq!(out.to_coords().unwrap(), vec![5.0, 5.0]);

        let p = derived::vec_plus(&SpaceTerm::Scalar);
        let out = apply(&p, &Vector::rn([2.0, 3.0])).unwrap();
        assert_eq!(out.to_coords().unwrap(), vec![5.0]);

        let s = derived::sum(&IndexSet::Seg(3), &SpaceTerm::Scalar);
        let out = apply(&s, &Vector::rn([1.0, 2.0, 3.0])).unwrap();
        assert_eq!(out.to_coords().unwrap(), vec![6.0]);
    }

    #[test]
    fn par_map_satisfies_the_projection_law() {
        // proj_z ∘ Π f ∘ inj_y = f_y when y = z, and 0 otherwise.
        let items = vec![
            LinTerm::scale(2.0, SpaceTerm::Scalar),
            LinTerm::scale(3.0, SpaceTerm::Scalar),
        ];
        let fam = SpaceTerm::tuple([SpaceTerm::Scalar, SpaceTerm::Scalar]);
        for y in 0..2 {
            for z in 0..2 {
                let chain = LinTerm::comp(
                    LinTerm::proj(fam.clone(), z),
                    LinTerm::comp(
                        LinTerm::ParMap {
                            over: None,
                            items: items.clone(),
                        },
                        LinTerm::inj(fam.clone(), y),
                    ),
                );
                let out = apply(&chain, &Vector::Scalar(1.0)).unwrap();
                let expect = if y == z {
                    if y == 0 {
                        2.0
                    } else {
                        3.0
                    }
                } else {
                    0.0
                };
                assert_eq!(out.to_coords().unwrap(), vec![expect]);
            }
        }
    }

    #[test]
    fn bra_ket_recover_tensor_and_inner_products() {
        // v⊗w = ket(v) ∗ bra(w)
        let v = Vector::rn([1.0, 2.0]);
        let w = Vector::rn([3.0, 4.0, 5.0]);
        let ket_v = apply(&LinTerm::Unitary(UnitaryOp::Ket(r(2))), &v).unwrap();
        let bra_w = apply(&LinTerm::Unitary(UnitaryOp::Bra(r(3))), &w).unwrap();
        let prod = ket_v.contract(&bra_w).unwrap();
        let expect = Vector::pure_tensor(v.clone(), w.clone()).unwrap();
        assert!(prod.approx_eq(&expect, 1e-12));

        // v₁⊙v₂ = ibra(bra(v₁) ∗ ket(v₂))
        let v2 = Vector::rn([4.0, -1.0]);
        let bra_v = apply(&LinTerm::Unitary(UnitaryOp::Bra(r(2))), &v).unwrap();
        let ket_v2 = apply(&LinTerm::Unitary(UnitaryOp::Ket(r(2))), &v2).unwrap();
        let contracted = bra_v.contract(&ket_v2).unwrap();
        let scalar = apply(&LinTerm::Unitary(UnitaryOp::IBra(SpaceTerm::Scalar)), &contracted)
            .unwrap();
        assert_eq!(scalar.to_coords().unwrap(), vec![v.inner(&v2).unwrap()]);
    }

    #[test]
    fn term_sizes_count_nodes_and_payloads() {
        assert_eq!(term_size(&LinTerm::Id(r(2))), 1);
        assert_eq!(
            term_size(&LinTerm::comp(LinTerm::Id(r(2)), LinTerm::Id(r(2)))),
            3
        );
        let payload = Vector::pure_tensor(Vector::rn([1.0]), Vector::rn([1.0])).unwrap();
        assert_eq!(term_size(&LinTerm::contract_l(payload, r(1))), 2);
    }

    #[test]
    fn linearity_of_assorted_terms() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let terms = [
            derived::scan(3, &SpaceTerm::Scalar),
            derived::fanin(vec![
                LinTerm::scale(2.0, SpaceTerm::Scalar),
                LinTerm::scale(-1.0, SpaceTerm::Scalar),
            ])
            .unwrap(),
            LinTerm::Unitary(UnitaryOp::Distrib {
                family: r(2),
                factor: r(2),
            }),
        ];
        for f in &terms {
            let sig = infer_types(f).unwrap();
            let v = crate::spaces::random_vector(&sig.dom, &mut rng);
            let w = crate::spaces::random_vector(&sig.dom, &mut rng);
            let k = 0.37;
            let lhs = apply(f, &v.add(&w.scale(k)).unwrap()).unwrap();
            let rhs = apply(f, &v).unwrap().add(&apply(f, &w).unwrap().scale(k)).unwrap();
            assert!(lhs.approx_eq(&rhs, 1e-10));
        }
    }

    #[test]
    fn unitary_round_trips_preserve_vectors() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let ops = [
            UnitaryOp::Bra(r(3)),
            UnitaryOp::Ket(r(3)),
            UnitaryOp::Transpose(r(2), r(3)),
            UnitaryOp::Assoc(r(2), SpaceTerm::Scalar, r(2)),
            UnitaryOp::Distrib {
                family: SpaceTerm::tuple([SpaceTerm::Scalar, r(2)]),
                factor: r(2),
            },
            UnitaryOp::Zip {
                left: r(3),
                right: r(3),
            },
        ];
        for op in &ops {
            let sig = op.signature().unwrap();
            let v = crate::spaces::random_vector(&sig.dom, &mut rng);
            let there = op.apply(&v).unwrap();
            assert!((there.norm().unwrap() - v.norm().unwrap()).abs() < 1e-12);
            let back = op.inverse().apply(&there).unwrap();
            assert!(back.approx_eq(&v, 1e-12));
        }
    }

    #[test]
    fn basis_images_give_matrix_columns() {
        let f = derived::scan(3, &SpaceTerm::Scalar);
        let dom = infer_types(&f).unwrap().dom;
        let col0 = apply(&f, &basis(&dom, 0).unwrap()).unwrap();
        assert_eq!(col0.to_coords().unwrap(), vec![1.0, 1.0, 1.0]);
    }
}
