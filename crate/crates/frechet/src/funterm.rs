//! The combinatory language of analytic functions.
//!
//! A `FunTerm` is a closed, point-free description of an analytic function
//! between constructible spaces: constants, scalar primitives, embedded
//! linear terms, named bilinear operations, and sequential / parallel
//! composition. The evaluator here computes values only; derivatives are
//! produced by the affine interpreters in [`crate::diff`].

use crate::error::{Error, Result};
use crate::linterm::{self, LinTerm, TypeSig, UnitaryOp};
use crate::spaces::{IndexSet, SpaceTerm, Vector};

/// A scalar primitive `ℝ → ℝ` with a known derivative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PrimOp {
    Sin,
    Cos,
    Exp,
    Ln,
    Tanh,
    /// `x ↦ xᵏ` for a nonzero integer `k`.
    Power(i32),
}

impl PrimOp {
    pub fn value(&self, x: f64) -> Result<f64> {
        match self {
            PrimOp::Sin => Ok(x.sin()),
            PrimOp::Cos => Ok(x.cos()),
            PrimOp::Exp => Ok(x.exp()),
            PrimOp::Tanh => Ok(x.tanh()),
            PrimOp::Ln => {
                if x > 0.0 {
                    Ok(x.ln())
                } else {
                    Err(Error::domain(format!("ln of non-positive value {x}")))
                }
            }
            PrimOp::Power(k) => {
                if *k < 0 && x == 0.0 {
                    Err(Error::domain(format!("0^{k} is undefined")))
                } else {
                    Ok(x.powi(*k))
                }
            }
        }
    }

    /// The scalar `p′(x)`.
    pub fn deriv_value(&self, x: f64) -> Result<f64> {
        match self {
            PrimOp::Sin => Ok(x.cos()),
            PrimOp::Cos => Ok(-x.sin()),
            PrimOp::Exp => Ok(x.exp()),
            PrimOp::Tanh => {
                let t = x.tanh();
                Ok(1.0 - t * t)
            }
            PrimOp::Ln => {
                if x > 0.0 {
                    Ok(1.0 / x)
                } else {
                    Err(Error::domain(format!("ln′ of non-positive value {x}")))
                }
            }
            PrimOp::Power(k) => {
                if *k < 1 && x == 0.0 {
                    Err(Error::domain(format!("derivative of x^{k} undefined at 0")))
                } else {
                    Ok(f64::from(*k) * x.powi(k - 1))
                }
            }
        }
    }

    /// The Fréchet derivative at `x`: the scaling map `(p′(x)·) : ℝ ⊸ ℝ`.
    pub fn deriv_at(&self, x: f64) -> Result<LinTerm> {
        Ok(LinTerm::scale(self.deriv_value(x)?, SpaceTerm::Scalar))
    }
}

/// A named bilinear operation with explicit space context.
#[derive(Debug, Clone, PartialEq)]
pub enum BilinOp {
    /// Tensor contraction `∗ : (W⊗V) × (V⊗U) → W⊗U`.
    Contract {
        left: SpaceTerm,
        mid: SpaceTerm,
        right: SpaceTerm,
    },
    /// `⊗ : U × V → U⊗V`.
    TensorProd { left: SpaceTerm, right: SpaceTerm },
    /// `⊙ : V × V → ℝ`.
    Inner { space: SpaceTerm },
    /// `· : ℝ × V → V`.
    ScalarMul { space: SpaceTerm },
    /// `⋆ : (∏^m ℝ ⊗ ∏^n ℝ) × ∏^n ℝ → ∏^m ℝ`, matrices as tensor elements.
    MatVec { rows: IndexSet, cols: IndexSet },
    /// Elementwise product on `∏^X ℝ`.
    Hadamard { index: IndexSet },
}

impl BilinOp {
    /// The two argument spaces `(U, V)`.
    pub fn arg_spaces(&self) -> (SpaceTerm, SpaceTerm) {
        match self {
            BilinOp::Contract { left, mid, right } => (
                SpaceTerm::tensor(left.clone(), mid.clone()),
                SpaceTerm::tensor(mid.clone(), right.clone()),
            ),
            BilinOp::TensorProd { left, right } => (left.clone(), right.clone()),
            BilinOp::Inner { space } => (space.clone(), space.clone()),
            BilinOp::ScalarMul { space } => (SpaceTerm::Scalar, space.clone()),
            BilinOp::MatVec { rows, cols } => (
                SpaceTerm::tensor(
                    SpaceTerm::pow(rows.clone(), SpaceTerm::Scalar),
                    SpaceTerm::pow(cols.clone(), SpaceTerm::Scalar),
                ),
                SpaceTerm::pow(cols.clone(), SpaceTerm::Scalar),
            ),
            BilinOp::Hadamard { index } => {
                let v = SpaceTerm::pow(index.clone(), SpaceTerm::Scalar);
                (v.clone(), v)
            }
        }
    }

    pub fn result_space(&self) -> SpaceTerm {
        match self {
            BilinOp::Contract { left, right, .. } => {
                SpaceTerm::tensor(left.clone(), right.clone())
            }
            BilinOp::TensorProd { left, right } => SpaceTerm::tensor(left.clone(), right.clone()),
            BilinOp::Inner { .. } => SpaceTerm::Scalar,
            BilinOp::ScalarMul { space } => space.clone(),
            BilinOp::MatVec { rows, .. } => SpaceTerm::pow(rows.clone(), SpaceTerm::Scalar),
            BilinOp::Hadamard { index } => SpaceTerm::pow(index.clone(), SpaceTerm::Scalar),
        }
    }

    /// Applies the operation to a pair of values.
    pub fn apply2(&self, u: &Vector, v: &Vector) -> Result<Vector> {
        let (us, vs) = self.arg_spaces();
        if !u.matches(&us) || !v.matches(&vs) {
            return Err(Error::shape(format!(
                "bilinear argument shapes do not match ({us}, {vs})"
            )));
        }
        match self {
            BilinOp::Contract { .. } => u.contract(v),
            BilinOp::TensorProd { .. } => Vector::pure_tensor(u.clone(), v.clone()),
            BilinOp::Inner { .. } => Ok(Vector::Scalar(u.inner(v)?)),
            BilinOp::ScalarMul { .. } => Ok(v.scale(u.to_coords()?[0])),
            BilinOp::MatVec { rows, .. } => {
                let mut acc = Vector::zero(&SpaceTerm::pow(rows.clone(), SpaceTerm::Scalar));
                for t in u.tensor_terms()? {
                    acc = acc.add(&t.left.scale(t.coeff * t.right.inner(v)?))?;
                }
                Ok(acc)
            }
            BilinOp::Hadamard { index } => {
                let a = u.family_items()?;
                let b = v.family_items()?;
                let items = a
                    .iter()
                    .zip(&b)
                    .map(|(x, y)| Ok(Vector::Scalar(x.to_coords()?[0] * y.to_coords()?[0])))
                    .collect::<Result<Vec<_>>>()?;
                Ok(Vector::map(index.clone(), items))
            }
        }
    }

    /// The left section `(u ⋄) : V ⊸ W` as a symbolic linear term.
    pub fn section_left(&self, u: &Vector) -> Result<LinTerm> {
        let (us, _) = self.arg_spaces();
        if !u.matches(&us) {
            return Err(Error::shape(format!("section argument does not match {us}")));
        }
        match self {
            BilinOp::Contract { right, .. } => {
                Ok(LinTerm::contract_l(u.clone(), right.clone()))
            }
            BilinOp::TensorProd { right, .. } => {
                // (u ⊗) = (ket u ∗) • bra
                let ket_u = Vector::pure_tensor(u.clone(), Vector::Scalar(1.0))?;
                Ok(LinTerm::pipeline([
                    LinTerm::Unitary(UnitaryOp::Bra(right.clone())),
                    LinTerm::contract_l(ket_u, right.clone()),
                ])
                .unwrap())
            }
            BilinOp::Inner { space } => {
                // (u ⊙) = ibra • (bra u ∗) • ket
                let bra_u = Vector::pure_tensor(Vector::Scalar(1.0), u.clone())?;
                Ok(LinTerm::pipeline([
                    LinTerm::Unitary(UnitaryOp::Ket(space.clone())),
                    LinTerm::contract_l(bra_u, SpaceTerm::Scalar),
                    LinTerm::Unitary(UnitaryOp::IBra(SpaceTerm::Scalar)),
                ])
                .unwrap())
            }
            BilinOp::ScalarMul { space } => Ok(LinTerm::scale(u.to_coords()?[0], space.clone())),
            BilinOp::MatVec { rows, cols } => {
                // (W ⋆) = iket • (W ∗) • ket
                let rows_sp = SpaceTerm::pow(rows.clone(), SpaceTerm::Scalar);
                let cols_sp = SpaceTerm::pow(cols.clone(), SpaceTerm::Scalar);
                Ok(LinTerm::pipeline([
                    LinTerm::Unitary(UnitaryOp::Ket(cols_sp)),
                    LinTerm::contract_l(u.clone(), SpaceTerm::Scalar),
                    LinTerm::Unitary(UnitaryOp::IKet(rows_sp)),
                ])
                .unwrap())
            }
            BilinOp::Hadamard { index } => {
                let items = u
                    .family_items()?
                    .iter()
                    .map(|c| Ok(LinTerm::scale(c.to_coords()?[0], SpaceTerm::Scalar)))
                    .collect::<Result<Vec<_>>>()?;
                Ok(LinTerm::par_pow(index.clone(), items))
            }
        }
    }

    /// The right section `(⋄ v) : U ⊸ W` as a symbolic linear term.
    pub fn section_right(&self, v: &Vector) -> Result<LinTerm> {
        let (_, vs) = self.arg_spaces();
        if !v.matches(&vs) {
            return Err(Error::shape(format!("section argument does not match {vs}")));
        }
        match self {
            BilinOp::Contract { left, .. } => Ok(LinTerm::contract_r(v.clone(), left.clone())),
            BilinOp::TensorProd { left, .. } => {
                // (⊗ v) = (∗ bra v) • ket
                let bra_v = Vector::pure_tensor(Vector::Scalar(1.0), v.clone())?;
                Ok(LinTerm::pipeline([
                    LinTerm::Unitary(UnitaryOp::Ket(left.clone())),
                    LinTerm::contract_r(bra_v, left.clone()),
                ])
                .unwrap())
            }
            BilinOp::Inner { space } => {
                // (⊙ v) = ibra • (∗ ket v) • bra
                let ket_v = Vector::pure_tensor(v.clone(), Vector::Scalar(1.0))?;
                Ok(LinTerm::pipeline([
                    LinTerm::Unitary(UnitaryOp::Bra(space.clone())),
                    LinTerm::contract_r(ket_v, SpaceTerm::Scalar),
                    LinTerm::Unitary(UnitaryOp::IBra(SpaceTerm::Scalar)),
                ])
                .unwrap())
            }
            BilinOp::ScalarMul { space } => {
                // (· v) : ℝ ⊸ V, k ↦ k·v
                let ket_v = Vector::pure_tensor(v.clone(), Vector::Scalar(1.0))?;
                Ok(LinTerm::pipeline([
                    LinTerm::Unitary(UnitaryOp::Bra(SpaceTerm::Scalar)),
                    LinTerm::contract_l(ket_v, SpaceTerm::Scalar),
                    LinTerm::Unitary(UnitaryOp::IKet(space.clone())),
                ])
                .unwrap())
            }
            BilinOp::MatVec { rows, cols } => {
                // (⋆ x) : matrix space ⊸ ∏^m ℝ
                let rows_sp = SpaceTerm::pow(rows.clone(), SpaceTerm::Scalar);
                let _ = cols;
                let ket_x = Vector::pure_tensor(v.clone(), Vector::Scalar(1.0))?;
                Ok(LinTerm::pipeline([
                    LinTerm::contract_r(ket_x, rows_sp.clone()),
                    LinTerm::Unitary(UnitaryOp::IKet(rows_sp)),
                ])
                .unwrap())
            }
            BilinOp::Hadamard { .. } => self.section_left(v),
        }
    }

    /// The definitional reduction of a named operation to tensor
    /// contraction wrapped in unitaries (and, for the elementwise product,
    /// a zip). Used by tests to check the named evaluators agree with the
    /// universal one; `Contract` has no further reduction.
    pub fn contract_form(&self) -> Option<FunTerm> {
        let pair = |a: FunTerm, b: FunTerm| FunTerm::Par {
            over: None,
            items: vec![a, b],
        };
        match self {
            BilinOp::Contract { .. } => None,
            BilinOp::TensorProd { left, right } => Some(FunTerm::comp(
                FunTerm::Bilin(BilinOp::Contract {
                    left: left.clone(),
                    mid: SpaceTerm::Scalar,
                    right: right.clone(),
                }),
                pair(
                    FunTerm::Lin(LinTerm::Unitary(UnitaryOp::Ket(left.clone()))),
                    FunTerm::Lin(LinTerm::Unitary(UnitaryOp::Bra(right.clone()))),
                ),
            )),
            BilinOp::Inner { space } => Some(FunTerm::comp(
                FunTerm::Lin(LinTerm::Unitary(UnitaryOp::IBra(SpaceTerm::Scalar))),
                FunTerm::comp(
                    FunTerm::Bilin(BilinOp::Contract {
                        left: SpaceTerm::Scalar,
                        mid: space.clone(),
                        right: SpaceTerm::Scalar,
                    }),
                    pair(
                        FunTerm::Lin(LinTerm::Unitary(UnitaryOp::Bra(space.clone()))),
                        FunTerm::Lin(LinTerm::Unitary(UnitaryOp::Ket(space.clone()))),
                    ),
                ),
            )),
            BilinOp::ScalarMul { space } => Some(FunTerm::comp(
                FunTerm::Lin(LinTerm::Unitary(UnitaryOp::IBra(space.clone()))),
                FunTerm::comp(
                    FunTerm::Bilin(BilinOp::Contract {
                        left: SpaceTerm::Scalar,
                        mid: SpaceTerm::Scalar,
                        right: space.clone(),
                    }),
                    pair(
                        FunTerm::Lin(LinTerm::Unitary(UnitaryOp::Ket(SpaceTerm::Scalar))),
                        FunTerm::Lin(LinTerm::Unitary(UnitaryOp::Bra(space.clone()))),
                    ),
                ),
            )),
            BilinOp::MatVec { rows, cols } => {
                let rows_sp = SpaceTerm::pow(rows.clone(), SpaceTerm::Scalar);
                let cols_sp = SpaceTerm::pow(cols.clone(), SpaceTerm::Scalar);
                let mat_sp = SpaceTerm::tensor(rows_sp.clone(), cols_sp.clone());
                Some(FunTerm::comp(
                    FunTerm::Lin(LinTerm::Unitary(UnitaryOp::IKet(rows_sp.clone()))),
                    FunTerm::comp(
                        FunTerm::Bilin(BilinOp::Contract {
                            left: rows_sp,
                            mid: cols_sp.clone(),
                            right: SpaceTerm::Scalar,
                        }),
                        pair(
                            FunTerm::Lin(LinTerm::Id(mat_sp)),
                            FunTerm::Lin(LinTerm::Unitary(UnitaryOp::Ket(cols_sp))),
                        ),
                    ),
                ))
            }
            BilinOp::Hadamard { index } => {
                let body = SpaceTerm::pow(index.clone(), SpaceTerm::Scalar);
                Some(FunTerm::comp(
                    FunTerm::Pow {
                        index: index.clone(),
                        item: Box::new(FunTerm::Bilin(BilinOp::ScalarMul {
                            space: SpaceTerm::Scalar,
                        })),
                    },
                    FunTerm::Lin(LinTerm::Unitary(UnitaryOp::Zip {
                        left: body.clone(),
                        right: body,
                    })),
                ))
            }
        }
    }
}

/// An analytic function in combinatory form.
#[derive(Debug, Clone, PartialEq)]
pub enum FunTerm {
    /// `const_w : V → W`, ignoring its input.
    Const { value: Vector, dom: SpaceTerm },
    /// A scalar primitive.
    Prim(PrimOp),
    /// An embedded linear function.
    Lin(LinTerm),
    /// A bilinear operation on a pair.
    Bilin(BilinOp),
    /// Sequential composition `g ∘ f` (apply `f` first).
    Comp(Box<FunTerm>, Box<FunTerm>),
    /// Parallel composition between direct sums, as in [`LinTerm::ParMap`].
    Par {
        over: Option<IndexSet>,
        items: Vec<FunTerm>,
    },
    /// `∏^X f`: one function mapped across a copower.
    Pow { index: IndexSet, item: Box<FunTerm> },
}

impl FunTerm {
    pub fn comp(g: FunTerm, f: FunTerm) -> FunTerm {
        FunTerm::Comp(Box::new(g), Box::new(f))
    }

    /// Composition of a chain, first element applied first.
    pub fn pipeline(stages: impl IntoIterator<Item = FunTerm>) -> Option<FunTerm> {
        stages.into_iter().reduce(|acc, next| FunTerm::comp(next, acc))
    }

    pub fn constant(value: Vector, dom: SpaceTerm) -> FunTerm {
        FunTerm::Const { value, dom }
    }

    pub fn lin(h: LinTerm) -> FunTerm {
        FunTerm::Lin(h)
    }

    pub fn par(items: Vec<FunTerm>) -> FunTerm {
        FunTerm::Par { over: None, items }
    }

    pub fn par_pow(index: IndexSet, items: Vec<FunTerm>) -> FunTerm {
        FunTerm::Par {
            over: Some(index),
            items,
        }
    }

    pub fn pow_fun(index: IndexSet, item: FunTerm) -> FunTerm {
        FunTerm::Pow {
            index,
            item: Box::new(item),
        }
    }

    /// Projection `πᵢ` lifted into the function language.
    pub fn proj(family: SpaceTerm, at: usize) -> FunTerm {
        FunTerm::Lin(LinTerm::proj(family, at))
    }
}

/// Infers the signature of a function term.
pub fn infer_fun(t: &FunTerm) -> Result<TypeSig> {
    let sig = |dom: SpaceTerm, cod: SpaceTerm| Ok(TypeSig { dom, cod });
    match t {
        FunTerm::Const { value, dom } => sig(dom.clone(), value.shape()?),
        FunTerm::Prim(_) => sig(SpaceTerm::Scalar, SpaceTerm::Scalar),
        FunTerm::Lin(h) => linterm::infer_types(h),
        FunTerm::Bilin(b) => {
            let (u, v) = b.arg_spaces();
            sig(SpaceTerm::pair(u, v), b.result_space())
        }
        FunTerm::Comp(g, f) => {
            let fs = infer_fun(f).map_err(|e| e.in_path("comp.rhs"))?;
            let gs = infer_fun(g).map_err(|e| e.in_path("comp.lhs"))?;
            if !fs.cod.equiv(&gs.dom) {
                return Err(Error::ty(
                    "comp",
                    format!("cannot compose: inner codomain {} vs outer domain {}", fs.cod, gs.dom),
                ));
            }
            sig(fs.dom, gs.cod)
        }
        FunTerm::Par { over, items } => {
            let sigs = items
                .iter()
                .enumerate()
                .map(|(i, t)| infer_fun(t).map_err(|e| e.in_path(&format!("par[{i}]"))))
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
                        Error::ty("par", "parallel composition over an index set needs an item")
                    })?;
                    for s in &sigs {
                        if !s.dom.equiv(&first.dom) || !s.cod.equiv(&first.cod) {
                            return Err(Error::ty(
                                "par",
                                "components of a copower parallel composition must share one signature",
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
        FunTerm::Pow { index, item } => {
            let s = infer_fun(item).map_err(|e| e.in_path("pow"))?;
            sig(
                SpaceTerm::pow(index.clone(), s.dom),
                SpaceTerm::pow(index.clone(), s.cod),
            )
        }
    }
}

/// Evaluates a function term on a value.
pub fn eval_fun(t: &FunTerm, v: &Vector) -> Result<Vector> {
    match t {
        FunTerm::Const { value, dom } => {
            if !v.matches(dom) {
                return Err(Error::shape(format!("constant expects input in {dom}")));
            }
            Ok(value.clone())
        }
        FunTerm::Prim(p) => {
            if !v.matches(&SpaceTerm::Scalar) {
                return Err(Error::shape("primitive applied to a non-scalar"));
            }
            Ok(Vector::Scalar(p.value(v.to_coords()?[0])?))
        }
        FunTerm::Lin(h) => linterm::apply(h, v),
        FunTerm::Bilin(b) => {
            let parts = v.family_items()?;
            if parts.len() != 2 {
                return Err(Error::shape("bilinear operation expects a pair"));
            }
            b.apply2(&parts[0], &parts[1])
        }
        FunTerm::Comp(g, f) => eval_fun(g, &eval_fun(f, v)?),
        FunTerm::Par { over, items } => {
            let parts = v.family_items()?;
            if parts.len() != items.len() {
                return Err(Error::shape(format!(
                    "parallel composition of {} items applied to {} components",
                    items.len(),
                    parts.len()
                )));
            }
            let outs = items
                .iter()
                .zip(&parts)
                .map(|(t, p)| eval_fun(t, p))
                .collect::<Result<Vec<_>>>()?;
            match over {
                Some(x) => Ok(Vector::family_like(
                    &SpaceTerm::pow(x.clone(), SpaceTerm::Zero),
                    outs,
                )),
                None => Ok(Vector::Tuple(outs)),
            }
        }
        FunTerm::Pow { index, item } => {
            let parts = v.family_items()?;
            let outs = parts
                .iter()
                .map(|p| eval_fun(item, p))
                .collect::<Result<Vec<_>>>()?;
            Ok(Vector::family_like(
                &SpaceTerm::pow(index.clone(), SpaceTerm::Zero),
                outs,
            ))
        }
    }
}

/// Node count; vector payloads count as one node each.
pub fn fun_term_size(t: &FunTerm) -> usize {
    match t {
        FunTerm::Const { .. } => 2,
        FunTerm::Prim(_) | FunTerm::Bilin(_) => 1,
        FunTerm::Lin(h) => linterm::term_size(h),
        FunTerm::Comp(g, f) => 1 + fun_term_size(g) + fun_term_size(f),
        FunTerm::Par { items, .. } => 1 + items.iter().map(fun_term_size).sum::<usize>(),
        FunTerm::Pow { item, .. } => 1 + fun_term_size(item),
    }
}

/// Pointwise sum `(f +̂ g)(x) = f(x) + g(x)`, encoded in-language as
/// `(+) ∘ (f × g) ∘ dup`.
pub fn fadd(f: FunTerm, g: FunTerm) -> Result<FunTerm> {
    let fs = infer_fun(&f)?;
    let gs = infer_fun(&g)?;
    if !fs.dom.equiv(&gs.dom) || !fs.cod.equiv(&gs.cod) {
        return Err(Error::ty(
            "fadd",
            format!("summands have different signatures: {fs} vs {gs}"),
        ));
    }
    Ok(FunTerm::pipeline([
        FunTerm::Lin(linterm::derived::dup(&fs.dom)),
        FunTerm::par(vec![f, g]),
        FunTerm::Lin(linterm::derived::vec_plus(&fs.cod)),
    ])
    .unwrap())
}

/// Pointwise difference, as `f +̂ ((-1)·) ∘ g`.
pub fn fsub(f: FunTerm, g: FunTerm) -> Result<FunTerm> {
    let gs = infer_fun(&g)?;
    fadd(
        f,
        FunTerm::comp(FunTerm::Lin(LinTerm::scale(-1.0, gs.cod)), g),
    )
}

/// Fan-out `⟨f₁,…,fₙ⟩` of functions with a common domain, encoded as
/// `(f₁ × ⋯ × fₙ) ∘ rep` so no new evaluator case is needed.
pub fn fanout_fun(items: Vec<FunTerm>) -> Result<FunTerm> {
    let first = items
        .first()
        .ok_or_else(|| Error::ty("fanout", "fanout needs at least one item"))?;
    let dom = infer_fun(first)?.dom;
    for (i, t) in items.iter().enumerate() {
        if !infer_fun(t)?.dom.equiv(&dom) {
            return Err(Error::ty(
                format!("fanout[{i}]"),
                "fanout items must share one domain",
            ));
        }
    }
    let n = items.len();
    Ok(FunTerm::comp(
        FunTerm::par(items),
        FunTerm::Lin(linterm::derived::rep(&IndexSet::Seg(n), &dom)),
    ))
}

/// Pointwise scaling `(f ·̂ g)(x) = f(x) · g(x)` for scalar-valued `f`,
/// encoded as `(·) ∘ (f × g) ∘ dup`.
pub fn fmul(f: FunTerm, g: FunTerm) -> Result<FunTerm> {
    let fs = infer_fun(&f)?;
    let gs = infer_fun(&g)?;
    if !fs.cod.equiv(&SpaceTerm::Scalar) {
        return Err(Error::ty(
            "fmul",
            format!("left factor must be scalar-valued, got {}", fs.cod),
        ));
    }
    if !fs.dom.equiv(&gs.dom) {
        return Err(Error::ty(
            "fmul",
            format!("factors have different domains: {} vs {}", fs.dom, gs.dom),
        ));
    }
    Ok(FunTerm::pipeline([
        FunTerm::Lin(linterm::derived::dup(&fs.dom)),
        FunTerm::par(vec![f, g]),
        FunTerm::Bilin(BilinOp::ScalarMul { space: gs.cod }),
    ])
    .unwrap())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gallery;
    use crate::spaces::basis;

    #[test]
    fn two_variable_example_evaluates() {
        // ln(x₁) + x₁·x₂ − sin(x₂) at (2,5)
        let f = gallery::two_variable();
        let out = eval_fun(&f, &Vector::tuple([Vector::Scalar(2.0), Vector::Scalar(5.0)]))
            .unwrap();
        let expect = 2.0_f64.ln() + 10.0 - 5.0_f64.sin();
        assert!((out.to_coords().unwrap()[0] - expect).abs() < 1e-12);
        assert!((expect - 11.652_071_455_223_436).abs() < 1e-9);
    }

    #[test]
    fn scalar_chain_evaluates() {
        let f = gallery::scalar_chain();
        let out = eval_fun(&f, &Vector::Scalar(std::f64::consts::FRAC_PI_2)).unwrap();
        assert!(out.to_coords().unwrap()[0].abs() < 1e-12);
    }

    #[test]
    fn constants_ignore_input() {
        let w = Vector::rn([1.0, 2.0]);
        let f = FunTerm::constant(w.clone(), SpaceTerm::Scalar);
        let out = eval_fun(&f, &Vector::Scalar(123.0)).unwrap();
        assert_eq!(out, w);
    }

    #[test]
    fn ln_domain_error_propagates() {
        let f = FunTerm::Prim(PrimOp::Ln);
        assert!(matches!(
            eval_fun(&f, &Vector::Scalar(0.0)),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn lifted_arithmetic() {
        let sin = FunTerm::Prim(PrimOp::Sin);
        let cos = FunTerm::Prim(PrimOp::Cos);
        let sum = fadd(sin, cos).unwrap();
        let out = eval_fun(&sum, &Vector::Scalar(0.0)).unwrap();
        assert!((out.to_coords().unwrap()[0] - 1.0).abs() < 1e-12);

        let pair = SpaceTerm::pair(SpaceTerm::Scalar, SpaceTerm::Scalar);
        let x1 = FunTerm::proj(pair.clone(), 0);
        let x2 = FunTerm::proj(pair, 1);
        let prod = fmul(x1, x2).unwrap();
        let out = eval_fun(
            &prod,
            &Vector::tuple([Vector::Scalar(2.0), Vector::Scalar(5.0)]),
        )
        .unwrap();
        assert_eq!(out.to_coords().unwrap(), vec![10.0]);

        let sin2 = FunTerm::Prim(PrimOp::Sin);
        let diff = fsub(sin2.clone(), sin2).unwrap();
        let out = eval_fun(&diff, &Vector::Scalar(0.7)).unwrap();
        assert!(out.to_coords().unwrap()[0].abs() < 1e-15);
    }

    #[test]
    fn sections_witness_bilinearity() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
        let r2 = SpaceTerm::rn(2);
        let r3 = SpaceTerm::rn(3);
        let ops = [
            BilinOp::ScalarMul { space: r3.clone() },
            BilinOp::Inner { space: r2.clone() },
            BilinOp::TensorProd {
                left: r2.clone(),
                right: r3.clone(),
            },
            BilinOp::MatVec {
                rows: IndexSet::Seg(3),
                cols: IndexSet::Seg(2),
            },
            BilinOp::Hadamard {
                index: IndexSet::Seg(3),
            },
            BilinOp::Contract {
                left: r2.clone(),
                mid: r3.clone(),
                right: SpaceTerm::Scalar,
            },
        ];
        for op in &ops {
            let (us, vs) = op.arg_spaces();
            for _ in 0..5 {
                let u = crate::spaces::random_vector(&us, &mut rng);
                let v = crate::spaces::random_vector(&vs, &mut rng);
                let direct = op.apply2(&u, &v).unwrap();
                let via_left = linterm::apply(&op.section_left(&u).unwrap(), &v).unwrap();
                let via_right = linterm::apply(&op.section_right(&v).unwrap(), &u).unwrap();
                assert!(direct.approx_eq(&via_left, 1e-10), "left section of {op:?}");
                assert!(direct.approx_eq(&via_right, 1e-10), "right section of {op:?}");
            }
        }
    }

    #[test]
    fn scalar_mul_left_section_is_a_scale_map() {
        let op = BilinOp::ScalarMul {
            space: SpaceTerm::Scalar,
        };
        let s = op.section_left(&Vector::Scalar(3.0)).unwrap();
        assert_eq!(s, LinTerm::scale(3.0, SpaceTerm::Scalar));
    }

    #[test]
    fn matvec_section_matches_dense_product() {
        // W = b⊗a rank-1: (W ⋆)(v) = (a⊙v)·b
        let b = Vector::rn([1.0, 2.0, 3.0]);
        let a = Vector::rn([4.0, 5.0]);
        let w = Vector::pure_tensor(b.clone(), a.clone()).unwrap();
        let op = BilinOp::MatVec {
            rows: IndexSet::Seg(3),
            cols: IndexSet::Seg(2),
        };
        let sec = op.section_left(&w).unwrap();
        let v = Vector::rn([1.0, 1.0]);
        let out = linterm::apply(&sec, &v).unwrap();
        assert_eq!(out.to_coords().unwrap(), vec![9.0, 18.0, 27.0]);
    }

    #[test]
    fn inner_section_is_dot_product() {
        let op = BilinOp::Inner {
            space: SpaceTerm::rn(2),
        };
        let sec = op.section_right(&Vector::rn([2.0, 3.0])).unwrap();
        let out = linterm::apply(&sec, &Vector::rn([1.0, 1.0])).unwrap();
        assert_eq!(out.to_coords().unwrap(), vec![5.0]);
    }

    #[test]
    fn named_ops_agree_with_their_contraction_forms() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(29);
        let ops = [
            BilinOp::TensorProd {
                left: SpaceTerm::rn(2),
                right: SpaceTerm::rn(3),
            },
            BilinOp::Inner {
                space: SpaceTerm::rn(3),
            },
            BilinOp::ScalarMul {
                space: SpaceTerm::rn(2),
            },
            BilinOp::MatVec {
                rows: IndexSet::Seg(2),
                cols: IndexSet::Seg(3),
            },
            BilinOp::Hadamard {
                index: IndexSet::Seg(4),
            },
        ];
        for op in &ops {
            let reduced = op.contract_form().unwrap();
            let (us, vs) = op.arg_spaces();
            for _ in 0..5 {
                let u = crate::spaces::random_vector(&us, &mut rng);
                let v = crate::spaces::random_vector(&vs, &mut rng);
                let direct = op.apply2(&u, &v).unwrap();
                let via =
                    eval_fun(&reduced, &Vector::tuple([u.clone(), v.clone()])).unwrap();
                assert!(
                    direct.approx_eq(&via, 1e-12),
                    "contraction form of {op:?} disagrees"
                );
            }
        }
    }

    #[test]
    fn pow_maps_componentwise() {
        let f = FunTerm::pow_fun(IndexSet::Seg(3), FunTerm::Prim(PrimOp::Sin));
        let v = Vector::rn([0.0, 1.0, 2.0]);
        let out = eval_fun(&f, &v).unwrap();
        let expect: Vec<f64> = [0.0_f64, 1.0, 2.0].iter().map(|x| x.sin()).collect();
        assert_eq!(out.to_coords().unwrap(), expect);
    }

    #[test]
    fn basis_round_trip_through_tensor_sections() {
        // (⋆ x) applied to a basis matrix recovers columns scaled by x.
        let op = BilinOp::MatVec {
            rows: IndexSet::Seg(2),
            cols: IndexSet::Seg(2),
        };
        let (mat_sp, _) = op.arg_spaces();
        let x = Vector::rn([1.0, 2.0]);
        let sec = op.section_right(&x).unwrap();
        let e0 = basis(&mat_sp, 0).unwrap(); // E₁₁
        let out = linterm::apply(&sec, &e0).unwrap();
        assert_eq!(out.to_coords().unwrap(), vec![1.0, 0.0]);
    }
}
