//! Ready-made function terms used throughout the examples and tests.

use crate::funterm::{fadd, fmul, fsub, fanout_fun, BilinOp, FunTerm, PrimOp};
use crate::spaces::{SpaceTerm, Vector};

/// `ln ∘ sin : ℝ → ℝ`.
pub fn scalar_chain() -> FunTerm {
    FunTerm::comp(FunTerm::Prim(PrimOp::Ln), FunTerm::Prim(PrimOp::Sin))
}

/// The two-variable standard example
/// `f(x₁,x₂) = ln(x₁) + x₁·x₂ − sin(x₂)` on the pair space `ℝ × ℝ`.
pub fn two_variable() -> FunTerm {
    let pair = SpaceTerm::pair(SpaceTerm::Scalar, SpaceTerm::Scalar);
    let p1 = FunTerm::proj(pair.clone(), 0);
    let p2 = FunTerm::proj(pair, 1);
    let ln_x1 = FunTerm::comp(FunTerm::Prim(PrimOp::Ln), p1.clone());
    let x1_x2 = fmul(p1, p2.clone()).expect("well-typed by construction");
    let sin_x2 = FunTerm::comp(FunTerm::Prim(PrimOp::Sin), p2);
    fsub(fadd(ln_x1, x1_x2).unwrap(), sin_x2).unwrap()
}

/// Closed-form gradient of [`two_variable`]: `(1/x₁ + x₂, x₁ − cos x₂)`.
pub fn two_variable_gradient(x1: f64, x2: f64) -> Vector {
    Vector::tuple([
        Vector::Scalar(1.0 / x1 + x2),
        Vector::Scalar(x1 - x2.cos()),
    ])
}

/// `f(x) = b·sin(a⊙x) : ∏ⁿℝ → ∏ᵐℝ`, whose derivative at `x₀` is the
/// rank-1 tensor `cos(a⊙x₀)·(b⊗a)`. The vectors `a` and `b` enter as
/// section payloads, so they are constants of the function.
pub fn scaled_sine_row(a: &Vector, b: &Vector) -> FunTerm {
    let n_space = a.shape().expect("a has a shape");
    let m_space = b.shape().expect("b has a shape");
    let inner_with_a = BilinOp::Inner { space: n_space }
        .section_left(a)
        .expect("inner section");
    let into_b = BilinOp::ScalarMul { space: m_space }
        .section_right(b)
        .expect("scaling section");
    FunTerm::pipeline([
        FunTerm::Lin(inner_with_a),
        FunTerm::Prim(PrimOp::Sin),
        FunTerm::Lin(into_b),
    ])
    .unwrap()
}

/// A total, chainable `ℝ×ℝ → ℝ×ℝ` block built from the same lifted
/// arithmetic as [`two_variable`] (products of projections and scalar
/// primitives, no logarithms), used to measure derivative growth over
/// long chains.
pub fn smooth_pair_block() -> FunTerm {
    let pair = SpaceTerm::pair(SpaceTerm::Scalar, SpaceTerm::Scalar);
    let p1 = FunTerm::proj(pair.clone(), 0);
    let p2 = FunTerm::proj(pair, 1);
    let sin_x1 = FunTerm::comp(FunTerm::Prim(PrimOp::Sin), p1.clone());
    let cos_x2 = FunTerm::comp(FunTerm::Prim(PrimOp::Cos), p2.clone());
    let first = fadd(sin_x1.clone(), fmul(p1, p2).unwrap()).unwrap();
    let second = fadd(cos_x2, sin_x1).unwrap();
    fanout_fun(vec![first, second]).unwrap()
}

/// [`smooth_pair_block`] composed with itself `k` times.
pub fn chained_blocks(k: usize) -> FunTerm {
    let block = smooth_pair_block();
    let mut t = block.clone();
    for _ in 1..k {
        t = FunTerm::comp(block.clone(), t);
    }
    t
}
