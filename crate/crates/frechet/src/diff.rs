//! Affine interpretation: evaluation that also yields symbolic derivatives.
//!
//! [`affine`] walks a function term once and returns the value together
//! with a `LinTerm` for the Fréchet derivative at that point (forward
//! mode). [`affine_adj`] is the same single pass but builds the adjoint of
//! the derivative directly (reverse mode). In both, a bilinear node stores
//! its two evaluated arguments once as section payloads shared by the two
//! summands of the product rule, so derivative terms stay linear in the
//! size of the input term.

use crate::adjoint::adjoint;
use crate::error::{Error, Result};
use crate::funterm::{infer_fun, FunTerm};
use crate::linterm::{apply, LinTerm};
use crate::spaces::{SpaceTerm, Vector};

/// Value and symbolic Fréchet derivative of a term at a point.
#[derive(Debug, Clone)]
pub struct AffineResult {
    pub value: Vector,
    pub deriv: LinTerm,
}

/// Value and symbolic adjoint derivative of a term at a point.
#[derive(Debug, Clone)]
pub struct AdjointAffineResult {
    pub value: Vector,
    pub adj_deriv: LinTerm,
}

/// Forward affine interpretation: `(f(v), f′(v))`.
pub fn affine(t: &FunTerm, v: &Vector) -> Result<AffineResult> {
    match t {
        FunTerm::Const { value, dom } => {
            if !v.matches(dom) {
                return Err(Error::shape(format!("constant expects input in {dom}")));
            }
            Ok(AffineResult {
                value: value.clone(),
                deriv: LinTerm::zero(dom.clone(), value.shape()?),
            })
        }
        FunTerm::Prim(p) => {
            let x = v.to_coords()?[0];
            if !v.matches(&SpaceTerm::Scalar) {
                return Err(Error::shape("primitive applied to a non-scalar"));
            }
            Ok(AffineResult {
                value: Vector::Scalar(p.value(x)?),
                deriv: p.deriv_at(x)?,
            })
        }
        FunTerm::Lin(h) => Ok(AffineResult {
            value: apply(h, v)?,
            deriv: h.clone(),
        }),
        FunTerm::Bilin(b) => {
            let parts = v.family_items()?;
            if parts.len() != 2 {
                return Err(Error::shape("bilinear operation expects a pair"));
            }
            let (u, w) = (&parts[0], &parts[1]);
            let (us, ws) = b.arg_spaces();
            let pair = SpaceTerm::pair(us, ws);
            Ok(AffineResult {
                value: b.apply2(u, w)?,
                deriv: LinTerm::plus(
                    LinTerm::comp(b.section_left(u)?, LinTerm::proj(pair.clone(), 1)),
                    LinTerm::comp(b.section_right(w)?, LinTerm::proj(pair, 0)),
                ),
            })
        }
        FunTerm::Comp(g, f) => {
            let fx = affine(f, v)?;
            let gfx = affine(g, &fx.value)?;
            Ok(AffineResult {
                value: gfx.value,
                deriv: LinTerm::comp(gfx.deriv, fx.deriv),
            })
        }
        FunTerm::Par { over, items } => {
            let parts = v.family_items()?;
            if parts.len() != items.len() {
                return Err(Error::shape("parallel composition arity mismatch"));
            }
            let results = items
                .iter()
                .zip(&parts)
                .map(|(t, p)| affine(t, p))
                .collect::<Result<Vec<_>>>()?;
            let values = results.iter().map(|r| r.value.clone()).collect();
            let derivs = results.into_iter().map(|r| r.deriv).collect();
            Ok(AffineResult {
                value: family_value(over, values),
                deriv: LinTerm::ParMap {
                    over: over.clone(),
                    items: derivs,
                },
            })
        }
        FunTerm::Pow { index, item } => {
            let parts = v.family_items()?;
            let results = parts
                .iter()
                .map(|p| affine(item, p))
                .collect::<Result<Vec<_>>>()?;
            let values = results.iter().map(|r| r.value.clone()).collect();
            let derivs = results.into_iter().map(|r| r.deriv).collect();
            Ok(AffineResult {
                value: family_value(&Some(index.clone()), values),
                deriv: LinTerm::ParMap {
                    over: Some(index.clone()),
                    items: derivs,
                },
            })
        }
    }
}

/// Reverse affine interpretation: `(f(v), adj(f′(v)))` in one pass.
pub fn affine_adj(t: &FunTerm, v: &Vector) -> Result<AdjointAffineResult> {
    match t {
        FunTerm::Const { value, dom } => {
            if !v.matches(dom) {
                return Err(Error::shape(format!("constant expects input in {dom}")));
            }
            Ok(AdjointAffineResult {
                value: value.clone(),
                adj_deriv: LinTerm::zero(value.shape()?, dom.clone()),
            })
        }
        FunTerm::Prim(p) => {
            let x = v.to_coords()?[0];
            if !v.matches(&SpaceTerm::Scalar) {
                return Err(Error::shape("primitive applied to a non-scalar"));
            }
            Ok(AdjointAffineResult {
                value: Vector::Scalar(p.value(x)?),
                adj_deriv: p.deriv_at(x)?,
            })
        }
        FunTerm::Lin(h) => Ok(AdjointAffineResult {
            value: apply(h, v)?,
            adj_deriv: adjoint(h)?,
        }),
        FunTerm::Bilin(b) => {
            let parts = v.family_items()?;
            if parts.len() != 2 {
                return Err(Error::shape("bilinear operation expects a pair"));
            }
            let (u, w) = (&parts[0], &parts[1]);
            let (us, ws) = b.arg_spaces();
            let pair = SpaceTerm::pair(us, ws);
            Ok(AdjointAffineResult {
                value: b.apply2(u, w)?,
                adj_deriv: LinTerm::plus(
                    LinTerm::comp(LinTerm::inj(pair.clone(), 1), adjoint(&b.section_left(u)?)?),
                    LinTerm::comp(LinTerm::inj(pair, 0), adjoint(&b.section_right(w)?)?),
                ),
            })
        }
        FunTerm::Comp(g, f) => {
            let fx = affine_adj(f, v)?;
            let gfx = affine_adj(g, &fx.value)?;
            Ok(AdjointAffineResult {
                value: gfx.value,
                adj_deriv: LinTerm::comp(fx.adj_deriv, gfx.adj_deriv),
            })
        }
        FunTerm::Par { over, items } => {
            let parts = v.family_items()?;
            if parts.len() != items.len() {
                return Err(Error::shape("parallel composition arity mismatch"));
            }
            let results = items
                .iter()
                .zip(&parts)
                .map(|(t, p)| affine_adj(t, p))
                .collect::<Result<Vec<_>>>()?;
            let values = results.iter().map(|r| r.value.clone()).collect();
            let derivs = results.into_iter().map(|r| r.adj_deriv).collect();
            Ok(AdjointAffineResult {
                value: family_value(over, values),
                adj_deriv: LinTerm::ParMap {
                    over: over.clone(),
                    items: derivs,
                },
            })
        }
        FunTerm::Pow { index, item } => {
            let parts = v.family_items()?;
            let results = parts
                .iter()
                .map(|p| affine_adj(item, p))
                .collect::<Result<Vec<_>>>()?;
            let values = results.iter().map(|r| r.value.clone()).collect();
            let derivs = results.into_iter().map(|r| r.adj_deriv).collect();
            Ok(AdjointAffineResult {
                value: family_value(&Some(index.clone()), values),
                adj_deriv: LinTerm::ParMap {
                    over: Some(index.clone()),
                    items: derivs,
                },
            })
        }
    }
}

fn family_value(over: &Option<crate::spaces::IndexSet>, items: Vec<Vector>) -> Vector {
    match over {
        Some(x) => Vector::family_like(&SpaceTerm::pow(x.clone(), SpaceTerm::Zero), items),
        None => Vector::Tuple(items),
    }
}

/// Derivative applied to a tangent: `f′(v)(dv)`.
pub fn jvp(t: &FunTerm, v: &Vector, dv: &Vector) -> Result<Vector> {
    apply(&affine(t, v)?.deriv, dv)
}

/// Adjoint derivative applied to a cotangent: `adj(f′(v))(dy)`.
pub fn vjp(t: &FunTerm, v: &Vector, dy: &Vector) -> Result<Vector> {
    apply(&affine_adj(t, v)?.adj_deriv, dy)
}

/// Gradient of a scalar-valued term: `∇f(v) = adj(f′(v))(1)`.
pub fn gradient(t: &FunTerm, v: &Vector) -> Result<Vector> {
    let sig = infer_fun(t)?;
    if !sig.cod.equiv(&SpaceTerm::Scalar) {
        return Err(Error::ty(
            "gradient",
            format!("gradient needs a scalar codomain, got {}", sig.cod),
        ));
    }
    vjp(t, v, &Vector::Scalar(1.0))
}
