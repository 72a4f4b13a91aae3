//! Elaboration of surface syntax into fully annotated terms.
//!
//! The written DSL leaves most space annotations implicit. Elaboration
//! fills them from three sources, in order: an `@ dom [-> cod]` ascription
//! on the atom, the expected domain pushed down from the context (for the
//! commands that evaluate a term, this starts from the shape of the input
//! vector), and finally scalar defaults, which make the bare forms
//! (`proj 1`, `bra`, `red {...}`) denote terms over scalar copowers.

use crate::error::{Error, Result};
use crate::funterm::{fadd, fmul, fsub, BilinOp, FunTerm, PrimOp};
use crate::linterm::{derived, infer_types, LinTerm, UnitaryOp};
use crate::spaces::{IndexSet, IndexValue, Relation, SpaceTerm, Vector};

use super::parse::{SFun, SIdxVal, SIndex, SLin, SSpace, SVec};

pub fn elab_index(s: &SIndex) -> IndexSet {
    match s {
        SIndex::Seg(n) => IndexSet::Seg(*n),
        SIndex::Prod(a, b) => IndexSet::prod(elab_index(a), elab_index(b)),
        SIndex::Sum(a, b) => IndexSet::disj_sum(elab_index(a), elab_index(b)),
    }
}

pub fn elab_space(s: &SSpace) -> SpaceTerm {
    match s {
        SSpace::Scalar => SpaceTerm::Scalar,
        SSpace::Zero => SpaceTerm::Zero,
        SSpace::Tuple(items) => SpaceTerm::Tuple(items.iter().map(elab_space).collect()),
        SSpace::Pow(x, body) => SpaceTerm::pow(elab_index(x), elab_space(body)),
        SSpace::Tensor(a, b) => SpaceTerm::tensor(elab_space(a), elab_space(b)),
    }
}

pub fn elab_idx_val(s: &SIdxVal) -> IndexValue {
    match s {
        SIdxVal::Num(n) => IndexValue::Num(*n),
        SIdxVal::Pair(a, b) => IndexValue::pair(elab_idx_val(a), elab_idx_val(b)),
        SIdxVal::Inl(a) => IndexValue::inl(elab_idx_val(a)),
        SIdxVal::Inr(b) => IndexValue::inr(elab_idx_val(b)),
    }
}

pub fn elab_vec(s: &SVec) -> Result<Vector> {
    match s {
        SVec::Num(n) => Ok(Vector::Scalar(*n)),
        SVec::Tuple(items) => Ok(Vector::Tuple(
            items.iter().map(elab_vec).collect::<Result<_>>()?,
        )),
        SVec::MapLit(items) => {
            let vs: Vec<Vector> = items.iter().map(elab_vec).collect::<Result<_>>()?;
            Ok(Vector::Map(IndexSet::Seg(vs.len()), vs))
        }
        SVec::Tensor(terms) => {
            let mut out: Option<Vector> = None;
            for (coeff, l, r) in terms {
                let term = Vector::pure_tensor(elab_vec(l)?, elab_vec(r)?)?.scale(*coeff);
                out = Some(match out {
                    None => term,
                    Some(acc) => acc.add(&term)?,
                });
            }
            out.ok_or_else(|| Error::shape("empty tensor literal"))
        }
    }
}

fn scalar() -> SpaceTerm {
    SpaceTerm::Scalar
}

/// The family a bare `proj i` / `inj i` denotes: `∏^⟨i⟩ℝ`.
pub fn default_family(i: usize) -> SpaceTerm {
    SpaceTerm::rn(i.max(1))
}

fn family_hint(hint: Option<&SpaceTerm>, min_len: usize) -> Option<SpaceTerm> {
    hint.filter(|s| s.family_len().is_some_and(|n| n >= min_len)).cloned()
}

fn tensor_parts(s: &SpaceTerm) -> Option<(SpaceTerm, SpaceTerm)> {
    match s {
        SpaceTerm::Tensor(a, b) => Some(((**a).clone(), (**b).clone())),
        _ => None,
    }
}

pub fn elab_lin(
    s: &SLin,
    dom: Option<&SpaceTerm>,
    cod: Option<&SpaceTerm>,
) -> Result<LinTerm> {
    match s {
        SLin::Ascribe(inner, d, c) => {
            let d = elab_space(d);
            let c = c.as_ref().map(elab_space);
            // For an injection the ascribed space names the codomain
            // family, which is where its annotation lives.
            if let SLin::Inj(i) = &**inner {
                let fam = c.unwrap_or(d);
                return elab_inj(*i, &fam);
            }
            elab_lin(inner, Some(&d), c.as_ref())
        }
        SLin::Id => Ok(LinTerm::Id(dom.or(cod).cloned().unwrap_or_else(scalar))),
        SLin::Zero => Ok(LinTerm::zero(
            dom.cloned().unwrap_or_else(scalar),
            cod.cloned().unwrap_or_else(scalar),
        )),
        SLin::Scale(k) => Ok(LinTerm::scale(
            *k,
            dom.or(cod).cloned().unwrap_or_else(scalar),
        )),
        SLin::Proj(i) => {
            if *i == 0 {
                return Err(Error::ty("proj", "component indices are 1-based"));
            }
            let fam = family_hint(dom, *i).unwrap_or_else(|| default_family(*i));
            Ok(LinTerm::proj(fam, i - 1))
        }
        SLin::Inj(i) => {
            let fam = family_hint(cod, *i).unwrap_or_else(|| default_family(*i));
            elab_inj(*i, &fam)
        }
        SLin::Comp(g, f) => {
            let ff = elab_lin(f, dom, None)?;
            let fcod = infer_types(&ff)?.cod;
            let gg = elab_lin(g, Some(&fcod), cod)?;
            Ok(LinTerm::comp(gg, ff))
        }
        SLin::Plus(a, b) => {
            let aa = elab_lin(a, dom, cod)?;
            let sig = infer_types(&aa)?;
            let bb = elab_lin(b, Some(&sig.dom), Some(&sig.cod))?;
            Ok(LinTerm::plus(aa, bb))
        }
        SLin::Minus(a, b) => {
            let aa = elab_lin(a, dom, cod)?;
            let sig = infer_types(&aa)?;
            let bb = elab_lin(b, Some(&sig.dom), Some(&sig.cod))?;
            Ok(LinTerm::plus(aa, LinTerm::comp(LinTerm::scale(-1.0, sig.cod), bb)))
        }
        SLin::Par(items) => elab_par_lin(items, dom),
        SLin::PowMap(x, body) => {
            let x = elab_index(x);
            let body_dom = match dom {
                Some(SpaceTerm::Pow(_, b)) => Some((**b).clone()),
                Some(other) => other.component(0).cloned(),
                None => None,
            };
            Ok(LinTerm::pow_map(x, elab_lin(body, body_dom.as_ref(), None)?))
        }
        SLin::Fanout(items) => {
            let out = items
                .iter()
                .map(|i| elab_lin(i, dom, None))
                .collect::<Result<Vec<_>>>()?;
            Ok(LinTerm::fanout(out))
        }
        SLin::Red(pairs) => {
            let pairs: Vec<(IndexValue, IndexValue)> = pairs
                .iter()
                .map(|(a, b)| (elab_idx_val(a), elab_idx_val(b)))
                .collect();
            let (x, body) = match dom {
                Some(SpaceTerm::Pow(x, b)) => (x.clone(), (**b).clone()),
                _ => (IndexSet::Seg(max_num(pairs.iter().map(|p| &p.0))?), scalar()),
            };
            let y = match cod {
                Some(SpaceTerm::Pow(y, _)) => y.clone(),
                _ => IndexSet::Seg(max_num(pairs.iter().map(|p| &p.1))?),
            };
            Ok(LinTerm::red(Relation::new(x, y, pairs)?, body))
        }
        SLin::ContractL(v) => {
            let payload = elab_vec(v)?;
            let passive = dom
                .and_then(tensor_parts)
                .map(|(_, u)| u)
                .unwrap_or_else(scalar);
            Ok(LinTerm::contract_l(payload, passive))
        }
        SLin::ContractR(w) => {
            let payload = elab_vec(w)?;
            let passive = dom
                .and_then(tensor_parts)
                .map(|(w_sp, _)| w_sp)
                .unwrap_or_else(scalar);
            Ok(LinTerm::contract_r(payload, passive))
        }
        SLin::Unitary(name) => elab_unitary(name, dom),
        SLin::Dup => Ok(derived::dup(&dom.cloned().unwrap_or_else(scalar))),
        SLin::Sum(n) => {
            let (x, body) = copower_hint(dom, *n)?;
            Ok(derived::sum(&x, &body))
        }
        SLin::Rep(n) => Ok(derived::rep(
            &IndexSet::Seg(*n),
            &dom.cloned().unwrap_or_else(scalar),
        )),
        SLin::Scan(n) => {
            let (x, body) = copower_hint(dom, *n)?;
            match x {
                IndexSet::Seg(len) => Ok(derived::scan(len, &body)),
                other => Err(Error::ty(
                    "scan",
                    format!("scan needs a segment index set, got {other}"),
                )),
            }
        }
    }
}

fn elab_inj(i: usize, fam: &SpaceTerm) -> Result<LinTerm> {
    if i == 0 {
        return Err(Error::ty("inj", "component indices are 1-based"));
    }
    Ok(LinTerm::inj(fam.clone(), i - 1))
}

fn copower_hint(dom: Option<&SpaceTerm>, n: usize) -> Result<(IndexSet, SpaceTerm)> {
    match dom {
        Some(SpaceTerm::Pow(x, b)) if x.card() == n => Ok((x.clone(), (**b).clone())),
        Some(other) if other.family_len() == Some(n) => {
            Ok((IndexSet::Seg(n), other.component(0).cloned().unwrap()))
        }
        _ => Ok((IndexSet::Seg(n), scalar())),
    }
}

fn max_num<'a>(vals: impl Iterator<Item = &'a IndexValue>) -> Result<usize> {
    let mut best = 0;
    for v in vals {
        match v {
            IndexValue::Num(n) => best = best.max(*n),
            other => {
                return Err(Error::ty(
                    "red",
                    format!(
                        "cannot infer the index set containing {other}; add an `@ [X]V -> [Y]V` ascription"
                    ),
                ))
            }
        }
    }
    Ok(best.max(1))
}

fn elab_par_lin(items: &[SLin], dom: Option<&SpaceTerm>) -> Result<LinTerm> {
    match dom {
        Some(SpaceTerm::Pow(x, body)) if x.card() == items.len() => {
            let out = items
                .iter()
                .map(|i| elab_lin(i, Some(body), None))
                .collect::<Result<Vec<_>>>()?;
            Ok(LinTerm::par_pow(x.clone(), out))
        }
        Some(fam) if fam.family_len() == Some(items.len()) => {
            let out = items
                .iter()
                .enumerate()
                .map(|(i, t)| elab_lin(t, fam.component(i), None))
                .collect::<Result<Vec<_>>>()?;
            Ok(LinTerm::par(out))
        }
        _ => {
            let out = items
                .iter()
                .map(|i| elab_lin(i, None, None))
                .collect::<Result<Vec<_>>>()?;
            Ok(LinTerm::par(out))
        }
    }
}

fn elab_unitary(name: &str, dom: Option<&SpaceTerm>) -> Result<LinTerm> {
    let fail = |need: &str| {
        Error::ty(
            name.to_string(),
            format!("cannot infer spaces; expected a domain shaped like {need} (ascribe with `@`)"),
        )
    };
    let op = match name {
        "bra" => UnitaryOp::Bra(dom.cloned().unwrap_or_else(scalar)),
        "ket" => UnitaryOp::Ket(dom.cloned().unwrap_or_else(scalar)),
        "ibra" => match dom {
            Some(s) => {
                let (k, v) = tensor_parts(s).ok_or_else(|| fail("R (x) V"))?;
                if !k.equiv(&scalar()) {
                    return Err(fail("R (x) V"));
                }
                UnitaryOp::IBra(v)
            }
            None => UnitaryOp::IBra(scalar()),
        },
        "iket" => match dom {
            Some(s) => {
                let (v, k) = tensor_parts(s).ok_or_else(|| fail("V (x) R"))?;
                if !k.equiv(&scalar()) {
                    return Err(fail("V (x) R"));
                }
                UnitaryOp::IKet(v)
            }
            None => UnitaryOp::IKet(scalar()),
        },
        "ttranspose" => match dom {
            Some(s) => {
                let (v, w) = tensor_parts(s).ok_or_else(|| fail("V (x) W"))?;
                UnitaryOp::Transpose(v, w)
            }
            None => UnitaryOp::Transpose(scalar(), scalar()),
        },
        "assoc" => match dom {
            Some(s) => {
                let (uv, w) = tensor_parts(s).ok_or_else(|| fail("(U (x) V) (x) W"))?;
                let (u, v) = tensor_parts(&uv).ok_or_else(|| fail("(U (x) V) (x) W"))?;
                UnitaryOp::Assoc(u, v, w)
            }
            None => UnitaryOp::Assoc(scalar(), scalar(), scalar()),
        },
        "assoc_inv" => match dom {
            Some(s) => {
                let (u, vw) = tensor_parts(s).ok_or_else(|| fail("U (x) (V (x) W)"))?;
                let (v, w) = tensor_parts(&vw).ok_or_else(|| fail("U (x) (V (x) W)"))?;
                UnitaryOp::AssocInv(u, v, w)
            }
            None => UnitaryOp::AssocInv(scalar(), scalar(), scalar()),
        },
        "distrib" => match dom {
            Some(s) => {
                let (family, factor) = tensor_parts(s).ok_or_else(|| fail("(V1, ..., Vn) (x) W"))?;
                if !family.is_family() {
                    return Err(fail("(V1, ..., Vn) (x) W"));
                }
                UnitaryOp::Distrib { family, factor }
            }
            None => UnitaryOp::Distrib {
                family: SpaceTerm::pair(scalar(), scalar()),
                factor: scalar(),
            },
        },
        "distrib_inv" => match dom {
            Some(s) => {
                let comps = s
                    .components()
                    .ok_or_else(|| fail("a family of tensors (V_i (x) W)"))?;
                let mut lefts = Vec::new();
                let mut factor = None;
                for c in &comps {
                    let (l, r) = tensor_parts(c)
                        .ok_or_else(|| fail("a family of tensors (V_i (x) W)"))?;
                    lefts.push(l);
                    factor.get_or_insert(r);
                }
                let factor = factor.ok_or_else(|| fail("a non-empty family of tensors"))?;
                let family = match s {
                    SpaceTerm::Pow(x, _) => SpaceTerm::pow(x.clone(), lefts[0].clone()),
                    _ => SpaceTerm::Tuple(lefts),
                };
                UnitaryOp::DistribInv { family, factor }
            }
            None => UnitaryOp::DistribInv {
                family: SpaceTerm::pair(scalar(), scalar()),
                factor: scalar(),
            },
        },
        "zip" => match dom {
            Some(s) => {
                let comps = s.components().filter(|c| c.len() == 2).ok_or_else(|| {
                    fail("a pair of families ((V1,...,Vn), (W1,...,Wn))")
                })?;
                UnitaryOp::Zip {
                    left: comps[0].clone(),
                    right: comps[1].clone(),
                }
            }
            None => UnitaryOp::Zip {
                left: SpaceTerm::rn(1),
                right: SpaceTerm::rn(1),
            },
        },
        "unzip" => match dom {
            Some(s) => {
                let comps = s
                    .components()
                    .ok_or_else(|| fail("a family of pairs"))?;
                let mut lefts = Vec::new();
                let mut rights = Vec::new();
                for c in &comps {
                    let parts = c
                        .components()
                        .filter(|p| p.len() == 2)
                        .ok_or_else(|| fail("a family of pairs"))?;
                    lefts.push(parts[0].clone());
                    rights.push(parts[1].clone());
                }
                let (left, right) = match s {
                    SpaceTerm::Pow(x, _) if !lefts.is_empty() => (
                        SpaceTerm::pow(x.clone(), lefts[0].clone()),
                        SpaceTerm::pow(x.clone(), rights[0].clone()),
                    ),
                    _ => (SpaceTerm::Tuple(lefts), SpaceTerm::Tuple(rights)),
                };
                UnitaryOp::Unzip { left, right }
            }
            None => UnitaryOp::Unzip {
                left: SpaceTerm::rn(1),
                right: SpaceTerm::rn(1),
            },
        },
        other => return Err(Error::ty(other.to_string(), "unknown unitary")),
    };
    Ok(LinTerm::Unitary(op))
}

pub fn elab_fun(s: &SFun, dom: Option<&SpaceTerm>) -> Result<FunTerm> {
    match s {
        SFun::Ascribe(inner, d, _cod) => {
            let d = elab_space(d);
            elab_fun(inner, Some(&d))
        }
        SFun::Prim(name, k) => {
            if let Some(d) = dom {
                if !d.equiv(&scalar()) {
                    return Err(Error::ty(
                        name.to_string(),
                        format!("scalar primitive applied at domain {d}"),
                    ));
                }
            }
            Ok(FunTerm::Prim(match *name {
                "sin" => PrimOp::Sin,
                "cos" => PrimOp::Cos,
                "exp" => PrimOp::Exp,
                "ln" => PrimOp::Ln,
                "tanh" => PrimOp::Tanh,
                "pow" => {
                    if *k == 0 {
                        return Err(Error::ty("pow", "the exponent must be nonzero"));
                    }
                    PrimOp::Power(*k)
                }
                other => return Err(Error::ty(other.to_string(), "unknown primitive")),
            }))
        }
        SFun::Const(v) => Ok(FunTerm::constant(
            elab_vec(v)?,
            dom.cloned().unwrap_or_else(scalar),
        )),
        SFun::LinTerm(h) => Ok(FunTerm::Lin(elab_lin(h, dom, None)?)),
        SFun::Bilin(name) => elab_bilin(name, dom),
        SFun::Comp(g, f) => {
            let ff = elab_fun(f, dom)?;
            let fcod = crate::funterm::infer_fun(&ff)?.cod;
            let gg = elab_fun(g, Some(&fcod))?;
            Ok(FunTerm::comp(gg, ff))
        }
        SFun::Add(a, b) => fadd(elab_fun(a, dom)?, elab_fun(b, dom)?),
        SFun::Sub(a, b) => fsub(elab_fun(a, dom)?, elab_fun(b, dom)?),
        SFun::Mul(a, b) => fmul(elab_fun(a, dom)?, elab_fun(b, dom)?),
        SFun::Par(items) => match dom {
            Some(SpaceTerm::Pow(x, body)) if x.card() == items.len() => {
                let out = items
                    .iter()
                    .map(|i| elab_fun(i, Some(body)))
                    .collect::<Result<Vec<_>>>()?;
                Ok(FunTerm::par_pow(x.clone(), out))
            }
            Some(fam) if fam.family_len() == Some(items.len()) => {
                let out = items
                    .iter()
                    .enumerate()
                    .map(|(i, t)| elab_fun(t, fam.component(i)))
                    .collect::<Result<Vec<_>>>()?;
                Ok(FunTerm::par(out))
            }
            _ => {
                let out = items
                    .iter()
                    .map(|i| elab_fun(i, None))
                    .collect::<Result<Vec<_>>>()?;
                Ok(FunTerm::par(out))
            }
        },
        SFun::PowFun(x, body) => {
            let x = elab_index(x);
            let body_dom = match dom {
                Some(SpaceTerm::Pow(_, b)) => Some((**b).clone()),
                Some(other) => other.component(0).cloned(),
                None => None,
            };
            Ok(FunTerm::pow_fun(x, elab_fun(body, body_dom.as_ref())?))
        }
    }
}

fn elab_bilin(name: &str, dom: Option<&SpaceTerm>) -> Result<FunTerm> {
    let halves = dom.and_then(|d| d.components()).filter(|c| c.len() == 2);
    let fail = |need: &str| {
        Error::ty(
            name.to_string(),
            format!("cannot infer spaces; expected a pair domain shaped like {need}"),
        )
    };
    let op = match name {
        "mul" => match &halves {
            Some(c) => {
                if !c[0].equiv(&scalar()) {
                    return Err(fail("(R, V)"));
                }
                BilinOp::ScalarMul { space: c[1].clone() }
            }
            None => BilinOp::ScalarMul { space: scalar() },
        },
        "dot" => match &halves {
            Some(c) => {
                if !c[0].equiv(&c[1]) {
                    return Err(fail("(V, V)"));
                }
                BilinOp::Inner { space: c[0].clone() }
            }
            None => BilinOp::Inner { space: scalar() },
        },
        "tensor" => match &halves {
            Some(c) => BilinOp::TensorProd {
                left: c[0].clone(),
                right: c[1].clone(),
            },
            None => BilinOp::TensorProd {
                left: scalar(),
                right: scalar(),
            },
        },
        "hadamard" => match &halves {
            Some(c) => match &c[0] {
                SpaceTerm::Pow(x, b) if b.equiv(&scalar()) => {
                    BilinOp::Hadamard { index: x.clone() }
                }
                other => match other.family_len() {
                    Some(n) if other.component(0).is_some_and(|v| v.equiv(&scalar())) => {
                        BilinOp::Hadamard {
                            index: IndexSet::Seg(n),
                        }
                    }
                    _ => return Err(fail("([X]R, [X]R)")),
                },
            },
            None => BilinOp::Hadamard {
                index: IndexSet::Seg(1),
            },
        },
        "matvec" => match &halves {
            Some(c) => {
                let (rows_sp, cols_sp) = tensor_parts(&c[0]).ok_or_else(|| {
                    fail("([m]R (x) [n]R, [n]R)")
                })?;
                let rows = match rows_sp {
                    SpaceTerm::Pow(x, b) if b.equiv(&scalar()) => x,
                    _ => return Err(fail("([m]R (x) [n]R, [n]R)")),
                };
                let cols = match cols_sp {
                    SpaceTerm::Pow(x, b) if b.equiv(&scalar()) => x,
                    _ => return Err(fail("([m]R (x) [n]R, [n]R)")),
                };
                BilinOp::MatVec { rows, cols }
            }
            None => BilinOp::MatVec {
                rows: IndexSet::Seg(1),
                cols: IndexSet::Seg(1),
            },
        },
        "contract" => match &halves {
            Some(c) => {
                let (w, v) = tensor_parts(&c[0]).ok_or_else(|| fail("(W (x) V, V (x) U)"))?;
                let (v2, u) = tensor_parts(&c[1]).ok_or_else(|| fail("(W (x) V, V (x) U)"))?;
                if !v.equiv(&v2) {
                    return Err(fail("(W (x) V, V (x) U)"));
                }
                BilinOp::Contract {
                    left: w,
                    mid: v,
                    right: u,
                }
            }
            None => BilinOp::Contract {
                left: scalar(),
                mid: scalar(),
                right: scalar(),
            },
        },
        other => return Err(Error::ty(other.to_string(), "unknown bilinear operation")),
    };
    Ok(FunTerm::Bilin(op))
}
