//! Printers for vectors, spaces and terms in the DSL's own syntax.
//!
//! Printing is self-sufficient: the output parses back to a structurally
//! equal term with no external shape hints, so atoms whose annotations
//! differ from the parser defaults carry an `@` ascription.

use crate::funterm::{BilinOp, FunTerm, PrimOp};
use crate::linterm::{infer_types, LinTerm, UnitaryOp};
use crate::spaces::{IndexSet, SpaceTerm, Vector};

use super::elab::default_family;

pub fn print_space(s: &SpaceTerm) -> String {
    match s {
        SpaceTerm::Zero => "0".to_string(),
        SpaceTerm::Scalar => "R".to_string(),
        SpaceTerm::Tuple(items) => match items.len() {
            0 => "()".to_string(),
            1 => format!("({},)", print_space(&items[0])),
            _ => format!(
                "({})",
                items.iter().map(print_space).collect::<Vec<_>>().join(", ")
            ),
        },
        SpaceTerm::Pow(x, body) => format!("[{x}]{}", print_space_atom(body)),
        SpaceTerm::Tensor(a, b) => {
            format!("{} (x) {}", print_space_atom(a), print_space_atom(b))
        }
    }
}

fn print_space_atom(s: &SpaceTerm) -> String {
    match s {
        SpaceTerm::Tensor(_, _) => format!("({})", print_space(s)),
        _ => print_space(s),
    }
}

fn fmt_f64(x: f64) -> String {
    format!("{x}")
}

fn print_zero_of(space: &SpaceTerm) -> String {
    match space {
        SpaceTerm::Zero => "()".to_string(),
        SpaceTerm::Scalar => "0".to_string(),
        SpaceTerm::Tuple(items) => match items.len() {
            0 => "()".to_string(),
            1 => format!("({},)", print_zero_of(&items[0])),
            _ => format!(
                "({})",
                items.iter().map(print_zero_of).collect::<Vec<_>>().join(", ")
            ),
        },
        SpaceTerm::Pow(x, body) => {
            let item = print_zero_of(body);
            format!("[{}]", vec![item; x.card()].join(", "))
        }
        SpaceTerm::Tensor(u, v) => {
            format!("tensor{{ 0 * {} (x) {} }}", print_zero_of(u), print_zero_of(v))
        }
    }
}

pub fn print_vec(v: &Vector) -> String {
    match v {
        Vector::Zero(space) => print_zero_of(space),
        Vector::Scalar(x) => fmt_f64(*x),
        Vector::Tuple(items) => match items.len() {
            0 => "()".to_string(),
            1 => format!("({},)", print_vec(&items[0])),
            _ => format!(
                "({})",
                items.iter().map(print_vec).collect::<Vec<_>>().join(", ")
            ),
        },
        Vector::Map(_, items) => format!(
            "[{}]",
            items.iter().map(print_vec).collect::<Vec<_>>().join(", ")
        ),
        Vector::Tensor { left, right, terms } => {
            if terms.is_empty() {
                return print_zero_of(&SpaceTerm::tensor(left.clone(), right.clone()));
            }
            let body = terms
                .iter()
                .map(|t| {
                    format!(
                        "{} * {} (x) {}",
                        fmt_f64(t.coeff),
                        print_vec(&t.left),
                        print_vec(&t.right)
                    )
                })
                .collect::<Vec<_>>()
                .join(", ");
            format!("tensor{{ {body} }}")
        }
    }
}

fn scalar() -> SpaceTerm {
    SpaceTerm::Scalar
}

fn default_unitary(op: &UnitaryOp) -> UnitaryOp {
    match op {
        UnitaryOp::Bra(_) => UnitaryOp::Bra(scalar()),
        UnitaryOp::IBra(_) => UnitaryOp::IBra(scalar()),
        UnitaryOp::Ket(_) => UnitaryOp::Ket(scalar()),
        UnitaryOp::IKet(_) => UnitaryOp::IKet(scalar()),
        UnitaryOp::Transpose(_, _) => UnitaryOp::Transpose(scalar(), scalar()),
        UnitaryOp::Assoc(_, _, _) => UnitaryOp::Assoc(scalar(), scalar(), scalar()),
        UnitaryOp::AssocInv(_, _, _) => UnitaryOp::AssocInv(scalar(), scalar(), scalar()),
        UnitaryOp::Distrib { .. } => UnitaryOp::Distrib {
            family: SpaceTerm::pair(scalar(), scalar()),
            factor: scalar(),
        },
        UnitaryOp::DistribInv { .. } => UnitaryOp::DistribInv {
            family: SpaceTerm::pair(scalar(), scalar()),
            factor: scalar(),
        },
        UnitaryOp::Zip { .. } => UnitaryOp::Zip {
            left: SpaceTerm::rn(1),
            right: SpaceTerm::rn(1),
        },
        UnitaryOp::Unzip { .. } => UnitaryOp::Unzip {
            left: SpaceTerm::rn(1),
            right: SpaceTerm::rn(1),
        },
    }
}

fn unitary_name(op: &UnitaryOp) -> &'static str {
    match op {
        UnitaryOp::Bra(_) => "bra",
        UnitaryOp::IBra(_) => "ibra",
        UnitaryOp::Ket(_) => "ket",
        UnitaryOp::IKet(_) => "iket",
        UnitaryOp::Transpose(_, _) => "ttranspose",
        UnitaryOp::Assoc(_, _, _) => "assoc",
        UnitaryOp::AssocInv(_, _, _) => "assoc_inv",
        UnitaryOp::Distrib { .. } => "distrib",
        UnitaryOp::DistribInv { .. } => "distrib_inv",
        UnitaryOp::Zip { .. } => "zip",
        UnitaryOp::Unzip { .. } => "unzip",
    }
}

// Precedence levels: 0 = sums, 1 = compositions, 2 = atoms.
fn lin_prec(t: &LinTerm) -> u8 {
    match t {
        LinTerm::Plus(_, _) => 0,
        LinTerm::Comp(_, _) => 1,
        _ => 2,
    }
}

fn lin_at(t: &LinTerm, min_prec: u8) -> String {
    let s = print_lin(t);
    if lin_prec(t) < min_prec {
        format!("({s})")
    } else {
        s
    }
}

pub fn print_lin(t: &LinTerm) -> String {
    match t {
        LinTerm::Id(v) if v.equiv(&scalar()) => "id".to_string(),
        LinTerm::Id(v) => format!("id @ {}", print_space(v)),
        LinTerm::Zero { dom, cod } if dom.equiv(&scalar()) && cod.equiv(&scalar()) => {
            "zero".to_string()
        }
        LinTerm::Zero { dom, cod } => {
            format!("zero @ {} -> {}", print_space(dom), print_space(cod))
        }
        LinTerm::Scale { factor, space } => {
            let base = format!("{} *.", fmt_f64(*factor));
            if space.equiv(&scalar()) {
                base
            } else {
                format!("{base} @ {}", print_space(space))
            }
        }
        LinTerm::Comp(g, f) => format!("{} . {}", lin_at(g, 2), lin_at(f, 1)),
        LinTerm::Plus(a, b) => format!("{} + {}", lin_at(a, 0), lin_at(b, 1)),
        LinTerm::ContractL { payload, passive } => {
            let base = format!("contractL {}", print_vec(payload));
            if passive.equiv(&scalar()) {
                base
            } else {
                match payload.shape() {
                    Ok(SpaceTerm::Tensor(_, mid)) => format!(
                        "{base} @ {}",
                        print_space(&SpaceTerm::tensor((*mid).clone(), passive.clone()))
                    ),
                    _ => base,
                }
            }
        }
        LinTerm::ContractR { payload, passive } => {
            let base = format!("contractR {}", print_vec(payload));
            if passive.equiv(&scalar()) {
                base
            } else {
                match payload.shape() {
                    Ok(SpaceTerm::Tensor(mid, _)) => format!(
                        "{base} @ {}",
                        print_space(&SpaceTerm::tensor(passive.clone(), (*mid).clone()))
                    ),
                    _ => base,
                }
            }
        }
        LinTerm::Inj { family, at } => {
            if *family == default_family(at + 1) {
                format!("inj {}", at + 1)
            } else {
                format!("inj {} @ {}", at + 1, print_space(family))
            }
        }
        LinTerm::Proj { family, at } => {
            if *family == default_family(at + 1) {
                format!("proj {}", at + 1)
            } else {
                format!("proj {} @ {}", at + 1, print_space(family))
            }
        }
        LinTerm::ParMap { over, items } => {
            let body = items.iter().map(print_lin).collect::<Vec<_>>().join(", ");
            // The ascription pins whether the families are tuples or
            // copowers, which context hints would otherwise decide.
            match over {
                None => {
                    let doms: Option<Vec<SpaceTerm>> =
                        items.iter().map(|i| infer_types(i).ok().map(|s| s.dom)).collect();
                    match doms {
                        Some(doms) => format!(
                            "par({body}) @ {}",
                            print_space(&SpaceTerm::Tuple(doms))
                        ),
                        None => format!("par({body})"),
                    }
                }
                Some(x) => {
                    let dom0 = items
                        .first()
                        .and_then(|i| infer_types(i).ok())
                        .map(|s| s.dom)
                        .unwrap_or_else(scalar);
                    format!(
                        "par({body}) @ {}",
                        print_space(&SpaceTerm::pow(x.clone(), dom0))
                    )
                }
            }
        }
        LinTerm::PowMap { index, item } => {
            format!("pow {index} ({})", print_lin(item))
        }
        LinTerm::Fanout { items } => {
            let body = items.iter().map(print_lin).collect::<Vec<_>>().join(", ");
            format!("fanout({body})")
        }
        LinTerm::Red { rel, body } => {
            let pairs = rel
                .pairs()
                .map(|(a, b)| format!("({a},{b})"))
                .collect::<Vec<_>>()
                .join(",");
            let all_num = rel
                .pairs()
                .all(|(a, b)| matches!(a, crate::spaces::IndexValue::Num(_)) && matches!(b, crate::spaces::IndexValue::Num(_)));
            let max_fst = rel
                .pairs()
                .filter_map(|(a, _)| match a {
                    crate::spaces::IndexValue::Num(n) => Some(*n),
                    _ => None,
                })
                .max()
                .unwrap_or(0)
                .max(1);
            let max_snd = rel
                .pairs()
                .filter_map(|(_, b)| match b {
                    crate::spaces::IndexValue::Num(n) => Some(*n),
                    _ => None,
                })
                .max()
                .unwrap_or(0)
                .max(1);
            let bare = body.equiv(&scalar())
                && all_num
                && !rel.is_empty()
                && *rel.domain() == IndexSet::Seg(max_fst)
                && *rel.codomain() == IndexSet::Seg(max_snd);
            if bare {
                format!("red {{{pairs}}}")
            } else {
                format!(
                    "red {{{pairs}}} @ {} -> {}",
                    print_space(&SpaceTerm::pow(rel.domain().clone(), body.clone())),
                    print_space(&SpaceTerm::pow(rel.codomain().clone(), body.clone()))
                )
            }
        }
        LinTerm::Unitary(op) => {
            if *op == default_unitary(op) {
                unitary_name(op).to_string()
            } else {
                match op.signature() {
                    Ok(sig) => format!("{} @ {}", unitary_name(op), print_space(&sig.dom)),
                    Err(_) => unitary_name(op).to_string(),
                }
            }
        }
    }
}

fn fun_prec(t: &FunTerm) -> u8 {
    match t {
        FunTerm::Comp(_, _) => 1,
        _ => 2,
    }
}

fn fun_at(t: &FunTerm, min_prec: u8) -> String {
    let s = print_fun(t);
    if fun_prec(t) < min_prec {
        format!("({s})")
    } else {
        s
    }
}

pub fn print_fun(t: &FunTerm) -> String {
    match t {
        FunTerm::Prim(PrimOp::Sin) => "sin".to_string(),
        FunTerm::Prim(PrimOp::Cos) => "cos".to_string(),
        FunTerm::Prim(PrimOp::Exp) => "exp".to_string(),
        FunTerm::Prim(PrimOp::Ln) => "ln".to_string(),
        FunTerm::Prim(PrimOp::Tanh) => "tanh".to_string(),
        FunTerm::Prim(PrimOp::Power(k)) => format!("pow {k}"),
        FunTerm::Const { value, dom } => {
            let base = format!("const {}", print_vec(value));
            if dom.equiv(&scalar()) {
                base
            } else {
                format!("{base} @ {}", print_space(dom))
            }
        }
        FunTerm::Lin(h) => format!("lin({})", print_lin(h)),
        FunTerm::Bilin(op) => print_bilin(op),
        FunTerm::Comp(g, f) => format!("{} . {}", fun_at(g, 2), fun_at(f, 1)),
        FunTerm::Par { over, items } => {
            let body = items.iter().map(print_fun).collect::<Vec<_>>().join(", ");
            match over {
                None => {
                    let doms: Option<Vec<SpaceTerm>> = items
                        .iter()
                        .map(|i| crate::funterm::infer_fun(i).ok().map(|s| s.dom))
                        .collect();
                    match doms {
                        Some(doms) => format!(
                            "par({body}) @ {}",
                            print_space(&SpaceTerm::Tuple(doms))
                        ),
                        None => format!("par({body})"),
                    }
                }
                Some(x) => {
                    let dom0 = items
                        .first()
                        .and_then(|i| crate::funterm::infer_fun(i).ok())
                        .map(|s| s.dom)
                        .unwrap_or_else(scalar);
                    format!(
                        "par({body}) @ {}",
                        print_space(&SpaceTerm::pow(x.clone(), dom0))
                    )
                }
            }
        }
        FunTerm::Pow { index, item } => format!("pow {index} ({})", print_fun(item)),
    }
}

fn print_bilin(op: &BilinOp) -> String {
    let (name, default): (&str, bool) = match op {
        BilinOp::ScalarMul { space } => ("mul", space.equiv(&scalar())),
        BilinOp::Inner { space } => ("dot", space.equiv(&scalar())),
        BilinOp::TensorProd { left, right } => {
            ("tensor", left.equiv(&scalar()) && right.equiv(&scalar()))
        }
        BilinOp::MatVec { rows, cols } => (
            "matvec",
            *rows == IndexSet::Seg(1) && *cols == IndexSet::Seg(1),
        ),
        BilinOp::Hadamard { index } => ("hadamard", *index == IndexSet::Seg(1)),
        BilinOp::Contract { left, mid, right } => (
            "contract",
            left.equiv(&scalar()) && mid.equiv(&scalar()) && right.equiv(&scalar()),
        ),
    };
    if default {
        name.to_string()
    } else {
        let (u, v) = op.arg_spaces();
        format!("{name} @ {}", print_space(&SpaceTerm::pair(u, v)))
    }
}
