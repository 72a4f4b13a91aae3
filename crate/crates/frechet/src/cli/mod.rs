//! The textual DSL and the `frechet` command-line interface.
//!
//! Commands that evaluate a term (`eval`, `diff`, `grad`, `jvp`, `vjp`,
//! `check`) elaborate it against the shape of the `--at` vector, so bare
//! forms like `proj 1` pick up their spaces from the input. `adjoint`,
//! `simplify` and `lower` elaborate with scalar defaults; `@ dom [-> cod]`
//! ascriptions select other spaces.
//!
//! Exit codes: 0 on success, 1 on domain/type/shape errors, 2 on parse
//! errors. `--json` switches every command to a stable machine-readable
//! schema. `FRETCHET_FD_H` overrides the finite-difference step and
//! `FRETCHET_TOL` the relative tolerance used by `check`.

mod elab;
mod parse;
mod print;

use std::path::PathBuf;

use clap::{Parser as ClapParser, Subcommand};
use serde_json::json;

use crate::adjoint;
use crate::diff;
use crate::error::{Error, Result};
use crate::funterm::{eval_fun, FunTerm};
use crate::linterm::{term_size, LinTerm};
use crate::nn;
use crate::oracle::{self, CostCounter, Matrix};
use crate::simplify;
use crate::spaces::{SpaceTerm, Vector};

pub use print::{print_fun, print_lin, print_space, print_vec};

/// Parses a vector literal.
pub fn parse_vec(src: &str) -> Result<Vector> {
    elab::elab_vec(&parse::parse_vec_surface(src)?)
}

/// Parses a linear term, elaborating against an optional expected domain.
pub fn parse_lin_at(src: &str, dom: Option<&SpaceTerm>) -> Result<LinTerm> {
    elab::elab_lin(&parse::parse_lin_surface(src)?, dom, None)
}

/// Parses a linear term with scalar defaults.
pub fn parse_lin(src: &str) -> Result<LinTerm> {
    parse_lin_at(src, None)
}

/// Parses a function term, elaborating against an optional expected domain.
pub fn parse_fun_at(src: &str, dom: Option<&SpaceTerm>) -> Result<FunTerm> {
    elab::elab_fun(&parse::parse_fun_surface(src)?, dom)
}

/// Parses a function term with scalar defaults.
pub fn parse_fun(src: &str) -> Result<FunTerm> {
    parse_fun_at(src, None)
}

/// Parses a space literal.
pub fn parse_space(src: &str) -> Result<SpaceTerm> {
    Ok(elab::elab_space(&parse::parse_space_surface(src)?))
}

#[derive(ClapParser)]
#[command(
    name = "frechet",
    about = "Combinatory differentiation: symbolic derivatives and adjoints",
    version
)]
pub struct Cli {
    /// Emit machine-readable JSON on stdout.
    #[arg(long, global = true)]
    pub json: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Evaluate a function term at a point.
    Eval {
        /// Input vector, e.g. "(2, 5)".
        #[arg(long)]
        at: String,
        /// Function term, e.g. "ln . proj 1 + (proj 1 * proj 2)".
        term: String,
    },
    /// Evaluate and return the symbolic derivative at a point.
    Diff {
        #[arg(long)]
        at: String,
        term: String,
    },
    /// Gradient of a scalar-valued term at a point.
    Grad {
        #[arg(long)]
        at: String,
        term: String,
    },
    /// Apply the derivative at a point to a tangent vector.
    Jvp {
        #[arg(long)]
        at: String,
        #[arg(long)]
        tangent: String,
        term: String,
    },
    /// Apply the adjoint derivative at a point to a cotangent vector.
    Vjp {
        #[arg(long)]
        at: String,
        #[arg(long)]
        cotangent: String,
        term: String,
    },
    /// Symbolic adjoint of a linear term.
    Adjoint { term: String },
    /// Rewrite a linear term with the algebraic rule set.
    Simplify { term: String },
    /// Lower a linear term to its dense matrix.
    Lower {
        term: String,
        /// Print bare CSV rows instead of an aligned matrix.
        #[arg(long)]
        csv: bool,
    },
    /// Compare the symbolic derivative against central finite differences.
    Check {
        #[arg(long)]
        at: String,
        term: String,
    },
    /// Exact multiplication counts.
    Cost {
        #[command(subcommand)]
        action: CostAction,
    },
    /// Neural-network commands.
    Nn {
        #[command(subcommand)]
        action: NnAction,
    },
}

#[derive(Subcommand)]
pub enum CostAction {
    /// Counts for the rank-1 derivative of x ↦ b·sin(a⊙x):
    /// building the decomposed term, applying it, and the dense apply.
    Griewank {
        /// Output dimension.
        #[arg(long, default_value_t = 7)]
        m: usize,
        /// Input dimension.
        #[arg(long, default_value_t = 5)]
        n: usize,
    },
}

#[derive(Subcommand)]
pub enum NnAction {
    /// Train a fully connected tanh network by gradient descent and emit
    /// the per-step mean loss as CSV.
    Train {
        /// Layer widths, e.g. "2,4,1".
        #[arg(long)]
        dims: String,
        #[arg(long, default_value_t = 0.1)]
        lr: f64,
        #[arg(long, default_value_t = 200)]
        steps: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// CSV dataset: first m₀ columns inputs, last m_k columns targets.
        #[arg(long)]
        data: PathBuf,
    },
}

fn fd_step() -> f64 {
    std::env::var("FRETCHET_FD_H")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(oracle::DEFAULT_FD_STEP)
}

fn check_tolerance() -> f64 {
    std::env::var("FRETCHET_TOL")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(1e-5)
}

fn matrix_json(m: &Matrix) -> serde_json::Value {
    let rows: Vec<Vec<f64>> = (0..m.rows)
        .map(|i| (0..m.cols).map(|j| m.get(i, j)).collect())
        .collect();
    json!(rows)
}

fn matrix_csv(m: &Matrix) -> String {
    (0..m.rows)
        .map(|i| {
            (0..m.cols)
                .map(|j| format!("{}", m.get(i, j)))
                .collect::<Vec<_>>()
                .join(",")
        })
        .collect::<Vec<_>>()
        .join("\n")
}

/// Runs one command, printing its output; the boolean selects JSON.
pub fn run(command: &Command, json_mode: bool) -> Result<()> {
    match command {
        Command::Eval { at, term } => {
            let v = parse_vec(at)?;
            let t = parse_fun_at(term, Some(&v.shape()?))?;
            let out = eval_fun(&t, &v)?;
            if json_mode {
                println!(
                    "{}",
                    json!({
                        "command": "eval",
                        "inputs": {"at": at, "term": term},
                        "value": print_vec(&out),
                    })
                );
            } else {
                println!("{}", print_vec(&out));
            }
        }
        Command::Diff { at, term } => {
            let v = parse_vec(at)?;
            let t = parse_fun_at(term, Some(&v.shape()?))?;
            let r = diff::affine(&t, &v)?;
            let m = oracle::lower_matrix(&r.deriv)?;
            if json_mode {
                println!(
                    "{}",
                    json!({
                        "command": "diff",
                        "inputs": {"at": at, "term": term},
                        "value": print_vec(&r.value),
                        "term": print_lin(&r.deriv),
                        "matrix": matrix_json(&m),
                    })
                );
            } else {
                println!("value: {}", print_vec(&r.value));
                println!("deriv: {}", print_lin(&r.deriv));
                print!("matrix:\n{m}");
            }
        }
        Command::Grad { at, term } => {
            let v = parse_vec(at)?;
            let t = parse_fun_at(term, Some(&v.shape()?))?;
            let g = diff::gradient(&t, &v)?;
            if json_mode {
                println!(
                    "{}",
                    json!({
                        "command": "grad",
                        "inputs": {"at": at, "term": term},
                        "value": print_vec(&g),
                    })
                );
            } else {
                println!("{}", print_vec(&g));
            }
        }
        Command::Jvp { at, tangent, term } => {
            let v = parse_vec(at)?;
            let dv = parse_vec(tangent)?;
            let t = parse_fun_at(term, Some(&v.shape()?))?;
            let out = diff::jvp(&t, &v, &dv)?;
            if json_mode {
                println!(
                    "{}",
                    json!({
                        "command": "jvp",
                        "inputs": {"at": at, "tangent": tangent, "term": term},
                        "value": print_vec(&out),
                    })
                );
            } else {
                println!("{}", print_vec(&out));
            }
        }
        Command::Vjp {
            at,
            cotangent,
            term,
        } => {
            let v = parse_vec(at)?;
            let dy = parse_vec(cotangent)?;
            let t = parse_fun_at(term, Some(&v.shape()?))?;
            let out = diff::vjp(&t, &v, &dy)?;
            if json_mode {
                println!(
                    "{}",
                    json!({
                        "command": "vjp",
                        "inputs": {"at": at, "cotangent": cotangent, "term": term},
                        "value": print_vec(&out),
                    })
                );
            } else {
                println!("{}", print_vec(&out));
            }
        }
        Command::Adjoint { term } => {
            let t = parse_lin(term)?;
            let adj = adjoint::adjoint(&t)?;
            if json_mode {
                println!(
                    "{}",
                    json!({
                        "command": "adjoint",
                        "inputs": {"term": term},
                        "term": print_lin(&adj),
                    })
                );
            } else {
                println!("{}", print_lin(&adj));
            }
        }
        Command::Simplify { term } => {
            let t = parse_lin(term)?;
            let s = simplify::simplify(&t)?;
            if json_mode {
                println!(
                    "{}",
                    json!({
                        "command": "simplify",
                        "inputs": {"term": term},
                        "term": print_lin(&s),
                        "report": {
                            "before_size": term_size(&t),
                            "after_size": term_size(&s),
                        },
                    })
                );
            } else {
                println!("before (size {:>3}): {}", term_size(&t), print_lin(&t));
                println!("after  (size {:>3}): {}", term_size(&s), print_lin(&s));
            }
        }
        Command::Lower { term, csv } => {
            let t = parse_lin(term)?;
            let m = oracle::lower_matrix(&t)?;
            if json_mode {
                println!(
                    "{}",
                    json!({
                        "command": "lower",
                        "inputs": {"term": term},
                        "matrix": matrix_json(&m),
                    })
                );
            } else if *csv {
                println!("{}", matrix_csv(&m));
            } else {
                print!("{m}");
            }
        }
        Command::Check { at, term } => {
            let v = parse_vec(at)?;
            let t = parse_fun_at(term, Some(&v.shape()?))?;
            let h = fd_step();
            let rtol = check_tolerance();
            let sym = oracle::lower_matrix(&diff::affine(&t, &v)?.deriv)?;
            let fd = oracle::fd_jacobian(&t, &v, h)?;
            let worst = sym.max_relative_error(&fd, rtol, 1e-8);
            let pass = worst < 1.0;
            if json_mode {
                println!(
                    "{}",
                    json!({
                        "command": "check",
                        "inputs": {"at": at, "term": term},
                        "report": {
                            "h": h,
                            "rtol": rtol,
                            "worst_entry_ratio": worst,
                            "pass": pass,
                        },
                    })
                );
            } else {
                println!("symbolic:\n{sym}");
                println!("finite differences (h = {h}):\n{fd}");
                println!(
                    "worst entry at {worst:.3}x tolerance (rtol {rtol}): {}",
                    if pass { "PASS" } else { "FAIL" }
                );
            }
        }
        Command::Cost { action } => {
            let CostAction::Griewank { m, n } = action;
            let a = Vector::rn((1..=*n).map(|i| i as f64 / *n as f64));
            let b = Vector::rn((1..=*m).map(|i| 1.0 + i as f64));
            let x0 = Vector::rn((1..=*n).map(|i| 0.1 * i as f64));
            let dx = Vector::rn((1..=*n).map(|i| 0.3 * i as f64 - 0.2));

            let mut build_counter = CostCounter::new();
            let (payload, section) =
                oracle::rank_one_derivative_counted(&a, &b, &x0, &mut build_counter)?;
            let build = build_counter.total();

            let decomposed_apply = oracle::count_mults(|c| {
                oracle::apply_decomposed_counted(&payload, &dx, c)?;
                Ok(())
            })?;

            let dense = oracle::lower_matrix(&section)?;
            let dense_apply = oracle::count_mults(|c| {
                oracle::apply_dense_counted(&dense, &dx.to_coords()?, c)?;
                Ok(())
            })?;

            if json_mode {
                println!(
                    "{}",
                    json!({
                        "command": "cost",
                        "inputs": {"m": m, "n": n},
                        "report": {
                            "build": build,
                            "decomposed_apply": decomposed_apply,
                            "dense_apply": dense_apply,
                            "decomposed_term_size": term_size(&section),
                        },
                    })
                );
            } else {
                println!("dense_apply:      {dense_apply}");
                println!("decomposed_apply: {decomposed_apply}");
                println!("build:            {build}");
                println!(
                    "term size of the decomposed derivative: {}",
                    term_size(&section)
                );
            }
        }
        Command::Nn { action } => {
            let NnAction::Train {
                dims,
                lr,
                steps,
                seed,
                data,
            } = action;
            let widths: Vec<usize> = dims
                .split(',')
                .map(|d| d.trim().parse::<usize>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::dim(format!("bad --dims: {e}")))?;
            let spec = nn::NetworkSpec::new(widths.clone())?;
            let text = std::fs::read_to_string(data)
                .map_err(|e| Error::dim(format!("cannot read {}: {e}", data.display())))?;
            let dataset = nn::load_dataset(&text, widths[0], *widths.last().unwrap())?;
            let result = nn::train(&spec, &dataset, *lr, *steps, *seed)?;
            if json_mode {
                println!(
                    "{}",
                    json!({
                        "command": "nn-train",
                        "inputs": {
                            "dims": dims, "lr": lr, "steps": steps, "seed": seed,
                            "data": data.display().to_string(),
                        },
                        "report": {
                            "initial_loss": result.trace.first(),
                            "final_loss": result.trace.last(),
                            "trace": result.trace,
                        },
                    })
                );
            } else {
                println!("step,mean_loss");
                for (i, loss) in result.trace.iter().enumerate() {
                    println!("{i},{loss}");
                }
            }
        }
    }
    Ok(())
}

/// Entry point used by the binary; returns the process exit code.
pub fn main_entry() -> i32 {
    let cli = Cli::parse();
    match run(&cli.command, cli.json) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Parse { .. } => 2,
                _ => 1,
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funterm::PrimOp;

    #[test]
    fn parses_the_basic_forms() {
        let f = parse_fun("ln . sin").unwrap();
        assert_eq!(
            f,
            FunTerm::comp(FunTerm::Prim(PrimOp::Ln), FunTerm::Prim(PrimOp::Sin))
        );

        let r = parse_lin("red {(1,1),(2,1),(3,1)}").unwrap();
        match &r {
            LinTerm::Red { rel, .. } => {
                assert_eq!(rel.domain().card(), 3);
                assert_eq!(rel.codomain().card(), 1);
            }
            other => panic!("unexpected term: {other:?}"),
        }

        let v = parse_vec("tensor{ 1 * (1,0) (x) (0,1) }").unwrap();
        match &v {
            Vector::Tensor { terms, .. } => assert_eq!(terms.len(), 1),
            other => panic!("unexpected vector: {other:?}"),
        }
    }

    #[test]
    fn adjoint_of_inj_prints_as_proj() {
        let t = parse_lin("inj 1").unwrap();
        let adj = adjoint::adjoint(&t).unwrap();
        assert_eq!(print_lin(&adj), "proj 1");
    }

    #[test]
    fn two_variable_gradient_through_the_dsl() {
        let v = parse_vec("(2, 5)").unwrap();
        let t = parse_fun_at(
            "ln . proj 1 + (proj 1 * proj 2) - sin . proj 2",
            Some(&v.shape().unwrap()),
        )
        .unwrap();
        let g = diff::gradient(&t, &v).unwrap();
        let expect = crate::gallery::two_variable_gradient(2.0, 5.0);
        assert!(g.approx_eq(&expect, 1e-10));
    }

    #[test]
    fn elaboration_uses_the_input_shape() {
        let v = parse_vec("[1, 2, 3]").unwrap();
        let t = parse_fun_at("sum 3", Some(&v.shape().unwrap())).unwrap();
        let out = eval_fun(&t, &v).unwrap();
        assert_eq!(out.to_coords().unwrap(), vec![6.0]);
    }

    #[test]
    fn print_parse_round_trips() {
        // Terms that need a consistent pair domain are elaborated the way
        // the commands do it: against the shape of an input vector. Their
        // printed form must still reparse with no hints at all.
        let pair = parse_vec("(2, 5)").unwrap().shape().unwrap();
        let hinted = parse_fun_at(
            "ln . proj 1 + (proj 1 * proj 2) - sin . proj 2",
            Some(&pair),
        )
        .unwrap();
        let printed = print_fun(&hinted);
        let back = parse_fun(&printed).unwrap_or_else(|e| panic!("reparse {printed}: {e}"));
        assert_eq!(back, hinted, "round trip failed for the hinted example");

        let sources = [
            "ln . sin",
            "pow 3 (sin)",
            "pow -2",
            "par(sin, cos, exp)",
            "const (1, 2) @ R",
            "lin(red {(1,1),(1,2),(2,2)})",
            "lin(2 *. @ [3]R)",
            "lin(fanout(proj 2, proj 1))",
            "lin(contractL tensor{ 2 * (1,0) (x) (0,1) })",
            "lin(bra @ [2]R . iket @ [2]R (x) R)",
            "lin(sum 2) . lin(dup @ R . 3 *.) . tanh",
        ];
        for src in sources {
            let t = parse_fun(src).unwrap_or_else(|e| panic!("parse {src}: {e}"));
            let printed = print_fun(&t);
            let back =
                parse_fun(&printed).unwrap_or_else(|e| panic!("reparse of {printed:?}: {e}"));
            assert_eq!(back, t, "round trip failed for {src} -> {printed}");
        }

        let lin_sources = [
            "id",
            "zero @ [2]R -> R",
            "proj 2",
            "inj 1 @ (R, [2]R)",
            "red {(1,1),(2,1)}",
            "scan 4",
            "dup @ [2]R",
            "par(1 *., 2 *.) @ [2]R",
            "ttranspose @ [2]R (x) [3]R",
            "contractR tensor{ 1 * (2,) (x) 3 } @ R (x) [1]R",
        ];
        for src in lin_sources {
            let t = parse_lin(src).unwrap_or_else(|e| panic!("parse {src}: {e}"));
            let printed = print_lin(&t);
            let back =
                parse_lin(&printed).unwrap_or_else(|e| panic!("reparse of {printed:?}: {e}"));
            assert_eq!(back, t, "round trip failed for {src} -> {printed}");
        }

        let vec_sources = [
            "3.5",
            "(1, 2, 3)",
            "[1, 2]",
            "((1, 2), [3, 4], 5)",
            "tensor{ 1 * (1,0) (x) (0,1), -2.5 * (0,1) (x) (1,0) }",
            "(7,)",
        ];
        for src in vec_sources {
            let v = parse_vec(src).unwrap_or_else(|e| panic!("parse {src}: {e}"));
            let printed = print_vec(&v);
            let back =
                parse_vec(&printed).unwrap_or_else(|e| panic!("reparse of {printed:?}: {e}"));
            assert_eq!(back, v, "round trip failed for {src} -> {printed}");
        }
    }

    #[test]
    fn parse_errors_report_positions() {
        let err = parse_fun("ln .. sin").unwrap_err();
        assert!(matches!(err, Error::Parse { .. }));
    }
}
