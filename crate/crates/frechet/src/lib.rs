//! Combinatory differentiation on constructible Hilbert spaces.
//!
//! This crate represents analytic functions in point-free (combinatory)
//! form, computes their Fréchet derivatives as symbolic linear-function
//! terms, and computes adjoints of those terms symbolically — which is
//! reverse-mode automatic differentiation. Everything is verified against
//! dense-matrix and finite-difference oracles.
//!
//! The layers, bottom to top:
//!
//! * [`spaces`] — finite index sets, space shapes (direct sums, copowers,
//!   tensor products) and concrete vector values. Tensor values are formal
//!   sums of scaled pure tensors, so rank-1 data stays rank-1.
//! * [`linterm`] — the symbolic language of linear functions: contraction
//!   sections, relational reduction, injections/projections, parallel maps
//!   and the natural unitary operators, with a type checker and evaluator.
//! * [`adjoint`] — the symbolic adjoint calculus on linear terms.
//! * [`funterm`] — the combinatory language of analytic functions
//!   (constants, scalar primitives, linear and bilinear atoms, sequential
//!   and parallel composition) and its evaluator.
//! * [`diff`] — affine interpretation: evaluating a function term yields
//!   its value *and* a symbolic derivative (forward) or adjoint derivative
//!   (reverse); gradients, JVPs and VJPs sit on top.
//! * [`simplify`] — semantics-preserving rewriting of linear terms.
//! * [`oracle`] — dense lowering, finite-difference Jacobians and exact
//!   multiplication counting; the independent verification layer.
//! * [`nn`] — a k-layer neural network built entirely in the function
//!   language, with gradients (backpropagation) obtained from the adjoint
//!   interpreter, plus a small gradient-descent training loop.
//! * [`cli`] — the textual DSL (parser, printer, elaborator) and command
//!   dispatch behind the `frechet` binary.
//!
//! See the crate examples for runnable tours of each capability, e.g.
//! `cargo run --example gradients` or `cargo run --example rank_one_jacobians`.

pub mod adjoint;
pub mod cli;
pub mod diff;
pub mod error;
pub mod funterm;
pub mod gallery;
pub mod linterm;
pub mod nn;
pub mod oracle;
pub mod simplify;
pub mod spaces;

pub use error::{Error, Result};
