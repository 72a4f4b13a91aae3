//! The independent verification layer: dense matrices, finite differences,
//! and exact multiplication counts.
//!
//! Nothing in here feeds back into evaluation or differentiation; matrices
//! exist only to check the symbolic machinery against ground truth.

use crate::error::{Error, Result};
use crate::funterm::{eval_fun, infer_fun, BilinOp, FunTerm};
use crate::linterm::{apply, infer_types, LinTerm};
use crate::spaces::{basis, IndexSet, SpaceTerm, Vector};

/// Default central-difference step.
pub const DEFAULT_FD_STEP: f64 = 1e-4;

/// A dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Matrix {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Matrix> {
        let r = rows.len();
        let c = rows.first().map(Vec::len).unwrap_or(0);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::dim("ragged rows"));
        }
        Ok(Matrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn entries(&self) -> &[f64] {
        &self.data
    }

    pub fn transpose(&self) -> Matrix {
        let mut out = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j));
            }
        }
        out
    }

    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.cols {
            return Err(Error::dim(format!(
                "matrix has {} columns, vector has {} entries",
                self.cols,
                x.len()
            )));
        }
        Ok((0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get(i, j) * x[j]).sum())
            .collect())
    }

    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, other: &Matrix, tol: f64) -> bool {
        (self.rows, self.cols) == (other.rows, other.cols) && self.max_abs_diff(other) <= tol
    }

    /// Largest entrywise error of `other` against `self`, where each entry
    /// is measured as `|a − b| / (atol + rtol·|a|)` and 1.0 is the pass
    /// boundary. Values below 1 mean all entries are inside the tolerance.
    pub fn max_relative_error(&self, other: &Matrix, rtol: f64, atol: f64) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs() / (atol + rtol * a.abs()))
            .fold(0.0, f64::max)
    }
}

impl std::fmt::Display for Matrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for i in 0..self.rows {
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{:>12.6}", self.get(i, j))?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Lowers a linear term to its dense matrix: column `j` is the image of
/// the `j`-th domain basis vector in coordinates.
pub fn lower_matrix(f: &LinTerm) -> Result<Matrix> {
    let sig = infer_types(f)?;
    let (rows, cols) = (sig.cod.dim(), sig.dom.dim());
    let mut out = Matrix::zeros(rows, cols);
    for j in 0..cols {
        let col = apply(f, &basis(&sig.dom, j)?)?.to_coords()?;
        for (i, entry) in col.iter().enumerate() {
            out.set(i, j, *entry);
        }
    }
    Ok(out)
}

/// Central-difference Jacobian of a function term at `v`.
pub fn fd_jacobian(t: &FunTerm, v: &Vector, h: f64) -> Result<Matrix> {
    let sig = infer_fun(t)?;
    if !v.matches(&sig.dom) {
        return Err(Error::shape("finite differences: point does not match domain"));
    }
    let coords = v.to_coords()?;
    let (rows, cols) = (sig.cod.dim(), sig.dom.dim());
    let mut out = Matrix::zeros(rows, cols);
    for j in 0..cols {
        let mut plus = coords.clone();
        plus[j] += h;
        let mut minus = coords.clone();
        minus[j] -= h;
        let fp = eval_fun(t, &Vector::from_coords(&sig.dom, &plus)?)?.to_coords()?;
        let fm = eval_fun(t, &Vector::from_coords(&sig.dom, &minus)?)?.to_coords()?;
        for i in 0..rows {
            out.set(i, j, (fp[i] - fm[i]) / (2.0 * h));
        }
    }
    Ok(out)
}

/// Counter for scalar multiplications inside one instrumented evaluation.
/// Confined to a single call; concurrent evaluations use separate counters.
#[derive(Debug, Default)]
pub struct CostCounter {
    mults: usize,
}

impl CostCounter {
    pub fn new() -> CostCounter {
        CostCounter::default()
    }

    pub fn add(&mut self, n: usize) {
        self.mults += n;
    }

    pub fn total(&self) -> usize {
        self.mults
    }
}

/// Runs an instrumented action with a fresh counter and returns the number
/// of real·real multiplications it performed.
pub fn count_mults(action: impl FnOnce(&mut CostCounter) -> Result<()>) -> Result<usize> {
    let mut counter = CostCounter::new();
    action(&mut counter)?;
    Ok(counter.total())
}

/// Inner product of two scalar copowers, counting one multiplication per
/// coordinate pair (additions are free; zero entries are not skipped).
pub fn counted_inner(a: &Vector, b: &Vector, counter: &mut CostCounter) -> Result<f64> {
    let ac = a.to_coords()?;
    let bc = b.to_coords()?;
    if ac.len() != bc.len() {
        return Err(Error::dim("counted inner product on different dims"));
    }
    counter.add(ac.len());
    Ok(ac.iter().zip(&bc).map(|(x, y)| x * y).sum())
}

/// Builds the derivative of `x ↦ b·sin(a⊙x)` at `x0` in decomposed form.
///
/// Costs exactly `n` multiplications: the inner product `a⊙x0`. The cosine
/// evaluation is not a multiplication, and the scale by `c = cos(a⊙x0)`
/// is deferred — it is stored as the coefficient of the single tensor term
/// `c·(b⊗a)`, to be folded in when the derivative is applied.
pub fn rank_one_derivative_counted(
    a: &Vector,
    b: &Vector,
    x0: &Vector,
    counter: &mut CostCounter,
) -> Result<(Vector, LinTerm)> {
    let c = counted_inner(a, x0, counter)?.cos();
    let payload = Vector::pure_tensor(b.clone(), a.clone())?.scale(c);
    let (m, n) = (payload_rows(b)?, payload_rows(a)?);
    let section = BilinOp::MatVec {
        rows: IndexSet::Seg(m),
        cols: IndexSet::Seg(n),
    }
    .section_left(&payload)?;
    Ok((payload, section))
}

fn payload_rows(v: &Vector) -> Result<usize> {
    match v.shape()? {
        SpaceTerm::Pow(x, _) => Ok(x.card()),
        s => Err(Error::shape(format!("expected a scalar copower, got {s}"))),
    }
}

/// Applies a decomposed derivative `Σᵢ cᵢ·(bᵢ⊗aᵢ)` to `dx`, keeping every
/// output term as a lazily scaled vector `dᵢ·bᵢ` with `dᵢ = cᵢ·(aᵢ⊙dx)`.
///
/// Costs `n` multiplications for each inner product plus one for folding
/// the stored coefficient: `n+1` per rank-1 term. The scaled result is
/// returned as `(dᵢ, bᵢ)` pairs — producing the term, not a dense vector.
pub fn apply_decomposed_counted(
    payload: &Vector,
    dx: &Vector,
    counter: &mut CostCounter,
) -> Result<Vec<(f64, Vector)>> {
    let mut out = Vec::new();
    for t in payload.tensor_terms()? {
        let s = counted_inner(&t.right, dx, counter)?;
        counter.add(1);
        out.push((t.coeff * s, t.left.clone()));
    }
    Ok(out)
}

/// Expands lazily scaled terms into a dense vector (not an instrumented
/// action; used to compare against the dense route).
pub fn materialize_scaled(terms: &[(f64, Vector)], space: &SpaceTerm) -> Result<Vector> {
    let mut acc = Vector::zero(space);
    for (k, v) in terms {
        acc = acc.add(&v.scale(*k))?;
    }
    Ok(acc)
}

/// Dense matrix–vector product counting one multiplication per entry;
/// zero coefficients are not skipped.
pub fn apply_dense_counted(
    m: &Matrix,
    dx: &[f64],
    counter: &mut CostCounter,
) -> Result<Vec<f64>> {
    counter.add(m.rows * m.cols);
    m.matvec(dx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adjoint::adjoint;
    use crate::diff::affine;
    use crate::funterm::PrimOp;
    use crate::gallery;
    use crate::linterm::{derived, term_size};

    #[test]
    fn lower_identity_is_the_identity_matrix() {
        let m = lower_matrix(&LinTerm::Id(SpaceTerm::rn(2))).unwrap();
        assert_eq!(m.entries(), &[1.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn lower_scan_is_lower_triangular_ones() {
        let m = lower_matrix(&derived::scan(3, &SpaceTerm::Scalar)).unwrap();
        let expect = Matrix::from_rows(vec![
            vec![1.0, 0.0, 0.0],
            vec![1.0, 1.0, 0.0],
            vec![1.0, 1.0, 1.0],
        ])
        .unwrap();
        assert!(m.approx_eq(&expect, 0.0));
    }

    #[test]
    fn lower_scale_on_scalars() {
        let m = lower_matrix(&LinTerm::scale(2.0, SpaceTerm::Scalar)).unwrap();
        assert_eq!(m.entries(), &[2.0]);
    }

    #[test]
    fn lowering_commutes_with_application() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(37);
        let f = derived::fanin(vec![
            derived::scan(2, &SpaceTerm::Scalar),
            LinTerm::Id(SpaceTerm::rn(2)),
        ])
        .unwrap();
        let sig = infer_types(&f).unwrap();
        let m = lower_matrix(&f).unwrap();
        for _ in 0..10 {
            let v = crate::spaces::random_vector(&sig.dom, &mut rng);
            let via_matrix = m.matvec(&v.to_coords().unwrap()).unwrap();
            let direct = apply(&f, &v).unwrap().to_coords().unwrap();
            for (a, b) in via_matrix.iter().zip(&direct) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn fd_of_sine_at_zero_is_one() {
        let m = fd_jacobian(&FunTerm::Prim(PrimOp::Sin), &Vector::Scalar(0.0), 1e-4).unwrap();
        assert!((m.get(0, 0) - 1.0).abs() < 1e-8);
    }

    #[test]
    fn fd_matches_closed_form_on_the_two_variable_example() {
        let t = gallery::two_variable();
        let v = Vector::tuple([Vector::Scalar(2.0), Vector::Scalar(5.0)]);
        let m = fd_jacobian(&t, &v, 1e-4).unwrap();
        assert!((m.get(0, 0) - 5.5).abs() < 1e-6);
        assert!((m.get(0, 1) - (2.0 - 5.0_f64.cos())).abs() < 1e-6);
    }

    #[test]
    fn linear_maps_are_their_own_fd_jacobians() {
        let h = derived::scan(3, &SpaceTerm::Scalar);
        let t = FunTerm::Lin(h.clone());
        let fd = fd_jacobian(&t, &Vector::rn([0.3, -0.2, 0.9]), 1e-4).unwrap();
        let exact = lower_matrix(&h).unwrap();
        assert!(fd.approx_eq(&exact, 1e-8));
    }

    #[test]
    fn fd_agrees_with_the_symbolic_derivative() {
        let t = gallery::smooth_pair_block();
        let v = Vector::tuple([Vector::Scalar(0.4), Vector::Scalar(-0.3)]);
        let sym = lower_matrix(&affine(&t, &v).unwrap().deriv).unwrap();
        let fd = fd_jacobian(&t, &v, 1e-4).unwrap();
        assert!(sym.max_relative_error(&fd, 1e-5, 1e-8) < 1.0);
    }

    #[test]
    fn transpose_law_spot_check() {
        let f = derived::scan(4, &SpaceTerm::Scalar);
        let lhs = lower_matrix(&adjoint(&f).unwrap()).unwrap();
        let rhs = lower_matrix(&f).unwrap().transpose();
        assert!(lhs.approx_eq(&rhs, 1e-12));
    }

    fn griewank_setup(n: usize, m: usize) -> (Vector, Vector, Vector) {
        let a = Vector::rn((1..=n).map(|i| i as f64 / n as f64));
        let b = Vector::rn((1..=m).map(|i| 1.0 + i as f64));
        let x0 = Vector::rn((1..=n).map(|i| 0.1 * i as f64));
        (a, b, x0)
    }

    #[test]
    fn rank_one_build_costs_n_mults() {
        let (a, b, x0) = griewank_setup(5, 7);
        let mut counter = CostCounter::new();
        let _ = rank_one_derivative_counted(&a, &b, &x0, &mut counter).unwrap();
        assert_eq!(counter.total(), 5);
    }

    #[test]
    fn decomposed_apply_costs_n_plus_one_and_dense_costs_m_times_n() {
        let (a, b, x0) = griewank_setup(5, 7);
        let mut counter = CostCounter::new();
        let (payload, section) = rank_one_derivative_counted(&a, &b, &x0, &mut counter).unwrap();

        let dx = Vector::rn([0.5, -1.0, 2.0, 0.0, 1.5]);
        let decomposed = count_mults(|c| {
            apply_decomposed_counted(&payload, &dx, c)?;
            Ok(())
        })
        .unwrap();
        assert_eq!(decomposed, 6);

        let dense = lower_matrix(&section).unwrap();
        let dense_count = count_mults(|c| {
            apply_dense_counted(&dense, &dx.to_coords().unwrap(), c)?;
            Ok(())
        })
        .unwrap();
        assert_eq!(dense_count, 35);

        // Same answer both ways.
        let mut scratch = CostCounter::new();
        let terms = apply_decomposed_counted(&payload, &dx, &mut scratch).unwrap();
        let lazy = materialize_scaled(&terms, &SpaceTerm::rn(7)).unwrap();
        let via_dense = dense.matvec(&dx.to_coords().unwrap()).unwrap();
        for (x, y) in lazy.to_coords().unwrap().iter().zip(&via_dense) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn decomposed_term_size_is_independent_of_output_dim() {
        let (a, b7, x0) = griewank_setup(5, 7);
        let (_, b14, _) = griewank_setup(5, 14);
        let mut c1 = CostCounter::new();
        let mut c2 = CostCounter::new();
        let (_, small) = rank_one_derivative_counted(&a, &b7, &x0, &mut c1).unwrap();
        let (_, large) = rank_one_derivative_counted(&a, &b14, &x0, &mut c2).unwrap();
        assert_eq!(term_size(&small), term_size(&large));
    }
}
