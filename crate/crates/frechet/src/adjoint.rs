//! Symbolic adjoint calculus on linear terms.
//!
//! The adjoint of `f : V ⊸ W` is the unique `adj f : W ⊸ V` with
//! `⟨f v, w⟩ = ⟨v, adj f w⟩`; under orthonormal coordinates it is the
//! matrix transpose. Every constructor of [`LinTerm`] has a symbolic
//! adjoint rule, so adjoints never leave the term language — this is what
//! makes reverse-mode differentiation a term transformation rather than a
//! runtime tape.

use rand::Rng;

use crate::error::{Error, Result};
use crate::linterm::{apply, infer_types, LinTerm};
use crate::spaces::{random_vector, SpaceTerm, Vector};

/// Computes the adjoint term. Total on well-typed input; the result has the
/// reversed signature.
pub fn adjoint(f: &LinTerm) -> Result<LinTerm> {
    match f {
        LinTerm::Id(v) => Ok(LinTerm::Id(v.clone())),
        LinTerm::Zero { dom, cod } => Ok(LinTerm::zero(cod.clone(), dom.clone())),
        LinTerm::Comp(g, h) => Ok(LinTerm::comp(adjoint(h)?, adjoint(g)?)),
        LinTerm::Plus(a, b) => Ok(LinTerm::plus(adjoint(a)?, adjoint(b)?)),
        LinTerm::Scale { factor, space } => Ok(LinTerm::scale(*factor, space.clone())),
        LinTerm::ContractL { payload, passive } => Ok(LinTerm::ContractL {
            payload: payload.transpose_tensor()?,
            passive: passive.clone(),
        }),
        LinTerm::ContractR { payload, passive } => Ok(LinTerm::ContractR {
            payload: payload.transpose_tensor()?,
            passive: passive.clone(),
        }),
        LinTerm::Inj { family, at } => Ok(LinTerm::proj(family.clone(), *at)),
        LinTerm::Proj { family, at } => Ok(LinTerm::inj(family.clone(), *at)),
        LinTerm::ParMap { over, items } => Ok(LinTerm::ParMap {
            over: over.clone(),
            items: items.iter().map(adjoint).collect::<Result<_>>()?,
        }),
        LinTerm::PowMap { index, item } => Ok(LinTerm::pow_map(index.clone(), adjoint(item)?)),
        LinTerm::Fanout { items } => {
            crate::linterm::derived::fanin(items.iter().map(adjoint).collect::<Result<_>>()?)
        }
        LinTerm::Red { rel, body } => Ok(LinTerm::red(rel.transpose(), body.clone())),
        LinTerm::Unitary(u) => Ok(LinTerm::Unitary(u.inverse())),
    }
}

/// Outcome of a randomized check of `⟨f v, w⟩ = ⟨v, adj f w⟩`.
#[derive(Debug, Clone)]
pub struct AdjointReport {
    pub trials: usize,
    /// `(trial, residual)` for every trial exceeding the tolerance.
    pub failures: Vec<(usize, f64)>,
    pub max_residual: f64,
}

impl AdjointReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Runs `trials` random shape-matched pairs through the inner-product law.
/// A trial fails when `|⟨f v, w⟩ − ⟨v, adj f w⟩| > tol·(1 + |⟨f v, w⟩|)`.
pub fn check_adjoint_law<R: Rng + ?Sized>(
    f: &LinTerm,
    trials: usize,
    tol: f64,
    rng: &mut R,
) -> Result<AdjointReport> {
    let sig = infer_types(f)?;
    let adj = adjoint(f)?;
    let mut failures = Vec::new();
    let mut max_residual: f64 = 0.0;
    for trial in 0..trials {
        let v = random_vector(&sig.dom, rng);
        let w = random_vector(&sig.cod, rng);
        let lhs = apply(f, &v)?.inner(&w)?;
        let rhs = v.inner(&apply(&adj, &w)?)?;
        let residual = (lhs - rhs).abs();
        max_residual = max_residual.max(residual);
        if residual > tol * (1.0 + lhs.abs()) {
            failures.push((trial, residual));
        }
    }
    Ok(AdjointReport {
        trials,
        failures,
        max_residual,
    })
}

/// Riesz dual of a covector term: for `f : V ⊸ ℝ`, returns `adj f (1)`,
/// the unique vector `g` with `⟨g, v⟩ = f(v)`.
pub fn gradient_of_covector(f: &LinTerm) -> Result<Vector> {
    let sig = infer_types(f)?;
    if !sig.cod.equiv(&SpaceTerm::Scalar) {
        return Err(Error::ty(
            "gradient",
            format!("gradient needs a scalar codomain, got {}", sig.cod),
        ));
    }
    apply(&adjoint(f)?, &Vector::Scalar(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linterm::{derived, UnitaryOp};
    use crate::spaces::{IndexSet, Relation};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn r(n: usize) -> SpaceTerm {
        SpaceTerm::rn(n)
    }

    #[test]
    fn adjoint_of_scan_reverses_the_relation() {
        let f = derived::scan(3, &SpaceTerm::Scalar);
        let adj = adjoint(&f).unwrap();
        let out = apply(&adj, &Vector::rn([1.0, 1.0, 1.0])).unwrap();
        assert_eq!(out.to_coords().unwrap(), vec![3.0, 2.0, 1.0]);
    }

    #[test]
    fn structural_rules() {
        let fam = SpaceTerm::tuple([r(1), r(2), r(3)]);
        assert_eq!(
            adjoint(&LinTerm::inj(fam.clone(), 1)).unwrap(),
            LinTerm::proj(fam, 1)
        );
        assert_eq!(adjoint(&LinTerm::Id(r(2))).unwrap(), LinTerm::Id(r(2)));

        // Contravariance: adj(g • f) = adj f • adj g, structurally.
        let f = derived::scan(3, &SpaceTerm::Scalar);
        let g = LinTerm::red(
            Relation::all_pairs(&IndexSet::Seg(3), &IndexSet::Seg(2)),
            SpaceTerm::Scalar,
        );
        let adj = adjoint(&LinTerm::comp(g.clone(), f.clone())).unwrap();
        assert_eq!(
            adj,
            LinTerm::comp(adjoint(&f).unwrap(), adjoint(&g).unwrap())
        );
    }

    #[test]
    fn inner_product_law_holds() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let cases = [
            derived::scan(3, &SpaceTerm::Scalar),
            LinTerm::Unitary(UnitaryOp::Transpose(r(2), r(3))),
            LinTerm::zero(r(3), r(2)),
            LinTerm::fanout(vec![derived::scan(2, &SpaceTerm::Scalar), LinTerm::Id(r(2))]),
        ];
        for f in &cases {
            let report = check_adjoint_law(f, 100, 1e-10, &mut rng).unwrap();
            assert!(report.passed(), "adjoint law failed: {report:?}");
        }
    }

    #[test]
    fn gradient_of_inner_with_fixed_vector() {
        // v ↦ ⟨(2,3), v⟩ as ibra • ((2,3)⊗1 ∗) • bra — a covector term.
        let a = Vector::rn([2.0, 3.0]);
        let payload = apply(&LinTerm::Unitary(UnitaryOp::Ket(r(2))), &a).unwrap();
        let f = LinTerm::pipeline([
            LinTerm::Unitary(UnitaryOp::Bra(r(2))),
            LinTerm::contract_r(payload, SpaceTerm::Scalar),
            LinTerm::Unitary(UnitaryOp::IBra(SpaceTerm::Scalar)),
        ])
        .unwrap();
        let sig = infer_types(&f).unwrap();
        assert!(sig.cod.equiv(&SpaceTerm::Scalar));
        // sanity: f really is ⟨(2,3), ·⟩
        let probe = apply(&f, &Vector::rn([1.0, 1.0])).unwrap();
        assert_eq!(probe.to_coords().unwrap(), vec![5.0]);

        let grad = gradient_of_covector(&f).unwrap();
        assert!(grad.approx_eq(&a, 1e-12));
    }

    #[test]
    fn gradient_of_zero_and_scale() {
        let z = LinTerm::zero(r(2), SpaceTerm::Scalar);
        assert!(gradient_of_covector(&z)
            .unwrap()
            .approx_eq(&Vector::zero(&r(2)), 0.0));

        let s = LinTerm::scale(5.0, SpaceTerm::Scalar);
        assert_eq!(
            gradient_of_covector(&s).unwrap().to_coords().unwrap(),
            vec![5.0]
        );

        let not_scalar = LinTerm::Id(r(2));
        assert!(matches!(
            gradient_of_covector(&not_scalar),
            Err(Error::Type { .. })
        ));
    }
}
