//! Semantics-preserving rewriting of linear terms.
//!
//! The rule set is conservative: every rule is verified against the dense
//! oracle by [`rule_soundness_suite`], and rules whose general form would
//! change semantics carry guards (relational fusion only fires when the
//! composed relation is multiplicity-free, since a pair set cannot count
//! paths). Rewriting is leftmost-innermost to a fixpoint under a step
//! budget of `10·term_size`, and the result is kept only if it did not
//! grow, so `simplify` is size-non-increasing and idempotent.

use rand::{Rng, RngCore};

use crate::error::Result;
use crate::linterm::{infer_types, term_size, LinTerm, UnitaryOp};
use crate::oracle::lower_matrix;
use crate::spaces::{random_vector, IndexSet, IndexValue, Relation, SpaceTerm};

/// A named rewrite rule: a structural matcher/builder plus a generator of
/// random instances containing a matching redex, used by the soundness
/// suite.
pub struct RewriteRule {
    pub name: &'static str,
    pub soundness: &'static str,
    rewrite: fn(&LinTerm) -> Option<LinTerm>,
    sample: fn(&mut dyn RngCore) -> LinTerm,
}

impl RewriteRule {
    /// Applies the rule at the root of `t`, if it matches.
    pub fn apply_at_root(&self, t: &LinTerm) -> Option<LinTerm> {
        (self.rewrite)(t)
    }

    /// A random term with a redex for this rule (usually at the root).
    pub fn sample_instance(&self, rng: &mut dyn RngCore) -> LinTerm {
        (self.sample)(rng)
    }
}

fn is_zero(t: &LinTerm) -> bool {
    matches!(t, LinTerm::Zero { .. })
}

fn rw_comp_id(t: &LinTerm) -> Option<LinTerm> {
    let LinTerm::Comp(g, f) = t else { return None };
    if matches!(**g, LinTerm::Id(_)) {
        return Some((**f).clone());
    }
    if matches!(**f, LinTerm::Id(_)) {
        return Some((**g).clone());
    }
    None
}

fn rw_comp_zero(t: &LinTerm) -> Option<LinTerm> {
    let LinTerm::Comp(g, f) = t else { return None };
    if !is_zero(g) && !is_zero(f) {
        return None;
    }
    let sig = infer_types(t).ok()?;
    Some(LinTerm::zero(sig.dom, sig.cod))
}

fn rw_plus_zero(t: &LinTerm) -> Option<LinTerm> {
    let LinTerm::Plus(a, b) = t else { return None };
    if is_zero(a) {
        return Some((**b).clone());
    }
    if is_zero(b) {
        return Some((**a).clone());
    }
    None
}

fn rw_scale_zero(t: &LinTerm) -> Option<LinTerm> {
    match t {
        LinTerm::Scale { factor, space } if *factor == 0.0 => {
            Some(LinTerm::zero(space.clone(), space.clone()))
        }
        _ => None,
    }
}

fn rw_scale_fuse(t: &LinTerm) -> Option<LinTerm> {
    let LinTerm::Comp(g, f) = t else { return None };
    match (&**g, &**f) {
        (
            LinTerm::Scale { factor: a, space: s1 },
            LinTerm::Scale { factor: b, space: s2 },
        ) if s1.equiv(s2) => Some(LinTerm::scale(a * b, s2.clone())),
        _ => None,
    }
}

fn rw_scale_one(t: &LinTerm) -> Option<LinTerm> {
    match t {
        LinTerm::Scale { factor, space } if *factor == 1.0 => Some(LinTerm::Id(space.clone())),
        _ => None,
    }
}

fn rw_unitary_cancel(t: &LinTerm) -> Option<LinTerm> {
    let LinTerm::Comp(g, f) = t else { return None };
    match (&**g, &**f) {
        (LinTerm::Unitary(a), LinTerm::Unitary(b)) if *a == b.inverse() => {
            Some(LinTerm::Id(b.signature().ok()?.dom))
        }
        _ => None,
    }
}

fn rw_par_fuse(t: &LinTerm) -> Option<LinTerm> {
    let LinTerm::Comp(g, f) = t else { return None };
    match (&**g, &**f) {
        (
            LinTerm::ParMap { over: og, items: gs },
            LinTerm::ParMap { over: of, items: fs },
        ) if gs.len() == fs.len() => {
            let over = match (og, of) {
                (Some(x), Some(y)) if x == y => Some(x.clone()),
                _ => None,
            };
            let items = gs
                .iter()
                .zip(fs)
                .map(|(gi, fi)| LinTerm::comp(gi.clone(), fi.clone()))
                .collect();
            let fused = LinTerm::ParMap { over, items };
            infer_types(&fused).ok()?;
            Some(fused)
        }
        (
            LinTerm::PowMap { index: x, item: gi },
            LinTerm::PowMap { index: y, item: fi },
        ) if x == y => Some(LinTerm::pow_map(
            x.clone(),
            LinTerm::comp((**gi).clone(), (**fi).clone()),
        )),
        _ => None,
    }
}

fn rw_par_id(t: &LinTerm) -> Option<LinTerm> {
    match t {
        LinTerm::ParMap { items, .. } if !items.is_empty() => {
            if items.iter().all(|i| matches!(i, LinTerm::Id(_))) {
                Some(LinTerm::Id(infer_types(t).ok()?.dom))
            } else {
                None
            }
        }
        LinTerm::PowMap { index, item } => match &**item {
            LinTerm::Id(v) => Some(LinTerm::Id(SpaceTerm::pow(index.clone(), v.clone()))),
            _ => None,
        },
        _ => None,
    }
}

fn rw_contract_fuse(t: &LinTerm) -> Option<LinTerm> {
    let LinTerm::Comp(g, f) = t else { return None };
    match (&**g, &**f) {
        // (v ∗) • (w ∗) = ((v ∗ w) ∗), by associativity of contraction.
        (
            LinTerm::ContractL { payload: v, passive: pu },
            LinTerm::ContractL { payload: w, passive: pw },
        ) if pu.equiv(pw) => Some(LinTerm::contract_l(v.contract(w).ok()?, pw.clone())),
        // (∗ b) • (∗ a) = (∗ (a ∗ b)), symmetrically.
        (
            LinTerm::ContractR { payload: b, passive: pu },
            LinTerm::ContractR { payload: a, passive: pw },
        ) if pu.equiv(pw) => Some(LinTerm::contract_r(a.contract(b).ok()?, pw.clone())),
        _ => None,
    }
}

fn rw_red_fuse(t: &LinTerm) -> Option<LinTerm> {
    let LinTerm::Comp(g, f) = t else { return None };
    match (&**g, &**f) {
        (
            LinTerm::Red { rel: s, body: bs },
            LinTerm::Red { rel: r, body: br },
        ) if bs.equiv(br) => {
            // Guarded: compose returns None when any pair is reachable
            // through more than one middle index.
            let fused = r.compose(s)?;
            Some(LinTerm::red(fused, br.clone()))
        }
        _ => None,
    }
}

// --- sample generators -------------------------------------------------

fn small_space(rng: &mut dyn RngCore) -> SpaceTerm {
    match rng.random_range(0..3) {
        0 => SpaceTerm::Scalar,
        1 => SpaceTerm::rn(rng.random_range(1..4)),
        _ => SpaceTerm::pair(SpaceTerm::Scalar, SpaceTerm::rn(rng.random_range(1..3))),
    }
}

fn random_relation(rng: &mut dyn RngCore, x: usize, y: usize, functional: bool) -> Relation {
    let xs = IndexSet::Seg(x);
    let ys = IndexSet::Seg(y);
    let mut pairs = Vec::new();
    for i in 1..=x {
        if functional {
            if rng.random_bool(0.8) {
                pairs.push((IndexValue::Num(i), IndexValue::Num(rng.random_range(1..=y))));
            }
        } else {
            for j in 1..=y {
                if rng.random_bool(0.4) {
                    pairs.push((IndexValue::Num(i), IndexValue::Num(j)));
                }
            }
        }
    }
    Relation::new(xs, ys, pairs).expect("pairs in range")
}

/// A random endomorphism-ish atom with a usable signature.
fn small_atom(rng: &mut dyn RngCore) -> LinTerm {
    match rng.random_range(0..4) {
        0 => {
            let n = rng.random_range(1..4);
            let m = rng.random_range(1..4);
            LinTerm::red(random_relation(rng, n, m, false), SpaceTerm::Scalar)
        }
        1 => LinTerm::scale(rng.random_range(-2.0..2.0), small_space(rng)),
        2 => LinTerm::Id(small_space(rng)),
        _ => crate::linterm::derived::scan(rng.random_range(1..4), &SpaceTerm::Scalar),
    }
}

fn sample_comp_id(rng: &mut dyn RngCore) -> LinTerm {
    let f = small_atom(rng);
    let sig = infer_types(&f).unwrap();
    if rng.random_bool(0.5) {
        LinTerm::comp(LinTerm::Id(sig.cod), f)
    } else {
        LinTerm::comp(f, LinTerm::Id(sig.dom))
    }
}

fn sample_comp_zero(rng: &mut dyn RngCore) -> LinTerm {
    let f = small_atom(rng);
    let sig = infer_types(&f).unwrap();
    if rng.random_bool(0.5) {
        LinTerm::comp(LinTerm::zero(sig.cod, small_space(rng)), f)
    } else {
        LinTerm::comp(f, LinTerm::zero(small_space(rng), sig.dom))
    }
}

fn sample_plus_zero(rng: &mut dyn RngCore) -> LinTerm {
    let f = small_atom(rng);
    let sig = infer_types(&f).unwrap();
    let z = LinTerm::zero(sig.dom, sig.cod);
    if rng.random_bool(0.5) {
        LinTerm::plus(z, f)
    } else {
        LinTerm::plus(f, z)
    }
}

fn sample_scale_zero(rng: &mut dyn RngCore) -> LinTerm {
    LinTerm::scale(0.0, small_space(rng))
}

fn sample_scale_fuse(rng: &mut dyn RngCore) -> LinTerm {
    let s = small_space(rng);
    LinTerm::comp(
        LinTerm::scale(rng.random_range(-2.0..2.0), s.clone()),
        LinTerm::scale(rng.random_range(-2.0..2.0), s),
    )
}

fn sample_scale_one(rng: &mut dyn RngCore) -> LinTerm {
    LinTerm::scale(1.0, small_space(rng))
}

fn sample_unitary_cancel(rng: &mut dyn RngCore) -> LinTerm {
    let v = small_space(rng);
    let w = SpaceTerm::rn(rng.random_range(1..3));
    let u = match rng.random_range(0..6) {
        0 => UnitaryOp::Bra(v),
        1 => UnitaryOp::Ket(v),
        2 => UnitaryOp::Transpose(v, w),
        3 => UnitaryOp::Assoc(v, w.clone(), SpaceTerm::Scalar),
        4 => UnitaryOp::Distrib {
            family: SpaceTerm::pair(v, SpaceTerm::Scalar),
            factor: w,
        },
        _ => UnitaryOp::Zip {
            left: SpaceTerm::rn(2),
            right: SpaceTerm::rn(2),
        },
    };
    LinTerm::comp(LinTerm::Unitary(u.inverse()), LinTerm::Unitary(u))
}

fn sample_par_fuse(rng: &mut dyn RngCore) -> LinTerm {
    let n = rng.random_range(1..4);
    let mut fs = Vec::new();
    let mut gs = Vec::new();
    for _ in 0..n {
        let f = small_atom(rng);
        let cod = infer_types(&f).unwrap().cod;
        fs.push(f);
        gs.push(LinTerm::scale(rng.random_range(-2.0..2.0), cod));
    }
    LinTerm::comp(LinTerm::par(gs), LinTerm::par(fs))
}

fn sample_par_id(rng: &mut dyn RngCore) -> LinTerm {
    let n = rng.random_range(1..4);
    LinTerm::par((0..n).map(|_| LinTerm::Id(small_space(rng))).collect())
}

fn sample_contract_fuse(rng: &mut dyn RngCore) -> LinTerm {
    // (v ∗) • (w ∗) with v ∈ W⊗V, w ∈ V⊗T, passive U.
    let w_sp = SpaceTerm::rn(rng.random_range(1..3));
    let v_sp = SpaceTerm::rn(rng.random_range(1..3));
    let t_sp = SpaceTerm::rn(rng.random_range(1..3));
    let u_sp = if rng.random_bool(0.5) {
        SpaceTerm::Scalar
    } else {
        SpaceTerm::rn(2)
    };
    let v = random_vector(&SpaceTerm::tensor(w_sp.clone(), v_sp.clone()), rng);
    let w = random_vector(&SpaceTerm::tensor(v_sp, t_sp.clone()), rng);
    if rng.random_bool(0.5) {
        LinTerm::comp(
            LinTerm::contract_l(v, u_sp.clone()),
            LinTerm::contract_l(w, u_sp),
        )
    } else {
        // (∗ b) • (∗ a): a ∈ V⊗T, b ∈ T⊗U′ with passive W.
        let a = random_vector(&SpaceTerm::tensor(w_sp.clone(), t_sp.clone()), rng);
        let b = random_vector(&SpaceTerm::tensor(t_sp, SpaceTerm::rn(2)), rng);
        LinTerm::comp(
            LinTerm::contract_r(b, u_sp.clone()),
            LinTerm::contract_r(a, u_sp),
        )
    }
}

fn sample_red_fuse(rng: &mut dyn RngCore) -> LinTerm {
    let x = rng.random_range(1..4);
    let y = rng.random_range(1..4);
    let z = rng.random_range(1..4);
    // A functional first leg keeps the composition multiplicity-free, so
    // the guard usually lets the rule fire.
    let r = random_relation(rng, x, y, true);
    let s = random_relation(rng, y, z, false);
    LinTerm::comp(
        LinTerm::red(s, SpaceTerm::Scalar),
        LinTerm::red(r, SpaceTerm::Scalar),
    )
}

/// The full rule set, in application order.
pub fn rules() -> &'static [RewriteRule] {
    &[
        RewriteRule {
            name: "comp-id",
            soundness: "id is the unit of composition",
            rewrite: rw_comp_id,
            sample: sample_comp_id,
        },
        RewriteRule {
            name: "comp-zero",
            soundness: "composing with the zero map yields the zero map",
            rewrite: rw_comp_zero,
            sample: sample_comp_zero,
        },
        RewriteRule {
            name: "plus-zero",
            soundness: "the zero map is the unit of pointwise sum",
            rewrite: rw_plus_zero,
            sample: sample_plus_zero,
        },
        RewriteRule {
            name: "scale-zero",
            soundness: "(0·) is the zero map",
            rewrite: rw_scale_zero,
            sample: sample_scale_zero,
        },
        RewriteRule {
            name: "scale-fuse",
            soundness: "(a·) • (b·) = (ab·)",
            rewrite: rw_scale_fuse,
            sample: sample_scale_fuse,
        },
        RewriteRule {
            name: "scale-one",
            soundness: "(1·) = id",
            rewrite: rw_scale_one,
            sample: sample_scale_one,
        },
        RewriteRule {
            name: "unitary-cancel",
            soundness: "a unitary composed with its inverse is the identity",
            rewrite: rw_unitary_cancel,
            sample: sample_unitary_cancel,
        },
        RewriteRule {
            name: "par-fuse",
            soundness: "componentwise maps compose componentwise; all-id collapses via par-id",
            rewrite: rw_par_fuse,
            sample: sample_par_fuse,
        },
        RewriteRule {
            name: "par-id",
            soundness: "the componentwise identity is the identity",
            rewrite: rw_par_id,
            sample: sample_par_id,
        },
        RewriteRule {
            name: "contract-fuse",
            soundness: "contraction sections compose by contracting payloads (associativity)",
            rewrite: rw_contract_fuse,
            sample: sample_contract_fuse,
        },
        RewriteRule {
            name: "red-fuse",
            soundness: "reductions compose along relation composition when multiplicity-free",
            rewrite: rw_red_fuse,
            sample: sample_red_fuse,
        },
    ]
}

fn rewrite_once(t: &LinTerm, steps: &mut usize, budget: usize) -> Option<LinTerm> {
    if *steps >= budget {
        return None;
    }
    // Innermost first, children in structural order.
    let rebuilt = match t {
        LinTerm::Comp(g, f) => rewrite_once(g, steps, budget)
            .map(|g2| LinTerm::comp(g2, (**f).clone()))
            .or_else(|| rewrite_once(f, steps, budget).map(|f2| LinTerm::comp((**g).clone(), f2))),
        LinTerm::Plus(a, b) => rewrite_once(a, steps, budget)
            .map(|a2| LinTerm::plus(a2, (**b).clone()))
            .or_else(|| rewrite_once(b, steps, budget).map(|b2| LinTerm::plus((**a).clone(), b2))),
        LinTerm::ParMap { over, items } => {
            let mut out = None;
            for (i, item) in items.iter().enumerate() {
                if let Some(new_item) = rewrite_once(item, steps, budget) {
                    let mut items2 = items.clone();
                    items2[i] = new_item;
                    out = Some(LinTerm::ParMap {
                        over: over.clone(),
                        items: items2,
                    });
                    break;
                }
            }
            out
        }
        LinTerm::Fanout { items } => {
            let mut out = None;
            for (i, item) in items.iter().enumerate() {
                if let Some(new_item) = rewrite_once(item, steps, budget) {
                    let mut items2 = items.clone();
                    items2[i] = new_item;
                    out = Some(LinTerm::fanout(items2));
                    break;
                }
            }
            out
        }
        LinTerm::PowMap { index, item } => {
            rewrite_once(item, steps, budget).map(|i2| LinTerm::pow_map(index.clone(), i2))
        }
        _ => None,
    };
    if rebuilt.is_some() {
        return rebuilt;
    }
    for rule in rules() {
        if let Some(next) = rule.apply_at_root(t) {
            *steps += 1;
            return Some(next);
        }
    }
    None
}

/// Rewrites `f` to a fixpoint of the rule set. The result types the same
/// as the input and never has a larger term size.
pub fn simplify(f: &LinTerm) -> Result<LinTerm> {
    infer_types(f)?;
    let budget = 10 * term_size(f);
    let mut steps = 0;
    let mut current = f.clone();
    while let Some(next) = rewrite_once(&current, &mut steps, budget) {
        current = next;
    }
    if term_size(&current) <= term_size(f) {
        Ok(current)
    } else {
        Ok(f.clone())
    }
}

/// Steps actually available to [`simplify`] for this input.
pub fn step_budget(f: &LinTerm) -> usize {
    10 * term_size(f)
}

/// Outcome of the per-rule oracle equivalence suite.
#[derive(Debug)]
pub struct SoundnessReport {
    pub per_rule: Vec<RuleOutcome>,
}

#[derive(Debug)]
pub struct RuleOutcome {
    pub name: &'static str,
    pub instances: usize,
    /// How many instances the rule actually rewrote.
    pub fired: usize,
    pub max_error: f64,
    pub failures: usize,
}

impl SoundnessReport {
    pub fn passed(&self) -> bool {
        self.per_rule.iter().all(|r| r.failures == 0 && r.fired > 0)
    }
}

/// For every rule, draws `instances` random terms containing a redex,
/// applies the rule where it matches, and compares dense matrices before
/// and after within `tol`.
pub fn rule_soundness_suite(
    instances: usize,
    tol: f64,
    rng: &mut dyn RngCore,
) -> Result<SoundnessReport> {
    let mut per_rule = Vec::new();
    for rule in rules() {
        let mut fired = 0;
        let mut failures = 0;
        let mut max_error: f64 = 0.0;
        for _ in 0..instances {
            let t = rule.sample_instance(rng);
            let before = lower_matrix(&t)?;
            if let Some(t2) = rule.apply_at_root(&t) {
                fired += 1;
                let after = lower_matrix(&t2)?;
                let err = before.max_abs_diff(&after);
                max_error = max_error.max(err);
                if err > tol {
                    failures += 1;
                }
            }
        }
        per_rule.push(RuleOutcome {
            name: rule.name,
            instances,
            fired,
            max_error,
            failures,
        });
    }
    Ok(SoundnessReport { per_rule })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linterm::derived;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_elimination() {
        let red = derived::scan(3, &SpaceTerm::Scalar);
        let t = LinTerm::comp(LinTerm::Id(SpaceTerm::rn(3)), red.clone());
        assert_eq!(simplify(&t).unwrap(), red);
    }

    #[test]
    fn scale_fusion() {
        let t = LinTerm::comp(
            LinTerm::scale(2.0, SpaceTerm::Scalar),
            LinTerm::scale(3.0, SpaceTerm::Scalar),
        );
        assert_eq!(simplify(&t).unwrap(), LinTerm::scale(6.0, SpaceTerm::Scalar));
    }

    #[test]
    fn red_fusion_composes_relations() {
        let r = Relation::new(
            IndexSet::Seg(2),
            IndexSet::Seg(1),
            [
                (IndexValue::Num(1), IndexValue::Num(1)),
                (IndexValue::Num(2), IndexValue::Num(1)),
            ],
        )
        .unwrap();
        let s = Relation::new(
            IndexSet::Seg(1),
            IndexSet::Seg(1),
            [(IndexValue::Num(1), IndexValue::Num(1))],
        )
        .unwrap();
        let t = LinTerm::comp(
            LinTerm::red(s, SpaceTerm::Scalar),
            LinTerm::red(r.clone(), SpaceTerm::Scalar),
        );
        assert_eq!(simplify(&t).unwrap(), LinTerm::red(r, SpaceTerm::Scalar));
    }

    #[test]
    fn red_fusion_guard_blocks_multiplicities() {
        // rep then sum multiplies by the fan-out; fusing the relations
        // would lose that, so the guard must keep the composition.
        let rep_rel = Relation::all_pairs(&IndexSet::Seg(1), &IndexSet::Seg(2));
        let sum_rel = Relation::all_pairs(&IndexSet::Seg(2), &IndexSet::Seg(1));
        let t = LinTerm::comp(
            LinTerm::red(sum_rel, SpaceTerm::Scalar),
            LinTerm::red(rep_rel, SpaceTerm::Scalar),
        );
        let before = lower_matrix(&t).unwrap();
        let after = lower_matrix(&simplify(&t).unwrap()).unwrap();
        assert!(before.approx_eq(&after, 0.0));
    }

    #[test]
    fn simplify_is_idempotent_and_non_increasing() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for rule in rules() {
            for _ in 0..10 {
                let t = rule.sample_instance(&mut rng);
                let once = simplify(&t).unwrap();
                assert!(term_size(&once) <= term_size(&t));
                assert_eq!(simplify(&once).unwrap(), once);
            }
        }
    }

    #[test]
    fn soundness_suite_passes() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        let report = rule_soundness_suite(50, 1e-12, &mut rng).unwrap();
        for outcome in &report.per_rule {
            assert_eq!(
                outcome.failures, 0,
                "{} broke equivalence (max error {})",
                outcome.name, outcome.max_error
            );
            assert!(outcome.fired > 0, "{} never fired", outcome.name);
        }
    }

    #[test]
    fn unitary_cancellation() {
        let u = UnitaryOp::Transpose(SpaceTerm::rn(2), SpaceTerm::rn(3));
        let t = LinTerm::comp(
            LinTerm::Unitary(u.inverse()),
            LinTerm::Unitary(u.clone()),
        );
        let s = simplify(&t).unwrap();
        assert_eq!(s, LinTerm::Id(u.signature().unwrap().dom));
    }
}
