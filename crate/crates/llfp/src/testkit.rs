//! Seeded, type-directed term generation for the test suites.
//!
//! [`TermGen`] produces well-typed terms by construction: objects are built
//! against a goal family, descending through products by eta-expansion and
//! through locks by guarding, and atomic spines are assembled from
//! "producers", heads whose classifier can be peeled down to the goal by
//! applying arguments and discharging locks. All randomness comes from a
//! seeded [`ChaCha8Rng`], so a suite reruns identically from its seed.
//!
//! The generators target [`sample_signature`], whose only family constant is
//! unindexed. That keeps producer matching exact (a peeled classifier either
//! is the goal or is not) while still exercising every object former:
//! third-order constants give eta-expansion under application, and generated
//! contexts may declare lock-typed hypotheses, which surface as unlock
//! spines.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::syntax::{
    build, AtomicObject, CanonicalObject, Context, Family, Kind, LockGuard, SigClassifier,
    Signature, VarName,
};

/// A five-constant signature: one base family and four object constants up
/// to third order.
pub fn sample_signature() -> Signature {
    let a = || build::fconst("a");
    let mut sig = Signature::new();
    sig.push_fam("a", Kind::Type);
    sig.push_obj("c", a());
    sig.push_obj("f", build::arrow(a(), a()));
    sig.push_obj("g", build::arrow(a(), build::arrow(a(), a())));
    sig.push_obj("h", build::arrow(build::arrow(a(), a()), a()));
    sig
}

/// How a producer's classifier is consumed on the way to the goal family.
enum Need {
    /// A product: apply the spine to an argument of this family.
    Arg(Family),
    /// A lock: wrap the spine in an unlock with this annotation.
    Open { pred: String, witness: CanonicalObject, witness_ty: Family },
}

struct Producer {
    head: AtomicObject,
    needs: Vec<Need>,
}

/// Deterministic generator of well-typed terms over mode-`p` signatures.
pub struct TermGen {
    rng: ChaCha8Rng,
    locks: bool,
}

impl TermGen {
    pub fn new(seed: u64) -> Self {
        TermGen { rng: ChaCha8Rng::seed_from_u64(seed), locks: true }
    }

    /// Restricts generated families to products and atoms.
    pub fn without_locks(mut self) -> Self {
        self.locks = false;
        self
    }

    /// A well-formed family of the given depth budget. Locks guard with the
    /// predicate `True`, so any registry carrying the built-ins can check
    /// the results.
    pub fn family(&mut self, sig: &Signature, ctx: &Context, depth: usize) -> Family {
        if depth == 0 {
            return build::fconst("a");
        }
        match self.rng.gen_range(0..8u32) {
            0..=2 => build::fconst("a"),
            3..=5 => {
                let dom = self.family(sig, ctx, depth - 1);
                let cod = self.family(sig, ctx, depth - 1);
                build::arrow(dom, cod)
            }
            _ if self.locks => {
                let guard_ty = self.family(sig, ctx, depth - 1);
                let guard = self.object(sig, ctx, &guard_ty, depth - 1);
                let body = self.family(sig, ctx, depth - 1);
                build::flock("True", guard, guard_ty, body)
            }
            _ => {
                let dom = self.family(sig, ctx, depth - 1);
                build::arrow(dom, build::fconst("a"))
            }
        }
    }

    /// A context of `n` entries named `{prefix}0..{prefix}{n-1}`, each
    /// declared at a generated family.
    pub fn context(&mut self, sig: &Signature, prefix: &str, n: usize, depth: usize) -> Context {
        let mut ctx = Context::new();
        for i in 0..n {
            let f = self.family(sig, &ctx, depth);
            ctx = ctx.extended(VarName::source(&format!("{prefix}{i}")), f);
        }
        ctx
    }

    /// Extends `ctx` by one entry with the given name at a generated family.
    pub fn extend(
        &mut self,
        sig: &Signature,
        ctx: &Context,
        name: &str,
        depth: usize,
    ) -> (Context, VarName) {
        let f = self.family(sig, ctx, depth);
        let x = VarName::source(name);
        (ctx.extended(x.clone(), f), x)
    }

    /// A well-typed canonical object checking against `goal`.
    pub fn object(
        &mut self,
        sig: &Signature,
        ctx: &Context,
        goal: &Family,
        depth: usize,
    ) -> CanonicalObject {
        match goal {
            Family::Pi(dom, hint, body) => {
                let x = VarName::fresh(hint.as_str());
                let opened = body.open_var(&x);
                let inner = ctx.extended(x.clone(), (**dom).clone());
                let b = self.object(sig, &inner, &opened, depth);
                CanonicalObject::Abs(dom.clone(), hint.clone(), Box::new(b.close_var(&x)))
            }
            Family::Lock { pred, guard, guard_ty, body } => {
                let b = self.object(sig, ctx, body, depth);
                CanonicalObject::Lock {
                    pred: pred.clone(),
                    guard: guard.clone(),
                    guard_ty: guard_ty.clone(),
                    body: Box::new(b),
                }
            }
            Family::Atom(_) => CanonicalObject::Atom(self.atomic(sig, ctx, goal, depth)),
        }
    }

    /// A well-typed atomic object synthesizing exactly `goal`, which must be
    /// atomic.
    pub fn atomic(
        &mut self,
        sig: &Signature,
        ctx: &Context,
        goal: &Family,
        depth: usize,
    ) -> AtomicObject {
        let mut leaves = Vec::new();
        let mut spines = Vec::new();
        for (x, f) in &ctx.entries {
            if let Some(needs) = peel(f, goal) {
                let p = Producer { head: build::ovar(x), needs };
                if p.needs.is_empty() { leaves.push(p) } else { spines.push(p) }
            }
        }
        for decl in &sig.decls {
            if let SigClassifier::Obj(f) = &decl.classifier {
                if let Some(needs) = peel(f, goal) {
                    let p = Producer { head: build::oconst(&decl.name), needs };
                    if p.needs.is_empty() { leaves.push(p) } else { spines.push(p) }
                }
            }
        }
        let pool = if depth == 0 || spines.is_empty() || (!leaves.is_empty() && self.rng.gen_bool(0.4))
        {
            if leaves.is_empty() { &spines } else { &leaves }
        } else {
            &spines
        };
        assert!(
            !pool.is_empty(),
            "no producer for {goal} (the sample signature always offers one)"
        );
        let p = &pool[self.rng.gen_range(0..pool.len())];
        let mut spine = p.head.clone();
        let arg_depth = depth.saturating_sub(1);
        for need in &p.needs {
            spine = match need {
                Need::Arg(dom) => build::app(spine, self.object(sig, ctx, dom, arg_depth)),
                Need::Open { pred, witness, witness_ty } => {
                    build::unlock(pred, witness.clone(), witness_ty.clone(), spine)
                }
            };
        }
        spine
    }
}

/// Peels a classifier down to `goal`: products demand arguments, term-guard
/// locks demand unlocks. `None` when the classifier cannot reach the goal.
fn peel(classifier: &Family, goal: &Family) -> Option<Vec<Need>> {
    let mut needs = Vec::new();
    let mut cur = classifier.clone();
    loop {
        match cur {
            Family::Atom(_) => return (cur == *goal).then_some(needs),
            Family::Pi(dom, hint, body) => {
                needs.push(Need::Arg(*dom));
                cur = body.open_var(&VarName::fresh(hint.as_str()));
            }
            Family::Lock { pred, guard: LockGuard::Term(witness), guard_ty, body } => {
                needs.push(Need::Open {
                    pred: pred.to_string(),
                    witness: *witness,
                    witness_ty: *guard_ty,
                });
                cur = *body;
            }
            Family::Lock { guard: LockGuard::Binder(_), .. } => return None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::checker::Checker;
    use crate::predicates::Registry;
    use crate::syntax::SystemMode;

    #[test]
    fn generated_judgements_check() {
        let sig = sample_signature();
        let oracle = Registry::with_builtins();
        let checker = Checker::new(&sig, SystemMode::P, &oracle);
        checker.check_signature().expect("sample signature is well-formed");
        let mut gen = TermGen::new(7);
        for i in 0..200 {
            let ctx = gen.context(&sig, "x", i % 4, 3);
            checker.check_context(&ctx).unwrap_or_else(|e| panic!("context {i}: {e}"));
            let goal = gen.family(&sig, &ctx, 3);
            checker.check_family(&ctx, &goal).unwrap_or_else(|e| panic!("family {i}: {e}"));
            let m = gen.object(&sig, &ctx, &goal, 4);
            checker
                .check_object(&ctx, &m, &goal)
                .unwrap_or_else(|e| panic!("object {i}: {m} <= {goal}: {e}"));
        }
    }

    #[test]
    fn generation_is_deterministic_up_to_alpha() {
        let sig = sample_signature();
        let mut g1 = TermGen::new(42);
        let mut g2 = TermGen::new(42);
        for _ in 0..50 {
            let c1 = g1.context(&sig, "x", 3, 3);
            let c2 = g2.context(&sig, "x", 3, 3);
            assert_eq!(c1, c2);
            let f1 = g1.family(&sig, &c1, 4);
            let f2 = g2.family(&sig, &c2, 4);
            assert_eq!(f1, f2);
            assert_eq!(g1.object(&sig, &c1, &f1, 4), g2.object(&sig, &c2, &f2, 4));
        }
    }

    #[test]
    fn lock_free_generation_stays_lock_free() {
        let sig = sample_signature();
        let mut gen = TermGen::new(3).without_locks();
        for _ in 0..100 {
            let ctx = gen.context(&sig, "x", 3, 4);
            let f = gen.family(&sig, &ctx, 4);
            assert!(!format!("{f}").contains("lock"), "{f}");
        }
    }
}
