//! The bidirectional type checker.
//!
//! Checking is syntax-directed and produces a full derivation tree. Atomic
//! terms synthesize their classifier; canonical terms check against one.
//! `o-atom` additionally demands that the expected classifier is atomic,
//! which is what forces every typeable term to be eta-long.
//!
//! Lock goals get special treatment. Before applying the plain lock rule,
//! the checker scans the goal (classifier first, then term, leftmost and
//! outermost) for an unlock whose annotation matches the enclosing lock.
//! Such an unlock is discharged structurally: its body is abstracted out as
//! a fresh variable of the unlocked type, and no predicate query happens,
//! because the enclosing lock already carries that exact obligation. The
//! scan repeats until no matching unlock remains, then the plain rule runs.
//! Unlocks that do not match the enclosing lock (or appear under no lock at
//! all) take the ordinary rule, which queries the predicate's oracle.
//!
//! Derivations record the rule name, the rendered conclusion, the premise
//! subtrees and every predicate query made at that node, so two runs of the
//! same goal can be compared for identical traces.

use std::cell::Cell;

use crate::hsubst::{instantiate_family, instantiate_kind, SubstError};
use crate::predicates::{PredicateEvaluator, PredicateQuery, PredicateVerdict, SynthesisOutcome, SynthesisQuery};
use crate::syntax::{
    erase, validate_mode_atomic_object, validate_mode_context, validate_mode_family,
    validate_mode_kind, validate_mode_object, validate_mode_signature, AtomicFamily, AtomicObject,
    CanonicalObject, Context, Family, Kind, LockGuard, Name, SigClassifier, Signature,
    SystemMode, VarName,
};

/// Step budget for one judgement; generous enough that only a genuine loop
/// (or an adversarial input) can reach it.
pub const DEFAULT_MAX_STEPS: u64 = 5_000_000;

#[derive(Clone, PartialEq, Eq, Debug, thiserror::Error)]
pub enum TypeError {
    #[error("duplicate constant `{0}` in signature")]
    DuplicateName(Name),
    #[error("duplicate variable `{0}` in context")]
    DuplicateVar(Name),
    #[error("declaration `{name}` has an ill-formed kind: {inner}")]
    IllFormedKind { name: Name, inner: Box<TypeError> },
    #[error("declaration `{name}` has an ill-formed family: {inner}")]
    IllFormedFamily { name: Name, inner: Box<TypeError> },
    #[error("unknown family constant `{0}`")]
    UnknownFamily(Name),
    #[error("cannot apply `{head}`: its kind `{kind}` is not a product")]
    NotPiKind { head: String, kind: String },
    #[error("argument `{arg}` does not check against `{dom}`: {inner}")]
    ArgCheckFailed { arg: String, dom: String, inner: Box<TypeError> },
    #[error("`{family}` has kind `{kind}`, not `Type`")]
    NotAType { family: String, kind: String },
    #[error("nested unlock `{redex}` cannot be discharged by its enclosing lock: {detail}")]
    NestedUnlockMismatch { redex: String, detail: String },
    #[error("unknown constant `{0}`")]
    UnknownConst(Name),
    #[error("unknown variable `{0}`")]
    UnknownVar(Name),
    #[error("cannot apply `{head}`: its type `{family}` is not a product")]
    NotPiType { head: String, family: String },
    #[error("cannot unlock `{body}`: its type `{family}` is not a lock")]
    NotLockType { body: String, family: String },
    #[error("unlock annotation on `{annotation}` does not match the lock type `{lock}`")]
    GuardMismatch { annotation: String, lock: String },
    #[error("predicate `{pred}` rejected `{judgement}`: {reason}")]
    PredicateFailed { pred: Name, judgement: String, reason: String },
    #[error("predicate `{pred}` could not decide `{judgement}`: {reason}")]
    PredicateUnknown { pred: Name, judgement: String, reason: String },
    #[error("no oracle is registered for predicate `{0}`")]
    UnknownPredicate(Name),
    #[error("atomic term `{term}` cannot check against the non-atomic classifier `{family}`")]
    NotEtaLong { term: String, family: String },
    #[error("`{term}` does not check against `{expected}`: {detail}")]
    TypeMismatch { term: String, expected: String, detail: String },
    #[error("mode mismatch: {0}")]
    ModeMismatch(String),
    #[error("hereditary substitution failed during checking: {0}")]
    SubstUndefined(String),
    #[error("checking aborted after {0} steps")]
    Watchdog(u64),
}

impl TypeError {
    /// Stable machine name, matched by `expect error <code>` in scripts.
    pub fn code(&self) -> &'static str {
        match self {
            TypeError::DuplicateName(_) => "DuplicateName",
            TypeError::DuplicateVar(_) => "DuplicateVar",
            TypeError::IllFormedKind { .. } => "IllFormedKind",
            TypeError::IllFormedFamily { .. } => "IllFormedFamily",
            TypeError::UnknownFamily(_) => "UnknownFamily",
            TypeError::NotPiKind { .. } => "NotPiKind",
            TypeError::ArgCheckFailed { .. } => "ArgCheckFailed",
            TypeError::NotAType { .. } => "NotAType",
            TypeError::NestedUnlockMismatch { .. } => "NestedUnlockMismatch",
            TypeError::UnknownConst(_) => "UnknownConst",
            TypeError::UnknownVar(_) => "UnknownVar",
            TypeError::NotPiType { .. } => "NotPiType",
            TypeError::NotLockType { .. } => "NotLockType",
            TypeError::GuardMismatch { .. } => "GuardMismatch",
            TypeError::PredicateFailed { .. } => "PredicateFailed",
            TypeError::PredicateUnknown { .. } => "PredicateUnknown",
            TypeError::UnknownPredicate(_) => "UnknownPredicate",
            TypeError::NotEtaLong { .. } => "NotEtaLong",
            TypeError::TypeMismatch { .. } => "TypeMismatch",
            TypeError::ModeMismatch(_) => "ModeMismatch",
            TypeError::SubstUndefined(_) => "SubstUndefined",
            TypeError::Watchdog(_) => "Watchdog",
        }
    }
}

impl From<SubstError> for TypeError {
    fn from(e: SubstError) -> Self {
        TypeError::SubstUndefined(e.to_string())
    }
}

/// One predicate query made while checking, with the oracle's answer.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct QueryRecord {
    pub pred: Name,
    pub subject: String,
    pub classifier: String,
    pub verdict: String,
}

/// A derivation tree. Conclusions are rendered eagerly so traces can be
/// compared across runs.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Derivation {
    pub rule: &'static str,
    pub conclusion: String,
    pub premises: Vec<Derivation>,
    pub queries: Vec<QueryRecord>,
}

impl Derivation {
    fn leaf(rule: &'static str, conclusion: String) -> Self {
        Derivation { rule, conclusion, premises: Vec::new(), queries: Vec::new() }
    }

    fn node(rule: &'static str, conclusion: String, premises: Vec<Derivation>) -> Self {
        Derivation { rule, conclusion, premises, queries: Vec::new() }
    }

    /// Indented textual form, one rule per line, premises nested below.
    pub fn render(&self) -> String {
        let mut out = String::new();
        self.render_into(&mut out, 0);
        out
    }

    fn render_into(&self, out: &mut String, depth: usize) {
        for _ in 0..depth {
            out.push_str("  ");
        }
        out.push_str(&format!("[{}] {}\n", self.rule, self.conclusion));
        for q in &self.queries {
            for _ in 0..depth + 1 {
                out.push_str("  ");
            }
            out.push_str(&format!("? {}({} <= {}) = {}\n", q.pred, q.subject, q.classifier, q.verdict));
        }
        for p in &self.premises {
            p.render_into(out, depth + 1);
        }
    }

    /// All query records in this tree, in derivation order.
    pub fn all_queries(&self) -> Vec<&QueryRecord> {
        let mut out = Vec::new();
        self.collect_queries(&mut out);
        out
    }

    fn collect_queries<'a>(&'a self, out: &mut Vec<&'a QueryRecord>) {
        out.extend(self.queries.iter());
        for p in &self.premises {
            p.collect_queries(out);
        }
    }
}

/// The seven judgement forms, for the one-shot dispatcher.
#[derive(Clone, Debug)]
pub enum Judgement {
    Signature,
    Context(Context),
    Kind(Context, Kind),
    Family(Context, Family),
    Object(Context, CanonicalObject, Family),
    AtomicFamily(Context, AtomicFamily),
    AtomicObject(Context, AtomicObject),
}

/// The enclosing lock an unlock must match to be discharged structurally.
/// For a binder lock the `witness` is the variable the binder was opened
/// with, and `binder` is set.
#[derive(Clone, Debug)]
pub struct LockSpec {
    pub pred: Name,
    pub witness: CanonicalObject,
    pub guard_ty: Family,
    pub binder: bool,
}

/// The result of abstracting one nested-unlock redex out of a lock goal.
#[derive(Clone, Debug)]
pub struct AbstractedUnlock {
    /// The fresh variable standing for the redex.
    pub var: VarName,
    /// Its classifier: the body of the lock the redex's own body provides.
    pub classifier: Family,
    /// The whole redex `unlock[P; N : s] A` that was replaced.
    pub redex: AtomicObject,
    /// The redex body `A`.
    pub body: AtomicObject,
    /// The goal term with every occurrence of the redex replaced.
    pub object: Option<CanonicalObject>,
    /// The goal classifier with every occurrence of the redex replaced.
    pub family: Family,
    /// Derivation of the redex body's lock type.
    pub body_derivation: Derivation,
}

/// A successful witness synthesis for a binder lock.
#[derive(Clone, Debug)]
pub struct SolveOutcome {
    pub witness: CanonicalObject,
    pub unlocked: Family,
    pub derivation: Derivation,
}

pub struct Checker<'a> {
    sig: &'a Signature,
    mode: SystemMode,
    oracle: &'a dyn PredicateEvaluator,
    max_steps: u64,
    steps: Cell<u64>,
}

impl<'a> Checker<'a> {
    pub fn new(sig: &'a Signature, mode: SystemMode, oracle: &'a dyn PredicateEvaluator) -> Self {
        Checker { sig, mode, oracle, max_steps: DEFAULT_MAX_STEPS, steps: Cell::new(0) }
    }

    pub fn with_max_steps(mut self, max_steps: u64) -> Self {
        self.max_steps = max_steps;
        self
    }

    pub fn mode(&self) -> SystemMode {
        self.mode
    }

    pub fn signature(&self) -> &'a Signature {
        self.sig
    }

    /// Rule applications since the current judgement started.
    pub fn steps_used(&self) -> u64 {
        self.steps.get()
    }

    fn reset_steps(&self) {
        self.steps.set(0);
    }

    fn tick(&self) -> Result<(), TypeError> {
        let n = self.steps.get() + 1;
        self.steps.set(n);
        if n > self.max_steps {
            Err(TypeError::Watchdog(self.max_steps))
        } else {
            Ok(())
        }
    }

    fn mode_ok(
        &self,
        r: Result<(), crate::syntax::ModeViolation>,
        what: &str,
    ) -> Result<(), TypeError> {
        r.map_err(|v| TypeError::ModeMismatch(format!("{what}: {v}")))
    }

    // ----- public entry points (reset the watchdog, validate the mode) -----

    /// Checks the checker's own signature, declaration by declaration.
    pub fn check_signature(&self) -> Result<Derivation, TypeError> {
        self.reset_steps();
        self.mode_ok(validate_mode_signature(self.sig, self.mode), "signature")?;
        let mut acc = Signature::new();
        let mut deriv = Derivation::leaf("sig-empty", "|- . sig".to_string());
        for decl in &self.sig.decls {
            if acc.contains(&decl.name) {
                return Err(TypeError::DuplicateName(decl.name.clone()));
            }
            let sub = Checker {
                sig: &acc,
                mode: self.mode,
                oracle: self.oracle,
                max_steps: self.max_steps,
                steps: Cell::new(self.steps.get()),
            };
            let (rule, classifier_deriv) = match &decl.classifier {
                SigClassifier::Fam(k) => (
                    "sig-kind",
                    sub.kind(&Context::new(), k).map_err(|inner| TypeError::IllFormedKind {
                        name: decl.name.clone(),
                        inner: Box::new(inner),
                    })?,
                ),
                SigClassifier::Obj(f) => (
                    "sig-type",
                    sub.family(&Context::new(), f).map_err(|inner| TypeError::IllFormedFamily {
                        name: decl.name.clone(),
                        inner: Box::new(inner),
                    })?,
                ),
            };
            self.steps.set(sub.steps.get());
            let conclusion = format!("|- .., {} : {} sig", decl.name, decl.classifier);
            deriv = Derivation::node(rule, conclusion, vec![deriv, classifier_deriv]);
            acc.decls.push(decl.clone());
        }
        Ok(deriv)
    }

    /// Checks a context against the checker's signature.
    pub fn check_context(&self, ctx: &Context) -> Result<Derivation, TypeError> {
        self.reset_steps();
        self.mode_ok(validate_mode_context(ctx, self.mode), "context")?;
        let mut acc = Context::new();
        let mut deriv = Derivation::leaf("ctx-empty", "|- . ctx".to_string());
        for (x, f) in &ctx.entries {
            if acc.entries.iter().any(|(y, _)| y.text == x.text) {
                return Err(TypeError::DuplicateVar(x.text.clone()));
            }
            let fd = self.family(&acc, f).map_err(|inner| TypeError::IllFormedFamily {
                name: x.text.clone(),
                inner: Box::new(inner),
            })?;
            deriv = Derivation::node(
                "ctx-type",
                format!("|- .., {} : {} ctx", x, f),
                vec![deriv, fd],
            );
            acc.entries.push((x.clone(), f.clone()));
        }
        Ok(deriv)
    }

    pub fn check_kind(&self, ctx: &Context, k: &Kind) -> Result<Derivation, TypeError> {
        self.reset_steps();
        self.mode_ok(validate_mode_kind(k, self.mode), "kind")?;
        self.kind(ctx, k)
    }

    pub fn check_family(&self, ctx: &Context, f: &Family) -> Result<Derivation, TypeError> {
        self.reset_steps();
        self.mode_ok(validate_mode_family(f, self.mode), "family")?;
        self.family(ctx, f)
    }

    pub fn synth_atomic_family(
        &self,
        ctx: &Context,
        p: &AtomicFamily,
    ) -> Result<(Kind, Derivation), TypeError> {
        self.reset_steps();
        self.afam(ctx, p)
    }

    /// Checks `ctx |- m <= f`. The classifier is assumed well-formed.
    pub fn check_object(
        &self,
        ctx: &Context,
        m: &CanonicalObject,
        f: &Family,
    ) -> Result<Derivation, TypeError> {
        self.reset_steps();
        self.mode_ok(validate_mode_object(m, self.mode), "object")?;
        self.mode_ok(validate_mode_family(f, self.mode), "classifier")?;
        self.object(ctx, m, f)
    }

    pub fn synth_atomic_object(
        &self,
        ctx: &Context,
        a: &AtomicObject,
    ) -> Result<(Family, Derivation), TypeError> {
        self.reset_steps();
        self.mode_ok(validate_mode_atomic_object(a, self.mode), "object")?;
        self.aobj(ctx, a)
    }

    /// One-shot dispatcher over the judgement forms.
    pub fn check_judgement(&self, j: &Judgement) -> Result<Derivation, TypeError> {
        match j {
            Judgement::Signature => self.check_signature(),
            Judgement::Context(ctx) => self.check_context(ctx),
            Judgement::Kind(ctx, k) => self.check_kind(ctx, k),
            Judgement::Family(ctx, f) => self.check_family(ctx, f),
            Judgement::Object(ctx, m, f) => self.check_object(ctx, m, f),
            Judgement::AtomicFamily(ctx, p) => self.synth_atomic_family(ctx, p).map(|(_, d)| d),
            Judgement::AtomicObject(ctx, a) => self.synth_atomic_object(ctx, a).map(|(_, d)| d),
        }
    }

    /// Asks the predicate of a binder lock for a witness, checks it, and
    /// returns the instantiated body. `Ok(None)` means the predicate
    /// searched its whole space and found nothing.
    pub fn solve_lock(&self, ctx: &Context, f: &Family) -> Result<Option<SolveOutcome>, TypeError> {
        self.reset_steps();
        self.mode_ok(validate_mode_family(f, self.mode), "family")?;
        let Family::Lock { pred, guard: LockGuard::Binder(hint), guard_ty, body } = f else {
            return Err(TypeError::NotLockType {
                body: "<solve goal>".to_string(),
                family: f.to_string(),
            });
        };
        if !self.oracle.knows(pred) {
            return Err(TypeError::UnknownPredicate(pred.clone()));
        }
        let q = SynthesisQuery {
            pred,
            sig: self.sig,
            ctx,
            classifier: guard_ty,
            mode: self.mode,
        };
        let witness = match self.oracle.synthesize(&q) {
            SynthesisOutcome::Witness(w) => w,
            SynthesisOutcome::NoWitness => return Ok(None),
            SynthesisOutcome::Unsupported(msg) => {
                return Err(TypeError::PredicateUnknown {
                    pred: pred.clone(),
                    judgement: format!("? <= {guard_ty}"),
                    reason: format!("unsupported: {msg}"),
                })
            }
        };
        let wd = self.object(ctx, &witness, guard_ty)?;
        let (verdict, record) = self.query(ctx, pred, &witness, guard_ty);
        match verdict {
            PredicateVerdict::Holds => {}
            PredicateVerdict::Fails(reason) => {
                return Err(TypeError::PredicateFailed {
                    pred: pred.clone(),
                    judgement: format!("{witness} <= {guard_ty}"),
                    reason,
                })
            }
            PredicateVerdict::Unknown(reason) => {
                return Err(TypeError::PredicateUnknown {
                    pred: pred.clone(),
                    judgement: format!("{witness} <= {guard_ty}"),
                    reason: reason.to_string(),
                })
            }
        }
        let unlocked = instantiate_family(body, hint.as_str(), &witness, &erase(guard_ty))?;
        let mut deriv = Derivation::node(
            "solve",
            format!("{}|- {} solved by {} unlocking {}", ctx_prefix(ctx), f, witness, unlocked),
            vec![wd],
        );
        deriv.queries.push(record);
        Ok(Some(SolveOutcome { witness, unlocked, derivation: deriv }))
    }

    // ----- kinds -----

    fn kind(&self, ctx: &Context, k: &Kind) -> Result<Derivation, TypeError> {
        self.tick()?;
        match k {
            Kind::Type => Ok(Derivation::leaf("k-type", format!("{}|- Type kind", ctx_prefix(ctx)))),
            Kind::Pi(dom, hint, body) => {
                let dd = self.family(ctx, dom)?;
                let x = VarName::fresh(hint.as_str());
                let opened = body.open_var(&x);
                let inner = ctx.extended(x, (**dom).clone());
                let bd = self.kind(&inner, &opened)?;
                Ok(Derivation::node(
                    "k-pi",
                    format!("{}|- {} kind", ctx_prefix(ctx), k),
                    vec![dd, bd],
                ))
            }
        }
    }

    // ----- families -----

    fn afam(&self, ctx: &Context, p: &AtomicFamily) -> Result<(Kind, Derivation), TypeError> {
        self.tick()?;
        match p {
            AtomicFamily::Const(name) => match self.sig.fam_const(name) {
                Some(k) => Ok((
                    k.clone(),
                    Derivation::leaf("a-const", format!("{}|- {} => {}", ctx_prefix(ctx), name, k)),
                )),
                None => Err(TypeError::UnknownFamily(name.clone())),
            },
            AtomicFamily::App(head, arg) => {
                let (hk, hd) = self.afam(ctx, head)?;
                let Kind::Pi(dom, hint, body) = &hk else {
                    return Err(TypeError::NotPiKind { head: head.to_string(), kind: hk.to_string() });
                };
                let ad = self.object(ctx, arg, dom).map_err(|inner| TypeError::ArgCheckFailed {
                    arg: arg.to_string(),
                    dom: dom.to_string(),
                    inner: Box::new(inner),
                })?;
                let k = instantiate_kind(body, hint.as_str(), arg, &erase(dom))?;
                Ok((
                    k.clone(),
                    Derivation::node(
                        "a-app",
                        format!("{}|- {} => {}", ctx_prefix(ctx), p, k),
                        vec![hd, ad],
                    ),
                ))
            }
        }
    }

    fn family(&self, ctx: &Context, f: &Family) -> Result<Derivation, TypeError> {
        self.tick()?;
        match f {
            Family::Atom(p) => {
                let (k, pd) = self.afam(ctx, p)?;
                if k != Kind::Type {
                    return Err(TypeError::NotAType { family: p.to_string(), kind: k.to_string() });
                }
                Ok(Derivation::node(
                    "f-atom",
                    format!("{}|- {} type", ctx_prefix(ctx), f),
                    vec![pd],
                ))
            }
            Family::Pi(dom, hint, body) => {
                let dd = self.family(ctx, dom)?;
                let x = VarName::fresh(hint.as_str());
                let opened = body.open_var(&x);
                let inner = ctx.extended(x, (**dom).clone());
                let bd = self.family(&inner, &opened)?;
                Ok(Derivation::node(
                    "f-pi",
                    format!("{}|- {} type", ctx_prefix(ctx), f),
                    vec![dd, bd],
                ))
            }
            Family::Lock { pred, guard, guard_ty, body } => {
                let gtd = self.family(ctx, guard_ty)?;
                match guard {
                    LockGuard::Term(n) => {
                        let nd = self.object(ctx, n, guard_ty)?;
                        let spec = LockSpec {
                            pred: pred.clone(),
                            witness: (**n).clone(),
                            guard_ty: (**guard_ty).clone(),
                            binder: false,
                        };
                        let (bd, _) = self.lock_family_body(ctx, body, &spec, f)?;
                        Ok(Derivation::node(
                            "f-lock",
                            format!("{}|- {} type", ctx_prefix(ctx), f),
                            vec![gtd, nd, bd],
                        ))
                    }
                    LockGuard::Binder(hint) => {
                        let v = VarName::fresh(hint.as_str());
                        let opened = body.open_var(&v);
                        let inner = ctx.extended(v.clone(), (**guard_ty).clone());
                        let spec = LockSpec {
                            pred: pred.clone(),
                            witness: CanonicalObject::var(v),
                            guard_ty: (**guard_ty).clone(),
                            binder: true,
                        };
                        let (bd, _) = self.lock_family_body(&inner, &opened, &spec, f)?;
                        Ok(Derivation::node(
                            "f-lock",
                            format!("{}|- {} type", ctx_prefix(ctx), f),
                            vec![gtd, bd],
                        ))
                    }
                }
            }
        }
    }

    /// Checks the body of a lock family, first abstracting out every nested
    /// unlock that matches the enclosing lock. Returns the derivation and
    /// the number of redexes abstracted.
    fn lock_family_body(
        &self,
        ctx: &Context,
        body: &Family,
        spec: &LockSpec,
        whole: &Family,
    ) -> Result<(Derivation, usize), TypeError> {
        self.tick()?;
        match self.abstract_in(ctx, None, body, spec)? {
            Some(abs) => {
                let inner = ctx.extended(abs.var.clone(), abs.classifier.clone());
                let (bd, n) = self.lock_family_body(&inner, &abs.family, spec, whole)?;
                Ok((
                    Derivation::node(
                        "f-nested-unlock",
                        format!("{}|- {} type", ctx_prefix(ctx), whole),
                        vec![abs.body_derivation, bd],
                    ),
                    n + 1,
                ))
            }
            None => Ok((self.family(ctx, body)?, 0)),
        }
    }

    // ----- atomic objects (synthesis) -----

    fn aobj(&self, ctx: &Context, a: &AtomicObject) -> Result<(Family, Derivation), TypeError> {
        self.tick()?;
        match a {
            AtomicObject::Const(name) => match self.sig.obj_const(name) {
                Some(f) => Ok((
                    f.clone(),
                    Derivation::leaf("o-const", format!("{}|- {} => {}", ctx_prefix(ctx), name, f)),
                )),
                None => Err(TypeError::UnknownConst(name.clone())),
            },
            AtomicObject::FVar(x) => match ctx.lookup(x) {
                Some(f) => Ok((
                    f.clone(),
                    Derivation::leaf("o-var", format!("{}|- {} => {}", ctx_prefix(ctx), x, f)),
                )),
                None => Err(TypeError::UnknownVar(x.text.clone())),
            },
            AtomicObject::BVar(_) => {
                unreachable!("checking inputs are locally closed; binders are opened on descent")
            }
            AtomicObject::App(head, arg) => {
                let (hf, hd) = self.aobj(ctx, head)?;
                let Family::Pi(dom, hint, body) = &hf else {
                    return Err(TypeError::NotPiType {
                        head: head.to_string(),
                        family: hf.to_string(),
                    });
                };
                let ad = self.object(ctx, arg, dom)?;
                let f = instantiate_family(body, hint.as_str(), arg, &erase(dom))?;
                Ok((
                    f.clone(),
                    Derivation::node(
                        "o-app",
                        format!("{}|- {} => {}", ctx_prefix(ctx), a, f),
                        vec![hd, ad],
                    ),
                ))
            }
            AtomicObject::Unlock { pred, witness, witness_ty, body } => {
                let (bf, bd) = self.aobj(ctx, body)?;
                let Family::Lock { pred: lp, guard, guard_ty, body: lbody } = &bf else {
                    return Err(TypeError::NotLockType {
                        body: body.to_string(),
                        family: bf.to_string(),
                    });
                };
                let annotation_fits = pred == lp
                    && witness_ty.as_ref() == guard_ty.as_ref()
                    && match guard {
                        LockGuard::Term(n) => witness.as_ref() == n.as_ref(),
                        LockGuard::Binder(_) => true,
                    };
                if !annotation_fits {
                    return Err(TypeError::GuardMismatch {
                        annotation: a.to_string(),
                        lock: bf.to_string(),
                    });
                }
                let wd = self.object(ctx, witness, witness_ty)?;
                if !self.oracle.knows(pred) {
                    return Err(TypeError::UnknownPredicate(pred.clone()));
                }
                let (verdict, record) = self.query(ctx, pred, witness, witness_ty);
                match verdict {
                    PredicateVerdict::Holds => {}
                    PredicateVerdict::Fails(reason) => {
                        return Err(TypeError::PredicateFailed {
                            pred: pred.clone(),
                            judgement: format!("{witness} <= {witness_ty}"),
                            reason,
                        })
                    }
                    PredicateVerdict::Unknown(reason) => {
                        return Err(TypeError::PredicateUnknown {
                            pred: pred.clone(),
                            judgement: format!("{witness} <= {witness_ty}"),
                            reason: reason.to_string(),
                        })
                    }
                }
                let result = match guard {
                    LockGuard::Term(_) => (**lbody).clone(),
                    LockGuard::Binder(hint) => {
                        instantiate_family(lbody, hint.as_str(), witness, &erase(guard_ty))?
                    }
                };
                let mut deriv = Derivation::node(
                    "o-unlock",
                    format!("{}|- {} => {}", ctx_prefix(ctx), a, result),
                    vec![bd, wd],
                );
                deriv.queries.push(record);
                Ok((result, deriv))
            }
        }
    }

    // ----- canonical objects (checking) -----

    fn object(&self, ctx: &Context, m: &CanonicalObject, f: &Family) -> Result<Derivation, TypeError> {
        self.tick()?;
        match m {
            CanonicalObject::Atom(a) => {
                if !f.is_atomic() {
                    return Err(TypeError::NotEtaLong {
                        term: m.to_string(),
                        family: f.to_string(),
                    });
                }
                let (synth, ad) = self.aobj(ctx, a)?;
                if &synth != f {
                    return Err(TypeError::TypeMismatch {
                        term: m.to_string(),
                        expected: f.to_string(),
                        detail: format!("it synthesizes `{synth}`"),
                    });
                }
                Ok(Derivation::node(
                    "o-atom",
                    format!("{}|- {} <= {}", ctx_prefix(ctx), m, f),
                    vec![ad],
                ))
            }
            CanonicalObject::Abs(ann, hint, body) => {
                let Family::Pi(dom, _, fbody) = f else {
                    return Err(TypeError::TypeMismatch {
                        term: m.to_string(),
                        expected: f.to_string(),
                        detail: "the term is an abstraction but the classifier is not a product"
                            .to_string(),
                    });
                };
                if ann.as_ref() != dom.as_ref() {
                    return Err(TypeError::TypeMismatch {
                        term: m.to_string(),
                        expected: f.to_string(),
                        detail: format!(
                            "the binder annotation `{ann}` differs from the domain `{dom}`"
                        ),
                    });
                }
                let x = VarName::fresh(hint.as_str());
                let mb = body.open_var(&x);
                let fb = fbody.open_var(&x);
                let inner = ctx.extended(x, (**dom).clone());
                let bd = self.object(&inner, &mb, &fb)?;
                Ok(Derivation::node(
                    "o-abs",
                    format!("{}|- {} <= {}", ctx_prefix(ctx), m, f),
                    vec![bd],
                ))
            }
            CanonicalObject::Lock { pred, guard, guard_ty, body } => {
                let Family::Lock { pred: fp, guard: fguard, guard_ty: fgt, body: fbody } = f else {
                    return Err(TypeError::TypeMismatch {
                        term: m.to_string(),
                        expected: f.to_string(),
                        detail: "the term is a lock but the classifier is not a lock type"
                            .to_string(),
                    });
                };
                if pred != fp || guard_ty.as_ref() != fgt.as_ref() {
                    return Err(TypeError::TypeMismatch {
                        term: m.to_string(),
                        expected: f.to_string(),
                        detail: "the lock annotation differs from the classifier's".to_string(),
                    });
                }
                match (guard, fguard) {
                    (LockGuard::Term(n), LockGuard::Term(fn_)) => {
                        if n.as_ref() != fn_.as_ref() {
                            return Err(TypeError::TypeMismatch {
                                term: m.to_string(),
                                expected: f.to_string(),
                                detail: "the lock guard differs from the classifier's".to_string(),
                            });
                        }
                        let spec = LockSpec {
                            pred: pred.clone(),
                            witness: (**n).clone(),
                            guard_ty: (**guard_ty).clone(),
                            binder: false,
                        };
                        self.lock_object_body(ctx, body, fbody, &spec, m, f)
                    }
                    (LockGuard::Binder(hint), LockGuard::Binder(_)) => {
                        let v = VarName::fresh(hint.as_str());
                        let mb = body.open_var(&v);
                        let fb = fbody.open_var(&v);
                        let inner = ctx.extended(v.clone(), (**guard_ty).clone());
                        let spec = LockSpec {
                            pred: pred.clone(),
                            witness: CanonicalObject::var(v),
                            guard_ty: (**guard_ty).clone(),
                            binder: true,
                        };
                        self.lock_object_body(&inner, &mb, &fb, &spec, m, f)
                    }
                    _ => Err(TypeError::TypeMismatch {
                        term: m.to_string(),
                        expected: f.to_string(),
                        detail: "the lock binds a witness on one side only".to_string(),
                    }),
                }
            }
        }
    }

    /// Checks an (opened) lock body against the (opened) classifier body,
    /// abstracting matching nested unlocks first.
    fn lock_object_body(
        &self,
        ctx: &Context,
        body: &CanonicalObject,
        fbody: &Family,
        spec: &LockSpec,
        whole_term: &CanonicalObject,
        whole_family: &Family,
    ) -> Result<Derivation, TypeError> {
        self.tick()?;
        match self.abstract_in(ctx, Some(body), fbody, spec)? {
            Some(abs) => {
                let inner = ctx.extended(abs.var.clone(), abs.classifier.clone());
                let abstracted = abs.object.expect("object scan requested");
                let bd =
                    self.lock_object_body(&inner, &abstracted, &abs.family, spec, whole_term, whole_family)?;
                Ok(Derivation::node(
                    "o-nested-unlock",
                    format!("{}|- {} <= {}", ctx_prefix(ctx), whole_term, whole_family),
                    vec![abs.body_derivation, bd],
                ))
            }
            None => {
                let bd = self.object(ctx, body, fbody)?;
                Ok(Derivation::node(
                    "o-lock",
                    format!("{}|- {} <= {}", ctx_prefix(ctx), whole_term, whole_family),
                    vec![bd],
                ))
            }
        }
    }

    // ----- nested-unlock abstraction -----

    /// Scans the classifier, then the term, for the first unlock whose
    /// annotation matches the enclosing lock; synthesizes its body's lock
    /// type and replaces every occurrence of the redex in both by one fresh
    /// variable. `Ok(None)` means no matching unlock exists anywhere.
    pub fn abstract_unlock(
        &self,
        ctx: &Context,
        m: &CanonicalObject,
        rho: &Family,
        outer: &LockSpec,
    ) -> Result<Option<AbstractedUnlock>, TypeError> {
        self.abstract_in(ctx, Some(m), rho, outer)
    }

    fn abstract_in(
        &self,
        ctx: &Context,
        m: Option<&CanonicalObject>,
        rho: &Family,
        outer: &LockSpec,
    ) -> Result<Option<AbstractedUnlock>, TypeError> {
        let redex = match find_redex_family(rho, outer) {
            Some(r) => Some(r),
            None => m.and_then(|m| find_redex_object(m, outer)),
        };
        let Some(redex) = redex else { return Ok(None) };
        let AtomicObject::Unlock { body, .. } = &redex else { unreachable!() };

        let (bf, bd) = self.aobj(ctx, body)?;
        let Family::Lock { pred, guard, guard_ty, body: lbody } = &bf else {
            return Err(TypeError::NestedUnlockMismatch {
                redex: redex.to_string(),
                detail: format!("its body synthesizes `{bf}`, which is not a lock type"),
            });
        };
        if *pred != outer.pred || guard_ty.as_ref() != &outer.guard_ty {
            return Err(TypeError::NestedUnlockMismatch {
                redex: redex.to_string(),
                detail: format!(
                    "its body provides the lock `{bf}`, not the enclosing one"
                ),
            });
        }
        let tau = match (guard, outer.binder) {
            (LockGuard::Term(n), false) => {
                if n.as_ref() != &outer.witness {
                    return Err(TypeError::NestedUnlockMismatch {
                        redex: redex.to_string(),
                        detail: format!(
                            "its body provides the lock `{bf}`, whose guard differs from the enclosing one"
                        ),
                    });
                }
                (**lbody).clone()
            }
            (LockGuard::Binder(hint), true) => {
                instantiate_family(lbody, hint.as_str(), &outer.witness, &erase(guard_ty))?
            }
            _ => {
                return Err(TypeError::NestedUnlockMismatch {
                    redex: redex.to_string(),
                    detail: "its body's lock and the enclosing lock disagree about binding a witness"
                        .to_string(),
                })
            }
        };
        let x = VarName::fresh("u");
        let family = replace_in_family(rho, &redex, &x);
        let object = m.map(|m| replace_in_object(m, &redex, &x));
        Ok(Some(AbstractedUnlock {
            var: x,
            classifier: tau,
            body: (**body).clone(),
            redex,
            object,
            family,
            body_derivation: bd,
        }))
    }

    // ----- predicate queries -----

    fn query(
        &self,
        ctx: &Context,
        pred: &Name,
        subject: &CanonicalObject,
        classifier: &Family,
    ) -> (PredicateVerdict, QueryRecord) {
        let q = PredicateQuery {
            pred,
            sig: self.sig,
            ctx,
            subject,
            classifier,
            mode: self.mode,
        };
        let verdict = self.oracle.check(&q);
        let record = QueryRecord {
            pred: pred.clone(),
            subject: subject.to_string(),
            classifier: classifier.to_string(),
            verdict: verdict.to_string(),
        };
        (verdict, record)
    }
}

fn ctx_prefix(ctx: &Context) -> String {
    if ctx.is_empty() {
        String::new()
    } else {
        format!("{ctx} ")
    }
}

/// Does this unlock's annotation match the enclosing lock?
fn annotation_matches(a: &AtomicObject, outer: &LockSpec) -> bool {
    let AtomicObject::Unlock { pred, witness, witness_ty, .. } = a else { return false };
    *pred == outer.pred
        && witness.as_ref() == &outer.witness
        && witness_ty.as_ref() == &outer.guard_ty
}

fn find_redex_object(m: &CanonicalObject, outer: &LockSpec) -> Option<AtomicObject> {
    match m {
        CanonicalObject::Atom(a) => find_redex_atomic(a, outer),
        CanonicalObject::Abs(ann, _, body) => {
            find_redex_family(ann, outer).or_else(|| find_redex_object(body, outer))
        }
        CanonicalObject::Lock { guard, guard_ty, body, .. } => match guard {
            LockGuard::Term(n) => find_redex_object(n, outer)
                .or_else(|| find_redex_family(guard_ty, outer))
                .or_else(|| find_redex_object(body, outer)),
            LockGuard::Binder(_) => {
                find_redex_family(guard_ty, outer).or_else(|| find_redex_object(body, outer))
            }
        },
    }
}

/// Outermost-first: an unlock is a candidate before its own subterms are.
/// The candidate must also be closed in the ambient context: an unlock that
/// uses a variable of an unopened binder cannot be abstracted past it and is
/// left for the ordinary rules.
fn find_redex_atomic(a: &AtomicObject, outer: &LockSpec) -> Option<AtomicObject> {
    if annotation_matches(a, outer) && a.is_locally_closed() {
        return Some(a.clone());
    }
    match a {
        AtomicObject::Const(_) | AtomicObject::FVar(_) | AtomicObject::BVar(_) => None,
        AtomicObject::App(head, arg) => {
            find_redex_atomic(head, outer).or_else(|| find_redex_object(arg, outer))
        }
        AtomicObject::Unlock { witness, witness_ty, body, .. } => find_redex_object(witness, outer)
            .or_else(|| find_redex_family(witness_ty, outer))
            .or_else(|| find_redex_atomic(body, outer)),
    }
}

fn find_redex_family(f: &Family, outer: &LockSpec) -> Option<AtomicObject> {
    match f {
        Family::Atom(p) => find_redex_atomic_family(p, outer),
        Family::Pi(dom, _, body) => {
            find_redex_family(dom, outer).or_else(|| find_redex_family(body, outer))
        }
        Family::Lock { guard, guard_ty, body, .. } => match guard {
            LockGuard::Term(n) => find_redex_object(n, outer)
                .or_else(|| find_redex_family(guard_ty, outer))
                .or_else(|| find_redex_family(body, outer)),
            LockGuard::Binder(_) => {
                find_redex_family(guard_ty, outer).or_else(|| find_redex_family(body, outer))
            }
        },
    }
}

fn find_redex_atomic_family(p: &AtomicFamily, outer: &LockSpec) -> Option<AtomicObject> {
    match p {
        AtomicFamily::Const(_) => None,
        AtomicFamily::App(head, arg) => {
            find_redex_atomic_family(head, outer).or_else(|| find_redex_object(arg, outer))
        }
    }
}

// Replacement of every occurrence of a (locally closed) atomic subterm by a
// free variable. The target contains no dangling indices, so descending
// under binders without shifting is sound, and the replacement variable is
// fresh, so capture is impossible.

fn replace_in_object(m: &CanonicalObject, target: &AtomicObject, x: &VarName) -> CanonicalObject {
    match m {
        CanonicalObject::Atom(a) => CanonicalObject::Atom(replace_in_atomic(a, target, x)),
        CanonicalObject::Abs(ann, hint, body) => CanonicalObject::Abs(
            Box::new(replace_in_family(ann, target, x)),
            hint.clone(),
            Box::new(replace_in_object(body, target, x)),
        ),
        CanonicalObject::Lock { pred, guard, guard_ty, body } => CanonicalObject::Lock {
            pred: pred.clone(),
            guard: replace_in_guard(guard, target, x),
            guard_ty: Box::new(replace_in_family(guard_ty, target, x)),
            body: Box::new(replace_in_object(body, target, x)),
        },
    }
}

fn replace_in_atomic(a: &AtomicObject, target: &AtomicObject, x: &VarName) -> AtomicObject {
    if a == target {
        return AtomicObject::FVar(x.clone());
    }
    match a {
        AtomicObject::Const(_) | AtomicObject::FVar(_) | AtomicObject::BVar(_) => a.clone(),
        AtomicObject::App(head, arg) => AtomicObject::App(
            Box::new(replace_in_atomic(head, target, x)),
            Box::new(replace_in_object(arg, target, x)),
        ),
        AtomicObject::Unlock { pred, witness, witness_ty, body } => AtomicObject::Unlock {
            pred: pred.clone(),
            witness: Box::new(replace_in_object(witness, target, x)),
            witness_ty: Box::new(replace_in_family(witness_ty, target, x)),
            body: Box::new(replace_in_atomic(body, target, x)),
        },
    }
}

fn replace_in_guard(g: &LockGuard, target: &AtomicObject, x: &VarName) -> LockGuard {
    match g {
        LockGuard::Term(n) => LockGuard::Term(Box::new(replace_in_object(n, target, x))),
        LockGuard::Binder(h) => LockGuard::Binder(h.clone()),
    }
}

fn replace_in_family(f: &Family, target: &AtomicObject, x: &VarName) -> Family {
    match f {
        Family::Atom(p) => Family::Atom(replace_in_atomic_family(p, target, x)),
        Family::Pi(dom, hint, body) => Family::Pi(
            Box::new(replace_in_family(dom, target, x)),
            hint.clone(),
            Box::new(replace_in_family(body, target, x)),
        ),
        Family::Lock { pred, guard, guard_ty, body } => Family::Lock {
            pred: pred.clone(),
            guard: replace_in_guard(guard, target, x),
            guard_ty: Box::new(replace_in_family(guard_ty, target, x)),
            body: Box::new(replace_in_family(body, target, x)),
        },
    }
}

fn replace_in_atomic_family(p: &AtomicFamily, target: &AtomicObject, x: &VarName) -> AtomicFamily {
    match p {
        AtomicFamily::Const(_) => p.clone(),
        AtomicFamily::App(head, arg) => AtomicFamily::App(
            Box::new(replace_in_atomic_family(head, target, x)),
            Box::new(replace_in_object(arg, target, x)),
        ),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hsubst::instantiate_object;
    use crate::predicates::UnknownReason;
    use crate::syntax::build::*;

    struct Static(PredicateVerdict);

    impl PredicateEvaluator for Static {
        fn knows(&self, _pred: &str) -> bool {
            true
        }
        fn check(&self, _q: &PredicateQuery<'_>) -> PredicateVerdict {
            self.0.clone()
        }
        fn synthesize(&self, _q: &SynthesisQuery<'_>) -> SynthesisOutcome {
            SynthesisOutcome::Unsupported("static test oracle".to_string())
        }
    }

    fn holds() -> Static {
        Static(PredicateVerdict::Holds)
    }

    /// Panics if any predicate is ever consulted; rules that must not query
    /// are checked under this oracle.
    struct NeverQueried;

    impl PredicateEvaluator for NeverQueried {
        fn knows(&self, _pred: &str) -> bool {
            true
        }
        fn check(&self, q: &PredicateQuery<'_>) -> PredicateVerdict {
            panic!("predicate {} was evaluated", q.pred)
        }
        fn synthesize(&self, q: &SynthesisQuery<'_>) -> SynthesisOutcome {
            panic!("predicate {} was asked for a witness", q.pred)
        }
    }

    struct Unregistered;

    impl PredicateEvaluator for Unregistered {
        fn knows(&self, _pred: &str) -> bool {
            false
        }
        fn check(&self, _q: &PredicateQuery<'_>) -> PredicateVerdict {
            unreachable!("unregistered oracles are never queried")
        }
        fn synthesize(&self, _q: &SynthesisQuery<'_>) -> SynthesisOutcome {
            unreachable!("unregistered oracles are never queried")
        }
    }

    struct GivesWitness(CanonicalObject);

    impl PredicateEvaluator for GivesWitness {
        fn knows(&self, _pred: &str) -> bool {
            true
        }
        fn check(&self, _q: &PredicateQuery<'_>) -> PredicateVerdict {
            PredicateVerdict::Holds
        }
        fn synthesize(&self, _q: &SynthesisQuery<'_>) -> SynthesisOutcome {
            SynthesisOutcome::Witness(self.0.clone())
        }
    }

    struct NoWitnessFound;

    impl PredicateEvaluator for NoWitnessFound {
        fn knows(&self, _pred: &str) -> bool {
            true
        }
        fn check(&self, _q: &PredicateQuery<'_>) -> PredicateVerdict {
            PredicateVerdict::Holds
        }
        fn synthesize(&self, _q: &SynthesisQuery<'_>) -> SynthesisOutcome {
            SynthesisOutcome::NoWitness
        }
    }

    fn sig_p() -> Signature {
        let mut sig = Signature::new();
        sig.push_fam("a", Kind::Type);
        sig.push_fam("b", karrow(fconst("a"), Kind::Type));
        sig.push_obj("c", fconst("a"));
        sig.push_obj("c2", fconst("a"));
        sig.push_obj("d", arrow(fconst("a"), fconst("a")));
        sig.push_obj("f", pi("x", fconst("a"), |x| fatom("b", [x])));
        sig.push_obj("mk", arrow(fconst("a"), arrow(fconst("a"), fconst("a"))));
        sig
    }

    fn sig_pq() -> Signature {
        let mut sig = Signature::new();
        sig.push_fam("nat", Kind::Type);
        sig.push_obj("three", fconst("nat"));
        sig.push_fam("b", karrow(fconst("nat"), Kind::Type));
        sig.push_obj("c", flock_pq("P", "w", fconst("nat"), |w| fatom("b", [w])));
        sig
    }

    fn head(m: &CanonicalObject) -> AtomicObject {
        match m {
            CanonicalObject::Atom(a) => a.clone(),
            _ => panic!("expected an atomic object"),
        }
    }

    fn count_rule(d: &Derivation, rule: &str) -> usize {
        let here = usize::from(d.rule == rule);
        here + d.premises.iter().map(|p| count_rule(p, rule)).sum::<usize>()
    }

    #[test]
    fn var_synthesizes_its_declared_type() {
        let sig = sig_p();
        let oracle = holds();
        let ck = Checker::new(&sig, SystemMode::P, &oracle);
        let x = VarName::fresh("x");
        let ctx = Context::new().extended(x.clone(), fconst("a"));
        let (fam, d) = ck.synth_atomic_object(&ctx, &ovar(&x)).unwrap();
        assert_eq!(fam, fconst("a"));
        assert_eq!(d.rule, "o-var");
    }

    #[test]
    fn constant_synthesizes_its_declared_type() {
        let sig = sig_p();
        let oracle = holds();
        let ck = Checker::new(&sig, SystemMode::P, &oracle);
        let (fam, d) = ck.synth_atomic_object(&Context::new(), &oconst("c")).unwrap();
        assert_eq!(fam, fconst("a"));
        assert_eq!(d.rule, "o-const");
    }

    #[test]
    fn application_instantiates_the_codomain() {
        let sig = sig_p();
        let oracle = holds();
        let ck = Checker::new(&sig, SystemMode::P, &oracle);
        let term = app(oconst("f"), atom(oconst("c")));
        let (fam, d) = ck.synth_atomic_object(&Context::new(), &term).unwrap();
        assert_eq!(fam, fatom("b", [atom(oconst("c"))]));
        assert_eq!(d.rule, "o-app");
    }

    #[test]
    fn eta_short_variable_is_rejected() {
        let sig = sig_p();
        let oracle = holds();
        let ck = Checker::new(&sig, SystemMode::P, &oracle);
        let pia = pi("z", fconst("a"), |_| fconst("a"));
        let x = VarName::fresh("x");
        let ctx = Context::new().extended(x.clone(), pia.clone());
        let err = ck.check_object(&ctx, &atom(ovar(&x)), &pia).unwrap_err();
        assert_eq!(err.code(), "NotEtaLong");
    }

    #[test]
    fn eta_long_expansion_is_accepted() {
        let sig = sig_p();
        let oracle = holds();
        let ck = Checker::new(&sig, SystemMode::P, &oracle);
        let pia = pi("z", fconst("a"), |_| fconst("a"));
        let m = abs("x", pia.clone(), |x| {
            abs("y", fconst("a"), move |y| atom(app(head(&x), y)))
        });
        let cls = pi("x", pia, |_| pi("z", fconst("a"), |_| fconst("a")));
        ck.check_object(&Context::new(), &m, &cls).unwrap();
    }

    #[test]
    fn eta_short_lock_variable_is_rejected_without_querying() {
        let sig = sig_p();
        let oracle = NeverQueried;
        let ck = Checker::new(&sig, SystemMode::P, &oracle);
        let lty = flock("Opaque", atom(oconst("c")), fconst("a"), fconst("a"));
        let x = VarName::fresh("x");
        let ctx = Context::new().extended(x.clone(), lty.clone());
        let err = ck.check_object(&ctx, &atom(ovar(&x)), &lty).unwrap_err();
        assert_eq!(err.code(), "NotEtaLong");
    }

    #[test]
    fn lock_eta_expansion_checks_without_querying() {
        let sig = sig_p();
        let oracle = NeverQueried;
        let ck = Checker::new(&sig, SystemMode::P, &oracle);
        let lty = flock("Opaque", atom(oconst("c")), fconst("a"), fconst("a"));
        let x = VarName::fresh("x");
        let ctx = Context::new().extended(x.clone(), lty.clone());
        let m = olock(
            "Opaque",
            atom(oconst("c")),
            fconst("a"),
            atom(unlock("Opaque", atom(oconst("c")), fconst("a"), ovar(&x))),
        );
        let d = ck.check_object(&ctx, &m, &lty).unwrap();
        assert_eq!(count_rule(&d, "o-nested-unlock"), 1);
        assert!(d.all_queries().is_empty());
    }

    #[test]
    fn plain_lock_checks_its_body_without_querying() {
        let sig = sig_p();
        let oracle = NeverQueried;
        let ck = Checker::new(&sig, SystemMode::P, &oracle);
        let lty = flock("Opaque", atom(oconst("c")), fconst("a"), fconst("a"));
        let m = olock("Opaque", atom(oconst("c")), fconst("a"), atom(oconst("c2")));
        let d = ck.check_object(&Context::new(), &m, &lty).unwrap();
        assert_eq!(d.rule, "o-lock");
        assert!(d.all_queries().is_empty());
    }

    #[test]
    fn unlock_queries_the_predicate_and_returns_the_lock_body() {
        let sig = sig_p();
        let oracle = holds();
        let ck = Checker::new(&sig, SystemMode::P, &oracle);
        let lty = flock("P", atom(oconst("c")), fconst("a"), fconst("a"));
        let x = VarName::fresh("x");
        let ctx = Context::new().extended(x.clone(), lty);
        let term = unlock("P", atom(oconst("c")), fconst("a"), ovar(&x));
        let (fam, d) = ck.synth_atomic_object(&ctx, &term).unwrap();
        assert_eq!(fam, fconst("a"));
        assert_eq!(d.rule, "o-unlock");
        let queries = d.all_queries();
        assert_eq!(queries.len(), 1);
        assert_eq!(&*queries[0].pred, "P");
        assert_eq!(queries[0].verdict, "holds");
    }

    #[test]
    fn unlock_with_failing_predicate_reports_the_verdict() {
        let sig = sig_p();
        let oracle = Static(PredicateVerdict::Fails("counterexample".to_string()));
        let ck = Checker::new(&sig, SystemMode::P, &oracle);
        let lty = flock("P", atom(oconst("c")), fconst("a"), fconst("a"));
        let x = VarName::fresh("x");
        let ctx = Context::new().extended(x.clone(), lty);
        let term = unlock("P", atom(oconst("c")), fconst("a"), ovar(&x));
        let err = ck.synth_atomic_object(&ctx, &term).unwrap_err();
        assert_eq!(err.code(), "PredicateFailed");
        assert!(err.to_string().contains("counterexample"));
    }

    #[test]
    fn unlock_with_undecided_predicate_is_an_error() {
        let sig = sig_p();
        let oracle = Static(PredicateVerdict::Unknown(UnknownReason::Fuel));
        let ck = Checker::new(&sig, SystemMode::P, &oracle);
        let lty = flock("P", atom(oconst("c")), fconst("a"), fconst("a"));
        let x = VarName::fresh("x");
        let ctx = Context::new().extended(x.clone(), lty);
        let term = unlock("P", atom(oconst("c")), fconst("a"), ovar(&x));
        let err = ck.synth_atomic_object(&ctx, &term).unwrap_err();
        assert_eq!(err.code(), "PredicateUnknown");
    }

    #[test]
    fn unlock_of_unregistered_predicate_is_an_error() {
        let sig = sig_p();
        let oracle = Unregistered;
        let ck = Checker::new(&sig, SystemMode::P, &oracle);
        let lty = flock("P", atom(oconst("c")), fconst("a"), fconst("a"));
        let x = VarName::fresh("x");
        let ctx = Context::new().extended(x.clone(), lty);
        let term = unlock("P", atom(oconst("c")), fconst("a"), ovar(&x));
        let err = ck.synth_atomic_object(&ctx, &term).unwrap_err();
        assert_eq!(err.code(), "UnknownPredicate");
    }

    #[test]
    fn lock_formation_does_not_need_a_registered_predicate() {
        let sig = sig_p();
        let oracle = Unregistered;
        let ck = Checker::new(&sig, SystemMode::P, &oracle);
        let lty = flock("P", atom(oconst("c")), fconst("a"), fconst("a"));
        ck.check_family(&Context::new(), &lty).unwrap();
    }

    #[test]
    fn binder_unlock_substitutes_the_witness() {
        let sig = sig_pq();
        let oracle = holds();
        let ck = Checker::new(&sig, SystemMode::Pq, &oracle);
        let term = unlock("P", atom(oconst("three")), fconst("nat"), oconst("c"));
        let (fam, d) = ck.synth_atomic_object(&Context::new(), &term).unwrap();
        assert_eq!(fam, fatom("b", [atom(oconst("three"))]));
        assert_eq!(d.all_queries().len(), 1);
    }

    #[test]
    fn unlock_witness_must_match_the_lock_guard() {
        let sig = sig_p();
        let oracle = holds();
        let ck = Checker::new(&sig, SystemMode::P, &oracle);
        let lty = flock("P", atom(oconst("c")), fconst("a"), fconst("a"));
        let x = VarName::fresh("x");
        let ctx = Context::new().extended(x.clone(), lty);
        let term = unlock("P", atom(oconst("c2")), fconst("a"), ovar(&x));
        let err = ck.synth_atomic_object(&ctx, &term).unwrap_err();
        assert_eq!(err.code(), "GuardMismatch");
    }

    #[test]
    fn unlock_predicate_must_match_the_lock_predicate() {
        let sig = sig_p();
        let oracle = holds();
        let ck = Checker::new(&sig, SystemMode::P, &oracle);
        let lty = flock("P", atom(oconst("c")), fconst("a"), fconst("a"));
        let x = VarName::fresh("x");
        let ctx = Context::new().extended(x.clone(), lty);
        let term = unlock("Q", atom(oconst("c")), fconst("a"), ovar(&x));
        let err = ck.synth_atomic_object(&ctx, &term).unwrap_err();
        assert_eq!(err.code(), "GuardMismatch");
    }

    #[test]
    fn unlock_of_a_non_lock_is_an_error() {
        let sig = sig_p();
        let oracle = holds();
        let ck = Checker::new(&sig, SystemMode::P, &oracle);
        let term = unlock("P", atom(oconst("c")), fconst("a"), oconst("c2"));
        let err = ck.synth_atomic_object(&Context::new(), &term).unwrap_err();
        assert_eq!(err.code(), "NotLockType");
    }

    #[test]
    fn application_of_a_non_function_is_an_error() {
        let sig = sig_p();
        let oracle = holds();
        let ck = Checker::new(&sig, SystemMode::P, &oracle);
        let term = app(oconst("c"), atom(oconst("c2")));
        let err = ck.synth_atomic_object(&Context::new(), &term).unwrap_err();
        assert_eq!(err.code(), "NotPiType");
    }

    #[test]
    fn unknown_names_are_reported_by_kind() {
        let sig = sig_p();
        let oracle = holds();
        let ck = Checker::new(&sig, SystemMode::P, &oracle);
        let err = ck.synth_atomic_object(&Context::new(), &oconst("zz")).unwrap_err();
        assert_eq!(err.code(), "UnknownConst");
        let stray = VarName::fresh("ghost");
        let err = ck.synth_atomic_object(&Context::new(), &ovar(&stray)).unwrap_err();
        assert_eq!(err.code(), "UnknownVar");
        let err = ck.check_family(&Context::new(), &fconst("zz")).unwrap_err();
        assert_eq!(err.code(), "UnknownFamily");
    }

    #[test]
    fn applying_a_family_of_kind_type_is_an_error() {
        let sig = sig_p();
        let oracle = holds();
        let ck = Checker::new(&sig, SystemMode::P, &oracle);
        let fam = fatom("a", [atom(oconst("c"))]);
        let err = ck.check_family(&Context::new(), &fam).unwrap_err();
        assert_eq!(err.code(), "NotPiKind");
    }

    #[test]
    fn unapplied_family_constructor_is_not_a_type() {
        let sig = sig_p();
        let oracle = holds();
        let ck = Checker::new(&sig, SystemMode::P, &oracle);
        let err = ck.check_family(&Context::new(), &fconst("b")).unwrap_err();
        assert_eq!(err.code(), "NotAType");
    }

    #[test]
    fn family_argument_failures_are_wrapped() {
        let sig = sig_p();
        let oracle = holds();
        let ck = Checker::new(&sig, SystemMode::P, &oracle);
        let fam = fatom("b", [atom(oconst("d"))]);
        let err = ck.check_family(&Context::new(), &fam).unwrap_err();
        let TypeError::ArgCheckFailed { inner, .. } = &err else {
            panic!("expected ArgCheckFailed, got {err:?}");
        };
        assert_eq!(inner.code(), "TypeMismatch");
    }

    #[test]
    fn dependent_family_formation_checks() {
        let sig = sig_p();
        let oracle = holds();
        let ck = Checker::new(&sig, SystemMode::P, &oracle);
        let fam = pi("x", fconst("a"), |x| fatom("b", [x]));
        let d = ck.check_family(&Context::new(), &fam).unwrap();
        assert_eq!(d.rule, "f-pi");
    }

    #[test]
    fn signature_checking_accepts_the_test_signature() {
        let sig = sig_p();
        let oracle = holds();
        let ck = Checker::new(&sig, SystemMode::P, &oracle);
        let d = ck.check_signature().unwrap();
        assert_eq!(d.rule, "sig-type");
        assert_eq!(count_rule(&d, "sig-empty"), 1);
        assert_eq!(count_rule(&d, "sig-kind"), 2);
        assert_eq!(count_rule(&d, "sig-type"), 5);
    }

    #[test]
    fn signature_declarations_only_see_earlier_declarations() {
        let mut sig = Signature::new();
        sig.push_obj("f", pi("x", fconst("a"), |x| fatom("b", [x])));
        sig.push_fam("a", Kind::Type);
        sig.push_fam("b", karrow(fconst("a"), Kind::Type));
        let oracle = holds();
        let ck = Checker::new(&sig, SystemMode::P, &oracle);
        let err = ck.check_signature().unwrap_err();
        let TypeError::IllFormedFamily { name, inner } = &err else {
            panic!("expected IllFormedFamily, got {err:?}");
        };
        assert_eq!(&**name, "f");
        assert_eq!(inner.code(), "UnknownFamily");
    }

    #[test]
    fn duplicate_signature_names_are_rejected() {
        let mut sig = sig_p();
        sig.push_fam("a", Kind::Type);
        let oracle = holds();
        let ck = Checker::new(&sig, SystemMode::P, &oracle);
        let err = ck.check_signature().unwrap_err();
        assert_eq!(err.code(), "DuplicateName");
    }

    #[test]
    fn ill_formed_kind_in_signature_is_wrapped() {
        let mut sig = sig_p();
        sig.push_fam("k", karrow(fconst("zz"), Kind::Type));
        let oracle = holds();
        let ck = Checker::new(&sig, SystemMode::P, &oracle);
        let err = ck.check_signature().unwrap_err();
        let TypeError::IllFormedKind { name, inner } = &err else {
            panic!("expected IllFormedKind, got {err:?}");
        };
        assert_eq!(&**name, "k");
        assert_eq!(inner.code(), "UnknownFamily");
    }

    #[test]
    fn context_entries_may_use_earlier_entries() {
        let sig = sig_p();
        let oracle = holds();
        let ck = Checker::new(&sig, SystemMode::P, &oracle);
        let x = VarName::source("x");
        let y = VarName::source("y");
        let ctx = Context::new()
            .extended(x.clone(), fconst("a"))
            .extended(y, fatom("b", [atom(ovar(&x))]));
        let d = ck.check_context(&ctx).unwrap();
        assert_eq!(d.rule, "ctx-type");
    }

    #[test]
    fn duplicate_context_variables_are_rejected() {
        let sig = sig_p();
        let oracle = holds();
        let ck = Checker::new(&sig, SystemMode::P, &oracle);
        let ctx = Context::new()
            .extended(VarName::source("x"), fconst("a"))
            .extended(VarName::source("x"), fconst("a"));
        let err = ck.check_context(&ctx).unwrap_err();
        assert_eq!(err.code(), "DuplicateVar");
    }

    #[test]
    fn ill_formed_context_entry_is_wrapped() {
        let sig = sig_p();
        let oracle = holds();
        let ck = Checker::new(&sig, SystemMode::P, &oracle);
        let ctx = Context::new().extended(VarName::source("x"), fconst("zz"));
        let err = ck.check_context(&ctx).unwrap_err();
        assert_eq!(err.code(), "IllFormedFamily");
    }

    #[test]
    fn binder_annotation_must_match_the_domain() {
        let sig = sig_p();
        let oracle = holds();
        let ck = Checker::new(&sig, SystemMode::P, &oracle);
        let pia = pi("z", fconst("a"), |_| fconst("a"));
        let m = abs("x", pia, |x| x);
        let cls = pi("x", fconst("a"), |_| fconst("a"));
        let err = ck.check_object(&Context::new(), &m, &cls).unwrap_err();
        assert_eq!(err.code(), "TypeMismatch");
        assert!(err.to_string().contains("binder annotation"));
    }

    #[test]
    fn abstraction_against_an_atomic_classifier_is_a_mismatch() {
        let sig = sig_p();
        let oracle = holds();
        let ck = Checker::new(&sig, SystemMode::P, &oracle);
        let m = abs("x", fconst("a"), |x| x);
        let err = ck.check_object(&Context::new(), &m, &fconst("a")).unwrap_err();
        assert_eq!(err.code(), "TypeMismatch");
    }

    #[test]
    fn lock_term_against_a_non_lock_classifier_is_a_mismatch() {
        let sig = sig_p();
        let oracle = holds();
        let ck = Checker::new(&sig, SystemMode::P, &oracle);
        let m = olock("P", atom(oconst("c")), fconst("a"), atom(oconst("c2")));
        let err = ck.check_object(&Context::new(), &m, &fconst("a")).unwrap_err();
        assert_eq!(err.code(), "TypeMismatch");
    }

    #[test]
    fn lock_term_guard_must_match_the_classifier_guard() {
        let sig = sig_p();
        let oracle = holds();
        let ck = Checker::new(&sig, SystemMode::P, &oracle);
        let m = olock("P", atom(oconst("c2")), fconst("a"), atom(oconst("c2")));
        let cls = flock("P", atom(oconst("c")), fconst("a"), fconst("a"));
        let err = ck.check_object(&Context::new(), &m, &cls).unwrap_err();
        assert_eq!(err.code(), "TypeMismatch");
    }

    #[test]
    fn one_abstraction_covers_every_equal_occurrence() {
        let sig = sig_p();
        let oracle = NeverQueried;
        let ck = Checker::new(&sig, SystemMode::P, &oracle);
        let lty = flock("Opaque", atom(oconst("c")), fconst("a"), fconst("a"));
        let x = VarName::fresh("x");
        let ctx = Context::new().extended(x.clone(), lty.clone());
        let redex = || atom(unlock("Opaque", atom(oconst("c")), fconst("a"), ovar(&x)));
        let m = olock(
            "Opaque",
            atom(oconst("c")),
            fconst("a"),
            atom(apps(oconst("mk"), [redex(), redex()])),
        );
        let d = ck.check_object(&ctx, &m, &lty).unwrap();
        assert_eq!(count_rule(&d, "o-nested-unlock"), 1);
        assert!(d.all_queries().is_empty());
    }

    #[test]
    fn abstraction_replaces_the_redex_in_the_goal() {
        let sig = sig_p();
        let oracle = NeverQueried;
        let ck = Checker::new(&sig, SystemMode::P, &oracle);
        let lty = flock("Opaque", atom(oconst("c")), fconst("a"), fconst("a"));
        let x = VarName::fresh("x");
        let ctx = Context::new().extended(x.clone(), lty);
        let redex = || atom(unlock("Opaque", atom(oconst("c")), fconst("a"), ovar(&x)));
        let body = atom(apps(oconst("mk"), [redex(), redex()]));
        let spec = LockSpec {
            pred: "Opaque".into(),
            witness: atom(oconst("c")),
            guard_ty: fconst("a"),
            binder: false,
        };
        let got = ck.abstract_unlock(&ctx, &body, &fconst("a"), &spec).unwrap().unwrap();
        assert_eq!(got.classifier, fconst("a"));
        assert_eq!(got.family, fconst("a"));
        let u = atom(ovar(&got.var));
        assert_eq!(got.object.unwrap(), atom(apps(oconst("mk"), [u.clone(), u])));
    }

    #[test]
    fn no_matching_unlock_means_no_abstraction() {
        let sig = sig_p();
        let oracle = NeverQueried;
        let ck = Checker::new(&sig, SystemMode::P, &oracle);
        let spec = LockSpec {
            pred: "Opaque".into(),
            witness: atom(oconst("c")),
            guard_ty: fconst("a"),
            binder: false,
        };
        let body = atom(oconst("c2"));
        let got = ck.abstract_unlock(&Context::new(), &body, &fconst("a"), &spec).unwrap();
        assert!(got.is_none());
    }

    #[test]
    fn matching_redex_with_a_foreign_lock_cannot_be_discharged() {
        let sig = sig_p();
        let oracle = NeverQueried;
        let ck = Checker::new(&sig, SystemMode::P, &oracle);
        let other = flock("Opaque", atom(oconst("c2")), fconst("a"), fconst("a"));
        let y = VarName::fresh("y");
        let ctx = Context::new().extended(y.clone(), other);
        let m = olock(
            "Opaque",
            atom(oconst("c")),
            fconst("a"),
            atom(unlock("Opaque", atom(oconst("c")), fconst("a"), ovar(&y))),
        );
        let cls = flock("Opaque", atom(oconst("c")), fconst("a"), fconst("a"));
        let err = ck.check_object(&ctx, &m, &cls).unwrap_err();
        assert_eq!(err.code(), "NestedUnlockMismatch");
    }

    #[test]
    fn function_content_lock_eta_expands_in_head_position() {
        let sig = sig_p();
        let oracle = NeverQueried;
        let ck = Checker::new(&sig, SystemMode::P, &oracle);
        let pia = pi("z", fconst("a"), |_| fconst("a"));
        let lty = flock("Opaque", atom(oconst("c")), fconst("a"), pia.clone());
        let y = VarName::fresh("y");
        let ctx = Context::new().extended(y.clone(), lty.clone());
        let m = olock(
            "Opaque",
            atom(oconst("c")),
            fconst("a"),
            abs("z", fconst("a"), |z| {
                atom(app(unlock("Opaque", atom(oconst("c")), fconst("a"), ovar(&y)), z))
            }),
        );
        let d = ck.check_object(&ctx, &m, &lty).unwrap();
        assert_eq!(count_rule(&d, "o-nested-unlock"), 1);
        assert!(d.all_queries().is_empty());
    }

    #[test]
    fn bare_unlock_of_function_content_stays_eta_short() {
        let sig = sig_p();
        let oracle = NeverQueried;
        let ck = Checker::new(&sig, SystemMode::P, &oracle);
        let pia = pi("z", fconst("a"), |_| fconst("a"));
        let lty = flock("Opaque", atom(oconst("c")), fconst("a"), pia);
        let y = VarName::fresh("y");
        let ctx = Context::new().extended(y.clone(), lty.clone());
        let m = olock(
            "Opaque",
            atom(oconst("c")),
            fconst("a"),
            atom(unlock("Opaque", atom(oconst("c")), fconst("a"), ovar(&y))),
        );
        let err = ck.check_object(&ctx, &m, &lty).unwrap_err();
        assert_eq!(err.code(), "NotEtaLong");
    }

    #[test]
    fn family_level_nested_unlock_is_discharged() {
        let sig = sig_p();
        let oracle = NeverQueried;
        let ck = Checker::new(&sig, SystemMode::P, &oracle);
        let lty = flock("Opaque", atom(oconst("c")), fconst("a"), fconst("a"));
        let x = VarName::fresh("x");
        let ctx = Context::new().extended(x.clone(), lty);
        let fam = flock(
            "Opaque",
            atom(oconst("c")),
            fconst("a"),
            fatom("b", [atom(unlock("Opaque", atom(oconst("c")), fconst("a"), ovar(&x)))]),
        );
        let d = ck.check_family(&ctx, &fam).unwrap();
        assert_eq!(count_rule(&d, "f-nested-unlock"), 1);
        assert!(d.all_queries().is_empty());
    }

    #[test]
    fn binder_lock_eta_expansion_checks_without_querying() {
        let sig = sig_pq();
        let oracle = NeverQueried;
        let ck = Checker::new(&sig, SystemMode::Pq, &oracle);
        let cls = flock_pq("P", "w", fconst("nat"), |w| fatom("b", [w]));
        let m = olock_pq("P", "w", fconst("nat"), |w| {
            atom(unlock("P", w, fconst("nat"), oconst("c")))
        });
        let d = ck.check_object(&Context::new(), &m, &cls).unwrap();
        assert_eq!(count_rule(&d, "o-nested-unlock"), 1);
        assert!(d.all_queries().is_empty());
    }

    #[test]
    fn binder_lock_checks_its_body_under_the_binder() {
        let sig = sig_pq();
        let oracle = NeverQueried;
        let ck = Checker::new(&sig, SystemMode::Pq, &oracle);
        let cls = flock_pq("P", "w", fconst("nat"), |_| fconst("nat"));
        let m = olock_pq("P", "w", fconst("nat"), |w| w);
        let d = ck.check_object(&Context::new(), &m, &cls).unwrap();
        assert_eq!(d.rule, "o-lock");
        assert!(d.all_queries().is_empty());
    }

    #[test]
    fn binder_lock_family_formation_checks() {
        let sig = sig_pq();
        let oracle = NeverQueried;
        let ck = Checker::new(&sig, SystemMode::Pq, &oracle);
        let fam = flock_pq("P", "w", fconst("nat"), |w| fatom("b", [w]));
        let d = ck.check_family(&Context::new(), &fam).unwrap();
        assert_eq!(d.rule, "f-lock");
    }

    #[test]
    fn watchdog_aborts_runaway_checks() {
        let sig = sig_p();
        let oracle = holds();
        let ck = Checker::new(&sig, SystemMode::P, &oracle).with_max_steps(3);
        let pia = pi("z", fconst("a"), |_| fconst("a"));
        let m = abs("x", pia.clone(), |x| {
            abs("y", fconst("a"), move |y| atom(app(head(&x), y)))
        });
        let cls = pi("x", pia, |_| pi("z", fconst("a"), |_| fconst("a")));
        let err = ck.check_object(&Context::new(), &m, &cls).unwrap_err();
        assert_eq!(err, TypeError::Watchdog(3));
    }

    #[test]
    fn mode_p_checker_rejects_binder_locks() {
        let sig = sig_p();
        let oracle = holds();
        let ck = Checker::new(&sig, SystemMode::P, &oracle);
        let fam = flock_pq("P", "w", fconst("a"), |_| fconst("a"));
        let err = ck.check_family(&Context::new(), &fam).unwrap_err();
        assert_eq!(err.code(), "ModeMismatch");
    }

    #[test]
    fn mode_pq_checker_rejects_term_guard_locks() {
        let sig = sig_pq();
        let oracle = holds();
        let ck = Checker::new(&sig, SystemMode::Pq, &oracle);
        let fam = flock("P", atom(oconst("three")), fconst("nat"), fconst("nat"));
        let err = ck.check_family(&Context::new(), &fam).unwrap_err();
        assert_eq!(err.code(), "ModeMismatch");
    }

    #[test]
    fn identical_goals_yield_identical_derivations() {
        let sig = sig_p();
        let oracle = holds();
        let ck = Checker::new(&sig, SystemMode::P, &oracle);
        let pia = pi("z", fconst("a"), |_| fconst("a"));
        let m = abs("x", pia.clone(), |x| {
            abs("y", fconst("a"), move |y| atom(app(head(&x), y)))
        });
        let cls = pi("x", pia, |_| pi("z", fconst("a"), |_| fconst("a")));
        let d1 = ck.check_object(&Context::new(), &m, &cls).unwrap();
        let d2 = ck.check_object(&Context::new(), &m, &cls).unwrap();
        assert_eq!(d1.render(), d2.render());
    }

    #[test]
    fn checked_terms_stay_typed_after_instantiation() {
        let sig = sig_p();
        let oracle = holds();
        let ck = Checker::new(&sig, SystemMode::P, &oracle);
        let m = abs("x", fconst("a"), |x| atom(app(oconst("f"), x)));
        let cls = pi("x", fconst("a"), |x| fatom("b", [x]));
        ck.check_object(&Context::new(), &m, &cls).unwrap();
        let CanonicalObject::Abs(_, hint, body) = &m else {
            panic!("expected an abstraction");
        };
        let inst =
            instantiate_object(body, hint.as_str(), &atom(oconst("c")), &erase(&fconst("a")))
                .unwrap();
        let expected = fatom("b", [atom(oconst("c"))]);
        ck.check_object(&Context::new(), &inst, &expected).unwrap();
    }

    #[test]
    fn judgement_dispatch_covers_every_form() {
        let sig = sig_p();
        let oracle = holds();
        let ck = Checker::new(&sig, SystemMode::P, &oracle);
        let ctx = Context::new().extended(VarName::source("x"), fconst("a"));
        ck.check_judgement(&Judgement::Signature).unwrap();
        ck.check_judgement(&Judgement::Context(ctx.clone())).unwrap();
        ck.check_judgement(&Judgement::Kind(ctx.clone(), karrow(fconst("a"), Kind::Type)))
            .unwrap();
        ck.check_judgement(&Judgement::Family(ctx.clone(), fconst("a"))).unwrap();
        ck.check_judgement(&Judgement::Object(ctx.clone(), atom(oconst("c")), fconst("a")))
            .unwrap();
        ck.check_judgement(&Judgement::AtomicFamily(
            ctx.clone(),
            match fatom("b", [atom(oconst("c"))]) {
                Family::Atom(p) => p,
                _ => unreachable!(),
            },
        ))
        .unwrap();
        ck.check_judgement(&Judgement::AtomicObject(ctx, oconst("c"))).unwrap();
    }

    #[test]
    fn solve_finds_a_witness_and_unlocks_the_body() {
        let sig = sig_pq();
        let oracle = GivesWitness(atom(oconst("three")));
        let ck = Checker::new(&sig, SystemMode::Pq, &oracle);
        let goal = flock_pq("P", "w", fconst("nat"), |w| fatom("b", [w]));
        let out = ck.solve_lock(&Context::new(), &goal).unwrap().unwrap();
        assert_eq!(out.witness, atom(oconst("three")));
        assert_eq!(out.unlocked, fatom("b", [atom(oconst("three"))]));
        assert_eq!(out.derivation.rule, "solve");
        assert_eq!(out.derivation.queries.len(), 1);
    }

    #[test]
    fn solve_reports_when_no_witness_exists() {
        let sig = sig_pq();
        let oracle = NoWitnessFound;
        let ck = Checker::new(&sig, SystemMode::Pq, &oracle);
        let goal = flock_pq("P", "w", fconst("nat"), |w| fatom("b", [w]));
        assert!(ck.solve_lock(&Context::new(), &goal).unwrap().is_none());
    }

    #[test]
    fn solve_rejects_ill_typed_witnesses() {
        let sig = sig_pq();
        let oracle = GivesWitness(atom(oconst("c")));
        let ck = Checker::new(&sig, SystemMode::Pq, &oracle);
        let goal = flock_pq("P", "w", fconst("nat"), |w| fatom("b", [w]));
        let err = ck.solve_lock(&Context::new(), &goal).unwrap_err();
        assert_eq!(err.code(), "TypeMismatch");
    }

    #[test]
    fn solve_without_synthesis_support_is_undecided() {
        let sig = sig_pq();
        let oracle = holds();
        let ck = Checker::new(&sig, SystemMode::Pq, &oracle);
        let goal = flock_pq("P", "w", fconst("nat"), |w| fatom("b", [w]));
        let err = ck.solve_lock(&Context::new(), &goal).unwrap_err();
        assert_eq!(err.code(), "PredicateUnknown");
    }

    #[test]
    fn solve_needs_a_binder_lock_goal() {
        let sig = sig_pq();
        let oracle = holds();
        let ck = Checker::new(&sig, SystemMode::Pq, &oracle);
        let err = ck.solve_lock(&Context::new(), &fconst("nat")).unwrap_err();
        assert_eq!(err.code(), "NotLockType");
    }
}
