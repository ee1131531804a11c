//! Hereditary substitution.
//!
//! The framework has no reduction relation: substituting a canonical object
//! into a term re-normalizes on the fly. Substitution is indexed by the
//! *simple type* of the replacement so that it terminates on all inputs on
//! which it is defined; the measure is the pair (index size, subject size),
//! ordered lexicographically. Structural cases recurse on a direct subterm
//! with the same index; the two head cases (application of a reduced
//! abstraction, unlocking of a reduced lock with a bound witness) start a
//! fresh substitution whose index is strictly smaller, which the code
//! asserts in debug builds. Binders are crossed by opening the body with a
//! fresh variable and closing it again afterwards, so every term a head
//! case substitutes is locally closed.
//!
//! Substitution is a partial function. On inputs that are not well-typed the
//! head cases can meet a shape they have no rule for (a non-abstraction in
//! head position, an atom reduced at a non-atomic index); these return
//! [`SubstError::Undefined`] rather than panicking, and the checker turns
//! them into located type errors.
//!
//! Both modes are served by one implementation: a lock with a fixed guard
//! term follows the mode-`P` rules (the guard is substituted into; an unlock
//! cancels it directly) and a lock with a bound witness follows the mode-`PQ`
//! rules (the binder is untouched; an unlock additionally substitutes the
//! unlock's witness for the binder in the lock body, at the erased guard
//! type). The `mode` parameter on the public entry points only checks, in
//! debug builds, that the input actually belongs to the session's mode.

use thiserror::Error;

use crate::syntax::{
    erase, AtomicFamily, AtomicObject, CanonicalObject, Context, Family, Kind, LockGuard,
    NameHint, SimpleType, SystemMode, VarName,
};

/// Result of substituting into an atomic object: either the spine stays
/// atomic, or a head was replaced and the result reduced to a canonical
/// object whose simple type is reported alongside.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SubstOutcome {
    Stays(AtomicObject),
    Reduces(CanonicalObject, SimpleType),
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum SubstError {
    /// A head case fired but the shapes or indices have no matching rule.
    #[error("substitution undefined: {0}")]
    Undefined(String),
    /// A context-substitution side condition failed.
    #[error("substitution hygiene violation: {0}")]
    Hygiene(String),
}

fn undefined<T>(msg: impl Into<String>) -> Result<T, SubstError> {
    Err(SubstError::Undefined(msg.into()))
}

/// One substitution `[m0/x0]` at index `rho0`. Inner substitutions spawned
/// by head cases get their own instance with a strictly smaller index.
struct Subst<'a> {
    x0: &'a VarName,
    m0: &'a CanonicalObject,
    rho0: &'a SimpleType,
}

impl<'a> Subst<'a> {
    fn new(x0: &'a VarName, m0: &'a CanonicalObject, rho0: &'a SimpleType) -> Self {
        debug_assert!(m0.is_locally_closed(), "replacement must be locally closed");
        Subst { x0, m0, rho0 }
    }

    /// A head case continues with a new substitution; its index must shrink.
    fn inner(&self, x0: &'a VarName, m0: &'a CanonicalObject, rho0: &'a SimpleType) -> Self {
        debug_assert!(
            rho0.size() < self.rho0.size(),
            "inner substitution index must be strictly smaller ({} vs {})",
            rho0.size(),
            self.rho0.size()
        );
        Subst::new(x0, m0, rho0)
    }

    /// Substitution under one binder: the body is opened with a fresh
    /// variable, substituted, and closed again. Staying locally closed
    /// matters when a head case fires under the binder, because the spine
    /// argument it substitutes may mention the binder's variable.
    fn kind_body(&self, body: &Kind, hint: &NameHint) -> Result<Kind, SubstError> {
        let y = VarName::fresh(hint.as_str());
        Ok(self.kind(&body.open_var(&y))?.close_var(&y))
    }

    fn family_body(&self, body: &Family, hint: &NameHint) -> Result<Family, SubstError> {
        let y = VarName::fresh(hint.as_str());
        Ok(self.family(&body.open_var(&y))?.close_var(&y))
    }

    fn obj_body(
        &self,
        body: &CanonicalObject,
        hint: &NameHint,
    ) -> Result<CanonicalObject, SubstError> {
        let y = VarName::fresh(hint.as_str());
        Ok(self.obj(&body.open_var(&y))?.close_var(&y))
    }

    fn kind(&self, k: &Kind) -> Result<Kind, SubstError> {
        match k {
            Kind::Type => Ok(Kind::Type),
            Kind::Pi(dom, h, body) => Ok(Kind::Pi(
                Box::new(self.family(dom)?),
                h.clone(),
                Box::new(self.kind_body(body, h)?),
            )),
        }
    }

    fn afam(&self, af: &AtomicFamily) -> Result<AtomicFamily, SubstError> {
        match af {
            AtomicFamily::Const(n) => Ok(AtomicFamily::Const(n.clone())),
            AtomicFamily::App(h, m) => Ok(AtomicFamily::App(
                Box::new(self.afam(h)?),
                Box::new(self.obj(m)?),
            )),
        }
    }

    fn family(&self, f: &Family) -> Result<Family, SubstError> {
        match f {
            Family::Atom(af) => Ok(Family::Atom(self.afam(af)?)),
            Family::Pi(dom, h, body) => Ok(Family::Pi(
                Box::new(self.family(dom)?),
                h.clone(),
                Box::new(self.family_body(body, h)?),
            )),
            Family::Lock { pred, guard, guard_ty, body } => {
                let (guard, body) = match guard {
                    LockGuard::Term(n) => {
                        (LockGuard::Term(Box::new(self.obj(n)?)), self.family(body)?)
                    }
                    LockGuard::Binder(h) => {
                        (LockGuard::Binder(h.clone()), self.family_body(body, h)?)
                    }
                };
                Ok(Family::Lock {
                    pred: pred.clone(),
                    guard,
                    guard_ty: Box::new(self.family(guard_ty)?),
                    body: Box::new(body),
                })
            }
        }
    }

    fn aobj(&self, a: &AtomicObject) -> Result<SubstOutcome, SubstError> {
        let out = self.aobj_raw(a)?;
        if let SubstOutcome::Reduces(_, rho) = &out {
            debug_assert!(
                rho.is_subexpression_of(self.rho0),
                "head substitution must reduce at a subexpression of the index"
            );
        }
        Ok(out)
    }

    fn aobj_raw(&self, a: &AtomicObject) -> Result<SubstOutcome, SubstError> {
        match a {
            AtomicObject::Const(n) => Ok(SubstOutcome::Stays(AtomicObject::Const(n.clone()))),
            AtomicObject::BVar(k) => Ok(SubstOutcome::Stays(AtomicObject::BVar(*k))),
            AtomicObject::FVar(v) => {
                if v == self.x0 {
                    Ok(SubstOutcome::Reduces(self.m0.clone(), self.rho0.clone()))
                } else {
                    Ok(SubstOutcome::Stays(AtomicObject::FVar(v.clone())))
                }
            }
            AtomicObject::App(head, arg) => {
                let arg = self.obj(arg)?;
                match self.aobj(head)? {
                    SubstOutcome::Stays(head) => Ok(SubstOutcome::Stays(AtomicObject::App(
                        Box::new(head),
                        Box::new(arg),
                    ))),
                    SubstOutcome::Reduces(m, rho) => self.apply_reduced(m, rho, arg),
                }
            }
            AtomicObject::Unlock { pred, witness, witness_ty, body } => {
                let witness = self.obj(witness)?;
                let witness_ty = self.family(witness_ty)?;
                match self.aobj(body)? {
                    SubstOutcome::Stays(body) => Ok(SubstOutcome::Stays(AtomicObject::Unlock {
                        pred: pred.clone(),
                        witness: Box::new(witness),
                        witness_ty: Box::new(witness_ty),
                        body: Box::new(body),
                    })),
                    SubstOutcome::Reduces(m, rho) => self.unlock_reduced(m, rho, witness),
                }
            }
        }
    }

    /// An application head reduced to `m : rho`; apply it to the (already
    /// substituted) argument by substituting into the abstraction body.
    fn apply_reduced(
        &self,
        m: CanonicalObject,
        rho: SimpleType,
        arg: CanonicalObject,
    ) -> Result<SubstOutcome, SubstError> {
        let (rho1, rho2) = match rho {
            SimpleType::Arrow(l, r) => (*l, *r),
            other => return undefined(format!("applied a head of non-arrow simple type {other}")),
        };
        let (hint, body) = match m {
            CanonicalObject::Abs(_, h, body) => (h, body),
            other => return undefined(format!("applied a non-abstraction {other}")),
        };
        let y = VarName::fresh(hint.as_str());
        let body = body.open_var(&y);
        let m2 = self.inner(&y, &arg, &rho1).obj(&body)?;
        Ok(SubstOutcome::Reduces(m2, rho2))
    }

    /// An unlock body reduced to `m : rho`; cancel the lock. With a bound
    /// witness the unlock's own (already substituted) witness is substituted
    /// for the binder at the erased guard type.
    fn unlock_reduced(
        &self,
        m: CanonicalObject,
        rho: SimpleType,
        witness: CanonicalObject,
    ) -> Result<SubstOutcome, SubstError> {
        let rho_body = match rho {
            SimpleType::Lock { body, .. } => *body,
            other => return undefined(format!("unlocked a body of non-lock simple type {other}")),
        };
        match m {
            CanonicalObject::Lock { guard: LockGuard::Term(_), body, .. } => {
                Ok(SubstOutcome::Reduces(*body, rho_body))
            }
            CanonicalObject::Lock { guard: LockGuard::Binder(h), guard_ty, body, .. } => {
                let y = VarName::fresh(h.as_str());
                let body = body.open_var(&y);
                let sigma = erase(&guard_ty);
                let m2 = self.inner(&y, &witness, &sigma).obj(&body)?;
                Ok(SubstOutcome::Reduces(m2, rho_body))
            }
            other => undefined(format!("unlocked a non-lock {other}")),
        }
    }

    fn obj(&self, m: &CanonicalObject) -> Result<CanonicalObject, SubstError> {
        match m {
            CanonicalObject::Atom(a) => match self.aobj(a)? {
                SubstOutcome::Stays(a) => Ok(CanonicalObject::Atom(a)),
                SubstOutcome::Reduces(m, rho) => match rho {
                    SimpleType::Base(_) => Ok(m),
                    other => undefined(format!(
                        "atomic position reduced at non-atomic simple type {other}"
                    )),
                },
            },
            CanonicalObject::Abs(dom, h, body) => Ok(CanonicalObject::Abs(
                Box::new(self.family(dom)?),
                h.clone(),
                Box::new(self.obj_body(body, h)?),
            )),
            CanonicalObject::Lock { pred, guard, guard_ty, body } => {
                let (guard, body) = match guard {
                    LockGuard::Term(n) => {
                        (LockGuard::Term(Box::new(self.obj(n)?)), self.obj(body)?)
                    }
                    LockGuard::Binder(h) => {
                        (LockGuard::Binder(h.clone()), self.obj_body(body, h)?)
                    }
                };
                Ok(CanonicalObject::Lock {
                    pred: pred.clone(),
                    guard,
                    guard_ty: Box::new(self.family(guard_ty)?),
                    body: Box::new(body),
                })
            }
        }
    }
}

#[cfg(debug_assertions)]
fn debug_check_mode<T>(t: &T, mode: SystemMode, validate: impl Fn(&T, SystemMode) -> Result<(), crate::syntax::ModeViolation>) {
    if let Err(v) = validate(t, mode) {
        debug_assert!(false, "substitution input violates session mode: {v}");
    }
}

/// `k[m0/x0]^K` at index `rho0`.
pub fn subst_kind(
    k: &Kind,
    m0: &CanonicalObject,
    x0: &VarName,
    rho0: &SimpleType,
) -> Result<Kind, SubstError> {
    Subst::new(x0, m0, rho0).kind(k)
}

/// `af[m0/x0]^F` at index `rho0` (application spines never reduce at the
/// family level because their heads are constants).
pub fn subst_atomic_family(
    af: &AtomicFamily,
    m0: &CanonicalObject,
    x0: &VarName,
    rho0: &SimpleType,
) -> Result<AtomicFamily, SubstError> {
    Subst::new(x0, m0, rho0).afam(af)
}

/// `f[m0/x0]^F` at index `rho0`.
pub fn subst_family(
    f: &Family,
    m0: &CanonicalObject,
    x0: &VarName,
    rho0: &SimpleType,
    mode: SystemMode,
) -> Result<Family, SubstError> {
    #[cfg(debug_assertions)]
    debug_check_mode(f, mode, crate::syntax::validate_mode_family);
    let _ = mode;
    Subst::new(x0, m0, rho0).family(f)
}

/// `a[m0/x0]^O` at index `rho0`: [`SubstOutcome::Stays`] when the spine head
/// is untouched, [`SubstOutcome::Reduces`] when the head was replaced.
pub fn subst_atomic_object(
    a: &AtomicObject,
    m0: &CanonicalObject,
    x0: &VarName,
    rho0: &SimpleType,
    mode: SystemMode,
) -> Result<SubstOutcome, SubstError> {
    #[cfg(debug_assertions)]
    debug_check_mode(a, mode, crate::syntax::validate_mode_atomic_object);
    let _ = mode;
    Subst::new(x0, m0, rho0).aobj(a)
}

/// `m[m0/x0]^O` at index `rho0`.
pub fn subst_canonical_object(
    m: &CanonicalObject,
    m0: &CanonicalObject,
    x0: &VarName,
    rho0: &SimpleType,
    mode: SystemMode,
) -> Result<CanonicalObject, SubstError> {
    #[cfg(debug_assertions)]
    debug_check_mode(m, mode, crate::syntax::validate_mode_object);
    let _ = mode;
    Subst::new(x0, m0, rho0).obj(m)
}

/// Pointwise substitution into every classifier of `g`. Requires `x0` not
/// bound by `g` and no variable of `g` free in `m0`.
pub fn subst_context(
    g: &Context,
    m0: &CanonicalObject,
    x0: &VarName,
    rho0: &SimpleType,
) -> Result<Context, SubstError> {
    if g.contains(x0) {
        return Err(SubstError::Hygiene(format!(
            "substituted variable {x0} is bound by the context"
        )));
    }
    let m0_fv = m0.free_vars();
    if let Some((clash, _)) = g.entries.iter().find(|(x, _)| m0_fv.contains(x)) {
        return Err(SubstError::Hygiene(format!(
            "replacement mentions context variable {clash}"
        )));
    }
    let s = Subst::new(x0, m0, rho0);
    let mut out = Context::new();
    for (x, f) in &g.entries {
        out.entries.push((x.clone(), s.family(f)?));
    }
    Ok(out)
}

/// Opens `body` (taken from under a binder) with a fresh variable and
/// hereditarily substitutes `arg` for it at index `rho`. This is how the
/// checker instantiates Pi bodies and lock-bound witnesses.
pub fn instantiate_family(
    body: &Family,
    hint: &str,
    arg: &CanonicalObject,
    rho: &SimpleType,
) -> Result<Family, SubstError> {
    let y = VarName::fresh(hint);
    let opened = body.open_var(&y);
    Subst::new(&y, arg, rho).family(&opened)
}

/// [`instantiate_family`] at the kind level.
pub fn instantiate_kind(
    body: &Kind,
    hint: &str,
    arg: &CanonicalObject,
    rho: &SimpleType,
) -> Result<Kind, SubstError> {
    let y = VarName::fresh(hint);
    let opened = body.open_var(&y);
    Subst::new(&y, arg, rho).kind(&opened)
}

/// [`instantiate_family`] at the object level.
pub fn instantiate_object(
    body: &CanonicalObject,
    hint: &str,
    arg: &CanonicalObject,
    rho: &SimpleType,
) -> Result<CanonicalObject, SubstError> {
    let y = VarName::fresh(hint);
    let opened = body.open_var(&y);
    Subst::new(&y, arg, rho).obj(&opened)
}
