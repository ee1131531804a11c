//! Skeleton decomposition: splitting an object into a signature-only part
//! and a list of foreign subterms.
//!
//! A subterm is *foreign* when it is locally closed, mentions no constant of
//! the ambient signature, and mentions at least one free variable or
//! non-signature constant. Each maximal foreign subterm is replaced by a
//! fresh hole variable; alpha-equal foreign subterms share one hole.
//! [`reassemble`] substitutes the fillers back and returns exactly the
//! original term.

use std::collections::BTreeSet;

use super::*;

/// One extracted subterm: the hole variable standing for it, the subterm
/// itself, and its classifier when one is known (fillers that are plain
/// context variables take their type from the context).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Hole {
    pub var: VarName,
    pub filler: CanonicalObject,
    pub classifier: Option<Family>,
}

/// A term over hole variables plus the fillers the holes stand for.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Skeleton {
    pub term: CanonicalObject,
    pub holes: Vec<Hole>,
}

struct Splitter<'a> {
    sig: &'a Signature,
    ctx: Option<&'a Context>,
    holes: Vec<Hole>,
}

impl<'a> Splitter<'a> {
    fn hole_for(&mut self, filler: CanonicalObject) -> VarName {
        if let Some(h) = self.holes.iter().find(|h| h.filler == filler) {
            return h.var.clone();
        }
        let var = VarName::fresh(&format!("h{}", self.holes.len() + 1));
        let classifier = match &filler {
            CanonicalObject::Atom(AtomicObject::FVar(x)) => {
                self.ctx.and_then(|c| c.lookup(x)).cloned()
            }
            _ => None,
        };
        self.holes.push(Hole { var: var.clone(), filler, classifier });
        var
    }

    fn is_foreign(&self, m: &CanonicalObject) -> bool {
        if !m.is_locally_closed() {
            return false;
        }
        let mut consts = BTreeSet::new();
        collect_consts_object(m, &mut consts);
        if consts.iter().any(|c| self.sig.contains(c)) {
            return false;
        }
        !consts.is_empty() || !m.free_vars().is_empty()
    }

    fn is_foreign_atomic(&self, a: &AtomicObject) -> bool {
        self.is_foreign(&CanonicalObject::Atom(a.clone()))
    }

    fn split_object(&mut self, m: &CanonicalObject) -> CanonicalObject {
        if self.is_foreign(m) {
            let v = self.hole_for(m.clone());
            return CanonicalObject::var(v);
        }
        match m {
            CanonicalObject::Atom(a) => CanonicalObject::Atom(self.split_atomic(a)),
            CanonicalObject::Abs(dom, h, body) => CanonicalObject::Abs(
                Box::new(self.split_family(dom)),
                h.clone(),
                Box::new(self.split_object(body)),
            ),
            CanonicalObject::Lock { pred, guard, guard_ty, body } => {
                let guard = match guard {
                    LockGuard::Term(n) => LockGuard::Term(Box::new(self.split_object(n))),
                    LockGuard::Binder(h) => LockGuard::Binder(h.clone()),
                };
                CanonicalObject::Lock {
                    pred: pred.clone(),
                    guard,
                    guard_ty: Box::new(self.split_family(guard_ty)),
                    body: Box::new(self.split_object(body)),
                }
            }
        }
    }

    fn split_atomic(&mut self, a: &AtomicObject) -> AtomicObject {
        if self.is_foreign_atomic(a) {
            let v = self.hole_for(CanonicalObject::Atom(a.clone()));
            return AtomicObject::FVar(v);
        }
        match a {
            AtomicObject::Const(_) | AtomicObject::FVar(_) | AtomicObject::BVar(_) => a.clone(),
            AtomicObject::App(h, m) => AtomicObject::App(
                Box::new(self.split_atomic(h)),
                Box::new(self.split_object(m)),
            ),
            AtomicObject::Unlock { pred, witness, witness_ty, body } => AtomicObject::Unlock {
                pred: pred.clone(),
                witness: Box::new(self.split_object(witness)),
                witness_ty: Box::new(self.split_family(witness_ty)),
                body: Box::new(self.split_atomic(body)),
            },
        }
    }

    fn split_family(&mut self, f: &Family) -> Family {
        match f {
            Family::Atom(af) => Family::Atom(self.split_atomic_family(af)),
            Family::Pi(dom, h, body) => Family::Pi(
                Box::new(self.split_family(dom)),
                h.clone(),
                Box::new(self.split_family(body)),
            ),
            Family::Lock { pred, guard, guard_ty, body } => {
                let guard = match guard {
                    LockGuard::Term(n) => LockGuard::Term(Box::new(self.split_object(n))),
                    LockGuard::Binder(h) => LockGuard::Binder(h.clone()),
                };
                Family::Lock {
                    pred: pred.clone(),
                    guard,
                    guard_ty: Box::new(self.split_family(guard_ty)),
                    body: Box::new(self.split_family(body)),
                }
            }
        }
    }

    fn split_atomic_family(&mut self, af: &AtomicFamily) -> AtomicFamily {
        match af {
            AtomicFamily::Const(n) => AtomicFamily::Const(n.clone()),
            AtomicFamily::App(h, m) => AtomicFamily::App(
                Box::new(self.split_atomic_family(h)),
                Box::new(self.split_object(m)),
            ),
        }
    }
}

/// Decomposes `m` over the signature `sig`. When a context is supplied, hole
/// classifiers are filled in for fillers that are context variables.
pub fn skeleton(m: &CanonicalObject, sig: &Signature, ctx: Option<&Context>) -> Skeleton {
    let mut sp = Splitter { sig, ctx, holes: Vec::new() };
    let term = sp.split_object(m);
    Skeleton { term, holes: sp.holes }
}

/// Substitutes every filler back for its hole variable. Because fillers are
/// locally closed and hole variables are fresh, plain replacement is
/// capture-free and needs no typing.
pub fn reassemble(sk: &Skeleton) -> CanonicalObject {
    let mut t = sk.term.clone();
    for h in &sk.holes {
        t = plug_object(&t, &h.var, &h.filler);
    }
    t
}

fn plug_object(m: &CanonicalObject, v: &VarName, filler: &CanonicalObject) -> CanonicalObject {
    match m {
        CanonicalObject::Atom(a) => plug_atomic_as_object(a, v, filler),
        CanonicalObject::Abs(dom, h, body) => CanonicalObject::Abs(
            Box::new(plug_family(dom, v, filler)),
            h.clone(),
            Box::new(plug_object(body, v, filler)),
        ),
        CanonicalObject::Lock { pred, guard, guard_ty, body } => {
            let guard = match guard {
                LockGuard::Term(n) => LockGuard::Term(Box::new(plug_object(n, v, filler))),
                LockGuard::Binder(h) => LockGuard::Binder(h.clone()),
            };
            CanonicalObject::Lock {
                pred: pred.clone(),
                guard,
                guard_ty: Box::new(plug_family(guard_ty, v, filler)),
                body: Box::new(plug_object(body, v, filler)),
            }
        }
    }
}

fn plug_atomic_as_object(
    a: &AtomicObject,
    v: &VarName,
    filler: &CanonicalObject,
) -> CanonicalObject {
    if let AtomicObject::FVar(x) = a {
        if x == v {
            return filler.clone();
        }
    }
    CanonicalObject::Atom(plug_atomic(a, v, filler))
}

fn plug_atomic(a: &AtomicObject, v: &VarName, filler: &CanonicalObject) -> AtomicObject {
    match a {
        AtomicObject::FVar(x) if x == v => match filler {
            // Hole variables in head or unlock-body position always stand
            // for atomic fillers; the splitter only places them there for
            // atomic subterms.
            CanonicalObject::Atom(inner) => inner.clone(),
            _ => AtomicObject::FVar(x.clone()),
        },
        AtomicObject::Const(_) | AtomicObject::FVar(_) | AtomicObject::BVar(_) => a.clone(),
        AtomicObject::App(h, m) => AtomicObject::App(
            Box::new(plug_atomic(h, v, filler)),
            Box::new(plug_object(m, v, filler)),
        ),
        AtomicObject::Unlock { pred, witness, witness_ty, body } => AtomicObject::Unlock {
            pred: pred.clone(),
            witness: Box::new(plug_object(witness, v, filler)),
            witness_ty: Box::new(plug_family(witness_ty, v, filler)),
            body: Box::new(plug_atomic(body, v, filler)),
        },
    }
}

fn plug_family(f: &Family, v: &VarName, filler: &CanonicalObject) -> Family {
    match f {
        Family::Atom(af) => Family::Atom(plug_atomic_family(af, v, filler)),
        Family::Pi(dom, h, body) => Family::Pi(
            Box::new(plug_family(dom, v, filler)),
            h.clone(),
            Box::new(plug_family(body, v, filler)),
        ),
        Family::Lock { pred, guard, guard_ty, body } => {
            let guard = match guard {
                LockGuard::Term(n) => LockGuard::Term(Box::new(plug_object(n, v, filler))),
                LockGuard::Binder(h) => LockGuard::Binder(h.clone()),
            };
            Family::Lock {
                pred: pred.clone(),
                guard,
                guard_ty: Box::new(plug_family(guard_ty, v, filler)),
                body: Box::new(plug_family(body, v, filler)),
            }
        }
    }
}

fn plug_atomic_family(af: &AtomicFamily, v: &VarName, filler: &CanonicalObject) -> AtomicFamily {
    match af {
        AtomicFamily::Const(n) => AtomicFamily::Const(n.clone()),
        AtomicFamily::App(h, m) => AtomicFamily::App(
            Box::new(plug_atomic_family(h, v, filler)),
            Box::new(plug_object(m, v, filler)),
        ),
    }
}
