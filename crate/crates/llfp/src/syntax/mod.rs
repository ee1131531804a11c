//! Kernel term syntax and the operations that do not depend on typing.
//!
//! Terms are stratified into kinds, families (types) and objects, with the
//! atomic/canonical split that makes only beta-eta-long forms representable
//! as *checkable* canonical objects:
//!
//! ```text
//! kinds             K ::= Type | Pi x : F . K
//! atomic families   P ::= a | P M
//! families          F ::= P | Pi x : F . F | lock[p; G : F] F
//! atomic objects    A ::= c | x | A M | unlock[p; M : F] A
//! canonical objects M ::= A | \x : F . M | lock[p; G : F] M
//! ```
//!
//! The lock guard `G` is a canonical object in mode `P` and a bound variable
//! in mode `PQ`; `p` names an external predicate.
//!
//! Representation is locally nameless: bound variables are de Bruijn indices
//! ([`AtomicObject::BVar`]), free variables carry a display text plus a
//! numeric stamp ([`VarName`]), and binders keep a display hint that is
//! ignored by comparisons. Derived structural equality therefore *is*
//! alpha-equivalence, and substituting a locally closed term can never
//! capture.

use std::collections::BTreeSet;
use std::rc::Rc;
use std::sync::atomic::{AtomicU32, Ordering};

mod print;
mod skeleton;

#[cfg(test)]
pub(crate) use print::RESERVED_WORDS;
pub use skeleton::{reassemble, skeleton, Hole, Skeleton};

/// Interned-ish name for constants and predicates. Cloning is cheap.
pub type Name = Rc<str>;

/// Which flavour of the framework a session runs.
///
/// The two modes differ only in what a lock is: in `P` it carries a fixed
/// guard term, in `PQ` it binds a witness variable in its body.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SystemMode {
    P,
    Pq,
}

impl SystemMode {
    pub fn label(self) -> &'static str {
        match self {
            SystemMode::P => "p",
            SystemMode::Pq => "pq",
        }
    }
}

impl std::fmt::Display for SystemMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// A free variable: display text plus a uniqueness stamp.
///
/// Source-written variables have stamp 0; variables invented while opening
/// binders get stamps from [`VarName::fresh`]. The stamp takes part in
/// equality, so an opened binder can never be confused with a source
/// variable of the same text.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarName {
    pub text: Name,
    pub uid: u32,
}

static NEXT_UID: AtomicU32 = AtomicU32::new(1);

impl VarName {
    /// A variable as written in source text.
    pub fn source(text: &str) -> Self {
        VarName { text: text.into(), uid: 0 }
    }

    /// A globally fresh variable for opening a binder; `hint` is kept for
    /// display.
    pub fn fresh(hint: &str) -> Self {
        let text = if hint.is_empty() { "x" } else { hint };
        VarName { text: text.into(), uid: NEXT_UID.fetch_add(1, Ordering::Relaxed) }
    }

    /// The deterministic placeholder that erasure substitutes for the
    /// `level`-th binder it drops. `?` is not an identifier character, so
    /// placeholders cannot collide with anything parseable.
    pub fn placeholder(level: u32) -> Self {
        VarName { text: "?".into(), uid: level }
    }

    pub fn is_placeholder(&self) -> bool {
        &*self.text == "?"
    }
}

impl std::fmt::Debug for VarName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.uid == 0 {
            write!(f, "{}", self.text)
        } else {
            write!(f, "{}#{}", self.text, self.uid)
        }
    }
}

/// Display hint for a binder. Compares equal to every other hint so that
/// derived equality on terms is alpha-equivalence.
#[derive(Clone)]
pub struct NameHint(pub Name);

impl NameHint {
    pub fn new(text: &str) -> Self {
        NameHint(text.into())
    }

    pub fn anon() -> Self {
        NameHint("_".into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl PartialEq for NameHint {
    fn eq(&self, _other: &Self) -> bool {
        true
    }
}

impl Eq for NameHint {}

impl std::fmt::Debug for NameHint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Kinds classify family constants.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Kind {
    Type,
    /// `Pi x : F . K`; the body binds one index.
    Pi(Box<Family>, NameHint, Box<Kind>),
}

/// A family constant applied to object arguments.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum AtomicFamily {
    Const(Name),
    App(Box<AtomicFamily>, Box<CanonicalObject>),
}

/// The guard of a lock. `Term` in mode `P` (a fixed canonical object),
/// `Binder` in mode `PQ` (the lock body binds one index).
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum LockGuard {
    Term(Box<CanonicalObject>),
    Binder(NameHint),
}

impl LockGuard {
    pub fn mode(&self) -> SystemMode {
        match self {
            LockGuard::Term(_) => SystemMode::P,
            LockGuard::Binder(_) => SystemMode::Pq,
        }
    }
}

/// Canonical families (types).
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Family {
    Atom(AtomicFamily),
    /// `Pi x : F . F`; the body binds one index.
    Pi(Box<Family>, NameHint, Box<Family>),
    /// `lock[pred; guard : guard_ty] body`. With a `Binder` guard the body
    /// binds one index.
    Lock { pred: Name, guard: LockGuard, guard_ty: Box<Family>, body: Box<Family> },
}

/// Atomic objects: the synthesizing fragment.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum AtomicObject {
    Const(Name),
    FVar(VarName),
    /// De Bruijn index of an enclosing binder.
    BVar(u32),
    App(Box<AtomicObject>, Box<CanonicalObject>),
    /// `unlock[pred; witness : witness_ty] body`. No binding in either mode.
    Unlock {
        pred: Name,
        witness: Box<CanonicalObject>,
        witness_ty: Box<Family>,
        body: Box<AtomicObject>,
    },
}

/// Canonical objects: the checking fragment.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum CanonicalObject {
    Atom(AtomicObject),
    /// `\x : F . M`; the body binds one index.
    Abs(Box<Family>, NameHint, Box<CanonicalObject>),
    /// `lock[pred; guard : guard_ty] body`. With a `Binder` guard the body
    /// binds one index.
    Lock { pred: Name, guard: LockGuard, guard_ty: Box<Family>, body: Box<CanonicalObject> },
}

/// Simple types index hereditary substitution. They erase dependency: family
/// applications lose their arguments and Pi becomes a plain arrow, while
/// locks keep their full guard data verbatim.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum SimpleType {
    Base(Name),
    Arrow(Box<SimpleType>, Box<SimpleType>),
    Lock { pred: Name, guard: LockGuard, guard_ty: Box<Family>, body: Box<SimpleType> },
}

impl SimpleType {
    /// Whether `self` occurs as a subexpression of `other`, where the
    /// subexpression order follows the simple-type tree (arrow components and
    /// lock bodies), not the embedded guard terms.
    pub fn is_subexpression_of(&self, other: &SimpleType) -> bool {
        if self == other {
            return true;
        }
        match other {
            SimpleType::Base(_) => false,
            SimpleType::Arrow(l, r) => {
                self.is_subexpression_of(l) || self.is_subexpression_of(r)
            }
            SimpleType::Lock { body, .. } => self.is_subexpression_of(body),
        }
    }

    pub fn size(&self) -> usize {
        match self {
            SimpleType::Base(_) => 1,
            SimpleType::Arrow(l, r) => 1 + l.size() + r.size(),
            SimpleType::Lock { guard, guard_ty, body, .. } => {
                let g = match guard {
                    LockGuard::Term(n) => n.size(),
                    LockGuard::Binder(_) => 0,
                };
                1 + g + guard_ty.size() + body.size()
            }
        }
    }
}

/// What a signature entry declares.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum SigClassifier {
    /// A family constant with its kind.
    Fam(Kind),
    /// An object constant with its type.
    Obj(Family),
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SigDecl {
    pub name: Name,
    pub classifier: SigClassifier,
}

/// An ordered list of declarations. Name distinctness is a theorem of the
/// checker (`checker::check_signature`), not a representation invariant, so
/// ill-formed signatures are representable and rejectable.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct Signature {
    pub decls: Vec<SigDecl>,
}

impl Signature {
    pub fn new() -> Self {
        Signature { decls: Vec::new() }
    }

    pub fn push_fam(&mut self, name: &str, kind: Kind) {
        self.decls.push(SigDecl { name: name.into(), classifier: SigClassifier::Fam(kind) });
    }

    pub fn push_obj(&mut self, name: &str, fam: Family) {
        self.decls.push(SigDecl { name: name.into(), classifier: SigClassifier::Obj(fam) });
    }

    pub fn contains(&self, name: &str) -> bool {
        self.decls.iter().any(|d| &*d.name == name)
    }

    pub fn fam_const(&self, name: &str) -> Option<&Kind> {
        self.decls.iter().find_map(|d| match &d.classifier {
            SigClassifier::Fam(k) if &*d.name == name => Some(k),
            _ => None,
        })
    }

    pub fn obj_const(&self, name: &str) -> Option<&Family> {
        self.decls.iter().find_map(|d| match &d.classifier {
            SigClassifier::Obj(f) if &*d.name == name => Some(f),
            _ => None,
        })
    }
}

/// An ordered list of variable bindings. Like signatures, validity is
/// checked, not assumed.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct Context {
    pub entries: Vec<(VarName, Family)>,
}

impl Context {
    pub fn new() -> Self {
        Context { entries: Vec::new() }
    }

    pub fn lookup(&self, x: &VarName) -> Option<&Family> {
        self.entries.iter().rev().find(|(v, _)| v == x).map(|(_, f)| f)
    }

    pub fn contains(&self, x: &VarName) -> bool {
        self.lookup(x).is_some()
    }

    /// The context extended with one binding (used when moving under a
    /// binder).
    pub fn extended(&self, x: VarName, f: Family) -> Context {
        let mut entries = self.entries.clone();
        entries.push((x, f));
        Context { entries }
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }
}

/// Alpha-equivalence. With the locally nameless representation this is
/// structural equality; the function exists to make call sites say what they
/// mean.
pub fn alpha_eq<T: PartialEq>(a: &T, b: &T) -> bool {
    a == b
}

// ---------------------------------------------------------------------------
// Opening and closing binders
// ---------------------------------------------------------------------------

impl Kind {
    /// Replaces the outermost bound index with the free variable `x`. Call on
    /// the body taken out of a binder.
    pub fn open_var(&self, x: &VarName) -> Kind {
        self.open_at(0, x)
    }

    fn open_at(&self, depth: u32, x: &VarName) -> Kind {
        match self {
            Kind::Type => Kind::Type,
            Kind::Pi(dom, h, body) => Kind::Pi(
                Box::new(dom.open_at(depth, x)),
                h.clone(),
                Box::new(body.open_at(depth + 1, x)),
            ),
        }
    }

    /// Turns the free variable `x` back into the outermost bound index; the
    /// result is meant to be wrapped in a binder.
    pub fn close_var(&self, x: &VarName) -> Kind {
        self.close_at(0, x)
    }

    fn close_at(&self, depth: u32, x: &VarName) -> Kind {
        match self {
            Kind::Type => Kind::Type,
            Kind::Pi(dom, h, body) => Kind::Pi(
                Box::new(dom.close_at(depth, x)),
                h.clone(),
                Box::new(body.close_at(depth + 1, x)),
            ),
        }
    }
}

impl AtomicFamily {
    fn open_at(&self, depth: u32, x: &VarName) -> AtomicFamily {
        match self {
            AtomicFamily::Const(n) => AtomicFamily::Const(n.clone()),
            AtomicFamily::App(h, m) => AtomicFamily::App(
                Box::new(h.open_at(depth, x)),
                Box::new(m.open_at(depth, x)),
            ),
        }
    }

    fn close_at(&self, depth: u32, x: &VarName) -> AtomicFamily {
        match self {
            AtomicFamily::Const(n) => AtomicFamily::Const(n.clone()),
            AtomicFamily::App(h, m) => AtomicFamily::App(
                Box::new(h.close_at(depth, x)),
                Box::new(m.close_at(depth, x)),
            ),
        }
    }

    /// The head constant of the application spine.
    pub fn head(&self) -> &Name {
        match self {
            AtomicFamily::Const(n) => n,
            AtomicFamily::App(h, _) => h.head(),
        }
    }
}

impl Family {
    pub fn open_var(&self, x: &VarName) -> Family {
        self.open_at(0, x)
    }

    pub(crate) fn open_at(&self, depth: u32, x: &VarName) -> Family {
        match self {
            Family::Atom(af) => Family::Atom(af.open_at(depth, x)),
            Family::Pi(dom, h, body) => Family::Pi(
                Box::new(dom.open_at(depth, x)),
                h.clone(),
                Box::new(body.open_at(depth + 1, x)),
            ),
            Family::Lock { pred, guard, guard_ty, body } => {
                let (guard, body) = match guard {
                    LockGuard::Term(n) => (
                        LockGuard::Term(Box::new(n.open_at(depth, x))),
                        Box::new(body.open_at(depth, x)),
                    ),
                    LockGuard::Binder(h) => (
                        LockGuard::Binder(h.clone()),
                        Box::new(body.open_at(depth + 1, x)),
                    ),
                };
                Family::Lock {
                    pred: pred.clone(),
                    guard,
                    guard_ty: Box::new(guard_ty.open_at(depth, x)),
                    body,
                }
            }
        }
    }

    pub fn close_var(&self, x: &VarName) -> Family {
        self.close_at(0, x)
    }

    pub(crate) fn close_at(&self, depth: u32, x: &VarName) -> Family {
        match self {
            Family::Atom(af) => Family::Atom(af.close_at(depth, x)),
            Family::Pi(dom, h, body) => Family::Pi(
                Box::new(dom.close_at(depth, x)),
                h.clone(),
                Box::new(body.close_at(depth + 1, x)),
            ),
            Family::Lock { pred, guard, guard_ty, body } => {
                let (guard, body) = match guard {
                    LockGuard::Term(n) => (
                        LockGuard::Term(Box::new(n.close_at(depth, x))),
                        Box::new(body.close_at(depth, x)),
                    ),
                    LockGuard::Binder(h) => (
                        LockGuard::Binder(h.clone()),
                        Box::new(body.close_at(depth + 1, x)),
                    ),
                };
                Family::Lock {
                    pred: pred.clone(),
                    guard,
                    guard_ty: Box::new(guard_ty.close_at(depth, x)),
                    body,
                }
            }
        }
    }

    /// The atomic family under `self`, if `self` is atomic.
    pub fn as_atom(&self) -> Option<&AtomicFamily> {
        match self {
            Family::Atom(af) => Some(af),
            _ => None,
        }
    }

    pub fn is_atomic(&self) -> bool {
        matches!(self, Family::Atom(_))
    }
}

impl AtomicObject {
    pub(crate) fn open_at(&self, depth: u32, x: &VarName) -> AtomicObject {
        match self {
            AtomicObject::Const(n) => AtomicObject::Const(n.clone()),
            AtomicObject::FVar(v) => AtomicObject::FVar(v.clone()),
            AtomicObject::BVar(k) => {
                if *k == depth {
                    AtomicObject::FVar(x.clone())
                } else {
                    AtomicObject::BVar(*k)
                }
            }
            AtomicObject::App(h, m) => AtomicObject::App(
                Box::new(h.open_at(depth, x)),
                Box::new(m.open_at(depth, x)),
            ),
            AtomicObject::Unlock { pred, witness, witness_ty, body } => AtomicObject::Unlock {
                pred: pred.clone(),
                witness: Box::new(witness.open_at(depth, x)),
                witness_ty: Box::new(witness_ty.open_at(depth, x)),
                body: Box::new(body.open_at(depth, x)),
            },
        }
    }

    pub(crate) fn close_at(&self, depth: u32, x: &VarName) -> AtomicObject {
        match self {
            AtomicObject::Const(n) => AtomicObject::Const(n.clone()),
            AtomicObject::FVar(v) => {
                if v == x {
                    AtomicObject::BVar(depth)
                } else {
                    AtomicObject::FVar(v.clone())
                }
            }
            AtomicObject::BVar(k) => AtomicObject::BVar(*k),
            AtomicObject::App(h, m) => AtomicObject::App(
                Box::new(h.close_at(depth, x)),
                Box::new(m.close_at(depth, x)),
            ),
            AtomicObject::Unlock { pred, witness, witness_ty, body } => AtomicObject::Unlock {
                pred: pred.clone(),
                witness: Box::new(witness.close_at(depth, x)),
                witness_ty: Box::new(witness_ty.close_at(depth, x)),
                body: Box::new(body.close_at(depth, x)),
            },
        }
    }

    /// The head of the application spine: a constant, variable or unlock.
    pub fn spine_head(&self) -> &AtomicObject {
        match self {
            AtomicObject::App(h, _) => h.spine_head(),
            other => other,
        }
    }
}

impl CanonicalObject {
    pub fn open_var(&self, x: &VarName) -> CanonicalObject {
        self.open_at(0, x)
    }

    pub(crate) fn open_at(&self, depth: u32, x: &VarName) -> CanonicalObject {
        match self {
            CanonicalObject::Atom(a) => CanonicalObject::Atom(a.open_at(depth, x)),
            CanonicalObject::Abs(dom, h, body) => CanonicalObject::Abs(
                Box::new(dom.open_at(depth, x)),
                h.clone(),
                Box::new(body.open_at(depth + 1, x)),
            ),
            CanonicalObject::Lock { pred, guard, guard_ty, body } => {
                let (guard, body) = match guard {
                    LockGuard::Term(n) => (
                        LockGuard::Term(Box::new(n.open_at(depth, x))),
                        Box::new(body.open_at(depth, x)),
                    ),
                    LockGuard::Binder(h) => (
                        LockGuard::Binder(h.clone()),
                        Box::new(body.open_at(depth + 1, x)),
                    ),
                };
                CanonicalObject::Lock {
                    pred: pred.clone(),
                    guard,
                    guard_ty: Box::new(guard_ty.open_at(depth, x)),
                    body,
                }
            }
        }
    }

    pub fn close_var(&self, x: &VarName) -> CanonicalObject {
        self.close_at(0, x)
    }

    pub(crate) fn close_at(&self, depth: u32, x: &VarName) -> CanonicalObject {
        match self {
            CanonicalObject::Atom(a) => CanonicalObject::Atom(a.close_at(depth, x)),
            CanonicalObject::Abs(dom, h, body) => CanonicalObject::Abs(
                Box::new(dom.close_at(depth, x)),
                h.clone(),
                Box::new(body.close_at(depth + 1, x)),
            ),
            CanonicalObject::Lock { pred, guard, guard_ty, body } => {
                let (guard, body) = match guard {
                    LockGuard::Term(n) => (
                        LockGuard::Term(Box::new(n.close_at(depth, x))),
                        Box::new(body.close_at(depth, x)),
                    ),
                    LockGuard::Binder(h) => (
                        LockGuard::Binder(h.clone()),
                        Box::new(body.close_at(depth + 1, x)),
                    ),
                };
                CanonicalObject::Lock {
                    pred: pred.clone(),
                    guard,
                    guard_ty: Box::new(guard_ty.close_at(depth, x)),
                    body,
                }
            }
        }
    }

    /// The atomic object under `self`, if `self` is an atom.
    pub fn as_atom(&self) -> Option<&AtomicObject> {
        match self {
            CanonicalObject::Atom(a) => Some(a),
            _ => None,
        }
    }

    /// A variable occurrence as a canonical object.
    pub fn var(x: VarName) -> CanonicalObject {
        CanonicalObject::Atom(AtomicObject::FVar(x))
    }
}

// ---------------------------------------------------------------------------
// Free variables
// ---------------------------------------------------------------------------

impl Kind {
    pub fn free_vars(&self) -> BTreeSet<VarName> {
        let mut acc = BTreeSet::new();
        self.collect_fv(&mut acc);
        acc
    }

    fn collect_fv(&self, acc: &mut BTreeSet<VarName>) {
        match self {
            Kind::Type => {}
            Kind::Pi(dom, _, body) => {
                dom.collect_fv(acc);
                body.collect_fv(acc);
            }
        }
    }
}

impl AtomicFamily {
    fn collect_fv(&self, acc: &mut BTreeSet<VarName>) {
        match self {
            AtomicFamily::Const(_) => {}
            AtomicFamily::App(h, m) => {
                h.collect_fv(acc);
                m.collect_fv(acc);
            }
        }
    }
}

impl Family {
    pub fn free_vars(&self) -> BTreeSet<VarName> {
        let mut acc = BTreeSet::new();
        self.collect_fv(&mut acc);
        acc
    }

    pub fn mentions(&self, x: &VarName) -> bool {
        self.free_vars().contains(x)
    }

    fn collect_fv(&self, acc: &mut BTreeSet<VarName>) {
        match self {
            Family::Atom(af) => af.collect_fv(acc),
            Family::Pi(dom, _, body) => {
                dom.collect_fv(acc);
                body.collect_fv(acc);
            }
            Family::Lock { guard, guard_ty, body, .. } => {
                if let LockGuard::Term(n) = guard {
                    n.collect_fv(acc);
                }
                guard_ty.collect_fv(acc);
                body.collect_fv(acc);
            }
        }
    }
}

impl AtomicObject {
    pub fn free_vars(&self) -> BTreeSet<VarName> {
        let mut acc = BTreeSet::new();
        self.collect_fv(&mut acc);
        acc
    }

    fn collect_fv(&self, acc: &mut BTreeSet<VarName>) {
        match self {
            AtomicObject::Const(_) | AtomicObject::BVar(_) => {}
            AtomicObject::FVar(v) => {
                acc.insert(v.clone());
            }
            AtomicObject::App(h, m) => {
                h.collect_fv(acc);
                m.collect_fv(acc);
            }
            AtomicObject::Unlock { witness, witness_ty, body, .. } => {
                witness.collect_fv(acc);
                witness_ty.collect_fv(acc);
                body.collect_fv(acc);
            }
        }
    }
}

impl CanonicalObject {
    pub fn free_vars(&self) -> BTreeSet<VarName> {
        let mut acc = BTreeSet::new();
        self.collect_fv(&mut acc);
        acc
    }

    pub fn mentions(&self, x: &VarName) -> bool {
        self.free_vars().contains(x)
    }

    fn collect_fv(&self, acc: &mut BTreeSet<VarName>) {
        match self {
            CanonicalObject::Atom(a) => a.collect_fv(acc),
            CanonicalObject::Abs(dom, _, body) => {
                dom.collect_fv(acc);
                body.collect_fv(acc);
            }
            CanonicalObject::Lock { guard, guard_ty, body, .. } => {
                if let LockGuard::Term(n) = guard {
                    n.collect_fv(acc);
                }
                guard_ty.collect_fv(acc);
                body.collect_fv(acc);
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Local closure (no index points past the root)
// ---------------------------------------------------------------------------

impl Kind {
    pub fn is_locally_closed(&self) -> bool {
        self.lc_at(0)
    }

    fn lc_at(&self, depth: u32) -> bool {
        match self {
            Kind::Type => true,
            Kind::Pi(dom, _, body) => dom.lc_at(depth) && body.lc_at(depth + 1),
        }
    }
}

impl AtomicFamily {
    fn lc_at(&self, depth: u32) -> bool {
        match self {
            AtomicFamily::Const(_) => true,
            AtomicFamily::App(h, m) => h.lc_at(depth) && m.lc_at(depth),
        }
    }
}

impl Family {
    pub fn is_locally_closed(&self) -> bool {
        self.lc_at(0)
    }

    fn lc_at(&self, depth: u32) -> bool {
        match self {
            Family::Atom(af) => af.lc_at(depth),
            Family::Pi(dom, _, body) => dom.lc_at(depth) && body.lc_at(depth + 1),
            Family::Lock { guard, guard_ty, body, .. } => {
                let (gok, bdepth) = match guard {
                    LockGuard::Term(n) => (n.lc_at(depth), depth),
                    LockGuard::Binder(_) => (true, depth + 1),
                };
                gok && guard_ty.lc_at(depth) && body.lc_at(bdepth)
            }
        }
    }
}

impl AtomicObject {
    pub fn is_locally_closed(&self) -> bool {
        self.lc_at(0)
    }

    fn lc_at(&self, depth: u32) -> bool {
        match self {
            AtomicObject::Const(_) | AtomicObject::FVar(_) => true,
            AtomicObject::BVar(k) => *k < depth,
            AtomicObject::App(h, m) => h.lc_at(depth) && m.lc_at(depth),
            AtomicObject::Unlock { witness, witness_ty, body, .. } => {
                witness.lc_at(depth) && witness_ty.lc_at(depth) && body.lc_at(depth)
            }
        }
    }
}

impl CanonicalObject {
    pub fn is_locally_closed(&self) -> bool {
        self.lc_at(0)
    }

    fn lc_at(&self, depth: u32) -> bool {
        match self {
            CanonicalObject::Atom(a) => a.lc_at(depth),
            CanonicalObject::Abs(dom, _, body) => dom.lc_at(depth) && body.lc_at(depth + 1),
            CanonicalObject::Lock { guard, guard_ty, body, .. } => {
                let (gok, bdepth) = match guard {
                    LockGuard::Term(n) => (n.lc_at(depth), depth),
                    LockGuard::Binder(_) => (true, depth + 1),
                };
                gok && guard_ty.lc_at(depth) && body.lc_at(bdepth)
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Sizes (used for the substitution termination measure)
// ---------------------------------------------------------------------------

impl Kind {
    pub fn size(&self) -> usize {
        match self {
            Kind::Type => 1,
            Kind::Pi(dom, _, body) => 1 + dom.size() + body.size(),
        }
    }
}

impl AtomicFamily {
    pub fn size(&self) -> usize {
        match self {
            AtomicFamily::Const(_) => 1,
            AtomicFamily::App(h, m) => 1 + h.size() + m.size(),
        }
    }
}

impl Family {
    pub fn size(&self) -> usize {
        match self {
            Family::Atom(af) => af.size(),
            Family::Pi(dom, _, body) => 1 + dom.size() + body.size(),
            Family::Lock { guard, guard_ty, body, .. } => {
                let g = match guard {
                    LockGuard::Term(n) => n.size(),
                    LockGuard::Binder(_) => 0,
                };
                1 + g + guard_ty.size() + body.size()
            }
        }
    }
}

impl AtomicObject {
    pub fn size(&self) -> usize {
        match self {
            AtomicObject::Const(_) | AtomicObject::FVar(_) | AtomicObject::BVar(_) => 1,
            AtomicObject::App(h, m) => 1 + h.size() + m.size(),
            AtomicObject::Unlock { witness, witness_ty, body, .. } => {
                1 + witness.size() + witness_ty.size() + body.size()
            }
        }
    }
}

impl CanonicalObject {
    pub fn size(&self) -> usize {
        match self {
            CanonicalObject::Atom(a) => a.size(),
            CanonicalObject::Abs(dom, _, body) => 1 + dom.size() + body.size(),
            CanonicalObject::Lock { guard, guard_ty, body, .. } => {
                let g = match guard {
                    LockGuard::Term(n) => n.size(),
                    LockGuard::Binder(_) => 0,
                };
                1 + g + guard_ty.size() + body.size()
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Erasure to simple types
// ---------------------------------------------------------------------------

/// Erases a family to its simple type:
///
/// ```text
/// (a)-              = a
/// (P M)-            = (P)-
/// (Pi x : F . G)-   = (F)- -> (G)-
/// (lock[p; G : F] G')- = lock[p; G : F] (G')-
/// ```
///
/// Erasing a Pi drops its binder, so occurrences of the bound variable that
/// survive inside lock guards are replaced by deterministic placeholder
/// variables (`VarName::placeholder`, numbered by the binders crossed from
/// the erasure root). Alpha-equal families therefore erase to equal simple
/// types.
pub fn erase(f: &Family) -> SimpleType {
    erase_at(f, 0)
}

fn erase_at(f: &Family, level: u32) -> SimpleType {
    match f {
        Family::Atom(af) => SimpleType::Base(af.head().clone()),
        Family::Pi(dom, _, body) => {
            let d = erase_at(dom, level);
            let opened = body.open_var(&VarName::placeholder(level));
            let c = erase_at(&opened, level + 1);
            SimpleType::Arrow(Box::new(d), Box::new(c))
        }
        Family::Lock { pred, guard, guard_ty, body } => match guard {
            LockGuard::Term(n) => SimpleType::Lock {
                pred: pred.clone(),
                guard: LockGuard::Term(n.clone()),
                guard_ty: guard_ty.clone(),
                body: Box::new(erase_at(body, level)),
            },
            LockGuard::Binder(h) => {
                let opened = body.open_var(&VarName::placeholder(level));
                SimpleType::Lock {
                    pred: pred.clone(),
                    guard: LockGuard::Binder(h.clone()),
                    guard_ty: guard_ty.clone(),
                    body: Box::new(erase_at(&opened, level + 1)),
                }
            }
        },
    }
}

// ---------------------------------------------------------------------------
// Mode discipline
// ---------------------------------------------------------------------------

/// A lock whose guard shape disagrees with the session mode.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModeViolation {
    pub expected: SystemMode,
    pub found: SystemMode,
    pub at: String,
}

impl std::fmt::Display for ModeViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "lock at {} has a mode-{} guard, but the session runs mode {}",
            self.at, self.found, self.expected
        )
    }
}

fn check_guard_mode(guard: &LockGuard, mode: SystemMode, at: &str) -> Result<(), ModeViolation> {
    if guard.mode() != mode {
        return Err(ModeViolation { expected: mode, found: guard.mode(), at: at.to_string() });
    }
    if let LockGuard::Term(n) = guard {
        validate_mode_object(n, mode)?;
    }
    Ok(())
}

/// Checks that every lock in the kind matches the session mode.
pub fn validate_mode_kind(k: &Kind, mode: SystemMode) -> Result<(), ModeViolation> {
    match k {
        Kind::Type => Ok(()),
        Kind::Pi(dom, _, body) => {
            validate_mode_family(dom, mode)?;
            validate_mode_kind(body, mode)
        }
    }
}

/// Checks that every lock in the family matches the session mode.
pub fn validate_mode_family(f: &Family, mode: SystemMode) -> Result<(), ModeViolation> {
    match f {
        Family::Atom(af) => validate_mode_atomic_family(af, mode),
        Family::Pi(dom, _, body) => {
            validate_mode_family(dom, mode)?;
            validate_mode_family(body, mode)
        }
        Family::Lock { guard, guard_ty, body, .. } => {
            check_guard_mode(guard, mode, "family lock")?;
            validate_mode_family(guard_ty, mode)?;
            validate_mode_family(body, mode)
        }
    }
}

pub fn validate_mode_atomic_family(af: &AtomicFamily, mode: SystemMode) -> Result<(), ModeViolation> {
    match af {
        AtomicFamily::Const(_) => Ok(()),
        AtomicFamily::App(h, m) => {
            validate_mode_atomic_family(h, mode)?;
            validate_mode_object(m, mode)
        }
    }
}

/// Checks that every lock in the object matches the session mode.
pub fn validate_mode_object(m: &CanonicalObject, mode: SystemMode) -> Result<(), ModeViolation> {
    match m {
        CanonicalObject::Atom(a) => validate_mode_atomic_object(a, mode),
        CanonicalObject::Abs(dom, _, body) => {
            validate_mode_family(dom, mode)?;
            validate_mode_object(body, mode)
        }
        CanonicalObject::Lock { guard, guard_ty, body, .. } => {
            check_guard_mode(guard, mode, "object lock")?;
            validate_mode_family(guard_ty, mode)?;
            validate_mode_object(body, mode)
        }
    }
}

pub fn validate_mode_atomic_object(a: &AtomicObject, mode: SystemMode) -> Result<(), ModeViolation> {
    match a {
        AtomicObject::Const(_) | AtomicObject::FVar(_) | AtomicObject::BVar(_) => Ok(()),
        AtomicObject::App(h, m) => {
            validate_mode_atomic_object(h, mode)?;
            validate_mode_object(m, mode)
        }
        AtomicObject::Unlock { witness, witness_ty, body, .. } => {
            validate_mode_object(witness, mode)?;
            validate_mode_family(witness_ty, mode)?;
            validate_mode_atomic_object(body, mode)
        }
    }
}

/// Checks that every lock in every declaration matches the session mode.
pub fn validate_mode_signature(sig: &Signature, mode: SystemMode) -> Result<(), ModeViolation> {
    for d in &sig.decls {
        match &d.classifier {
            SigClassifier::Fam(k) => validate_mode_kind(k, mode)?,
            SigClassifier::Obj(f) => validate_mode_family(f, mode)?,
        }
    }
    Ok(())
}

/// Checks that every lock in every binding matches the session mode.
pub fn validate_mode_context(ctx: &Context, mode: SystemMode) -> Result<(), ModeViolation> {
    for (_, f) in &ctx.entries {
        validate_mode_family(f, mode)?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Constant mentions (used by skeleton decomposition and the printer)
// ---------------------------------------------------------------------------

pub(crate) fn collect_consts_kind(k: &Kind, acc: &mut BTreeSet<Name>) {
    match k {
        Kind::Type => {}
        Kind::Pi(dom, _, body) => {
            collect_consts_family(dom, acc);
            collect_consts_kind(body, acc);
        }
    }
}

pub(crate) fn collect_consts_family(f: &Family, acc: &mut BTreeSet<Name>) {
    match f {
        Family::Atom(af) => collect_consts_atomic_family(af, acc),
        Family::Pi(dom, _, body) => {
            collect_consts_family(dom, acc);
            collect_consts_family(body, acc);
        }
        Family::Lock { guard, guard_ty, body, .. } => {
            if let LockGuard::Term(n) = guard {
                collect_consts_object(n, acc);
            }
            collect_consts_family(guard_ty, acc);
            collect_consts_family(body, acc);
        }
    }
}

pub(crate) fn collect_consts_atomic_family(af: &AtomicFamily, acc: &mut BTreeSet<Name>) {
    match af {
        AtomicFamily::Const(n) => {
            acc.insert(n.clone());
        }
        AtomicFamily::App(h, m) => {
            collect_consts_atomic_family(h, acc);
            collect_consts_object(m, acc);
        }
    }
}

pub(crate) fn collect_consts_object(m: &CanonicalObject, acc: &mut BTreeSet<Name>) {
    match m {
        CanonicalObject::Atom(a) => collect_consts_atomic_object(a, acc),
        CanonicalObject::Abs(dom, _, body) => {
            collect_consts_family(dom, acc);
            collect_consts_object(body, acc);
        }
        CanonicalObject::Lock { guard, guard_ty, body, .. } => {
            if let LockGuard::Term(n) = guard {
                collect_consts_object(n, acc);
            }
            collect_consts_family(guard_ty, acc);
            collect_consts_object(body, acc);
        }
    }
}

pub(crate) fn collect_consts_atomic_object(a: &AtomicObject, acc: &mut BTreeSet<Name>) {
    match a {
        AtomicObject::Const(n) => {
            acc.insert(n.clone());
        }
        AtomicObject::FVar(_) | AtomicObject::BVar(_) => {}
        AtomicObject::App(h, m) => {
            collect_consts_atomic_object(h, acc);
            collect_consts_object(m, acc);
        }
        AtomicObject::Unlock { witness, witness_ty, body, .. } => {
            collect_consts_object(witness, acc);
            collect_consts_family(witness_ty, acc);
            collect_consts_atomic_object(body, acc);
        }
    }
}

// ---------------------------------------------------------------------------
// Construction helpers
// ---------------------------------------------------------------------------

/// Builders that take higher-order functions for binder bodies, so test and
/// corpus code never touches de Bruijn indices directly.
pub mod build {
    use super::*;

    pub fn fconst(name: &str) -> Family {
        Family::Atom(AtomicFamily::Const(name.into()))
    }

    pub fn fapp(head: AtomicFamily, arg: CanonicalObject) -> AtomicFamily {
        AtomicFamily::App(Box::new(head), Box::new(arg))
    }

    pub fn fatom(name: &str, args: impl IntoIterator<Item = CanonicalObject>) -> Family {
        let mut af = AtomicFamily::Const(name.into());
        for a in args {
            af = fapp(af, a);
        }
        Family::Atom(af)
    }

    /// `Pi x : dom . body(x)`.
    pub fn pi(hint: &str, dom: Family, body: impl FnOnce(CanonicalObject) -> Family) -> Family {
        let x = VarName::fresh(hint);
        let b = body(CanonicalObject::var(x.clone()));
        Family::Pi(Box::new(dom), NameHint::new(hint), Box::new(b.close_var(&x)))
    }

    /// `dom -> cod` (a Pi that does not use its variable).
    pub fn arrow(dom: Family, cod: Family) -> Family {
        Family::Pi(Box::new(dom), NameHint::anon(), Box::new(cod))
    }

    /// Mode-P `lock[pred; guard : guard_ty] body` at the family level.
    pub fn flock(pred: &str, guard: CanonicalObject, guard_ty: Family, body: Family) -> Family {
        Family::Lock {
            pred: pred.into(),
            guard: LockGuard::Term(Box::new(guard)),
            guard_ty: Box::new(guard_ty),
            body: Box::new(body),
        }
    }

    /// Mode-PQ `lock[pred; x : guard_ty] body(x)` at the family level.
    pub fn flock_pq(
        pred: &str,
        hint: &str,
        guard_ty: Family,
        body: impl FnOnce(CanonicalObject) -> Family,
    ) -> Family {
        let x = VarName::fresh(hint);
        let b = body(CanonicalObject::var(x.clone()));
        Family::Lock {
            pred: pred.into(),
            guard: LockGuard::Binder(NameHint::new(hint)),
            guard_ty: Box::new(guard_ty),
            body: Box::new(b.close_var(&x)),
        }
    }

    pub fn oconst(name: &str) -> AtomicObject {
        AtomicObject::Const(name.into())
    }

    pub fn ovar(x: &VarName) -> AtomicObject {
        AtomicObject::FVar(x.clone())
    }

    pub fn app(head: AtomicObject, arg: CanonicalObject) -> AtomicObject {
        AtomicObject::App(Box::new(head), Box::new(arg))
    }

    pub fn apps(head: AtomicObject, args: impl IntoIterator<Item = CanonicalObject>) -> AtomicObject {
        let mut a = head;
        for m in args {
            a = app(a, m);
        }
        a
    }

    pub fn atom(a: AtomicObject) -> CanonicalObject {
        CanonicalObject::Atom(a)
    }

    /// `\x : dom . body(x)`.
    pub fn abs(
        hint: &str,
        dom: Family,
        body: impl FnOnce(CanonicalObject) -> CanonicalObject,
    ) -> CanonicalObject {
        let x = VarName::fresh(hint);
        let b = body(CanonicalObject::var(x.clone()));
        CanonicalObject::Abs(Box::new(dom), NameHint::new(hint), Box::new(b.close_var(&x)))
    }

    /// Mode-P `lock[pred; guard : guard_ty] body` at the object level.
    pub fn olock(
        pred: &str,
        guard: CanonicalObject,
        guard_ty: Family,
        body: CanonicalObject,
    ) -> CanonicalObject {
        CanonicalObject::Lock {
            pred: pred.into(),
            guard: LockGuard::Term(Box::new(guard)),
            guard_ty: Box::new(guard_ty),
            body: Box::new(body),
        }
    }

    /// Mode-PQ `lock[pred; x : guard_ty] body(x)` at the object level.
    pub fn olock_pq(
        pred: &str,
        hint: &str,
        guard_ty: Family,
        body: impl FnOnce(CanonicalObject) -> CanonicalObject,
    ) -> CanonicalObject {
        let x = VarName::fresh(hint);
        let b = body(CanonicalObject::var(x.clone()));
        CanonicalObject::Lock {
            pred: pred.into(),
            guard: LockGuard::Binder(NameHint::new(hint)),
            guard_ty: Box::new(guard_ty),
            body: Box::new(b.close_var(&x)),
        }
    }

    /// `unlock[pred; witness : witness_ty] body`.
    pub fn unlock(
        pred: &str,
        witness: CanonicalObject,
        witness_ty: Family,
        body: AtomicObject,
    ) -> AtomicObject {
        AtomicObject::Unlock {
            pred: pred.into(),
            witness: Box::new(witness),
            witness_ty: Box::new(witness_ty),
            body: Box::new(body),
        }
    }

    /// `Pi x : dom . body(x)` at the kind level.
    pub fn kpi(hint: &str, dom: Family, body: impl FnOnce(CanonicalObject) -> Kind) -> Kind {
        let x = VarName::fresh(hint);
        let b = body(CanonicalObject::var(x.clone()));
        Kind::Pi(Box::new(dom), NameHint::new(hint), Box::new(b.close_var(&x)))
    }

    /// `dom -> Type`-style non-dependent kind arrow.
    pub fn karrow(dom: Family, cod: Kind) -> Kind {
        Kind::Pi(Box::new(dom), NameHint::anon(), Box::new(cod))
    }
}

#[cfg(test)]
mod tests {
    use super::build::*;
    use super::*;

    fn sig_ab() -> Signature {
        let mut sig = Signature::new();
        sig.push_fam("a", Kind::Type);
        sig.push_fam("b", karrow(fconst("a"), Kind::Type));
        sig.push_obj("c", fconst("a"));
        sig
    }

    #[test]
    fn alpha_eq_ignores_binder_hints() {
        let id1 = abs("x", fconst("a"), |x| x);
        let id2 = abs("y", fconst("a"), |y| y);
        assert!(alpha_eq(&id1, &id2));
        assert_eq!(id1, id2);
    }

    #[test]
    fn alpha_eq_distinguishes_different_bodies() {
        let id = abs("x", fconst("a"), |x| x);
        let konst = abs("x", fconst("a"), |_| atom(oconst("c")));
        assert!(!alpha_eq(&id, &konst));
    }

    #[test]
    fn alpha_eq_compares_lock_guards_structurally() {
        let l1 = olock("P", atom(oconst("c")), fconst("a"), atom(oconst("c")));
        let l2 = olock("P", atom(oconst("c")), fconst("a"), atom(oconst("c")));
        let l3 = olock("P", atom(oconst("d")), fconst("a"), atom(oconst("c")));
        assert_eq!(l1, l2);
        assert_ne!(l1, l3);
    }

    #[test]
    fn alpha_eq_pq_locks_up_to_binder_renaming() {
        let l1 = olock_pq("P", "x", fconst("a"), |x| x);
        let l2 = olock_pq("P", "y", fconst("a"), |y| y);
        assert_eq!(l1, l2);
    }

    #[test]
    fn pi_binders_rename_invariantly() {
        let p1 = pi("x", fconst("a"), |x| fatom("b", [x]));
        let p2 = pi("z", fconst("a"), |z| fatom("b", [z]));
        assert_eq!(p1, p2);
    }

    #[test]
    fn erase_pi_to_arrow() {
        let f = pi("x", fconst("a"), |x| fatom("b", [x]));
        let s = erase(&f);
        assert_eq!(
            s,
            SimpleType::Arrow(
                Box::new(SimpleType::Base("a".into())),
                Box::new(SimpleType::Base("b".into()))
            )
        );
    }

    #[test]
    fn erase_drops_family_arguments() {
        let f = fatom("b", [atom(oconst("c"))]);
        assert_eq!(erase(&f), SimpleType::Base("b".into()));
    }

    #[test]
    fn erase_keeps_lock_guards_verbatim() {
        let f = flock("P", atom(oconst("c")), fconst("a"), fconst("a"));
        match erase(&f) {
            SimpleType::Lock { pred, guard, guard_ty, body } => {
                assert_eq!(&*pred, "P");
                assert_eq!(guard, LockGuard::Term(Box::new(atom(oconst("c")))));
                assert_eq!(*guard_ty, fconst("a"));
                assert_eq!(*body, SimpleType::Base("a".into()));
            }
            other => panic!("expected a lock simple type, got {other:?}"),
        }
    }

    #[test]
    fn erase_is_deterministic_under_alpha() {
        // A Pi-bound variable that survives inside a lock guard becomes the
        // same placeholder regardless of the binder hint.
        let mk = |hint: &str| {
            pi(hint, fconst("a"), |x| {
                flock("P", x, fconst("a"), fconst("a"))
            })
        };
        let e1 = erase(&mk("x"));
        let e2 = erase(&mk("other"));
        assert_eq!(e1, e2);
        match &e1 {
            SimpleType::Arrow(_, cod) => match &**cod {
                SimpleType::Lock { guard, .. } => match guard {
                    LockGuard::Term(n) => {
                        let fv = n.free_vars();
                        assert_eq!(fv.len(), 1);
                        assert!(fv.iter().next().unwrap().is_placeholder());
                    }
                    LockGuard::Binder(_) => panic!("unexpected binder guard"),
                },
                other => panic!("expected lock under arrow, got {other:?}"),
            },
            other => panic!("expected arrow, got {other:?}"),
        }
    }

    #[test]
    fn erase_size_never_grows() {
        let f = pi("x", fconst("a"), |x| {
            pi("y", fatom("b", [x.clone()]), move |_| {
                flock("P", x, fconst("a"), fconst("a"))
            })
        });
        assert!(erase(&f).size() <= f.size());
    }

    #[test]
    fn free_vars_of_identity_is_empty() {
        let id = abs("x", fconst("a"), |x| x);
        assert!(id.free_vars().is_empty());
        assert!(id.is_locally_closed());
    }

    #[test]
    fn free_vars_of_application_spine() {
        let x = VarName::source("x");
        let y = VarName::source("y");
        let t = atom(app(ovar(&x), CanonicalObject::var(y.clone())));
        let fv = t.free_vars();
        assert_eq!(fv.len(), 2);
        assert!(fv.contains(&x) && fv.contains(&y));
    }

    #[test]
    fn free_vars_include_lock_guards() {
        let g = VarName::source("g");
        let t = olock("P", CanonicalObject::var(g.clone()), fconst("a"), atom(oconst("c")));
        assert!(t.free_vars().contains(&g));
    }

    #[test]
    fn open_close_round_trip() {
        let body_open = atom(app(oconst("f"), CanonicalObject::var(VarName::source("v"))));
        let v = VarName::source("v");
        let closed = body_open.close_var(&v);
        assert!(!closed.is_locally_closed());
        let reopened = closed.open_var(&v);
        assert_eq!(reopened, body_open);
    }

    #[test]
    fn subexpression_order_on_simple_types() {
        let a = SimpleType::Base("a".into());
        let b = SimpleType::Base("b".into());
        let ab = SimpleType::Arrow(Box::new(a.clone()), Box::new(b.clone()));
        assert!(a.is_subexpression_of(&ab));
        assert!(b.is_subexpression_of(&ab));
        assert!(ab.is_subexpression_of(&ab));
        assert!(!ab.is_subexpression_of(&a));
    }

    #[test]
    fn mode_validation_flags_wrong_guard() {
        let p_lock = flock("P", atom(oconst("c")), fconst("a"), fconst("a"));
        assert!(validate_mode_family(&p_lock, SystemMode::P).is_ok());
        assert!(validate_mode_family(&p_lock, SystemMode::Pq).is_err());
        let pq_lock = flock_pq("P", "x", fconst("a"), |_| fconst("a"));
        assert!(validate_mode_family(&pq_lock, SystemMode::Pq).is_ok());
        assert!(validate_mode_family(&pq_lock, SystemMode::P).is_err());
    }

    #[test]
    fn signature_lookup_by_role() {
        let sig = sig_ab();
        assert!(sig.fam_const("a").is_some());
        assert!(sig.fam_const("c").is_none());
        assert!(sig.obj_const("c").is_some());
        assert!(sig.contains("b"));
        assert!(!sig.contains("missing"));
    }

    #[test]
    fn context_lookup_finds_latest_binding() {
        let x = VarName::source("x");
        let ctx = Context::new()
            .extended(x.clone(), fconst("a"))
            .extended(VarName::source("y"), fconst("a"));
        assert_eq!(ctx.lookup(&x), Some(&fconst("a")));
        assert_eq!(ctx.len(), 2);
    }
}
