//! The official term printer.
//!
//! Output re-parses to an alpha-equal term: binder hints are renamed (by
//! appending primes) whenever they would capture a free variable, shadow an
//! enclosing binder referenced from the body, or collide with a constant or
//! reserved word. Pi binders that do not occur in their body print as `->`
//! arrows. Lock, unlock and binder bodies extend maximally to the right, so
//! those positions never take parentheses; application heads and arguments
//! do.

use std::collections::BTreeSet;
use std::fmt;

use super::*;

pub(crate) const RESERVED_WORDS: &[&str] = &[
    "Type", "Pi", "lock", "unlock", "signature", "context", "end", "check",
    "synth", "solve", "expect", "valid", "invalid", "error", "witness",
    "nowitness", "unlocks", "system", "family", "kind", "lint", "flagged",
    "clean",
];

pub(crate) fn is_reserved(s: &str) -> bool {
    RESERVED_WORDS.contains(&s)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Prec {
    /// Top level and binder bodies: nothing needs parentheses.
    Top,
    /// Left operand of an arrow and binder domains.
    ArrowL,
    /// Head of an application spine.
    Head,
    /// Argument of an application.
    Arg,
}

struct Pr {
    scope: Vec<String>,
    out: String,
}

fn kind_uses_ix(k: &Kind, d: u32) -> bool {
    match k {
        Kind::Type => false,
        Kind::Pi(dom, _, body) => fam_uses_ix(dom, d) || kind_uses_ix(body, d + 1),
    }
}

fn afam_uses_ix(af: &AtomicFamily, d: u32) -> bool {
    match af {
        AtomicFamily::Const(_) => false,
        AtomicFamily::App(h, m) => afam_uses_ix(h, d) || obj_uses_ix(m, d),
    }
}

fn fam_uses_ix(f: &Family, d: u32) -> bool {
    match f {
        Family::Atom(af) => afam_uses_ix(af, d),
        Family::Pi(dom, _, body) => fam_uses_ix(dom, d) || fam_uses_ix(body, d + 1),
        Family::Lock { guard, guard_ty, body, .. } => {
            let (g, bd) = match guard {
                LockGuard::Term(n) => (obj_uses_ix(n, d), d),
                LockGuard::Binder(_) => (false, d + 1),
            };
            g || fam_uses_ix(guard_ty, d) || fam_uses_ix(body, bd)
        }
    }
}

fn aobj_uses_ix(a: &AtomicObject, d: u32) -> bool {
    match a {
        AtomicObject::Const(_) | AtomicObject::FVar(_) => false,
        AtomicObject::BVar(k) => *k == d,
        AtomicObject::App(h, m) => aobj_uses_ix(h, d) || obj_uses_ix(m, d),
        AtomicObject::Unlock { witness, witness_ty, body, .. } => {
            obj_uses_ix(witness, d) || fam_uses_ix(witness_ty, d) || aobj_uses_ix(body, d)
        }
    }
}

fn obj_uses_ix(m: &CanonicalObject, d: u32) -> bool {
    match m {
        CanonicalObject::Atom(a) => aobj_uses_ix(a, d),
        CanonicalObject::Abs(dom, _, body) => fam_uses_ix(dom, d) || obj_uses_ix(body, d + 1),
        CanonicalObject::Lock { guard, guard_ty, body, .. } => {
            let (g, bd) = match guard {
                LockGuard::Term(n) => (obj_uses_ix(n, d), d),
                LockGuard::Binder(_) => (false, d + 1),
            };
            g || fam_uses_ix(guard_ty, d) || obj_uses_ix(body, bd)
        }
    }
}

impl Pr {
    fn new() -> Self {
        Pr { scope: Vec::new(), out: String::new() }
    }

    fn avoid_from(&self, fvs: BTreeSet<VarName>, consts: BTreeSet<Name>) -> BTreeSet<String> {
        let mut s: BTreeSet<String> = self.scope.iter().cloned().collect();
        for v in fvs {
            s.insert(v.text.to_string());
        }
        for c in consts {
            s.insert(c.to_string());
        }
        s
    }

    fn avoid_for_kind(&self, k: &Kind) -> BTreeSet<String> {
        let mut cs = BTreeSet::new();
        collect_consts_kind(k, &mut cs);
        self.avoid_from(k.free_vars(), cs)
    }

    fn avoid_for_family(&self, f: &Family) -> BTreeSet<String> {
        let mut cs = BTreeSet::new();
        collect_consts_family(f, &mut cs);
        self.avoid_from(f.free_vars(), cs)
    }

    fn avoid_for_obj(&self, m: &CanonicalObject) -> BTreeSet<String> {
        let mut cs = BTreeSet::new();
        collect_consts_object(m, &mut cs);
        self.avoid_from(m.free_vars(), cs)
    }

    fn pick_name(&self, hint: &NameHint, used: bool, avoid: &BTreeSet<String>) -> String {
        if !used {
            return "_".to_string();
        }
        let base = hint.as_str();
        let base = if base.is_empty() || base == "_" { "x" } else { base };
        let mut cand = base.to_string();
        while avoid.contains(&cand) || is_reserved(&cand) {
            cand.push('\'');
        }
        cand
    }

    fn bvar(&mut self, k: u32) {
        let i = self.scope.len().checked_sub(1 + k as usize);
        match i.and_then(|i| self.scope.get(i)) {
            Some(name) => self.out.push_str(name),
            None => {
                debug_assert!(false, "unbound index {k} while printing");
                self.out.push('#');
                self.out.push_str(&k.to_string());
            }
        }
    }

    fn paren<F: FnOnce(&mut Self)>(&mut self, needed: bool, f: F) {
        if needed {
            self.out.push('(');
            f(self);
            self.out.push(')');
        } else {
            f(self);
        }
    }

    fn kind(&mut self, k: &Kind, p: Prec) {
        match k {
            Kind::Type => self.out.push_str("Type"),
            Kind::Pi(dom, hint, body) => self.paren(p != Prec::Top, |pr| {
                let used = kind_uses_ix(body, 0);
                if used {
                    let avoid = pr.avoid_for_kind(body);
                    let name = pr.pick_name(hint, true, &avoid);
                    pr.out.push_str("Pi ");
                    pr.out.push_str(&name);
                    pr.out.push_str(" : ");
                    pr.family(dom, Prec::ArrowL);
                    pr.out.push_str(" . ");
                    pr.scope.push(name);
                } else {
                    pr.family(dom, Prec::ArrowL);
                    pr.out.push_str(" -> ");
                    pr.scope.push(String::new());
                }
                pr.kind(body, Prec::Top);
                pr.scope.pop();
            }),
        }
    }

    fn afam(&mut self, af: &AtomicFamily, p: Prec) {
        match af {
            AtomicFamily::Const(n) => self.out.push_str(n),
            AtomicFamily::App(h, m) => self.paren(p == Prec::Arg, |pr| {
                pr.afam(h, Prec::Head);
                pr.out.push(' ');
                pr.obj(m, Prec::Arg);
            }),
        }
    }

    fn family(&mut self, f: &Family, p: Prec) {
        match f {
            Family::Atom(af) => self.afam(af, p),
            Family::Pi(dom, hint, body) => self.paren(p != Prec::Top, |pr| {
                let used = fam_uses_ix(body, 0);
                if used {
                    let avoid = pr.avoid_for_family(body);
                    let name = pr.pick_name(hint, true, &avoid);
                    pr.out.push_str("Pi ");
                    pr.out.push_str(&name);
                    pr.out.push_str(" : ");
                    pr.family(dom, Prec::ArrowL);
                    pr.out.push_str(" . ");
                    pr.scope.push(name);
                } else {
                    pr.family(dom, Prec::ArrowL);
                    pr.out.push_str(" -> ");
                    pr.scope.push(String::new());
                }
                pr.family(body, Prec::Top);
                pr.scope.pop();
            }),
            Family::Lock { pred, guard, guard_ty, body } => {
                self.paren(p != Prec::Top, |pr| {
                    pr.out.push_str("lock[");
                    pr.out.push_str(pred);
                    pr.out.push_str("; ");
                    match guard {
                        LockGuard::Term(n) => {
                            pr.obj(n, Prec::Top);
                            pr.out.push_str(" : ");
                            pr.family(guard_ty, Prec::Top);
                            pr.out.push_str("] ");
                            pr.family(body, Prec::Top);
                        }
                        LockGuard::Binder(hint) => {
                            let used = fam_uses_ix(body, 0);
                            let avoid = pr.avoid_for_family(body);
                            let name = pr.pick_name(hint, used, &avoid);
                            pr.out.push_str(&name);
                            pr.out.push_str(" : ");
                            pr.family(guard_ty, Prec::Top);
                            pr.out.push_str("] ");
                            pr.scope.push(name);
                            pr.family(body, Prec::Top);
                            pr.scope.pop();
                        }
                    }
                })
            }
        }
    }

    fn aobj(&mut self, a: &AtomicObject, p: Prec) {
        match a {
            AtomicObject::Const(n) => self.out.push_str(n),
            AtomicObject::FVar(v) => self.out.push_str(&v.text),
            AtomicObject::BVar(k) => self.bvar(*k),
            AtomicObject::App(h, m) => self.paren(p == Prec::Arg, |pr| {
                pr.aobj(h, Prec::Head);
                pr.out.push(' ');
                pr.obj(m, Prec::Arg);
            }),
            AtomicObject::Unlock { pred, witness, witness_ty, body } => {
                self.paren(p != Prec::Top, |pr| {
                    pr.out.push_str("unlock[");
                    pr.out.push_str(pred);
                    pr.out.push_str("; ");
                    pr.obj(witness, Prec::Top);
                    pr.out.push_str(" : ");
                    pr.family(witness_ty, Prec::Top);
                    pr.out.push_str("] ");
                    pr.aobj(body, Prec::Top);
                })
            }
        }
    }

    fn obj(&mut self, m: &CanonicalObject, p: Prec) {
        match m {
            CanonicalObject::Atom(a) => self.aobj(a, p),
            CanonicalObject::Abs(dom, hint, body) => self.paren(p != Prec::Top, |pr| {
                let used = obj_uses_ix(body, 0);
                let avoid = pr.avoid_for_obj(body);
                let name = pr.pick_name(hint, used, &avoid);
                pr.out.push('\\');
                pr.out.push_str(&name);
                pr.out.push_str(" : ");
                pr.family(dom, Prec::ArrowL);
                pr.out.push_str(" . ");
                pr.scope.push(name);
                pr.obj(body, Prec::Top);
                pr.scope.pop();
            }),
            CanonicalObject::Lock { pred, guard, guard_ty, body } => {
                self.paren(p != Prec::Top, |pr| {
                    pr.out.push_str("lock[");
                    pr.out.push_str(pred);
                    pr.out.push_str("; ");
                    match guard {
                        LockGuard::Term(n) => {
                            pr.obj(n, Prec::Top);
                            pr.out.push_str(" : ");
                            pr.family(guard_ty, Prec::Top);
                            pr.out.push_str("] ");
                            pr.obj(body, Prec::Top);
                        }
                        LockGuard::Binder(hint) => {
                            let used = obj_uses_ix(body, 0);
                            let avoid = pr.avoid_for_obj(body);
                            let name = pr.pick_name(hint, used, &avoid);
                            pr.out.push_str(&name);
                            pr.out.push_str(" : ");
                            pr.family(guard_ty, Prec::Top);
                            pr.out.push_str("] ");
                            pr.scope.push(name);
                            pr.obj(body, Prec::Top);
                            pr.scope.pop();
                        }
                    }
                })
            }
        }
    }

    fn stype(&mut self, s: &SimpleType, p: Prec) {
        match s {
            SimpleType::Base(n) => self.out.push_str(n),
            SimpleType::Arrow(l, r) => self.paren(p != Prec::Top, |pr| {
                pr.stype(l, Prec::ArrowL);
                pr.out.push_str(" -> ");
                pr.stype(r, Prec::Top);
            }),
            SimpleType::Lock { pred, guard, guard_ty, body } => {
                self.paren(p != Prec::Top, |pr| {
                    pr.out.push_str("lock[");
                    pr.out.push_str(pred);
                    pr.out.push_str("; ");
                    match guard {
                        LockGuard::Term(n) => pr.obj(n, Prec::Top),
                        LockGuard::Binder(hint) => {
                            let h = hint.as_str();
                            pr.out.push_str(if h.is_empty() { "_" } else { h });
                        }
                    }
                    pr.out.push_str(" : ");
                    pr.family(guard_ty, Prec::Top);
                    pr.out.push_str("] ");
                    pr.stype(body, Prec::Top);
                })
            }
        }
    }
}

fn render<F: FnOnce(&mut Pr)>(f: F) -> String {
    let mut pr = Pr::new();
    f(&mut pr);
    pr.out
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render(|pr| pr.kind(self, Prec::Top)))
    }
}

impl fmt::Display for AtomicFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render(|pr| pr.afam(self, Prec::Top)))
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render(|pr| pr.family(self, Prec::Top)))
    }
}

impl fmt::Display for AtomicObject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render(|pr| pr.aobj(self, Prec::Top)))
    }
}

impl fmt::Display for CanonicalObject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render(|pr| pr.obj(self, Prec::Top)))
    }
}

impl fmt::Display for SimpleType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render(|pr| pr.stype(self, Prec::Top)))
    }
}

impl fmt::Display for VarName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

impl fmt::Display for SigClassifier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SigClassifier::Fam(k) => write!(f, "{k}"),
            SigClassifier::Obj(fam) => write!(f, "{fam}"),
        }
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for d in &self.decls {
            match &d.classifier {
                SigClassifier::Fam(k) => writeln!(f, "{} : {}.", d.name, k)?,
                SigClassifier::Obj(fam) => writeln!(f, "{} : {}.", d.name, fam)?,
            }
        }
        Ok(())
    }
}

impl fmt::Display for Context {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (x, fam) in &self.entries {
            if !first {
                f.write_str(", ")?;
            }
            first = false;
            write!(f, "{} : {}", x, fam)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::super::build::*;
    use super::*;

    #[test]
    fn identity_abstraction() {
        let t = abs("x", fconst("a"), |x| x);
        assert_eq!(t.to_string(), "\\x : a . x");
    }

    #[test]
    fn unused_pi_prints_as_arrow() {
        let f = arrow(fconst("a"), fconst("b"));
        assert_eq!(f.to_string(), "a -> b");
    }

    #[test]
    fn used_pi_keeps_its_binder() {
        let f = pi("x", fconst("a"), |x| fatom("b", [x]));
        assert_eq!(f.to_string(), "Pi x : a . b x");
    }

    #[test]
    fn arrow_associates_right() {
        let f = arrow(arrow(fconst("a"), fconst("b")), arrow(fconst("a"), fconst("b")));
        assert_eq!(f.to_string(), "(a -> b) -> a -> b");
    }

    #[test]
    fn binder_renames_away_from_free_variable() {
        let free_x = VarName::source("x");
        let t = abs("x", fconst("a"), |bx| {
            atom(apps(oconst("c"), [bx, CanonicalObject::var(free_x.clone())]))
        });
        assert_eq!(t.to_string(), "\\x' : a . c x' x");
    }

    #[test]
    fn binder_renames_away_from_constant() {
        let t = abs("c", fconst("a"), |bx| atom(app(oconst("c"), bx)));
        assert_eq!(t.to_string(), "\\c' : a . c c'");
    }

    #[test]
    fn unused_abs_binder_prints_as_underscore() {
        let t = abs("x", fconst("a"), |_| atom(oconst("c")));
        assert_eq!(t.to_string(), "\\_ : a . c");
    }

    #[test]
    fn nested_argument_takes_parens() {
        let t = atom(app(oconst("c"), atom(app(oconst("d"), atom(oconst("e"))))));
        assert_eq!(t.to_string(), "c (d e)");
    }

    #[test]
    fn application_chain_is_left_assoc_bare() {
        let t = atom(apps(oconst("c"), [atom(oconst("d")), atom(oconst("e"))]));
        assert_eq!(t.to_string(), "c d e");
    }

    #[test]
    fn lock_and_unlock_bodies_are_maximal() {
        let l = olock("P", atom(oconst("c")), fconst("a"), atom(app(oconst("c"), atom(oconst("c")))));
        assert_eq!(l.to_string(), "lock[P; c : a] c c");
        let u = unlock("P", atom(oconst("c")), fconst("a"), oconst("d"));
        assert_eq!(atom(u).to_string(), "unlock[P; c : a] d");
    }

    #[test]
    fn unlock_in_head_position_takes_parens() {
        let u = unlock("P", atom(oconst("c")), fconst("a"), oconst("d"));
        let t = atom(app(u, atom(oconst("e"))));
        assert_eq!(t.to_string(), "(unlock[P; c : a] d) e");
    }

    #[test]
    fn pq_lock_prints_its_binder() {
        let t = olock_pq("Q", "w", fconst("a"), |w| w);
        assert_eq!(t.to_string(), "lock[Q; w : a] w");
        let unused = olock_pq("Q", "w", fconst("a"), |_| atom(oconst("c")));
        assert_eq!(unused.to_string(), "lock[Q; _ : a] c");
    }

    #[test]
    fn composite_pi_domain_takes_parens() {
        let f = arrow(pi("y", fconst("a"), |y| fatom("b", [y])), fconst("a"));
        assert_eq!(f.to_string(), "(Pi y : a . b y) -> a");
    }

    #[test]
    fn kind_arrow_sugar() {
        let k = karrow(fconst("a"), Kind::Type);
        assert_eq!(k.to_string(), "a -> Type");
        let k2 = kpi("x", fconst("a"), |x| {
            Kind::Pi(
                Box::new(fatom("b", [x])),
                NameHint::anon(),
                Box::new(Kind::Type),
            )
        });
        assert_eq!(k2.to_string(), "Pi x : a . b x -> Type");
    }

    #[test]
    fn reserved_hint_gets_primed() {
        let t = abs("lock", fconst("a"), |x| x);
        assert_eq!(t.to_string(), "\\lock' : a . lock'");
    }

    #[test]
    fn shadowing_binder_renames() {
        // \x : a . \x : a . c x x  where the inner binder must not capture
        // references to the outer one.
        let t = abs("x", fconst("a"), |outer| {
            let o = outer.clone();
            abs("x", fconst("a"), move |inner| {
                atom(apps(oconst("c"), [inner, o.clone()]))
            })
        });
        assert_eq!(t.to_string(), "\\x : a . \\x' : a . c x' x");
    }

    #[test]
    fn simple_type_display() {
        let s = SimpleType::Arrow(
            Box::new(SimpleType::Arrow(
                Box::new(SimpleType::Base("a".into())),
                Box::new(SimpleType::Base("b".into())),
            )),
            Box::new(SimpleType::Base("c".into())),
        );
        assert_eq!(s.to_string(), "(a -> b) -> c");
    }

    #[test]
    fn signature_and_context_display() {
        let mut sig = Signature::new();
        sig.push_fam("a", Kind::Type);
        sig.push_obj("c", fconst("a"));
        assert_eq!(sig.to_string(), "a : Type.\nc : a.\n");
        let ctx = Context::new()
            .extended(VarName::source("x"), fconst("a"))
            .extended(VarName::source("y"), fconst("a"));
        assert_eq!(ctx.to_string(), "x : a, y : a");
    }
}
