//! The built-in predicates.
//!
//! Each predicate interprets lock subjects over a fixed signature vocabulary,
//! named in its doc comment. The conventions shared by all of them:
//!
//! - Queries are trusted: the checker has already established
//!   `ctx |- subject <= classifier`, so shape violations mean the lock was
//!   attached to the wrong judgement and are reported as `Fails`.
//! - Analysis looks at deduction positions only. Family annotations, lock
//!   guards and unlock certificates are classifier data, so the normalizers
//!   never rewrite inside them and the occurrence counters never look inside
//!   them.
//! - Normalization is leftmost-outermost, one redex per step, with every
//!   step paid from the configured fuel. A term that still has a redex when
//!   the fuel runs out yields `Unknown(Fuel)`: more fuel might decide it, and
//!   by determinism of the strategy a verdict reached at some fuel is
//!   reached at every larger fuel.

use crate::hsubst::{instantiate_object, SubstError};
use crate::syntax::{
    build, erase, skeleton, AtomicFamily, AtomicObject, CanonicalObject, Context, Family,
    LockGuard, NameHint, Signature, VarName,
};

use super::{
    PredicateQuery, PredicateVerdict, SynthesisOutcome, SynthesisQuery, UnknownReason,
};

/// Every predicate name that [`builtin_check`] understands.
pub const BUILTIN_NAMES: &[&str] = &["True", "Fitch", "PN", "Light", "Closed", "SQRT"];

pub(crate) fn builtin_check(name: &str, q: &PredicateQuery<'_>, fuel: u64) -> PredicateVerdict {
    match name {
        "True" => PredicateVerdict::Holds,
        "Fitch" => fitch_check(q, fuel),
        "PN" => pn_check(q, fuel),
        "Light" => light_check(q, fuel),
        "Closed" => closed_check(q),
        "SQRT" => sqrt_check(q),
        other => PredicateVerdict::Unknown(UnknownReason::Unsupported(format!(
            "{other} is not a built-in predicate"
        ))),
    }
}

pub(crate) fn builtin_synthesize(
    name: &str,
    q: &SynthesisQuery<'_>,
    _fuel: u64,
) -> SynthesisOutcome {
    match name {
        "SQRT" => sqrt_synthesize(q),
        other => SynthesisOutcome::Unsupported(format!("{other} has no witness search")),
    }
}

fn fails(msg: String) -> PredicateVerdict {
    PredicateVerdict::Fails(msg)
}

// ---------------------------------------------------------------------------
// Term shape helpers
// ---------------------------------------------------------------------------

/// Splits an atomic application spine into its head and arguments.
fn obj_head_args(a: &AtomicObject) -> (&AtomicObject, Vec<&CanonicalObject>) {
    let mut args = Vec::new();
    let mut cur = a;
    while let AtomicObject::App(h, m) = cur {
        args.push(&**m);
        cur = h;
    }
    args.reverse();
    (cur, args)
}

/// The spine head as a constant name, if it is one.
fn const_head_args(a: &AtomicObject) -> Option<(&str, Vec<&CanonicalObject>)> {
    let (head, args) = obj_head_args(a);
    match head {
        AtomicObject::Const(c) => Some((c, args)),
        _ => None,
    }
}

/// [`const_head_args`] through the canonical wrapper.
fn atom_const_args(m: &CanonicalObject) -> Option<(&str, Vec<&CanonicalObject>)> {
    match m {
        CanonicalObject::Atom(a) => const_head_args(a),
        _ => None,
    }
}

/// Splits an atomic family into its head constant and arguments.
fn fam_head_args(f: &Family) -> Option<(&str, Vec<&CanonicalObject>)> {
    let Family::Atom(af) = f else { return None };
    let mut args = Vec::new();
    let mut cur = af;
    loop {
        match cur {
            AtomicFamily::Const(c) => {
                args.reverse();
                return Some((c, args));
            }
            AtomicFamily::App(h, m) => {
                args.push(&**m);
                cur = h;
            }
        }
    }
}

fn is_o(f: &Family) -> bool {
    matches!(f, Family::Atom(AtomicFamily::Const(c)) if &**c == "o")
}

fn is_v(f: &Family) -> bool {
    matches!(fam_head_args(f), Some(("V", args)) if args.len() == 1)
}

// ---------------------------------------------------------------------------
// One-step rewriting
// ---------------------------------------------------------------------------

/// `Some(Ok(t))` rewrites the node to `t`, `Some(Err(..))` aborts, `None`
/// leaves the node alone.
type Step<T> = Option<Result<T, SubstError>>;

type Rule = dyn Fn(&AtomicObject) -> Step<AtomicObject>;

/// Rewrites the leftmost-outermost redex in a deduction position, or reports
/// that there is none. Binders are opened with fresh variables before
/// descending, so rules only ever see locally closed redexes.
fn rewrite_object(m: &CanonicalObject, rule: &Rule) -> Step<CanonicalObject> {
    match m {
        CanonicalObject::Atom(a) => {
            rewrite_atomic(a, rule).map(|r| r.map(CanonicalObject::Atom))
        }
        CanonicalObject::Abs(ann, hint, body) => {
            let x = VarName::fresh(hint.as_str());
            rewrite_object(&body.open_var(&x), rule).map(|r| {
                r.map(|b| {
                    CanonicalObject::Abs(ann.clone(), hint.clone(), Box::new(b.close_var(&x)))
                })
            })
        }
        CanonicalObject::Lock { pred, guard, guard_ty, body } => {
            let rebuild = |b: CanonicalObject| CanonicalObject::Lock {
                pred: pred.clone(),
                guard: guard.clone(),
                guard_ty: guard_ty.clone(),
                body: Box::new(b),
            };
            match guard {
                LockGuard::Term(_) => {
                    rewrite_object(body, rule).map(|r| r.map(rebuild))
                }
                LockGuard::Binder(hint) => {
                    let x = VarName::fresh(hint.as_str());
                    rewrite_object(&body.open_var(&x), rule)
                        .map(|r| r.map(|b| rebuild(b.close_var(&x))))
                }
            }
        }
    }
}

fn rewrite_atomic(a: &AtomicObject, rule: &Rule) -> Step<AtomicObject> {
    if let Some(r) = rule(a) {
        return Some(r);
    }
    match a {
        AtomicObject::Const(_) | AtomicObject::FVar(_) | AtomicObject::BVar(_) => None,
        AtomicObject::App(h, m) => {
            if let Some(r) = rewrite_atomic(h, rule) {
                return Some(
                    r.map(|h2| AtomicObject::App(Box::new(h2), m.clone())),
                );
            }
            rewrite_object(m, rule)
                .map(|r| r.map(|m2| AtomicObject::App(h.clone(), Box::new(m2))))
        }
        AtomicObject::Unlock { pred, witness, witness_ty, body } => {
            rewrite_atomic(body, rule).map(|r| {
                r.map(|b| AtomicObject::Unlock {
                    pred: pred.clone(),
                    witness: witness.clone(),
                    witness_ty: witness_ty.clone(),
                    body: Box::new(b),
                })
            })
        }
    }
}

enum NormOutcome {
    Normal(CanonicalObject),
    FuelExhausted,
    Stuck(String),
}

fn normalize(start: &CanonicalObject, fuel: u64, rule: &Rule) -> NormOutcome {
    let mut cur = start.clone();
    let mut steps = 0u64;
    loop {
        match rewrite_object(&cur, rule) {
            None => return NormOutcome::Normal(cur),
            Some(Err(e)) => return NormOutcome::Stuck(e.to_string()),
            Some(Ok(next)) => {
                steps += 1;
                if steps > fuel {
                    return NormOutcome::FuelExhausted;
                }
                cur = next;
            }
        }
    }
}

fn verdict_of(outcome: NormOutcome) -> PredicateVerdict {
    match outcome {
        NormOutcome::Normal(_) => PredicateVerdict::Holds,
        NormOutcome::FuelExhausted => PredicateVerdict::Unknown(UnknownReason::Fuel),
        NormOutcome::Stuck(msg) => PredicateVerdict::Unknown(UnknownReason::Unsupported(msg)),
    }
}

/// Contracts `(\x . body) arg` to an atomic term via hereditary substitution.
fn contract(
    body: &CanonicalObject,
    hint: &NameHint,
    ann: &Family,
    arg: &CanonicalObject,
) -> Result<AtomicObject, SubstError> {
    match instantiate_object(body, hint.as_str(), arg, &erase(ann))? {
        CanonicalObject::Atom(a) => Ok(a),
        other => Err(SubstError::Undefined(format!("contractum {other} is not atomic"))),
    }
}

// ---------------------------------------------------------------------------
// Occurrence counting and hole conditions
// ---------------------------------------------------------------------------

/// Free uses of `x` in deduction positions: lock guards and unlock
/// certificates are skipped, so each use is counted once even when an
/// annotation repeats it.
pub(crate) fn deduction_uses(m: &CanonicalObject, x: &VarName) -> usize {
    occurrences(m, x, None)
}

/// Counts occurrences of `x` in deduction positions. With `guard` set, an
/// occurrence standing as the last argument of an application of that
/// constant is considered marked and is not counted.
fn occurrences(m: &CanonicalObject, x: &VarName, guard: Option<&str>) -> usize {
    match m {
        CanonicalObject::Atom(a) => occurrences_atomic(a, x, guard),
        CanonicalObject::Abs(_, _, body) => occurrences(body, x, guard),
        CanonicalObject::Lock { body, .. } => occurrences(body, x, guard),
    }
}

fn occurrences_atomic(a: &AtomicObject, x: &VarName, guard: Option<&str>) -> usize {
    let (head, args) = obj_head_args(a);
    let mut n = 0;
    match head {
        AtomicObject::FVar(y) if y == x => n += 1,
        AtomicObject::Unlock { body, .. } => n += occurrences_atomic(body, x, guard),
        _ => {}
    }
    let marked = match (guard, head) {
        (Some(g), AtomicObject::Const(c)) => &**c == g && !args.is_empty(),
        _ => false,
    };
    for (i, arg) in args.iter().enumerate() {
        if marked && i == args.len() - 1 {
            if let CanonicalObject::Atom(AtomicObject::FVar(y)) = arg {
                if *y == *x {
                    continue;
                }
            }
        }
        n += occurrences(arg, x, guard);
    }
    n
}

/// Decomposes the subject into its skeleton and demands that every hole is
/// either exempted by its classifier or, when `guard` is given, has all of
/// its deduction-position occurrences marked by that constant.
fn check_holes(
    subject: &CanonicalObject,
    sig: &Signature,
    ctx: &Context,
    exempt: impl Fn(&Family) -> bool,
    guard: Option<&str>,
    requirement: &str,
) -> Result<(), String> {
    let sk = skeleton(subject, sig, Some(ctx));
    for hole in &sk.holes {
        if let Some(cl) = &hole.classifier {
            if exempt(cl) {
                continue;
            }
        }
        if guard.is_some() && occurrences(&sk.term, &hole.var, guard) == 0 {
            continue;
        }
        let cls = match &hole.classifier {
            Some(c) => format!(" : {c}"),
            None => String::new(),
        };
        return Err(format!("hole {}{cls} is not {requirement}", hole.filler));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Fitch: deduction pairs normalize
// ---------------------------------------------------------------------------

/// Vocabulary: propositions `o`, individuals `iota`, deductions `T`, generic
/// hypotheses `V` with the coercion `dl` from `V a` to `T a`, implication
/// `imp`, set abstraction `lam` / membership `eps` with rules `lam_intro` and
/// `lam_elim`, implication rules `imp_intro` and `imp_elim`, and deduction
/// products `prod` / `pair`.
///
/// The subject is a pair of an antecedent deduction and an implication
/// deduction. Holds when every skeleton hole is a proposition or a generic
/// hypothesis, and the deduction obtained by feeding both components to one
/// `imp_elim` normalizes within fuel. Detours are implication eliminations
/// of introductions and set-membership eliminations of introductions; the
/// `dl` coercion dissolves when reduction reaches it.
fn fitch_check(q: &PredicateQuery<'_>, fuel: u64) -> PredicateVerdict {
    let (a, b, x, y) = match fitch_shape(q) {
        Ok(parts) => parts,
        Err(msg) => return fails(msg),
    };
    if let Err(msg) = check_holes(
        q.subject,
        q.sig,
        q.ctx,
        |f| is_o(f) || is_v(f),
        None,
        "a proposition or a generic hypothesis",
    ) {
        return fails(msg);
    }
    let elim = build::apps(
        build::oconst("imp_elim"),
        [a.clone(), b.clone(), x.clone(), y.clone()],
    );
    let combined = build::atom(build::unlock(
        q.pred,
        q.subject.clone(),
        q.classifier.clone(),
        elim,
    ));
    verdict_of(normalize(&combined, fuel, &fitch_rule))
}

type FitchParts<'a> =
    (&'a CanonicalObject, &'a CanonicalObject, &'a CanonicalObject, &'a CanonicalObject);

fn fitch_shape<'a>(q: &'a PredicateQuery<'_>) -> Result<FitchParts<'a>, String> {
    let parts = fam_head_args(q.classifier);
    let Some(("prod", cargs)) = parts else {
        return Err(format!("classifier {} is not a deduction product", q.classifier));
    };
    if cargs.len() != 2 {
        return Err(format!("classifier {} is not a binary deduction product", q.classifier));
    }
    let a = cargs[0];
    let Some(("imp", iargs)) = atom_const_args(cargs[1]) else {
        return Err(format!("second product component {} is not an implication", cargs[1]));
    };
    if iargs.len() != 2 {
        return Err(format!("second product component {} is not an implication", cargs[1]));
    }
    if iargs[0] != a {
        return Err(format!(
            "the implication antecedent {} differs from the first component {a}",
            iargs[0]
        ));
    }
    let Some(("pair", pargs)) = atom_const_args(q.subject) else {
        return Err(format!("subject {} is not a deduction pair", q.subject));
    };
    if pargs.len() != 4 {
        return Err(format!("subject {} is not a fully applied deduction pair", q.subject));
    }
    Ok((a, iargs[1], pargs[2], pargs[3]))
}

fn fitch_rule(a: &AtomicObject) -> Step<AtomicObject> {
    if let Some(("dl", args)) = const_head_args(a) {
        if args.len() == 2 {
            if let CanonicalObject::Atom(inner) = args[1] {
                return Some(Ok(inner.clone()));
            }
        }
    }
    if let AtomicObject::Unlock { body, .. } = a {
        if let Some(("imp_elim", eargs)) = const_head_args(body) {
            if eargs.len() == 4 {
                if let Some(("imp_intro", iargs)) = atom_const_args(eargs[3]) {
                    if iargs.len() == 3 {
                        if let CanonicalObject::Abs(ann, hint, fbody) = iargs[2] {
                            return Some(contract(fbody, hint, ann, eargs[2]));
                        }
                    }
                }
            }
        }
    }
    if let Some(("lam_elim", eargs)) = const_head_args(a) {
        if eargs.len() == 3 {
            if let Some(("lam_intro", iargs)) = atom_const_args(eargs[2]) {
                if iargs.len() == 3 {
                    if let CanonicalObject::Atom(d) = iargs[2] {
                        return Some(Ok(d.clone()));
                    }
                }
            }
        }
    }
    None
}

// ---------------------------------------------------------------------------
// PN: applied lambda terms normalize
// ---------------------------------------------------------------------------

/// Vocabulary: term representations `o`, object variables `v` injected by
/// `var`, application `app`, abstraction `lam`, and function-argument pairs
/// `fp`.
///
/// The subject pairs a framework function with an argument. Holds when every
/// skeleton hole is an object variable standing under `var` and the
/// object-level application of the function to the argument normalizes
/// within fuel. A beta step replaces the `var`-guarded occurrences of the
/// bound variable by the argument; `var` atoms over other variables are
/// inert.
fn pn_check(q: &PredicateQuery<'_>, fuel: u64) -> PredicateVerdict {
    let Some(("fp", pargs)) = atom_const_args(q.subject) else {
        return fails(format!("subject {} is not a function-argument pair", q.subject));
    };
    if pargs.len() != 2 {
        return fails(format!("subject {} is not a binary function-argument pair", q.subject));
    }
    let CanonicalObject::Abs(ann, hint, mbody) = pargs[0] else {
        return fails(format!("function component {} is not an abstraction", pargs[0]));
    };
    if let Err(msg) =
        check_holes(q.subject, q.sig, q.ctx, |_| false, Some("var"), "guarded by var")
    {
        return fails(msg);
    }
    let combined = match instantiate_object(mbody, hint.as_str(), pargs[1], &erase(ann)) {
        Ok(m) => m,
        Err(e) => return PredicateVerdict::Unknown(UnknownReason::Unsupported(e.to_string())),
    };
    verdict_of(normalize(&combined, fuel, &pn_rule))
}

fn pn_rule(a: &AtomicObject) -> Step<AtomicObject> {
    if let Some(("app", args)) = const_head_args(a) {
        if args.len() == 2 {
            if let Some(("lam", largs)) = atom_const_args(args[0]) {
                if largs.len() == 1 {
                    if let CanonicalObject::Abs(_, hint, fbody) = largs[0] {
                        return Some(pn_beta(fbody, hint, args[1]));
                    }
                }
            }
        }
    }
    None
}

/// Contracts the object-level redex `app (lam (\x . b)) n`. The bound
/// variable of an object-level abstraction stands under `var`, so the
/// contraction folds each `var x` atom to one fresh variable and substitutes
/// `n` for that. A residual bare occurrence of `x` has no object-level
/// reading and stops the normalizer.
fn pn_beta(
    body: &CanonicalObject,
    hint: &NameHint,
    arg: &CanonicalObject,
) -> Result<AtomicObject, SubstError> {
    let x = VarName::fresh(hint.as_str());
    let y = VarName::fresh("w");
    let folded = fold_var_atoms(&body.open_var(&x), &x, &y);
    if folded.free_vars().contains(&x) {
        return Err(SubstError::Undefined(format!(
            "abstracted term {folded} uses its variable outside var"
        )));
    }
    let contractum =
        instantiate_object(&folded.close_var(&y), "w", arg, &erase(&build::fconst("o")))?;
    match contractum {
        CanonicalObject::Atom(a) => Ok(a),
        other => Err(SubstError::Undefined(format!("contractum {other} is not atomic"))),
    }
}

fn fold_var_atoms(m: &CanonicalObject, x: &VarName, y: &VarName) -> CanonicalObject {
    match m {
        CanonicalObject::Atom(a) => CanonicalObject::Atom(fold_var_atoms_atomic(a, x, y)),
        CanonicalObject::Abs(ann, h, body) => CanonicalObject::Abs(
            Box::new(fold_var_atoms_family(ann, x, y)),
            h.clone(),
            Box::new(fold_var_atoms(body, x, y)),
        ),
        CanonicalObject::Lock { pred, guard, guard_ty, body } => {
            let guard = match guard {
                LockGuard::Term(n) => LockGuard::Term(Box::new(fold_var_atoms(n, x, y))),
                LockGuard::Binder(h) => LockGuard::Binder(h.clone()),
            };
            CanonicalObject::Lock {
                pred: pred.clone(),
                guard,
                guard_ty: Box::new(fold_var_atoms_family(guard_ty, x, y)),
                body: Box::new(fold_var_atoms(body, x, y)),
            }
        }
    }
}

fn fold_var_atoms_atomic(a: &AtomicObject, x: &VarName, y: &VarName) -> AtomicObject {
    if let AtomicObject::App(h, m) = a {
        if matches!(&**h, AtomicObject::Const(c) if &**c == "var")
            && matches!(&**m, CanonicalObject::Atom(AtomicObject::FVar(z)) if z == x)
        {
            return AtomicObject::FVar(y.clone());
        }
    }
    match a {
        AtomicObject::Const(_) | AtomicObject::FVar(_) | AtomicObject::BVar(_) => a.clone(),
        AtomicObject::App(h, m) => AtomicObject::App(
            Box::new(fold_var_atoms_atomic(h, x, y)),
            Box::new(fold_var_atoms(m, x, y)),
        ),
        AtomicObject::Unlock { pred, witness, witness_ty, body } => AtomicObject::Unlock {
            pred: pred.clone(),
            witness: Box::new(fold_var_atoms(witness, x, y)),
            witness_ty: Box::new(fold_var_atoms_family(witness_ty, x, y)),
            body: Box::new(fold_var_atoms_atomic(body, x, y)),
        },
    }
}

fn fold_var_atoms_family(f: &Family, x: &VarName, y: &VarName) -> Family {
    match f {
        Family::Atom(af) => Family::Atom(fold_var_atoms_atomic_family(af, x, y)),
        Family::Pi(dom, h, body) => Family::Pi(
            Box::new(fold_var_atoms_family(dom, x, y)),
            h.clone(),
            Box::new(fold_var_atoms_family(body, x, y)),
        ),
        Family::Lock { pred, guard, guard_ty, body } => {
            let guard = match guard {
                LockGuard::Term(n) => LockGuard::Term(Box::new(fold_var_atoms(n, x, y))),
                LockGuard::Binder(h) => LockGuard::Binder(h.clone()),
            };
            Family::Lock {
                pred: pred.clone(),
                guard,
                guard_ty: Box::new(fold_var_atoms_family(guard_ty, x, y)),
                body: Box::new(fold_var_atoms_family(body, x, y)),
            }
        }
    }
}

fn fold_var_atoms_atomic_family(af: &AtomicFamily, x: &VarName, y: &VarName) -> AtomicFamily {
    match af {
        AtomicFamily::Const(n) => AtomicFamily::Const(n.clone()),
        AtomicFamily::App(h, m) => AtomicFamily::App(
            Box::new(fold_var_atoms_atomic_family(h, x, y)),
            Box::new(fold_var_atoms(m, x, y)),
        ),
    }
}

// ---------------------------------------------------------------------------
// Light: abstractions are affine or banged
// ---------------------------------------------------------------------------

/// Vocabulary: propositions `o`, deductions `T`, validity `V`, linear
/// implication `lolli`, the modality `bang`, application `c_appl` and
/// abstraction `c_abstr`.
///
/// The classifier is a deduction arrow from `T A` to `T B`. Holds outright
/// when `A` is banged; otherwise the subject must be an abstraction whose
/// hypothesis occurs at most once in the normal form of its body, where
/// normalization contracts `c_appl` of an antecedent and an unlocked
/// `c_abstr`.
fn light_check(q: &PredicateQuery<'_>, fuel: u64) -> PredicateVerdict {
    let Family::Pi(dom, _, _) = q.classifier else {
        return fails(format!("classifier {} is not a deduction arrow", q.classifier));
    };
    let Some(("T", targs)) = fam_head_args(dom) else {
        return fails(format!("arrow domain {dom} is not a deduction type"));
    };
    if targs.len() != 1 {
        return fails(format!("arrow domain {dom} is not a deduction type"));
    }
    if let Some(("bang", bargs)) = atom_const_args(targs[0]) {
        if bargs.len() == 1 {
            return PredicateVerdict::Holds;
        }
    }
    let CanonicalObject::Abs(_, hint, body) = q.subject else {
        return fails(format!("subject {} is not an abstraction", q.subject));
    };
    let u = VarName::fresh(hint.as_str());
    match normalize(&body.open_var(&u), fuel, &light_rule) {
        NormOutcome::Normal(nf) => {
            let n = occurrences(&nf, &u, None);
            if n <= 1 {
                PredicateVerdict::Holds
            } else {
                fails(format!(
                    "the hypothesis is used {n} times and {} is not banged",
                    targs[0]
                ))
            }
        }
        NormOutcome::FuelExhausted => PredicateVerdict::Unknown(UnknownReason::Fuel),
        NormOutcome::Stuck(msg) => PredicateVerdict::Unknown(UnknownReason::Unsupported(msg)),
    }
}

fn light_rule(a: &AtomicObject) -> Step<AtomicObject> {
    if let Some(("c_appl", args)) = const_head_args(a) {
        if args.len() == 4 {
            if let CanonicalObject::Atom(AtomicObject::Unlock { body, .. }) = args[3] {
                if let Some(("c_abstr", cargs)) = const_head_args(body) {
                    if cargs.len() == 3 {
                        if let CanonicalObject::Abs(ann, hint, fbody) = cargs[2] {
                            return Some(contract(fbody, hint, ann, args[2]));
                        }
                    }
                }
            }
        }
    }
    None
}

// ---------------------------------------------------------------------------
// Closed: no proof-level holes
// ---------------------------------------------------------------------------

/// Holds when every skeleton hole of the subject has classifier `o`;
/// deduction- or validity-level holes, and holes whose classifier is not
/// recorded in the context, fail.
fn closed_check(q: &PredicateQuery<'_>) -> PredicateVerdict {
    match check_holes(q.subject, q.sig, q.ctx, is_o, None, "a proposition") {
        Ok(()) => PredicateVerdict::Holds,
        Err(msg) => fails(msg),
    }
}

// ---------------------------------------------------------------------------
// SQRT: certified integer square roots
// ---------------------------------------------------------------------------

/// Vocabulary: `nat` with numerals built from `O` and `S`, certificates
/// `rootp` / `mkroot`, and certificate pairs `rootpair` / `mkpair`.
///
/// The classifier is `rootpair x` for a closed numeral `x`; the subject is
/// `mkpair x n cert`. Holds when `n` is the minimal natural with
/// `(x - n*n) + (n*n - x) = 0` under truncated subtraction, which pins `n`
/// as the exact square root; the arithmetic runs on machine integers rather
/// than on the unary numerals. Squaring is strictly monotone, so at most one
/// `n` satisfies the equation and minimality needs no extra search.
fn sqrt_check(q: &PredicateQuery<'_>) -> PredicateVerdict {
    let x = match sqrt_radicand(q.classifier) {
        Ok(x) => x,
        Err(msg) => return fails(msg),
    };
    let Some(("mkpair", pargs)) = atom_const_args(q.subject) else {
        return fails(format!("subject {} is not a root certificate pair", q.subject));
    };
    if pargs.len() != 3 {
        return fails(format!("subject {} is not a fully applied certificate pair", q.subject));
    }
    let Some(n) = from_numeral(pargs[1]) else {
        return fails(format!("certified root {} is not a closed numeral", pargs[1]));
    };
    let Some(nn) = n.checked_mul(n) else {
        return fails(format!("certified root {n} is out of range"));
    };
    if x.saturating_sub(nn) + nn.saturating_sub(x) == 0 {
        PredicateVerdict::Holds
    } else {
        fails(format!("{n} squared is {nn}, not {x}"))
    }
}

/// Searches `0, 1, 2, ...` for the root, stopping at the first square that
/// reaches or passes the radicand. The witness re-states the radicand so the
/// certificate checks on its own.
fn sqrt_synthesize(q: &SynthesisQuery<'_>) -> SynthesisOutcome {
    let radicand = match sqrt_radicand(q.classifier) {
        Ok(x) => x,
        Err(msg) => return SynthesisOutcome::Unsupported(msg),
    };
    let Some(("rootpair", cargs)) = fam_head_args(q.classifier) else {
        unreachable!("sqrt_radicand accepted the classifier");
    };
    let x_term = cargs[0];
    let mut n = 0u64;
    loop {
        let Some(nn) = n.checked_mul(n) else {
            return SynthesisOutcome::NoWitness;
        };
        if nn == radicand {
            let root = numeral(n);
            let cert = build::atom(build::apps(
                build::oconst("mkroot"),
                [x_term.clone(), root.clone()],
            ));
            let witness = build::atom(build::apps(
                build::oconst("mkpair"),
                [x_term.clone(), root, cert],
            ));
            return SynthesisOutcome::Witness(witness);
        }
        if nn > radicand {
            return SynthesisOutcome::NoWitness;
        }
        n += 1;
    }
}

fn sqrt_radicand(classifier: &Family) -> Result<u64, String> {
    let Some(("rootpair", cargs)) = fam_head_args(classifier) else {
        return Err(format!("classifier {classifier} is not a root certificate type"));
    };
    if cargs.len() != 1 {
        return Err(format!("classifier {classifier} is not a unary root certificate type"));
    }
    from_numeral(cargs[0])
        .ok_or_else(|| format!("radicand {} is not a closed numeral", cargs[0]))
}

fn numeral(n: u64) -> CanonicalObject {
    let mut m = build::atom(build::oconst("O"));
    for _ in 0..n {
        m = build::atom(build::app(build::oconst("S"), m));
    }
    m
}

fn from_numeral(m: &CanonicalObject) -> Option<u64> {
    let mut n = 0u64;
    let mut cur = m;
    loop {
        let (c, args) = atom_const_args(cur)?;
        match (c, args.len()) {
            ("O", 0) => return Some(n),
            ("S", 1) => {
                n = n.checked_add(1)?;
                cur = args[0];
            }
            _ => return None,
        }
    }
}
