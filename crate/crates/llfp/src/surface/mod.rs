//! Surface syntax: lexer, parser and name resolution.
//!
//! Terms are written with `Pi x : A . B`, `\x : A . M`, juxtaposition for
//! application, `A -> B` for a product whose binder is unused,
//! `lock[P; N : F] B` and `unlock[P; N : F] M`. In mode `pq` the guard slot
//! of a lock is a single binder identifier instead of a term. Script files
//! carry signature and context blocks plus goals (`check`, `synth`, `solve`,
//! `lint`) with declared expectations; see the parser module for the item
//! grammar.
//!
//! Resolution turns parsed expressions into kernel terms. Identifiers bound
//! by an enclosing binder become indices, identifiers declared by the
//! ambient context become free variables, and all other identifiers become
//! constants, leaving existence checks to the type checker.

use std::fmt;
use std::rc::Rc;

use crate::syntax::{AtomicObject, CanonicalObject, Context, Family, SystemMode};

mod lex;
mod parse;
mod resolve;

pub use parse::{
    parse_expr, CtxBlock, Expectation, Goal, GoalKind, Script, ScriptItem, SigBlock, SurfExpr,
    SurfGuard,
};
pub use resolve::{
    context_var_names, resolve_atomic_object, resolve_classifier, resolve_context, resolve_family,
    resolve_kind, resolve_object, resolve_signature,
};

/// A source location, with byte offsets for slicing and line/column for
/// display.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Span {
    pub file: Rc<str>,
    pub start: usize,
    pub end: usize,
    pub line: u32,
    pub col: u32,
}

impl Span {
    /// The span from the start of `self` to the end of `other`.
    pub(crate) fn to(&self, other: &Span) -> Span {
        Span {
            file: self.file.clone(),
            start: self.start,
            end: other.end,
            line: self.line,
            col: self.col,
        }
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.file, self.line, self.col)
    }
}

#[derive(Clone, Debug, thiserror::Error)]
pub enum SurfaceError {
    #[error("{span}: {msg}")]
    Syntax { span: Span, msg: String },
    #[error("{file}: script declares `%system {declared}` but `--system={requested}` was given")]
    ModeConflict { file: Rc<str>, declared: SystemMode, requested: SystemMode },
}

impl SurfaceError {
    pub(crate) fn syntax(span: Span, msg: impl Into<String>) -> Self {
        SurfaceError::Syntax { span, msg: msg.into() }
    }
}

/// Parses a script file and settles its mode.
///
/// A `%system` header wins when it is the only claim; if the caller also
/// requests a mode (from `--system`) the two must agree, and disagreement is
/// a [`SurfaceError::ModeConflict`]. With neither, the default is mode `p`.
pub fn parse_script(
    src: &str,
    file: &str,
    cli_mode: Option<SystemMode>,
) -> Result<(Script, SystemMode), SurfaceError> {
    let declared = parse::script_mode_decl(src, file)?;
    let mode = match (declared, cli_mode) {
        (Some(d), Some(c)) if d != c => {
            return Err(SurfaceError::ModeConflict { file: file.into(), declared: d, requested: c })
        }
        (Some(d), _) => d,
        (None, Some(c)) => c,
        (None, None) => SystemMode::P,
    };
    let script = parse::parse_script(src, file, mode)?;
    Ok((script, mode))
}

/// Parses and resolves one expression as a canonical object. Free mentions
/// of `ctx` variables resolve to free variables, everything else unbound to
/// constants.
pub fn parse_object(
    src: &str,
    file: &str,
    mode: SystemMode,
    ctx: &Context,
) -> Result<CanonicalObject, SurfaceError> {
    let e = parse::parse_expr(src, file, mode)?;
    resolve_object(&e, &context_var_names(ctx))
}

/// Parses and resolves one expression as an atomic object.
pub fn parse_atomic_object(
    src: &str,
    file: &str,
    mode: SystemMode,
    ctx: &Context,
) -> Result<AtomicObject, SurfaceError> {
    let e = parse::parse_expr(src, file, mode)?;
    resolve_atomic_object(&e, &context_var_names(ctx))
}

/// Parses and resolves one expression as a family.
pub fn parse_family(
    src: &str,
    file: &str,
    mode: SystemMode,
    ctx: &Context,
) -> Result<Family, SurfaceError> {
    let e = parse::parse_expr(src, file, mode)?;
    resolve_family(&e, &context_var_names(ctx))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{build, Kind, SigClassifier, VarName};

    fn obj_p(src: &str) -> CanonicalObject {
        parse_object(src, "<test>", SystemMode::P, &Context::new()).unwrap()
    }

    fn fam_p(src: &str) -> Family {
        parse_family(src, "<test>", SystemMode::P, &Context::new()).unwrap()
    }

    fn fam_pq(src: &str) -> Family {
        parse_family(src, "<test>", SystemMode::Pq, &Context::new()).unwrap()
    }

    #[test]
    fn application_is_left_associative() {
        let m = obj_p("f c d");
        let expect = build::atom(build::apps(build::oconst("f"), [
            build::atom(build::oconst("c")),
            build::atom(build::oconst("d")),
        ]));
        assert_eq!(m, expect);
    }

    #[test]
    fn abstraction_binds_and_shadowing_picks_innermost() {
        let m = obj_p("\\x : a . \\x : a . c x");
        let expect = build::abs("x", build::fconst("a"), |_outer| {
            build::abs("x", build::fconst("a"), |inner| {
                build::atom(build::app(build::oconst("c"), inner))
            })
        });
        assert_eq!(m, expect);
    }

    #[test]
    fn arrow_is_a_product_with_unused_binder() {
        let f = fam_p("a -> b c");
        let expect = build::arrow(
            build::fconst("a"),
            build::fatom("b", [build::atom(build::oconst("c"))]),
        );
        assert_eq!(f, expect);
    }

    #[test]
    fn arrow_codomain_indices_skip_the_anonymous_binder() {
        let f = fam_p("Pi x : a . b -> c x");
        let expect = build::pi("x", build::fconst("a"), |x| {
            build::arrow(build::fconst("b"), build::fatom("c", [x]))
        });
        assert_eq!(f, expect);
    }

    #[test]
    fn context_variables_resolve_free_and_unknowns_resolve_const() {
        let mut ctx = Context::new();
        ctx.entries.push((VarName::source("x"), build::fconst("a")));
        let m = parse_object("c x q", "<test>", SystemMode::P, &ctx).unwrap();
        let expect = build::atom(build::apps(build::oconst("c"), [
            build::atom(build::ovar(&VarName::source("x"))),
            build::atom(build::oconst("q")),
        ]));
        assert_eq!(m, expect);
    }

    #[test]
    fn bound_variable_cannot_head_a_family() {
        let e = parse_family("Pi x : a . x", "<test>", SystemMode::P, &Context::new()).unwrap_err();
        assert!(e.to_string().contains("cannot head a family"), "{e}");
    }

    #[test]
    fn term_guard_lock_parses_in_mode_p() {
        let f = fam_p("lock[True; f c : b] d e");
        let expect = build::flock(
            "True",
            build::atom(build::app(build::oconst("f"), build::atom(build::oconst("c")))),
            build::fconst("b"),
            build::fatom("d", [build::atom(build::oconst("e"))]),
        );
        assert_eq!(f, expect);
    }

    #[test]
    fn binder_guard_lock_parses_in_mode_pq_and_binds_the_body() {
        let f = fam_pq("lock[SQRT; w : nat] rootp w");
        let expect =
            build::flock_pq("SQRT", "w", build::fconst("nat"), |w| build::fatom("rootp", [w]));
        assert_eq!(f, expect);
    }

    #[test]
    fn guard_term_in_mode_pq_is_rejected() {
        let e = parse_family("lock[SQRT; f c : nat] rootp", "<test>", SystemMode::Pq, &Context::new())
            .unwrap_err();
        assert!(e.to_string().contains("expected `:`"), "{e}");
    }

    #[test]
    fn unlock_body_extends_right_unless_parenthesized() {
        let wide = obj_p("unlock[True; c : a] d e");
        let expect_wide = build::atom(build::unlock(
            "True",
            build::atom(build::oconst("c")),
            build::fconst("a"),
            build::app(build::oconst("d"), build::atom(build::oconst("e"))),
        ));
        assert_eq!(wide, expect_wide);

        let applied = obj_p("(unlock[True; c : a] d) e");
        let expect_applied = build::atom(build::app(
            build::unlock("True", build::atom(build::oconst("c")), build::fconst("a"), build::oconst("d")),
            build::atom(build::oconst("e")),
        ));
        assert_eq!(applied, expect_applied);
    }

    #[test]
    fn print_then_reparse_is_identity_on_parsed_terms() {
        for src in [
            "\\x : a . c x",
            "\\x : Pi z : a . a . \\y : a . x y",
            "lock[True; c : a] d",
            "(unlock[P; c : a] d) e",
            "\\x : a . \\x : a . c x",
        ] {
            let m = obj_p(src);
            let printed = m.to_string();
            let back = obj_p(&printed);
            assert_eq!(m, back, "printed form `{printed}` of `{src}` did not reparse equal");
        }
        for src in [
            "(Pi y : a . b y) -> a",
            "Pi x : a . b x -> b x",
            "lock[Q; c : a] b",
            "Pi f : a -> a . b (f c)",
        ] {
            let f = fam_p(src);
            let printed = f.to_string();
            let back = fam_p(&printed);
            assert_eq!(f, back, "printed form `{printed}` of `{src}` did not reparse equal");
        }
    }

    #[test]
    fn classifier_sorting_by_trailing_type() {
        let no_vars = std::collections::BTreeSet::new();
        let k = parse::parse_expr("Pi x : a . Type", "<test>", SystemMode::P).unwrap();
        match resolve_classifier(&k, &no_vars).unwrap() {
            SigClassifier::Fam(Kind::Pi(..)) => {}
            other => panic!("expected a kind classifier, got {other:?}"),
        }
        let f = parse::parse_expr("a -> b", "<test>", SystemMode::P).unwrap();
        match resolve_classifier(&f, &no_vars).unwrap() {
            SigClassifier::Obj(Family::Pi(..)) => {}
            other => panic!("expected a family classifier, got {other:?}"),
        }
    }

    #[test]
    fn script_blocks_goals_and_expectations_parse() {
        let src = "\
-- a tiny script
signature S.
  a : Type.
  c : a.
end.
context G : S.
  x : a.
end.
check signature S expect valid.
check context G expect valid.
check kind S |- Type expect valid.
check family S |- a -> a expect valid.
check S ; G |- c <= a expect valid.
check S |- c <= a -> a expect error TypeMismatch.
synth S ; G |- x expect a.
synth S |- q expect error UnknownConst.
lint eal S |- \\x : a . c expect clean.
";
        let (script, mode) = parse_script(src, "<test>", None).unwrap();
        assert_eq!(mode, SystemMode::P);
        assert!(script.mode_decl.is_none());
        assert_eq!(script.items.len(), 11);
        match &script.items[0] {
            ScriptItem::Signature(sig) => {
                assert_eq!(sig.name, "S");
                assert_eq!(sig.decls.len(), 2);
            }
            other => panic!("expected signature block, got {other:?}"),
        }
        match &script.items[1] {
            ScriptItem::Context(ctx) => {
                assert_eq!(ctx.name, "G");
                assert_eq!(ctx.sig, "S");
                assert_eq!(ctx.entries.len(), 1);
            }
            other => panic!("expected context block, got {other:?}"),
        }
        let ScriptItem::Goal(g) = &script.items[6] else { panic!("expected a goal") };
        match (&g.kind, &g.expect) {
            (GoalKind::CheckObject { sig, ctx, .. }, Expectation::Valid) => {
                assert_eq!(sig, "S");
                assert_eq!(ctx.as_deref(), Some("G"));
                assert_eq!(g.text, "check S ; G |- c <= a expect valid");
            }
            other => panic!("expected object goal, got {other:?}"),
        }
        let ScriptItem::Goal(g) = &script.items[7] else { panic!("expected a goal") };
        match &g.expect {
            Expectation::ErrorCode(code) => assert_eq!(code, "TypeMismatch"),
            other => panic!("expected error expectation, got {other:?}"),
        }
        let ScriptItem::Goal(g) = &script.items[8] else { panic!("expected a goal") };
        match (&g.kind, &g.expect) {
            (GoalKind::Synth { ctx, .. }, Expectation::Family(_)) => {
                assert_eq!(ctx.as_deref(), Some("G"));
            }
            other => panic!("expected synth goal, got {other:?}"),
        }
        let ScriptItem::Goal(g) = &script.items[10] else { panic!("expected a goal") };
        assert!(matches!(&g.kind, GoalKind::LintEal { .. }));
        assert!(matches!(&g.expect, Expectation::Clean));
    }

    #[test]
    fn newline_separated_declarations_need_no_dots() {
        let src = "\
signature S
  a : Type
  f : a -> a ->
      a
  c : a
end
check signature S expect valid.
";
        let (script, _) = parse_script(src, "<test>", None).unwrap();
        match &script.items[0] {
            ScriptItem::Signature(sig) => {
                assert_eq!(sig.decls.len(), 3);
                let no_vars = std::collections::BTreeSet::new();
                let f = resolve_classifier(&sig.decls[1].1, &no_vars).unwrap();
                match f {
                    SigClassifier::Obj(fam) => {
                        assert_eq!(fam.to_string(), "a -> a -> a");
                    }
                    other => panic!("expected family classifier, got {other:?}"),
                }
            }
            other => panic!("expected signature block, got {other:?}"),
        }
    }

    #[test]
    fn solve_goals_parse_with_and_without_witness() {
        let src = "\
%system pq
solve S |- sqrt (eval nine) expect witness three unlocks rootp nine.
solve S |- sqrt (eval two) expect nowitness.
";
        let (script, mode) = parse_script(src, "<test>", None).unwrap();
        assert_eq!(mode, SystemMode::Pq);
        assert_eq!(script.mode_decl, Some(SystemMode::Pq));
        let ScriptItem::Goal(g) = &script.items[0] else { panic!("expected a goal") };
        assert!(matches!(&g.kind, GoalKind::Solve { .. }));
        assert!(matches!(&g.expect, Expectation::Witness { unlocked: Some(_), .. }));
        let ScriptItem::Goal(g) = &script.items[1] else { panic!("expected a goal") };
        assert!(matches!(&g.expect, Expectation::NoWitness));
    }

    #[test]
    fn header_and_flag_disagreement_is_a_mode_conflict() {
        let src = "%system pq\ncheck signature S expect valid.\n";
        let e = parse_script(src, "<test>", Some(SystemMode::P)).unwrap_err();
        match e {
            SurfaceError::ModeConflict { declared, requested, .. } => {
                assert_eq!(declared, SystemMode::Pq);
                assert_eq!(requested, SystemMode::P);
            }
            other => panic!("expected mode conflict, got {other:?}"),
        }
        let (_, mode) = parse_script(src, "<test>", Some(SystemMode::Pq)).unwrap();
        assert_eq!(mode, SystemMode::Pq);
    }

    #[test]
    fn parse_errors_carry_positions() {
        let e = parse_object("\\x a . x", "<test>", SystemMode::P, &Context::new()).unwrap_err();
        let msg = e.to_string();
        assert!(msg.contains("<test>:1:4"), "{msg}");
        assert!(msg.contains("expected `:`"), "{msg}");
    }
}
