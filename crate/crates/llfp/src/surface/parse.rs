//! Parser from tokens to surface expressions and scripts.
//!
//! One expression grammar serves kinds, families and objects; the resolver
//! sorts them out. Binder, lock and unlock bodies extend maximally to the
//! right; `->` is right-associative; application is juxtaposition and binds
//! tightest. The guard slot of `lock[p; … : F]` is a term in mode `P` and a
//! single binder identifier in mode `PQ`, which is why parsing is
//! mode-directed.
//!
//! Inside declaration blocks a classifier expression also stops before an
//! identifier that begins a new line and is immediately followed by `:`, so
//! declarations may be separated by newlines as well as by `.`.

use super::lex::{Tok, TokKind};
use super::{Span, SurfaceError};
use crate::syntax::SystemMode;

#[derive(Clone, Debug)]
pub enum SurfGuard {
    Term(Box<SurfExpr>),
    Binder(String),
}

#[derive(Clone, Debug)]
pub enum SurfExpr {
    Ident(String, Span),
    TypeKw(Span),
    Pi { binder: String, dom: Box<SurfExpr>, body: Box<SurfExpr>, span: Span },
    Arrow { dom: Box<SurfExpr>, cod: Box<SurfExpr>, span: Span },
    Abs { binder: String, dom: Box<SurfExpr>, body: Box<SurfExpr>, span: Span },
    App { head: Box<SurfExpr>, arg: Box<SurfExpr>, span: Span },
    Lock { pred: String, guard: SurfGuard, guard_ty: Box<SurfExpr>, body: Box<SurfExpr>, span: Span },
    Unlock { pred: String, witness: Box<SurfExpr>, witness_ty: Box<SurfExpr>, body: Box<SurfExpr>, span: Span },
}

impl SurfExpr {
    pub fn span(&self) -> &Span {
        match self {
            SurfExpr::Ident(_, s)
            | SurfExpr::TypeKw(s)
            | SurfExpr::Pi { span: s, .. }
            | SurfExpr::Arrow { span: s, .. }
            | SurfExpr::Abs { span: s, .. }
            | SurfExpr::App { span: s, .. }
            | SurfExpr::Lock { span: s, .. }
            | SurfExpr::Unlock { span: s, .. } => s,
        }
    }
}

/// A named signature block, classifiers still unresolved.
#[derive(Clone, Debug)]
pub struct SigBlock {
    pub name: String,
    pub decls: Vec<(String, SurfExpr, Span)>,
    pub span: Span,
}

/// A named context block over a named signature.
#[derive(Clone, Debug)]
pub struct CtxBlock {
    pub name: String,
    pub sig: String,
    pub entries: Vec<(String, SurfExpr, Span)>,
    pub span: Span,
}

#[derive(Clone, Debug)]
pub enum GoalKind {
    CheckSignature { sig: String },
    CheckContext { ctx: String },
    CheckKind { sig: String, ctx: Option<String>, subject: SurfExpr },
    CheckFamily { sig: String, ctx: Option<String>, subject: SurfExpr },
    CheckObject { sig: String, ctx: Option<String>, subject: SurfExpr, against: SurfExpr },
    Synth { sig: String, ctx: Option<String>, subject: SurfExpr },
    Solve { sig: String, ctx: Option<String>, family: SurfExpr },
    LintEal { sig: String, ctx: Option<String>, subject: SurfExpr },
}

#[derive(Clone, Debug)]
pub enum Expectation {
    Valid,
    Invalid,
    ErrorCode(String),
    Family(SurfExpr),
    Witness { witness: SurfExpr, unlocked: Option<SurfExpr> },
    NoWitness,
    Flagged,
    Clean,
}

#[derive(Clone, Debug)]
pub struct Goal {
    pub kind: GoalKind,
    pub expect: Expectation,
    pub span: Span,
    /// The goal line as written, for reports.
    pub text: String,
}

#[derive(Clone, Debug)]
pub enum ScriptItem {
    Signature(SigBlock),
    Context(CtxBlock),
    Goal(Box<Goal>),
}

/// One parsed script file. `mode_decl` is the `%system` header if present.
#[derive(Clone, Debug)]
pub struct Script {
    pub mode_decl: Option<SystemMode>,
    pub items: Vec<ScriptItem>,
}

struct Parser<'s> {
    toks: Vec<Tok>,
    i: usize,
    mode: SystemMode,
    src: &'s str,
    /// Inside a declaration block: stop an application chain before an
    /// `ident :` that starts a new line.
    decl_stop: bool,
}

impl<'s> Parser<'s> {
    fn peek(&self) -> &Tok {
        &self.toks[self.i]
    }

    fn peek_kind(&self) -> &TokKind {
        &self.toks[self.i].kind
    }

    fn peek2_kind(&self) -> &TokKind {
        &self.toks[(self.i + 1).min(self.toks.len() - 1)].kind
    }

    fn prev_line(&self) -> u32 {
        if self.i == 0 {
            0
        } else {
            self.toks[self.i - 1].span.line
        }
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.i].clone();
        if self.i + 1 < self.toks.len() {
            self.i += 1;
        }
        t
    }

    fn err_here(&self, msg: impl Into<String>) -> SurfaceError {
        SurfaceError::syntax(self.peek().span.clone(), msg.into())
    }

    fn expect(&mut self, kind: TokKind) -> Result<Tok, SurfaceError> {
        if self.peek_kind() == &kind {
            Ok(self.bump())
        } else {
            Err(self.err_here(format!(
                "expected {}, found {}",
                kind.describe(),
                self.peek_kind().describe()
            )))
        }
    }

    fn expect_ident(&mut self, what: &str) -> Result<(String, Span), SurfaceError> {
        match self.peek_kind().clone() {
            TokKind::Ident(s) => {
                let t = self.bump();
                Ok((s, t.span))
            }
            other => Err(self.err_here(format!("expected {what}, found {}", other.describe()))),
        }
    }

    fn eat(&mut self, kind: TokKind) -> bool {
        if self.peek_kind() == &kind {
            self.bump();
            true
        } else {
            false
        }
    }

    // ----- expressions -----

    fn expr(&mut self) -> Result<SurfExpr, SurfaceError> {
        match self.peek_kind().clone() {
            TokKind::KwPi => {
                let start = self.bump().span;
                let (binder, _) = self.expect_ident("a binder name")?;
                self.expect(TokKind::Colon)?;
                let dom = self.expr()?;
                self.expect(TokKind::Dot)?;
                let body = self.expr()?;
                let span = start.to(body.span());
                Ok(SurfExpr::Pi { binder, dom: Box::new(dom), body: Box::new(body), span })
            }
            TokKind::Backslash => {
                let start = self.bump().span;
                let (binder, _) = self.expect_ident("a binder name")?;
                self.expect(TokKind::Colon)?;
                let dom = self.expr()?;
                self.expect(TokKind::Dot)?;
                let body = self.expr()?;
                let span = start.to(body.span());
                Ok(SurfExpr::Abs { binder, dom: Box::new(dom), body: Box::new(body), span })
            }
            TokKind::KwLock => {
                let start = self.bump().span;
                self.expect(TokKind::LBracket)?;
                let (pred, _) = self.expect_ident("a predicate name")?;
                self.expect(TokKind::Semi)?;
                let guard = match self.mode {
                    SystemMode::P => SurfGuard::Term(Box::new(self.expr()?)),
                    SystemMode::Pq => {
                        let (b, _) = self.expect_ident("a witness binder (mode pq)")?;
                        SurfGuard::Binder(b)
                    }
                };
                self.expect(TokKind::Colon)?;
                let guard_ty = self.expr()?;
                self.expect(TokKind::RBracket)?;
                let body = self.expr()?;
                let span = start.to(body.span());
                Ok(SurfExpr::Lock {
                    pred,
                    guard,
                    guard_ty: Box::new(guard_ty),
                    body: Box::new(body),
                    span,
                })
            }
            TokKind::KwUnlock => {
                let start = self.bump().span;
                self.expect(TokKind::LBracket)?;
                let (pred, _) = self.expect_ident("a predicate name")?;
                self.expect(TokKind::Semi)?;
                let witness = self.expr()?;
                self.expect(TokKind::Colon)?;
                let witness_ty = self.expr()?;
                self.expect(TokKind::RBracket)?;
                let body = self.expr()?;
                let span = start.to(body.span());
                Ok(SurfExpr::Unlock {
                    pred,
                    witness: Box::new(witness),
                    witness_ty: Box::new(witness_ty),
                    body: Box::new(body),
                    span,
                })
            }
            _ => {
                let chain = self.appchain()?;
                if self.eat(TokKind::Arrow) {
                    let cod = self.expr()?;
                    let span = chain.span().to(cod.span());
                    Ok(SurfExpr::Arrow { dom: Box::new(chain), cod: Box::new(cod), span })
                } else {
                    Ok(chain)
                }
            }
        }
    }

    fn appchain(&mut self) -> Result<SurfExpr, SurfaceError> {
        let mut head = match self.atom()? {
            Some(a) => a,
            None => {
                return Err(self.err_here(format!(
                    "expected a term, found {}",
                    self.peek_kind().describe()
                )))
            }
        };
        loop {
            if self.decl_stop {
                if let TokKind::Ident(_) = self.peek_kind() {
                    let starts_line = self.peek().span.line > self.prev_line();
                    if starts_line && self.peek2_kind() == &TokKind::Colon {
                        break;
                    }
                }
            }
            match self.atom()? {
                Some(arg) => {
                    let span = head.span().to(arg.span());
                    head = SurfExpr::App { head: Box::new(head), arg: Box::new(arg), span };
                }
                None => break,
            }
        }
        Ok(head)
    }

    fn atom(&mut self) -> Result<Option<SurfExpr>, SurfaceError> {
        match self.peek_kind().clone() {
            TokKind::Ident(s) => {
                let t = self.bump();
                Ok(Some(SurfExpr::Ident(s, t.span)))
            }
            TokKind::KwType => {
                let t = self.bump();
                Ok(Some(SurfExpr::TypeKw(t.span)))
            }
            TokKind::LParen => {
                self.bump();
                let save = self.decl_stop;
                self.decl_stop = false;
                let e = self.expr()?;
                self.decl_stop = save;
                self.expect(TokKind::RParen)?;
                Ok(Some(e))
            }
            _ => Ok(None),
        }
    }

    // ----- declaration blocks -----

    fn decls(&mut self) -> Result<Vec<(String, SurfExpr, Span)>, SurfaceError> {
        let mut out = Vec::new();
        while !matches!(self.peek_kind(), TokKind::KwEnd | TokKind::Eof) {
            let (name, nspan) = self.expect_ident("a declaration name")?;
            self.expect(TokKind::Colon)?;
            self.decl_stop = true;
            let classifier = self.expr();
            self.decl_stop = false;
            let classifier = classifier?;
            let span = nspan.to(classifier.span());
            self.eat(TokKind::Dot);
            out.push((name, classifier, span));
        }
        Ok(out)
    }

    fn signature_block(&mut self) -> Result<SigBlock, SurfaceError> {
        let start = self.expect(TokKind::KwSignature)?.span;
        let (name, _) = self.expect_ident("a signature name")?;
        self.eat(TokKind::Dot);
        let decls = self.decls()?;
        let end = self.expect(TokKind::KwEnd)?.span;
        self.eat(TokKind::Dot);
        Ok(SigBlock { name, decls, span: start.to(&end) })
    }

    fn context_block(&mut self) -> Result<CtxBlock, SurfaceError> {
        let start = self.expect(TokKind::KwContext)?.span;
        let (name, _) = self.expect_ident("a context name")?;
        self.expect(TokKind::Colon)?;
        let (sig, _) = self.expect_ident("a signature name")?;
        self.eat(TokKind::Dot);
        let entries = self.decls()?;
        let end = self.expect(TokKind::KwEnd)?.span;
        self.eat(TokKind::Dot);
        Ok(CtxBlock { name, sig, entries, span: start.to(&end) })
    }

    // ----- goals -----

    fn sig_ctx_refs(&mut self) -> Result<(String, Option<String>), SurfaceError> {
        let (sig, _) = self.expect_ident("a signature name")?;
        let ctx = if self.eat(TokKind::Semi) {
            Some(self.expect_ident("a context name")?.0)
        } else {
            None
        };
        Ok((sig, ctx))
    }

    fn check_expectation(&mut self) -> Result<Expectation, SurfaceError> {
        self.expect(TokKind::KwExpect)?;
        match self.peek_kind().clone() {
            TokKind::KwValid => {
                self.bump();
                Ok(Expectation::Valid)
            }
            TokKind::KwInvalid => {
                self.bump();
                Ok(Expectation::Invalid)
            }
            TokKind::KwError => {
                self.bump();
                let (code, _) = self.expect_ident("an error code")?;
                Ok(Expectation::ErrorCode(code))
            }
            other => Err(self.err_here(format!(
                "expected `valid`, `invalid` or `error <code>`, found {}",
                other.describe()
            ))),
        }
    }

    fn goal(&mut self) -> Result<Goal, SurfaceError> {
        let start = self.peek().span.clone();
        let kind_tok = self.bump();
        let (kind, expect) = match kind_tok.kind {
            TokKind::KwCheck => match self.peek_kind().clone() {
                TokKind::KwSignature => {
                    self.bump();
                    let (sig, _) = self.expect_ident("a signature name")?;
                    (GoalKind::CheckSignature { sig }, self.check_expectation()?)
                }
                TokKind::KwContext => {
                    self.bump();
                    let (ctx, _) = self.expect_ident("a context name")?;
                    (GoalKind::CheckContext { ctx }, self.check_expectation()?)
                }
                TokKind::KwKind => {
                    self.bump();
                    let (sig, ctx) = self.sig_ctx_refs()?;
                    self.expect(TokKind::Turnstile)?;
                    let subject = self.expr()?;
                    (GoalKind::CheckKind { sig, ctx, subject }, self.check_expectation()?)
                }
                TokKind::KwFamily => {
                    self.bump();
                    let (sig, ctx) = self.sig_ctx_refs()?;
                    self.expect(TokKind::Turnstile)?;
                    let subject = self.expr()?;
                    (GoalKind::CheckFamily { sig, ctx, subject }, self.check_expectation()?)
                }
                _ => {
                    let (sig, ctx) = self.sig_ctx_refs()?;
                    self.expect(TokKind::Turnstile)?;
                    let subject = self.expr()?;
                    self.expect(TokKind::CheckArrow)?;
                    let against = self.expr()?;
                    (
                        GoalKind::CheckObject { sig, ctx, subject, against },
                        self.check_expectation()?,
                    )
                }
            },
            TokKind::KwSynth => {
                let (sig, ctx) = self.sig_ctx_refs()?;
                self.expect(TokKind::Turnstile)?;
                let subject = self.expr()?;
                self.expect(TokKind::KwExpect)?;
                let expect = if self.eat(TokKind::KwError) {
                    let (code, _) = self.expect_ident("an error code")?;
                    Expectation::ErrorCode(code)
                } else {
                    Expectation::Family(self.expr()?)
                };
                (GoalKind::Synth { sig, ctx, subject }, expect)
            }
            TokKind::KwSolve => {
                let (sig, ctx) = self.sig_ctx_refs()?;
                self.expect(TokKind::Turnstile)?;
                let family = self.expr()?;
                self.expect(TokKind::KwExpect)?;
                let expect = if self.eat(TokKind::KwNowitness) {
                    Expectation::NoWitness
                } else {
                    self.expect(TokKind::KwWitness)?;
                    let witness = self.expr()?;
                    let unlocked =
                        if self.eat(TokKind::KwUnlocks) { Some(self.expr()?) } else { None };
                    Expectation::Witness { witness, unlocked }
                };
                (GoalKind::Solve { sig, ctx, family }, expect)
            }
            TokKind::KwLint => {
                let (which, wspan) = self.expect_ident("a lint name")?;
                if which != "eal" {
                    return Err(SurfaceError::syntax(
                        wspan,
                        format!("unknown lint `{which}` (only `eal` is available)"),
                    ));
                }
                let (sig, ctx) = self.sig_ctx_refs()?;
                self.expect(TokKind::Turnstile)?;
                let subject = self.expr()?;
                self.expect(TokKind::KwExpect)?;
                let expect = if self.eat(TokKind::KwFlagged) {
                    Expectation::Flagged
                } else if self.eat(TokKind::KwClean) {
                    Expectation::Clean
                } else {
                    return Err(self.err_here("expected `flagged` or `clean`"));
                };
                (GoalKind::LintEal { sig, ctx, subject }, expect)
            }
            other => {
                return Err(SurfaceError::syntax(
                    kind_tok.span,
                    format!(
                        "expected `signature`, `context`, `check`, `synth`, `solve` or `lint`, found {}",
                        other.describe()
                    ),
                ))
            }
        };
        let end = self.expect(TokKind::Dot)?.span;
        let span = start.to(&end);
        let text = self.src[span.start..end.start].trim().to_string();
        Ok(Goal { kind, expect, span, text })
    }

    fn script(&mut self) -> Result<Script, SurfaceError> {
        let mode_decl = if self.peek_kind() == &TokKind::PercentSystem {
            self.bump();
            let (m, mspan) = self.expect_ident("`p` or `pq`")?;
            let mode = match m.as_str() {
                "p" => SystemMode::P,
                "pq" => SystemMode::Pq,
                other => {
                    return Err(SurfaceError::syntax(
                        mspan,
                        format!("unknown system `{other}` (expected `p` or `pq`)"),
                    ))
                }
            };
            self.eat(TokKind::Dot);
            Some(mode)
        } else {
            None
        };
        let mut items = Vec::new();
        loop {
            match self.peek_kind() {
                TokKind::Eof => break,
                TokKind::KwSignature => items.push(ScriptItem::Signature(self.signature_block()?)),
                TokKind::KwContext => items.push(ScriptItem::Context(self.context_block()?)),
                _ => items.push(ScriptItem::Goal(Box::new(self.goal()?))),
            }
        }
        Ok(Script { mode_decl, items })
    }
}

fn mk_parser<'s>(src: &'s str, file: &str, mode: SystemMode) -> Result<Parser<'s>, SurfaceError> {
    let toks = super::lex::lex(src, file)?;
    Ok(Parser { toks, i: 0, mode, src, decl_stop: false })
}

/// Peeks at the `%system` header without parsing the body.
pub fn script_mode_decl(src: &str, file: &str) -> Result<Option<SystemMode>, SurfaceError> {
    let toks = super::lex::lex(src, file)?;
    if toks.first().map(|t| &t.kind) == Some(&TokKind::PercentSystem) {
        match toks.get(1).map(|t| &t.kind) {
            Some(TokKind::Ident(m)) if m == "p" => Ok(Some(SystemMode::P)),
            Some(TokKind::Ident(m)) if m == "pq" => Ok(Some(SystemMode::Pq)),
            _ => Err(SurfaceError::syntax(
                toks[1.min(toks.len() - 1)].span.clone(),
                "unknown system (expected `p` or `pq`)".to_string(),
            )),
        }
    } else {
        Ok(None)
    }
}

/// Parses a whole script file under the given mode (which must already agree
/// with any `%system` header; see [`script_mode_decl`]).
pub fn parse_script(src: &str, file: &str, mode: SystemMode) -> Result<Script, SurfaceError> {
    let mut p = mk_parser(src, file, mode)?;
    p.script()
}

/// Parses a single expression (a term of any sort, resolved later).
pub fn parse_expr(src: &str, file: &str, mode: SystemMode) -> Result<SurfExpr, SurfaceError> {
    let mut p = mk_parser(src, file, mode)?;
    let e = p.expr()?;
    p.eat(TokKind::Dot);
    if p.peek_kind() != &TokKind::Eof {
        return Err(p.err_here(format!(
            "unexpected {} after the expression",
            p.peek_kind().describe()
        )));
    }
    Ok(e)
}
