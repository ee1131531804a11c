//! Script execution.
//!
//! A parsed script is a sequence of signature blocks, context blocks and
//! goals. The driver resolves the blocks into named environments, runs the
//! goals in order against the checker, and compares each verdict with the
//! goal's `expect` clause. The outcome is a [`RunReport`] that renders
//! either as human-readable text or as one structured record per goal in
//! the same newline-delimited encoding the oracle protocol uses. Records
//! carry no wall-clock data, so repeated runs over the same input are
//! byte-identical.
//!
//! Malformed goals (unknown block names, unresolvable expressions) abort the
//! run with a [`DriverError`]; they are authoring mistakes, not verdicts.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::time::{Duration, Instant};

use serde::Serialize;

use crate::checker::{Checker, Derivation, QueryRecord, TypeError};
use crate::predicates::{deduction_uses, PredicateEvaluator};
use crate::surface::{
    context_var_names, resolve_atomic_object, resolve_context, resolve_family, resolve_kind,
    resolve_object, resolve_signature, Expectation, Goal, GoalKind, Script, ScriptItem, Span,
    SurfaceError,
};
use crate::syntax::{
    AtomicFamily, AtomicObject, CanonicalObject, Context, Family, Signature, SystemMode,
};

#[derive(Debug, thiserror::Error)]
pub enum DriverError {
    #[error(transparent)]
    Surface(#[from] SurfaceError),
    #[error("{span}: duplicate {what} block `{name}`")]
    DuplicateBlock { span: Span, what: &'static str, name: String },
    #[error("{span}: unknown signature `{name}`")]
    UnknownSignature { span: Span, name: String },
    #[error("{span}: unknown context `{name}`")]
    UnknownContext { span: Span, name: String },
    #[error("{span}: context `{ctx}` is over signature `{declared}`, not `{requested}`")]
    WrongSignature { span: Span, ctx: String, declared: String, requested: String },
}

/// The result of one goal: what the checker said, whether that is what the
/// script expected, and enough detail to reproduce the answer.
#[derive(Clone, Debug)]
pub struct GoalReport {
    /// 1-based position among the script's goals.
    pub index: usize,
    /// Goal kind, as a stable label (`check-object`, `synth`, ...).
    pub kind: &'static str,
    /// The goal's source text, including its `expect` clause.
    pub text: String,
    /// The expectation, with its terms resolved and printed back.
    pub expected: String,
    /// What actually happened.
    pub verdict: String,
    pub matched: bool,
    /// Machine name of the type error, when the verdict is one.
    pub code: Option<&'static str>,
    /// Root rule of the derivation, when one was produced.
    pub rule: Option<&'static str>,
    /// Synthesized family (`synth` goals).
    pub family: Option<String>,
    /// Synthesized witness and unlocked family (`solve` goals).
    pub witness: Option<String>,
    pub unlocked: Option<String>,
    /// Context variables flagged by `lint eal`.
    pub flagged: Vec<String>,
    /// Every predicate query the derivation made, in order.
    pub queries: Vec<QueryRecord>,
    /// Rendered derivation, when tracing was requested.
    pub trace: Option<String>,
    pub elapsed: Duration,
}

/// All goal reports of one script, in script order.
#[derive(Clone, Debug)]
pub struct RunReport {
    pub file: String,
    pub mode: SystemMode,
    pub goals: Vec<GoalReport>,
}

impl RunReport {
    pub fn all_matched(&self) -> bool {
        self.goals.iter().all(|g| g.matched)
    }

    pub fn mismatches(&self) -> usize {
        self.goals.iter().filter(|g| !g.matched).count()
    }

    /// Human-readable rendering, one block per goal, timings included.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{} (system {})", self.file, self.mode);
        for g in &self.goals {
            let flag = if g.matched { "ok  " } else { "FAIL" };
            let _ = writeln!(out, "{flag} [{}] {}", g.index, g.text);
            let _ = writeln!(out, "       verdict: {}  [{}]", g.verdict, format_ms(g.elapsed));
            if !g.matched {
                let _ = writeln!(out, "       expected: {}", g.expected);
            }
            for q in &g.queries {
                let _ = writeln!(
                    out,
                    "       query {}: {} <= {} -- {}",
                    q.pred, q.subject, q.classifier, q.verdict
                );
            }
            if let Some(t) = &g.trace {
                for line in t.lines() {
                    let _ = writeln!(out, "       | {line}");
                }
            }
        }
        let summary = match self.mismatches() {
            0 => "all matched".to_string(),
            n => format!("{n} mismatched"),
        };
        let _ = writeln!(out, "{}: {} goals, {}", self.file, self.goals.len(), summary);
        out
    }

    /// Machine-readable rendering: one record per goal, one line per record,
    /// no timings.
    pub fn render_records(&self) -> String {
        let mut out = String::new();
        for g in &self.goals {
            let record = Record {
                file: &self.file,
                goal: g.index,
                kind: g.kind,
                text: &g.text,
                expected: &g.expected,
                verdict: &g.verdict,
                matched: g.matched,
                code: g.code,
                rule: g.rule,
                family: g.family.as_deref(),
                witness: g.witness.as_deref(),
                unlocked: g.unlocked.as_deref(),
                flagged: &g.flagged,
                queries: g
                    .queries
                    .iter()
                    .map(|q| QueryLine {
                        pred: &q.pred,
                        subject: &q.subject,
                        classifier: &q.classifier,
                        verdict: &q.verdict,
                    })
                    .collect(),
                trace: g.trace.as_deref(),
            };
            let line = serde_json::to_string(&record)
                .expect("goal records contain only strings and booleans");
            out.push_str(&line);
            out.push('\n');
        }
        out
    }
}

#[derive(Serialize)]
struct Record<'a> {
    file: &'a str,
    goal: usize,
    kind: &'a str,
    text: &'a str,
    expected: &'a str,
    verdict: &'a str,
    matched: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    code: Option<&'a str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    rule: Option<&'a str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    family: Option<&'a str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    witness: Option<&'a str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    unlocked: Option<&'a str>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    flagged: &'a Vec<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    queries: Vec<QueryLine<'a>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    trace: Option<&'a str>,
}

#[derive(Serialize)]
struct QueryLine<'a> {
    pred: &'a str,
    subject: &'a str,
    classifier: &'a str,
    verdict: &'a str,
}

fn format_ms(d: Duration) -> String {
    format!("{:.1} ms", d.as_secs_f64() * 1e3)
}

/// The named signatures and contexts a script declares. Contexts remember
/// which signature they were declared over.
#[derive(Default)]
pub struct ScriptEnv {
    pub sigs: BTreeMap<String, Signature>,
    pub ctxs: BTreeMap<String, (String, Context)>,
}

impl ScriptEnv {
    fn add_signature(&mut self, block: &crate::surface::SigBlock) -> Result<(), DriverError> {
        if self.sigs.contains_key(&block.name) {
            return Err(DriverError::DuplicateBlock {
                span: block.span.clone(),
                what: "signature",
                name: block.name.clone(),
            });
        }
        self.sigs.insert(block.name.clone(), resolve_signature(block)?);
        Ok(())
    }

    fn add_context(&mut self, block: &crate::surface::CtxBlock) -> Result<(), DriverError> {
        if self.ctxs.contains_key(&block.name) {
            return Err(DriverError::DuplicateBlock {
                span: block.span.clone(),
                what: "context",
                name: block.name.clone(),
            });
        }
        self.ctxs.insert(block.name.clone(), (block.sig.clone(), resolve_context(block)?));
        Ok(())
    }
}

/// Resolves all blocks of a script, ignoring its goals.
pub fn script_env(script: &Script) -> Result<ScriptEnv, DriverError> {
    let mut env = ScriptEnv::default();
    for item in &script.items {
        match item {
            ScriptItem::Signature(block) => env.add_signature(block)?,
            ScriptItem::Context(block) => env.add_context(block)?,
            ScriptItem::Goal(_) => {}
        }
    }
    Ok(env)
}

/// Runs every goal of `script` in order and reports the outcomes. Blocks
/// scope sequentially: a goal sees only blocks declared above it.
pub fn run_script(
    script: &Script,
    mode: SystemMode,
    file: &str,
    oracle: &dyn PredicateEvaluator,
    trace: bool,
) -> Result<RunReport, DriverError> {
    let mut env = ScriptEnv::default();
    let mut goals = Vec::new();
    for item in &script.items {
        match item {
            ScriptItem::Signature(block) => env.add_signature(block)?,
            ScriptItem::Context(block) => env.add_context(block)?,
            ScriptItem::Goal(goal) => {
                let index = goals.len() + 1;
                goals.push(run_goal(index, goal, mode, &env.sigs, &env.ctxs, oracle, trace)?);
            }
        }
    }
    Ok(RunReport { file: file.to_string(), mode, goals })
}

struct Env<'e> {
    sigs: &'e BTreeMap<String, Signature>,
    ctxs: &'e BTreeMap<String, (String, Context)>,
}

impl<'e> Env<'e> {
    fn signature(&self, span: &Span, name: &str) -> Result<&'e Signature, DriverError> {
        self.sigs.get(name).ok_or_else(|| DriverError::UnknownSignature {
            span: span.clone(),
            name: name.to_string(),
        })
    }

    fn context(&self, span: &Span, name: &str) -> Result<&'e (String, Context), DriverError> {
        self.ctxs.get(name).ok_or_else(|| DriverError::UnknownContext {
            span: span.clone(),
            name: name.to_string(),
        })
    }

    /// The signature named by a goal, plus its context reference (empty when
    /// absent). The context must have been declared over that signature.
    fn judgement_env(
        &self,
        span: &Span,
        sig: &str,
        ctx: Option<&str>,
    ) -> Result<(&'e Signature, Context), DriverError> {
        let s = self.signature(span, sig)?;
        let c = match ctx {
            None => Context::new(),
            Some(name) => {
                let (owner, c) = self.context(span, name)?;
                if owner != sig {
                    return Err(DriverError::WrongSignature {
                        span: span.clone(),
                        ctx: name.to_string(),
                        declared: owner.clone(),
                        requested: sig.to_string(),
                    });
                }
                c.clone()
            }
        };
        Ok((s, c))
    }
}

fn kind_label(k: &GoalKind) -> &'static str {
    match k {
        GoalKind::CheckSignature { .. } => "check-signature",
        GoalKind::CheckContext { .. } => "check-context",
        GoalKind::CheckKind { .. } => "check-kind",
        GoalKind::CheckFamily { .. } => "check-family",
        GoalKind::CheckObject { .. } => "check-object",
        GoalKind::Synth { .. } => "synth",
        GoalKind::Solve { .. } => "solve",
        GoalKind::LintEal { .. } => "lint-eal",
    }
}

/// Renders the expectation with its terms resolved, for mismatch messages
/// and records.
fn expected_label(e: &Expectation, vars: &BTreeSet<String>) -> Result<String, SurfaceError> {
    Ok(match e {
        Expectation::Valid => "valid".to_string(),
        Expectation::Invalid => "invalid".to_string(),
        Expectation::ErrorCode(c) => format!("error {c}"),
        Expectation::Family(f) => format!("family {}", resolve_family(f, vars)?),
        Expectation::Witness { witness, unlocked } => {
            let w = resolve_object(witness, vars)?;
            match unlocked {
                Some(u) => format!("witness {} unlocks {}", w, resolve_family(u, vars)?),
                None => format!("witness {w}"),
            }
        }
        Expectation::NoWitness => "no witness".to_string(),
        Expectation::Flagged => "flagged".to_string(),
        Expectation::Clean => "clean".to_string(),
    })
}

/// Does a check-style outcome match the stated expectation?
fn check_matches(expect: &Expectation, result: &Result<Derivation, TypeError>) -> bool {
    match (expect, result) {
        (Expectation::Valid, Ok(_)) => true,
        (Expectation::Invalid, Err(_)) => true,
        (Expectation::ErrorCode(c), Err(e)) => e.code() == c,
        _ => false,
    }
}

fn run_goal(
    index: usize,
    goal: &Goal,
    mode: SystemMode,
    sigs: &BTreeMap<String, Signature>,
    ctxs: &BTreeMap<String, (String, Context)>,
    oracle: &dyn PredicateEvaluator,
    trace: bool,
) -> Result<GoalReport, DriverError> {
    let env = Env { sigs, ctxs };
    let mut report = GoalReport {
        index,
        kind: kind_label(&goal.kind),
        text: goal.text.clone(),
        expected: String::new(),
        verdict: String::new(),
        matched: false,
        code: None,
        rule: None,
        family: None,
        witness: None,
        unlocked: None,
        flagged: Vec::new(),
        queries: Vec::new(),
        trace: None,
        elapsed: Duration::ZERO,
    };
    let started = Instant::now();

    let absorb = |report: &mut GoalReport, d: &Derivation| {
        report.rule = Some(d.rule);
        report.queries = d.all_queries().into_iter().cloned().collect();
        if trace {
            report.trace = Some(d.render());
        }
    };
    let absorb_err = |report: &mut GoalReport, e: &TypeError| {
        report.code = Some(e.code());
        report.verdict = format!("invalid: {e}");
    };

    match &goal.kind {
        GoalKind::CheckSignature { sig } => {
            let s = env.signature(&goal.span, sig)?;
            report.expected = expected_label(&goal.expect, &BTreeSet::new())?;
            let result = Checker::new(s, mode, oracle).check_signature();
            report.matched = check_matches(&goal.expect, &result);
            match result {
                Ok(d) => {
                    report.verdict = "valid".to_string();
                    absorb(&mut report, &d);
                }
                Err(e) => absorb_err(&mut report, &e),
            }
        }
        GoalKind::CheckContext { ctx } => {
            let (owner, c) = env.context(&goal.span, ctx)?;
            let s = env.signature(&goal.span, owner)?;
            report.expected = expected_label(&goal.expect, &BTreeSet::new())?;
            let result = Checker::new(s, mode, oracle).check_context(c);
            report.matched = check_matches(&goal.expect, &result);
            match result {
                Ok(d) => {
                    report.verdict = "valid".to_string();
                    absorb(&mut report, &d);
                }
                Err(e) => absorb_err(&mut report, &e),
            }
        }
        GoalKind::CheckKind { sig, ctx, subject } => {
            let (s, c) = env.judgement_env(&goal.span, sig, ctx.as_deref())?;
            let vars = context_var_names(&c);
            report.expected = expected_label(&goal.expect, &vars)?;
            let k = resolve_kind(subject, &vars)?;
            let result = Checker::new(s, mode, oracle).check_kind(&c, &k);
            report.matched = check_matches(&goal.expect, &result);
            match result {
                Ok(d) => {
                    report.verdict = "valid".to_string();
                    absorb(&mut report, &d);
                }
                Err(e) => absorb_err(&mut report, &e),
            }
        }
        GoalKind::CheckFamily { sig, ctx, subject } => {
            let (s, c) = env.judgement_env(&goal.span, sig, ctx.as_deref())?;
            let vars = context_var_names(&c);
            report.expected = expected_label(&goal.expect, &vars)?;
            let f = resolve_family(subject, &vars)?;
            let result = Checker::new(s, mode, oracle).check_family(&c, &f);
            report.matched = check_matches(&goal.expect, &result);
            match result {
                Ok(d) => {
                    report.verdict = "valid".to_string();
                    absorb(&mut report, &d);
                }
                Err(e) => absorb_err(&mut report, &e),
            }
        }
        GoalKind::CheckObject { sig, ctx, subject, against } => {
            let (s, c) = env.judgement_env(&goal.span, sig, ctx.as_deref())?;
            let vars = context_var_names(&c);
            report.expected = expected_label(&goal.expect, &vars)?;
            let m = resolve_object(subject, &vars)?;
            let f = resolve_family(against, &vars)?;
            let result = Checker::new(s, mode, oracle).check_object(&c, &m, &f);
            report.matched = check_matches(&goal.expect, &result);
            match result {
                Ok(d) => {
                    report.verdict = "valid".to_string();
                    absorb(&mut report, &d);
                }
                Err(e) => absorb_err(&mut report, &e),
            }
        }
        GoalKind::Synth { sig, ctx, subject } => {
            let (s, c) = env.judgement_env(&goal.span, sig, ctx.as_deref())?;
            let vars = context_var_names(&c);
            report.expected = expected_label(&goal.expect, &vars)?;
            let want = match &goal.expect {
                Expectation::Family(f) => Some(resolve_family(f, &vars)?),
                _ => None,
            };
            let a = resolve_atomic_object(subject, &vars)?;
            match Checker::new(s, mode, oracle).synth_atomic_object(&c, &a) {
                Ok((f, d)) => {
                    report.matched = want.as_ref() == Some(&f);
                    report.verdict = format!("family {f}");
                    report.family = Some(f.to_string());
                    absorb(&mut report, &d);
                }
                Err(e) => {
                    report.matched =
                        matches!(&goal.expect, Expectation::ErrorCode(c) if e.code() == c);
                    absorb_err(&mut report, &e);
                }
            }
        }
        GoalKind::Solve { sig, ctx, family } => {
            let (s, c) = env.judgement_env(&goal.span, sig, ctx.as_deref())?;
            let vars = context_var_names(&c);
            report.expected = expected_label(&goal.expect, &vars)?;
            let want = match &goal.expect {
                Expectation::Witness { witness, unlocked } => Some((
                    resolve_object(witness, &vars)?,
                    unlocked.as_ref().map(|u| resolve_family(u, &vars)).transpose()?,
                )),
                _ => None,
            };
            let f = resolve_family(family, &vars)?;
            match Checker::new(s, mode, oracle).solve_lock(&c, &f) {
                Ok(Some(out)) => {
                    report.matched = match &want {
                        Some((w, u)) => {
                            *w == out.witness && u.as_ref().is_none_or(|u| *u == out.unlocked)
                        }
                        None => false,
                    };
                    report.verdict = format!("witness {} unlocks {}", out.witness, out.unlocked);
                    report.witness = Some(out.witness.to_string());
                    report.unlocked = Some(out.unlocked.to_string());
                    absorb(&mut report, &out.derivation);
                }
                Ok(None) => {
                    report.matched = matches!(&goal.expect, Expectation::NoWitness);
                    report.verdict = "no witness".to_string();
                }
                Err(e) => absorb_err(&mut report, &e),
            }
        }
        GoalKind::LintEal { sig, ctx, subject } => {
            let (_s, c) = env.judgement_env(&goal.span, sig, ctx.as_deref())?;
            let vars = context_var_names(&c);
            report.expected = expected_label(&goal.expect, &vars)?;
            let m = resolve_object(subject, &vars)?;
            for (x, f) in &c.entries {
                if !bang_typed(f) && deduction_uses(&m, x) >= 2 {
                    report.flagged.push(x.text.to_string());
                }
            }
            report.verdict = if report.flagged.is_empty() {
                "clean".to_string()
            } else {
                format!("flagged {}", report.flagged.join(", "))
            };
            report.matched = match &goal.expect {
                Expectation::Flagged => !report.flagged.is_empty(),
                Expectation::Clean => report.flagged.is_empty(),
                _ => false,
            };
        }
    }

    report.elapsed = started.elapsed();
    Ok(report)
}

/// Is this hypothesis reusable: an atomic family with a `bang`-headed
/// argument, like `T (bang a)`?
fn bang_typed(f: &Family) -> bool {
    let Family::Atom(af) = f else { return false };
    let mut cur = af;
    while let AtomicFamily::App(h, arg) = cur {
        if let CanonicalObject::Atom(a) = &**arg {
            let mut head = a;
            while let AtomicObject::App(inner, _) = head {
                head = inner;
            }
            if matches!(head, AtomicObject::Const(c) if &**c == "bang") {
                return true;
            }
        }
        cur = h;
    }
    false
}
