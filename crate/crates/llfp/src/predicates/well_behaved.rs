//! Checks that a predicate is a well-behaved oracle.
//!
//! A predicate that accepts a judgement must keep accepting it when the
//! world grows or specializes around it:
//!
//! 1. under signature weakening (an unused declaration is appended),
//! 2. under context weakening (an unused hypothesis is appended),
//! 3. under hereditary substitution (a context variable is replaced by a
//!    term of its type throughout the judgement).
//!
//! The suite takes sampled queries on which the predicate claims `Holds` and
//! replays each one through the three transformations, reporting every
//! verdict that changes. It is a falsifier, not a proof: a clean run means
//! no counterexample was sampled.

use crate::hsubst::{subst_canonical_object, subst_context, subst_family};
use crate::syntax::{
    erase, CanonicalObject, Context, Family, Signature, SystemMode, VarName,
};

use super::{PredicateEvaluator, PredicateQuery, PredicateVerdict, SynthesisOutcome, SynthesisQuery};

/// Replace `var` (a context variable) by `replacement`, which must check
/// against the variable's declared family under the preceding context.
#[derive(Clone, Debug)]
pub struct SubstScenario {
    pub var: VarName,
    pub replacement: CanonicalObject,
}

/// One sampled query on which the predicate is expected to hold.
///
/// `weaken_family` is the hypothesis type used for context weakening; it
/// must be well-formed in `sig` so the weakened judgement stays well-typed.
#[derive(Clone, Debug)]
pub struct Case {
    pub label: String,
    pub sig: Signature,
    pub ctx: Context,
    pub subject: CanonicalObject,
    pub classifier: Family,
    pub weaken_family: Family,
    pub subst: Option<SubstScenario>,
}

#[derive(Clone, Debug)]
pub struct Violation {
    pub case_label: String,
    pub law: &'static str,
    pub detail: String,
}

#[derive(Clone, Debug)]
pub struct SuiteReport {
    pub pred: String,
    pub cases_run: usize,
    pub checks_run: usize,
    pub violations: Vec<Violation>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

impl std::fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{}: {} cases, {} checks, {} violations",
            self.pred,
            self.cases_run,
            self.checks_run,
            self.violations.len()
        )?;
        for v in &self.violations {
            write!(f, "\n  [{}] {}: {}", v.law, v.case_label, v.detail)?;
        }
        Ok(())
    }
}

pub fn run_suite(
    pred: &str,
    oracle: &dyn PredicateEvaluator,
    mode: SystemMode,
    cases: &[Case],
) -> SuiteReport {
    let mut report = SuiteReport {
        pred: pred.to_string(),
        cases_run: 0,
        checks_run: 0,
        violations: Vec::new(),
    };
    for case in cases {
        report.cases_run += 1;
        run_case(pred, oracle, mode, case, &mut report);
    }
    report
}

fn run_case(
    pred: &str,
    oracle: &dyn PredicateEvaluator,
    mode: SystemMode,
    case: &Case,
    report: &mut SuiteReport,
) {
    let ask = |sig: &Signature, ctx: &Context, subject: &CanonicalObject, classifier: &Family| {
        oracle.check(&PredicateQuery { pred, sig, ctx, subject, classifier, mode })
    };

    report.checks_run += 1;
    let baseline = ask(&case.sig, &case.ctx, &case.subject, &case.classifier);
    if baseline != PredicateVerdict::Holds {
        report.violations.push(Violation {
            case_label: case.label.clone(),
            law: "baseline",
            detail: format!("the sampled query does not hold: {baseline}"),
        });
        return;
    }

    report.checks_run += 1;
    let mut weak_sig = case.sig.clone();
    weak_sig.push_obj(&fresh_const_name(case), case.weaken_family.clone());
    let verdict = ask(&weak_sig, &case.ctx, &case.subject, &case.classifier);
    if verdict != PredicateVerdict::Holds {
        report.violations.push(Violation {
            case_label: case.label.clone(),
            law: "signature-weakening",
            detail: format!("appending an unused declaration flipped the verdict to {verdict}"),
        });
    }

    report.checks_run += 1;
    let fresh = VarName::fresh("wk");
    let weak_ctx = case.ctx.extended(fresh, case.weaken_family.clone());
    let verdict = ask(&case.sig, &weak_ctx, &case.subject, &case.classifier);
    if verdict != PredicateVerdict::Holds {
        report.violations.push(Violation {
            case_label: case.label.clone(),
            law: "context-weakening",
            detail: format!("appending an unused hypothesis flipped the verdict to {verdict}"),
        });
    }

    if let Some(scenario) = &case.subst {
        report.checks_run += 1;
        match substituted_query(case, scenario, mode) {
            Ok((ctx, subject, classifier)) => {
                let verdict = ask(&case.sig, &ctx, &subject, &classifier);
                if verdict != PredicateVerdict::Holds {
                    report.violations.push(Violation {
                        case_label: case.label.clone(),
                        law: "substitution",
                        detail: format!(
                            "substituting {} for {} flipped the verdict to {verdict}",
                            scenario.replacement, scenario.var
                        ),
                    });
                }
            }
            Err(detail) => {
                report.violations.push(Violation {
                    case_label: case.label.clone(),
                    law: "substitution-setup",
                    detail,
                });
            }
        }
    }
}

/// Splits the context at the substituted variable, pushes the substitution
/// through the entries that follow it, and through the subject and
/// classifier.
fn substituted_query(
    case: &Case,
    scenario: &SubstScenario,
    mode: SystemMode,
) -> Result<(Context, CanonicalObject, Family), String> {
    let pos = case
        .ctx
        .entries
        .iter()
        .position(|(v, _)| *v == scenario.var)
        .ok_or_else(|| format!("{} is not bound by the case context", scenario.var))?;
    let rho = erase(&case.ctx.entries[pos].1);

    let mut ctx = Context { entries: case.ctx.entries[..pos].to_vec() };
    let suffix = Context { entries: case.ctx.entries[pos + 1..].to_vec() };
    let suffix = subst_context(&suffix, &scenario.replacement, &scenario.var, &rho)
        .map_err(|e| e.to_string())?;
    ctx.entries.extend(suffix.entries);

    let subject =
        subst_canonical_object(&case.subject, &scenario.replacement, &scenario.var, &rho, mode)
            .map_err(|e| e.to_string())?;
    let classifier =
        subst_family(&case.classifier, &scenario.replacement, &scenario.var, &rho, mode)
            .map_err(|e| e.to_string())?;
    Ok((ctx, subject, classifier))
}

/// A constant name present nowhere in the case, so appending it cannot
/// disturb the skeleton of any term already in the query.
fn fresh_const_name(case: &Case) -> String {
    let rendered = format!("{} {} {}", case.sig, case.subject, case.classifier);
    for i in 0.. {
        let name = format!("wkc{i}");
        if !case.sig.contains(&name) && !rendered.contains(&name) {
            return name;
        }
    }
    unreachable!("some index is always free")
}

/// A deliberately ill-behaved evaluator: it accepts exactly when the context
/// has an even number of hypotheses. Context weakening flips its verdict, so
/// the suite must flag it; it exists as a fixture for tests of the suite
/// itself.
pub struct ContextParity;

impl PredicateEvaluator for ContextParity {
    fn knows(&self, _pred: &str) -> bool {
        true
    }

    fn check(&self, query: &PredicateQuery<'_>) -> PredicateVerdict {
        if query.ctx.len().is_multiple_of(2) {
            PredicateVerdict::Holds
        } else {
            PredicateVerdict::Fails("the context has an odd number of hypotheses".to_string())
        }
    }

    fn synthesize(&self, _query: &SynthesisQuery<'_>) -> SynthesisOutcome {
        SynthesisOutcome::Unsupported("no witness search".to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::predicates::Registry;
    use crate::syntax::build::*;
    use crate::syntax::Kind;

    fn true_case(label: &str, subst: Option<SubstScenario>, ctx: Context) -> Case {
        let mut sig = Signature::new();
        sig.push_fam("a", Kind::Type);
        sig.push_obj("c", fconst("a"));
        Case {
            label: label.to_string(),
            sig,
            ctx,
            subject: atom(oconst("c")),
            classifier: fconst("a"),
            weaken_family: fconst("a"),
            subst,
        }
    }

    #[test]
    fn a_stable_predicate_passes() {
        let x = VarName::source("x");
        let ctx = Context::new().extended(x.clone(), fconst("a"));
        let scenario = SubstScenario { var: x, replacement: atom(oconst("c")) };
        let case = true_case("c against a", Some(scenario), ctx);
        let oracle = Registry::with_builtins();
        let report = run_suite("True", &oracle, SystemMode::P, &[case]);
        assert!(report.passed(), "{report}");
        assert_eq!(report.cases_run, 1);
        assert_eq!(report.checks_run, 4);
    }

    #[test]
    fn context_parity_is_caught_by_context_weakening() {
        let case = true_case("c against a", None, Context::new());
        let report = run_suite("CtxParity", &ContextParity, SystemMode::P, &[case]);
        assert!(!report.passed());
        assert_eq!(report.violations.len(), 1);
        assert_eq!(report.violations[0].law, "context-weakening");
    }

    #[test]
    fn failing_baselines_are_reported_and_stop_the_case() {
        let x = VarName::source("x");
        let ctx = Context::new().extended(x, fconst("a"));
        let case = true_case("odd context", None, ctx);
        let report = run_suite("CtxParity", &ContextParity, SystemMode::P, &[case]);
        assert_eq!(report.checks_run, 1);
        assert_eq!(report.violations.len(), 1);
        assert_eq!(report.violations[0].law, "baseline");
    }

    #[test]
    fn substitution_scenarios_must_name_a_context_variable() {
        let ghost = VarName::source("ghost");
        let scenario = SubstScenario { var: ghost, replacement: atom(oconst("c")) };
        let case = true_case("bad scenario", Some(scenario), Context::new());
        let report = run_suite("True", &Registry::with_builtins(), SystemMode::P, &[case]);
        assert!(!report.passed());
        assert_eq!(report.violations[0].law, "substitution-setup");
    }
}
