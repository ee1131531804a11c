//! The oracle registry: which predicate is answered how.

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::rc::Rc;

use super::builtins::{builtin_check, builtin_synthesize, BUILTIN_NAMES};
use super::external::ExternalOracle;
use super::{
    OracleConfig, OracleImpl, PredicateEvaluator, PredicateQuery, PredicateVerdict,
    SynthesisOutcome, SynthesisQuery, UnknownReason,
};

/// Maps predicate names to oracle configurations and evaluates queries by
/// dispatching to a built-in or to a spawned external process.
///
/// External processes are spawned on first use and kept alive for the
/// lifetime of the registry, one per predicate. A process that fails to
/// spawn is remembered as broken so every later query gets the same answer
/// instead of a respawn storm.
pub struct Registry {
    entries: BTreeMap<String, OracleConfig>,
    externals: RefCell<BTreeMap<String, ExternalSlot>>,
}

#[derive(Clone)]
enum ExternalSlot {
    Ready(Rc<ExternalOracle>),
    Broken(String),
}

impl Registry {
    pub fn new() -> Self {
        Registry { entries: BTreeMap::new(), externals: RefCell::new(BTreeMap::new()) }
    }

    /// A registry with every built-in predicate registered under its own
    /// name at default budgets.
    pub fn with_builtins() -> Self {
        let mut r = Registry::new();
        for name in BUILTIN_NAMES {
            r.entries.insert((*name).to_string(), OracleConfig::builtin(name));
        }
        r
    }

    /// Registers or replaces the oracle for `pred`. Replacing drops any
    /// process already spawned under the old configuration.
    pub fn register(&mut self, pred: &str, config: OracleConfig) -> Result<(), String> {
        config.validate()?;
        self.entries.insert(pred.to_string(), config);
        self.externals.borrow_mut().remove(pred);
        Ok(())
    }

    pub fn config(&self, pred: &str) -> Option<&OracleConfig> {
        self.entries.get(pred)
    }

    pub fn preds(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    fn external(&self, pred: &str, argv: &[String]) -> ExternalSlot {
        let mut cache = self.externals.borrow_mut();
        if let Some(slot) = cache.get(pred) {
            return slot.clone();
        }
        let slot = match ExternalOracle::spawn(argv) {
            Ok(oracle) => ExternalSlot::Ready(Rc::new(oracle)),
            Err(e) => ExternalSlot::Broken(format!("cannot spawn oracle {argv:?}: {e}")),
        };
        cache.insert(pred.to_string(), slot.clone());
        slot
    }
}

impl Default for Registry {
    fn default() -> Self {
        Registry::new()
    }
}

impl PredicateEvaluator for Registry {
    fn knows(&self, pred: &str) -> bool {
        self.entries.contains_key(pred)
    }

    fn check(&self, query: &PredicateQuery<'_>) -> PredicateVerdict {
        let Some(config) = self.entries.get(query.pred) else {
            return PredicateVerdict::Unknown(UnknownReason::Unsupported(format!(
                "no oracle is registered for {}",
                query.pred
            )));
        };
        match &config.implementation {
            OracleImpl::Builtin(name) => builtin_check(name, query, config.fuel),
            OracleImpl::Command(argv) => match self.external(query.pred, argv) {
                ExternalSlot::Ready(oracle) => oracle.check(query, config),
                ExternalSlot::Broken(msg) => {
                    PredicateVerdict::Unknown(UnknownReason::Unsupported(msg))
                }
            },
        }
    }

    fn synthesize(&self, query: &SynthesisQuery<'_>) -> SynthesisOutcome {
        let Some(config) = self.entries.get(query.pred) else {
            return SynthesisOutcome::Unsupported(format!(
                "no oracle is registered for {}",
                query.pred
            ));
        };
        match &config.implementation {
            OracleImpl::Builtin(name) => builtin_synthesize(name, query, config.fuel),
            OracleImpl::Command(argv) => match self.external(query.pred, argv) {
                ExternalSlot::Ready(oracle) => oracle.synthesize(query, config),
                ExternalSlot::Broken(msg) => SynthesisOutcome::Unsupported(msg),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::build::*;
    use crate::syntax::{Context, Signature, SystemMode};

    #[test]
    fn with_builtins_knows_every_builtin() {
        let r = Registry::with_builtins();
        for name in BUILTIN_NAMES {
            assert!(r.knows(name), "{name}");
        }
        assert!(!r.knows("NoSuch"));
        assert_eq!(r.preds().count(), BUILTIN_NAMES.len());
    }

    #[test]
    fn registering_a_bad_config_is_rejected() {
        let mut r = Registry::new();
        let err = r.register("P", OracleConfig::builtin("True").with_fuel(0));
        assert!(err.is_err());
        let err = r.register("P", OracleConfig::builtin("NoSuchBuiltin"));
        assert!(err.is_err());
        assert!(!r.knows("P"));
    }

    #[test]
    fn builtin_dispatch_answers_under_any_registered_name() {
        let mut r = Registry::new();
        r.register("P", OracleConfig::builtin("True")).unwrap();
        let sig = Signature::new();
        let ctx = Context::new();
        let subject = atom(oconst("c"));
        let classifier = fconst("a");
        let query = PredicateQuery {
            pred: "P",
            sig: &sig,
            ctx: &ctx,
            subject: &subject,
            classifier: &classifier,
            mode: SystemMode::P,
        };
        assert_eq!(r.check(&query), PredicateVerdict::Holds);
    }

    #[test]
    fn unregistered_predicates_are_unsupported() {
        let r = Registry::new();
        let sig = Signature::new();
        let ctx = Context::new();
        let subject = atom(oconst("c"));
        let classifier = fconst("a");
        let query = PredicateQuery {
            pred: "P",
            sig: &sig,
            ctx: &ctx,
            subject: &subject,
            classifier: &classifier,
            mode: SystemMode::P,
        };
        assert!(matches!(
            r.check(&query),
            PredicateVerdict::Unknown(UnknownReason::Unsupported(_))
        ));
        let query = SynthesisQuery {
            pred: "P",
            sig: &sig,
            ctx: &ctx,
            classifier: &classifier,
            mode: SystemMode::Pq,
        };
        assert!(matches!(r.synthesize(&query), SynthesisOutcome::Unsupported(_)));
    }

    #[test]
    fn broken_commands_answer_unsupported_without_respawning() {
        let mut r = Registry::new();
        r.register(
            "P",
            OracleConfig::command(vec!["/nonexistent/oracle-binary".to_string()]),
        )
        .unwrap();
        let sig = Signature::new();
        let ctx = Context::new();
        let subject = atom(oconst("c"));
        let classifier = fconst("a");
        let query = PredicateQuery {
            pred: "P",
            sig: &sig,
            ctx: &ctx,
            subject: &subject,
            classifier: &classifier,
            mode: SystemMode::P,
        };
        for _ in 0..2 {
            assert!(matches!(
                r.check(&query),
                PredicateVerdict::Unknown(UnknownReason::Unsupported(_))
            ));
        }
    }
}
