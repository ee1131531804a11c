//! Predicates and oracles.
//!
//! A lock type names a predicate; discharging the lock (outside the scope of
//! a matching enclosing lock) asks an oracle whether the predicate accepts
//! the guard judgement `ctx |- subject <= classifier`. Oracles are either
//! built-in or external subprocesses speaking a line-delimited JSON
//! protocol.
//!
//! Verdicts are three-valued. Some predicates are only semi-decidable, so a
//! bounded search that comes back empty-handed is reported as `Unknown`
//! rather than `Fails`: the judgement is still rejected, but the diagnostic
//! tells the caller that more fuel or time might change the answer.

use std::fmt;
use std::time::Duration;

use crate::syntax::{CanonicalObject, Context, Family, Signature, SystemMode};

mod builtins;
mod external;
mod registry;
pub mod well_behaved;

pub use builtins::BUILTIN_NAMES;
pub(crate) use builtins::deduction_uses;
pub use registry::Registry;

/// Default normalization step budget for built-in predicates.
pub const DEFAULT_FUEL: u64 = 10_000;

/// Default wall-clock budget for one external oracle request.
pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(5);

/// One predicate question: does `pred` accept `ctx |- subject <= classifier`?
///
/// The caller has already checked that judgement; oracles may rely on it and
/// never re-typecheck.
#[derive(Clone, Copy, Debug)]
pub struct PredicateQuery<'a> {
    pub pred: &'a str,
    pub sig: &'a Signature,
    pub ctx: &'a Context,
    pub subject: &'a CanonicalObject,
    pub classifier: &'a Family,
    pub mode: SystemMode,
}

/// A witness request for a binder lock: find `N` with
/// `ctx |- N <= classifier` such that the predicate holds.
#[derive(Clone, Copy, Debug)]
pub struct SynthesisQuery<'a> {
    pub pred: &'a str,
    pub sig: &'a Signature,
    pub ctx: &'a Context,
    pub classifier: &'a Family,
    pub mode: SystemMode,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum PredicateVerdict {
    Holds,
    /// The predicate decided the judgement is not acceptable.
    Fails(String),
    /// The oracle could not decide within its budgets.
    Unknown(UnknownReason),
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum UnknownReason {
    Fuel,
    Timeout,
    Unsupported(String),
}

impl fmt::Display for UnknownReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            UnknownReason::Fuel => write!(f, "fuel budget exhausted"),
            UnknownReason::Timeout => write!(f, "oracle timed out"),
            UnknownReason::Unsupported(msg) => write!(f, "unsupported: {msg}"),
        }
    }
}

impl fmt::Display for PredicateVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PredicateVerdict::Holds => write!(f, "holds"),
            PredicateVerdict::Fails(reason) => write!(f, "fails ({reason})"),
            PredicateVerdict::Unknown(reason) => write!(f, "unknown ({reason})"),
        }
    }
}

#[derive(Clone, PartialEq, Debug)]
pub enum SynthesisOutcome {
    Witness(CanonicalObject),
    /// The search space was covered and holds no witness.
    NoWitness,
    /// The predicate has no synthesis procedure.
    Unsupported(String),
}

/// How one predicate is answered.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum OracleImpl {
    /// The name of a built-in predicate.
    Builtin(String),
    /// An external command (argv) spawned once and queried over stdio.
    Command(Vec<String>),
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct OracleConfig {
    pub implementation: OracleImpl,
    pub fuel: u64,
    pub timeout: Duration,
}

impl OracleConfig {
    pub fn builtin(name: &str) -> Self {
        OracleConfig {
            implementation: OracleImpl::Builtin(name.to_string()),
            fuel: DEFAULT_FUEL,
            timeout: DEFAULT_TIMEOUT,
        }
    }

    pub fn command(argv: Vec<String>) -> Self {
        OracleConfig {
            implementation: OracleImpl::Command(argv),
            fuel: DEFAULT_FUEL,
            timeout: DEFAULT_TIMEOUT,
        }
    }

    pub fn with_fuel(mut self, fuel: u64) -> Self {
        self.fuel = fuel;
        self
    }

    pub fn with_timeout(mut self, timeout: Duration) -> Self {
        self.timeout = timeout;
        self
    }

    /// Fuel and timeout must be positive for the budgets to mean anything,
    /// and builtin implementations must name a predicate that exists.
    pub fn validate(&self) -> Result<(), String> {
        if self.fuel == 0 {
            return Err("oracle fuel must be positive".to_string());
        }
        if self.timeout.is_zero() {
            return Err("oracle timeout must be positive".to_string());
        }
        match &self.implementation {
            OracleImpl::Builtin(name) if !BUILTIN_NAMES.contains(&name.as_str()) => Err(format!(
                "{name} is not a built-in predicate; the built-ins are {}",
                BUILTIN_NAMES.join(", ")
            )),
            OracleImpl::Command(argv) if argv.is_empty() => {
                Err("oracle command must name an executable".to_string())
            }
            _ => Ok(()),
        }
    }
}

/// The checker's view of predicates: membership, checking, synthesis.
pub trait PredicateEvaluator {
    fn knows(&self, pred: &str) -> bool;
    fn check(&self, query: &PredicateQuery<'_>) -> PredicateVerdict;
    fn synthesize(&self, query: &SynthesisQuery<'_>) -> SynthesisOutcome;
}
