//! A proof checker for a canonical logical framework with predicate-guarded
//! lock types.
//!
//! The framework comes in two flavours, selected by [`syntax::SystemMode`]:
//!
//! * mode `P`: a lock type `lock[P; N : s] t` records the obligation that an
//!   external predicate `P` accepts the guard judgement `N <= s`; the unlock
//!   destructor discharges it by actually querying the predicate.
//! * mode `PQ`: the lock binds a witness variable instead of carrying a fixed
//!   guard term, and unlocking supplies (or synthesizes) the witness.
//!
//! Only beta-eta-long forms are typeable. There is no reduction relation in
//! the kernel; substitution is hereditary and the checker is bidirectional
//! and syntax-directed, so checking is decidable whenever the predicates
//! answer within their fuel budgets.
//!
//! Module map:
//!
//! * [`syntax`]: terms, signatures, contexts, alpha-equivalence, erasure to
//!   simple types, skeleton decomposition.
//! * [`hsubst`]: hereditary substitution, indexed by simple types.
//! * [`checker`]: the bidirectional checker and derivation trees.
//! * [`predicates`]: built-in predicates, external oracle subprocesses, the
//!   well-behavedness test harness.
//! * [`surface`]: concrete syntax — lexer, parser, printer, name resolution,
//!   script files.
//! * [`driver`]: script execution and report formatting for the `llfp` binary.
//! * [`testkit`]: seeded generators of well-typed terms for the metatheory
//!   test suites.

pub mod checker;
pub mod cli;
pub mod driver;
pub mod hsubst;
pub mod predicates;
pub mod surface;
pub mod syntax;
pub mod testkit;
