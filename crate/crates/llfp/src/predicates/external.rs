//! External oracles: subprocesses speaking line-delimited JSON over stdio.
//!
//! One request is one line on the child's stdin:
//!
//! ```json
//! {"op":"check","pred":"P","sig":"...","ctx":"...","term":"...","type":"...","fuel":10000}
//! {"op":"synth","pred":"P","sig":"...","ctx":"...","type":"...","fuel":10000}
//! ```
//!
//! and one reply is one line on its stdout:
//!
//! ```json
//! {"verdict":"holds"}
//! {"verdict":"fails","reason":"..."}
//! {"verdict":"unknown","reason":"fuel"}
//! {"verdict":"holds","witness":"..."}
//! ```
//!
//! Terms, contexts and signatures travel in surface syntax. Requests to one
//! process are serialized, so replies pair with requests by order. A timeout
//! abandons the request but leaves the process running; the eventual late
//! reply is counted and drained before the next real reply is read. Replies
//! that do not conform to the protocol are reported as `Unknown`, never as
//! acceptance.

use std::cell::{Cell, RefCell};
use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::thread;
use std::time::{Duration, Instant};

use serde_json::{json, Value};

use crate::surface;

use super::{
    OracleConfig, PredicateQuery, PredicateVerdict, SynthesisOutcome, SynthesisQuery,
    UnknownReason,
};

pub(crate) struct ExternalOracle {
    child: RefCell<Child>,
    stdin: RefCell<ChildStdin>,
    replies: Receiver<String>,
    /// Replies owed to us for requests we abandoned on timeout.
    stale: Cell<u32>,
}

enum ReqError {
    Timeout,
    Closed,
    Io(String),
}

impl ExternalOracle {
    pub(crate) fn spawn(argv: &[String]) -> std::io::Result<Self> {
        let mut child = Command::new(&argv[0])
            .args(&argv[1..])
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()?;
        let stdin = child.stdin.take().expect("stdin was piped");
        let stdout = child.stdout.take().expect("stdout was piped");
        let (tx, rx) = mpsc::channel();
        thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                let Ok(line) = line else { break };
                if tx.send(line).is_err() {
                    break;
                }
            }
        });
        Ok(ExternalOracle {
            child: RefCell::new(child),
            stdin: RefCell::new(stdin),
            replies: rx,
            stale: Cell::new(0),
        })
    }

    pub(crate) fn check(
        &self,
        q: &PredicateQuery<'_>,
        config: &OracleConfig,
    ) -> PredicateVerdict {
        let payload = json!({
            "op": "check",
            "pred": q.pred,
            "sig": q.sig.to_string(),
            "ctx": q.ctx.to_string(),
            "term": q.subject.to_string(),
            "type": q.classifier.to_string(),
            "fuel": config.fuel,
        });
        match self.request(&payload, config.timeout) {
            Ok(reply) => check_reply(&reply),
            Err(ReqError::Timeout) => PredicateVerdict::Unknown(UnknownReason::Timeout),
            Err(ReqError::Closed) => PredicateVerdict::Unknown(UnknownReason::Unsupported(
                "the oracle closed its output".to_string(),
            )),
            Err(ReqError::Io(msg)) => {
                PredicateVerdict::Unknown(UnknownReason::Unsupported(msg))
            }
        }
    }

    pub(crate) fn synthesize(
        &self,
        q: &SynthesisQuery<'_>,
        config: &OracleConfig,
    ) -> SynthesisOutcome {
        let payload = json!({
            "op": "synth",
            "pred": q.pred,
            "sig": q.sig.to_string(),
            "ctx": q.ctx.to_string(),
            "type": q.classifier.to_string(),
            "fuel": config.fuel,
        });
        match self.request(&payload, config.timeout) {
            Ok(reply) => synth_reply(&reply, q),
            Err(ReqError::Timeout) => {
                SynthesisOutcome::Unsupported("the oracle timed out".to_string())
            }
            Err(ReqError::Closed) => {
                SynthesisOutcome::Unsupported("the oracle closed its output".to_string())
            }
            Err(ReqError::Io(msg)) => SynthesisOutcome::Unsupported(msg),
        }
    }

    fn request(&self, payload: &Value, timeout: Duration) -> Result<Value, ReqError> {
        {
            let mut w = self.stdin.borrow_mut();
            let send = w
                .write_all(payload.to_string().as_bytes())
                .and_then(|()| w.write_all(b"\n"))
                .and_then(|()| w.flush());
            send.map_err(|e| ReqError::Io(format!("oracle request failed: {e}")))?;
        }
        let deadline = Instant::now() + timeout;
        while self.stale.get() > 0 {
            self.recv_until(deadline)?;
            self.stale.set(self.stale.get() - 1);
        }
        let line = self.recv_until(deadline)?;
        serde_json::from_str(&line)
            .map_err(|e| ReqError::Io(format!("malformed oracle reply: {e}")))
    }

    fn recv_until(&self, deadline: Instant) -> Result<String, ReqError> {
        let budget = deadline.saturating_duration_since(Instant::now());
        match self.replies.recv_timeout(budget) {
            Ok(line) => Ok(line),
            Err(RecvTimeoutError::Timeout) => {
                self.stale.set(self.stale.get() + 1);
                Err(ReqError::Timeout)
            }
            Err(RecvTimeoutError::Disconnected) => Err(ReqError::Closed),
        }
    }
}

impl Drop for ExternalOracle {
    fn drop(&mut self) {
        let mut child = self.child.borrow_mut();
        let _ = child.kill();
        let _ = child.wait();
    }
}

fn check_reply(reply: &Value) -> PredicateVerdict {
    match reply.get("verdict").and_then(Value::as_str) {
        Some("holds") => PredicateVerdict::Holds,
        Some("fails") => PredicateVerdict::Fails(
            reply
                .get("reason")
                .and_then(Value::as_str)
                .unwrap_or("the oracle rejected the judgement")
                .to_string(),
        ),
        Some("unknown") => {
            PredicateVerdict::Unknown(match reply.get("reason").and_then(Value::as_str) {
                Some("fuel") => UnknownReason::Fuel,
                Some("timeout") => UnknownReason::Timeout,
                Some(other) => UnknownReason::Unsupported(other.to_string()),
                None => UnknownReason::Unsupported("the oracle gave no reason".to_string()),
            })
        }
        _ => PredicateVerdict::Unknown(UnknownReason::Unsupported(format!(
            "malformed oracle reply: {reply}"
        ))),
    }
}

fn synth_reply(reply: &Value, q: &SynthesisQuery<'_>) -> SynthesisOutcome {
    match reply.get("verdict").and_then(Value::as_str) {
        Some("holds") => {
            let Some(src) = reply.get("witness").and_then(Value::as_str) else {
                return SynthesisOutcome::Unsupported(
                    "the oracle reply carried no witness".to_string(),
                );
            };
            match surface::parse_object(src, "<oracle reply>", q.mode, q.ctx) {
                Ok(w) => SynthesisOutcome::Witness(w),
                Err(e) => {
                    SynthesisOutcome::Unsupported(format!("unparseable oracle witness: {e}"))
                }
            }
        }
        Some("fails") => SynthesisOutcome::NoWitness,
        Some("unknown") => SynthesisOutcome::Unsupported(
            reply
                .get("reason")
                .and_then(Value::as_str)
                .unwrap_or("the oracle gave no reason")
                .to_string(),
        ),
        _ => {
            SynthesisOutcome::Unsupported(format!("malformed oracle reply: {reply}"))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::build::*;
    use crate::syntax::{CanonicalObject, Context, Signature, SystemMode};

    fn shell_oracle(script: &str) -> ExternalOracle {
        ExternalOracle::spawn(&["sh".to_string(), "-c".to_string(), script.to_string()])
            .expect("sh is available")
    }

    fn query<'a>(
        sig: &'a Signature,
        ctx: &'a Context,
        subject: &'a CanonicalObject,
        classifier: &'a crate::syntax::Family,
    ) -> PredicateQuery<'a> {
        PredicateQuery { pred: "P", sig, ctx, subject, classifier, mode: SystemMode::P }
    }

    #[test]
    fn round_trips_check_requests() {
        let oracle = shell_oracle(
            r#"while read line; do printf '{"verdict":"holds"}\n'; done"#,
        );
        let sig = Signature::new();
        let ctx = Context::new();
        let subject = atom(oconst("c"));
        let classifier = fconst("a");
        let config = OracleConfig::command(vec!["sh".to_string()]);
        let q = query(&sig, &ctx, &subject, &classifier);
        assert_eq!(oracle.check(&q, &config), PredicateVerdict::Holds);
        assert_eq!(oracle.check(&q, &config), PredicateVerdict::Holds);
    }

    #[test]
    fn maps_fails_and_unknown_reasons() {
        let oracle = shell_oracle(
            r#"read line; printf '{"verdict":"fails","reason":"nope"}\n'; read line; printf '{"verdict":"unknown","reason":"fuel"}\n'"#,
        );
        let sig = Signature::new();
        let ctx = Context::new();
        let subject = atom(oconst("c"));
        let classifier = fconst("a");
        let config = OracleConfig::command(vec!["sh".to_string()]);
        let q = query(&sig, &ctx, &subject, &classifier);
        assert_eq!(oracle.check(&q, &config), PredicateVerdict::Fails("nope".to_string()));
        assert_eq!(
            oracle.check(&q, &config),
            PredicateVerdict::Unknown(UnknownReason::Fuel)
        );
    }

    #[test]
    fn malformed_replies_are_unknown() {
        let oracle = shell_oracle(r#"while read line; do echo not-json; done"#);
        let sig = Signature::new();
        let ctx = Context::new();
        let subject = atom(oconst("c"));
        let classifier = fconst("a");
        let config = OracleConfig::command(vec!["sh".to_string()]);
        let q = query(&sig, &ctx, &subject, &classifier);
        assert!(matches!(
            oracle.check(&q, &config),
            PredicateVerdict::Unknown(UnknownReason::Unsupported(_))
        ));
    }

    #[test]
    fn a_dead_oracle_is_unknown_not_a_panic() {
        let oracle = shell_oracle("read line; exit 0");
        let sig = Signature::new();
        let ctx = Context::new();
        let subject = atom(oconst("c"));
        let classifier = fconst("a");
        let config = OracleConfig::command(vec!["sh".to_string()]);
        let q = query(&sig, &ctx, &subject, &classifier);
        assert!(matches!(
            oracle.check(&q, &config),
            PredicateVerdict::Unknown(UnknownReason::Unsupported(_))
        ));
    }

    #[test]
    fn timeouts_abandon_the_request_and_drain_the_late_reply() {
        let oracle = shell_oracle(
            r#"n=0
while read line; do
  n=$((n+1))
  if [ "$n" -eq 1 ]; then
    sleep 1
    printf '{"verdict":"fails","reason":"late"}\n'
  else
    printf '{"verdict":"holds"}\n'
  fi
done"#,
        );
        let sig = Signature::new();
        let ctx = Context::new();
        let subject = atom(oconst("c"));
        let classifier = fconst("a");
        let q = query(&sig, &ctx, &subject, &classifier);

        let short = OracleConfig::command(vec!["sh".to_string()])
            .with_timeout(Duration::from_millis(100));
        assert_eq!(
            oracle.check(&q, &short),
            PredicateVerdict::Unknown(UnknownReason::Timeout)
        );

        let long = OracleConfig::command(vec!["sh".to_string()])
            .with_timeout(Duration::from_secs(10));
        assert_eq!(oracle.check(&q, &long), PredicateVerdict::Holds);
    }

    #[test]
    fn parses_synthesized_witnesses() {
        let oracle = shell_oracle(
            r#"read line; printf '{"verdict":"holds","witness":"S (S O)"}\n'; read line; printf '{"verdict":"fails"}\n'"#,
        );
        let sig = Signature::new();
        let ctx = Context::new();
        let classifier = fconst("nat");
        let config = OracleConfig::command(vec!["sh".to_string()]);
        let q = SynthesisQuery {
            pred: "P",
            sig: &sig,
            ctx: &ctx,
            classifier: &classifier,
            mode: SystemMode::Pq,
        };
        let two = atom(app(
            oconst("S"),
            atom(app(oconst("S"), atom(oconst("O")))),
        ));
        assert_eq!(oracle.synthesize(&q, &config), SynthesisOutcome::Witness(two));
        assert_eq!(oracle.synthesize(&q, &config), SynthesisOutcome::NoWitness);
    }
}
