//! Command-line front end.
//!
//! `llfp check` runs script files and compares every goal's verdict with its
//! `expect` clause; `llfp synth`, `llfp subst` and `llfp solve` are one-shot
//! drivers for classifier synthesis, hereditary substitution and witness
//! synthesis over the blocks of a script file.
//!
//! Exit codes are a stable contract: 0 when every goal matched (or the
//! one-shot command succeeded), 1 when a goal mismatched or the command's
//! judgement failed, 2 on usage, parse or configuration errors.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use crate::checker::Checker;
use crate::driver::{self, DriverError, ScriptEnv};
use crate::hsubst::subst_canonical_object;
use crate::predicates::{OracleConfig, OracleImpl, Registry, DEFAULT_FUEL, DEFAULT_TIMEOUT};
use crate::surface::{
    self, context_var_names, parse_expr, resolve_family, resolve_object, SurfaceError,
};
use crate::syntax::{erase, Context, Signature, SystemMode, VarName};

#[derive(Parser)]
#[command(
    name = "llfp",
    version,
    about = "Proof checker for a canonical logical framework with predicate-guarded locks"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run script goals and compare each verdict with its expectation.
    Check(CheckArgs),
    /// Synthesize the classifier of an atomic term.
    Synth(SynthArgs),
    /// Apply one hereditary substitution to a term.
    Subst(SubstArgs),
    /// Ask a predicate to synthesize the witness of a binder lock.
    Solve(SolveArgs),
}

#[derive(Args)]
struct CheckArgs {
    /// Rule system to check under; a script's `%system` header must agree.
    #[arg(long, value_parser = parse_mode, value_name = "p|pq")]
    system: Option<SystemMode>,
    /// Oracle configuration file (falls back to $LLFP_ORACLES).
    #[arg(long, value_name = "FILE")]
    oracles: Option<PathBuf>,
    /// Attach the full derivation to every goal report.
    #[arg(long)]
    trace: bool,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[arg(required = true, value_name = "FILES")]
    files: Vec<PathBuf>,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, value_parser = parse_mode, value_name = "p|pq")]
    system: Option<SystemMode>,
    #[arg(long, value_name = "FILE")]
    oracles: Option<PathBuf>,
    /// Signature block to check under (defaults to the file's only one).
    #[arg(long, value_name = "NAME")]
    sig: Option<String>,
    /// Context block to check under (defaults to the empty context).
    #[arg(long, value_name = "NAME")]
    ctx: Option<String>,
    /// Script file providing the signature and context blocks.
    file: PathBuf,
    /// The atomic term, in surface syntax.
    term: String,
}

#[derive(Args)]
struct SubstArgs {
    #[arg(long, value_parser = parse_mode, value_name = "p|pq")]
    system: Option<SystemMode>,
    /// Context block whose variables the terms may mention.
    #[arg(long, value_name = "NAME")]
    ctx: Option<String>,
    /// Script file providing the context blocks (and the system header).
    file: PathBuf,
    /// Term to substitute into.
    #[arg(long, value_name = "TERM")]
    target: String,
    /// The variable to replace.
    #[arg(long, value_name = "NAME")]
    var: String,
    /// The object replacing it.
    #[arg(long, value_name = "TERM")]
    replacement: String,
    /// The variable's classifier; its erasure indexes the substitution.
    #[arg(long, value_name = "FAMILY")]
    rho: String,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long, value_parser = parse_mode, value_name = "p|pq")]
    system: Option<SystemMode>,
    #[arg(long, value_name = "FILE")]
    oracles: Option<PathBuf>,
    /// Signature block to solve under (defaults to the file's only one).
    #[arg(long, value_name = "NAME")]
    sig: Option<String>,
    /// Context block to solve under (defaults to the empty context).
    #[arg(long, value_name = "NAME")]
    ctx: Option<String>,
    /// Script file providing the signature and context blocks.
    file: PathBuf,
    /// The binder-lock family to solve, in surface syntax.
    family: String,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    /// Human-readable report with timings.
    Text,
    /// One structured record per goal, byte-stable across runs.
    Records,
}

fn parse_mode(s: &str) -> Result<SystemMode, String> {
    match s {
        "p" => Ok(SystemMode::P),
        "pq" => Ok(SystemMode::Pq),
        other => Err(format!("unknown system `{other}` (expected `p` or `pq`)")),
    }
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{path}: {err}")]
    Io { path: String, err: std::io::Error },
    #[error(transparent)]
    Surface(#[from] SurfaceError),
    #[error(transparent)]
    Driver(#[from] DriverError),
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Judgement(String),
}

impl CliError {
    fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Judgement(_) => ExitCode::from(1),
            _ => ExitCode::from(2),
        }
    }
}

/// Parses the process arguments, runs the selected command and returns the
/// process exit code.
pub fn run() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.cmd {
        Cmd::Check(a) => cmd_check(a),
        Cmd::Synth(a) => cmd_synth(a),
        Cmd::Subst(a) => cmd_subst(a),
        Cmd::Solve(a) => cmd_solve(a),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("llfp: {e}");
            e.exit_code()
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path)
        .map_err(|err| CliError::Io { path: path.display().to_string(), err })
}

fn cmd_check(a: CheckArgs) -> Result<bool, CliError> {
    let registry = load_oracles(a.oracles.as_deref())?;
    let mut all_matched = true;
    for path in &a.files {
        let src = read(path)?;
        let name = path.display().to_string();
        let (script, mode) = surface::parse_script(&src, &name, a.system)?;
        let report = driver::run_script(&script, mode, &name, &registry, a.trace)?;
        match a.format {
            Format::Text => print!("{}", report.render_text()),
            Format::Records => print!("{}", report.render_records()),
        }
        all_matched &= report.all_matched();
    }
    Ok(all_matched)
}

fn cmd_synth(a: SynthArgs) -> Result<bool, CliError> {
    let registry = load_oracles(a.oracles.as_deref())?;
    let (env, mode) = load_env(&a.file, a.system)?;
    let (_, sig) = pick_signature(&env, a.sig.as_deref())?;
    let ctx = pick_context(&env, a.ctx.as_deref())?;
    let term = surface::parse_atomic_object(&a.term, "<term>", mode, &ctx)?;
    match Checker::new(sig, mode, &registry).synth_atomic_object(&ctx, &term) {
        Ok((family, _)) => {
            println!("{family}");
            Ok(true)
        }
        Err(e) => Err(CliError::Judgement(e.to_string())),
    }
}

fn cmd_subst(a: SubstArgs) -> Result<bool, CliError> {
    let (env, mode) = load_env(&a.file, a.system)?;
    let ctx = pick_context(&env, a.ctx.as_deref())?;
    let mut vars = context_var_names(&ctx);
    vars.insert(a.var.clone());
    let x = VarName::source(&a.var);
    let target = resolve_object(&parse_expr(&a.target, "<target>", mode)?, &vars)?;
    let replacement = resolve_object(&parse_expr(&a.replacement, "<replacement>", mode)?, &vars)?;
    let rho_family = resolve_family(&parse_expr(&a.rho, "<rho>", mode)?, &vars)?;
    let rho = erase(&rho_family);
    match subst_canonical_object(&target, &replacement, &x, &rho, mode) {
        Ok(result) => {
            println!("{result}");
            Ok(true)
        }
        Err(e) => Err(CliError::Judgement(e.to_string())),
    }
}

fn cmd_solve(a: SolveArgs) -> Result<bool, CliError> {
    let registry = load_oracles(a.oracles.as_deref())?;
    let (env, mode) = load_env(&a.file, a.system)?;
    let (_, sig) = pick_signature(&env, a.sig.as_deref())?;
    let ctx = pick_context(&env, a.ctx.as_deref())?;
    let family = surface::parse_family(&a.family, "<family>", mode, &ctx)?;
    match Checker::new(sig, mode, &registry).solve_lock(&ctx, &family) {
        Ok(Some(out)) => {
            println!("witness {}", out.witness);
            println!("unlocked {}", out.unlocked);
            Ok(true)
        }
        Ok(None) => {
            println!("no witness");
            Ok(true)
        }
        Err(e) => Err(CliError::Judgement(e.to_string())),
    }
}

fn load_env(path: &Path, cli_mode: Option<SystemMode>) -> Result<(ScriptEnv, SystemMode), CliError> {
    let src = read(path)?;
    let name = path.display().to_string();
    let (script, mode) = surface::parse_script(&src, &name, cli_mode)?;
    Ok((driver::script_env(&script)?, mode))
}

fn pick_signature<'e>(
    env: &'e ScriptEnv,
    name: Option<&str>,
) -> Result<(&'e str, &'e Signature), CliError> {
    match name {
        Some(n) => env
            .sigs
            .get_key_value(n)
            .map(|(k, v)| (k.as_str(), v))
            .ok_or_else(|| CliError::Config(format!("no signature block named `{n}`"))),
        None => {
            let mut it = env.sigs.iter();
            match (it.next(), it.next()) {
                (Some((k, v)), None) => Ok((k.as_str(), v)),
                (None, _) => Err(CliError::Config("the file declares no signature".to_string())),
                (Some(_), Some(_)) => Err(CliError::Config(format!(
                    "the file declares several signatures ({}); pick one with --sig",
                    env.sigs.keys().cloned().collect::<Vec<_>>().join(", ")
                ))),
            }
        }
    }
}

fn pick_context(env: &ScriptEnv, name: Option<&str>) -> Result<Context, CliError> {
    match name {
        Some(n) => env
            .ctxs
            .get(n)
            .map(|(_, c)| c.clone())
            .ok_or_else(|| CliError::Config(format!("no context block named `{n}`"))),
        None => Ok(Context::new()),
    }
}

/// One predicate's entry in the oracle configuration file: exactly one of
/// `builtin` or `command`, plus optional budgets.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct OracleEntry {
    builtin: Option<String>,
    command: Option<Vec<String>>,
    fuel: Option<u64>,
    #[serde(rename = "timeout-ms")]
    timeout_ms: Option<u64>,
}

impl OracleEntry {
    fn into_config(self, pred: &str) -> Result<OracleConfig, CliError> {
        let implementation = match (self.builtin, self.command) {
            (Some(name), None) => OracleImpl::Builtin(name),
            (None, Some(argv)) => OracleImpl::Command(argv),
            _ => {
                return Err(CliError::Config(format!(
                    "predicate `{pred}` must set exactly one of `builtin` or `command`"
                )))
            }
        };
        Ok(OracleConfig {
            implementation,
            fuel: self.fuel.unwrap_or(DEFAULT_FUEL),
            timeout: self.timeout_ms.map(Duration::from_millis).unwrap_or(DEFAULT_TIMEOUT),
        })
    }
}

/// Builds the oracle registry: every built-in under its own name, overridden
/// or extended by the configuration file named by `--oracles` or, failing
/// that, by `$LLFP_ORACLES`.
fn load_oracles(flag: Option<&Path>) -> Result<Registry, CliError> {
    let mut registry = Registry::with_builtins();
    let path = flag
        .map(Path::to_path_buf)
        .or_else(|| std::env::var_os("LLFP_ORACLES").map(PathBuf::from));
    let Some(path) = path else { return Ok(registry) };
    let text = read(&path)?;
    let table: BTreeMap<String, OracleEntry> = toml::from_str(&text)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    for (pred, entry) in table {
        let config = entry.into_config(&pred)?;
        registry
            .register(&pred, config)
            .map_err(|e| CliError::Config(format!("{}: predicate `{pred}`: {e}", path.display())))?;
    }
    Ok(registry)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn command_line_contract_is_well_formed() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }

    #[test]
    fn oracle_entries_reject_ambiguous_implementations() {
        let both = OracleEntry {
            builtin: Some("True".to_string()),
            command: Some(vec!["cat".to_string()]),
            fuel: None,
            timeout_ms: None,
        };
        assert!(both.into_config("X").is_err());
        let neither =
            OracleEntry { builtin: None, command: None, fuel: None, timeout_ms: None };
        assert!(neither.into_config("X").is_err());
    }

    #[test]
    fn oracle_entries_carry_budget_overrides() {
        let entry = OracleEntry {
            builtin: Some("Light".to_string()),
            command: None,
            fuel: Some(77),
            timeout_ms: Some(250),
        };
        let config = entry.into_config("Light").unwrap();
        assert_eq!(config.fuel, 77);
        assert_eq!(config.timeout, Duration::from_millis(250));
        assert_eq!(config.implementation, OracleImpl::Builtin("Light".to_string()));
    }

    #[test]
    fn oracle_files_parse_as_toml_tables() {
        let text = "
            [SQRT]
            builtin = \"SQRT\"
            fuel = 123

            [Parity]
            command = [\"sh\", \"-c\", \"cat\"]
            timeout-ms = 1000
        ";
        let table: BTreeMap<String, OracleEntry> = toml::from_str(text).unwrap();
        assert_eq!(table.len(), 2);
        let sqrt = table.get("SQRT").unwrap();
        assert_eq!(sqrt.fuel, Some(123));
        let parity = table.get("Parity").unwrap();
        assert_eq!(parity.command.as_deref().map(|c| c.len()), Some(3));
    }
}
