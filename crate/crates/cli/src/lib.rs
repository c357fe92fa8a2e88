//! Front end for `gsbm-core`: argument parsing, the six subcommands, and
//! report serialization. The binary is a thin wrapper around [`run`].

pub mod args;
pub mod commands;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::{SystemTime, UNIX_EPOCH};

use gsbm_core::GsbmError;
use serde::Serialize;
use serde_json::{json, Value};

pub use args::{Cli, Command, CommonArgs, Format, Method};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_VERIFY: i32 = 3;
pub const EXIT_BUDGET: i32 = 4;

/// Tolerance names accepted by `--tol` and their defaults.
pub const TOLERANCE_DEFAULTS: [(&str, f64); 9] = [
    ("zero_tol", 1e-10),
    ("audit_tol", 1e-10),
    ("eps", 0.1),
    ("c", 1.0),
    ("C", 1.0),
    ("delta", 0.5),
    ("enum_budget", 1e7),
    ("envelope_c", 2.0),
    ("envelope_decay", 0.5),
];

#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub code: i32,
    pub kind: &'static str,
    pub message: String,
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_CONFIG,
            kind: "config",
            message: message.into(),
        }
    }

    pub fn to_json(&self) -> Value {
        json!({"error": {"kind": self.kind, "code": self.code, "message": self.message}})
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.kind, self.message)
    }
}

impl From<GsbmError> for CliError {
    fn from(e: GsbmError) -> Self {
        let (code, kind) = match e {
            GsbmError::BudgetExceeded { .. } => (EXIT_BUDGET, "budget"),
            GsbmError::ChainViolation { .. } => (EXIT_VERIFY, "verification"),
            _ => (EXIT_CONFIG, "config"),
        };
        Self {
            code,
            kind,
            message: e.to_string(),
        }
    }
}

/// Every resolved setting of a run, embedded in its report.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: String,
    #[serde(flatten)]
    pub args: CommonArgs,
    pub tolerances: BTreeMap<String, f64>,
    /// The model after defaults were filled in.
    pub model_spec: Option<Value>,
}

impl RunConfig {
    pub fn new(command: &str, args: CommonArgs) -> Result<Self, CliError> {
        let mut tolerances: BTreeMap<String, f64> =
            TOLERANCE_DEFAULTS.iter().map(|(k, v)| (k.to_string(), *v)).collect();
        for (k, v) in args.tolerances() {
            if !tolerances.contains_key(&k) {
                let known: Vec<&str> = TOLERANCE_DEFAULTS.iter().map(|(k, _)| *k).collect();
                return Err(CliError::config(format!("unknown tolerance {k:?}; known: {}", known.join(", "))));
            }
            tolerances.insert(k, v);
        }
        Ok(Self {
            command: command.to_string(),
            args,
            tolerances,
            model_spec: None,
        })
    }

    pub fn tol(&self, name: &str) -> f64 {
        self.tolerances[name]
    }
}

/// Tabular view of a result for `--format csv`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for r in &self.rows {
            writeln!(out, "{}", r.join(",")).expect("write to string");
        }
        out
    }
}

/// What a command produced.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub result: Value,
    pub table: Option<Table>,
    /// A checked inequality or bound did not hold.
    pub failed: bool,
    /// CSV that replaces the table form entirely (instance edge lists).
    pub raw_csv: Option<String>,
}

impl Outcome {
    pub fn new(result: Value) -> Self {
        Self {
            result,
            table: None,
            failed: false,
            raw_csv: None,
        }
    }
}

/// The full JSON document written for a run.
pub fn report_json(cfg: &RunConfig, outcome: &Outcome, timestamp: Option<u64>) -> Value {
    let mut doc = json!({
        "command": cfg.command,
        "config": cfg,
        "passed": !outcome.failed,
        "result": outcome.result,
    });
    if let Some(t) = timestamp {
        doc["timestamp"] = t.into();
    }
    doc
}

fn now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

/// Renders the output text for a finished command.
pub fn render(cfg: &RunConfig, outcome: &Outcome) -> Result<String, CliError> {
    match cfg.args.format {
        Format::Json => {
            let doc = report_json(cfg, outcome, Some(now()));
            Ok(serde_json::to_string_pretty(&doc).expect("report serializes") + "\n")
        }
        Format::Csv => match (&outcome.raw_csv, &outcome.table) {
            (Some(csv), _) => Ok(csv.clone()),
            (None, Some(t)) => Ok(t.to_csv()),
            (None, None) => Err(CliError::config(format!("{} has no CSV form; use --format json", cfg.command))),
        },
    }
}

/// Runs one command and returns its outcome without writing anything.
pub fn execute(command: &Command) -> Result<(RunConfig, Outcome), CliError> {
    let mut cfg = RunConfig::new(command.name(), command.args().clone())?;
    let outcome = match command {
        Command::Analyze(_) => commands::cmd_analyze(&mut cfg)?,
        Command::Bound(a) if a.sweep.is_some() => commands::cmd_sweep(&mut cfg)?,
        Command::Bound(_) => commands::cmd_bound(&mut cfg)?,
        Command::Verify(_) => commands::cmd_verify(&mut cfg)?,
        Command::Sample(_) => commands::cmd_sample(&mut cfg)?,
        Command::Concentrate(_) => commands::cmd_concentrate(&mut cfg)?,
        Command::Sweep(_) => commands::cmd_sweep(&mut cfg)?,
    };
    Ok((cfg, outcome))
}

/// Runs a parsed command line, writes the report, and returns the exit code.
pub fn run(cli: &Cli) -> i32 {
    let result = execute(&cli.command).and_then(|(cfg, outcome)| {
        let text = render(&cfg, &outcome)?;
        match &cfg.args.out {
            Some(path) => std::fs::write(path, text)
                .map_err(|e| CliError::config(format!("cannot write {}: {e}", path.display())))?,
            None => print!("{text}"),
        }
        Ok(outcome.failed)
    });
    match result {
        Ok(false) => EXIT_OK,
        Ok(true) => EXIT_VERIFY,
        Err(e) => {
            eprintln!("{}", e.to_json());
            e.code
        }
    }
}

/// Applies `GSBM_LAB_THREADS` to the global rayon pool.
pub fn configure_threads() -> Result<(), CliError> {
    if let Ok(v) = std::env::var("GSBM_LAB_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .map_err(|_| CliError::config(format!("GSBM_LAB_THREADS={v:?} is not a positive integer")))?;
        if n == 0 {
            return Err(CliError::config("GSBM_LAB_THREADS must be positive"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::config(format!("thread pool: {e}")))?;
    }
    Ok(())
}
