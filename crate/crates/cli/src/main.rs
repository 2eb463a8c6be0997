mod args;
mod run;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use serde_json::{json, Value};

use args::Cli;
use pigeom::Verdict;

fn emit(doc: &Value, out: Option<&std::path::Path>) -> std::io::Result<()> {
    let mut text = serde_json::to_string_pretty(doc).expect("json values always serialize");
    text.push('\n');
    match out {
        Some(p) => std::fs::write(p, text),
        None => std::io::stdout().lock().write_all(text.as_bytes()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => {
            eprint!("{e}");
            let doc = json!({
                "tool": "pigeom",
                "version": env!("CARGO_PKG_VERSION"),
                "error": {"code": "E-USAGE", "message": e.kind().to_string()},
                "verdict": Value::Null,
            });
            let _ = emit(&doc, None);
            return ExitCode::from(2);
        }
    };
    let mut doc = json!({
        "tool": "pigeom",
        "version": env!("CARGO_PKG_VERSION"),
        "config": run::config_echo(&cli),
    });
    let code = match run::run(&cli) {
        Ok(outcome) => {
            let verdict = outcome.verdict();
            doc["reports"] = Value::Array(outcome.reports.iter().map(|r| r.to_json()).collect());
            doc["verdict"] = verdict.to_json();
            if verdict == Verdict::Pass {
                0
            } else {
                1
            }
        }
        Err(e) => {
            eprintln!("error[{}]: {e}", e.code());
            doc["error"] = json!({"code": e.code(), "message": e.to_string()});
            doc["verdict"] = Value::Null;
            2
        }
    };
    if let Err(e) = emit(&doc, cli.common.out.as_deref()) {
        eprintln!("error[E-IO]: cannot write output: {e}");
        return ExitCode::from(2);
    }
    ExitCode::from(code)
}
