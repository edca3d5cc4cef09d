mod commands;
mod config;
mod json;

use clap::{Parser, Subcommand};
use commands::MonodromyMethod;
use config::{parse_complex, JobConfig, RawConfig};
use ellconn::error::ErrorClass;
use ellconn::{Error, Result, C64};
use serde_json::{json, Value};
use std::io::Write;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "ellconn", version, about = "Direct-image connections on a bielliptic cover")]
struct Cli {
    /// Flat `key = value` configuration file.
    #[arg(long, global = true)]
    config: Option<std::path::PathBuf>,
    /// Override one key, e.g. `--set t=1.8,0.3`. Repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    sets: Vec<String>,
    /// Print the effective configuration and exit.
    #[arg(long, global = true)]
    show_config: bool,
    /// Pretty-print the JSON output.
    #[arg(long, global = true)]
    pretty: bool,
    #[command(subcommand)]
    cmd: Option<Cmd>,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Period constants, elliptic periods, the genus-2 period matrix, N1..N4.
    Periods,
    /// Connection matrix on a sample grid and its residues.
    Connection,
    /// Monodromy of the direct image.
    Monodromy {
        #[arg(long, value_enum, default_value = "both")]
        method: MonodromyMethod,
    },
    /// Membership in the image of the Riemann-Hilbert map.
    RhImage {
        #[arg(long, num_args = 2, value_names = ["W1", "W2"], allow_hyphen_values = true)]
        elliptic: Vec<String>,
        #[arg(long, num_args = 4, value_names = ["W1", "W2", "W3", "W4"], allow_hyphen_values = true)]
        genus2: Vec<String>,
    },
    /// Identify the direct-image bundle.
    Bundle,
    /// Gabber transform at p+.
    Gabber {
        /// Also compare transport monodromy before and after.
        #[arg(long)]
        check_monodromy: bool,
    },
    /// Monodromy group and differential Galois group.
    Classify,
    /// Isomonodromy invariants; `--other` gives a second configuration.
    Isomonodromy {
        /// Overrides, on top of the main configuration, for the second job.
        #[arg(long = "other", value_name = "KEY=VALUE")]
        other: Vec<String>,
    },
}

fn load(cli: &Cli) -> Result<RawConfig> {
    let mut raw = RawConfig::default();
    if let Some(path) = &cli.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))?;
        raw.merge_text(&text)?;
    }
    for s in &cli.sets {
        raw.assign(s)?;
    }
    Ok(raw)
}

fn complexes(v: &[String]) -> Result<Vec<C64>> {
    v.iter().map(|s| parse_complex(s)).collect()
}

fn run(cli: &Cli, raw: &RawConfig) -> Result<Value> {
    let cmd = cli
        .cmd
        .as_ref()
        .ok_or_else(|| Error::InvalidInput("no subcommand given (see --help)".into()))?;
    if let Cmd::RhImage { elliptic, genus2 } = cmd {
        return commands::rh_image(&complexes(elliptic)?, &complexes(genus2)?);
    }
    let cfg = JobConfig::from_raw(raw)?;
    match cmd {
        Cmd::Periods => commands::periods(&cfg),
        Cmd::Connection => commands::connection_report(&cfg),
        Cmd::Monodromy { method } => commands::monodromy(&cfg, *method),
        Cmd::Bundle => commands::bundle(&cfg),
        Cmd::Gabber { check_monodromy } => commands::gabber(&cfg, *check_monodromy),
        Cmd::Classify => commands::classify(&cfg),
        Cmd::Isomonodromy { other } => {
            let parsed = if other.is_empty() {
                None
            } else {
                let mut r = raw.clone();
                for s in other {
                    r.assign(s)?;
                }
                Some(JobConfig::from_raw(&r)?)
            };
            commands::isomonodromy(&cfg, parsed.as_ref())
        }
        Cmd::RhImage { .. } => unreachable!(),
    }
}

fn emit(v: &Value, pretty: bool) {
    let s = if pretty { serde_json::to_string_pretty(v) } else { serde_json::to_string(v) };
    let mut out = std::io::stdout().lock();
    // A closed pipe (e.g. `| head`) is not an error worth reporting.
    let _ = writeln!(out, "{}", s.expect("JSON values serialize"));
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = load(&cli).and_then(|raw| {
        if cli.show_config {
            JobConfig::from_raw(&raw)?;
            print!("{}", raw.render());
            return Ok(None);
        }
        run(&cli, &raw).map(Some)
    });
    match result {
        Ok(Some(v)) => {
            emit(&v, cli.pretty);
            ExitCode::SUCCESS
        }
        Ok(None) => ExitCode::SUCCESS,
        Err(e) => {
            let (class, code) = match e.class() {
                ErrorClass::Config => ("invalid_config", 2),
                ErrorClass::Numerical => ("numerical_failure", 3),
                ErrorClass::Inconclusive => ("inconclusive", 4),
            };
            eprintln!("error: {e}");
            emit(&json!({ "error": { "class": class, "message": e.to_string() } }), cli.pretty);
            ExitCode::from(code)
        }
    }
}
