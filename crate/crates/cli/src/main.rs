#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod output;

use clap::{Args, Parser, Subcommand};
use config::{Command, RunConfig};
use output::{Output, PrepareError};
use serde_json::json;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "jostkit", version, about = "Scattering data and dispersive kernels for radial Schrodinger operators")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Regular and Jost solutions on a (k, x) grid
    Solve(RunArgs),
    /// Jost function, F, Im m, bound states and threshold status on a k grid
    Scatter(RunArgs),
    /// Spectral density and discrete spectrum on a lambda grid
    Spectral(RunArgs),
    /// Kernel of e^{-itH} P_c on (x, y) grids, optionally a propagated test state
    Propagate(RunArgs),
    /// Decay certificate: sup |K(t)| over the grid against t
    Certify(RunArgs),
    /// Fit-then-assert checks of the solution and Jost function estimates
    Verify(RunArgs),
    /// Potential presets and their reference oracles
    Presets {
        #[arg(long)]
        json: bool,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// overrides output_dir of the config (default "out")
    #[arg(long)]
    out: Option<PathBuf>,
}

pub enum Failure {
    Config(String),
    Core(jostkit::Error),
    Io(String),
    Bounds(String),
}

impl From<jostkit::Error> for Failure {
    fn from(e: jostkit::Error) -> Self {
        Failure::Core(e)
    }
}

impl Failure {
    fn code_and_kind(&self) -> (u8, &'static str) {
        use jostkit::Error as E;
        match self {
            Failure::Config(_) => (2, "config_error"),
            Failure::Core(E::Invalid(_) | E::Domain(_)) => (2, "config_error"),
            Failure::Core(E::Hypothesis(_)) => (3, "hypothesis_violation"),
            Failure::Core(E::Resonance(_)) => (4, "resonance_refusal"),
            Failure::Core(_) => (5, "non_convergence"),
            Failure::Io(_) => (1, "io_error"),
            Failure::Bounds(_) => (1, "bound_check_failed"),
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Config(m) | Failure::Io(m) | Failure::Bounds(m) => m.clone(),
            Failure::Core(e) => e.to_string(),
        }
    }
}

fn diagnose(command: &str, f: &Failure) -> ExitCode {
    let (code, kind) = f.code_and_kind();
    let d = json!({"error": kind, "exit_code": code, "command": command, "message": f.message()});
    eprintln!("{d}");
    ExitCode::from(code)
}

const PRESETS: &[(&str, &str, &str)] = &[
    ("free", "q = 0", "F = 1; closed-form free kernels"),
    ("well(v0,a,b)", "q = -v0 on [a,b], 0 <= a < b", "matching oracle (interior phi, exterior closed form) for l = 0, 1; transcendental bound-state equation for l = 0, a = 0"),
    ("expdecay(v0,a)", "q = v0 exp(-x/a)", "reference ODE integrator; evaluated up to a truncation radius"),
    ("power(c,p,b)", "q = c x^-p on (0,b]", "hypothesis probe: p >= 1 makes int_0^1 |q| diverge"),
    ("tabulated(file)", "two-column CSV x,q(x) with strictly increasing x; cubic Hermite, 0 beyond the last sample", "reference ODE integrator"),
];

fn presets(as_json: bool) {
    if as_json {
        let v: Vec<_> = PRESETS.iter().map(|(n, q, o)| json!({"name": n, "potential": q, "reference": o})).collect();
        println!("{}", serde_json::to_string_pretty(&v).unwrap());
        return;
    }
    for (n, q, o) in PRESETS {
        println!("{n:<16} {q}\n{:<16} reference: {o}", "");
    }
}

fn execute(command: Command, args: &RunArgs) -> ExitCode {
    let name = command.name();
    let text = match std::fs::read_to_string(&args.config) {
        Ok(t) => t,
        Err(e) => return diagnose(name, &Failure::Config(format!("cannot read {}: {e}", args.config.display()))),
    };
    let cfg = match RunConfig::parse(&text) {
        Ok(c) => c,
        Err(e) => return diagnose(name, &Failure::Config(e.0)),
    };
    if let Err(e) = cfg.validate(command) {
        return diagnose(name, &Failure::Config(e.0));
    }
    let base = args.config.parent().map(PathBuf::from).unwrap_or_default();
    let p = match cfg.problem_spec(&base) {
        Ok(p) => p,
        Err(e) => return diagnose(name, &Failure::Config(e.0)),
    };
    let dir = args.out.clone().or_else(|| cfg.output_dir.clone()).unwrap_or_else(|| PathBuf::from("out"));
    let mut out = match Output::prepare(&dir) {
        Ok(o) => o,
        Err(PrepareError::Foreign(names)) => {
            let msg = format!("{} holds files from elsewhere ({}); choose an empty directory", dir.display(), names.join(", "));
            return diagnose(name, &Failure::Config(msg));
        }
        Err(PrepareError::Io(m)) => return diagnose(name, &Failure::Io(m)),
    };
    let result = commands::run(command, &cfg, &p, &mut out);
    // the manifest lists whatever was written, also after a failure
    let manifest = out.finish(name);
    match (result, manifest) {
        (Err(f), _) => diagnose(name, &f),
        (Ok(()), Err(m)) => diagnose(name, &Failure::Io(m)),
        (Ok(()), Ok(m)) => {
            for f in &m.files {
                println!("{}  {}", f.sha256, dir.join(&f.path).display());
            }
            ExitCode::SUCCESS
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.render().to_string();
            eprintln!("{}", json!({"error": "config_error", "exit_code": 2, "command": null, "message": msg.trim()}));
            return ExitCode::from(2);
        }
    };
    let (command, args) = match &cli.command {
        Sub::Solve(a) => (Command::Solve, a),
        Sub::Scatter(a) => (Command::Scatter, a),
        Sub::Spectral(a) => (Command::Spectral, a),
        Sub::Propagate(a) => (Command::Propagate, a),
        Sub::Certify(a) => (Command::Certify, a),
        Sub::Verify(a) => (Command::Verify, a),
        Sub::Presets { json } => {
            presets(*json);
            return ExitCode::SUCCESS;
        }
    };
    execute(command, args)
}
