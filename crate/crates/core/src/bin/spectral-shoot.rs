use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::Parser;
use spectral_shoot::cli::{run, Command, RunConfig};
use spectral_shoot::ErrorFamily;

/// Characteristic functions and eigenvalues of 1D Schrödinger operators.
#[derive(Parser, Debug)]
#[command(version)]
struct Args {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Command to run, overriding the config:
    /// eval | eigs | count | oracle-compare | width | order | convergence.
    #[arg(long)]
    command: Option<String>,
    /// Output directory (default: the config's `out`, else `out`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, env = "SPECTRAL_SHOOT_THREADS")]
    threads: Option<usize>,
}

fn exit_code(err: &anyhow::Error) -> u8 {
    let family = err
        .chain()
        .find_map(|e| e.downcast_ref::<spectral_shoot::Error>())
        .map(|e| e.family())
        .unwrap_or(ErrorFamily::Config);
    family.exit_code() as u8
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { 10 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn execute(args: Args) -> anyhow::Result<()> {
    let mut cfg = RunConfig::load(&args.config).with_context(|| format!("reading {}", args.config.display()))?;
    if let Some(name) = &args.command {
        cfg.command = Some(Command::parse(name)?);
    }
    if args.threads.is_some() {
        cfg.threads = args.threads;
    }
    let out = args
        .out
        .or_else(|| cfg.out.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    cfg.validate()?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cfg.threads {
        pool = pool.num_threads(n);
    }
    let pool = pool.build().context("building the thread pool")?;
    let summary = pool.install(|| run(&cfg, &out))?;
    println!(
        "{}: wrote {} files to {}",
        summary.command.name(),
        summary.outputs.len(),
        out.display()
    );
    println!("{}", serde_json::to_string(&summary.certificates)?);
    Ok(())
}
