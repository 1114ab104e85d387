use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};

use super::checks::run_oracles;
use super::config::{ExperimentConfig, Format};
use super::report::ExperimentReport;
use super::runners::run;

#[derive(Parser, Debug)]
#[command(name = "bfl", version, about = "Two-weight bounds for the strong fractional integral on product grids")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Override the configured base seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Override the coarsest cells per axis: `N` or `N1xN2`.
    #[arg(long, global = true)]
    grid: Option<String>,

    /// Write the report here instead of the configured output or stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[arg(long, global = true, value_enum)]
    format: Option<FormatArg>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the experiment described by a config file.
    Run { config: PathBuf },
    /// Cross-check fast paths against brute force on the bundled fixtures.
    Oracle { module: String },
    /// Recompute the summary of a CSV report and compare with the embedded one.
    Report { path: PathBuf },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

fn parse_grid(s: &str) -> Result<[usize; 2]> {
    let parse = |t: &str| {
        t.trim()
            .parse::<usize>()
            .map_err(|_| Error::Config(format!("bad --grid value `{s}`")))
    };
    match s.split_once('x') {
        Some((a, b)) => Ok([parse(a)?, parse(b)?]),
        None => {
            let n = parse(s)?;
            Ok([n, n])
        }
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) => 2,
        _ => 1,
    }
}

fn thread_pool() -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var("BFL_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("BFL_THREADS must be a positive integer, got `{v}`")))?;
        if n == 0 {
            return Err(Error::Config("BFL_THREADS must be a positive integer, got `0`".into()));
        }
        builder = builder.num_threads(n);
    }
    builder.build().map_err(|e| Error::Config(e.to_string()))
}

fn run_command(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { config } => {
            let mut cfg = ExperimentConfig::from_file(&config)?;
            if let Some(seed) = cli.seed {
                cfg.set_seed(seed);
            }
            if let Some(g) = &cli.grid {
                cfg.set_cells(parse_grid(g)?)?;
            }
            if let Some(f) = cli.format {
                cfg.set_format(match f {
                    FormatArg::Csv => Format::Csv,
                    FormatArg::Json => Format::Json,
                });
            }
            let report = thread_pool()?.install(|| run(&cfg))?;
            let text = match cfg.format {
                Format::Csv => report.to_csv(),
                Format::Json => report.to_json(),
            };
            match cli.out.or(cfg.output) {
                Some(path) => std::fs::write(&path, text)?,
                None => print!("{text}"),
            }
            Ok(())
        }
        Command::Oracle { module } => {
            let checks = thread_pool()?.install(|| run_oracles(&module))?;
            for c in &checks {
                println!("{}: {}/{} passed", c.name, c.passed, c.total);
            }
            match checks.iter().find(|c| !c.ok()) {
                Some(c) => Err(Error::Assertion(format!("oracle `{}` failed", c.name))),
                None => Ok(()),
            }
        }
        Command::Report { path } => {
            let text = std::fs::read_to_string(&path)
                .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
            let report = ExperimentReport::parse_csv(&text)?;
            report.verify_summary().map_err(|e| Error::Assertion(e.to_string()))?;
            for (k, v) in &report.summary {
                println!("{k},{v}");
            }
            Ok(())
        }
    }
}

/// Entry point shared by the binary and the tests; returns the process exit code.
pub fn cli_main(argv: Vec<String>) -> i32 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run_command(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("bfl: {e}");
            exit_code(&e)
        }
    }
}
