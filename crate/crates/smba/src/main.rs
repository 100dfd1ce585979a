use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use smba::bench::{parse_seed_range, run_bench, schedule_cells, BenchSpec};
use smba::clock::StdClock;
use smba::config::load_config;
use smba::generator::generate_nsdp;
use smba::problem_file::ProblemFile;
use smba::report::ReportDoc;
use smba::selftest::run_selftest;
use smba::trace::write_trace;
use smba::AppError;
use smba_core::solver::{run_with_clock, SolveStatus, SolverConfig};

/// Exit code for IO, parse and usage errors.
const EXIT_INPUT: u8 = 1;
/// Exit code when a solve ends in any status other than `Converged`.
const EXIT_SOLVER: u8 = 2;

#[derive(Parser)]
#[command(name = "smba", version, about = "Smoothing moving balls approximation solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random l1-regularized NSDP instance
    GenNsdp {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve one problem file
    Solve {
        #[arg(long)]
        problem: PathBuf,
        /// Solver configuration (JSON); defaults apply when absent
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(long)]
        report: Option<PathBuf>,
        /// Overrides the configured tolerance
        #[arg(long)]
        eps: Option<f64>,
    },
    /// Solve generated instances over seeds and schedule parameters
    Bench {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        /// Inclusive range `S1..S2` or a single seed
        #[arg(long)]
        seeds: String,
        #[arg(long, value_delimiter = ',', default_value = "0.9")]
        rbar: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "3")]
        sbar: Vec<f64>,
        /// Zip the rbar and sbar lists instead of taking their product
        #[arg(long)]
        paired: bool,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the built-in invariant checks
    Selftest {
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn base_config(config: Option<&PathBuf>, eps: Option<f64>) -> Result<SolverConfig, AppError> {
    let mut cfg = match config {
        Some(path) => load_config(path)?,
        None => SolverConfig::default(),
    };
    if let Some(eps) = eps {
        cfg.eps = eps;
    }
    cfg.validate()
        .map_err(|e| AppError::Invalid(format!("solver configuration: {e}")))?;
    Ok(cfg)
}

fn execute(cmd: Command) -> Result<u8, AppError> {
    match cmd {
        Command::GenNsdp { n, m, seed, out } => {
            generate_nsdp(n, m, seed)?.to_file().save(&out)?;
            Ok(0)
        }
        Command::Solve {
            problem,
            config,
            trace,
            report,
            eps,
        } => {
            let file = ProblemFile::load(&problem)?;
            let cfg = base_config(config.as_ref(), eps)?;
            let prob = file.to_problem()?;
            let x0 = file.initial_point();
            let result = run_with_clock(&prob, &cfg, &x0, &StdClock::start())?;
            if let Some(path) = &trace {
                write_trace(&result.trace, path)?;
            }
            let doc = ReportDoc::new(&prob, &result)?;
            if let Some(path) = &report {
                doc.save(path)?;
            }
            println!(
                "{:?}: {} iterations, psi = {}, {:.3} s",
                result.status, result.iterations, result.psi, result.wall_time
            );
            if result.status == SolveStatus::Converged {
                Ok(0)
            } else {
                eprintln!(
                    "smba: solve ended with {:?}: {}",
                    result.status,
                    result.diagnostic.as_deref().unwrap_or("no diagnostic")
                );
                Ok(EXIT_SOLVER)
            }
        }
        Command::Bench {
            n,
            m,
            seeds,
            rbar,
            sbar,
            paired,
            eps,
            config,
            out,
        } => {
            let spec = BenchSpec {
                n,
                m,
                seeds: parse_seed_range(&seeds)?,
                cells: schedule_cells(&rbar, &sbar, paired)?,
                base: base_config(config.as_ref(), eps)?,
                out,
            };
            let rows = run_bench(&spec)?;
            let failed = rows.iter().filter(|r| !r.converged()).count();
            println!(
                "{} cells, {failed} not converged; summary in {}",
                rows.len(),
                spec.out.join("summary.csv").display()
            );
            if failed > 0 {
                eprintln!("smba: {failed} bench cells did not converge");
                Ok(EXIT_SOLVER)
            } else {
                Ok(0)
            }
        }
        Command::Selftest { seed } => {
            let results = run_selftest(seed)?;
            let mut failed = 0;
            for r in &results {
                println!("{} {}: {}", if r.passed { "PASS" } else { "FAIL" }, r.name, r.detail);
                failed += usize::from(!r.passed);
            }
            if failed > 0 {
                eprintln!("smba: {failed} self-checks failed");
                Ok(EXIT_SOLVER)
            } else {
                Ok(0)
            }
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("smba: error: {e}");
            let code = match e {
                AppError::Solver(_) => EXIT_SOLVER,
                _ => EXIT_INPUT,
            };
            ExitCode::from(code)
        }
    }
}
