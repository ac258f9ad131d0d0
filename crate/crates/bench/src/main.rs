use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hscale_bench::config::{Experiment, ProblemInstance};
use hscale_bench::runner::write_tune_report;
use hscale_bench::selftest::{check_problem, run_selftest};
use hscale_bench::{run_experiment, tune_grid, BenchError};

#[derive(Parser)]
#[command(name = "hscale", version, about = "Scaled gradient descent experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every method and seed in a config, writing traces and summary.csv
    Run { config: PathBuf },
    /// Grid-tune the step size of the method named in the config's [tune] section
    Tune { config: PathBuf },
    /// Validate analytic gradients and HVPs of a named problem or a config's problem
    Check {
        target: String,
        #[arg(long, default_value_t = 1e-5)]
        tol: f64,
    },
    /// Run the fast invariant suites
    Selftest,
}

fn code(c: i32) -> ExitCode {
    ExitCode::from(c as u8)
}

fn report(e: &BenchError) -> ExitCode {
    eprintln!("error: {e}");
    code(e.exit_code())
}

/// Any failure to obtain a config, including an unreadable file, is a config error.
fn load(path: &Path) -> Result<Experiment, ExitCode> {
    Experiment::load(path).map_err(|e| {
        eprintln!("error: {e}");
        code(1)
    })
}

fn cmd_run(path: &Path) -> ExitCode {
    let exp = match load(path) {
        Ok(e) => e,
        Err(c) => return c,
    };
    let rep = match run_experiment(&exp) {
        Ok(r) => r,
        Err(e) => return report(&e),
    };
    for row in &rep.summary {
        println!(
            "{:<20} seed {:<4} {:<17} f = {:<24.16e} |g| = {:<10.3e} iters = {:<7} units = {}",
            row.method, row.seed, row.status.as_str(), row.final_f, row.final_gnorm, row.iterations, row.units
        );
    }
    println!("summary written to {}", rep.summary_path.display());
    let mut failed = false;
    for f in rep.failures() {
        eprintln!("run {} seed {} failed: {}", f.label, f.seed, f.error.as_deref().unwrap_or(""));
        failed = true;
    }
    if failed {
        code(2)
    } else {
        ExitCode::SUCCESS
    }
}

fn cmd_tune(path: &Path) -> ExitCode {
    let exp = match load(path) {
        Ok(e) => e,
        Err(c) => return c,
    };
    let Some(spec) = exp.tune.clone() else {
        return report(&BenchError::Config { path: "tune".into(), message: "missing [tune] section".into() });
    };
    let rep = match tune_grid(&exp, &spec.method, &spec.grid) {
        Ok(r) => r,
        Err(e) => return report(&e),
    };
    for p in &rep.points {
        println!("{:<12e} {:<17} f = {:.16e} units = {}", p.value, p.status.as_str(), p.final_f, p.units);
    }
    println!("selected {} = {:e} (f = {:.16e}); tuning spent {} units", rep.method, rep.best, rep.best_f, rep.total_units);
    if let Err(e) = std::fs::create_dir_all(&exp.output_dir) {
        return report(&BenchError::Io { path: exp.output_dir.clone(), message: e.to_string() });
    }
    match write_tune_report(&rep, &exp.output_dir.join(format!("tune_{}.csv", rep.method))) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => report(&e),
    }
}

fn named_problem(name: &str) -> Option<ProblemInstance> {
    let toml = match name {
        "quadratic" => "kind = \"quadratic\"\nd = 10\nmu = 0.1\nl = 10.0",
        "logistic" => "kind = \"logistic-synthetic\"\nn = 200\nd = 10",
        "quadratic-sum" => "kind = \"quadratic-sum\"\ncomponents = 10\nd = 5",
        "quartic1d" => "kind = \"quartic1d\"",
        "rosenbrock2d" => "kind = \"rosenbrock2d\"",
        _ => return None,
    };
    let text = format!("[problem]\n{toml}\n[[method]]\nid = \"scaled\"\n");
    Experiment::parse(&text, Path::new(".")).ok().map(|e| e.problem)
}

fn cmd_check(target: &str, tol: f64) -> ExitCode {
    let problem = match named_problem(target) {
        Some(p) => p,
        None => match Experiment::load(Path::new(target)) {
            Ok(e) => e.problem,
            Err(BenchError::Io { .. }) => {
                return report(&BenchError::Config {
                    path: "target".into(),
                    message: format!(
                        "`{target}` is neither a config file nor one of quadratic, logistic, quadratic-sum, quartic1d, rosenbrock2d"
                    ),
                })
            }
            Err(e) => return report(&e),
        },
    };
    let mut ok = true;
    for (name, r) in check_problem(&problem, tol) {
        println!(
            "{} {:<20} max rel dev {:.3e} (coordinate {})",
            if r.passed { "PASS" } else { "FAIL" },
            name,
            r.max_rel_dev,
            r.worst_index
        );
        ok &= r.passed;
    }
    if ok {
        ExitCode::SUCCESS
    } else {
        code(2)
    }
}

fn cmd_selftest() -> ExitCode {
    let results = run_selftest();
    for r in &results {
        println!("{} {:<26} {}", if r.passed { "PASS" } else { "FAIL" }, r.name, r.detail);
    }
    if results.iter().all(|r| r.passed) {
        ExitCode::SUCCESS
    } else {
        code(2)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { code(1) } else { ExitCode::SUCCESS };
        }
    };
    match cli.command {
        Command::Run { config } => cmd_run(&config),
        Command::Tune { config } => cmd_tune(&config),
        Command::Check { target, tol } => cmd_check(&target, tol),
        Command::Selftest => cmd_selftest(),
    }
}
