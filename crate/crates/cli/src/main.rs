//! `ctrap`: weight tables, convergence studies and structure checks.
//!
//! Exit codes: 0 success, 1 gate or property failure (artifacts are still
//! written), 2 usage error.

mod config;

use clap::{Parser, Subcommand, ValueEnum};
use config::{load, sha256_hex, Loaded, UsageError};
use ctrap::verify::{run_all, Fault, VerifyScope};
use ctrap::{
    builtin_phi, compute_weights, enumerate_grid, run_convergence_with, Error, ReferenceMollifier, SolveOptions,
    WeightTable,
};
use log::{error, info, warn};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

#[derive(Parser)]
#[command(name = "ctrap", version, about = "Corrected trapezoidal rules for weakly singular integrals")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute a weight table; writes weights.json and weights.csv.
    Weights { config: PathBuf },
    /// Run the corrected rule over a mesh ladder; writes converge.csv and converge.json.
    Converge {
        config: PathBuf,
        /// Append h = 2^-7 to the ladder.
        #[arg(long)]
        fine: bool,
    },
    /// Run the structural and combinatorial property suites; writes verify.json.
    Verify {
        #[arg(long, default_value_t = 3)]
        n_max: usize,
        #[arg(long, default_value_t = 3)]
        p_max: usize,
        /// Symmetry indices to cover.
        #[arg(long, value_delimiter = ',', default_value = "0,1,2")]
        kappa: Vec<usize>,
        #[arg(long, value_enum, default_value_t = FaultArg::None)]
        inject_fault: FaultArg,
        #[arg(long, default_value = ".")]
        output: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum FaultArg {
    None,
    SignOffByOne,
}

enum Failure {
    Usage(String),
    Check(String),
}

impl From<UsageError> for Failure {
    fn from(e: UsageError) -> Self {
        Failure::Usage(e.0)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Check(e.to_string())
    }
}

type Outcome = Result<bool, Failure>;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_target(false)
        .init();
    let cli = Cli::parse();
    info!("ctrap {}", env!("CARGO_PKG_VERSION"));
    let outcome = match cli.command {
        Command::Weights { config } => cmd_weights(&config),
        Command::Converge { config, fine } => cmd_converge(&config, fine),
        Command::Verify { n_max, p_max, kappa, inject_fault, output } => {
            let fault = match inject_fault {
                FaultArg::None => Fault::None,
                FaultArg::SignOffByOne => Fault::SignOffByOne,
            };
            let scope = VerifyScope { n_max, p_max, kappas: kappa, fault, ..Default::default() };
            cmd_verify(scope, &output)
        }
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Check(msg)) => {
            error!("{msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            error!("{msg}");
            ExitCode::from(2)
        }
    }
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<(), Failure> {
    std::fs::create_dir_all(dir).map_err(|e| Failure::Usage(format!("cannot create {}: {e}", dir.display())))?;
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))?;
    info!("wrote {}", path.display());
    Ok(())
}

fn solve_options(loaded: &Loaded) -> SolveOptions {
    let c = &loaded.config;
    let mut opts = SolveOptions { h0: c.h_base, force: c.force, ..Default::default() };
    opts.mollifier = c.mollifier_m.map(ReferenceMollifier::new);
    if let Some(g) = c.gate {
        opts.gate = g;
    }
    opts
}

fn generate_table(loaded: &Loaded) -> Result<WeightTable, Failure> {
    let c = &loaded.config;
    let kernel = c.build_kernel()?;
    let grid = enumerate_grid(c.n, c.p, kernel.kappa).map_err(|e| Failure::Usage(e.to_string()))?;
    let opts = solve_options(loaded);
    let levels: Vec<f64> = (0..4).map(|k| opts.h0 / (1u32 << k) as f64).collect();
    info!(
        "kernel {} (delta {}, kappa {}), p = {}, {} weights, mollifier m = {}, levels {:?}",
        kernel.id,
        kernel.delta,
        kernel.kappa,
        c.p,
        grid.len(),
        opts.mollifier_for(c.p, kernel.kappa).m,
        levels
    );
    let start = Instant::now();
    let table = compute_weights(&kernel, &grid, &opts).map_err(|e| match e {
        Error::EmptyGrid { .. } | Error::OrderBelowSymmetry { .. } | Error::IllConditioned(_) | Error::AdmissibilityViolation(_) => {
            Failure::Usage(e.to_string())
        }
        other => Failure::Check(other.to_string()),
    })?;
    info!("weights computed in {:.2} s", start.elapsed().as_secs_f64());
    Ok(table)
}

fn cmd_weights(path: &Path) -> Outcome {
    let loaded = load(path)?;
    info!("config {} sha256 {}", path.display(), loaded.hash);
    let table = generate_table(&loaded)?;
    let out = loaded.base_dir.join(&loaded.config.output);
    write(&out, "weights.json", &table.to_json())?;
    write(&out, "weights.csv", &table.to_csv())?;
    for (eta, w) in table.grid.points.iter().zip(&table.weights) {
        println!("{eta}  {w:.17}");
    }
    println!("est_error {:e} (gate {:e}), residual {:e}", table.est_error, table.gate, table.residual);
    if table.gate_passed() {
        Ok(true)
    } else {
        warn!(
            "extrapolation gate missed: est_error {:e} > {:e}; try a smaller h_base",
            table.est_error, table.gate
        );
        Ok(false)
    }
}

fn cmd_converge(path: &Path, fine: bool) -> Outcome {
    let loaded = load(path)?;
    info!("config {} sha256 {}", path.display(), loaded.hash);
    let c = &loaded.config;
    let kernel = c.build_kernel()?;
    let exact = c.reference_value(&kernel)?;
    let table = match &c.table {
        Some(t) => {
            let file = loaded.base_dir.join(t);
            let text = std::fs::read_to_string(&file)
                .map_err(|e| Failure::Usage(format!("missing weight table {}: {e}", file.display())))?;
            WeightTable::from_json(&text).map_err(|e| Failure::Usage(format!("{}: {e}", file.display())))?
        }
        None => generate_table(&loaded)?,
    };
    if !table.gate_passed() {
        warn!("weight table est_error {:e} is above its gate {:e}", table.est_error, table.gate);
    }
    let ladder = c.ladder(fine);
    info!("h ladder {ladder:?}");
    let start = Instant::now();
    let cap = c.max_seconds;
    let report = run_convergence_with(
        &builtin_phi(c.n),
        &kernel,
        &table,
        exact,
        &ladder,
        c.slope_tolerance.unwrap_or(0.25),
        |pt| {
            info!("h = {:e}: |Q - I| = {:.3e} in {:.2} s", pt.h, pt.abs_error, pt.seconds);
            let elapsed = start.elapsed().as_secs_f64();
            match cap {
                Some(cap) if elapsed > cap => Err(Error::RuntimeBudgetExceeded { elapsed, cap }),
                _ => Ok(()),
            }
        },
    )?;
    let out = loaded.base_dir.join(&c.output);
    write(&out, "converge.csv", &report.to_csv())?;
    write(&out, "converge.json", &serde_json::to_string_pretty(&report).expect("report serializes"))?;
    for p in report.points.iter().filter(|p| p.below_floor) {
        println!("h = {:e} below roundoff floor {:.1e}; excluded from the fit", p.h, report.floor);
    }
    match report.slope {
        Some(s) => println!(
            "slope {s:.3}, theory {} (tolerance {}), monotone {}: {}",
            report.theory,
            report.tolerance,
            report.monotone,
            if report.pass { "pass" } else { "fail" }
        ),
        None => println!("fewer than two points above the roundoff floor; no slope"),
    }
    Ok(report.pass)
}

fn cmd_verify(scope: VerifyScope, output: &Path) -> Outcome {
    let scope_json = serde_json::to_string(&scope).expect("scope serializes");
    info!("scope {scope_json} sha256 {}", sha256_hex(scope_json.as_bytes()));
    let report = run_all(&scope)?;
    write(output, "verify.json", &report.to_json())?;
    for s in &report.suites {
        println!("{:<26} {:>5} cases  {}  {:.2} s", s.name, s.cases, if s.passed { "pass" } else { "FAIL" }, s.seconds);
        for f in s.failures.iter().take(5) {
            println!("    {f}");
        }
    }
    Ok(report.passed)
}
