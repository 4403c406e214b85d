use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hybrid_lchs::parallel::Exec;
use hybrid_lchs::pauli_heat::Boundary;
use hybrid_lchs_cli::commands::{self, RunOptions};
use hybrid_lchs_cli::config::{ExperimentConfig, PrepMethod};
use hybrid_lchs_cli::report;
use hybrid_lchs_cli::CliError;

#[derive(Parser)]
#[command(name = "hybrid-lchs", version, about = "Hybrid oscillator-qubit LCHS experiments")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// TOML experiment configuration; defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory, overriding `output.dir`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Random seed, overriding `seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; 1 runs sequentially.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Omit wall-clock timing so identical inputs give identical reports.
    #[arg(long, global = true)]
    reproducible: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run one benchmark and write report.json.
    Benchmark {
        /// Preparation method, overriding `simulation.prep`.
        #[arg(long, value_parser = parse_prep)]
        prep: Option<PrepMethod>,
    },
    /// Injection sweep over the kernel grids.
    Sweep,
    /// β scan of the discrete-variable quadrature baseline.
    DvBaseline,
    /// Compare compiled gate counts with their closed forms.
    Gatecount {
        #[arg(long, value_parser = parse_boundary)]
        bc: Boundary,
        /// Qubits per axis, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        dims: Vec<usize>,
        #[arg(long, default_value_t = 100)]
        n_t: u64,
        /// Write one compiled Trotter step as JSON lines.
        #[arg(long)]
        gates: Option<PathBuf>,
    },
    /// Compute the kernel coefficients and write coefficients.json.
    Coeffs,
    /// Synthesize the state-preparation circuit and write prep.json.
    Prep {
        #[arg(long, value_parser = parse_prep)]
        method: Option<PrepMethod>,
    },
}

fn parse_boundary(s: &str) -> Result<Boundary, String> {
    s.parse::<Boundary>().map_err(|e| e.to_string())
}

fn parse_prep(s: &str) -> Result<PrepMethod, String> {
    serde_json::from_value(serde_json::Value::String(s.to_string()))
        .map_err(|_| format!("unknown preparation method {s:?}; expected inject, le or snapd"))
}

fn load_config(global: &Global) -> Result<ExperimentConfig, CliError> {
    let mut config = match &global.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(out) = &global.out {
        config.output.dir = out.clone();
    }
    if let Some(seed) = global.seed {
        config.seed = seed;
    }
    Ok(config)
}

fn run_options(global: &Global) -> Result<RunOptions, CliError> {
    let exec = match global.workers {
        Some(0) => return Err(CliError::Validation("--workers must be at least 1".into())),
        Some(1) => Exec::Sequential,
        Some(n) => {
            // A pool that already exists keeps its size; the first call wins.
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            Exec::Parallel
        }
        None => Exec::default(),
    };
    Ok(RunOptions {
        exec,
        reproducible: global.reproducible,
    })
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut config = load_config(&cli.global)?;
    let opts = run_options(&cli.global)?;
    let out = config.output.dir.clone();
    match cli.command {
        Command::Benchmark { prep } => {
            if let Some(p) = prep {
                config.simulation.prep = p;
            }
            let rep = commands::run_benchmark(&config, opts)?;
            report::write_json(&out.join("report.json"), &rep)?;
            if config.output.csv {
                report::write_benchmark_csv(&out.join("benchmark.csv"), &rep)?;
            }
            println!(
                "{}: infidelity {:.3e} (model {:.3e}), p_succ {:.4}, prep fidelity {:.6}, delta_ng {:.3}",
                rep.generator,
                1.0 - rep.fidelity_exact,
                1.0 - rep.fidelity_model,
                rep.success_probability,
                rep.prep.fidelity,
                rep.nongaussianity.delta_ng
            );
        }
        Command::Sweep => {
            let rep = commands::run_sweep(&config, opts)?;
            report::write_json(&out.join("sweep.json"), &rep)?;
            report::write_sweep_csv(&out.join("sweep.csv"), &rep)?;
            report::write_marginals_csv(&out.join("sweep_marginals.csv"), &rep.marginals)?;
            let failed = rep.points.iter().filter(|p| p.error.is_some()).count();
            println!("{} points, {failed} failed", rep.points.len());
            if let Some(best) = rep.best() {
                println!(
                    "best: r {} r' {} beta {} N {} infidelity {:.3e}",
                    best.r,
                    best.r_prime,
                    best.beta,
                    best.n_coeff,
                    best.infidelity.unwrap_or(f64::NAN)
                );
            }
        }
        Command::DvBaseline => {
            let scan = commands::run_dv_baseline(&config, opts)?;
            report::write_json(&out.join("dv_baseline.json"), &scan)?;
            report::write_dv_csv(&out.join("dv_baseline.csv"), &scan)?;
            println!("beta   h1       K        Q  M_DV  m_c  |c|_1   1-F");
            for (i, row) in scan.rows.iter().enumerate() {
                let p = &row.params;
                println!(
                    "{:.2}   {:.5}  {:.5}  {}  {:<4}  {:<3}  {:.4}  {:.2e}{}",
                    p.beta,
                    p.h1,
                    p.k_max,
                    p.q,
                    p.m_dv,
                    p.m_c,
                    row.l1_norm,
                    row.infidelity,
                    if i == scan.best { "  *" } else { "" }
                );
            }
        }
        Command::Gatecount { bc, dims, n_t, gates } => {
            let cmp = commands::run_gatecount(bc, &dims, n_t, gates.as_deref())?;
            print_counts(&cmp);
        }
        Command::Coeffs => {
            config.validate()?;
            let set = commands::coefficients(&config.kernel, opts.exec)?;
            report::write_json(&out.join("coefficients.json"), &set)?;
            println!("n  Re C_n  Im C_n");
            for (n, c) in set.normalized.iter().enumerate() {
                println!("{n}  {:+.10e}  {:+.10e}", c.re, c.im);
            }
        }
        Command::Prep { method } => {
            if let Some(m) = method {
                config.simulation.prep = m;
            }
            let art = commands::run_prep(&config, opts)?;
            report::write_json(&out.join("prep.json"), &art)?;
            println!("preparation fidelity {:.10}", art.summary.fidelity);
        }
    }
    Ok(())
}

fn print_counts(cmp: &hybrid_lchs::trotter_compile::GateCountComparison) {
    let c = &cmp.compiled;
    println!("axis  m  D     cD      CNOT     1q");
    for (i, a) in c.per_axis.iter().enumerate() {
        println!("{i}     {}  {:<5} {:<7} {:<8} {}", a.m, a.displace, a.cond_displace, a.cnot, a.one_qubit);
    }
    println!("total hybrid {} CNOT {} 1q {}", c.hybrid, c.cnot, c.one_qubit);
    println!("closed form {}", if cmp.matches { "matches" } else { "DIFFERS" });
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
