mod commands;
mod error;
mod files;
mod source;

use std::process::ExitCode;

use clap::{Parser, Subcommand};
use mssp::causality::OracleOptions;

use commands::{MethodArg, SolveSettings};
use error::{read_file, write_file, CliError, Result};
use files::{problem_to_file, to_json, values_csv, Loaded, ResultFile};
use source::{parse_cost, SourceArgs};

#[derive(Parser)]
#[command(
    name = "mssp",
    version,
    about = "Multimode stochastic shortest path solver"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Clone)]
struct SolverFlags {
    /// Value iteration stopping tolerance.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,

    #[arg(long, default_value_t = 100_000)]
    max_iter: usize,

    /// Dial bucket width; defaults to the certified width.
    #[arg(long)]
    bucket_width: Option<f64>,

    /// Seed for the certificate's sampling.
    #[arg(long, default_value_t = 0x00c0_ffee)]
    seed: u64,
}

impl SolverFlags {
    fn settings(&self) -> Result<SolveSettings> {
        if !(self.tol > 0.0) {
            return Err(CliError::Usage("--tol must be positive".into()));
        }
        Ok(SolveSettings {
            tol: self.tol,
            max_iter: self.max_iter,
            bucket_width: self.bucket_width,
            seed: self.seed,
        })
    }
}

#[derive(Subcommand)]
enum Command {
    /// Write a problem file.
    Generate {
        #[command(flatten)]
        source: SourceArgs,
        /// Output path; stdout when absent.
        #[arg(long)]
        out: Option<String>,
    },
    /// Solve a problem and check the result with one application of T.
    Solve {
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        solver: SolverFlags,
        #[arg(long, value_enum, default_value_t = MethodArg::Auto)]
        method: MethodArg,
        #[arg(long, default_value_t = 1e-8)]
        verify_tol: f64,
        /// Write the result JSON here.
        #[arg(long)]
        output: Option<String>,
        /// Print the result JSON instead of the summary.
        #[arg(long)]
        json: bool,
        /// Write node values (with coordinates) as CSV.
        #[arg(long, value_name = "PATH")]
        emit_values: Option<String>,
        /// Fail with exit code 4 unless the problem is certified causal.
        #[arg(long)]
        require_certificate: bool,
        /// Store the solver's wall time in the result file.
        #[arg(long)]
        record_time: bool,
    },
    /// Certify per-mode causality and report the problem verdict.
    Certify {
        #[command(flatten)]
        source: SourceArgs,
        #[arg(long, default_value_t = 0x00c0_ffee)]
        seed: u64,
        #[arg(long)]
        json: bool,
        /// List every mode, not just the uncertified ones.
        #[arg(long)]
        verbose: bool,
    },
    /// Run several solvers on one problem and compare their values.
    Compare {
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        solver: SolverFlags,
        #[arg(
            long,
            value_enum,
            value_delimiter = ',',
            default_value = "vi,dijkstra,sweep"
        )]
        methods: Vec<MethodArg>,
        #[arg(long)]
        json: bool,
    },
    /// Search for violations of δ-causality by sampling W.
    Oracle {
        #[command(flatten)]
        source: SourceArgs,
        /// Number of successors for a bare --cost without a problem source.
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long)]
        node: Option<usize>,
        #[arg(long, requires = "node")]
        mode: Option<usize>,
        #[arg(long, default_value_t = 0.0)]
        delta: f64,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 0x5eed)]
        oracle_seed: u64,
        #[arg(long, default_value_t = 10.0)]
        w_max: f64,
        #[arg(long)]
        json: bool,
    },
    /// Check stored values against a problem.
    Verify {
        #[command(flatten)]
        source: SourceArgs,
        /// Result JSON from `solve --output`.
        #[arg(long)]
        values: String,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
}

fn emit(out: Option<&str>, text: &str) -> Result<()> {
    match out {
        Some(p) => write_file(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn has_source(s: &SourceArgs) -> bool {
    s.problem.is_some()
        || s.generate.is_some()
        || s.eikonal_grid.is_some()
        || s.mesh.is_some()
        || s.hexagon.is_some()
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Generate { source, out } => {
            let built = source.build()?;
            emit(out.as_deref(), &to_json(&problem_to_file(&built.problem)?))?;
            Ok(0)
        }
        Command::Solve {
            source,
            solver,
            method,
            verify_tol,
            output,
            json,
            emit_values,
            require_certificate,
            record_time,
        } => {
            let built = source.build()?;
            let settings = solver.settings()?;
            let (mut outcome, cert) = commands::solve(
                &built.problem,
                method,
                &settings,
                verify_tol,
                require_certificate,
            )?;
            if record_time {
                outcome.result.wall_time_s = Some(outcome.seconds);
            }
            if let Some(p) = &output {
                write_file(p, &to_json(&outcome.result))?;
            }
            if let Some(p) = &emit_values {
                write_file(p, &values_csv(&built.problem, &outcome.result.values()))?;
            }
            if json {
                commands::print_json(&outcome.result);
            } else {
                print!("{}", commands::solve_report(&built.problem, &outcome));
            }
            if !outcome.result.verification.pass {
                return Ok(2);
            }
            if require_certificate && !cert.is_some_and(|c| c.verdict.label_setting_ok()) {
                eprintln!("error: problem is not certified causal");
                return Ok(4);
            }
            Ok(0)
        }
        Command::Certify {
            source,
            seed,
            json,
            verbose,
        } => {
            let built = source.build()?;
            let cert = commands::certify(&built.problem, seed);
            let report = commands::certify_report(cert.as_ref());
            if json {
                commands::print_json(&report);
            } else {
                let discrete = matches!(built.problem, Loaded::Discrete(_));
                print!(
                    "{}",
                    commands::certify_text(&report, discrete, built.spacing, verbose)
                );
            }
            Ok(if report.verdict == "unknown" { 4 } else { 0 })
        }
        Command::Compare {
            source,
            solver,
            methods,
            json,
        } => {
            let built = source.build()?;
            let report = commands::compare(&built.problem, &methods, &solver.settings()?)?;
            if json {
                commands::print_json(&report);
            } else {
                print!("{}", commands::compare_text(&report));
            }
            Ok(0)
        }
        Command::Oracle {
            source,
            dim,
            node,
            mode,
            delta,
            samples,
            oracle_seed,
            w_max,
            json,
        } => {
            let costs = if has_source(&source) {
                let built = source.build()?;
                let Loaded::Mssp(p) = &built.problem else {
                    return Err(CliError::Usage(
                        "the oracle needs a problem with mode costs".into(),
                    ));
                };
                if let Some(n) = node {
                    if n >= p.node_count() {
                        return Err(CliError::Usage(format!("node {n} out of range")));
                    }
                }
                p.iter_modes()
                    .filter(|&(i, k, _)| node.is_none_or(|n| n == i) && mode.is_none_or(|m| m == k))
                    .map(|(i, k, m)| (Some(i), Some(k), m.cost.clone()))
                    .collect::<Vec<_>>()
            } else {
                let spec = source.cost.as_deref().ok_or_else(|| {
                    CliError::Usage("give --cost with --dim, or a problem source".into())
                })?;
                let dim = dim.ok_or_else(|| {
                    CliError::Usage("--cost without a problem needs --dim".into())
                })?;
                vec![(None, None, parse_cost(spec, dim)?)]
            };
            if costs.is_empty() {
                return Err(CliError::Usage("no modes selected".into()));
            }
            let opts = OracleOptions {
                samples,
                w_max,
                seed: oracle_seed,
                ..Default::default()
            };
            let report = commands::oracle(&costs, delta, &opts);
            if json {
                commands::print_json(&report);
            } else {
                print!("{}", commands::oracle_text(&report));
            }
            Ok(if report.violation.is_some() { 2 } else { 0 })
        }
        Command::Verify {
            source,
            values,
            tol,
        } => {
            let built = source.build()?;
            let stored = ResultFile::from_text(&values, &read_file(&values)?)?;
            let report = commands::verify(&built.problem, &stored.values(), tol)?;
            println!(
                "{} (max residual {:.3e}, tol {tol:e})",
                if report.pass { "PASS" } else { "FAIL" },
                report.max_residual
            );
            if !report.infinite_inside_reachable.is_empty() {
                println!(
                    "nodes left at +inf although the target is reachable: {:?}",
                    report.infinite_inside_reachable
                );
            }
            Ok(if report.pass { 0 } else { 2 })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
