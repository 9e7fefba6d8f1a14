#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use horizon_lab::config::{build_problem, parse_config, to_json, AnalysisConfig};
use horizon_lab::examples::{emit_example, ExampleParams, EXAMPLES};
use horizon_lab::{exit, output, pipeline};

#[derive(Parser)]
#[command(
    name = "horizon-lab",
    version,
    about = "Finite-time blow-up analysis via compactification at infinity"
)]
struct Cli {
    /// Worker threads for independent runs (default: logical cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Full pipeline: equilibria, curves and blow-up runs.
    Analyze {
        config: PathBuf,
        /// Overrides the configured output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Horizon equilibria and curves only.
    Equilibria {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Emits or runs a built-in example.
    Example {
        name: String,
        #[command(flatten)]
        params: ParamArgs,
        /// Print the config instead of running it.
        #[arg(long)]
        emit_config: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Checks a config without running it.
    Validate { config: PathBuf },
    /// Lists the built-in examples.
    ListExamples,
}

#[derive(Args)]
struct ParamArgs {
    #[arg(long, allow_hyphen_values = true)]
    epsilon: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    m: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    beta: Option<f64>,
    #[arg(long = "alpha-ss", allow_hyphen_values = true)]
    alpha_ss: Option<f64>,
    #[arg(long = "n-dim")]
    n_dim: Option<f64>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    q: Option<f64>,
}

impl From<ParamArgs> for ExampleParams {
    fn from(a: ParamArgs) -> Self {
        Self {
            epsilon: a.epsilon,
            m: a.m,
            beta: a.beta,
            alpha_ss: a.alpha_ss,
            n_dim: a.n_dim,
            p: a.p,
            q: a.q,
        }
    }
}

fn init_logging() {
    let env = env_logger::Env::new().filter_or("HORIZON_LAB_LOG", "warn");
    let _ = env_logger::Builder::from_env(env).format_timestamp(None).try_init();
}

fn load(path: &Path) -> Result<AnalysisConfig, String> {
    let bytes = std::fs::read(path).map_err(|e| format!("{}: {e}", path.display()))?;
    parse_config(&bytes).map_err(|e| format!("{}: {e}", path.display()))
}

fn run_analysis(config: &AnalysisConfig, out: Option<PathBuf>, jobs: usize, full: bool) -> i32 {
    let problem = match build_problem(config) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return exit::CONFIG;
        }
    };
    let analysis = if full {
        pipeline::analyze(config, &problem, jobs)
    } else {
        pipeline::Analysis {
            slices: pipeline::horizon_equilibria(config, &problem),
            curves: pipeline::equilibrium_curves(config, &problem),
            runs: vec![],
        }
    };
    let dir = out.unwrap_or_else(|| PathBuf::from(&config.output.directory));
    match output::write_artifacts(&dir, &config.output.formats, &problem, &analysis) {
        Ok(paths) => {
            for p in paths {
                println!("wrote {}", p.display());
            }
        }
        Err(e) => {
            eprintln!("error: writing {}: {e}", dir.display());
            return exit::CONFIG;
        }
    }
    for s in &analysis.slices {
        match &s.equilibria {
            Ok(v) => {
                println!("slice {:?}: {} equilibria", s.slice, v.len());
                for e in v {
                    println!("  {:?} {}", e.coords, e.classification.as_str());
                }
            }
            Err(e) => println!("slice {:?}: {e}", s.slice),
        }
    }
    for r in &analysis.runs {
        match &r.report {
            Ok(b) => println!(
                "run {}: t_max = {} type1_confirmed = {}",
                r.index,
                output::fmt_float(b.t_max),
                b.type1_confirmed
            ),
            Err(e) => println!("run {}: failed: {e}", r.index),
        }
    }
    analysis.exit_code()
}

fn main() -> ExitCode {
    init_logging();
    let cli = Cli::parse();
    let jobs = cli.jobs.unwrap_or(0);
    let code = match cli.command {
        Command::Analyze { config, out } => match load(&config) {
            Ok(c) => run_analysis(&c, out, jobs, true),
            Err(e) => {
                eprintln!("error: {e}");
                exit::CONFIG
            }
        },
        Command::Equilibria { config, out } => match load(&config) {
            Ok(c) => run_analysis(&c, out, jobs, false),
            Err(e) => {
                eprintln!("error: {e}");
                exit::CONFIG
            }
        },
        Command::Example {
            name,
            params,
            emit_config,
            out,
        } => match emit_example(&name, &params.into()) {
            Ok(c) if emit_config => {
                print!("{}", to_json(&c));
                exit::OK
            }
            Ok(c) => run_analysis(&c, out, jobs, true),
            Err(e) => {
                eprintln!("error: {e}");
                exit::CONFIG
            }
        },
        Command::Validate { config } => match load(&config).and_then(|c| {
            build_problem(&c)
                .map(|p| (c, p))
                .map_err(|e| format!("{}: {e}", config.display()))
        }) {
            Ok((c, p)) => {
                println!(
                    "ok: {} variables, alpha = {:?}, k = {}, {} run(s)",
                    p.field.dim(),
                    p.htype.alpha(),
                    p.htype.k(),
                    c.runs.len()
                );
                exit::OK
            }
            Err(e) => {
                eprintln!("error: {e}");
                exit::CONFIG
            }
        },
        Command::ListExamples => {
            for (name, about) in EXAMPLES {
                println!("{name:<12} {about}");
            }
            exit::OK
        }
    };
    ExitCode::from(code as u8)
}
