use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use normschur::bench::{bench_accuracy, bench_time, write_csv, AccuracyPlan, Solver, TimingPlan};
use normschur::genmat::{generate, EnsembleSpec, MatrixClass, UNIT_ROUNDOFF};
use normschur::matcore::{
    frobenius_norm, offschur, orthogonality_residual, reconstruction_residual,
};
use normschur::report::Report;
use normschur::{decompose, Config, DenseMatrix, Error};

const EXIT_INPUT: u8 = 1;
const EXIT_NOT_CONVERGED: u8 = 2;

#[derive(Parser)]
#[command(
    name = "normschur",
    version,
    about = "Real Schur decomposition of real normal matrices"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Relative stopping tolerance (default 10 times the unit roundoff).
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl Common {
    fn rho(&self) -> f64 {
        self.rho.unwrap_or(10.0 * UNIT_ROUNDOFF)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Decompose a matrix file and write S, Q and a report.
    Decompose {
        input: PathBuf,
        /// Output directory for S.txt, Q.txt, report.json and report.txt.
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[arg(long, default_value_t = 30)]
        max_sweeps: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Generate a test matrix and its construction data.
    Generate {
        #[arg(long, default_value = "exp2")]
        class: MatrixClass,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0.0)]
        alpha1: f64,
        #[arg(long, default_value_t = 0.0)]
        alpha2: f64,
        #[arg(long, default_value_t = 1)]
        sigma_groups: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Matrix output path.
        #[arg(long)]
        out: PathBuf,
        /// Optional JSON sidecar with the spectrum and orthogonal factor.
        #[arg(long)]
        truth: Option<PathBuf>,
    },
    /// Accuracy benchmark: geometric-mean off-Schur ratio per class, size and solver.
    BenchAccuracy {
        #[arg(
            long,
            value_delimiter = ',',
            default_value = "exp1,exp2,exp3,exp4,exp5"
        )]
        classes: Vec<MatrixClass>,
        #[arg(long, value_delimiter = ',', default_value = "64,128")]
        sizes: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "alg2,zhou,randdiag")]
        solvers: Vec<Solver>,
        #[arg(long, default_value_t = 10)]
        trials: usize,
        /// Run independent cells on worker threads.
        #[arg(long)]
        parallel: bool,
        /// CSV output path; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Timing benchmark on the alpha family: median seconds per size and solver.
    BenchTime {
        /// Proportion pairs written `a1:a2`.
        #[arg(long = "alpha", value_delimiter = ',', default_value = "0:0")]
        alphas: Vec<String>,
        #[arg(long, value_delimiter = ',', default_value = "64,128,256")]
        sizes: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "alg2,zhou")]
        solvers: Vec<Solver>,
        #[arg(long, default_value_t = 5)]
        trials: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Check a decomposition against its input matrix.
    Verify {
        matrix: PathBuf,
        s: PathBuf,
        q: PathBuf,
        /// Reconstruction tolerance, relative to n·‖A‖_F.
        #[arg(long, default_value_t = 1e-11)]
        tol_reconstruction: f64,
        /// Orthogonality tolerance, relative to n.
        #[arg(long, default_value_t = 1e-12)]
        tol_orthogonality: f64,
        /// Off-Schur tolerance, relative to ‖A‖_F.
        #[arg(long, default_value_t = 1e-12)]
        tol_offschur: f64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}

fn read_matrix(path: &Path) -> Result<DenseMatrix, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    DenseMatrix::parse_text(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn write_file(path: &Path, contents: &str) -> Result<(), String> {
    fs::write(path, contents).map_err(|e| format!("{}: {e}", path.display()))
}

fn output(out: Option<&Path>) -> Result<Box<dyn Write>, String> {
    match out {
        Some(p) => fs::File::create(p)
            .map(|f| Box::new(f) as Box<dyn Write>)
            .map_err(|e| format!("{}: {e}", p.display())),
        None => Ok(Box::new(io::stdout().lock())),
    }
}

fn lib_err(e: Error) -> String {
    e.to_string()
}

fn run(cmd: Command) -> Result<u8, String> {
    match cmd {
        Command::Decompose {
            input,
            out,
            max_sweeps,
            common,
        } => {
            let a = read_matrix(&input)?;
            let cfg = Config {
                rho: common.rho(),
                max_sweeps,
                seed: common.seed,
                ..Config::default()
            };
            let res = decompose(&a, &cfg).map_err(lib_err)?;
            fs::create_dir_all(&out).map_err(|e| format!("{}: {e}", out.display()))?;
            write_file(&out.join("S.txt"), &res.s.to_text())?;
            write_file(&out.join("Q.txt"), &res.q.to_text())?;
            let report = Report::new(&res, cfg.rho);
            write_file(&out.join("report.json"), &report.to_json())?;
            write_file(&out.join("report.txt"), &report.to_text())?;
            print!("{}", report.to_text());
            if res.converged {
                Ok(0)
            } else {
                eprintln!("warning: decomposition did not reach the requested tolerance");
                Ok(EXIT_NOT_CONVERGED)
            }
        }
        Command::Generate {
            class,
            n,
            alpha1,
            alpha2,
            sigma_groups,
            seed,
            out,
            truth,
        } => {
            let spec = EnsembleSpec {
                alpha1,
                alpha2,
                sigma_groups,
                ..EnsembleSpec::new(n, class, seed)
            };
            spec.validate().map_err(lib_err)?;
            let (a, gt) = generate(&spec);
            write_file(&out, &a.to_text())?;
            if let Some(p) = truth {
                let json = serde_json::to_string_pretty(&gt).map_err(|e| e.to_string())?;
                write_file(&p, &json)?;
            }
            Ok(0)
        }
        Command::BenchAccuracy {
            classes,
            sizes,
            solvers,
            trials,
            parallel,
            out,
            common,
        } => {
            let plan = AccuracyPlan {
                classes,
                sizes,
                solvers,
                trials,
                seed: common.seed,
                rho: common.rho(),
                parallel,
            };
            let rows = bench_accuracy(&plan).map_err(lib_err)?;
            write_csv(&rows, output(out.as_deref())?).map_err(lib_err)?;
            Ok(0)
        }
        Command::BenchTime {
            alphas,
            sizes,
            solvers,
            trials,
            out,
            common,
        } => {
            let alphas = alphas
                .iter()
                .map(|s| parse_alpha(s))
                .collect::<Result<Vec<_>, _>>()?;
            let plan = TimingPlan {
                alphas,
                sizes,
                solvers,
                trials,
                seed: common.seed,
                rho: common.rho(),
            };
            let rows = bench_time(&plan).map_err(lib_err)?;
            write_csv(&rows, output(out.as_deref())?).map_err(lib_err)?;
            Ok(0)
        }
        Command::Verify {
            matrix,
            s,
            q,
            tol_reconstruction,
            tol_orthogonality,
            tol_offschur,
        } => {
            let a = read_matrix(&matrix)?;
            let s = read_matrix(&s)?;
            let q = read_matrix(&q)?;
            if s.n() != a.n() || q.n() != a.n() {
                return Err(format!(
                    "dimension mismatch: A is {}, S is {}, Q is {}",
                    a.n(),
                    s.n(),
                    q.n()
                ));
            }
            let n = a.n() as f64;
            let norm = frobenius_norm(&a);
            let checks = [
                (
                    "reconstruction",
                    reconstruction_residual(&a, &q, &s),
                    tol_reconstruction * n * norm,
                ),
                (
                    "orthogonality",
                    orthogonality_residual(&q),
                    tol_orthogonality * n,
                ),
                ("offschur", offschur(&s), tol_offschur * norm),
            ];
            let mut failed = false;
            for (name, value, tol) in checks {
                let ok = value <= tol;
                println!(
                    "{name}: {value:.3e} (tolerance {tol:.3e}) {}",
                    if ok { "ok" } else { "FAILED" }
                );
                failed |= !ok;
            }
            if failed {
                let names: Vec<&str> = checks.iter().filter(|c| c.1 > c.2).map(|c| c.0).collect();
                eprintln!("verification failed: {}", names.join(", "));
                Ok(EXIT_INPUT)
            } else {
                Ok(0)
            }
        }
    }
}

fn parse_alpha(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s
        .split_once(':')
        .ok_or_else(|| format!("expected a1:a2, got {s:?}"))?;
    let a: f64 = a
        .trim()
        .parse()
        .map_err(|_| format!("bad alpha1 in {s:?}"))?;
    let b: f64 = b
        .trim()
        .parse()
        .map_err(|_| format!("bad alpha2 in {s:?}"))?;
    Ok((a, b))
}
