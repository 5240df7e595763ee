//! Accuracy and timing harness shared by the CLI and the acceptance runner.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::driver::{decompose, Config};
use crate::error::{Error, Result};
use crate::generic_jacobi::{randdiag_real, zhou_brent_with, ZhouBrentOptions, STAGNATION};
use crate::genmat::{generate, EnsembleSpec, MatrixClass};
use crate::matcore::{frobenius_norm, offschur, DenseMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Solver {
    Alg2,
    Zhou,
    Randdiag,
}

impl Solver {
    pub const ALL: [Solver; 3] = [Solver::Alg2, Solver::Zhou, Solver::Randdiag];

    pub fn name(self) -> &'static str {
        match self {
            Solver::Alg2 => "alg2",
            Solver::Zhou => "zhou",
            Solver::Randdiag => "randdiag",
        }
    }
}

impl fmt::Display for Solver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Solver {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "alg2" => Ok(Solver::Alg2),
            "zhou" => Ok(Solver::Zhou),
            "randdiag" => Ok(Solver::Randdiag),
            other => Err(Error::Config(format!("unknown solver {other:?}"))),
        }
    }
}

/// Outcome of one solver on one matrix.
#[derive(Clone, Copy, Debug)]
pub struct Trial {
    /// Off-Schur residual over `‖A‖_F` (off-diagonal for the complex comparator).
    pub ratio: f64,
    pub seconds: f64,
    pub sweeps: usize,
}

/// Runs `solver` on `a`; the clock covers only the solve, without residual
/// diagnostics.
pub fn run_solver(a: &DenseMatrix, solver: Solver, cfg: &Config) -> Result<Trial> {
    let norm = frobenius_norm(a);
    match solver {
        Solver::Alg2 => {
            let cfg = Config {
                diagnostics: false,
                ..*cfg
            };
            let start = Instant::now();
            let res = decompose(a, &cfg)?;
            let seconds = start.elapsed().as_secs_f64();
            let sweeps = res.step_log.iter().map(|r| r.stats.sweeps).sum();
            Ok(Trial {
                ratio: res.residuals.offschur_ratio,
                seconds,
                sweeps,
            })
        }
        Solver::Zhou => {
            let mut w = if a.n() % 2 == 1 {
                a.padded()
            } else {
                a.clone()
            };
            let n = w.n();
            let mut q = DenseMatrix::identity(n);
            let start = Instant::now();
            let stats = if n >= 4 {
                let l: Vec<usize> = (0..n).collect();
                let opts = ZhouBrentOptions {
                    max_sweeps: cfg.max_sweeps,
                    break_on_increase: true,
                    min_reduction: STAGNATION,
                    norm: None,
                };
                Some(zhou_brent_with(&mut w, &mut q, &l, cfg.rho, opts))
            } else {
                None
            };
            let seconds = start.elapsed().as_secs_f64();
            Ok(Trial {
                ratio: ratio_or_zero(offschur(&w), norm),
                seconds,
                sweeps: stats.map_or(0, |s| s.sweeps),
            })
        }
        Solver::Randdiag => {
            let start = Instant::now();
            let res = randdiag_real(a, cfg.rho, cfg.seed);
            let seconds = start.elapsed().as_secs_f64();
            Ok(Trial {
                ratio: ratio_or_zero(res.a.offdiag(), norm),
                seconds,
                sweeps: res.stats.sweeps,
            })
        }
    }
}

fn ratio_or_zero(x: f64, norm: f64) -> f64 {
    if norm == 0.0 {
        0.0
    } else {
        x / norm
    }
}

/// Seed of trial `t` in a run started from `seed`.
pub fn trial_seed(seed: u64, t: usize) -> u64 {
    seed.wrapping_add(t as u64)
}

/// Geometric mean, with zeros clamped to the smallest positive normal.
pub fn geometric_mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let s: f64 = values.iter().map(|v| v.max(f64::MIN_POSITIVE).ln()).sum();
    (s / values.len() as f64).exp()
}

pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

/// One row of the accuracy CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AccuracyRecord {
    pub class: String,
    pub n: usize,
    pub solver: Solver,
    pub ratio: f64,
    pub seconds: f64,
    pub trials: usize,
    pub seed: u64,
    pub rho: f64,
    pub sweeps: f64,
}

#[derive(Clone, Debug)]
pub struct AccuracyPlan {
    pub classes: Vec<MatrixClass>,
    pub sizes: Vec<usize>,
    pub solvers: Vec<Solver>,
    pub trials: usize,
    pub seed: u64,
    pub rho: f64,
    pub parallel: bool,
}

/// Geometric-mean accuracy per `(class, n, solver)`; `seconds` is the median.
pub fn bench_accuracy(plan: &AccuracyPlan) -> Result<Vec<AccuracyRecord>> {
    if plan.trials == 0 {
        return Err(Error::Config("trials must be at least 1".into()));
    }
    let mut cells = Vec::new();
    for &class in &plan.classes {
        for &n in &plan.sizes {
            for &solver in &plan.solvers {
                cells.push((class, n, solver));
            }
        }
    }
    let run_cell = |&(class, n, solver): &(MatrixClass, usize, Solver)| -> Result<AccuracyRecord> {
        let mut ratios = Vec::with_capacity(plan.trials);
        let mut times = Vec::with_capacity(plan.trials);
        let mut sweeps = 0usize;
        for t in 0..plan.trials {
            let seed = trial_seed(plan.seed, t);
            let spec = EnsembleSpec::new(n, class, seed);
            spec.validate()?;
            let (a, _) = generate(&spec);
            let cfg = Config {
                seed,
                ..Config::with_rho(plan.rho)
            };
            let tr = run_solver(&a, solver, &cfg)?;
            ratios.push(tr.ratio);
            times.push(tr.seconds);
            sweeps += tr.sweeps;
        }
        Ok(AccuracyRecord {
            class: class.name().to_string(),
            n,
            solver,
            ratio: geometric_mean(&ratios),
            seconds: median(&times),
            trials: plan.trials,
            seed: plan.seed,
            rho: plan.rho,
            sweeps: sweeps as f64 / plan.trials as f64,
        })
    };
    if plan.parallel {
        cells.par_iter().map(run_cell).collect()
    } else {
        cells.iter().map(run_cell).collect()
    }
}

/// One row of the timing CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimingRecord {
    pub n: usize,
    pub solver: Solver,
    pub alpha1: f64,
    pub alpha2: f64,
    pub seconds: f64,
    pub relative: f64,
    pub ratio: f64,
    pub trials: usize,
    pub seed: u64,
    pub rho: f64,
}

#[derive(Clone, Debug)]
pub struct TimingPlan {
    pub alphas: Vec<(f64, f64)>,
    pub sizes: Vec<usize>,
    pub solvers: Vec<Solver>,
    pub trials: usize,
    pub seed: u64,
    pub rho: f64,
}

/// Median wall-clock per `(α1, α2, n, solver)`, with the ratio to `alg2`.
/// Each trial matrix is run through every solver in turn.
///
/// `relative` is relative to the first listed solver when `alg2` is absent.
pub fn bench_time(plan: &TimingPlan) -> Result<Vec<TimingRecord>> {
    if plan.trials == 0 {
        return Err(Error::Config("trials must be at least 1".into()));
    }
    if plan.solvers.is_empty() {
        return Err(Error::Config("no solvers selected".into()));
    }
    let reference = if plan.solvers.contains(&Solver::Alg2) {
        Solver::Alg2
    } else {
        plan.solvers[0]
    };
    let mut out = Vec::new();
    for &(alpha1, alpha2) in &plan.alphas {
        for &n in &plan.sizes {
            let k = plan.solvers.len();
            let mut times = vec![Vec::with_capacity(plan.trials); k];
            let mut ratios = vec![Vec::with_capacity(plan.trials); k];
            for t in 0..plan.trials {
                let seed = trial_seed(plan.seed, t);
                let spec = EnsembleSpec::alpha(n, alpha1, alpha2, seed);
                spec.validate()?;
                let (a, _) = generate(&spec);
                let cfg = Config {
                    seed,
                    ..Config::with_rho(plan.rho)
                };
                for (s, &solver) in plan.solvers.iter().enumerate() {
                    let tr = run_solver(&a, solver, &cfg)?;
                    times[s].push(tr.seconds);
                    ratios[s].push(tr.ratio);
                }
            }
            let mut rows: Vec<TimingRecord> = plan
                .solvers
                .iter()
                .enumerate()
                .map(|(s, &solver)| TimingRecord {
                    n,
                    solver,
                    alpha1,
                    alpha2,
                    seconds: median(&times[s]),
                    relative: 1.0,
                    ratio: geometric_mean(&ratios[s]),
                    trials: plan.trials,
                    seed: plan.seed,
                    rho: plan.rho,
                })
                .collect();
            let base = rows
                .iter()
                .find(|r| r.solver == reference)
                .map(|r| r.seconds)
                .unwrap_or(f64::NAN);
            for r in &mut rows {
                r.relative = if r.solver == reference {
                    1.0
                } else {
                    r.seconds / base
                };
            }
            out.extend(rows);
        }
    }
    Ok(out)
}

/// Serializes records with a header row.
pub fn write_csv<T: Serialize, W: std::io::Write>(records: &[T], w: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    for r in records {
        wtr.serialize(r)
            .map_err(|e| Error::Config(format!("csv: {e}")))?;
    }
    wtr.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::genmat::UNIT_ROUNDOFF;

    #[test]
    fn geometric_mean_of_powers() {
        let g = geometric_mean(&[1e-16, 1e-14]);
        assert!((g / 1e-15 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn median_even_and_odd() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
    }

    #[test]
    fn single_trial_accuracy_is_deterministic() {
        let plan = AccuracyPlan {
            classes: vec![MatrixClass::Exp2],
            sizes: vec![8],
            solvers: vec![Solver::Alg2, Solver::Zhou],
            trials: 1,
            seed: 7,
            rho: 10.0 * UNIT_ROUNDOFF,
            parallel: false,
        };
        let a = bench_accuracy(&plan).unwrap();
        let b = bench_accuracy(&plan).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.ratio, y.ratio);
        }
    }

    #[test]
    fn single_solver_relative_column_is_one() {
        let plan = TimingPlan {
            alphas: vec![(0.0, 0.0)],
            sizes: vec![8, 12],
            solvers: vec![Solver::Zhou],
            trials: 1,
            seed: 1,
            rho: 10.0 * UNIT_ROUNDOFF,
        };
        for r in bench_time(&plan).unwrap() {
            assert_eq!(r.relative, 1.0);
        }
    }
}
