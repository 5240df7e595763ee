//! The three-step pipeline, eigenvalue extraction from the final Schur form
//! and perturbation diagnostics.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::clustering::{build_adjacency_with_norm, connected_components};
use crate::error::{Error, Result};
use crate::generic_jacobi::{zhou_brent_with, ZhouBrentOptions, STAGNATION};
use crate::genmat::UNIT_ROUNDOFF;
use crate::matcore::{
    apply_givens_left, apply_givens_right, frobenius_norm, normality_residual, offschur,
    offschur_indices, orthogonality_residual, reconstruction_residual, skew_norm_indices,
    DenseMatrix, GivensRotation,
};
use crate::skewschur::{paardekooper_run, SweepStats};
use crate::structured::{
    cluster_sigma, remove_sigma_shift, sskh2, sskh_jacobi_with, symmetric_jacobi_with,
};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Config {
    pub rho: f64,
    pub max_sweeps: usize,
    pub seed: u64,
    /// Relative commutator size above which a normality warning is recorded.
    pub normality_tolerance: f64,
    /// Compute the normality, orthogonality and reconstruction residuals.
    /// When off they are reported as NaN.
    pub diagnostics: bool,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            rho: 10.0 * UNIT_ROUNDOFF,
            max_sweeps: 30,
            seed: 0,
            normality_tolerance: 1e-8,
            diagnostics: true,
        }
    }
}

impl Config {
    pub fn with_rho(rho: f64) -> Self {
        Self {
            rho,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rho > 0.0 && self.rho.is_finite()) {
            return Err(Error::Config(format!(
                "rho must be positive, got {}",
                self.rho
            )));
        }
        if self.max_sweeps == 0 {
            return Err(Error::Config("max_sweeps must be positive".into()));
        }
        Ok(())
    }
}

/// The conjugate pair `λ e^{±iθ}` with `λ > 0` and `θ ∈ (0, π)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexPair {
    pub radius: f64,
    pub phase: f64,
}

impl ComplexPair {
    pub fn new(radius: f64, phase: f64) -> Self {
        Self { radius, phase }
    }

    /// Pair with eigenvalues `re ± i·|im|`.
    pub fn from_parts(re: f64, im: f64) -> Self {
        Self {
            radius: re.hypot(im),
            phase: im.abs().atan2(re),
        }
    }

    pub fn re(&self) -> f64 {
        self.radius * self.phase.cos()
    }

    pub fn im(&self) -> f64 {
        self.radius * self.phase.sin()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub complex_pairs: Vec<ComplexPair>,
    pub reals: Vec<f64>,
    /// Indices into `complex_pairs` of pairs sharing an imaginary part.
    pub sigma_groups: Vec<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl Spectrum {
    pub fn new(complex_pairs: Vec<ComplexPair>, reals: Vec<f64>) -> Self {
        Self {
            complex_pairs,
            reals,
            sigma_groups: Vec::new(),
            warnings: Vec::new(),
        }
    }

    pub fn dimension(&self) -> usize {
        2 * self.complex_pairs.len() + self.reals.len()
    }

    /// All eigenvalues, each conjugate pair listed as `+im` then `-im`.
    pub fn eigenvalues(&self) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(self.dimension());
        for p in &self.complex_pairs {
            out.push(Complex64::new(p.re(), p.im()));
            out.push(Complex64::new(p.re(), -p.im()));
        }
        out.extend(self.reals.iter().map(|&r| Complex64::new(r, 0.0)));
        out
    }

    /// Groups pairs whose imaginary parts chain together within `tol`.
    pub fn annotate_sigma_groups(&mut self, tol: f64) {
        let mut order: Vec<usize> = (0..self.complex_pairs.len()).collect();
        order.sort_by(|&a, &b| {
            self.complex_pairs[a]
                .im()
                .partial_cmp(&self.complex_pairs[b].im())
                .unwrap()
        });
        let mut groups = Vec::new();
        let mut current: Vec<usize> = Vec::new();
        for &k in &order {
            if let Some(&last) = current.last() {
                if self.complex_pairs[k].im() - self.complex_pairs[last].im() > tol {
                    if current.len() > 1 {
                        current.sort_unstable();
                        groups.push(std::mem::take(&mut current));
                    }
                    current.clear();
                }
            }
            current.push(k);
        }
        if current.len() > 1 {
            current.sort_unstable();
            groups.push(current);
        }
        groups.sort();
        self.sigma_groups = groups;
    }
}

/// Which sub-solver handled a stage of the pipeline.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Step {
    #[serde(rename = "I.1")]
    I1,
    #[serde(rename = "II.1")]
    II1,
    #[serde(rename = "II.2")]
    II2,
    #[serde(rename = "II.3")]
    II3,
    #[serde(rename = "III")]
    III,
    /// An isolated pair needing no work.
    #[serde(rename = "none")]
    Resolved,
}

impl Step {
    pub fn label(self) -> &'static str {
        match self {
            Step::I1 => "I.1",
            Step::II1 => "II.1",
            Step::II2 => "II.2",
            Step::II3 => "II.3",
            Step::III => "III",
            Step::Resolved => "none",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: Step,
    /// Cluster indices (0-based) for step II records.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cluster: Option<Vec<usize>>,
    pub stats: SweepStats,
    /// `offschur` of the cluster's distance to the shifted SSkH structure.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sskh_gap: Option<f64>,
    /// `‖skew(A[l, l])‖_F` of the cluster.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub skew_norm: Option<f64>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Residuals {
    /// `offschur(S) / ‖A‖_F`.
    pub offschur_ratio: f64,
    /// `‖QᵀQ - I‖_F`.
    pub ortho_residual: f64,
    /// `‖A - Q S Qᵀ‖_F / ‖A‖_F`.
    pub reconstruction_residual: f64,
    /// `‖AᵀA - AAᵀ‖_F / ‖A‖_F²` of the input.
    pub normality_residual: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PerturbationReport {
    /// Factor for pairs with distinct imaginary parts.
    pub amplification_distinct: Option<f64>,
    /// Largest factor over the repeated imaginary-part groups.
    pub amplification_repeated: Option<f64>,
    /// Factor for the real eigenvalues.
    pub amplification_real: Option<f64>,
    /// Per-cluster structure gaps measured after the skew sweeps.
    pub measured_structure_gaps: Vec<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SchurResult {
    pub s: DenseMatrix,
    pub q: DenseMatrix,
    pub spectrum: Spectrum,
    pub step_log: Vec<StepRecord>,
    pub residuals: Residuals,
    pub perturbation: PerturbationReport,
    pub converged: bool,
    pub warnings: Vec<String>,
}

impl SchurResult {
    pub fn fired(&self, step: Step) -> bool {
        self.step_log.iter().any(|r| r.step == step)
    }

    pub fn sweeps_of(&self, step: Step) -> usize {
        self.step_log
            .iter()
            .filter(|r| r.step == step)
            .map(|r| r.stats.sweeps)
            .sum()
    }
}

/// Real Schur decomposition `A = Q S Qᵀ` of a real normal matrix.
pub fn decompose(a: &DenseMatrix, cfg: &Config) -> Result<SchurResult> {
    cfg.validate()?;
    if a.n() == 0 {
        return Err(Error::Shape("empty matrix".into()));
    }
    if !a.is_finite() {
        let pos = a.as_slice().iter().position(|v| !v.is_finite()).unwrap();
        return Err(Error::NonFinite {
            row: pos / a.n(),
            col: pos % a.n(),
        });
    }
    let n0 = a.n();
    let padded = n0 % 2 == 1;
    let mut w = if padded { a.padded() } else { a.clone() };
    let n = w.n();
    let mut q = DenseMatrix::identity(n);
    let norm = frobenius_norm(a);
    let mut warnings = Vec::new();
    let normality = if !cfg.diagnostics {
        f64::NAN
    } else if norm > 0.0 {
        normality_residual(a) / (norm * norm)
    } else {
        0.0
    };
    if normality > cfg.normality_tolerance {
        warnings.push(format!(
            "input is not normal to tolerance: relative commutator {normality:.3e}"
        ));
    }
    let rho = cfg.rho;
    let mut log = Vec::new();

    if norm > 0.0 {
        let st = paardekooper_run(&mut w, &mut q, rho, cfg.max_sweeps, true, norm);
        if !st.converged {
            warnings.push(format!("step I.1 stopped after {} sweeps", st.sweeps));
        }
        log.push(StepRecord {
            step: Step::I1,
            cluster: None,
            stats: st,
            sskh_gap: None,
            skew_norm: None,
        });

        let adj = build_adjacency_with_norm(&w, rho, norm);
        let clusters = connected_components(&adj);
        let thr = (rho * norm).sqrt();
        for l in clusters.iter() {
            log.push(run_cluster(&mut w, &mut q, l, rho, norm, thr, cfg));
        }

        let full: Vec<usize> = (0..n).collect();
        let off = offschur(&w);
        if off > rho * norm && n >= 4 {
            let st = zhou_brent_with(
                &mut w,
                &mut q,
                &full,
                rho,
                ZhouBrentOptions {
                    max_sweeps: cfg.max_sweeps,
                    break_on_increase: true,
                    min_reduction: STAGNATION,
                    norm: Some(norm),
                },
            );
            log.push(StepRecord {
                step: Step::III,
                cluster: None,
                stats: st,
                sskh_gap: None,
                skew_norm: None,
            });
        }
    }
    sign_pass(&mut w, &mut q);
    let final_off = offschur(&w);
    let converged = final_off <= rho * norm;
    if !converged {
        warnings.push(format!(
            "final offschur {:.3e} exceeds rho*|A| = {:.3e}",
            final_off,
            rho * norm
        ));
    }

    let (s, q) = if padded { strip_padding(w, q) } else { (w, q) };
    let mut spectrum = extract_spectrum_with_norm(&s, rho, norm);
    spectrum.annotate_sigma_groups(rho.sqrt() * norm);
    warnings.extend(spectrum.warnings.iter().cloned());
    let mut perturbation = perturbation_factors(&spectrum);
    perturbation.measured_structure_gaps = log
        .iter()
        .filter_map(|r| match r.step {
            Step::II1 | Step::II3 => r.sskh_gap,
            Step::II2 => r.skew_norm,
            _ => None,
        })
        .collect();
    let scale = if norm > 0.0 { norm } else { 1.0 };
    let residuals = Residuals {
        offschur_ratio: final_off / scale,
        ortho_residual: if cfg.diagnostics {
            orthogonality_residual(&q)
        } else {
            f64::NAN
        },
        reconstruction_residual: if cfg.diagnostics {
            reconstruction_residual(a, &q, &s) / scale
        } else {
            f64::NAN
        },
        normality_residual: normality,
    };
    Ok(SchurResult {
        s,
        q,
        spectrum,
        step_log: log,
        residuals,
        perturbation,
        converged,
        warnings,
    })
}

/// Dispatches one cluster to the SSkH, symmetric or general sub-solver.
fn run_cluster(
    w: &mut DenseMatrix,
    q: &mut DenseMatrix,
    l: &[usize],
    rho: f64,
    norm: f64,
    thr: f64,
    cfg: &Config,
) -> StepRecord {
    let skew = skew_norm_indices(w, l);
    let gap = if l.len() >= 4 {
        let sigma = cluster_sigma(w, l);
        let shifted = remove_sigma_shift(w, l, sigma);
        let proj = sskh2(&shifted).expect("clusters hold whole pairs");
        Some(offschur(&shifted.sub(&proj)))
    } else {
        None
    };
    let (step, stats) = if l.len() >= 4 && gap.unwrap() < thr {
        (
            Step::II1,
            sskh_jacobi_with(w, q, l, rho, norm, cfg.max_sweeps),
        )
    } else if skew < thr {
        (
            Step::II2,
            symmetric_jacobi_with(w, q, l, rho, norm, cfg.max_sweeps),
        )
    } else if l.len() >= 4 {
        let st = zhou_brent_with(
            w,
            q,
            l,
            rho.sqrt(),
            ZhouBrentOptions {
                max_sweeps: 5 * l.len(),
                break_on_increase: true,
                min_reduction: 0.0,
                norm: Some(norm),
            },
        );
        (Step::II3, st)
    } else {
        let off = offschur_indices(w, l);
        (
            Step::Resolved,
            SweepStats {
                sweeps: 0,
                initial_offschur: off,
                final_offschur: off,
                converged: true,
            },
        )
    };
    StepRecord {
        step,
        cluster: Some(l.to_vec()),
        stats,
        sskh_gap: gap,
        skew_norm: Some(skew),
    }
}

/// Makes the subdiagonal of every 2×2 diagonal block nonnegative.
pub fn sign_pass(s: &mut DenseMatrix, q: &mut DenseMatrix) {
    let n = s.n();
    let mut i = 0;
    while i + 1 < n {
        if s[(i + 1, i)] < 0.0 {
            let k = i + 1;
            for j in 0..n {
                s[(k, j)] = -s[(k, j)];
            }
            for j in 0..n {
                s[(j, k)] = -s[(j, k)];
            }
            for j in 0..n {
                q[(j, k)] = -q[(j, k)];
            }
        }
        i += 2;
    }
}

/// Removes the appended zero row and column. The Schur index carrying the
/// appended coordinate is located through `Q`, rotated onto a single index
/// and moved last together with its block partner.
fn strip_padding(mut s: DenseMatrix, mut q: DenseMatrix) -> (DenseMatrix, DenseMatrix) {
    let n = s.n();
    let pad = n - 1;
    // Concentrate row `pad` of Q on a single column.
    loop {
        let row: Vec<f64> = (0..n).map(|j| q[(pad, j)]).collect();
        let mut idx: Vec<usize> = (0..n).collect();
        idx.sort_by(|&x, &y| row[y].abs().partial_cmp(&row[x].abs()).unwrap());
        let (k, j) = (idx[0], idx[1]);
        if row[j].abs() <= 1e-10 {
            break;
        }
        let r = row[k].hypot(row[j]);
        let (lo, hi) = (k.min(j), k.max(j));
        let (x, y) = (row[lo], row[hi]);
        // Zero entry `j` of the row by rotating columns (lo, hi).
        let g = if j == hi {
            GivensRotation::new(lo, hi, x / r, y / r)
        } else {
            GivensRotation::new(lo, hi, y / r, -x / r)
        };
        apply_givens_left(&mut s, &g);
        apply_givens_right(&mut s, &g);
        apply_givens_right(&mut q, &g);
    }
    let k = (0..n)
        .max_by(|&x, &y| q[(pad, x)].abs().partial_cmp(&q[(pad, y)].abs()).unwrap())
        .unwrap();
    let partner = k ^ 1;
    let mut order: Vec<usize> = (0..n).filter(|&i| i != k && i != partner).collect();
    order.push(partner);
    let m = n - 1;
    let s2 = DenseMatrix::from_fn(m, |i, j| s[(order[i], order[j])]);
    let q2 = DenseMatrix::from_fn(m, |i, j| q[(i, order[j])]);
    (s2, q2)
}

/// Eigenvalues read from the 2×2 block diagonal of `S`.
pub fn extract_spectrum(s: &DenseMatrix, rho: f64) -> Spectrum {
    extract_spectrum_with_norm(s, rho, frobenius_norm(s))
}

fn extract_spectrum_with_norm(s: &DenseMatrix, rho: f64, norm: f64) -> Spectrum {
    let n = s.n();
    let thr = 10.0 * rho * norm;
    let mut spec = Spectrum::default();
    let mut i = 0;
    while i < n {
        if i + 1 >= n {
            spec.reals.push(s[(i, i)]);
            i += 1;
            continue;
        }
        let (a, b, c, d) = (s[(i, i)], s[(i, i + 1)], s[(i + 1, i)], s[(i + 1, i + 1)]);
        if b.abs() <= thr && c.abs() <= thr {
            spec.reals.push(a);
            spec.reals.push(d);
        } else {
            let p = 0.5 * (a - d);
            let disc = p * p + b * c;
            let mean = 0.5 * (a + d);
            if disc < 0.0 {
                spec.complex_pairs
                    .push(ComplexPair::from_parts(mean, (-disc).sqrt()));
                if (a - d).abs() + (b + c).abs() > thr {
                    spec.warnings.push(format!(
                        "block at {i} deviates from normal form by {:.3e}",
                        (a - d).abs() + (b + c).abs()
                    ));
                }
            } else {
                let r = disc.sqrt();
                spec.reals.push(mean + r);
                spec.reals.push(mean - r);
                spec.warnings.push(format!(
                    "block at {i} has real eigenvalues with coupling {:.3e}",
                    b.abs().max(c.abs())
                ));
            }
        }
        i += 2;
    }
    spec
}

/// Amplification factors of the perturbation bounds for a given spectrum.
pub fn perturbation_factors(spec: &Spectrum) -> PerturbationReport {
    let re_v: Vec<f64> = spec.complex_pairs.iter().map(|p| p.re()).collect();
    let im_v: Vec<f64> = spec.complex_pairs.iter().map(|p| p.im()).collect();
    let (re, im) = (&re_v, &im_v);
    let p = re.len();
    let ratio = |num: f64, den: f64| {
        if den == 0.0 {
            if num == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            num / den
        }
    };

    let distinct = (p >= 2).then(|| {
        let mut worst = 0.0f64;
        for i in 0..p {
            for j in 0..p {
                if i != j {
                    worst = worst.max(ratio((re[i] - re[j]).abs(), (im[i] - im[j]).abs()));
                }
            }
        }
        1.0 + worst
    });

    let repeated = spec
        .sigma_groups
        .iter()
        .filter(|g| g.len() >= 2)
        .map(|g| {
            let sigma = g.iter().map(|&k| im[k]).sum::<f64>() / g.len() as f64;
            let others: Vec<usize> = (0..p).filter(|k| !g.contains(k)).collect();
            let mut middle = 0.0;
            if !others.is_empty() {
                let num = others
                    .iter()
                    .flat_map(|&i| g.iter().map(move |&j| (i, j)))
                    .map(|(i, j)| (re[i] - re[j]).abs())
                    .fold(0.0, f64::max);
                let den = others
                    .iter()
                    .map(|&i| (im[i] - sigma).abs())
                    .fold(f64::INFINITY, f64::min);
                middle = ratio(num, den);
            }
            let spread = g
                .iter()
                .flat_map(|&a| g.iter().map(move |&b| (re[a] - re[b]).abs()))
                .fold(0.0, f64::max);
            1.0 + middle + ratio(spread, sigma)
        })
        .fold(None, |acc: Option<f64>, v| {
            Some(acc.map_or(v, |a| a.max(v)))
        });

    let real = (!spec.reals.is_empty() && p > 0).then(|| {
        let num = (0..p)
            .flat_map(|j| spec.reals.iter().map(move |&r| (j, r)))
            .map(|(j, r)| (re[j] - r).abs())
            .fold(0.0, f64::max);
        let den = im.iter().map(|v| v.abs()).fold(f64::INFINITY, f64::min);
        1.0 + ratio(num, den)
    });

    PerturbationReport {
        amplification_distinct: distinct,
        amplification_repeated: repeated,
        amplification_real: real,
        measured_structure_gaps: Vec::new(),
    }
}

/// Largest error `|a_k - b_π(k)|` under the assignment `π` minimizing the
/// total distance between the two multisets.
pub fn spectrum_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len(), "spectra of different sizes");
    let n = a.len();
    if n == 0 {
        return 0.0;
    }
    let cost = |i: usize, j: usize| (a[i] - b[j]).norm();
    // Hungarian method with potentials, 1-based internal arrays.
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    (1..=n).map(|j| cost(p[j] - 1, j - 1)).fold(0.0, f64::max)
}
