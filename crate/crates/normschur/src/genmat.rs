//! Random normal test matrices `A = Q S Qᵀ` with Haar `Q` and a prescribed
//! block-diagonal real Schur form `S`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::driver::{ComplexPair, Spectrum};
use crate::error::{Error, Result};
use crate::matcore::DenseMatrix;

/// Unit roundoff of `f64`.
pub const UNIT_ROUNDOFF: f64 = f64::EPSILON / 2.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatrixClass {
    Exp1,
    Exp2,
    Exp3,
    Exp4,
    Exp5,
    Alpha,
}

impl MatrixClass {
    pub const BENCHMARK: [MatrixClass; 5] =
        [Self::Exp1, Self::Exp2, Self::Exp3, Self::Exp4, Self::Exp5];

    pub fn name(self) -> &'static str {
        match self {
            Self::Exp1 => "exp1",
            Self::Exp2 => "exp2",
            Self::Exp3 => "exp3",
            Self::Exp4 => "exp4",
            Self::Exp5 => "exp5",
            Self::Alpha => "alpha",
        }
    }
}

impl fmt::Display for MatrixClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MatrixClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "exp1" => Ok(Self::Exp1),
            "exp2" => Ok(Self::Exp2),
            "exp3" => Ok(Self::Exp3),
            "exp4" => Ok(Self::Exp4),
            "exp5" => Ok(Self::Exp5),
            "alpha" => Ok(Self::Alpha),
            other => Err(Error::Config(format!("unknown matrix class '{other}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub n: usize,
    pub class: MatrixClass,
    /// Proportion of real eigenvalues (alpha family only).
    pub alpha1: f64,
    /// Proportion of eigenvalues with a repeated imaginary part (alpha family only).
    pub alpha2: f64,
    pub seed: u64,
    /// Number of distinct repeated imaginary parts for Exp4.
    pub sigma_groups: usize,
}

impl EnsembleSpec {
    pub fn new(n: usize, class: MatrixClass, seed: u64) -> Self {
        Self {
            n,
            class,
            alpha1: 0.0,
            alpha2: 0.0,
            seed,
            sigma_groups: 1,
        }
    }

    pub fn alpha(n: usize, alpha1: f64, alpha2: f64, seed: u64) -> Self {
        Self {
            alpha1,
            alpha2,
            ..Self::new(n, MatrixClass::Alpha, seed)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::Config(format!(
                "n must be at least 2, got {}",
                self.n
            )));
        }
        let ok = |a: f64| (0.0..=1.0).contains(&a);
        if !ok(self.alpha1) || !ok(self.alpha2) || self.alpha1 + self.alpha2 > 1.0 + 1e-12 {
            return Err(Error::Config(format!(
                "invalid proportions alpha1={} alpha2={}",
                self.alpha1, self.alpha2
            )));
        }
        if self.sigma_groups == 0 {
            return Err(Error::Config("sigma_groups must be positive".into()));
        }
        Ok(())
    }
}

/// Construction data of a generated matrix. `spectrum`, `q_true` and `s_true`
/// are absent for Exp1, whose Schur form is not prescribed.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GroundTruth {
    pub spectrum: Option<Spectrum>,
    pub q_true: Option<DenseMatrix>,
    pub s_true: Option<DenseMatrix>,
    /// Pair indices (into `spectrum.complex_pairs`) sharing a repeated imaginary part.
    pub repeated_groups: Vec<Vec<usize>>,
    /// Rounding of requested proportions to realizable counts.
    pub adjustments: Vec<String>,
    /// Steps the construction is meant to exercise.
    pub intended_steps: Vec<String>,
}

fn gauss(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Haar-distributed orthogonal matrix from the QR factorization of a Gaussian
/// matrix with the sign of `diag(R)` folded into `Q`.
pub fn haar_orthogonal(n: usize, seed: u64) -> DenseMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    haar_from_rng(n, &mut rng)
}

fn haar_from_rng(n: usize, rng: &mut ChaCha8Rng) -> DenseMatrix {
    let mut r = DenseMatrix::from_fn(n, |_, _| gauss(rng));
    let mut q = DenseMatrix::identity(n);
    let mut signs = vec![1.0; n];
    for k in 0..n {
        let x: Vec<f64> = (k..n).map(|i| r[(i, k)]).collect();
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let alpha = if x[0] >= 0.0 { -norm } else { norm };
        let mut v = x.clone();
        v[0] -= alpha;
        let vn2: f64 = v.iter().map(|t| t * t).sum();
        if vn2 > 0.0 {
            for col in k..n {
                let d: f64 = (0..v.len()).map(|t| v[t] * r[(k + t, col)]).sum::<f64>() * 2.0 / vn2;
                for t in 0..v.len() {
                    r[(k + t, col)] -= d * v[t];
                }
            }
            for row in 0..n {
                let d: f64 = (0..v.len()).map(|t| q[(row, k + t)] * v[t]).sum::<f64>() * 2.0 / vn2;
                for t in 0..v.len() {
                    q[(row, k + t)] -= d * v[t];
                }
            }
        }
        signs[k] = if r[(k, k)] < 0.0 { -1.0 } else { 1.0 };
    }
    DenseMatrix::from_fn(n, |i, j| q[(i, j)] * signs[j])
}

/// Block-diagonal real Schur form: complex pairs first as
/// `[[λc, -λs], [λs, λc]]`, then the real eigenvalues.
pub fn schur_form(spec: &Spectrum) -> DenseMatrix {
    let n = spec.dimension();
    let mut s = DenseMatrix::zeros(n);
    for (k, p) in spec.complex_pairs.iter().enumerate() {
        let (re, im) = (p.re(), p.im());
        let i = 2 * k;
        s[(i, i)] = re;
        s[(i + 1, i + 1)] = re;
        s[(i, i + 1)] = -im;
        s[(i + 1, i)] = im;
    }
    let off = 2 * spec.complex_pairs.len();
    for (k, &r) in spec.reals.iter().enumerate() {
        s[(off + k, off + k)] = r;
    }
    s
}

fn assemble(
    spectrum: Spectrum,
    rng: &mut ChaCha8Rng,
) -> (DenseMatrix, DenseMatrix, DenseMatrix, Spectrum) {
    let n = spectrum.dimension();
    let s = schur_form(&spectrum);
    let q = haar_from_rng(n, rng);
    let a = q.matmul(&s).matmul(&q.transpose());
    (a, q, s, spectrum)
}

fn exp2_pair(rng: &mut ChaCha8Rng) -> ComplexPair {
    let phase: f64 = rng.random_range(0.0..2.0 * PI);
    let radius: f64 = rng.random_range(0.0..2.0f64).max(1e-6);
    let theta = if phase > PI { 2.0 * PI - phase } else { phase };
    ComplexPair::new(radius, theta.clamp(f64::MIN_POSITIVE, PI - 1e-300))
}

fn gaussian_pair(rng: &mut ChaCha8Rng) -> ComplexPair {
    let re = gauss(rng);
    let im = gauss(rng).abs().max(1e-6);
    ComplexPair::from_parts(re, im)
}

/// Splits `n` into `(reals, pairs)` with `reals ≈ frac·n` and `n - reals` even.
fn split_reals(n: usize, frac: f64, adjustments: &mut Vec<String>) -> usize {
    let want = (frac * n as f64).round() as usize;
    let mut reals = want.min(n);
    if (n - reals) % 2 != 0 {
        let exact = frac * n as f64;
        reals = if reals == 0 || (reals < n && (reals as f64) < exact) {
            reals + 1
        } else {
            reals - 1
        };
    }
    if reals != want {
        adjustments.push(format!("real eigenvalue count {want} rounded to {reals}"));
    }
    reals
}

/// Draws a matrix of the given class with its construction data.
pub fn generate(spec: &EnsembleSpec) -> (DenseMatrix, GroundTruth) {
    spec.validate().expect("invalid ensemble spec");
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n = spec.n;
    let mut adjustments = Vec::new();
    let mut repeated_groups = Vec::new();
    let mut pairs = Vec::new();
    let mut reals = Vec::new();
    match spec.class {
        MatrixClass::Exp1 => {
            let a = haar_from_rng(n, &mut rng);
            return (
                a,
                GroundTruth {
                    spectrum: None,
                    q_true: None,
                    s_true: None,
                    repeated_groups,
                    adjustments,
                    intended_steps: vec![],
                },
            );
        }
        MatrixClass::Exp2 | MatrixClass::Exp5 => {
            for _ in 0..n / 2 {
                let mut p = exp2_pair(&mut rng);
                if spec.class == MatrixClass::Exp5 {
                    let phase = PI * UNIT_ROUNDOFF.sqrt() * (1.0 + gauss(&mut rng));
                    p = ComplexPair::new(p.radius, phase.abs().max(f64::MIN_POSITIVE));
                }
                pairs.push(p);
            }
            if n % 2 == 1 {
                reals.push(gauss(&mut rng));
                adjustments.push("odd dimension: one real eigenvalue added".into());
            }
        }
        MatrixClass::Exp3 => {
            let r = split_reals(n, 0.3, &mut adjustments);
            for _ in 0..(n - r) / 2 {
                pairs.push(exp2_pair(&mut rng));
            }
            for _ in 0..r {
                reals.push(gauss(&mut rng));
            }
        }
        MatrixClass::Exp4 => {
            let total_pairs = n / 2;
            let want = ((0.3 * n as f64) / 2.0).round() as usize;
            let rep = want.max(2 * spec.sigma_groups).min(total_pairs);
            if rep != want {
                adjustments.push(format!("repeated pair count {want} adjusted to {rep}"));
            }
            let groups = spec.sigma_groups.min(rep / 2).max(1);
            let mut start = 0;
            for g in 0..groups {
                let size = rep / groups + usize::from(g < rep % groups);
                let sigma = gauss(&mut rng).abs().max(1e-3);
                let mut group = Vec::new();
                for _ in 0..size {
                    group.push(start + group.len());
                    pairs.push(ComplexPair::from_parts(gauss(&mut rng), sigma));
                }
                start += size;
                repeated_groups.push(group);
            }
            for _ in rep..total_pairs {
                pairs.push(exp2_pair(&mut rng));
            }
            if n % 2 == 1 {
                reals.push(gauss(&mut rng));
                adjustments.push("odd dimension: one real eigenvalue added".into());
            }
        }
        MatrixClass::Alpha => {
            let r = split_reals(n, spec.alpha1, &mut adjustments);
            let total_pairs = (n - r) / 2;
            let want = ((spec.alpha2 * n as f64) / 2.0).round() as usize;
            let rep = want.min(total_pairs);
            if rep != want {
                adjustments.push(format!("repeated pair count {want} adjusted to {rep}"));
            }
            if rep > 0 {
                let sigma = gauss(&mut rng).abs().max(1e-3);
                repeated_groups.push((0..rep).collect());
                for _ in 0..rep {
                    pairs.push(ComplexPair::from_parts(gauss(&mut rng), sigma));
                }
            }
            for _ in rep..total_pairs {
                pairs.push(gaussian_pair(&mut rng));
            }
            for _ in 0..r {
                reals.push(gauss(&mut rng));
            }
        }
    }
    let mut spectrum = Spectrum::new(pairs, reals);
    spectrum.sigma_groups = repeated_groups.clone();
    let (a, q, s, spectrum) = assemble(spectrum, &mut rng);
    (
        a,
        GroundTruth {
            spectrum: Some(spectrum),
            q_true: Some(q),
            s_true: Some(s),
            repeated_groups,
            adjustments,
            intended_steps: vec![],
        },
    )
}

/// The 26×26 mixed-spectrum matrix: three pairs with a shared imaginary part,
/// six real eigenvalues, three pairs with imaginary parts `O(sqrt(ε))` apart,
/// three pairs `O(ε^{1/4})` apart and one generic pair.
pub fn fig1_matrix(seed: u64) -> (DenseMatrix, GroundTruth) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sq = UNIT_ROUNDOFF.sqrt();
    let quarter = UNIT_ROUNDOFF.powf(0.25);
    let mut pairs = Vec::new();
    let sigma = 1.0;
    for _ in 0..3 {
        pairs.push(ComplexPair::from_parts(gauss(&mut rng), sigma));
    }
    let close_base = 2.0;
    let mut im = close_base;
    for _ in 0..3 {
        pairs.push(ComplexPair::from_parts(gauss(&mut rng), im));
        im += rng.random_range(1.0..10.0) * sq;
    }
    let mut im = 0.5;
    for _ in 0..3 {
        pairs.push(ComplexPair::from_parts(gauss(&mut rng), im));
        im += rng.random_range(1.0..10.0) * quarter;
    }
    pairs.push(ComplexPair::from_parts(gauss(&mut rng), 3.0));
    let reals: Vec<f64> = (0..6).map(|_| gauss(&mut rng)).collect();
    let mut spectrum = Spectrum::new(pairs, reals);
    spectrum.sigma_groups = vec![vec![0, 1, 2]];
    let (a, q, s, spectrum) = assemble(spectrum, &mut rng);
    (
        a,
        GroundTruth {
            spectrum: Some(spectrum),
            q_true: Some(q),
            s_true: Some(s),
            repeated_groups: vec![vec![0, 1, 2]],
            adjustments: vec!["one generic pair added to reach dimension 26".into()],
            intended_steps: ["II.1", "II.2", "II.3", "III"].map(String::from).to_vec(),
        },
    )
}
