//! Oracles and checks shared by the property suite and the acceptance runner.
#![allow(dead_code)]

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use normschur::driver::spectrum_distance;
use normschur::generic_jacobi::real_schur_4x4;
use normschur::genmat::{generate, EnsembleSpec, MatrixClass, UNIT_ROUNDOFF};
use normschur::matcore::{
    frobenius_inner, frobenius_norm, orthogonality_residual, skew_part, DenseMatrix,
};
use normschur::nearest::{nearest_ortho_symplectic, osp_distance_bound, symplectic_j};
use normschur::skewschur::{paardekooper_run, schur_skew_3x3, schur_skew_4x4_raw};
use normschur::structured::sskh;
use normschur::{decompose, Config};

pub type Check = Result<(), String>;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform_matrix(n: usize, rng: &mut ChaCha8Rng) -> DenseMatrix {
    DenseMatrix::from_fn(n, |_, _| rng.random_range(-1.0..1.0))
}

pub fn random_skew4(rng: &mut ChaCha8Rng) -> [[f64; 4]; 4] {
    let mut w = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..i {
            let v = rng.random_range(-1.0..1.0);
            w[i][j] = v;
            w[j][i] = -v;
        }
    }
    w
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Check {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Reconstruction and orthogonality of a full decomposition.
pub fn check_decomposition(class: MatrixClass, n: usize, seed: u64) -> Check {
    let (a, _) = generate(&EnsembleSpec::new(n, class, seed));
    let r = decompose(&a, &Config::default()).map_err(|e| e.to_string())?;
    let nf = n as f64;
    let rec = r.residuals.reconstruction_residual;
    let orth = r.residuals.ortho_residual;
    ensure(rec <= 1e-11 * nf, || {
        format!(
            "{class} n={n} seed={seed}: reconstruction {rec:.3e} > {:.3e}",
            1e-11 * nf
        )
    })?;
    ensure(orth <= 1e-12 * nf, || {
        format!(
            "{class} n={n} seed={seed}: orthogonality {orth:.3e} > {:.3e}",
            1e-12 * nf
        )
    })
}

/// Extracted eigenvalues against the generator's spectrum.
pub fn check_spectrum_roundtrip(class: MatrixClass, n: usize, seed: u64) -> Check {
    let (a, truth) = generate(&EnsembleSpec::new(n, class, seed));
    let Some(spec) = truth.spectrum else {
        return Err(format!("{class} has no prescribed spectrum"));
    };
    let r = decompose(&a, &Config::default()).map_err(|e| e.to_string())?;
    let d = spectrum_distance(&r.spectrum.eigenvalues(), &spec.eigenvalues());
    let tol = 1e-10 * frobenius_norm(&a);
    ensure(d <= tol, || {
        format!("{class} n={n} seed={seed}: eigenvalue error {d:.3e} > {tol:.3e}")
    })
}

/// Singular values of a 4×4 skew matrix from `σ1² + σ2² = ‖Ω‖²/2` and
/// `σ1 σ2 = |Pf(Ω)|`, largest first.
pub fn pfaffian_sigmas(w: &[[f64; 4]; 4]) -> (f64, f64) {
    let pf = w[0][1] * w[2][3] - w[0][2] * w[1][3] + w[0][3] * w[1][2];
    let s: f64 = w.iter().flatten().map(|v| v * v).sum::<f64>() / 2.0;
    let p = pf.abs();
    let plus = (s + 2.0 * p).max(0.0).sqrt();
    let minus = (s - 2.0 * p).max(0.0).sqrt();
    (0.5 * (plus + minus), 0.5 * (plus - minus))
}

pub fn check_skew4(seed: u64) -> Check {
    let mut rng = rng(seed);
    let w = random_skew4(&mut rng);
    let step = schur_skew_4x4_raw(&w);
    let (hi, lo) = pfaffian_sigmas(&w);
    let (a, b) = if step.sigma1 >= step.sigma2 {
        (step.sigma1, step.sigma2)
    } else {
        (step.sigma2, step.sigma1)
    };
    ensure((a - hi).abs() <= 1e-12 && (b - lo).abs() <= 1e-12, || {
        format!("seed {seed}: sigmas ({a}, {b}) vs oracle ({hi}, {lo})")
    })?;
    let g = step.g_dense();
    let omega = DenseMatrix::from_fn(4, |i, j| w[i][j]);
    let t = g.tr_matmul(&omega.matmul(&g));
    let want = DenseMatrix::from_rows(&[
        &[0.0, -step.sigma1, 0.0, 0.0],
        &[step.sigma1, 0.0, 0.0, 0.0],
        &[0.0, 0.0, 0.0, -step.sigma2],
        &[0.0, 0.0, step.sigma2, 0.0],
    ]);
    let err = frobenius_norm(&t.sub(&want));
    ensure(err <= 1e-13 && orthogonality_residual(&g) <= 1e-14, || {
        format!("seed {seed}: block form error {err:.3e}")
    })
}

pub fn check_skew3(seed: u64) -> Check {
    let mut rng = rng(seed);
    let x = uniform_matrix(3, &mut rng);
    let omega = skew_part(&x);
    let r = schur_skew_3x3(&omega).map_err(|e| e.to_string())?;
    let want = (frobenius_norm(&omega).powi(2) / 2.0).sqrt();
    ensure((r.sigma - want).abs() <= 1e-12, || {
        format!("seed {seed}: sigma {} vs {want}", r.sigma)
    })
}

/// `A - sskh(A)` is orthogonal to 20 random SSkH matrices.
pub fn check_sskh_orthogonality(seed: u64) -> Check {
    let mut rng = rng(seed);
    let n = 2 * rng.random_range(1..=6usize);
    let a = uniform_matrix(n, &mut rng);
    let p = sskh(&a).map_err(|e| e.to_string())?;
    let resid = a.sub(&p);
    for k in 0..20 {
        let s = sskh(&uniform_matrix(n, &mut rng)).map_err(|e| e.to_string())?;
        let ip = frobenius_inner(&resid, &s).abs();
        let scale = frobenius_norm(&a) * frobenius_norm(&s);
        ensure(ip <= 1e-12 * scale, || {
            format!("seed {seed} direction {k}: inner product {ip:.3e}")
        })?;
    }
    Ok(())
}

/// Nearest plane rotation to a 2×2 matrix by scanning `count` angles.
pub fn grid_nearest_rotation(a: &DenseMatrix, count: usize) -> f64 {
    let mut best = f64::INFINITY;
    for k in 0..count {
        let t = std::f64::consts::TAU * k as f64 / count as f64;
        let (s, c) = t.sin_cos();
        let d = (a[(0, 0)] - c).powi(2)
            + (a[(0, 1)] + s).powi(2)
            + (a[(1, 0)] - s).powi(2)
            + (a[(1, 1)] - c).powi(2);
        best = best.min(d);
    }
    best.sqrt()
}

pub fn check_osp_grid(seed: u64) -> Check {
    let mut rng = rng(seed);
    let a = uniform_matrix(2, &mut rng).scale(2.0);
    let r = nearest_ortho_symplectic(&a).map_err(|e| e.to_string())?;
    let grid = grid_nearest_rotation(&a, 1_000_000);
    ensure(
        (grid - r.distance).abs() <= 1e-5 && r.distance <= grid + 1e-12,
        || format!("seed {seed}: distance {} vs grid {grid}", r.distance),
    )
}

/// Structure of `R★`, the distance identity and both upper bounds.
pub fn check_osp_identity_and_bounds(seed: u64) -> Check {
    let mut rng = rng(seed);
    let m = rng.random_range(1..=4usize);
    let n = 2 * m;
    let a = if seed % 2 == 0 {
        let e = uniform_matrix(n, &mut rng);
        let scale = rng.random_range(0.0..0.1) / frobenius_norm(&e);
        DenseMatrix::identity(n).add(&e.scale(scale))
    } else {
        uniform_matrix(n, &mut rng).scale(rng.random_range(0.1..3.0))
    };
    let r = nearest_ortho_symplectic(&a).map_err(|e| e.to_string())?;
    let j = symplectic_j(n);
    let comm = frobenius_norm(&r.r.matmul(&j).sub(&j.matmul(&r.r)));
    let orth = orthogonality_residual(&r.r);
    ensure(comm <= 1e-12 && orth <= 1e-12, || {
        format!("seed {seed}: R not ortho-symplectic ({comm:.3e}, {orth:.3e})")
    })?;
    let d = r.distance;
    let gap = (d - r.distance_from_identity).abs();
    ensure(gap <= 1e-11 * d.max(f64::MIN_POSITIVE), || {
        format!(
            "seed {seed}: distance {d} vs identity {}",
            r.distance_from_identity
        )
    })?;
    let b = osp_distance_bound(&a).map_err(|e| e.to_string())?;
    let slack = 1.0 + 1e-12;
    ensure(b.squared * slack >= d * d && b.linear * slack >= d, || {
        format!(
            "seed {seed}: bounds ({}, {}) below distance {d}",
            b.squared, b.linear
        )
    })
}

/// Explicit sweeps on `skew(A)` and implicit sweeps on `A` accumulate the same `Q`.
/// Smallest distance between the distinct imaginary-part magnitudes of the spectrum.
pub fn min_sigma_gap(class: MatrixClass, n: usize, seed: u64) -> f64 {
    let (_, truth) = generate(&EnsembleSpec::new(n, class, seed));
    let Some(spec) = truth.spectrum else {
        return f64::INFINITY;
    };
    let mut im: Vec<f64> = spec
        .complex_pairs
        .iter()
        .map(|z| (z.radius * z.phase.sin()).abs())
        .collect();
    im.sort_by(f64::total_cmp);
    im.windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min)
}

/// Explicit sweeps on the skew part against implicit sweeps on the whole matrix.
/// With `gap_scaled` the tolerance grows as `1e-2 / gap` once the smallest
/// separation between imaginary parts drops below `1e-2`.
pub fn check_explicit_implicit(seed: u64, gap_scaled: bool) -> Check {
    let (a, _) = generate(&EnsembleSpec::new(8, MatrixClass::Exp2, seed));
    let norm = frobenius_norm(&a);
    let rho = 10.0 * UNIT_ROUNDOFF;
    let mut omega = skew_part(&a);
    let mut q1 = DenseMatrix::identity(8);
    let s1 = paardekooper_run(&mut omega, &mut q1, rho, 30, false, norm);
    let mut w = a.clone();
    let mut q2 = DenseMatrix::identity(8);
    let s2 = paardekooper_run(&mut w, &mut q2, rho, 30, true, norm);
    ensure(s1.sweeps == s2.sweeps, || {
        format!(
            "seed {seed}: {} explicit vs {} implicit sweeps",
            s1.sweeps, s2.sweeps
        )
    })?;
    let mut tol = 1e-13;
    if gap_scaled {
        tol *= (1e-2 / min_sigma_gap(MatrixClass::Exp2, 8, seed)).max(1.0);
    }
    let diff = q1.sub(&q2).max_abs();
    ensure(diff <= tol, || {
        format!("seed {seed}: Q differs by {diff:.3e} (tol {tol:.1e})")
    })
}

/// Characteristic polynomial `x⁴ + c3 x³ + c2 x² + c1 x + c0` as `[c0, c1, c2, c3]`,
/// by the Faddeev–LeVerrier recursion.
pub fn charpoly4(m: &DenseMatrix) -> [f64; 4] {
    let mut c = [0.0; 5];
    c[4] = 1.0;
    let mut mk = DenseMatrix::zeros(4);
    for k in 1..=4 {
        let prev = mk.add(&DenseMatrix::identity(4).scale(c[5 - k]));
        mk = m.matmul(&prev);
        let tr: f64 = (0..4).map(|i| mk[(i, i)]).sum();
        c[4 - k] = -tr / k as f64;
    }
    [c[0], c[1], c[2], c[3]]
}

fn cubic_roots(a: f64, b: f64, c: f64) -> [Complex64; 3] {
    let p = b - a * a / 3.0;
    let q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
    let disc = Complex64::new(q * q / 4.0 + p * p * p / 27.0, 0.0).sqrt();
    let mut s = (Complex64::new(-q / 2.0, 0.0) + disc).powf(1.0 / 3.0);
    if s.norm() < 1e-300 {
        s = (Complex64::new(-q / 2.0, 0.0) - disc).powf(1.0 / 3.0);
    }
    let omega = Complex64::from_polar(1.0, std::f64::consts::TAU / 3.0);
    let mut out = [Complex64::new(0.0, 0.0); 3];
    let mut w = Complex64::new(1.0, 0.0);
    for root in &mut out {
        let u = if s.norm() < 1e-300 {
            Complex64::new(0.0, 0.0)
        } else {
            w * s - p / (3.0 * w * s)
        };
        *root = u - a / 3.0;
        w *= omega;
    }
    out
}

/// Roots of the monic quartic with coefficients `[c0, c1, c2, c3]` in closed form,
/// polished by Newton steps on the polynomial.
pub fn quartic_roots(c: [f64; 4]) -> [Complex64; 4] {
    let [d, cc, b, a] = c;
    let p = b - 3.0 * a * a / 8.0;
    let q = cc - a * b / 2.0 + a * a * a / 8.0;
    let r = d - a * cc / 4.0 + a * a * b / 16.0 - 3.0 * a.powi(4) / 256.0;
    let shift = Complex64::new(-a / 4.0, 0.0);
    let mut ys = [Complex64::new(0.0, 0.0); 4];
    if q.abs() < 1e-14 * (1.0 + p.abs() + r.abs()) {
        let disc = Complex64::new(p * p - 4.0 * r, 0.0).sqrt();
        let z1 = (Complex64::new(-p, 0.0) + disc) / 2.0;
        let z2 = (Complex64::new(-p, 0.0) - disc) / 2.0;
        ys = [z1.sqrt(), -z1.sqrt(), z2.sqrt(), -z2.sqrt()];
    } else {
        let ms = cubic_roots(p, p * p / 4.0 - r, -q * q / 8.0);
        let m = *ms
            .iter()
            .max_by(|x, y| x.norm().total_cmp(&y.norm()))
            .unwrap();
        let s2m = (2.0 * m).sqrt();
        let t = std::f64::consts::SQRT_2 * q / m.sqrt();
        for (k, sign1) in [1.0, -1.0].into_iter().enumerate() {
            let inner = (-(2.0 * p + 2.0 * m + sign1 * t)).sqrt();
            ys[2 * k] = (sign1 * s2m + inner) / 2.0;
            ys[2 * k + 1] = (sign1 * s2m - inner) / 2.0;
        }
    }
    let poly = |x: Complex64| (((x + a) * x + b) * x + cc) * x + d;
    let deriv = |x: Complex64| ((4.0 * x + 3.0 * a) * x + 2.0 * b) * x + cc;
    ys.map(|y| {
        let mut x = y + shift;
        for _ in 0..3 {
            let dp = deriv(x);
            if dp.norm() == 0.0 {
                break;
            }
            let step = poly(x) / dp;
            if !step.is_finite() {
                break;
            }
            x -= step;
        }
        x
    })
}

pub fn check_real_schur4(seed: u64) -> Check {
    let mut rng = rng(seed);
    let m = uniform_matrix(4, &mut rng);
    let r = real_schur_4x4(&m).map_err(|e| format!("seed {seed}: {e}"))?;
    let eig = r.eigenvalues();
    let oracle = quartic_roots(charpoly4(&m));
    let d = spectrum_distance(&eig, &oracle);
    ensure(d <= 1e-9, || {
        format!("seed {seed}: eigenvalue mismatch {d:.3e}")
    })?;
    let resid = frobenius_norm(&r.r.tr_matmul(&m.matmul(&r.r)).sub(&r.t));
    let norm = frobenius_norm(&m);
    ensure(
        resid <= 1e-13 * norm && r.t[(2, 1)].abs() <= 1e-12 * norm,
        || {
            format!(
                "seed {seed}: Schur residual {resid:.3e}, T[2][1] = {:.3e}",
                r.t[(2, 1)]
            )
        },
    )
}

/// Runs `check` for every seed and returns the first failure, if any.
pub fn all_seeds(seeds: impl IntoIterator<Item = u64>, check: impl Fn(u64) -> Check) -> Check {
    for s in seeds {
        check(s)?;
    }
    Ok(())
}
