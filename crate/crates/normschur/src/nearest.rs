//! Nearest ortho-symplectic matrix through the polar factor of the associated
//! complex matrix, plus computable distance bounds.
//!
//! Throughout, `J = J₂ ⊗ I_m = [[0, -I], [I, 0]]`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matcore::{frobenius_norm, ComplexDenseMatrix, DenseMatrix};

const NEWTON_MAX_ITERS: usize = 40;
const NEWTON_TOL: f64 = 1e-14;
const NEWTON_COND_LIMIT: f64 = 1e8;

/// Unitary polar factor `U V*` of `B = U Σ V*`.
#[derive(Clone, Debug)]
pub struct PolarResult {
    pub unitary_factor: ComplexDenseMatrix,
    /// `‖Σ - I‖_F`.
    pub hermitian_norm_gap: f64,
    /// Set when `B` is numerically rank deficient, so the factor is not unique.
    pub non_unique: bool,
}

/// Polar factor by scaled Newton iteration, with a one-sided Jacobi SVD
/// fallback for ill-conditioned or singular input.
pub fn complex_polar(b: &ComplexDenseMatrix) -> Result<PolarResult> {
    if !b.is_finite() {
        return Err(Error::Config("polar factor of a non-finite matrix".into()));
    }
    match polar_newton(b) {
        Some(u) => {
            let gap = sigma_gap_from_factor(b, &u);
            Ok(PolarResult {
                unitary_factor: u,
                hermitian_norm_gap: gap,
                non_unique: false,
            })
        }
        None => Ok(polar_svd(b)),
    }
}

fn polar_newton(b: &ComplexDenseMatrix) -> Option<ComplexDenseMatrix> {
    let mut x = b.clone();
    let mut scaled = true;
    for _ in 0..NEWTON_MAX_ITERS {
        let inv = x.inverse()?;
        let nx = x.frobenius_norm();
        let ninv = inv.frobenius_norm();
        if !(nx * ninv).is_finite() || nx * ninv > NEWTON_COND_LIMIT * x.m() as f64 {
            return None;
        }
        let gamma = if scaled { (ninv / nx).sqrt() } else { 1.0 };
        let inv_adj = inv.adjoint();
        let next = ComplexDenseMatrix::from_fn(x.m(), |i, j| {
            (x[(i, j)] * gamma + inv_adj[(i, j)] / gamma) * 0.5
        });
        let diff = next.sub(&x).frobenius_norm();
        x = next;
        if diff <= 1e-2 * nx {
            scaled = false;
        }
        if diff <= NEWTON_TOL * nx {
            break;
        }
    }
    Some(x)
}

/// `‖H - I‖_F` with `H = U* B` the Hermitian polar factor.
fn sigma_gap_from_factor(b: &ComplexDenseMatrix, u: &ComplexDenseMatrix) -> f64 {
    let h = u.adjoint().matmul(b);
    let m = h.m();
    let hs = ComplexDenseMatrix::from_fn(m, |i, j| {
        let v = (h[(i, j)] + h[(j, i)].conj()) * 0.5;
        if i == j {
            v - 1.0
        } else {
            v
        }
    });
    hs.frobenius_norm()
}

/// Singular value decomposition `B = U diag(σ) V*` by one-sided Jacobi.
pub fn complex_svd(b: &ComplexDenseMatrix) -> (ComplexDenseMatrix, Vec<f64>, ComplexDenseMatrix) {
    let m = b.m();
    let mut w = b.clone();
    let mut v = ComplexDenseMatrix::identity(m);
    for _ in 0..60 {
        let mut rotated = false;
        for p in 0..m {
            for q in p + 1..m {
                let mut alpha = 0.0;
                let mut beta = 0.0;
                let mut gamma = Complex64::new(0.0, 0.0);
                for k in 0..m {
                    alpha += w[(k, p)].norm_sqr();
                    beta += w[(k, q)].norm_sqr();
                    gamma += w[(k, p)].conj() * w[(k, q)];
                }
                let g = gamma.norm();
                if g <= 1e-15 * (alpha * beta).sqrt() || g == 0.0 {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * g);
                let sgn = if zeta >= 0.0 { 1.0 } else { -1.0 };
                let t = sgn / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let ph = (gamma / g).conj();
                for mat in [&mut w, &mut v] {
                    for k in 0..m {
                        let (x, y) = (mat[(k, p)], mat[(k, q)] * ph);
                        mat[(k, p)] = x * c - y * s;
                        mat[(k, q)] = x * s + y * c;
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let sigma: Vec<f64> = (0..m)
        .map(|k| (0..m).map(|i| w[(i, k)].norm_sqr()).sum::<f64>().sqrt())
        .collect();
    let smax = sigma.iter().cloned().fold(0.0, f64::max);
    let mut u = ComplexDenseMatrix::zeros(m);
    let mut filled = vec![false; m];
    for k in 0..m {
        if sigma[k] > 1e-14 * smax.max(f64::MIN_POSITIVE) * m as f64 {
            for i in 0..m {
                u[(i, k)] = w[(i, k)] / sigma[k];
            }
            filled[k] = true;
        }
    }
    complete_orthonormal(&mut u, &filled);
    (u, sigma, v)
}

/// Fills the columns of `u` not marked in `filled` with an orthonormal
/// completion drawn from the standard basis.
fn complete_orthonormal(u: &mut ComplexDenseMatrix, filled: &[bool]) {
    let m = u.m();
    let mut basis = 0;
    let mut done: Vec<usize> = (0..m).filter(|&k| filled[k]).collect();
    for k in 0..m {
        if filled[k] {
            continue;
        }
        loop {
            let mut x: Vec<Complex64> = (0..m)
                .map(|i| Complex64::new(if i == basis { 1.0 } else { 0.0 }, 0.0))
                .collect();
            basis += 1;
            for _ in 0..2 {
                for &c in &done {
                    let d: Complex64 = (0..m).map(|i| u[(i, c)].conj() * x[i]).sum();
                    for i in 0..m {
                        x[i] -= d * u[(i, c)];
                    }
                }
            }
            let nrm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if nrm > 0.5 {
                for i in 0..m {
                    u[(i, k)] = x[i] / nrm;
                }
                done.push(k);
                break;
            }
        }
    }
}

fn polar_svd(b: &ComplexDenseMatrix) -> PolarResult {
    let (u, sigma, v) = complex_svd(b);
    let smax = sigma.iter().cloned().fold(0.0, f64::max);
    let smin = sigma.iter().cloned().fold(f64::INFINITY, f64::min);
    let gap = sigma.iter().map(|s| (s - 1.0).powi(2)).sum::<f64>().sqrt();
    PolarResult {
        unitary_factor: u.matmul(&v.adjoint()),
        hermitian_norm_gap: gap,
        non_unique: smin <= 1e-14 * smax * b.m() as f64,
    }
}

/// `J = [[0, -I_m], [I_m, 0]]`.
pub fn symplectic_j(n: usize) -> DenseMatrix {
    let m = n / 2;
    DenseMatrix::from_fn(n, |i, j| {
        if i >= m && j + m == i {
            1.0
        } else if i < m && j == i + m {
            -1.0
        } else {
            0.0
        }
    })
}

/// Real `2m×2m` representation `[[Re X, -Im X], [Im X, Re X]]`.
pub fn realify(x: &ComplexDenseMatrix) -> DenseMatrix {
    let m = x.m();
    DenseMatrix::from_fn(2 * m, |i, j| {
        let z = x[(i % m, j % m)];
        match (i < m, j < m) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    })
}

/// `(A11 + A22)/2 + i (A21 - A12)/2`.
pub fn complexify(a: &DenseMatrix) -> ComplexDenseMatrix {
    let m = a.n() / 2;
    ComplexDenseMatrix::from_fn(m, |i, j| {
        Complex64::new(
            0.5 * (a[(i, j)] + a[(i + m, j + m)]),
            0.5 * (a[(i + m, j)] - a[(i, j + m)]),
        )
    })
}

/// `‖AJ - JA‖_F`.
pub fn j_commutator_norm(a: &DenseMatrix) -> f64 {
    let j = symplectic_j(a.n());
    frobenius_norm(&a.matmul(&j).sub(&j.matmul(a)))
}

#[derive(Clone, Debug)]
pub struct NearestOsp {
    pub r: DenseMatrix,
    /// `‖A - R★‖_F`.
    pub distance: f64,
    /// `sqrt(2‖Σ - I‖² + ¼‖AJ - JA‖²)`.
    pub distance_from_identity: f64,
    pub non_unique: bool,
}

pub fn nearest_ortho_symplectic(a: &DenseMatrix) -> Result<NearestOsp> {
    if a.n() % 2 != 0 {
        return Err(Error::OddDimension(a.n()));
    }
    let polar = complex_polar(&complexify(a))?;
    let r = realify(&polar.unitary_factor);
    let distance = frobenius_norm(&a.sub(&r));
    let comm = j_commutator_norm(a);
    let ident = (2.0 * polar.hermitian_norm_gap.powi(2) + 0.25 * comm * comm).sqrt();
    Ok(NearestOsp {
        r,
        distance,
        distance_from_identity: ident,
        non_unique: polar.non_unique,
    })
}

/// Upper bounds on the distance to the ortho-symplectic group.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OspBounds {
    /// `¼(‖AᵀA - I‖ + ‖AᵀJA - J‖)² + ¼‖AJ - JA‖²`, a bound on the squared distance.
    pub squared: f64,
    /// `½(‖AᵀA - I‖ + ‖AᵀJA - J‖ + ‖AJ - JA‖)`, a bound on the distance.
    pub linear: f64,
}

pub fn osp_distance_bound(a: &DenseMatrix) -> Result<OspBounds> {
    let n = a.n();
    if n % 2 != 0 {
        return Err(Error::OddDimension(n));
    }
    let j = symplectic_j(n);
    let ata = a.tr_matmul(a);
    let e1 = frobenius_norm(&ata.sub(&DenseMatrix::identity(n)));
    let e2 = frobenius_norm(&a.tr_matmul(&j.matmul(a)).sub(&j));
    let e3 = j_commutator_norm(a);
    Ok(OspBounds {
        squared: 0.25 * (e1 + e2).powi(2) + 0.25 * e3 * e3,
        linear: 0.5 * (e1 + e2 + e3),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polar_of_identity_and_scaled_identity() {
        let p = complex_polar(&ComplexDenseMatrix::identity(3)).unwrap();
        assert!(
            p.unitary_factor
                .sub(&ComplexDenseMatrix::identity(3))
                .frobenius_norm()
                < 1e-15
        );
        assert!(p.hermitian_norm_gap < 1e-15);
        let two = ComplexDenseMatrix::identity(2).scale(2.0);
        let p = complex_polar(&two).unwrap();
        assert!(
            p.unitary_factor
                .sub(&ComplexDenseMatrix::identity(2))
                .frobenius_norm()
                < 1e-14
        );
        assert!((p.hermitian_norm_gap - 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn singular_input_uses_svd_path() {
        let mut b = ComplexDenseMatrix::zeros(2);
        b[(0, 0)] = Complex64::new(0.0, 3.0);
        let p = complex_polar(&b).unwrap();
        assert!(p.non_unique);
        let u = &p.unitary_factor;
        assert!(
            u.adjoint()
                .matmul(u)
                .sub(&ComplexDenseMatrix::identity(2))
                .frobenius_norm()
                < 1e-14
        );
        assert!((u[(0, 0)] - Complex64::new(0.0, 1.0)).norm() < 1e-14);
        assert!((p.hermitian_norm_gap - 5f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn two_identity_distance() {
        let a = DenseMatrix::identity(2).scale(2.0);
        let r = nearest_ortho_symplectic(&a).unwrap();
        assert!(frobenius_norm(&r.r.sub(&DenseMatrix::identity(2))) < 1e-14);
        assert!((r.distance - 2f64.sqrt()).abs() < 1e-14);
        let b = osp_distance_bound(&a).unwrap();
        // ‖AᵀA - I‖ = ‖3I‖ = 3√2 and ‖AᵀJA - J‖ = ‖3J‖ = 3√2.
        assert!((b.squared - 18.0).abs() < 1e-12);
        assert!((b.linear - 3.0 * 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn osp_input_is_fixed() {
        let (s, c) = 0.7f64.sin_cos();
        let a = DenseMatrix::from_rows(&[&[c, -s], &[s, c]]);
        let r = nearest_ortho_symplectic(&a).unwrap();
        assert!(r.distance < 1e-14);
        let b = osp_distance_bound(&a).unwrap();
        assert!(b.squared < 1e-28 && b.linear < 1e-14);
    }

    #[test]
    fn realify_complexify_roundtrip() {
        let x = ComplexDenseMatrix::from_fn(3, |i, j| {
            Complex64::new(i as f64 - j as f64, (i * j) as f64)
        });
        let back = complexify(&realify(&x));
        assert!(back.sub(&x).frobenius_norm() == 0.0);
        let j = symplectic_j(6);
        let r = realify(&x);
        assert!(frobenius_norm(&r.matmul(&j).sub(&j.matmul(&r))) == 0.0);
    }
}
