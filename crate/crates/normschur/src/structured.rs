//! Cluster sub-solvers: the symmetric skew-Hamiltonian (SSkH) projection, its
//! interleaved variant, the 4×4 SSkH rotation and the two implicit Jacobi
//! solvers that act on a cluster's rows and columns of `A`.

use crate::error::{Error, Result};
use crate::matcore::{
    apply_block4_congruence, apply_givens_left, apply_givens_right, block4, even_odd_permutation,
    frobenius_norm, offdiag_sym_indices, DenseMatrix, GivensRotation, RotationLog,
};
use crate::skewschur::{pair_quads, skip_threshold, SweepStats};

pub const DEFAULT_MAX_SWEEPS: usize = 30;

/// Free entries of one interleaved 4×4 SSkH block
/// `[[h1,0,h2,ω],[0,h1,-ω,h2],[h2,-ω,h3,0],[ω,h2,0,h3]]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SskhBlockParams {
    pub h1: f64,
    pub h2: f64,
    pub h3: f64,
    pub omega: f64,
}

impl SskhBlockParams {
    pub fn to_matrix(&self) -> DenseMatrix {
        let Self {
            h1,
            h2,
            h3,
            omega: w,
        } = *self;
        DenseMatrix::from_rows(&[
            &[h1, 0.0, h2, w],
            &[0.0, h1, -w, h2],
            &[h2, -w, h3, 0.0],
            &[w, h2, 0.0, h3],
        ])
    }

    /// Parameters of `sskh2(A)[idx, idx]` read straight from the entries of `A`
    /// on the two pairs `(idx[0], idx[1])` and `(idx[2], idx[3])`.
    pub fn from_entries(a: &DenseMatrix, idx: [usize; 4]) -> Self {
        Self::from_block(&block4(a, idx))
    }

    pub fn from_block(m: &M4) -> Self {
        Self {
            h1: 0.5 * (m[0][0] + m[1][1]),
            h3: 0.5 * (m[2][2] + m[3][3]),
            h2: 0.25 * (m[0][2] + m[1][3] + m[2][0] + m[3][1]),
            omega: 0.25 * (m[0][3] - m[1][2] + m[3][0] - m[2][1]),
        }
    }
}

/// Nearest symmetric skew-Hamiltonian matrix in the grouped layout
/// `½[[sym(A11+A22), -skew(A21-A12)], [skew(A21-A12), sym(A11+A22)]]`.
pub fn sskh(a: &DenseMatrix) -> Result<DenseMatrix> {
    let n = a.n();
    if n % 2 != 0 {
        return Err(Error::OddDimension(n));
    }
    let m = n / 2;
    let mut out = DenseMatrix::zeros(n);
    for i in 0..m {
        for j in 0..m {
            let h = 0.25 * (a[(i, j)] + a[(i + m, j + m)] + a[(j, i)] + a[(j + m, i + m)]);
            let w = 0.25 * ((a[(i + m, j)] - a[(i, j + m)]) - (a[(j + m, i)] - a[(j, i + m)]));
            out[(i, j)] = h;
            out[(i + m, j + m)] = h;
            out[(i + m, j)] = w;
            out[(i, j + m)] = -w;
        }
    }
    Ok(out)
}

/// `sskh` conjugated to the interleaved pair layout: `P sskh(Pᵀ M P) Pᵀ`.
pub fn sskh2(m: &DenseMatrix) -> Result<DenseMatrix> {
    if m.n() % 2 != 0 {
        return Err(Error::OddDimension(m.n()));
    }
    let p = even_odd_permutation(m.n());
    Ok(p.conjugate_inverse(&sskh(&p.conjugate(m))?))
}

/// True if `m` already has the SSkH pattern in the grouped layout.
pub fn is_sskh(m: &DenseMatrix, tol: f64) -> bool {
    match sskh(m) {
        Ok(s) => frobenius_norm(&m.sub(&s)) <= tol * frobenius_norm(m).max(f64::MIN_POSITIVE),
        Err(_) => false,
    }
}

type M4 = [[f64; 4]; 4];

/// Display rotation in the grouped layout, requires `β > 0`.
fn grouped_rotation(p1: f64, p2: f64, p3: f64) -> M4 {
    let alpha = (p1 * p1 + p2 * p2 + p3 * p3).sqrt();
    let beta = alpha + p2;
    let k = 1.0 / (2.0 * alpha * beta).sqrt();
    [
        [beta * k, 0.0, -p3 * k, p1 * k],
        [p3 * k, p1 * k, beta * k, 0.0],
        [0.0, beta * k, -p1 * k, -p3 * k],
        [-p1 * k, p3 * k, 0.0, beta * k],
    ]
}

/// Rows 1 and 2 swapped: the 4×4 even-odd permutation times `r`.
fn permute_rows(r: &M4) -> M4 {
    [r[0], r[2], r[1], r[3]]
}

/// `Π r Π` where `Π` swaps the two index pairs.
fn swap_pairs(r: &M4) -> M4 {
    let pi = [2, 3, 0, 1];
    let mut out = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            out[i][j] = r[pi[i]][pi[j]];
        }
    }
    out
}

/// Orthogonal `R` acting on an interleaved 4×4 SSkH block such that
/// `Rᵀ B R = diag(λ, λ, μ, μ)` and `R` commutes with `I₂ ⊗ J₂`.
///
/// With `p = (-ω, (h1-h3)/2, h2)` the closed form needs `β = ‖p‖ + p2 > 0`.
/// For `p2 < 0` the two pairs are swapped first, which keeps `β ≥ ‖p‖` and
/// returns a rotation close to the identity when the coupling is small.
pub fn sskh_rotation(params: &SskhBlockParams) -> M4 {
    let p1 = -params.omega;
    let p2 = 0.5 * (params.h1 - params.h3);
    let p3 = params.h2;
    if p1 == 0.0 && p3 == 0.0 {
        let mut id = [[0.0; 4]; 4];
        for (i, row) in id.iter_mut().enumerate() {
            row[i] = 1.0;
        }
        return id;
    }
    if p2 >= 0.0 {
        permute_rows(&grouped_rotation(p1, p2, p3))
    } else {
        swap_pairs(&permute_rows(&grouped_rotation(-p1, -p2, p3)))
    }
}

/// `offdiag(sskh2(A[l, l]))` without forming the projection.
pub fn sskh2_offdiag_indices(a: &DenseMatrix, l: &[usize]) -> f64 {
    let mut s = 0.0;
    for idx in pair_quads(l) {
        let p = SskhBlockParams::from_entries(a, idx);
        s += 4.0 * (p.h2 * p.h2 + p.omega * p.omega);
    }
    s.sqrt()
}

/// Mean of the skew subdiagonal entries `skew(A)[i+1, i]` over the pairs of `l`.
pub fn cluster_sigma(a: &DenseMatrix, l: &[usize]) -> f64 {
    let m = l.len() / 2;
    if m == 0 {
        return 0.0;
    }
    let total: f64 = l
        .chunks(2)
        .map(|w| 0.5 * (a[(w[1], w[0])] - a[(w[0], w[1])]))
        .sum();
    total / m as f64
}

/// `A[l, l] - σ (I ⊗ J₂)`.
pub fn remove_sigma_shift(a: &DenseMatrix, l: &[usize], sigma: f64) -> DenseMatrix {
    let mut m = a.submatrix(l);
    for k in 0..l.len() / 2 {
        m[(2 * k + 1, 2 * k)] -= sigma;
        m[(2 * k, 2 * k + 1)] += sigma;
    }
    m
}

/// Implicit cyclic SSkH Jacobi on the cluster `l` (length ≥ 4, whole pairs).
pub fn sskh_jacobi(a: &mut DenseMatrix, q: &mut DenseMatrix, l: &[usize], rho: f64) -> SweepStats {
    let norm = frobenius_norm(a);
    sskh_jacobi_with(a, q, l, rho, norm, DEFAULT_MAX_SWEEPS)
}

pub fn sskh_jacobi_with(
    a: &mut DenseMatrix,
    q: &mut DenseMatrix,
    l: &[usize],
    rho: f64,
    norm_a: f64,
    max_sweeps: usize,
) -> SweepStats {
    assert!(
        l.len() >= 4 && l.len() % 2 == 0,
        "cluster must hold at least two pairs"
    );
    let target = rho * norm_a;
    let initial = sskh2_offdiag_indices(a, l);
    let mut current = initial;
    let mut sweeps = 0;
    let mut log = RotationLog::new();
    while current > target && sweeps < max_sweeps {
        for idx in pair_quads(l) {
            let p = SskhBlockParams::from_entries(a, idx);
            if p.h2 == 0.0 && p.omega == 0.0 {
                continue;
            }
            let r = sskh_rotation(&p);
            apply_block4_congruence(a, idx, &r);
            log.push(idx, r);
        }
        log.flush_right(q);
        sweeps += 1;
        current = sskh2_offdiag_indices(a, l);
    }
    SweepStats {
        sweeps,
        initial_offschur: initial,
        final_offschur: current,
        converged: current <= target,
    }
}

/// Rotation `G` with `Gᵀ [[h11,h12],[h12,h22]] G` diagonal, on plane `(0, 1)`.
pub fn jacobi_symmetric_rotation(h11: f64, h12: f64, h22: f64) -> GivensRotation {
    if h12 == 0.0 {
        return GivensRotation::identity(0, 1);
    }
    let kappa = (h11 - h22) / (2.0 * h12);
    let t = if kappa.is_infinite() {
        0.0
    } else {
        let sign = if kappa >= 0.0 { 1.0 } else { -1.0 };
        sign / (kappa.abs() + (1.0 + kappa * kappa).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    GivensRotation::new(0, 1, c, c * t)
}

/// Implicit cyclic symmetric Jacobi on the indices `l`, driven by `sym(A[l, l])`.
pub fn symmetric_jacobi(
    a: &mut DenseMatrix,
    q: &mut DenseMatrix,
    l: &[usize],
    rho: f64,
) -> SweepStats {
    let norm = frobenius_norm(a);
    symmetric_jacobi_with(a, q, l, rho, norm, DEFAULT_MAX_SWEEPS)
}

pub fn symmetric_jacobi_with(
    a: &mut DenseMatrix,
    q: &mut DenseMatrix,
    l: &[usize],
    rho: f64,
    norm_a: f64,
    max_sweeps: usize,
) -> SweepStats {
    let target = rho * norm_a;
    let initial = offdiag_sym_indices(a, l);
    let mut current = initial;
    let skip = skip_threshold(norm_a, a.n(), rho);
    let mut sweeps = 0;
    let mut qt = None;
    while current > target && sweeps < max_sweeps {
        let qt = qt.get_or_insert_with(|| q.transpose());
        for (pi, &i) in l.iter().enumerate() {
            for &j in &l[pi + 1..] {
                let h12 = 0.5 * (a[(i, j)] + a[(j, i)]);
                if h12.abs() <= skip {
                    continue;
                }
                let (lo, hi) = if i < j { (i, j) } else { (j, i) };
                let (h_lo, h_hi) = (a[(lo, lo)], a[(hi, hi)]);
                let g = jacobi_symmetric_rotation(h_lo, h12, h_hi).on_plane(lo, hi);
                apply_givens_left(a, &g);
                apply_givens_right(a, &g);
                apply_givens_left(qt, &g);
            }
        }
        sweeps += 1;
        current = offdiag_sym_indices(a, l);
    }
    if let Some(qt) = qt {
        *q = qt.transpose();
    }
    SweepStats {
        sweeps,
        initial_offschur: initial,
        final_offschur: current,
        converged: current <= target,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::{frobenius_inner, orthogonality_residual, sym_part};

    fn rng_matrix(n: usize, seed: u64) -> DenseMatrix {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        DenseMatrix::from_fn(n, |_, _| rng.random_range(-1.0..1.0))
    }

    fn m4(r: &M4) -> DenseMatrix {
        DenseMatrix::from_fn(4, |i, j| r[i][j])
    }

    #[test]
    fn sskh_fixes_its_range_and_kills_j() {
        let a = rng_matrix(6, 1);
        let s = sskh(&a).unwrap();
        assert!(frobenius_norm(&sskh(&s).unwrap().sub(&s)) < 1e-15);
        let mut j = DenseMatrix::zeros(6);
        for i in 0..3 {
            j[(i + 3, i)] = 1.0;
            j[(i, i + 3)] = -1.0;
        }
        assert_eq!(frobenius_norm(&sskh(&j).unwrap()), 0.0);
        assert!(matches!(
            sskh(&DenseMatrix::zeros(3)),
            Err(Error::OddDimension(3))
        ));
    }

    #[test]
    fn sskh_residual_is_orthogonal() {
        let a = rng_matrix(6, 2);
        let r = a.sub(&sskh(&a).unwrap());
        for k in 0..20 {
            let b = sskh(&rng_matrix(6, 100 + k)).unwrap();
            assert!(
                frobenius_inner(&r, &b).abs() < 1e-12 * frobenius_norm(&a) * frobenius_norm(&b)
            );
        }
    }

    #[test]
    fn sskh2_idempotent_and_block_params() {
        let m = rng_matrix(8, 3);
        let s = sskh2(&m).unwrap();
        assert!(frobenius_norm(&sskh2(&s).unwrap().sub(&s)) < 1e-15);
        assert_eq!(frobenius_norm(&sskh2(&DenseMatrix::zeros(4)).unwrap()), 0.0);
        let idx = [2, 3, 6, 7];
        let p = SskhBlockParams::from_entries(&m, idx);
        assert!(frobenius_norm(&p.to_matrix().sub(&s.submatrix(&idx))) < 1e-15);
        let b = SskhBlockParams {
            h1: 0.3,
            h2: -1.2,
            h3: 2.0,
            omega: 0.7,
        }
        .to_matrix();
        assert!(frobenius_norm(&sskh2(&b).unwrap().sub(&b)) < 1e-15);
    }

    #[test]
    fn rotation_identity_case() {
        let p = SskhBlockParams {
            h1: 2.0,
            h2: 0.0,
            h3: 0.0,
            omega: 0.0,
        };
        assert_eq!(m4(&sskh_rotation(&p)), DenseMatrix::identity(4));
        let p = SskhBlockParams {
            h1: 0.0,
            h2: 0.0,
            h3: 2.0,
            omega: 0.0,
        };
        assert_eq!(m4(&sskh_rotation(&p)), DenseMatrix::identity(4));
    }

    #[test]
    fn rotation_diagonalizes_random_blocks() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        let mut j = DenseMatrix::zeros(4);
        j[(1, 0)] = 1.0;
        j[(0, 1)] = -1.0;
        j[(3, 2)] = 1.0;
        j[(2, 3)] = -1.0;
        for _ in 0..200 {
            let p = SskhBlockParams {
                h1: rng.random_range(-2.0..2.0),
                h2: rng.random_range(-2.0..2.0),
                h3: rng.random_range(-2.0..2.0),
                omega: rng.random_range(-2.0..2.0),
            };
            let b = p.to_matrix();
            let r = m4(&sskh_rotation(&p));
            assert!(orthogonality_residual(&r) < 1e-14);
            let t = r.transpose().matmul(&b).matmul(&r);
            let off = crate::matcore::offdiag(&t);
            assert!(off < 1e-13 * frobenius_norm(&b), "{t:?}");
            assert!((t[(0, 0)] - t[(1, 1)]).abs() < 1e-13);
            assert!((t[(2, 2)] - t[(3, 3)]).abs() < 1e-13);
            assert!(frobenius_norm(&r.matmul(&j).sub(&j.matmul(&r))) < 1e-13);
        }
    }

    #[test]
    fn rotation_for_pure_omega() {
        let p = SskhBlockParams {
            h1: 0.5,
            h2: 0.0,
            h3: 0.5,
            omega: 1.0,
        };
        let r = m4(&sskh_rotation(&p));
        let t = r.transpose().matmul(&p.to_matrix()).matmul(&r);
        let mut d: Vec<f64> = (0..4).map(|i| t[(i, i)]).collect();
        d.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let expect = [-0.5, -0.5, 1.5, 1.5];
        for (x, y) in d.iter().zip(expect) {
            assert!((x - y).abs() < 1e-14);
        }
    }

    #[test]
    fn jacobi_rotation_worked_example() {
        let s3 = 3f64.sqrt();
        let g = jacobi_symmetric_rotation(-1.0, s3, 1.0);
        let mut h = DenseMatrix::from_rows(&[&[-1.0, s3], &[s3, 1.0]]);
        crate::matcore::apply_givens_similarity(&mut h, &g);
        assert!(h[(0, 1)].abs() < 1e-15 && h[(1, 0)].abs() < 1e-15);
        let mut ev = [h[(0, 0)], h[(1, 1)]];
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((ev[0] + 2.0).abs() < 1e-15 && (ev[1] - 2.0).abs() < 1e-15);
        assert_eq!(
            jacobi_symmetric_rotation(1.0, 0.0, 3.0),
            GivensRotation::identity(0, 1)
        );
    }

    #[test]
    fn symmetric_jacobi_embedded_block() {
        let n = 10;
        let base = sym_part(&rng_matrix(n, 8));
        let l = [1usize, 2, 4, 5, 7, 9];
        let mut a = DenseMatrix::zeros(n);
        for &i in &l {
            for &j in &l {
                a[(i, j)] = base[(i, j)];
            }
        }
        let orig = a.clone();
        let mut q = DenseMatrix::identity(n);
        let st = symmetric_jacobi(&mut a, &mut q, &l, 1e-15);
        assert!(st.converged);
        assert!(crate::matcore::offdiag(&a) < 1e-14 * frobenius_norm(&orig));
        let back = q.matmul(&a).matmul(&q.transpose());
        assert!(frobenius_norm(&back.sub(&orig)) < 1e-13);
    }
}
