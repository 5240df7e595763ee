//! Paardekooper's method for the skew-symmetric part: the 2×2 SVD kernel, the
//! closed-form 4×4 and 3×3 skew Schur steps and the cyclic sweep.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matcore::{
    apply_block4_congruence, block4, frobenius_norm, offschur, offschur_skew, DenseMatrix,
    GivensRotation, RotationLog,
};

/// Two commuting rotations acting on disjoint planes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RotationPair {
    pub g1: GivensRotation,
    pub g2: GivensRotation,
}

impl RotationPair {
    pub fn new(g1: GivensRotation, g2: GivensRotation) -> Self {
        debug_assert!(
            g1.i != g2.i && g1.i != g2.j && g1.j != g2.i && g1.j != g2.j,
            "rotation planes must be disjoint"
        );
        Self { g1, g2 }
    }

    /// The product `G1 G2` as a dense `n×n` matrix.
    pub fn to_dense(&self, n: usize) -> DenseMatrix {
        self.g1.to_dense(n).matmul(&self.g2.to_dense(n))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SweepStats {
    pub sweeps: usize,
    pub initial_offschur: f64,
    pub final_offschur: f64,
    pub converged: bool,
}

/// Angles and diagonal of the rotation-based 2×2 SVD
/// `G(α1)ᵀ · [[a11, a12], [a21, a22]] · G(α2) = diag(d1, d2)`.
///
/// `d1` and `d2` may be negative. `α1` is the principal angle, so the rotations stay
/// close to the identity on nearly diagonal input.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Svd2 {
    pub alpha1: f64,
    pub alpha2: f64,
    pub d1: f64,
    pub d2: f64,
}

pub fn two_by_two_svd(a11: f64, a12: f64, a21: f64, a22: f64) -> Svd2 {
    let (a, b, e, d) = (a11, a12, a21, a22);
    let num = 2.0 * (e * a + b * d);
    let den = a * a + b * b - d * d - e * e;
    let alpha1 = if den != 0.0 {
        0.5 * (num / den).atan()
    } else if num == 0.0 {
        0.0
    } else {
        std::f64::consts::FRAC_PI_4 * num.signum()
    };
    let (s1, c1) = alpha1.sin_cos();
    let (x1, y1) = (c1 * a + s1 * e, c1 * b + s1 * d);
    let (x2, y2) = (-s1 * a + c1 * e, -s1 * b + c1 * d);
    let r1 = x1 * x1 + y1 * y1;
    let r2 = x2 * x2 + y2 * y2;
    let alpha2 = if r1 == 0.0 && r2 == 0.0 {
        0.0
    } else if r1 >= r2 {
        y1.atan2(x1)
    } else {
        (-x2).atan2(y2)
    };
    let (s2, c2) = alpha2.sin_cos();
    Svd2 {
        alpha1,
        alpha2,
        d1: c2 * x1 + s2 * y1,
        d2: -s2 * x2 + c2 * y2,
    }
}

/// Orthogonal `G` and the two nonnegative singular values of a 4×4 skew block.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SkewSchur4 {
    pub g: [[f64; 4]; 4],
    pub sigma1: f64,
    pub sigma2: f64,
}

impl SkewSchur4 {
    pub fn g_dense(&self) -> DenseMatrix {
        DenseMatrix::from_fn(4, |i, j| self.g[i][j])
    }
}

type M4 = [[f64; 4]; 4];

fn m4_identity() -> M4 {
    let mut g = [[0.0; 4]; 4];
    for (i, row) in g.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    g
}

fn m4_mul(a: &M4, b: &M4) -> M4 {
    let mut c = [[0.0; 4]; 4];
    for i in 0..4 {
        for k in 0..4 {
            for j in 0..4 {
                c[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    c
}

/// `Gᵀ W G`.
fn m4_congruence(w: &M4, g: &M4) -> M4 {
    let wg = m4_mul(w, g);
    let mut out = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            out[i][j] = (0..4).map(|k| g[k][i] * wg[k][j]).sum();
        }
    }
    out
}

/// Dense form of `G(α1, r1, r2) · G(α2, c1, c2)` on disjoint planes.
fn pair_matrix(rows: (usize, usize), alpha1: f64, cols: (usize, usize), alpha2: f64) -> M4 {
    let mut g = m4_identity();
    for ((i, j), alpha) in [(rows, alpha1), (cols, alpha2)] {
        let (s, c) = alpha.sin_cos();
        g[i][i] = c;
        g[j][j] = c;
        g[j][i] = s;
        g[i][j] = -s;
    }
    g
}

/// One rotation pair: diagonalize the coupling block `W[rows, cols]`.
fn annihilate_coupling(w: &M4, rows: (usize, usize), cols: (usize, usize)) -> M4 {
    let svd = two_by_two_svd(
        w[rows.0][cols.0],
        w[rows.0][cols.1],
        w[rows.1][cols.0],
        w[rows.1][cols.1],
    );
    pair_matrix(rows, svd.alpha1, cols, svd.alpha2)
}

/// Real Schur form of a 4×4 skew-symmetric matrix by two rotation pairs and a
/// sign fix. Returns `G` with `Gᵀ Ω G = diag([[0,-σ1],[σ1,0]], [[0,-σ2],[σ2,0]])`.
pub fn schur_skew_4x4(omega: &DenseMatrix) -> Result<SkewSchur4> {
    if omega.n() != 4 {
        return Err(Error::Shape(format!(
            "expected 4x4, got {}x{}",
            omega.n(),
            omega.n()
        )));
    }
    let norm = frobenius_norm(omega);
    let asym = frobenius_norm(&omega.add(&omega.transpose()));
    if asym > 1e-13 * norm {
        return Err(Error::NotSkew(asym / norm));
    }
    let mut w = [[0.0; 4]; 4];
    for (i, row) in w.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = 0.5 * (omega[(i, j)] - omega[(j, i)]);
        }
    }
    Ok(schur_skew_4x4_raw(&w))
}

/// Same as [`schur_skew_4x4`] on an already skew array, without validation.
pub fn schur_skew_4x4_raw(w0: &M4) -> SkewSchur4 {
    skew_step(w0, 0.0)
}

/// 4×4 step in which singular values closer than `merge` times the coupling
/// norm are treated as equal. With `merge > 0` the result may keep a cross
/// term of size about `|σ1 - σ2|` between the two pairs.
fn skew_step(w0: &M4, merge: f64) -> SkewSchur4 {
    let g1 = annihilate_coupling(w0, (1, 3), (0, 2));
    let w1 = m4_congruence(w0, &g1);
    let g2 = annihilate_coupling(&w1, (1, 2), (0, 3));
    let w2 = m4_congruence(&w1, &g2);
    let mut g = m4_mul(&g1, &g2);
    let mut sigma1 = w2[1][0];
    let mut sigma2 = w2[3][2];
    if sigma1 < 0.0 {
        sigma1 = -sigma1;
        for row in g.iter_mut() {
            row[1] = -row[1];
        }
    }
    if sigma2 < 0.0 {
        sigma2 = -sigma2;
        for row in g.iter_mut() {
            row[3] = -row[3];
        }
    }
    let coupling =
        (w0[2][0].powi(2) + w0[2][1].powi(2) + w0[3][0].powi(2) + w0[3][1].powi(2)).sqrt();
    let (g, swapped) = nearest_equivalent(&g, sigma1, sigma2, merge * coupling);
    if swapped {
        std::mem::swap(&mut sigma1, &mut sigma2);
    }
    SkewSchur4 { g, sigma1, sigma2 }
}

/// Singular values closer than this (relative) are treated as equal.
const DEGENERATE_TOL: f64 = 1e-14;

/// Merge factor used inside sweeps: nearly equal singular values are split by
/// later sweeps or by the cluster solvers, so a rotation close to the identity
/// is preferred over an exact but large one.
const SWEEP_MERGE: f64 = 0.1;

/// Below this the unitary part of `G` is too close to singular for its polar
/// factor to be well defined, and the per-pair choice is used instead.
const POLAR_MIN_DET: f64 = 0.25;

fn block_entry(g: &M4, bi: usize, bj: usize) -> Complex64 {
    let (r, c) = (2 * bi, 2 * bj);
    Complex64::new(
        0.5 * (g[r][c] + g[r + 1][c + 1]),
        0.5 * (g[r + 1][c] - g[r][c + 1]),
    )
}

fn realify2(h: &[[Complex64; 2]; 2]) -> M4 {
    let mut out = [[0.0; 4]; 4];
    for bi in 0..2 {
        for bj in 0..2 {
            let z = h[bi][bj];
            let (r, c) = (2 * bi, 2 * bj);
            out[r][c] = z.re;
            out[r][c + 1] = -z.im;
            out[r + 1][c] = z.im;
            out[r + 1][c + 1] = z.re;
        }
    }
    out
}

/// Unitary polar factor of a 2×2 complex matrix.
fn polar2(m: &[[Complex64; 2]; 2]) -> Option<[[Complex64; 2]; 2]> {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let phase = if det.norm() > 0.0 {
        det / det.norm()
    } else {
        Complex64::new(1.0, 0.0)
    };
    let adj_h = [
        [m[1][1].conj(), -m[1][0].conj()],
        [-m[0][1].conj(), m[0][0].conj()],
    ];
    let mut w = [[Complex64::new(0.0, 0.0); 2]; 2];
    let mut fro = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            w[i][j] = m[i][j] + phase * adj_h[i][j];
            fro += w[i][j].norm_sqr();
        }
    }
    let scale = (0.5 * fro).sqrt();
    if !(scale > 0.0) {
        return None;
    }
    for row in w.iter_mut() {
        for z in row.iter_mut() {
            *z /= scale;
        }
    }
    Some(w)
}

/// Among the Schur bases equivalent to `G`, the one closest to the identity.
///
/// Right factors commuting with `diag(J, J)` keep the form: plane rotations and
/// a pair swap in general, the whole unitary group when `σ1 = σ2`.
fn nearest_equivalent(g: &M4, sigma1: f64, sigma2: f64, slack: f64) -> (M4, bool) {
    let zero = Complex64::new(0.0, 0.0);
    let b = [
        [block_entry(g, 0, 0), block_entry(g, 0, 1)],
        [block_entry(g, 1, 0), block_entry(g, 1, 1)],
    ];
    let tol = (DEGENERATE_TOL * (sigma1 + sigma2)).max(slack);
    let det = b[0][0] * b[1][1] - b[0][1] * b[1][0];
    let h = if (sigma1 - sigma2).abs() <= tol && det.norm() >= POLAR_MIN_DET {
        match polar2(&b) {
            Some(w) => [
                [w[0][0].conj(), w[1][0].conj()],
                [w[0][1].conj(), w[1][1].conj()],
            ],
            None => return (*g, false),
        }
    } else {
        let unit = |z: Complex64| {
            if z.norm() > 0.0 {
                (z / z.norm()).conj()
            } else {
                Complex64::new(1.0, 0.0)
            }
        };
        let keep = b[0][0].norm() + b[1][1].norm();
        let swap = b[0][1].norm() + b[1][0].norm();
        if swap > keep {
            let h = [[zero, unit(b[1][0])], [unit(b[0][1]), zero]];
            return (m4_mul(g, &realify2(&h)), true);
        }
        [[unit(b[0][0]), zero], [zero, unit(b[1][1])]]
    };
    (m4_mul(g, &realify2(&h)), false)
}

/// Result of the 3×3 skew Schur step.
#[derive(Clone, Debug, PartialEq)]
pub struct SkewSchur3 {
    pub g: DenseMatrix,
    pub sigma: f64,
}

/// `Gᵀ Ω G = [[0,-σ,0],[σ,0,0],[0,0,0]]` with `σ = sqrt(ω21² + ω31² + ω32²)`.
pub fn schur_skew_3x3(omega: &DenseMatrix) -> Result<SkewSchur3> {
    if omega.n() != 3 {
        return Err(Error::Shape(format!(
            "expected 3x3, got {}x{}",
            omega.n(),
            omega.n()
        )));
    }
    let norm = frobenius_norm(omega);
    let asym = frobenius_norm(&omega.add(&omega.transpose()));
    if asym > 1e-13 * norm {
        return Err(Error::NotSkew(asym / norm));
    }
    let (w21, w31) = (omega[(1, 0)], omega[(2, 0)]);
    let r = w21.hypot(w31);
    let g1 = if r == 0.0 {
        GivensRotation::identity(1, 2)
    } else {
        GivensRotation::new(1, 2, w21 / r, w31 / r)
    };
    let mut w = omega.clone();
    crate::matcore::apply_givens_similarity(&mut w, &g1);
    let (w21p, w32p) = (w[(1, 0)], w[(2, 1)]);
    let r2 = w21p.hypot(w32p);
    let g2 = if r2 == 0.0 {
        GivensRotation::identity(0, 2)
    } else {
        GivensRotation::new(0, 2, w21p / r2, -w32p / r2)
    };
    crate::matcore::apply_givens_similarity(&mut w, &g2);
    let mut g = g1.to_dense(3).matmul(&g2.to_dense(3));
    let mut sigma = w[(1, 0)];
    if sigma < 0.0 {
        sigma = -sigma;
        for i in 0..3 {
            g[(i, 1)] = -g[(i, 1)];
        }
    }
    Ok(SkewSchur3 { g, sigma })
}

/// Pivot quadruples `[i, i+1, j, j+1]` over the pair list `l` in cyclic order.
pub fn pair_quads(l: &[usize]) -> impl Iterator<Item = [usize; 4]> + '_ {
    let m = l.len() / 2;
    (0..m).flat_map(move |p| {
        ((p + 1)..m).map(move |q| [l[2 * p], l[2 * p + 1], l[2 * q], l[2 * q + 1]])
    })
}

/// Relative decrease below which a sweep counts as stagnant.
pub const STAGNATION: f64 = 0.01;

/// Coupling magnitude below which a 4×4 subproblem is left untouched.
///
/// With a target `ρ‖A‖_F`, couplings at most `ρ‖A‖_F / n` are skipped: all of
/// them together stay below the target.
pub fn skip_threshold(norm_a: f64, n: usize, rho: f64) -> f64 {
    rho.max(1e-16) * norm_a / n.max(1) as f64
}

fn skew_block(m: &M4, implicit: bool) -> M4 {
    if !implicit {
        return *m;
    }
    std::array::from_fn(|p| std::array::from_fn(|q| 0.5 * (m[p][q] - m[q][p])))
}

fn coupling_max(w: &M4) -> f64 {
    [w[2][0], w[2][1], w[3][0], w[3][1]]
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()))
}

fn sweep_with_norm(a: &mut DenseMatrix, q: &mut DenseMatrix, implicit: bool, tol: f64) {
    let n = a.n();
    let all: Vec<usize> = (0..n).collect();
    let mut log = RotationLog::new();
    for idx in pair_quads(&all) {
        let w = skew_block(&block4(a, idx), implicit);
        if coupling_max(&w) <= tol {
            continue;
        }
        let step = skew_step(&w, SWEEP_MERGE);
        apply_block4_congruence(a, idx, &step.g);
        log.push(idx, step.g);
    }
    log.flush_right(q);
}

fn measure(a: &DenseMatrix, implicit: bool) -> f64 {
    if implicit {
        offschur_skew(a)
    } else {
        offschur(a)
    }
}

/// One cyclic sweep. With `implicit` the rotations come from `skew(A)` and are
/// applied to `A`; otherwise `A` is taken to be skew already.
pub fn paardekooper_sweep(a: &mut DenseMatrix, q: &mut DenseMatrix, implicit: bool) -> SweepStats {
    assert!(a.n() % 2 == 0, "sweeps need an even dimension");
    let before = measure(a, implicit);
    let tol = skip_threshold(frobenius_norm(a), a.n(), 0.0);
    sweep_with_norm(a, q, implicit, tol);
    let after = measure(a, implicit);
    SweepStats {
        sweeps: 1,
        initial_offschur: before,
        final_offschur: after,
        converged: false,
    }
}

/// Implicit sweeps until `offschur(skew(A)) ≤ ρ‖A‖_F` or `max_sweeps`.
pub fn paardekooper_until(
    a: &mut DenseMatrix,
    q: &mut DenseMatrix,
    rho: f64,
    max_sweeps: usize,
) -> SweepStats {
    let norm = frobenius_norm(a);
    paardekooper_run(a, q, rho, max_sweeps, true, norm)
}

/// Sweep loop with an explicit reference norm and variant flag. Also stops
/// once a sweep no longer reduces the off-Schur norm by [`STAGNATION`].
pub fn paardekooper_run(
    a: &mut DenseMatrix,
    q: &mut DenseMatrix,
    rho: f64,
    max_sweeps: usize,
    implicit: bool,
    norm_a: f64,
) -> SweepStats {
    assert!(a.n() % 2 == 0, "sweeps need an even dimension");
    let target = rho * norm_a;
    let initial = measure(a, implicit);
    let mut current = initial;
    let tol = skip_threshold(norm_a, a.n(), rho);
    let mut sweeps = 0;
    while current > target && sweeps < max_sweeps {
        sweep_with_norm(a, q, implicit, tol);
        sweeps += 1;
        let previous = current;
        current = measure(a, implicit);
        if current > (1.0 - STAGNATION) * previous {
            break;
        }
    }
    SweepStats {
        sweeps,
        initial_offschur: initial,
        final_offschur: current,
        converged: current <= target,
    }
}
