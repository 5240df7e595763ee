//! General-purpose Jacobi-like comparators: a cyclic method built on the real
//! Schur form of 4×4 submatrices, and the randomized Hermitian variant.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::matcore::{
    apply_block4_congruence, block4, frobenius_norm, offschur, offschur_indices,
    ComplexDenseMatrix, DenseMatrix, RotationLog,
};
use crate::skewschur::{pair_quads, skip_threshold, SweepStats};

type M4 = [[f64; 4]; 4];

pub const MAX_QR_STEPS: usize = 120;
pub const DEFAULT_MAX_SWEEPS: usize = 30;
pub use crate::skewschur::STAGNATION;

/// `Rᵀ M R = T` with `T` quasi-upper-triangular and `T[2][1] = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct Schur4Result {
    pub r: DenseMatrix,
    pub t: DenseMatrix,
}

impl Schur4Result {
    /// Eigenvalues read off the diagonal blocks of `T`.
    pub fn eigenvalues(&self) -> Vec<Complex64> {
        let t: M4 = std::array::from_fn(|i| std::array::from_fn(|j| self.t[(i, j)]));
        block_eigenvalues(&t)
    }
}

fn identity4() -> M4 {
    std::array::from_fn(|i| std::array::from_fn(|j| if i == j { 1.0 } else { 0.0 }))
}

fn norm4(m: &M4) -> f64 {
    m.iter().flatten().map(|v| v * v).sum::<f64>().sqrt()
}

/// `T ← Rᵀ T R`, `Z ← Z R` for `R = [[cs, -sn], [sn, cs]]` on plane `(i, j)`.
fn rot(t: &mut M4, z: &mut M4, i: usize, j: usize, cs: f64, sn: f64) {
    for col in 0..4 {
        let (x, y) = (t[i][col], t[j][col]);
        t[i][col] = cs * x + sn * y;
        t[j][col] = -sn * x + cs * y;
    }
    for m in [&mut *t, &mut *z] {
        for row in m.iter_mut() {
            let (x, y) = (row[i], row[j]);
            row[i] = cs * x + sn * y;
            row[j] = -sn * x + cs * y;
        }
    }
}

/// Householder vector with `v[0] = 1` and `tau` so that `(I - tau v vᵀ) x = β e₁`.
fn house(x: &[f64]) -> (Vec<f64>, f64) {
    let xnorm = x[1..].iter().fold(0.0f64, |acc, v| acc.hypot(*v));
    let mut v = x.to_vec();
    v[0] = 1.0;
    if xnorm == 0.0 {
        return (v, 0.0);
    }
    let alpha = x[0];
    let beta = -alpha.hypot(xnorm).copysign(alpha);
    let tau = (beta - alpha) / beta;
    let scale = 1.0 / (alpha - beta);
    for k in 1..x.len() {
        v[k] = x[k] * scale;
    }
    (v, tau)
}

/// Full similarity with the reflector acting on indices `start..start+v.len()`.
fn reflect(t: &mut M4, z: &mut M4, start: usize, v: &[f64], tau: f64) {
    if tau == 0.0 {
        return;
    }
    let m = v.len();
    for col in 0..4 {
        let d: f64 = (0..m).map(|k| v[k] * t[start + k][col]).sum();
        for k in 0..m {
            t[start + k][col] -= tau * v[k] * d;
        }
    }
    for mat in [&mut *t, &mut *z] {
        for row in mat.iter_mut() {
            let d: f64 = (0..m).map(|k| row[start + k] * v[k]).sum();
            for k in 0..m {
                row[start + k] -= tau * d * v[k];
            }
        }
    }
}

fn hessenberg(t: &mut M4, z: &mut M4) {
    for k in 0..2 {
        let x: Vec<f64> = (k + 1..4).map(|i| t[i][k]).collect();
        let (v, tau) = house(&x);
        reflect(t, z, k + 1, &v, tau);
        for i in k + 2..4 {
            t[i][k] = 0.0;
        }
    }
}

fn clean_below_subdiagonal(t: &mut M4) {
    for i in 2..4 {
        for j in 0..i - 1 {
            t[i][j] = 0.0;
        }
    }
}

/// Francis double-shift QR on a Hessenberg matrix until every diagonal block
/// is 1×1 or 2×2.
fn francis(t: &mut M4, z: &mut M4) -> Result<()> {
    let eps = f64::EPSILON;
    let total_norm = norm4(t);
    let mut hi: isize = 3;
    let mut its = 0usize;
    let mut total = 0usize;
    while hi >= 1 {
        let h = hi as usize;
        let mut l = h;
        while l > 0 {
            let mut s = t[l - 1][l - 1].abs() + t[l][l].abs();
            if s == 0.0 {
                s = total_norm;
            }
            if t[l][l - 1].abs() <= eps * s {
                t[l][l - 1] = 0.0;
                break;
            }
            l -= 1;
        }
        if l == h {
            hi -= 1;
            its = 0;
            continue;
        }
        if l + 1 == h {
            hi -= 2;
            its = 0;
            continue;
        }
        if total >= MAX_QR_STEPS {
            return Err(Error::NoConvergence {
                steps: total,
                residual: t[h][h - 1].abs(),
            });
        }
        its += 1;
        total += 1;
        let (ssum, prod) = if its % 10 == 0 {
            let s = if its % 20 == 0 {
                t[h][h - 1].abs() + t[h - 1][h - 2].abs()
            } else {
                t[l + 1][l].abs() + t[l + 2][l + 1].abs()
            };
            let base = if its % 20 == 0 { t[h][h] } else { t[l][l] };
            let h11 = 0.75 * s + base;
            (2.0 * h11, h11 * h11 + 0.4375 * s * s)
        } else {
            (
                t[h - 1][h - 1] + t[h][h],
                t[h - 1][h - 1] * t[h][h] - t[h - 1][h] * t[h][h - 1],
            )
        };
        let mut x = t[l][l] * t[l][l] + t[l][l + 1] * t[l + 1][l] - ssum * t[l][l] + prod;
        let mut y = t[l + 1][l] * (t[l][l] + t[l + 1][l + 1] - ssum);
        let mut w = t[l + 1][l] * t[l + 2][l + 1];
        for k in l..=h - 2 {
            let (v, tau) = house(&[x, y, w]);
            reflect(t, z, k, &v, tau);
            if k > l {
                t[k + 1][k - 1] = 0.0;
                if k + 2 <= h {
                    t[k + 2][k - 1] = 0.0;
                }
            }
            x = t[k + 1][k];
            y = t[k + 2][k];
            if k + 3 <= h {
                w = t[k + 3][k];
            }
        }
        let (v, tau) = house(&[x, y]);
        reflect(t, z, h - 1, &v, tau);
        t[h][h - 2] = 0.0;
    }
    clean_below_subdiagonal(t);
    Ok(())
}

/// Puts the 2×2 block at `k` in standard form: upper triangular if its
/// eigenvalues are real, otherwise equal diagonal with positive subdiagonal.
fn standardize_block(t: &mut M4, z: &mut M4, k: usize) {
    let (a, b, c, d) = (t[k][k], t[k][k + 1], t[k + 1][k], t[k + 1][k + 1]);
    if c == 0.0 {
        return;
    }
    if b == 0.0 {
        rot(t, z, k, k + 1, 0.0, 1.0);
        t[k + 1][k] = 0.0;
        return;
    }
    let p = 0.5 * (a - d);
    let scale = p.abs().max(b.abs()).max(c.abs());
    let (ps, bs, cs_) = (p / scale, b / scale, c / scale);
    let disc = ps * ps + bs * cs_;
    if disc >= 0.0 {
        let zed = p + p.signum() * scale * disc.sqrt();
        let zed = if zed == 0.0 { scale * disc.sqrt() } else { zed };
        let tau = zed.hypot(c);
        rot(t, z, k, k + 1, zed / tau, c / tau);
        t[k + 1][k] = 0.0;
    } else {
        let theta = 0.5 * (-(a - d)).atan2(b + c);
        let (sn, cs) = theta.sin_cos();
        rot(t, z, k, k + 1, cs, sn);
        let avg = 0.5 * (t[k][k] + t[k + 1][k + 1]);
        t[k][k] = avg;
        t[k + 1][k + 1] = avg;
        if t[k + 1][k] < 0.0 {
            for col in 0..4 {
                t[k + 1][col] = -t[k + 1][col];
            }
            for m in [&mut *t, &mut *z] {
                for row in m.iter_mut() {
                    row[k + 1] = -row[k + 1];
                }
            }
        }
    }
}

/// Start and size of each diagonal block.
fn blocks(t: &M4) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut k = 0;
    while k < 4 {
        if k + 1 < 4 && t[k + 1][k] != 0.0 {
            out.push((k, 2));
            k += 2;
        } else {
            out.push((k, 1));
            k += 1;
        }
    }
    out
}

fn block_eigs_at(t: &M4, k: usize, size: usize) -> Vec<Complex64> {
    if size == 1 {
        return vec![Complex64::new(t[k][k], 0.0)];
    }
    let (a, b, c, d) = (t[k][k], t[k][k + 1], t[k + 1][k], t[k + 1][k + 1]);
    let mean = 0.5 * (a + d);
    let p = 0.5 * (a - d);
    let disc = p * p + b * c;
    if disc >= 0.0 {
        let r = disc.sqrt();
        vec![Complex64::new(mean + r, 0.0), Complex64::new(mean - r, 0.0)]
    } else {
        let r = (-disc).sqrt();
        vec![Complex64::new(mean, r), Complex64::new(mean, -r)]
    }
}

fn block_eigenvalues(t: &M4) -> Vec<Complex64> {
    blocks(t)
        .into_iter()
        .flat_map(|(k, s)| block_eigs_at(t, k, s))
        .collect()
}

/// Solves `T11 X - X T22 = T12` for the blocks at `k` (size `p`) and `k+p` (size `q`).
fn sylvester(t: &M4, k: usize, p: usize, q: usize) -> Vec<f64> {
    let nu = p * q;
    let mut mat = vec![vec![0.0; nu + 1]; nu];
    let u = |i: usize, j: usize| i * q + j;
    for i in 0..p {
        for j in 0..q {
            let row = u(i, j);
            for kk in 0..p {
                mat[row][u(kk, j)] += t[k + i][k + kk];
            }
            for kk in 0..q {
                mat[row][u(i, kk)] -= t[k + p + kk][k + p + j];
            }
            mat[row][nu] = t[k + i][k + p + j];
        }
    }
    let small = f64::EPSILON * norm4(t).max(f64::MIN_POSITIVE);
    for col in 0..nu {
        let piv = (col..nu)
            .max_by(|&a, &b| mat[a][col].abs().partial_cmp(&mat[b][col].abs()).unwrap())
            .unwrap();
        mat.swap(col, piv);
        if mat[col][col].abs() < small {
            mat[col][col] = small;
        }
        for r in col + 1..nu {
            let f = mat[r][col] / mat[col][col];
            if f != 0.0 {
                for cc in col..=nu {
                    mat[r][cc] -= f * mat[col][cc];
                }
            }
        }
    }
    let mut x = vec![0.0; nu];
    for r in (0..nu).rev() {
        let s: f64 = (r + 1..nu).map(|cc| mat[r][cc] * x[cc]).sum();
        x[r] = (mat[r][nu] - s) / mat[r][r];
    }
    x
}

/// Swaps the adjacent blocks at `k` (size `p`) and `k+p` (size `q`).
fn swap_blocks(t: &mut M4, z: &mut M4, k: usize, p: usize, q: usize) {
    let x = sylvester(t, k, p, q);
    let m = p + q;
    // Columns of [-X; I_q] span the invariant subspace of the second block.
    let mut y = vec![vec![0.0; q]; m];
    for i in 0..p {
        for j in 0..q {
            y[i][j] = -x[i * q + j];
        }
    }
    for j in 0..q {
        y[p + j][j] = 1.0;
    }
    for c in 0..q {
        let col: Vec<f64> = (c..m).map(|i| y[i][c]).collect();
        let (v, tau) = house(&col);
        for cc in c..q {
            let d: f64 = (0..v.len()).map(|i| v[i] * y[c + i][cc]).sum();
            for i in 0..v.len() {
                y[c + i][cc] -= tau * v[i] * d;
            }
        }
        reflect(t, z, k + c, &v, tau);
    }
    for i in k + q..k + m {
        for j in k..k + q {
            t[i][j] = 0.0;
        }
    }
    clean_below_subdiagonal(t);
    if q == 2 {
        standardize_block(t, z, k);
    }
    if p == 2 {
        standardize_block(t, z, k + q);
    }
}

/// Reorders blocks so that block `order[0]` comes first, and so on; block ids
/// refer to the current left-to-right order.
fn reorder(t: &mut M4, z: &mut M4, order: &[usize]) {
    let mut ids: Vec<usize> = (0..order.len()).collect();
    for (target, &want) in order.iter().enumerate() {
        let mut pos = ids.iter().position(|&b| b == want).unwrap();
        while pos > target {
            let bl = blocks(t);
            let (k, p) = bl[pos - 1];
            let (_, q) = bl[pos];
            swap_blocks(t, z, k, p, q);
            ids.swap(pos - 1, pos);
            pos -= 1;
        }
    }
}

fn schur_core(m: &M4) -> Result<(M4, M4)> {
    let mut t = *m;
    let mut z = identity4();
    hessenberg(&mut t, &mut z);
    francis(&mut t, &mut z)?;
    let mut k = 0;
    while k < 3 {
        if t[k + 1][k] != 0.0 {
            standardize_block(&mut t, &mut z, k);
            k += 2;
        } else {
            k += 1;
        }
    }
    Ok((t, z))
}

fn real_part_order(t: &M4) -> Vec<usize> {
    let bl = blocks(t);
    let mut ids: Vec<usize> = (0..bl.len()).collect();
    ids.sort_by(|&x, &y| {
        t[bl[x].0][bl[x].0]
            .partial_cmp(&t[bl[y].0][bl[y].0])
            .unwrap()
    });
    ids
}

/// Moves a 2×2 block out of the middle position, so that `T[2][1] = 0`.
fn fix_middle_block(t: &mut M4, z: &mut M4) {
    let bl = blocks(t);
    if bl.len() == 3 && bl[1] == (1, 2) {
        swap_blocks(t, z, 0, 1, 2);
    }
}

/// Real Schur form of a 4×4 matrix with blocks ordered by ascending real part,
/// except that a 2×2 block is never placed in the middle.
pub fn real_schur_4x4(m: &DenseMatrix) -> Result<Schur4Result> {
    if m.n() != 4 {
        return Err(Error::Shape(format!(
            "expected 4x4, got {}x{}",
            m.n(),
            m.n()
        )));
    }
    let a: M4 = std::array::from_fn(|i| std::array::from_fn(|j| m[(i, j)]));
    let (mut t, mut z) = schur_core(&a)?;
    let order = real_part_order(&t);
    reorder(&mut t, &mut z, &order);
    fix_middle_block(&mut t, &mut z);
    Ok(Schur4Result {
        r: DenseMatrix::from_fn(4, |i, j| z[i][j]),
        t: DenseMatrix::from_fn(4, |i, j| t[i][j]),
    })
}

fn eig2(a: f64, b: f64, c: f64, d: f64) -> [Complex64; 2] {
    let mean = 0.5 * (a + d);
    let p = 0.5 * (a - d);
    let disc = p * p + b * c;
    if disc >= 0.0 {
        let r = disc.sqrt();
        [Complex64::new(mean + r, 0.0), Complex64::new(mean - r, 0.0)]
    } else {
        let r = (-disc).sqrt();
        [Complex64::new(mean, r), Complex64::new(mean, -r)]
    }
}

fn pair_distance(x: &[Complex64; 2], y: &[Complex64]) -> f64 {
    let d1 = (x[0] - y[0]).norm() + (x[1] - y[1]).norm();
    let d2 = (x[0] - y[1]).norm() + (x[1] - y[0]).norm();
    d1.min(d2)
}

/// Schur vectors of `M` whose leading 2-dimensional invariant subspace is the
/// one whose eigenvalues best match those of `M[0..2, 0..2]`; this keeps the
/// transformation close to the identity once the sweep has nearly converged.
pub fn real_schur_4x4_nearest_split(m: &M4) -> Result<M4> {
    let (mut t, mut z) = schur_core(m)?;
    let bl = blocks(&t);
    let target = eig2(m[0][0], m[0][1], m[1][0], m[1][1]);
    let mut candidates: Vec<Vec<usize>> = Vec::new();
    for (i, &(_, s)) in bl.iter().enumerate() {
        if s == 2 {
            candidates.push(vec![i]);
        }
    }
    for i in 0..bl.len() {
        for j in i + 1..bl.len() {
            if bl[i].1 == 1 && bl[j].1 == 1 {
                candidates.push(vec![i, j]);
            }
        }
    }
    let mut best: Option<(f64, Vec<usize>)> = None;
    for cand in candidates {
        let eigs: Vec<Complex64> = cand
            .iter()
            .flat_map(|&b| block_eigs_at(&t, bl[b].0, bl[b].1))
            .collect();
        let d = pair_distance(&target, &eigs);
        if best.as_ref().is_none_or(|(bd, _)| d < *bd) {
            best = Some((d, cand));
        }
    }
    let (_, front) = best.expect("a 4x4 real Schur form always has a 2+2 split");
    let mut order = front.clone();
    order.extend((0..bl.len()).filter(|b| !front.contains(b)));
    reorder(&mut t, &mut z, &order);
    Ok(z)
}

/// Options for [`zhou_brent_with`].
#[derive(Clone, Copy, Debug)]
pub struct ZhouBrentOptions {
    pub max_sweeps: usize,
    /// Stop as soon as a sweep increases `offschur(A)`.
    pub break_on_increase: bool,
    /// With `break_on_increase`, also stop when a sweep removes less than this
    /// fraction of `offschur(A)`.
    pub min_reduction: f64,
    /// Reference norm for the stopping test; `None` uses `‖A‖_F` at entry.
    pub norm: Option<f64>,
}

impl Default for ZhouBrentOptions {
    fn default() -> Self {
        Self {
            max_sweeps: DEFAULT_MAX_SWEEPS,
            break_on_increase: false,
            min_reduction: 0.0,
            norm: None,
        }
    }
}

/// Couplings within this many machine epsilons of the diagonal blocks are
/// rounding noise and are not rotated.
const ROUNDOFF_SKIP: f64 = 1.0;

fn diagonal_blocks_norm(m: &M4) -> f64 {
    [
        m[0][0], m[0][1], m[1][0], m[1][1], m[2][2], m[2][3], m[3][2], m[3][3],
    ]
    .iter()
    .map(|v| v * v)
    .sum::<f64>()
    .sqrt()
}

/// Cyclic Jacobi-like method for normal matrices on the indices `l`.
pub fn zhou_brent(a: &mut DenseMatrix, q: &mut DenseMatrix, l: &[usize], rho: f64) -> SweepStats {
    zhou_brent_with(a, q, l, rho, ZhouBrentOptions::default())
}

pub fn zhou_brent_with(
    a: &mut DenseMatrix,
    q: &mut DenseMatrix,
    l: &[usize],
    rho: f64,
    opts: ZhouBrentOptions,
) -> SweepStats {
    assert!(
        l.len() >= 4 && l.len() % 2 == 0,
        "index list must hold at least two pairs"
    );
    let norm_a = opts.norm.unwrap_or_else(|| frobenius_norm(a));
    let target = rho * norm_a;
    let skip = skip_threshold(norm_a, a.n(), rho);
    let initial = offschur_indices(a, l);
    let mut current = initial;
    let mut global = if opts.break_on_increase {
        offschur(a)
    } else {
        0.0
    };
    let mut sweeps = 0;
    let mut log = RotationLog::new();
    while current > target && sweeps < opts.max_sweeps {
        for idx in pair_quads(l) {
            let m = block4(a, idx);
            let coupling = [
                m[2][0], m[2][1], m[3][0], m[3][1], m[0][2], m[0][3], m[1][2], m[1][3],
            ]
            .iter()
            .fold(0.0f64, |acc, v| acc.max(v.abs()));
            if coupling <= skip.max(ROUNDOFF_SKIP * f64::EPSILON * diagonal_blocks_norm(&m)) {
                continue;
            }
            if let Ok(r) = real_schur_4x4_nearest_split(&m) {
                apply_block4_congruence(a, idx, &r);
                log.push(idx, r);
            }
        }
        log.flush_right(q);
        sweeps += 1;
        current = offschur_indices(a, l);
        if opts.break_on_increase {
            let now = offschur(a);
            if now > (1.0 - opts.min_reduction) * global {
                break;
            }
            global = now;
        }
    }
    SweepStats {
        sweeps,
        initial_offschur: initial,
        final_offschur: current,
        converged: current <= target,
    }
}

/// Off-diagonal norm of `(μ1/2)(A + A*) + i(μ2/2)(A - A*)`.
pub fn randdiag_hermitian_offdiag(a: &ComplexDenseMatrix, mu1: f64, mu2: f64) -> f64 {
    let n = a.m();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += hermitian_entry(a, i, j, mu1, mu2).norm_sqr();
            }
        }
    }
    s.sqrt()
}

#[inline]
fn hermitian_entry(a: &ComplexDenseMatrix, i: usize, j: usize, mu1: f64, mu2: f64) -> Complex64 {
    let x = a[(i, j)];
    let y = a[(j, i)].conj();
    (x + y) * (0.5 * mu1) + Complex64::new(0.0, 0.5 * mu2) * (x - y)
}

/// The two standard normal weights drawn for a given seed.
pub fn randdiag_weights(seed: u64) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mu1: f64 = StandardNormal.sample(&mut rng);
    let mu2: f64 = StandardNormal.sample(&mut rng);
    (mu1, mu2)
}

/// Implicit cyclic Hermitian Jacobi driven by a random Hermitian combination
/// of `A` and `A*`. `A` and `Q` are updated in place.
pub fn randdiag_jacobi(
    a: &mut ComplexDenseMatrix,
    q: &mut ComplexDenseMatrix,
    rho: f64,
    seed: u64,
) -> SweepStats {
    randdiag_jacobi_with(a, q, rho, seed, DEFAULT_MAX_SWEEPS)
}

pub fn randdiag_jacobi_with(
    a: &mut ComplexDenseMatrix,
    q: &mut ComplexDenseMatrix,
    rho: f64,
    seed: u64,
    max_sweeps: usize,
) -> SweepStats {
    let (mu1, mu2) = randdiag_weights(seed);
    let n = a.m();
    let target = rho * a.frobenius_norm();
    let initial = randdiag_hermitian_offdiag(a, mu1, mu2);
    let mut current = initial;
    let mut sweeps = 0;
    while current > target && sweeps < max_sweeps {
        for i in 0..n {
            for j in i + 1..n {
                let h12 = hermitian_entry(a, i, j, mu1, mu2);
                let r = h12.norm();
                if r == 0.0 {
                    continue;
                }
                let h11 = hermitian_entry(a, i, i, mu1, mu2).re;
                let h22 = hermitian_entry(a, j, j, mu1, mu2).re;
                let g = crate::structured::jacobi_symmetric_rotation(h11, r, h22);
                let u = (h12 / r).conj();
                // G = diag(1, u) [[c, -s], [s, c]]
                let g11 = Complex64::new(g.c, 0.0);
                let g12 = Complex64::new(-g.s, 0.0);
                let g21 = u * g.s;
                let g22 = u * g.c;
                for row in 0..n {
                    let (x, y) = (a[(row, i)], a[(row, j)]);
                    a[(row, i)] = x * g11 + y * g21;
                    a[(row, j)] = x * g12 + y * g22;
                    let (x, y) = (q[(row, i)], q[(row, j)]);
                    q[(row, i)] = x * g11 + y * g21;
                    q[(row, j)] = x * g12 + y * g22;
                }
                for col in 0..n {
                    let (x, y) = (a[(i, col)], a[(j, col)]);
                    a[(i, col)] = g11.conj() * x + g21.conj() * y;
                    a[(j, col)] = g12.conj() * x + g22.conj() * y;
                }
            }
        }
        sweeps += 1;
        current = randdiag_hermitian_offdiag(a, mu1, mu2);
    }
    SweepStats {
        sweeps,
        initial_offschur: initial,
        final_offschur: current,
        converged: current <= target,
    }
}

/// Output of the randomized comparator on a real input.
#[derive(Clone, Debug)]
pub struct RandDiagResult {
    pub a: ComplexDenseMatrix,
    pub q: ComplexDenseMatrix,
    pub stats: SweepStats,
}

impl RandDiagResult {
    /// `offdiag(Q* A Q) / ‖A‖_F` of the in-place result.
    pub fn offdiag_ratio(&self) -> f64 {
        self.a.offdiag() / self.a.frobenius_norm()
    }
}

pub fn randdiag_real(a: &DenseMatrix, rho: f64, seed: u64) -> RandDiagResult {
    let mut ac = ComplexDenseMatrix::from_real(a);
    let mut q = ComplexDenseMatrix::identity(a.n());
    let stats = randdiag_jacobi(&mut ac, &mut q, rho, seed);
    RandDiagResult { a: ac, q, stats }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::orthogonality_residual;

    fn rng_m4(seed: u64) -> DenseMatrix {
        use rand::{Rng, SeedableRng};
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        DenseMatrix::from_fn(4, |_, _| rng.random_range(-1.0..1.0))
    }

    fn check_schur(m: &DenseMatrix, s: &Schur4Result) {
        let nm = frobenius_norm(m);
        assert!(orthogonality_residual(&s.r) < 1e-13);
        let back = s.r.transpose().matmul(m).matmul(&s.r);
        assert!(
            frobenius_norm(&back.sub(&s.t)) < 1e-12 * nm,
            "{back:?} vs {:?}",
            s.t
        );
        for i in 0..4 {
            for j in 0..4 {
                if i > j + 1 {
                    assert_eq!(s.t[(i, j)], 0.0);
                }
            }
        }
        assert_eq!(s.t[(2, 1)], 0.0);
    }

    #[test]
    fn diagonal_input() {
        let m = DenseMatrix::diag(&[3.0, -1.0, 2.0, 0.5]);
        let s = real_schur_4x4(&m).unwrap();
        check_schur(&m, &s);
        let d: Vec<f64> = (0..4).map(|i| s.t[(i, i)]).collect();
        assert_eq!(d, vec![-1.0, 0.5, 2.0, 3.0]);
    }

    #[test]
    fn block_example_eigenvalues() {
        let s3 = 3f64.sqrt();
        let m = DenseMatrix::from_rows(&[
            &[1.0, -s3, 0.0, 0.0],
            &[s3, 1.0, 0.0, 0.0],
            &[0.0, 0.0, -1.0, s3],
            &[0.0, 0.0, s3, 1.0],
        ]);
        let s = real_schur_4x4(&m).unwrap();
        check_schur(&m, &s);
        let mut ev = s.eigenvalues();
        ev.sort_by(|a, b| (a.re, a.im).partial_cmp(&(b.re, b.im)).unwrap());
        let expect = [
            Complex64::new(-2.0, 0.0),
            Complex64::new(1.0, -s3),
            Complex64::new(1.0, s3),
            Complex64::new(2.0, 0.0),
        ];
        for (x, y) in ev.iter().zip(expect) {
            assert!((x - y).norm() < 1e-13, "{ev:?}");
        }
    }

    #[test]
    fn random_inputs_give_valid_forms() {
        for seed in 0..300 {
            let m = rng_m4(seed);
            let s = real_schur_4x4(&m).unwrap();
            check_schur(&m, &s);
            let tr: f64 = (0..4).map(|i| m[(i, i)]).sum();
            let ev_sum: f64 = s.eigenvalues().iter().map(|z| z.re).sum();
            assert!((tr - ev_sum).abs() < 1e-12);
        }
    }

    #[test]
    fn nearest_split_keeps_block_diagonal_fixed() {
        let s3 = 3f64.sqrt();
        let m: M4 = [
            [-1.0, s3, 0.0, 0.0],
            [s3, 1.0, 0.0, 0.0],
            [0.0, 0.0, 1.0, -s3],
            [0.0, 0.0, s3, 1.0],
        ];
        let r = real_schur_4x4_nearest_split(&m).unwrap();
        let rd = DenseMatrix::from_fn(4, |i, j| r[i][j]);
        let md = DenseMatrix::from_fn(4, |i, j| m[i][j]);
        let t = rd.transpose().matmul(&md).matmul(&rd);
        assert!(crate::matcore::offschur(&t) < 1e-14);
        assert!(rd[(2, 2)].abs() > 0.99 && rd[(3, 3)].abs() > 0.99);
    }

    #[test]
    fn randdiag_diagonal_input_and_determinism() {
        let d = DenseMatrix::diag(&[1.0, -2.0, 3.0, 0.5]);
        let r = randdiag_real(&d, 1e-15, 3);
        assert_eq!(r.stats.sweeps, 0);
        let a = crate::genmat::generate(&crate::genmat::EnsembleSpec::new(
            12,
            crate::genmat::MatrixClass::Exp2,
            5,
        ))
        .0;
        let r1 = randdiag_real(&a, 1e-15, 9);
        let r2 = randdiag_real(&a, 1e-15, 9);
        assert_eq!(r1.a, r2.a);
        assert!(r1.offdiag_ratio() < 1e-10);
        let back = r1.q.matmul(&r1.a).matmul(&r1.q.adjoint());
        assert!(
            back.sub(&ComplexDenseMatrix::from_real(&a))
                .frobenius_norm()
                < 1e-12 * frobenius_norm(&a)
        );
    }
}
