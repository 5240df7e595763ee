//! Dense matrix primitives shared by every solver.
//!
//! Indices are 0-based in code. Documentation speaks of planes `(i, j)` in the
//! usual 1-based sense only where it quotes a textbook formula.

use std::fmt;
use std::ops::{Index, IndexMut};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Square real matrix stored row-major.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixRepr", into = "MatrixRepr")]
pub struct DenseMatrix {
    n: usize,
    data: Vec<f64>,
}

#[derive(Clone, Serialize, Deserialize)]
struct MatrixRepr {
    n: usize,
    data: Vec<f64>,
}

impl TryFrom<MatrixRepr> for DenseMatrix {
    type Error = Error;

    fn try_from(r: MatrixRepr) -> Result<Self> {
        DenseMatrix::from_row_major(r.n, r.data)
    }
}

impl From<DenseMatrix> for MatrixRepr {
    fn from(m: DenseMatrix) -> Self {
        MatrixRepr {
            n: m.n,
            data: m.data,
        }
    }
}

impl DenseMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Self { n, data }
    }

    /// Builds a matrix from `n*n` row-major values. Non-finite entries are rejected.
    pub fn from_row_major(n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::Shape(format!(
                "expected {} entries for a {n}x{n} matrix, got {}",
                n * n,
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                row: pos / n.max(1),
                col: pos % n.max(1),
            });
        }
        Ok(Self { n, data })
    }

    /// Convenience constructor for small literal matrices; panics on ragged input.
    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for r in rows {
            assert_eq!(r.len(), n, "row length must equal the number of rows");
            data.extend_from_slice(r);
        }
        Self { n, data }
    }

    pub fn diag(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len());
        for (i, v) in values.iter().enumerate() {
            m[(i, i)] = *v;
        }
        m
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.n, |i, j| self[(j, i)])
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == 0.0 {
                    continue;
                }
                let src = &other.data[k * n..(k + 1) * n];
                let dst = &mut out.data[i * n..(i + 1) * n];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += a * s;
                }
            }
        }
        out
    }

    /// `selfᵀ · other` without forming the transpose.
    pub fn tr_matmul(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        let n = self.n;
        let mut out = Self::zeros(n);
        for k in 0..n {
            for i in 0..n {
                let a = self.data[k * n + i];
                if a == 0.0 {
                    continue;
                }
                let src = &other.data[k * n..(k + 1) * n];
                let dst = &mut out.data[i * n..(i + 1) * n];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += a * s;
                }
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        assert_eq!(self.n, other.n);
        Self {
            n: self.n,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| f(*a, *b))
                .collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Principal submatrix on the given index list.
    pub fn submatrix(&self, idx: &[usize]) -> Self {
        Self::from_fn(idx.len(), |a, b| self[(idx[a], idx[b])])
    }

    pub fn set_submatrix(&mut self, idx: &[usize], block: &Self) {
        assert_eq!(idx.len(), block.n);
        for (a, &i) in idx.iter().enumerate() {
            for (b, &j) in idx.iter().enumerate() {
                self[(i, j)] = block[(a, b)];
            }
        }
    }

    /// Copy with one zero row and column appended.
    pub fn padded(&self) -> Self {
        let n = self.n;
        Self::from_fn(
            n + 1,
            |i, j| if i < n && j < n { self[(i, j)] } else { 0.0 },
        )
    }

    /// Leading `k×k` block.
    pub fn leading(&self, k: usize) -> Self {
        Self::from_fn(k, |i, j| self[(i, j)])
    }

    /// Parses the plain text format: first line `n`, then `n` lines of `n` numbers.
    pub fn parse_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty());
        let (ln, first) = lines.next().ok_or_else(|| Error::Parse {
            line: 1,
            msg: "empty input".into(),
        })?;
        let n: usize = first.trim().parse().map_err(|_| Error::Parse {
            line: ln + 1,
            msg: format!("expected matrix dimension, found {:?}", first.trim()),
        })?;
        if n == 0 {
            return Err(Error::Parse {
                line: ln + 1,
                msg: "dimension must be positive".into(),
            });
        }
        let mut data = Vec::with_capacity(n * n);
        for r in 0..n {
            let (ln, line) = lines.next().ok_or_else(|| Error::Parse {
                line: ln + 2 + r,
                msg: format!("missing row {} of {n}", r + 1),
            })?;
            let mut count = 0;
            for tok in line.split_whitespace() {
                let v: f64 = tok.parse().map_err(|_| Error::Parse {
                    line: ln + 1,
                    msg: format!("cannot parse {tok:?} as a number"),
                })?;
                if !v.is_finite() {
                    return Err(Error::Parse {
                        line: ln + 1,
                        msg: format!("non-finite entry {tok:?}"),
                    });
                }
                data.push(v);
                count += 1;
            }
            if count != n {
                return Err(Error::Parse {
                    line: ln + 1,
                    msg: format!("expected {n} values, found {count}"),
                });
            }
        }
        if let Some((ln, _)) = lines.next() {
            return Err(Error::Parse {
                line: ln + 1,
                msg: "trailing data after the last row".into(),
            });
        }
        Self::from_row_major(n, data)
    }

    /// Writes the text format with 17 significant digits.
    pub fn to_text(&self) -> String {
        let mut s = format!("{}\n", self.n);
        for i in 0..self.n {
            let row: Vec<String> = self.row(i).iter().map(|v| format!("{v:.16e}")).collect();
            s.push_str(&row.join(" "));
            s.push('\n');
        }
        s
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = f64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.n + j]
    }
}

impl fmt::Debug for DenseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "DenseMatrix({}x{})", self.n, self.n)?;
        for i in 0..self.n {
            let row: Vec<String> = self.row(i).iter().map(|v| format!("{v:>12.4e}")).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

/// Square complex matrix stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexDenseMatrix {
    m: usize,
    data: Vec<Complex64>,
}

impl ComplexDenseMatrix {
    pub fn zeros(m: usize) -> Self {
        Self {
            m,
            data: vec![Complex64::new(0.0, 0.0); m * m],
        }
    }

    pub fn identity(m: usize) -> Self {
        let mut z = Self::zeros(m);
        for i in 0..m {
            z[(i, i)] = Complex64::new(1.0, 0.0);
        }
        z
    }

    pub fn from_fn(m: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(m * m);
        for i in 0..m {
            for j in 0..m {
                data.push(f(i, j));
            }
        }
        Self { m, data }
    }

    /// Embeds a real matrix.
    pub fn from_real(a: &DenseMatrix) -> Self {
        Self::from_fn(a.n(), |i, j| Complex64::new(a[(i, j)], 0.0))
    }

    #[inline]
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn is_finite(&self) -> bool {
        self.data
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.m, |i, j| self[(j, i)].conj())
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.m, other.m);
        let m = self.m;
        let mut out = Self::zeros(m);
        for i in 0..m {
            for k in 0..m {
                let a = self.data[i * m + k];
                for j in 0..m {
                    out.data[i * m + j] += a * other.data[k * m + j];
                }
            }
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.m, other.m);
        Self {
            m: self.m,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            m: self.m,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn offdiag(&self) -> f64 {
        let m = self.m;
        let mut s = 0.0;
        for i in 0..m {
            for j in 0..m {
                if i != j {
                    s += self.data[i * m + j].norm_sqr();
                }
            }
        }
        s.sqrt()
    }

    /// Inverse by Gauss-Jordan elimination with partial pivoting; `None` if singular.
    pub fn inverse(&self) -> Option<Self> {
        let m = self.m;
        let mut a = self.clone();
        let mut inv = Self::identity(m);
        for col in 0..m {
            let piv = (col..m).max_by(|&x, &y| {
                a[(x, col)]
                    .norm()
                    .partial_cmp(&a[(y, col)].norm())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })?;
            if a[(piv, col)].norm() == 0.0 {
                return None;
            }
            if piv != col {
                for j in 0..m {
                    a.data.swap(piv * m + j, col * m + j);
                    inv.data.swap(piv * m + j, col * m + j);
                }
            }
            let p = a[(col, col)];
            for j in 0..m {
                a[(col, j)] /= p;
                inv[(col, j)] /= p;
            }
            for r in 0..m {
                if r == col {
                    continue;
                }
                let f = a[(r, col)];
                if f.norm() == 0.0 {
                    continue;
                }
                for j in 0..m {
                    let av = a[(col, j)];
                    let iv = inv[(col, j)];
                    a[(r, j)] -= f * av;
                    inv[(r, j)] -= f * iv;
                }
            }
        }
        Some(inv)
    }
}

impl Index<(usize, usize)> for ComplexDenseMatrix {
    type Output = Complex64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.m + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexDenseMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.m + j]
    }
}

/// Plane rotation `G(α, i, j)`: `G[i][i] = G[j][j] = c`, `G[j][i] = s`, `G[i][j] = -s`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GivensRotation {
    pub i: usize,
    pub j: usize,
    pub c: f64,
    pub s: f64,
}

impl GivensRotation {
    pub fn new(i: usize, j: usize, c: f64, s: f64) -> Self {
        debug_assert!(i < j);
        Self { i, j, c, s }
    }

    pub fn from_angle(i: usize, j: usize, alpha: f64) -> Self {
        Self::new(i, j, alpha.cos(), alpha.sin())
    }

    pub fn identity(i: usize, j: usize) -> Self {
        Self::new(i, j, 1.0, 0.0)
    }

    /// Same rotation moved to plane `(i, j)`.
    pub fn on_plane(self, i: usize, j: usize) -> Self {
        Self::new(i, j, self.c, self.s)
    }

    /// Dense `n×n` form, mainly for tests.
    pub fn to_dense(&self, n: usize) -> DenseMatrix {
        let mut g = DenseMatrix::identity(n);
        g[(self.i, self.i)] = self.c;
        g[(self.j, self.j)] = self.c;
        g[(self.j, self.i)] = self.s;
        g[(self.i, self.j)] = -self.s;
        g
    }
}

fn check_plane(a: &DenseMatrix, g: &GivensRotation) {
    assert!(
        g.i < g.j && g.j < a.n(),
        "rotation plane ({}, {}) out of range for n = {}",
        g.i,
        g.j,
        a.n()
    );
}

/// `A ← Gᵀ A`: only rows `i` and `j` change.
pub fn apply_givens_left(a: &mut DenseMatrix, g: &GivensRotation) {
    check_plane(a, g);
    let n = a.n;
    let (lo, hi) = a.data.split_at_mut(g.j * n);
    let ri = &mut lo[g.i * n..(g.i + 1) * n];
    let rj = &mut hi[..n];
    for (x, y) in ri.iter_mut().zip(rj.iter_mut()) {
        let (u, v) = (*x, *y);
        *x = g.c * u + g.s * v;
        *y = -g.s * u + g.c * v;
    }
}

/// `A ← A G`: only columns `i` and `j` change.
pub fn apply_givens_right(a: &mut DenseMatrix, g: &GivensRotation) {
    check_plane(a, g);
    let n = a.n;
    for row in a.data.chunks_exact_mut(n) {
        let (u, v) = (row[g.i], row[g.j]);
        row[g.i] = g.c * u + g.s * v;
        row[g.j] = -g.s * u + g.c * v;
    }
}

/// `A ← Gᵀ A G`.
pub fn apply_givens_similarity(a: &mut DenseMatrix, g: &GivensRotation) {
    apply_givens_left(a, g);
    apply_givens_right(a, g);
}

/// Four distinct rows of a row-major buffer, in the order of `idx`.
fn rows4_mut(data: &mut [f64], n: usize, idx: [usize; 4]) -> [&mut [f64]; 4] {
    let mut order = [0usize, 1, 2, 3];
    order.sort_unstable_by_key(|&k| idx[k]);
    let mut rest = data;
    let mut consumed = 0;
    let mut out: [Option<&mut [f64]>; 4] = [None, None, None, None];
    for &k in &order {
        let start = idx[k] * n - consumed;
        let (_, tail) = rest.split_at_mut(start);
        let (row, tail) = tail.split_at_mut(n);
        out[k] = Some(row);
        rest = tail;
        consumed = (idx[k] + 1) * n;
    }
    out.map(|r| r.expect("row indices must be distinct"))
}

/// `A[idx, :] ← Gᵀ A[idx, :]` for a 4×4 orthogonal `G`.
pub fn apply_block4_left(a: &mut DenseMatrix, idx: [usize; 4], g: &[[f64; 4]; 4]) {
    let n = a.n;
    let [r0, r1, r2, r3] = rows4_mut(&mut a.data, n, idx);
    for (((x0, x1), x2), x3) in r0
        .iter_mut()
        .zip(r1.iter_mut())
        .zip(r2.iter_mut())
        .zip(r3.iter_mut())
    {
        let x = [*x0, *x1, *x2, *x3];
        *x0 = g[0][0] * x[0] + g[1][0] * x[1] + g[2][0] * x[2] + g[3][0] * x[3];
        *x1 = g[0][1] * x[0] + g[1][1] * x[1] + g[2][1] * x[2] + g[3][1] * x[3];
        *x2 = g[0][2] * x[0] + g[1][2] * x[1] + g[2][2] * x[2] + g[3][2] * x[3];
        *x3 = g[0][3] * x[0] + g[1][3] * x[1] + g[2][3] * x[2] + g[3][3] * x[3];
    }
}

#[inline]
fn right4_row(row: &mut [f64], idx: [usize; 4], g: &[[f64; 4]; 4]) {
    let x = [row[idx[0]], row[idx[1]], row[idx[2]], row[idx[3]]];
    for c in 0..4 {
        row[idx[c]] = x[0] * g[0][c] + x[1] * g[1][c] + x[2] * g[2][c] + x[3] * g[3][c];
    }
}

/// `A[:, idx] ← A[:, idx] G` for a 4×4 orthogonal `G`.
pub fn apply_block4_right(a: &mut DenseMatrix, idx: [usize; 4], g: &[[f64; 4]; 4]) {
    let n = a.n;
    for row in a.data.chunks_exact_mut(n) {
        right4_row(row, idx, g);
    }
}

/// `A ← Gᵀ A G` restricted to the rows and columns in `idx`.
pub fn apply_block4_congruence(a: &mut DenseMatrix, idx: [usize; 4], g: &[[f64; 4]; 4]) {
    apply_block4_left(a, idx, g);
    apply_block4_right(a, idx, g);
}

/// Full similarity on `A` plus accumulation `Q[:, idx] ← Q[:, idx] G`.
pub fn apply_block4_similarity(
    a: &mut DenseMatrix,
    q: &mut DenseMatrix,
    idx: [usize; 4],
    g: &[[f64; 4]; 4],
) {
    apply_block4_congruence(a, idx, g);
    apply_block4_right(q, idx, g);
}

/// Rotations recorded during a sweep and applied to `Q` in one pass, as row
/// operations on `Qᵀ`.
#[derive(Clone, Debug, Default)]
pub struct RotationLog {
    entries: Vec<([usize; 4], [[f64; 4]; 4])>,
}

impl RotationLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn push(&mut self, idx: [usize; 4], g: [[f64; 4]; 4]) {
        self.entries.push((idx, g));
    }

    /// `Q ← Q G₁ G₂ …` in recording order; clears the log.
    pub fn flush_right(&mut self, q: &mut DenseMatrix) {
        if self.entries.is_empty() {
            return;
        }
        let mut qt = q.transpose();
        for (idx, g) in &self.entries {
            apply_block4_left(&mut qt, *idx, g);
        }
        *q = qt.transpose();
        self.entries.clear();
    }
}

/// `A[idx, idx]` as a 4×4 array.
pub fn block4(a: &DenseMatrix, idx: [usize; 4]) -> [[f64; 4]; 4] {
    std::array::from_fn(|i| std::array::from_fn(|j| a[(idx[i], idx[j])]))
}

pub fn block4_from_dense(g: &DenseMatrix) -> [[f64; 4]; 4] {
    assert_eq!(g.n(), 4);
    let mut out = [[0.0; 4]; 4];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = g[(i, j)];
        }
    }
    out
}

pub fn block4_to_dense(g: &[[f64; 4]; 4]) -> DenseMatrix {
    DenseMatrix::from_fn(4, |i, j| g[i][j])
}

/// Index permutation acting on row vectors: `(x P)[k] = x[map[k]]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Permutation {
    map: Vec<usize>,
}

impl Permutation {
    pub fn new(map: Vec<usize>) -> Result<Self> {
        let n = map.len();
        let mut seen = vec![false; n];
        for &m in &map {
            if m >= n || seen[m] {
                return Err(Error::Shape("permutation map is not a bijection".into()));
            }
            seen[m] = true;
        }
        Ok(Self { map })
    }

    pub fn n(&self) -> usize {
        self.map.len()
    }

    pub fn map(&self) -> &[usize] {
        &self.map
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.map.len()];
        for (k, &m) in self.map.iter().enumerate() {
            inv[m] = k;
        }
        Self { map: inv }
    }

    pub fn apply_to_row(&self, x: &[f64]) -> Vec<f64> {
        self.map.iter().map(|&m| x[m]).collect()
    }

    /// Dense matrix with `P[map[k], k] = 1`.
    pub fn to_dense(&self) -> DenseMatrix {
        let n = self.map.len();
        let mut p = DenseMatrix::zeros(n);
        for (k, &m) in self.map.iter().enumerate() {
            p[(m, k)] = 1.0;
        }
        p
    }

    /// `Pᵀ M P`.
    pub fn conjugate(&self, m: &DenseMatrix) -> DenseMatrix {
        DenseMatrix::from_fn(m.n(), |a, b| m[(self.map[a], self.map[b])])
    }

    /// `P M Pᵀ`.
    pub fn conjugate_inverse(&self, m: &DenseMatrix) -> DenseMatrix {
        self.inverse().conjugate(m)
    }
}

/// Odd positions first, then even positions: `[a1 a2 a3 a4] P = [a1 a3 a2 a4]`.
pub fn even_odd_permutation(n: usize) -> Permutation {
    assert!(n % 2 == 0, "even-odd permutation needs an even dimension");
    let map = (0..n).step_by(2).chain((1..n).step_by(2)).collect();
    Permutation { map }
}

pub fn frobenius_norm(a: &DenseMatrix) -> f64 {
    a.data.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn frobenius_inner(a: &DenseMatrix, b: &DenseMatrix) -> f64 {
    assert_eq!(a.n, b.n);
    a.data.iter().zip(&b.data).map(|(x, y)| x * y).sum()
}

pub fn sym_part(a: &DenseMatrix) -> DenseMatrix {
    DenseMatrix::from_fn(a.n, |i, j| 0.5 * (a[(i, j)] + a[(j, i)]))
}

pub fn skew_part(a: &DenseMatrix) -> DenseMatrix {
    DenseMatrix::from_fn(a.n, |i, j| 0.5 * (a[(i, j)] - a[(j, i)]))
}

#[inline]
fn outside_pair_block(i: usize, j: usize) -> bool {
    i / 2 != j / 2
}

/// Frobenius norm of everything outside the 2×2 diagonal blocks anchored at
/// even 0-based positions.
pub fn offschur(a: &DenseMatrix) -> f64 {
    let n = a.n;
    assert!(n % 2 == 0, "offschur needs an even dimension");
    let mut s = 0.0;
    for i in 0..n {
        let row = a.row(i);
        for (j, v) in row.iter().enumerate() {
            if outside_pair_block(i, j) {
                s += v * v;
            }
        }
    }
    s.sqrt()
}

/// `offschur(A[l, l])` without copying; `l` has even length and is read in pairs.
pub fn offschur_indices(a: &DenseMatrix, l: &[usize]) -> f64 {
    assert!(l.len() % 2 == 0);
    let mut s = 0.0;
    for (p, &i) in l.iter().enumerate() {
        for (q, &j) in l.iter().enumerate() {
            if outside_pair_block(p, q) {
                s += a[(i, j)] * a[(i, j)];
            }
        }
    }
    s.sqrt()
}

/// `offschur(skew(A))` without forming the skew part.
pub fn offschur_skew(a: &DenseMatrix) -> f64 {
    let n = a.n;
    assert!(n % 2 == 0);
    let mut s = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            if outside_pair_block(i, j) {
                let w = 0.5 * (a[(i, j)] - a[(j, i)]);
                s += 2.0 * w * w;
            }
        }
    }
    s.sqrt()
}

pub fn offdiag(a: &DenseMatrix) -> f64 {
    let n = a.n;
    let mut s = 0.0;
    for i in 0..n {
        for (j, v) in a.row(i).iter().enumerate() {
            if i != j {
                s += v * v;
            }
        }
    }
    s.sqrt()
}

/// `offdiag(sym(A[l, l]))` without copying.
pub fn offdiag_sym_indices(a: &DenseMatrix, l: &[usize]) -> f64 {
    let mut s = 0.0;
    for (p, &i) in l.iter().enumerate() {
        for &j in &l[p + 1..] {
            let h = 0.5 * (a[(i, j)] + a[(j, i)]);
            s += 2.0 * h * h;
        }
    }
    s.sqrt()
}

/// `‖skew(A[l, l])‖_F` without copying.
pub fn skew_norm_indices(a: &DenseMatrix, l: &[usize]) -> f64 {
    let mut s = 0.0;
    for (p, &i) in l.iter().enumerate() {
        for &j in &l[p + 1..] {
            let w = 0.5 * (a[(i, j)] - a[(j, i)]);
            s += 2.0 * w * w;
        }
    }
    s.sqrt()
}

/// `‖QᵀQ − I‖_F`.
pub fn orthogonality_residual(q: &DenseMatrix) -> f64 {
    frobenius_norm(&q.tr_matmul(q).sub(&DenseMatrix::identity(q.n())))
}

/// `‖AᵀA − AAᵀ‖_F`.
pub fn normality_residual(a: &DenseMatrix) -> f64 {
    let at = a.transpose();
    frobenius_norm(&at.matmul(a).sub(&a.matmul(&at)))
}

/// `‖A − Q S Qᵀ‖_F`.
pub fn reconstruction_residual(a: &DenseMatrix, q: &DenseMatrix, s: &DenseMatrix) -> f64 {
    frobenius_norm(&a.sub(&q.matmul(s).matmul(&q.transpose())))
}
