//! Small dense linear algebra and quadrature.
//!
//! Everything here works on row-major `f64` storage and is sized for the
//! handful of dimensions a clustering model deals with (d up to a few dozen).

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Dense square matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl SquareMatrix {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "matrix dimension must be positive");
        Self {
            dim,
            data: vec![0.0; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &v) in diag.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    /// Builds from row-major entries. Panics if `data.len() != dim²`.
    pub fn from_row_major(dim: usize, data: Vec<f64>) -> Self {
        assert!(dim >= 1, "matrix dimension must be positive");
        assert_eq!(data.len(), dim * dim, "expected {dim}x{dim} entries");
        Self { dim, data }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for r in rows {
            assert_eq!(r.len(), dim, "row length differs from row count");
            data.extend_from_slice(r);
        }
        Self::from_row_major(dim, data)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    /// Replaces the matrix with `(M + Mᵀ)/2` so it is exactly symmetric.
    pub fn symmetrize(&mut self) {
        for i in 0..self.dim {
            for j in (i + 1)..self.dim {
                let v = 0.5 * (self[(i, j)] + self[(j, i)]);
                self[(i, j)] = v;
                self[(j, i)] = v;
            }
        }
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.dim).all(|i| (0..i).all(|j| self[(i, j)] == self[(j, i)]))
    }

    pub fn add_diagonal(&mut self, eps: f64) {
        for i in 0..self.dim {
            self[(i, i)] += eps;
        }
    }

    pub fn mul(&self, other: &SquareMatrix) -> SquareMatrix {
        assert_eq!(self.dim, other.dim);
        let n = self.dim;
        let mut out = SquareMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn transpose(&self) -> SquareMatrix {
        let n = self.dim;
        let mut out = SquareMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out[(j, i)] = self[(i, j)];
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.dim);
        (0..self.dim).map(|i| dot(self.row(i), v)).collect()
    }
}

impl std::ops::Index<(usize, usize)> for SquareMatrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.dim + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for SquareMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.dim + j]
    }
}

/// Dense rectangular matrix, row-major. Used for least-squares design matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "expected {rows}x{cols} entries");
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows).map(|i| dot(self.row(i), v)).collect()
    }

    /// `AᵀA`, exactly symmetric.
    pub fn gram(&self) -> SquareMatrix {
        let mut g = SquareMatrix::zeros(self.cols.max(1));
        for r in 0..self.rows {
            let row = self.row(r);
            for i in 0..self.cols {
                for j in 0..=i {
                    g[(i, j)] += row[i] * row[j];
                }
            }
        }
        for i in 0..self.cols {
            for j in 0..i {
                g[(j, i)] = g[(i, j)];
            }
        }
        g
    }

    /// `Aᵀv`.
    pub fn tr_mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.rows);
        let mut out = vec![0.0; self.cols];
        for (r, &vr) in v.iter().enumerate() {
            for (o, &a) in out.iter_mut().zip(self.row(r)) {
                *o += a * vr;
            }
        }
        out
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Lower-triangular Cholesky factor `L` with `A = L·Lᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Cholesky {
    lower: SquareMatrix,
}

impl Cholesky {
    pub fn new(a: &SquareMatrix) -> Result<Self> {
        let n = a.dim();
        let mut l = SquareMatrix::zeros(n);
        for j in 0..n {
            let mut diag = a[(j, j)];
            for k in 0..j {
                diag -= l[(j, k)] * l[(j, k)];
            }
            if !(diag > 0.0) || !diag.is_finite() {
                return Err(Error::NotPositiveDefinite {
                    index: j,
                    pivot: diag,
                });
            }
            let ljj = diag.sqrt();
            l[(j, j)] = ljj;
            for i in (j + 1)..n {
                let mut s = a[(i, j)];
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)];
                }
                l[(i, j)] = s / ljj;
            }
        }
        Ok(Self { lower: l })
    }

    pub fn dim(&self) -> usize {
        self.lower.dim()
    }

    pub fn lower(&self) -> &SquareMatrix {
        &self.lower
    }

    /// Smallest squared diagonal entry of `L` (the smallest Cholesky pivot).
    pub fn min_pivot(&self) -> f64 {
        (0..self.dim())
            .map(|i| self.lower[(i, i)] * self.lower[(i, i)])
            .fold(f64::INFINITY, f64::min)
    }

    pub fn ln_det(&self) -> f64 {
        2.0 * (0..self.dim()).map(|i| self.lower[(i, i)].ln()).sum::<f64>()
    }

    /// Solves `L·y = b`.
    pub fn forward(&self, b: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let l = &self.lower;
        let mut y = b.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for k in 0..i {
                s -= l[(i, k)] * y[k];
            }
            y[i] = s / l[(i, i)];
        }
        y
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let l = &self.lower;
        let mut x = self.forward(b);
        for i in (0..n).rev() {
            let mut s = x[i];
            for k in (i + 1)..n {
                s -= l[(k, i)] * x[k];
            }
            x[i] = s / l[(i, i)];
        }
        x
    }

    /// `vᵀA⁻¹v`, the squared Mahalanobis norm.
    pub fn mahalanobis_sq(&self, v: &[f64]) -> f64 {
        self.forward(v).iter().map(|y| y * y).sum()
    }
}

/// Determinant via LU factorization with partial pivoting. Singular input gives 0.
pub fn determinant(m: &SquareMatrix) -> f64 {
    let n = m.dim();
    let mut a = m.as_slice().to_vec();
    let mut det = 1.0;
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&i, &j| a[i * n + col].abs().total_cmp(&a[j * n + col].abs()))
            .unwrap_or(col);
        let pivot = a[pivot_row * n + col];
        if pivot == 0.0 {
            return 0.0;
        }
        if pivot_row != col {
            for k in 0..n {
                a.swap(col * n + k, pivot_row * n + k);
            }
            det = -det;
        }
        det *= pivot;
        for r in (col + 1)..n {
            let factor = a[r * n + col] / pivot;
            if factor == 0.0 {
                continue;
            }
            for k in col..n {
                a[r * n + k] -= factor * a[col * n + k];
            }
        }
    }
    det
}

/// Solves `a·x = b` for symmetric positive definite `a` by Cholesky.
pub fn solve_spd(a: &SquareMatrix, b: &[f64]) -> Result<Vec<f64>> {
    if b.len() != a.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            got: b.len(),
        });
    }
    Ok(Cholesky::new(a)?.solve(b))
}

/// Ridge coefficient relative to `trace(AᵀA)` used when the plain fit is singular.
pub const LSQ_RIDGE: f64 = 1e-10;

/// Least-squares coefficients `c` minimizing `‖target − design·c‖²`.
///
/// Solved by Householder QR on the design matrix. If the triangular factor is
/// numerically singular, falls back to the normal equations with a ridge term
/// `LSQ_RIDGE·trace(AᵀA)` on the diagonal.
pub fn least_squares(design: &Matrix, target: &[f64]) -> Result<Vec<f64>> {
    let (n, b) = (design.rows(), design.cols());
    if target.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: target.len(),
        });
    }
    if b == 0 || n < b {
        return Err(Error::RankDeficient);
    }
    match householder_solve(design, target) {
        Some(c) => Ok(c),
        None => ridge_solve(design, target),
    }
}

fn householder_solve(design: &Matrix, target: &[f64]) -> Option<Vec<f64>> {
    let (n, b) = (design.rows(), design.cols());
    let mut a = design.clone();
    let mut y = target.to_vec();
    let col_scale: f64 = (0..b)
        .map(|j| (0..n).map(|i| a[(i, j)] * a[(i, j)]).sum::<f64>().sqrt())
        .fold(0.0, f64::max);
    if col_scale == 0.0 {
        return None;
    }
    let mut diag = vec![0.0; b];
    for k in 0..b {
        let norm = (k..n).map(|i| a[(i, k)] * a[(i, k)]).sum::<f64>().sqrt();
        if norm <= 1e-13 * col_scale {
            return None;
        }
        let alpha = if a[(k, k)] > 0.0 { -norm } else { norm };
        // v = x − alpha·e_k, stored in column k
        a[(k, k)] -= alpha;
        let vnorm_sq: f64 = (k..n).map(|i| a[(i, k)] * a[(i, k)]).sum();
        diag[k] = alpha;
        if vnorm_sq == 0.0 {
            continue;
        }
        for j in (k + 1)..b {
            let s: f64 = (k..n).map(|i| a[(i, k)] * a[(i, j)]).sum();
            let f = 2.0 * s / vnorm_sq;
            for i in k..n {
                let vik = a[(i, k)];
                a[(i, j)] -= f * vik;
            }
        }
        let s: f64 = (k..n).map(|i| a[(i, k)] * y[i]).sum();
        let f = 2.0 * s / vnorm_sq;
        for i in k..n {
            y[i] -= f * a[(i, k)];
        }
    }
    let mut c = vec![0.0; b];
    for i in (0..b).rev() {
        let mut s = y[i];
        for j in (i + 1)..b {
            s -= a[(i, j)] * c[j];
        }
        c[i] = s / diag[i];
    }
    c.iter().all(|v| v.is_finite()).then_some(c)
}

fn ridge_solve(design: &Matrix, target: &[f64]) -> Result<Vec<f64>> {
    let mut normal = design.gram();
    let lambda = LSQ_RIDGE * normal.trace();
    normal.add_diagonal(lambda);
    let rhs = design.tr_mul_vec(target);
    match Cholesky::new(&normal) {
        Ok(ch) => Ok(ch.solve(&rhs)),
        Err(_) => Err(Error::RankDeficient),
    }
}

fn simpson_weight(i: usize, n: usize) -> f64 {
    if i == 0 || i == n {
        1.0
    } else if i % 2 == 1 {
        4.0
    } else {
        2.0
    }
}

/// Composite Simpson rule on `[lo, hi]` with `n` (even) segments.
pub fn simpson_1d<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, n: usize) -> Result<f64> {
    if n < 2 || !n.is_multiple_of(2) {
        return Err(Error::InvalidConfig(format!(
            "Simpson segment count must be even and >= 2, got {n}"
        )));
    }
    let h = (hi - lo) / n as f64;
    let s: f64 = (0..=n)
        .map(|i| simpson_weight(i, n) * f(lo + i as f64 * h))
        .sum();
    Ok(s * h / 3.0)
}

/// Composite 2-D Simpson rule on `[xlo,xhi]×[ylo,yhi]` with `n` (even)
/// segments per axis. Rows are evaluated in parallel and summed in order.
pub fn simpson_2d<F>(f: F, xlo: f64, xhi: f64, ylo: f64, yhi: f64, n: usize) -> Result<f64>
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    if n < 2 || !n.is_multiple_of(2) {
        return Err(Error::InvalidConfig(format!(
            "Simpson segment count must be even and >= 2, got {n}"
        )));
    }
    let hx = (xhi - xlo) / n as f64;
    let hy = (yhi - ylo) / n as f64;
    let rows: Vec<f64> = (0..=n)
        .into_par_iter()
        .map(|i| {
            let x = xlo + i as f64 * hx;
            let inner: f64 = (0..=n)
                .map(|j| simpson_weight(j, n) * f(x, ylo + j as f64 * hy))
                .sum();
            simpson_weight(i, n) * inner
        })
        .collect();
    Ok(rows.iter().sum::<f64>() * hx * hy / 9.0)
}
