//! Dense row-major matrices and symmetric eigensolvers.
//!
//! [`sym_eigen`] is a cyclic Jacobi solver returning the full spectrum.
//! [`leading_eigenpair`] is a restarted Lanczos iteration for the largest
//! eigenpair only, used when a kernel matrix is too large for Jacobi sweeps.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Off-diagonal Frobenius norm at which Jacobi sweeps stop, relative to
/// `max(1, ‖A‖_F)`.
pub const JACOBI_TOLERANCE: f64 = 1e-12;
/// Maximum number of full Jacobi sweeps.
pub const JACOBI_MAX_SWEEPS: usize = 100;
/// Symmetry tolerance on input matrices, relative to `max(1, max|a_ij|)`.
pub const SYMMETRY_TOLERANCE: f64 = 1e-9;

/// Dense row-major matrix of finite reals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows * cols != data.len() {
            return invalid(format!(
                "matrix {rows}x{cols} needs {} entries, got {}",
                rows * cols,
                data.len()
            ));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return invalid(format!(
                "non-finite entry at ({}, {})",
                pos / cols.max(1),
                pos % cols.max(1)
            ));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return invalid("ragged rows");
        }
        Self::new(rows.len(), cols, rows.concat())
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, d) in diag.iter().enumerate() {
            m.data[i * n + i] = *d;
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub(crate) fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    /// Copies the listed rows into a new matrix.
    pub fn select_rows(&self, idx: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(idx.len() * self.cols);
        for &i in idx {
            data.extend_from_slice(self.row(i));
        }
        Matrix {
            rows: idx.len(),
            cols: self.cols,
            data,
        }
    }

    pub fn select_columns(&self, cols: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(self.rows * cols.len());
        for i in 0..self.rows {
            let r = self.row(i);
            data.extend(cols.iter().map(|&c| r[c]));
        }
        Matrix {
            rows: self.rows,
            cols: cols.len(),
            data,
        }
    }

    /// Contiguous row range `[start, end)`.
    pub fn row_range(&self, start: usize, end: usize) -> Matrix {
        Matrix {
            rows: end - start,
            cols: self.cols,
            data: self.data[start * self.cols..end * self.cols].to_vec(),
        }
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.get(i, j);
            }
        }
        t
    }

    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return invalid(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            ));
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for (d, b) in dst.iter_mut().zip(other.row(k)) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.cols);
        (0..self.rows).map(|i| dot(self.row(i), x)).collect()
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        debug_assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Symmetric within `tol · max(1, max|a_ij|)`.
    pub fn is_symmetric(&self, tol: f64) -> bool {
        if !self.is_square() {
            return false;
        }
        let bound = tol * self.max_abs().max(1.0);
        (0..self.rows)
            .all(|i| (i + 1..self.cols).all(|j| (self.get(i, j) - self.get(j, i)).abs() <= bound))
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Eigendecomposition of a symmetric matrix.
#[derive(Debug, Clone)]
pub struct SymEigen {
    /// Sorted descending.
    pub values: Vec<f64>,
    /// Column `k` is the unit eigenvector of `values[k]`.
    pub vectors: Matrix,
}

impl SymEigen {
    pub fn vector(&self, k: usize) -> Vec<f64> {
        self.vectors.column(k)
    }
}

/// Full eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// Sweeps stop once the off-diagonal Frobenius norm drops below
/// [`JACOBI_TOLERANCE`]` · max(1, ‖A‖_F)`; more than [`JACOBI_MAX_SWEEPS`]
/// sweeps is reported as [`Error::NumericalFailure`]. Eigenvalues come back in
/// descending order (ties keep their diagonal order).
pub fn sym_eigen(m: &Matrix) -> Result<SymEigen> {
    if !m.is_square() {
        return invalid(format!(
            "eigen input must be square, got {}x{}",
            m.rows, m.cols
        ));
    }
    if !m.is_symmetric(SYMMETRY_TOLERANCE) {
        return invalid("eigen input is not symmetric");
    }
    let n = m.rows;
    if n == 0 {
        return Ok(SymEigen {
            values: vec![],
            vectors: Matrix::zeros(0, 0),
        });
    }

    // symmetrize so both triangles agree bit for bit
    let mut a = m.clone();
    for i in 0..n {
        for j in i + 1..n {
            let v = 0.5 * (a.get(i, j) + a.get(j, i));
            a.set(i, j, v);
            a.set(j, i, v);
        }
    }
    let stop = JACOBI_TOLERANCE * a.frobenius().max(1.0);

    // row k of `vt` is eigenvector k
    let mut vt = Matrix::identity(n);
    let mut converged = false;
    for sweep in 0..=JACOBI_MAX_SWEEPS {
        if off_diagonal_norm(&a) <= stop {
            converged = true;
            break;
        }
        if sweep == JACOBI_MAX_SWEEPS {
            break;
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = a.get(p, q);
                if apq == 0.0 {
                    continue;
                }
                let app = a.get(p, p);
                let aqq = a.get(q, q);
                let g = 100.0 * apq.abs();
                if sweep > 3 && app.abs() + g == app.abs() && aqq.abs() + g == aqq.abs() {
                    a.set(p, q, 0.0);
                    a.set(q, p, 0.0);
                    continue;
                }
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                rotate(&mut a, p, q, c, s);
                a.set(p, p, app - t * apq);
                a.set(q, q, aqq + t * apq);
                a.set(p, q, 0.0);
                a.set(q, p, 0.0);
                rotate_rows(&mut vt, p, q, c, s);
            }
        }
    }
    if !converged {
        return Err(Error::NumericalFailure(format!(
            "Jacobi did not converge within {JACOBI_MAX_SWEEPS} sweeps (n = {n})"
        )));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a.get(j, j).total_cmp(&a.get(i, i)).then(i.cmp(&j)));
    let values = order.iter().map(|&k| a.get(k, k)).collect();
    let mut vectors = Matrix::zeros(n, n);
    for (col, &k) in order.iter().enumerate() {
        for (row, v) in vt.row(k).iter().enumerate() {
            vectors.set(row, col, *v);
        }
    }
    Ok(SymEigen { values, vectors })
}

fn off_diagonal_norm(a: &Matrix) -> f64 {
    let n = a.rows;
    let mut s = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            let v = a.get(i, j);
            s += v * v;
        }
    }
    (2.0 * s).sqrt()
}

/// Applies the rotation to rows p, q of a symmetric matrix and mirrors the
/// result into columns p, q. Diagonal and (p, q) entries are fixed up by the
/// caller.
fn rotate(a: &mut Matrix, p: usize, q: usize, c: f64, s: f64) {
    let n = a.cols;
    let (head, tail) = a.data.split_at_mut(q * n);
    let row_p = &mut head[p * n..(p + 1) * n];
    let row_q = &mut tail[..n];
    for k in 0..n {
        let x = row_p[k];
        let y = row_q[k];
        row_p[k] = c * x - s * y;
        row_q[k] = s * x + c * y;
    }
    for k in 0..n {
        if k == p || k == q {
            continue;
        }
        a.data[k * n + p] = a.data[p * n + k];
        a.data[k * n + q] = a.data[q * n + k];
    }
}

fn rotate_rows(vt: &mut Matrix, p: usize, q: usize, c: f64, s: f64) {
    let n = vt.cols;
    let (head, tail) = vt.data.split_at_mut(q * n);
    let row_p = &mut head[p * n..(p + 1) * n];
    let row_q = &mut tail[..n];
    for (x, y) in row_p.iter_mut().zip(row_q.iter_mut()) {
        let (xp, yq) = (*x, *y);
        *x = c * xp - s * yq;
        *y = s * xp + c * yq;
    }
}

/// Largest (algebraic) eigenpair of a symmetric operator given as a
/// matrix-vector product, by restarted Lanczos with full reorthogonalization.
///
/// Converged when `‖A v − λ v‖ ≤ tol · max(1, |λ|)`.
pub fn leading_eigenpair<F>(n: usize, matvec: F, tol: f64) -> Result<(f64, Vec<f64>)>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    const KRYLOV_DIM: usize = 60;
    const MAX_RESTARTS: usize = 200;
    if n == 0 {
        return invalid("empty operator");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut start: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();

    for _ in 0..MAX_RESTARTS {
        let s_norm = norm(&start);
        start.iter_mut().for_each(|v| *v /= s_norm);
        let m = KRYLOV_DIM.min(n);
        let mut basis: Vec<Vec<f64>> = vec![start.clone()];
        let mut alphas = Vec::with_capacity(m);
        let mut betas: Vec<f64> = Vec::with_capacity(m);
        for j in 0..m {
            let mut w = matvec(&basis[j]);
            let alpha = dot(&w, &basis[j]);
            alphas.push(alpha);
            // full reorthogonalization, twice for stability
            for _ in 0..2 {
                for b in &basis {
                    let proj = dot(&w, b);
                    w.iter_mut().zip(b).for_each(|(x, y)| *x -= proj * y);
                }
            }
            let beta = norm(&w);
            betas.push(beta);
            if j + 1 == m || beta <= 1e-14 * alpha.abs().max(1.0) {
                break;
            }
            w.iter_mut().for_each(|v| *v /= beta);
            basis.push(w);
        }
        let k = alphas.len();
        let mut t = Matrix::zeros(k, k);
        for i in 0..k {
            t.set(i, i, alphas[i]);
            if i + 1 < k {
                t.set(i, i + 1, betas[i]);
                t.set(i + 1, i, betas[i]);
            }
        }
        let eig = sym_eigen(&t)?;
        let lambda = eig.values[0];
        let s = eig.vector(0);
        let mut ritz = vec![0.0; n];
        for (b, coef) in basis.iter().zip(&s) {
            ritz.iter_mut().zip(b).for_each(|(r, x)| *r += coef * x);
        }
        let r_norm = norm(&ritz);
        ritz.iter_mut().for_each(|v| *v /= r_norm);
        let av = matvec(&ritz);
        let resid = av
            .iter()
            .zip(&ritz)
            .map(|(a, v)| (a - lambda * v).powi(2))
            .sum::<f64>()
            .sqrt();
        if resid <= tol * lambda.abs().max(1.0) {
            return Ok((lambda, ritz));
        }
        start = ritz;
    }
    Err(Error::NumericalFailure(format!(
        "Lanczos did not converge within {MAX_RESTARTS} restarts (n = {n})"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn assert_pair(m: &Matrix, eig: &SymEigen, tol: f64) {
        for k in 0..m.rows() {
            let v = eig.vector(k);
            let mv = m.matvec(&v);
            for (a, b) in mv.iter().zip(&v) {
                assert_abs_diff_eq!(*a, eig.values[k] * b, epsilon = tol);
            }
        }
    }

    #[test]
    fn diagonal() {
        let m = Matrix::from_diag(&[1.0, 2.0]);
        let eig = sym_eigen(&m).unwrap();
        assert_eq!(eig.values, vec![2.0, 1.0]);
        assert_eq!(eig.vector(0), vec![0.0, 1.0]);
        assert_eq!(eig.vector(1), vec![1.0, 0.0]);
    }

    #[test]
    fn identity_has_unit_spectrum() {
        let eig = sym_eigen(&Matrix::identity(3)).unwrap();
        assert_eq!(eig.values, vec![1.0; 3]);
    }

    #[test]
    fn swap_matrix() {
        let m = Matrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let eig = sym_eigen(&m).unwrap();
        assert_abs_diff_eq!(eig.values[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(eig.values[1], -1.0, epsilon = 1e-12);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let v0 = eig.vector(0);
        assert_abs_diff_eq!(v0[0].abs(), h, epsilon = 1e-12);
        assert_abs_diff_eq!(v0[0], v0[1], epsilon = 1e-12);
        let v1 = eig.vector(1);
        assert_abs_diff_eq!(v1[0], -v1[1], epsilon = 1e-12);
        assert_pair(&m, &eig, 1e-7);
    }

    #[test]
    fn rejects_bad_input() {
        let rect = Matrix::zeros(2, 3);
        assert!(matches!(sym_eigen(&rect), Err(Error::InvalidInput(_))));
        let asym = Matrix::from_rows(&[vec![1.0, 2.0], vec![0.0, 1.0]]).unwrap();
        assert!(matches!(sym_eigen(&asym), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn new_rejects_nonfinite() {
        assert!(Matrix::new(1, 2, vec![1.0, f64::NAN]).is_err());
        assert!(Matrix::new(1, 2, vec![1.0]).is_err());
    }

    #[test]
    fn lanczos_matches_jacobi() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 40;
        let b = Matrix::new(
            n,
            n,
            (0..n * n).map(|_| rng.random::<f64>() - 0.5).collect(),
        )
        .unwrap();
        let m = b.transpose().matmul(&b).unwrap();
        let eig = sym_eigen(&m).unwrap();
        let (lambda, v) = leading_eigenpair(n, |x| m.matvec(x), 1e-10).unwrap();
        assert_abs_diff_eq!(lambda, eig.values[0], epsilon = 1e-8);
        let d = dot(&v, &eig.vector(0)).abs();
        assert_abs_diff_eq!(d, 1.0, epsilon = 1e-8);
    }

    #[test]
    fn matmul_and_transpose() {
        let a = Matrix::from_rows(&[vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 6.0]]).unwrap();
        let ata = a.transpose().matmul(&a).unwrap();
        assert_eq!(ata.row(0), &[17.0, 22.0, 27.0]);
        assert!(ata.is_symmetric(0.0));
        assert!(a.matmul(&a).is_err());
    }
}
