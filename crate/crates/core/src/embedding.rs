//! One-dimensional embeddings of multivariate observations.
//!
//! Both maps z-score every column with training statistics first. [`PcaModel`]
//! projects onto the leading eigenvector of the training covariance matrix;
//! [`KpcaModel`] projects onto the leading component of the centered RBF
//! kernel matrix.
//!
//! # Memory
//!
//! Kernel PCA materializes the N×N training kernel (8·N² bytes: about 1.9 MB
//! for a 492-point window, 1.75 GB for 14,800 points) plus a centered copy.
//! Use [`KpcaOptions::max_train_points`] to bound N on full-length runs.

use serde::{Deserialize, Serialize};

use crate::data_io::TimeSeriesFrame;
use crate::error::{invalid, Error, Result};
use crate::linalg::{dot, leading_eigenpair, sym_eigen, Matrix};
use crate::parallel::{fill_chunks, Execution};

/// Leading centered-kernel eigenvalues at or below this are treated as
/// "no variance in feature space".
pub const DEGENERATE_EIGENVALUE: f64 = 1e-12;

/// Per-column training means and population standard deviations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StandardizationStats {
    pub means: Vec<f64>,
    pub std_devs: Vec<f64>,
}

impl StandardizationStats {
    pub fn dim(&self) -> usize {
        self.means.len()
    }

    /// Z-scores one point. Zero-variance columns map to 0.
    pub fn apply(&self, point: &[f64]) -> Result<Vec<f64>> {
        if point.len() != self.dim() {
            return invalid(format!(
                "point has {} features, model expects {}",
                point.len(),
                self.dim()
            ));
        }
        Ok(point
            .iter()
            .zip(self.means.iter().zip(&self.std_devs))
            .map(|(x, (m, s))| if *s > 0.0 { (x - m) / s } else { 0.0 })
            .collect())
    }

    pub fn apply_matrix(&self, data: &Matrix) -> Result<Matrix> {
        if data.cols() != self.dim() {
            return invalid(format!(
                "data has {} features, model expects {}",
                data.cols(),
                self.dim()
            ));
        }
        let mut out = Vec::with_capacity(data.rows() * data.cols());
        for i in 0..data.rows() {
            out.extend(self.apply(data.row(i))?);
        }
        Matrix::new(data.rows(), data.cols(), out)
    }

    /// Inverse of [`apply`](Self::apply) for non-constant columns; constant
    /// columns return their mean.
    pub fn invert(&self, z: &[f64]) -> Vec<f64> {
        z.iter()
            .zip(self.means.iter().zip(&self.std_devs))
            .map(|(v, (m, s))| m + s * v)
            .collect()
    }
}

/// Z-scores each column. Constant columns become all zeros.
pub fn standardize(data: &Matrix) -> Result<(Matrix, StandardizationStats)> {
    if data.is_empty() {
        return invalid("cannot standardize an empty matrix");
    }
    let n = data.rows() as f64;
    let m = data.cols();
    let mut means = vec![0.0; m];
    for i in 0..data.rows() {
        for (acc, v) in means.iter_mut().zip(data.row(i)) {
            *acc += v;
        }
    }
    means.iter_mut().for_each(|v| *v /= n);
    let mut vars = vec![0.0; m];
    for i in 0..data.rows() {
        for ((acc, v), mu) in vars.iter_mut().zip(data.row(i)).zip(&means) {
            *acc += (v - mu) * (v - mu);
        }
    }
    let std_devs: Vec<f64> = vars
        .iter()
        .zip(&means)
        .map(|(v, mu)| {
            let s = (v / n).sqrt();
            // rounding residue on a constant column
            if s <= 1e-12 * mu.abs().max(1.0) {
                0.0
            } else {
                s
            }
        })
        .collect();
    let stats = StandardizationStats { means, std_devs };
    let z = stats.apply_matrix(data)?;
    Ok((z, stats))
}

/// Sample covariance (divisor N−1) of the columns.
pub fn covariance_matrix(data: &Matrix) -> Result<Matrix> {
    let n = data.rows();
    if n < 2 {
        return invalid(format!("covariance needs at least 2 rows, got {n}"));
    }
    let m = data.cols();
    let mut means = vec![0.0; m];
    for i in 0..n {
        for (acc, v) in means.iter_mut().zip(data.row(i)) {
            *acc += v;
        }
    }
    means.iter_mut().for_each(|v| *v /= n as f64);
    let mut cov = Matrix::zeros(m, m);
    let mut centered = vec![0.0; m];
    for i in 0..n {
        for ((c, v), mu) in centered.iter_mut().zip(data.row(i)).zip(&means) {
            *c = v - mu;
        }
        for a in 0..m {
            for b in a..m {
                let v = cov.get(a, b) + centered[a] * centered[b];
                cov.set(a, b, v);
            }
        }
    }
    let denom = (n - 1) as f64;
    for a in 0..m {
        for b in a..m {
            let v = cov.get(a, b) / denom;
            cov.set(a, b, v);
            cov.set(b, a, v);
        }
    }
    Ok(cov)
}

/// Flips `v` so its largest-magnitude entry is positive (first index wins
/// ties). Returns whether a flip happened.
fn orient(v: &mut [f64]) -> bool {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    if v.get(best).is_some_and(|x| *x < 0.0) {
        v.iter_mut().for_each(|x| *x = -*x);
        true
    } else {
        false
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaModel {
    pub stats: StandardizationStats,
    /// Unit eigenvector of the largest covariance eigenvalue.
    pub component: Vec<f64>,
    pub eigenvalue: f64,
    pub n_components: usize,
}

/// Fits a one-component PCA on z-scored data.
pub fn fit_pca(data: &Matrix) -> Result<PcaModel> {
    if data.rows() < 2 || data.cols() == 0 {
        return invalid(format!(
            "PCA needs at least 2 rows and 1 column, got {}x{}",
            data.rows(),
            data.cols()
        ));
    }
    let (z, stats) = standardize(data)?;
    let cov = covariance_matrix(&z)?;
    let eig = sym_eigen(&cov)?;
    let mut component = eig.vector(0);
    orient(&mut component);
    Ok(PcaModel {
        stats,
        component,
        eigenvalue: eig.values[0].max(0.0),
        n_components: 1,
    })
}

impl PcaModel {
    pub fn project(&self, point: &[f64]) -> Result<f64> {
        let z = self.stats.apply(point)?;
        Ok(dot(&self.component, &z))
    }

    /// Maps a score back to the original feature space.
    pub fn reconstruct(&self, score: f64) -> Vec<f64> {
        let z: Vec<f64> = self.component.iter().map(|c| c * score).collect();
        self.stats.invert(&z)
    }
}

pub fn project_pca(model: &PcaModel, point: &[f64]) -> Result<f64> {
    model.project(point)
}

/// `K[i][j] = exp(-gamma · ‖a_i − b_j‖²)`.
pub fn rbf_kernel_matrix(a: &Matrix, b: &Matrix, gamma: f64) -> Result<Matrix> {
    rbf_kernel_matrix_with(a, b, gamma, Execution::default())
}

pub fn rbf_kernel_matrix_with(
    a: &Matrix,
    b: &Matrix,
    gamma: f64,
    exec: Execution,
) -> Result<Matrix> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return invalid(format!("kernel coefficient must be positive, got {gamma}"));
    }
    if a.cols() != b.cols() {
        return invalid(format!(
            "kernel inputs differ in width: {} vs {}",
            a.cols(),
            b.cols()
        ));
    }
    let mut k = Matrix::zeros(a.rows(), b.rows());
    let width = b.rows();
    // rows are filled independently, so the result does not depend on `exec`
    fill_chunks(exec, k.as_mut_slice(), width, |i, out| {
        let x = a.row(i);
        for (j, o) in out.iter_mut().enumerate() {
            *o = rbf(x, b.row(j), gamma);
        }
    });
    Ok(k)
}

#[inline]
fn rbf(x: &[f64], y: &[f64], gamma: f64) -> f64 {
    let d2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
    (-gamma * d2).exp()
}

/// Double-centers a square kernel matrix:
/// `K − 1_N K − K 1_N + 1_N K 1_N` with `1_N` the all-`1/N` matrix.
pub fn center_kernel(k: &Matrix) -> Result<Matrix> {
    if !k.is_square() {
        return invalid(format!(
            "kernel matrix must be square, got {}x{}",
            k.rows(),
            k.cols()
        ));
    }
    let n = k.rows();
    let (row_means, col_means, grand) = kernel_means(k);
    let mut out = Matrix::zeros(n, n);
    for (i, rm) in row_means.iter().enumerate() {
        for (j, cm) in col_means.iter().enumerate() {
            out.set(i, j, k.get(i, j) - rm - cm + grand);
        }
    }
    Ok(out)
}

fn kernel_means(k: &Matrix) -> (Vec<f64>, Vec<f64>, f64) {
    let (r, c) = (k.rows(), k.cols());
    let row_means: Vec<f64> = (0..r)
        .map(|i| k.row(i).iter().sum::<f64>() / c as f64)
        .collect();
    let mut col_means = vec![0.0; c];
    for i in 0..r {
        for (acc, v) in col_means.iter_mut().zip(k.row(i)) {
            *acc += v;
        }
    }
    col_means.iter_mut().for_each(|v| *v /= r as f64);
    let grand = row_means.iter().sum::<f64>() / r as f64;
    (row_means, col_means, grand)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KpcaOptions {
    /// Evenly spaced subsample of the training rows when exceeded.
    pub max_train_points: Option<usize>,
    /// Largest N solved with the dense Jacobi eigensolver; above it only the
    /// leading pair is computed by Lanczos.
    pub dense_solver_limit: usize,
    pub execution: Execution,
}

impl Default for KpcaOptions {
    fn default() -> Self {
        Self {
            max_train_points: None,
            dense_solver_limit: 1024,
            execution: Execution::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KpcaModel {
    pub stats: StandardizationStats,
    /// Standardized training points.
    pub training_points: Matrix,
    pub gamma: f64,
    /// Scaled so that `alphaᵀ K̃ alpha = 1`.
    pub alpha: Vec<f64>,
    /// Leading eigenvalue of the centered training kernel.
    pub lambda: f64,
    pub train_kernel_row_means: Vec<f64>,
    pub train_kernel_grand_mean: f64,
    /// Projections of the training points, `K̃ alpha`.
    pub training_scores: Vec<f64>,
}

pub fn fit_kpca(data: &Matrix, gamma: f64) -> Result<KpcaModel> {
    fit_kpca_with(data, gamma, &KpcaOptions::default())
}

/// Fits a one-component RBF kernel PCA on z-scored data.
pub fn fit_kpca_with(data: &Matrix, gamma: f64, opts: &KpcaOptions) -> Result<KpcaModel> {
    if data.rows() < 3 {
        return invalid(format!(
            "kernel PCA needs at least 3 rows, got {}",
            data.rows()
        ));
    }
    if !(gamma > 0.0 && gamma.is_finite()) {
        return invalid(format!("kernel coefficient must be positive, got {gamma}"));
    }
    let (z, stats) = standardize(data)?;
    let z = match opts.max_train_points {
        Some(cap) if cap < 3 => return invalid("training subsample cap must be at least 3"),
        Some(cap) if cap < z.rows() => {
            let n = z.rows();
            let idx: Vec<usize> = (0..cap).map(|i| i * n / cap).collect();
            log::info!("kernel PCA: subsampling {n} training rows to {cap}");
            z.select_rows(&idx)
        }
        _ => z,
    };
    let n = z.rows();
    let k = rbf_kernel_matrix_with(&z, &z, gamma, opts.execution)?;
    let (row_means, _, grand) = kernel_means(&k);
    let kc = center_kernel(&k)?;
    drop(k);

    let (lambda, v) = if n <= opts.dense_solver_limit {
        let eig = sym_eigen(&kc)?;
        (eig.values[0], eig.vector(0))
    } else {
        log::info!("kernel PCA: N = {n} above dense limit, using Lanczos");
        leading_eigenpair(n, |x| kc.matvec(x), 1e-10)?
    };
    if lambda.is_nan() || lambda <= DEGENERATE_EIGENVALUE {
        return Err(Error::DegenerateEmbedding(format!(
            "leading centered-kernel eigenvalue {lambda:e} (training points coincide in feature space)"
        )));
    }
    let scale = lambda.sqrt();
    let mut alpha: Vec<f64> = v.iter().map(|x| x / scale).collect();
    let mut training_scores = kc.matvec(&alpha);
    if orient(&mut training_scores) {
        alpha.iter_mut().for_each(|a| *a = -*a);
    }
    Ok(KpcaModel {
        stats,
        training_points: z,
        gamma,
        alpha,
        lambda,
        train_kernel_row_means: row_means,
        train_kernel_grand_mean: grand,
        training_scores,
    })
}

impl KpcaModel {
    pub fn project(&self, point: &[f64]) -> Result<f64> {
        let z = self.stats.apply(point)?;
        Ok(self.project_standardized(&z))
    }

    fn project_standardized(&self, z: &[f64]) -> f64 {
        let n = self.training_points.rows();
        let kx: Vec<f64> = (0..n)
            .map(|i| rbf(z, self.training_points.row(i), self.gamma))
            .collect();
        let kx_mean = kx.iter().sum::<f64>() / n as f64;
        kx.iter()
            .zip(&self.train_kernel_row_means)
            .zip(&self.alpha)
            .map(|((k, r), a)| a * (k - kx_mean - r + self.train_kernel_grand_mean))
            .sum()
    }
}

pub fn project_kpca(model: &KpcaModel, point: &[f64]) -> Result<f64> {
    model.project(point)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum EmbeddingMethod {
    Pca,
    Kpca { gamma: f64 },
}

impl EmbeddingMethod {
    pub fn source(&self) -> EmbeddingSource {
        match self {
            EmbeddingMethod::Pca => EmbeddingSource::Pca,
            EmbeddingMethod::Kpca { .. } => EmbeddingSource::Kpca,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EmbeddingSource {
    Pca,
    Kpca,
}

/// A fitted embedding map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Embedder {
    Pca(PcaModel),
    Kpca(KpcaModel),
}

impl Embedder {
    pub fn project(&self, point: &[f64]) -> Result<f64> {
        match self {
            Embedder::Pca(m) => m.project(point),
            Embedder::Kpca(m) => m.project(point),
        }
    }

    pub fn source(&self) -> EmbeddingSource {
        match self {
            Embedder::Pca(_) => EmbeddingSource::Pca,
            Embedder::Kpca(_) => EmbeddingSource::Kpca,
        }
    }
}

/// Min/max of the training portion, used to rescale to `[0, 100]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinMax {
    pub min: f64,
    pub max: f64,
}

impl MinMax {
    pub fn of(values: &[f64]) -> Option<Self> {
        let first = *values.first()?;
        let (min, max) = values
            .iter()
            .fold((first, first), |(lo, hi), v| (lo.min(*v), hi.max(*v)));
        Some(Self { min, max })
    }

    fn range(&self) -> f64 {
        let r = self.max - self.min;
        if r > 0.0 {
            r
        } else {
            1.0
        }
    }

    pub fn to_percent(&self, v: f64) -> f64 {
        100.0 * (v - self.min) / self.range()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddedSeries {
    pub values: Vec<f64>,
    pub source: EmbeddingSource,
    pub normalization: Option<MinMax>,
}

impl EmbeddedSeries {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Values rescaled to `[0, 100]` by the training min/max.
    pub fn normalized(&self) -> Option<Vec<f64>> {
        let mm = self.normalization?;
        Some(self.values.iter().map(|v| mm.to_percent(*v)).collect())
    }
}

/// Which frame columns feed the embedding.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingConfig {
    /// Leave the frame's target column out of the embedded features.
    pub exclude_target: bool,
    pub kpca: KpcaOptions,
}

/// Column indices used as embedding features.
pub fn feature_columns(frame: &TimeSeriesFrame, cfg: &EmbeddingConfig) -> Vec<usize> {
    let target = if cfg.exclude_target {
        frame.target_index()
    } else {
        None
    };
    (0..frame.n_columns())
        .filter(|i| Some(*i) != target)
        .collect()
}

/// Fits the embedding on the first `train_len` rows of `data` and projects
/// every row.
pub fn embed_matrix(
    data: &Matrix,
    method: EmbeddingMethod,
    train_len: usize,
    kpca: &KpcaOptions,
) -> Result<(EmbeddedSeries, Embedder)> {
    if train_len == 0 || train_len > data.rows() {
        return invalid(format!(
            "training prefix {train_len} outside 1..={}",
            data.rows()
        ));
    }
    let train = data.row_range(0, train_len);
    let model = match method {
        EmbeddingMethod::Pca => Embedder::Pca(fit_pca(&train)?),
        EmbeddingMethod::Kpca { gamma } => Embedder::Kpca(fit_kpca_with(&train, gamma, kpca)?),
    };
    let values = match &model {
        // fit-time scores are reused for the unsampled training rows
        Embedder::Kpca(m) if m.training_points.rows() == train_len => {
            let mut v = m.training_scores.clone();
            for i in train_len..data.rows() {
                v.push(m.project(data.row(i))?);
            }
            v
        }
        _ => (0..data.rows())
            .map(|i| model.project(data.row(i)))
            .collect::<Result<Vec<_>>>()?,
    };
    let normalization = MinMax::of(&values[..train_len]);
    Ok((
        EmbeddedSeries {
            values,
            source: method.source(),
            normalization,
        },
        model,
    ))
}

/// Embeds a frame: fit on the first `train_len` rows, project all rows.
pub fn embed_series(
    frame: &TimeSeriesFrame,
    method: EmbeddingMethod,
    train_len: usize,
    cfg: &EmbeddingConfig,
) -> Result<(EmbeddedSeries, Embedder)> {
    let cols = feature_columns(frame, cfg);
    if cols.is_empty() {
        return invalid("no feature columns left to embed");
    }
    let data = frame.values().select_columns(&cols);
    embed_matrix(&data, method, train_len, &cfg.kpca)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn m(rows: &[&[f64]]) -> Matrix {
        Matrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn standardize_column() {
        let (z, stats) = standardize(&m(&[&[2.0], &[4.0], &[6.0]])).unwrap();
        let expect = [-1.224744871391589, 0.0, 1.224744871391589];
        for (i, e) in expect.iter().enumerate() {
            assert_abs_diff_eq!(z.get(i, 0), *e, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(stats.means[0], 4.0);
        assert_abs_diff_eq!(stats.std_devs[0], 1.632993161855452, epsilon = 1e-12);
    }

    #[test]
    fn standardize_constant_and_idempotent() {
        let (z, stats) = standardize(&m(&[&[5.0], &[5.0], &[5.0]])).unwrap();
        assert_eq!(z.column(0), vec![0.0; 3]);
        assert_eq!(stats.std_devs[0], 0.0);

        let col = [-1.224744871391589, 0.0, 1.224744871391589];
        let (z2, _) = standardize(&m(&[&[col[0]], &[col[1]], &[col[2]]])).unwrap();
        for (i, c) in col.iter().enumerate() {
            assert_abs_diff_eq!(z2.get(i, 0), *c, epsilon = 1e-9);
        }
        assert!(standardize(&Matrix::zeros(0, 0)).is_err());
    }

    #[test]
    fn covariance_examples() {
        let c = covariance_matrix(&m(&[&[1.0, 1.0], &[2.0, 2.0], &[3.0, 3.0]])).unwrap();
        assert_eq!(c.as_slice(), &[1.0, 1.0, 1.0, 1.0]);
        let c = covariance_matrix(&m(&[&[1.0, 7.0], &[2.0, 7.0], &[4.0, 7.0]])).unwrap();
        assert_eq!(c.get(1, 1), 0.0);
        assert_eq!(c.get(0, 1), 0.0);
        assert_eq!(c.get(1, 0), 0.0);
        assert!(covariance_matrix(&m(&[&[1.0, 2.0]])).is_err());
    }

    #[test]
    fn pca_diagonal_data() {
        let model = fit_pca(&m(&[&[1.0, 1.0], &[2.0, 2.0], &[3.0, 3.0]])).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert_abs_diff_eq!(model.component[0], h, epsilon = 1e-12);
        assert_abs_diff_eq!(model.component[1], h, epsilon = 1e-12);
        // oracle: standardize by hand then dot with the component
        // population std of [1, 2, 3] is sqrt(2/3)
        let z = 1.0 / (2.0f64 / 3.0).sqrt();
        let expect = h * z + h * z;
        assert_abs_diff_eq!(model.project(&[3.0, 3.0]).unwrap(), expect, epsilon = 1e-12);
        assert_abs_diff_eq!(model.project(&[2.0, 2.0]).unwrap(), 0.0, epsilon = 1e-15);
        assert!(model.project(&[1.0]).is_err());
    }

    #[test]
    fn pca_single_and_constant_columns() {
        let model = fit_pca(&m(&[&[1.0], &[3.0], &[2.0]])).unwrap();
        assert_eq!(model.component, vec![1.0]);

        let model = fit_pca(&m(&[
            &[1.0, 9.0, 2.0],
            &[2.0, 9.0, 1.0],
            &[4.0, 9.0, 5.0],
            &[3.0, 9.0, 3.0],
        ]))
        .unwrap();
        assert_eq!(model.component[1], 0.0);
        assert_abs_diff_eq!(crate::linalg::norm(&model.component), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn pca_unit_projection_along_component() {
        let data = m(&[&[1.0, 0.5], &[2.0, 2.5], &[4.0, 3.0], &[3.0, 1.0]]);
        let model = fit_pca(&data).unwrap();
        let z: Vec<f64> = model.component.clone();
        let p = model.stats.invert(&z);
        assert_abs_diff_eq!(model.project(&p).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn rbf_examples() {
        let a = m(&[&[0.0, 0.0, 0.0], &[1.0, 3.0, 0.0]]);
        let k = rbf_kernel_matrix(&a, &a, 0.1).unwrap();
        assert_eq!(k.get(0, 0), 1.0);
        assert_eq!(k.get(1, 1), 1.0);
        assert_abs_diff_eq!(k.get(0, 1), 0.36787944117144233, epsilon = 1e-15);
        assert_eq!(k.get(0, 1), k.get(1, 0));
        assert!(rbf_kernel_matrix(&a, &a, 0.0).is_err());
        assert!(rbf_kernel_matrix(&a, &m(&[&[1.0]]), 1.0).is_err());
    }

    #[test]
    fn centering_examples() {
        let ones = Matrix::new(3, 3, vec![1.0; 9]).unwrap();
        assert!(center_kernel(&ones)
            .unwrap()
            .as_slice()
            .iter()
            .all(|v| v.abs() < 1e-15));

        let a = 0.3;
        let kc = center_kernel(&m(&[&[1.0, a], &[a, 1.0]])).unwrap();
        let d = (1.0 - a) / 2.0;
        assert_abs_diff_eq!(kc.get(0, 0), d, epsilon = 1e-15);
        assert_abs_diff_eq!(kc.get(0, 1), -d, epsilon = 1e-15);
        assert_abs_diff_eq!(kc.get(1, 0), -d, epsilon = 1e-15);
        assert_abs_diff_eq!(kc.get(1, 1), d, epsilon = 1e-15);
        assert!(center_kernel(&Matrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn kpca_degenerate() {
        let data = m(&[&[1.0, 2.0], &[1.0, 2.0], &[1.0, 2.0]]);
        assert!(matches!(
            fit_kpca(&data, 0.5),
            Err(Error::DegenerateEmbedding(_))
        ));
    }

    #[test]
    fn kpca_two_clusters_have_opposite_signs() {
        let data = m(&[&[0.0, 0.0], &[0.1, 0.0], &[5.0, 5.0], &[5.1, 5.0]]);
        let model = fit_kpca(&data, 0.5).unwrap();
        let s = &model.training_scores;
        assert!(s[0].signum() == s[1].signum());
        assert!(s[2].signum() == s[3].signum());
        assert!(s[0].signum() != s[2].signum());
        assert_abs_diff_eq!(s.iter().sum::<f64>(), 0.0, epsilon = 1e-8);
        for (j, sj) in s.iter().enumerate() {
            assert_abs_diff_eq!(model.project(data.row(j)).unwrap(), *sj, epsilon = 1e-7);
        }
        // unit-norm feature-space component
        let norm: f64 = model.lambda * model.alpha.iter().map(|a| a * a).sum::<f64>();
        assert_abs_diff_eq!(norm, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn kpca_symmetry_center_and_mirror_points() {
        let data = m(&[&[-2.0, 0.0], &[-1.0, 0.0], &[1.0, 0.0], &[2.0, 0.0]]);
        let model = fit_kpca(&data, 0.2).unwrap();
        assert_abs_diff_eq!(model.project(&[0.0, 0.0]).unwrap(), 0.0, epsilon = 1e-12);
        let a = model.project(&[0.5, 0.0]).unwrap();
        let b = model.project(&[-0.5, 0.0]).unwrap();
        assert!(a.abs() > 1e-6);
        assert_abs_diff_eq!(a, -b, epsilon = 1e-10);
    }

    #[test]
    fn kpca_lanczos_path_agrees_with_dense() {
        let rows: Vec<Vec<f64>> = (0..30)
            .map(|i| {
                let t = i as f64 / 5.0;
                vec![t.sin(), t.cos() * 0.5, t * 0.1]
            })
            .collect();
        let data = Matrix::from_rows(&rows).unwrap();
        let dense = fit_kpca(&data, 0.5).unwrap();
        let opts = KpcaOptions {
            dense_solver_limit: 10,
            ..KpcaOptions::default()
        };
        let lanczos = fit_kpca_with(&data, 0.5, &opts).unwrap();
        assert_abs_diff_eq!(dense.lambda, lanczos.lambda, epsilon = 1e-8);
        for (a, b) in dense.training_scores.iter().zip(&lanczos.training_scores) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-6);
        }
    }

    #[test]
    fn kpca_subsample_cap() {
        let rows: Vec<Vec<f64>> = (0..40)
            .map(|i| vec![i as f64, (i * i) as f64 * 0.01])
            .collect();
        let data = Matrix::from_rows(&rows).unwrap();
        let opts = KpcaOptions {
            max_train_points: Some(10),
            ..KpcaOptions::default()
        };
        let model = fit_kpca_with(&data, 0.3, &opts).unwrap();
        assert_eq!(model.training_points.rows(), 10);
        assert_eq!(model.train_kernel_row_means.len(), 10);
        let (series, _) =
            embed_matrix(&data, EmbeddingMethod::Kpca { gamma: 0.3 }, 40, &opts).unwrap();
        assert_eq!(series.len(), 40);
    }

    #[test]
    fn embed_constant_series() {
        let data = Matrix::new(10, 3, vec![4.0; 30]).unwrap();
        let (s, _) = embed_matrix(&data, EmbeddingMethod::Pca, 7, &KpcaOptions::default()).unwrap();
        assert!(s.values.iter().all(|v| *v == 0.0));
        let r = embed_matrix(
            &data,
            EmbeddingMethod::Kpca { gamma: 0.1 },
            7,
            &KpcaOptions::default(),
        );
        assert!(matches!(r, Err(Error::DegenerateEmbedding(_))));
    }

    #[test]
    fn embed_single_column_is_standardized_input() {
        let col = [3.0, 1.0, 4.0, 1.0, 5.0, 9.0, 2.0, 6.0];
        let data = Matrix::new(8, 1, col.to_vec()).unwrap();
        let (s, _) = embed_matrix(&data, EmbeddingMethod::Pca, 8, &KpcaOptions::default()).unwrap();
        let (z, _) = standardize(&data).unwrap();
        for (a, b) in s.values.iter().zip(z.as_slice()) {
            assert_abs_diff_eq!(a.abs(), b.abs(), epsilon = 1e-12);
        }
        let mm = s.normalization.unwrap();
        assert_abs_diff_eq!(mm.to_percent(mm.min), 0.0);
        assert_abs_diff_eq!(mm.to_percent(mm.max), 100.0);
    }
}
