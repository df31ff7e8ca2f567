//! Gaussian and f-adapted Gaussian densities and their closed-form
//! cross-entropies.
//!
//! An f-adapted Gaussian picks one dependent coordinate `j`, models the other
//! `d-1` coordinates with an ordinary Gaussian, and models `x_j` by a 1-D
//! Gaussian of the residual `x_j - f(x_ĵ)`. Its Jacobian is identically 1, so
//! it is a proper density for every continuous `f`.

use std::f64::consts::{E, PI};

use crate::curves::{split_point, CurveFit};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::numerics::{Cholesky, SquareMatrix};

/// Relative covariance ridge: `ε = COV_RIDGE · trace/d`.
pub const COV_RIDGE: f64 = 1e-9;
/// Residual variances below this are clamped.
pub const RESID_VAR_FLOOR: f64 = 1e-12;

/// `N(mean, cov)` with its Cholesky factor cached.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianParams {
    mean: Vec<f64>,
    cov: SquareMatrix,
    chol: Cholesky,
}

impl GaussianParams {
    pub fn new(mean: Vec<f64>, cov: SquareMatrix) -> Result<Self> {
        if mean.len() != cov.dim() {
            return Err(Error::DimensionMismatch {
                expected: cov.dim(),
                got: mean.len(),
            });
        }
        let chol = Cholesky::new(&cov)?;
        Ok(Self { mean, cov, chol })
    }

    /// MLE parameters of `x` (1/n covariance), ridged only if the raw
    /// covariance is numerically singular.
    pub fn estimate(x: &Dataset) -> Result<Self> {
        if x.is_empty() {
            return Err(Error::DegenerateCluster("empty point set".into()));
        }
        let (mean, cov) = mean_and_covariance(x);
        let (cov, chol) = regularized_cholesky(cov)?;
        Ok(Self { mean, cov, chol })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn cov(&self) -> &SquareMatrix {
        &self.cov
    }

    pub fn ln_det_cov(&self) -> f64 {
        self.chol.ln_det()
    }

    pub fn log_density(&self, x: &[f64]) -> f64 {
        let d = self.dim();
        let diff: Vec<f64> = x.iter().zip(&self.mean).map(|(a, b)| a - b).collect();
        -0.5 * d as f64 * (2.0 * PI).ln()
            - 0.5 * self.chol.ln_det()
            - 0.5 * self.chol.mahalanobis_sq(&diff)
    }
}

/// Sample mean and 1/n covariance.
pub fn mean_and_covariance(x: &Dataset) -> (Vec<f64>, SquareMatrix) {
    let d = x.dim();
    let n = x.len() as f64;
    let mean = x.mean();
    let mut cov = SquareMatrix::zeros(d);
    let mut diff = vec![0.0; d];
    for p in x.points() {
        for (o, (a, m)) in diff.iter_mut().zip(p.iter().zip(&mean)) {
            *o = a - m;
        }
        for i in 0..d {
            for j in 0..=i {
                cov[(i, j)] += diff[i] * diff[j];
            }
        }
    }
    for i in 0..d {
        for j in 0..=i {
            let v = cov[(i, j)] / n;
            cov[(i, j)] = v;
            cov[(j, i)] = v;
        }
    }
    (mean, cov)
}

/// Cholesky of `cov`, adding `COV_RIDGE·trace/d` to the diagonal when the
/// smallest pivot falls below that same level.
pub fn regularized_cholesky(mut cov: SquareMatrix) -> Result<(SquareMatrix, Cholesky)> {
    let d = cov.dim() as f64;
    let eps = COV_RIDGE * cov.trace() / d;
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::DegenerateCluster(
            "covariance has zero trace (all points coincide)".into(),
        ));
    }
    if let Ok(ch) = Cholesky::new(&cov) {
        if ch.min_pivot() > eps {
            return Ok((cov, ch));
        }
    }
    cov.add_diagonal(eps);
    match Cholesky::new(&cov) {
        Ok(ch) => Ok((cov, ch)),
        Err(e) => Err(Error::DegenerateCluster(format!(
            "covariance singular after regularization: {e}"
        ))),
    }
}

fn normal_log_density_1d(residual: f64, var: f64) -> f64 {
    -0.5 * (2.0 * PI * var).ln() - residual * residual / (2.0 * var)
}

pub fn gaussian_log_density(p: &GaussianParams, x: &[f64]) -> Result<f64> {
    if x.len() != p.dim() {
        return Err(Error::DimensionMismatch {
            expected: p.dim(),
            got: x.len(),
        });
    }
    Ok(p.log_density(x))
}

/// Parameters of an f-adapted Gaussian with dependent coordinate `axis`.
#[derive(Debug, Clone, PartialEq)]
pub struct FAdaptedParams {
    axis: usize,
    explanatory: GaussianParams,
    resid_var: f64,
    curve: CurveFit,
    mean_dep: f64,
    resid_floored: bool,
}

impl FAdaptedParams {
    pub fn new(
        axis: usize,
        explanatory: GaussianParams,
        resid_var: f64,
        curve: CurveFit,
    ) -> Result<Self> {
        if !(resid_var > 0.0) || !resid_var.is_finite() {
            return Err(Error::ZeroResidual(resid_var));
        }
        let d = explanatory.dim() + 1;
        if axis >= d {
            return Err(Error::InvalidConfig(format!(
                "dependent axis {axis} out of range for d={d}"
            )));
        }
        if curve.family().input_dim() != explanatory.dim() {
            return Err(Error::DimensionMismatch {
                expected: explanatory.dim(),
                got: curve.family().input_dim(),
            });
        }
        Ok(Self {
            axis,
            explanatory,
            resid_var,
            curve,
            mean_dep: 0.0,
            resid_floored: false,
        })
    }

    pub fn dim(&self) -> usize {
        self.explanatory.dim() + 1
    }

    pub fn axis(&self) -> usize {
        self.axis
    }

    pub fn explanatory(&self) -> &GaussianParams {
        &self.explanatory
    }

    pub fn resid_var(&self) -> f64 {
        self.resid_var
    }

    pub fn curve(&self) -> &CurveFit {
        &self.curve
    }

    /// Mean of the residual; always 0 since the intercept lives in the curve.
    pub fn mean_dep(&self) -> f64 {
        self.mean_dep
    }

    /// Whether the residual variance was clamped to [`RESID_VAR_FLOOR`].
    pub fn resid_floored(&self) -> bool {
        self.resid_floored
    }

    pub(crate) fn set_resid_floored(&mut self, floored: bool) {
        self.resid_floored = floored;
    }

    pub fn log_density(&self, x: &[f64]) -> f64 {
        let mut rest = vec![0.0; self.dim() - 1];
        split_point(x, self.axis, &mut rest);
        let resid = x[self.axis] - self.curve.eval(&rest) - self.mean_dep;
        self.explanatory.log_density(&rest) + normal_log_density_1d(resid, self.resid_var)
    }
}

pub fn fadapted_log_density(p: &FAdaptedParams, x: &[f64]) -> Result<f64> {
    if x.len() != p.dim() {
        return Err(Error::DimensionMismatch {
            expected: p.dim(),
            got: x.len(),
        });
    }
    Ok(p.log_density(x))
}

/// `H×(X‖G(R^d)) = d/2·ln(2πe) + ½·ln det cov(X)` and the MLE parameters.
pub fn gaussian_cross_entropy(x: &Dataset) -> Result<(f64, GaussianParams)> {
    let d = x.dim();
    if x.len() < d + 1 {
        return Err(Error::DegenerateCluster(format!(
            "{} points in R^{d} cannot define a covariance",
            x.len()
        )));
    }
    let params = GaussianParams::estimate(x)?;
    let h = 0.5 * d as f64 * (2.0 * PI * E).ln() + 0.5 * params.ln_det_cov();
    Ok((h, params))
}

/// Closed-form cross-entropy of `x` against the f-adapted Gaussian with
/// dependent coordinate `axis` and the given curve:
/// `d/2·ln(2πe) + ½·ln det Σ_ĵ + ½·ln σ_j`, where `σ_j` is the mean squared
/// residual of `x_j − f(x_ĵ)`.
pub fn fadapted_cross_entropy(
    x: &Dataset,
    axis: usize,
    curve: CurveFit,
) -> Result<(f64, FAdaptedParams)> {
    let d = x.dim();
    if d < 2 {
        return Err(Error::InvalidConfig(
            "f-adapted densities need d >= 2".into(),
        ));
    }
    if axis >= d {
        return Err(Error::InvalidConfig(format!("axis {axis} out of range for d={d}")));
    }
    if x.len() < d + 1 {
        return Err(Error::DegenerateCluster(format!(
            "{} points in R^{d} cannot define a covariance",
            x.len()
        )));
    }
    let n = x.len();
    let mut rest_values = Vec::with_capacity(n * (d - 1));
    let mut rest = vec![0.0; d - 1];
    let mut sse = 0.0;
    for p in x.points() {
        split_point(p, axis, &mut rest);
        let r = p[axis] - curve.eval(&rest);
        sse += r * r;
        rest_values.extend_from_slice(&rest);
    }
    let explanatory = GaussianParams::estimate(&Dataset::new(d - 1, rest_values)?)?;
    let mut resid_var = sse / n as f64;
    let floored = resid_var < RESID_VAR_FLOOR;
    if floored {
        log::warn!("residual variance {resid_var:e} clamped to {RESID_VAR_FLOOR:e}");
        resid_var = RESID_VAR_FLOOR;
    }
    let h = 0.5 * d as f64 * (2.0 * PI * E).ln()
        + 0.5 * explanatory.ln_det_cov()
        + 0.5 * resid_var.ln();
    let mut params = FAdaptedParams::new(axis, explanatory, resid_var, curve)?;
    params.resid_floored = floored;
    Ok((h, params))
}
