//! Log-likelihood, parameter counting and information criteria.

use serde::Serialize;

use crate::curves::FamilyKind;
use crate::data::Dataset;
use crate::engine::AfcecModel;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LlMode {
    /// `Σ_l ln Σ_i p_i·N_i(x_l)`.
    #[default]
    Mixture,
    /// `Σ_l max_i [ln p_i + ln N_i(x_l)]`, the quantity clustering optimizes.
    Max,
}

impl std::str::FromStr for LlMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mixture" => Ok(LlMode::Mixture),
            "max" => Ok(LlMode::Max),
            other => Err(Error::InvalidConfig(format!(
                "unknown ll mode `{other}` (expected mixture or max)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ParamConvention {
    /// Per cluster: explanatory mean and covariance, residual variance, curve
    /// coefficients and the mixing weight.
    #[default]
    General,
    /// Fixed 7 per cluster; only defined for planar quadratic models.
    Paper2d,
}

impl std::str::FromStr for ParamConvention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "general" => Ok(ParamConvention::General),
            "paper2d" => Ok(ParamConvention::Paper2d),
            other => Err(Error::InvalidConfig(format!("unknown convention `{other}`"))),
        }
    }
}

/// `ln Σ exp(v)` without overflow.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if max.is_infinite() {
        return max;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

pub fn log_likelihood(x: &Dataset, model: &AfcecModel, mode: LlMode) -> f64 {
    let log_weights: Vec<f64> = model.clusters.iter().map(|c| c.weight.ln()).collect();
    let mut terms = vec![0.0; model.k()];
    x.points()
        .map(|p| {
            for ((t, c), lw) in terms.iter_mut().zip(&model.clusters).zip(&log_weights) {
                *t = lw + c.params.log_density(p);
            }
            match mode {
                LlMode::Mixture => log_sum_exp(&terms),
                LlMode::Max => terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
            }
        })
        .sum()
}

/// Free parameters of one f-adapted cluster in `R^d` whose curve has
/// `n_coeffs` coefficients (intercept included), weight included.
pub fn params_per_cluster(d: usize, n_coeffs: usize) -> usize {
    let m = d - 1;
    m + m * (m + 1) / 2 + 1 + n_coeffs + 1
}

/// Free parameters of one full-covariance Gaussian cluster, weight included.
pub fn gaussian_params_per_cluster(d: usize) -> usize {
    d + d * (d + 1) / 2 + 1
}

pub fn count_params(model: &AfcecModel, convention: ParamConvention) -> Result<usize> {
    match convention {
        ParamConvention::General => Ok(model
            .clusters
            .iter()
            .map(|c| params_per_cluster(c.params.dim(), c.params.curve().coeffs().len()))
            .sum()),
        ParamConvention::Paper2d => {
            let planar_quadratic = model.clusters.iter().all(|c| {
                c.params.dim() == 2
                    && c.params.curve().family().builtin_kind() == Some(FamilyKind::Quadratic)
            });
            if !planar_quadratic {
                return Err(Error::InvalidConvention(
                    "paper2d requires d=2 and the quadratic family".into(),
                ));
            }
            Ok(7 * model.k())
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelScore {
    pub loglik: f64,
    pub n_params: usize,
    pub n_points: usize,
    pub bic: f64,
    pub aic: f64,
}

impl ModelScore {
    pub fn new(loglik: f64, n_params: usize, n_points: usize) -> Self {
        let k = n_params as f64;
        Self {
            loglik,
            n_params,
            n_points,
            bic: -2.0 * loglik + k * (n_points as f64).ln(),
            aic: -2.0 * loglik + 2.0 * k,
        }
    }
}

pub fn score(
    x: &Dataset,
    model: &AfcecModel,
    mode: LlMode,
    convention: ParamConvention,
) -> Result<ModelScore> {
    Ok(ModelScore::new(
        log_likelihood(x, model, mode),
        count_params(model, convention)?,
        x.len(),
    ))
}
