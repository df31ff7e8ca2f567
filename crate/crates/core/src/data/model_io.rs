//! Versioned JSON persistence of fitted models.
//!
//! Floats are written as shortest round-trip decimals, so a saved model
//! evaluates bit-identically after loading.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::curves::{BasisFn, CurveFit, FunctionFamily};
use crate::density::{FAdaptedParams, GaussianParams};
use crate::engine::{AfcecModel, ClusterModel};
use crate::error::{Error, Result};
use crate::numerics::SquareMatrix;

pub const SCHEMA_VERSION: u64 = 1;

#[derive(Serialize, Deserialize)]
struct FamilyRecord {
    input_dim: usize,
    /// Exponent vector of each monomial basis function.
    basis: Vec<Vec<u32>>,
}

#[derive(Serialize, Deserialize)]
struct ClusterRecord {
    dependent_axis: usize,
    weight: f64,
    size: usize,
    cross_entropy: f64,
    mean_exp: Vec<f64>,
    cov_exp: Vec<Vec<f64>>,
    resid_var: f64,
    resid_floored: bool,
    mean_dep: f64,
    curve_coeffs: Vec<f64>,
    curve_sse: f64,
}

#[derive(Serialize, Deserialize)]
struct ModelRecord {
    schema: u64,
    dim: usize,
    k: usize,
    seed: u64,
    iterations: usize,
    deleted_count: usize,
    converged: bool,
    cost_trace: Vec<f64>,
    deletions: Vec<usize>,
    family: FamilyRecord,
    clusters: Vec<ClusterRecord>,
    assignment: Vec<usize>,
}

fn family_record(model: &AfcecModel) -> Result<FamilyRecord> {
    let first = model
        .clusters
        .first()
        .ok_or_else(|| Error::Schema("model has no clusters".into()))?;
    let family = first.params.curve().family();
    let basis = family
        .basis()
        .iter()
        .map(|b| match b {
            BasisFn::Monomial(e) => Ok(e.clone()),
            BasisFn::Custom { name, .. } => Err(Error::Schema(format!(
                "custom basis function `{name}` cannot be serialized"
            ))),
        })
        .collect::<Result<_>>()?;
    Ok(FamilyRecord {
        input_dim: family.input_dim(),
        basis,
    })
}

pub fn model_to_json(model: &AfcecModel) -> Result<String> {
    let clusters = model
        .clusters
        .iter()
        .map(|c| {
            let exp = c.params.explanatory();
            let m = exp.dim();
            ClusterRecord {
                dependent_axis: c.params.axis(),
                weight: c.weight,
                size: c.size,
                cross_entropy: c.cross_entropy,
                mean_exp: exp.mean().to_vec(),
                cov_exp: (0..m).map(|i| exp.cov().row(i).to_vec()).collect(),
                resid_var: c.params.resid_var(),
                resid_floored: c.params.resid_floored(),
                mean_dep: c.params.mean_dep(),
                curve_coeffs: c.params.curve().coeffs().to_vec(),
                curve_sse: c.params.curve().sse(),
            }
        })
        .collect();
    let record = ModelRecord {
        schema: SCHEMA_VERSION,
        dim: model.dim(),
        k: model.k(),
        seed: model.seed,
        iterations: model.iterations,
        deleted_count: model.deleted_count,
        converged: model.converged,
        cost_trace: model.cost_trace.clone(),
        deletions: model.deletions.clone(),
        family: family_record(model)?,
        clusters,
        assignment: model.assignment.clone(),
    };
    Ok(serde_json::to_string_pretty(&record)?)
}

pub fn model_from_json(text: &str) -> Result<AfcecModel> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    let found = value
        .get("schema")
        .and_then(serde_json::Value::as_u64)
        .ok_or_else(|| Error::Schema("missing `schema` field".into()))?;
    if found != SCHEMA_VERSION {
        return Err(Error::SchemaVersionMismatch {
            found,
            expected: SCHEMA_VERSION,
        });
    }
    let record: ModelRecord = serde_json::from_value(value)?;
    if record.clusters.len() != record.k {
        return Err(Error::Schema(format!(
            "k={} but {} cluster records",
            record.k,
            record.clusters.len()
        )));
    }
    let family = Arc::new(FunctionFamily::new(
        record.family.input_dim,
        record
            .family
            .basis
            .into_iter()
            .map(BasisFn::Monomial)
            .collect(),
    )?);
    let clusters = record
        .clusters
        .into_iter()
        .map(|c| {
            if c.mean_dep != 0.0 {
                return Err(Error::Schema("mean_dep must be 0".into()));
            }
            let explanatory =
                GaussianParams::new(c.mean_exp, SquareMatrix::from_rows(&c.cov_exp))?;
            let curve = CurveFit::new(Arc::clone(&family), c.curve_coeffs, c.curve_sse)?;
            let mut params = FAdaptedParams::new(c.dependent_axis, explanatory, c.resid_var, curve)?;
            params.set_resid_floored(c.resid_floored);
            Ok(ClusterModel {
                params,
                cross_entropy: c.cross_entropy,
                weight: c.weight,
                size: c.size,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    if let Some(&bad) = record.assignment.iter().find(|&&a| a >= clusters.len()) {
        return Err(Error::Schema(format!("assignment refers to cluster {bad}")));
    }
    Ok(AfcecModel {
        clusters,
        assignment: record.assignment,
        cost_trace: record.cost_trace,
        deletions: record.deletions,
        iterations: record.iterations,
        deleted_count: record.deleted_count,
        converged: record.converged,
        seed: record.seed,
    })
}

pub fn save_model<P: AsRef<Path>>(model: &AfcecModel, path: P) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(model_to_json(model)?.as_bytes())?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

pub fn load_model<P: AsRef<Path>>(path: P) -> Result<AfcecModel> {
    let text = std::io::read_to_string(BufReader::new(File::open(path)?))?;
    model_from_json(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curves::{builtin_family, FamilyKind};
    use crate::data::{generate, GeneratorSpec, Shape};
    use crate::engine::{fit, EngineConfig};
    use crate::selection::{log_likelihood, LlMode};

    fn fitted() -> (crate::data::Dataset, AfcecModel) {
        let x = generate(&GeneratorSpec::new(Shape::circle(), 300, 0.1, 4)).unwrap();
        let cfg = EngineConfig::new(3, Arc::new(builtin_family(FamilyKind::Quadratic, 1)));
        let m = fit(&x, &cfg).unwrap();
        (x, m)
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let (x, m) = fitted();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        save_model(&m, &path).unwrap();
        let back = load_model(&path).unwrap();
        assert_eq!(back.assignment, m.assignment);
        assert_eq!(back.cost_trace, m.cost_trace);
        for mode in [LlMode::Mixture, LlMode::Max] {
            assert_eq!(
                log_likelihood(&x, &back, mode).to_bits(),
                log_likelihood(&x, &m, mode).to_bits()
            );
        }
        let recomputed = crate::engine::cost(&x, &back.clusters, &back.assignment).unwrap();
        let original = crate::engine::cost(&x, &m.clusters, &m.assignment).unwrap();
        assert_eq!(recomputed.to_bits(), original.to_bits());
    }

    #[test]
    fn file_has_one_record_per_cluster() {
        let (_, m) = fitted();
        let v: serde_json::Value = serde_json::from_str(&model_to_json(&m).unwrap()).unwrap();
        assert_eq!(v["schema"], 1);
        assert_eq!(v["clusters"].as_array().unwrap().len(), m.k());
    }

    #[test]
    fn unknown_schema_is_rejected() {
        let (_, m) = fitted();
        let text = model_to_json(&m).unwrap().replacen("\"schema\": 1", "\"schema\": 2", 1);
        assert!(matches!(
            model_from_json(&text),
            Err(Error::SchemaVersionMismatch { found: 2, expected: 1 })
        ));
        assert!(load_model("/nonexistent/model.json").is_err());
    }
}
