//! Datasets, CSV ingestion, synthetic generators and model persistence.

mod csv_io;
mod generate;
mod model_io;
mod plot;

pub use csv_io::{load_csv, read_csv, save_csv, write_csv};
pub use generate::{generate, GeneratorSpec, Shape, Stroke};
pub use model_io::{load_model, model_from_json, model_to_json, save_model, SCHEMA_VERSION};
pub use plot::{export_plot_data, write_plot_data, CURVE_SAMPLES};

use crate::error::{Error, Result};

/// `n` points in `R^d`, stored row-major, with optional ground-truth labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    dim: usize,
    values: Vec<f64>,
    labels: Option<Vec<usize>>,
}

impl Dataset {
    pub fn new(dim: usize, values: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidConfig("dataset dimension must be >= 1".into()));
        }
        if !values.len().is_multiple_of(dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: values.len() % dim,
            });
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Parse {
                row: pos / dim,
                col: pos % dim,
                msg: "non-finite value".into(),
            });
        }
        Ok(Self {
            dim,
            values,
            labels: None,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        let mut values = Vec::with_capacity(rows.len() * dim);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != dim {
                return Err(Error::Parse {
                    row: i,
                    col: r.len(),
                    msg: format!("expected {dim} columns"),
                });
            }
            values.extend_from_slice(r);
        }
        Self::new(dim, values)
    }

    pub fn with_labels(mut self, labels: Vec<usize>) -> Result<Self> {
        if labels.len() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                got: labels.len(),
            });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.values.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.values.chunks_exact(self.dim)
    }

    /// Values of coordinate `axis` for every point.
    pub fn column(&self, axis: usize) -> impl Iterator<Item = f64> + '_ {
        self.points().map(move |p| p[axis])
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn labels(&self) -> Option<&[usize]> {
        self.labels.as_deref()
    }

    /// Copy of the rows at `indices` (labels are dropped).
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        let mut values = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            values.extend_from_slice(self.point(i));
        }
        Dataset {
            dim: self.dim,
            values,
            labels: None,
        }
    }

    pub fn mean(&self) -> Vec<f64> {
        let n = self.len() as f64;
        let mut m = vec![0.0; self.dim];
        for p in self.points() {
            for (acc, v) in m.iter_mut().zip(p) {
                *acc += v;
            }
        }
        m.iter_mut().for_each(|v| *v /= n);
        m
    }
}
