use std::fs::File;
use std::io::Write;
use std::path::Path;

use super::csv_io::csv_to_io;
use super::Dataset;
use crate::engine::AfcecModel;
use crate::error::{Error, Result};

/// Samples drawn along each fitted curve.
pub const CURVE_SAMPLES: usize = 200;

/// Writes `kind,cluster,x0..x{d-1}` rows: one `point` row per input point
/// with its assigned cluster, then `CURVE_SAMPLES` `curve` rows per cluster.
/// Curve samples run along the diagonal of the cluster's explanatory bounding
/// box, with the dependent coordinate set to the fitted curve.
pub fn write_plot_data<W: Write>(x: &Dataset, model: &AfcecModel, writer: W) -> Result<()> {
    if model.assignment.len() != x.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: model.assignment.len(),
        });
    }
    let d = x.dim();
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["kind".to_string(), "cluster".to_string()];
    header.extend((0..d).map(|i| format!("x{i}")));
    w.write_record(&header).map_err(csv_to_io)?;

    for (p, &c) in x.points().zip(&model.assignment) {
        let mut rec = vec!["point".to_string(), c.to_string()];
        rec.extend(p.iter().map(f64::to_string));
        w.write_record(&rec).map_err(csv_to_io)?;
    }

    for (ci, cluster) in model.clusters.iter().enumerate() {
        let axis = cluster.params.axis();
        let mut lo = vec![f64::INFINITY; d - 1];
        let mut hi = vec![f64::NEG_INFINITY; d - 1];
        for (p, _) in x.points().zip(&model.assignment).filter(|(_, &a)| a == ci) {
            let rest = p.iter().enumerate().filter(|(i, _)| *i != axis).map(|(_, v)| *v);
            for (k, v) in rest.enumerate() {
                lo[k] = lo[k].min(v);
                hi[k] = hi[k].max(v);
            }
        }
        if lo[0] > hi[0] {
            lo = cluster.params.explanatory().mean().to_vec();
            hi = lo.clone();
        }
        for s in 0..CURVE_SAMPLES {
            let u = s as f64 / (CURVE_SAMPLES - 1) as f64;
            let rest: Vec<f64> = lo.iter().zip(&hi).map(|(a, b)| a + u * (b - a)).collect();
            let dep = cluster.params.curve().eval(&rest);
            let mut full = Vec::with_capacity(d);
            let mut it = rest.iter();
            for i in 0..d {
                full.push(if i == axis { dep } else { *it.next().unwrap() });
            }
            let mut rec = vec!["curve".to_string(), ci.to_string()];
            rec.extend(full.iter().map(f64::to_string));
            w.write_record(&rec).map_err(csv_to_io)?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn export_plot_data<P: AsRef<Path>>(x: &Dataset, model: &AfcecModel, path: P) -> Result<()> {
    write_plot_data(x, model, File::create(path)?)
}
