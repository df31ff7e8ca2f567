//! Synthetic point sets: a noisy circle, an Archimedean spiral, a union of
//! polynomial strokes, and a noisy polynomial space curve.

use std::f64::consts::PI;

use rand::distr::weighted::WeightedIndex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::Dataset;
use crate::error::{Error, Result};

/// Planar stroke `t ↦ (Σ x_i t^i, Σ y_i t^i)` for `t ∈ [0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stroke {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// Relative share of the points drawn from this stroke.
    pub weight: f64,
}

impl Stroke {
    pub fn new(x: Vec<f64>, y: Vec<f64>, weight: f64) -> Self {
        Self { x, y, weight }
    }
}

fn poly(coeffs: &[f64], t: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * t + c)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum Shape {
    /// Uniform angle, radius `radius + noise`; label 0 for the upper half.
    Circle { radius: f64 },
    /// `r = c·θ` for `θ ∈ [0, 2π·turns]`; label is the turn index.
    Spiral { c: f64, turns: f64 },
    /// Points split across strokes by weight; label is the stroke index.
    Strokes { strokes: Vec<Stroke> },
    /// `t ↦ (x(t), y(t), z(t))` polynomials on `t_range`, isotropic noise.
    Parametric3d {
        x: Vec<f64>,
        y: Vec<f64>,
        z: Vec<f64>,
        t_range: (f64, f64),
    },
}

impl Shape {
    pub fn circle() -> Self {
        Shape::Circle { radius: 1.0 }
    }

    pub fn spiral() -> Self {
        Shape::Spiral { c: 0.5, turns: 2.0 }
    }

    /// A five-stroke glyph made of quadratic and cubic pieces.
    pub fn strokes() -> Self {
        Shape::Strokes {
            strokes: vec![
                Stroke::new(vec![1.0, 8.0], vec![8.0, 2.0, -2.0], 0.25),
                Stroke::new(vec![2.0, 0.0, 1.5], vec![7.0, -6.0], 0.2),
                Stroke::new(vec![4.0, 4.0], vec![5.0, -5.0, 4.0], 0.2),
                Stroke::new(vec![6.0, 3.0, 0.0, -1.0], vec![0.5, 2.0], 0.2),
                Stroke::new(vec![8.0, 1.5], vec![6.0, 1.0, -1.0], 0.15),
            ],
        }
    }

    pub fn parametric3d() -> Self {
        Shape::Parametric3d {
            x: vec![0.0, 1.0],
            y: vec![0.0, 0.0, 1.0],
            z: vec![0.0, 0.0, 0.0, 0.5],
            t_range: (-2.0, 2.0),
        }
    }

    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "circle" => Ok(Self::circle()),
            "spiral" => Ok(Self::spiral()),
            "strokes" => Ok(Self::strokes()),
            "parametric3d" => Ok(Self::parametric3d()),
            other => Err(Error::InvalidSpec(format!("unknown generator kind `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub shape: Shape,
    pub n: usize,
    pub noise_sigma: f64,
    pub seed: u64,
}

impl GeneratorSpec {
    pub fn new(shape: Shape, n: usize, noise_sigma: f64, seed: u64) -> Self {
        Self {
            shape,
            n,
            noise_sigma,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n < 10 {
            return Err(Error::InvalidSpec("n must be >= 10".into()));
        }
        if !(self.noise_sigma >= 0.0) || !self.noise_sigma.is_finite() {
            return Err(Error::InvalidSpec("noise must be a non-negative number".into()));
        }
        match &self.shape {
            Shape::Circle { radius } if !(*radius > 0.0) => {
                Err(Error::InvalidSpec("radius must be positive".into()))
            }
            Shape::Spiral { c, turns } if !(*c > 0.0 && *turns > 0.0) => {
                Err(Error::InvalidSpec("spiral needs c > 0 and turns > 0".into()))
            }
            Shape::Strokes { strokes } => {
                if strokes.is_empty() {
                    return Err(Error::InvalidSpec("at least one stroke is required".into()));
                }
                if strokes.iter().any(|s| !(s.weight > 0.0)) {
                    return Err(Error::InvalidSpec("stroke weights must be positive".into()));
                }
                Ok(())
            }
            Shape::Parametric3d { t_range, .. } if !(t_range.1 > t_range.0) => {
                Err(Error::InvalidSpec("t_range must be increasing".into()))
            }
            _ => Ok(()),
        }
    }
}

/// Draws the point set described by `spec`; a pure function of the spec.
pub fn generate(spec: &GeneratorSpec) -> Result<Dataset> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let noise = Normal::new(0.0, spec.noise_sigma).map_err(|e| Error::InvalidSpec(e.to_string()))?;
    let n = spec.n;
    let mut values = Vec::with_capacity(n * 3);
    let mut labels = Vec::with_capacity(n);
    let dim = match &spec.shape {
        Shape::Circle { radius } => {
            for _ in 0..n {
                let theta = rng.random_range(0.0..2.0 * PI);
                let r = radius + noise.sample(&mut rng);
                values.extend([r * theta.cos(), r * theta.sin()]);
                labels.push(usize::from(theta >= PI));
            }
            2
        }
        Shape::Spiral { c, turns } => {
            for _ in 0..n {
                let theta = rng.random_range(0.0..2.0 * PI * turns);
                let r = c * theta;
                values.extend([
                    r * theta.cos() + noise.sample(&mut rng),
                    r * theta.sin() + noise.sample(&mut rng),
                ]);
                labels.push((theta / (2.0 * PI)) as usize);
            }
            2
        }
        Shape::Strokes { strokes } => {
            let pick = WeightedIndex::new(strokes.iter().map(|s| s.weight))
                .map_err(|e| Error::InvalidSpec(e.to_string()))?;
            for _ in 0..n {
                let k = pick.sample(&mut rng);
                let t: f64 = rng.random();
                let s = &strokes[k];
                values.extend([
                    poly(&s.x, t) + noise.sample(&mut rng),
                    poly(&s.y, t) + noise.sample(&mut rng),
                ]);
                labels.push(k);
            }
            2
        }
        Shape::Parametric3d { x, y, z, t_range } => {
            for _ in 0..n {
                let t = rng.random_range(t_range.0..t_range.1);
                values.extend([
                    poly(x, t) + noise.sample(&mut rng),
                    poly(y, t) + noise.sample(&mut rng),
                    poly(z, t) + noise.sample(&mut rng),
                ]);
            }
            labels = vec![0; n];
            3
        }
    };
    Dataset::new(dim, values)?.with_labels(labels)
}
