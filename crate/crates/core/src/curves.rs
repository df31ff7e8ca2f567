//! Curve families, least-squares curve fitting and dependent-axis selection.

use std::fmt;
use std::sync::Arc;

use crate::data::Dataset;
use crate::density::{fadapted_cross_entropy, FAdaptedParams};
use crate::error::{Error, Result};
use crate::numerics::{least_squares, Matrix};

/// User-supplied basis function on the explanatory coordinates.
pub type CustomFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// One basis function of a family.
#[derive(Clone)]
pub enum BasisFn {
    /// `∏ x_i^{e_i}`; all-zero exponents is the constant 1.
    Monomial(Vec<u32>),
    Custom { name: String, f: CustomFn },
}

impl BasisFn {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            BasisFn::Monomial(exps) => exps
                .iter()
                .zip(x)
                .map(|(&e, &v)| if e == 0 { 1.0 } else { v.powi(e as i32) })
                .product(),
            BasisFn::Custom { f, .. } => f(x),
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, BasisFn::Monomial(e) if e.iter().all(|&v| v == 0))
    }

    /// Coordinate index if this is the projection `x ↦ x_i`.
    pub fn projection_axis(&self) -> Option<usize> {
        match self {
            BasisFn::Monomial(e) if e.iter().sum::<u32>() == 1 => e.iter().position(|&v| v == 1),
            _ => None,
        }
    }
}

impl fmt::Debug for BasisFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BasisFn::Monomial(e) => write!(f, "Monomial({e:?})"),
            BasisFn::Custom { name, .. } => write!(f, "Custom({name})"),
        }
    }
}

impl PartialEq for BasisFn {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (BasisFn::Monomial(a), BasisFn::Monomial(b)) => a == b,
            (BasisFn::Custom { name: a, f: fa }, BasisFn::Custom { name: b, f: fb }) => {
                a == b && Arc::ptr_eq(fa, fb)
            }
            _ => false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilyKind {
    Linear,
    Quadratic,
    Cubic,
}

impl std::str::FromStr for FamilyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(FamilyKind::Linear),
            "quadratic" => Ok(FamilyKind::Quadratic),
            "cubic" => Ok(FamilyKind::Cubic),
            other => Err(Error::InvalidConfig(format!(
                "unknown family `{other}` (expected linear, quadratic or cubic)"
            ))),
        }
    }
}

/// A finite basis of functions `R^{d-1} → R`, linear in its coefficients.
///
/// The first basis function is always the constant 1 and every coordinate
/// projection is present, so Gaussians are contained in the induced model class.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionFamily {
    input_dim: usize,
    basis: Vec<BasisFn>,
}

impl FunctionFamily {
    pub fn new(input_dim: usize, basis: Vec<BasisFn>) -> Result<Self> {
        if input_dim == 0 {
            return Err(Error::InvalidConfig("family input dimension must be >= 1".into()));
        }
        for b in &basis {
            if let BasisFn::Monomial(e) = b {
                if e.len() != input_dim {
                    return Err(Error::DimensionMismatch {
                        expected: input_dim,
                        got: e.len(),
                    });
                }
            }
        }
        if !basis.first().is_some_and(BasisFn::is_constant) {
            return Err(Error::InvalidConfig(
                "the first basis function must be the constant 1".into(),
            ));
        }
        for axis in 0..input_dim {
            if !basis.iter().any(|b| b.projection_axis() == Some(axis)) {
                return Err(Error::InvalidConfig(format!(
                    "family is missing the linear term for coordinate {axis}"
                )));
            }
        }
        Ok(Self { input_dim, basis })
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn basis(&self) -> &[BasisFn] {
        &self.basis
    }

    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    /// `Some(kind)` if this family is exactly a builtin one.
    pub fn builtin_kind(&self) -> Option<FamilyKind> {
        [FamilyKind::Linear, FamilyKind::Quadratic, FamilyKind::Cubic]
            .into_iter()
            .find(|&k| builtin_family(k, self.input_dim).basis == self.basis)
    }

    pub fn eval_basis(&self, x: &[f64], out: &mut [f64]) {
        for (o, b) in out.iter_mut().zip(&self.basis) {
            *o = b.eval(x);
        }
    }
}

fn unit(input_dim: usize, axis: usize, power: u32) -> Vec<u32> {
    let mut e = vec![0; input_dim];
    e[axis] = power;
    e
}

/// Builtin polynomial families.
///
/// `linear` is `{1, x_1..x_m}`; `quadratic` adds every degree-2 monomial;
/// `cubic` adds the univariate cubes `x_i³` on top of the full quadratic.
pub fn builtin_family(kind: FamilyKind, input_dim: usize) -> FunctionFamily {
    assert!(input_dim >= 1, "family input dimension must be >= 1");
    let mut basis = vec![BasisFn::Monomial(vec![0; input_dim])];
    basis.extend((0..input_dim).map(|i| BasisFn::Monomial(unit(input_dim, i, 1))));
    if matches!(kind, FamilyKind::Quadratic | FamilyKind::Cubic) {
        for i in 0..input_dim {
            for j in i..input_dim {
                let mut e = vec![0; input_dim];
                e[i] += 1;
                e[j] += 1;
                basis.push(BasisFn::Monomial(e));
            }
        }
    }
    if kind == FamilyKind::Cubic {
        basis.extend((0..input_dim).map(|i| BasisFn::Monomial(unit(input_dim, i, 3))));
    }
    FunctionFamily { input_dim, basis }
}

/// A fitted member `f = Σ c_j·basis_j` of a family.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveFit {
    family: Arc<FunctionFamily>,
    coeffs: Vec<f64>,
    sse: f64,
}

impl CurveFit {
    pub fn new(family: Arc<FunctionFamily>, coeffs: Vec<f64>, sse: f64) -> Result<Self> {
        if coeffs.len() != family.len() {
            return Err(Error::DimensionMismatch {
                expected: family.len(),
                got: coeffs.len(),
            });
        }
        Ok(Self {
            family,
            coeffs,
            sse,
        })
    }

    /// The curve with the given coefficients and SSE recomputed on `(X, axis)`.
    pub fn with_coeffs(
        family: Arc<FunctionFamily>,
        coeffs: Vec<f64>,
        x: &Dataset,
        axis: usize,
    ) -> Result<Self> {
        let mut c = Self::new(family, coeffs, 0.0)?;
        c.sse = c.sse_on(x, axis);
        Ok(c)
    }

    pub fn family(&self) -> &Arc<FunctionFamily> {
        &self.family
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn sse(&self) -> f64 {
        self.sse
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.family
            .basis
            .iter()
            .zip(&self.coeffs)
            .map(|(b, c)| c * b.eval(x))
            .sum()
    }

    /// `Σ (x_axis − f(x_without_axis))²` over the dataset.
    pub fn sse_on(&self, x: &Dataset, axis: usize) -> f64 {
        let mut buf = vec![0.0; x.dim() - 1];
        x.points()
            .map(|p| {
                split_point(p, axis, &mut buf);
                let r = p[axis] - self.eval(&buf);
                r * r
            })
            .sum()
    }
}

/// Writes `p` without coordinate `axis` into `out`.
pub fn split_point(p: &[f64], axis: usize, out: &mut [f64]) {
    let mut k = 0;
    for (i, &v) in p.iter().enumerate() {
        if i != axis {
            out[k] = v;
            k += 1;
        }
    }
}

/// Least-squares fit of coordinate `axis` as a function of the others.
pub fn fit_curve(x: &Dataset, axis: usize, family: &Arc<FunctionFamily>) -> Result<CurveFit> {
    let d = x.dim();
    if axis >= d {
        return Err(Error::InvalidConfig(format!("axis {axis} out of range for d={d}")));
    }
    if family.input_dim() != d - 1 {
        return Err(Error::DimensionMismatch {
            expected: d - 1,
            got: family.input_dim(),
        });
    }
    let b = family.len();
    if x.len() < b {
        return Err(Error::DegenerateCluster(format!(
            "{} points cannot determine {b} curve coefficients",
            x.len()
        )));
    }
    let mut design = Matrix::zeros(x.len(), b);
    let mut target = Vec::with_capacity(x.len());
    let mut buf = vec![0.0; d - 1];
    for (i, p) in x.points().enumerate() {
        split_point(p, axis, &mut buf);
        family.eval_basis(&buf, design.row_mut(i));
        target.push(p[axis]);
    }
    let coeffs = least_squares(&design, &target)?;
    CurveFit::with_coeffs(Arc::clone(family), coeffs, x, axis)
}

/// Result of choosing the dependent axis of one cluster.
#[derive(Debug, Clone)]
pub struct Orientation {
    pub axis: usize,
    pub cross_entropy: f64,
    pub params: FAdaptedParams,
}

impl Orientation {
    pub fn curve(&self) -> &CurveFit {
        self.params.curve()
    }
}

/// Fits a curve for every candidate dependent axis and keeps the one with the
/// smallest cross-entropy. Ties go to the smallest axis index.
pub fn select_orientation(x: &Dataset, family: &Arc<FunctionFamily>) -> Result<Orientation> {
    let mut best: Option<Orientation> = None;
    let mut last_err = None;
    for axis in 0..x.dim() {
        let attempt = fit_curve(x, axis, family)
            .and_then(|curve| fadapted_cross_entropy(x, axis, curve));
        match attempt {
            Ok((h, params)) => {
                if best.as_ref().is_none_or(|b| h < b.cross_entropy) {
                    best = Some(Orientation {
                        axis,
                        cross_entropy: h,
                        params,
                    });
                }
            }
            Err(e) => last_err = Some(e),
        }
    }
    best.ok_or_else(|| {
        Error::DegenerateCluster(format!(
            "no orientation could be fitted: {}",
            last_err.map_or_else(|| "empty dimension".to_string(), |e| e.to_string())
        ))
    })
}
