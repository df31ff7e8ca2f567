//! The arc-length/normal-distance parabola density used by AcaGMM, and the
//! change-of-variables correction that turns it into a proper density.
//!
//! A point `x` is mapped to `(l, s)`: the signed arc length from the vertex
//! to its nearest point on `y = a·x²`, and its distance `p = |s|` to that
//! point. The raw AcaGMM function is `N(0,σ₁²)(l)·N(0,σ₂²)(p)`. Near the curve
//! the map stretches areas by `1 − p/r` on the concave side and `1 + p/r` on
//! the convex side (`r` the curvature radius at the foot point), so the
//! corrected density divides by that factor.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{simpson_1d, simpson_2d};

/// Fold mass above which a configuration is excluded from normalization checks.
pub const MAX_EXCLUDED_MASS: f64 = 1e-4;

/// Curved Gaussian along `y = a·x²`, centered at the vertex.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AcaParabolaModel {
    pub a: f64,
    /// Standard deviation along the curve (arc length).
    pub sigma1: f64,
    /// Standard deviation across the curve (normal distance).
    pub sigma2: f64,
}

impl AcaParabolaModel {
    pub fn new(a: f64, sigma1: f64, sigma2: f64) -> Result<Self> {
        if a == 0.0 || !a.is_finite() {
            return Err(Error::InvalidConfig("parabola coefficient must be non-zero".into()));
        }
        if !(sigma1 > 0.0 && sigma2 > 0.0) {
            return Err(Error::InvalidConfig("sigmas must be positive".into()));
        }
        Ok(Self { a, sigma1, sigma2 })
    }
}

/// Coordinates of `point` relative to the vertex of `y = a·x² + b·x + c`, so
/// the parabola becomes `y = a·x²`.
pub fn to_vertex_frame(a: f64, b: f64, c: f64, point: (f64, f64)) -> (f64, f64) {
    let vx = -b / (2.0 * a);
    let vy = c - b * b / (4.0 * a);
    (point.0 - vx, point.1 - vy)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Above,
    Below,
}

/// Which closed-form case of the foot-point cubic applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CubicBranch {
    /// `D > 0`: one real root.
    OneRoot,
    /// `D = 0, Q = R = 0`: triple root at 0.
    TripleZero,
    /// `D = 0` otherwise: a simple and a double root.
    DoubleRoot,
    /// `D < 0`: three real roots.
    ThreeRoots,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectionResult {
    /// Parameter of the nearest point `(t0, a·t0²)`.
    pub t0: f64,
    /// Distance to the nearest point.
    pub p: f64,
    /// Arc length from the vertex, signed by `t0`.
    pub l: f64,
    pub side: Side,
    pub branch: CubicBranch,
}

/// Real critical points of `t ↦ |(t, a·t²) − point|²`, i.e. roots of
/// `t³ + 3Q·t − 2R = 0` with `Q = (1 − 2a·p₂)/(6a²)`, `R = p₁/(4a²)`.
pub fn foot_candidates(a: f64, point: (f64, f64)) -> (CubicBranch, Vec<f64>) {
    let (p1, p2) = point;
    let q = (1.0 - 2.0 * a * p2) / (6.0 * a * a);
    let r = p1 / (4.0 * a * a);
    let d = q * q * q + r * r;
    let scale = (q * q * q).abs().max(r * r);
    if q == 0.0 && r == 0.0 {
        return (CubicBranch::TripleZero, vec![0.0]);
    }
    if d.abs() <= 1e-14 * scale {
        let s = (-q).max(0.0).sqrt();
        let c = r.cbrt();
        // the listed pair (2√−Q, −√−Q) holds for R > 0; cbrt(R) covers both signs
        return (CubicBranch::DoubleRoot, vec![2.0 * s, -s, 2.0 * c, -c]);
    }
    if d > 0.0 {
        let sd = d.sqrt();
        (CubicBranch::OneRoot, vec![(r + sd).cbrt() + (r - sd).cbrt()])
    } else {
        let mq = -q;
        let phi = (r / (mq * mq * mq).sqrt()).clamp(-1.0, 1.0).acos();
        let amp = 2.0 * mq.sqrt();
        (
            CubicBranch::ThreeRoots,
            (0..3)
                .map(|i| amp * ((phi + 2.0 * PI * i as f64) / 3.0).cos())
                .collect(),
        )
    }
}

fn polish(a: f64, point: (f64, f64), mut t: f64) -> f64 {
    let g = |t: f64| 2.0 * a * a * t * t * t + (1.0 - 2.0 * a * point.1) * t - point.0;
    let dg = |t: f64| 6.0 * a * a * t * t + (1.0 - 2.0 * a * point.1);
    for _ in 0..3 {
        let slope = dg(t);
        if slope == 0.0 {
            break;
        }
        let next = t - g(t) / slope;
        if !next.is_finite() || g(next).abs() >= g(t).abs() {
            break;
        }
        t = next;
    }
    t
}

fn dist_sq(a: f64, point: (f64, f64), t: f64) -> f64 {
    let dx = t - point.0;
    let dy = a * t * t - point.1;
    dx * dx + dy * dy
}

/// Nearest point of `y = a·x²` to `point` by the closed-form cubic solution.
/// Among equidistant feet the smaller `t0` wins.
pub fn project_to_parabola(m: &AcaParabolaModel, point: (f64, f64)) -> ProjectionResult {
    let a = m.a;
    let (branch, candidates) = foot_candidates(a, point);
    let mut best_t = f64::NAN;
    let mut best_d = f64::INFINITY;
    for t in candidates.into_iter().map(|t| polish(a, point, t)) {
        let dsq = dist_sq(a, point, t);
        let tie = best_d.is_finite() && (dsq - best_d).abs() <= 1e-12 * best_d.max(1e-300);
        if best_t.is_nan() || (tie && t < best_t) || (!tie && dsq < best_d) {
            best_t = t;
            best_d = dsq;
        }
    }
    let p = best_d.sqrt();
    let l = arc_length(m, best_t).copysign(best_t);
    let side = orientation_side(m, point, best_t);
    ProjectionResult {
        t0: best_t,
        p,
        l: if best_t == 0.0 { 0.0 } else { l },
        side,
        branch,
    }
}

/// Arc length of `y = a·x²` between the vertex and `(t0, a·t0²)`, as a
/// magnitude: `½|t|√(1+4a²t²) + asinh(2|a||t|)/(4|a|)`.
pub fn arc_length(m: &AcaParabolaModel, t0: f64) -> f64 {
    let u = 2.0 * m.a.abs() * t0.abs();
    0.5 * t0.abs() * (1.0 + u * u).sqrt() + u.asinh() / (4.0 * m.a.abs())
}

/// Radius of the osculating circle at `(t0, a·t0²)`: `(1+4a²t²)^{3/2} / (2|a|)`.
pub fn curvature_radius(m: &AcaParabolaModel, t0: f64) -> f64 {
    let s = 1.0 + 4.0 * m.a * m.a * t0 * t0;
    s * s.sqrt() / (2.0 * m.a.abs())
}

/// Side of the graph, from the sign of `det[[p₁−x(t₀), x′(t₀)], [p₂−y(t₀), y′(t₀)]]`
/// (negative above the graph).
pub fn orientation_side(m: &AcaParabolaModel, point: (f64, f64), t0: f64) -> Side {
    let nx = point.0 - t0;
    let ny = point.1 - m.a * t0 * t0;
    let det = nx * (2.0 * m.a * t0) - ny;
    if det < 0.0 {
        Side::Above
    } else if det > 0.0 {
        Side::Below
    } else if point.1 >= m.a * point.0 * point.0 {
        Side::Above
    } else {
        Side::Below
    }
}

/// Whether `side` faces the center of curvature.
pub fn is_concave_side(m: &AcaParabolaModel, side: Side) -> bool {
    (side == Side::Above) == (m.a > 0.0)
}

fn ln_normal(x: f64, sigma: f64) -> f64 {
    -0.5 * (2.0 * PI).ln() - sigma.ln() - x * x / (2.0 * sigma * sigma)
}

/// Area factor of the `(l, s) → x` map at `proj`: `1 − p/r` on the concave
/// side, `1 + p/r` on the convex side.
pub fn jacobian_factor(m: &AcaParabolaModel, proj: &ProjectionResult) -> f64 {
    let ratio = proj.p / curvature_radius(m, proj.t0);
    if is_concave_side(m, proj.side) {
        1.0 - ratio
    } else {
        1.0 + ratio
    }
}

/// Log of the AcaGMM function at `point`; with `corrected` the change of
/// variables is applied, giving a proper density.
pub fn aca_log_density(m: &AcaParabolaModel, point: (f64, f64), corrected: bool) -> Result<f64> {
    let proj = project_to_parabola(m, point);
    let raw = ln_normal(proj.l, m.sigma1) + ln_normal(proj.p, m.sigma2);
    if !corrected {
        return Ok(raw);
    }
    let factor = jacobian_factor(m, &proj);
    if factor <= 0.0 {
        return Err(Error::BeyondCurvatureCenter {
            p: proj.p,
            r: curvature_radius(m, proj.t0),
        });
    }
    Ok(raw - factor.ln())
}

/// Gaussian mass of `(l, s)` pairs with no preimage: on the concave side the
/// normal from foot `t` reaches the symmetry axis (where the nearest foot
/// switches to `−t`) after `√(1+4a²t²)/(2|a|)`; everything beyond is folded.
pub fn excluded_mass(m: &AcaParabolaModel) -> f64 {
    let a2 = m.a * m.a;
    // integrate over t with dl = √(1+4a²t²) dt, out to 12σ₁ of arc length
    let mut t_max = 1.0;
    while arc_length(m, t_max) < 12.0 * m.sigma1 {
        t_max *= 2.0;
    }
    let integrand = |t: f64| {
        let speed = (1.0 + 4.0 * a2 * t * t).sqrt();
        let l = arc_length(m, t);
        let s_cut = speed / (2.0 * m.a.abs());
        let tail = 0.5 * libm::erfc(s_cut / (m.sigma2 * std::f64::consts::SQRT_2));
        ln_normal(l, m.sigma1).exp() * speed * tail
    };
    simpson_1d(integrand, -t_max, t_max, 20_000).expect("even segment count")
}

/// One row of the normalization experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormalizationRow {
    pub a: f64,
    pub sigma1: f64,
    pub sigma2: f64,
    pub half_width: f64,
    pub segments: usize,
    /// `∬ exp(raw)` over the box.
    pub raw: f64,
    /// `∬ exp(corrected)` over the box.
    pub corrected: f64,
    /// Model mass that the nearest-point map cannot reach (see [`excluded_mass`]).
    pub excluded_mass: f64,
    /// Grid nodes where the correction factor was not positive (contribute 0).
    pub fold_nodes: usize,
}

impl NormalizationRow {
    pub fn is_valid(&self) -> bool {
        self.excluded_mass < MAX_EXCLUDED_MASS
    }
}

/// Integrates the raw and corrected densities over `[−w, w]²` with a 2-D
/// Simpson rule of `segments` per axis.
pub fn normalization_check(
    m: &AcaParabolaModel,
    half_width: f64,
    segments: usize,
) -> Result<NormalizationRow> {
    if !(half_width > 0.0) {
        return Err(Error::InvalidConfig("box half-width must be positive".into()));
    }
    let w = half_width;
    let raw = simpson_2d(
        |x, y| aca_log_density(m, (x, y), false).map_or(0.0, f64::exp),
        -w,
        w,
        -w,
        w,
        segments,
    )?;
    let corrected = simpson_2d(
        |x, y| aca_log_density(m, (x, y), true).map_or(0.0, f64::exp),
        -w,
        w,
        -w,
        w,
        segments,
    )?;
    let h = 2.0 * w / segments as f64;
    let fold_nodes = (0..=segments)
        .flat_map(|i| (0..=segments).map(move |j| (i, j)))
        .filter(|&(i, j)| {
            let pt = (-w + i as f64 * h, -w + j as f64 * h);
            aca_log_density(m, pt, true).is_err()
        })
        .count();
    Ok(NormalizationRow {
        a: m.a,
        sigma1: m.sigma1,
        sigma2: m.sigma2,
        half_width,
        segments,
        raw,
        corrected,
        excluded_mass: excluded_mass(m),
        fold_nodes,
    })
}

/// Runs [`normalization_check`] over the Cartesian grid `a × σ₁ × σ₂`.
pub fn normalization_table(
    a_grid: &[f64],
    sigma1_grid: &[f64],
    sigma2_grid: &[f64],
    half_width: f64,
    segments: usize,
) -> Result<Vec<NormalizationRow>> {
    let mut rows = Vec::new();
    for &a in a_grid {
        for &s1 in sigma1_grid {
            for &s2 in sigma2_grid {
                let m = AcaParabolaModel::new(a, s1, s2)?;
                rows.push(normalization_check(&m, half_width, segments)?);
            }
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn model(a: f64) -> AcaParabolaModel {
        AcaParabolaModel::new(a, 1.0, 1.0).unwrap()
    }

    #[test]
    fn point_on_axis_projects_to_vertex() {
        let m = model(1.0);
        for c in [0.1, 0.3, 0.49, -2.0] {
            let pr = project_to_parabola(&m, (0.0, c));
            assert_abs_diff_eq!(pr.t0, 0.0, epsilon = 1e-12);
            assert_abs_diff_eq!(pr.p, c.abs(), epsilon = 1e-12);
        }
    }

    #[test]
    fn symmetric_feet_tie_to_smaller_t() {
        let m = model(1.0);
        let pr = project_to_parabola(&m, (0.0, 6.0));
        assert_eq!(pr.branch, CubicBranch::ThreeRoots);
        assert_abs_diff_eq!(pr.t0, -(5.5f64).sqrt(), epsilon = 1e-10);
        let (_, cands) = foot_candidates(1.0, (0.0, 6.0));
        assert_eq!(cands.len(), 3);
    }

    #[test]
    fn degenerate_discriminant_branches() {
        let a = 0.5;
        let (b, c) = foot_candidates(a, (0.0, 1.0 / (2.0 * a)));
        assert_eq!((b, c), (CubicBranch::TripleZero, vec![0.0]));
        // p2 above the curvature centre, p1 tuned so that Q³ + R² = 0
        let p2 = 3.0;
        let q: f64 = (1.0 - 2.0 * a * p2) / (6.0 * a * a);
        let r = (-q * q * q).sqrt();
        let (b, _) = foot_candidates(a, (4.0 * a * a * r, p2));
        assert_eq!(b, CubicBranch::DoubleRoot);
    }

    #[test]
    fn arc_length_values() {
        assert_eq!(arc_length(&model(1.0), 0.0), 0.0);
        let want = 0.5 * 5f64.sqrt() + 0.25 * (2.0 + 5f64.sqrt()).ln();
        assert_abs_diff_eq!(arc_length(&model(1.0), 1.0), want, epsilon = 1e-14);
        assert_abs_diff_eq!(want, 1.478_942_857_544_597, epsilon = 1e-12);
        // symmetric in t and in the sign of a
        assert_eq!(arc_length(&model(0.7), -1.3), arc_length(&model(0.7), 1.3));
        assert_eq!(arc_length(&model(-0.7), 1.3), arc_length(&model(0.7), 1.3));
    }

    #[test]
    fn curvature_radius_values() {
        assert_abs_diff_eq!(curvature_radius(&model(1.0), 0.0), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(
            curvature_radius(&model(1.0), 1.0),
            5f64.powf(1.5) / 2.0,
            epsilon = 1e-12
        );
        // finite-difference curvature of (t, t²) at t = 1
        let h = 1e-4;
        let y = |t: f64| t * t;
        let d1 = (y(1.0 + h) - y(1.0 - h)) / (2.0 * h);
        let d2 = (y(1.0 + h) - 2.0 * y(1.0) + y(1.0 - h)) / (h * h);
        let fd = (1.0 + d1 * d1).powf(1.5) / d2.abs();
        assert_abs_diff_eq!(curvature_radius(&model(1.0), 1.0), fd, epsilon = 1e-5);
        let radii: Vec<f64> = [1.0, 2.0, 4.0, 8.0]
            .iter()
            .map(|&a| curvature_radius(&model(a), 0.0))
            .collect();
        assert!(radii.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn sides() {
        let m = model(1.0);
        let above = project_to_parabola(&m, (0.0, 1.0));
        assert_eq!(above.side, Side::Above);
        assert_eq!(project_to_parabola(&m, (0.0, -1.0)).side, Side::Below);

        let mut rng = ChaCha8Rng::seed_from_u64(40);
        for _ in 0..1000 {
            let a = rng.random_range(0.1..2.0) * if rng.random::<bool>() { 1.0 } else { -1.0 };
            let pt = (rng.random_range(-4.0..4.0), rng.random_range(-4.0..4.0));
            let m = model(a);
            let pr = project_to_parabola(&m, pt);
            let expected = if pt.1 - a * pt.0 * pt.0 > 0.0 {
                Side::Above
            } else {
                Side::Below
            };
            assert_eq!(pr.side, expected, "a={a} point={pt:?}");
        }
    }

    #[test]
    fn correction_factor_signs() {
        let m = AcaParabolaModel::new(0.5, 1.0, 0.5).unwrap();
        let on = (1.0, 0.5);
        assert_abs_diff_eq!(
            aca_log_density(&m, on, true).unwrap(),
            aca_log_density(&m, on, false).unwrap(),
            epsilon = 1e-9
        );
        // convex side: area grows, density shrinks
        let below = (0.3, -0.4);
        assert!(aca_log_density(&m, below, true).unwrap() < aca_log_density(&m, below, false).unwrap());
        // concave side: area shrinks, density grows
        let above = (0.3, 0.4);
        assert!(aca_log_density(&m, above, true).unwrap() > aca_log_density(&m, above, false).unwrap());
        // the curvature centre of the vertex folds to a point
        assert!(matches!(
            aca_log_density(&m, (0.0, 1.0), true),
            Err(Error::BeyondCurvatureCenter { .. })
        ));
    }

    #[test]
    fn general_parabola_translation() {
        // y = 2x² − 4x + 5 has its vertex at (1, 3)
        assert_eq!(to_vertex_frame(2.0, -4.0, 5.0, (1.0, 3.0)), (0.0, 0.0));
        let (x, y) = to_vertex_frame(2.0, -4.0, 5.0, (3.0, 2.0 * 9.0 - 12.0 + 5.0));
        assert_abs_diff_eq!(y, 2.0 * x * x, epsilon = 1e-12);
    }

    #[test]
    fn corrected_density_normalizes_where_the_fold_is_negligible() {
        let m = AcaParabolaModel::new(0.5, 1.0, 0.25).unwrap();
        let row = normalization_check(&m, 6.0, 300).unwrap();
        assert!(row.is_valid());
        assert!((row.corrected - 1.0).abs() < 1e-3, "{row:?}");
        // without a fold the raw function also integrates to ~1: the stretch on
        // the convex side cancels the shrink on the concave side to first order
        assert!((row.raw - 1.0).abs() < 1e-3, "{row:?}");
    }

    #[test]
    fn corrected_mass_plus_excluded_mass_is_one() {
        let m = AcaParabolaModel::new(1.0, 1.0, 0.5).unwrap();
        let row = normalization_check(&m, 6.0, 400).unwrap();
        assert!(!row.is_valid());
        assert!((row.corrected + row.excluded_mass - 1.0).abs() < 5e-3, "{row:?}");
    }

    #[test]
    fn model_validation() {
        assert!(AcaParabolaModel::new(0.0, 1.0, 1.0).is_err());
        assert!(AcaParabolaModel::new(1.0, 0.0, 1.0).is_err());
    }
}
