//! Lloyd-style minimization of the cross-entropy clustering cost
//!
//! `h = Σ p_i·(−ln p_i + H×(X_i ‖ A_{f_i}))`
//!
//! over f-adapted Gaussian clusters, with removal of clusters that become too
//! small. With the linear family this is classical Gaussian CEC.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::curves::{select_orientation, FunctionFamily};
use crate::data::Dataset;
use crate::density::{fadapted_cross_entropy, FAdaptedParams};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Init {
    /// Balanced random partition drawn from the seed.
    #[default]
    RandomPartition,
    /// k-means++ seeding on the raw points, then nearest-centroid partition.
    KMeansPlusPlus,
}

impl std::str::FromStr for Init {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" | "random_partition" => Ok(Init::RandomPartition),
            "kmeanspp" | "kmeans++" => Ok(Init::KMeansPlusPlus),
            other => Err(Error::InvalidConfig(format!(
                "unknown init `{other}` (expected random or kmeanspp)"
            ))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct EngineConfig {
    pub k_init: usize,
    pub family: Arc<FunctionFamily>,
    /// Stop once an iteration improves the cost by less than this.
    pub epsilon: f64,
    /// Clusters holding fewer than this fraction of the points are dissolved.
    pub deletion_fraction: f64,
    pub max_iters: usize,
    pub seed: u64,
    pub init: Init,
}

impl EngineConfig {
    pub fn new(k_init: usize, family: Arc<FunctionFamily>) -> Self {
        Self {
            k_init,
            family,
            epsilon: 1e-4,
            deletion_fraction: 0.01,
            max_iters: 200,
            seed: 0,
            init: Init::RandomPartition,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self, x: &Dataset) -> Result<()> {
        let d = x.dim();
        if self.k_init == 0 {
            return Err(Error::InvalidConfig("k must be >= 1".into()));
        }
        if !(self.epsilon > 0.0) || !self.epsilon.is_finite() {
            return Err(Error::InvalidConfig("epsilon must be a positive number".into()));
        }
        if !(0.0..1.0).contains(&self.deletion_fraction) {
            return Err(Error::InvalidConfig(
                "deletion fraction must lie in [0, 1)".into(),
            ));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidConfig("max_iters must be >= 1".into()));
        }
        if d < 2 {
            return Err(Error::InvalidConfig(
                "clustering needs d >= 2 (one dependent and at least one explanatory coordinate)"
                    .into(),
            ));
        }
        if self.family.input_dim() != d - 1 {
            return Err(Error::DimensionMismatch {
                expected: d - 1,
                got: self.family.input_dim(),
            });
        }
        if x.len() < self.k_init * (d + 1) {
            return Err(Error::InvalidConfig(format!(
                "{} points are too few for k={} in R^{d}",
                x.len(),
                self.k_init
            )));
        }
        Ok(())
    }

    /// Smallest cluster the engine keeps: the deletion threshold, raised to
    /// the number of points a curve and covariance fit needs to be non-degenerate.
    fn min_cluster_size(&self, n: usize, d: usize) -> usize {
        deletion_threshold(self.deletion_fraction, n).max(self.family.len().max(d) + 1)
    }
}

/// Size below which a cluster is deleted: clusters with `size < fraction·n`.
pub fn deletion_threshold(fraction: f64, n: usize) -> usize {
    (fraction * n as f64).ceil() as usize
}

/// One fitted cluster.
#[derive(Debug, Clone)]
pub struct ClusterModel {
    pub params: FAdaptedParams,
    /// Closed-form cross-entropy of the cluster's points against `params`.
    pub cross_entropy: f64,
    /// `size / n`.
    pub weight: f64,
    pub size: usize,
}

impl ClusterModel {
    /// `−ln p_i − ln N_i(x)`: the cost of assigning `x` to this cluster.
    pub fn point_cost(&self, x: &[f64]) -> f64 {
        -self.weight.ln() - self.params.log_density(x)
    }
}

#[derive(Debug, Clone)]
pub struct AfcecModel {
    pub clusters: Vec<ClusterModel>,
    /// Cluster index per input row.
    pub assignment: Vec<usize>,
    /// `h_0, h_1, ...`; entry `n` is the cost after iteration `n`.
    pub cost_trace: Vec<f64>,
    /// Clusters removed during each entry of `cost_trace`.
    pub deletions: Vec<usize>,
    pub iterations: usize,
    pub deleted_count: usize,
    /// True if the stop rule fired before `max_iters`.
    pub converged: bool,
    pub seed: u64,
}

impl AfcecModel {
    pub fn k(&self) -> usize {
        self.clusters.len()
    }

    pub fn dim(&self) -> usize {
        self.clusters.first().map_or(0, |c| c.params.dim())
    }

    pub fn cost(&self) -> f64 {
        *self.cost_trace.last().expect("a fitted model has h_0")
    }
}

fn cost_of(clusters: &[ClusterModel]) -> f64 {
    clusters
        .iter()
        .map(|c| c.weight * (-c.weight.ln() + c.cross_entropy))
        .sum()
}

fn group_indices(assignment: &[usize], k: usize) -> Vec<Vec<usize>> {
    let mut groups = vec![Vec::new(); k];
    for (i, &a) in assignment.iter().enumerate() {
        groups[a].push(i);
    }
    groups
}

/// Cost of a partition, each part scored against its cluster's dependent axis
/// and curve with the closed-form cross-entropy.
pub fn cost(x: &Dataset, clusters: &[ClusterModel], assignment: &[usize]) -> Result<f64> {
    if assignment.len() != x.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: assignment.len(),
        });
    }
    if let Some(&bad) = assignment.iter().find(|&&a| a >= clusters.len()) {
        return Err(Error::InvalidConfig(format!("assignment refers to cluster {bad}")));
    }
    let n = x.len() as f64;
    let groups = group_indices(assignment, clusters.len());
    let mut total = 0.0;
    for (c, idx) in clusters.iter().zip(&groups) {
        if idx.is_empty() {
            return Err(Error::DegenerateCluster("empty cluster in cost".into()));
        }
        let p = idx.len() as f64 / n;
        let (h, _) = fadapted_cross_entropy(
            &x.subset(idx),
            c.params.axis(),
            c.params.curve().clone(),
        )?;
        total += p * (-p.ln() + h);
    }
    Ok(total)
}

fn argmin_cluster(clusters: &[ClusterModel], p: &[f64]) -> usize {
    let mut best = 0;
    let mut best_cost = f64::INFINITY;
    for (i, c) in clusters.iter().enumerate() {
        let v = c.point_cost(p);
        if v < best_cost {
            best_cost = v;
            best = i;
        }
    }
    best
}

/// Each point goes to `argmin_i [−ln p_i − ln N_i(x)]`, ties to the lowest index.
pub fn assign_step(x: &Dataset, clusters: &[ClusterModel]) -> Vec<usize> {
    assert!(!clusters.is_empty(), "assign_step needs at least one cluster");
    x.points().map(|p| argmin_cluster(clusters, p)).collect()
}

/// Removes every cluster whose part has fewer than `min_size` points and moves
/// those points to their cost-minimal surviving cluster. Survivors keep their
/// parameters, their weights are reset to the new part sizes.
fn dissolve_small(
    x: &Dataset,
    clusters: &[ClusterModel],
    assignment: &[usize],
    min_size: usize,
) -> Result<(Vec<ClusterModel>, Vec<usize>, usize)> {
    let k = clusters.len();
    let mut sizes = vec![0usize; k];
    for &a in assignment {
        sizes[a] += 1;
    }
    let keep: Vec<bool> = sizes.iter().map(|&s| s >= min_size.max(1)).collect();
    let deleted = keep.iter().filter(|&&k| !k).count();
    if deleted == 0 {
        let mut out = clusters.to_vec();
        let n = x.len() as f64;
        for (c, &s) in out.iter_mut().zip(&sizes) {
            c.size = s;
            c.weight = s as f64 / n;
        }
        return Ok((out, assignment.to_vec(), 0));
    }
    if deleted == k {
        return Err(Error::AllClustersDegenerate);
    }
    let mut remap = vec![usize::MAX; k];
    let mut survivors = Vec::with_capacity(k - deleted);
    for (i, c) in clusters.iter().enumerate() {
        if keep[i] {
            remap[i] = survivors.len();
            survivors.push(c.clone());
        }
    }
    let new_assignment: Vec<usize> = assignment
        .iter()
        .enumerate()
        .map(|(i, &a)| {
            if keep[a] {
                remap[a]
            } else {
                argmin_cluster(&survivors, x.point(i))
            }
        })
        .collect();
    let n = x.len() as f64;
    let mut new_sizes = vec![0usize; survivors.len()];
    for &a in &new_assignment {
        new_sizes[a] += 1;
    }
    for (c, &s) in survivors.iter_mut().zip(&new_sizes) {
        c.size = s;
        c.weight = s as f64 / n;
    }
    Ok((survivors, new_assignment, deleted))
}

/// Deletes clusters holding fewer than `threshold_fraction·n` points,
/// reassigning their points by the same cost rule as [`assign_step`].
pub fn delete_small(
    x: &Dataset,
    clusters: &[ClusterModel],
    assignment: &[usize],
    threshold_fraction: f64,
) -> Result<(Vec<ClusterModel>, Vec<usize>, usize)> {
    dissolve_small(
        x,
        clusters,
        assignment,
        deletion_threshold(threshold_fraction, x.len()),
    )
}

/// Fits every part of `assignment` (labels `0..k`). Parts that are too small
/// or cannot be fitted are dissolved into the cost-minimal fitted cluster and
/// the survivors refitted, until every part fits.
fn estimate(
    x: &Dataset,
    mut assignment: Vec<usize>,
    k: usize,
    family: &Arc<FunctionFamily>,
    min_size: usize,
) -> Result<(Vec<ClusterModel>, Vec<usize>, usize)> {
    let n = x.len();
    let mut k = k;
    let mut deleted = 0;
    loop {
        let groups = group_indices(&assignment, k);
        let fits: Vec<Option<ClusterModel>> = groups
            .iter()
            .map(|idx| {
                if idx.len() < min_size {
                    return None;
                }
                match select_orientation(&x.subset(idx), family) {
                    Ok(o) => Some(ClusterModel {
                        params: o.params,
                        cross_entropy: o.cross_entropy,
                        weight: idx.len() as f64 / n as f64,
                        size: idx.len(),
                    }),
                    Err(e) => {
                        log::debug!("dissolving cluster of {} points: {e}", idx.len());
                        None
                    }
                }
            })
            .collect();
        let failed = fits.iter().filter(|f| f.is_none()).count();
        if failed == 0 {
            return Ok((fits.into_iter().flatten().collect(), assignment, deleted));
        }
        if failed == k {
            return Err(Error::AllClustersDegenerate);
        }
        let mut remap = vec![usize::MAX; k];
        let mut survivors = Vec::new();
        for (i, f) in fits.into_iter().enumerate() {
            if let Some(c) = f {
                remap[i] = survivors.len();
                survivors.push(c);
            }
        }
        for (i, a) in assignment.iter_mut().enumerate() {
            *a = if remap[*a] != usize::MAX {
                remap[*a]
            } else {
                argmin_cluster(&survivors, x.point(i))
            };
        }
        deleted += failed;
        k = survivors.len();
    }
}

/// Row order sorted lexicographically by coordinates, so a fit depends only on
/// the multiset of points and the seed.
fn canonical_order(x: &Dataset) -> Vec<usize> {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| {
        x.point(a)
            .iter()
            .zip(x.point(b))
            .map(|(u, v)| u.total_cmp(v))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    order
}

fn initial_partition(x: &Dataset, k: usize, init: Init, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let n = x.len();
    match init {
        Init::RandomPartition => {
            let mut idx: Vec<usize> = (0..n).collect();
            idx.shuffle(rng);
            let mut assignment = vec![0; n];
            for (pos, &i) in idx.iter().enumerate() {
                assignment[i] = pos % k;
            }
            assignment
        }
        Init::KMeansPlusPlus => {
            let sq = |a: &[f64], b: &[f64]| -> f64 {
                a.iter().zip(b).map(|(u, v)| (u - v) * (u - v)).sum()
            };
            let mut centers: Vec<usize> = vec![rng.random_range(0..n)];
            let mut dist: Vec<f64> = x.points().map(|p| sq(p, x.point(centers[0]))).collect();
            while centers.len() < k {
                let total: f64 = dist.iter().sum();
                let next = if total > 0.0 {
                    let mut target = rng.random::<f64>() * total;
                    let mut chosen = n - 1;
                    for (i, &w) in dist.iter().enumerate() {
                        if target < w {
                            chosen = i;
                            break;
                        }
                        target -= w;
                    }
                    chosen
                } else {
                    rng.random_range(0..n)
                };
                centers.push(next);
                for (i, dv) in dist.iter_mut().enumerate() {
                    *dv = dv.min(sq(x.point(i), x.point(next)));
                }
            }
            x.points()
                .map(|p| {
                    let mut best = 0;
                    let mut best_d = f64::INFINITY;
                    for (c, &ci) in centers.iter().enumerate() {
                        let dv = sq(p, x.point(ci));
                        if dv < best_d {
                            best_d = dv;
                            best = c;
                        }
                    }
                    best
                })
                .collect()
        }
    }
}

/// Runs the clustering loop: initial partition, then repeated
/// {assign, delete small clusters, refit every cluster, evaluate cost} until
/// a deletion-free iteration improves the cost by less than `epsilon`.
pub fn fit(x: &Dataset, cfg: &EngineConfig) -> Result<AfcecModel> {
    cfg.validate(x)?;
    let n = x.len();
    let order = canonical_order(x);
    let xs = x.subset(&order);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let min_size = cfg.min_cluster_size(n, x.dim());

    let init = initial_partition(&xs, cfg.k_init, cfg.init, &mut rng);
    let (mut clusters, mut assignment, deleted0) =
        estimate(&xs, init, cfg.k_init, &cfg.family, min_size)?;
    let mut cost_trace = vec![cost_of(&clusters)];
    let mut deletions = vec![deleted0];
    let mut converged = false;
    let mut iterations = 0;

    while iterations < cfg.max_iters {
        iterations += 1;
        let proposed = assign_step(&xs, &clusters);
        let (survivors, proposed, deleted_a) =
            dissolve_small(&xs, &clusters, &proposed, min_size)?;
        let (refit, new_assignment, deleted_b) =
            estimate(&xs, proposed, survivors.len(), &cfg.family, min_size)?;
        clusters = refit;
        assignment = new_assignment;
        let h = cost_of(&clusters);
        let prev = *cost_trace.last().unwrap();
        let deleted = deleted_a + deleted_b;
        cost_trace.push(h);
        deletions.push(deleted);
        log::trace!("iteration {iterations}: cost {h:.9}, k={}, deleted {deleted}", clusters.len());
        if deleted == 0 && h >= prev - cfg.epsilon {
            converged = true;
            break;
        }
    }

    let mut original_assignment = vec![0; n];
    for (pos, &row) in order.iter().enumerate() {
        original_assignment[row] = assignment[pos];
    }
    Ok(AfcecModel {
        deleted_count: cfg.k_init - clusters.len(),
        clusters,
        assignment: original_assignment,
        cost_trace,
        deletions,
        iterations,
        converged,
        seed: cfg.seed,
    })
}

/// Runs [`fit`] with seeds `seed, seed+1, ..., seed+restarts-1` (in parallel on
/// the current rayon pool) and returns the lowest-cost model together with the
/// final cost of every successful run in seed order. Cost ties go to the
/// smaller seed.
pub fn fit_restarts(
    x: &Dataset,
    cfg: &EngineConfig,
    restarts: usize,
) -> Result<(AfcecModel, Vec<f64>)> {
    if restarts == 0 {
        return Err(Error::InvalidConfig("restarts must be >= 1".into()));
    }
    cfg.validate(x)?;
    let runs: Vec<Result<AfcecModel>> = (0..restarts as u64)
        .into_par_iter()
        .map(|r| {
            let mut c = cfg.clone();
            c.seed = cfg.seed.wrapping_add(r);
            fit(x, &c)
        })
        .collect();
    let mut best: Option<AfcecModel> = None;
    let mut costs = Vec::with_capacity(restarts);
    let mut first_err = None;
    for run in runs {
        match run {
            Ok(m) => {
                costs.push(m.cost());
                // runs arrive in seed order, so strict < keeps the smaller seed on ties
                if best.as_ref().is_none_or(|b| m.cost() < b.cost()) {
                    best = Some(m);
                }
            }
            Err(e) => {
                log::warn!("restart failed: {e}");
                first_err.get_or_insert(e);
            }
        }
    }
    match best {
        Some(m) => Ok((m, costs)),
        None => Err(first_err.unwrap_or(Error::AllClustersDegenerate)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curves::{builtin_family, FamilyKind};
    use approx::assert_abs_diff_eq;
    use rand_distr::{Distribution, StandardNormal};

    fn blobs(seed: u64, centers: &[(f64, f64)], per: usize, sigma: f64) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut rows = Vec::new();
        for &(cx, cy) in centers {
            for _ in 0..per {
                let a: f64 = StandardNormal.sample(&mut rng);
                let b: f64 = StandardNormal.sample(&mut rng);
                rows.push(vec![cx + sigma * a, cy + sigma * b]);
            }
        }
        Dataset::from_rows(&rows).unwrap()
    }

    fn family(kind: FamilyKind) -> Arc<FunctionFamily> {
        Arc::new(builtin_family(kind, 1))
    }

    fn model_for(x: &Dataset, parts: &[Vec<usize>], kind: FamilyKind) -> Vec<ClusterModel> {
        let fam = family(kind);
        parts
            .iter()
            .map(|idx| {
                let o = select_orientation(&x.subset(idx), &fam).unwrap();
                ClusterModel {
                    params: o.params,
                    cross_entropy: o.cross_entropy,
                    weight: idx.len() as f64 / x.len() as f64,
                    size: idx.len(),
                }
            })
            .collect()
    }

    #[test]
    fn single_cluster_cost_is_cross_entropy() {
        let x = blobs(1, &[(0.0, 0.0)], 100, 1.0);
        let all: Vec<usize> = (0..100).collect();
        let clusters = model_for(&x, &[all], FamilyKind::Quadratic);
        let c = cost(&x, &clusters, &vec![0; 100]).unwrap();
        assert_abs_diff_eq!(c, clusters[0].cross_entropy, epsilon = 1e-12);
    }

    #[test]
    fn duplicated_halves_cost_adds_ln_two() {
        let half = blobs(2, &[(0.0, 0.0)], 60, 1.0);
        let both = Dataset::new(2, [half.values(), half.values()].concat()).unwrap();
        let parts = vec![(0..60).collect::<Vec<_>>(), (60..120).collect()];
        let clusters = model_for(&both, &parts, FamilyKind::Linear);
        assert_abs_diff_eq!(
            clusters[0].cross_entropy,
            clusters[1].cross_entropy,
            epsilon = 1e-12
        );
        let assignment: Vec<usize> = (0..120).map(|i| i / 60).collect();
        let c = cost(&both, &clusters, &assignment).unwrap();
        assert_abs_diff_eq!(c, 2f64.ln() + clusters[0].cross_entropy, epsilon = 1e-12);
    }

    #[test]
    fn cost_matches_parts() {
        let x = blobs(3, &[(0.0, 0.0), (5.0, 0.0), (0.0, 5.0)], 50, 1.0);
        let parts: Vec<Vec<usize>> = (0..3).map(|c| (c * 50..(c + 1) * 50).collect()).collect();
        let clusters = model_for(&x, &parts, FamilyKind::Quadratic);
        let assignment: Vec<usize> = (0..150).map(|i| i / 50).collect();
        let by_parts: f64 = clusters
            .iter()
            .map(|c| {
                let p = c.size as f64 / 150.0;
                p * (-p.ln() + c.cross_entropy)
            })
            .sum();
        assert_abs_diff_eq!(
            cost(&x, &clusters, &assignment).unwrap(),
            by_parts,
            epsilon = 1e-12
        );
    }

    #[test]
    fn assignment_recovers_separated_blobs() {
        let x = blobs(4, &[(0.0, 0.0), (20.0, 0.0)], 100, 1.0);
        let parts = vec![(0..100).collect::<Vec<_>>(), (100..200).collect()];
        let clusters = model_for(&x, &parts, FamilyKind::Quadratic);
        let a = assign_step(&x, &clusters);
        assert!(a[..100].iter().all(|&v| v == 0));
        assert!(a[100..].iter().all(|&v| v == 1));
        assert!(assign_step(&x, &clusters[..1]).iter().all(|&v| v == 0));
    }

    #[test]
    fn assignment_ties_go_to_lowest_index() {
        let x = blobs(5, &[(0.0, 0.0)], 40, 1.0);
        let all: Vec<usize> = (0..40).collect();
        let c = model_for(&x, &[all], FamilyKind::Linear).remove(0);
        let twins = vec![c.clone(), c];
        assert!(assign_step(&x, &twins).iter().all(|&v| v == 0));
    }

    #[test]
    fn delete_small_cases() {
        let x = blobs(6, &[(0.0, 0.0), (10.0, 0.0)], 250, 1.0);
        let parts = vec![(0..250).collect::<Vec<_>>(), (250..500).collect()];
        let clusters = model_for(&x, &parts, FamilyKind::Linear);
        let assignment: Vec<usize> = (0..500).map(|i| i / 250).collect();
        let (same, a, deleted) = delete_small(&x, &clusters, &assignment, 0.01).unwrap();
        assert_eq!((same.len(), deleted), (2, 0));
        assert_eq!(a, assignment);

        let mut lopsided = vec![0; 500];
        lopsided[499] = 1;
        let (kept, a, deleted) = delete_small(&x, &clusters, &lopsided, 0.01).unwrap();
        assert_eq!((kept.len(), deleted), (1, 1));
        assert!(a.iter().all(|&v| v == 0));
        assert_abs_diff_eq!(kept[0].weight, 1.0, epsilon = 1e-12);

        let err = delete_small(&x, &clusters, &lopsided, 0.999);
        assert!(matches!(err, Err(Error::AllClustersDegenerate)));
    }

    #[test]
    fn single_cluster_converges_immediately() {
        let x = blobs(7, &[(1.0, 2.0)], 200, 1.5);
        let cfg = EngineConfig::new(1, family(FamilyKind::Quadratic));
        let m = fit(&x, &cfg).unwrap();
        assert!(m.iterations <= 2);
        assert!(m.converged);
        let o = select_orientation(&x, &cfg.family).unwrap();
        assert_abs_diff_eq!(m.cost(), o.cross_entropy, epsilon = 1e-12);
    }

    #[test]
    fn fit_weights_and_trace_invariants() {
        let x = blobs(8, &[(0.0, 0.0), (6.0, 0.0), (3.0, 5.0)], 150, 1.0);
        for init in [Init::RandomPartition, Init::KMeansPlusPlus] {
            let mut cfg = EngineConfig::new(5, family(FamilyKind::Quadratic)).with_seed(3);
            cfg.init = init;
            let m = fit(&x, &cfg).unwrap();
            let total: f64 = m.clusters.iter().map(|c| c.weight).sum();
            assert_abs_diff_eq!(total, 1.0, epsilon = 1e-9);
            for (i, c) in m.clusters.iter().enumerate() {
                assert_eq!(c.size, m.assignment.iter().filter(|&&a| a == i).count());
                assert_abs_diff_eq!(c.weight, c.size as f64 / 450.0, epsilon = 1e-12);
            }
            assert_eq!(m.deleted_count, 5 - m.k());
            assert_eq!(m.cost_trace.len(), m.iterations + 1);
            for w in 1..m.cost_trace.len() {
                if m.deletions[w] == 0 {
                    assert!(m.cost_trace[w] <= m.cost_trace[w - 1] + 1e-9);
                }
            }
            assert_abs_diff_eq!(
                cost(&x, &m.clusters, &m.assignment).unwrap(),
                m.cost(),
                epsilon = 1e-9
            );
        }
    }

    #[test]
    fn restarts_pick_the_minimum_and_are_deterministic() {
        let x = blobs(9, &[(0.0, 0.0), (4.0, 1.0)], 100, 1.0);
        let cfg = EngineConfig::new(3, family(FamilyKind::Quadratic)).with_seed(11);
        let single = fit(&x, &cfg).unwrap();
        let (one, costs) = fit_restarts(&x, &cfg, 1).unwrap();
        assert_eq!(one.cost_trace, single.cost_trace);
        assert_eq!(costs, vec![single.cost()]);

        let (best, costs) = fit_restarts(&x, &cfg, 10).unwrap();
        assert_eq!(costs.len(), 10);
        assert!(costs.iter().all(|&c| best.cost() <= c));
        let (again, _) = fit_restarts(&x, &cfg, 10).unwrap();
        assert_eq!(
            best.cost_trace.iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
            again.cost_trace.iter().map(|v| v.to_bits()).collect::<Vec<_>>()
        );
    }

    #[test]
    fn row_permutation_only_relabels() {
        let x = blobs(10, &[(0.0, 0.0), (5.0, 5.0)], 80, 1.0);
        let mut perm: Vec<usize> = (0..x.len()).collect();
        perm.shuffle(&mut ChaCha8Rng::seed_from_u64(1));
        let y = x.subset(&perm);
        let cfg = EngineConfig::new(3, family(FamilyKind::Quadratic)).with_seed(5);
        let a = fit(&x, &cfg).unwrap();
        let b = fit(&y, &cfg).unwrap();
        assert_eq!(a.cost().to_bits(), b.cost().to_bits());
        for (pos, &row) in perm.iter().enumerate() {
            assert_eq!(b.assignment[pos], a.assignment[row]);
        }
    }

    #[test]
    fn config_validation() {
        let x = blobs(11, &[(0.0, 0.0)], 20, 1.0);
        let fam = family(FamilyKind::Linear);
        let mut cfg = EngineConfig::new(0, Arc::clone(&fam));
        assert!(matches!(fit(&x, &cfg), Err(Error::InvalidConfig(_))));
        cfg.k_init = 10;
        assert!(matches!(fit(&x, &cfg), Err(Error::InvalidConfig(_))));
        cfg.k_init = 1;
        cfg.epsilon = 0.0;
        assert!(matches!(fit(&x, &cfg), Err(Error::InvalidConfig(_))));
        let one_d = Dataset::new(1, (0..20).map(f64::from).collect()).unwrap();
        let cfg = EngineConfig::new(1, fam);
        assert!(fit(&one_d, &cfg).is_err());
        assert!(fit_restarts(&x, &cfg, 0).is_err());
    }
}
