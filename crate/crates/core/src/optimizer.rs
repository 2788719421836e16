//! Cost evaluation and alternating closed-form optimization.
//!
//! The objective for memberships `T` (n x K), noise memberships `F` (n) and
//! centroids `C` (K x d), given certainty `D` and fuzzifier `m`, is
//!
//! ```text
//! N = sum_i sum_j (1 - D_i) T_ij^m |x_i - c_j|^2  +  sum_i D_i F_i^m g_i
//! g_i = max(K - sum_j |x_i - c_j|^2, noise_floor)
//! ```
//!
//! subject to `sum_j T_ij + F_i = 1`. Squared distances are floored at
//! `dist_floor` before use. Each iteration sets the centroids to the
//! stationary point for the current memberships, then the memberships to the
//! constrained minimizer for the new centroids.

use ndarray::{Array1, Array2, ArrayView1, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::certainty::{certainty, CertaintyConfig, CertaintyVector};
use crate::dataset::DataSet;
use crate::error::{NsError, Result};

/// Certainty values are kept this far inside (0, 1) during optimization.
pub const CERTAINTY_MARGIN: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NsConfig {
    /// Number of main clusters.
    pub k: usize,
    /// Exponent applied to memberships in the cost.
    pub fuzzifier: f64,
    /// Stop once the cost changes by less than this between iterations.
    pub stop_eps: f64,
    pub max_iter: usize,
    /// Lower bound on squared point-centroid distances.
    pub dist_floor: f64,
    /// Lower bound on the noise coefficient `g_i`; also the centroid-freeze threshold.
    pub noise_floor: f64,
    pub seed: u64,
    pub certainty: CertaintyConfig,
    /// Boundary threshold `t` used when labelling.
    pub boundary_t: f64,
}

impl Default for NsConfig {
    fn default() -> Self {
        Self {
            k: 2,
            fuzzifier: 2.0,
            stop_eps: 1e-6,
            max_iter: 300,
            dist_floor: 1e-12,
            noise_floor: 1e-6,
            seed: 0,
            certainty: CertaintyConfig::default(),
            boundary_t: 0.4,
        }
    }
}

impl NsConfig {
    pub fn with_k(k: usize) -> Self {
        Self { k, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(NsError::InvalidConfig(msg));
        if self.k < 1 {
            return bad("k must be >= 1".into());
        }
        if !(self.fuzzifier > 1.0 && self.fuzzifier.is_finite()) {
            return bad(format!("fuzzifier must be > 1, got {}", self.fuzzifier));
        }
        if !(self.stop_eps > 0.0) {
            return bad(format!("stop_eps must be > 0, got {}", self.stop_eps));
        }
        if self.max_iter < 1 {
            return bad("max_iter must be >= 1".into());
        }
        if !(self.dist_floor > 0.0) || !(self.noise_floor > 0.0) {
            return bad("dist_floor and noise_floor must be > 0".into());
        }
        if !(self.boundary_t > 0.0 && self.boundary_t < 0.5) {
            return bad(format!("boundary_t must be in (0, 0.5), got {}", self.boundary_t));
        }
        self.certainty.validate()
    }
}

/// Optimizer state: memberships, centroids and the cost trace.
#[derive(Debug, Clone, PartialEq)]
pub struct NsState {
    pub t_mem: Array2<f64>,
    pub f_mem: Array1<f64>,
    pub centroids: Array2<f64>,
    pub cost_history: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Certainty actually used (clamped away from 0 and 1).
    pub certainty: CertaintyVector,
    /// How many times a centroid kept its previous value because its weight
    /// denominator fell below `noise_floor`.
    pub frozen_centroid_updates: usize,
}

impl NsState {
    /// Assemble a state from parts, e.g. to evaluate the cost at an arbitrary point.
    pub fn from_parts(
        t_mem: Array2<f64>,
        f_mem: Array1<f64>,
        centroids: Array2<f64>,
        certainty: CertaintyVector,
    ) -> Self {
        Self {
            t_mem,
            f_mem,
            centroids,
            cost_history: Vec::new(),
            iterations: 0,
            converged: false,
            certainty,
            frozen_centroid_updates: 0,
        }
    }

    pub fn n(&self) -> usize {
        self.t_mem.nrows()
    }

    pub fn k(&self) -> usize {
        self.t_mem.ncols()
    }

    /// Largest violation of `sum_j T_ij + F_i = 1` over all points.
    pub fn max_constraint_violation(&self) -> f64 {
        constraint_violation(&self.t_mem, &self.f_mem)
    }
}

pub(crate) fn constraint_violation(t: &Array2<f64>, f: &Array1<f64>) -> f64 {
    t.axis_iter(Axis(0))
        .zip(f.iter())
        .map(|(row, fi)| (row.sum() + fi - 1.0).abs())
        .fold(0.0, f64::max)
}

/// Squared distances from `x` to every centroid, floored at `floor`.
pub fn squared_distances(x: ArrayView1<f64>, centroids: &Array2<f64>, floor: f64) -> Vec<f64> {
    centroids
        .axis_iter(Axis(0))
        .map(|c| {
            let d2: f64 = x.iter().zip(c.iter()).map(|(a, b)| (a - b) * (a - b)).sum();
            d2.max(floor)
        })
        .collect()
}

/// Unfloored noise coefficient `K - sum_j d_ij^2`.
fn raw_noise_coefficient(dists_sq: &[f64], k: usize) -> f64 {
    k as f64 - dists_sq.iter().sum::<f64>()
}

/// Noise coefficient `g_i = max(K - sum_j d_ij^2, floor)`.
pub fn noise_coefficient(dists_sq: &[f64], k: usize, floor: f64) -> f64 {
    raw_noise_coefficient(dists_sq, k).max(floor)
}

fn check_shapes(ds: &DataSet, t: &Array2<f64>, f: &Array1<f64>, c: &Array2<f64>, d: &CertaintyVector) -> Result<()> {
    let n = ds.n();
    let k = c.nrows();
    let mut problems = Vec::new();
    if t.dim() != (n, k) {
        problems.push(format!("memberships are {:?}, expected ({n}, {k})", t.dim()));
    }
    if f.len() != n {
        problems.push(format!("{} noise memberships for {n} points", f.len()));
    }
    if c.ncols() != ds.dim() {
        problems.push(format!("centroids have {} columns, data has {}", c.ncols(), ds.dim()));
    }
    if d.len() != n {
        problems.push(format!("{} certainty values for {n} points", d.len()));
    }
    if problems.is_empty() {
        Ok(())
    } else {
        Err(NsError::ShapeMismatch(problems.join("; ")))
    }
}

/// Value of the objective at `state` (its memberships and centroids).
pub fn cost(ds: &DataSet, state: &NsState, d_vec: &CertaintyVector, cfg: &NsConfig) -> Result<f64> {
    cost_of(ds, &state.t_mem, &state.f_mem, &state.centroids, d_vec, cfg)
}

pub fn cost_of(
    ds: &DataSet,
    t: &Array2<f64>,
    f: &Array1<f64>,
    centroids: &Array2<f64>,
    d_vec: &CertaintyVector,
    cfg: &NsConfig,
) -> Result<f64> {
    check_shapes(ds, t, f, centroids, d_vec)?;
    let m = cfg.fuzzifier;
    let k = centroids.nrows();
    let mut total = 0.0;
    for (i, x) in ds.points().axis_iter(Axis(0)).enumerate() {
        let di = d_vec.as_slice()[i];
        let d2 = squared_distances(x, centroids, cfg.dist_floor);
        let main: f64 = d2.iter().zip(t.row(i)).map(|(dd, &tij)| tij.powf(m) * dd).sum();
        let g = noise_coefficient(&d2, k, cfg.noise_floor);
        total += (1.0 - di) * main + di * f[i].powf(m) * g;
    }
    Ok(total)
}

/// Log-weights of the K main clusters and the noise cluster for one point:
/// `-(1/(m-1)) ln((1-D) d_j^2)` and `-(1/(m-1)) ln(D g)`.
fn log_weights(dists_sq: &[f64], g: f64, d: f64, m: f64) -> Vec<f64> {
    let e = 1.0 / (m - 1.0);
    dists_sq
        .iter()
        .map(|&dd| -e * ((1.0 - d) * dd).ln())
        .chain(std::iter::once(-e * (d * g).ln()))
        .collect()
}

fn log_sum_exp(a: &[f64]) -> f64 {
    let max = a.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    max + a.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// Normalized Lagrange multiplier for one point.
///
/// Memberships take the form `T_ij = (lambda / ((1-D) d_ij^2))^(1/(m-1))` and
/// `F_i = (lambda / (D g_i))^(1/(m-1))`; this returns the unique `lambda` that
/// makes them sum to one. For `m = 2` that is
/// `1 / (sum_j 1/((1-D) d_ij^2) + 1/(D g_i))`.
///
/// The multiplier of the Lagrangian itself is `m * lambda` (see
/// [`lagrange_multipliers`]).
pub fn lambda_for_point(i: usize, dists_sq: &[f64], g: f64, d: f64, m: f64) -> Result<f64> {
    if !(d > 0.0 && d < 1.0) || !(g > 0.0) || dists_sq.iter().any(|&v| !(v > 0.0)) {
        return Err(NsError::DegenerateWeights(i));
    }
    let lw = log_weights(dists_sq, g, d, m);
    let lambda = (-(m - 1.0) * log_sum_exp(&lw)).exp();
    if lambda.is_finite() && lambda > 0.0 {
        Ok(lambda)
    } else {
        Err(NsError::DegenerateWeights(i))
    }
}

/// Memberships of one point given its floored squared distances.
fn point_memberships(dists_sq: &[f64], g: f64, d: f64, m: f64) -> (Vec<f64>, f64) {
    let k = dists_sq.len();
    if d >= 1.0 {
        // noise term vanishes: plain fuzzy c-means row
        let lw: Vec<f64> = dists_sq.iter().map(|&dd| -dd.ln() / (m - 1.0)).collect();
        let lse = log_sum_exp(&lw);
        return (lw.iter().map(|v| (v - lse).exp()).collect(), 0.0);
    }
    if d <= 0.0 {
        return (vec![0.0; k], 1.0);
    }
    let lw = log_weights(dists_sq, g, d, m);
    let lse = log_sum_exp(&lw);
    let t = lw[..k].iter().map(|v| (v - lse).exp()).collect();
    (t, (lw[k] - lse).exp())
}

/// Constrained minimizer of the objective over memberships, centroids fixed.
///
/// Certainty exactly 1 gives `F_i = 0` with a fuzzy c-means row; exactly 0
/// gives `F_i = 1` and a zero row.
pub fn update_memberships(
    ds: &DataSet,
    centroids: &Array2<f64>,
    d_vec: &CertaintyVector,
    cfg: &NsConfig,
) -> Result<(Array2<f64>, Array1<f64>)> {
    let n = ds.n();
    let k = centroids.nrows();
    if centroids.ncols() != ds.dim() || d_vec.len() != n {
        return Err(NsError::ShapeMismatch(format!(
            "centroids {:?} / {} certainty values for data ({n}, {})",
            centroids.dim(),
            d_vec.len(),
            ds.dim()
        )));
    }
    let mut t = Array2::zeros((n, k));
    let mut f = Array1::zeros(n);
    for (i, x) in ds.points().axis_iter(Axis(0)).enumerate() {
        let d2 = squared_distances(x, centroids, cfg.dist_floor);
        let g = noise_coefficient(&d2, k, cfg.noise_floor);
        let (row, fi) = point_memberships(&d2, g, d_vec.as_slice()[i], cfg.fuzzifier);
        for (j, v) in row.into_iter().enumerate() {
            t[[i, j]] = v;
        }
        f[i] = fi;
    }
    Ok((t, f))
}

/// Result of a centroid update.
#[derive(Debug, Clone, PartialEq)]
pub struct CentroidUpdate {
    pub centroids: Array2<f64>,
    /// Centroids left at their previous position this step.
    pub frozen: usize,
}

/// Stationary centroids for fixed memberships:
///
/// ```text
/// c_j = sum_i w_ij x_i / sum_i w_ij,   w_ij = (1 - D_i) T_ij^m - D_i F_i^m [g_i unfloored]
/// ```
///
/// The noise part only enters for points whose noise coefficient (evaluated
/// at `previous`) is above the floor, since a floored `g_i` does not depend on
/// the centroids. A centroid whose denominator is at most `noise_floor` keeps
/// its previous value.
pub fn update_centroids(
    ds: &DataSet,
    t_mem: &Array2<f64>,
    f_mem: &Array1<f64>,
    d_vec: &CertaintyVector,
    previous: &Array2<f64>,
    cfg: &NsConfig,
) -> Result<CentroidUpdate> {
    check_shapes(ds, t_mem, f_mem, previous, d_vec)?;
    let m = cfg.fuzzifier;
    let k = previous.nrows();
    let dim = ds.dim();
    let mut num = Array2::<f64>::zeros((k, dim));
    let mut den = vec![0.0; k];
    for (i, x) in ds.points().axis_iter(Axis(0)).enumerate() {
        let di = d_vec.as_slice()[i];
        let d2 = squared_distances(x, previous, cfg.dist_floor);
        let noise_active = raw_noise_coefficient(&d2, k) > cfg.noise_floor;
        let noise = if noise_active { di * f_mem[i].powf(m) } else { 0.0 };
        for j in 0..k {
            let w = (1.0 - di) * t_mem[[i, j]].powf(m) - noise;
            den[j] += w;
            num.row_mut(j).scaled_add(w, &x);
        }
    }
    let mut centroids = previous.clone();
    let mut frozen = 0;
    for (j, &dj) in den.iter().enumerate() {
        if dj > cfg.noise_floor {
            centroids.row_mut(j).assign(&(&num.row(j) / dj));
        } else {
            frozen += 1;
        }
    }
    Ok(CentroidUpdate { centroids, frozen })
}

/// First centroids from random memberships, weighting each point by
/// `(1 - D_i) T_ij^m` only.
fn initial_centroids(ds: &DataSet, t_mem: &Array2<f64>, d_vec: &CertaintyVector, m: f64) -> Array2<f64> {
    let k = t_mem.ncols();
    let mut centroids = Array2::zeros((k, ds.dim()));
    let mean = ds.points().mean_axis(Axis(0)).expect("dataset is non-empty");
    for j in 0..k {
        let mut den = 0.0;
        let mut row = Array1::<f64>::zeros(ds.dim());
        for (i, x) in ds.points().axis_iter(Axis(0)).enumerate() {
            let w = (1.0 - d_vec.as_slice()[i]) * t_mem[[i, j]].powf(m);
            den += w;
            row.scaled_add(w, &x);
        }
        if den > 0.0 {
            centroids.row_mut(j).assign(&(row / den));
        } else {
            centroids.row_mut(j).assign(&mean);
        }
    }
    centroids
}

/// Partial derivatives of the objective.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    /// dN/dT_ij, minus the multiplier when one was supplied.
    pub d_t: Array2<f64>,
    /// dN/dF_i, minus the multiplier when one was supplied.
    pub d_f: Array1<f64>,
    pub d_c: Array2<f64>,
}

/// Exact partial derivatives of the implemented (floored) objective.
///
/// With `multipliers` the membership gradients are those of the Lagrangian
/// `N - sum_i mu_i (sum_j T_ij + F_i - 1)`.
pub fn analytic_gradients(
    ds: &DataSet,
    state: &NsState,
    d_vec: &CertaintyVector,
    cfg: &NsConfig,
    multipliers: Option<&[f64]>,
) -> Result<Gradients> {
    let (t, f, c) = (&state.t_mem, &state.f_mem, &state.centroids);
    check_shapes(ds, t, f, c, d_vec)?;
    if let Some(mu) = multipliers {
        if mu.len() != ds.n() {
            return Err(NsError::ShapeMismatch(format!(
                "{} multipliers for {} points",
                mu.len(),
                ds.n()
            )));
        }
    }
    let m = cfg.fuzzifier;
    let (n, k) = t.dim();
    let mut d_t = Array2::zeros((n, k));
    let mut d_f = Array1::zeros(n);
    let mut d_c = Array2::<f64>::zeros(c.dim());

    for (i, x) in ds.points().axis_iter(Axis(0)).enumerate() {
        let di = d_vec.as_slice()[i];
        let mu = multipliers.map_or(0.0, |v| v[i]);
        let raw: Vec<f64> = squared_distances(x, c, 0.0);
        let d2: Vec<f64> = raw.iter().map(|v| v.max(cfg.dist_floor)).collect();
        let g_raw = raw_noise_coefficient(&d2, k);
        let g = g_raw.max(cfg.noise_floor);
        let fm = f[i].powf(m);

        for j in 0..k {
            d_t[[i, j]] = m * (1.0 - di) * t[[i, j]].powf(m - 1.0) * d2[j] - mu;
        }
        d_f[i] = m * di * f[i].powf(m - 1.0) * g - mu;

        for j in 0..k {
            // d(d_ij^2)/dc_j = -2 (x_i - c_j), zero where the distance floor binds
            let main = if raw[j] > cfg.dist_floor {
                (1.0 - di) * t[[i, j]].powf(m)
            } else {
                0.0
            };
            let noise = if g_raw > cfg.noise_floor && raw[j] > cfg.dist_floor {
                di * fm
            } else {
                0.0
            };
            let coef = -2.0 * (main - noise);
            for (dc, (xv, cv)) in d_c.row_mut(j).iter_mut().zip(x.iter().zip(c.row(j).iter())) {
                *dc += coef * (xv - cv);
            }
        }
    }
    Ok(Gradients { d_t, d_f, d_c })
}

/// Lagrangian multipliers `m * lambda_i` at which the memberships from
/// [`update_memberships`] zero the membership gradients.
pub fn lagrange_multipliers(
    ds: &DataSet,
    centroids: &Array2<f64>,
    d_vec: &CertaintyVector,
    cfg: &NsConfig,
) -> Result<Vec<f64>> {
    let k = centroids.nrows();
    ds.points()
        .axis_iter(Axis(0))
        .enumerate()
        .map(|(i, x)| {
            let d2 = squared_distances(x, centroids, cfg.dist_floor);
            let g = noise_coefficient(&d2, k, cfg.noise_floor);
            lambda_for_point(i, &d2, g, d_vec.as_slice()[i], cfg.fuzzifier).map(|l| cfg.fuzzifier * l)
        })
        .collect()
}

/// Snapshot handed to a [`fit_with_observer`] callback after every iteration.
#[derive(Debug)]
pub struct IterationView<'a> {
    pub iteration: usize,
    pub t_mem: &'a Array2<f64>,
    pub f_mem: &'a Array1<f64>,
    pub centroids: &'a Array2<f64>,
    pub cost: f64,
}

/// Random memberships: each row uniform on (0, 1], normalized to sum one.
fn random_memberships(n: usize, k: usize, seed: u64) -> (Array2<f64>, Array1<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = Array2::zeros((n, k));
    let mut f = Array1::zeros(n);
    for i in 0..n {
        let row: Vec<f64> = (0..=k).map(|_| 1.0 - rng.random::<f64>()).collect();
        let s: f64 = row.iter().sum();
        for j in 0..k {
            t[[i, j]] = row[j] / s;
        }
        f[i] = row[k] / s;
    }
    (t, f)
}

/// Keep certainty strictly inside (0, 1) so every weight stays finite.
pub fn clamp_certainty(d: &CertaintyVector) -> CertaintyVector {
    CertaintyVector::new(
        d.as_slice()
            .iter()
            .map(|v| v.clamp(CERTAINTY_MARGIN, 1.0 - CERTAINTY_MARGIN))
            .collect(),
    )
}

pub fn fit(ds: &DataSet, cfg: &NsConfig) -> Result<NsState> {
    fit_with_observer(ds, cfg, |_| {})
}

/// Run the alternating optimization, calling `observer` after each iteration.
pub fn fit_with_observer<F>(ds: &DataSet, cfg: &NsConfig, mut observer: F) -> Result<NsState>
where
    F: FnMut(&IterationView<'_>),
{
    cfg.validate()?;
    let (n, k) = (ds.n(), cfg.k);
    if n <= k {
        return Err(NsError::TooFewPoints { n, k });
    }
    let d_vec = clamp_certainty(&certainty(ds, &cfg.certainty, k)?);
    let (mut t, mut f) = random_memberships(n, k, cfg.seed);
    let mut centroids = initial_centroids(ds, &t, &d_vec, cfg.fuzzifier);
    let mut history: Vec<f64> = Vec::new();
    let mut frozen = 0;
    let mut converged = false;

    for iteration in 1..=cfg.max_iter {
        if iteration > 1 {
            let update = update_centroids(ds, &t, &f, &d_vec, &centroids, cfg)?;
            centroids = update.centroids;
            frozen += update.frozen;
        }
        (t, f) = update_memberships(ds, &centroids, &d_vec, cfg)?;
        let value = cost_of(ds, &t, &f, &centroids, &d_vec, cfg)?;
        if !value.is_finite() {
            return Err(NsError::NonFinite { iteration });
        }
        observer(&IterationView {
            iteration,
            t_mem: &t,
            f_mem: &f,
            centroids: &centroids,
            cost: value,
        });
        let delta = history.last().map(|prev| (value - prev).abs());
        history.push(value);
        if delta.is_some_and(|dl| dl < cfg.stop_eps) {
            converged = true;
            break;
        }
    }

    Ok(NsState {
        t_mem: t,
        f_mem: f,
        centroids,
        iterations: history.len(),
        cost_history: history,
        converged,
        certainty: d_vec,
        frozen_centroid_updates: frozen,
    })
}

/// Fit once per seed and keep the run with the lowest final cost.
pub fn fit_best_of(ds: &DataSet, cfg: &NsConfig, seeds: impl IntoIterator<Item = u64>) -> Result<NsState> {
    let mut best: Option<NsState> = None;
    for seed in seeds {
        let state = fit(ds, &NsConfig { seed, ..*cfg })?;
        let cost = state.cost_history.last().copied().unwrap_or(f64::INFINITY);
        if best
            .as_ref()
            .is_none_or(|b| cost < b.cost_history.last().copied().unwrap_or(f64::INFINITY))
        {
            best = Some(state);
        }
    }
    best.ok_or_else(|| NsError::InvalidConfig("no seeds given".into()))
}
