//! Density-based certainty of each data point.
//!
//! A point's certainty comes from how many points fall inside the closed
//! ball of radius `eps` around it (itself included). Points with at least
//! `tr` such neighbours are saturated at `alpha`; sparser points get the
//! count scaled by the expected cluster size `N / K`, so isolated points end
//! up with certainty near zero.

use ndarray::{ArrayView1, Axis};
use serde::{Deserialize, Serialize};

use crate::dataset::DataSet;
use crate::error::{NsError, Result};

/// How the neighbourhood radius is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "lowercase")]
pub enum EpsPolicy {
    Explicit(f64),
    /// Quantile `q` in (0, 1) of all pairwise distances `i < j`.
    Quantile(f64),
}

impl Default for EpsPolicy {
    fn default() -> Self {
        EpsPolicy::Quantile(0.1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CertaintyConfig {
    pub eps_policy: EpsPolicy,
    /// Neighbour count at which a point counts as dense.
    pub tr: usize,
    /// Certainty assigned to dense points.
    pub alpha: f64,
}

impl Default for CertaintyConfig {
    fn default() -> Self {
        Self {
            eps_policy: EpsPolicy::default(),
            tr: 4,
            alpha: 0.95,
        }
    }
}

impl CertaintyConfig {
    pub fn validate(&self) -> Result<()> {
        match self.eps_policy {
            EpsPolicy::Explicit(e) if !(e > 0.0 && e.is_finite()) => {
                return Err(NsError::InvalidConfig(format!("eps must be > 0, got {e}")))
            }
            EpsPolicy::Quantile(q) if !(q > 0.0 && q < 1.0) => {
                return Err(NsError::InvalidConfig(format!(
                    "eps quantile must be in (0, 1), got {q}"
                )))
            }
            _ => {}
        }
        if self.tr < 1 {
            return Err(NsError::InvalidConfig("tr must be >= 1".into()));
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(NsError::InvalidConfig(format!(
                "alpha must be in (0, 1], got {}",
                self.alpha
            )));
        }
        Ok(())
    }
}

/// Per-point certainty values, each in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CertaintyVector(Vec<f64>);

impl CertaintyVector {
    /// Wrap raw values, clamping each into `[0, 1]`.
    pub fn new(values: Vec<f64>) -> Self {
        Self(values.into_iter().map(|v| v.clamp(0.0, 1.0)).collect())
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

/// 1 when `a <= b`, else 0.
#[inline]
pub fn step_indicator(a: f64, b: f64) -> u8 {
    u8::from(a <= b)
}

fn distance(a: ArrayView1<f64>, b: ArrayView1<f64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Number of points within Euclidean distance `eps` of point `i`, counting `i`.
pub fn in_circle(i: usize, ds: &DataSet, eps: f64) -> Result<usize> {
    let pts = ds.points();
    if i >= ds.n() {
        return Err(NsError::IndexOutOfRange { index: i, len: ds.n() });
    }
    let xi = pts.row(i);
    Ok(pts
        .axis_iter(Axis(0))
        .map(|xj| step_indicator(distance(xi, xj), eps) as usize)
        .sum())
}

/// Neighbour counts for every point at once.
pub fn neighbor_counts(ds: &DataSet, eps: f64) -> Vec<usize> {
    let pts = ds.points();
    let n = ds.n();
    let mut counts = vec![1usize; n];
    for i in 0..n {
        for j in (i + 1)..n {
            if step_indicator(distance(pts.row(i), pts.row(j)), eps) == 1 {
                counts[i] += 1;
                counts[j] += 1;
            }
        }
    }
    counts
}

/// Linear-interpolation quantile (numpy's default) of the pairwise distances.
pub fn pairwise_distance_quantile(ds: &DataSet, q: f64) -> Result<f64> {
    let n = ds.n();
    if n < 2 {
        return Err(NsError::InvalidDataset(
            "distance quantile needs at least two points".into(),
        ));
    }
    let pts = ds.points();
    let mut dists = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            dists.push(distance(pts.row(i), pts.row(j)));
        }
    }
    dists.sort_by(f64::total_cmp);
    let h = (dists.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    Ok(dists[lo] + (h - lo as f64) * (dists[hi] - dists[lo]))
}

/// Radius implied by the policy for this dataset.
pub fn resolve_eps(ds: &DataSet, policy: EpsPolicy) -> Result<f64> {
    match policy {
        EpsPolicy::Explicit(e) => Ok(e),
        EpsPolicy::Quantile(q) => pairwise_distance_quantile(ds, q),
    }
}

/// Certainty from a neighbour count: `alpha` when dense, otherwise the count
/// relative to the expected cluster size `n / k`, capped at `alpha`.
pub fn certainty_from_count(count: usize, n: usize, k: usize, cfg: &CertaintyConfig) -> f64 {
    let d = if count >= cfg.tr {
        cfg.alpha
    } else {
        let expected = n as f64 / k as f64;
        (count as f64 / expected).min(cfg.alpha)
    };
    d.clamp(0.0, 1.0)
}

/// Certainty of every point for `k` main clusters.
pub fn certainty(ds: &DataSet, cfg: &CertaintyConfig, k: usize) -> Result<CertaintyVector> {
    cfg.validate()?;
    if k == 0 {
        return Err(NsError::InvalidConfig("k must be >= 1".into()));
    }
    let eps = resolve_eps(ds, cfg.eps_policy)?;
    let n = ds.n();
    let d = neighbor_counts(ds, eps)
        .into_iter()
        .map(|c| certainty_from_count(c, n, k, cfg))
        .collect();
    Ok(CertaintyVector::new(d))
}
