//! External scoring: permutation-optimal accuracy and a fuzzy c-means baseline.

use std::collections::BTreeMap;

use ndarray::{Array1, Array2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::DataSet;
use crate::error::{NsError, Result};
use crate::labeling::hard_labels;
use crate::optimizer::{fit, squared_distances, NsConfig};

/// Largest smaller-side size handled by the exact subset search.
pub const EXACT_LIMIT: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub accuracy: f64,
    /// Predicted cluster -> truth class, for matched clusters only.
    pub mapping: BTreeMap<usize, i64>,
    /// Distinct predicted clusters (rows of `confusion`), ascending.
    pub clusters: Vec<usize>,
    /// Distinct truth classes (columns of `confusion`), ascending.
    pub classes: Vec<i64>,
    pub confusion: Vec<Vec<usize>>,
    pub n_evaluated: usize,
}

/// Which solver picks the cluster-to-class matching.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatchRoute {
    /// Exact search when the smaller side has at most [`EXACT_LIMIT`] entries, else assignment.
    Auto,
    Exact,
    Assignment,
}

/// Rows matched to columns; `None` for unmatched rows.
type Matching = Vec<Option<usize>>;

fn matched_total(w: &[Vec<usize>], m: &Matching) -> usize {
    m.iter().enumerate().filter_map(|(r, c)| c.map(|c| w[r][c])).sum()
}

/// Maximum-weight matching by dynamic programming over subsets of the
/// smaller side. `O(big * 2^small * small)`.
pub fn exact_matching(w: &[Vec<usize>]) -> (usize, Matching) {
    let rows = w.len();
    let cols = w.first().map_or(0, Vec::len);
    if rows <= cols {
        // subsets of rows, scanning columns
        let (best, by_col) = subset_dp(cols, rows, |c, r| w[r][c]);
        let mut m = vec![None; rows];
        for (c, r) in by_col.into_iter().enumerate() {
            if let Some(r) = r {
                m[r] = Some(c);
            }
        }
        (best, m)
    } else {
        subset_dp(rows, cols, |r, c| w[r][c])
    }
}

/// Scan `big` items in order, each taking at most one unused element of the
/// `small` side. Returns the best total and each big item's choice.
fn subset_dp(big: usize, small: usize, weight: impl Fn(usize, usize) -> usize) -> (usize, Vec<Option<usize>>) {
    let full = 1usize << small;
    // dp[b][mask]: best total over the first b items using exactly `mask`
    let mut dp = vec![vec![None::<usize>; full]; big + 1];
    dp[0][0] = Some(0);
    for b in 0..big {
        for mask in 0..full {
            let Some(cur) = dp[b][mask] else { continue };
            let skip = &mut dp[b + 1][mask];
            *skip = Some(skip.map_or(cur, |v| v.max(cur)));
            for s in 0..small {
                if mask & (1 << s) == 0 {
                    let next = cur + weight(b, s);
                    let slot = &mut dp[b + 1][mask | (1 << s)];
                    *slot = Some(slot.map_or(next, |v| v.max(next)));
                }
            }
        }
    }
    let (mut mask, best) = dp[big]
        .iter()
        .enumerate()
        .filter_map(|(m, v)| v.map(|v| (m, v)))
        .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0)))
        .expect("empty mask is always reachable");
    let mut choice = vec![None; big];
    for b in (0..big).rev() {
        let target = dp[b + 1][mask].expect("reachable");
        if dp[b][mask] == Some(target) {
            continue;
        }
        let s = (0..small)
            .find(|&s| mask & (1 << s) != 0 && dp[b][mask ^ (1 << s)].is_some_and(|v| v + weight(b, s) == target))
            .expect("backtrack finds a predecessor");
        choice[b] = Some(s);
        mask ^= 1 << s;
    }
    (best, choice)
}

/// Maximum-weight matching with the Hungarian algorithm (shortest augmenting
/// paths with potentials) on the zero-padded square matrix.
pub fn assignment_matching(w: &[Vec<usize>]) -> (usize, Matching) {
    let rows = w.len();
    let cols = w.first().map_or(0, Vec::len);
    let n = rows.max(cols);
    if n == 0 {
        return (0, Vec::new());
    }
    let max_w = w.iter().flatten().copied().max().unwrap_or(0) as i64;
    let cost = |r: usize, c: usize| -> i64 {
        if r < rows && c < cols {
            max_w - w[r][c] as i64
        } else {
            max_w
        }
    };
    // 1-based arrays; p[c] is the row assigned to column c
    let mut u = vec![0i64; n + 1];
    let mut v = vec![0i64; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![i64::MAX; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = i64::MAX;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut m = vec![None; rows];
    for (j, &row) in p.iter().enumerate().skip(1) {
        let r = row - 1;
        if r < rows && j - 1 < cols {
            m[r] = Some(j - 1);
        }
    }
    (matched_total(w, &m), m)
}

/// Permutation-optimal accuracy of `pred` against `truth`.
pub fn accuracy(pred: &[usize], truth: &[i64]) -> Result<EvalReport> {
    accuracy_with(pred, truth, MatchRoute::Auto)
}

pub fn accuracy_with(pred: &[usize], truth: &[i64], route: MatchRoute) -> Result<EvalReport> {
    if pred.len() != truth.len() {
        return Err(NsError::LengthMismatch {
            pred: pred.len(),
            truth: truth.len(),
        });
    }
    if pred.is_empty() {
        return Err(NsError::EmptyDataset);
    }
    let mut clusters: Vec<usize> = pred.to_vec();
    clusters.sort_unstable();
    clusters.dedup();
    let mut classes: Vec<i64> = truth.to_vec();
    classes.sort_unstable();
    classes.dedup();
    let mut confusion = vec![vec![0usize; classes.len()]; clusters.len()];
    for (p, t) in pred.iter().zip(truth) {
        let r = clusters.binary_search(p).expect("collected above");
        let c = classes.binary_search(t).expect("collected above");
        confusion[r][c] += 1;
    }
    let exact = match route {
        MatchRoute::Auto => clusters.len().min(classes.len()) <= EXACT_LIMIT,
        MatchRoute::Exact => true,
        MatchRoute::Assignment => false,
    };
    let (matched, m) = if exact {
        exact_matching(&confusion)
    } else {
        assignment_matching(&confusion)
    };
    let mapping = m
        .iter()
        .enumerate()
        .filter_map(|(r, c)| c.map(|c| (clusters[r], classes[c])))
        .collect();
    Ok(EvalReport {
        accuracy: matched as f64 / pred.len() as f64,
        mapping,
        clusters,
        classes,
        confusion,
        n_evaluated: pred.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FcmConfig {
    pub k: usize,
    pub fuzzifier: f64,
    pub stop_eps: f64,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for FcmConfig {
    fn default() -> Self {
        Self {
            k: 2,
            fuzzifier: 2.0,
            stop_eps: 1e-6,
            max_iter: 300,
            seed: 0,
        }
    }
}

impl FcmConfig {
    /// Baseline settings matching an optimizer configuration.
    pub fn matching(ns: &NsConfig) -> Self {
        Self {
            k: ns.k,
            fuzzifier: ns.fuzzifier,
            stop_eps: ns.stop_eps,
            max_iter: ns.max_iter,
            seed: ns.seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FcmResult {
    pub memberships: Array2<f64>,
    pub centroids: Array2<f64>,
    pub cost_history: Vec<f64>,
    pub converged: bool,
}

const FCM_DIST_FLOOR: f64 = 1e-12;

/// Fuzzy c-means memberships for fixed centroids: `u_ij` proportional to `d_ij^(-2/(m-1))`.
pub fn fcm_memberships(ds: &DataSet, centroids: &Array2<f64>, m: f64) -> Array2<f64> {
    let k = centroids.nrows();
    let mut u = Array2::zeros((ds.n(), k));
    for (i, x) in ds.points().axis_iter(Axis(0)).enumerate() {
        let lw: Vec<f64> = squared_distances(x, centroids, FCM_DIST_FLOOR)
            .iter()
            .map(|d2| -d2.ln() / (m - 1.0))
            .collect();
        let max = lw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let s: f64 = lw.iter().map(|v| (v - max).exp()).sum();
        for j in 0..k {
            u[[i, j]] = (lw[j] - max).exp() / s;
        }
    }
    u
}

fn fcm_centroids(ds: &DataSet, u: &Array2<f64>, m: f64, previous: Option<&Array2<f64>>) -> Array2<f64> {
    let k = u.ncols();
    let mut c = Array2::zeros((k, ds.dim()));
    for j in 0..k {
        let w: Array1<f64> = u.column(j).mapv(|v| v.powf(m));
        let den = w.sum();
        if den > 0.0 {
            c.row_mut(j).assign(&(w.dot(ds.points()) / den));
        } else if let Some(p) = previous {
            c.row_mut(j).assign(&p.row(j));
        }
    }
    c
}

fn fcm_cost(ds: &DataSet, u: &Array2<f64>, c: &Array2<f64>, m: f64) -> f64 {
    ds.points()
        .axis_iter(Axis(0))
        .enumerate()
        .map(|(i, x)| {
            squared_distances(x, c, FCM_DIST_FLOOR)
                .iter()
                .enumerate()
                .map(|(j, d2)| u[[i, j]].powf(m) * d2)
                .sum::<f64>()
        })
        .sum()
}

/// Standard fuzzy c-means from random normalized memberships.
pub fn fcm_fit(ds: &DataSet, cfg: &FcmConfig) -> Result<FcmResult> {
    if cfg.k < 1 || !(cfg.fuzzifier > 1.0) || !(cfg.stop_eps > 0.0) || cfg.max_iter < 1 {
        return Err(NsError::InvalidConfig(format!("invalid FCM settings {cfg:?}")));
    }
    let (n, k) = (ds.n(), cfg.k);
    if n <= k {
        return Err(NsError::TooFewPoints { n, k });
    }
    let m = cfg.fuzzifier;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut u = Array2::from_shape_fn((n, k), |_| 1.0 - rng.random::<f64>());
    for mut row in u.axis_iter_mut(Axis(0)) {
        let s = row.sum();
        row /= s;
    }
    let mut c = fcm_centroids(ds, &u, m, None);
    let mut history: Vec<f64> = Vec::new();
    let mut converged = false;
    for iteration in 1..=cfg.max_iter {
        if iteration > 1 {
            c = fcm_centroids(ds, &u, m, Some(&c));
        }
        u = fcm_memberships(ds, &c, m);
        let j = fcm_cost(ds, &u, &c, m);
        if !j.is_finite() {
            return Err(NsError::NonFinite { iteration });
        }
        let done = history.last().is_some_and(|prev| (j - prev).abs() < cfg.stop_eps);
        history.push(j);
        if done {
            converged = true;
            break;
        }
    }
    Ok(FcmResult {
        memberships: u,
        centroids: c,
        cost_history: history,
        converged,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeedScore {
    pub seed: u64,
    pub accuracy: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodScores {
    pub per_seed: Vec<SeedScore>,
    pub best: f64,
    pub mean: f64,
}

impl MethodScores {
    fn from_runs(per_seed: Vec<SeedScore>) -> Self {
        let best = per_seed.iter().map(|s| s.accuracy).fold(f64::NEG_INFINITY, f64::max);
        let mean = per_seed.iter().map(|s| s.accuracy).sum::<f64>() / per_seed.len() as f64;
        Self { per_seed, best, mean }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub dataset: String,
    pub n: usize,
    pub dim: usize,
    pub k: usize,
    pub proposed: MethodScores,
    pub fcm: MethodScores,
}

/// Run both methods with seeds `base, base + 1, ...` (the base seed of each
/// configuration) and score their hard labels against the dataset labels.
pub fn compare(ds: &DataSet, ns_cfg: &NsConfig, fcm_cfg: &FcmConfig, n_seeds: usize) -> Result<Comparison> {
    let truth = ds.labels().ok_or(NsError::MissingLabels)?;
    if n_seeds == 0 {
        return Err(NsError::InvalidConfig("need at least one seed".into()));
    }
    let mut ns_runs = Vec::with_capacity(n_seeds);
    let mut fcm_runs = Vec::with_capacity(n_seeds);
    for s in 0..n_seeds as u64 {
        let seed = ns_cfg.seed.wrapping_add(s);
        let state = fit(ds, &NsConfig { seed, ..*ns_cfg })?;
        ns_runs.push(SeedScore {
            seed,
            accuracy: accuracy(&hard_labels(&state), truth)?.accuracy,
            iterations: state.iterations,
            converged: state.converged,
        });

        let seed = fcm_cfg.seed.wrapping_add(s);
        let res = fcm_fit(ds, &FcmConfig { seed, ..*fcm_cfg })?;
        fcm_runs.push(SeedScore {
            seed,
            accuracy: accuracy(&crate::labeling::argmax_rows(&res.memberships), truth)?.accuracy,
            iterations: res.cost_history.len(),
            converged: res.converged,
        });
    }
    Ok(Comparison {
        dataset: ds.name().to_string(),
        n: ds.n(),
        dim: ds.dim(),
        k: ns_cfg.k,
        proposed: MethodScores::from_runs(ns_runs),
        fcm: MethodScores::from_runs(fcm_runs),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use proptest::prelude::*;

    /// Best matched count by trying every injective map from clusters to classes.
    fn brute_force(w: &[Vec<usize>]) -> usize {
        fn go(w: &[Vec<usize>], r: usize, used: &mut Vec<bool>) -> usize {
            if r == w.len() {
                return 0;
            }
            let mut best = go(w, r + 1, used);
            for c in 0..used.len() {
                if !used[c] {
                    used[c] = true;
                    best = best.max(w[r][c] + go(w, r + 1, used));
                    used[c] = false;
                }
            }
            best
        }
        let cols = w.first().map_or(0, Vec::len);
        go(w, 0, &mut vec![false; cols])
    }

    fn injective(m: &Matching) -> bool {
        let mut seen: Vec<usize> = m.iter().flatten().copied().collect();
        let len = seen.len();
        seen.sort_unstable();
        seen.dedup();
        seen.len() == len
    }

    #[test]
    fn identity_and_swapped() {
        let truth = [0i64, 0, 1, 1, 2];
        assert_eq!(accuracy(&[0, 0, 1, 1, 2], &truth).unwrap().accuracy, 1.0);
        assert_eq!(accuracy(&[2, 2, 0, 0, 1], &truth).unwrap().accuracy, 1.0);
    }

    #[test]
    fn three_quarters() {
        let r = accuracy(&[1, 1, 1, 0], &[0, 0, 1, 1]).unwrap();
        assert_eq!(r.accuracy, 0.75);
        assert_eq!(r.mapping, BTreeMap::from([(0, 1), (1, 0)]));
        assert_eq!(r.confusion, vec![vec![0, 1], vec![2, 1]]);
        let h = accuracy_with(&[1, 1, 1, 0], &[0, 0, 1, 1], MatchRoute::Assignment).unwrap();
        assert_eq!(h.accuracy, 0.75);
    }

    #[test]
    fn constant_prediction_picks_majority() {
        let r = accuracy(&[0; 6], &[0, 1, 1, 2, 2, 2]).unwrap();
        assert_eq!(r.accuracy, 0.5);
        assert_eq!(r.mapping, BTreeMap::from([(0, 2)]));
    }

    #[test]
    fn length_mismatch() {
        assert!(matches!(
            accuracy(&[0, 1], &[0]),
            Err(NsError::LengthMismatch { pred: 2, truth: 1 })
        ));
    }

    #[test]
    fn large_route_uses_assignment() {
        // 10 x 10 with a shuffled diagonal
        let pred: Vec<usize> = (0..100).map(|i| (i % 10 * 7) % 10).collect();
        let truth: Vec<i64> = (0..100).map(|i| (i % 10) as i64).collect();
        assert_eq!(accuracy(&pred, &truth).unwrap().accuracy, 1.0);
    }

    #[test]
    fn fcm_equidistant_point() {
        let data = DataSet::from_rows("e", &[vec![0.0, 0.0]], None).unwrap();
        let u = fcm_memberships(&data, &array![[1.0, 0.0], [-1.0, 0.0]], 2.0);
        assert_eq!(u, array![[0.5, 0.5]]);
    }

    fn blobs() -> DataSet {
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for (c, (cx, cy)) in [(0.0, 0.0), (5.0, 5.0)].iter().enumerate() {
            for a in 0..10 {
                let t = a as f64 * 0.6;
                rows.push(vec![cx + 0.3 * t.cos(), cy + 0.3 * t.sin()]);
                labels.push(c as i64);
            }
        }
        DataSet::from_rows("blobs", &rows, Some(labels)).unwrap()
    }

    #[test]
    fn fcm_separates_blobs_deterministically() {
        let data = blobs();
        let cfg = FcmConfig {
            seed: 3,
            ..FcmConfig::default()
        };
        let a = fcm_fit(&data, &cfg).unwrap();
        assert_eq!(a, fcm_fit(&data, &cfg).unwrap());
        let labels = crate::labeling::argmax_rows(&a.memberships);
        assert!(labels[..10].iter().all(|&l| l == labels[0]));
        assert!(labels[10..].iter().all(|&l| l == labels[10]));
        assert_ne!(labels[0], labels[10]);
        for row in a.memberships.axis_iter(Axis(0)) {
            assert!((row.sum() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn fcm_too_few_points() {
        let data = DataSet::from_rows("s", &[vec![0.0], vec![1.0]], None).unwrap();
        assert!(matches!(
            fcm_fit(&data, &FcmConfig::default()),
            Err(NsError::TooFewPoints { .. })
        ));
    }

    #[test]
    fn compare_shape_and_missing_labels() {
        let data = blobs();
        let ns = NsConfig::with_k(2);
        let rec = compare(&data, &ns, &FcmConfig::matching(&ns), 5).unwrap();
        assert_eq!(rec.proposed.per_seed.len(), 5);
        assert_eq!(rec.fcm.per_seed.len(), 5);
        assert_eq!(rec.fcm.best, 1.0);
        assert!(rec.proposed.mean <= rec.proposed.best);
        let one = compare(&data, &ns, &FcmConfig::matching(&ns), 1).unwrap();
        assert_eq!(one, compare(&data, &ns, &FcmConfig::matching(&ns), 1).unwrap());

        let unlabeled = data.with_labels(None).unwrap();
        assert!(matches!(
            compare(&unlabeled, &ns, &FcmConfig::default(), 1),
            Err(NsError::MissingLabels)
        ));
    }

    fn weights() -> impl Strategy<Value = Vec<Vec<usize>>> {
        (1usize..7, 1usize..7).prop_flat_map(|(r, c)| prop::collection::vec(prop::collection::vec(0usize..20, c), r))
    }

    proptest! {
        #[test]
        fn routes_agree_with_brute_force(w in weights()) {
            let expected = brute_force(&w);
            let (e, em) = exact_matching(&w);
            let (h, hm) = assignment_matching(&w);
            prop_assert_eq!(e, expected);
            prop_assert_eq!(h, expected);
            prop_assert_eq!(matched_total(&w, &em), e);
            prop_assert!(injective(&em) && injective(&hm));
        }

        #[test]
        fn relabelling_invariance(
            pairs in prop::collection::vec((0usize..4, 0i64..4), 1..60),
            shift in 1usize..4,
        ) {
            let pred: Vec<usize> = pairs.iter().map(|p| p.0).collect();
            let truth: Vec<i64> = pairs.iter().map(|p| p.1).collect();
            let renamed: Vec<usize> = pred.iter().map(|p| (p + shift) % 4 + 10).collect();
            let a = accuracy(&pred, &truth).unwrap();
            prop_assert_eq!(a.accuracy, accuracy(&renamed, &truth).unwrap().accuracy);
            let matched = a.mapping.iter().map(|(p, t)| {
                pred.iter().zip(&truth).filter(|(x, y)| *x == p && *y == t).count()
            }).sum::<usize>();
            prop_assert_eq!(matched as f64 / pred.len() as f64, a.accuracy);
        }
    }
}
