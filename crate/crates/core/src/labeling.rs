//! Per-point verdicts from converged memberships.

use std::fmt;

use ndarray::{Array1, Array2, ArrayView1, Axis};
use serde::{Serialize, Serializer};

use crate::error::{NsError, Result};
use crate::optimizer::NsState;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerdictKind {
    Main(usize),
    /// The two clusters with the largest memberships, larger first.
    Boundary(usize, usize),
    Outlier,
}

impl fmt::Display for VerdictKind {
    /// `C<j>` (1-based), `boundary(j,k)` (1-based) or `outlier`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VerdictKind::Main(j) => write!(f, "C{}", j + 1),
            VerdictKind::Boundary(j, k) => write!(f, "boundary({},{})", j + 1, k + 1),
            VerdictKind::Outlier => f.write_str("outlier"),
        }
    }
}

impl std::str::FromStr for VerdictKind {
    type Err = NsError;

    /// Inverse of `Display`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || NsError::InvalidConfig(format!("unrecognised verdict {s:?}"));
        let index = |v: &str| v.trim().parse::<usize>().ok().filter(|&j| j >= 1).map(|j| j - 1);
        if s == "outlier" {
            Ok(VerdictKind::Outlier)
        } else if let Some(j) = s.strip_prefix('C') {
            index(j).map(VerdictKind::Main).ok_or_else(bad)
        } else if let Some(inner) = s.strip_prefix("boundary(").and_then(|r| r.strip_suffix(')')) {
            let (a, b) = inner.split_once(',').ok_or_else(bad)?;
            Ok(VerdictKind::Boundary(
                index(a).ok_or_else(bad)?,
                index(b).ok_or_else(bad)?,
            ))
        } else {
            Err(bad())
        }
    }
}

impl Serialize for VerdictKind {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointVerdict {
    pub kind: VerdictKind,
    /// Main: `[T_j]`; Boundary: `[T_j, T_k]`; Outlier: `[F, max_j T_j]`.
    pub top_memberships: Vec<f64>,
}

/// Index of the largest value, lowest index on ties.
fn argmax(row: ArrayView1<f64>) -> usize {
    let mut best = 0;
    for (j, &v) in row.iter().enumerate() {
        if v > row[best] {
            best = j;
        }
    }
    best
}

/// Indices of the two largest values (lowest index first on ties).
fn top_two(row: ArrayView1<f64>) -> Option<(usize, usize)> {
    if row.len() < 2 {
        return None;
    }
    let first = argmax(row);
    let mut second = usize::from(first == 0);
    for (j, &v) in row.iter().enumerate() {
        if j != first && v > row[second] {
            second = j;
        }
    }
    Some((first, second))
}

pub fn classify_row(t: ArrayView1<f64>, f: f64, boundary_t: f64) -> PointVerdict {
    let j = argmax(t);
    if f > t[j] {
        return PointVerdict {
            kind: VerdictKind::Outlier,
            top_memberships: vec![f, t[j]],
        };
    }
    let inside = |v: f64| v > boundary_t && v < 1.0 - boundary_t;
    if let Some((a, b)) = top_two(t) {
        if inside(t[a]) && inside(t[b]) {
            return PointVerdict {
                kind: VerdictKind::Boundary(a, b),
                top_memberships: vec![t[a], t[b]],
            };
        }
    }
    PointVerdict {
        kind: VerdictKind::Main(j),
        top_memberships: vec![t[j]],
    }
}

/// Outlier when the noise membership beats every main membership, else
/// Boundary when the two largest main memberships both lie in
/// `(boundary_t, 1 - boundary_t)`, else Main of the argmax.
pub fn classify(t_mem: &Array2<f64>, f_mem: &Array1<f64>, boundary_t: f64) -> Result<Vec<PointVerdict>> {
    if t_mem.nrows() != f_mem.len() {
        return Err(NsError::ShapeMismatch(format!(
            "{} membership rows, {} noise memberships",
            t_mem.nrows(),
            f_mem.len()
        )));
    }
    if !(boundary_t > 0.0 && boundary_t < 0.5) {
        return Err(NsError::InvalidConfig(format!(
            "boundary_t must be in (0, 0.5), got {boundary_t}"
        )));
    }
    Ok(t_mem
        .axis_iter(Axis(0))
        .zip(f_mem.iter())
        .map(|(row, &f)| classify_row(row, f, boundary_t))
        .collect())
}

pub fn classify_points(state: &NsState, boundary_t: f64) -> Result<Vec<PointVerdict>> {
    classify(&state.t_mem, &state.f_mem, boundary_t)
}

/// Argmax over main memberships, ignoring the noise cluster.
pub fn hard_labels(state: &NsState) -> Vec<usize> {
    argmax_rows(&state.t_mem)
}

pub fn argmax_rows(t_mem: &Array2<f64>) -> Vec<usize> {
    t_mem.axis_iter(Axis(0)).map(argmax).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array2};
    use proptest::prelude::*;

    fn one(t: &[f64], f: f64, bt: f64) -> VerdictKind {
        classify_row(ArrayView1::from(t), f, bt).kind
    }

    #[test]
    fn table_rows() {
        assert_eq!(one(&[0.9762, 0.0231], 0.0007, 0.4), VerdictKind::Main(0));
        assert_eq!(one(&[0.4987, 0.4987], 0.0026, 0.4), VerdictKind::Boundary(0, 1));
        assert_eq!(one(&[0.0026, 0.0059], 0.9916, 0.4), VerdictKind::Outlier);
        assert_eq!(one(&[0.0189, 0.9808], 0.0004, 0.4), VerdictKind::Main(1));
    }

    #[test]
    fn verdict_text() {
        assert_eq!(VerdictKind::Main(0).to_string(), "C1");
        assert_eq!(VerdictKind::Boundary(2, 0).to_string(), "boundary(3,1)");
        assert_eq!(VerdictKind::Outlier.to_string(), "outlier");
        for v in [VerdictKind::Main(4), VerdictKind::Boundary(0, 2), VerdictKind::Outlier] {
            assert_eq!(v.to_string().parse::<VerdictKind>().unwrap(), v);
        }
        assert!("C0".parse::<VerdictKind>().is_err());
        assert!("boundary(1)".parse::<VerdictKind>().is_err());
    }

    #[test]
    fn boundary_uses_top_two_of_three() {
        let v = classify_row(ArrayView1::from(&[0.05, 0.48, 0.45]), 0.02, 0.4);
        assert_eq!(v.kind, VerdictKind::Boundary(1, 2));
        assert_eq!(v.top_memberships, vec![0.48, 0.45]);
    }

    #[test]
    fn hard_label_ties_and_argmax() {
        let t = array![[0.7, 0.3], [0.5, 0.5], [0.0189, 0.9808]];
        assert_eq!(argmax_rows(&t), vec![0, 0, 1]);
    }

    #[test]
    fn single_cluster_never_boundary() {
        assert_eq!(one(&[0.45], 0.55, 0.4), VerdictKind::Outlier);
        assert_eq!(one(&[0.55], 0.45, 0.4), VerdictKind::Main(0));
    }

    #[test]
    fn threshold_limits() {
        // near-tie is boundary at t = 0.49 only if both sit in (0.49, 0.51)
        assert_eq!(one(&[0.495, 0.5], 0.005, 0.49), VerdictKind::Boundary(1, 0));
        // tiny t: anything short of 1 - t qualifies, dominant rows do not
        assert_eq!(one(&[0.6, 0.39], 0.01, 1e-3), VerdictKind::Boundary(0, 1));
        assert_eq!(one(&[0.9995, 0.0004], 0.0001, 1e-3), VerdictKind::Main(0));
    }

    #[test]
    fn shape_and_threshold_errors() {
        let t = Array2::<f64>::zeros((2, 2));
        assert!(matches!(
            classify(&t, &array![0.0], 0.4),
            Err(NsError::ShapeMismatch(_))
        ));
        assert!(classify(&t, &array![0.0, 0.0], 0.5).is_err());
    }

    proptest! {
        #[test]
        fn verdict_precedence(raw in prop::collection::vec(0.001f64..1.0, 2..6), bt in 0.01f64..0.49) {
            let s: f64 = raw.iter().sum();
            let k = raw.len() - 1;
            let t: Vec<f64> = raw[..k].iter().map(|v| v / s).collect();
            let f = raw[k] / s;
            let v = classify_row(ArrayView1::from(&t), f, bt);
            let max_t = t.iter().copied().fold(f64::MIN, f64::max);
            match v.kind {
                VerdictKind::Outlier => prop_assert!(f > max_t),
                VerdictKind::Boundary(a, b) => {
                    prop_assert!(a != b && f <= max_t);
                    prop_assert!(t[a] == max_t);
                    prop_assert!(t[a] > bt && t[b] > bt && t[a] < 1.0 - bt && t[b] < 1.0 - bt);
                }
                VerdictKind::Main(j) => {
                    prop_assert!(f <= max_t && t[j] == max_t);
                    prop_assert!(t[..j].iter().all(|&x| x < max_t));
                }
            }
        }

        #[test]
        fn argmax_scale_invariant(raw in prop::collection::vec(0.0f64..1.0, 1..6), c in 0.01f64..100.0) {
            let t = Array2::from_shape_vec((1, raw.len()), raw.clone()).unwrap();
            let scaled = &t * c;
            prop_assert_eq!(argmax_rows(&t), argmax_rows(&scaled));
        }
    }
}
