//! Tabular datasets: CSV ingestion, per-feature normalization and the
//! synthetic scatter scenarios used to exercise boundary and outlier handling.

use std::f64::consts::PI;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use ndarray::{Array2, Axis};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{NsError, Result};

/// Group label given to generated boundary points.
pub const BOUNDARY_GROUP: i64 = -1;
/// Group label given to generated outliers.
pub const OUTLIER_GROUP: i64 = -2;

/// `n` points in `d` dimensions, optionally labelled.
#[derive(Debug, Clone, PartialEq)]
pub struct DataSet {
    points: Array2<f64>,
    labels: Option<Vec<i64>>,
    feature_names: Option<Vec<String>>,
    name: String,
}

impl DataSet {
    pub fn new(
        name: impl Into<String>,
        points: Array2<f64>,
        labels: Option<Vec<i64>>,
        feature_names: Option<Vec<String>>,
    ) -> Result<Self> {
        let (n, d) = points.dim();
        if n == 0 {
            return Err(NsError::EmptyDataset);
        }
        if d == 0 {
            return Err(NsError::InvalidDataset("no feature columns".into()));
        }
        if let Some((idx, v)) = points.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(NsError::InvalidDataset(format!(
                "non-finite value {v} at row {}, feature {}",
                idx / d,
                idx % d
            )));
        }
        if let Some(l) = &labels {
            if l.len() != n {
                return Err(NsError::InvalidDataset(format!("{} labels for {n} points", l.len())));
            }
        }
        if let Some(f) = &feature_names {
            if f.len() != d {
                return Err(NsError::InvalidDataset(format!(
                    "{} feature names for {d} features",
                    f.len()
                )));
            }
        }
        Ok(Self {
            points,
            labels,
            feature_names,
            name: name.into(),
        })
    }

    /// Build from row vectors; all rows must share a length.
    pub fn from_rows(name: impl Into<String>, rows: &[Vec<f64>], labels: Option<Vec<i64>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(NsError::EmptyDataset);
        }
        let d = rows[0].len();
        if let Some(bad) = rows.iter().position(|r| r.len() != d) {
            return Err(NsError::InvalidDataset(format!(
                "row {bad} has {} values, expected {d}",
                rows[bad].len()
            )));
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        let points = Array2::from_shape_vec((n, d), flat).map_err(|e| NsError::InvalidDataset(e.to_string()))?;
        Self::new(name, points, labels, None)
    }

    pub fn points(&self) -> &Array2<f64> {
        &self.points
    }

    pub fn labels(&self) -> Option<&[i64]> {
        self.labels.as_deref()
    }

    pub fn feature_names(&self) -> Option<&[String]> {
        self.feature_names.as_deref()
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n(&self) -> usize {
        self.points.nrows()
    }

    pub fn dim(&self) -> usize {
        self.points.ncols()
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn with_labels(self, labels: Option<Vec<i64>>) -> Result<Self> {
        Self::new(self.name, self.points, labels, self.feature_names)
    }

    /// Collapse labels to presence/absence: 0 stays 0, anything else becomes 1.
    pub fn binarize_labels(self) -> Self {
        let labels = self.labels.map(|l| l.into_iter().map(|v| i64::from(v != 0)).collect());
        Self { labels, ..self }
    }

    /// Remove features whose values are all identical. Fails if nothing is left.
    pub fn drop_constant_columns(&self) -> Result<Self> {
        let keep: Vec<usize> = (0..self.dim())
            .filter(|&j| {
                let col = self.points.column(j);
                let first = col[0];
                col.iter().any(|&v| v != first)
            })
            .collect();
        if keep.is_empty() {
            return Err(NsError::InvalidDataset("every feature is constant".into()));
        }
        let points = self.points.select(Axis(1), &keep);
        let names = self
            .feature_names
            .as_ref()
            .map(|f| keep.iter().map(|&j| f[j].clone()).collect());
        Self::new(self.name.clone(), points, self.labels.clone(), names)
    }
}

/// Column selector for the label column of a CSV file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ColumnRef {
    Name(String),
    Index(usize),
}

impl From<&str> for ColumnRef {
    /// Digits select by 0-based index, anything else by header name.
    fn from(s: &str) -> Self {
        match s.parse::<usize>() {
            Ok(i) => ColumnRef::Index(i),
            Err(_) => ColumnRef::Name(s.to_string()),
        }
    }
}

/// Read a comma-separated file of numeric features.
///
/// Label cells that are all integers are used as-is; otherwise distinct label
/// strings are numbered 0, 1, ... in order of first appearance.
pub fn load_csv(path: &Path, label_column: Option<&ColumnRef>, has_header: bool) -> Result<DataSet> {
    if !path.exists() {
        return Err(NsError::MissingFile(path.to_path_buf()));
    }
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(has_header)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;

    let header: Option<Vec<String>> = if has_header {
        let h = reader.headers().map_err(|e| csv_error(path, e))?;
        Some(h.iter().map(str::to_string).collect())
    } else {
        None
    };

    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut raw_labels: Vec<String> = Vec::new();
    let mut width: Option<usize> = None;
    let mut label_idx: Option<usize> = None;

    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| csv_error(path, e))?;
        if record.iter().all(str::is_empty) {
            continue;
        }
        let w = *width.get_or_insert(record.len());
        if record.len() != w {
            return Err(NsError::ParseError {
                row,
                col: record.len().min(w),
                msg: format!("expected {w} fields, found {}", record.len()),
            });
        }
        if label_idx.is_none() {
            if let Some(sel) = label_column {
                label_idx = Some(resolve_column(sel, header.as_deref(), w)?);
            }
        }
        let mut values = Vec::with_capacity(w);
        for (col, cell) in record.iter().enumerate() {
            if Some(col) == label_idx {
                raw_labels.push(cell.to_string());
                continue;
            }
            let v: f64 = cell.parse().map_err(|_| NsError::ParseError {
                row,
                col,
                msg: format!("not a number: {cell:?}"),
            })?;
            if !v.is_finite() {
                return Err(NsError::ParseError {
                    row,
                    col,
                    msg: format!("non-finite value: {cell:?}"),
                });
            }
            values.push(v);
        }
        rows.push(values);
    }

    if rows.is_empty() {
        return Err(NsError::EmptyDataset);
    }
    let labels = label_idx.map(|_| encode_labels(&raw_labels));
    let feature_names = header.map(|h| {
        h.into_iter()
            .enumerate()
            .filter(|(i, _)| Some(*i) != label_idx)
            .map(|(_, s)| s)
            .collect::<Vec<_>>()
    });
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".into());
    let ds = DataSet::from_rows(name, &rows, labels)?;
    DataSet::new(ds.name, ds.points, ds.labels, feature_names)
}

fn resolve_column(sel: &ColumnRef, header: Option<&[String]>, width: usize) -> Result<usize> {
    let idx = match sel {
        ColumnRef::Name(name) => header
            .and_then(|h| h.iter().position(|c| c == name))
            .ok_or_else(|| NsError::MissingColumn(name.clone()))?,
        ColumnRef::Index(i) => {
            // a header literally named "3" wins over index 3
            let by_name = header.and_then(|h| h.iter().position(|c| *c == i.to_string()));
            by_name.unwrap_or(*i)
        }
    };
    if idx >= width {
        return Err(NsError::MissingColumn(format!(
            "index {idx} (file has {width} columns)"
        )));
    }
    Ok(idx)
}

fn encode_labels(raw: &[String]) -> Vec<i64> {
    if let Ok(ints) = raw
        .iter()
        .map(|s| s.parse::<i64>())
        .collect::<std::result::Result<Vec<_>, _>>()
    {
        return ints;
    }
    let mut seen: Vec<&str> = Vec::new();
    raw.iter()
        .map(|s| match seen.iter().position(|x| *x == s.as_str()) {
            Some(i) => i as i64,
            None => {
                seen.push(s);
                (seen.len() - 1) as i64
            }
        })
        .collect()
}

fn csv_error(path: &Path, e: csv::Error) -> NsError {
    match e.into_kind() {
        csv::ErrorKind::Io(source) => NsError::Io {
            path: path.to_path_buf(),
            source,
        },
        other => NsError::ParseError {
            row: 0,
            col: 0,
            msg: format!("{other:?}"),
        },
    }
}

/// Write the dataset as CSV with a header row. Labels, if any, go in a final
/// column called `label_name`. Values use shortest round-trip formatting.
pub fn write_csv(ds: &DataSet, path: &Path, label_name: &str) -> Result<()> {
    let io_err = |source| NsError::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut out = String::new();
    let names: Vec<String> = match ds.feature_names() {
        Some(f) => f.to_vec(),
        None => (0..ds.dim()).map(|j| format!("x{j}")).collect(),
    };
    out.push_str(&names.join(","));
    if ds.labels().is_some() {
        out.push(',');
        out.push_str(label_name);
    }
    out.push('\n');
    for (i, row) in ds.points().rows().into_iter().enumerate() {
        let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        out.push_str(&cells.join(","));
        if let Some(l) = ds.labels() {
            out.push(',');
            out.push_str(&l[i].to_string());
        }
        out.push('\n');
    }
    std::fs::write(path, out).map_err(io_err)
}

/// Per-feature scaling applied before clustering.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormalizationMode {
    #[default]
    None,
    /// Each feature mapped affinely onto [0, 1].
    #[serde(rename = "minmax")]
    MinMaxUnit,
    /// Each feature to mean 0 and population standard deviation 1.
    #[serde(rename = "zscore")]
    ZScore,
}

impl FromStr for NormalizationMode {
    type Err = NsError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "none" => Ok(Self::None),
            "minmax" => Ok(Self::MinMaxUnit),
            "zscore" => Ok(Self::ZScore),
            other => Err(NsError::InvalidConfig(format!(
                "unknown normalization {other:?} (expected none, minmax or zscore)"
            ))),
        }
    }
}

impl fmt::Display for NormalizationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::None => "none",
            Self::MinMaxUnit => "minmax",
            Self::ZScore => "zscore",
        })
    }
}

/// Rescale every feature column. Constant columns map to 0 under both
/// MinMaxUnit and ZScore.
pub fn normalize(ds: &DataSet, mode: NormalizationMode) -> DataSet {
    let mut points = ds.points().clone();
    match mode {
        NormalizationMode::None => {}
        NormalizationMode::MinMaxUnit => {
            for mut col in points.columns_mut() {
                let lo = col.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let span = hi - lo;
                col.mapv_inplace(|v| {
                    if span > 0.0 {
                        ((v - lo) / span).clamp(0.0, 1.0)
                    } else {
                        0.0
                    }
                });
            }
        }
        NormalizationMode::ZScore => {
            let n = points.nrows() as f64;
            for mut col in points.columns_mut() {
                let mean = col.sum() / n;
                let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
                let std = var.sqrt();
                // a column that is constant up to rounding would blow up to noise
                let constant = std <= 1e-12 * mean.abs().max(1.0);
                col.mapv_inplace(|v| if constant { 0.0 } else { (v - mean) / std });
            }
        }
    }
    DataSet {
        points,
        labels: ds.labels.clone(),
        feature_names: ds.feature_names.clone(),
        name: ds.name.clone(),
    }
}

/// Recipe for a synthetic scatter dataset.
///
/// Each cluster's points sit on a ring of radius `ring_radius` around its
/// centre (in the first two coordinates), starting at angle `ring_phase`; with
/// `center_point` set, the first point of each cluster is the centre itself.
/// `jitter` adds Gaussian noise of that standard deviation to cluster points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatterSpec {
    pub cluster_centers: Vec<Vec<f64>>,
    pub points_per_cluster: Vec<usize>,
    pub ring_radius: f64,
    pub ring_phase: f64,
    pub center_point: bool,
    pub boundary_points: Vec<Vec<f64>>,
    pub outlier_points: Vec<Vec<f64>>,
    pub jitter: f64,
    pub seed: u64,
}

impl ScatterSpec {
    fn validate(&self) -> Result<usize> {
        if self.points_per_cluster.len() != self.cluster_centers.len() {
            return Err(NsError::InvalidSpec(format!(
                "{} centres but {} cluster sizes",
                self.cluster_centers.len(),
                self.points_per_cluster.len()
            )));
        }
        if !(self.jitter >= 0.0) || !self.jitter.is_finite() {
            return Err(NsError::InvalidSpec(format!(
                "jitter must be >= 0, got {}",
                self.jitter
            )));
        }
        if !(self.ring_radius >= 0.0) || !self.ring_radius.is_finite() {
            return Err(NsError::InvalidSpec("ring radius must be >= 0".into()));
        }
        let d = self
            .cluster_centers
            .iter()
            .chain(&self.boundary_points)
            .chain(&self.outlier_points)
            .map(Vec::len)
            .next()
            .ok_or_else(|| NsError::InvalidSpec("no points to generate".into()))?;
        let all = self
            .cluster_centers
            .iter()
            .chain(&self.boundary_points)
            .chain(&self.outlier_points);
        for p in all {
            if p.len() != d || d == 0 {
                return Err(NsError::InvalidSpec(
                    "coordinates must share one non-zero dimension".into(),
                ));
            }
        }
        Ok(d)
    }
}

/// Generate a scatter dataset: clusters in order, then boundary points, then
/// outliers. Labels record the generating group (cluster index,
/// [`BOUNDARY_GROUP`] or [`OUTLIER_GROUP`]).
pub fn gen_scatter(spec: &ScatterSpec) -> Result<DataSet> {
    let d = spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let noise = Normal::new(0.0, spec.jitter).map_err(|e| NsError::InvalidSpec(e.to_string()))?;

    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for (c, (center, &count)) in spec.cluster_centers.iter().zip(&spec.points_per_cluster).enumerate() {
        let on_ring = if spec.center_point {
            count.saturating_sub(1)
        } else {
            count
        };
        for p in 0..count {
            let mut point = center.clone();
            let ring_slot = if spec.center_point { p.checked_sub(1) } else { Some(p) };
            if let Some(slot) = ring_slot {
                let angle = spec.ring_phase + 2.0 * PI * slot as f64 / on_ring as f64;
                point[0] += spec.ring_radius * angle.cos();
                if d > 1 {
                    point[1] += spec.ring_radius * angle.sin();
                }
            }
            if spec.jitter > 0.0 {
                for v in point.iter_mut() {
                    *v += noise.sample(&mut rng);
                }
            }
            rows.push(point);
            labels.push(c as i64);
        }
    }
    for p in &spec.boundary_points {
        rows.push(p.clone());
        labels.push(BOUNDARY_GROUP);
    }
    for p in &spec.outlier_points {
        rows.push(p.clone());
        labels.push(OUTLIER_GROUP);
    }
    DataSet::from_rows("scatter", &rows, Some(labels))
}

/// Built-in reconstructions of the three scatter scenarios.
///
/// Coordinates are chosen on the scale where the noise coefficient
/// `K - sum_j |x - c_j|^2` is positive near the clusters and floored for the
/// remote outliers, so the presets are clustered without normalization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    /// Two 4-point clusters, one midpoint boundary point, four outliers (13 points).
    X13,
    /// Three collinear 9-point clusters, three boundary points between each
    /// adjacent pair, four outliers (37 points).
    X37,
    /// Three 12-point clusters on a triangle; boundary points on two edges and
    /// one at the centre, equidistant from all three; four outliers (43 points).
    X43,
}

impl Preset {
    pub const ALL: [Preset; 3] = [Preset::X13, Preset::X37, Preset::X43];

    pub fn name(self) -> &'static str {
        match self {
            Preset::X13 => "x13",
            Preset::X37 => "x37",
            Preset::X43 => "x43",
        }
    }

    /// Number of main clusters the scenario is built around.
    pub fn k(self) -> usize {
        match self {
            Preset::X13 => 2,
            Preset::X37 | Preset::X43 => 3,
        }
    }

    /// Neighbourhood radius suited to the geometry, or `None` to use the
    /// default distance-quantile policy.
    pub fn eps(self) -> Option<f64> {
        match self {
            Preset::X13 => None,
            // reaches the facing ring points from every boundary point
            Preset::X37 => Some(0.11),
            Preset::X43 => Some(0.16),
        }
    }

    pub fn spec(self) -> ScatterSpec {
        match self {
            Preset::X13 => ScatterSpec {
                cluster_centers: vec![vec![-0.15, 0.0], vec![0.15, 0.0]],
                points_per_cluster: vec![4, 4],
                ring_radius: 0.05,
                ring_phase: PI / 4.0,
                center_point: false,
                boundary_points: vec![vec![0.0, 0.0]],
                outlier_points: vec![vec![0.0, 1.2], vec![0.0, -1.2], vec![-1.0, 0.8], vec![1.0, -0.8]],
                jitter: 0.0,
                seed: 0,
            },
            Preset::X37 => ScatterSpec {
                cluster_centers: vec![vec![-0.3, 0.0], vec![0.0, 0.0], vec![0.3, 0.0]],
                points_per_cluster: vec![9, 9, 9],
                ring_radius: 0.05,
                ring_phase: 0.0,
                center_point: true,
                boundary_points: vec![
                    vec![-0.15, -0.04],
                    vec![-0.15, 0.0],
                    vec![-0.15, 0.04],
                    vec![0.15, -0.04],
                    vec![0.15, 0.0],
                    vec![0.15, 0.04],
                ],
                outlier_points: vec![vec![0.0, 1.3], vec![0.0, -1.3], vec![-1.2, 0.9], vec![1.2, -0.9]],
                jitter: 0.0,
                seed: 0,
            },
            Preset::X43 => {
                let r = 0.2;
                let vertex = |deg: f64| {
                    let a = deg.to_radians();
                    vec![r * a.cos(), r * a.sin()]
                };
                let centers = vec![vertex(90.0), vertex(210.0), vertex(330.0)];
                let mid = |a: &[f64], b: &[f64]| vec![(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0];
                let boundary = vec![
                    mid(&centers[0], &centers[1]),
                    vec![0.0, 0.0],
                    mid(&centers[0], &centers[2]),
                ];
                ScatterSpec {
                    cluster_centers: centers,
                    points_per_cluster: vec![12, 12, 12],
                    ring_radius: 0.05,
                    ring_phase: 0.0,
                    center_point: true,
                    boundary_points: boundary,
                    outlier_points: vec![vec![0.0, 1.4], vec![0.0, -1.4], vec![-1.3, 0.9], vec![1.3, -0.9]],
                    jitter: 0.0,
                    seed: 0,
                }
            }
        }
    }

    pub fn generate(self) -> Result<DataSet> {
        Ok(gen_scatter(&self.spec())?.with_name(self.name()))
    }
}

impl FromStr for Preset {
    type Err = NsError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "x13" => Ok(Preset::X13),
            "x37" => Ok(Preset::X37),
            "x43" => Ok(Preset::X43),
            other => Err(NsError::InvalidConfig(format!(
                "unknown dataset preset {other:?} (expected x13, x37 or x43)"
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn temp_csv(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::Builder::new().suffix(".csv").tempfile().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    const SMALL: &str = "a,b,class\n1,2,0\n3,4,1\n5,6,0\n7,8,1\n";

    #[test]
    fn load_with_label_column() {
        let f = temp_csv(SMALL);
        let ds = load_csv(f.path(), Some(&ColumnRef::from("class")), true).unwrap();
        assert_eq!((ds.n(), ds.dim()), (4, 2));
        assert_eq!(ds.labels(), Some(&[0, 1, 0, 1][..]));
        assert_eq!(ds.feature_names().unwrap(), &["a".to_string(), "b".to_string()]);
    }

    #[test]
    fn load_without_label_column() {
        let f = temp_csv(SMALL);
        let ds = load_csv(f.path(), None, true).unwrap();
        assert_eq!((ds.n(), ds.dim()), (4, 3));
        assert!(ds.labels().is_none());
    }

    #[test]
    fn label_by_index_and_headerless() {
        let f = temp_csv("1,2,9\n3,4,8\n");
        let ds = load_csv(f.path(), Some(&ColumnRef::Index(2)), false).unwrap();
        assert_eq!(ds.labels(), Some(&[9, 8][..]));
        assert_eq!(ds.points()[[1, 1]], 4.0);
    }

    #[test]
    fn string_labels_are_numbered_by_appearance() {
        let f = temp_csv("x,y\n1,g\n2,b\n3,g\n");
        let ds = load_csv(f.path(), Some(&ColumnRef::from("y")), true).unwrap();
        assert_eq!(ds.labels(), Some(&[0, 1, 0][..]));
    }

    #[test]
    fn non_numeric_cell_reports_position() {
        let f = temp_csv("a,b,c\n1,2,3\n4,5,6\n7,abc,9\n");
        match load_csv(f.path(), None, true) {
            Err(NsError::ParseError { row, col, .. }) => assert_eq!((row, col), (2, 1)),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn missing_file_and_empty_file() {
        let err = load_csv(Path::new("/definitely/not/here.csv"), None, true).unwrap_err();
        assert!(matches!(err, NsError::MissingFile(_)));
        let f = temp_csv("a,b\n");
        assert!(matches!(load_csv(f.path(), None, true), Err(NsError::EmptyDataset)));
    }

    #[test]
    fn unknown_label_column() {
        let f = temp_csv(SMALL);
        let err = load_csv(f.path(), Some(&ColumnRef::from("nope")), true).unwrap_err();
        assert!(matches!(err, NsError::MissingColumn(_)));
    }

    #[test]
    fn minmax_endpoints() {
        let ds = DataSet::from_rows("t", &[vec![0.0], vec![5.0], vec![10.0]], None).unwrap();
        let out = normalize(&ds, NormalizationMode::MinMaxUnit);
        assert_eq!(out.points().column(0).to_vec(), vec![0.0, 0.5, 1.0]);
    }

    #[test]
    fn zscore_constant_and_pair() {
        let ds = DataSet::from_rows("t", &[vec![2.0, 1.0], vec![2.0, 3.0]], Some(vec![4, 5])).unwrap();
        let out = normalize(&ds, NormalizationMode::ZScore);
        assert_eq!(out.points().column(0).to_vec(), vec![0.0, 0.0]);
        // mean 2, population std 1
        assert_eq!(out.points().column(1).to_vec(), vec![-1.0, 1.0]);
        assert_eq!(out.labels(), Some(&[4, 5][..]));

        let three = DataSet::from_rows("t", &[vec![2.0], vec![2.0], vec![2.0]], None).unwrap();
        let out = normalize(&three, NormalizationMode::ZScore);
        assert!(out.points().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn rejects_non_finite() {
        let err = DataSet::from_rows("t", &[vec![f64::NAN]], None).unwrap_err();
        assert!(matches!(err, NsError::InvalidDataset(_)));
    }

    #[test]
    fn drop_constant() {
        let ds = DataSet::from_rows("t", &[vec![0.0, 1.0, 2.0], vec![0.0, 3.0, 2.0]], None).unwrap();
        let out = ds.drop_constant_columns().unwrap();
        assert_eq!(out.dim(), 1);
        assert_eq!(out.points().column(0).to_vec(), vec![1.0, 3.0]);
    }

    #[test]
    fn binarize() {
        let ds = DataSet::from_rows("t", &[vec![0.0], vec![1.0], vec![2.0]], Some(vec![0, 3, 1])).unwrap();
        assert_eq!(ds.binarize_labels().labels(), Some(&[0, 1, 1][..]));
    }

    #[test]
    fn x13_like_structure() {
        let spec = ScatterSpec {
            cluster_centers: vec![vec![0.0, 0.0], vec![10.0, 0.0]],
            points_per_cluster: vec![4, 4],
            ring_radius: 1.0,
            ring_phase: 0.0,
            center_point: false,
            boundary_points: vec![vec![5.0, 0.0]],
            outlier_points: vec![vec![5.0, 20.0], vec![5.0, -20.0], vec![-15.0, 0.0], vec![25.0, 0.0]],
            jitter: 0.0,
            seed: 1,
        };
        let ds = gen_scatter(&spec).unwrap();
        assert_eq!(ds.n(), 13);
        let labels = ds.labels().unwrap();
        assert_eq!(&labels[..8], &[0, 0, 0, 0, 1, 1, 1, 1]);
        assert_eq!(labels[8], BOUNDARY_GROUP);
        assert!(labels[9..].iter().all(|&l| l == OUTLIER_GROUP));
        // jitter 0: exact ring offsets
        assert_eq!(ds.points().row(0).to_vec(), vec![1.0, 0.0]);
        assert_eq!(ds.points().row(8).to_vec(), vec![5.0, 0.0]);
    }

    #[test]
    fn x37_like_counts() {
        let mut spec = Preset::X37.spec();
        spec.jitter = 0.01;
        let ds = gen_scatter(&spec).unwrap();
        assert_eq!(ds.n(), 37);
        let labels = ds.labels().unwrap();
        assert_eq!(labels.iter().filter(|&&l| l == BOUNDARY_GROUP).count(), 6);
        assert_eq!(labels.iter().filter(|&&l| l == OUTLIER_GROUP).count(), 4);
    }

    #[test]
    fn gen_is_deterministic() {
        let mut spec = Preset::X13.spec();
        spec.jitter = 0.02;
        spec.seed = 11;
        assert_eq!(gen_scatter(&spec).unwrap(), gen_scatter(&spec).unwrap());
        let mut other = spec.clone();
        other.seed = 12;
        assert_ne!(gen_scatter(&spec).unwrap(), gen_scatter(&other).unwrap());
    }

    #[test]
    fn invalid_specs() {
        let mut spec = Preset::X13.spec();
        spec.points_per_cluster.pop();
        assert!(matches!(gen_scatter(&spec), Err(NsError::InvalidSpec(_))));
        let mut spec = Preset::X13.spec();
        spec.jitter = -1.0;
        assert!(matches!(gen_scatter(&spec), Err(NsError::InvalidSpec(_))));
    }

    #[test]
    fn presets_have_expected_sizes() {
        let sizes: Vec<usize> = Preset::ALL.iter().map(|p| p.generate().unwrap().n()).collect();
        assert_eq!(sizes, vec![13, 37, 43]);
        assert_eq!("X37".parse::<Preset>().unwrap(), Preset::X37);
    }
}
