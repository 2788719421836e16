//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage or invalid input, 2 I/O or parse failure,
//! 3 iteration limit reached (outputs are still written).

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::certainty::{resolve_eps, CertaintyConfig, EpsPolicy};
use crate::dataset::{load_csv, normalize, write_csv, ColumnRef, DataSet, NormalizationMode, Preset};
use crate::error::NsError;
use crate::evaluation::{compare, Comparison, FcmConfig};
use crate::labeling::{classify_points, VerdictKind};
use crate::optimizer::{fit, NsConfig};
use crate::plot::{render_svg, PlotOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_IO: i32 = 2;
pub const EXIT_NOT_CONVERGED: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "nscluster",
    version,
    about = "Neutrosophic clustering with noise and boundary detection"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Cluster a CSV file or a generated scenario.
    Cluster(ClusterArgs),
    /// Compare accuracy against fuzzy c-means on a labelled CSV file.
    Eval(EvalArgs),
    /// Write a generated scenario to CSV.
    Gen(GenArgs),
    /// Render a run summary as SVG.
    Plot(PlotArgs),
}

/// Options shared by `cluster` and `eval`; each may also come from `--config`.
#[derive(Debug, Clone, Default, Args)]
pub struct AlgoArgs {
    /// Number of main clusters.
    #[arg(long)]
    pub k: Option<usize>,
    /// Neighbourhood radius for certainty.
    #[arg(long, conflicts_with = "eps_quantile")]
    pub eps: Option<f64>,
    /// Neighbourhood radius as a quantile of pairwise distances [default: 0.1].
    #[arg(long)]
    pub eps_quantile: Option<f64>,
    /// Neighbour count at which a point is dense [default: 4].
    #[arg(long)]
    pub tr: Option<usize>,
    /// Certainty of dense points [default: 0.95].
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Membership exponent [default: 2].
    #[arg(long)]
    pub fuzzifier: Option<f64>,
    /// Boundary threshold [default: 0.4].
    #[arg(long)]
    pub boundary_t: Option<f64>,
    /// Stop when the cost changes by less than this [default: 1e-6].
    #[arg(long)]
    pub stop_eps: Option<f64>,
    /// Iteration limit [default: 300].
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// Seed for the random initial memberships [default: 0].
    #[arg(long)]
    pub seed: Option<u64>,
    /// Feature scaling: none, minmax or zscore.
    #[arg(long)]
    pub normalize: Option<NormalizationMode>,
    /// Label column, by header name or 0-based index; excluded from the features.
    #[arg(long)]
    pub label_col: Option<String>,
    /// The CSV file has no header row.
    #[arg(long)]
    pub no_header: bool,
    /// Drop feature columns that are constant.
    #[arg(long)]
    pub drop_constant: bool,
    /// Collapse labels to 0 versus non-zero.
    #[arg(long)]
    pub binarize_labels: bool,
    /// TOML file with any of the above; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Directory for output files [default: .].
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ClusterArgs {
    /// Input CSV file.
    #[arg(required_unless_present = "gen")]
    pub input: Option<PathBuf>,
    /// Generated scenario instead of a file: x13, x37 or x43.
    #[arg(long, conflicts_with = "input")]
    pub gen: Option<Preset>,
    #[command(flatten)]
    pub algo: AlgoArgs,
    /// Record wall-clock time in the summary (makes it non-reproducible).
    #[arg(long)]
    pub timing: bool,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    pub input: PathBuf,
    #[command(flatten)]
    pub algo: AlgoArgs,
    /// Number of seeds per method [default: 10].
    #[arg(long)]
    pub seeds: Option<usize>,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    /// x13, x37 or x43.
    pub preset: Preset,
    /// Output path [default: <preset>.csv].
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Standard deviation of Gaussian noise added to cluster points.
    #[arg(long)]
    pub jitter: Option<f64>,
    /// Seed for the jitter.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    /// Summary JSON written by `cluster`.
    pub summary: PathBuf,
    /// Output path [default: summary path with .svg extension].
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Only draw the membership bars (any dimension).
    #[arg(long)]
    pub bars_only: bool,
}

/// Keys accepted in a `--config` TOML file.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub k: Option<usize>,
    pub eps: Option<f64>,
    pub eps_quantile: Option<f64>,
    pub tr: Option<usize>,
    pub alpha: Option<f64>,
    pub fuzzifier: Option<f64>,
    pub boundary_t: Option<f64>,
    pub stop_eps: Option<f64>,
    pub max_iter: Option<usize>,
    pub seed: Option<u64>,
    pub normalize: Option<NormalizationMode>,
    pub label_col: Option<String>,
    pub no_header: Option<bool>,
    pub drop_constant: Option<bool>,
    pub binarize_labels: Option<bool>,
    pub out_dir: Option<PathBuf>,
    pub seeds: Option<usize>,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Lib(NsError),
}

impl From<NsError> for CliError {
    fn from(e: NsError) -> Self {
        CliError::Lib(e)
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Lib(NsError::MissingFile(_) | NsError::Io { .. } | NsError::ParseError { .. }) => EXIT_IO,
            CliError::Lib(NsError::NonFinite { .. }) => EXIT_NOT_CONVERGED,
            CliError::Lib(_) => EXIT_USAGE,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => f.write_str(m),
            CliError::Lib(e) => write!(f, "{e}"),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetInfo {
    pub name: String,
    pub n: usize,
    pub dim: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointRow {
    /// 1-based point number.
    pub id: usize,
    /// Coordinates after normalization.
    pub x: Vec<f64>,
    pub t: Vec<f64>,
    pub f: f64,
    pub d: f64,
    pub verdict: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct VerdictCounts {
    pub main: usize,
    pub boundary: usize,
    pub outlier: usize,
}

/// Everything `cluster` reports about a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub dataset: DatasetInfo,
    pub config: NsConfig,
    pub normalization: NormalizationMode,
    /// Neighbourhood radius after resolving the policy.
    pub eps: f64,
    pub seed: u64,
    pub converged: bool,
    pub iterations: usize,
    pub cost_history: Vec<f64>,
    pub centroids: Vec<Vec<f64>>,
    pub frozen_centroid_updates: usize,
    pub verdict_counts: VerdictCounts,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<u64>,
    pub points: Vec<PointRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalSummary {
    pub config: NsConfig,
    pub fcm_config: FcmConfig,
    pub normalization: NormalizationMode,
    pub n_seeds: usize,
    #[serde(flatten)]
    pub comparison: Comparison,
}

/// Parse `args` (including the program name), run the command and return
/// the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let outcome = match cli.command {
        Command::Cluster(a) => cmd_cluster(&a),
        Command::Eval(a) => cmd_eval(&a),
        Command::Gen(a) => cmd_gen(&a).map(|()| EXIT_OK),
        Command::Plot(a) => cmd_plot(&a).map(|()| EXIT_OK),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn read_file_config(path: &Path) -> CliResult<FileConfig> {
    if !path.exists() {
        return Err(NsError::MissingFile(path.to_path_buf()).into());
    }
    let text = std::fs::read_to_string(path).map_err(|source| NsError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    toml::from_str(&text).map_err(|e| CliError::Usage(format!("invalid config {}: {e}", path.display())))
}

/// Flags merged over the config file.
#[derive(Debug, Clone)]
struct Settings {
    file: FileConfig,
    algo: AlgoArgs,
}

impl Settings {
    fn load(algo: &AlgoArgs) -> CliResult<Self> {
        let file = match &algo.config {
            Some(p) => read_file_config(p)?,
            None => FileConfig::default(),
        };
        Ok(Self {
            file,
            algo: algo.clone(),
        })
    }

    fn k(&self) -> Option<usize> {
        self.algo.k.or(self.file.k)
    }

    fn label_col(&self) -> Option<String> {
        self.algo.label_col.clone().or_else(|| self.file.label_col.clone())
    }

    fn normalization(&self, default: NormalizationMode) -> NormalizationMode {
        self.algo.normalize.or(self.file.normalize).unwrap_or(default)
    }

    fn out_dir(&self) -> PathBuf {
        self.algo
            .out_dir
            .clone()
            .or_else(|| self.file.out_dir.clone())
            .unwrap_or_else(|| PathBuf::from("."))
    }

    fn flag(&self, cli: bool, file: Option<bool>) -> bool {
        cli || file.unwrap_or(false)
    }

    fn eps_policy(&self, preset_eps: Option<f64>) -> EpsPolicy {
        let (a, f) = (&self.algo, &self.file);
        if let Some(e) = a.eps {
            EpsPolicy::Explicit(e)
        } else if let Some(q) = a.eps_quantile {
            EpsPolicy::Quantile(q)
        } else if let Some(e) = f.eps {
            EpsPolicy::Explicit(e)
        } else if let Some(q) = f.eps_quantile {
            EpsPolicy::Quantile(q)
        } else if let Some(e) = preset_eps {
            EpsPolicy::Explicit(e)
        } else {
            EpsPolicy::default()
        }
    }

    fn ns_config(&self, k: usize, preset_eps: Option<f64>) -> CliResult<NsConfig> {
        let (a, f) = (&self.algo, &self.file);
        let base = NsConfig::default();
        let base_c = CertaintyConfig::default();
        let cfg = NsConfig {
            k,
            fuzzifier: a.fuzzifier.or(f.fuzzifier).unwrap_or(base.fuzzifier),
            stop_eps: a.stop_eps.or(f.stop_eps).unwrap_or(base.stop_eps),
            max_iter: a.max_iter.or(f.max_iter).unwrap_or(base.max_iter),
            seed: a.seed.or(f.seed).unwrap_or(base.seed),
            boundary_t: a.boundary_t.or(f.boundary_t).unwrap_or(base.boundary_t),
            certainty: CertaintyConfig {
                eps_policy: self.eps_policy(preset_eps),
                tr: a.tr.or(f.tr).unwrap_or(base_c.tr),
                alpha: a.alpha.or(f.alpha).unwrap_or(base_c.alpha),
            },
            ..base
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Load the CSV input with the label/header/column options applied.
    fn load_dataset(&self, path: &Path) -> CliResult<DataSet> {
        let label = self.label_col().map(|s| ColumnRef::from(s.as_str()));
        let header = !self.flag(self.algo.no_header, self.file.no_header);
        let mut ds = load_csv(path, label.as_ref(), header)?;
        if self.flag(self.algo.binarize_labels, self.file.binarize_labels) {
            ds = ds.binarize_labels();
        }
        if self.flag(self.algo.drop_constant, self.file.drop_constant) {
            ds = ds.drop_constant_columns()?;
        }
        Ok(ds)
    }
}

fn write_output(path: &Path, contents: &str) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|source| NsError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
    }
    std::fs::write(path, contents).map_err(|source| {
        NsError::Io {
            path: path.to_path_buf(),
            source,
        }
        .into()
    })
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("summary types serialize");
    s.push('\n');
    s
}

/// Memberships table: `id,T_1..T_K,F,D,verdict`, six decimals. Boundary
/// verdicts contain a comma and are quoted.
pub fn memberships_csv(summary: &RunSummary) -> String {
    let k = summary.config.k;
    let mut w = csv::Writer::from_writer(Vec::new());
    let header = std::iter::once("id".to_string())
        .chain((1..=k).map(|j| format!("T_{j}")))
        .chain(["F", "D", "verdict"].map(String::from));
    w.write_record(header).expect("write to memory");
    for p in &summary.points {
        let row = std::iter::once(p.id.to_string())
            .chain(p.t.iter().chain([&p.f, &p.d]).map(|v| format!("{v:.6}")))
            .chain(std::iter::once(p.verdict.clone()));
        w.write_record(row).expect("write to memory");
    }
    String::from_utf8(w.into_inner().expect("flush to memory")).expect("ascii output")
}

/// Fit, label and summarize one dataset.
pub fn run_summary(ds: &DataSet, cfg: &NsConfig, normalization: NormalizationMode) -> crate::Result<RunSummary> {
    let data = normalize(ds, normalization);
    let eps = resolve_eps(&data, cfg.certainty.eps_policy)?;
    let state = fit(&data, cfg)?;
    let verdicts = classify_points(&state, cfg.boundary_t)?;
    let mut counts = VerdictCounts::default();
    let points = verdicts
        .iter()
        .enumerate()
        .map(|(i, v)| {
            match v.kind {
                VerdictKind::Main(_) => counts.main += 1,
                VerdictKind::Boundary(..) => counts.boundary += 1,
                VerdictKind::Outlier => counts.outlier += 1,
            }
            PointRow {
                id: i + 1,
                x: data.points().row(i).to_vec(),
                t: state.t_mem.row(i).to_vec(),
                f: state.f_mem[i],
                d: state.certainty.as_slice()[i],
                verdict: v.kind.to_string(),
            }
        })
        .collect();
    Ok(RunSummary {
        dataset: DatasetInfo {
            name: ds.name().to_string(),
            n: ds.n(),
            dim: ds.dim(),
        },
        config: *cfg,
        normalization,
        eps,
        seed: cfg.seed,
        converged: state.converged,
        iterations: state.iterations,
        centroids: state.centroids.rows().into_iter().map(|r| r.to_vec()).collect(),
        cost_history: state.cost_history,
        frozen_centroid_updates: state.frozen_centroid_updates,
        verdict_counts: counts,
        wall_time_ms: None,
        points,
    })
}

pub fn cmd_cluster(args: &ClusterArgs) -> CliResult<i32> {
    let settings = Settings::load(&args.algo)?;
    let (ds, preset) = match (&args.gen, &args.input) {
        (Some(p), _) => (p.generate()?, Some(*p)),
        (None, Some(path)) => (settings.load_dataset(path)?, None),
        (None, None) => return Err(CliError::Usage("an input file or --gen is required".into())),
    };
    let k = settings
        .k()
        .or(preset.map(Preset::k))
        .ok_or_else(|| CliError::Usage("--k is required for file input".into()))?;
    let cfg = settings.ns_config(k, preset.and_then(Preset::eps))?;
    // generated scenarios are laid out on the scale the cost expects
    let default_norm = if preset.is_some() {
        NormalizationMode::None
    } else {
        NormalizationMode::MinMaxUnit
    };
    let normalization = settings.normalization(default_norm);

    let start = Instant::now();
    let mut summary = run_summary(&ds, &cfg, normalization)?;
    if args.timing {
        summary.wall_time_ms = Some(start.elapsed().as_millis() as u64);
    }

    let dir = settings.out_dir();
    let csv_path = dir.join(format!("{}_memberships.csv", ds.name()));
    let json_path = dir.join(format!("{}_summary.json", ds.name()));
    write_output(&csv_path, &memberships_csv(&summary))?;
    write_output(&json_path, &to_json(&summary))?;

    let c = summary.verdict_counts;
    println!(
        "{}: n={} K={} {} after {} iterations; {} main, {} boundary, {} outlier",
        ds.name(),
        ds.n(),
        k,
        if summary.converged {
            "converged"
        } else {
            "stopped at iteration limit"
        },
        summary.iterations,
        c.main,
        c.boundary,
        c.outlier
    );
    println!("wrote {} and {}", csv_path.display(), json_path.display());
    Ok(if summary.converged { EXIT_OK } else { EXIT_NOT_CONVERGED })
}

pub fn cmd_eval(args: &EvalArgs) -> CliResult<i32> {
    let settings = Settings::load(&args.algo)?;
    if settings.label_col().is_none() {
        return Err(NsError::MissingLabels.into());
    }
    let ds = settings.load_dataset(&args.input)?;
    let labels = ds.labels().ok_or(NsError::MissingLabels)?;
    let k = match settings.k() {
        Some(k) => k,
        None => {
            let mut distinct = labels.to_vec();
            distinct.sort_unstable();
            distinct.dedup();
            distinct.len()
        }
    };
    let cfg = settings.ns_config(k, None)?;
    let fcm_cfg = FcmConfig::matching(&cfg);
    let normalization = settings.normalization(NormalizationMode::None);
    let n_seeds = args.seeds.or(settings.file.seeds).unwrap_or(10);
    let data = normalize(&ds, normalization);
    let comparison = compare(&data, &cfg, &fcm_cfg, n_seeds)?;

    let path = settings.out_dir().join(format!("{}_comparison.json", ds.name()));
    println!(
        "{}: proposed best {:.4} mean {:.4}; fcm best {:.4} mean {:.4} ({} seeds)",
        ds.name(),
        comparison.proposed.best,
        comparison.proposed.mean,
        comparison.fcm.best,
        comparison.fcm.mean,
        n_seeds
    );
    let summary = EvalSummary {
        config: cfg,
        fcm_config: fcm_cfg,
        normalization,
        n_seeds,
        comparison,
    };
    write_output(&path, &to_json(&summary))?;
    println!("wrote {}", path.display());
    Ok(EXIT_OK)
}

pub fn cmd_gen(args: &GenArgs) -> CliResult<()> {
    let mut spec = args.preset.spec();
    if let Some(j) = args.jitter {
        spec.jitter = j;
    }
    if let Some(s) = args.seed {
        spec.seed = s;
    }
    let ds = crate::dataset::gen_scatter(&spec)?;
    let out = args
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("{}.csv", args.preset.name())));
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|source| NsError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
    }
    write_csv(&ds, &out, "group")?;
    println!("wrote {} ({} points)", out.display(), ds.n());
    Ok(())
}

pub fn cmd_plot(args: &PlotArgs) -> CliResult<()> {
    if !args.summary.exists() {
        return Err(NsError::MissingFile(args.summary.clone()).into());
    }
    let text = std::fs::read_to_string(&args.summary).map_err(|source| NsError::Io {
        path: args.summary.clone(),
        source,
    })?;
    let summary: RunSummary = serde_json::from_str(&text).map_err(|e| NsError::ParseError {
        row: e.line(),
        col: e.column(),
        msg: e.to_string(),
    })?;
    let svg = render_svg(
        &summary,
        PlotOptions {
            bars_only: args.bars_only,
        },
    )?;
    let out = args.out.clone().unwrap_or_else(|| args.summary.with_extension("svg"));
    write_output(&out, &svg)?;
    println!("wrote {}", out.display());
    Ok(())
}
