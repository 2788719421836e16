//! Certainty-aware neutrosophic clustering.
//!
//! Each point gets a membership in `K` main clusters plus a noise cluster.
//! A density-derived certainty weights the two parts of the cost, so points in
//! sparse regions drift to the noise cluster and points between clusters keep
//! split memberships.

// `!(x > 0.0)` rejects NaN along with non-positive values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod certainty;
pub mod cli;
pub mod dataset;
pub mod error;
pub mod evaluation;
pub mod labeling;
pub mod optimizer;
pub mod plot;

pub use certainty::{certainty, CertaintyConfig, CertaintyVector, EpsPolicy};
pub use dataset::{load_csv, normalize, ColumnRef, DataSet, NormalizationMode, Preset, ScatterSpec};
pub use error::{NsError, Result};
pub use evaluation::{accuracy, compare, fcm_fit, EvalReport, FcmConfig};
pub use labeling::{classify_points, hard_labels, PointVerdict, VerdictKind};
pub use optimizer::{fit, fit_with_observer, NsConfig, NsState};
