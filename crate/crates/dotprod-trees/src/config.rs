//! Experiment configuration: a single JSON document describing the
//! measure, the tree, the gap specification, ladders, thresholds, and
//! caps. Validation errors carry the config field path that caused
//! them.

use crate::kernel::{EdgeTargets, Kernel, KernelKind};
use crate::measure::{
    cantor_1d, product_measure, read_measure, shift_to_box, uniform_cube_sample, DiscreteMeasure,
    MeasureMeta,
};
use crate::tree::{read_tree_file, PivotPolicy, Tree};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config field '{path}': {message}")]
    Invalid { path: String, message: String },
    #[error("io error reading {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("config is not valid json: {0}")]
    Json(#[from] serde_json::Error),
}

impl ConfigError {
    pub fn invalid(path: &str, message: impl Into<String>) -> Self {
        ConfigError::Invalid {
            path: path.to_string(),
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Gen,
    Cover,
    Count,
    #[serde(alias = "scaling")]
    Scale,
    Lower,
    DimEmbed,
    Lambda,
    Fourier,
    Regularity,
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::Gen => "gen",
            ExperimentKind::Cover => "cover",
            ExperimentKind::Count => "count",
            ExperimentKind::Scale => "scale",
            ExperimentKind::Lower => "lower",
            ExperimentKind::DimEmbed => "dim-embed",
            ExperimentKind::Lambda => "lambda",
            ExperimentKind::Fourier => "fourier",
            ExperimentKind::Regularity => "regularity",
        }
    }
}

fn default_c() -> Option<f64> {
    None
}

/// Measure source. For the Cantor families, `c` is the box offset:
/// omitted means the default 0.3, and an explicit `0.0` skips the box
/// shift entirely (support stays in `[0,1]^d`).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MeasureSpec {
    Cantor1d {
        ratio: f64,
        branches: u32,
        level: u32,
        #[serde(default = "default_c", skip_serializing_if = "Option::is_none")]
        c: Option<f64>,
    },
    /// Product of two identical 1-d Cantor constructions (d = 2).
    CantorProduct {
        ratio: f64,
        branches: u32,
        level: u32,
        #[serde(default = "default_c", skip_serializing_if = "Option::is_none")]
        c: Option<f64>,
    },
    UniformCube {
        n: usize,
        d: usize,
        #[serde(default = "default_c", skip_serializing_if = "Option::is_none")]
        c: Option<f64>,
        seed: u64,
    },
    File { path: PathBuf },
    Atoms {
        points: Vec<Vec<f64>>,
        weights: Vec<f64>,
    },
}

pub const DEFAULT_BOX_OFFSET: f64 = 0.3;

impl MeasureSpec {
    /// Builds the cloud, applying the box shift where the family calls
    /// for one.
    pub fn build(&self) -> Result<DiscreteMeasure, ConfigError> {
        let shift = |m: DiscreteMeasure, c: Option<f64>| -> Result<DiscreteMeasure, ConfigError> {
            let c = c.unwrap_or(DEFAULT_BOX_OFFSET);
            if c == 0.0 {
                Ok(m)
            } else {
                shift_to_box(&m, c)
                    .map_err(|e| ConfigError::invalid("measure.c", e.to_string()))
            }
        };
        match self {
            MeasureSpec::Cantor1d {
                ratio,
                branches,
                level,
                c,
            } => {
                let m = cantor_1d(*ratio, *branches, *level)
                    .map_err(|e| ConfigError::invalid("measure", e.to_string()))?;
                shift(m, *c)
            }
            MeasureSpec::CantorProduct {
                ratio,
                branches,
                level,
                c,
            } => {
                let f = cantor_1d(*ratio, *branches, *level)
                    .map_err(|e| ConfigError::invalid("measure", e.to_string()))?;
                let m = product_measure(&f, &f)
                    .map_err(|e| ConfigError::invalid("measure", e.to_string()))?;
                shift(m, *c)
            }
            MeasureSpec::UniformCube { n, d, c, seed } => {
                uniform_cube_sample(*n, *d, c.unwrap_or(DEFAULT_BOX_OFFSET), *seed)
                    .map_err(|e| ConfigError::invalid("measure", e.to_string()))
            }
            MeasureSpec::File { path } => {
                read_measure(path).map_err(|e| ConfigError::invalid("measure.path", e.to_string()))
            }
            MeasureSpec::Atoms { points, weights } => {
                let d = points.first().map(|p| p.len()).unwrap_or(0);
                let coords: Vec<f64> = points.iter().flatten().copied().collect();
                DiscreteMeasure::new(
                    d,
                    coords,
                    weights.clone(),
                    MeasureMeta {
                        family: "atoms".into(),
                        ..Default::default()
                    },
                )
                .map_err(|e| ConfigError::invalid("measure", e.to_string()))
            }
        }
    }

    /// Builds the same family at a different construction level
    /// (dimension-ladder experiments).
    pub fn build_at_level(&self, level: u32) -> Result<DiscreteMeasure, ConfigError> {
        match self {
            MeasureSpec::Cantor1d {
                ratio, branches, c, ..
            } => MeasureSpec::Cantor1d {
                ratio: *ratio,
                branches: *branches,
                level,
                c: *c,
            }
            .build(),
            MeasureSpec::CantorProduct {
                ratio, branches, c, ..
            } => MeasureSpec::CantorProduct {
                ratio: *ratio,
                branches: *branches,
                level,
                c: *c,
            }
            .build(),
            _ => Err(ConfigError::invalid(
                "measure.family",
                "level ladders need a cantor1d or cantor-product family",
            )),
        }
    }
}

/// Tree source: a file in the plain-text format, or a named family
/// like `path-3` / `star-4` (the number is the edge count).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TreeSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<String>,
}

impl TreeSpec {
    pub fn build(&self) -> Result<Tree, ConfigError> {
        match (&self.path, &self.family) {
            (Some(path), None) => read_tree_file(path)
                .map_err(|e| ConfigError::invalid("tree.path", e.to_string())),
            (None, Some(name)) => parse_tree_family(name)
                .ok_or_else(|| {
                    ConfigError::invalid(
                        "tree.family",
                        format!("expected 'path-K' or 'star-K', got '{name}'"),
                    )
                }),
            _ => Err(ConfigError::invalid(
                "tree",
                "exactly one of 'path' or 'family' must be set",
            )),
        }
    }
}

fn parse_tree_family(name: &str) -> Option<Tree> {
    let (kind, k) = name.rsplit_once('-')?;
    let k: usize = k.parse().ok()?;
    if k == 0 {
        return None;
    }
    match kind {
        "path" => Some(Tree::path(k)),
        "star" => Some(Tree::star(k)),
        _ => None,
    }
}

fn default_q_lo() -> f64 {
    0.35
}

fn default_q_hi() -> f64 {
    0.65
}

fn default_sample_pairs() -> usize {
    20_000
}

/// Dot-product target specification.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TargetSpec {
    Scalar { value: f64 },
    /// Keys are edges as `"i-j"` with `i < j`.
    PerEdge { values: BTreeMap<String, f64> },
    /// Empirical quantile interval of sampled pair dot products; single-
    /// target experiments use its midpoint.
    SelectInterval {
        #[serde(default = "default_q_lo")]
        q_lo: f64,
        #[serde(default = "default_q_hi")]
        q_hi: f64,
        #[serde(default = "default_sample_pairs")]
        sample_pairs: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
}

impl TargetSpec {
    pub fn to_edge_targets(&self) -> Result<Option<EdgeTargets>, ConfigError> {
        match self {
            TargetSpec::Scalar { value } => Ok(Some(EdgeTargets::Scalar(*value))),
            TargetSpec::PerEdge { values } => {
                let mut map = BTreeMap::new();
                for (key, &t) in values {
                    let parsed = key.split_once('-').and_then(|(a, b)| {
                        let a: usize = a.parse().ok()?;
                        let b: usize = b.parse().ok()?;
                        if a < b {
                            Some((a, b))
                        } else {
                            None
                        }
                    });
                    let (a, b) = parsed.ok_or_else(|| {
                        ConfigError::invalid(
                            "t.values",
                            format!("edge key must be 'i-j' with i < j, got '{key}'"),
                        )
                    })?;
                    map.insert((a, b), t);
                }
                Ok(Some(EdgeTargets::PerEdge(map)))
            }
            TargetSpec::SelectInterval { .. } => Ok(None),
        }
    }
}

/// Ladder specification: explicit values, or a dyadic range
/// `{ "pow2_from": -3, "pow2_to": -7 }` meaning `2^-3 .. 2^-7`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LadderSpec {
    Explicit(Vec<f64>),
    Pow2 { pow2_from: i32, pow2_to: i32 },
}

impl LadderSpec {
    pub fn values(&self, path: &str) -> Result<Vec<f64>, ConfigError> {
        match self {
            LadderSpec::Explicit(v) => {
                if v.is_empty() {
                    Err(ConfigError::invalid(path, "ladder is empty"))
                } else {
                    Ok(v.clone())
                }
            }
            LadderSpec::Pow2 {
                pow2_from,
                pow2_to,
            } => {
                if pow2_from < pow2_to {
                    return Err(ConfigError::invalid(
                        path,
                        "pow2_from must be >= pow2_to (ladders descend)",
                    ));
                }
                Ok((*pow2_to..=*pow2_from)
                    .rev()
                    .map(|j| 2f64.powi(j))
                    .collect())
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelConfig {
    pub kind: String,
    #[serde(default)]
    pub normalized: bool,
}

impl KernelConfig {
    pub fn to_kernel(&self) -> Result<Kernel, ConfigError> {
        let kind: KernelKind = self
            .kind
            .parse()
            .map_err(|e: crate::kernel::GapError| ConfigError::invalid("kernel.kind", e.to_string()))?;
        Ok(Kernel {
            kind,
            normalized: self.normalized,
        })
    }
}

fn default_drift() -> f64 {
    4.0
}

fn default_slack() -> f64 {
    2.0
}

fn default_true() -> bool {
    true
}

/// Pass thresholds with the stated defaults; the underlying statements
/// are asymptotic with unspecified constants, so these are honest knobs,
/// not tuned values.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Thresholds {
    /// Maximum tolerated monotone ratio drift across a ladder.
    #[serde(default = "default_drift")]
    pub drift_factor: f64,
    /// Window multiple for embedding-dimension ladders.
    #[serde(default = "default_slack")]
    pub slack: f64,
    /// Refuse window widths below 2x the sampled dot-product gap scale.
    #[serde(default = "default_true")]
    pub enforce_resolution_floor: bool,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            drift_factor: default_drift(),
            slack: default_slack(),
            enforce_resolution_floor: true,
        }
    }
}

fn default_tuple_cap() -> u64 {
    1_000_000_000
}

fn default_enum_cap() -> usize {
    1_000_000
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Caps {
    /// Cap on the ordered tuple space of the brute-force count.
    #[serde(default = "default_tuple_cap")]
    pub tuple_space: u64,
    /// Cap on materialized embedding enumerations.
    #[serde(default = "default_enum_cap")]
    pub enumeration: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            tuple_space: default_tuple_cap(),
            enumeration: default_enum_cap(),
        }
    }
}

/// Name of the environment variable that overrides the tuple-space cap.
pub const CAP_ENV_VAR: &str = "DOTPROD_TREES_CAP";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodConfig {
    Oracle,
    TreeDp,
}

/// One experiment, one invocation. Unknown fields are rejected so typos
/// surface as errors.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measure: Option<MeasureSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tree: Option<TreeSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pivot_policy: Option<PivotPolicy>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<TargetSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_ladder: Option<LadderSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel: Option<KernelConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<MethodConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pruning: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples_t: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub levels: Option<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bin_sizes: Option<LadderSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_tuples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exponent_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radii: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_centers: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub j_range: Option<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_density: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exclude_repeats: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub thresholds: Option<Thresholds>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub caps: Option<Caps>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let config: ExperimentConfig = serde_json::from_str(&text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let config: ExperimentConfig = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn thresholds(&self) -> Thresholds {
        self.thresholds.clone().unwrap_or_default()
    }

    /// Tuple-space cap: explicit config beats the `DOTPROD_TREES_CAP`
    /// environment variable, which beats the built-in default.
    pub fn tuple_cap(&self) -> u64 {
        if let Some(caps) = &self.caps {
            return caps.tuple_space;
        }
        if let Ok(text) = std::env::var(CAP_ENV_VAR) {
            if let Ok(v) = text.trim().parse() {
                return v;
            }
        }
        default_tuple_cap()
    }

    pub fn enumeration_cap(&self) -> usize {
        self.caps
            .as_ref()
            .map(|c| c.enumeration)
            .unwrap_or_else(default_enum_cap)
    }

    fn require<T>(opt: &Option<T>, field: &str, kind: ExperimentKind) -> Result<(), ConfigError> {
        if opt.is_some() {
            Ok(())
        } else {
            Err(ConfigError::invalid(
                field,
                format!("required for experiment '{}'", kind.name()),
            ))
        }
    }

    /// Checks per-experiment required fields, ladder monotonicity, and
    /// that referenced files exist.
    pub fn validate(&self) -> Result<(), ConfigError> {
        use ExperimentKind::*;
        let kind = self.experiment;
        match kind {
            Gen => {
                Self::require(&self.measure, "measure", kind)?;
            }
            Cover => {
                Self::require(&self.tree, "tree", kind)?;
            }
            Count => {
                Self::require(&self.measure, "measure", kind)?;
                Self::require(&self.tree, "tree", kind)?;
                Self::require(&self.t, "t", kind)?;
                Self::require(&self.epsilon, "epsilon", kind)?;
            }
            Scale => {
                Self::require(&self.measure, "measure", kind)?;
                Self::require(&self.tree, "tree", kind)?;
                Self::require(&self.t, "t", kind)?;
                Self::require(&self.eps_ladder, "eps_ladder", kind)?;
            }
            Lower => {
                Self::require(&self.measure, "measure", kind)?;
                Self::require(&self.tree, "tree", kind)?;
                Self::require(&self.eps_ladder, "eps_ladder", kind)?;
                match &self.t {
                    Some(TargetSpec::SelectInterval { .. }) => {}
                    _ => {
                        return Err(ConfigError::invalid(
                            "t.mode",
                            "lower experiments sample targets from a select-interval spec",
                        ))
                    }
                }
            }
            DimEmbed => {
                Self::require(&self.measure, "measure", kind)?;
                Self::require(&self.tree, "tree", kind)?;
                Self::require(&self.t, "t", kind)?;
                Self::require(&self.levels, "levels", kind)?;
            }
            Lambda => {
                Self::require(&self.measure, "measure", kind)?;
                Self::require(&self.tree, "tree", kind)?;
                Self::require(&self.bin_sizes, "bin_sizes", kind)?;
            }
            Fourier => {
                Self::require(&self.measure, "measure", kind)?;
            }
            Regularity => {
                Self::require(&self.measure, "measure", kind)?;
                Self::require(&self.radii, "radii", kind)?;
            }
        }
        if let Some(eps) = self.epsilon {
            if !(eps > 0.0) {
                return Err(ConfigError::invalid("epsilon", "must be positive"));
            }
        }
        if let Some(ladder) = &self.eps_ladder {
            let values = ladder.values("eps_ladder")?;
            let decreasing =
                values.iter().all(|&e| e > 0.0) && values.windows(2).all(|w| w[1] < w[0]);
            if !decreasing {
                return Err(ConfigError::invalid(
                    "eps_ladder",
                    "must be strictly decreasing and positive",
                ));
            }
        }
        if let Some(levels) = &self.levels {
            if levels.len() < 2 {
                return Err(ConfigError::invalid("levels", "need at least 2 levels"));
            }
            if levels.windows(2).any(|w| w[1] <= w[0]) {
                return Err(ConfigError::invalid("levels", "must be strictly increasing"));
            }
        }
        if let Some(radii) = &self.radii {
            if radii.is_empty() {
                return Err(ConfigError::invalid("radii", "must not be empty"));
            }
        }
        // referenced files must exist at validation time
        if let Some(TreeSpec { path: Some(p), .. }) = &self.tree {
            if !p.exists() {
                return Err(ConfigError::invalid(
                    "tree.path",
                    format!("file does not exist: {}", p.display()),
                ));
            }
        }
        if let Some(MeasureSpec::File { path }) = &self.measure {
            if !path.exists() {
                return Err(ConfigError::invalid(
                    "measure.path",
                    format!("file does not exist: {}", path.display()),
                ));
            }
        }
        if let Some(k) = &self.kernel {
            k.to_kernel()?;
        }
        Ok(())
    }
}
