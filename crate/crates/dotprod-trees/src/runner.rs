//! Experiment orchestration: builds the inputs from a config, runs the
//! experiment, and writes artifacts.
//!
//! Every run writes a `result.json` (plus CSV data files) whose bytes
//! depend only on the config and seed, and a `run.log` carrying wall-
//! clock timestamps and durations. Reproducibility checks compare the
//! former and ignore the latter.

use crate::config::{
    ConfigError, ExperimentConfig, ExperimentKind, MethodConfig, TargetSpec, Thresholds,
    TreeSpec,
};
use crate::count::{
    enumerate_embeddings, naive_count_capped, tree_dp_count, CountError, CountResult,
};
use crate::jsonfmt::{fmt_f64, Json};
use crate::kernel::{EdgeTargets, GapSpec, Kernel};
use crate::measure::{
    meta_json, regularity_check, write_measure, DiscreteMeasure, MeasureError, MeasureFileError,
};
use crate::scaling::{
    dot_resolution, lambda_measure_lower, lower_bound_check, minkowski_dim_embedding,
    scaling_series, select_interval, upper_bound_check, IntervalSelection, ScalingError,
};
use crate::spectral::{frostman_fourier_slope, SpectralError};
use crate::tree::{format_tree, PivotPolicy, Tree};
use std::path::{Path, PathBuf};
use std::time::Instant;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Count(#[from] CountError),
    #[error(transparent)]
    Scaling(#[from] ScalingError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    MeasureFile(#[from] MeasureFileError),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("thread pool: {0}")]
    ThreadPool(String),
}

#[derive(Debug)]
pub struct RunArtifacts {
    pub result_json: PathBuf,
    pub files: Vec<PathBuf>,
    pub log: PathBuf,
}

fn tree_json(tree: &Tree) -> Json {
    Json::obj(vec![
        ("vertices", Json::UInt(tree.vertex_count() as u128)),
        (
            "edges",
            Json::Arr(
                tree.edges()
                    .iter()
                    .map(|&(a, b)| {
                        Json::Arr(vec![Json::UInt(a as u128), Json::UInt(b as u128)])
                    })
                    .collect(),
            ),
        ),
    ])
}

fn tree_spec_json(spec: &TreeSpec) -> Json {
    match (&spec.path, &spec.family) {
        (Some(p), _) => Json::str(p.display().to_string()),
        (None, Some(f)) => Json::str(f),
        _ => Json::Null,
    }
}

fn kernel_json(kernel: Kernel) -> Json {
    let kind = match kernel.kind {
        crate::kernel::KernelKind::Indicator => "indicator",
        crate::kernel::KernelKind::Triangle => "triangle",
        crate::kernel::KernelKind::SmoothBump => "smooth-bump",
    };
    Json::obj(vec![
        ("kind", Json::str(kind)),
        ("normalized", Json::Bool(kernel.normalized)),
    ])
}

fn policy_json(policy: PivotPolicy) -> Json {
    Json::str(match policy {
        PivotPolicy::MaxDegree => "max-degree",
        PivotPolicy::FirstNonLeaf => "first-non-leaf",
    })
}

fn targets_json(targets: &EdgeTargets) -> Json {
    match targets {
        EdgeTargets::Scalar(t) => Json::obj(vec![
            ("mode", Json::str("scalar")),
            ("value", Json::Num(*t)),
        ]),
        EdgeTargets::PerEdge(map) => Json::obj(vec![
            ("mode", Json::str("per-edge")),
            (
                "values",
                Json::Obj(
                    map.iter()
                        .map(|(&(a, b), &t)| (format!("{a}-{b}"), Json::Num(t)))
                        .collect(),
                ),
            ),
        ]),
    }
}

fn interval_json(sel: &IntervalSelection) -> Json {
    Json::obj(vec![
        ("lo", Json::Num(sel.lo)),
        ("hi", Json::Num(sel.hi)),
        ("q_lo", Json::Num(sel.q_lo)),
        ("q_hi", Json::Num(sel.q_hi)),
    ])
}

fn count_result_json(r: &CountResult) -> Json {
    Json::obj(vec![
        ("value", Json::Num(r.value)),
        ("method", Json::str(r.method.name())),
        ("tuple_space_size", Json::UInt(r.tuple_space_size)),
        ("kernel_evals", Json::UInt(r.kernel_evals as u128)),
    ])
}

struct Outcome {
    result: Json,
    files: Vec<PathBuf>,
    log_extra: Json,
}

impl Outcome {
    fn bare(result: Json, files: Vec<PathBuf>) -> Self {
        Outcome {
            result,
            files,
            log_extra: Json::Null,
        }
    }
}

/// Runs one experiment, writing `result.json`, data files, and
/// `run.log` into `out_dir`. `threads` caps the compute worker pool;
/// results do not depend on it.
pub fn run(
    config: &ExperimentConfig,
    out_dir: &Path,
    threads: Option<usize>,
    seed_override: Option<u64>,
) -> Result<RunArtifacts, RunError> {
    config.validate()?;
    let mut cfg = config.clone();
    if let Some(seed) = seed_override {
        cfg.seed = Some(seed);
    }
    std::fs::create_dir_all(out_dir)?;
    let started_ms = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_millis())
        .unwrap_or(0);
    let t0 = Instant::now();
    let outcome = match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| RunError::ThreadPool(e.to_string()))?
            .install(|| run_inner(&cfg, out_dir)),
        None => run_inner(&cfg, out_dir),
    }?;
    let elapsed = t0.elapsed().as_secs_f64();

    let result_path = out_dir.join("result.json");
    std::fs::write(&result_path, outcome.result.to_pretty_string())?;

    let log = Json::obj(vec![
        ("experiment", Json::str(cfg.experiment.name())),
        ("started_unix_ms", Json::UInt(started_ms)),
        ("elapsed_seconds", Json::Num(elapsed)),
        (
            "threads",
            threads.map(|n| Json::UInt(n as u128)).unwrap_or(Json::Null),
        ),
        ("detail", outcome.log_extra),
    ]);
    let log_path = out_dir.join("run.log");
    std::fs::write(&log_path, log.to_pretty_string())?;

    Ok(RunArtifacts {
        result_json: result_path,
        files: outcome.files,
        log: log_path,
    })
}

fn effective_kernel(cfg: &ExperimentConfig) -> Result<Kernel, RunError> {
    match &cfg.kernel {
        Some(k) => Ok(k.to_kernel()?),
        None => Ok(Kernel::raw_indicator()),
    }
}

/// Resolves the target spec to edge targets plus the selected interval
/// when quantile selection was used (midpoint becomes the scalar).
fn resolve_targets(
    cfg: &ExperimentConfig,
    m: &DiscreteMeasure,
) -> Result<(EdgeTargets, Option<IntervalSelection>), RunError> {
    let spec = cfg
        .t
        .as_ref()
        .ok_or_else(|| ConfigError::invalid("t", "target spec required"))?;
    if let Some(targets) = spec.to_edge_targets()? {
        return Ok((targets, None));
    }
    let TargetSpec::SelectInterval {
        q_lo,
        q_hi,
        sample_pairs,
        seed,
    } = spec
    else {
        unreachable!("non-interval specs resolved above");
    };
    let sel = select_interval(m, *q_lo, *q_hi, *sample_pairs, seed.unwrap_or(cfg.seed()))?;
    Ok((EdgeTargets::Scalar(sel.midpoint()), Some(sel)))
}

fn resolve_interval(
    cfg: &ExperimentConfig,
    m: &DiscreteMeasure,
) -> Result<IntervalSelection, RunError> {
    match &cfg.t {
        Some(TargetSpec::SelectInterval {
            q_lo,
            q_hi,
            sample_pairs,
            seed,
        }) => Ok(select_interval(
            m,
            *q_lo,
            *q_hi,
            *sample_pairs,
            seed.unwrap_or(cfg.seed()),
        )?),
        _ => Err(ConfigError::invalid("t.mode", "expected select-interval").into()),
    }
}

fn enforce_floor(
    thresholds: &Thresholds,
    m: &DiscreteMeasure,
    min_eps: f64,
    seed: u64,
) -> Result<(), RunError> {
    if !thresholds.enforce_resolution_floor {
        return Ok(());
    }
    let floor = 2.0 * dot_resolution(m, 100_000, seed);
    if min_eps < floor {
        return Err(ScalingError::BelowResolutionFloor {
            epsilon: min_eps,
            floor,
        }
        .into());
    }
    Ok(())
}

fn run_inner(cfg: &ExperimentConfig, out_dir: &Path) -> Result<Outcome, RunError> {
    match cfg.experiment {
        ExperimentKind::Gen => run_gen(cfg, out_dir),
        ExperimentKind::Cover => run_cover(cfg, out_dir),
        ExperimentKind::Count => run_count(cfg, out_dir),
        ExperimentKind::Scale => run_scale(cfg, out_dir),
        ExperimentKind::Lower => run_lower(cfg, out_dir),
        ExperimentKind::DimEmbed => run_dim_embed(cfg, out_dir),
        ExperimentKind::Lambda => run_lambda(cfg, out_dir),
        ExperimentKind::Fourier => run_fourier(cfg, out_dir),
        ExperimentKind::Regularity => run_regularity(cfg, out_dir),
    }
}

fn build_measure(cfg: &ExperimentConfig) -> Result<DiscreteMeasure, RunError> {
    Ok(cfg
        .measure
        .as_ref()
        .ok_or_else(|| ConfigError::invalid("measure", "required"))?
        .build()?)
}

fn build_tree(cfg: &ExperimentConfig) -> Result<Tree, RunError> {
    Ok(cfg
        .tree
        .as_ref()
        .ok_or_else(|| ConfigError::invalid("tree", "required"))?
        .build()?)
}

fn run_gen(cfg: &ExperimentConfig, out_dir: &Path) -> Result<Outcome, RunError> {
    let m = build_measure(cfg)?;
    let csv = out_dir.join("measure.csv");
    write_measure(&m, &csv)?;
    let meta_file = crate::measure::meta_path(&csv);
    let result = Json::obj(vec![
        ("experiment", Json::str("gen")),
        ("n", Json::UInt(m.len() as u128)),
        ("dim", Json::UInt(m.dim() as u128)),
        ("meta", meta_json(m.meta())),
        (
            "files",
            Json::Arr(vec![
                Json::str("measure.csv"),
                Json::str("measure.meta.json"),
            ]),
        ),
    ]);
    Ok(Outcome::bare(result, vec![csv, meta_file]))
}

fn run_cover(cfg: &ExperimentConfig, out_dir: &Path) -> Result<Outcome, RunError> {
    let tree = build_tree(cfg)?;
    let policy = cfg.pivot_policy.unwrap_or(PivotPolicy::MaxDegree);
    let cover = tree.symmetric_cover(policy);
    let tree_path = out_dir.join("cover.tree.txt");
    std::fs::write(&tree_path, format_tree(&cover.tree))?;
    let cert = Json::obj(vec![
        (
            "vertex_map",
            Json::uints(&cover.certificate.vertex_map.iter().map(|&v| v as u64).collect::<Vec<_>>()),
        ),
        (
            "edge_map",
            Json::uints(&cover.certificate.edge_map.iter().map(|&v| v as u64).collect::<Vec<_>>()),
        ),
    ]);
    let cert_path = out_dir.join("certificate.json");
    std::fs::write(&cert_path, cert.to_pretty_string())?;
    let result = Json::obj(vec![
        ("experiment", Json::str("cover")),
        ("policy", policy_json(policy)),
        ("base", tree_json(&tree)),
        ("cover", tree_json(&cover.tree)),
        ("certificate", cert),
        (
            "verified",
            Json::Bool(cover.certificate.verify(&tree, &cover.tree)),
        ),
    ]);
    Ok(Outcome::bare(result, vec![tree_path, cert_path]))
}

fn run_count(cfg: &ExperimentConfig, out_dir: &Path) -> Result<Outcome, RunError> {
    let m = build_measure(cfg)?;
    let tree = build_tree(cfg)?;
    let (targets, interval) = resolve_targets(cfg, &m)?;
    let epsilon = cfg
        .epsilon
        .ok_or_else(|| ConfigError::invalid("epsilon", "required"))?;
    let kernel = effective_kernel(cfg)?;
    let gaps = GapSpec::new(targets.clone(), epsilon, kernel).map_err(CountError::from)?;
    let pruning = cfg.pruning.unwrap_or(true);
    let method = cfg.method.unwrap_or(MethodConfig::TreeDp);
    let result = match method {
        MethodConfig::TreeDp => tree_dp_count(&m, &tree, &gaps, pruning)?,
        MethodConfig::Oracle => naive_count_capped(&m, &tree, &gaps, cfg.tuple_cap() as u128)?,
    };
    let mut doc = Json::obj(vec![
        ("experiment", Json::str("count")),
        ("value", Json::Num(result.value)),
        ("method", Json::str(result.method.name())),
        ("tree", tree_json(&tree)),
        (
            "tree_file",
            tree_spec_json(cfg.tree.as_ref().expect("validated")),
        ),
        ("measure_meta", meta_json(m.meta())),
        (
            "gaps",
            Json::obj(vec![
                ("targets", targets_json(&targets)),
                ("epsilon", Json::Num(epsilon)),
                ("kernel", kernel_json(kernel)),
            ]),
        ),
        ("tuple_space_size", Json::UInt(result.tuple_space_size)),
        ("kernel_evals", Json::UInt(result.kernel_evals as u128)),
    ]);
    if let Some(sel) = interval {
        doc.push("interval", interval_json(&sel));
    }
    // embeddings are enumerated alongside the count when asked for
    let mut files = Vec::new();
    if let Some(exclude_repeats) = cfg.exclude_repeats {
        let tuples =
            enumerate_embeddings(&m, &tree, &gaps, cfg.enumeration_cap(), exclude_repeats)?;
        let mut csv = String::from("tuple\n");
        for t in &tuples {
            let row: Vec<String> = t.iter().map(|p| p.to_string()).collect();
            csv.push_str(&row.join(" "));
            csv.push('\n');
        }
        let path = out_dir.join("embeddings.csv");
        std::fs::write(&path, csv)?;
        doc.push("embedding_count", Json::UInt(tuples.len() as u128));
        files.push(path);
    }
    // the timing-bearing shape lives in the log, keeping result.json
    // byte-stable across runs
    let mut log_extra = count_result_json(&result);
    log_extra.push("elapsed_seconds", Json::Num(result.elapsed.as_secs_f64()));
    Ok(Outcome {
        result: doc,
        files,
        log_extra,
    })
}

fn run_scale(cfg: &ExperimentConfig, out_dir: &Path) -> Result<Outcome, RunError> {
    let m = build_measure(cfg)?;
    let tree = build_tree(cfg)?;
    let k = tree.edge_count();
    let (targets, interval) = resolve_targets(cfg, &m)?;
    let ladder = cfg
        .eps_ladder
        .as_ref()
        .ok_or_else(|| ConfigError::invalid("eps_ladder", "required"))?
        .values("eps_ladder")?;
    let thresholds = cfg.thresholds();
    enforce_floor(&thresholds, &m, *ladder.last().unwrap(), cfg.seed())?;
    let kernel = effective_kernel(cfg)?;
    let pruning = cfg.pruning.unwrap_or(true);
    let series = scaling_series(&m, &tree, &targets, &ladder, kernel, pruning)?;
    let verdict = upper_bound_check(&series, k, thresholds.drift_factor);

    let mut csv = String::from("epsilon,value,ratio,ln_eps,ln_value\n");
    for (&e, &v) in series.epsilons.iter().zip(&series.values) {
        let ratio = v / e.powi(k as i32);
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            fmt_f64(e),
            fmt_f64(v),
            fmt_f64(ratio),
            fmt_f64(e.ln()),
            if v > 0.0 {
                fmt_f64(v.ln())
            } else {
                String::from("-inf")
            }
        ));
    }
    let csv_path = out_dir.join("series.csv");
    std::fs::write(&csv_path, csv)?;

    let mut result = Json::obj(vec![
        ("experiment", Json::str("scale")),
        ("tree", tree_json(&tree)),
        ("k", Json::UInt(k as u128)),
        ("targets", targets_json(&targets)),
        ("kernel", kernel_json(kernel)),
        ("measure_meta", meta_json(m.meta())),
        (
            "series",
            Json::obj(vec![
                ("epsilons", Json::nums(&series.epsilons)),
                ("values", Json::nums(&series.values)),
                ("fitted_slope", Json::Num(series.fitted_slope)),
                ("fitted_intercept", Json::Num(series.fitted_intercept)),
                ("residual", Json::Num(series.residual)),
            ]),
        ),
        (
            "upper_check",
            Json::obj(vec![
                ("max_ratio", Json::Num(verdict.max_ratio)),
                ("pass", Json::Bool(verdict.pass)),
                ("ratios", Json::nums(&verdict.ratios)),
            ]),
        ),
    ]);
    if let Some(sel) = interval {
        result.push("interval", interval_json(&sel));
    }
    Ok(Outcome::bare(result, vec![csv_path]))
}

fn run_lower(cfg: &ExperimentConfig, out_dir: &Path) -> Result<Outcome, RunError> {
    let m = build_measure(cfg)?;
    let base = build_tree(cfg)?;
    let policy = cfg.pivot_policy.unwrap_or(PivotPolicy::MaxDegree);
    let cover = base.symmetric_cover(policy);
    let interval = resolve_interval(cfg, &m)?;
    let ladder = cfg
        .eps_ladder
        .as_ref()
        .ok_or_else(|| ConfigError::invalid("eps_ladder", "required"))?
        .values("eps_ladder")?;
    let thresholds = cfg.thresholds();
    enforce_floor(&thresholds, &m, *ladder.last().unwrap(), cfg.seed())?;
    let kernel = effective_kernel(cfg)?;
    let pruning = cfg.pruning.unwrap_or(true);
    let samples_t = cfg.samples_t.unwrap_or(5);
    let verdict = lower_bound_check(
        &m,
        &cover,
        &ladder,
        &interval,
        samples_t,
        kernel,
        pruning,
        thresholds.drift_factor,
    )?;

    let mut csv = String::from("t,epsilon,ratio\n");
    for (ti, ratios) in verdict.ratios_per_target.iter().enumerate() {
        for (ei, &ratio) in ratios.iter().enumerate() {
            csv.push_str(&format!(
                "{},{},{}\n",
                fmt_f64(verdict.targets[ti]),
                fmt_f64(ladder[ei]),
                fmt_f64(ratio)
            ));
        }
    }
    let csv_path = out_dir.join("ratios.csv");
    std::fs::write(&csv_path, csv)?;

    let result = Json::obj(vec![
        ("experiment", Json::str("lower")),
        ("base", tree_json(&base)),
        ("cover", tree_json(&cover.tree)),
        ("policy", policy_json(policy)),
        ("k", Json::UInt(cover.tree.edge_count() as u128)),
        ("interval", interval_json(&interval)),
        ("kernel", kernel_json(kernel)),
        ("epsilons", Json::nums(&ladder)),
        ("measure_meta", meta_json(m.meta())),
        (
            "verdict",
            Json::obj(vec![
                ("min_ratio", Json::Num(verdict.min_ratio)),
                ("pass", Json::Bool(verdict.pass)),
                ("targets", Json::nums(&verdict.targets)),
                (
                    "ratios_per_target",
                    Json::Arr(
                        verdict
                            .ratios_per_target
                            .iter()
                            .map(|r| Json::nums(r))
                            .collect(),
                    ),
                ),
            ]),
        ),
    ]);
    Ok(Outcome::bare(result, vec![csv_path]))
}

fn run_dim_embed(cfg: &ExperimentConfig, out_dir: &Path) -> Result<Outcome, RunError> {
    let spec = cfg
        .measure
        .as_ref()
        .ok_or_else(|| ConfigError::invalid("measure", "required"))?;
    let levels_cfg = cfg
        .levels
        .as_ref()
        .ok_or_else(|| ConfigError::invalid("levels", "required"))?;
    let tree = build_tree(cfg)?;
    let thresholds = cfg.thresholds();

    let mut measures = Vec::new();
    for &level in levels_cfg {
        let m = spec.build_at_level(level)?;
        let scale = m.meta().base_scale.ok_or_else(|| {
            ConfigError::invalid("measure.family", "family has no construction scale ladder")
        })?;
        measures.push((m, scale));
    }
    // target resolved on the finest level
    let finest = &measures.last().expect("validated: >= 2 levels").0;
    let (targets, interval) = resolve_targets(cfg, finest)?;
    let EdgeTargets::Scalar(t) = targets else {
        return Err(ConfigError::invalid("t", "dim-embed takes a scalar target").into());
    };
    let level_refs: Vec<(&DiscreteMeasure, f64)> =
        measures.iter().map(|(m, s)| (m, *s)).collect();
    let estimate = minkowski_dim_embedding(&level_refs, &tree, t, thresholds.slack)?;

    let mut csv = String::from("level,scale,count\n");
    for ((&level, &scale), &count) in levels_cfg
        .iter()
        .zip(&estimate.scales)
        .zip(&estimate.counts)
    {
        csv.push_str(&format!("{level},{},{count}\n", fmt_f64(scale)));
    }
    let csv_path = out_dir.join("levels.csv");
    std::fs::write(&csv_path, csv)?;

    let k = tree.edge_count();
    let mut result = Json::obj(vec![
        ("experiment", Json::str("dim-embed")),
        ("tree", tree_json(&tree)),
        ("k", Json::UInt(k as u128)),
        ("t", Json::Num(t)),
        ("slack", Json::Num(thresholds.slack)),
        ("levels", Json::uints(levels_cfg.as_slice())),
        ("scales", Json::nums(&estimate.scales)),
        ("counts", Json::uints(estimate.counts.as_slice())),
        ("slope", Json::Num(estimate.slope)),
    ]);
    if let Some(s) = finest.meta().nominal_s {
        result.push("nominal_s", Json::Num(s));
        result.push(
            "dimension_bound",
            Json::Num((k as f64 + 1.0) * s - k as f64),
        );
    }
    if let Some(sel) = interval {
        result.push("interval", interval_json(&sel));
    }
    Ok(Outcome::bare(result, vec![csv_path]))
}

fn run_lambda(cfg: &ExperimentConfig, out_dir: &Path) -> Result<Outcome, RunError> {
    let m = build_measure(cfg)?;
    let tree = build_tree(cfg)?;
    let bins = cfg
        .bin_sizes
        .as_ref()
        .ok_or_else(|| ConfigError::invalid("bin_sizes", "required"))?
        .values("bin_sizes")?;
    let samples = cfg.sample_tuples.unwrap_or(400_000);
    let volumes = lambda_measure_lower(&m, &tree, &bins, samples, cfg.seed())?;

    let mut csv = String::from("bin_size,occupied_bins,occupied_volume\n");
    for v in &volumes {
        csv.push_str(&format!(
            "{},{},{}\n",
            fmt_f64(v.bin_size),
            v.occupied_bins,
            fmt_f64(v.occupied_volume)
        ));
    }
    let csv_path = out_dir.join("volumes.csv");
    std::fs::write(&csv_path, csv)?;

    // evidence: the minimum over the two smallest bin sizes
    let mut by_size = volumes.clone();
    by_size.sort_by(|a, b| a.bin_size.total_cmp(&b.bin_size));
    let evidence = by_size
        .iter()
        .take(2)
        .map(|v| v.occupied_volume)
        .fold(f64::INFINITY, f64::min);

    let result = Json::obj(vec![
        ("experiment", Json::str("lambda")),
        ("tree", tree_json(&tree)),
        ("k", Json::UInt(tree.edge_count() as u128)),
        ("samples", Json::UInt(samples as u128)),
        ("measure_meta", meta_json(m.meta())),
        (
            "volumes",
            Json::Arr(
                volumes
                    .iter()
                    .map(|v| {
                        Json::obj(vec![
                            ("bin_size", Json::Num(v.bin_size)),
                            ("occupied_bins", Json::UInt(v.occupied_bins as u128)),
                            ("occupied_volume", Json::Num(v.occupied_volume)),
                        ])
                    })
                    .collect(),
            ),
        ),
        ("evidence_floor", Json::Num(evidence)),
    ]);
    Ok(Outcome::bare(result, vec![csv_path]))
}

fn run_fourier(cfg: &ExperimentConfig, out_dir: &Path) -> Result<Outcome, RunError> {
    let m = build_measure(cfg)?;
    let j_range: Vec<u32> = cfg.j_range.clone().unwrap_or_else(|| (2..=7).collect());
    let density = cfg.grid_density.unwrap_or(16);
    let f = vec![1.0; m.len()];
    let probe = frostman_fourier_slope(&m, &f, &j_range, density)?;
    let target = m.meta().nominal_s.map(|s| (m.dim() as f64 - s) / 2.0);

    let mut csv = String::from("j,mass,reference\n");
    for (&j, &mass) in probe.j_values.iter().zip(&probe.masses) {
        let reference = match target {
            Some(slope) => fmt_f64(2f64.powf(j as f64 * slope)),
            None => String::new(),
        };
        csv.push_str(&format!("{j},{},{reference}\n", fmt_f64(mass)));
    }
    let csv_path = out_dir.join("fourier.csv");
    std::fs::write(&csv_path, csv)?;

    let mut result = Json::obj(vec![
        ("experiment", Json::str("fourier")),
        ("dim", Json::UInt(m.dim() as u128)),
        ("grid_density", Json::UInt(density as u128)),
        ("j_values", Json::uints(probe.j_values.as_slice())),
        ("masses", Json::nums(&probe.masses)),
        ("slope", Json::Num(probe.slope)),
        ("residual", Json::Num(probe.residual)),
        ("measure_meta", meta_json(m.meta())),
    ]);
    if let Some(t) = target {
        result.push("target_slope", Json::Num(t));
    }
    Ok(Outcome::bare(result, vec![csv_path]))
}

fn run_regularity(cfg: &ExperimentConfig, out_dir: &Path) -> Result<Outcome, RunError> {
    let m = build_measure(cfg)?;
    let radii = cfg
        .radii
        .as_ref()
        .ok_or_else(|| ConfigError::invalid("radii", "required"))?;
    let s = cfg
        .exponent_s
        .or(m.meta().nominal_s)
        .ok_or_else(|| ConfigError::invalid("exponent_s", "no nominal dimension in metadata"))?;
    let centers = cfg.sample_centers.unwrap_or(64);
    let report = regularity_check(&m, s, radii, centers, cfg.seed())?;

    let mut csv = String::from("radius,min_ratio,max_ratio\n");
    for &r in radii {
        let one = regularity_check(&m, s, &[r], centers, cfg.seed())?;
        csv.push_str(&format!(
            "{},{},{}\n",
            fmt_f64(r),
            fmt_f64(one.min_lower_ratio),
            fmt_f64(one.max_upper_ratio)
        ));
    }
    let csv_path = out_dir.join("regularity.csv");
    std::fs::write(&csv_path, csv)?;

    let result = Json::obj(vec![
        ("experiment", Json::str("regularity")),
        ("exponent_s", Json::Num(s)),
        ("sample_centers", Json::UInt(centers as u128)),
        ("radii", Json::nums(radii)),
        ("max_upper_ratio", Json::Num(report.max_upper_ratio)),
        ("min_lower_ratio", Json::Num(report.min_lower_ratio)),
        ("measure_meta", meta_json(m.meta())),
    ]);
    Ok(Outcome::bare(result, vec![csv_path]))
}

/// Prints the execution plan: input sizes, tuple-space size, estimated
/// kernel evaluations, and any caps or guards the run would trip.
pub fn describe(cfg: &ExperimentConfig) -> Result<String, RunError> {
    use std::fmt::Write;
    cfg.validate()?;
    let mut out = String::new();
    writeln!(out, "experiment: {}", cfg.experiment.name()).ok();

    let measure = match &cfg.measure {
        Some(spec) => {
            let m = spec.build()?;
            writeln!(
                out,
                "measure: n={} d={} family={}",
                m.len(),
                m.dim(),
                m.meta().family
            )
            .ok();
            Some(m)
        }
        None => None,
    };
    let tree = match &cfg.tree {
        Some(spec) => {
            let t = spec.build()?;
            writeln!(
                out,
                "tree: k={} vertices={}",
                t.edge_count(),
                t.vertex_count()
            )
            .ok();
            Some(t)
        }
        None => None,
    };

    if let (Some(m), Some(t)) = (&measure, &tree) {
        let n = m.len() as u128;
        let space = n.checked_pow(t.vertex_count() as u32);
        let space_text = space
            .map(|s| s.to_string())
            .unwrap_or_else(|| "overflow".into());
        writeln!(out, "tuple space n^(k+1) = {space_text}").ok();
        let ladder_len = cfg
            .eps_ladder
            .as_ref()
            .and_then(|l| l.values("eps_ladder").ok())
            .map(|v| v.len())
            .unwrap_or(1);
        let t_samples = cfg.samples_t.unwrap_or(match cfg.experiment {
            ExperimentKind::Lower => 5,
            _ => 1,
        });
        let dp_evals = t.edge_count() as u128 * n * n * ladder_len as u128 * t_samples as u128;
        writeln!(out, "tree-dp cost = {dp_evals} kernel evals").ok();
        if cfg.method == Some(MethodConfig::Oracle) {
            let cap = cfg.tuple_cap() as u128;
            if space.map(|s| s > cap).unwrap_or(true) {
                writeln!(out, "would trigger: TupleSpaceTooLarge (cap {cap})").ok();
            }
        }
    }
    if cfg.experiment == ExperimentKind::Fourier {
        if let Some(m) = &measure {
            if m.dim() > 2 {
                writeln!(out, "would trigger: DimensionTooHigh (d={})", m.dim()).ok();
            } else {
                let density = cfg.grid_density.unwrap_or(16) as u64;
                let j_max = cfg
                    .j_range
                    .clone()
                    .unwrap_or_else(|| (2..=7).collect())
                    .into_iter()
                    .max()
                    .unwrap_or(7);
                let samples_1d = 2 * (1u64 << j_max) * density;
                let samples = match m.dim() {
                    1 => samples_1d,
                    _ => samples_1d * samples_1d,
                };
                writeln!(
                    out,
                    "fourier grid: up to {samples} samples x {} atoms at j={j_max}",
                    m.len()
                )
                .ok();
            }
        }
    }
    writeln!(out, "caps: tuple_space={}", cfg.tuple_cap()).ok();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tmp_dir(tag: &str) -> PathBuf {
        let dir = std::env::temp_dir().join(format!("dotprod-trees-runner-{tag}"));
        let _ = std::fs::remove_dir_all(&dir);
        std::fs::create_dir_all(&dir).unwrap();
        dir
    }

    #[test]
    fn count_fixture_reproduces_hand_value() {
        let config = ExperimentConfig::from_json(
            r#"{
                "experiment": "count",
                "measure": {"family": "atoms", "points": [[1.0, 0.0], [0.0, 1.0]], "weights": [0.5, 0.5]},
                "tree": {"family": "path-1"},
                "t": {"mode": "scalar", "value": 0.0},
                "epsilon": 0.1
            }"#,
        )
        .unwrap();
        let dir = tmp_dir("count");
        let artifacts = run(&config, &dir, Some(2), None).unwrap();
        let text = std::fs::read_to_string(&artifacts.result_json).unwrap();
        let doc: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(doc["value"].as_f64().unwrap(), 0.5);
        assert!(artifacts.log.exists());
    }

    #[test]
    fn cover_run_emits_p5_for_p4() {
        let config =
            ExperimentConfig::from_json(r#"{"experiment": "cover", "tree": {"family": "path-3"}}"#)
                .unwrap();
        let dir = tmp_dir("cover");
        let artifacts = run(&config, &dir, None, None).unwrap();
        let cover = crate::tree::read_tree_file(&dir.join("cover.tree.txt")).unwrap();
        assert!(cover.is_isomorphic(&Tree::path(4)));
        let doc: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(&artifacts.result_json).unwrap())
                .unwrap();
        assert_eq!(doc["verified"], serde_json::Value::Bool(true));
    }

    #[test]
    fn gen_round_trips_through_files() {
        let config = ExperimentConfig::from_json(
            r#"{
                "experiment": "gen",
                "measure": {"family": "cantor-product", "ratio": 0.25, "branches": 3, "level": 2, "c": 0.3}
            }"#,
        )
        .unwrap();
        let dir = tmp_dir("gen");
        run(&config, &dir, None, None).unwrap();
        let back = crate::measure::read_measure(&dir.join("measure.csv")).unwrap();
        let direct = config.measure.as_ref().unwrap().build().unwrap();
        assert_eq!(back, direct);
    }

    #[test]
    fn runs_are_byte_identical() {
        let text = r#"{
            "experiment": "scale",
            "measure": {"family": "uniform-cube", "n": 300, "d": 2, "c": 0.3, "seed": 5},
            "tree": {"family": "path-1"},
            "t": {"mode": "select-interval"},
            "eps_ladder": {"pow2_from": -3, "pow2_to": -6},
            "seed": 3
        }"#;
        let config = ExperimentConfig::from_json(text).unwrap();
        let dir_a = tmp_dir("repro-a");
        let dir_b = tmp_dir("repro-b");
        run(&config, &dir_a, Some(1), None).unwrap();
        run(&config, &dir_b, Some(4), None).unwrap();
        let a = std::fs::read(dir_a.join("result.json")).unwrap();
        let b = std::fs::read(dir_b.join("result.json")).unwrap();
        assert_eq!(a, b);
        let a = std::fs::read(dir_a.join("series.csv")).unwrap();
        let b = std::fs::read(dir_b.join("series.csv")).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn describe_flags_oracle_blowup_and_fourier_dim() {
        let config = ExperimentConfig::from_json(
            r#"{
                "experiment": "count",
                "measure": {"family": "uniform-cube", "n": 6561, "d": 2, "c": 0.3, "seed": 1},
                "tree": {"family": "path-2"},
                "t": {"mode": "scalar", "value": 0.8},
                "epsilon": 0.05,
                "method": "oracle"
            }"#,
        )
        .unwrap();
        let plan = describe(&config).unwrap();
        assert!(plan.contains("TupleSpaceTooLarge"), "{plan}");
        assert!(plan.contains("n=6561"), "{plan}");

        let config = ExperimentConfig::from_json(
            r#"{
                "experiment": "fourier",
                "measure": {"family": "uniform-cube", "n": 10, "d": 3, "c": 0.3, "seed": 1}
            }"#,
        )
        .unwrap();
        let plan = describe(&config).unwrap();
        assert!(plan.contains("DimensionTooHigh"), "{plan}");
    }

    #[test]
    fn cyclic_tree_file_is_config_invalid_naming_the_edge() {
        let dir = tmp_dir("badtree");
        let path = dir.join("cycle.txt");
        std::fs::write(&path, "vertices 3\n0 1\n1 2\n0 2\n").unwrap();
        let config_text = format!(
            r#"{{"experiment": "cover", "tree": {{"path": "{}"}}}}"#,
            path.display()
        );
        let config = ExperimentConfig::from_json(&config_text).unwrap();
        let err = run(&config, &dir, None, None).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("tree.path"), "{msg}");
        assert!(msg.contains("cycle"), "{msg}");
    }
}
