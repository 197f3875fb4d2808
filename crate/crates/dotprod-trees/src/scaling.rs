//! Scaling-law experiments: window-width ladders and their log-log
//! slopes, two-sided bound checks, packing/covering numbers, dimension
//! estimates for embedding sets, and occupied-volume evidence that the
//! gap set has positive measure.
//!
//! The raw-indicator count of a `k`-edge tree should scale like `eps^k`
//! over a window ladder when the measure is regular enough; the checks
//! here quantify that with pinned drift thresholds rather than chasing
//! the (unknown) constants.

use crate::count::{tree_dp_count, CountError, for_each_embedding};
use crate::kernel::{EdgeTargets, GapError, GapSpec, Kernel};
use crate::measure::DiscreteMeasure;
use crate::numeric::{dist_sq, linspace, ols_fit, quantile};
use crate::tree::{SymmetricCover, Tree};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::{HashMap, HashSet};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScalingError {
    #[error("quantiles must satisfy 0 <= q_lo < q_hi <= 1, got ({q_lo}, {q_hi})")]
    InvalidQuantiles { q_lo: f64, q_hi: f64 },
    #[error("need at least one sampled pair")]
    NoSamples,
    #[error("all sampled dot products equal {value}; no interval to select")]
    DegenerateInterval { value: f64 },
    #[error("ladder needs at least {need} entries, got {got}")]
    LadderTooShort { got: usize, need: usize },
    #[error("epsilon ladder must be strictly decreasing and positive")]
    LadderNotDecreasing,
    #[error("fewer than two ladder points produced a positive count; the ladder is below the cloud's resolution")]
    AllZeroValues,
    #[error("epsilon {epsilon} is below the resolution floor {floor} (2x the sampled dot-product gap scale)")]
    BelowResolutionFloor { epsilon: f64, floor: f64 },
    #[error("no embeddings found at enough levels to fit a slope")]
    NoEmbeddingsFound,
    #[error("bin size {bin_size} too small: {occupied} occupied bins from {samples} samples cannot resolve a volume")]
    BinTooSmall {
        bin_size: f64,
        occupied: u64,
        samples: usize,
    },
    #[error("tree has {k} edges; this experiment supports at most {limit}")]
    TreeTooLarge { k: usize, limit: usize },
    #[error("radius {r} outside the cloud's usable range [{lo}, {hi}]")]
    LadderOutOfRange { r: f64, lo: f64, hi: f64 },
    #[error(transparent)]
    Count(#[from] CountError),
    #[error(transparent)]
    Gap(#[from] GapError),
}

/// An empirically selected open interval of dot-product targets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntervalSelection {
    pub lo: f64,
    pub hi: f64,
    pub q_lo: f64,
    pub q_hi: f64,
}

impl IntervalSelection {
    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }
}

/// Quantiles of `x . y` over seeded sampled point pairs (indices drawn
/// independently, so self-pairs participate). Defaults elsewhere:
/// `q_lo = 0.35`, `q_hi = 0.65`.
pub fn select_interval(
    m: &DiscreteMeasure,
    q_lo: f64,
    q_hi: f64,
    sample_pairs: usize,
    seed: u64,
) -> Result<IntervalSelection, ScalingError> {
    if !(0.0..=1.0).contains(&q_lo) || !(0.0..=1.0).contains(&q_hi) || q_lo >= q_hi {
        return Err(ScalingError::InvalidQuantiles { q_lo, q_hi });
    }
    if sample_pairs == 0 {
        return Err(ScalingError::NoSamples);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = m.len();
    let mut dots: Vec<f64> = (0..sample_pairs)
        .map(|_| {
            let i = rng.gen_range(0..n);
            let j = rng.gen_range(0..n);
            m.dot(i, j)
        })
        .collect();
    dots.sort_by(f64::total_cmp);
    let lo = quantile(&dots, q_lo);
    let hi = quantile(&dots, q_hi);
    if !(lo < hi) {
        return Err(ScalingError::DegenerateInterval { value: lo });
    }
    Ok(IntervalSelection { lo, hi, q_lo, q_hi })
}

/// Sampled resolution of the dot-product spectrum: the smallest positive
/// gap between consecutive sorted sampled pair dot products. Returns 0
/// when every sampled dot product is equal (no floor can be derived).
pub fn dot_resolution(m: &DiscreteMeasure, sample_pairs: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = m.len();
    let mut dots: Vec<f64> = (0..sample_pairs.max(2))
        .map(|_| {
            let i = rng.gen_range(0..n);
            let j = rng.gen_range(0..n);
            m.dot(i, j)
        })
        .collect();
    dots.sort_by(f64::total_cmp);
    let min_gap = dots
        .windows(2)
        .map(|w| w[1] - w[0])
        .filter(|&g| g > 0.0)
        .fold(f64::INFINITY, f64::min);
    if min_gap.is_finite() {
        min_gap
    } else {
        0.0
    }
}

/// A ladder of counts with its fitted log-log line. The fit uses the
/// entries with positive value.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingSeries {
    pub epsilons: Vec<f64>,
    pub values: Vec<f64>,
    pub fitted_slope: f64,
    pub fitted_intercept: f64,
    pub residual: f64,
}

/// Runs the dynamic-program count at every ladder width and fits
/// `log V` against `log eps`. The ladder must be strictly decreasing
/// with at least 4 entries.
pub fn scaling_series(
    m: &DiscreteMeasure,
    tree: &Tree,
    targets: &EdgeTargets,
    eps_ladder: &[f64],
    kernel: Kernel,
    pruning: bool,
) -> Result<ScalingSeries, ScalingError> {
    if eps_ladder.len() < 4 {
        return Err(ScalingError::LadderTooShort {
            got: eps_ladder.len(),
            need: 4,
        });
    }
    check_decreasing(eps_ladder)?;
    let mut values = Vec::with_capacity(eps_ladder.len());
    for &eps in eps_ladder {
        let gaps = GapSpec::new(targets.clone(), eps, kernel)?;
        values.push(tree_dp_count(m, tree, &gaps, pruning)?.value);
    }
    let (slope, intercept, residual) = fit_positive(eps_ladder, &values)?;
    Ok(ScalingSeries {
        epsilons: eps_ladder.to_vec(),
        values,
        fitted_slope: slope,
        fitted_intercept: intercept,
        residual,
    })
}

fn check_decreasing(ladder: &[f64]) -> Result<(), ScalingError> {
    let ok = ladder.iter().all(|&e| e > 0.0)
        && ladder.windows(2).all(|w| w[1] < w[0]);
    if ok {
        Ok(())
    } else {
        Err(ScalingError::LadderNotDecreasing)
    }
}

fn fit_positive(xs: &[f64], values: &[f64]) -> Result<(f64, f64, f64), ScalingError> {
    let mut lx = Vec::new();
    let mut lv = Vec::new();
    for (&x, &v) in xs.iter().zip(values) {
        if v > 0.0 {
            lx.push(x.ln());
            lv.push(v.ln());
        }
    }
    if lx.len() < 2 {
        return Err(ScalingError::AllZeroValues);
    }
    let fit = ols_fit(&lx, &lv);
    Ok((fit.slope, fit.intercept, fit.residual))
}

/// Verdict of a bounded-constant check over a ladder of ratios
/// `V / eps^k`.
#[derive(Debug, Clone, PartialEq)]
pub struct UpperVerdict {
    pub max_ratio: f64,
    pub pass: bool,
    pub ratios: Vec<f64>,
}

/// Checks that `V / eps^k` stays bounded along the ladder: the check
/// fails only when the ratio grows monotonically from the widest to the
/// narrowest window by more than `drift_factor` in total.
pub fn upper_bound_check(series: &ScalingSeries, k: usize, drift_factor: f64) -> UpperVerdict {
    let ratios: Vec<f64> = series
        .epsilons
        .iter()
        .zip(&series.values)
        .map(|(&e, &v)| v / e.powi(k as i32))
        .collect();
    let max_ratio = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let nondecreasing = ratios.windows(2).all(|w| w[1] >= w[0]);
    let first = ratios.first().copied().unwrap_or(0.0);
    let last = ratios.last().copied().unwrap_or(0.0);
    let grows_past_factor = last > drift_factor * first;
    UpperVerdict {
        max_ratio,
        pass: !(nondecreasing && grows_past_factor),
        ratios,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LowerVerdict {
    pub min_ratio: f64,
    pub pass: bool,
    pub targets: Vec<f64>,
    pub ratios_per_target: Vec<Vec<f64>>,
}

/// Checks the lower-bound analogue on a symmetric cover: `V / eps^K`
/// (with `K` the cover's own edge count) must stay positive at every
/// sampled target and must not decay monotonically by more than
/// `drift_factor` across the ladder.
///
/// Requiring a [`SymmetricCover`] (rather than a bare tree) enforces the
/// cover provenance the bound needs.
pub fn lower_bound_check(
    m: &DiscreteMeasure,
    cover: &SymmetricCover,
    eps_ladder: &[f64],
    interval: &IntervalSelection,
    samples_t: usize,
    kernel: Kernel,
    pruning: bool,
    drift_factor: f64,
) -> Result<LowerVerdict, ScalingError> {
    if eps_ladder.len() < 2 {
        return Err(ScalingError::LadderTooShort {
            got: eps_ladder.len(),
            need: 2,
        });
    }
    check_decreasing(eps_ladder)?;
    let k = cover.tree.edge_count();
    let targets = linspace(interval.lo, interval.hi, samples_t.max(1));
    let mut min_ratio = f64::INFINITY;
    let mut all_pass = true;
    let mut ratios_per_target = Vec::with_capacity(targets.len());
    for &t in &targets {
        let mut ratios = Vec::with_capacity(eps_ladder.len());
        for &eps in eps_ladder {
            let gaps = GapSpec::new(EdgeTargets::Scalar(t), eps, kernel)?;
            let v = tree_dp_count(m, &cover.tree, &gaps, pruning)?.value;
            ratios.push(v / eps.powi(k as i32));
        }
        min_ratio = ratios.iter().copied().fold(min_ratio, f64::min);
        let nonincreasing = ratios.windows(2).all(|w| w[1] <= w[0]);
        let first = ratios[0];
        let last = *ratios.last().unwrap();
        let decays_past_factor = first > drift_factor * last;
        if nonincreasing && decays_past_factor {
            all_pass = false;
        }
        ratios_per_target.push(ratios);
    }
    Ok(LowerVerdict {
        min_ratio,
        pass: min_ratio > 0.0 && all_pass,
        targets,
        ratios_per_target,
    })
}

/// Size of a greedy first-fit packing with balls of radius `r`: points
/// are taken in input order and kept when at least `2r` from every kept
/// center (disjointness of open balls).
pub fn packing_number(coords: &[f64], dim: usize, r: f64) -> usize {
    assert!(r > 0.0 && dim > 0);
    let n = coords.len() / dim;
    let min_sq = 4.0 * r * r;
    let mut kept: Vec<usize> = Vec::new();
    for i in 0..n {
        let p = &coords[i * dim..(i + 1) * dim];
        if kept
            .iter()
            .all(|&j| dist_sq(p, &coords[j * dim..(j + 1) * dim]) >= min_sq)
        {
            kept.push(i);
        }
    }
    kept.len()
}

/// Size of a greedy cover with closed balls of radius `r`: repeatedly
/// center a ball at the first uncovered point.
pub fn covering_number(coords: &[f64], dim: usize, r: f64) -> usize {
    assert!(r > 0.0 && dim > 0);
    let n = coords.len() / dim;
    let r_sq = r * r;
    let mut covered = vec![false; n];
    let mut count = 0;
    for i in 0..n {
        if covered[i] {
            continue;
        }
        count += 1;
        let center = &coords[i * dim..(i + 1) * dim];
        for j in i..n {
            if !covered[j] && dist_sq(center, &coords[j * dim..(j + 1) * dim]) <= r_sq {
                covered[j] = true;
            }
        }
    }
    count
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DimensionKind {
    Packing,
    Covering,
}

/// A ladder of scale/count pairs with its fitted dimension (slope of
/// `log count` against `log (1/scale)`).
#[derive(Debug, Clone, PartialEq)]
pub struct DimensionEstimate {
    pub scales: Vec<f64>,
    pub counts: Vec<u64>,
    pub slope: f64,
    pub kind: DimensionKind,
}

/// Covering-number box-counting estimate over a radius ladder.
pub fn dim_estimate(
    m: &DiscreteMeasure,
    r_ladder: &[f64],
) -> Result<DimensionEstimate, ScalingError> {
    if r_ladder.len() < 2 {
        return Err(ScalingError::LadderTooShort {
            got: r_ladder.len(),
            need: 2,
        });
    }
    let min_gap = m.min_gap();
    let diam = m.diameter();
    for &r in r_ladder {
        let out_of_range =
            r <= 0.0 || (min_gap > 0.0 && r < min_gap) || (diam > 0.0 && r > diam);
        if out_of_range {
            return Err(ScalingError::LadderOutOfRange {
                r,
                lo: min_gap,
                hi: diam,
            });
        }
    }
    let counts: Vec<u64> = r_ladder
        .iter()
        .map(|&r| covering_number(m.coords(), m.dim(), r) as u64)
        .collect();
    let xs: Vec<f64> = r_ladder.iter().map(|&r| (1.0 / r).ln()).collect();
    let ys: Vec<f64> = counts.iter().map(|&c| (c as f64).ln()).collect();
    let fit = ols_fit(&xs, &ys);
    Ok(DimensionEstimate {
        scales: r_ladder.to_vec(),
        counts,
        slope: fit.slope,
        kind: DimensionKind::Covering,
    })
}

/// Multiplicative hasher for the packed cell keys below; the default
/// SipHash costs more than the whole neighbor probe.
#[derive(Default, Clone)]
struct CellHasher(u64);

impl std::hash::Hasher for CellHasher {
    fn finish(&self) -> u64 {
        self.0
    }

    fn write(&mut self, _bytes: &[u8]) {
        unreachable!("cell keys hash through write_u64");
    }

    fn write_u64(&mut self, key: u64) {
        let h = key.wrapping_mul(0x9e37_79b9_7f4a_7c15);
        self.0 = h ^ (h >> 32);
    }
}

#[derive(Default, Clone)]
struct CellHasherBuilder;

impl std::hash::BuildHasher for CellHasherBuilder {
    type Hasher = CellHasher;

    fn build_hasher(&self) -> CellHasher {
        CellHasher::default()
    }
}

/// Streaming greedy separation filter in the tuple space: keeps a tuple
/// when its concatenated coordinate vector is at least `delta` from
/// every kept vector.
///
/// Cells of side `delta` limit the distance checks to the 3^D
/// neighboring cells. Cell coordinates are biased into non-negative
/// lanes and packed into one u64 key, so a neighbor probe is one
/// wrapping add plus one hash lookup; kept vectors live in a flat
/// buffer chained per cell.
struct SeparationGrid {
    dim: usize,
    delta: f64,
    bias: i64,
    lane_bits: u32,
    /// Precomputed packed-key deltas for the 3^D neighbor offsets, home
    /// cell first (most rejections resolve there).
    neighbor_deltas: Vec<u64>,
    /// Head kept-point index per occupied cell.
    heads: HashMap<u64, u32, CellHasherBuilder>,
    /// Chain links and flat coordinates of kept points.
    next: Vec<u32>,
    coords: Vec<f64>,
    kept: u64,
}

const CHAIN_END: u32 = u32::MAX;

impl SeparationGrid {
    /// `lo..hi` must bound every coordinate that will be offered; the
    /// bound sizes the packed key lanes.
    fn new(dim: usize, delta: f64, lo: f64, hi: f64) -> Self {
        assert!(delta > 0.0 && hi >= lo);
        let lo_idx = (lo / delta).floor() as i64 - 1;
        let hi_idx = (hi / delta).floor() as i64 + 1;
        let range = (hi_idx - lo_idx + 1) as u64;
        let lane_bits = 64 - range.leading_zeros();
        assert!(
            lane_bits as usize * dim <= 64,
            "tuple grid needs {} bits over {dim} lanes; shrink the tuple space",
            lane_bits as usize * dim
        );
        let mut neighbor_deltas = Vec::with_capacity(3usize.pow(dim as u32));
        let mut offsets: Vec<Vec<i64>> = vec![vec![]];
        for _ in 0..dim {
            let mut grown = Vec::with_capacity(offsets.len() * 3);
            for base in &offsets {
                for d in [0i64, -1, 1] {
                    let mut o = base.clone();
                    o.push(d);
                    grown.push(o);
                }
            }
            offsets = grown;
        }
        offsets.sort_by_key(|o| o.iter().map(|d| d.abs()).sum::<i64>());
        for off in &offsets {
            let mut delta_key = 0u64;
            for (lane, &d) in off.iter().enumerate() {
                delta_key =
                    delta_key.wrapping_add((d as u64).wrapping_shl(lane_bits * lane as u32));
            }
            neighbor_deltas.push(delta_key);
        }
        SeparationGrid {
            dim,
            delta,
            bias: -lo_idx,
            lane_bits,
            neighbor_deltas,
            heads: HashMap::with_hasher(CellHasherBuilder),
            next: Vec::new(),
            coords: Vec::new(),
            kept: 0,
        }
    }

    fn key_of(&self, v: &[f64]) -> u64 {
        let mut key = 0u64;
        for (lane, &c) in v.iter().enumerate() {
            let idx = (c / self.delta).floor() as i64 + self.bias;
            debug_assert!(idx >= 1 && (idx as u64) < (1u64 << self.lane_bits) - 1);
            key |= (idx as u64) << (self.lane_bits * lane as u32);
        }
        key
    }

    fn try_insert(&mut self, v: &[f64]) -> bool {
        debug_assert_eq!(v.len(), self.dim);
        let key = self.key_of(v);
        let d_sq = self.delta * self.delta;
        for &delta_key in &self.neighbor_deltas {
            let probe = key.wrapping_add(delta_key);
            let Some(&head) = self.heads.get(&probe) else {
                continue;
            };
            let mut at = head;
            while at != CHAIN_END {
                let start = at as usize * self.dim;
                if dist_sq(&self.coords[start..start + self.dim], v) < d_sq {
                    return false;
                }
                at = self.next[at as usize];
            }
        }
        let idx = self.next.len() as u32;
        self.coords.extend_from_slice(v);
        let prev = self.heads.insert(key, idx).unwrap_or(CHAIN_END);
        self.next.push(prev);
        self.kept += 1;
        true
    }
}

/// Estimates the box-counting dimension of the embedding set from a
/// ladder of resolutions: at each `(measure, scale)` level, embeddings
/// with window `slack * scale` are streamed and greedily thinned to a
/// `scale`-separated set in the `d * (k+1)`-dimensional tuple space; the
/// slope of `log count` against `log (1/scale)` is the estimate.
pub fn minkowski_dim_embedding(
    levels: &[(&DiscreteMeasure, f64)],
    tree: &Tree,
    t: f64,
    slack: f64,
) -> Result<DimensionEstimate, ScalingError> {
    if levels.len() < 2 {
        return Err(ScalingError::LadderTooShort {
            got: levels.len(),
            need: 2,
        });
    }
    let vertices = tree.vertex_count();
    let mut scales = Vec::with_capacity(levels.len());
    let mut counts = Vec::with_capacity(levels.len());
    for &(m, scale) in levels {
        assert!(scale > 0.0, "level scale must be positive");
        let gaps = GapSpec::scalar_indicator(t, slack * scale)?;
        let tuple_dim = m.dim() * vertices;
        let lo = m.coords().iter().copied().fold(f64::INFINITY, f64::min);
        let hi = m.coords().iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut grid = SeparationGrid::new(tuple_dim, scale, lo, hi);
        let mut tuple_coords = vec![0.0; tuple_dim];
        for_each_embedding(m, tree, &gaps, false, |tuple| {
            for (v, &p) in tuple.iter().enumerate() {
                tuple_coords[v * m.dim()..(v + 1) * m.dim()].copy_from_slice(m.point(p));
            }
            grid.try_insert(&tuple_coords);
            true
        })?;
        scales.push(scale);
        counts.push(grid.kept);
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (&s, &c) in scales.iter().zip(&counts) {
        if c > 0 {
            xs.push((1.0 / s).ln());
            ys.push((c as f64).ln());
        }
    }
    if xs.len() < 2 {
        return Err(ScalingError::NoEmbeddingsFound);
    }
    let fit = ols_fit(&xs, &ys);
    Ok(DimensionEstimate {
        scales,
        counts,
        slope: fit.slope,
        kind: DimensionKind::Packing,
    })
}

/// Occupied gap-space volume at one bin resolution.
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaVolume {
    pub bin_size: f64,
    pub occupied_bins: u64,
    pub occupied_volume: f64,
}

const LAMBDA_EDGE_LIMIT: usize = 4;

/// Maps seeded weight-distributed sample tuples to their edge-wise
/// dot-product vectors, bins the vectors at each resolution, and reports
/// `occupied_bins * eta^k`. A sequence that stabilizes at a positive
/// value as `eta` shrinks is evidence that the gap set has positive
/// measure.
pub fn lambda_measure_lower(
    m: &DiscreteMeasure,
    tree: &Tree,
    bin_sizes: &[f64],
    samples: usize,
    seed: u64,
) -> Result<Vec<LambdaVolume>, ScalingError> {
    let k = tree.edge_count();
    if k == 0 || k > LAMBDA_EDGE_LIMIT {
        return Err(ScalingError::TreeTooLarge {
            k,
            limit: LAMBDA_EDGE_LIMIT,
        });
    }
    if samples == 0 {
        return Err(ScalingError::NoSamples);
    }
    // inverse-CDF sampling of atom indices by weight
    let mut cum = Vec::with_capacity(m.len());
    let mut acc = 0.0;
    for &w in m.weights() {
        acc += w;
        cum.push(acc);
    }
    let total = *cum.last().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw = |rng: &mut ChaCha8Rng| -> usize {
        let u = rng.gen::<f64>() * total;
        cum.partition_point(|&c| c <= u).min(m.len() - 1)
    };
    let vertices = tree.vertex_count();
    let mut gap_vectors: Vec<Vec<f64>> = Vec::with_capacity(samples);
    let mut tuple = vec![0usize; vertices];
    for _ in 0..samples {
        for slot in tuple.iter_mut() {
            *slot = draw(&mut rng);
        }
        let gaps: Vec<f64> = tree
            .edges()
            .iter()
            .map(|&(a, b)| m.dot(tuple[a], tuple[b]))
            .collect();
        gap_vectors.push(gaps);
    }
    let mut out = Vec::with_capacity(bin_sizes.len());
    for &eta in bin_sizes {
        assert!(eta > 0.0, "bin size must be positive");
        let mut bins: HashSet<Vec<i64>> = HashSet::new();
        for v in &gap_vectors {
            let key: Vec<i64> = v.iter().map(|&x| (x / eta).floor() as i64).collect();
            bins.insert(key);
        }
        let occupied = bins.len() as u64;
        if occupied as usize * 2 > samples {
            return Err(ScalingError::BinTooSmall {
                bin_size: eta,
                occupied,
                samples,
            });
        }
        out.push(LambdaVolume {
            bin_size: eta,
            occupied_bins: occupied,
            occupied_volume: occupied as f64 * eta.powi(k as i32),
        });
    }
    Ok(out)
}
