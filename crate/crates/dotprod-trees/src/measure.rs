//! Weighted point clouds approximating compact sets that carry measures
//! of prescribed dimension: self-similar Cantor constructions, products,
//! seeded uniform reference clouds, and empirical two-sided ball-mass
//! (regularity) checks.

use crate::numeric::{dist_sq, dot, pairwise_sum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use thiserror::Error;

/// Seeded generator identifier recorded in metadata so experiments are
/// reproducible across machines.
pub const GENERATOR_ID: &str = "chacha8/rand-0.8/coordinate-major";

const DEFAULT_POINT_CAP: usize = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeasureError {
    #[error("ratio {ratio} with {branches} branches overlaps: branches * ratio must be <= 1")]
    OverlappingBranches { ratio: f64, branches: u32 },
    #[error("ratio must lie in (0, 1/2], got {0}")]
    BadRatio(f64),
    #[error("need at least 2 branches, got {0}")]
    BadBranches(u32),
    #[error("construction would produce {requested} points, cap is {cap}")]
    TooManyPoints { requested: u128, cap: usize },
    #[error("offset c must lie in (0, 1), got {0}")]
    BadOffset(f64),
    #[error("need at least one point")]
    NoPoints,
    #[error("point {index} has {got} coordinates, expected {expected}")]
    BadPointLength {
        index: usize,
        got: usize,
        expected: usize,
    },
    #[error("weight {index} is negative or not finite: {value}")]
    BadWeight { index: usize, value: f64 },
    #[error("coordinate of point {index} is not finite")]
    BadCoordinate { index: usize },
    #[error("weights sum to {sum}, expected 1 within 1e-12")]
    NotNormalized { sum: f64 },
    #[error("radius list is empty")]
    EmptyRadiusList,
}

/// Construction descriptor carried alongside a measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct MeasureMeta {
    pub family: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nominal_s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ratio: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub branches: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub level: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub offset_c: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generator: Option<String>,
    /// Diameter of the construction cells at the deepest level, after
    /// any box shift. Dimension-of-embedding experiments use this as the
    /// separation scale of the cloud.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub base_scale: Option<f64>,
}

/// A finite weighted point cloud in `[0,1]^d` standing in for a measure.
/// Weights are nonnegative and sum to 1 within 1e-12.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure {
    dim: usize,
    coords: Vec<f64>, // row-major, len = n * dim
    weights: Vec<f64>,
    meta: MeasureMeta,
}

impl DiscreteMeasure {
    pub fn new(
        dim: usize,
        coords: Vec<f64>,
        weights: Vec<f64>,
        meta: MeasureMeta,
    ) -> Result<Self, MeasureError> {
        if weights.is_empty() || dim == 0 {
            return Err(MeasureError::NoPoints);
        }
        if coords.len() != weights.len() * dim {
            return Err(MeasureError::BadPointLength {
                index: coords.len() / dim.max(1),
                got: coords.len() % dim,
                expected: dim,
            });
        }
        for (i, w) in weights.iter().enumerate() {
            if !w.is_finite() || *w < 0.0 {
                return Err(MeasureError::BadWeight {
                    index: i,
                    value: *w,
                });
            }
        }
        for (i, chunk) in coords.chunks(dim).enumerate() {
            if chunk.iter().any(|c| !c.is_finite()) {
                return Err(MeasureError::BadCoordinate { index: i });
            }
        }
        let sum = pairwise_sum(&weights);
        if (sum - 1.0).abs() > 1e-12 {
            return Err(MeasureError::NotNormalized { sum });
        }
        Ok(DiscreteMeasure {
            dim,
            coords,
            weights,
            meta,
        })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn meta(&self) -> &MeasureMeta {
        &self.meta
    }

    pub fn meta_mut(&mut self) -> &mut MeasureMeta {
        &mut self.meta
    }

    /// Dot product of points `i` and `j`.
    pub fn dot(&self, i: usize, j: usize) -> f64 {
        dot(self.point(i), self.point(j))
    }

    /// Largest Euclidean norm over the support.
    pub fn max_norm(&self) -> f64 {
        (0..self.len())
            .map(|i| dot(self.point(i), self.point(i)).sqrt())
            .fold(0.0, f64::max)
    }

    /// Smallest pairwise Euclidean distance; 0 for a single point.
    pub fn min_gap(&self) -> f64 {
        let n = self.len();
        if n < 2 {
            return 0.0;
        }
        let mut best = f64::INFINITY;
        for i in 0..n {
            for j in (i + 1)..n {
                best = best.min(dist_sq(self.point(i), self.point(j)));
            }
        }
        best.sqrt()
    }

    pub fn diameter(&self) -> f64 {
        let n = self.len();
        let mut best = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                best = best.max(dist_sq(self.point(i), self.point(j)));
            }
        }
        best.sqrt()
    }

    /// Mass of the closed Euclidean ball of radius `r` around `center`.
    pub fn ball_mass(&self, center: &[f64], r: f64) -> f64 {
        let r2 = r * r;
        let mut mass = 0.0;
        for i in 0..self.len() {
            if dist_sq(self.point(i), center) <= r2 {
                mass += self.weights[i];
            }
        }
        mass
    }
}

/// Self-similar Cantor construction on `[0,1]`: every interval of a
/// level splits into `branches` children of relative length `ratio`,
/// evenly spread so the first child starts at the left endpoint and the
/// last ends at the right endpoint. Atoms sit at the left endpoints of
/// the level-`level` intervals with equal weight.
///
/// The nominal dimension `log(branches) / log(1/ratio)` is recorded in
/// the metadata.
pub fn cantor_1d(ratio: f64, branches: u32, level: u32) -> Result<DiscreteMeasure, MeasureError> {
    if !(ratio > 0.0 && ratio <= 0.5) {
        return Err(MeasureError::BadRatio(ratio));
    }
    if branches < 2 {
        return Err(MeasureError::BadBranches(branches));
    }
    if branches as f64 * ratio > 1.0 {
        return Err(MeasureError::OverlappingBranches { ratio, branches });
    }
    let n = (branches as u128).pow(level);
    if n > DEFAULT_POINT_CAP as u128 {
        return Err(MeasureError::TooManyPoints {
            requested: n,
            cap: DEFAULT_POINT_CAP,
        });
    }
    let n = n as usize;
    let spread = (1.0 - ratio) / (branches - 1) as f64;
    let mut coords = vec![0.0f64; n];
    let mut count = 1usize;
    let mut scale = 1.0f64;
    for _ in 0..level {
        // expand each current point into `branches` children
        for parent in (0..count).rev() {
            let base = coords[parent];
            for b in 0..branches as usize {
                coords[parent * branches as usize + b] = base + b as f64 * spread * scale;
            }
        }
        count *= branches as usize;
        scale *= ratio;
    }
    let w = 1.0 / n as f64;
    let s = (branches as f64).ln() / (1.0 / ratio).ln();
    DiscreteMeasure::new(
        1,
        coords,
        vec![w; n],
        MeasureMeta {
            family: "cantor1d".into(),
            nominal_s: Some(s),
            ratio: Some(ratio),
            branches: Some(branches),
            level: Some(level),
            base_scale: Some(ratio.powi(level as i32)),
            ..Default::default()
        },
    )
}

/// Product of two measures: dimensions add, points concatenate (first
/// factor outer, second inner), weights multiply.
pub fn product_measure(
    m1: &DiscreteMeasure,
    m2: &DiscreteMeasure,
) -> Result<DiscreteMeasure, MeasureError> {
    product_measure_with_cap(m1, m2, DEFAULT_POINT_CAP)
}

pub fn product_measure_with_cap(
    m1: &DiscreteMeasure,
    m2: &DiscreteMeasure,
    cap: usize,
) -> Result<DiscreteMeasure, MeasureError> {
    let n = m1.len() as u128 * m2.len() as u128;
    if n > cap as u128 {
        return Err(MeasureError::TooManyPoints { requested: n, cap });
    }
    let dim = m1.dim + m2.dim;
    let mut coords = Vec::with_capacity(n as usize * dim);
    let mut weights = Vec::with_capacity(n as usize);
    for i in 0..m1.len() {
        for j in 0..m2.len() {
            coords.extend_from_slice(m1.point(i));
            coords.extend_from_slice(m2.point(j));
            weights.push(m1.weights[i] * m2.weights[j]);
        }
    }
    let nominal_s = match (m1.meta.nominal_s, m2.meta.nominal_s) {
        (Some(a), Some(b)) => Some(a + b),
        _ => None,
    };
    let base_scale = match (m1.meta.base_scale, m2.meta.base_scale) {
        (Some(a), Some(b)) => Some(a.max(b)),
        _ => None,
    };
    let offset_c = if m1.meta.offset_c == m2.meta.offset_c {
        m1.meta.offset_c
    } else {
        None
    };
    DiscreteMeasure::new(
        dim,
        coords,
        weights,
        MeasureMeta {
            family: format!("product({} x {})", m1.meta.family, m2.meta.family),
            nominal_s,
            ratio: if m1.meta.ratio == m2.meta.ratio {
                m1.meta.ratio
            } else {
                None
            },
            branches: if m1.meta.branches == m2.meta.branches {
                m1.meta.branches
            } else {
                None
            },
            level: if m1.meta.level == m2.meta.level {
                m1.meta.level
            } else {
                None
            },
            offset_c,
            base_scale,
            ..Default::default()
        },
    )
}

/// Affine map `x -> c + (1 - c) x` applied coordinatewise, carrying
/// `[0,1]^d` onto `[c,1]^d`. Weights are unchanged.
pub fn shift_to_box(m: &DiscreteMeasure, c: f64) -> Result<DiscreteMeasure, MeasureError> {
    if !(c > 0.0 && c < 1.0) {
        return Err(MeasureError::BadOffset(c));
    }
    let coords = m.coords.iter().map(|&x| c + (1.0 - c) * x).collect();
    let mut meta = m.meta.clone();
    meta.offset_c = Some(c);
    meta.base_scale = m.meta.base_scale.map(|s| s * (1.0 - c));
    DiscreteMeasure::new(m.dim, coords, m.weights.clone(), meta)
}

/// `n` seeded uniform points on `[c,1]^d` with equal weights. The same
/// seed produces a bit-identical cloud.
pub fn uniform_cube_sample(
    n: usize,
    d: usize,
    c: f64,
    seed: u64,
) -> Result<DiscreteMeasure, MeasureError> {
    if n == 0 {
        return Err(MeasureError::NoPoints);
    }
    if !(0.0..1.0).contains(&c) {
        return Err(MeasureError::BadOffset(c));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coords = Vec::with_capacity(n * d);
    for _ in 0..n * d {
        coords.push(c + (1.0 - c) * rng.gen::<f64>());
    }
    DiscreteMeasure::new(
        d,
        coords,
        vec![1.0 / n as f64; n],
        MeasureMeta {
            family: "uniform-cube".into(),
            nominal_s: Some(d as f64),
            offset_c: Some(c),
            seed: Some(seed),
            generator: Some(GENERATOR_ID.into()),
            ..Default::default()
        },
    )
}

/// Empirical two-sided regularity probe: extremes of
/// `massOfBall(x, r) / r^s` over sampled support centers and radii.
#[derive(Debug, Clone, PartialEq)]
pub struct RegularityReport {
    pub exponent_s: f64,
    pub max_upper_ratio: f64,
    pub min_lower_ratio: f64,
    pub radii: Vec<f64>,
}

/// Samples `sample_centers` support atoms (all of them when the cloud is
/// small enough) and reports the extreme ratios `ballMass / r^s` over
/// all sampled centers and radii.
pub fn regularity_check(
    m: &DiscreteMeasure,
    s: f64,
    radii: &[f64],
    sample_centers: usize,
    seed: u64,
) -> Result<RegularityReport, MeasureError> {
    if radii.is_empty() {
        return Err(MeasureError::EmptyRadiusList);
    }
    let centers: Vec<usize> = if sample_centers >= m.len() {
        (0..m.len()).collect()
    } else {
        // partial Fisher-Yates: deterministic sample without replacement
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut idx: Vec<usize> = (0..m.len()).collect();
        for i in 0..sample_centers {
            let j = rng.gen_range(i..idx.len());
            idx.swap(i, j);
        }
        idx.truncate(sample_centers);
        idx
    };
    let mut max_ratio = f64::NEG_INFINITY;
    let mut min_ratio = f64::INFINITY;
    for &ci in &centers {
        let center = m.point(ci).to_vec();
        for &r in radii {
            let ratio = m.ball_mass(&center, r) / r.powf(s);
            max_ratio = max_ratio.max(ratio);
            min_ratio = min_ratio.min(ratio);
        }
    }
    Ok(RegularityReport {
        exponent_s: s,
        max_upper_ratio: max_ratio,
        min_lower_ratio: min_ratio,
        radii: radii.to_vec(),
    })
}

#[derive(Debug, Error)]
pub enum MeasureFileError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("invalid measure: {0}")]
    Invalid(#[from] MeasureError),
    #[error("invalid meta json: {0}")]
    Meta(#[from] serde_json::Error),
}

/// Sidecar path for a measure CSV: `m.csv` -> `m.meta.json`.
pub fn meta_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("meta.json")
}

/// Metadata as a deterministic JSON document (17-significant-digit
/// floats, fields in declaration order).
pub fn meta_json(meta: &MeasureMeta) -> crate::jsonfmt::Json {
    use crate::jsonfmt::Json;
    let mut doc = Json::obj(vec![("family", Json::str(&meta.family))]);
    if let Some(v) = meta.nominal_s {
        doc.push("nominal_s", Json::Num(v));
    }
    if let Some(v) = meta.ratio {
        doc.push("ratio", Json::Num(v));
    }
    if let Some(v) = meta.branches {
        doc.push("branches", Json::UInt(v as u128));
    }
    if let Some(v) = meta.level {
        doc.push("level", Json::UInt(v as u128));
    }
    if let Some(v) = meta.offset_c {
        doc.push("offset_c", Json::Num(v));
    }
    if let Some(v) = meta.seed {
        doc.push("seed", Json::UInt(v as u128));
    }
    if let Some(v) = &meta.generator {
        doc.push("generator", Json::str(v));
    }
    if let Some(v) = meta.base_scale {
        doc.push("base_scale", Json::Num(v));
    }
    doc
}

/// Writes the atom table as CSV (`x1,...,xd,w`, 17 significant digits)
/// plus the JSON metadata sidecar.
pub fn write_measure(m: &DiscreteMeasure, csv_path: &Path) -> Result<(), MeasureFileError> {
    use std::io::Write;
    let mut out = std::io::BufWriter::new(std::fs::File::create(csv_path)?);
    let header: Vec<String> = (1..=m.dim).map(|i| format!("x{i}")).collect();
    writeln!(out, "{},w", header.join(","))?;
    for i in 0..m.len() {
        for c in m.point(i) {
            write!(out, "{},", crate::jsonfmt::fmt_f64(*c))?;
        }
        writeln!(out, "{}", crate::jsonfmt::fmt_f64(m.weights[i]))?;
    }
    out.flush()?;
    std::fs::write(meta_path(csv_path), meta_json(&m.meta).to_pretty_string())?;
    Ok(())
}

/// Reads a measure CSV written by [`write_measure`]; the metadata
/// sidecar is optional.
pub fn read_measure(csv_path: &Path) -> Result<DiscreteMeasure, MeasureFileError> {
    let text = std::fs::read_to_string(csv_path)?;
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(MeasureFileError::Syntax {
        line: 1,
        message: "empty file".into(),
    })?;
    let cols: Vec<&str> = header.split(',').collect();
    if cols.len() < 2 || cols.last() != Some(&"w") {
        return Err(MeasureFileError::Syntax {
            line: 1,
            message: format!("expected header 'x1,...,xd,w', got '{header}'"),
        });
    }
    let dim = cols.len() - 1;
    let mut coords = Vec::new();
    let mut weights = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != dim + 1 {
            return Err(MeasureFileError::Syntax {
                line: line_no,
                message: format!("expected {} fields, got {}", dim + 1, fields.len()),
            });
        }
        for (fi, field) in fields.iter().enumerate() {
            let v: f64 = field.trim().parse().map_err(|_| MeasureFileError::Syntax {
                line: line_no,
                message: format!("invalid number '{field}'"),
            })?;
            if fi < dim {
                coords.push(v);
            } else {
                weights.push(v);
            }
        }
    }
    let meta = match std::fs::read_to_string(meta_path(csv_path)) {
        Ok(text) => serde_json::from_str(&text)?,
        Err(_) => MeasureMeta {
            family: "file".into(),
            ..Default::default()
        },
    };
    Ok(DiscreteMeasure::new(dim, coords, weights, meta)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn middle_thirds_level_one() {
        let m = cantor_1d(1.0 / 3.0, 2, 1).unwrap();
        assert_eq!(m.len(), 2);
        assert!((m.point(0)[0] - 0.0).abs() < 1e-15);
        assert!((m.point(1)[0] - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(m.weights(), &[0.5, 0.5]);
    }

    #[test]
    fn cantor_level_zero_is_single_atom() {
        let m = cantor_1d(1.0 / 3.0, 2, 0).unwrap();
        assert_eq!(m.len(), 1);
        assert_eq!(m.point(0)[0], 0.0);
        assert_eq!(m.weights()[0], 1.0);
    }

    #[test]
    fn three_branch_quarter_ratio_level_two() {
        let m = cantor_1d(0.25, 3, 2).unwrap();
        assert_eq!(m.len(), 9);
        let s = m.meta().nominal_s.unwrap();
        assert!((s - 3f64.ln() / 4f64.ln()).abs() < 1e-12);
        // hand-expanded: level-1 starts {0, 3/8, 3/4}, level-2 offsets
        // within each cell {0, 3/32, 6/32}
        let expected = [
            0.0,
            3.0 / 32.0,
            6.0 / 32.0,
            12.0 / 32.0,
            15.0 / 32.0,
            18.0 / 32.0,
            24.0 / 32.0,
            27.0 / 32.0,
            30.0 / 32.0,
        ];
        for (i, &e) in expected.iter().enumerate() {
            assert!((m.point(i)[0] - e).abs() < 1e-15, "atom {i}");
        }
    }

    #[test]
    fn overlapping_branches_rejected() {
        assert!(matches!(
            cantor_1d(0.4, 3, 1),
            Err(MeasureError::OverlappingBranches { .. })
        ));
    }

    #[test]
    fn min_gap_lower_bound_formula() {
        for &(ratio, branches) in &[(1.0 / 3.0, 2u32), (0.25, 3), (0.2, 4)] {
            for level in 1..=4u32 {
                let m = cantor_1d(ratio, branches, level).unwrap();
                let bound =
                    ratio.powi(level as i32) * (1.0 - branches as f64 * ratio + ratio);
                assert!(bound > 0.0);
                assert!(
                    m.min_gap() >= bound - 1e-15,
                    "ratio={ratio} branches={branches} level={level}: gap {} < bound {bound}",
                    m.min_gap()
                );
            }
        }
    }

    #[test]
    fn product_of_middle_thirds() {
        let m1 = cantor_1d(1.0 / 3.0, 2, 1).unwrap();
        let m = product_measure(&m1, &m1).unwrap();
        assert_eq!(m.dim(), 2);
        assert_eq!(m.len(), 4);
        for w in m.weights() {
            assert!((w - 0.25).abs() < 1e-15);
        }
        let sq = product_measure(
            &cantor_1d(0.25, 3, 2).unwrap(),
            &cantor_1d(0.25, 3, 2).unwrap(),
        )
        .unwrap();
        let s = sq.meta().nominal_s.unwrap();
        assert!((s - 2.0 * 3f64.ln() / 4f64.ln()).abs() < 1e-12);
        assert!(s > 1.5);
    }

    #[test]
    fn product_of_single_atoms() {
        let a = cantor_1d(0.25, 3, 0).unwrap();
        let m = product_measure(&a, &a).unwrap();
        assert_eq!(m.len(), 1);
        assert_eq!(m.weights()[0], 1.0);
    }

    #[test]
    fn product_point_count_and_weights_multiply() {
        let m1 = cantor_1d(1.0 / 3.0, 2, 2).unwrap();
        let m2 = cantor_1d(0.25, 3, 1).unwrap();
        let m = product_measure(&m1, &m2).unwrap();
        assert_eq!(m.len(), m1.len() * m2.len());
        assert!((m.weights()[0] - m1.weights()[0] * m2.weights()[0]).abs() < 1e-18);
    }

    #[test]
    fn shift_examples() {
        let atom = cantor_1d(0.25, 2, 0).unwrap();
        let shifted = shift_to_box(&atom, 0.5).unwrap();
        assert_eq!(shifted.point(0)[0], 0.5);

        let m = DiscreteMeasure::new(
            1,
            vec![1.0],
            vec![1.0],
            MeasureMeta {
                family: "atoms".into(),
                ..Default::default()
            },
        )
        .unwrap();
        for c in [0.1, 0.5, 0.9] {
            assert_eq!(shift_to_box(&m, c).unwrap().point(0)[0], 1.0);
        }

        let thirds = cantor_1d(1.0 / 3.0, 2, 1).unwrap();
        let s = shift_to_box(&thirds, 0.4).unwrap();
        assert!((s.point(0)[0] - 0.4).abs() < 1e-15);
        assert!((s.point(1)[0] - 0.8).abs() < 1e-15);
    }

    #[test]
    fn shift_composes_to_single_affine_map() {
        let m = cantor_1d(1.0 / 3.0, 2, 3).unwrap();
        let twice = shift_to_box(&shift_to_box(&m, 0.3).unwrap(), 0.5).unwrap();
        // c1 then c2 equals x -> (c2 + (1-c2) c1) + (1-c2)(1-c1) x
        let c = 0.5 + 0.5 * 0.3;
        let scale = 0.5 * 0.7;
        for i in 0..m.len() {
            let expect = c + scale * m.point(i)[0];
            assert!((twice.point(i)[0] - expect).abs() <= 1e-15);
        }
    }

    #[test]
    fn uniform_sample_is_deterministic() {
        let a = uniform_cube_sample(100, 2, 0.5, 7).unwrap();
        let b = uniform_cube_sample(100, 2, 0.5, 7).unwrap();
        assert_eq!(a, b);
        let single = uniform_cube_sample(1, 3, 0.2, 9).unwrap();
        assert_eq!(single.weights()[0], 1.0);
        for &x in single.point(0) {
            assert!((0.2..=1.0).contains(&x));
        }
    }

    #[test]
    fn normalization_survives_operations() {
        let m = cantor_1d(0.25, 3, 3).unwrap();
        let p = product_measure(&m, &m).unwrap();
        let s = shift_to_box(&p, 0.3).unwrap();
        for mm in [&m, &p, &s] {
            assert!((pairwise_sum(mm.weights()) - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn regularity_single_atom() {
        let m = shift_to_box(&cantor_1d(0.25, 2, 0).unwrap(), 0.5).unwrap();
        let rep = regularity_check(&m, 0.0, &[0.1, 0.01], 10, 0).unwrap();
        assert_eq!(rep.max_upper_ratio, 1.0);
        assert_eq!(rep.min_lower_ratio, 1.0);
        assert!(matches!(
            regularity_check(&m, 0.0, &[], 10, 0),
            Err(MeasureError::EmptyRadiusList)
        ));
    }

    #[test]
    fn regularity_middle_thirds() {
        let m = cantor_1d(1.0 / 3.0, 2, 6).unwrap();
        let s = 2f64.ln() / 3f64.ln();
        let radii: Vec<f64> = (1..=5).map(|j| 3f64.powi(-j)).collect();
        let rep = regularity_check(&m, s, &radii, m.len(), 0).unwrap();
        assert!(rep.max_upper_ratio <= 4.0, "{}", rep.max_upper_ratio);
        assert!(rep.min_lower_ratio >= 0.25, "{}", rep.min_lower_ratio);
    }

    #[test]
    fn regularity_uniform_cube() {
        let m = uniform_cube_sample(10_000, 2, 0.0, 1).unwrap();
        let radii: Vec<f64> = (1..=4).map(|j| 2f64.powi(-j)).collect();
        let rep = regularity_check(&m, 2.0, &radii, 64, 3).unwrap();
        assert!(rep.max_upper_ratio <= 8.0, "{}", rep.max_upper_ratio);
        assert!(rep.min_lower_ratio >= 0.125, "{}", rep.min_lower_ratio);
    }

    #[test]
    fn measure_csv_round_trip() {
        let dir = std::env::temp_dir().join("dotprod-trees-measure-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("m.csv");
        let m = shift_to_box(&cantor_1d(0.25, 3, 2).unwrap(), 0.3).unwrap();
        write_measure(&m, &path).unwrap();
        let back = read_measure(&path).unwrap();
        assert_eq!(m, back);
    }
}
