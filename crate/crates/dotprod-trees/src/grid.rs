//! Uniform spatial grid used to prune kernel evaluations in the edge
//! sums. Points are bucketed into cubic cells; for a pinned point `x`
//! and window `(t - eps, t + eps)`, a whole cell can be skipped when the
//! exact range of `x . y` over the cell's bounding box misses the
//! window.

use crate::measure::DiscreteMeasure;

/// Cell side `eps / (sqrt(d) * max_norm)`: the dot-product spread of a
/// single cell against any support point is then at most `eps`, so a
/// cell that passes the window test contributes mostly in-window points.
pub fn default_cell_size(m: &DiscreteMeasure, epsilon: f64) -> f64 {
    let norm = m.max_norm().max(f64::MIN_POSITIVE);
    epsilon / ((m.dim() as f64).sqrt() * norm)
}

#[derive(Debug, Clone)]
struct Bucket {
    /// Bounding box of the cell, `dim` lows then `dim` highs.
    lo: Vec<f64>,
    hi: Vec<f64>,
    /// Range into `point_order`.
    start: usize,
    end: usize,
}

/// Points grouped by grid cell, with per-cell bounding boxes.
#[derive(Debug, Clone)]
pub struct DotGrid {
    dim: usize,
    cell_size: f64,
    /// Guaranteed upper bound on the dot-product spread of one cell
    /// against any support point.
    spread_bound: f64,
    point_order: Vec<usize>,
    buckets: Vec<Bucket>,
}

impl DotGrid {
    pub fn build(m: &DiscreteMeasure, epsilon: f64) -> Self {
        Self::build_with_cell(m, default_cell_size(m, epsilon))
    }

    pub fn build_with_cell(m: &DiscreteMeasure, cell_size: f64) -> Self {
        let dim = m.dim();
        let n = m.len();
        let mut keyed: Vec<(Vec<i64>, usize)> = (0..n)
            .map(|i| {
                let key: Vec<i64> = m
                    .point(i)
                    .iter()
                    .map(|&c| (c / cell_size).floor() as i64)
                    .collect();
                (key, i)
            })
            .collect();
        keyed.sort(); // lexicographic by cell key, then point index
        let mut point_order = Vec::with_capacity(n);
        let mut buckets = Vec::new();
        let mut start = 0usize;
        for (idx, (key, point)) in keyed.iter().enumerate() {
            point_order.push(*point);
            let is_last = idx + 1 == n;
            if is_last || keyed[idx + 1].0 != *key {
                let lo: Vec<f64> = key.iter().map(|&k| k as f64 * cell_size).collect();
                let hi: Vec<f64> = key.iter().map(|&k| (k + 1) as f64 * cell_size).collect();
                buckets.push(Bucket {
                    lo,
                    hi,
                    start,
                    end: idx + 1,
                });
                start = idx + 1;
            }
        }
        let spread_bound = cell_size * (dim as f64).sqrt() * m.max_norm();
        DotGrid {
            dim,
            cell_size,
            spread_bound,
            point_order,
            buckets,
        }
    }

    pub fn cell_size(&self) -> f64 {
        self.cell_size
    }

    /// The bound derived from the cell size: dot-product spread of any
    /// cell against any support point is at most this.
    pub fn spread_bound(&self) -> f64 {
        self.spread_bound
    }

    pub fn bucket_count(&self) -> usize {
        self.buckets.len()
    }

    /// Calls `f(point_index)` for every point in a cell whose exact
    /// dot-product interval against `x` intersects the open window
    /// `(lo, hi)`. Iteration order is deterministic: buckets in key
    /// order, points ascending within a bucket.
    pub fn for_each_candidate<F: FnMut(usize)>(&self, x: &[f64], lo: f64, hi: f64, mut f: F) {
        debug_assert_eq!(x.len(), self.dim);
        for bucket in &self.buckets {
            let mut min = 0.0;
            let mut max = 0.0;
            for d in 0..self.dim {
                let a = x[d] * bucket.lo[d];
                let b = x[d] * bucket.hi[d];
                if a <= b {
                    min += a;
                    max += b;
                } else {
                    min += b;
                    max += a;
                }
            }
            if max <= lo || min >= hi {
                continue;
            }
            for &p in &self.point_order[bucket.start..bucket.end] {
                f(p);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::uniform_cube_sample;

    #[test]
    fn every_in_window_point_is_yielded() {
        let m = uniform_cube_sample(500, 2, 0.3, 11).unwrap();
        let grid = DotGrid::build(&m, 0.05);
        let x = m.point(0).to_vec();
        let t = 0.8;
        let (lo, hi) = (t - 0.05, t + 0.05);
        let mut candidates = vec![false; m.len()];
        grid.for_each_candidate(&x, lo, hi, |p| candidates[p] = true);
        for j in 0..m.len() {
            let d = m.dot(0, j);
            if d > lo && d < hi {
                assert!(candidates[j], "point {j} with dot {d} was pruned");
            }
        }
    }

    #[test]
    fn spread_bound_holds() {
        let m = uniform_cube_sample(200, 2, 0.3, 3).unwrap();
        let grid = DotGrid::build(&m, 0.02);
        assert!(grid.spread_bound() <= 0.02 + 1e-12);
    }

    #[test]
    fn skips_something_for_narrow_windows() {
        let m = uniform_cube_sample(500, 2, 0.3, 11).unwrap();
        let grid = DotGrid::build(&m, 0.02);
        let x = m.point(3).to_vec();
        let mut seen = 0usize;
        grid.for_each_candidate(&x, 0.78, 0.82, |_| seen += 1);
        assert!(seen < m.len(), "no cell was pruned");
    }
}
