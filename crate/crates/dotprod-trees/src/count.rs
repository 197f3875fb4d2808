//! The mollified embedding count `V(T, t, eps)` computed two ways: a
//! brute-force sum over all ordered tuples (the oracle), and the
//! leaf-ripping dynamic program that exploits the tree structure.
//!
//! Leaf ripping is variable elimination: removing a leaf `y` with edge
//! `(x, y)` replaces the potential at `y` by the weighted edge sum
//!
//! ```text
//! message(p) = sum_q  w(q) * rho_eps(p . q - t_edge) * f(q)
//! ```
//!
//! multiplied into the potential at `x`. After all `k` edges are
//! ripped, the answer is the weight-averaged final potential. The two
//! routes agree to floating-point accumulation error; the invariant is
//! exercised heavily in the tests and the acceptance suite.

use crate::grid::DotGrid;
use crate::kernel::{GapError, GapSpec, Kernel};
use crate::measure::DiscreteMeasure;
use crate::numeric::{dot, pairwise_sum, Kahan};
use crate::tree::Tree;
use rayon::prelude::*;
use std::sync::atomic::{AtomicU64, Ordering};
use std::time::{Duration, Instant};
use thiserror::Error;

/// Default cap on the ordered tuple space `n^(k+1)` of the brute-force
/// route. Override per call or via the `DOTPROD_TREES_CAP` environment
/// variable at the CLI layer.
pub const DEFAULT_TUPLE_CAP: u128 = 1_000_000_000;

/// Default cap on materialized embedding enumerations.
pub const DEFAULT_ENUMERATION_CAP: usize = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CountError {
    #[error("tuple space n^(k+1) = {tuple_space} exceeds cap {cap}")]
    TupleSpaceTooLarge { tuple_space: u128, cap: u128 },
    #[error("enumeration exceeds cap of {cap} tuples")]
    OutputTooLarge { cap: usize },
    #[error(transparent)]
    Gap(#[from] GapError),
    #[error("leaf order entry {vertex} is not a leaf of the remaining tree")]
    LeafOrderInvalid { vertex: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CountMethod {
    Oracle,
    TreeDp,
}

impl CountMethod {
    pub fn name(&self) -> &'static str {
        match self {
            CountMethod::Oracle => "oracle",
            CountMethod::TreeDp => "tree_dp",
        }
    }
}

/// Value of the count plus bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct CountResult {
    pub value: f64,
    pub method: CountMethod,
    /// `n^(k+1)`, the size of the ordered tuple space the count ranges
    /// over (whether or not it was enumerated).
    pub tuple_space_size: u128,
    pub elapsed: Duration,
    pub kernel_evals: u64,
}

fn tuple_space(n: usize, vertices: usize) -> u128 {
    (n as u128)
        .checked_pow(vertices as u32)
        .unwrap_or(u128::MAX)
}

/// Brute-force oracle: the exact sum over all `n^(k+1)` ordered tuples
/// (repetitions allowed) of the weight product times the edge-kernel
/// product. Factors are accumulated vertex by vertex so a partial
/// product that is exactly zero skips its whole subtree of tuples,
/// which changes nothing in the sum.
pub fn naive_count(
    m: &DiscreteMeasure,
    tree: &Tree,
    gaps: &GapSpec,
) -> Result<CountResult, CountError> {
    naive_count_capped(m, tree, gaps, DEFAULT_TUPLE_CAP)
}

pub fn naive_count_capped(
    m: &DiscreteMeasure,
    tree: &Tree,
    gaps: &GapSpec,
    cap: u128,
) -> Result<CountResult, CountError> {
    gaps.validate_for(tree)?;
    let start = Instant::now();
    let n = m.len();
    let vertices = tree.vertex_count();
    let space = tuple_space(n, vertices);
    if space > cap {
        return Err(CountError::TupleSpaceTooLarge {
            tuple_space: space,
            cap,
        });
    }
    // Edges grouped by their larger endpoint: assigning vertices in
    // label order, an edge becomes checkable once its larger endpoint
    // is assigned.
    let mut edges_at: Vec<Vec<(usize, f64)>> = vec![Vec::new(); vertices];
    for &(a, b) in tree.edges() {
        edges_at[b].push((a, gaps.target_for(a, b)?));
    }

    struct Ctx<'a> {
        m: &'a DiscreteMeasure,
        edges_at: &'a [Vec<(usize, f64)>],
        epsilon: f64,
        kernel: Kernel,
        acc: Kahan,
        evals: u64,
        assignment: Vec<usize>,
    }

    fn rec(ctx: &mut Ctx<'_>, depth: usize, partial: f64) {
        if depth == ctx.assignment.len() {
            ctx.acc.add(partial);
            return;
        }
        for p in 0..ctx.m.len() {
            let mut factor = partial * ctx.m.weights()[p];
            for &(other, t) in &ctx.edges_at[depth] {
                let u = dot(ctx.m.point(ctx.assignment[other]), ctx.m.point(p)) - t;
                ctx.evals += 1;
                factor *= ctx.kernel.eval(ctx.epsilon, u);
                if factor == 0.0 {
                    break;
                }
            }
            if factor == 0.0 {
                continue;
            }
            ctx.assignment[depth] = p;
            rec(ctx, depth + 1, factor);
        }
    }

    let mut ctx = Ctx {
        m,
        edges_at: &edges_at,
        epsilon: gaps.epsilon,
        kernel: gaps.kernel,
        acc: Kahan::new(),
        evals: 0,
        assignment: vec![0; vertices],
    };
    rec(&mut ctx, 0, 1.0);
    Ok(CountResult {
        value: ctx.acc.value(),
        method: CountMethod::Oracle,
        tuple_space_size: space,
        elapsed: start.elapsed(),
        kernel_evals: ctx.evals,
    })
}

/// A per-atom potential pinned at one vertex of the tree: the partial
/// tuple sum over an already-eliminated subtree, as a function of the
/// point placed at the pinned vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct VertexPotential {
    pub values: Vec<f64>,
    pub pinned: usize,
    /// Edges (original labels) already summed out into this potential.
    pub absorbed_edges: Vec<(usize, usize)>,
}

impl VertexPotential {
    /// The base-case potential: constant 1 (the single-vertex subtree).
    pub fn unit(m: &DiscreteMeasure, vertex: usize) -> Self {
        VertexPotential {
            values: vec![1.0; m.len()],
            pinned: vertex,
            absorbed_edges: Vec::new(),
        }
    }
}

pub struct EdgeSumOutcome {
    pub potential: VertexPotential,
    pub kernel_evals: u64,
}

/// One leaf rip: transports the potential at the leaf side across the
/// edge, producing at every point `p` the weighted sum
/// `sum_q w(q) rho_eps(p.q - t) f(q)`.
///
/// With pruning on, a spatial grid skips cells whose exact dot-product
/// interval misses the open window; values agree with the unpruned
/// route up to summation order and fewer kernels are evaluated.
pub fn edge_sum(
    m: &DiscreteMeasure,
    f: &VertexPotential,
    to_vertex: usize,
    t: f64,
    epsilon: f64,
    kernel: Kernel,
    pruning: bool,
) -> EdgeSumOutcome {
    let grid = pruning.then(|| DotGrid::build(m, epsilon));
    let evals = AtomicU64::new(0);
    let values = edge_sum_values(m, &f.values, t, epsilon, kernel, grid.as_ref(), &evals);
    let mut absorbed = f.absorbed_edges.clone();
    absorbed.push((f.pinned.min(to_vertex), f.pinned.max(to_vertex)));
    EdgeSumOutcome {
        potential: VertexPotential {
            values,
            pinned: to_vertex,
            absorbed_edges: absorbed,
        },
        kernel_evals: evals.load(Ordering::Relaxed),
    }
}

/// Parallel over pinned points; each point's reduction is sequential in
/// a fixed order (pairwise summation), so the output does not depend on
/// the number of worker threads.
fn edge_sum_values(
    m: &DiscreteMeasure,
    f: &[f64],
    t: f64,
    epsilon: f64,
    kernel: Kernel,
    grid: Option<&DotGrid>,
    evals: &AtomicU64,
) -> Vec<f64> {
    let n = m.len();
    let weights = m.weights();
    (0..n)
        .into_par_iter()
        .map_init(
            || Vec::with_capacity(n),
            |scratch, x| {
                scratch.clear();
                let px = m.point(x);
                match grid {
                    None => {
                        for q in 0..n {
                            let u = dot(px, m.point(q)) - t;
                            scratch.push(weights[q] * kernel.eval(epsilon, u) * f[q]);
                        }
                        evals.fetch_add(n as u64, Ordering::Relaxed);
                    }
                    Some(g) => {
                        let mut local = 0u64;
                        g.for_each_candidate(px, t - epsilon, t + epsilon, |q| {
                            let u = dot(px, m.point(q)) - t;
                            scratch.push(weights[q] * kernel.eval(epsilon, u) * f[q]);
                            local += 1;
                        });
                        evals.fetch_add(local, Ordering::Relaxed);
                    }
                }
                pairwise_sum(scratch)
            },
        )
        .collect()
}

/// Exact count by leaf ripping; equals [`naive_count`] up to
/// floating-point accumulation. Leaves are ripped smallest-index first.
pub fn tree_dp_count(
    m: &DiscreteMeasure,
    tree: &Tree,
    gaps: &GapSpec,
    pruning: bool,
) -> Result<CountResult, CountError> {
    tree_dp_count_with_order(m, tree, gaps, pruning, None)
}

/// As [`tree_dp_count`] with an explicit rip order: `leaf_order[i]` must
/// be a leaf of the tree remaining after the first `i` rips. Any valid
/// order yields the same value up to rounding.
pub fn tree_dp_count_with_order(
    m: &DiscreteMeasure,
    tree: &Tree,
    gaps: &GapSpec,
    pruning: bool,
    leaf_order: Option<&[usize]>,
) -> Result<CountResult, CountError> {
    gaps.validate_for(tree)?;
    let start = Instant::now();
    let n = m.len();
    let k = tree.edge_count();
    let evals = AtomicU64::new(0);

    let value = if k == 0 {
        pairwise_sum(m.weights())
    } else {
        let grid = pruning.then(|| DotGrid::build(m, gaps.epsilon));
        let vertices = tree.vertex_count();
        let mut deg = tree.degrees();
        let mut edge_alive = vec![true; k];
        let mut vertex_alive = vec![true; vertices];
        // None stands for the all-ones unit potential.
        let mut potentials: Vec<Option<Vec<f64>>> = vec![None; vertices];
        for step in 0..k {
            let leaf = match leaf_order {
                Some(order) => {
                    let v = order[step];
                    if v >= vertices || !vertex_alive[v] || deg[v] != 1 {
                        return Err(CountError::LeafOrderInvalid { vertex: v });
                    }
                    v
                }
                None => (0..vertices)
                    .find(|&v| vertex_alive[v] && deg[v] == 1)
                    .expect("a tree with edges has a leaf"),
            };
            let (eidx, &(a, b)) = tree
                .edges()
                .iter()
                .enumerate()
                .find(|&(i, &(a, b))| edge_alive[i] && (a == leaf || b == leaf))
                .expect("leaf has one remaining edge");
            let other = if a == leaf { b } else { a };
            let t = gaps.target_for(a, b)?;
            let ones;
            let leaf_values = match potentials[leaf].take() {
                Some(v) => v,
                None => {
                    ones = vec![1.0; n];
                    ones
                }
            };
            let msg = edge_sum_values(
                m,
                &leaf_values,
                t,
                gaps.epsilon,
                gaps.kernel,
                grid.as_ref(),
                &evals,
            );
            match &mut potentials[other] {
                Some(p) => {
                    for i in 0..n {
                        p[i] *= msg[i];
                    }
                }
                slot @ None => *slot = Some(msg),
            }
            edge_alive[eidx] = false;
            vertex_alive[leaf] = false;
            deg[leaf] -= 1;
            deg[other] -= 1;
        }
        let root = (0..vertices)
            .find(|&v| vertex_alive[v])
            .expect("one vertex remains");
        match potentials[root].take() {
            Some(p) => {
                let terms: Vec<f64> = p
                    .iter()
                    .zip(m.weights())
                    .map(|(&v, &w)| v * w)
                    .collect();
                pairwise_sum(&terms)
            }
            None => pairwise_sum(m.weights()),
        }
    };

    Ok(CountResult {
        value,
        method: CountMethod::TreeDp,
        tuple_space_size: tuple_space(n, tree.vertex_count()),
        elapsed: start.elapsed(),
        kernel_evals: evals.load(Ordering::Relaxed),
    })
}

/// Streams every ordered tuple whose dot products fall in the open
/// window on every edge, in a deterministic depth-first order. The
/// visitor returns `false` to stop; the return value is the number of
/// tuples visited.
///
/// Backtracking is guided by per-vertex feasibility tables from an
/// upward sweep: a partial assignment is only extended to points whose
/// pending subtree can still be completed.
pub fn for_each_embedding<F: FnMut(&[usize]) -> bool>(
    m: &DiscreteMeasure,
    tree: &Tree,
    gaps: &GapSpec,
    exclude_repeats: bool,
    mut visitor: F,
) -> Result<u64, CountError> {
    gaps.validate_for(tree)?;
    let n = m.len();
    let vertices = tree.vertex_count();
    let eps = gaps.epsilon;

    // BFS order from vertex 0; every non-root vertex sees its parent
    // assigned before it.
    let mut order = vec![0usize];
    let mut parent = vec![usize::MAX; vertices];
    let mut seen = vec![false; vertices];
    seen[0] = true;
    let mut head = 0;
    while head < order.len() {
        let v = order[head];
        head += 1;
        for nb in tree.neighbors(v) {
            if !seen[nb] {
                seen[nb] = true;
                parent[nb] = v;
                order.push(nb);
            }
        }
    }

    // Upward feasibility sweep (children before parents).
    let mut feasible: Vec<Vec<bool>> = vec![Vec::new(); vertices];
    for &v in order.iter().rev() {
        let children: Vec<usize> = tree
            .neighbors(v)
            .into_iter()
            .filter(|&c| parent[c] == v)
            .collect();
        let mut table = vec![true; n];
        for c in children {
            let t = gaps.target_for(v, c)?;
            let child_table = &feasible[c];
            for (q, slot) in table.iter_mut().enumerate() {
                if !*slot {
                    continue;
                }
                let pq = m.point(q);
                let ok = (0..n).any(|p| {
                    child_table[p] && (dot(pq, m.point(p)) - t).abs() < eps
                });
                *slot = ok;
            }
        }
        feasible[v] = table;
    }

    struct Ctx<'a, F> {
        m: &'a DiscreteMeasure,
        order: &'a [usize],
        parent: &'a [usize],
        targets: Vec<f64>, // indexed like `order`, target to parent
        feasible: &'a [Vec<bool>],
        eps: f64,
        exclude_repeats: bool,
        assignment: Vec<usize>,
        visited: u64,
        visitor: F,
    }

    fn dfs<F: FnMut(&[usize]) -> bool>(ctx: &mut Ctx<'_, F>, idx: usize) -> bool {
        if idx == ctx.order.len() {
            ctx.visited += 1;
            return (ctx.visitor)(&ctx.assignment);
        }
        let m = ctx.m;
        let v = ctx.order[idx];
        let par = ctx.parent[v];
        let pp = ctx.assignment[par];
        let t = ctx.targets[idx];
        for q in 0..m.len() {
            if !ctx.feasible[v][q] {
                continue;
            }
            if (dot(m.point(pp), m.point(q)) - t).abs() >= ctx.eps {
                continue;
            }
            if ctx.exclude_repeats
                && ctx.order[..idx].iter().any(|&w| ctx.assignment[w] == q)
            {
                continue;
            }
            ctx.assignment[v] = q;
            if !dfs(ctx, idx + 1) {
                return false;
            }
        }
        true
    }

    let mut targets = vec![0.0; order.len()];
    for (i, &v) in order.iter().enumerate().skip(1) {
        targets[i] = gaps.target_for(parent[v], v)?;
    }
    let mut ctx = Ctx {
        m,
        order: &order,
        parent: &parent,
        targets,
        feasible: &feasible,
        eps,
        exclude_repeats,
        assignment: vec![0; vertices],
        visited: 0,
        visitor: &mut visitor,
    };
    for q in 0..n {
        if !ctx.feasible[0][q] {
            continue;
        }
        ctx.assignment[0] = q;
        if !dfs(&mut ctx, 1) {
            break;
        }
    }
    Ok(ctx.visited)
}

/// Materializes all embeddings, capped. Tuples are indexed by vertex:
/// `tuple[v]` is the point placed at vertex `v`.
pub fn enumerate_embeddings(
    m: &DiscreteMeasure,
    tree: &Tree,
    gaps: &GapSpec,
    cap: usize,
    exclude_repeats: bool,
) -> Result<Vec<Vec<usize>>, CountError> {
    let mut out = Vec::new();
    let mut overflow = false;
    for_each_embedding(m, tree, gaps, exclude_repeats, |tuple| {
        if out.len() == cap {
            overflow = true;
            return false;
        }
        out.push(tuple.to_vec());
        true
    })?;
    if overflow {
        return Err(CountError::OutputTooLarge { cap });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{uniform_cube_sample, DiscreteMeasure, MeasureMeta};

    fn two_point_cloud() -> DiscreteMeasure {
        DiscreteMeasure::new(
            2,
            vec![1.0, 0.0, 0.0, 1.0],
            vec![0.5, 0.5],
            MeasureMeta {
                family: "atoms".into(),
                ..Default::default()
            },
        )
        .unwrap()
    }

    #[test]
    fn hand_counted_two_point_edge() {
        let m = two_point_cloud();
        let tree = Tree::path(1);
        let gaps = GapSpec::scalar_indicator(0.0, 0.1).unwrap();
        let r = naive_count(&m, &tree, &gaps).unwrap();
        assert!((r.value - 0.5).abs() < 1e-15, "{}", r.value);
        assert_eq!(r.tuple_space_size, 4);

        let dp = tree_dp_count(&m, &tree, &gaps, false).unwrap();
        assert!((dp.value - 0.5).abs() < 1e-15);
    }

    #[test]
    fn no_tuple_passes_off_target() {
        let m = two_point_cloud();
        let tree = Tree::path(1);
        let gaps = GapSpec::scalar_indicator(0.5, 0.1).unwrap();
        assert_eq!(naive_count(&m, &tree, &gaps).unwrap().value, 0.0);
        assert_eq!(tree_dp_count(&m, &tree, &gaps, false).unwrap().value, 0.0);
    }

    #[test]
    fn huge_window_saturates_at_one() {
        let m = uniform_cube_sample(30, 2, 0.3, 5).unwrap();
        for tree in [Tree::path(1), Tree::path(2), Tree::star(3)] {
            let gaps = GapSpec::scalar_indicator(0.0, 1e9).unwrap();
            let naive = naive_count(&m, &tree, &gaps).unwrap().value;
            assert!((naive - 1.0).abs() < 1e-9, "{naive}");
        }
    }

    #[test]
    fn single_vertex_tree_counts_total_mass() {
        let m = uniform_cube_sample(100, 2, 0.3, 5).unwrap();
        let gaps = GapSpec::scalar_indicator(0.0, 0.1).unwrap();
        let r = tree_dp_count(&m, &Tree::single_vertex(), &gaps, false).unwrap();
        assert!((r.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn dp_matches_oracle_on_p3() {
        let m = uniform_cube_sample(12, 2, 0.3, 42).unwrap();
        let tree = Tree::path(2);
        let gaps = GapSpec::scalar_indicator(0.8, 0.15).unwrap();
        let a = naive_count(&m, &tree, &gaps).unwrap().value;
        let b = tree_dp_count(&m, &tree, &gaps, false).unwrap().value;
        assert!((a - b).abs() <= 1e-9 * a.max(1e-30), "{a} vs {b}");
        assert!(a > 0.0);
    }

    #[test]
    fn tuple_space_cap_triggers() {
        let m = uniform_cube_sample(100, 2, 0.3, 5).unwrap();
        let err = naive_count_capped(
            &m,
            &Tree::path(4),
            &GapSpec::scalar_indicator(0.8, 0.1).unwrap(),
            1_000_000,
        )
        .unwrap_err();
        assert!(matches!(err, CountError::TupleSpaceTooLarge { .. }));
    }

    #[test]
    fn edge_sum_units_and_zeros() {
        let m = uniform_cube_sample(50, 2, 0.3, 9).unwrap();
        let unit = VertexPotential::unit(&m, 1);
        let out = edge_sum(&m, &unit, 0, 0.0, 1e9, Kernel::raw_indicator(), false);
        for v in &out.potential.values {
            assert!((v - 1.0).abs() < 1e-12);
        }
        assert_eq!(out.potential.pinned, 0);
        assert_eq!(out.potential.absorbed_edges, vec![(0, 1)]);

        let zero = VertexPotential {
            values: vec![0.0; m.len()],
            pinned: 1,
            absorbed_edges: vec![],
        };
        let out = edge_sum(&m, &zero, 0, 0.8, 0.1, Kernel::raw_indicator(), false);
        assert!(out.potential.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn pruned_edge_sum_agrees_and_saves_kernels() {
        let m = uniform_cube_sample(1000, 2, 0.3, 17).unwrap();
        // median-ish pair dot product for a [0.3,1]^2 cloud
        let t = m.dot(0, 1);
        let unit = VertexPotential::unit(&m, 1);
        let plain = edge_sum(&m, &unit, 0, t, 0.05, Kernel::raw_indicator(), false);
        let pruned = edge_sum(&m, &unit, 0, t, 0.05, Kernel::raw_indicator(), true);
        for (a, b) in plain
            .potential
            .values
            .iter()
            .zip(&pruned.potential.values)
        {
            assert!((a - b).abs() <= 1e-12, "{a} vs {b}");
        }
        assert!(
            pruned.kernel_evals < plain.kernel_evals,
            "{} !< {}",
            pruned.kernel_evals,
            plain.kernel_evals
        );
    }

    #[test]
    fn leaf_order_independence() {
        let m = uniform_cube_sample(40, 2, 0.3, 23).unwrap();
        let tree = Tree::from_edges(5, &[(0, 2), (1, 2), (2, 3), (3, 4)]).unwrap();
        let gaps = GapSpec::scalar_indicator(0.8, 0.2).unwrap();
        let reference = tree_dp_count(&m, &tree, &gaps, false).unwrap().value;
        // two other valid rip orders
        for order in [vec![4, 3, 1, 0], vec![1, 0, 4, 3]] {
            let v = tree_dp_count_with_order(&m, &tree, &gaps, false, Some(&order))
                .unwrap()
                .value;
            assert!(
                (v - reference).abs() <= 1e-9 * reference.max(1e-30),
                "{v} vs {reference}"
            );
        }
        let err =
            tree_dp_count_with_order(&m, &tree, &gaps, false, Some(&[2, 0, 1, 3])).unwrap_err();
        assert_eq!(err, CountError::LeafOrderInvalid { vertex: 2 });
    }

    #[test]
    fn enumeration_matches_hand_example() {
        let m = two_point_cloud();
        let tree = Tree::path(1);
        let gaps = GapSpec::scalar_indicator(0.0, 0.1).unwrap();
        let tuples = enumerate_embeddings(&m, &tree, &gaps, 100, false).unwrap();
        assert_eq!(tuples, vec![vec![0, 1], vec![1, 0]]);
    }

    #[test]
    fn enumeration_empty_for_tiny_window() {
        let m = uniform_cube_sample(30, 2, 0.3, 31).unwrap();
        let gaps = GapSpec::scalar_indicator(0.8, 1e-15).unwrap();
        let tuples = enumerate_embeddings(&m, &Tree::path(2), &gaps, 1000, false).unwrap();
        assert!(tuples.is_empty());
    }

    #[test]
    fn enumeration_count_reproduces_indicator_count() {
        let m = uniform_cube_sample(25, 2, 0.3, 7).unwrap();
        let tree = Tree::star(2);
        let gaps = GapSpec::scalar_indicator(0.7, 0.2).unwrap();
        let tuples = enumerate_embeddings(&m, &tree, &gaps, 100_000, false).unwrap();
        let naive = naive_count(&m, &tree, &gaps).unwrap().value;
        let w = 1.0 / m.len() as f64;
        let from_enum = tuples.len() as f64 * w.powi(tree.vertex_count() as i32);
        assert!(
            (from_enum - naive).abs() <= 1e-9 * naive.max(1e-30),
            "{from_enum} vs {naive}"
        );
    }

    #[test]
    fn enumeration_cap_triggers() {
        let m = uniform_cube_sample(50, 2, 0.3, 7).unwrap();
        let gaps = GapSpec::scalar_indicator(0.7, 1.0).unwrap();
        let err = enumerate_embeddings(&m, &Tree::path(1), &gaps, 10, false).unwrap_err();
        assert!(matches!(err, CountError::OutputTooLarge { cap: 10 }));
    }

    #[test]
    fn exclude_repeats_drops_diagonal_tuples() {
        let m = uniform_cube_sample(20, 2, 0.3, 3).unwrap();
        let tree = Tree::path(1);
        let gaps = GapSpec::scalar_indicator(0.9, 0.5).unwrap();
        let all = enumerate_embeddings(&m, &tree, &gaps, 100_000, false).unwrap();
        let distinct = enumerate_embeddings(&m, &tree, &gaps, 100_000, true).unwrap();
        assert!(all.iter().any(|t| t[0] == t[1]));
        assert!(distinct.iter().all(|t| t[0] != t[1]));
        assert!(distinct.len() < all.len());
    }

    #[test]
    fn scaling_covariance_is_exact_for_dyadic_lambda() {
        let base = uniform_cube_sample(40, 2, 0.3, 13).unwrap();
        let tree = Tree::path(2);
        let t = 0.8;
        let eps = 0.15;
        let gaps = GapSpec::scalar_indicator(t, eps).unwrap();
        let v0 = tree_dp_count(&base, &tree, &gaps, false).unwrap().value;
        for lambda in [0.5f64, 2.0, 4.0] {
            let coords: Vec<f64> = base.coords().iter().map(|&c| c * lambda).collect();
            let scaled = DiscreteMeasure::new(
                2,
                coords,
                base.weights().to_vec(),
                base.meta().clone(),
            )
            .unwrap();
            let gaps2 =
                GapSpec::scalar_indicator(lambda * lambda * t, lambda * lambda * eps).unwrap();
            let v1 = tree_dp_count(&scaled, &tree, &gaps2, false).unwrap().value;
            assert_eq!(v0.to_bits(), v1.to_bits(), "lambda={lambda}");
        }
    }
}
