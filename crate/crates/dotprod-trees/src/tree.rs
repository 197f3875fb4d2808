//! Finite trees: validation, leaf ripping, neighbor collapsing, and the
//! symmetric tree cover with an explicit embedding certificate.
//!
//! Vertices are `0..vertex_count`; edges are unordered pairs stored as
//! `(min, max)` in sorted order, so edge indices are stable and two
//! structurally equal trees compare equal.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TreeError {
    #[error("vertex count must be at least 1")]
    Empty,
    #[error("edge ({0}, {1}) references a vertex outside 0..{2}")]
    VertexOutOfRange(usize, usize, usize),
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),
    #[error("edge ({0}, {1}) closes a cycle")]
    CycleDetected(usize, usize),
    #[error("vertex {0} is unreachable from vertex 0")]
    Disconnected(usize),
    #[error("vertex {0} is not a leaf")]
    NotALeaf(usize),
    #[error("vertex {0} is a leaf; collapsing needs degree >= 2")]
    IsLeaf(usize),
    #[error("vertex {0} is isolated; nothing to collapse")]
    IsolatedVertex(usize),
    #[error("tree enumeration supports at most {limit} edges, got {requested}")]
    TooLarge { requested: usize, limit: usize },
    #[error("tree with {got} edges is not the symmetric cover of the {expected}-edge base under this policy")]
    NotACover { got: usize, expected: usize },
}

/// How the non-leaf pivot is chosen at each stage of the symmetric cover
/// recursion. The construction is valid for any choice; different
/// policies can produce non-isomorphic (but equally valid) covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PivotPolicy {
    /// Maximum-degree vertex, ties broken by smallest index. Minimizes
    /// the number of recursion stages.
    MaxDegree,
    /// Smallest-index non-leaf vertex.
    FirstNonLeaf,
}

/// A connected acyclic simple graph on `0..vertex_count`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tree {
    vertex_count: usize,
    edges: Vec<(usize, usize)>,
}

/// Witness that one tree embeds into another: an injective vertex map
/// together with, for each base edge, the index of the covering edge it
/// lands on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmbeddingCertificate {
    /// `vertex_map[v]` is the image in the cover of base vertex `v`.
    pub vertex_map: Vec<usize>,
    /// `edge_map[e]` indexes into the cover's edge list.
    pub edge_map: Vec<usize>,
}

impl EmbeddingCertificate {
    fn identity(tree: &Tree) -> Self {
        EmbeddingCertificate {
            vertex_map: (0..tree.vertex_count).collect(),
            edge_map: (0..tree.edge_count()).collect(),
        }
    }

    /// Checks the certificate edge by edge: the vertex map must be
    /// injective and carry every base edge onto the claimed cover edge.
    pub fn verify(&self, base: &Tree, cover: &Tree) -> bool {
        if self.vertex_map.len() != base.vertex_count
            || self.edge_map.len() != base.edge_count()
        {
            return false;
        }
        let mut seen = BTreeSet::new();
        for &img in &self.vertex_map {
            if img >= cover.vertex_count || !seen.insert(img) {
                return false;
            }
        }
        for (e, &(a, b)) in base.edges.iter().enumerate() {
            let Some(&cov_edge) = cover.edges.get(self.edge_map[e]) else {
                return false;
            };
            let img = normalize(self.vertex_map[a], self.vertex_map[b]);
            if cov_edge != img {
                return false;
            }
        }
        true
    }
}

/// A symmetric cover of a base tree, with the certificate that the base
/// embeds into it. Only [`Tree::symmetric_cover`] and
/// [`SymmetricCover::attest`] construct this, so holding one is proof of
/// cover provenance.
#[derive(Debug, Clone)]
pub struct SymmetricCover {
    pub tree: Tree,
    pub certificate: EmbeddingCertificate,
    pub base: Tree,
    pub policy: PivotPolicy,
}

impl SymmetricCover {
    /// Accepts an externally supplied tree as a cover of `base` by
    /// recomputing the cover under `policy` and checking isomorphism.
    pub fn attest(tree: Tree, base: &Tree, policy: PivotPolicy) -> Result<Self, TreeError> {
        let built = base.symmetric_cover(policy);
        if built.tree.is_isomorphic(&tree) {
            Ok(SymmetricCover {
                tree,
                certificate: built.certificate,
                base: base.clone(),
                policy,
            })
        } else {
            Err(TreeError::NotACover {
                got: tree.edge_count(),
                expected: base.edge_count(),
            })
        }
    }
}

/// Result of removing a leaf edge: the subtree with contiguous labels,
/// the removed edge in the original labels, and the relabeling map
/// (`None` for the removed leaf).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RippedLeaf {
    pub tree: Tree,
    pub removed_edge: (usize, usize),
    pub relabel: Vec<Option<usize>>,
}

/// Result of collapsing the neighbors of a pivot: the collapsed tree and
/// the full vertex map (pivot -> 0, merged neighbor vertex -> 1, the
/// remaining vertices in ascending order from 2).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CollapsedTree {
    pub tree: Tree,
    pub vertex_map: Vec<usize>,
}

fn normalize(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

impl Tree {
    /// Validates `edges` as a connected acyclic simple graph on
    /// `vertex_count` vertices. Errors name the offending edge or vertex.
    pub fn from_edges(vertex_count: usize, edges: &[(usize, usize)]) -> Result<Self, TreeError> {
        if vertex_count == 0 {
            return Err(TreeError::Empty);
        }
        let mut seen = BTreeSet::new();
        let mut parent: Vec<usize> = (0..vertex_count).collect();
        fn find(parent: &mut [usize], mut v: usize) -> usize {
            while parent[v] != v {
                parent[v] = parent[parent[v]];
                v = parent[v];
            }
            v
        }
        let mut normalized = Vec::with_capacity(edges.len());
        for &(a, b) in edges {
            if a >= vertex_count || b >= vertex_count {
                return Err(TreeError::VertexOutOfRange(a, b, vertex_count));
            }
            if a == b {
                return Err(TreeError::SelfLoop(a));
            }
            let e = normalize(a, b);
            if !seen.insert(e) {
                return Err(TreeError::DuplicateEdge(e.0, e.1));
            }
            let (ra, rb) = (find(&mut parent, e.0), find(&mut parent, e.1));
            if ra == rb {
                return Err(TreeError::CycleDetected(e.0, e.1));
            }
            parent[ra] = rb;
            normalized.push(e);
        }
        let root = find(&mut parent, 0);
        for v in 1..vertex_count {
            if find(&mut parent, v) != root {
                return Err(TreeError::Disconnected(v));
            }
        }
        normalized.sort_unstable();
        Ok(Tree {
            vertex_count,
            edges: normalized,
        })
    }

    /// Path with `k` edges on vertices `0..=k`, edges `(i, i+1)`.
    pub fn path(k: usize) -> Self {
        let edges: Vec<_> = (0..k).map(|i| (i, i + 1)).collect();
        Tree::from_edges(k + 1, &edges).expect("path is a tree")
    }

    /// Star with `k` edges: center 0, leaves `1..=k`.
    pub fn star(k: usize) -> Self {
        let edges: Vec<_> = (1..=k).map(|i| (0, i)).collect();
        Tree::from_edges(k + 1, &edges).expect("star is a tree")
    }

    pub fn single_vertex() -> Self {
        Tree {
            vertex_count: 1,
            edges: Vec::new(),
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    /// Number of edges; always `vertex_count - 1`.
    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges as `(min, max)` pairs in lexicographic order.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge_index(&self, a: usize, b: usize) -> Option<usize> {
        self.edges.binary_search(&normalize(a, b)).ok()
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0usize; self.vertex_count];
        for &(a, b) in &self.edges {
            deg[a] += 1;
            deg[b] += 1;
        }
        deg
    }

    pub fn degree(&self, v: usize) -> usize {
        self.edges
            .iter()
            .filter(|&&(a, b)| a == v || b == v)
            .count()
    }

    pub fn neighbors(&self, v: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .edges
            .iter()
            .filter_map(|&(a, b)| {
                if a == v {
                    Some(b)
                } else if b == v {
                    Some(a)
                } else {
                    None
                }
            })
            .collect();
        out.sort_unstable();
        out
    }

    /// Vertices of degree exactly 1, ascending.
    pub fn leaves(&self) -> Vec<usize> {
        self.degrees()
            .iter()
            .enumerate()
            .filter(|&(_, &d)| d == 1)
            .map(|(v, _)| v)
            .collect()
    }

    /// Removes the leaf edge at `leaf` and relabels the remaining
    /// vertices contiguously (indices above `leaf` shift down by one).
    pub fn rip_leaf(&self, leaf: usize) -> Result<RippedLeaf, TreeError> {
        if leaf >= self.vertex_count || self.degree(leaf) != 1 {
            return Err(TreeError::NotALeaf(leaf));
        }
        let removed_edge = *self
            .edges
            .iter()
            .find(|&&(a, b)| a == leaf || b == leaf)
            .expect("degree-1 vertex has an incident edge");
        let relabel: Vec<Option<usize>> = (0..self.vertex_count)
            .map(|v| {
                if v == leaf {
                    None
                } else if v < leaf {
                    Some(v)
                } else {
                    Some(v - 1)
                }
            })
            .collect();
        let edges: Vec<(usize, usize)> = self
            .edges
            .iter()
            .filter(|&&e| e != removed_edge)
            .map(|&(a, b)| (relabel[a].unwrap(), relabel[b].unwrap()))
            .collect();
        let tree = Tree::from_edges(self.vertex_count - 1, &edges)
            .expect("removing a leaf keeps a valid tree");
        Ok(RippedLeaf {
            tree,
            removed_edge,
            relabel,
        })
    }

    /// Identifies all neighbors of `u` into a single vertex `w` and
    /// reattaches `u` to `w` by one edge; the rest of the structure
    /// hangs off `w`. In the result, `u` is vertex 0 and `w` is vertex 1.
    ///
    /// Trees have no triangles, so the only parallel edges created by
    /// the identification are the `u`-edges themselves, which collapse
    /// to the single edge `(0, 1)`. The result has `k - deg(u) + 1`
    /// edges.
    pub fn collapse_neighbors(&self, u: usize) -> Result<CollapsedTree, TreeError> {
        if u >= self.vertex_count {
            return Err(TreeError::NotALeaf(u));
        }
        match self.degree(u) {
            0 => return Err(TreeError::IsolatedVertex(u)),
            1 => return Err(TreeError::IsLeaf(u)),
            _ => {}
        }
        let neighbors: BTreeSet<usize> = self.neighbors(u).into_iter().collect();
        let mut vertex_map = vec![usize::MAX; self.vertex_count];
        vertex_map[u] = 0;
        for &n in &neighbors {
            vertex_map[n] = 1;
        }
        let mut next = 2;
        for v in 0..self.vertex_count {
            if v != u && !neighbors.contains(&v) {
                vertex_map[v] = next;
                next += 1;
            }
        }
        let mut edges = vec![(0usize, 1usize)];
        for &(a, b) in &self.edges {
            if a == u || b == u {
                continue; // all pivot edges collapse onto (0, 1)
            }
            edges.push(normalize(vertex_map[a], vertex_map[b]));
        }
        let tree = Tree::from_edges(next, &edges)
            .expect("collapsing neighbors of a non-leaf keeps a valid tree");
        Ok(CollapsedTree { tree, vertex_map })
    }

    fn pick_pivot(&self, policy: PivotPolicy) -> usize {
        let deg = self.degrees();
        match policy {
            PivotPolicy::MaxDegree => {
                let mut best = 0;
                let mut best_deg = 0;
                for (v, &d) in deg.iter().enumerate() {
                    if d > best_deg {
                        best_deg = d;
                        best = v;
                    }
                }
                best
            }
            PivotPolicy::FirstNonLeaf => deg
                .iter()
                .position(|&d| d >= 2)
                .expect("a tree with >= 2 edges has a non-leaf vertex"),
        }
    }

    /// Builds the symmetric tree cover of `self` together with a
    /// certificate embedding `self` into it.
    ///
    /// A single edge is its own cover. Otherwise pick a non-leaf pivot
    /// `u`, collapse its neighbors to get a strictly smaller tree, cover
    /// that recursively, and join `deg(u)` copies of the sub-cover at
    /// the image of `u`. Each branch of the base hanging off `u` embeds
    /// into its own copy, which is what the certificate records.
    pub fn symmetric_cover(&self, policy: PivotPolicy) -> SymmetricCover {
        assert!(
            self.edge_count() >= 1,
            "symmetric cover requires at least one edge"
        );
        let (tree, certificate) = self.cover_rec(policy);
        debug_assert!(certificate.verify(self, &tree));
        SymmetricCover {
            tree,
            certificate,
            base: self.clone(),
            policy,
        }
    }

    fn cover_rec(&self, policy: PivotPolicy) -> (Tree, EmbeddingCertificate) {
        if self.edge_count() == 1 {
            return (self.clone(), EmbeddingCertificate::identity(self));
        }
        let u = self.pick_pivot(policy);
        let collapsed = self
            .collapse_neighbors(u)
            .expect("pivot is a non-leaf vertex");
        let (sub, sub_cert) = collapsed.tree.cover_rec(policy);
        let phi = &collapsed.vertex_map;
        // Image of the pivot inside the sub-cover; copies are glued there.
        let glue = sub_cert.vertex_map[phi[u]];
        let copies = self.degree(u);
        let sub_n = sub.vertex_count;

        // Vertex labels in the cover: glue vertex is 0; copy c maps the
        // sub-cover's non-glue vertices, in ascending order, onto the
        // block starting at 1 + c*(sub_n - 1).
        let copy_vertex = |c: usize, v: usize| -> usize {
            if v == glue {
                0
            } else {
                let rank = if v < glue { v } else { v - 1 };
                1 + c * (sub_n - 1) + rank
            }
        };
        let mut edges = Vec::with_capacity(copies * sub.edge_count());
        for c in 0..copies {
            for &(a, b) in sub.edges() {
                edges.push(normalize(copy_vertex(c, a), copy_vertex(c, b)));
            }
        }
        let cover_n = 1 + copies * (sub_n - 1);
        let cover = Tree::from_edges(cover_n, &edges)
            .expect("joined copies of a cover form a valid tree");

        // Embed: the pivot goes to the glue vertex; the branch through
        // the c-th neighbor (ascending) lands in copy c via the collapse
        // map followed by the sub-certificate.
        let mut vertex_map = vec![usize::MAX; self.vertex_count];
        vertex_map[u] = 0;
        let mut edge_map = vec![usize::MAX; self.edge_count()];
        for (c, &n) in self.neighbors(u).iter().enumerate() {
            let branch = self.branch_through(u, n);
            let mut in_branch = vec![false; self.vertex_count];
            for &v in &branch {
                in_branch[v] = true;
            }
            for &v in &branch {
                vertex_map[v] = copy_vertex(c, sub_cert.vertex_map[phi[v]]);
            }
            for (e, &(a, b)) in self.edges.iter().enumerate() {
                let belongs = if a == u {
                    in_branch[b]
                } else if b == u {
                    in_branch[a]
                } else {
                    in_branch[a] && in_branch[b]
                };
                if !belongs {
                    continue;
                }
                let sub_edge = collapsed
                    .tree
                    .edge_index(phi[a], phi[b])
                    .expect("base edge survives the collapse");
                let (sa, sb) = sub.edges()[sub_cert.edge_map[sub_edge]];
                let img = normalize(copy_vertex(c, sa), copy_vertex(c, sb));
                edge_map[e] = cover
                    .edge_index(img.0, img.1)
                    .expect("copied edge exists in the cover");
            }
        }
        (
            cover,
            EmbeddingCertificate {
                vertex_map,
                edge_map,
            },
        )
    }

    /// Vertices of the component of `start` in `self - u`.
    fn branch_through(&self, u: usize, start: usize) -> Vec<usize> {
        let mut seen = vec![false; self.vertex_count];
        seen[u] = true;
        seen[start] = true;
        let mut queue = vec![start];
        let mut out = vec![start];
        while let Some(v) = queue.pop() {
            for n in self.neighbors(v) {
                if !seen[n] {
                    seen[n] = true;
                    queue.push(n);
                    out.push(n);
                }
            }
        }
        out
    }

    /// Canonical form for isomorphism tests: the rooted sorted-subtree
    /// encoding at the tree's center(s), taking the lexicographically
    /// smaller string when there are two centers.
    pub fn canonical_code(&self) -> String {
        self.centers()
            .into_iter()
            .map(|c| self.encode_rooted(c))
            .min()
            .expect("a tree has one or two centers")
    }

    pub fn is_isomorphic(&self, other: &Tree) -> bool {
        self.vertex_count == other.vertex_count && self.canonical_code() == other.canonical_code()
    }

    /// One or two middle vertices obtained by peeling leaves in rounds.
    fn centers(&self) -> Vec<usize> {
        if self.vertex_count <= 2 {
            return (0..self.vertex_count).collect();
        }
        let mut deg = self.degrees();
        let mut removed = vec![false; self.vertex_count];
        let mut remaining = self.vertex_count;
        let mut frontier: Vec<usize> = (0..self.vertex_count).filter(|&v| deg[v] == 1).collect();
        while remaining > 2 {
            let mut next = Vec::new();
            for &v in &frontier {
                removed[v] = true;
                remaining -= 1;
                for n in self.neighbors(v) {
                    if !removed[n] {
                        deg[n] -= 1;
                        if deg[n] == 1 {
                            next.push(n);
                        }
                    }
                }
            }
            frontier = next;
        }
        (0..self.vertex_count).filter(|&v| !removed[v]).collect()
    }

    fn encode_rooted(&self, root: usize) -> String {
        fn enc(tree: &Tree, v: usize, parent: Option<usize>) -> String {
            let mut kids: Vec<String> = tree
                .neighbors(v)
                .into_iter()
                .filter(|&n| Some(n) != parent)
                .map(|n| enc(tree, n, Some(v)))
                .collect();
            kids.sort();
            format!("({})", kids.concat())
        }
        enc(self, root, None)
    }
}

impl fmt::Display for Tree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "tree[n={}", self.vertex_count)?;
        for &(a, b) in &self.edges {
            write!(f, " {a}-{b}")?;
        }
        write!(f, "]")
    }
}

const ENUMERATION_LIMIT: usize = 8;

/// All non-isomorphic trees with exactly `edge_count` edges, in
/// canonical-code order. Supports up to 8 edges.
pub fn enumerate_trees(edge_count: usize) -> Result<Vec<Tree>, TreeError> {
    if edge_count > ENUMERATION_LIMIT {
        return Err(TreeError::TooLarge {
            requested: edge_count,
            limit: ENUMERATION_LIMIT,
        });
    }
    if edge_count == 0 {
        return Ok(vec![Tree::single_vertex()]);
    }
    let mut current = vec![Tree::path(1)];
    for _ in 1..edge_count {
        let mut next = std::collections::BTreeMap::new();
        for tree in &current {
            let n = tree.vertex_count;
            for attach in 0..n {
                let mut edges = tree.edges.clone();
                edges.push((attach, n));
                let grown =
                    Tree::from_edges(n + 1, &edges).expect("attaching a leaf keeps a valid tree");
                next.entry(grown.canonical_code()).or_insert(grown);
            }
        }
        current = next.into_values().collect();
    }
    Ok(current)
}

/// All non-isomorphic trees with 1 to `max_edges` edges.
pub fn enumerate_trees_up_to(max_edges: usize) -> Result<Vec<Tree>, TreeError> {
    let mut out = Vec::new();
    for k in 1..=max_edges {
        out.extend(enumerate_trees(k)?);
    }
    Ok(out)
}

#[derive(Debug, Error)]
pub enum TreeFileError {
    #[error("io error reading tree file: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: {source}")]
    Invalid {
        line: usize,
        #[source]
        source: TreeError,
    },
}

/// Parses the plain-text tree format: first non-comment line
/// `vertices N`, then one edge per line `i j` with `0 <= i < j < N`.
/// Blank lines and `#` comments are ignored.
pub fn parse_tree(text: &str) -> Result<Tree, TreeFileError> {
    let mut vertex_count: Option<(usize, usize)> = None; // (count, line)
    let mut edges: Vec<((usize, usize), usize)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if vertex_count.is_none() {
            let rest = line.strip_prefix("vertices").ok_or(TreeFileError::Syntax {
                line: line_no,
                message: format!("expected 'vertices N', got '{line}'"),
            })?;
            let n: usize = rest.trim().parse().map_err(|_| TreeFileError::Syntax {
                line: line_no,
                message: format!("invalid vertex count '{}'", rest.trim()),
            })?;
            vertex_count = Some((n, line_no));
            continue;
        }
        let mut parts = line.split_whitespace();
        let (a, b) = match (parts.next(), parts.next(), parts.next()) {
            (Some(a), Some(b), None) => (a, b),
            _ => {
                return Err(TreeFileError::Syntax {
                    line: line_no,
                    message: format!("expected 'i j', got '{line}'"),
                })
            }
        };
        let parse = |s: &str| -> Result<usize, TreeFileError> {
            s.parse().map_err(|_| TreeFileError::Syntax {
                line: line_no,
                message: format!("invalid vertex index '{s}'"),
            })
        };
        let (a, b) = (parse(a)?, parse(b)?);
        if a >= b {
            return Err(TreeFileError::Syntax {
                line: line_no,
                message: format!("edges must satisfy i < j, got '{line}'"),
            });
        }
        edges.push(((a, b), line_no));
    }
    let (n, header_line) = vertex_count.ok_or(TreeFileError::Syntax {
        line: 1,
        message: "missing 'vertices N' header".into(),
    })?;
    let pairs: Vec<(usize, usize)> = edges.iter().map(|&(e, _)| e).collect();
    Tree::from_edges(n, &pairs).map_err(|err| {
        let line = match err {
            TreeError::VertexOutOfRange(a, b, _)
            | TreeError::DuplicateEdge(a, b)
            | TreeError::CycleDetected(a, b) => edges
                .iter()
                .find(|&&(e, _)| e == normalize(a, b))
                .map(|&(_, l)| l)
                .unwrap_or(header_line),
            _ => header_line,
        };
        TreeFileError::Invalid { line, source: err }
    })
}

pub fn format_tree(tree: &Tree) -> String {
    let mut out = format!("vertices {}\n", tree.vertex_count());
    for &(a, b) in tree.edges() {
        out.push_str(&format!("{a} {b}\n"));
    }
    out
}

pub fn read_tree_file(path: &Path) -> Result<Tree, TreeFileError> {
    parse_tree(&std::fs::read_to_string(path)?)
}

pub fn write_tree_file(tree: &Tree, path: &Path) -> std::io::Result<()> {
    std::fs::write(path, format_tree(tree))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(k: usize) -> Tree {
        Tree::path(k)
    }

    #[test]
    fn validates_single_edge() {
        let t = Tree::from_edges(2, &[(0, 1)]).unwrap();
        assert_eq!(t.edge_count(), 1);
    }

    #[test]
    fn rejects_triangle_as_cycle() {
        let err = Tree::from_edges(3, &[(0, 1), (1, 2), (2, 0)]).unwrap_err();
        assert_eq!(err, TreeError::CycleDetected(0, 2));
    }

    #[test]
    fn validates_p4() {
        let t = Tree::from_edges(4, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        assert_eq!(t.edge_count(), 3);
    }

    #[test]
    fn rejects_self_loop_duplicate_disconnected() {
        assert_eq!(
            Tree::from_edges(2, &[(1, 1)]).unwrap_err(),
            TreeError::SelfLoop(1)
        );
        assert_eq!(
            Tree::from_edges(3, &[(0, 1), (1, 0), (1, 2)]).unwrap_err(),
            TreeError::DuplicateEdge(0, 1)
        );
        assert_eq!(
            Tree::from_edges(4, &[(0, 1), (2, 3)]).unwrap_err(),
            TreeError::Disconnected(2)
        );
    }

    #[test]
    fn leaves_of_edge_star_path() {
        assert_eq!(p(1).leaves(), vec![0, 1]);
        assert_eq!(Tree::star(3).leaves(), vec![1, 2, 3]);
        assert_eq!(p(3).leaves(), vec![0, 3]);
    }

    #[test]
    fn rip_leaf_examples() {
        let r = p(3).rip_leaf(3).unwrap();
        assert_eq!(r.removed_edge, (2, 3));
        assert_eq!(r.tree, p(2));

        let r = p(1).rip_leaf(1).unwrap();
        assert_eq!(r.removed_edge, (0, 1));
        assert_eq!(r.tree, Tree::single_vertex());

        let r = Tree::star(3).rip_leaf(2).unwrap();
        assert_eq!(r.removed_edge, (0, 2));
        assert!(r.tree.is_isomorphic(&Tree::star(2)));

        assert_eq!(p(3).rip_leaf(1).unwrap_err(), TreeError::NotALeaf(1));
    }

    #[test]
    fn rip_relabel_is_contiguous() {
        let r = p(3).rip_leaf(0).unwrap();
        assert_eq!(r.relabel, vec![None, Some(0), Some(1), Some(2)]);
        assert_eq!(r.tree, p(2));
    }

    #[test]
    fn ripping_all_leaves_terminates_at_single_vertex() {
        for tree in enumerate_trees_up_to(6).unwrap() {
            let mut t = tree;
            while t.edge_count() > 0 {
                let leaf = t.leaves()[0];
                t = t.rip_leaf(leaf).unwrap().tree;
            }
            assert_eq!(t, Tree::single_vertex());
        }
    }

    #[test]
    fn collapse_examples() {
        let c = p(2).collapse_neighbors(1).unwrap();
        assert_eq!(c.tree, p(1));

        let c = p(3).collapse_neighbors(1).unwrap();
        assert!(c.tree.is_isomorphic(&p(2)));

        let c = Tree::star(3).collapse_neighbors(0).unwrap();
        assert_eq!(c.tree, p(1));

        assert_eq!(p(2).collapse_neighbors(0).unwrap_err(), TreeError::IsLeaf(0));
        assert_eq!(
            Tree::single_vertex().collapse_neighbors(0).unwrap_err(),
            TreeError::IsolatedVertex(0)
        );
    }

    #[test]
    fn collapse_edge_count_formula() {
        for tree in enumerate_trees_up_to(7).unwrap() {
            let deg = tree.degrees();
            for u in 0..tree.vertex_count() {
                if deg[u] >= 2 {
                    let c = tree.collapse_neighbors(u).unwrap();
                    assert_eq!(c.tree.edge_count(), tree.edge_count() - deg[u] + 1);
                }
            }
        }
    }

    #[test]
    fn cover_fixed_points() {
        for policy in [PivotPolicy::MaxDegree, PivotPolicy::FirstNonLeaf] {
            let c = p(1).symmetric_cover(policy);
            assert_eq!(c.tree, p(1));
            assert_eq!(c.certificate, EmbeddingCertificate::identity(&p(1)));

            assert!(p(2).symmetric_cover(policy).tree.is_isomorphic(&p(2)));
            for k in 2..=5 {
                let star = Tree::star(k);
                assert!(star.symmetric_cover(policy).tree.is_isomorphic(&star));
            }
        }
    }

    #[test]
    fn cover_of_p4_is_p5_under_default_pivot() {
        let c = p(3).symmetric_cover(PivotPolicy::MaxDegree);
        assert!(c.tree.is_isomorphic(&p(4)));
        assert!(c.certificate.verify(&p(3), &c.tree));
    }

    #[test]
    fn covers_verify_for_all_small_trees() {
        for tree in enumerate_trees_up_to(6).unwrap() {
            for policy in [PivotPolicy::MaxDegree, PivotPolicy::FirstNonLeaf] {
                let c = tree.symmetric_cover(policy);
                assert!(c.certificate.verify(&tree, &c.tree), "{tree}");
                assert!(c.tree.edge_count() >= tree.edge_count());
            }
        }
    }

    #[test]
    fn cover_size_equality_exactly_for_stars_and_edges() {
        for tree in enumerate_trees_up_to(6).unwrap() {
            let c = tree.symmetric_cover(PivotPolicy::MaxDegree);
            let is_star_or_edge =
                tree.edge_count() == 1 || tree.degrees().iter().any(|&d| d == tree.edge_count());
            assert_eq!(
                c.tree.edge_count() == tree.edge_count(),
                is_star_or_edge,
                "{tree}"
            );
        }
    }

    #[test]
    fn attest_accepts_real_cover_and_rejects_fake() {
        let cover = p(3).symmetric_cover(PivotPolicy::MaxDegree).tree;
        assert!(SymmetricCover::attest(cover, &p(3), PivotPolicy::MaxDegree).is_ok());
        let err = SymmetricCover::attest(p(3), &p(3), PivotPolicy::MaxDegree).unwrap_err();
        assert!(matches!(err, TreeError::NotACover { .. }));
    }

    #[test]
    fn enumeration_matches_known_counts() {
        assert_eq!(enumerate_trees(1).unwrap().len(), 1);
        assert_eq!(enumerate_trees(2).unwrap().len(), 1);
        let three = enumerate_trees(3).unwrap();
        assert_eq!(three.len(), 2);
        assert!(three.iter().any(|t| t.is_isomorphic(&p(3))));
        assert!(three.iter().any(|t| t.is_isomorphic(&Tree::star(3))));
        // Unlabeled trees on k+1 vertices for k = 1..8.
        let expected = [1, 1, 2, 3, 6, 11, 23, 47];
        for (k, &count) in (1..=8).zip(&expected) {
            assert_eq!(enumerate_trees(k).unwrap().len(), count, "k={k}");
        }
        assert!(matches!(enumerate_trees(9), Err(TreeError::TooLarge { .. })));
    }

    #[test]
    fn canonical_code_separates_p4_and_star() {
        assert!(!p(3).is_isomorphic(&Tree::star(3)));
        let relabeled = Tree::from_edges(4, &[(2, 3), (0, 3), (0, 1)]).unwrap();
        assert!(relabeled.is_isomorphic(&p(3)));
    }

    #[test]
    fn tree_file_round_trip_and_errors() {
        let text = "# a path\nvertices 4\n0 1\n1 2\n\n2 3\n";
        let t = parse_tree(text).unwrap();
        assert_eq!(t, p(3));
        assert_eq!(parse_tree(&format_tree(&t)).unwrap(), t);

        let cyclic = "vertices 3\n0 1\n1 2\n0 2\n";
        match parse_tree(cyclic).unwrap_err() {
            TreeFileError::Invalid { line, source } => {
                assert_eq!(line, 4);
                assert_eq!(source, TreeError::CycleDetected(0, 2));
            }
            other => panic!("unexpected: {other}"),
        }

        match parse_tree("vertices 3\n1 0\n").unwrap_err() {
            TreeFileError::Syntax { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected: {other}"),
        }
    }
}
