//! Spanning-tree invariants and the genus formulas built on them.
//!
//! The Betti deficiency `ζ(G)` is the minimum, over spanning trees `T`, of
//! the number of components of `G \ E(T)` with an odd number of edges. The
//! maximum genus is `(β - ζ) / 2`, and the essential genus adds the cost of
//! closing the `1 + ζ` boundary walks of a boundary-minimal fat graph with
//! pants (three at a time) and one-holed tori.

use num_rational::Ratio;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{GraphError, MetricGraph};
use crate::rotation::{self, genus_from_euler, RotationError, DEFAULT_ROTATION_CAP};

/// Default bound on the number of spanning trees visited.
pub const DEFAULT_TREE_CAP: u64 = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InvariantError {
    #[error("more than {cap} spanning trees; exhaustive Betti deficiency refused")]
    TreeCapExceeded { cap: u64 },
    #[error("graph is a tree (infinite girth)")]
    InfiniteGirth,
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Rotation(#[from] RotationError),
}

/// Enumeration limits shared by the exhaustive routines.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Limits {
    pub max_trees: u64,
    pub max_rotations: u64,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_trees: DEFAULT_TREE_CAP,
            max_rotations: DEFAULT_ROTATION_CAP,
        }
    }
}

/// Edge ids of a spanning tree, ascending.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SpanningTree {
    pub edges: Vec<usize>,
}

struct DisjointSet {
    parent: Vec<usize>,
}

impl DisjointSet {
    fn new(n: usize) -> Self {
        DisjointSet {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra] = rb;
        true
    }
}

/// All spanning trees of a connected graph, each exactly once. Fails once
/// more than `cap` trees have been found.
pub fn spanning_trees(g: &MetricGraph, cap: u64) -> Result<Vec<SpanningTree>, InvariantError> {
    let n = g.vertex_count();
    let m = g.edge_count();
    let mut out = Vec::new();
    let mut chosen = Vec::with_capacity(n.saturating_sub(1));
    let mut excluded = vec![false; m];
    search_trees(g, 0, &mut chosen, &mut excluded, cap, &mut out)?;
    Ok(out)
}

// Binary include/exclude branching in edge order. An edge may be excluded
// only while the remaining edges still connect the graph, so every leaf is a
// spanning tree.
fn search_trees(
    g: &MetricGraph,
    next: usize,
    chosen: &mut Vec<usize>,
    excluded: &mut [bool],
    cap: u64,
    out: &mut Vec<SpanningTree>,
) -> Result<(), InvariantError> {
    let n = g.vertex_count();
    if chosen.len() + 1 == n {
        if out.len() as u64 >= cap {
            return Err(InvariantError::TreeCapExceeded { cap });
        }
        out.push(SpanningTree {
            edges: chosen.clone(),
        });
        return Ok(());
    }
    if next == g.edge_count() {
        return Ok(());
    }
    let mut ds = DisjointSet::new(n);
    for &e in chosen.iter() {
        let (a, b) = g.endpoints(e);
        ds.union(a, b);
    }
    let (a, b) = g.endpoints(next);
    if ds.find(a) != ds.find(b) {
        chosen.push(next);
        search_trees(g, next + 1, chosen, excluded, cap, out)?;
        chosen.pop();
    }
    excluded[next] = true;
    if connected_without_excluded(g, excluded) {
        search_trees(g, next + 1, chosen, excluded, cap, out)?;
    }
    excluded[next] = false;
    Ok(())
}

fn connected_without_excluded(g: &MetricGraph, excluded: &[bool]) -> bool {
    let mut ds = DisjointSet::new(g.vertex_count());
    let mut joins = 0;
    for (e, _) in excluded.iter().enumerate().filter(|(_, &x)| !x) {
        let (a, b) = g.endpoints(e);
        if ds.union(a, b) {
            joins += 1;
        }
    }
    joins + 1 == g.vertex_count()
}

/// Number of components of the co-tree `G \ E(T)` with an odd number of
/// edges. Only vertices touched by co-tree edges take part.
pub fn xi(g: &MetricGraph, tree: &SpanningTree) -> usize {
    let mut in_tree = vec![false; g.edge_count()];
    for &e in &tree.edges {
        in_tree[e] = true;
    }
    let mut ds = DisjointSet::new(g.vertex_count());
    let cotree: Vec<usize> = (0..g.edge_count()).filter(|&e| !in_tree[e]).collect();
    for &e in &cotree {
        let (a, b) = g.endpoints(e);
        ds.union(a, b);
    }
    let mut edge_count = vec![0usize; g.vertex_count()];
    for &e in &cotree {
        let root = ds.find(g.endpoints(e).0);
        edge_count[root] += 1;
    }
    edge_count.iter().filter(|&&c| c % 2 == 1).count()
}

/// `ζ(G)`: minimum of [`xi`] over all spanning trees.
pub fn betti_deficiency(g: &MetricGraph, cap: u64) -> Result<usize, InvariantError> {
    let trees = spanning_trees(g, cap)?;
    Ok(trees.par_iter().map(|t| xi(g, t)).min().unwrap_or(0))
}

/// Xuong's maximum genus `(β - ζ) / 2`.
pub fn max_genus(g: &MetricGraph, cap: u64) -> Result<usize, InvariantError> {
    let zeta = betti_deficiency(g, cap)?;
    Ok((g.betti() - zeta) / 2)
}

/// `n = 3q + r` with `0 <= r < 3`.
pub fn qr_split(n: usize) -> (usize, usize) {
    (n / 3, n % 3)
}

/// Genus of the closed surface obtained from a genus-`genus` surface with
/// `boundaries` boundary curves by gluing a pair of pants to each of `q`
/// triples and a one-holed torus to each of the `r` leftovers.
pub fn capped_genus(genus: usize, boundaries: usize) -> usize {
    let (q, r) = qr_split(boundaries);
    genus + 2 * q + r
}

/// Essential genus `(β - ζ)/2 + 2q + r` with `ζ + 1 = 3q + r`.
///
/// Degree-2 vertices are smoothed first; degree-1 vertices and cycles are
/// rejected.
pub fn essential_genus(g: &MetricGraph, cap: u64) -> Result<usize, InvariantError> {
    g.require_embeddable()?;
    let g = g.smooth()?;
    let zeta = betti_deficiency(&g, cap)?;
    Ok(essential_genus_from(g.betti(), zeta))
}

pub fn essential_genus_from(beta: usize, zeta: usize) -> usize {
    capped_genus((beta - zeta) / 2, zeta + 1)
}

/// Upper bound `½(β + 1 + 2|E| / T)` on the genus of a minimal embedding.
pub fn ge_max_bound(g: &MetricGraph) -> Result<Ratio<u64>, InvariantError> {
    let girth = g.girth().ok_or(InvariantError::InfiniteGirth)? as u64;
    let beta = g.betti() as u64;
    let edges = g.edge_count() as u64;
    Ok(Ratio::new((beta + 1) * girth + 2 * edges, 2 * girth))
}

/// Largest standard-capped genus over all rotation systems, i.e. the
/// largest genus of a minimal embedding.
pub fn ge_max_exact(g: &MetricGraph, rotation_cap: u64) -> Result<usize, InvariantError> {
    let space = rotation::enumerate_rotations(g, rotation_cap)?;
    let survey = rotation::survey(g, &space);
    let euler = g.euler_char();
    let mut best = 0;
    for &b in survey.histogram.keys() {
        best = best.max(capped_genus(genus_from_euler(euler, b)?, b));
    }
    Ok(best)
}

/// Serializable summary of the invariants of one graph.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvariantReport {
    pub vertices: usize,
    pub edges: usize,
    pub beta: usize,
    pub zeta: usize,
    /// `None` for a tree.
    pub girth: Option<usize>,
    pub euler: i64,
    pub max_genus: usize,
    pub essential_genus: usize,
    pub q: usize,
    pub r: usize,
    /// Exact rational bound rendered as `num/den`.
    pub ge_max_bound: String,
    pub ge_max_bound_value: f64,
    /// Present when rotation enumeration fits under the cap.
    pub ge_max_exact: Option<usize>,
    pub spanning_trees: u64,
    pub rotation_systems: Option<u64>,
    /// ζ was computed over every spanning tree.
    pub zeta_exhaustive: bool,
    /// Degree-2 vertices suppressed before analysis.
    pub smoothed_vertices: usize,
}

/// Computes every invariant of `g` (smoothing degree-2 vertices first).
pub fn analyze(g: &MetricGraph, limits: Limits) -> Result<InvariantReport, InvariantError> {
    g.require_embeddable()?;
    let smoothed_vertices = g.suppressible_vertices();
    let g = g.smooth()?;
    let trees = spanning_trees(&g, limits.max_trees)?;
    let zeta = trees.par_iter().map(|t| xi(&g, t)).min().unwrap_or(0);
    let beta = g.betti();
    let (q, r) = qr_split(zeta + 1);
    let bound = ge_max_bound(&g)?;
    let ge_max_exact = match ge_max_exact(&g, limits.max_rotations) {
        Ok(v) => Some(v),
        Err(InvariantError::Rotation(RotationError::CapExceeded { .. })) => None,
        Err(e) => return Err(e),
    };
    Ok(InvariantReport {
        vertices: g.vertex_count(),
        edges: g.edge_count(),
        beta,
        zeta,
        girth: g.girth(),
        euler: g.euler_char(),
        max_genus: (beta - zeta) / 2,
        essential_genus: essential_genus_from(beta, zeta),
        q,
        r,
        ge_max_bound: format!("{}/{}", bound.numer(), bound.denom()),
        ge_max_bound_value: *bound.numer() as f64 / *bound.denom() as f64,
        ge_max_exact,
        spanning_trees: trees.len() as u64,
        rotation_systems: rotation::rotation_count(&g),
        zeta_exhaustive: true,
        smoothed_vertices,
    })
}
