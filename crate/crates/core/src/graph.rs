//! Finite metric graphs stored as darts (half-edges).
//!
//! Edge `i` owns darts `2i` (its first, "+" dart, at the first endpoint named
//! in the file) and `2i + 1` (its "-" dart, at the second endpoint). The
//! involution that reverses a dart is therefore `d ^ 1`.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;

use sha2::{Digest, Sha256};
use thiserror::Error;

/// A directed half-edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Dart(pub usize);

impl Dart {
    /// The reverse dart of the same edge.
    #[inline]
    pub fn twin(self) -> Dart {
        Dart(self.0 ^ 1)
    }

    #[inline]
    pub fn edge(self) -> usize {
        self.0 >> 1
    }

    /// `true` for the first dart `2i` of edge `i`.
    #[inline]
    pub fn is_forward(self) -> bool {
        self.0 & 1 == 0
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: edge `{edge}` has non-positive length {length}")]
    NonPositiveLength {
        line: usize,
        edge: String,
        length: f64,
    },
    #[error("edge `{0}` has non-positive or non-finite length")]
    InvalidLength(String),
    #[error("graph has no edges")]
    Empty,
    #[error("graph is disconnected ({components} components)")]
    Disconnected { components: usize },
    #[error("vertex `{vertex}` has degree 1")]
    DegreeOne { vertex: String },
    #[error("graph is a cycle: it embeds essentially and isometrically on a closed hyperbolic surface of any genus after rescaling")]
    IsCycle,
}

/// A finite metric graph.
///
/// Construction via [`MetricGraph::new`] only checks lengths; connectivity
/// is enforced by [`parse_graph`] and reported by [`MetricGraph::validate`].
#[derive(Clone, Debug, PartialEq)]
pub struct MetricGraph {
    vertex_names: Vec<String>,
    edge_names: Vec<String>,
    dart_vertex: Vec<usize>,
    lengths: Vec<f64>,
}

/// One record of an edge list: name, endpoints and length.
#[derive(Clone, Debug, PartialEq)]
pub struct EdgeSpec {
    pub name: String,
    pub tail: String,
    pub head: String,
    pub length: f64,
}

impl EdgeSpec {
    pub fn new(
        name: impl Into<String>,
        tail: impl Into<String>,
        head: impl Into<String>,
        length: f64,
    ) -> Self {
        EdgeSpec {
            name: name.into(),
            tail: tail.into(),
            head: head.into(),
            length,
        }
    }
}

impl MetricGraph {
    /// Builds a graph from edge records. Vertices are numbered in order of
    /// first mention, darts in record order.
    pub fn new(edges: &[EdgeSpec]) -> Result<Self, GraphError> {
        if edges.is_empty() {
            return Err(GraphError::Empty);
        }
        let mut index: BTreeMap<&str, usize> = BTreeMap::new();
        let mut vertex_names = Vec::new();
        let mut dart_vertex = Vec::with_capacity(2 * edges.len());
        let mut lengths = Vec::with_capacity(edges.len());
        let mut edge_names = Vec::with_capacity(edges.len());
        for e in edges {
            if !(e.length > 0.0 && e.length.is_finite()) {
                return Err(GraphError::InvalidLength(e.name.clone()));
            }
            for name in [&e.tail, &e.head] {
                let next = vertex_names.len();
                let id = *index.entry(name.as_str()).or_insert(next);
                if id == next {
                    vertex_names.push(name.clone());
                }
                dart_vertex.push(id);
            }
            lengths.push(e.length);
            edge_names.push(e.name.clone());
        }
        Ok(MetricGraph {
            vertex_names,
            edge_names,
            dart_vertex,
            lengths,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_names.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_names.len()
    }

    pub fn dart_count(&self) -> usize {
        self.dart_vertex.len()
    }

    pub fn darts(&self) -> impl Iterator<Item = Dart> {
        (0..self.dart_count()).map(Dart)
    }

    pub fn vertex_of(&self, d: Dart) -> usize {
        self.dart_vertex[d.0]
    }

    pub fn length(&self, edge: usize) -> f64 {
        self.lengths[edge]
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    pub fn total_length(&self) -> f64 {
        self.lengths.iter().sum()
    }

    pub fn vertex_name(&self, v: usize) -> &str {
        &self.vertex_names[v]
    }

    pub fn edge_name(&self, e: usize) -> &str {
        &self.edge_names[e]
    }

    pub fn vertex_id(&self, name: &str) -> Option<usize> {
        self.vertex_names.iter().position(|n| n == name)
    }

    pub fn edge_id(&self, name: &str) -> Option<usize> {
        self.edge_names.iter().position(|n| n == name)
    }

    /// Endpoints `(tail, head)` of an edge, i.e. the vertices of its `+` and `-` darts.
    pub fn endpoints(&self, edge: usize) -> (usize, usize) {
        (self.dart_vertex[2 * edge], self.dart_vertex[2 * edge + 1])
    }

    pub fn is_loop(&self, edge: usize) -> bool {
        let (a, b) = self.endpoints(edge);
        a == b
    }

    /// Darts emanating from `v`, ascending.
    pub fn darts_at(&self, v: usize) -> Vec<Dart> {
        self.darts().filter(|&d| self.vertex_of(d) == v).collect()
    }

    pub fn degree(&self, v: usize) -> usize {
        self.dart_vertex.iter().filter(|&&x| x == v).count()
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.vertex_count()];
        for &v in &self.dart_vertex {
            deg[v] += 1;
        }
        deg
    }

    /// Human-readable dart name, `<edge>+` or `<edge>-`.
    pub fn dart_name(&self, d: Dart) -> String {
        format!(
            "{}{}",
            self.edge_name(d.edge()),
            if d.is_forward() { '+' } else { '-' }
        )
    }

    pub fn parse_dart(&self, token: &str) -> Option<Dart> {
        let (name, sign) = token.split_at(token.len().checked_sub(1)?);
        let e = self.edge_id(name)?;
        match sign {
            "+" => Some(Dart(2 * e)),
            "-" => Some(Dart(2 * e + 1)),
            _ => None,
        }
    }

    pub fn edge_specs(&self) -> Vec<EdgeSpec> {
        (0..self.edge_count())
            .map(|e| {
                let (a, b) = self.endpoints(e);
                EdgeSpec::new(
                    self.edge_names[e].clone(),
                    self.vertex_names[a].clone(),
                    self.vertex_names[b].clone(),
                    self.lengths[e],
                )
            })
            .collect()
    }

    /// Edge-list text in the graph file format. Lengths use the shortest
    /// representation that round-trips.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        for e in self.edge_specs() {
            out.push_str(&format!(
                "edge {} {} {} {:?}\n",
                e.name, e.tail, e.head, e.length
            ));
        }
        out
    }

    /// SHA-256 of the edge list with lengths written to 12 significant
    /// digits, hex encoded.
    pub fn content_hash(&self) -> String {
        let mut text = String::new();
        for e in self.edge_specs() {
            text.push_str(&format!(
                "edge {} {} {} {:.11e}\n",
                e.name, e.tail, e.head, e.length
            ));
        }
        hex::encode(Sha256::digest(text.as_bytes()))
    }

    /// Number of connected components (vertices joined by edges).
    pub fn component_count(&self) -> usize {
        let n = self.vertex_count();
        let adj = self.adjacency();
        let mut seen = vec![false; n];
        let mut components = 0;
        for start in 0..n {
            if seen[start] {
                continue;
            }
            components += 1;
            seen[start] = true;
            let mut stack = vec![start];
            while let Some(v) = stack.pop() {
                for &(w, _) in &adj[v] {
                    if !seen[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
        }
        components
    }

    pub fn is_connected(&self) -> bool {
        self.component_count() == 1
    }

    /// Per-vertex list of `(neighbour, edge)`; loops appear twice.
    pub fn adjacency(&self) -> Vec<Vec<(usize, usize)>> {
        let mut adj = vec![Vec::new(); self.vertex_count()];
        for e in 0..self.edge_count() {
            let (a, b) = self.endpoints(e);
            adj[a].push((b, e));
            adj[b].push((a, e));
        }
        adj
    }

    /// First Betti number `|E| - |V| + 1`.
    pub fn betti(&self) -> usize {
        self.edge_count() + 1 - self.vertex_count()
    }

    /// `|V| - |E|`.
    pub fn euler_char(&self) -> i64 {
        self.vertex_count() as i64 - self.edge_count() as i64
    }

    /// Number of edges in a shortest simple cycle; `None` for a tree.
    pub fn girth(&self) -> Option<usize> {
        if (0..self.edge_count()).any(|e| self.is_loop(e)) {
            return Some(1);
        }
        let adj = self.adjacency();
        let mut best: Option<usize> = None;
        for e in 0..self.edge_count() {
            let (u, v) = self.endpoints(e);
            // shortest u-v path avoiding e, closed up by e
            let mut dist = vec![usize::MAX; self.vertex_count()];
            dist[u] = 0;
            let mut queue = VecDeque::from([u]);
            while let Some(x) = queue.pop_front() {
                if x == v {
                    break;
                }
                for &(y, f) in &adj[x] {
                    if f != e && dist[y] == usize::MAX {
                        dist[y] = dist[x] + 1;
                        queue.push_back(y);
                    }
                }
            }
            if dist[v] != usize::MAX {
                let len = dist[v] + 1;
                best = Some(best.map_or(len, |b| b.min(len)));
            }
        }
        best
    }

    /// A connected graph in which every vertex has degree 2.
    pub fn is_cycle(&self) -> bool {
        self.is_connected() && self.degrees().iter().all(|&d| d == 2)
    }

    /// Structural diagnostics; an empty list means the graph is valid with
    /// every degree at least `min_degree`.
    pub fn validate(&self, min_degree: usize) -> Vec<Violation> {
        let mut out = Vec::new();
        let components = self.component_count();
        if components != 1 {
            out.push(Violation::Disconnected { components });
        }
        for (v, &deg) in self.degrees().iter().enumerate() {
            if deg < min_degree {
                out.push(Violation::DegreeBelow {
                    vertex: self.vertex_names[v].clone(),
                    degree: deg,
                    floor: min_degree,
                });
            }
        }
        for (e, &len) in self.lengths.iter().enumerate() {
            if !(len > 0.0 && len.is_finite()) {
                out.push(Violation::NonPositiveLength {
                    edge: self.edge_names[e].clone(),
                    length: len,
                });
            }
        }
        out
    }

    /// Suppresses every degree-2 vertex, merging its two edges into one whose
    /// length is the sum. The merged edge keeps the name, position and
    /// orientation of whichever of the two edges comes first.
    pub fn smooth(&self) -> Result<MetricGraph, GraphError> {
        let comps = self.component_count();
        if comps != 1 {
            return Err(GraphError::Disconnected { components: comps });
        }
        if let Some(v) = self.degrees().iter().position(|&d| d == 1) {
            return Err(GraphError::DegreeOne {
                vertex: self.vertex_names[v].clone(),
            });
        }
        if self.is_cycle() {
            return Err(GraphError::IsCycle);
        }

        // Working copy as an edge list with optional (deleted) entries.
        let mut edges: Vec<Option<(usize, usize, f64)>> = (0..self.edge_count())
            .map(|e| {
                let (a, b) = self.endpoints(e);
                Some((a, b, self.lengths[e]))
            })
            .collect();
        let mut alive = vec![true; self.vertex_count()];
        loop {
            let mut degree = vec![0usize; self.vertex_count()];
            for &(a, b, _) in edges.iter().flatten() {
                degree[a] += 1;
                degree[b] += 1;
            }
            let Some(v) = (0..self.vertex_count()).find(|&v| alive[v] && degree[v] == 2) else {
                break;
            };
            let incident: Vec<usize> = edges
                .iter()
                .enumerate()
                .filter_map(|(i, e)| e.filter(|&(a, b, _)| a == v || b == v).map(|_| i))
                .collect();
            // A degree-2 vertex carrying a loop would make the graph a cycle,
            // which was excluded above and is preserved by suppression.
            debug_assert_eq!(incident.len(), 2);
            let (first, second) = (incident[0], incident[1]);
            let (a1, b1, l1) = edges[first].unwrap();
            let (a2, b2, l2) = edges[second].unwrap();
            let far_second = if a2 == v { b2 } else { a2 };
            let merged = if a1 == v {
                (far_second, b1, l1 + l2)
            } else {
                (a1, far_second, l1 + l2)
            };
            edges[first] = Some(merged);
            edges[second] = None;
            alive[v] = false;
        }

        let specs: Vec<EdgeSpec> = edges
            .iter()
            .enumerate()
            .filter_map(|(i, e)| {
                e.map(|(a, b, len)| {
                    EdgeSpec::new(
                        self.edge_names[i].clone(),
                        self.vertex_names[a].clone(),
                        self.vertex_names[b].clone(),
                        len,
                    )
                })
            })
            .collect();
        MetricGraph::new(&specs)
    }

    /// Vertices removed by [`MetricGraph::smooth`].
    pub fn suppressible_vertices(&self) -> usize {
        self.degrees().iter().filter(|&&d| d == 2).count()
    }

    /// Fails on the cases the embedding pipeline does not treat:
    /// disconnected graphs, degree-1 vertices and cycles.
    pub fn require_embeddable(&self) -> Result<(), GraphError> {
        let comps = self.component_count();
        if comps != 1 {
            return Err(GraphError::Disconnected { components: comps });
        }
        if let Some(v) = self.degrees().iter().position(|&d| d <= 1) {
            return Err(GraphError::DegreeOne {
                vertex: self.vertex_names[v].clone(),
            });
        }
        if self.is_cycle() {
            return Err(GraphError::IsCycle);
        }
        Ok(())
    }
}

/// One structural problem reported by [`MetricGraph::validate`].
#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    Disconnected {
        components: usize,
    },
    DegreeBelow {
        vertex: String,
        degree: usize,
        floor: usize,
    },
    NonPositiveLength {
        edge: String,
        length: f64,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Disconnected { components } => {
                write!(f, "graph is disconnected ({components} components)")
            }
            Violation::DegreeBelow {
                vertex,
                degree,
                floor,
            } => {
                write!(f, "vertex `{vertex}` has degree {degree} < {floor}")
            }
            Violation::NonPositiveLength { edge, length } => {
                write!(f, "edge `{edge}` has non-positive length {length}")
            }
        }
    }
}

fn is_name(token: &str) -> bool {
    !token.is_empty() && token.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Parses the edge-list format without the connectivity requirement.
pub fn parse_edge_list(text: &str) -> Result<MetricGraph, GraphError> {
    let mut specs = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let syntax = |message: String| GraphError::Syntax {
            line: line_no,
            message,
        };
        if fields[0] != "edge" {
            return Err(syntax(format!("expected `edge`, found `{}`", fields[0])));
        }
        if fields.len() != 5 {
            return Err(syntax(format!(
                "expected `edge <name> <vertex> <vertex> <length>`, found {} fields",
                fields.len()
            )));
        }
        for name in &fields[1..4] {
            if !is_name(name) {
                return Err(syntax(format!("`{name}` is not an alphanumeric name")));
            }
        }
        if specs.iter().any(|s: &EdgeSpec| s.name == fields[1]) {
            return Err(syntax(format!("duplicate edge name `{}`", fields[1])));
        }
        let length: f64 = fields[4]
            .parse()
            .map_err(|_| syntax(format!("`{}` is not a decimal length", fields[4])))?;
        if !length.is_finite() {
            return Err(syntax(format!("`{}` is not a decimal length", fields[4])));
        }
        if length <= 0.0 {
            return Err(GraphError::NonPositiveLength {
                line: line_no,
                edge: fields[1].to_string(),
                length,
            });
        }
        specs.push(EdgeSpec::new(fields[1], fields[2], fields[3], length));
    }
    MetricGraph::new(&specs)
}

/// Parses a graph file and requires the result to be connected.
pub fn parse_graph(text: &str) -> Result<MetricGraph, GraphError> {
    let g = parse_edge_list(text)?;
    let components = g.component_count();
    if components != 1 {
        return Err(GraphError::Disconnected { components });
    }
    Ok(g)
}
