//! Embedding schemas: blocks, gluings and the constructions that produce them.
//!
//! * [`naive_embedding`] glues a sphere `S(v)` per vertex and a pants
//!   `P_{x_e}` per edge, then closes every free `2x_e` cuff with a one-holed
//!   torus. The cyclic order of the sphere boundaries follows a rotation
//!   system, so the same surface also hosts the fat graph `(G, σ₀)`.
//! * [`assemble_sigma_surface`] records the bordered surface with spine
//!   `(G, σ₀)`: a single `ribbon_core` block whose boundaries are the
//!   boundary walks, with lengths kept symbolic. The host surface above is
//!   attached for the metric data.
//! * [`cap_standard`] closes a bordered schema with pants (three boundaries at
//!   a time) and one-holed tori; [`cap_target_genus`] then trades one cap
//!   for a higher-genus surface to reach a prescribed genus.
//! * [`verify_schema`] re-derives every identity from the schema alone.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::graph::{EdgeSpec, GraphError, MetricGraph};
use crate::hyperbolic::{self, choose_scale, HyperbolicError};
use crate::invariants::{capped_genus, qr_split};
use crate::rotation::{boundary_walks, fat_genus, RotationError, RotationSystem};

pub const SCHEMA_VERSION: u32 = 1;

/// Absolute tolerance for numeric length comparisons.
pub const LENGTH_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AssemblyError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Hyperbolic(#[from] HyperbolicError),
    #[error(transparent)]
    Rotation(#[from] RotationError),
    #[error("schema is already closed")]
    AlreadyClosed,
    #[error("schema has no ribbon core; only bordered fat-graph schemas can be capped")]
    NotBordered,
    #[error("target genus {target} is below the minimum {minimum} for this surface")]
    TargetTooSmall { target: usize, minimum: usize },
}

/// Rounds to 12 significant digits, the precision used in schema files.
pub fn sig12(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.11e}").parse().expect("formatted float parses")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockKind {
    VertexSphere,
    EdgePants,
    CapPants,
    CapTorus,
    CapSurface,
    /// Bordered surface deformation-retracting onto the fat graph.
    RibbonCore,
}

impl BlockKind {
    fn is_cap(self) -> bool {
        matches!(
            self,
            BlockKind::CapPants | BlockKind::CapTorus | BlockKind::CapSurface
        )
    }
}

/// Boundary length: a number, or a reference shared by the boundaries it names.
#[derive(Clone, Debug, PartialEq)]
pub enum Length {
    Numeric(f64),
    Symbolic(String),
}

impl Serialize for Length {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Length::Numeric(x) => s.serialize_f64(*x),
            Length::Symbolic(label) => s.serialize_str(&format!("sym:{label}")),
        }
    }
}

impl<'de> Deserialize<'de> for Length {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(x) => Ok(Length::Numeric(x)),
            Raw::Str(s) => s
                .strip_prefix("sym:")
                .map(|l| Length::Symbolic(l.to_string()))
                .ok_or_else(|| {
                    serde::de::Error::custom(format!("length `{s}` lacks the `sym:` prefix"))
                }),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundarySlot {
    pub label: String,
    pub length: Length,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Payload {
    Vertex {
        vertex: String,
        degree: usize,
        /// Orthogeodesic foot length `x_v`.
        foot: f64,
    },
    Edge {
        edge: String,
        tail: String,
        head: String,
        /// Input length `d(e)`.
        length: f64,
        /// `l(e) = x_u + x_v`.
        clearance: f64,
        /// `x_e`.
        waist: f64,
    },
    Core {
        /// Rotation lines, one per vertex.
        rotation: Vec<String>,
        /// Boundary walks as dart names, in boundary-label order.
        walks: Vec<Vec<String>>,
        euler: i64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Block {
    pub id: String,
    pub kind: BlockKind,
    pub genus: usize,
    pub boundaries: Vec<BoundarySlot>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub payload: Option<Payload>,
}

impl Block {
    pub fn euler(&self) -> i64 {
        2 - 2 * self.genus as i64 - self.boundaries.len() as i64
    }

    fn slot(&self, label: &str) -> Option<&BoundarySlot> {
        self.boundaries.iter().find(|s| s.label == label)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Side {
    pub block: String,
    pub label: String,
}

impl Side {
    fn new(block: &str, label: &str) -> Self {
        Side {
            block: block.to_string(),
            label: label.to_string(),
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.block, self.label)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Gluing {
    pub a: Side,
    pub b: Side,
    /// Offset from the marked orthogeodesic feet; always 0 here.
    pub twist: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Construction {
    Naive,
    Sigma,
    SigmaTarget(usize),
}

impl fmt::Display for Construction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Construction::Naive => write!(f, "naive"),
            Construction::Sigma => write!(f, "sigma"),
            Construction::SigmaTarget(g) => write!(f, "sigma_target({g})"),
        }
    }
}

impl FromStr for Construction {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "naive" => Ok(Construction::Naive),
            "sigma" => Ok(Construction::Sigma),
            _ => s
                .strip_prefix("sigma_target(")
                .and_then(|r| r.strip_suffix(')'))
                .and_then(|g| g.parse().ok())
                .map(Construction::SigmaTarget)
                .ok_or_else(|| format!("unknown construction `{s}`")),
        }
    }
}

impl Serialize for Construction {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Construction {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?
            .parse()
            .map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub genus: usize,
    pub boundary_count: usize,
    pub minimal: bool,
    pub construction: Construction,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    pub graph_hash: String,
    pub vertices: usize,
    pub edges: usize,
    pub t: f64,
    pub delta: f64,
    pub f_min: f64,
    /// Rotation lines the vertex spheres follow.
    pub rotation: Vec<String>,
    pub construction: Construction,
    /// Degree-2 vertices suppressed before construction.
    #[serde(default)]
    pub smoothed_vertices: usize,
    pub provenance: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurfaceSchema {
    pub schema_version: u32,
    pub meta: Meta,
    pub blocks: Vec<Block>,
    pub gluings: Vec<Gluing>,
    pub summary: Summary,
    /// Closed block surface carrying the isometric copy of the graph, for
    /// schemas built from a ribbon core.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub host: Option<Box<SurfaceSchema>>,
}

impl SurfaceSchema {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("schema serializes") + "\n"
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn block(&self, id: &str) -> Option<&Block> {
        self.blocks.iter().find(|b| b.id == id)
    }

    /// Boundary slots not taking part in any gluing, in block order.
    pub fn free_boundaries(&self) -> Vec<Side> {
        let glued: BTreeSet<&Side> = self.gluings.iter().flat_map(|g| [&g.a, &g.b]).collect();
        self.blocks
            .iter()
            .flat_map(|b| b.boundaries.iter().map(move |s| Side::new(&b.id, &s.label)))
            .filter(|s| !glued.contains(s))
            .collect()
    }

    pub fn euler(&self) -> i64 {
        self.blocks.iter().map(Block::euler).sum()
    }
}

fn sphere_id(g: &MetricGraph, v: usize) -> String {
    format!("S:{}", g.vertex_name(v))
}

fn pants_id(g: &MetricGraph, e: usize) -> String {
    format!("P:{}", g.edge_name(e))
}

/// Closed surface of genus `|E| + β(G)`: vertex spheres and edge pants glued
/// along their unit cuffs, each free `2x_e` cuff capped by a one-holed torus.
/// Sphere boundaries are listed in the cyclic order given by `rotation`.
pub fn naive_embedding(
    g: &MetricGraph,
    rotation: &RotationSystem,
    margin: f64,
) -> Result<SurfaceSchema, AssemblyError> {
    g.require_embeddable()?;
    let scale = choose_scale(g, margin)?;
    let mut blocks = Vec::new();
    let mut gluings = Vec::new();

    for (v, degree) in g.degrees().into_iter().enumerate() {
        blocks.push(Block {
            id: sphere_id(g, v),
            kind: BlockKind::VertexSphere,
            genus: 0,
            boundaries: rotation
                .cycle(v)
                .iter()
                .map(|&d| BoundarySlot {
                    label: g.dart_name(d),
                    length: Length::Numeric(1.0),
                })
                .collect(),
            payload: Some(Payload::Vertex {
                vertex: g.vertex_name(v).to_string(),
                degree,
                foot: sig12(scale.foot[v]),
            }),
        });
    }
    for e in 0..g.edge_count() {
        let (tail, head) = g.endpoints(e);
        let pid = pants_id(g, e);
        let cuff = sig12(2.0 * scale.waist[e]);
        blocks.push(Block {
            id: pid.clone(),
            kind: BlockKind::EdgePants,
            genus: 0,
            boundaries: vec![
                BoundarySlot {
                    label: "+".into(),
                    length: Length::Numeric(1.0),
                },
                BoundarySlot {
                    label: "-".into(),
                    length: Length::Numeric(1.0),
                },
                BoundarySlot {
                    label: "waist".into(),
                    length: Length::Numeric(cuff),
                },
            ],
            payload: Some(Payload::Edge {
                edge: g.edge_name(e).to_string(),
                tail: g.vertex_name(tail).to_string(),
                head: g.vertex_name(head).to_string(),
                length: sig12(g.length(e)),
                clearance: sig12(scale.clearance[e]),
                waist: sig12(scale.waist[e]),
            }),
        });
        let plus = format!("{}+", g.edge_name(e));
        let minus = format!("{}-", g.edge_name(e));
        gluings.push(Gluing {
            a: Side::new(&sphere_id(g, tail), &plus),
            b: Side::new(&pid, "+"),
            twist: 0.0,
        });
        gluings.push(Gluing {
            a: Side::new(&sphere_id(g, head), &minus),
            b: Side::new(&pid, "-"),
            twist: 0.0,
        });
    }
    for e in 0..g.edge_count() {
        let tid = format!("T:{}", g.edge_name(e));
        let cuff = sig12(2.0 * scale.waist[e]);
        blocks.push(Block {
            id: tid.clone(),
            kind: BlockKind::CapTorus,
            genus: 1,
            boundaries: vec![BoundarySlot {
                label: "cuff".into(),
                length: Length::Numeric(cuff),
            }],
            payload: None,
        });
        gluings.push(Gluing {
            a: Side::new(&pants_id(g, e), "waist"),
            b: Side::new(&tid, "cuff"),
            twist: 0.0,
        });
    }

    Ok(SurfaceSchema {
        schema_version: SCHEMA_VERSION,
        meta: Meta {
            graph_hash: g.content_hash(),
            vertices: g.vertex_count(),
            edges: g.edge_count(),
            t: sig12(scale.t),
            delta: sig12(margin),
            f_min: sig12(scale.f_min),
            rotation: rotation.to_lines(g),
            construction: Construction::Naive,
            smoothed_vertices: 0,
            provenance: "vertex spheres and edge pants glued along the graph; free cuffs closed by one-holed tori".into(),
        },
        blocks,
        gluings,
        summary: Summary {
            genus: g.edge_count() + g.betti(),
            boundary_count: 0,
            minimal: false,
            construction: Construction::Naive,
        },
        host: None,
    })
}

fn walk_label(i: usize, count: usize) -> String {
    let width = count.saturating_sub(1).to_string().len();
    format!("w{i:0width$}")
}

/// Bordered surface with spine `(G, rotation)`: genus `g` and `b` boundaries
/// with `2 - 2g - b = χ(G)`, one symbolic boundary per boundary walk.
pub fn assemble_sigma_surface(
    g: &MetricGraph,
    rotation: &RotationSystem,
    margin: f64,
) -> Result<SurfaceSchema, AssemblyError> {
    let host = naive_embedding(g, rotation, margin)?;
    let walks = boundary_walks(g, rotation);
    let genus = fat_genus(g, rotation)?;
    let b = walks.len();
    let core = Block {
        id: "core".into(),
        kind: BlockKind::RibbonCore,
        genus,
        boundaries: (0..b)
            .map(|i| {
                let label = walk_label(i, b);
                BoundarySlot {
                    length: Length::Symbolic(label.clone()),
                    label,
                }
            })
            .collect(),
        payload: Some(Payload::Core {
            rotation: rotation.to_lines(g),
            walks: walks.iter().map(|w| w.names(g)).collect(),
            euler: g.euler_char(),
        }),
    };
    let mut meta = host.meta.clone();
    meta.construction = Construction::Sigma;
    meta.provenance = "ribbon core of the fat graph inside the rotation-respecting block surface (host); boundary lengths are symbolic geodesic lengths of the walks".into();
    Ok(SurfaceSchema {
        schema_version: SCHEMA_VERSION,
        meta,
        blocks: vec![core],
        gluings: Vec::new(),
        summary: Summary {
            genus,
            boundary_count: b,
            minimal: false,
            construction: Construction::Sigma,
        },
        host: Some(Box::new(host)),
    })
}

fn require_bordered(schema: &SurfaceSchema) -> Result<(), AssemblyError> {
    if !schema
        .blocks
        .iter()
        .any(|b| b.kind == BlockKind::RibbonCore)
    {
        return Err(AssemblyError::NotBordered);
    }
    if schema.summary.boundary_count == 0 || schema.free_boundaries().is_empty() {
        return Err(AssemblyError::AlreadyClosed);
    }
    Ok(())
}

/// Closes a bordered schema: with `b = 3q + r`, glues `q` pants to the
/// boundaries in label order, three at a time, and a one-holed torus to each
/// of the `r` remaining ones. Genus grows by `2q + r`.
pub fn cap_standard(schema: &SurfaceSchema) -> Result<SurfaceSchema, AssemblyError> {
    require_bordered(schema)?;
    let mut free: Vec<(Side, Length)> = schema
        .free_boundaries()
        .into_iter()
        .map(|side| {
            let len = schema
                .block(&side.block)
                .and_then(|b| b.slot(&side.label))
                .map(|s| s.length.clone())
                .expect("free side exists");
            (side, len)
        })
        .collect();
    free.sort_by(|x, y| (&x.0.label, &x.0.block).cmp(&(&y.0.label, &y.0.block)));
    let b = free.len();
    let (q, r) = qr_split(b);

    let mut out = schema.clone();
    for k in 0..q {
        let id = format!("Y{k}");
        let triple = &free[3 * k..3 * k + 3];
        out.blocks.push(Block {
            id: id.clone(),
            kind: BlockKind::CapPants,
            genus: 0,
            boundaries: triple
                .iter()
                .enumerate()
                .map(|(i, (_, len))| BoundarySlot {
                    label: format!("c{i}"),
                    length: len.clone(),
                })
                .collect(),
            payload: None,
        });
        for (i, (side, _)) in triple.iter().enumerate() {
            out.gluings.push(Gluing {
                a: side.clone(),
                b: Side::new(&id, &format!("c{i}")),
                twist: 0.0,
            });
        }
    }
    for (k, (side, len)) in free[3 * q..].iter().enumerate() {
        let id = format!("F{k}");
        out.blocks.push(Block {
            id: id.clone(),
            kind: BlockKind::CapTorus,
            genus: 1,
            boundaries: vec![BoundarySlot {
                label: "c0".into(),
                length: len.clone(),
            }],
            payload: None,
        });
        out.gluings.push(Gluing {
            a: side.clone(),
            b: Side::new(&id, "c0"),
            twist: 0.0,
        });
    }
    out.summary = Summary {
        genus: capped_genus(schema.summary.genus, b),
        boundary_count: 0,
        minimal: true,
        construction: Construction::Sigma,
    };
    out.meta.construction = Construction::Sigma;
    debug_assert_eq!(r, free.len() - 3 * q);
    Ok(out)
}

/// Closes a bordered schema at genus `target`. The standard capping is built
/// first; if `target` exceeds its genus by `g' > 0`, the first cap pants is
/// replaced by a genus-`g'` surface with three boundaries when `b ≡ 0 (mod 3)`,
/// otherwise the first one-holed torus is replaced by a genus-`(g' + 1)`
/// surface with one boundary.
pub fn cap_target_genus(
    schema: &SurfaceSchema,
    target: usize,
) -> Result<SurfaceSchema, AssemblyError> {
    let mut out = cap_standard(schema)?;
    let base = out.summary.genus;
    if target < base {
        return Err(AssemblyError::TargetTooSmall {
            target,
            minimum: base,
        });
    }
    let extra = target - base;
    if extra > 0 {
        let b = schema.summary.boundary_count;
        let (kind, genus) = if b.is_multiple_of(3) {
            (BlockKind::CapPants, extra)
        } else {
            (BlockKind::CapTorus, extra + 1)
        };
        let idx = out
            .blocks
            .iter()
            .position(|blk| blk.kind == kind)
            .expect("standard capping contains the required cap");
        let old_id = out.blocks[idx].id.clone();
        let new_id = "Z0".to_string();
        out.blocks[idx].kind = BlockKind::CapSurface;
        out.blocks[idx].genus = genus;
        out.blocks[idx].id = new_id.clone();
        for gl in &mut out.gluings {
            for side in [&mut gl.a, &mut gl.b] {
                if side.block == old_id {
                    side.block = new_id.clone();
                }
            }
        }
    }
    out.summary.genus = target;
    out.summary.minimal = extra == 0;
    out.summary.construction = Construction::SigmaTarget(target);
    out.meta.construction = Construction::SigmaTarget(target);
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    Error,
    Note,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub code: String,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Note => "note",
        };
        write!(f, "{sev}[{}]: {}", self.code, self.message)
    }
}

/// No error-level diagnostics.
pub fn is_clean(diags: &[Diagnostic]) -> bool {
    diags.iter().all(|d| d.severity != Severity::Error)
}

struct Report(Vec<Diagnostic>);

impl Report {
    fn error(&mut self, code: &str, message: String) {
        self.0.push(Diagnostic {
            severity: Severity::Error,
            code: code.into(),
            message,
        });
    }

    fn note(&mut self, code: &str, message: String) {
        self.0.push(Diagnostic {
            severity: Severity::Note,
            code: code.into(),
            message,
        });
    }
}

/// Checks a schema against the identities its construction must satisfy.
pub fn verify_schema(schema: &SurfaceSchema) -> Vec<Diagnostic> {
    let mut rep = Report(Vec::new());
    if schema.schema_version != SCHEMA_VERSION {
        rep.error(
            "version",
            format!(
                "schema_version {} is not {SCHEMA_VERSION}",
                schema.schema_version
            ),
        );
    }
    if schema.meta.construction != schema.summary.construction {
        rep.error(
            "meta",
            format!(
                "meta construction {} differs from summary construction {}",
                schema.meta.construction, schema.summary.construction
            ),
        );
    }
    check_blocks(schema, &mut rep);
    check_gluings(schema, &mut rep);
    check_topology(schema, &mut rep);
    check_minimality(schema, &mut rep);
    match schema.summary.construction {
        Construction::Naive => check_naive(schema, &mut rep),
        Construction::Sigma | Construction::SigmaTarget(_) => check_sigma(schema, &mut rep),
    }
    rep.0
}

fn check_blocks(schema: &SurfaceSchema, rep: &mut Report) {
    let mut ids = BTreeSet::new();
    for b in &schema.blocks {
        if !ids.insert(b.id.as_str()) {
            rep.error("block", format!("duplicate block id `{}`", b.id));
        }
        let labels: BTreeSet<&str> = b.boundaries.iter().map(|s| s.label.as_str()).collect();
        if labels.len() != b.boundaries.len() {
            rep.error(
                "block",
                format!("block `{}` repeats a boundary label", b.id),
            );
        }
        for s in &b.boundaries {
            if let Length::Numeric(x) = s.length {
                if !(x > 0.0 && x.is_finite()) {
                    rep.error(
                        "length",
                        format!("{}/{} has non-positive length {x}", b.id, s.label),
                    );
                }
            }
        }
        let numeric = |label: &str| match b.slot(label).map(|s| &s.length) {
            Some(Length::Numeric(x)) => Some(*x),
            _ => None,
        };
        match b.kind {
            BlockKind::VertexSphere => {
                let Some(Payload::Vertex { degree, foot, .. }) = &b.payload else {
                    rep.error("block", format!("sphere `{}` lacks a vertex payload", b.id));
                    continue;
                };
                if b.genus != 0 || b.boundaries.len() != *degree {
                    rep.error(
                        "block",
                        format!(
                            "sphere `{}` must have genus 0 and {degree} boundaries",
                            b.id
                        ),
                    );
                }
                for s in &b.boundaries {
                    if !matches!(s.length, Length::Numeric(x) if (x - 1.0).abs() <= LENGTH_TOLERANCE)
                    {
                        rep.error(
                            "length",
                            format!("sphere boundary {}/{} is not of length 1", b.id, s.label),
                        );
                    }
                }
                match hyperbolic::foot_length(*degree) {
                    Ok(x) if (x - foot).abs() <= LENGTH_TOLERANCE => {}
                    _ => rep.error(
                        "geometry",
                        format!("sphere `{}` foot length {foot} is wrong", b.id),
                    ),
                }
            }
            BlockKind::EdgePants => {
                let Some(Payload::Edge { waist, .. }) = &b.payload else {
                    rep.error("block", format!("pants `{}` lacks an edge payload", b.id));
                    continue;
                };
                let ok = b.genus == 0
                    && b.boundaries.len() == 3
                    && numeric("+").is_some_and(|x| (x - 1.0).abs() <= LENGTH_TOLERANCE)
                    && numeric("-").is_some_and(|x| (x - 1.0).abs() <= LENGTH_TOLERANCE)
                    && numeric("waist")
                        .is_some_and(|x| (x - 2.0 * waist).abs() <= LENGTH_TOLERANCE);
                if !ok {
                    rep.error(
                        "length",
                        format!(
                            "edge pants `{}` must have cuffs (1, 1, 2x_e) with x_e = {waist}",
                            b.id
                        ),
                    );
                }
            }
            BlockKind::CapPants => {
                if b.genus != 0 || b.boundaries.len() != 3 {
                    rep.error(
                        "block",
                        format!("cap pants `{}` must be genus 0 with 3 boundaries", b.id),
                    );
                }
            }
            BlockKind::CapTorus => {
                if b.genus != 1 || b.boundaries.len() != 1 {
                    rep.error(
                        "block",
                        format!("cap torus `{}` must be genus 1 with 1 boundary", b.id),
                    );
                }
            }
            BlockKind::CapSurface => {
                if b.boundaries.is_empty() || b.euler() > -1 {
                    rep.error(
                        "block",
                        format!("cap surface `{}` must be bordered with χ ≤ -1", b.id),
                    );
                }
            }
            BlockKind::RibbonCore => {
                let Some(Payload::Core { walks, euler, .. }) = &b.payload else {
                    rep.error(
                        "block",
                        format!("core `{}` lacks its fat-graph payload", b.id),
                    );
                    continue;
                };
                if walks.len() != b.boundaries.len() {
                    rep.error(
                        "spine",
                        format!(
                            "core has {} boundaries but {} boundary walks",
                            b.boundaries.len(),
                            walks.len()
                        ),
                    );
                }
                if b.euler() != *euler {
                    rep.error(
                        "spine",
                        format!(
                            "core χ = {} differs from the graph's χ = {euler}",
                            b.euler()
                        ),
                    );
                }
            }
        }
    }
}

fn check_gluings(schema: &SurfaceSchema, rep: &mut Report) {
    let mut used: BTreeMap<Side, usize> = BTreeMap::new();
    for (i, gl) in schema.gluings.iter().enumerate() {
        let mut lengths = Vec::new();
        for side in [&gl.a, &gl.b] {
            match schema.block(&side.block).and_then(|b| b.slot(&side.label)) {
                Some(slot) => lengths.push(slot.length.clone()),
                None => rep.error(
                    "gluing",
                    format!("gluing {i} refers to missing boundary {side}"),
                ),
            }
            if let Some(prev) = used.insert(side.clone(), i) {
                rep.error(
                    "gluing",
                    format!("boundary {side} is glued by both gluing {prev} and {i}"),
                );
            }
        }
        if gl.a == gl.b {
            rep.error("gluing", format!("gluing {i} glues {} to itself", gl.a));
        }
        if gl.twist != 0.0 {
            rep.note(
                "twist",
                format!("gluing {i} has non-zero twist {}", gl.twist),
            );
        }
        if let [x, y] = &lengths[..] {
            let matched = match (x, y) {
                (Length::Numeric(p), Length::Numeric(q)) => (p - q).abs() <= LENGTH_TOLERANCE,
                (Length::Symbolic(p), Length::Symbolic(q)) => p == q,
                _ => false,
            };
            if !matched {
                rep.error(
                    "length",
                    format!(
                        "gluing {i} joins {} and {} of different lengths",
                        gl.a, gl.b
                    ),
                );
            }
        }
    }
}

fn check_topology(schema: &SurfaceSchema, rep: &mut Report) {
    let free = schema.free_boundaries();
    if free.len() != schema.summary.boundary_count {
        let listed: Vec<String> = free.iter().map(|s| s.to_string()).collect();
        rep.error(
            "dangling",
            format!(
                "{} free boundaries [{}] but summary declares {}",
                free.len(),
                listed.join(", "),
                schema.summary.boundary_count
            ),
        );
    }
    // connectivity of the block adjacency
    let index: BTreeMap<&str, usize> = schema
        .blocks
        .iter()
        .enumerate()
        .map(|(i, b)| (b.id.as_str(), i))
        .collect();
    let mut parent: Vec<usize> = (0..schema.blocks.len()).collect();
    fn root(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            x = p[x];
        }
        x
    }
    for gl in &schema.gluings {
        if let (Some(&a), Some(&b)) = (
            index.get(gl.a.block.as_str()),
            index.get(gl.b.block.as_str()),
        ) {
            let (ra, rb) = (root(&mut parent, a), root(&mut parent, b));
            parent[ra] = rb;
        }
    }
    let comps = (0..schema.blocks.len())
        .filter(|&i| root(&mut parent, i) == i)
        .count();
    if comps != 1 {
        rep.error("topology", format!("blocks form {comps} connected pieces"));
    }
    let euler = schema.euler();
    let twice = 2 - euler - free.len() as i64;
    if twice < 0 || twice % 2 != 0 || (twice / 2) as usize != schema.summary.genus {
        rep.error(
            "euler",
            format!(
                "χ = {euler} with {} free boundaries gives 2g = {twice}, summary genus is {}",
                free.len(),
                schema.summary.genus
            ),
        );
    }
}

fn check_minimality(schema: &SurfaceSchema, rep: &mut Report) {
    let caps: Vec<&Block> = schema.blocks.iter().filter(|b| b.kind.is_cap()).collect();
    for b in caps.iter().filter(|b| b.euler() != -1) {
        rep.note(
            "minimality",
            format!("cap `{}` has χ = {} (non-minimal region)", b.id, b.euler()),
        );
    }
    let all_unit = caps.iter().all(|b| b.euler() == -1);
    let closed = schema.summary.boundary_count == 0;
    let expected = schema.summary.construction != Construction::Naive && closed && all_unit;
    if schema.summary.minimal != expected {
        rep.error(
            "minimality",
            format!(
                "minimal flag is {} but the caps say {}",
                schema.summary.minimal, expected
            ),
        );
    }
}

fn check_naive(schema: &SurfaceSchema, rep: &mut Report) {
    let spheres: Vec<&Block> = schema
        .blocks
        .iter()
        .filter(|b| b.kind == BlockKind::VertexSphere)
        .collect();
    let pants: Vec<&Block> = schema
        .blocks
        .iter()
        .filter(|b| b.kind == BlockKind::EdgePants)
        .collect();
    let deg_excess: i64 = spheres.iter().map(|b| b.boundaries.len() as i64 - 2).sum();
    let edges = pants.len() as i64;
    let g = schema.summary.genus as i64;
    if 2 * g - 2 != deg_excess + 2 * edges {
        rep.error(
            "naive_identity",
            format!(
                "2g - 2 = {} but Σ(deg v - 2) + 2|E| = {}",
                2 * g - 2,
                deg_excess + 2 * edges
            ),
        );
    }
    let beta = edges - spheres.len() as i64 + 1;
    if g != edges + beta {
        rep.error(
            "naive_identity",
            format!("genus {g} differs from |E| + β = {}", edges + beta),
        );
    }
    if spheres.len() != schema.meta.vertices || pants.len() != schema.meta.edges {
        rep.error(
            "meta",
            "block counts differ from meta vertex/edge counts".into(),
        );
    }

    let Some(graph) = rebuild_graph(schema, rep) else {
        return;
    };
    if graph.content_hash() != schema.meta.graph_hash {
        rep.error("meta", "graph hash does not match the edge pants".into());
    }
    let gluing_of: BTreeMap<&Side, &Side> = schema
        .gluings
        .iter()
        .flat_map(|gl| [(&gl.a, &gl.b), (&gl.b, &gl.a)])
        .collect();
    for p in &pants {
        let Some(Payload::Edge {
            edge, tail, head, ..
        }) = &p.payload
        else {
            continue;
        };
        for (cuff, vertex, dart) in [
            ("+", tail, format!("{edge}+")),
            ("-", head, format!("{edge}-")),
        ] {
            let want = Side::new(&format!("S:{vertex}"), &dart);
            if gluing_of.get(&Side::new(&p.id, cuff)) != Some(&&want) {
                rep.error(
                    "incidence",
                    format!(
                        "cuff {}/{cuff} is not glued to sphere boundary {want}",
                        p.id
                    ),
                );
            }
        }
        match gluing_of.get(&Side::new(&p.id, "waist")) {
            Some(other)
                if schema
                    .block(&other.block)
                    .is_some_and(|b| b.kind == BlockKind::CapTorus) => {}
            _ => rep.error(
                "incidence",
                format!("waist of {} is not capped by a one-holed torus", p.id),
            ),
        }
    }
    check_scale(schema, &graph, rep);
    match RotationSystem::parse(&graph, &schema.meta.rotation.join("\n")) {
        Ok(rotation) => {
            for s in &spheres {
                let Some(Payload::Vertex { vertex, .. }) = &s.payload else {
                    continue;
                };
                let Some(v) = graph.vertex_id(vertex) else {
                    rep.error(
                        "rotation_order",
                        format!("sphere `{}` names unknown vertex", s.id),
                    );
                    continue;
                };
                let expected: Vec<String> = rotation
                    .cycle(v)
                    .iter()
                    .map(|&d| graph.dart_name(d))
                    .collect();
                let actual: Vec<String> = s.boundaries.iter().map(|b| b.label.clone()).collect();
                if !same_cycle(&expected, &actual) {
                    rep.error(
                        "rotation_order",
                        format!("sphere `{}` boundary order differs from its rotation", s.id),
                    );
                }
            }
        }
        Err(e) => rep.error("rotation_order", format!("meta rotation is invalid: {e}")),
    }
}

fn same_cycle(a: &[String], b: &[String]) -> bool {
    if a.len() != b.len() {
        return false;
    }
    if a.is_empty() {
        return true;
    }
    (0..b.len()).any(|shift| (0..a.len()).all(|i| a[i] == b[(i + shift) % b.len()]))
}

fn rebuild_graph(schema: &SurfaceSchema, rep: &mut Report) -> Option<MetricGraph> {
    let specs: Vec<EdgeSpec> = schema
        .blocks
        .iter()
        .filter_map(|b| match &b.payload {
            Some(Payload::Edge {
                edge,
                tail,
                head,
                length,
                ..
            }) => Some(EdgeSpec::new(
                edge.clone(),
                tail.clone(),
                head.clone(),
                *length,
            )),
            _ => None,
        })
        .collect();
    match MetricGraph::new(&specs) {
        Ok(g) => Some(g),
        Err(e) => {
            rep.error("meta", format!("edge pants do not describe a graph: {e}"));
            None
        }
    }
}

fn check_scale(schema: &SurfaceSchema, graph: &MetricGraph, rep: &mut Report) {
    let t = schema.meta.t;
    let fm = hyperbolic::f_min();
    for b in &schema.blocks {
        let Some(Payload::Edge {
            edge,
            length,
            clearance,
            waist,
            ..
        }) = &b.payload
        else {
            continue;
        };
        let e = graph
            .edge_id(edge)
            .expect("graph rebuilt from these payloads");
        match hyperbolic::edge_clearance(graph, e) {
            Ok(l) if (l - clearance).abs() <= LENGTH_TOLERANCE => {}
            _ => rep.error(
                "geometry",
                format!("edge `{edge}` clearance {clearance} is wrong"),
            ),
        }
        let available = t * length - clearance;
        if available < fm + schema.meta.delta - LENGTH_TOLERANCE {
            rep.error(
                "geometry",
                format!("edge `{edge}`: t·d - l = {available} is below f_min + δ"),
            );
            continue;
        }
        match hyperbolic::waist_distance(*waist) {
            Ok(f) if (f - available).abs() <= LENGTH_TOLERANCE => {}
            _ => rep.error(
                "geometry",
                format!("edge `{edge}`: f(x_e) does not equal t·d(e) - l(e) = {available}"),
            ),
        }
    }
}

fn check_sigma(schema: &SurfaceSchema, rep: &mut Report) {
    let cores: Vec<&Block> = schema
        .blocks
        .iter()
        .filter(|b| b.kind == BlockKind::RibbonCore)
        .collect();
    let [core] = cores[..] else {
        rep.error(
            "spine",
            format!("expected exactly one ribbon core, found {}", cores.len()),
        );
        return;
    };
    let expected_euler = schema.meta.vertices as i64 - schema.meta.edges as i64;
    if core.euler() != expected_euler {
        rep.error(
            "spine",
            format!(
                "core χ = {} but χ(G) = |V| - |E| = {expected_euler}",
                core.euler()
            ),
        );
    }
    if let Construction::SigmaTarget(target) = schema.summary.construction {
        if schema.summary.genus != target {
            rep.error(
                "genus",
                format!(
                    "target genus {target} differs from summary genus {}",
                    schema.summary.genus
                ),
            );
        }
    }
    if schema.summary.boundary_count == 0 {
        let b = core.boundaries.len();
        let nonstandard = schema
            .blocks
            .iter()
            .any(|b| b.kind == BlockKind::CapSurface);
        let standard = capped_genus(core.genus, b);
        if !nonstandard && schema.summary.genus != standard {
            rep.error(
                "genus",
                format!(
                    "standard capping of genus {} with {b} boundaries gives {standard}",
                    core.genus
                ),
            );
        }
    }
    let Some(host) = &schema.host else {
        rep.error("host", "ribbon-core schema lacks its host surface".into());
        return;
    };
    if host.summary.construction != Construction::Naive {
        rep.error(
            "host",
            "host surface must be the naive block surface".into(),
        );
    }
    if host.meta.rotation != schema.meta.rotation || host.meta.graph_hash != schema.meta.graph_hash
    {
        rep.error(
            "host",
            "host rotation or graph differs from the schema's".into(),
        );
    }
    for d in verify_schema(host) {
        let tagged = Diagnostic {
            message: format!("host: {}", d.message),
            ..d
        };
        rep.0.push(tagged);
    }
    let mut scratch = Report(Vec::new());
    let Some(graph) = rebuild_graph(host, &mut scratch) else {
        return;
    };
    let Some(Payload::Core {
        rotation,
        walks,
        euler,
    }) = &core.payload
    else {
        return;
    };
    if *euler != graph.euler_char() {
        rep.error(
            "spine",
            format!(
                "core records χ = {euler}, host graph has {}",
                graph.euler_char()
            ),
        );
    }
    match RotationSystem::parse(&graph, &rotation.join("\n")) {
        Ok(r) => {
            let recomputed: Vec<Vec<String>> = boundary_walks(&graph, &r)
                .iter()
                .map(|w| w.names(&graph))
                .collect();
            if &recomputed != walks {
                rep.error(
                    "spine",
                    "recorded boundary walks differ from the rotation's walks".into(),
                );
            }
            if fat_genus(&graph, &r).ok() != Some(core.genus) {
                rep.error(
                    "spine",
                    "core genus differs from the fat-graph genus".into(),
                );
            }
        }
        Err(e) => rep.error("spine", format!("core rotation is invalid: {e}")),
    }
}
