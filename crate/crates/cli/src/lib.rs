//! Command-line driver: `analyze`, `embed`, `oracle` and `verify`.
//!
//! Every command writes its report to the given writers and returns a
//! process exit code, so the binary and the tests share one code path.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use ribbon_embed_core::assembly::{
    assemble_sigma_surface, cap_standard, cap_target_genus, is_clean, verify_schema, AssemblyError,
    Severity, SurfaceSchema,
};
use ribbon_embed_core::graph::{parse_graph, GraphError, MetricGraph};
use ribbon_embed_core::hyperbolic::DEFAULT_MARGIN;
use ribbon_embed_core::invariants::{
    self, betti_deficiency, essential_genus_from, spanning_trees, xi, InvariantError, Limits,
    DEFAULT_TREE_CAP,
};
use ribbon_embed_core::moves::{
    greedy_reach, maximize_boundaries, minimize_boundaries, soundness_sweep, MoveError,
    SearchOptions, SearchOutcome,
};
use ribbon_embed_core::rotation::{
    default_rotation, enumerate_rotations, survey, RotationError, DEFAULT_ROTATION_CAP,
};

pub mod exit {
    pub const OK: i32 = 0;
    /// `verify` found error-level diagnostics.
    pub const DIAGNOSTICS: i32 = 1;
    pub const VALIDATION: i32 = 2;
    pub const CYCLE: i32 = 3;
    pub const INFEASIBLE: i32 = 4;
    pub const CAP_EXCEEDED: i32 = 5;
    pub const INVARIANT: i32 = 6;
}

#[derive(Debug, Parser)]
#[command(name = "ribbon-embed", version)]
#[command(about = "Essential isometric embeddings of metric graphs in closed hyperbolic surfaces")]
pub struct RunConfig {
    /// Worker threads for enumeration (defaults to all cores)
    #[arg(long, global = true, env = "RIBBON_EMBED_THREADS")]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, Args)]
pub struct Caps {
    /// Largest number of spanning trees to enumerate
    #[arg(long, default_value_t = DEFAULT_TREE_CAP)]
    pub max_trees: u64,

    /// Largest number of rotation systems to enumerate
    #[arg(long, default_value_t = DEFAULT_ROTATION_CAP)]
    pub max_rotations: u64,
}

impl From<Caps> for Limits {
    fn from(c: Caps) -> Self {
        Limits {
            max_trees: c.max_trees,
            max_rotations: c.max_rotations,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Report the embedding invariants of a graph
    Analyze {
        /// Edge-list file
        graph: PathBuf,

        /// Emit JSON instead of the key-value report
        #[arg(long)]
        json: bool,

        #[command(flatten)]
        caps: Caps,
    },

    /// Build, verify and write an embedding schema
    Embed {
        /// Edge-list file
        graph: PathBuf,

        /// minimal | maximal | genus=G
        #[arg(long)]
        target: Target,

        /// Gap kept between t·d(e) - l(e) and f_min
        #[arg(long, default_value_t = DEFAULT_MARGIN)]
        margin: f64,

        /// Seed for the starting rotation and restarts (0 keeps file order)
        #[arg(long, default_value_t = 0)]
        seed: u64,

        /// Seeded restarts tried when local moves stall
        #[arg(long, default_value_t = 8)]
        restarts: u32,

        /// Schema output path
        #[arg(short, long)]
        output: PathBuf,

        /// Print the move log
        #[arg(long)]
        moves: bool,

        #[command(flatten)]
        caps: Caps,
    },

    /// Check boundary-count claims by exhaustive enumeration
    Oracle {
        /// Edge-list file
        graph: PathBuf,

        /// Emit JSON instead of the key-value report
        #[arg(long)]
        json: bool,

        #[command(flatten)]
        caps: Caps,
    },

    /// Re-check a stored schema
    Verify {
        /// Schema JSON file
        schema: PathBuf,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Target {
    Minimal,
    Maximal,
    Genus(usize),
}

impl FromStr for Target {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "minimal" => Ok(Target::Minimal),
            "maximal" => Ok(Target::Maximal),
            _ => match s.strip_prefix("genus=") {
                Some(g) => g
                    .parse()
                    .map(Target::Genus)
                    .map_err(|_| format!("genus must be a non-negative integer, got `{g}`")),
                None => Err(format!("expected minimal, maximal or genus=G, got `{s}`")),
            },
        }
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Target::Minimal => write!(f, "minimal"),
            Target::Maximal => write!(f, "maximal"),
            Target::Genus(g) => write!(f, "genus={g}"),
        }
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Graph { path: PathBuf, source: GraphError },
    #[error("{path}: malformed schema: {source}")]
    Schema {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error(transparent)]
    Invariant(#[from] InvariantError),
    #[error(transparent)]
    Rotation(#[from] RotationError),
    #[error(transparent)]
    Move(#[from] MoveError),
    #[error(transparent)]
    Assembly(#[from] AssemblyError),
    #[error("target genus {target} is below the essential genus {essential}")]
    BelowEssential { target: usize, essential: usize },
    #[error("emitted schema failed verification:\n{0}")]
    Unverified(String),
    #[error("cannot start thread pool: {0}")]
    Threads(String),
}

fn graph_code(e: &GraphError) -> i32 {
    match e {
        GraphError::IsCycle => exit::CYCLE,
        _ => exit::VALIDATION,
    }
}

fn rotation_code(e: &RotationError) -> i32 {
    match e {
        RotationError::CapExceeded { .. } => exit::CAP_EXCEEDED,
        _ => exit::VALIDATION,
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Read { .. } | CliError::Write { .. } | CliError::Schema { .. } => {
                exit::VALIDATION
            }
            CliError::Graph { source, .. } => graph_code(source),
            CliError::Invariant(e) => match e {
                InvariantError::TreeCapExceeded { .. } => exit::CAP_EXCEEDED,
                InvariantError::InfiniteGirth => exit::VALIDATION,
                InvariantError::Graph(g) => graph_code(g),
                InvariantError::Rotation(r) => rotation_code(r),
            },
            CliError::Rotation(r) => rotation_code(r),
            CliError::Move(_) => exit::INVARIANT,
            CliError::Assembly(e) => match e {
                AssemblyError::TargetTooSmall { .. } => exit::INFEASIBLE,
                AssemblyError::Graph(g) => graph_code(g),
                AssemblyError::Rotation(r) => rotation_code(r),
                AssemblyError::Hyperbolic(_) => exit::VALIDATION,
                AssemblyError::AlreadyClosed | AssemblyError::NotBordered => exit::INVARIANT,
            },
            CliError::BelowEssential { .. } => exit::INFEASIBLE,
            CliError::Unverified(_) => exit::INVARIANT,
            CliError::Threads(_) => exit::VALIDATION,
        }
    }
}

/// Parses and validates a graph file, failing on anything the
/// constructions cannot take (including the cycle case).
pub fn load_graph(path: &Path) -> Result<MetricGraph, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    let graph_err = |source| CliError::Graph {
        path: path.to_path_buf(),
        source,
    };
    let g = parse_graph(&text).map_err(graph_err)?;
    g.require_embeddable().map_err(graph_err)?;
    Ok(g)
}

/// Runs one command; diagnostics go to `err`, reports to `out`.
pub fn run(cfg: &RunConfig, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let result = match cfg.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Threads(e.to_string()))
            .and_then(|pool| {
                let (mut o, mut e) = (Vec::new(), Vec::new());
                let r = pool.install(|| dispatch(&cfg.command, &mut o, &mut e));
                let _ = out.write_all(&o);
                let _ = err.write_all(&e);
                r
            }),
        None => dispatch(&cfg.command, out, err),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cmd: &Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    match cmd {
        Command::Analyze { graph, json, caps } => cmd_analyze(graph, *json, (*caps).into(), out),
        Command::Embed {
            graph,
            target,
            margin,
            seed,
            restarts,
            output,
            moves,
            caps,
        } => {
            let opts = EmbedOptions {
                target: *target,
                margin: *margin,
                search: SearchOptions {
                    restarts: *restarts,
                    seed: *seed,
                    limits: (*caps).into(),
                },
            };
            let report = cmd_embed(graph, &opts)?;
            fs::write(output, report.schema.to_json()).map_err(|source| CliError::Write {
                path: output.clone(),
                source,
            })?;
            report.render(out, err, *moves);
            let _ = writeln!(out, "wrote {}", output.display());
            Ok(exit::OK)
        }
        Command::Oracle { graph, json, caps } => cmd_oracle(graph, *json, (*caps).into(), out),
        Command::Verify { schema } => cmd_verify(schema, out),
    }
}

fn lines(out: &mut dyn Write, pairs: &[(&str, String)]) {
    for (k, v) in pairs {
        let _ = writeln!(out, "{k} {v}");
    }
}

fn write_json<T: Serialize>(out: &mut dyn Write, value: &T) {
    let _ = writeln!(
        out,
        "{}",
        serde_json::to_string_pretty(value).expect("report serializes")
    );
}

pub fn cmd_analyze(
    path: &Path,
    json: bool,
    limits: Limits,
    out: &mut dyn Write,
) -> Result<i32, CliError> {
    let g = load_graph(path)?;
    let rep = invariants::analyze(&g, limits)?;
    if json {
        write_json(out, &rep);
        return Ok(exit::OK);
    }
    let opt = |v: Option<usize>| v.map_or("unknown".to_string(), |x| x.to_string());
    lines(
        out,
        &[
            ("vertices", rep.vertices.to_string()),
            ("edges", rep.edges.to_string()),
            ("smoothed_vertices", rep.smoothed_vertices.to_string()),
            ("beta", rep.beta.to_string()),
            ("zeta", rep.zeta.to_string()),
            ("girth", rep.girth.map_or("inf".into(), |x| x.to_string())),
            ("euler", rep.euler.to_string()),
            ("max_genus", rep.max_genus.to_string()),
            ("essential_genus", rep.essential_genus.to_string()),
            ("q", rep.q.to_string()),
            ("r", rep.r.to_string()),
            ("ge_max_bound", rep.ge_max_bound.clone()),
            ("ge_max_exact", opt(rep.ge_max_exact)),
            ("spanning_trees", rep.spanning_trees.to_string()),
            (
                "rotation_systems",
                rep.rotation_systems
                    .map_or("overflow".into(), |x| x.to_string()),
            ),
            ("zeta_exhaustive", rep.zeta_exhaustive.to_string()),
            ("ge_max_certified", rep.ge_max_exact.is_some().to_string()),
        ],
    );
    Ok(exit::OK)
}

#[derive(Clone, Copy, Debug)]
pub struct EmbedOptions {
    pub target: Target,
    pub margin: f64,
    pub search: SearchOptions,
}

#[derive(Debug)]
pub struct EmbedReport {
    pub graph: MetricGraph,
    pub schema: SurfaceSchema,
    pub search: SearchOutcome,
}

impl EmbedReport {
    fn render(&self, out: &mut dyn Write, err: &mut dyn Write, with_moves: bool) {
        let s = &self.search;
        if !s.certified {
            let _ = writeln!(
                err,
                "warning: {} boundary walks is the best found but is not certified optimal",
                s.boundaries
            );
        } else if s.greedy_stalled() {
            let _ = writeln!(
                err,
                "note: local moves from the start stalled at {} walks; optimum {} reached by {}",
                s.greedy_boundaries, s.boundaries, s.method
            );
        }
        let sum = &self.schema.summary;
        lines(
            out,
            &[
                ("genus", sum.genus.to_string()),
                ("boundary_walks", s.boundaries.to_string()),
                ("minimal", sum.minimal.to_string()),
                ("construction", sum.construction.to_string()),
                ("certified", s.certified.to_string()),
                ("method", s.method.to_string()),
                ("t", self.schema.meta.t.to_string()),
            ],
        );
        if with_moves {
            for m in &s.moves {
                let _ = writeln!(out, "{}", m.to_line(&self.graph));
            }
        }
    }
}

/// Builds and verifies the schema without touching the filesystem beyond
/// reading the graph.
pub fn cmd_embed(path: &Path, opts: &EmbedOptions) -> Result<EmbedReport, CliError> {
    let input = load_graph(path)?;
    embed_graph(&input, opts)
}

pub fn embed_graph(input: &MetricGraph, opts: &EmbedOptions) -> Result<EmbedReport, CliError> {
    input.require_embeddable().map_err(InvariantError::from)?;
    let smoothed_vertices = input.suppressible_vertices();
    let g = input.smooth().map_err(InvariantError::from)?;
    let start = default_rotation(&g, opts.search.seed);
    let search = match opts.target {
        Target::Maximal => maximize_boundaries(&g, &start, &opts.search)?,
        Target::Minimal => minimize_boundaries(&g, &start, &opts.search)?,
        Target::Genus(target) => {
            let zeta = betti_deficiency(&g, opts.search.limits.max_trees)?;
            let essential = essential_genus_from(g.betti(), zeta);
            if target < essential {
                return Err(CliError::BelowEssential { target, essential });
            }
            minimize_boundaries(&g, &start, &opts.search)?
        }
    };
    let bordered = assemble_sigma_surface(&g, &search.rotation, opts.margin)?;
    let mut schema = match opts.target {
        Target::Genus(target) => cap_target_genus(&bordered, target)?,
        _ => cap_standard(&bordered)?,
    };
    schema.meta.smoothed_vertices = smoothed_vertices;
    if let Some(host) = schema.host.as_mut() {
        host.meta.smoothed_vertices = smoothed_vertices;
    }
    let diags = verify_schema(&schema);
    if !is_clean(&diags) {
        let text: Vec<String> = diags.iter().map(|d| d.to_string()).collect();
        return Err(CliError::Unverified(text.join("\n")));
    }
    Ok(EmbedReport {
        graph: g,
        schema,
        search,
    })
}

/// Exhaustive checks of the boundary-count claims on one graph.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleReport {
    pub rotations: u64,
    pub spanning_trees: u64,
    pub beta: usize,
    pub zeta: usize,
    /// Boundary count → number of rotations.
    pub histogram: Vec<(usize, u64)>,
    pub min_boundaries: usize,
    pub max_boundaries: usize,
    pub min_matches_zeta: bool,
    pub parity_consistent: bool,
    pub zeta_parity: bool,
    pub move_checks: u64,
    pub move_failures: Vec<(u64, usize)>,
    pub greedy_starts: u64,
    pub greedy_stalls: Vec<(u64, usize)>,
}

impl OracleReport {
    pub fn passed(&self) -> bool {
        self.min_matches_zeta
            && self.parity_consistent
            && self.zeta_parity
            && self.move_failures.is_empty()
            && self.greedy_stalls.is_empty()
    }
}

pub fn oracle(g: &MetricGraph, limits: Limits) -> Result<OracleReport, CliError> {
    g.require_embeddable().map_err(InvariantError::from)?;
    let g = g.smooth().map_err(InvariantError::from)?;
    let trees = spanning_trees(&g, limits.max_trees)?;
    let zeta = trees.par_iter().map(|t| xi(&g, t)).min().unwrap_or(0);
    let space = enumerate_rotations(&g, limits.max_rotations)?;
    let stats = survey(&g, &space);
    let sweep = soundness_sweep(&g, &space);
    let reach = greedy_reach(&g, &space, zeta + 1);
    let beta = g.betti();
    Ok(OracleReport {
        rotations: space.len(),
        spanning_trees: trees.len() as u64,
        beta,
        zeta,
        histogram: stats.histogram.iter().map(|(&b, &n)| (b, n)).collect(),
        min_boundaries: stats.min_boundaries(),
        max_boundaries: stats.max_boundaries(),
        min_matches_zeta: stats.min_boundaries() == zeta + 1,
        parity_consistent: stats.parity_consistent(),
        zeta_parity: zeta % 2 == beta % 2,
        move_checks: sweep.checked,
        move_failures: sweep.failures,
        greedy_starts: reach.starts,
        greedy_stalls: reach.stalls,
    })
}

pub fn cmd_oracle(
    path: &Path,
    json: bool,
    limits: Limits,
    out: &mut dyn Write,
) -> Result<i32, CliError> {
    let g = load_graph(path)?;
    let rep = oracle(&g, limits)?;
    let code = if rep.passed() {
        exit::OK
    } else {
        exit::INVARIANT
    };
    if json {
        write_json(out, &rep);
        return Ok(code);
    }
    let mark = |ok: bool| if ok { "ok" } else { "FAIL" };
    let hist: Vec<String> = rep
        .histogram
        .iter()
        .map(|(b, n)| format!("{b}:{n}"))
        .collect();
    lines(
        out,
        &[
            ("rotations", rep.rotations.to_string()),
            ("spanning_trees", rep.spanning_trees.to_string()),
            ("beta", rep.beta.to_string()),
            ("zeta", rep.zeta.to_string()),
            ("histogram", hist.join(" ")),
            (
                "min_boundaries",
                format!(
                    "{} (1+zeta = {}) {}",
                    rep.min_boundaries,
                    rep.zeta + 1,
                    mark(rep.min_matches_zeta)
                ),
            ),
            ("max_boundaries", rep.max_boundaries.to_string()),
            ("parity", mark(rep.parity_consistent).to_string()),
            ("zeta_parity", mark(rep.zeta_parity).to_string()),
            (
                "move_sweep",
                format!(
                    "{} checks, {} failures {}",
                    rep.move_checks,
                    rep.move_failures.len(),
                    mark(rep.move_failures.is_empty())
                ),
            ),
            (
                "greedy_reach",
                format!(
                    "{}/{} {}",
                    rep.greedy_starts - rep.greedy_stalls.len() as u64,
                    rep.greedy_starts,
                    mark(rep.greedy_stalls.is_empty())
                ),
            ),
        ],
    );
    for (i, b) in &rep.greedy_stalls {
        let _ = writeln!(out, "stall rotation {i} stopped at {b}");
    }
    for (i, v) in &rep.move_failures {
        let _ = writeln!(out, "move_failure rotation {i} vertex {v}");
    }
    Ok(code)
}

pub fn cmd_verify(path: &Path, out: &mut dyn Write) -> Result<i32, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    let schema = SurfaceSchema::from_json(&text).map_err(|source| CliError::Schema {
        path: path.to_path_buf(),
        source,
    })?;
    let diags = verify_schema(&schema);
    for d in &diags {
        let _ = writeln!(out, "{d}");
    }
    let errors = diags
        .iter()
        .filter(|d| d.severity == Severity::Error)
        .count();
    if errors > 0 {
        let _ = writeln!(out, "invalid: {errors} errors");
        return Ok(exit::DIAGNOSTICS);
    }
    let _ = writeln!(
        out,
        "ok: genus {}, {} blocks, {} gluings, construction {}",
        schema.summary.genus,
        schema.blocks.len(),
        schema.gluings.len(),
        schema.summary.construction
    );
    Ok(exit::OK)
}
