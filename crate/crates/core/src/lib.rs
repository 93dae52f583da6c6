//! Metric graphs, fat-graph structure and the closed hyperbolic surfaces that
//! contain them isometrically.
//!
//! The pipeline runs graph → rotation system → boundary-walk search →
//! block schema → verification; each stage lives in its own module.
//!
//! ```
//! use ribbon_embed_core::{assembly, families, invariants, moves, rotation};
//!
//! let g = families::complete(4);
//! let report = invariants::analyze(&g, invariants::Limits::default()).unwrap();
//! let start = rotation::default_rotation(&g, 0);
//! let best = moves::minimize_boundaries(&g, &start, &moves::SearchOptions::default()).unwrap();
//! let bordered = assembly::assemble_sigma_surface(&g, &best.rotation, 0.1).unwrap();
//! let surface = assembly::cap_standard(&bordered).unwrap();
//! assert_eq!(surface.summary.genus, report.essential_genus);
//! assert!(assembly::verify_schema(&surface).is_empty());
//! ```

pub mod assembly;
pub mod families;
pub mod graph;
pub mod hyperbolic;
pub mod invariants;
pub mod moves;
pub mod rotation;

pub use assembly::{
    assemble_sigma_surface, cap_standard, cap_target_genus, naive_embedding, verify_schema,
    AssemblyError, Diagnostic, SurfaceSchema,
};
pub use graph::{parse_graph, Dart, GraphError, MetricGraph};
pub use invariants::{analyze, InvariantError, InvariantReport, Limits};
pub use rotation::{RotationError, RotationSystem};
