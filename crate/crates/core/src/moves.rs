//! Local moves on rotation systems and the greedy drivers built from them.
//!
//! A move relocates a single dart inside the cyclic order of one vertex.
//! Moves are found by scanning every such relocation in a fixed order and
//! recounting boundary walks, so each accepted move is certified by the
//! recount rather than by a symbolic rewrite of the walks.

use std::fmt;

use rayon::prelude::*;
use thiserror::Error;

use crate::graph::{Dart, MetricGraph};
use crate::invariants::{betti_deficiency, Limits};
use crate::rotation::{
    boundary_count, default_rotation, enumerate_rotations, vertex_boundary_incidence,
    RotationSpace, RotationSystem,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MoveError {
    #[error(
        "vertex `{vertex}` meets {incidence} boundary walks; a reducing move needs at least 3"
    )]
    IncidenceTooLow { vertex: String, incidence: usize },
    #[error("internal error: vertex `{vertex}` meets {incidence} walks but no single-dart move lowers the count by 2")]
    NoWitness { vertex: String, incidence: usize },
    #[error("no single-dart move increases the boundary count by 2")]
    NoIncrease,
    #[error("vertex index {0} out of range")]
    UnknownVertex(usize),
}

/// A certified single-vertex change.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MoveRecord {
    pub vertex: usize,
    pub old_cycle: Vec<Dart>,
    pub new_cycle: Vec<Dart>,
    pub boundary_delta: i32,
}

impl MoveRecord {
    /// `move <vertex> <old-cycle> -> <new-cycle> delta <±2>`
    pub fn to_line(&self, g: &MetricGraph) -> String {
        let cyc = |c: &[Dart]| {
            let names: Vec<String> = c.iter().map(|&d| g.dart_name(d)).collect();
            format!("({})", names.join(","))
        };
        format!(
            "move {} {} -> {} delta {:+}",
            g.vertex_name(self.vertex),
            cyc(&self.old_cycle),
            cyc(&self.new_cycle),
            self.boundary_delta
        )
    }
}

/// Every distinct cyclic order obtained by moving one dart of `cycle` to
/// another gap, in scan order: dart positions ascending, then target gaps
/// ascending. The unchanged order is not included.
pub fn single_dart_reinsertions(cycle: &[Dart]) -> Vec<Vec<Dart>> {
    let k = cycle.len();
    let mut seen: Vec<Vec<Dart>> = vec![canonical_form(cycle)];
    let mut out = Vec::new();
    for i in 0..k {
        let mut rest = cycle.to_vec();
        let d = rest.remove(i);
        for j in 1..k {
            let mut candidate = rest.clone();
            candidate.insert(j, d);
            let canon = canonical_form(&candidate);
            if !seen.contains(&canon) {
                seen.push(canon.clone());
                out.push(canon);
            }
        }
    }
    out
}

fn canonical_form(cycle: &[Dart]) -> Vec<Dart> {
    let mut c = cycle.to_vec();
    if let Some(pos) = c
        .iter()
        .enumerate()
        .min_by_key(|(_, d)| **d)
        .map(|(i, _)| i)
    {
        c.rotate_left(pos);
    }
    c
}

fn find_move(
    g: &MetricGraph,
    r: &RotationSystem,
    v: usize,
    before: usize,
    delta: i32,
) -> Option<(RotationSystem, MoveRecord)> {
    let old = r.cycle(v).to_vec();
    single_dart_reinsertions(&old)
        .into_iter()
        .find_map(|cycle| {
            let candidate = r.with_cycle(v, cycle.clone());
            let after = boundary_count(g, &candidate) as i64;
            (after - before as i64 == delta as i64).then(|| {
                let record = MoveRecord {
                    vertex: v,
                    old_cycle: old.clone(),
                    new_cycle: candidate.cycle(v).to_vec(),
                    boundary_delta: delta,
                };
                (candidate, record)
            })
        })
}

/// Lowers the boundary count by exactly 2 by changing the cyclic order at
/// `v` only. Requires `v` to meet at least three distinct boundary walks.
pub fn reduce_move(
    g: &MetricGraph,
    r: &RotationSystem,
    v: usize,
) -> Result<(RotationSystem, MoveRecord), MoveError> {
    if v >= g.vertex_count() {
        return Err(MoveError::UnknownVertex(v));
    }
    let incidence = vertex_boundary_incidence(g, r)[v];
    if incidence < 3 {
        return Err(MoveError::IncidenceTooLow {
            vertex: g.vertex_name(v).to_string(),
            incidence,
        });
    }
    let before = boundary_count(g, r);
    find_move(g, r, v, before, -2).ok_or_else(|| MoveError::NoWitness {
        vertex: g.vertex_name(v).to_string(),
        incidence,
    })
}

/// First single-dart move (vertices by id) raising the boundary count by 2.
pub fn increase_move(
    g: &MetricGraph,
    r: &RotationSystem,
) -> Result<(RotationSystem, MoveRecord), MoveError> {
    let before = boundary_count(g, r);
    (0..g.vertex_count())
        .find_map(|v| find_move(g, r, v, before, 2))
        .ok_or(MoveError::NoIncrease)
}

/// Applies [`reduce_move`] at the lowest-numbered eligible vertex until
/// every vertex meets at most two boundary walks.
pub fn greedy_descent(
    g: &MetricGraph,
    start: &RotationSystem,
) -> Result<(RotationSystem, Vec<MoveRecord>), MoveError> {
    let mut r = start.clone();
    let mut log = Vec::new();
    loop {
        let incidence = vertex_boundary_incidence(g, &r);
        let Some(v) = incidence.iter().position(|&k| k >= 3) else {
            return Ok((r, log));
        };
        let (next, record) = reduce_move(g, &r, v)?;
        r = next;
        log.push(record);
    }
}

/// Applies [`increase_move`] until none exists.
pub fn greedy_ascent(g: &MetricGraph, start: &RotationSystem) -> (RotationSystem, Vec<MoveRecord>) {
    let mut r = start.clone();
    let mut log = Vec::new();
    while let Ok((next, record)) = increase_move(g, &r) {
        r = next;
        log.push(record);
    }
    (r, log)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchOptions {
    pub restarts: u32,
    pub seed: u64,
    pub limits: Limits,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            restarts: 8,
            seed: 0,
            limits: Limits::default(),
        }
    }
}

/// How the returned rotation was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SearchMethod {
    /// Local moves from the given start.
    Greedy,
    /// Local moves from the `n`-th seeded restart.
    Restart(u32),
    /// Exhaustive enumeration.
    Enumeration,
}

impl fmt::Display for SearchMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SearchMethod::Greedy => write!(f, "greedy"),
            SearchMethod::Restart(n) => write!(f, "restart {n}"),
            SearchMethod::Enumeration => write!(f, "enumeration"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchOutcome {
    pub rotation: RotationSystem,
    pub boundaries: usize,
    /// Known optimum, when available.
    pub target: Option<usize>,
    /// `boundaries` is provably optimal.
    pub certified: bool,
    pub method: SearchMethod,
    /// Boundary count reached by local moves from the given start alone.
    pub greedy_boundaries: usize,
    /// Moves of the run that produced `rotation` (empty for enumeration).
    pub moves: Vec<MoveRecord>,
}

impl SearchOutcome {
    /// Local moves from the start did not reach the known optimum.
    pub fn greedy_stalled(&self) -> bool {
        self.target.is_some_and(|t| self.greedy_boundaries != t)
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Goal {
    Min,
    Max,
}

/// First rotation index (by index) attaining the extreme boundary count.
fn extreme_rotation(g: &MetricGraph, space: &RotationSpace, goal: Goal) -> (u64, usize) {
    (0..space.len())
        .into_par_iter()
        .map(|i| (i, boundary_count(g, &space.get(i))))
        .reduce_with(|a, b| {
            let better = match goal {
                Goal::Min => b.1 < a.1 || (b.1 == a.1 && b.0 < a.0),
                Goal::Max => b.1 > a.1 || (b.1 == a.1 && b.0 < a.0),
            };
            if better {
                b
            } else {
                a
            }
        })
        .expect("at least one rotation")
}

fn improves(goal: Goal, new: usize, old: usize) -> bool {
    match goal {
        Goal::Min => new < old,
        Goal::Max => new > old,
    }
}

fn run_search(
    g: &MetricGraph,
    start: &RotationSystem,
    opts: &SearchOptions,
    goal: Goal,
    target: Option<usize>,
    floor: Option<usize>,
) -> Result<SearchOutcome, MoveError> {
    let local = |r: &RotationSystem| -> Result<(RotationSystem, Vec<MoveRecord>), MoveError> {
        match goal {
            Goal::Min => greedy_descent(g, r),
            Goal::Max => Ok(greedy_ascent(g, r)),
        }
    };
    // the parity floor is only a valid optimum for minimization
    let stop = target.or(floor);
    let (rotation, moves) = local(start)?;
    let greedy_boundaries = boundary_count(g, &rotation);
    let mut best = SearchOutcome {
        rotation,
        boundaries: greedy_boundaries,
        target,
        certified: stop == Some(greedy_boundaries),
        method: SearchMethod::Greedy,
        greedy_boundaries,
        moves,
    };
    if best.certified {
        best.target = stop;
        return Ok(best);
    }
    for k in 1..=opts.restarts {
        let seed = opts.seed.wrapping_add(k as u64).max(1);
        let (rotation, moves) = local(&default_rotation(g, seed))?;
        let b = boundary_count(g, &rotation);
        if improves(goal, b, best.boundaries) {
            best.rotation = rotation;
            best.boundaries = b;
            best.method = SearchMethod::Restart(k);
            best.moves = moves;
        }
        if stop == Some(best.boundaries) {
            best.target = stop;
            best.certified = true;
            return Ok(best);
        }
    }
    if let Ok(space) = enumerate_rotations(g, opts.limits.max_rotations) {
        let (index, b) = extreme_rotation(g, &space, goal);
        if improves(goal, b, best.boundaries) {
            best.rotation = space.get(index);
            best.boundaries = b;
            best.method = SearchMethod::Enumeration;
            best.moves = Vec::new();
        }
        best.target = Some(b);
        best.certified = true;
    }
    Ok(best)
}

/// Minimizes the number of boundary walks. The optimum `1 + ζ(G)` is used
/// as the stopping target when the spanning-tree enumeration is feasible;
/// otherwise seeded restarts and, if feasible, exhaustive enumeration are tried.
pub fn minimize_boundaries(
    g: &MetricGraph,
    start: &RotationSystem,
    opts: &SearchOptions,
) -> Result<SearchOutcome, MoveError> {
    // #∂ ≡ β + 1 (mod 2), so 1 or 2 walks is optimal whenever it is reached
    let floor = if g.betti().is_multiple_of(2) { 1 } else { 2 };
    let target = betti_deficiency(g, opts.limits.max_trees)
        .ok()
        .map(|z| z + 1);
    run_search(g, start, opts, Goal::Min, target, Some(floor))
}

/// Maximizes the number of boundary walks. Certification needs the
/// rotation enumeration to be feasible.
pub fn maximize_boundaries(
    g: &MetricGraph,
    start: &RotationSystem,
    opts: &SearchOptions,
) -> Result<SearchOutcome, MoveError> {
    let target = enumerate_rotations(g, opts.limits.max_rotations)
        .ok()
        .map(|space| extreme_rotation(g, &space, Goal::Max).1);
    run_search(g, start, opts, Goal::Max, target, None)
}

/// Outcome of checking [`reduce_move`] on every eligible vertex of every
/// rotation in a space.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SoundnessSweep {
    /// (rotation, vertex) pairs with at least three incident walks.
    pub checked: u64,
    /// Rotation index and vertex where no exact -2 move was found.
    pub failures: Vec<(u64, usize)>,
}

pub fn soundness_sweep(g: &MetricGraph, space: &RotationSpace) -> SoundnessSweep {
    let per_rotation: Vec<(u64, Vec<(u64, usize)>)> = (0..space.len())
        .into_par_iter()
        .map(|i| {
            let r = space.get(i);
            let before = boundary_count(g, &r);
            let mut checked = 0;
            let mut failures = Vec::new();
            for (v, &k) in vertex_boundary_incidence(g, &r).iter().enumerate() {
                if k < 3 {
                    continue;
                }
                checked += 1;
                let exact = reduce_move(g, &r, v).is_ok_and(|(r2, rec)| {
                    boundary_count(g, &r2) + 2 == before && rec.boundary_delta == -2
                });
                if !exact {
                    failures.push((i, v));
                }
            }
            (checked, failures)
        })
        .collect();
    let mut sweep = SoundnessSweep::default();
    for (checked, failures) in per_rotation {
        sweep.checked += checked;
        sweep.failures.extend(failures);
    }
    sweep
}

/// Greedy descent from every rotation of a space.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ReachSweep {
    pub starts: u64,
    /// Rotation index and the boundary count where descent stopped short
    /// of the target.
    pub stalls: Vec<(u64, usize)>,
}

pub fn greedy_reach(g: &MetricGraph, space: &RotationSpace, target: usize) -> ReachSweep {
    let stalls: Vec<(u64, usize)> = (0..space.len())
        .into_par_iter()
        .filter_map(|i| {
            let reached = greedy_descent(g, &space.get(i)).map(|(r, _)| boundary_count(g, &r));
            match reached {
                Ok(b) if b == target => None,
                Ok(b) => Some((i, b)),
                Err(_) => Some((i, usize::MAX)),
            }
        })
        .collect();
    ReachSweep {
        starts: space.len(),
        stalls,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families;
    use crate::rotation::enumerate_rotations;

    fn rot(g: &MetricGraph, text: &str) -> RotationSystem {
        RotationSystem::parse(g, text).unwrap()
    }

    fn k4_planar(g: &MetricGraph) -> RotationSystem {
        rot(
            g,
            "rot v0 e0+ e1+ e2+\nrot v1 e0- e4+ e3+\nrot v2 e1- e3- e5+\nrot v3 e2- e5- e4-\n",
        )
    }

    #[test]
    fn sweeps_on_small_graphs() {
        for (g, target) in [
            (families::theta(), 1),
            (families::complete(4), 2),
            (families::bouquet(2), 1),
        ] {
            let space = enumerate_rotations(&g, 100).unwrap();
            let sweep = soundness_sweep(&g, &space);
            assert!(sweep.checked > 0);
            assert_eq!(sweep.failures, vec![]);
            let reach = greedy_reach(&g, &space, target);
            assert_eq!(reach.starts, space.len());
            assert_eq!(reach.stalls, vec![]);
        }
    }

    #[test]
    fn reinsertion_candidates() {
        let c: Vec<Dart> = (0..3).map(|i| Dart(2 * i)).collect();
        // only one other cyclic order on three darts
        assert_eq!(
            single_dart_reinsertions(&c),
            vec![vec![Dart(0), Dart(4), Dart(2)]]
        );
        let c4: Vec<Dart> = (0..4).map(Dart).collect();
        let all = single_dart_reinsertions(&c4);
        // 6 cyclic orders of 4 items; the reversal needs two relocations
        assert_eq!(all.len(), 4);
        assert!(!all.contains(&vec![Dart(0), Dart(3), Dart(2), Dart(1)]));
        assert!(all.iter().all(|c| c[0] == Dart(0)));
    }

    #[test]
    fn reduce_theta() {
        let g = families::theta();
        let r = rot(&g, "rot u a+ b+ c+\nrot v c- b- a-");
        let (r2, rec) = reduce_move(&g, &r, 0).unwrap();
        assert_eq!(boundary_count(&g, &r2), 1);
        assert_eq!(rec.boundary_delta, -2);
        assert_eq!(r2.cycle(1), r.cycle(1));
        assert_eq!(rec.to_line(&g), "move u (a+,b+,c+) -> (a+,c+,b+) delta -2");
    }

    #[test]
    fn reduce_k4_planar_each_vertex() {
        let g = families::complete(4);
        let r = k4_planar(&g);
        for v in 0..4 {
            let (r2, _) = reduce_move(&g, &r, v).unwrap();
            assert_eq!(boundary_count(&g, &r2), 2);
        }
    }

    #[test]
    fn reduce_rejects_low_incidence() {
        let g = families::theta();
        let r = default_rotation(&g, 0);
        assert!(matches!(
            reduce_move(&g, &r, 0),
            Err(MoveError::IncidenceTooLow { incidence: 1, .. })
        ));
        assert_eq!(
            reduce_move(&g, &r, 9).unwrap_err(),
            MoveError::UnknownVertex(9)
        );
    }

    #[test]
    fn increase_examples() {
        let g = families::theta();
        let (r2, rec) = increase_move(&g, &default_rotation(&g, 0)).unwrap();
        assert_eq!(boundary_count(&g, &r2), 3);
        assert_eq!(rec.boundary_delta, 2);

        let k4 = families::complete(4);
        let planar = k4_planar(&k4);
        assert_eq!(
            increase_move(&k4, &planar).unwrap_err(),
            MoveError::NoIncrease
        );
        let (two, _) = reduce_move(&k4, &planar, 0).unwrap();
        let (four, _) = increase_move(&k4, &two).unwrap();
        assert_eq!(boundary_count(&k4, &four), 4);
    }

    #[test]
    fn increase_never_beyond_k4_maximum() {
        let g = families::complete(4);
        let mut stuck = 0;
        for r in enumerate_rotations(&g, 100).unwrap().iter() {
            match increase_move(&g, &r) {
                Ok((r2, _)) => assert_eq!(boundary_count(&g, &r2), 4),
                Err(_) if boundary_count(&g, &r) == 2 => stuck += 1,
                Err(_) => {}
            }
        }
        // some genus-1 embeddings are local maxima for single-vertex moves
        assert!(stuck > 0 && stuck < 14);
    }

    #[test]
    fn minimize_examples() {
        let opts = SearchOptions::default();
        let g = families::theta();
        let out =
            minimize_boundaries(&g, &rot(&g, "rot u a+ b+ c+\nrot v c- b- a-"), &opts).unwrap();
        assert_eq!(
            (out.boundaries, out.certified, out.method),
            (1, true, SearchMethod::Greedy)
        );

        let k4 = families::complete(4);
        let out = minimize_boundaries(&k4, &k4_planar(&k4), &opts).unwrap();
        assert_eq!((out.boundaries, out.certified), (2, true));
        assert_eq!(out.moves.len(), 1);

        let b2 = families::bouquet(2);
        let start = rot(&b2, "rot u a+ a- b+ b-");
        assert_eq!(boundary_count(&b2, &start), 3);
        let out = minimize_boundaries(&b2, &start, &opts).unwrap();
        assert_eq!((out.boundaries, out.certified), (1, true));
    }

    #[test]
    fn maximize_examples() {
        let opts = SearchOptions::default();
        let g = families::theta();
        let out = maximize_boundaries(&g, &default_rotation(&g, 0), &opts).unwrap();
        assert_eq!((out.boundaries, out.certified), (3, true));

        let k5 = families::complete(5);
        let out = maximize_boundaries(&k5, &default_rotation(&k5, 0), &opts).unwrap();
        assert_eq!(
            (out.boundaries, out.certified, out.target),
            (5, true, Some(5))
        );
    }

    #[test]
    fn uncertified_without_enumeration() {
        let g = families::complete(5);
        let opts = SearchOptions {
            restarts: 0,
            seed: 0,
            limits: Limits {
                max_trees: 10,
                max_rotations: 10,
            },
        };
        let out = maximize_boundaries(&g, &default_rotation(&g, 0), &opts).unwrap();
        assert!(!out.certified);
        assert_eq!(out.target, None);
        // one walk is the parity floor for even β, so no enumeration is needed
        let out = minimize_boundaries(&g, &default_rotation(&g, 0), &opts).unwrap();
        assert_eq!(
            (out.boundaries, out.certified, out.target),
            (1, true, Some(1))
        );
        assert!(!out.greedy_stalled());
    }
}
