//! Rotation systems (fat-graph structures) and their boundary walks.
//!
//! The face permutation is `φ = σ₁ ∘ σ₀⁻¹`: from a dart `d`, step back
//! one position in the cyclic order at its vertex, then reverse the dart.
//! Every orbit of `φ` is one boundary component of the thickened graph.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::graph::{Dart, MetricGraph};

/// Default bound on the number of rotation systems an enumeration may visit.
pub const DEFAULT_ROTATION_CAP: u64 = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RotationError {
    #[error("rotation lists {found} vertices, graph has {expected}")]
    VertexCount { expected: usize, found: usize },
    #[error("dart {dart} is listed at vertex `{listed}` but belongs to `{actual}`")]
    Misplaced {
        dart: String,
        listed: String,
        actual: String,
    },
    #[error("dart {0} appears more than once")]
    Duplicate(String),
    #[error("dart {0} is missing from the rotation")]
    Missing(String),
    #[error("boundary count {boundaries} has the wrong parity for Euler characteristic {euler}")]
    Parity { boundaries: usize, euler: i64 },
    #[error("{count} rotation systems exceed the enumeration cap {cap}")]
    CapExceeded { count: String, cap: u64 },
    #[error("rotation line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// Cyclic order of the darts at every vertex, indexed by vertex id.
///
/// Each cycle is stored starting at its smallest dart.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RotationSystem {
    cycles: Vec<Vec<Dart>>,
}

fn canonical(mut cycle: Vec<Dart>) -> Vec<Dart> {
    if let Some(pos) = cycle
        .iter()
        .enumerate()
        .min_by_key(|(_, d)| **d)
        .map(|(i, _)| i)
    {
        cycle.rotate_left(pos);
    }
    cycle
}

impl RotationSystem {
    pub fn new(g: &MetricGraph, cycles: Vec<Vec<Dart>>) -> Result<Self, RotationError> {
        if cycles.len() != g.vertex_count() {
            return Err(RotationError::VertexCount {
                expected: g.vertex_count(),
                found: cycles.len(),
            });
        }
        let mut seen = vec![false; g.dart_count()];
        for (v, cycle) in cycles.iter().enumerate() {
            for &d in cycle {
                if d.0 >= g.dart_count() {
                    return Err(RotationError::Missing(format!("#{}", d.0)));
                }
                if g.vertex_of(d) != v {
                    return Err(RotationError::Misplaced {
                        dart: g.dart_name(d),
                        listed: g.vertex_name(v).to_string(),
                        actual: g.vertex_name(g.vertex_of(d)).to_string(),
                    });
                }
                if std::mem::replace(&mut seen[d.0], true) {
                    return Err(RotationError::Duplicate(g.dart_name(d)));
                }
            }
        }
        if let Some(d) = seen.iter().position(|s| !s) {
            return Err(RotationError::Missing(g.dart_name(Dart(d))));
        }
        Ok(RotationSystem {
            cycles: cycles.into_iter().map(canonical).collect(),
        })
    }

    pub fn cycles(&self) -> &[Vec<Dart>] {
        &self.cycles
    }

    pub fn cycle(&self, v: usize) -> &[Dart] {
        &self.cycles[v]
    }

    /// Same rotation with the cycle at `v` replaced. The new cycle must be a
    /// reordering of the old one.
    pub fn with_cycle(&self, v: usize, cycle: Vec<Dart>) -> RotationSystem {
        debug_assert_eq!(
            {
                let mut a = cycle.clone();
                a.sort();
                a
            },
            {
                let mut b = self.cycles[v].clone();
                b.sort();
                b
            }
        );
        let mut cycles = self.cycles.clone();
        cycles[v] = canonical(cycle);
        RotationSystem { cycles }
    }

    /// `σ₀⁻¹` as an array over darts.
    pub fn predecessor_table(&self, dart_count: usize) -> Vec<Dart> {
        let mut pred = vec![Dart(0); dart_count];
        for cycle in &self.cycles {
            let k = cycle.len();
            for i in 0..k {
                pred[cycle[(i + 1) % k].0] = cycle[i];
            }
        }
        pred
    }

    /// `σ₀` as an array over darts.
    pub fn successor_table(&self, dart_count: usize) -> Vec<Dart> {
        let mut succ = vec![Dart(0); dart_count];
        for cycle in &self.cycles {
            let k = cycle.len();
            for i in 0..k {
                succ[cycle[i].0] = cycle[(i + 1) % k];
            }
        }
        succ
    }

    /// One `rot <vertex> <darts...>` line per vertex.
    pub fn to_text(&self, g: &MetricGraph) -> String {
        self.to_lines(g).into_iter().map(|l| l + "\n").collect()
    }

    pub fn to_lines(&self, g: &MetricGraph) -> Vec<String> {
        self.cycles
            .iter()
            .enumerate()
            .map(|(v, cycle)| {
                let darts: Vec<String> = cycle.iter().map(|&d| g.dart_name(d)).collect();
                format!("rot {} {}", g.vertex_name(v), darts.join(" "))
            })
            .collect()
    }

    pub fn parse(g: &MetricGraph, text: &str) -> Result<Self, RotationError> {
        let mut cycles: Vec<Option<Vec<Dart>>> = vec![None; g.vertex_count()];
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| RotationError::Parse {
                line: i + 1,
                message,
            };
            let mut fields = line.split_whitespace();
            if fields.next() != Some("rot") {
                return Err(err("expected `rot`".into()));
            }
            let vname = fields.next().ok_or_else(|| err("missing vertex".into()))?;
            let v = g
                .vertex_id(vname)
                .ok_or_else(|| err(format!("unknown vertex `{vname}`")))?;
            let darts = fields
                .map(|t| {
                    g.parse_dart(t)
                        .ok_or_else(|| err(format!("unknown dart `{t}`")))
                })
                .collect::<Result<Vec<_>, _>>()?;
            if cycles[v].replace(darts).is_some() {
                return Err(err(format!("vertex `{vname}` listed twice")));
            }
        }
        let cycles = cycles
            .into_iter()
            .enumerate()
            .map(|(v, c)| {
                c.ok_or_else(|| RotationError::Parse {
                    line: 0,
                    message: format!("vertex `{}` has no rotation", g.vertex_name(v)),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        RotationSystem::new(g, cycles)
    }
}

/// Deterministic rotation: seed 0 lists the darts at each vertex in file
/// order; any other seed shuffles every vertex with a seeded generator.
pub fn default_rotation(g: &MetricGraph, seed: u64) -> RotationSystem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cycles = (0..g.vertex_count())
        .map(|v| {
            let mut darts = g.darts_at(v);
            if seed != 0 {
                darts.shuffle(&mut rng);
            }
            darts
        })
        .collect();
    RotationSystem::new(g, cycles).expect("darts grouped by vertex form a rotation")
}

/// One orbit of the face permutation, starting at its smallest dart.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundaryWalk {
    pub darts: Vec<Dart>,
}

impl BoundaryWalk {
    pub fn len(&self) -> usize {
        self.darts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.darts.is_empty()
    }

    pub fn names(&self, g: &MetricGraph) -> Vec<String> {
        self.darts.iter().map(|&d| g.dart_name(d)).collect()
    }
}

/// Orbit index of every dart under `φ`, plus the number of orbits. Orbits
/// are numbered in order of their smallest dart.
pub fn walk_labels(g: &MetricGraph, r: &RotationSystem) -> (Vec<usize>, usize) {
    let n = g.dart_count();
    let pred = r.predecessor_table(n);
    let mut label = vec![usize::MAX; n];
    let mut count = 0;
    for start in 0..n {
        if label[start] != usize::MAX {
            continue;
        }
        let mut d = start;
        while label[d] == usize::MAX {
            label[d] = count;
            d = pred[d].twin().0;
        }
        count += 1;
    }
    (label, count)
}

/// The boundary walks of `(G, R)`, ordered by smallest dart.
pub fn boundary_walks(g: &MetricGraph, r: &RotationSystem) -> Vec<BoundaryWalk> {
    let n = g.dart_count();
    let pred = r.predecessor_table(n);
    let mut seen = vec![false; n];
    let mut walks = Vec::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        let mut darts = Vec::new();
        let mut d = Dart(start);
        while !seen[d.0] {
            seen[d.0] = true;
            darts.push(d);
            d = pred[d.0].twin();
        }
        walks.push(BoundaryWalk { darts });
    }
    walks
}

/// Number of boundary walks, `#∂(G, R)`.
pub fn boundary_count(g: &MetricGraph, r: &RotationSystem) -> usize {
    walk_labels(g, r).1
}

/// Genus of a bordered surface with Euler characteristic `euler` and
/// `boundaries` boundary components.
pub fn genus_from_euler(euler: i64, boundaries: usize) -> Result<usize, RotationError> {
    let twice = 2 - euler - boundaries as i64;
    if twice < 0 || twice % 2 != 0 {
        return Err(RotationError::Parity { boundaries, euler });
    }
    Ok((twice / 2) as usize)
}

/// Genus of the fat graph: `2 - 2g - #∂ = χ(G)`.
pub fn fat_genus(g: &MetricGraph, r: &RotationSystem) -> Result<usize, RotationError> {
    genus_from_euler(g.euler_char(), boundary_count(g, r))
}

/// For each vertex, the number of distinct boundary walks passing through it.
pub fn vertex_boundary_incidence(g: &MetricGraph, r: &RotationSystem) -> Vec<usize> {
    let (label, _) = walk_labels(g, r);
    r.cycles()
        .iter()
        .map(|cycle| {
            let mut walks: Vec<usize> = cycle.iter().map(|d| label[d.0]).collect();
            walks.sort_unstable();
            walks.dedup();
            walks.len()
        })
        .collect()
}

/// Index space of all rotation systems of a graph.
///
/// Each vertex pins its smallest dart first; the remaining `deg - 1` darts
/// are permuted, ranked lexicographically. Vertex 0 is the least
/// significant digit of the mixed-radix index.
#[derive(Clone, Debug)]
pub struct RotationSpace {
    heads: Vec<Dart>,
    tails: Vec<Vec<Dart>>,
    radices: Vec<u64>,
    len: u64,
}

fn factorial(n: usize) -> Option<u64> {
    (1..=n as u64).try_fold(1u64, |acc, k| acc.checked_mul(k))
}

/// Total number of rotation systems, `∏ (deg(v) - 1)!`, or `None` on overflow.
pub fn rotation_count(g: &MetricGraph) -> Option<u64> {
    g.degrees().iter().try_fold(1u64, |acc, &d| {
        acc.checked_mul(factorial(d.saturating_sub(1))?)
    })
}

/// Enumerates every rotation system of `g`, refusing when there are more than `cap`.
pub fn enumerate_rotations(g: &MetricGraph, cap: u64) -> Result<RotationSpace, RotationError> {
    let len = match rotation_count(g) {
        Some(n) if n <= cap => n,
        Some(n) => {
            return Err(RotationError::CapExceeded {
                count: n.to_string(),
                cap,
            })
        }
        None => {
            return Err(RotationError::CapExceeded {
                count: "more than 2^64".into(),
                cap,
            })
        }
    };
    let mut heads = Vec::new();
    let mut tails = Vec::new();
    let mut radices = Vec::new();
    for v in 0..g.vertex_count() {
        let darts = g.darts_at(v);
        heads.push(darts[0]);
        radices.push(factorial(darts.len() - 1).expect("bounded by total count"));
        tails.push(darts[1..].to_vec());
    }
    Ok(RotationSpace {
        heads,
        tails,
        radices,
        len,
    })
}

impl RotationSpace {
    pub fn len(&self) -> u64 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// The rotation system with the given index, `index < len()`.
    pub fn get(&self, index: u64) -> RotationSystem {
        assert!(index < self.len, "rotation index out of range");
        let mut rest = index;
        let cycles = self
            .heads
            .iter()
            .zip(&self.tails)
            .zip(&self.radices)
            .map(|((&head, tail), &radix)| {
                let digit = rest % radix;
                rest /= radix;
                let mut cycle = Vec::with_capacity(tail.len() + 1);
                cycle.push(head);
                cycle.extend(nth_permutation(tail, digit));
                cycle
            })
            .collect();
        RotationSystem { cycles }
    }

    pub fn iter(&self) -> impl Iterator<Item = RotationSystem> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }
}

/// The `rank`-th permutation of `items` in lexicographic order of positions.
fn nth_permutation(items: &[Dart], mut rank: u64) -> Vec<Dart> {
    let mut pool = items.to_vec();
    let mut out = Vec::with_capacity(items.len());
    for remaining in (1..=items.len()).rev() {
        let block = factorial(remaining - 1).unwrap();
        let pick = (rank / block) as usize;
        rank %= block;
        out.push(pool.remove(pick));
    }
    out
}

/// Boundary-count statistics over a full rotation enumeration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RotationSurvey {
    /// Number of rotation systems per boundary count.
    pub histogram: BTreeMap<usize, u64>,
}

impl RotationSurvey {
    pub fn total(&self) -> u64 {
        self.histogram.values().sum()
    }

    pub fn min_boundaries(&self) -> usize {
        *self.histogram.keys().next().expect("non-empty survey")
    }

    pub fn max_boundaries(&self) -> usize {
        *self.histogram.keys().next_back().expect("non-empty survey")
    }

    /// All boundary counts share one parity.
    pub fn parity_consistent(&self) -> bool {
        let mut parities = self.histogram.keys().map(|b| b % 2);
        match parities.next() {
            Some(p) => parities.all(|q| q == p),
            None => true,
        }
    }
}

/// Histogram of boundary counts over every rotation in `space`, computed in
/// parallel on the current rayon pool.
pub fn survey(g: &MetricGraph, space: &RotationSpace) -> RotationSurvey {
    let histogram = (0..space.len())
        .into_par_iter()
        .fold(BTreeMap::new, |mut acc: BTreeMap<usize, u64>, i| {
            *acc.entry(boundary_count(g, &space.get(i))).or_default() += 1;
            acc
        })
        .reduce(BTreeMap::new, |mut a, b| {
            for (k, v) in b {
                *a.entry(k).or_default() += v;
            }
            a
        });
    RotationSurvey { histogram }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families;

    fn rot(g: &MetricGraph, text: &str) -> RotationSystem {
        RotationSystem::parse(g, text).unwrap()
    }

    #[test]
    fn theta_one_walk() {
        let g = families::theta();
        let r = rot(&g, "rot u a+ b+ c+\nrot v a- b- c-\n");
        let walks = boundary_walks(&g, &r);
        assert_eq!(walks.len(), 1);
        assert_eq!(walks[0].names(&g), ["a+", "c-", "b+", "a-", "c+", "b-"]);
        assert_eq!(fat_genus(&g, &r).unwrap(), 1);
        assert_eq!(vertex_boundary_incidence(&g, &r), vec![1, 1]);
    }

    #[test]
    fn theta_planar() {
        let g = families::theta();
        let r = rot(&g, "rot u a+ b+ c+\nrot v c- b- a-\n");
        let walks = boundary_walks(&g, &r);
        assert_eq!(walks.len(), 3);
        assert!(walks.iter().all(|w| w.len() == 2));
        assert_eq!(fat_genus(&g, &r).unwrap(), 0);
        assert_eq!(vertex_boundary_incidence(&g, &r), vec![3, 3]);
    }

    #[test]
    fn bouquet_torus() {
        let g = families::bouquet(2);
        let r = rot(&g, "rot u a+ b+ a- b-");
        assert_eq!(boundary_count(&g, &r), 1);
        assert_eq!(fat_genus(&g, &r).unwrap(), 1);
        assert_eq!(vertex_boundary_incidence(&g, &r), vec![1]);
    }

    #[test]
    fn k4_planar_rotation() {
        // tetrahedron: counter-clockwise neighbours seen from outside
        let g = families::complete(4);
        let r = k4_planar(&g);
        assert_eq!(boundary_count(&g, &r), 4);
        assert_eq!(fat_genus(&g, &r).unwrap(), 0);
        assert!(boundary_walks(&g, &r).iter().all(|w| w.len() == 3));
    }

    pub(crate) fn k4_planar(g: &MetricGraph) -> RotationSystem {
        // edges: e0=01 e1=02 e2=03 e3=12 e4=13 e5=23
        RotationSystem::parse(
            g,
            "rot v0 e0+ e1+ e2+\nrot v1 e0- e4+ e3+\nrot v2 e1- e3- e5+\nrot v3 e2- e5- e4-\n",
        )
        .unwrap()
    }

    #[test]
    fn default_rotations() {
        let g = families::theta();
        assert_eq!(
            default_rotation(&g, 0).to_text(&g),
            "rot u a+ b+ c+\nrot v a- b- c-\n"
        );
        let b2 = families::bouquet(2);
        assert_eq!(default_rotation(&b2, 0).to_text(&b2), "rot u a+ a- b+ b-\n");
        let k5 = families::complete(5);
        assert_eq!(default_rotation(&k5, 7), default_rotation(&k5, 7));
        assert!((1..20).any(|s| default_rotation(&k5, s) != default_rotation(&k5, 0)));
    }

    #[test]
    fn invalid_rotations() {
        let g = families::theta();
        let d = |i| Dart(i);
        assert!(matches!(
            RotationSystem::new(&g, vec![vec![d(0), d(2)], vec![d(1), d(3), d(5)]]),
            Err(RotationError::Missing(_))
        ));
        assert!(matches!(
            RotationSystem::new(
                &g,
                vec![vec![d(0), d(2), d(2), d(4)], vec![d(1), d(3), d(5)]]
            ),
            Err(RotationError::Duplicate(_))
        ));
        assert!(matches!(
            RotationSystem::new(&g, vec![vec![d(0), d(2), d(1)], vec![d(4), d(3), d(5)]]),
            Err(RotationError::Misplaced { .. })
        ));
        assert!(matches!(
            RotationSystem::parse(&g, "rot u a+ b+ c+\n"),
            Err(RotationError::Parse { .. })
        ));
    }

    #[test]
    fn enumeration_sizes() {
        assert_eq!(
            enumerate_rotations(&families::theta(), 10).unwrap().len(),
            4
        );
        assert_eq!(
            enumerate_rotations(&families::complete(4), 100)
                .unwrap()
                .len(),
            16
        );
        assert_eq!(
            enumerate_rotations(&families::complete(5), 10_000)
                .unwrap()
                .len(),
            7776
        );
        assert_eq!(
            enumerate_rotations(&families::bouquet(2), 10)
                .unwrap()
                .len(),
            6
        );
        assert!(matches!(
            enumerate_rotations(&families::complete(5), 1000),
            Err(RotationError::CapExceeded { .. })
        ));
    }

    #[test]
    fn enumeration_yields_distinct_valid_rotations() {
        let g = families::complete(4);
        let space = enumerate_rotations(&g, 100).unwrap();
        let all: Vec<RotationSystem> = space.iter().collect();
        for r in &all {
            assert_eq!(RotationSystem::new(&g, r.cycles().to_vec()).as_ref(), Ok(r));
        }
        let mut dedup = all.clone();
        dedup.sort_by_key(|r| format!("{:?}", r));
        dedup.dedup();
        assert_eq!(dedup.len(), 16);
    }

    #[test]
    fn survey_theta_counts() {
        let g = families::theta();
        let s = survey(&g, &enumerate_rotations(&g, 10).unwrap());
        assert_eq!(s.histogram, BTreeMap::from([(1, 2), (3, 2)]));
        assert!(s.parity_consistent());
    }

    #[test]
    fn genus_parity_error() {
        assert!(matches!(
            genus_from_euler(-1, 2),
            Err(RotationError::Parity { .. })
        ));
        assert!(matches!(
            genus_from_euler(-1, 5),
            Err(RotationError::Parity { .. })
        ));
        assert_eq!(genus_from_euler(-5, 1), Ok(3));
    }
}
