//! Small named graphs and random generators used by tests, the oracle and examples.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::{EdgeSpec, MetricGraph};

/// Θ: two vertices `u`, `v` joined by unit edges `a`, `b`, `c`.
pub fn theta() -> MetricGraph {
    theta_with_lengths([1.0, 1.0, 1.0])
}

pub fn theta_with_lengths(lengths: [f64; 3]) -> MetricGraph {
    let specs: Vec<EdgeSpec> = ["a", "b", "c"]
        .iter()
        .zip(lengths)
        .map(|(n, l)| EdgeSpec::new(*n, "u", "v", l))
        .collect();
    MetricGraph::new(&specs).expect("theta")
}

/// Bouquet of `k` unit loops at a single vertex `u`; edges named `a`, `b`, ...
pub fn bouquet(k: usize) -> MetricGraph {
    let specs: Vec<EdgeSpec> = (0..k)
        .map(|i| EdgeSpec::new(letter_name(i), "u", "u", 1.0))
        .collect();
    MetricGraph::new(&specs).expect("bouquet")
}

/// Complete graph on `n` vertices `v0..` with unit lengths, edges in
/// lexicographic order of their endpoints.
pub fn complete(n: usize) -> MetricGraph {
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            pairs.push((i, j));
        }
    }
    from_pairs(&pairs)
}

/// Cycle on `n` vertices with unit lengths.
pub fn cycle(n: usize) -> MetricGraph {
    let pairs: Vec<(usize, usize)> = (0..n).map(|i| (i, (i + 1) % n)).collect();
    from_pairs(&pairs)
}

/// Unit-length graph from endpoint pairs; vertices `v<i>`, edges `e<k>`.
pub fn from_pairs(pairs: &[(usize, usize)]) -> MetricGraph {
    let specs: Vec<EdgeSpec> = pairs
        .iter()
        .enumerate()
        .map(|(k, &(a, b))| EdgeSpec::new(format!("e{k}"), format!("v{a}"), format!("v{b}"), 1.0))
        .collect();
    MetricGraph::new(&specs).expect("from_pairs")
}

fn letter_name(i: usize) -> String {
    let letters = b"abcdefghijklmnopqrstuvwxyz";
    if i < letters.len() {
        (letters[i] as char).to_string()
    } else {
        format!("l{i}")
    }
}

/// Inserts degree-2 vertices on `edge` at the given fractions of its length
/// (strictly increasing, inside `(0, 1)`). The original edge keeps its index
/// and becomes the first piece; further pieces are appended.
pub fn subdivide(g: &MetricGraph, edge: usize, cuts: &[f64]) -> MetricGraph {
    assert!(cuts.windows(2).all(|w| w[0] < w[1]), "cuts must increase");
    assert!(
        cuts.iter().all(|&c| c > 0.0 && c < 1.0),
        "cuts must lie in (0, 1)"
    );
    let mut specs = g.edge_specs();
    if cuts.is_empty() {
        return g.clone();
    }
    let original = specs[edge].clone();
    let total = original.length;
    let base = original.name.clone();
    let mut points: Vec<String> = vec![original.tail.clone()];
    for k in 0..cuts.len() {
        points.push(fresh_name(&specs, &format!("{base}_s{k}")));
    }
    points.push(original.head.clone());
    let mut bounds = vec![0.0];
    bounds.extend_from_slice(cuts);
    bounds.push(1.0);
    for k in 0..=cuts.len() {
        let len = (bounds[k + 1] - bounds[k]) * total;
        if k == 0 {
            specs[edge] = EdgeSpec::new(base.clone(), points[0].clone(), points[1].clone(), len);
        } else {
            let name = fresh_name(&specs, &format!("{base}_{k}"));
            specs.push(EdgeSpec::new(
                name,
                points[k].clone(),
                points[k + 1].clone(),
                len,
            ));
        }
    }
    MetricGraph::new(&specs).expect("subdivision of a valid graph")
}

fn fresh_name(specs: &[EdgeSpec], wanted: &str) -> String {
    let taken = |n: &str| {
        specs
            .iter()
            .any(|s| s.name == n || s.tail == n || s.head == n)
    };
    let mut name = wanted.to_string();
    let mut k = 0;
    while taken(&name) {
        k += 1;
        name = format!("{wanted}x{k}");
    }
    name
}

/// Random connected multigraph (loops and parallel edges allowed) with
/// `vertices` vertices, `edges` edges and every degree at least 3, drawn by
/// pairing half-edges uniformly at random. Requires `2 * edges >= 3 * vertices`.
pub fn random_min_degree3(seed: u64, vertices: usize, edges: usize) -> MetricGraph {
    assert!(vertices >= 1 && 2 * edges >= 3 * vertices);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let mut degree = vec![3usize; vertices];
        for _ in 0..(2 * edges - 3 * vertices) {
            let v = rng.gen_range(0..vertices);
            degree[v] += 1;
        }
        let mut stubs: Vec<usize> = degree
            .iter()
            .enumerate()
            .flat_map(|(v, &d)| std::iter::repeat_n(v, d))
            .collect();
        stubs.shuffle(&mut rng);
        let pairs: Vec<(usize, usize)> = stubs.chunks(2).map(|c| (c[0], c[1])).collect();
        let specs: Vec<EdgeSpec> = pairs
            .iter()
            .enumerate()
            .map(|(k, &(a, b))| {
                let len = rng.gen_range(0.5..3.0);
                EdgeSpec::new(format!("e{k}"), format!("v{a}"), format!("v{b}"), len)
            })
            .collect();
        let g = MetricGraph::new(&specs).expect("positive lengths");
        // every vertex is mentioned because degrees are at least 3
        if g.vertex_count() == vertices && g.is_connected() {
            return g;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn named_graphs() {
        let k5 = complete(5);
        assert_eq!((k5.vertex_count(), k5.edge_count()), (5, 10));
        assert_eq!(bouquet(2).degrees(), vec![4]);
        assert!(cycle(3).is_cycle());
        assert!(!theta().is_cycle());
    }

    #[test]
    fn subdivision_preserves_length_and_betti() {
        let g = complete(4);
        let s = subdivide(&g, 2, &[0.25, 0.5]);
        assert_eq!(s.vertex_count(), 6);
        assert_eq!(s.edge_count(), 8);
        assert_eq!(s.betti(), g.betti());
        assert!((s.total_length() - g.total_length()).abs() < 1e-12);
        assert_eq!(s.girth(), Some(3));
        let s0 = subdivide(&g, 0, &[0.5]);
        // every triangle through edge 0 now has four edges; others remain
        assert_eq!(s0.girth(), Some(3));
        let t = subdivide(&cycle(3), 0, &[0.5]);
        assert_eq!(t.girth(), Some(4));
    }

    #[test]
    fn random_graphs_are_valid() {
        for seed in 0..30 {
            let g = random_min_degree3(seed, 4, 7);
            assert!(g.validate(3).is_empty());
            assert_eq!(g.edge_count(), 7);
        }
        assert_eq!(random_min_degree3(9, 6, 9), random_min_degree3(9, 6, 9));
    }
}
