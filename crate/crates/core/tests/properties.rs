use proptest::prelude::*;

use ribbon_embed_core::assembly::{
    assemble_sigma_surface, cap_standard, cap_target_genus, is_clean, naive_embedding,
    verify_schema, SurfaceSchema,
};
use ribbon_embed_core::families;
use ribbon_embed_core::graph::MetricGraph;
use ribbon_embed_core::invariants::{
    analyze, betti_deficiency, capped_genus, essential_genus, Limits, DEFAULT_TREE_CAP,
};
use ribbon_embed_core::moves::{minimize_boundaries, SearchOptions};
use ribbon_embed_core::rotation::{
    boundary_count, boundary_walks, default_rotation, enumerate_rotations, fat_genus, survey,
};

fn small_graph() -> impl Strategy<Value = MetricGraph> {
    (any::<u64>(), 1usize..=5)
        .prop_flat_map(|(seed, v)| {
            let min_e = (3 * v).div_ceil(2);
            (Just(seed), Just(v), min_e..=min_e + 3)
        })
        .prop_map(|(seed, v, e)| families::random_min_degree3(seed, v, e))
}

fn cuts() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::btree_set(1u32..100, 1..4)
        .prop_map(|s| s.into_iter().map(|k| k as f64 / 100.0).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn walks_partition_darts(g in small_graph(), seed in any::<u64>()) {
        let r = default_rotation(&g, seed);
        let walks = boundary_walks(&g, &r);
        let mut seen = vec![0; g.dart_count()];
        for w in &walks {
            for d in &w.darts {
                seen[d.0] += 1;
            }
        }
        prop_assert!(seen.iter().all(|&k| k == 1));
        // #∂ ≡ β + 1 (mod 2)
        prop_assert_eq!(walks.len() % 2, (g.betti() + 1) % 2);
        prop_assert!(fat_genus(&g, &r).is_ok());
    }

    #[test]
    fn smoothing_undoes_subdivision(g in small_graph(), edge_pick in any::<prop::sample::Index>(), cs in cuts()) {
        let e = edge_pick.index(g.edge_count());
        let sub = families::subdivide(&g, e, &cs);
        prop_assert_eq!(sub.betti(), g.betti());
        let smooth = sub.smooth().unwrap();
        prop_assert_eq!(smooth.smooth().unwrap(), smooth.clone());
        prop_assert!((smooth.total_length() - g.total_length()).abs() < 1e-9);
        prop_assert_eq!(smooth.edge_count(), g.edge_count());
        prop_assert!((smooth.length(e) - g.length(e)).abs() < 1e-9);
        prop_assert_eq!(
            essential_genus(&sub, DEFAULT_TREE_CAP).unwrap(),
            essential_genus(&g, DEFAULT_TREE_CAP).unwrap()
        );
    }

    #[test]
    fn naive_schema_verifies(g in small_graph(), seed in any::<u64>(), margin in 0.01f64..1.0) {
        let s = naive_embedding(&g, &default_rotation(&g, seed), margin).unwrap();
        prop_assert_eq!(s.summary.genus, g.edge_count() + g.betti());
        prop_assert_eq!(verify_schema(&s), vec![]);
    }

    #[test]
    fn minimal_schema_round_trips(g in small_graph(), seed in any::<u64>()) {
        let opts = SearchOptions { seed, ..SearchOptions::default() };
        let out = minimize_boundaries(&g, &default_rotation(&g, seed), &opts).unwrap();
        let zeta = betti_deficiency(&g, DEFAULT_TREE_CAP).unwrap();
        prop_assert!(out.certified);
        prop_assert_eq!(out.boundaries, zeta + 1);
        let bordered = assemble_sigma_surface(&g, &out.rotation, 0.1).unwrap();
        let closed = cap_standard(&bordered).unwrap();
        prop_assert_eq!(closed.summary.genus, essential_genus(&g, DEFAULT_TREE_CAP).unwrap());
        let back = SurfaceSchema::from_json(&closed.to_json()).unwrap();
        prop_assert_eq!(&back, &closed);
        prop_assert_eq!(verify_schema(&back), vec![]);
        let higher = cap_target_genus(&bordered, closed.summary.genus + 3).unwrap();
        prop_assert!(is_clean(&verify_schema(&higher)));
    }

    #[test]
    fn zeta_matches_beta_parity(g in small_graph()) {
        let zeta = betti_deficiency(&g, DEFAULT_TREE_CAP).unwrap();
        prop_assert_eq!(zeta % 2, g.betti() % 2);
    }
}

#[test]
fn monotone_capping() {
    for g in [families::theta(), families::complete(4)] {
        let space = enumerate_rotations(&g, 100).unwrap();
        let counts: Vec<usize> = space.iter().map(|r| boundary_count(&g, &r)).collect();
        let euler = g.euler_char();
        let capped = |b: usize| capped_genus(((2 - euler - b as i64) / 2) as usize, b);
        for &a in &counts {
            for &b in &counts {
                if b == a + 2 {
                    assert!(
                        capped(a) <= capped(b),
                        "b={a} caps to {} but b={b} caps to {}",
                        capped(a),
                        capped(b)
                    );
                }
            }
        }
    }
}

#[test]
fn survey_matches_brute_force_histograms() {
    let expect = [
        (families::theta(), vec![(1, 2), (3, 2)]),
        (families::bouquet(2), vec![(1, 2), (3, 4)]),
        (families::complete(4), vec![(2, 14), (4, 2)]),
        (families::complete(5), vec![(1, 2340), (3, 4974), (5, 462)]),
    ];
    for (g, hist) in expect {
        let s = survey(&g, &enumerate_rotations(&g, 10_000).unwrap());
        assert_eq!(s.histogram.into_iter().collect::<Vec<_>>(), hist);
    }
}

#[test]
fn report_is_stable_under_subdivision() {
    let k4 = families::complete(4);
    let sub = families::subdivide(&families::subdivide(&k4, 2, &[0.25, 0.5]), 5, &[0.9]);
    let mut a = analyze(&sub, Limits::default()).unwrap();
    let b = analyze(&k4, Limits::default()).unwrap();
    assert_eq!(a.smoothed_vertices, 3);
    a.smoothed_vertices = 0;
    assert_eq!(a, b);
}
