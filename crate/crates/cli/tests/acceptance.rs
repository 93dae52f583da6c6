//! Acceptance criteria, one PASS/FAIL line each. Runs without the libtest
//! harness so every line is printed; exits non-zero if any criterion fails.

use std::collections::BTreeMap;
use std::process::ExitCode;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ribbon_embed::{cmd_embed, EmbedOptions, Target};
use ribbon_embed_core::assembly::{
    is_clean, naive_embedding, verify_schema, Construction, SurfaceSchema,
};
use ribbon_embed_core::families;
use ribbon_embed_core::graph::MetricGraph;
use ribbon_embed_core::hyperbolic::{f_min, foot_length, waist_distance, waist_for_distance};
use ribbon_embed_core::invariants::{
    analyze, betti_deficiency, capped_genus, essential_genus, ge_max_bound, ge_max_exact, Limits,
    DEFAULT_TREE_CAP,
};
use ribbon_embed_core::moves::{minimize_boundaries, soundness_sweep, SearchOptions};
use ribbon_embed_core::rotation::{
    default_rotation, enumerate_rotations, genus_from_euler, rotation_count, survey,
};

const ROTATION_CAP: u64 = 10_000;
const NUMERIC_TOL: f64 = 1e-6;
const ROUND_TRIP_TOL: f64 = 1e-9;
const GRID_POINTS: usize = 1000;
const RANDOM_GRAPHS: usize = 50;
const RANDOM_MAX_EDGES: usize = 12;
const RANDOM_ROTATION_CAP: u64 = 5_000;
const SUBDIVISIONS: usize = 20;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn named() -> Vec<(&'static str, MetricGraph)> {
    vec![
        ("Theta", families::theta()),
        ("B2", families::bouquet(2)),
        ("K4", families::complete(4)),
        ("K5", families::complete(5)),
    ]
}

fn zeta(g: &MetricGraph) -> usize {
    betti_deficiency(g, DEFAULT_TREE_CAP).expect("tree enumeration fits")
}

fn xuong_oracle() -> Outcome {
    let expected = [("Theta", 1), ("B2", 1), ("K4", 2), ("K5", 1)];
    let mut ok = true;
    let mut parts = Vec::new();
    for ((name, g), (_, want)) in named().into_iter().zip(expected) {
        let s = survey(&g, &enumerate_rotations(&g, ROTATION_CAP).unwrap());
        let min = s.min_boundaries();
        let z1 = zeta(&g) + 1;
        ok &= min == z1 && min == want;
        parts.push(format!("{name} min={min} 1+zeta={z1}"));
    }
    outcome(ok, parts.join(", "))
}

fn boundary_parity() -> Outcome {
    let mut violations = 0u64;
    let mut total = 0u64;
    for (_, g) in named() {
        let s = survey(&g, &enumerate_rotations(&g, ROTATION_CAP).unwrap());
        total += s.total();
        let parity = (g.betti() + 1) % 2;
        violations += s
            .histogram
            .iter()
            .filter(|(b, _)| *b % 2 != parity)
            .map(|(_, n)| n)
            .sum::<u64>();
    }
    outcome(
        violations == 0,
        format!("{violations} violations over {total} rotations"),
    )
}

fn essential_genus_formula() -> Outcome {
    let expected = [("Theta", 2), ("B2", 2), ("K4", 3), ("K5", 4)];
    let mut ok = true;
    let mut parts = Vec::new();
    for ((name, g), (_, want)) in named().into_iter().zip(expected) {
        let space = enumerate_rotations(&g, ROTATION_CAP).unwrap();
        let s = survey(&g, &space);
        let brute = s
            .histogram
            .keys()
            .map(|&b| capped_genus(genus_from_euler(g.euler_char(), b).unwrap(), b))
            .min()
            .unwrap();
        let formula = essential_genus(&g, DEFAULT_TREE_CAP).unwrap();
        ok &= brute == formula && formula == want;
        parts.push(format!("{name} formula={formula} brute={brute}"));
    }
    outcome(ok, parts.join(", "))
}

fn max_minimal_genus() -> Outcome {
    let cases = [
        ("Theta", families::theta(), 2, (3, 1)),
        ("K4", families::complete(4), 3, (4, 1)),
        ("K5", families::complete(5), 5, (41, 6)),
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, g, want, (num, den)) in cases {
        let exact = ge_max_exact(&g, ROTATION_CAP).unwrap();
        let bound = ge_max_bound(&g).unwrap();
        let bound_ok = *bound.numer() == num && *bound.denom() == den;
        let within = (exact as u64) * bound.denom() <= *bound.numer();
        ok &= exact == want && bound_ok && within;
        parts.push(format!(
            "{name} exact={exact} bound={}/{}",
            bound.numer(),
            bound.denom()
        ));
    }
    outcome(ok, parts.join(", "))
}

fn random_graphs() -> Vec<MetricGraph> {
    let mut rng = ChaCha8Rng::seed_from_u64(20240601);
    let mut out = Vec::new();
    while out.len() < RANDOM_GRAPHS {
        let v: usize = rng.gen_range(1..=6);
        let min_e = (3 * v).div_ceil(2);
        let e = rng.gen_range(min_e..=RANDOM_MAX_EDGES.max(min_e));
        let g = families::random_min_degree3(rng.gen(), v, e);
        if rotation_count(&g).is_some_and(|n| n <= RANDOM_ROTATION_CAP) {
            out.push(g);
        }
    }
    out
}

fn move_soundness() -> Outcome {
    let mut checked = 0;
    let mut failures = 0;
    let mut graphs = named().into_iter().map(|(_, g)| g).collect::<Vec<_>>();
    graphs.extend(random_graphs());
    for g in &graphs {
        let sweep = soundness_sweep(g, &enumerate_rotations(g, ROTATION_CAP).unwrap());
        checked += sweep.checked;
        failures += sweep.failures.len();
    }
    outcome(
        failures == 0 && checked > 0,
        format!(
            "{} graphs, {checked} eligible (rotation, vertex) pairs, {failures} without an exact -2 move",
            graphs.len()
        ),
    )
}

fn greedy_reach() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, g) in named() {
        let target = zeta(&g) + 1;
        let opts = SearchOptions::default();
        let space = enumerate_rotations(&g, ROTATION_CAP).unwrap();
        let mut missed = 0;
        let mut stalls = 0;
        for r in space.iter() {
            let out = minimize_boundaries(&g, &r, &opts).unwrap();
            if out.boundaries != target || !out.certified {
                missed += 1;
            }
            if out.greedy_stalled() {
                stalls += 1;
            }
        }
        ok &= missed == 0;
        parts.push(format!(
            "{name} {}/{} reached, {stalls} greedy stalls",
            space.len() - missed,
            space.len()
        ));
    }
    outcome(ok, parts.join(", "))
}

fn hyperbolic_numerics() -> Outcome {
    let fm = f_min();
    let x3 = foot_length(3).unwrap();
    let x4 = foot_length(4).unwrap();
    let fm_ok = (fm - 2.813659).abs() <= NUMERIC_TOL;
    let x3_ok = (x3 - 2.356521).abs() <= NUMERIC_TOL;
    let x4_ok = (x4 - 2.528255).abs() <= NUMERIC_TOL;
    let lo = fm + 1e-6;
    let hi = 20.0;
    let mut worst: f64 = 0.0;
    let mut xs = Vec::with_capacity(GRID_POINTS);
    for i in 0..GRID_POINTS {
        let l = lo + (hi - lo) * i as f64 / (GRID_POINTS - 1) as f64;
        let x = waist_for_distance(l).unwrap();
        worst = worst.max((waist_distance(x).unwrap() - l).abs());
        xs.push(x);
    }
    let fs: Vec<f64> = xs.iter().map(|&x| waist_distance(x).unwrap()).collect();
    let increasing = fs.windows(2).all(|w| w[0] < w[1]) && xs.windows(2).all(|w| w[0] < w[1]);
    let grid_ok = worst <= ROUND_TRIP_TOL;
    outcome(
        fm_ok && x3_ok && x4_ok && grid_ok && increasing,
        format!(
            "f_min={fm:.9} [{}], x_v(3)={x3:.9} vs 2.356521 [{}], x_v(4)={x4:.9} vs 2.528255 [{}], \
             max|f(f_inv(L))-L|={worst:.2e} [{}], increasing [{}]",
            mark(fm_ok),
            mark(x3_ok),
            mark(x4_ok),
            mark(grid_ok),
            mark(increasing)
        ),
    )
}

fn mark(ok: bool) -> &'static str {
    if ok {
        "ok"
    } else {
        "FAIL"
    }
}

fn construction_identities() -> Outcome {
    let expected = [("Theta", 5), ("B2", 4), ("K4", 9), ("K5", 16)];
    let mut ok = true;
    let mut parts = Vec::new();
    for ((name, g), (_, want)) in named().into_iter().zip(expected) {
        let s = naive_embedding(&g, &default_rotation(&g, 0), 0.1).unwrap();
        let diags = verify_schema(&s);
        let excess: i64 = g.degrees().iter().map(|&d| d as i64 - 2).sum();
        let identity = 2 * s.summary.genus as i64 - 2 == excess + 2 * g.edge_count() as i64;
        let genus_ok = s.summary.genus == g.edge_count() + g.betti() && s.summary.genus == want;
        ok &= diags.is_empty() && identity && genus_ok;
        parts.push(format!(
            "{name} g={} diagnostics={}",
            s.summary.genus,
            diags.len()
        ));
    }
    outcome(ok, parts.join(", "))
}

fn target_genus() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("theta.txt");
    std::fs::write(&path, families::theta().to_edge_list()).unwrap();
    let mut ok = true;
    let mut parts = Vec::new();
    for g in 2..=5 {
        let opts = EmbedOptions {
            target: Target::Genus(g),
            margin: 0.1,
            search: SearchOptions::default(),
        };
        let report = cmd_embed(&path, &opts).unwrap();
        let s = SurfaceSchema::from_json(&report.schema.to_json()).unwrap();
        let clean = is_clean(&verify_schema(&s));
        let closed = s.summary.boundary_count == 0 && s.free_boundaries().is_empty();
        let fits = s.summary.genus == g
            && s.summary.minimal == (g == 2)
            && s.summary.construction == Construction::SigmaTarget(g);
        ok &= clean && closed && fits;
        parts.push(format!(
            "g={g} minimal={} verified={clean}",
            s.summary.minimal
        ));
    }
    outcome(ok, parts.join(", "))
}

fn smoothing_invariance() -> Outcome {
    let k4 = families::complete(4);
    let reference = analyze(&k4, Limits::default()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut ok = true;
    let mut ge = BTreeMap::new();
    for _ in 0..SUBDIVISIONS {
        let mut g = k4.clone();
        for _ in 0..rng.gen_range(1..=3) {
            let e = rng.gen_range(0..k4.edge_count());
            let mut cuts: Vec<f64> = (0..rng.gen_range(1..=3))
                .map(|_| rng.gen_range(0.05..0.95))
                .collect();
            cuts.sort_by(f64::total_cmp);
            cuts.dedup();
            g = families::subdivide(&g, e, &cuts);
        }
        let smooth = g.smooth().unwrap();
        let same_shape = smooth.edge_count() == k4.edge_count()
            && (0..k4.edge_count()).all(|e| {
                smooth.edge_name(e) == k4.edge_name(e)
                    && smooth.endpoints(e) == k4.endpoints(e)
                    && (smooth.length(e) - k4.length(e)).abs() <= ROUND_TRIP_TOL
            });
        let mut rep = analyze(&g, Limits::default()).unwrap();
        rep.smoothed_vertices = 0;
        *ge.entry(rep.essential_genus).or_insert(0) += 1;
        ok &= same_shape && rep == reference;
    }
    outcome(
        ok,
        format!("{SUBDIVISIONS} subdivisions, essential genus histogram {ge:?}"),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("minimum boundary count equals 1 + zeta", xuong_oracle),
        ("boundary counts share one parity", boundary_parity),
        (
            "essential genus formula matches enumeration",
            essential_genus_formula,
        ),
        (
            "maximal minimal-embedding genus within the girth bound",
            max_minimal_genus,
        ),
        (
            "every reduce move changes the walk count by exactly -2",
            move_soundness,
        ),
        (
            "minimization reaches 1 + zeta from every start",
            greedy_reach,
        ),
        ("hyperbolic closed forms", hyperbolic_numerics),
        ("naive construction identities", construction_identities),
        ("target genus schemas", target_genus),
        (
            "smoothing invariance under subdivision",
            smoothing_invariance,
        ),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        if !o.pass {
            failed += 1;
        }
        println!(
            "[{}] {:>2}. {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            i + 1,
            o.detail
        );
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
