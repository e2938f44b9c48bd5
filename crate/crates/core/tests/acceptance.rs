//! Acceptance checks. Runs as a plain binary so every criterion prints its
//! verdict line; exits nonzero when any criterion fails.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use aperiodic::cochain::{build_potential, check_cycle_closure, cycle_sum, face_sum, DirectedEdgeCochain, Graph};
use aperiodic::cpt::{self, builtin_scheme, conservation_report, generate_cpt, lattice_cochain, CfStatus};
use aperiodic::penrose::{p2_patch, Seed};
use aperiodic::pentagrid::{generate_pentagrid, PentagridParams};
use aperiodic::potential::{height_atlas, height_function, injectivity_check, reconstruction_check, AtlasOutcome, Height};
use aperiodic::spectral::{builtin_systems, coherence_hierarchy, j_cost, perron_frobenius, substitution_entropy, SubstitutionMatrix};
use aperiodic::tiling::Tiling;
use aperiodic::validator::{equivalence_audit, inject_violation, validate, Which};
use aperiodic::Error;
use num_rational::Rational64;
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

const SEED: u64 = 0x5eed_0a11;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn phi() -> f64 {
    (1.0 + 5f64.sqrt()) / 2.0
}

fn interior_edges(t: &Tiling) -> Vec<usize> {
    (0..t.edges.len()).filter(|&i| !t.edges[i].boundary).collect()
}

fn toy_potential() -> Outcome {
    let g = Graph::new(4, [(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
    let mut c = DirectedEdgeCochain::zero(&g);
    for (u, v, x) in [(0, 1, 1), (1, 2, 0), (2, 3, -1), (3, 0, 0)] {
        c.set(&g, u, v, x).unwrap();
    }
    let sum = cycle_sum(&g, &c, &[0, 1, 2, 3, 0]).unwrap();
    let h = build_potential(&g, &c, 0).unwrap().map().map(|m| m.heights);
    let pass = sum == 0 && h.as_deref() == Some(&[0, 1, 1, 0][..]);
    outcome(pass, format!("h = {h:?}, cycle sum = {sum}"))
}

fn boundary_sums() -> Outcome {
    let g = Graph::new(4, [(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
    let table = |vals: [i64; 4]| {
        let mut c = DirectedEdgeCochain::zero(&g);
        for i in 0..4 {
            c.set(&g, i, (i + 1) % 4, vals[i]).unwrap();
        }
        face_sum(&g, &c, &[0, 1, 2, 3]).unwrap()
    };
    let dart = table([1, 0, -1, 0]);
    let kite = table([1, 0, 0, -1]);

    let t = p2_patch(Seed::Kite, 8).unwrap();
    let mut nonzero = 0usize;
    for tile in &t.tiles {
        for k in 0..t.families {
            if tile.sides.iter().map(|s| s.value(k)).sum::<i64>() != 0 {
                nonzero += 1;
            }
        }
    }
    outcome(
        dart == 0 && kite == 0 && nonzero == 0 && !t.tiles.is_empty(),
        format!(
            "dart sum {dart}, kite sum {kite}; {} tiles x {} families, {nonzero} nonzero boundary sums",
            t.tiles.len(),
            t.families
        ),
    )
}

fn four_way_equivalence() -> Outcome {
    let mut rng = StdRng::seed_from_u64(SEED);
    let mut candidates = 0usize;
    let mut agree = 0usize;
    let mut disagreements = Vec::new();
    let mut grids = 0;
    while candidates < 110 {
        // Offsets g_0..g_3 random, g_4 closes the sum to an integer.
        let mut g: Vec<Rational64> = (0..4).map(|_| Rational64::new(rng.gen_range(1..97), 97)).collect();
        let s: Rational64 = g.iter().copied().sum();
        g.push(s.ceil() - s);
        let params = PentagridParams::new([g[0], g[1], g[2], g[3], g[4]], 8.0).unwrap();
        let base = match generate_pentagrid(&params) {
            Ok(t) => t,
            Err(Error::SingularPentagrid { .. }) => continue,
            Err(e) => panic!("{e}"),
        };
        grids += 1;
        let interior = interior_edges(&base);
        for count in 0..=10usize {
            let mut t = base.clone();
            for &e in interior.choose_multiple(&mut rng, count) {
                let which = if rng.gen_bool(0.5) { Which::A } else { Which::B };
                t = inject_violation(&t, e, which).unwrap();
            }
            let validator = validate(&t).unwrap().valid;

            let graph = t.graph().unwrap();
            let mut closure = true;
            for k in 0..t.families {
                let mut values = Vec::with_capacity(t.edges.len());
                for e in &t.edges {
                    let vals: BTreeSet<i64> = e.tiles.iter().map(|&(ti, s)| t.side_value_canonical(ti, s, k)).collect();
                    if vals.len() > 1 {
                        closure = false;
                    }
                    values.push(vals.first().copied().unwrap_or(0));
                }
                let c = DirectedEdgeCochain::from_canonical_values(&graph, values).unwrap();
                closure &= check_cycle_closure(&graph, &c).unwrap().is_pass();
            }
            let heights = matches!(height_atlas(&t, None).unwrap(), AtlasOutcome::Atlas(_));
            let audit = equivalence_audit(&t);

            candidates += 1;
            let expected = count == 0;
            let ok = validator == expected
                && closure == expected
                && heights == expected
                && matches!(&audit, Ok(a) if a.gluing == expected);
            if ok {
                agree += 1;
            } else {
                disagreements.push((grids, count, validator, closure, heights));
            }
        }
    }
    outcome(
        agree == candidates,
        format!("{agree}/{candidates} candidates agree over {grids} pentagrids; disagreements {disagreements:?}"),
    )
}

fn localisation() -> Outcome {
    let mut rng = StdRng::seed_from_u64(SEED ^ 1);
    let bases = [
        generate_pentagrid(&PentagridParams::regular(8.0)).unwrap(),
        p2_patch(Seed::Kite, 5).unwrap(),
    ];
    let mut trials = 0usize;
    let mut failures = Vec::new();
    for (b, base) in bases.iter().enumerate() {
        let interior = interior_edges(base);
        for trial in 0..20usize {
            let count = 1 + trial % 6;
            let mut t = base.clone();
            let mut injected: BTreeSet<((usize, usize), usize)> = BTreeSet::new();
            for &e in interior.choose_multiple(&mut rng, count) {
                let which = if rng.gen_bool(0.5) { Which::A } else { Which::B };
                let edge = &base.edges[e];
                injected.insert(((edge.u, edge.v), edge.class));
                t = inject_violation(&t, e, which).unwrap();
            }
            trials += 1;
            let report = validate(&t).unwrap();
            let reported: BTreeSet<((usize, usize), usize)> = report.all_violations().map(|v| (v.edge, v.family)).collect();
            if reported != injected || report.violation_count() != injected.len() {
                failures.push(format!("base {b} trial {trial}: reported {reported:?} vs injected {injected:?}"));
                continue;
            }
            let failing: BTreeSet<usize> = injected.iter().map(|&(_, k)| k).collect();
            for k in 0..t.families {
                let h = height_function(&t, k, None).unwrap();
                match (failing.contains(&k), h) {
                    (true, Height::Witness(w)) => {
                        let hit = injected.iter().any(|&((u, v), f)| f == k && w.witness.contains_edge(u, v));
                        if !hit || w.witness.sum == 0 {
                            failures.push(format!("base {b} trial {trial}: family {k} witness misses injected edges"));
                        }
                    }
                    (false, Height::Map(_)) => {}
                    (expected, _) => failures.push(format!("base {b} trial {trial}: family {k} failing={expected} mismatch")),
                }
            }
        }
    }
    outcome(failures.is_empty(), format!("{trials} trials on pentagrid r=8 and P2 5 deflations; failures {failures:?}"))
}

fn pentagrid_reconstruction() -> Outcome {
    let t = generate_pentagrid(&PentagridParams::regular(20.0)).unwrap();
    match height_atlas(&t, None).unwrap() {
        AtlasOutcome::Atlas(a) => {
            let residual = reconstruction_check(&a, &t);
            let collision = injectivity_check(&a);
            outcome(
                residual <= 1e-9 && collision.is_none(),
                format!("{} vertices, max residual {residual:.3e}, collision {collision:?}", t.vertices.len()),
            )
        }
        AtlasOutcome::Witnesses(w) => outcome(false, format!("heights obstructed: {} witnesses", w.len())),
    }
}

fn cpt_identities() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, radius) in [("fibonacci", 50.0), ("penrose5", 10.0), ("ammann_beenker", 10.0), ("icosahedral", 4.0)] {
        let s = builtin_scheme(name).unwrap();
        let p = generate_cpt(&s, radius).unwrap();
        let g = p.graph().unwrap();
        let mut nonzero = 0usize;
        for k in 0..p.n {
            let c = lattice_cochain(&p, &g, k).unwrap();
            nonzero += p.faces.iter().filter(|f| face_sum(&g, &c, &f.corners).unwrap() != 0).count();
        }
        let residual = cpt::reconstruction_check_cpt(&p);
        let ok = nonzero == 0 && residual <= 1e-12 && (p.d == 1 || !p.faces.is_empty());
        pass &= ok;
        parts.push(format!("{name}: {} faces x {} cochains, {nonzero} nonzero, residual {residual:.1e}", p.faces.len(), p.n));
    }
    outcome(pass, parts.join("; "))
}

fn fibonacci_chain() -> Outcome {
    let s = builtin_scheme("fibonacci").unwrap();
    let p = generate_cpt(&s, 440.0).unwrap();
    let mut order: Vec<usize> = (0..p.points.len()).collect();
    order.sort_by(|&a, &b| p.positions[a][0].total_cmp(&p.positions[b][0]));
    if order.len() < 1000 {
        return outcome(false, format!("only {} vertices generated", order.len()));
    }
    let skip = (order.len() - 1000) / 2;
    let chain = &order[skip..skip + 1000];
    let gaps: Vec<f64> = chain.windows(2).map(|w| p.positions[w[1]][0] - p.positions[w[0]][0]).collect();
    let mut lengths: Vec<f64> = Vec::new();
    for &g in &gaps {
        if !lengths.iter().any(|l| (l - g).abs() < 1e-9) {
            lengths.push(g);
        }
    }
    lengths.sort_by(f64::total_cmp);
    if lengths.len() != 2 {
        return outcome(false, format!("gap lengths {lengths:?}"));
    }
    let ratio = lengths[1] / lengths[0];
    let long = gaps.iter().filter(|&&g| (g - lengths[1]).abs() < 1e-9).count();
    let short = gaps.len() - long;
    let count_ratio = long as f64 / short as f64;
    let formula = chain
        .iter()
        .map(|&v| (p.positions[v][0] - (p.points[v][0] as f64 + p.points[v][1] as f64 / phi())).abs())
        .fold(0.0, f64::max);
    outcome(
        (ratio - phi()).abs() <= 1e-6 && (count_ratio / phi() - 1.0).abs() <= 0.02 && formula <= 1e-12,
        format!("gap ratio {ratio:.12}, L:S = {long}:{short} = {count_ratio:.5}, max |v - (x1 + x2/phi)| = {formula:.1e}"),
    )
}

fn conservation_ranks() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, radius, expected) in [("fibonacci", 50.0, 2), ("penrose5", 12.0, 5), ("ammann_beenker", 10.0, 4), ("icosahedral", 8.0, 6)] {
        let s = builtin_scheme(name).unwrap();
        let p = generate_cpt(&s, radius).unwrap();
        let r = conservation_report(&s, &p).unwrap();
        let status = |c: &str| r.condition(c).map(|x| x.status);
        let cf2_radius_ok = cpt::pattern_equivariance_radius(&p, 2).radius().is_some_and(|x| x <= 2);
        let ok = r.rank == expected
            && r.recognition_gap_rank == expected
            && status("CF1") == Some(CfStatus::Pass)
            && status("CF2") == Some(CfStatus::Pass)
            && cf2_radius_ok
            && status("CF3") == Some(CfStatus::Pass)
            && status("CF4") == Some(CfStatus::ProxyPass)
            && status("CF5") == Some(CfStatus::ProxyPass);
        pass &= ok;
        let failed: Vec<String> = r
            .conditions
            .iter()
            .filter(|c| c.status == CfStatus::Fail)
            .map(|c| format!("{}: {}", c.condition, c.evidence))
            .collect();
        parts.push(format!(
            "{name} r={radius}: rank {} (expected {expected}), gap {}{}",
            r.rank,
            r.recognition_gap_rank,
            if failed.is_empty() { String::new() } else { format!(" [{}]", failed.join("; ")) }
        ));
    }
    outcome(pass, parts.join("; "))
}

fn spectral_values() -> Outcome {
    let m = SubstitutionMatrix::new("M", vec![vec![1, 1], vec![1, 0]]).unwrap();
    let l = perron_frobenius(&m).unwrap();
    let h = substitution_entropy(l).unwrap();
    let j_phi = j_cost(phi()).unwrap();
    let j_silver = j_cost(1.0 + 2f64.sqrt()).unwrap();
    let j_bronze = j_cost(2.0 + 3f64.sqrt()).unwrap();
    let rows = coherence_hierarchy(&builtin_systems()).unwrap();
    let names: Vec<&str> = rows.iter().map(|r| r.name.as_str()).collect();
    let order = names == ["Fibonacci", "Penrose", "Icosahedral", "Ammann-Beenker"]
        && (rows[0].lambda - rows[1].lambda).abs() <= 1e-12
        && (rows[1].lambda - rows[2].lambda).abs() <= 1e-12
        && rows[2].lambda < rows[3].lambda;
    outcome(
        (l - 1.6180339887).abs() <= 1e-9
            && (h - 0.4812118).abs() <= 1e-6
            && (j_phi - 0.1180339887).abs() <= 1e-9
            && (j_silver - 0.4142135624).abs() <= 1e-9
            && (j_bronze - 1.0).abs() <= 1e-12
            && order,
        format!("lambda {l:.10}, entropy {h:.7}, J(phi) {j_phi:.10}, J(1+sqrt2) {j_silver:.10}, J(2+sqrt3) {j_bronze:.12}, order {names:?}"),
    )
}

fn median_validate(t: &Tiling) -> Duration {
    let mut times: Vec<Duration> = (0..5)
        .map(|_| {
            let start = Instant::now();
            let r = validate(t).unwrap();
            assert!(r.valid);
            start.elapsed()
        })
        .collect();
    times.sort();
    times[2]
}

fn linearity() -> Outcome {
    let small = generate_pentagrid(&PentagridParams::regular(14.2)).unwrap();
    let large = generate_pentagrid(&PentagridParams::regular(20.1)).unwrap();
    let (ts, tl) = (median_validate(&small), median_validate(&large));
    let ratio = tl.as_secs_f64() / ts.as_secs_f64();
    let sizes_ok = (9_000..=11_000).contains(&small.edges.len()) && (18_000..=22_000).contains(&large.edges.len());
    outcome(
        ratio <= 3.0 && sizes_ok,
        format!(
            "{} edges: {:.2} ms, {} edges: {:.2} ms, ratio {ratio:.2}",
            small.edges.len(),
            ts.as_secs_f64() * 1e3,
            large.edges.len(),
            tl.as_secs_f64() * 1e3
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome, Duration); 10] = [
        ("toy potential", toy_potential, Duration::from_millis(1)),
        ("tile boundary sums", boundary_sums, Duration::from_secs(1)),
        ("four-way equivalence", four_way_equivalence, Duration::from_secs(30)),
        ("violation localisation", localisation, Duration::from_secs(10)),
        ("pentagrid reconstruction", pentagrid_reconstruction, Duration::from_secs(5)),
        ("cpt identities", cpt_identities, Duration::from_secs(10)),
        ("fibonacci chain", fibonacci_chain, Duration::from_secs(2)),
        ("conservation ranks", conservation_ranks, Duration::from_secs(60)),
        ("spectral values", spectral_values, Duration::from_millis(1)),
        ("validation linearity", linearity, Duration::from_secs(60)),
    ];
    let mut failed = 0;
    for (i, (name, check, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = check();
        let elapsed = start.elapsed();
        let in_budget = elapsed <= *budget;
        let pass = result.pass && in_budget;
        if !pass {
            failed += 1;
        }
        println!(
            "{} criterion {:>2} {name}: {} ({:.3} s, budget {:.3} s{})",
            if pass { "PASS" } else { "FAIL" },
            i + 1,
            result.detail,
            elapsed.as_secs_f64(),
            budget.as_secs_f64(),
            if in_budget { "" } else { ", over budget" }
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
