//! Acceptance criteria, one pass/fail line each. Exits non-zero when any
//! criterion fails.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{filter_edges, random_closed, random_program, random_zone};
use zone_slicer::engine::{run_fixpoint, slices_for, step_delta, PointKind};
use zone_slicer::harness::report::{compare_corpus, TargetDomain, DEFAULT_BOX};
use zone_slicer::harness::{analyze_path, corpus_files, ProgramAnalysis};
use zone_slicer::ir::{build_cfg, parse_program, Stmt};
use zone_slicer::minimizer::{
    changed_sources, min_changed_set, node_neighbors_arbitrary, node_neighbors_closed,
    remove_redundant, remove_spurious,
};
use zone_slicer::{Bound, DeltaSet, MinMethod, NeighborVariant, VarId, ZoneState};

type Verdict = Result<String, String>;

fn manifest_path(rel: &str) -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join(rel)
}

fn ids(pairs: &[(usize, usize)]) -> BTreeSet<(VarId, VarId)> {
    pairs.iter().map(|&(s, t)| (VarId(s), VarId(t))).collect()
}

fn fig1_golden_path() -> Verdict {
    let start = Instant::now();
    let src =
        std::fs::read_to_string(manifest_path("examples/fig1.tir")).map_err(|e| e.to_string())?;
    let cfg = build_cfg(&parse_program(&src).map_err(|e| e.to_string())?);
    let analysis = run_fixpoint::<ZoneState>(&cfg).map_err(|e| e.to_string())?;
    let point = analysis
        .points
        .iter()
        .find(|p| matches!(p.kind, PointKind::Edge { .. }) && p.label.ends_with("assume y <= x"))
        .ok_or("no point for the inner branch")?;
    let state = point.post.close();
    let (x, w, y) = (1, 2, 3);
    let expected: BTreeMap<(VarId, VarId), i64> = [
        ((x, 0), 0),
        ((0, x), 0),
        ((w, x), 2),
        ((y, x), 0),
        ((w, 0), 2),
        ((y, 0), 0),
    ]
    .iter()
    .map(|&((s, t), b)| ((VarId(s), VarId(t)), b))
    .collect();
    let actual: BTreeMap<_, _> = state.finite_edges().map(|(s, t, b)| ((s, t), b)).collect();
    if actual != expected {
        return Err(format!("closed state differs:\n{}", state.dump()));
    }
    let before: BTreeSet<_> = common::edge_ids(&state).into_iter().collect();
    let after: BTreeSet<_> = common::edge_ids(&remove_spurious(&state))
        .into_iter()
        .collect();
    let removed: BTreeSet<_> = before.difference(&after).copied().collect();
    if removed != ids(&[(y, x), (w, x)]) {
        return Err(format!("remove_spurious removed {removed:?}"));
    }
    let delta = DeltaSet {
        dv: [VarId(y)].into(),
        de: ids(&[(y, x)]),
    };
    let want_edges: BTreeMap<_, _> = [((VarId(y), VarId(0)), 0)].into();
    let want_vars: BTreeSet<_> = [VarId(y)].into();
    for method in [MinMethod::Mn, MinMethod::Nn, MinMethod::Cc] {
        let slice = min_changed_set(&state, &delta, method).map_err(|e| e.to_string())?;
        if slice.vars != want_vars || slice.edges != want_edges {
            return Err(format!("{method} slice is {slice:?}"));
        }
    }
    let engine_delta = step_delta(point).map_err(|e| e.to_string())?;
    let slices = slices_for(&point.post, &engine_delta, NeighborVariant::Closed)
        .map_err(|e| e.to_string())?;
    let mn = slices.mn.ok_or("engine produced no MN slice")?;
    if mn.vars != want_vars || mn.edges != want_edges {
        return Err(format!("engine MN slice is {mn:?}"));
    }
    let elapsed = start.elapsed();
    if elapsed >= Duration::from_secs(1) {
        return Err(format!("took {elapsed:?}"));
    }
    Ok(format!(
        "closed state, removal set and slices match in {elapsed:?}"
    ))
}

fn reductions_preserve_semantics() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    const STATES: usize = 500;
    for i in 0..STATES {
        let n = rng.gen_range(1..=4);
        let closed = random_closed(&mut rng, n, 8);
        let reference = closed.enumerate_box(10).map_err(|e| e.to_string())?;
        for (name, reduced) in [
            ("remove_spurious", remove_spurious(&closed)),
            ("larsen_reduce", remove_redundant(&closed)),
        ] {
            if reduced.enumerate_box(10).map_err(|e| e.to_string())? != reference {
                return Err(format!("{name} changed state {i}:\n{}", closed.dump()));
            }
        }
    }
    Ok(format!("{STATES} closed states, box 10"))
}

#[derive(Default)]
struct Tally {
    checked: usize,
    failed: usize,
}

fn step_kind(kind: PointKind, step: &Stmt) -> &'static str {
    match (kind, step) {
        (PointKind::Edge { .. }, _) | (_, Stmt::Assume(_)) => "assume",
        (_, Stmt::Assign(..)) => "assign",
        _ => "other",
    }
}

fn slice_complement_is_unchanged() -> Verdict {
    const STEPS: usize = 300;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut tallies: BTreeMap<&str, Tally> = BTreeMap::new();
    let mut untightened = 0;
    let mut first_failure = None;
    let mut steps = 0;
    let mut programs = 0;
    while steps < STEPS {
        let nvars = rng.gen_range(2..=3);
        let src = random_program(&mut rng, nvars);
        let cfg = build_cfg(&parse_program(&src).map_err(|e| format!("{e}\n{src}"))?);
        let analysis = run_fixpoint::<ZoneState>(&cfg).map_err(|e| e.to_string())?;
        programs += 1;
        for point in &analysis.points {
            if matches!(point.kind, PointKind::Merge { .. }) {
                continue;
            }
            let pre = point.pre.close();
            let post = point.post.close();
            if pre.is_bottom() || post.is_bottom() {
                continue;
            }
            let delta = step_delta(point).map_err(|e| e.to_string())?;
            let slices =
                slices_for(&post, &delta, NeighborVariant::Closed).map_err(|e| e.to_string())?;
            let n1 = remove_spurious(&pre);
            let n2 = remove_spurious(&post);
            let bound = 4.max(1 + n1.max_abs_constant().max(n2.max_abs_constant()));
            if bound > 12 {
                continue;
            }
            steps += 1;
            let tally = tallies
                .entry(step_kind(point.kind, &point.step))
                .or_default();
            for method in [MinMethod::Cc, MinMethod::Nn, MinMethod::Mn] {
                let Some(slice) = slices.get(method) else {
                    continue;
                };
                let s = slice.edge_ids();
                let outside1 = filter_edges(&n1, |a, b| !s.contains(&(a, b)));
                let outside2 = filter_edges(&n2, |a, b| !s.contains(&(a, b)));
                let same = outside1.enumerate_box(bound).map_err(|e| e.to_string())?
                    == outside2.enumerate_box(bound).map_err(|e| e.to_string())?;
                let tightened_inside = delta.de.iter().all(|&(a, b)| {
                    let now = n2.get(a, b);
                    !(now.is_finite() && now < pre.get(a, b)) || s.contains(&(a, b))
                });
                if !tightened_inside {
                    untightened += 1;
                }
                tally.checked += 1;
                if !(same && tightened_inside) {
                    tally.failed += 1;
                    first_failure.get_or_insert_with(|| format!("{method} at {}", point.label));
                }
            }
        }
    }
    let summary = tallies
        .iter()
        .filter(|(_, t)| t.checked > 0)
        .map(|(k, t)| format!("{k} {}/{} failed", t.failed, t.checked))
        .collect::<Vec<_>>()
        .join(", ");
    let failed: usize = tallies.values().map(|t| t.failed).sum();
    let detail = format!(
        "{steps} steps from {programs} programs; {summary}; tightened-edge violations {untightened}"
    );
    match failed {
        0 => Ok(detail),
        _ => Err(format!(
            "{detail}; first: {}",
            first_failure.unwrap_or_default()
        )),
    }
}

fn load_corpus() -> Result<Vec<ProgramAnalysis>, String> {
    corpus_files(&manifest_path("corpus"))
        .map_err(|e| e.to_string())?
        .iter()
        .map(|p| analyze_path(p).map_err(|e| e.to_string()))
        .collect()
}

fn slices_are_nested() -> Verdict {
    let programs = load_corpus()?;
    let mut points = 0;
    for p in &programs {
        for (i, step) in p.steps.iter().enumerate() {
            let fs = step.slices.fs.edge_ids();
            let chain = [&step.slices.cc, &step.slices.nn, &step.slices.mn];
            let mut outer = fs;
            for slice in chain.iter().copied().flatten() {
                let inner = slice.edge_ids();
                if !inner.is_subset(&outer) {
                    return Err(format!("{} point {i}: slices not nested", p.name));
                }
                outer = inner;
            }
            points += 1;
        }
    }
    let report = compare_corpus(
        "corpus",
        &programs,
        &[MinMethod::Fs, MinMethod::Cc],
        &[],
        DEFAULT_BOX,
    )
    .report;
    let cc = report
        .rows
        .iter()
        .find(|r| r.method == MinMethod::Cc)
        .ok_or("no CC row")?;
    if cc.var_reduction_pct <= 0.0 {
        return Err(format!(
            "CC variable reduction {:.2}%",
            cc.var_reduction_pct
        ));
    }
    Ok(format!(
        "{points} steps nested; CC vs FS variable reduction {:.2}%",
        cc.var_reduction_pct
    ))
}

fn free_target_stays_out() -> Verdict {
    const INSTANCES: usize = 1000;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut found = 0;
    let mut in_final_slice = 0;
    while found < INSTANCES {
        let n = rng.gen_range(2..=4);
        let n1 = random_closed(&mut rng, n, 8);
        let s = VarId(rng.gen_range(1..=n));
        let t = VarId(rng.gen_range(1..=n));
        if s == t {
            continue;
        }
        let c = rng.gen_range(-8..=8);
        let (n2, delta) = n1
            .meet_edge(s, t, Bound::Finite(c))
            .map_err(|e| e.to_string())?;
        if n2.is_bottom() || delta.de.is_empty() {
            continue;
        }
        let g = remove_spurious(&n2);
        if g.get(t, s).is_finite() || g.get(VarId::ZERO, s).is_finite() {
            continue;
        }
        found += 1;
        if changed_sources(&delta.de).contains(&t) {
            return Err(format!("{t:?} selected as a changed source"));
        }
        let zero = VarId::ZERO;
        if n1.get(t, zero) != n2.get(t, zero) || n1.get(zero, t) != n2.get(zero, t) {
            return Err(format!("interval of the target moved:\n{}", n1.dump()));
        }
        let mn = min_changed_set(&n2, &delta, MinMethod::Mn).map_err(|e| e.to_string())?;
        if mn.vars.contains(&t) {
            in_final_slice += 1;
        }
    }
    Ok(format!(
        "{INSTANCES} instances; target never a changed source and its interval never moved \
         (reached as a neighbor of the source in {in_final_slice})"
    ))
}

fn neighbor_variants_agree() -> Verdict {
    const STATES: usize = 300;
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut mismatches = 0;
    let mut example = None;
    for _ in 0..STATES {
        let n = rng.gen_range(1..=4);
        let g = remove_spurious(&random_closed(&mut rng, n, 8));
        let seed = VarId(rng.gen_range(1..=n));
        let dv: BTreeSet<VarId> = (1..=n)
            .filter(|_| rng.gen_bool(0.4))
            .map(VarId)
            .chain([seed])
            .collect();
        let closed = node_neighbors_closed(&g, &dv).map_err(|e| e.to_string())?;
        let arbitrary = node_neighbors_arbitrary(&g, &dv).map_err(|e| e.to_string())?;
        if closed != arbitrary {
            mismatches += 1;
            example.get_or_insert_with(|| g.dump());
        }
    }
    match mismatches {
        0 => Ok(format!("{STATES} closed, spurious-reduced states")),
        _ => Err(format!(
            "{mismatches}/{STATES} states differ; first:\n{}",
            example.unwrap_or_default()
        )),
    }
}

fn corpus_precision() -> Verdict {
    let start = Instant::now();
    let files = corpus_files(&manifest_path("corpus")).map_err(|e| e.to_string())?;
    let programs = load_corpus()?;
    let points: usize = programs.iter().map(|p| p.zones.points.len()).sum();
    let methods = [MinMethod::Fs, MinMethod::Cc];
    let targets = [TargetDomain::Intervals, TargetDomain::Predicates];
    let first = compare_corpus("corpus", &programs, &methods, &targets, DEFAULT_BOX).report;
    let again = compare_corpus("corpus", &load_corpus()?, &methods, &targets, DEFAULT_BOX).report;
    let elapsed = start.elapsed();
    if first.without_timings().to_json() != again.without_timings().to_json() {
        return Err("reports differ between runs".into());
    }
    if files.len() < 15 || points < 120 {
        return Err(format!(
            "corpus too small: {} programs, {points} points",
            files.len()
        ));
    }
    let row = |m: MinMethod| first.rows.iter().find(|r| r.method == m).unwrap();
    let (fs, cc) = (row(MinMethod::Fs), row(MinMethod::Cc));
    let (fs_pred, cc_pred) = (fs.vs_predicates.unwrap(), cc.vs_predicates.unwrap());
    let (fs_itv, cc_itv) = (fs.vs_intervals.unwrap(), cc.vs_intervals.unwrap());
    let detail = format!(
        "{} programs, {points} points; predicates incomparable CC {} vs FS {}; \
         intervals equal CC {} vs FS {}; {elapsed:.2?}",
        files.len(),
        cc_pred.incomparable,
        fs_pred.incomparable,
        cc_itv.equal,
        fs_itv.equal
    );
    let ok = 4 * cc_pred.incomparable <= fs_pred.incomparable
        && cc_itv.equal >= fs_itv.equal
        && elapsed < Duration::from_secs(60);
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// Bellman-Ford from every source over the raw entries; `None` on a
/// negative cycle.
fn apsp_oracle(z: &ZoneState) -> Option<Vec<Vec<Option<i64>>>> {
    let n = z.dim();
    let weight = |s: usize, t: usize| z.get(VarId(s), VarId(t)).finite();
    let mut all = Vec::with_capacity(n);
    for src in 0..n {
        let mut dist: Vec<Option<i64>> = vec![None; n];
        dist[src] = Some(0);
        for round in 0..=n {
            let mut changed = false;
            for u in 0..n {
                let Some(du) = dist[u] else { continue };
                for v in 0..n {
                    if u == v {
                        continue;
                    }
                    if let Some(w) = weight(u, v) {
                        if dist[v].map_or(true, |dv| du + w < dv) {
                            dist[v] = Some(du + w);
                            changed = true;
                        }
                    }
                }
            }
            if !changed {
                break;
            }
            if round == n {
                return None;
            }
        }
        if dist[src] != Some(0) {
            return None;
        }
        all.push(dist);
    }
    Some(all)
}

fn closure_matches_oracle() -> Verdict {
    const STATES: usize = 500;
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut bottoms = 0;
    for i in 0..STATES {
        let n = rng.gen_range(1..=5);
        let density = rng.gen_range(0.1..0.7);
        let raw = random_zone(&mut rng, n, density, 8);
        let closed = raw.close();
        match apsp_oracle(&raw) {
            None => {
                bottoms += 1;
                if !closed.is_bottom() {
                    return Err(format!("state {i}: oracle finds a negative cycle"));
                }
            }
            Some(dist) => {
                if closed.is_bottom() {
                    return Err(format!("state {i}: close reports Bottom"));
                }
                for (s, row) in dist.iter().enumerate() {
                    for (t, &d) in row.iter().enumerate() {
                        if s != t && closed.get(VarId(s), VarId(t)).finite() != d {
                            return Err(format!("state {i}: entry ({s},{t}) differs"));
                        }
                    }
                }
            }
        }
    }
    if bottoms == 0 {
        return Err("no Bottom states generated".into());
    }
    Ok(format!("{STATES} states, {bottoms} Bottom"))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Verdict); 8] = [
        ("1 golden path", fig1_golden_path),
        (
            "2 reductions preserve concretization",
            reductions_preserve_semantics,
        ),
        (
            "3 slice complement unchanged",
            slice_complement_is_unchanged,
        ),
        ("4 slices nested", slices_are_nested),
        ("5 free target excluded", free_target_stays_out),
        ("6 neighbor variants agree", neighbor_variants_agree),
        ("7 corpus precision", corpus_precision),
        ("8 closure oracle", closure_matches_oracle),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        match run() {
            Ok(detail) => println!("criterion {name}: PASS ({detail})"),
            Err(detail) => {
                failed += 1;
                println!("criterion {name}: FAIL ({detail})");
            }
        }
    }
    println!("{} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
