//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails. Pass criterion numbers as arguments to run a subset,
//! e.g. `cargo test --test acceptance -- 4 9`.

use std::collections::HashMap;
use std::process::ExitCode;
use std::time::Instant;

use tourplan::curves::{approximate, fit_segments, validate_pwl_error, Flavor};
use tourplan::domain::{CurveSpec, Edge, Instance, Poi, PoiId, Problem};
use tourplan::graph::{transitive_closure, GadgetKind};
use tourplan::instances::{fixture_t1, gen_grid, gen_random, CurveKind, GridSpec, RandomSpec};
use tourplan::model::{validate_assignment, BuildOptions, Role, RowFamily};
use tourplan::oracle::{oracle_bmt, oracle_rmt, oracle_rmt_with, oracle_solve, Allocator};
use tourplan::pipeline::{attainable_reward, plan, prepare, solve_prepared, Plan, PlanOptions};
use tourplan::solver::{export_model, import_model, matrix_fingerprint, solve_mip, EventKind, ExportFormat, MipStatus, SolveConfig, DEFAULT_THRESHOLDS};

type Check = Result<String, String>;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

fn options(eps: f64) -> PlanOptions {
    let mut o = PlanOptions { epsilon: eps, ..PlanOptions::default() };
    o.build.epsilon = eps;
    o
}

fn rmt_budget(n: usize) -> f64 {
    4.0 * (n as f64).sqrt()
}

fn bmt_requirement(inst: &Instance) -> f64 {
    (2.0 * (inst.n() as f64).sqrt()).min(0.9 * inst.total_max_reward())
}

// Same, but capped by what one tour can actually reach, so that every
// generated instance is feasible.
fn reachable_requirement(inst: &Instance) -> f64 {
    let closed = transitive_closure(inst);
    let attainable = attainable_reward(inst, &closed, &BuildOptions::default());
    (2.0 * (inst.n() as f64).sqrt()).min(0.9 * attainable)
}

fn random(n: usize, seed: u64, curve: CurveKind, single_base: bool) -> Instance {
    let spec = RandomSpec { curve, bases: single_base.then(|| vec![1]), ..RandomSpec::new(n, seed) };
    gen_random(&spec).expect("generator")
}

fn objective(inst: &Instance, p: &Plan) -> f64 {
    match inst.problem {
        Problem::Rmt { .. } => p.true_reward(),
        Problem::Bmt { .. } => p.total_time(),
    }
}

// 1. Exact agreement with the enumeration oracle on linear instances. Seeds
// whose requirement no single-base tour can meet are skipped.
fn oracle_equivalence() -> Check {
    let mut worst = 0.0f64;
    let (mut used, mut skipped, mut seed) = (0, 0, 100u64);
    while used < 50 {
        let n = 4 + (used % 4) as usize;
        let base = random(n, seed, CurveKind::Linear, true);
        seed += 1;
        let mr = bmt_requirement(&base);
        if mr > reachable_requirement(&base) / 0.9 {
            skipped += 1;
            continue;
        }
        for problem in [Problem::Rmt { budget: rmt_budget(n) }, Problem::Bmt { requirement: mr }] {
            let inst = base.clone().with_problem(problem);
            let exact = oracle_solve(&inst).map_err(|e| format!("seed {}: oracle failed: {e}", seed - 1))?.value;
            let p = plan(&inst, &options(0.05), &mut |_| {}).map_err(|e| format!("seed {}: solve failed: {e}", seed - 1))?;
            let got = objective(&inst, &p);
            let r = rel(got, exact);
            if r > 1e-6 {
                return Err(format!("seed {} {:?}: solve {got} oracle {exact}", seed - 1, problem.mode()));
            }
            worst = worst.max(r);
        }
        used += 1;
    }
    Ok(format!("50 instances ({skipped} infeasible seeds skipped), 100 solves, worst relative difference {worst:.2e}"))
}

fn exp_instances() -> Vec<Instance> {
    (0..25u64).map(|k| random(4 + (k % 3) as usize, 500 + k, CurveKind::Exponential, false)).collect()
}

// 2. RMT with band curves stays within the band ratio of the optimum.
fn rmt_band_ratio() -> Check {
    let eps = 0.1;
    let ratio = (1.0 + eps / 2.0) / (1.0 - eps / 2.0);
    let mut tightest = f64::INFINITY;
    for (k, base) in exp_instances().into_iter().enumerate() {
        let budget = rmt_budget(base.n());
        let inst = base.with_problem(Problem::Rmt { budget });
        let opts = options(eps);
        let prepared = prepare(&inst, &opts).map_err(|e| e.to_string())?;
        let band: Vec<CurveSpec> = prepared.curves.iter().cloned().map(CurveSpec::Pwl).collect();
        // Water-filling is exact for concave curves and at least as good as
        // any grid allocation; fall back to the grid otherwise.
        let alloc = if prepared.curves.iter().all(|c| c.is_concave()) { Allocator::Exact } else { Allocator::Grid(1e-3) };
        let reference = oracle_rmt_with(&inst, budget, &band, alloc).map_err(|e| e.to_string())?.value;
        let p = plan(&inst, &opts, &mut |_| {}).map_err(|e| format!("instance {k}: {e}"))?;
        let got = p.true_reward();
        if got + 1e-6 < reference / ratio {
            return Err(format!("instance {k}: reward {got} below {reference} / {ratio}"));
        }
        if p.total_time() > budget + 1e-6 {
            return Err(format!("instance {k}: time {} over budget {budget}", p.total_time()));
        }
        if reference > 0.0 {
            tightest = tightest.min(got * ratio / reference);
        }
    }
    Ok(format!("25 instances, smallest reward * ratio / reference = {tightest:.4}"))
}

// 3. BMT with upper curves meets (1 - eps) of the requirement in at most the
// optimal time.
fn bmt_upper() -> Check {
    let eps = 0.1;
    for (k, base) in exp_instances().into_iter().enumerate() {
        let mr = reachable_requirement(&base);
        let inst = base.with_problem(Problem::Bmt { requirement: mr });
        let exact = oracle_bmt(&inst, mr).map_err(|e| format!("instance {k}: oracle: {e}"))?.value;
        let p = plan(&inst, &options(eps), &mut |_| {}).map_err(|e| format!("instance {k}: {e}"))?;
        if p.true_reward() + 1e-9 < (1.0 - eps) * mr {
            return Err(format!("instance {k}: reward {} below {}", p.true_reward(), (1.0 - eps) * mr));
        }
        if p.total_time() > exact + 1e-6 {
            return Err(format!("instance {k}: time {} above optimal {exact}", p.total_time()));
        }
    }
    Ok("25 instances".into())
}

// 4. Band approximation error of exponential curves, and a four-piece fit.
fn approximation_quality() -> Check {
    let mut worst = 0.0f64;
    for k in 0..20 {
        let spec = CurveSpec::Exponential { rate: 1.0 + k as f64 / 20.0 };
        let pwl = approximate(&spec, 0.05, Flavor::Band).map_err(|e| e.to_string())?;
        let err = validate_pwl_error(&spec, &pwl, 10_000).map_err(|e| e.to_string())?;
        if err > 0.05 {
            return Err(format!("rate {}: error {err}", 1.0 + k as f64 / 20.0));
        }
        worst = worst.max(err);
    }
    let spec = CurveSpec::Exponential { rate: 1.0 };
    let (fit, err) = fit_segments(&spec, 4, 1).map_err(|e| e.to_string())?;
    let err = err.max(validate_pwl_error(&spec, &fit, 10_000).map_err(|e| e.to_string())?);
    if fit.segment_count() > 4 || err >= 0.05 {
        return Err(format!("{}-segment fit has error {err}", fit.segment_count()));
    }
    Ok(format!("worst band error {worst:.4}, {}-segment fit error {err:.4}", fit.segment_count()))
}

// 5. Event log of the 4 x 5 grid and a closed gap within ten minutes.
fn anytime_grid() -> Check {
    let inst = gen_grid(&GridSpec::new(4, 5, 7)).map_err(|e| e.to_string())?;
    let opts = PlanOptions::default();
    let prepared = prepare(&inst, &opts).map_err(|e| e.to_string())?;
    let config = SolveConfig { time_limit: Some(600.0), ..SolveConfig::default() };
    let start = Instant::now();
    let p = solve_prepared(&inst, &prepared, &config, &mut |_| {}).map_err(|e| e.to_string())?;
    let secs = start.elapsed().as_secs_f64();
    let events = &p.result.events;
    if events.windows(2).any(|w| w[1].gap > w[0].gap) {
        return Err("gap increased between events".into());
    }
    let crossed: Vec<f64> = events
        .iter()
        .filter_map(|e| match e.kind {
            EventKind::ThresholdCrossed(t) => Some(t),
            _ => None,
        })
        .collect();
    if crossed != DEFAULT_THRESHOLDS {
        return Err(format!("thresholds crossed {crossed:?}"));
    }
    let mut incumbents = 0;
    for e in events.iter().filter(|e| e.kind == EventKind::NewIncumbent) {
        let a = e.assignment.as_ref().ok_or("incumbent event without assignment")?;
        let v = validate_assignment(&inst, &prepared.model, a);
        if !v.is_empty() {
            return Err(format!("incumbent at {:.2}s invalid: {v:?}", e.elapsed));
        }
        incumbents += 1;
    }
    if p.result.status != MipStatus::Optimal || p.result.gap > 0.0 {
        return Err(format!("status {:?}, gap {} after {secs:.1}s", p.result.status, p.result.gap));
    }
    Ok(format!("gap 0 in {secs:.1}s, {} nodes, {incumbents} incumbents validated", p.result.nodes))
}

// 6. BMT at the RMT optimum needs no more than the RMT budget.
fn duality() -> Check {
    for k in 0..20u64 {
        let n = 4 + (k % 3) as usize;
        let base = random(n, 900 + k, CurveKind::Linear, false);
        let mt = rmt_budget(n);
        let r = plan(&base.clone().with_problem(Problem::Rmt { budget: mt }), &options(0.05), &mut |_| {})
            .map_err(|e| format!("instance {k}: {e}"))?;
        let mr = r.true_reward();
        let b = plan(&base.with_problem(Problem::Bmt { requirement: mr }), &options(0.05), &mut |_| {})
            .map_err(|e| format!("instance {k} (requirement {mr}): {e}"))?;
        if b.total_time() > mt + 1e-6 || b.true_reward() < mr - 1e-6 {
            return Err(format!("instance {k}: time {} (budget {mt}), reward {} (required {mr})", b.total_time(), b.true_reward()));
        }
    }
    Ok("20 instances".into())
}

fn cycles(model: &tourplan::model::MipModel, values: &[f64]) -> usize {
    let mut next: HashMap<PoiId, PoiId> = HashMap::new();
    for (j, role) in model.roles().iter().enumerate() {
        if let Role::EdgeUse { from, to, tour: None } = *role {
            if values[j] > 0.5 {
                next.insert(from, to);
            }
        }
    }
    let mut seen = std::collections::HashSet::new();
    let mut count = 0;
    for &s in next.keys() {
        if seen.contains(&s) {
            continue;
        }
        count += 1;
        let mut v = s;
        while seen.insert(v) {
            v = next[&v];
        }
    }
    count
}

// A base cluster {1, 2, 3} and a rich triangle {4, 5, 6} out of reach.
fn two_clusters() -> Instance {
    let poi = |id, r| Poi { id, name: None, max_reward: r, curve: CurveSpec::Linear { rate: 1.0 } };
    let pois = vec![poi(1, 0.0), poi(2, 1.0), poi(3, 1.0), poi(4, 10.0), poi(5, 10.0), poi(6, 10.0)];
    let mut edges = Vec::new();
    for (a, b, d) in [(1, 2, 1.0), (2, 3, 1.0), (1, 3, 1.0), (4, 5, 1.0), (5, 6, 1.0), (4, 6, 1.0), (3, 4, 20.0)] {
        edges.push(Edge { from: a, to: b, length: d });
        edges.push(Edge { from: b, to: a, length: d });
    }
    Instance::new(pois, vec![1], edges, Problem::Rmt { budget: 11.0 }).expect("valid")
}

// 7. Dropping the order rows lets a detached cycle appear.
fn subtour_control() -> Check {
    let inst = two_clusters();
    let prepared = prepare(&inst, &PlanOptions::default()).map_err(|e| e.to_string())?;
    let config = SolveConfig::default();
    let full = solve_mip(&prepared.model, &config, &mut |_| {}).map_err(|e| e.to_string())?;
    let relaxed_model = prepared.model.without_family(RowFamily::SubTour);
    let relaxed = solve_mip(&relaxed_model, &config, &mut |_| {}).map_err(|e| e.to_string())?;
    let (Some(fv), Some(rv)) = (&full.values, &relaxed.values) else {
        return Err("missing solution".into());
    };
    let (cf, cr) = (cycles(&prepared.model, fv), cycles(&relaxed_model, rv));
    if full.gap > 0.0 || relaxed.gap > 0.0 || cf != 1 || cr < 2 {
        return Err(format!("full model {cf} cycle(s), without order rows {cr}"));
    }
    Ok(format!("full model 1 cycle (objective {:.3}), without order rows {cr} cycles (objective {:.3})", full.objective.unwrap_or(0.0), relaxed.objective.unwrap_or(0.0)))
}

// T1 plus base 4 hanging off v3.
fn t1_two_bases() -> Instance {
    let t1 = fixture_t1(Problem::Rmt { budget: 6.0 });
    let mut pois = t1.pois().to_vec();
    pois.push(Poi { id: 4, name: Some("v4".into()), max_reward: 0.0, curve: CurveSpec::Linear { rate: 1.0 } });
    let mut edges = t1.edges().to_vec();
    edges.push(Edge { from: 3, to: 4, length: 0.5 });
    edges.push(Edge { from: 4, to: 3, length: 0.5 });
    Instance::new(pois, vec![1, 4], edges, t1.problem).expect("valid")
}

// 8. The multi-base gadget picks the oracle's base through one origin edge.
fn multi_base() -> Check {
    let inst = t1_two_bases();
    let budget = inst.problem.value();
    let o = oracle_rmt(&inst, budget).map_err(|e| e.to_string())?;
    let prepared = prepare(&inst, &PlanOptions::default()).map_err(|e| e.to_string())?;
    let p = solve_prepared(&inst, &prepared, &SolveConfig::default(), &mut |_| {}).map_err(|e| e.to_string())?;
    let values = p.result.values.as_ref().ok_or("no solution")?;
    let origin_out: Vec<PoiId> = prepared
        .model
        .roles()
        .iter()
        .enumerate()
        .filter_map(|(j, r)| match *r {
            Role::Gadget { base, kind: GadgetKind::OriginOut } if values[j] > 0.5 => Some(base),
            _ => None,
        })
        .collect();
    let start = p.itinerary().start_base;
    if start != o.itinerary.start_base || origin_out != vec![start] || rel(p.true_reward(), o.value) > 1e-6 || p.result.gap > 0.0 {
        return Err(format!(
            "start {start} (oracle {}), origin edges at {origin_out:?}, reward {} (oracle {})",
            o.itinerary.start_base,
            p.true_reward(),
            o.value
        ));
    }
    Ok(format!("both start at base {start}, reward {}", o.value))
}

// 9. Export, re-import, compare matrices and optimal values.
fn export_fidelity() -> Check {
    let config = SolveConfig::default();
    for k in 0..20u64 {
        let n = 4 + (k % 3) as usize;
        let base = random(n, 1300 + k, if k % 2 == 0 { CurveKind::Linear } else { CurveKind::Exponential }, false);
        let inst = if k % 4 < 2 {
            base.with_problem(Problem::Rmt { budget: rmt_budget(n) })
        } else {
            let mr = reachable_requirement(&base);
            base.with_problem(Problem::Bmt { requirement: mr })
        };
        let model = prepare(&inst, &PlanOptions::default()).map_err(|e| e.to_string())?.model;
        let original = solve_mip(&model, &config, &mut |_| {}).map_err(|e| e.to_string())?;
        let ov = original.objective.ok_or(format!("model {k}: no solution"))?;
        for format in [ExportFormat::MpsFree, ExportFormat::LpText] {
            let text = export_model(&model, format).map_err(|e| e.to_string())?;
            let back = import_model(&text, format).map_err(|e| format!("model {k} {format:?}: {e}"))?;
            if matrix_fingerprint(&back) != matrix_fingerprint(&model) {
                return Err(format!("model {k} {format:?}: matrix differs after round trip"));
            }
            let r = solve_mip(&back, &config, &mut |_| {}).map_err(|e| e.to_string())?;
            let v = r.objective.ok_or(format!("model {k} {format:?}: no solution"))?;
            if rel(v, ov) > 1e-9 {
                return Err(format!("model {k} {format:?}: objective {v} vs {ov}"));
            }
        }
    }
    Ok("20 models, MPS and LP".into())
}

fn main() -> ExitCode {
    let criteria: [(u32, &str, fn() -> Check); 9] = [
        (1, "oracle equivalence", oracle_equivalence),
        (2, "RMT band ratio", rmt_band_ratio),
        (3, "BMT upper approximation", bmt_upper),
        (4, "approximation quality", approximation_quality),
        (5, "anytime contract on 4x5 grid", anytime_grid),
        (6, "RMT/BMT duality", duality),
        (7, "sub-tour negative control", subtour_control),
        (8, "multi-base start", multi_base),
        (9, "export fidelity", export_fidelity),
    ];
    let only: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (id, name, check) in criteria {
        if !only.is_empty() && !only.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {id} {name}: {detail} [{secs:.1}s]"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {id} {name}: {detail} [{secs:.1}s]");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
