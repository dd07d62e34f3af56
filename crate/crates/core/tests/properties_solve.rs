//! Invariants of the model, the branch-and-bound event stream and the oracle.

use std::collections::HashMap;

use proptest::prelude::*;

use tourplan::domain::{CurveSpec, Edge, Instance, Poi, PoiId, Problem};
use tourplan::instances::{fixture_t1, gen_random, CurveKind, RandomSpec};
use tourplan::model::{validate_assignment, Role, RowFamily};
use tourplan::oracle::{oracle_allocate, oracle_bmt, oracle_rmt, AllocItem};
use tourplan::pipeline::{prepare, solve_prepared, PlanOptions};
use tourplan::solver::{solve_mip, EventKind, SolveConfig, SolveEvent};

fn random_instance(n: usize, seed: u64, exp: bool, rmt: bool) -> Instance {
    let curve = if exp { CurveKind::Exponential } else { CurveKind::Linear };
    let inst = gen_random(&RandomSpec { curve, ..RandomSpec::new(n, seed) }).unwrap();
    if rmt {
        inst
    } else {
        // Half of the cheapest single stay keeps every instance feasible.
        let r = inst.pois().iter().map(|p| p.max_reward).fold(f64::INFINITY, f64::min);
        inst.with_problem(Problem::Bmt { requirement: 0.5 * r })
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn solutions_decode_to_one_tour_and_agree_with_the_model(
        n in 3usize..7,
        seed in 0u64..5000,
        exp in any::<bool>(),
        rmt in any::<bool>(),
    ) {
        let inst = random_instance(n, seed, exp, rmt);
        let prepared = prepare(&inst, &PlanOptions::default()).unwrap();
        let mut events = Vec::new();
        let plan = solve_prepared(&inst, &prepared, &SolveConfig::default(), &mut |e| events.push(e.clone())).unwrap();
        let values = plan.result.values.as_ref().unwrap();
        let model = &prepared.model;

        // One closed walk through one base, each POI stayed at most once.
        let it = plan.itinerary();
        prop_assert!(inst.is_base(it.start_base));
        prop_assert_eq!(it.walk.first(), Some(&it.start_base));
        prop_assert_eq!(it.walk.last(), Some(&it.start_base));
        let mut seen: Vec<PoiId> = it.stays.iter().map(|s| s.poi).collect();
        seen.sort();
        seen.dedup();
        prop_assert_eq!(seen.len(), it.stays.len());

        // Reward variables against the approximated curves at the decoded stays.
        let durations: HashMap<PoiId, f64> = it.stays.iter().map(|s| (s.poi, s.duration)).collect();
        let mut w_total = 0.0;
        let mut pwl_total = 0.0;
        for (j, role) in model.roles().iter().enumerate() {
            if let Role::Reward { poi } = *role {
                w_total += values[j];
                let t = durations.get(&poi).copied().unwrap_or(0.0);
                pwl_total += inst.poi(poi).max_reward * prepared.curves[poi - 1].eval(t);
            }
        }
        prop_assert!(w_total <= pwl_total + 1e-6, "model reward {w_total} above curve reward {pwl_total}");
        match inst.problem {
            Problem::Rmt { budget } => {
                prop_assert!((model.objective_value(values) - w_total).abs() <= 1e-6);
                prop_assert!(it.total_time <= budget + 1e-6);
            }
            Problem::Bmt { requirement } => {
                prop_assert!((model.objective_value(values) - it.total_time).abs() <= 1e-6);
                prop_assert!(w_total >= requirement - 1e-6);
            }
        }

        check_events(&inst, model, &events, rmt)?;
    }
}

fn check_events(inst: &Instance, model: &tourplan::model::MipModel, events: &[SolveEvent], maximize: bool) -> Result<(), TestCaseError> {
    prop_assert_eq!(events.iter().filter(|e| e.kind == EventKind::Done).count(), 1);
    prop_assert_eq!(events.last().map(|e| e.kind), Some(EventKind::Done));
    let mut last_inc: Option<f64> = None;
    for (k, e) in events.iter().enumerate() {
        if k > 0 {
            prop_assert!(e.gap <= events[k - 1].gap);
        }
        if let Some(inc) = e.incumbent {
            if maximize {
                prop_assert!(e.bound >= inc - 1e-6, "bound {} below incumbent {inc}", e.bound);
            } else {
                prop_assert!(e.bound <= inc + 1e-6, "bound {} above incumbent {inc}", e.bound);
            }
            if let Some(prev) = last_inc {
                let improves = if maximize { inc >= prev - 1e-9 } else { inc <= prev + 1e-9 };
                prop_assert!(improves, "incumbent went from {prev} to {inc}");
            }
            last_inc = Some(inc);
        }
        if e.kind == EventKind::NewIncumbent {
            let a = e.assignment.as_ref().expect("incumbent events carry the assignment");
            let v = validate_assignment(inst, model, a);
            prop_assert!(v.is_empty(), "{v:?}");
        }
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn deterministic_runs_repeat(n in 4usize..7, seed in 0u64..5000, rmt in any::<bool>()) {
        let inst = random_instance(n, seed, false, rmt);
        let prepared = prepare(&inst, &PlanOptions::default()).unwrap();
        let config = SolveConfig { deterministic: true, threads: 1, ..SolveConfig::default() };
        let run = || {
            let r = solve_mip(&prepared.model, &config, &mut |_| {}).unwrap();
            r.events.into_iter().map(|e| (e.kind, e.incumbent, e.bound, e.gap, e.assignment)).collect::<Vec<_>>()
        };
        prop_assert_eq!(run(), run());
    }

    #[test]
    fn rmt_bmt_duality_in_the_oracle(n in 3usize..7, seed in 0u64..5000) {
        let inst = random_instance(n, seed, false, true);
        let mt = inst.problem.value();
        let jr = oracle_rmt(&inst, mt).unwrap().value;
        let jt = oracle_bmt(&inst, jr).unwrap().value;
        prop_assert!(jt <= mt + 1e-9, "time {jt} for reward {jr} exceeds budget {mt}");
    }

    #[test]
    fn oracle_rmt_is_monotone_in_budget(n in 3usize..7, seed in 0u64..5000, b1 in 0.0f64..12.0, b2 in 0.0f64..12.0) {
        let inst = random_instance(n, seed, true, true);
        let (lo, hi) = (b1.min(b2), b1.max(b2));
        prop_assert!(oracle_rmt(&inst, lo).unwrap().value <= oracle_rmt(&inst, hi).unwrap().value + 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn greedy_allocation_is_a_local_optimum(
        items in prop::collection::vec((0.5f64..3.0, 0.2f64..3.0, any::<bool>()), 1..6),
        available in 0.0f64..6.0,
    ) {
        let specs: Vec<CurveSpec> = items
            .iter()
            .map(|&(_, rate, exp)| if exp { CurveSpec::Exponential { rate } } else { CurveSpec::Linear { rate } })
            .collect();
        let alloc: Vec<AllocItem> = items
            .iter()
            .zip(&specs)
            .enumerate()
            .map(|(k, (&(reward, _, _), curve))| AllocItem { poi: k + 1, reward, curve })
            .collect();
        let a = oracle_allocate(&alloc, available).unwrap();
        let value = |d: &[f64]| -> f64 { alloc.iter().zip(d).map(|(i, &t)| i.reward * i.curve.eval(t).unwrap()).sum() };
        let base = value(&a.durations);
        let h = 1e-4;
        for i in 0..alloc.len() {
            for j in 0..alloc.len() {
                if i == j || a.durations[j] < h {
                    continue;
                }
                let mut d = a.durations.clone();
                d[i] += h;
                d[j] -= h;
                prop_assert!(value(&d) <= base + 1e-12, "moving time from {j} to {i} helps");
            }
        }
    }
}

#[test]
fn oracle_duality_on_t1() {
    for budget in [0.0, 2.0, 4.5, 6.0, 8.0, 10.0, 12.0] {
        let inst = fixture_t1(Problem::Rmt { budget });
        let jr = oracle_rmt(&inst, budget).unwrap().value;
        assert!(oracle_bmt(&inst, jr).unwrap().value <= budget + 1e-9);
    }
}

// Base 1 with a neighbour; a valuable triangle far away.
fn detached_triangle() -> Instance {
    let poi = |id, r| Poi { id, name: None, max_reward: r, curve: CurveSpec::Linear { rate: 1.0 } };
    let pois = vec![poi(1, 0.0), poi(2, 1.0), poi(3, 5.0), poi(4, 5.0), poi(5, 5.0)];
    let mut edges = Vec::new();
    for (a, b, d) in [(1, 2, 1.0), (3, 4, 1.0), (4, 5, 1.0), (3, 5, 1.0), (2, 3, 30.0)] {
        edges.push(Edge { from: a, to: b, length: d });
        edges.push(Edge { from: b, to: a, length: d });
    }
    Instance::new(pois, vec![1], edges, Problem::Rmt { budget: 10.0 }).unwrap()
}

fn successor_cycles(model: &tourplan::model::MipModel, values: &[f64]) -> usize {
    let next: HashMap<PoiId, PoiId> = model
        .roles()
        .iter()
        .enumerate()
        .filter_map(|(j, r)| match *r {
            Role::EdgeUse { from, to, tour: None } if values[j] > 0.5 => Some((from, to)),
            _ => None,
        })
        .collect();
    let mut seen = std::collections::HashSet::new();
    let mut count = 0;
    for &s in next.keys() {
        if seen.insert(s) {
            count += 1;
            let mut v = next[&s];
            while seen.insert(v) {
                v = next[&v];
            }
        }
    }
    count
}

#[test]
fn order_rows_are_what_keeps_one_cycle() {
    let inst = detached_triangle();
    let prepared = prepare(&inst, &PlanOptions::default()).unwrap();
    let config = SolveConfig::default();
    let full = solve_mip(&prepared.model, &config, &mut |_| {}).unwrap();
    assert_eq!(successor_cycles(&prepared.model, full.values.as_ref().unwrap()), 1);
    let loose = prepared.model.without_family(RowFamily::SubTour);
    let r = solve_mip(&loose, &config, &mut |_| {}).unwrap();
    let values = r.values.unwrap();
    assert!(successor_cycles(&loose, &values) >= 2);
    assert!(r.objective.unwrap() > full.objective.unwrap() + 1.0);
}
