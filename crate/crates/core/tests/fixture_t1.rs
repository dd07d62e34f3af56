use tourplan::domain::Problem;
use tourplan::graph::transitive_closure;
use tourplan::instances::fixture_t1;
use tourplan::model::{build, validate_assignment, BuildOptions, RowFamily, VarKind};
use tourplan::oracle::{oracle_bmt, oracle_rmt};
use tourplan::pipeline::{plan, prepare, PlanOptions};

fn solve(problem: Problem) -> tourplan::pipeline::Plan {
    let inst = fixture_t1(problem);
    plan(&inst, &PlanOptions::default(), &mut |_| {}).unwrap()
}

#[test]
fn single_base_model_counts() {
    let inst = fixture_t1(Problem::Rmt { budget: 6.0 });
    let closed = transitive_closure(&inst);
    let curves = tourplan::pipeline::approximate_curves(
        &tourplan::pipeline::monotone_specs(&inst),
        0.025,
        tourplan::curves::Flavor::Band,
    )
    .unwrap();
    let m = build(&inst, &closed, &curves, &BuildOptions::default()).unwrap();
    let edge_bins = m.roles().iter().filter(|r| matches!(r, tourplan::model::Role::EdgeUse { .. } | tourplan::model::Role::SelfLoop { .. })).count();
    assert_eq!(edge_bins, 7);
    let visits = m.roles().iter().filter(|r| matches!(r, tourplan::model::Role::Visit { .. })).count();
    assert_eq!(visits, 3);
    assert_eq!(m.count_kind(VarKind::Integer), 2);
    let mtz = (0..m.num_rows()).filter(|&r| m.family(r) == RowFamily::SubTour).count();
    assert_eq!(mtz, 2);
}

#[test]
fn rmt_matches_oracle() {
    for (budget, expected) in [(6.0, 11.0), (2.0, 0.0), (0.0, 0.0), (10.0, 16.0)] {
        let p = solve(Problem::Rmt { budget });
        let inst = fixture_t1(Problem::Rmt { budget });
        let o = oracle_rmt(&inst, budget).unwrap();
        assert!((o.value - expected).abs() < 1e-9, "oracle {budget}: {}", o.value);
        assert!((p.true_reward() - expected).abs() < 1e-6, "budget {budget}: {}", p.true_reward());
        assert!(p.total_time() <= budget + 1e-6);
    }
}

#[test]
fn bmt_matches_oracle() {
    for (req, expected) in [(11.0, 6.0), (16.0, 7.0), (0.0, 0.0)] {
        let p = solve(Problem::Bmt { requirement: req });
        let inst = fixture_t1(Problem::Bmt { requirement: req });
        let o = oracle_bmt(&inst, req).unwrap();
        assert!((o.value - expected).abs() < 1e-9, "oracle {req}: {}", o.value);
        assert!((p.total_time() - expected).abs() < 1e-6, "req {req}: {}", p.total_time());
        assert!(p.true_reward() >= req - 1e-6);
    }
}

#[test]
fn rmt_six_visits_both_pois() {
    let p = solve(Problem::Rmt { budget: 6.0 });
    let it = p.itinerary();
    assert_eq!(it.start_base, 1);
    assert_eq!(it.walk.first(), Some(&1));
    assert_eq!(it.walk.last(), Some(&1));
    let mut stops: Vec<_> = it.stays.iter().map(|s| s.poi).collect();
    stops.sort();
    assert_eq!(stops, vec![2, 3]);
}

#[test]
fn solution_validates() {
    let inst = fixture_t1(Problem::Rmt { budget: 6.0 });
    let prepared = prepare(&inst, &PlanOptions::default()).unwrap();
    let p = tourplan::pipeline::solve_prepared(&inst, &prepared, &Default::default(), &mut |_| {}).unwrap();
    let v = validate_assignment(&inst, &prepared.model, p.result.values.as_ref().unwrap());
    assert!(v.is_empty(), "{v:?}");
}
