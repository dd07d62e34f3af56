//! Exhaustive ground truth for small instances.
//!
//! For every start base and every ordered set of stops the cheapest closed
//! walk is found by depth-first enumeration over the closure; the remaining
//! time (or the reward requirement) is then split among the stops by an exact
//! allocator. Concave curves are allocated by water-filling on the marginal
//! reward rate; arbitrary curves by a dynamic program on a time grid.

use std::collections::HashMap;

use crate::curves::PwlCurve;
use crate::domain::{CurveSpec, Instance, Itinerary, PoiId, Problem, Stay};
use crate::error::{Error, Result};
use crate::graph::{reconstruct_path, transitive_closure, ClosedGraph};

pub const MAX_POIS: usize = 10;

/// One POI competing for stay time.
#[derive(Debug, Clone, Copy)]
pub struct AllocItem<'a> {
    pub poi: PoiId,
    pub reward: f64,
    pub curve: &'a CurveSpec,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Allocation {
    /// Durations aligned with the input items.
    pub durations: Vec<f64>,
    pub reward: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    /// Best `J_R` (reward maximization) or `J_T` (time minimization).
    pub value: f64,
    pub itinerary: Itinerary,
    /// Number of stop sequences enumerated.
    pub sequences: usize,
}

/// How stay time is split among the stops of a candidate tour.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Allocator {
    /// Water-filling; requires concave curves.
    Exact,
    /// Dynamic program over multiples of the given step.
    Grid(f64),
}

enum Piece {
    /// Linear pieces `(rate, length)` in descending rate order.
    Segments(Vec<(f64, f64)>),
    /// `r (1 - e^{-lambda t})`.
    Exp { r: f64, lambda: f64 },
}

fn as_pwl(curve: &CurveSpec) -> Result<Option<PwlCurve>> {
    Ok(match curve {
        CurveSpec::Linear { rate } => Some(PwlCurve::new(vec![(0.0, 0.0), (1.0 / rate, 1.0)])?),
        CurveSpec::Pwl(p) => Some(p.clone()),
        CurveSpec::Sampled(s) => {
            if !s.is_non_decreasing() {
                return Err(Error::NonMonotoneCurve);
            }
            Some(PwlCurve::new(s.points().to_vec())?)
        }
        CurveSpec::Exponential { .. } => None,
    })
}

fn piece(item: &AllocItem) -> Result<Piece> {
    if let CurveSpec::Exponential { rate } = item.curve {
        return Ok(Piece::Exp { r: item.reward, lambda: *rate });
    }
    let pwl = as_pwl(item.curve)?.expect("non-exponential curves are piecewise linear");
    if !pwl.is_concave() {
        return Err(Error::NonConcaveCurve(item.poi));
    }
    let segs = pwl
        .segments()
        .into_iter()
        .filter(|s| s.end.is_finite() && s.slope > 0.0)
        .map(|s| (item.reward * s.slope, s.end - s.start))
        .collect();
    Ok(Piece::Segments(segs))
}

/// Time each item takes when every marginal rate above `mu` is used.
fn times_at(pieces: &[Piece], mu: f64) -> Vec<f64> {
    pieces
        .iter()
        .map(|p| match p {
            Piece::Segments(s) => s.iter().filter(|(rate, _)| *rate > mu).map(|(_, len)| len).sum(),
            Piece::Exp { r, lambda } => {
                let top = r * lambda;
                if top > mu {
                    if mu <= 0.0 {
                        f64::INFINITY
                    } else {
                        (top / mu).ln() / lambda
                    }
                } else {
                    0.0
                }
            }
        })
        .collect()
}

fn reward_of(items: &[AllocItem], durations: &[f64]) -> f64 {
    items.iter().zip(durations).map(|(it, &t)| it.reward * it.curve.eval(t.max(0.0)).unwrap_or(0.0)).sum()
}

fn max_rate(pieces: &[Piece]) -> f64 {
    pieces
        .iter()
        .map(|p| match p {
            Piece::Segments(s) => s.first().map_or(0.0, |x| x.0),
            Piece::Exp { r, lambda } => r * lambda,
        })
        .fold(0.0, f64::max)
}

/// Bisects the marginal rate until `done(mu)` flips, returning `(lo, hi)`
/// with `done(hi)` false and `done(lo)` true.
fn bisect_rate(pieces: &[Piece], done: impl Fn(&[f64]) -> bool) -> (f64, f64) {
    let mut hi = max_rate(pieces) * (1.0 + 1e-12) + 1e-300;
    let mut lo = 0.0;
    for _ in 0..300 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if done(&times_at(pieces, mid)) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo, hi)
}

/// Fills segments whose rate lies in `(lo, hi]`, steepest first (ties to the
/// lower POI id), spending at most `budget`; returns what was spent.
fn fill_ties(items: &[AllocItem], pieces: &[Piece], lo: f64, hi: f64, durations: &mut [f64], mut budget: f64) -> f64 {
    let mut ties: Vec<(f64, PoiId, usize, f64)> = Vec::new();
    for (k, p) in pieces.iter().enumerate() {
        if let Piece::Segments(s) = p {
            for &(rate, len) in s {
                if rate > lo && rate <= hi {
                    ties.push((rate, items[k].poi, k, len));
                }
            }
        }
    }
    ties.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let mut spent = 0.0;
    for (_, _, k, len) in ties {
        let take = len.min(budget);
        if take <= 0.0 {
            break;
        }
        durations[k] += take;
        budget -= take;
        spent += take;
    }
    spent
}

/// Optimal split of `available` time for concave curves.
pub fn oracle_allocate(items: &[AllocItem], available: f64) -> Result<Allocation> {
    let pieces: Vec<Piece> = items.iter().map(piece).collect::<Result<_>>()?;
    let available = available.max(0.0);
    let full = times_at(&pieces, 0.0);
    if full.iter().sum::<f64>() <= available {
        let reward = reward_of(items, &full);
        return Ok(Allocation { durations: full, reward });
    }
    let (lo, hi) = bisect_rate(&pieces, |t| t.iter().sum::<f64>() > available);
    let mut durations = times_at(&pieces, hi);
    let used: f64 = durations.iter().sum();
    let spent = fill_ties(items, &pieces, lo, hi, &mut durations, available - used);
    let rest = available - used - spent;
    if rest > 0.0 {
        // Leftover from the continuity of exponential pieces is negligible;
        // hand it to the steepest exponential item.
        if let Some(k) = pieces.iter().position(|p| matches!(p, Piece::Exp { .. })) {
            durations[k] += rest;
        }
    }
    let reward = reward_of(items, &durations);
    Ok(Allocation { durations, reward })
}

/// Least total stay time reaching `required` reward with concave curves;
/// `None` when the items cannot reach it.
pub fn oracle_min_time(items: &[AllocItem], required: f64) -> Result<Option<Allocation>> {
    let pieces: Vec<Piece> = items.iter().map(piece).collect::<Result<_>>()?;
    let total: f64 = items.iter().map(|i| i.reward).sum();
    let has_exp = pieces.iter().any(|p| matches!(p, Piece::Exp { .. }));
    if required <= 0.0 {
        return Ok(Some(Allocation { durations: vec![0.0; items.len()], reward: 0.0 }));
    }
    if required > total * (1.0 + 1e-12) || (has_exp && required >= total) {
        return Ok(None);
    }
    let (lo, hi) = bisect_rate(&pieces, |t| reward_of(items, t) >= required);
    let mut durations = times_at(&pieces, hi);
    let short = required - reward_of(items, &durations);
    if short > 0.0 {
        // Tied segments close the remaining reward at their common rate.
        let mut ties: Vec<(f64, PoiId, usize, f64)> = Vec::new();
        for (k, p) in pieces.iter().enumerate() {
            if let Piece::Segments(s) = p {
                for &(rate, len) in s {
                    if rate > lo && rate <= hi {
                        ties.push((rate, items[k].poi, k, len));
                    }
                }
            }
        }
        ties.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        let mut need = short;
        for (rate, _, k, len) in ties {
            if need <= 0.0 {
                break;
            }
            let take = (need / rate).min(len);
            durations[k] += take;
            need -= take * rate;
        }
        if need > 1e-9 * required.max(1.0) {
            // Exponential pieces: move to the lower rate.
            durations = times_at(&pieces, lo);
        }
    }
    let reward = reward_of(items, &durations);
    Ok(Some(Allocation { durations, reward }))
}

/// Grid values `r f(k step)` for `k = 0..=cap`, stopping early once the
/// curve is flat.
fn grid_values(item: &AllocItem, step: f64, cap: usize) -> Result<Vec<f64>> {
    let horizon = match item.curve {
        CurveSpec::Exponential { .. } => f64::INFINITY,
        other => as_pwl(other)?.expect("piecewise linear").saturation_time(),
    };
    let last = if horizon.is_finite() { ((horizon / step).ceil() as usize).min(cap) } else { cap };
    (0..=last).map(|k| Ok(item.reward * item.curve.eval(k as f64 * step)?)).collect()
}

fn is_concave_seq(v: &[f64]) -> bool {
    v.windows(3).all(|w| (w[2] - w[1]) <= (w[1] - w[0]) + 1e-12)
}

/// Max-plus convolution of `acc` with `vals`, returning the new table and
/// the number of units given to the new item at each capacity.
fn convolve(acc: &[f64], vals: &[f64]) -> (Vec<f64>, Vec<usize>) {
    let cap = acc.len() - 1;
    let mut best = vec![f64::NEG_INFINITY; cap + 1];
    let mut pick = vec![0usize; cap + 1];
    if is_concave_seq(acc) && is_concave_seq(vals) {
        // Merge the two non-increasing increment sequences.
        let (mut a, mut b) = (0usize, 0usize);
        best[0] = acc[0] + vals[0];
        for c in 1..=cap {
            let da = if a < cap { acc[a + 1] - acc[a] } else { f64::NEG_INFINITY };
            let db = if b + 1 < vals.len() { vals[b + 1] - vals[b] } else { f64::NEG_INFINITY };
            if db > da {
                b += 1;
            } else if a < cap {
                a += 1;
            } else {
                b += 1;
            }
            let vb = vals[b.min(vals.len() - 1)];
            best[c] = acc[a] + vb;
            pick[c] = b.min(vals.len() - 1);
            if b >= vals.len() {
                // Item exhausted: extra units are idle.
                best[c] = best[c - 1].max(best[c]);
            }
        }
        return (best, pick);
    }
    for c in 0..=cap {
        for (k, &v) in vals.iter().enumerate().take(c + 1) {
            let cand = acc[c - k] + v;
            if cand > best[c] {
                best[c] = cand;
                pick[c] = k;
            }
        }
    }
    (best, pick)
}

struct GridTable {
    table: Vec<f64>,
    picks: Vec<Vec<usize>>,
}

fn grid_table(items: &[AllocItem], step: f64, cap: usize) -> Result<GridTable> {
    let mut table = vec![0.0; cap + 1];
    let mut picks = Vec::with_capacity(items.len());
    for item in items {
        let vals = grid_values(item, step, cap)?;
        let (t, p) = convolve(&table, &vals);
        // Enforce monotonicity in capacity (idle time is allowed).
        let mut t = t;
        let mut p = p;
        for c in 1..=cap {
            if t[c - 1] > t[c] {
                t[c] = t[c - 1];
                p[c] = usize::MAX;
            }
        }
        table = t;
        picks.push(p);
    }
    Ok(GridTable { table, picks })
}

fn backtrack(g: &GridTable, mut c: usize, step: f64) -> Vec<f64> {
    let mut units = vec![0usize; g.picks.len()];
    for k in (0..g.picks.len()).rev() {
        // Walk down to the capacity actually used at this stage.
        while g.picks[k][c] == usize::MAX {
            c -= 1;
        }
        let u = g.picks[k][c];
        units[k] = u;
        c -= u;
    }
    units.into_iter().map(|u| u as f64 * step).collect()
}

/// Best split of `available` time over multiples of `step`, for any
/// non-decreasing curves.
pub fn oracle_allocate_dp(items: &[AllocItem], available: f64, step: f64) -> Result<Allocation> {
    if !(step > 0.0) {
        return Err(Error::OptionConflict(format!("grid step must be positive, got {step}")));
    }
    let cap = ((available.max(0.0) / step) + 1e-9).floor() as usize;
    if items.is_empty() || cap == 0 {
        return Ok(Allocation { durations: vec![0.0; items.len()], reward: 0.0 });
    }
    let g = grid_table(items, step, cap)?;
    let durations = backtrack(&g, cap, step);
    let reward = reward_of(items, &durations);
    Ok(Allocation { durations, reward })
}

/// Least grid time reaching `required` reward; `None` when unreachable
/// within `max_time`.
pub fn oracle_min_time_dp(items: &[AllocItem], required: f64, step: f64, max_time: f64) -> Result<Option<Allocation>> {
    if required <= 0.0 {
        return Ok(Some(Allocation { durations: vec![0.0; items.len()], reward: 0.0 }));
    }
    let cap = ((max_time / step) + 1e-9).floor() as usize;
    let g = grid_table(items, step, cap)?;
    let tol = 1e-9 * required.max(1.0);
    let Some(c) = g.table.iter().position(|&v| v >= required - tol) else {
        return Ok(None);
    };
    let durations = backtrack(&g, c, step);
    let reward = reward_of(items, &durations);
    Ok(Some(Allocation { durations, reward }))
}

/// Cheapest closed walk from `start` for every set of stops, with its order.
fn tours_by_subset(closed: &ClosedGraph, start: PoiId, limit: f64) -> (HashMap<u32, (f64, Vec<PoiId>)>, usize) {
    let n = closed.n();
    let mut best: HashMap<u32, (f64, Vec<PoiId>)> = HashMap::new();
    best.insert(0, (0.0, Vec::new()));
    let mut count = 1usize;
    let mut path = Vec::new();
    fn dfs(
        closed: &ClosedGraph,
        start: PoiId,
        limit: f64,
        cur: PoiId,
        len: f64,
        mask: u32,
        path: &mut Vec<PoiId>,
        best: &mut HashMap<u32, (f64, Vec<PoiId>)>,
        count: &mut usize,
    ) {
        for v in 1..=closed.n() {
            if v == start || mask & (1 << v) != 0 || !closed.reachable(cur, v) || !closed.reachable(v, start) {
                continue;
            }
            let l = len + closed.dist(cur, v);
            let total = l + closed.dist(v, start);
            if total > limit {
                continue;
            }
            let m = mask | (1 << v);
            path.push(v);
            *count += 1;
            let better = best.get(&m).is_none_or(|(b, _)| total < *b);
            if better {
                best.insert(m, (total, path.clone()));
            }
            dfs(closed, start, limit, v, l, m, path, best, count);
            path.pop();
        }
    }
    let _ = n;
    dfs(closed, start, limit, start, 0.0, 0, &mut path, &mut best, &mut count);
    (best, count)
}

fn stops_itinerary(
    instance: &Instance,
    closed: &ClosedGraph,
    start: PoiId,
    order: &[PoiId],
    durations: &HashMap<PoiId, f64>,
) -> Result<Itinerary> {
    let mut stays = Vec::new();
    if let Some(&t) = durations.get(&start) {
        if t > 0.0 {
            stays.push(Stay { poi: start, duration: t });
        }
    }
    for &p in order {
        stays.push(Stay { poi: p, duration: durations.get(&p).copied().unwrap_or(0.0) });
    }
    let mut walk = vec![start];
    let mut seq = vec![start];
    seq.extend_from_slice(order);
    if !order.is_empty() {
        seq.push(start);
    }
    for w in seq.windows(2) {
        walk.extend_from_slice(&reconstruct_path(closed, w[0], w[1])?[1..]);
    }
    let it = Itinerary { stays, walk, start_base: start, total_time: 0.0, model_reward: 0.0, true_reward: 0.0 };
    let mut it = it.evaluated(instance)?;
    it.model_reward = it.true_reward;
    Ok(it)
}

fn guard(instance: &Instance) -> Result<()> {
    if instance.n() > MAX_POIS {
        return Err(Error::TooLarge(instance.n(), MAX_POIS));
    }
    Ok(())
}

fn items_for<'a>(instance: &Instance, curves: &'a [CurveSpec], start: PoiId, order: &[PoiId]) -> Vec<AllocItem<'a>> {
    let mut ids = vec![start];
    ids.extend_from_slice(order);
    ids.iter().map(|&p| AllocItem { poi: p, reward: instance.poi(p).max_reward, curve: &curves[p - 1] }).collect()
}

/// Reward-maximizing tour under `budget` using the instance's own curves.
pub fn oracle_rmt(instance: &Instance, budget: f64) -> Result<OracleResult> {
    let curves: Vec<CurveSpec> = instance.pois().iter().map(|p| p.curve.clone()).collect();
    oracle_rmt_with(instance, budget, &curves, Allocator::Exact)
}

/// Time-minimizing tour reaching `requirement` using the instance's curves.
pub fn oracle_bmt(instance: &Instance, requirement: f64) -> Result<OracleResult> {
    let curves: Vec<CurveSpec> = instance.pois().iter().map(|p| p.curve.clone()).collect();
    oracle_bmt_with(instance, requirement, &curves, Allocator::Exact)
}

/// Oracle for whichever problem the instance carries.
pub fn oracle_solve(instance: &Instance) -> Result<OracleResult> {
    match instance.problem {
        Problem::Rmt { budget } => oracle_rmt(instance, budget),
        Problem::Bmt { requirement } => oracle_bmt(instance, requirement),
    }
}

/// `oracle_rmt` with substitute curves (e.g. approximations) and allocator.
/// The reported itinerary is evaluated on the instance's original curves;
/// `value` is the reward under `curves`.
pub fn oracle_rmt_with(instance: &Instance, budget: f64, curves: &[CurveSpec], alloc: Allocator) -> Result<OracleResult> {
    guard(instance)?;
    let closed = transitive_closure(instance);
    let mut best: Option<(f64, PoiId, Vec<PoiId>, Vec<f64>)> = None;
    let mut sequences = 0;
    for &start in instance.bases() {
        let (tours, count) = tours_by_subset(&closed, start, budget);
        sequences += count;
        let mut masks: Vec<&u32> = tours.keys().collect();
        masks.sort();
        for mask in masks {
            let (travel, order) = &tours[mask];
            let items = items_for(instance, curves, start, order);
            let a = match alloc {
                Allocator::Exact => oracle_allocate(&items, budget - travel)?,
                Allocator::Grid(step) => oracle_allocate_dp(&items, budget - travel, step)?,
            };
            if best.as_ref().is_none_or(|b| a.reward > b.0 + 1e-12) {
                best = Some((a.reward, start, order.clone(), a.durations));
            }
        }
    }
    let (value, start, order, durations) = best.ok_or(Error::Infeasible)?;
    let mut ids = vec![start];
    ids.extend_from_slice(&order);
    let dmap: HashMap<PoiId, f64> = ids.into_iter().zip(durations).collect();
    let itinerary = stops_itinerary(instance, &closed, start, &order, &dmap)?;
    Ok(OracleResult { value, itinerary, sequences })
}

/// `oracle_bmt` with substitute curves and allocator. `value` is the least
/// total time; the itinerary is evaluated on the original curves.
pub fn oracle_bmt_with(instance: &Instance, requirement: f64, curves: &[CurveSpec], alloc: Allocator) -> Result<OracleResult> {
    guard(instance)?;
    let attainable = instance.total_max_reward();
    if requirement > attainable * (1.0 + 1e-12) {
        return Err(Error::RequirementUnreachable { required: requirement, attainable });
    }
    let closed = transitive_closure(instance);
    let max_stay: f64 = curves
        .iter()
        .map(|c| match c {
            CurveSpec::Exponential { rate } => 50.0 / rate,
            other => as_pwl(other).ok().flatten().map_or(0.0, |p| p.saturation_time()),
        })
        .sum();
    let mut best: Option<(f64, PoiId, Vec<PoiId>, Vec<f64>)> = None;
    let mut reachable = 0.0f64;
    let mut sequences = 0;
    for &start in instance.bases() {
        let (tours, count) = tours_by_subset(&closed, start, f64::INFINITY);
        sequences += count;
        let mut masks: Vec<&u32> = tours.keys().collect();
        masks.sort();
        for mask in masks {
            let (travel, order) = &tours[mask];
            if best.as_ref().is_some_and(|b| *travel >= b.0) {
                continue;
            }
            let items = items_for(instance, curves, start, order);
            reachable = reachable.max(items.iter().map(|i| i.reward).sum());
            let a = match alloc {
                Allocator::Exact => oracle_min_time(&items, requirement)?,
                Allocator::Grid(step) => oracle_min_time_dp(&items, requirement, step, max_stay)?,
            };
            if let Some(a) = a {
                let total = travel + a.durations.iter().sum::<f64>();
                if best.as_ref().is_none_or(|b| total < b.0 - 1e-12) {
                    best = Some((total, start, order.clone(), a.durations));
                }
            }
        }
    }
    let (value, start, order, durations) =
        best.ok_or(Error::RequirementUnreachable { required: requirement, attainable: reachable })?;
    let mut ids = vec![start];
    ids.extend_from_slice(&order);
    let dmap: HashMap<PoiId, f64> = ids.into_iter().zip(durations).collect();
    let itinerary = stops_itinerary(instance, &closed, start, &order, &dmap)?;
    Ok(OracleResult { value, itinerary, sequences })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lin(rate: f64) -> CurveSpec {
        CurveSpec::Linear { rate }
    }

    #[test]
    fn greedy_fills_steepest_first() {
        let (c2, c3) = (lin(0.5), lin(1.0));
        let items = [AllocItem { poi: 2, reward: 10.0, curve: &c2 }, AllocItem { poi: 3, reward: 6.0, curve: &c3 }];
        let a = oracle_allocate(&items, 2.0).unwrap();
        assert!((a.durations[0] - 1.0).abs() < 1e-12 && (a.durations[1] - 1.0).abs() < 1e-12);
        assert!((a.reward - 11.0).abs() < 1e-12);
        assert_eq!(oracle_allocate(&items, 0.0).unwrap().reward, 0.0);
        assert!((oracle_allocate(&items, 100.0).unwrap().reward - 16.0).abs() < 1e-12);
    }

    #[test]
    fn dp_matches_greedy_on_concave() {
        let (c2, c3) = (lin(0.5), CurveSpec::Exponential { rate: 1.3 });
        let items = [AllocItem { poi: 2, reward: 10.0, curve: &c2 }, AllocItem { poi: 3, reward: 6.0, curve: &c3 }];
        let exact = oracle_allocate(&items, 1.7).unwrap();
        let step = 1e-3;
        let dp = oracle_allocate_dp(&items, 1.7, step).unwrap();
        assert!(dp.reward <= exact.reward + 1e-9);
        assert!(exact.reward - dp.reward <= 10.0 * 0.5 * step * 2.0 + 6.0 * 1.3 * step * 2.0);
    }

    #[test]
    fn dp_clears_a_jump() {
        // Flat start then a steep rise: only a long stay pays off.
        let c = CurveSpec::Pwl(PwlCurve::new(vec![(0.0, 0.0), (1.0, 0.05), (1.2, 1.0)]).unwrap());
        let items = [AllocItem { poi: 1, reward: 1.0, curve: &c }];
        assert!(matches!(oracle_allocate(&items, 2.0), Err(Error::NonConcaveCurve(1))));
        let a = oracle_allocate_dp(&items, 2.0, 0.01).unwrap();
        assert!((a.reward - 1.0).abs() < 1e-9);
        assert!((a.durations[0] - 1.2).abs() < 1e-9);
        assert_eq!(oracle_allocate_dp(&items, 0.005, 0.01).unwrap().reward, 0.0);
    }

    #[test]
    fn min_time_fills_steepest() {
        let (c2, c3) = (lin(0.5), lin(1.0));
        let items = [AllocItem { poi: 2, reward: 10.0, curve: &c2 }, AllocItem { poi: 3, reward: 6.0, curve: &c3 }];
        let a = oracle_min_time(&items, 11.0).unwrap().unwrap();
        assert!((a.durations.iter().sum::<f64>() - 2.0).abs() < 1e-9);
        assert!(oracle_min_time(&items, 17.0).unwrap().is_none());
    }
}
