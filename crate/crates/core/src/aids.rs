//! Search aids for the tour models: connectivity cuts and starting routes.
//!
//! Both leave the model untouched. A cut says that a visited POI must be
//! entered from a set containing a base; every tour in every model family
//! starts at a base, so these hold for all integer solutions. Starting
//! routes come from greedy insertion plus local search and are handed to the
//! solver as fixed routing columns.

use std::collections::{HashSet, VecDeque};

use crate::curves::PwlCurve;
use crate::domain::{CurveSpec, Instance, PoiId, Problem};
use crate::graph::ClosedGraph;
use crate::model::{MipModel, Role};
use crate::oracle::{oracle_allocate, oracle_allocate_dp, oracle_min_time, oracle_min_time_dp, AllocItem};
use crate::solver::{Cut, SearchAids};

const MAX_HINTS: usize = 3;
const LOCAL_SEARCH_PASSES: usize = 50;
const DP_STEPS: f64 = 200.0;

/// Edge and visit columns of one tour (or of the aggregate).
#[derive(Debug, Clone, Default)]
struct Group {
    edges: Vec<(PoiId, PoiId, usize)>,
    visits: Vec<(PoiId, usize)>,
}

#[derive(Debug, Clone)]
pub struct TourAids {
    n: usize,
    bases: Vec<PoiId>,
    groups: Vec<Group>,
    hints: Vec<Vec<(usize, f64)>>,
}

impl TourAids {
    /// Aids for `model`, built from `instance` with the given curves.
    /// `cyclic` says whether tours return to their start base.
    pub fn new(instance: &Instance, closed: &ClosedGraph, curves: &[PwlCurve], model: &MipModel, cyclic: bool) -> Self {
        let mut keys: Vec<Option<usize>> = Vec::new();
        let mut groups: Vec<Group> = Vec::new();
        let mut group_of = |tour: Option<usize>, groups: &mut Vec<Group>| -> usize {
            match keys.iter().position(|&k| k == tour) {
                Some(p) => p,
                None => {
                    keys.push(tour);
                    groups.push(Group::default());
                    groups.len() - 1
                }
            }
        };
        for (col, role) in model.roles().iter().enumerate() {
            match *role {
                Role::EdgeUse { from, to, tour } => {
                    let g = group_of(tour, &mut groups);
                    groups[g].edges.push((from, to, col));
                }
                Role::Visit { poi, tour } if !instance.is_base(poi) => {
                    let g = group_of(tour, &mut groups);
                    groups[g].visits.push((poi, col));
                }
                _ => {}
            }
        }
        let mut aids = Self { n: instance.n(), bases: instance.bases().to_vec(), groups, hints: Vec::new() };
        if let Some(g) = keys.iter().position(|k| k.is_none()) {
            let scorer = Scorer::new(instance, closed, curves);
            let mut routes = Vec::new();
            for &b in instance.bases() {
                let ends: Vec<PoiId> = if cyclic { vec![b] } else { instance.bases().to_vec() };
                for e in ends {
                    let route = scorer.improve(vec![b, e]);
                    let s = scorer.score(&route);
                    if s.0 {
                        routes.push((s.1, route));
                    }
                }
            }
            routes.sort_by(|a, b| a.0.total_cmp(&b.0));
            routes.dedup_by(|a, b| a.1 == b.1);
            aids.hints = routes.into_iter().take(MAX_HINTS).map(|(_, r)| aids.fix_route(g, &r)).collect();
        }
        aids
    }

    fn fix_route(&self, g: usize, route: &[PoiId]) -> Vec<(usize, f64)> {
        let used: HashSet<(PoiId, PoiId)> = route.windows(2).filter(|w| w[0] != w[1]).map(|w| (w[0], w[1])).collect();
        let stops: HashSet<PoiId> = route.iter().copied().collect();
        let group = &self.groups[g];
        let mut fixes: Vec<(usize, f64)> =
            group.edges.iter().map(|&(i, j, c)| (c, if used.contains(&(i, j)) { 1.0 } else { 0.0 })).collect();
        fixes.extend(group.visits.iter().map(|&(v, c)| (c, if stops.contains(&v) { 1.0 } else { 0.0 })));
        fixes
    }

    /// Number of starting routes found.
    pub fn hint_count(&self) -> usize {
        self.hints.len()
    }

    fn separate_group(&self, group: &Group, x: &[f64], out: &mut Vec<Cut>) {
        let size = self.n + 1;
        let mut cap = vec![0.0; size * size];
        for &(i, j, c) in &group.edges {
            if x[c] > 1e-9 {
                cap[i * size + j] += x[c];
            }
        }
        for &b in &self.bases {
            cap[b] = f64::INFINITY;
        }
        let mut seen: HashSet<Vec<bool>> = HashSet::new();
        for &(v, col) in &group.visits {
            let need = x[col];
            if need <= 1e-6 {
                continue;
            }
            let (flow, source_side) = max_flow(&cap, size, 0, v);
            if flow >= need - 1e-6 {
                continue;
            }
            let inside: Vec<bool> = source_side.iter().map(|&s| !s).collect();
            if !seen.insert(inside.clone()) {
                continue;
            }
            let mut terms: Vec<(usize, f64)> =
                group.edges.iter().filter(|&&(i, j, _)| !inside[i] && inside[j]).map(|&(_, _, c)| (c, 1.0)).collect();
            terms.push((col, -1.0));
            out.push(Cut { terms, lo: 0.0, hi: f64::INFINITY });
        }
    }
}

impl SearchAids for TourAids {
    fn separate(&mut self, x: &[f64]) -> Vec<Cut> {
        let mut cuts = Vec::new();
        for g in &self.groups {
            self.separate_group(g, x, &mut cuts);
        }
        cuts
    }

    fn hints(&mut self) -> Vec<Vec<(usize, f64)>> {
        self.hints.clone()
    }
}

/// Edmonds-Karp on a dense capacity matrix. Returns the flow value and the
/// nodes reachable from `s` in the final residual graph.
fn max_flow(cap: &[f64], size: usize, s: usize, t: usize) -> (f64, Vec<bool>) {
    let mut res = cap.to_vec();
    let mut total = 0.0;
    loop {
        let mut prev = vec![usize::MAX; size];
        prev[s] = s;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for v in 0..size {
                if prev[v] == usize::MAX && res[u * size + v] > 1e-9 {
                    prev[v] = u;
                    queue.push_back(v);
                }
            }
        }
        if prev[t] == usize::MAX {
            let side = prev.iter().map(|&p| p != usize::MAX).collect();
            return (total, side);
        }
        let mut push = f64::INFINITY;
        let mut v = t;
        while v != s {
            let u = prev[v];
            push = push.min(res[u * size + v]);
            v = u;
        }
        let mut v = t;
        while v != s {
            let u = prev[v];
            res[u * size + v] -= push;
            res[v * size + u] += push;
            v = u;
        }
        total += push;
    }
}

/// Scores routes under the model's curves. A route lists the stops in
/// order, start base first and end base last.
struct Scorer<'a> {
    inst: &'a Instance,
    closed: &'a ClosedGraph,
    specs: Vec<CurveSpec>,
    saturation: Vec<f64>,
    concave: bool,
}

impl<'a> Scorer<'a> {
    fn new(inst: &'a Instance, closed: &'a ClosedGraph, curves: &[PwlCurve]) -> Self {
        let concave = curves.iter().all(|c| c.is_concave());
        Self {
            inst,
            closed,
            specs: curves.iter().cloned().map(CurveSpec::Pwl).collect(),
            saturation: curves.iter().map(|c| c.saturation_time()).collect(),
            concave,
        }
    }

    fn travel(&self, route: &[PoiId]) -> f64 {
        route.windows(2).filter(|w| w[0] != w[1]).map(|w| self.closed.dist(w[0], w[1])).sum()
    }

    fn connected(&self, route: &[PoiId]) -> bool {
        route.windows(2).all(|w| w[0] == w[1] || self.closed.reachable(w[0], w[1]))
    }

    fn items(&self, route: &[PoiId]) -> Vec<AllocItem<'_>> {
        let mut stops: Vec<PoiId> = route.to_vec();
        stops.sort_unstable();
        stops.dedup();
        stops
            .into_iter()
            .map(|p| AllocItem { poi: p, reward: self.inst.poi(p).max_reward, curve: &self.specs[p - 1] })
            .collect()
    }

    /// `(feasible, cost)`; lower cost is better. Infeasible BMT routes are
    /// ranked by how much reward they leave out.
    fn score(&self, route: &[PoiId]) -> (bool, f64) {
        if !self.connected(route) {
            return (false, f64::INFINITY);
        }
        let travel = self.travel(route);
        let items = self.items(route);
        match self.inst.problem {
            Problem::Rmt { budget } => {
                let avail = budget - travel;
                if avail < -1e-9 {
                    return (false, f64::INFINITY);
                }
                let alloc = if self.concave {
                    oracle_allocate(&items, avail)
                } else {
                    oracle_allocate_dp(&items, avail, (avail / DP_STEPS).max(1e-9))
                };
                match alloc {
                    Ok(a) => (true, -a.reward),
                    Err(_) => (false, f64::INFINITY),
                }
            }
            Problem::Bmt { requirement } => {
                let cap: f64 = items.iter().map(|i| i.reward).sum();
                let alloc = if self.concave {
                    oracle_min_time(&items, requirement)
                } else {
                    let max_time: f64 = items.iter().map(|i| self.saturation[i.poi - 1]).sum();
                    oracle_min_time_dp(&items, requirement, (max_time / DP_STEPS).max(1e-9), max_time)
                };
                match alloc {
                    Ok(Some(a)) => (true, travel + a.durations.iter().sum::<f64>()),
                    _ => (false, 1e12 * (requirement - cap).max(0.0) + travel),
                }
            }
        }
    }

    fn better(a: (bool, f64), b: (bool, f64)) -> bool {
        match (a.0, b.0) {
            (true, false) => true,
            (false, true) => false,
            _ => a.1 < b.1 - 1e-9 * b.1.abs().max(1.0),
        }
    }

    /// Greedy insertion followed by remove, swap and 2-opt moves.
    fn improve(&self, mut route: Vec<PoiId>) -> Vec<PoiId> {
        let mut best = self.score(&route);
        for _ in 0..LOCAL_SEARCH_PASSES {
            let mut cand: Option<(Vec<PoiId>, (bool, f64))> = None;
            let consider = |r: Vec<PoiId>, cand: &mut Option<(Vec<PoiId>, (bool, f64))>| {
                let s = self.score(&r);
                if Self::better(s, cand.as_ref().map_or(best, |c| c.1)) {
                    *cand = Some((r, s));
                }
            };
            let outside: Vec<PoiId> =
                (1..=self.inst.n()).filter(|p| !self.inst.is_base(*p) && !route.contains(p)).collect();
            for &v in &outside {
                for pos in 1..route.len() {
                    let mut r = route.clone();
                    r.insert(pos, v);
                    consider(r, &mut cand);
                }
            }
            for pos in 1..route.len() - 1 {
                let mut r = route.clone();
                let removed = r.remove(pos);
                consider(r.clone(), &mut cand);
                for &v in &outside {
                    if v == removed {
                        continue;
                    }
                    for at in 1..r.len() {
                        let mut s = r.clone();
                        s.insert(at, v);
                        consider(s, &mut cand);
                    }
                }
            }
            for a in 1..route.len().saturating_sub(1) {
                for b in a + 1..route.len() - 1 {
                    let mut r = route.clone();
                    r[a..=b].reverse();
                    consider(r, &mut cand);
                }
            }
            match cand {
                Some((r, s)) => {
                    route = r;
                    best = s;
                }
                None => break,
            }
        }
        route
    }
}
