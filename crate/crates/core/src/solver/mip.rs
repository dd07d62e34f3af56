//! Anytime branch-and-bound over the dual simplex.
//!
//! Nodes are kept as bound changes relative to their parent; the simplex is
//! warm-started from whatever basis the previous node left behind. Search is
//! best-bound with a depth-first dive after every pop, and a rounding
//! heuristic at the end of each dive. Callers can add cutting planes at the
//! root and partial assignments to start from through [`SearchAids`].

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::model::{MipModel, Sense, VarKind};

use super::lp::{LpProblem, Outcome, Simplex};

pub const DEFAULT_THRESHOLDS: [f64; 7] = [1.0, 0.5, 0.2, 0.1, 0.05, 0.01, 0.0];

const CUT_ROUNDS: usize = 200;
const CUT_STALL_ROUNDS: usize = 8;
const HINT_NODES: usize = 500;

/// Inequality `lo <= terms·x <= hi` on model columns that every integer
/// feasible solution satisfies.
#[derive(Debug, Clone, PartialEq)]
pub struct Cut {
    pub terms: Vec<(usize, f64)>,
    pub lo: f64,
    pub hi: f64,
}

impl Cut {
    pub fn violation(&self, x: &[f64]) -> f64 {
        let a: f64 = self.terms.iter().map(|&(j, c)| c * x[j]).sum();
        (self.lo - a).max(a - self.hi).max(0.0)
    }
}

/// Problem knowledge offered to the search. Neither hook changes the set of
/// feasible solutions.
pub trait SearchAids {
    /// Cuts violated by the LP point `x`, called repeatedly at the root.
    fn separate(&mut self, _x: &[f64]) -> Vec<Cut> {
        Vec::new()
    }

    /// Partial assignments `(column, value)`; the search completes each one
    /// with a short depth-first search and keeps the best result.
    fn hints(&mut self) -> Vec<Vec<(usize, f64)>> {
        Vec::new()
    }
}

/// No cuts, no hints.
pub struct NoAids;

impl SearchAids for NoAids {}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveConfig {
    /// Wall-clock limit in seconds.
    pub time_limit: Option<f64>,
    /// Gap values whose first crossing is reported, sorted descending.
    pub gap_thresholds: Vec<f64>,
    /// Stop as soon as the gap is at or below this value.
    pub target_gap: f64,
    pub integrality_tol: f64,
    pub deterministic: bool,
    /// Accepted for interface compatibility; the search runs on one thread.
    pub threads: usize,
    pub node_limit: Option<usize>,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            time_limit: None,
            gap_thresholds: DEFAULT_THRESHOLDS.to_vec(),
            target_gap: 0.0,
            integrality_tol: 1e-6,
            deterministic: true,
            threads: 1,
            node_limit: None,
        }
    }
}

impl SolveConfig {
    pub fn validate(&self) -> Result<()> {
        if self.gap_thresholds.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::OptionConflict("gap thresholds must be sorted descending".into()));
        }
        if !(self.target_gap >= 0.0) {
            return Err(Error::OptionConflict(format!("target gap {} must be non-negative", self.target_gap)));
        }
        if self.threads == 0 {
            return Err(Error::OptionConflict("threads must be at least 1".into()));
        }
        if self.deterministic && self.threads > 1 {
            return Err(Error::OptionConflict("deterministic mode runs a single worker".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EventKind {
    NewIncumbent,
    BoundImproved,
    ThresholdCrossed(f64),
    Done,
}

impl EventKind {
    pub fn label(&self) -> String {
        match self {
            EventKind::NewIncumbent => "new_incumbent".into(),
            EventKind::BoundImproved => "bound_improved".into(),
            EventKind::ThresholdCrossed(p) => format!("threshold_crossed({p})"),
            EventKind::Done => "done".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveEvent {
    pub elapsed: f64,
    pub incumbent: Option<f64>,
    pub bound: f64,
    pub gap: f64,
    pub kind: EventKind,
    /// The new incumbent's variable values, on `NewIncumbent` events only.
    pub assignment: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MipStatus {
    /// Tree exhausted or gap closed to zero.
    Optimal,
    /// Stopped at the requested gap.
    GapReached,
    TimeLimit,
    NodeLimit,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MipResult {
    pub status: MipStatus,
    pub values: Option<Vec<f64>>,
    pub objective: Option<f64>,
    pub bound: f64,
    pub gap: f64,
    pub nodes: usize,
    pub events: Vec<SolveEvent>,
}

/// `|bound - incumbent| / max(|incumbent|, 1e-10)`, 1.0 without an incumbent.
pub fn gap(incumbent: Option<f64>, bound: f64) -> f64 {
    match incumbent {
        None => 1.0,
        Some(inc) => (bound - inc).abs() / inc.abs().max(1e-10),
    }
}

/// Checks that `bound` dominates `incumbent` for `sense`, within `tol`.
pub fn bound_dominates(incumbent: f64, bound: f64, sense: Sense, tol: f64) -> bool {
    match sense {
        Sense::Maximize => bound >= incumbent - tol,
        Sense::Minimize => bound <= incumbent + tol,
    }
}

struct NodeRec {
    parent: Option<usize>,
    var: usize,
    lo: f64,
    hi: f64,
}

#[derive(PartialEq)]
struct Open {
    bound: f64,
    seq: usize,
    node: Option<usize>,
}

impl Eq for Open {}

impl Ord for Open {
    fn cmp(&self, other: &Self) -> Ordering {
        // Min-heap on bound, then FIFO.
        other.bound.total_cmp(&self.bound).then_with(|| other.seq.cmp(&self.seq))
    }
}

impl PartialOrd for Open {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

struct Search<'a> {
    model: &'a MipModel,
    config: &'a SolveConfig,
    sink: &'a mut dyn FnMut(&SolveEvent),
    sign: f64,
    start: Instant,
    integral: Vec<usize>,
    root_lo: Vec<f64>,
    root_hi: Vec<f64>,
    /// Relaxation without any cuts.
    plain: LpProblem,
    arena: Vec<NodeRec>,
    incumbent: Option<(f64, Vec<f64>)>,
    reported_gap: f64,
    reported_bound: f64,
    crossed: usize,
    events: Vec<SolveEvent>,
}

impl Search<'_> {
    fn elapsed(&self) -> f64 {
        self.start.elapsed().as_secs_f64()
    }

    fn out_of_time(&self) -> bool {
        self.config.time_limit.is_some_and(|l| self.elapsed() >= l)
    }

    fn deadline(&self) -> Option<Instant> {
        self.config.time_limit.map(|l| self.start + Duration::from_secs_f64(l.max(0.0)))
    }

    /// Solves under `lo`/`hi`. If the warm state runs into numerical
    /// trouble the simplex is rebuilt from scratch, and as a last resort
    /// without the cuts, which only weakens the bound.
    fn resolve(&self, simplex: &mut Simplex, lp: &LpProblem, lo: &[f64], hi: &[f64]) -> Result<Outcome> {
        simplex.set_bounds(lo, hi);
        if let Ok(o) = simplex.solve() {
            return Ok(o);
        }
        let cold = |lp: &LpProblem, simplex: &mut Simplex| -> Result<Outcome> {
            *simplex = Simplex::new(lp)?;
            simplex.deadline = self.deadline();
            simplex.set_bounds(lo, hi);
            simplex.solve()
        };
        match cold(lp, simplex) {
            Err(_) if lp.rows.len() > self.plain.rows.len() => cold(&self.plain, simplex),
            r => r,
        }
    }

    /// Tightens root bounds of integer columns that cannot move away from
    /// their bound in the root optimum without reaching the incumbent.
    fn fix_by_reduced_cost(&mut self, root: &Simplex) {
        for (j, lo, hi) in root.implied_bounds(self.cutoff()) {
            if self.model.variables()[j].kind.is_integral() {
                self.root_lo[j] = self.root_lo[j].max((lo - 1e-9).ceil());
                self.root_hi[j] = self.root_hi[j].min((hi + 1e-9).floor());
            }
        }
    }

    /// Depth-first search below the root with `hint` fixed. Returns whether
    /// it produced a new incumbent.
    fn complete(&mut self, simplex: &mut Simplex, lp: &LpProblem, hint: &[(usize, f64)]) -> Result<bool> {
        let (mut lo, mut hi) = (self.root_lo.clone(), self.root_hi.clone());
        for &(j, v) in hint {
            if j >= lo.len() || v < lo[j] - 1e-9 || v > hi[j] + 1e-9 {
                return Ok(false);
            }
            lo[j] = v;
            hi[j] = v;
        }
        let mut stack = vec![(lo, hi)];
        let mut visited = 0;
        while let Some((lo, hi)) = stack.pop() {
            visited += 1;
            if visited > HINT_NODES || self.out_of_time() {
                break;
            }
            if self.resolve(simplex, lp, &lo, &hi)? != Outcome::Optimal || simplex.objective() >= self.cutoff() {
                continue;
            }
            let x = simplex.solution();
            let Some(j) = self.fractional_var(&x) else {
                if self.try_candidate(lp, &x, &lo, &hi)? {
                    return Ok(true);
                }
                continue;
            };
            let v = x[j];
            let (dlo, mut dhi) = (lo.clone(), hi.clone());
            dhi[j] = v.floor();
            let (mut ulo, uhi) = (lo, hi);
            ulo[j] = v.ceil();
            if v - v.floor() >= 0.5 {
                stack.push((dlo, dhi));
                stack.push((ulo, uhi));
            } else {
                stack.push((ulo, uhi));
                stack.push((dlo, dhi));
            }
        }
        Ok(false)
    }

    fn inc_value(&self) -> Option<f64> {
        self.incumbent.as_ref().map(|i| i.0)
    }

    fn cutoff(&self) -> f64 {
        match self.inc_value() {
            Some(v) => v - 1e-9 * v.abs().max(1.0),
            None => f64::INFINITY,
        }
    }

    fn user_gap(&self, bound: f64) -> f64 {
        gap(self.inc_value().map(|v| self.sign * v), self.sign * bound)
    }

    /// Emits an event; bounds are in the internal (minimization) sense.
    fn emit(&mut self, kind: EventKind, bound: f64) {
        let bound = match self.inc_value() {
            Some(v) => bound.min(v),
            None => bound,
        };
        let g = self.user_gap(bound).clamp(0.0, 1.0).min(self.reported_gap);
        self.reported_gap = g;
        self.reported_bound = bound;
        let done = kind == EventKind::Done;
        let ev = SolveEvent {
            elapsed: self.elapsed(),
            incumbent: self.inc_value().map(|v| self.sign * v),
            bound: self.sign * bound,
            gap: g,
            assignment: match kind {
                EventKind::NewIncumbent => self.incumbent.as_ref().map(|i| i.1.clone()),
                _ => None,
            },
            kind,
        };
        // Threshold crossings follow the event that caused them, except that
        // `done` always closes the log.
        if done {
            self.cross_thresholds(g, bound);
            self.push(ev);
        } else {
            self.push(ev);
            self.cross_thresholds(g, bound);
        }
    }

    fn push(&mut self, ev: SolveEvent) {
        (self.sink)(&ev);
        self.events.push(ev);
    }

    fn cross_thresholds(&mut self, g: f64, bound: f64) {
        if self.incumbent.is_none() {
            return;
        }
        while self.crossed < self.config.gap_thresholds.len() && g <= self.config.gap_thresholds[self.crossed] {
            let p = self.config.gap_thresholds[self.crossed];
            self.crossed += 1;
            let ev = SolveEvent {
                elapsed: self.elapsed(),
                incumbent: self.inc_value().map(|v| self.sign * v),
                bound: self.sign * bound,
                gap: g,
                kind: EventKind::ThresholdCrossed(p),
                assignment: None,
            };
            self.push(ev);
        }
    }

    fn bounds_of(&self, node: Option<usize>) -> (Vec<f64>, Vec<f64>) {
        let mut lo = self.root_lo.clone();
        let mut hi = self.root_hi.clone();
        let mut cur = node;
        while let Some(id) = cur {
            let rec = &self.arena[id];
            lo[rec.var] = lo[rec.var].max(rec.lo);
            hi[rec.var] = hi[rec.var].min(rec.hi);
            cur = rec.parent;
        }
        (lo, hi)
    }

    fn fractional_var(&self, x: &[f64]) -> Option<usize> {
        let tol = self.config.integrality_tol;
        let mut best: Option<(bool, f64, usize)> = None;
        for &j in &self.integral {
            let f = x[j] - x[j].floor();
            let dist = f.min(1.0 - f);
            if dist <= tol {
                continue;
            }
            let binary = self.model.variables()[j].kind == VarKind::Binary;
            let better = match best {
                None => true,
                Some((b_bin, b_dist, _)) => (binary && !b_bin) || (binary == b_bin && dist > b_dist + 1e-12),
            };
            if better {
                best = Some((binary, dist, j));
            }
        }
        best.map(|b| b.2)
    }

    /// Rounds integer columns, polishing continuous ones with an LP when the
    /// plain rounding leaves residuals. The polish LP is cold-started: with
    /// every integer column fixed it is small, while a warm start from the
    /// node basis tends to be badly conditioned and degenerate.
    fn try_candidate(&mut self, lp: &LpProblem, x: &[f64], lo: &[f64], hi: &[f64]) -> Result<bool> {
        let mut vals = x.to_vec();
        for &j in &self.integral {
            vals[j] = vals[j].round().clamp(lo[j], hi[j]);
        }
        if self.model.max_violation(&vals) > 1e-6 {
            let (mut flo, mut fhi) = (lo.to_vec(), hi.to_vec());
            for &j in &self.integral {
                flo[j] = vals[j];
                fhi[j] = vals[j];
            }
            let mut simplex = Simplex::new(lp)?;
            simplex.deadline = self.deadline();
            simplex.set_bounds(&flo, &fhi);
            if !matches!(simplex.solve(), Ok(Outcome::Optimal)) {
                return Ok(false);
            }
            vals = simplex.solution();
            for &j in &self.integral {
                vals[j] = vals[j].round();
            }
            if self.model.max_violation(&vals) > 1e-6 {
                return Ok(false);
            }
        }
        let obj = self.sign * self.model.objective_value(&vals);
        if obj < self.cutoff() {
            self.incumbent = Some((obj, vals));
            return Ok(true);
        }
        Ok(false)
    }
}

/// Branch-and-bound on `model`. Events are passed to `sink` in order and also
/// collected in the result.
pub fn solve_mip(model: &MipModel, config: &SolveConfig, sink: &mut dyn FnMut(&SolveEvent)) -> Result<MipResult> {
    solve_mip_with(model, config, &mut NoAids, sink)
}

/// [`solve_mip`] with cuts and hints from `aids`.
pub fn solve_mip_with(
    model: &MipModel,
    config: &SolveConfig,
    aids: &mut dyn SearchAids,
    sink: &mut dyn FnMut(&SolveEvent),
) -> Result<MipResult> {
    config.validate()?;
    let sign = match model.objective().sense {
        Sense::Minimize => 1.0,
        Sense::Maximize => -1.0,
    };
    let mut lp = LpProblem::from_model(model);
    let mut root_lo = lp.lower.clone();
    let mut root_hi = lp.upper.clone();
    let integral: Vec<usize> =
        model.variables().iter().enumerate().filter(|(_, v)| v.kind.is_integral()).map(|(j, _)| j).collect();
    for &j in &integral {
        root_lo[j] = root_lo[j].ceil();
        root_hi[j] = root_hi[j].floor();
    }
    let mut search = Search {
        model,
        config,
        sink,
        sign,
        start: Instant::now(),
        integral,
        root_lo: root_lo.clone(),
        root_hi: root_hi.clone(),
        plain: lp.clone(),
        arena: Vec::new(),
        incumbent: None,
        reported_gap: 1.0,
        reported_bound: f64::NEG_INFINITY,
        crossed: 0,
        events: Vec::new(),
    };
    if root_lo.iter().zip(&root_hi).any(|(l, h)| l > h) {
        return Ok(finish(search, MipStatus::Infeasible, f64::INFINITY, 0));
    }
    let mut simplex = Simplex::new(&lp)?;
    simplex.deadline = search.deadline();
    simplex.set_bounds(&root_lo, &root_hi);

    // Cut rounds at the root, until nothing is violated or the bound stalls.
    let mut last = f64::NEG_INFINITY;
    let mut stalled = 0;
    for _ in 0..CUT_ROUNDS {
        if search.resolve(&mut simplex, &lp, &root_lo, &root_hi)? != Outcome::Optimal {
            break;
        }
        let obj = simplex.objective();
        if obj > last + 1e-6 * obj.abs().max(1.0) {
            stalled = 0;
        } else {
            stalled += 1;
            if stalled >= CUT_STALL_ROUNDS {
                break;
            }
        }
        last = last.max(obj);
        let x = simplex.solution();
        let cuts: Vec<Cut> = aids.separate(&x).into_iter().filter(|c| c.violation(&x) > 1e-6).collect();
        if cuts.is_empty() {
            break;
        }
        let rows: Vec<_> = cuts.into_iter().map(|c| (c.terms, c.lo, c.hi)).collect();
        add_cuts(&mut simplex, &mut lp, rows)?;
    }

    let root_state = (search.resolve(&mut simplex, &lp, &root_lo, &root_hi)? == Outcome::Optimal).then(|| simplex.clone());
    for hint in aids.hints() {
        if search.out_of_time() {
            break;
        }
        if search.complete(&mut simplex, &lp, &hint)? {
            search.emit(EventKind::NewIncumbent, last);
        }
    }
    let mut fixed_for = None;

    let mut heap = BinaryHeap::new();
    let mut seq = 0usize;
    heap.push(Open { bound: f64::NEG_INFINITY, seq, node: None });
    let mut nodes = 0usize;
    let mut status = None;

    'outer: while let Some(open) = heap.pop() {
        if open.bound >= search.cutoff() {
            continue;
        }
        if let (Some(root), Some(inc)) = (&root_state, search.inc_value()) {
            if fixed_for != Some(inc) {
                fixed_for = Some(inc);
                search.fix_by_reduced_cost(root);
            }
        }
        let mut cur = open.node;
        let mut dive_root_bound: Option<f64> = None;
        let mut last_fractional: Option<(Vec<f64>, Vec<f64>, Vec<f64>)> = None;
        loop {
            if search.out_of_time() {
                heap.push(Open { bound: dive_root_bound.unwrap_or(open.bound), seq: usize::MAX, node: cur });
                status = Some(MipStatus::TimeLimit);
                break 'outer;
            }
            if config.node_limit.is_some_and(|l| nodes >= l) {
                heap.push(Open { bound: dive_root_bound.unwrap_or(open.bound), seq: usize::MAX, node: cur });
                status = Some(MipStatus::NodeLimit);
                break 'outer;
            }
            nodes += 1;
            let (lo, hi) = search.bounds_of(cur);
            match search.resolve(&mut simplex, &lp, &lo, &hi)? {
                Outcome::Interrupted => {
                    heap.push(Open { bound: dive_root_bound.unwrap_or(open.bound), seq: usize::MAX, node: cur });
                    status = Some(MipStatus::TimeLimit);
                    break 'outer;
                }
                Outcome::Infeasible => break,
                Outcome::Unbounded => {
                    status = Some(MipStatus::Unbounded);
                    break 'outer;
                }
                Outcome::Optimal => {}
            }
            let obj = simplex.objective();
            if dive_root_bound.is_none() {
                dive_root_bound = Some(obj);
                let global = heap.peek().map_or(obj, |o| o.bound.min(obj));
                if global > search.reported_bound + 1e-9 * global.abs().max(1.0) || nodes == 1 {
                    search.emit(EventKind::BoundImproved, global);
                }
            }
            if obj >= search.cutoff() {
                break;
            }
            let x = simplex.solution();
            let Some(j) = search.fractional_var(&x) else {
                if search.try_candidate(&lp, &x, &lo, &hi)? {
                    let global = heap.peek().map_or(dive_root_bound.unwrap_or(obj), |o| {
                        o.bound.min(dive_root_bound.unwrap_or(obj))
                    });
                    search.emit(EventKind::NewIncumbent, global);
                    if search.reported_gap <= config.target_gap {
                        status = Some(if search.reported_gap <= 0.0 { MipStatus::Optimal } else { MipStatus::GapReached });
                        break 'outer;
                    }
                }
                last_fractional = None;
                break;
            };
            let v = x[j];
            let down = NodeRec { parent: cur, var: j, lo: f64::NEG_INFINITY, hi: v.floor() };
            let up = NodeRec { parent: cur, var: j, lo: v.ceil(), hi: f64::INFINITY };
            let go_up = v - v.floor() >= 0.5;
            let (dive, other) = if go_up { (up, down) } else { (down, up) };
            search.arena.push(other);
            seq += 1;
            heap.push(Open { bound: obj, seq, node: Some(search.arena.len() - 1) });
            search.arena.push(dive);
            cur = Some(search.arena.len() - 1);
            last_fractional = Some((x, lo, hi));
        }
        if let Some((x, lo, hi)) = last_fractional {
            if search.try_candidate(&lp, &x, &lo, &hi)? {
                let global = heap.peek().map_or(dive_root_bound.unwrap_or(f64::INFINITY), |o| {
                    o.bound.min(dive_root_bound.unwrap_or(f64::INFINITY))
                });
                search.emit(EventKind::NewIncumbent, global);
            }
        }
        if let Some(inc) = search.inc_value() {
            let global = heap.peek().map_or(inc, |o| o.bound.min(inc));
            if search.user_gap(global) <= config.target_gap + 1e-12 && config.target_gap > 0.0 {
                search.emit(EventKind::BoundImproved, global);
                status = Some(MipStatus::GapReached);
                break 'outer;
            }
        }
    }
    let status = match status {
        Some(s) => s,
        None if search.incumbent.is_some() => MipStatus::Optimal,
        None => MipStatus::Infeasible,
    };
    let bound = match status {
        MipStatus::Optimal => search.inc_value().unwrap_or(f64::INFINITY),
        MipStatus::Infeasible => f64::INFINITY,
        MipStatus::Unbounded => f64::NEG_INFINITY,
        _ => {
            let open_min = heap.iter().map(|o| o.bound).fold(f64::INFINITY, f64::min);
            match search.inc_value() {
                Some(v) => open_min.min(v),
                None => open_min,
            }
        }
    };
    Ok(finish(search, status, bound, nodes))
}

fn add_cuts(simplex: &mut Simplex, lp: &mut LpProblem, rows: Vec<(Vec<(usize, f64)>, f64, f64)>) -> Result<()> {
    simplex.add_rows(&rows)?;
    for (terms, lo, hi) in rows {
        lp.rows.push(terms);
        lp.row_lo.push(lo);
        lp.row_hi.push(hi);
    }
    Ok(())
}

fn finish(mut search: Search<'_>, status: MipStatus, bound: f64, nodes: usize) -> MipResult {
    if status == MipStatus::Optimal {
        search.reported_gap = 0.0;
    }
    search.emit(EventKind::Done, bound);
    let sign = search.sign;
    let (objective, values) = match search.incumbent.take() {
        Some((v, x)) => (Some(sign * v), Some(x)),
        None => (None, None),
    };
    MipResult {
        status,
        values,
        objective,
        bound: sign * search.reported_bound,
        gap: search.reported_gap,
        nodes,
        events: search.events,
    }
}
