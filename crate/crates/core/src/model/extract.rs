use std::collections::BTreeMap;

use crate::domain::{Instance, Itinerary, PoiId, Problem, Stay};
use crate::error::{Error, Result};
use crate::graph::{reconstruct_path, transitive_closure, ClosedGraph, GadgetKind};

use super::{MipModel, Role, VarKind};

const BIN_TOL: f64 = 1e-6;
const ROW_TOL: f64 = 1e-6;

fn check_len(model: &MipModel, x: &[f64]) -> Result<()> {
    if x.len() != model.num_vars() {
        return Err(Error::Decode(format!("assignment has {} values for {} variables", x.len(), model.num_vars())));
    }
    Ok(())
}

fn is_one(model: &MipModel, x: &[f64], j: usize) -> Result<bool> {
    let v = x[j];
    if (v - v.round()).abs() > BIN_TOL {
        return Err(Error::Decode(format!("binary `{}` is fractional ({v})", model.variables()[j].name)));
    }
    Ok(v.round() == 1.0)
}

struct Tour {
    start: PoiId,
    stops: Vec<PoiId>,
    closes: bool,
}

/// Follows successor edges from `start`; fails if some used edge is not on
/// the walk (the assignment holds more than one cycle).
fn follow(start: PoiId, succ: &BTreeMap<PoiId, PoiId>, used: usize, n: usize) -> Result<Tour> {
    let mut stops = Vec::new();
    let mut cur = start;
    let mut closes = false;
    let mut steps = 0;
    while let Some(&next) = succ.get(&cur) {
        steps += 1;
        if steps > n + 1 {
            return Err(Error::Decode("successor chain does not terminate".into()));
        }
        if next == start {
            closes = true;
            break;
        }
        if stops.contains(&next) {
            return Err(Error::Decode(format!("walk revisits POI {next}")));
        }
        stops.push(next);
        cur = next;
    }
    if steps != used {
        return Err(Error::Decode(format!(
            "assignment uses {used} edges but the tour from base {start} covers {steps}; it contains more than one cycle"
        )));
    }
    Ok(Tour { start, stops, closes })
}

fn successors(model: &MipModel, x: &[f64], tour: Option<usize>) -> Result<(BTreeMap<PoiId, PoiId>, usize)> {
    let mut succ = BTreeMap::new();
    let mut used = 0;
    for (j, role) in model.roles().iter().enumerate() {
        if let Role::EdgeUse { from, to, tour: t } = *role {
            if t == tour && is_one(model, x, j)? {
                used += 1;
                if succ.insert(from, to).is_some() {
                    return Err(Error::Decode(format!("POI {from} has two successors")));
                }
            }
        }
    }
    Ok((succ, used))
}

fn expand(closed: &ClosedGraph, tour: &Tour) -> Result<Vec<PoiId>> {
    let mut seq = vec![tour.start];
    seq.extend(&tour.stops);
    if tour.closes {
        seq.push(tour.start);
    }
    let mut walk = vec![tour.start];
    for w in seq.windows(2) {
        let path = reconstruct_path(closed, w[0], w[1])?;
        walk.extend_from_slice(&path[1..]);
    }
    Ok(walk)
}

fn build_itinerary(
    instance: &Instance,
    closed: &ClosedGraph,
    tour: &Tour,
    duration: impl Fn(PoiId) -> f64,
    reward: impl Fn(PoiId) -> f64,
) -> Result<Itinerary> {
    let mut stays = Vec::new();
    let start_t = duration(tour.start);
    if start_t > 1e-9 {
        stays.push(Stay { poi: tour.start, duration: start_t });
    }
    for &p in &tour.stops {
        if p != tour.start {
            stays.push(Stay { poi: p, duration: duration(p).max(0.0) });
        }
    }
    let model_reward = stays.iter().map(|s| reward(s.poi)).sum();
    let it = Itinerary {
        stays,
        walk: expand(closed, tour)?,
        start_base: tour.start,
        total_time: 0.0,
        model_reward,
        true_reward: 0.0,
    };
    it.evaluated(instance)
}

fn value_by_role(model: &MipModel, x: &[f64], role: Role) -> f64 {
    model.find_role(role).map_or(0.0, |j| x[j])
}

/// Decodes a single-tour assignment into an itinerary.
pub fn extract_itinerary(instance: &Instance, closed: &ClosedGraph, model: &MipModel, assignment: &[f64]) -> Result<Itinerary> {
    check_len(model, assignment)?;
    if model.roles().iter().any(|r| matches!(r, Role::EdgeUse { tour: Some(_), .. })) {
        return Err(Error::Decode("multi-tour assignment; use extract_itineraries".into()));
    }
    for (j, v) in model.variables().iter().enumerate() {
        if v.kind == VarKind::Binary {
            is_one(model, assignment, j)?;
        }
    }
    let mut start = None;
    let mut gadgets = false;
    for (j, role) in model.roles().iter().enumerate() {
        if let Role::Gadget { base, kind: GadgetKind::OriginOut } = *role {
            gadgets = true;
            if is_one(model, assignment, j)? {
                if start.is_some() {
                    return Err(Error::Decode("more than one base selected".into()));
                }
                start = Some(base);
            }
        }
    }
    let start = match (gadgets, start) {
        (false, _) => instance.bases()[0],
        (true, Some(b)) => b,
        (true, None) => return Err(Error::Decode("no base selected".into())),
    };
    let (succ, used) = successors(model, assignment, None)?;
    let tour = follow(start, &succ, used, instance.n())?;
    build_itinerary(
        instance,
        closed,
        &tour,
        |p| value_by_role(model, assignment, Role::StayTime { poi: p, tour: None }),
        |p| value_by_role(model, assignment, Role::Reward { poi: p }),
    )
}

/// Decodes a multi-tour assignment, one itinerary per tour.
pub fn extract_itineraries(
    instance: &Instance,
    closed: &ClosedGraph,
    model: &MipModel,
    assignment: &[f64],
) -> Result<Vec<Itinerary>> {
    check_len(model, assignment)?;
    let tours: usize = model
        .roles()
        .iter()
        .filter_map(|r| match r {
            Role::EdgeUse { tour: Some(k), .. } | Role::TourStart { tour: Some(k), .. } => Some(k + 1),
            _ => None,
        })
        .max()
        .unwrap_or(0);
    if tours == 0 {
        return Ok(vec![extract_itinerary(instance, closed, model, assignment)?]);
    }
    let mut out = Vec::with_capacity(tours);
    for k in 0..tours {
        let mut start = None;
        for (j, role) in model.roles().iter().enumerate() {
            if let Role::TourStart { base, tour: Some(t) } = *role {
                if t == k && is_one(model, assignment, j)? {
                    start = Some(base);
                }
            }
        }
        let start = start.ok_or_else(|| Error::Decode(format!("tour {k} has no start base")))?;
        let (succ, used) = successors(model, assignment, Some(k))?;
        let tour = follow(start, &succ, used, instance.n())?;
        let it = build_itinerary(
            instance,
            closed,
            &tour,
            |p| value_by_role(model, assignment, Role::StayTime { poi: p, tour: Some(k) }),
            |p| value_by_role(model, assignment, Role::Reward { poi: p }),
        )?;
        out.push(it);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    Length { expected: usize, got: usize },
    Row { name: String, amount: f64 },
    Bound { name: String, value: f64 },
    Integrality { name: String, value: f64 },
    Tour(String),
    Budget { used: f64, limit: f64 },
    Requirement { reward: f64, required: f64 },
}

/// Re-checks every row, bound and integrality requirement, the tour
/// structure, and the budget or requirement. An empty list means valid.
pub fn validate_assignment(instance: &Instance, model: &MipModel, assignment: &[f64]) -> Vec<Violation> {
    if assignment.len() != model.num_vars() {
        return vec![Violation::Length { expected: model.num_vars(), got: assignment.len() }];
    }
    let mut out = Vec::new();
    for c in model.constraints() {
        let v = c.violation(assignment);
        if v > ROW_TOL * c.rhs.abs().max(1.0) {
            out.push(Violation::Row { name: c.name.clone(), amount: v });
        }
    }
    for (v, &x) in model.variables().iter().zip(assignment) {
        if x < v.lower - ROW_TOL || x > v.upper + ROW_TOL {
            out.push(Violation::Bound { name: v.name.clone(), value: x });
        }
        if v.kind.is_integral() && (x - x.round()).abs() > BIN_TOL {
            out.push(Violation::Integrality { name: v.name.clone(), value: x });
        }
    }
    if out.iter().any(|v| matches!(v, Violation::Integrality { .. })) {
        return out;
    }
    let closed = transitive_closure(instance);
    let decoded = extract_itineraries(instance, &closed, model, assignment);
    if let Err(e) = decoded { out.push(Violation::Tour(e.to_string())) }
    let mut travel = 0.0;
    let mut stay = 0.0;
    let mut reward = 0.0;
    for (role, &x) in model.roles().iter().zip(assignment) {
        match *role {
            Role::EdgeUse { from, to, tour: None } => travel += x.round() * closed.dist(from, to),
            Role::StayTime { tour: None, .. } => stay += x,
            Role::Reward { .. } => reward += x,
            _ => {}
        }
    }
    match instance.problem {
        Problem::Rmt { budget } => {
            if travel + stay > budget + ROW_TOL * budget.max(1.0) {
                out.push(Violation::Budget { used: travel + stay, limit: budget });
            }
        }
        Problem::Bmt { requirement } => {
            if reward < requirement - ROW_TOL * requirement.max(1.0) {
                out.push(Violation::Requirement { reward, required: requirement });
            }
        }
    }
    out
}
