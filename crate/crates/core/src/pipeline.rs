//! End-to-end planning: closure, curve approximation, model, solve, decode.

use crate::aids::TourAids;
use crate::curves::{approximate, compact, monotonize, Flavor, PwlCurve};
use crate::domain::{CurveSpec, Instance, Itinerary, PoiId, Problem};
use crate::error::{Error, Result};
use crate::graph::{transitive_closure, ClosedGraph};
use crate::model::{build, extract_itineraries, BuildOptions, MipModel, Tours};
use crate::solver::{solve_mip_with, MipResult, MipStatus, NoAids, SearchAids, SolveConfig, SolveEvent};

#[derive(Debug, Clone, PartialEq)]
pub struct PlanOptions {
    /// Overall approximation target.
    pub epsilon: f64,
    /// Overrides the flavor chosen from the problem (band for RMT, upper for
    /// BMT).
    pub flavor: Option<Flavor>,
    /// Approximation error handed to the curve construction. Defaults to
    /// `epsilon / 2` for band and `epsilon` for upper.
    pub curve_epsilon: Option<f64>,
    pub build: BuildOptions,
    pub solve: SolveConfig,
    /// Hand connectivity cuts and starting routes to the solver.
    pub search_aids: bool,
}

impl Default for PlanOptions {
    fn default() -> Self {
        Self { epsilon: 0.05, flavor: None, curve_epsilon: None, build: BuildOptions::default(), solve: SolveConfig::default(), search_aids: true }
    }
}

impl PlanOptions {
    pub fn flavor_for(&self, problem: &Problem) -> Flavor {
        self.flavor.unwrap_or(match problem {
            Problem::Rmt { .. } => Flavor::Band,
            Problem::Bmt { .. } => Flavor::Upper,
        })
    }

    pub fn curve_epsilon_for(&self, problem: &Problem) -> f64 {
        self.curve_epsilon.unwrap_or(match self.flavor_for(problem) {
            Flavor::Band => self.epsilon / 2.0,
            Flavor::Upper => self.epsilon,
        })
    }
}

/// Everything needed before the solve.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub closed: ClosedGraph,
    /// Curve specs after monotonization of sampled curves.
    pub specs: Vec<CurveSpec>,
    pub curves: Vec<PwlCurve>,
    pub model: MipModel,
    pub cyclic: bool,
}

#[derive(Debug, Clone)]
pub struct Plan {
    pub itineraries: Vec<Itinerary>,
    pub result: MipResult,
}

impl Plan {
    pub fn itinerary(&self) -> &Itinerary {
        &self.itineraries[0]
    }

    /// Sum of true rewards over all tours.
    pub fn true_reward(&self) -> f64 {
        self.itineraries.iter().map(|i| i.true_reward).sum()
    }

    /// Sum of total times over all tours.
    pub fn total_time(&self) -> f64 {
        self.itineraries.iter().map(|i| i.total_time).sum()
    }
}

/// Replaces sampled curves that decrease somewhere by their running maximum.
pub fn monotone_specs(instance: &Instance) -> Vec<CurveSpec> {
    instance
        .pois()
        .iter()
        .map(|p| match &p.curve {
            CurveSpec::Sampled(s) if !s.is_non_decreasing() => CurveSpec::Sampled(monotonize(s)),
            c => c.clone(),
        })
        .collect()
}

pub fn approximate_curves(specs: &[CurveSpec], eps: f64, flavor: Flavor) -> Result<Vec<PwlCurve>> {
    specs
        .iter()
        .map(|s| {
            let full = approximate(s, eps, flavor)?;
            compact(s, &full, eps, flavor)
        })
        .collect()
}

/// Largest total reward a plan could collect, ignoring time: the POIs one
/// tour from the best base can visit, or every POI some base can serve
/// when there are several tours.
pub fn attainable_reward(instance: &Instance, closed: &ClosedGraph, build: &BuildOptions) -> f64 {
    let bases = instance.bases();
    let served = |b: PoiId, v: PoiId| {
        v == b
            || (closed.reachable(b, v)
                && if build.cyclic { closed.reachable(v, b) } else { bases.iter().any(|&e| closed.reachable(v, e)) })
    };
    let reward = |v: PoiId| instance.poi(v).max_reward;
    match build.tours {
        Tours::Single => bases
            .iter()
            .map(|&b| (1..=instance.n()).filter(|&v| served(b, v)).map(reward).sum::<f64>())
            .fold(0.0, f64::max),
        _ => (1..=instance.n()).filter(|&v| bases.iter().any(|&b| served(b, v))).map(reward).sum(),
    }
}

pub fn prepare(instance: &Instance, options: &PlanOptions) -> Result<Prepared> {
    let closed = transitive_closure(instance);
    if let Problem::Bmt { requirement } = instance.problem {
        let attainable = attainable_reward(instance, &closed, &options.build);
        if requirement > attainable + 1e-9 {
            return Err(Error::RequirementUnreachable { required: requirement, attainable });
        }
    }
    let specs = monotone_specs(instance);
    let flavor = options.flavor_for(&instance.problem);
    let curves = approximate_curves(&specs, options.curve_epsilon_for(&instance.problem), flavor)?;
    let model = build(instance, &closed, &curves, &options.build)?;
    Ok(Prepared { closed, specs, curves, model, cyclic: options.build.cyclic })
}

/// Search aids for a prepared model.
pub fn tour_aids(instance: &Instance, prepared: &Prepared) -> TourAids {
    TourAids::new(instance, &prepared.closed, &prepared.curves, &prepared.model, prepared.cyclic)
}

/// Solves a prepared model with its search aids and decodes the result.
/// Fails with `Infeasible` or `TimeLimitNoIncumbent` when there is nothing
/// to decode.
pub fn solve_prepared(
    instance: &Instance,
    prepared: &Prepared,
    config: &SolveConfig,
    sink: &mut dyn FnMut(&SolveEvent),
) -> Result<Plan> {
    let mut aids = tour_aids(instance, prepared);
    solve_prepared_with(instance, prepared, config, &mut aids, sink)
}

pub fn solve_prepared_with(
    instance: &Instance,
    prepared: &Prepared,
    config: &SolveConfig,
    aids: &mut dyn SearchAids,
    sink: &mut dyn FnMut(&SolveEvent),
) -> Result<Plan> {
    let result = solve_mip_with(&prepared.model, config, aids, sink)?;
    let Some(values) = &result.values else {
        return Err(match result.status {
            MipStatus::Infeasible => Error::Infeasible,
            MipStatus::TimeLimit | MipStatus::NodeLimit => Error::TimeLimitNoIncumbent,
            s => Error::Numerical(format!("solver stopped with status {s:?} and no solution")),
        });
    };
    let itineraries = extract_itineraries(instance, &prepared.closed, &prepared.model, values)?;
    Ok(Plan { itineraries, result })
}

pub fn plan(instance: &Instance, options: &PlanOptions, sink: &mut dyn FnMut(&SolveEvent)) -> Result<Plan> {
    let prepared = prepare(instance, options)?;
    if options.search_aids {
        solve_prepared(instance, &prepared, &options.solve, sink)
    } else {
        solve_prepared_with(instance, &prepared, &options.solve, &mut NoAids, sink)
    }
}
