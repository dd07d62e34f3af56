//! Domain types shared across the crate and evaluation of the two tour
//! objectives (total time and total reward) on a concrete plan.

use std::collections::{BTreeSet, HashMap};

use crate::curves::{self, PwlCurve, SampledCurve};
use crate::error::{Error, Result};

/// 1-based POI index.
pub type PoiId = usize;

/// Learning curve `f_i`: maps stay duration to the fraction of the maximum
/// reward collected.
#[derive(Debug, Clone, PartialEq)]
pub enum CurveSpec {
    /// `min(rate * t, 1)`.
    Linear { rate: f64 },
    /// `1 - exp(-rate * t)`.
    Exponential { rate: f64 },
    Pwl(PwlCurve),
    Sampled(SampledCurve),
}

impl CurveSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            CurveSpec::Linear { rate } | CurveSpec::Exponential { rate } => {
                if !(rate.is_finite() && *rate > 0.0) {
                    return Err(Error::InvalidCurve(format!("rate must be positive, got {rate}")));
                }
                Ok(())
            }
            // Both are validated on construction.
            CurveSpec::Pwl(_) | CurveSpec::Sampled(_) => Ok(()),
        }
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        curves::eval_curve(self, t)
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            CurveSpec::Linear { .. } => "linear",
            CurveSpec::Exponential { .. } => "exponential",
            CurveSpec::Pwl(_) => "pwl",
            CurveSpec::Sampled(_) => "sampled",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Poi {
    pub id: PoiId,
    pub name: Option<String>,
    /// Maximum reward `r_i`.
    pub max_reward: f64,
    pub curve: CurveSpec,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub from: PoiId,
    pub to: PoiId,
    pub length: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    /// Reward-maximizing tourist.
    Rmt,
    /// Budget-minimizing tourist.
    Bmt,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Rmt => "rmt",
            Mode::Bmt => "bmt",
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rmt" => Ok(Mode::Rmt),
            "bmt" => Ok(Mode::Bmt),
            other => Err(Error::Schema(format!("unknown mode `{other}` (expected rmt or bmt)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Problem {
    /// Maximize reward subject to total time `<= budget`.
    Rmt { budget: f64 },
    /// Minimize total time subject to reward `>= requirement`.
    Bmt { requirement: f64 },
}

impl Problem {
    pub fn mode(&self) -> Mode {
        match self {
            Problem::Rmt { .. } => Mode::Rmt,
            Problem::Bmt { .. } => Mode::Bmt,
        }
    }

    pub fn value(&self) -> f64 {
        match *self {
            Problem::Rmt { budget } => budget,
            Problem::Bmt { requirement } => requirement,
        }
    }
}

/// Provenance recorded by generators.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Meta {
    pub seed: Option<u64>,
    pub generator: Option<String>,
}

/// A tour-planning instance: POIs `V`, bases `B`, directed edges `D`, rewards,
/// curves and the problem constraint.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pois: Vec<Poi>,
    bases: Vec<PoiId>,
    edges: Vec<Edge>,
    pub problem: Problem,
    pub meta: Meta,
}

impl Instance {
    /// Validates and normalizes (POIs sorted by id, bases sorted).
    pub fn new(mut pois: Vec<Poi>, bases: Vec<PoiId>, edges: Vec<Edge>, problem: Problem) -> Result<Self> {
        if pois.is_empty() {
            return Err(Error::InvalidInstance("instance has no POIs".into()));
        }
        pois.sort_by_key(|p| p.id);
        for (idx, poi) in pois.iter().enumerate() {
            if poi.id != idx + 1 {
                return Err(Error::InvalidInstance(format!(
                    "POI ids must be exactly 1..={}, found id {} at position {}",
                    pois.len(),
                    poi.id,
                    idx + 1
                )));
            }
            if !(poi.max_reward.is_finite() && poi.max_reward >= 0.0) {
                return Err(Error::InvalidInstance(format!(
                    "POI {} has invalid max reward {}",
                    poi.id, poi.max_reward
                )));
            }
            poi.curve
                .validate()
                .map_err(|e| Error::InvalidInstance(format!("POI {}: {e}", poi.id)))?;
        }
        let n = pois.len();
        if bases.is_empty() {
            return Err(Error::InvalidInstance("base set is empty".into()));
        }
        let base_set: BTreeSet<PoiId> = bases.iter().copied().collect();
        if base_set.len() != bases.len() {
            return Err(Error::InvalidInstance("duplicate base ids".into()));
        }
        if let Some(&bad) = base_set.iter().find(|&&b| b == 0 || b > n) {
            return Err(Error::InvalidInstance(format!("base {bad} is not a POI id")));
        }
        let mut seen = BTreeSet::new();
        for e in &edges {
            if e.from == 0 || e.from > n || e.to == 0 || e.to > n {
                return Err(Error::InvalidInstance(format!(
                    "edge {} -> {} references an unknown POI",
                    e.from, e.to
                )));
            }
            if e.from == e.to {
                return Err(Error::InvalidInstance(format!("self-loop edge at {}", e.from)));
            }
            if !(e.length.is_finite() && e.length > 0.0) {
                return Err(Error::InvalidInstance(format!(
                    "edge {} -> {} has non-positive length {}",
                    e.from, e.to, e.length
                )));
            }
            if !seen.insert((e.from, e.to)) {
                return Err(Error::InvalidInstance(format!(
                    "duplicate directed edge {} -> {}",
                    e.from, e.to
                )));
            }
        }
        match problem {
            Problem::Rmt { budget: v } | Problem::Bmt { requirement: v } if !(v.is_finite() && v >= 0.0) => {
                return Err(Error::InvalidInstance(format!("problem constraint {v} must be finite and >= 0")));
            }
            _ => {}
        }
        Ok(Self {
            pois,
            bases: base_set.into_iter().collect(),
            edges,
            problem,
            meta: Meta::default(),
        })
    }

    pub fn with_meta(mut self, meta: Meta) -> Self {
        self.meta = meta;
        self
    }

    pub fn with_problem(mut self, problem: Problem) -> Self {
        self.problem = problem;
        self
    }

    pub fn n(&self) -> usize {
        self.pois.len()
    }

    pub fn pois(&self) -> &[Poi] {
        &self.pois
    }

    pub fn poi(&self, id: PoiId) -> &Poi {
        &self.pois[id - 1]
    }

    pub fn bases(&self) -> &[PoiId] {
        &self.bases
    }

    pub fn is_base(&self, id: PoiId) -> bool {
        self.bases.binary_search(&id).is_ok()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn total_max_reward(&self) -> f64 {
        self.pois.iter().map(|p| p.max_reward).sum()
    }

    /// Map from `(from, to)` to edge length.
    pub fn edge_map(&self) -> HashMap<(PoiId, PoiId), f64> {
        self.edges.iter().map(|e| ((e.from, e.to), e.length)).collect()
    }

    /// Copy of this instance with every curve replaced.
    pub fn with_curves(&self, curves: Vec<CurveSpec>) -> Result<Self> {
        assert_eq!(curves.len(), self.n(), "one curve per POI");
        let pois = self
            .pois
            .iter()
            .zip(curves)
            .map(|(p, curve)| Poi { curve, ..p.clone() })
            .collect();
        Ok(Instance::new(pois, self.bases.clone(), self.edges.clone(), self.problem)?.with_meta(self.meta.clone()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stay {
    pub poi: PoiId,
    pub duration: f64,
}

/// A decoded plan: ordered stays, the expanded vertex walk, and its
/// evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct Itinerary {
    pub stays: Vec<Stay>,
    /// Full vertex sequence, including pass-through POIs.
    pub walk: Vec<PoiId>,
    pub start_base: PoiId,
    pub total_time: f64,
    /// Reward under the curves the plan was optimized against.
    pub model_reward: f64,
    /// Reward under the instance's original curves.
    pub true_reward: f64,
}

impl Itinerary {
    /// Plan that never leaves `base`.
    pub fn stay_home(base: PoiId) -> Self {
        Self {
            stays: Vec::new(),
            walk: vec![base],
            start_base: base,
            total_time: 0.0,
            model_reward: 0.0,
            true_reward: 0.0,
        }
    }

    /// Fills `total_time` and `true_reward` from the instance.
    pub fn evaluated(mut self, instance: &Instance) -> Result<Self> {
        self.total_time = eval_total_time(instance, &self)?;
        self.true_reward = eval_total_reward(instance, &self)?;
        Ok(self)
    }

    pub fn travel_time(&self, instance: &Instance) -> Result<f64> {
        walk_length(&instance.edge_map(), &self.walk)
    }
}

fn walk_length(edges: &HashMap<(PoiId, PoiId), f64>, walk: &[PoiId]) -> Result<f64> {
    walk.windows(2)
        .map(|w| {
            edges
                .get(&(w[0], w[1]))
                .copied()
                .ok_or(Error::MissingEdge { from: w[0], to: w[1] })
        })
        .sum()
}

/// Total time: every traversed edge (with repetition) plus every stay.
pub fn eval_total_time(instance: &Instance, itinerary: &Itinerary) -> Result<f64> {
    let travel = walk_length(&instance.edge_map(), &itinerary.walk)?;
    let stays: f64 = itinerary.stays.iter().map(|s| s.duration).sum();
    Ok(travel + stays)
}

/// Total reward `sum r_i f_i(t_i)` under the instance's curves.
pub fn eval_total_reward(instance: &Instance, itinerary: &Itinerary) -> Result<f64> {
    eval_reward_with(instance.pois(), &itinerary.stays, |poi| &instance.poi(poi).curve)
}

/// Total reward under an arbitrary curve set (e.g. approximated curves).
pub fn eval_reward_with<'a>(
    pois: &[Poi],
    stays: &[Stay],
    curve_of: impl Fn(PoiId) -> &'a CurveSpec,
) -> Result<f64> {
    let mut total = 0.0;
    for stay in stays {
        if stay.duration < 0.0 || stay.duration.is_nan() {
            return Err(Error::NegativeDuration { poi: stay.poi, duration: stay.duration });
        }
        if stay.poi == 0 || stay.poi > pois.len() {
            return Err(Error::VertexOutOfRange(stay.poi));
        }
        total += pois[stay.poi - 1].max_reward * curves::eval_curve(curve_of(stay.poi), stay.duration)?;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_poi(curve: CurveSpec, reward: f64) -> Instance {
        let pois = vec![
            Poi { id: 1, name: None, max_reward: 0.0, curve: CurveSpec::Linear { rate: 1.0 } },
            Poi { id: 2, name: None, max_reward: reward, curve },
        ];
        let edges = vec![
            Edge { from: 1, to: 2, length: 1.0 },
            Edge { from: 2, to: 1, length: 1.0 },
        ];
        Instance::new(pois, vec![1], edges, Problem::Rmt { budget: 10.0 }).unwrap()
    }

    fn plan(stays: &[(PoiId, f64)], walk: &[PoiId]) -> Itinerary {
        Itinerary {
            stays: stays.iter().map(|&(poi, duration)| Stay { poi, duration }).collect(),
            walk: walk.to_vec(),
            start_base: walk[0],
            total_time: 0.0,
            model_reward: 0.0,
            true_reward: 0.0,
        }
    }

    #[test]
    fn empty_plan_costs_nothing() {
        let pois = vec![Poi { id: 1, name: None, max_reward: 3.0, curve: CurveSpec::Linear { rate: 1.0 } }];
        let inst = Instance::new(pois, vec![1], vec![], Problem::Rmt { budget: 1.0 }).unwrap();
        let it = Itinerary::stay_home(1);
        assert_eq!(eval_total_time(&inst, &it).unwrap(), 0.0);
        assert_eq!(eval_total_reward(&inst, &it).unwrap(), 0.0);
    }

    #[test]
    fn round_trip_with_stay() {
        let inst = two_poi(CurveSpec::Linear { rate: 0.5 }, 10.0);
        let it = plan(&[(2, 1.0)], &[1, 2, 1]);
        assert_eq!(eval_total_time(&inst, &it).unwrap(), 3.0);
        assert_eq!(eval_total_reward(&inst, &it).unwrap(), 5.0);
    }

    #[test]
    fn exponential_reward() {
        let inst = two_poi(CurveSpec::Exponential { rate: 1.0 }, 1.0);
        let it = plan(&[(2, 1.0)], &[1, 2, 1]);
        let r = eval_total_reward(&inst, &it).unwrap();
        assert!((r - (1.0 - (-1.0f64).exp())).abs() < 1e-12);
        assert!((r - 0.632121).abs() < 1e-6);
    }

    #[test]
    fn missing_edge_is_named() {
        let inst = two_poi(CurveSpec::Linear { rate: 0.5 }, 10.0);
        let it = plan(&[], &[1, 2, 2]);
        assert_eq!(eval_total_time(&inst, &it), Err(Error::MissingEdge { from: 2, to: 2 }));
    }

    #[test]
    fn negative_duration_rejected() {
        let inst = two_poi(CurveSpec::Linear { rate: 0.5 }, 10.0);
        let it = plan(&[(2, -0.5)], &[1, 2, 1]);
        assert!(matches!(eval_total_reward(&inst, &it), Err(Error::NegativeDuration { poi: 2, .. })));
    }

    #[test]
    fn instance_validation() {
        let poi = |id| Poi { id, name: None, max_reward: 1.0, curve: CurveSpec::Linear { rate: 1.0 } };
        let p = Problem::Rmt { budget: 1.0 };
        assert!(Instance::new(vec![poi(1), poi(3)], vec![1], vec![], p).is_err());
        assert!(Instance::new(vec![poi(1)], vec![], vec![], p).is_err());
        assert!(Instance::new(vec![poi(1)], vec![2], vec![], p).is_err());
        let dup = vec![Edge { from: 1, to: 2, length: 1.0 }, Edge { from: 1, to: 2, length: 2.0 }];
        assert!(Instance::new(vec![poi(1), poi(2)], vec![1], dup, p).is_err());
        let zero = vec![Edge { from: 1, to: 2, length: 0.0 }];
        assert!(Instance::new(vec![poi(1), poi(2)], vec![1], zero, p).is_err());
        // Ordering of the input list is immaterial.
        let inst = Instance::new(vec![poi(2), poi(1)], vec![1], vec![], p).unwrap();
        assert_eq!(inst.poi(2).id, 2);
    }
}
