//! Instance generators, POI-table ingestion and the JSON instance document.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::curves::{PwlCurve, SampledCurve};
use crate::domain::{CurveSpec, Edge, Instance, Meta, Mode, Poi, PoiId, Problem};
use crate::error::{Error, Result};
use crate::graph::transitive_closure;

/// Curve family drawn by the generators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CurveKind {
    #[default]
    Linear,
    Exponential,
}

impl std::str::FromStr for CurveKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "linear" | "lin" => Ok(CurveKind::Linear),
            "exponential" | "exp" => Ok(CurveKind::Exponential),
            other => Err(Error::Schema(format!("unknown curve kind `{other}` (expected linear or exponential)"))),
        }
    }
}

fn curve_of(kind: CurveKind, rate: f64) -> CurveSpec {
    match kind {
        CurveKind::Linear => CurveSpec::Linear { rate },
        CurveKind::Exponential => CurveSpec::Exponential { rate },
    }
}

/// Bases at 1-based positions floor(n/3) and floor(2n/3), clamped into range.
pub fn default_bases(n: usize) -> Vec<PoiId> {
    let mut b: Vec<PoiId> = [n / 3, 2 * n / 3].iter().map(|&i| i.clamp(1, n)).collect();
    b.dedup();
    b
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub rows: usize,
    pub cols: usize,
    pub seed: u64,
    pub curve: CurveKind,
    pub mode: Mode,
}

impl GridSpec {
    pub fn new(rows: usize, cols: usize, seed: u64) -> Self {
        Self { rows, cols, seed, curve: CurveKind::Linear, mode: Mode::Rmt }
    }

    /// `2 ((rows - 1) + (cols - 1))`, the perimeter of the lattice's bounding
    /// rectangle.
    pub fn perimeter(&self) -> f64 {
        2.0 * ((self.rows - 1) + (self.cols - 1)) as f64
    }
}

/// POIs on the unit lattice, row-major, with 4-neighbor unit edges in both
/// directions. Budget 1.5 and requirement 0.6 times the perimeter.
pub fn gen_grid(spec: &GridSpec) -> Result<Instance> {
    if spec.rows < 2 || spec.cols < 2 {
        return Err(Error::InvalidInstance(format!("grid must be at least 2x2, got {}x{}", spec.rows, spec.cols)));
    }
    let n = spec.rows * spec.cols;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let pois = (1..=n)
        .map(|id| {
            let reward = rng.gen_range(1.0..2.0);
            let rate = rng.gen_range(1.0..2.0);
            Poi { id, name: None, max_reward: reward, curve: curve_of(spec.curve, rate) }
        })
        .collect();
    let id = |r: usize, c: usize| r * spec.cols + c + 1;
    let mut edges = Vec::new();
    for r in 0..spec.rows {
        for c in 0..spec.cols {
            if c + 1 < spec.cols {
                edges.push(Edge { from: id(r, c), to: id(r, c + 1), length: 1.0 });
                edges.push(Edge { from: id(r, c + 1), to: id(r, c), length: 1.0 });
            }
            if r + 1 < spec.rows {
                edges.push(Edge { from: id(r, c), to: id(r + 1, c), length: 1.0 });
                edges.push(Edge { from: id(r + 1, c), to: id(r, c), length: 1.0 });
            }
        }
    }
    let problem = match spec.mode {
        Mode::Rmt => Problem::Rmt { budget: 1.5 * spec.perimeter() },
        Mode::Bmt => Problem::Bmt { requirement: 0.6 * spec.perimeter() },
    };
    Ok(Instance::new(pois, default_bases(n), edges, problem)?
        .with_meta(Meta { seed: Some(spec.seed), generator: Some(format!("grid {}x{}", spec.rows, spec.cols)) }))
}

/// Random geometric instance. Unset fields take the defaults: an
/// `n x 1.2n` rectangle, connection threshold `n / 3`, bases at
/// floor(n/3) and floor(2n/3), budget `4 sqrt(n)`, requirement `2 sqrt(n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomSpec {
    pub n: usize,
    pub seed: u64,
    pub curve: CurveKind,
    pub mode: Mode,
    pub width: Option<f64>,
    pub height: Option<f64>,
    pub threshold: Option<f64>,
    pub bases: Option<Vec<PoiId>>,
    pub budget: Option<f64>,
    pub requirement: Option<f64>,
}

impl RandomSpec {
    pub fn new(n: usize, seed: u64) -> Self {
        Self {
            n,
            seed,
            curve: CurveKind::Linear,
            mode: Mode::Rmt,
            width: None,
            height: None,
            threshold: None,
            bases: None,
            budget: None,
            requirement: None,
        }
    }

    /// 30 POIs in a 10 x 15 rectangle, threshold 10, bases {1, 9, 17, 25}.
    pub fn small_city(seed: u64) -> Self {
        Self {
            width: Some(10.0),
            height: Some(15.0),
            threshold: Some(10.0),
            bases: Some(vec![1, 9, 17, 25]),
            ..Self::new(30, seed)
        }
    }
}

const MAX_REGENERATIONS: u64 = 1000;

pub fn gen_random(spec: &RandomSpec) -> Result<Instance> {
    let n = spec.n;
    if n < 2 {
        return Err(Error::InvalidInstance(format!("random instances need at least 2 POIs, got {n}")));
    }
    for attempt in 0..MAX_REGENERATIONS {
        let seed = spec.seed.wrapping_add(attempt);
        let inst = random_once(spec, seed)?;
        let closed = transitive_closure(&inst);
        let ok = inst.bases().iter().any(|&b| (1..=n).any(|v| v != b && closed.reachable(b, v) && closed.reachable(v, b)));
        if ok {
            return Ok(inst);
        }
    }
    Err(Error::InfeasibleStructure(format!("no connected instance after {MAX_REGENERATIONS} seeds")))
}

fn random_once(spec: &RandomSpec, seed: u64) -> Result<Instance> {
    let n = spec.n;
    let nf = n as f64;
    let width = spec.width.unwrap_or(nf);
    let height = spec.height.unwrap_or(1.2 * nf);
    let threshold = spec.threshold.unwrap_or(nf / 3.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pos = Vec::with_capacity(n);
    let mut pois = Vec::with_capacity(n);
    for id in 1..=n {
        pos.push((rng.gen_range(0.0..width), rng.gen_range(0.0..height)));
        let reward = rng.gen_range(1.0..2.0);
        let rate = rng.gen_range(1.0..2.0);
        pois.push(Poi { id, name: None, max_reward: reward, curve: curve_of(spec.curve, rate) });
    }
    let mut edges = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let d = ((pos[i].0 - pos[j].0).powi(2) + (pos[i].1 - pos[j].1).powi(2)).sqrt();
            if i != j && d <= threshold && d > 0.0 {
                edges.push(Edge { from: i + 1, to: j + 1, length: d });
            }
        }
    }
    let problem = match spec.mode {
        Mode::Rmt => Problem::Rmt { budget: spec.budget.unwrap_or(4.0 * nf.sqrt()) },
        Mode::Bmt => Problem::Bmt { requirement: spec.requirement.unwrap_or(2.0 * nf.sqrt()) },
    };
    let bases = spec.bases.clone().unwrap_or_else(|| default_bases(n));
    Ok(Instance::new(pois, bases, edges, problem)?.with_meta(Meta { seed: Some(seed), generator: Some(format!("random n={n}")) }))
}

/// One row of a POI popularity table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoiRecord {
    pub name: String,
    pub rank: u32,
    pub n_review: u64,
}

/// `cbrt(n_review) + 10 - rank / 5`.
pub fn popularity_reward(record: &PoiRecord) -> f64 {
    (record.n_review as f64).cbrt() + 10.0 - record.rank as f64 / 5.0
}

/// Builds an instance with exponential curves of rate `1 - 0.01 r` from a
/// ranked table. POI ids follow rank order; `distances[a][b]` is the travel
/// time between the records at table positions `a` and `b` (non-finite means
/// no direct connection).
pub fn ingest_poi_table(records: &[PoiRecord], distances: &[Vec<f64>], base_ranks: &[u32], problem: Problem) -> Result<Instance> {
    let n = records.len();
    if n == 0 {
        return Err(Error::InvalidInstance("empty POI table".into()));
    }
    if distances.len() != n || distances.iter().any(|row| row.len() != n) {
        return Err(Error::InvalidInstance(format!("distance matrix must be {n}x{n}")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&a| records[a].rank);
    for w in order.windows(2) {
        if records[w[0]].rank == records[w[1]].rank {
            return Err(Error::InvalidInstance(format!("duplicate rank {}", records[w[0]].rank)));
        }
    }
    let mut pois = Vec::with_capacity(n);
    for (k, &a) in order.iter().enumerate() {
        let rec = &records[a];
        if rec.rank == 0 || rec.n_review == 0 {
            return Err(Error::InvalidInstance(format!("`{}`: rank and review count must be positive", rec.name)));
        }
        let reward = popularity_reward(rec);
        let rate = 1.0 - 0.01 * reward;
        if !(rate > 0.0) || reward < 0.0 {
            return Err(Error::InvalidInstance(format!("`{}`: reward {reward} gives a non-positive learning rate", rec.name)));
        }
        pois.push(Poi {
            id: k + 1,
            name: Some(rec.name.clone()),
            max_reward: reward,
            curve: CurveSpec::Exponential { rate },
        });
    }
    let mut edges = Vec::new();
    for (ki, &a) in order.iter().enumerate() {
        for (kj, &b) in order.iter().enumerate() {
            let d = distances[a][b];
            if a == b || !d.is_finite() {
                continue;
            }
            if d <= 0.0 {
                return Err(Error::InvalidInstance(format!("distance {} -> {} must be positive", records[a].name, records[b].name)));
            }
            edges.push(Edge { from: ki + 1, to: kj + 1, length: d });
        }
    }
    let bases = base_ranks
        .iter()
        .map(|&r| {
            order
                .iter()
                .position(|&a| records[a].rank == r)
                .map(|k| k + 1)
                .ok_or_else(|| Error::InvalidInstance(format!("base rank {r} is not in the table")))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Instance::new(pois, bases, edges, problem)?.with_meta(Meta { seed: None, generator: Some("poi table".into()) }))
}

/// Reads a `name,rank,n_review` CSV table.
pub fn read_poi_table(text: &str) -> Result<Vec<PoiRecord>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    rdr.deserialize()
        .map(|r| {
            r.map_err(|e| {
                let line = e.position().map_or(0, |p| p.line() as usize);
                Error::Parse { line, message: e.to_string() }
            })
        })
        .collect()
}

/// Reads a square CSV matrix without header; empty or `inf` cells mean no
/// connection.
pub fn read_distance_matrix(text: &str) -> Result<Vec<Vec<f64>>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(text.as_bytes());
    let mut out = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::Parse { line: k + 1, message: e.to_string() })?;
        let row = rec
            .iter()
            .map(|cell| {
                if cell.is_empty() {
                    Ok(f64::INFINITY)
                } else {
                    cell.parse::<f64>().map_err(|e| Error::Parse { line: k + 1, message: format!("`{cell}`: {e}") })
                }
            })
            .collect::<Result<Vec<_>>>()?;
        out.push(row);
    }
    Ok(out)
}

// Document layer. Kept separate from the domain types so the file format
// can evolve without touching the solver-facing structs.

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceDoc {
    pois: Vec<PoiDoc>,
    bases: Vec<PoiId>,
    edges: Vec<EdgeDoc>,
    problem: ProblemDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    meta: Option<MetaDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PoiDoc {
    id: PoiId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    reward: f64,
    curve: CurveDoc,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
enum CurveDoc {
    Linear { rate: f64 },
    Exponential { rate: f64 },
    /// Breakpoints `[t, value]` starting at `[0, 0]`.
    Pwl { segments: Vec<[f64; 2]> },
    Sampled { points: Vec<[f64; 2]> },
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeDoc {
    from: PoiId,
    to: PoiId,
    length: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase", deny_unknown_fields)]
enum ProblemDoc {
    Rmt { budget: f64 },
    Bmt { requirement: f64 },
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MetaDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    generator: Option<String>,
}

fn pairs(v: &[[f64; 2]]) -> Vec<(f64, f64)> {
    v.iter().map(|p| (p[0], p[1])).collect()
}

impl CurveDoc {
    fn from_spec(spec: &CurveSpec) -> Self {
        match spec {
            CurveSpec::Linear { rate } => CurveDoc::Linear { rate: *rate },
            CurveSpec::Exponential { rate } => CurveDoc::Exponential { rate: *rate },
            CurveSpec::Pwl(p) => CurveDoc::Pwl { segments: p.breakpoints().iter().map(|&(t, v)| [t, v]).collect() },
            CurveSpec::Sampled(s) => CurveDoc::Sampled { points: s.points().iter().map(|&(t, v)| [t, v]).collect() },
        }
    }

    fn into_spec(self) -> Result<CurveSpec> {
        Ok(match self {
            CurveDoc::Linear { rate } => CurveSpec::Linear { rate },
            CurveDoc::Exponential { rate } => CurveSpec::Exponential { rate },
            CurveDoc::Pwl { segments } => CurveSpec::Pwl(PwlCurve::new(pairs(&segments))?),
            CurveDoc::Sampled { points } => CurveSpec::Sampled(SampledCurve::new(pairs(&points))?),
        })
    }
}

/// Serializes an instance as a pretty-printed JSON document.
pub fn write_instance(instance: &Instance) -> String {
    let doc = InstanceDoc {
        pois: instance
            .pois()
            .iter()
            .map(|p| PoiDoc { id: p.id, name: p.name.clone(), reward: p.max_reward, curve: CurveDoc::from_spec(&p.curve) })
            .collect(),
        bases: instance.bases().to_vec(),
        edges: instance.edges().iter().map(|e| EdgeDoc { from: e.from, to: e.to, length: e.length }).collect(),
        problem: match instance.problem {
            Problem::Rmt { budget } => ProblemDoc::Rmt { budget },
            Problem::Bmt { requirement } => ProblemDoc::Bmt { requirement },
        },
        meta: match &instance.meta {
            Meta { seed: None, generator: None } => None,
            m => Some(MetaDoc { seed: m.seed, generator: m.generator.clone() }),
        },
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("instance documents always serialize");
    s.push('\n');
    s
}

/// Parses an instance document. Schema errors name the offending field path
/// and position.
pub fn read_instance(text: &str) -> Result<Instance> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let doc: InstanceDoc = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        Error::Schema(format!("{path}: {inner}"))
    })?;
    let mut pois = Vec::with_capacity(doc.pois.len());
    for p in doc.pois {
        let curve = p.curve.into_spec().map_err(|e| Error::Schema(format!("pois[id={}].curve: {e}", p.id)))?;
        pois.push(Poi { id: p.id, name: p.name, max_reward: p.reward, curve });
    }
    let edges = doc.edges.into_iter().map(|e| Edge { from: e.from, to: e.to, length: e.length }).collect();
    let problem = match doc.problem {
        ProblemDoc::Rmt { budget } => Problem::Rmt { budget },
        ProblemDoc::Bmt { requirement } => Problem::Bmt { requirement },
    };
    let meta = doc.meta.map_or_else(Meta::default, |m| Meta { seed: m.seed, generator: m.generator });
    Ok(Instance::new(pois, doc.bases, edges, problem)?.with_meta(meta))
}

pub fn read_instance_file(path: &Path) -> Result<Instance> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    read_instance(&text)
}

pub fn write_instance_file(instance: &Instance, path: &Path) -> Result<()> {
    std::fs::write(path, write_instance(instance)).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// The three-POI fixture used throughout the tests and docs: base 1 with no
/// reward, POI 2 (reward 10, linear rate 0.5), POI 3 (reward 6, linear rate
/// 1), symmetric distances d(1,2) = d(2,3) = 1 and d(1,3) = 2.
pub fn fixture_t1(problem: Problem) -> Instance {
    let pois = vec![
        Poi { id: 1, name: Some("v1".into()), max_reward: 0.0, curve: CurveSpec::Linear { rate: 1.0 } },
        Poi { id: 2, name: Some("v2".into()), max_reward: 10.0, curve: CurveSpec::Linear { rate: 0.5 } },
        Poi { id: 3, name: Some("v3".into()), max_reward: 6.0, curve: CurveSpec::Linear { rate: 1.0 } },
    ];
    let mut edges = Vec::new();
    for (a, b, d) in [(1, 2, 1.0), (2, 3, 1.0), (1, 3, 2.0)] {
        edges.push(Edge { from: a, to: b, length: d });
        edges.push(Edge { from: b, to: a, length: d });
    }
    Instance::new(pois, vec![1], edges, problem).expect("fixture is valid")
}
