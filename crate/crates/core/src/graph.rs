//! Shortest-path closure over the POI graph and the base-splitting gadget.
//!
//! Vertex ids are 1-based throughout, matching `Instance`.

use crate::domain::{Instance, PoiId};
use crate::error::{Error, Result};

/// All-pairs shortest distances with successor matrix for path recovery.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosedGraph {
    n: usize,
    dist: Vec<f64>,
    next: Vec<Option<usize>>,
}

impl ClosedGraph {
    /// Closure of an explicit edge list over vertices `1..=n`.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (PoiId, PoiId, f64)>) -> Result<Self> {
        let mut dist = vec![f64::INFINITY; n * n];
        let mut next = vec![None; n * n];
        for i in 0..n {
            dist[i * n + i] = 0.0;
            next[i * n + i] = Some(i);
        }
        for (from, to, len) in edges {
            if from == 0 || from > n {
                return Err(Error::VertexOutOfRange(from));
            }
            if to == 0 || to > n {
                return Err(Error::VertexOutOfRange(to));
            }
            let (a, b) = (from - 1, to - 1);
            if len < dist[a * n + b] {
                dist[a * n + b] = len;
                next[a * n + b] = Some(b);
            }
        }
        for k in 0..n {
            for i in 0..n {
                let dik = dist[i * n + k];
                if !dik.is_finite() {
                    continue;
                }
                for j in 0..n {
                    let cand = dik + dist[k * n + j];
                    if cand < dist[i * n + j] {
                        dist[i * n + j] = cand;
                        next[i * n + j] = next[i * n + k];
                    }
                }
            }
        }
        Ok(Self { n, dist, next })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Shortest distance from `i` to `j`, `+inf` when unreachable.
    pub fn dist(&self, i: PoiId, j: PoiId) -> f64 {
        self.dist[(i - 1) * self.n + (j - 1)]
    }

    pub fn reachable(&self, i: PoiId, j: PoiId) -> bool {
        self.dist(i, j).is_finite()
    }

    /// First vertex after `i` on the shortest path to `j`.
    pub fn next_hop(&self, i: PoiId, j: PoiId) -> Option<PoiId> {
        self.next[(i - 1) * self.n + (j - 1)].map(|v| v + 1)
    }

    /// Full distance matrix, row-major, 0-based.
    pub fn matrix(&self) -> Vec<Vec<f64>> {
        self.dist.chunks(self.n).map(|r| r.to_vec()).collect()
    }

    fn check(&self, v: PoiId) -> Result<()> {
        if v == 0 || v > self.n {
            return Err(Error::VertexOutOfRange(v));
        }
        Ok(())
    }
}

/// Floyd-Warshall closure of the instance's edges.
pub fn transitive_closure(instance: &Instance) -> ClosedGraph {
    ClosedGraph::from_edges(instance.n(), instance.edges().iter().map(|e| (e.from, e.to, e.length)))
        .expect("instance edges are validated")
}

/// Vertex sequence of the shortest path from `i` to `j` (inclusive).
pub fn reconstruct_path(closed: &ClosedGraph, i: PoiId, j: PoiId) -> Result<Vec<PoiId>> {
    closed.check(i)?;
    closed.check(j)?;
    if !closed.reachable(i, j) {
        return Err(Error::Unreachable { from: i, to: j });
    }
    let mut path = vec![i];
    let mut cur = i;
    while cur != j {
        cur = closed.next_hop(cur, j).ok_or(Error::Unreachable { from: i, to: j })?;
        path.push(cur);
        if path.len() > closed.n() {
            return Err(Error::Numerical("cycle in successor matrix".into()));
        }
    }
    Ok(path)
}

/// Vertex of the split graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SplitVertex {
    Origin,
    Poi(PoiId),
    In(PoiId),
    Out(PoiId),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GadgetKind {
    OriginOut,
    InOrigin,
    OutIn,
    InOut,
}

impl GadgetKind {
    pub const ALL: [GadgetKind; 4] = [GadgetKind::OriginOut, GadgetKind::InOrigin, GadgetKind::OutIn, GadgetKind::InOut];

    pub fn tag(self) -> &'static str {
        match self {
            GadgetKind::OriginOut => "o_out",
            GadgetKind::InOrigin => "in_o",
            GadgetKind::OutIn => "out_in",
            GadgetKind::InOut => "in_out",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GadgetEdge {
    pub kind: GadgetKind,
    pub from: SplitVertex,
    pub to: SplitVertex,
    pub length: f64,
}

/// The four zero-length gadget edges of one base.
#[derive(Debug, Clone, PartialEq)]
pub struct BaseGadget {
    pub base: PoiId,
    pub edges: [GadgetEdge; 4],
}

/// Closure plus per-base gadget bookkeeping. Closure edges leaving a base
/// start at its `Out` copy; closure edges entering it end at its `In` copy.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitGraph {
    pub closed: ClosedGraph,
    pub gadgets: Vec<BaseGadget>,
    pub origin: SplitVertex,
}

impl SplitGraph {
    pub fn is_base(&self, v: PoiId) -> bool {
        self.gadgets.iter().any(|g| g.base == v)
    }

    pub fn gadget_edge_count(&self) -> usize {
        self.gadgets.iter().map(|g| g.edges.len()).sum()
    }

    /// Tail of the closure edge leaving `v`.
    pub fn tail(&self, v: PoiId) -> SplitVertex {
        if self.is_base(v) {
            SplitVertex::Out(v)
        } else {
            SplitVertex::Poi(v)
        }
    }

    /// Head of the closure edge entering `v`.
    pub fn head(&self, v: PoiId) -> SplitVertex {
        if self.is_base(v) {
            SplitVertex::In(v)
        } else {
            SplitVertex::Poi(v)
        }
    }

    /// Distance between split vertices using closure edges between distinct
    /// POIs and zero-length gadget edges (a single hop of each).
    pub fn split_dist(&self, from: SplitVertex, to: SplitVertex) -> f64 {
        let poi = |v: SplitVertex| match v {
            SplitVertex::Poi(p) | SplitVertex::In(p) | SplitVertex::Out(p) => Some(p),
            SplitVertex::Origin => None,
        };
        if from == to {
            return 0.0;
        }
        if let Some(e) = self.gadgets.iter().flat_map(|g| g.edges.iter()).find(|e| e.from == from && e.to == to) {
            return e.length;
        }
        match (poi(from), poi(to)) {
            (Some(a), Some(b)) if a != b && self.tail(a) == from && self.head(b) == to => self.closed.dist(a, b),
            _ => f64::INFINITY,
        }
    }

    /// Merges each base's `In`/`Out` copies back into one vertex and drops the
    /// origin, returning the resulting closure.
    pub fn contract(&self) -> ClosedGraph {
        let n = self.closed.n();
        let mut edges = Vec::new();
        for a in 1..=n {
            for b in 1..=n {
                if a != b {
                    let d = self.split_dist(self.tail(a), self.head(b));
                    if d.is_finite() {
                        edges.push((a, b, d));
                    }
                }
            }
        }
        ClosedGraph::from_edges(n, edges).expect("ids in range")
    }
}

/// Splits every base into `In`/`Out` copies joined to a virtual origin.
pub fn split_bases(closed: &ClosedGraph, bases: &[PoiId]) -> Result<SplitGraph> {
    if bases.is_empty() {
        return Err(Error::InvalidInstance("at least one base is required".into()));
    }
    let mut gadgets = Vec::with_capacity(bases.len());
    for &b in bases {
        closed.check(b)?;
        let edge = |kind, from, to| GadgetEdge { kind, from, to, length: 0.0 };
        gadgets.push(BaseGadget {
            base: b,
            edges: [
                edge(GadgetKind::OriginOut, SplitVertex::Origin, SplitVertex::Out(b)),
                edge(GadgetKind::InOrigin, SplitVertex::In(b), SplitVertex::Origin),
                edge(GadgetKind::OutIn, SplitVertex::Out(b), SplitVertex::In(b)),
                edge(GadgetKind::InOut, SplitVertex::In(b), SplitVertex::Out(b)),
            ],
        });
    }
    Ok(SplitGraph { closed: closed.clone(), gadgets, origin: SplitVertex::Origin })
}
