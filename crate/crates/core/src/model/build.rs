use crate::curves::{concave_blocks, PwlCurve};
use crate::domain::{Instance, PoiId, Problem};
use crate::error::{Error, Result};
use crate::graph::{ClosedGraph, GadgetKind};

use super::{MipModel, Relation, Role, RowFamily, Sense, VarKind};

/// Number and kind of tours in the plan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Tours {
    Single,
    /// `m` tours from one common base, each within `per_tour_limit` if given.
    Shared { m: usize, per_tour_limit: Option<f64> },
    /// `m` tours from pairwise distinct bases.
    Disjoint { m: usize, per_tour_limit: Option<f64> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct BuildOptions {
    /// Approximation target the curves were built for; only range-checked here.
    pub epsilon: f64,
    /// Activation slack between consecutive concave blocks.
    pub delta: f64,
    pub tours: Tours,
    /// Tours return to their start base. With a single base every trip is
    /// cyclic.
    pub cyclic: bool,
}

impl Default for BuildOptions {
    fn default() -> Self {
        Self { epsilon: 0.05, delta: 1e-6, tours: Tours::Single, cyclic: true }
    }
}

impl BuildOptions {
    pub fn validate(&self, instance: &Instance) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::EpsilonOutOfRange(self.epsilon));
        }
        if !(self.delta > 0.0) {
            return Err(Error::OptionConflict(format!("delta must be positive, got {}", self.delta)));
        }
        match self.tours {
            Tours::Single => {}
            Tours::Shared { m, per_tour_limit } | Tours::Disjoint { m, per_tour_limit } => {
                if m == 0 {
                    return Err(Error::OptionConflict("number of tours must be at least 1".into()));
                }
                if per_tour_limit.is_some_and(|l| !(l >= 0.0)) {
                    return Err(Error::OptionConflict("per-tour limit must be non-negative".into()));
                }
            }
        }
        if let Tours::Disjoint { m, .. } = self.tours {
            if instance.bases().len() < m {
                return Err(Error::OptionConflict(format!(
                    "{m} disjoint tours need at least {m} bases, instance has {}",
                    instance.bases().len()
                )));
            }
        }
        Ok(())
    }
}

struct Builder<'a> {
    inst: &'a Instance,
    closed: &'a ClosedGraph,
    curves: &'a [PwlCurve],
    opts: &'a BuildOptions,
    m: MipModel,
    n: usize,
}

/// Builds the RMT or BMT model (chosen by `instance.problem`) over the
/// closure `closed`, with `curves[i - 1]` the piecewise-linear curve of POI
/// `i`.
pub fn build(instance: &Instance, closed: &ClosedGraph, curves: &[PwlCurve], options: &BuildOptions) -> Result<MipModel> {
    options.validate(instance)?;
    if curves.len() != instance.n() {
        return Err(Error::OptionConflict(format!("{} curves given for {} POIs", curves.len(), instance.n())));
    }
    if closed.n() != instance.n() {
        return Err(Error::OptionConflict("closure does not match the instance".into()));
    }
    check_reachability(instance, closed, options)?;
    let sense = match instance.problem {
        Problem::Rmt { .. } => Sense::Maximize,
        Problem::Bmt { .. } => Sense::Minimize,
    };
    let mut b = Builder { inst: instance, closed, curves, opts: options, m: MipModel::new(model_name(instance), sense), n: instance.n() };
    match options.tours {
        Tours::Single if instance.bases().len() == 1 => b.single_base()?,
        Tours::Single => b.multi_base()?,
        _ => b.multi_tour()?,
    }
    Ok(b.m)
}

fn model_name(instance: &Instance) -> String {
    match instance.problem {
        Problem::Rmt { .. } => "rmt".into(),
        Problem::Bmt { .. } => "bmt".into(),
    }
}

fn check_reachability(inst: &Instance, closed: &ClosedGraph, opts: &BuildOptions) -> Result<()> {
    let n = inst.n();
    if n == 1 {
        return Ok(());
    }
    let ok = inst.bases().iter().any(|&b| {
        (1..=n).any(|v| {
            v != b && closed.reachable(b, v) && (!opts.cyclic || closed.reachable(v, b) || inst.bases().len() > 1)
        })
    });
    if ok {
        Ok(())
    } else {
        Err(Error::InfeasibleStructure("no base can reach any other POI".into()))
    }
}

impl Builder<'_> {
    fn pairs(&self) -> Vec<(PoiId, PoiId)> {
        let mut v = Vec::new();
        for i in 1..=self.n {
            for j in 1..=self.n {
                if i != j && self.closed.reachable(i, j) {
                    v.push((i, j));
                }
            }
        }
        v
    }

    fn saturation(&self, i: PoiId) -> f64 {
        self.curves[i - 1].saturation_time()
    }

    fn bin(&mut self, name: String, role: Role) -> Result<usize> {
        self.m.add_var(name, VarKind::Binary, 0.0, 1.0, role)
    }

    /// Stay-time, reward and curve rows for every POI. Returns `(t_i, w_i)`.
    fn rewards(&mut self, visit: &[usize]) -> Result<Vec<(usize, usize)>> {
        let mut out = Vec::with_capacity(self.n);
        for i in 1..=self.n {
            let r = self.inst.poi(i).max_reward;
            let sat = self.saturation(i);
            let t = self.m.add_var(format!("t_{i}"), VarKind::Continuous, 0.0, sat, Role::StayTime { poi: i, tour: None })?;
            let w = self.m.add_var(format!("w_{i}"), VarKind::Continuous, 0.0, r, Role::Reward { poi: i })?;
            out.push((t, w));
        }
        for i in 1..=self.n {
            let (t, w) = out[i - 1];
            let x = visit[i - 1];
            let r = self.inst.poi(i).max_reward;
            let sat = self.saturation(i);
            self.m.add_row(format!("cap_{i}"), [(w, 1.0), (x, -r)], Relation::Le, 0.0, RowFamily::Curve)?;
            self.m.add_row(format!("gate_{i}"), [(t, 1.0), (x, -sat)], Relation::Le, 0.0, RowFamily::Curve)?;
            self.curve_rows(i, t, w, x)?;
        }
        Ok(out)
    }

    fn curve_rows(&mut self, i: PoiId, t: usize, w: usize, x: usize) -> Result<()> {
        let r = self.inst.poi(i).max_reward;
        let pwl = &self.curves[i - 1];
        let blocks = concave_blocks(pwl);
        if blocks.blocks.len() == 1 {
            for (s, seg) in blocks.blocks[0].segments.iter().enumerate() {
                self.m.add_row(
                    format!("seg_{i}_{s}"),
                    [(w, 1.0), (t, -r * seg.slope)],
                    Relation::Le,
                    r * seg.intercept,
                    RowFamily::Curve,
                )?;
            }
            return Ok(());
        }
        // Block k carries time tau_k in [0, span_k] measured from its start and
        // reward omega_k on top of f(start_k); it may only be entered once the
        // previous block is used up to within delta.
        let mut taus = Vec::new();
        let mut omegas = Vec::new();
        let mut spans = Vec::new();
        for (k, block) in blocks.blocks.iter().enumerate() {
            let start = block.start;
            let end = block.effective_end();
            let span = end - start;
            let base_val = pwl.eval(start);
            let gain = r * (pwl.eval(end) - base_val);
            let tau = self.m.add_var(format!("t_{i}_b{k}"), VarKind::Continuous, 0.0, span, Role::BlockTime { poi: i, block: k })?;
            let omega =
                self.m.add_var(format!("w_{i}_b{k}"), VarKind::Continuous, 0.0, gain, Role::BlockReward { poi: i, block: k })?;
            for (s, seg) in block.segments.iter().enumerate() {
                self.m.add_row(
                    format!("seg_{i}_b{k}_{s}"),
                    [(omega, 1.0), (tau, -r * seg.slope)],
                    Relation::Le,
                    r * (seg.value_at(start) - base_val),
                    RowFamily::Curve,
                )?;
            }
            if k == 0 {
                self.m.add_row(format!("act_{i}_b{k}"), [(tau, 1.0), (x, -span)], Relation::Le, 0.0, RowFamily::Curve)?;
            } else {
                let y = self.bin(format!("a_{i}_b{k}"), Role::BlockActive { poi: i, block: k })?;
                let prev_span = spans[k - 1];
                self.m.add_row(
                    format!("enter_{i}_b{k}"),
                    [(y, prev_span), (taus[k - 1], -1.0)],
                    Relation::Le,
                    self.opts.delta,
                    RowFamily::Curve,
                )?;
                self.m.add_row(format!("act_{i}_b{k}"), [(tau, 1.0), (y, -span)], Relation::Le, 0.0, RowFamily::Curve)?;
            }
            taus.push(tau);
            omegas.push(omega);
            spans.push(span);
        }
        let mut t_terms = vec![(t, 1.0)];
        t_terms.extend(taus.iter().map(|&v| (v, -1.0)));
        self.m.add_row(format!("tsum_{i}"), t_terms, Relation::Eq, 0.0, RowFamily::Curve)?;
        let mut w_terms = vec![(w, 1.0)];
        w_terms.extend(omegas.iter().map(|&v| (v, -1.0)));
        self.m.add_row(format!("wsum_{i}"), w_terms, Relation::Eq, 0.0, RowFamily::Curve)?;
        Ok(())
    }

    /// Budget row or requirement row plus objective.
    fn objective(&mut self, travel: Vec<(usize, f64)>, rewards: &[(usize, usize)]) -> Result<()> {
        let mut time_terms = travel;
        time_terms.extend(rewards.iter().map(|&(t, _)| (t, 1.0)));
        let reward_terms: Vec<(usize, f64)> = rewards.iter().map(|&(_, w)| (w, 1.0)).collect();
        match self.inst.problem {
            Problem::Rmt { budget } => {
                self.m.add_row("budget", time_terms, Relation::Le, budget, RowFamily::Budget)?;
                self.m.set_objective(Sense::Maximize, reward_terms)
            }
            Problem::Bmt { requirement } => {
                self.m.add_row("requirement", reward_terms, Relation::Ge, requirement, RowFamily::Budget)?;
                self.m.set_objective(Sense::Minimize, time_terms)
            }
        }
    }

    fn single_base(&mut self) -> Result<()> {
        let base = self.inst.bases()[0];
        let n = self.n as f64;
        let pairs = self.pairs();
        let mut edge = Vec::with_capacity(pairs.len());
        for &(i, j) in &pairs {
            edge.push(self.bin(format!("x_{i}_{j}"), Role::EdgeUse { from: i, to: j, tour: None })?);
        }
        let selfloop = self.bin(format!("x_{base}_{base}"), Role::SelfLoop { base, tour: None })?;
        let mut visit = Vec::with_capacity(self.n);
        for i in 1..=self.n {
            visit.push(self.bin(format!("x_{i}"), Role::Visit { poi: i, tour: None })?);
        }
        let mut order = vec![usize::MAX; self.n + 1];
        for i in (1..=self.n).filter(|&i| i != base) {
            order[i] = self.m.add_var(format!("u_{i}"), VarKind::Integer, 2.0, n, Role::Order { poi: i, tour: None })?;
        }
        let rewards = self.rewards(&visit)?;

        self.m.add_row(format!("visit_{base}"), [(visit[base - 1], 1.0)], Relation::Eq, 1.0, RowFamily::Flow)?;
        for i in 1..=self.n {
            let outs: Vec<(usize, f64)> = pairs.iter().zip(&edge).filter(|(p, _)| p.0 == i).map(|(_, &v)| (v, 1.0)).collect();
            let ins: Vec<(usize, f64)> = pairs.iter().zip(&edge).filter(|(p, _)| p.1 == i).map(|(_, &v)| (v, 1.0)).collect();
            if i == base {
                let mut o = outs;
                o.push((selfloop, 1.0));
                self.m.add_row(format!("out_{i}"), o, Relation::Eq, 1.0, RowFamily::Flow)?;
                let mut t = ins;
                t.push((selfloop, 1.0));
                self.m.add_row(format!("in_{i}"), t, Relation::Eq, 1.0, RowFamily::Flow)?;
            } else {
                let mut o = outs;
                o.push((visit[i - 1], -1.0));
                self.m.add_row(format!("out_{i}"), o, Relation::Eq, 0.0, RowFamily::Flow)?;
                let mut t = ins;
                t.push((visit[i - 1], -1.0));
                self.m.add_row(format!("in_{i}"), t, Relation::Eq, 0.0, RowFamily::Flow)?;
            }
        }
        for (&(i, j), &x) in pairs.iter().zip(&edge) {
            if i != base && j != base {
                self.m.add_row(
                    format!("mtz_{i}_{j}"),
                    [(order[i], 1.0), (order[j], -1.0), (x, n - 1.0)],
                    Relation::Le,
                    n - 2.0,
                    RowFamily::SubTour,
                )?;
            }
        }
        let travel = pairs.iter().zip(&edge).map(|(&(i, j), &x)| (x, self.closed.dist(i, j))).collect();
        self.objective(travel, &rewards)
    }

    fn multi_base(&mut self) -> Result<()> {
        let n = self.n as f64;
        let bases = self.inst.bases().to_vec();
        let pairs = self.pairs();
        let mut edge = Vec::with_capacity(pairs.len());
        for &(i, j) in &pairs {
            edge.push(self.bin(format!("x_{i}_{j}"), Role::EdgeUse { from: i, to: j, tour: None })?);
        }
        let mut gadget = std::collections::HashMap::new();
        for &b in &bases {
            for kind in GadgetKind::ALL {
                let v = self.bin(format!("g_{}_{b}", kind.tag()), Role::Gadget { base: b, kind })?;
                gadget.insert((b, kind), v);
            }
        }
        let mut visit = Vec::with_capacity(self.n);
        for i in 1..=self.n {
            visit.push(self.bin(format!("x_{i}"), Role::Visit { poi: i, tour: None })?);
        }
        let mut order = vec![usize::MAX; self.n + 1];
        for i in 1..=self.n {
            order[i] = self.m.add_var(format!("u_{i}"), VarKind::Integer, 1.0, n, Role::Order { poi: i, tour: None })?;
        }
        let rewards = self.rewards(&visit)?;
        let g = |b: PoiId, k: GadgetKind| gadget[&(b, k)];

        self.m.add_row(
            "origin_out",
            bases.iter().map(|&b| (g(b, GadgetKind::OriginOut), 1.0)),
            Relation::Eq,
            1.0,
            RowFamily::Gadget,
        )?;
        if !self.opts.cyclic {
            self.m.add_row(
                "origin_in",
                bases.iter().map(|&b| (g(b, GadgetKind::InOrigin), 1.0)),
                Relation::Eq,
                1.0,
                RowFamily::Gadget,
            )?;
        }
        for i in 1..=self.n {
            let outs: Vec<(usize, f64)> = pairs.iter().zip(&edge).filter(|(p, _)| p.0 == i).map(|(_, &v)| (v, 1.0)).collect();
            let ins: Vec<(usize, f64)> = pairs.iter().zip(&edge).filter(|(p, _)| p.1 == i).map(|(_, &v)| (v, 1.0)).collect();
            if self.inst.is_base(i) {
                let (oo, io, oi, iu) =
                    (g(i, GadgetKind::OriginOut), g(i, GadgetKind::InOrigin), g(i, GadgetKind::OutIn), g(i, GadgetKind::InOut));
                let mut o = outs;
                o.extend([(oi, 1.0), (iu, -1.0), (oo, -1.0)]);
                self.m.add_row(format!("out_{i}"), o, Relation::Eq, 0.0, RowFamily::Gadget)?;
                let mut t = ins;
                t.extend([(oi, 1.0), (iu, -1.0), (io, -1.0)]);
                self.m.add_row(format!("in_{i}"), t, Relation::Eq, 0.0, RowFamily::Gadget)?;
                if self.opts.cyclic {
                    self.m.add_row(format!("pair_{i}"), [(io, 1.0), (oo, -1.0)], Relation::Eq, 0.0, RowFamily::Gadget)?;
                    self.m.add_row(
                        format!("visit_{i}"),
                        [(visit[i - 1], 1.0), (oo, -1.0), (iu, -1.0)],
                        Relation::Eq,
                        0.0,
                        RowFamily::Gadget,
                    )?;
                } else {
                    self.m.add_row(
                        format!("visit_{i}"),
                        [(visit[i - 1], 1.0), (oo, -1.0), (iu, -1.0), (io, -1.0)],
                        Relation::Le,
                        0.0,
                        RowFamily::Gadget,
                    )?;
                }
                self.m.add_row(format!("cross_{i}"), [(oi, 1.0), (iu, 1.0)], Relation::Le, 1.0, RowFamily::Gadget)?;
            } else {
                let mut o = outs;
                o.push((visit[i - 1], -1.0));
                self.m.add_row(format!("out_{i}"), o, Relation::Eq, 0.0, RowFamily::Flow)?;
                let mut t = ins;
                t.push((visit[i - 1], -1.0));
                self.m.add_row(format!("in_{i}"), t, Relation::Eq, 0.0, RowFamily::Flow)?;
            }
        }
        for (&(i, j), &x) in pairs.iter().zip(&edge) {
            if self.inst.is_base(i) {
                self.m.add_row(
                    format!("mtz_{i}_{j}"),
                    [(order[i], 1.0), (order[j], -1.0), (x, n), (g(i, GadgetKind::InOut), n)],
                    Relation::Le,
                    2.0 * n - 1.0,
                    RowFamily::SubTour,
                )?;
            } else {
                self.m.add_row(
                    format!("mtz_{i}_{j}"),
                    [(order[i], 1.0), (order[j], -1.0), (x, n)],
                    Relation::Le,
                    n - 1.0,
                    RowFamily::SubTour,
                )?;
            }
        }
        let travel = pairs.iter().zip(&edge).map(|(&(i, j), &x)| (x, self.closed.dist(i, j))).collect();
        self.objective(travel, &rewards)
    }

    fn multi_tour(&mut self) -> Result<()> {
        let (m, limit, shared) = match self.opts.tours {
            Tours::Shared { m, per_tour_limit } => (m, per_tour_limit, true),
            Tours::Disjoint { m, per_tour_limit } => (m, per_tour_limit, false),
            Tours::Single => unreachable!("single tour handled elsewhere"),
        };
        let n = self.n as f64;
        let bases = self.inst.bases().to_vec();
        // Bases are tour endpoints only; tours pass them solely inside meta-edges.
        let pairs = self.pairs();
        let mut agg = Vec::with_capacity(pairs.len());
        for &(i, j) in &pairs {
            agg.push(self.bin(format!("x_{i}_{j}"), Role::EdgeUse { from: i, to: j, tour: None })?);
        }
        let mut edge = vec![Vec::with_capacity(pairs.len()); m];
        let mut selfloop = vec![Vec::new(); m];
        let mut start = vec![Vec::new(); m];
        let mut end = vec![Vec::new(); m];
        let mut pvisit = vec![Vec::new(); m];
        let mut ptime = vec![Vec::new(); m];
        let mut order = vec![vec![usize::MAX; self.n + 1]; m];
        for k in 0..m {
            for &(i, j) in &pairs {
                edge[k].push(self.bin(format!("x_{i}_{j}_k{k}"), Role::EdgeUse { from: i, to: j, tour: Some(k) })?);
            }
            for &b in &bases {
                selfloop[k].push(self.bin(format!("x_{b}_{b}_k{k}"), Role::SelfLoop { base: b, tour: Some(k) })?);
                start[k].push(self.bin(format!("s_{b}_k{k}"), Role::TourStart { base: b, tour: Some(k) })?);
                if !self.opts.cyclic {
                    end[k].push(self.bin(format!("e_{b}_k{k}"), Role::TourEnd { base: b, tour: Some(k) })?);
                }
            }
            for i in 1..=self.n {
                pvisit[k].push(self.bin(format!("x_{i}_k{k}"), Role::Visit { poi: i, tour: Some(k) })?);
            }
            for i in 1..=self.n {
                let sat = self.saturation(i);
                ptime[k].push(self.m.add_var(
                    format!("t_{i}_k{k}"),
                    VarKind::Continuous,
                    0.0,
                    sat,
                    Role::StayTime { poi: i, tour: Some(k) },
                )?);
            }
            for i in (1..=self.n).filter(|&i| !self.inst.is_base(i)) {
                order[k][i] =
                    self.m.add_var(format!("u_{i}_k{k}"), VarKind::Integer, 1.0, n, Role::Order { poi: i, tour: Some(k) })?;
            }
        }
        let shared_base = if shared {
            let mut z = Vec::new();
            for &b in &bases {
                z.push(self.bin(format!("z_{b}"), Role::TourStart { base: b, tour: None })?);
            }
            Some(z)
        } else {
            None
        };
        let mut visit = Vec::with_capacity(self.n);
        for i in 1..=self.n {
            visit.push(self.bin(format!("x_{i}"), Role::Visit { poi: i, tour: None })?);
        }
        let rewards = self.rewards(&visit)?;

        for (p, &(i, j)) in pairs.iter().enumerate() {
            let mut terms = vec![(agg[p], 1.0)];
            terms.extend((0..m).map(|k| (edge[k][p], -1.0)));
            self.m.add_row(format!("agg_{i}_{j}"), terms, Relation::Eq, 0.0, RowFamily::Tours)?;
        }
        for i in 1..=self.n {
            let mut terms = vec![(visit[i - 1], 1.0)];
            terms.extend((0..m).map(|k| (pvisit[k][i - 1], -1.0)));
            self.m.add_row(format!("visit_{i}"), terms, Relation::Eq, 0.0, RowFamily::Tours)?;
            let mut terms = vec![(rewards[i - 1].0, 1.0)];
            terms.extend((0..m).map(|k| (ptime[k][i - 1], -1.0)));
            self.m.add_row(format!("tsplit_{i}"), terms, Relation::Eq, 0.0, RowFamily::Tours)?;
        }
        if let Some(z) = &shared_base {
            self.m.add_row("base_pick", z.iter().map(|&v| (v, 1.0)), Relation::Eq, 1.0, RowFamily::Tours)?;
        }
        for (bi, &b) in bases.iter().enumerate() {
            if let Some(z) = &shared_base {
                for k in 0..m {
                    self.m.add_row(format!("same_{b}_k{k}"), [(start[k][bi], 1.0), (z[bi], -1.0)], Relation::Eq, 0.0, RowFamily::Tours)?;
                }
            } else {
                self.m.add_row(
                    format!("once_{b}"),
                    (0..m).map(|k| (start[k][bi], 1.0)),
                    Relation::Le,
                    1.0,
                    RowFamily::Tours,
                )?;
            }
        }
        for k in 0..m {
            self.m.add_row(format!("start_k{k}"), start[k].iter().map(|&v| (v, 1.0)), Relation::Eq, 1.0, RowFamily::Tours)?;
            if !self.opts.cyclic {
                self.m.add_row(format!("end_k{k}"), end[k].iter().map(|&v| (v, 1.0)), Relation::Eq, 1.0, RowFamily::Tours)?;
            }
            for i in 1..=self.n {
                let outs: Vec<(usize, f64)> =
                    pairs.iter().zip(&edge[k]).filter(|(p, _)| p.0 == i).map(|(_, &v)| (v, 1.0)).collect();
                let ins: Vec<(usize, f64)> =
                    pairs.iter().zip(&edge[k]).filter(|(p, _)| p.1 == i).map(|(_, &v)| (v, 1.0)).collect();
                if let Some(bi) = bases.iter().position(|&b| b == i) {
                    let mut o = outs;
                    o.extend([(selfloop[k][bi], 1.0), (start[k][bi], -1.0)]);
                    self.m.add_row(format!("out_{i}_k{k}"), o, Relation::Eq, 0.0, RowFamily::Flow)?;
                    let close = if self.opts.cyclic { start[k][bi] } else { end[k][bi] };
                    let mut t = ins;
                    t.extend([(selfloop[k][bi], 1.0), (close, -1.0)]);
                    self.m.add_row(format!("in_{i}_k{k}"), t, Relation::Eq, 0.0, RowFamily::Flow)?;
                    self.m.add_row(
                        format!("home_{i}_k{k}"),
                        [(pvisit[k][i - 1], 1.0), (start[k][bi], -1.0)],
                        Relation::Le,
                        0.0,
                        RowFamily::Tours,
                    )?;
                } else {
                    let mut o = outs;
                    o.push((pvisit[k][i - 1], -1.0));
                    self.m.add_row(format!("out_{i}_k{k}"), o, Relation::Eq, 0.0, RowFamily::Flow)?;
                    let mut t = ins;
                    t.push((pvisit[k][i - 1], -1.0));
                    self.m.add_row(format!("in_{i}_k{k}"), t, Relation::Eq, 0.0, RowFamily::Flow)?;
                }
                let sat = self.saturation(i);
                self.m.add_row(
                    format!("gate_{i}_k{k}"),
                    [(ptime[k][i - 1], 1.0), (pvisit[k][i - 1], -sat)],
                    Relation::Le,
                    0.0,
                    RowFamily::Tours,
                )?;
            }
            for (p, &(i, j)) in pairs.iter().enumerate() {
                if !self.inst.is_base(i) && !self.inst.is_base(j) {
                    self.m.add_row(
                        format!("mtz_{i}_{j}_k{k}"),
                        [(order[k][i], 1.0), (order[k][j], -1.0), (edge[k][p], n)],
                        Relation::Le,
                        n - 1.0,
                        RowFamily::SubTour,
                    )?;
                }
            }
            if let Some(l) = limit {
                let mut terms: Vec<(usize, f64)> =
                    pairs.iter().zip(&edge[k]).map(|(&(i, j), &v)| (v, self.closed.dist(i, j))).collect();
                terms.extend(ptime[k].iter().map(|&v| (v, 1.0)));
                self.m.add_row(format!("limit_k{k}"), terms, Relation::Le, l, RowFamily::Budget)?;
            }
        }
        let travel = pairs.iter().zip(&agg).map(|(&(i, j), &x)| (x, self.closed.dist(i, j))).collect();
        self.objective(travel, &rewards)
    }
}
