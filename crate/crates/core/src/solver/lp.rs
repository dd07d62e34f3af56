//! Dense-tableau bounded-variable simplex.
//!
//! Every row `a·x` gets an activity variable `r` with `A x - r = 0`, so the
//! relation of a row becomes a pair of bounds on `r` and the all-activity
//! basis is always available. Any basis is made dual feasible by flipping
//! boxed columns to the bound matching their reduced cost and shifting the
//! cost of the others; the dual simplex then runs on these working costs
//! for cold starts and warm starts after bound changes alike. A primal simplex pass with the true costs
//! removes the shifts at the end.

use std::time::Instant;

use crate::error::{Error, Result};
use crate::model::{MipModel, Relation, Sense};

const PRIMAL_TOL: f64 = 1e-9;
const DUAL_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-9;
const REFACTOR_EVERY: usize = 400;
const BLAND_AFTER: usize = 50;
/// Consecutive degenerate dual pivots before the costs are perturbed.
const PERTURB_AFTER: usize = 500;
const PERTURB_SCALE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpResult {
    pub status: LpStatus,
    /// Values of the model's variables (empty unless optimal).
    pub values: Vec<f64>,
    /// Objective in the model's own sense.
    pub objective: f64,
}

/// Minimization LP in bounded form: `min c·x`, `row_lo <= A x <= row_hi`,
/// `lower <= x <= upper`.
#[derive(Debug, Clone, PartialEq)]
pub struct LpProblem {
    pub cost: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub rows: Vec<Vec<(usize, f64)>>,
    pub row_lo: Vec<f64>,
    pub row_hi: Vec<f64>,
}

impl LpProblem {
    /// LP relaxation of `model`, converted to minimization.
    pub fn from_model(model: &MipModel) -> Self {
        let n = model.num_vars();
        let sign = match model.objective().sense {
            Sense::Minimize => 1.0,
            Sense::Maximize => -1.0,
        };
        let mut cost = vec![0.0; n];
        for &(j, c) in &model.objective().terms {
            cost[j] = sign * c;
        }
        let mut rows = Vec::with_capacity(model.num_rows());
        let mut row_lo = Vec::with_capacity(model.num_rows());
        let mut row_hi = Vec::with_capacity(model.num_rows());
        for c in model.constraints() {
            rows.push(c.terms.clone());
            let (lo, hi) = match c.relation {
                Relation::Le => (f64::NEG_INFINITY, c.rhs),
                Relation::Ge => (c.rhs, f64::INFINITY),
                Relation::Eq => (c.rhs, c.rhs),
            };
            row_lo.push(lo);
            row_hi.push(hi);
        }
        Self {
            cost,
            lower: model.variables().iter().map(|v| v.lower).collect(),
            upper: model.variables().iter().map(|v| v.upper).collect(),
            rows,
            row_lo,
            row_hi,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Outcome {
    Optimal,
    Infeasible,
    Unbounded,
    /// The deadline passed before the solve settled.
    Interrupted,
}

/// Simplex state that can be re-solved after bound changes.
#[derive(Debug, Clone)]
pub(crate) struct Simplex {
    m: usize,
    n: usize,
    width: usize,
    cols: Vec<Vec<(usize, f64)>>,
    /// True costs.
    cost: Vec<f64>,
    /// Costs the dual phase works with: true costs plus the shifts that keep
    /// the basis dual feasible.
    work: Vec<f64>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    tab: Vec<f64>,
    beta: Vec<f64>,
    basis: Vec<usize>,
    row_of: Vec<usize>,
    /// Values of nonbasic columns (basic entries are stale).
    x: Vec<f64>,
    /// Reduced costs with respect to `work`.
    d: Vec<f64>,
    since_refactor: usize,
    pub(crate) pivots: usize,
    pub(crate) deadline: Option<Instant>,
}

const NONBASIC: usize = usize::MAX;

impl Simplex {
    pub(crate) fn new(lp: &LpProblem) -> Result<Self> {
        let n = lp.cost.len();
        let m = lp.rows.len();
        let width = n + m;
        let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); width];
        for (i, row) in lp.rows.iter().enumerate() {
            for &(j, a) in row {
                if j >= n {
                    return Err(Error::Numerical(format!("row {i} references column {j} of {n}")));
                }
                cols[j].push((i, a));
            }
            cols[n + i].push((i, -1.0));
        }
        let mut lo = lp.lower.clone();
        let mut hi = lp.upper.clone();
        lo.extend_from_slice(&lp.row_lo);
        hi.extend_from_slice(&lp.row_hi);
        for j in 0..width {
            if lo[j] > hi[j] + PRIMAL_TOL || lo[j].is_nan() || hi[j].is_nan() {
                return Err(Error::Numerical(format!("inconsistent bounds on column {j}")));
            }
        }
        let mut cost = lp.cost.clone();
        cost.resize(width, 0.0);
        let mut s = Self {
            m,
            n,
            width,
            cols,
            work: cost.clone(),
            d: cost.clone(),
            cost,
            lo,
            hi,
            tab: vec![0.0; m * width],
            beta: vec![0.0; m],
            basis: (n..width).collect(),
            row_of: vec![NONBASIC; width],
            x: vec![0.0; width],
            since_refactor: 0,
            pivots: 0,
            deadline: None,
        };
        for i in 0..m {
            s.row_of[n + i] = i;
        }
        // B = -I, so B^{-1}[A | -I] = [-A | I].
        for j in 0..n {
            for &(i, a) in &s.cols[j] {
                s.tab[i * width + j] = -a;
            }
        }
        for i in 0..m {
            s.tab[i * width + n + i] = 1.0;
        }
        for j in 0..n {
            s.x[j] = s.preferred_value(j);
        }
        s.recompute_beta();
        Ok(s)
    }

    fn is_basic(&self, j: usize) -> bool {
        self.row_of[j] != NONBASIC
    }

    fn can_up(&self, j: usize) -> bool {
        self.x[j] < self.hi[j]
    }

    fn can_down(&self, j: usize) -> bool {
        self.x[j] > self.lo[j]
    }

    /// Finite bound (or 0 for a free column) a nonbasic column should sit at
    /// given the sign of its reduced cost.
    fn preferred_value(&self, j: usize) -> f64 {
        let (lo, hi) = (self.lo[j], self.hi[j]);
        let want_hi = self.d[j] < -DUAL_TOL || (self.d[j].abs() <= DUAL_TOL && self.x[j] == hi);
        match (lo.is_finite(), hi.is_finite()) {
            (true, true) => {
                if want_hi {
                    hi
                } else {
                    lo
                }
            }
            (true, false) => lo,
            (false, true) => hi,
            (false, false) => 0.0,
        }
    }

    /// Amount by which nonbasic `j` violates dual feasibility.
    fn dual_infeasibility(&self, j: usize) -> f64 {
        let mut v: f64 = 0.0;
        if self.can_up(j) && self.d[j] < 0.0 {
            v = v.max(-self.d[j]);
        }
        if self.can_down(j) && self.d[j] > 0.0 {
            v = v.max(self.d[j]);
        }
        v
    }

    fn recompute_beta(&mut self) {
        let w = self.width;
        let mut beta = vec![0.0; self.m];
        for j in 0..w {
            if self.is_basic(j) || self.x[j] == 0.0 {
                continue;
            }
            let xj = self.x[j];
            for (i, b) in beta.iter_mut().enumerate() {
                let t = self.tab[i * w + j];
                if t != 0.0 {
                    *b -= t * xj;
                }
            }
        }
        self.beta = beta;
    }

    fn recompute_d(&mut self) {
        let w = self.width;
        let mut d = self.work.clone();
        for i in 0..self.m {
            let cb = self.work[self.basis[i]];
            if cb != 0.0 {
                let row = &self.tab[i * w..(i + 1) * w];
                for (dj, &t) in d.iter_mut().zip(row) {
                    if t != 0.0 {
                        *dj -= cb * t;
                    }
                }
            }
        }
        for &j in &self.basis {
            d[j] = 0.0;
        }
        self.d = d;
    }

    fn shift_nonbasic(&mut self, j: usize, value: f64) {
        let delta = value - self.x[j];
        if delta == 0.0 {
            return;
        }
        let w = self.width;
        for i in 0..self.m {
            let t = self.tab[i * w + j];
            if t != 0.0 {
                self.beta[i] -= t * delta;
            }
        }
        self.x[j] = value;
    }

    /// Replaces the bounds of the structural columns.
    pub(crate) fn set_bounds(&mut self, lower: &[f64], upper: &[f64]) {
        for j in 0..self.n {
            if self.lo[j] == lower[j] && self.hi[j] == upper[j] {
                continue;
            }
            self.lo[j] = lower[j];
            self.hi[j] = upper[j];
            if !self.is_basic(j) {
                let v = self.preferred_value(j);
                self.shift_nonbasic(j, v);
            }
        }
    }

    fn basic_violation(&self, i: usize) -> f64 {
        let j = self.basis[i];
        let b = self.beta[i];
        if b < self.lo[j] - PRIMAL_TOL * (1.0 + self.lo[j].abs()) {
            self.lo[j] - b
        } else if b > self.hi[j] + PRIMAL_TOL * (1.0 + self.hi[j].abs()) {
            b - self.hi[j]
        } else {
            0.0
        }
    }

    /// Makes the basis dual feasible for the working costs: boxed columns
    /// flip to the other bound, others get their cost shifted.
    fn prepare_dual(&mut self) {
        for j in 0..self.width {
            if self.is_basic(j) || self.lo[j] == self.hi[j] {
                continue;
            }
            let up = self.can_up(j);
            let down = self.can_down(j);
            let mut target = self.d[j];
            if up && !down && target < 0.0 {
                if self.hi[j].is_finite() && target < -DUAL_TOL {
                    self.shift_nonbasic(j, self.hi[j]);
                    continue;
                }
                target = 0.0;
            } else if down && !up && target > 0.0 {
                if self.lo[j].is_finite() && target > DUAL_TOL {
                    self.shift_nonbasic(j, self.lo[j]);
                    continue;
                }
                target = 0.0;
            } else if up && down {
                target = 0.0;
            }
            if target != self.d[j] {
                self.work[j] += target - self.d[j];
                self.d[j] = target;
            }
        }
    }

    /// Runs the simplex until optimal, infeasible or unbounded.
    pub(crate) fn solve(&mut self) -> Result<Outcome> {
        // Start from the true costs so earlier shifts do not leak into this
        // solve.
        if self.work != self.cost {
            self.work.clone_from(&self.cost);
            self.recompute_d();
        }
        self.prepare_dual();
        for _ in 0..4 {
            match self.dual_phase()? {
                Outcome::Optimal => {}
                o => return Ok(o),
            }
            self.work.clone_from(&self.cost);
            self.recompute_d();
            match self.primal_phase()? {
                Outcome::Optimal => {}
                o => return Ok(o),
            }
            if (0..self.m).all(|i| self.basic_violation(i) == 0.0) {
                return Ok(Outcome::Optimal);
            }
            // Lost primal feasibility to round-off; go around again.
            self.prepare_dual();
        }
        Err(Error::Numerical("simplex did not settle".into()))
    }

    fn expired(&self, iteration: usize) -> bool {
        iteration % 64 == 63 && self.deadline.is_some_and(|d| Instant::now() >= d)
    }

    fn iteration_limit(&self) -> usize {
        20 * (self.m + self.width) + 5_000
    }

    fn dual_phase(&mut self) -> Result<Outcome> {
        let limit = self.iteration_limit();
        let mut degenerate = 0usize;
        let mut refactored_at_end = 0;
        let mut perturbed = false;
        for it in 0..limit {
            if degenerate >= PERTURB_AFTER && !perturbed {
                self.perturb_costs();
                perturbed = true;
                degenerate = 0;
            }
            if self.expired(it) {
                return Ok(Outcome::Interrupted);
            }
            if self.since_refactor >= REFACTOR_EVERY {
                self.refactor()?;
                self.prepare_dual();
            }
            let bland = degenerate >= BLAND_AFTER;
            let mut leave = None;
            let mut best = 0.0;
            for i in 0..self.m {
                let v = self.basic_violation(i);
                if v > 0.0 {
                    if bland {
                        if leave.is_none_or(|r: usize| self.basis[i] < self.basis[r]) {
                            leave = Some(i);
                        }
                    } else if v > best {
                        best = v;
                        leave = Some(i);
                    }
                }
            }
            let Some(r) = leave else {
                return Ok(Outcome::Optimal);
            };
            let jb = self.basis[r];
            let below = self.beta[r] < self.lo[jb];
            let target = if below { self.lo[jb] } else { self.hi[jb] };
            let Some(q) = self.dual_entering(r, below, bland) else {
                if refactored_at_end < 1 && self.since_refactor > 0 {
                    refactored_at_end += 1;
                    self.refactor()?;
                    self.prepare_dual();
                    continue;
                }
                return Ok(Outcome::Infeasible);
            };
            let w = self.width;
            let alpha = self.tab[r * w + q];
            if self.d[q].abs() <= DUAL_TOL {
                degenerate += 1;
            } else {
                degenerate = 0;
            }
            let step = (self.beta[r] - target) / alpha;
            for i in 0..self.m {
                let t = self.tab[i * w + q];
                if t != 0.0 {
                    self.beta[i] -= t * step;
                }
            }
            self.x[q] += step;
            self.x[jb] = target;
            self.beta[r] = self.x[q];
            self.pivot(r, q);
        }
        Err(Error::Numerical("dual simplex iteration limit".into()))
    }

    /// Breaks dual degeneracy (typically many zero-cost columns) by pushing
    /// each nonbasic reduced cost a little further in its feasible
    /// direction. The primal pass that follows restores the true costs.
    fn perturb_costs(&mut self) {
        for j in 0..self.width {
            if self.is_basic(j) || self.lo[j] == self.hi[j] {
                continue;
            }
            // Deterministic spread in [1, 2) so ties do not survive.
            let u = 1.0 + (j as f64 * 0.618_033_988_749_895).fract();
            let delta = PERTURB_SCALE * (1.0 + self.cost[j].abs()) * u;
            let at_lo = self.x[j] == self.lo[j] && self.can_up(j);
            let at_hi = self.x[j] == self.hi[j] && self.can_down(j);
            let dir = match (at_lo, at_hi) {
                (true, false) => 1.0,
                (false, true) => -1.0,
                _ => continue,
            };
            self.work[j] += dir * delta;
            self.d[j] += dir * delta;
        }
    }

    fn dual_entering(&self, r: usize, below: bool, bland: bool) -> Option<usize> {
        let w = self.width;
        let row = &self.tab[r * w..(r + 1) * w];
        // Candidate columns with their dual slack in the direction they move.
        let eligible = |j: usize| -> Option<(f64, f64)> {
            if self.is_basic(j) || self.lo[j] == self.hi[j] {
                return None;
            }
            let a = row[j];
            if a.abs() <= PIVOT_TOL {
                return None;
            }
            // x_B(r) moves by -a * dx_j; it must move up when below.
            let up = if below { a < 0.0 } else { a > 0.0 };
            if up && self.can_up(j) {
                Some((a.abs(), self.d[j].max(0.0)))
            } else if !up && self.can_down(j) {
                Some((a.abs(), (-self.d[j]).max(0.0)))
            } else {
                None
            }
        };
        if bland {
            let mut best: Option<(f64, usize)> = None;
            for j in 0..w {
                if let Some((a, s)) = eligible(j) {
                    let ratio = s / a;
                    if best.is_none_or(|(b, _)| ratio < b - 1e-12) {
                        best = Some((ratio, j));
                    }
                }
            }
            return best.map(|b| b.1);
        }
        let mut theta_max = f64::INFINITY;
        for j in 0..w {
            if let Some((a, s)) = eligible(j) {
                theta_max = theta_max.min((s + DUAL_TOL) / a);
            }
        }
        if !theta_max.is_finite() {
            return None;
        }
        let mut pick: Option<(f64, usize)> = None;
        for j in 0..w {
            if let Some((a, s)) = eligible(j) {
                if s / a <= theta_max && pick.is_none_or(|(b, _)| a > b) {
                    pick = Some((a, j));
                }
            }
        }
        pick.map(|p| p.1)
    }

    /// Primal simplex from a primal feasible basis with the true costs.
    fn primal_phase(&mut self) -> Result<Outcome> {
        let limit = self.iteration_limit();
        let mut degenerate = 0usize;
        let w = self.width;
        for it in 0..limit {
            if self.expired(it) {
                return Ok(Outcome::Interrupted);
            }
            if self.since_refactor >= REFACTOR_EVERY {
                self.refactor()?;
            }
            let bland = degenerate >= BLAND_AFTER;
            let mut pick: Option<(f64, usize)> = None;
            for j in 0..w {
                if self.is_basic(j) || self.lo[j] == self.hi[j] {
                    continue;
                }
                let v = self.dual_infeasibility(j);
                if v > DUAL_TOL && pick.is_none_or(|(b, _)| !bland && v > b) {
                    pick = Some((v, j));
                }
            }
            let Some((_, q)) = pick else {
                return Ok(Outcome::Optimal);
            };
            let dir = if self.can_up(q) && self.d[q] < 0.0 { 1.0 } else { -1.0 };
            // Basic i moves by c_i * step with c_i = -tab[i][q] * dir.
            let coef = |i: usize| -self.tab[i * w + q] * dir;
            let room = |i: usize, tol: f64| -> f64 {
                let c = coef(i);
                let jb = self.basis[i];
                if c > PIVOT_TOL {
                    (self.hi[jb] + tol - self.beta[i]) / c
                } else if c < -PIVOT_TOL {
                    (self.lo[jb] - tol - self.beta[i]) / c
                } else {
                    f64::INFINITY
                }
            };
            let mut theta_max = f64::INFINITY;
            for i in 0..self.m {
                theta_max = theta_max.min(room(i, PRIMAL_TOL));
            }
            let own = self.hi[q] - self.lo[q];
            if !theta_max.is_finite() && !own.is_finite() {
                return Ok(Outcome::Unbounded);
            }
            let mut leave: Option<(f64, usize)> = None;
            if theta_max.is_finite() {
                for i in 0..self.m {
                    let c = coef(i).abs();
                    if c > PIVOT_TOL && room(i, 0.0) <= theta_max && leave.is_none_or(|(b, _)| c > b) {
                        leave = Some((c, i));
                    }
                }
            }
            let step = leave.map_or(f64::INFINITY, |(_, i)| room(i, 0.0).max(0.0));
            if own <= step {
                // Bound flip, no basis change.
                let to = if dir > 0.0 { self.hi[q] } else { self.lo[q] };
                self.shift_nonbasic(q, to);
                degenerate = 0;
                continue;
            }
            let (_, r) = leave.expect("finite step has a leaving row");
            if step <= PRIMAL_TOL {
                degenerate += 1;
            } else {
                degenerate = 0;
            }
            for i in 0..self.m {
                let c = coef(i);
                if c != 0.0 {
                    self.beta[i] += c * step;
                }
            }
            let jb = self.basis[r];
            let c = coef(r);
            let bound = if c > 0.0 { self.hi[jb] } else { self.lo[jb] };
            self.x[q] += dir * step;
            self.x[jb] = bound;
            self.beta[r] = self.x[q];
            self.pivot(r, q);
        }
        Err(Error::Numerical("primal simplex iteration limit".into()))
    }

    fn pivot(&mut self, r: usize, q: usize) {
        let w = self.width;
        let alpha = self.tab[r * w + q];
        let (before, rest) = self.tab.split_at_mut(r * w);
        let (prow, after) = rest.split_at_mut(w);
        let inv = 1.0 / alpha;
        for v in prow.iter_mut() {
            *v *= inv;
        }
        prow[q] = 1.0;
        let nz: Vec<usize> = (0..w).filter(|&j| prow[j] != 0.0).collect();
        let eliminate = |row: &mut [f64]| {
            let f = row[q];
            if f != 0.0 {
                for &j in &nz {
                    row[j] -= f * prow[j];
                }
                row[q] = 0.0;
            }
        };
        for row in before.chunks_mut(w) {
            eliminate(row);
        }
        for row in after.chunks_mut(w) {
            eliminate(row);
        }
        let dq = self.d[q];
        if dq != 0.0 {
            for &j in &nz {
                self.d[j] -= dq * prow[j];
            }
        }
        self.d[q] = 0.0;
        let leaving = self.basis[r];
        self.row_of[leaving] = NONBASIC;
        self.basis[r] = q;
        self.row_of[q] = r;
        self.since_refactor += 1;
        self.pivots += 1;
    }

    /// Rebuilds the tableau, basic values and reduced costs from the basis.
    pub(crate) fn refactor(&mut self) -> Result<()> {
        let m = self.m;
        let w = self.width;
        let mut b = vec![0.0; m * m];
        for (k, &j) in self.basis.iter().enumerate() {
            for &(i, a) in &self.cols[j] {
                b[i * m + k] = a;
            }
        }
        let inv = invert(&mut b, m).ok_or_else(|| Error::Numerical("singular basis".into()))?;
        let mut tab = vec![0.0; m * w];
        for j in 0..w {
            for &(k, a) in &self.cols[j] {
                for i in 0..m {
                    let v = inv[i * m + k];
                    if v != 0.0 {
                        tab[i * w + j] += v * a;
                    }
                }
            }
        }
        for (k, &j) in self.basis.iter().enumerate() {
            for i in 0..m {
                tab[i * w + j] = if i == k { 1.0 } else { 0.0 };
            }
        }
        self.tab = tab;
        self.recompute_d();
        self.recompute_beta();
        self.since_refactor = 0;
        Ok(())
    }

    /// Bounds on structural columns implied by the current optimal basis
    /// for solutions with objective at most `limit`, as
    /// `(column, lower, upper)`; only tightened columns are listed.
    pub(crate) fn implied_bounds(&self, limit: f64) -> Vec<(usize, f64, f64)> {
        let room = limit - self.objective();
        let mut out = Vec::new();
        if !(room >= 0.0) || self.work != self.cost {
            return out;
        }
        for j in 0..self.n {
            if self.is_basic(j) || self.lo[j] == self.hi[j] {
                continue;
            }
            let d = self.d[j];
            if self.x[j] == self.lo[j] && d > DUAL_TOL {
                let hi = self.lo[j] + room / d;
                if hi < self.hi[j] {
                    out.push((j, self.lo[j], hi));
                }
            } else if self.x[j] == self.hi[j] && d < -DUAL_TOL {
                let lo = self.hi[j] + room / d;
                if lo > self.lo[j] {
                    out.push((j, lo, self.hi[j]));
                }
            }
        }
        out
    }

    /// Appends rows `lo <= a·x <= hi` over structural columns. Each new
    /// activity column enters the basis, so the current basis stays dual
    /// feasible and the next solve only has to repair primal violations.
    pub(crate) fn add_rows(&mut self, rows: &[(Vec<(usize, f64)>, f64, f64)]) -> Result<()> {
        let (m0, w0, k) = (self.m, self.width, rows.len());
        if k == 0 {
            return Ok(());
        }
        let (m, w) = (m0 + k, w0 + k);
        let mut tab = vec![0.0; m * w];
        for i in 0..m0 {
            tab[i * w..i * w + w0].copy_from_slice(&self.tab[i * w0..(i + 1) * w0]);
        }
        for (t, (terms, lo, hi)) in rows.iter().enumerate() {
            if lo > hi || lo.is_nan() || hi.is_nan() {
                return Err(Error::Numerical("inconsistent bounds on added row".into()));
            }
            let i = m0 + t;
            let mut row = vec![0.0; w];
            for &(j, a) in terms {
                if j >= self.n {
                    return Err(Error::Numerical(format!("added row references column {j} of {}", self.n)));
                }
                row[j] += a;
                self.cols[j].push((i, a));
            }
            row[w0 + t] = -1.0;
            for j in 0..self.n {
                let c = row[j];
                if c != 0.0 && self.is_basic(j) {
                    let src = &tab[self.row_of[j] * w..self.row_of[j] * w + w0];
                    for (v, &s) in row.iter_mut().zip(src) {
                        *v -= c * s;
                    }
                }
            }
            let mut beta = 0.0;
            for (j, v) in row.iter_mut().enumerate() {
                *v = -*v;
                if j < w0 && *v != 0.0 && !self.is_basic(j) {
                    beta -= *v * self.x[j];
                }
            }
            tab[i * w..(i + 1) * w].copy_from_slice(&row);
            self.beta.push(beta);
            self.cols.push(vec![(i, -1.0)]);
            self.lo.push(*lo);
            self.hi.push(*hi);
        }
        self.tab = tab;
        self.m = m;
        self.width = w;
        self.cost.resize(w, 0.0);
        self.work.resize(w, 0.0);
        self.d.resize(w, 0.0);
        self.x.resize(w, 0.0);
        self.row_of.resize(w, NONBASIC);
        for t in 0..k {
            self.basis.push(w0 + t);
            self.row_of[w0 + t] = m0 + t;
        }
        Ok(())
    }

    fn full_solution(&self) -> Vec<f64> {
        let mut x = self.x.clone();
        for (i, &j) in self.basis.iter().enumerate() {
            x[j] = self.beta[i];
        }
        x
    }

    /// Structural values of the current basic solution.
    pub(crate) fn solution(&self) -> Vec<f64> {
        let mut x = self.full_solution();
        x.truncate(self.n);
        x
    }

    /// Minimization objective of the current solution.
    pub(crate) fn objective(&self) -> f64 {
        self.solution().iter().zip(&self.cost).map(|(x, c)| x * c).sum()
    }
}

/// Gauss-Jordan inverse with partial pivoting.
fn invert(a: &mut [f64], m: usize) -> Option<Vec<f64>> {
    let mut inv = vec![0.0; m * m];
    for i in 0..m {
        inv[i * m + i] = 1.0;
    }
    for c in 0..m {
        let p = (c..m).max_by(|&x, &y| a[x * m + c].abs().total_cmp(&a[y * m + c].abs()))?;
        if a[p * m + c].abs() < 1e-12 {
            return None;
        }
        if p != c {
            for k in 0..m {
                a.swap(p * m + k, c * m + k);
                inv.swap(p * m + k, c * m + k);
            }
        }
        let f = 1.0 / a[c * m + c];
        for k in 0..m {
            a[c * m + k] *= f;
            inv[c * m + k] *= f;
        }
        for r in 0..m {
            if r != c {
                let g = a[r * m + c];
                if g != 0.0 {
                    for k in 0..m {
                        a[r * m + k] -= g * a[c * m + k];
                        inv[r * m + k] -= g * inv[c * m + k];
                    }
                }
            }
        }
    }
    Some(inv)
}

/// Solves the LP relaxation of `model` (integrality dropped).
pub fn solve_lp(model: &MipModel) -> Result<LpResult> {
    let lp = LpProblem::from_model(model);
    let sign = match model.objective().sense {
        Sense::Minimize => 1.0,
        Sense::Maximize => -1.0,
    };
    let mut s = Simplex::new(&lp)?;
    match s.solve()? {
        Outcome::Infeasible => Ok(LpResult { status: LpStatus::Infeasible, values: Vec::new(), objective: f64::NAN }),
        Outcome::Unbounded => {
            Ok(LpResult { status: LpStatus::Unbounded, values: Vec::new(), objective: sign * f64::NEG_INFINITY })
        }
        Outcome::Interrupted => Err(Error::Numerical("LP solve interrupted".into())),
        Outcome::Optimal => {
            let values = s.solution();
            Ok(LpResult { status: LpStatus::Optimal, objective: model.objective_value(&values), values })
        }
    }
}
