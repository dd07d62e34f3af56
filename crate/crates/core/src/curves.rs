//! Learning-curve evaluation and piecewise-linear approximation.
//!
//! `approximate` builds a finite piecewise-linear curve within a relative
//! error band of a smooth non-decreasing curve: a tangent segment at the
//! origin, a bridge back onto the curve, then chords whose endpoint values
//! grow geometrically by `1 + eps`. `concave_blocks` splits a piecewise-linear
//! curve into maximal concave runs, which is what the MILP encoding consumes.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::domain::CurveSpec;
use crate::error::{Error, Result};

const SLOPE_TOL: f64 = 1e-9;
const CONTINUITY_TOL: f64 = 1e-9;

/// Continuous, non-decreasing piecewise-linear curve through `(0, 0)`.
///
/// The breakpoints bound the finite segments; the curve continues flat after
/// the last breakpoint, so the final segment is unbounded.
#[derive(Debug, Clone, PartialEq)]
pub struct PwlCurve {
    breakpoints: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub start: f64,
    /// `f64::INFINITY` for the final segment.
    pub end: f64,
    pub slope: f64,
    pub intercept: f64,
}

impl Segment {
    pub fn value_at(&self, t: f64) -> f64 {
        self.slope * t + self.intercept
    }
}

impl PwlCurve {
    /// Builds a curve from breakpoints `(t, value)`; the first must be
    /// `(0, 0)`. Collinear interior breakpoints are dropped.
    pub fn new(breakpoints: Vec<(f64, f64)>) -> Result<Self> {
        let Some(&(t0, v0)) = breakpoints.first() else {
            return Err(Error::InvalidCurve("piecewise-linear curve needs at least one breakpoint".into()));
        };
        if t0 != 0.0 || v0.abs() > CONTINUITY_TOL {
            return Err(Error::InvalidCurve(format!("first breakpoint must be (0, 0), got ({t0}, {v0})")));
        }
        for w in breakpoints.windows(2) {
            let ((ta, va), (tb, vb)) = (w[0], w[1]);
            if !(tb.is_finite() && vb.is_finite()) {
                return Err(Error::InvalidCurve("non-finite breakpoint".into()));
            }
            if tb <= ta {
                return Err(Error::InvalidCurve(format!("breakpoint abscissae must increase ({ta} then {tb})")));
            }
            if vb < va - CONTINUITY_TOL {
                return Err(Error::NonMonotoneCurve);
            }
        }
        if let Some(&(_, v)) = breakpoints.iter().find(|&&(_, v)| !(-CONTINUITY_TOL..=1.0 + CONTINUITY_TOL).contains(&v)) {
            return Err(Error::InvalidCurve(format!("curve value {v} outside [0, 1]")));
        }
        let mut pts: Vec<(f64, f64)> = Vec::with_capacity(breakpoints.len());
        for &(t, v) in &breakpoints {
            let v = v.clamp(0.0, 1.0 + CONTINUITY_TOL);
            if pts.len() >= 2 {
                let (ta, va) = pts[pts.len() - 2];
                let (tb, vb) = pts[pts.len() - 1];
                let s1 = (vb - va) / (tb - ta);
                let s2 = (v - vb) / (t - tb);
                if (s1 - s2).abs() <= 1e-12 * (1.0 + s1.abs()) {
                    pts.pop();
                }
            }
            pts.push((t, v));
        }
        // A trailing flat piece is the same as the unbounded tail.
        while pts.len() >= 2 {
            let (_, va) = pts[pts.len() - 2];
            let (_, vb) = pts[pts.len() - 1];
            if (vb - va).abs() <= 1e-15 {
                pts.pop();
            } else {
                break;
            }
        }
        Ok(Self { breakpoints: pts })
    }

    pub fn breakpoints(&self) -> &[(f64, f64)] {
        &self.breakpoints
    }

    /// All segments, the last of which extends to infinity with slope 0.
    pub fn segments(&self) -> Vec<Segment> {
        let mut segs: Vec<Segment> = self
            .breakpoints
            .windows(2)
            .map(|w| {
                let ((ta, va), (tb, vb)) = (w[0], w[1]);
                let slope = (vb - va) / (tb - ta);
                Segment { start: ta, end: tb, slope, intercept: va - slope * ta }
            })
            .collect();
        let &(t_last, v_last) = self.breakpoints.last().expect("non-empty");
        segs.push(Segment { start: t_last, end: f64::INFINITY, slope: 0.0, intercept: v_last });
        segs
    }

    pub fn segment_count(&self) -> usize {
        self.breakpoints.len()
    }

    pub fn final_segment_unbounded(&self) -> bool {
        true
    }

    /// Time after which the curve is flat.
    pub fn saturation_time(&self) -> f64 {
        self.breakpoints.last().expect("non-empty").0
    }

    pub fn max_value(&self) -> f64 {
        self.breakpoints.last().expect("non-empty").1
    }

    pub fn eval(&self, t: f64) -> f64 {
        let bp = &self.breakpoints;
        if t >= bp[bp.len() - 1].0 {
            return bp[bp.len() - 1].1;
        }
        let idx = bp.partition_point(|&(tb, _)| tb <= t);
        let (ta, va) = bp[idx - 1];
        let (tb, vb) = bp[idx];
        va + (vb - va) * (t - ta) / (tb - ta)
    }

    /// Right derivative.
    fn slope_at(&self, t: f64) -> f64 {
        let bp = &self.breakpoints;
        if t >= bp[bp.len() - 1].0 {
            return 0.0;
        }
        let idx = bp.partition_point(|&(tb, _)| tb <= t);
        let (ta, va) = bp[idx - 1];
        let (tb, vb) = bp[idx];
        (vb - va) / (tb - ta)
    }

    pub fn is_concave(&self) -> bool {
        concave_blocks(self).blocks.len() == 1
    }
}

/// A curve given by samples on a strictly increasing grid, evaluated by
/// linear interpolation and held constant after the last sample.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledCurve {
    points: Vec<(f64, f64)>,
}

impl SampledCurve {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        let Some(&(t0, _)) = points.first() else {
            return Err(Error::InvalidCurve("sampled curve needs at least one sample".into()));
        };
        if t0 != 0.0 {
            return Err(Error::InvalidCurve(format!("first sample must be at t = 0, got {t0}")));
        }
        for w in points.windows(2) {
            if !(w[1].0 > w[0].0) {
                return Err(Error::InvalidCurve(format!(
                    "sample abscissae must be strictly increasing ({} then {})",
                    w[0].0, w[1].0
                )));
            }
        }
        for &(t, v) in &points {
            if !(t.is_finite() && v.is_finite() && (0.0..=1.0 + CONTINUITY_TOL).contains(&v)) {
                return Err(Error::InvalidCurve(format!("sample ({t}, {v}) outside [0, 1]")));
            }
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.1).collect()
    }

    pub fn eval(&self, t: f64) -> f64 {
        let p = &self.points;
        if t >= p[p.len() - 1].0 {
            return p[p.len() - 1].1;
        }
        let idx = p.partition_point(|&(tb, _)| tb <= t);
        let (ta, va) = p[idx - 1];
        let (tb, vb) = p[idx];
        va + (vb - va) * (t - ta) / (tb - ta)
    }

    pub fn is_non_decreasing(&self) -> bool {
        self.points.windows(2).all(|w| w[1].1 >= w[0].1)
    }
}

/// Which side(s) of the original curve the approximation may lie on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flavor {
    /// `|f - g| / f <= eps`.
    Band,
    /// `f <= g <= f / (1 - eps)`.
    Upper,
}

impl std::str::FromStr for Flavor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "band" => Ok(Flavor::Band),
            "upper" => Ok(Flavor::Upper),
            other => Err(Error::Schema(format!("unknown flavor `{other}` (expected band or upper)"))),
        }
    }
}

/// Evaluates `f(t)` in `[0, 1]`.
pub fn eval_curve(spec: &CurveSpec, t: f64) -> Result<f64> {
    if t < 0.0 || t.is_nan() {
        return Err(Error::NegativeTime(t));
    }
    Ok(match spec {
        CurveSpec::Linear { rate } => (rate * t).min(1.0),
        CurveSpec::Exponential { rate } => -(-rate * t).exp_m1(),
        CurveSpec::Pwl(pwl) => pwl.eval(t),
        CurveSpec::Sampled(s) => s.eval(t),
    })
}

fn value(spec: &CurveSpec, t: f64) -> f64 {
    eval_curve(spec, t.max(0.0)).expect("non-negative time")
}

/// Right derivative of the curve.
fn derivative(spec: &CurveSpec, t: f64) -> f64 {
    match spec {
        CurveSpec::Linear { rate } => {
            if rate * t < 1.0 {
                *rate
            } else {
                0.0
            }
        }
        CurveSpec::Exponential { rate } => rate * (-rate * t).exp(),
        CurveSpec::Pwl(pwl) => pwl.slope_at(t),
        CurveSpec::Sampled(s) => {
            let p = s.points();
            if t >= p[p.len() - 1].0 {
                return 0.0;
            }
            let idx = p.partition_point(|&(tb, _)| tb <= t);
            (p[idx].1 - p[idx - 1].1) / (p[idx].0 - p[idx - 1].0)
        }
    }
}

/// Supremum of the curve and whether it is attained at a finite time.
fn supremum(spec: &CurveSpec) -> (f64, bool) {
    match spec {
        CurveSpec::Linear { .. } => (1.0, true),
        CurveSpec::Exponential { .. } => (1.0, false),
        CurveSpec::Pwl(p) => (p.max_value(), true),
        CurveSpec::Sampled(s) => (s.points().iter().fold(0.0f64, |m, p| m.max(p.1)), true),
    }
}

/// Smallest `t` with `f(t) >= y`, if any.
fn inverse(spec: &CurveSpec, y: f64) -> Option<f64> {
    if y <= 0.0 {
        return Some(0.0);
    }
    match spec {
        CurveSpec::Linear { rate } => (y <= 1.0).then(|| y / rate),
        CurveSpec::Exponential { rate } => (y < 1.0).then(|| -(-y).ln_1p() / rate),
        CurveSpec::Pwl(p) => invert_points(p.breakpoints(), y),
        CurveSpec::Sampled(s) => invert_points(s.points(), y),
    }
}

fn invert_points(points: &[(f64, f64)], y: f64) -> Option<f64> {
    for w in points.windows(2) {
        let ((ta, va), (tb, vb)) = (w[0], w[1]);
        if vb >= y {
            if va >= y {
                return Some(ta);
            }
            return Some(ta + (y - va) * (tb - ta) / (vb - va));
        }
    }
    None
}

/// Characteristic time scale used to lay out validation grids.
pub fn time_scale(spec: &CurveSpec) -> f64 {
    match spec {
        CurveSpec::Linear { rate } | CurveSpec::Exponential { rate } => 1.0 / rate,
        CurveSpec::Pwl(p) => (p.saturation_time() / 3.0).max(1e-9),
        CurveSpec::Sampled(s) => (s.points().last().expect("non-empty").0 / 3.0).max(1e-9),
    }
}

/// `count` log-spaced points over `[1e-4 T, 30 T]` where `T` is the curve's
/// time scale.
pub fn log_grid(spec: &CurveSpec, count: usize) -> Vec<f64> {
    let scale = time_scale(spec);
    let (lo, hi) = ((1e-4 * scale).ln(), (30.0 * scale).ln());
    (0..count)
        .map(|k| (lo + (hi - lo) * k as f64 / (count - 1).max(1) as f64).exp())
        .collect()
}

/// Running maximum `t -> max_{s <= t} f(s)` over the sample grid.
pub fn monotonize(curve: &SampledCurve) -> SampledCurve {
    let mut best = f64::NEG_INFINITY;
    let points = curve
        .points()
        .iter()
        .map(|&(t, v)| {
            best = best.max(v);
            (t, best)
        })
        .collect();
    SampledCurve { points }
}

/// Largest relative error `|f - g| / f` over a log-spaced grid, skipping
/// points where `f < 1e-12`.
pub fn validate_pwl_error(spec: &CurveSpec, pwl: &PwlCurve, grid_points: usize) -> Result<f64> {
    if grid_points < 100 {
        return Err(Error::InvalidCurve(format!("validation grid needs at least 100 points, got {grid_points}")));
    }
    Ok(max_relative_error(spec, pwl, &log_grid(spec, grid_points)))
}

pub fn max_relative_error(spec: &CurveSpec, pwl: &PwlCurve, grid: &[f64]) -> f64 {
    grid.iter()
        .filter_map(|&t| {
            let f = value(spec, t);
            (f >= 1e-12).then(|| (f - pwl.eval(t)).abs() / f)
        })
        .fold(0.0, f64::max)
}

/// Worst violation of the upper-flavor sandwich `f <= g <= f / (1 - eps)`,
/// as a relative amount (0 when satisfied).
pub fn upper_violation(spec: &CurveSpec, pwl: &PwlCurve, eps: f64, grid: &[f64]) -> f64 {
    grid.iter()
        .filter_map(|&t| {
            let f = value(spec, t);
            if f < 1e-12 {
                return None;
            }
            let g = pwl.eval(t);
            let below = (f - g) / f;
            let above = (g - f / (1.0 - eps)) / f;
            Some(below.max(above).max(0.0))
        })
        .fold(0.0, f64::max)
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::EpsilonOutOfRange(eps));
    }
    Ok(())
}

fn exact_linear(rate: f64) -> PwlCurve {
    PwlCurve::new(vec![(0.0, 0.0), (1.0 / rate, 1.0)]).expect("valid ramp")
}

/// Exact piecewise-linear form when the curve already is one.
fn exact_pwl(spec: &CurveSpec) -> Result<Option<PwlCurve>> {
    Ok(match spec {
        CurveSpec::Linear { rate } => Some(exact_linear(*rate)),
        CurveSpec::Pwl(p) => Some(p.clone()),
        CurveSpec::Sampled(s) => {
            if !s.is_non_decreasing() {
                return Err(Error::NonMonotoneCurve);
            }
            if s.points()[0].1 != 0.0 {
                return Err(Error::InvalidCurve("sampled curve must start at value 0".into()));
            }
            Some(PwlCurve::new(s.points().to_vec())?)
        }
        CurveSpec::Exponential { .. } => None,
    })
}

/// Piecewise-linear approximation of `spec` within relative error `eps`.
///
/// Curves that already are piecewise linear (linear, pwl, sampled) are
/// returned exactly. Smooth curves go through the constructive scheme in
/// the module docs; the result is checked on a dense grid and rebuilt with a
/// tighter internal tolerance if the check fails.
pub fn approximate(spec: &CurveSpec, eps: f64, flavor: Flavor) -> Result<PwlCurve> {
    check_eps(eps)?;
    spec.validate()?;
    if let Some(exact) = exact_pwl(spec)? {
        return Ok(exact);
    }
    let grid = log_grid(spec, 10_000);
    match flavor {
        Flavor::Band => {
            let mut inner = eps;
            for _ in 0..30 {
                let pwl = construct_band(spec, inner)?;
                if max_relative_error(spec, &pwl, &grid) <= eps {
                    return Ok(pwl);
                }
                inner *= 0.8;
            }
            Err(Error::Numerical("band approximation did not meet its tolerance".into()))
        }
        Flavor::Upper => {
            // Scale a band fit of half-width eps / (2 - eps) up by 1 / (1 - eps_b)
            // and cap at the supremum: (1 + eps_b) / (1 - eps_b) = 1 / (1 - eps).
            let mut inner = eps / (2.0 - eps);
            for _ in 0..30 {
                let band = construct_band(spec, inner)?;
                let pwl = scale_and_cap(&band, 1.0 / (1.0 - inner), supremum(spec).0)?;
                if upper_violation(spec, &pwl, eps, &grid) <= 1e-12 {
                    return Ok(pwl);
                }
                inner *= 0.8;
            }
            Err(Error::Numerical("upper approximation did not meet its tolerance".into()))
        }
    }
}

fn construct_band(spec: &CurveSpec, eps: f64) -> Result<PwlCurve> {
    let s0 = derivative(spec, 0.0);
    if !(s0 > 0.0) {
        return Err(Error::InvalidCurve("curve needs a positive slope at t = 0".into()));
    }
    let (sup, attained) = supremum(spec);
    // Tangent tolerance chosen so the tangent's relative error stays within eps.
    let tangent_eps = eps / (1.0 + eps);
    let within = |t: f64| (derivative(spec, t) - s0).abs() <= tangent_eps * s0;
    let mut hi = time_scale(spec);
    while within(hi) && hi < 1e6 * time_scale(spec) {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if within(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let tau1 = lo.max(1e-12 * time_scale(spec));
    let y1 = (s0 * tau1).min(sup);
    let mut pts = vec![(0.0, 0.0), (tau1, y1)];
    let f1 = value(spec, tau1);
    let tiny = 1e-15;
    if y1 > f1 + tiny {
        // Tangent overshoots: run flat until the curve catches up.
        match inverse(spec, y1) {
            Some(tau2) if tau2 > tau1 => pts.push((tau2, y1)),
            Some(_) => {}
            None => return PwlCurve::new(pts),
        }
    } else if y1 < f1 - tiny {
        // Tangent undershoots: secant back onto the curve.
        let target = ((1.0 + tangent_eps) * f1).min(if attained { sup } else { sup / (1.0 + eps) });
        let tau2 = inverse(spec, target).ok_or(Error::Numerical("curve inverse failed".into()))?;
        if tau2 > tau1 {
            pts.push((tau2, target));
        }
    }
    let y_star = if attained { sup } else { sup / (1.0 + eps) };
    loop {
        let (t_cur, y_cur) = *pts.last().expect("non-empty");
        if y_cur >= y_star * (1.0 - 1e-15) {
            break;
        }
        let target = ((1.0 + eps) * y_cur).min(y_star);
        let t_next = inverse(spec, target).ok_or(Error::Numerical("curve inverse failed".into()))?;
        if t_next <= t_cur {
            // Flat stretch in the curve already at or above target.
            let y_at = value(spec, t_cur);
            pts.last_mut().expect("non-empty").1 = y_at.max(y_cur);
            if y_at <= y_cur {
                break;
            }
            continue;
        }
        pts.push((t_next, target));
        if pts.len() > 100_000 {
            return Err(Error::Numerical("approximation needs too many segments".into()));
        }
    }
    if !attained {
        // Final rise from (t*, sup / (1 + eps)) to the supremum. Any positive
        // slope keeps the relative error within eps; a slope no steeper than the
        // previous piece keeps concave curves concave.
        let n = pts.len();
        let (t_star, y_s) = pts[n - 1];
        let prev_slope = if n >= 2 {
            (pts[n - 1].1 - pts[n - 2].1) / (pts[n - 1].0 - pts[n - 2].0)
        } else {
            s0
        };
        let local = derivative(spec, t_star);
        let slope = if local > 0.0 { local.min(prev_slope) } else { prev_slope };
        if slope > 0.0 && y_s < sup {
            pts.push((t_star + (sup - y_s) / slope, sup));
        }
    }
    PwlCurve::new(pts)
}

fn scale_and_cap(curve: &PwlCurve, factor: f64, cap: f64) -> Result<PwlCurve> {
    let mut pts: Vec<(f64, f64)> = Vec::new();
    for &(t, v) in curve.breakpoints() {
        let scaled = v * factor;
        if scaled >= cap {
            if let Some(&(tp, vp)) = pts.last() {
                let t_cross = if scaled > vp { tp + (cap - vp) * (t - tp) / (scaled - vp) } else { t };
                pts.push((t_cross.max(tp + f64::EPSILON * tp.max(1.0)), cap));
            }
            return PwlCurve::new(pts);
        }
        pts.push((t, scaled));
    }
    PwlCurve::new(pts)
}

/// Drops breakpoints greedily while the flavor's error bound still holds on a
/// dense grid. Used to shrink MILP models; the result keeps the same bound
/// with a small safety margin.
pub fn compact(spec: &CurveSpec, pwl: &PwlCurve, eps: f64, flavor: Flavor) -> Result<PwlCurve> {
    check_eps(eps)?;
    if exact_pwl(spec)?.is_some() {
        return Ok(pwl.clone());
    }
    let grid = log_grid(spec, 10_000);
    let mut pts = pwl.breakpoints().to_vec();
    let ok = |pts: &[(f64, f64)], lo: f64, hi: f64| -> bool {
        let Ok(cand) = PwlCurve::new(pts.to_vec()) else {
            return false;
        };
        let mut samples: Vec<f64> = grid.iter().copied().filter(|&t| t > lo && t < hi).collect();
        let hi_eff = if hi.is_finite() { hi } else { lo + 30.0 * time_scale(spec) };
        samples.extend((1..64).map(|k| lo + (hi_eff - lo) * k as f64 / 64.0));
        samples.iter().all(|&t| {
            let f = value(spec, t);
            if f < 1e-12 {
                return true;
            }
            let g = cand.eval(t);
            match flavor {
                Flavor::Band => (f - g).abs() / f <= eps * (1.0 - 1e-6),
                Flavor::Upper => g >= f * (1.0 + 1e-12) && g <= f / (1.0 - eps) * (1.0 - 1e-6),
            }
        })
    };
    let mut changed = true;
    while changed {
        changed = false;
        let mut i = 1;
        while i + 1 < pts.len() {
            let mut trial = pts.clone();
            trial.remove(i);
            let lo = pts[i - 1].0;
            let hi = if i + 1 < pts.len() { pts[i + 1].0 } else { f64::INFINITY };
            if ok(&trial, lo, hi) {
                pts = trial;
                changed = true;
            } else {
                i += 1;
            }
        }
    }
    PwlCurve::new(pts)
}

/// Maximal run of segments with strictly decreasing slopes.
#[derive(Debug, Clone, PartialEq)]
pub struct ConcaveBlock {
    pub start: f64,
    /// Infinite when the block contains the unbounded tail.
    pub end: f64,
    pub segments: Vec<Segment>,
}

impl ConcaveBlock {
    /// End of the last segment carrying positive slope (finite).
    pub fn effective_end(&self) -> f64 {
        if self.end.is_finite() {
            self.end
        } else {
            self.segments.last().expect("non-empty").start
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConcaveBlocks {
    pub blocks: Vec<ConcaveBlock>,
}

impl ConcaveBlocks {
    pub fn segments(&self) -> Vec<Segment> {
        self.blocks.iter().flat_map(|b| b.segments.iter().copied()).collect()
    }
}

/// Greedy left-to-right grouping of segments into maximally concave blocks.
pub fn concave_blocks(pwl: &PwlCurve) -> ConcaveBlocks {
    let mut blocks: Vec<ConcaveBlock> = Vec::new();
    for seg in pwl.segments() {
        match blocks.last_mut() {
            Some(block) if seg.slope < block.segments.last().expect("non-empty").slope - SLOPE_TOL => {
                block.end = seg.end;
                block.segments.push(seg);
            }
            _ => blocks.push(ConcaveBlock { start: seg.start, end: seg.end, segments: vec![seg] }),
        }
    }
    ConcaveBlocks { blocks }
}

/// Searches numerically for a `segments`-piece curve (the last piece flat and
/// unbounded) minimizing the maximum relative error to `spec`. Returns the
/// best curve found and its error on a 10^4-point grid.
pub fn fit_segments(spec: &CurveSpec, segments: usize, seed: u64) -> Result<(PwlCurve, f64)> {
    if segments < 2 {
        return Err(Error::InvalidCurve("a fit needs at least two segments".into()));
    }
    spec.validate()?;
    let free = segments - 1;
    let dim = 2 * free;
    let scale = time_scale(spec);
    let coarse: Vec<f64> = log_grid(spec, 1500);
    let decode = |x: &[f64]| -> Option<PwlCurve> {
        let mut pts = vec![(0.0, 0.0)];
        let mut t = 0.0;
        let mut ys: Vec<f64> = x[free..].to_vec();
        ys.sort_by(|a, b| a.total_cmp(b));
        for k in 0..free {
            t += x[k] * scale;
            pts.push((t, ys[k].min(1.0)));
        }
        PwlCurve::new(pts).ok()
    };
    let cost = |x: &[f64]| -> f64 { decode(x).map_or(f64::INFINITY, |p| max_relative_error(spec, &p, &coarse)) };
    let bounds: Vec<(f64, f64)> = (0..dim).map(|k| if k < free { (1e-3, 5.0) } else { (0.0, 1.0) }).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pop_size = 15 * dim;
    let mut pop: Vec<Vec<f64>> = (0..pop_size)
        .map(|_| bounds.iter().map(|&(lo, hi)| rng.gen_range(lo..hi)).collect())
        .collect();
    let mut scores: Vec<f64> = pop.iter().map(|x| cost(x)).collect();
    for _ in 0..1500 {
        for i in 0..pop_size {
            let pick = |rng: &mut ChaCha8Rng| loop {
                let j = rng.gen_range(0..pop_size);
                if j != i {
                    break j;
                }
            };
            let (a, b, c) = (pick(&mut rng), pick(&mut rng), pick(&mut rng));
            let forced = rng.gen_range(0..dim);
            let trial: Vec<f64> = (0..dim)
                .map(|k| {
                    if k == forced || rng.gen::<f64>() < 0.9 {
                        let v = pop[a][k] + 0.6 * (pop[b][k] - pop[c][k]);
                        v.clamp(bounds[k].0, bounds[k].1)
                    } else {
                        pop[i][k]
                    }
                })
                .collect();
            let s = cost(&trial);
            if s <= scores[i] {
                pop[i] = trial;
                scores[i] = s;
            }
        }
    }
    let best = (0..pop_size).min_by(|&a, &b| scores[a].total_cmp(&scores[b])).expect("population");
    let curve = decode(&pop[best]).ok_or(Error::Numerical("fit produced an invalid curve".into()))?;
    let err = validate_pwl_error(spec, &curve, 10_000)?;
    Ok((curve, err))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exp(rate: f64) -> CurveSpec {
        CurveSpec::Exponential { rate }
    }

    #[test]
    fn eval_examples() {
        assert_eq!(eval_curve(&CurveSpec::Linear { rate: 0.5 }, 2.0).unwrap(), 1.0);
        assert_eq!(eval_curve(&exp(1.0), 0.0).unwrap(), 0.0);
        assert!(matches!(eval_curve(&exp(1.0), -1.0), Err(Error::NegativeTime(_))));
        let s = SampledCurve::new(vec![(0.0, 0.0), (1.0, 0.5), (2.0, 0.7)]).unwrap();
        let spec = CurveSpec::Sampled(s);
        assert!((eval_curve(&spec, 0.5).unwrap() - 0.25).abs() < 1e-15);
        assert_eq!(eval_curve(&spec, 10.0).unwrap(), 0.7);
    }

    #[test]
    fn pwl_rejects_bad_input() {
        assert!(PwlCurve::new(vec![(0.0, 0.1)]).is_err());
        assert!(PwlCurve::new(vec![(0.0, 0.0), (1.0, 0.5), (1.0, 0.6)]).is_err());
        assert_eq!(PwlCurve::new(vec![(0.0, 0.0), (1.0, 0.5), (2.0, 0.4)]), Err(Error::NonMonotoneCurve));
        assert!(PwlCurve::new(vec![(0.0, 0.0), (1.0, 1.5)]).is_err());
    }

    #[test]
    fn pwl_drops_collinear_points() {
        let p = PwlCurve::new(vec![(0.0, 0.0), (1.0, 0.25), (2.0, 0.5), (3.0, 0.5)]).unwrap();
        assert_eq!(p.breakpoints(), &[(0.0, 0.0), (2.0, 0.5)]);
        assert_eq!(p.segments().len(), 2);
    }

    #[test]
    fn monotonize_running_max() {
        let pts: Vec<(f64, f64)> =
            [0.0, 0.4, 0.3, 0.6, 1.0].iter().enumerate().map(|(i, &v)| (i as f64, v)).collect();
        let m = monotonize(&SampledCurve::new(pts).unwrap());
        assert_eq!(m.values(), vec![0.0, 0.4, 0.4, 0.6, 1.0]);
        let again = monotonize(&m);
        assert_eq!(again, m);
    }

    #[test]
    fn linear_is_exact() {
        for eps in [0.01, 0.3, 0.9] {
            let spec = CurveSpec::Linear { rate: 0.5 };
            let p = approximate(&spec, eps, Flavor::Band).unwrap();
            assert_eq!(p.segments().len(), 2);
            assert_eq!(validate_pwl_error(&spec, &p, 1000).unwrap(), 0.0);
        }
    }

    #[test]
    fn epsilon_range_checked() {
        for eps in [0.0, 1.0, -0.1, 2.0] {
            assert_eq!(approximate(&exp(1.0), eps, Flavor::Band), Err(Error::EpsilonOutOfRange(eps)));
        }
    }

    #[test]
    fn non_monotone_sampled_rejected() {
        let s = SampledCurve::new(vec![(0.0, 0.0), (1.0, 0.5), (2.0, 0.3)]).unwrap();
        assert_eq!(approximate(&CurveSpec::Sampled(s), 0.1, Flavor::Band), Err(Error::NonMonotoneCurve));
    }

    #[test]
    fn exponential_band_within_tolerance() {
        let spec = exp(1.0);
        let p = approximate(&spec, 0.05, Flavor::Band).unwrap();
        assert!(validate_pwl_error(&spec, &p, 10_000).unwrap() <= 0.05);
        let t = 0.7;
        let f = 1.0 - (-t as f64).exp();
        assert!((p.eval(t) - f).abs() / f <= 0.05);
        assert_eq!(p.max_value(), 1.0);
    }

    #[test]
    fn exponential_upper_sandwich() {
        let spec = exp(1.5);
        let eps = 0.1;
        let p = approximate(&spec, eps, Flavor::Upper).unwrap();
        for t in log_grid(&spec, 10_000) {
            let f = value(&spec, t);
            let g = p.eval(t);
            assert!(g >= f - 1e-9, "t={t} f={f} g={g}");
            assert!(g <= f / (1.0 - eps) + 1e-9, "t={t} f={f} g={g}");
        }
    }

    #[test]
    fn compaction_keeps_the_bound() {
        let spec = exp(1.0);
        for flavor in [Flavor::Band, Flavor::Upper] {
            let p = approximate(&spec, 0.1, flavor).unwrap();
            let c = compact(&spec, &p, 0.1, flavor).unwrap();
            assert!(c.segment_count() < p.segment_count());
            let grid = log_grid(&spec, 10_000);
            match flavor {
                Flavor::Band => assert!(max_relative_error(&spec, &c, &grid) <= 0.1),
                Flavor::Upper => assert!(upper_violation(&spec, &c, 0.1, &grid) <= 1e-9),
            }
        }
    }

    #[test]
    fn blocks_examples() {
        let slopes = |p: &ConcaveBlocks| -> Vec<Vec<f64>> {
            p.blocks.iter().map(|b| b.segments.iter().map(|s| s.slope).collect()).collect()
        };
        // slopes [2, 1] then the flat tail
        let p = PwlCurve::new(vec![(0.0, 0.0), (0.25, 0.5), (0.75, 1.0)]).unwrap();
        assert_eq!(slopes(&concave_blocks(&p)), vec![vec![2.0, 1.0, 0.0]]);
        // slopes [2, 1, 1.5]
        let p = PwlCurve::new(vec![(0.0, 0.0), (0.1, 0.2), (0.3, 0.4), (0.7, 1.0)]).unwrap();
        let b = concave_blocks(&p);
        assert_eq!(b.blocks.len(), 2);
        assert_eq!(b.blocks[0].segments.len(), 2);
        assert!((b.blocks[0].end - 0.3).abs() < 1e-12);
        // slopes [1, 2, 3]: convex, three singleton blocks (tail joins the last)
        let p = PwlCurve::new(vec![(0.0, 0.0), (0.1, 0.1), (0.2, 0.3), (0.4, 0.9)]).unwrap();
        let b = concave_blocks(&p);
        assert_eq!(b.blocks.len(), 3);
        assert_eq!(b.segments(), p.segments());
    }

    #[test]
    fn validator_reports_constructed_error() {
        let spec = CurveSpec::Linear { rate: 1.0 };
        // Near saturation f is 1 and the curve is offset by 0.1.
        let shifted = PwlCurve::new(vec![(0.0, 0.0), (1.0, 0.9)]).unwrap();
        let err = validate_pwl_error(&spec, &shifted, 1000).unwrap();
        assert!((err - 0.1).abs() < 1e-9);
        assert!(validate_pwl_error(&spec, &shifted, 10).is_err());
    }
}
