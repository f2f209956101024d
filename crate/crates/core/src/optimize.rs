//! Parameter search over the reduced `(thresh, a_U)` space.
//!
//! [`find_opt_params`] walks integer `thresh` upward and, at each value,
//! runs a ternary search over `a_U` ([`find_opt_iter`] for the default
//! objective). [`grid_oracle`] is an exhaustive cross-check and
//! [`landscape`] tabulates the surface.

use std::cmp::Ordering;
use std::io::{Read, Write};

use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::{a_u_min, is_valid, p_hat, reduced_vector, A_U_MAX};
use crate::error::{Error, Result};
use crate::iteration::{compute_iter, median_error, ITERATION_CAP};

/// Ternary search stops once the bracket is narrower than this.
pub const ABS_PRECISION: f64 = 1e-3;

/// `thresh` values beyond this abort the outer search.
pub const THRESH_LIMIT: u64 = 10_000_000;

/// An objective over the reduced problem.
///
/// `score` must be non-decreasing in `p_l` and in `p_u`, and `floor(thresh)`
/// must lower-bound `score(..).0` at every `thresh' ≥ thresh`. Monotonicity
/// makes `min(score(p, 0), score(0, p))` a lower bound wherever
/// `max(p_l, p_u) ≥ p`, which the outer search uses to skip `thresh` values.
pub trait Objective: Sync {
    /// `(value, tiebreak)`, compared lexicographically. `value` is
    /// `f64::INFINITY` where the bounds are unusable.
    fn score(&self, p_l: f64, p_u: f64, thresh: u64) -> (f64, f64);

    fn floor(&self, thresh: u64) -> f64;

    /// Best `a_U` at fixed `thresh` and its score.
    fn search(&self, thresh: u64, eps: f64) -> ((f64, f64), f64) {
        let key = |a: f64| score_at(self, thresh, a, eps);
        let a = ternary(eps, key);
        (key(a), a)
    }
}

/// `ComputeIter(p_L, p_U, δ) × thresh`, the worst-case oracle-call budget.
///
/// Within a plateau of equal `t` the tail bound at `t` breaks ties.
#[derive(Clone, Copy, Debug)]
pub struct IterTimesThresh {
    pub delta: f64,
}

impl Objective for IterTimesThresh {
    fn score(&self, p_l: f64, p_u: f64, thresh: u64) -> (f64, f64) {
        match compute_iter(p_l, p_u, self.delta) {
            Ok(t) => ((t.get() * thresh) as f64, median_error(t.get(), p_l, p_u).unwrap_or(f64::INFINITY)),
            Err(_) => (f64::INFINITY, f64::INFINITY),
        }
    }

    fn floor(&self, thresh: u64) -> f64 {
        thresh as f64
    }

    /// Ternary search on the score, then descent: while a ternary search on
    /// the tail at `t − 2` finds a point meeting `δ`, move there.
    ///
    /// The minimizer of the tail at `t − 2` lies inside the `t − 2` region
    /// whenever that region is nonempty. At the point returned, the tail at
    /// its own `t` is minimal up to search precision.
    fn search(&self, thresh: u64, eps: f64) -> ((f64, f64), f64) {
        let key = |a: f64| score_at(self, thresh, a, eps);
        let mut a = ternary(eps, key);
        let mut score = key(a);
        while score.0.is_finite() {
            let t = score.0 as u64 / thresh;
            if t < 3 {
                break;
            }
            let lower = |x: f64| match p_hat(thresh as f64, x, eps) {
                Ok((b, _)) => (median_error(t - 2, b.p_l, b.p_u).unwrap_or(f64::INFINITY), 0.0),
                Err(_) => (f64::INFINITY, 0.0),
            };
            let cand = ternary(eps, lower);
            let cand_score = key(cand);
            if lex(cand_score, score) != Ordering::Less {
                break;
            }
            a = cand;
            score = cand_score;
        }
        (score, a)
    }
}

fn lex(a: (f64, f64), b: (f64, f64)) -> Ordering {
    a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1))
}

fn score_at<O: Objective + ?Sized>(obj: &O, thresh: u64, a_u: f64, eps: f64) -> (f64, f64) {
    match p_hat(thresh as f64, a_u, eps) {
        Ok((b, _)) => obj.score(b.p_l, b.p_u, thresh),
        Err(_) => (f64::INFINITY, f64::INFINITY),
    }
}

/// Ternary search over `[1/(1+ε), 1 − 10⁻⁹]` minimizing `key`
/// lexicographically.
///
/// Returns the midpoint of the final bracket, unless the bracket still
/// touches an end of the interval and that end scores strictly better.
pub fn ternary(eps: f64, key: impl Fn(f64) -> (f64, f64)) -> f64 {
    let (start, end) = (a_u_min(eps), A_U_MAX);
    let (mut lo, mut hi) = (start, end);
    while hi - lo >= ABS_PRECISION {
        let l = lo + (hi - lo) / 3.0;
        let r = hi - (hi - lo) / 3.0;
        if lex(key(l), key(r)) == Ordering::Greater {
            lo = l;
        } else {
            hi = r;
        }
    }
    let mut best = (lo + hi) / 2.0;
    let mut best_key = key(best);
    for edge in [(lo == start).then_some(start), (hi == end).then_some(end)].into_iter().flatten() {
        let k = key(edge);
        if lex(k, best_key) == Ordering::Less {
            best = edge;
            best_key = k;
        }
    }
    best
}

/// Best `(t, a_U)` at fixed `thresh` for the default objective.
///
/// `t` is recomputed at the returned midpoint, not carried over from the
/// bracket probes.
pub fn find_opt_iter(thresh: u64, eps: f64, delta: f64) -> Result<(u64, f64)> {
    check_inputs(eps, delta)?;
    if thresh < 2 {
        return Err(Error::Contract(format!("thresh must be at least 2, got {thresh}")));
    }
    let (_, a_u) = IterTimesThresh { delta }.search(thresh, eps);
    let (b, _) = p_hat(thresh as f64, a_u, eps)?;
    match compute_iter(b.p_l, b.p_u, delta) {
        Ok(t) => Ok((t.get(), a_u)),
        Err(Error::NonAmplifiable { .. }) | Err(Error::IterationCap { .. }) => Err(Error::ThreshTooSmall { thresh }),
        Err(e) => Err(e),
    }
}

fn check_inputs(eps: f64, delta: f64) -> Result<()> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::Contract(format!("epsilon must be positive, got {eps}")));
    }
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::Contract(format!("delta must lie in (0, 1], got {delta}")));
    }
    Ok(())
}

/// Where a parameter record's `(p_L, p_U)` came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundSource {
    /// Evaluated from the closed forms at the reduced point.
    Derived,
    /// The bounds published for the conventional settings.
    Published,
}

/// Parameters handed to the counter, plus the bounds that justify them.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OptimalParams {
    pub eps: f64,
    pub delta: f64,
    pub thresh_star: u64,
    pub t_star: u64,
    pub a_u_star: f64,
    pub rnd_star: f64,
    pub p_l: f64,
    pub p_u: f64,
    pub obj: f64,
    pub chosen_k: i64,
    pub bound_source: BoundSource,
}

impl OptimalParams {
    fn at(eps: f64, delta: f64, thresh: u64, a_u: f64, obj: f64) -> Result<Self> {
        let (b, chosen_k) = p_hat(thresh as f64, a_u, eps)?;
        let t = compute_iter(b.p_l, b.p_u, delta)?.get();
        Ok(Self {
            eps,
            delta,
            thresh_star: thresh,
            t_star: t,
            a_u_star: a_u,
            rnd_star: (1.0 + eps) * a_u / 2.0 * thresh as f64,
            p_l: b.p_l,
            p_u: b.p_u,
            obj,
            chosen_k,
            bound_source: BoundSource::Derived,
        })
    }

    /// Whether the reduced vector behind these parameters is sound.
    pub fn is_sound(&self) -> bool {
        reduced_vector(&(self.thresh_star as f64), &self.a_u_star, self.chosen_k, &self.eps)
            .map(|c| is_valid(&c, &self.eps))
            .unwrap_or(false)
    }
}

/// Outer search over integer `thresh = 2, 3, …`.
///
/// The incumbent changes only on strict improvement, and the loop stops as
/// soon as `obj.floor(thresh)` reaches the incumbent value. Prefixes where
/// no `a_U` is usable are skipped.
pub fn find_opt_params(eps: f64, delta: f64, obj: &dyn Objective) -> Result<OptimalParams> {
    check_inputs(eps, delta)?;
    let mut best: Option<(u64, f64, f64)> = None;
    let mut thresh = 2u64;
    loop {
        if let Some((_, _, v)) = best {
            if obj.floor(thresh) >= v {
                break;
            }
            let p = min_max_bound(thresh as f64, eps);
            let lb = obj.score(p, 0.0, thresh).0.min(obj.score(0.0, p, thresh).0);
            if lb >= v {
                thresh += 1;
                continue;
            }
        }
        if thresh > THRESH_LIMIT {
            return Err(Error::Contract(format!("no usable thresh up to {THRESH_LIMIT}")));
        }
        let ((value, _), a_u) = obj.search(thresh, eps);
        if value.is_finite() && best.is_none_or(|(_, _, v)| value < v) {
            best = Some((thresh, a_u, value));
        }
        thresh += 1;
    }
    let (thresh, a_u, value) = best.expect("loop exits only with an incumbent");
    OptimalParams::at(eps, delta, thresh, a_u, value)
}

/// A value `p` with `max(p̂_L, p̂_U) ≥ p` everywhere on the `a_U` interval.
///
/// `p̂_L` is non-increasing and `p̂_U` non-decreasing in `a_U`; bisecting
/// for their crossing to a bracket `[l, r]` gives `p = min(p̂_L(r), p̂_U(l))`.
fn min_max_bound(thresh: f64, eps: f64) -> f64 {
    let at = |a: f64| p_hat(thresh, a, eps).map(|(b, _)| (b.p_l, b.p_u)).unwrap_or((1.0, 1.0));
    let (mut l, mut r) = (a_u_min(eps), A_U_MAX);
    let (p_l_r, p_u_r) = at(r);
    if p_u_r <= p_l_r {
        return p_l_r;
    }
    let (p_l_l, p_u_l) = at(l);
    if p_u_l >= p_l_l {
        return p_u_l;
    }
    for _ in 0..60 {
        let mid = (l + r) / 2.0;
        let (p_l, p_u) = at(mid);
        if p_u < p_l {
            l = mid;
        } else {
            r = mid;
        }
    }
    at(r).0.min(at(l).1)
}

/// `find_opt_params` with the default objective.
pub fn optimal_parameters(eps: f64, delta: f64) -> Result<OptimalParams> {
    find_opt_params(eps, delta, &IterTimesThresh { delta })
}

/// Published `(ε, p_L, p_U)` for the conventional settings.
pub const PUBLISHED_CONVENTIONAL_BOUNDS: [(f64, f64, f64); 2] = [(0.8, 0.157, 0.169), (0.4, 0.262, 0.169)];

/// Conventional `thresh`: `⌈9.84 (1 + ε/(1+ε)) (1 + 1/ε)²⌉`.
pub fn conventional_thresh(eps: f64) -> u64 {
    (9.84 * (1.0 + eps / (1.0 + eps)) * (1.0 + 1.0 / eps).powi(2)).ceil() as u64
}

/// Conventional `a_U`: `(1 + ε/(1+ε))⁻¹`, halved when `ε > 3`.
pub fn conventional_a_u(eps: f64) -> f64 {
    let a = 1.0 / (1.0 + eps / (1.0 + eps));
    if eps > 3.0 {
        a / 2.0
    } else {
        a
    }
}

/// The conventional parameters as a baseline record.
///
/// Where bounds were published for this `ε` they are used for `t`;
/// otherwise `(p_L, p_U)` come from the closed forms at the conventional
/// point. [`conventional_derived`] always uses the closed forms.
pub fn conventional_parameters(eps: f64, delta: f64) -> Result<OptimalParams> {
    let published =
        PUBLISHED_CONVENTIONAL_BOUNDS.iter().find(|(e, _, _)| (e - eps).abs() < 1e-12).map(|&(_, p_l, p_u)| (p_l, p_u));
    let mut params = conventional_derived(eps, delta)?;
    if let Some((p_l, p_u)) = published {
        let t = compute_iter(p_l, p_u, delta)?.get();
        params.p_l = p_l;
        params.p_u = p_u;
        params.t_star = t;
        params.obj = (t * params.thresh_star) as f64;
        params.bound_source = BoundSource::Published;
    }
    Ok(params)
}

/// The conventional point evaluated with the closed forms.
pub fn conventional_derived(eps: f64, delta: f64) -> Result<OptimalParams> {
    check_inputs(eps, delta)?;
    let thresh = conventional_thresh(eps);
    let a_u = conventional_a_u(eps).max(a_u_min(eps));
    let (b, _) = p_hat(thresh as f64, a_u, eps)?;
    let t = compute_iter(b.p_l, b.p_u, delta)?.get();
    OptimalParams::at(eps, delta, thresh, a_u, (t * thresh) as f64)
}

/// `(p̂_L, p̂_U)` written out directly for the reduced vectors, independent of
/// the generic bound code.
fn reduced_bounds(thresh: f64, a_u: f64, eps: f64) -> (f64, f64) {
    let a_l = (1.0 + eps).powi(2) / 2.0 * a_u;
    let q_t = |x: f64| if x > 1.0 { 1.0 / (1.0 + (1.0 - 1.0 / x).powi(2) * x * thresh) } else { 1.0 };
    let q_l = 1.0 / (1.0 + (eps / (1.0 + eps)).powi(2) * a_l * thresh);
    let p_l = q_t(a_l).min(1.0).min((q_t(2.0 * a_l) + q_l).min(1.0));
    let p_u = if a_u < 1.0 {
        let half = a_u / 2.0 * thresh;
        (1.0 / (1.0 + (1.0 / a_u - 1.0).powi(2) * half)).max(1.0 / (1.0 + eps * eps * half))
    } else {
        1.0
    };
    (p_l, p_u.min(1.0))
}

/// Exhaustive search: every integer `thresh` under the same stopping rule,
/// every `a_U = 1/(1+ε) + i·step` below `1 − 10⁻⁹`.
///
/// Pruning uses only the monotonicity of `p̂_L` and `p̂_U` in `a_U`, never
/// any shape of `t`: a `thresh` is scanned only if the smallest
/// `max(p̂_L, p̂_U)` on its grid could reach the best objective seen so far,
/// and a point triggers a full iteration count only if it beats the best
/// `t` found earlier in the same scan.
pub fn grid_oracle(eps: f64, delta: f64, a_u_step: f64) -> Result<OptimalParams> {
    check_inputs(eps, delta)?;
    if !(a_u_step > 0.0 && a_u_step <= ABS_PRECISION) {
        return Err(Error::Contract(format!("grid step must lie in (0, 1e-3], got {a_u_step}")));
    }
    let lo = a_u_min(eps);
    let grid: Vec<f64> = (0..).map(|i| lo + i as f64 * a_u_step).take_while(|&a| a <= A_U_MAX).collect();
    // p̂_L falls and p̂_U rises in a_U; returns the two grid indices
    // around the crossing and the smaller max(p̂_L, p̂_U) there
    let crossing = |th: f64| {
        let c = grid.partition_point(|&a| {
            let (p_l, p_u) = reduced_bounds(th, a, eps);
            p_u < p_l
        });
        let near = [c.saturating_sub(1), c.min(grid.len() - 1)];
        let floor_p = near
            .iter()
            .map(|&i| {
                let (p_l, p_u) = reduced_bounds(th, grid[i], eps);
                p_l.max(p_u)
            })
            .fold(f64::INFINITY, f64::min);
        (near, floor_p)
    };
    // Objective attained at some grid point; nothing above it matters.
    let mut bound = u64::MAX;
    let mut thresh = 2u64;
    while thresh < bound && thresh <= THRESH_LIMIT {
        let (near, _) = crossing(thresh as f64);
        for i in near {
            let (p_l, p_u) = reduced_bounds(thresh as f64, grid[i], eps);
            if let Ok(t) = compute_iter(p_l, p_u, delta) {
                bound = bound.min(t.get().saturating_mul(thresh));
            }
        }
        thresh += 1;
    }
    // (thresh, t, a_u)
    let mut best: Option<(u64, u64, f64)> = None;
    let mut thresh = 2u64;
    loop {
        let best_obj = best.map(|(th, t, _)| th * t);
        if best_obj.is_some_and(|b| thresh >= b) {
            break;
        }
        if thresh > THRESH_LIMIT {
            return Err(Error::Contract(format!("no usable thresh up to {THRESH_LIMIT}")));
        }
        let th = thresh as f64;
        let (_, floor_p) = crossing(th);
        let limit = best_obj.map_or(bound, |b| bound.min(b - 1));
        let target = {
            let t = (limit / thresh).min(ITERATION_CAP);
            if t.is_multiple_of(2) {
                t.saturating_sub(1)
            } else {
                t
            }
        };
        let worth = floor_p < 0.5 && target >= 1 && median_error(target, floor_p, 0.0)? <= delta;
        if worth {
            // smallest t found in this scan, and where
            let mut cur: Option<(u64, f64)> = None;
            for &a in &grid {
                let (p_l, p_u) = reduced_bounds(th, a, eps);
                let probe = cur.map_or(target, |(t, _)| t.saturating_sub(2));
                if probe == 0 || median_error(probe, p_l, p_u)? > delta {
                    continue;
                }
                let t = compute_iter(p_l, p_u, delta)?.get();
                cur = Some((t, a));
            }
            if let Some((t, a)) = cur {
                if best_obj.is_none_or(|b| t * thresh < b) {
                    best = Some((thresh, t, a));
                }
            }
        }
        thresh += 1;
    }
    let (thresh, t, a_u) = best.expect("loop exits only with an incumbent");
    OptimalParams::at(eps, delta, thresh, a_u, (t * thresh) as f64)
}

/// One point of the reduced surface; `t` and `obj` are `None` where the
/// bounds cannot be amplified.
#[derive(Clone, Debug, PartialEq)]
pub struct LandscapeRow {
    pub thresh: u64,
    pub a_u: f64,
    pub p_l: f64,
    pub p_u: f64,
    pub t: Option<u64>,
    pub obj: Option<u64>,
}

/// Rectangular `(thresh, a_U)` grid; `a_U` takes `a_u_steps` evenly spaced
/// values from `a_u_lo` to `a_u_hi` inclusive.
#[derive(Clone, Debug, PartialEq)]
pub struct LandscapeGrid {
    pub thresh_lo: u64,
    pub thresh_hi: u64,
    pub a_u_lo: f64,
    pub a_u_hi: f64,
    pub a_u_steps: usize,
}

impl LandscapeGrid {
    /// `thresh ∈ [2, 400]`, 200 values of `a_U` across the whole interval.
    pub fn standard(eps: f64) -> Self {
        Self { thresh_lo: 2, thresh_hi: 400, a_u_lo: a_u_min(eps), a_u_hi: A_U_MAX, a_u_steps: 200 }
    }

    pub fn a_u_values(&self) -> Vec<f64> {
        if self.a_u_steps == 1 {
            return vec![self.a_u_lo];
        }
        let span = self.a_u_hi - self.a_u_lo;
        let last = (self.a_u_steps - 1) as f64;
        (0..self.a_u_steps)
            .map(|i| if i + 1 == self.a_u_steps { self.a_u_hi } else { self.a_u_lo + span * i as f64 / last })
            .collect()
    }
}

/// Evaluates every grid point; rows are ordered by `thresh`, then `a_U`,
/// regardless of how the work is scheduled.
pub fn landscape(eps: f64, delta: f64, grid: &LandscapeGrid) -> Result<Vec<LandscapeRow>> {
    check_inputs(eps, delta)?;
    if grid.thresh_lo < 2 || grid.thresh_hi < grid.thresh_lo || grid.a_u_steps == 0 {
        return Err(Error::Contract("landscape grid is empty or has thresh < 2".into()));
    }
    if !(grid.a_u_lo * (1.0 + eps) >= 1.0 && grid.a_u_hi >= grid.a_u_lo) {
        return Err(Error::Contract("a_U range must start at or above 1/(1+ε)".into()));
    }
    let a_values = grid.a_u_values();
    let rows: Result<Vec<Vec<LandscapeRow>>> = (grid.thresh_lo..=grid.thresh_hi)
        .into_par_iter()
        .map(|thresh| {
            a_values
                .iter()
                .map(|&a_u| {
                    let (b, _) = p_hat(thresh as f64, a_u, eps)?;
                    let t = compute_iter(b.p_l, b.p_u, delta).ok().map(|t| t.get());
                    Ok(LandscapeRow { thresh, a_u, p_l: b.p_l, p_u: b.p_u, t, obj: t.map(|t| t * thresh) })
                })
                .collect()
        })
        .collect();
    Ok(rows?.into_iter().flatten().collect())
}

/// Exact header of landscape CSV output.
pub const LANDSCAPE_HEADER: [&str; 6] = ["thresh", "a_u", "p_l", "p_u", "t", "obj"];

const INF: &str = "inf";

pub fn write_landscape_csv<W: Write>(rows: &[LandscapeRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::Contract(format!("csv write failed: {e}"));
    w.write_record(LANDSCAPE_HEADER).map_err(io)?;
    for r in rows {
        let opt = |v: Option<u64>| v.map_or_else(|| INF.to_string(), |v| v.to_string());
        w.write_record([
            r.thresh.to_string(),
            r.a_u.to_string(),
            r.p_l.to_string(),
            r.p_u.to_string(),
            opt(r.t),
            opt(r.obj),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|e| Error::Contract(format!("csv write failed: {e}")))?;
    Ok(())
}

pub fn read_landscape_csv<R: Read>(input: R) -> Result<Vec<LandscapeRow>> {
    let mut rd = csv::Reader::from_reader(input);
    let bad = |what: &str| Error::Contract(format!("landscape csv: {what}"));
    let header = rd.headers().map_err(|e| bad(&e.to_string()))?;
    if header.iter().ne(LANDSCAPE_HEADER) {
        return Err(bad("unexpected header"));
    }
    let mut rows = Vec::new();
    for rec in rd.records() {
        let rec = rec.map_err(|e| bad(&e.to_string()))?;
        let num = |i: usize| -> Result<f64> { rec[i].parse().map_err(|_| bad(&rec[i])) };
        let int = |i: usize| -> Result<Option<u64>> {
            if &rec[i] == INF {
                Ok(None)
            } else {
                rec[i].parse().map(Some).map_err(|_| bad(&rec[i]))
            }
        };
        rows.push(LandscapeRow {
            thresh: rec[0].parse().map_err(|_| bad(&rec[0]))?,
            a_u: num(1)?,
            p_l: num(2)?,
            p_u: num(3)?,
            t: int(4)?,
            obj: int(5)?,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conventional_thresh_values() {
        assert_eq!(conventional_thresh(0.8), 72);
        assert_eq!(conventional_thresh(0.4), 155);
        assert!((conventional_a_u(0.8) - 1.0 / (1.0 + 0.8 / 1.8)).abs() < 1e-15);
        assert!((conventional_a_u(4.0) * 2.0 - 1.0 / 1.8).abs() < 1e-15);
    }

    #[test]
    fn conventional_rows() {
        let c = conventional_parameters(0.8, 0.001).unwrap();
        assert_eq!((c.thresh_star, c.t_star, c.obj), (72, 19, 1368.0));
        assert_eq!(c.bound_source, BoundSource::Published);
        let c = conventional_parameters(0.4, 0.001).unwrap();
        assert_eq!((c.thresh_star, c.t_star, c.obj), (155, 37, 5735.0));
        let d = conventional_parameters(1.3, 0.01).unwrap();
        assert_eq!(d.bound_source, BoundSource::Derived);
        assert!(d.is_sound());
    }

    #[test]
    fn opt_iter_at_table_points() {
        assert_eq!(find_opt_iter(52, 0.8, 0.001).unwrap().0, 13);
        assert_eq!(find_opt_iter(163, 0.4, 0.001).unwrap().0, 13);
        assert!(matches!(find_opt_iter(2, 0.8, 0.001), Err(Error::ThreshTooSmall { thresh: 2 })));
    }

    #[test]
    fn optimum_at_eps_08() {
        let p = optimal_parameters(0.8, 0.001).unwrap();
        assert_eq!((p.thresh_star, p.t_star, p.obj), (52, 13, 676.0));
        assert!((p.p_l - 0.135).abs() <= 0.002, "{}", p.p_l);
        assert!((p.p_u - 0.119).abs() <= 0.002, "{}", p.p_u);
        assert!(p.is_sound());
        assert!((p.rnd_star - 1.8 * p.a_u_star / 2.0 * 52.0).abs() < 1e-12);
    }

    #[test]
    fn optimum_on_left_boundary() {
        let p = optimal_parameters(0.2027, 0.1).unwrap();
        assert_eq!((p.thresh_star, p.t_star), (1411, 1));
        assert_eq!(p.a_u_star, a_u_min(0.2027));
        assert!(p.p_l + p.p_u <= 0.1);
    }

    #[test]
    fn direct_reduced_bounds_match_generic() {
        for eps in [0.2, 0.8, 2.5] {
            for thresh in [2.0, 17.0, 300.0] {
                for i in 0..50 {
                    let a = a_u_min(eps) + i as f64 * (1.2 - a_u_min(eps)) / 49.0;
                    let (b, _) = p_hat(thresh, a, eps).unwrap();
                    let (l, u) = reduced_bounds(thresh, a, eps);
                    assert!((b.p_l - l).abs() < 1e-12 && (b.p_u - u).abs() < 1e-12, "{eps} {thresh} {a}");
                }
            }
        }
    }

    #[test]
    fn landscape_rows_ordered_and_roundtrip() {
        let grid = LandscapeGrid { thresh_lo: 2, thresh_hi: 6, a_u_lo: a_u_min(0.8), a_u_hi: 1.2, a_u_steps: 7 };
        let rows = landscape(0.8, 0.1, &grid).unwrap();
        assert_eq!(rows.len(), 35);
        assert!(rows.windows(2).all(|w| (w[0].thresh, w[0].a_u) < (w[1].thresh, w[1].a_u)));
        assert!(rows.iter().filter(|r| r.a_u >= 1.0).all(|r| r.p_u == 1.0 && r.t.is_none()));
        let mut buf = Vec::new();
        write_landscape_csv(&rows, &mut buf).unwrap();
        assert!(buf.starts_with(b"thresh,a_u,p_l,p_u,t,obj\n"));
        assert_eq!(read_landscape_csv(buf.as_slice()).unwrap(), rows);
    }

    #[test]
    fn empty_grid_rejected() {
        let mut g = LandscapeGrid::standard(0.4);
        g.a_u_steps = 0;
        assert!(landscape(0.4, 0.001, &g).is_err());
        let mut g = LandscapeGrid::standard(0.4);
        g.thresh_hi = 1;
        assert!(landscape(0.4, 0.001, &g).is_err());
    }
}
