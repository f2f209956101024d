//! Median amplification: how many core runs make the median `(ε, δ)`-correct.

use std::fmt;

use serde::Serialize;

use crate::bounds::p_hat;
use crate::error::{Error, Result};

/// Largest odd iteration count the search will consider.
pub const ITERATION_CAP: u64 = 999_999;

/// An odd, positive repetition count.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct IterationCount(u64);

impl IterationCount {
    pub fn new(t: u64) -> Result<Self> {
        if t == 0 || t.is_multiple_of(2) {
            return Err(Error::Contract(format!("iteration count must be odd and positive, got {t}")));
        }
        Ok(Self(t))
    }

    pub fn get(self) -> u64 {
        self.0
    }
}

impl fmt::Display for IterationCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// `ln C(t, h)`, multiplying ratios in linear space and taking a logarithm
/// only when the running product grows large.
fn ln_choose(t: u64, h: u64) -> f64 {
    let k = h.min(t - h);
    let (mut ln, mut acc) = (0.0, 1.0f64);
    for j in 1..=k {
        acc *= (t - k + j) as f64 / j as f64;
        if acc > 1e280 {
            ln += acc.ln();
            acc = 1.0;
        }
    }
    ln + acc.ln()
}

/// `Σ_{i=h}^{t} C(t,i) p^i (1-p)^{t-i}`.
///
/// Terms follow a multiplicative recurrence from `i = h`. When that first
/// term would underflow, the recurrence runs on logarithms instead. The
/// sum is accumulated smallest-first.
fn upper_tail(t: u64, h: u64, p: f64) -> f64 {
    if h == 0 {
        return 1.0;
    }
    if h > t || p <= 0.0 {
        return 0.0;
    }
    if p >= 1.0 {
        return 1.0;
    }
    let (ln_p, ln_q) = (p.ln(), (-p).ln_1p());
    let ln_first = ln_choose(t, h) + h as f64 * ln_p + (t - h) as f64 * ln_q;
    let mut terms = Vec::with_capacity((t - h + 1) as usize);
    if ln_first > -700.0 {
        let odds = p / (1.0 - p);
        let mut term = ln_first.exp();
        for i in h..=t {
            terms.push(term);
            term *= (t - i) as f64 / (i + 1) as f64 * odds;
        }
    } else {
        let odds = ln_p - ln_q;
        let mut ln_term = ln_first;
        for i in h..=t {
            terms.push(ln_term.exp());
            ln_term += ((t - i) as f64 / (i + 1) as f64).ln() + odds;
        }
    }
    if p > 0.5 {
        terms.sort_by(f64::total_cmp);
    } else {
        // i ≥ t/2 ≥ tp: terms are non-increasing
        terms.reverse();
    }
    terms.iter().sum::<f64>().min(1.0)
}

/// Probability bound that the median of `t` runs fails, given per-run
/// failure bounds `p_l` (under) and `p_u` (over).
pub fn median_error(t: u64, p_l: f64, p_u: f64) -> Result<f64> {
    IterationCount::new(t)?;
    for p in [p_l, p_u] {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Contract(format!("probability {p} outside [0, 1]")));
        }
    }
    let h = t.div_ceil(2);
    Ok(upper_tail(t, h, p_l) + upper_tail(t, h, p_u))
}

fn err_at(t: u64, p_l: f64, p_u: f64) -> f64 {
    let h = t.div_ceil(2);
    upper_tail(t, h, p_l) + upper_tail(t, h, p_u)
}

/// Least odd `t` with `median_error(t, p_l, p_u) ≤ delta`.
///
/// Brackets by doubling and bisects over odd values, then certifies that
/// `t - 2` fails; if that certificate does not hold, falls back to a scan
/// from 1.
pub fn compute_iter(p_l: f64, p_u: f64, delta: f64) -> Result<IterationCount> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::Contract(format!("delta must lie in (0, 1], got {delta}")));
    }
    for p in [p_l, p_u] {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Contract(format!("probability {p} outside [0, 1]")));
        }
    }
    if p_l >= 0.5 || p_u >= 0.5 {
        return Err(Error::NonAmplifiable { p_l, p_u });
    }
    let ok = |t: u64| err_at(t, p_l, p_u) <= delta;
    if ok(1) {
        return Ok(IterationCount(1));
    }
    // invariant: lo fails, hi passes
    let mut lo = 1u64;
    let mut hi = 3u64;
    while !ok(hi) {
        if hi >= ITERATION_CAP {
            return Err(Error::IterationCap { cap: ITERATION_CAP });
        }
        lo = hi;
        hi = (2 * hi + 1).min(ITERATION_CAP);
    }
    while hi - lo > 2 {
        let mid = lo + (((hi - lo) / 2) & !1);
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    if hi > 1 && ok(hi - 2) {
        let t = (1..=hi).step_by(2).find(|&t| ok(t)).unwrap_or(hi);
        return Ok(IterationCount(t));
    }
    Ok(IterationCount(hi))
}

/// `compute_iter` at the reduced point `(thresh, a_U)`.
pub fn calc_t(thresh: f64, a_u: f64, eps: f64, delta: f64) -> Result<IterationCount> {
    let (bounds, _) = p_hat(thresh, a_u, eps)?;
    compute_iter(bounds.p_l, bounds.p_u, delta)
}
