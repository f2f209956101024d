//! The hashed cell-count estimator and its median-of-`t` driver.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::{is_valid, p_hat, reduced_vector};
use crate::cnf::{BoundedCounter, Formula, ProjectedSolutions, DEFAULT_ENUMERATION_CAP};
use crate::error::{Error, Result};
use crate::hash::{BitVec, CellRef, XorHash};
use crate::iteration::compute_iter;
use crate::optimize::{conventional_parameters, optimal_parameters, OptimalParams};

/// Which parameter rule feeds the counter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Optimized parameters.
    FlexMc,
    /// The conventional settings.
    ApproxMc6,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub eps: f64,
    pub delta: f64,
    pub mode: Mode,
    pub seed: u64,
    pub thresh: Option<u64>,
    pub rnd: Option<f64>,
    pub t: Option<u64>,
    pub enumeration_cap: usize,
}

impl RunConfig {
    pub fn new(eps: f64, delta: f64, mode: Mode, seed: u64) -> Self {
        Self { eps, delta, mode, seed, thresh: None, rnd: None, t: None, enumeration_cap: DEFAULT_ENUMERATION_CAP }
    }
}

/// Parameters a run actually used.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunParams {
    pub thresh: u64,
    pub rnd: f64,
    pub t: u64,
    pub p_l: f64,
    pub p_u: f64,
}

/// Resolves `(thresh, rnd, t)` from the mode, then applies overrides.
///
/// An overridden `thresh`/`rnd` pair must correspond to a sound reduced
/// vector, i.e. `rnd = (1+ε)/2 · a_U · thresh` with `1/(1+ε) ≤ a_U < 1`.
pub fn resolve_params(cfg: &RunConfig) -> Result<RunParams> {
    if cfg.thresh.is_none() && cfg.rnd.is_none() && cfg.t.is_none() {
        let p = base_params(cfg)?;
        return Ok(RunParams { thresh: p.thresh_star, rnd: p.rnd_star, t: p.t_star, p_l: p.p_l, p_u: p.p_u });
    }
    let (thresh, rnd) = match (cfg.thresh, cfg.rnd) {
        (None, None) => {
            let p = base_params(cfg)?;
            (p.thresh_star, p.rnd_star)
        }
        (Some(th), Some(r)) => (th, r),
        (Some(th), None) => {
            let p = base_params(cfg)?;
            (th, (1.0 + cfg.eps) * p.a_u_star / 2.0 * th as f64)
        }
        (None, Some(_)) => return Err(Error::Contract("an rnd override needs a thresh override".into())),
    };
    let a_u = 2.0 * rnd / ((1.0 + cfg.eps) * thresh as f64);
    let sound = reduced_vector(&(thresh as f64), &a_u, 1, &cfg.eps).map(|c| is_valid(&c, &cfg.eps)).unwrap_or(false);
    if !sound || a_u >= 1.0 {
        return Err(Error::Contract(format!(
            "overrides thresh={thresh}, rnd={rnd} do not form a sound reduced configuration"
        )));
    }
    let (b, _) = p_hat(thresh as f64, a_u, cfg.eps)?;
    let t = match cfg.t {
        Some(0) => return Err(Error::Contract("t must be positive".into())),
        Some(t) => t,
        None => compute_iter(b.p_l, b.p_u, cfg.delta)?.get(),
    };
    Ok(RunParams { thresh, rnd, t, p_l: b.p_l, p_u: b.p_u })
}

fn base_params(cfg: &RunConfig) -> Result<OptimalParams> {
    match cfg.mode {
        Mode::FlexMc => optimal_parameters(cfg.eps, cfg.delta),
        Mode::ApproxMc6 => conventional_parameters(cfg.eps, cfg.delta),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CorePath {
    EarlyExact,
    Singular,
    Normal,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CoreOutcome {
    pub estimate: f64,
    pub m_used: usize,
    pub path: CorePath,
}

fn cell_count(counter: &impl BoundedCounter, h: &XorHash, alpha: &BitVec, m: usize, limit: u64) -> Result<u64> {
    let cell = CellRef { alpha: alpha.clone(), m };
    Ok(counter.bounded_count(Some((h, &cell)), limit)?.count)
}

/// Smallest `m ∈ [1, n]` whose cell holds fewer than `thresh` solutions.
///
/// Cell counts are non-increasing in `m`, so the search gallops outward from
/// `prev_m` and then bisects. Requires the `m = n` cell to be below `thresh`.
pub fn log_sat_search(
    counter: &impl BoundedCounter,
    h: &XorHash,
    alpha: &BitVec,
    thresh: u64,
    prev_m: Option<usize>,
) -> Result<usize> {
    let n = counter.hash_dim();
    let below = |m: usize| -> Result<bool> { Ok(cell_count(counter, h, alpha, m, thresh)? < thresh) };
    // invariant: lo fails (or is 0), hi passes
    let (mut lo, mut hi) = (0usize, n);
    if let Some(start) = prev_m.map(|m| m.clamp(1, n)) {
        if below(start)? {
            hi = start;
            let mut step = 1;
            while hi > 1 {
                let probe = hi.saturating_sub(step).max(1);
                if below(probe)? {
                    hi = probe;
                    step *= 2;
                } else {
                    lo = probe;
                    break;
                }
            }
        } else {
            lo = start;
            let mut step = 1;
            while lo + step < n {
                let probe = lo + step;
                if below(probe)? {
                    hi = probe;
                    break;
                }
                lo = probe;
                step *= 2;
            }
        }
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if below(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi.max(1))
}

/// One core run: sample `(h, α)`, count, and scale.
pub fn core_count<R: rand::Rng + ?Sized>(
    counter: &impl BoundedCounter,
    thresh: u64,
    rnd: f64,
    rng: &mut R,
) -> Result<CoreOutcome> {
    core_count_from(counter, thresh, rnd, rng, None)
}

fn core_count_from<R: rand::Rng + ?Sized>(
    counter: &impl BoundedCounter,
    thresh: u64,
    rnd: f64,
    rng: &mut R,
    prev_m: Option<usize>,
) -> Result<CoreOutcome> {
    let n = counter.hash_dim();
    let h = XorHash::sample(n, rng);
    let alpha = BitVec::from_u64(rng.gen::<u64>() & low_mask(n), n);
    core_count_fixed(counter, &h, &alpha, thresh, rnd, prev_m)
}

fn low_mask(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// The deterministic part of a core run for a given `(h, α)`.
pub fn core_count_fixed(
    counter: &impl BoundedCounter,
    h: &XorHash,
    alpha: &BitVec,
    thresh: u64,
    rnd: f64,
    prev_m: Option<usize>,
) -> Result<CoreOutcome> {
    if thresh < 2 || !(rnd >= 1.0) {
        return Err(Error::Contract(format!("core run needs thresh ≥ 2 and rnd ≥ 1, got ({thresh}, {rnd})")));
    }
    let n = counter.hash_dim();
    if cell_count(counter, h, alpha, n, thresh)? >= thresh {
        return Ok(CoreOutcome { estimate: 2f64.powi(n as i32), m_used: n, path: CorePath::Singular });
    }
    let m = log_sat_search(counter, h, alpha, thresh, prev_m)?;
    let cnt = cell_count(counter, h, alpha, m, thresh)?;
    Ok(CoreOutcome { estimate: 2f64.powi(m as i32) * (cnt as f64).max(rnd), m_used: m, path: CorePath::Normal })
}

/// Lower median: the `⌈len/2⌉`-th order statistic.
pub fn find_median(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::Contract("median of an empty list".into()));
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(v[v.len().div_ceil(2) - 1])
}

/// What a run did, alongside its estimate.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunMeta {
    pub mode: Mode,
    pub eps: f64,
    pub delta: f64,
    pub seed: u64,
    pub thresh: u64,
    pub rnd: f64,
    pub t: u64,
    pub p_l: f64,
    pub p_u: f64,
    pub path: CorePath,
    pub outcomes: Vec<CoreOutcome>,
}

/// The full counter: exact answer when fewer than `thresh` solutions exist,
/// otherwise the median of `t` independent core runs.
///
/// Iteration `i` draws from the ChaCha8 stream `(seed, i)`, so results do not
/// depend on scheduling.
pub fn approx_count(f: &Formula, cfg: &RunConfig) -> Result<(f64, RunMeta)> {
    let params = resolve_params(cfg)?;
    let engine = ProjectedSolutions::new(f, cfg.enumeration_cap)?;
    let mut meta = RunMeta {
        mode: cfg.mode,
        eps: cfg.eps,
        delta: cfg.delta,
        seed: cfg.seed,
        thresh: params.thresh,
        rnd: params.rnd,
        t: params.t,
        p_l: params.p_l,
        p_u: params.p_u,
        path: CorePath::EarlyExact,
        outcomes: Vec::new(),
    };
    let early = engine.bounded_count(None, params.thresh)?;
    if !early.saturated {
        return Ok((early.count as f64, meta));
    }
    let outcomes: Result<Vec<CoreOutcome>> = (0..params.t)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(i);
            core_count(&engine, params.thresh, params.rnd, &mut rng)
        })
        .collect();
    meta.outcomes = outcomes?;
    meta.path =
        if meta.outcomes.iter().all(|o| o.path == CorePath::Singular) { CorePath::Singular } else { CorePath::Normal };
    let estimates: Vec<f64> = meta.outcomes.iter().map(|o| o.estimate).collect();
    Ok((find_median(&estimates)?, meta))
}

/// Sequential variant of the core loop that seeds each search at the
/// previous iteration's `m`. Produces the same outcomes as the parallel
/// driver.
pub fn core_runs_sequential(
    counter: &impl BoundedCounter,
    thresh: u64,
    rnd: f64,
    seed: u64,
    t: u64,
) -> Result<Vec<CoreOutcome>> {
    let mut prev = None;
    (0..t)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i);
            let o = core_count_from(counter, thresh, rnd, &mut rng, prev)?;
            prev = Some(o.m_used);
            Ok(o)
        })
        .collect()
}
