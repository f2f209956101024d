//! Checks of the bound theory against ground truth.
//!
//! For tiny formulas every `(h, α)` of the hash family is enumerated and the
//! core counter's failure probabilities are computed as exact rationals.
//! Larger formulas are sampled.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::{frac, p_bounds, ratio, reduced_vector, BoundPair, ParamVector};
use crate::cnf::{BoundedCounter, Formula, ProjectedSolutions, DEFAULT_ENUMERATION_CAP};
use crate::counter::core_count;
use crate::error::{Error, Result};
use crate::hash::{family_member, family_size, MAX_ENUMERABLE_DIM};

/// Largest hash dimension enumerated without opting in.
pub const DEFAULT_EXHAUSTIVE_DIM: usize = 3;

/// Exact failure probabilities of one core run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EventTally {
    pub pr_l: BigRational,
    pub pr_u: BigRational,
    /// Number of equally likely `(h, α)` pairs.
    pub total: u64,
}

/// How the cell counts `(Cnt⟨F,1⟩, …, Cnt⟨F,n⟩)` are distributed over the
/// whole family, with each count capped at `2^n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CountProfile {
    pub dim: usize,
    pub sol_count: u64,
    pub total: u64,
    /// count vector → number of `(h, α)` producing it
    pub histogram: BTreeMap<Vec<u64>, u64>,
}

/// Enumerates the family of dimension `|sampling_set|` against `f`.
/// Dimension 4 requires `allow_dim4`.
pub fn count_profile(f: &Formula, allow_dim4: bool) -> Result<CountProfile> {
    let engine = ProjectedSolutions::new(f, DEFAULT_ENUMERATION_CAP)?;
    let n = engine.hash_dim();
    let max = if allow_dim4 { MAX_ENUMERABLE_DIM } else { DEFAULT_EXHAUSTIVE_DIM };
    if n == 0 || n > max {
        return Err(Error::FamilyTooLarge { n, max });
    }
    let sols = engine.solutions();
    let total = family_size(n);
    let histogram = (0..total)
        .into_par_iter()
        .fold(BTreeMap::new, |mut acc: BTreeMap<Vec<u64>, u64>, idx| {
            let (h, alpha) = family_member(n, idx);
            let alpha = alpha.as_u64().unwrap_or(0);
            let mut counts = vec![0u64; n];
            for &y in sols {
                // y lies in the level-m cell iff the low m bits agree
                let diff = h.prefix_value_u64(n, y) ^ alpha;
                let depth = (diff.trailing_zeros() as usize).min(n);
                for c in &mut counts[..depth] {
                    *c += 1;
                }
            }
            *acc.entry(counts).or_default() += 1;
            acc
        })
        .reduce(BTreeMap::new, |mut a, b| {
            for (k, v) in b {
                *a.entry(k).or_default() += v;
            }
            a
        });
    Ok(CountProfile { dim: n, sol_count: sols.len() as u64, total, histogram })
}

/// Core-run output for a given count vector (`counts[m-1] = Cnt⟨F,m⟩`).
pub fn outcome_from_counts(counts: &[u64], thresh: u64, rnd: &BigRational) -> BigRational {
    let n = counts.len();
    let two = BigRational::from_integer(BigInt::from(2));
    if counts[n - 1] >= thresh {
        return num_traits::pow(two, n);
    }
    let m = counts.iter().position(|&c| c < thresh).expect("level n is below thresh") + 1;
    let cnt = BigRational::from_integer(BigInt::from(counts[m - 1]));
    num_traits::pow(two, m) * if &cnt > rnd { cnt } else { rnd.clone() }
}

/// Exact `Pr[L]` and `Pr[U]` for one core run at `(thresh, rnd)`.
pub fn event_probs(profile: &CountProfile, thresh: u64, rnd: &BigRational, eps: &BigRational) -> EventTally {
    let sol = BigRational::from_integer(BigInt::from(profile.sol_count));
    let one_eps = BigRational::one() + eps;
    let (mut l, mut u) = (0u64, 0u64);
    for (counts, &mult) in &profile.histogram {
        let est = outcome_from_counts(counts, thresh, rnd);
        if est.clone() * &one_eps < sol {
            l += mult;
        } else if est > one_eps.clone() * &sol {
            u += mult;
        }
    }
    let total = BigInt::from(profile.total);
    EventTally {
        pr_l: BigRational::new(BigInt::from(l), total.clone()),
        pr_u: BigRational::new(BigInt::from(u), total),
        total: profile.total,
    }
}

/// Enumerates the family and returns the exact failure probabilities.
pub fn exact_event_probs(f: &Formula, thresh: u64, rnd: f64, eps: f64) -> Result<EventTally> {
    check_core_params(thresh, rnd)?;
    let profile = count_profile(f, false)?;
    Ok(event_probs(&profile, thresh, &ratio(rnd), &ratio(eps)))
}

fn check_core_params(thresh: u64, rnd: f64) -> Result<()> {
    if thresh < 2 || !(rnd >= 1.0) || !rnd.is_finite() {
        return Err(Error::Contract(format!("need thresh ≥ 2 and rnd ≥ 1, got ({thresh}, {rnd})")));
    }
    Ok(())
}

/// Observed `(L rate, U rate)` over `trials` independent core runs.
pub fn monte_carlo_failure(f: &Formula, thresh: u64, rnd: f64, eps: f64, trials: u64, seed: u64) -> Result<(f64, f64)> {
    if trials == 0 {
        return Err(Error::Contract("trials must be at least 1".into()));
    }
    check_core_params(thresh, rnd)?;
    let engine = ProjectedSolutions::new(f, DEFAULT_ENUMERATION_CAP)?;
    let sol = engine.len() as f64;
    let (l, u) = (0..trials)
        .into_par_iter()
        .map(|i| -> Result<(u64, u64)> {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i);
            let est = core_count(&engine, thresh, rnd, &mut rng)?.estimate;
            Ok(((est * (1.0 + eps) < sol) as u64, (est > (1.0 + eps) * sol) as u64))
        })
        .try_reduce(|| (0, 0), |a, b| Ok((a.0 + b.0, a.1 + b.1)))?;
    Ok((l as f64 / trials as f64, u as f64 / trials as f64))
}

/// `|exact − output| / exact`.
pub fn empirical_error(exact: u64, output: f64) -> Result<f64> {
    if exact == 0 {
        return Err(Error::Contract("empirical error needs a positive exact count".into()));
    }
    Ok((exact as f64 - output).abs() / exact as f64)
}

/// A formula of the exhaustive suite with a short printable name.
#[derive(Clone, Debug)]
pub struct CensusFormula {
    pub name: String,
    pub formula: Formula,
}

/// Satisfiable CNFs on 2 and 3 variables with at most 3 clauses of width at
/// most 2, one representative per solution set.
pub fn census() -> Vec<CensusFormula> {
    let mut out = Vec::new();
    for n in 2..=3i32 {
        let mut clauses: Vec<Vec<i32>> = Vec::new();
        for v in 1..=n {
            clauses.push(vec![v]);
            clauses.push(vec![-v]);
        }
        for a in 1..=n {
            for b in a + 1..=n {
                for (sa, sb) in [(1, 1), (1, -1), (-1, 1), (-1, -1)] {
                    clauses.push(vec![sa * a, sb * b]);
                }
            }
        }
        let mut seen = BTreeSet::new();
        let mut pick = |chosen: Vec<Vec<i32>>| {
            let f = Formula::new(n as usize, chosen.clone(), None).expect("census literals are in range");
            let sols = ProjectedSolutions::new(&f, DEFAULT_ENUMERATION_CAP).expect("tiny formula");
            if !sols.is_empty() && seen.insert(sols.solutions().to_vec()) {
                out.push(CensusFormula { name: census_name(n as usize, &chosen), formula: f });
            }
        };
        pick(vec![]);
        let k = clauses.len();
        for i in 0..k {
            pick(vec![clauses[i].clone()]);
            for j in i + 1..k {
                pick(vec![clauses[i].clone(), clauses[j].clone()]);
                for l in j + 1..k {
                    pick(vec![clauses[i].clone(), clauses[j].clone(), clauses[l].clone()]);
                }
            }
        }
    }
    out
}

fn census_name(n: usize, clauses: &[Vec<i32>]) -> String {
    let body: Vec<String> =
        clauses.iter().map(|c| c.iter().map(i32::to_string).collect::<Vec<_>>().join(" ")).collect();
    format!("n{n}[{}]", body.join(";"))
}

/// Mean and variance of `Cnt⟨F,m⟩` over the family versus the pairwise
/// independence identities, for every `m ∈ [0, n]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MomentCheck {
    pub m: usize,
    pub mean_exact: bool,
    pub variance_below_mean: bool,
}

pub fn moment_checks(profile: &CountProfile) -> Vec<MomentCheck> {
    let n = profile.dim;
    let total = BigInt::from(profile.total);
    let sol = BigInt::from(profile.sol_count);
    (0..=n)
        .map(|m| {
            let (mut s1, mut s2) = (BigInt::zero(), BigInt::zero());
            for (counts, &mult) in &profile.histogram {
                let c = BigInt::from(if m == 0 { profile.sol_count } else { counts[m - 1] });
                s1 += &c * mult;
                s2 += &c * &c * mult;
            }
            // E = s1/N,  σ² = s2/N − (s1/N)²
            let mean_exact = &s1 << m == &sol * &total;
            let variance_below_mean = &total * &s2 - &s1 * &s1 <= &total * &s1;
            MomentCheck { m, mean_exact, variance_below_mean }
        })
        .collect()
}

/// Lower and upper tail inequalities on one level's cell count, exactly.
///
/// Checks `Pr[Cnt ≤ βμ] ≤ 1/(1 + (1−β)²μ)` and `Pr[Cnt ≥ γμ] ≤ 1/(1 + (γ−1)²μ)`
/// with `μ = |sol|/2^m`.
pub fn concentration_holds(profile: &CountProfile, m: usize, beta: &BigRational, gamma: &BigRational) -> bool {
    let mu = BigRational::new(BigInt::from(profile.sol_count), BigInt::one() << m);
    let (mut low, mut high) = (0u64, 0u64);
    for (counts, &mult) in &profile.histogram {
        let c = BigRational::from_integer(BigInt::from(if m == 0 { profile.sol_count } else { counts[m - 1] }));
        if c <= beta.clone() * &mu {
            low += mult;
        }
        if c >= gamma.clone() * &mu {
            high += mult;
        }
    }
    let total = BigInt::from(profile.total);
    let one = BigRational::one();
    let lb = one.clone() / (one.clone() + (one.clone() - beta).pow(2) * &mu);
    let ub = one.clone() / (one.clone() + (gamma - one.clone()).pow(2) * &mu);
    BigRational::new(BigInt::from(low), total.clone()) <= lb && BigRational::new(BigInt::from(high), total) <= ub
}

/// One parameter vector of the soundness grid.
#[derive(Clone, Debug)]
pub struct GridPoint {
    pub eps: f64,
    pub eps_exact: BigRational,
    pub thresh: u64,
    pub rnd: f64,
    pub vector: ParamVector<BigRational>,
}

/// Reduced vectors over `ε ∈ {0.4, 0.8, 1.5, 2.5}`, `thresh ∈ [2, 7]`,
/// three values of `a_U` and both `k_L↓` (144 points). Coordinates are
/// exact rationals so the left end `a_U = 1/(1+ε)` is hit exactly.
pub fn reduced_grid() -> Vec<GridPoint> {
    let mut out = Vec::new();
    for (num, den) in [(2, 5), (4, 5), (3, 2), (5, 2)] {
        let eps = frac(num, den);
        let lo = BigRational::one() / (BigRational::one() + &eps);
        let mid = (lo.clone() + BigRational::one()) / frac(2, 1);
        let high = frac(19, 20);
        for thresh in 2..=7i64 {
            for a_u in [&lo, &mid, &high] {
                for k in [1, 2] {
                    let c = reduced_vector(&frac(thresh, 1), a_u, k, &eps).expect("grid point in range");
                    out.push(GridPoint {
                        eps: eps.to_f64().unwrap_or(f64::NAN),
                        eps_exact: eps.clone(),
                        thresh: thresh as u64,
                        rnd: c.rnd.to_f64().unwrap_or(f64::NAN),
                        vector: c,
                    });
                }
            }
        }
    }
    out
}

/// One line of a verification report.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyRow {
    pub formula: String,
    pub thresh: u64,
    pub rnd: f64,
    pub eps: f64,
    pub pr_l: String,
    pub pr_u: String,
    pub p_l_bound: f64,
    pub p_u_bound: f64,
    pub sound: bool,
}

/// Evaluates every formula against every grid point where the core counter
/// is actually reached, i.e. `|sol| ≥ thresh`; below that the driver answers
/// exactly. A row is sound when both exact probabilities are at most the
/// exact bounds.
pub fn exhaustive_suite(formulas: &[CensusFormula], grid: &[GridPoint]) -> Result<Vec<VerifyRow>> {
    let bounds: Vec<BoundPair<BigRational>> =
        grid.iter().map(|g| p_bounds(&g.vector, &g.eps_exact)).collect::<Result<_>>()?;
    let per_formula: Result<Vec<Vec<VerifyRow>>> = formulas
        .par_iter()
        .map(|cf| {
            let profile = count_profile(&cf.formula, false)?;
            Ok(grid
                .iter()
                .zip(&bounds)
                .filter(|(g, _)| profile.sol_count >= g.thresh)
                .map(|(g, b)| {
                    let tally = event_probs(&profile, g.thresh, &g.vector.rnd, &g.eps_exact);
                    let sound = tally.pr_l <= b.p_l && tally.pr_u <= b.p_u;
                    let f = b.to_f64();
                    VerifyRow {
                        formula: cf.name.clone(),
                        thresh: g.thresh,
                        rnd: g.rnd,
                        eps: g.eps,
                        pr_l: tally.pr_l.to_string(),
                        pr_u: tally.pr_u.to_string(),
                        p_l_bound: f.p_l,
                        p_u_bound: f.p_u,
                        sound,
                    }
                })
                .collect())
        })
        .collect();
    Ok(per_formula?.into_iter().flatten().collect())
}

/// A vector violating the rounding cap: `rnd` far above `(1+ε)a_U·thresh/2`.
pub fn invalid_point() -> GridPoint {
    let eps = frac(4, 5);
    let a_u = BigRational::one() / (BigRational::one() + &eps);
    let mut c = reduced_vector(&frac(4, 1), &a_u, 1, &eps).expect("in range");
    c.rnd = frac(1000, 1);
    GridPoint { eps: 0.8, eps_exact: eps, thresh: 4, rnd: 1000.0, vector: c }
}

pub const REPORT_HEADER: &str = "formula,thresh,rnd,eps,pr_l,pr_u,p_l_bound,p_u_bound,sound";

pub fn write_report<W: Write>(rows: &[VerifyRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r).map_err(|e| Error::Contract(format!("csv write failed: {e}")))?;
    }
    if rows.is_empty() {
        w.write_record(REPORT_HEADER.split(',')).map_err(|e| Error::Contract(format!("csv write failed: {e}")))?;
    }
    w.flush().map_err(|e| Error::Contract(format!("csv write failed: {e}")))?;
    Ok(())
}
