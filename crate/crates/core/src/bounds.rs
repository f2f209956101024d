//! Closed-form error-probability bounds for one run of the core counter.
//!
//! Every formula is generic over [`Scalar`] so the same code evaluates in
//! `f64` for search and in exact rationals for identity and soundness
//! checks.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, ToPrimitive};
use serde::Serialize;

use crate::error::{Error, Result};

/// Field used by the bound formulas.
pub trait Scalar: Clone + PartialOrd + Num + FromPrimitive + ToPrimitive + Debug {
    /// Whether the value is an IEEE NaN (never true for exact types).
    fn is_nan_value(&self) -> bool {
        false
    }

    /// `self ≥ other`, allowing for rounding in inexact types.
    fn at_least(&self, other: &Self) -> bool {
        self >= other
    }
}

impl Scalar for f64 {
    fn is_nan_value(&self) -> bool {
        self.is_nan()
    }

    fn at_least(&self, other: &Self) -> bool {
        *self >= *other - 1e-12 * self.abs().max(other.abs()).max(1.0)
    }
}

impl Scalar for BigRational {}

/// Exact rational from an `f64` (every finite double is a dyadic rational).
pub fn ratio(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite value")
}

/// Exact rational `num / den`.
pub fn frac(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

fn int<S: Scalar>(v: i64) -> S {
    S::from_i64(v).expect("integer fits the scalar type")
}

/// `2^k` for any integer `k`, exact for rationals.
pub fn pow2<S: Scalar>(k: i64) -> S {
    let two: S = int(2);
    let mut acc = S::one();
    for _ in 0..k.unsigned_abs() {
        acc = acc * two.clone();
    }
    if k < 0 {
        S::one() / acc
    } else {
        acc
    }
}

fn max<S: Scalar>(a: S, b: S) -> S {
    if a >= b {
        a
    } else {
        b
    }
}

fn min<S: Scalar>(a: S, b: S) -> S {
    if a <= b {
        a
    } else {
        b
    }
}

/// `1 / (1 + x)`, saturating to 0 when `x` overflowed.
fn inv1p<S: Scalar>(x: S) -> S {
    let q = S::one() / (S::one() + x);
    if q.is_nan_value() {
        S::zero()
    } else {
        q
    }
}

/// Bound on `Pr[T_{m* - k}]` (cells already small `k` steps early).
pub fn q_t<S: Scalar>(a: &S, k: i64, thresh: &S) -> S {
    let x = a.clone() * pow2::<S>(k - 1);
    if x > S::one() {
        let gap = S::one() - S::one() / x.clone();
        inv1p(gap.clone() * gap * x * thresh.clone())
    } else {
        S::one()
    }
}

/// Bound on the cell count under-estimating by the `1/(1+ε)` factor.
pub fn q_l<S: Scalar>(a: &S, k: i64, thresh: &S, eps: &S) -> S {
    let gap = S::one() - S::one() / (S::one() + eps.clone());
    inv1p(gap.clone() * gap * a.clone() * pow2::<S>(k - 1) * thresh.clone())
}

/// Bound on the cell count over-estimating by the `1+ε` factor.
pub fn q_u<S: Scalar>(a: &S, k: i64, thresh: &S, eps: &S) -> S {
    inv1p(eps.clone() * eps.clone() * a.clone() * pow2::<S>(k - 1) * thresh.clone())
}

/// Bound on "cell not yet small, or over-estimating" at `m* - k`.
pub fn q_tbar_u<S: Scalar>(a: &S, k: i64, thresh: &S, eps: &S) -> S {
    let y = a.clone() * pow2::<S>(k);
    if y < S::one() {
        let gap = S::one() / y - S::one();
        let first = inv1p(gap.clone() * gap * a.clone() * pow2::<S>(k - 1) * thresh.clone());
        max(first, q_u(a, k, thresh, eps))
    } else {
        S::one()
    }
}

/// Which half of the cut-off argument a parameter belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Side {
    L,
    U,
}

/// The internal parameter vector `(thresh, rnd, a_L, k_L↓, k_L↑, a_U, k_U↓, k_U↑)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ParamVector<S = f64> {
    pub thresh: S,
    pub rnd: S,
    pub a_l: S,
    pub k_l_down: i64,
    pub k_l_up: i64,
    pub a_u: S,
    pub k_u_down: i64,
    pub k_u_up: i64,
}

impl ParamVector<f64> {
    pub fn to_exact(&self) -> ParamVector<BigRational> {
        ParamVector {
            thresh: ratio(self.thresh),
            rnd: ratio(self.rnd),
            a_l: ratio(self.a_l),
            k_l_down: self.k_l_down,
            k_l_up: self.k_l_up,
            a_u: ratio(self.a_u),
            k_u_down: self.k_u_down,
            k_u_up: self.k_u_up,
        }
    }
}

impl<S: Scalar> ParamVector<S> {
    /// `φ1`: both cut-off windows are nonempty.
    pub fn windows_ordered(&self) -> bool {
        self.k_l_down > self.k_l_up && self.k_u_down > self.k_u_up
    }

    /// Whether the typed ranges hold (`thresh ≥ 2`, `rnd ≥ 1`, `a_L, a_U > 0`).
    pub fn in_domain(&self) -> bool {
        self.thresh >= int(2) && self.rnd >= S::one() && self.a_l > S::zero() && self.a_u > S::zero()
    }
}

/// Upper bounds on the under- and over-estimation probabilities of the core counter.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundPair<S = f64> {
    pub p_l: S,
    pub p_u: S,
}

impl BoundPair<BigRational> {
    pub fn to_f64(&self) -> BoundPair<f64> {
        BoundPair { p_l: self.p_l.to_f64().unwrap_or(f64::NAN), p_u: self.p_u.to_f64().unwrap_or(f64::NAN) }
    }
}

/// `p_L(c)` and `p_U(c)`, each clamped to 1. Requires `φ1`.
pub fn p_bounds<S: Scalar>(c: &ParamVector<S>, eps: &S) -> Result<BoundPair<S>> {
    if !c.windows_ordered() {
        return Err(Error::Contract(format!(
            "cut-off windows must satisfy k_L↓ > k_L↑ and k_U↓ > k_U↑ (got {}/{} and {}/{})",
            c.k_l_down, c.k_l_up, c.k_u_down, c.k_u_up
        )));
    }
    let mut p_l = q_t(&c.a_l, c.k_l_down, &c.thresh);
    for k in (c.k_l_up + 1)..c.k_l_down {
        p_l = p_l + q_l(&c.a_l, k, &c.thresh, eps);
    }
    let mut p_u = q_tbar_u(&c.a_u, c.k_u_up, &c.thresh, eps);
    for k in (c.k_u_up + 1)..c.k_u_down {
        p_u = p_u + q_u(&c.a_u, k, &c.thresh, eps);
    }
    Ok(BoundPair { p_l: min(p_l, S::one()), p_u: min(p_u, S::one()) })
}

/// Individual soundness conditions `φ1 … φ4`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Soundness {
    pub windows: bool,
    pub rnd_floor: bool,
    pub rnd_cap: bool,
    pub lower_cutoff: bool,
}

impl Soundness {
    pub fn all(&self) -> bool {
        self.windows && self.rnd_floor && self.rnd_cap && self.lower_cutoff
    }
}

pub fn soundness<S: Scalar>(c: &ParamVector<S>, eps: &S) -> Soundness {
    let one_eps = S::one() + eps.clone();
    Soundness {
        windows: c.windows_ordered(),
        rnd_floor: c.rnd.at_least(&(c.a_l.clone() / one_eps.clone() * pow2::<S>(c.k_l_up) * c.thresh.clone())),
        rnd_cap: (one_eps.clone() * c.a_u.clone() * pow2::<S>(c.k_u_up - 1) * c.thresh.clone()).at_least(&c.rnd),
        lower_cutoff: one_eps.at_least(&(S::one() / c.a_u.clone() * pow2::<S>(-(c.k_u_down - 1)))),
    }
}

/// `φ1 ∧ φ2 ∧ φ3 ∧ φ4`.
pub fn is_valid<S: Scalar>(c: &ParamVector<S>, eps: &S) -> bool {
    soundness(c, eps).all()
}

/// The reduced vector `(thresh, (1+ε)a_U/2·thresh, (1+ε)²/2·a_U, k, 0, a_U, 1, 0)`.
pub fn reduced_vector<S: Scalar>(thresh: &S, a_u: &S, k_l_down: i64, eps: &S) -> Result<ParamVector<S>> {
    let one_eps = S::one() + eps.clone();
    if *thresh < int(2) {
        return Err(Error::Contract(format!("thresh must be ≥ 2, got {thresh:?}")));
    }
    if a_u.clone() * one_eps.clone() < S::one() {
        return Err(Error::Contract(format!("a_U must be ≥ 1/(1+ε), got {a_u:?}")));
    }
    if !(1..=2).contains(&k_l_down) {
        return Err(Error::Contract(format!("k_L↓ must be 1 or 2, got {k_l_down}")));
    }
    let two: S = int(2);
    Ok(ParamVector {
        thresh: thresh.clone(),
        rnd: one_eps.clone() * a_u.clone() / two.clone() * thresh.clone(),
        a_l: one_eps.clone() * one_eps / two * a_u.clone(),
        k_l_down,
        k_l_up: 0,
        a_u: a_u.clone(),
        k_u_down: 1,
        k_u_up: 0,
    })
}

/// Ties between the two `k_L↓` choices within this margin go to `k = 1`.
pub const TIE_TOLERANCE: f64 = 1e-12;

/// Upper end of every `a_U` search interval.
pub const A_U_MAX: f64 = 1.0 - 1e-9;

/// Smallest double `a` with `a·(1+ε) ≥ 1` in floating point, i.e. the
/// left end of the `a_U` interval as the bound code will accept it.
pub fn a_u_min(eps: f64) -> f64 {
    let mut a = 1.0 / (1.0 + eps);
    while a * (1.0 + eps) < 1.0 {
        a = f64::from_bits(a.to_bits() + 1);
    }
    a
}

/// Best bounds over `k_L↓ ∈ {1, 2}` at a point of the reduced space.
pub fn p_hat(thresh: f64, a_u: f64, eps: f64) -> Result<(BoundPair, i64)> {
    let b1 = p_bounds(&reduced_vector(&thresh, &a_u, 1, &eps)?, &eps)?;
    let b2 = p_bounds(&reduced_vector(&thresh, &a_u, 2, &eps)?, &eps)?;
    let chosen = if b2.p_l < b1.p_l - TIE_TOLERANCE { 2 } else { 1 };
    Ok((BoundPair { p_l: b1.p_l.min(b2.p_l), p_u: b1.p_u.min(b2.p_u) }, chosen))
}

/// A point `(thresh, a_U)` of the reduced problem and the `k_L↓` it uses.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ReducedPoint {
    pub thresh: f64,
    pub a_u: f64,
    pub chosen_k: i64,
}

impl ReducedPoint {
    /// Requires `thresh ≥ 2` and `1/(1+ε) ≤ a_U < 1`.
    pub fn new(thresh: f64, a_u: f64, eps: f64) -> Result<Self> {
        if !(thresh >= 2.0 && a_u * (1.0 + eps) >= 1.0 && a_u < 1.0) {
            return Err(Error::Contract(format!(
                "reduced point needs thresh ≥ 2 and 1/(1+ε) ≤ a_U < 1, got ({thresh}, {a_u})"
            )));
        }
        let (_, chosen_k) = p_hat(thresh, a_u, eps)?;
        Ok(Self { thresh, a_u, chosen_k })
    }

    pub fn vector(&self, eps: f64) -> ParamVector {
        reduced_vector(&self.thresh, &self.a_u, self.chosen_k, &eps).expect("validated point")
    }
}

/// Smallest integer `m` with `2^{-m}·sol < a·thresh`; may be zero or negative.
pub fn m_star<S: Scalar>(sol_count: u64, a: &S, thresh: &S) -> i64 {
    assert!(sol_count >= 1, "m* needs a satisfiable formula");
    let target = a.clone() * thresh.clone();
    let sol: S = S::from_u64(sol_count).expect("count fits the scalar type");
    let below = |m: i64| sol.clone() * pow2::<S>(-m) < target;
    let guess = match (sol_count as f64 / target.to_f64().unwrap_or(1.0)).log2() {
        g if g.is_finite() => g.floor() as i64 + 1,
        _ => 0,
    };
    let mut m = guess;
    while !below(m) {
        m += 1;
    }
    while below(m - 1) {
        m -= 1;
    }
    m
}

/// `a_side ← a_side·2^x`, `k_side↓ ← k_side↓ − x`, `k_side↑ ← k_side↑ − x`.
pub fn shift_equivalent<S: Scalar>(c: &ParamVector<S>, side: Side, x: i64) -> ParamVector<S> {
    let mut d = c.clone();
    match side {
        Side::L => {
            d.a_l = d.a_l * pow2::<S>(x);
            d.k_l_down -= x;
            d.k_l_up -= x;
        }
        Side::U => {
            d.a_u = d.a_u * pow2::<S>(x);
            d.k_u_down -= x;
            d.k_u_up -= x;
        }
    }
    d
}

/// Shifts both sides so that `k_L↑ = k_U↑ = 0`.
pub fn zero_upper_cutoffs<S: Scalar>(c: &ParamVector<S>) -> ParamVector<S> {
    let d = shift_equivalent(c, Side::L, c.k_l_up);
    shift_equivalent(&d, Side::U, c.k_u_up)
}

/// For `k_L↑ = k_U↑ = 0`: set `k_U↓ = 1`, `a_U ← max(a_U, 1/(1+ε))`, and
/// tighten `rnd` and `a_L` to equality with their caps.
pub fn normalize_reduced<S: Scalar>(c: &ParamVector<S>, eps: &S) -> ParamVector<S> {
    let one_eps = S::one() + eps.clone();
    let two: S = int(2);
    let a_u = max(c.a_u.clone(), S::one() / one_eps.clone());
    ParamVector {
        thresh: c.thresh.clone(),
        rnd: one_eps.clone() / two.clone() * a_u.clone() * c.thresh.clone(),
        a_l: one_eps.clone() * one_eps / two * a_u.clone(),
        k_l_down: c.k_l_down,
        k_l_up: c.k_l_up,
        a_u,
        k_u_down: 1,
        k_u_up: c.k_u_up,
    }
}
