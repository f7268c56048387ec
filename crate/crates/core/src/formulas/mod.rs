//! Exact and asymptotic closed forms for the attack values and security
//! bounds of the Haar-measure scheme: the exact bit/distinguishing values,
//! Stirling brackets, majority-vote expressions, the n-message series, the
//! single-copy and t-copy upper bounds, the collusion bound, the
//! cloning-vs-telegraphing gap, and the general scheme-independent lower
//! bounds.

mod series;
mod special;

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use serde::Serialize;

use crate::error::{Error, Result};

pub use series::multimessage_series_value;
pub use special::{ln_binomial, ln_gamma, regularized_incomplete_beta};

/// A value known in exact rational arithmetic alongside its float rendering.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactValue {
    pub rational: BigRational,
    pub float: f64,
}

impl ExactValue {
    fn from_rational(rational: BigRational) -> Self {
        let float = rational.to_f64().expect("rational in [0,1] converts");
        Self { rational, float }
    }
}

/// An upper bound clamped into probability range, with the raw formula value
/// kept for plotting and a flag marking bounds that say nothing.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ClampedBound {
    pub value: f64,
    pub raw: f64,
    pub vacuous: bool,
}

impl ClampedBound {
    fn new(raw: f64) -> Self {
        Self {
            value: raw.min(1.0),
            raw,
            vacuous: raw >= 1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ValueKind {
    Exact,
    Upper,
    Lower,
    Asymptotic,
}

impl ValueKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ValueKind::Exact => "exact",
            ValueKind::Upper => "upper",
            ValueKind::Lower => "lower",
            ValueKind::Asymptotic => "asymptotic",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Exactness {
    RationalExact,
    Float,
    LeadingOrder,
}

impl Exactness {
    pub fn as_str(&self) -> &'static str {
        match self {
            Exactness::RationalExact => "rational-exact",
            Exactness::Float => "float",
            Exactness::LeadingOrder => "leading-order",
        }
    }
}

/// One reported value or bound together with the parameters it was
/// evaluated at.
#[derive(Clone, Debug, Serialize)]
pub struct BoundReport {
    pub formula: String,
    pub kind: ValueKind,
    pub exactness: Exactness,
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rational: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vacuous: Option<bool>,
    pub params: BTreeMap<String, f64>,
}

impl BoundReport {
    pub fn new(
        formula: impl Into<String>,
        kind: ValueKind,
        exactness: Exactness,
        value: f64,
    ) -> Self {
        Self {
            formula: formula.into(),
            kind,
            exactness,
            value,
            rational: None,
            vacuous: None,
            params: BTreeMap::new(),
        }
    }

    pub fn with_rational(mut self, rational: &BigRational) -> Self {
        self.rational = Some(rational.to_string());
        self
    }

    pub fn with_vacuous(mut self, vacuous: bool) -> Self {
        self.vacuous = Some(vacuous);
        self
    }

    pub fn with_param(mut self, name: &str, value: f64) -> Self {
        self.params.insert(name.to_string(), value);
        self
    }
}

fn big_binomial(n: u64, k: u64) -> BigInt {
    num_integer::binomial(BigInt::from(n), BigInt::from(k))
}

fn check_rank(r: usize) -> Result<()> {
    if r >= 1 {
        Ok(())
    } else {
        Err(Error::InvalidParameter("rank r must be ≥ 1".into()))
    }
}

fn check_even_dim(d: usize) -> Result<()> {
    if d >= 2 && d.is_multiple_of(2) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "dimension must be even and ≥ 2, got {d}"
        )))
    }
}

/// Exact winning probability of the single-copy bit attack at rank r
/// (dimension d = 2r): `1/2 + C(2r, r) / 2^{2r+1}`.
pub fn bit_exact_value(r: usize) -> Result<ExactValue> {
    check_rank(r)?;
    let numer = big_binomial(2 * r as u64, r as u64);
    let denom = BigInt::one() << (2 * r + 1);
    let rational = BigRational::new(BigInt::one(), BigInt::from(2)) + BigRational::new(numer, denom);
    Ok(ExactValue::from_rational(rational))
}

/// Exact distinguishing value of the two-message basis attack, independent
/// of the total message count: identical to [`bit_exact_value`].
pub fn distinguish_exact_value(r: usize) -> Result<ExactValue> {
    bit_exact_value(r)
}

/// Stirling bracket for the bit value at even dimension d:
/// `1/2 + (1/√(2πd))(1 − 1/(3d)) ≤ value ≤ 1/2 + 1/√(2πd)`.
/// Returns (lower, asymptote, upper); the asymptote is the leading-order
/// value, which coincides with the upper end of the bracket.
pub fn bit_asymptotic_brackets(d: usize) -> Result<(f64, f64, f64)> {
    check_even_dim(d)?;
    let df = d as f64;
    let leading = 1.0 / (2.0 * std::f64::consts::PI * df).sqrt();
    let lower = 0.5 + leading * (1.0 - 1.0 / (3.0 * df));
    let asymptote = 0.5 + leading;
    Ok((lower, asymptote, asymptote))
}

/// Success probability of a t-round majority vote when each round wins
/// independently with probability p; even t breaks ties with a fair coin,
/// contributing the analytic term `(1/2)·C(t, t/2)·(p(1−p))^{t/2}`.
pub fn majority_exact_value(p: f64, t: usize) -> Result<f64> {
    if t < 1 {
        return Err(Error::InvalidParameter("t must be ≥ 1".into()));
    }
    if !(0.0..=1.0).contains(&p) || !p.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "p must be a probability, got {p}"
        )));
    }
    let t_u = t as u64;
    let term = |ell: u64| -> f64 {
        // C(t, ℓ) p^ℓ (1−p)^{t−ℓ}, computed in logs to stay stable for any t
        if p == 0.0 {
            return if ell == 0 { 1.0 } else { 0.0 };
        }
        if p == 1.0 {
            return if ell == t_u { 1.0 } else { 0.0 };
        }
        (ln_binomial(t_u, ell) + ell as f64 * p.ln() + (t_u - ell) as f64 * (1.0 - p).ln()).exp()
    };
    let start = if t % 2 == 1 { t_u.div_ceil(2) } else { t_u / 2 + 1 };
    let mut value: f64 = (start..=t_u).map(term).sum();
    if t.is_multiple_of(2) {
        value += 0.5 * term(t_u / 2);
    }
    Ok(value.clamp(0.0, 1.0))
}

/// Bracket `1/2 + (√t/3)·δ ≤ majority value ≤ 1/2 + √t·δ`, valid for
/// `t ≥ 4` and `0 < δ ≤ 1/(2√(t−1))`. Out-of-range parameters are an
/// error rather than an extrapolation.
pub fn majority_brackets(delta: f64, t: usize) -> Result<(f64, f64)> {
    if t < 4 {
        return Err(Error::Precondition(format!(
            "majority bracket requires t ≥ 4, got {t}"
        )));
    }
    let cap = 0.5 / ((t as f64) - 1.0).sqrt();
    if delta.is_nan() || delta <= 0.0 || delta > cap {
        return Err(Error::Precondition(format!(
            "majority bracket requires 0 < δ ≤ {cap}, got {delta}"
        )));
    }
    let st = (t as f64).sqrt();
    Ok((0.5 + st * delta / 3.0, 0.5 + st * delta))
}

/// Telegraphing lower bound obtained from the distinguishing attack by
/// guessing `m_b`: the reduction multiplies the distinguishing value by 2/n.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TelegraphingLower {
    /// `(2/n) ·` exact distinguishing value.
    pub value: f64,
    /// Leading-order rendering `1/n + 1/(n√(πr))`.
    pub asymptotic: f64,
}

pub fn telegraphing_lower_from_distinguish(r: usize, n: usize) -> Result<TelegraphingLower> {
    check_rank(r)?;
    if n < 2 {
        return Err(Error::InvalidParameter("message count n must be ≥ 2".into()));
    }
    let dist = distinguish_exact_value(r)?.float;
    let nf = n as f64;
    Ok(TelegraphingLower {
        value: 2.0 / nf * dist,
        asymptotic: 1.0 / nf + 1.0 / (nf * (std::f64::consts::PI * r as f64).sqrt()),
    })
}

/// Single-copy upper bound on the bit distinguishing value at even
/// dimension d: `1/2 + 1/(2√(d+1))`.
pub fn ute_upper_bound_bit(d: usize) -> Result<f64> {
    check_even_dim(d)?;
    Ok(0.5 + 0.5 / ((d as f64) + 1.0).sqrt())
}

/// t-copy upper bound `1/2 + 7t/√r`, clamped to 1 with a vacuous flag.
pub fn ute_upper_bound_tcopy(r: usize, t: usize) -> Result<ClampedBound> {
    check_rank(r)?;
    if t < 1 {
        return Err(Error::InvalidParameter("t must be ≥ 1".into()));
    }
    Ok(ClampedBound::new(0.5 + 7.0 * t as f64 / (r as f64).sqrt()))
}

/// Collusion bound `1/2 + 7Q/√r` over Q adaptive rounds; in (d, n)
/// parameters this is the identical quantity `1/2 + 7Q√n/√d`. The message
/// count does not enter the value.
pub fn collusion_upper_bound(r: usize, q: usize, _n: usize) -> Result<ClampedBound> {
    check_rank(r)?;
    if q < 1 {
        return Err(Error::InvalidParameter("round count Q must be ≥ 1".into()));
    }
    Ok(ClampedBound::new(0.5 + 7.0 * q as f64 / (r as f64).sqrt()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GapLogBase {
    /// Binary logarithm, the convention the gap is stated in.
    Binary,
    /// Natural logarithm, for sensitivity analysis only.
    Natural,
}

/// Gap term `3ηd(log₂ d / (N²s))^{1/3}` by which the s-receiver cloning
/// value can exceed the telegraphing value.
pub fn equivalence_gap(d: usize, n_messages: usize, s: usize, eta: f64) -> Result<f64> {
    equivalence_gap_with_base(d, n_messages, s, eta, GapLogBase::Binary)
}

pub fn equivalence_gap_with_base(
    d: usize,
    n_messages: usize,
    s: usize,
    eta: f64,
    base: GapLogBase,
) -> Result<f64> {
    if d < 1 || n_messages < 1 || s < 1 {
        return Err(Error::InvalidParameter(
            "gap requires d, N, s ≥ 1".into(),
        ));
    }
    if eta.is_nan() || eta <= 0.0 || eta > 1.0 {
        return Err(Error::InvalidParameter(format!(
            "η must lie in (0, 1], got {eta}"
        )));
    }
    let log_d = match base {
        GapLogBase::Binary => (d as f64).log2(),
        GapLogBase::Natural => (d as f64).ln(),
    };
    let ratio = log_d / ((n_messages as f64).powi(2) * s as f64);
    Ok(3.0 * eta * d as f64 * ratio.cbrt())
}

/// Smallest receiver count s for which the gap drops to `target` or below.
pub fn min_receivers_for_gap(
    d: usize,
    n_messages: usize,
    eta: f64,
    target: f64,
) -> Result<u64> {
    if target.is_nan() || target <= 0.0 {
        return Err(Error::InvalidParameter("target must be positive".into()));
    }
    if d <= 1 {
        return Ok(1); // log 1 = 0: the gap already vanishes
    }
    // gap ≤ target  ⇔  s ≥ log₂d/N² · (3ηd/target)³
    let needed = (d as f64).log2() / (n_messages as f64).powi(2)
        * (3.0 * eta * d as f64 / target).powi(3);
    let s = needed.ceil().max(1.0) as u64;
    // guard against the boundary rounding the wrong way
    let mut s = s.max(1);
    while equivalence_gap(d, n_messages, s as usize, eta)? > target {
        s += 1;
    }
    while s > 1 && equivalence_gap(d, n_messages, (s - 1) as usize, eta)? <= target {
        s -= 1;
    }
    Ok(s)
}

/// Leading-order lower bounds that hold for any correct scheme with
/// ciphertext dimension d and message set of size M, restricted to N of the
/// messages. The uncomputed remainders are dropped, so all three values are
/// tagged leading-order and never asserted as rigorous inequalities.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GeneralLowerBounds {
    /// Telegraphing value, one copy: `1/N + 1/(N√(π(d−M+1)))`.
    pub telegraphing_single: f64,
    /// Cloning value to two receivers, one copy: same leading term.
    pub cloning_pair: f64,
    /// t-copy, t+1 receivers: `1/N + 1/(57N²√(πt³(d−M+1)))`.
    pub t_copy: f64,
}

pub fn general_lower_bounds(
    d: usize,
    m_count: usize,
    n_count: usize,
    t: usize,
) -> Result<GeneralLowerBounds> {
    if m_count < 2 {
        return Err(Error::InvalidParameter("need at least 2 messages".into()));
    }
    if d < m_count {
        return Err(Error::InvalidParameter(format!(
            "dimension {d} below message count {m_count}"
        )));
    }
    if n_count < 1 || n_count > m_count {
        return Err(Error::InvalidParameter(format!(
            "restricted message count N = {n_count} must lie in 1..={m_count}"
        )));
    }
    if t < 1 {
        return Err(Error::InvalidParameter("t must be ≥ 1".into()));
    }
    let nf = n_count as f64;
    let slack = (d - m_count + 1) as f64;
    let single = 1.0 / nf + 1.0 / (nf * (std::f64::consts::PI * slack).sqrt());
    let t_copy = 1.0 / nf
        + 1.0
            / (57.0 * nf * nf * (std::f64::consts::PI * (t as f64).powi(3) * slack).sqrt());
    Ok(GeneralLowerBounds {
        telegraphing_single: single,
        cloning_pair: single,
        t_copy,
    })
}

/// The t-copy bracket for the Haar scheme:
/// leading-order lower `1/2 + (1/6)√(t/(πr))` and clamped upper
/// `1/2 + 7t/√r`.
pub fn haar_tcopy_brackets(r: usize, t: usize) -> Result<(f64, ClampedBound)> {
    check_rank(r)?;
    if t < 1 {
        return Err(Error::InvalidParameter("t must be ≥ 1".into()));
    }
    let lower = 0.5 + (t as f64 / (std::f64::consts::PI * r as f64)).sqrt() / 6.0;
    Ok((lower, ute_upper_bound_tcopy(r, t)?))
}
