//! Closed-form bounds and sample-size formulas for the SRHT.
//!
//! All logarithms are natural. Bounds are returned raw: a tail bound larger
//! than one is reported as computed, never clamped.

use num_bigint::{BigInt, BigUint};
use num_integer::binomial;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Guaranteed lower singular value `1/√6` for the standard sample size.
pub fn embedding_lower() -> f64 {
    (1.0f64 / 6.0).sqrt()
}

/// Guaranteed upper singular value `√(13/6)` for the standard sample size.
pub fn embedding_upper() -> f64 {
    (13.0f64 / 6.0).sqrt()
}

/// The rounded window `[0.40, 1.48]` usually quoted for the embedding.
pub const EMBEDDING_WINDOW_ROUNDED: [f64; 2] = [0.40, 1.48];

/// Row-sampling parameters that turn the row-norm bound into the embedding:
/// `α = 4`, `δ = 5/6`, `η = 7/6`.
pub const EMBEDDING_ALPHA: f64 = 4.0;
pub const EMBEDDING_DELTA: f64 = 5.0 / 6.0;
pub const EMBEDDING_ETA: f64 = 7.0 / 6.0;

/// Sample size and guarantee of the standard embedding theorem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingRequirement {
    /// `ceil(4 (√k + √(8 ln(kn)))² ln k)`, at least 1.
    pub ell: usize,
    /// False when `k < 2` (the formula degenerates) or `ell > n`.
    pub applicable: bool,
    /// `[1/√6, √(13/6)]`.
    pub window: [f64; 2],
    /// Failure probability `3/k`.
    pub failure_probability: f64,
}

/// Minimum embedding dimension for `k` orthonormal columns in dimension `n`.
pub fn required_samples_thm31(k: usize, n: usize) -> EmbeddingRequirement {
    let kf = k.max(1) as f64;
    let raw = 4.0 * (kf.sqrt() + (8.0 * (kf * n.max(1) as f64).ln()).sqrt()).powi(2) * kf.ln();
    let ell = (raw.ceil() as usize).max(1);
    EmbeddingRequirement {
        ell,
        applicable: k >= 2 && ell <= n,
        window: [embedding_lower(), embedding_upper()],
        failure_probability: 3.0 / kf,
    }
}

/// Universal constants of the large-sample theorem. The theorem does not
/// give them numerically; the defaults `c = C = 1` are placeholders that only
/// feed the applicability flag.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LargeSampleParams {
    pub iota: f64,
    pub c_const: f64,
    pub big_c_const: f64,
}

impl LargeSampleParams {
    pub fn new(iota: f64) -> Result<Self> {
        Self::with_constants(iota, 1.0, 1.0)
    }

    pub fn with_constants(iota: f64, c_const: f64, big_c_const: f64) -> Result<Self> {
        for (name, v) in [("iota", iota), ("c_const", c_const), ("C_const", big_c_const)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(name, format!("must be positive and finite, got {v}")));
            }
        }
        Ok(Self {
            iota,
            c_const,
            big_c_const,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LargeSampleRequirement {
    /// `ceil((1 + ι) k ln k)`, at least 1.
    pub ell: usize,
    /// `ι ≤ c`, `k ≥ C ι⁻² ln n`, `k ≥ 2` and `ell ≤ n`.
    pub applicable: bool,
    /// `[ι, √e]`.
    pub window: [f64; 2],
    /// Failure is `O(k^{−cι})`; this is the exponent `c·ι`.
    pub failure_exponent: f64,
}

/// Sample size for the large-sample regime.
pub fn required_samples_thm32(k: usize, n: usize, p: &LargeSampleParams) -> LargeSampleRequirement {
    let kf = k.max(1) as f64;
    let ell = (((1.0 + p.iota) * kf * kf.ln()).ceil() as usize).max(1);
    let dimension_ok = kf >= p.big_c_const * (n.max(1) as f64).ln() / (p.iota * p.iota);
    LargeSampleRequirement {
        ell,
        applicable: k >= 2 && p.iota <= p.c_const && dimension_ok && ell <= n,
        window: [p.iota, std::f64::consts::E.sqrt()],
        failure_exponent: p.c_const * p.iota,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RowNormBound {
    /// `√(k/n) + √(8 ln(βn)/n)`.
    pub bound: f64,
    /// Probability `1/β` that some row of `HDV` exceeds `bound`.
    pub exceedance_probability: f64,
}

/// Bound on the largest row norm of `HDV` for orthonormal `V`.
pub fn row_norm_bound(n: usize, k: usize, beta: f64) -> Result<RowNormBound> {
    if n == 0 || k == 0 {
        return Err(Error::invalid("n, k", "must be positive"));
    }
    let nf = n as f64;
    if !(beta > 0.0) || beta * nf <= 1.0 {
        return Err(Error::invalid("beta", format!("need beta > 0 and beta·n > 1, got {beta}")));
    }
    Ok(RowNormBound {
        bound: (k as f64 / nf).sqrt() + (8.0 * (beta * nf).ln() / nf).sqrt(),
        exceedance_probability: beta.recip(),
    })
}

/// Tail `e^{−t²/8}` of a convex `L`-Lipschitz function of a Rademacher vector
/// exceeding its mean by `L·t`.
pub fn rademacher_tail(lipschitz: f64, t: f64) -> Result<f64> {
    if !(lipschitz > 0.0) {
        return Err(Error::invalid("lipschitz", "must be positive"));
    }
    if !(t >= 0.0) {
        return Err(Error::invalid("t", format!("must be nonnegative, got {t}")));
    }
    Ok((-t * t / 8.0).exp())
}

/// Hoeffding bound `2 e^{−n t²/2}` on one component of `HDx` for unit `x`.
pub fn hoeffding_component_tail(n: usize, t: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::invalid("n", "must be positive"));
    }
    if !(t >= 0.0) {
        return Err(Error::invalid("t", format!("must be nonnegative, got {t}")));
    }
    Ok(2.0 * (-(n as f64) * t * t / 2.0).exp())
}

/// Inputs of the matrix Chernoff bound for sampling without replacement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChernoffParams {
    /// Matrix dimension.
    pub k: usize,
    /// Uniform bound on `λ_max` of every matrix in the family.
    pub b: f64,
    pub mu_min: f64,
    pub mu_max: f64,
    /// `δ` for the lower tail, `η` for the upper tail.
    pub deviation: f64,
}

impl ChernoffParams {
    fn validate(&self) -> Result<()> {
        if !(self.b > 0.0) {
            return Err(Error::invalid("B", "must be positive"));
        }
        if !(self.mu_min >= 0.0 && self.mu_max >= 0.0) {
            return Err(Error::invalid("mu", "must be nonnegative"));
        }
        if self.mu_min > self.mu_max {
            return Err(Error::invalid("mu_min", "must not exceed mu_max"));
        }
        Ok(())
    }
}

/// `−δ − (1−δ) ln(1−δ)`, the log of `e^{−δ}/(1−δ)^{1−δ}`, continuous at `δ = 1`.
fn lower_log_base(delta: f64) -> f64 {
    if delta == 1.0 {
        -1.0
    } else {
        -delta - (1.0 - delta) * (1.0 - delta).ln()
    }
}

/// `η − (1+η) ln(1+η)`, the log of `e^{η}/(1+η)^{1+η}`.
fn upper_log_base(eta: f64) -> f64 {
    eta - (1.0 + eta) * eta.ln_1p()
}

/// `k · [e^{−δ}/(1−δ)^{1−δ}]^{μ_min/B}` for `δ ∈ [0, 1]`.
pub fn chernoff_lower_tail(p: &ChernoffParams) -> Result<f64> {
    p.validate()?;
    if !(0.0..=1.0).contains(&p.deviation) {
        return Err(Error::invalid("delta", format!("must lie in [0, 1], got {}", p.deviation)));
    }
    Ok(p.k as f64 * (p.mu_min / p.b * lower_log_base(p.deviation)).exp())
}

/// `k · [e^{η}/(1+η)^{1+η}]^{μ_max/B}` for `η ≥ 0`.
pub fn chernoff_upper_tail(p: &ChernoffParams) -> Result<f64> {
    p.validate()?;
    if !(p.deviation >= 0.0) {
        return Err(Error::invalid("eta", format!("must be nonnegative, got {}", p.deviation)));
    }
    Ok(p.k as f64 * (p.mu_max / p.b * upper_log_base(p.deviation)).exp())
}

/// Failure probability of uniform row sampling with `ℓ ≥ α M ln k`: both
/// Chernoff tails with exponent `α ln k`.
pub fn row_sampling_failure_bound(k: usize, alpha: f64, delta: f64, eta: f64) -> Result<f64> {
    if k < 2 {
        return Err(Error::invalid("k", "need k >= 2 so that ln k > 0"));
    }
    if !(alpha > 0.0) {
        return Err(Error::invalid("alpha", "must be positive"));
    }
    if !(0.0..1.0).contains(&delta) {
        return Err(Error::invalid("delta", format!("must lie in [0, 1), got {delta}")));
    }
    if !(eta >= 0.0) {
        return Err(Error::invalid("eta", format!("must be nonnegative, got {eta}")));
    }
    let exponent = alpha * (k as f64).ln();
    let kf = k as f64;
    Ok(kf * (exponent * lower_log_base(delta)).exp() + kf * (exponent * upper_log_base(eta)).exp())
}

/// Largest `k` for which [`coupon_coverage_probability`] uses exact integers.
pub const COUPON_EXACT_MAX_K: usize = 20;

/// Number of `ell`-subsets of `k²` items, split into `k` classes of `k`, that
/// meet every class. Exact inclusion–exclusion.
pub fn coupon_covering_subsets(k: usize, ell: usize) -> Result<BigUint> {
    let n = coupon_check(k, ell)?;
    let mut total = BigInt::zero();
    for i in 0..=k {
        let term = BigInt::from(binomial(BigUint::from(k), BigUint::from(i)))
            * BigInt::from(binom_or_zero(n - i * k, ell));
        if i % 2 == 0 {
            total += term;
        } else {
            total -= term;
        }
    }
    total
        .to_biguint()
        .ok_or_else(|| Error::invalid("k", "inclusion-exclusion produced a negative count"))
}

fn binom_or_zero(n: usize, r: usize) -> BigUint {
    if r > n {
        BigUint::zero()
    } else {
        binomial(BigUint::from(n), BigUint::from(r))
    }
}

fn coupon_check(k: usize, ell: usize) -> Result<usize> {
    if k == 0 {
        return Err(Error::invalid("k", "must be positive"));
    }
    let n = k.checked_mul(k).ok_or_else(|| Error::invalid("k", "k² overflows"))?;
    if ell == 0 || ell > n {
        return Err(Error::SampleCountOutOfRange { ell, n });
    }
    Ok(n)
}

/// Probability that a uniform `ell`-subset of `k²` items hits all `k` classes
/// of size `k`.
///
/// Exact big integers up to `k = 20`; beyond that, log-space binomials with
/// Neumaier-compensated alternating summation.
pub fn coupon_coverage_probability(k: usize, ell: usize) -> Result<f64> {
    let n = coupon_check(k, ell)?;
    if ell < k {
        return Ok(0.0);
    }
    if ell == n {
        return Ok(1.0);
    }
    if k <= COUPON_EXACT_MAX_K {
        let hits = coupon_covering_subsets(k, ell)?;
        let all = binomial(BigUint::from(n), BigUint::from(ell));
        return Ok(ratio_to_f64(&hits, &all));
    }
    use statrs::function::factorial::ln_binomial;
    let (n64, ell64, k64) = (n as u64, ell as u64, k as u64);
    let ln_all = ln_binomial(n64, ell64);
    let (mut sum, mut compensation) = (0.0f64, 0.0f64);
    for i in 0..=k64 {
        let rest = n64 - i * k64;
        if ell64 > rest {
            break;
        }
        let magnitude = (ln_binomial(k64, i) + ln_binomial(rest, ell64) - ln_all).exp();
        let term = if i % 2 == 0 { magnitude } else { -magnitude };
        let t = sum + term;
        compensation += if sum.abs() >= term.abs() {
            (sum - t) + term
        } else {
            (term - t) + sum
        };
        sum = t;
    }
    Ok((sum + compensation).clamp(0.0, 1.0))
}

/// `a / b` rounded to f64 without overflowing on large integers.
fn ratio_to_f64(a: &BigUint, b: &BigUint) -> f64 {
    let shift = b.bits().saturating_sub(1000);
    let (a, b) = (a >> shift, b >> shift);
    match (a.to_f64(), b.to_f64()) {
        (Some(x), Some(y)) => x / y,
        _ => f64::NAN,
    }
}
