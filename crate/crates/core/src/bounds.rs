//! Analytic quantities: the entropy upper bound on the sum rate,
//! Berry–Esseen based concentration bounds for banded power codes, and the
//! constants of the existence argument for rate improvement.
//!
//! Everything here is generic over the floating type; none of it feeds the
//! exact rate pipeline.

use num_bigint::{BigInt, BigUint};
use num_integer::binomial;
use num_rational::BigRational;
use num_traits::{Float, Signed, ToPrimitive, Zero};

use crate::code::{sum_rate_seed, CodeSystem};
use crate::error::{Error, Result};
use crate::log2::log2_big;
use crate::spectrum::{moments, rational_to, spectrum, Moments};

/// Berry–Esseen constant for a one-sided deviation.
pub const BERRY_ESSEEN_ONE_SIDED: f64 = 0.345;
/// Twice the one-sided constant, for two-sided windows.
pub const BERRY_ESSEEN_TWO_SIDED: f64 = 0.69;

fn lit<F: Float>(v: f64) -> F {
    F::from(v).expect("literal converts")
}

/// Entropy bound `Σ_k C(T,k)/2^T · log2(2^T / C(T,k))` on the sum rate.
pub fn upper_bound<F: Float>(users: u32) -> F {
    let t = u64::from(users);
    let scale = 2f64.powi(users as i32);
    let mut acc = 0.0f64;
    for k in 0..=t {
        let c: BigUint = binomial(BigUint::from(t), BigUint::from(k));
        let p = c.to_f64().expect("binomial fits f64 range") / scale;
        let lc = log2_big(&c).expect("binomials are positive");
        acc += p * (f64::from(users) - lc);
    }
    lit(acc)
}

/// `½·exp(-x²/2)`, an upper bound on the standard normal CDF for `x <= 0`.
pub fn gaussian_tail<F: Float>(x: F) -> Result<F> {
    if x > F::zero() || x.is_nan() {
        return Err(Error::Domain(format!(
            "gaussian_tail needs x <= 0, got {:?}",
            x.to_f64()
        )));
    }
    Ok(lit::<F>(0.5) * (-(x * x) / lit(2.0)).exp())
}

fn lemma_inputs<F: Float>(m: &Moments<F>, n: u64, t: F) -> Result<(F, F)> {
    let rho3 = m.rho3.ok_or(Error::ZeroVariance)?;
    if n == 0 {
        return Err(Error::ZeroPower);
    }
    if t.partial_cmp(&F::zero()) != Some(std::cmp::Ordering::Greater) {
        return Err(Error::Domain("t must be positive".into()));
    }
    let n = F::from(n).expect("n converts");
    let expo = (-(t * t) / (lit::<F>(2.0) * n * m.variance_f())).exp();
    Ok((expo, (F::one() + rho3) / n.sqrt()))
}

/// Guaranteed fraction of `C^n` within `t` of the mean weight `n·avg(C)`:
/// `1 - exp(-t²/(2nσ²)) - 0.69·(1+ρ³)/√n`. May be negative.
pub fn lemma1_two_sided<F: Float>(m: &Moments<F>, n: u64, t: F) -> Result<F> {
    let (expo, penalty) = lemma_inputs(m, n, t)?;
    Ok(F::one() - expo - lit::<F>(BERRY_ESSEEN_TWO_SIDED) * penalty)
}

/// Guaranteed fraction on either side of a one-sided threshold at distance
/// `t`: `1 - ½exp(-t²/(2nσ²)) - 0.345·(1+ρ³)/√n`.
pub fn lemma1_one_sided<F: Float>(m: &Moments<F>, n: u64, t: F) -> Result<F> {
    let (expo, penalty) = lemma_inputs(m, n, t)?;
    Ok(F::one() - lit::<F>(0.5) * expo - lit::<F>(BERRY_ESSEEN_ONE_SIDED) * penalty)
}

/// Where the one-sided sets are centred.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThresholdReading {
    /// Thresholds `n·avg(C) ± t`, the centring used when the bound is applied.
    Scaled,
    /// Thresholds `avg(C) ± t` taken literally.
    Literal,
}

/// `(lower, upper)` thresholds: the lower set keeps weights `>= lower`, the
/// upper set keeps weights `<= upper`.
pub fn one_sided_thresholds(
    mean: &BigRational,
    n: u64,
    t: &BigRational,
    reading: ThresholdReading,
) -> (BigRational, BigRational) {
    let centre = match reading {
        ThresholdReading::Scaled => mean * BigRational::from_integer(BigInt::from(n)),
        ThresholdReading::Literal => mean.clone(),
    };
    (&centre - t, &centre + t)
}

/// Constants of the improvement argument for a normalized system.
#[derive(Debug, Clone, PartialEq)]
pub struct TheoremParams<F> {
    pub d: u32,
    pub users: usize,
    /// Seed sum rate `R`.
    pub seed_rate: F,
    /// `d/2 - avg(C_1)`, positive for an improvable seed.
    pub deficit: BigRational,
    /// `κ = deficit / 2`.
    pub kappa: BigRational,
    /// Zero-based indices of constituents with positive variance.
    pub positive_variance: Vec<usize>,
    /// Per-constituent standard deviations.
    pub sigma: Vec<F>,
    /// Per-constituent `ρ³`, `None` for zero variance.
    pub rho3: Vec<Option<F>>,
    /// `0.345 · max (1 + ρ_i³)`; `None` when every variance is zero.
    pub beta: Option<F>,
    /// `deficit / (2 Σ_{i≥2} σ_i)`; `None` when constituents 2..T all have zero variance.
    pub alpha: Option<F>,
}

impl<F: Float> TheoremParams<F> {
    /// `θ(n)`, the max of the two loss terms that are defined.
    pub fn theta(&self, n: u64) -> F {
        let nf = F::from(n).expect("n converts");
        let beta = self.beta.unwrap_or_else(F::zero);
        let root = nf.sqrt();
        let mut theta = F::zero();
        if let Some(alpha) = self.alpha {
            let first = (-(nf * alpha * alpha) / lit(2.0)).exp() + lit::<F>(2.0) * beta / root;
            theta = theta.max(first);
        }
        let sigma1 = self.sigma[0];
        if sigma1 > F::zero() {
            let deficit: F = rational_to(&self.deficit);
            let second =
                lit::<F>(0.5) * (-(nf * deficit * deficit) / (lit::<F>(8.0) * sigma1 * sigma1)).exp() + beta / root;
            theta = theta.max(second);
        }
        theta
    }

    /// `R + log2(2(1-θ)^T)/(dn)`; `-inf` once θ reaches 1.
    pub fn guaranteed_rate(&self, n: u64) -> F {
        let theta = self.theta(n);
        if theta >= F::one() {
            return F::neg_infinity();
        }
        let t = F::from(self.users).expect("users converts");
        let dn = F::from(u64::from(self.d) * n).expect("dim converts");
        self.seed_rate + (F::one() + t * (F::one() - theta).log2()) / dn
    }

    /// θ below which the guaranteed rate exceeds the seed rate.
    pub fn theta_threshold(&self) -> F {
        let t = F::from(self.users).expect("users converts");
        F::one() - lit::<F>(2.0).powf(-F::one() / t)
    }

    /// Smallest `n <= limit` whose guaranteed rate beats the seed rate.
    pub fn min_improving_n(&self, limit: u64) -> Option<u64> {
        let threshold = self.theta_threshold();
        (1..=limit).find(|&n| self.theta(n) < threshold)
    }
}

pub fn theorem1_params<F: Float>(norm: &CodeSystem) -> Result<TheoremParams<F>> {
    let d = norm.dim();
    let half = BigRational::new(BigInt::from(d), BigInt::from(2));
    let deficit = half - norm.average_weight(0);
    if deficit.is_zero() {
        return Err(Error::BalancedSeed);
    }
    if deficit.is_negative() {
        return Err(Error::NotNormalized);
    }
    let ms: Vec<Moments<F>> = (0..norm.users()).map(|i| moments(&spectrum(norm.code(i), d))).collect();
    let positive_variance: Vec<usize> = (0..ms.len()).filter(|&i| !ms[i].variance.is_zero()).collect();
    let sigma: Vec<F> = ms.iter().map(Moments::sigma).collect();
    let rho3: Vec<Option<F>> = ms.iter().map(|m| m.rho3).collect();
    let beta = positive_variance
        .iter()
        .filter_map(|&i| rho3[i])
        .map(|r| F::one() + r)
        .fold(None, |acc: Option<F>, v| Some(acc.map_or(v, |a| a.max(v))))
        .map(|m| lit::<F>(BERRY_ESSEEN_ONE_SIDED) * m);
    let others: F = sigma[1..].iter().fold(F::zero(), |a, &s| a + s);
    let alpha = if positive_variance.iter().any(|&i| i >= 1) {
        Some(rational_to::<F>(&deficit) / (lit::<F>(2.0) * others))
    } else {
        None
    };
    Ok(TheoremParams {
        d,
        users: norm.users(),
        seed_rate: lit(sum_rate_seed(norm)),
        kappa: &deficit / BigRational::from_integer(BigInt::from(2)),
        deficit,
        positive_variance,
        sigma,
        rho3,
        beta,
        alpha,
    })
}
