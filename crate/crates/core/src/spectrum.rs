//! Weight distributions of codes and of their n-fold powers.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{Float, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Dense map from Hamming weight `0..=span` to an exact count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightDistribution {
    counts: Vec<BigUint>,
}

impl WeightDistribution {
    /// Builds a distribution from dense counts; `counts.len() - 1` is the span.
    pub fn from_counts(counts: Vec<BigUint>) -> Self {
        assert!(!counts.is_empty(), "span must be at least 0");
        WeightDistribution { counts }
    }

    /// Sparse constructor, for tests and small literals.
    pub fn from_pairs(span: u64, pairs: &[(u64, u64)]) -> Self {
        let mut counts = vec![BigUint::zero(); span as usize + 1];
        for &(w, c) in pairs {
            counts[w as usize] += BigUint::from(c);
        }
        WeightDistribution { counts }
    }

    pub fn span(&self) -> u64 {
        (self.counts.len() - 1) as u64
    }

    pub fn count(&self, w: u64) -> &BigUint {
        static ZERO: std::sync::OnceLock<BigUint> = std::sync::OnceLock::new();
        self.counts
            .get(w as usize)
            .unwrap_or_else(|| ZERO.get_or_init(BigUint::zero))
    }

    pub fn counts(&self) -> &[BigUint] {
        &self.counts
    }

    /// Weights with a nonzero count, ascending.
    pub fn support(&self) -> impl Iterator<Item = (u64, &BigUint)> {
        self.counts
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(w, c)| (w as u64, c))
    }

    pub fn total(&self) -> BigUint {
        self.counts.iter().sum()
    }

    pub fn mean(&self) -> BigRational {
        let total = self.total();
        let sum: BigUint = self.support().map(|(w, c)| c * BigUint::from(w)).sum();
        BigRational::new(sum.into(), total.into())
    }

    /// True when the two distributions are scalar multiples of each other.
    pub fn proportional_to(&self, other: &WeightDistribution) -> bool {
        if self.span() != other.span() {
            return false;
        }
        let ta = self.total();
        let tb = other.total();
        self.counts.iter().zip(&other.counts).all(|(a, b)| a * &tb == b * &ta)
    }

    pub fn cumulative(&self) -> Cumulative {
        let mut prefix = Vec::with_capacity(self.counts.len());
        let mut acc = BigUint::zero();
        for c in &self.counts {
            acc += c;
            prefix.push(acc.clone());
        }
        Cumulative { prefix }
    }
}

/// Prefix sums of a distribution for repeated window counts.
#[derive(Debug, Clone)]
pub struct Cumulative {
    prefix: Vec<BigUint>,
}

impl Cumulative {
    /// Count of weights `<= w`; zero for negative `w`.
    pub fn up_to(&self, w: i64) -> BigUint {
        if w < 0 {
            return BigUint::zero();
        }
        let i = (w as usize).min(self.prefix.len() - 1);
        self.prefix[i].clone()
    }

    /// Count of integer weights in `[lo, hi]`.
    pub fn range(&self, lo: i64, hi: i64) -> BigUint {
        let lo = lo.max(0);
        let hi = hi.min(self.prefix.len() as i64 - 1);
        if lo > hi {
            return BigUint::zero();
        }
        let upper = &self.prefix[hi as usize];
        if lo == 0 {
            upper.clone()
        } else {
            upper - &self.prefix[lo as usize - 1]
        }
    }
}

/// Weight distribution of a single constituent code in dimension `d`.
pub fn spectrum(code: &[u64], d: u32) -> WeightDistribution {
    let mut counts = vec![0u64; d as usize + 1];
    for &w in code {
        counts[w.count_ones() as usize] += 1;
    }
    WeightDistribution {
        counts: counts.into_iter().map(BigUint::from).collect(),
    }
}

/// Distribution of the weight sum of one pick from each input.
pub fn convolve(a: &WeightDistribution, b: &WeightDistribution) -> WeightDistribution {
    let mut out = vec![BigUint::zero(); a.counts.len() + b.counts.len() - 1];
    let small: Option<Vec<u64>> = b.counts.iter().map(ToPrimitive::to_u64).collect();
    for (i, x) in a.counts.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        match &small {
            Some(bs) => {
                for (j, &y) in bs.iter().enumerate() {
                    if y != 0 {
                        out[i + j] += x * y;
                    }
                }
            }
            None => {
                for (j, y) in b.counts.iter().enumerate() {
                    if !y.is_zero() {
                        out[i + j] += x * y;
                    }
                }
            }
        }
    }
    WeightDistribution { counts: out }
}

/// `n`-fold self convolution, built one factor at a time.
pub fn power(dist: &WeightDistribution, n: u64) -> Result<WeightDistribution> {
    if n == 0 {
        return Err(Error::ZeroPower);
    }
    let mut it = Powers::new(dist);
    let mut cur = it.next().expect("powers are infinite");
    for _ in 1..n {
        cur = it.next().expect("powers are infinite");
    }
    Ok(cur)
}

/// Infinite iterator over `dist^1, dist^2, ...`.
pub struct Powers<'a> {
    base: &'a WeightDistribution,
    current: Option<WeightDistribution>,
}

impl<'a> Powers<'a> {
    pub fn new(base: &'a WeightDistribution) -> Self {
        Powers { base, current: None }
    }
}

impl Iterator for Powers<'_> {
    type Item = WeightDistribution;

    fn next(&mut self) -> Option<Self::Item> {
        let next = match &self.current {
            None => self.base.clone(),
            Some(c) => convolve(c, self.base),
        };
        self.current = Some(next.clone());
        Some(next)
    }
}

/// Distribution of the complemented code: `counts'[w] = counts[span - w]`.
pub fn reflect(dist: &WeightDistribution) -> WeightDistribution {
    let mut counts = dist.counts.clone();
    counts.reverse();
    WeightDistribution { counts }
}

/// Mean, variance and the standardized third absolute central moment.
#[derive(Debug, Clone, PartialEq)]
pub struct Moments<F> {
    pub mean: BigRational,
    pub variance: BigRational,
    /// Exact `E|w - mean|^3`.
    pub abs_third: BigRational,
    /// `abs_third / sigma^3`; `None` when the variance is zero.
    pub rho3: Option<F>,
}

impl<F: Float> Moments<F> {
    pub fn sigma(&self) -> F {
        rational_to::<F>(&self.variance).sqrt()
    }

    pub fn variance_f(&self) -> F {
        rational_to::<F>(&self.variance)
    }
}

pub(crate) fn rational_to<F: Float>(r: &BigRational) -> F {
    let v = r.to_f64().unwrap_or_else(|| {
        // to_f64 only fails for magnitudes beyond f64 range
        if r.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    });
    F::from(v).expect("f64 converts to any Float")
}

pub fn moments<F: Float>(dist: &WeightDistribution) -> Moments<F> {
    let total = BigInt::from(dist.total());
    let mean = dist.mean();
    let mut second = BigRational::zero();
    let mut third = BigRational::zero();
    for (w, c) in dist.support() {
        let dev = BigRational::from_integer(BigInt::from(w)) - &mean;
        let c = BigRational::from_integer(BigInt::from(c.clone()));
        let sq = &dev * &dev;
        third += &c * &sq * dev.abs();
        second += c * sq;
    }
    let denom = BigRational::from_integer(total);
    let variance = second / &denom;
    let abs_third = third / &denom;
    let rho3 = if variance.is_zero() {
        None
    } else {
        // rho3 = abs_third / variance^(3/2), evaluated as abs_third/variance / sqrt(variance)
        let ratio = rational_to::<f64>(&(&abs_third / &variance));
        let sigma = rational_to::<f64>(&variance).sqrt();
        F::from(ratio / sigma)
    };
    Moments {
        mean,
        variance,
        abs_third,
        rho3,
    }
}

/// Number of words with integer weight in `[lo, hi]`, endpoints exact.
pub fn band_count(dist: &WeightDistribution, lo: &BigRational, hi: &BigRational) -> BigUint {
    let Some((a, b)) = integer_window(lo, hi, dist.span()) else {
        return BigUint::zero();
    };
    dist.counts[a as usize..=b as usize].iter().sum()
}

/// Integer weights `ceil(lo)..=floor(hi)` clipped to `[0, span]`.
pub(crate) fn integer_window(lo: &BigRational, hi: &BigRational, span: u64) -> Option<(u64, u64)> {
    let a = lo.ceil().to_integer().max(BigInt::zero());
    let b = hi.floor().to_integer().min(BigInt::from(span));
    if a > b {
        return None;
    }
    Some((a.to_u64()?, b.to_u64()?))
}
