//! Banded power codes and the glued first constituent `A* ∪ B*`.
//!
//! For a system `C_1..C_T` in dimension `d`, tensor power `n` and band
//! widths `g_2..g_T` (total `g`):
//!
//! * `C_i*` keeps the words of `C_i^n` whose weight lies in
//!   `[n·avg(C_i) - g_i, n·avg(C_i) + g_i]`;
//! * `A*` keeps the words of `C_1^n` with weight at most `dn/2 - g - 1`;
//! * `B*` keeps the words of the complemented power with weight at least
//!   `dn/2 + g`.
//!
//! Every sum involving `A*` then weighs strictly less than every sum
//! involving `B*`, so the glued system stays uniquely decodable.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use crate::code::{full_mask, CodeSystem, DEFAULT_GUARD};
use crate::error::{Error, Result};
use crate::log2::log2_product_per;
pub use crate::log2::{log2_big, log2_product};
use crate::spectrum::{integer_window, power, spectrum, Cumulative, WeightDistribution};

/// Tensor power and band widths for constituents `2..=T`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GlueParams {
    pub n: u64,
    pub g: Vec<u64>,
}

impl GlueParams {
    pub fn new(n: u64, g: Vec<u64>) -> Self {
        GlueParams { n, g }
    }

    pub fn g_total(&self) -> u64 {
        self.g.iter().sum()
    }
}

impl std::fmt::Display for GlueParams {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "n={}", self.n)?;
        for (i, g) in self.g.iter().enumerate() {
            write!(f, " g{}={}", i + 2, g)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstructionResult {
    /// `|C_1*|, ..., |C_T*|` with `|C_1*| = |A*| + |B*|`.
    pub sizes: Vec<BigUint>,
    pub a_size: BigUint,
    pub b_size: BigUint,
    pub dim: u64,
    /// `(1/dim) log2 Π sizes`, absolute error below 1e-12.
    pub rate: f64,
    pub params: GlueParams,
}

/// Weight of the heaviest `A*` word and the lightest original weight whose
/// complement lands in `B*`, as inclusive caps on `C_1^n` weights.
fn first_code_caps(dim: u64, g_total: u64) -> (i64, i64) {
    let dn = dim as i64;
    let g = g_total as i64;
    // A*: w <= dn/2 - g - 1; B*: dn - w >= dn/2 + g  <=>  w <= dn/2 - g
    ((dn - 2 * g - 2).div_euclid(2), (dn - 2 * g).div_euclid(2))
}

/// Inclusive weight window of the band around `n·mean` of half-width `g`.
fn band_window(n: u64, mean: &BigRational, g: u64, span: u64) -> Option<(u64, u64)> {
    let centre = mean * BigRational::from_integer(BigInt::from(n));
    let g = BigRational::from_integer(BigInt::from(g));
    integer_window(&(&centre - &g), &(&centre + &g), span)
}

/// The spectra of `C_i^n` for one `n`, with prefix sums for band queries.
#[derive(Debug, Clone)]
pub struct PoweredSystem {
    d: u32,
    n: u64,
    means: Vec<BigRational>,
    cumulative: Vec<Cumulative>,
}

impl PoweredSystem {
    pub fn new(sys: &CodeSystem, n: u64) -> Result<Self> {
        let powers = (0..sys.users())
            .map(|i| power(&spectrum(sys.code(i), sys.dim()), n))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_powers(sys, n, &powers))
    }

    /// Wraps spectra already raised to the `n`-th power.
    pub fn from_powers(sys: &CodeSystem, n: u64, powers: &[WeightDistribution]) -> Self {
        PoweredSystem {
            d: sys.dim(),
            n,
            means: (0..sys.users()).map(|i| sys.average_weight(i)).collect(),
            cumulative: powers.iter().map(WeightDistribution::cumulative).collect(),
        }
    }

    pub fn dim(&self) -> u64 {
        u64::from(self.d) * self.n
    }

    pub fn users(&self) -> usize {
        self.means.len()
    }

    /// `|C_i*|` for `i >= 1` (zero based) at half-width `g`.
    pub fn band_size(&self, i: usize, g: u64) -> BigUint {
        match band_window(self.n, &self.means[i], g, self.dim()) {
            Some((a, b)) => self.cumulative[i].range(a as i64, b as i64),
            None => BigUint::zero(),
        }
    }

    /// `(|A*|, |B*|)` for total band width `g_total`.
    pub fn glued_sizes(&self, g_total: u64) -> (BigUint, BigUint) {
        let (a_cap, b_cap) = first_code_caps(self.dim(), g_total);
        (self.cumulative[0].up_to(a_cap), self.cumulative[0].up_to(b_cap))
    }

    pub fn evaluate(&self, g: &[u64]) -> Result<ConstructionResult> {
        let t = self.users();
        if g.len() + 1 != t {
            return Err(Error::ParamCount {
                expected: t - 1,
                got: g.len(),
            });
        }
        let params = GlueParams::new(self.n, g.to_vec());
        let (a_size, b_size) = self.glued_sizes(params.g_total());
        let mut sizes = Vec::with_capacity(t);
        sizes.push(&a_size + &b_size);
        for (i, &gi) in g.iter().enumerate() {
            sizes.push(self.band_size(i + 1, gi));
        }
        if let Some(index) = sizes.iter().position(Zero::is_zero) {
            return Err(Error::EmptyConstituent { index });
        }
        let dim = self.dim();
        let rate = log2_product_per(&sizes, dim)?;
        Ok(ConstructionResult {
            sizes,
            a_size,
            b_size,
            dim,
            rate,
            params,
        })
    }
}

/// Sizes and sum rate of the glued construction at `params`.
///
/// `norm` should already be normalized (first constituent lightest); the
/// construction itself is valid for any system.
pub fn improved_sizes(norm: &CodeSystem, params: &GlueParams) -> Result<ConstructionResult> {
    if params.n == 0 {
        return Err(Error::ZeroPower);
    }
    if params.g.len() + 1 != norm.users() {
        return Err(Error::ParamCount {
            expected: norm.users() - 1,
            got: params.g.len(),
        });
    }
    PoweredSystem::new(norm, params.n)?.evaluate(&params.g)
}

/// Weight bounds showing the two halves of the glued code never share a sum.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeparationCertificate {
    /// Largest possible weight of a sum with an `A*` word.
    pub a_side_max: i64,
    /// Smallest possible weight of a sum with a `B*` word.
    pub b_side_min: i64,
}

impl SeparationCertificate {
    pub fn gap(&self) -> i64 {
        self.b_side_min - self.a_side_max
    }
}

pub fn weight_separation(
    norm: &CodeSystem,
    params: &GlueParams,
    result: &ConstructionResult,
) -> Result<SeparationCertificate> {
    if result.sizes.iter().any(Zero::is_zero) {
        return Err(Error::EmptyConstituent {
            index: result.sizes.iter().position(Zero::is_zero).unwrap_or(0),
        });
    }
    let dim = u64::from(norm.dim()) * params.n;
    let (a_cap, b_cap) = first_code_caps(dim, params.g_total());
    let mut a_max = a_cap;
    let mut b_min = dim as i64 - b_cap;
    for (i, &gi) in params.g.iter().enumerate() {
        let (lo, hi) = band_window(params.n, &norm.average_weight(i + 1), gi, dim)
            .ok_or(Error::EmptyConstituent { index: i + 1 })?;
        a_max += hi as i64;
        b_min += lo as i64;
    }
    let cert = SeparationCertificate {
        a_side_max: a_max,
        b_side_min: b_min,
    };
    if cert.gap() < 1 {
        return Err(Error::SeparationFailed {
            a_max: a_max.to_string(),
            b_min: b_min.to_string(),
        });
    }
    Ok(cert)
}

/// All words of `code^n`, block `j` occupying coordinates `j·d .. (j+1)·d`.
fn power_words(code: &[u64], d: u32, n: u64) -> Vec<u64> {
    let mut words = vec![0u64];
    for block in 0..n {
        let shift = block as u32 * d;
        words = words
            .iter()
            .flat_map(|&w| code.iter().map(move |&c| w | (c << shift)))
            .collect();
    }
    words
}

/// Explicitly builds the glued system in dimension `d·n` for small cases.
pub fn materialize_small(norm: &CodeSystem, params: &GlueParams) -> Result<CodeSystem> {
    materialize_with_guard(norm, params, DEFAULT_GUARD)
}

pub fn materialize_with_guard(norm: &CodeSystem, params: &GlueParams, guard: u64) -> Result<CodeSystem> {
    let t = norm.users();
    if params.n == 0 {
        return Err(Error::ZeroPower);
    }
    if params.g.len() + 1 != t {
        return Err(Error::ParamCount {
            expected: t - 1,
            got: params.g.len(),
        });
    }
    let d = norm.dim();
    let dim = u64::from(d) * params.n;
    if dim > 64 {
        return Err(Error::DimensionTooLarge { d: dim, limit: 64 });
    }
    // reject before enumerating anything large
    let predicted = improved_sizes(norm, params)?;
    let product: BigUint = predicted.sizes.iter().product();
    let expansion: BigUint = (0..t)
        .map(|i| BigUint::from(norm.code(i).len()).pow(params.n as u32))
        .sum();
    if product > BigUint::from(guard) || expansion > BigUint::from(guard) {
        return Err(Error::GuardExceeded {
            needed: product.max(expansion).to_string(),
            limit: guard,
        });
    }

    let (a_cap, b_cap) = first_code_caps(dim, params.g_total());
    let full = full_mask(dim as u32);
    let first = power_words(norm.code(0), d, params.n);
    let mut glued: Vec<u64> = first
        .iter()
        .copied()
        .filter(|w| i64::from(w.count_ones()) <= a_cap)
        .collect();
    glued.extend(
        first
            .iter()
            .filter(|w| i64::from(w.count_ones()) <= b_cap)
            .map(|w| w ^ full),
    );
    let mut codes = vec![glued];
    for (i, &gi) in params.g.iter().enumerate() {
        let (lo, hi) = band_window(params.n, &norm.average_weight(i + 1), gi, dim)
            .ok_or(Error::EmptyConstituent { index: i + 1 })?;
        codes.push(
            power_words(norm.code(i + 1), d, params.n)
                .into_iter()
                .filter(|w| (lo..=hi).contains(&u64::from(w.count_ones())))
                .collect(),
        );
    }
    if let Some(index) = codes.iter().position(Vec::is_empty) {
        return Err(Error::EmptyConstituent { index });
    }
    debug_assert!(codes
        .iter()
        .zip(&predicted.sizes)
        .all(|(c, s)| s.to_usize() == Some(c.len())));
    CodeSystem::new(dim as u32, codes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code::verify_ud;

    fn t2() -> CodeSystem {
        CodeSystem::new(
            6,
            vec![
                vec![3, 4, 7, 10, 14, 17, 21, 27, 32, 36, 42, 49, 56, 59, 60],
                vec![8, 9, 16, 18, 24, 29, 30, 31, 32, 33, 34, 39, 45, 47, 54, 55],
            ],
        )
        .unwrap()
    }

    fn lindstrom_normalized() -> CodeSystem {
        CodeSystem::new(2, vec![vec![2, 1, 0], vec![3, 0]]).unwrap()
    }

    #[test]
    fn caps_follow_the_windows() {
        assert_eq!(first_code_caps(852, 24), (401, 402));
        // odd dimension: dn/2 = 5/2
        assert_eq!(first_code_caps(5, 0), (1, 2));
        assert_eq!(first_code_caps(4, 5), (-4, -3));
    }

    #[test]
    fn t2_record_rate() {
        let r = improved_sizes(&t2(), &GlueParams::new(142, vec![24])).unwrap();
        assert_eq!(r.dim, 852);
        assert_eq!(&r.a_size + &r.b_size, r.sizes[0]);
        assert!(format!("{:.12}", r.rate).starts_with("1.318446971"));
        let cert = weight_separation(&t2(), &r.params, &r).unwrap();
        assert_eq!(cert.gap(), 1);
    }

    #[test]
    fn lindstrom_small_materialization() {
        let p = GlueParams::new(2, vec![0]);
        let sys = materialize_small(&lindstrom_normalized(), &p).unwrap();
        assert_eq!(sys.dim(), 4);
        assert_eq!(sys.sizes(), vec![14, 2]);
        assert!(verify_ud(&sys).unwrap().is_ud);
        let r = improved_sizes(&lindstrom_normalized(), &p).unwrap();
        assert_eq!(r.a_size, BigUint::from(5u32));
        assert_eq!(r.b_size, BigUint::from(9u32));
    }

    #[test]
    fn t2_small_materialization() {
        let p = GlueParams::new(2, vec![1]);
        let sys = materialize_small(&t2(), &p).unwrap();
        assert_eq!(sys.dim(), 12);
        assert!(verify_ud(&sys).unwrap().is_ud);
        let r = improved_sizes(&t2(), &p).unwrap();
        let got: Vec<BigUint> = sys.sizes().into_iter().map(BigUint::from).collect();
        assert_eq!(got, r.sizes);
    }

    #[test]
    fn empty_band_is_reported() {
        // 41/15 is not an integer, so a zero-width band around it is empty
        let sys = CodeSystem::new(6, vec![vec![0, 1], t2().code(0).to_vec()]).unwrap();
        let p = GlueParams::new(1, vec![0]);
        assert_eq!(improved_sizes(&sys, &p), Err(Error::EmptyConstituent { index: 1 }));
        assert_eq!(materialize_small(&sys, &p), Err(Error::EmptyConstituent { index: 1 }));
    }

    #[test]
    fn param_validation() {
        assert_eq!(
            improved_sizes(&t2(), &GlueParams::new(2, vec![1, 2])),
            Err(Error::ParamCount { expected: 1, got: 2 })
        );
        assert_eq!(
            improved_sizes(&t2(), &GlueParams::new(0, vec![1])),
            Err(Error::ZeroPower)
        );
        assert!(matches!(
            materialize_small(&t2(), &GlueParams::new(11, vec![1])),
            Err(Error::DimensionTooLarge { .. })
        ));
    }

    #[test]
    fn log2_examples() {
        let v = log2_product([BigUint::from(240u32)].iter()).unwrap();
        assert!((v - 240f64.log2()).abs() < 1e-13);
        assert!((v / 6.0 - 1.3178).abs() < 1e-4);
    }
}
