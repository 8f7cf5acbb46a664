//! Codewords, code systems, unique-decodability checks and the equivalence
//! transformations (coordinate negation and permutation).
//!
//! Bit `k` of a codeword value (least significant first) is coordinate
//! `k + 1`. All results are orientation independent, so this is only an I/O
//! convention.

use std::collections::hash_map::Entry;
use std::collections::HashMap;
use std::hash::Hash;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::ToPrimitive;

use crate::error::{Error, Result};
use crate::log2::log2_product;

/// Default cap on the number of tuples `verify_ud` will enumerate.
pub const DEFAULT_GUARD: u64 = 100_000_000;

/// Maximum dimension accepted by [`normalize_step1`].
pub const NORMALIZE_MAX_DIM: u32 = 24;

/// Maximum number of optima kept by [`normalize_step1`].
pub const NORMALIZE_MAX_CANDIDATES: usize = 1024;

/// A binary vector stored as the bits of an integer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Codeword(pub u64);

impl Codeword {
    pub fn weight(self) -> u32 {
        self.0.count_ones()
    }

    pub fn fits(self, d: u32) -> bool {
        self.0 & !full_mask(d) == 0
    }
}

/// Number of set coordinates of `c`.
pub fn hamming_weight(c: Codeword) -> u32 {
    c.weight()
}

/// The all-ones vector of length `d`.
pub fn full_mask(d: u32) -> u64 {
    if d >= 64 {
        u64::MAX
    } else {
        (1u64 << d) - 1
    }
}

/// `d` coordinates and `T` constituent codes, one per user.
///
/// Constituent codes keep their listed order; they are nonempty,
/// duplicate-free and every word fits in `d` bits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodeSystem {
    d: u32,
    codes: Vec<Vec<u64>>,
}

impl CodeSystem {
    pub fn new(d: u32, codes: Vec<Vec<u64>>) -> Result<Self> {
        if d == 0 || d > 64 {
            return Err(Error::InvalidDimension(d));
        }
        if codes.is_empty() {
            return Err(Error::NoConstituents);
        }
        let mask = full_mask(d);
        for (ci, code) in codes.iter().enumerate() {
            if code.is_empty() {
                return Err(Error::EmptyCode { index: ci });
            }
            let mut seen = std::collections::HashSet::with_capacity(code.len());
            for (pos, &v) in code.iter().enumerate() {
                if v & !mask != 0 {
                    return Err(Error::OutOfRange {
                        code: ci,
                        position: pos,
                        value: v,
                        d,
                    });
                }
                if !seen.insert(v) {
                    return Err(Error::Duplicate {
                        code: ci,
                        position: pos,
                        value: v,
                    });
                }
            }
        }
        Ok(CodeSystem { d, codes })
    }

    pub fn dim(&self) -> u32 {
        self.d
    }

    /// Number of users `T`.
    pub fn users(&self) -> usize {
        self.codes.len()
    }

    pub fn code(&self, i: usize) -> &[u64] {
        &self.codes[i]
    }

    pub fn codes(&self) -> &[Vec<u64>] {
        &self.codes
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.codes.iter().map(Vec::len).collect()
    }

    /// `Π |C_i|` as an exact integer.
    pub fn tuple_count(&self) -> BigUint {
        self.codes
            .iter()
            .fold(BigUint::from(1u32), |acc, c| acc * BigUint::from(c.len()))
    }

    pub fn total_weight(&self, i: usize) -> u64 {
        self.codes[i].iter().map(|&c| u64::from(c.count_ones())).sum()
    }

    /// Exact average Hamming weight of constituent `i`.
    pub fn average_weight(&self, i: usize) -> BigRational {
        BigRational::new(BigInt::from(self.total_weight(i)), BigInt::from(self.codes[i].len()))
    }

    /// Reorders constituents so that position `k` holds the old `order[k]`.
    pub fn reorder(&self, order: &[usize]) -> Result<Self> {
        let t = self.users();
        let mut seen = vec![false; t];
        if order.len() != t {
            return Err(Error::InvalidPermutation(format!(
                "order has {} entries, expected {t}",
                order.len()
            )));
        }
        for &o in order {
            if o >= t || seen[o] {
                return Err(Error::InvalidPermutation(format!("bad constituent order {order:?}")));
            }
            seen[o] = true;
        }
        Ok(CodeSystem {
            d: self.d,
            codes: order.iter().map(|&o| self.codes[o].clone()).collect(),
        })
    }
}

/// A pair of distinct tuples that produce the same sum vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    pub first: Vec<u64>,
    pub second: Vec<u64>,
    pub sum: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UdReport {
    pub is_ud: bool,
    pub total_tuples: BigUint,
    pub distinct_sums: BigUint,
    pub witness: Option<Witness>,
}

/// Coordinate-wise integer sum of one tuple.
pub fn sum_vector(d: u32, words: &[u64]) -> Vec<u32> {
    (0..d)
        .map(|k| words.iter().map(|w| ((w >> k) & 1) as u32).sum())
        .collect()
}

// ---------------------------------------------------------------------------
// Sum enumeration

/// Packed sum vector. Each coordinate occupies `bits` bits, wide enough that
/// adding `T` binary words never carries between coordinates.
pub(crate) trait SumKey: Clone + Eq + Hash {
    fn zero(limbs: usize) -> Self;
    fn add(&self, other: &Self) -> Self;
}

impl SumKey for u128 {
    fn zero(_: usize) -> Self {
        0
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
}

impl SumKey for Vec<u128> {
    fn zero(limbs: usize) -> Self {
        vec![0; limbs]
    }
    fn add(&self, other: &Self) -> Self {
        self.iter().zip(other).map(|(a, b)| a + b).collect()
    }
}

/// Bits per coordinate needed to hold values in `0..=users`.
pub(crate) fn coord_bits(users: usize) -> u32 {
    usize::BITS - users.leading_zeros()
}

pub(crate) struct Spreader {
    d: u32,
    bits: u32,
    per_limb: u32,
}

impl Spreader {
    pub(crate) fn new(d: u32, users: usize) -> Self {
        let bits = coord_bits(users).max(1);
        Spreader {
            d,
            bits,
            per_limb: 128 / bits,
        }
    }

    pub(crate) fn limbs(&self) -> usize {
        self.d.div_ceil(self.per_limb) as usize
    }

    pub(crate) fn fits_u128(&self) -> bool {
        self.limbs() == 1
    }

    pub(crate) fn spread_u128(&self, w: u64) -> u128 {
        let mut out = 0u128;
        for k in 0..self.d {
            if (w >> k) & 1 == 1 {
                out |= 1u128 << (k * self.bits);
            }
        }
        out
    }

    fn spread_limbs(&self, w: u64) -> Vec<u128> {
        let mut out = vec![0u128; self.limbs()];
        for k in 0..self.d {
            if (w >> k) & 1 == 1 {
                let limb = (k / self.per_limb) as usize;
                let off = (k % self.per_limb) * self.bits;
                out[limb] |= 1u128 << off;
            }
        }
        out
    }
}

/// Visits every tuple in mixed-radix order (last constituent fastest),
/// passing its packed sum and linear index.
fn walk_sums<K: SumKey>(spreads: &[Vec<K>], zero: K, mut f: impl FnMut(&K, u64)) {
    fn rec<K: SumKey>(spreads: &[Vec<K>], level: usize, acc: &K, index: u64, f: &mut dyn FnMut(&K, u64)) {
        if level == spreads.len() {
            f(acc, index);
            return;
        }
        let base = index * spreads[level].len() as u64;
        for (j, s) in spreads[level].iter().enumerate() {
            rec(spreads, level + 1, &acc.add(s), base + j as u64, f);
        }
    }
    rec(spreads, 0, &zero, 0, &mut f);
}

fn check_guard(sys: &CodeSystem, guard: u64) -> Result<u64> {
    let total = sys.tuple_count();
    match total.to_u64() {
        Some(t) if t <= guard => Ok(t),
        _ => Err(Error::GuardExceeded {
            needed: total.to_string(),
            limit: guard,
        }),
    }
}

/// Decodes a linear tuple index back into the chosen codewords.
pub(crate) fn tuple_at(sys: &CodeSystem, mut index: u64) -> Vec<u64> {
    let mut out = vec![0; sys.users()];
    for (i, code) in sys.codes.iter().enumerate().rev() {
        let len = code.len() as u64;
        out[i] = code[(index % len) as usize];
        index /= len;
    }
    out
}

/// Multiplicity statistics of the sum multiset.
pub(crate) struct SumStats {
    pub distinct: u64,
    pub colliding_pairs: u64,
    pub first_collision: Option<(u64, u64)>,
}

fn collect_stats<K: SumKey>(spreads: &[Vec<K>], zero: K, capacity: usize) -> SumStats {
    let mut map: HashMap<K, (u64, u64)> = HashMap::with_capacity(capacity);
    let mut pairs = 0u64;
    let mut first = None;
    walk_sums(spreads, zero, |k, idx| match map.entry(k.clone()) {
        Entry::Occupied(mut e) => {
            let (count, first_idx) = e.get_mut();
            pairs += *count;
            *count += 1;
            if first.is_none() {
                first = Some((*first_idx, idx));
            }
        }
        Entry::Vacant(e) => {
            e.insert((1, idx));
        }
    });
    SumStats {
        distinct: map.len() as u64,
        colliding_pairs: pairs,
        first_collision: first,
    }
}

pub(crate) fn sum_stats(sys: &CodeSystem, guard: u64) -> Result<SumStats> {
    let total = check_guard(sys, guard)?;
    let sp = Spreader::new(sys.d, sys.users());
    let cap = total.min(1 << 24) as usize;
    if sp.fits_u128() {
        let spreads: Vec<Vec<u128>> = sys
            .codes
            .iter()
            .map(|c| c.iter().map(|&w| sp.spread_u128(w)).collect())
            .collect();
        Ok(collect_stats(&spreads, 0u128, cap))
    } else {
        let spreads: Vec<Vec<Vec<u128>>> = sys
            .codes
            .iter()
            .map(|c| c.iter().map(|&w| sp.spread_limbs(w)).collect())
            .collect();
        Ok(collect_stats(&spreads, Vec::zero(sp.limbs()), cap))
    }
}

/// Brute-force unique-decodability check with the default guard.
pub fn verify_ud(sys: &CodeSystem) -> Result<UdReport> {
    verify_ud_with_guard(sys, DEFAULT_GUARD)
}

/// Enumerates all `Π|C_i|` tuples and counts distinct coordinate-wise sums.
pub fn verify_ud_with_guard(sys: &CodeSystem, guard: u64) -> Result<UdReport> {
    let stats = sum_stats(sys, guard)?;
    let total = sys.tuple_count();
    let witness = stats.first_collision.map(|(a, b)| {
        let first = tuple_at(sys, a);
        let second = tuple_at(sys, b);
        let sum = sum_vector(sys.d, &first);
        Witness { first, second, sum }
    });
    Ok(UdReport {
        is_ud: witness.is_none(),
        total_tuples: total,
        distinct_sums: BigUint::from(stats.distinct),
        witness,
    })
}

/// Complements the coordinates set in `mask`, in every constituent code.
pub fn negate_coords(sys: &CodeSystem, mask: Codeword) -> CodeSystem {
    let m = mask.0 & full_mask(sys.d);
    CodeSystem {
        d: sys.d,
        codes: sys.codes.iter().map(|c| c.iter().map(|&w| w ^ m).collect()).collect(),
    }
}

/// Moves coordinate `i` (bit `i`) to position `perm[i]` in every codeword.
pub fn permute_coords(sys: &CodeSystem, perm: &[usize]) -> Result<CodeSystem> {
    let d = sys.d as usize;
    if perm.len() != d {
        return Err(Error::InvalidPermutation(format!(
            "expected {d} entries, got {}",
            perm.len()
        )));
    }
    let mut seen = vec![false; d];
    for &p in perm {
        if p >= d || seen[p] {
            return Err(Error::InvalidPermutation(format!("{perm:?} is not a bijection")));
        }
        seen[p] = true;
    }
    let map = |w: u64| {
        perm.iter()
            .enumerate()
            .fold(0u64, |acc, (i, &p)| acc | (((w >> i) & 1) << p))
    };
    Ok(CodeSystem {
        d: sys.d,
        codes: sys.codes.iter().map(|c| c.iter().map(|&w| map(w)).collect()).collect(),
    })
}

/// One optimum of the negation search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormalizedCandidate {
    /// The negated and reindexed system; constituent 0 attains the minimum.
    pub system: CodeSystem,
    pub mask: u64,
    /// `order[k]` is the original index of the constituent now at position `k`.
    pub order: Vec<usize>,
    pub min_average: BigRational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Normalization {
    pub candidates: Vec<NormalizedCandidate>,
    /// Number of (mask, constituent) optima found, including any dropped by the cap.
    pub optima: usize,
    pub truncated: bool,
}

/// Finds every negation mask that minimises `min_i avg-weight(C_i ^ mask)`.
///
/// Each optimum is returned once per minimising constituent, that
/// constituent moved to the front and the others kept in order. Candidates
/// are sorted by mask, then by original index, and capped at
/// [`NORMALIZE_MAX_CANDIDATES`].
pub fn normalize_step1(sys: &CodeSystem) -> Result<Normalization> {
    if sys.d > NORMALIZE_MAX_DIM {
        return Err(Error::DimensionTooLarge {
            d: u64::from(sys.d),
            limit: u64::from(NORMALIZE_MAX_DIM),
        });
    }
    let d = sys.d as usize;
    // ones[i][k] = number of words of code i with coordinate k set
    let ones: Vec<Vec<u64>> = sys
        .codes
        .iter()
        .map(|c| {
            (0..d)
                .map(|k| c.iter().filter(|&&w| (w >> k) & 1 == 1).count() as u64)
                .collect()
        })
        .collect();
    let lens: Vec<u64> = sys.codes.iter().map(|c| c.len() as u64).collect();

    let mut best: Option<(u64, u64)> = None;
    let mut hits: Vec<(u64, usize)> = Vec::new();
    let mut optima = 0usize;
    for mask in 0..(1u64 << d) {
        let weights: Vec<u64> = ones
            .iter()
            .zip(&lens)
            .map(|(col, &len)| {
                col.iter()
                    .enumerate()
                    .map(|(k, &o)| if (mask >> k) & 1 == 1 { len - o } else { o })
                    .sum()
            })
            .collect();
        for (i, (&w, &len)) in weights.iter().zip(&lens).enumerate() {
            let ord = match best {
                None => std::cmp::Ordering::Less,
                Some((bw, bl)) => (u128::from(w) * u128::from(bl)).cmp(&(u128::from(bw) * u128::from(len))),
            };
            match ord {
                std::cmp::Ordering::Less => {
                    best = Some((w, len));
                    hits.clear();
                    optima = 0;
                    hits.push((mask, i));
                    optima += 1;
                }
                std::cmp::Ordering::Equal => {
                    optima += 1;
                    if hits.len() < NORMALIZE_MAX_CANDIDATES {
                        hits.push((mask, i));
                    }
                }
                std::cmp::Ordering::Greater => {}
            }
        }
    }
    let (bw, bl) = best.expect("at least one constituent");
    let min_average = BigRational::new(BigInt::from(bw), BigInt::from(bl));
    let t = sys.users();
    let candidates = hits
        .into_iter()
        .map(|(mask, lead)| {
            let order: Vec<usize> = std::iter::once(lead).chain((0..t).filter(|&j| j != lead)).collect();
            let system = negate_coords(sys, Codeword(mask)).reorder(&order).expect("valid order");
            NormalizedCandidate {
                system,
                mask,
                order,
                min_average: min_average.clone(),
            }
        })
        .collect::<Vec<_>>();
    Ok(Normalization {
        truncated: optima > candidates.len(),
        candidates,
        optima,
    })
}

/// `(1/d) log2 Π |C_i|`.
pub fn sum_rate_seed(sys: &CodeSystem) -> f64 {
    let sizes: Vec<BigUint> = sys.codes.iter().map(|c| BigUint::from(c.len())).collect();
    log2_product(sizes.iter()).expect("constituents are nonempty") / f64::from(sys.d)
}
