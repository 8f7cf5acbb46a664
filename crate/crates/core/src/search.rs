//! Exhaustive search over the tensor power `n` and band widths `g_i`.
//!
//! For each `n` the power spectra are advanced by one convolution and the
//! log-sizes of every band are tabulated once; the grid over `g` then only
//! adds table entries. The winning point is re-evaluated exactly.

use std::collections::BTreeSet;

use num_bigint::BigUint;
use num_traits::Zero;

use crate::code::{normalize_step1, CodeSystem, NormalizedCandidate};
use crate::error::{Error, Result};
use crate::glue::{improved_sizes, ConstructionResult, GlueParams, PoweredSystem};
use crate::log2::log2_big;
use crate::spectrum::{moments, spectrum, Moments, Powers, WeightDistribution};

/// Rates closer than this are treated as equal.
pub const TIE_TOLERANCE: f64 = 1e-12;

/// Search space over `n` and `g_2..g_T`.
///
/// Indices in `groups` and `zero_fixed` are zero based constituent indices,
/// so they range over `1..T`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchConfig {
    pub n_max: u64,
    /// Fixed cap for each `g_i` (length `T - 1`). When `None`, caps start at
    /// `ceil(3 σ_i √n)` and double whenever the per-`n` optimum touches them.
    pub g_max: Option<Vec<u64>>,
    /// Partition of `1..T`; members of a group share one `g` value.
    pub groups: Vec<Vec<usize>>,
    /// Indices whose `g` is pinned to 0.
    pub zero_fixed: BTreeSet<usize>,
}

impl SearchConfig {
    /// Every index free and independent.
    pub fn unconstrained(users: usize, n_max: u64) -> Self {
        SearchConfig {
            n_max,
            g_max: None,
            groups: (1..users).map(|i| vec![i]).collect(),
            zero_fixed: BTreeSet::new(),
        }
    }

    /// Groups and pins derived from the constituent spectra.
    pub fn from_symmetries(norm: &CodeSystem, n_max: u64) -> Self {
        let (groups, zero_fixed) = symmetry_groups(norm);
        SearchConfig {
            n_max,
            g_max: None,
            groups,
            zero_fixed,
        }
    }

    pub fn with_caps(mut self, caps: Vec<u64>) -> Self {
        self.g_max = Some(caps);
        self
    }

    fn validate(&self, users: usize) -> Result<()> {
        if self.n_max == 0 {
            return Err(Error::InvalidConfig("n_max must be at least 1".into()));
        }
        let mut seen = vec![false; users];
        for group in &self.groups {
            if group.is_empty() {
                return Err(Error::InvalidConfig("empty group".into()));
            }
            for &i in group {
                if i == 0 || i >= users || seen[i] {
                    return Err(Error::InvalidConfig(format!(
                        "groups must partition constituents 2..={users}"
                    )));
                }
                seen[i] = true;
            }
            let pinned = group.iter().filter(|i| self.zero_fixed.contains(i)).count();
            if pinned != 0 && pinned != group.len() {
                return Err(Error::InvalidConfig(format!(
                    "group {} is only partly pinned",
                    display_group(group)
                )));
            }
        }
        if seen.iter().skip(1).any(|s| !s) {
            return Err(Error::InvalidConfig(format!(
                "groups must partition constituents 2..={users}"
            )));
        }
        if let Some(&i) = self.zero_fixed.iter().find(|&&i| i == 0 || i >= users) {
            return Err(Error::InvalidConfig(format!("cannot pin constituent {}", i + 1)));
        }
        if let Some(caps) = &self.g_max {
            if caps.len() + 1 != users {
                return Err(Error::ParamCount {
                    expected: users - 1,
                    got: caps.len(),
                });
            }
        }
        Ok(())
    }
}

fn display_group(group: &[usize]) -> String {
    let parts: Vec<String> = group.iter().map(|i| (i + 1).to_string()).collect();
    format!("{{{}}}", parts.join(","))
}

/// Groups constituents `2..T` whose weight distributions are proportional
/// (same band fractions for every `n`, `g`), and pins those with zero
/// variance.
pub fn symmetry_groups(norm: &CodeSystem) -> (Vec<Vec<usize>>, BTreeSet<usize>) {
    let spectra: Vec<WeightDistribution> = (0..norm.users()).map(|i| spectrum(norm.code(i), norm.dim())).collect();
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut pinned = BTreeSet::new();
    for i in 1..norm.users() {
        let m: Moments<f64> = moments(&spectra[i]);
        if m.variance.is_zero() {
            pinned.insert(i);
        }
        match groups.iter_mut().find(|g| spectra[g[0]].proportional_to(&spectra[i])) {
            Some(g) => g.push(i),
            None => groups.push(vec![i]),
        }
    }
    (groups, pinned)
}

/// One evaluated parameter point.
#[derive(Debug, Clone, PartialEq)]
pub struct RatedPoint {
    pub params: GlueParams,
    pub rate: f64,
}

/// A per-`n` optimum that sat on a fixed cap.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CapHit {
    pub n: u64,
    pub index: usize,
    pub cap: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchOutcome {
    pub best: ConstructionResult,
    /// Number of `(n, g)` points evaluated, including re-runs after cap expansion.
    pub evaluated: u64,
    /// Other points within [`TIE_TOLERANCE`] of the best rate.
    pub ties: Vec<RatedPoint>,
    /// Points where a user-supplied cap may have hidden a better optimum.
    pub cap_hits: Vec<CapHit>,
    /// Largest cap used per index.
    pub max_caps: Vec<u64>,
}

/// Total order for equal rates: smaller `n`, then lexicographically smaller `g`.
fn precedes(a: &GlueParams, b: &GlueParams) -> bool {
    (a.n, &a.g) < (b.n, &b.g)
}

struct Frontier {
    best: f64,
    points: Vec<RatedPoint>,
}

impl Frontier {
    fn new() -> Self {
        Frontier {
            best: f64::NEG_INFINITY,
            points: Vec::new(),
        }
    }

    fn offer(&mut self, p: RatedPoint) {
        if p.rate > self.best + TIE_TOLERANCE {
            self.best = p.rate;
            let floor = p.rate - TIE_TOLERANCE;
            self.points.retain(|q| q.rate >= floor);
            self.points.push(p);
        } else if p.rate >= self.best - TIE_TOLERANCE {
            self.best = self.best.max(p.rate);
            self.points.push(p);
        }
    }

    /// Winner under the tie-break order plus the remaining ties.
    fn finish(mut self) -> Option<(RatedPoint, Vec<RatedPoint>)> {
        let floor = self.best - TIE_TOLERANCE;
        self.points.retain(|q| q.rate >= floor);
        let idx = (0..self.points.len()).reduce(|a, b| {
            if precedes(&self.points[b].params, &self.points[a].params) {
                b
            } else {
                a
            }
        })?;
        let win = self.points.swap_remove(idx);
        self.points
            .sort_by(|a, b| (a.params.n, &a.params.g).cmp(&(b.params.n, &b.params.g)));
        Some((win, self.points))
    }
}

fn log2_or_neg_inf(x: &BigUint) -> f64 {
    if x.is_zero() {
        f64::NEG_INFINITY
    } else {
        log2_big(x).expect("positive")
    }
}

fn check_seed(norm: &CodeSystem) -> Result<()> {
    let twice = 2 * norm.total_weight(0);
    let scaled = u64::from(norm.dim()) * norm.code(0).len() as u64;
    match twice.cmp(&scaled) {
        std::cmp::Ordering::Equal => Err(Error::BalancedSeed),
        std::cmp::Ordering::Greater => Err(Error::NotNormalized),
        std::cmp::Ordering::Less => Ok(()),
    }
}

/// Exhaustive search with no progress reporting.
pub fn search(norm: &CodeSystem, config: &SearchConfig) -> Result<SearchOutcome> {
    search_with_progress(norm, config, |_, _| {})
}

/// Exhaustive search; `progress(n, best_rate_so_far)` runs after each `n`.
pub fn search_with_progress(
    norm: &CodeSystem,
    config: &SearchConfig,
    mut progress: impl FnMut(u64, f64),
) -> Result<SearchOutcome> {
    let users = norm.users();
    config.validate(users)?;
    check_seed(norm)?;
    let d = norm.dim();
    let spectra: Vec<WeightDistribution> = (0..users).map(|i| spectrum(norm.code(i), d)).collect();
    let sigmas: Vec<f64> = spectra.iter().map(|s| moments::<f64>(s).sigma()).collect();
    let free: Vec<&Vec<usize>> = config
        .groups
        .iter()
        .filter(|g| !config.zero_fixed.contains(&g[0]))
        .collect();
    let pinned: Vec<usize> = config.zero_fixed.iter().copied().collect();

    let mut powers: Vec<Powers> = spectra.iter().map(Powers::new).collect();
    let mut frontier = Frontier::new();
    let mut evaluated = 0u64;
    let mut cap_hits = Vec::new();
    let mut max_caps = vec![0u64; users - 1];

    for n in 1..=config.n_max {
        let current: Vec<WeightDistribution> = powers
            .iter_mut()
            .map(|p| p.next().expect("powers are infinite"))
            .collect();
        let ps = PoweredSystem::from_powers(norm, n, &current);
        let dim = ps.dim();
        // no band or window changes once g exceeds dn
        let limit = dim;
        let mut caps: Vec<u64> = free
            .iter()
            .map(|g| match &config.g_max {
                Some(c) => g.iter().map(|&i| c[i - 1]).min().expect("nonempty group"),
                None => ((3.0 * sigmas[g[0]] * (n as f64).sqrt()).ceil() as u64).min(limit),
            })
            .collect();
        let pinned_log: f64 = pinned.iter().map(|&i| log2_or_neg_inf(&ps.band_size(i, 0))).sum();

        let local = loop {
            let tables: Vec<Vec<f64>> = free
                .iter()
                .zip(&caps)
                .map(|(g, &cap)| {
                    (0..=cap)
                        .map(|gv| g.iter().map(|&i| log2_or_neg_inf(&ps.band_size(i, gv))).sum())
                        .collect()
                })
                .collect();
            let widths: Vec<u64> = free.iter().map(|g| g.len() as u64).collect();
            let g_top: u64 = caps.iter().zip(&widths).map(|(c, w)| c * w).sum();
            let first_log: Vec<f64> = (0..=g_top)
                .map(|gt| {
                    let (a, b) = ps.glued_sizes(gt);
                    log2_or_neg_inf(&(a + b))
                })
                .collect();

            let mut local = Frontier::new();
            let mut local_arg: Option<(f64, Vec<u64>)> = None;
            let mut choice = vec![0u64; free.len()];
            loop {
                evaluated += 1;
                let gt: u64 = choice.iter().zip(&widths).map(|(c, w)| c * w).sum();
                let mut total = first_log[gt as usize] + pinned_log;
                for (t, &c) in tables.iter().zip(&choice) {
                    total += t[c as usize];
                }
                if total.is_finite() {
                    let rate = total / dim as f64;
                    let mut g = vec![0u64; users - 1];
                    for (grp, &c) in free.iter().zip(&choice) {
                        for &i in grp.iter() {
                            g[i - 1] = c;
                        }
                    }
                    let better = match &local_arg {
                        None => true,
                        Some((r, _)) => rate > *r + TIE_TOLERANCE,
                    };
                    if better {
                        local_arg = Some((rate, choice.clone()));
                    }
                    local.offer(RatedPoint {
                        params: GlueParams::new(n, g),
                        rate,
                    });
                }
                // odometer
                let mut k = 0;
                loop {
                    if k == choice.len() {
                        break;
                    }
                    if choice[k] < caps[k] {
                        choice[k] += 1;
                        break;
                    }
                    choice[k] = 0;
                    k += 1;
                }
                if k == choice.len() {
                    break;
                }
            }

            let Some((_, arg)) = local_arg else {
                break local;
            };
            let mut expanded = false;
            for (j, (&a, cap)) in arg.iter().zip(caps.iter_mut()).enumerate() {
                if a == *cap && a > 0 {
                    if config.g_max.is_some() || *cap >= limit {
                        for &i in free[j].iter() {
                            cap_hits.push(CapHit { n, index: i, cap: *cap });
                        }
                    } else {
                        *cap = (*cap * 2).min(limit);
                        expanded = true;
                    }
                }
            }
            if !expanded {
                break local;
            }
            cap_hits.retain(|h| h.n != n);
        };
        for (grp, &c) in free.iter().zip(&caps) {
            for &i in grp.iter() {
                max_caps[i - 1] = max_caps[i - 1].max(c);
            }
        }
        for p in local.points {
            frontier.offer(p);
        }
        progress(n, frontier.best);
    }

    let (win, ties) = frontier.finish().ok_or(Error::NoAdmissiblePoint)?;
    let best = improved_sizes(norm, &win.params)?;
    Ok(SearchOutcome {
        best,
        evaluated,
        ties,
        cap_hits,
        max_caps,
    })
}

/// Search result for one Step-1 normalization candidate.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateOutcome {
    pub candidate: NormalizedCandidate,
    pub outcome: SearchOutcome,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedSearch {
    /// Index into `candidates` of the overall winner.
    pub winner: usize,
    pub candidates: Vec<CandidateOutcome>,
    /// True when the candidate list was capped.
    pub truncated: bool,
}

impl NormalizedSearch {
    pub fn best(&self) -> &CandidateOutcome {
        &self.candidates[self.winner]
    }
}

/// Normalizes `sys` every optimal way and searches each candidate with its
/// own symmetry constraints; the highest rate wins, earlier candidates
/// winning ties.
pub fn search_all_normalizations(
    sys: &CodeSystem,
    n_max: u64,
    g_max: Option<u64>,
    mut progress: impl FnMut(usize, u64, f64),
) -> Result<NormalizedSearch> {
    let norm = normalize_step1(sys)?;
    let mut candidates = Vec::with_capacity(norm.candidates.len());
    let mut winner: Option<(usize, f64)> = None;
    let mut last_err = None;
    for (k, cand) in norm.candidates.into_iter().enumerate() {
        let mut config = SearchConfig::from_symmetries(&cand.system, n_max);
        if let Some(cap) = g_max {
            config.g_max = Some(vec![cap; sys.users() - 1]);
        }
        match search_with_progress(&cand.system, &config, |n, r| progress(k, n, r)) {
            Ok(outcome) => {
                let rate = outcome.best.rate;
                let idx = candidates.len();
                if winner.is_none_or(|(_, r)| rate > r + TIE_TOLERANCE) {
                    winner = Some((idx, rate));
                }
                candidates.push(CandidateOutcome {
                    candidate: cand,
                    outcome,
                });
            }
            Err(e) => last_err = Some(e),
        }
    }
    match winner {
        Some((w, _)) => Ok(NormalizedSearch {
            winner: w,
            candidates,
            truncated: norm.truncated,
        }),
        None => Err(last_err.unwrap_or(Error::NoAdmissiblePoint)),
    }
}

/// Rate at a single point, `None` when some constituent is empty.
pub fn rate_at(norm: &CodeSystem, params: &GlueParams) -> Option<f64> {
    improved_sizes(norm, params).ok().map(|r| r.rate)
}
