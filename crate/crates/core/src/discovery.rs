//! Tabu search for uniquely decodable systems of a given shape.
//!
//! The objective is the number of colliding tuple pairs. A move replaces one
//! codeword of one constituent by a word that constituent does not use.
//! After a move both the removed and the inserted `(constituent, word)` pair
//! stay tabu for `tenure` iterations; a tabu move is still taken when it
//! beats the best objective seen. After `restart_after` moves without a new
//! best the search restarts from a fresh random system.

use std::collections::HashMap;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::code::{sum_stats, CodeSystem, Spreader, DEFAULT_GUARD};
use crate::error::{Error, Result};

/// Largest dimension the neighbourhood scan supports.
pub const DISCOVERY_MAX_DIM: u32 = 16;

/// Number of unordered pairs of distinct tuples with equal sums.
pub fn conflict_count(sys: &CodeSystem) -> Result<u64> {
    Ok(sum_stats(sys, DEFAULT_GUARD)?.colliding_pairs)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiscoverySpec {
    pub d: u32,
    pub sizes: Vec<usize>,
    /// Maximum number of moves.
    pub budget: u64,
    pub tenure: u64,
    pub restart_after: u64,
    pub seed: u64,
}

impl DiscoverySpec {
    pub fn new(d: u32, sizes: Vec<usize>) -> Self {
        DiscoverySpec {
            d,
            sizes,
            budget: 100_000,
            tenure: 8,
            restart_after: 2000,
            seed: 0,
        }
    }

    pub fn budget(mut self, budget: u64) -> Self {
        self.budget = budget;
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn tenure(mut self, tenure: u64) -> Self {
        self.tenure = tenure;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DiscoveryOutcome {
    Found {
        system: CodeSystem,
        iterations: u64,
        restarts: u64,
    },
    Failed {
        best_conflicts: u64,
        best: CodeSystem,
        iterations: u64,
        restarts: u64,
    },
}

impl DiscoveryOutcome {
    pub fn system(&self) -> Option<&CodeSystem> {
        match self {
            DiscoveryOutcome::Found { system, .. } => Some(system),
            DiscoveryOutcome::Failed { .. } => None,
        }
    }
}

/// Sum multiplicities, dense when the packed key space is small.
struct Multiplicities {
    dense: Option<Vec<u32>>,
    sparse: HashMap<u128, u32>,
}

impl Multiplicities {
    fn new(key_bits: u32) -> Self {
        Multiplicities {
            dense: (key_bits <= 24).then(|| vec![0; 1usize << key_bits]),
            sparse: HashMap::new(),
        }
    }

    /// Increments and returns the previous count.
    fn inc(&mut self, k: u128) -> u32 {
        match &mut self.dense {
            Some(v) => {
                let slot = &mut v[k as usize];
                *slot += 1;
                *slot - 1
            }
            None => {
                let slot = self.sparse.entry(k).or_insert(0);
                *slot += 1;
                *slot - 1
            }
        }
    }

    /// Decrements and returns the new count.
    fn dec(&mut self, k: u128) -> u32 {
        match &mut self.dense {
            Some(v) => {
                v[k as usize] -= 1;
                v[k as usize]
            }
            None => {
                let slot = self.sparse.get_mut(&k).expect("present");
                *slot -= 1;
                *slot
            }
        }
    }
}

struct State {
    spreader: Spreader,
    codes: Vec<Vec<u64>>,
    used: Vec<Vec<bool>>,
    mult: Multiplicities,
    conflicts: u64,
}

impl State {
    fn random(spec: &DiscoverySpec, rng: &mut ChaCha8Rng) -> Self {
        let space = 1usize << spec.d;
        let codes: Vec<Vec<u64>> = spec
            .sizes
            .iter()
            .map(|&s| sample(rng, space, s).into_iter().map(|w| w as u64).collect())
            .collect();
        let mut used = vec![vec![false; space]; codes.len()];
        for (u, c) in used.iter_mut().zip(&codes) {
            for &w in c {
                u[w as usize] = true;
            }
        }
        let spreader = Spreader::new(spec.d, codes.len());
        let bits = crate::code::coord_bits(codes.len()).max(1) * spec.d;
        let mut state = State {
            spreader,
            codes,
            used,
            mult: Multiplicities::new(bits),
            conflicts: 0,
        };
        for s in state.partial_sums(None) {
            state.conflicts += u64::from(state.mult.inc(s));
        }
        state
    }

    /// Packed sums over all constituents except `skip`, with repetition.
    fn partial_sums(&self, skip: Option<usize>) -> Vec<u128> {
        let mut acc = vec![0u128];
        for (i, c) in self.codes.iter().enumerate() {
            if Some(i) == skip {
                continue;
            }
            let spread: Vec<u128> = c.iter().map(|&w| self.spreader.spread_u128(w)).collect();
            acc = acc.iter().flat_map(|a| spread.iter().map(move |s| a + s)).collect();
        }
        acc
    }

    fn remove(&mut self, rest: &[u128], word: u64) {
        let s = self.spreader.spread_u128(word);
        for r in rest {
            self.conflicts -= u64::from(self.mult.dec(s + r));
        }
    }

    fn insert(&mut self, rest: &[u128], word: u64) {
        let s = self.spreader.spread_u128(word);
        for r in rest {
            self.conflicts += u64::from(self.mult.inc(s + r));
        }
    }

    fn system(&self, d: u32) -> CodeSystem {
        sorted_system(d, self.codes.clone())
    }
}

fn sorted_system(d: u32, mut codes: Vec<Vec<u64>>) -> CodeSystem {
    for c in &mut codes {
        c.sort_unstable();
    }
    CodeSystem::new(d, codes).expect("search state is a valid system")
}

fn validate(spec: &DiscoverySpec) -> Result<()> {
    if spec.d == 0 || spec.d > 64 {
        return Err(Error::InvalidDimension(spec.d));
    }
    if spec.d > DISCOVERY_MAX_DIM {
        return Err(Error::DimensionTooLarge {
            d: u64::from(spec.d),
            limit: u64::from(DISCOVERY_MAX_DIM),
        });
    }
    if spec.sizes.is_empty() {
        return Err(Error::InvalidSizes("no constituents".into()));
    }
    let space = 1u64 << spec.d;
    if let Some(&s) = spec.sizes.iter().find(|&&s| s == 0 || s as u64 > space) {
        return Err(Error::InvalidSizes(format!("size {s} outside 1..={space}")));
    }
    let product = spec
        .sizes
        .iter()
        .try_fold(1u64, |acc, &s| acc.checked_mul(s as u64))
        .filter(|&p| p <= DEFAULT_GUARD);
    if product.is_none() {
        return Err(Error::GuardExceeded {
            needed: spec.sizes.iter().map(|s| s.to_string()).collect::<Vec<_>>().join("*"),
            limit: DEFAULT_GUARD,
        });
    }
    if !Spreader::new(spec.d, spec.sizes.len()).fits_u128() {
        return Err(Error::DimensionTooLarge {
            d: u64::from(spec.d),
            limit: u64::from(DISCOVERY_MAX_DIM),
        });
    }
    Ok(())
}

struct Move {
    code: usize,
    slot: usize,
    word: u64,
    conflicts: u64,
}

pub fn tabu_search(spec: &DiscoverySpec) -> Result<DiscoveryOutcome> {
    validate(spec)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut state = State::random(spec, &mut rng);
    let mut best_conflicts = state.conflicts;
    let mut best_codes = state.codes.clone();
    let mut restart_best = state.conflicts;
    let mut stale = 0u64;
    let mut restarts = 0u64;
    let mut tabu: HashMap<(usize, u64), u64> = HashMap::new();
    let space = 1u64 << spec.d;

    for iter in 0..spec.budget {
        if state.conflicts == 0 {
            return Ok(DiscoveryOutcome::Found {
                system: state.system(spec.d),
                iterations: iter,
                restarts,
            });
        }
        let is_tabu = |tabu: &HashMap<(usize, u64), u64>, key: (usize, u64)| tabu.get(&key).is_some_and(|&e| e > iter);

        let mut chosen: Option<Move> = None;
        let mut ties = 0u32;
        for i in 0..state.codes.len() {
            if state.codes[i].len() as u64 == space {
                continue;
            }
            let rest = state.partial_sums(Some(i));
            for j in 0..state.codes[i].len() {
                let old = state.codes[i][j];
                state.remove(&rest, old);
                let old_tabu = is_tabu(&tabu, (i, old));
                for w in 0..space {
                    if state.used[i][w as usize] {
                        continue;
                    }
                    state.insert(&rest, w);
                    let c = state.conflicts;
                    state.remove(&rest, w);
                    let aspirated = c < best_conflicts;
                    if (old_tabu || is_tabu(&tabu, (i, w))) && !aspirated {
                        continue;
                    }
                    let take = match &chosen {
                        None => true,
                        Some(m) if c < m.conflicts => true,
                        Some(m) if c == m.conflicts => {
                            ties += 1;
                            rng.gen_range(0..=ties) == 0
                        }
                        Some(_) => false,
                    };
                    if take {
                        if chosen.as_ref().is_none_or(|m| c < m.conflicts) {
                            ties = 0;
                        }
                        chosen = Some(Move {
                            code: i,
                            slot: j,
                            word: w,
                            conflicts: c,
                        });
                    }
                }
                state.insert(&rest, old);
            }
        }

        let Some(mv) = chosen else {
            // every constituent is the full cube, or all moves are tabu
            if state.codes.iter().all(|c| c.len() as u64 == space) {
                break;
            }
            tabu.clear();
            continue;
        };
        let rest = state.partial_sums(Some(mv.code));
        let old = state.codes[mv.code][mv.slot];
        state.remove(&rest, old);
        state.insert(&rest, mv.word);
        state.codes[mv.code][mv.slot] = mv.word;
        state.used[mv.code][old as usize] = false;
        state.used[mv.code][mv.word as usize] = true;
        tabu.insert((mv.code, old), iter + 1 + spec.tenure);
        tabu.insert((mv.code, mv.word), iter + 1 + spec.tenure);
        debug_assert_eq!(state.conflicts, mv.conflicts);

        if state.conflicts < best_conflicts {
            best_conflicts = state.conflicts;
            best_codes = state.codes.clone();
        }
        if state.conflicts < restart_best {
            restart_best = state.conflicts;
            stale = 0;
        } else {
            stale += 1;
        }
        if stale >= spec.restart_after && state.conflicts > 0 {
            state = State::random(spec, &mut rng);
            restart_best = state.conflicts;
            stale = 0;
            restarts += 1;
            tabu.clear();
            if state.conflicts < best_conflicts {
                best_conflicts = state.conflicts;
                best_codes = state.codes.clone();
            }
        }
    }
    if state.conflicts == 0 {
        return Ok(DiscoveryOutcome::Found {
            system: state.system(spec.d),
            iterations: spec.budget,
            restarts,
        });
    }
    Ok(DiscoveryOutcome::Failed {
        best_conflicts,
        best: sorted_system(spec.d, best_codes),
        iterations: spec.budget,
        restarts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code::verify_ud;

    /// Pair count straight from the definition.
    fn pairs_by_definition(sys: &CodeSystem) -> u64 {
        let mut tuples: Vec<Vec<u64>> = vec![vec![]];
        for c in sys.codes() {
            tuples = tuples
                .iter()
                .flat_map(|t| c.iter().map(move |&w| [t.clone(), vec![w]].concat()))
                .collect();
        }
        let sums: Vec<Vec<u32>> = tuples.iter().map(|t| crate::code::sum_vector(sys.dim(), t)).collect();
        let mut count = 0;
        for a in 0..sums.len() {
            for b in a + 1..sums.len() {
                if sums[a] == sums[b] {
                    count += 1;
                }
            }
        }
        count
    }

    #[test]
    fn conflict_examples() {
        let l = CodeSystem::new(2, vec![vec![1, 2, 3], vec![0, 3]]).unwrap();
        assert_eq!(conflict_count(&l).unwrap(), 0);
        let s = CodeSystem::new(1, vec![vec![0, 1], vec![0, 1]]).unwrap();
        assert_eq!(conflict_count(&s).unwrap(), 1);
        let cube = CodeSystem::new(2, vec![vec![0, 1, 2, 3], vec![0, 1, 2, 3]]).unwrap();
        assert_eq!(pairs_by_definition(&cube), 10);
        assert_eq!(conflict_count(&cube).unwrap(), 10);
    }

    #[test]
    fn finds_lindstrom_shape() {
        let out = tabu_search(&DiscoverySpec::new(2, vec![3, 2]).budget(10_000).seed(1)).unwrap();
        let sys = out.system().expect("found");
        assert!(verify_ud(sys).unwrap().is_ud);
        assert_eq!(sys.sizes(), vec![3, 2]);
    }

    #[test]
    fn fixed_seed_is_deterministic() {
        let spec = DiscoverySpec::new(3, vec![4, 3, 2]).budget(2000).seed(7);
        assert_eq!(tabu_search(&spec).unwrap(), tabu_search(&spec).unwrap());
    }

    #[test]
    fn full_cube_cannot_be_extended() {
        for d in 1..=2 {
            let out = tabu_search(&DiscoverySpec::new(d, vec![1 << d, 2]).budget(300)).unwrap();
            match out {
                DiscoveryOutcome::Failed { best_conflicts, .. } => assert!(best_conflicts > 0),
                DiscoveryOutcome::Found { .. } => panic!("d={d} cannot succeed"),
            }
        }
    }

    #[test]
    fn invalid_specs() {
        assert!(matches!(
            tabu_search(&DiscoverySpec::new(2, vec![5, 1])),
            Err(Error::InvalidSizes(_))
        ));
        assert!(matches!(
            tabu_search(&DiscoverySpec::new(2, vec![])),
            Err(Error::InvalidSizes(_))
        ));
        assert!(matches!(
            tabu_search(&DiscoverySpec::new(17, vec![2])),
            Err(Error::DimensionTooLarge { .. })
        ));
        assert!(matches!(
            tabu_search(&DiscoverySpec::new(16, vec![65536, 65536])),
            Err(Error::GuardExceeded { .. })
        ));
    }
}
