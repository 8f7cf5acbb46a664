use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};
use proptest::prelude::*;
use proptest::sample::subsequence;

use udcodes::bounds::{lemma1_one_sided, lemma1_two_sided, theorem1_params, upper_bound};
use udcodes::catalog;
use udcodes::code::sum_vector;
use udcodes::discovery::conflict_count;
use udcodes::glue::log2_product;
use udcodes::io::{parse_code_record, serialize_code_file};
use udcodes::search::{rate_at, search, SearchConfig};
use udcodes::spectrum::convolve;
use udcodes::{
    improved_sizes, moments, negate_coords, normalize_step1, permute_coords, power, reflect, spectrum, sum_rate_seed,
    verify_ud, CodeSystem, Codeword, GlueParams, Moments64, WeightDistribution,
};

fn rat(n: u64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn small_system() -> impl Strategy<Value = CodeSystem> {
    (1u32..=4, 1usize..=3).prop_flat_map(|(d, t)| {
        let words: Vec<u64> = (0..1u64 << d).collect();
        let len = words.len();
        prop::collection::vec(subsequence(words, 1..=len), t)
            .prop_map(move |codes| CodeSystem::new(d, codes).expect("valid"))
    })
}

fn small_code() -> impl Strategy<Value = (u32, Vec<u64>)> {
    (1u32..=4).prop_flat_map(|d| {
        let words: Vec<u64> = (0..1u64 << d).collect();
        let len = words.len().min(6);
        subsequence(words, 1..=len).prop_map(move |c| (d, c))
    })
}

fn distribution() -> impl Strategy<Value = WeightDistribution> {
    prop::collection::vec(0u64..6, 1..7)
        .prop_filter("nonempty", |c| c.iter().any(|&x| x > 0))
        .prop_map(|c| WeightDistribution::from_counts(c.into_iter().map(BigUint::from).collect()))
}

fn permutation(d: usize) -> impl Strategy<Value = Vec<usize>> {
    Just((0..d).collect::<Vec<_>>()).prop_shuffle()
}

fn catalog_transform() -> impl Strategy<Value = (CodeSystem, u64, Vec<usize>)> {
    let systems: Vec<CodeSystem> = catalog::all().into_iter().map(|e| e.system).collect();
    prop::sample::select(systems).prop_flat_map(|sys| {
        let d = sys.dim();
        (Just(sys), 0..1u64 << d, permutation(d as usize))
    })
}

/// Weights of every concatenation of `n` words of `code`.
fn enumerated_weights(code: &[u64], n: u32) -> Vec<u64> {
    let mut out = vec![0u64];
    for _ in 0..n {
        out = out
            .iter()
            .flat_map(|w| code.iter().map(move |c| w + u64::from(c.count_ones())))
            .collect();
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn ud_and_rate_invariant_under_equivalence((sys, mask, perm) in catalog_transform()) {
        let moved = permute_coords(&negate_coords(&sys, Codeword(mask)), &perm).unwrap();
        prop_assert!(verify_ud(&moved).unwrap().is_ud);
        prop_assert_eq!(sum_rate_seed(&moved), sum_rate_seed(&sys));
    }
}

proptest! {
    #[test]
    fn distinct_sums_bound(sys in small_system()) {
        let r = verify_ud(&sys).unwrap();
        prop_assert!(r.distinct_sums <= r.total_tuples);
        prop_assert_eq!(r.is_ud, r.distinct_sums == r.total_tuples);
        prop_assert_eq!(r.is_ud, r.witness.is_none());
        if let Some(w) = r.witness {
            prop_assert_ne!(&w.first, &w.second);
            prop_assert_eq!(sum_vector(sys.dim(), &w.first), w.sum.clone());
            prop_assert_eq!(sum_vector(sys.dim(), &w.second), w.sum);
        }
    }

    #[test]
    fn negation_is_involution(sys in small_system(), mask in any::<u64>()) {
        let m = Codeword(mask & ((1 << sys.dim()) - 1));
        prop_assert_eq!(negate_coords(&negate_coords(&sys, m), m), sys);
    }

    #[test]
    fn permutations_compose(sys in small_system(), seed in any::<u64>()) {
        let d = sys.dim() as usize;
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(seed);
        let mut p: Vec<usize> = (0..d).collect();
        let mut q: Vec<usize> = (0..d).collect();
        rand::seq::SliceRandom::shuffle(p.as_mut_slice(), &mut rng);
        rand::seq::SliceRandom::shuffle(q.as_mut_slice(), &mut rng);
        let qp: Vec<usize> = p.iter().map(|&i| q[i]).collect();
        let twice = permute_coords(&permute_coords(&sys, &p).unwrap(), &q).unwrap();
        prop_assert_eq!(twice, permute_coords(&sys, &qp).unwrap());
        let identity: Vec<usize> = (0..d).collect();
        prop_assert_eq!(permute_coords(&sys, &identity).unwrap(), sys);
    }

    #[test]
    fn normalization_preserves_equivalence(sys in small_system()) {
        let ud = verify_ud(&sys).unwrap().is_ud;
        let norm = normalize_step1(&sys).unwrap();
        prop_assert!(!norm.candidates.is_empty());
        for c in &norm.candidates {
            let back = negate_coords(&c.system, Codeword(c.mask));
            for (k, &orig) in c.order.iter().enumerate() {
                prop_assert_eq!(back.code(k), sys.code(orig));
            }
            prop_assert_eq!(verify_ud(&c.system).unwrap().is_ud, ud);
            prop_assert!((sum_rate_seed(&c.system) - sum_rate_seed(&sys)).abs() < 1e-12);
            prop_assert_eq!(c.system.average_weight(0), c.min_average.clone());
            for i in 0..c.system.users() {
                prop_assert!(c.system.average_weight(i) >= c.min_average);
            }
        }
    }

    #[test]
    fn conflict_count_matches_pairs(sys in small_system()) {
        let mut tuples: Vec<Vec<u64>> = vec![vec![]];
        for c in sys.codes() {
            tuples = tuples.iter().flat_map(|t| c.iter().map(move |&w| [t.as_slice(), &[w]].concat())).collect();
        }
        let sums: Vec<Vec<u32>> = tuples.iter().map(|t| sum_vector(sys.dim(), t)).collect();
        let mut pairs = 0u64;
        for a in 0..sums.len() {
            for b in a + 1..sums.len() {
                pairs += u64::from(sums[a] == sums[b]);
            }
        }
        let count = conflict_count(&sys).unwrap();
        prop_assert_eq!(count, pairs);
        let r = verify_ud(&sys).unwrap();
        let excess = (&r.total_tuples - &r.distinct_sums).to_u64().unwrap();
        prop_assert!(count >= excess);
        prop_assert_eq!(count == 0, r.is_ud);
    }

    #[test]
    fn power_identities(dist in distribution(), n in 1u64..=10) {
        let p = power(&dist, n).unwrap();
        prop_assert_eq!(p.total(), dist.total().pow(n as u32));
        let base: Moments64 = moments(&dist);
        let m: Moments64 = moments(&p);
        prop_assert_eq!(m.mean, &base.mean * rat(n));
        prop_assert_eq!(m.variance, &base.variance * rat(n));
    }

    #[test]
    fn power_is_additive(dist in distribution(), a in 1u64..=5, b in 1u64..=5) {
        let lhs = power(&dist, a + b).unwrap();
        prop_assert_eq!(lhs, convolve(&power(&dist, a).unwrap(), &power(&dist, b).unwrap()));
    }

    #[test]
    fn reflection(dist in distribution()) {
        let r = reflect(&dist);
        prop_assert_eq!(r.total(), dist.total());
        prop_assert_eq!(r.mean(), rat(dist.span()) - dist.mean());
        prop_assert_eq!(reflect(&r), dist);
    }

    #[test]
    fn moments_match_enumeration((d, code) in small_code(), n in 1u32..=3) {
        let ws = enumerated_weights(&code, n);
        let count = rat(ws.len() as u64);
        let mean = ws.iter().map(|&w| rat(w)).sum::<BigRational>() / &count;
        let dev = |w: u64| rat(w) - &mean;
        let var = ws.iter().map(|&w| dev(w) * dev(w)).sum::<BigRational>() / &count;
        let third = ws.iter().map(|&w| { let x = dev(w).abs(); &x * &x * &x }).sum::<BigRational>() / &count;
        let m: Moments64 = moments(&power(&spectrum(&code, d), u64::from(n)).unwrap());
        prop_assert_eq!(m.mean, mean);
        prop_assert_eq!(m.variance, var);
        prop_assert_eq!(m.abs_third, third);
    }

    #[test]
    fn lemma_bounds_ordered(dist in distribution(), n in 1u64..=50, t in 0.01f64..40.0) {
        let m: Moments64 = moments(&dist);
        prop_assume!(m.rho3.is_some());
        let two = lemma1_two_sided(&m, n, t).unwrap();
        let one = lemma1_one_sided(&m, n, t).unwrap();
        prop_assert!(two <= 1.0 && one <= 1.0);
        prop_assert!(one >= two);
    }
}

fn entry_systems() -> Vec<(String, CodeSystem, GlueParams)> {
    catalog::all()
        .into_iter()
        .filter_map(|e| e.expected.map(|x| (e.name.to_string(), e.system, x.params)))
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn construction_sizes(k in 0usize..7, n in 1u64..40, g0 in 0u64..30, bump in 1u64..5, idx in 0usize..7) {
        let (_, sys, _) = &entry_systems()[k];
        let t = sys.users();
        let mut g = vec![g0; t - 1];
        let i = idx % (t - 1);
        let Ok(res) = improved_sizes(sys, &GlueParams::new(n, g.clone())) else {
            return Ok(());
        };
        let rate = log2_product(res.sizes.iter()).unwrap() / res.dim as f64;
        prop_assert!((rate - res.rate).abs() < 1e-12);
        let full = BigUint::from(sys.code(0).len()).pow(n as u32);
        prop_assert!(res.a_size <= full && res.b_size <= full);
        prop_assert_eq!(&res.sizes[0], &(&res.a_size + &res.b_size));

        g[i] += bump;
        let more = match improved_sizes(sys, &GlueParams::new(n, g)) {
            Ok(m) => m,
            // the first constituent shrank to nothing, which is still monotone
            Err(udcodes::Error::EmptyConstituent { index: 0 }) => return Ok(()),
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        };
        prop_assert!(more.sizes[i + 1] >= res.sizes[i + 1]);
        prop_assert!(more.a_size <= res.a_size);
        prop_assert!(more.b_size <= res.b_size);
    }
}

#[test]
fn catalog_round_trip() {
    for e in catalog::all() {
        let text = serialize_code_file(&e.system, Some(e.name));
        let back = parse_code_record(&text).unwrap();
        assert_eq!(back.system, e.system);
        assert_eq!(back.name.as_deref(), Some(e.name));
    }
}

#[test]
fn upper_bound_increasing_and_above_search() {
    for t in 1..16 {
        assert!(upper_bound::<f64>(t + 1) > upper_bound::<f64>(t));
    }
    for (name, sys, params) in entry_systems() {
        let r = improved_sizes(&sys, &params).unwrap();
        assert!(r.rate <= upper_bound::<f64>(sys.users() as u32), "{name}");
    }
}

#[test]
fn kappa_dominates_alpha_sigma() {
    for (name, sys, _) in entry_systems() {
        let tp = theorem1_params::<f64>(&sys).unwrap();
        if let Some(alpha) = tp.alpha {
            let sum: f64 = tp.sigma[1..].iter().sum();
            assert!(tp.kappa.to_f64().unwrap() + 1e-12 >= alpha * sum, "{name}");
        }
    }
}

#[test]
fn search_is_deterministic_and_dominates_samples() {
    let sys = catalog::catalog_get("T3").unwrap().system;
    let config = SearchConfig::from_symmetries(&sys, 30);
    let a = search(&sys, &config).unwrap();
    let b = search(&sys, &config).unwrap();
    assert_eq!(a.best.params, b.best.params);
    assert_eq!(a.evaluated, b.evaluated);

    let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(5);
    for _ in 0..100 {
        let n = rand::Rng::gen_range(&mut rng, 1..=30);
        let g = (0..2).map(|_| rand::Rng::gen_range(&mut rng, 0..=20)).collect();
        if let Some(r) = rate_at(&sys, &GlueParams::new(n, g)) {
            assert!(r <= a.best.rate + 1e-12);
        }
    }
}

#[test]
fn restricting_groups_never_helps() {
    for name in ["T3", "T6-KM"] {
        let sys = catalog::catalog_get(name).unwrap().system;
        let free = search(&sys, &SearchConfig::unconstrained(sys.users(), 12)).unwrap();
        let tied = search(&sys, &SearchConfig::from_symmetries(&sys, 12)).unwrap();
        assert!(tied.best.rate <= free.best.rate + 1e-12, "{name}");
        let mut pinned = SearchConfig::unconstrained(sys.users(), 12);
        pinned.groups = vec![(1..sys.users()).collect()];
        let one = search(&sys, &pinned).unwrap();
        assert!(one.best.rate <= free.best.rate + 1e-12, "{name}");
    }
}
