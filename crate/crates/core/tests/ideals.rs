use std::collections::HashSet;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use utri::ideals::{
    centralizer, correspondence_check, group_maximality_oracle, is_abelian, is_lie_ideal, is_normal_subgroup,
    lemma1_suite, mab2, mab3, mab_enumerate, mab_family8, maximality_oracle, partition, Verdict,
    DEFAULT_COSET_BOUND,
};
use utri::{Fe, Field, IdealDesc, IdealError, Nt, NtMat, Subspace};

fn nt(d: usize, p: u32, k: u32) -> Nt {
    Nt::new(d, Field::new(p, k).unwrap()).unwrap()
}

#[test]
fn gamma_is_a_sum_of_partitions() {
    for (d, p, k) in [(5, 2, 1), (6, 3, 1), (7, 2, 2), (8, 5, 1)] {
        let a = nt(d, p, k);
        for g in 1..d {
            let sum = (1..=d - g)
                .map(|m| partition(&a, g + m, m).unwrap().space().clone())
                .fold(Subspace::zero(a.field().p(), a.prime_dim()), |acc, s| acc.sum(&s));
            assert_eq!(&sum, IdealDesc::gamma(&a, g).unwrap().space(), "d={d} k={g}");
        }
    }
}

#[test]
fn family6_is_self_centralizing() {
    for (d, p, k) in [(5, 2, 1), (6, 3, 1), (7, 2, 2), (8, 2, 1)] {
        let a = nt(d, p, k);
        for i in 1..d {
            let s = partition(&a, i + 1, i).unwrap();
            assert!(centralizer(&s).same_space(&s));
            assert!(is_abelian(&s) && is_lie_ideal(&s));
        }
    }
}

#[test]
fn partitions_are_abelian_exactly_below_the_diagonal() {
    let a = nt(6, 3, 1);
    for i in 2..=6 {
        for j in 1..6 {
            let s = partition(&a, i, j).unwrap();
            assert!(is_lie_ideal(&s));
            assert_eq!(is_abelian(&s), i > j, "N_{i},{j}");
        }
    }
    assert!(matches!(partition(&a, 1, 1), Err(IdealError::IndexOutOfRange { .. })));
    assert!(matches!(partition(&a, 3, 6), Err(IdealError::IndexOutOfRange { .. })));
}

#[test]
fn family8_needs_characteristic_two() {
    for (p, k) in [(3, 1), (5, 1), (3, 2)] {
        let a = nt(5, p, k);
        assert_eq!(mab3(&a, 2, Fe::ONE).unwrap_err(), IdealError::WrongCharacteristic(p));
        assert_eq!(mab_family8(&a).unwrap_err(), IdealError::WrongCharacteristic(p));
    }
    for (d, k) in [(5, 1), (5, 2), (6, 1), (6, 2), (7, 1)] {
        let a = nt(d, 2, k);
        let fam = mab_family8(&a).unwrap();
        assert_eq!(fam.len(), (d - 3) * a.field().q() as usize);
        for s in &fam {
            assert!(is_abelian(s), "{}", s.tag());
            assert!(is_lie_ideal(s), "{}", s.tag());
            assert!(correspondence_check(s));
        }
        assert!(matches!(mab3(&a, 1, Fe::ONE), Err(IdealError::IndexOutOfRange { .. })));
        assert!(matches!(mab3(&a, d - 1, Fe::ONE), Err(IdealError::IndexOutOfRange { .. })));
    }
}

#[test]
fn family7_position_range() {
    let a = nt(6, 3, 1);
    assert!(matches!(mab2(&a, 1, Fe::ONE), Err(IdealError::IndexOutOfRange { .. })));
    assert!(matches!(mab2(&a, 6, Fe::ONE), Err(IdealError::IndexOutOfRange { .. })));
    for m in 2..6 {
        for c in a.field().elements() {
            let s = mab2(&a, m, c).unwrap();
            assert!(is_abelian(&s) && is_lie_ideal(&s));
            if !c.is_zero() {
                assert!(lemma1_suite(&s, 500, m as u64).passed());
                assert_eq!(maximality_oracle(&s, DEFAULT_COSET_BOUND), Ok(true));
            }
        }
    }
}

#[test]
fn ideal_side_and_group_side_classifications_agree() {
    let a = nt(5, 2, 1);
    let entries = mab_enumerate(&a).unwrap();
    let mut ideal_side = HashSet::new();
    let mut group_side = HashSet::new();
    for e in &entries {
        let s = &e.ideal;
        if is_abelian(s) && is_lie_ideal(s) && maximality_oracle(s, DEFAULT_COSET_BOUND).unwrap() {
            ideal_side.insert(s.space().clone());
        }
        if is_abelian(s) && is_normal_subgroup(s).unwrap_or(false) && group_maximality_oracle(s, 1 << 10).unwrap() {
            group_side.insert(s.space().clone());
        }
        assert_eq!(e.verdict == Verdict::Maximal, ideal_side.contains(s.space()));
    }
    assert_eq!(ideal_side, group_side);
    assert!(ideal_side.len() >= 4);
}

#[test]
fn maximality_oracle_rejects_proper_subideals() {
    let a = nt(5, 3, 1);
    let s = partition(&a, 4, 2).unwrap();
    assert_eq!(maximality_oracle(&s, DEFAULT_COSET_BOUND), Ok(false));
    assert_eq!(maximality_oracle(&IdealDesc::gamma(&a, 4).unwrap(), DEFAULT_COSET_BOUND), Ok(false));
    assert!(matches!(
        maximality_oracle(&IdealDesc::gamma(&a, 4).unwrap(), 2),
        Err(IdealError::TooLarge { .. })
    ));
}

#[test]
fn tags_are_checked_against_the_space() {
    let a = nt(5, 2, 1);
    let s = partition(&a, 3, 2).unwrap();
    let retagged = IdealDesc::from_space(&a, s.space().clone()).with_tag(s.tag().clone()).unwrap();
    assert!(retagged.same_space(&s));
    let wrong = IdealDesc::from_space(&a, s.space().clone()).with_tag(mab2(&a, 2, Fe::ONE).unwrap().tag().clone());
    assert!(matches!(wrong, Err(IdealError::ShapeMismatch(_))));
}

/// The smallest Lie ideal containing `seed`.
fn ideal_closure(a: &Nt, seed: &[NtMat]) -> IdealDesc {
    let roots = a.prime_root_basis();
    let mut space = Subspace::zero(a.field().p(), a.prime_dim());
    let mut queue: Vec<NtMat> = seed.to_vec();
    while let Some(m) = queue.pop() {
        if space.insert(a.to_vector(&m)) {
            queue.extend(roots.iter().map(|r| a.bracket(&m, r).unwrap()));
        }
    }
    IdealDesc::from_space(a, space)
}

fn config() -> impl Strategy<Value = Nt> {
    prop::sample::select(vec![(4, 2, 1), (5, 2, 1), (5, 3, 1), (5, 2, 2), (6, 2, 1), (6, 3, 1), (7, 2, 1)])
        .prop_map(|(d, p, k)| nt(d, p, k))
}

/// A random element of `Γ_h`.
fn random_in_gamma(a: &Nt, h: usize, rng: &mut ChaCha8Rng) -> NtMat {
    let mut m = a.random(rng);
    for (i, j) in a.canonical_positions() {
        if i - j < h {
            m.set(i, j, Fe::ZERO);
        }
    }
    m
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    /// Subspaces of `Γ_{⌈d/2⌉}` are abelian with trivial products, so the
    /// correspondence must hold whether or not they are ideals.
    #[test]
    fn correspondence_on_random_abelian_subspaces(a in config(), seed in any::<u64>(), n in 1usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = a.d().div_ceil(2);
        let gens: Vec<NtMat> = (0..n).map(|_| random_in_gamma(&a, h, &mut rng)).collect();
        let s = IdealDesc::custom(&a, gens.clone()).unwrap();
        prop_assert!(is_abelian(&s));
        prop_assert!(correspondence_check(&s));
        let closed = ideal_closure(&a, &gens);
        prop_assert!(is_lie_ideal(&closed));
        prop_assert_eq!(is_normal_subgroup(&closed), Ok(true));
    }

    #[test]
    fn lie_ideal_closure_matches_normal_closure(a in config(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = rng.gen_range(1..a.d());
        let g = random_in_gamma(&a, h, &mut rng);
        let s = ideal_closure(&a, &[g]);
        prop_assert!(is_lie_ideal(&s));
        if is_abelian(&s) {
            prop_assert!(correspondence_check(&s));
            let c = centralizer(&s);
            prop_assert!(s.space().is_subspace_of(c.space()));
        }
    }

    #[test]
    fn centralizer_of_partition(a in config(), i in 2usize..9, j in 1usize..8) {
        prop_assume!(i <= a.d() && j < i);
        let c = centralizer(&partition(&a, i, j).unwrap());
        prop_assert!(c.same_space(&partition(&a, j + 1, i - 1).unwrap()));
    }
}
