use skpha::baseline::*;
use skpha::harness::checks::exhaustive_agreement;
use skpha::SkInstance;

#[test]
fn top_eigenvector_beats_random_signs_on_average() {
    let (mut eig, mut random) = (0.0, 0.0);
    for seed in 0..10 {
        let inst = SkInstance::sample(2000, seed).unwrap();
        eig += baseline_top_eigvec(&inst).unwrap().energy / 10.0;
        random += random_signs(&inst, 1, seed).unwrap().mean_energy / 10.0;
    }
    assert!(eig > random, "{eig} ≤ {random}");
    assert!(eig > 0.5, "{eig}");
}

#[test]
fn exhaustive_search_agrees_with_enumeration() {
    for (n, seed) in [(1, 0), (3, 1), (10, 2), (16, 3)] {
        let (gray, naive) = exhaustive_agreement(n, seed).unwrap();
        assert!((gray - naive).abs() <= 1e-9 * naive.abs().max(1.0), "n={n}: {gray} vs {naive}");
    }
}

#[test]
fn single_spin_maximum_is_its_self_coupling() {
    let inst = SkInstance::sample(1, 5).unwrap();
    let best = brute_force_max(&inst).unwrap();
    assert_eq!(best.hamiltonian, inst.a()[0]);
}
