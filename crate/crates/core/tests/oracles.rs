mod common;

use clonealg_core::algebra::{free_algebra_in_var, hsp_member};
use clonealg_core::fixtures;

#[test]
fn brute_force_clone_counts_match() {
    assert_eq!(common::brute_clone_size(&fixtures::semilattice2(), 2), 3);
    assert_eq!(common::brute_clone_size(&fixtures::semilattice2(), 3), 7);
    assert_eq!(common::brute_clone_size(&fixtures::negation2(), 1), 2);
    for (name, a) in fixtures::groupoid_pool() {
        for n in 1..=2 {
            let lib = a.clone_level(n, 1 << 16).unwrap().len();
            assert_eq!(lib, common::brute_clone_size(&a, n), "{name} at arity {n}");
        }
    }
}

#[test]
fn free_algebra_sizes() {
    let s2 = fixtures::semilattice2();
    let sizes: Vec<usize> = (1..=3).map(|k| free_algebra_in_var(&s2, k).unwrap().algebra.size()).collect();
    assert_eq!(sizes, vec![1, 3, 7]);
    assert_eq!(free_algebra_in_var(&fixtures::xor2(), 2).unwrap().algebra.size(), 4);
}

#[test]
fn hsp_agrees_with_naive_search() {
    let pool = fixtures::groupoid_pool();
    for (sn, s) in &pool {
        for (tn, t) in &pool {
            let fast = hsp_member(s, t).unwrap().is_member();
            let slow = common::naive_hsp(s, t, 3);
            assert_eq!(fast, slow, "{tn} in HSP({sn})");
        }
    }
}

#[test]
fn generating_sets_are_small() {
    assert_eq!(common::small_generating_set(&fixtures::chain3()).len(), 3);
    assert_eq!(common::small_generating_set(&fixtures::z3()).len(), 1);
}
