use proptest::prelude::*;

use clonealg_core::algebra::{hsp_member, tuple_index, tuple_of_index, FiniteAlgebra};
use clonealg_core::clone_algebra::check_free_axioms;
use clonealg_core::hyperterm::{
    bullet, parse_hyperterm, q_compose, star, FinitaryType, Head, HyperTerm, RhoTerm, Signature,
};
use clonealg_core::thread::Thread;

fn hyperterm() -> impl Strategy<Value = HyperTerm> {
    let leaf = (1usize..=4).prop_map(HyperTerm::Designated);
    leaf.prop_recursive(3, 24, 3, |inner| {
        (prop_oneof![Just(Head::Op("s".into())), Just(Head::Generator("x".into()))], prop::collection::vec(inner, 0..=3))
            .prop_map(|(h, args)| HyperTerm::Apply(h, args))
    })
}

fn rho_term() -> impl Strategy<Value = RhoTerm> {
    let leaf = prop_oneof![(1usize..=3).prop_map(RhoTerm::var), Just(RhoTerm::node("c", vec![]))];
    leaf.prop_recursive(3, 24, 2, |inner| {
        (inner.clone(), inner).prop_map(|(a, b)| RhoTerm::node("s", vec![a, b]))
    })
}

fn groupoid(max: usize) -> impl Strategy<Value = FiniteAlgebra> {
    (1usize..=max)
        .prop_flat_map(|n| (Just(n), prop::collection::vec(0..n, n * n)))
        .prop_map(|(n, table)| FiniteAlgebra::new(n).and_then(|a| a.with_table("s", 2, table)).unwrap())
}

fn thread() -> impl Strategy<Value = Thread> {
    (prop::collection::vec(0usize..3, 0..4), prop::collection::vec(0usize..3, 1..4))
        .prop_map(|(prefix, cycle)| Thread::new(prefix, cycle).unwrap())
}

proptest! {
    #[test]
    fn canonicalize_is_idempotent(t in hyperterm()) {
        let c = t.canonicalize();
        prop_assert!(c.is_canonical());
        prop_assert_eq!(c.clone().canonicalize(), c);
    }

    #[test]
    fn display_parses_back(t in hyperterm()) {
        let c = t.canonicalize();
        let sig = Signature::new(["s"], ["x"]);
        prop_assert_eq!(parse_hyperterm(&c.to_string(), &sig).unwrap(), c);
    }

    #[test]
    fn bullet_inverts_star(p in rho_term()) {
        let rho = FinitaryType::from_pairs([("s", 2), ("c", 0)]);
        prop_assert_eq!(bullet(&star(&p), &rho).unwrap(), p);
    }

    #[test]
    fn hyperterms_satisfy_clone_axioms(ts in prop::collection::vec(hyperterm(), 1..4)) {
        let ts: Vec<HyperTerm> = ts.into_iter().map(HyperTerm::canonicalize).collect();
        prop_assert_eq!(check_free_axioms(&ts, 2), None);
    }

    #[test]
    fn compose_with_projections_is_identity(t in hyperterm(), n in 0usize..5) {
        let t = t.canonicalize();
        let es: Vec<HyperTerm> = (1..=n).map(HyperTerm::Designated).collect();
        prop_assert_eq!(q_compose(&t, &es), t);
    }

    #[test]
    fn patches_overwrite_the_front(s in thread(), w in prop::collection::vec(0usize..3, 0..6)) {
        let p = s.patch(&w);
        for (i, &v) in w.iter().enumerate() {
            prop_assert_eq!(p.entry(i + 1), v);
        }
        for i in w.len() + 1..w.len() + 10 {
            prop_assert_eq!(p.entry(i), s.entry(i));
        }
        prop_assert!(p.equivalent(&s));
    }

    #[test]
    fn tuple_index_round_trips(size in 1usize..5, args in prop::collection::vec(0usize..5, 0..5)) {
        let args: Vec<usize> = args.into_iter().map(|a| a % size).collect();
        prop_assert_eq!(tuple_of_index(size, args.len(), tuple_index(size, &args)), args);
    }

    #[test]
    fn varieties_contain_their_generator(s in groupoid(3)) {
        prop_assert!(hsp_member(&s, &s).unwrap().is_member());
    }

    // squares of 3-element groupoids can need free algebras on 3 generators
    #[test]
    fn varieties_contain_squares(s in groupoid(2)) {
        let sq = FiniteAlgebra::product(&[&s, &s]).unwrap();
        prop_assert!(hsp_member(&s, &sq).unwrap().is_member());
    }
}
