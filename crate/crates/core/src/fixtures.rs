//! Small algebras and t-algebras used by the tests, the acceptance suite
//! and the command line self tests.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::algebra::{FinitaryOperation, FiniteAlgebra};
use crate::talgebra::{TAlgebra, TOperation};
use crate::thread::{Thread, Trace};

fn binary(size: usize, table: Vec<usize>) -> FiniteAlgebra {
    FiniteAlgebra::new(size).and_then(|a| a.with_table("s", 2, table)).expect("fixture table")
}

/// `({0,1}, ∧)` with the meet named `s`.
pub fn semilattice2() -> FiniteAlgebra {
    binary(2, vec![0, 0, 0, 1])
}

/// `({0,1}, ∨)`, isomorphic to [`semilattice2`] by swapping 0 and 1.
pub fn join2() -> FiniteAlgebra {
    binary(2, vec![0, 1, 1, 1])
}

/// `({0,1,2}, min)`.
pub fn chain3() -> FiniteAlgebra {
    FiniteAlgebra::new(3)
        .expect("nonempty")
        .with_op("s", FinitaryOperation::from_fn(3, 2, |a| a[0].min(a[1])))
        .expect("same size")
}

/// The non-commutative groupoid on `{0,1}` with `x·y = 1` iff `(x,y) = (0,1)`.
pub fn groupoid_nc() -> FiniteAlgebra {
    binary(2, vec![0, 1, 0, 0])
}

/// Left projection `x·y = x` on `{0,1}`.
pub fn left_zero2() -> FiniteAlgebra {
    binary(2, vec![0, 0, 1, 1])
}

/// `x·y = x + y mod 2`.
pub fn xor2() -> FiniteAlgebra {
    binary(2, vec![0, 1, 1, 0])
}

/// Constant `x·y = 0` on `{0,1}`.
pub fn zero2() -> FiniteAlgebra {
    binary(2, vec![0, 0, 0, 0])
}

/// `x·y = x + y mod 3`.
pub fn z3() -> FiniteAlgebra {
    FiniteAlgebra::new(3)
        .expect("nonempty")
        .with_op("s", FinitaryOperation::from_fn(3, 2, |a| (a[0] + a[1]) % 3))
        .expect("same size")
}

/// `({0,1}, ¬)` with negation named `n`.
pub fn negation2() -> FiniteAlgebra {
    FiniteAlgebra::new(2).and_then(|a| a.with_table("n", 1, vec![1, 0])).expect("fixture table")
}

/// The one-element algebra of the same type as `like`.
pub fn trivial(like: &FiniteAlgebra) -> FiniteAlgebra {
    let mut out = FiniteAlgebra::new(1).expect("nonempty");
    for (name, f) in like.ops() {
        out = out.with_op(name, FinitaryOperation::constant(1, f.arity(), 0)).expect("same size");
    }
    out
}

/// Two- and three-element groupoids of type `{s:2}`.
pub fn groupoid_pool() -> Vec<(&'static str, FiniteAlgebra)> {
    let s2 = semilattice2();
    vec![
        ("meet2", s2.clone()),
        ("join2", join2()),
        ("chain3", chain3()),
        ("groupoid_nc", groupoid_nc()),
        ("left_zero2", left_zero2()),
        ("xor2", xor2()),
        ("zero2", zero2()),
        ("z3", z3()),
        ("trivial", trivial(&s2)),
    ]
}

/// Union trace over `0̄` and `1̄`; `s` is `∧` on the first class and `∨`
/// on the second.
pub fn meet_join_union() -> TAlgebra {
    let bases = vec![Thread::constant(0), Thread::constant(1)];
    let trace = Trace::union(bases.clone()).expect("inequivalent bases");
    let pieces = vec![
        (bases[0].clone(), semilattice2().op("s").expect("s").clone()),
        (bases[1].clone(), join2().op("s").expect("s").clone()),
    ];
    TAlgebra::new(2, trace).and_then(|a| a.with_op("s", TOperation::Piecewise(pieces))).expect("valid fixture")
}

/// Top extension of `s` over the basic class of `c̄`.
pub fn top_basic(s: &FiniteAlgebra, c: usize) -> TAlgebra {
    TAlgebra::top_extension(s, Trace::basic(Thread::constant(c))).expect("valid fixture")
}

/// Top extension of `s` over the complete trace.
pub fn top_complete(s: &FiniteAlgebra) -> TAlgebra {
    TAlgebra::top_extension(s, Trace::Complete).expect("valid fixture")
}

/// Top extension of `s` over the union of the classes of the constant
/// threads `c̄` for `c` in `consts`.
pub fn top_union(s: &FiniteAlgebra, consts: &[usize]) -> TAlgebra {
    let trace = Trace::union(consts.iter().map(|&c| Thread::constant(c)).collect()).expect("distinct constants");
    TAlgebra::top_extension(s, trace).expect("valid fixture")
}

/// t-algebras of type `{s}` over basic and union traces with carriers of
/// at most three elements, all with finite-dimensional operations.
pub fn t_algebra_pool() -> Vec<(String, TAlgebra)> {
    let mut out = Vec::new();
    for (name, a) in groupoid_pool() {
        out.push((format!("{name}/basic0"), top_basic(&a, 0)));
        if a.size() > 1 {
            out.push((format!("{name}/basic1"), top_basic(&a, 1)));
            out.push((format!("{name}/union01"), top_union(&a, &[0, 1])));
        }
    }
    out.push(("meet_join_union".into(), meet_join_union()));
    let alternating = Thread::new(vec![], vec![0, 1]).expect("nonempty cycle");
    out.push((
        "meet2/alternating".into(),
        TAlgebra::top_extension(&semilattice2(), Trace::basic(alternating)).expect("valid fixture"),
    ));
    out.push((
        "prefix_parity3".into(),
        TAlgebra::new(2, Trace::basic(Thread::constant(1)))
            .and_then(|a| a.with_op("s", crate::talgebra::prefix_parity_op(3)))
            .expect("valid fixture"),
    ));
    out
}
