//! `--selftest`: the invariant suite of the module behind each verb, at
//! default bounds. Randomised checks draw from a ChaCha stream seeded by
//! `--seed` and the check's position, so results do not depend on `--jobs`.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use clonealg_core::algebra::{free_algebra_in_var, hsp_member, FiniteAlgebra};
use clonealg_core::birkhoff::{
    cross_check_topological, decompose_rho_dimensional, et_variety_member, satisfies_identity, TheoryProbe,
};
use clonealg_core::clone_algebra::{check_free_axioms, term_clone_algebra, FiniteCloneAlgebra};
use clonealg_core::fixtures;
use clonealg_core::hyperterm::{
    bullet, enumerate_rho_terms, parse_hyperterm, parse_identity, q_compose, star, FinitaryType, HyperTerm,
    Signature,
};
use clonealg_core::talgebra::{parity_algebra, Dimension, TAlgebra};
use clonealg_core::thread::{Thread, Trace};

use crate::cli::Verb;
use crate::report::Report;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Module {
    Hyperterm,
    FiniteAlgebra,
    TCore,
    CloneCore,
    Birkhoff,
}

impl Module {
    pub fn of(verb: &Verb) -> Module {
        match verb {
            Verb::Parse { .. } | Verb::Compose { .. } | Verb::Translate { .. } => Module::Hyperterm,
            Verb::FreeAlgebra { .. } | Verb::Hsp => Module::FiniteAlgebra,
            Verb::Eval { .. } | Verb::Dim { .. } | Verb::CheckId { .. } => Module::TCore,
            Verb::CloneGen { .. } | Verb::ValidateCa { .. } | Verb::Axioms { .. } => Module::CloneCore,
            Verb::CheckHyperid { .. } | Verb::Decompose | Verb::Hstar | Verb::EtMember | Verb::TopoBirkhoff => {
                Module::Birkhoff
            }
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Module::Hyperterm => "hyperterm",
            Module::FiniteAlgebra => "finite_algebra",
            Module::TCore => "t_core",
            Module::CloneCore => "clone_core",
            Module::Birkhoff => "birkhoff",
        }
    }

    fn checks(self) -> &'static [Check] {
        match self {
            Module::Hyperterm => HYPERTERM,
            Module::FiniteAlgebra => FINITE_ALGEBRA,
            Module::TCore => T_CORE,
            Module::CloneCore => CLONE_CORE,
            Module::Birkhoff => BIRKHOFF,
        }
    }
}

type Check = (&'static str, fn(&mut ChaCha8Rng) -> Result<(), String>);

const SAMPLES: usize = 40;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn random_term(rng: &mut ChaCha8Rng, depth: usize) -> HyperTerm {
    if depth == 0 || rng.gen_bool(0.3) {
        return HyperTerm::e(rng.gen_range(1..=4));
    }
    let args = (0..rng.gen_range(0..=3)).map(|_| random_term(rng, depth - 1)).collect();
    if rng.gen_bool(0.8) {
        HyperTerm::op("s", args)
    } else {
        HyperTerm::generator("x", args)
    }
}

fn random_groupoid(rng: &mut ChaCha8Rng, max: usize) -> FiniteAlgebra {
    let n = rng.gen_range(1..=max);
    let table = (0..n * n).map(|_| rng.gen_range(0..n)).collect();
    FiniteAlgebra::new(n).and_then(|a| a.with_table("s", 2, table)).expect("valid table")
}

fn random_thread(rng: &mut ChaCha8Rng, size: usize) -> Thread {
    let prefix = (0..rng.gen_range(0..4)).map(|_| rng.gen_range(0..size)).collect();
    let cycle = (0..rng.gen_range(1..4)).map(|_| rng.gen_range(0..size)).collect();
    Thread::new(prefix, cycle).expect("nonempty cycle")
}

fn top(a: &FiniteAlgebra) -> TAlgebra {
    fixtures::top_basic(a, 0)
}

const HYPERTERM: &[Check] = &[
    ("canonical forms print and parse back", |rng| {
        let sig = Signature::new(["s"], ["x"]);
        for _ in 0..SAMPLES {
            let t = random_term(rng, 3).canonicalize();
            ensure(t.clone().canonicalize() == t, || format!("{t} is not stable"))?;
            let back = parse_hyperterm(&t.to_string(), &sig).map_err(|e| e.to_string())?;
            ensure(back == t, || format!("{t} parsed as {back}"))?;
        }
        Ok(())
    }),
    ("composing a designated element selects an argument", |rng| {
        for _ in 0..SAMPLES {
            let us: Vec<HyperTerm> = (0..rng.gen_range(1..4)).map(|_| random_term(rng, 2).canonicalize()).collect();
            let i = rng.gen_range(1..=us.len());
            ensure(q_compose(&HyperTerm::e(i), &us) == us[i - 1], || format!("q(e{i}, ..) is not argument {i}"))?;
        }
        Ok(())
    }),
    ("composing with projections is the identity", |rng| {
        for _ in 0..SAMPLES {
            let t = random_term(rng, 3).canonicalize();
            let es: Vec<HyperTerm> = (1..=rng.gen_range(0..5)).map(HyperTerm::e).collect();
            ensure(q_compose(&t, &es) == t, || format!("{t} moved"))?;
        }
        Ok(())
    }),
    ("bullet inverts star", |_| {
        let rho = FinitaryType::from_pairs([("s", 2), ("c", 0)]);
        for p in enumerate_rho_terms(&rho, 2, 3) {
            let back = bullet(&star(&p), &rho).map_err(|e| e.to_string())?;
            ensure(back == p, || format!("{p} came back as {back}"))?;
        }
        Ok(())
    }),
    ("hyperterms satisfy the clone axioms", |rng| {
        for _ in 0..SAMPLES / 4 {
            let ts: Vec<HyperTerm> = (0..3).map(|_| random_term(rng, 2).canonicalize()).collect();
            if let Some((ax, detail)) = check_free_axioms(&ts, 2) {
                return Err(format!("{ax:?}: {detail}"));
            }
        }
        Ok(())
    }),
];

const FINITE_ALGEBRA: &[Check] = &[
    ("clone levels of the two-element semilattice", |_| {
        let s2 = fixtures::semilattice2();
        let sizes: Vec<usize> =
            [2, 3].iter().map(|&n| s2.clone_level(n, 1 << 16).map(|c| c.len())).collect::<Result<_, _>>().map_err(|e| e.to_string())?;
        ensure(sizes == [3, 7], || format!("sizes {sizes:?}"))
    }),
    ("free semilattice on two generators", |_| {
        let f = free_algebra_in_var(&fixtures::semilattice2(), 2).map_err(|e| e.to_string())?;
        ensure(f.algebra.size() == 3, || format!("size {}", f.algebra.size()))
    }),
    ("varieties contain their generators", |rng| {
        for _ in 0..SAMPLES / 4 {
            let s = random_groupoid(rng, 3);
            ensure(hsp_member(&s, &s).map_err(|e| e.to_string())?.is_member(), || format!("{s:?}"))?;
        }
        Ok(())
    }),
    ("varieties contain squares", |rng| {
        for _ in 0..SAMPLES / 4 {
            let s = random_groupoid(rng, 2);
            let sq = FiniteAlgebra::product(&[&s, &s]).map_err(|e| e.to_string())?;
            ensure(hsp_member(&s, &sq).map_err(|e| e.to_string())?.is_member(), || format!("{s:?}"))?;
        }
        Ok(())
    }),
];

const T_CORE: &[Check] = &[
    ("top extensions have dimension at most their arity", |rng| {
        for _ in 0..SAMPLES {
            let s = random_groupoid(rng, 3);
            let d = top(&s).dimension("s", 8).map_err(|e| e.to_string())?;
            let expected = s.op("s").expect("s").essential_arity();
            ensure(d == Dimension::Finite(expected), || format!("{d:?}, expected {expected}"))?;
        }
        Ok(())
    }),
    ("parity has no finite dimension", |_| {
        let d = parity_algebra().dimension("s", 8).map_err(|e| e.to_string())?;
        ensure(d == Dimension::AtLeast(8), || format!("{d:?}"))
    }),
    ("designated elements read their coordinate", |rng| {
        let a = fixtures::top_complete(&fixtures::chain3());
        for _ in 0..SAMPLES {
            let s = random_thread(rng, 3);
            let i = rng.gen_range(1..8);
            let v = a.term_op_eval(&HyperTerm::e(i), &s).map_err(|e| e.to_string())?;
            ensure(v == s.entry(i), || format!("e{i} at {s}"))?;
        }
        Ok(())
    }),
    ("generated t-subalgebras contain the thread's values", |rng| {
        let a = fixtures::top_complete(&fixtures::groupoid_nc());
        for _ in 0..SAMPLES / 4 {
            let s = random_thread(rng, a.size());
            let sub = a.t_subalgebra_generated(&s).map_err(|e| e.to_string())?;
            ensure(s.values().iter().all(|v| sub.embedding.contains(v)), || format!("{s}"))?;
        }
        Ok(())
    }),
    ("idempotence holds in meet and fails in xor", |_| {
        let sig = Signature::new(["s"], Vec::<String>::new());
        let id = parse_identity("s(e1,e1) = e1", &sig).map_err(|e| e.to_string())?;
        let meet = satisfies_identity(&top(&fixtures::semilattice2()), &id).map_err(|e| e.to_string())?;
        let xor = satisfies_identity(&top(&fixtures::xor2()), &id).map_err(|e| e.to_string())?;
        ensure(meet.holds() && !xor.holds(), || format!("meet {meet:?}, xor {xor:?}"))
    }),
];

const CLONE_CORE: &[Check] = &[
    ("projection windows satisfy the axioms", |_| {
        for m in 1..=3 {
            let r = FiniteCloneAlgebra::projection_window(m).validate_axioms(3);
            ensure(r.passed(), || format!("window {m}: {:?}", r.violations.first()))?;
        }
        Ok(())
    }),
    ("term clone algebras satisfy the axioms and are minimal", |rng| {
        for _ in 0..SAMPLES / 8 {
            let s = random_groupoid(rng, 2);
            let g = term_clone_algebra(&top(&s), 2, 100_000).map_err(|e| e.to_string())?;
            let c = g.export().map_err(|e| e.to_string())?;
            let r = c.validate_axioms(2);
            ensure(r.passed(), || format!("{s:?}: {:?}", r.violations.first()))?;
            ensure(c.is_minimal(), || format!("{s:?} is not minimal"))?;
        }
        Ok(())
    }),
    ("exported clone algebras round trip through their t-algebra", |_| {
        for m in 1..=3 {
            let c = FiniteCloneAlgebra::projection_window(m);
            let g = term_clone_algebra(&c.under_t_algebra(), m, 100_000).map_err(|e| e.to_string())?;
            let d = g.export().map_err(|e| e.to_string())?;
            ensure(c.isomorphism(&d).is_some(), || format!("window {m}"))?;
        }
        Ok(())
    }),
];

const BIRKHOFF: &[Check] = &[
    ("both routes agree on groupoid pairs", |rng| {
        let pool = fixtures::groupoid_pool();
        // sources over larger carriers make the t-powers too big for a self test
        let sources: Vec<_> = pool.iter().filter(|(_, a)| a.size() <= 2).collect();
        let probe = TheoryProbe::default();
        for _ in 0..6 {
            let (na, a) = sources[rng.gen_range(0..sources.len())];
            let (nb, b) = &pool[rng.gen_range(0..pool.len())];
            let c = cross_check_topological(&fixtures::top_complete(a), &top(b), &probe).map_err(|e| e.to_string())?;
            ensure(c.agree(), || format!("{na} vs {nb}"))?;
        }
        Ok(())
    }),
    ("union decompositions rebuild the algebra", |_| {
        let a = fixtures::meet_join_union();
        let d = decompose_rho_dimensional(&a, &TheoryProbe::default())
            .map_err(|e| e.to_string())?
            .ok_or("not decomposable")?;
        let again = decompose_rho_dimensional(&d.rebuild().map_err(|e| e.to_string())?, &TheoryProbe::default())
            .map_err(|e| e.to_string())?;
        ensure(again.as_ref() == Some(&d), || "the rebuilt algebra decomposes differently".into())
    }),
    ("t-algebras lie in their own Et-variety", |rng| {
        let pool = fixtures::groupoid_pool();
        let (name, s) = &pool[rng.gen_range(0..pool.len())];
        let a = top(s);
        let ans = et_variety_member(&a, &a, &TheoryProbe::default()).map_err(|e| e.to_string())?;
        ensure(ans.holds, || format!("{name}: {}", ans.note))
    }),
    ("complete traces are not basic", |_| {
        let a = fixtures::top_complete(&fixtures::semilattice2());
        ensure(!matches!(a.trace(), Trace::Basic(_)), || "complete trace read as basic".into())
    }),
];

/// Runs every check of `module` on `jobs` threads. The report lists the
/// checks in a fixed order.
pub fn run(module: Module, seed: u64, jobs: usize) -> (Report, bool) {
    let checks = module.checks();
    let results: Mutex<Vec<Option<Result<(), String>>>> = Mutex::new(vec![None; checks.len()]);
    let next = AtomicUsize::new(0);
    std::thread::scope(|scope| {
        for _ in 0..jobs.clamp(1, checks.len().max(1)) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some((_, check)) = checks.get(i) else { break };
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(i as u64);
                let r = check(&mut rng);
                results.lock().expect("no poisoned lock")[i] = Some(r);
            });
        }
    });
    let results = results.into_inner().expect("no poisoned lock");
    let mut passed = true;
    let rows: Vec<serde_json::Value> = checks
        .iter()
        .zip(results)
        .map(|((name, _), r)| {
            let r = r.expect("every check ran");
            passed &= r.is_ok();
            match r {
                Ok(()) => json!({ "check": name, "passed": true }),
                Err(e) => json!({ "check": name, "passed": false, "detail": e }),
            }
        })
        .collect();
    let report = Report::new(if passed { "pass" } else { "fail" })
        .exact()
        .certificate(json!({ "module": module.name(), "seed": seed, "checks": rows }));
    (report, passed)
}
