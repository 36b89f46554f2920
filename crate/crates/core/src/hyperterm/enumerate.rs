use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use super::{in_star_image, structural_identity, FinitaryType, Head, HyperTerm, Identity, RhoTerm};

/// A head together with the longest explicit argument list to enumerate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HeadSpec {
    pub head: Head,
    pub max_args: usize,
}

impl HeadSpec {
    pub fn op(name: impl Into<String>, max_args: usize) -> Self {
        HeadSpec { head: Head::Op(name.into()), max_args }
    }

    pub fn generator(name: impl Into<String>, max_args: usize) -> Self {
        HeadSpec { head: Head::Generator(name.into()), max_args }
    }
}

/// All canonical hyperterms of depth `≤ depth` with designated indices in
/// `1..=index_bound`, sorted by `(depth, Ord)`.
pub fn enumerate_hyperterms(heads: &[HeadSpec], depth: usize, index_bound: usize) -> Vec<HyperTerm> {
    let mut all: BTreeSet<HyperTerm> = (1..=index_bound).map(HyperTerm::Designated).collect();
    for _ in 0..depth {
        let pool: Vec<HyperTerm> = all.iter().cloned().collect();
        for spec in heads {
            for len in 0..=spec.max_args {
                for_each_tuple(pool.len(), len, |idx| {
                    let args = idx.iter().map(|&i| pool[i].clone()).collect();
                    all.insert(HyperTerm::Apply(spec.head.clone(), args).canonicalize());
                });
            }
        }
    }
    let mut out: Vec<HyperTerm> = all.into_iter().collect();
    out.sort_by(|a, b| (a.depth(), a).cmp(&(b.depth(), b)));
    out
}

/// All ρ-terms of depth `≤ depth` over `v_1..v_{var_bound}`, sorted by `(depth, Ord)`.
pub fn enumerate_rho_terms(rho: &FinitaryType, depth: usize, var_bound: usize) -> Vec<RhoTerm> {
    let mut all: BTreeSet<RhoTerm> = (1..=var_bound).map(RhoTerm::Var).collect();
    for _ in 0..depth {
        let pool: Vec<RhoTerm> = all.iter().cloned().collect();
        for (sym, n) in rho.iter() {
            for_each_tuple(pool.len(), n, |idx| {
                all.insert(RhoTerm::Node(sym.into(), idx.iter().map(|&i| pool[i].clone()).collect()));
            });
        }
    }
    let mut out: Vec<RhoTerm> = all.into_iter().collect();
    out.sort_by(|a, b| (a.depth(), a).cmp(&(b.depth(), b)));
    out
}

/// The identities `t = (t^•)^⋆` for generator-free `t` outside the image of
/// `star`, with `t` of depth `≤ depth`, indices `≤ index_bound` and at most
/// `index_bound` explicit arguments per head. The family
/// `σ = σ(e_1,…,e_{k-1},e_{k+1})` for `arity(σ) < k ≤ index_bound` is
/// always included even where `e_{k+1}` exceeds the index bound.
pub fn structural_identities(rho: &FinitaryType, depth: usize, index_bound: usize) -> Vec<Identity> {
    let heads: Vec<HeadSpec> = rho
        .iter()
        .map(|(s, n)| HeadSpec::op(s, index_bound.max(n + 1)))
        .collect();
    let mut terms: BTreeSet<HyperTerm> = enumerate_hyperterms(&heads, depth, index_bound)
        .into_iter()
        .filter(|t| !in_star_image(t, rho))
        .collect();
    for (s, n) in rho.iter() {
        for k in n + 1..=index_bound.max(n + 1) {
            let mut args: Vec<HyperTerm> = (1..k).map(HyperTerm::Designated).collect();
            args.push(HyperTerm::Designated(k + 1));
            terms.insert(HyperTerm::op(s, args));
        }
    }
    let mut terms: Vec<HyperTerm> = terms.into_iter().collect();
    terms.sort_by(|a, b| (a.depth(), a).cmp(&(b.depth(), b)));
    terms
        .iter()
        .map(|t| structural_identity(t, rho).expect("heads drawn from rho"))
        .collect()
}

/// Calls `f` on every tuple in `0..n` of length `len`, in lexicographic order.
pub(crate) fn for_each_tuple(n: usize, len: usize, mut f: impl FnMut(&[usize])) {
    if len > 0 && n == 0 {
        return;
    }
    let mut idx = alloc::vec![0usize; len];
    loop {
        f(&idx);
        let mut pos = len;
        loop {
            if pos == 0 {
                return;
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < n {
                break;
            }
            idx[pos] = 0;
        }
    }
}
