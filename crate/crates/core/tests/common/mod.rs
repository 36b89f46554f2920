//! Brute-force oracles shared by the integration tests and the acceptance
//! suite. They only read operation tables from the library and do their own
//! composition, product and homomorphism arithmetic.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use clonealg_core::algebra::FiniteAlgebra;

/// Row-major tables: `(size, arity, table)` per symbol.
pub fn tables(a: &FiniteAlgebra) -> Vec<(String, usize, Vec<usize>)> {
    a.ops().map(|(s, f)| (s.to_string(), f.arity(), f.table().to_vec())).collect()
}

fn apply(size: usize, table: &[usize], args: &[usize]) -> usize {
    table[args.iter().fold(0, |acc, &x| acc * size + x)]
}

/// All `len`-tuples over `0..n`, lexicographic.
pub fn tuples(n: usize, len: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|t| {
                (0..n).map(move |x| {
                    let mut t = t.clone();
                    t.push(x);
                    t
                })
            })
            .collect();
    }
    out
}

/// `|Clo_n(A)|` by marking, among all `|A|^(|A|^n)` tables of arity `n`,
/// the ones reachable from projections by composing the basic operations.
pub fn brute_clone_size(a: &FiniteAlgebra, n: usize) -> usize {
    let size = a.size();
    let points = tuples(size, n);
    let total = (size as u64).pow(points.len() as u32);
    assert!(total <= 1 << 20, "brute-force space too large");
    let code = |t: &[usize]| t.iter().fold(0u64, |acc, &x| acc * size as u64 + x as u64) as usize;
    let mut marked = vec![false; total as usize];
    let mut found: Vec<Vec<usize>> = Vec::new();
    for i in 0..n {
        let t: Vec<usize> = points.iter().map(|p| p[i]).collect();
        if !marked[code(&t)] {
            marked[code(&t)] = true;
            found.push(t);
        }
    }
    let ops = tables(a);
    loop {
        let before = found.len();
        for (_, arity, table) in &ops {
            for pick in tuples(found.len(), *arity) {
                let t: Vec<usize> = (0..points.len())
                    .map(|r| {
                        let args: Vec<usize> = pick.iter().map(|&j| found[j][r]).collect();
                        apply(size, table, &args)
                    })
                    .collect();
                if !marked[code(&t)] {
                    marked[code(&t)] = true;
                    found.push(t);
                }
            }
        }
        if found.len() == before {
            return marked.iter().filter(|&&m| m).count();
        }
    }
}

/// The power `S^n` as tuples of elements with coordinatewise tables.
pub struct Power {
    pub size: usize,
    pub n: usize,
    pub elements: Vec<Vec<usize>>,
}

impl Power {
    pub fn new(size: usize, n: usize) -> Power {
        Power { size, n, elements: tuples(size, n) }
    }

    fn index(&self, x: &[usize]) -> usize {
        x.iter().fold(0, |acc, &v| acc * self.size + v)
    }
}

/// The subalgebra of `S^n × T` generated by the pairs `(b_i, g_i)`; `None`
/// when its first projection is not injective, i.e. `b_i ↦ g_i` does not
/// extend to a homomorphism.
fn graph_closure(s: &FiniteAlgebra, p: &Power, t: &FiniteAlgebra, b: &[usize], g: &[usize]) -> Option<BTreeMap<usize, usize>> {
    let s_ops = tables(s);
    let t_ops: BTreeMap<String, Vec<usize>> = tables(t).into_iter().map(|(n, _, tab)| (n, tab)).collect();
    let mut map: BTreeMap<usize, usize> = BTreeMap::new();
    let mut order = Vec::new();
    for (&x, &y) in b.iter().zip(g) {
        match map.insert(x, y) {
            Some(old) if old != y => return None,
            Some(_) => {}
            None => order.push(x),
        }
    }
    let mut done = 0;
    let mut first = true;
    while first || done < order.len() {
        let len = order.len();
        for (name, arity, table) in &s_ops {
            for pick in tuples(len, *arity) {
                if !first && pick.iter().all(|&i| i < done) {
                    continue;
                }
                let xs: Vec<&Vec<usize>> = pick.iter().map(|&i| &p.elements[order[i]]).collect();
                let z: Vec<usize> = (0..p.n)
                    .map(|c| {
                        let args: Vec<usize> = xs.iter().map(|x| x[c]).collect();
                        apply(s.size(), table, &args)
                    })
                    .collect();
                let zi = p.index(&z);
                let ys: Vec<usize> = pick.iter().map(|&i| map[&order[i]]).collect();
                let w = apply(t.size(), &t_ops[name], &ys);
                match map.get(&zi) {
                    Some(&old) if old != w => return None,
                    Some(_) => {}
                    None => {
                        map.insert(zi, w);
                        order.push(zi);
                    }
                }
            }
        }
        done = len;
        first = false;
    }
    Some(map)
}

/// Whether `t` is a homomorphic image of a subalgebra of `s^n` for some
/// `n ≤ max_power`, searching every generator tuple of every power.
pub fn naive_hsp(s: &FiniteAlgebra, t: &FiniteAlgebra, max_power: usize) -> bool {
    let gens = small_generating_set(t);
    for n in 1..=max_power {
        let p = Power::new(s.size(), n);
        for b in tuples(p.elements.len(), gens.len()) {
            if let Some(map) = graph_closure(s, &p, t, &b, &gens) {
                let image: BTreeSet<usize> = map.values().copied().collect();
                if image.len() == t.size() {
                    return true;
                }
            }
        }
    }
    false
}

/// A smallest generating set of `t`, by trying subsets in size order.
pub fn small_generating_set(t: &FiniteAlgebra) -> Vec<usize> {
    let n = t.size();
    let mut subsets: Vec<Vec<usize>> =
        (0..1u32 << n).map(|m| (0..n).filter(|&i| m >> i & 1 == 1).collect()).collect();
    subsets.sort_by_key(|s| s.len());
    for sub in subsets {
        if generated(t, &sub).len() == n {
            return sub;
        }
    }
    unreachable!("the whole carrier generates")
}

pub fn generated(t: &FiniteAlgebra, gens: &[usize]) -> BTreeSet<usize> {
    let ops = tables(t);
    let mut set: BTreeSet<usize> = gens.iter().copied().collect();
    loop {
        let items: Vec<usize> = set.iter().copied().collect();
        let mut grew = false;
        for (_, arity, table) in &ops {
            for pick in tuples(items.len(), *arity) {
                let args: Vec<usize> = pick.iter().map(|&i| items[i]).collect();
                grew |= set.insert(apply(t.size(), table, &args));
            }
        }
        if !grew {
            return set;
        }
    }
}

/// Largest coordinate the table depends on, 0 for constants.
pub fn brute_dimension(size: usize, arity: usize, table: &[usize]) -> usize {
    (1..=arity)
        .rev()
        .find(|&i| {
            tuples(size, arity).iter().any(|a| {
                (0..size).any(|b| {
                    let mut c = a.clone();
                    c[i - 1] = b;
                    apply(size, table, a) != apply(size, table, &c)
                })
            })
        })
        .unwrap_or(0)
}
