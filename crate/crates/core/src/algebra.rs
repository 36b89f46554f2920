//! Finite finitary algebras: evaluation, term clones, subalgebras,
//! homomorphisms, relatively free algebras and HSP membership.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::hyperterm::{enumerate::for_each_tuple, FinitaryType, RhoIdentity, RhoTerm};

/// Default ceiling on the number of columns in a free-algebra construction.
pub const DEFAULT_COLUMN_BOUND: usize = 1 << 20;
/// Default ceiling on the number of elements any closure may produce.
pub const DEFAULT_ELEMENT_BOUND: usize = 1 << 16;
/// Ceiling on elements × column width held by a column closure.
pub const CELL_BOUND: usize = 1 << 26;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AlgebraError {
    TableSize { op: String, expected: usize, found: usize },
    OutOfRange { op: String, value: usize },
    EmptyCarrier,
    TypeMismatch,
    UnknownSymbol(String),
    UnassignedVariable(usize),
    ElementOutOfRange(usize),
    ResourceLimit { what: &'static str, needed: u128, bound: usize },
}

impl fmt::Display for AlgebraError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AlgebraError::TableSize { op, expected, found } => {
                write!(f, "table of `{op}` has {found} entries, expected {expected}")
            }
            AlgebraError::OutOfRange { op, value } => {
                write!(f, "table of `{op}` contains {value}, outside the carrier")
            }
            AlgebraError::EmptyCarrier => f.write_str("carrier must be nonempty"),
            AlgebraError::TypeMismatch => f.write_str("algebras have different types"),
            AlgebraError::UnknownSymbol(s) => write!(f, "unknown operation symbol `{s}`"),
            AlgebraError::UnassignedVariable(i) => write!(f, "variable v{i} is unassigned"),
            AlgebraError::ElementOutOfRange(a) => write!(f, "element {a} is outside the carrier"),
            AlgebraError::ResourceLimit { what, needed, bound } => {
                write!(f, "{what}: needs {needed}, bound is {bound}")
            }
        }
    }
}

/// `size^exp`, saturating into `u128`.
pub fn pow_u128(size: usize, exp: usize) -> u128 {
    let mut acc: u128 = 1;
    for _ in 0..exp {
        acc = acc.saturating_mul(size as u128);
    }
    acc
}

/// Mixed-radix index of a tuple, first coordinate most significant.
pub fn tuple_index(size: usize, args: &[usize]) -> usize {
    args.iter().fold(0, |acc, &a| acc * size + a)
}

/// Inverse of [`tuple_index`].
pub fn tuple_of_index(size: usize, arity: usize, mut index: usize) -> Vec<usize> {
    let mut out = vec![0; arity];
    for slot in out.iter_mut().rev() {
        *slot = index % size;
        index /= size;
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FinitaryOperation {
    size: usize,
    arity: usize,
    table: Vec<usize>,
}

impl FinitaryOperation {
    pub fn new(size: usize, arity: usize, table: Vec<usize>) -> Result<Self, AlgebraError> {
        Self::named("", size, arity, table)
    }

    fn named(name: &str, size: usize, arity: usize, table: Vec<usize>) -> Result<Self, AlgebraError> {
        if size == 0 {
            return Err(AlgebraError::EmptyCarrier);
        }
        let expected = pow_u128(size, arity);
        if expected != table.len() as u128 {
            return Err(AlgebraError::TableSize {
                op: name.into(),
                expected: usize::try_from(expected).unwrap_or(usize::MAX),
                found: table.len(),
            });
        }
        if let Some(&value) = table.iter().find(|&&v| v >= size) {
            return Err(AlgebraError::OutOfRange { op: name.into(), value });
        }
        Ok(FinitaryOperation { size, arity, table })
    }

    pub fn from_fn(size: usize, arity: usize, f: impl Fn(&[usize]) -> usize) -> Self {
        let n = usize::try_from(pow_u128(size, arity)).expect("table fits in memory");
        let table = (0..n).map(|i| f(&tuple_of_index(size, arity, i))).collect();
        FinitaryOperation { size, arity, table }
    }

    pub fn projection(size: usize, arity: usize, i: usize) -> Self {
        assert!(i >= 1 && i <= arity);
        Self::from_fn(size, arity, |a| a[i - 1])
    }

    pub fn constant(size: usize, arity: usize, c: usize) -> Self {
        Self::from_fn(size, arity, |_| c)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn table(&self) -> &[usize] {
        &self.table
    }

    pub fn apply(&self, args: &[usize]) -> usize {
        debug_assert_eq!(args.len(), self.arity);
        self.table[tuple_index(self.size, args)]
    }

    /// Whether the value changes with coordinate `i` (1-based) for some
    /// choice of the other coordinates.
    pub fn depends_on(&self, i: usize) -> bool {
        if i == 0 || i > self.arity {
            return false;
        }
        let stride = usize::try_from(pow_u128(self.size, self.arity - i)).unwrap_or(usize::MAX);
        (0..self.table.len()).any(|idx| {
            let digit = (idx / stride) % self.size;
            digit > 0 && self.table[idx] != self.table[idx - digit * stride]
        })
    }

    /// Largest coordinate the operation depends on; 0 for constants.
    pub fn essential_arity(&self) -> usize {
        (1..=self.arity).rev().find(|&i| self.depends_on(i)).unwrap_or(0)
    }

    /// The same function with `extra` dummy coordinates appended.
    pub fn extend_dummy(&self, extra: usize) -> Self {
        let block = self.size.pow(extra as u32);
        let table = self.table.iter().flat_map(|&v| core::iter::repeat_n(v, block)).collect();
        FinitaryOperation { size: self.size, arity: self.arity + extra, table }
    }

    /// `f(g_1,…,g_m)` for `g_i` all of arity `n`.
    pub fn compose(&self, gs: &[FinitaryOperation]) -> FinitaryOperation {
        assert_eq!(gs.len(), self.arity);
        let n = gs.first().map_or(0, |g| g.arity);
        let len = usize::try_from(pow_u128(self.size, n)).expect("table fits in memory");
        let mut args = vec![0; self.arity];
        let table = (0..len)
            .map(|i| {
                for (slot, g) in args.iter_mut().zip(gs) {
                    *slot = g.table[i];
                }
                self.apply(&args)
            })
            .collect();
        FinitaryOperation { size: self.size, arity: n, table }
    }
}

pub type Assignment = BTreeMap<usize, usize>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteAlgebra {
    size: usize,
    ops: BTreeMap<String, FinitaryOperation>,
}

impl FiniteAlgebra {
    pub fn new(size: usize) -> Result<Self, AlgebraError> {
        if size == 0 {
            return Err(AlgebraError::EmptyCarrier);
        }
        Ok(FiniteAlgebra { size, ops: BTreeMap::new() })
    }

    /// Adds an operation given by its row-major table.
    pub fn with_table(mut self, name: &str, arity: usize, table: Vec<usize>) -> Result<Self, AlgebraError> {
        let op = FinitaryOperation::named(name, self.size, arity, table)?;
        self.ops.insert(name.into(), op);
        Ok(self)
    }

    pub fn with_op(mut self, name: &str, op: FinitaryOperation) -> Result<Self, AlgebraError> {
        if op.size != self.size {
            return Err(AlgebraError::TypeMismatch);
        }
        self.ops.insert(name.into(), op);
        Ok(self)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn op(&self, name: &str) -> Option<&FinitaryOperation> {
        self.ops.get(name)
    }

    pub fn ops(&self) -> impl Iterator<Item = (&str, &FinitaryOperation)> {
        self.ops.iter().map(|(s, f)| (s.as_str(), f))
    }

    pub fn finitary_type(&self) -> FinitaryType {
        FinitaryType::from_pairs(self.ops.iter().map(|(s, f)| (s.as_str(), f.arity)))
    }

    pub fn same_type(&self, other: &FiniteAlgebra) -> bool {
        self.finitary_type() == other.finitary_type()
    }

    pub fn eval_rho_term(&self, p: &RhoTerm, a: &Assignment) -> Result<usize, AlgebraError> {
        self.eval_with(p, &|i| a.get(&i).copied())
    }

    /// Evaluates with `v_i ↦ a[i-1]`.
    pub fn eval_slice(&self, p: &RhoTerm, a: &[usize]) -> Result<usize, AlgebraError> {
        self.eval_with(p, &|i| a.get(i - 1).copied())
    }

    fn eval_with(&self, p: &RhoTerm, a: &dyn Fn(usize) -> Option<usize>) -> Result<usize, AlgebraError> {
        match p {
            RhoTerm::Var(i) => match a(*i) {
                Some(v) if v < self.size => Ok(v),
                Some(v) => Err(AlgebraError::ElementOutOfRange(v)),
                None => Err(AlgebraError::UnassignedVariable(*i)),
            },
            RhoTerm::Node(s, children) => {
                let f = self.ops.get(s).ok_or_else(|| AlgebraError::UnknownSymbol(s.clone()))?;
                if f.arity != children.len() {
                    return Err(AlgebraError::UnknownSymbol(s.clone()));
                }
                let args = children
                    .iter()
                    .map(|c| self.eval_with(c, a))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(f.apply(&args))
            }
        }
    }

    /// Whether `p = q` holds under every assignment of `v_1..v_n`,
    /// `n` the largest variable index. Returns a failing assignment.
    pub fn check_rho_identity(&self, id: &RhoIdentity) -> Result<Option<Vec<usize>>, AlgebraError> {
        let n = id.lhs.max_var().max(id.rhs.max_var());
        let mut found = None;
        let mut err = None;
        for_each_tuple(self.size, n, |a| {
            if found.is_some() || err.is_some() {
                return;
            }
            match (self.eval_slice(&id.lhs, a), self.eval_slice(&id.rhs, a)) {
                (Ok(x), Ok(y)) if x != y => found = Some(a.to_vec()),
                (Err(e), _) | (_, Err(e)) => err = Some(e),
                _ => {}
            }
        });
        match err {
            Some(e) => Err(e),
            None => Ok(found),
        }
    }

    /// The `n`-ary term operations, as a closure from the projections.
    pub fn clone_level(&self, n: usize, element_bound: usize) -> Result<Vec<FinitaryOperation>, AlgebraError> {
        let c = self.clone_level_with_terms(n, element_bound)?;
        let mut ops: Vec<FinitaryOperation> = c
            .elements
            .into_iter()
            .map(|table| FinitaryOperation { size: self.size, arity: n, table })
            .collect();
        ops.sort();
        Ok(ops)
    }

    /// As [`FiniteAlgebra::clone_level`], keeping a defining term per operation.
    pub fn clone_level_with_terms(&self, n: usize, element_bound: usize) -> Result<Closure, AlgebraError> {
        let width = pow_u128(self.size, n);
        if width > DEFAULT_COLUMN_BOUND as u128 {
            return Err(AlgebraError::ResourceLimit {
                what: "table width",
                needed: width,
                bound: DEFAULT_COLUMN_BOUND,
            });
        }
        let gens = (1..=n)
            .map(|i| (FinitaryOperation::projection(self.size, n, i).table, RhoTerm::Var(i)))
            .collect();
        column_closure(&[self], gens, element_bound)
    }

    pub fn subalgebra_generated(&self, gens: &[usize]) -> BTreeSet<usize> {
        let mut members: Vec<usize> = Vec::new();
        let mut seen = vec![false; self.size];
        for &g in gens {
            if g < self.size && !seen[g] {
                seen[g] = true;
                members.push(g);
            }
        }
        let mut done = 0;
        let mut first = true;
        loop {
            let len = members.len();
            if !first && done == len {
                break;
            }
            let mut fresh = Vec::new();
            for f in self.ops.values() {
                for_each_tuple(len, f.arity, |idx| {
                    if first || idx.iter().any(|&i| i >= done) {
                        let args: Vec<usize> = idx.iter().map(|&i| members[i]).collect();
                        fresh.push(f.apply(&args));
                    }
                });
            }
            done = len;
            first = false;
            for v in fresh {
                if !seen[v] {
                    seen[v] = true;
                    members.push(v);
                }
            }
        }
        members.into_iter().collect()
    }

    /// The subalgebra on `elements` (assumed closed), relabelled in
    /// increasing order. Returns it with the relabelling `new -> old`.
    pub fn restrict(&self, elements: &BTreeSet<usize>) -> Result<(FiniteAlgebra, Vec<usize>), AlgebraError> {
        let old: Vec<usize> = elements.iter().copied().collect();
        let size = old.len();
        if size == 0 {
            return Err(AlgebraError::EmptyCarrier);
        }
        let mut new_of = BTreeMap::new();
        for (i, &a) in old.iter().enumerate() {
            new_of.insert(a, i);
        }
        let mut out = FiniteAlgebra::new(size)?;
        for (name, f) in &self.ops {
            let op = FinitaryOperation::from_fn(size, f.arity, |args| {
                let oargs: Vec<usize> = args.iter().map(|&a| old[a]).collect();
                new_of[&f.apply(&oargs)]
            });
            out.ops.insert(name.clone(), op);
        }
        Ok((out, old))
    }

    /// Direct product, elements encoded mixed-radix with the first factor
    /// most significant.
    pub fn product(factors: &[&FiniteAlgebra]) -> Result<FiniteAlgebra, AlgebraError> {
        let first = factors.first().ok_or(AlgebraError::EmptyCarrier)?;
        if factors.iter().any(|a| !a.same_type(first)) {
            return Err(AlgebraError::TypeMismatch);
        }
        let sizes: Vec<usize> = factors.iter().map(|a| a.size).collect();
        let total = sizes.iter().fold(1u128, |acc, &s| acc.saturating_mul(s as u128));
        if total > DEFAULT_ELEMENT_BOUND as u128 {
            return Err(AlgebraError::ResourceLimit {
                what: "product carrier",
                needed: total,
                bound: DEFAULT_ELEMENT_BOUND,
            });
        }
        let size = total as usize;
        let decode = |mut x: usize| {
            let mut out = vec![0; sizes.len()];
            for (slot, &s) in out.iter_mut().zip(&sizes).rev() {
                *slot = x % s;
                x /= s;
            }
            out
        };
        let encode = |xs: &[usize]| xs.iter().zip(&sizes).fold(0, |acc, (&x, &s)| acc * s + x);
        let mut out = FiniteAlgebra::new(size)?;
        for (name, f) in &first.ops {
            let op = FinitaryOperation::from_fn(size, f.arity, |args| {
                let coords: Vec<Vec<usize>> = args.iter().map(|&a| decode(a)).collect();
                let vals: Vec<usize> = factors
                    .iter()
                    .enumerate()
                    .map(|(j, a)| {
                        let row: Vec<usize> = coords.iter().map(|c| c[j]).collect();
                        a.ops[name].apply(&row)
                    })
                    .collect();
                encode(&vals)
            });
            out.ops.insert(name.clone(), op);
        }
        Ok(out)
    }

    pub fn power(&self, n: usize) -> Result<FiniteAlgebra, AlgebraError> {
        let factors: Vec<&FiniteAlgebra> = (0..n).map(|_| self).collect();
        Self::product(&factors)
    }

    /// A generating set of least size when the carrier is small enough to
    /// search subsets, else a greedy one.
    pub fn generating_set(&self) -> Vec<usize> {
        if self.size <= 10 {
            for k in 0..=self.size {
                let mut found = None;
                for_each_combination(self.size, k, |c| {
                    if found.is_none() && self.subalgebra_generated(c).len() == self.size {
                        found = Some(c.to_vec());
                    }
                });
                if let Some(c) = found {
                    return c;
                }
            }
        }
        let mut gens = Vec::new();
        let mut closed = self.subalgebra_generated(&gens);
        while closed.len() < self.size {
            let next = (0..self.size).find(|a| !closed.contains(a)).expect("carrier not covered");
            gens.push(next);
            closed = self.subalgebra_generated(&gens);
        }
        gens
    }

    /// Checks that `map` is a homomorphism `self → target`, returning a
    /// failing `(symbol, arguments)` pair otherwise.
    pub fn check_homomorphism(&self, target: &FiniteAlgebra, map: &[usize]) -> Option<(String, Vec<usize>)> {
        for (name, f) in &self.ops {
            let g = &target.ops[name];
            for (i, &v) in f.table.iter().enumerate() {
                let args = tuple_of_index(self.size, f.arity, i);
                let image: Vec<usize> = args.iter().map(|&a| map[a]).collect();
                if map[v] != g.apply(&image) {
                    return Some((name.clone(), args));
                }
            }
        }
        None
    }

    pub fn homomorphism_exists_onto(&self, target: &FiniteAlgebra) -> Result<Option<Vec<usize>>, AlgebraError> {
        if !self.same_type(target) {
            return Err(AlgebraError::TypeMismatch);
        }
        Ok(self.search_homomorphism(target, true, false))
    }

    pub fn find_isomorphism(&self, target: &FiniteAlgebra) -> Result<Option<Vec<usize>>, AlgebraError> {
        if !self.same_type(target) {
            return Err(AlgebraError::TypeMismatch);
        }
        if self.size != target.size {
            return Ok(None);
        }
        Ok(self.search_homomorphism(target, true, true))
    }

    /// Branches over images of a generating set; the rest of the map is
    /// forced by the operations.
    fn search_homomorphism(&self, target: &FiniteAlgebra, onto: bool, injective: bool) -> Option<Vec<usize>> {
        let gens = self.generating_set();
        let mut found = None;
        for_each_tuple(target.size, gens.len(), |images| {
            if found.is_some() {
                return;
            }
            if let Some(map) = self.extend_map(target, &gens, images) {
                let hit: BTreeSet<usize> = map.iter().copied().collect();
                if (!onto || hit.len() == target.size) && (!injective || hit.len() == self.size) {
                    found = Some(map);
                }
            }
        });
        found
    }

    /// The unique homomorphism extending `gens[i] ↦ images[i]`, if any.
    /// `self` must be generated by `gens`.
    pub fn extend_map(&self, target: &FiniteAlgebra, gens: &[usize], images: &[usize]) -> Option<Vec<usize>> {
        let mut map: Vec<Option<usize>> = vec![None; self.size];
        for (&g, &v) in gens.iter().zip(images) {
            match map[g] {
                Some(w) if w != v => return None,
                _ => map[g] = Some(v),
            }
        }
        // mapped elements in insertion order; tuples inside `order[..done]` are handled
        let mut order: Vec<usize> = Vec::new();
        for &g in gens {
            if !order.contains(&g) {
                order.push(g);
            }
        }
        let mut done = 0;
        let mut first = true;
        while first || done < order.len() {
            let len = order.len();
            let mut fresh = Vec::new();
            for (name, f) in &self.ops {
                let g = &target.ops[name];
                for_each_tuple(len, f.arity, |idx| {
                    if first || idx.iter().any(|&i| i >= done) {
                        let args: Vec<usize> = idx.iter().map(|&i| order[i]).collect();
                        let image: Vec<usize> = args.iter().map(|&a| map[a].expect("mapped")).collect();
                        fresh.push((f.apply(&args), g.apply(&image)));
                    }
                });
            }
            done = len;
            first = false;
            for (r, want) in fresh {
                match map[r] {
                    Some(v) if v != want => return None,
                    Some(_) => {}
                    None => {
                        map[r] = Some(want);
                        order.push(r);
                    }
                }
            }
        }
        map.into_iter().collect()
    }
}

/// Calls `f` on every strictly increasing `k`-subset of `0..n`.
pub(crate) fn for_each_combination(n: usize, k: usize, mut f: impl FnMut(&[usize])) {
    if k > n {
        return;
    }
    let mut c: Vec<usize> = (0..k).collect();
    loop {
        f(&c);
        // rightmost position that can still advance
        let mut i = k;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if c[i] < n - k + i {
                break;
            }
        }
        c[i] += 1;
        for j in i + 1..k {
            c[j] = c[j - 1] + 1;
        }
    }
}

/// Elements of a column closure with a defining term each.
#[derive(Clone, Debug)]
pub struct Closure {
    pub elements: Vec<Vec<usize>>,
    pub terms: Vec<RhoTerm>,
}

/// Least set of columns containing `gens` and closed under the operations
/// of `algebras` applied row by row. Row `j` of a column belongs to the
/// algebra owning that row; rows are laid out algebra after algebra in
/// blocks of `block_len[i]`.
fn column_closure(
    algebras: &[&FiniteAlgebra],
    gens: Vec<(Vec<usize>, RhoTerm)>,
    element_bound: usize,
) -> Result<Closure, AlgebraError> {
    let width = gens.first().map(|g| g.0.len());
    column_closure_blocks(algebras, None, width, gens, element_bound)
}

pub(crate) fn column_closure_blocks(
    algebras: &[&FiniteAlgebra],
    blocks: Option<&[usize]>,
    width: Option<usize>,
    gens: Vec<(Vec<usize>, RhoTerm)>,
    element_bound: usize,
) -> Result<Closure, AlgebraError> {
    // row -> algebra index
    let width = width.unwrap_or_else(|| blocks.map_or(1, |b| b.iter().sum()));
    let owner: Vec<usize> = match blocks {
        Some(b) => b.iter().enumerate().flat_map(|(i, &n)| core::iter::repeat_n(i, n)).collect(),
        None => vec![0; width],
    };
    let ty = algebras.first().map(|a| a.finitary_type()).unwrap_or_default();
    let mut elements: Vec<Vec<usize>> = Vec::new();
    let mut terms: Vec<RhoTerm> = Vec::new();
    let mut index: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
    for (col, t) in gens {
        if !index.contains_key(&col) {
            index.insert(col.clone(), elements.len());
            elements.push(col);
            terms.push(t);
        }
    }
    let mut done = 0;
    let mut first = true;
    loop {
        let len = elements.len();
        if !first && done == len {
            break;
        }
        let mut fresh: BTreeMap<Vec<usize>, RhoTerm> = BTreeMap::new();
        let mut over = false;
        for (name, arity) in ty.iter() {
            let tables: Vec<&FinitaryOperation> = algebras.iter().map(|a| &a.ops[name]).collect();
            let mut args = vec![0usize; arity];
            for_each_tuple(len, arity, |idx| {
                if over || !(first || idx.iter().any(|&i| i >= done)) {
                    return;
                }
                let col: Vec<usize> = (0..width)
                    .map(|row| {
                        for (slot, &i) in args.iter_mut().zip(idx) {
                            *slot = elements[i][row];
                        }
                        tables[owner[row]].apply(&args)
                    })
                    .collect();
                if !index.contains_key(&col) && !fresh.contains_key(&col) {
                    let t = RhoTerm::Node(name.into(), idx.iter().map(|&i| terms[i].clone()).collect());
                    fresh.insert(col, t);
                    over = len + fresh.len() > element_bound || (len + fresh.len()) * width > CELL_BOUND;
                }
            });
        }
        let total = len + fresh.len();
        if total > element_bound {
            return Err(AlgebraError::ResourceLimit { what: "closure size", needed: total as u128, bound: element_bound });
        }
        if total * width > CELL_BOUND {
            return Err(AlgebraError::ResourceLimit {
                what: "closure cells",
                needed: (total * width) as u128,
                bound: CELL_BOUND,
            });
        }
        done = len;
        first = false;
        // BTreeMap order keeps the result deterministic
        for (col, t) in fresh {
            index.insert(col.clone(), elements.len());
            elements.push(col);
            terms.push(t);
        }
    }
    Ok(Closure { elements, terms })
}

/// The `k`-generated free algebra of the variety generated by `sources`.
#[derive(Clone, Debug)]
pub struct FreeAlgebra {
    pub algebra: FiniteAlgebra,
    /// Element indices of the free generators `v_1..v_k`.
    pub generators: Vec<usize>,
    /// A term over `v_1..v_k` naming each element.
    pub terms: Vec<RhoTerm>,
}

pub fn free_algebra_in_var(source: &FiniteAlgebra, k: usize) -> Result<FreeAlgebra, AlgebraError> {
    free_algebra_in_var_multi(&[source], k, DEFAULT_COLUMN_BOUND, DEFAULT_ELEMENT_BOUND)
}

/// Free algebra over `k` generators in `Var(sources)`, built as the
/// subalgebra of `∏_i S_i^(S_i^k)` generated by the projection columns.
pub fn free_algebra_in_var_multi(
    sources: &[&FiniteAlgebra],
    k: usize,
    column_bound: usize,
    element_bound: usize,
) -> Result<FreeAlgebra, AlgebraError> {
    if let Some(first) = sources.first() {
        if sources.iter().any(|a| !a.same_type(first)) {
            return Err(AlgebraError::TypeMismatch);
        }
    }
    let widths: Vec<u128> = sources.iter().map(|a| pow_u128(a.size, k)).collect();
    let needed = widths.iter().fold(0u128, |acc, &w| acc.saturating_add(w));
    if needed > column_bound as u128 {
        return Err(AlgebraError::ResourceLimit { what: "free algebra columns", needed, bound: column_bound });
    }
    let blocks: Vec<usize> = widths.iter().map(|&w| w as usize).collect();
    let width: usize = blocks.iter().sum();
    let gens: Vec<(Vec<usize>, RhoTerm)> = (1..=k)
        .map(|i| {
            let col = sources
                .iter()
                .flat_map(|a| FinitaryOperation::projection(a.size, k, i).table)
                .collect();
            (col, RhoTerm::Var(i))
        })
        .collect();
    let gen_columns: Vec<Vec<usize>> = gens.iter().map(|(c, _)| c.clone()).collect();
    let closure = if sources.is_empty() {
        // the trivial variety: every column is empty, so all terms coincide
        Closure { elements: vec![Vec::new()], terms: vec![RhoTerm::Var(1)] }
    } else {
        column_closure_blocks(sources, Some(&blocks), Some(width), gens, element_bound)?
    };
    let Closure { elements, terms } = closure;
    let mut index = BTreeMap::new();
    for (i, c) in elements.iter().enumerate() {
        index.insert(c.clone(), i);
    }
    let size = elements.len();
    let owner: Vec<&FiniteAlgebra> = sources
        .iter()
        .zip(&blocks)
        .flat_map(|(a, &n)| core::iter::repeat_n(*a, n))
        .collect();
    let mut algebra = FiniteAlgebra::new(size)?;
    let ty = sources.first().map(|a| a.finitary_type()).unwrap_or_default();
    for (name, arity) in ty.iter() {
        let op = FinitaryOperation::from_fn(size, arity, |args| {
            let col: Vec<usize> = (0..width)
                .map(|row| {
                    let a: Vec<usize> = args.iter().map(|&x| elements[x][row]).collect();
                    owner[row].ops[name].apply(&a)
                })
                .collect();
            index[&col]
        });
        algebra.ops.insert(name.into(), op);
    }
    let generators = if sources.is_empty() { vec![0; k] } else { gen_columns.iter().map(|c| index[c]).collect() };
    Ok(FreeAlgebra { algebra, generators, terms })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum HspAnswer {
    Member {
        /// Generators of the target that the free generators map to.
        target_generators: Vec<usize>,
        free_size: usize,
        /// The surjection from the free algebra onto the target.
        surjection: Vec<usize>,
    },
    NotMember {
        /// Holds in every source algebra, fails in the target.
        separator: RhoIdentity,
        /// Values of `v_1..v_k` in the target witnessing failure.
        assignment: Vec<usize>,
    },
}

impl HspAnswer {
    pub fn is_member(&self) -> bool {
        matches!(self, HspAnswer::Member { .. })
    }
}

pub fn hsp_member(source: &FiniteAlgebra, target: &FiniteAlgebra) -> Result<HspAnswer, AlgebraError> {
    hsp_member_multi(&[source], target, DEFAULT_COLUMN_BOUND)
}

/// Whether `target ∈ HSP(sources)`. A `k`-generated target lies in the
/// variety iff sending the free generators of `F(k)` onto its generators
/// extends to a homomorphism.
pub fn hsp_member_multi(
    sources: &[&FiniteAlgebra],
    target: &FiniteAlgebra,
    column_bound: usize,
) -> Result<HspAnswer, AlgebraError> {
    if sources.iter().any(|a| !a.same_type(target)) {
        return Err(AlgebraError::TypeMismatch);
    }
    let gens = target.generating_set();
    let k = gens.len();
    let free = free_algebra_in_var_multi(sources, k, column_bound, DEFAULT_ELEMENT_BOUND)?;
    let f = &free.algebra;
    // image of each free element: its term evaluated at the target generators
    let image = free
        .terms
        .iter()
        .map(|t| target.eval_slice(t, &gens))
        .collect::<Result<Vec<_>, _>>()
        .or_else(|e| match e {
            // k = 0 with a trivial variety leaves v1 unassigned
            AlgebraError::UnassignedVariable(_) => Ok(vec![0; f.size()]),
            e => Err(e),
        })?;
    // free generators identified in the variety must stay identified
    for (j, &el) in free.generators.iter().enumerate() {
        if k > 0 && image[el] != gens[j] {
            let separator = RhoIdentity { lhs: free.terms[el].clone(), rhs: RhoTerm::Var(j + 1) };
            return Ok(HspAnswer::NotMember { separator, assignment: gens });
        }
    }
    if let Some((name, args)) = f.check_homomorphism(target, &image) {
        let op = f.op(&name).expect("same type");
        let r = op.apply(&args);
        let lhs = RhoTerm::Node(name, args.iter().map(|&a| free.terms[a].clone()).collect());
        let rhs = free.terms[r].clone();
        return Ok(HspAnswer::NotMember { separator: RhoIdentity { lhs, rhs }, assignment: gens });
    }
    if sources.is_empty() && target.size() > 1 {
        return Ok(HspAnswer::NotMember {
            separator: RhoIdentity { lhs: RhoTerm::Var(1), rhs: RhoTerm::Var(2) },
            assignment: vec![0, 1],
        });
    }
    Ok(HspAnswer::Member { target_generators: gens, free_size: f.size(), surjection: image })
}

/// Whether `t^R ↦ t^S` is a well-defined clone homomorphism, i.e. every
/// identity of `R` holds in `S`.
pub fn natural_clone_hom_exists(r: &FiniteAlgebra, s: &FiniteAlgebra) -> Result<bool, AlgebraError> {
    Ok(hsp_member(r, s)?.is_member())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn a(pairs: &[(usize, usize)]) -> Assignment {
        pairs.iter().copied().collect()
    }

    #[test]
    fn evaluation() {
        let s2 = fixtures::semilattice2();
        let meet = |x, y| RhoTerm::node("s", vec![x, y]);
        let p = meet(RhoTerm::var(1), RhoTerm::var(2));
        assert_eq!(s2.eval_rho_term(&p, &a(&[(1, 1), (2, 0)])).unwrap(), 0);
        assert_eq!(s2.eval_rho_term(&RhoTerm::var(3), &a(&[(3, 1)])).unwrap(), 1);
        let p = meet(RhoTerm::var(1), meet(RhoTerm::var(1), RhoTerm::var(2)));
        assert_eq!(s2.eval_rho_term(&p, &a(&[(1, 1), (2, 1)])).unwrap(), 1);
        assert_eq!(
            s2.eval_rho_term(&RhoTerm::var(2), &a(&[(1, 1)])),
            Err(AlgebraError::UnassignedVariable(2))
        );
    }

    #[test]
    fn table_validation() {
        let err = FiniteAlgebra::new(2).unwrap().with_table("s", 2, vec![0, 0, 1]).unwrap_err();
        assert!(matches!(err, AlgebraError::TableSize { expected: 4, found: 3, .. }));
        let err = FiniteAlgebra::new(2).unwrap().with_table("s", 1, vec![0, 2]).unwrap_err();
        assert_eq!(err, AlgebraError::OutOfRange { op: "s".into(), value: 2 });
    }

    #[test]
    fn clone_levels() {
        assert_eq!(fixtures::semilattice2().clone_level(2, 1000).unwrap().len(), 3);
        assert_eq!(fixtures::semilattice2().clone_level(3, 1000).unwrap().len(), 7);
        assert_eq!(fixtures::negation2().clone_level(1, 1000).unwrap().len(), 2);
    }

    #[test]
    fn subalgebras() {
        let s2 = fixtures::semilattice2();
        assert_eq!(s2.subalgebra_generated(&[1]), [1].into_iter().collect());
        assert_eq!(s2.subalgebra_generated(&[0, 1]).len(), 2);
        assert_eq!(fixtures::chain3().subalgebra_generated(&[2]), [2].into_iter().collect());
        assert!(s2.subalgebra_generated(&[]).is_empty());
    }

    #[test]
    fn homomorphisms() {
        let s2 = fixtures::semilattice2();
        let one = fixtures::trivial(&s2);
        assert!(s2.homomorphism_exists_onto(&s2).unwrap().is_some());
        assert_eq!(s2.homomorphism_exists_onto(&one).unwrap(), Some(vec![0, 0]));
        assert!(one.homomorphism_exists_onto(&s2).unwrap().is_none());
        let join = fixtures::join2();
        assert_eq!(s2.find_isomorphism(&join).unwrap(), Some(vec![1, 0]));
        assert_eq!(
            s2.homomorphism_exists_onto(&fixtures::negation2()),
            Err(AlgebraError::TypeMismatch)
        );
    }

    #[test]
    fn free_algebras() {
        let s2 = fixtures::semilattice2();
        assert_eq!(free_algebra_in_var(&s2, 1).unwrap().algebra.size(), 1);
        assert_eq!(free_algebra_in_var(&s2, 2).unwrap().algebra.size(), 3);
        assert_eq!(free_algebra_in_var(&s2, 3).unwrap().algebra.size(), 7);
        assert_eq!(free_algebra_in_var(&fixtures::negation2(), 1).unwrap().algebra.size(), 2);
        let err = free_algebra_in_var_multi(&[&s2], 21, DEFAULT_COLUMN_BOUND, DEFAULT_ELEMENT_BOUND);
        assert!(matches!(err, Err(AlgebraError::ResourceLimit { bound, .. }) if bound == DEFAULT_COLUMN_BOUND));
    }

    #[test]
    fn hsp_examples() {
        let s2 = fixtures::semilattice2();
        assert!(hsp_member(&s2, &s2).unwrap().is_member());
        assert!(hsp_member(&s2, &fixtures::chain3()).unwrap().is_member());
        match hsp_member(&s2, &fixtures::groupoid_nc()).unwrap() {
            HspAnswer::NotMember { separator, assignment } => {
                assert!(s2.check_rho_identity(&separator).unwrap().is_none());
                let g = fixtures::groupoid_nc();
                let l = g.eval_slice(&separator.lhs, &assignment).unwrap();
                let r = g.eval_slice(&separator.rhs, &assignment).unwrap();
                assert_ne!(l, r);
            }
            other => panic!("expected a separator, got {other:?}"),
        }
        assert!(natural_clone_hom_exists(&s2, &fixtures::trivial(&s2)).unwrap());
        assert!(!natural_clone_hom_exists(&s2, &fixtures::groupoid_nc()).unwrap());
    }

    #[test]
    fn products() {
        let s2 = fixtures::semilattice2();
        let p = s2.power(2).unwrap();
        assert_eq!(p.size(), 4);
        // (1,0) ∧ (0,1) = (0,0)
        assert_eq!(p.op("s").unwrap().apply(&[2, 1]), 0);
        assert_eq!(p.op("s").unwrap().apply(&[3, 2]), 2);
    }

    #[test]
    fn combinations() {
        let mut seen = Vec::new();
        for_each_combination(4, 2, |c| seen.push(c.to_vec()));
        assert_eq!(seen.len(), 6);
        assert_eq!(seen[0], vec![0, 1]);
        assert_eq!(seen[5], vec![2, 3]);
        let mut n = 0;
        for_each_combination(3, 0, |_| n += 1);
        assert_eq!(n, 1);
    }

    #[test]
    fn dependence() {
        let s2 = fixtures::semilattice2();
        let f = s2.op("s").unwrap();
        assert!(f.depends_on(1) && f.depends_on(2));
        assert_eq!(f.extend_dummy(1).essential_arity(), 2);
        assert_eq!(FinitaryOperation::constant(3, 2, 1).essential_arity(), 0);
        assert_eq!(FinitaryOperation::projection(3, 3, 2).essential_arity(), 2);
    }
}
