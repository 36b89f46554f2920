//! Clone algebras on a window: finite tables for `e_1..e_N` and
//! `q_0..q_N`, functional clone algebras generated over a t-algebra, and
//! the t-algebra living under a clone algebra.
//!
//! A window of size `N` keeps the elements of dimension at most `N`. That
//! set contains `e_1..e_N` and is closed under every `q_n` with `n ≤ N`, so
//! the axioms can be checked on it for all indices up to `N`.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::algebra::{
    column_closure_blocks, pow_u128, tuple_of_index, AlgebraError, FinitaryOperation, FiniteAlgebra,
};
use crate::hyperterm::{enumerate::for_each_tuple, q_compose, star, Head, HeadSpec, HyperTerm, RhoTerm};
use crate::talgebra::{Dimension, TAlgebra, TError, TOperation};
use crate::thread::{Thread, Trace};

/// Largest `q`-table the exporter will build, in entries.
pub const TABLE_BOUND: u128 = 1 << 24;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CloneError {
    Shape(String),
    /// An operation's dimension does not fit in the window.
    WindowTooSmall { symbol: String, dimension: Option<usize>, window: usize },
    CapExceeded { cap: usize },
    TableTooLarge(u128),
    TAlgebra(TError),
}

impl fmt::Display for CloneError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CloneError::Shape(s) => write!(f, "malformed clone algebra: {s}"),
            CloneError::WindowTooSmall { symbol, dimension: Some(d), window } => {
                write!(f, "`{symbol}` has dimension {d}, window is {window}")
            }
            CloneError::WindowTooSmall { symbol, dimension: None, window } => {
                write!(f, "`{symbol}` has no finite dimension within window {window}")
            }
            CloneError::CapExceeded { cap } => write!(f, "closure exceeded the cap of {cap} elements"),
            CloneError::TableTooLarge(n) => write!(f, "q-table with {n} entries exceeds the bound"),
            CloneError::TAlgebra(e) => write!(f, "{e}"),
        }
    }
}

impl From<TError> for CloneError {
    fn from(e: TError) -> Self {
        CloneError::TAlgebra(e)
    }
}

impl From<AlgebraError> for CloneError {
    fn from(e: AlgebraError) -> Self {
        match e {
            AlgebraError::ResourceLimit { what: "closure size", bound, .. } => CloneError::CapExceeded { cap: bound },
            e => CloneError::TAlgebra(TError::Algebra(e)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteCloneAlgebra {
    size: usize,
    /// `e_1..e_N`.
    designated: Vec<usize>,
    tau: BTreeMap<String, usize>,
    /// `q[n]` has arity `n + 1`.
    q: Vec<FinitaryOperation>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Axiom {
    C1,
    C2,
    C3,
    C4,
    C5,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub axiom: Axiom,
    pub n: usize,
    /// The second index of C2 (`j`) or C4 (`k`).
    pub index: Option<usize>,
    pub args: Vec<usize>,
    pub lhs: usize,
    pub rhs: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AxiomReport {
    pub limit: usize,
    pub instances: u64,
    pub violation_count: u64,
    /// The first violations found, at most [`AxiomReport::KEPT`].
    pub violations: Vec<Violation>,
}

impl AxiomReport {
    pub const KEPT: usize = 64;

    pub fn passed(&self) -> bool {
        self.violation_count == 0
    }

    fn record(&mut self, v: Option<Violation>) {
        self.instances += 1;
        if let Some(v) = v {
            self.violation_count += 1;
            if self.violations.len() < Self::KEPT {
                self.violations.push(v);
            }
        }
    }
}

impl FiniteCloneAlgebra {
    pub fn new(
        size: usize,
        designated: Vec<usize>,
        tau: BTreeMap<String, usize>,
        q: Vec<FinitaryOperation>,
    ) -> Result<Self, CloneError> {
        let n = designated.len();
        if size == 0 {
            return Err(CloneError::Shape("empty carrier".into()));
        }
        if q.len() != n + 1 {
            return Err(CloneError::Shape(format!("expected q_0..q_{n}, got {} tables", q.len())));
        }
        for (i, f) in q.iter().enumerate() {
            if f.size() != size || f.arity() != i + 1 {
                return Err(CloneError::Shape(format!("q_{i} must have arity {} over the carrier", i + 1)));
            }
        }
        if let Some(v) = designated.iter().chain(tau.values()).find(|&&v| v >= size) {
            return Err(CloneError::Shape(format!("element {v} outside the carrier")));
        }
        Ok(FiniteCloneAlgebra { size, designated, tau, q })
    }

    /// The projection clone algebra on `{1..m}` (elements `0..m`): `e_i = i`
    /// and `q_n(i, k_1,…,k_n) = k_i` for `i ≤ n`, `i` otherwise.
    pub fn projection_window(m: usize) -> FiniteCloneAlgebra {
        let q = (0..=m)
            .map(|n| FinitaryOperation::from_fn(m, n + 1, |a| if a[0] < n { a[1 + a[0]] } else { a[0] }))
            .collect();
        FiniteCloneAlgebra::new(m, (0..m).collect(), BTreeMap::new(), q).expect("well formed")
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn dim_bound(&self) -> usize {
        self.designated.len()
    }

    pub fn designated(&self) -> &[usize] {
        &self.designated
    }

    /// `e_i`, `1 ≤ i ≤ N`.
    pub fn e(&self, i: usize) -> usize {
        self.designated[i - 1]
    }

    pub fn tau(&self) -> &BTreeMap<String, usize> {
        &self.tau
    }

    pub fn q_table(&self, n: usize) -> &FinitaryOperation {
        &self.q[n]
    }

    /// `q_n(x, ȳ)`; for `n > N` the arguments past `N` are dropped, which
    /// is sound when every element has dimension at most `N`.
    pub fn q(&self, x: usize, ys: &[usize]) -> usize {
        let n = ys.len().min(self.dim_bound());
        let idx = ys[..n].iter().fold(x, |acc, &y| acc * self.size + y);
        self.q[n].table()[idx]
    }

    /// Checks C1–C5 for every instance with indices `≤ min(limit, N)`.
    pub fn validate_axioms(&self, limit: usize) -> AxiomReport {
        let l = limit.min(self.dim_bound());
        let size = self.size;
        let mut report = AxiomReport { limit: l, ..AxiomReport::default() };
        let es = |n: usize| -> Vec<usize> { (1..=n).map(|i| self.e(i)).collect() };
        for n in 0..=l {
            // C1
            for i in 1..=n {
                for_each_tuple(size, n, |ys| {
                    let lhs = self.q(self.e(i), ys);
                    report.record((lhs != ys[i - 1]).then(|| Violation {
                        axiom: Axiom::C1,
                        n,
                        index: Some(i),
                        args: ys.to_vec(),
                        lhs,
                        rhs: ys[i - 1],
                    }));
                });
            }
            // C2
            for j in n + 1..=self.dim_bound() {
                for_each_tuple(size, n, |ys| {
                    let lhs = self.q(self.e(j), ys);
                    report.record((lhs != self.e(j)).then(|| Violation {
                        axiom: Axiom::C2,
                        n,
                        index: Some(j),
                        args: ys.to_vec(),
                        lhs,
                        rhs: self.e(j),
                    }));
                });
            }
            // C3
            let en = es(n);
            for x in 0..size {
                let lhs = self.q(x, &en);
                report.record((lhs != x).then(|| Violation { axiom: Axiom::C3, n, index: None, args: vec![x], lhs, rhs: x }));
            }
            // C4
            for k in n + 1..=l {
                let tail: Vec<usize> = (n + 1..=k).map(|i| self.e(i)).collect();
                for_each_tuple(size, n + 1, |xy| {
                    let lhs = self.q(xy[0], &xy[1..]);
                    let mut long = xy[1..].to_vec();
                    long.extend_from_slice(&tail);
                    let rhs = self.q(xy[0], &long);
                    report.record((lhs != rhs).then(|| Violation {
                        axiom: Axiom::C4,
                        n,
                        index: Some(k),
                        args: xy.to_vec(),
                        lhs,
                        rhs,
                    }));
                });
            }
            // C5
            let mut inner = vec![0; n];
            for_each_tuple(size, 2 * n + 1, |a| {
                let (x, rest) = (a[0], &a[1..]);
                let (ys, zs) = rest.split_at(n);
                let lhs = self.q(self.q(x, ys), zs);
                for (slot, &y) in inner.iter_mut().zip(ys) {
                    *slot = self.q(y, zs);
                }
                let rhs = self.q(x, &inner);
                report.record((lhs != rhs).then(|| Violation { axiom: Axiom::C5, n, index: None, args: a.to_vec(), lhs, rhs }));
            });
        }
        report
    }

    /// Largest `n ≤ N` with `q_n(a, e_1,…,e_{n-1}, b) ≠ a` for some `b`.
    pub fn element_dimension(&self, a: usize) -> usize {
        (1..=self.dim_bound())
            .rev()
            .find(|&n| {
                let mut args: Vec<usize> = (1..n).map(|i| self.e(i)).collect();
                args.push(0);
                (0..self.size).any(|b| {
                    args[n - 1] = b;
                    self.q(a, &args) != a
                })
            })
            .unwrap_or(0)
    }

    /// The algebra `(C, q_0..q_N, e_1..e_N, σ^C)` with every constant as a
    /// nullary operation, for reuse of the finitary machinery.
    pub fn as_finite_algebra(&self) -> FiniteAlgebra {
        let mut a = FiniteAlgebra::new(self.size).expect("nonempty");
        for (n, f) in self.q.iter().enumerate() {
            a = a.with_op(&format!("q{n}"), f.clone()).expect("same size");
        }
        for (i, &e) in self.designated.iter().enumerate() {
            a = a.with_op(&format!("e{}", i + 1), FinitaryOperation::constant(self.size, 0, e)).expect("same size");
        }
        for (s, &c) in &self.tau {
            a = a.with_op(&format!("tau:{s}"), FinitaryOperation::constant(self.size, 0, c)).expect("same size");
        }
        a
    }

    /// Whether the constants `e_i` and `σ^C` generate everything.
    pub fn is_minimal(&self) -> bool {
        self.as_finite_algebra().subalgebra_generated(&[]).len() == self.size
    }

    /// A bijection preserving `e_i`, `σ^C` and every `q_n`, if one exists.
    pub fn isomorphism(&self, other: &FiniteCloneAlgebra) -> Option<Vec<usize>> {
        if self.size != other.size
            || self.dim_bound() != other.dim_bound()
            || !self.tau.keys().eq(other.tau.keys())
        {
            return None;
        }
        self.as_finite_algebra().find_isomorphism(&other.as_finite_algebra()).ok().flatten()
    }

    /// The t-algebra under `C`: carrier `C`, trace the class of
    /// `ε = (e_1,…,e_N, e_N, e_N, …)`, and `σ ↦ (s ↦ q_N(σ^C, s_1,…,s_N))`.
    /// These read only the first `N` coordinates, so they are stored as top
    /// extensions.
    pub fn under_t_algebra(&self) -> TAlgebra {
        let n = self.dim_bound();
        let eps = Thread::new(self.designated.clone(), vec![self.designated.last().copied().unwrap_or(0)])
            .expect("nonempty cycle");
        let mut a = TAlgebra::new(self.size, Trace::basic(eps)).expect("values in carrier");
        for (s, &c) in &self.tau {
            let table = FinitaryOperation::from_fn(self.size, n, |w| self.q(c, w));
            a = a.with_op(s, TOperation::TopExt(table)).expect("same size");
        }
        a
    }
}

/// A functional clone algebra over a t-algebra, restricted to a window.
/// Each element is stored by its values on `base[w]` for every base and
/// every `w` of length `N`.
#[derive(Clone, Debug)]
pub struct GeneratedFca {
    pub value_algebra: TAlgebra,
    pub window: usize,
    pub bases: Vec<Thread>,
    pub columns: Vec<Vec<usize>>,
    /// A hyperterm naming each element; constants appear as generator heads `_c<k>`.
    pub witnesses: Vec<HyperTerm>,
    pub designated: Vec<usize>,
    pub tau: BTreeMap<String, usize>,
    index: BTreeMap<Vec<usize>, usize>,
}

pub fn constant_name(c: usize) -> String {
    format!("_c{c}")
}

fn rho_to_hyper(p: &RhoTerm) -> HyperTerm {
    match p {
        RhoTerm::Node(s, c) if s.starts_with("_c") && c.is_empty() => {
            HyperTerm::Apply(Head::Generator(s.clone()), Vec::new())
        }
        RhoTerm::Node(s, c) => HyperTerm::op(s.clone(), c.iter().map(rho_to_hyper).collect()),
        RhoTerm::Var(i) => HyperTerm::Designated(*i),
    }
}

impl GeneratedFca {
    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    fn block(&self) -> usize {
        self.value_algebra.size().pow(self.window as u32)
    }

    pub fn position(&self, column: &[usize]) -> Option<usize> {
        self.index.get(column).copied()
    }

    /// Element `i` as a t-operation of the value algebra.
    pub fn element_op(&self, i: usize) -> TOperation {
        let size = self.value_algebra.size();
        let block = self.block();
        let tables: Vec<FinitaryOperation> = (0..self.bases.len())
            .map(|j| {
                FinitaryOperation::new(size, self.window, self.columns[i][j * block..(j + 1) * block].to_vec())
                    .expect("column shape")
            })
            .collect();
        if tables.len() == 1 {
            TOperation::TopExt(tables.into_iter().next().expect("one table"))
        } else {
            TOperation::Piecewise(self.bases.iter().cloned().zip(tables).collect())
        }
    }

    /// Column of `q_n(x, ȳ)`.
    pub fn q_column(&self, x: usize, ys: &[usize]) -> Vec<usize> {
        let size = self.value_algebra.size();
        let block = self.block();
        let n = ys.len();
        assert!(n <= self.window, "q_n beyond the window");
        // w = (y_1[r], …, y_n[r], r_{n+1}, …, r_N): the suffix of r keeps its digits
        let tail = size.pow((self.window - n) as u32);
        let strides: Vec<usize> = (0..n).map(|k| size.pow((self.window - 1 - k) as u32)).collect();
        let mut out = Vec::with_capacity(self.columns[x].len());
        for j in 0..self.bases.len() {
            for r in 0..block {
                let at = j * block + r;
                let w = ys.iter().zip(&strides).fold(r % tail, |acc, (&y, &st)| acc + self.columns[y][at] * st);
                out.push(self.columns[x][j * block + w]);
            }
        }
        out
    }

    /// Tables of `q_0..q_N` over the element indices.
    pub fn export(&self) -> Result<FiniteCloneAlgebra, CloneError> {
        let m = self.len();
        let entries = pow_u128(m, self.window + 1);
        if entries > TABLE_BOUND {
            return Err(CloneError::TableTooLarge(entries));
        }
        let mut q = Vec::with_capacity(self.window + 1);
        for n in 0..=self.window {
            let mut table = Vec::with_capacity(pow_u128(m, n + 1) as usize);
            for_each_tuple(m, n + 1, |a| {
                let col = self.q_column(a[0], &a[1..]);
                table.push(self.index[&col]);
            });
            q.push(FinitaryOperation::new(m, n + 1, table)?);
        }
        FiniteCloneAlgebra::new(m, self.designated.clone(), self.tau.clone(), q)
    }

    /// Whether every element of `other` (same value algebra and window) occurs here.
    pub fn contains_all(&self, other: &GeneratedFca) -> bool {
        other.columns.iter().all(|c| self.index.contains_key(c))
    }

    /// Rich: the polynomial clone algebra over the same value algebra is contained.
    pub fn is_rich(&self, size_cap: usize) -> Result<bool, CloneError> {
        let poly = polynomial_clone_algebra(&self.value_algebra, self.window, size_cap)?;
        Ok(self.contains_all(&poly))
    }
}

fn window_bases(a: &TAlgebra) -> Vec<Thread> {
    match a.trace() {
        // only the window is read, so one base stands for the whole trace
        Trace::Complete => vec![Thread::constant(0)],
        t => t.bases().expect("not complete"),
    }
}

fn generate(a: &TAlgebra, window: usize, constants: bool, size_cap: usize) -> Result<GeneratedFca, CloneError> {
    let size = a.size();
    let bases = window_bases(a);
    let block = pow_u128(size, window);
    let width = block.saturating_mul(bases.len() as u128);
    if width > TABLE_BOUND {
        return Err(CloneError::TableTooLarge(width));
    }
    let block = block as usize;
    let mut dims = BTreeMap::new();
    for (s, _) in a.ops() {
        match a.dimension(s, window + 1)? {
            Dimension::Finite(d) if d <= window => {
                dims.insert(String::from(s), d);
            }
            Dimension::Finite(d) => {
                return Err(CloneError::WindowTooSmall { symbol: s.into(), dimension: Some(d), window })
            }
            Dimension::AtLeast(_) => {
                return Err(CloneError::WindowTooSmall { symbol: s.into(), dimension: None, window })
            }
        }
    }
    let mut locals = Vec::new();
    for b in &bases {
        let mut local = FiniteAlgebra::new(size)?;
        for (s, &d) in &dims {
            local = local.with_op(s, a.local_table(s, b, d)?)?;
        }
        if constants {
            for c in 0..size {
                local = local.with_op(&constant_name(c), FinitaryOperation::constant(size, 0, c))?;
            }
        }
        locals.push(local);
    }
    let local_refs: Vec<&FiniteAlgebra> = locals.iter().collect();
    let blocks = vec![block; bases.len()];
    let gens: Vec<(Vec<usize>, RhoTerm)> = (1..=window)
        .map(|i| {
            let col: Vec<usize> = (0..bases.len())
                .flat_map(|_| (0..block).map(move |r| tuple_of_index(size, window, r)[i - 1]))
                .collect();
            (col, RhoTerm::Var(i))
        })
        .collect();
    let closure = column_closure_blocks(&local_refs, Some(&blocks), Some(block * bases.len()), gens, size_cap)?;
    let mut items: Vec<(HyperTerm, Vec<usize>)> = closure
        .terms
        .iter()
        .map(rho_to_hyper)
        .zip(closure.elements)
        .collect();
    items.sort_by(|x, y| (x.0.depth(), &x.0).cmp(&(y.0.depth(), &y.0)));
    let mut index = BTreeMap::new();
    for (i, (_, c)) in items.iter().enumerate() {
        index.insert(c.clone(), i);
    }
    let (witnesses, columns): (Vec<HyperTerm>, Vec<Vec<usize>>) = items.into_iter().unzip();
    let designated = (1..=window).map(|i| index[&columns_of_projection(size, window, bases.len(), i)]).collect();
    let mut tau = BTreeMap::new();
    for (s, &d) in &dims {
        let mut col = Vec::with_capacity(block * bases.len());
        for local in &locals {
            let f = local.op(s).expect("symbol present");
            for r in 0..block {
                col.push(f.apply(&tuple_of_index(size, window, r)[..d]));
            }
        }
        tau.insert(s.clone(), index[&col]);
    }
    Ok(GeneratedFca { value_algebra: a.clone(), window, bases, columns, witnesses, designated, tau, index })
}

fn columns_of_projection(size: usize, window: usize, parts: usize, i: usize) -> Vec<usize> {
    let block = size.pow(window as u32);
    (0..parts).flat_map(|_| (0..block).map(move |r| tuple_of_index(size, window, r)[i - 1])).collect()
}

/// The term clone algebra `A↑` restricted to dimension `≤ window`.
pub fn term_clone_algebra(a: &TAlgebra, window: usize, size_cap: usize) -> Result<GeneratedFca, CloneError> {
    generate(a, window, false, size_cap)
}

/// The polynomial clone algebra `A⇑` restricted to dimension `≤ window`.
pub fn polynomial_clone_algebra(a: &TAlgebra, window: usize, size_cap: usize) -> Result<GeneratedFca, CloneError> {
    generate(a, window, true, size_cap)
}

/// Every t-operation of dimension `≤ window`, when there are at most `size_cap`.
pub fn full_fca(a: &TAlgebra, window: usize, size_cap: usize) -> Result<GeneratedFca, CloneError> {
    let size = a.size();
    let bases = window_bases(a);
    let width = (size.pow(window as u32) * bases.len()) as u128;
    let count = (0..width).fold(1u128, |acc, _| acc.saturating_mul(size as u128));
    if count > size_cap as u128 {
        return Err(CloneError::CapExceeded { cap: size_cap });
    }
    let mut g = polynomial_clone_algebra(a, window, size_cap)?;
    let mut extra = Vec::new();
    for_each_tuple(size, width as usize, |col| {
        if !g.index.contains_key(col) {
            extra.push(col.to_vec());
        }
    });
    for (k, col) in extra.into_iter().enumerate() {
        g.index.insert(col.clone(), g.columns.len());
        g.columns.push(col);
        g.witnesses.push(HyperTerm::Apply(Head::Generator(format!("_f{k}")), Vec::new()));
    }
    Ok(g)
}

/// C1–C5 for `q_compose` on the given hyperterms, with `n, k ≤ n_max`.
/// Returns the first failing instance as `(axiom, description)`.
pub fn check_free_axioms(terms: &[HyperTerm], n_max: usize) -> Option<(Axiom, String)> {
    let e = HyperTerm::Designated;
    for n in 0..=n_max {
        let es: Vec<HyperTerm> = (1..=n).map(e).collect();
        for x in terms {
            if q_compose(x, &es) != *x {
                return Some((Axiom::C3, format!("n={n}, x={x}")));
            }
        }
        let mut bad = None;
        for_each_tuple(terms.len(), n, |idx| {
            if bad.is_some() {
                return;
            }
            let ys: Vec<HyperTerm> = idx.iter().map(|&i| terms[i].clone()).collect();
            for i in 1..=n {
                if q_compose(&e(i), &ys) != ys[i - 1] {
                    bad = Some((Axiom::C1, format!("n={n}, i={i}")));
                }
            }
            for j in n + 1..=n_max + 1 {
                if q_compose(&e(j), &ys) != e(j) {
                    bad = Some((Axiom::C2, format!("n={n}, j={j}")));
                }
            }
            for x in terms {
                for k in n + 1..=n_max {
                    let mut long = ys.clone();
                    long.extend((n + 1..=k).map(e));
                    if q_compose(x, &ys) != q_compose(x, &long) {
                        bad = Some((Axiom::C4, format!("n={n}, k={k}, x={x}")));
                    }
                }
            }
        });
        if bad.is_some() {
            return bad;
        }
        // C5 over x, ȳ, z̄ drawn from the pool
        for_each_tuple(terms.len(), 2 * n + 1, |idx| {
            if bad.is_some() {
                return;
            }
            let x = &terms[idx[0]];
            let ys: Vec<HyperTerm> = idx[1..=n].iter().map(|&i| terms[i].clone()).collect();
            let zs: Vec<HyperTerm> = idx[n + 1..].iter().map(|&i| terms[i].clone()).collect();
            let lhs = q_compose(&q_compose(x, &ys), &zs);
            let inner: Vec<HyperTerm> = ys.iter().map(|y| q_compose(y, &zs)).collect();
            if lhs != q_compose(x, &inner) {
                bad = Some((Axiom::C5, format!("n={n}, x={x}")));
            }
        });
        if bad.is_some() {
            return bad;
        }
    }
    None
}

/// Heads for enumerating hyperterms over the symbols of `a` (all with
/// `max_args` explicit arguments).
pub fn head_specs(symbols: impl IntoIterator<Item = String>, max_args: usize) -> Vec<HeadSpec> {
    symbols.into_iter().map(|s| HeadSpec::op(s, max_args)).collect()
}

/// `star` for terms of the local algebras, re-exported for witnesses.
pub fn witness_of(p: &RhoTerm) -> HyperTerm {
    star(p)
}
