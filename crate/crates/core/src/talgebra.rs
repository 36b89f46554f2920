//! t-operations and t-algebras over traces of threads.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::algebra::{pow_u128, AlgebraError, FinitaryOperation, FiniteAlgebra};
use crate::hyperterm::{enumerate::for_each_tuple, Head, HyperTerm};
use crate::thread::{Thread, ThreadError, Trace};

/// Largest window any exhaustive procedure will enumerate, in threads.
pub const WINDOW_BOUND: u128 = 1 << 22;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TError {
    NotInTrace(Thread),
    Evaluator { note: String, thread: Thread, message: String },
    UnknownSymbol(String),
    UnknownGenerator(String),
    /// The operation has no declared dependence bound.
    NeedsBound(String),
    TraceImage(Thread),
    CompleteTrace,
    TypeMismatch,
    ValueOutOfRange(usize),
    WindowTooLarge(u128),
    Algebra(AlgebraError),
    Thread(ThreadError),
}

impl fmt::Display for TError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TError::NotInTrace(s) => write!(f, "thread {s} is not in the trace"),
            TError::Evaluator { note, thread, message } => {
                write!(f, "evaluator `{note}` failed on {thread}: {message}")
            }
            TError::UnknownSymbol(s) => write!(f, "unknown operation symbol `{s}`"),
            TError::UnknownGenerator(s) => write!(f, "generator `{s}` has no interpretation"),
            TError::NeedsBound(s) => write!(f, "`{s}` has no declared dependence bound"),
            TError::TraceImage(s) => write!(f, "the map sends {s} outside the target trace"),
            TError::CompleteTrace => f.write_str(
                "a complete trace over two or more elements has uncountably many basic classes; supply a union trace",
            ),
            TError::TypeMismatch => f.write_str("t-algebras have different types"),
            TError::ValueOutOfRange(v) => write!(f, "value {v} is outside the carrier"),
            TError::WindowTooLarge(n) => write!(f, "exhaustive window of {n} threads exceeds the bound"),
            TError::Algebra(e) => write!(f, "{e}"),
            TError::Thread(e) => write!(f, "{e}"),
        }
    }
}

impl From<AlgebraError> for TError {
    fn from(e: AlgebraError) -> Self {
        TError::Algebra(e)
    }
}

impl From<ThreadError> for TError {
    fn from(e: ThreadError) -> Self {
        TError::Thread(e)
    }
}

pub type Evaluator = Arc<dyn Fn(&Thread) -> Result<usize, String> + Send + Sync>;

#[derive(Clone)]
pub enum TOperation {
    /// `f^⊤(s) = f(s_1,…,s_n)`.
    TopExt(FinitaryOperation),
    /// A top extension chosen by the basic class of the argument.
    Piecewise(Vec<(Thread, FinitaryOperation)>),
    Programmatic {
        eval: Evaluator,
        /// Coordinates past this index never change the value.
        dependence_bound: Option<usize>,
        note: String,
    },
}

impl fmt::Debug for TOperation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TOperation::TopExt(op) => f.debug_tuple("TopExt").field(op).finish(),
            TOperation::Piecewise(p) => f.debug_tuple("Piecewise").field(p).finish(),
            TOperation::Programmatic { dependence_bound, note, .. } => f
                .debug_struct("Programmatic")
                .field("dependence_bound", dependence_bound)
                .field("note", note)
                .finish(),
        }
    }
}

impl TOperation {
    pub fn programmatic(
        note: impl Into<String>,
        dependence_bound: Option<usize>,
        f: impl Fn(&Thread) -> Result<usize, String> + Send + Sync + 'static,
    ) -> TOperation {
        TOperation::Programmatic { eval: Arc::new(f), dependence_bound, note: note.into() }
    }

    /// The constant t-operation with value `c`.
    pub fn constant(size: usize, c: usize) -> TOperation {
        TOperation::TopExt(FinitaryOperation::constant(size, 0, c))
    }

    /// The projection `e_i^𝖺(s) = s_i`.
    pub fn projection(size: usize, i: usize) -> TOperation {
        TOperation::TopExt(FinitaryOperation::projection(size, i, i))
    }

    pub fn apply(&self, s: &Thread) -> Result<usize, TError> {
        match self {
            TOperation::TopExt(f) => Ok(f.apply(&s.window(f.arity()))),
            TOperation::Piecewise(pieces) => pieces
                .iter()
                .find(|(b, _)| b.equivalent(s))
                .map(|(_, f)| f.apply(&s.window(f.arity())))
                .ok_or_else(|| TError::NotInTrace(s.clone())),
            TOperation::Programmatic { eval, note, .. } => eval(s).map_err(|message| TError::Evaluator {
                note: note.clone(),
                thread: s.clone(),
                message,
            }),
        }
    }

    /// An index past which no coordinate matters, when known.
    pub fn dependence_bound(&self) -> Option<usize> {
        match self {
            TOperation::TopExt(f) => Some(f.arity()),
            TOperation::Piecewise(p) => Some(p.iter().map(|(_, f)| f.arity()).max().unwrap_or(0)),
            TOperation::Programmatic { dependence_bound, .. } => *dependence_bound,
        }
    }

    pub fn is_top_extension(&self) -> bool {
        matches!(self, TOperation::TopExt(_))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Dimension {
    Finite(usize),
    /// Dependent on this coordinate; larger ones untested.
    AtLeast(usize),
}

impl Dimension {
    pub fn finite(self) -> Option<usize> {
        match self {
            Dimension::Finite(n) => Some(n),
            Dimension::AtLeast(_) => None,
        }
    }
}

/// Threads standing in for the trace: the bases, or every constant thread
/// of a complete trace.
pub fn representatives(trace: &Trace, size: usize) -> Vec<Thread> {
    trace.bases().unwrap_or_else(|| (0..size).map(Thread::constant).collect())
}

fn check_window(size: usize, len: usize) -> Result<(), TError> {
    let n = pow_u128(size, len);
    if n > WINDOW_BOUND {
        return Err(TError::WindowTooLarge(n));
    }
    Ok(())
}

/// `φ(base[w])` for all windows `w` of length `len`, tested for a change
/// in coordinate `n`.
fn depends_at(op: &TOperation, base: &Thread, size: usize, len: usize, n: usize) -> Result<bool, TError> {
    let mut hit = false;
    let mut err = None;
    for_each_tuple(size, len, |w| {
        if hit || err.is_some() || w[n - 1] != 0 {
            return;
        }
        let s = base.patch(w);
        let v = match op.apply(&s) {
            Ok(v) => v,
            Err(e) => return err = Some(e),
        };
        for b in 1..size {
            match op.apply(&s.set(n, b)) {
                Ok(u) if u != v => {
                    hit = true;
                    return;
                }
                Ok(_) => {}
                Err(e) => return err = Some(e),
            }
        }
    });
    match err {
        Some(e) => Err(e),
        None => Ok(hit),
    }
}

/// Largest coordinate `op` depends on over `trace`. Exact when a
/// dependence bound is known; otherwise coordinates up to `probe_bound`
/// are tested and the answer is a lower bound.
pub fn dimension(op: &TOperation, trace: &Trace, size: usize, probe_bound: usize) -> Result<Dimension, TError> {
    let bases = representatives(trace, size);
    match op.dependence_bound() {
        Some(m) => {
            check_window(size, m)?;
            let mut dim = 0;
            for n in (1..=m).rev() {
                let mut dep = false;
                for b in &bases {
                    if depends_at(op, b, size, m, n)? {
                        dep = true;
                        break;
                    }
                }
                if dep {
                    dim = n;
                    break;
                }
            }
            Ok(Dimension::Finite(dim))
        }
        None => {
            check_window(size, probe_bound)?;
            for n in (1..=probe_bound).rev() {
                for b in &bases {
                    if depends_at(op, b, size, n, n)? {
                        return Ok(Dimension::AtLeast(n));
                    }
                }
            }
            Ok(Dimension::AtLeast(0))
        }
    }
}

#[derive(Clone, Debug)]
pub struct TAlgebra {
    size: usize,
    trace: Trace,
    ops: BTreeMap<String, TOperation>,
}

/// A generated t-subalgebra with its carrier embedding (`new -> old`).
#[derive(Clone, Debug)]
pub struct TSubalgebra {
    pub algebra: TAlgebra,
    pub embedding: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum HomCheck {
    Yes,
    No { symbol: String, witness: Thread },
    /// No failure among threads patched on the first `check_bound` coordinates.
    BoundedYes { check_bound: usize },
}

impl TAlgebra {
    pub fn new(size: usize, trace: Trace) -> Result<TAlgebra, TError> {
        if size == 0 {
            return Err(TError::Algebra(AlgebraError::EmptyCarrier));
        }
        if let Some(v) = trace.max_value() {
            if v >= size {
                return Err(TError::ValueOutOfRange(v));
            }
        }
        Ok(TAlgebra { size, trace, ops: BTreeMap::new() })
    }

    pub fn with_op(mut self, name: &str, op: TOperation) -> Result<TAlgebra, TError> {
        match &op {
            TOperation::TopExt(f) if f.size() != self.size => return Err(TError::TypeMismatch),
            TOperation::Piecewise(p) => {
                for (b, f) in p {
                    if f.size() != self.size {
                        return Err(TError::TypeMismatch);
                    }
                    if !self.trace.contains(b) {
                        return Err(TError::NotInTrace(b.clone()));
                    }
                }
                if let Some(bases) = self.trace.bases() {
                    if let Some(b) = bases.iter().find(|b| !p.iter().any(|(pb, _)| pb.equivalent(b))) {
                        return Err(TError::NotInTrace(b.clone()));
                    }
                } else {
                    return Err(TError::CompleteTrace);
                }
            }
            _ => {}
        }
        self.ops.insert(name.into(), op);
        Ok(self)
    }

    /// Top extension of every operation of `s` over `trace`.
    pub fn top_extension(s: &FiniteAlgebra, trace: Trace) -> Result<TAlgebra, TError> {
        let mut a = TAlgebra::new(s.size(), trace)?;
        for (name, f) in s.ops() {
            a = a.with_op(name, TOperation::TopExt(f.clone()))?;
        }
        Ok(a)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn trace(&self) -> &Trace {
        &self.trace
    }

    pub fn op(&self, name: &str) -> Option<&TOperation> {
        self.ops.get(name)
    }

    pub fn ops(&self) -> impl Iterator<Item = (&str, &TOperation)> {
        self.ops.iter().map(|(s, f)| (s.as_str(), f))
    }

    pub fn symbols(&self) -> BTreeSet<String> {
        self.ops.keys().cloned().collect()
    }

    pub fn same_type(&self, other: &TAlgebra) -> bool {
        self.ops.keys().eq(other.ops.keys())
    }

    pub fn representatives(&self) -> Vec<Thread> {
        representatives(&self.trace, self.size)
    }

    pub fn apply(&self, symbol: &str, s: &Thread) -> Result<usize, TError> {
        let op = self.ops.get(symbol).ok_or_else(|| TError::UnknownSymbol(symbol.into()))?;
        let v = op.apply(s)?;
        if v >= self.size {
            return Err(TError::ValueOutOfRange(v));
        }
        Ok(v)
    }

    /// Dependence bound for every symbol, or the first without one.
    pub fn dependence_bounds(&self) -> Result<BTreeMap<String, usize>, TError> {
        self.ops
            .iter()
            .map(|(s, f)| f.dependence_bound().map(|d| (s.clone(), d)).ok_or_else(|| TError::NeedsBound(s.clone())))
            .collect()
    }

    pub fn dimension(&self, symbol: &str, probe_bound: usize) -> Result<Dimension, TError> {
        let op = self.ops.get(symbol).ok_or_else(|| TError::UnknownSymbol(symbol.into()))?;
        dimension(op, &self.trace, self.size, probe_bound)
    }

    /// `t^A(s)`; generator heads read `gens`.
    pub fn term_op_eval_with(
        &self,
        t: &HyperTerm,
        s: &Thread,
        gens: &BTreeMap<String, TOperation>,
    ) -> Result<usize, TError> {
        match t {
            HyperTerm::Designated(i) => Ok(s.entry(*i)),
            HyperTerm::Apply(head, args) => {
                let vals = args
                    .iter()
                    .map(|a| self.term_op_eval_with(a, s, gens))
                    .collect::<Result<Vec<_>, _>>()?;
                let patched = s.patch(&vals);
                match head {
                    Head::Op(name) => self.apply(name, &patched),
                    Head::Generator(x) => {
                        let op = gens.get(x).ok_or_else(|| TError::UnknownGenerator(x.clone()))?;
                        op.apply(&patched)
                    }
                }
            }
        }
    }

    pub fn term_op_eval(&self, t: &HyperTerm, s: &Thread) -> Result<usize, TError> {
        self.term_op_eval_with(t, s, &BTreeMap::new())
    }

    /// An index past which `t^A` ignores coordinates, when every head has one.
    pub fn term_dependence_bound(&self, t: &HyperTerm) -> Option<usize> {
        let bounds = self.dependence_bounds().ok()?;
        if t.op_symbols().iter().any(|s| !bounds.contains_key(s)) || t.has_generators() {
            return None;
        }
        Some(t.max_index_with(&|name| bounds.get(name).copied().unwrap_or(0)))
    }

    /// `t^A` as a t-operation.
    pub fn term_operation(&self, t: &HyperTerm) -> TOperation {
        let me = Arc::new(self.clone());
        let term = t.clone();
        let bound = self.term_dependence_bound(t);
        TOperation::programmatic(t.to_string(), bound, move |s| me.term_op_eval(&term, s).map_err(|e| e.to_string()))
    }

    /// The finitary operation `a ↦ φ(base[a])` of arity `arity`.
    pub fn local_table(&self, symbol: &str, base: &Thread, arity: usize) -> Result<FinitaryOperation, TError> {
        check_window(self.size, arity)?;
        let op = self.ops.get(symbol).ok_or_else(|| TError::UnknownSymbol(symbol.into()))?;
        let n = pow_u128(self.size, arity) as usize;
        let mut table = Vec::with_capacity(n);
        let mut err = None;
        for_each_tuple(self.size, arity, |w| {
            if err.is_none() {
                match op.apply(&base.patch(w)) {
                    Ok(v) if v < self.size => table.push(v),
                    Ok(v) => err = Some(TError::ValueOutOfRange(v)),
                    Err(e) => err = Some(e),
                }
            }
        });
        if let Some(e) = err {
            return Err(e);
        }
        Ok(FinitaryOperation::new(self.size, arity, table)?)
    }

    /// A cached view of the algebra over one basic class, for fast exact
    /// evaluation of generator-free terms on patched base threads.
    pub fn local_view(&self, base: &Thread) -> Result<LocalView, TError> {
        let bounds = self.dependence_bounds()?;
        let mut tables = BTreeMap::new();
        for (s, &d) in &bounds {
            tables.insert(s.clone(), self.local_table(s, base, d)?);
        }
        Ok(LocalView { base: base.clone(), tables })
    }

    /// The t-subalgebra generated by `s`: carrier closed under
    /// `σ(s[a_1,…,a_d])`, trace the class of `s`.
    pub fn t_subalgebra_generated(&self, s: &Thread) -> Result<TSubalgebra, TError> {
        if !self.trace.contains(s) {
            return Err(TError::NotInTrace(s.clone()));
        }
        let bounds = self.dependence_bounds()?;
        let mut members: Vec<usize> = s.values().into_iter().collect();
        let mut seen: BTreeSet<usize> = members.iter().copied().collect();
        let mut done = 0;
        let mut first = true;
        loop {
            let len = members.len();
            if !first && done == len {
                break;
            }
            let mut fresh = Vec::new();
            for (name, &d) in &bounds {
                let mut err = None;
                for_each_tuple(len, d, |idx| {
                    if err.is_some() || !(first || idx.iter().any(|&i| i >= done)) {
                        return;
                    }
                    let w: Vec<usize> = idx.iter().map(|&i| members[i]).collect();
                    match self.apply(name, &s.patch(&w)) {
                        Ok(v) => fresh.push(v),
                        Err(e) => err = Some(e),
                    }
                });
                if let Some(e) = err {
                    return Err(e);
                }
            }
            done = len;
            first = false;
            for v in fresh {
                if seen.insert(v) {
                    members.push(v);
                }
            }
        }
        let embedding: Vec<usize> = seen.into_iter().collect();
        let algebra = self.relabel(&embedding, Trace::basic(s.clone()))?;
        Ok(TSubalgebra { algebra, embedding })
    }

    /// Restriction to the carrier `embedding` (closed) and a trace of
    /// threads over it, relabelled `embedding[i] ↦ i`.
    fn relabel(&self, embedding: &[usize], trace: Trace) -> Result<TAlgebra, TError> {
        let mut new_of = vec![usize::MAX; self.size];
        for (i, &a) in embedding.iter().enumerate() {
            new_of[a] = i;
        }
        let size = embedding.len();
        let to_new = |s: &Thread| s.map(|v| new_of[v]);
        let new_trace = match &trace {
            Trace::Complete => Trace::Complete,
            Trace::Basic(b) => Trace::basic(to_new(b)),
            Trace::Union(bs) => Trace::union(bs.iter().map(to_new).collect())?,
        };
        let mut out = TAlgebra::new(size, new_trace)?;
        for (name, op) in &self.ops {
            let restrict = |f: &FinitaryOperation| {
                FinitaryOperation::from_fn(size, f.arity(), |a| {
                    let old: Vec<usize> = a.iter().map(|&x| embedding[x]).collect();
                    new_of[f.apply(&old)]
                })
            };
            let new_op = match op {
                TOperation::TopExt(f) => TOperation::TopExt(restrict(f)),
                TOperation::Piecewise(p) => {
                    let kept: Vec<(Thread, FinitaryOperation)> = p
                        .iter()
                        .filter(|(b, _)| trace.contains(b))
                        .map(|(b, f)| (b.clone(), restrict(f)))
                        .collect();
                    match kept.as_slice() {
                        [(_, f)] => TOperation::TopExt(f.clone()),
                        _ => TOperation::Piecewise(kept.iter().map(|(b, f)| (to_new(b), f.clone())).collect()),
                    }
                }
                TOperation::Programmatic { eval, dependence_bound, note } => {
                    let eval = eval.clone();
                    let emb: Vec<usize> = embedding.to_vec();
                    let back = new_of.clone();
                    TOperation::programmatic(note.clone(), *dependence_bound, move |s| {
                        let v = eval(&s.map(|x| emb[x]))?;
                        back.get(v).copied().filter(|&x| x != usize::MAX).ok_or_else(|| format!("value {v} left the subalgebra"))
                    })
                }
            };
            out.ops.insert(name.clone(), new_op);
        }
        Ok(out)
    }

    /// Checks `f ∘ σ^A = σ^B ∘ f^ℕ`. Exact when every operation has a
    /// dependence bound; otherwise threads patched within `check_bound`.
    pub fn is_t_homomorphism(&self, map: &[usize], target: &TAlgebra, check_bound: usize) -> Result<HomCheck, TError> {
        if !self.same_type(target) {
            return Err(TError::TypeMismatch);
        }
        if map.len() != self.size {
            return Err(TError::ValueOutOfRange(map.len()));
        }
        if let Some(&v) = map.iter().find(|&&v| v >= target.size) {
            return Err(TError::ValueOutOfRange(v));
        }
        let reps = match (&self.trace, &target.trace) {
            (Trace::Complete, Trace::Complete) => vec![Thread::constant(0)],
            (Trace::Complete, t) => {
                if self.size > 1 {
                    return Err(TError::TraceImage(Thread::constant(0).set(1, 1)));
                }
                let s = Thread::constant(0);
                if !t.contains(&s.map(|v| map[v])) {
                    return Err(TError::TraceImage(s));
                }
                vec![s]
            }
            (tr, _) => {
                let bases = tr.bases().expect("not complete");
                for b in &bases {
                    if !target.trace.contains(&b.map(|v| map[v])) {
                        return Err(TError::TraceImage(b.clone()));
                    }
                }
                bases
            }
        };
        let mut exact = true;
        for (name, op) in &self.ops {
            let other = &target.ops[name];
            let window = match (op.dependence_bound(), other.dependence_bound()) {
                (Some(a), Some(b)) => a.max(b),
                _ => {
                    exact = false;
                    check_bound
                }
            };
            check_window(self.size, window)?;
            for b in &reps {
                let mut res: Result<Option<Thread>, TError> = Ok(None);
                for_each_tuple(self.size, window, |w| {
                    if !matches!(res, Ok(None)) {
                        return;
                    }
                    let s = b.patch(w);
                    let lhs = match op.apply(&s) {
                        Ok(v) => map[v],
                        Err(e) => return res = Err(e),
                    };
                    match other.apply(&s.map(|v| map[v])) {
                        Ok(rhs) if rhs != lhs => res = Ok(Some(s)),
                        Ok(_) => {}
                        Err(e) => res = Err(e),
                    }
                });
                if let Some(witness) = res? {
                    return Ok(HomCheck::No { symbol: name.clone(), witness });
                }
            }
        }
        Ok(if exact { HomCheck::Yes } else { HomCheck::BoundedYes { check_bound } })
    }

    /// The full t-subalgebras over each basic class, with their bases.
    pub fn sum_decompose(&self) -> Result<Vec<(Thread, TAlgebra)>, TError> {
        let bases = match self.trace.bases() {
            Some(b) => b,
            None if self.size == 1 => vec![Thread::constant(0)],
            None => return Err(TError::CompleteTrace),
        };
        let all: Vec<usize> = (0..self.size).collect();
        bases
            .into_iter()
            .map(|b| {
                let part = self.relabel(&all, Trace::basic(b.clone()))?;
                Ok((b, part))
            })
            .collect()
    }

    /// Inverse of [`TAlgebra::sum_decompose`]: one t-algebra over the union
    /// of the parts' traces.
    pub fn sum_rebuild(parts: &[(Thread, TAlgebra)]) -> Result<TAlgebra, TError> {
        let (_, first) = parts.first().ok_or(TError::Thread(ThreadError::EmptyUnion))?;
        if parts.iter().any(|(_, p)| p.size != first.size || !p.same_type(first)) {
            return Err(TError::TypeMismatch);
        }
        let trace = if parts.len() == 1 {
            Trace::basic(parts[0].0.clone())
        } else {
            Trace::union(parts.iter().map(|(b, _)| b.clone()).collect())?
        };
        let mut out = TAlgebra::new(first.size, trace)?;
        for name in first.ops.keys() {
            let ops: Vec<&TOperation> = parts.iter().map(|(_, p)| &p.ops[name]).collect();
            let tops: Option<Vec<&FinitaryOperation>> = ops
                .iter()
                .map(|op| match op {
                    TOperation::TopExt(f) => Some(f),
                    _ => None,
                })
                .collect();
            let op = match tops {
                Some(fs) if fs.iter().all(|f| *f == fs[0]) => TOperation::TopExt(fs[0].clone()),
                Some(fs) => TOperation::Piecewise(
                    parts.iter().zip(fs).map(|((b, _), f)| (b.clone(), f.clone())).collect(),
                ),
                None => {
                    let pieces: Vec<(Thread, TOperation)> =
                        parts.iter().map(|(b, p)| (b.clone(), p.ops[name].clone())).collect();
                    let bound = pieces
                        .iter()
                        .map(|(_, op)| op.dependence_bound())
                        .try_fold(0, |acc, d| d.map(|d| acc.max(d)));
                    TOperation::programmatic(format!("sum of {name}"), bound, move |s| {
                        let (_, op) = pieces.iter().find(|(b, _)| b.equivalent(s)).ok_or("thread outside every part")?;
                        op.apply(s).map_err(|e| e.to_string())
                    })
                }
            };
            out.ops.insert(name.clone(), op);
        }
        Ok(out)
    }
}

/// Product of t-algebras. Carrier elements are encoded mixed-radix with
/// the first factor most significant; a thread of the product is read row
/// by row into one thread per factor.
pub fn t_product(factors: &[&TAlgebra]) -> Result<TAlgebra, TError> {
    let first = factors.first().ok_or(TError::TypeMismatch)?;
    if factors.iter().any(|a| !a.same_type(first)) {
        return Err(TError::TypeMismatch);
    }
    let sizes: Vec<usize> = factors.iter().map(|a| a.size).collect();
    let total = sizes.iter().fold(1u128, |acc, &s| acc.saturating_mul(s as u128));
    if total > crate::algebra::DEFAULT_ELEMENT_BOUND as u128 {
        return Err(TError::Algebra(AlgebraError::ResourceLimit {
            what: "t-product carrier",
            needed: total,
            bound: crate::algebra::DEFAULT_ELEMENT_BOUND,
        }));
    }
    let codec = Codec { sizes: sizes.clone() };
    let trace = if factors.iter().all(|a| a.trace == Trace::Complete) {
        Trace::Complete
    } else {
        let mut combos: Vec<Vec<Thread>> = vec![Vec::new()];
        for a in factors {
            let bases = a.trace.bases().ok_or(TError::CompleteTrace)?;
            combos = combos
                .into_iter()
                .flat_map(|c| {
                    bases.iter().map(move |b| {
                        let mut c = c.clone();
                        c.push(b.clone());
                        c
                    })
                })
                .collect();
        }
        let bases: Vec<Thread> = combos.iter().map(|c| codec.zip(c)).collect();
        if bases.len() == 1 {
            Trace::basic(bases[0].clone())
        } else {
            Trace::union(bases)?
        }
    };
    let mut out = TAlgebra::new(total as usize, trace)?;
    for name in first.ops.keys() {
        let ops: Vec<TOperation> = factors.iter().map(|a| a.ops[name].clone()).collect();
        let tops: Option<Vec<FinitaryOperation>> = ops
            .iter()
            .map(|op| match op {
                TOperation::TopExt(f) => Some(f.clone()),
                _ => None,
            })
            .collect();
        let op = match tops {
            Some(fs) => {
                let arity = fs.iter().map(FinitaryOperation::arity).max().unwrap_or(0);
                let c = codec.clone();
                TOperation::TopExt(FinitaryOperation::from_fn(total as usize, arity, |args| {
                    let rows: Vec<Vec<usize>> = args.iter().map(|&a| c.decode(a)).collect();
                    let vals: Vec<usize> = fs
                        .iter()
                        .enumerate()
                        .map(|(j, f)| {
                            let w: Vec<usize> = rows.iter().take(f.arity()).map(|r| r[j]).collect();
                            f.apply(&w)
                        })
                        .collect();
                    c.encode(&vals)
                }))
            }
            None => {
                let bound = ops.iter().map(TOperation::dependence_bound).try_fold(0, |acc, d| d.map(|d| acc.max(d)));
                let c = codec.clone();
                let note = format!("product of {name}");
                TOperation::programmatic(note, bound, move |s| {
                    let vals = ops
                        .iter()
                        .enumerate()
                        .map(|(j, op)| op.apply(&c.row(s, j)).map_err(|e| e.to_string()))
                        .collect::<Result<Vec<_>, _>>()?;
                    Ok(c.encode(&vals))
                })
            }
        };
        out.ops.insert(name.clone(), op);
    }
    Ok(out)
}

/// Mixed-radix coding of product elements, first factor most significant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Codec {
    pub sizes: Vec<usize>,
}

impl Codec {
    pub fn encode(&self, xs: &[usize]) -> usize {
        xs.iter().zip(&self.sizes).fold(0, |acc, (&x, &s)| acc * s + x)
    }

    pub fn decode(&self, mut x: usize) -> Vec<usize> {
        let mut out = vec![0; self.sizes.len()];
        for (slot, &s) in out.iter_mut().zip(&self.sizes).rev() {
            *slot = x % s;
            x /= s;
        }
        out
    }

    /// Thread of product elements from one thread per factor.
    pub fn zip(&self, threads: &[Thread]) -> Thread {
        Thread::zip_with(threads, |r| self.encode(r))
    }

    /// The `j`-th factor's row of a product thread.
    pub fn row(&self, s: &Thread, j: usize) -> Thread {
        s.map(|x| self.decode(x)[j])
    }
}

/// Finitary tables of every operation over one base thread, for evaluating
/// generator-free terms on threads `base[w]`.
#[derive(Clone, Debug)]
pub struct LocalView {
    pub base: Thread,
    pub tables: BTreeMap<String, FinitaryOperation>,
}

impl LocalView {
    /// `t^A(base[w])`.
    pub fn eval(&self, t: &HyperTerm, w: &[usize]) -> Result<usize, TError> {
        let coord = |i: usize| if i <= w.len() { w[i - 1] } else { self.base.entry(i) };
        match t {
            HyperTerm::Designated(i) => Ok(coord(*i)),
            HyperTerm::Apply(Head::Generator(x), _) => Err(TError::UnknownGenerator(x.clone())),
            HyperTerm::Apply(Head::Op(name), args) => {
                let f = self.tables.get(name).ok_or_else(|| TError::UnknownSymbol(name.clone()))?;
                let mut window = Vec::with_capacity(f.arity());
                for j in 1..=f.arity() {
                    window.push(match args.get(j - 1) {
                        Some(a) => self.eval(a, w)?,
                        None => coord(j),
                    });
                }
                Ok(f.apply(&window))
            }
        }
    }
}

/// `q_n(φ, ψ_1,…,ψ_n)(s) = φ(s[ψ_1(s),…,ψ_n(s)])`.
pub fn q_functional(phi: &TOperation, psis: &[TOperation], s: &Thread) -> Result<usize, TError> {
    let vals = psis.iter().map(|p| p.apply(s)).collect::<Result<Vec<_>, _>>()?;
    phi.apply(&s.patch(&vals))
}

/// `q_n(φ, ψ̄)` as a t-operation.
pub fn q_functional_op(phi: &TOperation, psis: &[TOperation]) -> TOperation {
    let bound = core::iter::once(phi.dependence_bound())
        .chain(psis.iter().map(TOperation::dependence_bound))
        .try_fold(psis.len(), |acc, d| d.map(|d| acc.max(d)));
    let phi = phi.clone();
    let psis: Vec<TOperation> = psis.to_vec();
    TOperation::programmatic("q", bound, move |s| q_functional(&phi, &psis, s).map_err(|e| e.to_string()))
}

/// Zeros counted over a thread with finitely many of them.
fn count_zeros(s: &Thread) -> Result<usize, String> {
    if s.tail_values().contains(&0) {
        return Err("infinitely many zeros".into());
    }
    Ok((1..=s.support_bound()).filter(|&i| s.entry(i) == 0).count())
}

/// 1 when the thread has an even number of zeros, 0 otherwise.
pub fn parity_op() -> TOperation {
    TOperation::programmatic("parity", None, |s| Ok(usize::from(count_zeros(s)? % 2 == 0)))
}

/// The parity t-algebra: carrier `{0,1}`, trace the class of `1̄`, one
/// operation `s` returning 1 iff the thread has an even number of zeros.
pub fn parity_algebra() -> TAlgebra {
    TAlgebra::new(2, Trace::basic(Thread::constant(1)))
        .and_then(|a| a.with_op("s", parity_op()))
        .expect("valid fixture")
}

/// Parity of zeros among the first `bound` coordinates.
pub fn prefix_parity_op(bound: usize) -> TOperation {
    TOperation::programmatic(format!("prefix_parity({bound})"), Some(bound), move |s| {
        Ok(usize::from(s.window(bound).iter().filter(|&&v| v == 0).count() % 2 == 0))
    })
}

/// Programmatic t-operations available by name.
pub fn builtin(name: &str, bound: Option<usize>) -> Option<TOperation> {
    match (name, bound) {
        ("parity", None) => Some(parity_op()),
        ("prefix_parity", Some(b)) => Some(prefix_parity_op(b)),
        _ => None,
    }
}

pub const BUILTINS: &[&str] = &["parity", "prefix_parity"];
