//! Satisfaction of identities and hyperidentities in t-algebras, splitting
//! finite-dimensional t-algebras into finitary parts, and the variety and
//! uniform-continuity decision procedures built on top of that split.
//!
//! Answers about whole equational theories are tagged [`Exactness`]: they
//! are exact only when both algebras decompose into finitary parts, in
//! which case theory inclusion reduces to HSP membership of the parts.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::algebra::{
    hsp_member_multi, pow_u128, AlgebraError, FinitaryOperation, FiniteAlgebra, HspAnswer, DEFAULT_COLUMN_BOUND,
};
use crate::clone_algebra::{constant_name, polynomial_clone_algebra, CloneError};
use crate::hyperterm::enumerate::for_each_tuple;
use crate::hyperterm::{
    l_bound, star, structural_identities, substitute_designated, FinitaryType, Head, HyperTerm, Identity,
    RhoIdentity, TermError,
};
use crate::talgebra::{representatives, t_product, Dimension, TAlgebra, TError, TOperation, WINDOW_BOUND};
use crate::thread::{Thread, Trace};

/// Most hyperterms a probed theory comparison will enumerate.
pub const TERM_BOUND: usize = 2000;
/// Most generator assignments tried by [`satisfies_fully`].
pub const ASSIGNMENT_BOUND: u64 = 1 << 16;
/// Largest polynomial clone algebra [`satisfies_fully`] draws from.
pub const POLYNOMIAL_BOUND: usize = 4096;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BirkhoffError {
    /// An operation has no known dependence bound.
    NeedsBound(String),
    /// Generators where a plain identity was expected.
    Generators(Vec<String>),
    TooManyGenerators { found: usize, bound: usize },
    NotDecomposable(String),
    Precondition(String),
    TypeMismatch,
    BadProbe(&'static str),
    /// Two independent routes gave different answers.
    Disagreement(String),
    Term(TermError),
    TAlgebra(TError),
    Algebra(AlgebraError),
    Clone(CloneError),
}

impl BirkhoffError {
    /// Whether the failure is a resource bound rather than bad input.
    pub fn is_resource_limit(&self) -> bool {
        match self {
            BirkhoffError::TAlgebra(TError::WindowTooLarge(_))
            | BirkhoffError::TAlgebra(TError::Algebra(AlgebraError::ResourceLimit { .. }))
            | BirkhoffError::Algebra(AlgebraError::ResourceLimit { .. })
            | BirkhoffError::Clone(CloneError::CapExceeded { .. })
            | BirkhoffError::Clone(CloneError::TableTooLarge(_)) => true,
            BirkhoffError::Clone(CloneError::TAlgebra(e)) => BirkhoffError::TAlgebra(e.clone()).is_resource_limit(),
            _ => false,
        }
    }
}

impl fmt::Display for BirkhoffError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BirkhoffError::NeedsBound(s) => write!(f, "operation `{s}` has no known dependence bound"),
            BirkhoffError::Generators(g) => write!(f, "unexpected generators {}", g.join(", ")),
            BirkhoffError::TooManyGenerators { found, bound } => {
                write!(f, "{found} generators exceed the bound {bound}")
            }
            BirkhoffError::NotDecomposable(why) => write!(f, "not decomposable: {why}"),
            BirkhoffError::Precondition(why) => write!(f, "precondition failed: {why}"),
            BirkhoffError::TypeMismatch => f.write_str("algebras of different types"),
            BirkhoffError::BadProbe(what) => write!(f, "probe bound `{what}` must be at least 1"),
            BirkhoffError::Disagreement(what) => write!(f, "cross-check disagreement: {what}"),
            BirkhoffError::Term(e) => write!(f, "{e}"),
            BirkhoffError::TAlgebra(e) => write!(f, "{e}"),
            BirkhoffError::Algebra(e) => write!(f, "{e}"),
            BirkhoffError::Clone(e) => write!(f, "{e}"),
        }
    }
}

impl From<TermError> for BirkhoffError {
    fn from(e: TermError) -> Self {
        BirkhoffError::Term(e)
    }
}

impl From<TError> for BirkhoffError {
    fn from(e: TError) -> Self {
        match e {
            TError::NeedsBound(s) => BirkhoffError::NeedsBound(s),
            e => BirkhoffError::TAlgebra(e),
        }
    }
}

impl From<AlgebraError> for BirkhoffError {
    fn from(e: AlgebraError) -> Self {
        BirkhoffError::Algebra(e)
    }
}

impl From<CloneError> for BirkhoffError {
    fn from(e: CloneError) -> Self {
        BirkhoffError::Clone(e)
    }
}

/// Finite windows onto the theories of a t-algebra.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TheoryProbe {
    pub depth_bound: usize,
    pub index_bound: usize,
    pub generator_bound: usize,
    /// Largest t-power searched by the topological route; `None` means the
    /// size of the target carrier.
    pub power_bound: Option<usize>,
    /// How far dimensions are probed when no dependence bound is known.
    pub dimension_probe: usize,
}

impl Default for TheoryProbe {
    fn default() -> Self {
        TheoryProbe { depth_bound: 3, index_bound: 4, generator_bound: 2, power_bound: None, dimension_probe: 8 }
    }
}

impl TheoryProbe {
    pub fn validate(&self) -> Result<(), BirkhoffError> {
        for (v, name) in [
            (self.depth_bound, "depth"),
            (self.index_bound, "index"),
            (self.generator_bound, "generators"),
            (self.dimension_probe, "dimension probe"),
            (self.power_bound.unwrap_or(1), "power"),
        ] {
            if v == 0 {
                return Err(BirkhoffError::BadProbe(name));
            }
        }
        Ok(())
    }
}

/// The entourage `{(φ, ψ) : φ(s) = ψ(s)}` of the uniformity on t-operations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Entourage {
    pub thread: Thread,
}

impl Entourage {
    pub fn relates(&self, phi: &TOperation, psi: &TOperation) -> Result<bool, TError> {
        Ok(phi.apply(&self.thread)? == psi.apply(&self.thread)?)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Exactness {
    Exact,
    Probed,
}

impl Exactness {
    pub fn as_str(self) -> &'static str {
        match self {
            Exactness::Exact => "exact",
            Exactness::Probed => "probed",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Satisfaction {
    Yes,
    No(Thread),
}

impl Satisfaction {
    pub fn holds(&self) -> bool {
        matches!(self, Satisfaction::Yes)
    }
}

/// Outcome of a hyperidentity check. Assignments name each generator's
/// value by a hyperterm; constants are written `_c<k>`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum HyperAnswer {
    Yes,
    BoundedYes { checked: u64 },
    No { assignment: BTreeMap<String, HyperTerm>, witness: Thread },
}

impl HyperAnswer {
    pub fn holds(&self) -> bool {
        !matches!(self, HyperAnswer::No { .. })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TheoryAnswer {
    pub holds: bool,
    pub exactness: Exactness,
    /// An identity of the first algebra failing in the second.
    pub separator: Option<Identity>,
    pub witness: Option<Thread>,
    pub note: String,
}

/// A t-algebra split as a sum of top extensions of finitary algebras, one
/// per basic class of its trace.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decomposition {
    /// Arity of each symbol, equal to its dimension.
    pub rho: FinitaryType,
    pub trace: Trace,
    pub parts: Vec<(Thread, FiniteAlgebra)>,
}

impl Decomposition {
    pub fn algebras(&self) -> Vec<&FiniteAlgebra> {
        self.parts.iter().map(|(_, a)| a).collect()
    }

    /// The sum of the top extensions of the parts.
    pub fn rebuild(&self) -> Result<TAlgebra, TError> {
        let size = self.parts[0].1.size();
        let mut out = TAlgebra::new(size, self.trace.clone())?;
        for (sym, _) in self.rho.iter() {
            let tables: Vec<&FinitaryOperation> =
                self.parts.iter().map(|(_, a)| a.op(sym).expect("part has every symbol")).collect();
            let op = if tables.iter().all(|t| *t == tables[0]) {
                TOperation::TopExt(tables[0].clone())
            } else {
                TOperation::Piecewise(self.parts.iter().map(|(b, a)| (b.clone(), a.op(sym).expect("symbol").clone())).collect())
            };
            out = out.with_op(sym, op)?;
        }
        Ok(out)
    }
}

/// Bases whose patches cover every window the trace can show; a complete
/// trace is covered by the patches of `0̄`.
fn window_bases(a: &TAlgebra) -> Vec<Thread> {
    a.trace().bases().unwrap_or_else(|| vec![Thread::constant(0)])
}

fn check_window(size: usize, len: usize) -> Result<(), BirkhoffError> {
    let n = pow_u128(size, len);
    if n > WINDOW_BOUND {
        return Err(TError::WindowTooLarge(n).into());
    }
    Ok(())
}

fn check_symbols(a: &TAlgebra, id: &Identity) -> Result<(), BirkhoffError> {
    for t in [&id.lhs, &id.rhs] {
        if let Some(s) = t.op_symbols().into_iter().find(|s| a.op(s).is_none()) {
            return Err(TError::UnknownSymbol(s).into());
        }
    }
    Ok(())
}

/// Finitary parts over `bases` with the arities of `rho`.
fn parts_at(a: &TAlgebra, rho: &FinitaryType, bases: &[Thread]) -> Result<Vec<(Thread, FiniteAlgebra)>, BirkhoffError> {
    let mut out = Vec::with_capacity(bases.len());
    for b in bases {
        let mut part = FiniteAlgebra::new(a.size())?;
        for (sym, d) in rho.iter() {
            part = part.with_op(sym, a.local_table(sym, b, d)?)?;
        }
        out.push((b.clone(), part));
    }
    Ok(out)
}

/// Exact check of a generator-free identity. Both sides read only the
/// first `m` coordinates, `m` computed from the dependence bounds, so all
/// patches of length `m` on every base are enumerated.
pub fn satisfies_identity(a: &TAlgebra, id: &Identity) -> Result<Satisfaction, BirkhoffError> {
    let gens = id.generators();
    if !gens.is_empty() {
        return Err(BirkhoffError::Generators(gens));
    }
    check_symbols(a, id)?;
    let bounds = a.dependence_bounds()?;
    let width = |name: &str| bounds.get(name).copied().unwrap_or(0);
    let m = id.lhs.max_index_with(&width).max(id.rhs.max_index_with(&width));
    check_window(a.size(), m)?;
    for base in window_bases(a) {
        let view = a.local_view(&base)?;
        let mut found: Result<Option<Vec<usize>>, TError> = Ok(None);
        for_each_tuple(a.size(), m, |w| {
            if !matches!(found, Ok(None)) {
                return;
            }
            match (view.eval(&id.lhs, w), view.eval(&id.rhs, w)) {
                (Ok(x), Ok(y)) if x != y => found = Ok(Some(w.to_vec())),
                (Err(e), _) | (_, Err(e)) => found = Err(e),
                _ => {}
            }
        });
        if let Some(w) = found? {
            return Ok(Satisfaction::No(base.patch(&w)));
        }
    }
    Ok(Satisfaction::Yes)
}

/// Exact check of an identity whose generators are interpreted by `gens`.
pub fn satisfies_with(
    a: &TAlgebra,
    id: &Identity,
    gens: &BTreeMap<String, TOperation>,
) -> Result<Satisfaction, BirkhoffError> {
    check_symbols(a, id)?;
    let mut bounds = a.dependence_bounds()?;
    for (x, op) in gens {
        let d = op.dependence_bound().ok_or_else(|| BirkhoffError::NeedsBound(x.clone()))?;
        bounds.entry(x.clone()).or_insert(d);
    }
    let width = |name: &str| bounds.get(name).copied().unwrap_or(0);
    let m = id.lhs.max_index_with(&width).max(id.rhs.max_index_with(&width));
    check_window(a.size(), m)?;
    for base in window_bases(a) {
        let mut found: Result<Option<Thread>, TError> = Ok(None);
        for_each_tuple(a.size(), m, |w| {
            if !matches!(found, Ok(None)) {
                return;
            }
            let s = base.patch(w);
            match (a.term_op_eval_with(&id.lhs, &s, gens), a.term_op_eval_with(&id.rhs, &s, gens)) {
                (Ok(x), Ok(y)) if x != y => found = Ok(Some(s)),
                (Err(e), _) | (_, Err(e)) => found = Err(e),
                _ => {}
            }
        });
        if let Some(s) = found? {
            return Ok(Satisfaction::No(s));
        }
    }
    Ok(Satisfaction::Yes)
}

/// Splits `a` into finitary parts when every symbol has a finite
/// dimension (found within `probe.dimension_probe` when no dependence
/// bound is known). `None` when some dimension is open.
pub fn decompose_rho_dimensional(a: &TAlgebra, probe: &TheoryProbe) -> Result<Option<Decomposition>, BirkhoffError> {
    let mut rho = FinitaryType::new();
    for sym in a.symbols() {
        match a.dimension(&sym, probe.dimension_probe)? {
            Dimension::Finite(d) => rho.insert(sym, d),
            Dimension::AtLeast(_) => return Ok(None),
        }
    }
    let parts = parts_at(a, &rho, &window_bases(a))?;
    Ok(Some(Decomposition { rho, trace: a.trace().clone(), parts }))
}

/// First structural identity over `rho` failing in `a`, within the probe.
/// `None` at every probed identity is consistent with `a` being
/// `rho`-dimensional.
pub fn structural_violation(
    a: &TAlgebra,
    rho: &FinitaryType,
    probe: &TheoryProbe,
) -> Result<Option<(Identity, Thread)>, BirkhoffError> {
    for id in structural_identities(rho, probe.depth_bound.min(2), probe.index_bound) {
        if let Satisfaction::No(s) = satisfies_identity(a, &id)? {
            return Ok(Some((id, s)));
        }
    }
    Ok(None)
}

/// `σ(e_1,…,e_{k-1},e_{k+1}) = σ`: holds when `σ` ignores coordinate `k`.
fn skip_identity(sym: &str, k: usize) -> Identity {
    let mut args: Vec<HyperTerm> = (1..k).map(HyperTerm::Designated).collect();
    args.push(HyperTerm::Designated(k + 1));
    Identity::new(HyperTerm::op(sym, args).canonicalize(), HyperTerm::op(sym, Vec::new()))
}

/// A symbol whose dimension in `b` exceeds the one in `a`, with the
/// identity of `a` it breaks.
fn dimension_separator(da: &FinitaryType, db: &FinitaryType) -> Option<Identity> {
    da.iter().find_map(|(sym, d)| {
        let e = db.arity(sym).unwrap_or(0);
        (e > d).then(|| skip_identity(sym, e))
    })
}

/// Whether every identity of `a` holds in `b`.
pub fn theta_included(a: &TAlgebra, b: &TAlgebra, probe: &TheoryProbe) -> Result<TheoryAnswer, BirkhoffError> {
    probe.validate()?;
    if !a.same_type(b) {
        return Err(BirkhoffError::TypeMismatch);
    }
    let (da, db) = match (decompose_rho_dimensional(a, probe)?, decompose_rho_dimensional(b, probe)?) {
        (Some(da), Some(db)) => (da, db),
        _ => return probed_inclusion(a, b, probe),
    };
    if let Some(id) = dimension_separator(&da.rho, &db.rho) {
        let witness = match satisfies_identity(b, &id)? {
            Satisfaction::No(s) => Some(s),
            Satisfaction::Yes => {
                return Err(BirkhoffError::Disagreement(format!("`{id}` should fail by dimension")));
            }
        };
        return Ok(TheoryAnswer {
            holds: false,
            exactness: Exactness::Exact,
            separator: Some(id),
            witness,
            note: "dimension of the target exceeds the source".into(),
        });
    }
    let sources = da.algebras();
    for (base, part) in parts_at(b, &da.rho, &window_bases(b))? {
        if let HspAnswer::NotMember { separator, .. } = hsp_member_multi(&sources, &part, DEFAULT_COLUMN_BOUND)? {
            let id = lift(&separator);
            let witness = match satisfies_identity(b, &id)? {
                Satisfaction::No(s) => Some(s),
                Satisfaction::Yes => {
                    return Err(BirkhoffError::Disagreement(format!("lifted separator `{id}` holds in the target")));
                }
            };
            return Ok(TheoryAnswer {
                holds: false,
                exactness: Exactness::Exact,
                separator: Some(id),
                witness,
                note: format!("part over {base} lies outside the variety of the source parts"),
            });
        }
    }
    Ok(TheoryAnswer {
        holds: true,
        exactness: Exactness::Exact,
        separator: None,
        witness: None,
        note: format!("{} target part(s) in the variety of {} source part(s)", b_parts_len(b), sources.len()),
    })
}

fn b_parts_len(b: &TAlgebra) -> usize {
    window_bases(b).len()
}

fn lift(id: &RhoIdentity) -> Identity {
    Identity::new(star(&id.lhs), star(&id.rhs))
}

/// Generator-free hyperterms over `symbols` level by level, stopping
/// before a level would pass [`TERM_BOUND`]. Returns the terms and the
/// depth reached.
fn capped_terms(symbols: &BTreeSet<String>, probe: &TheoryProbe) -> (Vec<HyperTerm>, usize) {
    let mut all: BTreeSet<HyperTerm> = (1..=probe.index_bound).map(HyperTerm::Designated).collect();
    let mut reached = 0;
    for depth in 1..=probe.depth_bound {
        let pool: Vec<HyperTerm> = all.iter().cloned().collect();
        let estimate: u128 = (0..=probe.index_bound).map(|l| pow_u128(pool.len(), l)).sum::<u128>()
            * symbols.len() as u128;
        if estimate > TERM_BOUND as u128 {
            break;
        }
        for sym in symbols {
            for len in 0..=probe.index_bound {
                for_each_tuple(pool.len(), len, |idx| {
                    let args = idx.iter().map(|&i| pool[i].clone()).collect();
                    all.insert(HyperTerm::Apply(Head::Op(sym.clone()), args).canonicalize());
                });
            }
        }
        reached = depth;
    }
    (all.into_iter().collect(), reached)
}

/// Values of `t` on every patch of length `window` of every base.
fn value_vector(a: &TAlgebra, t: &HyperTerm, window: usize) -> Result<(Vec<usize>, Vec<Thread>), BirkhoffError> {
    let mut vals = Vec::new();
    let mut threads = Vec::new();
    let mut err = None;
    for base in representatives(a.trace(), a.size()) {
        for_each_tuple(a.size(), window, |w| {
            if err.is_some() {
                return;
            }
            let s = base.patch(w);
            match a.term_op_eval(t, &s) {
                Ok(v) => vals.push(v),
                Err(e) => err = Some(e),
            }
            threads.push(s);
        });
    }
    match err {
        Some(e) => Err(e.into()),
        None => Ok((vals, threads)),
    }
}

/// Identities among enumerated terms that hold on the probe threads of
/// `a`, tested on the probe threads of `b`.
fn probed_inclusion(a: &TAlgebra, b: &TAlgebra, probe: &TheoryProbe) -> Result<TheoryAnswer, BirkhoffError> {
    let (terms, depth) = capped_terms(&a.symbols(), probe);
    let window = probe.index_bound + 1;
    check_window(a.size().max(b.size()), window)?;
    let mut classes: BTreeMap<Vec<usize>, (usize, Vec<usize>)> = BTreeMap::new();
    for (i, t) in terms.iter().enumerate() {
        let (va, _) = value_vector(a, t, window)?;
        let (vb, threads) = value_vector(b, t, window)?;
        match classes.get(&va) {
            None => {
                classes.insert(va, (i, vb));
            }
            Some((r, rb)) => {
                if let Some(pos) = rb.iter().zip(&vb).position(|(x, y)| x != y) {
                    return Ok(TheoryAnswer {
                        holds: false,
                        exactness: Exactness::Probed,
                        separator: Some(Identity::new(terms[*r].clone(), t.clone())),
                        witness: Some(threads[pos].clone()),
                        note: format!("probed {} terms of depth ≤ {depth} on windows of length {window}", terms.len()),
                    });
                }
            }
        }
    }
    Ok(TheoryAnswer {
        holds: true,
        exactness: Exactness::Probed,
        separator: None,
        witness: None,
        note: format!("probed {} terms of depth ≤ {depth} on windows of length {window}", terms.len()),
    })
}

/// Whether `b` lies in the equational class generated by `a`.
pub fn et_variety_member(a: &TAlgebra, b: &TAlgebra, probe: &TheoryProbe) -> Result<TheoryAnswer, BirkhoffError> {
    theta_included(a, b, probe)
}

fn check_generators(hid: &Identity, probe: &TheoryProbe) -> Result<Vec<String>, BirkhoffError> {
    probe.validate()?;
    let gens = hid.generators();
    if gens.len() > probe.generator_bound {
        return Err(BirkhoffError::TooManyGenerators { found: gens.len(), bound: probe.generator_bound });
    }
    Ok(gens)
}

/// Weak satisfaction: every assignment of constant t-operations to the
/// generators. For decomposable `a` the answer is checked against the
/// ordinary identity obtained by parking each generator on a fresh
/// designated element past both sides' read window.
pub fn satisfies_weakly(a: &TAlgebra, hid: &Identity, probe: &TheoryProbe) -> Result<HyperAnswer, BirkhoffError> {
    let gens = check_generators(hid, probe)?;
    a.dependence_bounds()?;
    let mut answer = HyperAnswer::Yes;
    let mut values = BTreeMap::new();
    let mut failure = None;
    let mut err = None;
    for_each_tuple(a.size(), gens.len(), |cs| {
        if failure.is_some() || err.is_some() {
            return;
        }
        values.clear();
        for (x, &c) in gens.iter().zip(cs) {
            values.insert(x.clone(), TOperation::constant(a.size(), c));
        }
        match satisfies_with(a, hid, &values) {
            Ok(Satisfaction::No(s)) => failure = Some((cs.to_vec(), s)),
            Ok(Satisfaction::Yes) => {}
            Err(e) => err = Some(e),
        }
    });
    if let Some(e) = err {
        return Err(e);
    }
    if let Some((cs, witness)) = failure {
        let assignment = gens
            .iter()
            .zip(cs)
            .map(|(x, c)| (x.clone(), HyperTerm::generator(constant_name(c), Vec::new())))
            .collect();
        answer = HyperAnswer::No { assignment, witness };
    }
    if let Some(d) = decompose_rho_dimensional(a, probe)? {
        let m = l_bound(&hid.lhs, &d.rho)?.max(l_bound(&hid.rhs, &d.rho)?);
        let parked = Identity::new(
            substitute_designated(&hid.lhs, &gens, m)?,
            substitute_designated(&hid.rhs, &gens, m)?,
        );
        let direct = satisfies_identity(a, &parked)?;
        if direct.holds() != answer.holds() {
            return Err(BirkhoffError::Disagreement(format!(
                "weak satisfaction of `{hid}` is {} but `{parked}` gives {}",
                answer.holds(),
                direct.holds()
            )));
        }
    }
    Ok(answer)
}

/// Full satisfaction, searched over assignments of top extensions drawn
/// from the polynomial clone algebra with window `max(depth_bound, dims)`.
/// A failure is exact; a pass only covers the searched assignments.
pub fn satisfies_fully(a: &TAlgebra, hid: &Identity, probe: &TheoryProbe) -> Result<HyperAnswer, BirkhoffError> {
    let gens = check_generators(hid, probe)?;
    if let no @ HyperAnswer::No { .. } = satisfies_weakly(a, hid, probe)? {
        return Ok(no);
    }
    let d = decompose_rho_dimensional(a, probe)?
        .ok_or_else(|| BirkhoffError::NotDecomposable("some dimension is open".into()))?;
    let window = probe.depth_bound.max(d.rho.max_arity());
    let poly = polynomial_clone_algebra(a, window, POLYNOMIAL_BOUND)?;
    let ops: Vec<TOperation> = (0..poly.len()).map(|i| poly.element_op(i)).collect();
    let mut checked = 0u64;
    let mut values = BTreeMap::new();
    let mut failure = None;
    let mut err = None;
    for_each_tuple(ops.len(), gens.len(), |idx| {
        if failure.is_some() || err.is_some() || checked >= ASSIGNMENT_BOUND {
            return;
        }
        checked += 1;
        values.clear();
        for (x, &i) in gens.iter().zip(idx) {
            values.insert(x.clone(), ops[i].clone());
        }
        match satisfies_with(a, hid, &values) {
            Ok(Satisfaction::No(s)) => failure = Some((idx.to_vec(), s)),
            Ok(Satisfaction::Yes) => {}
            Err(e) => err = Some(e),
        }
    });
    if let Some(e) = err {
        return Err(e);
    }
    Ok(match failure {
        Some((idx, witness)) => HyperAnswer::No {
            assignment: gens.iter().zip(idx).map(|(x, i)| (x.clone(), poly.witnesses[i].clone())).collect(),
            witness,
        },
        None if hid.is_trivial() => HyperAnswer::Yes,
        None => HyperAnswer::BoundedYes { checked },
    })
}

/// `op` viewed with arity `d`, if it ignores every argument past `d`.
fn truncate(op: &FinitaryOperation, d: usize) -> Option<FinitaryOperation> {
    if op.arity() < d || (d + 1..=op.arity()).any(|i| op.depends_on(i)) {
        return None;
    }
    Some(FinitaryOperation::from_fn(op.size(), d, |a| {
        let mut args = a.to_vec();
        args.resize(op.arity(), 0);
        op.apply(&args)
    }))
}

fn matches_member(part: &FiniteAlgebra, rho: &FinitaryType, h: &FiniteAlgebra) -> Result<bool, BirkhoffError> {
    if part.size() != h.size() || h.ops().count() != rho.len() {
        return Ok(false);
    }
    let mut cut = FiniteAlgebra::new(h.size())?;
    for (sym, d) in rho.iter() {
        match h.op(sym).and_then(|f| truncate(f, d)) {
            Some(f) => cut = cut.with_op(sym, f)?,
            None => return Ok(false),
        }
    }
    Ok(part.find_isomorphism(&cut)?.is_some())
}

/// Whether every finitary part of `a` is isomorphic to a member of `hs`.
pub fn h_star_member(a: &TAlgebra, hs: &[FiniteAlgebra], probe: &TheoryProbe) -> Result<bool, BirkhoffError> {
    let d = decompose_rho_dimensional(a, probe)?
        .ok_or_else(|| BirkhoffError::NotDecomposable("some dimension is open".into()))?;
    for (_, part) in &d.parts {
        let mut found = false;
        for h in hs {
            if matches_member(part, &d.rho, h)? {
                found = true;
                break;
            }
        }
        if !found {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubalgebraCheck {
    pub base: Thread,
    /// Sorted subuniverse of the target part.
    pub carrier: Vec<usize>,
    pub member: bool,
    pub separator: Option<RhoIdentity>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContinuityReport {
    pub holds: bool,
    pub exactness: Exactness,
    /// Set when a target dimension exceeds the source's.
    pub structural: Option<Identity>,
    pub checks: Vec<SubalgebraCheck>,
}

fn decompose_both(
    a: &TAlgebra,
    b: &TAlgebra,
    probe: &TheoryProbe,
) -> Result<(Decomposition, Decomposition), BirkhoffError> {
    probe.validate()?;
    if !a.same_type(b) {
        return Err(BirkhoffError::TypeMismatch);
    }
    let da = decompose_rho_dimensional(a, probe)?
        .ok_or_else(|| BirkhoffError::NotDecomposable("source has an open dimension".into()))?;
    let db = decompose_rho_dimensional(b, probe)?
        .ok_or_else(|| BirkhoffError::NotDecomposable("target has an open dimension".into()))?;
    Ok((da, db))
}

/// Subsets of `0..n` as sorted vectors, by bitmask.
fn subsets(n: usize) -> impl Iterator<Item = Vec<usize>> {
    (0..1u64 << n).map(move |mask| (0..n).filter(|&i| mask >> i & 1 == 1).collect())
}

/// Subuniverses `⟨F ∪ tail(b)⟩` of a target part for all `F`, deduplicated,
/// with a thread `s ≡ b` realising `set(s) = F ∪ tail(b)`.
pub fn finitary_family(part: &FiniteAlgebra, base: &Thread) -> Vec<(Vec<usize>, Thread)> {
    let tail = base.tail_values();
    let fill = *tail.iter().next().expect("nonempty cycle");
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for f in subsets(part.size()) {
        let gens: Vec<usize> = f.iter().copied().chain(tail.iter().copied()).collect();
        let carrier: Vec<usize> = part.subalgebra_generated(&gens).into_iter().collect();
        if seen.insert(carrier.clone()) {
            let mut w = f.clone();
            let len = w.len().max(base.prefix().len());
            w.resize(len, fill);
            out.push((carrier, base.patch(&w)));
        }
    }
    out
}

/// Uniform continuity of the natural clone homomorphism from `a` to `b`,
/// decided by the finitary condition: every subalgebra `⟨F ∪ tail⟩` of each
/// target part lies in the variety of the source parts.
pub fn uniformly_continuous_hom(
    a: &TAlgebra,
    b: &TAlgebra,
    probe: &TheoryProbe,
) -> Result<ContinuityReport, BirkhoffError> {
    let (da, db) = decompose_both(a, b, probe)?;
    if let Some(id) = dimension_separator(&da.rho, &db.rho) {
        return Ok(ContinuityReport { holds: false, exactness: Exactness::Exact, structural: Some(id), checks: vec![] });
    }
    let sources = da.algebras();
    let mut checks = Vec::new();
    for (base, part) in parts_at(b, &da.rho, &representatives(b.trace(), b.size()))? {
        for (carrier, _) in finitary_family(&part, &base) {
            let (sub, _) = part.restrict(&carrier.iter().copied().collect())?;
            let answer = hsp_member_multi(&sources, &sub, DEFAULT_COLUMN_BOUND)?;
            let separator = match answer {
                HspAnswer::NotMember { separator, .. } => Some(separator),
                HspAnswer::Member { .. } => None,
            };
            checks.push(SubalgebraCheck { base: base.clone(), carrier, member: separator.is_none(), separator });
        }
    }
    let holds = checks.iter().all(|c| c.member);
    Ok(ContinuityReport { holds, exactness: Exactness::Exact, structural: None, checks })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TopologicalCertificate {
    pub thread: Thread,
    /// Carrier of the t-subalgebra generated by `thread`.
    pub carrier: Vec<usize>,
    /// The power and the source thread mapped onto `thread`, when found.
    pub preimage: Option<(usize, Thread)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CrossCheck {
    pub finitary: ContinuityReport,
    pub topological: bool,
    pub power_bound: usize,
    pub certificates: Vec<TopologicalCertificate>,
}

impl CrossCheck {
    pub fn agree(&self) -> bool {
        self.finitary.holds == self.topological
    }
}

/// Extends `r_i ↦ s_i` to a map from the t-subalgebra generated by `r`
/// onto the one generated by `s`, failing on a conflict.
fn propagate(p: &TAlgebra, r: &Thread, b: &TAlgebra, s: &Thread) -> Result<Option<BTreeMap<usize, usize>>, BirkhoffError> {
    let mut f: BTreeMap<usize, usize> = BTreeMap::new();
    // past both support bounds the pair (r_i, s_i) is periodic
    let span = r.support_bound().max(s.support_bound()) + r.cycle().len() * s.cycle().len();
    for i in 1..=span {
        match f.insert(r.entry(i), s.entry(i)) {
            Some(old) if old != s.entry(i) => return Ok(None),
            _ => {}
        }
    }
    let mut windows = BTreeMap::new();
    for sym in p.symbols() {
        let d = p.op(&sym).and_then(TOperation::dependence_bound);
        let e = b.op(&sym).and_then(TOperation::dependence_bound);
        match (d, e) {
            (Some(d), Some(e)) => windows.insert(sym, d.max(e)),
            _ => return Err(BirkhoffError::NeedsBound(sym)),
        };
    }
    // elements in insertion order; tuples inside `order[..done]` are already handled
    let mut order: Vec<usize> = f.keys().copied().collect();
    let mut done = 0;
    while done < order.len() {
        let len = order.len();
        let mut fresh = Vec::new();
        for (sym, &d) in &windows {
            check_window(len, d)?;
            let mut err = None;
            for_each_tuple(len, d, |idx| {
                if err.is_some() || (d > 0 && idx.iter().all(|&i| i < done)) || (d == 0 && done > 0) {
                    return;
                }
                let w: Vec<usize> = idx.iter().map(|&i| order[i]).collect();
                let v: Vec<usize> = w.iter().map(|x| f[x]).collect();
                match (p.apply(sym, &r.patch(&w)), b.apply(sym, &s.patch(&v))) {
                    (Ok(x), Ok(y)) => fresh.push((x, y)),
                    (Err(e), _) | (_, Err(e)) => err = Some(e),
                }
            });
            if let Some(e) = err {
                return Err(e.into());
            }
        }
        done = len;
        for (x, y) in fresh {
            match f.get(&x) {
                Some(&old) if old != y => return Ok(None),
                Some(_) => {}
                None => {
                    f.insert(x, y);
                    order.push(x);
                }
            }
        }
    }
    Ok(Some(f))
}

/// Looks for a thread `r` of `pow` whose generated t-subalgebra maps onto
/// the one generated by `s` with `r ↦ s`.
fn find_preimage(pow: &TAlgebra, b: &TAlgebra, s: &Thread) -> Result<Option<Thread>, BirkhoffError> {
    let values: Vec<usize> = s.values().into_iter().collect();
    let mut found = None;
    let mut err = None;
    for_each_tuple(pow.size(), values.len(), |g| {
        if found.is_some() || err.is_some() {
            return;
        }
        // distinct values need distinct preimages
        let distinct: BTreeSet<&usize> = g.iter().collect();
        if distinct.len() != g.len() {
            return;
        }
        let r = s.map(|v| g[values.binary_search(&v).expect("value of s")]);
        if !pow.trace().contains(&r) {
            return;
        }
        match propagate(pow, &r, b, s) {
            Ok(Some(_)) => found = Some(r),
            Ok(None) => {}
            Err(e) => err = Some(e),
        }
    });
    match err {
        Some(e) => Err(e),
        None => Ok(found),
    }
}

/// Decides uniform continuity twice: by the finitary condition of
/// [`uniformly_continuous_hom`], and by searching, for each t-subalgebra
/// `B_s` of the target, a t-subalgebra of a t-power `A^n` (`n ≤` power
/// bound) mapping onto it. The source is replaced by the top extension of
/// its single finitary part over the complete trace.
pub fn cross_check_topological(a: &TAlgebra, b: &TAlgebra, probe: &TheoryProbe) -> Result<CrossCheck, BirkhoffError> {
    let finitary = uniformly_continuous_hom(a, b, probe)?;
    let (da, db) = decompose_both(a, b, probe)?;
    let source = match (a.trace(), da.parts.as_slice()) {
        (Trace::Complete, _) => a.clone(),
        (_, [(_, part)]) => TAlgebra::top_extension(part, Trace::Complete)?,
        _ => {
            return Err(BirkhoffError::Precondition(
                "the topological route needs a source with a single basic part".into(),
            ))
        }
    };
    let power_bound = probe.power_bound.unwrap_or(b.size());
    let mut powers: Vec<TAlgebra> = Vec::new();
    let mut certificates = Vec::new();
    let mut seen = BTreeSet::new();
    for (base, part) in &parts_at(b, &db.rho, &representatives(b.trace(), b.size()))? {
        for (_, s) in finitary_family(part, base) {
            let sub = b.t_subalgebra_generated(&s)?;
            if !seen.insert((base.clone(), sub.embedding.clone())) {
                continue;
            }
            let mut preimage = None;
            for n in 1..=power_bound {
                if powers.len() < n {
                    let factors: Vec<&TAlgebra> = vec![&source; n];
                    powers.push(t_product(&factors)?);
                }
                if let Some(r) = find_preimage(&powers[n - 1], b, &s)? {
                    preimage = Some((n, r));
                    break;
                }
            }
            certificates.push(TopologicalCertificate { thread: s, carrier: sub.embedding, preimage });
        }
    }
    let topological = certificates.iter().all(|c| c.preimage.is_some());
    Ok(CrossCheck { finitary, topological, power_bound, certificates })
}

/// Renders a value for reports.
pub fn describe(answer: &HyperAnswer) -> String {
    match answer {
        HyperAnswer::Yes => "yes".into(),
        HyperAnswer::BoundedYes { checked } => format!("yes ({checked} assignments)"),
        HyperAnswer::No { assignment, witness } => {
            let parts: Vec<String> = assignment.iter().map(|(x, t)| format!("{x} := {t}")).collect();
            format!("no at {witness} with {}", parts.join(", "))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::hyperterm::{parse_identity, Signature};
    use crate::talgebra::parity_algebra;
    use alloc::string::ToString;

    fn id(text: &str) -> Identity {
        parse_identity(text, &Signature::new(["s"], ["x", "y"])).unwrap()
    }

    fn s2() -> TAlgebra {
        fixtures::top_basic(&fixtures::semilattice2(), 0)
    }

    #[test]
    fn identity_examples() {
        assert_eq!(satisfies_identity(&s2(), &id("s(e1,e2) = s(e2,e1)")).unwrap(), Satisfaction::Yes);
        let no = satisfies_identity(&s2(), &id("s(e1,e2) = e1")).unwrap();
        assert_eq!(no, Satisfaction::No(Thread::constant(0).patch(&[1, 0])));
        assert!(matches!(
            satisfies_identity(&parity_algebra(), &id("s = s")),
            Err(BirkhoffError::NeedsBound(_))
        ));
    }

    #[test]
    fn decompositions() {
        let probe = TheoryProbe::default();
        let d = decompose_rho_dimensional(&s2(), &probe).unwrap().unwrap();
        assert_eq!(d.rho.arity("s"), Some(2));
        assert_eq!(d.parts.len(), 1);
        assert_eq!(d.parts[0].1, fixtures::semilattice2());
        assert!(decompose_rho_dimensional(&parity_algebra(), &probe).unwrap().is_none());
        let mj = decompose_rho_dimensional(&fixtures::meet_join_union(), &probe).unwrap().unwrap();
        assert_eq!(mj.parts.len(), 2);
        assert_ne!(mj.parts[0].1, mj.parts[1].1);
        let back = mj.rebuild().unwrap();
        let again = decompose_rho_dimensional(&back, &probe).unwrap().unwrap();
        assert_eq!(again, mj);
    }

    #[test]
    fn theory_inclusion_examples() {
        let probe = TheoryProbe::default();
        let chain = fixtures::top_basic(&fixtures::chain3(), 0);
        let nc = fixtures::top_basic(&fixtures::groupoid_nc(), 0);
        let yes = theta_included(&s2(), &s2(), &probe).unwrap();
        assert!(yes.holds && yes.exactness == Exactness::Exact);
        assert!(theta_included(&s2(), &chain, &probe).unwrap().holds);
        let no = theta_included(&s2(), &nc, &probe).unwrap();
        assert!(!no.holds);
        let sep = no.separator.unwrap();
        assert!(satisfies_identity(&s2(), &sep).unwrap().holds());
        assert!(!satisfies_identity(&nc, &sep).unwrap().holds());
        let sq = t_product(&[&s2(), &s2()]).unwrap();
        assert!(et_variety_member(&s2(), &sq, &probe).unwrap().holds);
    }

    #[test]
    fn dimension_gap_separates() {
        let probe = TheoryProbe::default();
        let lz = fixtures::top_basic(&fixtures::left_zero2(), 0);
        let no = theta_included(&lz, &s2(), &probe).unwrap();
        assert!(!no.holds);
        assert!(satisfies_identity(&lz, no.separator.as_ref().unwrap()).unwrap().holds());
        assert!(!theta_included(&s2(), &lz, &probe).unwrap().holds);
    }

    #[test]
    fn probed_inclusion_for_parity() {
        let probe = TheoryProbe { depth_bound: 2, index_bound: 2, ..TheoryProbe::default() };
        let p = parity_algebra();
        let ans = theta_included(&p, &p, &probe).unwrap();
        assert!(ans.holds);
        assert_eq!(ans.exactness, Exactness::Probed);
    }

    #[test]
    fn weak_examples() {
        let probe = TheoryProbe::default();
        assert_eq!(satisfies_weakly(&s2(), &id("x(e1) = x(e1)"), &probe).unwrap(), HyperAnswer::Yes);
        assert!(satisfies_weakly(&s2(), &id("x(s(e1,e2)) = x(s(e2,e1))"), &probe).unwrap().holds());
        match satisfies_weakly(&s2(), &id("s(x, e2) = x"), &probe).unwrap() {
            HyperAnswer::No { assignment, .. } => assert_eq!(assignment["x"].to_string(), "_c1"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn full_examples() {
        let probe = TheoryProbe { depth_bound: 2, ..TheoryProbe::default() };
        let sig = Signature::new(["s"], ["y"]);
        let hid = parse_identity("y(y(e1,e2),y(e3,e4)) = y(e1,e4)", &sig).unwrap();
        assert!(satisfies_weakly(&s2(), &hid, &probe).unwrap().holds());
        assert!(!satisfies_fully(&s2(), &hid, &probe).unwrap().holds());
        assert_eq!(satisfies_fully(&s2(), &id("s = s"), &probe).unwrap(), HyperAnswer::Yes);
        assert!(matches!(
            satisfies_fully(&s2(), &id("s(x(e1), e2) = s(e2, x(e1))"), &probe).unwrap(),
            HyperAnswer::BoundedYes { .. }
        ));
    }

    #[test]
    fn h_star_examples() {
        let probe = TheoryProbe::default();
        assert!(h_star_member(&s2(), &[fixtures::semilattice2()], &probe).unwrap());
        assert!(h_star_member(&fixtures::meet_join_union(), &[fixtures::semilattice2()], &probe).unwrap());
        assert!(!h_star_member(&s2(), &[], &probe).unwrap());
        let lz = fixtures::top_basic(&fixtures::left_zero2(), 0);
        assert!(h_star_member(&lz, &[fixtures::left_zero2()], &probe).unwrap());
    }

    #[test]
    fn continuity_examples() {
        let probe = TheoryProbe::default();
        let s2c = fixtures::top_complete(&fixtures::semilattice2());
        assert!(uniformly_continuous_hom(&s2c, &s2(), &probe).unwrap().holds);
        let chain = fixtures::top_basic(&fixtures::chain3(), 2);
        assert!(uniformly_continuous_hom(&s2c, &chain, &probe).unwrap().holds);
        let nc = fixtures::top_basic(&fixtures::groupoid_nc(), 0);
        assert!(!uniformly_continuous_hom(&s2c, &nc, &probe).unwrap().holds);
    }

    #[test]
    fn topological_routes_agree() {
        let probe = TheoryProbe::default();
        let chain = fixtures::top_basic(&fixtures::chain3(), 0);
        let c = cross_check_topological(&s2(), &chain, &probe).unwrap();
        assert!(c.agree() && c.topological);
        assert!(c.certificates.iter().all(|t| t.preimage.as_ref().unwrap().0 <= 2));
        let nc = fixtures::top_basic(&fixtures::groupoid_nc(), 0);
        let c = cross_check_topological(&s2(), &nc, &probe).unwrap();
        assert!(c.agree() && !c.topological);
        let c = cross_check_topological(&s2(), &s2(), &probe).unwrap();
        assert!(c.agree() && c.topological);
        // the tail value of (0)*[1:1] must take part in the map
        let lz = fixtures::top_basic(&fixtures::left_zero2(), 0);
        let c = cross_check_topological(&s2(), &lz, &probe).unwrap();
        assert!(c.agree() && !c.topological);
    }

    #[test]
    fn structural_identities_hold_in_rho_dimensional() {
        let probe = TheoryProbe { depth_bound: 1, index_bound: 3, ..TheoryProbe::default() };
        let rho = FinitaryType::from_pairs([("s", 2)]);
        assert_eq!(structural_violation(&s2(), &rho, &probe).unwrap(), None);
        let rho1 = FinitaryType::from_pairs([("s", 1)]);
        assert!(structural_violation(&s2(), &rho1, &probe).unwrap().is_some());
    }
}
