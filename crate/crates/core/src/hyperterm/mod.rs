//! Hyperterms over designated elements `e_i` and generators, ρ-terms over
//! variables `v_i`, and the syntactic operations connecting them.
//!
//! A hyperterm `w(t_1,…,t_k)` stands for the infinite application
//! `w(t_1,…,t_k,e_{k+1},e_{k+2},…)`. The stored argument list is kept in
//! canonical form: the last argument of an application is never `e_k` where
//! `k` is its position. With that rule, two hyperterms denote the same
//! syntactic object exactly when their trees are equal.

pub(crate) mod enumerate;
mod parse;

pub use enumerate::{enumerate_hyperterms, enumerate_rho_terms, structural_identities, HeadSpec};
pub use parse::{
    parse_hyperterm, parse_identity, parse_rho_identity, parse_rho_term, scan_identifiers,
    ParseError, ParseErrorKind,
};

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

/// Map from operation symbol to arity.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FinitaryType(BTreeMap<String, usize>);

impl FinitaryType {
    pub fn new() -> Self {
        FinitaryType(BTreeMap::new())
    }

    pub fn from_pairs<S: Into<String>, I: IntoIterator<Item = (S, usize)>>(pairs: I) -> Self {
        FinitaryType(pairs.into_iter().map(|(s, n)| (s.into(), n)).collect())
    }

    pub fn insert(&mut self, symbol: impl Into<String>, arity: usize) {
        self.0.insert(symbol.into(), arity);
    }

    pub fn arity(&self, symbol: &str) -> Option<usize> {
        self.0.get(symbol).copied()
    }

    pub fn symbols(&self) -> impl Iterator<Item = &str> {
        self.0.keys().map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, usize)> {
        self.0.iter().map(|(s, &n)| (s.as_str(), n))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn max_arity(&self) -> usize {
        self.0.values().copied().max().unwrap_or(0)
    }
}

/// Operation symbols and generator names a hyperterm may mention.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Signature {
    pub ops: BTreeSet<String>,
    pub generators: BTreeSet<String>,
}

impl Signature {
    pub fn new<A, B>(ops: A, generators: B) -> Self
    where
        A: IntoIterator,
        A::Item: Into<String>,
        B: IntoIterator,
        B::Item: Into<String>,
    {
        Signature {
            ops: ops.into_iter().map(Into::into).collect(),
            generators: generators.into_iter().map(Into::into).collect(),
        }
    }

    pub fn from_type(rho: &FinitaryType) -> Self {
        Signature {
            ops: rho.symbols().map(String::from).collect(),
            generators: BTreeSet::new(),
        }
    }

    pub fn with_generators<I, S>(mut self, generators: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.generators.extend(generators.into_iter().map(Into::into));
        self
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Head {
    Op(String),
    Generator(String),
}

impl Head {
    pub fn name(&self) -> &str {
        match self {
            Head::Op(s) | Head::Generator(s) => s,
        }
    }

    pub fn is_generator(&self) -> bool {
        matches!(self, Head::Generator(_))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum HyperTerm {
    /// `e_i`, `i ≥ 1`.
    Designated(usize),
    Apply(Head, Vec<HyperTerm>),
}

/// Errors from the syntactic translations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TermError {
    UnknownSymbol(String),
    UnexpectedGenerator(String),
    UnknownGenerator(String),
}

impl fmt::Display for TermError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TermError::UnknownSymbol(s) => write!(f, "symbol `{s}` is not in the finitary type"),
            TermError::UnexpectedGenerator(s) => {
                write!(f, "generator `{s}` is not allowed here")
            }
            TermError::UnknownGenerator(s) => write!(f, "generator `{s}` is not in the list"),
        }
    }
}

impl HyperTerm {
    pub fn e(i: usize) -> HyperTerm {
        assert!(i >= 1, "designated indices start at 1");
        HyperTerm::Designated(i)
    }

    /// `σ(args)` in canonical form.
    pub fn op(symbol: impl Into<String>, args: Vec<HyperTerm>) -> HyperTerm {
        HyperTerm::Apply(Head::Op(symbol.into()), args).canonicalize()
    }

    /// `x(args)` for a generator `x`, in canonical form.
    pub fn generator(name: impl Into<String>, args: Vec<HyperTerm>) -> HyperTerm {
        HyperTerm::Apply(Head::Generator(name.into()), args).canonicalize()
    }

    pub fn canonicalize(self) -> HyperTerm {
        match self {
            HyperTerm::Designated(i) => HyperTerm::Designated(i),
            HyperTerm::Apply(head, args) => {
                let args = args.into_iter().map(HyperTerm::canonicalize).collect();
                HyperTerm::Apply(head, trim_tail(args))
            }
        }
    }

    pub fn is_canonical(&self) -> bool {
        match self {
            HyperTerm::Designated(i) => *i >= 1,
            HyperTerm::Apply(_, args) => {
                args.last() != Some(&HyperTerm::Designated(args.len()))
                    && args.iter().all(HyperTerm::is_canonical)
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            HyperTerm::Designated(_) => 0,
            HyperTerm::Apply(_, args) => 1 + args.iter().map(HyperTerm::depth).max().unwrap_or(0),
        }
    }

    pub fn size(&self) -> usize {
        match self {
            HyperTerm::Designated(_) => 1,
            HyperTerm::Apply(_, args) => 1 + args.iter().map(HyperTerm::size).sum::<usize>(),
        }
    }

    pub fn has_generators(&self) -> bool {
        match self {
            HyperTerm::Designated(_) => false,
            HyperTerm::Apply(h, args) => h.is_generator() || args.iter().any(Self::has_generators),
        }
    }

    /// Generator names in order of first occurrence.
    pub fn generators(&self) -> Vec<String> {
        fn walk(t: &HyperTerm, out: &mut Vec<String>) {
            if let HyperTerm::Apply(h, args) = t {
                if let Head::Generator(x) = h {
                    if !out.iter().any(|y| y == x) {
                        out.push(x.clone());
                    }
                }
                for a in args {
                    walk(a, out);
                }
            }
        }
        let mut out = Vec::new();
        walk(self, &mut out);
        out
    }

    pub fn op_symbols(&self) -> BTreeSet<String> {
        fn walk(t: &HyperTerm, out: &mut BTreeSet<String>) {
            if let HyperTerm::Apply(h, args) = t {
                if let Head::Op(s) = h {
                    out.insert(s.clone());
                }
                for a in args {
                    walk(a, out);
                }
            }
        }
        let mut out = BTreeSet::new();
        walk(self, &mut out);
        out
    }

    /// Largest `i` with `e_i` occurring. When `rho` is given, an application
    /// of `σ ∈ ρ_n` with fewer than `n` explicit arguments also counts the
    /// implicit padding `e_{k+1},…,e_n`.
    pub fn max_designated_index(&self, rho: Option<&FinitaryType>) -> usize {
        self.max_index_with(&|name: &str| rho.and_then(|r| r.arity(name)).unwrap_or(0))
    }

    /// Like [`HyperTerm::max_designated_index`] but with padding widths
    /// supplied per head name (generators included).
    pub fn max_index_with(&self, width: &dyn Fn(&str) -> usize) -> usize {
        match self {
            HyperTerm::Designated(i) => *i,
            HyperTerm::Apply(h, args) => {
                let own = width(h.name());
                let pad = if own > args.len() { own } else { 0 };
                args.iter()
                    .map(|a| a.max_index_with(width))
                    .fold(pad, usize::max)
            }
        }
    }
}

fn trim_tail(mut args: Vec<HyperTerm>) -> Vec<HyperTerm> {
    while let Some(HyperTerm::Designated(i)) = args.last() {
        if *i == args.len() {
            args.pop();
        } else {
            break;
        }
    }
    args
}

impl fmt::Display for HyperTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HyperTerm::Designated(i) => write!(f, "e{i}"),
            HyperTerm::Apply(h, args) => {
                f.write_str(h.name())?;
                if !args.is_empty() {
                    f.write_str("(")?;
                    for (i, a) in args.iter().enumerate() {
                        if i > 0 {
                            f.write_str(",")?;
                        }
                        write!(f, "{a}")?;
                    }
                    f.write_str(")")?;
                }
                Ok(())
            }
        }
    }
}

/// Terms of a finitary type over variables `v_1, v_2, …`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RhoTerm {
    Var(usize),
    Node(String, Vec<RhoTerm>),
}

impl RhoTerm {
    pub fn var(i: usize) -> RhoTerm {
        assert!(i >= 1, "variable indices start at 1");
        RhoTerm::Var(i)
    }

    pub fn node(symbol: impl Into<String>, children: Vec<RhoTerm>) -> RhoTerm {
        RhoTerm::Node(symbol.into(), children)
    }

    pub fn depth(&self) -> usize {
        match self {
            RhoTerm::Var(_) => 0,
            RhoTerm::Node(_, c) => 1 + c.iter().map(RhoTerm::depth).max().unwrap_or(0),
        }
    }

    pub fn max_var(&self) -> usize {
        match self {
            RhoTerm::Var(i) => *i,
            RhoTerm::Node(_, c) => c.iter().map(RhoTerm::max_var).max().unwrap_or(0),
        }
    }

    /// Checks every node against the declared arities.
    pub fn check(&self, rho: &FinitaryType) -> Result<(), TermError> {
        match self {
            RhoTerm::Var(_) => Ok(()),
            RhoTerm::Node(s, c) => match rho.arity(s) {
                Some(n) if n == c.len() => c.iter().try_for_each(|t| t.check(rho)),
                _ => Err(TermError::UnknownSymbol(s.clone())),
            },
        }
    }
}

impl fmt::Display for RhoTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RhoTerm::Var(i) => write!(f, "v{i}"),
            RhoTerm::Node(s, c) => {
                f.write_str(s)?;
                if !c.is_empty() {
                    f.write_str("(")?;
                    for (i, a) in c.iter().enumerate() {
                        if i > 0 {
                            f.write_str(",")?;
                        }
                        write!(f, "{a}")?;
                    }
                    f.write_str(")")?;
                }
                Ok(())
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Identity {
    pub lhs: HyperTerm,
    pub rhs: HyperTerm,
}

impl Identity {
    pub fn new(lhs: HyperTerm, rhs: HyperTerm) -> Self {
        Identity { lhs, rhs }
    }

    pub fn generators(&self) -> Vec<String> {
        let mut g = self.lhs.generators();
        for x in self.rhs.generators() {
            if !g.contains(&x) {
                g.push(x);
            }
        }
        g
    }

    pub fn is_trivial(&self) -> bool {
        self.lhs == self.rhs
    }
}

impl fmt::Display for Identity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = {}", self.lhs, self.rhs)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RhoIdentity {
    pub lhs: RhoTerm,
    pub rhs: RhoTerm,
}

impl fmt::Display for RhoIdentity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = {}", self.lhs, self.rhs)
    }
}

/// Composition in the free clone algebra: substitutes `us[i-1]` for `e_i`
/// (`i ≤ n = us.len()`), leaves `e_i` alone for `i > n`, and pushes the
/// substitution under every head, including the implicit tail.
pub fn q_compose(t: &HyperTerm, us: &[HyperTerm]) -> HyperTerm {
    let n = us.len();
    match t {
        HyperTerm::Designated(i) => {
            if *i <= n {
                us[i - 1].clone()
            } else {
                t.clone()
            }
        }
        HyperTerm::Apply(head, args) => {
            let k = args.len();
            let mut out: Vec<HyperTerm> = args.iter().map(|a| q_compose(a, us)).collect();
            if n > k {
                out.extend(us[k..].iter().cloned());
            }
            HyperTerm::Apply(head.clone(), trim_tail(out))
        }
    }
}

/// `v_i ↦ e_i`, `σ(p_1,…,p_n) ↦ σ(p_1^⋆,…,p_n^⋆,e_{n+1},…)`.
pub fn star(p: &RhoTerm) -> HyperTerm {
    match p {
        RhoTerm::Var(i) => HyperTerm::Designated(*i),
        RhoTerm::Node(s, c) => HyperTerm::Apply(Head::Op(s.clone()), trim_tail(c.iter().map(star).collect())),
    }
}

/// Inverse translation into ρ-terms. Missing arguments are padded with
/// `v_{k+1},…,v_n`; surplus arguments beyond the arity are dropped and the
/// first `n` are translated recursively.
pub fn bullet(t: &HyperTerm, rho: &FinitaryType) -> Result<RhoTerm, TermError> {
    match t {
        HyperTerm::Designated(i) => Ok(RhoTerm::Var(*i)),
        HyperTerm::Apply(Head::Generator(x), _) => Err(TermError::UnexpectedGenerator(x.clone())),
        HyperTerm::Apply(Head::Op(s), args) => {
            let n = rho.arity(s).ok_or_else(|| TermError::UnknownSymbol(s.clone()))?;
            let mut children = Vec::with_capacity(n);
            for a in args.iter().take(n) {
                children.push(bullet(a, rho)?);
            }
            for j in args.len() + 1..=n {
                children.push(RhoTerm::Var(j));
            }
            Ok(RhoTerm::Node(s.clone(), children))
        }
    }
}

/// Whether `t` is `p^⋆` for some ρ-term `p`.
pub fn in_star_image(t: &HyperTerm, rho: &FinitaryType) -> bool {
    match t {
        HyperTerm::Designated(_) => true,
        HyperTerm::Apply(Head::Generator(_), _) => false,
        HyperTerm::Apply(Head::Op(s), args) => match rho.arity(s) {
            Some(n) => args.len() <= n && args.iter().all(|a| in_star_image(a, rho)),
            None => false,
        },
    }
}

/// Replaces every generator-headed subterm `x_i(…)` by `e_{m+i}` where `i`
/// is the 1-based position of `x_i` in `generators`.
pub fn substitute_designated(
    t: &HyperTerm,
    generators: &[String],
    m: usize,
) -> Result<HyperTerm, TermError> {
    match t {
        HyperTerm::Designated(i) => Ok(HyperTerm::Designated(*i)),
        HyperTerm::Apply(Head::Generator(x), _) => generators
            .iter()
            .position(|g| g == x)
            .map(|i| HyperTerm::Designated(m + i + 1))
            .ok_or_else(|| TermError::UnknownGenerator(x.clone())),
        HyperTerm::Apply(head @ Head::Op(_), args) => {
            let args = args
                .iter()
                .map(|a| substitute_designated(a, generators, m))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(HyperTerm::Apply(head.clone(), trim_tail(args)))
        }
    }
}

/// The window `l(t)` beyond which generator values can be parked when
/// reducing weak satisfaction to ordinary satisfaction.
pub fn l_bound(t: &HyperTerm, rho: &FinitaryType) -> Result<usize, TermError> {
    match t {
        HyperTerm::Designated(i) => Ok(*i),
        HyperTerm::Apply(Head::Generator(_), _) => Ok(0),
        HyperTerm::Apply(Head::Op(s), args) => {
            let n = rho.arity(s).ok_or_else(|| TermError::UnknownSymbol(s.clone()))?;
            let mut best = n;
            for i in 1..=n {
                let li = match args.get(i - 1) {
                    Some(a) => l_bound(a, rho)?,
                    None => i,
                };
                best = best.max(li);
            }
            Ok(1 + best)
        }
    }
}

/// The identity `t = (t^•)^⋆`, written with `t` on the left; structural when
/// `t` is outside the image of `star`.
pub fn structural_identity(t: &HyperTerm, rho: &FinitaryType) -> Result<Identity, TermError> {
    Ok(Identity::new(t.clone(), star(&bullet(t, rho)?)))
}

pub(crate) fn symbol_is_reserved(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some('e') | Some('v'))
        && name.len() > 1
        && name[1..].chars().all(|c| c.is_ascii_digit())
}

impl From<&str> for Head {
    fn from(s: &str) -> Self {
        Head::Op(s.to_string())
    }
}
