//! Threads `s ∈ A^ℕ` represented as an eventually periodic base with a
//! finite patch, and traces built from them.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ThreadError {
    EmptyCycle,
    ZeroIndex,
    DuplicateBase(usize, usize),
    EmptyUnion,
}

impl fmt::Display for ThreadError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ThreadError::EmptyCycle => f.write_str("the repeating cycle must be nonempty"),
            ThreadError::ZeroIndex => f.write_str("thread indices start at 1"),
            ThreadError::DuplicateBase(i, j) => {
                write!(f, "bases {i} and {j} of the trace are equivalent")
            }
            ThreadError::EmptyUnion => f.write_str("a union trace needs at least one base"),
        }
    }
}

/// `entry(i) = patch(i)` if present, else `prefix[i-1]` for `i ≤ |prefix|`,
/// else the cycle continued periodically.
#[derive(Clone, Debug)]
pub struct Thread {
    prefix: Vec<usize>,
    cycle: Vec<usize>,
    patch: BTreeMap<usize, usize>,
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub(crate) fn lcm(a: usize, b: usize) -> usize {
    a / gcd(a, b) * b
}

impl Thread {
    pub fn new(prefix: Vec<usize>, cycle: Vec<usize>) -> Result<Thread, ThreadError> {
        if cycle.is_empty() {
            return Err(ThreadError::EmptyCycle);
        }
        let mut t = Thread { prefix, cycle, patch: BTreeMap::new() };
        t.normalize();
        Ok(t)
    }

    pub fn with_patch(
        prefix: Vec<usize>,
        cycle: Vec<usize>,
        patch: BTreeMap<usize, usize>,
    ) -> Result<Thread, ThreadError> {
        if patch.contains_key(&0) {
            return Err(ThreadError::ZeroIndex);
        }
        let mut t = Thread::new(prefix, cycle)?;
        t.patch = patch;
        t.normalize();
        Ok(t)
    }

    /// The constant thread `c̄`.
    pub fn constant(c: usize) -> Thread {
        Thread { prefix: Vec::new(), cycle: vec![c], patch: BTreeMap::new() }
    }

    fn normalize(&mut self) {
        // primitive period
        let n = self.cycle.len();
        if let Some(p) = (1..n).find(|&p| n.is_multiple_of(p) && (p..n).all(|i| self.cycle[i] == self.cycle[i - p])) {
            self.cycle.truncate(p);
        }
        // fold the prefix into the cycle where it already agrees
        while let (Some(&a), Some(&b)) = (self.prefix.last(), self.cycle.last()) {
            if a != b {
                break;
            }
            self.prefix.pop();
            self.cycle.rotate_right(1);
        }
        let base = Thread { prefix: self.prefix.clone(), cycle: self.cycle.clone(), patch: BTreeMap::new() };
        self.patch.retain(|&i, v| base.entry(i) != *v);
    }

    pub fn prefix(&self) -> &[usize] {
        &self.prefix
    }

    pub fn cycle(&self) -> &[usize] {
        &self.cycle
    }

    pub fn patch_map(&self) -> &BTreeMap<usize, usize> {
        &self.patch
    }

    /// The thread without its patch.
    pub fn base(&self) -> Thread {
        Thread { prefix: self.prefix.clone(), cycle: self.cycle.clone(), patch: BTreeMap::new() }
    }

    pub fn entry(&self, i: usize) -> usize {
        assert!(i >= 1, "thread indices start at 1");
        if let Some(&v) = self.patch.get(&i) {
            return v;
        }
        if i <= self.prefix.len() {
            self.prefix[i - 1]
        } else {
            self.cycle[(i - 1 - self.prefix.len()) % self.cycle.len()]
        }
    }

    /// Past this index every entry comes from the cycle.
    pub fn support_bound(&self) -> usize {
        let p = self.patch.keys().next_back().copied().unwrap_or(0);
        p.max(self.prefix.len())
    }

    /// `s[a_1,…,a_n]`: the first `n` coordinates replaced.
    pub fn patch(&self, a: &[usize]) -> Thread {
        let mut t = self.clone();
        for (i, &v) in a.iter().enumerate() {
            t.patch.insert(i + 1, v);
        }
        t.normalize();
        t
    }

    /// Sets coordinate `i`.
    pub fn set(&self, i: usize, v: usize) -> Thread {
        assert!(i >= 1, "thread indices start at 1");
        let mut t = self.clone();
        t.patch.insert(i, v);
        t.normalize();
        t
    }

    /// `entry(1..=n)`.
    pub fn window(&self, n: usize) -> Vec<usize> {
        (1..=n).map(|i| self.entry(i)).collect()
    }

    /// `r ≡_ℕ s`: the two differ in finitely many coordinates.
    pub fn equivalent(&self, other: &Thread) -> bool {
        let start = self.support_bound().max(other.support_bound()) + 1;
        let period = lcm(self.cycle.len(), other.cycle.len());
        (start..start + period).all(|i| self.entry(i) == other.entry(i))
    }

    /// `set(s)`.
    pub fn values(&self) -> BTreeSet<usize> {
        let n = self.support_bound() + self.cycle.len();
        (1..=n).map(|i| self.entry(i)).collect()
    }

    /// Values occurring infinitely often.
    pub fn tail_values(&self) -> BTreeSet<usize> {
        self.cycle.iter().copied().collect()
    }

    pub fn max_value(&self) -> usize {
        self.values().into_iter().next_back().unwrap_or(0)
    }

    pub fn map(&self, f: impl Fn(usize) -> usize) -> Thread {
        let mut t = Thread {
            prefix: self.prefix.iter().map(|&v| f(v)).collect(),
            cycle: self.cycle.iter().map(|&v| f(v)).collect(),
            patch: self.patch.iter().map(|(&i, &v)| (i, f(v))).collect(),
        };
        t.normalize();
        t
    }

    /// Pointwise combination: `entry(i) = f(entry_1(i), …, entry_m(i))`.
    /// Patches stay patches over the combined base.
    pub fn zip_with(threads: &[Thread], f: impl Fn(&[usize]) -> usize) -> Thread {
        assert!(!threads.is_empty());
        let bases: Vec<Thread> = threads.iter().map(Thread::base).collect();
        let plen = bases.iter().map(|t| t.prefix.len()).max().unwrap_or(0);
        let clen = bases.iter().fold(1, |acc, t| lcm(acc, t.cycle.len()));
        let at = |ts: &[Thread], i: usize| {
            let row: Vec<usize> = ts.iter().map(|t| t.entry(i)).collect();
            f(&row)
        };
        let prefix = (1..=plen).map(|i| at(&bases, i)).collect();
        let cycle = (plen + 1..=plen + clen).map(|i| at(&bases, i)).collect();
        let keys: BTreeSet<usize> = threads.iter().flat_map(|t| t.patch.keys().copied()).collect();
        let patch = keys.into_iter().map(|i| (i, at(threads, i))).collect();
        let mut t = Thread { prefix, cycle, patch };
        t.normalize();
        t
    }

    /// The thread with its patch absorbed into the prefix; same entries.
    pub fn absorbed(&self) -> Thread {
        let n = self.support_bound();
        let mut t = Thread {
            prefix: self.window(n),
            cycle: (n + 1..=n + self.cycle.len()).map(|i| self.entry(i)).collect(),
            patch: BTreeMap::new(),
        };
        t.normalize();
        t
    }

    fn key(&self) -> (Vec<usize>, Vec<usize>) {
        let t = self.absorbed();
        (t.prefix, t.cycle)
    }
}

impl PartialEq for Thread {
    fn eq(&self, other: &Self) -> bool {
        self.key() == other.key()
    }
}

impl Eq for Thread {}

impl PartialOrd for Thread {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Thread {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key().cmp(&other.key())
    }
}

impl core::hash::Hash for Thread {
    fn hash<H: core::hash::Hasher>(&self, state: &mut H) {
        self.key().hash(state);
    }
}

impl fmt::Display for Thread {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.prefix {
            write!(f, "{v} ")?;
        }
        f.write_str("(")?;
        for (i, v) in self.cycle.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{v}")?;
        }
        f.write_str(")*")?;
        if !self.patch.is_empty() {
            f.write_str(" [")?;
            for (k, (i, v)) in self.patch.iter().enumerate() {
                if k > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{i}:{v}")?;
            }
            f.write_str("]")?;
        }
        Ok(())
    }
}

/// A union of `≡_ℕ`-classes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Trace {
    Basic(Thread),
    Union(Vec<Thread>),
    Complete,
}

impl Trace {
    pub fn basic(base: Thread) -> Trace {
        Trace::Basic(base.absorbed())
    }

    pub fn union(bases: Vec<Thread>) -> Result<Trace, ThreadError> {
        if bases.is_empty() {
            return Err(ThreadError::EmptyUnion);
        }
        let bases: Vec<Thread> = bases.iter().map(Thread::absorbed).collect();
        for i in 0..bases.len() {
            for j in i + 1..bases.len() {
                if bases[i].equivalent(&bases[j]) {
                    return Err(ThreadError::DuplicateBase(i, j));
                }
            }
        }
        Ok(Trace::Union(bases))
    }

    pub fn contains(&self, s: &Thread) -> bool {
        match self {
            Trace::Complete => true,
            Trace::Basic(b) => b.equivalent(s),
            Trace::Union(bs) => bs.iter().any(|b| b.equivalent(s)),
        }
    }

    /// One base per basic class; `None` for a complete trace.
    pub fn bases(&self) -> Option<Vec<Thread>> {
        match self {
            Trace::Complete => None,
            Trace::Basic(b) => Some(vec![b.clone()]),
            Trace::Union(bs) => Some(bs.clone()),
        }
    }

    /// Index of the basic class containing `s`.
    pub fn class_of(&self, s: &Thread) -> Option<usize> {
        match self {
            Trace::Complete => None,
            Trace::Basic(b) => b.equivalent(s).then_some(0),
            Trace::Union(bs) => bs.iter().position(|b| b.equivalent(s)),
        }
    }

    pub fn max_value(&self) -> Option<usize> {
        self.bases().map(|bs| bs.iter().map(Thread::max_value).max().unwrap_or(0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn patched(base: Thread, pairs: &[(usize, usize)]) -> Thread {
        pairs.iter().fold(base, |t, &(i, v)| t.set(i, v))
    }

    #[test]
    fn entries() {
        let s = patched(Thread::constant(0), &[(2, 1)]);
        assert_eq!(s.entry(2), 1);
        assert_eq!(s.entry(5), 0);
        let s = Thread::new(vec![1], vec![0, 1]).unwrap();
        assert_eq!(s.window(5), vec![1, 0, 1, 0, 1]);
        assert_eq!(s.entry(4), 0);
    }

    #[test]
    fn normalization() {
        let s = Thread::new(vec![0, 1], vec![0, 1, 0, 1]).unwrap();
        assert!(s.prefix().is_empty());
        assert_eq!(s.cycle(), &[0, 1]);
        let p = Thread::constant(0).patch(&[1]);
        assert_eq!(p.patch_map().len(), 1);
        let back = p.patch(&[0]);
        assert!(back.patch_map().is_empty());
        assert_eq!(back, Thread::constant(0));
        assert_eq!(Thread::constant(0).patch(&[]), Thread::constant(0));
        // same sequence, different split between base and patch
        let a = Thread::constant(0).patch(&[1]);
        let b = Thread::new(vec![1], vec![0]).unwrap();
        assert_eq!(a, b);
        assert!(Thread::new(vec![], vec![]).is_err());
    }

    #[test]
    fn equivalence() {
        let z = Thread::constant(0);
        assert!(z.equivalent(&z.set(3, 1)));
        assert!(!z.equivalent(&Thread::constant(1)));
        let a = Thread::new(vec![0], vec![1, 0]).unwrap();
        let b = Thread::new(vec![], vec![0, 1]).unwrap();
        assert!(a.equivalent(&b));
        let c = Thread::new(vec![], vec![1, 0]).unwrap();
        assert!(!b.equivalent(&c));
    }

    #[test]
    fn traces() {
        let one = Trace::basic(Thread::constant(1));
        assert!(one.contains(&patched(Thread::constant(1), &[(1, 0), (5, 0)])));
        assert!(!one.contains(&Thread::constant(0)));
        assert!(Trace::Complete.contains(&Thread::constant(7)));
        let u = Trace::union(vec![Thread::constant(0), Thread::constant(1)]).unwrap();
        assert_eq!(u.class_of(&Thread::constant(1).set(1, 0)), Some(1));
        assert_eq!(
            Trace::union(vec![Thread::constant(0), Thread::constant(0).set(2, 1)]),
            Err(ThreadError::DuplicateBase(0, 1))
        );
    }

    #[test]
    fn zipping() {
        let z = Thread::constant(0);
        let o = Thread::constant(1).set(1, 0);
        let t = Thread::zip_with(&[z, o], |r| r[0] * 2 + r[1]);
        assert_eq!(t.window(3), vec![0, 1, 1]);
        assert_eq!(t.base(), Thread::constant(1));
        assert_eq!(t.values(), [0, 1].into_iter().collect());
        assert_eq!(t.tail_values(), [1].into_iter().collect());
    }
}
