//! JSON file formats for algebras, threads, traces, t-algebras and clone
//! algebras, with conversions to the core types.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use clonealg_core::algebra::{FinitaryOperation, FiniteAlgebra};
use clonealg_core::clone_algebra::{FiniteCloneAlgebra, GeneratedFca};
use clonealg_core::talgebra::{builtin, TAlgebra, TOperation, BUILTINS};
use clonealg_core::thread::{Thread, Trace};

#[derive(Debug)]
pub enum FormatError {
    Io { path: PathBuf, message: String },
    /// Malformed JSON or a schema violation at a JSON path.
    Schema { path: String, message: String },
    /// Well-formed JSON describing an invalid structure.
    Invalid(String),
    UnknownBuiltin(String),
}

impl fmt::Display for FormatError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FormatError::Io { path, message } => write!(f, "{}: {message}", path.display()),
            FormatError::Schema { path, message } => write!(f, "at `{path}`: {message}"),
            FormatError::Invalid(m) => f.write_str(m),
            FormatError::UnknownBuiltin(name) => {
                write!(f, "unknown programmatic builtin `{name}` (known: {})", BUILTINS.join(", "))
            }
        }
    }
}

fn invalid(e: impl fmt::Display) -> FormatError {
    FormatError::Invalid(e.to_string())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableJson {
    pub arity: usize,
    pub table: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgebraJson {
    pub carrier: usize,
    pub ops: BTreeMap<String, TableJson>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThreadJson {
    #[serde(default)]
    pub prefix: Vec<usize>,
    pub cycle: Vec<usize>,
    /// 1-based index (as a string key) to value.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub patch: BTreeMap<String, usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TraceKind {
    Basic,
    Complete,
    Union,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceJson {
    pub kind: TraceKind,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub bases: Vec<ThreadJson>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PieceJson {
    pub base: ThreadJson,
    pub arity: usize,
    pub table: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum TOperationJson {
    Topext {
        arity: usize,
        table: Vec<usize>,
    },
    Piecewise {
        pieces: Vec<PieceJson>,
    },
    Programmatic {
        builtin: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        bound: Option<usize>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TAlgebraJson {
    pub carrier: usize,
    /// Optional declared dimension bound per symbol; `null` leaves it open.
    #[serde(default, rename = "type", skip_serializing_if = "Option::is_none")]
    pub ty: Option<BTreeMap<String, Option<usize>>>,
    pub trace: TraceJson,
    pub ops: BTreeMap<String, TOperationJson>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CloneAlgebraJson {
    pub size: usize,
    /// `e_1..e_N` as element indices.
    pub designated: Vec<usize>,
    pub tau: BTreeMap<String, usize>,
    /// `q_0..q_N`; `q[n]` has arity `n + 1`.
    pub q: Vec<TableJson>,
    /// A term naming each element, when the algebra was generated.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witnesses: Option<Vec<String>>,
}

/// Any of the structures an `-A`/`-B` file may hold.
#[derive(Clone, Debug)]
pub enum Input {
    Algebra(FiniteAlgebra),
    TAlgebra(TAlgebra),
    CloneAlgebra(FiniteCloneAlgebra),
}

impl Input {
    pub fn kind(&self) -> &'static str {
        match self {
            Input::Algebra(_) => "algebra",
            Input::TAlgebra(_) => "t-algebra",
            Input::CloneAlgebra(_) => "clone algebra",
        }
    }
}

fn parse_json<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T, FormatError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| FormatError::Schema {
        path: e.path().to_string(),
        message: e.inner().to_string(),
    })
}

pub fn read(path: &Path) -> Result<String, FormatError> {
    std::fs::read_to_string(path).map_err(|e| FormatError::Io { path: path.into(), message: e.to_string() })
}

/// Reads any input structure, telling them apart by their top-level keys.
pub fn parse_input(text: &str) -> Result<Input, FormatError> {
    let value: serde_json::Value = parse_json(text)?;
    let obj = value.as_object().ok_or(FormatError::Schema {
        path: ".".into(),
        message: "expected a JSON object".into(),
    })?;
    if obj.contains_key("trace") {
        Ok(Input::TAlgebra(parse_json::<TAlgebraJson>(text)?.to_core()?))
    } else if obj.contains_key("q") {
        Ok(Input::CloneAlgebra(parse_json::<CloneAlgebraJson>(text)?.to_core()?))
    } else {
        Ok(Input::Algebra(parse_json::<AlgebraJson>(text)?.to_core()?))
    }
}

pub fn load_input(path: &Path) -> Result<Input, FormatError> {
    parse_input(&read(path)?)
}

pub fn parse_thread(text: &str) -> Result<Thread, FormatError> {
    parse_json::<ThreadJson>(text)?.to_core()
}

impl AlgebraJson {
    pub fn to_core(&self) -> Result<FiniteAlgebra, FormatError> {
        let mut a = FiniteAlgebra::new(self.carrier).map_err(invalid)?;
        for (name, t) in &self.ops {
            a = a.with_table(name, t.arity, t.table.clone()).map_err(invalid)?;
        }
        Ok(a)
    }

    pub fn from_core(a: &FiniteAlgebra) -> AlgebraJson {
        AlgebraJson {
            carrier: a.size(),
            ops: a.ops().map(|(n, f)| (n.to_string(), TableJson::from_core(f))).collect(),
        }
    }
}

impl TableJson {
    pub fn from_core(f: &FinitaryOperation) -> TableJson {
        TableJson { arity: f.arity(), table: f.table().to_vec() }
    }

    fn to_core(&self, size: usize, name: &str) -> Result<FinitaryOperation, FormatError> {
        FinitaryOperation::new(size, self.arity, self.table.clone()).map_err(|e| FormatError::Invalid(format!("`{name}`: {e}")))
    }
}

impl ThreadJson {
    pub fn to_core(&self) -> Result<Thread, FormatError> {
        let mut patch = BTreeMap::new();
        for (k, &v) in &self.patch {
            let i: usize = k.parse().map_err(|_| FormatError::Schema {
                path: format!("patch.{k}"),
                message: "patch keys must be positive integers".into(),
            })?;
            patch.insert(i, v);
        }
        Thread::with_patch(self.prefix.clone(), self.cycle.clone(), patch).map_err(invalid)
    }

    pub fn from_core(s: &Thread) -> ThreadJson {
        ThreadJson {
            prefix: s.prefix().to_vec(),
            cycle: s.cycle().to_vec(),
            patch: s.patch_map().iter().map(|(i, v)| (i.to_string(), *v)).collect(),
        }
    }
}

impl TraceJson {
    pub fn to_core(&self) -> Result<Trace, FormatError> {
        let bases = self.bases.iter().map(ThreadJson::to_core).collect::<Result<Vec<_>, _>>()?;
        match (self.kind, bases.len()) {
            (TraceKind::Complete, 0) => Ok(Trace::Complete),
            (TraceKind::Complete, _) => Err(FormatError::Invalid("a complete trace takes no bases".into())),
            (TraceKind::Basic, 1) => Ok(Trace::basic(bases.into_iter().next().expect("one base"))),
            (TraceKind::Basic, n) => Err(FormatError::Invalid(format!("a basic trace takes one base, found {n}"))),
            (TraceKind::Union, _) => Trace::union(bases).map_err(invalid),
        }
    }

    pub fn from_core(t: &Trace) -> TraceJson {
        match t {
            Trace::Complete => TraceJson { kind: TraceKind::Complete, bases: Vec::new() },
            t => {
                let bases: Vec<ThreadJson> = t.bases().unwrap_or_default().iter().map(ThreadJson::from_core).collect();
                let kind = if matches!(t, Trace::Basic(_)) { TraceKind::Basic } else { TraceKind::Union };
                TraceJson { kind, bases }
            }
        }
    }
}

impl TAlgebraJson {
    pub fn to_core(&self) -> Result<TAlgebra, FormatError> {
        let trace = self.trace.to_core()?;
        let mut a = TAlgebra::new(self.carrier, trace).map_err(invalid)?;
        for (name, op) in &self.ops {
            let op = match op {
                TOperationJson::Topext { arity, table } => {
                    TOperation::TopExt(TableJson { arity: *arity, table: table.clone() }.to_core(self.carrier, name)?)
                }
                TOperationJson::Piecewise { pieces } => TOperation::Piecewise(
                    pieces
                        .iter()
                        .map(|p| {
                            let f = TableJson { arity: p.arity, table: p.table.clone() }.to_core(self.carrier, name)?;
                            Ok((p.base.to_core()?, f))
                        })
                        .collect::<Result<Vec<_>, FormatError>>()?,
                ),
                TOperationJson::Programmatic { builtin: b, bound } => {
                    builtin(b, *bound).ok_or_else(|| FormatError::UnknownBuiltin(b.clone()))?
                }
            };
            a = a.with_op(name, op).map_err(|e| FormatError::Invalid(format!("`{name}`: {e}")))?;
        }
        if let Some(ty) = &self.ty {
            if !ty.keys().eq(self.ops.keys()) {
                return Err(FormatError::Invalid("declared type and operations name different symbols".into()));
            }
            for (name, declared) in ty {
                let Some(bound) = declared else { continue };
                let dim = a.dimension(name, bound + 1).map_err(invalid)?;
                if dim.finite().is_none_or(|d| d > *bound) {
                    return Err(FormatError::Invalid(format!(
                        "`{name}` is declared with dimension at most {bound} but has {dim:?}"
                    )));
                }
            }
        }
        Ok(a)
    }

    /// The JSON form of `a`. Programmatic operations have no table and are
    /// refused.
    pub fn from_core(a: &TAlgebra) -> Result<TAlgebraJson, FormatError> {
        let mut ops = BTreeMap::new();
        for (name, op) in a.ops() {
            let j = match op {
                TOperation::TopExt(f) => TOperationJson::Topext { arity: f.arity(), table: f.table().to_vec() },
                TOperation::Piecewise(p) => TOperationJson::Piecewise {
                    pieces: p
                        .iter()
                        .map(|(b, f)| PieceJson { base: ThreadJson::from_core(b), arity: f.arity(), table: f.table().to_vec() })
                        .collect(),
                },
                TOperation::Programmatic { note, .. } => {
                    return Err(FormatError::Invalid(format!("`{name}` is programmatic ({note}) and has no table")))
                }
            };
            ops.insert(name.to_string(), j);
        }
        Ok(TAlgebraJson { carrier: a.size(), ty: None, trace: TraceJson::from_core(a.trace()), ops })
    }
}

impl CloneAlgebraJson {
    pub fn to_core(&self) -> Result<FiniteCloneAlgebra, FormatError> {
        let q = self
            .q
            .iter()
            .enumerate()
            .map(|(n, t)| t.to_core(self.size, &format!("q{n}")))
            .collect::<Result<Vec<_>, _>>()?;
        FiniteCloneAlgebra::new(self.size, self.designated.clone(), self.tau.clone(), q).map_err(invalid)
    }

    pub fn from_core(c: &FiniteCloneAlgebra, witnesses: Option<Vec<String>>) -> CloneAlgebraJson {
        CloneAlgebraJson {
            size: c.size(),
            designated: c.designated().to_vec(),
            tau: c.tau().clone(),
            q: (0..=c.dim_bound()).map(|n| TableJson::from_core(c.q_table(n))).collect(),
            witnesses,
        }
    }

    pub fn from_generated(g: &GeneratedFca) -> Result<CloneAlgebraJson, FormatError> {
        let c = g.export().map_err(invalid)?;
        Ok(Self::from_core(&c, Some(g.witnesses.iter().map(ToString::to_string).collect())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clonealg_core::fixtures;

    #[test]
    fn algebra_round_trip() {
        let s2 = fixtures::semilattice2();
        let text = serde_json::to_string(&AlgebraJson::from_core(&s2)).unwrap();
        match parse_input(&text).unwrap() {
            Input::Algebra(a) => assert_eq!(a, s2),
            other => panic!("{}", other.kind()),
        }
    }

    #[test]
    fn truncated_table_names_the_op() {
        let err = parse_input(r#"{"carrier":2,"ops":{"s":{"arity":2,"table":[0,0,0]}}}"#).unwrap_err();
        assert!(err.to_string().contains("`s`"), "{err}");
    }

    #[test]
    fn schema_errors_carry_a_path() {
        let err = parse_input(r#"{"carrier":2,"ops":{"s":{"arity":"two","table":[]}}}"#).unwrap_err();
        match err {
            FormatError::Schema { path, .. } => assert_eq!(path, "ops.s.arity"),
            other => panic!("{other}"),
        }
    }

    #[test]
    fn builtins_and_threads() {
        let text = r#"{"carrier":2,"trace":{"kind":"basic","bases":[{"cycle":[1]}]},
                       "ops":{"s":{"kind":"programmatic","builtin":"parity"}}}"#;
        let Input::TAlgebra(p) = parse_input(text).unwrap() else { panic!("not a t-algebra") };
        assert_eq!(p.apply("s", &Thread::constant(1).set(1, 0)).unwrap(), 0);
        let bad = r#"{"carrier":2,"trace":{"kind":"complete"},"ops":{"s":{"kind":"programmatic","builtin":"nope"}}}"#;
        assert!(matches!(parse_input(bad), Err(FormatError::UnknownBuiltin(_))));
        let s = parse_thread(r#"{"prefix":[1],"cycle":[0,1],"patch":{"2":1}}"#).unwrap();
        assert_eq!(s.entry(4), 0);
        assert_eq!(s.entry(2), 1);
        assert_eq!(ThreadJson::from_core(&s).to_core().unwrap(), s);
    }

    #[test]
    fn declared_dimensions_are_checked() {
        let ok = r#"{"carrier":2,"type":{"s":2},"trace":{"kind":"basic","bases":[{"cycle":[0]}]},
                     "ops":{"s":{"kind":"topext","arity":2,"table":[0,0,0,1]}}}"#;
        assert!(matches!(parse_input(ok), Ok(Input::TAlgebra(_))));
        let low = ok.replace(r#""s":2"#, r#""s":1"#);
        assert!(matches!(parse_input(&low), Err(FormatError::Invalid(_))));
    }

    #[test]
    fn clone_algebra_round_trip() {
        let c = FiniteCloneAlgebra::projection_window(3);
        let j = CloneAlgebraJson::from_core(&c, None);
        match parse_input(&serde_json::to_string(&j).unwrap()).unwrap() {
            Input::CloneAlgebra(d) => assert_eq!(d, c),
            other => panic!("{}", other.kind()),
        }
    }
}
