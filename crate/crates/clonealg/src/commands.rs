//! One function per verb. Each returns a [`Report`]; the caller fills in
//! the verb name and the input digest.

use std::collections::BTreeMap;
use std::path::Path;

use serde_json::{json, Value};

use clonealg_core::algebra::{free_algebra_in_var, hsp_member, FiniteAlgebra, HspAnswer};
use clonealg_core::birkhoff::{
    cross_check_topological, decompose_rho_dimensional, describe, et_variety_member, h_star_member, satisfies_fully,
    satisfies_identity, satisfies_weakly, HyperAnswer, Satisfaction, TheoryAnswer, TheoryProbe,
};
use clonealg_core::clone_algebra::{
    check_free_axioms, full_fca, head_specs, polynomial_clone_algebra, term_clone_algebra, GeneratedFca,
};
use clonealg_core::hyperterm::{
    bullet, enumerate_hyperterms, parse_hyperterm, parse_identity, parse_rho_term, q_compose, scan_identifiers, star,
    substitute_designated, FinitaryType, Identity, Signature,
};
use clonealg_core::talgebra::{Dimension, TAlgebra};
use clonealg_core::thread::{Thread, Trace};

use crate::cli::{Common, Verb};
use crate::formats::{self, AlgebraJson, CloneAlgebraJson, FormatError, Input, ThreadJson};
use crate::report::{CliError, Report};

/// Element bound for finitary clone levels.
const LEVEL_BOUND: usize = 1 << 16;

fn usage(m: impl Into<String>) -> CliError {
    CliError::Usage(m.into())
}

fn required<T>(v: Option<T>, what: &str) -> Result<T, CliError> {
    v.ok_or_else(|| usage(format!("missing {what}")))
}

fn list(text: &str) -> Vec<String> {
    text.split(',').map(str::trim).filter(|s| !s.is_empty()).map(String::from).collect()
}

/// Loaded `-A`/`-B` inputs and the probe built from the flags.
pub struct Context {
    pub a: Option<Input>,
    pub b: Vec<Input>,
    pub probe: TheoryProbe,
    /// `--depth` and `--index` as given, for verbs with their own defaults.
    pub depth: Option<usize>,
    pub index: Option<usize>,
}

impl Context {
    pub fn load(common: &Common) -> Result<Context, CliError> {
        let a = common.a.as_deref().map(formats::load_input).transpose()?;
        let b = common.b.iter().map(|p| formats::load_input(p)).collect::<Result<Vec<_>, FormatError>>()?;
        let d = TheoryProbe::default();
        let probe = TheoryProbe {
            depth_bound: common.depth.unwrap_or(d.depth_bound),
            index_bound: common.index.unwrap_or(d.index_bound),
            generator_bound: common.gens.unwrap_or(d.generator_bound),
            power_bound: common.power,
            dimension_probe: d.dimension_probe,
        };
        probe.validate()?;
        Ok(Context { a, b, probe, depth: common.depth, index: common.index })
    }

    fn a(&self) -> Result<&Input, CliError> {
        self.a.as_ref().ok_or_else(|| usage("this verb needs -A"))
    }

    fn single_b(&self) -> Result<&Input, CliError> {
        match self.b.as_slice() {
            [b] => Ok(b),
            [] => Err(usage("this verb needs -B")),
            _ => Err(usage("this verb takes a single -B")),
        }
    }

    /// Operation symbols of `-A`, if any.
    fn symbols(&self) -> Vec<String> {
        match &self.a {
            Some(Input::Algebra(a)) => a.ops().map(|(n, _)| n.to_string()).collect(),
            Some(Input::TAlgebra(a)) => a.symbols().into_iter().collect(),
            Some(Input::CloneAlgebra(c)) => c.tau().keys().cloned().collect(),
            None => Vec::new(),
        }
    }

    /// Operation symbols from `--ops`, else from `-A`; every other
    /// identifier in `texts` is a generator.
    fn signature(&self, ops: Option<&str>, texts: &[&str]) -> Signature {
        let ops = ops.map(list).unwrap_or_else(|| self.symbols());
        let gens: Vec<String> =
            texts.iter().flat_map(|t| scan_identifiers(t)).filter(|x| !ops.contains(x)).collect();
        Signature::new(ops, gens)
    }
}

/// A finite algebra lifts to its top extension over the basic class of
/// `0̄`; a clone algebra is read through its underlying t-algebra.
pub fn as_t_algebra(input: &Input) -> Result<TAlgebra, CliError> {
    match input {
        Input::Algebra(a) => Ok(TAlgebra::top_extension(a, Trace::basic(Thread::constant(0)))?),
        Input::TAlgebra(a) => Ok(a.clone()),
        Input::CloneAlgebra(c) => Ok(c.under_t_algebra()),
    }
}

pub fn as_finite(input: &Input) -> Result<&FiniteAlgebra, CliError> {
    match input {
        Input::Algebra(a) => Ok(a),
        other => Err(usage(format!("expected a finite algebra, found a {}", other.kind()))),
    }
}

/// Reads a finitary type `s:2,c:0`.
fn parse_type(text: &str) -> Result<FinitaryType, CliError> {
    let mut rho = FinitaryType::new();
    for item in list(text) {
        let (name, arity) = item.split_once(':').ok_or_else(|| usage(format!("`{item}` is not `symbol:arity`")))?;
        let arity = arity.trim().parse().map_err(|_| usage(format!("bad arity in `{item}`")))?;
        rho.insert(name.trim(), arity);
    }
    Ok(rho)
}

/// Reads the arity of each symbol off its applications in a rho-term.
/// Bare identifiers other than `v<i>` are constants.
fn infer_type(text: &str) -> Result<FinitaryType, CliError> {
    let mut found: BTreeMap<String, usize> = BTreeMap::new();
    let mut record = |name: &str, n: usize| match found.insert(name.into(), n) {
        Some(m) if m != n => Err(usage(format!("`{name}` is used with {m} and {n} arguments"))),
        _ => Ok(()),
    };
    // (symbol, commas seen, any argument seen)
    let mut stack: Vec<(String, usize, bool)> = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let name: String = chars[start..i].iter().collect();
            if let Some(top) = stack.last_mut() {
                top.2 = true;
            }
            let mut j = i;
            while j < chars.len() && chars[j].is_whitespace() {
                j += 1;
            }
            if j < chars.len() && chars[j] == '(' {
                stack.push((name, 0, false));
                i = j + 1;
            } else if !scan_identifiers(&name).is_empty() {
                record(&name, 0)?;
            }
            continue;
        }
        match c {
            ',' => {
                if let Some(top) = stack.last_mut() {
                    top.1 += 1;
                }
            }
            ')' => {
                let (name, commas, any) = stack.pop().ok_or_else(|| usage("unbalanced `)`"))?;
                record(&name, if any { commas + 1 } else { 0 })?;
            }
            c if c.is_ascii_digit() => {
                if let Some(top) = stack.last_mut() {
                    top.2 = true;
                }
            }
            _ => {}
        }
        i += 1;
    }
    Ok(FinitaryType::from_pairs(found))
}

fn dimension_value(d: Dimension) -> Value {
    match d {
        Dimension::Finite(n) => json!(n),
        Dimension::AtLeast(n) => json!(format!(">={n}")),
    }
}

fn thread_value(s: &Thread) -> Value {
    serde_json::to_value(ThreadJson::from_core(s)).expect("threads serialise")
}

fn hyper_report(answer: &HyperAnswer) -> Report {
    let r = Report::yes_no(answer.holds());
    match answer {
        HyperAnswer::Yes => r.exact(),
        HyperAnswer::BoundedYes { checked } => r.exactness("probed").certificate(json!({ "checked": checked })),
        HyperAnswer::No { assignment, witness } => r.exact().witness(json!({
            "assignment": assignment.iter().map(|(x, t)| (x.clone(), json!(t.to_string()))).collect::<serde_json::Map<_, _>>(),
            "thread": thread_value(witness),
            "text": describe(answer),
        })),
    }
}

fn theory_report(t: &TheoryAnswer) -> Report {
    let mut witness = serde_json::Map::new();
    if let Some(id) = &t.separator {
        witness.insert("separator".into(), json!(id.to_string()));
    }
    if let Some(s) = &t.witness {
        witness.insert("thread".into(), thread_value(s));
    }
    let r = Report::yes_no(t.holds).exactness(t.exactness.as_str()).certificate(json!({ "note": t.note }));
    if witness.is_empty() {
        r
    } else {
        r.witness(Value::Object(witness))
    }
}

/// Default window of a generated clone algebra: the largest dependence
/// bound, at least 1.
fn default_window(a: &TAlgebra) -> Result<usize, CliError> {
    Ok(a.dependence_bounds()?.values().copied().max().unwrap_or(0).max(1))
}

fn generated(a: &TAlgebra, window: Option<usize>, poly: bool, full: bool, cap: usize) -> Result<GeneratedFca, CliError> {
    let window = match window {
        Some(w) => w,
        None => default_window(a)?,
    };
    Ok(if full {
        full_fca(a, window, cap)?
    } else if poly {
        polynomial_clone_algebra(a, window, cap)?
    } else {
        term_clone_algebra(a, window, cap)?
    })
}

fn write_json(path: &Path, v: &impl serde::Serialize) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(v).expect("formats serialise");
    std::fs::write(path, text + "\n").map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

pub fn run(verb: &Verb, ctx: &Context) -> Result<Report, CliError> {
    match verb {
        Verb::Parse { term, ops } => {
            let text = required(term.as_deref(), "term")?;
            let sig = ctx.signature(ops.as_deref(), &[text]);
            if text.contains('=') {
                let id = parse_identity(text, &sig)?;
                let id = Identity::new(id.lhs.canonicalize(), id.rhs.canonicalize());
                return Ok(Report::new(id.to_string()).certificate(json!({ "generators": id.generators() })));
            }
            let t = parse_hyperterm(text, &sig)?.canonicalize();
            Ok(Report::new(t.to_string()).certificate(json!({
                "depth": t.depth(),
                "size": t.size(),
                "generators": t.generators(),
                "max_index": t.max_designated_index(None),
            })))
        }
        Verb::Compose { n, terms, ops } => {
            let texts: Vec<&str> = terms.iter().map(String::as_str).collect();
            let (t, us) = texts.split_first().ok_or_else(|| usage("compose needs a term"))?;
            if let Some(n) = n {
                if us.len() != *n {
                    return Err(usage(format!("-n {n} needs {n} terms after the first, found {}", us.len())));
                }
            }
            let sig = ctx.signature(ops.as_deref(), &texts);
            let t = parse_hyperterm(t, &sig)?;
            let us = us.iter().map(|u| parse_hyperterm(u, &sig)).collect::<Result<Vec<_>, _>>()?;
            Ok(Report::new(q_compose(&t, &us).canonicalize().to_string()))
        }
        Verb::Translate { star: to_star, bullet: to_bullet, subst, term, rho, generators, offset, ops } => {
            let text = required(term.as_deref(), "term")?;
            let rho = match (rho, &ctx.a) {
                (Some(r), _) => parse_type(r)?,
                (None, Some(Input::Algebra(a))) => a.finitary_type(),
                (None, _) => infer_type(text)?,
            };
            if *to_star {
                let p = parse_rho_term(text, &rho)?;
                Ok(Report::new(star(&p).canonicalize().to_string()))
            } else if *to_bullet {
                let ops: Vec<String> = rho.symbols().map(String::from).collect();
                let sig = ctx.signature(Some(&ops.join(",")), &[text]);
                let t = parse_hyperterm(text, &sig)?.canonicalize();
                Ok(Report::new(bullet(&t, &rho)?.to_string()))
            } else if *subst {
                let sig = ctx.signature(ops.as_deref(), &[text]);
                let t = parse_hyperterm(text, &sig)?;
                let gens = generators.as_deref().map(list).unwrap_or_else(|| t.generators());
                let m = offset.unwrap_or_else(|| t.max_designated_index(None));
                let out = substitute_designated(&t, &gens, m)?.canonicalize();
                Ok(Report::new(out.to_string()).certificate(json!({ "generators": gens, "offset": m })))
            } else {
                Err(usage("translate needs one of --star, --bullet, --subst"))
            }
        }
        Verb::Eval { term, thread, patch, base } => {
            let a = as_t_algebra(ctx.a()?)?;
            let text = required(term.as_deref(), "term")?;
            let t = parse_hyperterm(text, &ctx.signature(None, &[text]))?;
            let s = match (thread, patch) {
                (Some(j), _) => formats::parse_thread(j)?,
                (None, p) => {
                    let bases = a.trace().bases().unwrap_or_else(|| vec![Thread::constant(0)]);
                    let b = bases.get(*base).ok_or_else(|| usage(format!("the trace has no base {base}")))?;
                    let values = p
                        .as_deref()
                        .map(list)
                        .unwrap_or_default()
                        .iter()
                        .map(|v| v.parse::<usize>().map_err(|_| usage(format!("bad patch value `{v}`"))))
                        .collect::<Result<Vec<_>, _>>()?;
                    b.patch(&values)
                }
            };
            Ok(Report::new(a.term_op_eval(&t, &s)?).exact().certificate(json!({ "thread": thread_value(&s) })))
        }
        Verb::Dim { symbol, element, probe } => {
            if let Some(e) = element {
                let Input::CloneAlgebra(c) = ctx.a()? else {
                    return Err(usage("--element needs a clone algebra"));
                };
                if *e >= c.size() {
                    return Err(usage(format!("element {e} is outside the carrier of size {}", c.size())));
                }
                return Ok(Report::new(c.element_dimension(*e)).exact());
            }
            let a = as_t_algebra(ctx.a()?)?;
            let symbols: Vec<String> = match symbol {
                Some(s) => vec![s.clone()],
                None => a.symbols().into_iter().collect(),
            };
            let mut dims = serde_json::Map::new();
            let mut exact = true;
            for s in &symbols {
                let d = a.dimension(s, *probe)?;
                exact &= d.finite().is_some();
                dims.insert(s.clone(), dimension_value(d));
            }
            let answer = match symbol {
                Some(s) => dims.remove(s).expect("computed"),
                None => Value::Object(dims),
            };
            Ok(Report::new(answer).exactness(if exact { "exact" } else { "probed" }))
        }
        Verb::CloneGen { arity, window, poly, full, cap, out } => {
            if let (Some(n), Input::Algebra(a)) = (arity, ctx.a()?) {
                let c = a.clone_level_with_terms(*n, LEVEL_BOUND.min(*cap))?;
                let terms: Vec<String> = c.terms.iter().map(ToString::to_string).collect();
                return Ok(Report::new(c.elements.len()).exact().certificate(json!({ "terms": terms })));
            }
            let a = as_t_algebra(ctx.a()?)?;
            let g = generated(&a, *window, *poly, *full, *cap)?;
            let exported = CloneAlgebraJson::from_generated(&g)?;
            if let Some(path) = out {
                write_json(path, &exported)?;
            }
            Ok(Report::new(g.len()).exact().certificate(json!({
                "window": g.window,
                "witnesses": exported.witnesses,
            })))
        }
        Verb::FreeAlgebra { k } => {
            let a = as_finite(ctx.a()?)?;
            let f = free_algebra_in_var(a, *k)?;
            let terms: Vec<String> = f.terms.iter().map(ToString::to_string).collect();
            Ok(Report::new(f.algebra.size()).exact().certificate(json!({
                "generators": f.generators,
                "terms": terms,
                "algebra": AlgebraJson::from_core(&f.algebra),
            })))
        }
        Verb::Hsp => {
            let a = as_finite(ctx.a()?)?;
            let b = as_finite(ctx.single_b()?)?;
            Ok(match hsp_member(a, b)? {
                HspAnswer::Member { target_generators, free_size, surjection } => Report::yes_no(true).exact().certificate(
                    json!({ "target_generators": target_generators, "free_size": free_size, "surjection": surjection }),
                ),
                HspAnswer::NotMember { separator, assignment } => Report::yes_no(false)
                    .exact()
                    .witness(json!({ "separator": separator.to_string(), "assignment": assignment })),
            })
        }
        Verb::CheckId { identity } => {
            let a = as_t_algebra(ctx.a()?)?;
            let text = required(identity.as_deref(), "identity")?;
            let id = parse_identity(text, &ctx.signature(None, &[text]))?;
            Ok(match satisfies_identity(&a, &id)? {
                Satisfaction::Yes => Report::yes_no(true).exact(),
                Satisfaction::No(s) => Report::yes_no(false).exact().witness(json!({ "thread": thread_value(&s) })),
            })
        }
        Verb::CheckHyperid { identity, weak: _, full } => {
            let a = as_t_algebra(ctx.a()?)?;
            let text = required(identity.as_deref(), "hyperidentity")?;
            let id = parse_identity(text, &ctx.signature(None, &[text]))?;
            let answer = if *full {
                satisfies_fully(&a, &id, &ctx.probe)?
            } else {
                satisfies_weakly(&a, &id, &ctx.probe)?
            };
            Ok(hyper_report(&answer))
        }
        Verb::Decompose => {
            let a = as_t_algebra(ctx.a()?)?;
            Ok(match decompose_rho_dimensional(&a, &ctx.probe)? {
                Some(d) => {
                    let parts: Vec<Value> = d
                        .parts
                        .iter()
                        .map(|(b, f)| json!({ "base": thread_value(b), "algebra": AlgebraJson::from_core(f) }))
                        .collect();
                    let rho: BTreeMap<&str, usize> = d.rho.iter().collect();
                    Report::yes_no(true).exact().certificate(json!({ "type": rho, "parts": parts }))
                }
                None => Report::yes_no(false)
                    .exactness("probed")
                    .certificate(json!({ "note": "some dimension exceeds the probe" })),
            })
        }
        Verb::Hstar => {
            let a = as_t_algebra(ctx.a()?)?;
            if ctx.b.is_empty() {
                return Err(usage("hstar needs at least one -B"));
            }
            let hs = ctx.b.iter().map(|b| as_finite(b).cloned()).collect::<Result<Vec<_>, _>>()?;
            Ok(Report::yes_no(h_star_member(&a, &hs, &ctx.probe)?).exact())
        }
        Verb::EtMember => {
            let a = as_t_algebra(ctx.a()?)?;
            let b = as_t_algebra(ctx.single_b()?)?;
            Ok(theory_report(&et_variety_member(&a, &b, &ctx.probe)?))
        }
        Verb::TopoBirkhoff => {
            let a = as_t_algebra(ctx.a()?)?;
            let b = as_t_algebra(ctx.single_b()?)?;
            let c = cross_check_topological(&a, &b, &ctx.probe)?;
            if !c.agree() {
                return Err(CliError::Disagreement(format!(
                    "finitary route says {}, topological route says {}",
                    c.finitary.holds, c.topological
                )));
            }
            let checks: Vec<Value> = c
                .finitary
                .checks
                .iter()
                .map(|k| {
                    json!({
                        "base": thread_value(&k.base),
                        "carrier": k.carrier,
                        "member": k.member,
                        "separator": k.separator.as_ref().map(ToString::to_string),
                    })
                })
                .collect();
            let certificates: Vec<Value> = c
                .certificates
                .iter()
                .map(|k| {
                    json!({
                        "thread": thread_value(&k.thread),
                        "carrier": k.carrier,
                        "preimage": k.preimage.as_ref().map(|(n, r)| json!({ "power": n, "thread": thread_value(r) })),
                    })
                })
                .collect();
            let r = Report::yes_no(c.finitary.holds).exactness(c.finitary.exactness.as_str()).certificate(json!({
                "power_bound": c.power_bound,
                "finitary": checks,
                "topological": certificates,
            }));
            Ok(match &c.finitary.structural {
                Some(id) => r.witness(json!({ "structural": id.to_string() })),
                None => r,
            })
        }
        Verb::ValidateCa { limit } => {
            let Input::CloneAlgebra(c) = ctx.a()? else {
                return Err(usage("validate-ca needs a clone algebra as -A"));
            };
            Ok(axiom_report(&c.validate_axioms(*limit)))
        }
        Verb::Axioms { window, poly, limit, ops } => match &ctx.a {
            Some(input) => {
                let a = as_t_algebra(input)?;
                let c = generated(&a, *window, *poly, false, 100_000)?.export()?;
                Ok(axiom_report(&c.validate_axioms(limit.unwrap_or(3))))
            }
            None => {
                let ops = ops.as_deref().map(list).unwrap_or_else(|| vec!["s".into()]);
                let depth = ctx.depth.unwrap_or(1);
                let index = ctx.index.unwrap_or(3);
                let terms = enumerate_hyperterms(&head_specs(ops, 2), depth, index);
                let count = terms.len();
                let r = match check_free_axioms(&terms, limit.unwrap_or(2)) {
                    None => Report::yes_no(true),
                    Some((ax, detail)) => {
                        Report::yes_no(false).witness(json!({ "axiom": format!("{ax:?}"), "detail": detail }))
                    }
                };
                Ok(r.exact().certificate(json!({ "terms": count, "depth": depth, "index": index })))
            }
        },
    }
}

fn axiom_report(rep: &clonealg_core::clone_algebra::AxiomReport) -> Report {
    let r = Report::yes_no(rep.passed()).exact().certificate(json!({
        "limit": rep.limit,
        "instances": rep.instances,
        "violations": rep.violation_count,
    }));
    match rep.violations.first() {
        None => r,
        Some(v) => r.witness(json!({
            "axiom": format!("{:?}", v.axiom),
            "n": v.n,
            "index": v.index,
            "args": v.args,
            "lhs": v.lhs,
            "rhs": v.rhs,
        })),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn infers_arities() {
        let rho = infer_type("s(v1, s(c, v2))").unwrap();
        assert_eq!(rho.arity("s"), Some(2));
        assert_eq!(rho.arity("c"), Some(0));
        assert_eq!(rho.arity("v1"), None);
        assert!(infer_type("s(v1, s(v2))").is_err());
    }

    #[test]
    fn parses_types() {
        let rho = parse_type("s:2, c:0").unwrap();
        assert_eq!(rho.arity("s"), Some(2));
        assert!(parse_type("s").is_err());
    }
}
