use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "clonealg", version, about = "Clone algebras, t-algebras and their equational theories")]
pub struct Cli {
    #[command(subcommand)]
    pub verb: Verb,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Debug, Args)]
pub struct Common {
    /// First algebra input (finite algebra, t-algebra or clone algebra JSON).
    #[arg(short = 'A', global = true, value_name = "PATH")]
    pub a: Option<PathBuf>,
    /// Second algebra input; `hstar` accepts several.
    #[arg(short = 'B', global = true, value_name = "PATH")]
    pub b: Vec<PathBuf>,
    /// Hyperterm depth bound for probed procedures.
    #[arg(long, global = true)]
    pub depth: Option<usize>,
    /// Designated-index bound for probed procedures.
    #[arg(long, global = true)]
    pub index: Option<usize>,
    /// Generator bound for hyperidentities.
    #[arg(long, global = true)]
    pub gens: Option<usize>,
    /// Largest t-power searched by `topo-birkhoff` (default: size of B).
    #[arg(long, global = true)]
    pub power: Option<usize>,
    /// Worker threads for `--selftest`.
    #[arg(long, global = true, default_value_t = 1)]
    pub jobs: usize,
    /// Seed for the randomised part of `--selftest`.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, value_enum, default_value = "text")]
    pub format: Format,
    /// Run the invariant suite of the verb's module instead.
    #[arg(long, global = true)]
    pub selftest: bool,
    /// Add wall-clock time to the report.
    #[arg(long, global = true)]
    pub timing: bool,
}

#[derive(Debug, Subcommand)]
pub enum Verb {
    /// Parse and canonicalise a hyperterm.
    Parse {
        term: Option<String>,
        /// Operation symbols, comma separated (default: the symbols of -A).
        #[arg(long)]
        ops: Option<String>,
    },
    /// q_n(t, u_1, ..., u_n) in the free clone algebra of hyperterms.
    Compose {
        #[arg(short = 'n')]
        n: Option<usize>,
        terms: Vec<String>,
        #[arg(long)]
        ops: Option<String>,
    },
    /// Translate between rho-terms and hyperterms.
    Translate {
        /// rho-term to hyperterm.
        #[arg(long, group = "mode")]
        star: bool,
        /// hyperterm to rho-term.
        #[arg(long, group = "mode")]
        bullet: bool,
        /// Replace generator-headed subterms by designated elements.
        #[arg(long, group = "mode")]
        subst: bool,
        term: Option<String>,
        /// Finitary type as `s:2,c:0` (default: read off the term or -A).
        #[arg(long)]
        rho: Option<String>,
        /// Generator order for --subst, comma separated.
        #[arg(long)]
        generators: Option<String>,
        /// Index offset m for --subst (default: largest designated index).
        #[arg(long)]
        offset: Option<usize>,
        #[arg(long)]
        ops: Option<String>,
    },
    /// Evaluate a hyperterm of a t-algebra on a thread.
    Eval {
        term: Option<String>,
        /// The thread as JSON.
        #[arg(long, conflicts_with = "patch")]
        thread: Option<String>,
        /// Values patched over a trace base, comma separated.
        #[arg(long)]
        patch: Option<String>,
        /// Which base of the trace to patch.
        #[arg(long, default_value_t = 0)]
        base: usize,
    },
    /// Dimensions of operations, or of clone-algebra elements.
    Dim {
        #[arg(long)]
        symbol: Option<String>,
        #[arg(long)]
        element: Option<usize>,
        /// How far to probe operations without a dependence bound.
        #[arg(long, default_value_t = 8)]
        probe: usize,
    },
    /// Generate a clone level of a finite algebra, or a clone algebra of a t-algebra.
    CloneGen {
        /// Arity of the clone level (finite algebras).
        #[arg(long)]
        arity: Option<usize>,
        /// Window N (t-algebras; default: largest dimension).
        #[arg(long)]
        window: Option<usize>,
        /// Polynomial clone algebra.
        #[arg(long, conflicts_with = "full")]
        poly: bool,
        /// Clone algebra generated by every top extension of the window.
        #[arg(long)]
        full: bool,
        #[arg(long, default_value_t = 100_000)]
        cap: usize,
        /// Write the exported clone algebra here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Free algebra on k generators in the variety of -A.
    FreeAlgebra {
        #[arg(short = 'k', default_value_t = 2)]
        k: usize,
    },
    /// Whether -B lies in the variety generated by -A.
    Hsp,
    /// Whether a t-algebra satisfies an identity.
    CheckId { identity: Option<String> },
    /// Whether a t-algebra satisfies a hyperidentity.
    CheckHyperid {
        identity: Option<String>,
        #[arg(long, group = "strength")]
        weak: bool,
        #[arg(long, group = "strength")]
        full: bool,
    },
    /// Decompose a rho-dimensional t-algebra into finitary parts.
    Decompose,
    /// Whether -A lies in H*(-B ...).
    Hstar,
    /// Whether -B lies in the Et-variety of -A.
    EtMember,
    /// Uniform continuity of the natural clone homomorphism, by both routes.
    TopoBirkhoff,
    /// Check a clone algebra table against C1-C5.
    ValidateCa {
        #[arg(long, default_value_t = 3)]
        limit: usize,
    },
    /// Check C1-C5 on a generated clone algebra of -A, or on the hyperterms
    /// of depth --depth (default 1) and indices up to --index (default 3).
    Axioms {
        #[arg(long)]
        window: Option<usize>,
        #[arg(long)]
        poly: bool,
        /// Largest n and k checked (default: 3 with -A, 2 on hyperterms).
        #[arg(long)]
        limit: Option<usize>,
        #[arg(long)]
        ops: Option<String>,
    },
}

impl Verb {
    pub fn name(&self) -> &'static str {
        match self {
            Verb::Parse { .. } => "parse",
            Verb::Compose { .. } => "compose",
            Verb::Translate { .. } => "translate",
            Verb::Eval { .. } => "eval",
            Verb::Dim { .. } => "dim",
            Verb::CloneGen { .. } => "clone-gen",
            Verb::FreeAlgebra { .. } => "free-algebra",
            Verb::Hsp => "hsp",
            Verb::CheckId { .. } => "check-id",
            Verb::CheckHyperid { .. } => "check-hyperid",
            Verb::Decompose => "decompose",
            Verb::Hstar => "hstar",
            Verb::EtMember => "et-member",
            Verb::TopoBirkhoff => "topo-birkhoff",
            Verb::ValidateCa { .. } => "validate-ca",
            Verb::Axioms { .. } => "axioms",
        }
    }
}
