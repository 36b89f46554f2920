//! File formats, reports and verbs of the `clonealg` command-line tool.

pub mod cli;
pub mod commands;
pub mod formats;
pub mod report;
pub mod selftest;

use std::time::Instant;

use cli::{Cli, Format};
use commands::Context;
use report::{inputs_digest, CliError, Report};

/// Runs one parsed invocation. Returns the text to print on stdout (if any)
/// and the exit code; diagnostics go to stderr.
pub fn execute(cli: &Cli) -> (Option<String>, u8) {
    let start = Instant::now();
    let verb = cli.verb.name();
    let outcome = digest(cli).and_then(|d| {
        let (mut report, failure) = if cli.common.selftest {
            let (r, passed) = selftest::run(selftest::Module::of(&cli.verb), cli.common.seed, cli.common.jobs);
            (r, (!passed).then(|| CliError::Disagreement("self test failed".into())))
        } else {
            let ctx = Context::load(&cli.common)?;
            (commands::run(&cli.verb, &ctx)?, None)
        };
        report.verb = verb.into();
        report.inputs_digest = d;
        if cli.common.timing {
            report.timing_ms = Some(start.elapsed().as_secs_f64() * 1000.0);
        }
        Ok((report, failure))
    });
    match outcome {
        Ok((report, failure)) => {
            let code = failure.map_or(0, |e| {
                eprintln!("clonealg {verb}: {e}");
                e.exit_code()
            });
            (Some(render(&report, cli.common.format)), code)
        }
        Err(e) => {
            eprintln!("clonealg {verb}: {e}");
            (None, e.exit_code())
        }
    }
}

fn render(report: &Report, format: Format) -> String {
    match format {
        Format::Json => report.to_json(),
        Format::Text => report.to_text(),
    }
}

/// Digest of what determines the answer: the verb and its arguments, the
/// probe flags, the seed, and the contents of every input file.
fn digest(cli: &Cli) -> Result<String, CliError> {
    let c = &cli.common;
    let args = vec![
        format!("{:?}", cli.verb),
        format!("depth={:?} index={:?} gens={:?} power={:?}", c.depth, c.index, c.gens, c.power),
        format!("seed={} selftest={}", c.seed, c.selftest),
    ];
    let files = c
        .a
        .iter()
        .chain(&c.b)
        .map(|p| std::fs::read(p).map_err(|e| CliError::Input(format!("{}: {e}", p.display()))))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(inputs_digest(cli.verb.name(), &args, &files))
}
