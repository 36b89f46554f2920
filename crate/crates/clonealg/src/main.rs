use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use clonealg::cli::Cli;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let (out, code) = clonealg::execute(&cli);
    if let Some(out) = out {
        // a closed pipe downstream is not our failure
        let _ = writeln!(std::io::stdout().lock(), "{out}");
    }
    ExitCode::from(code)
}
