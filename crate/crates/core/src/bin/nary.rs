use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use nary_kernel::{Flags, Options, Session};

/// Check `.nry` files and report per-declaration outcomes.
#[derive(Parser, Debug)]
#[command(name = "nary", version)]
struct Cli {
    /// Print one line per unifier rule application.
    #[arg(long)]
    trace_unify: bool,
    /// Print every meta of each declaration with its zonked solution.
    #[arg(long)]
    print_metas: bool,
    /// Do not load the bundled prelude.
    #[arg(long)]
    no_prelude: bool,
    /// Print the normal form of a checked global (repeatable).
    #[arg(long, value_name = "NAME")]
    nf: Vec<String>,
    #[arg(required = true)]
    files: Vec<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let options = Options { trace: cli.trace_unify, inversion_override: None };
    let flags = Flags { trace_unify: cli.trace_unify, print_metas: cli.print_metas };
    let base = if cli.no_prelude {
        Session::new(options)
    } else {
        match Session::with_prelude(options) {
            Ok(s) => s,
            Err(e) => {
                eprintln!("{e}");
                return ExitCode::from(1);
            }
        }
    };

    let mut sources = Vec::new();
    for path in &cli.files {
        match std::fs::read_to_string(path) {
            Ok(src) => sources.push((path, src)),
            Err(e) => {
                eprintln!("{}: {e}", path.display());
                return ExitCode::from(2);
            }
        }
    }

    let mut ok = true;
    let mut nf_left: Vec<&String> = cli.nf.iter().collect();
    for (path, src) in &sources {
        let mut session = base.clone();
        let report = match session.check_source(src) {
            Ok(r) => r,
            Err(e) => {
                println!("PARSEERROR {}:{e}", path.display());
                return ExitCode::from(2);
            }
        };
        if sources.len() > 1 {
            println!("== {}", path.display());
        }
        print!("{}", report.render(flags));
        ok &= report.all_expected();
        nf_left.retain(|name| match session.normal_form(name) {
            Some(nf) => {
                println!("{nf}");
                false
            }
            None => true,
        });
    }
    if let Some(name) = nf_left.first() {
        eprintln!("--nf: no global named `{name}`");
        return ExitCode::from(2);
    }
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
