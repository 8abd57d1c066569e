use std::path::PathBuf;
use std::process::ExitCode;

use actionlab_cli::{batch_status, check_distinct_outputs, run_batch, CliError, Scenario, ScenarioKind, EXIT_USAGE};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "actionlab",
    version,
    about = "Run driven-oscillator, source-theory, algebra and orbit scenarios"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Directory for reports and CSV series.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Worker threads for a list of scenarios.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    /// Multiply every loosenable tolerance by this factor (testing only).
    #[arg(long, global = true, default_value_t = 1.0)]
    tolerance_scale: f64,
}

#[derive(Subcommand)]
enum Command {
    /// Run scenario files and check their tolerances.
    Run {
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Print the closed form / oracle / lattice table of a comparison scenario.
    Compare { file: PathBuf },
}

fn load_all(files: &[PathBuf]) -> Result<Vec<(PathBuf, Scenario)>, CliError> {
    let list = files
        .iter()
        .map(|f| Scenario::load(f).map(|s| (f.clone(), s)))
        .collect::<Result<Vec<_>, _>>()?;
    let only: Vec<Scenario> = list.iter().map(|(_, s)| s.clone()).collect();
    check_distinct_outputs(&only)?;
    Ok(list)
}

fn exit(code: i32) -> ExitCode {
    ExitCode::from(code as u8)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return exit(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    if !(cli.tolerance_scale.is_finite() && cli.tolerance_scale > 0.0) {
        eprintln!("usage error: --tolerance-scale must be positive");
        return exit(EXIT_USAGE);
    }
    if cli.tolerance_scale != 1.0 {
        eprintln!("warning: tolerances loosened by a factor {}", cli.tolerance_scale);
    }
    let (files, compare) = match &cli.command {
        Command::Run { files } => (files.clone(), false),
        Command::Compare { file } => (vec![file.clone()], true),
    };
    let scenarios = match load_all(&files) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("{e}");
            return exit(e.exit_code());
        }
    };
    if compare {
        let kind = &scenarios[0].1.kind;
        if !matches!(kind, ScenarioKind::OracleCompare(_) | ScenarioKind::PathIntegral(_)) {
            eprintln!(
                "usage error: compare needs an oracle-compare or path-integral scenario, got {}",
                kind.label()
            );
            return exit(EXIT_USAGE);
        }
    }
    let outcomes = run_batch(&scenarios, &cli.out, cli.jobs, cli.tolerance_scale);
    for o in &outcomes {
        match &o.result {
            Ok(r) => {
                if compare {
                    print!("{}", r.table_text());
                }
                print!("{}", r.summary());
            }
            Err(e) => println!("[ERROR] {}: {e}", o.file.display()),
        }
    }
    exit(batch_status(&outcomes))
}
