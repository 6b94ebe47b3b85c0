use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use metgov_cli::commands;
use metgov_cli::CliError;
use metgov_core::amendment::HRuleMode;

#[derive(Parser)]
#[command(name = "metgov", version, about = "Constitutional governance over metric spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run or audit a single epoch.
    Epoch {
        #[command(subcommand)]
        action: EpochCommand,
    },
    /// Worked-example fixtures.
    Examples {
        #[command(subcommand)]
        action: ExamplesCommand,
    },
    /// Compromise-gap sweep: summary.csv and records.jsonl in --out.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: u64,
        /// Worker threads; defaults to all cores.
        #[arg(long)]
        jobs: Option<usize>,
        /// Overrides the profile count in the document.
        #[arg(long)]
        profiles: Option<usize>,
    },
    /// Amend a threshold with the h-rule.
    Hrule {
        /// Current threshold.
        #[arg(long)]
        sigma: f64,
        /// Preferred thresholds, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        votes: Vec<f64>,
        #[arg(long, value_enum, default_value_t = ModeArg::Both)]
        mode: ModeArg,
    },
    /// Validate emitted summaries, records, traces or outcomes.
    SchemaCheck {
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
}

#[derive(Subcommand)]
enum EpochCommand {
    /// Run the [epoch] section; writes trace.jsonl and outcome.json to --out.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Required when a random source is configured.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Replay a trace and compare every record.
    Verify {
        #[arg(long)]
        trace: PathBuf,
    },
}

#[derive(Subcommand)]
enum ExamplesCommand {
    /// Check every fixture; exit 1 on any mismatch.
    Verify {
        /// Fixture directory; defaults to the built-in set.
        #[arg(long)]
        dir: Option<PathBuf>,
        /// Print results as JSON lines.
        #[arg(long)]
        json: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    VotedValues,
    DenseGrid,
    Both,
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Epoch { action: EpochCommand::Run { config, out, seed } } => {
            let summary = commands::epoch_run(&config, &out, seed)?;
            println!("{}", serde_json::to_string(&summary).map_err(CliError::runtime)?);
        }
        Command::Epoch { action: EpochCommand::Verify { trace } } => {
            let s = commands::epoch_verify(&trace)?;
            println!(
                "trace ok: {} records, {} rounds, {} submissions, {} rejections, outcome {}",
                s.events,
                s.rounds,
                s.submissions,
                s.rejections,
                serde_json::to_string(&s.outcome).map_err(CliError::runtime)?
            );
        }
        Command::Examples { action: ExamplesCommand::Verify { dir, json } } => {
            let results = commands::verify_examples(dir.as_deref())?;
            if json {
                for r in &results {
                    println!("{}", serde_json::to_string(r).map_err(CliError::runtime)?);
                }
            } else {
                print!("{}", commands::render_results(&results));
            }
            let failed: Vec<String> =
                results.iter().filter(|r| !r.passed).map(|r| format!("{}/{}", r.fixture, r.check)).collect();
            if !failed.is_empty() {
                return Err(CliError::Mismatch(format!("failing checks: {}", failed.join(", "))));
            }
        }
        Command::Sweep { config, out, seed, jobs, profiles } => {
            let stats = commands::run_sweep(&config, &out, seed, jobs, profiles)?;
            println!("{}", metgov_core::sim::SweepStats::CSV_HEADER);
            for s in stats {
                println!("{}", s.csv_row());
            }
        }
        Command::Hrule { sigma, votes, mode } => {
            let modes = match mode {
                ModeArg::VotedValues => vec![HRuleMode::VotedValues],
                ModeArg::DenseGrid => vec![HRuleMode::DenseGrid],
                ModeArg::Both => vec![HRuleMode::VotedValues, HRuleMode::DenseGrid],
            };
            for (m, v) in commands::hrule(sigma, &votes, &modes)? {
                println!("{m}: {v}");
            }
        }
        Command::SchemaCheck { files } => {
            let mut bad = Vec::new();
            for f in &files {
                match commands::schema_check(f) {
                    Ok(what) => println!("{}: ok ({what})", f.display()),
                    Err(CliError::Mismatch(why)) => {
                        println!("{}: invalid", f.display());
                        bad.push(why);
                    }
                    Err(e) => return Err(e),
                }
            }
            if !bad.is_empty() {
                return Err(CliError::Mismatch(bad.join("\n")));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("metgov: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
