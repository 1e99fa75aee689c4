mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use concave_match::concavity::Bounds;
use concave_match::format::{parse_market, MarketFile};
use concave_match::scarf::{LOrdering, ScarfConfig};
use concave_match::{Error, Result};

use commands::{exit_code, Report, EXIT_INPUT};

/// Stable matchings for firms hiring teams of workers.
#[derive(Parser)]
#[command(name = "concave-match", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run Scarf's algorithm and look for a dominating stable matching.
    Solve {
        file: PathBuf,
        #[command(flatten)]
        scarf: ScarfArgs,
        #[command(flatten)]
        bounds: BoundArgs,
    },
    /// Check whether a matching, e.g. "{z1,z2}", is stable.
    CheckStable { file: PathBuf, matching: String },
    /// Decide concavity under the unit scheme, or the file's scheme with --pi.
    CheckConcave {
        file: PathBuf,
        #[arg(long)]
        pi: bool,
        #[command(flatten)]
        bounds: BoundArgs,
    },
    /// Run deferred acceptance on a leader-follower market.
    Da { file: PathBuf },
    /// Print the full pivot trace of Scarf's algorithm.
    Trace {
        file: PathBuf,
        #[command(flatten)]
        scarf: ScarfArgs,
    },
    /// List every stable matching by exhaustive search.
    StableSet {
        file: PathBuf,
        #[command(flatten)]
        bounds: BoundArgs,
    },
}

#[derive(Args)]
struct ScarfArgs {
    /// Agent whose row seeds the ordinal basis.
    #[arg(long, value_name = "AGENT")]
    initial_row: Option<String>,
    /// Build the utility matrix with the reversed tie-break ordering.
    #[arg(long)]
    reversed: bool,
}

#[derive(Args)]
struct BoundArgs {
    #[arg(long, default_value_t = Bounds::default().max_assignments)]
    max_assignments: usize,
    #[arg(long, default_value_t = Bounds::default().max_agents)]
    max_agents: usize,
    #[arg(long, default_value_t = Bounds::default().max_matchings)]
    max_matchings: usize,
}

impl BoundArgs {
    fn bounds(&self) -> Bounds {
        Bounds {
            max_assignments: self.max_assignments,
            max_agents: self.max_agents,
            max_matchings: self.max_matchings,
            ..Bounds::default()
        }
    }
}

impl ScarfArgs {
    fn config(&self, file: &MarketFile) -> Result<ScarfConfig> {
        let initial_row = match &self.initial_row {
            None => None,
            Some(label) => Some(
                file.market
                    .find_agent(label)
                    .ok_or_else(|| Error::InvalidMatching(format!("unknown agent {label}")))?,
            ),
        };
        let ordering = if self.reversed { LOrdering::Reversed } else { LOrdering::Canonical };
        Ok(ScarfConfig { initial_row, ordering })
    }
}

fn load(path: &PathBuf) -> Result<MarketFile, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    parse_market(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn run(command: &Command) -> Result<Report, (i32, String)> {
    let file = match command {
        Command::Solve { file, .. }
        | Command::CheckStable { file, .. }
        | Command::CheckConcave { file, .. }
        | Command::Da { file }
        | Command::Trace { file, .. }
        | Command::StableSet { file, .. } => load(file).map_err(|msg| (EXIT_INPUT, msg))?,
    };
    let result = match command {
        Command::Solve { scarf, bounds, .. } => {
            scarf.config(&file).and_then(|c| commands::solve(&file, &c, &bounds.bounds()))
        }
        Command::CheckStable { matching, .. } => commands::check_stable(&file, matching),
        Command::CheckConcave { pi, bounds, .. } => commands::check_concave(&file, *pi, &bounds.bounds()),
        Command::Da { .. } => commands::da(&file),
        Command::Trace { scarf, .. } => scarf.config(&file).and_then(|c| commands::trace(&file, &c)),
        Command::StableSet { bounds, .. } => commands::stable_set(&file, &bounds.bounds()),
    };
    result.map_err(|e| (exit_code(&e), e.to_string()))
}

fn main() -> ExitCode {
    // Usage errors are input errors; clap's own default code would collide
    // with the "no dominating matching" code.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_INPUT as u8 } else { 0 });
        }
    };
    match run(&cli.command) {
        Ok(report) => {
            print!("{}", report.text);
            ExitCode::from(report.code as u8)
        }
        Err((code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code as u8)
        }
    }
}
