use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use conformable_cli::{run, CliError, Command, Outcome, RunOptions, ScenarioConfig};

#[derive(Parser)]
#[command(name = "conformable", version, about = "Conformable fractional calculus scenarios")]
struct Cli {
    /// Scenario file; the built-in oscillator scenario when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Directory for CSV output.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,

    /// Worker threads for grid sweeps and suites.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Seed for the randomized suites.
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Conformable partial derivatives at a point, closed form and limit.
    Deriv {
        /// Comma-separated coordinates.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        point: Option<Vec<f64>>,
    },
    /// Weighted integral of the field over its domain.
    Integrate,
    /// The action of the field.
    Action,
    /// Euler-Lagrange residuals over the grid.
    El,
    /// Currents, breaking terms and tensors over the grid.
    Noether,
    /// Oscillator trajectory and energy trace.
    Oscillator,
    /// Run the property suites.
    Verify,
}

fn write(out: &PathBuf, outcome: &Outcome) -> Result<(), CliError> {
    if outcome.files.is_empty() {
        return Ok(());
    }
    let fail = |path: &PathBuf, e: std::io::Error| CliError::Write {
        path: path.display().to_string(),
        message: e.to_string(),
    };
    std::fs::create_dir_all(out).map_err(|e| fail(out, e))?;
    for (name, body) in &outcome.files {
        let path = out.join(name);
        std::fs::write(&path, body).map_err(|e| fail(&path, e))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let cmd = match cli.command {
        Cmd::Deriv { point } => Command::Deriv { point },
        Cmd::Integrate => Command::Integrate,
        Cmd::Action => Command::Action,
        Cmd::El => Command::El,
        Cmd::Noether => Command::Noether,
        Cmd::Oscillator => Command::Oscillator,
        Cmd::Verify => Command::Verify,
    };
    let result = cli
        .config
        .as_deref()
        .map_or_else(|| Ok(ScenarioConfig::default_scenario()), ScenarioConfig::load)
        .and_then(|cfg| run(&cmd, &cfg, &RunOptions { seed: cli.seed }))
        .and_then(|outcome| write(&cli.out, &outcome).map(|()| outcome));
    match result {
        Ok(outcome) => {
            for line in &outcome.lines {
                println!("{line}");
            }
            if outcome.success {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
