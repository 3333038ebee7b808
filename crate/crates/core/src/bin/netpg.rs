use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use netpg::expcli::{cmd_reproduce, cmd_run, cmd_validate, ReproduceArgs, RunArgs};

#[derive(Parser)]
#[command(name = "netpg", version, about = "Networked policy gradient play on the multi-agent newsvendor game")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run replications of one experiment and write CSV logs
    Run {
        #[arg(long)]
        spec: Option<PathBuf>,
        /// Override a config key (repeatable)
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Run the condition grid of fig2, fig3 or fig4
    Reproduce {
        figure: String,
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Check an experiment file against the convergence assumptions
    Validate {
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (mut out, mut err) = (std::io::stdout(), std::io::stderr());
    let code = match cli.command {
        Command::Run { spec, overrides, out: dir, jobs } => cmd_run(
            &RunArgs { spec, overrides, out: dir, jobs },
            &mut out,
            &mut err,
        ),
        Command::Reproduce { figure, scale, spec, overrides, out: dir, jobs } => cmd_reproduce(
            &ReproduceArgs { figure, scale, spec, overrides, out: dir, jobs },
            &mut out,
            &mut err,
        ),
        Command::Validate { spec, overrides } => {
            cmd_validate(spec.as_deref(), &overrides, &mut out, &mut err)
        }
    };
    ExitCode::from(code as u8)
}
