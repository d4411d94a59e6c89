use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use vla_accel::commands::{self, PruneImageArgs, SimulateArgs};

#[derive(Parser)]
#[command(version, about = "Speed-aware policy scheduling and token pruning")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run seeded closed-loop episodes and print the metrics report.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        episodes: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the token indices kept for a PGM image at a given speed.
    PruneImage {
        #[arg(long)]
        image: PathBuf,
        #[arg(long)]
        attn: Option<PathBuf>,
        #[arg(long)]
        speed: f64,
        #[arg(long)]
        mask_out: Option<PathBuf>,
        #[arg(long, default_value_t = 16)]
        patch_size: usize,
        #[arg(long, default_value_t = 1.4)]
        sigma: f64,
        #[arg(long, default_value_t = 0.1)]
        low: f64,
        #[arg(long, default_value_t = 0.3)]
        high: f64,
    },
    /// Fit the ridge generator to a CSV of buffered actions.
    FitDemo {
        #[arg(long)]
        buffer: PathBuf,
        #[arg(long)]
        lambda: Option<f64>,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Simulate {
            config,
            episodes,
            seed,
            out,
        } => commands::simulate(&SimulateArgs {
            config,
            episodes,
            seed,
            out,
        }),
        Command::PruneImage {
            image,
            attn,
            speed,
            mask_out,
            patch_size,
            sigma,
            low,
            high,
        } => commands::prune_image(&PruneImageArgs {
            image,
            attn,
            speed,
            mask_out,
            patch_size,
            sigma,
            low,
            high,
        }),
        Command::FitDemo { buffer, lambda } => commands::fit_demo(&buffer, lambda),
    };
    match result {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
