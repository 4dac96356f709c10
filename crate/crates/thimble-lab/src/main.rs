use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use thimble_core::affine_syz::Grid;
use thimble_lab::commands::{cmd_monodromy, cmd_periods, cmd_verify, parse_around, parse_complex, CommandOutput, Suite};
use thimble_lab::figures::{cmd_figure, Figure, DEFAULT_GRID};
use thimble_lab::{init_threads, output, Format, LabError, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "thimble-lab", version, about = "Periods, monodromy and affine structure of the Landau-Ginzburg mirror of P^2")]
struct Cli {
    /// Absolute integration tolerance.
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol: f64,
    /// Minimum distance kept between integration paths and branch points.
    #[arg(long, global = true, default_value_t = 1e-3)]
    clearance: f64,
    /// Seed for sampled checks and figures.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// json, csv or svg.
    #[arg(long, global = true)]
    format: Option<String>,
    /// Write to this file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Thimble period at one point.
    Periods {
        #[arg(long)]
        j: usize,
        /// `re,im`
        #[arg(long, allow_hyphen_values = true)]
        q: String,
    },
    /// Monodromy matrix of a loop based at q = 0.
    Monodromy {
        /// A, B, C or inf
        #[arg(long)]
        around: String,
    },
    /// Figure data: orientation, cps, affine-grid or atlas.
    Figure {
        #[arg(long)]
        name: String,
        #[arg(long, allow_hyphen_values = true, default_value_t = DEFAULT_GRID.re[0])]
        re_min: f64,
        #[arg(long, allow_hyphen_values = true, default_value_t = DEFAULT_GRID.re[1])]
        re_max: f64,
        #[arg(long, allow_hyphen_values = true, default_value_t = DEFAULT_GRID.im[0])]
        im_min: f64,
        #[arg(long, allow_hyphen_values = true, default_value_t = DEFAULT_GRID.im[1])]
        im_max: f64,
        #[arg(long, default_value_t = DEFAULT_GRID.nx)]
        nx: usize,
        #[arg(long, default_value_t = DEFAULT_GRID.ny)]
        ny: usize,
        /// Sample points for the atlas figure.
        #[arg(long, default_value_t = 200)]
        samples: usize,
    },
    /// Run a verification suite: all, appendix, gluing or iso.
    Verify {
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
    },
}

fn run(cli: Cli) -> Result<CommandOutput, LabError> {
    let format = cli.format.as_deref().map(str::parse::<Format>).transpose().map_err(LabError::BadInput)?;
    let cfg = RunConfig {
        tol: cli.tol,
        path_clearance: cli.clearance,
        seed: cli.seed,
        format,
        out: cli.out,
    };
    match cli.command {
        Command::Periods { j, q } => cmd_periods(&cfg, j, parse_complex(&q)?),
        Command::Monodromy { around } => cmd_monodromy(&cfg, parse_around(&around)?),
        Command::Figure {
            name,
            re_min,
            re_max,
            im_min,
            im_max,
            nx,
            ny,
            samples,
        } => {
            let figure: Figure = name.parse()?;
            if !(re_min < re_max && im_min < im_max) {
                return Err(LabError::BadInput("grid bounds must satisfy min < max".into()));
            }
            let grid = Grid {
                re: [re_min, re_max],
                im: [im_min, im_max],
                nx,
                ny,
            };
            cmd_figure(&cfg, figure, &grid, samples)
        }
        Command::Verify { suite, samples } => {
            let suite: Suite = suite.parse().map_err(LabError::BadInput)?;
            cmd_verify(&cfg, suite, samples)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 3 } else { 0 });
        }
    };
    init_threads();
    let out = cli.out.clone();
    match run(cli) {
        Ok(r) => {
            for line in &r.log {
                eprintln!("{line}");
            }
            if let Err(e) = output::emit(out.as_deref(), &r.text) {
                eprintln!("error: {}", LabError::from(e));
                return ExitCode::from(3);
            }
            match r.failure {
                Some(f) => {
                    eprintln!("first failure: {f}");
                    ExitCode::from(1)
                }
                None => ExitCode::SUCCESS,
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
