use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use squeezespin_cli::commands::{
    cmd_anticross, cmd_frame_compare, cmd_photon_corr, cmd_rates, cmd_ratio_map, cmd_shift_width, cmd_spectrum,
    cmd_truncation, CommandError, Report,
};
use squeezespin_cli::RunConfig;

#[derive(Parser)]
#[command(name = "squeezespin", version, about = "Spectra and sweeps for a spin coupled to a squeezed resonator")]
struct Cli {
    /// Configuration file of `key = value` lines
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory (overrides out_dir)
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads for sweeps; 0 uses every core
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,

    /// Override a configuration key, e.g. `--set r=0.3` (repeatable)
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Resonator or spin spectrum at one point (target=resonator|spin)
    Spectrum,
    /// Anticrossing gap, contrast and photon number along a sweep
    Anticross,
    /// Spin-line shift and width against the analytic rates
    ShiftWidth,
    /// Shift-to-decoherence ratio over an (r, kappa) grid
    RatioMap,
    /// Photon-noise integral against its closed form across truncations
    Truncation,
    /// Spin spectra with physical and squeezed-mode decay
    FrameCompare,
    /// Photon-number autocorrelation against the closed form
    PhotonCorr,
    /// Analytic rates as JSON
    Rates,
}

fn run(cli: &Cli) -> Result<Report, CommandError> {
    let mut overrides = cli.set.clone();
    if let Some(out) = &cli.out {
        overrides.push(format!("out_dir={}", out.display()));
    }
    let cfg = RunConfig::load(cli.config.as_deref(), &overrides)?;
    match cli.command {
        Command::Spectrum => cmd_spectrum(&cfg),
        Command::Anticross => cmd_anticross(&cfg, cli.jobs),
        Command::ShiftWidth => cmd_shift_width(&cfg, cli.jobs),
        Command::RatioMap => cmd_ratio_map(&cfg, cli.jobs),
        Command::Truncation => cmd_truncation(&cfg, cli.jobs),
        Command::FrameCompare => cmd_frame_compare(&cfg),
        Command::PhotonCorr => cmd_photon_corr(&cfg, cli.jobs),
        Command::Rates => cmd_rates(&cfg),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(report) => {
            if let Some(s) = &report.stdout {
                println!("{s}");
            }
            for f in &report.files {
                eprintln!("wrote {}", f.display());
            }
            if report.failures > 0 {
                eprintln!("{} of {} sweep points failed; see the status column", report.failures, report.rows);
            }
            ExitCode::from(report.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(1)
        }
    }
}
