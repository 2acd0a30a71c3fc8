//! `psym`: simulate watermarked spectrograms, detect pseudonyms in them and
//! run Pe-vs-SNR sweeps.
//!
//! Exit status: 0 success, 1 I/O or other failure, 2 no signal detected,
//! 3 malformed or corrupt input file, 4 bad arguments or configuration.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use pseudonymetry::dataset::{read_spectrogram, records_to_csv};
use pseudonymetry::experiment::{
    cmd_detect, cmd_simulate, cmd_sweep, exit, exit_status, parse_snr_list, render_report, DetectFlags,
    OutputFormat, SweepConfig,
};
use pseudonymetry::{Error, PseudonymPacket, Result};

#[derive(Parser)]
#[command(name = "psym", version, about = "Pseudonym watermark simulation and detection")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write one spectrogram file and truth sidecar per SNR point.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Decode the pseudonym in a spectrogram file.
    Detect {
        /// Spectrogram file (`.psymspec`).
        file: PathBuf,
        #[command(flatten)]
        common: Common,
        /// Channel column to decode.
        #[arg(long)]
        channel: Option<usize>,
        /// Decode even when no sync peak stands out.
        #[arg(long)]
        force: bool,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Measure Pe per SNR point and write a CSV.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
        /// Optional two-column `snr_db pe` file for plotting.
        #[arg(long)]
        plot: Option<PathBuf>,
        /// Summary printed to stdout.
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
}

#[derive(Args)]
struct Common {
    /// `key = value` configuration file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// 28-bit pseudonym as 7 hex digits.
    #[arg(long)]
    packet: Option<String>,
    /// SNR points in dB, e.g. `-15:-5:1` or `-8,-6`.
    #[arg(long, allow_hyphen_values = true)]
    snr: Option<String>,
    /// Bits per SNR point.
    #[arg(long)]
    bits: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Csv,
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Text => OutputFormat::Text,
            Format::Csv => OutputFormat::Csv,
        }
    }
}

impl Common {
    fn load(&self) -> Result<SweepConfig> {
        let mut cfg = match &self.config {
            Some(path) => SweepConfig::from_file(path)?,
            None => SweepConfig::default(),
        };
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(hex) = &self.packet {
            cfg.packet = PseudonymPacket::from_hex(hex)?;
        }
        if let Some(snr) = &self.snr {
            cfg.snr_points_db = parse_snr_list(snr)?;
        }
        if let Some(bits) = self.bits {
            cfg.bits_per_point = bits;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Simulate { common, out } => {
            let cfg = common.load()?;
            let manifest = cmd_simulate(&cfg, &out)?;
            print!("{}", manifest.render());
            Ok(if manifest.is_complete() { exit::SUCCESS } else { exit::FAILURE })
        }
        Command::Detect {
            file,
            common,
            channel,
            force,
            format,
        } => {
            let cfg = common.load()?;
            let flags = DetectFlags {
                channel_index: channel,
                force,
                format: format.into(),
            };
            let report = cmd_detect(&file, &cfg.packet, &cfg, &flags)?;
            let truth = read_spectrogram(&file)
                .ok()
                .and_then(|b| b.ground_truth)
                .filter(|t| t.packet == cfg.packet);
            print!(
                "{}",
                render_report(&file, &report, cfg.watermark.bits_per_packet, truth.as_ref(), flags.format)?
            );
            Ok(exit::SUCCESS)
        }
        Command::Sweep {
            common,
            out,
            plot,
            format,
        } => {
            let cfg = common.load()?;
            let records = cmd_sweep(&cfg, &out, plot.as_deref())?;
            match format {
                Format::Csv => print!("{}", records_to_csv(&records)?),
                Format::Text => {
                    for r in &records {
                        println!(
                            "{:>8} dB  pe {:<12} ({} / {} bits)",
                            r.snr_db,
                            r.pe(),
                            r.bit_errors,
                            r.total_bits
                        );
                    }
                }
            }
            let failed = records.iter().any(|r| r.total_bits == 0);
            Ok(if failed { exit::FAILURE } else { exit::SUCCESS })
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("PSYM_LOG", "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { exit::ARGUMENT as u8 } else { exit::SUCCESS as u8 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            if let Error::NoSignal { .. } = e {
                eprintln!("psym: no signal detected: {e}");
            } else {
                eprintln!("psym: {e}");
            }
            ExitCode::from(exit_status(&e) as u8)
        }
    }
}
