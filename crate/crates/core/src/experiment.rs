//! Simulation campaigns and Pe-vs-SNR sweeps behind the `psym` binary.
//!
//! Configuration files are line-oriented `key = value` text; `#` starts a
//! comment. Keys are the field names of [`SweepConfig`], [`WatermarkConfig`]
//! and [`ChannelConfig`]. SNR lists accept comma-separated values and
//! inclusive `start:stop:step` ranges, e.g. `-15:-5:1, -4.5`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::channel::{simulate_rx_spectrogram, simulate_watermark_series, ChannelConfig};
use crate::dataset::{self, export_records_csv, read_spectrogram, truth_path, write_spectrogram, ExperimentRecord};
use crate::detector::{decode_block_with, decode_series, DecodeOptions, DetectionReport, ResampleSpec};
use crate::watermark::{encode_packets, PseudonymPacket, WatermarkConfig};
use crate::{Error, GroundTruth, Result};

/// Process exit statuses of the `psym` binary.
pub mod exit {
    pub const SUCCESS: i32 = 0;
    /// I/O and any failure without a more specific status.
    pub const FAILURE: i32 = 1;
    pub const NO_SIGNAL: i32 = 2;
    pub const FORMAT: i32 = 3;
    pub const ARGUMENT: i32 = 4;
}

pub fn exit_status(err: &Error) -> i32 {
    match err {
        Error::NoSignal { .. } => exit::NO_SIGNAL,
        Error::Format { .. } | Error::Corrupt { .. } => exit::FORMAT,
        Error::Argument(_) | Error::Config(_) | Error::Framing { .. } => exit::ARGUMENT,
        Error::Io { .. } | Error::InsufficientData { .. } | Error::Data(_) => exit::FAILURE,
    }
}

pub const DEFAULT_PACKET_HEX: &str = "5a3c96e";

#[derive(Clone, Debug, PartialEq)]
pub struct SweepConfig {
    pub snr_points_db: Vec<f64>,
    pub bits_per_point: usize,
    pub packet: PseudonymPacket,
    pub seed: u64,
    pub watermark: WatermarkConfig,
    /// `snr_db` and `noise_seed` are overridden per point.
    pub channel: ChannelConfig,
    /// Stream start in RX bins; drawn per simulation when `None`.
    pub start_offset_bins: Option<usize>,
    /// Packets per simulated sweep segment. Bounds memory per point.
    pub chunk_packets: usize,
    pub oversample_factor: u64,
    pub resync_per_packet: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            snr_points_db: (-15..=-5).map(f64::from).collect(),
            bits_per_point: 10_000,
            packet: PseudonymPacket::from_hex(DEFAULT_PACKET_HEX).expect("default packet"),
            seed: 0,
            watermark: WatermarkConfig::default(),
            channel: ChannelConfig::default(),
            start_offset_bins: None,
            chunk_packets: 64,
            oversample_factor: 10,
            resync_per_packet: false,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        self.watermark.validate()?;
        self.channel.validate()?;
        if self.snr_points_db.is_empty() {
            return Err(Error::Config("snr_points_db is empty".into()));
        }
        if let Some(bad) = self.snr_points_db.iter().find(|s| s.is_nan() || **s == f64::NEG_INFINITY) {
            return Err(Error::Config(format!("unusable SNR point {bad}")));
        }
        if self.packet.len() != self.watermark.bits_per_packet {
            return Err(Error::Framing {
                expected: self.watermark.bits_per_packet,
                actual: self.packet.len(),
            });
        }
        if self.bits_per_point < self.watermark.bits_per_packet {
            return Err(Error::Config(format!(
                "bits_per_point {} is below one packet ({} bits)",
                self.bits_per_point, self.watermark.bits_per_packet
            )));
        }
        if self.chunk_packets == 0 {
            return Err(Error::Config("chunk_packets must be positive".into()));
        }
        if self.oversample_factor == 0 {
            return Err(Error::Config("oversample_factor must be positive".into()));
        }
        Ok(())
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = SweepConfig::default();
        cfg.apply_text(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Ok(cfg)
    }

    /// Applies `key = value` lines on top of the current values.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", n + 1)))?;
            self.set(key.trim(), value.trim())
                .map_err(|e| Error::Config(format!("line {}: {e}", n + 1)))?;
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T>
        where
            T::Err: std::fmt::Display,
        {
            value
                .parse()
                .map_err(|e| Error::Config(format!("{key} = {value:?}: {e}")))
        }
        fn flag(key: &str, value: &str) -> Result<bool> {
            match value {
                "true" | "yes" | "on" | "1" => Ok(true),
                "false" | "no" | "off" | "0" => Ok(false),
                _ => Err(Error::Config(format!("{key} = {value:?}: expected true or false"))),
            }
        }
        let wm = &mut self.watermark;
        let ch = &mut self.channel;
        match key {
            "snr_points_db" | "snr" => self.snr_points_db = parse_snr_list(value)?,
            "bits_per_point" | "bits" => self.bits_per_point = num(key, value)?,
            "packet" | "packet_bits" => self.packet = PseudonymPacket::from_hex(value)?,
            "seed" => self.seed = num(key, value)?,
            "start_offset_bins" => self.start_offset_bins = Some(num(key, value)?),
            "chunk_packets" => self.chunk_packets = num(key, value)?,
            "oversample_factor" => self.oversample_factor = num(key, value)?,
            "resync_per_packet" => self.resync_per_packet = flag(key, value)?,
            "samples_per_chip" => wm.samples_per_chip = num(key, value)?,
            "chips_per_bit" => wm.chips_per_bit = num(key, value)?,
            "bits_per_packet" => wm.bits_per_packet = num(key, value)?,
            "high_power" => wm.high_power = num(key, value)?,
            "low_power" => wm.low_power = num(key, value)?,
            "tx_symbol_duration_s" => wm.tx_symbol_duration_s = num(key, value)?,
            "watermark_subcarrier_index" => wm.watermark_subcarrier_index = num(key, value)?,
            "num_subcarriers" => wm.num_subcarriers = num(key, value)?,
            "sample_rate_hz" => wm.sample_rate_hz = num(key, value)?,
            "rx_bin_duration_s" => ch.rx_bin_duration_s = num(key, value)?,
            "attenuation_db" => ch.attenuation_db = num(key, value)?,
            "num_channels" => ch.num_channels = num(key, value)?,
            "watermark_channel_index" => ch.watermark_channel_index = num(key, value)?,
            "channel_bandwidth_hz" => ch.channel_bandwidth_hz = num(key, value)?,
            "center_frequency_hz" => ch.center_frequency_hz = num(key, value)?,
            _ => return Err(Error::Config(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    fn resample_spec(&self) -> Result<ResampleSpec> {
        ResampleSpec::for_durations(&self.watermark, self.channel.rx_bin_duration_s, self.oversample_factor)
    }

    fn packets_per_point(&self) -> usize {
        self.bits_per_point.div_ceil(self.watermark.bits_per_packet)
    }

    /// Packet period in whole RX bins, rounded down.
    fn packet_period_bins(&self) -> usize {
        let period = self.watermark.packet_duration_s() / self.channel.rx_bin_duration_s;
        (period + 1e-9).floor().max(1.0) as usize
    }
}

/// Parses `-15:-5:1, -4.5, inf` style SNR lists.
pub fn parse_snr_list(text: &str) -> Result<Vec<f64>> {
    let bad = |item: &str, why: String| Error::Argument(format!("SNR list item {item:?}: {why}"));
    let mut out = Vec::new();
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let parts: Vec<&str> = item.split(':').map(str::trim).collect();
        let parse = |s: &str| s.parse::<f64>().map_err(|e| bad(item, e.to_string()));
        match parts.as_slice() {
            [one] => out.push(parse(one)?),
            [a, b] | [a, b, _] => {
                let (start, stop) = (parse(a)?, parse(b)?);
                let step = if parts.len() == 3 { parse(parts[2])? } else { 1.0 };
                if !(step.is_finite() && step > 0.0 && start.is_finite() && stop.is_finite()) {
                    return Err(bad(item, "range needs finite bounds and a positive step".into()));
                }
                let count = ((stop - start) / step + 1e-9).floor();
                if count < 0.0 || count > 10_000.0 {
                    return Err(bad(item, "range is empty or too long".into()));
                }
                // Multiply rather than accumulate so points stay exact.
                out.extend((0..=count as usize).map(|i| start + i as f64 * step));
            }
            _ => return Err(bad(item, "expected a value or start:stop[:step]".into())),
        }
    }
    if out.is_empty() {
        return Err(Error::Argument("empty SNR list".into()));
    }
    Ok(out)
}

/// Independent generator for SNR point `index`.
fn point_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

#[derive(Clone, Debug, PartialEq)]
pub struct ManifestEntry {
    pub snr_db: f64,
    pub path: PathBuf,
    pub truth_path: PathBuf,
    pub start_offset_bins: usize,
    /// Error text when this file could not be produced.
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Manifest {
    pub entries: Vec<ManifestEntry>,
}

impl Manifest {
    pub fn is_complete(&self) -> bool {
        self.entries.iter().all(|e| e.error.is_none())
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            match &e.error {
                None => writeln!(out, "{}\tsnr_db={}\toffset={}", e.path.display(), e.snr_db, e.start_offset_bins),
                Some(err) => writeln!(out, "FAILED {}\tsnr_db={}\t{err}", e.path.display(), e.snr_db),
            }
            .expect("write to String");
        }
        if !self.is_complete() {
            out.push_str("# manifest is partial\n");
        }
        out
    }
}

fn snr_tag(snr_db: f64) -> String {
    if snr_db.is_infinite() {
        "inf".into()
    } else {
        format!("{snr_db:+.2}")
    }
}

/// Writes one spectrogram file and truth sidecar per SNR point.
///
/// Each file carries `ceil(bits_per_point / bits_per_packet)` packets
/// starting at a seeded offset within the first packet period, on
/// `channel.num_channels` channels. Noise and offset depend only on
/// `(seed, point index)`.
pub fn cmd_simulate(config: &SweepConfig, out_dir: impl AsRef<Path>) -> Result<Manifest> {
    config.validate()?;
    let out_dir = out_dir.as_ref();
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let probe = out_dir.join(".psym-write-probe");
    fs::write(&probe, b"").map_err(|e| Error::io(out_dir, e))?;
    let _ = fs::remove_file(&probe);

    let packets = config.packets_per_point();
    let pattern = encode_packets(&config.packet, packets, &config.watermark)?;
    let rows_estimate = (pattern.duration_s() / config.channel.rx_bin_duration_s) as u64;
    let bytes = rows_estimate * config.channel.num_channels as u64 * 4;
    if bytes > 1 << 30 {
        log::warn!(
            "each file will hold about {:.1} GiB; lower bits_per_point or num_channels for smaller files",
            bytes as f64 / (1u64 << 30) as f64
        );
    }

    let period = config.packet_period_bins();
    let mut entries = Vec::with_capacity(config.snr_points_db.len());
    for (i, &snr_db) in config.snr_points_db.iter().enumerate() {
        let mut rng = point_rng(config.seed, i);
        let noise_seed: u64 = rng.random();
        let offset = config.start_offset_bins.unwrap_or_else(|| rng.random_range(0..period));
        let path = out_dir.join(format!("p{i:02}_snr{}dB.psymspec", snr_tag(snr_db)));
        let channel = ChannelConfig {
            snr_db,
            noise_seed,
            ..config.channel.clone()
        };
        let result = simulate_rx_spectrogram(&pattern, &channel, offset, Some(&config.packet))
            .and_then(|block| write_spectrogram(&path, &block));
        if let Err(e) = &result {
            log::error!("{}: {e}", path.display());
        } else {
            log::info!("wrote {} (snr {snr_db} dB, offset {offset})", path.display());
        }
        entries.push(ManifestEntry {
            snr_db,
            truth_path: truth_path(&path),
            path,
            start_offset_bins: offset,
            error: result.err().map(|e| e.to_string()),
        });
    }
    Ok(Manifest { entries })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum OutputFormat {
    #[default]
    Text,
    Csv,
}

#[derive(Clone, Debug, Default)]
pub struct DetectFlags {
    /// Channel to decode; defaults to the only column of a single-channel
    /// file, otherwise to the configured watermark channel.
    pub channel_index: Option<usize>,
    /// Decode even when sync finds no significant peak.
    pub force: bool,
    pub format: OutputFormat,
}

/// Decodes a spectrogram file against a known packet.
pub fn cmd_detect(
    path: impl AsRef<Path>,
    packet: &PseudonymPacket,
    config: &SweepConfig,
    flags: &DetectFlags,
) -> Result<DetectionReport> {
    let path = path.as_ref();
    if packet.len() != config.watermark.bits_per_packet {
        return Err(Error::Framing {
            expected: config.watermark.bits_per_packet,
            actual: packet.len(),
        });
    }
    let block = read_spectrogram(path)?;
    let channel = match flags.channel_index {
        Some(c) => c,
        None if block.cols() == 1 => 0,
        None => config.channel.watermark_channel_index,
    };
    if channel >= block.cols() {
        return Err(Error::Argument(format!(
            "channel {channel} out of range for a {}-channel file",
            block.cols()
        )));
    }
    let spec = ResampleSpec::for_durations(&config.watermark, block.bin_duration_s, config.oversample_factor)?;
    let options = DecodeOptions {
        reject_no_signal: !flags.force,
        resync_per_packet: config.resync_per_packet,
        ..Default::default()
    };
    let mut report = decode_block_with(&block, channel, packet, &config.watermark, &spec, &options)?;
    // Truth for a different packet says nothing about this decode.
    if block.ground_truth.as_ref().is_some_and(|t| t.packet != *packet) {
        report.bit_errors = None;
    }
    Ok(report)
}

/// Bitwise majority over all decoded packets; ties go to 0.
pub fn majority_packet(report: &DetectionReport, bits_per_packet: usize) -> Option<PseudonymPacket> {
    if bits_per_packet == 0 || report.decoded_bits.len() < bits_per_packet {
        return None;
    }
    let mut votes = vec![0i64; bits_per_packet];
    for (i, &b) in report.decoded_bits.iter().enumerate() {
        votes[i % bits_per_packet] += if b { 1 } else { -1 };
    }
    let bits: String = votes.iter().map(|&v| if v > 0 { '1' } else { '0' }).collect();
    PseudonymPacket::from_bit_string(&bits).ok()
}

pub fn render_report(
    path: &Path,
    report: &DetectionReport,
    bits_per_packet: usize,
    truth: Option<&GroundTruth>,
    format: OutputFormat,
) -> Result<String> {
    match format {
        OutputFormat::Csv => {
            let record = ExperimentRecord {
                label: path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default(),
                snr_db: truth.map_or(f64::NAN, |t| t.snr_db),
                total_bits: report.total_bits as u64,
                bit_errors: report.bit_errors.unwrap_or(0) as u64,
                sync_offset_error_bins: report.sync_offset_error_bins,
            };
            dataset::records_to_csv(&[record])
        }
        OutputFormat::Text => {
            let mut out = String::new();
            let s = &report.sync;
            let _ = writeln!(out, "file: {}", path.display());
            let _ = writeln!(
                out,
                "sync: start bin {} (peak {:.4}, confidence {:.3}, significance {:.2})",
                s.start_bin, s.peak_correlation, s.confidence, s.significance
            );
            let _ = writeln!(
                out,
                "decoded: {} packets, {} bits, {} low-confidence",
                report.packets_decoded(),
                report.total_bits,
                report.low_confidence_bits
            );
            if let Some(p) = majority_packet(report, bits_per_packet) {
                let _ = writeln!(out, "pseudonym (majority): {}", p.to_hex());
            }
            match (report.bit_errors, report.pe()) {
                (Some(e), Some(pe)) => {
                    let _ = writeln!(out, "bit errors: {e} / {} (pe = {pe})", report.total_bits);
                }
                _ => {
                    let _ = writeln!(out, "bit errors: unknown (no matching ground truth)");
                }
            }
            if let Some(err) = report.sync_offset_error_bins {
                let _ = writeln!(out, "sync offset error: {err} bins");
            }
            Ok(out)
        }
    }
}

/// One sweep point: simulate and decode segments until `bits_per_point`
/// bits are counted.
fn run_point(config: &SweepConfig, spec: &ResampleSpec, index: usize, snr_db: f64) -> Result<ExperimentRecord> {
    let mut rng = point_rng(config.seed, index);
    let period = config.packet_period_bins();
    let options = DecodeOptions {
        reject_no_signal: false,
        resync_per_packet: config.resync_per_packet,
        ..Default::default()
    };
    let bpp = config.watermark.bits_per_packet;
    let truth_bits = config.packet.bits();
    let (mut counted, mut errors) = (0usize, 0usize);
    let mut worst_sync: Option<i64> = None;
    let mut segments = 0;
    while counted < config.bits_per_point {
        segments += 1;
        if segments > 4 * config.packets_per_point() + 4 {
            return Err(Error::Data(format!(
                "point {snr_db} dB: decoder keeps returning no bits ({counted} counted)"
            )));
        }
        let remaining = config.bits_per_point - counted;
        let packets = remaining.div_ceil(bpp).min(config.chunk_packets);
        let noise_seed: u64 = rng.random();
        let offset = config.start_offset_bins.unwrap_or_else(|| rng.random_range(0..period));
        let channel = ChannelConfig {
            snr_db,
            noise_seed,
            rows: None,
            ..config.channel.clone()
        };
        let pattern = encode_packets(&config.packet, packets, &config.watermark)?;
        let series = simulate_watermark_series(&pattern, &channel, offset)?;
        let truth = GroundTruth {
            packet: config.packet.clone(),
            start_offset_bins: offset,
            snr_db,
        };
        let report = decode_series(&series, &config.packet, &config.watermark, spec, Some(&truth), &options)?;
        let take = report.decoded_bits.len().min(remaining);
        errors += report.decoded_bits[..take]
            .iter()
            .enumerate()
            .filter(|&(i, &b)| b != truth_bits[i % bpp])
            .count();
        counted += take;
        if let Some(e) = report.sync_offset_error_bins {
            if worst_sync.is_none_or(|w| e.abs() > w.abs()) {
                worst_sync = Some(e);
            }
        }
    }
    log::info!("snr {snr_db} dB: {errors} errors in {counted} bits");
    Ok(ExperimentRecord {
        label: format!("snr{snr_db}"),
        snr_db,
        total_bits: counted as u64,
        bit_errors: errors as u64,
        sync_offset_error_bins: worst_sync,
    })
}

/// Monte Carlo Pe per SNR point, sorted ascending by SNR.
///
/// Points run in parallel, each from its own `(seed, index)` stream.
/// `sync_offset_error_bins` is the largest absolute sync error over the
/// point's segments. A point that fails is reported with zero bits and a
/// `:failed` label suffix; the others still run.
pub fn run_sweep(config: &SweepConfig) -> Result<Vec<ExperimentRecord>> {
    config.validate()?;
    let spec = config.resample_spec()?;
    let mut records: Vec<ExperimentRecord> = config
        .snr_points_db
        .par_iter()
        .enumerate()
        .map(|(i, &snr_db)| {
            run_point(config, &spec, i, snr_db).unwrap_or_else(|e| {
                log::error!("snr {snr_db} dB failed: {e}");
                ExperimentRecord {
                    label: format!("snr{snr_db}:failed"),
                    snr_db,
                    total_bits: 0,
                    bit_errors: 0,
                    sync_offset_error_bins: None,
                }
            })
        })
        .collect();
    records.sort_by(|a, b| a.snr_db.total_cmp(&b.snr_db));
    Ok(records)
}

/// Runs the sweep, writes the CSV and, when `plot` is given, the two-column
/// plot file.
pub fn cmd_sweep(config: &SweepConfig, out_csv: impl AsRef<Path>, plot: Option<&Path>) -> Result<Vec<ExperimentRecord>> {
    let records = run_sweep(config)?;
    export_records_csv(&records, out_csv)?;
    if let Some(plot) = plot {
        let text = render_plot(&records, config.bits_per_point);
        fs::write(plot, text).map_err(|e| Error::io(plot, e))?;
    }
    Ok(records)
}

/// `snr_db pe` lines for log-scale plotting. Error-free points sit at
/// `1/(2 * bits_per_point)` and are listed in a comment; failed points are
/// commented out.
pub fn render_plot(records: &[ExperimentRecord], bits_per_point: usize) -> String {
    let floor = 1.0 / (2.0 * bits_per_point as f64);
    let mut out = String::from("# snr_db pe\n");
    let zeros: Vec<String> = records
        .iter()
        .filter(|r| r.total_bits > 0 && r.bit_errors == 0)
        .map(|r| r.snr_db.to_string())
        .collect();
    if !zeros.is_empty() {
        let _ = writeln!(out, "# pe=0 floor {floor} (1/(2N), N={bits_per_point}) at snr_db {}", zeros.join(","));
    }
    for r in records {
        if r.total_bits == 0 {
            let _ = writeln!(out, "# failed {}", r.snr_db);
        } else if r.bit_errors == 0 {
            let _ = writeln!(out, "{} {}", r.snr_db, floor);
        } else {
            let _ = writeln!(out, "{} {}", r.snr_db, r.pe());
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn snr_lists() {
        assert_eq!(parse_snr_list("-15:-5:1").unwrap(), (-15..=-5).map(f64::from).collect::<Vec<_>>());
        assert_eq!(parse_snr_list("-6").unwrap(), vec![-6.0]);
        assert_eq!(parse_snr_list("-8:-7:0.5, inf").unwrap(), vec![-8.0, -7.5, -7.0, f64::INFINITY]);
        assert_eq!(parse_snr_list("1:2").unwrap(), vec![1.0, 2.0]);
        assert!(parse_snr_list("").is_err());
        assert!(parse_snr_list("-5:-15:1").is_err());
        assert!(parse_snr_list("a").is_err());
        assert!(parse_snr_list("1:2:0").is_err());
    }

    #[test]
    fn config_text() {
        let mut cfg = SweepConfig::default();
        cfg.apply_text("# sweep\nsnr = -8:-6:1\nbits = 280 # short\npacket = 0xABCDEF1\nnum_channels=4\nwatermark_channel_index = 2\nresync_per_packet = yes\n")
            .unwrap();
        assert_eq!(cfg.snr_points_db, vec![-8.0, -7.0, -6.0]);
        assert_eq!(cfg.bits_per_point, 280);
        assert_eq!(cfg.packet.to_hex(), "abcdef1");
        assert_eq!(cfg.channel.num_channels, 4);
        assert!(cfg.resync_per_packet);
        cfg.validate().unwrap();

        let err = SweepConfig::default().apply_text("\nfoo = 1").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
        assert!(SweepConfig::default().apply_text("bits").is_err());
        assert!(SweepConfig::default().apply_text("bits = many").is_err());
    }

    #[test]
    fn validation() {
        let mut cfg = SweepConfig::default();
        cfg.bits_per_point = 27;
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
        let mut cfg = SweepConfig::default();
        cfg.snr_points_db.clear();
        assert!(cfg.validate().is_err());
        let mut cfg = SweepConfig::default();
        cfg.watermark.bits_per_packet = 27;
        assert!(matches!(cfg.validate(), Err(Error::Framing { .. })));
    }

    #[test]
    fn exit_codes_are_distinct() {
        let codes = [
            exit::SUCCESS,
            exit_status(&Error::NoSignal { peak: 0.0, confidence: 1.0 }),
            exit_status(&Error::Format {
                path: "x".into(),
                reason: String::new(),
            }),
            exit_status(&Error::Argument(String::new())),
            exit_status(&Error::io("x", std::io::Error::other("x"))),
        ];
        let mut sorted = codes.to_vec();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), codes.len());
    }

    #[test]
    fn plot_floor_for_error_free_points() {
        let recs = vec![
            ExperimentRecord {
                label: "a".into(),
                snr_db: -10.0,
                total_bits: 100,
                bit_errors: 5,
                sync_offset_error_bins: None,
            },
            ExperimentRecord {
                label: "b".into(),
                snr_db: -5.0,
                total_bits: 100,
                bit_errors: 0,
                sync_offset_error_bins: Some(0),
            },
        ];
        let text = render_plot(&recs, 100);
        assert!(text.contains("# pe=0 floor 0.005"));
        assert!(text.contains("\n-10 0.05\n"));
        assert!(text.contains("\n-5 0.005\n"));
    }

    #[test]
    fn single_packet_point_is_legal() {
        let cfg = SweepConfig {
            snr_points_db: vec![f64::INFINITY, 10.0],
            bits_per_point: 28,
            ..Default::default()
        };
        let records = run_sweep(&cfg).unwrap();
        assert_eq!(records.len(), 2);
        for r in &records {
            assert_eq!(r.total_bits, 28);
            assert_eq!(r.bit_errors, 0, "{r:?}");
        }
    }

    #[test]
    fn majority_vote() {
        let report = DetectionReport {
            decoded_bits: vec![true, false, true, true, true, false, false, false, true],
            per_bit_metric: vec![0.0; 9],
            low_confidence_bits: 0,
            bit_errors: None,
            total_bits: 9,
            sync: crate::SyncEstimate {
                start_bin: 0,
                peak_correlation: 1.0,
                confidence: f64::INFINITY,
                significance: 10.0,
            },
            sync_offset_error_bins: None,
            packet_origins: vec![0, 1, 2],
        };
        assert_eq!(majority_packet(&report, 3).unwrap().to_bit_string(), "101");
    }
}
