//! Recovering pseudonym bits from a power spectrogram.
//!
//! The receiver sees one power value per ~11.1 µs bin while the transmitter
//! switches power every ~10.7 µs symbol. Decoding runs in five steps:
//!
//! 1. pull the watermark channel out of the block;
//! 2. find where the packet stream starts by normalized cross-correlation
//!    against the projected power pattern of the known packet;
//! 3. resample by 25/24 with 10x oversampling so that one bit spans exactly
//!    900 samples and one chip 60;
//! 4. average the power of every 60-sample chip window;
//! 5. correlate each 15-chip vector with the mean-removed `c1` template and
//!    decide by sign.

use std::sync::Arc;

use num_complex::Complex64;
use num_rational::Ratio;
use rustfft::{Fft, FftPlanner};

use crate::channel::{project_to_rx_resolution, GroundTruth, PowerSeries, SpectrogramBlock};
use crate::timebase::duration_ratio;
use crate::watermark::{
    encode_packet, encode_packets, pn_for_bit, PnSequence, PseudonymPacket, TxPowerPattern, WatermarkConfig,
    CHIPS_PER_BIT,
};
use crate::{Error, Result};

/// A sync peak is accepted when its peak-to-next-peak ratio reaches this
/// value.
///
/// Over noise-only watermark channels (random, all-ones and all-zeros
/// packets; one to ten packet references) the 99.9th percentile of the
/// ratio is about 1.58. See the `noise_only_channels_are_rejected` test.
pub const MIN_SYNC_CONFIDENCE: f64 = 1.6;

/// A sync peak is also accepted when `peak * sqrt(reference length)`
/// reaches this value, which covers packets whose own autocorrelation has
/// strong sidelobes (an all-ones packet repeats every bit). Noise-only
/// searches over one packet period stay below 5.3 in practice.
pub const MIN_SYNC_SIGNIFICANCE: f64 = 6.0;

/// Chip length assumed when a sync search has no watermark config at hand.
const DEFAULT_SAMPLES_PER_CHIP: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SyncEstimate {
    /// RX bin where the (first) reference pattern starts.
    pub start_bin: usize,
    /// Normalized correlation at `start_bin`, in [-1, 1].
    pub peak_correlation: f64,
    /// Peak over the highest local maximum outside the main lobe.
    /// Infinite when no other positive peak exists.
    pub confidence: f64,
    /// `peak_correlation * sqrt(reference length)`: roughly a z-score
    /// against white noise.
    pub significance: f64,
}

impl SyncEstimate {
    pub fn is_signal(&self) -> bool {
        self.confidence >= MIN_SYNC_CONFIDENCE || self.significance >= MIN_SYNC_SIGNIFICANCE
    }
}

/// Resampling geometry: the receiver grid is stretched by
/// `numerator / denominator` and then oversampled.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ResampleSpec {
    pub interpolation_numerator: u64,
    pub interpolation_denominator: u64,
    pub oversample_factor: u64,
    pub samples_per_bit_out: usize,
    pub samples_per_chip_out: usize,
}

impl Default for ResampleSpec {
    fn default() -> Self {
        ResampleSpec {
            interpolation_numerator: 25,
            interpolation_denominator: 24,
            oversample_factor: 10,
            samples_per_bit_out: 900,
            samples_per_chip_out: 60,
        }
    }
}

impl ResampleSpec {
    /// Geometry for arbitrary TX symbol and RX bin durations.
    pub fn for_durations(
        config: &WatermarkConfig,
        rx_bin_duration_s: f64,
        oversample_factor: u64,
    ) -> Result<Self> {
        config.validate()?;
        if oversample_factor == 0 {
            return Err(Error::Config("oversample_factor must be positive".into()));
        }
        let r = duration_ratio(rx_bin_duration_s, config.tx_symbol_duration_s)?;
        let chip = config.samples_per_chip * oversample_factor as usize;
        let spec = ResampleSpec {
            interpolation_numerator: *r.numer(),
            interpolation_denominator: *r.denom(),
            oversample_factor,
            samples_per_bit_out: chip * config.chips_per_bit,
            samples_per_chip_out: chip,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.interpolation_numerator == 0
            || self.interpolation_denominator == 0
            || self.oversample_factor == 0
            || self.samples_per_chip_out == 0
        {
            return Err(Error::Config("resample spec terms must be positive".into()));
        }
        if self.samples_per_bit_out != self.samples_per_chip_out * CHIPS_PER_BIT {
            return Err(Error::Config(format!(
                "samples_per_bit_out {} != {} chips x {}",
                self.samples_per_bit_out, CHIPS_PER_BIT, self.samples_per_chip_out
            )));
        }
        Ok(())
    }

    /// Output samples per input sample, `numerator * oversample / denominator`.
    pub fn rate(&self) -> Ratio<u64> {
        Ratio::new(
            self.interpolation_numerator * self.oversample_factor,
            self.interpolation_denominator,
        )
    }

    /// Maps an RX bin index (bin start) to the oversampled index whose
    /// interpolated value is centred on that instant.
    ///
    /// An RX bin value is the mean over `[k, k+1)`, so linear interpolation at
    /// input position `x` estimates the power at time `x + 1/2`. Negative
    /// results clamp to 0.
    pub fn oversampled_index(&self, rx_bin: usize) -> usize {
        let up = self.interpolation_numerator * self.oversample_factor;
        let den = self.interpolation_denominator;
        // round((rx_bin - 1/2) * up / den)
        let num = (2 * rx_bin as i128 - 1) * up as i128;
        let d = 2 * den as i128;
        let rounded = (2 * num + d).div_euclid(2 * d);
        rounded.max(0) as usize
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BitDecision {
    pub bit: bool,
    /// Normalized correlation with the `c1` template, in [-1, 1].
    pub metric: f64,
    /// Set when the metric is zero and the bit defaulted to 0.
    pub low_confidence: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DetectionReport {
    pub decoded_bits: Vec<bool>,
    pub per_bit_metric: Vec<f64>,
    pub low_confidence_bits: usize,
    /// Present when the block carried ground truth.
    pub bit_errors: Option<usize>,
    pub total_bits: usize,
    pub sync: SyncEstimate,
    pub sync_offset_error_bins: Option<i64>,
    /// Oversampled index where each decoded packet starts.
    pub packet_origins: Vec<usize>,
}

impl DetectionReport {
    pub fn packets_decoded(&self) -> usize {
        self.packet_origins.len()
    }

    pub fn pe(&self) -> Option<f64> {
        self.bit_errors
            .filter(|_| self.total_bits > 0)
            .map(|e| e as f64 / self.total_bits as f64)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecodeOptions {
    /// Return [`Error::NoSignal`] when the sync peak fails both acceptance
    /// thresholds. Disable to force a decode, e.g. when measuring Pe.
    pub reject_no_signal: bool,
    /// Re-locate every packet with a local single-packet correlation
    /// instead of trusting the fixed packet period. For recordings with
    /// clock drift.
    pub resync_per_packet: bool,
    /// Search radius of the per-packet re-sync, in RX bins.
    pub resync_radius_bins: usize,
}

impl Default for DecodeOptions {
    fn default() -> Self {
        DecodeOptions {
            reject_no_signal: true,
            resync_per_packet: false,
            resync_radius_bins: 6,
        }
    }
}

pub fn extract_channel(block: &SpectrogramBlock, channel_index: usize) -> Result<PowerSeries> {
    block.column(channel_index)
}

/// Normalized cross-correlation of `series` against `reference` at every
/// lag in `0..=max_lag`.
///
/// The reference is mean-removed once; each series window is mean-removed
/// on its own. Windows with (numerically) zero variance score 0.
pub fn normalized_xcorr(series: &[f64], reference: &[f64], max_lag: usize) -> Vec<f64> {
    let n = series.len();
    let l = reference.len();
    assert!(l > 0 && n >= l, "reference must fit inside the series");
    let max_lag = max_lag.min(n - l);

    let ref_mean = reference.iter().sum::<f64>() / l as f64;
    let r: Vec<f64> = reference.iter().map(|v| v - ref_mean).collect();
    let r_norm = r.iter().map(|v| v * v).sum::<f64>().sqrt();
    if r_norm == 0.0 {
        return vec![0.0; max_lag + 1];
    }

    // Centre the series globally; windowed variance is shift-invariant and
    // the prefix sums keep more precision.
    let used = max_lag + l;
    let x_mean = series[..used].iter().sum::<f64>() / used as f64;
    let x: Vec<f64> = series[..used].iter().map(|v| v - x_mean).collect();

    let raw = sliding_dot(&x, &r, max_lag);

    let mut s1 = vec![0.0; used + 1];
    let mut s2 = vec![0.0; used + 1];
    for (i, v) in x.iter().enumerate() {
        s1[i + 1] = s1[i] + v;
        s2[i + 1] = s2[i] + v * v;
    }
    let total_var = s2[used] - s1[used] * s1[used] / used as f64;
    let floor = 1e-10 * total_var.max(f64::MIN_POSITIVE) * l as f64 / used as f64;
    (0..=max_lag)
        .map(|lag| {
            let sum = s1[lag + l] - s1[lag];
            let sq = s2[lag + l] - s2[lag];
            let var = sq - sum * sum / l as f64;
            if var <= floor {
                0.0
            } else {
                (raw[lag] / (r_norm * var.sqrt())).clamp(-1.0, 1.0)
            }
        })
        .collect()
}

/// `out[lag] = sum_i x[lag + i] * r[i]` for `lag in 0..=max_lag`.
fn sliding_dot(x: &[f64], r: &[f64], max_lag: usize) -> Vec<f64> {
    let l = r.len();
    if (max_lag + 1) * l <= 1 << 16 {
        return (0..=max_lag)
            .map(|lag| x[lag..lag + l].iter().zip(r).map(|(a, b)| a * b).sum())
            .collect();
    }
    let m = (x.len() + l).next_power_of_two();
    let mut planner = FftPlanner::<f64>::new();
    let fwd: Arc<dyn Fft<f64>> = planner.plan_fft_forward(m);
    let inv: Arc<dyn Fft<f64>> = planner.plan_fft_inverse(m);
    let mut a: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    a.resize(m, Complex64::new(0.0, 0.0));
    let mut b: Vec<Complex64> = r.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    b.resize(m, Complex64::new(0.0, 0.0));
    fwd.process(&mut a);
    fwd.process(&mut b);
    for (u, v) in a.iter_mut().zip(&b) {
        *u *= v.conj();
    }
    inv.process(&mut a);
    a[..=max_lag].iter().map(|z| z.re / m as f64).collect()
}

/// Picks the best lag of a correlation curve.
///
/// Ties go to the smallest lag. `exclusion` is the half-width of the main
/// lobe ignored when looking for the runner-up peak.
fn pick_peak(rho: &[f64], exclusion: usize, reference_len: usize) -> SyncEstimate {
    let (best, peak) = rho
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, v)| if v > bv { (i, v) } else { (bi, bv) });
    let is_local_max = |i: usize| {
        let left = i == 0 || rho[i] >= rho[i - 1];
        let right = i + 1 == rho.len() || rho[i] >= rho[i + 1];
        left && right
    };
    let runner_up = rho
        .iter()
        .enumerate()
        .filter(|&(i, _)| i.abs_diff(best) > exclusion && is_local_max(i))
        .map(|(_, &v)| v)
        .fold(f64::NEG_INFINITY, f64::max);
    let confidence = if peak <= 0.0 {
        0.0
    } else if runner_up > 0.0 {
        peak / runner_up
    } else {
        f64::INFINITY
    };
    SyncEstimate {
        start_bin: best,
        peak_correlation: peak,
        confidence,
        significance: peak * (reference_len as f64).sqrt(),
    }
}

fn chip_span_bins(samples_per_chip: usize, symbol_duration_s: f64, bin_duration_s: f64) -> usize {
    (samples_per_chip as f64 * symbol_duration_s / bin_duration_s).ceil().max(1.0) as usize
}

/// Locates `reference` (a TX power pattern) in a receiver power series.
///
/// The reference is projected onto the series' bin grid first. Every lag at
/// which the projected reference fits is searched.
pub fn cross_correlate_sync(series: &PowerSeries, reference: &TxPowerPattern) -> Result<SyncEstimate> {
    let projected = project_to_rx_resolution(reference, series.bin_duration_s)?;
    if projected.is_empty() || series.len() < projected.len() {
        return Err(Error::InsufficientData {
            needed: projected.len().max(1),
            available: series.len(),
        });
    }
    let max_lag = series.len() - projected.len();
    sync_projected(series, &projected.samples, max_lag, reference.symbol_duration_s, DEFAULT_SAMPLES_PER_CHIP)
}

fn sync_projected(
    series: &PowerSeries,
    projected: &[f64],
    max_lag: usize,
    symbol_duration_s: f64,
    samples_per_chip: usize,
) -> Result<SyncEstimate> {
    if series.samples.iter().any(|v| !v.is_finite()) {
        return Err(Error::Data("power series contains non-finite values".into()));
    }
    let rho = normalized_xcorr(&series.samples, projected, max_lag);
    let exclusion = chip_span_bins(samples_per_chip, symbol_duration_s, series.bin_duration_s);
    Ok(pick_peak(&rho, exclusion, projected.len()))
}

/// Linear-interpolation resampler onto the oversampled chip grid.
///
/// Output sample `j` is the input interpolated at position
/// `j * denominator / (numerator * oversample)`; the output has
/// `floor((n - 1) * numerator * oversample / denominator) + 1` samples.
pub fn resample_25_24_x10(series: &PowerSeries, spec: &ResampleSpec) -> Result<Vec<f64>> {
    spec.validate()?;
    let x = &series.samples;
    let n = x.len();
    if n < 2 {
        return Err(Error::InsufficientData { needed: 2, available: n });
    }
    let up = spec.interpolation_numerator * spec.oversample_factor;
    let down = spec.interpolation_denominator;
    let len = ((n as u64 - 1) * up / down) as usize + 1;
    let out = (0..len as u64)
        .map(|j| {
            let pos = j * down;
            let i = (pos / up) as usize;
            let rem = pos % up;
            if rem == 0 {
                x[i]
            } else {
                let f = rem as f64 / up as f64;
                x[i] * (1.0 - f) + x[i + 1] * f
            }
        })
        .collect();
    Ok(out)
}

/// Mean power of every chip window: entry `[b][c]` averages
/// `samples_per_chip_out` samples from `start + b*samples_per_bit_out +
/// c*samples_per_chip_out`.
pub fn average_chips(
    series: &[f64],
    start_index: usize,
    num_bits: usize,
    spec: &ResampleSpec,
) -> Result<Vec<[f64; CHIPS_PER_BIT]>> {
    spec.validate()?;
    let needed = start_index + num_bits * spec.samples_per_bit_out;
    if needed > series.len() {
        return Err(Error::InsufficientData {
            needed,
            available: series.len(),
        });
    }
    let w = spec.samples_per_chip_out;
    Ok((0..num_bits)
        .map(|b| {
            let base = start_index + b * spec.samples_per_bit_out;
            std::array::from_fn(|c| {
                let s = base + c * w;
                series[s..s + w].iter().sum::<f64>() / w as f64
            })
        })
        .collect())
}

/// Sign of the normalized correlation between mean-removed chip powers and
/// the mean-removed `c1 - c0` template.
pub fn decide_bit(chip_powers: &[f64], c0: &PnSequence, c1: &PnSequence) -> Result<BitDecision> {
    if chip_powers.len() != CHIPS_PER_BIT {
        return Err(Error::Data(format!(
            "expected {CHIPS_PER_BIT} chip powers, got {}",
            chip_powers.len()
        )));
    }
    if let Some(v) = chip_powers.iter().find(|v| !v.is_finite()) {
        return Err(Error::Data(format!("chip power {v} is not finite")));
    }
    let (b0, b1) = (c0.bipolar(), c1.bipolar());
    let raw: [f64; CHIPS_PER_BIT] = std::array::from_fn(|i| (b1[i] - b0[i]) / 2.0);
    let t_mean = raw.iter().sum::<f64>() / CHIPS_PER_BIT as f64;
    let t: [f64; CHIPS_PER_BIT] = raw.map(|v| v - t_mean);
    let t_norm = t.iter().map(|v| v * v).sum::<f64>().sqrt();

    let x_mean = chip_powers.iter().sum::<f64>() / CHIPS_PER_BIT as f64;
    let scale = chip_powers.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let xc: Vec<f64> = chip_powers.iter().map(|v| v - x_mean).collect();
    let x_norm = xc.iter().map(|v| v * v).sum::<f64>().sqrt();
    if t_norm == 0.0 || x_norm <= 1e-12 * scale {
        return Ok(BitDecision {
            bit: false,
            metric: 0.0,
            low_confidence: true,
        });
    }
    let metric = (xc.iter().zip(&t).map(|(a, b)| a * b).sum::<f64>() / (x_norm * t_norm)).clamp(-1.0, 1.0);
    if metric.abs() <= 1e-12 {
        return Ok(BitDecision {
            bit: false,
            metric: 0.0,
            low_confidence: true,
        });
    }
    Ok(BitDecision {
        bit: metric > 0.0,
        metric,
        low_confidence: false,
    })
}

/// Fraction of positions where `decoded` and `truth` differ.
pub fn compute_pe(decoded: &[bool], truth: &[bool]) -> Result<Ratio<u64>> {
    if decoded.is_empty() || decoded.len() != truth.len() {
        return Err(Error::Argument(format!(
            "cannot compare {} decoded bits against {} truth bits",
            decoded.len(),
            truth.len()
        )));
    }
    let errors = decoded.iter().zip(truth).filter(|(a, b)| a != b).count();
    Ok(Ratio::new(errors as u64, decoded.len() as u64))
}

pub fn decode_block(
    block: &SpectrogramBlock,
    channel_index: usize,
    reference_packet: &PseudonymPacket,
    config: &WatermarkConfig,
    spec: &ResampleSpec,
) -> Result<DetectionReport> {
    decode_block_with(block, channel_index, reference_packet, config, spec, &DecodeOptions::default())
}

pub fn decode_block_with(
    block: &SpectrogramBlock,
    channel_index: usize,
    reference_packet: &PseudonymPacket,
    config: &WatermarkConfig,
    spec: &ResampleSpec,
    options: &DecodeOptions,
) -> Result<DetectionReport> {
    let series = extract_channel(block, channel_index)?;
    decode_series(&series, reference_packet, config, spec, block.ground_truth.as_ref(), options)
}

/// Full detection pipeline on one channel's power series.
///
/// The stream is assumed continuous, so a complete packet begins within one
/// packet period of the first bin. Sync searches lags in that period with a
/// reference of as many back-to-back packets as still fit, which gains
/// correlation length for weak signals. Every complete packet after the
/// sync origin is then decoded on the fixed oversampled grid (or re-synced
/// per packet when requested).
pub fn decode_series(
    series: &PowerSeries,
    reference_packet: &PseudonymPacket,
    config: &WatermarkConfig,
    spec: &ResampleSpec,
    truth: Option<&GroundTruth>,
    options: &DecodeOptions,
) -> Result<DetectionReport> {
    config.validate()?;
    spec.validate()?;
    if spec.samples_per_chip_out % config.samples_per_chip != 0
        || spec.samples_per_bit_out != config.samples_per_bit() * spec.oversample_factor as usize
    {
        return Err(Error::Config(format!(
            "resample spec ({} per bit) does not match watermark config ({} TX samples per bit x {})",
            spec.samples_per_bit_out,
            config.samples_per_bit(),
            spec.oversample_factor
        )));
    }
    let ratio = duration_ratio(series.bin_duration_s, config.tx_symbol_duration_s)?;
    let (p, q) = (*ratio.numer(), *ratio.denom());
    if (p, q) != (spec.interpolation_numerator, spec.interpolation_denominator) {
        return Err(Error::Config(format!(
            "bin/symbol ratio {p}/{q} does not match resample spec {}/{}",
            spec.interpolation_numerator, spec.interpolation_denominator
        )));
    }
    let n = series.len();
    let tx_per_packet = config.samples_per_packet() as u64;
    let proj_len = |k: u64| (k * tx_per_packet * q / p) as usize;
    let one = proj_len(1);
    if one == 0 || n < one {
        return Err(Error::InsufficientData {
            needed: one.max(1),
            available: n,
        });
    }

    let period_ceil = (tx_per_packet * q).div_ceil(p) as usize;
    let window = period_ceil.min(n - one + 1);
    let mut packets_in_ref = 1u64;
    while proj_len(packets_in_ref + 1) + window - 1 <= n {
        packets_in_ref += 1;
    }
    let reference = encode_packets(reference_packet, packets_in_ref as usize, config)?;
    let projected = project_to_rx_resolution(&reference, series.bin_duration_s)?;
    debug_assert_eq!(projected.len(), proj_len(packets_in_ref));
    let sync = sync_projected(
        series,
        &projected.samples,
        window - 1,
        config.tx_symbol_duration_s,
        config.samples_per_chip,
    )?;
    log::debug!(
        "sync: start {} peak {:.4} confidence {:.3} significance {:.2} ({} packets in reference)",
        sync.start_bin,
        sync.peak_correlation,
        sync.confidence,
        sync.significance,
        packets_in_ref
    );
    if options.reject_no_signal && !sync.is_signal() {
        return Err(Error::NoSignal {
            peak: sync.peak_correlation,
            confidence: sync.confidence,
        });
    }

    let mut oversampled = resample_25_24_x10(series, spec)?;
    // The last interpolation point is the centre of the last bin, and a
    // block may drop the partial bin where the stream ends, so the final
    // packet can run up to 1.5 bins past it. Hold the edge value for two.
    let last = *oversampled.last().expect("resampler output is non-empty");
    let two_bins = (2 * spec.interpolation_numerator * spec.oversample_factor).div_ceil(spec.interpolation_denominator);
    oversampled.resize(oversampled.len() + two_bins as usize, last);
    let bits_per_packet = config.bits_per_packet;
    let packet_out = bits_per_packet * spec.samples_per_bit_out;
    let origin = spec.oversampled_index(sync.start_bin);
    let available = oversampled.len().saturating_sub(origin);
    let num_packets = available / packet_out;
    if num_packets == 0 {
        return Err(Error::InsufficientData {
            needed: origin + packet_out,
            available: oversampled.len(),
        });
    }

    let single = if options.resync_per_packet {
        Some(project_to_rx_resolution(&encode_packet(reference_packet, config)?, series.bin_duration_s)?)
    } else {
        None
    };

    let c0 = pn_for_bit(false);
    let c1 = pn_for_bit(true);
    let mut report = DetectionReport {
        decoded_bits: Vec::with_capacity(num_packets * bits_per_packet),
        per_bit_metric: Vec::with_capacity(num_packets * bits_per_packet),
        low_confidence_bits: 0,
        bit_errors: None,
        total_bits: 0,
        sync,
        sync_offset_error_bins: truth.map(|t| sync.start_bin as i64 - t.start_offset_bins as i64),
        packet_origins: Vec::with_capacity(num_packets),
    };
    for k in 0..num_packets {
        let nominal = origin + k * packet_out;
        let start = match &single {
            Some(one_packet) => {
                resync_origin(series, &one_packet.samples, sync.start_bin, k as u64, tx_per_packet, ratio, spec, options)
                    .filter(|&s| s + packet_out <= oversampled.len())
                    .unwrap_or(nominal)
            }
            None => nominal,
        };
        report.packet_origins.push(start);
        for chips in average_chips(&oversampled, start, bits_per_packet, spec)? {
            let d = decide_bit(&chips, &c0, &c1)?;
            report.low_confidence_bits += d.low_confidence as usize;
            report.decoded_bits.push(d.bit);
            report.per_bit_metric.push(d.metric);
        }
    }
    report.total_bits = report.decoded_bits.len();
    if let Some(t) = truth {
        let tb = t.packet.bits();
        if !tb.is_empty() {
            let errors = report
                .decoded_bits
                .iter()
                .enumerate()
                .filter(|&(i, &b)| b != tb[i % tb.len()])
                .count();
            report.bit_errors = Some(errors);
        }
    }
    Ok(report)
}

/// Re-locates packet `k` with a single-packet correlation around its
/// nominal RX position and returns its oversampled origin.
#[allow(clippy::too_many_arguments)]
fn resync_origin(
    series: &PowerSeries,
    one_packet: &[f64],
    start_bin: usize,
    k: u64,
    tx_per_packet: u64,
    ratio: Ratio<u64>,
    spec: &ResampleSpec,
    options: &DecodeOptions,
) -> Option<usize> {
    let (p, q) = (*ratio.numer(), *ratio.denom());
    // nominal start in RX bins, rounded to nearest
    let nominal = start_bin + ((2 * k * tx_per_packet * q + p) / (2 * p)) as usize;
    let lo = nominal.saturating_sub(options.resync_radius_bins);
    let hi = nominal + options.resync_radius_bins;
    if hi + one_packet.len() > series.len() {
        return None;
    }
    let window = &series.samples[lo..hi + one_packet.len()];
    let rho = normalized_xcorr(window, one_packet, hi - lo);
    let best = rho
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, &v)| if v > bv { (i, v) } else { (bi, bv) })
        .0;
    Some(spec.oversampled_index(lo + best))
}
