//! Receiver-side simulation: what the watermark looks like in a passive
//! spectrometer's power spectrogram.
//!
//! Three effects are modelled: a lumped scalar attenuation (sidelobe pickup
//! and path loss), the mismatch between the transmitter's symbol period and
//! the spectrometer's integration time, and square-law detected thermal
//! noise.
//!
//! # SNR convention
//!
//! `snr_db` is the peak watermark power (a 1-chip after attenuation) over the
//! mean noise power of one spectrometer bin in the watermark channel. See
//! [`calibrate_snr`].
//!
//! # Noise model
//!
//! Every bin is `|s + n|^2` where `s = sqrt(signal power in the bin)` is
//! deterministic and `n` is circular complex Gaussian with
//! `E|n|^2 = noise_power`. Noise-only bins are therefore exponential with
//! mean `noise_power`. Each channel column draws from its own ChaCha stream
//! keyed by `(noise_seed, channel index)`, so a single column can be
//! regenerated without the rest of the block.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::timebase::duration_ratio;
use crate::watermark::{PseudonymPacket, TxPowerPattern, WatermarkConfig};
use crate::{Error, Result};

/// Receiver and propagation parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelConfig {
    /// `f64::INFINITY` disables noise.
    pub snr_db: f64,
    pub rx_bin_duration_s: f64,
    /// Lumped sidelobe and path loss, >= 0 dB.
    pub attenuation_db: f64,
    pub noise_seed: u64,
    pub num_channels: usize,
    pub watermark_channel_index: usize,
    pub channel_bandwidth_hz: f64,
    pub center_frequency_hz: f64,
    /// Block length in bins. `None` ends the block with the pattern.
    pub rows: Option<usize>,
}

impl Default for ChannelConfig {
    fn default() -> Self {
        ChannelConfig {
            snr_db: 0.0,
            rx_bin_duration_s: 1.0 / 90_000.0,
            attenuation_db: 0.0,
            noise_seed: 0,
            num_channels: 853,
            watermark_channel_index: 426,
            channel_bandwidth_hz: 90_000.0,
            center_frequency_hz: 1.41e9,
            rows: None,
        }
    }
}

impl ChannelConfig {
    pub fn noiseless() -> Self {
        ChannelConfig {
            snr_db: f64::INFINITY,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.snr_db.is_nan() || self.snr_db == f64::NEG_INFINITY {
            return Err(Error::Config(format!("snr_db {} is not usable", self.snr_db)));
        }
        if !(self.rx_bin_duration_s.is_finite() && self.rx_bin_duration_s > 0.0) {
            return Err(Error::Config("rx_bin_duration_s must be positive".into()));
        }
        if !(self.attenuation_db.is_finite() && self.attenuation_db >= 0.0) {
            return Err(Error::Config(format!(
                "attenuation_db must be finite and >= 0, got {}",
                self.attenuation_db
            )));
        }
        if self.num_channels == 0 {
            return Err(Error::Config("num_channels must be at least 1".into()));
        }
        if self.watermark_channel_index >= self.num_channels {
            return Err(Error::Config(format!(
                "watermark_channel_index {} out of range [0, {})",
                self.watermark_channel_index, self.num_channels
            )));
        }
        if !(self.channel_bandwidth_hz.is_finite() && self.channel_bandwidth_hz > 0.0) {
            return Err(Error::Config("channel_bandwidth_hz must be positive".into()));
        }
        Ok(())
    }

    pub fn is_noiseless(&self) -> bool {
        self.snr_db == f64::INFINITY
    }
}

/// A single channel's power over time.
#[derive(Clone, Debug, PartialEq)]
pub struct PowerSeries {
    pub samples: Vec<f64>,
    pub bin_duration_s: f64,
}

impl PowerSeries {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// What the simulator actually transmitted.
#[derive(Clone, Debug, PartialEq)]
pub struct GroundTruth {
    pub packet: PseudonymPacket,
    /// RX bin at which the first packet starts.
    pub start_offset_bins: usize,
    pub snr_db: f64,
}

/// Time × frequency power matrix, row-major with one row per time bin.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectrogramBlock {
    power: Vec<f32>,
    rows: usize,
    cols: usize,
    pub bin_duration_s: f64,
    pub channel_bandwidth_hz: f64,
    pub center_frequency_hz: f64,
    pub ground_truth: Option<GroundTruth>,
}

impl SpectrogramBlock {
    /// Wraps a row-major matrix. Values must be finite and non-negative.
    pub fn new(
        power: Vec<f32>,
        rows: usize,
        cols: usize,
        bin_duration_s: f64,
        channel_bandwidth_hz: f64,
        center_frequency_hz: f64,
    ) -> Result<Self> {
        let expected = rows
            .checked_mul(cols)
            .ok_or_else(|| Error::Argument(format!("{rows} x {cols} overflows")))?;
        if power.len() != expected {
            return Err(Error::Argument(format!(
                "{rows} x {cols} block needs {expected} values, got {}",
                power.len()
            )));
        }
        if cols == 0 {
            return Err(Error::Argument("block must have at least one channel".into()));
        }
        if !(bin_duration_s.is_finite() && bin_duration_s > 0.0) {
            return Err(Error::Argument("bin duration must be positive".into()));
        }
        if let Some((i, v)) = power.iter().enumerate().find(|(_, v)| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::Data(format!(
                "power[{}, {}] = {v} is not a finite non-negative value",
                i / cols,
                i % cols
            )));
        }
        Ok(SpectrogramBlock {
            power,
            rows,
            cols,
            bin_duration_s,
            channel_bandwidth_hz,
            center_frequency_hz,
            ground_truth: None,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> f32 {
        self.power[row * self.cols + col]
    }

    pub fn row(&self, row: usize) -> &[f32] {
        &self.power[row * self.cols..(row + 1) * self.cols]
    }

    /// Row-major payload.
    pub fn as_slice(&self) -> &[f32] {
        &self.power
    }

    pub fn time_span_s(&self) -> f64 {
        self.rows as f64 * self.bin_duration_s
    }

    /// Copies one channel out as an `f64` series.
    pub fn column(&self, col: usize) -> Result<PowerSeries> {
        if col >= self.cols {
            return Err(Error::Argument(format!(
                "channel {col} out of range for a {}-channel block",
                self.cols
            )));
        }
        let samples = self
            .power
            .iter()
            .skip(col)
            .step_by(self.cols)
            .map(|&v| v as f64)
            .collect();
        Ok(PowerSeries {
            samples,
            bin_duration_s: self.bin_duration_s,
        })
    }
}

/// Time-averages a piecewise-constant TX power pattern over RX bins.
///
/// Bin `k` covers `[k*T_RX, (k+1)*T_RX)`; only complete bins are emitted.
/// Interval edges are computed in integer units of `T_TX / q` where
/// `T_RX / T_TX = p / q`, so bin placement is exact for any stream length.
pub fn project_to_rx_resolution(pattern: &TxPowerPattern, rx_bin_duration_s: f64) -> Result<PowerSeries> {
    if pattern.is_empty() {
        return Err(Error::Argument("cannot project an empty pattern".into()));
    }
    let ratio = duration_ratio(rx_bin_duration_s, pattern.symbol_duration_s)?;
    let (p, q) = (*ratio.numer(), *ratio.denom());
    let total_units = pattern.len() as u64 * q;
    let bins = (total_units / p) as usize;
    let mut out = Vec::with_capacity(bins);
    let mut sym = 0usize;
    for k in 0..bins as u64 {
        let (lo, hi) = (k * p, (k + 1) * p);
        // first symbol overlapping [lo, hi)
        while (sym as u64 + 1) * q <= lo {
            sym += 1;
        }
        let mut acc = 0.0;
        let mut s = sym;
        while (s as u64) * q < hi {
            let s_lo = (s as u64 * q).max(lo);
            let s_hi = ((s as u64 + 1) * q).min(hi);
            acc += pattern.samples[s] * (s_hi - s_lo) as f64;
            s += 1;
        }
        out.push(acc / p as f64);
    }
    Ok(PowerSeries {
        samples: out,
        bin_duration_s: rx_bin_duration_s,
    })
}

/// Linear `(signal_power, noise_power)` used by the simulator.
///
/// `signal_power` is the attenuated high (1-chip) power;
/// `noise_power = signal_power / 10^(snr_db / 10)`, zero when noise is off.
pub fn calibrate_snr(channel: &ChannelConfig, config: &WatermarkConfig) -> (f64, f64) {
    let signal = config.high_power * db_to_linear(-channel.attenuation_db);
    let noise = if channel.is_noiseless() {
        0.0
    } else {
        signal / db_to_linear(channel.snr_db)
    };
    (signal, noise)
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

fn column_rng(seed: u64, column: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(column as u64);
    rng
}

/// One channel column: `rows` square-law bins with the (already attenuated)
/// signal power `signal[k]` placed from row `offset`.
fn render_column(
    rows: usize,
    offset: usize,
    signal: &[f64],
    noise_power: f64,
    seed: u64,
    column: usize,
) -> Vec<f64> {
    let signal_at = |r: usize| -> f64 {
        r.checked_sub(offset)
            .and_then(|i| signal.get(i))
            .copied()
            .unwrap_or(0.0)
    };
    if noise_power == 0.0 {
        return (0..rows).map(signal_at).collect();
    }
    let mut rng = column_rng(seed, column);
    let sigma = (noise_power / 2.0).sqrt();
    (0..rows)
        .map(|r| {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            let s = signal_at(r).sqrt();
            let i = s + sigma * re;
            let q = sigma * im;
            i * i + q * q
        })
        .collect()
}

struct Placement {
    rows: usize,
    signal: Vec<f64>,
    noise_power: f64,
}

fn place(
    pattern: &TxPowerPattern,
    channel: &ChannelConfig,
    start_offset_bins: usize,
    high_power: f64,
) -> Result<Placement> {
    channel.validate()?;
    let projected = project_to_rx_resolution(pattern, channel.rx_bin_duration_s)?;
    let rows = channel
        .rows
        .unwrap_or(start_offset_bins + projected.len());
    if start_offset_bins >= rows || projected.is_empty() {
        return Err(Error::Argument(format!(
            "offset {start_offset_bins} places the pattern outside a {rows}-row block"
        )));
    }
    let cfg = WatermarkConfig {
        high_power,
        low_power: 0.0,
        ..Default::default()
    };
    let (signal_power, noise_power) = calibrate_snr(channel, &cfg);
    let gain = signal_power / high_power;
    let signal = projected.samples.iter().map(|p| p * gain).collect();
    Ok(Placement {
        rows,
        signal,
        noise_power,
    })
}

/// Receiver spectrogram of a transmitted power pattern.
///
/// The watermark channel carries the attenuated, RX-projected pattern from
/// `start_offset_bins` onward plus noise; every other channel is noise only.
/// `truth` populates the block's ground truth. The reference power for the
/// SNR is the pattern's peak.
pub fn simulate_rx_spectrogram(
    pattern: &TxPowerPattern,
    channel: &ChannelConfig,
    start_offset_bins: usize,
    truth: Option<&PseudonymPacket>,
) -> Result<SpectrogramBlock> {
    let high = reference_power(pattern)?;
    let placed = place(pattern, channel, start_offset_bins, high)?;
    let cols = channel.num_channels;
    let columns: Vec<Vec<f64>> = (0..cols)
        .into_par_iter()
        .map(|c| {
            let signal: &[f64] = if c == channel.watermark_channel_index {
                &placed.signal
            } else {
                &[]
            };
            render_column(placed.rows, start_offset_bins, signal, placed.noise_power, channel.noise_seed, c)
        })
        .collect();
    let mut power = vec![0f32; placed.rows * cols];
    for (c, col) in columns.iter().enumerate() {
        for (r, &v) in col.iter().enumerate() {
            power[r * cols + c] = v as f32;
        }
    }
    let mut block = SpectrogramBlock::new(
        power,
        placed.rows,
        cols,
        channel.rx_bin_duration_s,
        channel.channel_bandwidth_hz,
        channel.center_frequency_hz,
    )?;
    block.ground_truth = truth.map(|packet| GroundTruth {
        packet: packet.clone(),
        start_offset_bins,
        snr_db: channel.snr_db,
    });
    Ok(block)
}

/// Only the watermark channel of [`simulate_rx_spectrogram`], bit-identical
/// to that column after the block's `f32` storage.
pub fn simulate_watermark_series(
    pattern: &TxPowerPattern,
    channel: &ChannelConfig,
    start_offset_bins: usize,
) -> Result<PowerSeries> {
    let high = reference_power(pattern)?;
    let placed = place(pattern, channel, start_offset_bins, high)?;
    let samples = render_column(
        placed.rows,
        start_offset_bins,
        &placed.signal,
        placed.noise_power,
        channel.noise_seed,
        channel.watermark_channel_index,
    )
    .into_iter()
    .map(|v| v as f32 as f64)
    .collect();
    Ok(PowerSeries {
        samples,
        bin_duration_s: channel.rx_bin_duration_s,
    })
}

fn reference_power(pattern: &TxPowerPattern) -> Result<f64> {
    if let Some(bad) = pattern.samples.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
        return Err(Error::Data(format!("pattern power {bad} is not a finite non-negative value")));
    }
    let high = pattern.max_power();
    if high > 0.0 {
        Ok(high)
    } else {
        Err(Error::Argument("pattern carries no power".into()))
    }
}
