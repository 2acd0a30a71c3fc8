//! Watermark construction: PN chip sequences, packet framing and the
//! transmitted power pattern on the reserved subcarrier.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::FftPlanner;

use crate::{Error, Result};

/// Chips per pseudonym bit. Fixed by the length-15 m-sequence.
pub const CHIPS_PER_BIT: usize = 15;

/// Chip sequence for a pseudonym bit of value 1.
const C1: [u8; CHIPS_PER_BIT] = [1, 0, 0, 0, 1, 1, 1, 1, 0, 1, 0, 1, 1, 0, 0];

/// A 15-chip binary spreading code.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct PnSequence {
    chips: [u8; CHIPS_PER_BIT],
}

impl PnSequence {
    pub fn chips(&self) -> &[u8; CHIPS_PER_BIT] {
        &self.chips
    }

    pub fn complement(&self) -> Self {
        let mut chips = self.chips;
        chips.iter_mut().for_each(|c| *c ^= 1);
        PnSequence { chips }
    }

    pub fn ones(&self) -> usize {
        self.chips.iter().filter(|&&c| c == 1).count()
    }

    /// Chips mapped to ±1 (0 → -1).
    pub fn bipolar(&self) -> [f64; CHIPS_PER_BIT] {
        self.chips.map(|c| if c == 1 { 1.0 } else { -1.0 })
    }
}

impl fmt::Debug for PnSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PnSequence[")?;
        for c in self.chips {
            write!(f, "{c}")?;
        }
        write!(f, "]")
    }
}

/// Spreading code for a pseudonym bit: `c1` for 1, its complement `c0` for 0.
pub fn pn_for_bit(bit: bool) -> PnSequence {
    let c1 = PnSequence { chips: C1 };
    if bit {
        c1
    } else {
        c1.complement()
    }
}

/// Transmitter-side watermark parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct WatermarkConfig {
    /// TX symbols per chip.
    pub samples_per_chip: usize,
    pub chips_per_bit: usize,
    pub bits_per_packet: usize,
    /// Linear power of a 1-chip.
    pub high_power: f64,
    /// Linear power of a 0-chip. Zero gives on-off keying.
    pub low_power: f64,
    pub tx_symbol_duration_s: f64,
    pub watermark_subcarrier_index: usize,
    pub num_subcarriers: usize,
    pub sample_rate_hz: f64,
}

impl Default for WatermarkConfig {
    fn default() -> Self {
        WatermarkConfig {
            samples_per_chip: 6,
            chips_per_bit: CHIPS_PER_BIT,
            bits_per_packet: 28,
            high_power: 1.0,
            low_power: 0.0,
            tx_symbol_duration_s: 1.0 / 93_750.0,
            watermark_subcarrier_index: 1,
            num_subcarriers: 64,
            sample_rate_hz: 6.0e6,
        }
    }
}

impl WatermarkConfig {
    pub fn validate(&self) -> Result<()> {
        if self.samples_per_chip == 0 {
            return Err(Error::Config("samples_per_chip must be positive".into()));
        }
        if self.chips_per_bit != CHIPS_PER_BIT {
            return Err(Error::Config(format!(
                "chips_per_bit must be {CHIPS_PER_BIT}, got {}",
                self.chips_per_bit
            )));
        }
        if self.bits_per_packet == 0 {
            return Err(Error::Config("bits_per_packet must be positive".into()));
        }
        if !(self.high_power.is_finite() && self.high_power > 0.0) {
            return Err(Error::Config(format!(
                "high_power must be positive and finite, got {}",
                self.high_power
            )));
        }
        if !(self.low_power.is_finite() && self.low_power >= 0.0 && self.low_power < self.high_power)
        {
            return Err(Error::Config(format!(
                "low_power must satisfy 0 <= low_power < high_power, got {} (high {})",
                self.low_power, self.high_power
            )));
        }
        if !(self.tx_symbol_duration_s.is_finite() && self.tx_symbol_duration_s > 0.0) {
            return Err(Error::Config("tx_symbol_duration_s must be positive".into()));
        }
        if self.num_subcarriers == 0 {
            return Err(Error::Config("num_subcarriers must be positive".into()));
        }
        if self.watermark_subcarrier_index >= self.num_subcarriers {
            return Err(Error::Config(format!(
                "watermark_subcarrier_index {} out of range [0, {})",
                self.watermark_subcarrier_index, self.num_subcarriers
            )));
        }
        if !(self.sample_rate_hz.is_finite() && self.sample_rate_hz > 0.0) {
            return Err(Error::Config("sample_rate_hz must be positive".into()));
        }
        Ok(())
    }

    pub fn samples_per_bit(&self) -> usize {
        self.samples_per_chip * self.chips_per_bit
    }

    pub fn samples_per_packet(&self) -> usize {
        self.samples_per_bit() * self.bits_per_packet
    }

    pub fn packet_duration_s(&self) -> f64 {
        self.samples_per_packet() as f64 * self.tx_symbol_duration_s
    }

    /// Subcarrier spacing implied by the sample rate and FFT size.
    pub fn subcarrier_spacing_hz(&self) -> f64 {
        self.sample_rate_hz / self.num_subcarriers as f64
    }

    fn chip_power(&self, chip: u8) -> f64 {
        if chip == 1 {
            self.high_power
        } else {
            self.low_power
        }
    }
}

/// The pseudonym payload. All bits are opaque to the codec.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PseudonymPacket {
    bits: Vec<bool>,
}

impl PseudonymPacket {
    pub fn new(bits: Vec<bool>, config: &WatermarkConfig) -> Result<Self> {
        if bits.len() != config.bits_per_packet {
            return Err(Error::Framing {
                expected: config.bits_per_packet,
                actual: bits.len(),
            });
        }
        Ok(PseudonymPacket { bits })
    }

    /// Packet from the low `nbits` of `value`, most significant bit first.
    pub fn from_value(value: u64, nbits: usize) -> Result<Self> {
        if nbits == 0 || nbits > 64 {
            return Err(Error::Argument(format!("packet width {nbits} outside 1..=64")));
        }
        if nbits < 64 && value >> nbits != 0 {
            return Err(Error::Argument(format!(
                "value {value:#x} does not fit in {nbits} bits"
            )));
        }
        let bits = (0..nbits).rev().map(|i| (value >> i) & 1 == 1).collect();
        Ok(PseudonymPacket { bits })
    }

    /// Parses exactly seven hex digits into a 28-bit packet.
    pub fn from_hex(text: &str) -> Result<Self> {
        let text = text.trim();
        let digits = text
            .strip_prefix("0x")
            .or_else(|| text.strip_prefix("0X"))
            .unwrap_or(text);
        if digits.len() != 7 || !digits.chars().all(|c| c.is_ascii_hexdigit()) {
            return Err(Error::Argument(format!(
                "packet must be 7 hex digits (28 bits), got {text:?}"
            )));
        }
        let value = u64::from_str_radix(digits, 16)
            .map_err(|e| Error::Argument(format!("packet {text:?}: {e}")))?;
        Self::from_value(value, 28)
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn to_value(&self) -> u64 {
        self.bits.iter().fold(0u64, |acc, &b| (acc << 1) | b as u64)
    }

    /// Lower-case hex rendering, one digit per started nibble.
    pub fn to_hex(&self) -> String {
        let width = self.bits.len().div_ceil(4);
        format!("{:0width$x}", self.to_value(), width = width)
    }

    /// Bits as a `0`/`1` string.
    pub fn to_bit_string(&self) -> String {
        self.bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
    }

    pub fn from_bit_string(text: &str) -> Result<Self> {
        let bits = text
            .trim()
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::Argument(format!("invalid bit character {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        if bits.is_empty() {
            return Err(Error::Argument("empty bit string".into()));
        }
        Ok(PseudonymPacket { bits })
    }
}

/// Per-TX-symbol linear power on the watermark subcarrier.
#[derive(Clone, Debug, PartialEq)]
pub struct TxPowerPattern {
    pub samples: Vec<f64>,
    pub symbol_duration_s: f64,
}

impl TxPowerPattern {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 * self.symbol_duration_s
    }

    pub fn max_power(&self) -> f64 {
        self.samples.iter().copied().fold(0.0, f64::max)
    }
}

/// A packet repeated back to back for a fixed airtime.
#[derive(Clone, Debug, PartialEq)]
pub struct EncodedStream {
    pub pattern: TxPowerPattern,
    pub full_packets: usize,
    /// Samples of the trailing partial packet.
    pub tail_samples: usize,
}

fn push_bit(samples: &mut Vec<f64>, bit: bool, config: &WatermarkConfig) {
    for &chip in pn_for_bit(bit).chips() {
        let p = config.chip_power(chip);
        samples.extend(std::iter::repeat_n(p, config.samples_per_chip));
    }
}

pub fn encode_bit(bit: bool, config: &WatermarkConfig) -> Result<TxPowerPattern> {
    config.validate()?;
    let mut samples = Vec::with_capacity(config.samples_per_bit());
    push_bit(&mut samples, bit, config);
    Ok(TxPowerPattern {
        samples,
        symbol_duration_s: config.tx_symbol_duration_s,
    })
}

pub fn encode_packet(packet: &PseudonymPacket, config: &WatermarkConfig) -> Result<TxPowerPattern> {
    encode_packets(packet, 1, config)
}

/// `count` back-to-back copies of the packet.
pub fn encode_packets(
    packet: &PseudonymPacket,
    count: usize,
    config: &WatermarkConfig,
) -> Result<TxPowerPattern> {
    config.validate()?;
    if packet.len() != config.bits_per_packet {
        return Err(Error::Framing {
            expected: config.bits_per_packet,
            actual: packet.len(),
        });
    }
    let mut one = Vec::with_capacity(config.samples_per_packet());
    for &bit in packet.bits() {
        push_bit(&mut one, bit, config);
    }
    let samples = if count == 1 { one } else { one.repeat(count) };
    Ok(TxPowerPattern {
        samples,
        symbol_duration_s: config.tx_symbol_duration_s,
    })
}

/// Repeats the packet for `duration_s` seconds of airtime, truncating the
/// last copy at the duration boundary.
pub fn encode_stream(
    packet: &PseudonymPacket,
    duration_s: f64,
    config: &WatermarkConfig,
) -> Result<EncodedStream> {
    if !(duration_s.is_finite() && duration_s > 0.0) {
        return Err(Error::Argument(format!(
            "stream duration must be positive, got {duration_s}"
        )));
    }
    let one = encode_packet(packet, config)?;
    let symbols = duration_s / config.tx_symbol_duration_s;
    // Durations given as a whole number of symbols land a hair under the
    // integer in floating point.
    let nearest = symbols.round();
    let total = if (symbols - nearest).abs() <= 1e-9 * nearest.max(1.0) {
        nearest
    } else {
        symbols.floor()
    } as usize;
    let per_packet = one.len();
    let full_packets = total / per_packet;
    let tail_samples = total % per_packet;
    let mut samples = one.samples.repeat(full_packets);
    samples.extend_from_slice(&one.samples[..tail_samples]);
    Ok(EncodedStream {
        pattern: TxPowerPattern {
            samples,
            symbol_duration_s: config.tx_symbol_duration_s,
        },
        full_packets,
        tail_samples,
    })
}

/// Source of placeholder symbols for the data subcarriers.
pub trait SymbolSource {
    fn next_symbol(&mut self) -> Complex64;
}

impl<F: FnMut() -> Complex64> SymbolSource for F {
    fn next_symbol(&mut self) -> Complex64 {
        self()
    }
}

/// Unit-power QPSK points from a seeded generator.
#[derive(Clone, Debug)]
pub struct QpskSource {
    rng: ChaCha8Rng,
}

impl QpskSource {
    pub fn new(seed: u64) -> Self {
        QpskSource {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }
}

impl SymbolSource for QpskSource {
    fn next_symbol(&mut self) -> Complex64 {
        let a = std::f64::consts::FRAC_1_SQRT_2;
        let re = if self.rng.random::<bool>() { a } else { -a };
        let im = if self.rng.random::<bool>() { a } else { -a };
        Complex64::new(re, im)
    }
}

/// Leaves every data subcarrier empty.
#[derive(Clone, Copy, Debug, Default)]
pub struct SilentSource;

impl SymbolSource for SilentSource {
    fn next_symbol(&mut self) -> Complex64 {
        Complex64::new(0.0, 0.0)
    }
}

/// OFDM baseband carrying the power pattern on the watermark subcarrier.
///
/// One OFDM symbol (`num_subcarriers` complex samples, no cyclic prefix) is
/// produced per pattern sample. The watermark bin holds `sqrt(power)` and the
/// remaining bins take symbols from `data`. The transform is unitary, so a
/// forward DFT scaled by `1/sqrt(N)` returns the frequency grid unchanged.
pub fn synthesize_ofdm_baseband<S: SymbolSource + ?Sized>(
    pattern: &TxPowerPattern,
    config: &WatermarkConfig,
    data: &mut S,
) -> Result<Vec<Complex64>> {
    config.validate()?;
    if pattern.is_empty() {
        return Err(Error::Argument("cannot synthesize an empty pattern".into()));
    }
    if let Some(bad) = pattern.samples.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
        return Err(Error::Data(format!("pattern power {bad} is not a finite non-negative value")));
    }
    let n = config.num_subcarriers;
    let ifft: Arc<dyn rustfft::Fft<f64>> = FftPlanner::new().plan_fft_inverse(n);
    let scale = 1.0 / (n as f64).sqrt();
    let mut out = Vec::with_capacity(pattern.len() * n);
    let mut grid = vec![Complex64::new(0.0, 0.0); n];
    for &power in &pattern.samples {
        for (k, slot) in grid.iter_mut().enumerate() {
            *slot = if k == config.watermark_subcarrier_index {
                Complex64::new(power.sqrt(), 0.0)
            } else {
                data.next_symbol()
            };
        }
        ifft.process(&mut grid);
        out.extend(grid.iter().map(|z| z * scale));
    }
    Ok(out)
}
