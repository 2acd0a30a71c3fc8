//! Pseudonym watermarking for passive receivers.
//!
//! A transmitter hides a short identifier (a *pseudonym*) in the power
//! envelope of one reserved OFDM subcarrier. Each pseudonym bit is spread
//! over a 15-chip PN sequence and every chip is held for a few OFDM symbols
//! at either a high or a low power level. A passive receiver such as a radio
//! telescope never sees IQ samples, only a power spectrogram whose time
//! resolution differs from the transmitter's symbol period. The detector in
//! this crate recovers the bits from that spectrogram alone.
//!
//! The crate is organised along the signal path:
//!
//! * [`watermark`] builds PN chip sequences, power patterns and optional OFDM
//!   baseband.
//! * [`channel`] projects a power pattern onto the receiver's time grid and
//!   adds square-law detected noise.
//! * [`detector`] synchronises, resamples, averages chips and decides bits.
//! * [`dataset`] reads and writes spectrogram files, truth sidecars and
//!   result CSVs.
//! * [`experiment`] drives simulations and Pe-vs-SNR sweeps for the `psym`
//!   binary.

pub mod channel;
pub mod dataset;
pub mod detector;
mod error;
pub mod experiment;
pub mod timebase;
pub mod watermark;

pub use channel::{ChannelConfig, GroundTruth, PowerSeries, SpectrogramBlock};
pub use detector::{DecodeOptions, DetectionReport, ResampleSpec, SyncEstimate};
pub use error::{Error, Result};
pub use watermark::{PnSequence, PseudonymPacket, TxPowerPattern, WatermarkConfig};
