//! C ABI for the pseudonymetry watermark library.
//!
//! Spectrogram blocks and detection reports cross the boundary as opaque
//! handles (`PsymBlock`, `PsymReport`) that the caller releases with the
//! matching `*_free` function. Every fallible call returns a [`PsymStatus`];
//! on failure [`psym_last_error_message`] describes the error. Panics are
//! caught at the boundary and reported as `PSYM_STATUS_PANIC`.
//!
//! Packets are passed as the low 28 bits of a `uint32_t`, most significant
//! bit first. All functions use the default watermark configuration (6 TX
//! symbols per chip, 28-bit packets, 1/93 750 s symbols) and receiver
//! parameters other than those given explicitly.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;

use pseudonymetry::channel::simulate_rx_spectrogram;
use pseudonymetry::detector::{decode_block_with, DecodeOptions, ResampleSpec};
use pseudonymetry::watermark::{encode_packet, encode_packets, pn_for_bit, CHIPS_PER_BIT};
use pseudonymetry::{
    dataset, ChannelConfig, DetectionReport, Error, PseudonymPacket, SpectrogramBlock, WatermarkConfig,
};

/// Result of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PsymStatus {
    Ok = 0,
    /// Sync found no significant correlation peak.
    NoSignal = 1,
    InvalidArgument = 2,
    /// Not a spectrogram file, or an unsupported version.
    Format = 3,
    /// Payload size does not match the header.
    Corrupt = 4,
    Io = 5,
    Config = 6,
    InsufficientData = 7,
    NullPointer = 8,
    Panic = 9,
    /// Non-finite or otherwise invalid sample data.
    Data = 10,
}

/// Synchronisation result of a decode.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PsymSync {
    pub start_bin: usize,
    pub peak_correlation: f64,
    pub confidence: f64,
    pub significance: f64,
}

/// Opaque spectrogram block.
pub struct PsymBlock {
    inner: SpectrogramBlock,
}

/// Opaque detection report.
pub struct PsymReport {
    inner: DetectionReport,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let message = CString::new(message.replace('\0', " ")).expect("no interior NUL");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(message));
}

fn status_of(err: &Error) -> PsymStatus {
    match err {
        Error::NoSignal { .. } => PsymStatus::NoSignal,
        Error::Argument(_) | Error::Framing { .. } => PsymStatus::InvalidArgument,
        Error::Format { .. } => PsymStatus::Format,
        Error::Corrupt { .. } => PsymStatus::Corrupt,
        Error::Io { .. } => PsymStatus::Io,
        Error::Config(_) => PsymStatus::Config,
        Error::InsufficientData { .. } => PsymStatus::InsufficientData,
        Error::Data(_) => PsymStatus::Data,
    }
}

fn fail(status: PsymStatus, message: impl Into<String>) -> PsymStatus {
    set_error(message.into());
    status
}

/// Runs `f`, recording the error message and mapping panics.
fn guard(f: impl FnOnce() -> Result<(), PsymStatus>) -> PsymStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PsymStatus::Ok,
        Ok(Err(status)) => status,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            fail(PsymStatus::Panic, format!("panic: {msg}"))
        }
    }
}

trait OrStatus<T> {
    fn or_status(self) -> Result<T, PsymStatus>;
}

impl<T> OrStatus<T> for pseudonymetry::Result<T> {
    fn or_status(self) -> Result<T, PsymStatus> {
        self.map_err(|e| fail(status_of(&e), e.to_string()))
    }
}

fn packet_from(value: u32) -> Result<PseudonymPacket, PsymStatus> {
    PseudonymPacket::from_value(u64::from(value), 28).or_status()
}

unsafe fn path_from(path: *const c_char) -> Result<PathBuf, PsymStatus> {
    if path.is_null() {
        return Err(fail(PsymStatus::NullPointer, "path is NULL"));
    }
    // SAFETY: caller guarantees a NUL-terminated string.
    let s = unsafe { CStr::from_ptr(path) }
        .to_str()
        .map_err(|_| fail(PsymStatus::InvalidArgument, "path is not valid UTF-8"))?;
    Ok(PathBuf::from(s))
}

fn null(what: &str) -> PsymStatus {
    fail(PsymStatus::NullPointer, format!("{what} is NULL"))
}

/// Message for the most recent failure on this thread, or NULL.
///
/// The pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn psym_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn psym_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Writes the 15 chips (0 or 1) of the PN sequence for `bit`.
///
/// # Safety
/// `out` must point to 15 writable bytes.
#[no_mangle]
pub unsafe extern "C" fn psym_pn_sequence(bit: bool, out: *mut u8) -> PsymStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let chips = pn_for_bit(bit);
        // SAFETY: caller guarantees 15 writable bytes.
        unsafe { std::ptr::copy_nonoverlapping(chips.chips().as_ptr(), out, CHIPS_PER_BIT) };
        Ok(())
    })
}

/// Transmit power pattern of one packet (2520 samples of 1.0 or 0.0).
///
/// `*out_len` receives the pattern length. When `capacity` is too small
/// nothing is copied and `PSYM_STATUS_INVALID_ARGUMENT` is returned, so a
/// call with `capacity = 0` queries the size.
///
/// # Safety
/// `out` must point to `capacity` writable doubles (may be NULL when
/// `capacity` is 0); `out_len` must be writable.
#[no_mangle]
pub unsafe extern "C" fn psym_encode_packet(
    packet: u32,
    out: *mut f64,
    capacity: usize,
    out_len: *mut usize,
) -> PsymStatus {
    guard(|| {
        if out_len.is_null() {
            return Err(null("out_len"));
        }
        let pattern = encode_packet(&packet_from(packet)?, &WatermarkConfig::default()).or_status()?;
        // SAFETY: checked non-null above.
        unsafe { *out_len = pattern.len() };
        if capacity < pattern.len() {
            return Err(fail(
                PsymStatus::InvalidArgument,
                format!("capacity {capacity} is below {}", pattern.len()),
            ));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        // SAFETY: caller guarantees `capacity` writable doubles.
        unsafe { std::ptr::copy_nonoverlapping(pattern.samples.as_ptr(), out, pattern.len()) };
        Ok(())
    })
}

/// Simulates a receiver block holding `packets` back-to-back copies of
/// `packet` from RX bin `start_offset_bins` in channel `watermark_channel`.
/// `snr_db` may be `INFINITY` for a noiseless block. The block carries
/// ground truth.
///
/// # Safety
/// `out` must be writable; on success it receives a handle to free with
/// [`psym_block_free`].
#[no_mangle]
pub unsafe extern "C" fn psym_block_simulate(
    packet: u32,
    packets: usize,
    snr_db: f64,
    noise_seed: u64,
    num_channels: usize,
    watermark_channel: usize,
    start_offset_bins: usize,
    out: *mut *mut PsymBlock,
) -> PsymStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        if packets == 0 {
            return Err(fail(PsymStatus::InvalidArgument, "packets must be positive"));
        }
        let packet = packet_from(packet)?;
        let pattern = encode_packets(&packet, packets, &WatermarkConfig::default()).or_status()?;
        let channel = ChannelConfig {
            snr_db,
            noise_seed,
            num_channels,
            watermark_channel_index: watermark_channel,
            ..Default::default()
        };
        let block = simulate_rx_spectrogram(&pattern, &channel, start_offset_bins, Some(&packet)).or_status()?;
        // SAFETY: checked non-null above.
        unsafe { *out = Box::into_raw(Box::new(PsymBlock { inner: block })) };
        Ok(())
    })
}

/// Reads a `.psymspec` file (and its `.truth` sidecar, if present).
///
/// # Safety
/// `path` must be a NUL-terminated UTF-8 string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn psym_block_read(path: *const c_char, out: *mut *mut PsymBlock) -> PsymStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        // SAFETY: forwarded caller guarantee.
        let path = unsafe { path_from(path) }?;
        let block = dataset::read_spectrogram(path).or_status()?;
        // SAFETY: checked non-null above.
        unsafe { *out = Box::into_raw(Box::new(PsymBlock { inner: block })) };
        Ok(())
    })
}

/// Writes a block (and its truth sidecar, if it has ground truth).
///
/// # Safety
/// `block` must be a live handle and `path` a NUL-terminated UTF-8 string.
#[no_mangle]
pub unsafe extern "C" fn psym_block_write(block: *const PsymBlock, path: *const c_char) -> PsymStatus {
    guard(|| {
        // SAFETY: caller guarantees a live handle or NULL.
        let block = unsafe { block.as_ref() }.ok_or_else(|| null("block"))?;
        // SAFETY: forwarded caller guarantee.
        let path = unsafe { path_from(path) }?;
        dataset::write_spectrogram(path, &block.inner).or_status()
    })
}

/// Number of time bins; 0 for NULL.
///
/// # Safety
/// `block` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn psym_block_rows(block: *const PsymBlock) -> usize {
    // SAFETY: caller guarantees a live handle or NULL.
    unsafe { block.as_ref() }.map_or(0, |b| b.inner.rows())
}

/// Number of channels; 0 for NULL.
///
/// # Safety
/// `block` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn psym_block_cols(block: *const PsymBlock) -> usize {
    // SAFETY: caller guarantees a live handle or NULL.
    unsafe { block.as_ref() }.map_or(0, |b| b.inner.cols())
}

/// Copies one channel column (`rows` values) into `out`.
///
/// # Safety
/// `block` must be a live handle and `out` point to `capacity` writable
/// floats.
#[no_mangle]
pub unsafe extern "C" fn psym_block_copy_channel(
    block: *const PsymBlock,
    channel: usize,
    out: *mut f32,
    capacity: usize,
) -> PsymStatus {
    guard(|| {
        // SAFETY: caller guarantees a live handle or NULL.
        let block = unsafe { block.as_ref() }.ok_or_else(|| null("block"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let b = &block.inner;
        if channel >= b.cols() {
            return Err(fail(
                PsymStatus::InvalidArgument,
                format!("channel {channel} out of range for {} channels", b.cols()),
            ));
        }
        if capacity < b.rows() {
            return Err(fail(
                PsymStatus::InvalidArgument,
                format!("capacity {capacity} is below {} rows", b.rows()),
            ));
        }
        // SAFETY: caller guarantees `capacity >= rows` writable floats.
        let dst = unsafe { std::slice::from_raw_parts_mut(out, b.rows()) };
        for (r, d) in dst.iter_mut().enumerate() {
            *d = b.get(r, channel);
        }
        Ok(())
    })
}

/// Releases a block. NULL is ignored.
///
/// # Safety
/// `block` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn psym_block_free(block: *mut PsymBlock) {
    if !block.is_null() {
        // SAFETY: caller passes ownership of a handle created by Box::into_raw.
        drop(unsafe { Box::from_raw(block) });
    }
}

/// Decodes `channel` of a block against the known `packet`.
///
/// With `reject_no_signal`, a block without a significant sync peak returns
/// `PSYM_STATUS_NO_SIGNAL` and no report.
///
/// # Safety
/// `block` must be a live handle and `out` writable; on success `*out`
/// receives a report to free with [`psym_report_free`].
#[no_mangle]
pub unsafe extern "C" fn psym_decode(
    block: *const PsymBlock,
    channel: usize,
    packet: u32,
    reject_no_signal: bool,
    out: *mut *mut PsymReport,
) -> PsymStatus {
    guard(|| {
        // SAFETY: caller guarantees a live handle or NULL.
        let block = unsafe { block.as_ref() }.ok_or_else(|| null("block"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let cfg = WatermarkConfig::default();
        let spec = ResampleSpec::for_durations(&cfg, block.inner.bin_duration_s, 10).or_status()?;
        let options = DecodeOptions {
            reject_no_signal,
            ..Default::default()
        };
        let report = decode_block_with(&block.inner, channel, &packet_from(packet)?, &cfg, &spec, &options).or_status()?;
        // SAFETY: checked non-null above.
        unsafe { *out = Box::into_raw(Box::new(PsymReport { inner: report })) };
        Ok(())
    })
}

/// Decoded bit count; 0 for NULL.
///
/// # Safety
/// `report` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn psym_report_total_bits(report: *const PsymReport) -> usize {
    // SAFETY: caller guarantees a live handle or NULL.
    unsafe { report.as_ref() }.map_or(0, |r| r.inner.total_bits)
}

/// Bit errors against the block's ground truth, or -1 when unknown.
///
/// # Safety
/// `report` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn psym_report_bit_errors(report: *const PsymReport) -> i64 {
    // SAFETY: caller guarantees a live handle or NULL.
    unsafe { report.as_ref() }
        .and_then(|r| r.inner.bit_errors)
        .map_or(-1, |e| e as i64)
}

/// Bit error probability, or NaN when unknown.
///
/// # Safety
/// `report` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn psym_report_pe(report: *const PsymReport) -> f64 {
    // SAFETY: caller guarantees a live handle or NULL.
    unsafe { report.as_ref() }
        .and_then(|r| r.inner.pe())
        .unwrap_or(f64::NAN)
}

/// Copies the sync estimate.
///
/// # Safety
/// `report` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn psym_report_sync(report: *const PsymReport, out: *mut PsymSync) -> PsymStatus {
    guard(|| {
        // SAFETY: caller guarantees a live handle or NULL.
        let report = unsafe { report.as_ref() }.ok_or_else(|| null("report"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let s = report.inner.sync;
        // SAFETY: checked non-null above.
        unsafe {
            *out = PsymSync {
                start_bin: s.start_bin,
                peak_correlation: s.peak_correlation,
                confidence: s.confidence,
                significance: s.significance,
            }
        };
        Ok(())
    })
}

/// Copies decoded bits (one byte each, 0 or 1) into `out`.
///
/// # Safety
/// `report` must be a live handle and `out` point to `capacity` writable
/// bytes.
#[no_mangle]
pub unsafe extern "C" fn psym_report_copy_bits(report: *const PsymReport, out: *mut u8, capacity: usize) -> PsymStatus {
    guard(|| {
        // SAFETY: caller guarantees a live handle or NULL.
        let report = unsafe { report.as_ref() }.ok_or_else(|| null("report"))?;
        let bits = &report.inner.decoded_bits;
        if capacity < bits.len() {
            return Err(fail(
                PsymStatus::InvalidArgument,
                format!("capacity {capacity} is below {} bits", bits.len()),
            ));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        // SAFETY: caller guarantees `capacity >= len` writable bytes.
        let dst = unsafe { std::slice::from_raw_parts_mut(out, bits.len()) };
        for (d, &b) in dst.iter_mut().zip(bits) {
            *d = b as u8;
        }
        Ok(())
    })
}

/// Releases a report. NULL is ignored.
///
/// # Safety
/// `report` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn psym_report_free(report: *mut PsymReport) {
    if !report.is_null() {
        // SAFETY: caller passes ownership of a handle created by Box::into_raw.
        drop(unsafe { Box::from_raw(report) });
    }
}
