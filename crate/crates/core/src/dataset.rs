//! On-disk formats: the binary spectrogram file, its ground-truth sidecar
//! and the experiment-result CSV.
//!
//! # Spectrogram file
//!
//! All integers little-endian, 56-byte header followed by the payload:
//!
//! | offset | size | field                                   |
//! |-------:|-----:|-----------------------------------------|
//! | 0      | 8    | magic `PSYMSPEC`                        |
//! | 8      | 4    | version (`u32`, currently 1)            |
//! | 12     | 8    | rows (`u64`, time bins)                 |
//! | 20     | 8    | cols (`u64`, channels)                  |
//! | 28     | 8    | bin duration in ns (`u64`, rounded)     |
//! | 36     | 8    | channel bandwidth in Hz (`u64`)         |
//! | 44     | 8    | centre frequency in Hz (`u64`)          |
//! | 52     | 4    | value encoding (`u32`, 0 = `f32` LE)    |
//!
//! The payload is `rows * cols` little-endian `f32` linear powers, row-major
//! (one row per time bin).
//!
//! # Truth sidecar
//!
//! `<path>.truth`, UTF-8, one `key=value` per line: `bits=<0/1 string>`,
//! `offset=<RX bin>`, `snr_db=<float or inf>`.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use crate::channel::{GroundTruth, SpectrogramBlock};
use crate::watermark::PseudonymPacket;
use crate::{Error, Result};

pub const MAGIC: &[u8; 8] = b"PSYMSPEC";
pub const VERSION: u32 = 1;
pub const HEADER_LEN: usize = 56;
pub const ENCODING_F32_LE: u32 = 0;

/// Fixed-size spectrogram file header.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpectrogramFileHeader {
    pub version: u32,
    pub rows: u64,
    pub cols: u64,
    pub bin_duration_ns: u64,
    pub channel_bandwidth_hz: u64,
    pub center_frequency_hz: u64,
    pub value_encoding: u32,
}

impl SpectrogramFileHeader {
    pub fn for_block(block: &SpectrogramBlock) -> Self {
        SpectrogramFileHeader {
            version: VERSION,
            rows: block.rows() as u64,
            cols: block.cols() as u64,
            bin_duration_ns: (block.bin_duration_s * 1e9).round() as u64,
            channel_bandwidth_hz: block.channel_bandwidth_hz.round() as u64,
            center_frequency_hz: block.center_frequency_hz.round() as u64,
            value_encoding: ENCODING_F32_LE,
        }
    }

    pub fn to_bytes(&self) -> [u8; HEADER_LEN] {
        let mut b = [0u8; HEADER_LEN];
        b[0..8].copy_from_slice(MAGIC);
        b[8..12].copy_from_slice(&self.version.to_le_bytes());
        b[12..20].copy_from_slice(&self.rows.to_le_bytes());
        b[20..28].copy_from_slice(&self.cols.to_le_bytes());
        b[28..36].copy_from_slice(&self.bin_duration_ns.to_le_bytes());
        b[36..44].copy_from_slice(&self.channel_bandwidth_hz.to_le_bytes());
        b[44..52].copy_from_slice(&self.center_frequency_hz.to_le_bytes());
        b[52..56].copy_from_slice(&self.value_encoding.to_le_bytes());
        b
    }

    /// Parses and checks magic, version and encoding.
    pub fn from_bytes(b: &[u8; HEADER_LEN], path: &Path) -> Result<Self> {
        let format = |reason: String| Error::Format {
            path: path.to_path_buf(),
            reason,
        };
        if &b[0..8] != MAGIC {
            return Err(format(format!(
                "magic {:?} is not {:?}",
                String::from_utf8_lossy(&b[0..8]),
                "PSYMSPEC"
            )));
        }
        let u32_at = |o: usize| u32::from_le_bytes(b[o..o + 4].try_into().unwrap());
        let u64_at = |o: usize| u64::from_le_bytes(b[o..o + 8].try_into().unwrap());
        let header = SpectrogramFileHeader {
            version: u32_at(8),
            rows: u64_at(12),
            cols: u64_at(20),
            bin_duration_ns: u64_at(28),
            channel_bandwidth_hz: u64_at(36),
            center_frequency_hz: u64_at(44),
            value_encoding: u32_at(52),
        };
        if header.version != VERSION {
            return Err(format(format!("unsupported version {}", header.version)));
        }
        if header.value_encoding != ENCODING_F32_LE {
            return Err(format(format!("unsupported value encoding {}", header.value_encoding)));
        }
        if header.cols == 0 {
            return Err(format("zero channels".into()));
        }
        if header.bin_duration_ns == 0 {
            return Err(format("zero bin duration".into()));
        }
        Ok(header)
    }

    pub fn payload_len(&self) -> Option<u64> {
        self.rows.checked_mul(self.cols)?.checked_mul(4)
    }
}

pub fn truth_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".truth");
    PathBuf::from(s)
}

/// Writes header and payload, plus the truth sidecar when the block has
/// ground truth.
pub fn write_spectrogram(path: impl AsRef<Path>, block: &SpectrogramBlock) -> Result<()> {
    let path = path.as_ref();
    if let Some((i, v)) = block
        .as_slice()
        .iter()
        .enumerate()
        .find(|(_, v)| !(v.is_finite() && **v >= 0.0))
    {
        return Err(Error::Data(format!(
            "refusing to write power[{}, {}] = {v}",
            i / block.cols(),
            i % block.cols()
        )));
    }
    let header = SpectrogramFileHeader::for_block(block);
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    w.write_all(&header.to_bytes()).map_err(|e| Error::io(path, e))?;
    for v in block.as_slice() {
        w.write_all(&v.to_le_bytes()).map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;

    let sidecar = truth_path(path);
    match &block.ground_truth {
        Some(t) => write_truth(&sidecar, t)?,
        None => match fs::remove_file(&sidecar) {
            Ok(()) => {}
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {}
            Err(e) => return Err(Error::io(sidecar, e)),
        },
    }
    Ok(())
}

pub fn write_truth(path: &Path, truth: &GroundTruth) -> Result<()> {
    let text = format!(
        "bits={}\noffset={}\nsnr_db={}\n",
        truth.packet.to_bit_string(),
        truth.start_offset_bins,
        truth.snr_db
    );
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn read_truth(path: &Path) -> Result<GroundTruth> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let bad = |reason: String| Error::Format {
        path: path.to_path_buf(),
        reason,
    };
    let (mut bits, mut offset, mut snr) = (None, None, None);
    for line in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| bad(format!("truth line {line:?} is not key=value")))?;
        let value = value.trim();
        match key.trim() {
            "bits" => bits = Some(PseudonymPacket::from_bit_string(value).map_err(|e| bad(e.to_string()))?),
            "offset" => offset = Some(value.parse::<usize>().map_err(|e| bad(format!("offset: {e}")))?),
            "snr_db" => snr = Some(value.parse::<f64>().map_err(|e| bad(format!("snr_db: {e}")))?),
            other => log::warn!("{}: ignoring unknown truth key {other:?}", path.display()),
        }
    }
    match (bits, offset, snr) {
        (Some(packet), Some(start_offset_bins), Some(snr_db)) => Ok(GroundTruth {
            packet,
            start_offset_bins,
            snr_db,
        }),
        _ => Err(bad("truth sidecar needs bits, offset and snr_db".into())),
    }
}

/// Reads a spectrogram file and its sidecar, if one exists.
pub fn read_spectrogram(path: impl AsRef<Path>) -> Result<SpectrogramBlock> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let file_len = file.metadata().map_err(|e| Error::io(path, e))?.len();
    let mut r = BufReader::new(file);
    if file_len < HEADER_LEN as u64 {
        // Distinguish garbage from a cut-off valid header.
        let mut head = vec![0u8; file_len as usize];
        r.read_exact(&mut head).map_err(|e| Error::io(path, e))?;
        if head.len() >= 8 && &head[..8] != MAGIC {
            return Err(Error::Format {
                path: path.to_path_buf(),
                reason: "bad magic".into(),
            });
        }
        return Err(Error::Corrupt {
            path: path.to_path_buf(),
            expected: HEADER_LEN as u64,
            actual: file_len,
        });
    }
    let mut hb = [0u8; HEADER_LEN];
    r.read_exact(&mut hb).map_err(|e| Error::io(path, e))?;
    let header = SpectrogramFileHeader::from_bytes(&hb, path)?;
    let payload = header.payload_len().ok_or_else(|| Error::Format {
        path: path.to_path_buf(),
        reason: format!("{} x {} payload overflows", header.rows, header.cols),
    })?;
    let actual = file_len - HEADER_LEN as u64;
    if actual != payload {
        return Err(Error::Corrupt {
            path: path.to_path_buf(),
            expected: payload,
            actual,
        });
    }
    let mut bytes = vec![0u8; payload as usize];
    r.read_exact(&mut bytes).map_err(|e| Error::io(path, e))?;
    let power: Vec<f32> = bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    let mut block = SpectrogramBlock::new(
        power,
        header.rows as usize,
        header.cols as usize,
        header.bin_duration_ns as f64 * 1e-9,
        header.channel_bandwidth_hz as f64,
        header.center_frequency_hz as f64,
    )
    .map_err(|e| Error::Format {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })?;
    let sidecar = truth_path(path);
    if sidecar.exists() {
        block.ground_truth = Some(read_truth(&sidecar)?);
    }
    Ok(block)
}

/// One point of a Pe-vs-SNR experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentRecord {
    pub label: String,
    pub snr_db: f64,
    pub total_bits: u64,
    pub bit_errors: u64,
    pub sync_offset_error_bins: Option<i64>,
}

impl ExperimentRecord {
    /// `bit_errors / total_bits`, NaN for an empty (failed) point.
    pub fn pe(&self) -> f64 {
        if self.total_bits == 0 {
            f64::NAN
        } else {
            self.bit_errors as f64 / self.total_bits as f64
        }
    }
}

pub const CSV_HEADER: [&str; 6] = ["label", "snr_db", "total_bits", "bit_errors", "pe", "sync_offset_error_bins"];

/// Renders records as CSV text, sorted ascending by SNR.
///
/// Floats use the shortest representation that round-trips, so `-8.0`
/// prints as `-8` and `0.008` as `0.008`.
pub fn records_to_csv(records: &[ExperimentRecord]) -> Result<String> {
    if records.is_empty() {
        return Err(Error::Argument("no experiment records to export".into()));
    }
    let mut sorted: Vec<&ExperimentRecord> = records.iter().collect();
    sorted.sort_by(|a, b| a.snr_db.total_cmp(&b.snr_db));
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| Error::Data(format!("csv: {e}"));
    w.write_record(CSV_HEADER).map_err(csv_err)?;
    for r in sorted {
        w.write_record([
            r.label.clone(),
            r.snr_db.to_string(),
            r.total_bits.to_string(),
            r.bit_errors.to_string(),
            r.pe().to_string(),
            r.sync_offset_error_bins.map(|v| v.to_string()).unwrap_or_default(),
        ])
        .map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Data(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn export_records_csv(records: &[ExperimentRecord], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let text = records_to_csv(records)?;
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Parses a CSV written by [`export_records_csv`].
pub fn read_records_csv(path: impl AsRef<Path>) -> Result<Vec<ExperimentRecord>> {
    let path = path.as_ref();
    let bad = |reason: String| Error::Format {
        path: path.to_path_buf(),
        reason,
    };
    let mut rdr = csv::Reader::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => bad(format!("{other:?}")),
    })?;
    let headers = rdr.headers().map_err(|e| bad(e.to_string()))?.clone();
    if headers.iter().ne(CSV_HEADER) {
        return Err(bad(format!("unexpected header {headers:?}")));
    }
    rdr.records()
        .map(|row| {
            let row = row.map_err(|e| bad(e.to_string()))?;
            let field = |i: usize| row.get(i).unwrap_or("");
            let num = |i: usize| -> Result<u64> {
                field(i).parse().map_err(|e| bad(format!("{}: {e}", CSV_HEADER[i])))
            };
            let sync = match field(5) {
                "" => None,
                s => Some(s.parse().map_err(|e| bad(format!("sync_offset_error_bins: {e}")))?),
            };
            Ok(ExperimentRecord {
                label: field(0).to_string(),
                snr_db: field(1).parse().map_err(|e| bad(format!("snr_db: {e}")))?,
                total_bits: num(2)?,
                bit_errors: num(3)?,
                sync_offset_error_bins: sync,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{simulate_rx_spectrogram, ChannelConfig};
    use crate::watermark::{encode_packet, WatermarkConfig};
    use proptest::prelude::*;

    fn small_block() -> SpectrogramBlock {
        SpectrogramBlock::new(vec![0.5, 1.0, 2.0, 0.0, 3.25, 7.0], 2, 3, 1.0 / 90_000.0, 90_000.0, 1.41e9).unwrap()
    }

    #[test]
    fn header_size_and_layout() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.psymspec");
        write_spectrogram(&path, &small_block()).unwrap();
        let bytes = fs::read(&path).unwrap();
        assert_eq!(bytes.len(), 8 + 4 + 8 + 8 + 8 + 8 + 8 + 4 + 24);
        assert_eq!(&bytes[..8], b"PSYMSPEC");
        assert_eq!(u64::from_le_bytes(bytes[12..20].try_into().unwrap()), 2);
        assert_eq!(u64::from_le_bytes(bytes[20..28].try_into().unwrap()), 3);
        assert_eq!(u64::from_le_bytes(bytes[28..36].try_into().unwrap()), 11_111);
        assert_eq!(f32::from_le_bytes(bytes[56..60].try_into().unwrap()), 0.5);
        assert!(!truth_path(&path).exists());
    }

    #[test]
    fn round_trip_with_truth() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("b.psymspec");
        let cfg = WatermarkConfig::default();
        let packet = PseudonymPacket::from_value(0xC0FFEE0, 28).unwrap();
        let p = encode_packet(&packet, &cfg).unwrap();
        let ch = ChannelConfig {
            snr_db: -5.0,
            num_channels: 4,
            watermark_channel_index: 1,
            noise_seed: 8,
            ..Default::default()
        };
        let block = simulate_rx_spectrogram(&p, &ch, 12, Some(&packet)).unwrap();
        write_spectrogram(&path, &block).unwrap();
        let back = read_spectrogram(&path).unwrap();
        assert_eq!(back.as_slice(), block.as_slice());
        assert_eq!(back.rows(), block.rows());
        assert_eq!(back.ground_truth, block.ground_truth);
        assert_eq!(back.channel_bandwidth_hz, 90_000.0);
        assert_eq!(back.center_frequency_hz, 1.41e9);
        assert!((back.bin_duration_s - 11_111e-9).abs() < 1e-15);
        let text = fs::read_to_string(truth_path(&path)).unwrap();
        assert!(text.contains("offset=12"));
        assert!(text.contains("snr_db=-5"));
    }

    #[test]
    fn noiseless_truth_round_trips_infinity() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("inf.truth");
        let t = GroundTruth {
            packet: PseudonymPacket::from_value(3, 28).unwrap(),
            start_offset_bins: 0,
            snr_db: f64::INFINITY,
        };
        write_truth(&path, &t).unwrap();
        assert_eq!(read_truth(&path).unwrap(), t);
    }

    #[test]
    fn non_finite_values_are_not_written() {
        // Blocks refuse non-finite values at construction, so the writer
        // never receives one.
        let err = SpectrogramBlock::new(vec![f32::NAN], 1, 1, 1e-5, 1.0, 0.0).unwrap_err();
        assert!(matches!(err, Error::Data(_)));
        let err = SpectrogramBlock::new(vec![f32::INFINITY], 1, 1, 1e-5, 1.0, 0.0).unwrap_err();
        assert!(matches!(err, Error::Data(_)));
    }

    #[test]
    fn bad_magic_is_format_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.psymspec");
        write_spectrogram(&path, &small_block()).unwrap();
        let mut bytes = fs::read(&path).unwrap();
        bytes[..8].copy_from_slice(b"XXXXXXXX");
        fs::write(&path, &bytes).unwrap();
        assert!(matches!(read_spectrogram(&path), Err(Error::Format { .. })));
    }

    #[test]
    fn bad_version_is_format_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("v.psymspec");
        write_spectrogram(&path, &small_block()).unwrap();
        let mut bytes = fs::read(&path).unwrap();
        bytes[8..12].copy_from_slice(&7u32.to_le_bytes());
        fs::write(&path, &bytes).unwrap();
        assert!(matches!(read_spectrogram(&path), Err(Error::Format { .. })));
    }

    #[test]
    fn short_payload_is_corruption() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.psymspec");
        write_spectrogram(&path, &small_block()).unwrap();
        let bytes = fs::read(&path).unwrap();
        fs::write(&path, &bytes[..bytes.len() - 4]).unwrap();
        match read_spectrogram(&path) {
            Err(Error::Corrupt { expected, actual, .. }) => {
                assert_eq!(expected, 24);
                assert_eq!(actual, 20);
            }
            other => panic!("expected corruption, got {other:?}"),
        }
        let msg = read_spectrogram(&path).unwrap_err().to_string();
        assert!(msg.contains("24") && msg.contains("20"), "{msg}");
    }

    #[test]
    fn missing_file_is_io_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("nope.psymspec");
        match read_spectrogram(&path) {
            Err(Error::Io { path: p, .. }) => assert_eq!(p, path),
            other => panic!("{other:?}"),
        }
    }

    fn rec(label: &str, snr: f64, bits: u64, errors: u64, sync: Option<i64>) -> ExperimentRecord {
        ExperimentRecord {
            label: label.into(),
            snr_db: snr,
            total_bits: bits,
            bit_errors: errors,
            sync_offset_error_bins: sync,
        }
    }

    #[test]
    fn csv_formatting_matches_reference_row() {
        let text = records_to_csv(&[rec("g10", -8.0, 10_000, 80, None)]).unwrap();
        assert_eq!(text, "label,snr_db,total_bits,bit_errors,pe,sync_offset_error_bins\ng10,-8,10000,80,0.008,\n");
    }

    #[test]
    fn csv_sorted_by_snr() {
        let text = records_to_csv(&[rec("a", -6.0, 28, 0, Some(0)), rec("b", -10.0, 28, 3, Some(-1))]).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines[1].starts_with("b,-10,"));
        assert!(lines[2].starts_with("a,-6,"));
    }

    #[test]
    fn csv_rejects_empty() {
        assert!(matches!(records_to_csv(&[]), Err(Error::Argument(_))));
    }

    proptest! {
        #[test]
        fn csv_parses_back(
            raw in prop::collection::vec((-30.0f64..30.0, 1u64..1_000_000, any::<u32>(), proptest::option::of(-5000i64..5000)), 1..12)
        ) {
            let dir = tempfile::tempdir().unwrap();
            let path = dir.path().join("r.csv");
            let records: Vec<ExperimentRecord> = raw
                .iter()
                .enumerate()
                .map(|(i, &(snr, bits, e, sync))| rec(&format!("p{i},x"), snr, bits, e as u64 % (bits + 1), sync))
                .collect();
            export_records_csv(&records, &path).unwrap();
            let mut back = read_records_csv(&path).unwrap();
            let mut expect = records.clone();
            expect.sort_by(|a, b| a.snr_db.total_cmp(&b.snr_db));
            back.sort_by(|a, b| a.snr_db.total_cmp(&b.snr_db).then(a.label.cmp(&b.label)));
            expect.sort_by(|a, b| a.snr_db.total_cmp(&b.snr_db).then(a.label.cmp(&b.label)));
            prop_assert_eq!(back, expect);
        }

        #[test]
        fn spectrogram_round_trip_and_header_honesty(
            rows in 1usize..20, cols in 1usize..9, seed in any::<u32>(), cut in 1usize..64,
        ) {
            let power: Vec<f32> = (0..rows * cols)
                .map(|i| ((i as u32).wrapping_mul(2654435761) ^ seed) as f32 / 1e6)
                .collect();
            let block = SpectrogramBlock::new(power, rows, cols, 1e-5, 90e3, 1e9).unwrap();
            let dir = tempfile::tempdir().unwrap();
            let path = dir.path().join("p.psymspec");
            write_spectrogram(&path, &block).unwrap();
            let back = read_spectrogram(&path).unwrap();
            prop_assert_eq!(back.as_slice(), block.as_slice());
            prop_assert_eq!((back.rows(), back.cols()), (rows, cols));

            let bytes = fs::read(&path).unwrap();
            let cut = cut.min(bytes.len() - HEADER_LEN);
            fs::write(&path, &bytes[..bytes.len() - cut]).unwrap();
            let truncated = matches!(read_spectrogram(&path), Err(Error::Corrupt { .. }));
            prop_assert!(truncated);
            let mut longer = bytes.clone();
            longer.extend_from_slice(&[0u8; 4]);
            fs::write(&path, &longer).unwrap();
            let extended = matches!(read_spectrogram(&path), Err(Error::Corrupt { .. }));
            prop_assert!(extended);
        }
    }
}
