#ifndef PSEUDONYMETRY_H
#define PSEUDONYMETRY_H

/* Generated by cbindgen from crates/ffi/src. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result of every fallible call.
typedef enum PsymStatus {
  PSYM_STATUS_OK = 0,
  // Sync found no significant correlation peak.
  PSYM_STATUS_NO_SIGNAL = 1,
  PSYM_STATUS_INVALID_ARGUMENT = 2,
  // Not a spectrogram file, or an unsupported version.
  PSYM_STATUS_FORMAT = 3,
  // Payload size does not match the header.
  PSYM_STATUS_CORRUPT = 4,
  PSYM_STATUS_IO = 5,
  PSYM_STATUS_CONFIG = 6,
  PSYM_STATUS_INSUFFICIENT_DATA = 7,
  PSYM_STATUS_NULL_POINTER = 8,
  PSYM_STATUS_PANIC = 9,
  // Non-finite or otherwise invalid sample data.
  PSYM_STATUS_DATA = 10,
} PsymStatus;

// Opaque spectrogram block.
typedef struct PsymBlock PsymBlock;

// Opaque detection report.
typedef struct PsymReport PsymReport;

// Synchronisation result of a decode.
typedef struct PsymSync {
  size_t start_bin;
  double peak_correlation;
  double confidence;
  double significance;
} PsymSync;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the most recent failure on this thread, or NULL.
//
// The pointer stays valid until the next failing call on the same thread.
const char *psym_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *psym_version(void);

// Writes the 15 chips (0 or 1) of the PN sequence for `bit`.
//
// # Safety
// `out` must point to 15 writable bytes.
enum PsymStatus psym_pn_sequence(bool bit, uint8_t *out);

// Transmit power pattern of one packet (2520 samples of 1.0 or 0.0).
//
// `*out_len` receives the pattern length. When `capacity` is too small
// nothing is copied and `PSYM_STATUS_INVALID_ARGUMENT` is returned, so a
// call with `capacity = 0` queries the size.
//
// # Safety
// `out` must point to `capacity` writable doubles (may be NULL when
// `capacity` is 0); `out_len` must be writable.
enum PsymStatus psym_encode_packet(uint32_t packet, double *out, size_t capacity, size_t *out_len);

// Simulates a receiver block holding `packets` back-to-back copies of
// `packet` from RX bin `start_offset_bins` in channel `watermark_channel`.
// `snr_db` may be `INFINITY` for a noiseless block. The block carries
// ground truth.
//
// # Safety
// `out` must be writable; on success it receives a handle to free with
// [`psym_block_free`].
enum PsymStatus psym_block_simulate(uint32_t packet,
                                    size_t packets,
                                    double snr_db,
                                    uint64_t noise_seed,
                                    size_t num_channels,
                                    size_t watermark_channel,
                                    size_t start_offset_bins,
                                    struct PsymBlock **out);

// Reads a `.psymspec` file (and its `.truth` sidecar, if present).
//
// # Safety
// `path` must be a NUL-terminated UTF-8 string and `out` writable.
enum PsymStatus psym_block_read(const char *path, struct PsymBlock **out);

// Writes a block (and its truth sidecar, if it has ground truth).
//
// # Safety
// `block` must be a live handle and `path` a NUL-terminated UTF-8 string.
enum PsymStatus psym_block_write(const struct PsymBlock *block, const char *path);

// Number of time bins; 0 for NULL.
//
// # Safety
// `block` must be a live handle or NULL.
size_t psym_block_rows(const struct PsymBlock *block);

// Number of channels; 0 for NULL.
//
// # Safety
// `block` must be a live handle or NULL.
size_t psym_block_cols(const struct PsymBlock *block);

// Copies one channel column (`rows` values) into `out`.
//
// # Safety
// `block` must be a live handle and `out` point to `capacity` writable
// floats.
enum PsymStatus psym_block_copy_channel(const struct PsymBlock *block,
                                        size_t channel,
                                        float *out,
                                        size_t capacity);

// Releases a block. NULL is ignored.
//
// # Safety
// `block` must come from this library and not be used afterwards.
void psym_block_free(struct PsymBlock *block);

// Decodes `channel` of a block against the known `packet`.
//
// With `reject_no_signal`, a block without a significant sync peak returns
// `PSYM_STATUS_NO_SIGNAL` and no report.
//
// # Safety
// `block` must be a live handle and `out` writable; on success `*out`
// receives a report to free with [`psym_report_free`].
enum PsymStatus psym_decode(const struct PsymBlock *block,
                            size_t channel,
                            uint32_t packet,
                            bool reject_no_signal,
                            struct PsymReport **out);

// Decoded bit count; 0 for NULL.
//
// # Safety
// `report` must be a live handle or NULL.
size_t psym_report_total_bits(const struct PsymReport *report);

// Bit errors against the block's ground truth, or -1 when unknown.
//
// # Safety
// `report` must be a live handle or NULL.
int64_t psym_report_bit_errors(const struct PsymReport *report);

// Bit error probability, or NaN when unknown.
//
// # Safety
// `report` must be a live handle or NULL.
double psym_report_pe(const struct PsymReport *report);

// Copies the sync estimate.
//
// # Safety
// `report` must be a live handle and `out` writable.
enum PsymStatus psym_report_sync(const struct PsymReport *report, struct PsymSync *out);

// Copies decoded bits (one byte each, 0 or 1) into `out`.
//
// # Safety
// `report` must be a live handle and `out` point to `capacity` writable
// bytes.
enum PsymStatus psym_report_copy_bits(const struct PsymReport *report,
                                      uint8_t *out,
                                      size_t capacity);

// Releases a report. NULL is ignored.
//
// # Safety
// `report` must come from this library and not be used afterwards.
void psym_report_free(struct PsymReport *report);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PSEUDONYMETRY_H */
