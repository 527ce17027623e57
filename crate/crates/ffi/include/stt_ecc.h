#ifndef STT_ECC_H
#define STT_ECC_H

/* Generated by cbindgen from crates/ffi/src. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SttStatus {
  STT_STATUS_OK = 0,
  STT_STATUS_NULL_POINTER = 1,
  STT_STATUS_INVALID_ARGUMENT = 2,
  STT_STATUS_DOMAIN = 3,
  STT_STATUS_IO = 4,
  STT_STATUS_PARSE = 5,
  STT_STATUS_FORMAT = 6,
  STT_STATUS_CONFIG = 7,
  STT_STATUS_PANIC = 8,
} SttStatus;

enum SttDecodeOutcome
#if defined(__cplusplus) || __STDC_VERSION__ >= 202311L
  : uint32_t
#endif // defined(__cplusplus) || __STDC_VERSION__ >= 202311L
 {
  STT_DECODE_OUTCOME_NO_ERROR = 0,
  STT_DECODE_OUTCOME_CORRECTED = 1,
  STT_DECODE_OUTCOME_DETECTED_UNCORRECTABLE = 2,
};
#ifndef __cplusplus
#if __STDC_VERSION__ >= 202311L
typedef enum SttDecodeOutcome SttDecodeOutcome;
#else
typedef uint32_t SttDecodeOutcome;
#endif // __STDC_VERSION__ >= 202311L
#endif // __cplusplus

enum SttScheme
#if defined(__cplusplus) || __STDC_VERSION__ >= 202311L
  : uint32_t
#endif // defined(__cplusplus) || __STDC_VERSION__ >= 202311L
 {
  STT_SCHEME_PER_WORD = 0,
  STT_SCHEME_INTERLEAVED = 1,
  STT_SCHEME_ROBIN = 2,
};
#ifndef __cplusplus
#if __STDC_VERSION__ >= 202311L
typedef enum SttScheme SttScheme;
#else
typedef uint32_t SttScheme;
#endif // __STDC_VERSION__ >= 202311L
#endif // __cplusplus

enum SttGrouping
#if defined(__cplusplus) || __STDC_VERSION__ >= 202311L
  : uint32_t
#endif // defined(__cplusplus) || __STDC_VERSION__ >= 202311L
 {
  STT_GROUPING_AS_PRINTED = 0,
  STT_GROUPING_CONVENTIONAL = 1,
};
#ifndef __cplusplus
#if __STDC_VERSION__ >= 202311L
typedef enum SttGrouping SttGrouping;
#else
typedef uint32_t SttGrouping;
#endif // __STDC_VERSION__ >= 202311L
#endif // __cplusplus

enum SttTraceFormat
#if defined(__cplusplus) || __STDC_VERSION__ >= 202311L
  : uint32_t
#endif // defined(__cplusplus) || __STDC_VERSION__ >= 202311L
 {
  STT_TRACE_FORMAT_JSONL = 0,
  STT_TRACE_FORMAT_BINARY = 1,
};
#ifndef __cplusplus
#if __STDC_VERSION__ >= 202311L
typedef enum SttTraceFormat SttTraceFormat;
#else
typedef uint32_t SttTraceFormat;
#endif // __STDC_VERSION__ >= 202311L
#endif // __cplusplus

/*
 Running error rates of all three schemes over a stream of block writes.
 */
typedef struct SttAnalyzer SttAnalyzer;

/*
 Streaming reader over a trace file.
 */
typedef struct SttTraceReader SttTraceReader;

/*
 Device parameters in SI units; `grouping` is an [`SttGrouping`].
 */
typedef struct SttDeviceParams {
  double t_write;
  double i_write;
  double i_c0;
  double polarization;
  double moment;
  double bohr_magneton;
  double delta;
  double euler_gamma;
  double electron_charge;
  uint32_t grouping;
} SttDeviceParams;

typedef struct SttEstimate {
  double value;
  double std_error;
  uint64_t trials;
} SttEstimate;

typedef struct SttRates {
  uint64_t writes;
  double rate;
  double optimal_rate;
  double integer_split_rate;
  double increase_pct;
} SttRates;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message for the last failed call on this thread; empty if none. Valid until
 the next failing call on the same thread.
 */
const char *stt_last_error(void);

/*
 Codeword index owning data bit (word, byte, pos).
 # Safety
 Pointer arguments must be null or point to memory valid for the
 described reads and writes.
 */
enum SttStatus stt_map_bit(uint32_t scheme_id,
                           uint32_t word,
                           uint32_t byte,
                           uint32_t pos,
                           uint32_t *out_codeword);

/*
 Checks that the scheme is a bijective 8x64 partition; `out_balanced` is set
 when every codeword holds one bit per byte and eight per word and position.
 # Safety
 Pointer arguments must be null or point to memory valid for the
 described reads and writes.
 */
enum SttStatus stt_verify_partition(uint32_t scheme_id, bool *out_valid, bool *out_balanced);

uint8_t stt_secded_encode(uint64_t data);

/*
 Decodes a stored codeword. On `STT_DECODE_OUTCOME_CORRECTED`,
 `out_bit` is the flipped codeword bit (0..63 data, 64..71 check) and the
 corrected codeword is written back; otherwise the input is copied through.
 # Safety
 Pointer arguments must be null or point to memory valid for the
 described reads and writes.
 */
enum SttStatus stt_secded_decode(uint64_t data,
                                 uint8_t check,
                                 SttDecodeOutcome *out_outcome,
                                 uint32_t *out_bit,
                                 uint64_t *out_data,
                                 uint8_t *out_check);

struct SttDeviceParams stt_device_params_default(void);

/*
 Per-cell write success probability of a device.
 # Safety
 Pointer arguments must be null or point to memory valid for the
 described reads and writes.
 */
enum SttStatus stt_p_write(const struct SttDeviceParams *params, double *out_pw);

/*
 Success probability of one codeword with `k` flips (`k` may be fractional).
 # Safety
 Pointer arguments must be null or point to memory valid for the
 described reads and writes.
 */
enum SttStatus stt_p_codeword_success(double k, double pw, double *out_p);

/*
 Block success probability for per-codeword flip counts `k[8]`.
 # Safety
 Pointer arguments must be null or point to memory valid for the
 described reads and writes.
 */
enum SttStatus stt_p_block_success(const uint32_t *k, bool include_ecc, double pw, double *out_p);

/*
 Block success with `total` flips spread as `total / 8` per codeword.
 # Safety
 Pointer arguments must be null or point to memory valid for the
 described reads and writes.
 */
enum SttStatus stt_p_block_success_optimal(uint32_t total, double pw, double *out_p);

/*
 Per-codeword flip counts of writing `new_block` over `old_block`.
 # Safety
 Pointer arguments must be null or point to memory valid for the
 described reads and writes.
 */
enum SttStatus stt_transition_vector(uint32_t scheme_id,
                                     const uint8_t *old_block,
                                     const uint8_t *new_block,
                                     bool include_ecc,
                                     uint32_t *out_k);

/*
 Monte Carlo estimate of the block write success probability.
 # Safety
 Pointer arguments must be null or point to memory valid for the
 described reads and writes.
 */
enum SttStatus stt_monte_carlo_block(uint32_t scheme_id,
                                     const uint8_t *old_block,
                                     const uint8_t *new_block,
                                     double pw,
                                     uint64_t trials,
                                     uint64_t seed,
                                     bool include_ecc,
                                     struct SttEstimate *out_estimate);

/*
 Creates an analyzer; free it with [`stt_analyzer_free`].
 # Safety
 Pointer arguments must be null or point to memory valid for the
 described reads and writes.
 */
enum SttStatus stt_analyzer_new(double pw, bool include_ecc, struct SttAnalyzer **out_analyzer);

/*
 Adds one block write to the analyzer.
 # Safety
 Pointer arguments must be null or point to memory valid for the
 described reads and writes.
 */
enum SttStatus stt_analyzer_push(struct SttAnalyzer *analyzer,
                                 const uint8_t *old_block,
                                 const uint8_t *new_block);

/*
 Error rates for one scheme over the writes pushed so far.
 # Safety
 Pointer arguments must be null or point to memory valid for the
 described reads and writes.
 */
enum SttStatus stt_analyzer_rates(const struct SttAnalyzer *analyzer,
                                  uint32_t scheme_id,
                                  struct SttRates *out_rates);

/*
 Releases an analyzer. Null is ignored.

 # Safety
 `analyzer` must be null or a handle from [`stt_analyzer_new`] not yet freed.
 */
void stt_analyzer_free(struct SttAnalyzer *analyzer);

/*
 Opens a trace file; `format` is an [`SttTraceFormat`]. Free the reader
 with [`stt_trace_free`].

 # Safety
 `path` must be null or a NUL-terminated string.
 */
enum SttStatus stt_trace_open(const char *path,
                              uint32_t format,
                              struct SttTraceReader **out_reader);

/*
 Reads the next record into `out_addr` and the 64-byte `out_data`.
 `out_has_record` is false at end of trace.
 # Safety
 Pointer arguments must be null or point to memory valid for the
 described reads and writes.
 */
enum SttStatus stt_trace_next(struct SttTraceReader *reader,
                              uint64_t *out_addr,
                              uint8_t *out_data,
                              bool *out_has_record);

/*
 Releases a trace reader. Null is ignored.

 # Safety
 `reader` must be null or a handle from [`stt_trace_open`] not yet freed.
 */
void stt_trace_free(struct SttTraceReader *reader);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* STT_ECC_H */
