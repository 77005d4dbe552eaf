#ifndef MIMO_ISING_H
#define MIMO_ISING_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Status codes.
 */
typedef enum MiStatus {
  MI_STATUS_OK = 0,
  MI_STATUS_NULL_POINTER = 1,
  MI_STATUS_INVALID_ARGUMENT = 2,
  MI_STATUS_SINGULAR_CHANNEL = 3,
  MI_STATUS_BUDGET_EXCEEDED = 4,
  MI_STATUS_UNSUPPORTED = 5,
  MI_STATUS_PANIC = 6,
} MiStatus;

/*
 Detection algorithms.
 */
typedef enum MiDetector {
  MI_DETECTOR_ZF = 0,
  MI_DETECTOR_MMSE = 1,
  MI_DETECTOR_ML = 2,
  MI_DETECTOR_BPIM = 3,
  MI_DETECTOR_DPIM = 4,
  MI_DETECTOR_OIM = 5,
} MiDetector;

/*
 Opaque detection problem.
 */
typedef struct MiInstance MiInstance;

/*
 Output of [`mi_detect`] besides the bits.
 */
typedef struct MiDetectStats {
  /*
   `||y - H x||^2` of the returned symbols.
   */
  double residual_energy;
  /*
   Bit errors against the transmitted message, or -1 if unknown.
   */
  int64_t bit_errors;
} MiDetectStats;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message of the last failed call on this thread, or NULL. The pointer stays
 valid until the next failing call on the same thread.
 */
const char *mi_last_error_message(void);

/*
 Library version as a static NUL-terminated string.
 */
const char *mi_version(void);

/*
 Bits per symbol of an `order`-ary constellation, or 0 if `order` is invalid.
 */
size_t mi_bits_per_symbol(size_t order);

/*
 Zero-error upper bound `-ln(1 - confidence) / n_bits`; infinite for 0 bits,
 NaN for a confidence outside (0, 1).
 */
double mi_ber_upper_bound(uint64_t n_bits, double confidence);

/*
 Draws a random `n_rx x n_tx` instance at `ebn0_db`. The same
 `(seed, channel_index, message_index)` gives the same channel, message and
 unit noise at every Eb/N0.

 # Safety
 `out` must be NULL or valid for a pointer write.
 */
enum MiStatus mi_instance_generate(size_t n_rx,
                                   size_t n_tx,
                                   size_t order,
                                   double ebn0_db,
                                   uint64_t seed,
                                   uint64_t channel_index,
                                   uint64_t message_index,
                                   struct MiInstance **out);

/*
 Wraps caller data: `h` holds `n_rx * n_tx` complex entries row-major as
 interleaved (re, im) pairs, `y` holds `n_rx` interleaved pairs.
 `sigma_sq` is only used by MMSE.

 # Safety
 `h` must be valid for `2 * n_rx * n_tx` reads, `y` for `2 * n_rx` reads and
 `out` for a pointer write.
 */
enum MiStatus mi_instance_from_data(size_t n_rx,
                                    size_t n_tx,
                                    size_t order,
                                    const double *h,
                                    const double *y,
                                    double sigma_sq,
                                    struct MiInstance **out);

/*
 Releases an instance. NULL is ignored.

 # Safety
 `inst` must be NULL or a handle from this library not yet freed.
 */
void mi_instance_free(struct MiInstance *inst);

/*
 Number of message bits, `n_tx * log2(order)`, or 0 for NULL.

 # Safety
 `inst` must be NULL or a live handle.
 */
size_t mi_instance_bit_count(const struct MiInstance *inst);

/*
 Noise variance per complex receive antenna.

 # Safety
 `inst` must be NULL or a live handle.
 */
double mi_instance_sigma_sq(const struct MiInstance *inst);

/*
 Copies the transmitted bits (one 0/1 byte per bit) into `bits`, which must
 hold exactly [`mi_instance_bit_count`] bytes.

 # Safety
 `inst` must be a live handle and `bits` valid for `len` writes.
 */
enum MiStatus mi_instance_tx_bits(const struct MiInstance *inst, uint8_t *bits, size_t len);

/*
 Runs `detector` and writes the detected bits (one 0/1 byte per bit) into
 `bits`, which must hold exactly [`mi_instance_bit_count`] bytes.
 `replicas` and `iterations` of 0 select the defaults; `seed` drives the
 stochastic detectors. `stats` may be NULL.

 # Safety
 `inst` must be a live handle, `bits` valid for `len` writes and `stats`
 NULL or valid for a write.
 */
enum MiStatus mi_detect(const struct MiInstance *inst,
                        enum MiDetector detector,
                        size_t replicas,
                        size_t iterations,
                        uint64_t seed,
                        uint8_t *bits,
                        size_t len,
                        struct MiDetectStats *stats);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MIMO_ISING_H */
