#ifndef PCM_EM_H
#define PCM_EM_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum PcmStatus {
  PCM_STATUS_OK = 0,
  PCM_STATUS_NULL_POINTER = 1,
  PCM_STATUS_INVALID_ARGUMENT = 2,
  PCM_STATUS_DIMENSION_MISMATCH = 3,
  PCM_STATUS_CAPACITY_EXCEEDED = 4,
  PCM_STATUS_EMPTY_MEMORY = 5,
  PCM_STATUS_BUFFER_TOO_SMALL = 6,
  PCM_STATUS_INVALID_CONFIG = 7,
  PCM_STATUS_INTERNAL = 99,
} PcmStatus;

/**
 * Conductance increment per SET pulse.
 */
typedef enum PcmIncrementShape {
  PCM_INCREMENT_SHAPE_LINEAR = 0,
  PCM_INCREMENT_SHAPE_SATURATING = 1,
} PcmIncrementShape;

typedef enum PcmProgrammingMode {
  PCM_PROGRAMMING_MODE_SERIAL = 0,
  PCM_PROGRAMMING_MODE_COLUMN_PARALLEL = 1,
} PcmProgrammingMode;

/**
 * Simulated crossbar explicit memory.
 */
typedef struct PcmMemory PcmMemory;

/**
 * Exact integer reference memory.
 */
typedef struct PcmOracle PcmOracle;

typedef struct PcmDeviceParams {
  double g_reset;
  double g_sat;
  uint32_t n_span;
  /**
   * A `PcmIncrementShape` value.
   */
  uint32_t increment_shape;
  double sat_rate;
  double sigma_prog;
  double sigma_read;
} PcmDeviceParams;

/**
 * Explicit-memory configuration. `adc_full_scale <= 0` selects
 * `rows * g_sat * 127`.
 */
typedef struct PcmMemoryConfig {
  size_t rows;
  size_t cols;
  struct PcmDeviceParams device;
  uint32_t adc_bits;
  double adc_full_scale;
  /**
   * Nonzero: one fixed read-noise offset per device instead of fresh
   * noise on every search.
   */
  uint8_t frozen_read_noise;
  uint64_t seed;
} PcmMemoryConfig;

/**
 * Pulse and search parameters of the cost model, in SI units.
 */
typedef struct PcmEnergyParams {
  double v_source;
  double i_peak;
  double t_flat;
  double t_trail;
  double t_query;
  double e_query;
  /**
   * A `PcmProgrammingMode` value.
   */
  uint32_t programming_mode;
  double e_pulse_from_scratch_ratio;
  double e_search_per_class_vector;
} PcmEnergyParams;

typedef struct PcmCost {
  double seconds;
  double joules;
} PcmCost;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Static description of a status code. Never null.
 */
const char *pcm_status_str(int32_t status);

/**
 * Message of the last failed call on this thread, or "" after a success.
 * Valid until the next call on the same thread.
 */
const char *pcm_last_error(void);

/**
 * Library version as a static string.
 */
const char *pcm_version(void);

/**
 * Writes the default configuration: 256x256 array, noiseless linear
 * devices, worst-case 8-bit ADC, seed 0.
 *
 * # Safety
 * `config` must be null or valid for writes.
 */
enum PcmStatus pcm_memory_config_default(struct PcmMemoryConfig *config);

/**
 * Creates a fully reset memory.
 *
 * # Safety
 * `config` must be null or point to a valid config; `out_memory` must be
 * null or valid for writes.
 */
enum PcmStatus pcm_memory_new(const struct PcmMemoryConfig *config, struct PcmMemory **out_memory);

/**
 * Releases a memory. Null is ignored.
 *
 * # Safety
 * `memory` must be null or a handle from `pcm_memory_new` not yet freed.
 */
void pcm_memory_free(struct PcmMemory *memory);

/**
 * Superposes one support vector (elements +1/-1) onto the column of
 * `class_id`, allocating the next free column for a new class.
 * `out_saturated`, when not null, is set to 1 if a device of that column
 * reached saturation.
 *
 * # Safety
 * `memory` must be a live handle, `support` valid for `len` reads and
 * `out_saturated` null or valid for writes.
 */
enum PcmStatus pcm_memory_learn(struct PcmMemory *memory,
                                uint32_t class_id,
                                const int8_t *support,
                                size_t len,
                                uint8_t *out_saturated);

/**
 * Classifies a signed 8-bit query (elements in [-127, 127]); ties go to
 * the smallest class id.
 *
 * # Safety
 * `memory` must be a live handle, `query` valid for `len` reads and
 * `out_class` valid for writes.
 */
enum PcmStatus pcm_memory_classify(struct PcmMemory *memory,
                                   const int8_t *query_data,
                                   size_t len,
                                   uint32_t *out_class);

/**
 * ADC codes of every stored class for one query, in ascending class-id
 * order. `*out_len` always receives the number of classes; when it
 * exceeds `capacity` nothing else is written and `BufferTooSmall` is
 * returned.
 *
 * # Safety
 * `memory` must be a live handle, `query` valid for `len` reads,
 * `out_classes` and `out_scores` valid for `capacity` writes and
 * `out_len` valid for writes.
 */
enum PcmStatus pcm_memory_scores(struct PcmMemory *memory,
                                 const int8_t *query_data,
                                 size_t len,
                                 uint32_t *out_classes,
                                 int32_t *out_scores,
                                 size_t capacity,
                                 size_t *out_len);

/**
 * # Safety
 * `memory` must be a live handle and `out_n` valid for writes.
 */
enum PcmStatus pcm_memory_num_classes(const struct PcmMemory *memory, size_t *out_n);

/**
 * Column assigned to `class_id`.
 *
 * # Safety
 * `memory` must be a live handle and `out_column` valid for writes.
 */
enum PcmStatus pcm_memory_column_of(const struct PcmMemory *memory,
                                    uint32_t class_id,
                                    size_t *out_column);

/**
 * Copies the conductance pair and pulse counts of one unit cell.
 *
 * # Safety
 * `memory` must be a live handle; every output pointer must be null or
 * valid for writes.
 */
enum PcmStatus pcm_memory_cell(const struct PcmMemory *memory,
                               size_t row,
                               size_t col,
                               double *out_g_plus,
                               double *out_g_minus,
                               uint32_t *out_n_plus,
                               uint32_t *out_n_minus);

/**
 * Creates an empty oracle for vectors of length `dim`.
 *
 * # Safety
 * `out_oracle` must be valid for writes.
 */
enum PcmStatus pcm_oracle_new(size_t dim, struct PcmOracle **out_oracle);

/**
 * Releases an oracle. Null is ignored.
 *
 * # Safety
 * `oracle` must be null or a handle from `pcm_oracle_new` not yet freed.
 */
void pcm_oracle_free(struct PcmOracle *oracle);

/**
 * # Safety
 * `oracle` must be a live handle and `support` valid for `len` reads.
 */
enum PcmStatus pcm_oracle_learn(struct PcmOracle *oracle,
                                uint32_t class_id,
                                const int8_t *support,
                                size_t len);

/**
 * # Safety
 * `oracle` must be a live handle, `query` valid for `len` reads and
 * `out_class` valid for writes.
 */
enum PcmStatus pcm_oracle_classify(const struct PcmOracle *oracle,
                                   const int8_t *query_data,
                                   size_t len,
                                   uint32_t *out_class);

/**
 * Exact integer scores, in ascending class-id order. Buffer protocol as
 * for `pcm_memory_scores`.
 *
 * # Safety
 * As for `pcm_memory_scores`.
 */
enum PcmStatus pcm_oracle_scores(const struct PcmOracle *oracle,
                                 const int8_t *query_data,
                                 size_t len,
                                 uint32_t *out_classes,
                                 int64_t *out_scores,
                                 size_t capacity,
                                 size_t *out_len);

/**
 * # Safety
 * `params` must be null or valid for writes.
 */
enum PcmStatus pcm_energy_params_default(struct PcmEnergyParams *params);

/**
 * Energy of one SET pulse in joules.
 *
 * # Safety
 * `params` must point to valid parameters and `out_joules` be valid for
 * writes.
 */
enum PcmStatus pcm_energy_pulse(const struct PcmEnergyParams *params, double *out_joules);

/**
 * Cost of writing one `d`-element support vector into a column.
 *
 * # Safety
 * `params` must point to valid parameters and `out_cost` be valid for
 * writes.
 */
enum PcmStatus pcm_energy_class_update(const struct PcmEnergyParams *params,
                                       size_t d,
                                       struct PcmCost *out_cost);

/**
 * Cost of `n_updates` class updates spread over `n_parallel_columns`
 * columns.
 *
 * # Safety
 * As for `pcm_energy_class_update`.
 */
enum PcmStatus pcm_energy_sessions_update(const struct PcmEnergyParams *params,
                                          size_t n_updates,
                                          size_t n_parallel_columns,
                                          size_t d,
                                          struct PcmCost *out_cost);

/**
 * Cost of `n_queries` similarity searches.
 *
 * # Safety
 * As for `pcm_energy_class_update`.
 */
enum PcmStatus pcm_energy_evaluation(const struct PcmEnergyParams *params,
                                     size_t n_queries,
                                     struct PcmCost *out_cost);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PCM_EM_H */
