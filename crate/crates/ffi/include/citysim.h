#ifndef CITYSIM_H
#define CITYSIM_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum CsStatus {
  CsStatus_Ok = 0,
  CsStatus_NullPointer = 1,
  CsStatus_InvalidArgument = 2,
  CsStatus_DimensionMismatch = 3,
  CsStatus_Config = 4,
  CsStatus_Parse = 5,
  CsStatus_Io = 6,
  CsStatus_Internal = 7,
  CsStatus_Panic = 8,
  CsStatus_BufferTooSmall = 9,
} CsStatus;

typedef enum CsRunState {
  CsRunState_Running = 0,
  CsRunState_Completed = 1,
  CsRunState_Extinct = 2,
  CsRunState_NoFertilePairs = 3,
} CsRunState;

/**
 * Opaque simulation handle.
 */
typedef struct CsSimulation CsSimulation;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the last error message of this thread into `buf` (NUL-terminated).
 * `needed` receives the required size including the terminator.
 *
 * # Safety
 * `buf` must point to `len` writable bytes or be null with `len == 0`.
 */
enum CsStatus cs_last_error(char *buf, uintptr_t len, uintptr_t *needed);

/**
 * Happiness `x^T I theta` against the built-in interaction matrix. Values
 * outside [0, 1] are rejected.
 *
 * # Safety
 * `x` and `theta` must point to `x_len` and `theta_len` doubles; `out` must
 * be writable.
 */
enum CsStatus cs_happiness(const double *x,
                           uintptr_t x_len,
                           const double *theta,
                           uintptr_t theta_len,
                           double *out);

/**
 * Maximum-weight assignment of a row-major `rows x cols` matrix. Writes
 * `min(rows, cols)` pairs as (row, col) into `pairs` (two entries each) and
 * their total weight into `total`.
 *
 * # Safety
 * `weights` must hold `rows * cols` doubles, `pairs` room for
 * `2 * min(rows, cols)` values and `total` must be writable.
 */
enum CsStatus cs_solve_assignment(const double *weights,
                                  uintptr_t rows,
                                  uintptr_t cols,
                                  uintptr_t *pairs,
                                  double *total);

/**
 * Creates a simulation from scenario TOML text.
 *
 * # Safety
 * `scenario_toml` must be a NUL-terminated string and `out` writable.
 */
enum CsStatus cs_simulation_from_toml(const char *scenario_toml, struct CsSimulation **out);

/**
 * Creates a simulation from a built-in preset with the given seed.
 *
 * # Safety
 * `name` must be a NUL-terminated string and `out` writable.
 */
enum CsStatus cs_simulation_from_preset(const char *name, uint64_t seed, struct CsSimulation **out);

/**
 * Advances up to `rounds` rounds; stops early when the run ends.
 *
 * # Safety
 * `sim` must be a live handle.
 */
enum CsStatus cs_simulation_step(struct CsSimulation *sim, uint64_t rounds);

/**
 * Runs to the end of the configured horizon or until extinction.
 *
 * # Safety
 * `sim` must be a live handle.
 */
enum CsStatus cs_simulation_run(struct CsSimulation *sim);

/**
 * Current time, population size, mean happiness and run state.
 *
 * # Safety
 * `sim` must be a live handle; every output pointer may be null to skip it.
 */
enum CsStatus cs_simulation_state(struct CsSimulation *sim,
                                  double *time,
                                  uintptr_t *population,
                                  double *mean_happiness,
                                  enum CsRunState *state);

/**
 * Copies the society vector into `out`, which must hold `len` doubles.
 * `dim` receives the vector length.
 *
 * # Safety
 * `sim` must be a live handle and `out` writable for `len` doubles.
 */
enum CsStatus cs_simulation_theta(struct CsSimulation *sim,
                                  double *out,
                                  uintptr_t len,
                                  uintptr_t *dim);

/**
 * Writes the per-round log CSV to `path`.
 *
 * # Safety
 * `sim` must be a live handle and `path` a NUL-terminated string.
 */
enum CsStatus cs_simulation_write_log(struct CsSimulation *sim, const char *path);

/**
 * Releases a handle. Null is ignored.
 *
 * # Safety
 * `sim` must come from a constructor here and not be used afterwards.
 */
void cs_simulation_free(struct CsSimulation *sim);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CITYSIM_H */
