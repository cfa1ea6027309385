#ifndef ERGOLAB_H
#define ERGOLAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum ErgolabStatus {
  ERGOLAB_STATUS_OK = 0,
  /*
   A required pointer was null or an argument was out of range.
   */
  ERGOLAB_STATUS_INVALID_ARGUMENT = 1,
  /*
   Input could not be parsed or failed validation.
   */
  ERGOLAB_STATUS_INVALID_INPUT = 2,
  ERGOLAB_STATUS_DIMENSION_MISMATCH = 3,
  /*
   Target entropy has no thermal state.
   */
  ERGOLAB_STATUS_ENTROPY_RANGE = 4,
  ERGOLAB_STATUS_DIMENSION_CAP = 5,
  /*
   Internal failure, including a caught panic.
   */
  ERGOLAB_STATUS_INTERNAL = 6,
} ErgolabStatus;

typedef enum ErgolabStrategy {
  ERGOLAB_STRATEGY_GIVENS_SWEEPS = 0,
  ERGOLAB_STRATEGY_EXP_MAP_GRADIENT = 1,
} ErgolabStrategy;

typedef struct ErgolabHamiltonian ErgolabHamiltonian;

typedef struct ErgolabMeasurement ErgolabMeasurement;

typedef struct ErgolabState ErgolabState;

/*
 Observational ergotropy and the thermal reference it was measured against.
 */
typedef struct ErgolabWork {
  double work;
  double beta;
  double s_obs;
  double e_initial;
  double e_final;
} ErgolabWork;

typedef struct ErgolabOptimizerConfig {
  uint32_t restarts;
  uint32_t max_sweeps;
  double tol;
  uint64_t seed;
  enum ErgolabStrategy strategy;
} ErgolabOptimizerConfig;

typedef struct ErgolabCorrelation {
  double s_qc;
  double s_min;
  double s_vn;
  uint32_t restarts_agreeing;
  bool converged;
} ErgolabCorrelation;

/*
 Protocol settings. `cert_samples == 0` certifies with exact statistics;
 `dim_cap == 0` uses the library default.
 */
typedef struct ErgolabProtocolConfig {
  uint32_t copies;
  uint64_t trials;
  uint64_t seed;
  uint64_t cert_samples;
  uint64_t dim_cap;
} ErgolabProtocolConfig;

typedef struct ErgolabWorkStats {
  double mean;
  double std_error;
  double exact_mean;
  double initial_energy;
} ErgolabWorkStats;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Library version as a static NUL-terminated string.
 */
const char *ergolab_version(void);

/*
 Message for the most recent call on this thread. Valid until the next call
 on the same thread.
 */
const char *ergolab_last_error_message(void);

/*
 Parses a state document (`{"kind": "pure"|"density", ...}`) or a `gen:` spec.
 A non-positive `tol` selects the default tolerance.

 # Safety
 `json` must be a NUL-terminated string and `out` a writable pointer.
 */
enum ErgolabStatus ergolab_state_from_json(const char *json, double tol, struct ErgolabState **out);

/*
 Density matrix from `dim * dim` interleaved complex entries. Pass
 `dim_a = dim_b = 0` for a state without a bipartition.

 # Safety
 `re_im` must point to `2 * dim * dim` doubles and `out` must be writable.
 */
enum ErgolabStatus ergolab_state_from_density(const double *re_im,
                                              size_t dim,
                                              size_t dim_a,
                                              size_t dim_b,
                                              double tol,
                                              struct ErgolabState **out);

/*
 Pure state from `dim` interleaved complex amplitudes.

 # Safety
 `re_im` must point to `2 * dim` doubles and `out` must be writable.
 */
enum ErgolabStatus ergolab_state_from_pure(const double *re_im,
                                           size_t dim,
                                           size_t dim_a,
                                           size_t dim_b,
                                           double tol,
                                           struct ErgolabState **out);

/*
 # Safety
 `state` must be null or a handle from an `ergolab_state_*` constructor.
 */
void ergolab_state_free(struct ErgolabState *state);

/*
 # Safety
 Handles must be valid; `out` must be writable.
 */
enum ErgolabStatus ergolab_state_dim(const struct ErgolabState *state, size_t *out);

/*
 # Safety
 `json` must be a NUL-terminated string and `out` a writable pointer.
 */
enum ErgolabStatus ergolab_hamiltonian_from_json(const char *json, struct ErgolabHamiltonian **out);

/*
 Hermitian matrix from `dim * dim` interleaved complex entries.

 # Safety
 `re_im` must point to `2 * dim * dim` doubles and `out` must be writable.
 */
enum ErgolabStatus ergolab_hamiltonian_from_matrix(const double *re_im,
                                                   size_t dim,
                                                   struct ErgolabHamiltonian **out);

/*
 # Safety
 `energies` must point to `dim` doubles and `out` must be writable.
 */
enum ErgolabStatus ergolab_hamiltonian_diagonal(const double *energies,
                                                size_t dim,
                                                struct ErgolabHamiltonian **out);

/*
 # Safety
 `h` must be null or a handle from an `ergolab_hamiltonian_*` constructor.
 */
void ergolab_hamiltonian_free(struct ErgolabHamiltonian *h);

/*
 Parses a measurement document (`{"kind": "basis"|"pvm", ...}`) or a `gen:` spec.

 # Safety
 `json` must be a NUL-terminated string and `out` a writable pointer.
 */
enum ErgolabStatus ergolab_measurement_from_json(const char *json, struct ErgolabMeasurement **out);

/*
 Rank-one measurement onto the columns of a `dim x dim` unitary.

 # Safety
 `re_im` must point to `2 * dim * dim` doubles and `out` must be writable.
 */
enum ErgolabStatus ergolab_measurement_from_basis(const double *re_im,
                                                  size_t dim,
                                                  struct ErgolabMeasurement **out);

/*
 # Safety
 `out` must be writable.
 */
enum ErgolabStatus ergolab_measurement_computational(size_t dim, struct ErgolabMeasurement **out);

/*
 # Safety
 `m` must be null or a handle from an `ergolab_measurement_*` constructor.
 */
void ergolab_measurement_free(struct ErgolabMeasurement *m);

/*
 # Safety
 Handles must be valid; `out` must be writable.
 */
enum ErgolabStatus ergolab_von_neumann_entropy(const struct ErgolabState *state, double *out);

/*
 # Safety
 Handles must be valid; `out` must be writable.
 */
enum ErgolabStatus ergolab_observational_entropy(const struct ErgolabState *state,
                                                 const struct ErgolabMeasurement *measurement,
                                                 double *out);

/*
 Entanglement entropy of a bipartite pure state.

 # Safety
 Handles must be valid; `out` must be writable.
 */
enum ErgolabStatus ergolab_entanglement_entropy(const struct ErgolabState *state, double *out);

/*
 # Safety
 Handles must be valid; `out` must be writable.
 */
enum ErgolabStatus ergolab_ergotropy(const struct ErgolabState *state,
                                     const struct ErgolabHamiltonian *h,
                                     double *out);

/*
 # Safety
 Handles must be valid; `out` must be writable.
 */
enum ErgolabStatus ergolab_observational_ergotropy(const struct ErgolabState *state,
                                                   const struct ErgolabHamiltonian *h,
                                                   const struct ErgolabMeasurement *measurement,
                                                   struct ErgolabWork *out);

/*
 Observational ergotropy at the Schmidt basis of a bipartite pure state.

 # Safety
 Handles must be valid; `out` must be writable.
 */
enum ErgolabStatus ergolab_entanglement_ergotropy(const struct ErgolabState *state,
                                                  const struct ErgolabHamiltonian *h,
                                                  struct ErgolabWork *out);

/*
 Inverse temperature whose thermal state has entropy `s_target`.

 # Safety
 Handles must be valid; `out` must be writable.
 */
enum ErgolabStatus ergolab_solve_beta(const struct ErgolabHamiltonian *h,
                                      double s_target,
                                      double *out);

struct ErgolabOptimizerConfig ergolab_optimizer_config_default(void);

/*
 Quantum correlation entropy of a bipartite state. A null `config` selects
 the defaults.

 # Safety
 Handles must be valid; `config` null or valid; `out` must be writable.
 */
enum ErgolabStatus ergolab_quantum_correlation_entropy(const struct ErgolabState *state,
                                                       const struct ErgolabOptimizerConfig *config,
                                                       struct ErgolabCorrelation *out);

/*
 Runs the certify-then-extract protocol on `config.copies` copies.
 `samples` may be null; otherwise it receives `samples_len` per-trial works,
 where `samples_len` must equal `config.trials`.

 # Safety
 Handles must be valid; `out` writable; `samples` null or `samples_len` doubles.
 */
enum ErgolabStatus ergolab_simulate_extraction(const struct ErgolabState *state,
                                               const struct ErgolabHamiltonian *h,
                                               const struct ErgolabMeasurement *measurement,
                                               struct ErgolabProtocolConfig config,
                                               struct ErgolabWorkStats *out,
                                               double *samples,
                                               size_t samples_len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ERGOLAB_H */
