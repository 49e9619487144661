#ifndef BTS_H
#define BTS_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum BtsStatus {
  BTS_STATUS_OK = 0,
  BTS_STATUS_NULL_POINTER = 1,
  BTS_STATUS_INVALID_INPUT = 2,
  BTS_STATUS_PARSE = 3,
  BTS_STATUS_NOT_SYMMETRIC = 4,
  BTS_STATUS_SOLVER = 5,
  BTS_STATUS_ISOTROPIC = 6,
  BTS_STATUS_DEGENERATE = 7,
  BTS_STATUS_UNSUPPORTED = 8,
  BTS_STATUS_OUT_OF_RANGE = 9,
  BTS_STATUS_PANIC = 10,
} BtsStatus;

// Singular data of one tensor.
typedef struct BtsSpectrum BtsSpectrum;

// A μ-symmetric tensor with exact rational entries.
typedef struct BtsTensor BtsTensor;

// Product formula check.
typedef struct BtsProductReport {
  double lhs;
  double rhs;
  double rel_error;
  bool degenerate;
} BtsProductReport;

// The 2×2×2 invariants, rounded to double.
typedef struct BtsInvariants {
  double theta[4];
  double phi;
  double det;
  double f3[3];
} BtsInvariants;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread; empty after a success.
// The pointer stays valid until the next call on the same thread.
const char *bts_last_error(void);

// Builds a tensor from 2^d doubles in slot-major bit order. Each double is read
// exactly. `mu` may be null for μ = 1^d; otherwise the entries must be μ-symmetric.
//
// # Safety
// `entries` must point to `len` doubles, `mu` to `mu_len` integers (or be null),
// and `out` must be writable.
enum BtsStatus bts_tensor_from_doubles(size_t d,
                                       const double *entries,
                                       size_t len,
                                       const size_t *mu,
                                       size_t mu_len,
                                       struct BtsTensor **out);

// Parses the JSON tensor format (`{"d": 3, "mu": null, "entries": {"000": "3/4"}}`).
//
// # Safety
// `json` must be a NUL-terminated string and `out` writable.
enum BtsStatus bts_tensor_from_json(const char *json, struct BtsTensor **out);

// # Safety
// `t` must come from a `bts_tensor_*` constructor and not be used afterwards.
void bts_tensor_free(struct BtsTensor *t);

// Order d of the tensor.
//
// # Safety
// `t` must be a live tensor handle.
size_t bts_tensor_order(const struct BtsTensor *t);

// Solves for all singular data.
//
// # Safety
// `t` must be a live tensor handle and `out` writable.
enum BtsStatus bts_solve(const struct BtsTensor *t, uint64_t seed, struct BtsSpectrum **out);

// # Safety
// `s` must come from `bts_solve` and not be used afterwards.
void bts_spectrum_free(struct BtsSpectrum *s);

// Number of singular data (the ED degree for non-degenerate input).
//
// # Safety
// `s` must be a live spectrum handle.
size_t bts_spectrum_len(const struct BtsSpectrum *s);

// σ² of datum `index` as (re, im), plus its residual.
//
// # Safety
// `s` must be a live spectrum handle; the out pointers must be writable.
enum BtsStatus bts_spectrum_sigma_sq(const struct BtsSpectrum *s,
                                     size_t index,
                                     double *re,
                                     double *im,
                                     double *residual);

// ∏σ² against the closed-form factor product.
//
// # Safety
// `t` must be a live tensor handle and `out` writable.
enum BtsStatus bts_verify_product(const struct BtsTensor *t,
                                  uint64_t seed,
                                  struct BtsProductReport *out);

// θ, φ, Det and the slice factors of an order-3 tensor.
//
// # Safety
// `t` must be a live tensor handle and `out` writable.
enum BtsStatus bts_invariants_222(const struct BtsTensor *t, struct BtsInvariants *out);

// ED degree of the partition `mu`.
//
// # Safety
// `mu` must point to `mu_len` integers and `out` be writable.
enum BtsStatus bts_ed_degree(const size_t *mu, size_t mu_len, uint64_t *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BTS_H */
