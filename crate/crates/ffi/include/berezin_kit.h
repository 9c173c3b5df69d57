#ifndef BEREZIN_KIT_H
#define BEREZIN_KIT_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes.
typedef enum BkStatus {
  BK_STATUS_OK = 0,
  BK_STATUS_NULL_POINTER = 1,
  BK_STATUS_INVALID_ARGUMENT = 2,
  BK_STATUS_OUTSIDE_DISK = 3,
  BK_STATUS_DIMENSION_MISMATCH = 4,
  BK_STATUS_NOT_SELF_MAP = 5,
  BK_STATUS_DOMAIN = 6,
  BK_STATUS_PRECISION = 7,
  BK_STATUS_NOT_FOUND = 8,
  BK_STATUS_NUMERICAL = 9,
  BK_STATUS_UNSUPPORTED = 10,
  BK_STATUS_INDEX_OUT_OF_RANGE = 11,
  BK_STATUS_PANIC = 12,
} BkStatus;

// Opaque sampled Berezin range.
typedef struct BkCloud BkCloud;

// Opaque operator handle.
typedef struct BkOperator BkOperator;

typedef struct BkComplex {
  double re;
  double im;
} BkComplex;

// Certificate that the Berezin range of a Blaschke composition operator is not convex.
typedef struct BkCertificate {
  struct BkComplex z;
  struct BkComplex v;
  struct BkComplex partner;
  double partner_residual;
  double midpoint;
  double real_slice_inf;
  double gap;
} BkCertificate;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null. Valid until the next failing call on the thread.
const char *bk_last_error_message(void);

// Static description of a status code.
const char *bk_status_name(enum BkStatus status);

// `f -> psi * (f^{(n)} o phi)` on `H_gamma` of the disk, with polynomial `psi` (monomial coefficients,
// lowest first) and `phi(z) = b0 + b1 z / (1 - c z)`.
enum BkStatus bk_operator_comp_diff(uint32_t gamma,
                                    uint32_t n,
                                    const struct BkComplex *psi,
                                    size_t psi_len,
                                    struct BkComplex b0,
                                    struct BkComplex b1,
                                    struct BkComplex c,
                                    struct BkOperator **result);

// Operator built from the canonical symbols that make it complex symmetric for the standard conjugation,
// on `H_gamma` of the polydisk of dimension `dim`. `n`, `phi0`, `phi1` each hold `dim` entries.
enum BkStatus bk_operator_canonical_j(uint32_t gamma,
                                      size_t dim,
                                      const uint32_t *n,
                                      const struct BkComplex *phi0,
                                      const struct BkComplex *phi1,
                                      struct BkComplex a,
                                      struct BkOperator **result);

// Self-adjoint analogue of [`bk_operator_canonical_j`]; `phi1` and `a` are real.
enum BkStatus bk_operator_canonical_sa(uint32_t gamma,
                                       size_t dim,
                                       const uint32_t *n,
                                       const struct BkComplex *phi0,
                                       const double *phi1,
                                       double a,
                                       struct BkOperator **result);

void bk_operator_free(struct BkOperator *op);

// Sampled defect of `C T C = T^*` for the standard conjugation.
enum BkStatus bk_cs_defect(const struct BkOperator *op,
                           size_t samples,
                           double radius,
                           uint64_t seed,
                           double *defect);

// Same as [`bk_cs_defect`] for `f(z) -> mu conj(f(conj(xi z)))` with unimodular `mu`, `xi`.
enum BkStatus bk_cs_defect_rotation(const struct BkOperator *op,
                                    struct BkComplex mu,
                                    struct BkComplex xi,
                                    size_t samples,
                                    double radius,
                                    uint64_t seed,
                                    double *defect);

// Sampled defect of `T = T^*`.
enum BkStatus bk_sa_defect(const struct BkOperator *op,
                           size_t samples,
                           double radius,
                           uint64_t seed,
                           double *defect);

// Berezin transform at `w` of composition with the Blaschke factor of zero `alpha`.
enum BkStatus bk_berezin_blaschke(uint32_t gamma,
                                  struct BkComplex alpha,
                                  struct BkComplex w,
                                  struct BkComplex *value);

// Point `lambda` whose transform value is the conjugate of the value at `w`.
enum BkStatus bk_symmetry_witness(uint32_t gamma,
                                  struct BkComplex alpha,
                                  struct BkComplex w,
                                  struct BkComplex *lambda,
                                  double *residual);

// Searches for a nonconvexity certificate with the default search.
enum BkStatus bk_nonconvexity_certificate(uint32_t gamma,
                                          struct BkComplex alpha,
                                          struct BkCertificate *certificate);

// Samples the Berezin range of the Blaschke composition operator on a polar grid.
enum BkStatus bk_cloud_blaschke(uint32_t gamma,
                                struct BkComplex alpha,
                                size_t r_count,
                                size_t theta_count,
                                double r_max,
                                struct BkCloud **result);

// Number of samples, or 0 for a null handle.
size_t bk_cloud_len(const struct BkCloud *cloud);

enum BkStatus bk_cloud_get(const struct BkCloud *cloud,
                           size_t index,
                           struct BkComplex *w,
                           struct BkComplex *value);

void bk_cloud_free(struct BkCloud *cloud);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BEREZIN_KIT_H */
