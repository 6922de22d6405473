#ifndef HYPERKERNEL_H
#define HYPERKERNEL_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every fallible call.
typedef enum HkStatus {
  HK_STATUS_OK = 0,
  HK_STATUS_NULL_POINTER = 1,
  HK_STATUS_DOMAIN = 2,
  HK_STATUS_ACCURACY = 3,
  // Invalid kernel parameters or a violated precondition.
  HK_STATUS_INVALID_KERNEL = 4,
  HK_STATUS_NOT_POSITIVE_DEFINITE = 5,
  HK_STATUS_DIMENSION_MISMATCH = 6,
  HK_STATUS_FIT_FAILED = 7,
  HK_STATUS_PANIC = 8,
} HkStatus;

// Storage layout requested for a covariance matrix.
typedef enum HkStorage {
  HK_STORAGE_DENSE = 0,
  HK_STORAGE_CSR = 1,
} HkStorage;

// Opaque covariance matrix handle.
typedef struct HkCovMatrix HkCovMatrix;

// Opaque kernel handle.
typedef struct HkKernel HkKernel;

// Outcome of [`hk_fit_sigma2_support`].
typedef struct HkFitResult {
  double sigma2;
  double support;
  double microergodic;
  double loglik;
  bool converged;
  size_t n_evals;
} HkFitResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *hk_version(void);

// Message describing why the most recent call on this thread failed, or NULL
// if it succeeded. The pointer is valid until the next call into the library
// on the same thread.
const char *hk_last_error_message(void);

// ℋ(κ, μ, a) on ℝ^d. Invalid parameters still yield a handle so that
// [`hk_kernel_validate`] can report on them; evaluation then fails.
enum HkStatus hk_kernel_new_h(double kappa,
                              double mu,
                              double a,
                              size_t d,
                              struct HkKernel **out_kernel);

// Generalized Wendland kernel with support `beta`.
enum HkStatus hk_kernel_new_gw(double kappa,
                               double mu,
                               double beta,
                               size_t d,
                               struct HkKernel **out_kernel);

// Gauss hypergeometric kernel with support `a`.
enum HkStatus hk_kernel_new_gh(double delta,
                               double beta,
                               double gamma,
                               double a,
                               size_t d,
                               struct HkKernel **out_kernel);

enum HkStatus hk_kernel_new_matern(double nu, double alpha, size_t d, struct HkKernel **out_kernel);

void hk_kernel_free(struct HkKernel *kernel);

// Writes 1 to `out_valid` for a valid kernel and 0 otherwise, and the lower
// bound on μ (NaN when the family has none) to `out_mu_bound` if non-NULL.
enum HkStatus hk_kernel_validate(const struct HkKernel *kernel,
                                 int32_t *out_valid,
                                 double *out_mu_bound);

// Support radius (infinite for Matérn).
enum HkStatus hk_kernel_support(const struct HkKernel *kernel, double *out_support);

// φ at each of the `n` distances in `x`, written to `out_values`.
enum HkStatus hk_kernel_eval(const struct HkKernel *kernel,
                             const double *x,
                             size_t n,
                             double *out_values);

// Spectral density at frequency norm `z`.
enum HkStatus hk_spectral_density(const struct HkKernel *kernel, double z, double *out_value);

enum HkStatus hk_integral_range(const struct HkKernel *kernel, double *out_value);

// Covariance of `n` points given row-major in `coords` (`n × d`).
enum HkStatus hk_covmat_new(const struct HkKernel *kernel,
                            double sigma2,
                            double nugget,
                            const double *coords,
                            size_t n,
                            enum HkStorage storage,
                            struct HkCovMatrix **out_matrix);

void hk_covmat_free(struct HkCovMatrix *matrix);

// Entry (i, j); 0 outside the matrix.
double hk_covmat_get(const struct HkCovMatrix *matrix, size_t i, size_t j);

// Dimension, stored entries and percentage of exact zeros.
enum HkStatus hk_covmat_info(const struct HkCovMatrix *matrix,
                             size_t *out_n,
                             size_t *out_nnz,
                             double *out_pct_zero);

// Gaussian log-likelihood of `values` observed at `coords`.
enum HkStatus hk_loglik(const struct HkKernel *kernel,
                        double sigma2,
                        double nugget,
                        const double *coords,
                        const double *values,
                        size_t n,
                        double *out_value);

// `reps` fields at `n` points; replicate `r` fills `out_fields[r*n .. (r+1)*n]`.
enum HkStatus hk_simulate(const struct HkKernel *kernel,
                          double sigma2,
                          double nugget,
                          const double *coords,
                          size_t n,
                          size_t reps,
                          uint64_t seed,
                          double *out_fields);

// Simple kriging predictions and variances at `m` targets.
enum HkStatus hk_krige(const struct HkKernel *kernel,
                       double sigma2,
                       double nugget,
                       const double *coords,
                       const double *values,
                       size_t n,
                       const double *targets,
                       size_t m,
                       double *out_pred,
                       double *out_var);

// Maximum likelihood (σ², support) with the shape of `kernel` held fixed and
// the support searched in `[a_lo, a_hi]`.
enum HkStatus hk_fit_sigma2_support(const struct HkKernel *kernel,
                                    const double *coords,
                                    const double *values,
                                    size_t n,
                                    double a_lo,
                                    double a_hi,
                                    size_t restarts,
                                    uint64_t seed,
                                    struct HkFitResult *out_result);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HYPERKERNEL_H */
