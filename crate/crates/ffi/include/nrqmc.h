#ifndef NRQMC_H
#define NRQMC_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum NrqmcStatus {
  NRQMC_STATUS_OK = 0,
  NRQMC_STATUS_NULL_POINTER = 1,
  NRQMC_STATUS_DIMENSION = 2,
  NRQMC_STATUS_PARAMETER = 3,
  NRQMC_STATUS_INPUT = 4,
  NRQMC_STATUS_DOMAIN = 5,
  NRQMC_STATUS_NUMERICAL = 6,
  NRQMC_STATUS_IO = 7,
  NRQMC_STATUS_PANIC = 8,
} NrqmcStatus;

typedef struct NrqmcMatrix NrqmcMatrix;
typedef struct NrqmcMask NrqmcMask;
typedef struct NrqmcConfig NrqmcConfig;
typedef struct NrqmcReport NrqmcReport;

typedef struct NrqmcSummary {
  size_t iterations;
  int converged;
  double lambda;
  double r_grad;
  double r_sparse;
  double r_comp;
  double r_feas;
} NrqmcSummary;

const char *nrqmc_last_error(void);
const char *nrqmc_version(void);

NrqmcStatus nrqmc_matrix_new(size_t rows, size_t cols, const double *w, const double *x,
                             const double *y, const double *z, NrqmcMatrix **out);
void nrqmc_matrix_free(NrqmcMatrix *m);
NrqmcStatus nrqmc_matrix_shape(const NrqmcMatrix *m, size_t *rows, size_t *cols);
NrqmcStatus nrqmc_matrix_planes(const NrqmcMatrix *m, double *w, double *x, double *y,
                                double *z, size_t len);
NrqmcStatus nrqmc_matrix_singular_values(const NrqmcMatrix *m, double *out, size_t len);
NrqmcStatus nrqmc_mcp_norm(const NrqmcMatrix *m, double c, double eta, double *out);

NrqmcStatus nrqmc_mask_new(size_t rows, size_t cols, const uint8_t *flags, NrqmcMask **out);
NrqmcStatus nrqmc_mask_random(size_t rows, size_t cols, double sr, uint64_t seed,
                              NrqmcMask **out);
NrqmcStatus nrqmc_mask_count(const NrqmcMask *m, size_t *out);
void nrqmc_mask_free(NrqmcMask *m);

NrqmcStatus nrqmc_config_new(NrqmcConfig **out);
void nrqmc_config_free(NrqmcConfig *c);
NrqmcStatus nrqmc_config_set_lambda(NrqmcConfig *c, double lambda);
NrqmcStatus nrqmc_config_set_p(NrqmcConfig *c, double p);
NrqmcStatus nrqmc_config_set_mcp(NrqmcConfig *c, double mcp_c, double eta);
NrqmcStatus nrqmc_config_set_tol(NrqmcConfig *c, double tol, int relative);
NrqmcStatus nrqmc_config_set_max_iters(NrqmcConfig *c, size_t max_iters);

NrqmcStatus nrqmc_solve(const NrqmcMatrix *x, const NrqmcMask *mask, const NrqmcConfig *config,
                        NrqmcReport **out);
void nrqmc_report_free(NrqmcReport *r);
NrqmcStatus nrqmc_report_low_rank(const NrqmcReport *r, NrqmcMatrix **out);
NrqmcStatus nrqmc_report_sparse(const NrqmcReport *r, NrqmcMatrix **out);
NrqmcStatus nrqmc_report_summary(const NrqmcReport *r, NrqmcSummary *out);

NrqmcStatus nrqmc_prox_mcp(double y, double mu, double c, double eta, double *out);
NrqmcStatus nrqmc_qgst(const double *q, double nu, double p, size_t iters, double *out);

#ifdef __cplusplus
}
#endif

#endif
