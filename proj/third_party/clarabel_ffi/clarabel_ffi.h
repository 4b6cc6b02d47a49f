/* C interface to the Clarabel interior-point solver.
 * Problem: minimize 0.5 x'Px + q'x  s.t.  Ax + s = b, s in K.
 * Matrices are CSC with 0-based indices; P holds the upper triangle only.
 * K is, in order: zero cone, nonnegative orthant, second-order cones of the
 * given sizes, PSD cones in scaled upper-triangle column-major form. */
#ifndef CLARABEL_FFI_H
#define CLARABEL_FFI_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef struct {
  size_t m, n;
  const size_t* p_colptr;
  const size_t* p_rowval;
  const double* p_nzval;
  const size_t* a_colptr;
  const size_t* a_rowval;
  const double* a_nzval;
  const double* q;
  const double* b;
  size_t zero;
  size_t nonneg;
  const size_t* soc;
  size_t n_soc;
  const size_t* psd;
  size_t n_psd;
} clarabel_ffi_problem;

typedef struct {
  double tol_feas;
  double tol_gap_abs;
  double tol_gap_rel;
  unsigned max_iter;
  double time_limit; /* seconds, 0 = none */
  int verbose;
  int equilibrate;
} clarabel_ffi_settings;

typedef struct {
  int status; /* see clarabel_ffi_status */
  unsigned iterations;
  double obj_val;
  double solve_time;
  double r_prim;
  double r_dual;
} clarabel_ffi_info;

enum clarabel_ffi_status {
  CLARABEL_FFI_SETUP_ERROR = -1,
  CLARABEL_FFI_UNSOLVED = 0,
  CLARABEL_FFI_SOLVED,
  CLARABEL_FFI_PRIMAL_INFEASIBLE,
  CLARABEL_FFI_DUAL_INFEASIBLE,
  CLARABEL_FFI_ALMOST_SOLVED,
  CLARABEL_FFI_ALMOST_PRIMAL_INFEASIBLE,
  CLARABEL_FFI_ALMOST_DUAL_INFEASIBLE,
  CLARABEL_FFI_MAX_ITERATIONS,
  CLARABEL_FFI_MAX_TIME,
  CLARABEL_FFI_NUMERICAL_ERROR,
  CLARABEL_FFI_INSUFFICIENT_PROGRESS,
  CLARABEL_FFI_OTHER
};

/* Writes n primal values into x. Returns info.status. */
int clarabel_ffi_solve(const clarabel_ffi_problem* prob, const clarabel_ffi_settings* settings,
                       double* x, clarabel_ffi_info* info);

const char* clarabel_ffi_version(void);

#ifdef __cplusplus
}
#endif

#endif
