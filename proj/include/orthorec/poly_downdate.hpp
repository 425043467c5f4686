#pragma once

#include "orthorec/core_linalg.hpp"
#include "orthorec/types.hpp"

#include <vector>

namespace orthorec {

struct RefinementConfig {
  int n_ir = 2;   // maximum refinement rounds
  int batch = 1;  // rounds between convergence checks
};

struct DowndateRequest {
  Complex node;                 // node to remove
  int steps = 2;                // maximum RQ steps for the matrix methods
  RefinementConfig refinement;  // eigenvector method only
  ToleranceConfig tol;
};

struct DowndateDiagnostics {
  double shifted_r11 = 0.0;        // |r_11| of the first shifted RQ factorization
  double evec_residual = 0.0;      // ||(H - z I) x||_2 / ||H - z I||_2
  double evec_bound = 0.0;         // 3 eps_mach (right-hand side of the test)
  double trailing_residual = 0.0;  // ||eps_hat||_2 achieved
  double trailing_bound = 0.0;     // eps_mach ||H||_F
  int refinement_rounds = 0;
  int steps_taken = 0;
};

// Result of removing one node from an m x m recurrence matrix. pre_cores are
// the similarity transformations applied before deflation (update a basis via
// Q <- Q C^H, in list order); post_cores act on the deflated (m-1) block.
struct DowndateOutcome {
  UpperHessenberg h_reduced;
  std::vector<CoreTransformation> pre_cores;
  std::vector<CoreTransformation> post_cores;
  double deflation_residual = 0.0;  // |coupling| recorded before zeroing
  DowndateDiagnostics diagnostics;
};

// Restore the constraint ||v|| e_1 = cores * v for a weight image v with
// nonzeros only in its two leading positions: one core mixing rows 1,2
// followed by a bulge chase off the bottom. Returns the similarity cores in
// application order; v becomes (||v||-scale, 0, ..., 0).
std::vector<CoreTransformation> restore_weight_structure(UpperHessenberg& h, Vec& v);

// Explicit matrix method: RQ factorize H - z I, form R Q + z I directly.
DowndateOutcome downdate_explicit(const UpperHessenberg& h, const DowndateRequest& req);

// Implicit matrix method: same similarity executed as a bulge chase seeded
// from the trailing row of H - z I.
DowndateOutcome downdate_implicit(const UpperHessenberg& h, const DowndateRequest& req);

// Eigenvector x with x_j = conj(w-scaled p_j(z)) from the orthonormal
// polynomial recurrence; normalized to unit length.
Vec eigenvector_from_recurrence(const UpperHessenberg& h, const Vec& w, Complex node);

// Inverse iteration (one RQ factorization of H - z I, r_11 regularized) until
// ||(H - z I) x|| <= 3 eps ||H - z I||_2, checking every cfg.batch rounds, at
// most cfg.n_ir rounds. Records achieved residual and rounds in diag.
Vec iterative_refinement(const UpperHessenberg& h, Complex node, Vec x,
                         const RefinementConfig& cfg, const ToleranceConfig& tol,
                         DowndateDiagnostics& diag);

// Refine until ||(eps_1 .. eps_m)||_2 <= eps_mach ||H||_F with
// eps_i = ((H - z I) x)_i / ||x_{i-1:m}||, restarting inverse iteration from
// the trailing-weighted residual. Returns the best vector found even when the
// bound is missed; diag.trailing_residual records what was achieved.
Vec trailing_accurate_eigenvector(const UpperHessenberg& h, Complex node, Vec x,
                                  const RefinementConfig& cfg, const ToleranceConfig& tol,
                                  DowndateDiagnostics& diag);

// Eigenvector method: recurrence, refinement, trailing accuracy, then a
// bottom-up core sequence reducing the eigenvector to e_1 and deflation.
DowndateOutcome downdate_eigenvector(const UpperHessenberg& h, const Vec& w,
                                     const DowndateRequest& req);

}  // namespace orthorec
