#pragma once

#include <utility>
#include <vector>

#include "orthorec/types.hpp"

namespace orthorec {

// Givens-type construction: returns C with C * (a, b)^T = (r, 0)^T,
// |r| = sqrt(|a|^2 + |b|^2), c real non-negative. Throws ZeroPair on (0,0).
CoreTransformation make_core(Complex a, Complex b, int index);

// Row-vector variant: returns C with (v1, v2) * C^H = (0, r).
CoreTransformation make_core_right(Complex v1, Complex v2, int index);

// In-place application. Left: rows (i, i+1) <- G * rows. Right:
// cols (i, i+1) <- cols * G.
void apply_core_left(const CoreTransformation& c, Mat& a);
void apply_core_right(const CoreTransformation& c, Mat& a);
void apply_core_left(const CoreTransformation& c, Vec& v);

// Assembles the m x m product C_0 C_1 ... (cores applied left in given order,
// rightmost factor first). Used by tests and metrics only.
Mat assemble_core_product(const std::vector<CoreTransformation>& cores,
                          Eigen::Index m);

struct RqFactorization {
  Mat r;                                  // upper triangular
  std::vector<CoreTransformation> cores;  // Qhat = C_0 C_1 ... C_{m-2}
};

// RQ factorization H - shift*I = R * (C_0 C_1 ... C_{m-2}).
RqFactorization rq_factorize_shifted(const UpperHessenberg& h, Complex shift,
                                     const ToleranceConfig& tol = {});

// Linear solves with a Hessenberg matrix through its RQ factorization. The
// leading pivot r_11 is the one a perfect shift annihilates; it is floored at
// pivot_floor so the solver doubles as an inverse-iteration kernel.
class HessenbergSolver {
 public:
  HessenbergSolver(const UpperHessenberg& a, double pivot_floor);

  Vec solve(const Vec& b) const;          // a^-1 b
  Vec solve_adjoint(const Vec& b) const;  // a^-H b

 private:
  Complex pivot(Eigen::Index i) const;

  RqFactorization f_;
  double floor_;
};

bool is_proper(const UpperHessenberg& h, double tol);
bool is_proper_pencil(const HessenbergPencil& p, double tol);

// Dense reference eigensolvers, used by metrics and test oracles only.
Vec reference_eigen(const UpperHessenberg& h);
Vec reference_eigen_pencil(const HessenbergPencil& p);

// Deterministic power-iteration estimate of the spectral norm.
double spectral_norm_est(const Mat& a, int iters = 40);

// Exact induced 2-norm via singular values.
double two_norm(const Mat& a);

}  // namespace orthorec
