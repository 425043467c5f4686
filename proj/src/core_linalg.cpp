#include "orthorec/core_linalg.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <lapacke.h>

namespace orthorec {

CoreTransformation make_core(Complex a, Complex b, int index) {
  if (a == Complex(0.0) && b == Complex(0.0)) throw ZeroPair();
  const double r = std::hypot(std::abs(a), std::abs(b));
  if (a == Complex(0.0)) return {index, Complex(0.0), std::conj(b) / std::abs(b)};
  const Complex phase = a / std::abs(a);
  return {index, Complex(std::abs(a) / r), std::conj(b) * phase / r};
}

CoreTransformation make_core_right(Complex v1, Complex v2, int index) {
  if (v1 == Complex(0.0) && v2 == Complex(0.0)) throw ZeroPair();
  const double r = std::hypot(std::abs(v1), std::abs(v2));
  if (v2 == Complex(0.0)) return {index, Complex(0.0), -std::conj(v1) / std::abs(v1)};
  const Complex phase = v2 / std::abs(v2);
  return {index, Complex(std::abs(v2) / r), -std::conj(v1) * phase / r};
}

void apply_core_left(const CoreTransformation& g, Mat& a) {
  const int i = g.index;
  if (i < 0 || i + 1 >= a.rows())
    throw IndexOutOfRange("core index " + std::to_string(i) + " for " +
                          std::to_string(a.rows()) + " rows");
  Eigen::RowVectorXcd top = a.row(i);
  a.row(i) = g.c * top + g.s * a.row(i + 1);
  a.row(i + 1) = -std::conj(g.s) * top + std::conj(g.c) * a.row(i + 1);
}

void apply_core_right(const CoreTransformation& g, Mat& a) {
  const int i = g.index;
  if (i < 0 || i + 1 >= a.cols())
    throw IndexOutOfRange("core index " + std::to_string(i) + " for " +
                          std::to_string(a.cols()) + " cols");
  Vec left = a.col(i);
  a.col(i) = g.c * left - std::conj(g.s) * a.col(i + 1);
  a.col(i + 1) = g.s * left + std::conj(g.c) * a.col(i + 1);
}

void apply_core_left(const CoreTransformation& g, Vec& v) {
  const int i = g.index;
  if (i < 0 || i + 1 >= v.size())
    throw IndexOutOfRange("core index " + std::to_string(i) + " for vector of size " +
                          std::to_string(v.size()));
  const Complex top = v(i);
  v(i) = g.c * top + g.s * v(i + 1);
  v(i + 1) = -std::conj(g.s) * top + std::conj(g.c) * v(i + 1);
}

Mat assemble_core_product(const std::vector<CoreTransformation>& cores,
                          Eigen::Index m) {
  Mat q = Mat::Identity(m, m);
  for (auto it = cores.rbegin(); it != cores.rend(); ++it) apply_core_left(*it, q);
  return q;
}

RqFactorization rq_factorize_shifted(const UpperHessenberg& h, Complex shift,
                                     const ToleranceConfig&) {
  const Eigen::Index m = h.dim();
  RqFactorization f;
  f.r = h.mat();
  f.r.diagonal().array() -= shift;
  f.cores.reserve(m > 0 ? m - 1 : 0);
  std::vector<CoreTransformation> rev;
  for (Eigen::Index i = m - 2; i >= 0; --i) {
    const Complex a = f.r(i + 1, i), b = f.r(i + 1, i + 1);
    CoreTransformation c = (a == Complex(0.0) && b == Complex(0.0))
                               ? CoreTransformation{static_cast<int>(i)}
                               : make_core_right(a, b, static_cast<int>(i));
    CoreTransformation ch = c.adjoint();
    apply_core_right(ch, f.r);
    f.r(i + 1, i) = Complex(0.0);
    rev.push_back(c);
  }
  f.cores.assign(rev.rbegin(), rev.rend());
  return f;
}

HessenbergSolver::HessenbergSolver(const UpperHessenberg& a, double pivot_floor)
    : f_(rq_factorize_shifted(a, Complex(0.0))), floor_(pivot_floor) {}

Complex HessenbergSolver::pivot(Eigen::Index i) const {
  Complex d = f_.r(i, i);
  if (i == 0 && std::abs(d) < floor_)
    d = (d == Complex(0.0)) ? Complex(floor_) : d / std::abs(d) * floor_;
  if (d == Complex(0.0))
    throw SingularSolve("zero pivot at position " + std::to_string(i));
  return d;
}

Vec HessenbergSolver::solve(const Vec& b) const {
  const Eigen::Index m = f_.r.rows();
  Vec u = b;
  for (Eigen::Index i = m - 1; i >= 0; --i) {
    const Complex tail =
        (f_.r.row(i).segment(i + 1, m - 1 - i) * u.segment(i + 1, m - 1 - i)).value();
    u(i) = (u(i) - tail) / pivot(i);
  }
  for (const auto& c : f_.cores) apply_core_left(c.adjoint(), u);
  return u;
}

Vec HessenbergSolver::solve_adjoint(const Vec& b) const {
  const Eigen::Index m = f_.r.rows();
  Vec u = b;
  for (auto it = f_.cores.rbegin(); it != f_.cores.rend(); ++it) apply_core_left(*it, u);
  Vec y(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    Complex acc = u(i);
    for (Eigen::Index j = 0; j < i; ++j) acc -= std::conj(f_.r(j, i)) * y(j);
    y(i) = acc / std::conj(pivot(i));
  }
  return y;
}

bool is_proper(const UpperHessenberg& h, double tol) {
  const Eigen::Index m = h.dim();
  const double scale = h.mat().norm();
  for (Eigen::Index i = 0; i + 1 < m; ++i)
    if (std::abs(h.mat()(i + 1, i)) <= tol * scale) return false;
  return true;
}

bool is_proper_pencil(const HessenbergPencil& p, double tol) {
  const Eigen::Index m = p.dim();
  const double scale = std::max(p.h.mat().norm(), p.k.mat().norm());
  for (Eigen::Index i = 0; i + 1 < m; ++i)
    if (std::abs(p.h.mat()(i + 1, i)) + std::abs(p.k.mat()(i + 1, i)) <= tol * scale)
      return false;
  if (m >= 1) {
    // Rank test on the stacked first columns and last rows.
    Mat cols(m, 2), rows(m, 2);
    cols.col(0) = p.h.mat().col(0);
    cols.col(1) = p.k.mat().col(0);
    rows.col(0) = p.h.mat().row(m - 1).transpose();
    rows.col(1) = p.k.mat().row(m - 1).transpose();
    auto rank2 = [&](const Mat& a) {
      Eigen::JacobiSVD<Mat> svd(a);
      return svd.singularValues()(svd.singularValues().size() - 1) >
             tol * svd.singularValues()(0);
    };
    if (m > 1 && (!rank2(cols) || !rank2(rows))) return false;
  }
  return true;
}

Vec reference_eigen(const UpperHessenberg& h) {
  if (h.dim() == 1) {
    Vec v(1);
    v(0) = h.mat()(0, 0);
    return v;
  }
  Eigen::ComplexEigenSolver<Mat> es(h.mat(), /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success)
    throw ConvergenceFailure("dense eigensolver failed to converge");
  return es.eigenvalues();
}

Vec reference_eigen_pencil(const HessenbergPencil& p) {
  const lapack_int n = static_cast<lapack_int>(p.dim());
  Mat a = p.h.mat();
  Mat b = p.k.mat();
  Vec alpha(n), beta(n);
  lapack_int info = LAPACKE_zggev(
      LAPACK_COL_MAJOR, 'N', 'N', n,
      reinterpret_cast<lapack_complex_double*>(a.data()), n,
      reinterpret_cast<lapack_complex_double*>(b.data()), n,
      reinterpret_cast<lapack_complex_double*>(alpha.data()),
      reinterpret_cast<lapack_complex_double*>(beta.data()), nullptr, 1, nullptr, 1);
  if (info != 0) throw ConvergenceFailure("zggev failed, info=" + std::to_string(info));
  Vec ev(n);
  for (lapack_int i = 0; i < n; ++i) ev(i) = alpha(i) / beta(i);
  return ev;
}

double spectral_norm_est(const Mat& a, int iters) {
  if (a.rows() == 0 || a.cols() == 0) return 0.0;
  Vec v = Vec::Ones(a.cols());
  // Deterministic non-symmetric seed to avoid landing in an invariant subspace.
  for (Eigen::Index i = 0; i < v.size(); ++i)
    v(i) = Complex(1.0 + 0.3 * std::cos(1.7 * double(i)), 0.2 * std::sin(2.3 * double(i)));
  v.normalize();
  double est = 0.0;
  for (int it = 0; it < iters; ++it) {
    Vec w = a.adjoint() * (a * v);
    double n = w.norm();
    if (n == 0.0) return 0.0;
    est = std::sqrt(n);
    v = w / n;
  }
  return est;
}

double two_norm(const Mat& a) {
  if (a.rows() == 0 || a.cols() == 0) return 0.0;
  Eigen::BDCSVD<Mat> svd(a);
  return svd.singularValues()(0);
}

}  // namespace orthorec
