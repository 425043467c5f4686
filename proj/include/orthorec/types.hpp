#pragma once
#include <cstdio>

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace orthorec {

using Complex = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

// Scientific-notation formatting for error messages.
inline std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3e", v);
  return buf;
}

// ---------------------------------------------------------------------------
// Errors

struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct ZeroPair : Error {
  ZeroPair() : Error("cannot build a core transformation from (0, 0)") {}
};
struct IndexOutOfRange : Error {
  explicit IndexOutOfRange(const std::string& m) : Error(m) {}
};
struct NotProper : Error {
  explicit NotProper(const std::string& m) : Error(m) {}
};
struct Breakdown : Error {
  explicit Breakdown(const std::string& m) : Error(m) {}
};
struct DuplicateNode : Error {
  explicit DuplicateNode(const std::string& m) : Error(m) {}
};
struct PoleEqualsNode : Error {
  explicit PoleEqualsNode(const std::string& m) : Error(m) {}
};
struct DeflationFailed : Error {
  explicit DeflationFailed(const std::string& m) : Error(m) {}
};
struct TrailingAccuracyFailed : Error {
  double achieved;
  TrailingAccuracyFailed(const std::string& m, double a) : Error(m), achieved(a) {}
};
struct SingularSolve : Error {
  explicit SingularSolve(const std::string& m) : Error(m) {}
};
struct RecurrenceBreakdown : Error {
  explicit RecurrenceBreakdown(const std::string& m) : Error(m) {}
};
struct ConvergenceFailure : Error {
  explicit ConvergenceFailure(const std::string& m) : Error(m) {}
};
struct ShiftIsEigenvalue : Error {
  explicit ShiftIsEigenvalue(const std::string& m) : Error(m) {}
};
struct SwapIllConditioned : Error {
  explicit SwapIllConditioned(const std::string& m) : Error(m) {}
};
struct DegreeTooLarge : Error {
  explicit DegreeTooLarge(const std::string& m) : Error(m) {}
};
struct EvaluationAtPole : Error {
  explicit EvaluationAtPole(const std::string& m) : Error(m) {}
};
struct ConfigInvalid : Error {
  explicit ConfigInvalid(const std::string& m) : Error(m) {}
};

// ---------------------------------------------------------------------------
// Tolerances

struct ToleranceConfig {
  double eps_mach = 0x1p-52;
  double evec_residual_factor = 3.0;     // constant in the eigenvector residual test
  double deflation_tol_factor = 100.0;   // deflation threshold, times eps_mach ||H||_F
  double properness_tol = 0x1p-52 * 100.0;
  double orth_tol = 1e-12;
};

// ---------------------------------------------------------------------------
// Core transformation: unitary [[c, s], [-conj(s), conj(c)]] acting on
// coordinates (index, index+1), 0-based.

struct CoreTransformation {
  int index = 0;
  Complex c{1.0, 0.0};
  Complex s{0.0, 0.0};

  CoreTransformation adjoint() const { return {index, std::conj(c), -s}; }
  bool is_identity() const { return s == Complex(0.0) && c == Complex(1.0); }
};

// ---------------------------------------------------------------------------
// Upper Hessenberg storage. Entries below the first subdiagonal are exact
// zeros; every algorithm writes them explicitly rather than leaving round-off.

class UpperHessenberg {
 public:
  UpperHessenberg() = default;
  explicit UpperHessenberg(Eigen::Index m) : a_(Mat::Zero(m, m)) {}
  explicit UpperHessenberg(Mat m) : a_(std::move(m)) { enforce_structure(); }

  Eigen::Index dim() const { return a_.rows(); }
  const Mat& mat() const { return a_; }
  Mat& mat() { return a_; }

  // Writes exact zeros below the first subdiagonal; returns the Frobenius
  // norm of what was dropped.
  double enforce_structure() {
    double dropped = 0.0;
    const Eigen::Index m = a_.rows();
    for (Eigen::Index j = 0; j + 2 < m; ++j)
      for (Eigen::Index i = j + 2; i < m; ++i) {
        dropped += std::norm(a_(i, j));
        a_(i, j) = Complex(0.0);
      }
    return std::sqrt(dropped);
  }

  bool structurally_hessenberg() const {
    const Eigen::Index m = a_.rows();
    for (Eigen::Index j = 0; j + 2 < m; ++j)
      for (Eigen::Index i = j + 2; i < m; ++i)
        if (a_(i, j) != Complex(0.0)) return false;
    return true;
  }

 private:
  Mat a_;
};

// ---------------------------------------------------------------------------
// Hessenberg pencil (H, K). The i-th pole position is the subdiagonal pair
// (h(i+1,i), k(i+1,i)); its ratio encodes the i-th pole.

struct HessenbergPencil {
  UpperHessenberg h;
  UpperHessenberg k;

  Eigen::Index dim() const { return h.dim(); }
};

// A pole, stored projectively as (numerator, denominator); infinity is
// (1, 0) and never flows through arithmetic as a literal.
struct Pole {
  Complex num{1.0, 0.0};
  Complex den{0.0, 0.0};

  static Pole finite(Complex xi) { return {xi, Complex(1.0)}; }
  static Pole infinity() { return {Complex(1.0), Complex(0.0)}; }

  bool is_infinite() const { return den == Complex(0.0); }
  Complex value() const { return num / den; }
};

using PoleSet = std::vector<Pole>;

}  // namespace orthorec
