#include "orthorec/poly_downdate.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

namespace orthorec {

namespace {

HessenbergSolver shifted_solver(const UpperHessenberg& h, Complex z,
                                const ToleranceConfig& tol) {
  Mat m = h.mat();
  m.diagonal().array() -= z;
  return HessenbergSolver(UpperHessenberg(std::move(m)), tol.eps_mach * h.mat().norm());
}

Vec shifted_residual(const UpperHessenberg& h, Complex z, const Vec& x) {
  Vec r = h.mat() * x - z * x;
  return r;
}

// The trailing-weighted residual ratios of condition (eq:cond_47):
// eps_i = |((H - z I) x)_i| / ||(x_{i-1}, ..., x_m)||_2 with x_0 := 0.
Eigen::VectorXd trailing_ratios(const Vec& resid, const Vec& x) {
  const Eigen::Index m = x.size();
  Eigen::VectorXd eps(m);
  double tail = 0.0;  // ||x_{i:m}||^2 built from the bottom
  Eigen::VectorXd tails(m + 1);
  tails(m) = 0.0;
  for (Eigen::Index i = m - 1; i >= 0; --i) {
    tail += std::norm(x(i));
    tails(i) = tail;
  }
  for (Eigen::Index i = 0; i < m; ++i) {
    const double denom = std::sqrt(i == 0 ? tails(0) : tails(i - 1));
    eps(i) = denom > 0.0 ? std::abs(resid(i)) / denom
                         : (resid(i) == Complex(0.0) ? 0.0 : 1.0 / 0.0);
  }
  return eps;
}

// One RQ step with shift z, formed explicitly as Qhat * R + z I. Returns the
// cores of Qhat = C_0 ... C_{m-2} and |r_11|.
std::pair<std::vector<CoreTransformation>, double> explicit_rq_step(
    UpperHessenberg& h, Complex z, const ToleranceConfig& tol) {
  auto f = rq_factorize_shifted(h, z, tol);
  const double r11 = std::abs(f.r(0, 0));
  Mat m = std::move(f.r);
  for (auto it = f.cores.rbegin(); it != f.cores.rend(); ++it) apply_core_left(*it, m);
  m.diagonal().array() += z;
  h = UpperHessenberg(std::move(m));
  return {std::move(f.cores), r11};
}

// Same step executed as a bulge chase seeded from the trailing row of H - zI.
std::pair<std::vector<CoreTransformation>, double> implicit_rq_step(
    UpperHessenberg& h, Complex z, const ToleranceConfig&) {
  Mat& a = h.mat();
  const Eigen::Index m = a.rows();
  std::vector<CoreTransformation> cores(m - 1);
  const Complex v1 = a(m - 1, m - 2), v2 = a(m - 1, m - 1) - z;
  CoreTransformation c = (v1 == Complex(0.0) && v2 == Complex(0.0))
                             ? CoreTransformation{static_cast<int>(m - 2)}
                             : make_core_right(v1, v2, static_cast<int>(m - 2));
  apply_core_left(c, a);
  apply_core_right(c.adjoint(), a);
  cores[m - 2] = c;
  // The similarity put one bulge on the second subdiagonal; each chase core
  // removes it one row higher and plants the next one.
  for (Eigen::Index i = m - 3; i >= 0; --i) {
    const Complex b1 = a(i + 2, i), b2 = a(i + 2, i + 1);
    CoreTransformation g = (b1 == Complex(0.0) && b2 == Complex(0.0))
                               ? CoreTransformation{static_cast<int>(i)}
                               : make_core_right(b1, b2, static_cast<int>(i));
    apply_core_right(g.adjoint(), a);
    a(i + 2, i) = Complex(0.0);
    apply_core_left(g, a);
    cores[i] = g;
  }
  return {std::move(cores), 0.0};
}

DowndateOutcome matrix_downdate(const UpperHessenberg& h, const DowndateRequest& req,
                                bool implicit) {
  const Eigen::Index m = h.dim();
  if (m < 2) throw ConfigInvalid("cannot downdate a matrix of dimension < 2");
  if (req.steps != 1 && req.steps != 2) throw ConfigInvalid("steps must be 1 or 2");
  if (!is_proper(h, req.tol.properness_tol))
    throw NotProper("matrix downdate requires a proper Hessenberg matrix");

  const double thr = req.tol.deflation_tol_factor * req.tol.eps_mach * h.mat().norm();
  UpperHessenberg hw = h;
  DowndateOutcome out;
  auto step = implicit ? implicit_rq_step : explicit_rq_step;

  auto [cores1, r11] = step(hw, req.node, req.tol);
  out.diagnostics.shifted_r11 = r11;
  out.diagnostics.steps_taken = 1;
  // Image of the weight direction under the similarity: t = Qhat e_1.
  Vec t = Vec::Unit(m, 0);
  for (auto it = cores1.rbegin(); it != cores1.rend(); ++it) apply_core_left(*it, t);
  for (auto it = cores1.rbegin(); it != cores1.rend(); ++it) out.pre_cores.push_back(*it);

  double eps = std::abs(hw.mat()(1, 0));
  if (eps > thr && req.steps >= 2) {
    auto [cores2, r11b] = step(hw, req.node, req.tol);
    (void)r11b;
    out.diagnostics.steps_taken = 2;
    for (auto it = cores2.rbegin(); it != cores2.rend(); ++it) apply_core_left(*it, t);
    for (auto it = cores2.rbegin(); it != cores2.rend(); ++it)
      out.pre_cores.push_back(*it);
    eps = std::abs(hw.mat()(1, 0));
  }
  if (eps > thr)
    throw DeflationFailed("coupling " + sci(eps) + " above threshold " +
                          sci(thr));
  out.deflation_residual = eps;
  out.h_reduced = UpperHessenberg(Mat(hw.mat().block(1, 1, m - 1, m - 1)));

  if (out.diagnostics.steps_taken == 2) {
    // The second step spread the weight image over three entries; after
    // deflation two remain and the structure must be restored.
    Vec u = t.tail(m - 1);
    if (m > 3) u.tail(m - 3).setZero();
    out.post_cores = restore_weight_structure(out.h_reduced, u);
  }
  return out;
}

}  // namespace

std::vector<CoreTransformation> restore_weight_structure(UpperHessenberg& h, Vec& v) {
  const Eigen::Index m = h.dim();
  if (v.size() != m) throw ConfigInvalid("weight image size does not match matrix");
  std::vector<CoreTransformation> cores;
  if (m < 2 || v(1) == Complex(0.0)) return cores;
  CoreTransformation t0 = make_core(v(0), v(1), 0);
  apply_core_left(t0, v);
  v(1) = Complex(0.0);
  apply_core_left(t0, h.mat());
  apply_core_right(t0.adjoint(), h.mat());
  cores.push_back(t0);
  for (Eigen::Index i = 1; i + 1 < m; ++i) {
    const Complex a = h.mat()(i, i - 1), b = h.mat()(i + 1, i - 1);
    if (b == Complex(0.0)) break;
    CoreTransformation g = make_core(a, b, static_cast<int>(i));
    apply_core_left(g, h.mat());
    h.mat()(i + 1, i - 1) = Complex(0.0);
    apply_core_right(g.adjoint(), h.mat());
    cores.push_back(g);
  }
  return cores;
}

DowndateOutcome downdate_explicit(const UpperHessenberg& h, const DowndateRequest& req) {
  return matrix_downdate(h, req, false);
}

DowndateOutcome downdate_implicit(const UpperHessenberg& h, const DowndateRequest& req) {
  return matrix_downdate(h, req, true);
}

Vec eigenvector_from_recurrence(const UpperHessenberg& h, const Vec& w, Complex node) {
  const Eigen::Index m = h.dim();
  Vec p(m);
  p(0) = Complex(1.0 / w.norm());
  for (Eigen::Index j = 0; j + 1 < m; ++j) {
    Complex acc = node * p(j);
    for (Eigen::Index i = 0; i <= j; ++i) acc -= h.mat()(i, j) * p(i);
    const Complex sub = h.mat()(j + 1, j);
    if (sub == Complex(0.0))
      throw RecurrenceBreakdown("zero subdiagonal at position " + std::to_string(j));
    p(j + 1) = acc / sub;
    // Rescale to dodge overflow; only the direction matters.
    const double mag = std::abs(p(j + 1));
    if (mag > 1e140) p.head(j + 2) /= mag;
  }
  Vec x = p.conjugate();
  x.normalize();
  return x;
}

Vec iterative_refinement(const UpperHessenberg& h, Complex node, Vec x,
                         const RefinementConfig& cfg, const ToleranceConfig& tol,
                         DowndateDiagnostics& diag) {
  Mat shifted = h.mat();
  shifted.diagonal().array() -= node;
  const double norm2 = spectral_norm_est(shifted);
  const double bound = tol.evec_residual_factor * tol.eps_mach * norm2;
  diag.evec_bound = tol.evec_residual_factor * tol.eps_mach;

  double best_res = shifted_residual(h, node, x).norm();
  if (best_res <= bound || cfg.n_ir <= 0) {
    diag.evec_residual = norm2 > 0.0 ? best_res / norm2 : 0.0;
    return x;
  }
  HessenbergSolver solver = shifted_solver(h, node, tol);
  Vec best = x;
  int rounds = 0;
  while (rounds < cfg.n_ir) {
    for (int b = 0; b < cfg.batch && rounds < cfg.n_ir; ++b, ++rounds) {
      Vec y = solver.solve(x);
      const double n = y.norm();
      if (!(n > 0.0) || !y.allFinite())
        throw SingularSolve("inverse iteration produced a non-finite vector");
      x = y / n;
    }
    const double res = shifted_residual(h, node, x).norm();
    if (res < best_res) {
      best_res = res;
      best = x;
    }
    if (best_res <= bound) break;
  }
  diag.refinement_rounds += rounds;
  diag.evec_residual = norm2 > 0.0 ? best_res / norm2 : 0.0;
  return best;
}

// Candidate eigenvector from the backward recurrence: rows m..2 of
// (H - node I)x = 0 are solved upwards from x_m = 1, so the residual is
// concentrated in the first row. The trailing ratios of eq:cond_47 weight
// exactly those rows, which makes this the natural trailing-accurate start.
Vec eigenvector_backward(const UpperHessenberg& h, Complex node) {
  const Eigen::Index m = h.dim();
  Vec x = Vec::Zero(m);
  x(m - 1) = Complex(1.0);
  for (Eigen::Index i = m - 1; i >= 1; --i) {
    Complex acc = node * x(i);
    for (Eigen::Index j = i; j < m; ++j) acc -= h.mat()(i, j) * x(j);
    const Complex sub = h.mat()(i, i - 1);
    if (sub == Complex(0.0))
      throw RecurrenceBreakdown("zero subdiagonal at position " +
                                std::to_string(i - 1));
    x(i - 1) = acc / sub;
    const double mag = std::abs(x(i - 1));
    if (mag > 1e140) x.tail(m - i + 1) /= mag;
  }
  x.normalize();
  return x;
}

Vec trailing_accurate_eigenvector(const UpperHessenberg& h, Complex node, Vec x,
                                  const RefinementConfig& cfg, const ToleranceConfig& tol,
                                  DowndateDiagnostics& diag) {
  const double bound = tol.eps_mach * h.mat().norm();
  diag.trailing_bound = bound;
  Vec resid = shifted_residual(h, node, x);
  double val = trailing_ratios(resid, x).norm();
  if (val <= bound) {
    diag.trailing_residual = val;
    return x;
  }
  try {
    Vec back = eigenvector_backward(h, node);
    // The backward vector is only trusted when it points the same way as the
    // refined eigenvector; with an inaccurate seed there is no way to tell
    // which eigenvalue it latched onto.
    if (std::abs(x.dot(back)) >= 0.5) {
      Vec bres = shifted_residual(h, node, back);
      const double bval = trailing_ratios(bres, back).norm();
      if (bval < val) {
        val = bval;
        x = back;
        resid = bres;
      }
    }
  } catch (const RecurrenceBreakdown&) {
    // Keep the forward vector; the refinement below may still succeed.
  }
  if (val <= bound) {
    diag.trailing_residual = val;
    return x;
  }
  HessenbergSolver solver = shifted_solver(h, node, tol);
  for (int round = 0; round < cfg.n_ir; ++round) {
    // Restart inverse iteration from the residual weighted by the trailing
    // norms, so the correction targets the entries that fail (eq:cond_47).
    Vec b(x.size());
    double tail = 0.0;
    const Eigen::Index m = x.size();
    Eigen::VectorXd tails(m + 1);
    tails(m) = 0.0;
    for (Eigen::Index i = m - 1; i >= 0; --i) {
      tail += std::norm(x(i));
      tails(i) = tail;
    }
    const double floor_v = tol.eps_mach * std::sqrt(tails(0));
    for (Eigen::Index i = 0; i < m; ++i) {
      const double denom = std::sqrt(i == 0 ? tails(0) : tails(i - 1));
      b(i) = resid(i) / std::max(denom, floor_v);
    }
    Vec cand = solver.solve(b);
    const double n = cand.norm();
    if (!(n > 0.0) || !cand.allFinite()) break;
    cand /= n;
    Vec cres = shifted_residual(h, node, cand);
    const double cval = trailing_ratios(cres, cand).norm();
    diag.refinement_rounds += 1;
    if (cval < val) {
      val = cval;
      x = cand;
      resid = cres;
    }
    if (val <= bound) {
      diag.trailing_residual = val;
      return x;
    }
  }
  // A miss is not fatal by itself: proceed with the best vector found and
  // let the deflation check after the similarity decide.
  diag.trailing_residual = val;
  return x;
}

DowndateOutcome downdate_eigenvector(const UpperHessenberg& h, const Vec& w,
                                     const DowndateRequest& req) {
  const Eigen::Index m = h.dim();
  if (m < 2) throw ConfigInvalid("cannot downdate a matrix of dimension < 2");
  if (!is_proper(h, req.tol.properness_tol))
    throw NotProper("eigenvector downdate requires a proper Hessenberg matrix");

  DowndateOutcome out;
  Vec x = eigenvector_from_recurrence(h, w, req.node);
  x = iterative_refinement(h, req.node, std::move(x), req.refinement, req.tol,
                           out.diagnostics);
  x = trailing_accurate_eigenvector(h, req.node, std::move(x), req.refinement, req.tol,
                                    out.diagnostics);

  UpperHessenberg hw = h;
  Vec y = x;
  for (Eigen::Index i = m - 2; i >= 0; --i) {
    const Complex a = y(i), b = y(i + 1);
    CoreTransformation g = (a == Complex(0.0) && b == Complex(0.0))
                               ? CoreTransformation{static_cast<int>(i)}
                               : make_core(a, b, static_cast<int>(i));
    apply_core_left(g, y);
    y(i + 1) = Complex(0.0);
    apply_core_left(g, hw.mat());
    apply_core_right(g.adjoint(), hw.mat());
    // The similarity plants one bulge below the subdiagonal; it is of the
    // order of the trailing residual and is dropped.
    if (i + 2 < m) hw.mat()(i + 2, i) = Complex(0.0);
    out.pre_cores.push_back(g);
  }
  const double thr = req.tol.deflation_tol_factor * req.tol.eps_mach * h.mat().norm();
  const double eps = std::abs(hw.mat()(1, 0));
  if (eps > thr)
    throw DeflationFailed("coupling " + sci(eps) + " above threshold " +
                          sci(thr));
  out.deflation_residual = eps;
  out.h_reduced = UpperHessenberg(Mat(hw.mat().block(1, 1, m - 1, m - 1)));
  return out;
}

}  // namespace orthorec
