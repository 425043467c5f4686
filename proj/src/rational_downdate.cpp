#include "orthorec/rational_downdate.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include <Eigen/LU>

namespace orthorec {

namespace {

// Cross-product test for projective equality of two poles (a1:b1), (a2:b2).
bool poles_coincide(Complex a1, Complex b1, Complex a2, Complex b2) {
  const double cross = std::abs(a1 * b2 - a2 * b1);
  const double scale = std::abs(a1 * b2) + std::abs(a2 * b1);
  if (scale == 0.0) return true;
  return cross <= 1e-13 * scale;
}

Mat shifted(const HessenbergPencil& p, Complex z) {
  return p.h.mat() - z * p.k.mat();
}

// Trailing-weighted residual ratios (the eps-hat vector of the trailing
// accuracy conditions); x_0 := 0 extends the vector at the top.
Eigen::VectorXd trailing_ratios(const Vec& resid, const Vec& x) {
  const Eigen::Index m = x.size();
  Eigen::VectorXd tails(m + 1);
  tails(m) = 0.0;
  for (Eigen::Index i = m - 1; i >= 0; --i) tails(i) = tails(i + 1) + std::norm(x(i));
  Eigen::VectorXd eps(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double denom = std::sqrt(i == 0 ? tails(0) : tails(i - 1));
    eps(i) = denom > 0.0 ? std::abs(resid(i)) / denom
                         : (resid(i) == Complex(0.0) ? 0.0 : 1.0 / 0.0);
  }
  return eps;
}

// Shared trailing-accuracy kernel: restart inverse iteration from the
// trailing-weighted residual until ||eps_hat|| <= bound or cfg.n_ir rounds.
// residual() maps a candidate to its residual vector, iterate() to the next
// inverse-iteration image of a right-hand side.
template <typename ResidFn, typename IterFn>
Vec trailing_refine(Vec x, double bound, const RefinementConfig& cfg, double eps_mach,
                    ResidFn residual, IterFn iterate, double& achieved, int& rounds) {
  Vec resid = residual(x);
  double val = trailing_ratios(resid, x).norm();
  for (int round = 0; val > bound && round < cfg.n_ir; ++round) {
    const Eigen::Index m = x.size();
    Eigen::VectorXd tails(m + 1);
    tails(m) = 0.0;
    for (Eigen::Index i = m - 1; i >= 0; --i) tails(i) = tails(i + 1) + std::norm(x(i));
    const double floor_v = eps_mach * std::sqrt(tails(0));
    Vec b(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      const double denom = std::sqrt(i == 0 ? tails(0) : tails(i - 1));
      b(i) = resid(i) / std::max(denom, floor_v);
    }
    Vec cand = iterate(b);
    const double n = cand.norm();
    ++rounds;
    if (!(n > 0.0) || !cand.allFinite()) break;
    cand /= n;
    Vec cres = residual(cand);
    const double cval = trailing_ratios(cres, cand).norm();
    if (cval < val) {
      val = cval;
      x = std::move(cand);
      resid = std::move(cres);
    }
  }
  achieved = val;
  if (val > bound)
    throw TrailingAccuracyFailed("trailing accuracy " + sci(val) +
                                     " above bound " + sci(bound),
                                 val);
  return x;
}

}  // namespace

EquivalenceCores pole_swap(HessenbergPencil& p, int i) {
  const Eigen::Index m = p.dim();
  if (i < 0 || i + 2 >= m)
    throw IndexOutOfRange("pole swap at position " + std::to_string(i) + " of " +
                          std::to_string(m));
  Mat& h = p.h.mat();
  Mat& k = p.k.mat();
  const Complex a11 = h(i + 1, i), a12 = h(i + 1, i + 1), a22 = h(i + 2, i + 1);
  const Complex b11 = k(i + 1, i), b12 = k(i + 1, i + 1), b22 = k(i + 2, i + 1);
  if (poles_coincide(a11, b11, a22, b22))
    return {CoreTransformation{i + 1}, CoreTransformation{i}};

  // Null vector of the 2x2 subpencil shifted by the second pole; rotating it
  // into the first coordinate swaps the diagonal ratios.
  const Complex m11 = b22 * a11 - a22 * b11;
  const Complex m12 = b22 * a12 - a22 * b12;
  CoreTransformation s = make_core(m12, -m11, i);
  apply_core_right(s.adjoint(), h);
  apply_core_right(s.adjoint(), k);

  // The transformed first columns of the subpencil are parallel; one left
  // core annihilates the coupling in both matrices.
  const Complex hc1 = h(i + 1, i), hc2 = h(i + 2, i);
  const Complex kc1 = k(i + 1, i), kc2 = k(i + 2, i);
  const bool use_h = std::norm(hc1) + std::norm(hc2) >= std::norm(kc1) + std::norm(kc2);
  CoreTransformation r =
      use_h ? make_core(hc1, hc2, i + 1) : make_core(kc1, kc2, i + 1);
  apply_core_left(r, h);
  apply_core_left(r, k);
  h(i + 2, i) = Complex(0.0);
  k(i + 2, i) = Complex(0.0);
  return {r, s};
}

CoreTransformation change_last_pole(HessenbergPencil& p, const Pole& new_pole,
                                    bool allow_singular) {
  const Eigen::Index m = p.dim();
  if (m < 2) throw ConfigInvalid("pencil too small to change a pole");
  Mat& h = p.h.mat();
  Mat& k = p.k.mat();
  (void)allow_singular;
  const Complex hp = h(m - 1, m - 2), kp = k(m - 1, m - 2);
  if (poles_coincide(new_pole.num, new_pole.den, hp, kp))
    return CoreTransformation{static_cast<int>(m - 2)};

  // The new pole appears iff the trailing row of den*H - num*K gets a zero in
  // its subdiagonal position; one right core mixing the last two columns is
  // exactly determined by that. Poles above the last are untouched.
  const Complex a = new_pole.den * hp - new_pole.num * kp;
  const Complex b =
      new_pole.den * h(m - 1, m - 1) - new_pole.num * k(m - 1, m - 1);
  if (a == Complex(0.0) && b == Complex(0.0))
    throw ShiftIsEigenvalue("degenerate trailing row while changing the last pole");
  CoreTransformation s = make_core_right(a, b, static_cast<int>(m - 2));
  apply_core_right(s.adjoint(), h);
  apply_core_right(s.adjoint(), k);
  if (new_pole.is_infinite()) k(m - 1, m - 2) = Complex(0.0);
  return s;
}

CoreTransformation change_first_pole(HessenbergPencil& p, const Pole& new_pole) {
  const Eigen::Index m = p.dim();
  if (m < 2) throw ConfigInvalid("pencil too small to change a pole");
  Mat& h = p.h.mat();
  Mat& k = p.k.mat();
  const Complex hp = h(1, 0), kp = k(1, 0);
  if (poles_coincide(new_pole.num, new_pole.den, hp, kp)) return CoreTransformation{0};

  // Mirror of change_last_pole: one left core mixing the first two rows zeros
  // the subdiagonal position of the leading column of den*H - num*K.
  const Complex a = new_pole.den * h(0, 0) - new_pole.num * k(0, 0);
  const Complex b = new_pole.den * hp - new_pole.num * kp;
  if (a == Complex(0.0) && b == Complex(0.0))
    throw ShiftIsEigenvalue("degenerate leading column while changing the first pole");
  CoreTransformation r = make_core(a, b, 0);
  apply_core_left(r, h);
  apply_core_left(r, k);
  if (new_pole.is_infinite()) k(1, 0) = Complex(0.0);
  return r;
}

namespace {

// Deflate the leading 1x1 block of a pencil whose first columns are parallel
// with ratio close to the removed node. Returns the coupling magnitude left
// before the zeros are written. The deflating core lands in pre_cores.
double deflate_leading(HessenbergPencil& pw, std::vector<CoreTransformation>* cores,
                       const ToleranceConfig& tol, bool apply_core,
                       double resid_floor = 0.0) {
  Mat& h = pw.h.mat();
  Mat& k = pw.k.mat();
  if (apply_core) {
    const Complex hc1 = h(0, 0), hc2 = h(1, 0);
    const Complex kc1 = k(0, 0), kc2 = k(1, 0);
    const bool use_h = std::norm(hc1) + std::norm(hc2) >= std::norm(kc1) + std::norm(kc2);
    CoreTransformation r0 =
        use_h ? make_core(hc1, hc2, 0) : make_core(kc1, kc2, 0);
    apply_core_left(r0, h);
    apply_core_left(r0, k);
    if (cores) cores->push_back(r0);
  }
  const double ch = std::abs(h(1, 0));
  const double ck = std::abs(k(1, 0));
  // The coupling cannot be expected below the accuracy actually reached for
  // the deflating eigenvectors; callers with refined vectors pass that in.
  // Both couplings are judged against the scale of the pencil as a whole,
  // since (H, K) is only determined up to a common scaling.
  const double scale = std::max(h.norm(), k.norm());
  const double thr =
      tol.deflation_tol_factor * std::max(tol.eps_mach * scale, resid_floor);
  if (ch > thr || ck > thr)
    throw DeflationFailed("pencil couplings (" + sci(ch) + ", " +
                          sci(ck) + ") above thresholds");
  h(1, 0) = Complex(0.0);
  k(1, 0) = Complex(0.0);
  return std::max(ch, ck);
}

HessenbergPencil trailing_block(const HessenbergPencil& pw) {
  const Eigen::Index m = pw.dim();
  return {UpperHessenberg(Mat(pw.h.mat().block(1, 1, m - 1, m - 1))),
          UpperHessenberg(Mat(pw.k.mat().block(1, 1, m - 1, m - 1)))};
}

}  // namespace

PencilDowndateOutcome downdate_implicit_rqz(const HessenbergPencil& p, const Vec& weight,
                                            const PencilDowndateRequest& req) {
  (void)weight;
  const Eigen::Index m = p.dim();
  if (m < 2) throw ConfigInvalid("cannot downdate a pencil of dimension < 2");
  if (req.target_pole_index + 2 > static_cast<std::size_t>(m))
    throw ConfigInvalid("pole index out of range");
  if (!is_proper_pencil(p, req.tol.properness_tol))
    throw NotProper("implicit RQZ downdate requires a proper pencil");

  PencilDowndateOutcome out;
  HessenbergPencil pw = p;
  auto push_left = [&](const CoreTransformation& c) {
    if (!c.is_identity()) out.pre_cores.push_back(c);
  };

  for (std::size_t j = req.target_pole_index; j + 2 < static_cast<std::size_t>(m); ++j) {
    EquivalenceCores eq = pole_swap(pw, static_cast<int>(j));
    push_left(eq.left);
    out.right_cores.push_back(eq.right);
  }
  out.right_cores.push_back(
      change_last_pole(pw, Pole::finite(req.node), /*allow_singular=*/true));
  for (Eigen::Index j = m - 3; j >= 0; --j) {
    EquivalenceCores eq = pole_swap(pw, static_cast<int>(j));
    push_left(eq.left);
    out.right_cores.push_back(eq.right);
  }
  out.deflation_residual = deflate_leading(pw, &out.pre_cores, req.tol, true);
  out.reduced = trailing_block(pw);
  out.consumed_pole = req.target_pole_index;
  return out;
}

Vec left_eigenvector_from_orf(const HessenbergPencil& p, const Vec& w, Complex node,
                              const RefinementConfig& cfg, const ToleranceConfig& tol,
                              PencilDowndateDiagnostics* diag) {
  const Eigen::Index m = p.dim();
  const Mat& h = p.h.mat();
  const Mat& k = p.k.mat();
  Vec q(m);
  q(0) = Complex(1.0 / w.norm());
  for (Eigen::Index j = 0; j + 1 < m; ++j) {
    Complex acc(0.0);
    for (Eigen::Index i = 0; i <= j; ++i) acc += q(i) * (h(i, j) - node * k(i, j));
    const Complex sub = h(j + 1, j) - node * k(j + 1, j);
    if (sub == Complex(0.0))
      throw RecurrenceBreakdown("node hits the pole at position " + std::to_string(j));
    q(j + 1) = -acc / sub;
    const double mag = std::abs(q(j + 1));
    if (mag > 1e140) q.head(j + 2) /= mag;
  }
  Vec r = q.conjugate();
  r.normalize();

  Mat mm = shifted(p, node);
  const double norm2 = spectral_norm_est(mm);
  const double bound = tol.evec_residual_factor * tol.eps_mach * norm2;
  double best_res = (mm.adjoint() * r).norm();
  if (best_res > bound && cfg.n_ir > 0) {
    HessenbergSolver solver(UpperHessenberg(Mat(mm)), tol.eps_mach * mm.norm());
    Vec x = r;
    int rounds = 0;
    while (rounds < cfg.n_ir) {
      for (int b = 0; b < cfg.batch && rounds < cfg.n_ir; ++b, ++rounds) {
        Vec y = solver.solve_adjoint(x);
        const double n = y.norm();
        if (!(n > 0.0) || !y.allFinite())
          throw SingularSolve("left refinement produced a non-finite vector");
        x = y / n;
      }
      const double res = (mm.adjoint() * x).norm();
      if (res < best_res) {
        best_res = res;
        r = x;
      }
      if (best_res <= bound) break;
    }
    if (diag) diag->refinement_rounds += rounds;
  }
  if (diag) {
    diag->left_residual = norm2 > 0.0 ? best_res / norm2 : 0.0;
    diag->left_bound = tol.evec_residual_factor * tol.eps_mach;
  }
  return r;
}

Vec right_eigenvector(const HessenbergPencil& p, Complex node, const RefinementConfig& cfg,
                      const ToleranceConfig& tol, PencilDowndateDiagnostics& diag) {
  const Eigen::Index m = p.dim();
  if (m == 1) return Vec::Ones(1);
  // After the left reduction the pencil carries a second subdiagonal, so a
  // dense factorization is used; the diagonal is nudged off the (perfectly
  // shifted) spectrum to keep the solves finite.
  Mat mm = shifted(p, node);
  const double norm2 = spectral_norm_est(mm);
  const double bound = tol.evec_residual_factor * tol.eps_mach * norm2;
  Mat reg = mm;
  reg.diagonal().array() += tol.eps_mach * mm.norm();
  Eigen::PartialPivLU<Mat> lu(reg);

  Vec s = Vec::Ones(m) / std::sqrt(double(m));
  double best_res = 1.0 / 0.0;
  Vec best = s;
  const int iters = std::max(2, cfg.n_ir + 1);
  for (int it = 0; it < iters; ++it) {
    Vec y = lu.solve(s);
    const double n = y.norm();
    if (!(n > 0.0) || !y.allFinite())
      throw ConvergenceFailure("right eigenvector iteration produced a non-finite vector");
    s = y / n;
    const double res = (mm * s).norm();
    if (res < best_res) {
      best_res = res;
      best = s;
    }
    if (best_res <= bound) break;
  }
  diag.right_residual = norm2 > 0.0 ? best_res / norm2 : 0.0;
  diag.right_bound = tol.evec_residual_factor * tol.eps_mach;
  return best;
}

PencilDowndateOutcome downdate_eigenvector_pencil(const HessenbergPencil& p,
                                                  const Vec& weight,
                                                  const PencilDowndateRequest& req) {
  const Eigen::Index m = p.dim();
  if (m < 2) throw ConfigInvalid("cannot downdate a pencil of dimension < 2");
  if (req.target_pole_index + 2 > static_cast<std::size_t>(m))
    throw ConfigInvalid("pole index out of range");
  if (!is_proper_pencil(p, req.tol.properness_tol))
    throw NotProper("pencil eigenvector downdate requires a proper pencil");

  PencilDowndateOutcome out;
  HessenbergPencil pw = p;
  // The sweep consumes the pole on the last position; bring the requested
  // one there first.
  for (std::size_t j = req.target_pole_index; j + 2 < static_cast<std::size_t>(m); ++j) {
    EquivalenceCores eq = pole_swap(pw, static_cast<int>(j));
    if (!eq.left.is_identity()) out.pre_cores.push_back(eq.left);
    out.right_cores.push_back(eq.right);
  }

  Mat& h = pw.h.mat();
  Mat& k = pw.k.mat();
  const double hk_min = std::min(h.norm(), k.norm());

  Vec r = left_eigenvector_from_orf(pw, weight, req.node, req.refinement, req.tol,
                                    &out.diagnostics);
  {
    Mat mm = shifted(pw, req.node);
    HessenbergSolver solver(UpperHessenberg(Mat(mm)), req.tol.eps_mach * mm.norm());
    out.diagnostics.left_trailing = 0.0;
    out.diagnostics.left_trailing_bound = req.tol.eps_mach * hk_min;
    try {
      r = trailing_refine(
          Vec(r), req.tol.eps_mach * hk_min, req.refinement, req.tol.eps_mach,
          [&](const Vec& x) { return Vec(mm.adjoint() * x); },
          [&](const Vec& b) { return solver.solve_adjoint(b); },
          out.diagnostics.left_trailing, out.diagnostics.refinement_rounds);
    } catch (const TrailingAccuracyFailed&) {
      // Recorded in the diagnostics; deflation decides whether this is fatal.
    }
  }
  // Reduce the left eigenvector to e_1; each core leaves one negligible
  // below-subdiagonal fill in both matrices which is dropped.
  Vec y = r;
  for (Eigen::Index i = m - 2; i >= 0; --i) {
    const Complex a = y(i), b = y(i + 1);
    CoreTransformation g = (a == Complex(0.0) && b == Complex(0.0))
                               ? CoreTransformation{static_cast<int>(i)}
                               : make_core(a, b, static_cast<int>(i));
    apply_core_left(g, y);
    y(i + 1) = Complex(0.0);
    // A second subdiagonal fills in; it is genuine (R^H H is lower bandwidth
    // two) and only the right-core sweep removes it.
    apply_core_left(g, h);
    apply_core_left(g, k);
    out.pre_cores.push_back(g);
  }

  Vec s = right_eigenvector(pw, req.node, req.refinement, req.tol, out.diagnostics);
  {
    Mat mm = shifted(pw, req.node);
    Mat reg = mm;
    reg.diagonal().array() += req.tol.eps_mach * mm.norm();
    Eigen::PartialPivLU<Mat> lu(reg);
    const double bound = req.tol.eps_mach * std::min(h.norm(), k.norm());
    out.diagnostics.right_trailing = 0.0;
    out.diagnostics.right_trailing_bound = bound;
    try {
      s = trailing_refine(
          Vec(s), bound, req.refinement, req.tol.eps_mach,
          [&](const Vec& x) { return Vec(mm * x); },
          [&](const Vec& b) { return lu.solve(b); },
          out.diagnostics.right_trailing, out.diagnostics.refinement_rounds);
    } catch (const TrailingAccuracyFailed&) {
    }
  }
  // Reduce the right eigenvector to e_1 with right cores (column side only;
  // the basis is untouched).
  Vec ys = s;
  for (Eigen::Index i = m - 2; i >= 0; --i) {
    const Complex a = ys(i), b = ys(i + 1);
    CoreTransformation g = (a == Complex(0.0) && b == Complex(0.0))
                               ? CoreTransformation{static_cast<int>(i)}
                               : make_core(a, b, static_cast<int>(i));
    apply_core_left(g, ys);
    ys(i + 1) = Complex(0.0);
    apply_core_right(g.adjoint(), h);
    apply_core_right(g.adjoint(), k);
    if (i + 2 < m) {
      h(i + 2, i) = Complex(0.0);
      k(i + 2, i) = Complex(0.0);
    }
    out.right_cores.push_back(g);
  }

  try {
    const double resid = std::max(out.diagnostics.left_trailing,
                                  out.diagnostics.right_trailing);
    out.deflation_residual = deflate_leading(pw, nullptr, req.tol, false, resid);
  } catch (const DeflationFailed& e) {
    throw Breakdown(std::string("pencil eigenvector downdate: ") + e.what());
  }
  out.reduced = trailing_block(pw);
  out.consumed_pole = req.target_pole_index;
  return out;
}

PencilDowndateOutcome downdate_pencil(const HessenbergPencil& p, const Vec& weight,
                                      const PencilDowndateRequest& req) {
  return req.method == PencilMethod::implicit_rqz
             ? downdate_implicit_rqz(p, weight, req)
             : downdate_eigenvector_pencil(p, weight, req);
}

}  // namespace orthorec
