#include "orthorec/iep.hpp"

#include "orthorec/poly_downdate.hpp"
#include "orthorec/rational_downdate.hpp"

#include <cmath>
#include <string>

namespace orthorec {

void InnerProductSpec::validate(double distinct_tol) const {
  if (nodes.size() != weights.size())
    throw ConfigInvalid("node and weight counts differ");
  if (nodes.size() == 0) throw ConfigInvalid("empty inner product");
  if (weights.norm() == 0.0) throw ConfigInvalid("all weights are zero");
  double scale = nodes.cwiseAbs().maxCoeff();
  if (scale == 0.0) scale = 1.0;
  for (Eigen::Index i = 0; i < nodes.size(); ++i)
    for (Eigen::Index j = i + 1; j < nodes.size(); ++j)
      if (std::abs(nodes(i) - nodes(j)) <= distinct_tol * scale)
        throw DuplicateNode("nodes " + std::to_string(i) + " and " + std::to_string(j) +
                            " coincide");
}

namespace {

// Classical Gram-Schmidt with one full re-pass; returns the coefficients of v
// against the first n columns of q and replaces v by the orthogonal remainder.
Vec orthogonalize(const Mat& q, Eigen::Index n, Vec& v) {
  Vec t = q.leftCols(n).adjoint() * v;
  v -= q.leftCols(n) * t;
  Vec t2 = q.leftCols(n).adjoint() * v;
  v -= q.leftCols(n) * t2;
  t += t2;
  return t;
}

}  // namespace

HiepSolution solve_hiep(const InnerProductSpec& spec) {
  spec.validate();
  const Eigen::Index m = spec.size();
  HiepSolution sol;
  sol.nodes = spec.nodes;
  sol.weights = spec.weights;
  sol.q = Mat::Zero(m, m);
  Mat h = Mat::Zero(m, m);
  sol.q.col(0) = spec.weights / spec.weights.norm();
  for (Eigen::Index j = 0; j + 1 < m; ++j) {
    Vec v = spec.nodes.cwiseProduct(sol.q.col(j));
    const double before = v.norm();
    Vec t = orthogonalize(sol.q, j + 1, v);
    h.col(j).head(j + 1) = t;
    const double rem = v.norm();
    if (rem <= 1e3 * 0x1p-52 * before)
      throw Breakdown("Arnoldi breakdown at step " + std::to_string(j));
    h(j + 1, j) = rem;
    sol.q.col(j + 1) = v / rem;
  }
  Vec v = spec.nodes.cwiseProduct(sol.q.col(m - 1));
  h.col(m - 1) = sol.q.adjoint() * v;
  sol.h = UpperHessenberg(h);
  sol.h.enforce_structure();
  return sol;
}

HpiepSolution solve_hpiep(const InnerProductSpec& spec, const PoleSet& poles) {
  spec.validate();
  const Eigen::Index m = spec.size();
  if (static_cast<Eigen::Index>(poles.size()) != m - 1)
    throw ConfigInvalid("need m-1 poles for m nodes");
  HpiepSolution sol;
  sol.nodes = spec.nodes;
  sol.weights = spec.weights;
  sol.poles = poles;
  sol.q = Mat::Zero(m, m);
  Mat h = Mat::Zero(m, m);
  Mat k = Mat::Zero(m, m);
  sol.q.col(0) = spec.weights / spec.weights.norm();
  for (Eigen::Index j = 0; j + 1 < m; ++j) {
    const Pole& xi = poles[j];
    Vec v;
    if (xi.is_infinite()) {
      v = spec.nodes.cwiseProduct(sol.q.col(j));
    } else {
      const Complex x = xi.value();
      v = Vec(m);
      for (Eigen::Index i = 0; i < m; ++i) {
        const Complex d = spec.nodes(i) - x;
        if (d == Complex(0.0))
          throw PoleEqualsNode("pole " + std::to_string(j) + " equals node " +
                               std::to_string(i));
        v(i) = sol.q(i, j) / d;
      }
    }
    const double before = v.norm();
    Vec t = orthogonalize(sol.q, j + 1, v);
    const double rem = v.norm();
    if (rem <= 1e3 * 0x1p-52 * before)
      throw Breakdown("rational Arnoldi breakdown at step " + std::to_string(j));
    sol.q.col(j + 1) = v / rem;
    Vec tfull = Vec::Zero(m);
    tfull.head(j + 1) = t;
    tfull(j + 1) = rem;
    if (xi.is_infinite()) {
      // Z q_j = Q t  =>  H e_j = t, K e_j = e_j.
      h.col(j) = tfull;
      k(j, j) = 1.0;
    } else {
      // (Z - xi I)^-1 q_j = Q t  =>  Z Q t = Q (e_j + xi t).
      k.col(j) = tfull;
      h.col(j) = xi.value() * tfull;
      h(j, j) += 1.0;
    }
  }
  Vec v = spec.nodes.cwiseProduct(sol.q.col(m - 1));
  h.col(m - 1) = sol.q.adjoint() * v;
  k(m - 1, m - 1) = 1.0;
  sol.pencil.h = UpperHessenberg(h);
  sol.pencil.k = UpperHessenberg(k);
  sol.pencil.h.enforce_structure();
  sol.pencil.k.enforce_structure();
  return sol;
}

HpiepSolution solve_hpiep_by_updating(const InnerProductSpec& spec,
                                      const PoleSet& poles) {
  spec.validate();
  const Eigen::Index m = spec.size();
  if (static_cast<Eigen::Index>(poles.size()) != m - 1)
    throw ConfigInvalid("need m-1 poles for m nodes");
  HpiepSolution sol;
  sol.nodes = spec.nodes.head(1);
  sol.weights = spec.weights.head(1);
  sol.q = Mat::Ones(1, 1);
  sol.pencil.h = UpperHessenberg(Mat(spec.nodes.head(1).asDiagonal()));
  sol.pencil.k = UpperHessenberg(Mat(Mat::Ones(1, 1)));
  for (Eigen::Index i = 1; i < m; ++i)
    update_node(sol, spec.nodes(i), spec.weights(i), poles[i - 1]);
  return sol;
}

namespace {

// Embed (Q, nodes as original order) into the extended (m+1)-point problem
// with the new node appended. Places block diag(z_new, H) at the top and
// returns u = Q_e^H w' with exactly two leading nonzeros.
Mat extend_basis(const Mat& q, Complex /*z_new*/) {
  const Eigen::Index m = q.rows();
  Mat qe = Mat::Zero(m + 1, m + 1);
  qe.block(0, 1, m, m) = q;
  qe(m, 0) = 1.0;
  return qe;
}

// The real-c core convention realizes the new weight only up to a phase,
// which leaves the inner product unchanged but breaks the Q e_1 = w/||w||
// convention entrywise. Z is diagonal, so a diagonal phase similarity on the
// rows of Q restores the requested phases without touching H or K.
void restore_weight_phases(Mat& q, const Vec& w) {
  const double nw = w.norm();
  if (nw == 0.0) return;
  for (Eigen::Index i = 0; i < q.rows(); ++i) {
    const double have = std::abs(q(i, 0));
    const double want = std::abs(w(i));
    if (have == 0.0 || want == 0.0) continue;
    q.row(i) *= (w(i) / want) / (q(i, 0) / have);
  }
}

void check_new_node(const Vec& nodes, Complex z_new) {
  double scale = std::max(nodes.cwiseAbs().maxCoeff(), std::abs(z_new));
  if (scale == 0.0) scale = 1.0;
  for (Eigen::Index i = 0; i < nodes.size(); ++i)
    if (std::abs(nodes(i) - z_new) <= 1e-14 * scale)
      throw DuplicateNode("new node coincides with node " + std::to_string(i));
}

}  // namespace

void update_node(HiepSolution& sol, Complex z_new, Complex w_new) {
  check_new_node(sol.nodes, z_new);
  const Eigen::Index m = sol.q.rows();
  Mat qe = extend_basis(sol.q, z_new);
  Mat he = Mat::Zero(m + 1, m + 1);
  he(0, 0) = z_new;
  he.block(1, 1, m, m) = sol.h.mat();
  UpperHessenberg hext(he);
  Vec u = Vec::Zero(m + 1);
  u(0) = w_new;
  u(1) = sol.weights.norm();
  auto cores = restore_weight_structure(hext, u);
  for (const auto& c : cores) apply_core_right(c.adjoint(), qe);
  sol.q = std::move(qe);
  sol.h = std::move(hext);
  sol.nodes.conservativeResize(m + 1);
  sol.nodes(m) = z_new;
  sol.weights.conservativeResize(m + 1);
  sol.weights(m) = w_new;
  restore_weight_phases(sol.q, sol.weights);
}

void update_node(HpiepSolution& sol, Complex z_new, Complex w_new, const Pole& xi_new) {
  check_new_node(sol.nodes, z_new);
  if (!xi_new.is_infinite()) {
    for (Eigen::Index i = 0; i < sol.nodes.size(); ++i)
      if (sol.nodes(i) == xi_new.value())
        throw PoleEqualsNode("new pole equals node " + std::to_string(i));
    if (xi_new.value() == z_new) throw PoleEqualsNode("new pole equals new node");
  }
  const Eigen::Index m = sol.q.rows();
  Mat qe = extend_basis(sol.q, z_new);
  Mat he = Mat::Zero(m + 1, m + 1);
  Mat ke = Mat::Zero(m + 1, m + 1);
  he(0, 0) = z_new;
  ke(0, 0) = 1.0;
  he.block(1, 1, m, m) = sol.pencil.h.mat();
  ke.block(1, 1, m, m) = sol.pencil.k.mat();
  HessenbergPencil pe{UpperHessenberg(he), UpperHessenberg(ke)};

  // One core restores the weight constraint; the similarity keeps the
  // Hessenberg pair and plants a temporary pole z_new on the first position.
  Vec u = Vec::Zero(m + 1);
  u(0) = w_new;
  u(1) = sol.weights.norm();
  CoreTransformation c0 = make_core(u(0), u(1), 0);
  apply_core_left(c0, pe.h.mat());
  apply_core_left(c0, pe.k.mat());
  apply_core_right(c0.adjoint(), qe);

  // Chase the temporary pole down to the last position, then turn it into
  // the requested pole. Left swap cores act on rows >= 2, so the first
  // column of qe stays proportional to the extended weight vector.
  for (int i = 0; i + 1 < static_cast<int>(m); ++i) {
    EquivalenceCores eq = pole_swap(pe, i);
    if (!eq.left.is_identity()) apply_core_right(eq.left.adjoint(), qe);
  }
  change_last_pole(pe, xi_new);

  sol.q = std::move(qe);
  sol.pencil = std::move(pe);
  sol.nodes.conservativeResize(m + 1);
  sol.nodes(m) = z_new;
  sol.weights.conservativeResize(m + 1);
  sol.weights(m) = w_new;
  restore_weight_phases(sol.q, sol.weights);
  sol.poles.push_back(xi_new);
}

}  // namespace orthorec
