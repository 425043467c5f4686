#pragma once

#include "orthorec/core_linalg.hpp"
#include "orthorec/types.hpp"

namespace orthorec {

// Nodes z_i and weights w_i of the discrete inner product
// <f,g> = sum |w_i|^2 conj(g(z_i)) f(z_i).
struct InnerProductSpec {
  Vec nodes;
  Vec weights;

  Eigen::Index size() const { return nodes.size(); }
  void validate(double distinct_tol = 1e-14) const;
};

struct HiepSolution {
  Mat q;             // m x m unitary, Q e_1 = w / ||w||
  UpperHessenberg h;
  Vec nodes;         // aligned with the rows of q
  Vec weights;
};

struct HpiepSolution {
  Mat q;
  HessenbergPencil pencil;
  Vec nodes;
  Vec weights;
  PoleSet poles;  // poles[i] realized at pole position i
};

// Problem 1: Arnoldi on diag(nodes) started from w/||w||, with one full
// classical Gram-Schmidt re-pass per step.
HiepSolution solve_hiep(const InnerProductSpec& spec);

// Problem 3: rational Arnoldi on diag(nodes); step i applies (Z - xi_i I)^-1
// for finite poles and Z for infinite poles.
HpiepSolution solve_hpiep(const InnerProductSpec& spec, const PoleSet& poles);

// Same problem solved by adding the nodes one at a time via update_node. The
// unitary construction keeps K well conditioned, which rational Arnoldi does
// not guarantee; preferred as the starting point for downdating runs.
HpiepSolution solve_hpiep_by_updating(const InnerProductSpec& spec,
                                      const PoleSet& poles);

// Append one node (and pole) to an existing solution. The new node is added
// at the end of the node list; for pencils the new pole ends up on the last
// pole position.
void update_node(HiepSolution& sol, Complex z_new, Complex w_new);
void update_node(HpiepSolution& sol, Complex z_new, Complex w_new, const Pole& xi_new);

}  // namespace orthorec
