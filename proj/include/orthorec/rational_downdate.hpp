#pragma once

#include "orthorec/core_linalg.hpp"
#include "orthorec/poly_downdate.hpp"
#include "orthorec/types.hpp"

#include <cstddef>
#include <vector>

namespace orthorec {

enum class PencilMethod { implicit_rqz, eigenvector };

struct PencilDowndateRequest {
  Complex node;                     // node to remove
  std::size_t target_pole_index = 0;  // 0-based pole position to remove
  PencilMethod method = PencilMethod::implicit_rqz;
  RefinementConfig refinement;
  ToleranceConfig tol;
};

struct PencilDowndateDiagnostics {
  double left_residual = 0.0;       // ||r^H (H - z K)|| / ||H - z K||_2
  double left_bound = 0.0;          // residual test right-hand side
  double left_trailing = 0.0;       // trailing-weighted residual for r
  double left_trailing_bound = 0.0;
  double right_residual = 0.0;      // ||(H - z K) s|| / ||H - z K||_2
  double right_bound = 0.0;
  double right_trailing = 0.0;      // trailing-weighted residual for s
  double right_trailing_bound = 0.0;
  int refinement_rounds = 0;
};

// Result of removing one node and one pole from an m x m Hessenberg pencil.
// Only left cores act on the basis: Q <- Q C^H in order, pre_cores before
// deflation, post_cores on the reduced pencil. Right cores are recorded for
// unitarity checks.
struct PencilDowndateOutcome {
  HessenbergPencil reduced;
  std::vector<CoreTransformation> pre_cores;
  std::vector<CoreTransformation> post_cores;
  std::vector<CoreTransformation> right_cores;
  double deflation_residual = 0.0;
  std::size_t consumed_pole = 0;  // pole position removed from the pole list
  PencilDowndateDiagnostics diagnostics;
};

struct EquivalenceCores {
  CoreTransformation left;   // rows (i+1, i+2)
  CoreTransformation right;  // cols (i, i+1)
};

// Swap the poles at positions i and i+1 (0-based subdiagonal indices) by an
// equivalence built from the 2x2 subpencil at rows (i+1, i+2), cols (i, i+1).
// Falls back to identity cores when the two poles coincide within relative
// 1e-13.
EquivalenceCores pole_swap(HessenbergPencil& p, int i);

// Replace the pole at the last position by new_pole with one right core; the
// basis Q is untouched. With allow_singular the near-singular trailing solve
// (new pole equal to an eigenvalue, the perfect-shift case) is regularized
// instead of raising ShiftIsEigenvalue.
CoreTransformation change_last_pole(HessenbergPencil& p, const Pole& new_pole,
                                    bool allow_singular = false);

// Replace the pole at the first position with one left core.
CoreTransformation change_first_pole(HessenbergPencil& p, const Pole& new_pole);

// Implicit RQZ downdate: swap the target pole to the last position, change it
// to the removed node, chase that pole to the front and deflate with one final
// left core. weight = current weight vector (norm restores the constraint if a
// second sweep is needed).
PencilDowndateOutcome downdate_implicit_rqz(const HessenbergPencil& p, const Vec& weight,
                                            const PencilDowndateRequest& req);

// Left eigenvector of (H, K) at the node: r_i = conj(phi_i(z)) from the
// rational function recurrence, refined until (eq. quality) holds or cfg.n_ir
// rounds are spent. Condition traces land in diag when given.
Vec left_eigenvector_from_orf(const HessenbergPencil& p, const Vec& w, Complex node,
                              const RefinementConfig& cfg = {},
                              const ToleranceConfig& tol = {},
                              PencilDowndateDiagnostics* diag = nullptr);

// Right null vector of (H - z K) by inverse iteration on the (already
// left-transformed) pencil.
Vec right_eigenvector(const HessenbergPencil& p, Complex node, const RefinementConfig& cfg,
                      const ToleranceConfig& tol, PencilDowndateDiagnostics& diag);

// Pencil eigenvector method: reduce the trailing-accurate left eigenvector to
// e_1 with left cores, then the right eigenvector of the transformed pencil to
// e_1 with right cores, and deflate the isolated (1,1) block. Consumes the
// pole at the requested position (swapped to the last position first).
PencilDowndateOutcome downdate_eigenvector_pencil(const HessenbergPencil& p,
                                                  const Vec& weight,
                                                  const PencilDowndateRequest& req);

// Dispatch on req.method.
PencilDowndateOutcome downdate_pencil(const HessenbergPencil& p, const Vec& weight,
                                      const PencilDowndateRequest& req);

}  // namespace orthorec
