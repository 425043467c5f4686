#pragma once

#include <vector>

#include "orthorec/downdate_driver.hpp"
#include "orthorec/iep.hpp"

namespace orthorec {

// Least-squares approximant g(z) = sum_d alpha_d r_d(z) in the orthonormal
// basis generated by the recurrence matrix or pencil.
struct ApproximantModel {
    Vec coefficients;  // alpha_0 .. alpha_{n-1}
    int degree = 0;    // n
    double weight_norm = 0.0;
    bool rational = false;
    UpperHessenberg h;      // polynomial basis source
    HessenbergPencil pencil;  // rational basis source
};

// Values r_0(z) .. r_{n-1}(z) of the orthonormal basis functions, obtained by
// running the recurrence. r_0 = 1/||w||.
Vec evaluate_basis(const UpperHessenberg& h, double weight_norm, Complex z, int n);
Vec evaluate_basis(const HessenbergPencil& p, double weight_norm, Complex z, int n);

// alpha = Q_n^H (w .* f).
ApproximantModel lsq_fit(const HiepSolution& sol, const Vec& f_values, int n);
ApproximantModel lsq_fit(const HpiepSolution& sol, const Vec& f_values, int n);

Complex evaluate_model(const ApproximantModel& model, Complex z);

// Sliding-window state: one tracked solution plus its step counter.
struct WindowState {
    bool rational = false;
    HiepSolution poly;
    HpiepSolution rat;
    int k = 0;

    Eigen::Index size() const {
        return rational ? rat.nodes.size() : poly.nodes.size();
    }
};

struct SlideOptions {
    PolyMethod poly_method = PolyMethod::eigenvector;
    PencilMethod pencil_method = PencilMethod::implicit_rqz;
    RefinementConfig refinement;
    ToleranceConfig tol;
};

// Downdate the first drop_count nodes (rational: consuming the listed pole
// positions, one per node, indices valid at the moment of each drop), then
// update the new nodes (rational: appending the new poles). The window size
// is preserved when counts match.
void slide_window(WindowState& state, int drop_count,
                  const Vec& new_nodes, const Vec& new_weights,
                  const std::vector<std::size_t>& drop_pole_indices = {},
                  const PoleSet& new_poles = {},
                  const SlideOptions& opts = {});

}  // namespace orthorec
