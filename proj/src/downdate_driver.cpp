#include "orthorec/downdate_driver.hpp"

#include "orthorec/metrics.hpp"

namespace orthorec {

namespace {

Vec erase_entry(const Vec& v, int idx) {
    const int m = static_cast<int>(v.size());
    Vec out(m - 1);
    int k = 0;
    for (int i = 0; i < m; ++i)
        if (i != idx) out(k++) = v(i);
    return out;
}

// Leading entry of the transformed weight image after deflation. The
// similarity P (with basis update Q <- Q P^H) maps the weight coordinates
// ||w|| e_1 to ||w|| P e_1; after dropping the deflated entry and applying the
// restoration cores, the leading entry carries the phase linking the reduced
// basis's first column to the reduced weights.
Complex reduced_weight_lead(Eigen::Index m,
                            const std::vector<CoreTransformation>& pre,
                            const std::vector<CoreTransformation>& post) {
    Vec t = Vec::Unit(m, 0);
    for (const auto& c : pre) apply_core_left(c, t);
    Vec u = t.tail(m - 1);
    for (const auto& c : post) apply_core_left(c, u);
    return u(0);
}

// Pin the phase of the first basis column to the weight vector via the
// diagonal similarity D = diag(phase, 1, ..., 1): Q <- Q D, A <- D^H A D.
void apply_leading_phase(Mat& q, Complex phase, std::initializer_list<Mat*> mats) {
    q.col(0) *= phase;
    for (Mat* a : mats) {
        if (a->cols() > 1) a->row(0).tail(a->cols() - 1) *= std::conj(phase);
        if (a->rows() > 1) (*a)(1, 0) *= phase;
    }
}

}  // namespace

DowndateStepResult downdate_solution(HiepSolution& sol, std::size_t node_index,
                                     PolyMethod method,
                                     const RefinementConfig& refinement,
                                     const ToleranceConfig& tol) {
    DowndateRequest req;
    req.node = sol.nodes(static_cast<Eigen::Index>(node_index));
    req.refinement = refinement;
    req.tol = tol;

    DowndateOutcome out;
    switch (method) {
        case PolyMethod::explicit1:
            req.steps = 1;
            out = downdate_explicit(sol.h, req);
            break;
        case PolyMethod::implicit1:
            req.steps = 1;
            out = downdate_implicit(sol.h, req);
            break;
        case PolyMethod::implicit2:
            req.steps = 2;
            out = downdate_implicit(sol.h, req);
            break;
        case PolyMethod::eigenvector:
            out = downdate_eigenvector(sol.h, sol.weights, req);
            break;
    }

    DowndateStepResult res;
    res.deflation_residual = out.deflation_residual;
    res.diagnostics = out.diagnostics;
    const Eigen::Index m = sol.h.dim();
    sol.q = propagate_basis(std::move(sol.q), out.pre_cores, out.post_cores,
                            true, &res.dropped_row);
    sol.h = std::move(out.h_reduced);
    const Complex lead = reduced_weight_lead(m, out.pre_cores, out.post_cores);
    if (lead != Complex(0.0))
        apply_leading_phase(sol.q, lead / std::abs(lead), {&sol.h.mat()});
    sol.nodes = erase_entry(sol.nodes, res.dropped_row);
    sol.weights = erase_entry(sol.weights, res.dropped_row);
    return res;
}

DowndateStepResult downdate_solution(HpiepSolution& sol, std::size_t node_index,
                                     std::size_t pole_index, PencilMethod method,
                                     const RefinementConfig& refinement,
                                     const ToleranceConfig& tol) {
    PencilDowndateRequest req;
    req.node = sol.nodes(static_cast<Eigen::Index>(node_index));
    req.target_pole_index = pole_index;
    req.method = method;
    req.refinement = refinement;
    req.tol = tol;

    PencilDowndateOutcome out = downdate_pencil(sol.pencil, sol.weights, req);

    DowndateStepResult res;
    res.deflation_residual = out.deflation_residual;
    res.pencil_diagnostics = out.diagnostics;
    const Eigen::Index m = sol.pencil.dim();
    sol.q = propagate_basis(std::move(sol.q), out.pre_cores, out.post_cores,
                            true, &res.dropped_row);
    sol.pencil = std::move(out.reduced);
    const Complex lead = reduced_weight_lead(m, out.pre_cores, out.post_cores);
    if (lead != Complex(0.0))
        apply_leading_phase(sol.q, lead / std::abs(lead),
                            {&sol.pencil.h.mat(), &sol.pencil.k.mat()});
    sol.nodes = erase_entry(sol.nodes, res.dropped_row);
    sol.weights = erase_entry(sol.weights, res.dropped_row);
    sol.poles.erase(sol.poles.begin() + static_cast<std::ptrdiff_t>(pole_index));
    return res;
}

}  // namespace orthorec
