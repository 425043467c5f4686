#include "orthorec/least_squares.hpp"

#include <cmath>
#include <string>

namespace orthorec {

Vec evaluate_basis(const UpperHessenberg& h, double weight_norm, Complex z, int n) {
    const int m = static_cast<int>(h.dim());
    if (n < 1 || n > m) throw DegreeTooLarge("basis degree out of range");
    Vec p(n);
    p(0) = Complex(1.0 / weight_norm);
    for (int j = 0; j + 1 < n; ++j) {
        Complex s = z * p(j);
        for (int i = 0; i <= j; ++i) s -= h.mat()(i, j) * p(i);
        const Complex sub = h.mat()(j + 1, j);
        if (sub == Complex(0.0))
            throw RecurrenceBreakdown("zero subdiagonal in basis recurrence");
        p(j + 1) = s / sub;
    }
    return p;
}

Vec evaluate_basis(const HessenbergPencil& p, double weight_norm, Complex z, int n) {
    const int m = static_cast<int>(p.dim());
    if (n < 1 || n > m) throw DegreeTooLarge("basis degree out of range");
    Vec q(n);
    q(0) = Complex(1.0 / weight_norm);
    for (int j = 0; j + 1 < n; ++j) {
        Complex s(0.0);
        for (int i = 0; i <= j; ++i)
            s -= q(i) * (p.h.mat()(i, j) - z * p.k.mat()(i, j));
        const Complex den = p.h.mat()(j + 1, j) - z * p.k.mat()(j + 1, j);
        if (den == Complex(0.0))
            throw EvaluationAtPole("evaluation point coincides with a pole");
        q(j + 1) = s / den;
    }
    return q;
}

namespace {

Vec fit_coefficients(const Mat& q, const Vec& weights, const Vec& f_values, int n) {
    if (f_values.size() != weights.size())
        throw ConfigInvalid("data vector length mismatch");
    if (n < 1 || n > q.cols()) throw DegreeTooLarge("fit degree out of range");
    Vec data = weights.cwiseProduct(f_values);
    return q.leftCols(n).adjoint() * data;
}

}  // namespace

ApproximantModel lsq_fit(const HiepSolution& sol, const Vec& f_values, int n) {
    ApproximantModel model;
    model.coefficients = fit_coefficients(sol.q, sol.weights, f_values, n);
    model.degree = n;
    model.weight_norm = sol.weights.norm();
    model.rational = false;
    model.h = sol.h;
    return model;
}

ApproximantModel lsq_fit(const HpiepSolution& sol, const Vec& f_values, int n) {
    ApproximantModel model;
    model.coefficients = fit_coefficients(sol.q, sol.weights, f_values, n);
    model.degree = n;
    model.weight_norm = sol.weights.norm();
    model.rational = true;
    model.pencil = sol.pencil;
    return model;
}

Complex evaluate_model(const ApproximantModel& model, Complex z) {
    Vec basis = model.rational
                    ? evaluate_basis(model.pencil, model.weight_norm, z, model.degree)
                    : evaluate_basis(model.h, model.weight_norm, z, model.degree);
    return (basis.array() * model.coefficients.array()).sum();
}

void slide_window(WindowState& state, int drop_count,
                  const Vec& new_nodes, const Vec& new_weights,
                  const std::vector<std::size_t>& drop_pole_indices,
                  const PoleSet& new_poles,
                  const SlideOptions& opts) {
    if (state.rational &&
        static_cast<int>(drop_pole_indices.size()) != drop_count)
        throw ConfigInvalid("one pole index required per dropped node");
    if (new_nodes.size() != new_weights.size())
        throw ConfigInvalid("new node and weight counts differ");
    if (state.rational &&
        static_cast<Eigen::Index>(new_poles.size()) != new_nodes.size())
        throw ConfigInvalid("one new pole required per new node");

    for (int d = 0; d < drop_count; ++d) {
        try {
            if (state.rational)
                downdate_solution(state.rat, 0, drop_pole_indices[d],
                                  opts.pencil_method, opts.refinement, opts.tol);
            else
                downdate_solution(state.poly, 0, opts.poly_method,
                                  opts.refinement, opts.tol);
        } catch (const Breakdown& e) {
            throw Breakdown("window step " + std::to_string(state.k) +
                            ", downdate " + std::to_string(d) + ": " + e.what());
        }
    }
    for (Eigen::Index j = 0; j < new_nodes.size(); ++j) {
        if (state.rational)
            update_node(state.rat, new_nodes(j), new_weights(j),
                        new_poles[static_cast<std::size_t>(j)]);
        else
            update_node(state.poly, new_nodes(j), new_weights(j));
    }
    ++state.k;
}

}  // namespace orthorec
