#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "orthorec/core_linalg.hpp"
#include "orthorec/iep.hpp"
#include "orthorec/types.hpp"

namespace orthorec {

// One row of per-step error metrics. err_p is only populated for pencil
// runs and err_f only for approximation runs.
struct MetricReport {
    int step_index = 0;
    double err_o = 0.0;
    double err_r = 0.0;
    double err_w = 0.0;
    double err_node = 0.0;
    std::optional<double> err_p;
    std::optional<double> err_f;
    bool node_pairing_ambiguous = false;

    std::string csv_row() const;
    static std::string csv_header(bool with_pole, bool with_approx);
};

double err_orthogonality(const Mat& q);
double err_recurrence(const Vec& nodes, const Mat& q, const UpperHessenberg& h);
double err_recurrence_pencil(const Vec& nodes, const Mat& q,
                             const HessenbergPencil& p);
double err_weight(const Mat& q, const Vec& w);

// Greedy nearest pairing between the remaining nodes and the eigenvalues of
// the reduced matrix or pencil; each eigenvalue is used once. Sets
// *ambiguous when a pairing margin is within 10x of the reported error.
double err_node(const Vec& nodes, const UpperHessenberg& h,
                bool* ambiguous = nullptr);
double err_node(const Vec& nodes, const HessenbergPencil& p,
                bool* ambiguous = nullptr);

// Relative pole error; infinite poles are judged by |k(i+1,i)/h(i+1,i)|.
double err_pole(const HessenbergPencil& p, const PoleSet& poles);

// Sup-norm deviation sampled at exactly 10*m equidistant points including
// both endpoints.
double err_sup_approx(const std::function<double(double)>& f_true,
                      const std::function<Complex(double)>& g,
                      double lo, double hi, int m);

// Applies a recorded downdate to the tracked basis: Q <- Q * C^H for each
// pre core, then removes the deflated coordinate (the row carrying the
// downdated node and the leading column), then applies the post cores.
Mat propagate_basis(Mat q, const std::vector<CoreTransformation>& pre_cores,
                    const std::vector<CoreTransformation>& post_cores,
                    bool drop_first, int* dropped_row = nullptr);

// Pencil variant: left cores act as Q <- Q * C^H, the deflated coordinate is
// removed, right cores do not touch Q.
Mat propagate_basis_pencil(Mat q,
                           const std::vector<CoreTransformation>& pre_cores,
                           bool drop_first);

// Bundle of all metrics for a tracked solution at step k.
MetricReport measure(const HiepSolution& sol, int k);
MetricReport measure(const HpiepSolution& sol, int k);

}  // namespace orthorec
