#include "orthorec/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace orthorec {

namespace {

std::string format_value(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.16e", v);
    return buf;
}

// Greedy nearest pairing: repeatedly match the globally closest
// (node, eigenvalue) pair among the unmatched ones.
double greedy_node_error(const Vec& nodes, const Vec& eigs, bool* ambiguous) {
    const int m = static_cast<int>(nodes.size());
    std::vector<bool> node_used(m, false), eig_used(m, false);
    double err = 0.0;
    double min_margin = std::numeric_limits<double>::infinity();
    for (int pick = 0; pick < m; ++pick) {
        double best = std::numeric_limits<double>::infinity();
        double second = best;
        int bi = -1, bj = -1;
        for (int i = 0; i < m; ++i) {
            if (node_used[i]) continue;
            for (int j = 0; j < m; ++j) {
                if (eig_used[j]) continue;
                double d = std::abs(nodes(i) - eigs(j));
                if (d < best) {
                    second = best;
                    best = d;
                    bi = i;
                    bj = j;
                } else if (d < second) {
                    second = d;
                }
            }
        }
        node_used[bi] = true;
        eig_used[bj] = true;
        err = std::max(err, best);
        min_margin = std::min(min_margin, second);
    }
    // Flag pairings whose next-closest alternative is within 10x of the
    // reported error; such assignments are not trustworthy.
    if (ambiguous && m > 1 && err > 0 && min_margin < 10.0 * err)
        *ambiguous = true;
    return err;
}

}  // namespace

std::string MetricReport::csv_header(bool with_pole, bool with_approx) {
    std::string s = "k,err_o,err_r,err_w,err_node";
    if (with_pole) s += ",err_p";
    if (with_approx) s += ",err_f";
    return s;
}

std::string MetricReport::csv_row() const {
    std::string s = std::to_string(step_index);
    s += "," + format_value(err_o);
    s += "," + format_value(err_r);
    s += "," + format_value(err_w);
    s += "," + format_value(err_node);
    if (err_p) s += "," + format_value(*err_p);
    if (err_f) s += "," + format_value(*err_f);
    return s;
}

double err_orthogonality(const Mat& q) {
    Mat g = q.adjoint() * q;
    g.diagonal().array() -= 1.0;
    return two_norm(g);
}

double err_recurrence(const Vec& nodes, const Mat& q, const UpperHessenberg& h) {
    Mat zq = nodes.asDiagonal() * q;
    Mat qh = q * h.mat();
    double denom = std::max(two_norm(zq), two_norm(qh));
    if (denom == 0.0) return 0.0;
    return two_norm(zq - qh) / denom;
}

double err_recurrence_pencil(const Vec& nodes, const Mat& q,
                             const HessenbergPencil& p) {
    Mat zqk = nodes.asDiagonal() * (q * p.k.mat());
    Mat qh = q * p.h.mat();
    double denom = std::max(two_norm(zqk), two_norm(qh));
    if (denom == 0.0) return 0.0;
    return two_norm(zqk - qh) / denom;
}

double err_weight(const Mat& q, const Vec& w) {
    return (w.norm() * q.col(0) - w).norm();
}

double err_node(const Vec& nodes, const UpperHessenberg& h, bool* ambiguous) {
    if (ambiguous) *ambiguous = false;
    if (nodes.size() == 0) return 0.0;
    Vec eigs = reference_eigen(h);
    return greedy_node_error(nodes, eigs, ambiguous);
}

double err_node(const Vec& nodes, const HessenbergPencil& p, bool* ambiguous) {
    if (ambiguous) *ambiguous = false;
    if (nodes.size() == 0) return 0.0;
    Vec eigs = reference_eigen_pencil(p);
    return greedy_node_error(nodes, eigs, ambiguous);
}

double err_pole(const HessenbergPencil& p, const PoleSet& poles) {
    const int m = static_cast<int>(p.dim());
    double err = 0.0;
    for (int i = 0; i + 1 < m; ++i) {
        const Complex hs = p.h.mat()(i + 1, i);
        const Complex ks = p.k.mat()(i + 1, i);
        const Pole& xi = poles.at(i);
        if (xi.is_infinite()) {
            err = std::max(err, std::abs(ks) / std::abs(hs));
        } else {
            const Complex target = xi.value();
            err = std::max(err, std::abs(hs / ks - target) / std::abs(target));
        }
    }
    return err;
}

double err_sup_approx(const std::function<double(double)>& f_true,
                      const std::function<Complex(double)>& g,
                      double lo, double hi, int m) {
    const int n = 10 * m;
    double err = 0.0;
    for (int i = 0; i < n; ++i) {
        double x = lo + (hi - lo) * static_cast<double>(i) / (n - 1);
        err = std::max(err, std::abs(g(x) - Complex(f_true(x))));
    }
    return err;
}

Mat propagate_basis(Mat q, const std::vector<CoreTransformation>& pre_cores,
                    const std::vector<CoreTransformation>& post_cores,
                    bool drop_first, int* dropped_row) {
    for (const auto& c : pre_cores) apply_core_right(c.adjoint(), q);
    if (drop_first) {
        // The deflated basis vector is the indicator of the removed node up
        // to phase; its support row is discarded along with the column.
        int row;
        q.col(0).cwiseAbs().maxCoeff(&row);
        if (dropped_row) *dropped_row = row;
        const int m = static_cast<int>(q.rows());
        Mat red(m - 1, m - 1);
        int rr = 0;
        for (int i = 0; i < m; ++i) {
            if (i == row) continue;
            red.row(rr++) = q.row(i).tail(m - 1);
        }
        q = std::move(red);
    }
    for (const auto& c : post_cores) apply_core_right(c.adjoint(), q);
    return q;
}

Mat propagate_basis_pencil(Mat q,
                           const std::vector<CoreTransformation>& pre_cores,
                           bool drop_first) {
    return propagate_basis(std::move(q), pre_cores, {}, drop_first);
}

MetricReport measure(const HiepSolution& sol, int k) {
    MetricReport r;
    r.step_index = k;
    r.err_o = err_orthogonality(sol.q);
    r.err_r = err_recurrence(sol.nodes, sol.q, sol.h);
    r.err_w = err_weight(sol.q, sol.weights);
    r.err_node = err_node(sol.nodes, sol.h, &r.node_pairing_ambiguous);
    return r;
}

MetricReport measure(const HpiepSolution& sol, int k) {
    MetricReport r;
    r.step_index = k;
    r.err_o = err_orthogonality(sol.q);
    r.err_r = err_recurrence_pencil(sol.nodes, sol.q, sol.pencil);
    r.err_w = err_weight(sol.q, sol.weights);
    r.err_node = err_node(sol.nodes, sol.pencil, &r.node_pairing_ambiguous);
    r.err_p = err_pole(sol.pencil, sol.poles);
    return r;
}

}  // namespace orthorec
