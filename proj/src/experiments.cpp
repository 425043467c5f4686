#include "orthorec/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "json.hpp"

namespace orthorec {

namespace {

constexpr double kPi = std::numbers::pi;

double f_cos(double x) {
    const double c = std::cos(x);
    return 1.0 / (c * c + 1.0);
}

int find_node(const Vec& nodes, Complex target) {
    int best = 0;
    double best_d = std::abs(nodes(0) - target);
    for (Eigen::Index i = 1; i < nodes.size(); ++i) {
        const double d = std::abs(nodes(i) - target);
        if (d < best_d) {
            best_d = d;
            best = static_cast<int>(i);
        }
    }
    return best;
}

bool want_metrics(int k, int total, int stride) {
    if (k == total) return true;
    if (stride <= 0) return false;
    return k % stride == 0;
}

PolyMethod parse_poly_method(const std::string& name) {
    if (name == "explicit1") return PolyMethod::explicit1;
    if (name == "implicit1") return PolyMethod::implicit1;
    if (name == "implicit2") return PolyMethod::implicit2;
    if (name == "eigenvector") return PolyMethod::eigenvector;
    throw ConfigInvalid("unknown polynomial method: " + name);
}

PencilMethod parse_pencil_method(const std::string& name) {
    if (name == "implicit1" || name == "implicit" || name == "implicit_rqz")
        return PencilMethod::implicit_rqz;
    if (name == "eigenvector") return PencilMethod::eigenvector;
    throw ConfigInvalid("unknown pencil method: " + name);
}

double orthogonality_departure(const UpperHessenberg& h) {
    Mat g = h.mat().adjoint() * h.mat();
    g.diagonal().array() -= 1.0;
    return two_norm(g);
}

double tridiagonal_departure(const UpperHessenberg& h) {
    Mat m = h.mat();
    const Eigen::Index n = m.rows();
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = std::max<Eigen::Index>(0, i - 1);
             j <= std::min(n - 1, i + 1); ++j)
            m(i, j) = Complex(0.0);
    return two_norm(m);
}

// Shared driver for the polynomial downdating experiments: remove the listed
// node values one by one, collecting metrics, condition traces and breakdowns.
MethodRunResult run_poly_downdates(const HiepSolution& base,
                                   const std::vector<Complex>& targets,
                                   const std::string& method_name,
                                   const ExperimentConfig& cfg) {
    MethodRunResult res;
    res.method = method_name;
    const PolyMethod method = parse_poly_method(method_name);
    RefinementConfig rc;
    rc.n_ir = cfg.n_ir;
    rc.batch = cfg.b;

    HiepSolution sol = base;
    const int total = static_cast<int>(targets.size());
    if (want_metrics(0, total, cfg.metric_stride))
        res.reports.push_back(measure(sol, 0));
    for (int k = 1; k <= total; ++k) {
        try {
            DowndateStepResult step = downdate_solution(
                sol, static_cast<std::size_t>(find_node(sol.nodes, targets[k - 1])),
                method, rc);
            if (method == PolyMethod::eigenvector) {
                res.conditions.push_back(
                    {k,
                     {step.diagnostics.evec_residual, step.diagnostics.evec_bound,
                      step.diagnostics.trailing_residual,
                      step.diagnostics.trailing_bound}});
            }
        } catch (const Error& e) {
            res.breakdown = BreakdownEvent{k, e.what()};
            break;
        }
        if (want_metrics(k, total, cfg.metric_stride))
            res.reports.push_back(measure(sol, k));
    }
    res.golden["orthogonality_departure"] = orthogonality_departure(sol.h);
    res.golden["tridiagonal_departure"] = tridiagonal_departure(sol.h);
    res.golden["steps_completed"] =
        res.breakdown ? res.breakdown->step - 1 : total;
    return res;
}

HiepSolution build_unit_circle(int m) {
    InnerProductSpec spec;
    spec.nodes = Vec(m);
    for (int j = 0; j < m; ++j) {
        const double t = 2.0 * kPi * j / m;
        spec.nodes(j) = Complex(std::cos(t), std::sin(t));
    }
    spec.weights = Vec::Constant(m, Complex(1.0 / std::sqrt(double(m))));
    return solve_hiep(spec);
}

ExperimentResult run_unit_circle_poly(const ExperimentConfig& cfg) {
    ExperimentResult res;
    res.config = cfg;
    HiepSolution base = build_unit_circle(cfg.m);
    const std::vector<int> order = balanced_circle_order(cfg.m);
    std::vector<Complex> targets;
    for (int k = 0; k < cfg.m / 2; ++k)
        targets.push_back(base.nodes(order[cfg.m - 1 - k]));
    for (const auto& method : cfg.methods)
        res.runs.push_back(run_poly_downdates(base, targets, method, cfg));
    return res;
}

ExperimentResult run_chebyshev(const ExperimentConfig& cfg) {
    ExperimentResult res;
    res.config = cfg;
    InnerProductSpec spec;
    spec.nodes = Vec(cfg.m);
    for (int j = 1; j <= cfg.m; ++j)
        spec.nodes(j - 1) = Complex(std::cos(kPi * (j - 0.5) / cfg.m));
    spec.weights = Vec::Ones(cfg.m);
    HiepSolution base = solve_hiep(spec);

    std::vector<Complex> targets;
    if (cfg.order == "unbalanced") {
        for (int j = 0; j < cfg.m / 2; ++j) targets.push_back(base.nodes(j));
    } else {
        const std::vector<int> order = balanced_line_order(cfg.m);
        for (int k = 0; k < cfg.m / 2; ++k)
            targets.push_back(base.nodes(order[cfg.m - 1 - k]));
    }
    for (const auto& method : cfg.methods)
        res.runs.push_back(run_poly_downdates(base, targets, method, cfg));
    return res;
}

ExperimentResult run_equidistant(const ExperimentConfig& cfg) {
    ExperimentResult res;
    res.config = cfg;
    InnerProductSpec spec;
    spec.nodes = Vec(cfg.m);
    for (int j = 1; j <= cfg.m; ++j)
        spec.nodes(j - 1) = Complex(double(j) / cfg.m);
    spec.weights = Vec::Constant(cfg.m, Complex(1.0 / std::sqrt(double(cfg.m))));
    HiepSolution base = solve_hiep(spec);

    std::vector<Complex> targets;
    for (int idx : equidistant_downdate_order(cfg.m))
        targets.push_back(base.nodes(idx - 1));
    for (const auto& method : cfg.methods)
        res.runs.push_back(run_poly_downdates(base, targets, method, cfg));
    return res;
}

MethodRunResult run_pencil_downdates(const HpiepSolution& base,
                                     const std::vector<Complex>& targets,
                                     const std::string& method_name,
                                     const ExperimentConfig& cfg) {
    MethodRunResult res;
    res.method = method_name;
    const PencilMethod method = parse_pencil_method(method_name);
    RefinementConfig rc;
    rc.n_ir = cfg.n_ir;
    rc.batch = cfg.b;

    HpiepSolution sol = base;
    const int total = static_cast<int>(targets.size());
    if (want_metrics(0, total, cfg.metric_stride))
        res.reports.push_back(measure(sol, 0));
    for (int k = 1; k <= total; ++k) {
        try {
            DowndateStepResult step = downdate_solution(
                sol, static_cast<std::size_t>(find_node(sol.nodes, targets[k - 1])),
                sol.poles.size() - 1, method, rc);
            if (method == PencilMethod::eigenvector) {
                const auto& d = step.pencil_diagnostics;
                res.conditions.push_back(
                    {k,
                     {d.left_residual, d.left_bound, d.left_trailing,
                      d.left_trailing_bound, d.right_residual, d.right_bound,
                      d.right_trailing, d.right_trailing_bound}});
            }
        } catch (const Error& e) {
            res.breakdown = BreakdownEvent{k, e.what()};
            break;
        }
        if (want_metrics(k, total, cfg.metric_stride))
            res.reports.push_back(measure(sol, k));
    }
    res.golden["steps_completed"] =
        res.breakdown ? res.breakdown->step - 1 : total;
    if (!res.reports.empty()) {
        const MetricReport& last = res.reports.back();
        res.golden["final_err_o"] = last.err_o;
        res.golden["final_err_r"] = last.err_r;
        res.golden["final_err_w"] = last.err_w;
        res.golden["final_err_node"] = last.err_node;
        if (last.err_p) res.golden["final_err_p"] = *last.err_p;
    }
    return res;
}

ExperimentResult run_unit_circle_rational(const ExperimentConfig& cfg) {
    ExperimentResult res;
    res.config = cfg;
    res.pencil = true;
    const int m = cfg.m;
    InnerProductSpec spec;
    spec.nodes = Vec(m);
    for (int j = 0; j < m; ++j) {
        const double t = 2.0 * kPi * j / m;
        spec.nodes(j) = Complex(std::cos(t), std::sin(t));
    }
    spec.weights = Vec::Constant(m, Complex(1.0 / std::sqrt(double(m))));

    // Pole pairs on radii 1 +- delta, at angles following the balanced order.
    const std::vector<int> order = balanced_circle_order(m);
    PoleSet poles;
    for (int t = 0; static_cast<int>(poles.size()) + 2 <= m - 1; ++t) {
        const double a = 2.0 * kPi * order[t] / m;
        const Complex dir(std::cos(a), std::sin(a));
        poles.push_back(Pole::finite((1.0 - cfg.delta) * dir));
        poles.push_back(Pole::finite((1.0 + cfg.delta) * dir));
    }
    while (static_cast<int>(poles.size()) < m - 1) poles.push_back(Pole::infinity());
    HpiepSolution base = solve_hpiep_by_updating(spec, poles);

    std::vector<Complex> targets;
    for (int k = 0; k < m / 2; ++k)
        targets.push_back(base.nodes(order[m - 1 - k]));
    for (const auto& method : cfg.methods)
        res.runs.push_back(run_pencil_downdates(base, targets, method, cfg));
    return res;
}

Pole real_line_pole(int j, double a, double dx, double delta) {
    // j is 1-based; odd/even pairs share a real part and conjugate offsets.
    if (j % 2 == 1) return Pole::finite(Complex(a + (j - 0.5) * dx, delta));
    return Pole::finite(Complex(a + (j - 1.5) * dx, -delta));
}

ExperimentResult run_real_line_window(const ExperimentConfig& cfg) {
    ExperimentResult res;
    res.config = cfg;
    res.pencil = true;
    const int m = cfg.m;
    const double a = cfg.interval_lo;
    const double dx = (cfg.interval_hi - cfg.interval_lo) / (m - 1);

    InnerProductSpec spec;
    spec.nodes = Vec(m);
    for (int j = 1; j <= m; ++j) spec.nodes(j - 1) = Complex(a + (j - 1) * dx);
    spec.weights = Vec::Ones(m);
    PoleSet poles;
    for (int j = 1; j < m; ++j)
        poles.push_back(real_line_pole(j, a, dx, cfg.delta));

    for (const auto& method_name : cfg.methods) {
        MethodRunResult run;
        run.method = method_name;
        SlideOptions opts;
        opts.pencil_method = parse_pencil_method(method_name);
        opts.refinement.n_ir = cfg.n_ir;
        opts.refinement.batch = cfg.b;

        WindowState state;
        state.rational = true;
        state.rat = solve_hpiep_by_updating(spec, poles);
        int next_node = m + 1;  // 1-based indices continuing the grid
        int next_pole = m;
        if (want_metrics(0, cfg.ell, cfg.metric_stride))
            run.reports.push_back(measure(state.rat, 0));
        for (int k = 1; k <= cfg.ell; ++k) {
            Vec nn(2), nw = Vec::Ones(2);
            nn(0) = Complex(a + (next_node - 1) * dx);
            nn(1) = Complex(a + next_node * dx);
            PoleSet np = {real_line_pole(next_pole, a, dx, cfg.delta),
                          real_line_pole(next_pole + 1, a, dx, cfg.delta)};
            try {
                slide_window(state, 2, nn, nw, {0, 0}, np, opts);
            } catch (const Error& e) {
                run.breakdown = BreakdownEvent{k, e.what()};
                break;
            }
            next_node += 2;
            next_pole += 2;
            if (want_metrics(k, cfg.ell, cfg.metric_stride))
                run.reports.push_back(measure(state.rat, k));
        }
        run.golden["steps_completed"] =
            run.breakdown ? run.breakdown->step - 1 : cfg.ell;
        if (!run.reports.empty()) {
            const MetricReport& last = run.reports.back();
            run.golden["final_err_o"] = last.err_o;
            run.golden["final_err_r"] = last.err_r;
            run.golden["final_err_w"] = last.err_w;
            run.golden["final_err_node"] = last.err_node;
            if (last.err_p) run.golden["final_err_p"] = *last.err_p;
        }
        res.runs.push_back(std::move(run));
    }
    return res;
}

// Move the pole at position `from` to position `to` (< from) by adjacent
// swaps, keeping the tracked basis consistent.
void move_pole_left(HpiepSolution& sol, int from, int to) {
    for (int i = from - 1; i >= to; --i) {
        EquivalenceCores eq = pole_swap(sol.pencil, i);
        if (!eq.left.is_identity()) apply_core_right(eq.left.adjoint(), sol.q);
        std::swap(sol.poles[i], sol.poles[i + 1]);
    }
}

ExperimentResult run_sliding_lsq(const ExperimentConfig& cfg) {
    ExperimentResult res;
    res.config = cfg;
    res.approx = true;
    const int m = cfg.m;
    const int n_poly = 65;
    const int n_rat = 25;
    const double a = 0.0;
    const double b = cfg.alpha * kPi;
    const double dx = (b - a) / (m - 1);
    const Complex phi = std::acos(Complex(0.0, 1.0));  // singularity seed

    InnerProductSpec spec;
    spec.nodes = Vec(m);
    for (int j = 0; j < m; ++j) spec.nodes(j) = Complex(a + j * dx);
    spec.weights = Vec::Ones(m);

    // Pole pairs arccos(+-i) + k*pi for k = -3 .. alpha+2 (all singularities
    // with real part in the window plus three pairs on each side), padded
    // with poles at infinity.
    PoleSet poles;
    int next_pair = cfg.alpha + 3;
    for (int k = -3; k <= cfg.alpha + 2; ++k) {
        poles.push_back(Pole::finite(phi + Complex(k * kPi)));
        poles.push_back(Pole::finite(std::conj(phi) + Complex(k * kPi)));
    }
    const int n_finite0 = static_cast<int>(poles.size());
    while (static_cast<int>(poles.size()) < m - 1) poles.push_back(Pole::infinity());

    WindowState wp;  // polynomial window, eigenvector downdating
    wp.poly = solve_hiep(spec);
    WindowState wr;  // rational window, implicit matrix downdating
    wr.rational = true;
    wr.rat = solve_hpiep_by_updating(spec, poles);

    SlideOptions popts;
    popts.poly_method = PolyMethod::eigenvector;
    popts.refinement.n_ir = cfg.n_ir;
    popts.refinement.batch = cfg.b;
    SlideOptions ropts;
    ropts.pencil_method = PencilMethod::implicit_rqz;
    ropts.refinement = popts.refinement;

    MethodRunResult poly_run, rat_run;
    poly_run.method = "polynomial_eigenvector";
    rat_run.method = "rational_implicit";

    auto f_at_nodes = [&](const Vec& nodes) {
        Vec f(nodes.size());
        for (Eigen::Index i = 0; i < nodes.size(); ++i)
            f(i) = Complex(f_cos(nodes(i).real()));
        return f;
    };
    auto record = [&](int k) {
        {
            MetricReport r = measure(wp.poly, k);
            ApproximantModel model = lsq_fit(wp.poly, f_at_nodes(wp.poly.nodes), n_poly);
            const double lo = wp.poly.nodes.real().minCoeff();
            const double hi = wp.poly.nodes.real().maxCoeff();
            r.err_f = err_sup_approx(
                f_cos, [&](double x) { return evaluate_model(model, Complex(x)); },
                lo, hi, m);
            poly_run.reports.push_back(r);
        }
        {
            MetricReport r = measure(wr.rat, k);
            ApproximantModel model = lsq_fit(wr.rat, f_at_nodes(wr.rat.nodes), n_rat);
            const double lo = wr.rat.nodes.real().minCoeff();
            const double hi = wr.rat.nodes.real().maxCoeff();
            r.err_f = err_sup_approx(
                f_cos, [&](double x) { return evaluate_model(model, Complex(x)); },
                lo, hi, m);
            rat_run.reports.push_back(r);
        }
    };

    record(0);
    int next_node = m + 1;
    int n_finite = n_finite0;
    // Real part of the first singularity the sliding window will cross.
    double next_cross = phi.real();
    for (int k = 1; k <= cfg.ell; ++k) {
        Vec nn(2), nw = Vec::Ones(2);
        nn(0) = Complex(a + (next_node - 1) * dx);
        nn(1) = Complex(a + next_node * dx);
        next_node += 2;

        bool poly_ok = !poly_run.breakdown;
        if (poly_ok) {
            try {
                slide_window(wp, 2, nn, nw, {}, {}, popts);
            } catch (const Error& e) {
                poly_run.breakdown = BreakdownEvent{k, e.what()};
                poly_ok = false;
            }
        }

        if (!rat_run.breakdown) {
            // Replace the first finite pole pair when its real part falls in
            // the dropped-node interval; otherwise consume two poles at
            // infinity from the back of the list.
            // Replace the leftmost pole pair once the dropped nodes pass the
            // next singularity; testing against the trailing dropped node
            // catches crossings even when the grids do not align.
            const double x1 = wr.rat.nodes(1).real();
            const bool trigger = x1 >= next_cross;
            try {
                if (trigger) {
                    PoleSet np = {
                        Pole::finite(phi + Complex(next_pair * kPi)),
                        Pole::finite(std::conj(phi) + Complex(next_pair * kPi))};
                    slide_window(wr, 2, nn, nw, {0, 0}, np, ropts);
                    ++next_pair;
                    next_cross += kPi;
                    move_pole_left(wr.rat, m - 3, n_finite - 2);
                    move_pole_left(wr.rat, m - 2, n_finite - 1);
                } else {
                    PoleSet np = {Pole::infinity(), Pole::infinity()};
                    slide_window(wr, 2, nn, nw,
                                 {static_cast<std::size_t>(m - 2),
                                  static_cast<std::size_t>(m - 3)},
                                 np, ropts);
                }
            } catch (const Error& e) {
                rat_run.breakdown = BreakdownEvent{k, e.what()};
            }
        }

        if (poly_run.breakdown && rat_run.breakdown) break;
        if (want_metrics(k, cfg.ell, cfg.metric_stride) && !poly_run.breakdown &&
            !rat_run.breakdown)
            record(k);
    }

    auto finish = [&](MethodRunResult& run) {
        double initial = 0, first = 0, peak = 0, final = 0;
        for (const MetricReport& r : run.reports) {
            const double v = r.err_f.value_or(0.0);
            if (r.step_index == 0) initial = v;
            if (r.step_index == 1) first = v;
            if (r.step_index >= 1) peak = std::max(peak, v);
            final = v;
        }
        run.golden["err_f_initial"] = initial;
        run.golden["err_f_first_slide"] = first;
        run.golden["err_f_peak"] = peak;
        run.golden["err_f_final"] = final;
        run.golden["steps_completed"] =
            run.breakdown ? run.breakdown->step - 1 : cfg.ell;
    };
    finish(poly_run);
    finish(rat_run);
    res.runs.push_back(std::move(poly_run));
    res.runs.push_back(std::move(rat_run));
    return res;
}

}  // namespace

std::vector<int> balanced_circle_order(int m) {
    if (m < 1) throw ConfigInvalid("balanced order needs m >= 1");
    std::vector<int> order = {0};
    std::vector<int> chosen = {0};           // sorted grid indices
    std::vector<int> inserted_at = {0};      // parallel: insertion time
    for (int t = 1; t < m; ++t) {
        const int n = static_cast<int>(chosen.size());
        int best_len = -1, best_pos = -1;
        for (int i = 0; i < n; ++i) {
            const int len = n == 1 ? m : (chosen[(i + 1) % n] - chosen[i] + m) % m;
            if (len > best_len ||
                (len == best_len && inserted_at[i] < inserted_at[best_pos])) {
                best_len = len;
                best_pos = i;
            }
        }
        const int idx = (chosen[best_pos] + best_len / 2) % m;
        order.push_back(idx);
        // Insert keeping chosen sorted.
        auto it = std::lower_bound(chosen.begin(), chosen.end(), idx);
        const auto off = it - chosen.begin();
        chosen.insert(it, idx);
        inserted_at.insert(inserted_at.begin() + off, t);
    }
    return order;
}

std::vector<int> balanced_line_order(int m) {
    if (m < 1) throw ConfigInvalid("balanced order needs m >= 1");
    std::vector<int> order = {0};
    std::vector<bool> used(m, false);
    used[0] = true;
    for (int t = 1; t < m; ++t) {
        int best = -1, best_d = -1;
        for (int i = 0; i < m; ++i) {
            if (used[i]) continue;
            int d = m;
            for (int c : order) d = std::min(d, std::abs(i - c));
            if (d > best_d) {
                best_d = d;
                best = i;
            }
        }
        used[best] = true;
        order.push_back(best);
    }
    return order;
}

std::vector<int> equidistant_downdate_order(int m) {
    if (m < 2 || m % 2 != 0)
        throw ConfigInvalid("equidistant downdate order needs even m >= 2");
    std::vector<int> out;
    int lo = 2, hi = m;
    bool small_turn = true;
    while (lo <= hi) {
        if (small_turn) {
            out.push_back(lo);
            lo += 2;
        } else {
            out.push_back(hi);
            hi -= 2;
        }
        small_turn = !small_turn;
    }
    return out;
}

void ExperimentConfig::validate() const {
    static const std::vector<std::string> known = {
        "unit_circle_poly", "chebyshev",        "equidistant",
        "unit_circle_rational", "real_line_window", "sliding_lsq"};
    if (std::find(known.begin(), known.end(), experiment) == known.end())
        throw ConfigInvalid("unknown experiment: " + experiment);
    if (m < 2) throw ConfigInvalid("m must be at least 2");
    if (order != "balanced" && order != "unbalanced" && order != "paper_sequence")
        throw ConfigInvalid("unknown order: " + order);
    if (n_ir < 0 || b < 1) throw ConfigInvalid("invalid refinement parameters");
    if (experiment == "unit_circle_rational" && (delta <= 0.0 || delta >= 1.0))
        throw ConfigInvalid("delta must lie in (0, 1)");
    if ((experiment == "real_line_window" || experiment == "sliding_lsq") && ell < 1)
        throw ConfigInvalid("ell must be positive");
    if (experiment == "sliding_lsq" && alpha < 1)
        throw ConfigInvalid("alpha must be positive");
    if (interval_hi <= interval_lo)
        throw ConfigInvalid("empty interval");
}

ExperimentConfig default_config(const std::string& experiment) {
    ExperimentConfig cfg;
    cfg.experiment = experiment;
    if (experiment == "unit_circle_poly") {
        cfg.m = 500;
        cfg.methods = {"explicit1", "implicit1", "implicit2", "eigenvector"};
        cfg.n_ir = 1;
        cfg.metric_stride = 25;
    } else if (experiment == "chebyshev") {
        cfg.m = 500;
        cfg.methods = {"explicit1", "implicit1", "implicit2", "eigenvector"};
        // n_ir = 2 keeps the eigenvector method robust on the line (one round
        // is enough on the circle but not here).
        cfg.n_ir = 2;
        cfg.metric_stride = 25;
    } else if (experiment == "equidistant") {
        cfg.m = 250;
        cfg.methods = {"explicit1", "implicit1", "implicit2", "eigenvector"};
        cfg.n_ir = 10;
        cfg.b = 5;
        cfg.metric_stride = 5;
    } else if (experiment == "unit_circle_rational") {
        cfg.m = 201;
        cfg.methods = {"implicit_rqz", "eigenvector"};
        cfg.n_ir = 1;
        cfg.metric_stride = 5;
    } else if (experiment == "real_line_window") {
        cfg.m = 201;
        cfg.methods = {"implicit_rqz"};
        cfg.n_ir = 10;
        cfg.b = 5;
        cfg.ell = 100;
        cfg.metric_stride = 5;
    } else if (experiment == "sliding_lsq") {
        cfg.m = 201;
        cfg.n_ir = 10;
        cfg.b = 5;
        cfg.ell = 100;
        cfg.alpha = 1;
        cfg.metric_stride = 5;
    } else {
        throw ConfigInvalid("unknown experiment: " + experiment);
    }
    return cfg;
}

ExperimentConfig config_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigInvalid(std::string("bad JSON: ") + e.what());
    }
    if (!j.contains("experiment"))
        throw ConfigInvalid("config must name an experiment");
    ExperimentConfig cfg = default_config(j["experiment"].get<std::string>());
    try {
        if (j.contains("m")) cfg.m = j["m"].get<int>();
        if (j.contains("order")) cfg.order = j["order"].get<std::string>();
        if (j.contains("methods"))
            cfg.methods = j["methods"].get<std::vector<std::string>>();
        if (j.contains("n_ir")) cfg.n_ir = j["n_ir"].get<int>();
        if (j.contains("b")) cfg.b = j["b"].get<int>();
        if (j.contains("delta")) cfg.delta = j["delta"].get<double>();
        if (j.contains("alpha")) cfg.alpha = j["alpha"].get<int>();
        if (j.contains("ell")) cfg.ell = j["ell"].get<int>();
        if (j.contains("seed")) cfg.seed = j["seed"].get<unsigned long>();
        if (j.contains("metric_stride"))
            cfg.metric_stride = j["metric_stride"].get<int>();
        if (j.contains("interval_lo")) cfg.interval_lo = j["interval_lo"].get<double>();
        if (j.contains("interval_hi")) cfg.interval_hi = j["interval_hi"].get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigInvalid(std::string("bad config field: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    const auto t0 = std::chrono::steady_clock::now();
    ExperimentResult res;
    if (cfg.experiment == "unit_circle_poly")
        res = run_unit_circle_poly(cfg);
    else if (cfg.experiment == "chebyshev")
        res = run_chebyshev(cfg);
    else if (cfg.experiment == "equidistant")
        res = run_equidistant(cfg);
    else if (cfg.experiment == "unit_circle_rational")
        res = run_unit_circle_rational(cfg);
    else if (cfg.experiment == "real_line_window")
        res = run_real_line_window(cfg);
    else
        res = run_sliding_lsq(cfg);
    for (const auto& run : res.runs)
        if (run.breakdown) res.partial = true;
    res.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
}

void write_outputs(const ExperimentResult& res, const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    for (const auto& run : res.runs) {
        const bool with_p =
            !run.reports.empty() && run.reports.front().err_p.has_value();
        const bool with_f =
            !run.reports.empty() && run.reports.front().err_f.has_value();
        std::ofstream csv(fs::path(out_dir) / ("metrics_" + run.method + ".csv"));
        csv << MetricReport::csv_header(with_p, with_f) << "\n";
        for (const auto& r : run.reports) csv << r.csv_row() << "\n";
        if (!run.conditions.empty()) {
            std::ofstream cond(fs::path(out_dir) /
                               ("conditions_" + run.method + ".csv"));
            if (run.conditions.front().values.size() == 4)
                cond << "k,evec_lhs,evec_rhs,trailing_lhs,trailing_rhs\n";
            else
                cond << "k,left_lhs,left_rhs,left_trailing_lhs,left_trailing_rhs,"
                        "right_lhs,right_rhs,right_trailing_lhs,right_trailing_rhs\n";
            for (const auto& row : run.conditions) {
                cond << row.k;
                char buf[32];
                for (double v : row.values) {
                    std::snprintf(buf, sizeof(buf), "%.16e", v);
                    cond << "," << buf;
                }
                cond << "\n";
            }
        }
    }
    nlohmann::json manifest;
    manifest["version"] = "1.0.0";
    manifest["eps_mach"] = 0x1p-52;
    manifest["wall_seconds"] = res.wall_seconds;
    manifest["partial"] = res.partial;
    manifest["config"] = {{"experiment", res.config.experiment},
                          {"m", res.config.m},
                          {"order", res.config.order},
                          {"methods", res.config.methods},
                          {"n_ir", res.config.n_ir},
                          {"b", res.config.b},
                          {"delta", res.config.delta},
                          {"alpha", res.config.alpha},
                          {"ell", res.config.ell},
                          {"seed", res.config.seed},
                          {"metric_stride", res.config.metric_stride},
                          {"interval_lo", res.config.interval_lo},
                          {"interval_hi", res.config.interval_hi}};
    nlohmann::json runs = nlohmann::json::array();
    for (const auto& run : res.runs) {
        nlohmann::json r;
        r["method"] = run.method;
        r["golden"] = run.golden;
        if (run.breakdown) {
            r["breakdown"] = {{"step", run.breakdown->step},
                              {"message", run.breakdown->message}};
        }
        runs.push_back(r);
    }
    manifest["runs"] = runs;
    std::ofstream mf(fs::path(out_dir) / "manifest.json");
    mf << manifest.dump(2) << "\n";
}

}  // namespace orthorec
