#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "orthorec/least_squares.hpp"
#include "orthorec/metrics.hpp"

namespace orthorec {

// Order in which m equidistant angles 2*pi*j/m are added so that each new
// angle bisects the currently largest gap (ties: the gap whose left endpoint
// was added earliest). Returns 0-based grid indices; m=8 gives the
// bit-reversal order.
std::vector<int> balanced_circle_order(int m);

// Greedy farthest-point ordering of the grid 0..m-1 on a line, starting at 0
// (ties: smallest index).
std::vector<int> balanced_line_order(int m);

// 1-based indices 2, m, 4, m-2, 6, m-4, ... (all even indices, alternating
// smallest and largest remaining).
std::vector<int> equidistant_downdate_order(int m);

struct ExperimentConfig {
    std::string experiment;  // unit_circle_poly | chebyshev | equidistant |
                             // unit_circle_rational | real_line_window | sliding_lsq
    int m = 0;
    std::string order = "balanced";  // balanced | unbalanced | paper_sequence
    std::vector<std::string> methods;
    int n_ir = 1;
    int b = 1;
    double delta = 0.1;
    int alpha = 1;
    int ell = 100;
    unsigned long seed = 0;
    // Full metrics every metric_stride steps (plus the last step); 0 means
    // final step only.
    int metric_stride = 1;
    double interval_lo = 0.0;
    double interval_hi = 6.283185307179586;

    void validate() const;
};

ExperimentConfig config_from_json(const std::string& text);
ExperimentConfig default_config(const std::string& experiment);

struct BreakdownEvent {
    int step = -1;
    std::string message;
};

// One row of eigenvector-method condition traces: lhs/rhs pairs of the
// residual and trailing-accuracy tests.
struct ConditionTraceRow {
    int k = 0;
    std::vector<double> values;
};

struct MethodRunResult {
    std::string method;
    std::vector<MetricReport> reports;
    std::vector<ConditionTraceRow> conditions;
    std::optional<BreakdownEvent> breakdown;
    std::map<std::string, double> golden;
};

struct ExperimentResult {
    ExperimentConfig config;
    std::vector<MethodRunResult> runs;
    double wall_seconds = 0.0;
    bool partial = false;  // some method run broke down
    bool pencil = false;   // err_p column present
    bool approx = false;   // err_f column present
};

ExperimentResult run_experiment(const ExperimentConfig& cfg);

// metrics_<method>.csv, conditions_<method>.csv, manifest.json under out_dir.
void write_outputs(const ExperimentResult& res, const std::string& out_dir);

}  // namespace orthorec
