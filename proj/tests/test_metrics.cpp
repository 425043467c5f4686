#include "doctest.h"
#include "orthorec/downdate_driver.hpp"
#include "orthorec/metrics.hpp"
#include "test_util.hpp"

#include <sstream>

using namespace orthorec;
using orthorec::testutil::random_spec;

TEST_CASE("err_orthogonality sees a scaled column") {
  InnerProductSpec spec = random_spec(6, 301u);
  HiepSolution sol = solve_hiep(spec);
  Mat q = sol.q;
  q.col(2) *= (1.0 + 1e-8);
  CHECK(err_orthogonality(sol.q) < 1e-13);
  CHECK(err_orthogonality(q) == doctest::Approx(2e-8).epsilon(0.01));
}

TEST_CASE("err_weight flags a sign flip of the first column") {
  InnerProductSpec spec = random_spec(5, 303u);
  HiepSolution sol = solve_hiep(spec);
  Mat q = sol.q;
  q.col(0) *= -1.0;
  CHECK(err_weight(sol.q, sol.weights) < 1e-13 * sol.weights.norm());
  CHECK(err_weight(q, sol.weights) ==
        doctest::Approx(2.0 * sol.weights.norm()).epsilon(1e-10));
}

TEST_CASE("err_node scales linearly with a diagonal shift") {
  InnerProductSpec spec = random_spec(6, 305u);
  HiepSolution sol = solve_hiep(spec);
  UpperHessenberg h = sol.h;
  h.mat().diagonal().array() += Complex(1e-8);
  CHECK(err_node(spec.nodes, sol.h) < 1e-12);
  CHECK(err_node(spec.nodes, h) == doctest::Approx(1e-8).epsilon(1e-3));
}

TEST_CASE("err_recurrence is normalized and zero for an exact solution") {
  InnerProductSpec spec = random_spec(7, 307u);
  HiepSolution sol = solve_hiep(spec);
  CHECK(err_recurrence(spec.nodes, sol.q, sol.h) < 1e-13);
  UpperHessenberg h = sol.h;
  h.mat() *= Complex(1.0 + 1e-6);
  CHECK(err_recurrence(spec.nodes, sol.q, h) > 1e-8);
  CHECK(err_recurrence(spec.nodes, sol.q, h) < 1e-4);
}

TEST_CASE("err_pole handles finite and infinite poles") {
  InnerProductSpec spec = random_spec(5, 309u);
  PoleSet poles = {Pole::finite(Complex(4.0, 1.0)), Pole::infinity(),
                   Pole::finite(Complex(-3.0, 2.0)), Pole::infinity()};
  HpiepSolution sol = solve_hpiep_by_updating(spec, poles);
  CHECK(err_pole(sol.pencil, poles) < 1e-12);
  // Perturbing one subdiagonal of K moves the corresponding pole.
  HessenbergPencil p = sol.pencil;
  p.k.mat()(1, 0) *= (1.0 + 1e-6);
  CHECK(err_pole(p, poles) == doctest::Approx(1e-6).epsilon(0.01));
}

TEST_CASE("err_sup_approx samples exactly 10m points") {
  int calls = 0;
  const int m = 13;
  double v = err_sup_approx([&](double) { ++calls; return 0.0; },
                            [](double) { return Complex(0.0); }, 0.0, 1.0, m);
  CHECK(v == 0.0);
  CHECK(calls == 10 * m);
}

TEST_CASE("err_sup_approx reports the sup-norm gap") {
  const double v = err_sup_approx([](double x) { return x; },
                                  [](double x) { return Complex(x + 1e-3); },
                                  0.0, 2.0, 10);
  CHECK(v == doctest::Approx(1e-3));
}

TEST_CASE("propagate_basis reports the dropped row and keeps orthogonality") {
  InnerProductSpec spec = random_spec(7, 311u);
  HiepSolution sol = solve_hiep(spec);
  HiepSolution tracked = sol;
  DowndateStepResult step = downdate_solution(tracked, 3, PolyMethod::implicit1);
  CHECK(step.dropped_row == 3);
  CHECK(tracked.q.rows() == 6);
  CHECK(tracked.q.cols() == 6);
  CHECK(err_orthogonality(tracked.q) < 1e-12);
}

TEST_CASE("metrics are invariant under a unimodular basis phase") {
  InnerProductSpec spec = random_spec(6, 313u);
  HiepSolution sol = solve_hiep(spec);
  const Complex phase = std::polar(1.0, 0.7);
  Mat q = sol.q * phase;
  // Orthogonality and recurrence do not see a global phase.
  CHECK(err_orthogonality(q) < 1e-13);
  UpperHessenberg h = sol.h;
  CHECK(err_recurrence(spec.nodes, q, h) < 1e-13);
}

TEST_CASE("csv header and row formats") {
  CHECK(MetricReport::csv_header(false, false) == "k,err_o,err_r,err_w,err_node");
  CHECK(MetricReport::csv_header(true, false) == "k,err_o,err_r,err_w,err_node,err_p");
  CHECK(MetricReport::csv_header(true, true) ==
        "k,err_o,err_r,err_w,err_node,err_p,err_f");
  MetricReport r;
  r.step_index = 3;
  r.err_o = 0.5;
  r.err_r = 0.25;
  r.err_w = 0.125;
  r.err_node = 1.0;
  std::string row = r.csv_row();
  CHECK(row.substr(0, 2) == "3,");
  CHECK(std::count(row.begin(), row.end(), ',') == 4);
  r.err_p = 2.0;
  r.err_f = 4.0;
  const std::string full = r.csv_row();
  CHECK(std::count(full.begin(), full.end(), ',') == 6);
}

TEST_CASE("measure bundles all metrics for pencil solutions") {
  InnerProductSpec spec = random_spec(5, 315u);
  PoleSet poles = {Pole::infinity(), Pole::finite(Complex(5.0)), Pole::infinity(),
                   Pole::infinity()};
  HpiepSolution sol = solve_hpiep_by_updating(spec, poles);
  MetricReport r = measure(sol, 2);
  CHECK(r.step_index == 2);
  CHECK(r.err_o < 1e-13);
  CHECK(r.err_r < 1e-13);
  CHECK(r.err_w < 1e-12);
  CHECK(r.err_node < 1e-12);
  REQUIRE(r.err_p.has_value());
  CHECK(*r.err_p < 1e-11);
  CHECK_FALSE(r.err_f.has_value());
}
