#include "doctest.h"
#include "orthorec/experiments.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace orthorec;

TEST_CASE("balanced_circle_order bisects the largest gap") {
  CHECK(balanced_circle_order(1) == std::vector<int>{0});
  CHECK(balanced_circle_order(4) == std::vector<int>{0, 2, 1, 3});
  CHECK(balanced_circle_order(8) == std::vector<int>{0, 4, 2, 6, 1, 5, 3, 7});
}

TEST_CASE("balanced_line_order is the greedy farthest-point order") {
  CHECK(balanced_line_order(5) == std::vector<int>{0, 4, 2, 1, 3});
  std::vector<int> o = balanced_line_order(9);
  CHECK(o[0] == 0);
  CHECK(o[1] == 8);
  CHECK(o[2] == 4);
}

TEST_CASE("equidistant_downdate_order alternates the even indices") {
  std::vector<int> o = equidistant_downdate_order(10);
  CHECK(o.size() == 5);
  CHECK(o[0] == 2);
  CHECK(o[1] == 10);
  CHECK(o[2] == 4);
  CHECK(o[3] == 8);
  CHECK(o[4] == 6);
}

TEST_CASE("config_from_json parses and validates") {
  ExperimentConfig cfg = config_from_json(
      R"({"experiment":"chebyshev","m":32,"order":"unbalanced","n_ir":2})");
  CHECK(cfg.experiment == "chebyshev");
  CHECK(cfg.m == 32);
  CHECK(cfg.order == "unbalanced");
  CHECK(cfg.n_ir == 2);

  CHECK_THROWS_AS(config_from_json("not json"), ConfigInvalid);
  CHECK_THROWS_AS(config_from_json(R"({"m":10})"), ConfigInvalid);
  CHECK_THROWS_AS(config_from_json(R"({"experiment":"bogus","m":10})"),
                  ConfigInvalid);
  CHECK_THROWS_AS(
      config_from_json(R"({"experiment":"chebyshev","m":1})"), ConfigInvalid);
  CHECK_THROWS_AS(
      config_from_json(
          R"({"experiment":"unit_circle_rational","m":10,"delta":2.0})"),
      ConfigInvalid);
}

TEST_CASE("default_config exists for every experiment") {
  for (const char* name :
       {"unit_circle_poly", "chebyshev", "equidistant", "unit_circle_rational",
        "real_line_window", "sliding_lsq"}) {
    ExperimentConfig cfg = default_config(name);
    CHECK(cfg.experiment == name);
    CHECK_NOTHROW(cfg.validate());
  }
  CHECK_THROWS_AS(default_config("bogus"), ConfigInvalid);
}

TEST_CASE("small unit-circle run produces clean metrics for all methods") {
  ExperimentConfig cfg = default_config("unit_circle_poly");
  cfg.m = 32;
  cfg.metric_stride = 1;
  ExperimentResult res = run_experiment(cfg);
  CHECK(res.runs.size() == 4);
  CHECK_FALSE(res.partial);
  for (const MethodRunResult& run : res.runs) {
    CHECK_FALSE(run.breakdown.has_value());
    CHECK(run.reports.size() == 17);  // k = 0 .. 16
    for (const MetricReport& r : run.reports) {
      CHECK(r.err_o < 1e-12);
      CHECK(r.err_w < 1e-12);
      CHECK(r.err_node < 1e-11);
    }
    CHECK(run.golden.at("orthogonality_departure") < 1e-12);
  }
}

TEST_CASE("small rational run keeps pole metrics clean") {
  ExperimentConfig cfg = default_config("unit_circle_rational");
  cfg.m = 21;
  cfg.metric_stride = 1;
  ExperimentResult res = run_experiment(cfg);
  CHECK(res.pencil);
  CHECK(res.runs.size() == 2);
  for (const MethodRunResult& run : res.runs) {
    CHECK_FALSE(run.breakdown.has_value());
    for (const MetricReport& r : run.reports) {
      CHECK(r.err_o < 1e-11);
      CHECK(r.err_node < 1e-10);
      REQUIRE(r.err_p.has_value());
      CHECK(*r.err_p < 1e-10);
    }
  }
}

TEST_CASE("metric_stride 0 reports only the endpoints") {
  ExperimentConfig cfg = default_config("unit_circle_poly");
  cfg.m = 16;
  cfg.methods = {"implicit1"};
  cfg.metric_stride = 0;
  ExperimentResult res = run_experiment(cfg);
  REQUIRE(res.runs.size() == 1);
  // Initial state plus the final step only.
  CHECK(res.runs[0].reports.size() <= 2);
  CHECK(res.runs[0].reports.back().step_index == 8);
}

TEST_CASE("identical config gives byte-identical CSV output") {
  ExperimentConfig cfg = default_config("chebyshev");
  cfg.m = 24;
  cfg.methods = {"eigenvector"};
  cfg.metric_stride = 1;
  namespace fs = std::filesystem;
  const fs::path base = fs::temp_directory_path() / "orthorec_test_csv";
  fs::remove_all(base);
  write_outputs(run_experiment(cfg), (base / "a").string());
  write_outputs(run_experiment(cfg), (base / "b").string());
  for (const char* f : {"metrics_eigenvector.csv", "conditions_eigenvector.csv"}) {
    std::ifstream fa(base / "a" / f), fb(base / "b" / f);
    REQUIRE(fa.good());
    REQUIRE(fb.good());
    std::stringstream sa, sb;
    sa << fa.rdbuf();
    sb << fb.rdbuf();
    CHECK(sa.str() == sb.str());
    CHECK(sa.str().size() > 0);
  }
  fs::remove_all(base);
}

TEST_CASE("write_outputs emits the documented files") {
  ExperimentConfig cfg = default_config("unit_circle_poly");
  cfg.m = 12;
  cfg.methods = {"explicit1"};
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "orthorec_test_out";
  fs::remove_all(dir);
  write_outputs(run_experiment(cfg), dir.string());
  CHECK(fs::exists(dir / "manifest.json"));
  CHECK(fs::exists(dir / "metrics_explicit1.csv"));
  std::ifstream f(dir / "metrics_explicit1.csv");
  std::string header;
  std::getline(f, header);
  CHECK(header == "k,err_o,err_r,err_w,err_node");
  fs::remove_all(dir);
}
