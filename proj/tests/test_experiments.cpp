#include <cmath>
#include <random>
#include <sstream>
#include <string>

#include "doctest.h"
#include "gapstress/experiments.hpp"

using namespace gapstress;
using doctest::Approx;

namespace {

std::vector<std::pair<double, double>> sample(double (*f)(double), std::initializer_list<double> xs) {
  std::vector<std::pair<double, double>> out;
  for (double x : xs) out.emplace_back(x, f(x));
  return out;
}

const char* disk_config = R"({
  "mode": "sweep-eps",
  "geometry": {
    "left": {"shape": "disk", "center": [-1, 0], "radius": 1},
    "right": {"shape": "disk", "center": [1, 0], "radius": 1}
  },
  "background": {"coeffs": {"c0": 0, "a": [1, 0, 0, 0], "b": [0, 0, 0, 0]}},
  "params": {"eps_list": [0.1, 0.05]}
})";

}  // namespace

TEST_CASE("rate fits recover exact models") {
  const RateFit p = rate_fit(sample([](double x) { return 3.0 * std::sqrt(x); }, {0.1, 0.05, 0.02, 0.01}), RateModel::power);
  CHECK(p.p == Approx(0.5).epsilon(1e-12));
  CHECK(p.c == Approx(3.0).epsilon(1e-12));
  CHECK(p.residual < 1e-12);
  CHECK(p.points == 4);

  const auto e_pts = sample([](double x) { return 2.0 * std::exp(-4.0 / x); }, {0.4, 0.3, 0.2, 0.1});
  const RateFit e = rate_fit(e_pts, RateModel::exponential_reciprocal);
  CHECK(e.p == Approx(4.0).epsilon(1e-10));
  CHECK(e.c == Approx(2.0).epsilon(1e-10));
  // a power law cannot follow exp(-A/x) as well
  CHECK(rate_fit(e_pts, RateModel::power).residual > 10 * e.residual + 1e-3);
}

TEST_CASE("rate fit under noise") {
  std::mt19937 rng(7);
  std::normal_distribution<double> noise(0.0, 0.01);
  std::vector<std::pair<double, double>> pts;
  for (double x = 0.1; x > 1e-3; x *= 0.5) pts.emplace_back(x, 0.7 * std::pow(x, -0.5) * (1.0 + noise(rng)));
  const RateFit f = rate_fit(pts, RateModel::power);
  CHECK(f.p == Approx(-0.5).epsilon(0.05));
}

TEST_CASE("rate fit input validation") {
  CHECK_THROWS_AS(rate_fit({{1.0, 1.0}, {2.0, 2.0}}, RateModel::power), std::invalid_argument);
  CHECK_THROWS_AS(rate_fit({{1.0, 1.0}, {2.0, 0.0}, {3.0, 1.0}}, RateModel::power), std::invalid_argument);
  CHECK_THROWS_AS(rate_fit({{-1.0, 1.0}, {2.0, 1.0}, {3.0, 1.0}}, RateModel::power), std::invalid_argument);
  const auto w = without_largest({{0.1, 1.0}, {0.4, 2.0}, {0.2, 3.0}});
  REQUIRE(w.size() == 2);
  for (const auto& p : w) CHECK(p.first < 0.4);
}

TEST_CASE("config parsing") {
  const SweepConfig cfg = parse_config(disk_config);
  CHECK(cfg.mode == "sweep-eps");
  CHECK(cfg.eps_list == std::vector<double>{0.1, 0.05});
  CHECK(cfg.right.center.x == 1.0);
  CHECK(cfg.background.a[0] == 1.0);
  CHECK(cfg.disc.kind == Discretization::Kind::panels);

  CHECK_THROWS_AS(parse_config("{not json"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config("[1, 2]"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config(R"({"params": {"eps_list": [0.01, 0.1]}})"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config(R"({"params": {"eps_list": [0.01, 0.0005]}})"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config(R"({"params": {"rho_list": [0.2, -0.1]}})"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config(R"({"discretization": {"nodes": 8}})"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config(R"({"discretization": {"panel_depth": 20}})"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config(R"({"discretization": {"kind": "fem"}})"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config(R"({"geometry": {"left": {"shape": "square"}}})"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config(R"({"background": {"coeffs": {"a": [1, 0, 0, 0, 1]}}})"), std::invalid_argument);
  CHECK_THROWS_AS(load_config("/nonexistent/config.json"), std::invalid_argument);
}

TEST_CASE("number formatting") {
  CHECK(format_number(0.1) == "1.000000000000e-01");
  CHECK(format_number(-2.5e-7) == "-2.500000000000e-07");
  CHECK(format_number(nan_value) == "nan");
}

TEST_CASE("epsilon sweep output is exact and deterministic") {
  const SweepConfig cfg = parse_config(disk_config);
  const EpsSweep a = sweep_epsilon(cfg);
  REQUIRE(a.rows.size() == 2);
  for (const auto& r : a.rows) {
    CHECK(r.ok());
    CHECK(r.colloc_residual < 1e-8);
    CHECK(r.lambda1 + r.lambda2 == Approx(r.eps).epsilon(1e-10));
  }
  std::ostringstream s1, s2;
  write_csv(s1, a);
  write_csv(s2, sweep_epsilon(cfg));
  CHECK(s1.str() == s2.str());
  const std::string text = s1.str();
  CHECK(text.substr(0, text.find('\n')) == eps_csv_header);
  CHECK(text.find("1.000000000000e-01,") == text.find('\n') + 1);

  std::ostringstream js;
  write_json(js, a, cfg);
  CHECK(js.str().find("\"rows\"") != std::string::npos);
}

TEST_CASE("rho sweep headers and rejection beyond rho_max") {
  SweepConfig cfg = parse_config(disk_config);
  cfg.rho_list = {0.4, 0.2, 0.1};
  const RhoSweep s = sweep_rho(cfg);
  REQUIRE(s.rows.size() == 3);
  std::ostringstream os;
  write_csv(os, s);
  CHECK(os.str().substr(0, os.str().find('\n')) == rho_csv_header);
  CHECK(std::isfinite(s.alpha0_estimate));

  cfg.rho_list = {5.0, 0.2};
  const RhoSweep bad = sweep_rho(cfg);
  CHECK_FALSE(bad.rows[0].ok());
  CHECK_FALSE(bad.flags.empty());
}

TEST_CASE("Mobius verify suite") {
  const VerifyReport r = verify("mobius");
  CHECK_FALSE(r.checks.empty());
  for (const auto& c : r.checks) CHECK_MESSAGE(c.passed, c.name << ": " << c.detail);
  CHECK_THROWS_AS(verify("nope"), std::invalid_argument);
}
