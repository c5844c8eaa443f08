// Acceptance suite: one PASS/FAIL line per criterion, with the measured numbers.
//
// Usage: acceptance [--threads k] [--expect-fail 1,3,...]
// Exit status is 0 when the set of failing criteria equals the --expect-fail list exactly.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "gapstress/bie_solver.hpp"
#include "gapstress/disk_analytics.hpp"
#include "gapstress/experiments.hpp"

using namespace gapstress;

namespace {

constexpr double pi = std::numbers::pi;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

SweepConfig unit_disk_config(unsigned threads) {
  SweepConfig cfg;
  cfg.left = {"disk", {-1.0, 0.0}, 1.0};
  cfg.right = {"disk", {1.0, 0.0}, 1.0};
  cfg.background = HarmonicBackground::uniform(1.0, 0.0);
  cfg.threads = threads;
  return cfg;
}

InclusionPair unit_disks(double eps) {
  return InclusionPair(disk_shape({-1.0, 0.0}, 1.0, Side::left), disk_shape({1.0, 0.0}, 1.0, Side::right), eps);
}

const std::vector<double> eps_ladder{0.04, 0.01, 0.004, 0.001};

// Shared between criteria so each expensive sweep runs once.
struct Shared {
  unsigned threads = 1;
  RhoSweep rho;
  double rho_seconds = 0.0;
  EpsSweep eps;
};

Outcome criterion1(Shared& s) {
  SweepConfig cfg = unit_disk_config(s.threads);
  cfg.rho_list = {0.4, 0.2, 0.1, 0.05};
  const auto t0 = std::chrono::steady_clock::now();
  s.rho = sweep_rho(cfg);
  s.rho_seconds = seconds_since(t0);
  std::size_t nmax = 0;
  for (const auto& r : s.rho.rows) nmax = std::max(nmax, r.n);
  const double a0 = s.rho.alpha0_estimate;
  const bool ok = std::abs(a0 - 1.0) <= 0.02 && s.rho_seconds < 120.0 && nmax <= 4096 + 1;
  std::ostringstream d;
  d << "alpha0_estimate=" << fmt("%.10f", a0) << " (target 1 +- 0.02), alpha0/(2 pi)=" << fmt("%.10f", a0 / (2 * pi))
    << ", runtime=" << fmt("%.1f", s.rho_seconds) << "s, max unknowns=" << nmax;
  return {ok, d.str()};
}

Outcome criterion2(Shared& s) {
  SweepConfig cfg = unit_disk_config(s.threads);
  cfg.rho_list = {0.4, 0.35, 0.3, 0.25, 0.2, 0.175, 0.15, 0.125, 0.1};
  const RhoSweep r = sweep_rho(cfg);
  const bool have = std::isfinite(r.exp_fit.residual) && std::isfinite(r.power_fit.residual);
  const bool ok = have && r.exp_fit.residual < r.power_fit.residual && r.exp_fit.p > 0.0;
  std::ostringstream d;
  d << "exp-reciprocal residual=" << fmt("%.4f", r.exp_fit.residual) << " A=" << fmt("%.4f", r.exp_fit.p)
    << ", power residual=" << fmt("%.4f", r.power_fit.residual) << " p=" << fmt("%.3f", r.power_fit.p)
    << ", points=" << r.exp_fit.points;
  return {ok, d.str()};
}

Outcome criterion3(Shared& s) {
  SweepConfig cfg = unit_disk_config(s.threads);
  cfg.eps_list = eps_ladder;
  s.eps = sweep_epsilon(cfg);
  std::vector<double> v;
  for (const auto& r : s.eps.rows) v.push_back(r.sqrt_eps_grad_mid);
  const double target = 1.0 / pi;
  bool toward = true;
  for (std::size_t i = 1; i < v.size(); ++i) toward = toward && std::abs(v[i] - target) < std::abs(v[i - 1] - target);
  const double rel = std::abs(v.back() - target) / target;
  std::ostringstream d;
  d << "sqrt(eps)|grad u(eps/2,0)| at 1e-3=" << fmt("%.7f", v.back()) << " vs 1/pi=" << fmt("%.7f", target)
    << " (rel dev " << fmt("%.3f", rel) << ", limit 0.05), monotone toward target=" << (toward ? "yes" : "no")
    << ", value/(alpha0/pi) with alpha0 from sweep-rho=" << fmt("%.7f", v.back() / (s.rho.alpha0_estimate / pi));
  return {rel <= 0.05 && toward, d.str()};
}

Outcome criterion4(Shared& s) {
  std::vector<std::pair<double, double>> pts;
  for (const auto& r : s.eps.rows) pts.emplace_back(r.eps, r.qnorm_sampled);
  const RateFit f = rate_fit(without_largest(pts), RateModel::power);
  const double ref = std::sqrt(2.0) / (std::sqrt(2.0) * pi);
  const bool ok = std::abs(f.p + 0.5) <= 0.05 && std::abs(f.c - ref) / ref <= 0.10;
  std::ostringstream d;
  d << "fitted power=" << fmt("%.4f", f.p) << " (target -0.50 +- 0.05), prefactor=" << fmt("%.5f", f.c)
    << " vs 1/pi=" << fmt("%.5f", ref) << " (limit 10%)";
  return {ok, d.str()};
}

Outcome criterion5(Shared& s) {
  const double a0 = s.rho.alpha0_estimate;
  std::vector<std::pair<double, double>> pts;
  double at_min = 0.0;
  for (const auto& r : s.eps.rows) {
    const double diff = std::abs(r.alpha_pot - a0);
    pts.emplace_back(r.eps * std::abs(std::log(r.eps)), diff);
    if (r.eps == eps_ladder.back()) at_min = diff;
  }
  const RateFit f = rate_fit(without_largest(pts), RateModel::power);
  const bool ok = std::abs(f.p - 1.0) <= 0.2 && at_min < 0.01;
  std::ostringstream d;
  d << "exponent vs eps|log eps|=" << fmt("%.4f", f.p) << " (target 1.0 +- 0.2), |alpha_eps - alpha0| at 1e-3="
    << fmt("%.3e", at_min) << " (limit 0.01), |alpha_eps - alpha0|/eps at 1e-3=" << fmt("%.5f", at_min / 1e-3);
  return {ok, d.str()};
}

Outcome criterion6(Shared& s) {
  const auto t0 = std::chrono::steady_clock::now();
  double bv = 0.0, lam = 0.0;
  SolverOptions opts;
  opts.threads = s.threads;
  for (double eps : {0.5, 0.1}) {
    const ImageSeriesOracle oracle(Disk{{-1.0, 0.0}, 1.0}, Disk{{1.0 + eps, 0.0}, 1.0}, HarmonicBackground::uniform(1.0, 0.0));
    const PairSolution u = solve_pair(unit_disks(eps), HarmonicBackground::uniform(1.0, 0.0), opts);
    for (std::size_t c = 0; c < 2; ++c)
      for (const Point2 p : u.density.curve(c).nodes())
        bv = std::max(bv, std::abs(oracle.value(p) - (c == 0 ? u.lambda1 : u.lambda2)));
    lam = std::max({lam, std::abs(oracle.lambda1() - u.lambda1), std::abs(oracle.lambda2() - u.lambda2)});
  }
  const double secs = seconds_since(t0);
  std::ostringstream d;
  d << "boundary values max dev=" << fmt("%.2e", bv) << " (limit 1e-6), lambda dev=" << fmt("%.2e", lam)
    << " (limit 1e-7), runtime=" << fmt("%.2f", secs) << "s";
  return {bv <= 1e-6 && lam <= 1e-7 && secs < 30.0, d.str()};
}

Outcome criterion7(Shared& s) {
  SolverOptions opts;
  opts.threads = s.threads;
  double worst = 0.0;
  for (double eps : {0.1, 0.01}) {
    const PairSolution q = solve_singular(unit_disks(eps), opts);
    const FixedPointPair fp = mixed_fixed_points(Disk{{-1.0, 0.0}, 1.0}, Disk{{1.0 + eps, 0.0}, 1.0});
    std::vector<Point2> pts;
    for (int k = 0; k < 20; ++k) {
      const double t = 2.0 * pi * (k + 0.37) / 20.0, r = 2.1 + 0.35 * (k % 5);
      pts.push_back({0.5 * eps + r * std::cos(t), r * std::sin(t)});
    }
    pts[0] = {0.5 * eps, 0.0};
    pts[1] = {0.5 * eps, 0.2};
    const std::vector<FieldValue> f = q.field(pts, s.threads);
    for (std::size_t k = 0; k < pts.size(); ++k) worst = std::max(worst, std::abs(f[k].value - q_explicit(pts[k], fp).value));
  }
  return {worst <= 1e-6, "max |q_BIE - q_explicit| over 20 points, eps in {0.1, 0.01}=" + fmt("%.2e", worst) + " (limit 1e-6)"};
}

Outcome criterion8(Shared&) {
  const FixedPointPair fp = mixed_fixed_points(Disk{{-1.0, 0.0}, 1.0}, Disk{{1.01, 0.0}, 1.0});
  const double closed = 0.005 + std::sqrt(1.005 * 1.005 - 1.0);
  const double exact_dev = std::abs(fp.p2.x - closed);
  const double lit = std::abs(fp.p2.x - 0.105125);
  // asymptote sqrt(2) sqrt(r1 r2 / (r1 + r2)) = 1 for unit disks; deviation bounded by 2 eps
  bool asym = true;
  double worst_ratio = 0.0;
  for (double eps : {0.04, 0.01, 0.004, 0.001}) {
    const FixedPointPair f = mixed_fixed_points(Disk{{-1.0, 0.0}, 1.0}, Disk{{1.0 + eps, 0.0}, 1.0});
    const double ratio = std::abs(f.p2.x - std::sqrt(eps)) / eps;
    worst_ratio = std::max(worst_ratio, ratio);
    asym = asym && ratio <= 2.0;
  }
  std::ostringstream d;
  d << "p2.x=" << fmt("%.9f", fp.p2.x) << ", |iterated - closed form|=" << fmt("%.1e", exact_dev)
    << ", |p2.x - 0.105125|=" << fmt("%.1e", lit) << " (limit 1e-6), max |p2.x - sqrt(eps)|/eps=" << fmt("%.3f", worst_ratio)
    << " (limit 2)";
  return {exact_dev <= 1e-12 && lit <= 1e-6 && asym, d.str()};
}

Outcome criterion9(Shared& s) {
  SweepConfig cfg = unit_disk_config(s.threads);
  cfg.eps = 0.01;
  cfg.decay_y_max = 0.8;
  cfg.decay_points = 41;
  const DecayProfile p = decay_profile(cfg);
  const double rms = p.fit.residual / std::sqrt(static_cast<double>(p.fit.points));
  const bool ok = p.fit.p > 0.0 && rms < 0.1 * p.data_range;
  std::ostringstream d;
  d << "fitted A=" << fmt("%.3f", p.fit.p) << ", rms log residual=" << fmt("%.3f", rms) << " vs 10% of log range "
    << fmt("%.3f", 0.1 * p.data_range) << " (" << p.fit.points << " points above round-off)";
  return {ok, d.str()};
}

Outcome criterion10(Shared&) {
  const NeckAsymptotics a = mobius_neck_asymptotics(Disk{{-1.0, 0.0}, 1.0}, 1e-4);
  const double dev = std::abs(a.gamma_measured - a.gamma);
  return {dev <= 0.05 * a.gamma, "(1-rho5)/sqrt(eps)=" + fmt("%.5f", a.gamma_measured) + " vs gamma=" + fmt("%.5f", a.gamma) +
                                     " (limit " + fmt("%.5f", 0.05 * a.gamma) + ")"};
}

Outcome criterion11(Shared& s) {
  SolverOptions opts;
  opts.threads = s.threads;
  double alpha_y = 0.0, gauge_alpha = 0.0, gauge_grad = 0.0, gauge_lambda = 0.0, colloc = 0.0, charge = 0.0, harm = 0.0;
  for (double eps : {0.1, 0.01, 0.001}) {
    const PairSolver solver(unit_disks(eps), opts);
    const PairSolution q = solver.solve_singular();
    const PairSolution ux = solver.solve(HarmonicBackground::uniform(1.0, 0.0));
    const PairSolution uy = solver.solve(HarmonicBackground::uniform(0.0, 1.0));
    const PairSolution us = solver.solve(HarmonicBackground::uniform(1.0, 0.0).shifted(-2.5));
    alpha_y = std::max(alpha_y, std::abs(concentration_factor(uy, q, s.threads).potential));
    gauge_alpha = std::max(gauge_alpha, std::abs(concentration_factor(us, q, s.threads).potential -
                                                 concentration_factor(ux, q, s.threads).potential));
    gauge_lambda = std::max({gauge_lambda, std::abs(us.lambda1 - ux.lambda1 + 2.5), std::abs(us.lambda2 - ux.lambda2 + 2.5)});
    const std::vector<Point2> pts{{0.5 * eps, 0.0}, {0.5 * eps, 0.3}, {-2.5, 1.0}, {1.0, 1.5}};
    const auto fx = ux.field(pts, s.threads), fs = us.field(pts, s.threads);
    for (std::size_t k = 0; k < pts.size(); ++k) gauge_grad = std::max(gauge_grad, norm(fx[k].gradient - fs[k].gradient));
    for (const PairSolution* p : {&q, &ux, &uy, &us}) {
      colloc = std::max(colloc, p->diag.colloc_residual);
      charge = std::max(charge, p->diag.charge_residual);
      // mean-value property on a small circle above the gap
      const Point2 c{0.5 * eps, 1.0};
      std::vector<Point2> ring;
      for (int k = 0; k < 64; ++k) ring.push_back(c + 0.15 * Point2{std::cos(2 * pi * k / 64), std::sin(2 * pi * k / 64)});
      double mean = 0.0;
      for (const auto& v : p->field(ring, s.threads)) mean += v.value / 64.0;
      harm = std::max(harm, std::abs(mean - p->field({&c, 1}, s.threads)[0].value));
    }
  }
  const InclusionPair touching = unit_disks(0.0);
  double rho_y = 0.0;
  for (double rho : {0.2, 0.1}) {
    const DumbbellSolution sy = solve_dumbbell(build_dumbbell(touching, rho), HarmonicBackground::uniform(0.0, 1.0), opts);
    rho_y = std::max(rho_y, std::abs(alpha_rho(sy, touching, rho, s.threads)));
    colloc = std::max(colloc, sy.diag.colloc_residual);
    charge = std::max(charge, sy.diag.charge_residual);
  }
  for (const auto& r : s.rho.rows) {
    colloc = std::max(colloc, r.colloc_residual);
    charge = std::max(charge, r.charge_residual);
  }
  const bool ok = alpha_y <= 1e-7 && rho_y <= 1e-7 && gauge_alpha <= 1e-10 && gauge_grad <= 1e-10 && gauge_lambda <= 1e-10 &&
                  colloc <= 1e-8 && charge <= 1e-10 && harm <= 1e-8;
  std::ostringstream d;
  d << "h=y alpha_eps=" << fmt("%.1e", alpha_y) << " alpha_rho=" << fmt("%.1e", rho_y) << "; gauge alpha="
    << fmt("%.1e", gauge_alpha) << " grad=" << fmt("%.1e", gauge_grad) << " lambda=" << fmt("%.1e", gauge_lambda)
    << "; boundary residual=" << fmt("%.1e", colloc) << " charge=" << fmt("%.1e", charge) << " mean-value="
    << fmt("%.1e", harm);
  return {ok, d.str()};
}

std::set<int> parse_list(const char* s) {
  std::set<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.insert(std::stoi(item));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  Shared shared;
  shared.threads = std::max(1u, std::min(4u, std::thread::hardware_concurrency()));
  std::set<int> expected;
  for (int i = 1; i < argc; ++i) {
    if (!std::strcmp(argv[i], "--threads") && i + 1 < argc)
      shared.threads = static_cast<unsigned>(std::stoi(argv[++i]));
    else if (!std::strcmp(argv[i], "--expect-fail") && i + 1 < argc)
      expected = parse_list(argv[++i]);
    else {
      std::fprintf(stderr, "usage: %s [--threads k] [--expect-fail 1,3,...]\n", argv[0]);
      return 2;
    }
  }
  const std::vector<std::pair<const char*, std::function<Outcome(Shared&)>>> criteria{
      {"disk limit value", criterion1},        {"exponential truncation", criterion2},
      {"gradient limit", criterion3},          {"blow-up rate", criterion4},
      {"alpha_eps convergence rate", criterion5}, {"oracle equivalence", criterion6},
      {"explicit singular function", criterion7}, {"fixed-point asymptote", criterion8},
      {"decay property", criterion9},          {"Mobius asymptotics", criterion10},
      {"symmetry and invariants", criterion11}};
  std::set<int> failed;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i + 1);
    Outcome o;
    try {
      o = criteria[i].second(shared);
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) failed.insert(id);
    std::printf("criterion %2d %s: %s: %s\n", id, o.pass ? "PASS" : "FAIL", criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu of %zu criteria passed\n", criteria.size() - failed.size(), criteria.size());
  if (!expected.empty()) {
    std::printf("expected failures:");
    for (int id : expected) std::printf(" %d", id);
    std::printf("\n");
  }
  return failed == expected ? 0 : 1;
}
