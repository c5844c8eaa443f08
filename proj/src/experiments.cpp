#include "gapstress/experiments.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "gapstress/disk_analytics.hpp"
#include "json.hpp"

namespace gapstress {

using nlohmann::json;

namespace {

constexpr double pi = std::numbers::pi;
constexpr std::size_t min_nodes = 16, max_nodes = 4096;
// Differences this far below the values themselves are round-off, not truncation error.
constexpr double roundoff_floor = 1e-11;

Point2 read_point(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 2) throw std::invalid_argument(std::string(what) + " must be a two-element array");
  return {j[0].get<double>(), j[1].get<double>()};
}

ShapeSpec read_shape(const json& j) {
  if (!j.is_object()) throw std::invalid_argument("shape spec must be an object");
  ShapeSpec s;
  s.kind = j.value("shape", std::string("disk"));
  if (s.kind == "disk") {
    if (j.contains("center")) s.center = read_point(j["center"], "center");
    s.radius = j.value("radius", 1.0);
  } else if (s.kind == "model") {
    s.m = j.value("m", 1);
    s.coeff = j.value("coeff", 0.5);
    s.extent = j.value("extent", 1.0);
  } else if (s.kind == "ellipse") {
    s.a = j.value("a", 1.0);
    s.b = j.value("b", 1.0);
  } else {
    throw std::invalid_argument("unknown shape kind '" + s.kind + "'");
  }
  return s;
}

std::vector<double> read_list(const json& j, const char* what) {
  if (!j.is_array()) throw std::invalid_argument(std::string(what) + " must be an array");
  return j.get<std::vector<double>>();
}

void check_decreasing(const std::vector<double>& v, const char* what) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!(v[i] > 0.0) || !std::isfinite(v[i])) throw std::invalid_argument(std::string(what) + " entries must be positive");
    if (i > 0 && !(v[i] < v[i - 1])) throw std::invalid_argument(std::string(what) + " must be strictly decreasing");
  }
}

std::string describe_error(const std::exception& e) { return e.what(); }

}  // namespace

Shape make_shape(const ShapeSpec& spec, Side side) {
  if (spec.kind == "disk") return disk_shape(spec.center, spec.radius, side);
  if (spec.kind == "model") return model_contact_shape(side, spec.m, spec.coeff, spec.extent);
  if (spec.kind == "ellipse") return ellipse_shape(side, spec.a, spec.b);
  throw std::invalid_argument("unknown shape kind '" + spec.kind + "'");
}

void SweepConfig::validate() const {
  check_decreasing(eps_list, "eps_list");
  check_decreasing(rho_list, "rho_list");
  if (eps && (!(*eps >= 0.0) || !std::isfinite(*eps))) throw std::invalid_argument("eps must be nonnegative");
  if (disc.nodes < min_nodes || disc.nodes > max_nodes)
    throw std::invalid_argument("nodes must lie in [" + std::to_string(min_nodes) + ", " + std::to_string(max_nodes) + "]");
  if (disc.corner_levels < 0 || disc.corner_levels > 12) throw std::invalid_argument("panel_depth must lie in [0, 12]");
  if (!(disc.gap_resolution > 0.0) || !(disc.max_panel_length > 0.0) || !(disc.neck_resolution > 0.0) ||
      !(disc.cluster > 0.0))
    throw std::invalid_argument("discretization resolutions must be positive");
  if (threads == 0) throw std::invalid_argument("threads must be at least 1");
  if (!(decay_y_max > 0.0) || decay_points < 3) throw std::invalid_argument("decay range needs y_max > 0 and >= 3 points");
  for (double e : eps_list)
    if (e < min_supported_eps) throw std::invalid_argument("eps_list entries must be >= 1e-3");
  // shape parameters are validated by constructing the touching pair
  (void)pair(0.0);
}

InclusionPair SweepConfig::pair(double gap) const {
  return InclusionPair(make_shape(left, Side::left), make_shape(right, Side::right), gap);
}

SweepConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
  SweepConfig cfg;
  try {
    cfg.mode = j.value("mode", std::string());
    if (j.contains("geometry")) {
      const json& g = j["geometry"];
      if (g.contains("left")) cfg.left = read_shape(g["left"]);
      if (g.contains("right")) cfg.right = read_shape(g["right"]);
    }
    if (j.contains("background")) {
      const json& b = j["background"];
      const json& c = b.contains("coeffs") ? b["coeffs"] : b;
      HarmonicBackground h;
      h.c0 = c.value("c0", 0.0);
      for (const char* key : {"a", "b"}) {
        if (!c.contains(key)) continue;
        const auto v = c[key].get<std::vector<double>>();
        if (v.size() > 4) throw std::invalid_argument("background supports degree <= 4");
        auto& dst = key[0] == 'a' ? h.a : h.b;
        std::copy(v.begin(), v.end(), dst.begin());
      }
      cfg.background = h;
    }
    if (j.contains("params")) {
      const json& p = j["params"];
      if (p.contains("eps_list")) cfg.eps_list = read_list(p["eps_list"], "eps_list");
      if (p.contains("rho_list")) cfg.rho_list = read_list(p["rho_list"], "rho_list");
      if (p.contains("eps")) cfg.eps = p["eps"].get<double>();
      cfg.decay_y_max = p.value("y_max", cfg.decay_y_max);
      cfg.decay_points = p.value("points", cfg.decay_points);
    }
    if (j.contains("discretization")) {
      const json& d = j["discretization"];
      const std::string kind = d.value("kind", std::string("panels"));
      if (kind == "panels")
        cfg.disc.kind = Discretization::Kind::panels;
      else if (kind == "spectral")
        cfg.disc.kind = Discretization::Kind::spectral;
      else
        throw std::invalid_argument("discretization kind must be 'panels' or 'spectral'");
      cfg.disc.nodes = d.value("nodes", cfg.disc.nodes);
      cfg.disc.corner_levels = d.value("panel_depth", cfg.disc.corner_levels);
      cfg.disc.gap_resolution = d.value("gap_resolution", cfg.disc.gap_resolution);
      cfg.disc.max_panel_length = d.value("max_panel_length", cfg.disc.max_panel_length);
      cfg.disc.neck_resolution = d.value("neck_resolution", cfg.disc.neck_resolution);
      cfg.disc.cluster = d.value("cluster", cfg.disc.cluster);
    }
    if (j.contains("fits")) cfg.include_largest = j["fits"].value("include_largest", false);
    cfg.output = j.value("output", std::string());
    cfg.threads = j.value("threads", 1u);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("bad config field: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

SweepConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

// ---------------------------------------------------------------------------------------------

const char* to_string(RateModel m) { return m == RateModel::power ? "power" : "exponential_reciprocal"; }

RateFit rate_fit(const std::vector<std::pair<double, double>>& points, RateModel model) {
  if (points.size() < 3) throw std::invalid_argument("rate_fit needs at least 3 points");
  const std::size_t n = points.size();
  Eigen::MatrixXd a(n, 2);
  Eigen::VectorXd b(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto [x, v] = points[i];
    if (!(x > 0.0)) throw std::invalid_argument("rate_fit abscissas must be positive");
    if (!(v > 0.0)) throw std::invalid_argument("rate_fit values must be positive under a log model");
    a(i, 0) = 1.0;
    a(i, 1) = model == RateModel::power ? std::log(x) : -1.0 / x;
    b(i) = std::log(v);
  }
  const Eigen::Vector2d coef = a.colPivHouseholderQr().solve(b);
  RateFit f;
  f.model = model;
  f.c = std::exp(coef(0));
  f.p = coef(1);
  f.residual = (a * coef - b).norm();
  f.points = n;
  return f;
}

std::vector<std::pair<double, double>> without_largest(std::vector<std::pair<double, double>> points) {
  if (points.empty()) return points;
  auto it = std::max_element(points.begin(), points.end(), [](const auto& l, const auto& r) { return l.first < r.first; });
  points.erase(it);
  return points;
}

// ---------------------------------------------------------------------------------------------

double sampled_qnorm(const PairSolution& q, unsigned threads) {
  const InclusionPair& pair = q.pair;
  const double x1 = pair.left().contact_point().x, x2 = pair.right().contact_point().x;
  const double mid = 0.5 * (x1 + x2);
  std::vector<Point2> pts;
  const int n_seg = 64, n_mid = 32;
  for (int k = 0; k < n_seg; ++k) pts.push_back({x1 + (x2 - x1) * (k + 0.5) / n_seg, 0.0});
  const double ymax = 2.0 * std::sqrt(pair.eps());
  for (int k = 1; k <= n_mid; ++k) {
    const double y = ymax * k / n_mid;
    pts.push_back({mid, y});
    pts.push_back({mid, -y});
  }
  const std::vector<FieldValue> f = q.field(pts, threads);
  double best = 0.0;
  for (const auto& v : f) best = std::max(best, norm(v.gradient));
  return best;
}

EpsRow solve_point(const SweepConfig& cfg, double eps) {
  EpsRow row;
  row.eps = eps;
  try {
    SolverOptions opts;
    opts.disc = cfg.disc;
    opts.threads = cfg.threads;
    const PairSolver solver(cfg.pair(eps), opts);
    const PairSolution u = solver.solve(cfg.background);
    const PairSolution q = solver.solve_singular();
    const AlphaEstimate a = concentration_factor(u, q, cfg.threads);
    row.n = solver.system().unknowns();
    row.alpha_pot = a.potential;
    row.alpha_flux = a.flux;
    row.lambda1 = u.lambda1;
    row.lambda2 = u.lambda2;
    const double xm = 0.5 * (solver.pair().left().contact_point().x + solver.pair().right().contact_point().x);
    const Point2 midpoint{xm, 0.0};
    row.grad_mid = u.field({&midpoint, 1}, cfg.threads)[0].gradient;
    row.sqrt_eps_grad_mid = std::sqrt(eps) * norm(row.grad_mid);
    row.qnorm_sampled = sampled_qnorm(q, cfg.threads);
    row.colloc_residual = std::max(u.diag.colloc_residual, q.diag.colloc_residual);
    row.charge_residual = std::max(u.diag.charge_residual, q.diag.charge_residual);
    row.condition = u.diag.condition_estimate;
    row.warnings = u.diag.warnings;
  } catch (const std::exception& e) {
    row.error = describe_error(e);
  }
  return row;
}

namespace {

bool monotone(const std::vector<double>& v) {
  bool up = true, down = true;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] < v[i - 1]) up = false;
    if (v[i] > v[i - 1]) down = false;
  }
  return up || down;
}

}  // namespace

EpsSweep sweep_epsilon(const SweepConfig& cfg) {
  if (cfg.eps_list.empty()) throw std::invalid_argument("sweep-eps needs params.eps_list");
  EpsSweep s;
  for (double eps : cfg.eps_list) {
    s.rows.push_back(solve_point(cfg, eps));
    const EpsRow& r = s.rows.back();
    if (!r.ok()) s.flags.push_back("eps=" + format_number(eps) + ": solve failed: " + r.error);
    for (const auto& w : r.warnings) s.flags.push_back("eps=" + format_number(eps) + ": " + w);
  }
  std::vector<double> alpha, grad;
  for (const auto& r : s.rows)
    if (r.ok()) {
      alpha.push_back(r.alpha_pot);
      grad.push_back(r.sqrt_eps_grad_mid);
    }
  if (!monotone(alpha)) s.flags.push_back("alpha_pot is not monotone in eps");
  if (!monotone(grad)) s.flags.push_back("sqrt_eps_grad_mid is not monotone in eps");
  return s;
}

RhoSweep sweep_rho(const SweepConfig& cfg) {
  if (cfg.rho_list.empty()) throw std::invalid_argument("sweep-rho needs params.rho_list");
  RhoSweep s;
  const InclusionPair touching = cfg.pair(0.0);
  SolverOptions opts;
  opts.disc = cfg.disc;
  opts.threads = cfg.threads;
  for (double rho : cfg.rho_list) {
    RhoRow row;
    row.rho = rho;
    try {
      if (!(rho < touching.rho_max())) throw GeometryError("rho exceeds rho_max of the touching pair");
      const DumbbellCurve db = build_dumbbell(touching, rho, DumbbellMode::exact_corner, cfg.disc);
      const DumbbellSolution sol = solve_dumbbell(db, cfg.background, opts);
      row.n = sol.diag.unknowns;
      row.alpha_rho = alpha_rho(sol, touching, rho, cfg.threads);
      row.lambda_rho = sol.lambda_rho;
      row.colloc_residual = sol.diag.colloc_residual;
      row.charge_residual = sol.diag.charge_residual;
      if (row.colloc_residual > 1e-8)
        s.flags.push_back("rho=" + format_number(rho) + ": corner resolution, boundary residual " +
                          format_number(row.colloc_residual));
      for (const auto& w : sol.diag.warnings) s.flags.push_back("rho=" + format_number(rho) + ": " + w);
    } catch (const std::exception& e) {
      row.error = describe_error(e);
      s.flags.push_back("rho=" + format_number(rho) + ": solve failed: " + row.error);
    }
    s.rows.push_back(row);
  }
  // ladder differences against the rung at rho / 2
  for (auto& r : s.rows) {
    if (!r.ok()) continue;
    for (const auto& o : s.rows)
      if (o.ok() && std::abs(o.rho - 0.5 * r.rho) <= 1e-9 * r.rho) r.ladder_diff = std::abs(r.alpha_rho - o.alpha_rho);
  }
  for (auto it = s.rows.rbegin(); it != s.rows.rend(); ++it)
    if (it->ok()) {
      s.alpha0_estimate = it->alpha_rho;
      break;
    }
  std::vector<std::pair<double, double>> pts;
  double last_diff = nan_value;
  for (const auto& r : s.rows) {
    if (!std::isfinite(r.ladder_diff)) continue;
    last_diff = r.ladder_diff;
    if (r.ladder_diff <= roundoff_floor * std::max(1.0, std::abs(r.alpha_rho))) {
      s.flags.push_back("rho=" + format_number(r.rho) + ": ladder difference at round-off level, excluded from fits");
      continue;
    }
    pts.emplace_back(r.rho, r.ladder_diff);
  }
  if (!cfg.include_largest) pts = without_largest(pts);
  std::vector<double> diffs;
  for (const auto& p : pts) diffs.push_back(p.second);
  if (!monotone(diffs)) s.flags.push_back("ladder differences are not monotone");
  if (pts.size() >= 3) {
    s.exp_fit = rate_fit(pts, RateModel::exponential_reciprocal);
    s.power_fit = rate_fit(pts, RateModel::power);
  } else {
    s.flags.push_back("fewer than 3 usable ladder differences; rate fits skipped");
  }
  // error bar for the smallest rung: the exponential model extrapolated there, else the last measured difference
  if (std::isfinite(s.alpha0_estimate)) {
    double err = roundoff_floor * std::max(1.0, std::abs(s.alpha0_estimate));
    if (std::isfinite(s.exp_fit.p) && s.exp_fit.p > 0.0)
      err = std::max(err, s.exp_fit.c * std::exp(-s.exp_fit.p / s.rows.back().rho));
    else if (std::isfinite(last_diff))
      err = std::max(err, last_diff);
    s.alpha0_uncertainty = err;
  }
  return s;
}

DecayProfile decay_profile(const SweepConfig& cfg) {
  if (!cfg.eps) throw std::invalid_argument("decay needs a gap (params.eps or --eps)");
  DecayProfile p;
  p.eps = *cfg.eps;
  SolverOptions opts;
  opts.disc = cfg.disc;
  opts.threads = cfg.threads;
  const std::size_t n = cfg.decay_points;
  std::vector<Point2> pts;
  std::vector<double> ys;
  std::vector<Point2> grads;
  std::vector<double> floors;
  if (p.eps > 0.0) {
    const PairSolver solver(cfg.pair(p.eps), opts);
    const InclusionPair& pair = solver.pair();
    const double ymax = std::min(cfg.decay_y_max, 0.9 * pair.graph_extent());
    for (std::size_t k = 0; k < n; ++k) {
      const double y = ymax * k / (n - 1);
      ys.push_back(y);
      const double x1 = pair.left().graph_x(y), x2 = pair.right().graph_x(y);
      pts.push_back({0.5 * (x1 + x2), y});
    }
    const PairSolution u = solver.solve(cfg.background);
    const PairSolution q = solver.solve_singular();
    p.alpha = concentration_factor(u, q, cfg.threads).potential;
    grads = eval_residual_field(u, q, p.alpha, pts, cfg.threads);
    // |grad r| is a difference of two fields; below ~1e-10 of their size it is cancellation noise
    const std::vector<FieldValue> fu = u.field(pts, cfg.threads);
    for (const auto& f : fu) floors.push_back(1e-10 * std::max(1.0, norm(f.gradient)));
  } else {
    if (cfg.rho_list.empty()) throw std::invalid_argument("touching decay proxy needs params.rho_list");
    p.touching = true;
    const double rho = cfg.rho_list.front();
    const InclusionPair touching = cfg.pair(0.0);
    const DumbbellCurve db = build_dumbbell(touching, rho, DumbbellMode::exact_corner, cfg.disc);
    const DumbbellSolution sol = solve_dumbbell(db, cfg.background, opts);
    const double ymax = std::min(cfg.decay_y_max, 0.9 * touching.graph_extent());
    const double ymin = 2.0 * rho;
    if (!(ymin < ymax)) throw std::invalid_argument("rho too large for the decay range");
    for (std::size_t k = 0; k < n; ++k) {
      const double y = ymin + (ymax - ymin) * k / (n - 1);
      ys.push_back(y);
      pts.push_back({0.5 * (touching.left().graph_x(y) + touching.right().graph_x(y)), y});
    }
    const std::vector<FieldValue> f = eval_field(sol.density, sol.background, pts, cfg.threads);
    for (const auto& v : f) {
      grads.push_back(v.gradient);
      floors.push_back(1e-10);
    }
  }
  std::vector<std::pair<double, double>> fit_pts;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (std::size_t k = 0; k < n; ++k) {
    DecayRow row;
    row.y = ys[k];
    row.x_mid = pts[k].x;
    row.grad_norm = norm(grads[k]);
    const double scale = p.touching ? std::abs(ys[k]) : std::sqrt(p.eps) + std::abs(ys[k]);
    row.inv_scale = 1.0 / scale;
    p.rows.push_back(row);
    if (row.grad_norm > floors[k]) {
      fit_pts.emplace_back(scale, row.grad_norm);
      lo = std::min(lo, std::log(row.grad_norm));
      hi = std::max(hi, std::log(row.grad_norm));
    }
  }
  if (fit_pts.size() >= 3) {
    p.fit = rate_fit(fit_pts, RateModel::exponential_reciprocal);
    p.data_range = hi - lo;
  }
  return p;
}

// ---------------------------------------------------------------------------------------------

bool VerifyReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

namespace {

class Checker {
 public:
  Checker(VerifyReport& r, std::string suite) : r_(r), suite_(std::move(suite)) {}
  void below(const std::string& name, double measured, double tol, std::string detail = {}) {
    r_.checks.push_back({suite_, name, measured, tol, std::isfinite(measured) && measured <= tol, std::move(detail)});
  }
  void truth(const std::string& name, bool ok, std::string detail = {}) {
    r_.checks.push_back({suite_, name, ok ? 1.0 : 0.0, 1.0, ok, std::move(detail)});
  }
  template <class F>
  void guarded(const std::string& name, F&& f) {
    try {
      f();
    } catch (const std::exception& e) {
      r_.checks.push_back({suite_, name, nan_value, nan_value, false, std::string("exception: ") + e.what()});
    }
  }

 private:
  VerifyReport& r_;
  std::string suite_;
};

InclusionPair unit_disks(double eps) {
  return InclusionPair(disk_shape({-1.0, 0.0}, 1.0, Side::left), disk_shape({1.0, 0.0}, 1.0, Side::right), eps);
}

std::vector<Point2> exterior_probe_points(const InclusionPair& pair) {
  std::vector<Point2> pts;
  const double e = pair.eps();
  for (int k = 0; k < 20; ++k) {
    const double t = 2.0 * pi * (k + 0.37) / 20.0;
    const double r = 2.4 + 0.3 * (k % 4);
    pts.push_back({0.5 * e + r * std::cos(t), r * std::sin(t)});
  }
  // a few near the gap
  pts[0] = {0.5 * e, 0.3};
  pts[1] = {0.5 * e, -0.05};
  pts[2] = {0.5 * e, 0.0};
  return pts;
}

void disk_suite(VerifyReport& rep, unsigned threads) {
  Checker ck(rep, "disk");
  const Disk b1{{-1.0, 0.0}, 1.0};
  ck.guarded("fixed_point_closed_form", [&] {
    const FixedPointPair fp = mixed_fixed_points(b1, Disk{{1.01, 0.0}, 1.0});
    const double exact = 0.005 + std::sqrt(1.005 * 1.005 - 1.0);
    ck.below("fixed_point_closed_form", std::abs(fp.p2.x - exact), 1e-12);
    ck.below("fixed_point_residual", fp.residual, 1e-12);
    ck.below("fixed_point_asymptote", std::abs(fp.p2.x - std::sqrt(0.01)), 2.0 * 0.01);
  });
  ck.guarded("q_explicit_fluxes", [&] {
    const FixedPointPair fp = mixed_fixed_points(b1, Disk{{1.01, 0.0}, 1.0});
    double worst = 0.0;
    for (int j = 0; j < 2; ++j) {
      const Point2 c = j == 0 ? Point2{-1.0, 0.0} : Point2{1.01, 0.0};
      const int n = 4096;
      double flux = 0.0;
      for (int k = 0; k < n; ++k) {
        const double t = 2.0 * pi * k / n;
        const Point2 dir{std::cos(t), std::sin(t)};
        flux += dot(q_explicit(c + dir, fp).gradient, -dir) * 2.0 * pi / n;
      }
      worst = std::max(worst, std::abs(flux - (j == 0 ? -1.0 : 1.0)));
    }
    ck.below("q_explicit_fluxes", worst, 1e-8);
  });
  SolverOptions opts;
  opts.threads = threads;
  for (double eps : {0.1, 0.01}) {
    const std::string tag = "eps=" + format_number(eps);
    ck.guarded("bie_q_vs_explicit " + tag, [&] {
      const PairSolver solver(unit_disks(eps), opts);
      const PairSolution q = solver.solve_singular();
      const FixedPointPair fp = mixed_fixed_points(b1, Disk{{1.0 + eps, 0.0}, 1.0});
      const std::vector<Point2> pts = exterior_probe_points(solver.pair());
      const std::vector<FieldValue> f = q.field(pts, threads);
      double worst = 0.0;
      for (std::size_t k = 0; k < pts.size(); ++k) worst = std::max(worst, std::abs(f[k].value - q_explicit(pts[k], fp).value));
      ck.below("bie_q_vs_explicit " + tag, worst, 1e-6);
      const double f1 = boundary_flux(q.density, q.background, 0, threads).integral;
      const double f2 = boundary_flux(q.density, q.background, 1, threads).integral;
      ck.below("bie_q_fluxes " + tag, std::max(std::abs(f1 + 1.0), std::abs(f2 - 1.0)), 1e-9);
      std::vector<Point2> mirrored;
      for (const auto& p : pts) mirrored.push_back({eps - p.x, p.y});
      const std::vector<FieldValue> g = q.field(mirrored, threads);
      double anti = 0.0;
      for (std::size_t k = 0; k < pts.size(); ++k) anti = std::max(anti, std::abs(f[k].value + g[k].value));
      ck.below("bie_q_antisymmetry " + tag, anti, 1e-8);

      const PairSolution ux = solver.solve(HarmonicBackground::uniform(1.0, 0.0));
      const PairSolution uy = solver.solve(HarmonicBackground::uniform(0.0, 1.0));
      ck.below("lambda_antisymmetry " + tag, std::abs(ux.lambda1 + ux.lambda2 - eps), 1e-8);
      ck.below("h_y_lambdas " + tag, std::max(std::abs(uy.lambda1), std::abs(uy.lambda2)), 1e-8);
      const AlphaEstimate ax = concentration_factor(ux, q, threads), ay = concentration_factor(uy, q, threads);
      ck.below("h_y_alpha " + tag, std::abs(ay.potential), 1e-7);
      ck.below("alpha_estimators_agree " + tag, ax.discrepancy(), 1e-6);
      // The singular function carries unit flux, so the disk formula appears multiplied by 2 pi.
      const double ref = 2.0 * pi * alpha_disk_asymptotic(1.0, 1.0, HarmonicBackground::uniform(1.0, 0.0));
      ck.below("alpha_vs_disk_formula " + tag, std::abs(ax.potential - ref) / ref, 2.0 * std::sqrt(eps),
               "relative, alpha / (2 pi) compared with 2 r1 r2 / (r1 + r2)");

      const PairSolution us = solver.solve(HarmonicBackground::uniform(1.0, 0.0).shifted(0.75));
      const AlphaEstimate as = concentration_factor(us, q, threads);
      const double shift = std::max(std::abs(us.lambda1 - ux.lambda1 - 0.75), std::abs(us.lambda2 - ux.lambda2 - 0.75));
      ck.below("gauge_shift_lambdas " + tag, shift, 1e-10);
      ck.below("gauge_shift_alpha " + tag, std::abs(as.potential - ax.potential), 1e-10);
      const std::vector<FieldValue> gx = ux.field(pts, threads), gs = us.field(pts, threads);
      double gd = 0.0;
      for (std::size_t k = 0; k < pts.size(); ++k) gd = std::max(gd, norm(gx[k].gradient - gs[k].gradient));
      ck.below("gauge_shift_gradients " + tag, gd, 1e-10);

      // Green's reciprocity between u - h and q over both boundaries.
      double green = 0.0;
      for (std::size_t c = 0; c < 2; ++c) {
        const ParametricCurve& cv = ux.density.curve(c);
        const FluxResult fu = boundary_flux(ux.density, HarmonicBackground::zero(), c, threads);
        const FluxResult fq = boundary_flux(q.density, q.background, c, threads);
        const double lu = c == 0 ? ux.lambda1 : ux.lambda2, lq = c == 0 ? q.lambda1 : q.lambda2;
        for (std::size_t i = 0; i < cv.size(); ++i) {
          const double w = lu - ux.background.value(cv.nodes()[i]);
          green += cv.weights()[i] * (w * fq.pointwise[i] - lq * fu.pointwise[i]);
        }
      }
      ck.below("green_reciprocity " + tag, std::abs(green), 1e-7);
      ck.below("collocation_residual " + tag, std::max(ux.diag.colloc_residual, q.diag.colloc_residual), 1e-8);
      ck.below("charge_residual " + tag, std::max(ux.diag.charge_residual, q.diag.charge_residual), 1e-10);
      ck.below("linear_residual " + tag, std::max(ux.diag.linear_residual, q.diag.linear_residual), 1e-12);
    });
  }
  ck.guarded("mesh_refinement", [&] {
    SolverOptions fine = opts;
    fine.disc.gap_resolution *= 0.5;
    fine.disc.max_panel_length *= 0.5;
    const InclusionPair pair = unit_disks(0.01);
    const PairSolver a(pair, opts), b(pair, fine);
    const double a1 = concentration_factor(a.solve(HarmonicBackground::uniform(1.0, 0.0)), a.solve_singular()).potential;
    const double a2 = concentration_factor(b.solve(HarmonicBackground::uniform(1.0, 0.0)), b.solve_singular()).potential;
    ck.below("mesh_refinement eps=0.01", std::abs(a1 - a2), 1e-7);
  });
  ck.guarded("harmonicity", [&] {
    const PairSolution u = solve_pair(unit_disks(0.1), HarmonicBackground::uniform(1.0, 0.0), opts);
    double worst = 0.0;
    for (const Point2 c : {Point2{0.05, 0.6}, Point2{-2.6, 0.4}, Point2{1.3, -1.4}}) {
      const double r = 0.2;
      std::vector<Point2> ring;
      for (int k = 0; k < 64; ++k) ring.push_back(c + r * Point2{std::cos(2 * pi * k / 64), std::sin(2 * pi * k / 64)});
      const std::vector<FieldValue> f = u.field(ring, threads);
      double mean = 0.0;
      for (const auto& v : f) mean += v.value / 64.0;
      worst = std::max(worst, std::abs(mean - u.field({&c, 1}, threads)[0].value));
    }
    ck.below("harmonicity_mean_value", worst, 1e-8);
  });
  ck.guarded("dumbbell_alpha", [&] {
    const InclusionPair touching = unit_disks(0.0);
    const DumbbellCurve db = build_dumbbell(touching, 0.1);
    const DumbbellSolution sx = solve_dumbbell(db, HarmonicBackground::uniform(1.0, 0.0), opts);
    const DumbbellSolution sy = solve_dumbbell(db, HarmonicBackground::uniform(0.0, 1.0), opts);
    const double ref = 2.0 * pi * alpha_disk_asymptotic(1.0, 1.0, HarmonicBackground::uniform(1.0, 0.0));
    ck.below("dumbbell_alpha_vs_disk_formula rho=0.1", std::abs(alpha_rho(sx, touching, 0.1, threads) - ref) / ref, 0.02,
             "relative, alpha_(rho) / (2 pi) compared with 2 r1 r2 / (r1 + r2)");
    ck.below("dumbbell_lambda_h_x", std::abs(sx.lambda_rho), 1e-7);
    ck.below("dumbbell_alpha_h_y", std::abs(alpha_rho(sy, touching, 0.1, threads)), 1e-7);
    ck.below("dumbbell_charge", sx.diag.charge_residual, 1e-10);
  });
  ck.guarded("blowup_reference", [&] {
    const BlowupReference b = blowup_reference(1.0, 1.0, 1.0, 0.01);
    ck.below("blowup_grad_limit", std::abs(b.grad_limit - 1.0 / pi), 1e-15);
    ck.below("blowup_qnorm", std::abs(b.qnorm_leading - 10.0 / pi), 1e-13);
  });
}

void mobius_suite(VerifyReport& rep) {
  Checker ck(rep, "mobius");
  ck.guarded("mobius_concentric", [&] {
    const MobiusResult m = mobius_concentric({0.5, 0.0}, 0.25);
    ck.below("alpha_value", std::abs(m.alpha.real() - 0.5470656), 1e-7);
    double lo = 1e9, hi = 0.0, ulo = 1e9, uhi = 0.0;
    for (int k = 0; k < 64; ++k) {
      const double t = 2.0 * pi * k / 64;
      const double r = std::abs(mobius(m.alpha, {0.5 + 0.25 * std::cos(t), 0.25 * std::sin(t)}));
      const double u = std::abs(mobius(m.alpha, {std::cos(t), std::sin(t)}));
      lo = std::min(lo, r);
      hi = std::max(hi, r);
      ulo = std::min(ulo, u);
      uhi = std::max(uhi, u);
    }
    ck.below("constant_modulus", hi - lo, 1e-12);
    ck.below("unit_circle_preserved", std::max(std::abs(ulo - 1.0), std::abs(uhi - 1.0)), 1e-12);
  });
  ck.guarded("neck_asymptotics", [&] {
    const Disk b1{{-1.0, 0.0}, 1.0};
    const NeckAsymptotics a = mobius_neck_asymptotics(b1, 1e-4);
    ck.below("rho5_asymptotics eps=1e-4", std::abs(a.gamma_measured - a.gamma) / a.gamma, 0.05, "relative deviation from gamma");
    ck.below("beta_formula", std::abs(a.beta - std::sqrt(2.0 * (a.c3 + 1.0) / std::abs(a.c3))), 1e-15);
    std::vector<double> dev;
    for (double e : {1e-2, 1e-3, 1e-4}) dev.push_back(std::abs(mobius_neck_asymptotics(b1, e).gamma_measured - a.gamma));
    ck.truth("rho5_monotone_trend", dev[0] > dev[1] && dev[1] > dev[2]);
  });
}

void oracle_suite(VerifyReport& rep, unsigned threads) {
  Checker ck(rep, "oracle");
  const auto start = std::chrono::steady_clock::now();
  SolverOptions opts;
  opts.threads = threads;
  for (double eps : {0.5, 0.1}) {
    const std::string tag = "eps=" + format_number(eps);
    ck.guarded("oracle " + tag, [&] {
      const Disk b1{{-1.0, 0.0}, 1.0}, b2{{1.0 + eps, 0.0}, 1.0};
      const HarmonicBackground h = HarmonicBackground::uniform(1.0, 0.0);
      const ImageSeriesOracle oracle(b1, b2, h);
      ck.below("oracle_self_consistency " + tag, oracle.boundary_residual(), 1e-10);
      const PairSolution u = solve_pair(unit_disks(eps), h, opts);
      double worst = 0.0;
      for (std::size_t c = 0; c < 2; ++c) {
        const ParametricCurve& cv = u.density.curve(c);
        const double lam = c == 0 ? u.lambda1 : u.lambda2;
        for (const Point2 p : cv.nodes()) worst = std::max(worst, std::abs(oracle.value(p) - lam));
      }
      ck.below("boundary_values " + tag, worst, 1e-6);
      ck.below("lambdas " + tag, std::max(std::abs(oracle.lambda1() - u.lambda1), std::abs(oracle.lambda2() - u.lambda2)),
               1e-7);
      const std::vector<Point2> pts = exterior_probe_points(u.pair);
      const std::vector<FieldValue> f = u.field(pts, threads);
      double fd = 0.0;
      for (std::size_t k = 0; k < pts.size(); ++k) fd = std::max(fd, norm(f[k].gradient - oracle.gradient(pts[k])));
      ck.below("exterior_gradients " + tag, fd, 1e-6);
    });
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  ck.below("runtime_seconds", secs, 30.0);
}

}  // namespace

VerifyReport verify(const std::string& suite, unsigned threads) {
  VerifyReport rep;
  const bool all = suite == "all";
  if (!all && suite != "disk" && suite != "mobius" && suite != "oracle")
    throw std::invalid_argument("unknown suite '" + suite + "' (expected disk, mobius, oracle or all)");
  if (all || suite == "disk") disk_suite(rep, threads);
  if (all || suite == "mobius") mobius_suite(rep);
  if (all || suite == "oracle") oracle_suite(rep, threads);
  return rep;
}

// ---------------------------------------------------------------------------------------------

std::string format_number(double v) {
  if (!std::isfinite(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12e", v);
  return buf;
}

namespace {

void csv_line(std::ostream& os, std::initializer_list<std::string> cells) {
  bool first = true;
  for (const auto& c : cells) {
    if (!first) os << ',';
    os << c;
    first = false;
  }
  os << '\n';
}

std::string count(std::size_t n) { return std::to_string(n); }

json fit_json(const RateFit& f) {
  return {{"model", to_string(f.model)}, {"c", f.c}, {f.model == RateModel::power ? "p" : "A", f.p}, {"residual", f.residual},
          {"points", f.points}};
}

json config_json(const SweepConfig& cfg) {
  json j;
  j["mode"] = cfg.mode;
  j["left"] = cfg.left.kind;
  j["right"] = cfg.right.kind;
  j["discretization"] = {{"kind", cfg.disc.kind == Discretization::Kind::panels ? "panels" : "spectral"},
                         {"nodes", cfg.disc.nodes},
                         {"panel_depth", cfg.disc.corner_levels}};
  j["threads"] = cfg.threads;
  return j;
}

}  // namespace

void write_csv(std::ostream& os, const EpsSweep& s) {
  os << eps_csv_header << '\n';
  for (const auto& r : s.rows)
    csv_line(os, {format_number(r.eps), count(r.n), format_number(r.alpha_pot), format_number(r.alpha_flux),
                  format_number(r.lambda1), format_number(r.lambda2), format_number(r.grad_mid.x), format_number(r.grad_mid.y),
                  format_number(r.sqrt_eps_grad_mid), format_number(r.qnorm_sampled), format_number(r.colloc_residual),
                  format_number(r.charge_residual)});
}

void write_csv(std::ostream& os, const RhoSweep& s) {
  os << rho_csv_header << '\n';
  for (const auto& r : s.rows)
    csv_line(os, {format_number(r.rho), count(r.n), format_number(r.alpha_rho), format_number(r.lambda_rho),
                  format_number(r.ladder_diff), format_number(r.colloc_residual), format_number(r.charge_residual)});
}

void write_csv(std::ostream& os, const DecayProfile& p) {
  os << decay_csv_header << '\n';
  for (const auto& r : p.rows)
    csv_line(os, {format_number(r.y), format_number(r.x_mid), format_number(r.grad_norm), format_number(r.inv_scale)});
}

void write_json(std::ostream& os, const EpsSweep& s, const SweepConfig& cfg) {
  json j;
  j["config"] = config_json(cfg);
  j["rows"] = json::array();
  for (const auto& r : s.rows) {
    json row = {{"eps", r.eps},
                {"N", r.n},
                {"alpha_pot", r.alpha_pot},
                {"alpha_flux", r.alpha_flux},
                {"lambda1", r.lambda1},
                {"lambda2", r.lambda2},
                {"grad_mid", {r.grad_mid.x, r.grad_mid.y}},
                {"sqrt_eps_grad_mid", r.sqrt_eps_grad_mid},
                {"qnorm_sampled", r.qnorm_sampled},
                {"colloc_residual", r.colloc_residual},
                {"charge_residual", r.charge_residual},
                {"condition", r.condition}};
    if (!r.ok()) row["error"] = r.error;
    j["rows"].push_back(row);
  }
  j["flags"] = s.flags;
  os << j.dump(2) << '\n';
}

void write_json(std::ostream& os, const RhoSweep& s, const SweepConfig& cfg) {
  json j;
  j["config"] = config_json(cfg);
  j["rows"] = json::array();
  for (const auto& r : s.rows) {
    json row = {{"rho", r.rho},
                {"N", r.n},
                {"alpha_rho", r.alpha_rho},
                {"lambda_rho", r.lambda_rho},
                {"ladder_diff", r.ladder_diff},
                {"colloc_residual", r.colloc_residual},
                {"charge_residual", r.charge_residual}};
    if (!r.ok()) row["error"] = r.error;
    j["rows"].push_back(row);
  }
  j["alpha0_estimate"] = s.alpha0_estimate;
  j["alpha0_uncertainty"] = s.alpha0_uncertainty;
  j["fits"] = {fit_json(s.exp_fit), fit_json(s.power_fit)};
  j["flags"] = s.flags;
  os << j.dump(2) << '\n';
}

void write_json(std::ostream& os, const DecayProfile& p, const SweepConfig& cfg) {
  json j;
  j["config"] = config_json(cfg);
  j["eps"] = p.eps;
  j["alpha"] = p.alpha;
  j["touching_proxy"] = p.touching;
  j["rows"] = json::array();
  for (const auto& r : p.rows) j["rows"].push_back({{"y", r.y}, {"x_mid", r.x_mid}, {"grad_norm", r.grad_norm}, {"inv_scale", r.inv_scale}});
  j["fit"] = fit_json(p.fit);
  j["log_data_range"] = p.data_range;
  os << j.dump(2) << '\n';
}

void write_json(std::ostream& os, const VerifyReport& r) {
  json j;
  j["passed"] = r.passed();
  j["checks"] = json::array();
  for (const auto& c : r.checks) {
    json cj = {{"suite", c.suite}, {"name", c.name}, {"measured", c.measured}, {"tolerance", c.tolerance}, {"passed", c.passed}};
    if (!c.detail.empty()) cj["detail"] = c.detail;
    j["checks"].push_back(cj);
  }
  os << j.dump(2) << '\n';
}

}  // namespace gapstress
