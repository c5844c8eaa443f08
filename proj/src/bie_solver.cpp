#include "gapstress/bie_solver.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "gapstress/parallel.hpp"

namespace gapstress {

namespace {

constexpr double pi = std::numbers::pi;

struct CheckPoint {
  std::size_t curve;
  std::size_t segment;
  double t;
  Point2 z;
};

std::vector<CheckPoint> check_points(const LayerPotential& lp) {
  std::vector<CheckPoint> pts;
  for (std::size_t c = 0; c < lp.curves().size(); ++c) {
    const ParametricCurve& cv = *lp.curves()[c];
    if (cv.mode() == ParametricCurve::Mode::periodic) {
      const double h = 2.0 * pi / cv.size();
      for (std::size_t i = 0; i < cv.size(); ++i) {
        const double t = cv.params()[i] + 0.5 * h;
        pts.push_back({c, 0, t, cv.path(0)(t).z});
      }
    } else {
      const auto panels = cv.panels();
      for (std::size_t p = 0; p < panels.size(); ++p) {
        const double t = 0.5 * (panels[p].t0 + panels[p].t1);
        pts.push_back({c, p, t, cv.path(panels[p].path)(t).z});
      }
    }
  }
  return pts;
}

}  // namespace

FloatingConductorSystem::FloatingConductorSystem(std::vector<CurvePtr> curves, std::vector<std::size_t> conductor_of_curve,
                                                 const SolverOptions& opts)
    : conductor_of_curve_(std::move(conductor_of_curve)), opts_(opts) {
  if (curves.empty()) throw std::invalid_argument("no curves to solve on");
  if (conductor_of_curve_.size() != curves.size()) throw std::invalid_argument("one conductor index per curve required");
  conductors_ = *std::max_element(conductor_of_curve_.begin(), conductor_of_curve_.end()) + 1;
  for (std::size_t k = 0; k < conductors_; ++k)
    if (std::find(conductor_of_curve_.begin(), conductor_of_curve_.end(), k) == conductor_of_curve_.end())
      throw std::invalid_argument("conductor indices must be contiguous");
  potential_ = std::make_shared<const LayerPotential>(std::move(curves));
  const LayerPotential& lp = *potential_;
  const std::size_t n = lp.size(), m = n + conductors_;
  matrix_ = Eigen::MatrixXd::Zero(m, m);
  matrix_.topLeftCorner(n, n) = lp.slp_matrix(opts_.threads);
  for (std::size_t c = 0; c < lp.curves().size(); ++c) {
    const ParametricCurve& cv = *lp.curves()[c];
    const std::size_t k = conductor_of_curve_[c], off = lp.offset(c);
    for (std::size_t i = 0; i < cv.size(); ++i) {
      matrix_(off + i, n + k) = -1.0;
      matrix_(n + k, off + i) = cv.weights()[i];
    }
  }
  lu_.compute(matrix_);
  const double rc = lu_.rcond();
  condition_ = rc > 0.0 ? 1.0 / rc : std::numeric_limits<double>::infinity();
}

FloatingConductorSystem::Result FloatingConductorSystem::solve(const HarmonicBackground& h,
                                                               std::span<const double> charges) const {
  if (charges.size() != conductors_) throw std::invalid_argument("one charge per conductor required");
  const LayerPotential& lp = *potential_;
  const std::size_t n = lp.size(), m = n + conductors_;
  Eigen::VectorXd rhs(m);
  for (std::size_t c = 0; c < lp.curves().size(); ++c) {
    const ParametricCurve& cv = *lp.curves()[c];
    for (std::size_t i = 0; i < cv.size(); ++i) rhs(lp.offset(c) + i) = -h.value(cv.nodes()[i]);
  }
  for (std::size_t k = 0; k < conductors_; ++k) rhs(n + k) = charges[k];
  const Eigen::VectorXd x = lu_.solve(rhs);
  if (!x.allFinite()) throw std::runtime_error("linear solve produced non-finite values");

  Result res{BoundaryDensity(potential_, x.head(n)), std::vector<double>(x.data() + n, x.data() + m), {}};
  SolveDiagnostics& d = res.diag;
  d.unknowns = m;
  d.condition_estimate = condition_;
  const Eigen::VectorXd r = matrix_ * x - rhs;
  d.linear_residual = r.lpNorm<Eigen::Infinity>() / std::max(rhs.lpNorm<Eigen::Infinity>(), 1e-300);
  d.node_residual = r.head(n).lpNorm<Eigen::Infinity>();
  std::vector<double> got(conductors_, 0.0);
  for (std::size_t c = 0; c < lp.curves().size(); ++c) got[conductor_of_curve_[c]] += res.density.charge(c);
  for (std::size_t k = 0; k < conductors_; ++k) d.charge_residual = std::max(d.charge_residual, std::abs(got[k] - charges[k]));

  if (opts_.check_residual) {
    const std::vector<CheckPoint> pts = check_points(lp);
    std::vector<double> dev(pts.size());
    parallel_for(pts.size(), opts_.threads, [&](std::size_t k) {
      std::vector<double> row(n, 0.0);
      lp.boundary_value_row(pts[k].curve, pts[k].segment, pts[k].t, row);
      const double u = h.value(pts[k].z) + Eigen::Map<const Eigen::VectorXd>(row.data(), n).dot(x.head(n));
      dev[k] = std::abs(u - res.lambda[conductor_of_curve_[pts[k].curve]]);
    });
    d.colloc_residual = dev.empty() ? 0.0 : *std::max_element(dev.begin(), dev.end());
  }
  if (condition_ > condition_warning_threshold) {
    d.ill_conditioned = true;
    std::ostringstream msg;
    msg << "estimated condition number " << condition_ << " exceeds " << condition_warning_threshold;
    d.warnings.push_back(msg.str());
  }
  return res;
}

// ---------------------------------------------------------------------------------------------

std::vector<FieldValue> PairSolution::field(std::span<const Point2> points, unsigned threads) const {
  return eval_field(density, background, points, threads);
}

namespace {

const InclusionPair& check_pair_eps(const InclusionPair& pair) {
  if (pair.eps() == 0.0) throw GeometryError("touching pair: use solve_dumbbell");
  if (pair.eps() < min_supported_eps) {
    std::ostringstream msg;
    msg << "eps = " << pair.eps() << " is below the supported minimum " << min_supported_eps;
    throw GeometryError(msg.str());
  }
  return pair;
}

std::vector<CurvePtr> pair_curve_list(const PairCurves& pc) { return {pc.left, pc.right}; }

}  // namespace

PairSolver::PairSolver(const InclusionPair& pair, const SolverOptions& opts)
    : pair_(check_pair_eps(pair)),
      curves_(discretize(pair_, opts.disc)),
      system_(pair_curve_list(curves_), {0, 1}, opts) {}

PairSolution PairSolver::solve(const HarmonicBackground& h) const {
  const double charges[2] = {0.0, 0.0};
  auto r = system_.solve(h, charges);
  return {pair_, std::move(r.density), r.lambda[0], r.lambda[1], h, false, std::move(r.diag)};
}

PairSolution PairSolver::solve_singular() const {
  const double charges[2] = {1.0, -1.0};
  auto r = system_.solve(HarmonicBackground::zero(), charges);
  return {pair_, std::move(r.density), r.lambda[0], r.lambda[1], HarmonicBackground::zero(), true, std::move(r.diag)};
}

PairSolution solve_pair(const InclusionPair& pair, const HarmonicBackground& h, const SolverOptions& opts) {
  return PairSolver(pair, opts).solve(h);
}

PairSolution solve_singular(const InclusionPair& pair, const SolverOptions& opts) {
  return PairSolver(pair, opts).solve_singular();
}

DumbbellSolution solve_dumbbell(const DumbbellCurve& db, const HarmonicBackground& h, const SolverOptions& opts) {
  if (!db.curve) throw GeometryError("dumbbell has no boundary");
  const FloatingConductorSystem sys({db.curve}, {0}, opts);
  const double charge = 0.0;
  auto r = sys.solve(h, {&charge, 1});
  return {db, std::move(r.density), r.lambda[0], h, std::move(r.diag)};
}

AlphaEstimate concentration_factor(const PairSolution& u, const PairSolution& q, unsigned threads) {
  if (u.singular || !q.singular) throw std::invalid_argument("concentration_factor expects (u, q) in that order");
  if (u.density.values().size() != q.density.values().size() || u.pair.eps() != q.pair.eps())
    throw std::invalid_argument("u and q must be solved on the same pair");
  const double dq = q.lambda2 - q.lambda1;
  if (!(std::abs(dq) > 0.0)) throw std::runtime_error("degenerate singular function: equal boundary constants");
  AlphaEstimate a;
  a.potential = (u.lambda2 - u.lambda1) / dq;
  a.flux = boundary_flux(u.density, u.background, 0, threads).integral + a.potential;
  return a;
}

double alpha_rho(const DumbbellSolution& sol, const InclusionPair& touching, double rho, unsigned threads) {
  if (touching.eps() != 0.0) throw GeometryError("alpha_rho needs the touching pair");
  if (!(rho > 0.0)) throw std::invalid_argument("rho must be positive");
  const ParametricCurve& cv = sol.density.curve(0);
  const FluxResult flux = boundary_flux(sol.density, sol.background, 0, threads);
  const double cut = 2.0 * rho;
  double total = 0.0;
  std::size_t used = 0;
  for (std::size_t i = 0; i < cv.size(); ++i) {
    if (cv.tag(i) != DumbbellPiece::left_arc) continue;
    const Point2 z = cv.nodes()[i];
    if (std::max(std::abs(z.x), std::abs(z.y)) <= cut) continue;
    total += cv.weights()[i] * flux.pointwise[i];
    ++used;
  }
  if (used == 0) throw GeometryError("the doubled square contains the whole left boundary");
  return total;
}

std::vector<Point2> eval_residual_field(const PairSolution& u, const PairSolution& q, double alpha,
                                        std::span<const Point2> points, unsigned threads) {
  const std::vector<FieldValue> fu = u.field(points, threads);
  std::vector<Point2> out(points.size());
  if (alpha == 0.0) {
    for (std::size_t k = 0; k < points.size(); ++k) out[k] = fu[k].gradient;
    return out;
  }
  const std::vector<FieldValue> fq = q.field(points, threads);
  for (std::size_t k = 0; k < points.size(); ++k) out[k] = fu[k].gradient - alpha * fq[k].gradient;
  return out;
}

}  // namespace gapstress
