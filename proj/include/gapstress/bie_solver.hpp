#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gapstress/geometry.hpp"
#include "gapstress/potentials.hpp"

namespace gapstress {

/// Smallest gap accepted by the pair solvers.
inline constexpr double min_supported_eps = 1e-3;
/// Condition estimates above this are reported as ill-conditioned.
inline constexpr double condition_warning_threshold = 1e12;

struct SolverOptions {
  Discretization disc;
  unsigned threads = 1;
  /// Measure |u - lambda| at off-node check points (panel midpoints or half-step parameters).
  bool check_residual = true;
};

struct SolveDiagnostics {
  std::size_t unknowns = 0;
  double colloc_residual = 0.0;  // max |u - lambda| over off-node boundary check points
  double node_residual = 0.0;    // max |u - lambda| at the collocation nodes
  double charge_residual = 0.0;  // max deviation of a conductor charge from its prescription
  double linear_residual = 0.0;  // |A x - b| / |b|, infinity norms
  double condition_estimate = 0.0;
  bool ill_conditioned = false;
  std::vector<std::string> warnings;
};

/// Dense augmented Nystrom system for floating conductors. Unknowns are the densities on all
/// curves followed by one constant per conductor; rows are S[phi] - lambda = -h at every node and
/// one total-charge row per conductor. Factorized once, solved for any number of right-hand sides.
class FloatingConductorSystem {
 public:
  struct Result {
    BoundaryDensity density;
    std::vector<double> lambda;
    SolveDiagnostics diag;
  };

  FloatingConductorSystem(std::vector<CurvePtr> curves, std::vector<std::size_t> conductor_of_curve,
                          const SolverOptions& opts = {});

  const LayerPotentialPtr& potential() const { return potential_; }
  std::size_t conductors() const { return conductors_; }
  std::size_t unknowns() const { return matrix_.rows(); }
  double condition_estimate() const { return condition_; }

  /// `charges[k]` is the prescribed integral of phi over conductor k.
  Result solve(const HarmonicBackground& h, std::span<const double> charges) const;

 private:
  LayerPotentialPtr potential_;
  std::vector<std::size_t> conductor_of_curve_;
  std::size_t conductors_ = 0;
  SolverOptions opts_;
  Eigen::MatrixXd matrix_;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
  double condition_ = 0.0;
};

struct PairSolution {
  InclusionPair pair;
  BoundaryDensity density;  // phi_1 then phi_2
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  HarmonicBackground background;  // zero for the singular function
  bool singular = false;          // true when this is q_eps (charges +1, -1)
  SolveDiagnostics diag;

  std::vector<FieldValue> field(std::span<const Point2> points, unsigned threads = 1) const;
};

/// Discretizes a pair once and solves both the u_eps and q_eps problems on it.
class PairSolver {
 public:
  explicit PairSolver(const InclusionPair& pair, const SolverOptions& opts = {});

  const InclusionPair& pair() const { return pair_; }
  const PairCurves& curves() const { return curves_; }
  const FloatingConductorSystem& system() const { return system_; }

  /// u = h + S[phi], u = lambda_j on each boundary, zero charge on each curve.
  PairSolution solve(const HarmonicBackground& h) const;
  /// q = S[phi] with charges +1 on the left curve and -1 on the right, so that the flux of q
  /// through the left boundary (normal into the inclusion) is -1 and through the right one +1.
  PairSolution solve_singular() const;

 private:
  InclusionPair pair_;
  PairCurves curves_;
  FloatingConductorSystem system_;
};

PairSolution solve_pair(const InclusionPair& pair, const HarmonicBackground& h, const SolverOptions& opts = {});
PairSolution solve_singular(const InclusionPair& pair, const SolverOptions& opts = {});

struct DumbbellSolution {
  DumbbellCurve dumbbell;
  BoundaryDensity density;
  double lambda_rho = 0.0;
  HarmonicBackground background;
  SolveDiagnostics diag;
};

/// u = h + S[phi] on the exterior of the dumbbell, one floating constant, zero total charge.
DumbbellSolution solve_dumbbell(const DumbbellCurve& db, const HarmonicBackground& h, const SolverOptions& opts = {});

struct AlphaEstimate {
  double potential = 0.0;  // (lambda2^u - lambda1^u) / (lambda2^q - lambda1^q)
  double flux = 0.0;       // flux of u through the left boundary plus alpha
  double discrepancy() const { return std::abs(potential - flux); }
};

AlphaEstimate concentration_factor(const PairSolution& u, const PairSolution& q, unsigned threads = 1);

/// Flux of u_(rho) over the part of the left inclusion boundary outside [-2 rho, 2 rho]^2.
double alpha_rho(const DumbbellSolution& sol, const InclusionPair& touching, double rho, unsigned threads = 1);

/// Gradient of r = u - alpha q at exterior points.
std::vector<Point2> eval_residual_field(const PairSolution& u, const PairSolution& q, double alpha,
                                        std::span<const Point2> points, unsigned threads = 1);

/// Aggregated concentration-factor results; fields that were not computed stay NaN.
struct ConcentrationReport {
  double alpha_eps_potential = std::numeric_limits<double>::quiet_NaN();
  double alpha_eps_flux = std::numeric_limits<double>::quiet_NaN();
  std::vector<std::pair<double, double>> alpha_rho_ladder;  // (rho, alpha_(rho))
  double alpha0_estimate = std::numeric_limits<double>::quiet_NaN();
  double alpha0_uncertainty = std::numeric_limits<double>::quiet_NaN();
  double truncation_rate_a = std::numeric_limits<double>::quiet_NaN();  // A in C exp(-A / rho)
  double eps_rate_exponent = std::numeric_limits<double>::quiet_NaN();  // p in C (eps |log eps|)^p
};

}  // namespace gapstress
