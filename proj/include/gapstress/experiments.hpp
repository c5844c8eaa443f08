#pragma once

#include <cstddef>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gapstress/bie_solver.hpp"
#include "gapstress/geometry.hpp"
#include "gapstress/potentials.hpp"

namespace gapstress {

inline constexpr double nan_value = std::numeric_limits<double>::quiet_NaN();

/// One inclusion as written in a config file.
struct ShapeSpec {
  std::string kind = "disk";  // disk | model | ellipse
  Point2 center{-1.0, 0.0};   // disk
  double radius = 1.0;        // disk
  int m = 1;                  // model
  double coeff = 0.5;         // model
  double extent = 1.0;        // model
  double a = 1.0, b = 1.0;    // ellipse semi-axes along x and y
};

Shape make_shape(const ShapeSpec& spec, Side side);

struct SweepConfig {
  std::string mode;  // free-form tag copied into reports
  ShapeSpec left;
  ShapeSpec right{"disk", {1.0, 0.0}};
  HarmonicBackground background = HarmonicBackground::uniform(1.0, 0.0);
  std::vector<double> eps_list;
  std::vector<double> rho_list;
  std::optional<double> eps;  // single gap for solve / decay
  Discretization disc;
  std::string output;
  unsigned threads = 1;
  bool include_largest = false;  // keep the largest parameter in rate fits
  double decay_y_max = 0.5;
  std::size_t decay_points = 41;

  /// Throws std::invalid_argument on inconsistent settings.
  void validate() const;
  InclusionPair pair(double gap) const;
};

SweepConfig parse_config(const std::string& json_text);
SweepConfig load_config(const std::string& path);

// ---------------------------------------------------------------------------------------------

enum class RateModel { power, exponential_reciprocal };

/// value ~ c x^p (power) or c exp(-A / x) (exponential_reciprocal), fitted by least squares on log(value).
struct RateFit {
  RateModel model = RateModel::power;
  double c = nan_value;
  double p = nan_value;  // exponent (power) or A (exponential_reciprocal)
  double residual = nan_value;  // 2-norm of the log residuals
  std::size_t points = 0;
};

RateFit rate_fit(const std::vector<std::pair<double, double>>& points, RateModel model);
/// Drops the point with the largest abscissa.
std::vector<std::pair<double, double>> without_largest(std::vector<std::pair<double, double>> points);
const char* to_string(RateModel m);

// ---------------------------------------------------------------------------------------------

struct EpsRow {
  double eps = nan_value;
  std::size_t n = 0;
  double alpha_pot = nan_value, alpha_flux = nan_value;
  double lambda1 = nan_value, lambda2 = nan_value;
  Point2 grad_mid{nan_value, nan_value};
  double sqrt_eps_grad_mid = nan_value;
  double qnorm_sampled = nan_value;
  double colloc_residual = nan_value, charge_residual = nan_value;
  double condition = nan_value;
  std::string error;  // non-empty when the solve failed
  std::vector<std::string> warnings;
  bool ok() const { return error.empty(); }
};

struct EpsSweep {
  std::vector<EpsRow> rows;
  std::vector<std::string> flags;  // non-monotone ladders and failed rows, for human review
};

/// Solves u and q at one gap and collects every per-row quantity.
EpsRow solve_point(const SweepConfig& cfg, double eps);
EpsSweep sweep_epsilon(const SweepConfig& cfg);

struct RhoRow {
  double rho = nan_value;
  std::size_t n = 0;
  double alpha_rho = nan_value;
  double lambda_rho = nan_value;
  double ladder_diff = nan_value;  // |alpha(rho) - alpha(next rung)|
  double colloc_residual = nan_value, charge_residual = nan_value;
  std::string error;
  bool ok() const { return error.empty(); }
};

struct RhoSweep {
  std::vector<RhoRow> rows;
  double alpha0_estimate = nan_value;
  double alpha0_uncertainty = nan_value;
  RateFit exp_fit{RateModel::exponential_reciprocal};
  RateFit power_fit{RateModel::power};
  std::vector<std::string> flags;
};

RhoSweep sweep_rho(const SweepConfig& cfg);

struct DecayRow {
  double y = nan_value;
  double x_mid = nan_value;
  double grad_norm = nan_value;
  double inv_scale = nan_value;  // 1 / (sqrt(eps) + |y|), or 1 / |y| for the touching proxy
};

struct DecayProfile {
  double eps = nan_value;
  double alpha = nan_value;
  std::vector<DecayRow> rows;
  RateFit fit{RateModel::exponential_reciprocal};
  double data_range = nan_value;  // max - min of log |grad r|
  bool touching = false;
};

/// Midline profile of |grad r_eps| (eps > 0) or of |grad u_(rho)| with rho = rho_list[0] (eps = 0).
DecayProfile decay_profile(const SweepConfig& cfg);

/// Samples |grad q| on the gap segment between the contact points and on the midline above it.
double sampled_qnorm(const PairSolution& q, unsigned threads = 1);

// ---------------------------------------------------------------------------------------------

struct CheckResult {
  std::string suite;
  std::string name;
  double measured = nan_value;
  double tolerance = nan_value;
  bool passed = false;
  std::string detail;
};

struct VerifyReport {
  std::vector<CheckResult> checks;
  bool passed() const;
};

/// Runs the invariant checks of a suite: disk, mobius, oracle, or all.
VerifyReport verify(const std::string& suite, unsigned threads = 1);

// ---------------------------------------------------------------------------------------------

inline constexpr const char* eps_csv_header =
    "eps,N,alpha_pot,alpha_flux,lambda1,lambda2,grad_mid_x,grad_mid_y,sqrt_eps_grad_mid,qnorm_sampled,colloc_residual,"
    "charge_residual";
inline constexpr const char* rho_csv_header = "rho,N,alpha_rho,lambda_rho,ladder_diff,colloc_residual,charge_residual";
inline constexpr const char* decay_csv_header = "y,x_mid,grad_norm,inv_scale";

/// `%.12e` for finite values, `nan` otherwise.
std::string format_number(double v);

void write_csv(std::ostream& os, const EpsSweep& s);
void write_csv(std::ostream& os, const RhoSweep& s);
void write_csv(std::ostream& os, const DecayProfile& p);
void write_json(std::ostream& os, const EpsSweep& s, const SweepConfig& cfg);
void write_json(std::ostream& os, const RhoSweep& s, const SweepConfig& cfg);
void write_json(std::ostream& os, const DecayProfile& p, const SweepConfig& cfg);
void write_json(std::ostream& os, const VerifyReport& r);

}  // namespace gapstress
