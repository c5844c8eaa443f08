#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstddef>
#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

#include "gapstress/geometry.hpp"

namespace gapstress {

/// Evaluation point inside an inclusion or on its boundary.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// h(x, y) = c0 + sum_{n=1..4} (a_n Re z^n + b_n Im z^n), z = x + iy.
struct HarmonicBackground {
  double c0 = 0.0;
  std::array<double, 4> a{};
  std::array<double, 4> b{};

  static HarmonicBackground uniform(double gx, double gy);
  static HarmonicBackground zero() { return {}; }

  double value(Point2 p) const;
  Point2 gradient(Point2 p) const;
  int degree() const;
  bool is_zero() const;
  HarmonicBackground shifted(double c) const;
  HarmonicBackground operator+(const HarmonicBackground& o) const;
};

class LayerPotential;
using LayerPotentialPtr = std::shared_ptr<const LayerPotential>;

/// Density values phi_j at the nodes of each curve, concatenated in curve order.
class BoundaryDensity {
 public:
  explicit BoundaryDensity(LayerPotentialPtr potential);
  BoundaryDensity(LayerPotentialPtr potential, Eigen::VectorXd values);

  const LayerPotential& potential() const { return *potential_; }
  const LayerPotentialPtr& potential_ptr() const { return potential_; }
  std::size_t curve_count() const;
  const ParametricCurve& curve(std::size_t j) const;
  std::size_t offset(std::size_t j) const;
  const Eigen::VectorXd& values() const { return values_; }
  std::span<const double> on(std::size_t j) const;
  /// Total charge (integral of phi) on curve j.
  double charge(std::size_t j) const;

 private:
  LayerPotentialPtr potential_;
  Eigen::VectorXd values_;
};

/// Per-curve quadrature data. `singular_correction` is the self-interaction block of the
/// single-layer operator minus the naive rule (kernel at node pairs, zero on the diagonal).
struct QuadratureRule {
  std::vector<double> params;
  std::vector<double> weights;
  Eigen::MatrixXd singular_correction;
};

QuadratureRule quadrature_rule(const CurvePtr& curve);

/// Single-layer machinery for S[phi](x) = (1/2pi) int ln|x - y| phi(y) ds(y) on a set of
/// disjoint closed curves. Immutable after construction and safe to share across threads.
class LayerPotential {
 public:
  explicit LayerPotential(std::vector<CurvePtr> curves);

  const std::vector<CurvePtr>& curves() const { return curves_; }
  std::size_t size() const { return total_; }
  std::size_t offset(std::size_t j) const { return offsets_[j]; }

  /// Rows r, gx, gy with S[phi](x) = r.phi and grad S[phi](x) = (gx.phi, gy.phi) for x off the curves.
  /// Either gradient span may be empty to skip it.
  void field_rows(Point2 x, std::span<double> value, std::span<double> gx, std::span<double> gy) const;
  /// Row for S at the boundary point of curve c with parameter t (segment = panel index, unused in periodic mode).
  void boundary_value_row(std::size_t c, std::size_t segment, double t, std::span<double> row) const;
  /// Row of the adjoint double layer K*[phi](x_i) at node i of curve c.
  void adjoint_row(std::size_t c, std::size_t node, std::span<double> row) const;

  /// S evaluated at every node (the Nystrom matrix).
  Eigen::MatrixXd slp_matrix(unsigned threads = 1) const;
  /// K* evaluated at every node of curve c (rows) against all densities.
  Eigen::MatrixXd adjoint_matrix(std::size_t c, unsigned threads = 1) const;

  /// Index of the curve whose interior contains p, or -1. Throws DomainError for points on a curve.
  int locate(Point2 p) const;

  struct Segment {
    std::size_t curve;
    std::size_t path;
    double t0, t1;
    std::size_t col0;   // first density column touched by this segment's basis
    std::size_t ncols;  // order (panels) or curve size (periodic virtual segments)
    double length;
    Point2 center;
    bool periodic;
    std::size_t fine0;  // periodic: index of the first upsampled point
  };

 private:
  struct FinePoint {
    Point2 y;
    double ds;
  };
  struct Accumulator;

  void add_segment(const Segment& s, Accumulator& acc) const;
  void add_plain(const Segment& s, Accumulator& acc) const;
  void add_adaptive(const Segment& s, double a, double b, int depth, Accumulator& acc) const;
  void add_gl(const Segment& s, double a, double b, Accumulator& acc) const;
  void add_self_log(const Segment& s, double t, Accumulator& acc) const;
  void add_periodic_curve(std::size_t c, Accumulator& acc) const;
  void kress_row(std::size_t c, double t, std::span<double> row) const;
  void basis_at(const Segment& s, double t, std::span<double> out) const;

  std::vector<CurvePtr> curves_;
  std::vector<std::size_t> offsets_;
  std::size_t total_ = 0;
  std::vector<Segment> segments_;
  std::vector<std::size_t> curve_seg_begin_;  // first segment of each curve
  std::vector<FinePoint> fine_;               // periodic upsampled points
  std::vector<Eigen::MatrixXd> fine_basis_;   // per periodic segment: (points x curve size)
  std::vector<std::vector<double>> kress_node_, kress_half_;
};

/// The Nystrom matrix of S for the given curves (diagonal blocks use singular corrections,
/// off-diagonal blocks adaptive near-field quadrature).
Eigen::MatrixXd slp_operator(const std::vector<CurvePtr>& curves, unsigned threads = 1);

struct FieldValue {
  double value = 0.0;
  Point2 gradient;
};

/// u = h + S[phi] and its gradient at exterior points.
std::vector<FieldValue> eval_field(const BoundaryDensity& density, const HarmonicBackground& background,
                                   std::span<const Point2> points, unsigned threads = 1);

struct FluxResult {
  std::vector<double> pointwise;  // normal derivative at the nodes of the curve
  double integral = 0.0;
};

/// Normal derivative of u = h + S[phi] taken from the matrix side, with nu pointing into the
/// inclusion (the outward normal of the exterior region): d_nu u = d_nu h - phi/2 + K'[phi].
/// With this convention the flux of u equals minus the charge of phi on that curve.
FluxResult boundary_flux(const BoundaryDensity& density, const HarmonicBackground& background, std::size_t curve_index,
                         unsigned threads = 1);

}  // namespace gapstress
