#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace gapstress {

/// Thrown for invalid or inconsistent configurations (bad shapes, overlapping inclusions, ...).
class GeometryError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

inline Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
inline Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
inline Point2 operator-(Point2 a) { return {-a.x, -a.y}; }
inline Point2 operator*(double s, Point2 a) { return {s * a.x, s * a.y}; }
inline Point2 operator*(Point2 a, double s) { return {s * a.x, s * a.y}; }
inline Point2 operator/(Point2 a, double s) { return {a.x / s, a.y / s}; }
inline double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Point2 a) { return std::hypot(a.x, a.y); }
inline double distance(Point2 a, Point2 b) { return norm(a - b); }
inline std::complex<double> to_complex(Point2 p) { return {p.x, p.y}; }
inline Point2 to_point(std::complex<double> z) { return {z.real(), z.imag()}; }

struct Disk {
  Point2 center;
  double radius = 1.0;
};

/// Position and first two parameter derivatives of an analytic path.
struct PathSample {
  Point2 z;
  Point2 dz;
  Point2 ddz;
};

using PathFn = std::function<PathSample(double)>;

enum class Side { left, right };

/// Closed, counterclockwise, 2pi-periodic analytic boundary with a marked contact point.
/// The contact point is where the shape touches (or is closest to) the other inclusion.
class Shape {
 public:
  Shape(PathFn path, double contact_param, int contact_order, std::string kind);

  PathSample eval(double t) const { return path_(t); }
  const PathFn& path() const { return path_; }
  double contact_param() const { return contact_param_; }
  Point2 contact_point() const { return path_(contact_param_).z; }
  int contact_order() const { return contact_order_; }
  const std::string& kind() const { return kind_; }

  /// Signed curvature at parameter t (positive on convex parts).
  double curvature(double t) const;
  double contact_curvature() const { return curvature(contact_param_); }

  /// Parameter direction (+1 or -1) in which y increases at the contact point.
  int upward_direction() const;
  /// Largest |y - y_contact| over which the boundary near the contact is a graph x(y),
  /// separately for y above (upper=true) and below the contact.
  double graph_extent(bool upper) const;
  /// Parameter of the boundary point near the contact at height y (|y - y_c| within the graph extent).
  double param_at_height(double y) const;
  /// Defining function x(y) of the boundary near the contact.
  double graph_x(double y) const { return path_(param_at_height(y)).z.x; }

  Shape translated(Point2 shift) const;
  double area() const;
  /// Curve sampled at n equispaced parameters, used for coarse geometric queries.
  std::vector<Point2> sample(std::size_t n) const;

 private:
  PathFn path_;
  double contact_param_;
  int contact_order_;
  std::string kind_;
};

Shape disk_shape(Point2 center, double radius, Side contact_side);
/// Ellipse with semi-axis a along x and b along y, placed so its contact vertex is at the origin.
Shape ellipse_shape(Side side, double a, double b);
/// Closed analytic curve with boundary x = -/+ coeff y^{2m} near the origin (left/right).
Shape model_contact_shape(Side side, int m, double coeff, double extent);

/// Sampled closed boundary. Periodic mode: equispaced trapezoid nodes of one 2pi-periodic path.
/// Panel mode: Gauss-Legendre nodes on a chain of panels over one or more analytic paths.
class ParametricCurve {
 public:
  enum class Mode { periodic, panels };

  struct Panel {
    std::size_t path = 0;
    double t0 = 0.0;
    double t1 = 0.0;
    std::size_t first = 0;  // index of first node
    int tag = 0;
    double length = 0.0;
  };

  struct PanelSpec {
    std::size_t path;
    double t0;
    double t1;
    int tag;
  };

  static ParametricCurve periodic(PathFn path, std::size_t n_nodes);
  static ParametricCurve from_panels(std::vector<PathFn> paths, const std::vector<PanelSpec>& panels,
                                     std::size_t order);

  Mode mode() const { return mode_; }
  std::size_t size() const { return nodes_.size(); }
  std::size_t order() const { return order_; }

  std::span<const Point2> nodes() const { return nodes_; }
  std::span<const Point2> tangents() const { return tangent_; }
  std::span<const Point2> normals() const { return normal_; }
  std::span<const double> curvature() const { return curvature_; }
  /// |dz/dt| with respect to the underlying parameter of each node.
  std::span<const double> speed() const { return speed_; }
  /// Arclength quadrature weights.
  std::span<const double> weights() const { return weights_; }
  std::span<const double> params() const { return params_; }
  std::span<const Panel> panels() const { return panels_; }
  int tag(std::size_t node) const { return tags_[node]; }

  const PathFn& path(std::size_t i) const { return paths_[i]; }
  std::size_t panel_of(std::size_t node) const { return node / order_; }

  double length() const;
  double enclosed_area() const;
  /// Winding number of the curve about p (nodes joined by straight chords).
  int winding_number(Point2 p) const;
  /// Periodic mode only: trigonometric interpolant of the node coordinates at parameter t.
  Point2 interpolate(double t) const;

 private:
  void fill_node(std::size_t i, const PathSample& s, double t, double weight, int tag);

  Mode mode_ = Mode::periodic;
  std::size_t order_ = 0;
  std::vector<PathFn> paths_;
  std::vector<Panel> panels_;
  std::vector<Point2> nodes_, tangent_, normal_;
  std::vector<double> curvature_, speed_, weights_, params_;
  std::vector<int> tags_;
};

using CurvePtr = std::shared_ptr<const ParametricCurve>;

/// Equispaced disk boundary, z(t) = center + radius (cos t, sin t).
ParametricCurve make_disk(Point2 center, double radius, std::size_t n_nodes);
/// Equispaced sampling of model_contact_shape.
ParametricCurve make_model_contact_curve(Side side, int m, double coeff, double extent, std::size_t n_nodes);

/// Reparameterizes a periodic path so equispaced nodes concentrate near `center_param`
/// with density ~ 1/sqrt(width^2 + sin^2((t - center)/2)). The new parameter 0 maps to `center_param`.
PathFn cluster_path(PathFn base, double center_param, double width);

/// How inclusion boundaries are discretized for the pair problems.
struct Discretization {
  enum class Kind { spectral, panels };
  Kind kind = Kind::panels;
  std::size_t nodes = 512;        // spectral: nodes per curve
  double cluster = 0.5;           // spectral: clustering width = cluster * sqrt(eps) / |z'(contact)|
  std::size_t panel_order = 16;   // Gauss-Legendre nodes per panel
  double gap_resolution = 0.5;    // panel length <= gap_resolution * sqrt(gap * gap_scale) near contact
  double gap_scale = 1.0;
  double max_panel_length = 0.35;
  double neck_resolution = 1.0;   // dumbbell: panel length <= neck_resolution * local neck width
  int corner_levels = 5;          // dumbbell: dyadic refinements toward each corner
};

/// Two inclusions: D1 touching the origin from x < 0 and D2 = D2^0 + (eps, 0).
class InclusionPair {
 public:
  InclusionPair(Shape left, Shape right_base, double eps);

  const Shape& left() const { return left_; }
  const Shape& right_base() const { return right_base_; }
  Shape right() const { return right_base_.translated({eps_, 0.0}); }
  double eps() const { return eps_; }
  double kappa1() const { return kappa1_; }
  double kappa2() const { return kappa2_; }
  int contact_order_m() const { return m_; }

  InclusionPair with_eps(double eps) const { return {left_, right_base_, eps}; }

  /// x2(y) + eps - x1(y).
  double gap(double y) const;
  /// Smallest graph-neighborhood half-width of the two boundaries at the contact.
  double graph_extent() const;
  double rho_max() const { return 0.5 * graph_extent(); }

 private:
  Shape left_;
  Shape right_base_;
  double eps_;
  double kappa1_;
  double kappa2_;
  int m_;
};

struct ContactData {
  double kappa1;
  double kappa2;
  int m;
  std::function<double(double)> gap;
};

ContactData contact_data(const InclusionPair& pair);
std::array<Disk, 2> osculating_disks(const InclusionPair& pair);

struct PairCurves {
  CurvePtr left;
  CurvePtr right;
};

PairCurves discretize(const InclusionPair& pair, const Discretization& disc = {});

enum class DumbbellMode { exact_corner, fillet };

/// Node tags on a dumbbell boundary.
enum DumbbellPiece : int { left_arc = 0, right_arc = 1, top_segment = 2, bottom_segment = 3, fillet_arc = 4 };

struct DumbbellCurve {
  CurvePtr curve;
  double rho = 0.0;
  std::array<Point2, 4> corner_points{};  // upper-left, upper-right, lower-right, lower-left
  double fillet_radius = 0.0;
  DumbbellMode mode = DumbbellMode::exact_corner;
};

/// Boundary of (D1 u D2 u [-rho, rho]^2) for a touching pair.
DumbbellCurve build_dumbbell(const InclusionPair& touching, double rho, DumbbellMode mode = DumbbellMode::exact_corner,
                             const Discretization& disc = {});

}  // namespace gapstress
