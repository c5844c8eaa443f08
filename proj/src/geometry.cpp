#include "gapstress/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "gapstress/quadrature.hpp"

namespace gapstress {

namespace {

constexpr double pi = std::numbers::pi;

struct GraphLimit {
  double param;
  double extent;
};

// Walks away from the contact (dir = +1/-1 in parameter) until the boundary stops being
// monotone in y, i.e. until it ceases to be a graph x(y).
GraphLimit find_graph_limit(const PathFn& path, double tc, int dir, int up) {
  const double y0 = path(tc).z.y;
  auto monotone = [&](double s) { return path(tc + dir * s).dz.y * up > 0.0; };
  const double step = pi / 512.0;
  double lo = 0.0;
  double hi = -1.0;
  for (double s = step; s <= pi + 1e-12; s += step) {
    if (!monotone(s)) {
      hi = s;
      break;
    }
    lo = s;
  }
  if (hi < 0.0) return {tc + dir * lo, std::abs(path(tc + dir * lo).z.y - y0)};
  for (int it = 0; it < 80; ++it) {
    const double mid = 0.5 * (lo + hi);
    (monotone(mid) ? lo : hi) = mid;
  }
  return {tc + dir * lo, std::abs(path(tc + dir * lo).z.y - y0)};
}

}  // namespace

// ---------------------------------------------------------------------------------------------
// Shape

Shape::Shape(PathFn path, double contact_param, int contact_order, std::string kind)
    : path_(std::move(path)), contact_param_(contact_param), contact_order_(contact_order), kind_(std::move(kind)) {
  if (contact_order_ < 1) throw GeometryError("contact order must be a positive integer");
}

double Shape::curvature(double t) const {
  const PathSample s = path_(t);
  const double sp = norm(s.dz);
  return cross(s.dz, s.ddz) / (sp * sp * sp);
}

int Shape::upward_direction() const { return path_(contact_param_).dz.y > 0.0 ? 1 : -1; }

double Shape::graph_extent(bool upper) const {
  const int up = upward_direction();
  return find_graph_limit(path_, contact_param_, upper ? up : -up, up).extent;
}

double Shape::param_at_height(double y) const {
  const double yc = contact_point().y;
  const double dy = y - yc;
  if (dy == 0.0) return contact_param_;
  const int up = upward_direction();
  const int dir = dy > 0.0 ? up : -up;
  const GraphLimit lim = find_graph_limit(path_, contact_param_, dir, up);
  if (std::abs(dy) > lim.extent * (1.0 + 1e-12))
    throw GeometryError("height " + std::to_string(y) + " outside the graph neighborhood of the contact");
  double lo = 0.0;
  double hi = std::abs(lim.param - contact_param_);
  const double target = std::abs(dy);
  for (int it = 0; it < 100 && hi - lo > 1e-16; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double h = std::abs(path_(contact_param_ + dir * mid).z.y - yc);
    (h < target ? lo : hi) = mid;
  }
  return contact_param_ + dir * 0.5 * (lo + hi);
}

Shape Shape::translated(Point2 shift) const {
  PathFn base = path_;
  PathFn moved = [base, shift](double t) {
    PathSample s = base(t);
    s.z = s.z + shift;
    return s;
  };
  return Shape(std::move(moved), contact_param_, contact_order_, kind_);
}

double Shape::area() const {
  const std::size_t n = 4096;
  double a = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const PathSample s = path_(2.0 * pi * k / n);
    a += cross(s.z, s.dz);
  }
  return 0.5 * a * 2.0 * pi / n;
}

std::vector<Point2> Shape::sample(std::size_t n) const {
  std::vector<Point2> pts(n);
  for (std::size_t k = 0; k < n; ++k) pts[k] = path_(2.0 * pi * k / n).z;
  return pts;
}

Shape disk_shape(Point2 center, double radius, Side contact_side) {
  if (!(radius > 0.0)) throw GeometryError("disk radius must be positive");
  PathFn path = [center, radius](double t) {
    const double c = std::cos(t), s = std::sin(t);
    return PathSample{{center.x + radius * c, center.y + radius * s}, {-radius * s, radius * c}, {-radius * c, -radius * s}};
  };
  return Shape(std::move(path), contact_side == Side::left ? 0.0 : pi, 1, "disk");
}

Shape ellipse_shape(Side side, double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) throw GeometryError("ellipse semi-axes must be positive");
  const double cx = side == Side::left ? -a : a;
  PathFn path = [cx, a, b](double t) {
    const double c = std::cos(t), s = std::sin(t);
    return PathSample{{cx + a * c, b * s}, {-a * s, b * c}, {-a * c, -b * s}};
  };
  return Shape(std::move(path), side == Side::left ? 0.0 : pi, 1, "ellipse");
}

Shape model_contact_shape(Side side, int m, double coeff, double extent) {
  if (m < 1) throw GeometryError("model contact order m must be >= 1");
  if (!(coeff > 0.0)) throw GeometryError("model coefficient must be positive");
  if (!(extent > 0.0)) throw GeometryError("model extent must be positive");
  // x = -/+ K u^m with u = 1 -/+ cos t and y = A sin t; near the contact x ~ -/+ coeff y^{2m}.
  const double amp = coeff * std::pow(2.0 * extent * extent, m);
  const double sgn = side == Side::left ? -1.0 : 1.0;
  PathFn path = [amp, sgn, m, extent](double t) {
    const double c = std::cos(t), s = std::sin(t);
    // left: u = 1 - cos t, right: u = 1 + cos t
    const double u = sgn < 0 ? 1.0 - c : 1.0 + c;
    const double du = sgn < 0 ? s : -s;
    const double ddu = sgn < 0 ? c : -c;
    const double um1 = std::pow(u, m - 1);
    const double um2 = m >= 2 ? std::pow(u, m - 2) : 0.0;
    const double x = sgn * amp * std::pow(u, m);
    const double dx = sgn * amp * m * um1 * du;
    const double ddx = sgn * amp * m * ((m - 1) * um2 * du * du + um1 * ddu);
    return PathSample{{x, extent * s}, {dx, extent * c}, {ddx, -extent * s}};
  };
  return Shape(std::move(path), side == Side::left ? 0.0 : pi, m, "model");
}

// ---------------------------------------------------------------------------------------------
// ParametricCurve

void ParametricCurve::fill_node(std::size_t i, const PathSample& s, double t, double weight, int tag) {
  const double sp = norm(s.dz);
  if (!(sp > 0.0)) throw GeometryError("curve parameterization has zero speed");
  const Point2 tan = s.dz / sp;
  nodes_[i] = s.z;
  tangent_[i] = tan;
  normal_[i] = {tan.y, -tan.x};
  curvature_[i] = cross(s.dz, s.ddz) / (sp * sp * sp);
  speed_[i] = sp;
  weights_[i] = weight * sp;
  params_[i] = t;
  tags_[i] = tag;
}

ParametricCurve ParametricCurve::periodic(PathFn path, std::size_t n_nodes) {
  if (n_nodes < 16 || n_nodes % 2 != 0) throw GeometryError("periodic curves need an even node count >= 16");
  ParametricCurve c;
  c.mode_ = Mode::periodic;
  c.order_ = 0;
  c.paths_.push_back(std::move(path));
  c.nodes_.resize(n_nodes);
  c.tangent_.resize(n_nodes);
  c.normal_.resize(n_nodes);
  c.curvature_.resize(n_nodes);
  c.speed_.resize(n_nodes);
  c.weights_.resize(n_nodes);
  c.params_.resize(n_nodes);
  c.tags_.resize(n_nodes);
  const double h = 2.0 * pi / n_nodes;
  for (std::size_t k = 0; k < n_nodes; ++k) {
    const double t = h * k;
    c.fill_node(k, c.paths_[0](t), t, h, 0);
  }
  return c;
}

ParametricCurve ParametricCurve::from_panels(std::vector<PathFn> paths, const std::vector<PanelSpec>& panels,
                                             std::size_t order) {
  if (panels.empty()) throw GeometryError("panel curve needs at least one panel");
  const GaussRule& rule = gauss_legendre(order);
  ParametricCurve c;
  c.mode_ = Mode::panels;
  c.order_ = order;
  c.paths_ = std::move(paths);
  const std::size_t n = panels.size() * order;
  c.nodes_.resize(n);
  c.tangent_.resize(n);
  c.normal_.resize(n);
  c.curvature_.resize(n);
  c.speed_.resize(n);
  c.weights_.resize(n);
  c.params_.resize(n);
  c.tags_.resize(n);
  for (std::size_t p = 0; p < panels.size(); ++p) {
    const PanelSpec& spec = panels[p];
    if (spec.path >= c.paths_.size()) throw GeometryError("panel refers to unknown path");
    if (!(spec.t1 > spec.t0)) throw GeometryError("panel parameter interval must be increasing");
    Panel panel{spec.path, spec.t0, spec.t1, p * order, spec.tag, 0.0};
    const double half = 0.5 * (spec.t1 - spec.t0);
    for (std::size_t q = 0; q < order; ++q) {
      const double t = spec.t0 + half * (rule.nodes[q] + 1.0);
      c.fill_node(p * order + q, c.paths_[spec.path](t), t, half * rule.weights[q], spec.tag);
      panel.length += c.weights_[p * order + q];
    }
    c.panels_.push_back(panel);
  }
  return c;
}

double ParametricCurve::length() const {
  double l = 0.0;
  for (double w : weights_) l += w;
  return l;
}

double ParametricCurve::enclosed_area() const {
  double a = 0.0;
  for (std::size_t i = 0; i < size(); ++i) a += weights_[i] * dot(nodes_[i], normal_[i]);
  return 0.5 * a;
}

int ParametricCurve::winding_number(Point2 p) const {
  double total = 0.0;
  const std::size_t n = size();
  for (std::size_t i = 0; i < n; ++i) {
    const Point2 a = nodes_[i] - p;
    const Point2 b = nodes_[(i + 1) % n] - p;
    total += std::atan2(cross(a, b), dot(a, b));
  }
  return static_cast<int>(std::lround(total / (2.0 * pi)));
}

Point2 ParametricCurve::interpolate(double t) const {
  if (mode_ != Mode::periodic) throw GeometryError("interpolate() is defined for periodic curves only");
  std::vector<double> w(size());
  trig_cardinal(size(), t, w);
  Point2 z;
  for (std::size_t j = 0; j < size(); ++j) z = z + w[j] * nodes_[j];
  return z;
}

ParametricCurve make_disk(Point2 center, double radius, std::size_t n_nodes) {
  if (!(radius > 0.0)) throw GeometryError("disk radius must be positive");
  return ParametricCurve::periodic(disk_shape(center, radius, Side::left).path(), n_nodes);
}

ParametricCurve make_model_contact_curve(Side side, int m, double coeff, double extent, std::size_t n_nodes) {
  return ParametricCurve::periodic(model_contact_shape(side, m, coeff, extent).path(), n_nodes);
}

// ---------------------------------------------------------------------------------------------
// Clustered reparameterization. With m = 1/(1+w^2) the map
//   s(theta) = pi (K - F(pi/2 - theta/2 | m)) / K,   theta = t - center in [0, 2 pi]
// has ds/dtheta proportional to 1/sqrt(w^2 + sin^2(theta/2)).

PathFn cluster_path(PathFn base, double center_param, double width) {
  if (!(width > 0.0)) throw GeometryError("cluster width must be positive");
  const double k = 1.0 / std::sqrt(1.0 + width * width);
  const double kk = std::comp_ellint_1(k);
  const double scale = pi * std::sqrt(1.0 + width * width) / (2.0 * kk);
  auto s_of = [k, kk](double theta) { return pi * (kk - std::ellint_1(k, 0.5 * pi - 0.5 * theta)) / kk; };
  auto ds_of = [scale, width](double theta) {
    const double sh = std::sin(0.5 * theta);
    return scale / std::sqrt(width * width + sh * sh);
  };
  auto dds_of = [scale, width](double theta) {
    const double sh = std::sin(0.5 * theta);
    const double q = width * width + sh * sh;
    return -scale * std::sin(theta) / (4.0 * q * std::sqrt(q));
  };
  return [=](double s) {
    const double wraps = std::floor(s / (2.0 * pi));
    const double sr = s - 2.0 * pi * wraps;
    double lo = 0.0, hi = 2.0 * pi;
    double theta = sr;
    for (int it = 0; it < 200; ++it) {
      const double f = s_of(theta) - sr;
      if (std::abs(f) < 1e-15) break;
      (f < 0.0 ? lo : hi) = theta;
      double next = theta - f / ds_of(theta);
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      if (std::abs(next - theta) < 1e-16) {
        theta = next;
        break;
      }
      theta = next;
    }
    const double d1 = 1.0 / ds_of(theta);
    const double d2 = -dds_of(theta) * d1 * d1 * d1;
    const PathSample b = base(center_param + theta + 2.0 * pi * wraps);
    return PathSample{b.z, b.dz * d1, b.ddz * (d1 * d1) + b.dz * d2};
  };
}

// ---------------------------------------------------------------------------------------------
// InclusionPair

InclusionPair::InclusionPair(Shape left, Shape right_base, double eps)
    : left_(std::move(left)), right_base_(std::move(right_base)), eps_(eps) {
  if (!(eps_ >= 0.0) || !std::isfinite(eps_)) throw GeometryError("gap eps must be finite and >= 0");
  const double tol = 1e-10;
  if (norm(left_.contact_point()) > tol) throw GeometryError("left inclusion must touch the origin");
  if (norm(right_base_.contact_point()) > tol) throw GeometryError("right inclusion must touch the origin");
  for (const Point2& p : left_.sample(2048))
    if (p.x > tol) throw GeometryError("left inclusion must lie in {x < 0}");
  for (const Point2& p : right_base_.sample(2048))
    if (p.x < -tol) throw GeometryError("right inclusion must lie in {x > 0}");
  kappa1_ = left_.contact_curvature();
  kappa2_ = right_base_.contact_curvature();
  if (kappa1_ < -1e-12 || kappa2_ < -1e-12) throw GeometryError("inclusions must be convex at the contact");
  m_ = std::min(left_.contact_order(), right_base_.contact_order());
}

double InclusionPair::gap(double y) const { return right_base_.graph_x(y) + eps_ - left_.graph_x(y); }

double InclusionPair::graph_extent() const {
  return std::min({left_.graph_extent(true), left_.graph_extent(false), right_base_.graph_extent(true),
                   right_base_.graph_extent(false)});
}

ContactData contact_data(const InclusionPair& pair) {
  // Sample the near-contact gap; a negative value means the inclusions overlap.
  const double ext = pair.graph_extent();
  for (int k = -32; k <= 32; ++k) {
    const double y = 0.9 * ext * k / 32.0;
    if (pair.gap(y) < -1e-12) throw GeometryError("inclusions overlap (negative gap)");
  }
  InclusionPair copy = pair;
  return {pair.kappa1(), pair.kappa2(), pair.contact_order_m(), [copy](double y) { return copy.gap(y); }};
}

std::array<Disk, 2> osculating_disks(const InclusionPair& pair) {
  if (pair.contact_order_m() != 1 || pair.kappa1() <= 1e-12 || pair.kappa2() <= 1e-12)
    throw GeometryError("osculating disks need strictly convex contact (m = 1)");
  const double r1 = 1.0 / pair.kappa1();
  const double r2 = 1.0 / pair.kappa2();
  return {Disk{{-r1, 0.0}, r1}, Disk{{pair.eps() + r2, 0.0}, r2}};
}

// ---------------------------------------------------------------------------------------------
// Discretization of the pair

namespace {

/// Heights y_0 = start, y_{k+1} = y_k + step(y_k) (moving away from 0 in the sign of `start` or `sign`).
std::vector<double> graded_heights(double start, int sign, double stop, const std::function<double(double)>& step,
                                   double max_step, std::vector<double> must_hit = {}) {
  std::vector<double> ys{start};
  double y = start;
  while (true) {
    double dy = std::min(step(y), max_step);
    if (!(dy > 0.0)) throw GeometryError("panel grading produced a nonpositive step");
    double next = y + sign * dy;
    for (double hit : must_hit)
      if ((hit - y) * sign > 1e-14 && (next - hit) * sign > -1e-14) next = hit;
    if ((next - stop) * sign >= 0.0 || dy >= max_step) {
      // far from the contact the arc is split uniformly later; only the forced breaks remain
      for (double hit : must_hit)
        if ((hit - y) * sign > 1e-14 && (stop - hit) * sign > 1e-14) {
          ys.push_back(hit);
          y = hit;
        }
      if ((stop - y) * sign > 0.25 * dy) ys.push_back(stop);
      break;
    }
    ys.push_back(next);
    y = next;
  }
  return ys;
}

/// Uniform split of the parameter interval [a, b] into panels of arclength <= max_len.
void uniform_panels(const PathFn& path, std::size_t path_index, double a, double b, double max_len, int tag,
                    std::vector<ParametricCurve::PanelSpec>& out) {
  const GaussRule& rule = gauss_legendre(32);
  double len = 0.0;
  const double half = 0.5 * (b - a);
  for (std::size_t q = 0; q < rule.size(); ++q) len += half * rule.weights[q] * norm(path(a + half * (rule.nodes[q] + 1.0)).dz);
  const std::size_t n = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(len / max_len)));
  for (std::size_t k = 0; k < n; ++k) out.push_back({path_index, a + (b - a) * k / n, a + (b - a) * (k + 1) / n, tag});
}

void append_params(const std::vector<double>& params, std::size_t path_index, int tag,
                   std::vector<ParametricCurve::PanelSpec>& out) {
  for (std::size_t k = 0; k + 1 < params.size(); ++k) out.push_back({path_index, params[k], params[k + 1], tag});
}

/// Dyadic refinement of the parameter list toward its first entry.
std::vector<double> grade_front(std::vector<double> params, int levels) {
  if (params.size() < 2 || levels <= 0) return params;
  const double a = params[0], b = params[1];
  std::vector<double> out{a};
  for (int j = levels; j >= 1; --j) out.push_back(a + (b - a) / std::pow(2.0, j));
  out.insert(out.end(), params.begin() + 1, params.end());
  return out;
}

std::vector<double> grade_back(std::vector<double> params, int levels) {
  std::reverse(params.begin(), params.end());
  params = grade_front(std::move(params), levels);
  std::reverse(params.begin(), params.end());
  return params;
}

CurvePtr discretize_shape(const Shape& shape, const std::function<double(double)>& gap, double eps,
                          const Discretization& disc) {
  if (disc.kind == Discretization::Kind::spectral) {
    const double speed = norm(shape.eval(shape.contact_param()).dz);
    const double width = std::min(10.0, std::max(1e-6, disc.cluster * std::sqrt(eps) / speed));
    return std::make_shared<const ParametricCurve>(
        ParametricCurve::periodic(cluster_path(shape.path(), shape.contact_param(), width), disc.nodes));
  }
  const double c = disc.gap_resolution;
  auto step = [&](double y) { return c * std::sqrt(std::max(gap(y), 0.0) * disc.gap_scale); };
  const double up_ext = shape.graph_extent(true), dn_ext = shape.graph_extent(false);
  const double half0 = 0.5 * std::min(step(0.0), disc.max_panel_length);
  const std::vector<double> up = graded_heights(half0, 1, 0.7 * up_ext, step, disc.max_panel_length);
  const std::vector<double> dn = graded_heights(-half0, -1, -0.7 * dn_ext, step, disc.max_panel_length);
  // parameters increasing in the path direction
  std::vector<double> params;
  const bool up_forward = shape.upward_direction() > 0;
  const std::vector<double>& first = up_forward ? dn : up;
  const std::vector<double>& second = up_forward ? up : dn;
  for (auto it = first.rbegin(); it != first.rend(); ++it) params.push_back(shape.param_at_height(*it));
  for (double y : second) params.push_back(shape.param_at_height(y));
  std::vector<ParametricCurve::PanelSpec> specs;
  append_params(params, 0, 0, specs);
  uniform_panels(shape.path(), 0, params.back(), params.front() + 2.0 * pi, disc.max_panel_length, 0, specs);
  return std::make_shared<const ParametricCurve>(ParametricCurve::from_panels({shape.path()}, specs, disc.panel_order));
}

}  // namespace

PairCurves discretize(const InclusionPair& pair, const Discretization& disc) {
  if (pair.eps() <= 0.0 && disc.kind == Discretization::Kind::spectral)
    throw GeometryError("spectral discretization needs a positive gap");
  auto gap = [&pair](double y) { return pair.gap(y); };
  return {discretize_shape(pair.left(), gap, pair.eps(), disc), discretize_shape(pair.right(), gap, pair.eps(), disc)};
}

// ---------------------------------------------------------------------------------------------
// Dumbbell

namespace {

PathFn segment_path(Point2 a, Point2 b) {
  return [a, b](double t) { return PathSample{a + t * (b - a), b - a, {0.0, 0.0}}; };
}

PathFn circle_arc_path(Point2 center, double radius, double phi0, double dir) {
  return [=](double t) {
    const double phi = phi0 + dir * t;
    const double c = std::cos(phi), s = std::sin(phi);
    return PathSample{{center.x + radius * c, center.y + radius * s},
                      {-dir * radius * s, dir * radius * c},
                      {-radius * c, -radius * s}};
  };
}

struct Fillet {
  double arc_param;   // tangent point on the inclusion boundary
  Point2 arc_point;
  Point2 center;
  Point2 seg_point;   // tangent point on the segment
};

// Circle of radius r in the exterior, tangent to `shape` and to the line y = level (level = +-rho).
Fillet find_fillet(const Shape& shape, double level, double r) {
  const int vs = level > 0 ? 1 : -1;
  const double target = level + vs * r;
  auto offset_y = [&](double t) {
    const PathSample s = shape.eval(t);
    const double sp = norm(s.dz);
    return s.z.y + r * (s.dz.x == 0.0 && s.dz.y == 0.0 ? 0.0 : -s.dz.x / sp);
  };
  double lo = shape.param_at_height(level);
  double hi = shape.param_at_height(vs * 0.999 * shape.graph_extent(vs > 0));
  if ((offset_y(lo) - target) * (offset_y(hi) - target) > 0.0) throw GeometryError("fillet does not fit in the neck");
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    ((offset_y(mid) - target) * (offset_y(lo) - target) > 0.0 ? lo : hi) = mid;
  }
  const double t = 0.5 * (lo + hi);
  const PathSample s = shape.eval(t);
  const Point2 nu = Point2{s.dz.y, -s.dz.x} / norm(s.dz);
  const Point2 center = s.z + r * nu;
  return {t, s.z, center, {center.x, level}};
}

double angle_of(Point2 v) { return std::atan2(v.y, v.x); }

}  // namespace

DumbbellCurve build_dumbbell(const InclusionPair& touching, double rho, DumbbellMode mode, const Discretization& disc) {
  if (touching.eps() != 0.0) throw GeometryError("dumbbell needs a touching pair (eps = 0)");
  if (!(rho > 0.0)) throw GeometryError("dumbbell rho must be positive");
  if (!(rho < touching.rho_max())) throw GeometryError("dumbbell rho must be below rho_max = " + std::to_string(touching.rho_max()));
  const Shape& L = touching.left();
  const Shape& R = touching.right_base();
  // vertical edges of the square strictly inside the inclusions
  for (int k = -8; k <= 8; ++k) {
    const double y = rho * k / 8.0;
    if (!(L.graph_x(y) > -rho) || !(R.graph_x(y) < rho))
      throw GeometryError("square [-rho, rho]^2 sticks out of the inclusions; rho too large for this shape");
  }
  auto width = [&](double y) { return R.graph_x(y) - L.graph_x(y); };
  const double w_top = width(rho), w_bot = width(-rho);
  const double min_seg = 1e-9;
  if (!(w_top > min_seg) || !(w_bot > min_seg)) throw GeometryError("rho too small: neck segment below resolution");

  DumbbellCurve db;
  db.rho = rho;
  db.mode = mode;
  const double tl_up = L.param_at_height(rho), tl_dn = L.param_at_height(-rho);
  const double tr_up = R.param_at_height(rho), tr_dn = R.param_at_height(-rho);
  db.corner_points = {L.eval(tl_up).z, R.eval(tr_up).z, R.eval(tr_dn).z, L.eval(tl_dn).z};

  const double c = disc.neck_resolution;
  const double maxlen = disc.max_panel_length;
  auto neck_step = [&](double y) { return c * width(y); };
  const int levels = mode == DumbbellMode::exact_corner ? disc.corner_levels : 2;

  std::vector<PathFn> paths{L.path(), R.path()};
  std::vector<ParametricCurve::PanelSpec> specs;

  // Start points of the arcs (corners or fillet tangent points) at heights +-rho_arc.
  double l_up = tl_up, l_dn = tl_dn, r_up = tr_up, r_dn = tr_dn;
  Point2 top_r = db.corner_points[1], top_l = db.corner_points[0];
  Point2 bot_l = db.corner_points[3], bot_r = db.corner_points[2];
  std::array<Fillet, 4> fil{};
  if (mode == DumbbellMode::fillet) {
    db.fillet_radius = std::min(rho / 8.0, std::min(w_top, w_bot) / 8.0);
    fil = {find_fillet(L, rho, db.fillet_radius), find_fillet(R, rho, db.fillet_radius),
           find_fillet(R, -rho, db.fillet_radius), find_fillet(L, -rho, db.fillet_radius)};
    l_up = fil[0].arc_param;
    r_up = fil[1].arc_param;
    r_dn = fil[2].arc_param;
    l_dn = fil[3].arc_param;
    top_l = fil[0].seg_point;
    top_r = fil[1].seg_point;
    bot_r = fil[2].seg_point;
    bot_l = fil[3].seg_point;
    if (!(top_r.x - top_l.x > min_seg) || !(bot_r.x - bot_l.x > min_seg))
      throw GeometryError("fillets overlap across the neck");
  }
  const double y_lu = L.eval(l_up).z.y, y_ld = L.eval(l_dn).z.y;
  const double y_ru = R.eval(r_up).z.y, y_rd = R.eval(r_dn).z.y;

  // Left arc: upper start -> around the back -> lower end. The cut at |y| = 2 rho is a panel break.
  {
    const double ext_u = 0.9 * L.graph_extent(true), ext_d = 0.9 * L.graph_extent(false);
    if (!(2.0 * rho < ext_u) || !(2.0 * rho < ext_d)) throw GeometryError("doubled square swallows the left boundary near contact");
    std::vector<double> hu = graded_heights(y_lu, 1, ext_u, neck_step, maxlen, {2.0 * rho});
    std::vector<double> hd = graded_heights(y_ld, -1, -ext_d, neck_step, maxlen, {-2.0 * rho});
    std::vector<double> pu, pd;
    for (double y : hu) pu.push_back(L.param_at_height(y));
    for (double y : hd) pd.push_back(L.param_at_height(y) + 2.0 * pi);
    pu = grade_front(pu, levels);
    pd = grade_front(pd, levels);
    std::reverse(pd.begin(), pd.end());
    append_params(pu, 0, left_arc, specs);
    uniform_panels(L.path(), 0, pu.back(), pd.front(), maxlen, left_arc, specs);
    append_params(pd, 0, left_arc, specs);
  }
  auto add_fillet = [&](const Fillet& f, bool from_segment) {
    // concave fillets are traversed clockwise about their centers
    const Point2 start = from_segment ? f.seg_point : f.arc_point;
    const Point2 end = from_segment ? f.arc_point : f.seg_point;
    const double a0 = angle_of(start - f.center);
    double sweep = angle_of(end - f.center) - a0;
    while (sweep > 0.0) sweep -= 2.0 * pi;
    while (sweep <= -2.0 * pi) sweep += 2.0 * pi;
    paths.push_back(circle_arc_path(f.center, db.fillet_radius, a0, -1.0));
    const std::size_t idx = paths.size() - 1;
    std::vector<double> ps{0.0, 0.5 * (-sweep), -sweep};
    ps = grade_back(grade_front(ps, 2), 2);
    append_params(ps, idx, fillet_arc, specs);
  };
  if (mode == DumbbellMode::fillet) add_fillet(fil[3], false);
  // Bottom segment, left -> right.
  {
    paths.push_back(segment_path(bot_l, bot_r));
    const std::size_t idx = paths.size() - 1;
    std::vector<double> ps{0.0, 0.5, 1.0};
    ps = grade_back(grade_front(ps, levels), levels);
    append_params(ps, idx, bottom_segment, specs);
  }
  if (mode == DumbbellMode::fillet) add_fillet(fil[2], true);
  // Right arc: lower start -> around the back -> upper end.
  {
    const double ext_u = 0.9 * R.graph_extent(true), ext_d = 0.9 * R.graph_extent(false);
    std::vector<double> hd = graded_heights(y_rd, -1, -ext_d, neck_step, maxlen);
    std::vector<double> hu = graded_heights(y_ru, 1, ext_u, neck_step, maxlen);
    std::vector<double> pd, pu;
    for (double y : hd) pd.push_back(R.param_at_height(y));
    for (double y : hu) pu.push_back(R.param_at_height(y) + 2.0 * pi);
    pd = grade_front(pd, levels);
    pu = grade_front(pu, levels);
    std::reverse(pu.begin(), pu.end());
    append_params(pd, 1, right_arc, specs);
    uniform_panels(R.path(), 1, pd.back(), pu.front(), maxlen, right_arc, specs);
    append_params(pu, 1, right_arc, specs);
  }
  if (mode == DumbbellMode::fillet) add_fillet(fil[1], false);
  // Top segment, right -> left.
  {
    paths.push_back(segment_path(top_r, top_l));
    const std::size_t idx = paths.size() - 1;
    std::vector<double> ps{0.0, 0.5, 1.0};
    ps = grade_back(grade_front(ps, levels), levels);
    append_params(ps, idx, top_segment, specs);
  }
  if (mode == DumbbellMode::fillet) add_fillet(fil[0], true);

  db.curve = std::make_shared<const ParametricCurve>(ParametricCurve::from_panels(std::move(paths), specs, disc.panel_order));
  return db;
}

}  // namespace gapstress
