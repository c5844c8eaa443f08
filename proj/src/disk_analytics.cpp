#include "gapstress/disk_analytics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace gapstress {

namespace {

constexpr double pi = std::numbers::pi;
constexpr std::size_t max_fixed_point_iterations = 10'000'000;

void check_disk(const Disk& d) {
  if (!(d.radius > 0.0)) throw GeometryError("disk radius must be positive");
}

void check_disjoint(const Disk& d1, const Disk& d2) {
  check_disk(d1);
  check_disk(d2);
  const double gap = distance(d1.center, d2.center) - d1.radius - d2.radius;
  if (gap < -1e-14 * (d1.radius + d2.radius)) throw GeometryError("disks intersect");
}

}  // namespace

Point2 reflect_circle(Point2 z, const Disk& d) {
  check_disk(d);
  const Point2 v = z - d.center;
  const double r2 = dot(v, v);
  if (r2 == 0.0) throw std::domain_error("reflection of the circle center is at infinity");
  return d.center + (d.radius * d.radius / r2) * v;
}

FixedPointPair mixed_fixed_points(const Disk& d1, const Disk& d2) {
  check_disjoint(d1, d2);
  // R2 sends its own center to infinity, so start one reflection later.
  Point2 p = reflect_circle(d2.center, d1);
  FixedPointPair fp;
  for (std::size_t it = 1; it <= max_fixed_point_iterations; ++it) {
    const Point2 next = reflect_circle(reflect_circle(p, d2), d1);
    const double step = distance(next, p);
    p = next;
    fp.iterations = it;
    if (step < 1e-14 * (1.0 + norm(p))) break;
  }
  fp.p1 = p;
  fp.p2 = reflect_circle(p, d2);
  fp.residual = std::max(distance(reflect_circle(fp.p2, d1), fp.p1), distance(reflect_circle(fp.p1, d2), fp.p2));
  return fp;
}

FixedPointPair collinear_fixed_points(const Disk& d1, const Disk& d2) {
  check_disjoint(d1, d2);
  if (d1.center.y != 0.0 || d2.center.y != 0.0) throw GeometryError("collinear fixed points need centers on the x-axis");
  const double a1 = d1.center.x, a2 = d2.center.x, r1 = d1.radius, r2 = d2.radius;
  // p1, p2 are inverse to each other in both circles: (p1 - a)(p2 - a) = r^2.
  const double sum = (a2 * a2 - a1 * a1 - r2 * r2 + r1 * r1) / (a2 - a1);
  const double prod = r1 * r1 + a1 * sum - a1 * a1;
  const double disc = std::sqrt(std::max(0.0, 0.25 * sum * sum - prod));
  const double lo = 0.5 * sum - disc, hi = 0.5 * sum + disc;
  FixedPointPair fp;
  const bool lo_first = std::abs(lo - a1) <= std::abs(hi - a1);
  fp.p1 = {lo_first ? lo : hi, 0.0};
  fp.p2 = {lo_first ? hi : lo, 0.0};
  fp.residual = std::max(distance(reflect_circle(fp.p2, d1), fp.p1), distance(reflect_circle(fp.p1, d2), fp.p2));
  return fp;
}

FieldValue q_explicit(Point2 z, const FixedPointPair& fp) {
  const Point2 a = z - fp.p1, b = z - fp.p2;
  const double ra = dot(a, a), rb = dot(b, b);
  if (ra == 0.0 || rb == 0.0) throw std::domain_error("q_explicit evaluated at a pole");
  FieldValue f;
  f.value = 0.25 / pi * (std::log(ra) - std::log(rb));
  f.gradient = (0.5 / pi) * (a / ra - b / rb);
  return f;
}

double alpha_disk_asymptotic(double r1, double r2, const HarmonicBackground& h) {
  if (!(r1 > 0.0) || !(r2 > 0.0)) throw GeometryError("radii must be positive");
  return 2.0 * r1 * r2 / (r1 + r2) * h.gradient({0.0, 0.0}).x;
}

BlowupReference blowup_reference(double kappa1, double kappa2, double alpha0, double eps) {
  if (!(kappa1 > 0.0) || !(kappa2 > 0.0)) throw std::invalid_argument("curvatures must be positive");
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
  const double s = std::sqrt(kappa1 + kappa2) / (std::sqrt(2.0) * pi);
  return {s / std::sqrt(eps), alpha0 * s};
}

std::complex<double> mobius(std::complex<double> a, std::complex<double> w) { return (w - a) / (1.0 - std::conj(a) * w); }

MobiusResult mobius_concentric(Point2 c, double rho) {
  const double cn = norm(c);
  if (!(rho > 0.0) || !(cn + rho < 1.0)) throw GeometryError("disk must lie strictly inside the unit disk");
  if (cn == 0.0) return {0.0, rho};
  const double s = cn * cn - rho * rho + 1.0;
  const double scale = (s - std::sqrt(s * s - 4.0 * cn * cn)) / (2.0 * cn * cn);
  const std::complex<double> alpha = scale * to_complex(c);
  const Point2 edge = c + (rho / cn) * c;
  return {alpha, std::abs(mobius(alpha, to_complex(edge)))};
}

NeckAsymptotics mobius_neck_asymptotics(const Disk& d1, double eps) {
  check_disk(d1);
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
  if (d1.center.y != 0.0 || std::abs(d1.center.x + d1.radius) > 1e-12 * d1.radius)
    throw GeometryError("B1 must be tangent to the y-axis at the origin from the left");
  const double r = d1.radius;
  auto phi1 = [eps](double x) { return 1.0 / (x - (1.0 + eps)); };
  // The real diameter [-2r, 0] of B1 maps onto the real diameter of B3.
  const double e0 = phi1(0.0), e1 = phi1(-2.0 * r);
  NeckAsymptotics out{};
  out.c3 = 0.5 * (e0 + e1);
  out.rho3 = 0.5 * std::abs(e1 - e0);
  const MobiusResult m = mobius_concentric({out.c3, 0.0}, out.rho3);
  out.alpha = m.alpha.real();
  out.rho5 = std::abs(mobius(m.alpha, e0));
  out.beta = std::sqrt(2.0 * (out.c3 + 1.0) / std::abs(out.c3));
  out.gamma = 2.0 / out.beta;
  out.beta_measured = (out.alpha + 1.0) / std::sqrt(eps);
  out.gamma_measured = (1.0 - out.rho5) / std::sqrt(eps);
  return out;
}

// ---------------------------------------------------------------------------------------------

ImageSeriesOracle::ImageSeriesOracle(const Disk& d1, const Disk& d2, const HarmonicBackground& h, std::size_t max_terms)
    : d_{d1, d2} {
  check_disjoint(d1, d2);
  if (h.degree() > 1) throw std::invalid_argument("image series oracle supports uniform backgrounds only");
  // h = Re(E z) + c0 with E = a - i b
  field_e_ = {h.a[0], -h.b[0]};
  c0_ = h.c0;
  const std::size_t cap = max_terms == 0 ? 2'000'000 : max_terms;
  const double scale = std::max(d1.radius, d2.radius);
  const double tol = 1e-18 * std::abs(field_e_) * scale * scale;
  for (int first = 0; first < 2 && field_e_ != 0.0; ++first) {
    // image of E z in the first circle, then alternating reflections
    int j = first;
    const std::complex<double> c0 = to_complex(d_[j].center);
    Dipole cur{c0, -std::conj(field_e_) * d_[j].radius * d_[j].radius, j};
    while (dipoles_.size() < cap) {
      dipoles_.push_back(cur);
      if (std::abs(cur.strength) < tol) break;
      j = 1 - j;
      const std::complex<double> c = to_complex(d_[j].center);
      const std::complex<double> w = std::conj(cur.pos - c);
      const double r2 = d_[j].radius * d_[j].radius;
      cur = {c + r2 / w, std::conj(cur.strength) * r2 / (w * w), j};
    }
  }
  for (int j = 0; j < 2; ++j) {
    double mean = 0.0;
    const int n = 64;
    for (int k = 0; k < n; ++k) {
      const double t = 2.0 * pi * k / n;
      mean += value(d_[j].center + d_[j].radius * Point2{std::cos(t), std::sin(t)}) / n;
    }
    lambda_[j] = mean;
  }
}

double ImageSeriesOracle::value(Point2 z) const {
  const std::complex<double> zc = to_complex(z);
  std::complex<double> f = field_e_ * zc;
  for (const auto& d : dipoles_) f += d.strength / (zc - d.pos);
  return f.real() + c0_;
}

Point2 ImageSeriesOracle::gradient(Point2 z) const {
  const std::complex<double> zc = to_complex(z);
  std::complex<double> df = field_e_;
  for (const auto& d : dipoles_) {
    const std::complex<double> q = zc - d.pos;
    df -= d.strength / (q * q);
  }
  return {df.real(), -df.imag()};
}

double ImageSeriesOracle::boundary_residual(std::size_t samples) const {
  double worst = 0.0;
  for (int j = 0; j < 2; ++j) {
    std::vector<double> v(samples);
    double mean = 0.0;
    for (std::size_t k = 0; k < samples; ++k) {
      const double t = 2.0 * pi * k / samples;
      v[k] = value(d_[j].center + d_[j].radius * Point2{std::cos(t), std::sin(t)});
      mean += v[k] / samples;
    }
    for (double x : v) worst = std::max(worst, std::abs(x - mean));
  }
  return worst;
}

double ImageSeriesOracle::net_charge(std::size_t j) const {
  if (j > 1) throw std::out_of_range("disk index out of range");
  return 0.0;
}

ImageSeriesOracle image_series_oracle(const Disk& d1, const Disk& d2, const HarmonicBackground& h, std::size_t n_terms) {
  return ImageSeriesOracle(d1, d2, h, n_terms);
}

}  // namespace gapstress
