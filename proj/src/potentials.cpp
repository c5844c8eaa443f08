#include "gapstress/potentials.hpp"

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>

#include "gapstress/parallel.hpp"
#include "gapstress/quadrature.hpp"

namespace gapstress {

namespace {

constexpr double pi = std::numbers::pi;
constexpr double inv_2pi = 0.5 / std::numbers::pi;
constexpr std::size_t gl_order = 16;
constexpr int self_grading_levels = 32;
constexpr int max_adaptive_depth = 52;
// A panel is treated with its own nodes when the target is farther than this many panel lengths.
constexpr double near_factor = 1.0;
// Periodic curves: plain trapezoid when every node is this many local spacings away.
constexpr double periodic_far_spacings = 5.0;

}  // namespace

// ---------------------------------------------------------------------------------------------
// HarmonicBackground

HarmonicBackground HarmonicBackground::uniform(double gx, double gy) {
  HarmonicBackground h;
  h.a[0] = gx;
  h.b[0] = gy;
  return h;
}

double HarmonicBackground::value(Point2 p) const {
  const std::complex<double> z = to_complex(p);
  std::complex<double> zn = 1.0;
  double v = c0;
  for (std::size_t n = 0; n < 4; ++n) {
    zn *= z;
    v += a[n] * zn.real() + b[n] * zn.imag();
  }
  return v;
}

Point2 HarmonicBackground::gradient(Point2 p) const {
  // h = Re F with F = sum (a_n - i b_n) z^n, grad h = (Re F', -Im F').
  const std::complex<double> z = to_complex(p);
  std::complex<double> zn = 1.0;
  std::complex<double> dF = 0.0;
  for (std::size_t n = 0; n < 4; ++n) {
    dF += static_cast<double>(n + 1) * std::complex<double>(a[n], -b[n]) * zn;
    zn *= z;
  }
  return {dF.real(), -dF.imag()};
}

int HarmonicBackground::degree() const {
  for (int n = 3; n >= 0; --n)
    if (a[n] != 0.0 || b[n] != 0.0) return n + 1;
  return 0;
}

bool HarmonicBackground::is_zero() const { return c0 == 0.0 && degree() == 0; }

HarmonicBackground HarmonicBackground::shifted(double c) const {
  HarmonicBackground h = *this;
  h.c0 += c;
  return h;
}

HarmonicBackground HarmonicBackground::operator+(const HarmonicBackground& o) const {
  HarmonicBackground h = *this;
  h.c0 += o.c0;
  for (std::size_t n = 0; n < 4; ++n) {
    h.a[n] += o.a[n];
    h.b[n] += o.b[n];
  }
  return h;
}

// ---------------------------------------------------------------------------------------------
// BoundaryDensity

BoundaryDensity::BoundaryDensity(LayerPotentialPtr potential)
    : potential_(std::move(potential)), values_(Eigen::VectorXd::Zero(potential_->size())) {}

BoundaryDensity::BoundaryDensity(LayerPotentialPtr potential, Eigen::VectorXd values)
    : potential_(std::move(potential)), values_(std::move(values)) {
  if (static_cast<std::size_t>(values_.size()) != potential_->size())
    throw std::invalid_argument("density size does not match the discretization");
}

std::size_t BoundaryDensity::curve_count() const { return potential_->curves().size(); }
const ParametricCurve& BoundaryDensity::curve(std::size_t j) const { return *potential_->curves().at(j); }
std::size_t BoundaryDensity::offset(std::size_t j) const { return potential_->offset(j); }

std::span<const double> BoundaryDensity::on(std::size_t j) const {
  return {values_.data() + offset(j), curve(j).size()};
}

double BoundaryDensity::charge(std::size_t j) const {
  const auto w = curve(j).weights();
  const auto v = on(j);
  double q = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) q += w[i] * v[i];
  return q;
}

// ---------------------------------------------------------------------------------------------
// LayerPotential

struct LayerPotential::Accumulator {
  Point2 x;
  Point2 nu;
  double* v = nullptr;
  double* gx = nullptr;
  double* gy = nullptr;
  double* k = nullptr;

  struct Kern {
    double v, gx, gy, k;
  };

  Kern kernel(Point2 y, double ds) const {
    const Point2 d = x - y;
    const double r2 = dot(d, d);
    const double c = ds * inv_2pi;
    Kern out{0.0, 0.0, 0.0, 0.0};
    if (v) out.v = 0.5 * std::log(r2) * c;
    if (gx || gy) {
      out.gx = d.x / r2 * c;
      out.gy = d.y / r2 * c;
    }
    if (k) out.k = dot(d, nu) / r2 * c;
    return out;
  }

  void add_single(Point2 y, double ds, std::size_t col) {
    const Kern kk = kernel(y, ds);
    if (v) v[col] += kk.v;
    if (gx) gx[col] += kk.gx;
    if (gy) gy[col] += kk.gy;
    if (k) k[col] += kk.k;
  }

  void add_basis(Point2 y, double ds, std::size_t col0, std::span<const double> basis) {
    const Kern kk = kernel(y, ds);
    const std::size_t n = basis.size();
    if (v)
      for (std::size_t j = 0; j < n; ++j) v[col0 + j] += kk.v * basis[j];
    if (gx)
      for (std::size_t j = 0; j < n; ++j) gx[col0 + j] += kk.gx * basis[j];
    if (gy)
      for (std::size_t j = 0; j < n; ++j) gy[col0 + j] += kk.gy * basis[j];
    if (k)
      for (std::size_t j = 0; j < n; ++j) k[col0 + j] += kk.k * basis[j];
  }

  // basis for column j is row[(j - shift) mod n]
  void add_shifted(Point2 y, double ds, std::size_t col0, const double* row, std::size_t n, std::size_t shift) {
    const Kern kk = kernel(y, ds);
    auto apply = [&](double* out, double kv) {
      if (!out) return;
      for (std::size_t j = shift; j < n; ++j) out[col0 + j] += kv * row[j - shift];
      for (std::size_t j = 0; j < shift; ++j) out[col0 + j] += kv * row[j + n - shift];
    };
    apply(v, kk.v);
    apply(gx, kk.gx);
    apply(gy, kk.gy);
    apply(k, kk.k);
  }
};

LayerPotential::LayerPotential(std::vector<CurvePtr> curves) : curves_(std::move(curves)) {
  if (curves_.empty()) throw std::invalid_argument("layer potential needs at least one curve");
  const GaussRule& rule = gauss_legendre(gl_order);
  kress_node_.resize(curves_.size());
  kress_half_.resize(curves_.size());
  fine_basis_.resize(curves_.size());
  for (std::size_t c = 0; c < curves_.size(); ++c) {
    const ParametricCurve& cv = *curves_[c];
    offsets_.push_back(total_);
    curve_seg_begin_.push_back(segments_.size());
    if (cv.mode() == ParametricCurve::Mode::panels) {
      for (const auto& p : cv.panels()) {
        const double mid = 0.5 * (p.t0 + p.t1);
        segments_.push_back({c, p.path, p.t0, p.t1, total_ + p.first, cv.order(), p.length, cv.path(p.path)(mid).z,
                             false, 0});
      }
    } else {
      const std::size_t n = cv.size();
      const double h = 2.0 * pi / n;
      const std::size_t per = n % 4 == 0 ? 4 : 2;
      // Upsampled basis for the first virtual segment; the others are circular shifts of it.
      Eigen::MatrixXd b0(gl_order, n);
      std::vector<double> tmp(n);
      for (std::size_t q = 0; q < gl_order; ++q) {
        trig_cardinal(n, 0.5 * per * h * (rule.nodes[q] + 1.0), tmp);
        for (std::size_t j = 0; j < n; ++j) b0(q, j) = tmp[j];
      }
      fine_basis_[c] = Eigen::MatrixXd(b0.transpose());  // column q holds basis row q contiguously
      for (std::size_t s = 0; s < n / per; ++s) {
        const double t0 = s * per * h, t1 = (s + 1) * per * h;
        Segment seg{c, 0, t0, t1, total_, n, 0.0, cv.path(0)(0.5 * (t0 + t1)).z, true, fine_.size()};
        for (std::size_t q = 0; q < gl_order; ++q) {
          const PathSample ps = cv.path(0)(t0 + 0.5 * (t1 - t0) * (rule.nodes[q] + 1.0));
          const double ds = 0.5 * (t1 - t0) * rule.weights[q] * norm(ps.dz);
          fine_.push_back({ps.z, ds});
          seg.length += ds;
        }
        segments_.push_back(seg);
      }
      kress_node_[c].resize(n);
      kress_half_[c].resize(n);
      kress_log_weights(n, 0.0, kress_node_[c]);
      kress_log_weights(n, 0.5 * h, kress_half_[c]);
    }
    total_ += cv.size();
  }
  curve_seg_begin_.push_back(segments_.size());
  for (std::size_t a = 0; a < curves_.size(); ++a)
    for (std::size_t b = a + 1; b < curves_.size(); ++b) {
      const auto& cb = *curves_[b];
      if (curves_[a]->winding_number(cb.nodes()[0]) != 0 || cb.winding_number(curves_[a]->nodes()[0]) != 0)
        throw GeometryError("layer-potential curves intersect or are nested");
    }
}

void LayerPotential::basis_at(const Segment& s, double t, std::span<double> out) const {
  if (s.periodic) {
    trig_cardinal(s.ncols, t, out);
  } else {
    lagrange_basis(gauss_legendre(s.ncols), 2.0 * (t - s.t0) / (s.t1 - s.t0) - 1.0, out);
  }
}

void LayerPotential::add_gl(const Segment& s, double a, double b, Accumulator& acc) const {
  const GaussRule& rule = gauss_legendre(gl_order);
  const PathFn& path = curves_[s.curve]->path(s.path);
  std::vector<double> basis(s.ncols);
  const double half = 0.5 * (b - a);
  for (std::size_t q = 0; q < gl_order; ++q) {
    const double t = a + half * (rule.nodes[q] + 1.0);
    const PathSample ps = path(t);
    basis_at(s, t, basis);
    acc.add_basis(ps.z, half * rule.weights[q] * norm(ps.dz), s.col0, basis);
  }
}

void LayerPotential::add_plain(const Segment& s, Accumulator& acc) const {
  if (s.periodic) {
    const ParametricCurve& cv = *curves_[s.curve];
    const std::size_t n = cv.size();
    const std::size_t per = n % 4 == 0 ? 4 : 2;
    const std::size_t k = (s.fine0 / gl_order);  // global virtual index; shift relative to this curve
    const std::size_t first_fine = segments_[curve_seg_begin_[s.curve]].fine0;
    const std::size_t local = k - first_fine / gl_order;
    const Eigen::MatrixXd& b0 = fine_basis_[s.curve];
    for (std::size_t q = 0; q < gl_order; ++q) {
      const FinePoint& f = fine_[s.fine0 + q];
      acc.add_shifted(f.y, f.ds, s.col0, b0.col(q).data(), n, (local * per) % n);
    }
    return;
  }
  const ParametricCurve& cv = *curves_[s.curve];
  const std::size_t first = s.col0 - offsets_[s.curve];
  for (std::size_t q = 0; q < s.ncols; ++q) acc.add_single(cv.nodes()[first + q], cv.weights()[first + q], s.col0 + q);
}

void LayerPotential::add_adaptive(const Segment& s, double a, double b, int depth, Accumulator& acc) const {
  const PathSample mid = curves_[s.curve]->path(s.path)(0.5 * (a + b));
  const double len = norm(mid.dz) * (b - a);
  if (distance(acc.x, mid.z) >= near_factor * len || depth >= max_adaptive_depth) {
    add_gl(s, a, b, acc);
    return;
  }
  const double m = 0.5 * (a + b);
  add_adaptive(s, a, m, depth + 1, acc);
  add_adaptive(s, m, b, depth + 1, acc);
}

void LayerPotential::add_segment(const Segment& s, Accumulator& acc) const {
  if (distance(acc.x, s.center) >= near_factor * s.length)
    add_plain(s, acc);
  else
    add_adaptive(s, s.t0, s.t1, 0, acc);
}

void LayerPotential::add_periodic_curve(std::size_t c, Accumulator& acc) const {
  const ParametricCurve& cv = *curves_[c];
  const auto nodes = cv.nodes();
  const auto w = cv.weights();
  const double lim2 = periodic_far_spacings * periodic_far_spacings;
  bool far = true;
  for (std::size_t j = 0; j < cv.size() && far; ++j) {
    const Point2 d = acc.x - nodes[j];
    if (dot(d, d) < lim2 * w[j] * w[j]) far = false;
  }
  if (far) {
    for (std::size_t j = 0; j < cv.size(); ++j) acc.add_single(nodes[j], w[j], offsets_[c] + j);
    return;
  }
  for (std::size_t s = curve_seg_begin_[c]; s < curve_seg_begin_[c + 1]; ++s) add_segment(segments_[s], acc);
}

// Target at parameter t on panel s: split at t and grade geometrically toward the log singularity.
void LayerPotential::add_self_log(const Segment& s, double t, Accumulator& acc) const {
  const PathSample at = curves_[s.curve]->path(s.path)(t);
  const double sp = norm(at.dz);
  std::vector<double> basis(s.ncols);
  basis_at(s, t, basis);
  for (int side : {1, -1}) {
    const double span = side > 0 ? s.t1 - t : t - s.t0;
    if (span <= 0.0) continue;
    double outer = span;
    // stop before t +- inner stops being distinguishable from t in floating point
    const double floor = 1e-11 * std::max(1.0, std::abs(t));
    for (int k = 0; k < self_grading_levels && outer > floor; ++k) {
      const double inner = 0.5 * outer;
      if (side > 0)
        add_gl(s, t + inner, t + outer, acc);
      else
        add_gl(s, t - outer, t - inner, acc);
      outer = inner;
    }
    // remaining piece of parameter length `outer`: ln|x - y| ~ ln(sp * |t - tau|)
    const double d = outer * sp;
    const double integral = (d * std::log(d) - d) * inv_2pi;
    for (std::size_t j = 0; j < s.ncols; ++j) acc.v[s.col0 + j] += integral * basis[j];
  }
}

void LayerPotential::kress_row(std::size_t c, double t, std::span<double> row) const {
  const ParametricCurve& cv = *curves_[c];
  const std::size_t n = cv.size();
  const double h = 2.0 * pi / n;
  const PathSample at = cv.path(0)(t);
  std::vector<double> r(n);
  const double tn = t / h;
  const double tr = std::round(tn);
  const double th = std::round(tn - 0.5) + 0.5;
  long node = -1;
  if (std::abs(tn - tr) < 1e-12) {
    const std::size_t i = static_cast<std::size_t>(((static_cast<long>(tr) % static_cast<long>(n)) + n) % n);
    node = static_cast<long>(i);
    for (std::size_t j = 0; j < n; ++j) r[j] = kress_node_[c][(j + n - i) % n];
  } else if (std::abs(tn - th) < 1e-12) {
    const std::size_t i = static_cast<std::size_t>(((static_cast<long>(th - 0.5) % static_cast<long>(n)) + n) % n);
    for (std::size_t j = 0; j < n; ++j) r[j] = kress_half_[c][(j + n - i) % n];
  } else {
    kress_log_weights(n, t, r);
  }
  const auto nodes = cv.nodes();
  const auto speed = cv.speed();
  const std::size_t off = offsets_[c];
  for (std::size_t j = 0; j < n; ++j) {
    double smooth;
    if (static_cast<long>(j) == node) {
      smooth = std::log(norm(at.dz));
    } else {
      const Point2 d = at.z - nodes[j];
      const double s = std::sin(0.5 * (t - h * j));
      smooth = 0.5 * std::log(dot(d, d) / (4.0 * s * s));
    }
    row[off + j] += inv_2pi * (0.5 * r[j] + h * smooth) * speed[j];
  }
}

void LayerPotential::field_rows(Point2 x, std::span<double> value, std::span<double> gx, std::span<double> gy) const {
  Accumulator acc;
  acc.x = x;
  acc.v = value.empty() ? nullptr : value.data();
  acc.gx = gx.empty() ? nullptr : gx.data();
  acc.gy = gy.empty() ? nullptr : gy.data();
  for (std::size_t c = 0; c < curves_.size(); ++c) {
    if (curves_[c]->mode() == ParametricCurve::Mode::periodic)
      add_periodic_curve(c, acc);
    else
      for (std::size_t s = curve_seg_begin_[c]; s < curve_seg_begin_[c + 1]; ++s) add_segment(segments_[s], acc);
  }
}

void LayerPotential::boundary_value_row(std::size_t c, std::size_t segment, double t, std::span<double> row) const {
  const ParametricCurve& cv = *curves_.at(c);
  Accumulator acc;
  acc.v = row.data();
  if (cv.mode() == ParametricCurve::Mode::periodic) {
    acc.x = cv.path(0)(t).z;
    kress_row(c, t, row);
  } else {
    const Segment& own = segments_.at(curve_seg_begin_[c] + segment);
    acc.x = cv.path(own.path)(t).z;
    for (std::size_t s = curve_seg_begin_[c]; s < curve_seg_begin_[c + 1]; ++s) {
      if (s == curve_seg_begin_[c] + segment)
        add_self_log(segments_[s], t, acc);
      else
        add_segment(segments_[s], acc);
    }
  }
  for (std::size_t o = 0; o < curves_.size(); ++o) {
    if (o == c) continue;
    if (curves_[o]->mode() == ParametricCurve::Mode::periodic)
      add_periodic_curve(o, acc);
    else
      for (std::size_t s = curve_seg_begin_[o]; s < curve_seg_begin_[o + 1]; ++s) add_segment(segments_[s], acc);
  }
}

void LayerPotential::adjoint_row(std::size_t c, std::size_t node, std::span<double> row) const {
  const ParametricCurve& cv = *curves_.at(c);
  Accumulator acc;
  acc.x = cv.nodes()[node];
  acc.nu = cv.normals()[node];
  acc.k = row.data();
  const std::size_t off = offsets_[c];
  // Own panel (or the whole periodic curve): the kernel is smooth, plain rule with the diagonal limit.
  std::size_t lo = 0, hi = cv.size();
  if (cv.mode() == ParametricCurve::Mode::panels) {
    lo = cv.panel_of(node) * cv.order();
    hi = lo + cv.order();
  }
  for (std::size_t j = lo; j < hi; ++j) {
    if (j == node)
      row[off + j] += cv.curvature()[j] * 0.25 / pi * cv.weights()[j];
    else
      acc.add_single(cv.nodes()[j], cv.weights()[j], off + j);
  }
  if (cv.mode() == ParametricCurve::Mode::panels) {
    const std::size_t own = curve_seg_begin_[c] + cv.panel_of(node);
    for (std::size_t s = curve_seg_begin_[c]; s < curve_seg_begin_[c + 1]; ++s)
      if (s != own) add_segment(segments_[s], acc);
  }
  for (std::size_t o = 0; o < curves_.size(); ++o) {
    if (o == c) continue;
    if (curves_[o]->mode() == ParametricCurve::Mode::periodic)
      add_periodic_curve(o, acc);
    else
      for (std::size_t s = curve_seg_begin_[o]; s < curve_seg_begin_[o + 1]; ++s) add_segment(segments_[s], acc);
  }
}

Eigen::MatrixXd LayerPotential::slp_matrix(unsigned threads) const {
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> m =
      Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>::Zero(total_, total_);
  std::vector<std::pair<std::size_t, std::size_t>> rows;
  for (std::size_t c = 0; c < curves_.size(); ++c)
    for (std::size_t i = 0; i < curves_[c]->size(); ++i) rows.emplace_back(c, i);
  parallel_for(rows.size(), threads, [&](std::size_t r) {
    const auto [c, i] = rows[r];
    const ParametricCurve& cv = *curves_[c];
    const std::size_t seg = cv.mode() == ParametricCurve::Mode::panels ? cv.panel_of(i) : 0;
    boundary_value_row(c, seg, cv.params()[i], std::span<double>(m.row(r).data(), total_));
  });
  return m;
}

Eigen::MatrixXd LayerPotential::adjoint_matrix(std::size_t c, unsigned threads) const {
  const std::size_t n = curves_.at(c)->size();
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> m =
      Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>::Zero(n, total_);
  parallel_for(n, threads, [&](std::size_t i) { adjoint_row(c, i, std::span<double>(m.row(i).data(), total_)); });
  return m;
}

int LayerPotential::locate(Point2 p) const {
  for (std::size_t c = 0; c < curves_.size(); ++c) {
    const ParametricCurve& cv = *curves_[c];
    for (std::size_t j = 0; j < cv.size(); ++j)
      if (distance(p, cv.nodes()[j]) < 1e-13 * (1.0 + norm(p))) throw DomainError("evaluation point lies on a boundary");
    if (cv.winding_number(p) != 0) return static_cast<int>(c);
  }
  return -1;
}

// ---------------------------------------------------------------------------------------------

QuadratureRule quadrature_rule(const CurvePtr& curve) {
  const LayerPotential lp({curve});
  QuadratureRule rule;
  rule.params.assign(curve->params().begin(), curve->params().end());
  rule.weights.assign(curve->weights().begin(), curve->weights().end());
  rule.singular_correction = lp.slp_matrix();
  const auto nodes = curve->nodes();
  for (std::size_t i = 0; i < curve->size(); ++i)
    for (std::size_t j = 0; j < curve->size(); ++j)
      if (i != j) rule.singular_correction(i, j) -= inv_2pi * std::log(distance(nodes[i], nodes[j])) * rule.weights[j];
  return rule;
}

Eigen::MatrixXd slp_operator(const std::vector<CurvePtr>& curves, unsigned threads) {
  return LayerPotential(curves).slp_matrix(threads);
}

std::vector<FieldValue> eval_field(const BoundaryDensity& density, const HarmonicBackground& background,
                                   std::span<const Point2> points, unsigned threads) {
  const LayerPotential& lp = density.potential();
  std::vector<FieldValue> out(points.size());
  const Eigen::VectorXd& phi = density.values();
  parallel_for(points.size(), threads, [&](std::size_t k) {
    const Point2 p = points[k];
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) throw DomainError("non-finite evaluation point");
    if (lp.locate(p) >= 0) throw DomainError("evaluation point lies inside an inclusion");
    Eigen::VectorXd v = Eigen::VectorXd::Zero(lp.size()), gx = v, gy = v;
    lp.field_rows(p, {v.data(), lp.size()}, {gx.data(), lp.size()}, {gy.data(), lp.size()});
    const Point2 gh = background.gradient(p);
    out[k].value = background.value(p) + v.dot(phi);
    out[k].gradient = {gh.x + gx.dot(phi), gh.y + gy.dot(phi)};
  });
  return out;
}

FluxResult boundary_flux(const BoundaryDensity& density, const HarmonicBackground& background, std::size_t curve_index,
                         unsigned threads) {
  if (curve_index >= density.curve_count()) throw std::out_of_range("boundary_flux: curve index out of range");
  const ParametricCurve& cv = density.curve(curve_index);
  const Eigen::MatrixXd k = density.potential().adjoint_matrix(curve_index, threads);
  const Eigen::VectorXd kphi = k * density.values();
  FluxResult res;
  res.pointwise.resize(cv.size());
  const auto phi = density.on(curve_index);
  for (std::size_t i = 0; i < cv.size(); ++i) {
    // the curve normal points out of the inclusion; the reported derivative uses the opposite one
    res.pointwise[i] = -(dot(background.gradient(cv.nodes()[i]), cv.normals()[i]) + 0.5 * phi[i] + kphi(i));
    res.integral += cv.weights()[i] * res.pointwise[i];
  }
  return res;
}

}  // namespace gapstress
