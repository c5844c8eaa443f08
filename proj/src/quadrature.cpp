#include "gapstress/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace gapstress {

namespace {

GaussRule build_gauss_rule(std::size_t n) {
  GaussRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  rule.barycentric.resize(n);
  const double pi = std::numbers::pi;
  for (std::size_t i = 0; i < n; ++i) {
    // Chebyshev-like initial guess, then Newton on P_n.
    double x = std::cos(pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (std::size_t k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // ascending order
    rule.nodes[n - 1 - i] = x;
    rule.weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  for (std::size_t j = 0; j < n; ++j) {
    // Gauss nodes: w_j^bary proportional to (-1)^j sqrt((1-x_j^2) w_j)
    const double x = rule.nodes[j];
    rule.barycentric[j] = ((j % 2) ? -1.0 : 1.0) * std::sqrt((1.0 - x * x) * rule.weights[j]);
  }
  return rule;
}

}  // namespace

const GaussRule& gauss_legendre(std::size_t n) {
  if (n < 2) throw std::invalid_argument("gauss_legendre: need at least 2 nodes");
  static std::mutex mutex;
  static std::map<std::size_t, GaussRule> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, build_gauss_rule(n)).first;
  return it->second;
}

void lagrange_basis(const GaussRule& rule, double t, std::span<double> out) {
  const std::size_t n = rule.size();
  double denom = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double d = t - rule.nodes[j];
    if (d == 0.0) {
      for (std::size_t k = 0; k < n; ++k) out[k] = (k == j) ? 1.0 : 0.0;
      return;
    }
    out[j] = rule.barycentric[j] / d;
    denom += out[j];
  }
  for (std::size_t j = 0; j < n; ++j) out[j] /= denom;
}

void kress_log_weights(std::size_t n_nodes, double t, std::span<double> out) {
  if (n_nodes % 2 != 0) throw std::invalid_argument("kress_log_weights: n_nodes must be even");
  const std::size_t n = n_nodes / 2;
  const double pi = std::numbers::pi;
  for (std::size_t j = 0; j < n_nodes; ++j) {
    const double d = t - pi * j / n;
    double sum = 0.0;
    for (std::size_t m = 1; m < n; ++m) sum += std::cos(m * d) / m;
    out[j] = -(2.0 * pi / n) * sum - (pi / (n * double(n))) * std::cos(n * d);
  }
}

void trig_cardinal(std::size_t n_nodes, double t, std::span<double> out) {
  const double pi = std::numbers::pi;
  const double h = 2.0 * pi / n_nodes;
  for (std::size_t j = 0; j < n_nodes; ++j) {
    double d = std::remainder(t - h * j, 2.0 * pi);
    if (std::abs(d) < 1e-15) {
      out[j] = 1.0;
      continue;
    }
    out[j] = std::sin(0.5 * n_nodes * d) / (n_nodes * std::tan(0.5 * d));
  }
}

}  // namespace gapstress
