#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace gapstress {

/// Gauss-Legendre rule on [-1, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
  std::vector<double> barycentric;  // barycentric interpolation weights for `nodes`

  std::size_t size() const { return nodes.size(); }
};

/// Cached n-point rule; thread-safe after first use of each n.
const GaussRule& gauss_legendre(std::size_t n);

/// Values of the Lagrange cardinal polynomials of `rule` at t.
void lagrange_basis(const GaussRule& rule, double t, std::span<double> out);

/// Weights R_j(t) with sum_j R_j(t) f(s_j) ~ int_0^{2pi} ln(4 sin^2((t-s)/2)) f(s) ds,
/// s_j = 2 pi j / n_nodes (Kress product rule). n_nodes must be even.
void kress_log_weights(std::size_t n_nodes, double t, std::span<double> out);

/// Cardinal functions of the even-length trigonometric interpolant on the
/// equispaced grid s_j = 2 pi j / n_nodes, evaluated at t.
void trig_cardinal(std::size_t n_nodes, double t, std::span<double> out);

}  // namespace gapstress
