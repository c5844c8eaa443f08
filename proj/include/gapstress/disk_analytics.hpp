#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "gapstress/geometry.hpp"
#include "gapstress/potentials.hpp"

namespace gapstress {

/// Inversion in the circle: R(z) = c + r^2 (z - c) / |z - c|^2.
Point2 reflect_circle(Point2 z, const Disk& d);

struct FixedPointPair {
  Point2 p1;  // fixed point of R1 R2, inside the first disk
  Point2 p2;  // fixed point of R2 R1, inside the second disk
  double residual = 0.0;
  std::size_t iterations = 0;
};

/// Fixed points of the mixed reflections, by iterating R1 R2 (closed form for collinear centers is
/// used as a cross-check in the tests, not as a shortcut).
FixedPointPair mixed_fixed_points(const Disk& d1, const Disk& d2);
/// Closed-form limit points for disks whose centers lie on the x-axis.
FixedPointPair collinear_fixed_points(const Disk& d1, const Disk& d2);

/// q = (1/2pi)(ln|z - p1| - ln|z - p2|) and its gradient.
FieldValue q_explicit(Point2 z, const FixedPointPair& fp);

/// Leading term 2 r1 r2 / (r1 + r2) * dh/dx(0, 0).
double alpha_disk_asymptotic(double r1, double r2, const HarmonicBackground& h);

struct BlowupReference {
  double qnorm_leading;  // sqrt(k1 + k2) / (sqrt(2) pi sqrt(eps))
  double grad_limit;     // alpha0 sqrt(k1 + k2) / (sqrt(2) pi)
};

BlowupReference blowup_reference(double kappa1, double kappa2, double alpha0, double eps);

struct MobiusResult {
  std::complex<double> alpha;
  double rho_star;
};

/// phi_a(w) = (w - a) / (1 - conj(a) w).
std::complex<double> mobius(std::complex<double> a, std::complex<double> w);
/// Automorphism of the unit disk making B_rho(c) concentric with it.
MobiusResult mobius_concentric(Point2 c, double rho);

struct NeckAsymptotics {
  double c3, rho3;         // image of the small disk under z -> 1 / (z - (1 + eps))
  double alpha;            // real Mobius parameter making the image concentric
  double rho5;             // radius of the concentric image
  double beta;             // sqrt(2 (c3 + 1) / |c3|)
  double gamma;            // 2 / beta
  double beta_measured;    // (alpha + 1) / sqrt(eps)
  double gamma_measured;   // (1 - rho5) / sqrt(eps)
};

/// The neck construction with B1 = `d1` (inside the left inclusion, tangent to the y-axis at the
/// origin) and B2 the unit disk centered at (1 + eps, 0).
NeckAsymptotics mobius_neck_asymptotics(const Disk& d1, double eps);

/// Field of two perfectly conducting disks in a uniform background, summed from iterated images.
class ImageSeriesOracle {
 public:
  ImageSeriesOracle(const Disk& d1, const Disk& d2, const HarmonicBackground& h, std::size_t max_terms = 0);

  double value(Point2 z) const;
  Point2 gradient(Point2 z) const;
  double lambda1() const { return lambda_[0]; }
  double lambda2() const { return lambda_[1]; }
  std::size_t terms() const { return dipoles_.size(); }
  /// Max deviation of the potential from its mean on each sampled circle.
  double boundary_residual(std::size_t samples = 256) const;
  /// Sum of image charges inside disk j (dipoles only, so zero by construction).
  double net_charge(std::size_t j) const;

 private:
  struct Dipole {
    std::complex<double> pos;
    std::complex<double> strength;
    int disk;
  };
  std::complex<double> field_e_;
  double c0_ = 0.0;
  Disk d_[2];
  std::vector<Dipole> dipoles_;
  double lambda_[2] = {0.0, 0.0};
};

ImageSeriesOracle image_series_oracle(const Disk& d1, const Disk& d2, const HarmonicBackground& h,
                                      std::size_t n_terms = 0);

}  // namespace gapstress
