#pragma once

// Explicit constants and thresholds of the small-data theory in d = 1, the
// Γ majorant, and numeric checks of the two auxiliary integral estimates.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <utility>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "sixwave/collision.hpp"
#include "sixwave/core.hpp"
#include "sixwave/error.hpp"

namespace sixwave {

/// C_d = max(π^d, |S^{2d-1}|): the Gaussian mass and the polar-measure
/// constant are both called C_d in the convolution estimate.
inline double c_d(int d) {
  if (d < 1) throw Error(ErrorKind::Usage, "dimension must be positive");
  const double pi_d = std::pow(std::numbers::pi, d);
  const double sphere = 2.0 * pi_d / std::tgamma(static_cast<double>(d));
  return std::max(pi_d, sphere);
}

/// Constant of ∬(|v1-v| + |v2-v|)^q e^{-β(v1²+v2²)} <= C (1 + |v|^{q+}).
inline double conv_constant(int d, double beta, double q) {
  if (!(beta > 0.0)) throw Error(ErrorKind::Usage, "beta must be positive");
  if (!(q > -2.0 * d)) throw Error(ErrorKind::Usage, "q must exceed -2d");
  if (q <= 0.0) return std::pow(2.0, q / 2.0) * c_d(d) * (std::pow(beta, -d) + 1.0 / (2.0 * d + q));
  return std::pow(2.0, 3.0 * q - 2.0) * c_d(d) * std::pow(beta, -q / 2.0 + d) *
         std::tgamma((q + d) / 2.0);
}

/// C_{1,β}: the d = 1, q = -1 case, 2^{-1/2}·2π·(1/β + 1).
inline double c1beta(double beta) { return conv_constant(1, beta, -1.0); }

struct Thresholds {
  double c_d = 0;
  double c1beta = 0;
  double r_e = 0;
  double r_p_lo = 0;
  double r_p_hi = 0;
  bool r_p_nonempty = false;
  double r_ks = 0;
  double r_s = 0;
  /// C_{1,β} α^{-1/2}, the quantity both Maxwellian-centred conditions test.
  double smallness = 0;
  bool nonneg_regime = false;
};

inline Thresholds thresholds(const WeightParams& w) {
  Thresholds t;
  t.c_d = c_d(1);
  t.c1beta = c1beta(w.beta);
  const double a8 = std::pow(w.alpha, 0.125);
  const double c4 = std::pow(t.c1beta, 0.25);
  t.r_e = a8 / (std::pow(2.0, 3.5) * c4);
  t.r_s = t.r_e;
  t.r_ks = 0.95 * a8 / std::pow(240.0 * t.c1beta, 0.25);
  t.smallness = t.c1beta / std::sqrt(w.alpha);
  const double cond1 = std::pow(3.0 / 16.0, 4);
  t.r_p_lo = 1.0 / 6.0;
  t.r_p_hi = a8 / (8.0 * c4) - 0.5;
  t.r_p_nonempty = t.smallness < cond1 && t.r_p_lo <= t.r_p_hi;
  t.nonneg_regime = t.r_p_nonempty && t.smallness > std::pow(2.0, -12);
  return t;
}

/// Γ(s, x, v) = M(x, v) ∬ e^{-α(|x+s(v-v1)|² + |x+s(v-v2)|²) - β(v1²+v2²)} dv1 dv2,
/// by trapezoid over the velocity nodes of q. The integrand factorises.
inline double gamma(double s, double x, double v, const WeightParams& w, const QuadratureSpec& q) {
  const PhaseGrid& g = q.grid;
  double one = 0.0;
  for (int j = 0; j < g.nv; ++j) {
    const double vj = g.v(j);
    const double y = x + s * (v - vj);
    const double wt = (j == 0 || j == g.nv - 1) ? 0.5 * g.hv() : g.hv();
    one += wt * std::exp(-w.alpha * y * y - w.beta * vj * vj);
  }
  return std::exp(-w.alpha * x * x - w.beta * v * v) * one * one;
}

/// sup over (x, v) of Γ(s, x, v)/M(x, v) for the full-line integral: π/(αs² + β).
inline double gamma_weighted_sup(double s, const WeightParams& w) {
  return std::numbers::pi / (w.alpha * s * s + w.beta);
}

/// ∫_a^b sup Γ/M ds in closed form (a <= b, either may be infinite).
inline double gamma_weighted_integral(double a, double b, const WeightParams& w) {
  const double k = std::sqrt(w.alpha / w.beta);
  return std::numbers::pi / std::sqrt(w.alpha * w.beta) * (std::atan(k * b) - std::atan(k * a));
}

struct Estimate {
  double numeric = 0;
  double bound = 0;
  bool holds(double rel_tol = 0.0) const { return numeric <= bound * (1.0 + rel_tol); }
};

/// ∫_R e^{-α(x0 + s u0)²} ds by adaptive quadrature against √π α^{-1/2}/|u0|.
inline Estimate verify_time_lemma(double x0, double u0, double alpha) {
  if (u0 == 0.0) throw Error(ErrorKind::Numeric, "degenerate direction");
  if (!(alpha > 0.0)) throw Error(ErrorKind::Usage, "alpha must be positive");
  const double centre = -x0 / u0;
  auto f = [&](double s) {
    const double y = x0 + s * u0;
    return std::exp(-alpha * y * y);
  };
  // Split at the peak and map each half-line onto [0, ∞).
  boost::math::quadrature::exp_sinh<double> half_line;
  const double right = half_line.integrate([&](double r) { return f(centre + r); }, 1e-13);
  const double left = half_line.integrate([&](double r) { return f(centre - r); }, 1e-13);
  return {left + right, std::sqrt(std::numbers::pi / alpha) / std::abs(u0)};
}

/// Left side of the convolution estimate in d = 1 by polar quadrature about
/// (v, v), so the q < 0 singularity sits at r = 0 where the Jacobian cancels it.
inline Estimate verify_conv_estimate(double v, double beta, double q) {
  if (!(q > -2.0)) throw Error(ErrorKind::Usage, "q must exceed -2d");
  using boost::math::quadrature::gauss_kronrod;
  auto radial = [&](double phi) {
    const double c = std::cos(phi), s = std::sin(phi);
    const double dir = std::pow(std::abs(c) + std::abs(s), q);
    auto integrand = [&](double r) {
      const double a = v + r * c, b = v + r * s;
      return std::pow(r, q + 1.0) * std::exp(-beta * (a * a + b * b));
    };
    boost::math::quadrature::exp_sinh<double> half_line;
    return dir * half_line.integrate(integrand, 1e-12);
  };
  double total = 0.0;
  // |cos| + |sin| has kinks on the axes; integrate quadrant by quadrant.
  for (int k = 0; k < 4; ++k) {
    const double a = k * std::numbers::pi / 2.0;
    total += gauss_kronrod<double, 31>::integrate(radial, a, a + std::numbers::pi / 2.0, 8, 1e-11);
  }
  const double qplus = std::max(q, 0.0);
  return {total, conv_constant(1, beta, q) * (1.0 + std::pow(std::abs(v), qplus))};
}

}  // namespace sixwave
