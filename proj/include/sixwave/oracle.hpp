#pragma once

// Brute-force checks that do not go through the angular representation:
// the resonant integral by the co-area formula, the conservation identity
// along characteristics, and Rayleigh-Jeans equilibria.

#include <algorithm>
#include <cmath>
#include <numbers>

#include "sixwave/collision.hpp"
#include "sixwave/core.hpp"
#include "sixwave/error.hpp"

namespace sixwave {

/// ∫ δ(Σ)δ(Ω) dv3 dv4 dv5 in d = 1. With v5 = S - v3 - v4 the energy
/// constraint reads Q(v3, v4) = E, an ellipse around (S/3, S/3) with
/// Q - S²/3 = yᵀ[[2,1],[1,2]]y; the integral is ∮ ds/|∇Q| over it,
/// by the midpoint rule in the ellipse angle.
inline double i_coarea(double v, double v1, double v2, int n_level) {
  if (n_level < 1) throw Error(ErrorKind::Usage, "n_level must be positive");
  const double S = v + v1 + v2;
  // Deviation from the mean keeps D accurate when the velocities are close.
  const double m = S / 3.0;
  const double D = (v - m) * (v - m) + (v1 - m) * (v1 - m) + (v2 - m) * (v2 - m);
  if (!(D > 0.0)) return 0.0;
  // Eigenvectors (1,1)/√2 with eigenvalue 3 and (1,-1)/√2 with eigenvalue 1.
  const double r1 = std::sqrt(D / 3.0), r2 = std::sqrt(D);
  const double e = 1.0 / std::sqrt(2.0);
  const double h = 2.0 * std::numbers::pi / n_level;
  double sum = 0.0;
  for (int k = 0; k < n_level; ++k) {
    const double phi = (k + 0.5) * h;
    const double c = std::cos(phi), s = std::sin(phi);
    const double y3 = e * (r1 * c + r2 * s);
    const double y4 = e * (r1 * c - r2 * s);
    const double d3 = e * (-r1 * s + r2 * c);
    const double d4 = e * (-r1 * s - r2 * c);
    const double grad3 = 2.0 * (2.0 * y3 + y4);
    const double grad4 = 2.0 * (y3 + 2.0 * y4);
    sum += std::hypot(d3, d4) / std::hypot(grad3, grad4);
  }
  return sum * h;
}

/// Absolute-value majorant of the angular representation,
/// (1/2) ∮ |ω·u|^{2d-2} / (1 + ω1·ω2)^{2d-1} dω, d = 1 or 2.
inline double rep_majorant(double v, double v1, double v2, int n_theta, int d = 1) {
  if (n_theta < 4) throw Error(ErrorKind::Usage, "insufficient quadrature");
  const double u1 = v1 - v, u2 = v2 - v;
  constexpr double two_pi = 2.0 * std::numbers::pi;
  if (d == 1) {
    const double h = two_pi / n_theta;
    double sum = 0.0;
    for (int k = 0; k < n_theta; ++k) {
      const double th = (k + 0.5) * h;
      sum += 0.5 / (1.0 + std::cos(th) * std::sin(th));
    }
    return sum * h;
  }
  if (d == 2) {
    const int n_eta = std::max(2, n_theta / 4);
    const double h_eta = 0.5 * std::numbers::pi / n_eta;
    const double h_xi = two_pi / n_theta;
    double sum = 0.0;
    for (int e = 0; e < n_eta; ++e) {
      const double eta = (e + 0.5) * h_eta;
      const double ce = std::cos(eta), se = std::sin(eta);
      for (int a = 0; a < n_theta; ++a)
        for (int b = 0; b < n_theta; ++b) {
          const double xa = (a + 0.5) * h_xi, xb = (b + 0.5) * h_xi;
          const double w1x = ce * std::cos(xa), w1y = ce * std::sin(xa);
          const double w2x = se * std::cos(xb), w2y = se * std::sin(xb);
          const double dot = w1x * u1 + w2x * u2;
          const double den = 1.0 + w1x * w2x + w1y * w2y;
          sum += se * ce * dot * dot / (2.0 * den * den * den);
        }
    }
    return sum * h_eta * h_xi * h_xi;
  }
  throw Error(ErrorKind::Usage, "rep_majorant supports d = 1 and d = 2 only");
}

/// |Σ_{3,4,5} |x + s(v - v_i)|² - (|x|² + Σ_{1,2} |x + s(v - v_i)|²)|.
inline double resonance_identity_check(double x, double v, double s, const ResonantTuple& t) {
  auto sq = [&](double w) {
    const double y = x + s * (v - w);
    return y * y;
  };
  const double out = sq(t.v3) + sq(t.v4) + sq(t.v5);
  const double in = x * x + sq(t.v1) + sq(t.v2);
  return std::abs(out - in);
}

struct RjCheck {
  double residual = 0;
  /// Largest gain seen at the sample points; the cancellation is relative to it.
  double mass_scale = 0;
};

/// C[f] for f = 1/(a + b v²) on a 5 x 5 subset of the nodes of q.grid.
inline RjCheck rj_check(double a, double b, const WeightParams& w, const QuadratureSpec& q) {
  (void)w;
  if (!(a > 0.0) || !(b >= 0.0)) throw Error(ErrorKind::Usage, "Rayleigh-Jeans profile needs a > 0, b >= 0");
  q.validate();
  const Field f = Field::analytic([a, b](double, double v) { return 1.0 / (a + b * v * v); });
  const PhaseGrid& g = q.grid;
  RjCheck out;
  for (int pi = 0; pi < 5; ++pi)
    for (int pj = 0; pj < 5; ++pj) {
      const int i = pi * (g.nx - 1) / 4;
      const int j = pj * (g.nv - 1) / 4;
      const auto t = collision_terms(f, f, f, f, f, f, g.x(i), g.v(j), q);
      out.residual = std::max(out.residual, std::abs(collide(f, g.x(i), g.v(j), q)));
      out.mass_scale = std::max({out.mass_scale, t.gain(), t.loss()});
    }
  return out;
}

inline double rj_residual(double a, double b, const WeightParams& w, const QuadratureSpec& q) {
  return rj_check(a, b, w, q).residual;
}

}  // namespace sixwave
