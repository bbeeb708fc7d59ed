#pragma once

// Six-wave collision operator in one velocity dimension. The resonant
// manifold {Σ = 0, Ω = 0} is collapsed onto (v1, v2, θ): for ω = (cos θ, sin θ)
// the delta root is A = (ω1(v1-v) + ω2(v2-v)) / (1 + ω1ω2) and the measure
// carries the weight 1_{A>0} / (2(1 + ω1ω2)).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numbers>
#include <vector>

#include "sixwave/core.hpp"
#include "sixwave/error.hpp"

namespace sixwave {

/// Velocity nodes for (v1, v2) and the angular resolution.
struct QuadratureSpec {
  PhaseGrid grid{};
  int n_theta = 64;

  void validate() const {
    grid.validate();
    if (n_theta < 4) throw Error(ErrorKind::Usage, "insufficient quadrature");
  }
};

struct ResonantTuple {
  double v = 0, v1 = 0, v2 = 0;
  double theta = 0;
  double A = 0;
  double v3 = 0, v4 = 0, v5 = 0;

  double sigma() const { return v + v1 + v2 - v3 - v4 - v5; }
  double omega() const { return v * v + v1 * v1 + v2 * v2 - v3 * v3 - v4 * v4 - v5 * v5; }
};

inline ResonantTuple parametrize(double v, double v1, double v2, double theta) {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  ResonantTuple t;
  t.v = v;
  t.v1 = v1;
  t.v2 = v2;
  t.theta = theta;
  t.A = (c * (v1 - v) + s * (v2 - v)) / (1.0 + c * s);
  t.v3 = v1 - t.A * c;
  t.v4 = v2 - t.A * s;
  t.v5 = v + t.A * (c + s);
  return t;
}

namespace detail {

inline double gate(double a) { return a > 0.0 ? 1.0 : (a == 0.0 ? 0.5 : 0.0); }

}  // namespace detail

/// Angular kernel ∫ (ω·u)^{2d-2} / (1+ω1·ω2)^{2d-1} (sign(ω·u)+1)/4 dω with
/// u = (v1-v, v2-v), by midpoint quadrature. For d = 2 the sphere S^3 is
/// covered by ω1 = cos η (cos ξ1, sin ξ1), ω2 = sin η (cos ξ2, sin ξ2).
inline double kernel_I(double v, double v1, double v2, int n_theta, int d = 1) {
  if (n_theta < 4) throw Error(ErrorKind::Usage, "insufficient quadrature");
  const double u1 = v1 - v;
  const double u2 = v2 - v;
  constexpr double two_pi = 2.0 * std::numbers::pi;
  if (d == 1) {
    const double h = two_pi / n_theta;
    double sum = 0.0;
    for (int k = 0; k < n_theta; ++k) {
      const double th = (k + 0.5) * h;
      const double c = std::cos(th);
      const double s = std::sin(th);
      const double dot = c * u1 + s * u2;
      sum += (dot > 0 ? 2.0 : dot == 0 ? 1.0 : 0.0) / (4.0 * (1.0 + c * s));
    }
    return sum * h;
  }
  if (d == 2) {
    const int n_eta = std::max(2, n_theta / 4);
    const double h_eta = 0.5 * std::numbers::pi / n_eta;
    const double h_xi = two_pi / n_theta;
    std::vector<double> cx(n_theta), sx(n_theta);
    for (int k = 0; k < n_theta; ++k) {
      cx[k] = std::cos((k + 0.5) * h_xi);
      sx[k] = std::sin((k + 0.5) * h_xi);
    }
    double sum = 0.0;
    for (int e = 0; e < n_eta; ++e) {
      const double eta = (e + 0.5) * h_eta;
      const double ce = std::cos(eta);
      const double se = std::sin(eta);
      const double jac = se * ce;
      for (int a = 0; a < n_theta; ++a)
        for (int b = 0; b < n_theta; ++b) {
          // ω1 = ce (cx[a], sx[a]), ω2 = se (cx[b], sx[b]); the scalar
          // velocities sit on the first axis, u = ((u1, 0), (u2, 0)).
          const double w1x = ce * cx[a], w1y = ce * sx[a];
          const double w2x = se * cx[b], w2y = se * sx[b];
          const double dot = w1x * u1 + w2x * u2;
          const double den = 1.0 + w1x * w2x + w1y * w2y;
          sum += jac * dot * dot * detail::gate(dot) / (2.0 * den * den * den);
        }
    }
    return sum * h_eta * h_xi * h_xi;
  }
  throw Error(ErrorKind::Usage, "kernel_I supports d = 1 and d = 2 only");
}

/// A slot function restricted to one spatial point: either piecewise-linear
/// samples on a uniform velocity grid (zero outside), or an exact rule.
class Profile {
 public:
  Profile() = default;

  Profile(double v0, double h, std::vector<double> values)
      : v0_(v0), h_(h), inv_h_(1.0 / h), n_(static_cast<int>(values.size())), values_(std::move(values)) {
    values_.push_back(0.0);  // lets t = n-1 read index n safely
    int lo = 0;
    while (lo < n_ && values_[lo] == 0.0) ++lo;
    int hi = n_ - 1;
    while (hi >= lo && values_[hi] == 0.0) --hi;
    if (lo > hi) {
      empty_ = true;
    } else {
      // Linear interpolation is nonzero strictly inside the neighbouring cells.
      lo_ = v0_ + std::max(lo - 1, 0) * h_;
      hi_ = v0_ + std::min(hi + 1, n_ - 1) * h_;
    }
  }

  static Profile rule(std::function<double(double)> fn) {
    Profile p;
    p.rule_ = std::move(fn);
    p.lo_ = -std::numeric_limits<double>::infinity();
    p.hi_ = std::numeric_limits<double>::infinity();
    return p;
  }

  /// Profile of a field along v at fixed x. Grid fields keep their own nodes,
  /// which reproduces bilinear interpolation exactly.
  static Profile of(const Field& f, double x) {
    if (!f.is_grid()) return rule([f, x](double v) { return f(x, v); });
    const PhaseGrid& g = f.grid();
    std::vector<double> values(g.nv);
    for (int j = 0; j < g.nv; ++j) values[j] = f(x, g.v(j));
    return Profile(-g.Lv, g.hv(), std::move(values));
  }

  double operator()(double v) const {
    if (rule_) return rule_(v);
    const double t = (v - v0_) * inv_h_;
    if (!(t >= 0.0 && t <= n_ - 1)) return 0.0;
    const int i = static_cast<int>(t);
    const double fr = t - i;
    return values_[i] + fr * (values_[i + 1] - values_[i]);
  }

  bool empty() const { return empty_; }
  bool sampled() const { return !rule_; }
  const double* data() const { return values_.data(); }
  double origin() const { return v0_; }
  double inv_step() const { return inv_h_; }
  int size() const { return n_; }
  double support_lo() const { return lo_; }
  double support_hi() const { return hi_; }

 private:
  double v0_ = 0, h_ = 1, inv_h_ = 1;
  int n_ = 0;
  std::vector<double> values_;
  std::function<double(double)> rule_;
  bool empty_ = false;
  double lo_ = 0, hi_ = 0;
};

struct CollisionTerms {
  double g1 = 0, g2 = 0, l1 = 0, l2 = 0;
  double gain() const { return g1 + g2; }
  double loss() const { return l1 + l2; }
  double value() const { return gain() - loss(); }
};

namespace detail {
/// Angular node table shared by every evaluation with one n_theta. Along a
/// line of fixed (v, v1) the slots move affinely in v2 with slopes q3, q4, q5.
struct AngleTable {
  std::vector<double> c, s, ac, as, w, q3, q4, q5, inv_as, inv_q3, inv_q4, inv_q5;

  explicit AngleTable(int n)
      : c(n), s(n), ac(n), as(n), w(n), q3(n), q4(n), q5(n), inv_as(n), inv_q3(n), inv_q4(n), inv_q5(n) {
    const double h = 2.0 * std::numbers::pi / n;
    auto inv = [](double q) { return q == 0.0 ? 0.0 : 1.0 / q; };
    for (int k = 0; k < n; ++k) {
      c[k] = std::cos((k + 0.5) * h);
      s[k] = std::sin((k + 0.5) * h);
      const double den = 1.0 + c[k] * s[k];
      ac[k] = c[k] / den;
      as[k] = s[k] / den;
      w[k] = h / (2.0 * den);
      q3[k] = -c[k] * as[k];
      q4[k] = 1.0 - s[k] * as[k];
      q5[k] = (c[k] + s[k]) * as[k];
      inv_as[k] = inv(as[k]);
      inv_q3[k] = inv(q3[k]);
      inv_q4[k] = inv(q4[k]);
      inv_q5[k] = inv(q5[k]);
    }
  }
};

/// Sums over the manifold with the leading f(v) factored out:
///   sg1 = Σ k3 l4 m5 (g1 + h2),  sg2 = Σ g1 h2 k3 l4 m5,
///   sr1 = Σ g1 h2 k3 (l4 + m5),  sr2 = Σ g1 h2 l4 m5.
struct ManifoldSums {
  double sg1 = 0, sg2 = 0, sr1 = 0, sr2 = 0;
};

/// Restricts p + q·t ∈ [lo, hi] to an interval of t, intersected into
/// [tlo, thi]. `inv_q` is 1/q, or 0 when q = 0.
inline void clip_linear(double p, double q, double inv_q, double lo, double hi, double& tlo,
                        double& thi) {
  if (q == 0.0) {
    if (p < lo || p > hi) thi = tlo - 1.0;
    return;
  }
  double a = (lo - p) * inv_q;
  double b = (hi - p) * inv_q;
  if (q < 0.0) std::swap(a, b);
  tlo = std::max(tlo, a);
  thi = std::min(thi, b);
}

struct SampledSlots {
  const Profile& k;
  const Profile& l;
  const Profile& m;
  double klo, khi, llo, lhi, mlo, mhi, inflate;
};

/// Hot path for sampled k, l, m. Slot positions are affine in the v2 node
/// index, so each lookup is one multiply-add and a linear interpolation.
/// Angular sums are binned per v2 node and combined with g1, h2 afterwards,
/// which keeps the innermost loop free of long dependency chains.
template <bool Sym, bool Gain, bool Loss>
ManifoldSums sampled_sums(double v, const std::vector<double>& gv, const std::vector<double>& hraw,
                          const std::vector<double>& hw, const SampledSlots& sl, const PhaseGrid& grid,
                          const AngleTable& angles, bool gain_with_f) {
  ManifoldSums out;
  const int nv = grid.nv;
  const double hv = grid.hv();
  const double inv_hv = 1.0 / hv;
  const double v0 = -grid.Lv;
  const int nth = static_cast<int>(angles.c.size());
  const double* ka = sl.k.data();
  const double* la = sl.l.data();
  const double* ma = sl.m.data();
  const double kn = sl.k.size() - 1, ln = sl.l.size() - 1, mn = sl.m.size() - 1;
  const double kin = sl.k.inv_step(), lin = sl.l.inv_step(), min = sl.m.inv_step();
  const double inflate = sl.inflate;
  auto lerp = [](const double* a, double t, double tmax) {
    if (!(t >= 0.0 && t <= tmax)) return 0.0;
    const int i = static_cast<int>(t);
    const double fr = t - i;
    return a[i] + fr * (a[i + 1] - a[i]);
  };
  auto lerp_in = [](const double* a, double t) {
    const int i = static_cast<int>(t);
    const double fr = t - i;
    return a[i] + fr * (a[i + 1] - a[i]);
  };
  // bin_p: Σ w k l m;  bin_a, bin_b: the loss pieces (see below).
  thread_local std::vector<double> bin_p, bin_a, bin_b;
  bin_p.assign(nv, 0.0);
  bin_a.assign(nv, 0.0);
  bin_b.assign(nv, 0.0);
  double* bp = bin_p.data();
  double* ba = bin_a.data();
  double* bb = bin_b.data();

  for (int j1 = 0; j1 < nv; ++j1) {
    const double g1 = gv[j1];
    if (g1 == 0.0 && !gain_with_f) continue;
    const double v1 = v0 + j1 * hv;
    int used_lo = nv, used_hi = -1;
    for (int t = 0; t < nth; ++t) {
      const double c = angles.c[t], s = angles.s[t], ac = angles.ac[t], as = angles.as[t];
      const double q3 = angles.q3[t], q4 = angles.q4[t], q5 = angles.q5[t];
      const double a0 = ac * (v1 - v) - as * v;
      const double p3 = v1 - c * a0;
      const double p4 = -s * a0;
      const double p5 = v + (c + s) * a0;
      double tlo = v0 - inflate, thi = v0 + (nv - 1) * hv + inflate;
      if (Sym) tlo = std::max(tlo, v1 - inflate);
      if (as > 0) tlo = std::max(tlo, -a0 * angles.inv_as[t] - inflate);
      else thi = std::min(thi, -a0 * angles.inv_as[t] + inflate);
      clip_linear(p3, q3, angles.inv_q3[t], sl.klo, sl.khi, tlo, thi);
      clip_linear(p4, q4, angles.inv_q4[t], sl.llo, sl.lhi, tlo, thi);
      clip_linear(p5, q5, angles.inv_q5[t], sl.mlo, sl.mhi, tlo, thi);
      if (!(tlo <= thi)) continue;
      int jlo = std::max(0, static_cast<int>(std::ceil((tlo - v0) * inv_hv)));
      int jhi = std::min(nv - 1, static_cast<int>(std::floor((thi - v0) * inv_hv)));
      // A is monotone in v2: settle the sign gate exactly at the ends.
      auto A = [&](int j) { return a0 + as * (v0 + j * hv); };
      if (as > 0) {
        while (jlo <= jhi && A(jlo) < 0.0) ++jlo;
      } else {
        while (jhi >= jlo && A(jhi) < 0.0) --jhi;
      }
      const double t3 = (p3 + q3 * v0 - sl.k.origin()) * kin, d3 = q3 * hv * kin;
      const double t4 = (p4 + q4 * v0 - sl.l.origin()) * lin, d4 = q4 * hv * lin;
      const double t5 = (p5 + q5 * v0 - sl.m.origin()) * min, d5 = q5 * hv * min;
      // Same for the sample domains, so the interior needs no range checks.
      auto inside = [&](int j) {
        const double a = t3 + d3 * j, b = t4 + d4 * j, e = t5 + d5 * j;
        return a >= 0.0 && a <= kn && b >= 0.0 && b <= ln && e >= 0.0 && e <= mn;
      };
      while (jlo <= jhi && !inside(jlo)) ++jlo;
      while (jhi >= jlo && !inside(jhi)) --jhi;
      if (jlo > jhi) continue;
      const double wt = angles.w[t];
      // A = 0 can only occur at an end of the range; it gets half weight.
      const int jzero = A(jlo) == 0.0 ? jlo : (A(jhi) == 0.0 ? jhi : -1);
      used_lo = std::min(used_lo, jlo);
      used_hi = std::max(used_hi, jhi);
      for (int j2 = jlo; j2 <= jhi; ++j2) {
        const double k3 = lerp_in(ka, t3 + d3 * j2);
        const double l4 = lerp_in(la, t4 + d4 * j2);
        const double m5 = lerp_in(ma, t5 + d5 * j2);
        if (Gain) bp[j2] += wt * k3 * l4 * m5;
        if (Loss) {
          if (Sym) {
            ba[j2] += wt * k3 * l4;
            bb[j2] += wt * m5 * (k3 + l4);
          } else {
            ba[j2] += wt * k3 * (l4 + m5);
            bb[j2] += wt * l4 * m5;
          }
        }
      }
      if (jzero >= 0) {
        const double k3 = lerp(ka, t3 + d3 * jzero, kn);
        const double l4 = lerp(la, t4 + d4 * jzero, ln);
        const double m5 = lerp(ma, t5 + d5 * jzero, mn);
        const double hw0 = -0.5 * wt;
        if (Gain) bp[jzero] += hw0 * k3 * l4 * m5;
        if (Loss) {
          if (Sym) {
            ba[jzero] += hw0 * k3 * l4;
            bb[jzero] += hw0 * m5 * (k3 + l4);
          } else {
            ba[jzero] += hw0 * k3 * (l4 + m5);
            bb[jzero] += hw0 * l4 * m5;
          }
        }
      }
    }
    double sg1 = 0, sg2 = 0, sr1 = 0, sr2 = 0;
    for (int j2 = used_lo; j2 <= used_hi; ++j2) {
      // Off-diagonal pairs stand for themselves and their mirror image.
      const double wj = hw[j2] * (Sym && j2 != j1 ? 2.0 : 1.0);
      const double h2 = hraw[j2];
      const double gh = g1 * h2;
      if (Gain) {
        sg1 += wj * bp[j2] * (g1 + h2);
        sg2 += wj * bp[j2] * gh;
        bp[j2] = 0.0;
      }
      if (Loss) {
        if (Sym) {
          // Mirror average of k3(l4 + m5) and l4 m5 under k3 <-> l4.
          sr1 += wj * gh * (ba[j2] + 0.5 * bb[j2]);
          sr2 += wj * gh * 0.5 * bb[j2];
        } else {
          sr1 += wj * gh * ba[j2];
          sr2 += wj * gh * bb[j2];
        }
        ba[j2] = 0.0;
        bb[j2] = 0.0;
      }
    }
    out.sg1 += hw[j1] * sg1;
    out.sg2 += hw[j1] * sg2;
    out.sr1 += hw[j1] * sr1;
    out.sr2 += hw[j1] * sr2;
  }
  return out;
}

/// Core quadrature. v1, v2 run over the velocity nodes of `grid` with
/// trapezoid weights, θ over the midpoint nodes of `angles`. `fv` only
/// decides which (v1, v2) pairs can contribute. With `symmetric` the caller
/// promises g = h and k = l, and the θ table must be closed under
/// θ -> π/2 - θ; then only v2 >= v1 is visited.
inline ManifoldSums manifold_sums(double v, double fv, const Profile& g, const Profile& h,
                                  const Profile& k, const Profile& l, const Profile& m,
                                  const PhaseGrid& grid, const AngleTable& angles, bool need_gain,
                                  bool need_loss, bool symmetric) {
  ManifoldSums out;
  if (k.empty() && l.empty()) return out;
  const int nv = grid.nv;
  const double hv = grid.hv();
  const double v0 = -grid.Lv;
  const int nth = static_cast<int>(angles.c.size());

  // Node values of g and h with the trapezoid weight folded into h.
  thread_local std::vector<double> gv, hw, hraw;
  gv.resize(nv);
  hw.resize(nv);
  hraw.resize(nv);
  for (int j = 0; j < nv; ++j) {
    const double vj = v0 + j * hv;
    gv[j] = g(vj);
    hraw[j] = h(vj);
    hw[j] = (j == 0 || j == nv - 1) ? 0.5 * hv : hv;
  }

  const bool gain_with_f = need_gain && fv != 0.0;
  const double inflate = 1e-9 * (1.0 + grid.Lv);
  const double klo = k.support_lo() - inflate, khi = k.support_hi() + inflate;
  const double llo = l.support_lo() - inflate, lhi = l.support_hi() + inflate;
  const double mlo = m.support_lo() - inflate, mhi = m.support_hi() + inflate;

  if (g.sampled() && h.sampled() && k.sampled() && l.sampled() && m.sampled()) {
    SampledSlots slots{k, l, m, klo, khi, llo, lhi, mlo, mhi, inflate};
    if (symmetric) {
      if (need_gain && need_loss) return sampled_sums<true, true, true>(v, gv, hraw, hw, slots, grid, angles, gain_with_f);
      if (need_gain) return sampled_sums<true, true, false>(v, gv, hraw, hw, slots, grid, angles, gain_with_f);
      return sampled_sums<true, false, true>(v, gv, hraw, hw, slots, grid, angles, gain_with_f);
    }
    if (need_gain && need_loss) return sampled_sums<false, true, true>(v, gv, hraw, hw, slots, grid, angles, gain_with_f);
    if (need_gain) return sampled_sums<false, true, false>(v, gv, hraw, hw, slots, grid, angles, gain_with_f);
    return sampled_sums<false, false, true>(v, gv, hraw, hw, slots, grid, angles, gain_with_f);
  }

  for (int j1 = 0; j1 < nv; ++j1) {
    const double g1 = gv[j1];
    // Every term carries g1 except the f·h2·k3·l4·m5 piece of the gain.
    if (g1 == 0.0 && !gain_with_f) continue;
    const double v1 = v0 + j1 * hv;
    const double w1 = hw[j1];
    double sg1 = 0, sg2 = 0, sr1 = 0, sr2 = 0;
    for (int t = 0; t < nth; ++t) {
      const double c = angles.c[t], s = angles.s[t], ac = angles.ac[t], as = angles.as[t];
      const double q3 = angles.q3[t], q4 = angles.q4[t], q5 = angles.q5[t];
      // Everything is affine in v2: A = a0 + as v2, v3 = p3 + q3 v2, ...
      const double a0 = ac * (v1 - v) - as * v;
      const double p3 = v1 - c * a0;
      const double p4 = -s * a0;
      const double p5 = v + (c + s) * a0;
      double tlo = v0 - inflate, thi = v0 + (nv - 1) * hv + inflate;
      if (symmetric) tlo = std::max(tlo, v1 - inflate);
      // A >= 0
      if (as > 0) tlo = std::max(tlo, -a0 * angles.inv_as[t] - inflate);
      else thi = std::min(thi, -a0 * angles.inv_as[t] + inflate);
      clip_linear(p3, q3, angles.inv_q3[t], klo, khi, tlo, thi);
      clip_linear(p4, q4, angles.inv_q4[t], llo, lhi, tlo, thi);
      clip_linear(p5, q5, angles.inv_q5[t], mlo, mhi, tlo, thi);
      if (!(tlo <= thi)) continue;
      const int jlo = std::max(0, static_cast<int>(std::ceil((tlo - v0) / hv)));
      const int jhi = std::min(nv - 1, static_cast<int>(std::floor((thi - v0) / hv)));
      const double wt = angles.w[t];
      for (int j2 = jlo; j2 <= jhi; ++j2) {
        const double v2 = v0 + j2 * hv;
        const double A = a0 + as * v2;
        if (A < 0.0) continue;
        const double h2 = hraw[j2];
        const double gh = g1 * h2;
        if (gh == 0.0 && !gain_with_f) continue;
        double wgt = wt * hw[j2] * (A == 0.0 ? 0.5 : 1.0);
        if (symmetric && j2 != j1) wgt *= 2.0;
        const double k3 = k(p3 + q3 * v2);
        const double l4 = l(p4 + q4 * v2);
        const double m5 = m(p5 + q5 * v2);
        if (need_gain) {
          const double klm = wgt * k3 * l4 * m5;
          sg1 += klm * (g1 + h2);
          sg2 += klm * gh;
        }
        if (need_loss && gh != 0.0) {
          const double wgh = wgt * gh;
          if (symmetric) {
            // Average with the mirrored point (v1 <-> v2, k3 <-> l4).
            sr1 += wgh * (k3 * l4 + 0.5 * m5 * (k3 + l4));
            sr2 += wgh * 0.5 * m5 * (k3 + l4);
          } else {
            sr1 += wgh * k3 * (l4 + m5);
            sr2 += wgh * l4 * m5;
          }
        }
      }
    }
    out.sg1 += w1 * sg1;
    out.sg2 += w1 * sg2;
    out.sr1 += w1 * sr1;
    out.sr2 += w1 * sr2;
  }
  return out;
}

inline const AngleTable& angle_table(int n_theta) {
  thread_local int cached_n = -1;
  thread_local std::vector<AngleTable> cache;
  if (cached_n != n_theta) {
    cache.assign(1, AngleTable(n_theta));
    cached_n = n_theta;
  }
  return cache.front();
}

inline CollisionTerms assemble(double fv, const ManifoldSums& s) {
  return CollisionTerms{fv * s.sg1, s.sg2, fv * s.sr1, fv * s.sr2};
}

}  // namespace detail

/// G1, G2, L1, L2 at (x, v) for the six slot fields, all read at the same x.
inline CollisionTerms collision_terms(const Field& f, const Field& g, const Field& h, const Field& k,
                                      const Field& l, const Field& m, double x, double v,
                                      const QuadratureSpec& q) {
  q.validate();
  const double fv = f(x, v);
  const auto sums = detail::manifold_sums(v, fv, Profile::of(g, x), Profile::of(h, x), Profile::of(k, x),
                                          Profile::of(l, x), Profile::of(m, x), q.grid,
                                          detail::angle_table(q.n_theta), true, true, false);
  return detail::assemble(fv, sums);
}

/// C[f](x, v) = gain - loss with every slot equal to f.
inline double collide(const Field& f, double x, double v, const QuadratureSpec& q) {
  q.validate();
  const double fv = f(x, v);
  const Profile p = Profile::of(f, x);
  const bool sym = q.n_theta % 4 == 0;
  return detail::assemble(fv, detail::manifold_sums(v, fv, p, p, p, p, p, q.grid,
                                                    detail::angle_table(q.n_theta), true, true, sym))
      .value();
}

/// R[g, h, k, l, m](x, v): the loss integral with the leading f removed.
inline double loss_rate_R(const Field& g, const Field& h, const Field& k, const Field& l, const Field& m,
                          double x, double v, const QuadratureSpec& q) {
  q.validate();
  const auto sums = detail::manifold_sums(v, 1.0, Profile::of(g, x), Profile::of(h, x), Profile::of(k, x),
                                          Profile::of(l, x), Profile::of(m, x), q.grid,
                                          detail::angle_table(q.n_theta), false, true, false);
  return sums.sr1 + sums.sr2;
}

struct Moments {
  double mass = 0, momentum = 0, energy = 0;
};

/// Trapezoid sums of C[f](x, v)·{1, v, v²} over the velocity nodes of q.
inline Moments moments(const Field& f, double x, const QuadratureSpec& q) {
  q.validate();
  Moments mo;
  const PhaseGrid& g = q.grid;
  for (int j = 0; j < g.nv; ++j) {
    const double v = g.v(j);
    const double w = (j == 0 || j == g.nv - 1) ? 0.5 * g.hv() : g.hv();
    const double c = collide(f, x, v, q);
    mo.mass += w * c;
    mo.momentum += w * c * v;
    mo.energy += w * c * v * v;
  }
  return mo;
}

/// Which grid outputs transported_terms should fill.
struct TermRequest {
  bool gain = true;
  bool loss = true;
  bool rate = false;
};

struct GridTerms {
  std::vector<double> gain, loss, rate;
};

/// Collision terms of T^s g read back along characteristics: at each node
/// (x_i, v_j) of q.grid, the slot profile is v' -> g(x_i + s(v_j - v'), v'),
/// so the output is (T^{-s} C[T^s g])(x_i, v_j). Grid-backed g is sampled at
/// velocity points fine enough that the spatial argument advances by at most
/// one x-cell between samples, and interpolated linearly between them.
inline GridTerms transported_terms(const Field& g, double s, const QuadratureSpec& q,
                                   TermRequest req = {}) {
  q.validate();
  const PhaseGrid& grid = q.grid;
  const std::size_t n = grid.size();
  GridTerms out;
  if (req.gain) out.gain.assign(n, 0.0);
  if (req.loss) out.loss.assign(n, 0.0);
  if (req.rate) out.rate.assign(n, 0.0);
  const bool need_gain = req.gain;
  const bool need_loss = req.loss || req.rate;
  const bool sym = q.n_theta % 4 == 0;
  const bool sampled = g.is_grid();

#if defined(_OPENMP)
#pragma omp parallel for schedule(dynamic, 1)
#endif
  for (long long idx = 0; idx < static_cast<long long>(n); ++idx) {
    const int i = static_cast<int>(idx / grid.nv);
    const int j = static_cast<int>(idx % grid.nv);
    const double x = grid.x(i);
    const double v = grid.v(j);
    const double fv = g(x, v);
    Profile p;
    if (sampled) {
      // Along the profile the spatial argument moves by s per unit velocity;
      // refine the velocity sampling so it never skips more than one x-cell.
      const int refine = std::max(1, static_cast<int>(std::ceil(std::abs(s) * grid.hv() / grid.hx() - 1e-12)));
      const double hp = grid.hv() / refine;
      const int np = (grid.nv - 1) * refine + 1;
      std::vector<double> col(np);
      for (int k = 0; k < np; ++k) {
        const double vk = -grid.Lv + k * hp;
        col[k] = g(x + s * (v - vk), vk);
      }
      p = Profile(-grid.Lv, hp, std::move(col));
    } else {
      p = Profile::rule([g, x, v, s](double w) { return g(x + s * (v - w), w); });
    }
    const auto sums = detail::manifold_sums(v, req.rate ? 1.0 : fv, p, p, p, p, p, grid,
                                            detail::angle_table(q.n_theta), need_gain, need_loss, sym);
    const auto t = detail::assemble(fv, sums);
    if (req.gain) out.gain[idx] = t.gain();
    if (req.loss) out.loss[idx] = t.loss();
    if (req.rate) out.rate[idx] = sums.sr1 + sums.sr2;
  }
  return out;
}

/// Grid field of C[f] on the nodes of q.grid.
inline Field collide_field(const Field& f, const QuadratureSpec& q) {
  auto t = transported_terms(f, 0.0, q);
  for (std::size_t n = 0; n < t.gain.size(); ++n) t.gain[n] -= t.loss[n];
  return Field::on_grid(q.grid, std::move(t.gain));
}

}  // namespace sixwave
