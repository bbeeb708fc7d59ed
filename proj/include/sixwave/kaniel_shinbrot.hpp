#pragma once

// Associated linear problem ∂t f + v ∂x f = h - f R[g] and the monotone
// upper/lower iteration built on it.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "sixwave/bounds.hpp"
#include "sixwave/collision.hpp"
#include "sixwave/core.hpp"
#include "sixwave/duhamel.hpp"
#include "sixwave/error.hpp"

namespace sixwave {

namespace detail {

inline void require_nonnegative(const Field& f) {
  for (double v : f.values())
    if (v < 0.0) throw Error(ErrorKind::Usage, "ALP requires nonnegative data");
}

/// Integrating-factor solution on the grid. rate[k], source[k] are the
/// transported R and h at node k; with K(t) = ∫_0^t rate,
///   F(t) = f0 e^{-K(t)} + ∫_0^t e^{-(K(t) - K(s))} source(s) ds,
/// every integral a trapezoid over the time nodes.
inline std::vector<Field> alp_from_rates(const Field& f0, const std::vector<std::vector<double>>& rate,
                                         const std::vector<std::vector<double>>& source,
                                         const std::vector<double>& times, const PhaseGrid& grid) {
  const std::size_t nt = times.size();
  const std::size_t anchor = node_index(times, 0.0);
  const auto K = cumulative(times, rate, anchor);
  auto f0v = f0.values();
  std::vector<Field> out;
  out.reserve(nt);
  for (std::size_t k = 0; k < nt; ++k) {
    std::vector<double> vals(grid.size());
    const std::size_t lo = std::min(k, anchor), hi = std::max(k, anchor);
    const double sign = k >= anchor ? 1.0 : -1.0;
    for (std::size_t p = 0; p < vals.size(); ++p) {
      double acc = 0.0;
      for (std::size_t m = lo; m <= hi; ++m) {
        double wm = 0.0;
        if (m > lo) wm += 0.5 * (times[m] - times[m - 1]);
        if (m < hi) wm += 0.5 * (times[m + 1] - times[m]);
        acc += wm * std::exp(-(K[k][p] - K[m][p])) * source[m][p];
      }
      vals[p] = f0v[p] * std::exp(-K[k][p]) + sign * acc;
    }
    out.push_back(Field::on_grid(grid, std::move(vals)));
  }
  return out;
}

}  // namespace detail

/// Mild solution of the associated linear problem with loss rate R[g,…,g]
/// and source h, both given as transported trajectories on cfg.time_grid.
inline Trajectory alp_solve(const Field& f0, const Trajectory& g, const Trajectory& h, const WeightParams& w,
                            const SolverConfig& cfg) {
  (void)w;
  cfg.validate();
  const auto& q = cfg.quadrature;
  const auto& times = cfg.time_grid;
  if (g.times() != times || h.times() != times)
    throw Error(ErrorKind::Usage, "trajectories must live on the solver time grid");
  const Field base = detail::on_quadrature_grid(f0, q);
  detail::require_nonnegative(base);
  std::vector<std::vector<double>> rate(times.size()), source(times.size());
  for (std::size_t k = 0; k < times.size(); ++k) {
    const Field gk = detail::on_quadrature_grid(g[k], q);
    const Field hk = detail::on_quadrature_grid(h[k], q);
    detail::require_nonnegative(gk);
    detail::require_nonnegative(hk);
    rate[k] = transported_terms(gk, times[k], q, {false, false, true}).rate;
    source[k].assign(hk.values().begin(), hk.values().end());
  }
  return Trajectory(times, detail::alp_from_rates(base, rate, source, times, q.grid));
}

struct KsState {
  Trajectory lower = Trajectory({0.0}, {Field::zero()});
  Trajectory upper = Trajectory({0.0}, {Field::zero()});
  int n = 0;
  std::vector<double> gap_history;
  /// Time node where min(u_n - l_n) over the grid is smallest, per iteration.
  std::vector<std::size_t> min_gap_node;
  /// Largest relative breach of l_{n-1} <= l_n <= u_n <= u_{n-1} seen so far.
  double worst_order_breach = 0.0;
};

struct KsResult {
  Solution solution;
  KsState state;
  double c0 = 0.0;
};

namespace detail {

/// a <= b up to rounding relative to the magnitudes involved.
inline double order_breach(double a, double b) {
  const double excess = a - b;
  if (excess <= 0.0) return 0.0;
  return excess / (std::abs(a) + std::abs(b) + std::numeric_limits<double>::min());
}

inline constexpr double kOrderTol = 1e-12;

inline bool all_zero(const Field& f) {
  for (double v : f.values())
    if (v != 0.0) return false;
  return true;
}

}  // namespace detail

/// Lower/upper iteration from l0 = 0, T^{-t}u0 = C0·M with C0 = (20/19)||f0||.
inline KsResult ks_solve(const Field& f0, const WeightParams& w, const SolverConfig& cfg) {
  cfg.validate();
  const auto& q = cfg.quadrature;
  const auto& times = cfg.time_grid;
  if (times.front() < 0.0)
    throw Error(ErrorKind::Usage, "the monotone iteration needs a time grid in [0, ∞)");
  const Field base = detail::on_quadrature_grid(f0, q);
  detail::require_nonnegative(base);
  const double norm0 = weighted_norm(base, w);
  if (cfg.enforce_thresholds && norm0 > thresholds(w).r_ks) throw Error(ErrorKind::Regime, "outside KS regime");

  KsResult res;
  res.c0 = 20.0 / 19.0 * norm0;
  const std::size_t nt = times.size();
  const Field zero = Field::on_grid(q.grid, std::vector<double>(q.grid.size(), 0.0));
  std::vector<Field> lower(nt, zero);
  std::vector<Field> upper(nt, Field::sample(scaled(res.c0, maxwellian(w)), q.grid));

  auto terms = [&](const std::vector<Field>& traj, std::vector<std::vector<double>>& gain,
                   std::vector<std::vector<double>>& rate) {
    gain.assign(nt, {});
    rate.assign(nt, {});
    for (std::size_t k = 0; k < nt; ++k) {
      if (detail::all_zero(traj[k])) {
        gain[k].assign(q.grid.size(), 0.0);
        rate[k].assign(q.grid.size(), 0.0);
        continue;
      }
      auto t = transported_terms(traj[k], times[k], q, {true, false, true});
      gain[k] = std::move(t.gain);
      rate[k] = std::move(t.rate);
    }
  };

  const double tol = cfg.tol(w);
  for (int n = 1; n <= cfg.max_iters; ++n) {
    std::vector<std::vector<double>> gain_l, rate_l, gain_u, rate_u;
    terms(lower, gain_l, rate_l);
    terms(upper, gain_u, rate_u);
    auto next_lower = detail::alp_from_rates(base, rate_u, gain_l, times, q.grid);
    auto next_upper = detail::alp_from_rates(base, rate_l, gain_u, times, q.grid);

    double breach = 0.0;
    double gap = 0.0;
    double tightest = std::numeric_limits<double>::infinity();
    std::size_t tightest_node = 0;
    for (std::size_t k = 0; k < nt; ++k) {
      auto lp = lower[k].values(), ln = next_lower[k].values();
      auto up = upper[k].values(), un = next_upper[k].values();
      double node_min = std::numeric_limits<double>::infinity();
      for (std::size_t p = 0; p < lp.size(); ++p) {
        const double b = std::max({detail::order_breach(lp[p], ln[p]), detail::order_breach(ln[p], un[p]),
                                   detail::order_breach(un[p], up[p])});
        if (n == 1 && b > detail::kOrderTol) {
          const int i = static_cast<int>(p / q.grid.nv), j = static_cast<int>(p % q.grid.nv);
          throw Error(ErrorKind::Ordering, "beginning condition violated at t = " + std::to_string(times[k]) +
                                               ", x = " + std::to_string(q.grid.x(i)) +
                                               ", v = " + std::to_string(q.grid.v(j)));
        }
        breach = std::max(breach, b);
        node_min = std::min(node_min, un[p] - ln[p]);
      }
      if (node_min < tightest) {
        tightest = node_min;
        tightest_node = k;
      }
      gap = std::max(gap, weighted_distance(next_upper[k], next_lower[k], w));
    }
    lower = std::move(next_lower);
    upper = std::move(next_upper);
    res.state.n = n;
    res.state.gap_history.push_back(gap);
    res.state.min_gap_node.push_back(tightest_node);
    res.state.worst_order_breach = std::max(res.state.worst_order_breach, breach);
    if (gap < tol) {
      res.solution.converged = true;
      break;
    }
  }

  std::vector<Field> mid(nt);
  for (std::size_t k = 0; k < nt; ++k) mid[k] = lincomb(0.5, lower[k], 0.5, upper[k]);
  res.solution.trajectory = Trajectory(times, std::move(mid));
  res.solution.residual_history = res.state.gap_history;
  for (std::size_t n = 1; n < res.state.gap_history.size(); ++n)
    if (res.state.gap_history[n - 1] > 0.0)
      res.solution.contraction_ratios.push_back(res.state.gap_history[n] / res.state.gap_history[n - 1]);
  res.state.lower = Trajectory(times, std::move(lower));
  res.state.upper = Trajectory(times, std::move(upper));
  return res;
}

}  // namespace sixwave
