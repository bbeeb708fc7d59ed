#pragma once

// Mild solutions through the Duhamel form g(t) = f0 + ∫_0^t T^{-s} C[T^s g(s)] ds
// with g(t) = T^{-t} f(t), solved by Picard iteration on whole trajectories.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <vector>

#include "sixwave/bounds.hpp"
#include "sixwave/collision.hpp"
#include "sixwave/core.hpp"
#include "sixwave/error.hpp"

namespace sixwave {

struct SolverConfig {
  std::vector<double> time_grid;
  double picard_tol = 0.0;  ///< 0 selects 1e-8·r_e
  int max_iters = 50;
  QuadratureSpec quadrature{};
  bool center_on_maxwellian = false;
  bool enforce_thresholds = true;
  double slack = 1.2;
  double scatter_tol = 0.0;  ///< 0 selects 1e-6·r_s
  double scatter_t_max = 0.0;  ///< 0 selects 2^8 times the initial horizon
  std::optional<double> r_p;  ///< ball radius for the Maxwellian-centred solve

  /// Defaults: 65x65 grid over the truncation box, 64 angles and 33 time
  /// nodes on [0, 4 sqrt(β/α)], the time for a unit-width packet to leave.
  static SolverConfig defaults(const WeightParams& w) {
    SolverConfig c;
    c.quadrature = QuadratureSpec{PhaseGrid::from_weights(w), 64};
    c.time_grid = uniform_times(0.0, 4.0 * std::sqrt(w.beta / w.alpha), 33);
    return c;
  }

  void validate() const {
    quadrature.validate();
    if (time_grid.empty()) throw Error(ErrorKind::Usage, "empty time grid");
    for (std::size_t k = 1; k < time_grid.size(); ++k)
      if (!(time_grid[k] > time_grid[k - 1]))
        throw Error(ErrorKind::Usage, "time grid must be strictly increasing");
    if (std::find(time_grid.begin(), time_grid.end(), 0.0) == time_grid.end())
      throw Error(ErrorKind::Usage, "time grid must contain 0");
    if (picard_tol < 0.0) throw Error(ErrorKind::Usage, "picard_tol must be positive");
    if (max_iters < 1) throw Error(ErrorKind::Usage, "max_iters must be at least 1");
    if (!(slack >= 1.0)) throw Error(ErrorKind::Usage, "slack must be at least 1");
  }

  double tol(const WeightParams& w) const {
    return picard_tol > 0.0 ? picard_tol : 1e-8 * thresholds(w).r_e;
  }
};

struct Solution {
  Trajectory trajectory = Trajectory({0.0}, {Field::zero()});
  std::vector<double> residual_history;
  std::vector<double> contraction_ratios;
  bool converged = false;
  /// Maxwellian-centred solves only.
  std::optional<double> r_p;
  std::optional<bool> stayed_in_ball;
  std::optional<bool> stayed_in_band;

  /// f(t) = T^t g(t) at node k.
  Field physical(std::size_t k) const {
    return transport(trajectory[k], trajectory.times()[k]);
  }
};

namespace detail {

inline std::size_t node_index(const std::vector<double>& times, double t) {
  const auto it = std::find(times.begin(), times.end(), t);
  if (it == times.end()) throw Error(ErrorKind::Usage, "time is not a grid node");
  return static_cast<std::size_t>(it - times.begin());
}

inline Field on_quadrature_grid(const Field& f, const QuadratureSpec& q) {
  return f.is_grid() && f.grid() == q.grid ? f : Field::sample(f, q.grid);
}

/// Q(s) = T^{-s} C[T^s g] at the nodes of q.grid.
inline std::vector<double> transported_collision(const Field& g, double s, const QuadratureSpec& q) {
  auto t = transported_terms(g, s, q);
  for (std::size_t n = 0; n < t.gain.size(); ++n) t.gain[n] -= t.loss[n];
  return std::move(t.gain);
}

/// out[k] = ∫_{t_a}^{t_k} Q by composite trapezoid, signed.
inline std::vector<std::vector<double>> cumulative(const std::vector<double>& times,
                                                   const std::vector<std::vector<double>>& q,
                                                   std::size_t anchor) {
  const std::size_t n = q.front().size();
  std::vector<std::vector<double>> out(times.size(), std::vector<double>(n, 0.0));
  for (std::size_t k = anchor + 1; k < times.size(); ++k) {
    const double h = 0.5 * (times[k] - times[k - 1]);
    for (std::size_t p = 0; p < n; ++p) out[k][p] = out[k - 1][p] + h * (q[k][p] + q[k - 1][p]);
  }
  for (std::size_t k = anchor; k-- > 0;) {
    const double h = 0.5 * (times[k + 1] - times[k]);
    for (std::size_t p = 0; p < n; ++p) out[k][p] = out[k + 1][p] - h * (q[k][p] + q[k + 1][p]);
  }
  return out;
}

struct FixedPoint {
  std::vector<Field> fields;
  std::vector<double> residuals;
  std::vector<double> ratios;
  bool converged = false;
};

/// Iterates g(t_k) <- base + ∫_{t_anchor}^{t_k} Q[g] from `seed` until the
/// discrete triple norm of the update drops below tol.
inline FixedPoint fixed_point(const std::vector<double>& times, std::size_t anchor, const Field& base,
                              std::vector<Field> seed, const QuadratureSpec& q, const WeightParams& w,
                              double tol, int max_iters) {
  const PhaseGrid& grid = q.grid;
  const Field b = on_quadrature_grid(base, q);
  FixedPoint fp;
  fp.fields.reserve(seed.size());
  for (const Field& f : seed) fp.fields.push_back(on_quadrature_grid(f, q));
  for (int it = 0; it < max_iters; ++it) {
    std::vector<std::vector<double>> qs(times.size());
    for (std::size_t k = 0; k < times.size(); ++k) qs[k] = transported_collision(fp.fields[k], times[k], q);
    const auto integral = cumulative(times, qs, anchor);
    std::vector<Field> next;
    next.reserve(times.size());
    double residual = 0.0;
    auto bv = b.values();
    for (std::size_t k = 0; k < times.size(); ++k) {
      std::vector<double> vals(grid.size());
      for (std::size_t p = 0; p < vals.size(); ++p) vals[p] = bv[p] + integral[k][p];
      Field f = Field::on_grid(grid, std::move(vals));
      residual = std::max(residual, weighted_distance(f, fp.fields[k], w));
      next.push_back(std::move(f));
    }
    fp.fields = std::move(next);
    if (!fp.residuals.empty() && fp.residuals.back() > 0.0) fp.ratios.push_back(residual / fp.residuals.back());
    fp.residuals.push_back(residual);
    if (residual < tol) {
      fp.converged = true;
      break;
    }
  }
  return fp;
}

}  // namespace detail

/// One endpoint of Λ_{a,b}: a fixed time, the output node itself, or ±∞.
struct Endpoint {
  enum class Kind { Time, Node, PlusInfinity, MinusInfinity };
  Kind kind = Kind::Node;
  double t = 0.0;

  static Endpoint at(double t) { return {Kind::Time, t}; }
  static Endpoint node() { return {Kind::Node, 0.0}; }
  static Endpoint plus_infinity() { return {Kind::PlusInfinity, 0.0}; }
  static Endpoint minus_infinity() { return {Kind::MinusInfinity, 0.0}; }
};

/// How infinite endpoints are realised. Truncation stops at the grid ends;
/// the scattering solvers grow the grid until that truncation is certified.
enum class TailPolicy { None, TruncateAtGrid };

/// Λ_{a,b}[g](t) = ∫_a^b T^{-s} C[T^s g(s)] ds at every node t of g, where
/// Endpoint::node() stands for t itself.
inline Trajectory lambda_map(const Trajectory& g, Endpoint a, Endpoint b, const SolverConfig& cfg,
                             TailPolicy tail = TailPolicy::None) {
  cfg.quadrature.validate();
  const auto& times = g.times();
  auto resolve = [&](Endpoint e, std::size_t k) -> std::size_t {
    switch (e.kind) {
      case Endpoint::Kind::Node: return k;
      case Endpoint::Kind::PlusInfinity:
        if (tail == TailPolicy::None) throw Error(ErrorKind::Usage, "needs tail policy");
        return times.size() - 1;
      case Endpoint::Kind::MinusInfinity:
        if (tail == TailPolicy::None) throw Error(ErrorKind::Usage, "needs tail policy");
        return 0;
      case Endpoint::Kind::Time:
        if (e.t < times.front() || e.t > times.back()) throw Error(ErrorKind::Usage, "needs tail policy");
        return detail::node_index(times, e.t);
    }
    return k;
  };
  const PhaseGrid& grid = cfg.quadrature.grid;
  std::vector<std::vector<double>> qs(times.size());
  for (std::size_t k = 0; k < times.size(); ++k)
    qs[k] = detail::transported_collision(detail::on_quadrature_grid(g[k], cfg.quadrature), times[k],
                                          cfg.quadrature);
  const auto integral = detail::cumulative(times, qs, 0);
  std::vector<Field> out;
  out.reserve(times.size());
  for (std::size_t k = 0; k < times.size(); ++k) {
    const std::size_t ia = resolve(a, k), ib = resolve(b, k);
    std::vector<double> vals(grid.size());
    for (std::size_t p = 0; p < vals.size(); ++p) vals[p] = integral[ib][p] - integral[ia][p];
    out.push_back(Field::on_grid(grid, std::move(vals)));
  }
  return Trajectory(times, std::move(out));
}

/// Fixed point of g(t) = f0 + Λ_{0,t}[g], seeded with g ≡ f0.
inline Solution picard_solve(const Field& f0, const WeightParams& w, const SolverConfig& cfg) {
  cfg.validate();
  if (cfg.enforce_thresholds && weighted_norm(f0, w) > thresholds(w).r_e)
    throw Error(ErrorKind::Regime, "outside small-data regime");
  const auto& times = cfg.time_grid;
  const Field base = detail::on_quadrature_grid(f0, cfg.quadrature);
  auto fp = detail::fixed_point(times, detail::node_index(times, 0.0), base,
                                std::vector<Field>(times.size(), base), cfg.quadrature, w, cfg.tol(w),
                                cfg.max_iters);
  Solution sol;
  sol.trajectory = Trajectory(times, std::move(fp.fields));
  sol.residual_history = std::move(fp.residuals);
  sol.contraction_ratios = std::move(fp.ratios);
  sol.converged = fp.converged;
  return sol;
}

/// Same iteration seeded at the Maxwellian, tracking the ball of radius 2 r_p
/// about M and the pointwise band (1 - 2 r_p) M <= g <= (1 + 2 r_p) M.
inline Solution picard_solve_centered(const Field& f0, const WeightParams& w, const SolverConfig& cfg) {
  cfg.validate();
  const Thresholds th = thresholds(w);
  if (!th.r_p_nonempty) throw Error(ErrorKind::Regime, "Maxwellian-centred regime unavailable for these weights");
  const Field m = Field::sample(maxwellian(w), cfg.quadrature.grid);
  const double dist = weighted_distance(detail::on_quadrature_grid(f0, cfg.quadrature), m, w);
  double r_p = cfg.r_p.value_or(dist < th.r_p_lo ? th.r_p_lo : th.r_p_hi);
  if (r_p < th.r_p_lo || r_p > th.r_p_hi) throw Error(ErrorKind::Usage, "r_p outside the admissible interval");
  if (cfg.enforce_thresholds && !(dist < r_p))
    throw Error(ErrorKind::Regime, "initial data outside the Maxwellian-centred ball");
  const auto& times = cfg.time_grid;
  auto fp = detail::fixed_point(times, detail::node_index(times, 0.0), f0, std::vector<Field>(times.size(), m),
                                cfg.quadrature, w, cfg.tol(w), cfg.max_iters);
  Solution sol;
  sol.trajectory = Trajectory(times, std::move(fp.fields));
  sol.residual_history = std::move(fp.residuals);
  sol.contraction_ratios = std::move(fp.ratios);
  sol.converged = fp.converged;
  sol.r_p = r_p;
  double ball = 0.0;
  bool band = true;
  auto mv = m.values();
  for (const Field& g : sol.trajectory.fields()) {
    ball = std::max(ball, weighted_distance(g, m, w));
    auto gv = g.values();
    for (std::size_t p = 0; p < gv.size(); ++p) {
      const double tol = 1e-12 * mv[p];
      if (gv[p] < (1.0 - 2.0 * r_p) * mv[p] - tol || gv[p] > (1.0 + 2.0 * r_p) * mv[p] + tol) band = false;
    }
  }
  sol.stayed_in_ball = ball <= 2.0 * r_p;
  sol.stayed_in_band = band;
  return sol;
}

/// |||T^{-t}f - T^{-t}g||| / ||f0 - g0|| for two solutions on the same grid.
inline double stability_ratio(const Solution& a, const Solution& b, const Field& f0, const Field& g0,
                              const WeightParams& w, const QuadratureSpec& q) {
  const double d0 = weighted_distance(detail::on_quadrature_grid(f0, q), detail::on_quadrature_grid(g0, q), w);
  if (d0 == 0.0) return 0.0;
  return triple_distance(a.trajectory, b.trajectory, w) / d0;
}

inline double stability(const Field& f0, const Field& g0, const WeightParams& w, const SolverConfig& cfg) {
  const auto& q = cfg.quadrature;
  if (weighted_distance(detail::on_quadrature_grid(f0, q), detail::on_quadrature_grid(g0, q), w) == 0.0) return 0.0;
  return stability_ratio(picard_solve(f0, w, cfg), picard_solve(g0, w, cfg), f0, g0, w, q);
}

/// max_t ||g(t) - f0 - ∫_0^t Q[g]||: how well a trajectory satisfies the
/// Duhamel identity on its own grid.
inline double duhamel_defect(const Trajectory& g, const Field& f0, const WeightParams& w,
                             const SolverConfig& cfg) {
  const Trajectory lam = lambda_map(g, Endpoint::at(0.0), Endpoint::node(), cfg);
  const Field base = detail::on_quadrature_grid(f0, cfg.quadrature);
  double worst = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k)
    worst = std::max(worst, weighted_distance(lincomb(1.0, detail::on_quadrature_grid(g[k], cfg.quadrature), -1.0, base),
                                              lam[k], w));
  return worst;
}

}  // namespace sixwave
