#pragma once

// Scattering states f± = lim_{t→±∞} T^{-t} f(t) and the inverse wave maps,
// with infinite horizons realised by doubling the time horizon until the
// state stops moving.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <utility>
#include <vector>

#include "sixwave/bounds.hpp"
#include "sixwave/collision.hpp"
#include "sixwave/core.hpp"
#include "sixwave/duhamel.hpp"
#include "sixwave/error.hpp"

namespace sixwave {

enum class Direction { Plus, Minus };

struct ScatteringResult {
  Field state;
  Direction direction = Direction::Plus;
  /// Horizon before the last doubling; beyond it the state moved by final_defect.
  double tail_time = 0.0;
  double final_defect = 0.0;
  bool converged = false;
  /// (t, ||T^{-t} f(t) - state||) over the final grid.
  std::vector<std::pair<double, double>> convergence_history;
  /// Per doubling: horizon T, the change of the state on (T, 2T], and the
  /// Γ majorant 6·(π/√3)·|||g|||⁵·∫_T^{2T} sup Γ/M of that change.
  std::vector<double> horizons, increments, increment_bounds;
  /// Picard diagnostics of the last solve.
  std::vector<double> residual_history, contraction_ratios;
  Trajectory trajectory = Trajectory({0.0}, {Field::zero()});
};

namespace detail {

inline double side_sign(Direction d) { return d == Direction::Plus ? 1.0 : -1.0; }

/// Initial one-sided grid |t| in [0, T0] taken from the configured grid.
inline std::vector<double> initial_side(const SolverConfig& cfg, const WeightParams& w, Direction d) {
  const double sg = side_sign(d);
  std::vector<double> side;
  for (double t : cfg.time_grid)
    if (sg * t >= 0.0) side.push_back(sg * t);
  std::sort(side.begin(), side.end());
  if (side.size() < 3) side = uniform_times(0.0, 4.0 * std::sqrt(w.beta / w.alpha), 33);
  return side;
}

/// Appends (n-1)/2 evenly spaced nodes on (T, 2T].
inline std::vector<double> doubled(const std::vector<double>& side) {
  const double T = side.back();
  const int extra = std::max(2, static_cast<int>(side.size() - 1) / 2);
  std::vector<double> out = side;
  for (int k = 1; k <= extra; ++k) out.push_back(T + T * k / extra);
  return out;
}

/// One-sided magnitudes |t| to signed increasing times.
inline std::vector<double> signed_times(const std::vector<double>& side, Direction d) {
  std::vector<double> t;
  t.reserve(side.size());
  if (d == Direction::Plus) {
    t = side;
  } else {
    for (auto it = side.rbegin(); it != side.rend(); ++it) t.push_back(*it == 0.0 ? 0.0 : -*it);
  }
  return t;
}

inline double quintic_majorant(const std::vector<Field>& g, const WeightParams& w, double a, double b) {
  double n = 0.0;
  for (const Field& f : g) n = std::max(n, weighted_norm(f, w));
  return 6.0 * std::numbers::pi / std::sqrt(3.0) * std::pow(n, 5) * gamma_weighted_integral(a, b, w);
}

inline double scatter_tol(const SolverConfig& cfg, const WeightParams& w) {
  return cfg.scatter_tol > 0.0 ? cfg.scatter_tol : 1e-6 * thresholds(w).r_s;
}

inline double horizon_cap(const SolverConfig& cfg, double T0) {
  return cfg.scatter_t_max > 0.0 ? cfg.scatter_t_max : 256.0 * T0;
}

}  // namespace detail

/// f± = lim T^{-t} f(t) for the mild solution from f0.
inline ScatteringResult forward_limit(const Field& f0, const WeightParams& w, const SolverConfig& cfg,
                                      Direction dir) {
  cfg.validate();
  const auto& q = cfg.quadrature;
  const Field base = detail::on_quadrature_grid(f0, q);
  if (cfg.enforce_thresholds && weighted_norm(base, w) > thresholds(w).r_s)
    throw Error(ErrorKind::Regime, "outside scattering regime");
  const double tol = cfg.tol(w);
  const double stol = detail::scatter_tol(cfg, w);

  std::vector<double> side = detail::initial_side(cfg, w, dir);
  const double cap = detail::horizon_cap(cfg, side.back());
  std::vector<double> times = detail::signed_times(side, dir);
  auto fp = detail::fixed_point(times, detail::node_index(times, 0.0), base,
                                std::vector<Field>(times.size(), base), q, w, tol, cfg.max_iters);
  if (!fp.converged) throw Error(ErrorKind::Numeric, "Picard iteration did not converge");
  std::vector<Field> fields = std::move(fp.fields);

  ScatteringResult res;
  res.direction = dir;
  res.residual_history = fp.residuals;
  res.contraction_ratios = fp.ratios;
  auto edge = [&]() -> const Field& { return dir == Direction::Plus ? fields.back() : fields.front(); };
  while (true) {
    const double T = side.back();
    if (2.0 * T > cap) break;
    // Only (T, 2T] is new; causality leaves the solved part untouched.
    const std::vector<double> next_side = detail::doubled(side);
    std::vector<double> seg_side(next_side.begin() + static_cast<long>(side.size()) - 1, next_side.end());
    const std::vector<double> seg = detail::signed_times(seg_side, dir);
    const std::size_t anchor = dir == Direction::Plus ? 0 : seg.size() - 1;
    const Field start = edge();
    auto part = detail::fixed_point(seg, anchor, start, std::vector<Field>(seg.size(), start), q, w, tol,
                                    cfg.max_iters);
    if (!part.converged) throw Error(ErrorKind::Numeric, "Picard iteration did not converge");
    res.horizons.push_back(T);
    res.increment_bounds.push_back(detail::quintic_majorant(part.fields, w, T, 2.0 * T));
    if (dir == Direction::Plus) {
      fields.insert(fields.end(), part.fields.begin() + 1, part.fields.end());
    } else {
      fields.insert(fields.begin(), part.fields.begin(), part.fields.end() - 1);
    }
    res.residual_history = part.residuals;
    res.contraction_ratios = part.ratios;
    side = next_side;
    const double inc = weighted_distance(edge(), start, w);
    res.increments.push_back(inc);
    if (inc < stol) {
      res.converged = true;
      res.tail_time = T;
      res.final_defect = inc;
      break;
    }
  }
  times = detail::signed_times(side, dir);
  res.state = edge();
  for (std::size_t k = 0; k < times.size(); ++k)
    res.convergence_history.emplace_back(times[k], weighted_distance(fields[k], res.state, w));
  if (!res.converged) {
    res.tail_time = side.back();
    res.final_defect = res.increments.empty() ? 0.0 : res.increments.back();
  }
  res.trajectory = Trajectory(times, std::move(fields));
  return res;
}

struct InverseResult {
  Field f0;
  Direction direction = Direction::Plus;
  double tail_time = 0.0;
  double final_defect = 0.0;
  bool converged = false;
  /// Junction |t| = T0 where the tail solves hand over to the final solve.
  double junction_time = 0.0;
  /// Per doubling: previous horizon and the change of g(±T0) it caused.
  std::vector<double> horizons, increments;
  std::vector<double> residual_history, contraction_ratios;
  Trajectory trajectory = Trajectory({0.0}, {Field::zero()});
};

/// Initial data whose solution scatters to f_pm: the fixed point of
/// g(t) = f+ - Λ_{t,∞}[g] (or f- + Λ_{-∞,t}[g]), returned as g(0).
/// The horizon is doubled on the tail |t| >= T0 only, where transport has
/// spread the data and the collision integral is cheap; g(±T0) is the
/// quantity whose convergence certifies the tail. [0, T0] is solved once,
/// anchored at the converged g(±T0).
inline InverseResult inverse_wave(const Field& f_pm, const WeightParams& w, const SolverConfig& cfg,
                                  Direction dir) {
  cfg.validate();
  const auto& q = cfg.quadrature;
  const Field target = detail::on_quadrature_grid(f_pm, q);
  if (cfg.enforce_thresholds && weighted_norm(target, w) > thresholds(w).r_s)
    throw Error(ErrorKind::Regime, "outside scattering regime");
  const double tol = cfg.tol(w);
  const double stol = detail::scatter_tol(cfg, w);
  const bool plus = dir == Direction::Plus;

  const std::vector<double> side = detail::initial_side(cfg, w, dir);
  const double T0 = side.back();
  const double cap = detail::horizon_cap(cfg, T0);
  InverseResult res;
  res.direction = dir;
  res.junction_time = T0;

  std::vector<double> full = side;  // magnitudes 0..H
  std::vector<Field> tail{target};  // solution on |t| in [T0, H], increasing |t|
  Field junction = target;
  while (true) {
    const double H = full.back();
    if (2.0 * H > cap) break;
    const std::vector<double> next = detail::doubled(full);
    std::vector<double> tail_side(next.begin() + static_cast<long>(side.size()) - 1, next.end());
    std::vector<Field> seed = tail;
    seed.resize(tail_side.size(), target);
    const std::vector<double> ts = detail::signed_times(tail_side, dir);
    if (!plus) std::reverse(seed.begin(), seed.end());
    auto fp = detail::fixed_point(ts, plus ? ts.size() - 1 : 0, target, std::move(seed), q, w, tol, cfg.max_iters);
    if (!fp.converged) throw Error(ErrorKind::Numeric, "Picard iteration did not converge");
    if (!plus) std::reverse(fp.fields.begin(), fp.fields.end());
    tail = std::move(fp.fields);
    full = next;
    const double inc = weighted_distance(tail.front(), junction, w);
    junction = tail.front();
    res.horizons.push_back(H);
    res.increments.push_back(inc);
    if (inc < stol) {
      res.converged = true;
      res.tail_time = H;
      res.final_defect = inc;
      break;
    }
  }
  if (!res.converged) {
    res.tail_time = full.back();
    res.final_defect = res.increments.empty() ? 0.0 : res.increments.back();
  }

  const std::vector<double> head = detail::signed_times(side, dir);
  auto fp = detail::fixed_point(head, plus ? head.size() - 1 : 0, junction,
                                std::vector<Field>(head.size(), junction), q, w, tol, cfg.max_iters);
  if (!fp.converged) throw Error(ErrorKind::Numeric, "Picard iteration did not converge");
  res.residual_history = fp.residuals;
  res.contraction_ratios = fp.ratios;
  res.f0 = fp.fields[detail::node_index(head, 0.0)];

  // Join head and tail in increasing signed time.
  std::vector<Field> fields;
  std::vector<double> times;
  const std::vector<double> tail_times = detail::signed_times(
      std::vector<double>(full.begin() + static_cast<long>(side.size()) - 1, full.end()), dir);
  if (plus) {
    times = head;
    fields = fp.fields;
    times.insert(times.end(), tail_times.begin() + 1, tail_times.end());
    fields.insert(fields.end(), tail.begin() + 1, tail.end());
  } else {
    times.assign(tail_times.begin(), tail_times.end() - 1);
    for (std::size_t k = tail.size(); k-- > 1;) fields.push_back(tail[k]);
    times.insert(times.end(), head.begin(), head.end());
    fields.insert(fields.end(), fp.fields.begin(), fp.fields.end());
  }
  res.trajectory = Trajectory(times, std::move(fields));
  return res;
}

/// ||forward_limit(inverse_wave(f_pm)) - f_pm||.
inline double roundtrip(const Field& f_pm, const WeightParams& w, const SolverConfig& cfg, Direction dir) {
  const Field target = detail::on_quadrature_grid(f_pm, cfg.quadrature);
  if (cfg.enforce_thresholds && weighted_norm(target, w) > 0.5 * thresholds(w).r_s)
    throw Error(ErrorKind::Regime, "outside scattering regime");
  const InverseResult inv = inverse_wave(target, w, cfg, dir);
  // f0 may leave B(r_s/2) but stays in B(2 r_s); the forward map is run on it as is.
  SolverConfig relaxed = cfg;
  relaxed.enforce_thresholds = false;
  const ScatteringResult fwd = forward_limit(inv.f0, w, relaxed, dir);
  return weighted_distance(fwd.state, target, w);
}

struct ScatteringMap {
  Field f_minus, f0, f_plus;
  InverseResult backward;
  ScatteringResult forward;
};

/// f- ↦ f+ through the solution that scatters to f- in the past.
inline ScatteringMap scattering_operator(const Field& f_minus, const WeightParams& w, const SolverConfig& cfg) {
  const Field target = detail::on_quadrature_grid(f_minus, cfg.quadrature);
  if (cfg.enforce_thresholds && weighted_norm(target, w) > 0.5 * thresholds(w).r_s)
    throw Error(ErrorKind::Regime, "outside scattering regime");
  ScatteringMap m;
  m.f_minus = target;
  m.backward = inverse_wave(target, w, cfg, Direction::Minus);
  m.f0 = m.backward.f0;
  SolverConfig relaxed = cfg;
  relaxed.enforce_thresholds = false;
  m.forward = forward_limit(m.f0, w, relaxed, Direction::Plus);
  m.f_plus = m.forward.state;
  return m;
}

}  // namespace sixwave
