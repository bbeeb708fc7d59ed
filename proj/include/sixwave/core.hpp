#pragma once

// Phase-space fields f(x, v) in one space and one velocity dimension, the
// exponentially weighted sup-norms, the Maxwellian and free transport.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "sixwave/error.hpp"

namespace sixwave {

/// Exponential weight rates (alpha, beta) of the space M_{alpha,beta} and the
/// truncation box [-Lx, Lx] x [-Lv, Lv] outside which fields are taken as 0.
struct WeightParams {
  double alpha = 1.0;
  double beta = 1.0;
  double eps_tail = 1e-10;
  double Lx = 0.0;
  double Lv = 0.0;

  /// Derives Lx = sqrt(ln(1/eps)/alpha) and Lv likewise unless overridden.
  /// An override must still satisfy exp(-alpha Lx^2) <= eps_tail.
  static WeightParams make(double alpha, double beta, double eps_tail = 1e-10,
                           std::optional<double> Lx = std::nullopt,
                           std::optional<double> Lv = std::nullopt) {
    if (!(alpha > 0.0)) throw Error(ErrorKind::Usage, "alpha must be positive");
    if (!(beta > 0.0)) throw Error(ErrorKind::Usage, "beta must be positive");
    if (!(eps_tail > 0.0 && eps_tail < 1.0))
      throw Error(ErrorKind::Usage, "eps_tail must lie in (0, 1)");
    WeightParams w;
    w.alpha = alpha;
    w.beta = beta;
    w.eps_tail = eps_tail;
    const double log_inv = std::log(1.0 / eps_tail);
    w.Lx = Lx.value_or(std::sqrt(log_inv / alpha));
    w.Lv = Lv.value_or(std::sqrt(log_inv / beta));
    // 1e-12 relative slack so the derived radii pass their own check.
    if (!(w.Lx > 0.0) || alpha * w.Lx * w.Lx < log_inv * (1.0 - 1e-12))
      throw Error(ErrorKind::Usage, "Lx too small for eps_tail");
    if (!(w.Lv > 0.0) || beta * w.Lv * w.Lv < log_inv * (1.0 - 1e-12))
      throw Error(ErrorKind::Usage, "Lv too small for eps_tail");
    return w;
  }

  double weight(double x, double v) const {
    return std::exp(alpha * x * x + beta * v * v);
  }
};

/// Uniform tensor grid x_i = -Lx + i hx (i < nx), v_j = -Lv + j hv (j < nv).
struct PhaseGrid {
  int nx = 65;
  int nv = 65;
  double Lx = 1.0;
  double Lv = 1.0;

  static PhaseGrid from_weights(const WeightParams& w, int nx = 65, int nv = 65) {
    PhaseGrid g{nx, nv, w.Lx, w.Lv};
    g.validate();
    return g;
  }

  void validate() const {
    if (nx < 2 || nv < 2) throw Error(ErrorKind::Usage, "grid needs at least 2 nodes per axis");
    if (!(Lx > 0.0) || !(Lv > 0.0)) throw Error(ErrorKind::Usage, "grid half-widths must be positive");
  }

  double hx() const { return 2.0 * Lx / (nx - 1); }
  double hv() const { return 2.0 * Lv / (nv - 1); }
  double x(int i) const { return -Lx + i * hx(); }
  double v(int j) const { return -Lv + j * hv(); }
  std::size_t size() const { return static_cast<std::size_t>(nx) * nv; }
  std::size_t index(int i, int j) const { return static_cast<std::size_t>(i) * nv + j; }

  friend bool operator==(const PhaseGrid& a, const PhaseGrid& b) {
    return a.nx == b.nx && a.nv == b.nv && a.Lx == b.Lx && a.Lv == b.Lv;
  }
};

/// Bilinear interpolation of row-major samples on `grid`, zero outside the box.
inline double bilinear(const PhaseGrid& grid, std::span<const double> values, double x, double v) {
  const double tx = (x + grid.Lx) / grid.hx();
  const double tv = (v + grid.Lv) / grid.hv();
  if (!(tx >= 0.0 && tx <= grid.nx - 1 && tv >= 0.0 && tv <= grid.nv - 1)) return 0.0;
  const int i = std::min(static_cast<int>(tx), grid.nx - 2);
  const int j = std::min(static_cast<int>(tv), grid.nv - 2);
  const double fx = tx - i;
  const double fv = tv - j;
  const double* row0 = values.data() + grid.index(i, j);
  const double* row1 = row0 + grid.nv;
  return (1.0 - fx) * ((1.0 - fv) * row0[0] + fv * row0[1]) +
         fx * ((1.0 - fv) * row1[0] + fv * row1[1]);
}

/// A space-velocity function, backed either by an analytic rule or by samples
/// on a PhaseGrid. Immutable; copies share storage.
class Field {
 public:
  using Rule = std::function<double(double, double)>;

  Field() : Field(zero()) {}

  static Field analytic(Rule rule) {
    Field f(Tag{});
    f.rule_ = std::make_shared<const Rule>(std::move(rule));
    return f;
  }

  static Field zero() {
    return analytic([](double, double) { return 0.0; });
  }

  static Field on_grid(const PhaseGrid& grid, std::vector<double> values) {
    grid.validate();
    if (values.size() != grid.size())
      throw Error(ErrorKind::Usage, "grid field size does not match grid");
    for (double value : values)
      if (!std::isfinite(value)) throw Error(ErrorKind::Numeric, "non-finite field");
    Field f(Tag{});
    f.grid_ = grid;
    f.values_ = std::make_shared<const std::vector<double>>(std::move(values));
    return f;
  }

  /// Samples any field at the nodes of `grid`.
  static Field sample(const Field& source, const PhaseGrid& grid) {
    std::vector<double> values(grid.size());
    for (int i = 0; i < grid.nx; ++i)
      for (int j = 0; j < grid.nv; ++j) values[grid.index(i, j)] = source(grid.x(i), grid.v(j));
    return on_grid(grid, std::move(values));
  }

  double operator()(double x, double v) const {
    if (rule_) return (*rule_)(x, v);
    return bilinear(grid_, *values_, x, v);
  }

  bool is_grid() const { return static_cast<bool>(values_); }
  const PhaseGrid& grid() const { return grid_; }
  std::span<const double> values() const {
    if (!values_) throw Error(ErrorKind::Usage, "field has no grid backing");
    return *values_;
  }

 private:
  struct Tag {};
  explicit Field(Tag) {}

  std::shared_ptr<const Rule> rule_;
  PhaseGrid grid_{};
  std::shared_ptr<const std::vector<double>> values_;
};

/// a*f + b*g. Grid fields on the same grid combine nodewise; anything else
/// combines as a rule.
inline Field lincomb(double a, const Field& f, double b, const Field& g) {
  if (f.is_grid() && g.is_grid() && f.grid() == g.grid()) {
    auto fv = f.values();
    auto gv = g.values();
    std::vector<double> out(fv.size());
    for (std::size_t n = 0; n < out.size(); ++n) out[n] = a * fv[n] + b * gv[n];
    return Field::on_grid(f.grid(), std::move(out));
  }
  return Field::analytic([a, f, b, g](double x, double v) { return a * f(x, v) + b * g(x, v); });
}

inline Field scaled(double a, const Field& f) {
  if (f.is_grid()) {
    std::vector<double> out(f.values().begin(), f.values().end());
    for (double& value : out) value *= a;
    return Field::on_grid(f.grid(), std::move(out));
  }
  return Field::analytic([a, f](double x, double v) { return a * f(x, v); });
}

/// M(x, v) = exp(-alpha x^2 - beta v^2).
inline Field maxwellian(const WeightParams& w) {
  const double alpha = w.alpha;
  const double beta = w.beta;
  return Field::analytic(
      [alpha, beta](double x, double v) { return std::exp(-alpha * x * x - beta * v * v); });
}

/// (T^s g)(x, v) = g(x - s v, v). Grid fields are resampled on their own grid.
inline Field transport(const Field& g, double s) {
  if (s == 0.0) return g;
  if (!g.is_grid())
    return Field::analytic([g, s](double x, double v) { return g(x - s * v, v); });
  const PhaseGrid& grid = g.grid();
  std::vector<double> out(grid.size());
  for (int i = 0; i < grid.nx; ++i)
    for (int j = 0; j < grid.nv; ++j) {
      const double v = grid.v(j);
      out[grid.index(i, j)] = g(grid.x(i) - s * v, v);
    }
  return Field::on_grid(grid, std::move(out));
}

namespace detail {

inline double weighted_value(const WeightParams& w, double value, double x, double v) {
  if (!std::isfinite(value)) throw Error(ErrorKind::Numeric, "non-finite field");
  if (value == 0.0) return 0.0;
  const double exponent = w.alpha * x * x + w.beta * v * v;
  // Work in logs so a huge weight on a tiny value does not overflow early.
  const double log_mag = std::log(std::abs(value)) + exponent;
  if (log_mag > std::log(std::numeric_limits<double>::max()))
    throw Error(ErrorKind::Numeric, "weight overflow");
  return std::abs(value) * std::exp(exponent);
}

}  // namespace detail

/// sup |f| exp(alpha x^2 + beta v^2) over the nodes of `grid`.
inline double weighted_norm(const Field& f, const WeightParams& w, const PhaseGrid& grid) {
  double sup = 0.0;
  if (f.is_grid() && f.grid() == grid) {
    auto values = f.values();
    for (int i = 0; i < grid.nx; ++i)
      for (int j = 0; j < grid.nv; ++j)
        sup = std::max(sup, detail::weighted_value(w, values[grid.index(i, j)], grid.x(i), grid.v(j)));
    return sup;
  }
  for (int i = 0; i < grid.nx; ++i)
    for (int j = 0; j < grid.nv; ++j)
      sup = std::max(sup, detail::weighted_value(w, f(grid.x(i), grid.v(j)), grid.x(i), grid.v(j)));
  return sup;
}

/// Grid fields use their own nodes; rule fields use the default 65x65 grid
/// over the truncation box of `w`.
inline double weighted_norm(const Field& f, const WeightParams& w) {
  return weighted_norm(f, w, f.is_grid() ? f.grid() : PhaseGrid::from_weights(w));
}

/// ||f - g|| without materialising the difference as a rule.
inline double weighted_distance(const Field& f, const Field& g, const WeightParams& w) {
  return weighted_norm(lincomb(1.0, f, -1.0, g), w);
}

/// Time-indexed family t -> T^{-t} f(t). Times are strictly increasing and
/// include 0.
class Trajectory {
 public:
  Trajectory(std::vector<double> times, std::vector<Field> fields)
      : times_(std::move(times)), fields_(std::move(fields)) {
    if (times_.empty() || times_.size() != fields_.size())
      throw Error(ErrorKind::Usage, "trajectory needs one field per time node");
    for (std::size_t k = 1; k < times_.size(); ++k)
      if (!(times_[k] > times_[k - 1]))
        throw Error(ErrorKind::Usage, "trajectory times must be strictly increasing");
    if (std::find(times_.begin(), times_.end(), 0.0) == times_.end())
      throw Error(ErrorKind::Usage, "trajectory times must contain 0");
  }

  static Trajectory constant(std::vector<double> times, const Field& f) {
    std::vector<Field> fields(times.size(), f);
    return Trajectory(std::move(times), std::move(fields));
  }

  const std::vector<double>& times() const { return times_; }
  const std::vector<Field>& fields() const { return fields_; }
  const Field& operator[](std::size_t k) const { return fields_[k]; }
  std::size_t size() const { return times_.size(); }

  std::size_t zero_index() const {
    return static_cast<std::size_t>(std::find(times_.begin(), times_.end(), 0.0) - times_.begin());
  }

 private:
  std::vector<double> times_;
  std::vector<Field> fields_;
};

/// |||g||| = max over time nodes of the weighted norm.
inline double triple_norm(const Trajectory& g, const WeightParams& w) {
  double sup = 0.0;
  for (const Field& f : g.fields()) sup = std::max(sup, weighted_norm(f, w));
  return sup;
}

inline double triple_distance(const Trajectory& a, const Trajectory& b, const WeightParams& w) {
  if (a.size() != b.size()) throw Error(ErrorKind::Usage, "trajectories have different lengths");
  double sup = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k)
    sup = std::max(sup, weighted_distance(a[k], b[k], w));
  return sup;
}

/// Uniform time nodes on [t_min, t_max]; 0 is inserted if it is not a node.
inline std::vector<double> uniform_times(double t_min, double t_max, int nt) {
  if (nt < 1 || t_max < t_min || (nt == 1 && t_max != t_min))
    throw Error(ErrorKind::Usage, "invalid time grid");
  std::vector<double> times(nt);
  for (int k = 0; k < nt; ++k)
    times[k] = nt == 1 ? t_min : t_min + (t_max - t_min) * k / (nt - 1);
  // Snap a node that is zero up to rounding, otherwise insert one.
  const double tol = 1e-12 * std::max(1.0, t_max - t_min);
  bool has_zero = false;
  for (double& t : times)
    if (std::abs(t) <= tol) {
      t = 0.0;
      has_zero = true;
    }
  if (!has_zero) {
    if (t_min > 0.0 || t_max < 0.0) throw Error(ErrorKind::Usage, "time grid must contain 0");
    times.insert(std::upper_bound(times.begin(), times.end(), 0.0), 0.0);
  }
  return times;
}

/// Grid dump: header `x,v,value`, row-major over (x_i, v_j), 17 significant digits.
inline void write_grid_csv(const Field& f, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Usage, "cannot open " + path);
  const PhaseGrid& grid = f.grid();
  auto values = f.values();
  out << "x,v,value\n" << std::setprecision(17);
  for (int i = 0; i < grid.nx; ++i)
    for (int j = 0; j < grid.nv; ++j)
      out << grid.x(i) << ',' << grid.v(j) << ',' << values[grid.index(i, j)] << '\n';
}

/// Reads a grid dump written by write_grid_csv. Nodes must form a uniform,
/// symmetric tensor grid in row-major order.
inline Field read_grid_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Usage, "cannot open " + path);
  std::string line;
  std::getline(in, line);
  if (line.rfind("x,v,value", 0) != 0) throw Error(ErrorKind::Usage, "bad grid dump header in " + path);
  std::vector<double> xs, vs, values;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    double x = 0, v = 0, value = 0;
    char c1 = 0, c2 = 0;
    if (!(row >> x >> c1 >> v >> c2 >> value) || c1 != ',' || c2 != ',')
      throw Error(ErrorKind::Usage, "malformed grid dump row: " + line);
    xs.push_back(x);
    vs.push_back(v);
    values.push_back(value);
  }
  if (values.size() < 4) throw Error(ErrorKind::Usage, "grid dump too small");
  int nv = 1;
  while (nv < static_cast<int>(xs.size()) && xs[nv] == xs[0]) ++nv;
  if (values.size() % nv != 0) throw Error(ErrorKind::Usage, "grid dump is not a tensor grid");
  const int nx = static_cast<int>(values.size() / nv);
  PhaseGrid grid{nx, nv, -xs.front(), -vs.front()};
  grid.validate();
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < nv; ++j) {
      const std::size_t n = grid.index(i, j);
      if (std::abs(xs[n] - grid.x(i)) > 1e-9 * grid.Lx || std::abs(vs[n] - grid.v(j)) > 1e-9 * grid.Lv)
        throw Error(ErrorKind::Usage, "grid dump nodes are not uniform and symmetric");
    }
  return Field::on_grid(grid, std::move(values));
}

}  // namespace sixwave
