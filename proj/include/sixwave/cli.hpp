#pragma once

// Command dispatch for the sixwave tool. Needs CLI11.hpp on the include path.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sixwave/bounds.hpp"
#include "sixwave/collision.hpp"
#include "sixwave/config.hpp"
#include "sixwave/core.hpp"
#include "sixwave/duhamel.hpp"
#include "sixwave/error.hpp"
#include "sixwave/kaniel_shinbrot.hpp"
#include "sixwave/oracle.hpp"
#include "sixwave/scattering.hpp"

namespace sixwave {

enum ExitCode : int { kOk = 0, kUsage = 1, kRegime = 2, kNoConvergence = 3 };

struct CheckRow {
  std::string name;
  double measured = 0;
  double bound = 0;
  bool pass = false;
};

namespace detail {

inline std::ofstream open_csv(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Usage, "cannot write " + path.string());
  out << std::setprecision(17);
  return out;
}

inline void dump_trajectory(const Trajectory& g, const WeightParams& w, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir / "fields");
  auto idx = open_csv(dir / "times.csv");
  idx << "k,t,weighted_norm,file\n";
  for (std::size_t k = 0; k < g.size(); ++k) {
    std::ostringstream name;
    name << "g_" << std::setw(3) << std::setfill('0') << k << ".csv";
    write_grid_csv(g[k], (dir / "fields" / name.str()).string());
    idx << k << ',' << g.times()[k] << ',' << weighted_norm(g[k], w) << ",fields/" << name.str() << '\n';
  }
}

inline void write_diagnostics(const std::vector<double>& residuals, const std::filesystem::path& path) {
  auto out = open_csv(path);
  out << "iter,residual,ratio\n";
  for (std::size_t n = 0; n < residuals.size(); ++n) {
    out << n + 1 << ',' << residuals[n] << ',';
    if (n > 0 && residuals[n - 1] > 0.0) out << residuals[n] / residuals[n - 1];
    out << '\n';
  }
}

inline int exit_for(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::Usage: return kUsage;
    case ErrorKind::Regime:
    case ErrorKind::Ordering: return kRegime;
    case ErrorKind::Numeric: return kNoConvergence;
  }
  return kUsage;
}

}  // namespace detail

/// Oracle checks behind `verify`: the angular kernel against the co-area
/// route, manifold exactness, equilibria, and the two auxiliary integral
/// estimates. Draws are reproducible from `seed`.
inline std::vector<CheckRow> verify_suite(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(-3.0, 3.0);
  std::vector<CheckRow> rows;
  const double ref = std::numbers::pi / std::sqrt(3.0);

  double dual = 0.0, constancy = 0.0, majorant = 0.0;  // majorant: largest kernel/majorant
  for (int n = 0; n < 200; ++n) {
    const double v = U(rng), v1 = U(rng), v2 = U(rng);
    const double k = kernel_I(v, v1, v2, 4096);
    dual = std::max(dual, std::abs(k - i_coarea(v, v1, v2, 4096)));
    constancy = std::max(constancy, std::abs(k - ref));
    majorant = std::max(majorant, k / rep_majorant(v, v1, v2, 4096));
  }
  rows.push_back({"kernel_vs_coarea", dual, 1e-6, dual <= 1e-6});
  rows.push_back({"kernel_constant", constancy, 1e-6, constancy <= 1e-6});
  rows.push_back({"kernel_over_majorant", majorant, 1.0, majorant <= 1.0});

  double sig = 0.0, om = 0.0, ident = 0.0;
  std::uniform_real_distribution<double> T(0.0, 2.0 * std::numbers::pi);
  for (int n = 0; n < 10000; ++n) {
    const auto t = parametrize(U(rng), U(rng), U(rng), T(rng));
    const double x = U(rng), s = 4.0 * U(rng);
    const double scale = 1.0 + std::max({std::abs(t.v), std::abs(t.v1), std::abs(t.v2), std::abs(t.v3),
                                         std::abs(t.v4), std::abs(t.v5)});
    const double xscale = 1.0 + std::abs(x) + std::abs(s) * 2.0 * scale;
    sig = std::max(sig, std::abs(t.sigma()) / scale);
    om = std::max(om, std::abs(t.omega()) / (scale * scale));
    ident = std::max(ident, resonance_identity_check(x, t.v, s, t) / (xscale * xscale));
  }
  rows.push_back({"manifold_sigma", sig, 1e-12, sig <= 1e-12});
  rows.push_back({"manifold_omega", om, 1e-12, om <= 1e-12});
  rows.push_back({"characteristic_identity", ident, 1e-10, ident <= 1e-10});

  const WeightParams w = WeightParams::make(1.0, 1.0);
  const QuadratureSpec q{PhaseGrid::from_weights(w, 17, 33), 32};
  std::uniform_real_distribution<double> P(0.2, 3.0);
  double rj = 0.0;
  for (int n = 0; n < 3; ++n) {
    const auto c = rj_check(P(rng), P(rng), w, q);
    rj = std::max(rj, c.residual / c.mass_scale);
  }
  rows.push_back({"rayleigh_jeans_residual", rj, 1e-10, rj <= 1e-10});
  const Field flat = Field::analytic([](double, double) { return 0.7; });
  double flat_res = 0.0;
  for (double v : {-2.0, 0.0, 1.3}) {
    const double gain = collision_terms(flat, flat, flat, flat, flat, flat, 0.0, v, q).gain();
    flat_res = std::max(flat_res, std::abs(collide(flat, 0.0, v, q)) / gain);
  }
  rows.push_back({"constant_equilibrium", flat_res, 1e-13, flat_res <= 1e-13});

  double lemma = 0.0;
  for (auto [x0, u0, a] : {std::tuple{0.0, 1.0, 1.0}, {2.0, 1.0, 1.0}, {0.0, 2.0, 1.0}, {-1.5, 0.3, 4.0}}) {
    const auto e = verify_time_lemma(x0, u0, a);
    lemma = std::max(lemma, std::abs(e.numeric - e.bound) / e.bound);
  }
  rows.push_back({"time_lemma_equality", lemma, 1e-8, lemma <= 1e-8});

  double conv = 0.0;
  std::uniform_real_distribution<double> B(0.3, 3.0);
  for (int n = 0; n < 50; ++n) {
    const double qexp = n % 2 == 0 ? -1.0 : 0.0;
    const auto e = verify_conv_estimate(U(rng), B(rng), qexp);
    conv = std::max(conv, e.numeric / e.bound);
  }
  rows.push_back({"convolution_estimate_ratio", conv, 1.0, conv <= 1.0});
  return rows;
}

/// Runs one subcommand; args exclude the program name.
inline int run(const std::vector<std::string>& args, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  CLI::App app{"Six-wave kinetic equation solver"};
  app.require_subcommand(1);

  std::string config_path, out_dir = ".", direction = "plus";
  double alpha = 0.0, beta = 0.0;
  std::uint64_t seed = 0;
  bool centered = false, inverse = false;

  auto* sim = app.add_subcommand("simulate", "Picard solve of the Duhamel form");
  sim->add_option("config", config_path, "config file")->required();
  sim->add_option("-o,--out", out_dir, "output directory");
  sim->add_flag("--centered", centered, "iterate about the Maxwellian");

  auto* ks = app.add_subcommand("ks", "monotone upper/lower iteration");
  ks->add_option("config", config_path, "config file")->required();
  ks->add_option("-o,--out", out_dir, "output directory");

  auto* sc = app.add_subcommand("scatter", "scattering state or its inverse");
  sc->add_option("config", config_path, "config file")->required();
  sc->add_option("-o,--out", out_dir, "output directory");
  sc->add_option("--direction", direction, "plus or minus")->check(CLI::IsMember({"plus", "minus"}));
  sc->add_flag("--inverse", inverse, "treat init as the scattering state and recover f0");

  auto* th = app.add_subcommand("thresholds", "print the regime constants");
  th->add_option("config", config_path, "config file");
  th->add_option("--alpha", alpha, "spatial weight rate");
  th->add_option("--beta", beta, "velocity weight rate");

  auto* ver = app.add_subcommand("verify", "run the oracle checks");
  ver->add_option("-o,--out", out_dir, "output directory");
  ver->add_option("--seed", seed, "seed for the random draws");

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = e.get_exit_code();
    (code == 0 ? out : err) << (code == 0 ? app.help() : std::string(e.what()) + "\n");
    return code == 0 ? kOk : kUsage;
  }

  try {
    const std::filesystem::path dir(out_dir);
    if (*th) {
      WeightParams w;
      if (!config_path.empty()) {
        w = parse_config(config_path).weights;
      } else {
        if (th->count("--alpha") == 0 || th->count("--beta") == 0)
          throw Error(ErrorKind::Usage, "thresholds needs --alpha and --beta or a config");
        w = WeightParams::make(alpha, beta);
      }
      const Thresholds t = thresholds(w);
      out << std::setprecision(17) << "key,value\n"
          << "c_d," << t.c_d << "\nc1beta," << t.c1beta << "\nr_e," << t.r_e << "\nr_p_lo," << t.r_p_lo
          << "\nr_p_hi," << t.r_p_hi << "\nr_p_nonempty," << (t.r_p_nonempty ? "true" : "false") << "\nr_ks,"
          << t.r_ks << "\nr_s," << t.r_s << "\nsmallness," << t.smallness
          << "\nnonneg_regime," << (t.nonneg_regime ? "true" : "false") << '\n';
      return kOk;
    }
    if (*ver) {
      std::filesystem::create_directories(dir);
      const auto rows = verify_suite(seed);
      auto csv = detail::open_csv(dir / "verify.csv");
      csv << "check,measured,bound,pass\n";
      bool ok = true;
      for (const auto& r : rows) {
        csv << r.name << ',' << r.measured << ',' << r.bound << ',' << (r.pass ? "true" : "false") << '\n';
        out << (r.pass ? "PASS " : "FAIL ") << r.name << " measured=" << r.measured << " bound=" << r.bound << '\n';
        ok = ok && r.pass;
      }
      return ok ? kOk : kNoConvergence;
    }

    const RunConfig rc = parse_config(config_path);
    const WeightParams& w = rc.weights;
    const Field f0 = rc.init.build(w);
    std::filesystem::create_directories(dir);

    if (*sim) {
      const bool about_m = centered || rc.solver.center_on_maxwellian;
      const Solution sol = about_m ? picard_solve_centered(f0, w, rc.solver) : picard_solve(f0, w, rc.solver);
      detail::write_diagnostics(sol.residual_history, dir / "diagnostics.csv");
      detail::dump_trajectory(sol.trajectory, w, dir);
      out << "converged," << (sol.converged ? "true" : "false") << "\ntriple_norm," << std::setprecision(17)
          << triple_norm(sol.trajectory, w) << '\n';
      if (sol.stayed_in_band) out << "stayed_in_band," << (*sol.stayed_in_band ? "true" : "false") << '\n';
      return sol.converged ? kOk : kNoConvergence;
    }
    if (*ks) {
      const KsResult r = ks_solve(f0, w, rc.solver);
      auto csv = detail::open_csv(dir / "sandwich.csv");
      csv << "n,gap,min_gap_node\n";
      for (std::size_t n = 0; n < r.state.gap_history.size(); ++n)
        csv << n + 1 << ',' << r.state.gap_history[n] << ',' << r.state.min_gap_node[n] << '\n';
      const Trajectory& g = r.solution.trajectory;
      write_grid_csv(g[g.size() - 1], (dir / "ks_final.csv").string());
      out << "converged," << (r.solution.converged ? "true" : "false") << "\niterations," << r.state.n << '\n';
      return r.solution.converged ? kOk : kNoConvergence;
    }
    if (*sc) {
      const Direction d = direction == "plus" ? Direction::Plus : Direction::Minus;
      if (inverse) {
        const InverseResult r = inverse_wave(f0, w, rc.solver, d);
        auto csv = detail::open_csv(dir / "inverse.csv");
        csv << "horizon,increment\n";
        for (std::size_t n = 0; n < r.increments.size(); ++n) csv << r.horizons[n] << ',' << r.increments[n] << '\n';
        write_grid_csv(r.f0, (dir / "f0.csv").string());
        out << "converged," << (r.converged ? "true" : "false") << '\n';
        return r.converged ? kOk : kNoConvergence;
      }
      const ScatteringResult r = forward_limit(f0, w, rc.solver, d);
      auto csv = detail::open_csv(dir / "scattering.csv");
      csv << "t,defect_norm\n";
      for (const auto& [t, defect] : r.convergence_history) csv << t << ',' << defect << '\n';
      write_grid_csv(r.state, (dir / (d == Direction::Plus ? "f_plus.csv" : "f_minus.csv")).string());
      out << "converged," << (r.converged ? "true" : "false") << "\ntail_time," << std::setprecision(17)
          << r.tail_time << "\nfinal_defect," << r.final_defect << '\n';
      return r.converged ? kOk : kNoConvergence;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return detail::exit_for(e);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}

}  // namespace sixwave
