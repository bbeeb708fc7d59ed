#include <cmath>
#include <functional>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "sixwave/collision.hpp"

using namespace sixwave;

namespace {

const double kPiOverRoot3 = 1.8137993642342178;  // π/√3

WeightParams unit() { return WeightParams::make(1.0, 1.0); }

QuadratureSpec coarse(const WeightParams& w, int n = 17, int n_theta = 16) {
  return QuadratureSpec{PhaseGrid::from_weights(w, n, n), n_theta};
}

Field random_field(std::mt19937_64& rng, const PhaseGrid& g, double lo = 0.0) {
  std::uniform_real_distribution<double> U(lo, 1.0);
  std::vector<double> vals(g.size());
  for (int i = 0; i < g.nx; ++i)
    for (int j = 0; j < g.nv; ++j) vals[g.index(i, j)] = U(rng) * std::exp(-0.3 * g.v(j) * g.v(j));
  return Field::on_grid(g, std::move(vals));
}

}  // namespace

TEST(Parametrize, PermutationPoints) {
  const auto a = parametrize(0.2, -1.0, 0.7, 0.0);
  EXPECT_DOUBLE_EQ(a.A, -1.2);
  EXPECT_DOUBLE_EQ(a.v3, 0.2);
  EXPECT_DOUBLE_EQ(a.v4, 0.7);
  EXPECT_DOUBLE_EQ(a.v5, -1.0);
  const auto b = parametrize(0.2, -1.0, 0.7, std::numbers::pi / 2);
  EXPECT_NEAR(b.A, 0.5, 1e-15);
  EXPECT_NEAR(b.v3, -1.0, 1e-15);
  EXPECT_NEAR(b.v4, 0.2, 1e-15);
  EXPECT_NEAR(b.v5, 0.7, 1e-15);
}

TEST(Parametrize, StaysOnManifold) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(-5.0, 5.0), T(0.0, 2.0 * std::numbers::pi);
  for (int n = 0; n < 1000; ++n) {
    const auto t = parametrize(U(rng), U(rng), U(rng), T(rng));
    const double scale = 1.0 + std::max({std::abs(t.v), std::abs(t.v1), std::abs(t.v2), std::abs(t.v3),
                                         std::abs(t.v4), std::abs(t.v5)});
    EXPECT_LE(std::abs(t.sigma()), 1e-12 * scale);
    EXPECT_LE(std::abs(t.omega()), 1e-12 * scale * scale);
    const double den = 1.0 + std::cos(t.theta) * std::sin(t.theta);
    EXPECT_GE(den, 0.5);
    EXPECT_LE(den, 1.5);
  }
}

TEST(KernelI, ConstantInDimensionOne) {
  EXPECT_NEAR(kernel_I(0.0, 1.0, -0.5, 64), kPiOverRoot3, 1e-12);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> U(-4.0, 4.0);
  for (int n = 0; n < 50; ++n) {
    const double v = U(rng), a = U(rng), b = U(rng);
    EXPECT_NEAR(kernel_I(v, a, b, 64), kPiOverRoot3, 1e-12);
    EXPECT_NEAR(kernel_I(v, a, b, 64), kernel_I(v, b, a, 64), 1e-14);
    EXPECT_NEAR(kernel_I(v + 1.7, a + 1.7, b + 1.7, 64), kernel_I(v, a, b, 64), 1e-12);
  }
}

TEST(KernelI, InsufficientQuadrature) {
  try {
    kernel_I(0.0, 1.0, 2.0, 3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_STREQ(e.what(), "insufficient quadrature");
  }
  EXPECT_THROW(kernel_I(0.0, 1.0, 2.0, 8, 3), Error);
}

TEST(KernelI, DimensionTwoApproachesClosedForm) {
  // In d = 2 the delta collapses to (π²/3)(E - S²/3) for velocities on one axis.
  const double v = 0.3, v1 = -0.7, v2 = 1.1;
  const double m = (v + v1 + v2) / 3.0;
  const double exact = std::numbers::pi * std::numbers::pi / 3.0 *
                       ((v - m) * (v - m) + (v1 - m) * (v1 - m) + (v2 - m) * (v2 - m));
  const double e32 = std::abs(kernel_I(v, v1, v2, 32, 2) - exact);
  const double e64 = std::abs(kernel_I(v, v1, v2, 64, 2) - exact);
  EXPECT_LT(e64, 2e-3 * exact);
  EXPECT_LT(e64, e32);
}

TEST(CollisionTerms, ZeroFields) {
  const auto w = unit();
  const auto q = coarse(w);
  const Field z = Field::zero();
  const auto t = collision_terms(z, z, z, z, z, z, 0.1, 0.2, q);
  EXPECT_EQ(t.g1, 0.0);
  EXPECT_EQ(t.g2, 0.0);
  EXPECT_EQ(t.l1, 0.0);
  EXPECT_EQ(t.l2, 0.0);
  EXPECT_EQ(collide(z, 0.0, 0.0, q), 0.0);
}

TEST(CollisionTerms, ConstantInVelocityBalances) {
  const auto w = unit();
  const auto q = coarse(w, 33, 32);
  const Field c = Field::analytic([](double x, double) { return 0.5 + 0.1 * x; });
  for (double v : {-2.0, 0.0, 1.5}) {
    const auto t = collision_terms(c, c, c, c, c, c, 0.4, v, q);
    EXPECT_GT(t.gain(), 0.0);
    EXPECT_NEAR(t.gain(), t.loss(), 1e-13 * t.gain());
    EXPECT_NEAR(collide(c, 0.4, v, q), 0.0, 1e-13 * t.gain());
  }
}

TEST(CollisionTerms, RayleighJeansBalances) {
  const auto w = unit();
  const auto q = coarse(w, 33, 32);
  const Field rj = Field::analytic([](double, double v) { return 1.0 / (0.8 + 1.3 * v * v); });
  for (double v : {-1.0, 0.25, 2.0}) {
    const auto t = collision_terms(rj, rj, rj, rj, rj, rj, 0.0, v, q);
    EXPECT_NEAR(t.gain(), t.loss(), 1e-12 * t.gain());
  }
}

TEST(Collide, MaxwellianSelfConsistentUnderRefinement) {
  const auto w = unit();
  const Field m = maxwellian(w);
  const double base = collide(m, 0.0, 0.0, QuadratureSpec{PhaseGrid::from_weights(w, 65, 65), 64});
  const double fine = collide(m, 0.0, 0.0, QuadratureSpec{PhaseGrid::from_weights(w, 65, 129), 128});
  EXPECT_NE(base, 0.0);
  EXPECT_NEAR(base, fine, 1e-4 * std::abs(fine));
}

TEST(Collide, SymmetricPathMatchesGeneralPath) {
  const auto w = unit();
  const auto q = coarse(w, 33, 32);
  std::mt19937_64 rng(9);
  const Field f = random_field(rng, q.grid);
  for (int j : {3, 16, 20}) {
    const double x = q.grid.x(12), v = q.grid.v(j);
    const double sym = collide(f, x, v, q);
    const double gen = collision_terms(f, f, f, f, f, f, x, v, q).value();
    EXPECT_NEAR(sym, gen, 1e-12 * (std::abs(gen) + 1e-12));
  }
}

TEST(LossRate, FactorisesLoss) {
  const auto w = unit();
  const auto q = coarse(w);
  std::mt19937_64 rng(13);
  const Field f = random_field(rng, q.grid), g = random_field(rng, q.grid), h = random_field(rng, q.grid);
  const Field k = random_field(rng, q.grid), l = random_field(rng, q.grid), m = random_field(rng, q.grid);
  const Field z = Field::zero();
  EXPECT_EQ(loss_rate_R(z, z, z, z, z, 0.0, 0.0, q), 0.0);
  for (int j : {2, 8, 11}) {
    const double x = q.grid.x(7), v = q.grid.v(j);
    const auto t = collision_terms(f, g, h, k, l, m, x, v, q);
    const double r = loss_rate_R(g, h, k, l, m, x, v, q);
    EXPECT_GE(r, 0.0);
    EXPECT_NEAR(f(x, v) * r, t.loss(), 1e-13 * t.loss());
  }
}

TEST(Moments, ZeroAndConstantFields) {
  const auto w = unit();
  const auto q = coarse(w);
  const auto z = moments(Field::zero(), 0.0, q);
  EXPECT_EQ(z.mass, 0.0);
  EXPECT_EQ(z.momentum, 0.0);
  EXPECT_EQ(z.energy, 0.0);
  const Field c = Field::analytic([](double, double) { return 0.3; });
  const auto gain_scale = collision_terms(c, c, c, c, c, c, 0.0, 0.0, q).gain();
  const auto mc = moments(c, 0.0, q);
  EXPECT_NEAR(mc.mass, 0.0, 1e-12 * gain_scale);
  EXPECT_NEAR(mc.momentum, 0.0, 1e-12 * gain_scale);
  EXPECT_NEAR(mc.energy, 0.0, 1e-11 * gain_scale);
}

TEST(Monotonicity, GainAndRateAreOrderPreserving) {
  const auto w = unit();
  const auto q = coarse(w);
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 3; ++trial) {
    const Field big = random_field(rng, q.grid, 0.2);
    std::vector<double> small(big.values().begin(), big.values().end());
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (double& s : small) s *= U(rng);
    const Field lo = Field::on_grid(q.grid, small);
    for (int j = 0; j < q.grid.nv; j += 4) {
      const double x = q.grid.x(8), v = q.grid.v(j);
      const auto tl = collision_terms(lo, lo, lo, lo, lo, lo, x, v, q);
      const auto tb = collision_terms(big, big, big, big, big, big, x, v, q);
      EXPECT_LE(tl.gain(), tb.gain());
      EXPECT_LE(loss_rate_R(lo, lo, lo, lo, lo, x, v, q), loss_rate_R(big, big, big, big, big, x, v, q));
    }
  }
}

namespace {

using Slots = std::array<Field, 6>;

/// Telescoping F(a) - F(b) = Σ_i F(b_<i, a_i - b_i, a_>i) over slot groups;
/// exact when F is linear in each group.
double telescoped(const std::function<double(const Slots&)>& F, const Slots& a, const Slots& b,
                  const std::vector<std::vector<int>>& groups) {
  double sum = 0.0;
  for (std::size_t gi = 0; gi < groups.size(); ++gi) {
    Slots s = a;
    for (std::size_t gj = 0; gj < gi; ++gj)
      for (int idx : groups[gj]) s[idx] = b[idx];
    for (int idx : groups[gi]) s[idx] = lincomb(1.0, a[idx], -1.0, b[idx]);
    sum += F(s);
  }
  return sum;
}

}  // namespace

TEST(Multilinearity, TelescopingDecompositions) {
  const auto w = unit();
  const auto q = coarse(w);
  std::mt19937_64 rng(21);
  Slots a, b;
  for (auto& f : a) f = random_field(rng, q.grid);
  for (auto& f : b) f = random_field(rng, q.grid);
  const double x = q.grid.x(6), v = q.grid.v(9);
  auto term = [&](int which) {
    return [&, which](const Slots& s) {
      const auto t = collision_terms(s[0], s[1], s[2], s[3], s[4], s[5], x, v, q);
      return which == 0 ? t.g1 : which == 1 ? t.g2 : which == 2 ? t.l1 : t.l2;
    };
  };
  // Slots: f=0 g=1 h=2 k=3 l=4 m=5.
  const std::vector<std::vector<std::vector<int>>> groups = {
      {{0}, {1, 2}, {3}, {4}, {5}},  // G1: (g, h) enters as a vector
      {{1}, {2}, {3}, {4}, {5}},     // G2
      {{0}, {1}, {2}, {3}, {4, 5}},  // L1: (l, m) enters as a vector
      {{0}, {1}, {2}, {4}, {5}},     // L2
  };
  for (int which = 0; which < 4; ++which) {
    const auto F = term(which);
    const double direct = F(a) - F(b);
    const double scale = std::abs(F(a)) + std::abs(F(b));
    EXPECT_NEAR(telescoped(F, a, b, groups[which]), direct, 1e-12 * scale) << "term " << which;
  }
}

TEST(TransportedTerms, ZeroShiftMatchesPointwise) {
  const auto w = unit();
  const auto q = coarse(w);
  std::mt19937_64 rng(25);
  const Field f = random_field(rng, q.grid);
  const auto t = transported_terms(f, 0.0, q, {true, true, true});
  for (int i : {3, 8}) {
    for (int j : {4, 9, 13}) {
      const std::size_t p = q.grid.index(i, j);
      const double x = q.grid.x(i), v = q.grid.v(j);
      const auto ref = collision_terms(f, f, f, f, f, f, x, v, q);
      EXPECT_NEAR(t.gain[p], ref.gain(), 1e-12 * ref.gain());
      EXPECT_NEAR(t.loss[p], ref.loss(), 1e-12 * ref.loss());
      EXPECT_NEAR(f(x, v) * t.rate[p], ref.loss(), 1e-12 * ref.loss());
    }
  }
}

TEST(TransportedTerms, AnalyticShiftMatchesComposedRule) {
  const auto w = unit();
  const auto q = coarse(w);
  const Field m = maxwellian(w);
  const double s = 0.7;
  const auto t = transported_terms(m, s, q);
  const Field ms = transport(m, s);
  for (int i : {5, 8}) {
    for (int j : {6, 10}) {
      const double x = q.grid.x(i), v = q.grid.v(j);
      // Q(s)(x, v) = C[T^s g](x + s v, v).
      const auto ref = collision_terms(ms, ms, ms, ms, ms, ms, x + s * v, v, q);
      EXPECT_NEAR(t.gain[q.grid.index(i, j)], ref.gain(), 1e-12 * ref.gain() + 1e-300);
    }
  }
}
