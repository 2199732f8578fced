#include <gtest/gtest.h>

#include <random>

#include "revortex/dynamics.hpp"
#include "revortex/rings.hpp"

using namespace revortex;

namespace {

const ConformalAtlas& sphere() {
  static const ConformalAtlas a = solve_conformal_map(sphere_profile(), 1e-9);
  return a;
}

const ConformalAtlas& quartic() {
  static const ConformalAtlas a = solve_conformal_map(quartic_profile(), 1e-9);
  return a;
}

const ConformalAtlas& pear() {
  static const ConformalAtlas a = solve_conformal_map(pear_profile(), 1e-9);
  return a;
}

VortexConfiguration random_config(std::mt19937& rng, int m) {
  std::uniform_real_distribution<double> lr(std::log(0.1), std::log(10.0)), th(0, two_pi);
  VortexConfiguration c;
  while (static_cast<int>(c.size()) < m) {
    double r = std::exp(lr(rng)), t = th(rng);
    Vec2 p{r * std::cos(t), r * std::sin(t)};
    bool ok = true;
    for (auto q : c.positions) ok = ok && norm(p - q) > 0.1;
    if (!ok) continue;
    c.positions.push_back(p);
    c.degrees.push_back(c.size() % 2 ? -1 : 1);
  }
  return c;
}

double max_dist(const VortexConfiguration& a, const VortexConfiguration& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, norm(a.positions[i] - b.positions[i]));
  return m;
}

}  // namespace

TEST(PvRhs, SymmetricSpherePair) {
  VortexConfiguration c{{{0.5, 0}, {2, 0}}, {1, -1}};
  auto v = pv_rhs(sphere(), c);
  EXPECT_NEAR(v[0].x, 0, 1e-14);
  EXPECT_NEAR(v[1].x, 0, 1e-14);
  EXPECT_NEAR(v[0].y / 0.5, -5.0 / 3, 1e-9);
  EXPECT_NEAR(v[1].y / 2.0, -5.0 / 3, 1e-9);
}

TEST(PvRhs, SingleVortexMatchesHamiltonianForm) {
  VortexConfiguration c{{{1, 0}}, {1}};
  auto v = pv_rhs(sphere(), c);
  // (r^2/alpha^2)(1 - alpha') p^perp / r^2 with alpha = 1, alpha' = 0 at the equator.
  EXPECT_NEAR(v[0].x, 0, 1e-14);
  EXPECT_NEAR(v[0].y, -1, 1e-9);
  auto w = pv_rhs_hamiltonian(sphere(), c);
  EXPECT_NEAR(norm(v[0] - w[0]), 0, 1e-10);
}

TEST(PvRhs, HamiltonianConsistency) {
  std::mt19937 rng(2);
  for (const ConformalAtlas* a : {&sphere(), &quartic(), &pear()}) {
    for (int k = 0; k < 100; ++k) {
      auto c = random_config(rng, 2 + k % 5);
      auto v = pv_rhs(*a, c);
      auto w = pv_rhs_hamiltonian(*a, c);
      for (std::size_t i = 0; i < c.size(); ++i) EXPECT_LE(norm(v[i] - w[i]), 1e-10 * std::max(1.0, norm(v[i])));
    }
  }
}

TEST(PvRhs, RotationEquivariance) {
  std::mt19937 rng(3);
  for (int k = 0; k < 20; ++k) {
    auto c = random_config(rng, 4);
    double beta = 0.37 * k;
    auto rc = c;
    for (auto& p : rc.positions) p = rotate(p, beta);
    auto v = pv_rhs(pear(), c), w = pv_rhs(pear(), rc);
    for (std::size_t i = 0; i < c.size(); ++i) EXPECT_LE(norm(rotate(v[i], beta) - w[i]), 1e-10);
  }
}

TEST(PvRhs, DegreeFlipReversesVelocities) {
  std::mt19937 rng(4);
  auto c = random_config(rng, 5);
  auto f = c;
  for (auto& d : f.degrees) d = -d;
  auto v = pv_rhs(quartic(), c), w = pv_rhs(quartic(), f);
  for (std::size_t i = 0; i < c.size(); ++i) {
    EXPECT_EQ(v[i].x, -w[i].x);
    EXPECT_EQ(v[i].y, -w[i].y);
  }
}

TEST(PvRhs, Guards) {
  EXPECT_THROW(pv_rhs(sphere(), {{{0.5, 0}, {0.5 + 1e-7, 0}}, {1, -1}}), DynamicsError);
  EXPECT_THROW(pv_rhs(sphere(), {{{1e-5, 0}, {2, 0}}, {1, -1}}), DynamicsError);
  EXPECT_THROW(pv_rhs(sphere(), {{{1e5, 0}, {2, 0}}, {1, -1}}), DynamicsError);
}

TEST(Integrate, SpherePairReturnsAfterPeriod) {
  VortexConfiguration c{{{0.5, 0}, {2, 0}}, {1, -1}};
  double T = two_pi / (5.0 / 3);
  auto tr = integrate(sphere(), c, T, T / 2000);
  ASSERT_FALSE(tr.failed);
  EXPECT_LE(max_dist(tr.final_state(), c), 1e-6);
  EXPECT_NEAR(tr.times.back(), T, 1e-12);
  for (std::size_t k = 1; k < tr.times.size(); ++k) EXPECT_GT(tr.times[k], tr.times[k - 1]);
}

TEST(Integrate, FourthOrderConvergence) {
  // A generic (non-rigid) configuration; errors against a fine reference.
  VortexConfiguration c{{{0.5, 0.1}, {1.4, -0.2}, {-0.6, 0.9}}, {1, -1, 1}};
  double T = 0.5;
  IntegrateOptions o;
  o.record_invariants = false;
  auto ref = integrate(quartic(), c, T, T / 4000, o).final_state();
  double e1 = max_dist(integrate(quartic(), c, T, T / 50, o).final_state(), ref);
  double e2 = max_dist(integrate(quartic(), c, T, T / 100, o).final_state(), ref);
  EXPECT_GT(e1 / e2, 12.0);
  EXPECT_LT(e1 / e2, 20.0);
}

TEST(Integrate, Conservation) {
  std::mt19937 rng(8);
  for (const ConformalAtlas* a : {&sphere(), &quartic(), &pear()}) {
    VortexConfiguration c{{{0.6, 0.1}, {1.3, -0.4}, {-0.7, 0.9}, {-1.6, -1.2}}, {1, -1, 1, -1}};
    auto tr = integrate(*a, c, 0.5, 0.001);
    ASSERT_FALSE(tr.failed);
    ASSERT_GE(tr.times.size(), 500u);
    auto I0 = tr.invariant_log.front();
    double area = a->total_area();
    for (auto& I : tr.invariant_log) {
      EXPECT_LE(std::abs(I.W - I0.W), 1e-8 * std::abs(I0.W));
      EXPECT_LE(std::abs(I.M - I0.M), 1e-8 * area);
    }
  }
}

TEST(Integrate, TimeReversal) {
  VortexConfiguration c{{{0.6, 0.1}, {1.3, -0.4}, {-0.7, 0.9}}, {1, -1, 1}};
  IntegrateOptions o;
  o.record_invariants = false;
  auto fwd = integrate(pear(), c, 1.0, 0.001, o);
  auto back = integrate(pear(), fwd.final_state(), 1.0, -0.001, o);
  EXPECT_LE(max_dist(back.final_state(), c), 1e-7);
}

TEST(Integrate, AdaptiveAgreesWithFixed) {
  VortexConfiguration c{{{0.6, 0.1}, {1.3, -0.4}, {-0.7, 0.9}}, {1, -1, 1}};
  IntegrateOptions o;
  o.record_invariants = false;
  auto fixed = integrate(quartic(), c, 1.0, 1e-4, o);
  o.method = Integrator::rk4_adaptive;
  o.adaptive_tol = 1e-12;
  auto adapt = integrate(quartic(), c, 1.0, 0.01, o);
  EXPECT_LE(max_dist(fixed.final_state(), adapt.final_state()), 1e-8);
  EXPECT_LT(adapt.times.size(), fixed.times.size());
}

TEST(Integrate, CollisionStopsWithPartialTrajectory) {
  // Two same-sign vortices pushed toward a third of opposite sign eventually
  // leave the guarded region; use a tight pole guard to force an early stop.
  VortexConfiguration c{{{0.5, 0}, {2, 0}}, {1, -1}};
  IntegrateOptions o;
  o.guards.r_min = 0.49;
  o.guards.collision = 1e-6;
  // r = 2 exceeds 1/0.49 only slightly; start state is valid, and a single
  // vortex drifting inward trips the guard.
  VortexConfiguration d{{{0.5, 0}, {0.5, 0.3}}, {1, 1}};
  auto tr = integrate(sphere(), d, 10.0, 0.01, o);
  EXPECT_TRUE(tr.failed);
  EXPECT_FALSE(tr.message.empty());
  EXPECT_LT(tr.times.back(), 10.0);
  EXPECT_EQ(tr.times.size(), tr.states.size());
  (void)c;
}

TEST(Invariants, SymmetricPairMoment) {
  for (const ConformalAtlas* a : {&sphere(), &quartic()}) {
    double r = 0.4;
    VortexConfiguration c{{{r, 0}, {1 / r, 0}}, {1, -1}};
    auto I = invariants(*a, c);
    EXPECT_NEAR(I.M, 2 * a->cap_area(r) - a->total_area(), 1e-9);
  }
}

TEST(Rings, QExamples) {
  EXPECT_EQ(ring_interaction_Q(1, 0.5, 2), 0.0);
  EXPECT_NEAR(ring_interaction_Q(2, 0.3, 1.7), 2 / 2.0, 1e-15);
  EXPECT_NEAR(0.5 * ring_interaction_Q(3, 0.5, 2) + 2 * ring_interaction_Q(3, 2, 0.5), 4, 1e-12);
}

TEST(Rings, QIdentity) {
  std::mt19937 rng(12);
  std::uniform_real_distribution<double> lr(std::log(0.05), std::log(20.0));
  for (int n = 1; n <= 8; ++n)
    for (int k = 0; k < 100; ++k) {
      double r1 = std::exp(lr(rng)), r2 = std::exp(lr(rng));
      EXPECT_NEAR(r1 * ring_interaction_Q(n, r1, r2) + r2 * ring_interaction_Q(n, r2, r1), 2 * n - 2, 1e-12);
    }
}

TEST(Rings, SphereOmega) {
  auto [w1, w2] = ring_omega(sphere(), 1, 0.5, 2);
  EXPECT_NEAR(w1, -5.0 / 3, 1e-9);
  EXPECT_NEAR(w2, -5.0 / 3, 1e-9);
  auto [u1, u2] = ring_omega(sphere(), 2, 0.5, 2);
  EXPECT_NEAR(u1, u2, 1e-12);
  EXPECT_GT(std::abs(ring_residual(sphere(), 2, 0.5, 3)), 1e-3);
  EXPECT_THROW(ring_residual(sphere(), 2, 0.5, 0.5), DomainError);
}

TEST(Rings, ResidualExchangeSymmetry) {
  for (const ConformalAtlas* a : {&sphere(), &pear()})
    for (int n : {1, 2, 3}) EXPECT_NEAR(ring_residual(*a, n, 0.4, 1.7), ring_residual(*a, n, 1.7, 0.4), 1e-12);
}

TEST(Rings, SymmetricFamilyRotatesRigidly) {
  for (const ConformalAtlas* a : {&sphere(), &quartic()}) {
    for (int n : {1, 2, 3, 5}) {
      for (int k = 0; k < 20; ++k) {
        double r = 0.05 * std::pow(0.95 / 0.05, k / 19.0);
        EXPECT_LE(std::abs(ring_residual(*a, n, r, 1 / r)), 1e-10);
        if (std::abs(r - 1 / r) < 1e-3) continue;
        auto ring = find_symmetric_ring(*a, n, a->s_of_r(r));
        auto [w1, w2] = ring_omega(*a, n, ring.r1, ring.r2);
        EXPECT_NEAR(w1, w2, 1e-9 * std::max(1.0, std::abs(w1)));
        auto c = expand(ring);
        auto v = pv_rhs(*a, c);
        for (std::size_t i = 0; i < c.size(); ++i)
          EXPECT_LE(norm(v[i] - ring.omega0 * perp(c.positions[i])), 1e-9 * std::max(1.0, norm(v[i])));
      }
    }
  }
}

TEST(Rings, FindSymmetric) {
  auto ring = find_symmetric_ring(sphere(), 1, 2 * std::atan(0.5));
  EXPECT_NEAR(ring.r1, 0.5, 1e-12);
  EXPECT_NEAR(ring.r2, 2, 1e-11);
  EXPECT_NEAR(ring.omega0, -5.0 / 3, 1e-9);
  EXPECT_THROW(find_symmetric_ring(pear(), 1, 1.0), DomainError);
  EXPECT_THROW(find_symmetric_ring(sphere(), 1, 2.0), InputError);
  EXPECT_THROW(find_symmetric_ring(sphere(), 1, pi / 2 - 5e-4), InputError);
}

TEST(Rings, GeneralRecoversMirror) {
  auto ring = find_ring_general(quartic(), 2, 0.4, {1.5, 4});
  ASSERT_TRUE(ring.has_value());
  EXPECT_NEAR(ring->r2, 2.5, 1e-8);
  EXPECT_THROW(find_ring_general(quartic(), 2, 0.4, {0.3, 4}), InputError);
}

TEST(Rings, GeneralNoSignChange) {
  // Far side of the sphere pair: residual keeps its sign on (3, 10).
  EXPECT_FALSE(find_ring_general(sphere(), 1, 0.5, {3, 10}).has_value());
}

TEST(Rings, ExpandCounts) {
  RingSolution r;
  r.n = 3;
  r.r1 = 0.5;
  r.r2 = 2;
  auto c = expand(r);
  EXPECT_EQ(c.size(), 6u);
  EXPECT_EQ(c.total_degree(), 0);
  r.n = 1;
  auto d = expand(r);
  EXPECT_EQ(d.positions[0], (Vec2{0.5, 0}));
  EXPECT_EQ(d.positions[1], (Vec2{2, 0}));
}

TEST(Rings, PearRootRotatesRigidly) {
  auto ring = find_ring_general(pear(), 1, 0.5, {1.2, 5});
  ASSERT_TRUE(ring.has_value());
  EXPECT_LE(std::abs(ring->residual), 1e-10);
  auto c = expand(*ring);
  auto tr = integrate(pear(), c, ring_period(*ring), ring_period(*ring) / 2000);
  ASSERT_FALSE(tr.failed);
  EXPECT_LE(max_dist(tr.final_state(), c), 1e-5);
}

TEST(Rings, NegatedDegreesFlipRotation) {
  auto ring = find_symmetric_ring(quartic(), 3, 0.8);
  auto c = expand(ring);
  for (auto& d : c.degrees) d = -d;
  auto v = pv_rhs(quartic(), c);
  for (std::size_t i = 0; i < c.size(); ++i)
    EXPECT_LE(norm(v[i] + ring.omega0 * perp(c.positions[i])), 1e-9 * std::max(1.0, norm(v[i])));
}

TEST(Rings, DistancesConstantAlongRing) {
  auto ring = find_symmetric_ring(quartic(), 3, 0.9);
  auto c = expand(ring);
  auto tr = integrate(quartic(), c, ring_period(ring), ring_period(ring) / 2000);
  ASSERT_FALSE(tr.failed);
  for (auto& st : tr.states)
    for (std::size_t i = 0; i < c.size(); ++i)
      for (std::size_t j = i + 1; j < c.size(); ++j)
        EXPECT_NEAR(norm(st.positions[i] - st.positions[j]), norm(c.positions[i] - c.positions[j]), 1e-6);
}
