#include <gtest/gtest.h>

#include <random>

#include "revortex/ansatz.hpp"
#include "revortex/field.hpp"
#include "revortex/rings.hpp"

using namespace revortex;

namespace {

const ConformalAtlas& sphere() {
  static const ConformalAtlas a = solve_conformal_map(sphere_profile(), 1e-9);
  return a;
}

std::shared_ptr<const Grid> sphere_grid(int nt, int ns) { return std::make_shared<Grid>(sphere_profile(), nt, ns); }

ComplexField random_field(std::shared_ptr<const Grid> g, double eps, std::mt19937& rng, double amp = 1.0) {
  std::normal_distribution<double> N(0, 1);
  ComplexField u(g, eps, 0.0);
  for (auto& v : u.values) v = cplx(1 + amp * 0.3 * N(rng), amp * 0.3 * N(rng));
  return u;
}

// Smooth random field: a few low modes in theta and s.
ComplexField smooth_field(std::shared_ptr<const Grid> g, double eps, std::mt19937& rng) {
  std::normal_distribution<double> N(0, 1);
  ComplexField u(g, eps, 0.0);
  cplx c[3][3];
  for (auto& row : c)
    for (auto& x : row) x = cplx(N(rng), N(rng)) * 0.3;
  for (int k = 0; k < g->n_s(); ++k)
    for (int j = 0; j < g->n_theta(); ++j) {
      cplx v = 1.0;
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
          v += c[a][b] * std::cos(a * g->s(k)) * std::polar(1.0, b * g->theta(j));
      u(k, j) = v;
    }
  return u;
}

double directional_fd(const std::function<double(const ComplexField&)>& F, const ComplexField& u,
                      const ComplexField& du, double h) {
  ComplexField p = u, m = u;
  for (std::size_t i = 0; i < u.values.size(); ++i) {
    p.values[i] += h * du.values[i];
    m.values[i] -= h * du.values[i];
  }
  return (F(p) - F(m)) / (2 * h);
}

RingSolution sphere_ring(int n, double r1) { return make_ring(sphere(), n, r1, 1 / r1); }

}  // namespace

TEST(Grid, AreaMatchesSphere) {
  auto g = sphere_grid(256, 128);
  EXPECT_NEAR(g->total_area(), 4 * pi, 4 * pi * 1e-3);
}

TEST(Grid, NodesAvoidPoles) {
  auto g = sphere_grid(16, 8);
  EXPECT_GT(g->s(0), 0);
  EXPECT_LT(g->s(g->n_s() - 1), g->length());
  EXPECT_DOUBLE_EQ(g->s(0), g->ds() / 2);
}

TEST(Grid, RejectsTinyGrid) { EXPECT_THROW(Grid(sphere_profile(), 2, 8), InputError); }

TEST(Energy, ConstantFields) {
  auto g = sphere_grid(64, 32);
  EXPECT_EQ(gl_energy(ComplexField(g, 0.1, 1.0)), 0.0);
  const double e0 = gl_energy(ComplexField(g, 0.1, 0.0));
  EXPECT_NEAR(e0, pi / 0.01, pi / 0.01 * 5e-3);
  EXPECT_NEAR(e0, g->total_area() / (4 * 0.01), 1e-9 * e0);
}

TEST(Energy, PhaseInvariance) {
  std::mt19937 rng(3);
  auto g = sphere_grid(64, 32);
  const ComplexField u = random_field(g, 0.2, rng);
  ComplexField v = u;
  for (auto& x : v.values) x *= std::polar(1.0, 0.7);
  EXPECT_NEAR(gl_energy(v), gl_energy(u), 1e-12 * gl_energy(u));
  EXPECT_NEAR(momentum(v), momentum(u), 1e-12 * std::max(1.0, std::abs(momentum(u))));
}

TEST(Energy, DescentAlongNegativeGradient) {
  std::mt19937 rng(4);
  auto g = sphere_grid(64, 32);
  const ComplexField u = smooth_field(g, 0.2, rng);
  const ComplexField G = gl_gradient(u);
  ComplexField v = u;
  for (std::size_t i = 0; i < v.values.size(); ++i) v.values[i] -= 1e-4 * G.values[i];
  EXPECT_LT(gl_energy(v), gl_energy(u));
}

TEST(Energy, GradientMatchesFiniteDifferences) {
  std::mt19937 rng(5);
  auto g = sphere_grid(32, 16);
  for (int trial = 0; trial < 10; ++trial) {
    const ComplexField u = random_field(g, 0.3, rng);
    const ComplexField du = random_field(g, 0.3, rng);
    const double fd = directional_fd(gl_energy, u, du, 1e-5);
    const double an = inner(gl_gradient(u), du);
    EXPECT_NEAR(an, fd, 1e-6 * std::abs(fd)) << trial;
  }
}

TEST(Energy, GradientOfConstantIsZero) {
  auto g = sphere_grid(32, 16);
  EXPECT_EQ(l2_norm(gl_gradient(ComplexField(g, 0.1, 1.0))), 0.0);
}

TEST(Laplacian, SphericalHarmonicConverges) {
  // cos(s) is an eigenfunction with eigenvalue -2 on the unit sphere.
  auto err = [](int ns) {
    auto g = sphere_grid(8, ns);
    ComplexField u(g, 0.1, 0.0);
    for (int k = 0; k < ns; ++k)
      for (int j = 0; j < 8; ++j) u(k, j) = std::cos(g->s(k));
    ComplexField L = laplacian(u);
    for (std::size_t i = 0; i < L.values.size(); ++i) L.values[i] += 2.0 * u.values[i];
    return l2_norm(L);
  };
  const double e1 = err(64), e2 = err(128);
  EXPECT_LT(e1, 1e-2);
  EXPECT_GT(e1 / e2, 3.0);
}

TEST(Momentum, ConstantIsZero) {
  auto g = sphere_grid(32, 16);
  EXPECT_EQ(momentum(ComplexField(g, 0.1, cplx(0.3, 0.4))), 0.0);
}

TEST(Momentum, SingleWindingGivesArea) {
  auto g = sphere_grid(256, 128);
  ComplexField u(g, 0.1, 0.0);
  for (int k = 0; k < g->n_s(); ++k)
    for (int j = 0; j < g->n_theta(); ++j) u(k, j) = std::polar(1.0, g->theta(j));
  EXPECT_NEAR(momentum(u), 4 * pi, 4 * pi * 1e-3);
}

TEST(Momentum, GradientMatchesFiniteDifferences) {
  std::mt19937 rng(6);
  auto g = sphere_grid(32, 16);
  for (int trial = 0; trial < 10; ++trial) {
    const ComplexField u = random_field(g, 0.3, rng);
    const ComplexField du = random_field(g, 0.3, rng);
    const double fd = directional_fd(momentum, u, du, 1e-5);
    const double an = inner(momentum_gradient(u), du);
    EXPECT_NEAR(an, fd, 1e-6 * std::max(1.0, std::abs(fd))) << trial;
  }
}

TEST(Momentum, RealFieldGradientOrthogonal) {
  std::mt19937 rng(7);
  auto g = sphere_grid(32, 16);
  ComplexField u = random_field(g, 0.3, rng);
  for (auto& x : u.values) x = x.real();
  EXPECT_NEAR(inner(momentum_gradient(u), u), 0.0, 1e-10);
}

TEST(Momentum, ScalingDerivativeIsTwiceMomentum) {
  auto g = sphere_grid(64, 32);
  ComplexField u(g, 0.1, 0.0);
  for (int k = 0; k < g->n_s(); ++k)
    for (int j = 0; j < g->n_theta(); ++j) u(k, j) = std::polar(1.0, g->theta(j));
  EXPECT_NEAR(inner(momentum_gradient(u), u), 2 * momentum(u), 1e-10 * momentum(u));
}

TEST(Residual, ConstantFieldIsStationary) {
  auto g = sphere_grid(32, 16);
  EXPECT_EQ(gp_residual(ComplexField(g, 0.1, 1.0), 3.0), 0.0);
}

TEST(Symmetrize, ProjectsRandomField) {
  std::mt19937 rng(8);
  auto g = sphere_grid(60, 32);
  for (int n : {1, 2, 3, 5}) {
    const ComplexField s = symmetrize(random_field(g, 0.2, rng), n);
    EXPECT_TRUE(is_symmetric(s, n)) << n;
    const ComplexField s2 = symmetrize(s, n);
    for (std::size_t i = 0; i < s.values.size(); ++i) EXPECT_LE(std::abs(s2.values[i] - s.values[i]), 1e-15);
  }
}

TEST(Symmetrize, RejectsIndivisibleGrid) {
  auto g = sphere_grid(64, 32);
  EXPECT_THROW(symmetrize(ComplexField(g, 0.1, 1.0), 3), InputError);
}

TEST(Symmetrize, GradientPreservesSymmetry) {
  std::mt19937 rng(9);
  auto g = sphere_grid(60, 32);
  const ComplexField s = symmetrize(random_field(g, 0.2, rng), 3);
  EXPECT_TRUE(is_symmetric(gl_gradient(s), 3));
  EXPECT_TRUE(is_symmetric(laplacian(s), 3));
}

TEST(Interpolate, ReproducesSmoothField) {
  std::mt19937 rng(10);
  auto coarse = sphere_grid(64, 32);
  auto fine = sphere_grid(128, 64);
  const ComplexField u = smooth_field(coarse, 0.2, rng);
  const ComplexField v = interpolate(u, fine, 0.1);
  EXPECT_EQ(v.eps, 0.1);
  // Compare against the same smooth field sampled on the fine grid.
  std::mt19937 rng2(10);
  const ComplexField w = smooth_field(fine, 0.1, rng2);
  double worst = 0;
  for (int k = 2; k < fine->n_s() - 2; ++k)
    for (int j = 0; j < fine->n_theta(); ++j) worst = std::max(worst, std::abs(v(k, j) - w(k, j)));
  EXPECT_LT(worst, 2e-2);
}

TEST(Ansatz, MomentumNearClosedForm) {
  const double s1 = 2 * std::atan(0.5);
  auto g = sphere_grid(256, 128);
  const ComplexField u = build_ansatz(sphere(), g, sphere_ring(1, 0.5), 0.1);
  EXPECT_NEAR(momentum(u), 4 * pi * std::cos(s1), 0.02 * 4 * pi * std::cos(s1));
}

TEST(Ansatz, UnitModulusOutsideBalls) {
  const double eps = 0.1;
  auto g = sphere_grid(256, 128);
  const RingSolution ring = sphere_ring(2, 0.5);
  const ComplexField u = build_ansatz(sphere(), g, ring, eps);
  EXPECT_TRUE(is_symmetric(u, 2));
  int inside = 0;
  for (int k = 0; k < g->n_s(); ++k)
    for (int j = 0; j < g->n_theta(); ++j) {
      const double a = sphere().profile().alpha(g->s(k)), b = sphere().profile().beta(g->s(k));
      double rho = INFINITY;
      for (const ArcPoint& c : {ArcPoint{0, ring.s1}, ArcPoint{pi, ring.s1}, ArcPoint{0, ring.s2}, ArcPoint{pi, ring.s2}}) {
        const double ac = sphere().profile().alpha(c.s), bc = sphere().profile().beta(c.s);
        const double th = g->theta(j);
        rho = std::min(rho, std::hypot(a * std::cos(th) - ac * std::cos(c.theta), a * std::sin(th) - ac * std::sin(c.theta), b - bc));
      }
      if (rho >= eps + eps * eps) EXPECT_NEAR(std::abs(u(k, j)), 1.0, 1e-15);
      else ++inside;
    }
  EXPECT_GT(inside, 0);
}

TEST(Ansatz, RejectsUnderResolvedGrid) {
  auto g = sphere_grid(64, 32);
  EXPECT_THROW(build_ansatz(sphere(), g, sphere_ring(1, 0.5), 0.1), InputError);
}

TEST(Ansatz, RejectsOverlappingBalls) {
  auto g = sphere_grid(256, 512);
  // Rings of 8 vortices close to the equator are closer than 2(eps + eps^2).
  EXPECT_THROW(build_ansatz(sphere(), g, sphere_ring(8, 0.95), 0.05), InputError);
}

TEST(Ansatz, ResidualLargeBeforeMinimization) {
  auto g = sphere_grid(256, 128);
  const ComplexField u = build_ansatz(sphere(), g, sphere_ring(1, 0.5), 0.1);
  EXPECT_GT(gp_residual(u, lagrange_omega(u)), 1e-2);
}
