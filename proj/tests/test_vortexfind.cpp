#include <gtest/gtest.h>

#include "revortex/ansatz.hpp"
#include "revortex/vortexfind.hpp"

using namespace revortex;

namespace {

const ConformalAtlas& sphere() {
  static const ConformalAtlas a = solve_conformal_map(sphere_profile(), 1e-9);
  return a;
}

std::shared_ptr<const Grid> sphere_grid(int nt, int ns) { return std::make_shared<Grid>(sphere_profile(), nt, ns); }

ComplexField winding_field(std::shared_ptr<const Grid> g, int d, bool with_modulus) {
  ComplexField u(g, 0.1, 0.0);
  for (int k = 0; k < g->n_s(); ++k)
    for (int j = 0; j < g->n_theta(); ++j)
      u(k, j) = (with_modulus ? g->alpha(k) : 1.0) * std::polar(1.0, d * g->theta(j));
  return u;
}

RingSolution sphere_ring(int n, double r1) { return make_ring(sphere(), n, r1, 1 / r1); }

}  // namespace

TEST(Degree, SingleWindingOnLatitude) {
  auto g = sphere_grid(64, 32);
  const ComplexField u = winding_field(g, 1, false);
  const auto r = degree(u, latitude_loop(u, 16));
  EXPECT_EQ(r.degree, 1);
  EXPECT_LT(r.defect, 1e-12);
  EXPECT_EQ(degree(winding_field(g, -1, false), latitude_loop(u, 16)).degree, -1);
  EXPECT_EQ(degree(winding_field(g, 3, false), latitude_loop(u, 16)).degree, 3);
}

TEST(Degree, ZeroOnLoopIsDomainError) {
  auto g = sphere_grid(16, 8);
  ComplexField u = winding_field(g, 1, false);
  u(4, 3) = 0;
  EXPECT_THROW(degree(u, latitude_loop(u, 4)), DomainError);
}

TEST(Detect, ConstantFieldHasNoVortices) {
  auto g = sphere_grid(64, 32);
  EXPECT_TRUE(detect_vortices(ComplexField(g, 0.1, 1.0)).empty());
}

TEST(Detect, PoleVortexIsRejected) {
  auto g = sphere_grid(64, 32);
  EXPECT_THROW(detect_vortices(winding_field(g, 1, true)), DetectionError);
}

TEST(Detect, RejectsBadThreshold) {
  auto g = sphere_grid(16, 8);
  DetectOptions o;
  o.threshold = 1.5;
  EXPECT_THROW(detect_vortices(ComplexField(g, 0.1, 1.0), o), InputError);
}

TEST(Detect, AnsatzRingsOfThree) {
  auto g = sphere_grid(384, 128);
  const RingSolution ring = sphere_ring(3, 0.5);
  const ComplexField u = build_ansatz(sphere(), g, ring, 0.1);
  const auto found = detect_vortices(u);
  ASSERT_EQ(found.size(), 6u);
  int total = 0;
  for (const auto& v : found) {
    total += v.degree;
    EXPECT_FALSE(v.flagged);
    EXPECT_LE(v.defect, 1e-6);
    if (v.degree == 1) EXPECT_NEAR(v.center.s, ring.s1, g->ds());
    else EXPECT_NEAR(v.center.s, ring.s2, g->ds());
  }
  EXPECT_EQ(total, 0);
  const OrbitReport rep = compare_orbits(found, ring, g->length());
  EXPECT_LE(rep.error_plus, g->ds());
  EXPECT_LE(rep.error_minus, g->ds());
  EXPECT_LE(rep.mirror_defect, 2 * g->ds());
  EXPECT_LE(rep.spacing_plus, 2 * g->dtheta());
  EXPECT_LE(rep.spacing_minus, 2 * g->dtheta());
}

TEST(Detect, DegreeIndependentOfLoopSize) {
  auto g = sphere_grid(256, 128);
  const ComplexField u = build_ansatz(sphere(), g, sphere_ring(1, 0.5), 0.1);
  for (const auto& v : detect_vortices(u)) {
    const int kc = static_cast<int>(v.center.s / g->ds());
    const int jc = static_cast<int>(std::lround(v.center.theta / g->dtheta()));
    const int kr = static_cast<int>(std::ceil(v.radius / g->ds())) + 1;
    const int jr = static_cast<int>(std::ceil(v.radius / (g->alpha(kc) * g->dtheta()))) + 1;
    for (int f : {1, 2}) {
      const auto loop = rectangle_loop(kc - f * kr, kc + f * kr, jc - f * jr, jc + f * jr);
      EXPECT_EQ(degree(u, loop).degree, v.degree) << f;
    }
  }
}

TEST(Detect, RotationPermutesVortices) {
  auto g = sphere_grid(384, 128);
  const ComplexField u = build_ansatz(sphere(), g, sphere_ring(3, 0.5), 0.1);
  ComplexField v = u;
  const int shift = g->n_theta() / 3;
  for (int k = 0; k < g->n_s(); ++k)
    for (int j = 0; j < g->n_theta(); ++j) v(k, (j + shift) % g->n_theta()) = u(k, j);
  const auto a = detect_vortices(u), b = detect_vortices(v);
  ASSERT_EQ(a.size(), b.size());
  for (const auto& x : a) {
    bool matched = false;
    for (const auto& y : b) {
      const double dth = std::abs(wrap_angle(x.center.theta - y.center.theta));
      if (x.degree == y.degree && std::abs(x.center.s - y.center.s) <= g->ds() && dth <= g->dtheta()) matched = true;
    }
    EXPECT_TRUE(matched);
  }
}

TEST(CompareOrbits, WrongCountIsError) {
  const RingSolution ring = sphere_ring(2, 0.5);
  std::vector<DetectedVortex> v(1);
  v[0].degree = 1;
  EXPECT_THROW(compare_orbits(v, ring, pi), ComparisonError);
}
