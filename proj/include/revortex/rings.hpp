#pragma once

#include <cmath>
#include <optional>
#include <utility>

#include <boost/math/tools/toms748_solve.hpp>

#include "revortex/renorm.hpp"

namespace revortex {

/// Two latitude rings of n vortices each, degrees +1 at radius r1 and -1 at
/// radius r2, rotating rigidly with angular velocity omega0.
struct RingSolution {
  int n = 1;
  double r1 = 0, r2 = 0;
  double omega0 = 0;
  double s1 = 0, s2 = 0;
  double residual = 0;
};

/// Pair interaction of ring 1 with the off-axis vortices of ring 2.
inline double ring_interaction_Q(int n, double r1, double r2) {
  if (n < 1) throw InputError("ring_interaction_Q: n must be positive");
  if (!(r1 > 0 && r2 > 0)) throw DomainError("ring_interaction_Q: radii must be positive");
  double q = 0;
  for (int j = 2; j <= (n + 1) / 2; ++j) {
    const double c = std::cos(two_pi * (j - 1) / n);
    q += 4 * (r1 - r2 * c) / (r1 * r1 + r2 * r2 - 2 * r1 * r2 * c);
  }
  if (n % 2 == 0) q += 2 / (r1 + r2);
  return q;
}

namespace detail {

inline std::pair<double, double> ring_brackets(const ConformalAtlas& atlas, int n, double r1, double r2) {
  if (n < 1) throw InputError("ring: n must be positive");
  if (!(r1 > 0 && r2 > 0) || !std::isfinite(r1) || !std::isfinite(r2))
    throw DomainError("ring: radii must be positive and finite");
  if (r1 == r2) throw DomainError("ring: r1 = r2");
  const double a1 = atlas.alpha_of_r(r1), a1p = atlas.alpha_prime_of_r(r1);
  const double a2 = atlas.alpha_of_r(r2), a2p = atlas.alpha_prime_of_r(r2);
  const double b1 = (n - a1p - 2 * r1 / (r1 - r2) - r1 * ring_interaction_Q(n, r1, r2)) / (a1 * a1);
  const double b2 = (n - a2p + 2 * r2 / (r1 - r2) - r2 * ring_interaction_Q(n, r2, r1)) / (a2 * a2);
  return {b1, b2};
}

}  // namespace detail

/// Mismatch between the rotation rates demanded by the two rings.
inline double ring_residual(const ConformalAtlas& atlas, int n, double r1, double r2) {
  const auto [b1, b2] = detail::ring_brackets(atlas, n, r1, r2);
  return b1 + b2;
}

/// Angular velocity (counter-clockwise) required by ring 1 and by ring 2.
inline std::pair<double, double> ring_omega(const ConformalAtlas& atlas, int n, double r1, double r2) {
  const auto [b1, b2] = detail::ring_brackets(atlas, n, r1, r2);
  return {-b1, b2};
}

inline RingSolution make_ring(const ConformalAtlas& atlas, int n, double r1, double r2) {
  RingSolution s;
  s.n = n;
  s.r1 = r1;
  s.r2 = r2;
  s.omega0 = ring_omega(atlas, n, r1, r2).first;
  s.residual = ring_residual(atlas, n, r1, r2);
  s.s1 = atlas.s_of_r(r1);
  s.s2 = atlas.s_of_r(r2);
  return s;
}

/// Mirror-symmetric ring pair at latitudes s1 and l - s1.
inline RingSolution find_symmetric_ring(const ConformalAtlas& atlas, int n, double s1, double tol = 1e-10) {
  if (!atlas.symmetric()) throw DomainError("find_symmetric_ring: surface is not mirror symmetric");
  const double l = atlas.length();
  if (n < 1) throw InputError("find_symmetric_ring: n must be positive");
  if (!(s1 > 0 && s1 < l / 2)) throw InputError("find_symmetric_ring: s1 must lie in (0, l/2)");
  if (l / 2 - s1 < 1e-3) throw InputError("find_symmetric_ring: s1 too close to the equator");
  const double r1 = atlas.r_of_s(s1), r2 = 1 / r1;
  if (std::abs(r1 - r2) < 1e-3) throw InputError("find_symmetric_ring: rings too close");
  RingSolution s = make_ring(atlas, n, r1, r2);
  s.s2 = l - s1;
  if (!(std::abs(s.residual) <= tol))
    throw SolverError("find_symmetric_ring: residual " + std::to_string(s.residual) + " above tolerance");
  return s;
}

struct RingSearchOptions {
  int scan_points = 64;
  int max_iterations = 200;
  double tol = 1e-10;
};

/// Root r2 of the ring residual for fixed r1 inside a bracket of r2 values.
/// Returns nothing when the residual does not change sign on the scan.
inline std::optional<RingSolution> find_ring_general(const ConformalAtlas& atlas, int n, double r1,
                                                     std::pair<double, double> bracket,
                                                     RingSearchOptions opt = {}) {
  auto [lo, hi] = bracket;
  if (lo > hi) std::swap(lo, hi);
  if (!(lo > 0) || !std::isfinite(hi)) throw InputError("find_ring_general: bracket must be positive and finite");
  if (r1 >= lo && r1 <= hi) throw InputError("find_ring_general: bracket contains r1");
  auto f = [&](double r2) { return ring_residual(atlas, n, r1, r2); };

  const int N = std::max(2, opt.scan_points);
  const double ratio = std::pow(hi / lo, 1.0 / (N - 1));
  double a = lo, fa = f(a);
  for (int k = 1; k < N; ++k) {
    const double b = k == N - 1 ? hi : lo * std::pow(ratio, k);
    const double fb = f(b);
    if (fa == 0) return make_ring(atlas, n, r1, a);
    if ((fa < 0) != (fb < 0)) {
      std::uintmax_t iters = opt.max_iterations;
      auto stop = [](double x, double y) { return std::abs(x - y) <= 4e-16 * std::max(std::abs(x), std::abs(y)); };
      auto [x0, x1] = boost::math::tools::toms748_solve(f, a, b, fa, fb, stop, iters);
      const double f0 = f(x0), f1 = f(x1);
      const double root = std::abs(f0) <= std::abs(f1) ? x0 : x1;
      RingSolution s = make_ring(atlas, n, r1, root);
      if (std::abs(s.residual) <= opt.tol) return s;
      // A sign change across a pole of the residual is not a root; keep scanning.
    }
    a = b;
    fa = fb;
  }
  return std::nullopt;
}

/// The 2n vortices of a ring solution.
inline VortexConfiguration expand(const RingSolution& ring) {
  VortexConfiguration c;
  for (int k = 0; k < ring.n; ++k) {
    const double t = two_pi * k / ring.n;
    c.positions.push_back({ring.r1 * std::cos(t), ring.r1 * std::sin(t)});
    c.degrees.push_back(1);
  }
  for (int k = 0; k < ring.n; ++k) {
    const double t = two_pi * k / ring.n;
    c.positions.push_back({ring.r2 * std::cos(t), ring.r2 * std::sin(t)});
    c.degrees.push_back(-1);
  }
  return c;
}

/// Time for one full rotation of a ring solution.
inline double ring_period(const RingSolution& ring) {
  if (ring.omega0 == 0) throw DomainError("ring_period: ring does not rotate");
  return two_pi / std::abs(ring.omega0);
}

}  // namespace revortex
