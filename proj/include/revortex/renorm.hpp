#pragma once

#include <array>
#include <cmath>
#include <numeric>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

#include "revortex/atlas.hpp"

namespace revortex {

/// Point vortices in the conformal plane.
struct VortexConfiguration {
  std::vector<Vec2> positions;
  std::vector<int> degrees;

  std::size_t size() const { return positions.size(); }
  int total_degree() const { return std::accumulate(degrees.begin(), degrees.end(), 0); }

  double min_separation() const {
    double m = INFINITY;
    for (std::size_t i = 0; i < size(); ++i)
      for (std::size_t j = i + 1; j < size(); ++j) m = std::min(m, norm(positions[i] - positions[j]));
    return m;
  }

  /// Throws unless sizes match, degrees are nonzero and positions are finite and distinct.
  void check() const {
    if (positions.size() != degrees.size()) throw InputError("vortex configuration: size mismatch");
    for (int d : degrees)
      if (d == 0) throw InputError("vortex configuration: zero degree");
    for (auto p : positions)
      if (!std::isfinite(p.x) || !std::isfinite(p.y)) throw DomainError("vortex configuration: non-finite position");
    if (!(min_separation() > 0)) throw DomainError("vortex configuration: coincident vortices");
  }
};

/// W = pi sum d_i^2 f(b_i) - pi sum_{i != j} d_i d_j ln|b_i - b_j|.
inline double renormalized_energy(const ConformalAtlas& atlas, const VortexConfiguration& c) {
  c.check();
  double self = 0, pair = 0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    const double d = c.degrees[i];
    self += d * d * atlas.conformal_factor(c.positions[i]);
    for (std::size_t j = i + 1; j < c.size(); ++j)
      pair += 2.0 * c.degrees[i] * c.degrees[j] * std::log(norm(c.positions[i] - c.positions[j]));
  }
  return pi * (self - pair);
}

inline Vec2 grad_renormalized_energy(const ConformalAtlas& atlas, const VortexConfiguration& c, std::size_t i) {
  c.check();
  if (i >= c.size()) throw InputError("grad_renormalized_energy: index out of range");
  const double di = c.degrees[i];
  Vec2 g = pi * di * di * atlas.grad_conformal_factor(c.positions[i]);
  for (std::size_t j = 0; j < c.size(); ++j) {
    if (j == i) continue;
    const Vec2 d = c.positions[i] - c.positions[j];
    g -= (2 * pi * di * c.degrees[j] / norm2(d)) * d;
  }
  return g;
}

// ---------------------------------------------------------------------------
// Harmonic phase from unit-sphere chords

namespace detail {

/// Image of a surface point on the unit reference sphere, (sin phi cos theta, sin phi sin theta, cos phi).
inline std::array<double, 3> unit_sphere(const ConformalAtlas& atlas, const SurfacePoint& p) {
  const auto q = std::get<SphericalPoint>(convert(atlas, p, Representation::spherical));
  return {std::sin(q.phi) * std::cos(q.theta), std::sin(q.phi) * std::sin(q.theta), std::cos(q.phi)};
}

inline double chord(const std::array<double, 3>& a, const std::array<double, 3>& b) {
  return std::sqrt((a[0] - b[0]) * (a[0] - b[0]) + (a[1] - b[1]) * (a[1] - b[1]) + (a[2] - b[2]) * (a[2] - b[2]));
}

}  // namespace detail

/// Phi_0(x) = ln|x~ - p1~| - ln|x~ - p2~| with chords on the unit sphere.
inline double phi0(const ConformalAtlas& atlas, const SurfacePoint& x, const SurfacePoint& p1,
                   const SurfacePoint& p2) {
  const auto X = detail::unit_sphere(atlas, x), P1 = detail::unit_sphere(atlas, p1),
             P2 = detail::unit_sphere(atlas, p2);
  const double c1 = detail::chord(X, P1), c2 = detail::chord(X, P2);
  if (!(c1 > 0) || !(c2 > 0)) throw DomainError("phi0: x coincides with a vortex");
  return std::log(c1) - std::log(c2);
}

/// sum_i d_i ln|x~ - p_i~|; total degree must vanish.
inline double phi0(const ConformalAtlas& atlas, const SurfacePoint& x, const VortexConfiguration& c) {
  if (c.total_degree() != 0) throw InputError("phi0: total degree must be zero");
  const auto X = detail::unit_sphere(atlas, x);
  double v = 0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    const double ch = detail::chord(X, detail::unit_sphere(atlas, PlanePoint{c.positions[i].x, c.positions[i].y}));
    if (!(ch > 0)) throw DomainError("phi0: x coincides with a vortex");
    v += c.degrees[i] * std::log(ch);
  }
  return v;
}

/// Plane gradient of sum_i d_i ln|x~ - p_i~|:
/// sum_i d_i [(x - p_i)/|x - p_i|^2 - x/(1 + |x|^2)].
inline Vec2 grad_phi0(Vec2 x, const VortexConfiguration& c) {
  Vec2 g{};
  const double total = c.total_degree();
  for (std::size_t i = 0; i < c.size(); ++i) {
    const Vec2 d = x - c.positions[i];
    const double d2 = norm2(d);
    if (!(d2 > 0)) throw DomainError("grad_phi0: x coincides with a vortex");
    g += (c.degrees[i] / d2) * d;
  }
  return g - (total / (1 + norm2(x))) * x;
}

inline VortexConfiguration vortex_pair(Vec2 p1, Vec2 p2) { return {{p1, p2}, {1, -1}}; }

/// Closed polyline or open path in the plane.
using Polyline = std::vector<Vec2>;

struct ChiOptions {
  /// Vortex exclusion radius for path routing (plane units).
  double exclusion = 1e-3;
};

namespace detail {

inline double distance_to_segment(Vec2 p, Vec2 a, Vec2 b) {
  const Vec2 ab = b - a;
  const double L2 = norm2(ab);
  double t = L2 > 0 ? dot(p - a, ab) / L2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return norm(a + t * ab - p);
}

/// Line integral of <grad^perp Phi_0, t> along one segment, subdivided so that
/// every Gauss-Legendre panel is short compared with its distance to the vortices.
inline double segment_flux(Vec2 a, Vec2 b, const VortexConfiguration& c, int depth = 0) {
  const double L = norm(b - a);
  if (L == 0) return 0.0;
  double dmin = INFINITY;
  for (auto p : c.positions) dmin = std::min(dmin, distance_to_segment(p, a, b));
  if (!(dmin > 0)) throw DomainError("chi: path passes through a vortex");
  if (L > 0.5 * dmin && depth < 64) {
    const Vec2 m = 0.5 * (a + b);
    return segment_flux(a, m, c, depth + 1) + segment_flux(m, b, c, depth + 1);
  }
  const Vec2 t = b - a;
  auto f = [&](double u) {
    const Vec2 x = a + u * t;
    return dot(perp(grad_phi0(x, c)), t);
  };
  return boost::math::quadrature::gauss<double, 16>::integrate(f, 0.0, 1.0);
}

}  // namespace detail

/// Integral of <grad^perp Phi_0, t> along an open polyline.
inline double chi_along(const Polyline& path, const VortexConfiguration& c) {
  double v = 0;
  for (std::size_t k = 0; k + 1 < path.size(); ++k) v += detail::segment_flux(path[k], path[k + 1], c);
  return v;
}

/// Default path from x0 to x: the straight plane segment, bent around every
/// vortex it would pass within the exclusion radius of.
inline Polyline default_path(Vec2 x0, Vec2 x, const VortexConfiguration& c, double exclusion) {
  Polyline path{x0};
  const Vec2 t = x - x0;
  const double L2 = norm2(t);
  struct Hit { double u; Vec2 p; };
  std::vector<Hit> hits;
  if (L2 > 0) {
    for (auto p : c.positions) {
      const double u = dot(p - x0, t) / L2;
      if (u <= 0 || u >= 1) continue;
      if (detail::distance_to_segment(p, x0, x) < 2 * exclusion) hits.push_back({u, p});
    }
  }
  std::sort(hits.begin(), hits.end(), [](const Hit& a, const Hit& b) { return a.u < b.u; });
  const Vec2 n = L2 > 0 ? perp(t) / std::sqrt(L2) : Vec2{};
  for (const auto& h : hits) {
    // Step around the vortex on the side of the segment it does not lie on.
    const double side = dot(h.p - x0, n) >= 0 ? -1.0 : 1.0;
    const Vec2 foot = x0 + h.u * t;
    const Vec2 tu = t / std::sqrt(L2);
    const double off = 4 * exclusion;
    path.push_back(foot - off * tu + side * off * n);
    path.push_back(foot + off * tu + side * off * n);
  }
  path.push_back(x);
  return path;
}

/// chi(x) - chi(x0) = int <grad^perp Phi_0, t> along the default path; defined modulo 2 pi.
inline double chi(const ConformalAtlas& atlas, const SurfacePoint& x0, const SurfacePoint& x,
                  const VortexConfiguration& c, ChiOptions opt = {}) {
  if (c.total_degree() != 0) throw InputError("chi: total degree must be zero");
  const Vec2 a = to_plane(atlas, x0), b = to_plane(atlas, x);
  for (auto p : c.positions) {
    if (norm(b - p) < opt.exclusion) throw DomainError("chi: endpoint inside a vortex exclusion disk");
    if (norm(a - p) < opt.exclusion) throw DomainError("chi: base point inside a vortex exclusion disk");
  }
  if (a == b) return 0.0;
  return chi_along(default_path(a, b, c, opt.exclusion), c);
}

inline double chi(const ConformalAtlas& atlas, const SurfacePoint& x0, const SurfacePoint& x,
                  const SurfacePoint& p1, const SurfacePoint& p2, ChiOptions opt = {}) {
  return chi(atlas, x0, x, vortex_pair(to_plane(atlas, p1), to_plane(atlas, p2)), opt);
}

/// Loop integral of <grad^perp Phi_0, t>; the loop is closed automatically.
inline double winding_of_loop(const Polyline& loop, const VortexConfiguration& c) {
  if (loop.size() < 3) throw InputError("winding_of_loop: need at least three vertices");
  Polyline closed = loop;
  closed.push_back(loop.front());
  return chi_along(closed, c);
}

inline double winding_of_loop(const ConformalAtlas& atlas, const Polyline& loop, const SurfacePoint& p1,
                              const SurfacePoint& p2) {
  return winding_of_loop(loop, vortex_pair(to_plane(atlas, p1), to_plane(atlas, p2)));
}

/// Closed form of the same phase: sum_i d_i arg(x - p_i). Agrees with chi modulo 2 pi.
inline double chi_phase(Vec2 x, const VortexConfiguration& c) {
  double v = 0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    const Vec2 d = x - c.positions[i];
    v += c.degrees[i] * std::atan2(d.y, d.x);
  }
  return v;
}

}  // namespace revortex
