#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <vector>

#include "revortex/atlas.hpp"
#include "revortex/field.hpp"
#include "revortex/rings.hpp"

namespace revortex {

/// A grid node (row k in s, column j in theta).
struct GridIndex {
  int k = 0, j = 0;
};

struct DegreeResult {
  int degree = 0;
  /// |sum of phase increments - 2 pi degree|.
  double defect = 0;
};

/// Winding of u/|u| along a closed grid loop; increments are wrapped to (-pi, pi].
inline DegreeResult degree(const ComplexField& u, const std::vector<GridIndex>& loop) {
  if (loop.size() < 3) throw InputError("degree: loop needs at least three nodes");
  const int Nt = u.n_theta();
  double total = 0;
  for (std::size_t i = 0; i < loop.size(); ++i) {
    const auto& a = loop[i];
    const auto& b = loop[(i + 1) % loop.size()];
    const cplx za = u(a.k, ((a.j % Nt) + Nt) % Nt), zb = u(b.k, ((b.j % Nt) + Nt) % Nt);
    if (std::abs(za) == 0 || std::abs(zb) == 0) throw DomainError("degree: field vanishes on the loop");
    total += std::arg(zb / za);
  }
  DegreeResult r;
  r.degree = static_cast<int>(std::lround(total / two_pi));
  r.defect = std::abs(total - two_pi * r.degree);
  return r;
}

/// Loop along the latitude row k in the direction of increasing theta.
inline std::vector<GridIndex> latitude_loop(const ComplexField& u, int k) {
  std::vector<GridIndex> loop;
  for (int j = 0; j < u.n_theta(); ++j) loop.push_back({k, j});
  return loop;
}

/// Boundary of the index rectangle [k0, k1] x [j0, j1] (j unwrapped), oriented
/// positively in the (s, theta) chart, which matches the plane orientation.
inline std::vector<GridIndex> rectangle_loop(int k0, int k1, int j0, int j1) {
  std::vector<GridIndex> loop;
  for (int k = k0; k < k1; ++k) loop.push_back({k, j0});
  for (int j = j0; j < j1; ++j) loop.push_back({k1, j});
  for (int k = k1; k > k0; --k) loop.push_back({k, j1});
  for (int j = j1; j > j0; --j) loop.push_back({k0, j});
  return loop;
}

struct DetectedVortex {
  ArcPoint center;
  /// Largest metric distance from the centre to the covering loop.
  double radius = 0;
  int degree = 0;
  double defect = 0;
  /// Number of grid nodes below the threshold.
  int size = 0;
  /// Degree zero components are reported but flagged.
  bool flagged = false;
};

struct DetectOptions {
  double threshold = 0.5;
  /// Alternative threshold eps^{zeta/4} when zeta > 0.
  double zeta = 0;
  /// Unwrap defect above which a vortex is flagged as under-resolved.
  double defect_limit = 0.1;
};

namespace detail {

/// Zero of the bilinear interpolant on the plaquette with corners
/// z00 = (k, j), z10 = (k+1, j), z01 = (k, j+1), z11 = (k+1, j+1).
inline bool plaquette_zero(cplx z00, cplx z10, cplx z01, cplx z11, double& a, double& b) {
  a = 0.5;
  b = 0.5;
  for (int it = 0; it < 50; ++it) {
    const cplx f = (1 - a) * (1 - b) * z00 + a * (1 - b) * z10 + (1 - a) * b * z01 + a * b * z11;
    const cplx fa = (1 - b) * (z10 - z00) + b * (z11 - z01);
    const cplx fb = (1 - a) * (z01 - z00) + a * (z11 - z10);
    const double det = fa.real() * fb.imag() - fa.imag() * fb.real();
    if (det == 0) return false;
    const double da = (f.real() * fb.imag() - f.imag() * fb.real()) / det;
    const double db = (fa.real() * f.imag() - fa.imag() * f.real()) / det;
    a -= da;
    b -= db;
    if (std::abs(da) + std::abs(db) < 1e-14) break;
  }
  return a > -1e-9 && a < 1 + 1e-9 && b > -1e-9 && b < 1 + 1e-9;
}

}  // namespace detail

/// Vortices as connected components of {|u| < threshold}.
///
/// Components are 8-connected and periodic in theta. Each is enclosed by the
/// smallest index rectangle whose boundary has |u| >= threshold; the degree is
/// the winding on that boundary. Centres are zeros of the bilinear interpolant
/// in the plaquette that carries the winding, or the depth-weighted centroid
/// of the component when no single plaquette does.
inline std::vector<DetectedVortex> detect_vortices(const ComplexField& u, DetectOptions opt = {}) {
  if (!u.finite()) throw InputError("detect_vortices: non-finite field");
  double thr = opt.threshold;
  if (opt.zeta > 0) thr = std::pow(u.eps, opt.zeta / 4);
  if (!(thr > 0 && thr < 1)) throw InputError("detect_vortices: threshold must lie in (0, 1)");
  const Grid& g = *u.grid;
  const int Nt = g.n_theta(), Ns = g.n_s();
  auto wrapj = [Nt](int j) { return ((j % Nt) + Nt) % Nt; };
  auto low = [&](int k, int j) { return std::abs(u(k, wrapj(j))) < thr; };

  std::vector<int> label(g.size(), -1);
  std::vector<DetectedVortex> found;
  int next = 0;
  for (int k0 = 0; k0 < Ns; ++k0)
    for (int j0 = 0; j0 < Nt; ++j0) {
      if (label[g.index(k0, j0)] >= 0 || !low(k0, j0)) continue;
      // Breadth-first search with unwrapped column offsets.
      std::vector<GridIndex> comp;
      std::queue<GridIndex> q;
      q.push({k0, j0});
      label[g.index(k0, j0)] = next;
      while (!q.empty()) {
        const GridIndex c = q.front();
        q.pop();
        comp.push_back(c);
        for (int dk = -1; dk <= 1; ++dk)
          for (int dj = -1; dj <= 1; ++dj) {
            const int k = c.k + dk, j = c.j + dj;
            if (k < 0 || k >= Ns) continue;
            const std::size_t id = g.index(k, wrapj(j));
            if (label[id] >= 0 || !low(k, j)) continue;
            label[id] = next;
            q.push({k, j});
          }
      }
      ++next;

      int kmin = Ns, kmax = -1, jmin = 1 << 30, jmax = -(1 << 30);
      for (const auto& c : comp) {
        kmin = std::min(kmin, c.k);
        kmax = std::max(kmax, c.k);
        jmin = std::min(jmin, c.j);
        jmax = std::max(jmax, c.j);
      }
      if (kmin == 0 || kmax == Ns - 1) throw DetectionError("detect_vortices: low-modulus region touches a pole row");
      if (jmax - jmin + 1 >= Nt) throw DetectionError("detect_vortices: low-modulus region wraps around the axis");

      // Grow the rectangle until its boundary is clear of the low set.
      int k0r = kmin - 1, k1r = kmax + 1, j0r = jmin - 1, j1r = jmax + 1;
      auto boundary_clear = [&]() {
        for (const auto& n : rectangle_loop(k0r, k1r, j0r, j1r))
          if (low(n.k, n.j)) return false;
        return true;
      };
      while (!boundary_clear()) {
        if (k0r <= 0 || k1r >= Ns - 1 || j1r - j0r + 1 >= Nt)
          throw DetectionError("detect_vortices: covering loop cannot avoid the low-modulus set");
        --k0r;
        ++k1r;
        --j0r;
        ++j1r;
      }
      const auto loop = rectangle_loop(k0r, k1r, j0r, j1r);
      const DegreeResult dr = degree(u, loop);

      DetectedVortex v;
      v.degree = dr.degree;
      v.defect = dr.defect;
      v.size = static_cast<int>(comp.size());
      v.flagged = dr.degree == 0 || dr.defect > opt.defect_limit;

      // Centre: plaquettes inside the rectangle with nonzero winding.
      double cs = 0, ct = 0;
      int hits = 0;
      for (int k = k0r; k < k1r; ++k)
        for (int j = j0r; j < j1r; ++j) {
          const cplx z00 = u(k, wrapj(j)), z10 = u(k + 1, wrapj(j));
          const cplx z01 = u(k, wrapj(j + 1)), z11 = u(k + 1, wrapj(j + 1));
          if (z00 == 0.0 || z10 == 0.0 || z01 == 0.0 || z11 == 0.0) continue;
          const double w = std::arg(z10 / z00) + std::arg(z11 / z10) + std::arg(z01 / z11) + std::arg(z00 / z01);
          if (std::lround(w / two_pi) == 0) continue;
          double a, b;
          if (!detail::plaquette_zero(z00, z10, z01, z11, a, b)) {
            a = 0.5;
            b = 0.5;
          }
          cs += g.s(k) + a * g.ds();
          ct += (j + b) * g.dtheta();
          ++hits;
        }
      if (hits == 1) {
        v.center = {wrap_angle_positive(ct), cs};
      } else {
        double ws = 0, wsum = 0, wt = 0;
        for (const auto& c : comp) {
          const double w = thr - std::abs(u(c.k, wrapj(c.j)));
          ws += w * g.s(c.k);
          wt += w * c.j * g.dtheta();
          wsum += w;
        }
        v.center = {wrap_angle_positive(wt / wsum), ws / wsum};
      }
      const double ac = std::max(0.0, g.alpha(std::clamp(static_cast<int>(v.center.s / g.ds()), 0, Ns - 1)));
      for (const auto& n : loop) {
        const double dsv = g.s(n.k) - v.center.s;
        const double dth = wrap_angle(n.j * g.dtheta() - v.center.theta);
        v.radius = std::max(v.radius, std::hypot(dsv, ac * dth));
      }
      found.push_back(v);
    }
  std::sort(found.begin(), found.end(), [](const DetectedVortex& a, const DetectedVortex& b) {
    return a.center.s != b.center.s ? a.center.s < b.center.s : a.center.theta < b.center.theta;
  });
  return found;
}

struct OrbitReport {
  int n = 0;
  double s_plus = 0, s_minus = 0;
  /// Max deviation of individual latitudes from the group mean.
  double spread_plus = 0, spread_minus = 0;
  /// Max deviation of consecutive angular gaps from 2 pi / n.
  double spacing_plus = 0, spacing_minus = 0;
  double error_plus = 0, error_minus = 0;
  /// |s_plus + s_minus - l|.
  double mirror_defect = 0;
};

/// Compares detected vortices with a ring solution; positive degrees belong to ring 1.
inline OrbitReport compare_orbits(const std::vector<DetectedVortex>& detected, const RingSolution& ring,
                                  double length) {
  const int n = ring.n;
  std::vector<const DetectedVortex*> plus, minus;
  for (const auto& v : detected) {
    if (v.degree == 1) plus.push_back(&v);
    else if (v.degree == -1) minus.push_back(&v);
    else throw ComparisonError("compare_orbits: vortex of degree " + std::to_string(v.degree));
  }
  if (static_cast<int>(plus.size()) != n || static_cast<int>(minus.size()) != n)
    throw ComparisonError("compare_orbits: expected " + std::to_string(n) + " vortices of each sign, found " +
                          std::to_string(plus.size()) + " and " + std::to_string(minus.size()));
  auto summarize = [n](const std::vector<const DetectedVortex*>& grp, double& mean, double& spread, double& spacing) {
    mean = 0;
    for (auto* v : grp) mean += v->center.s;
    mean /= n;
    spread = 0;
    for (auto* v : grp) spread = std::max(spread, std::abs(v->center.s - mean));
    std::vector<double> th;
    for (auto* v : grp) th.push_back(v->center.theta);
    std::sort(th.begin(), th.end());
    spacing = 0;
    for (int i = 0; i < n; ++i) {
      const double gap = i + 1 < n ? th[i + 1] - th[i] : th[0] + two_pi - th[i];
      spacing = std::max(spacing, std::abs(gap - two_pi / n));
    }
  };
  OrbitReport r;
  r.n = n;
  summarize(plus, r.s_plus, r.spread_plus, r.spacing_plus);
  summarize(minus, r.s_minus, r.spread_minus, r.spacing_minus);
  r.error_plus = std::abs(r.s_plus - ring.s1);
  r.error_minus = std::abs(r.s_minus - ring.s2);
  r.mirror_defect = std::abs(r.s_plus + r.s_minus - length);
  return r;
}

}  // namespace revortex
