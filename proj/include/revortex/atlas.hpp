#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <memory>
#include <variant>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "revortex/core.hpp"
#include "revortex/profile.hpp"

namespace revortex {

struct PlanePoint { double x = 0, y = 0; };
struct SphericalPoint { double theta = 0, phi = 0; };
struct ArcPoint { double theta = 0, s = 0; };
struct EmbeddedPoint { double X = 0, Y = 0, Z = 0; };

/// A point of the surface in one of four equivalent coordinate systems.
using SurfacePoint = std::variant<PlanePoint, SphericalPoint, ArcPoint, EmbeddedPoint>;

enum class Representation { plane, spherical, arc, embedded };

struct ConformalOptions {
  /// Integration starts this far from each pole; the tan(phi/2) asymptote covers the rest.
  double phi0 = 1e-6;
  /// Nodes per hemisphere table (two tables, so 2 * nodes_per_half in total).
  int nodes_per_half = 2048;
  /// RK4 step in tau = ln tan(phi/2).
  double tau_step = 5e-4;
  double bracket_lo = 1e-3;
  double bracket_hi = 1e3;
  int bracket_expansions = 10;
};

/// Conformal parametrization of a surface of revolution.
///
/// The map S: [0, pi] -> [0, l] solves S'(phi) sin(phi) = alpha(S(phi)). In the
/// variable tau = ln tan(phi/2) = ln r the equation is autonomous, dS/dtau =
/// alpha(S), so the boundary values alone leave a one-parameter (dilation)
/// freedom. It is fixed by S(pi/2) = l/2: the equator of the reference sphere,
/// r = 1 in the plane, maps to the middle of the profile. For mirror-symmetric
/// profiles this makes the reflection s -> l - s the inversion r -> 1/r.
///
/// Each hemisphere is stored as its own table: S on [0, pi/2] from the s = 0
/// pole, and T(psi) = l - S(pi - psi) from the s = l pole. Both are found by
/// shooting on the pole constant c in S ~ c tan(phi/2) and interpolated with
/// cubic Hermite polynomials using the exact slopes from the ODE.
class ConformalAtlas {
 public:
  ConformalAtlas(ProfileCurve profile, double tol, ConformalOptions opt = {})
      : profile_(std::move(profile)), tol_(tol), opt_(opt) {
    if (!(tol > 0) || !std::isfinite(tol)) throw SolverError("solve_conformal_map: tolerance must be positive");
    if (!(profile_.length > 0)) throw InputError("solve_conformal_map: profile length must be positive");
    const int K = opt_.nodes_per_half;
    if (K < 16) throw InputError("solve_conformal_map: too few nodes");
    phi_.resize(K + 1);
    for (int k = 0; k <= K; ++k) phi_[k] = pi / 4 * (1 - std::cos(pi * k / K));
    phi_[K] = pi / 2;

    const double l = profile_.length;
    north_ = shoot([this](double s) { return profile_.alpha(s); }, profile_.alpha_prime(0.0));
    if (profile_.symmetric) {
      south_ = north_;
    } else {
      south_ = shoot([this, l](double t) { return alpha_near_end(t); }, -profile_.alpha_prime(l));
    }

    const double h = 1e-3 * l;
    alpha_prime_pole_ = profile_.alpha_prime(0.0);
    cubic_coeff_ = (profile_.alpha_prime(h) - alpha_prime_pole_) / (3 * h * h);

    collocation_residual_ = compute_collocation_residual();
    if (!(collocation_residual_ <= tol_))
      throw SolverError("solve_conformal_map: collocation residual " + std::to_string(collocation_residual_) +
                        " exceeds tolerance");
  }

  const ProfileCurve& profile() const { return profile_; }
  double length() const { return profile_.length; }
  bool symmetric() const { return profile_.symmetric; }
  double tolerance() const { return tol_; }
  /// Pole constant c with S(phi) ~ c tan(phi/2) at phi = 0.
  double c() const { return north_.c; }
  /// The same constant at the s = l pole.
  double c_south() const { return south_.c; }
  /// max |S'(phi) sin(phi) - alpha(S(phi))| over interval midpoints.
  double collocation_residual() const { return collocation_residual_; }
  int node_count() const { return 2 * opt_.nodes_per_half; }

  /// S(phi) for phi in [0, pi].
  double S(double phi) const {
    if (!(phi >= 0 && phi <= pi)) throw DomainError("S: phi outside [0, pi]");
    if (phi <= pi / 2) return north_.eval(phi_, phi);
    return profile_.length - south_.eval(phi_, pi - phi);
  }

  /// dS/dphi.
  double S_prime(double phi) const {
    if (!(phi >= 0 && phi <= pi)) throw DomainError("S': phi outside [0, pi]");
    if (phi <= pi / 2) return north_.deriv(phi_, phi);
    return south_.deriv(phi_, pi - phi);
  }

  /// Inverse of S.
  double phi_of_s(double s) const {
    const double l = profile_.length;
    if (!(s >= 0 && s <= l)) throw DomainError("phi_of_s: s outside [0, l]");
    if (s <= l / 2) return std::min(north_.invert(phi_, s), pi / 2);
    return pi - std::min(south_.invert(phi_, l - s), pi / 2);
  }

  /// Arc length of the latitude with plane radius r.
  double s_of_r(double r) const {
    if (!(r >= 0)) throw DomainError("s_of_r: negative radius");
    if (std::isinf(r)) return profile_.length;
    if (r <= 1) return north_.eval(phi_, 2 * std::atan(r));
    return profile_.length - south_.eval(phi_, 2 * std::atan(1 / r));
  }

  /// Plane radius of the latitude s; the s = l pole has no plane image.
  double r_of_s(double s) const {
    const double l = profile_.length;
    if (!(s >= 0 && s <= l)) throw DomainError("r_of_s: s outside [0, l]");
    if (s <= l / 2) return std::tan(north_.invert(phi_, s) / 2);
    const double psi = south_.invert(phi_, l - s);
    if (psi <= 0) throw DomainError("r_of_s: the s = l pole is at infinity in the plane");
    return 1 / std::tan(psi / 2);
  }

  /// alpha(S(phi(r))), accurate near both poles.
  double alpha_of_r(double r) const {
    if (r <= 1) return profile_.alpha(north_.eval(phi_, 2 * std::atan(r)));
    return alpha_near_end(south_.eval(phi_, 2 * std::atan(1 / r)));
  }

  double alpha_prime_of_r(double r) const {
    if (r <= 1) return profile_.alpha_prime(north_.eval(phi_, 2 * std::atan(r)));
    return profile_.alpha_prime(profile_.length - south_.eval(phi_, 2 * std::atan(1 / r)));
  }

  /// f = ln(alpha(S(phi)) / r), metric e^{2f}(dx^2 + dy^2).
  double conformal_factor(Vec2 p) const { return conformal_factor_r(norm(p)); }

  double conformal_factor_r(double r) const {
    if (!std::isfinite(r)) throw DomainError("conformal_factor: the s = l pole has no plane image");
    if (r < 0) throw DomainError("conformal_factor: negative radius");
    if (r < series_radius) return conformal_factor_series(r);
    return conformal_factor_direct(r);
  }

  /// Small-r expansion f = ln(alpha'(0) c) + (3/2) a3 c^2 r^2 with alpha = s + a3 s^3 + ...
  double conformal_factor_series(double r) const {
    const double c = north_.c;
    return std::log(alpha_prime_pole_ * c) + 1.5 * cubic_coeff_ * c * c * r * r;
  }

  double conformal_factor_direct(double r) const {
    if (!(r > 0)) throw DomainError("conformal_factor_direct: r must be positive");
    return std::log(alpha_of_r(r) / r);
  }

  /// grad f = (alpha'(S) - 1) p / r^2.
  Vec2 grad_conformal_factor(Vec2 p) const {
    const double r2 = norm2(p);
    if (!(r2 > 0)) throw DomainError("grad_conformal_factor: singular at r = 0");
    if (!std::isfinite(r2)) throw DomainError("grad_conformal_factor: point at infinity");
    return (alpha_prime_of_r(std::sqrt(r2)) - 1) / r2 * p;
  }

  /// Area of the cap {|p| <= r}: 2 pi int_0^r rho e^{2 f(rho)} d rho.
  double cap_area(double r) const {
    if (!(r >= 0)) throw InputError("cap_area: negative radius");
    if (std::isinf(r)) return cap_area(1.0) + cap_area_complement(1.0);
    if (r <= 1) return two_pi * integrate([this](double rho) { return inner_integrand(rho); }, 0.0, r);
    return cap_area(1.0) + two_pi * integrate([this](double u) { return outer_integrand(u); }, 1 / r, 1.0);
  }

  /// Area of {|p| >= r}, integrated from the s = l side in the inverted variable u = 1/rho.
  double cap_area_complement(double r) const {
    if (!(r >= 0)) throw InputError("cap_area_complement: negative radius");
    if (r >= 1) {
      if (std::isinf(r)) return 0.0;
      return two_pi * integrate([this](double u) { return outer_integrand(u); }, 0.0, 1 / r);
    }
    return cap_area_complement(1.0) +
           two_pi * integrate([this](double rho) { return inner_integrand(rho); }, r, 1.0);
  }

  /// 2 pi int_0^l alpha(s) ds.
  double total_area() const {
    return two_pi * integrate([this](double s) { return profile_.alpha(s); }, 0.0, profile_.length);
  }

  /// Radius below which conformal_factor uses the pole series.
  static constexpr double series_radius = 1e-8;

 private:
  struct Hemisphere {
    double c = 0;
    std::vector<double> S, dS;

    std::size_t index(const std::vector<double>& phi, double x) const {
      const int K = static_cast<int>(phi.size()) - 1;
      const double arg = std::clamp(1 - 4 * x / pi, -1.0, 1.0);
      int k = static_cast<int>(std::acos(arg) * K / pi);
      k = std::clamp(k, 0, K - 1);
      while (k > 0 && x < phi[k]) --k;
      while (k < K - 1 && x > phi[k + 1]) ++k;
      return static_cast<std::size_t>(k);
    }

    double eval(const std::vector<double>& phi, double x) const {
      const std::size_t k = index(phi, x);
      const double h = phi[k + 1] - phi[k], u = (x - phi[k]) / h;
      const double h00 = (1 + 2 * u) * (1 - u) * (1 - u), h10 = u * (1 - u) * (1 - u);
      const double h01 = u * u * (3 - 2 * u), h11 = u * u * (u - 1);
      return h00 * S[k] + h10 * h * dS[k] + h01 * S[k + 1] + h11 * h * dS[k + 1];
    }

    double deriv(const std::vector<double>& phi, double x) const {
      const std::size_t k = index(phi, x);
      const double h = phi[k + 1] - phi[k], u = (x - phi[k]) / h;
      const double d00 = 6 * u * (u - 1), d10 = (1 - u) * (1 - 3 * u);
      const double d01 = 6 * u * (1 - u), d11 = u * (3 * u - 2);
      return (d00 * S[k] + d01 * S[k + 1]) / h + d10 * dS[k] + d11 * dS[k + 1];
    }

    /// Solves S(x) = s on [0, pi/2].
    double invert(const std::vector<double>& phi, double s) const {
      if (s <= S.front()) return 0.0;
      if (s >= S.back()) return phi.back();
      auto it = std::upper_bound(S.begin(), S.end(), s);
      const std::size_t k = static_cast<std::size_t>(it - S.begin()) - 1;
      double lo = phi[k], hi = phi[k + 1];
      double x = lo + (hi - lo) * (s - S[k]) / (S[k + 1] - S[k]);
      for (int it_n = 0; it_n < 60; ++it_n) {
        const double g = eval(phi, x) - s;
        if (g == 0) break;
        if (g > 0) hi = x; else lo = x;
        const double d = deriv(phi, x);
        double nx = d > 0 ? x - g / d : 0.5 * (lo + hi);
        if (!(nx > lo && nx < hi)) nx = 0.5 * (lo + hi);
        if (std::abs(nx - x) <= 1e-17 + 4e-16 * std::abs(x)) { x = nx; break; }
        x = nx;
      }
      return x;
    }
  };

  /// alpha(l - t), switching to the pole asymptote where l - t would round.
  double alpha_near_end(double t) const {
    const double l = profile_.length;
    if (t < 1e-7 * l) return -profile_.alpha_prime(l) * t;
    return profile_.alpha(l - t);
  }

  double inner_integrand(double rho) const {
    if (rho <= 0) return 0.0;
    const double a = alpha_of_r(rho);
    return a * a / rho;
  }

  double outer_integrand(double u) const {
    if (u <= 0) return 0.0;
    const double a = alpha_of_r(1 / u);
    return a * a / u;
  }

  template <class F>
  static double integrate(F&& f, double a, double b) {
    if (a == b) return 0.0;
    using boost::math::quadrature::gauss_kronrod;
    return gauss_kronrod<double, 31>::integrate(f, a, b, 15, 1e-12);
  }

  /// Integrates dS/dtau = alpha(S) from the pole asymptote through every table node.
  template <class Alpha>
  std::vector<double> sweep(const Alpha& alpha, double c) const {
    const int K = opt_.nodes_per_half;
    const double phi0 = opt_.phi0;
    std::vector<double> S(K + 1);
    double tau = std::log(std::tan(phi0 / 2));
    double y = c * std::tan(phi0 / 2);
    for (int k = 0; k <= K; ++k) {
      if (phi_[k] <= phi0) {
        S[k] = c * std::tan(phi_[k] / 2);
        continue;
      }
      const double target = std::log(std::tan(phi_[k] / 2));
      const double span = target - tau;
      const int steps = std::max(1, static_cast<int>(std::ceil(span / opt_.tau_step)));
      const double h = span / steps;
      for (int i = 0; i < steps; ++i) {
        const double k1 = alpha(y);
        const double k2 = alpha(y + 0.5 * h * k1);
        const double k3 = alpha(y + 0.5 * h * k2);
        const double k4 = alpha(y + h * k3);
        y += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
      }
      if (!std::isfinite(y)) throw SolverError("solve_conformal_map: non-finite S during integration");
      tau = target;
      S[k] = y;
    }
    return S;
  }

  template <class Alpha>
  Hemisphere shoot(const Alpha& alpha, double alpha_prime_pole) const {
    const double target = profile_.length / 2;
    auto miss = [&](double c) { return sweep(alpha, c).back() - target; };

    double lo = opt_.bracket_lo, hi = opt_.bracket_hi;
    double glo = miss(lo), ghi = miss(hi);
    for (int i = 0; i < opt_.bracket_expansions && glo >= 0; ++i) { lo /= 10; glo = miss(lo); }
    for (int i = 0; i < opt_.bracket_expansions && ghi <= 0; ++i) { hi *= 10; ghi = miss(hi); }
    if (!(glo < 0 && ghi > 0)) throw SolverError("solve_conformal_map: shooting bracket not found");

    // S(pi/2) increases with c; bisect in log c.
    for (int it = 0; it < 200 && hi / lo - 1 > 1e-15; ++it) {
      const double mid = std::sqrt(lo * hi);
      if (mid <= lo || mid >= hi) break;
      const double g = miss(mid);
      if (g == 0) { lo = hi = mid; break; }
      if (g < 0) lo = mid; else hi = mid;
    }
    Hemisphere h;
    h.c = 0.5 * (lo + hi);
    h.S = sweep(alpha, h.c);
    if (std::abs(h.S.back() - target) > tol_)
      throw SolverError("solve_conformal_map: shooting did not reach S(pi/2) = l/2 within tolerance");
    for (std::size_t k = 1; k < h.S.size(); ++k)
      if (!(h.S[k] > h.S[k - 1])) throw SolverError("solve_conformal_map: non-monotone S detected");
    h.dS.resize(h.S.size());
    h.dS[0] = alpha_prime_pole * h.c / 2;
    for (std::size_t k = 1; k < h.S.size(); ++k) h.dS[k] = alpha(h.S[k]) / std::sin(phi_[k]);
    return h;
  }

  double compute_collocation_residual() const {
    const double l = profile_.length;
    double worst = 0;
    for (std::size_t k = 0; k + 1 < phi_.size(); ++k) {
      const double m = 0.5 * (phi_[k] + phi_[k + 1]);
      const double sn = north_.eval(phi_, m);
      worst = std::max(worst, std::abs(north_.deriv(phi_, m) * std::sin(m) - profile_.alpha(sn)));
      const double ts = south_.eval(phi_, m);
      worst = std::max(worst, std::abs(south_.deriv(phi_, m) * std::sin(m) - profile_.alpha(l - ts)));
    }
    return worst;
  }

  ProfileCurve profile_;
  double tol_;
  ConformalOptions opt_;
  std::vector<double> phi_;
  Hemisphere north_, south_;
  double alpha_prime_pole_ = 1;
  double cubic_coeff_ = 0;
  double collocation_residual_ = 0;
};

/// Solves the conformal map of a profile; see ConformalAtlas.
inline ConformalAtlas solve_conformal_map(ProfileCurve profile, double tol, ConformalOptions opt = {}) {
  return ConformalAtlas(std::move(profile), tol, opt);
}

// ---------------------------------------------------------------------------
// Coordinate conversion

namespace detail {

/// Arc length of the profile point closest to (rho, Z) in the meridian half-plane.
inline double locate_on_profile(const ProfileCurve& p, double rho, double Z) {
  const int n = 1024;
  const double l = p.length;
  double best_s = 0, best_d = INFINITY;
  for (int i = 0; i <= n; ++i) {
    const double s = l * i / n;
    const double d = std::hypot(p.alpha(s) - rho, p.beta(s) - Z);
    if (d < best_d) { best_d = d; best_s = s; }
  }
  double s = best_s;
  // Gauss-Newton on g(s) = <gamma(s) - q, gamma'(s)>, using |gamma'| = 1.
  for (int it = 0; it < 100; ++it) {
    const double g = (p.alpha(s) - rho) * p.alpha_prime(s) + (p.beta(s) - Z) * p.beta_prime(s);
    const double ns = std::clamp(s - g, 0.0, l);
    if (std::abs(ns - s) < 1e-16 * std::max(1.0, l)) { s = ns; break; }
    s = ns;
  }
  const double dist = std::hypot(p.alpha(s) - rho, p.beta(s) - Z);
  if (dist > 1e-6 * std::max(1.0, l)) throw DomainError("convert: embedded point is not on the surface");
  return s;
}

struct Canonical {
  double theta;
  double s;
  double phi;
  double r;  // plane radius, +inf at s = l
};

inline Canonical canonical(const ConformalAtlas& atlas, const SurfacePoint& p) {
  const double l = atlas.length();
  return std::visit(
      [&](const auto& q) -> Canonical {
        using T = std::decay_t<decltype(q)>;
        if constexpr (std::is_same_v<T, PlanePoint>) {
          const double r = std::hypot(q.x, q.y);
          if (!std::isfinite(r)) throw DomainError("convert: non-finite plane point");
          const double th = r > 0 ? wrap_angle_positive(std::atan2(q.y, q.x)) : 0.0;
          return {th, atlas.s_of_r(r), 2 * std::atan(r), r};
        } else if constexpr (std::is_same_v<T, SphericalPoint>) {
          if (!(q.phi >= 0 && q.phi <= pi)) throw DomainError("convert: phi outside [0, pi]");
          const double r = q.phi < pi ? std::tan(q.phi / 2) : INFINITY;
          return {wrap_angle_positive(q.theta), atlas.S(q.phi), q.phi, r};
        } else if constexpr (std::is_same_v<T, ArcPoint>) {
          if (!(q.s >= 0 && q.s <= l)) throw DomainError("convert: s outside [0, l]");
          const double r = q.s < l ? atlas.r_of_s(q.s) : INFINITY;
          return {wrap_angle_positive(q.theta), q.s, atlas.phi_of_s(q.s), r};
        } else {
          const double rho = std::hypot(q.X, q.Y);
          const double s = locate_on_profile(atlas.profile(), rho, q.Z);
          const double th = rho > 0 ? wrap_angle_positive(std::atan2(q.Y, q.X)) : 0.0;
          const double r = s < l ? atlas.r_of_s(s) : INFINITY;
          return {th, s, atlas.phi_of_s(s), r};
        }
      },
      p);
}

}  // namespace detail

/// Converts between plane (x, y), spherical (theta, phi), arc (theta, s) and
/// embedded (X, Y, Z) coordinates.
inline SurfacePoint convert(const ConformalAtlas& atlas, const SurfacePoint& p, Representation target) {
  const auto c = detail::canonical(atlas, p);
  switch (target) {
    case Representation::plane:
      if (!std::isfinite(c.r)) throw DomainError("convert: the s = l pole has no plane representation");
      return PlanePoint{c.r * std::cos(c.theta), c.r * std::sin(c.theta)};
    case Representation::spherical:
      return SphericalPoint{c.theta, c.phi};
    case Representation::arc:
      return ArcPoint{c.theta, c.s};
    case Representation::embedded: {
      const auto& pr = atlas.profile();
      const double a = pr.alpha(c.s);
      return EmbeddedPoint{a * std::cos(c.theta), a * std::sin(c.theta), pr.beta(c.s)};
    }
  }
  throw InputError("convert: unknown representation");
}

inline Vec2 to_plane(const ConformalAtlas& atlas, const SurfacePoint& p) {
  const auto q = std::get<PlanePoint>(convert(atlas, p, Representation::plane));
  return {q.x, q.y};
}

inline ArcPoint to_arc(const ConformalAtlas& atlas, const SurfacePoint& p) {
  return std::get<ArcPoint>(convert(atlas, p, Representation::arc));
}

/// Mirror image about the symmetry plane: s -> l - s, or r -> 1/r in the plane.
inline SurfacePoint reflect(const ConformalAtlas& atlas, const SurfacePoint& p) {
  if (!atlas.symmetric()) throw DomainError("reflect: surface is not mirror symmetric");
  const double l = atlas.length();
  return std::visit(
      [&](const auto& q) -> SurfacePoint {
        using T = std::decay_t<decltype(q)>;
        if constexpr (std::is_same_v<T, PlanePoint>) {
          const double r2 = q.x * q.x + q.y * q.y;
          if (!(r2 > 0) || !std::isfinite(r2)) throw DomainError("reflect: point at a pole");
          return PlanePoint{q.x / r2, q.y / r2};
        } else if constexpr (std::is_same_v<T, SphericalPoint>) {
          if (!(q.phi > 0 && q.phi < pi)) throw DomainError("reflect: point at a pole");
          return SphericalPoint{q.theta, pi - q.phi};
        } else if constexpr (std::is_same_v<T, ArcPoint>) {
          if (!(q.s > 0 && q.s < l)) throw DomainError("reflect: point at a pole");
          return ArcPoint{q.theta, l - q.s};
        } else {
          const double z0 = atlas.profile().beta(l / 2);
          if (!(std::hypot(q.X, q.Y) > 0)) throw DomainError("reflect: point at a pole");
          return EmbeddedPoint{q.X, q.Y, 2 * z0 - q.Z};
        }
      },
      p);
}

}  // namespace revortex
