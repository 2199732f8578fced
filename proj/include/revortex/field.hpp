#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <complex>
#include <memory>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "revortex/profile.hpp"

namespace revortex {

using cplx = std::complex<double>;

/// Tensor grid in the arc-length chart (theta, s). Theta nodes are periodic,
/// s nodes sit at cell centres s_k = (k + 1/2) ds so the poles are never nodes.
class Grid {
 public:
  Grid(const ProfileCurve& profile, int n_theta, int n_s)
      : n_theta_(n_theta), n_s_(n_s), length_(profile.length), symmetric_(profile.symmetric) {
    if (n_theta < 4 || n_s < 4) throw InputError("grid: need at least 4 nodes in each direction");
    dtheta_ = two_pi / n_theta;
    ds_ = length_ / n_s;
    s_.resize(n_s);
    alpha_.resize(n_s);
    alpha_prime_.resize(n_s);
    face_.resize(n_s + 1);
    for (int k = 0; k < n_s; ++k) {
      s_[k] = (k + 0.5) * ds_;
      alpha_[k] = profile.alpha(s_[k]);
      alpha_prime_[k] = profile.alpha_prime(s_[k]);
      if (!(alpha_[k] > 0)) throw InputError("grid: profile radius must be positive at every node");
    }
    // Zero flux through the poles.
    face_[0] = face_[n_s] = 0;
    for (int k = 1; k < n_s; ++k) face_[k] = profile.alpha(k * ds_);
    if (symmetric_) {
      // Mirror exactly so that symmetric fields stay symmetric bit for bit.
      for (int k = n_s / 2; k < n_s; ++k) {
        alpha_[k] = alpha_[n_s - 1 - k];
        alpha_prime_[k] = -alpha_prime_[n_s - 1 - k];
      }
      for (int k = (n_s + 1) / 2; k <= n_s; ++k) face_[k] = face_[n_s - k];
    }
    area_.resize(n_s);
    for (int k = 0; k < n_s; ++k) area_[k] = alpha_[k] * dtheta_ * ds_;
  }

  int n_theta() const { return n_theta_; }
  int n_s() const { return n_s_; }
  std::size_t size() const { return static_cast<std::size_t>(n_theta_) * n_s_; }
  double length() const { return length_; }
  bool symmetric() const { return symmetric_; }
  double dtheta() const { return dtheta_; }
  double ds() const { return ds_; }
  double theta(int j) const { return j * dtheta_; }
  double s(int k) const { return s_[k]; }
  double alpha(int k) const { return alpha_[k]; }
  double alpha_prime(int k) const { return alpha_prime_[k]; }
  /// alpha at the cell face s = k ds, zero at both poles.
  double face_alpha(int k) const { return face_[k]; }
  /// Area weight of a node in row k.
  double dA(int k) const { return area_[k]; }
  std::size_t index(int k, int j) const { return static_cast<std::size_t>(k) * n_theta_ + j; }

  double total_area() const {
    double a = 0;
    for (int k = 0; k < n_s_; ++k) a += area_[k] * n_theta_;
    return a;
  }

 private:
  int n_theta_, n_s_;
  double length_;
  bool symmetric_;
  double dtheta_ = 0, ds_ = 0;
  std::vector<double> s_, alpha_, alpha_prime_, face_, area_;
};

/// Complex order parameter on a grid, stored s-major (row k, column j).
struct ComplexField {
  std::shared_ptr<const Grid> grid;
  double eps = 0.1;
  std::vector<cplx> values;

  ComplexField() = default;
  ComplexField(std::shared_ptr<const Grid> g, double epsilon, cplx fill = 1.0)
      : grid(std::move(g)), eps(epsilon), values(grid->size(), fill) {
    if (!(epsilon > 0)) throw InputError("field: epsilon must be positive");
  }

  cplx& operator()(int k, int j) { return values[grid->index(k, j)]; }
  const cplx& operator()(int k, int j) const { return values[grid->index(k, j)]; }
  int n_theta() const { return grid->n_theta(); }
  int n_s() const { return grid->n_s(); }

  bool finite() const {
    for (const auto& z : values)
      if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
    return true;
  }
};

/// Sets the OpenMP width from REVORTEX_THREADS when present.
inline void configure_threads_from_env() {
#ifdef _OPENMP
  if (const char* v = std::getenv("REVORTEX_THREADS")) {
    const int n = std::atoi(v);
    if (n > 0) omp_set_num_threads(n);
  }
#endif
}

namespace detail {

/// Sums f(k) over rows; rows run in parallel, the reduction is serial and ordered.
template <class F>
double row_sum(int n_rows, F&& f) {
  std::vector<double> part(n_rows);
#pragma omp parallel for schedule(static)
  for (int k = 0; k < n_rows; ++k) part[k] = f(k);
  double total = 0;
  for (double p : part) total += p;
  return total;
}

inline void require_same_grid(const ComplexField& a, const ComplexField& b) {
  if (a.grid != b.grid && (a.n_theta() != b.n_theta() || a.n_s() != b.n_s()))
    throw InputError("fields live on different grids");
}

}  // namespace detail

/// Re sum conj(a) b dA.
inline double inner(const ComplexField& a, const ComplexField& b) {
  detail::require_same_grid(a, b);
  const Grid& g = *a.grid;
  const int Nt = g.n_theta();
  return detail::row_sum(g.n_s(), [&](int k) {
    double acc = 0;
    const std::size_t o = g.index(k, 0);
    for (int j = 0; j < Nt; ++j) {
      const cplx x = a.values[o + j], y = b.values[o + j];
      acc += x.real() * y.real() + x.imag() * y.imag();
    }
    return acc * g.dA(k);
  });
}

inline double l2_norm(const ComplexField& a) { return std::sqrt(inner(a, a)); }

/// Discrete Ginzburg-Landau energy
/// sum [ |grad u|^2 / 2 + (1 - |u|^2)^2 / (4 eps^2) ] dA.
/// The s-derivative lives on cell faces weighted by the face radius, the
/// theta-derivative on forward edges; both are first differences.
inline double gl_energy(const ComplexField& u) {
  const Grid& g = *u.grid;
  const int Nt = g.n_theta(), Ns = g.n_s();
  const double ds = g.ds(), dt = g.dtheta();
  const double inv4e2 = 1 / (4 * u.eps * u.eps);
  return detail::row_sum(Ns, [&](int k) {
    const cplx* row = &u.values[g.index(k, 0)];
    double bulk = 0, theta_part = 0, s_part = 0;
    for (int j = 0; j < Nt; ++j) {
      const cplx z = row[j];
      const double m = 1 - std::norm(z);
      bulk += m * m;
      theta_part += std::norm(row[j + 1 == Nt ? 0 : j + 1] - z);
    }
    if (k + 1 < Ns) {
      const cplx* up = &u.values[g.index(k + 1, 0)];
      for (int j = 0; j < Nt; ++j) s_part += std::norm(up[j] - row[j]);
    }
    const double a = g.alpha(k);
    return bulk * inv4e2 * g.dA(k) + 0.5 * theta_part / (dt * dt * a * a) * g.dA(k) +
           0.5 * s_part / (ds * ds) * g.face_alpha(k + 1) * dt * ds;
  });
}

/// Discrete Laplace-Beltrami operator, the exact negative L^2(dA) gradient of
/// the Dirichlet part of gl_energy.
inline ComplexField laplacian(const ComplexField& u) {
  const Grid& g = *u.grid;
  const int Nt = g.n_theta(), Ns = g.n_s();
  const double ds2 = g.ds() * g.ds(), dt2 = g.dtheta() * g.dtheta();
  ComplexField out(u.grid, u.eps, 0.0);
#pragma omp parallel for schedule(static)
  for (int k = 0; k < Ns; ++k) {
    const cplx* row = &u.values[g.index(k, 0)];
    const cplx* dn = k > 0 ? &u.values[g.index(k - 1, 0)] : row;
    const cplx* up = k + 1 < Ns ? &u.values[g.index(k + 1, 0)] : row;
    const double a = g.alpha(k);
    const double fu = g.face_alpha(k + 1), fd = g.face_alpha(k);
    const double cs = 1 / (a * ds2), ct = 1 / (a * a * dt2);
    cplx* o = &out.values[g.index(k, 0)];
    for (int j = 0; j < Nt; ++j) {
      const cplx z = row[j];
      const cplx flux = fu * (z - up[j]) + fd * (z - dn[j]);
      const cplx ring = (z - row[j + 1 == Nt ? 0 : j + 1]) + (z - row[j == 0 ? Nt - 1 : j - 1]);
      o[j] = -(cs * flux + ct * ring);
    }
  }
  return out;
}

/// -(1/eps^2)(1 - |u|^2) u, the potential part of the gradient.
inline ComplexField potential_gradient(const ComplexField& u) {
  ComplexField out(u.grid, u.eps, 0.0);
  const double ie2 = 1 / (u.eps * u.eps);
  const std::size_t n = u.values.size();
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < n; ++i) {
    const cplx z = u.values[i];
    out.values[i] = -ie2 * (1 - std::norm(z)) * z;
  }
  return out;
}

/// L^2(dA) gradient of gl_energy: -Delta u - (1/eps^2)(1 - |u|^2) u.
inline ComplexField gl_gradient(const ComplexField& u) {
  ComplexField out = laplacian(u);
  const double ie2 = 1 / (u.eps * u.eps);
  const std::size_t n = u.values.size();
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < n; ++i) {
    const cplx z = u.values[i];
    out.values[i] = -out.values[i] - ie2 * (1 - std::norm(z)) * z;
  }
  return out;
}

/// Centred theta derivative.
inline ComplexField d_theta(const ComplexField& u) {
  const Grid& g = *u.grid;
  const int Nt = g.n_theta(), Ns = g.n_s();
  const double h = 1 / (2 * g.dtheta());
  ComplexField out(u.grid, u.eps, 0.0);
#pragma omp parallel for schedule(static)
  for (int k = 0; k < Ns; ++k) {
    const cplx* row = &u.values[g.index(k, 0)];
    cplx* o = &out.values[g.index(k, 0)];
    for (int j = 0; j < Nt; ++j) o[j] = h * (row[j + 1 == Nt ? 0 : j + 1] - row[j == 0 ? Nt - 1 : j - 1]);
  }
  return out;
}

/// Momentum P = Im sum conj(u) d_theta u dA.
inline double momentum(const ComplexField& u) {
  const Grid& g = *u.grid;
  const int Nt = g.n_theta();
  const double h = 1 / (2 * g.dtheta());
  return detail::row_sum(g.n_s(), [&](int k) {
    const cplx* row = &u.values[g.index(k, 0)];
    double acc = 0;
    for (int j = 0; j < Nt; ++j) acc += std::imag(std::conj(row[j]) * (row[j + 1 == Nt ? 0 : j + 1] - row[j == 0 ? Nt - 1 : j - 1]));
    return acc * h * g.dA(k);
  });
}

/// L^2(dA) gradient of the momentum, -2i d_theta u.
inline ComplexField momentum_gradient(const ComplexField& u) {
  ComplexField out = d_theta(u);
  for (auto& z : out.values) z *= cplx(0, -2);
  return out;
}

/// Rotation rate from the Lagrange multiplier of the momentum constraint.
/// With grad E = lambda grad P the rotating-frame equation holds with omega = -2 lambda.
inline double lagrange_omega(const ComplexField& gradE, const ComplexField& gradP) {
  const double pp = inner(gradP, gradP);
  if (!(pp > 0)) return 0.0;
  return -2 * inner(gradE, gradP) / pp;
}

inline double lagrange_omega(const ComplexField& u) { return lagrange_omega(gl_gradient(u), momentum_gradient(u)); }

/// Relative residual of Delta u + (1/eps^2)(1 - |u|^2) u + i omega d_theta u:
/// its L^2(dA) norm over the largest norm of the three terms.
inline double gp_residual(const ComplexField& u, double omega) {
  const Grid& g = *u.grid;
  const int Nt = g.n_theta(), Ns = g.n_s();
  const ComplexField lap = laplacian(u);
  const double ie2 = 1 / (u.eps * u.eps), h = omega / (2 * g.dtheta());
  // Squared norms of the residual and of the three terms, per row.
  std::vector<std::array<double, 4>> part(Ns);
#pragma omp parallel for schedule(static)
  for (int k = 0; k < Ns; ++k) {
    const cplx* row = &u.values[g.index(k, 0)];
    const cplx* L = &lap.values[g.index(k, 0)];
    std::array<double, 4> acc{};
    for (int j = 0; j < Nt; ++j) {
      const cplx pot = ie2 * (1 - std::norm(row[j])) * row[j];
      const cplx rot = cplx(0, h) * (row[j + 1 == Nt ? 0 : j + 1] - row[j == 0 ? Nt - 1 : j - 1]);
      acc[0] += std::norm(L[j] + pot + rot);
      acc[1] += std::norm(L[j]);
      acc[2] += std::norm(pot);
      acc[3] += std::norm(rot);
    }
    for (double& x : acc) x *= g.dA(k);
    part[k] = acc;
  }
  std::array<double, 4> tot{};
  for (const auto& p : part)
    for (int i = 0; i < 4; ++i) tot[i] += p[i];
  const double scale = std::sqrt(std::max({tot[1], tot[2], tot[3]}));
  if (!(scale > 0)) return 0.0;
  return std::sqrt(tot[0]) / scale;
}

// ---------------------------------------------------------------------------
// Symmetry

/// Average over the group generated by the mirror s -> l - s and the rotation
/// theta -> theta + 2 pi / n. Every orbit receives one value, so the result is
/// symmetric node for node.
inline ComplexField symmetrize(const ComplexField& u, int n, bool mirror = true) {
  const Grid& g = *u.grid;
  const int Nt = g.n_theta(), Ns = g.n_s();
  if (n < 1 || Nt % n != 0) throw InputError("symmetrize: N_theta must be divisible by n");
  if (mirror && Ns % 2 != 0) throw InputError("symmetrize: N_s must be even");
  const int shift = Nt / n;
  const int rows = mirror ? Ns / 2 : Ns;
  const double w = 1.0 / (n * (mirror ? 2 : 1));
  ComplexField out(u.grid, u.eps, 0.0);
#pragma omp parallel for schedule(static)
  for (int k = 0; k < rows; ++k) {
    const int km = Ns - 1 - k;
    for (int j = 0; j < shift; ++j) {
      cplx acc = 0;
      for (int m = 0; m < n; ++m) {
        acc += u(k, j + m * shift);
        if (mirror) acc += u(km, j + m * shift);
      }
      acc *= w;
      for (int m = 0; m < n; ++m) {
        out(k, j + m * shift) = acc;
        if (mirror) out(km, j + m * shift) = acc;
      }
    }
  }
  return out;
}

/// Node-exact check of the mirror and n-fold symmetries.
inline bool is_symmetric(const ComplexField& u, int n, bool mirror = true) {
  const int Nt = u.n_theta(), Ns = u.n_s();
  if (n < 1 || Nt % n != 0) return false;
  const int shift = Nt / n;
  for (int k = 0; k < Ns; ++k)
    for (int j = 0; j < Nt; ++j) {
      if (u(k, j) != u(k, (j + shift) % Nt)) return false;
      if (mirror && u(k, j) != u(Ns - 1 - k, j)) return false;
    }
  return true;
}

/// Bilinear interpolation of a field onto another grid over the same profile.
inline ComplexField interpolate(const ComplexField& u, std::shared_ptr<const Grid> target, double eps) {
  const Grid& g = *u.grid;
  ComplexField out(target, eps, 0.0);
  const int Nt = g.n_theta(), Ns = g.n_s();
  for (int k = 0; k < target->n_s(); ++k) {
    double y = target->s(k) / g.ds() - 0.5;
    y = std::clamp(y, 0.0, Ns - 1.0);
    const int k0 = std::min(static_cast<int>(y), Ns - 2);
    const double b = y - k0;
    for (int j = 0; j < target->n_theta(); ++j) {
      const double x = target->theta(j) / g.dtheta();
      const int j0 = static_cast<int>(std::floor(x)) % Nt;
      const double a = x - std::floor(x);
      const int j1 = (j0 + 1) % Nt;
      out(k, j) = (1 - b) * ((1 - a) * u(k0, j0) + a * u(k0, j1)) + b * ((1 - a) * u(k0 + 1, j0) + a * u(k0 + 1, j1));
    }
  }
  return out;
}

}  // namespace revortex
