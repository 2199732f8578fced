#pragma once

#include <array>
#include <cmath>
#include <memory>

#include "revortex/field.hpp"
#include "revortex/rings.hpp"

namespace revortex {

/// Phase used inside the vortex balls.
enum class CorePhase {
  /// Local polar angle plus a constant, blended to chi on the annulus.
  polar_angle,
  /// The harmonic phase chi itself, so no blending is needed.
  harmonic,
};

/// Vortex-ring trial field v_eps.
///
/// Outside balls of radius eps + eps^2 around the 2n ring vortices u = e^{i chi}
/// with chi the harmonic phase of the ring configuration. Inside radius eps the
/// modulus ramps as rho/eps with the local polar angle as phase; on the thin
/// annulus between, the phase is blended linearly in rho back to chi. Distances
/// are chords in the embedding, angles are measured in the tangent frame
/// (e_s, e_theta) at each vortex.
///
/// CorePhase::harmonic replaces the polar angle by chi inside the balls. It
/// removes the O(eps) energy of the phase mismatch on the annulus.
inline ComplexField build_ansatz(const ConformalAtlas& atlas, std::shared_ptr<const Grid> grid,
                                 const RingSolution& ring, double eps, CorePhase core = CorePhase::polar_angle) {
  const Grid& g = *grid;
  if (!(eps > 0)) throw InputError("build_ansatz: epsilon must be positive");
  if (g.ds() > eps / 4 * (1 + 1e-12)) throw InputError("build_ansatz: grid does not resolve eps (need ds <= eps/4)");
  const auto& prof = atlas.profile();
  const double outer = eps + eps * eps;

  const VortexConfiguration cfg = expand(ring);
  const std::size_t m = cfg.size();
  struct Core {
    std::array<double, 3> C, es, et;
    int d;
    double phase0;
  };
  std::vector<Core> cores(m);
  for (std::size_t i = 0; i < m; ++i) {
    const Vec2 p = cfg.positions[i];
    const double si = atlas.s_of_r(norm(p));
    if (si < outer || si > prof.length - outer) throw InputError("build_ansatz: vortex ball reaches a pole");
    const double th = std::atan2(p.y, p.x);
    const double a = prof.alpha(si), ap = prof.alpha_prime(si), bp = prof.beta_prime(si);
    Core c;
    c.C = {a * std::cos(th), a * std::sin(th), prof.beta(si)};
    c.es = {ap * std::cos(th), ap * std::sin(th), bp};
    c.et = {-std::sin(th), std::cos(th), 0};
    c.d = cfg.degrees[i];
    // Phase of the other vortices at this centre, plus the direction offset of the local frame.
    double rest = 0;
    for (std::size_t j = 0; j < m; ++j) {
      if (j == i) continue;
      const Vec2 q = p - cfg.positions[j];
      rest += cfg.degrees[j] * std::atan2(q.y, q.x);
    }
    c.phase0 = rest + c.d * th;
    cores[i] = c;
  }
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j) {
      const auto& A = cores[i].C;
      const auto& B = cores[j].C;
      const double dist = std::hypot(A[0] - B[0], A[1] - B[1], A[2] - B[2]);
      if (dist <= 2 * outer) throw InputError("build_ansatz: vortex balls overlap");
    }

  ComplexField u(grid, eps, 1.0);
  const int Nt = g.n_theta(), Ns = g.n_s();
  const bool mirror = g.symmetric() && atlas.symmetric() && Ns % 2 == 0;
  const int rows = mirror ? Ns / 2 : Ns;
  // Fundamental domain only; the rest is copied, so symmetry holds node for node.
  const int cols = Nt % ring.n == 0 ? Nt / ring.n : Nt;
#pragma omp parallel for schedule(static)
  for (int k = 0; k < rows; ++k) {
    const double s = g.s(k);
    const double a = prof.alpha(s), b = prof.beta(s);
    const double r = atlas.r_of_s(s);
    for (int j = 0; j < cols; ++j) {
      const double th = g.theta(j);
      const Vec2 x{r * std::cos(th), r * std::sin(th)};
      const std::array<double, 3> X{a * std::cos(th), a * std::sin(th), b};
      const double chi = chi_phase(x, cfg);
      std::size_t best = 0;
      double rho = INFINITY;
      std::array<double, 3> v{};
      for (std::size_t i = 0; i < m; ++i) {
        const std::array<double, 3> w{X[0] - cores[i].C[0], X[1] - cores[i].C[1], X[2] - cores[i].C[2]};
        const double d = std::sqrt(w[0] * w[0] + w[1] * w[1] + w[2] * w[2]);
        if (d < rho) {
          rho = d;
          best = i;
          v = w;
        }
      }
      cplx val;
      if (rho >= outer) {
        val = std::polar(1.0, chi);
      } else {
        const Core& c = cores[best];
        const double loc = std::atan2(v[0] * c.et[0] + v[1] * c.et[1] + v[2] * c.et[2],
                                      v[0] * c.es[0] + v[1] * c.es[1] + v[2] * c.es[2]);
        const double inner_phase = core == CorePhase::harmonic ? chi : c.d * loc + c.phase0;
        if (rho <= eps) {
          val = std::polar(rho / eps, inner_phase);
        } else {
          const double t = (outer - rho) / (eps * eps);
          val = std::polar(1.0, chi - t * wrap_angle(chi - inner_phase));
        }
      }
      u(k, j) = val;
    }
  }
  for (int k = 0; k < rows; ++k)
    for (int j = cols; j < Nt; ++j) u(k, j) = u(k, j % cols);
  if (mirror)
    for (int k = 0; k < rows; ++k)
      for (int j = 0; j < Nt; ++j) u(Ns - 1 - k, j) = u(k, j);
  return u;
}

}  // namespace revortex
