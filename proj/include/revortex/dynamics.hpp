#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "revortex/renorm.hpp"

namespace revortex {

struct DynamicsOptions {
  /// Minimum allowed vortex separation.
  double collision = 1e-6;
  /// Vortices must satisfy r_min <= r <= 1/r_min in the plane.
  double r_min = 1e-4;
};

inline void check_state(const VortexConfiguration& c, const DynamicsOptions& opt) {
  for (auto p : c.positions) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) throw DynamicsError("non-finite vortex position");
    const double r = norm(p);
    if (r < opt.r_min || r > 1 / opt.r_min) throw DynamicsError("vortex too close to a pole");
  }
  if (c.size() > 1 && c.min_separation() < opt.collision) throw DynamicsError("vortex collision");
}

/// Velocities of the generalized point-vortex system:
/// d_i p_i' = -(r_i^2/alpha_i^2) [d_i^2 (1 - alpha_i') p_i^perp / r_i^2 + 2 sum_j d_i d_j (p_i - p_j)^perp / |p_i - p_j|^2].
inline std::vector<Vec2> pv_rhs(const ConformalAtlas& atlas, const VortexConfiguration& c,
                                const DynamicsOptions& opt = {}) {
  if (c.positions.size() != c.degrees.size()) throw InputError("pv_rhs: size mismatch");
  check_state(c, opt);
  const std::size_t m = c.size();
  std::vector<Vec2> v(m);
  for (std::size_t i = 0; i < m; ++i) {
    const Vec2 p = c.positions[i];
    const double r = norm(p);
    const double a = atlas.alpha_of_r(r), ap = atlas.alpha_prime_of_r(r);
    const double di = c.degrees[i];
    Vec2 b = (di * (1 - ap) / (r * r)) * perp(p);
    for (std::size_t j = 0; j < m; ++j) {
      if (j == i) continue;
      const Vec2 d = p - c.positions[j];
      b += (2.0 * c.degrees[j] / norm2(d)) * perp(d);
    }
    v[i] = -(r * r / (a * a)) * b;
  }
  return v;
}

/// The same velocities from the Hamiltonian form p_i' = e^{-2 f(b_i)} (grad_i W)^perp / (pi d_i).
inline std::vector<Vec2> pv_rhs_hamiltonian(const ConformalAtlas& atlas, const VortexConfiguration& c) {
  std::vector<Vec2> v(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    const double w = std::exp(-2 * atlas.conformal_factor(c.positions[i]));
    v[i] = (w / (pi * c.degrees[i])) * perp(grad_renormalized_energy(atlas, c, i));
  }
  return v;
}

struct Invariants {
  double W = 0;
  /// Moment of the rotation symmetry, sum d_i A(r_i) with A the cap area.
  double M = 0;
};

inline Invariants invariants(const ConformalAtlas& atlas, const VortexConfiguration& c) {
  Invariants inv;
  inv.W = renormalized_energy(atlas, c);
  for (std::size_t i = 0; i < c.size(); ++i) inv.M += c.degrees[i] * atlas.cap_area(norm(c.positions[i]));
  return inv;
}

enum class Integrator { rk4, rk4_adaptive };

struct IntegrateOptions {
  Integrator method = Integrator::rk4;
  DynamicsOptions guards{};
  /// Local error tolerance per step for rk4_adaptive (plane units).
  double adaptive_tol = 1e-10;
  /// Record every k-th accepted step (the final state is always recorded).
  int record_every = 1;
  bool record_invariants = true;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<VortexConfiguration> states;
  std::vector<Invariants> invariant_log;
  bool failed = false;
  std::string message;

  const VortexConfiguration& final_state() const { return states.back(); }
};

namespace detail {

inline VortexConfiguration axpy(const VortexConfiguration& c, double h, const std::vector<Vec2>& v) {
  VortexConfiguration out = c;
  for (std::size_t i = 0; i < c.size(); ++i) out.positions[i] += h * v[i];
  return out;
}

inline VortexConfiguration rk4_step(const ConformalAtlas& atlas, const VortexConfiguration& c, double h,
                                    const DynamicsOptions& g) {
  const auto k1 = pv_rhs(atlas, c, g);
  const auto k2 = pv_rhs(atlas, axpy(c, h / 2, k1), g);
  const auto k3 = pv_rhs(atlas, axpy(c, h / 2, k2), g);
  const auto k4 = pv_rhs(atlas, axpy(c, h, k3), g);
  VortexConfiguration out = c;
  for (std::size_t i = 0; i < c.size(); ++i)
    out.positions[i] += (h / 6) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  return out;
}

}  // namespace detail

/// Integrates the vortex system to t_end. A negative dt runs the flow backward
/// for a duration t_end; recorded times are elapsed times. Guard violations
/// end the run early with failed = true and the trajectory up to the last
/// good state.
inline Trajectory integrate(const ConformalAtlas& atlas, const VortexConfiguration& c0, double t_end, double dt,
                            const IntegrateOptions& opt = {}) {
  if (!(t_end > 0) || !std::isfinite(t_end)) throw InputError("integrate: t_end must be positive");
  if (!(dt != 0) || !std::isfinite(dt)) throw InputError("integrate: dt must be nonzero");
  c0.check();
  const double dir = dt > 0 ? 1.0 : -1.0;
  double h = std::abs(dt);

  Trajectory tr;
  auto record = [&](double t, const VortexConfiguration& c) {
    tr.times.push_back(t);
    tr.states.push_back(c);
    if (opt.record_invariants) tr.invariant_log.push_back(invariants(atlas, c));
  };

  VortexConfiguration c = c0;
  double t = 0;
  try {
    check_state(c, opt.guards);
    record(0, c);
    long step = 0;
    while (t < t_end) {
      // Land exactly on t_end; avoid a sliver of a last step.
      double step_h = std::min(h, t_end - t);
      if (t_end - t - step_h < 1e-12 * t_end) step_h = t_end - t;
      VortexConfiguration next;
      if (opt.method == Integrator::rk4) {
        next = detail::rk4_step(atlas, c, dir * step_h, opt.guards);
      } else {
        const auto full = detail::rk4_step(atlas, c, dir * step_h, opt.guards);
        const auto half = detail::rk4_step(atlas, detail::rk4_step(atlas, c, dir * step_h / 2, opt.guards),
                                           dir * step_h / 2, opt.guards);
        double err = 0;
        for (std::size_t i = 0; i < c.size(); ++i) err = std::max(err, norm(full.positions[i] - half.positions[i]));
        err /= 15;
        if (err > opt.adaptive_tol && step_h > 1e-14 * t_end) {
          h = step_h * std::max(0.2, 0.9 * std::pow(opt.adaptive_tol / err, 0.2));
          continue;
        }
        next = half;
        for (std::size_t i = 0; i < c.size(); ++i) next.positions[i] += (1.0 / 15) * (half.positions[i] - full.positions[i]);
        if (err > 0) h = step_h * std::min(4.0, 0.9 * std::pow(opt.adaptive_tol / err, 0.2));
        else h = step_h * 4;
      }
      check_state(next, opt.guards);
      c = std::move(next);
      t = (t_end - t - step_h == 0) ? t_end : t + step_h;
      ++step;
      if (step % std::max(1, opt.record_every) == 0 || t >= t_end) record(t, c);
    }
  } catch (const DynamicsError& e) {
    tr.failed = true;
    tr.message = e.what();
    if (!tr.times.empty() && tr.times.back() != t) {
      tr.times.push_back(t);
      tr.states.push_back(c);
      if (opt.record_invariants) tr.invariant_log.push_back(invariants(atlas, c));
    }
  }
  return tr;
}

}  // namespace revortex
