#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include <fftw3.h>

#include "revortex/ansatz.hpp"
#include "revortex/field.hpp"
#include "revortex/vortexfind.hpp"

namespace revortex {

namespace detail {

/// FFTW planning is not thread safe.
inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace detail

/// Solves (-Delta_h + c) x = b for the discrete Laplacian of laplacian():
/// a DFT along theta decouples the Fourier modes, each mode is a tridiagonal
/// system in s.
class SobolevPreconditioner {
 public:
  SobolevPreconditioner(std::shared_ptr<const Grid> grid, double shift) : grid_(std::move(grid)), shift_(shift) {
    if (!(shift > 0)) throw InputError("preconditioner: shift must be positive");
    const Grid& g = *grid_;
    const int Nt = g.n_theta(), Ns = g.n_s();
    buf_ = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * g.size()));
    {
      std::lock_guard<std::mutex> lock(detail::fftw_planner_mutex());
      int n[] = {Nt};
      fwd_ = fftw_plan_many_dft(1, n, Ns, buf_, nullptr, 1, Nt, buf_, nullptr, 1, Nt, FFTW_FORWARD, FFTW_ESTIMATE);
      bwd_ = fftw_plan_many_dft(1, n, Ns, buf_, nullptr, 1, Nt, buf_, nullptr, 1, Nt, FFTW_BACKWARD, FFTW_ESTIMATE);
    }
    // Thomas factorization for every mode, stored s-major so sweeps run along rows.
    lower_.resize(g.size());
    upper_.resize(g.size());
    inv_diag_.resize(g.size());
    const double ds2 = g.ds() * g.ds(), dt2 = g.dtheta() * g.dtheta();
    for (int m = 0; m < Nt; ++m) {
      const double lam = (2 - 2 * std::cos(two_pi * m / Nt)) / dt2;
      double prev_upper = 0;
      for (int k = 0; k < Ns; ++k) {
        const double a = g.alpha(k);
        const double lo = -g.face_alpha(k) / (a * ds2);
        const double up = -g.face_alpha(k + 1) / (a * ds2);
        const double diag = (g.face_alpha(k) + g.face_alpha(k + 1)) / (a * ds2) + lam / (a * a) + shift_;
        const double d = diag - (k > 0 ? lo * prev_upper : 0.0);
        const std::size_t id = g.index(k, m);
        inv_diag_[id] = 1 / d;
        lower_[id] = lo;
        upper_[id] = up / d;
        prev_upper = upper_[id];
      }
    }
  }

  SobolevPreconditioner(const SobolevPreconditioner&) = delete;
  SobolevPreconditioner& operator=(const SobolevPreconditioner&) = delete;

  ~SobolevPreconditioner() {
    std::lock_guard<std::mutex> lock(detail::fftw_planner_mutex());
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(bwd_);
    fftw_free(buf_);
  }

  double shift() const { return shift_; }

  ComplexField apply(const ComplexField& b) const {
    const Grid& g = *grid_;
    const int Nt = g.n_theta(), Ns = g.n_s();
    auto* z = reinterpret_cast<cplx*>(buf_);
    std::copy(b.values.begin(), b.values.end(), z);
    fftw_execute(fwd_);
    // Forward sweep, then back substitution, all modes of a row at once.
    for (int k = 0; k < Ns; ++k) {
      cplx* row = z + g.index(k, 0);
      const cplx* prev = k > 0 ? z + g.index(k - 1, 0) : nullptr;
      const double* lo = &lower_[g.index(k, 0)];
      const double* inv = &inv_diag_[g.index(k, 0)];
      for (int m = 0; m < Nt; ++m) row[m] = (row[m] - (prev ? lo[m] * prev[m] : cplx(0))) * inv[m];
    }
    for (int k = Ns - 2; k >= 0; --k) {
      cplx* row = z + g.index(k, 0);
      const cplx* next = z + g.index(k + 1, 0);
      const double* up = &upper_[g.index(k, 0)];
      for (int m = 0; m < Nt; ++m) row[m] -= up[m] * next[m];
    }
    fftw_execute(bwd_);
    ComplexField out(b.grid, b.eps, 0.0);
    const double scale = 1.0 / Nt;
    for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] = z[i] * scale;
    return out;
  }

 private:
  std::shared_ptr<const Grid> grid_;
  double shift_;
  fftw_complex* buf_ = nullptr;
  fftw_plan fwd_{}, bwd_{};
  std::vector<double> lower_, upper_, inv_diag_;
};

struct MinimizeOptions {
  /// Symmetry order n (rotation by 2 pi / n) and the mirror s -> l - s.
  int n = 1;
  bool mirror = true;
  /// Relative energy decrease counted as stagnation.
  double rtol = 1e-10;
  /// Consecutive stagnating iterations before stopping.
  int stall_window = 100;
  /// Constraint tolerance relative to |p_target|.
  double ptol_rel = 1e-8;
  /// Stop once the relative rotating-frame residual is below this.
  double gtol = 1e-5;
  long max_iters = 200000;
  /// Step length in the preconditioned metric for the first iteration.
  double eta0 = 1.0;
  /// Shift c of the preconditioner -Delta + c; 0 picks 1/eps.
  double shift = 0;
  /// The trial step never exceeds this multiple of the last accepted step.
  double max_growth = 4.0;
  /// Energy increase tolerated by the line search, relative to |E|.
  double ls_tol = 1e-12;
  /// Called every `progress_every` iterations with (iteration, energy, residual).
  std::function<void(long, double, double)> progress;
  long progress_every = 500;
  /// Iterations between residual evaluations.
  long check_every = 10;
};

struct MinimizeReport {
  long iterations = 0;
  double energy = 0;
  double initial_energy = 0;
  double momentum = 0;
  double p_target = 0;
  double omega = 0;
  double residual = 0;
  bool converged = false;
  std::string reason;
  /// Largest relative energy increase over accepted iterations.
  double max_energy_increase = 0;
  /// Iterations whose iterate failed the node-exact symmetry check.
  long symmetry_failures = 0;
  /// Halvings of the step length summed over all iterations.
  long backtracks = 0;
};

struct MinimizeResult {
  ComplexField u;
  double omega = 0;
  MinimizeReport report;
};

/// Solver error that keeps the best iterate reached.
class MinimizeError : public SolverError {
 public:
  MinimizeError(const std::string& what, MinimizeResult best)
      : SolverError(what), best_(std::make_shared<MinimizeResult>(std::move(best))) {}
  const MinimizeResult& best() const { return *best_; }

 private:
  std::shared_ptr<MinimizeResult> best_;
};

namespace detail {

inline void axpy_into(ComplexField& y, double a, const ComplexField& x) {
  for (std::size_t i = 0; i < y.values.size(); ++i) y.values[i] += a * x.values[i];
}

/// Moves u along h so that P(u + mu h) = p; P is quadratic, so this is exact.
inline bool correct_momentum(ComplexField& u, const ComplexField& h, double p) {
  const double P0 = momentum(u);
  const double B = inner(momentum_gradient(u), h);
  const double C = momentum(h);
  const double rhs = p - P0;
  double mu;
  if (std::abs(C) * rhs * rhs <= 1e-14 * B * B) {
    if (B == 0) return rhs == 0;
    mu = rhs / B;
  } else {
    const double disc = B * B + 4 * C * rhs;
    if (disc < 0) return false;
    // Root of smallest magnitude, written to avoid cancellation.
    const double q = -0.5 * (-B - std::copysign(std::sqrt(disc), -B));
    mu = rhs / q;
    if (!std::isfinite(mu)) return false;
  }
  axpy_into(u, mu, h);
  return true;
}

}  // namespace detail

/// Minimizes gl_energy over fields with the mirror and n-fold symmetries and
/// momentum p_target.
///
/// Preconditioned projected gradient descent: the Sobolev gradient is made
/// tangent to the constraint with the multiplier lambda, the step length is
/// Barzilai-Borwein with monotone backtracking, and after each step the
/// constraint is restored exactly along the Sobolev gradient of P. The
/// rotation rate is omega = -2 lambda for the L^2 multiplier lambda.
inline MinimizeResult minimize_constrained(const ComplexField& u0, double p_target, const MinimizeOptions& opt = {}) {
  if (!u0.finite()) throw InputError("minimize_constrained: non-finite start");
  const double eps = u0.eps;
  const double shift = opt.shift > 0 ? opt.shift : 1 / eps;
  SobolevPreconditioner M(u0.grid, shift);
  const double ptol = opt.ptol_rel * std::max(1.0, std::abs(p_target));
  auto sym = [&](const ComplexField& v) { return symmetrize(v, opt.n, opt.mirror); };

  MinimizeResult res;
  res.report.p_target = p_target;
  ComplexField u = sym(u0);
  res.report.initial_energy = gl_energy(u);
  {
    const ComplexField hP = M.apply(momentum_gradient(u));
    for (int it = 0; it < 5 && std::abs(momentum(u) - p_target) > ptol; ++it) {
      if (!detail::correct_momentum(u, hP, p_target))
        throw SolverError("minimize_constrained: cannot reach the momentum constraint from the start field");
      u = sym(u);
    }
  }
  double E = gl_energy(u);

  ComplexField u_prev, g_prev, d_prev;
  bool have_prev = false;
  double eta = opt.eta0, eta_accepted = opt.eta0;
  int stall = 0;

  auto finish = [&](bool ok, std::string why, const ComplexField& GE, const ComplexField& GP, long it) {
    res.u = u;
    res.omega = lagrange_omega(GE, GP);
    res.report.iterations = it;
    res.report.energy = E;
    res.report.momentum = momentum(u);
    res.report.omega = res.omega;
    res.report.residual = gp_residual(u, res.omega);
    res.report.converged = ok;
    res.report.reason = std::move(why);
  };

  for (long it = 0;; ++it) {
    const ComplexField GE = gl_gradient(u);
    const ComplexField GP = momentum_gradient(u);
    const double P = momentum(u);
    const double omega = lagrange_omega(GE, GP);
    const bool check = it % opt.check_every == 0 || stall >= opt.stall_window || it >= opt.max_iters;
    const double resid = check ? gp_residual(u, omega) : INFINITY;
    if (check && !is_symmetric(u, opt.n, opt.mirror)) ++res.report.symmetry_failures;
    if (opt.progress && it % opt.progress_every == 0) opt.progress(it, E, check ? resid : gp_residual(u, omega));

    if (std::abs(P - p_target) <= ptol && resid <= opt.gtol) {
      finish(true, "residual below tolerance", GE, GP, it);
      return res;
    }
    if (std::abs(P - p_target) <= ptol && stall >= opt.stall_window) {
      finish(true, "energy stagnation", GE, GP, it);
      return res;
    }
    if (it >= opt.max_iters) {
      finish(false, "iteration limit", GE, GP, it);
      throw MinimizeError("minimize_constrained: no convergence within max_iters", res);
    }

    const ComplexField hE = M.apply(GE);
    const ComplexField hP = M.apply(GP);
    const double lam = inner(GP, hE) / inner(GP, hP);
    ComplexField d = hE;
    for (std::size_t i = 0; i < d.values.size(); ++i) d.values[i] = lam * hP.values[i] - hE.values[i];
    ComplexField gt = GE;
    detail::axpy_into(gt, -lam, GP);

    if (have_prev) {
      double sy = 0, yMy = 0;
      ComplexField s = u, y = gt, my = d_prev;
      detail::axpy_into(s, -1, u_prev);
      detail::axpy_into(y, -1, g_prev);
      detail::axpy_into(my, -1, d);
      sy = inner(s, y);
      yMy = inner(y, my);
      if (sy > 0 && yMy > 0) eta = std::clamp(sy / yMy, 1e-8, 1e4);
      eta = std::min(eta, opt.max_growth * eta_accepted);
    }

    ComplexField trial;
    double E_trial = E;
    bool accepted = false;
    for (int bt = 0; bt < 60; ++bt) {
      trial = u;
      detail::axpy_into(trial, eta, d);
      if (detail::correct_momentum(trial, hP, p_target)) {
        trial = sym(trial);
        E_trial = gl_energy(trial);
        if (std::isfinite(E_trial) && E_trial <= E + opt.ls_tol * std::abs(E)) {
          accepted = true;
          break;
        }
      }
      eta *= 0.5;
      ++res.report.backtracks;
    }
    if (!accepted) {
      if (std::abs(P - p_target) <= ptol) {
        finish(true, "line search exhausted", GE, GP, it);
        return res;
      }
      finish(false, "line search failed", GE, GP, it);
      throw MinimizeError("minimize_constrained: line search failed", res);
    }

    const double rel = (E - E_trial) / std::max(1e-300, std::abs(E));
    res.report.max_energy_increase = std::max(res.report.max_energy_increase, -rel);
    stall = rel < opt.rtol ? stall + 1 : 0;

    eta_accepted = eta;
    u_prev = std::move(u);
    g_prev = std::move(gt);
    d_prev = std::move(d);
    have_prev = true;
    u = std::move(trial);
    E = E_trial;
  }
}

struct ContinuationEntry {
  double eps = 0;
  ComplexField u;
  double energy = 0;
  double momentum = 0;
  double omega = 0;
  double residual = 0;
  std::vector<DetectedVortex> vortices;
  /// Mean latitudes of the positive and negative vortices (NaN when detection fails).
  double s_plus = NAN, s_minus = NAN;
  /// "ansatz" or "previous", whichever start had the lower energy.
  std::string start;
  MinimizeReport report;
};

struct ContinuationOptions {
  MinimizeOptions minimize{};
  /// Offer the previous minimizer as a start; the lower-energy of it and the
  /// fresh ansatz is used.
  bool warm_start = true;
  CorePhase core = CorePhase::polar_angle;
  DetectOptions detect{};
  /// Called after each eps, so partial results survive a later failure.
  std::function<void(const ContinuationEntry&)> on_entry;
};

/// Constrained minimizers along a decreasing eps schedule. Each target
/// momentum is P(ansatz) at that eps.
inline std::vector<ContinuationEntry> continuation(const ConformalAtlas& atlas,
                                                   const std::function<std::shared_ptr<const Grid>(double)>& grid_for,
                                                   const RingSolution& ring, const std::vector<double>& schedule,
                                                   const ContinuationOptions& opt = {}) {
  for (std::size_t i = 1; i < schedule.size(); ++i)
    if (!(schedule[i] < schedule[i - 1])) throw InputError("continuation: eps schedule must decrease");
  std::vector<ContinuationEntry> out;
  for (double eps : schedule) {
    auto grid = grid_for(eps);
    const ComplexField ansatz = build_ansatz(atlas, grid, ring, eps, opt.core);
    const double p = momentum(ansatz);
    ComplexField start = ansatz;
    std::string start_name = "ansatz";
    if (opt.warm_start && !out.empty()) {
      // Cores of a larger-eps minimizer are too wide for this eps, so it only
      // wins when its energy is actually lower.
      ComplexField warm = interpolate(out.back().u, grid, eps);
      if (gl_energy(warm) < gl_energy(ansatz)) {
        start = std::move(warm);
        start_name = "previous";
      }
    }
    MinimizeOptions mo = opt.minimize;
    mo.n = ring.n;
    MinimizeResult r;
    try {
      r = minimize_constrained(start, p, mo);
    } catch (const SolverError&) {
      if (start_name == "ansatz") throw;
      start_name = "ansatz";
      r = minimize_constrained(ansatz, p, mo);
    }
    ContinuationEntry e;
    e.eps = eps;
    e.energy = r.report.energy;
    e.momentum = r.report.momentum;
    e.omega = r.omega;
    e.residual = r.report.residual;
    e.report = r.report;
    e.start = start_name;
    try {
      e.vortices = detect_vortices(r.u, opt.detect);
      const auto rep = compare_orbits(e.vortices, ring, grid->length());
      e.s_plus = rep.s_plus;
      e.s_minus = rep.s_minus;
    } catch (const Error&) {
    }
    e.u = std::move(r.u);
    if (opt.on_entry) opt.on_entry(e);
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace revortex
