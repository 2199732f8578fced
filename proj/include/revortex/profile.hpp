#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "revortex/core.hpp"

namespace revortex {

/// Arc-length parametrized generating curve (alpha(s), 0, beta(s)), 0 <= s <= l,
/// of a surface of revolution about the Z axis.
struct ProfileCurve {
  std::string name;
  std::function<double(double)> alpha;
  std::function<double(double)> beta;
  std::function<double(double)> alpha_prime;
  std::function<double(double)> beta_prime;
  double length = 0.0;
  /// Mirror symmetric about the plane Z = beta(l/2).
  bool symmetric = false;
};

/// Cubic Hermite interpolant on strictly increasing knots. When slopes are not
/// given they are those of the natural cubic spline through the data.
class CubicSpline {
 public:
  CubicSpline() = default;

  CubicSpline(std::vector<double> x, std::vector<double> y)
      : x_(std::move(x)), y_(std::move(y)) {
    check();
    m_ = natural_slopes(x_, y_);
  }

  CubicSpline(std::vector<double> x, std::vector<double> y, std::vector<double> slopes)
      : x_(std::move(x)), y_(std::move(y)), m_(std::move(slopes)) {
    check();
    if (m_.size() != x_.size()) throw InputError("spline: slope count mismatch");
  }

  double operator()(double t) const {
    const auto [i, u, h] = locate(t);
    const double h00 = (1 + 2 * u) * (1 - u) * (1 - u), h10 = u * (1 - u) * (1 - u);
    const double h01 = u * u * (3 - 2 * u), h11 = u * u * (u - 1);
    return h00 * y_[i] + h10 * h * m_[i] + h01 * y_[i + 1] + h11 * h * m_[i + 1];
  }

  double prime(double t) const {
    const auto [i, u, h] = locate(t);
    const double d00 = 6 * u * (u - 1), d10 = (1 - u) * (1 - 3 * u);
    const double d01 = 6 * u * (1 - u), d11 = u * (3 * u - 2);
    return (d00 * y_[i] + d01 * y_[i + 1]) / h + d10 * m_[i] + d11 * m_[i + 1];
  }

  const std::vector<double>& knots() const { return x_; }

 private:
  struct Loc { std::size_t i; double u; double h; };

  Loc locate(double t) const {
    auto it = std::upper_bound(x_.begin(), x_.end(), t);
    std::size_t i = it == x_.begin() ? 0 : static_cast<std::size_t>(it - x_.begin()) - 1;
    i = std::min(i, x_.size() - 2);
    const double h = x_[i + 1] - x_[i];
    return {i, (t - x_[i]) / h, h};
  }

  void check() const {
    if (x_.size() < 2 || x_.size() != y_.size()) throw InputError("spline: need >= 2 matching knots");
    for (std::size_t i = 1; i < x_.size(); ++i)
      if (!(x_[i] > x_[i - 1])) throw InputError("spline: knots must be strictly increasing");
  }

  static std::vector<double> natural_slopes(const std::vector<double>& x,
                                            const std::vector<double>& y) {
    const std::size_t n = x.size();
    if (n == 2) {
      const double d = (y[1] - y[0]) / (x[1] - x[0]);
      return {d, d};
    }
    // Tridiagonal system for the second derivatives, natural end conditions.
    std::vector<double> a(n, 0.0), b(n, 1.0), c(n, 0.0), r(n, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const double h0 = x[i] - x[i - 1], h1 = x[i + 1] - x[i];
      a[i] = h0 / 6;
      b[i] = (h0 + h1) / 3;
      c[i] = h1 / 6;
      r[i] = (y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0;
    }
    for (std::size_t i = 1; i < n; ++i) {
      const double w = a[i] / b[i - 1];
      b[i] -= w * c[i - 1];
      r[i] -= w * r[i - 1];
    }
    std::vector<double> m2(n);
    m2[n - 1] = r[n - 1] / b[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) m2[i] = (r[i] - c[i] * m2[i + 1]) / b[i];

    std::vector<double> slopes(n);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      const double h = x[i + 1] - x[i];
      slopes[i] = (y[i + 1] - y[i]) / h - h * (2 * m2[i] + m2[i + 1]) / 6;
    }
    const double h = x[n - 1] - x[n - 2];
    slopes[n - 1] = (y[n - 1] - y[n - 2]) / h + h * (m2[n - 2] + 2 * m2[n - 1]) / 6;
    return slopes;
  }

  std::vector<double> x_, y_, m_;
};

namespace detail {

inline std::function<double(double)> integrate_from_mid(std::function<double(double)> f,
                                                        double l) {
  // beta(s) = int_{l/2}^{s} beta'(t) dt, tabulated once and interpolated with
  // cubic Hermite polynomials on the exact slopes.
  using boost::math::quadrature::gauss_kronrod;
  const int n = 4096;
  const double h = l / n;
  auto y = std::make_shared<std::vector<double>>(n + 1);
  auto d = std::make_shared<std::vector<double>>(n + 1);
  for (int i = 0; i <= n; ++i) (*d)[i] = f(h * i);
  (*y)[n / 2] = 0;
  for (int i = n / 2; i < n; ++i)
    (*y)[i + 1] = (*y)[i] + gauss_kronrod<double, 15>::integrate(f, h * i, h * (i + 1), 0, 0);
  for (int i = n / 2; i > 0; --i)
    (*y)[i - 1] = (*y)[i] - gauss_kronrod<double, 15>::integrate(f, h * (i - 1), h * i, 0, 0);
  return [y, d, h, n](double s) {
    int k = std::clamp(static_cast<int>(s / h), 0, n - 1);
    const double u = s / h - k;
    const double h00 = (1 + 2 * u) * (1 - u) * (1 - u), h10 = u * (1 - u) * (1 - u);
    const double h01 = u * u * (3 - 2 * u), h11 = u * u * (u - 1);
    return h00 * (*y)[k] + h10 * h * (*d)[k] + h01 * (*y)[k + 1] + h11 * h * (*d)[k + 1];
  };
}

}  // namespace detail

/// Round sphere of radius R.
inline ProfileCurve sphere_profile(double radius = 1.0) {
  if (!(radius > 0)) throw InputError("sphere radius must be positive");
  ProfileCurve p;
  p.name = "sphere";
  p.length = pi * radius;
  p.symmetric = true;
  p.alpha = [radius](double s) { return radius * std::sin(s / radius); };
  p.beta = [radius](double s) { return -radius * std::cos(s / radius); };
  p.alpha_prime = [radius](double s) { return std::cos(s / radius); };
  p.beta_prime = [radius](double s) { return std::sin(s / radius); };
  return p;
}

/// Mirror-symmetric flattened sphere:
/// alpha' = cos s (1 - d sin^2 s), alpha = sin s - d sin^3 s / 3, l = pi.
/// Requires 0 <= d < 1.
inline ProfileCurve quartic_profile(double d = 0.3) {
  if (!(d >= 0 && d < 1)) throw InputError("quartic profile needs 0 <= d < 1");
  ProfileCurve p;
  p.name = "quartic";
  p.length = pi;
  p.symmetric = true;
  p.alpha = [d](double s) {
    const double sn = std::sin(s);
    return sn - d * sn * sn * sn / 3;
  };
  p.alpha_prime = [d](double s) {
    const double sn = std::sin(s);
    return std::cos(s) * (1 - d * sn * sn);
  };
  p.beta_prime = [d](double s) {
    const double sn = std::sin(s), cs = std::cos(s);
    return sn * std::sqrt(1 + cs * cs * (2 * d - d * d * sn * sn));
  };
  p.beta = detail::integrate_from_mid(p.beta_prime, p.length);
  return p;
}

/// Pear-shaped, not mirror symmetric:
/// alpha = sin s (1 + c sin^2 s cos s), l = pi. Requires 0 <= c < 1/6.
inline ProfileCurve pear_profile(double c = 0.1) {
  if (!(c >= 0 && c < 1.0 / 6)) throw InputError("pear profile needs 0 <= c < 1/6");
  ProfileCurve p;
  p.name = "pear";
  p.length = pi;
  p.symmetric = false;
  p.alpha = [c](double s) {
    const double sn = std::sin(s);
    return sn * (1 + c * sn * sn * std::cos(s));
  };
  p.alpha_prime = [c](double s) {
    const double sn = std::sin(s), cs = std::cos(s);
    return cs + c * sn * sn * (3 * cs * cs - sn * sn);
  };
  p.beta_prime = [c](double s) {
    const double sn = std::sin(s), cs = std::cos(s);
    const double extra = c * sn * sn * (3 * cs * cs - sn * sn);
    const double half_s = std::sin(s / 2), half_c = std::cos(s / 2);
    const double one_minus = 2 * half_s * half_s - extra;
    const double one_plus = 2 * half_c * half_c + extra;
    return std::sqrt(std::max(0.0, one_minus * one_plus));
  };
  p.beta = detail::integrate_from_mid(p.beta_prime, p.length);
  return p;
}

/// One tabulated row of a profile file.
struct ProfileSample {
  double s = 0, alpha = 0, beta = 0;
  double alpha_prime = NAN, beta_prime = NAN;
};

struct ProfileTable {
  double length = 0;
  bool symmetric = false;
  std::vector<ProfileSample> rows;
  bool has_derivatives = false;
};

/// Parses `l=<value> symmetric=<0|1>` followed by `s alpha beta [alpha' beta']` rows.
inline ProfileTable parse_profile_table(std::istream& in) {
  ProfileTable t;
  std::string line;
  bool header = false;
  int lineno = 0;
  int columns = -1;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    std::istringstream ls(line);
    std::string tok;
    if (!(ls >> tok)) continue;
    if (!header) {
      ls.clear();
      ls.str(line);
      bool got_l = false, got_sym = false;
      while (ls >> tok) {
        auto eq = tok.find('=');
        if (eq == std::string::npos) throw InputError("profile line " + std::to_string(lineno) + ": bad header token '" + tok + "'");
        const std::string key = tok.substr(0, eq), val = tok.substr(eq + 1);
        try {
          if (key == "l") { t.length = std::stod(val); got_l = true; }
          else if (key == "symmetric") { t.symmetric = std::stoi(val) != 0; got_sym = true; }
          else throw InputError("profile line " + std::to_string(lineno) + ": unknown header key '" + key + "'");
        } catch (const std::logic_error&) {
          throw InputError("profile line " + std::to_string(lineno) + ": bad value for '" + key + "'");
        }
      }
      if (!got_l || !got_sym) throw InputError("profile header must be `l=<value> symmetric=<0|1>`");
      header = true;
      continue;
    }
    ls.clear();
    ls.str(line);
    std::vector<double> v;
    double x;
    while (ls >> x) v.push_back(x);
    if (!ls.eof()) throw InputError("profile line " + std::to_string(lineno) + ": non-numeric field");
    if (v.size() != 3 && v.size() != 5) throw InputError("profile line " + std::to_string(lineno) + ": expected 3 or 5 columns");
    if (columns < 0) columns = static_cast<int>(v.size());
    if (columns != static_cast<int>(v.size())) throw InputError("profile line " + std::to_string(lineno) + ": inconsistent column count");
    ProfileSample r{v[0], v[1], v[2]};
    if (v.size() == 5) { r.alpha_prime = v[3]; r.beta_prime = v[4]; }
    t.rows.push_back(r);
  }
  if (!header) throw InputError("profile file is empty");
  t.has_derivatives = columns == 5;
  return t;
}

inline ProfileTable read_profile_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open profile file '" + path + "'");
  return parse_profile_table(in);
}

/// Builds a profile from tabulated samples. Derivatives come from the file when
/// present, otherwise from cubic-spline differentiation.
inline ProfileCurve profile_from_table(const ProfileTable& t, std::string name = "file") {
  if (t.rows.size() < 8) throw InputError("profile needs at least 8 samples");
  std::vector<double> s, a, b, ap, bp;
  for (const auto& r : t.rows) {
    s.push_back(r.s);
    a.push_back(r.alpha);
    b.push_back(r.beta);
    ap.push_back(r.alpha_prime);
    bp.push_back(r.beta_prime);
  }
  for (std::size_t i = 1; i < s.size(); ++i)
    if (!(s[i] > s[i - 1])) throw InputError("profile samples must be strictly increasing in s");

  std::shared_ptr<CubicSpline> sa, sb;
  if (t.has_derivatives) {
    sa = std::make_shared<CubicSpline>(s, a, ap);
    sb = std::make_shared<CubicSpline>(s, b, bp);
  } else {
    sa = std::make_shared<CubicSpline>(s, a);
    sb = std::make_shared<CubicSpline>(s, b);
  }
  ProfileCurve p;
  p.name = std::move(name);
  p.length = t.length > 0 ? t.length : s.back();
  p.symmetric = t.symmetric;
  p.alpha = [sa](double x) { return (*sa)(x); };
  p.beta = [sb](double x) { return (*sb)(x); };
  p.alpha_prime = [sa](double x) { return sa->prime(x); };
  p.beta_prime = [sb](double x) { return sb->prime(x); };
  return p;
}

/// Resolves `sphere`, `quartic`, `pear` or `file:<path>`.
inline ProfileCurve profile_by_name(const std::string& spec) {
  if (spec == "sphere") return sphere_profile();
  if (spec == "quartic") return quartic_profile();
  if (spec == "pear") return pear_profile();
  if (spec.rfind("file:", 0) == 0) {
    const std::string path = spec.substr(5);
    return profile_from_table(read_profile_table(path), spec);
  }
  throw InputError("unknown surface '" + spec + "' (expected sphere, quartic, pear or file:<path>)");
}

/// Samples a profile at n+1 uniform arc-length points.
inline std::vector<ProfileSample> sample_profile(const ProfileCurve& p, int n = 1000) {
  std::vector<ProfileSample> out;
  out.reserve(static_cast<std::size_t>(n) + 1);
  for (int i = 0; i <= n; ++i) {
    const double s = p.length * i / n;
    out.push_back({s, p.alpha(s), p.beta(s), p.alpha_prime(s), p.beta_prime(s)});
  }
  return out;
}

struct Violation {
  std::string invariant;
  double magnitude = 0;
};

struct ValidationReport {
  bool passed = true;
  double tolerance = 0;
  /// Every checked invariant with its worst-case magnitude.
  std::vector<Violation> checks;
  /// The subset of checks exceeding the tolerance.
  std::vector<Violation> violations;
};

/// Checks unit speed, pole conditions, interior positivity and (when flagged)
/// mirror symmetry. Missing derivatives are recovered with a cubic spline.
inline ValidationReport validate_profile(const std::vector<ProfileSample>& samples, double tol,
                                         bool symmetric = false) {
  if (samples.empty()) throw InputError("validate_profile: no samples");
  if (samples.size() < 8) throw InputError("validate_profile: need at least 8 samples");
  for (std::size_t i = 1; i < samples.size(); ++i)
    if (!(samples[i].s > samples[i - 1].s)) throw InputError("validate_profile: samples not sorted by s");

  const std::size_t n = samples.size();
  std::vector<double> s(n), a(n), b(n), ap(n), bp(n);
  bool have_d = true;
  for (std::size_t i = 0; i < n; ++i) {
    s[i] = samples[i].s;
    a[i] = samples[i].alpha;
    b[i] = samples[i].beta;
    ap[i] = samples[i].alpha_prime;
    bp[i] = samples[i].beta_prime;
    have_d = have_d && std::isfinite(ap[i]) && std::isfinite(bp[i]);
  }
  if (!have_d) {
    CubicSpline sa(s, a), sb(s, b);
    for (std::size_t i = 0; i < n; ++i) {
      ap[i] = sa.prime(s[i]);
      bp[i] = sb.prime(s[i]);
    }
  }

  ValidationReport rep;
  rep.tolerance = tol;
  auto record = [&](std::string what, double mag) {
    rep.checks.push_back({what, mag});
    if (!(mag <= tol)) {
      rep.passed = false;
      rep.violations.push_back({std::move(what), mag});
    }
  };

  double speed = 0;
  for (std::size_t i = 0; i < n; ++i) speed = std::max(speed, std::abs(ap[i] * ap[i] + bp[i] * bp[i] - 1));
  record("unit speed |alpha'^2 + beta'^2 - 1|", speed);
  record("pole |alpha(0)|", std::abs(a.front()));
  record("pole |alpha(l)|", std::abs(a.back()));
  record("pole |beta'(0)|", std::abs(bp.front()));
  record("pole |beta'(l)|", std::abs(bp.back()));
  double neg = 0;
  for (std::size_t i = 1; i + 1 < n; ++i) neg = std::max(neg, -a[i]);
  // positivity is strict: report the deficit (zero when alpha > 0 everywhere)
  {
    bool nonpositive = false;
    for (std::size_t i = 1; i + 1 < n; ++i) nonpositive = nonpositive || !(a[i] > 0);
    rep.checks.push_back({"interior alpha > 0", neg});
    if (nonpositive) {
      rep.passed = false;
      rep.violations.push_back({"interior alpha > 0", neg});
    }
  }
  if (symmetric) {
    CubicSpline sa(s, a), sb(s, b);
    const double l = s.back();
    const double mid = sb(l - s.front()) + b.front();
    double asym = 0, bsym = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double m = l - s[i] + s.front();
      asym = std::max(asym, std::abs(a[i] - sa(m)));
      bsym = std::max(bsym, std::abs(b[i] + sb(m) - mid));
    }
    record("symmetry |alpha(s) - alpha(l-s)|", asym);
    record("symmetry |beta(s) + beta(l-s) - const|", bsym);
  }
  return rep;
}

inline ValidationReport validate_profile(const ProfileCurve& p, double tol, int n = 1000) {
  return validate_profile(sample_profile(p, n), tol, p.symmetric);
}

}  // namespace revortex
