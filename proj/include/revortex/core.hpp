#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace revortex {

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// Error categories. The CLI maps these onto exit codes.
enum class ErrorKind { input, domain, solver, dynamics, detection, comparison };

inline const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::input: return "E_INPUT";
    case ErrorKind::domain: return "E_DOMAIN";
    case ErrorKind::solver: return "E_SOLVER";
    case ErrorKind::dynamics: return "E_DYNAMICS";
    case ErrorKind::detection: return "E_DETECTION";
    case ErrorKind::comparison: return "E_COMPARISON";
  }
  return "E_UNKNOWN";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

struct InputError : Error {
  explicit InputError(const std::string& w) : Error(ErrorKind::input, w) {}
};
struct DomainError : Error {
  explicit DomainError(const std::string& w) : Error(ErrorKind::domain, w) {}
};
struct SolverError : Error {
  explicit SolverError(const std::string& w) : Error(ErrorKind::solver, w) {}
};
struct DynamicsError : Error {
  explicit DynamicsError(const std::string& w) : Error(ErrorKind::dynamics, w) {}
};
struct DetectionError : Error {
  explicit DetectionError(const std::string& w) : Error(ErrorKind::detection, w) {}
};
struct ComparisonError : Error {
  explicit ComparisonError(const std::string& w) : Error(ErrorKind::comparison, w) {}
};

/// Point or vector in the conformal plane.
struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend constexpr Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend constexpr Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend constexpr Vec2 operator-(Vec2 a) { return {-a.x, -a.y}; }
  friend constexpr Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
  friend constexpr Vec2 operator*(Vec2 a, double s) { return {s * a.x, s * a.y}; }
  friend constexpr Vec2 operator/(Vec2 a, double s) { return {a.x / s, a.y / s}; }
  Vec2& operator+=(Vec2 b) { x += b.x; y += b.y; return *this; }
  Vec2& operator-=(Vec2 b) { x -= b.x; y -= b.y; return *this; }
  friend constexpr bool operator==(Vec2, Vec2) = default;
};

constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
constexpr double norm2(Vec2 a) { return dot(a, a); }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }

/// Counter-clockwise quarter turn, (x, y) -> (-y, x). This is the direction of
/// the rotational field d/dtheta in the plane.
constexpr Vec2 perp(Vec2 a) { return {-a.y, a.x}; }

inline Vec2 rotate(Vec2 a, double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  return {c * a.x - s * a.y, s * a.x + c * a.y};
}

/// Wrap an angle to (-pi, pi].
inline double wrap_angle(double a) {
  a = std::remainder(a, two_pi);
  if (a <= -pi) a += two_pi;
  return a;
}

/// Wrap an angle to [0, 2pi).
inline double wrap_angle_positive(double a) {
  a = std::fmod(a, two_pi);
  if (a < 0) a += two_pi;
  if (a >= two_pi) a -= two_pi;
  return a;
}

}  // namespace revortex
