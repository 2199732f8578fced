#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "revortex/dynamics.hpp"
#include "revortex/field.hpp"
#include "revortex/gpmin.hpp"
#include "revortex/rings.hpp"
#include "revortex/vortexfind.hpp"

namespace revortex {

/// Shortest text that still round-trips: 17 significant digits.
inline std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline void write_ring_csv_header(std::ostream& os) { os << "n,r1,r2,s1,s2,omega0,residual\n"; }

inline void write_ring_csv_row(std::ostream& os, const RingSolution& r) {
  os << r.n << ',' << fmt(r.r1) << ',' << fmt(r.r2) << ',' << fmt(r.s1) << ',' << fmt(r.s2) << ',' << fmt(r.omega0)
     << ',' << fmt(r.residual) << '\n';
}

/// One row per recorded time: t, x_i, y_i for every vortex, then W and M when logged.
inline void write_trajectory_csv(std::ostream& os, const Trajectory& tr) {
  if (tr.states.empty()) return;
  const std::size_t m = tr.states.front().size();
  const bool inv = tr.invariant_log.size() == tr.states.size();
  os << 't';
  for (std::size_t i = 0; i < m; ++i) os << ",x" << i << ",y" << i;
  if (inv) os << ",W,M";
  os << '\n';
  for (std::size_t k = 0; k < tr.states.size(); ++k) {
    os << fmt(tr.times[k]);
    for (const Vec2& p : tr.states[k].positions) os << ',' << fmt(p.x) << ',' << fmt(p.y);
    if (inv) os << ',' << fmt(tr.invariant_log[k].W) << ',' << fmt(tr.invariant_log[k].M);
    os << '\n';
  }
}

inline void write_gp_csv_header(std::ostream& os) { os << "eps,energy,momentum,omega,residual,s_plus,s_minus\n"; }

inline void write_gp_csv_row(std::ostream& os, const ContinuationEntry& e) {
  os << fmt(e.eps) << ',' << fmt(e.energy) << ',' << fmt(e.momentum) << ',' << fmt(e.omega) << ','
     << fmt(e.residual) << ',' << fmt(e.s_plus) << ',' << fmt(e.s_minus) << '\n';
}

inline void write_vortex_csv(std::ostream& os, const std::vector<DetectedVortex>& v) {
  os << "id,degree,s,theta,radius,defect\n";
  for (std::size_t i = 0; i < v.size(); ++i)
    os << i << ',' << v[i].degree << ',' << fmt(v[i].center.s) << ',' << fmt(v[i].center.theta) << ','
       << fmt(v[i].radius) << ',' << fmt(v[i].defect) << '\n';
}

inline void write_orbit_report(std::ostream& os, const OrbitReport& r) {
  os << "n = " << r.n << '\n'
     << "s_plus = " << fmt(r.s_plus) << '\n'
     << "s_minus = " << fmt(r.s_minus) << '\n'
     << "spread_plus = " << fmt(r.spread_plus) << '\n'
     << "spread_minus = " << fmt(r.spread_minus) << '\n'
     << "spacing_plus = " << fmt(r.spacing_plus) << '\n'
     << "spacing_minus = " << fmt(r.spacing_minus) << '\n'
     << "error_plus = " << fmt(r.error_plus) << '\n'
     << "error_minus = " << fmt(r.error_minus) << '\n'
     << "mirror_defect = " << fmt(r.mirror_defect) << '\n';
}

// ---------------------------------------------------------------------------
// Binary field dump: "REVX1", u32 N_theta, u32 N_s, f64 eps, then
// N_s * N_theta pairs of f32 (re, im), s-major, all little-endian.

namespace detail {

template <class T>
void put_le(std::ostream& os, T v) {
  unsigned char b[sizeof(T)];
  std::memcpy(b, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
  os.write(reinterpret_cast<const char*>(b), sizeof(T));
}

template <class T>
T get_le(std::istream& is) {
  unsigned char b[sizeof(T)];
  if (!is.read(reinterpret_cast<char*>(b), sizeof(T))) throw InputError("field dump: truncated");
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
  T v;
  std::memcpy(&v, b, sizeof(T));
  return v;
}

}  // namespace detail

inline void write_field_dump(std::ostream& os, const ComplexField& u) {
  os.write("REVX1", 5);
  detail::put_le<std::uint32_t>(os, static_cast<std::uint32_t>(u.n_theta()));
  detail::put_le<std::uint32_t>(os, static_cast<std::uint32_t>(u.n_s()));
  detail::put_le<double>(os, u.eps);
  for (const cplx& z : u.values) {
    detail::put_le<float>(os, static_cast<float>(z.real()));
    detail::put_le<float>(os, static_cast<float>(z.imag()));
  }
}

inline void write_field_dump(const std::string& path, const ComplexField& u) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw InputError("cannot write " + path);
  write_field_dump(os, u);
}

struct FieldDump {
  int n_theta = 0, n_s = 0;
  double eps = 0;
  std::vector<cplx> values;
};

inline FieldDump read_field_dump(std::istream& is) {
  char magic[5];
  if (!is.read(magic, 5) || std::memcmp(magic, "REVX1", 5) != 0) throw InputError("field dump: bad magic");
  FieldDump d;
  d.n_theta = static_cast<int>(detail::get_le<std::uint32_t>(is));
  d.n_s = static_cast<int>(detail::get_le<std::uint32_t>(is));
  d.eps = detail::get_le<double>(is);
  d.values.resize(static_cast<std::size_t>(d.n_theta) * d.n_s);
  for (auto& z : d.values) {
    const float re = detail::get_le<float>(is);
    const float im = detail::get_le<float>(is);
    z = cplx(re, im);
  }
  return d;
}

/// Field from a dump, on a grid built over `profile`.
inline ComplexField load_field(const FieldDump& d, const ProfileCurve& profile) {
  ComplexField u(std::make_shared<Grid>(profile, d.n_theta, d.n_s), d.eps, 0.0);
  u.values = d.values;
  return u;
}

}  // namespace revortex
