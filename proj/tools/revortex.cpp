// revortex: point-vortex rings and rotating Gross-Pitaevskii states on surfaces of revolution.

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "revortex/revortex.hpp"

using namespace revortex;
namespace fs = std::filesystem;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_validation = 2;
constexpr int exit_solver = 3;

struct RunConfig {
  std::string surface = "sphere";
  int n = 1;
  std::optional<double> s1, r1;
  double r2_lo = 0, r2_hi = 0;
  std::string eps = "0.2,0.1,0.05";
  std::string grid = "512x256";
  std::optional<double> t_end, dt;
  std::string out;
  std::string in;
  std::uint64_t seed = 0;
  long max_iters = 200000;
  bool cold = false;
  std::string core = "polar";
  double tol_map = 1e-9;
  double tol_profile = 1e-6;
  double tol_ring = 1e-10;
  double tol_residual = 1e-5;
  double tol_energy = 1e-10;
  double tol_momentum = 1e-8;
};

const std::set<std::string> config_keys = {
    "surface", "n", "s1", "r1", "r2-lo", "r2-hi", "eps", "grid", "t-end", "dt", "out", "in", "seed", "max-iters",
    "cold", "core", "tol-map", "tol-profile", "tol-ring", "tol-residual", "tol-energy", "tol-momentum"};

void add_common(CLI::App* app, RunConfig& c) {
  app->add_option("--surface", c.surface, "sphere, quartic, pear or file:<path>");
  app->add_option("--n", c.n, "vortices per ring")->check(CLI::Range(1, 64));
  app->add_option("--s1", c.s1, "arc-length latitude of the positive ring");
  app->add_option("--r1", c.r1, "plane radius of the positive ring (default 0.5)");
  app->add_option("--r2-lo", c.r2_lo, "lower end of the r2 bracket for non-symmetric surfaces");
  app->add_option("--r2-hi", c.r2_hi, "upper end of the r2 bracket for non-symmetric surfaces");
  app->add_option("--eps", c.eps, "comma separated decreasing eps schedule");
  app->add_option("--grid", c.grid, "grid as NthetaxNs");
  app->add_option("--t-end", c.t_end, "integration time (default one rotation period)");
  app->add_option("--dt", c.dt, "time step (default period/2000)");
  app->add_option("--out", c.out, "output directory");
  app->add_option("--in", c.in, "input file or directory");
  app->add_option("--seed", c.seed, "seed recorded with the outputs");
  app->add_option("--max-iters", c.max_iters, "minimizer iteration cap");
  app->add_flag("--cold", c.cold, "start every eps from a fresh ansatz");
  app->add_option("--core", c.core, "vortex core phase of the ansatz: polar or harmonic")
      ->check(CLI::IsMember({"polar", "harmonic"}));
  app->add_option("--tol-map", c.tol_map, "conformal map tolerance");
  app->add_option("--tol-profile", c.tol_profile, "profile validation tolerance");
  app->add_option("--tol-ring", c.tol_ring, "ring residual tolerance");
  app->add_option("--tol-residual", c.tol_residual, "relative GP residual that stops the minimizer");
  app->add_option("--tol-energy", c.tol_energy, "relative energy decrease counted as stagnation");
  app->add_option("--tol-momentum", c.tol_momentum, "momentum constraint tolerance relative to |p|");
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

/// Appends `--key value` for every file entry not already given as a flag.
std::vector<std::string> inject_config(std::vector<std::string> args) {
  std::string path;
  std::set<std::string> given;
  for (std::size_t i = 0; i < args.size(); ++i) {
    const std::string& a = args[i];
    if (a == "--config") {
      if (i + 1 >= args.size()) throw InputError("--config needs a path");
      path = args[i + 1];
    } else if (a.rfind("--config=", 0) == 0) {
      path = a.substr(9);
    }
    if (a.rfind("--", 0) == 0) given.insert(a.substr(2, a.find('=') == std::string::npos ? std::string::npos : a.find('=') - 2));
  }
  if (path.empty()) return args;
  std::ifstream in(path);
  if (!in) throw InputError("cannot read config " + path);
  std::string line;
  int lineno = 0;
  std::vector<std::string> extra;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line.substr(0, line.find('#')));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw InputError(path + ":" + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    if (!config_keys.count(key)) throw InputError(path + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
    if (value.empty()) throw InputError(path + ":" + std::to_string(lineno) + ": empty value for '" + key + "'");
    if (given.count(key)) continue;
    if (key == "cold") {
      if (value == "true" || value == "1") extra.push_back("--cold");
      else if (value != "false" && value != "0")
        throw InputError(path + ":" + std::to_string(lineno) + ": cold must be true or false");
      continue;
    }
    extra.push_back("--" + key);
    extra.push_back(value);
  }
  // Drop --config itself; the file has been consumed.
  std::vector<std::string> out;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      ++i;
      continue;
    }
    if (args[i].rfind("--config=", 0) == 0) continue;
    out.push_back(args[i]);
  }
  out.insert(out.end(), extra.begin(), extra.end());
  return out;
}

std::vector<double> parse_eps_list(const std::string& s) {
  std::vector<double> v;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    tok = trim(tok);
    std::size_t used = 0;
    double x;
    try {
      x = std::stod(tok, &used);
    } catch (const std::exception&) {
      throw InputError("--eps: cannot parse '" + tok + "'");
    }
    if (used != tok.size() || !(x > 0)) throw InputError("--eps: bad value '" + tok + "'");
    v.push_back(x);
  }
  if (v.empty()) throw InputError("--eps: empty schedule");
  return v;
}

std::pair<int, int> parse_grid(const std::string& s) {
  const auto x = s.find('x');
  if (x == std::string::npos) throw InputError("--grid: expected NthetaxNs, got '" + s + "'");
  try {
    std::size_t u1 = 0, u2 = 0;
    const int nt = std::stoi(s.substr(0, x), &u1), ns = std::stoi(s.substr(x + 1), &u2);
    if (u1 != x || u2 != s.size() - x - 1 || nt < 4 || ns < 4) throw InputError("");
    return {nt, ns};
  } catch (const std::exception&) {
    throw InputError("--grid: expected NthetaxNs, got '" + s + "'");
  }
}

ConformalAtlas load_atlas(const RunConfig& c) {
  ProfileCurve p = profile_by_name(c.surface);
  const ValidationReport rep = validate_profile(p, c.tol_profile);
  if (!rep.passed) {
    std::string msg = "surface " + c.surface + " fails validation:";
    for (const auto& v : rep.violations) msg += " " + v.invariant + "=" + fmt(v.magnitude);
    throw InputError(msg);
  }
  return solve_conformal_map(std::move(p), c.tol_map);
}

RingSolution resolve_ring(const ConformalAtlas& atlas, const RunConfig& c) {
  if (c.s1 && c.r1) throw InputError("give either --s1 or --r1, not both");
  double r1 = 0.5;
  if (c.s1) {
    if (!(*c.s1 > 0 && *c.s1 < atlas.length())) throw InputError("--s1 must lie strictly between the poles");
    r1 = atlas.r_of_s(*c.s1);
  } else if (c.r1) {
    r1 = *c.r1;
  }
  if (!(r1 > 0) || !std::isfinite(r1)) throw InputError("--r1 must be positive");
  if (atlas.symmetric()) {
    if (std::abs(r1 - 1) < 1e-12) throw InputError("ring on the equator collides with its mirror image");
    return find_symmetric_ring(atlas, c.n, atlas.s_of_r(r1), c.tol_ring);
  }
  double lo = c.r2_lo, hi = c.r2_hi;
  if (lo == 0 && hi == 0) {
    if (r1 < 1) lo = r1 * 1.001, hi = 1e3;
    else lo = 1e-3, hi = r1 / 1.001;
  }
  RingSearchOptions o;
  o.tol = c.tol_ring;
  const auto ring = find_ring_general(atlas, c.n, r1, {lo, hi}, o);
  if (!ring)
    throw SolverError("no sign change of the ring residual for r2 in [" + fmt(lo) + ", " + fmt(hi) + "]");
  return *ring;
}

void ensure_dir(const std::string& d) {
  if (d.empty()) return;
  std::error_code ec;
  fs::create_directories(d, ec);
  if (ec) throw InputError("cannot create " + d + ": " + ec.message());
}

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path);
  if (!os) throw InputError("cannot write " + path);
  return os;
}

// ---------------------------------------------------------------------------

int cmd_surface_check(const RunConfig& c) {
  ProfileCurve p = profile_by_name(c.surface);
  const ValidationReport rep = validate_profile(p, c.tol_profile);
  std::cout << "surface = " << c.surface << "\n";
  for (const auto& v : rep.checks) std::cout << "check." << v.invariant << " = " << fmt(v.magnitude) << "\n";
  if (!rep.passed) {
    for (const auto& v : rep.violations)
      std::cerr << "error[E_INPUT]: invariant " << v.invariant << " violated by " << fmt(v.magnitude) << "\n";
    return exit_validation;
  }
  const ConformalAtlas a = solve_conformal_map(std::move(p), c.tol_map);
  std::cout << "length = " << fmt(a.length()) << "\n"
            << "area = " << fmt(a.total_area()) << "\n"
            << "symmetric = " << (a.symmetric() ? "true" : "false") << "\n"
            << "c = " << fmt(a.c()) << "\n"
            << "collocation_residual = " << fmt(a.collocation_residual()) << "\n";
  return exit_ok;
}

int cmd_rings_find(const RunConfig& c) {
  const ConformalAtlas atlas = load_atlas(c);
  const RingSolution ring = resolve_ring(atlas, c);
  write_ring_csv_header(std::cout);
  write_ring_csv_row(std::cout, ring);
  if (!c.out.empty()) {
    ensure_dir(c.out);
    auto os = open_out(c.out + "/rings.csv");
    write_ring_csv_header(os);
    write_ring_csv_row(os, ring);
  }
  return exit_ok;
}

int cmd_pv_simulate(const RunConfig& c) {
  const ConformalAtlas atlas = load_atlas(c);
  const RingSolution ring = resolve_ring(atlas, c);
  const double period = ring_period(ring);
  const double t_end = c.t_end.value_or(period);
  const double dt = c.dt.value_or(period / 2000);
  const VortexConfiguration c0 = expand(ring);
  const Trajectory tr = integrate(atlas, c0, t_end, dt);
  // Rigid rotation predicted by the ring.
  double ret = 0;
  const double angle = ring.omega0 * tr.times.back();
  for (std::size_t i = 0; i < c0.size(); ++i)
    ret = std::max(ret, norm(tr.final_state().positions[i] - rotate(c0.positions[i], angle)));
  const Invariants& i0 = tr.invariant_log.front();
  const Invariants& i1 = tr.invariant_log.back();
  std::ostringstream summary;
  summary << "period = " << fmt(period) << "\n"
          << "t_end = " << fmt(tr.times.back()) << "\n"
          << "dt = " << fmt(dt) << "\n"
          << "steps = " << tr.times.size() - 1 << "\n"
          << "rigid_rotation_error = " << fmt(ret) << "\n"
          << "energy_drift_rel = " << fmt(std::abs(i1.W - i0.W) / std::abs(i0.W)) << "\n"
          << "moment_drift_area = " << fmt(std::abs(i1.M - i0.M) / atlas.total_area()) << "\n"
          << "failed = " << (tr.failed ? "true" : "false") << "\n";
  std::cout << summary.str();
  if (!c.out.empty()) {
    ensure_dir(c.out);
    auto os = open_out(c.out + "/trajectory.csv");
    write_trajectory_csv(os, tr);
    open_out(c.out + "/pv_summary.txt") << summary.str();
  }
  if (tr.failed) {
    std::cerr << "error[E_DYNAMICS]: " << tr.message << "\n";
    return exit_solver;
  }
  return exit_ok;
}

std::string eps_tag(double eps) {
  std::ostringstream os;
  os << eps;
  return os.str();
}

int cmd_gp_minimize(const RunConfig& c) {
  const ConformalAtlas atlas = load_atlas(c);
  const RingSolution ring = resolve_ring(atlas, c);
  const auto schedule = parse_eps_list(c.eps);
  const auto [nt, ns] = parse_grid(c.grid);
  auto grid = std::make_shared<Grid>(atlas.profile(), nt, ns);
  ensure_dir(c.out);
  ContinuationOptions co;
  co.warm_start = !c.cold;
  co.core = c.core == "harmonic" ? CorePhase::harmonic : CorePhase::polar_angle;
  co.minimize.max_iters = c.max_iters;
  co.minimize.gtol = c.tol_residual;
  co.minimize.rtol = c.tol_energy;
  co.minimize.ptol_rel = c.tol_momentum;
  co.minimize.progress = [](long it, double E, double r) {
    std::cerr << "  iteration " << it << " energy " << fmt(E) << " residual " << fmt(r) << "\n";
  };
  co.minimize.progress_every = 1000;
  std::ofstream csv;
  if (!c.out.empty()) {
    csv = open_out(c.out + "/gp.csv");
    write_gp_csv_header(csv);
    auto rs = open_out(c.out + "/rings.csv");
    write_ring_csv_header(rs);
    write_ring_csv_row(rs, ring);
  }
  write_gp_csv_header(std::cout);
  co.on_entry = [&](const ContinuationEntry& e) {
    write_gp_csv_row(std::cout, e);
    std::cout.flush();
    if (c.out.empty()) return;
    write_gp_csv_row(csv, e);
    csv.flush();
    const std::string tag = eps_tag(e.eps);
    write_field_dump(c.out + "/field_eps" + tag + ".revx", e.u);
    auto vs = open_out(c.out + "/vortices_eps" + tag + ".csv");
    write_vortex_csv(vs, e.vortices);
    auto rep = open_out(c.out + "/report_eps" + tag + ".txt");
    rep << "eps = " << fmt(e.eps) << "\n"
        << "iterations = " << e.report.iterations << "\n"
        << "converged = " << (e.report.converged ? "true" : "false") << "\n"
        << "reason = " << e.report.reason << "\n"
        << "initial_energy = " << fmt(e.report.initial_energy) << "\n"
        << "energy = " << fmt(e.energy) << "\n"
        << "p_target = " << fmt(e.report.p_target) << "\n"
        << "momentum = " << fmt(e.momentum) << "\n"
        << "omega = " << fmt(e.omega) << "\n"
        << "residual = " << fmt(e.residual) << "\n"
        << "seed = " << c.seed << "\n";
    try {
      write_orbit_report(rep, compare_orbits(e.vortices, ring, atlas.length()));
    } catch (const Error& err) {
      rep << "orbit_error = " << err.what() << "\n";
    }
  };
  std::cerr << "ring: n=" << ring.n << " s1=" << fmt(ring.s1) << " s2=" << fmt(ring.s2) << " omega0=" << fmt(ring.omega0)
            << "\n";
  for (double e : schedule)
    if (grid->ds() > e / 4) throw InputError("grid " + c.grid + " does not resolve eps=" + fmt(e) + " (need ds <= eps/4)");
  continuation(atlas, [&](double) { return grid; }, ring, schedule, co);
  return exit_ok;
}

int cmd_gp_verify(const RunConfig& c) {
  if (c.in.empty()) throw InputError("gp verify needs --in <field dump>");
  const ConformalAtlas atlas = load_atlas(c);
  const RingSolution ring = resolve_ring(atlas, c);
  std::ifstream is(c.in, std::ios::binary);
  if (!is) throw InputError("cannot read " + c.in);
  const ComplexField u = load_field(read_field_dump(is), atlas.profile());
  if (!u.finite()) throw InputError("field dump contains non-finite values");
  const double omega = lagrange_omega(u);
  std::cout << "energy = " << fmt(gl_energy(u)) << "\n"
            << "momentum = " << fmt(momentum(u)) << "\n"
            << "omega = " << fmt(omega) << "\n"
            << "residual = " << fmt(gp_residual(u, omega)) << "\n"
            << "symmetric = " << (is_symmetric(u, ring.n) ? "true" : "false") << "\n";
  const auto found = detect_vortices(u);
  std::cout << "vortices = " << found.size() << "\n";
  write_orbit_report(std::cout, compare_orbits(found, ring, atlas.length()));
  return exit_ok;
}

std::map<std::string, std::string> read_key_values(const std::string& path) {
  std::map<std::string, std::string> kv;
  std::ifstream in(path);
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq != std::string::npos) kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return kv;
}

int cmd_report(const RunConfig& c) {
  if (c.in.empty()) throw InputError("report needs --in <directory>");
  struct Row {
    std::string name, value, limit;
    bool pass;
  };
  std::vector<Row> rows;
  bool all = true;
  auto add = [&](std::string name, double v, std::string limit, bool pass) {
    rows.push_back({std::move(name), fmt(v), std::move(limit), pass});
    all = all && pass;
  };
  const fs::path dir(c.in);
  if (fs::exists(dir / "pv_summary.txt")) {
    auto kv = read_key_values((dir / "pv_summary.txt").string());
    add("pv_rigid_rotation", std::stod(kv.at("rigid_rotation_error")), "<= 1e-6",
        std::stod(kv.at("rigid_rotation_error")) <= 1e-6);
    add("pv_energy_drift", std::stod(kv.at("energy_drift_rel")), "<= 1e-8", std::stod(kv.at("energy_drift_rel")) <= 1e-8);
    add("pv_moment_drift", std::stod(kv.at("moment_drift_area")), "<= 1e-8",
        std::stod(kv.at("moment_drift_area")) <= 1e-8);
  }
  if (fs::exists(dir / "gp.csv")) {
    if (!fs::exists(dir / "rings.csv")) throw InputError("report: gp.csv without rings.csv");
    std::ifstream rs(dir / "rings.csv");
    std::string line;
    std::getline(rs, line);
    std::getline(rs, line);
    std::vector<double> rv;
    {
      std::stringstream ss(line);
      std::string tok;
      while (std::getline(ss, tok, ',')) rv.push_back(std::stod(tok));
    }
    if (rv.size() != 7) throw InputError("report: malformed rings.csv");
    const int n = static_cast<int>(rv[0]);
    const double s1 = rv[3], s2 = rv[4], omega0 = rv[5];
    std::ifstream gs(dir / "gp.csv");
    std::getline(gs, line);
    std::vector<std::vector<double>> gp;
    while (std::getline(gs, line)) {
      std::stringstream ss(line);
      std::string tok;
      std::vector<double> r;
      while (std::getline(ss, tok, ',')) r.push_back(std::stod(tok));
      if (r.size() == 7) gp.push_back(r);
    }
    if (gp.size() >= 2) {
      double sx = 0, sy = 0, sxx = 0, sxy = 0;
      for (auto& r : gp) {
        const double x = std::abs(std::log(r[0]));
        sx += x, sy += r[1], sxx += x * x, sxy += x * r[1];
      }
      const double m = static_cast<double>(gp.size());
      const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
      add("gp_energy_slope_rel_error", std::abs(slope / (two_pi * n) - 1), "<= 0.05",
          std::abs(slope / (two_pi * n) - 1) <= 0.05);
    }
    double worst = 0;
    bool sign_ok = true, trend = true;
    double prev = INFINITY;
    for (auto& r : gp) {
      worst = std::max(worst, r[4]);
      sign_ok = sign_ok && r[3] * omega0 > 0;
      const double d = std::max(std::abs(r[5] - s1), std::abs(r[6] - s2));
      if (!(d < prev)) trend = false;
      prev = d;
    }
    add("gp_max_residual", worst, "<= 1e-3", worst <= 1e-3);
    add("gp_omega_sign_matches", sign_ok ? 1 : 0, "== 1", sign_ok);
    add("gp_orbit_error_decreasing", trend ? 1 : 0, "== 1", trend);
  }
  if (rows.empty()) throw InputError("report: nothing to summarize in " + c.in);
  std::cout << "check,value,limit,status\n";
  for (auto& r : rows) std::cout << r.name << ',' << r.value << ',' << r.limit << ',' << (r.pass ? "pass" : "fail") << '\n';
  return all ? exit_ok : exit_solver;
}

}  // namespace

int main(int argc, char** argv) {
  configure_threads_from_env();
  RunConfig cfg;
  CLI::App app{"Vortex rings on surfaces of revolution: point vortices and rotating GP states"};
  app.require_subcommand(1);
  app.add_option("--config", "key = value file; flags override it");

  auto* surface = app.add_subcommand("surface", "profile checks");
  auto* surface_check = surface->add_subcommand("check", "validate a profile and solve its conformal map");
  surface->require_subcommand(1);
  auto* rings = app.add_subcommand("rings", "ring solutions of the point-vortex problem");
  auto* rings_find = rings->add_subcommand("find", "find a rigidly rotating ring pair");
  rings->require_subcommand(1);
  auto* pv = app.add_subcommand("pv", "point-vortex dynamics");
  auto* pv_sim = pv->add_subcommand("simulate", "integrate a ring configuration");
  pv->require_subcommand(1);
  auto* gp = app.add_subcommand("gp", "Gross-Pitaevskii minimizers");
  auto* gp_min = gp->add_subcommand("minimize", "constrained minimization along an eps schedule");
  auto* gp_ver = gp->add_subcommand("verify", "residual and vortex check of a field dump");
  gp->require_subcommand(1);
  auto* report = app.add_subcommand("report", "summarize outputs against the acceptance limits");
  for (auto* s : {surface_check, rings_find, pv_sim, gp_min, gp_ver, report}) add_common(s, cfg);

  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    args = inject_config(std::move(args));
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error[E_INPUT]: " << e.what() << "\n";
    return exit_validation;
  } catch (const Error& e) {
    std::cerr << "error[" << to_string(e.kind()) << "]: " << e.what() << "\n";
    return exit_validation;
  }

  try {
    if (*surface_check) return cmd_surface_check(cfg);
    if (*rings_find) return cmd_rings_find(cfg);
    if (*pv_sim) return cmd_pv_simulate(cfg);
    if (*gp_min) return cmd_gp_minimize(cfg);
    if (*gp_ver) return cmd_gp_verify(cfg);
    if (*report) return cmd_report(cfg);
  } catch (const InputError& e) {
    std::cerr << "error[" << to_string(e.kind()) << "]: " << e.what() << "\n";
    return exit_validation;
  } catch (const Error& e) {
    std::cerr << "error[" << to_string(e.kind()) << "]: " << e.what() << "\n";
    return exit_solver;
  } catch (const std::exception& e) {
    std::cerr << "error[E_INPUT]: " << e.what() << "\n";
    return exit_validation;
  }
  return exit_validation;
}
