#include "cact/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <sstream>

#include "cact/emergence.hpp"
#include "cact/errors.hpp"
#include "cact/maximization.hpp"
#include "cact/qmetric.hpp"
#include "cact/seeds.hpp"

namespace cact {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

namespace {

// ---------------------------------------------------------------------------
// Strict field readers. Every failure names the JSON path.

[[noreturn]] void parse_fail(const std::string& path, const std::string& msg) {
  throw Error(ErrorKind::Parse, "field '" + path + "': " + msg);
}

[[noreturn]] void invalid(const std::string& path, const std::string& msg) {
  throw Error(ErrorKind::Validation, "field '" + path + "': " + msg);
}

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

void require_object(const json& j, const std::string& path) {
  if (!j.is_object()) parse_fail(path.empty() ? "<root>" : path, "expected an object");
}

void check_keys(const json& j, const std::string& path, std::initializer_list<const char*> allowed) {
  require_object(j, path);
  for (const auto& [key, value] : j.items()) {
    (void)value;
    const bool ok = std::any_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; });
    if (!ok) parse_fail(join(path, key), "unknown key");
  }
}

double read_number(const json& j, const std::string& path) {
  if (!j.is_number()) parse_fail(path, "expected a number");
  return j.get<double>();
}

void opt_number(const json& obj, const char* key, const std::string& path, double& out) {
  if (obj.contains(key)) out = read_number(obj.at(key), join(path, key));
}

void opt_int(const json& obj, const char* key, const std::string& path, int& out) {
  if (!obj.contains(key)) return;
  const auto& v = obj.at(key);
  if (!v.is_number_integer()) parse_fail(join(path, key), "expected an integer");
  out = v.get<int>();
}

void opt_seed(const json& obj, const char* key, const std::string& path, std::uint64_t& out) {
  if (!obj.contains(key)) return;
  const auto& v = obj.at(key);
  if (!v.is_number_unsigned()) parse_fail(join(path, key), "expected a non-negative integer");
  out = v.get<std::uint64_t>();
}

void opt_bool(const json& obj, const char* key, const std::string& path, bool& out) {
  if (!obj.contains(key)) return;
  const auto& v = obj.at(key);
  if (!v.is_boolean()) parse_fail(join(path, key), "expected a boolean");
  out = v.get<bool>();
}

std::vector<double> read_numbers(const json& j, const std::string& path) {
  if (!j.is_array()) parse_fail(path, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(read_number(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

Complex read_complex(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 2) parse_fail(path, "expected a [re, im] pair");
  return {read_number(j[0], path + "[0]"), read_number(j[1], path + "[1]")};
}

void positive(double v, const std::string& path) {
  if (!(v > 0.0) || !std::isfinite(v)) invalid(path, "must be positive and finite");
}

void at_least(int v, int lo, const std::string& path) {
  if (v < lo) invalid(path, "must be at least " + std::to_string(lo));
}

// ---------------------------------------------------------------------------
// Sections

HamiltonianSource parse_hamiltonian(const json& j) {
  const std::string path = "hamiltonian";
  check_keys(j, path, {"matrix", "generator", "dim", "seed", "im_spread"});
  const bool has_matrix = j.contains("matrix");
  const bool has_generator = j.contains("generator");
  if (has_matrix == has_generator) invalid(path, "exactly one of 'matrix' or 'generator' is required");

  if (has_matrix) {
    for (const char* k : {"dim", "seed", "im_spread"})
      if (j.contains(k)) parse_fail(join(path, k), "only valid with a generator");
    const auto& rows = j.at("matrix");
    const std::string mpath = "hamiltonian.matrix";
    if (!rows.is_array() || rows.empty()) parse_fail(mpath, "expected a non-empty list of rows");
    const auto n = static_cast<Eigen::Index>(rows.size());
    CMatrix m(n, n);
    for (Eigen::Index r = 0; r < n; ++r) {
      const auto& row = rows[static_cast<std::size_t>(r)];
      const std::string rpath = mpath + "[" + std::to_string(r) + "]";
      if (!row.is_array()) parse_fail(rpath, "expected a row of [re, im] pairs");
      if (static_cast<Eigen::Index>(row.size()) != n) invalid(rpath, "matrix must be square");
      for (Eigen::Index c = 0; c < n; ++c)
        m(r, c) = read_complex(row[static_cast<std::size_t>(c)], rpath + "[" + std::to_string(c) + "]");
    }
    if (!m.allFinite()) invalid(mpath, "entries must be finite");
    return ExplicitMatrix{m};
  }

  const auto& g = j.at("generator");
  if (!g.is_string()) parse_fail("hamiltonian.generator", "expected a string");
  const auto name = g.get<std::string>();
  if (name == "standard_2x2") {
    for (const char* k : {"dim", "seed", "im_spread"})
      if (j.contains(k)) parse_fail(join(path, k), "not a parameter of standard_2x2");
    return Standard2x2{};
  }
  if (name == "random_diagonalizable") {
    RandomDiagonalizable rd;
    opt_int(j, "dim", path, rd.dim);
    opt_seed(j, "seed", path, rd.seed);
    opt_number(j, "im_spread", path, rd.im_spread);
    at_least(rd.dim, 1, "hamiltonian.dim");
    if (rd.dim > 200) invalid("hamiltonian.dim", "must not exceed 200");
    positive(rd.im_spread, "hamiltonian.im_spread");
    return rd;
  }
  parse_fail("hamiltonian.generator", "unknown generator '" + name + "'");
}

classical::ComplexHamiltonianSpec parse_classical_spec(const json& j, const std::string& path) {
  classical::ComplexHamiltonianSpec spec;
  if (!j.contains("masses")) parse_fail(join(path, "masses"), "required");
  if (!j.contains("coefficients")) parse_fail(join(path, "coefficients"), "required");
  spec.masses = read_numbers(j.at("masses"), join(path, "masses"));
  const auto& coeffs = j.at("coefficients");
  if (!coeffs.is_array()) parse_fail(join(path, "coefficients"), "expected a list of coefficient rows");
  for (std::size_t i = 0; i < coeffs.size(); ++i)
    spec.coefficients.push_back(read_numbers(coeffs[i], join(path, "coefficients") + "[" + std::to_string(i) + "]"));

  if (j.contains("couplings")) {
    const auto& cs = j.at("couplings");
    const std::string cpath = join(path, "couplings");
    if (!cs.is_array()) parse_fail(cpath, "expected a list");
    for (std::size_t k = 0; k < cs.size(); ++k) {
      const std::string ep = cpath + "[" + std::to_string(k) + "]";
      check_keys(cs[k], ep, {"i", "j", "pi", "pj", "c"});
      classical::Coupling c;
      opt_int(cs[k], "i", ep, c.i);
      opt_int(cs[k], "j", ep, c.j);
      opt_int(cs[k], "pi", ep, c.pi);
      opt_int(cs[k], "pj", ep, c.pj);
      opt_number(cs[k], "c", ep, c.c);
      spec.couplings.push_back(c);
    }
  }
  if (j.contains("bumps")) {
    const auto& bs = j.at("bumps");
    const std::string bpath = join(path, "bumps");
    if (!bs.is_array()) parse_fail(bpath, "expected a list");
    for (std::size_t k = 0; k < bs.size(); ++k) {
      const std::string ep = bpath + "[" + std::to_string(k) + "]";
      check_keys(bs[k], ep, {"center_q", "center_p", "sigma", "weight"});
      classical::Bump b;
      if (bs[k].contains("center_q")) b.center_q = read_numbers(bs[k].at("center_q"), ep + ".center_q");
      else b.center_q.assign(spec.masses.size(), 0.0);
      if (bs[k].contains("center_p")) b.center_p = read_numbers(bs[k].at("center_p"), ep + ".center_p");
      else b.center_p.assign(spec.masses.size(), 0.0);
      opt_number(bs[k], "sigma", ep, b.sigma);
      opt_number(bs[k], "weight", ep, b.weight);
      spec.bumps.push_back(std::move(b));
    }
  }
  try {
    classical::validate(spec);
  } catch (const Error& e) {
    invalid(path, e.what());
  }
  return spec;
}

void check_time_step(double horizon, double dt, const std::string& path) {
  positive(dt, join(path, "dt"));
  positive(horizon, join(path, "horizon"));
  const double ratio = horizon / dt;
  if (std::abs(ratio - std::round(ratio)) > 1e-9 * std::max(1.0, ratio))
    invalid(join(path, "horizon"), "must be an integer multiple of dt");
}

ClassicalSection parse_classical(const json& j) {
  const std::string path = "classical";
  check_keys(j, path,
             {"masses", "coefficients", "couplings", "bumps", "s0", "dt", "horizon", "optimize", "dwell"});
  ClassicalSection c;
  c.spec = parse_classical_spec(j, path);
  const std::size_t n = c.spec.dof();
  c.s0.q.assign(n, 0.0);
  c.s0.p.assign(n, 0.0);
  if (j.contains("s0")) {
    const auto& s0 = j.at("s0");
    check_keys(s0, "classical.s0", {"q", "p"});
    if (s0.contains("q")) c.s0.q = read_numbers(s0.at("q"), "classical.s0.q");
    if (s0.contains("p")) c.s0.p = read_numbers(s0.at("p"), "classical.s0.p");
    if (c.s0.q.size() != n || c.s0.p.size() != n) invalid("classical.s0", "needs one entry per coordinate");
  }
  opt_number(j, "dt", path, c.dt);
  opt_number(j, "horizon", path, c.horizon);
  opt_bool(j, "optimize", path, c.optimize);
  check_time_step(c.horizon, c.dt, path);
  if (j.contains("dwell")) {
    const auto& d = j.at("dwell");
    const std::string dp = "classical.dwell";
    check_keys(d, dp, {"enabled", "delta", "Delta", "lyapunov", "dt", "max_time"});
    c.dwell.enabled = true;
    opt_bool(d, "enabled", dp, c.dwell.enabled);
    opt_number(d, "delta", dp, c.dwell.delta);
    opt_number(d, "Delta", dp, c.dwell.Delta);
    opt_number(d, "lyapunov", dp, c.dwell.lyapunov);
    opt_number(d, "dt", dp, c.dwell.dt);
    opt_number(d, "max_time", dp, c.dwell.max_time);
    positive(c.dwell.delta, dp + ".delta");
    positive(c.dwell.Delta, dp + ".Delta");
    positive(c.dwell.lyapunov, dp + ".lyapunov");
    positive(c.dwell.dt, dp + ".dt");
    positive(c.dwell.max_time, dp + ".max_time");
    if (c.dwell.delta > c.dwell.Delta) invalid(dp + ".delta", "must not exceed Delta");
  }
  return c;
}

InflatonSection parse_inflaton(const json& j) {
  const std::string path = "inflaton";
  check_keys(j, path, {"n_modes", "curvature", "sigma", "weight", "delta", "Delta", "dwell_dt", "horizon", "dt", "max_time"});
  InflatonSection s;
  opt_int(j, "n_modes", path, s.n_modes);
  opt_number(j, "curvature", path, s.curvature);
  opt_number(j, "sigma", path, s.sigma);
  opt_number(j, "weight", path, s.weight);
  opt_number(j, "delta", path, s.delta);
  opt_number(j, "Delta", path, s.Delta);
  opt_number(j, "dwell_dt", path, s.dwell_dt);
  opt_number(j, "horizon", path, s.horizon);
  opt_number(j, "dt", path, s.dt);
  opt_number(j, "max_time", path, s.max_time);
  return s;
}

void validate_inflaton(const InflatonSection& s) {
  at_least(s.n_modes, 1, "inflaton.n_modes");
  positive(s.curvature, "inflaton.curvature");
  positive(s.sigma, "inflaton.sigma");
  positive(s.delta, "inflaton.delta");
  positive(s.Delta, "inflaton.Delta");
  positive(s.dwell_dt, "inflaton.dwell_dt");
  positive(s.max_time, "inflaton.max_time");
  if (s.delta > s.Delta) invalid("inflaton.delta", "must not exceed Delta");
  check_time_step(s.horizon, s.dt, "inflaton");
}

classical::SearchConfig parse_search(const json& j) {
  const std::string path = "search";
  check_keys(j, path, {"lower", "upper", "restarts", "seed", "max_evals", "simplex_tol"});
  classical::SearchConfig s;
  if (j.contains("lower")) s.lower = read_numbers(j.at("lower"), "search.lower");
  if (j.contains("upper")) s.upper = read_numbers(j.at("upper"), "search.upper");
  opt_int(j, "restarts", path, s.restarts);
  opt_seed(j, "seed", path, s.seed);
  opt_int(j, "max_evals", path, s.max_evals);
  opt_number(j, "simplex_tol", path, s.simplex_tol);
  return s;
}

void finish_search(classical::SearchConfig& s, std::size_t dof, double half_width) {
  if (s.lower.empty()) s.lower.assign(2 * dof, -half_width);
  if (s.upper.empty()) s.upper.assign(2 * dof, half_width);
  if (s.lower.size() != 2 * dof || s.upper.size() != 2 * dof)
    invalid("search", "bounds need " + std::to_string(2 * dof) + " entries (q then p)");
  for (std::size_t i = 0; i < s.lower.size(); ++i)
    if (!(s.lower[i] < s.upper[i])) invalid("search.lower[" + std::to_string(i) + "]", "must be below upper");
  at_least(s.restarts, 1, "search.restarts");
  at_least(s.max_evals, 1, "search.max_evals");
  positive(s.simplex_tol, "search.simplex_tol");
}

Tolerances parse_tolerances(const json& j) {
  const std::string path = "tolerances";
  check_keys(j, path,
             {"tol_recon", "cond_ceiling", "cluster_tol", "overflow_ceiling", "deg_tol", "q_inverse", "reality", "negative_control",
              "weak_floor", "blowup_bound"});
  Tolerances t;
  opt_number(j, "tol_recon", path, t.tol_recon);
  opt_number(j, "cond_ceiling", path, t.cond_ceiling);
  opt_number(j, "cluster_tol", path, t.cluster_tol);
  opt_number(j, "overflow_ceiling", path, t.overflow_ceiling);
  opt_number(j, "deg_tol", path, t.deg_tol);
  opt_number(j, "q_inverse", path, t.q_inverse);
  opt_number(j, "reality", path, t.reality);
  opt_number(j, "negative_control", path, t.negative_control);
  opt_number(j, "weak_floor", path, t.weak_floor);
  opt_number(j, "blowup_bound", path, t.blowup_bound);
  positive(t.tol_recon, "tolerances.tol_recon");
  positive(t.cond_ceiling, "tolerances.cond_ceiling");
  positive(t.cluster_tol, "tolerances.cluster_tol");
  positive(t.overflow_ceiling, "tolerances.overflow_ceiling");
  if (!(t.deg_tol >= 0.0)) invalid("tolerances.deg_tol", "must be non-negative (0 selects the default)");
  positive(t.q_inverse, "tolerances.q_inverse");
  positive(t.reality, "tolerances.reality");
  positive(t.negative_control, "tolerances.negative_control");
  positive(t.weak_floor, "tolerances.weak_floor");
  positive(t.blowup_bound, "tolerances.blowup_bound");
  return t;
}

std::string line_column(std::string_view text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

const char* kind_name(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::quantum: return "quantum";
    case ScenarioKind::classical: return "classical";
    case ScenarioKind::inflaton: return "inflaton";
  }
  return "quantum";
}

}  // namespace

Scenario parse_scenario(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::Parse, line_column(text, e.byte) + ": " + e.what());
  }
  check_keys(doc, "",
             {"kind", "hamiltonian", "times", "observables", "numeric", "emergence", "classical", "inflaton", "search",
              "saddle_search", "tolerances"});

  Scenario s;
  if (!doc.contains("kind")) parse_fail("kind", "required");
  if (!doc.at("kind").is_string()) parse_fail("kind", "expected a string");
  const auto kind = doc.at("kind").get<std::string>();
  if (kind == "quantum") s.kind = ScenarioKind::quantum;
  else if (kind == "classical") s.kind = ScenarioKind::classical;
  else if (kind == "inflaton") s.kind = ScenarioKind::inflaton;
  else parse_fail("kind", "unknown kind '" + kind + "'");

  if (doc.contains("hamiltonian")) s.hamiltonian = parse_hamiltonian(doc.at("hamiltonian"));
  if (s.kind == ScenarioKind::quantum && std::holds_alternative<std::monostate>(s.hamiltonian))
    invalid("hamiltonian", "required for quantum scenarios");

  if (doc.contains("times")) {
    const auto& t = doc.at("times");
    check_keys(t, "times", {"T_A", "T_B", "grid_points"});
    opt_number(t, "T_A", "times", s.times.T_A);
    opt_number(t, "T_B", "times", s.times.T_B);
    opt_int(t, "grid_points", "times", s.times.grid_points);
  }
  if (!(s.times.T_A < s.times.T_B)) invalid("times", "T_A must be below T_B");
  at_least(s.times.grid_points, 2, "times.grid_points");

  if (doc.contains("observables")) {
    const auto& o = doc.at("observables");
    check_keys(o, "observables", {"count", "seed"});
    opt_int(o, "count", "observables", s.observables.count);
    opt_seed(o, "seed", "observables", s.observables.seed);
  }
  at_least(s.observables.count, 1, "observables.count");

  if (doc.contains("numeric")) {
    const auto& o = doc.at("numeric");
    check_keys(o, "numeric", {"restarts", "seed", "max_iters", "step_tol"});
    opt_int(o, "restarts", "numeric", s.numeric.restarts);
    opt_seed(o, "seed", "numeric", s.numeric.seed);
    opt_int(o, "max_iters", "numeric", s.numeric.max_iters);
    opt_number(o, "step_tol", "numeric", s.numeric.step_tol);
  }
  at_least(s.numeric.restarts, 1, "numeric.restarts");
  at_least(s.numeric.max_iters, 1, "numeric.max_iters");
  positive(s.numeric.step_tol, "numeric.step_tol");

  if (doc.contains("emergence")) {
    const auto& o = doc.at("emergence");
    check_keys(o, "emergence", {"t_max", "grid_points", "jitter", "seed"});
    opt_number(o, "t_max", "emergence", s.emergence.t_max);
    opt_int(o, "grid_points", "emergence", s.emergence.grid_points);
    opt_number(o, "jitter", "emergence", s.emergence.jitter);
    opt_seed(o, "seed", "emergence", s.emergence.seed);
  }
  if (!(s.emergence.t_max >= 0.0)) invalid("emergence.t_max", "must be non-negative (0 selects 10 / gap)");
  at_least(s.emergence.grid_points, 8, "emergence.grid_points");
  if (!(s.emergence.jitter >= 0.0)) invalid("emergence.jitter", "must be non-negative");

  if (doc.contains("classical")) s.classical = parse_classical(doc.at("classical"));
  else if (s.kind == ScenarioKind::classical) invalid("classical", "required for classical scenarios");

  if (doc.contains("inflaton")) s.inflaton = parse_inflaton(doc.at("inflaton"));
  validate_inflaton(s.inflaton);

  if (doc.contains("search")) s.search = parse_search(doc.at("search"));
  if (s.kind == ScenarioKind::classical) finish_search(s.search, s.classical.spec.dof(), 2.0);
  else if (s.kind == ScenarioKind::inflaton) finish_search(s.search, static_cast<std::size_t>(s.inflaton.n_modes), 1.0);
  else if (!s.search.lower.empty() || !s.search.upper.empty())
    invalid("search", "bounds only apply to classical and inflaton scenarios");

  if (doc.contains("saddle_search")) {
    const auto& o = doc.at("saddle_search");
    check_keys(o, "saddle_search", {"radius", "starts", "seed", "max_newton", "grad_tol", "merge_tol"});
    opt_number(o, "radius", "saddle_search", s.saddle_search.radius);
    opt_int(o, "starts", "saddle_search", s.saddle_search.starts);
    opt_seed(o, "seed", "saddle_search", s.saddle_search.seed);
    opt_int(o, "max_newton", "saddle_search", s.saddle_search.max_newton);
    opt_number(o, "grad_tol", "saddle_search", s.saddle_search.grad_tol);
    opt_number(o, "merge_tol", "saddle_search", s.saddle_search.merge_tol);
  }
  positive(s.saddle_search.radius, "saddle_search.radius");
  at_least(s.saddle_search.starts, 1, "saddle_search.starts");
  at_least(s.saddle_search.max_newton, 1, "saddle_search.max_newton");
  positive(s.saddle_search.grad_tol, "saddle_search.grad_tol");
  positive(s.saddle_search.merge_tol, "saddle_search.merge_tol");

  if (doc.contains("tolerances")) s.tolerances = parse_tolerances(doc.at("tolerances"));
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Parse, "cannot open scenario file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

ojson scenario_to_json(const Scenario& s) {
  ojson j;
  j["kind"] = kind_name(s.kind);
  if (const auto* m = std::get_if<ExplicitMatrix>(&s.hamiltonian)) {
    ojson rows = ojson::array();
    for (Eigen::Index r = 0; r < m->m.rows(); ++r) {
      ojson row = ojson::array();
      for (Eigen::Index c = 0; c < m->m.cols(); ++c) row.push_back({m->m(r, c).real(), m->m(r, c).imag()});
      rows.push_back(row);
    }
    j["hamiltonian"] = {{"matrix", rows}};
  } else if (std::holds_alternative<Standard2x2>(s.hamiltonian)) {
    j["hamiltonian"] = {{"generator", "standard_2x2"}};
  } else if (const auto* rd = std::get_if<RandomDiagonalizable>(&s.hamiltonian)) {
    j["hamiltonian"] = {{"generator", "random_diagonalizable"},
                        {"dim", rd->dim},
                        {"seed", rd->seed},
                        {"im_spread", rd->im_spread}};
  }
  j["times"] = {{"T_A", s.times.T_A}, {"T_B", s.times.T_B}, {"grid_points", s.times.grid_points}};
  j["observables"] = {{"count", s.observables.count}, {"seed", s.observables.seed}};
  j["numeric"] = {{"restarts", s.numeric.restarts},
                  {"seed", s.numeric.seed},
                  {"max_iters", s.numeric.max_iters},
                  {"step_tol", s.numeric.step_tol}};
  j["emergence"] = {{"t_max", s.emergence.t_max},
                    {"grid_points", s.emergence.grid_points},
                    {"jitter", s.emergence.jitter},
                    {"seed", s.emergence.seed}};
  if (s.classical.spec.dof() > 0) {
    const auto& c = s.classical;
    ojson couplings = ojson::array();
    for (const auto& k : c.spec.couplings)
      couplings.push_back({{"i", k.i}, {"j", k.j}, {"pi", k.pi}, {"pj", k.pj}, {"c", k.c}});
    ojson bumps = ojson::array();
    for (const auto& b : c.spec.bumps)
      bumps.push_back(
          {{"center_q", b.center_q}, {"center_p", b.center_p}, {"sigma", b.sigma}, {"weight", b.weight}});
    j["classical"] = {{"masses", c.spec.masses},
                      {"coefficients", c.spec.coefficients},
                      {"couplings", couplings},
                      {"bumps", bumps},
                      {"s0", {{"q", c.s0.q}, {"p", c.s0.p}}},
                      {"dt", c.dt},
                      {"horizon", c.horizon},
                      {"optimize", c.optimize},
                      {"dwell",
                       {{"enabled", c.dwell.enabled},
                        {"delta", c.dwell.delta},
                        {"Delta", c.dwell.Delta},
                        {"lyapunov", c.dwell.lyapunov},
                        {"dt", c.dwell.dt},
                        {"max_time", c.dwell.max_time}}}};
  }
  j["inflaton"] = {{"n_modes", s.inflaton.n_modes}, {"curvature", s.inflaton.curvature},
                   {"sigma", s.inflaton.sigma},     {"weight", s.inflaton.weight},
                   {"delta", s.inflaton.delta},     {"Delta", s.inflaton.Delta},
                   {"dwell_dt", s.inflaton.dwell_dt}, {"horizon", s.inflaton.horizon},
                   {"dt", s.inflaton.dt},       {"max_time", s.inflaton.max_time}};
  ojson search = {{"restarts", s.search.restarts},
                  {"seed", s.search.seed},
                  {"max_evals", s.search.max_evals},
                  {"simplex_tol", s.search.simplex_tol}};
  if (!s.search.lower.empty()) search["lower"] = s.search.lower;
  if (!s.search.upper.empty()) search["upper"] = s.search.upper;
  j["search"] = search;
  j["saddle_search"] = {
      {"radius", s.saddle_search.radius},         {"starts", s.saddle_search.starts},
      {"seed", s.saddle_search.seed},             {"max_newton", s.saddle_search.max_newton},
      {"grad_tol", s.saddle_search.grad_tol},     {"merge_tol", s.saddle_search.merge_tol}};
  const auto& t = s.tolerances;
  j["tolerances"] = {{"tol_recon", t.tol_recon},     {"cond_ceiling", t.cond_ceiling},
                     {"cluster_tol", t.cluster_tol},
                     {"overflow_ceiling", t.overflow_ceiling}, {"deg_tol", t.deg_tol},
                     {"q_inverse", t.q_inverse},     {"reality", t.reality},
                     {"negative_control", t.negative_control}, {"weak_floor", t.weak_floor},
                     {"blowup_bound", t.blowup_bound}};
  return j;
}

std::string serialize_scenario(const Scenario& s) { return scenario_to_json(s).dump(2) + "\n"; }

void override_seed(Scenario& s, std::uint64_t seed) {
  s.observables.seed = seed;
  s.numeric.seed = seed;
  s.emergence.seed = seed;
  s.search.seed = seed;
}

CMatrix build_hamiltonian(const Scenario& s) {
  if (const auto* m = std::get_if<ExplicitMatrix>(&s.hamiltonian)) return m->m;
  if (std::holds_alternative<Standard2x2>(s.hamiltonian)) return standard_2x2();
  if (const auto* rd = std::get_if<RandomDiagonalizable>(&s.hamiltonian))
    return random_diagonalizable(rd->dim, rd->seed, rd->im_spread);
  throw Error(ErrorKind::Validation, "scenario has no quantum Hamiltonian");
}

// ---------------------------------------------------------------------------
// Pipelines

namespace {

ojson complex_json(Complex z) { return ojson::array({z.real(), z.imag()}); }

struct QuantumSetup {
  SpectralDecomposition dec;
  QMetric q;
  double deg_tol = -1.0;
  QuotientOptions quot;
};

QuantumSetup setup_quantum(const Scenario& s) {
  QuantumSetup qs;
  DecomposeOptions dopts;
  dopts.tol_recon = s.tolerances.tol_recon;
  dopts.cond_ceiling = s.tolerances.cond_ceiling;
  dopts.cluster_tol = s.tolerances.cluster_tol;
  dopts.overflow_ceiling = s.tolerances.overflow_ceiling;
  qs.dec = eig_decompose(build_hamiltonian(s), dopts);
  QMetricOptions qopts;
  qopts.inverse_tol = s.tolerances.q_inverse;
  qs.q = build_q(qs.dec, qopts);
  qs.deg_tol = s.tolerances.deg_tol > 0.0 ? s.tolerances.deg_tol : -1.0;
  qs.quot.floor = s.tolerances.weak_floor;
  return qs;
}

ojson run_qmetric(const QuantumSetup& qs) {
  const auto& dec = qs.dec;
  const auto& q = qs.q;
  const Eigen::Index n = dec.dim();
  const CMatrix h_adj_q = q_adjoint(q, dec.H);
  const CMatrix herm = 0.5 * (dec.H + h_adj_q);
  const CMatrix anti = 0.5 * (dec.H - h_adj_q);
  const double h2 = std::max(dec.H.squaredNorm(), 1e-300);

  ojson eig = ojson::array();
  for (Eigen::Index k = 0; k < n; ++k) eig.push_back(complex_json(dec.lambda(k)));
  double orth = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      orth = std::max(orth, std::abs(q_inner(q, dec.P.col(i), dec.P.col(j)) - (i == j ? 1.0 : 0.0)));

  ojson out;
  out["dim"] = n;
  out["eigenvalues"] = eig;
  out["cond_P"] = dec.cond_P;
  out["chol_ok"] = q.chol_ok;
  out["q_hermiticity_residual"] = (q.Q - q.Q.adjoint()).norm();
  out["q_inverse_residual"] = (q.Q * q.Q_inv - CMatrix::Identity(n, n)).norm();
  out["eigenbasis_q_orthonormality_residual"] = orth;
  out["plain_commutator_relative"] = commutator_norm(dec.H, dec.H.adjoint()) / h2;
  out["q_commutator_relative"] = commutator_norm(dec.H, h_adj_q) / h2;
  out["parts_commutator_relative"] = commutator_norm(herm, anti) / h2;
  out["normal_in_q"] = commutator_norm(dec.H, h_adj_q) <= 1e-8 * h2;
  return out;
}

ojson run_maximize(const Scenario& s, const QuantumSetup& qs, std::vector<Table>& tables) {
  const auto& dec = qs.dec;
  const auto& q = qs.q;
  const double T_A = s.times.T_A, T_B = s.times.T_B;
  const auto analytic = analytic_maximize(dec, q, T_A, T_B, qs.deg_tol);
  NumericMaximizeOptions nopts;
  nopts.restarts = s.numeric.restarts;
  nopts.seed = s.numeric.seed;
  nopts.max_iters = s.numeric.max_iters;
  nopts.step_tol = s.numeric.step_tol;
  const auto numeric = numeric_maximize(dec, q, T_A, T_B, nopts);
  const auto grid = uniform_grid(T_A, T_B, s.times.grid_points);
  const auto reality =
      verify_reality(dec, q, analytic, s.observables.count, grid, s.observables.seed, s.tolerances.reality, qs.quot);
  const auto negative = reality_negative_control(dec, q, T_A, T_B, s.observables.count, grid, s.observables.seed,
                                                 s.tolerances.reality, qs.quot);
  const bool generator_ok = effective_generator_check(dec, q, analytic, s.tolerances.reality, qs.deg_tol);

  ojson out;
  out["T_A"] = T_A;
  out["T_B"] = T_B;
  out["max_im"] = analytic.max_im;
  out["subspace_dim"] = analytic.subspace_dim;
  out["expected_amplitude"] = std::exp(analytic.max_im * (T_B - T_A));
  out["analytic_amplitude"] = analytic.amplitude;
  out["numeric_amplitude"] = numeric.amplitude;
  out["numeric_iterations"] = numeric.iterations;
  ojson a_star = ojson::array();
  for (Eigen::Index i = 0; i < analytic.a_star.amp.size(); ++i) a_star.push_back(complex_json(analytic.a_star.amp(i)));
  out["a_star"] = a_star;
  out["reality"] = {{"observables", reality.observables},
                    {"time_points", reality.time_points},
                    {"max_abs_im", reality.max_abs_im},
                    {"tol", s.tolerances.reality},
                    {"pass", reality.pass}};
  out["negative_control"] = {{"max_abs_im", negative.max_abs_im},
                             {"threshold", s.tolerances.negative_control},
                             {"conclusive", negative.max_abs_im > s.tolerances.negative_control}};
  out["effective_generator_q_hermitian"] = generator_ok;
  out["max_pair_angle"] = max_pair_angle(dec, q, analytic, grid);

  Table table{"reality", {"time", "max_abs_im", "pair_angle", "overlap_abs", "obs0_re", "obs0_im"}, {}};
  const CMatrix obs0 = random_q_hermitian(q, derive_seed(s.observables.seed, 0));
  std::vector<CMatrix> obs;
  for (int k = 0; k < s.observables.count; ++k) obs.push_back(random_q_hermitian(q, derive_seed(s.observables.seed, static_cast<std::uint64_t>(k))));
  for (double t : grid) {
    const auto at = evolve_a(dec, analytic.a_star, T_A, t);
    const auto bt = evolve_b(dec, q, analytic.b_star, T_B, t, BAdjointMode::q_dagger);
    double worst = 0.0;
    for (const auto& o : obs) worst = std::max(worst, std::abs(q_matrix_element(q, o, bt, at, qs.quot).imag()));
    const Complex v0 = q_matrix_element(q, obs0, bt, at, qs.quot);
    table.rows.push_back({t, worst, q_angle(q, bt.amp, at.amp), std::abs(q_inner(q, bt.amp, at.amp)), v0.real(),
                          v0.imag()});
  }
  tables.push_back(std::move(table));
  return out;
}

ojson run_emerge(const Scenario& s, const QuantumSetup& qs, std::vector<Table>& tables) {
  const auto& dec = qs.dec;
  const auto top = max_im_subspace(dec, qs.deg_tol);
  std::vector<bool> in_top(static_cast<std::size_t>(dec.dim()), false);
  for (auto k : top) in_top[static_cast<std::size_t>(k)] = true;
  double second = -std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < dec.dim(); ++k)
    if (!in_top[static_cast<std::size_t>(k)]) second = std::max(second, dec.lambda(k).imag());
  const double gap = std::isfinite(second) ? dec.max_im() - second : 0.0;
  const double t_max = s.emergence.t_max > 0.0 ? s.emergence.t_max : (gap > 0.0 ? 10.0 / gap : 10.0);

  const auto psi0 = generic_initial_state(dec, s.emergence.seed, s.emergence.jitter);
  const auto grid = uniform_grid(0.0, t_max, s.emergence.grid_points);
  const auto series = survival_fractions(dec, qs.q, psi0, grid, qs.deg_tol);

  ojson fits = ojson::array();
  for (Eigen::Index k = 0; k < dec.dim(); ++k) {
    if (in_top[static_cast<std::size_t>(k)]) continue;
    ojson f;
    f["component"] = k;
    f["expected_slope"] = -2.0 * (dec.max_im() - dec.lambda(k).imag());
    try {
      f["fitted_slope"] = decay_rate_fit(series, static_cast<int>(k));
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::InsufficientData) throw;
      f["fitted_slope"] = nullptr;
    }
    fits.push_back(f);
  }

  ojson out;
  out["gap"] = gap;
  out["t_max"] = t_max;
  out["subspace_dim"] = top.size();
  out["final_defect"] = series.defect.back();
  out["final_fidelity_top"] = series.fidelity_top.back();
  out["fits"] = fits;

  Table table{"survival", {"time", "fidelity_top", "defect"}, {}};
  for (Eigen::Index k = 0; k < dec.dim(); ++k) table.header.push_back("w" + std::to_string(k));
  for (std::size_t i = 0; i < grid.size(); ++i) {
    std::vector<double> row{grid[i], series.fidelity_top[i], series.defect[i]};
    row.insert(row.end(), series.weights[i].begin(), series.weights[i].end());
    table.rows.push_back(std::move(row));
  }
  tables.push_back(std::move(table));
  return out;
}

classical::SaddleSearchOptions saddle_opts(const Scenario& s) {
  classical::SaddleSearchOptions o;
  o.radius = s.saddle_search.radius;
  o.starts = s.saddle_search.starts;
  o.seed = s.saddle_search.seed;
  o.max_newton = s.saddle_search.max_newton;
  o.grad_tol = s.saddle_search.grad_tol;
  o.merge_tol = s.saddle_search.merge_tol;
  return o;
}

ojson state_json(const classical::PhaseState& st) { return {{"q", st.q}, {"p", st.p}}; }

ojson run_classical(const Scenario& s, std::vector<Table>& tables) {
  using namespace classical;
  const auto& c = s.classical;
  IntegrateOptions integ;
  integ.blowup_bound = s.tolerances.blowup_bound;
  const int steps = static_cast<int>(std::round(c.horizon / c.dt));

  const auto saddles = saddle_points(c.spec, saddle_opts(s));
  const auto traj = integrate(c.spec, c.s0, c.dt, steps, integ);
  const auto rep = reward(traj, c.spec, saddles);
  double drift = 0.0;
  for (double e : traj.energy) drift = std::max(drift, std::abs(e - traj.energy.front()));

  ojson out;
  ojson cps = ojson::array();
  for (const auto& cp : saddles) cps.push_back({{"q", cp.q}, {"index", cp.index}, {"eigenvalues", cp.eigenvalues}});
  out["critical_points"] = cps;
  out["trajectory"] = {{"s0", state_json(c.s0)},
                       {"horizon", traj.horizon()},
                       {"energy_drift", drift},
                       {"reward", rep.reward},
                       {"dwell", rep.dwell},
                       {"nearest_saddle_distance", rep.nearest_saddle_distance}};

  Table table{"trajectory", {"time"}, {}};
  for (std::size_t i = 0; i < c.spec.dof(); ++i) table.header.push_back("q" + std::to_string(i));
  for (std::size_t i = 0; i < c.spec.dof(); ++i) table.header.push_back("p" + std::to_string(i));
  table.header.push_back("re_h");
  table.header.push_back("im_h");
  for (std::size_t k = 0; k < traj.states.size(); ++k) {
    const auto& st = traj.states[k];
    std::vector<double> row{static_cast<double>(k) * traj.dt};
    row.insert(row.end(), st.q.begin(), st.q.end());
    row.insert(row.end(), st.p.begin(), st.p.end());
    row.push_back(traj.energy[k]);
    row.push_back(im_h(c.spec, st));
    table.rows.push_back(std::move(row));
  }
  tables.push_back(std::move(table));

  if (c.optimize) {
    const auto opt = optimize_initial(c.spec, c.horizon, c.dt, s.search, integ);
    const auto best = integrate(c.spec, opt.s0_star, c.dt, steps, integ);
    const auto best_rep = reward(best, c.spec, saddles);
    out["optimize"] = {{"s0_star", state_json(opt.s0_star)},
                       {"reward_star", opt.reward_star},
                       {"evals", opt.evals},
                       {"restart_start_rewards", opt.restart_start_rewards},
                       {"restart_best_rewards", opt.restart_best_rewards},
                       {"dwell", best_rep.dwell},
                       {"nearest_saddle_distance", best_rep.nearest_saddle_distance}};
  }
  if (c.dwell.enabled) {
    DwellConfig cfg;
    cfg.dt = c.dwell.dt;
    cfg.max_time = c.dwell.max_time;
    cfg.search = saddle_opts(s);
    cfg.integ = integ;
    const auto d = dwell_time(c.spec, c.dwell.delta, c.dwell.Delta, c.dwell.lyapunov, cfg);
    out["dwell"] = {{"delta", c.dwell.delta},
                    {"Delta", c.dwell.Delta},
                    {"measured", d.measured},
                    {"predicted", d.predicted},
                    {"ratio", d.predicted > 0.0 ? d.measured / d.predicted : 0.0},
                    {"exited", d.exited}};
  }
  return out;
}

ojson run_inflaton(const Scenario& s) {
  using namespace classical;
  const auto& inf = s.inflaton;
  InflatonConfig cfg;
  cfg.bump_sigma = inf.sigma;
  cfg.bump_weight = inf.weight;
  cfg.delta = inf.delta;
  cfg.Delta = inf.Delta;
  cfg.dwell_dt = inf.dwell_dt;
  cfg.max_time = inf.max_time;
  cfg.integ.blowup_bound = s.tolerances.blowup_bound;
  const auto rep = inflaton_toy(inf.n_modes, inf.curvature, inf.horizon, inf.dt, s.search, cfg);
  ojson dwell = ojson::array();
  for (const auto& d : rep.per_mode_dwell)
    dwell.push_back({{"measured", d.measured}, {"predicted", d.predicted}, {"exited", d.exited}});
  ojson out;
  out["n_modes"] = inf.n_modes;
  out["curvature"] = inf.curvature;
  out["s0_star"] = state_json(rep.opt.s0_star);
  out["reward_star"] = rep.opt.reward_star;
  out["evals"] = rep.opt.evals;
  out["total_reward"] = rep.total_reward;
  out["saddle_dwell"] = rep.saddle_dwell;
  out["efolding_analog"] = rep.efolding_analog;
  out["per_mode_dwell"] = dwell;
  return out;
}

void require_kind(const Scenario& s, ScenarioKind k, const char* pipeline) {
  if (s.kind != k)
    throw Error(ErrorKind::Validation, std::string("pipeline '") + pipeline + "' needs a " + kind_name(k) +
                                           " scenario, got " + kind_name(s.kind));
}

const char* pipeline_name(Pipeline p) {
  switch (p) {
    case Pipeline::all: return "all";
    case Pipeline::qmetric: return "qmetric";
    case Pipeline::maximize: return "maximize";
    case Pipeline::emerge: return "emerge";
    case Pipeline::classical: return "classical";
    case Pipeline::inflaton: return "inflaton";
  }
  return "all";
}

}  // namespace

ResultBundle run_scenario(const Scenario& s, Pipeline pipeline) {
  ResultBundle b;
  b.summary["kind"] = kind_name(s.kind);
  b.summary["pipeline"] = pipeline_name(pipeline);
  try {
    switch (pipeline) {
      case Pipeline::qmetric: {
        require_kind(s, ScenarioKind::quantum, "qmetric");
        b.summary["qmetric"] = run_qmetric(setup_quantum(s));
        break;
      }
      case Pipeline::maximize: {
        require_kind(s, ScenarioKind::quantum, "maximize");
        const auto qs = setup_quantum(s);
        b.summary["qmetric"] = run_qmetric(qs);
        b.summary["maximize"] = run_maximize(s, qs, b.tables);
        break;
      }
      case Pipeline::emerge: {
        require_kind(s, ScenarioKind::quantum, "emerge");
        b.summary["emerge"] = run_emerge(s, setup_quantum(s), b.tables);
        break;
      }
      case Pipeline::classical:
        require_kind(s, ScenarioKind::classical, "classical");
        b.summary["classical"] = run_classical(s, b.tables);
        break;
      case Pipeline::inflaton:
        require_kind(s, ScenarioKind::inflaton, "inflaton");
        b.summary["inflaton"] = run_inflaton(s);
        break;
      case Pipeline::all:
        if (s.kind == ScenarioKind::quantum) {
          const auto qs = setup_quantum(s);
          b.summary["qmetric"] = run_qmetric(qs);
          b.summary["maximize"] = run_maximize(s, qs, b.tables);
          b.summary["emerge"] = run_emerge(s, qs, b.tables);
        } else if (s.kind == ScenarioKind::classical) {
          b.summary["classical"] = run_classical(s, b.tables);
        } else {
          b.summary["inflaton"] = run_inflaton(s);
        }
        break;
    }
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Validation) throw;
    throw Error(e.kind(), std::string("while running '") + pipeline_name(pipeline) + "' on a " + kind_name(s.kind) +
                              " scenario: " + e.detail());
  }
  return b;
}

std::string format_csv(const Table& t) {
  std::string out;
  for (std::size_t i = 0; i < t.header.size(); ++i) out += (i ? "," : "") + t.header[i];
  out += "\n";
  char buf[40];
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      std::snprintf(buf, sizeof(buf), "%.17g", row[i]);
      if (i) out += ",";
      out += buf;
    }
    out += "\n";
  }
  return out;
}

std::string format_summary(const ResultBundle& b) { return b.summary.dump(2) + "\n"; }

void write_bundle(const ResultBundle& b, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  auto write = [](const std::filesystem::path& p, const std::string& content) {
    std::ofstream f(p, std::ios::binary);
    if (!f) throw Error(ErrorKind::Validation, "cannot write " + p.string());
    f << content;
  };
  write(out_dir / "summary.json", format_summary(b));
  for (const auto& t : b.tables) write(out_dir / (t.name + ".csv"), format_csv(t));
}

}  // namespace cact
