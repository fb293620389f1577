#pragma once

// JSON scenario documents, the pipelines they drive, and CSV/JSON result output.
//
// Schema (all sections optional unless noted, unknown keys are rejected):
//
//   kind          "quantum" | "classical" | "inflaton"                      (required)
//   hamiltonian   {"matrix": [[[re, im], ...], ...]}
//                 | {"generator": "standard_2x2"}
//                 | {"generator": "random_diagonalizable", "dim", "seed", "im_spread"}
//                 required for quantum scenarios
//   times         {"T_A": 0, "T_B": 1, "grid_points": 11}
//   observables   {"count": 20, "seed": 1}
//   numeric       {"restarts": 4, "seed": 1, "max_iters": 20000, "step_tol": 1e-12}
//   emergence     {"t_max": 0 (0 = 10 / spectral gap), "grid_points": 201, "jitter": 1e-3, "seed": 1}
//   classical     {"masses", "coefficients", "couplings", "bumps", "s0": {"q", "p"},
//                  "dt": 0.01, "horizon": 10, "optimize": true,
//                  "dwell": {"enabled", "delta", "Delta", "lyapunov", "dt", "max_time"}}
//                 required for classical scenarios
//   inflaton      {"n_modes": 3, "curvature": 1, "sigma": 0.3, "weight": 1, "delta": 1e-8,
//                  "Delta": 0.1, "dwell_dt": 1e-3, "horizon": 5, "dt": 0.01, "max_time": 1000}
//   search        {"lower", "upper", "restarts": 8, "seed": 1, "max_evals": 4000, "simplex_tol": 1e-12}
//   saddle_search {"radius": 3, "starts": 400, "seed": 7, "max_newton": 100, "grad_tol": 1e-12,
//                  "merge_tol": 1e-6}
//   tolerances    {"tol_recon", "cond_ceiling", "cluster_tol", "overflow_ceiling", "deg_tol" (0 = automatic),
//                  "q_inverse", "reality", "negative_control", "weak_floor", "blowup_bound"}

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"

#include "cact/classical.hpp"
#include "cact/linalg.hpp"

namespace cact {

enum class ScenarioKind { quantum, classical, inflaton };

struct ExplicitMatrix {
  CMatrix m;
  bool operator==(const ExplicitMatrix& o) const {
    return m.rows() == o.m.rows() && m.cols() == o.m.cols() && m == o.m;
  }
};
struct Standard2x2 {
  bool operator==(const Standard2x2&) const = default;
};
struct RandomDiagonalizable {
  int dim = 2;
  std::uint64_t seed = 1;
  double im_spread = 1.0;
  bool operator==(const RandomDiagonalizable&) const = default;
};
using HamiltonianSource = std::variant<std::monostate, ExplicitMatrix, Standard2x2, RandomDiagonalizable>;

struct TimesSection {
  double T_A = 0.0;
  double T_B = 1.0;
  int grid_points = 11;
  bool operator==(const TimesSection&) const = default;
};

struct ObservablesSection {
  int count = 20;
  std::uint64_t seed = 1;
  bool operator==(const ObservablesSection&) const = default;
};

struct NumericSection {
  int restarts = 4;
  std::uint64_t seed = 1;
  int max_iters = 20000;
  double step_tol = 1e-12;
  bool operator==(const NumericSection&) const = default;
};

struct EmergenceSection {
  double t_max = 0.0;
  int grid_points = 201;
  double jitter = 1e-3;
  std::uint64_t seed = 1;
  bool operator==(const EmergenceSection&) const = default;
};

struct DwellSection {
  bool enabled = false;
  double delta = 1e-6;
  double Delta = 0.1;
  double lyapunov = 1.0;
  double dt = 1e-3;
  double max_time = 1000.0;
  bool operator==(const DwellSection&) const = default;
};

struct ClassicalSection {
  classical::ComplexHamiltonianSpec spec;
  classical::PhaseState s0;
  double dt = 1e-2;
  double horizon = 10.0;
  bool optimize = true;
  DwellSection dwell;
  bool operator==(const ClassicalSection&) const = default;
};

struct InflatonSection {
  int n_modes = 3;
  double curvature = 1.0;
  double sigma = 0.3;
  double weight = 1.0;
  double delta = 1e-8;
  double Delta = 0.1;
  double dwell_dt = 1e-3;
  double horizon = 5.0;
  double dt = 1e-2;
  double max_time = 1000.0;
  bool operator==(const InflatonSection&) const = default;
};

struct SaddleSection {
  double radius = 3.0;
  int starts = 400;
  std::uint64_t seed = 7;
  int max_newton = 100;
  double grad_tol = 1e-12;
  double merge_tol = 1e-6;
  bool operator==(const SaddleSection&) const = default;
};

struct Tolerances {
  double tol_recon = 1e-8;
  double cond_ceiling = 1e8;
  double cluster_tol = 1e-9;
  double overflow_ceiling = 1e150;
  double deg_tol = 0.0;  // 0 selects 1e-9 * max(1, |max Im lambda|)
  double q_inverse = 1e-9;
  double reality = 1e-8;
  double negative_control = 1e-4;
  double weak_floor = 1e-12;
  double blowup_bound = 1e6;
  bool operator==(const Tolerances&) const = default;
};

struct Scenario {
  ScenarioKind kind = ScenarioKind::quantum;
  HamiltonianSource hamiltonian;
  TimesSection times;
  ObservablesSection observables;
  NumericSection numeric;
  EmergenceSection emergence;
  ClassicalSection classical;
  InflatonSection inflaton;
  classical::SearchConfig search;
  SaddleSection saddle_search;
  Tolerances tolerances;
  bool operator==(const Scenario&) const = default;
};

// Throws Error{Parse} (malformed JSON, wrong types, unknown keys; message carries
// line/column or the field path) or Error{Validation} (violated invariant).
Scenario parse_scenario(std::string_view text);
Scenario load_scenario(const std::filesystem::path& path);

nlohmann::ordered_json scenario_to_json(const Scenario& s);
std::string serialize_scenario(const Scenario& s);

// Overrides every run seed (observables, numeric restarts, emergence jitter, search).
void override_seed(Scenario& s, std::uint64_t seed);

CMatrix build_hamiltonian(const Scenario& s);

enum class Pipeline { all, qmetric, maximize, emerge, classical, inflaton };

struct Table {
  std::string name;
  std::vector<std::string> header;  // first column is "time"
  std::vector<std::vector<double>> rows;
};

struct ResultBundle {
  nlohmann::ordered_json summary;
  std::vector<Table> tables;
};

// Pipeline::all picks the pipelines matching the scenario kind.
ResultBundle run_scenario(const Scenario& s, Pipeline pipeline = Pipeline::all);

std::string format_csv(const Table& t);
std::string format_summary(const ResultBundle& b);
void write_bundle(const ResultBundle& b, const std::filesystem::path& out_dir);

}  // namespace cact
