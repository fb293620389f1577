#include <cstdint>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"

#include "cact/errors.hpp"
#include "cact/scenario.hpp"
#include "suite.hpp"

namespace {

enum Exit { kOk = 0, kInput = 2, kNumerical = 3, kSelftest = 4 };

struct Common {
  std::string scenario;
  std::string out;
  std::optional<std::uint64_t> seed;
  bool quiet = false;
};

void add_common(CLI::App* sub, Common& c, bool needs_scenario) {
  auto* opt = sub->add_option("--scenario", c.scenario, "scenario JSON file");
  if (needs_scenario) opt->required()->check(CLI::ExistingFile);
  sub->add_option("--out", c.out, "directory for summary.json and CSV tables (default: summary to stdout)");
  sub->add_option("--seed", c.seed, "overrides every run seed in the scenario");
  sub->add_flag("--quiet", c.quiet, "suppress progress output");
}

int run_pipeline(const Common& c, cact::Pipeline pipeline) {
  auto s = cact::load_scenario(c.scenario);
  if (c.seed) cact::override_seed(s, *c.seed);
  const auto bundle = cact::run_scenario(s, pipeline);
  if (c.out.empty()) {
    std::cout << cact::format_summary(bundle);
  } else {
    cact::write_bundle(bundle, c.out);
    if (!c.quiet) {
      std::cerr << "wrote " << c.out << "/summary.json";
      for (const auto& t : bundle.tables) std::cerr << ", " << t.name << ".csv";
      std::cerr << "\n";
    }
  }
  return kOk;
}

int run_selftest(const Common& c) {
  std::ostringstream log;
  bool ok = true;
  for (const auto& r : cact::acceptance::run_all(c.quiet ? log : std::cout)) ok = ok && r.pass;
  if (c.quiet && !ok) std::cout << log.str();
  return ok ? kOk : kSelftest;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Non-Hermitian two-state dynamics: metric, boundary-state maximization, emergence, classical paths"};
  app.require_subcommand(1);

  Common common;
  struct Sub {
    const char* name;
    const char* help;
    cact::Pipeline pipeline;
  };
  const Sub subs[] = {
      {"qmetric", "build and certify the metric Q", cact::Pipeline::qmetric},
      {"maximize", "analytic and numeric maximization with the reality report", cact::Pipeline::maximize},
      {"emerge", "survival series of a generic state", cact::Pipeline::emerge},
      {"classical", "integrate, score, optimize and time dwell of a classical path", cact::Pipeline::classical},
      {"inflaton", "multi-mode hilltop toy", cact::Pipeline::inflaton},
  };
  std::vector<std::pair<CLI::App*, cact::Pipeline>> pipelines;
  for (const auto& s : subs) {
    auto* sub = app.add_subcommand(s.name, s.help);
    add_common(sub, common, true);
    pipelines.emplace_back(sub, s.pipeline);
  }
  auto* selftest = app.add_subcommand("selftest", "run the acceptance suite");
  add_common(selftest, common, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInput;
  }

  try {
    if (selftest->parsed()) return run_selftest(common);
    for (const auto& [sub, pipeline] : pipelines)
      if (sub->parsed()) return run_pipeline(common, pipeline);
  } catch (const cact::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return cact::is_numerical(e.kind()) ? kNumerical : kInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInput;
  }
  return kInput;
}
