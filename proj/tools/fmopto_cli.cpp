// fmopto command line: simulate, sweep, stability-map, rwa-compare.
#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fmopto/errors.hpp"
#include "fmopto/harness/config.hpp"
#include "fmopto/harness/runner.hpp"

namespace h = fmopto::harness;

namespace {

struct Common {
  std::string config;
  std::string out;
  int parallel = 0;
  std::vector<std::string> sweeps;
  std::vector<std::string> sets;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config, "run configuration (JSON)")->required();
  sub->add_option("--out", c.out, "output directory (overrides output.dir)");
  sub->add_option("--parallel", c.parallel, "worker threads (overrides parallel)")->check(CLI::NonNegativeNumber);
  sub->add_option("--sweep", c.sweeps, "name=start:stop:count[:log], repeatable");
  sub->add_option("--set", c.sets, "name=value parameter override, repeatable");
}

struct Loaded {
  h::RunConfig config;
  std::vector<h::SweepSpec> sweeps;
  std::filesystem::path out;
  int parallel = 1;
};

Loaded load(const Common& c) {
  Loaded l;
  l.config = h::load_config(c.config);
  for (const auto& s : c.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) throw fmopto::ConfigError("set", "expected name=value, got \"" + s + "\"");
    double v = 0.0;
    try {
      std::size_t used = 0;
      v = std::stod(s.substr(eq + 1), &used);
      if (used != s.size() - eq - 1) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw fmopto::ConfigError("set", "could not parse a number in \"" + s + "\"");
    }
    h::apply_parameter(l.config, s.substr(0, eq), v);
  }
  h::validate(l.config);
  if (c.parallel > 0) l.config.parallel = c.parallel;
  l.parallel = l.config.parallel;
  l.out = c.out.empty() ? l.config.output_dir : std::filesystem::path(c.out);
  for (const auto& s : c.sweeps) l.sweeps.push_back(h::parse_sweep(s));
  if (l.sweeps.empty()) l.sweeps = l.config.task.sweeps;
  return l;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Frequency-modulated optomechanics: covariance dynamics, stability, cooling and entanglement"};
  app.set_version_flag("--version", h::version());
  app.require_subcommand(1);

  Common c_sim, c_sweep, c_map, c_rwa;
  auto* sim = app.add_subcommand("simulate", "single full-model run");
  auto* swp = app.add_subcommand("sweep", "one-parameter sweep of period-averaged observables");
  auto* map = app.add_subcommand("stability-map", "verdict grid over two parameters");
  auto* rwa = app.add_subcommand("rwa-compare", "full model vs rotating-wave steady state over task.nu_list");
  add_common(sim, c_sim);
  add_common(swp, c_sweep);
  add_common(map, c_map);
  add_common(rwa, c_rwa);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : h::kExitConfig;
  }

  try {
    if (*sim) {
      const Loaded l = load(c_sim);
      const int rc = h::run_simulate(l.config, l.out);
      if (rc == h::kExitDivergence) std::fprintf(stderr, "fmopto: run is unstable (diverged or Floquet-unstable)\n");
      return rc;
    }
    if (*swp) {
      const Loaded l = load(c_sweep);
      if (l.sweeps.size() != 1) throw fmopto::ConfigError("sweep", "sweep needs exactly one --sweep (or task.sweeps entry)");
      return h::run_sweep(l.config, l.sweeps.front(), l.out, l.parallel);
    }
    if (*map) {
      const Loaded l = load(c_map);
      if (l.sweeps.size() != 2) throw fmopto::ConfigError("sweep", "stability-map needs exactly two sweeps");
      return h::run_stability_map(l.config, l.sweeps[0], l.sweeps[1], l.out, l.parallel);
    }
    const Loaded l = load(c_rwa);
    return h::run_rwa_compare(l.config, l.out, l.parallel);
  } catch (const fmopto::ConfigError& e) {
    std::fprintf(stderr, "fmopto: config error: %s\n", e.what());
    return h::kExitConfig;
  } catch (const fmopto::InvalidArgument& e) {
    std::fprintf(stderr, "fmopto: invalid parameters: %s\n", e.what());
    return h::kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "fmopto: %s\n", e.what());
    return 1;
  }
}
