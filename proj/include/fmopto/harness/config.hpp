#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fmopto/dynamics.hpp"
#include "fmopto/model.hpp"
#include "fmopto/step_policy.hpp"

namespace fmopto::harness {

using json = nlohmann::ordered_json;

enum class SweepScale { linear, log };

/// One swept parameter: `name=start:stop:count[:log]`.
struct SweepSpec {
  std::string parameter;
  double start = 0.0;
  double stop = 1.0;
  int count = 2;
  SweepScale scale = SweepScale::linear;

  std::vector<double> values() const;
  std::string to_string() const;
};

/// Throws ConfigError on malformed text or violated invariants.
SweepSpec parse_sweep(const std::string& text);

/// Laboratory-unit parameter block. Frequencies are stored in rad/s after
/// parsing, whatever `frequency_unit` the document used.
struct PhysicalBlock {
  PhysicalParams params;
  std::optional<double> G_override;  ///< rad/s
  bool hz = false;                    ///< document used cyclic Hz
};

/// Dimensionless parameter block, rates in units of omega_m.
struct ReducedBlock {
  double delta_c_prime = 1.0;
  double G_re = 0.0;
  double G_im = 0.0;
  double kappa = 0.0;
  double gamma = 0.0;
  std::optional<double> n_th;
  std::optional<double> temperature;  ///< K; requires omega_m
  std::optional<double> omega_m;      ///< rad/s, only to turn temperature into n_th
  double g = 0.0;
  double E = 0.0;
  bool hz = false;
};

enum class CouplingMode { constant, mean_field };

struct SimulationSettings {
  double t_max_periods = 3000.0;  ///< mechanical periods
  StepPolicy step;
  long stride = 0;                ///< steps between stored samples; 0 = one per modulation period
  int dense_tail_periods = 10;
  int average_periods = 10;
  double divergence_factor = 1e12;
  CouplingMode coupling = CouplingMode::constant;
  Integrator integrator = Integrator::channel;
  double probe_horizon_lifetimes = 50.0;
};

struct TaskBlock {
  std::vector<SweepSpec> sweeps;
  std::vector<double> nu_list{10.0, 20.0, 30.0, 50.0};
};

struct RunConfig {
  std::optional<PhysicalBlock> physical;
  std::optional<ReducedBlock> reduced;
  ModulationParams modulation;  ///< nu in units of omega_m
  SimulationSettings simulation;
  TaskBlock task;
  std::filesystem::path output_dir = "out";
  int parallel = 1;
};

/// Parses a configuration document. Unknown keys anywhere are errors.
RunConfig parse_config(const json& doc);
RunConfig load_config(const std::filesystem::path& path);

/// Canonical document for a config, with every default filled in.
json to_json(const RunConfig& config);
json to_json(const ReducedParams& params);

/// Resolves the working parameters for a config (runs the mean-field
/// calibration for physical blocks without a coupling override).
ReducedParams resolve(const RunConfig& config);

/// Sets one named parameter, as used by sweeps. Reduced-style names:
/// delta_c_prime, G, G_re, G_im, kappa, gamma, n_th, temperature, g, E.
/// Physical-style names: delta_c, omega_c, omega_l, omega_m, kappa, gamma,
/// g, power, temperature, G_override. Both styles: xi, nu.
void apply_parameter(RunConfig& config, const std::string& name, double value);

/// Field-by-field check of invariants; throws ConfigError.
void validate(const RunConfig& config);

}  // namespace fmopto::harness
