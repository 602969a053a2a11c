#pragma once

#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "fmopto/dynamics.hpp"
#include "fmopto/harness/config.hpp"
#include "fmopto/observables.hpp"
#include "fmopto/sidebands.hpp"
#include "fmopto/stability.hpp"

namespace fmopto::harness {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitDivergence = 3;
inline constexpr int kExitPartial = 4;

std::string version();

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// Everything computed for one parameter point.
struct PointResult {
  ReducedParams params;
  bool diverged = false;
  double divergence_time = kNaN;
  bool settled = false;
  Cutoff phonon_cutoff;
  Cutoff entanglement_cutoff;
  double phonon_avg = kNaN;
  double phonon_avg_raw = kNaN;
  double entanglement_avg = kNaN;
  double min_physicality = std::numeric_limits<double>::infinity();
  double max_asymmetry = 0.0;
  std::optional<StabilityVerdict> floquet;
  std::string error;
  SimulationTrace trace;  ///< only filled with PointOptions::keep_trace

  bool unstable() const { return diverged || (floquet && floquet->verdict == Verdict::unstable); }
};

struct PointOptions {
  bool keep_trace = false;
  bool with_floquet = false;
};

/// Full modulated simulation of one point from the thermal initial state,
/// followed by transient detection and period averaging of the phonon
/// number and the logarithmic negativity.
PointResult simulate_point(const ReducedParams& params, const SimulationSettings& settings,
                           const PointOptions& options = {});

ObservableSeries phonon_series(const SimulationTrace& trace, bool raw = false);
ObservableSeries entanglement_series(const SimulationTrace& trace);

/// Samples of `series` sitting on modulation-period boundaries.
ObservableSeries stroboscopic(const ObservableSeries& series, double nu);

struct SweepRow {
  double value = 0.0;
  PointResult result;
};

struct SweepResult {
  SweepSpec spec;
  std::vector<SweepRow> rows;
  bool partial_failure() const;
};

/// Runs the sweep with per-point Floquet flags; rows are in grid order.
SweepResult sweep(const RunConfig& config, const SweepSpec& spec, int parallel);

struct RwaComparison {
  double nu = 0.0;
  PointResult full;
  double phonon_rwa = kNaN;
  double entanglement_rwa = kNaN;
  double phonon_gap = kNaN;
  double entanglement_gap = kNaN;
  int k0 = 0;
  RwaValidity validity;
  std::string error;
};

/// Full model against the static rotating-wave Lyapunov steady state for
/// each nu in task.nu_list.
std::vector<RwaComparison> rwa_compare(const RunConfig& config, int parallel);

StabilityMap config_stability_map(const RunConfig& config, const SweepSpec& rows, const SweepSpec& cols,
                                  int parallel);

// Commands: write files under `out` and return a process exit code.
int run_simulate(const RunConfig& config, const std::filesystem::path& out);
int run_sweep(const RunConfig& config, const SweepSpec& spec, const std::filesystem::path& out, int parallel);
int run_stability_map(const RunConfig& config, const SweepSpec& rows, const SweepSpec& cols,
                      const std::filesystem::path& out, int parallel);
int run_rwa_compare(const RunConfig& config, const std::filesystem::path& out, int parallel);

}  // namespace fmopto::harness
