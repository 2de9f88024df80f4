#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "demrep/frames.hpp"
#include "demrep/metrics.hpp"
#include "demrep/solvers.hpp"
#include "demrep/types.hpp"

namespace demrep {

enum class ExperimentKind { PhaseKu, PhasePapr, OfdmPapr };

std::string to_string(ExperimentKind kind);
ExperimentKind experiment_kind_from_string(const std::string& name);

inline constexpr int kSchemaVersion = 1;

struct MetricGrid {
  double start = 0.0;
  double stop = 0.0;
  double step = 0.0;
  std::vector<double> values() const;
};

/// Experiment description. Parsed from JSON with strict key checking; see
/// docs/config.md for the schema.
struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::PhaseKu;
  Index n = 128;
  /// Explicit M values; filled from an {start, stop, step} range when parsed.
  std::vector<Index> mValues;
  int trials = 25;
  std::vector<FrameFamily> families = {FrameFamily::SubsampledDft};
  /// Absolute budget; phase-diagram signals are normalized to ||y||_2 = 1.
  double epsilon = 0.0;
  NormMode norm = NormMode::Inf;
  std::uint64_t seed = 1;
  int equiangularIters = 50;
  /// Fraction of non-converged trials tolerated per sweep point.
  double failureBudget = 0.01;
  MetricGrid kuGrid{0.5, 20.0, 0.01};
  MetricGrid paprDbGrid{0.0, 12.0, 0.01};

  // OFDM study.
  int oversampling = 4;
  Index usedCarriers = 1705;
  Index reservedCount = 20;
  /// "even" spreads reservedCount tones over the used band; "list" takes reservedList.
  std::string reservedPlacement = "even";
  std::vector<Index> reservedList;
  int qamOrder = 256;
  double ccdfResolution = 0.1;
  bool solveOversampled = true;

  SolverConfig solver;
  std::string output = "out";

  /// Throws ConfigError on unknown keys, wrong types or invalid values.
  static ExperimentConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
  void validate() const;
};

ExperimentConfig load_experiment_config(const std::filesystem::path& path);

/// Child seed of sweep point j, trial t, under the family's stream.
std::uint64_t trial_seed(std::uint64_t seed, FrameFamily family, std::size_t point, int trial);

/// Solves one phase-diagram trial: builds the frame, draws a unit-norm complex
/// Gaussian y and solves with CRAMP (Parseval families, epsilon = 0) or CRAM.
TrialRecord run_phase_trial(const ExperimentConfig& cfg, FrameFamily family, std::size_t point, int trial);

/// All (family, M, trial) combinations, in that order. `threads` <= 0 means
/// hardware concurrency. The output does not depend on the thread count.
std::vector<TrialRecord> run_phase_trials(const ExperimentConfig& cfg, int threads = 1);

struct PointStats {
  std::string family;
  Index m = 0;
  int trials = 0;
  int failures = 0;
  double meanIterations = 0.0;
  double maxRelativeGap = 0.0;
  bool withinBudget = true;
};

std::vector<PointStats> point_stats(const ExperimentConfig& cfg, const std::vector<TrialRecord>& records);

struct PhaseDiagram {
  std::string family;
  std::string metric;  // "kHatU" or "paprDb"
  std::vector<double> rho;
  std::vector<Index> m;
  std::vector<double> bins;
  /// fraction[i][b] = share of trials at rho[i] with metric <= bins[b].
  std::vector<std::vector<double>> fraction;
  /// Metric value where fraction crosses 1/2, linearly interpolated on the bin
  /// grid; NaN when the crossing is outside the grid.
  std::vector<double> transition;
};

std::vector<PhaseDiagram> build_phase_diagrams(const ExperimentConfig& cfg,
                                               const std::vector<TrialRecord>& records,
                                               ExperimentKind metric);

/// Linear interpolation of the 1/2 crossing of a nondecreasing fraction curve.
double interpolate_half(const std::vector<double>& bins, const std::vector<double>& fraction);

struct RunSummary {
  std::vector<std::filesystem::path> files;
  bool withinBudget = true;
};

/// Runs a phase-ku or phase-papr config and writes trials.csv, phase_grid.csv,
/// transition.csv and manifest.json under cfg.output.
RunSummary run_phase_diagram(const ExperimentConfig& cfg, int threads = 1);

// OFDM tone reservation.

/// Gray-mapped square QAM with unit average energy. bits.size() must be a
/// multiple of log2(order); the first half of each symbol's bits selects the
/// in-phase level.
ComplexVector qam_map(const std::vector<std::uint8_t>& bits, int order);

struct CcdfTable {
  std::vector<double> thresholds;
  std::vector<std::string> names;
  /// curves[c][i] = P(value > thresholds[i]) for series c.
  std::vector<std::vector<double>> curves;
};

/// P(value > t) on the grid floor(min/res)*res - res .. ceil(max/res)*res.
CcdfTable ccdf(const std::vector<double>& values, double resolution);
/// Several series on one shared grid.
CcdfTable ccdf(const std::vector<std::vector<double>>& series, const std::vector<std::string>& names,
               double resolution);

/// Smallest threshold where curve `column` drops to `probability`, linearly
/// interpolated between grid points.
double ccdf_crossing(const CcdfTable& table, std::size_t column, double probability);

/// Reserved tones on the N-grid in FFT order.
std::vector<Index> reserved_tones(const ExperimentConfig& cfg);
/// Data-carrying tones (used band minus reserved), FFT order.
std::vector<Index> data_tones(const ExperimentConfig& cfg);

struct OfdmTrial {
  int trial = 0;
  double conventionalDb = 0.0;
  double criticalDb = 0.0;
  double oversampledDb = 0.0;
  int criticalIterations = 0;
  int oversampledIterations = 0;
  /// Relative constraint residual of the solved signals.
  double criticalResidual = 0.0;
  double oversampledResidual = 0.0;
};

OfdmTrial run_ofdm_trial(const ExperimentConfig& cfg, const FrameOperator& critical,
                         const FrameOperator* oversampled, int trial);

struct OfdmResult {
  std::vector<OfdmTrial> trials;
  CcdfTable table;
};

OfdmResult run_ofdm_trials(const ExperimentConfig& cfg, int threads = 1);

/// Runs an ofdm-papr config and writes ofdm_trials.csv, ccdf.csv and manifest.json.
RunSummary run_ofdm_papr(const ExperimentConfig& cfg, int threads = 1);

/// Calls fn(i) for i in [0, count) on up to `threads` workers.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn);

}  // namespace demrep
