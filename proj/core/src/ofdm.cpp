#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>

#include "demrep/experiments.hpp"
#include "demrep/io.hpp"
#include "fft.hpp"
#include "manifest.hpp"

namespace demrep {

namespace fs = std::filesystem;
using nlohmann::json;

ComplexVector qam_map(const std::vector<std::uint8_t>& bits, int order) {
  if (order != 4 && order != 16 && order != 64 && order != 256)
    throw ConfigError("qam_map: order must be 4, 16, 64 or 256");
  const int k = std::countr_zero(static_cast<unsigned>(order));
  const int h = k / 2;
  if (bits.size() % static_cast<std::size_t>(k) != 0)
    throw ConfigError("qam_map: bit count must be a multiple of " + std::to_string(k));
  const int levels = 1 << h;
  const double scale = 1.0 / std::sqrt(2.0 * (levels * levels - 1) / 3.0);

  auto axis = [&](std::size_t offset) {
    unsigned gray = 0;
    for (int b = 0; b < h; ++b) gray = (gray << 1) | (bits[offset + static_cast<std::size_t>(b)] & 1u);
    unsigned index = gray;
    for (unsigned shift = gray >> 1; shift != 0; shift >>= 1) index ^= shift;
    return static_cast<double>(2 * static_cast<int>(index) - (levels - 1));
  };

  ComplexVector out(static_cast<Index>(bits.size() / static_cast<std::size_t>(k)));
  for (Index s = 0; s < out.size(); ++s) {
    const auto base = static_cast<std::size_t>(s) * static_cast<std::size_t>(k);
    out(s) = Complex{axis(base), axis(base + static_cast<std::size_t>(h))} * scale;
  }
  return out;
}

CcdfTable ccdf(const std::vector<std::vector<double>>& series, const std::vector<std::string>& names,
               double resolution) {
  if (!(resolution > 0.0)) throw ConfigError("ccdf: resolution must be positive");
  if (series.empty() || series.size() != names.size()) throw ConfigError("ccdf: need one name per series");
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& s : series) {
    if (s.empty()) throw ConfigError("ccdf: empty input");
    for (double v : s) {
      if (!std::isfinite(v)) throw ConfigError("ccdf: non-finite value");
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  const auto k0 = static_cast<long>(std::floor(lo / resolution)) - 1;
  const auto k1 = static_cast<long>(std::ceil(hi / resolution));

  CcdfTable table;
  table.names = names;
  for (long k = k0; k <= k1; ++k) table.thresholds.push_back(static_cast<double>(k) * resolution);
  for (const auto& s : series) {
    std::vector<double> sorted = s;
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> curve;
    curve.reserve(table.thresholds.size());
    for (double t : table.thresholds) {
      const auto above = sorted.end() - std::upper_bound(sorted.begin(), sorted.end(), t);
      curve.push_back(static_cast<double>(above) / static_cast<double>(sorted.size()));
    }
    table.curves.push_back(std::move(curve));
  }
  return table;
}

CcdfTable ccdf(const std::vector<double>& values, double resolution) {
  return ccdf(std::vector<std::vector<double>>{values}, {"value"}, resolution);
}

double ccdf_crossing(const CcdfTable& table, std::size_t column, double probability) {
  const auto& c = table.curves.at(column);
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (c[i] > probability) continue;
    if (i == 0) return table.thresholds[0];
    const double t0 = table.thresholds[i - 1];
    const double t1 = table.thresholds[i];
    return t0 + (c[i - 1] - probability) / (c[i - 1] - c[i]) * (t1 - t0);
  }
  return table.thresholds.back();
}

namespace {

// Used band: usedCarriers consecutive carriers centered on DC, FFT order.
std::vector<Index> used_band(const ExperimentConfig& cfg) {
  std::vector<Index> out;
  const Index lowest = -(cfg.usedCarriers - 1) / 2;
  for (Index i = 0; i < cfg.usedCarriers; ++i) {
    const Index k = lowest + i;
    out.push_back(k < 0 ? k + cfg.n : k);
  }
  return out;
}

}  // namespace

std::vector<Index> reserved_tones(const ExperimentConfig& cfg) {
  std::vector<Index> out;
  if (cfg.reservedPlacement == "list") {
    out = cfg.reservedList;
    const auto band = used_band(cfg);
    for (Index t : out)
      if (std::find(band.begin(), band.end(), t) == band.end())
        throw ConfigError("reserved tone " + std::to_string(t) + " lies outside the used band");
  } else {
    const auto band = used_band(cfg);
    const auto u = static_cast<double>(cfg.usedCarriers);
    const auto r = static_cast<double>(cfg.reservedCount);
    for (Index i = 0; i < cfg.reservedCount; ++i)
      out.push_back(band[static_cast<std::size_t>(std::floor((static_cast<double>(i) + 0.5) * u / r))]);
  }
  std::sort(out.begin(), out.end());
  if (std::adjacent_find(out.begin(), out.end()) != out.end()) throw ConfigError("reserved tones must be distinct");
  if (out.empty()) throw ConfigError("no reserved tones: nothing to optimize");
  return out;
}

std::vector<Index> data_tones(const ExperimentConfig& cfg) {
  auto band = used_band(cfg);
  const auto reserved = reserved_tones(cfg);
  std::vector<Index> out;
  for (Index t : band)
    if (!std::binary_search(reserved.begin(), reserved.end(), t)) out.push_back(t);
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

ComplexVector gather(const ComplexVector& v, const std::vector<Index>& rows) {
  ComplexVector out(static_cast<Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) out(static_cast<Index>(i)) = v(rows[i]);
  return out;
}

struct OfdmPlan {
  std::vector<Index> data;
  FrameOperator critical;
  std::optional<FrameOperator> oversampled;
};

OfdmPlan make_plan(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto reserved = reserved_tones(cfg);
  std::vector<Index> rows;
  for (Index k = 0; k < cfg.n; ++k)
    if (!std::binary_search(reserved.begin(), reserved.end(), k)) rows.push_back(k);
  FrameDiagnostics diag;
  diag.family = "tone-reservation";
  OfdmPlan plan{data_tones(cfg), FrameOperator::subsampled_dft(cfg.n, std::move(rows), std::move(diag)), {}};
  if (cfg.solveOversampled) plan.oversampled = FrameOperator::oversampled_tone_map(cfg.n, cfg.oversampling, reserved);
  return plan;
}

}  // namespace

OfdmTrial run_ofdm_trial(const ExperimentConfig& cfg, const FrameOperator& critical, const FrameOperator* oversampled,
                         int trial) {
  const auto data = data_tones(cfg);
  const int bits_per_symbol = std::countr_zero(static_cast<unsigned>(cfg.qamOrder));
  Rng rng(derive_seed(cfg.seed, 0, static_cast<std::uint64_t>(trial)));
  std::vector<std::uint8_t> bits(data.size() * static_cast<std::size_t>(bits_per_symbol));
  for (auto& b : bits) b = static_cast<std::uint8_t>(rng.next_u64() >> 63);
  const ComplexVector symbols = qam_map(bits, cfg.qamOrder);

  ComplexVector spectrum = ComplexVector::Zero(cfg.n);
  for (std::size_t i = 0; i < data.size(); ++i) spectrum(data[i]) = symbols(static_cast<Index>(i));

  OfdmTrial out;
  out.trial = trial;
  const ComplexVector conventional = detail::unitary_dft(spectrum, true);
  out.conventionalDb = to_db(papr_oversampled(conventional, cfg.oversampling));

  SolverConfig scfg = cfg.solver;
  scfg.epsilon = 0.0;
  {
    const ComplexVector y = gather(spectrum, critical.row_indices());
    const SolverResult r = solve_cramp(critical, y, scfg);
    out.criticalDb = to_db(papr_oversampled(r.x, cfg.oversampling));
    out.criticalIterations = r.iterations;
    out.criticalResidual = r.residualFeasibility / y.norm();
  }
  if (oversampled) {
    const ComplexVector full =
        pad_spectrum(spectrum, cfg.oversampling) * std::sqrt(static_cast<double>(cfg.oversampling));
    const ComplexVector y = gather(full, oversampled->row_indices());
    const SolverResult r = solve_cramp(*oversampled, y, scfg);
    out.oversampledDb = papr_db(r.x);
    out.oversampledIterations = r.iterations;
    out.oversampledResidual = r.residualFeasibility / y.norm();
  }
  return out;
}

OfdmResult run_ofdm_trials(const ExperimentConfig& cfg, int threads) {
  if (cfg.kind != ExperimentKind::OfdmPapr) throw ConfigError("run_ofdm_trials: config kind must be ofdm-papr");
  const OfdmPlan plan = make_plan(cfg);
  OfdmResult result;
  result.trials.resize(static_cast<std::size_t>(cfg.trials));
  const FrameOperator* os = plan.oversampled ? &*plan.oversampled : nullptr;
  parallel_for(result.trials.size(), threads, [&](std::size_t t) {
    result.trials[t] = run_ofdm_trial(cfg, plan.critical, os, static_cast<int>(t));
  });

  std::vector<std::vector<double>> series(os ? 3 : 2);
  for (const auto& t : result.trials) {
    series[0].push_back(t.conventionalDb);
    series[1].push_back(t.criticalDb);
    if (os) series[2].push_back(t.oversampledDb);
  }
  std::vector<std::string> names = {"conventional", "critical"};
  if (os) names.push_back("oversampled");
  result.table = ccdf(series, names, cfg.ccdfResolution);
  return result;
}

RunSummary run_ofdm_papr(const ExperimentConfig& cfg, int threads) {
  const auto start = std::chrono::steady_clock::now();
  const OfdmResult result = run_ofdm_trials(cfg, threads);
  const fs::path dir = cfg.output;
  fs::create_directories(dir);
  RunSummary summary;

  // Feasibility is the only failure mode: every CRAMP iterate satisfies the
  // constraints, so hitting the iteration cap is not a failure.
  int failures = 0;
  std::ostringstream trials;
  trials << "trial,conventionalDb,criticalDb,oversampledDb,criticalIterations,oversampledIterations,"
            "criticalResidual,oversampledResidual\n";
  for (const auto& t : result.trials) {
    if (t.criticalResidual > 1e-8 || t.oversampledResidual > 1e-8) ++failures;
    trials << t.trial << ',' << format_double(t.conventionalDb) << ',' << format_double(t.criticalDb) << ','
           << format_double(t.oversampledDb) << ',' << t.criticalIterations << ',' << t.oversampledIterations << ','
           << format_double(t.criticalResidual) << ',' << format_double(t.oversampledResidual) << '\n';
  }
  summary.files.push_back(dir / "ofdm_trials.csv");
  write_text(summary.files.back(), trials.str());

  std::ostringstream table;
  table << "paprDb";
  for (const auto& n : result.table.names) table << ',' << n;
  table << '\n';
  for (std::size_t i = 0; i < result.table.thresholds.size(); ++i) {
    table << format_double(result.table.thresholds[i]);
    for (const auto& c : result.table.curves) table << ',' << format_double(c[i]);
    table << '\n';
  }
  summary.files.push_back(dir / "ccdf.csv");
  write_text(summary.files.back(), table.str());

  summary.withinBudget = failures <= cfg.failureBudget * cfg.trials + 1e-12;
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  json manifest = run_manifest(cfg, seconds, summary.files);
  json at = json::object();
  for (std::size_t c = 0; c < result.table.names.size(); ++c)
    at[result.table.names[c]] = ccdf_crossing(result.table, c, 1e-2);
  manifest["paprDbAtCcdf1e-2"] = at;
  manifest["infeasibleTrials"] = failures;
  manifest["withinBudget"] = summary.withinBudget;
  summary.files.push_back(dir / "manifest.json");
  write_text(summary.files.back(), manifest.dump(2) + "\n");
  return summary;
}

}  // namespace demrep
