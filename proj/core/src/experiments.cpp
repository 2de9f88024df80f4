#include "demrep/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "demrep/io.hpp"
#include "demrep/prox.hpp"
#include "demrep/version.hpp"
#include "manifest.hpp"

namespace demrep {

namespace fs = std::filesystem;
using nlohmann::json;

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::PhaseKu: return "phase-ku";
    case ExperimentKind::PhasePapr: return "phase-papr";
    case ExperimentKind::OfdmPapr: return "ofdm-papr";
  }
  return "unknown";
}

ExperimentKind experiment_kind_from_string(const std::string& name) {
  if (name == "phase-ku") return ExperimentKind::PhaseKu;
  if (name == "phase-papr") return ExperimentKind::PhasePapr;
  if (name == "ofdm-papr") return ExperimentKind::OfdmPapr;
  throw ConfigError("unknown experiment kind '" + name + "'");
}

std::vector<double> MetricGrid::values() const {
  if (!(step > 0.0) || !(stop >= start)) throw ConfigError("metric grid needs step > 0 and stop >= start");
  const auto count = static_cast<long>(std::floor((stop - start) / step + 1e-9)) + 1;
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(count));
  for (long i = 0; i < count; ++i) out.push_back(start + static_cast<double>(i) * step);
  return out;
}

namespace {

MetricGrid grid_from_json(const json& j, const std::string& key) {
  check_keys(j, {"start", "stop", "step"}, key);
  MetricGrid g{get_or(j, "start", 0.0), get_or(j, "stop", 0.0), get_or(j, "step", 0.0)};
  g.values();
  return g;
}

json grid_to_json(const MetricGrid& g) { return {{"start", g.start}, {"stop", g.stop}, {"step", g.step}}; }

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  check_keys(j, {"schemaVersion", "kind", "N", "M", "trials", "families", "epsilon", "norm", "seed",
                 "equiangularIters", "failureBudget", "kuGrid", "paprDbGrid", "oversampling", "usedCarriers",
                 "reservedCount", "reservedPlacement", "reservedList", "qamOrder", "ccdfResolution",
                 "solveOversampled", "solver", "output"},
             "experiment config");
  const int version = get_or(j, "schemaVersion", -1);
  if (version != kSchemaVersion)
    throw ConfigError("experiment config: schemaVersion must be " + std::to_string(kSchemaVersion));
  if (!j.contains("kind")) throw ConfigError("experiment config: missing 'kind'");

  ExperimentConfig cfg;
  cfg.kind = experiment_kind_from_string(get_or<std::string>(j, "kind", ""));
  cfg.n = get_or<Index>(j, "N", cfg.n);
  if (j.contains("M")) {
    const auto& m = j.at("M");
    if (m.is_array()) {
      for (const auto& v : m) {
        if (!v.is_number_integer()) throw ConfigError("experiment config: 'M' entries must be integers");
        cfg.mValues.push_back(v.get<Index>());
      }
    } else if (m.is_object()) {
      check_keys(m, {"start", "stop", "step"}, "M range");
      const auto start = get_or<Index>(m, "start", 1);
      const auto stop = get_or<Index>(m, "stop", start);
      const auto step = get_or<Index>(m, "step", 1);
      if (step < 1) throw ConfigError("M range: step must be >= 1");
      for (Index v = start; v <= stop; v += step) cfg.mValues.push_back(v);
    } else {
      throw ConfigError("experiment config: 'M' must be a list or a {start, stop, step} range");
    }
  }
  cfg.trials = get_or(j, "trials", cfg.trials);
  if (j.contains("families")) {
    if (!j.at("families").is_array()) throw ConfigError("experiment config: 'families' must be a list");
    cfg.families.clear();
    for (const auto& f : j.at("families")) {
      if (!f.is_string()) throw ConfigError("experiment config: 'families' must hold strings");
      cfg.families.push_back(frame_family_from_string(f.get<std::string>()));
    }
  }
  cfg.epsilon = get_or(j, "epsilon", cfg.epsilon);
  if (j.contains("norm")) cfg.norm = norm_mode_from_string(get_or<std::string>(j, "norm", ""));
  cfg.seed = get_or(j, "seed", cfg.seed);
  cfg.equiangularIters = get_or(j, "equiangularIters", cfg.equiangularIters);
  cfg.failureBudget = get_or(j, "failureBudget", cfg.failureBudget);
  if (j.contains("kuGrid")) cfg.kuGrid = grid_from_json(j.at("kuGrid"), "kuGrid");
  if (j.contains("paprDbGrid")) cfg.paprDbGrid = grid_from_json(j.at("paprDbGrid"), "paprDbGrid");
  cfg.oversampling = get_or(j, "oversampling", cfg.oversampling);
  cfg.usedCarriers = get_or(j, "usedCarriers", cfg.usedCarriers);
  cfg.reservedCount = get_or(j, "reservedCount", cfg.reservedCount);
  cfg.reservedPlacement = get_or(j, "reservedPlacement", cfg.reservedPlacement);
  if (j.contains("reservedList")) {
    if (!j.at("reservedList").is_array()) throw ConfigError("experiment config: 'reservedList' must be a list");
    for (const auto& v : j.at("reservedList")) {
      if (!v.is_number_integer()) throw ConfigError("experiment config: 'reservedList' must hold integers");
      cfg.reservedList.push_back(v.get<Index>());
    }
  }
  cfg.qamOrder = get_or(j, "qamOrder", cfg.qamOrder);
  cfg.ccdfResolution = get_or(j, "ccdfResolution", cfg.ccdfResolution);
  cfg.solveOversampled = get_or(j, "solveOversampled", cfg.solveOversampled);

  SolverConfig base;
  // Matches the iteration cap of the reference OFDM runs.
  if (cfg.kind == ExperimentKind::OfdmPapr) base.maxIters = 1000;
  cfg.solver = solver_config_from_json(j.value("solver", json::object()), base);
  cfg.solver.epsilon = cfg.epsilon;
  cfg.solver.norm = cfg.norm;
  if (j.contains("solver") && (j.at("solver").contains("epsilon") || j.at("solver").contains("norm")))
    throw ConfigError("experiment config: set 'epsilon' and 'norm' at the top level, not under 'solver'");
  cfg.output = get_or(j, "output", cfg.output);
  cfg.validate();
  return cfg;
}

json ExperimentConfig::to_json() const {
  json fams = json::array();
  for (auto f : families) fams.push_back(to_string(f));
  json solver_json = solver_config_to_json(solver);
  solver_json.erase("epsilon");
  solver_json.erase("norm");
  return {{"schemaVersion", kSchemaVersion},
          {"kind", to_string(kind)},
          {"N", n},
          {"M", mValues},
          {"trials", trials},
          {"families", fams},
          {"epsilon", epsilon},
          {"norm", to_string(norm)},
          {"seed", seed},
          {"equiangularIters", equiangularIters},
          {"failureBudget", failureBudget},
          {"kuGrid", grid_to_json(kuGrid)},
          {"paprDbGrid", grid_to_json(paprDbGrid)},
          {"oversampling", oversampling},
          {"usedCarriers", usedCarriers},
          {"reservedCount", reservedCount},
          {"reservedPlacement", reservedPlacement},
          {"reservedList", reservedList},
          {"qamOrder", qamOrder},
          {"ccdfResolution", ccdfResolution},
          {"solveOversampled", solveOversampled},
          {"solver", solver_json},
          {"output", output}};
}

void ExperimentConfig::validate() const {
  if (n < 1) throw ConfigError("experiment config: N must be positive");
  if (trials < 1) throw ConfigError("experiment config: trials must be >= 1");
  if (!(epsilon >= 0.0)) throw ConfigError("experiment config: epsilon must be nonnegative");
  if (!(failureBudget >= 0.0 && failureBudget <= 1.0))
    throw ConfigError("experiment config: failureBudget must lie in [0, 1]");
  if (kind == ExperimentKind::OfdmPapr) {
    if (oversampling < 1) throw ConfigError("experiment config: oversampling must be >= 1");
    if (usedCarriers < 1 || usedCarriers > n) throw ConfigError("experiment config: usedCarriers must lie in [1, N]");
    if (reservedPlacement != "even" && reservedPlacement != "list")
      throw ConfigError("experiment config: reservedPlacement must be 'even' or 'list'");
    const Index reserved = reservedPlacement == "list" ? static_cast<Index>(reservedList.size()) : reservedCount;
    if (reserved < 1) throw ConfigError("experiment config: no reserved tones, nothing to optimize");
    if (reserved >= usedCarriers) throw ConfigError("experiment config: reserved tones must leave data tones");
    if (qamOrder != 4 && qamOrder != 16 && qamOrder != 64 && qamOrder != 256)
      throw ConfigError("experiment config: qamOrder must be 4, 16, 64 or 256");
    if (!(ccdfResolution > 0.0)) throw ConfigError("experiment config: ccdfResolution must be positive");
    if (epsilon != 0.0) throw ConfigError("experiment config: ofdm-papr solves exact constraints (epsilon = 0)");
  } else {
    if (mValues.empty()) throw ConfigError("experiment config: 'M' sweep is empty");
    for (Index m : mValues)
      if (m < 1 || m > n) throw ConfigError("experiment config: every M must lie in [1, N]");
    if (families.empty()) throw ConfigError("experiment config: 'families' is empty");
    if (epsilon >= 1.0) throw ConfigError("experiment config: epsilon must be < 1 (signals have unit norm)");
    if (equiangularIters < 1) throw ConfigError("experiment config: equiangularIters must be >= 1");
    kuGrid.values();
    paprDbGrid.values();
  }
}

ExperimentConfig load_experiment_config(const fs::path& path) {
  json j;
  try {
    j = json::parse(read_text(path));
  } catch (const json::parse_error& e) {
    throw ConfigError("'" + path.string() + "': " + e.what());
  }
  return ExperimentConfig::from_json(j);
}

void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn) {
  std::size_t workers = threads > 0 ? static_cast<std::size_t>(threads)
                                    : std::max<std::size_t>(1, std::thread::hardware_concurrency());
  workers = std::min(workers, count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto work = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(count);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

std::uint64_t trial_seed(std::uint64_t seed, FrameFamily family, std::size_t point, int trial) {
  const auto stream = derive_seed(seed, static_cast<std::uint64_t>(family) + 1, 0);
  return derive_seed(stream, point, static_cast<std::uint64_t>(trial));
}

TrialRecord run_phase_trial(const ExperimentConfig& cfg, FrameFamily family, std::size_t point, int trial) {
  const Index m = cfg.mValues.at(point);
  const auto seed = trial_seed(cfg.seed, family, point, trial);
  const FrameOperator frame = build_frame(family, cfg.n, m, seed, cfg.equiangularIters);

  Rng rng(derive_seed(seed, 0, 1));
  ComplexVector y = random_complex_normal(rng, m);
  y /= y.norm();

  SolverConfig scfg = cfg.solver;
  scfg.epsilon = cfg.epsilon;
  scfg.norm = cfg.norm;
  const bool parseval_path = cfg.epsilon == 0.0 && frame.tight_constant().has_value();
  const SolverResult res = parseval_path ? solve_cramp(frame, y, scfg) : solve_cram(frame, y, scfg);

  TrialRecord rec;
  rec.family = to_string(family);
  rec.n = cfg.n;
  rec.m = m;
  rec.trial = trial;
  rec.rho = static_cast<double>(m) / static_cast<double>(cfg.n);
  rec.paprLinear = papr(res.x);
  rec.paprDb = to_db(rec.paprLinear);
  rec.kHatU = empirical_ku(res.x, y, cfg.epsilon);
  rec.kTildeL = 1.0 / std::sqrt(frame.spectral_norm_squared());
  rec.extremeCount = count_extreme(res.x);
  rec.powerIncrease = power_increase(res.x, solve_least_squares(frame, y, cfg.epsilon));
  rec.normInf = norm_inf(res.x);
  rec.normTwo = res.x.norm();
  rec.epsilon = cfg.epsilon;
  rec.seed = seed;
  rec.iterations = res.iterations;
  rec.relativeGap = res.relativeGap;
  rec.converged = res.converged;
  return rec;
}

std::vector<TrialRecord> run_phase_trials(const ExperimentConfig& cfg, int threads) {
  cfg.validate();
  const std::size_t points = cfg.mValues.size();
  const auto trials = static_cast<std::size_t>(cfg.trials);
  const std::size_t total = cfg.families.size() * points * trials;
  std::vector<TrialRecord> out(total);
  parallel_for(total, threads, [&](std::size_t i) {
    const std::size_t f = i / (points * trials);
    const std::size_t p = (i / trials) % points;
    const int t = static_cast<int>(i % trials);
    out[i] = run_phase_trial(cfg, cfg.families[f], p, t);
  });
  return out;
}

std::vector<PointStats> point_stats(const ExperimentConfig& cfg, const std::vector<TrialRecord>& records) {
  std::vector<PointStats> stats;
  for (auto family : cfg.families) {
    for (Index m : cfg.mValues) {
      PointStats s;
      s.family = to_string(family);
      s.m = m;
      double iters = 0.0;
      for (const auto& r : records) {
        if (r.family != s.family || r.m != m) continue;
        ++s.trials;
        if (!r.converged) ++s.failures;
        iters += r.iterations;
        s.maxRelativeGap = std::max(s.maxRelativeGap, r.relativeGap);
      }
      if (s.trials > 0) s.meanIterations = iters / s.trials;
      s.withinBudget = s.failures <= cfg.failureBudget * s.trials + 1e-12;
      stats.push_back(s);
    }
  }
  return stats;
}

double interpolate_half(const std::vector<double>& bins, const std::vector<double>& fraction) {
  for (std::size_t b = 0; b < bins.size(); ++b) {
    if (fraction[b] < 0.5) continue;
    if (b == 0) return std::numeric_limits<double>::quiet_NaN();
    const double f0 = fraction[b - 1];
    const double f1 = fraction[b];
    return bins[b - 1] + (0.5 - f0) / (f1 - f0) * (bins[b] - bins[b - 1]);
  }
  return std::numeric_limits<double>::quiet_NaN();
}

std::vector<PhaseDiagram> build_phase_diagrams(const ExperimentConfig& cfg, const std::vector<TrialRecord>& records,
                                               ExperimentKind metric) {
  if (metric == ExperimentKind::OfdmPapr) throw ConfigError("build_phase_diagrams: not a phase-diagram metric");
  const bool ku = metric == ExperimentKind::PhaseKu;
  const std::vector<double> bins = ku ? cfg.kuGrid.values() : cfg.paprDbGrid.values();

  std::vector<PhaseDiagram> out;
  for (auto family : cfg.families) {
    PhaseDiagram d;
    d.family = to_string(family);
    d.metric = ku ? "kHatU" : "paprDb";
    d.bins = bins;
    for (Index m : cfg.mValues) {
      std::vector<double> values;
      for (const auto& r : records)
        if (r.family == d.family && r.m == m) values.push_back(ku ? r.kHatU : r.paprDb);
      if (values.empty()) continue;
      std::sort(values.begin(), values.end());
      std::vector<double> frac(bins.size());
      for (std::size_t b = 0; b < bins.size(); ++b) {
        const auto below = std::upper_bound(values.begin(), values.end(), bins[b]) - values.begin();
        frac[b] = static_cast<double>(below) / static_cast<double>(values.size());
      }
      d.m.push_back(m);
      d.rho.push_back(static_cast<double>(m) / static_cast<double>(cfg.n));
      d.transition.push_back(interpolate_half(bins, frac));
      d.fraction.push_back(std::move(frac));
    }
    out.push_back(std::move(d));
  }
  return out;
}

namespace {

json stats_to_json(const std::vector<PointStats>& stats) {
  json arr = json::array();
  for (const auto& s : stats)
    arr.push_back({{"family", s.family},
                   {"M", s.m},
                   {"trials", s.trials},
                   {"failures", s.failures},
                   {"meanIterations", s.meanIterations},
                   {"maxRelativeGap", s.maxRelativeGap},
                   {"withinBudget", s.withinBudget}});
  return arr;
}

}  // namespace

json run_manifest(const ExperimentConfig& cfg, double seconds, const std::vector<fs::path>& files) {
  json names = json::array();
  for (const auto& f : files) names.push_back(f.filename().string());
  return {{"config", cfg.to_json()},
          {"version", kVersion},
          {"gitDescribe", kGitDescribe},
          {"wallSeconds", seconds},
          {"files", names}};
}

RunSummary run_phase_diagram(const ExperimentConfig& cfg, int threads) {
  if (cfg.kind == ExperimentKind::OfdmPapr) throw ConfigError("run_phase_diagram: config kind is ofdm-papr");
  const auto start = std::chrono::steady_clock::now();
  const auto records = run_phase_trials(cfg, threads);
  const auto diagrams = build_phase_diagrams(cfg, records, cfg.kind);
  const auto stats = point_stats(cfg, records);

  const fs::path dir = cfg.output;
  fs::create_directories(dir);
  RunSummary summary;

  std::ostringstream trials;
  trials << TrialRecord::csv_header() << '\n';
  for (const auto& r : records) trials << r.csv_row() << '\n';
  summary.files.push_back(dir / "trials.csv");
  write_text(summary.files.back(), trials.str());

  std::ostringstream grid;
  grid << "family,M,rho," << diagrams.front().metric << ",fraction\n";
  std::ostringstream curve;
  curve << "family,M,rho," << diagrams.front().metric << "50\n";
  for (const auto& d : diagrams) {
    for (std::size_t i = 0; i < d.rho.size(); ++i) {
      for (std::size_t b = 0; b < d.bins.size(); ++b)
        grid << d.family << ',' << d.m[i] << ',' << format_double(d.rho[i]) << ',' << format_double(d.bins[b]) << ','
             << format_double(d.fraction[i][b]) << '\n';
      curve << d.family << ',' << d.m[i] << ',' << format_double(d.rho[i]) << ',' << format_double(d.transition[i])
            << '\n';
    }
  }
  summary.files.push_back(dir / "phase_grid.csv");
  write_text(summary.files.back(), grid.str());
  summary.files.push_back(dir / "transition.csv");
  write_text(summary.files.back(), curve.str());

  summary.withinBudget = std::all_of(stats.begin(), stats.end(), [](const PointStats& s) { return s.withinBudget; });
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  json manifest = run_manifest(cfg, seconds, summary.files);
  manifest["points"] = stats_to_json(stats);
  manifest["withinBudget"] = summary.withinBudget;
  summary.files.push_back(dir / "manifest.json");
  write_text(summary.files.back(), manifest.dump(2) + "\n");
  return summary;
}

}  // namespace demrep
