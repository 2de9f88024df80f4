#include "cli.hpp"

#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "demrep/experiments.hpp"
#include "demrep/frames.hpp"
#include "demrep/io.hpp"
#include "demrep/prox.hpp"
#include "demrep/rng.hpp"
#include "demrep/solvers.hpp"
#include "demrep/version.hpp"

namespace demrep::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Common {
  std::string config;
  std::vector<std::string> overrides;
  std::string out;
  int threads = 0;
  int verbosity = 0;
};

json parse_json_text(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(what + ": invalid JSON (" + std::string(e.what()) + ")");
  }
}

std::uint64_t parse_seed(const char* text) {
  const std::string s(text);
  std::size_t used = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(s, &used, 0);
  } catch (const std::exception&) {
    used = 0;
  }
  if (s.empty() || used != s.size() || s.front() == '-')
    throw ConfigError("DEMREP_SEED must be a non-negative integer, got '" + s + "'");
  return v;
}

/// Config file (or `fallback` when none is given), then DEMREP_SEED, then --set,
/// then --out.
json load_config(const Common& c, const json& fallback = json::object()) {
  json j = c.config.empty() ? fallback : parse_json_text(read_text(c.config), c.config);
  if (!j.is_object()) throw ConfigError("config: top level must be an object");
  if (const char* env = std::getenv("DEMREP_SEED"); env != nullptr && *env != '\0') j["seed"] = parse_seed(env);
  for (const auto& o : c.overrides) apply_override(j, o);
  if (!c.out.empty()) j["output"] = c.out;
  return j;
}

fs::path base_dir(const Common& c) {
  return c.config.empty() ? fs::path{} : fs::path(c.config).parent_path();
}

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_relative() ? base / path : path;
}

void require_schema(const json& j, const std::string& what) {
  if (get_or(j, "schemaVersion", -1) != kSchemaVersion)
    throw ConfigError(what + ": schemaVersion must be " + std::to_string(kSchemaVersion));
}

fs::path prepare_output(const json& j) {
  const fs::path dir = get_or<std::string>(j, "output", "out");
  fs::create_directories(dir);
  return dir;
}

void report(std::ostream& out, const std::vector<fs::path>& files) {
  for (const auto& f : files) out << f.string() << '\n';
}

FrameOperator frame_from_config(const json& j, const fs::path& base) {
  if (!j.contains("frame")) throw ConfigError("config: missing 'frame'");
  json spec = j.at("frame");
  if (spec.is_object() && spec.contains("family") && !spec.contains("seed") && j.contains("seed"))
    spec["seed"] = j.at("seed");
  return frame_from_spec(spec, base);
}

ComplexVector signal_from_config(const json& j, const fs::path& base, Index m) {
  if (!j.contains("signal")) throw ConfigError("config: missing 'signal'");
  const json& s = j.at("signal");
  if (!s.is_object()) throw ConfigError("signal: expected an object");
  ComplexVector y;
  if (s.contains("values")) {
    check_keys(s, {"values"}, "signal");
    y = vector_from_json(s.at("values"), "signal values");
  } else if (s.contains("file")) {
    check_keys(s, {"file"}, "signal");
    const fs::path p = resolve(base, get_or<std::string>(s, "file", ""));
    y = p.extension() == ".json" ? vector_from_json(parse_json_text(read_text(p), p.string()), p.string())
                                 : read_vector_binary(p);
  } else if (s.contains("synthetic")) {
    check_keys(s, {"synthetic", "norm"}, "signal");
    if (get_or<std::string>(s, "synthetic", "") != "complex-normal")
      throw ConfigError("signal: synthetic must be 'complex-normal'");
    Rng rng(derive_seed(get_or<std::uint64_t>(j, "seed", 1), 0, 1));
    y = random_complex_normal(rng, m);
    if (s.contains("norm")) {
      const double target = get_or(s, "norm", 1.0);
      if (!(target > 0.0)) throw ConfigError("signal: norm must be positive");
      y *= target / y.norm();
    }
  } else {
    throw ConfigError("signal: needs 'values', 'file' or 'synthetic'");
  }
  require_length("signal", m, y.size());
  return y;
}

int cmd_solve(const Common& c, std::ostream& out, std::ostream& err) {
  const json j = load_config(c);
  check_keys(j, {"schemaVersion", "seed", "frame", "signal", "solver", "output", "writeRepresentation"}, "solve config");
  require_schema(j, "solve config");
  const fs::path base = base_dir(c);
  const FrameOperator frame = frame_from_config(j, base);
  const ComplexVector y = signal_from_config(j, base, frame.rows());

  const json solver_json = j.value("solver", json::object());
  const SolverConfig cfg = solver_config_from_json(solver_json, {}, {"algorithm"});
  std::string algorithm = get_or<std::string>(solver_json, "algorithm", "auto");
  if (algorithm == "auto")
    algorithm = cfg.epsilon == 0.0 && frame.tight_constant().has_value() ? "cramp" : "cram";
  SolverResult result;
  if (algorithm == "cram")
    result = solve_cram(frame, y, cfg);
  else if (algorithm == "cramp")
    result = solve_cramp(frame, y, cfg);
  else
    throw ConfigError("solver: algorithm must be 'auto', 'cram' or 'cramp'");

  const fs::path dir = prepare_output(j);
  std::vector<fs::path> files;
  json doc = {{"schemaVersion", kSchemaVersion},
              {"algorithm", algorithm},
              {"solver", solver_config_to_json(cfg)},
              {"result", result_to_json(result)},
              {"x", vector_to_json(result.x)},
              {"dual", vector_to_json(result.dual)}};
  if (get_or(j, "writeRepresentation", true)) {
    write_vector_binary(dir / "x.bin", result.x);
    doc["representation"] = "x.bin";
    files.push_back(dir / "x.bin");
  }
  write_text(dir / "result.json", doc.dump(2) + "\n");
  files.insert(files.begin(), dir / "result.json");
  if (c.verbosity > 0)
    err << algorithm << ": " << result.iterations << " iterations, objective " << result.primalObjective
        << ", relative gap " << result.relativeGap << '\n';
  report(out, files);
  if (!result.converged) {
    err << json{{"warning", "iteration-cap"}, {"iterations", result.iterations}}.dump() << '\n';
    return kIterationCap;
  }
  return kOk;
}

double parseval_residual(const FrameOperator& frame) {
  const ComplexMatrix d = frame.materialize();
  const ComplexMatrix g = d * d.adjoint() - ComplexMatrix::Identity(frame.rows(), frame.rows());
  return g.cwiseAbs().maxCoeff();
}

int cmd_frame_info(const Common& c, std::ostream& out, std::ostream&) {
  const json j = load_config(c);
  check_keys(j, {"schemaVersion", "seed", "frame", "upDelta", "bounds", "output"}, "frame-info config");
  require_schema(j, "frame-info config");
  const FrameOperator frame = frame_from_config(j, base_dir(c));

  const std::string bounds_mode = get_or<std::string>(j, "bounds", "auto");
  BoundsMethod method = frame.rows() <= kDenseEigenCap ? BoundsMethod::ExactEig : BoundsMethod::PowerIteration;
  if (bounds_mode == "exact")
    method = BoundsMethod::ExactEig;
  else if (bounds_mode == "estimate")
    method = BoundsMethod::PowerIteration;
  else if (bounds_mode != "auto")
    throw ConfigError("frame-info: bounds must be 'auto', 'exact' or 'estimate'");
  const FrameBounds b = frame_bounds(frame, method);

  json doc = frame_descriptor(frame);
  doc["A"] = b.lower;
  doc["B"] = b.upper;
  doc["boundsMethod"] = method == BoundsMethod::ExactEig ? "exact" : "estimate";
  doc["redundancy"] = frame.redundancy();
  doc["parseval"] = frame.is_parseval();
  // Entry-wise max of D D^H - I; the dense product is skipped for very large frames.
  if (static_cast<double>(frame.rows()) * static_cast<double>(frame.cols()) <= 16.0 * 1024 * 1024)
    doc["parsevalResidual"] = parseval_residual(frame);
  else
    doc["parsevalResidual"] = nullptr;

  if (j.contains("upDelta")) {
    const double delta = get_or(j, "upDelta", 0.0);
    if (!(delta > 0.0 && delta <= 1.0)) throw ConfigError("frame-info: upDelta must lie in (0, 1]");
    const double count = up_support_count(frame.cols(), delta);
    json up = {{"delta", delta}, {"supportCount", count}};
    if (count > kUpEnumerationBudget) {
      up["eta"] = "refused";
    } else {
      const UPCertificate cert = up_check_exhaustive(frame, delta);
      up["eta"] = cert.eta;
      up["supportBudget"] = cert.supportBudget;
    }
    doc["up"] = up;
  }

  const fs::path dir = prepare_output(j);
  write_text(dir / "frame_info.json", doc.dump(2) + "\n");
  report(out, {dir / "frame_info.json"});
  return kOk;
}

ExperimentConfig experiment_from(const Common& c, bool ofdm) {
  const ExperimentConfig cfg = ExperimentConfig::from_json(load_config(c));
  if (ofdm != (cfg.kind == ExperimentKind::OfdmPapr))
    throw ConfigError(std::string("config kind '") + to_string(cfg.kind) + "' does not belong to " +
                      (ofdm ? "ofdm-papr" : "phase-diagram"));
  return cfg;
}

int finish_experiment(const RunSummary& summary, double seconds, const Common& c, std::ostream& out,
                      std::ostream& err) {
  if (c.verbosity > 0) err << "finished in " << seconds << " s\n";
  report(out, summary.files);
  if (!summary.withinBudget) {
    err << json{{"error", "failure-budget"}, {"message", "non-converged trials exceed the failure budget; see manifest.json"}}
               .dump()
        << '\n';
    return kBudgetExceeded;
  }
  return kOk;
}

int cmd_experiment(const Common& c, bool ofdm, std::ostream& out, std::ostream& err) {
  const ExperimentConfig cfg = experiment_from(c, ofdm);
  const auto start = std::chrono::steady_clock::now();
  const RunSummary summary = ofdm ? run_ofdm_papr(cfg, c.threads) : run_phase_diagram(cfg, c.threads);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return finish_experiment(summary, seconds, c, out, err);
}

int cmd_prox_check(const Common& c, std::ostream& out, std::ostream& err) {
  const json j = load_config(c, json{{"schemaVersion", kSchemaVersion}});
  check_keys(j, {"schemaVersion", "seed", "trials", "maxN", "tolerance", "output"}, "prox-check config");
  require_schema(j, "prox-check config");
  const int trials = get_or(j, "trials", 1000);
  const Index max_n = get_or<Index>(j, "maxN", 64);
  const double tolerance = get_or(j, "tolerance", 1e-10);
  if (trials < 1 || max_n < 1) throw ConfigError("prox-check: trials and maxN must be positive");

  Rng rng(get_or<std::uint64_t>(j, "seed", 1));
  double worst = 0.0;
  double worst_tilde = 0.0;
  for (int t = 0; t < trials; ++t) {
    const Index n = 1 + static_cast<Index>(rng.uniform_index(static_cast<std::uint64_t>(max_n)));
    const ComplexVector z = random_complex_normal(rng, n);
    const double tau = 2.0 * rng.uniform() * z.cwiseAbs().sum();
    const ComplexVector moreau = tau > 0.0 ? ComplexVector(z - tau * project_l1_ball(z / tau, 1.0)) : z;
    worst = std::max(worst, (prox_inf(z, tau).u - moreau).cwiseAbs().maxCoeff());
    // Real embedding: the tilde prox is the real prox on (Re z, Im z).
    ComplexVector stacked(2 * n);
    for (Index k = 0; k < n; ++k) {
      stacked(k) = z(k).real();
      stacked(n + k) = z(k).imag();
    }
    const ComplexVector u = prox_inf_tilde(z, tau).u;
    const ComplexVector v = prox_inf(stacked, tau).u;
    for (Index k = 0; k < n; ++k)
      worst_tilde = std::max(worst_tilde, std::abs(u(k) - Complex(v(k).real(), v(n + k).real())));
  }
  const bool pass = worst <= tolerance && worst_tilde <= tolerance;
  const fs::path dir = prepare_output(j);
  const json doc = {{"trials", trials},     {"maxN", max_n},
                    {"tolerance", tolerance}, {"maxAbsErrorInf", worst},
                    {"maxAbsErrorInfTilde", worst_tilde}, {"pass", pass}};
  write_text(dir / "prox_check.json", doc.dump(2) + "\n");
  report(out, {dir / "prox_check.json"});
  if (!pass) {
    err << json{{"error", "prox-check"}, {"maxAbsErrorInf", worst}, {"maxAbsErrorInfTilde", worst_tilde}}.dump()
        << '\n';
    return kBudgetExceeded;
  }
  return kOk;
}

void add_common(CLI::App* sub, Common& c, bool config_required) {
  auto* opt = sub->add_option("config", c.config, "JSON config file");
  if (config_required) opt->required();
  sub->add_option("--set", c.overrides, "Override a config value: dotted.key=value (repeatable)");
  sub->add_option("--out", c.out, "Output directory (replaces the config's 'output')");
  sub->add_option("--threads", c.threads, "Worker threads; 0 uses every core")->check(CLI::NonNegativeNumber);
  sub->add_flag("-v,--verbose", c.verbosity, "Timing and solver diagnostics on stderr");
}

void write_error(std::ostream& err, const std::string& kind, const std::string& message, json extra = {}) {
  json e = {{"error", kind}, {"message", message}};
  if (extra.is_object()) e.update(extra);
  err << e.dump() << '\n';
}

}  // namespace

void apply_override(json& j, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("--set expects key=value, got '" + assignment + "'");
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(text);
  } catch (const json::parse_error&) {
    value = text;
  }
  json* node = &j;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw ConfigError("--set: empty path segment in '" + key + "'");
    if (!node->is_object()) throw ConfigError("--set: '" + key + "' descends into a non-object");
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return;
    }
    node = &(*node)[part];
    if (node->is_null()) *node = json::object();
    start = dot + 1;
  }
}

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Minimum peak-norm (democratic) representations over frames", "demrep"};
  app.require_subcommand(0, 1);
  bool version = false;
  app.add_flag("--version", version, "Print version and build metadata");

  Common solve, info, phase, ofdm, prox;
  auto* s_solve = app.add_subcommand("solve", "Solve one instance and write result.json");
  add_common(s_solve, solve, true);
  auto* s_info = app.add_subcommand("frame-info", "Frame bounds, redundancy, Parseval residual, UP constant");
  add_common(s_info, info, true);
  auto* s_phase = app.add_subcommand("phase-diagram", "Run a phase-ku or phase-papr sweep");
  add_common(s_phase, phase, true);
  auto* s_ofdm = app.add_subcommand("ofdm-papr", "Run the OFDM tone-reservation study");
  add_common(s_ofdm, ofdm, true);
  auto* s_prox = app.add_subcommand("prox-check", "Compare the l-infinity prox with its Moreau form");
  add_common(s_prox, prox, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    write_error(err, "usage", e.what());
    return kInputError;
  }
  if (version) {
    out << "demrep " << kVersion << " (" << kGitDescribe << ")\n";
    return kOk;
  }

  try {
    if (s_solve->parsed()) return cmd_solve(solve, out, err);
    if (s_info->parsed()) return cmd_frame_info(info, out, err);
    if (s_phase->parsed()) return cmd_experiment(phase, false, out, err);
    if (s_ofdm->parsed()) return cmd_experiment(ofdm, true, out, err);
    if (s_prox->parsed()) return cmd_prox_check(prox, out, err);
    write_error(err, "usage", "a subcommand is required; see --help");
    return kInputError;
  } catch (const DimensionError& e) {
    write_error(err, "dimension", e.what(), {{"expected", e.expected()}, {"actual", e.actual()}});
  } catch (const ConfigError& e) {
    write_error(err, "config", e.what());
  } catch (const BudgetError& e) {
    write_error(err, "budget", e.what(), {{"count", e.count()}});
  } catch (const NumericalError& e) {
    write_error(err, "numerical", e.what());
  } catch (const fs::filesystem_error& e) {
    write_error(err, "io", e.what());
  } catch (const std::exception& e) {
    write_error(err, "internal", e.what());
  }
  return kInputError;
}

}  // namespace demrep::cli
