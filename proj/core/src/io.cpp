#include "demrep/io.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

namespace demrep {

namespace fs = std::filesystem;
using nlohmann::json;

void check_keys(const json& j, std::initializer_list<std::string_view> allowed, const std::string& context) {
  if (!j.is_object()) throw ConfigError(context + ": expected a JSON object");
  for (const auto& item : j.items()) {
    bool known = false;
    for (auto a : allowed) known = known || item.key() == a;
    if (!known) throw ConfigError(context + ": unknown key '" + item.key() + "'");
  }
}

namespace {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

void put_f64(std::ostream& os, double v) {
  auto bits = std::bit_cast<std::uint64_t>(v);
  if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
  char buf[8];
  std::memcpy(buf, &bits, 8);
  os.write(buf, 8);
}

double get_f64(const char* p) {
  std::uint64_t bits;
  std::memcpy(&bits, p, 8);
  if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
  return std::bit_cast<double>(bits);
}

std::vector<char> read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path.string() + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Index get_index(const json& j, const std::string& key, const std::string& context) {
  if (!j.contains(key)) throw ConfigError(context + ": missing key '" + key + "'");
  const auto v = get_or<long long>(j, key, 0);
  return static_cast<Index>(v);
}

std::vector<Index> get_indices(const json& j, const std::string& key, const std::string& context) {
  if (!j.contains(key) || !j.at(key).is_array()) throw ConfigError(context + ": '" + key + "' must be an array");
  std::vector<Index> out;
  for (const auto& v : j.at(key)) {
    if (!v.is_number_integer()) throw ConfigError(context + ": '" + key + "' must hold integers");
    out.push_back(v.get<Index>());
  }
  return out;
}

}  // namespace

void write_vector_binary(const fs::path& path, const ComplexVector& v) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  for (Index i = 0; i < v.size(); ++i) {
    put_f64(out, v(i).real());
    put_f64(out, v(i).imag());
  }
  if (!out) throw ConfigError("write failed for '" + path.string() + "'");
}

ComplexVector read_vector_binary(const fs::path& path) {
  const auto bytes = read_bytes(path);
  if (bytes.size() % 16 != 0)
    throw ConfigError("'" + path.string() + "' is not a sequence of complex float64 pairs");
  ComplexVector v(static_cast<Index>(bytes.size() / 16));
  for (Index i = 0; i < v.size(); ++i) {
    const char* p = bytes.data() + 16 * i;
    v(i) = {get_f64(p), get_f64(p + 8)};
  }
  return v;
}

json vector_to_json(const ComplexVector& v) {
  json arr = json::array();
  for (Index i = 0; i < v.size(); ++i) arr.push_back({v(i).real(), v(i).imag()});
  return arr;
}

ComplexVector vector_from_json(const json& j, const std::string& context) {
  if (!j.is_array()) throw ConfigError(context + ": expected an array of [re, im] pairs");
  ComplexVector v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto& e = j[i];
    if (e.is_number()) {
      v(static_cast<Index>(i)) = {e.get<double>(), 0.0};
    } else if (e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number()) {
      v(static_cast<Index>(i)) = {e[0].get<double>(), e[1].get<double>()};
    } else {
      throw ConfigError(context + ": entry " + std::to_string(i) + " is not a number or [re, im] pair");
    }
  }
  return v;
}

json frame_descriptor(const FrameOperator& frame, const std::string& sidecar) {
  const auto& diag = frame.diagnostics();
  json j = {{"kind", to_string(frame.kind())}, {"M", frame.rows()}, {"N", frame.cols()}, {"family", diag.family}};
  if (diag.seed) j["seed"] = *diag.seed;
  if (diag.coherence) j["coherence"] = *diag.coherence;
  if (diag.welchBound) j["welchBound"] = *diag.welchBound;
  if (diag.sweeps > 0) {
    j["sweeps"] = diag.sweeps;
    j["constructionConverged"] = diag.constructionConverged;
  }
  switch (frame.kind()) {
    case FrameKind::Dense:
      if (!sidecar.empty()) j["entries"] = sidecar;
      break;
    case FrameKind::SubsampledDft:
      j["rows"] = frame.row_indices();
      break;
    case FrameKind::OversampledDftToneMap:
      j["baseLength"] = frame.base_length();
      j["factor"] = frame.oversampling();
      j["reserved"] = frame.reserved_tones();
      break;
  }
  return j;
}

void save_frame(const FrameOperator& frame, const fs::path& path) {
  std::string sidecar;
  if (frame.kind() == FrameKind::Dense) {
    sidecar = path.stem().string() + ".bin";
    const ComplexMatrix& d = frame.matrix();
    write_vector_binary(path.parent_path() / sidecar, Eigen::Map<const ComplexVector>(d.data(), d.size()));
  }
  write_text(path, frame_descriptor(frame, sidecar).dump(2) + "\n");
}

FrameOperator load_frame(const fs::path& path) {
  json j;
  try {
    j = json::parse(read_text(path));
  } catch (const json::parse_error& e) {
    throw ConfigError("'" + path.string() + "': " + e.what());
  }
  const std::string ctx = "frame descriptor";
  check_keys(j, {"kind", "M", "N", "family", "seed", "coherence", "welchBound", "sweeps",
                 "constructionConverged", "entries", "rows", "baseLength", "factor", "reserved"},
             ctx);
  FrameDiagnostics diag;
  diag.family = get_or<std::string>(j, "family", "custom");
  if (j.contains("seed")) diag.seed = get_or<std::uint64_t>(j, "seed", 0);
  if (j.contains("coherence")) diag.coherence = get_or<double>(j, "coherence", 0.0);
  if (j.contains("welchBound")) diag.welchBound = get_or<double>(j, "welchBound", 0.0);
  diag.sweeps = get_or<int>(j, "sweeps", 0);
  diag.constructionConverged = get_or<bool>(j, "constructionConverged", true);

  const Index m = get_index(j, "M", ctx);
  const Index n = get_index(j, "N", ctx);
  const auto kind = frame_kind_from_string(get_or<std::string>(j, "kind", ""));
  switch (kind) {
    case FrameKind::Dense: {
      const auto file = get_or<std::string>(j, "entries", "");
      if (file.empty()) throw ConfigError(ctx + ": dense frame needs an 'entries' sidecar");
      const ComplexVector flat = read_vector_binary(path.parent_path() / file);
      require_length("frame sidecar entries", m * n, flat.size());
      return FrameOperator::from_matrix(Eigen::Map<const ComplexMatrix>(flat.data(), m, n), std::move(diag));
    }
    case FrameKind::SubsampledDft: {
      auto f = FrameOperator::subsampled_dft(n, get_indices(j, "rows", ctx), std::move(diag));
      require_length("frame descriptor rows", m, f.rows());
      return f;
    }
    case FrameKind::OversampledDftToneMap: {
      auto f = FrameOperator::oversampled_tone_map(get_index(j, "baseLength", ctx), get_or<int>(j, "factor", 1),
                                                   get_indices(j, "reserved", ctx));
      require_length("frame descriptor rows", m, f.rows());
      return f;
    }
  }
  throw ConfigError(ctx + ": unknown kind");
}

FrameOperator frame_from_spec(const json& spec, const fs::path& base_dir) {
  const std::string ctx = "frame spec";
  if (!spec.is_object()) throw ConfigError(ctx + ": expected an object");
  if (spec.contains("descriptor")) {
    check_keys(spec, {"descriptor"}, ctx);
    fs::path p = get_or<std::string>(spec, "descriptor", "");
    if (p.is_relative()) p = base_dir / p;
    return load_frame(p);
  }
  if (spec.contains("family")) {
    check_keys(spec, {"family", "N", "M", "seed", "iters"}, ctx);
    return build_frame(frame_family_from_string(get_or<std::string>(spec, "family", "")), get_index(spec, "N", ctx),
                       get_index(spec, "M", ctx), get_or<std::uint64_t>(spec, "seed", 1),
                       get_or<int>(spec, "iters", 200));
  }
  const auto kind = get_or<std::string>(spec, "kind", "");
  if (kind == "dense") {
    check_keys(spec, {"kind", "M", "N", "entries"}, ctx);
    const Index m = get_index(spec, "M", ctx);
    const Index n = get_index(spec, "N", ctx);
    if (m < 1 || n < 1) throw ConfigError(ctx + ": M and N must be positive");
    const ComplexVector flat = vector_from_json(spec.value("entries", json::array()), ctx + " entries");
    require_length("frame spec entries", m * n, flat.size());
    ComplexMatrix d(m, n);
    for (Index i = 0; i < m; ++i)
      for (Index k = 0; k < n; ++k) d(i, k) = flat(i * n + k);
    return FrameOperator::from_matrix(std::move(d));
  }
  if (kind == "subsampled-dft") {
    check_keys(spec, {"kind", "N", "rows"}, ctx);
    return FrameOperator::subsampled_dft(get_index(spec, "N", ctx), get_indices(spec, "rows", ctx));
  }
  throw ConfigError(ctx + ": needs 'family', 'kind' (dense | subsampled-dft) or 'descriptor'");
}

SolverConfig solver_config_from_json(const json& j, SolverConfig cfg, std::initializer_list<std::string_view> extra) {
  static constexpr std::string_view kKeys[] = {"epsilon", "tau", "sigma", "maxIters", "tolPrimal", "tolDual",
                                               "tolGap", "adaptive", "norm", "checkEvery", "polishFeasibility",
                                               "entrywiseResidualClip"};
  if (!j.is_object()) throw ConfigError("solver: expected an object");
  for (const auto& item : j.items()) {
    bool known = false;
    for (auto k : kKeys) known = known || item.key() == k;
    for (auto k : extra) known = known || item.key() == k;
    if (!known) throw ConfigError("solver: unknown key '" + item.key() + "'");
  }
  cfg.epsilon = get_or(j, "epsilon", cfg.epsilon);
  cfg.tau = get_or(j, "tau", cfg.tau);
  cfg.sigma = get_or(j, "sigma", cfg.sigma);
  cfg.maxIters = get_or(j, "maxIters", cfg.maxIters);
  cfg.tolPrimal = get_or(j, "tolPrimal", cfg.tolPrimal);
  cfg.tolDual = get_or(j, "tolDual", cfg.tolDual);
  cfg.tolGap = get_or(j, "tolGap", cfg.tolGap);
  cfg.adaptive = get_or(j, "adaptive", cfg.adaptive);
  if (j.contains("norm")) cfg.norm = norm_mode_from_string(get_or<std::string>(j, "norm", ""));
  cfg.checkEvery = get_or(j, "checkEvery", cfg.checkEvery);
  cfg.polishFeasibility = get_or(j, "polishFeasibility", cfg.polishFeasibility);
  cfg.entrywiseResidualClip = get_or(j, "entrywiseResidualClip", cfg.entrywiseResidualClip);
  if (cfg.epsilon < 0.0 || cfg.tau < 0.0 || cfg.sigma < 0.0 || cfg.maxIters < 1 || cfg.checkEvery < 1 ||
      cfg.tolPrimal < 0.0 || cfg.tolDual < 0.0 || cfg.tolGap < 0.0)
    throw ConfigError("solver: negative tolerance/step, or non-positive maxIters/checkEvery");
  return cfg;
}

json solver_config_to_json(const SolverConfig& cfg) {
  return {{"epsilon", cfg.epsilon},
          {"tau", cfg.tau},
          {"sigma", cfg.sigma},
          {"maxIters", cfg.maxIters},
          {"tolPrimal", cfg.tolPrimal},
          {"tolDual", cfg.tolDual},
          {"tolGap", cfg.tolGap},
          {"adaptive", cfg.adaptive},
          {"norm", to_string(cfg.norm)},
          {"checkEvery", cfg.checkEvery},
          {"polishFeasibility", cfg.polishFeasibility},
          {"entrywiseResidualClip", cfg.entrywiseResidualClip}};
}

json result_to_json(const SolverResult& r) {
  return {{"primalObjective", r.primalObjective},
          {"dualObjective", r.dualObjective},
          {"gap", r.gap},
          {"relativeGap", r.relativeGap},
          {"iterations", r.iterations},
          {"residualFeasibility", r.residualFeasibility},
          {"converged", r.converged},
          {"seconds", r.seconds},
          {"tau", r.tau},
          {"sigma", r.sigma},
          {"N", r.x.size()},
          {"M", r.dual.size()}};
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw ConfigError("write failed for '" + path.string() + "'");
}

std::string read_text(const fs::path& path) {
  const auto bytes = read_bytes(path);
  return {bytes.begin(), bytes.end()};
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  for (int precision = 15; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof buf, "%.*g", precision, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

}  // namespace demrep
