#pragma once

#include <filesystem>
#include <initializer_list>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "demrep/frames.hpp"
#include "demrep/solvers.hpp"
#include "demrep/types.hpp"

namespace demrep {

/// Rejects keys of `j` outside `allowed` with a ConfigError naming `context`.
void check_keys(const nlohmann::json& j, std::initializer_list<std::string_view> allowed,
                const std::string& context);

/// Typed lookup with a ConfigError naming the key on type mismatch.
template <typename T>
T get_or(const nlohmann::json& j, const std::string& key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError("config key '" + key + "' has the wrong type");
  }
}

/// Interleaved little-endian float64 (re, im) pairs, no header.
void write_vector_binary(const std::filesystem::path& path, const ComplexVector& v);
ComplexVector read_vector_binary(const std::filesystem::path& path);

/// [[re, im], ...] arrays.
nlohmann::json vector_to_json(const ComplexVector& v);
ComplexVector vector_from_json(const nlohmann::json& j, const std::string& context);

/// Descriptor of `frame`. Dense frames reference `sidecar` (relative file name)
/// holding the entries in column-major order.
nlohmann::json frame_descriptor(const FrameOperator& frame, const std::string& sidecar = {});

/// Writes the descriptor to `path` and, for dense frames, the entries next to
/// it as <stem>.bin.
void save_frame(const FrameOperator& frame, const std::filesystem::path& path);
FrameOperator load_frame(const std::filesystem::path& path);

/// Builds a frame from a spec object. Accepted forms:
///   {"family": "gaussian|subsampled-dft|equiangular-parseval", "N", "M", "seed", "iters"?}
///   {"kind": "dense", "M", "N", "entries": [[re, im], ...] row-major}
///   {"kind": "subsampled-dft", "N", "rows": [...]}
///   {"descriptor": "path/to/frame.json"}
/// Relative descriptor paths resolve against `base_dir`.
FrameOperator frame_from_spec(const nlohmann::json& spec, const std::filesystem::path& base_dir = {});

/// Parses solver keys (epsilon, tau, sigma, maxIters, tolPrimal, tolDual,
/// tolGap, adaptive, norm, checkEvery, polishFeasibility, entrywiseResidualClip)
/// on top of `base`. `extra` lists keys the caller handles itself.
SolverConfig solver_config_from_json(const nlohmann::json& j, SolverConfig base = {},
                                     std::initializer_list<std::string_view> extra = {});
nlohmann::json solver_config_to_json(const SolverConfig& cfg);

/// Objective, gap, iterations, residuals, timing and step sizes.
nlohmann::json result_to_json(const SolverResult& result);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

/// Shortest decimal form that parses back to the same double.
std::string format_double(double v);

}  // namespace demrep
