#pragma once

#include <filesystem>
#include <vector>

#include <nlohmann/json.hpp>

#include "demrep/experiments.hpp"

namespace demrep {

/// Config echo, build metadata, wall time and output file names.
nlohmann::json run_manifest(const ExperimentConfig& cfg, double seconds,
                            const std::vector<std::filesystem::path>& files);

}  // namespace demrep
