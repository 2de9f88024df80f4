#pragma once

#include <ostream>
#include <string>

#include <nlohmann/json.hpp>

namespace demrep::cli {

enum ExitCode : int {
  kOk = 0,
  kInputError = 1,
  kIterationCap = 2,
  /// Experiment failure budget exceeded, or prox-check above tolerance.
  kBudgetExceeded = 3,
};

/// Entry point of the `demrep` tool. Result paths go to `out`, one per line;
/// diagnostics and the single-line error JSON go to `err`.
int run(int argc, char** argv, std::ostream& out, std::ostream& err);

/// Sets `dotted.key` in `j` to `value`, parsed as JSON when possible and kept as
/// a string otherwise. Intermediate objects are created as needed.
void apply_override(nlohmann::json& j, const std::string& assignment);

}  // namespace demrep::cli
