#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>

namespace cmaxent::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitThreshold = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitInfeasible = 3;
inline constexpr int kExitUsage = 64;

inline constexpr double kOracleThreshold = 0.02;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string subcommand;                // moments | fit | compare | plot-data | oracle | gen
  std::optional<std::string> in;         // stdin when absent
  std::optional<std::string> out;        // stdout when absent (plot-data requires it)
  std::optional<std::string> direction;  // causal | anticausal | combined (oracle: also both)
  std::string missing = "none";          // none | phi2 | s12
  std::optional<std::string> strategy;   // paper | entropy, only with missing = phi2
  std::size_t grid = 41;
  std::uint64_t seed = 0;
  std::size_t n = 1000;
};

/// Checks flag combinations; throws UsageError.
void validate(const RunConfig& config);

/// Runs one subcommand and returns its exit code. Errors are reported on
/// `err` as a single "error: ..." line.
int run(const RunConfig& config, std::istream& in, std::ostream& out, std::ostream& err);

/// Path of the boundaries JSON written next to the plot-data CSV.
std::string boundaries_path(const std::string& csv_path);

}  // namespace cmaxent::cli
