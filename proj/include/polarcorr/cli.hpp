#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace polarcorr::cli {

enum class Command { ZVec, Rho, RhoMatrix, Construct, Bounds, Table, Verify, Simulate };
enum class Format { Csv, Json, Binary };

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitResource = 2,
  kExitVerificationFailed = 3,
};

struct RunConfig {
  Command command = Command::ZVec;
  double epsilon = 0.5;
  int n = 0;
  std::optional<double> rate;
  std::optional<std::uint64_t> k;
  std::vector<double> rates;
  std::string s;
  std::string t;
  bool exact = false;
  std::optional<double> delta;
  std::uint64_t trials = 0;
  std::uint64_t seed = 1;
  std::uint64_t sample_pairs = 0;
  Format format = Format::Csv;
  std::string output;
  int workers = 1;
};

// Throws polarcorr::DomainError with an actionable message on bad combinations.
void validate(const RunConfig& config);

/// Executes one command. Data goes to `out` (or config.output), progress and
/// diagnostics to `err`. Returns one of ExitCode.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

/// Parses argv (flags override an optional `--config` key=value file) and runs.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

// Magic and version of the binary rho-matrix format.
inline constexpr char kRhoMagic[4] = {'P', 'R', 'H', 'O'};
inline constexpr std::uint32_t kRhoFormatVersion = 1;

}  // namespace polarcorr::cli
