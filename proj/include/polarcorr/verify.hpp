#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "polarcorr/polarize.hpp"

namespace polarcorr {

struct VerificationCheck {
  std::string name;
  bool passed = true;
  // Worst observed deviation (or violation count) and the limit it is held to.
  double observed = 0.0;
  double limit = 0.0;
  std::uint64_t cases = 0;
};

struct VerificationReport {
  std::string mode;
  double epsilon = 0.0;
  int n = 0;
  std::vector<VerificationCheck> checks;

  bool passed() const noexcept;
};

inline constexpr double kExactTolerance = 1e-10;
inline constexpr double kVarianceFloor = 1e-12;
inline constexpr double kSigmaMultiple = 4.0;

/// Compares Z, covariance, rho and the bounds of every constructed code
/// against exact enumeration. Depth is limited to kMaxExactDepth.
VerificationReport verify_exact(double epsilon, int n);

/// `count` distinct unordered pairs s < t, drawn with a generator seeded from
/// `seed`, among channels whose Z lies in [z_low, 1 - z_low]. Returns fewer
/// when not enough such pairs exist.
std::vector<std::pair<std::uint64_t, std::uint64_t>> sample_pairs(const ZTree& tree, std::size_t count,
                                                                  std::uint64_t seed, double z_low = 0.0);

struct MonteCarloVerifyConfig {
  double epsilon = 0.5;
  int n = 0;
  std::uint64_t trials = 0;
  std::uint64_t seed = 1;
  std::size_t info_size = 1;
  std::size_t pair_count = 100;
  int workers = 1;
};

/// Simulation-based check: every Z, the correlation of sampled pairs, and the
/// block error of the constructed code must fall within kSigmaMultiple
/// standard errors of the recursion values (block error: of the interval
/// between the lower bounds and the clamped union bound).
VerificationReport verify_monte_carlo(const MonteCarloVerifyConfig& config);

}  // namespace polarcorr
