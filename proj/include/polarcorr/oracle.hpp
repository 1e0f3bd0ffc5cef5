#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace polarcorr {

/// In-place min/max combining network on 0/1 values or on bit-sliced words
/// (one trial per bit). The first and second halves are the two independent
/// copies feeding the last transform, recursively; the result is in channel
/// index order, with (p-) = max = OR and (p+) = min = AND.
template <class Word>
void synthesize_in_place(std::span<Word> values, std::span<Word> scratch) {
  const std::size_t size = values.size();
  if (size <= 1) return;
  const std::size_t half = size / 2;
  synthesize_in_place(values.first(half), scratch.first(half));
  synthesize_in_place(values.subspan(half), scratch.subspan(half));
  for (std::size_t p = 0; p < half; ++p) {
    const Word left = values[p];
    const Word right = values[half + p];
    scratch[2 * p] = static_cast<Word>(left | right);
    scratch[2 * p + 1] = static_cast<Word>(left & right);
  }
  for (std::size_t i = 0; i < size; ++i) values[i] = scratch[i];
}

/// Erasure indicators E_n(s) of all 2^n synthesized channels for one draw of
/// the 2^n base indicators. Throws LengthMismatchError unless base.size() is a
/// power of two.
std::vector<std::uint8_t> synthesize(std::span<const std::uint8_t> base);

// E(p+) <= E(p-) for every sibling pair of the final level.
bool is_nested(std::span<const std::uint8_t> erasures) noexcept;

// Largest depth handled by exact enumeration (2^16 base patterns).
inline constexpr int kMaxExactDepth = 4;

/// Exact second-order statistics by enumerating every base erasure pattern.
struct ExactStats {
  double epsilon = 0.0;
  int n = 0;
  std::vector<double> z;
  // Row-major 2^n x 2^n.
  std::vector<double> cov;
  // Empty where either variance is zero.
  std::vector<std::optional<double>> rho;
  // Probability of each synthesized erasure pattern, keyed by the bitmask
  // with bit s set iff channel s erases.
  std::vector<double> outcome;
  std::optional<double> block_error;

  std::size_t dim() const noexcept { return z.size(); }
  double cov_at(std::size_t s, std::size_t t) const noexcept { return cov[s * dim() + t]; }
  const std::optional<double>& rho_at(std::size_t s, std::size_t t) const noexcept { return rho[s * dim() + t]; }

  /// P(some channel of A erases).
  double union_probability(std::span<const std::uint64_t> info_set) const;
};

/// Throws CapacityError for n > kMaxExactDepth and DomainError for epsilon
/// outside [0,1]. Fills block_error when info_set is given.
ExactStats exact_stats(double epsilon, int n, std::optional<std::span<const std::uint64_t>> info_set = std::nullopt);

struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
};

struct PairEstimate {
  std::uint64_t s = 0;
  std::uint64_t t = 0;
  Estimate cov;
  // Empty when either sample variance is zero.
  std::optional<Estimate> rho;
};

struct MonteCarloConfig {
  double epsilon = 0.5;
  int n = 0;
  std::uint64_t trials = 0;
  std::uint64_t seed = 0;
  std::vector<std::uint64_t> info_set;
  std::vector<std::pair<std::uint64_t, std::uint64_t>> pairs;
  int workers = 1;
};

struct MonteCarloResult {
  std::uint64_t trials = 0;
  std::vector<Estimate> z;
  std::vector<PairEstimate> pairs;
  std::optional<Estimate> block_error;
};

// Trials are split into this many shards, each with its own generator stream
// derived from (seed, shard); results do not depend on the worker count.
inline constexpr std::size_t kMonteCarloShards = 64;

// Largest depth accepted by monte_carlo (2^n words of state per shard).
inline constexpr int kMaxSimulationDepth = 20;

/// Draws base patterns i.i.d. Bernoulli(epsilon), 64 trials per machine word,
/// and reports sample means with standard errors. Covariance and correlation
/// standard errors use the delta method on the empirical 2x2 table.
MonteCarloResult monte_carlo(const MonteCarloConfig& config);

}  // namespace polarcorr
