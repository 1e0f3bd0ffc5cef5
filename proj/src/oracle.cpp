#include "polarcorr/oracle.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <random>
#include <string>

#include "polarcorr/errors.hpp"
#include "polarcorr/parallel.hpp"

namespace polarcorr {

namespace {

void check_epsilon(double epsilon) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) {
    throw DomainError("epsilon must lie in [0,1], got " + std::to_string(epsilon));
  }
}

void check_channels(std::span<const std::uint64_t> channels, std::size_t width) {
  for (std::uint64_t s : channels) {
    if (s >= width) {
      throw DomainError("channel " + std::to_string(s) + " out of range for " + std::to_string(width) + " channels");
    }
  }
}

// Generates 64 independent Bernoulli(epsilon) bits per call, exactly: bit i of
// the result is [U_i < epsilon] for U_i uniform, evaluated digit by digit over
// the (finite) binary expansion of epsilon, least significant digit first.
class BernoulliWords {
 public:
  explicit BernoulliWords(double epsilon) {
    if (epsilon >= 1.0) {
      always_one_ = true;
      return;
    }
    double x = epsilon;
    while (x > 0.0) {
      x *= 2.0;
      const bool bit = x >= 1.0;
      if (bit) x -= 1.0;
      digits_.push_back(bit);
    }
  }

  template <class Gen>
  std::uint64_t operator()(Gen& gen) const {
    if (always_one_) return ~std::uint64_t{0};
    std::uint64_t word = 0;
    for (auto it = digits_.rbegin(); it != digits_.rend(); ++it) {
      const std::uint64_t r = gen();
      word = *it ? (r | word) : (r & word);
    }
    return word;
  }

 private:
  bool always_one_ = false;
  std::vector<bool> digits_;
};

struct ShardCounts {
  std::vector<std::uint64_t> erased;
  std::vector<std::uint64_t> joint;
  std::uint64_t block = 0;
};

Estimate proportion(std::uint64_t count, std::uint64_t trials) {
  const double t = static_cast<double>(trials);
  const double p = static_cast<double>(count) / t;
  return {p, std::sqrt(p * (1.0 - p) / t)};
}

PairEstimate pair_estimate(std::uint64_t s, std::uint64_t t, std::uint64_t count_s, std::uint64_t count_t,
                           std::uint64_t count_st, std::uint64_t trials) {
  const double n = static_cast<double>(trials);
  const double px = static_cast<double>(count_s) / n;
  const double py = static_cast<double>(count_t) / n;
  const double pxy = static_cast<double>(count_st) / n;
  const double cov = pxy - px * py;
  // Empirical 2x2 table: (x, y, probability).
  const double cells[4][3] = {
      {1.0, 1.0, pxy}, {1.0, 0.0, px - pxy}, {0.0, 1.0, py - pxy}, {0.0, 0.0, 1.0 - px - py + pxy}};

  PairEstimate out;
  out.s = s;
  out.t = t;
  double var_cov = 0.0;
  for (const auto& c : cells) {
    const double psi = (c[0] - px) * (c[1] - py) - cov;
    var_cov += c[2] * psi * psi;
  }
  out.cov = {cov, std::sqrt(std::max(var_cov, 0.0) / n)};

  const double vx = px * (1.0 - px);
  const double vy = py * (1.0 - py);
  if (vx > 0.0 && vy > 0.0) {
    const double rho = cov / std::sqrt(vx * vy);
    double var_rho = 0.0;
    for (const auto& c : cells) {
      const double xs = (c[0] - px) / std::sqrt(vx);
      const double ys = (c[1] - py) / std::sqrt(vy);
      const double psi = xs * ys - 0.5 * rho * (xs * xs + ys * ys);
      var_rho += c[2] * psi * psi;
    }
    out.rho = Estimate{rho, std::sqrt(std::max(var_rho, 0.0) / n)};
  }
  return out;
}

}  // namespace

std::vector<std::uint8_t> synthesize(std::span<const std::uint8_t> base) {
  if (base.empty() || !std::has_single_bit(base.size())) {
    throw LengthMismatchError("base pattern length " + std::to_string(base.size()) + " is not a power of two");
  }
  std::vector<std::uint8_t> values(base.begin(), base.end());
  std::vector<std::uint8_t> scratch(values.size());
  synthesize_in_place<std::uint8_t>(values, scratch);
  return values;
}

bool is_nested(std::span<const std::uint8_t> erasures) noexcept {
  for (std::size_t p = 0; 2 * p + 1 < erasures.size(); ++p) {
    if (erasures[2 * p + 1] > erasures[2 * p]) return false;
  }
  return true;
}

double ExactStats::union_probability(std::span<const std::uint64_t> info_set) const {
  check_channels(info_set, dim());
  std::uint64_t target = 0;
  for (std::uint64_t s : info_set) target |= std::uint64_t{1} << s;
  double total = 0.0;
  for (std::size_t mask = 0; mask < outcome.size(); ++mask) {
    if ((mask & target) != 0) total += outcome[mask];
  }
  return total;
}

ExactStats exact_stats(double epsilon, int n, std::optional<std::span<const std::uint64_t>> info_set) {
  check_epsilon(epsilon);
  if (n < 0) throw DomainError("depth must be nonnegative");
  if (n > kMaxExactDepth) {
    throw CapacityError("exact enumeration is limited to depth " + std::to_string(kMaxExactDepth) +
                        "; use Monte Carlo for depth " + std::to_string(n));
  }
  const std::size_t width = std::size_t{1} << n;
  const std::size_t patterns = std::size_t{1} << width;

  std::vector<double> weight(width + 1);
  for (std::size_t w = 0; w <= width; ++w) {
    weight[w] = std::pow(epsilon, static_cast<double>(w)) * std::pow(1.0 - epsilon, static_cast<double>(width - w));
  }

  ExactStats stats;
  stats.epsilon = epsilon;
  stats.n = n;
  stats.outcome.assign(patterns, 0.0);
  std::vector<std::uint8_t> values(width);
  std::vector<std::uint8_t> scratch(width);
  for (std::size_t pattern = 0; pattern < patterns; ++pattern) {
    for (std::size_t i = 0; i < width; ++i) values[i] = static_cast<std::uint8_t>((pattern >> i) & 1U);
    synthesize_in_place<std::uint8_t>(values, scratch);
    std::size_t mask = 0;
    for (std::size_t s = 0; s < width; ++s) mask |= std::size_t{values[s]} << s;
    stats.outcome[mask] += weight[static_cast<std::size_t>(std::popcount(pattern))];
  }

  // Full 2x2 tables per pair; cov = p11 p00 - p10 p01 avoids the cancellation
  // of E[xy] - E[x]E[y] when a Z sits near 0 or 1.
  std::array<std::vector<double>, 4> cell;
  for (auto& c : cell) c.assign(width * width, 0.0);
  for (std::size_t mask = 0; mask < patterns; ++mask) {
    const double p = stats.outcome[mask];
    if (p == 0.0) continue;
    for (std::size_t s = 0; s < width; ++s) {
      const std::size_t row = ((mask >> s) & 1U) << 1;
      for (std::size_t t = 0; t < width; ++t) cell[row | ((mask >> t) & 1U)][s * width + t] += p;
    }
  }
  stats.z.resize(width);
  for (std::size_t s = 0; s < width; ++s) stats.z[s] = cell[3][s * width + s];
  stats.cov.resize(width * width);
  stats.rho.resize(width * width);
  for (std::size_t i = 0; i < width * width; ++i) stats.cov[i] = cell[3][i] * cell[0][i] - cell[2][i] * cell[1][i];
  for (std::size_t s = 0; s < width; ++s) {
    for (std::size_t t = 0; t < width; ++t) {
      const double vs = stats.cov[s * width + s];
      const double vt = stats.cov[t * width + t];
      if (vs > 0.0 && vt > 0.0) stats.rho[s * width + t] = stats.cov[s * width + t] / std::sqrt(vs * vt);
    }
  }
  if (info_set) stats.block_error = stats.union_probability(*info_set);
  return stats;
}

MonteCarloResult monte_carlo(const MonteCarloConfig& config) {
  check_epsilon(config.epsilon);
  if (config.n < 0 || config.n > kMaxSimulationDepth) {
    throw CapacityError("simulation depth must lie in [0, " + std::to_string(kMaxSimulationDepth) + "]");
  }
  if (config.trials < 1) throw DomainError("at least one trial is required");
  const std::size_t width = std::size_t{1} << config.n;
  check_channels(config.info_set, width);
  for (const auto& [s, t] : config.pairs) {
    if (s >= width || t >= width) throw DomainError("pair channel out of range");
  }

  const BernoulliWords draw(config.epsilon);
  const std::size_t pair_count = config.pairs.size();
  std::vector<ShardCounts> shards(kMonteCarloShards);
  parallel_for(kMonteCarloShards, config.workers, [&](std::size_t shard) {
    ShardCounts& counts = shards[shard];
    counts.erased.assign(width, 0);
    counts.joint.assign(pair_count, 0);
    std::uint64_t remaining = config.trials / kMonteCarloShards + (shard < config.trials % kMonteCarloShards ? 1 : 0);

    std::seed_seq seq{static_cast<std::uint32_t>(config.seed), static_cast<std::uint32_t>(config.seed >> 32),
                      static_cast<std::uint32_t>(shard)};
    std::mt19937_64 gen(seq);
    std::vector<std::uint64_t> words(width);
    std::vector<std::uint64_t> scratch(width);
    while (remaining > 0) {
      const std::uint64_t batch = std::min<std::uint64_t>(remaining, 64);
      const std::uint64_t valid = batch == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << batch) - 1;
      remaining -= batch;
      for (auto& w : words) w = draw(gen);
      synthesize_in_place<std::uint64_t>(words, scratch);
      for (auto& w : words) w &= valid;
      for (std::size_t s = 0; s < width; ++s) counts.erased[s] += static_cast<std::uint64_t>(std::popcount(words[s]));
      for (std::size_t i = 0; i < pair_count; ++i) {
        const auto& [s, t] = config.pairs[i];
        counts.joint[i] += static_cast<std::uint64_t>(std::popcount(words[s] & words[t]));
      }
      std::uint64_t any = 0;
      for (std::uint64_t s : config.info_set) any |= words[s];
      counts.block += static_cast<std::uint64_t>(std::popcount(any));
    }
  });

  std::vector<std::uint64_t> erased(width, 0);
  std::vector<std::uint64_t> joint(pair_count, 0);
  std::uint64_t block = 0;
  for (const ShardCounts& counts : shards) {
    for (std::size_t s = 0; s < width; ++s) erased[s] += counts.erased[s];
    for (std::size_t i = 0; i < pair_count; ++i) joint[i] += counts.joint[i];
    block += counts.block;
  }

  MonteCarloResult result;
  result.trials = config.trials;
  result.z.reserve(width);
  for (std::size_t s = 0; s < width; ++s) result.z.push_back(proportion(erased[s], config.trials));
  for (std::size_t i = 0; i < pair_count; ++i) {
    const auto& [s, t] = config.pairs[i];
    result.pairs.push_back(pair_estimate(s, t, erased[s], erased[t], joint[i], config.trials));
  }
  if (!config.info_set.empty()) result.block_error = proportion(block, config.trials);
  return result;
}

}  // namespace polarcorr
