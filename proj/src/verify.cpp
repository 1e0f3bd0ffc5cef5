#include "polarcorr/verify.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "polarcorr/bounds.hpp"
#include "polarcorr/correlation.hpp"
#include "polarcorr/oracle.hpp"

namespace polarcorr {

namespace {

VerificationCheck deviation_check(std::string name, double observed, double limit, std::uint64_t cases) {
  return {std::move(name), observed <= limit, observed, limit, cases};
}

VerificationCheck count_check(std::string name, std::uint64_t violations, std::uint64_t cases) {
  return {std::move(name), violations == 0, static_cast<double>(violations), 0.0, cases};
}

// Larger of the empirical and the reference standard error. Either one alone
// collapses when the expected count is O(1): the empirical one after a low
// count, the reference one after a single hit on a channel with Z << 1/T.
double standard_error(const Estimate& e, double reference_variance, double trials) {
  return std::max(e.std_error, std::sqrt(reference_variance / trials));
}

}  // namespace

bool VerificationReport::passed() const noexcept {
  return std::all_of(checks.begin(), checks.end(), [](const VerificationCheck& c) { return c.passed; });
}

VerificationReport verify_exact(double epsilon, int n) {
  const ExactStats exact = exact_stats(epsilon, n);
  const ZTree tree(ChannelParam(epsilon), n);
  const std::size_t width = tree.width(n);

  VerificationReport report{"exact", epsilon, n, {}};

  double z_dev = 0.0;
  for (std::uint64_t s = 0; s < width; ++s) z_dev = std::max(z_dev, std::abs(tree.z(n, s) - exact.z[s]));
  report.checks.push_back(deviation_check("z_vs_enumeration", z_dev, kExactTolerance, width));

  double cov_dev = 0.0;
  double rho_dev = 0.0;
  std::uint64_t rho_cases = 0;
  for (std::uint64_t s = 0; s < width; ++s) {
    for (std::uint64_t t = 0; t < width; ++t) {
      const SignSequence ss = SignSequence::from_index(s, n);
      const SignSequence st = SignSequence::from_index(t, n);
      cov_dev = std::max(cov_dev, std::abs(cov_pair(tree, ss, st) - exact.cov_at(s, t)));
      if (exact.cov_at(s, s) > kVarianceFloor && exact.cov_at(t, t) > kVarianceFloor && exact.rho_at(s, t)) {
        rho_dev = std::max(rho_dev, std::abs(rho_pair(tree, ss, st) - *exact.rho_at(s, t)));
        ++rho_cases;
      }
    }
  }
  report.checks.push_back(deviation_check("cov_vs_enumeration", cov_dev, kExactTolerance, width * width));
  report.checks.push_back(deviation_check("rho_vs_enumeration", rho_dev, kExactTolerance, rho_cases));

  std::uint64_t violations = 0;
  for (std::size_t k = 1; k <= width; ++k) {
    const CodeSpec code = construct_info_set(tree, k);
    const BoundsReport bounds = compute_bounds(code, tree);
    const double p = exact.union_probability(code.info_set());
    const double slack = kExactTolerance;
    if (bounds.trivial_lower > p + slack) ++violations;
    if (bounds.ie_lower > p + slack) ++violations;
    if (p > bounds.union_upper_clamped() + slack) ++violations;
  }
  report.checks.push_back(count_check("bounds_bracket_exact", violations, width));

  double pair_dev = 0.0;
  std::uint64_t pair_cases = 0;
  for (std::uint64_t s = 0; s < width; ++s) {
    for (std::uint64_t t = s + 1; t < width; ++t) {
      const CodeSpec code(epsilon, n, {s, t});
      pair_dev = std::max(pair_dev, std::abs(ie_lower(code, tree) - exact.union_probability(code.info_set())));
      ++pair_cases;
    }
  }
  report.checks.push_back(deviation_check("two_channel_inclusion_exclusion", pair_dev, kExactTolerance, pair_cases));
  return report;
}

std::vector<std::pair<std::uint64_t, std::uint64_t>> sample_pairs(const ZTree& tree, std::size_t count,
                                                                  std::uint64_t seed, double z_low) {
  const int n = tree.depth();
  std::vector<std::uint64_t> candidates;
  for (std::uint64_t s = 0; s < tree.width(n); ++s) {
    if (tree.z(n, s) >= z_low && tree.zbar(n, s) >= z_low) candidates.push_back(s);
  }
  const std::size_t c = candidates.size();
  const std::size_t available = c < 2 ? 0 : c * (c - 1) / 2;
  std::set<std::pair<std::uint64_t, std::uint64_t>> chosen;
  if (count >= available) {
    for (std::size_t i = 0; i < c; ++i) {
      for (std::size_t j = i + 1; j < c; ++j) chosen.emplace(candidates[i], candidates[j]);
    }
  } else {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), 0x70616972U};
    std::mt19937_64 gen(seq);
    while (chosen.size() < count) {
      const std::uint64_t i = candidates[gen() % c];
      const std::uint64_t j = candidates[gen() % c];
      if (i != j) chosen.emplace(std::min(i, j), std::max(i, j));
    }
  }
  return {chosen.begin(), chosen.end()};
}

VerificationReport verify_monte_carlo(const MonteCarloVerifyConfig& config) {
  const ZTree tree(ChannelParam(config.epsilon), config.n);
  const int n = config.n;
  const CodeSpec code = construct_info_set(tree, config.info_size);
  const BoundsReport bounds = compute_bounds(code, tree, config.workers);

  MonteCarloConfig mc;
  mc.epsilon = config.epsilon;
  mc.n = n;
  mc.trials = config.trials;
  mc.seed = config.seed;
  mc.info_set.assign(code.info_set().begin(), code.info_set().end());
  mc.pairs = sample_pairs(tree, config.pair_count, config.seed, 0.01);
  mc.workers = config.workers;
  const MonteCarloResult result = monte_carlo(mc);
  const double trials = static_cast<double>(config.trials);

  VerificationReport report{"monte_carlo", config.epsilon, n, {}};

  std::uint64_t z_violations = 0;
  double z_worst = 0.0;
  for (std::uint64_t s = 0; s < tree.width(n); ++s) {
    const double sigma = standard_error(result.z[s], tree.z(n, s) * tree.zbar(n, s), trials);
    const double dev = std::abs(result.z[s].value - tree.z(n, s));
    if (dev > kSigmaMultiple * sigma + 1e-15) ++z_violations;
    if (sigma > 0.0) z_worst = std::max(z_worst, dev / sigma);
  }
  report.checks.push_back({"z_within_4_sigma", z_violations == 0, z_worst, kSigmaMultiple, tree.width(n)});

  const PairwiseRho rho(tree);
  std::uint64_t rho_violations = 0;
  std::uint64_t rho_cases = 0;
  double rho_worst = 0.0;
  for (const PairEstimate& pair : result.pairs) {
    if (!pair.rho) continue;
    ++rho_cases;
    const double dev = std::abs(pair.rho->value - rho(pair.s, pair.t));
    const double sigma = pair.rho->std_error;
    if (dev > kSigmaMultiple * sigma) ++rho_violations;
    if (sigma > 0.0) rho_worst = std::max(rho_worst, dev / sigma);
  }
  report.checks.push_back({"rho_within_4_sigma", rho_violations == 0, rho_worst, kSigmaMultiple, rho_cases});

  const double low = bounds.ie_lower_clamped();
  const double high = bounds.union_upper_clamped();
  const double sigma = standard_error(*result.block_error,
                                     std::max(low * (1.0 - low), high * (1.0 - high)), trials);
  const double estimate = result.block_error->value;
  double excess = 0.0;
  if (estimate < low) excess = (low - estimate) / sigma;
  if (estimate > high) excess = (estimate - high) / sigma;
  report.checks.push_back(
      {"block_error_within_4_sigma_of_bounds", excess <= kSigmaMultiple, excess, kSigmaMultiple, 1});
  return report;
}

}  // namespace polarcorr
