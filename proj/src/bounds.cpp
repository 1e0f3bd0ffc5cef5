#include "polarcorr/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "polarcorr/errors.hpp"
#include "polarcorr/parallel.hpp"

namespace polarcorr {

namespace {

// Neumaier compensated summation.
class CompensatedSum {
 public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      carry_ += (sum_ - t) + x;
    } else {
      carry_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const noexcept { return sum_ + carry_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

// Fixed partition of the pair space, independent of the worker count.
constexpr std::size_t kPairChunks = 256;

void check_consistent(const CodeSpec& code, const ZTree& tree) {
  if (code.depth() != tree.depth()) {
    throw LengthMismatchError("code of depth " + std::to_string(code.depth()) + " evaluated on a tree of depth " +
                              std::to_string(tree.depth()));
  }
}

template <class RhoFn>
double ie_lower_impl(const CodeSpec& code, const ZTree& tree, int workers, const RhoFn& rho) {
  const int n = tree.depth();
  const auto info = code.info_set();
  const std::size_t k = info.size();
  std::vector<double> z(k);
  std::vector<double> spread(k);  // sqrt(Z (1 - Z))
  CompensatedSum singles;
  for (std::size_t i = 0; i < k; ++i) {
    z[i] = tree.z(n, info[i]);
    spread[i] = std::sqrt(z[i] * tree.zbar(n, info[i]));
    singles.add(z[i]);
  }
  const std::size_t chunks = std::min(kPairChunks, std::max<std::size_t>(k, 1));
  std::vector<double> partial(chunks, 0.0);
  parallel_for(chunks, workers, [&](std::size_t c) {
    CompensatedSum acc;
    for (std::size_t i = c; i < k; i += chunks) {
      for (std::size_t j = i + 1; j < k; ++j) {
        double term = z[i] * z[j];
        const double weight = spread[i] * spread[j];
        if (weight > 0.0) term += rho(info[i], info[j]) * weight;
        acc.add(term);
      }
    }
    partial[c] = acc.value();
  });
  CompensatedSum pairs;
  for (double p : partial) pairs.add(p);
  return singles.value() - pairs.value();
}

}  // namespace

CodeSpec::CodeSpec(double epsilon, int n, std::vector<std::uint64_t> info_set)
    : epsilon_(epsilon), n_(n), info_set_(std::move(info_set)) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw DomainError("epsilon must lie in [0,1]");
  if (n < 0 || n > kMaxSignLength) throw DomainError("code depth out of range");
  if (info_set_.empty()) throw DomainError("information set must not be empty");
  std::sort(info_set_.begin(), info_set_.end());
  if (std::adjacent_find(info_set_.begin(), info_set_.end()) != info_set_.end()) {
    throw DomainError("information set contains duplicate channels");
  }
  if ((info_set_.back() >> n) != 0) {
    throw DomainError("information channel " + std::to_string(info_set_.back()) + " does not exist at depth " +
                      std::to_string(n));
  }
}

double CodeSpec::rate() const noexcept { return std::ldexp(static_cast<double>(k()), -n_); }

std::size_t info_size_for_rate(int n, double rate) {
  if (!(rate > 0.0 && rate <= 1.0)) throw DomainError("rate must lie in (0,1], got " + std::to_string(rate));
  // N R is exact: N is a power of two.
  return static_cast<std::size_t>(std::ceil(std::ldexp(rate, n)));
}

CodeSpec construct_info_set(const ZTree& tree, std::size_t k) {
  const int n = tree.depth();
  const std::size_t width = tree.width(n);
  if (k < 1 || k > width) {
    throw DomainError("information set size " + std::to_string(k) + " outside [1, " + std::to_string(width) + "]");
  }
  std::vector<std::uint64_t> order(width);
  std::iota(order.begin(), order.end(), std::uint64_t{0});
  const auto z = tree.level(n);
  const auto zbar = tree.level_complement(n);
  auto better = [&](std::uint64_t a, std::uint64_t b) {
    if (z[a] != z[b]) return z[a] < z[b];
    if (zbar[a] != zbar[b]) return zbar[a] > zbar[b];
    return a < b;
  };
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(), better);
  order.resize(k);
  return CodeSpec(tree.epsilon(), n, std::move(order));
}

double union_bound(const CodeSpec& code, const ZTree& tree) {
  check_consistent(code, tree);
  CompensatedSum sum;
  for (std::uint64_t s : code.info_set()) sum.add(tree.z(tree.depth(), s));
  return sum.value();
}

double trivial_lower(const CodeSpec& code, const ZTree& tree) {
  check_consistent(code, tree);
  double best = 0.0;
  for (std::uint64_t s : code.info_set()) best = std::max(best, tree.z(tree.depth(), s));
  return best;
}

double ie_lower(const CodeSpec& code, const ZTree& tree, int workers) {
  check_consistent(code, tree);
  const PairwiseRho rho(tree);
  return ie_lower_impl(code, tree, workers, rho);
}

double ie_lower(const CodeSpec& code, const ZTree& tree, const CorrelationMatrix& rho) {
  check_consistent(code, tree);
  if (rho.depth() != tree.depth()) throw LengthMismatchError("correlation matrix depth differs from the tree");
  return ie_lower_impl(code, tree, 1, [&](std::uint64_t s, std::uint64_t t) { return rho(s, t); });
}

double p_n_r_eps(const ZTree& tree, double rate) {
  const CodeSpec best = construct_info_set(tree, info_size_for_rate(tree.depth(), rate));
  return union_bound(best, tree);
}

double asymptotic_lower(const ZTree& tree, double rate, double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw DomainError("delta must lie in (0,1)");
  return (1.0 - delta) * p_n_r_eps(tree, (1.0 - delta) * rate);
}

double BoundsReport::union_upper_clamped() const noexcept { return std::min(1.0, union_upper); }

// The best valid lower bound: inclusion-exclusion can fall below max Z at high rates.
double BoundsReport::ie_lower_clamped() const noexcept {
  return std::clamp(std::max(ie_lower, trivial_lower), 0.0, 1.0);
}

BoundsReport compute_bounds(const CodeSpec& code, const ZTree& tree, int workers) {
  BoundsReport report;
  report.union_upper = union_bound(code, tree);
  report.trivial_lower = trivial_lower(code, tree);
  report.ie_lower = ie_lower(code, tree, workers);
  return report;
}

}  // namespace polarcorr
