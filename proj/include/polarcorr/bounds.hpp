#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "polarcorr/correlation.hpp"
#include "polarcorr/polarize.hpp"

namespace polarcorr {

/// A polar code on BEC(epsilon) of length 2^n with information channels A,
/// kept as sorted, distinct channel indices.
class CodeSpec {
 public:
  CodeSpec(double epsilon, int n, std::vector<std::uint64_t> info_set);

  double epsilon() const noexcept { return epsilon_; }
  int depth() const noexcept { return n_; }
  std::size_t k() const noexcept { return info_set_.size(); }
  double rate() const noexcept;
  std::span<const std::uint64_t> info_set() const noexcept { return info_set_; }

 private:
  double epsilon_;
  int n_;
  std::vector<std::uint64_t> info_set_;
};

/// ceil(2^n * rate); DomainError unless 0 < rate <= 1.
std::size_t info_size_for_rate(int n, double rate);

/// The k channels with the smallest Z_n, ties broken by ascending index.
CodeSpec construct_info_set(const ZTree& tree, std::size_t k);

// Sum of Z_n over A. Not clamped; exceeds 1 for high-rate codes.
double union_bound(const CodeSpec& code, const ZTree& tree);

// max of Z_n over A.
double trivial_lower(const CodeSpec& code, const ZTree& tree);

/// Second-order inclusion-exclusion lower bound
///   sum_A Z - sum_{s<t in A} [ Z_s Z_t + rho(s,t) sqrt(Z_s (1-Z_s) Z_t (1-Z_t)) ],
/// with rho from the pairwise evaluator (no matrix is materialised). The pair
/// space is cut into a fixed number of chunks whose partial sums are combined
/// in order, so the result does not depend on `workers`.
double ie_lower(const CodeSpec& code, const ZTree& tree, int workers = 1);

// Same bound reading rho from a prebuilt matrix.
double ie_lower(const CodeSpec& code, const ZTree& tree, const CorrelationMatrix& rho);

/// Sum of the ceil(N R) smallest Z_n values.
double p_n_r_eps(const ZTree& tree, double rate);

/// (1 - delta) * p_n_r_eps(tree, (1 - delta) rate). Valid as a lower bound
/// only asymptotically; reported, never asserted.
double asymptotic_lower(const ZTree& tree, double rate, double delta);

struct BoundsReport {
  double union_upper = 0.0;
  double trivial_lower = 0.0;
  double ie_lower = 0.0;
  std::optional<double> exact;

  // min(1, union_upper).
  double union_upper_clamped() const noexcept;
  // max(ie_lower, trivial_lower) limited to [0,1].
  double ie_lower_clamped() const noexcept;
};

BoundsReport compute_bounds(const CodeSpec& code, const ZTree& tree, int workers = 1);

}  // namespace polarcorr
