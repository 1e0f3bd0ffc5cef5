#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "polarcorr/index.hpp"
#include "polarcorr/polarize.hpp"

namespace polarcorr {

/// One step of the correlation-coefficient recursion.
///
/// With a = z (sign +) or 1 - z (sign -) for each side, f(a) = sqrt(a / (1 + a))
/// and g(a) = sqrt((1 - a) / (1 + a)):
///   rho' = 2 f(a_s) f(a_t) rho  +  g(a_s) g(a_t) rho^2   (equal signs)
///   rho' = 2 f(a_s) f(a_t) rho  -  g(a_s) g(a_t) rho^2   (different signs)
/// The result is clamped to [0,1]. Throws DomainError on arguments outside [0,1].
double rho_step(double rho_prev, double z_s, double z_t, Sign sign_s, Sign sign_t);

/// One step of the covariance recursion:
///   C' = 2 a_s a_t C +/- C^2  with a as in rho_step and + for equal signs.
double cov_step(double cov_prev, double z_s, double z_t, Sign sign_s, Sign sign_t);

/// rho_n(s,t) by walking the prefix chain from rho_0 = 1. O(n) time.
///
/// This is the definition used throughout the library. It stays finite when
/// Z(s) or Z(t) is 0 or 1, where the moment ratio would be 0/0. Pairs inside
/// a common prefix keep rho = 1 exactly.
double rho_pair(const ZTree& tree, const SignSequence& s, const SignSequence& t);

/// C_n(s,t) by walking the prefix chain from C_0 = eps (1 - eps).
double cov_pair(const ZTree& tree, const SignSequence& s, const SignSequence& t);

// Largest amount a child coefficient may exceed its parent before the
// evaluators raise InvariantViolation.
inline constexpr double kMonotoneTolerance = 1e-9;

/// Per-node factors f(a), g(a) for every child node of a ZTree, shared by the
/// pairwise evaluator and the matrix builder.
class StepFactors {
 public:
  explicit StepFactors(const ZTree& tree);

  int depth() const noexcept { return depth_; }
  // Factors for node c at level k >= 1 (c is the child index, its last sign is c & 1).
  double f(int k, std::uint64_t c) const noexcept { return f_[offset(k) + c]; }
  double g(int k, std::uint64_t c) const noexcept { return g_[offset(k) + c]; }

  double step(int k, std::uint64_t cs, std::uint64_t ct, double rho) const noexcept {
    const double linear = 2.0 * f(k, cs) * f(k, ct) * rho;
    const double quad = g(k, cs) * g(k, ct) * rho * rho;
    return ((cs ^ ct) & 1U) == 0 ? linear + quad : linear - quad;
  }

 private:
  static std::size_t offset(int k) noexcept { return (std::size_t{1} << k) - 2; }

  int depth_;
  std::vector<double> f_;
  std::vector<double> g_;
};

/// Pairwise rho evaluator over packed channel indices; O(n - |cp(s,t)|) per call.
/// Immutable after construction and safe to share between threads.
class PairwiseRho {
 public:
  explicit PairwiseRho(const ZTree& tree);

  int depth() const noexcept { return factors_.depth(); }
  double operator()(std::uint64_t s, std::uint64_t t) const;
  double operator()(const SignSequence& s, const SignSequence& t) const;

  // rho_k of the length-k prefixes of s and t, for k = 0..n.
  std::vector<double> chain(std::uint64_t s, std::uint64_t t) const;

  const StepFactors& factors() const noexcept { return factors_; }

 private:
  StepFactors factors_;
};

/// Symmetric 2^n x 2^n matrix of rho_n values, stored as a row-major upper
/// triangle (including the diagonal).
class CorrelationMatrix {
 public:
  CorrelationMatrix(int n, double epsilon);

  int depth() const noexcept { return n_; }
  double epsilon() const noexcept { return epsilon_; }
  std::size_t dim() const noexcept { return dim_; }

  double operator()(std::size_t i, std::size_t j) const noexcept {
    return i <= j ? tri_[tri_index(i, j)] : tri_[tri_index(j, i)];
  }
  double& at_upper(std::size_t i, std::size_t j) noexcept { return tri_[tri_index(i, j)]; }

  std::span<const double> triangle() const noexcept { return tri_; }

  std::size_t tri_index(std::size_t i, std::size_t j) const noexcept {
    return i * dim_ - i * (i - 1) / 2 - i + j;
  }

 private:
  int n_;
  double epsilon_;
  std::size_t dim_;
  std::vector<double> tri_;
};

// Largest depth accepted by the matrix builder (~1.1 GB triangle at n = 14).
inline constexpr int kMaxMatrixDepth = 14;

using LevelVisitor = std::function<void(int k, const CorrelationMatrix* parent, const CorrelationMatrix& level)>;

/// Builds rho_0, rho_1, ..., rho_n one level at a time (O(4^n) total work),
/// handing each level and its parent to `visit`. Only two levels are alive at
/// once. Throws CapacityError when depth > kMaxMatrixDepth.
void build_rho_levels(const ZTree& tree, int workers, const LevelVisitor& visit);

CorrelationMatrix build_rho_matrix(const ZTree& tree, int workers = 1);

struct PropertyCheck {
  std::string name;
  bool passed = true;
  // Smallest (bound - value) seen; negative beyond tolerance means failure.
  double worst_slack;
  std::uint64_t checked = 0;

  void observe(double slack, double tolerance);
};

struct PropertyReport {
  std::vector<PropertyCheck> checks;

  bool all_passed() const noexcept;
  const PropertyCheck& get(const std::string& name) const;
};

// Names used in PropertyReport.
inline constexpr const char* kCheckSymmetry = "symmetry";
inline constexpr const char* kCheckUnitDiagonal = "unit_diagonal";
inline constexpr const char* kCheckRange = "range";
inline constexpr const char* kCheckOneThird = "off_diagonal_at_most_one_third";
inline constexpr const char* kCheckZRatioBound = "z_ratio_bound";
inline constexpr const char* kCheckCovBound = "covariance_bound";
inline constexpr const char* kCheckMonotone = "monotone_decrease";
inline constexpr const char* kCheckChildAverage = "child_average_two_thirds";
inline constexpr const char* kCheckGrandMean = "grand_mean_two_thirds_pow";

inline constexpr double kPropertyTolerance = 1e-12;

/// Builds every level up to tree.depth() and checks all properties on every
/// entry and parent/child relation.
PropertyReport check_properties(const ZTree& tree, int workers = 1);

/// Same checks restricted to the prefix chains of the given pairs (level-n
/// channel indices). The grand-mean check needs the full matrix and is not
/// evaluated here.
PropertyReport check_properties(const ZTree& tree, std::span<const std::pair<std::uint64_t, std::uint64_t>> pairs);

}  // namespace polarcorr
