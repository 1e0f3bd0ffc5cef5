#include "polarcorr/correlation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>

#include "polarcorr/errors.hpp"
#include "polarcorr/parallel.hpp"

namespace polarcorr {

namespace {

void check_unit(double x, const char* what) {
  if (!(x >= 0.0 && x <= 1.0)) {
    throw DomainError(std::string(what) + " must lie in [0,1], got " + std::to_string(x));
  }
}

double clamp01(double x) noexcept { return std::clamp(x, 0.0, 1.0); }

struct Oriented {
  double a;     // z for sign +, 1 - z for sign -
  double abar;  // 1 - a
};

Oriented orient(double z, double zbar, Sign sign) noexcept {
  return sign == Sign::Plus ? Oriented{z, zbar} : Oriented{zbar, z};
}

double rho_step_oriented(double rho, Oriented s, Oriented t, bool same_sign) noexcept {
  const double fs = std::sqrt(s.a / (1.0 + s.a));
  const double ft = std::sqrt(t.a / (1.0 + t.a));
  const double gs = std::sqrt(s.abar / (1.0 + s.a));
  const double gt = std::sqrt(t.abar / (1.0 + t.a));
  const double linear = 2.0 * fs * ft * rho;
  const double quad = gs * gt * rho * rho;
  return clamp01(same_sign ? linear + quad : linear - quad);
}

double cov_step_oriented(double cov, Oriented s, Oriented t, bool same_sign) noexcept {
  const double linear = 2.0 * s.a * t.a * cov;
  const double quad = cov * cov;
  return std::max(0.0, same_sign ? linear + quad : linear - quad);
}

void check_pair(const ZTree& tree, const SignSequence& s, const SignSequence& t) {
  if (s.size() != t.size()) {
    throw LengthMismatchError("rho/cov of sign sequences with lengths " + std::to_string(s.size()) + " and " +
                              std::to_string(t.size()));
  }
  if (s.size() > tree.depth()) {
    throw LengthMismatchError("sign sequence of length " + std::to_string(s.size()) + " is deeper than the tree (" +
                              std::to_string(tree.depth()) + ")");
  }
}

void monotone_guard(double child, double parent) {
  if (child > parent + kMonotoneTolerance) {
    throw InvariantViolation("correlation increased from " + std::to_string(parent) + " to " + std::to_string(child));
  }
}

// Child coefficient under the builder's conventions: identical channels are 1.
double child_rho(const StepFactors& factors, int k, std::uint64_t cs, std::uint64_t ct, double parent) noexcept {
  if (cs == ct) return 1.0;
  return clamp01(factors.step(k, cs, ct, parent));
}

}  // namespace

double rho_step(double rho_prev, double z_s, double z_t, Sign sign_s, Sign sign_t) {
  check_unit(rho_prev, "rho");
  check_unit(z_s, "z_s");
  check_unit(z_t, "z_t");
  return rho_step_oriented(rho_prev, orient(z_s, 1.0 - z_s, sign_s), orient(z_t, 1.0 - z_t, sign_t),
                           sign_s == sign_t);
}

double cov_step(double cov_prev, double z_s, double z_t, Sign sign_s, Sign sign_t) {
  check_unit(z_s, "z_s");
  check_unit(z_t, "z_t");
  if (!(cov_prev >= 0.0 && cov_prev <= 0.25)) {
    throw DomainError("covariance of two indicators must lie in [0, 1/4], got " + std::to_string(cov_prev));
  }
  return cov_step_oriented(cov_prev, orient(z_s, 1.0 - z_s, sign_s), orient(z_t, 1.0 - z_t, sign_t),
                           sign_s == sign_t);
}

double rho_pair(const ZTree& tree, const SignSequence& s, const SignSequence& t) {
  check_pair(tree, s, t);
  const int n = s.size();
  const int m = common_prefix_len(s, t);
  double rho = 1.0;
  for (int k = m + 1; k <= n; ++k) {
    const std::uint64_t ps = s.index() >> (n - k + 1);
    const std::uint64_t pt = t.index() >> (n - k + 1);
    const Sign ss = sign_at(s.index(), n, k);
    const Sign st = sign_at(t.index(), n, k);
    const double next = rho_step_oriented(rho, orient(tree.z(k - 1, ps), tree.zbar(k - 1, ps), ss),
                                          orient(tree.z(k - 1, pt), tree.zbar(k - 1, pt), st), ss == st);
    monotone_guard(next, rho);
    rho = next;
  }
  return rho;
}

double cov_pair(const ZTree& tree, const SignSequence& s, const SignSequence& t) {
  check_pair(tree, s, t);
  const int n = s.size();
  double cov = tree.z(0, 0) * tree.zbar(0, 0);
  for (int k = 1; k <= n; ++k) {
    const std::uint64_t ps = s.index() >> (n - k + 1);
    const std::uint64_t pt = t.index() >> (n - k + 1);
    const Sign ss = sign_at(s.index(), n, k);
    const Sign st = sign_at(t.index(), n, k);
    cov = cov_step_oriented(cov, orient(tree.z(k - 1, ps), tree.zbar(k - 1, ps), ss),
                            orient(tree.z(k - 1, pt), tree.zbar(k - 1, pt), st), ss == st);
  }
  return cov;
}

StepFactors::StepFactors(const ZTree& tree) : depth_(tree.depth()) {
  const std::size_t nodes = depth_ == 0 ? 0 : (std::size_t{2} << depth_) - 2;
  f_.resize(nodes);
  g_.resize(nodes);
  for (int k = 1; k <= depth_; ++k) {
    for (std::uint64_t c = 0; c < tree.width(k); ++c) {
      const std::uint64_t p = c >> 1;
      const Oriented o = orient(tree.z(k - 1, p), tree.zbar(k - 1, p), (c & 1U) != 0 ? Sign::Plus : Sign::Minus);
      f_[offset(k) + c] = std::sqrt(o.a / (1.0 + o.a));
      g_[offset(k) + c] = std::sqrt(o.abar / (1.0 + o.a));
    }
  }
}

PairwiseRho::PairwiseRho(const ZTree& tree) : factors_(tree) {}

double PairwiseRho::operator()(std::uint64_t s, std::uint64_t t) const {
  const int n = depth();
  if ((s >> n) != 0 || (t >> n) != 0) throw DomainError("channel index out of range for depth " + std::to_string(n));
  double rho = 1.0;
  for (int k = common_prefix_len(s, t, n) + 1; k <= n && rho > 0.0; ++k) {
    const double next = clamp01(factors_.step(k, s >> (n - k), t >> (n - k), rho));
    monotone_guard(next, rho);
    rho = next;
  }
  return rho;
}

double PairwiseRho::operator()(const SignSequence& s, const SignSequence& t) const {
  if (s.size() != t.size() || s.size() != depth()) {
    throw LengthMismatchError("pairwise evaluator expects two sign sequences of length " + std::to_string(depth()));
  }
  return (*this)(s.index(), t.index());
}

std::vector<double> PairwiseRho::chain(std::uint64_t s, std::uint64_t t) const {
  const int n = depth();
  if ((s >> n) != 0 || (t >> n) != 0) throw DomainError("channel index out of range for depth " + std::to_string(n));
  std::vector<double> out(static_cast<std::size_t>(n) + 1, 1.0);
  for (int k = 1; k <= n; ++k) {
    const double parent = out[static_cast<std::size_t>(k - 1)];
    const double next = child_rho(factors_, k, s >> (n - k), t >> (n - k), parent);
    monotone_guard(next, parent);
    out[static_cast<std::size_t>(k)] = next;
  }
  return out;
}

CorrelationMatrix::CorrelationMatrix(int n, double epsilon)
    : n_(n), epsilon_(epsilon), dim_(std::size_t{1} << n), tri_(dim_ * (dim_ + 1) / 2, 0.0) {}

void build_rho_levels(const ZTree& tree, int workers, const LevelVisitor& visit) {
  const int n = tree.depth();
  if (n > kMaxMatrixDepth) {
    throw CapacityError("full correlation matrix at depth " + std::to_string(n) + " exceeds the limit of " +
                        std::to_string(kMaxMatrixDepth) + "; use the pairwise evaluator");
  }
  const StepFactors factors(tree);
  CorrelationMatrix current(0, tree.epsilon());
  current.at_upper(0, 0) = 1.0;
  visit(0, nullptr, current);
  for (int k = 1; k <= n; ++k) {
    CorrelationMatrix next(k, tree.epsilon());
    const std::size_t parents = current.dim();
    parallel_for(parents, workers, [&](std::size_t p) {
      for (std::size_t q = p; q < parents; ++q) {
        const double r = current(p, q);
        for (std::uint64_t a = 0; a < 2; ++a) {
          for (std::uint64_t b = 0; b < 2; ++b) {
            const std::uint64_t cs = 2 * p + a;
            const std::uint64_t ct = 2 * q + b;
            if (cs > ct) continue;
            const double child = child_rho(factors, k, cs, ct, r);
            monotone_guard(child, r);
            next.at_upper(cs, ct) = child;
          }
        }
      }
    });
    visit(k, &current, next);
    current = std::move(next);
  }
}

CorrelationMatrix build_rho_matrix(const ZTree& tree, int workers) {
  CorrelationMatrix result(0, tree.epsilon());
  build_rho_levels(tree, workers, [&](int k, const CorrelationMatrix*, const CorrelationMatrix& level) {
    if (k == tree.depth()) result = level;
  });
  return result;
}

void PropertyCheck::observe(double slack, double tolerance) {
  ++checked;
  worst_slack = std::min(worst_slack, slack);
  if (!(slack >= -tolerance)) passed = false;
}

bool PropertyReport::all_passed() const noexcept {
  return std::all_of(checks.begin(), checks.end(), [](const PropertyCheck& c) { return c.passed; });
}

const PropertyCheck& PropertyReport::get(const std::string& name) const {
  for (const auto& c : checks) {
    if (c.name == name) return c;
  }
  throw std::out_of_range("no property check named " + name);
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

enum CheckId { kSymmetry, kUnitDiagonal, kRange, kOneThird, kZRatio, kCovBound, kMonotone, kChildAverage, kGrandMean, kCheckCount };

struct Checks {
  std::array<PropertyCheck, kCheckCount> items{{
      {kCheckSymmetry, true, kInf, 0},
      {kCheckUnitDiagonal, true, kInf, 0},
      {kCheckRange, true, kInf, 0},
      {kCheckOneThird, true, kInf, 0},
      {kCheckZRatioBound, true, kInf, 0},
      {kCheckCovBound, true, kInf, 0},
      {kCheckMonotone, true, kInf, 0},
      {kCheckChildAverage, true, kInf, 0},
      {kCheckGrandMean, true, kInf, 0},
  }};

  PropertyCheck& operator[](CheckId id) { return items[id]; }

  void merge(const Checks& other) {
    for (std::size_t i = 0; i < items.size(); ++i) {
      items[i].checked += other.items[i].checked;
      items[i].worst_slack = std::min(items[i].worst_slack, other.items[i].worst_slack);
      items[i].passed = items[i].passed && other.items[i].passed;
    }
  }

  PropertyReport report() const { return PropertyReport{{items.begin(), items.end()}}; }

  // Checks on a single entry rho_k(i, j) with its channel statistics.
  void entry(const ZTree& tree, int k, std::uint64_t i, std::uint64_t j, double rho) {
    (*this)[kRange].observe(std::min(rho, 1.0 - rho), kPropertyTolerance);
    if (i == j) {
      (*this)[kUnitDiagonal].observe(-std::abs(rho - 1.0), kPropertyTolerance);
      return;
    }
    (*this)[kOneThird].observe(1.0 / 3.0 - rho, kPropertyTolerance);
    const double zi = tree.z(k, i);
    const double zbi = tree.zbar(k, i);
    const double zj = tree.z(k, j);
    const double zbj = tree.zbar(k, j);
    if (zi > 0.0 && zbi > 0.0 && zj > 0.0 && zbj > 0.0) {
      const double log_ratio = 0.5 * (std::log(zbi) + std::log(zj) - std::log(zi) - std::log(zbj));
      (*this)[kZRatio].observe(std::exp(-std::abs(log_ratio)) - rho, kPropertyTolerance);
    }
    const double cov = rho * std::sqrt(zi * zbi) * std::sqrt(zj * zbj);
    (*this)[kCovBound].observe(std::min(zbi * zj, zi * zbj) - cov, kPropertyTolerance);
  }

  // Parent -> children relations for the parent pair (p, q).
  void family(const StepFactors& factors, int k, std::uint64_t p, std::uint64_t q, double parent,
              const CorrelationMatrix* stored) {
    double sum = 0.0;
    for (std::uint64_t a = 0; a < 2; ++a) {
      for (std::uint64_t b = 0; b < 2; ++b) {
        const std::uint64_t cs = 2 * p + a;
        const std::uint64_t ct = 2 * q + b;
        const double child = stored != nullptr ? (*stored)(cs, ct) : child_rho(factors, k, cs, ct, parent);
        const double transposed = child_rho(factors, k, ct, cs, parent);
        (*this)[kSymmetry].observe(-std::abs(child - transposed), 0.0);
        (*this)[kMonotone].observe(parent - child, kPropertyTolerance);
        sum += child;
      }
    }
    (*this)[kChildAverage].observe(2.0 / 3.0 * parent - 0.25 * sum, kPropertyTolerance);
  }
};

}  // namespace

PropertyReport check_properties(const ZTree& tree, int workers) {
  const StepFactors factors(tree);
  Checks total;
  build_rho_levels(tree, workers, [&](int k, const CorrelationMatrix* parent, const CorrelationMatrix& level) {
    const std::size_t dim = level.dim();
    if (parent == nullptr) {
      total.entry(tree, 0, 0, 0, level(0, 0));
      total[kGrandMean].observe(1.0 - level(0, 0), kPropertyTolerance);
      return;
    }
    const std::size_t parents = parent->dim();
    std::vector<Checks> partial(parents);
    std::vector<double> row_sums(parents, 0.0);
    parallel_for(parents, workers, [&](std::size_t p) {
      Checks& local = partial[p];
      double sum = 0.0;
      for (std::size_t i = 2 * p; i < 2 * p + 2; ++i) {
        for (std::size_t j = i; j < dim; ++j) {
          const double v = level(i, j);
          local.entry(tree, k, i, j, v);
          sum += i == j ? v : 2.0 * v;
        }
      }
      row_sums[p] = sum;
      for (std::size_t q = p; q < parents; ++q) local.family(factors, k, p, q, (*parent)(p, q), &level);
    });
    double grand = 0.0;
    for (std::size_t p = 0; p < parents; ++p) {
      total.merge(partial[p]);
      grand += row_sums[p];
    }
    const double mean = grand / (static_cast<double>(dim) * static_cast<double>(dim));
    total[kGrandMean].observe(std::pow(2.0 / 3.0, k) - mean, kPropertyTolerance);
  });
  return total.report();
}

PropertyReport check_properties(const ZTree& tree, std::span<const std::pair<std::uint64_t, std::uint64_t>> pairs) {
  const PairwiseRho rho(tree);
  const int n = tree.depth();
  Checks total;
  for (const auto& [s, t] : pairs) {
    const std::vector<double> chain = rho.chain(s, t);
    for (int k = 0; k <= n; ++k) {
      const std::uint64_t ps = s >> (n - k);
      const std::uint64_t pt = t >> (n - k);
      const double r = chain[static_cast<std::size_t>(k)];
      total.entry(tree, k, ps, pt, r);
      if (k >= 1) {
        total.family(rho.factors(), k, ps >> 1, pt >> 1, chain[static_cast<std::size_t>(k - 1)], nullptr);
      }
    }
    total[kSymmetry].observe(-std::abs(rho(s, t) - rho(t, s)), 0.0);
  }
  return total.report();
}

}  // namespace polarcorr
