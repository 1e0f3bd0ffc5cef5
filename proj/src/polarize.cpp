#include "polarcorr/polarize.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "polarcorr/errors.hpp"

namespace polarcorr {

namespace {

void check_probability(double p, const char* what) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw DomainError(std::string(what) + " must lie in [0,1], got " + std::to_string(p));
  }
}

double clamp01(double x) noexcept { return std::clamp(x, 0.0, 1.0); }

}  // namespace

ChannelParam::ChannelParam(double epsilon) : epsilon_(epsilon) { check_probability(epsilon, "epsilon"); }

ZStep z_step(double z) {
  check_probability(z, "z");
  return {clamp01(2.0 * z - z * z), clamp01(z * z)};
}

ZTree::ZTree(ChannelParam param, int depth) : epsilon_(param.epsilon()), depth_(depth) {
  if (depth < 0) throw DomainError("tree depth must be nonnegative");
  if (depth > kMaxTreeDepth) {
    throw CapacityError("Z tree of depth " + std::to_string(depth) + " exceeds the limit of " +
                        std::to_string(kMaxTreeDepth));
  }
  const std::size_t nodes = (std::size_t{2} << depth) - 1;
  z_.resize(nodes);
  zbar_.resize(nodes);
  z_[0] = epsilon_;
  zbar_[0] = 1.0 - epsilon_;
  for (int k = 1; k <= depth; ++k) {
    const std::size_t parent = offset(k - 1);
    const std::size_t child = offset(k);
    for (std::size_t p = 0; p < width(k - 1); ++p) {
      const double z = z_[parent + p];
      const double zb = zbar_[parent + p];
      // Z- = z (1 + zbar) = 2z - z^2, and the mirrored products for the complements.
      z_[child + 2 * p] = clamp01(z * (1.0 + zb));
      zbar_[child + 2 * p] = clamp01(zb * zb);
      z_[child + 2 * p + 1] = clamp01(z * z);
      zbar_[child + 2 * p + 1] = clamp01(zb * (1.0 + z));
    }
  }
}

std::span<const double> ZTree::level(int k) const {
  if (k < 0 || k > depth_) throw DomainError("level out of range");
  return std::span<const double>(z_).subspan(offset(k), width(k));
}

std::span<const double> ZTree::level_complement(int k) const {
  if (k < 0 || k > depth_) throw DomainError("level out of range");
  return std::span<const double>(zbar_).subspan(offset(k), width(k));
}

double ZTree::z(const SignSequence& s) const {
  if (s.size() > depth_) throw LengthMismatchError("sign sequence longer than tree depth");
  return z(s.size(), s.index());
}

double ZTree::zbar(const SignSequence& s) const {
  if (s.size() > depth_) throw LengthMismatchError("sign sequence longer than tree depth");
  return zbar(s.size(), s.index());
}

ZTree build_z_tree(ChannelParam param, int n) { return ZTree(param, n); }

}  // namespace polarcorr
