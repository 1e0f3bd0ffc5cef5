#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "polarcorr/index.hpp"

namespace polarcorr {

// Erasure probability of the root BEC.
class ChannelParam {
 public:
  explicit ChannelParam(double epsilon);
  double epsilon() const noexcept { return epsilon_; }

 private:
  double epsilon_;
};

struct ZStep {
  double minus;
  double plus;
};

/// One polar step on a BEC: Z- = 2z - z^2, Z+ = z^2. Throws DomainError
/// unless 0 <= z <= 1.
ZStep z_step(double z);

// Deepest tree accepted by build_z_tree (32 * 2^n bytes of storage).
inline constexpr int kMaxTreeDepth = 26;

/// Erasure probabilities Z_k(p) for every prefix p of length k <= depth.
///
/// Level k holds 2^k entries in index order, so the children of node p at
/// level k are 2p (sign -) and 2p+1 (sign +) at level k+1. Each node also
/// keeps its complement 1 - Z computed through the mirrored recursion
///   1 - Z(p-) = (1 - Z(p))^2,   1 - Z(p+) = (1 - Z(p)) (1 + Z(p)),
/// so both Z and 1 - Z keep full relative precision near 0 and near 1.
class ZTree {
 public:
  ZTree(ChannelParam param, int depth);

  int depth() const noexcept { return depth_; }
  double epsilon() const noexcept { return epsilon_; }
  std::size_t width(int k) const noexcept { return std::size_t{1} << k; }

  std::span<const double> level(int k) const;
  std::span<const double> level_complement(int k) const;

  double z(int k, std::uint64_t p) const noexcept { return z_[offset(k) + p]; }
  double zbar(int k, std::uint64_t p) const noexcept { return zbar_[offset(k) + p]; }

  // Z and 1 - Z of a channel addressed by its sign word (any length <= depth).
  double z(const SignSequence& s) const;
  double zbar(const SignSequence& s) const;

 private:
  static std::size_t offset(int k) noexcept { return (std::size_t{1} << k) - 1; }

  double epsilon_;
  int depth_;
  std::vector<double> z_;
  std::vector<double> zbar_;
};

ZTree build_z_tree(ChannelParam param, int n);

}  // namespace polarcorr
