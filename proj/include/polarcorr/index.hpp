#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace polarcorr {

enum class Sign : std::uint8_t { Minus = 0, Plus = 1 };

inline constexpr int kMaxSignLength = 30;

inline constexpr Sign flip(Sign s) noexcept { return s == Sign::Plus ? Sign::Minus : Sign::Plus; }
inline constexpr char to_char(Sign s) noexcept { return s == Sign::Plus ? '+' : '-'; }

/// A word s_1 ... s_n over {-,+} naming one of the 2^n synthesized channels.
///
/// Stored packed: s_1 is the most significant of n bits, '+' is 1. The packed
/// word is therefore the channel's integer index, so all-minus is 0 and
/// all-plus is 2^n - 1.
class SignSequence {
 public:
  SignSequence() = default;

  static SignSequence from_index(std::uint64_t index, int length);
  static SignSequence parse(std::string_view text);

  int size() const noexcept { return length_; }
  bool empty() const noexcept { return length_ == 0; }

  // 0-based: at(0) is s_1, the first transform applied.
  Sign at(int i) const;
  Sign back() const { return at(length_ - 1); }

  std::uint64_t index() const noexcept { return bits_; }

  SignSequence prefix(int k) const;
  SignSequence extended(Sign s) const;
  SignSequence negated() const noexcept;

  std::string to_string() const;

  friend bool operator==(const SignSequence&, const SignSequence&) = default;

 private:
  SignSequence(std::uint32_t bits, int length) : bits_(bits), length_(length) {}

  std::uint32_t bits_ = 0;
  int length_ = 0;
};

std::uint64_t to_index(const SignSequence& s) noexcept;
SignSequence from_index(std::uint64_t index, int length);

/// |cp(s,t)|, the length of the longest common prefix. Throws LengthMismatchError
/// if the lengths differ.
int common_prefix_len(const SignSequence& s, const SignSequence& t);

// Same, on packed indices of length n.
int common_prefix_len(std::uint64_t s, std::uint64_t t, int n) noexcept;

// Sign s_{k} (1-based) of the length-n word packed in index.
inline Sign sign_at(std::uint64_t index, int n, int k) noexcept {
  return ((index >> (n - k)) & 1U) != 0 ? Sign::Plus : Sign::Minus;
}

}  // namespace polarcorr
