#include "polarcorr/index.hpp"

#include <bit>
#include <string>

#include "polarcorr/errors.hpp"

namespace polarcorr {

namespace {

void check_length(int length) {
  if (length < 0 || length > kMaxSignLength) {
    throw DomainError("sign sequence length " + std::to_string(length) + " outside [0, " +
                      std::to_string(kMaxSignLength) + "]");
  }
}

}  // namespace

SignSequence SignSequence::from_index(std::uint64_t index, int length) {
  check_length(length);
  if ((index >> length) != 0) {
    throw DomainError("index " + std::to_string(index) + " does not fit in " + std::to_string(length) + " signs");
  }
  return SignSequence(static_cast<std::uint32_t>(index), length);
}

SignSequence SignSequence::parse(std::string_view text) {
  check_length(static_cast<int>(text.size()));
  std::uint32_t bits = 0;
  for (char c : text) {
    if (c != '+' && c != '-') {
      throw DomainError("sign sequence '" + std::string(text) + "' may only contain '-' and '+'");
    }
    bits = (bits << 1) | (c == '+' ? 1U : 0U);
  }
  return SignSequence(bits, static_cast<int>(text.size()));
}

Sign SignSequence::at(int i) const {
  if (i < 0 || i >= length_) throw DomainError("sign position out of range");
  return ((bits_ >> (length_ - 1 - i)) & 1U) != 0 ? Sign::Plus : Sign::Minus;
}

SignSequence SignSequence::prefix(int k) const {
  if (k < 0 || k > length_) throw DomainError("prefix length out of range");
  return SignSequence(bits_ >> (length_ - k), k);
}

SignSequence SignSequence::extended(Sign s) const {
  check_length(length_ + 1);
  return SignSequence((bits_ << 1) | static_cast<std::uint32_t>(s), length_ + 1);
}

SignSequence SignSequence::negated() const noexcept {
  const std::uint32_t mask = length_ == 0 ? 0U : (~std::uint32_t{0} >> (32 - length_));
  return SignSequence(~bits_ & mask, length_);
}

std::string SignSequence::to_string() const {
  std::string out(static_cast<std::size_t>(length_), '-');
  for (int i = 0; i < length_; ++i) out[static_cast<std::size_t>(i)] = to_char(at(i));
  return out;
}

std::uint64_t to_index(const SignSequence& s) noexcept { return s.index(); }

SignSequence from_index(std::uint64_t index, int length) { return SignSequence::from_index(index, length); }

int common_prefix_len(const SignSequence& s, const SignSequence& t) {
  if (s.size() != t.size()) {
    throw LengthMismatchError("sign sequences of lengths " + std::to_string(s.size()) + " and " +
                              std::to_string(t.size()) + " have no common index space");
  }
  return common_prefix_len(s.index(), t.index(), s.size());
}

int common_prefix_len(std::uint64_t s, std::uint64_t t, int n) noexcept {
  const std::uint64_t diff = s ^ t;
  return n - static_cast<int>(std::bit_width(diff));
}

}  // namespace polarcorr
