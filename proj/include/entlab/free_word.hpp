#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "entlab/errors.hpp"
#include "entlab/limits.hpp"

namespace entlab {

// Reduced word in the free group F_d.
//
// Letters are nonzero signed generator indices in {-d,...,-1,1,...,d}; -i is
// the inverse of generator i. The empty word is the identity. Construction
// checks the reduced-word invariant (no adjacent letter followed by its
// inverse); use mul/parse_word for inputs that still need reduction.
class FreeWord {
 public:
  explicit FreeWord(int rank);
  FreeWord(int rank, std::vector<std::int8_t> letters);

  int rank() const { return rank_; }
  const std::vector<std::int8_t>& letters() const { return letters_; }
  std::size_t length() const { return letters_.size(); }
  bool is_identity() const { return letters_.empty(); }

  // Single-letter word a_i (index in {-d..-1, 1..d}).
  static FreeWord generator(int rank, int index);

  // First letter; word must be nonempty.
  int first_letter() const;

  friend bool operator==(const FreeWord& a, const FreeWord& b) {
    return a.rank_ == b.rank_ && a.letters_ == b.letters_;
  }
  friend bool operator!=(const FreeWord& a, const FreeWord& b) { return !(a == b); }

 private:
  int rank_;
  std::vector<std::int8_t> letters_;
};

// Length-then-lexicographic order; the order used for ball enumeration and
// for deterministic serialization.
bool word_less(const FreeWord& a, const FreeWord& b);

struct WordLess {
  bool operator()(const FreeWord& a, const FreeWord& b) const { return word_less(a, b); }
};

// Product with free reduction (cancellation at the seam only; both inputs
// are already reduced).
FreeWord mul(const FreeWord& a, const FreeWord& b);

FreeWord inverse(const FreeWord& w);

// Identity element of the same group as w.
FreeWord identity_like(const FreeWord& w);

// Number of reduced words of length exactly k: 2d(2d-1)^{k-1}, 1 for k = 0.
// Throws NumericError if the count does not fit in 64 bits.
std::uint64_t sphere_size(int d, int k);

// Number of reduced words of length at most radius.
std::uint64_t ball_size(int d, int radius);

// All reduced words of length <= radius in length-lex order. Throws
// BallCapExceeded if the count would exceed cap.
std::vector<FreeWord> enumerate_ball(int d, int radius,
                                     std::uint64_t cap = kDefaultBallCap);

// Reduced words of length exactly k, lex order.
std::vector<FreeWord> enumerate_sphere(int d, int k,
                                       std::uint64_t cap = kDefaultBallCap);

// Word syntax: dot-separated generator tokens, apostrophe for inverse,
// "e" for the identity. "a1.a2'.a1" is a_1 a_2^{-1} a_1. Input need not be
// reduced; the result is.
FreeWord parse_word(const std::string& text, int rank);

std::string format_word(const FreeWord& w);

}  // namespace entlab

template <>
struct std::hash<entlab::FreeWord> {
  std::size_t operator()(const entlab::FreeWord& w) const noexcept {
    // FNV-1a over rank and letters
    std::uint64_t h = 14695981039346656037ULL;
    auto eat = [&h](std::uint64_t byte) {
      h ^= byte;
      h *= 1099511628211ULL;
    };
    eat(static_cast<std::uint64_t>(w.rank()));
    for (std::int8_t c : w.letters()) eat(static_cast<std::uint8_t>(c));
    return static_cast<std::size_t>(h);
  }
};
