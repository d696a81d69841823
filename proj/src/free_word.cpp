#include "entlab/free_word.hpp"

#include <algorithm>
#include <cctype>

namespace entlab {

namespace {

void check_rank(int rank) {
  if (rank < 1 || rank > 120)
    throw ValidationError("free group rank must be in [1, 120], got " +
                          std::to_string(rank));
}

void check_letter(int rank, int letter) {
  if (letter == 0 || letter < -rank || letter > rank)
    throw ValidationError("letter " + std::to_string(letter) +
                          " out of range for rank " + std::to_string(rank));
}

}  // namespace

FreeWord::FreeWord(int rank) : rank_(rank) { check_rank(rank); }

FreeWord::FreeWord(int rank, std::vector<std::int8_t> letters)
    : rank_(rank), letters_(std::move(letters)) {
  check_rank(rank);
  for (std::size_t i = 0; i < letters_.size(); ++i) {
    check_letter(rank_, letters_[i]);
    if (i > 0 && letters_[i] == -letters_[i - 1])
      throw ValidationError("word is not reduced at position " + std::to_string(i));
  }
}

FreeWord FreeWord::generator(int rank, int index) {
  check_rank(rank);
  check_letter(rank, index);
  return FreeWord(rank, {static_cast<std::int8_t>(index)});
}

int FreeWord::first_letter() const {
  if (letters_.empty()) throw ValidationError("identity word has no first letter");
  return letters_.front();
}

bool word_less(const FreeWord& a, const FreeWord& b) {
  if (a.length() != b.length()) return a.length() < b.length();
  return std::lexicographical_compare(a.letters().begin(), a.letters().end(),
                                      b.letters().begin(), b.letters().end());
}

FreeWord mul(const FreeWord& a, const FreeWord& b) {
  if (a.rank() != b.rank())
    throw ValidationError("rank mismatch in free-group product");
  std::vector<std::int8_t> out(a.letters());
  for (std::int8_t c : b.letters()) {
    if (!out.empty() && out.back() == -c)
      out.pop_back();
    else
      out.push_back(c);
  }
  return FreeWord(a.rank(), std::move(out));
}

FreeWord inverse(const FreeWord& w) {
  std::vector<std::int8_t> out(w.letters().rbegin(), w.letters().rend());
  for (auto& c : out) c = static_cast<std::int8_t>(-c);
  return FreeWord(w.rank(), std::move(out));
}

FreeWord identity_like(const FreeWord& w) { return FreeWord(w.rank()); }

std::uint64_t sphere_size(int d, int k) {
  check_rank(d);
  if (k < 0) throw ValidationError("negative sphere radius");
  if (k == 0) return 1;
  unsigned __int128 n = 2 * static_cast<unsigned __int128>(d);
  for (int i = 1; i < k; ++i) {
    n *= static_cast<unsigned __int128>(2 * d - 1);
    if (n > static_cast<unsigned __int128>(UINT64_MAX))
      throw NumericError("sphere size overflows 64 bits");
  }
  return static_cast<std::uint64_t>(n);
}

std::uint64_t ball_size(int d, int radius) {
  std::uint64_t total = 1;
  for (int k = 1; k <= radius; ++k) {
    std::uint64_t s = sphere_size(d, k);
    if (total > UINT64_MAX - s) throw NumericError("ball size overflows 64 bits");
    total += s;
  }
  return total;
}

std::vector<FreeWord> enumerate_ball(int d, int radius, std::uint64_t cap) {
  check_rank(d);
  if (radius < 0) throw ValidationError("negative ball radius");
  std::uint64_t count = ball_size(d, radius);
  if (count > cap)
    throw BallCapExceeded("ball of radius " + std::to_string(radius) + " has " +
                          std::to_string(count) + " words, cap is " +
                          std::to_string(cap));

  // letters in global order -d < ... < -1 < 1 < ... < d
  std::vector<std::int8_t> order;
  for (int i = -d; i <= d; ++i)
    if (i != 0) order.push_back(static_cast<std::int8_t>(i));

  std::vector<FreeWord> out;
  out.reserve(static_cast<std::size_t>(count));
  out.emplace_back(d);
  std::size_t level_begin = 0;
  for (int k = 1; k <= radius; ++k) {
    std::size_t level_end = out.size();
    for (std::size_t idx = level_begin; idx < level_end; ++idx) {
      for (std::int8_t c : order) {
        const auto& parent = out[idx].letters();
        if (!parent.empty() && parent.back() == -c) continue;
        std::vector<std::int8_t> child(parent);
        child.push_back(c);
        out.emplace_back(d, std::move(child));
      }
    }
    level_begin = level_end;
  }
  return out;
}

std::vector<FreeWord> enumerate_sphere(int d, int k, std::uint64_t cap) {
  auto ball = enumerate_ball(d, k, cap);
  std::vector<FreeWord> out;
  out.reserve(static_cast<std::size_t>(sphere_size(d, k)));
  for (auto& w : ball)
    if (static_cast<int>(w.length()) == k) out.push_back(std::move(w));
  return out;
}

FreeWord parse_word(const std::string& text, int rank) {
  check_rank(rank);
  if (text.empty()) throw ValidationError("empty word text");
  if (text == "e") return FreeWord(rank);

  FreeWord acc(rank);
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t dot = text.find('.', pos);
    std::string tok = text.substr(pos, dot == std::string::npos ? dot : dot - pos);
    pos = dot == std::string::npos ? text.size() : dot + 1;
    if (tok.empty()) throw ValidationError("empty token in word '" + text + "'");

    bool inv = false;
    if (tok.back() == '\'') {
      inv = true;
      tok.pop_back();
    }
    if (tok.size() < 2 || tok[0] != 'a')
      throw ValidationError("malformed token '" + tok + "' in word '" + text + "'");
    for (std::size_t i = 1; i < tok.size(); ++i)
      if (!std::isdigit(static_cast<unsigned char>(tok[i])))
        throw ValidationError("malformed token '" + tok + "' in word '" + text + "'");
    int idx = 0;
    try {
      idx = std::stoi(tok.substr(1));
    } catch (...) {
      throw ValidationError("malformed token '" + tok + "' in word '" + text + "'");
    }
    if (idx < 1 || idx > rank)
      throw ValidationError("generator index " + std::to_string(idx) +
                            " out of range for rank " + std::to_string(rank));
    acc = mul(acc, FreeWord::generator(rank, inv ? -idx : idx));
  }
  return acc;
}

std::string format_word(const FreeWord& w) {
  if (w.is_identity()) return "e";
  std::string out;
  for (std::size_t i = 0; i < w.length(); ++i) {
    if (i) out += '.';
    int c = w.letters()[i];
    out += 'a';
    out += std::to_string(c > 0 ? c : -c);
    if (c < 0) out += '\'';
  }
  return out;
}

}  // namespace entlab
