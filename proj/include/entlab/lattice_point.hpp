#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "entlab/errors.hpp"

namespace entlab {

// Point of the integer lattice Z^k, written additively.
class LatticePoint {
 public:
  explicit LatticePoint(int dim) : coords_(checked_dim(dim), 0) {}
  explicit LatticePoint(std::vector<std::int32_t> coords) : coords_(std::move(coords)) {
    if (coords_.empty() || coords_.size() > 8)
      throw ValidationError("lattice dimension must be in [1, 8]");
  }

  int dim() const { return static_cast<int>(coords_.size()); }
  const std::vector<std::int32_t>& coords() const { return coords_; }
  std::int32_t operator[](int i) const { return coords_[i]; }

  friend bool operator==(const LatticePoint& a, const LatticePoint& b) {
    return a.coords_ == b.coords_;
  }
  friend bool operator!=(const LatticePoint& a, const LatticePoint& b) {
    return !(a == b);
  }
  friend bool operator<(const LatticePoint& a, const LatticePoint& b) {
    return a.coords_ < b.coords_;
  }

 private:
  static std::size_t checked_dim(int dim) {
    if (dim < 1 || dim > 8) throw ValidationError("lattice dimension must be in [1, 8]");
    return static_cast<std::size_t>(dim);
  }
  std::vector<std::int32_t> coords_;
};

inline LatticePoint mul(const LatticePoint& a, const LatticePoint& b) {
  if (a.dim() != b.dim()) throw ValidationError("lattice dimension mismatch");
  std::vector<std::int32_t> out(a.coords());
  for (int i = 0; i < b.dim(); ++i) out[i] += b.coords()[i];
  return LatticePoint(std::move(out));
}

inline LatticePoint inverse(const LatticePoint& a) {
  std::vector<std::int32_t> out(a.coords());
  for (auto& c : out) c = -c;
  return LatticePoint(std::move(out));
}

inline LatticePoint identity_like(const LatticePoint& a) { return LatticePoint(a.dim()); }

inline std::string format_point(const LatticePoint& a) {
  std::string out = "(";
  for (int i = 0; i < a.dim(); ++i) {
    if (i) out += ",";
    out += std::to_string(a.coords()[i]);
  }
  return out + ")";
}

}  // namespace entlab

template <>
struct std::hash<entlab::LatticePoint> {
  std::size_t operator()(const entlab::LatticePoint& p) const noexcept {
    std::uint64_t h = 14695981039346656037ULL;
    for (std::int32_t c : p.coords()) {
      h ^= static_cast<std::uint32_t>(c);
      h *= 1099511628211ULL;
    }
    return static_cast<std::size_t>(h);
  }
};
