#pragma once

#include <cmath>
#include <cstdint>
#include <unordered_map>
#include <utility>
#include <vector>

#include "entlab/errors.hpp"
#include "entlab/limits.hpp"

namespace entlab {

// Masses below this threshold are dropped by convolution; the induced
// additive error is bounded by (dropped count) * 1e-300 and is far below
// every tolerance used anywhere in this project.
inline constexpr double kDropMass = 1e-300;

inline constexpr double kProbabilityTol = 1e-12;

// Finitely supported nonnegative measure on a discrete group. G must supply
// mul(G,G), inverse(G), identity_like(G), operator== and std::hash.
// Entries with zero mass are never stored, so the key set is the support.
template <class G>
class SparseMeasure {
 public:
  using Map = std::unordered_map<G, double>;

  SparseMeasure() = default;

  static SparseMeasure dirac(const G& g) {
    SparseMeasure m;
    m.add(g, 1.0);
    return m;
  }

  void add(const G& g, double mass) {
    if (!(mass >= 0.0))
      throw ValidationError("measure mass must be nonnegative and finite");
    if (mass == 0.0) return;
    total_ += mass;
    entries_[g] += mass;
  }

  double mass(const G& g) const {
    auto it = entries_.find(g);
    return it == entries_.end() ? 0.0 : it->second;
  }

  bool contains(const G& g) const { return entries_.count(g) != 0; }
  double total() const { return total_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const Map& entries() const { return entries_; }

  bool is_probability(double tol = kProbabilityTol) const {
    return std::abs(total_ - 1.0) <= tol;
  }

  SparseMeasure normalized() const {
    if (!(total_ > 0)) throw ValidationError("cannot normalize a zero measure");
    SparseMeasure out;
    out.entries_ = entries_;
    for (auto& [g, m] : out.entries_) m /= total_;
    out.total_ = 1.0;
    return out;
  }

  void scale(double c) {
    if (!(c >= 0.0)) throw ValidationError("scale factor must be nonnegative");
    for (auto& [g, m] : entries_) m *= c;
    total_ *= c;
  }

  // pointwise sum
  void accumulate(const SparseMeasure& other, double weight = 1.0) {
    for (const auto& [g, m] : other.entries_) add(g, m * weight);
  }

 private:
  Map entries_;
  double total_ = 0.0;
};

// Convolution (a*b)(x) = sum_g a(g) b(g^{-1} x). The outer loop runs over
// the smaller support. Product masses below kDropMass are dropped. Throws
// BallCapExceeded if the result support would exceed cap.
template <class G>
SparseMeasure<G> convolve(const SparseMeasure<G>& a, const SparseMeasure<G>& b,
                          std::uint64_t cap = kDefaultBallCap) {
  const bool a_small = a.size() <= b.size();
  const SparseMeasure<G>& outer = a_small ? a : b;
  const SparseMeasure<G>& inner = a_small ? b : a;
  SparseMeasure<G> out;
  for (const auto& [g, mg] : outer.entries()) {
    for (const auto& [h, mh] : inner.entries()) {
      double m = mg * mh;
      if (m < kDropMass) continue;
      // group is not assumed abelian: keep operand order a then b
      out.add(a_small ? mul(g, h) : mul(h, g), m);
      if (out.size() > cap)
        throw BallCapExceeded("convolution support exceeds cap of " +
                              std::to_string(cap));
    }
  }
  return out;
}

// n-fold convolution power; n = 0 gives the point mass at the identity.
template <class G>
SparseMeasure<G> convolve_power(const SparseMeasure<G>& mu, int n,
                                std::uint64_t cap = kDefaultBallCap) {
  if (n < 0) throw ValidationError("negative convolution power");
  if (mu.empty()) throw ValidationError("convolution power of an empty measure");
  SparseMeasure<G> acc = SparseMeasure<G>::dirac(identity_like(mu.entries().begin()->first));
  for (int i = 0; i < n; ++i) acc = convolve(acc, mu, cap);
  return acc;
}

// Smallest N >= 0 with a^{N+1} <= eps.
inline int abel_truncation_index(double a, double eps) {
  if (!(a > 0.0 && a < 1.0)) throw ValidationError("abel parameter must be in (0,1)");
  if (!(eps > 0.0 && eps < 1.0)) throw ValidationError("abel tail eps must be in (0,1)");
  int n = static_cast<int>(std::ceil(std::log(eps) / std::log(a))) - 1;
  if (n < 0) n = 0;
  // correct off-by-one from rounding at the boundary
  while (std::pow(a, n + 1) > eps) ++n;
  while (n > 0 && std::pow(a, n) <= eps) --n;
  return n;
}

template <class G>
struct AbelTruncation {
  SparseMeasure<G> measure;  // (1-a) sum_{n<=N} a^n mu^{*n}
  int n_terms = 0;           // N
  double tail_bound = 0;     // a^{N+1} <= eps
};

// Truncated Abel sum (1-a) sum_{n=0}^{N} a^n mu^{*n} with N minimal such
// that the dropped tail mass a^{N+1} is at most eps.
template <class G>
AbelTruncation<G> abel_sum_truncated(const SparseMeasure<G>& mu, double a,
                                     double eps,
                                     std::uint64_t cap = kDefaultBallCap) {
  if (!mu.is_probability())
    throw ValidationError("abel sum requires a probability measure");
  const int N = abel_truncation_index(a, eps);

  AbelTruncation<G> out;
  out.n_terms = N;
  out.tail_bound = std::pow(a, N + 1);
  SparseMeasure<G> power =
      SparseMeasure<G>::dirac(identity_like(mu.entries().begin()->first));
  double coeff = 1.0 - a;
  out.measure.accumulate(power, coeff);
  for (int n = 1; n <= N; ++n) {
    power = convolve(power, mu, cap);
    coeff *= a;
    out.measure.accumulate(power, coeff);
  }
  return out;
}

// (g nu)(x) = nu(g^{-1} x)
template <class G>
SparseMeasure<G> translate(const G& g, const SparseMeasure<G>& nu) {
  SparseMeasure<G> out;
  for (const auto& [x, m] : nu.entries()) out.add(mul(g, x), m);
  return out;
}

// total variation distance sum_x |a(x) - b(x)|
template <class G>
double tv_distance(const SparseMeasure<G>& a, const SparseMeasure<G>& b) {
  double s = 0;
  for (const auto& [x, m] : a.entries()) s += std::abs(m - b.mass(x));
  for (const auto& [x, m] : b.entries())
    if (!a.contains(x)) s += m;
  return s;
}

// Shannon entropy -sum kappa(x) ln kappa(x); kappa must be a probability.
template <class G>
double shannon_entropy(const SparseMeasure<G>& kappa) {
  if (!kappa.is_probability())
    throw ValidationError("shannon entropy requires a probability measure");
  double h = 0;
  for (const auto& [x, m] : kappa.entries()) h -= m * std::log(m);
  return h;
}

}  // namespace entlab
