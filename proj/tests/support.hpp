#pragma once

// Shared helpers for the test binaries: deterministic random instances and a
// finite cyclic carrier for the generic divergence inequalities. Finitely
// supported measures on F_d or Z^k always have a translate escaping their own
// support, so bounds that need d(g nu)/d nu everywhere are exercised on Z/nZ,
// where full-support measures exist.

#include <cstdint>
#include <functional>
#include <unordered_map>
#include <vector>

#include "entlab/boundary.hpp"
#include "entlab/free_word.hpp"
#include "entlab/generator_measure.hpp"
#include "entlab/rng.hpp"
#include "entlab/sparse_measure.hpp"

namespace entlab::testing {

// Z/nZ, written multiplicatively so SparseMeasure can use it as a group.
struct Cyc {
  int n = 1;
  int v = 0;
};

inline Cyc mul(const Cyc& a, const Cyc& b) { return {a.n, (a.v + b.v) % a.n}; }
inline Cyc inverse(const Cyc& a) { return {a.n, (a.n - a.v) % a.n}; }
inline Cyc identity_like(const Cyc& a) { return {a.n, 0}; }
inline bool operator==(const Cyc& a, const Cyc& b) {
  return a.n == b.n && a.v == b.v;
}
inline bool operator!=(const Cyc& a, const Cyc& b) { return !(a == b); }

}  // namespace entlab::testing

template <>
struct std::hash<entlab::testing::Cyc> {
  std::size_t operator()(const entlab::testing::Cyc& c) const noexcept {
    return std::hash<long long>()(static_cast<long long>(c.n) * 1000003LL + c.v);
  }
};

namespace entlab::testing {

// Full-support probability on Z/nZ with every mass at least floor/(n*(1+floor)).
inline SparseMeasure<Cyc> random_cyc_probability(int n, CounterRng& rng,
                                                 double floor = 0.05) {
  std::vector<double> w(n);
  double total = 0;
  for (int v = 0; v < n; ++v) {
    w[v] = floor + rng.uniform01();
    total += w[v];
  }
  SparseMeasure<Cyc> m;
  for (int v = 0; v < n; ++v) m.add(Cyc{n, v}, w[v] / total);
  return m;
}

// Random symmetric generator measure with every half-mass at least
// floor/(2 d (1 + floor)); keeps the hitting vector q away from {0, 1}.
inline GeneratorMeasure random_symmetric_measure(int d, CounterRng& rng,
                                                 double floor = 0.05) {
  Eigen::VectorXd half(d);
  for (int j = 0; j < d; ++j) half[j] = floor + rng.uniform01();
  half /= 2.0 * half.sum();
  return GeneratorMeasure::symmetric(d, half);
}

// Random cylinder density at the given depth; scale controls how far the
// weights wander from the unit density (log-uniform perturbation).
inline CylinderDensity random_density(const BoundaryParams& bp, int depth,
                                      CounterRng& rng, double scale = 1.0) {
  std::unordered_map<FreeWord, double> raw;
  for (const FreeWord& gamma : enumerate_sphere(bp.d, depth))
    raw.emplace(gamma, std::exp(scale * (2.0 * rng.uniform01() - 1.0)));
  return normalize_density(bp, depth, std::move(raw));
}

// Random reduced word of length exactly len.
inline FreeWord random_word(int d, int len, CounterRng& rng) {
  std::vector<std::int8_t> letters;
  letters.reserve(len);
  for (int i = 0; i < len; ++i) {
    const int branch = i == 0 ? 2 * d : 2 * d - 1;
    int r = static_cast<int>(rng.uniform01() * branch);
    if (r >= branch) r = branch - 1;
    for (int c = -d; c <= d; ++c) {
      if (c == 0) continue;
      if (!letters.empty() && c == -letters.back()) continue;
      if (r == 0) {
        letters.push_back(static_cast<std::int8_t>(c));
        break;
      }
      --r;
    }
  }
  return FreeWord(d, std::move(letters));
}

}  // namespace entlab::testing
