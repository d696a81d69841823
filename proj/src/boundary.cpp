#include "entlab/boundary.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <vector>

#include "entlab/parallel.hpp"
#include "entlab/rng.hpp"

namespace entlab {

namespace {

// scalar residual of the hitting system after eliminating q
double scalar_f(const GeneratorMeasure& p, double x) {
  const int d = p.rank();
  double s = (d - 1) * x + 1.0;
  for (int j = 1; j <= d; ++j)
    s -= std::sqrt(x * x + 4.0 * p.p(j) * p.p(-j));
  return s;
}

void check_depth(int d, int depth) {
  if (depth < 0) throw ValidationError("negative cylinder depth");
  if (depth > kCylinderDepthCap)
    throw ValidationError("cylinder depth " + std::to_string(depth) +
                          " exceeds cap " + std::to_string(kCylinderDepthCap));
  (void)d;
}

}  // namespace

BoundaryParams solve_q(const GeneratorMeasure& p, double tol) {
  const int d = p.rank();
  if (scalar_f(p, 1.0) >= 0.0)
    throw NumericError("hitting system has no root in (0,1)");

  // first dyadic 2^{-k} with positive residual; for symmetric p the residual
  // vanishes at x = 0, so the bracket must stay away from it
  double lo = 0.5;
  while (scalar_f(p, lo) <= 0.0) {
    lo *= 0.5;
    if (lo < 1e-18) throw NumericError("hitting system bracket not found");
  }
  double hi = 1.0;
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;  // interval at machine width
    if (scalar_f(p, mid) > 0.0)
      lo = mid;
    else
      hi = mid;
  }
  const double x = 0.5 * (lo + hi);

  BoundaryParams bp;
  bp.d = d;
  bp.p = p.masses();
  bp.x_root = x;
  bp.q.resize(2 * d);
  bp.v.resize(2 * d);
  for (int j = 1; j <= d; ++j) {
    double root = std::sqrt(x * x + 4.0 * p.p(j) * p.p(-j));
    bp.q[bp.slot(j)] = (-x + root) / (2.0 * p.p(-j));
    bp.q[bp.slot(-j)] = (-x + root) / (2.0 * p.p(j));
  }
  for (int s = 0; s < 2 * d; ++s)
    if (!(bp.q[s] > 0.0 && bp.q[s] < 1.0))
      throw NumericError("hitting probabilities left (0,1)");

  double res = 0;
  for (int j = -d; j <= d; ++j) {
    if (j == 0) continue;
    double rhs = bp.p_at(j);
    double cross = 0;
    for (int i = -d; i <= d; ++i) {
      if (i == 0 || i == j) continue;
      cross += bp.p_at(i) * bp.q_at(-i);
    }
    rhs += bp.q_at(j) * cross;
    res = std::max(res, std::abs(bp.q_at(j) - rhs));
  }
  bp.residual = res;
  if (res > tol)
    throw NumericError("hitting system residual " + std::to_string(res) +
                       " exceeds tolerance");

  double vsum = 0;
  for (int i = -d; i <= d; ++i) {
    if (i == 0) continue;
    double qi = bp.q_at(i), qmi = bp.q_at(-i);
    bp.v[bp.slot(i)] = qi * (1.0 - qmi) / (1.0 - qmi * qi);
    vsum += bp.v[bp.slot(i)];
  }
  if (std::abs(vsum - 1.0) > 1e-12)
    throw NumericError("cylinder masses of depth 1 do not sum to 1");
  return bp;
}

double harmonic_cylinder(const BoundaryParams& bp, const FreeWord& gamma) {
  if (gamma.rank() != bp.d) throw ValidationError("word rank mismatch");
  if (gamma.is_identity()) return 1.0;
  const auto& L = gamma.letters();
  double m = bp.v_at(L[0]);
  for (std::size_t i = 1; i < L.size(); ++i)
    m *= bp.v_at(L[i]) / (1.0 - bp.v_at(-L[i - 1]));
  return m;
}

double rn_derivative(const BoundaryParams& bp, const FreeWord& g,
                     const FreeWord& gamma) {
  if (g.rank() != bp.d || gamma.rank() != bp.d)
    throw ValidationError("word rank mismatch");
  if (g.is_identity()) return 1.0;
  if (gamma.length() < g.length())
    throw ValidationError("cylinder depth " + std::to_string(gamma.length()) +
                          " too shallow for |g| = " + std::to_string(g.length()));
  // d(g1 h nu)/d nu (xi) = d(h nu)/d nu (g1^{-1} xi) * d(g1 nu)/d nu (xi)
  double val = 1.0;
  FreeWord cur = gamma;
  for (std::int8_t c : g.letters()) {
    int first = cur.first_letter();
    val *= (first == c) ? 1.0 / bp.q_at(c) : bp.q_at(-c);
    cur = mul(FreeWord::generator(bp.d, -c), cur);
  }
  return val;
}

double boundary_entropy(const BoundaryParams& bp, const GeneratorMeasure& lambda,
                        const FDivergence& f) {
  if (lambda.rank() != bp.d) throw ValidationError("lambda rank mismatch");
  double h = 0;
  for (int i = -bp.d; i <= bp.d; ++i) {
    if (i == 0) continue;
    double qi = bp.q_at(i), qmi = bp.q_at(-i), vmi = bp.v_at(-i);
    h += lambda.p(i) * ((1.0 - vmi) * f.f(qi) + vmi * f.f(1.0 / qmi));
  }
  return h;
}

Eigen::VectorXd criterion_values(const BoundaryParams& bp,
                                 const GeneratorMeasure& lambda,
                                 const FDivergence& f) {
  if (lambda.rank() != bp.d) throw ValidationError("lambda rank mismatch");
  if (!lambda.symmetric_within())
    throw ValidationError("criterion requires a symmetric lambda");
  if (!f.smooth()) throw ValidationError("criterion requires a smooth f");
  Eigen::VectorXd out(2 * bp.d);
  for (int j = -bp.d; j <= bp.d; ++j) {
    if (j == 0) continue;
    double val = lambda.p(j) * psi(f, 1.0 / bp.q_at(j));
    for (int i = -bp.d; i <= bp.d; ++i) {
      if (i == 0 || i == j) continue;
      val += lambda.p(i) * psi(f, bp.q_at(-i));
    }
    out[bp.slot(j)] = val;
  }
  return out;
}

double stationarity_residual(const BoundaryParams& bp, int depth) {
  if (depth < 1) throw ValidationError("stationarity check needs depth >= 1");
  check_depth(bp.d, depth);
  // nu(a_i^{-1} X_gamma): X_{reduce(a_i^{-1} gamma)}, except that when
  // gamma = a_i the image is the complement of X_{a_i^{-1}}
  auto translated_mass = [&](int i, const FreeWord& gamma) {
    const FreeWord gi = FreeWord::generator(bp.d, -i);
    if (gamma.length() == 1 && gamma.first_letter() == i)
      return 1.0 - bp.v_at(-i);
    return harmonic_cylinder(bp, mul(gi, gamma));
  };
  double worst = 0;
  for (const FreeWord& gamma : enumerate_sphere(bp.d, depth)) {
    double s = 0;
    for (int i = -bp.d; i <= bp.d; ++i) {
      if (i == 0) continue;
      s += bp.p_at(i) * translated_mass(i, gamma);
    }
    worst = std::max(worst, std::abs(s - harmonic_cylinder(bp, gamma)));
  }
  return worst;
}

double CylinderDensity::weight(const FreeWord& gamma_prefix) const {
  auto it = weights.find(gamma_prefix);
  if (it == weights.end())
    throw ValidationError("density has no weight for word " +
                          format_word(gamma_prefix));
  return it->second;
}

CylinderDensity make_density(const BoundaryParams& bp, int depth,
                             std::unordered_map<FreeWord, double> weights) {
  check_depth(bp.d, depth);
  if (weights.size() != sphere_size(bp.d, depth))
    throw ValidationError("density needs one weight per depth-" +
                          std::to_string(depth) + " word");
  double total = 0;
  for (const auto& [w, h] : weights) {
    if (static_cast<int>(w.length()) != depth)
      throw ValidationError("density weight indexed by a word of wrong length");
    if (!(h > 0)) throw ValidationError("density weights must be positive");
    total += h * harmonic_cylinder(bp, w);
  }
  if (std::abs(total - 1.0) > 1e-10)
    throw ValidationError("density normalizes to " + std::to_string(total) +
                          ", expected 1 within 1e-10");
  CylinderDensity m;
  m.bp = bp;
  m.depth = depth;
  m.weights = std::move(weights);
  return m;
}

CylinderDensity normalize_density(const BoundaryParams& bp, int depth,
                                  std::unordered_map<FreeWord, double> raw) {
  double total = 0;
  for (const auto& [w, h] : raw) total += h * harmonic_cylinder(bp, w);
  if (!(total > 0)) throw ValidationError("density normalizer must be positive");
  for (auto& [w, h] : raw) h /= total;
  return make_density(bp, depth, std::move(raw));
}

CylinderDensity unit_density(const BoundaryParams& bp, int depth) {
  std::unordered_map<FreeWord, double> w;
  for (const FreeWord& gamma : enumerate_sphere(bp.d, depth)) w[gamma] = 1.0;
  return make_density(bp, depth, std::move(w));
}

double density_entropy(const CylinderDensity& m, const GeneratorMeasure& lambda,
                       const FDivergence& f) {
  const BoundaryParams& bp = m.bp;
  if (lambda.rank() != bp.d) throw ValidationError("lambda rank mismatch");
  const int K = m.depth;
  check_depth(bp.d, K + 1);
  auto prefix = [&](const FreeWord& w) {
    if (static_cast<int>(w.length()) == K) return w;
    std::vector<std::int8_t> head(w.letters().begin(), w.letters().begin() + K);
    return FreeWord(bp.d, std::move(head));
  };
  // D_f(a_i^{-1} m || m) integrand on X_gamma, |gamma| = K+1:
  //   f( h_m(a_i xi) * d(a_{-i} nu)/d nu / h_m(xi) )
  double h = 0;
  for (const FreeWord& gamma : enumerate_sphere(bp.d, K + 1)) {
    double nu = harmonic_cylinder(bp, gamma);
    double hm = m.weight(prefix(gamma));
    for (int i = -bp.d; i <= bp.d; ++i) {
      if (i == 0) continue;
      FreeWord shifted = mul(FreeWord::generator(bp.d, i), gamma);
      double hm_shift = m.weight(prefix(shifted));
      double rn = rn_derivative(bp, FreeWord::generator(bp.d, -i), gamma);
      h += lambda.p(i) * nu * hm * f.f(rn * hm_shift / hm);
    }
  }
  return h;
}

CylinderDensity push_convolve(const SparseMeasure<FreeWord>& kappa,
                              const BoundaryParams& bp) {
  if (!kappa.is_probability())
    throw ValidationError("push_convolve requires a probability measure");
  int K = 1;
  for (const auto& [g, mg] : kappa.entries())
    K = std::max(K, static_cast<int>(g.length()));
  check_depth(bp.d, K);
  std::unordered_map<FreeWord, double> w;
  for (const FreeWord& gamma : enumerate_sphere(bp.d, K)) {
    double val = 0;
    for (const auto& [g, mg] : kappa.entries())
      val += mg * rn_derivative(bp, g, gamma);
    w[gamma] = val;
  }
  return make_density(bp, K, std::move(w));
}

HitCounts simulate_hitting(const GeneratorMeasure& p, std::uint64_t paths,
                           int depth, std::uint64_t seed, int patience,
                           std::uint64_t step_cap, int threads) {
  if (depth < 1) throw ValidationError("hitting simulation needs depth >= 1");
  check_depth(p.rank(), depth);
  if (patience < 1) throw ValidationError("patience must be positive");
  const int d = p.rank();
  const std::size_t target = static_cast<std::size_t>(depth) + patience;
  std::vector<double> weights(2 * d);
  for (int s = 0; s < 2 * d; ++s) weights[s] = p.masses()[s];

  const int workers = effective_threads(threads);
  std::vector<std::map<FreeWord, std::uint64_t, WordLess>> counts(workers);
  std::vector<std::uint64_t> excluded(workers, 0);
  std::atomic<int> next_worker{0};

  parallel_blocks(paths, workers, [&](std::uint64_t lo, std::uint64_t hi) {
    const int w = next_worker.fetch_add(1);
    std::vector<std::int8_t> word;
    word.reserve(target + 8);
    for (std::uint64_t k = lo; k < hi; ++k) {
      CounterRng rng = CounterRng::stream(seed, k);
      word.clear();
      bool ok = false;
      for (std::uint64_t step = 0; step < step_cap; ++step) {
        int s = rng.pick(weights);
        std::int8_t c = static_cast<std::int8_t>(s < d ? s + 1 : -(s - d + 1));
        if (!word.empty() && word.back() == -c)
          word.pop_back();
        else
          word.push_back(c);
        if (word.size() >= target) {
          ok = true;
          break;
        }
      }
      if (!ok) {
        excluded[w] += 1;
        continue;
      }
      std::vector<std::int8_t> head(word.begin(), word.begin() + depth);
      counts[w][FreeWord(d, std::move(head))] += 1;
    }
  });

  HitCounts out;
  out.depth = depth;
  out.seed = seed;
  for (int w = 0; w < workers; ++w) {
    out.excluded += excluded[w];
    for (const auto& [word, c] : counts[w]) out.counts[word] += c;
  }
  out.paths = paths - out.excluded;
  return out;
}

}  // namespace entlab
