#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <unordered_map>

#include "entlab/divergence.hpp"
#include "entlab/free_word.hpp"
#include "entlab/generator_measure.hpp"
#include "entlab/sparse_measure.hpp"

namespace entlab {

// Cylinder depth cap for exhaustive sums (the d = 2 sphere at depth 12 has
// ~7e5 words; deeper sums are rejected rather than silently slow).
inline constexpr int kCylinderDepthCap = 12;

// Parameters of the harmonic measure nu_mu on the boundary of F_d for a
// generator-supported walk measure p.
//
// q_i is the probability that the walk started at e ever hits a_i; the
// scalar reduction solves
//   (d-1)x + 1 - sum_j sqrt(x^2 + 4 p_j p_{-j}) = 0,  x in (0,1),
// and q_i = (-x + sqrt(x^2 + 4 p_i p_{-i})) / (2 p_{-i}).
// v_i = nu(X_{a_i}) = q_i(1 - q_{-i}) / (1 - q_{-i} q_i).
struct BoundaryParams {
  int d = 0;
  Eigen::VectorXd p;  // 2d, layout [p_1..p_d, p_{-1}..p_{-d}]
  double x_root = 0;
  Eigen::VectorXd q;  // 2d
  Eigen::VectorXd v;  // 2d
  double residual = 0;  // max_j |q_j - p_j - q_j sum_{i != j} p_i q_{-i}|

  int slot(int index) const {
    if (index == 0 || index < -d || index > d)
      throw ValidationError("generator index out of range");
    return index > 0 ? index - 1 : d + (-index) - 1;
  }
  double p_at(int i) const { return p[slot(i)]; }
  double q_at(int i) const { return q[slot(i)]; }
  double v_at(int i) const { return v[slot(i)]; }
};

// Hitting-probability system for a generator-supported walk measure; the
// scalar bracket starts at the first dyadic t = 2^{-k} with a positive
// scalar residual, which skips the spurious x = 0 root of symmetric p.
// Bisection runs to interval stagnation; tol bounds the accepted residual.
BoundaryParams solve_q(const GeneratorMeasure& p, double tol = 1e-12);

// nu_mu(X_gamma) for a reduced cylinder word; 1 for the identity.
double harmonic_cylinder(const BoundaryParams& bp, const FreeWord& gamma);

// Value of d(g nu)/d nu on the cylinder X_gamma. Requires |gamma| >= |g|
// (and gamma nonempty unless g = e); the value is constant there. Uses the
// cocycle factorization over the letters of g; the single-letter values are
// d(a_i nu)/d nu = 1/q_i on X_{a_i} and q_{-i} elsewhere.
double rn_derivative(const BoundaryParams& bp, const FreeWord& g,
                     const FreeWord& gamma);

// h_{lambda,f}(nu_mu) = sum_i lambda_i [ (1-v_{-i}) f(q_i) + v_{-i} f(1/q_{-i}) ].
double boundary_entropy(const BoundaryParams& bp, const GeneratorMeasure& lambda,
                        const FDivergence& f);

// Per-cylinder values of sum_g lambda(g) Psi_f(d g nu/d nu) on X_{a_j},
// ordered [a_1..a_d, a_{-1}..a_{-d}]. Constant across j exactly when lambda
// is the entropy-minimizing image of p.
Eigen::VectorXd criterion_values(const BoundaryParams& bp,
                                 const GeneratorMeasure& lambda,
                                 const FDivergence& f);

// max over depth-K cylinders of |sum_i p_i nu(a_i^{-1} X_gamma) - nu(X_gamma)|,
// evaluated through the cylinder transform rule (not the q-equations), so a
// perturbed q produces a visibly nonzero residual.
double stationarity_residual(const BoundaryParams& bp, int depth);

// Measure m = h_m * nu_mu with density h_m constant on depth-K cylinders.
// Weights are indexed by the reduced words of length exactly K and satisfy
// sum_gamma w(gamma) nu(X_gamma) = 1 within 1e-10.
struct CylinderDensity {
  BoundaryParams bp;
  int depth = 0;
  std::unordered_map<FreeWord, double> weights;

  double weight(const FreeWord& gamma_prefix) const;
};

// Validating constructor; throws unless weights are positive, complete for
// the depth, and normalized within 1e-10.
CylinderDensity make_density(const BoundaryParams& bp, int depth,
                             std::unordered_map<FreeWord, double> weights);

// Rescales raw positive weights so the density integrates to 1.
CylinderDensity normalize_density(const BoundaryParams& bp, int depth,
                                  std::unordered_map<FreeWord, double> raw);

// Unit density (m = nu_mu) at the given depth.
CylinderDensity unit_density(const BoundaryParams& bp, int depth);

// h_{lambda,f}(m) for a cylinder-density measure, evaluated exactly by
// summation over depth-(K+1) cylinders.
double density_entropy(const CylinderDensity& m, const GeneratorMeasure& lambda,
                       const FDivergence& f);

// Density of kappa * nu_mu with respect to nu_mu, constant on cylinders of
// depth max(1, longest word in supp kappa). kappa must be a probability.
CylinderDensity push_convolve(const SparseMeasure<FreeWord>& kappa,
                              const BoundaryParams& bp);

// Monte Carlo sample of the hitting (harmonic) measure on depth-K cylinders.
struct HitCounts {
  int depth = 0;
  std::uint64_t paths = 0;     // paths that produced a stable prefix
  std::uint64_t excluded = 0;  // paths stopped by the step cap
  std::uint64_t seed = 0;
  std::map<FreeWord, std::uint64_t, WordLess> counts;
};

// Runs `paths` independent walks driven by p; each walk is multiplied by
// i.i.d. generator steps until the reduced word is at least depth+patience
// letters long, then its depth-prefix is recorded. Deterministic for a
// given seed and independent of the thread count.
HitCounts simulate_hitting(const GeneratorMeasure& p, std::uint64_t paths,
                           int depth, std::uint64_t seed, int patience = 40,
                           std::uint64_t step_cap = 1000000, int threads = 0);

}  // namespace entlab
