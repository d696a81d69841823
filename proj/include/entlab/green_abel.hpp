#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "entlab/divergence.hpp"
#include "entlab/free_word.hpp"
#include "entlab/generator_measure.hpp"
#include "entlab/lattice_point.hpp"
#include "entlab/sparse_measure.hpp"

namespace entlab {

// First-passage and Green quantities of the a-damped walk on F_d.
//
// F_i(a) solves F_i = a p_i + a F_i sum_{j != i} p_j F_{-j} (minimal root,
// reached by monotone fixed-point iteration from 0). G_e = Green function at
// the identity; B_i = sum over reduced words starting with a_i of the
// product prod_l F_{x_l}; T_total = 1 + sum_i B_i. The normalized mass of a
// word is mu_a(x) = (1-a) G_e prod_l F_{x_l}.
struct GreenParams {
  int d = 0;
  double a = 0;
  Eigen::VectorXd p;  // 2d, layout [p_1..p_d, p_{-1}..p_{-d}]
  Eigen::VectorXd F;  // 2d
  double G_e = 0;
  Eigen::VectorXd B;  // 2d branch sums
  double T_total = 0;
  double residual = 0;       // fixed-point residual of F
  double mass_residual = 0;  // |(1-a) G_e T_total - 1|

  int slot(int index) const {
    if (index == 0 || index < -d || index > d)
      throw ValidationError("generator index out of range");
    return index > 0 ? index - 1 : d + (-index) - 1;
  }
  double p_at(int i) const { return p[slot(i)]; }
  double F_at(int i) const { return F[slot(i)]; }
  double B_at(int i) const { return B[slot(i)]; }
  // mass of the branch of words starting with a_i
  double W_at(int i) const { return (1.0 - a) * G_e * B[slot(i)]; }
};

GreenParams solve_first_passage(const GeneratorMeasure& p, double a,
                                double tol = 1e-13);

// closed-form mass mu_a(x)
double mu_a_mass(const GreenParams& gp, const FreeWord& x);

// h_{lambda,f}(F_d, mu_a) via the branch decomposition:
//   sum_j lambda_j [ W_{-j} f(1/F_{-j}) + (1 - W_{-j}) f(F_j) ].
double abel_entropy(const GreenParams& gp, const GeneratorMeasure& lambda,
                    const FDivergence& f);

struct SweepRow {
  double a = 0;
  double h_group = 0;     // abel_entropy
  double h_boundary = 0;  // boundary_entropy of nu_p for the same walk
  double gap = 0;
  double mass_residual = 0;
};

// One row per requested a, ascending. h_boundary is the a-independent
// boundary entropy of the harmonic measure of the same walk measure p.
std::vector<SweepRow> sweep_a(const GeneratorMeasure& p,
                              const GeneratorMeasure& lambda,
                              const FDivergence& f, std::vector<double> a_list,
                              int threads = 0);

// Distribution of the distance-from-origin chain after n steps of the
// uniform walk on F_d (reflecting birth-death chain: up (2d-1)/2d, down
// 1/2d, forced up from 0). Entry k is P(|R_n| = k), k = 0..n.
std::vector<double> radial_distribution(int d, int n);

// H(mu^{*n})/n for the uniform walk, computed radially:
//   H = sum_k P(k) [ ln sphere_size(d,k) - ln P(k) ].
double kv_entropy_rate(int d, int n);

struct RadialAbel {
  int d = 0;
  double a = 0;
  int n_terms = 0;      // Abel terms summed (tail below tail_eps)
  double tail_bound = 0;
  std::vector<double> sphere_mass;  // index k: total mu_a mass at distance k
  double point_mass(int k) const;   // sphere_mass[k] / sphere_size(d,k)
};

// Radial oracle for the uniform walk: mu_a mass by distance via the
// birth-death DP, independent of the first-passage closed form.
RadialAbel radial_abel_mass(int d, double a, int max_k, double tail_eps);

// Dense truncated Abel sum (1-a) sum_{n<=N} a^n mu^{*n} for a generator
// walk on F_d, stored as flat arrays over the length-lex ball enumeration.
// Same truncation rule as abel_sum_truncated; built for supports too large
// for hash-based measures. Powers up to N are exact on the radius-N ball.
class BallAbelOracle {
 public:
  BallAbelOracle(const GeneratorMeasure& p, double a, double eps,
                 std::uint64_t cap = kDefaultBallCap);

  int truncation_index() const { return n_terms_; }
  double tail_bound() const { return tail_bound_; }
  int radius() const { return n_terms_; }
  double total() const;
  double mass(const FreeWord& x) const;

  // Entropy sum over words of length <= radius-1 (every translate stays in
  // the ball); shell and bias bounds as in furstenberg_entropy_interior.
  InteriorEntropy interior_entropy(const GeneratorMeasure& lambda,
                                   const FDivergence& f) const;

 private:
  int d_;
  double a_;
  int n_terms_;
  double tail_bound_;
  std::vector<std::uint64_t> offset_;   // level start indices, 0..radius+1
  std::vector<double> acc_;             // truncated mu_a masses
  std::vector<std::int8_t> last_;       // last letter per ball index
  std::uint64_t index_of(const std::int8_t* letters, std::size_t len) const;
  int letter_rank(int c) const { return c < 0 ? c + d_ : d_ + c - 1; }
};

// lattice walk builders on Z^k
SparseMeasure<LatticePoint> lattice_simple_walk(int k);
// holding probability 1/2 at the origin, 1/(4k) per signed direction
SparseMeasure<LatticePoint> lattice_lazy_walk(int k);

struct LatticeAbelResult {
  double value = 0;       // interior entropy sum
  int n_terms = 0;        // Abel truncation index N
  double tail_bound = 0;  // a^{N+1}
  double interior_mass = 0;
  double shell_mass = 0;
  double max_abs_f = 0;
  double bias_bound = 0;  // shell_mass * max_abs_f
};

// h_{lambda,f}(Z^k, mu_a) from the truncated Abel sum on a dense box,
// evaluated on the interior where every lambda-translate stays in support.
// mu must be symmetric; the run is rejected when the dense DP would exceed
// op_cap elementary updates (infeasible truncation for the requested a).
LatticeAbelResult lattice_abel_entropy(const SparseMeasure<LatticePoint>& mu,
                                       const SparseMeasure<LatticePoint>& lambda,
                                       const FDivergence& f, double a, double eps,
                                       std::uint64_t op_cap = 6000000000ULL);

}  // namespace entlab
