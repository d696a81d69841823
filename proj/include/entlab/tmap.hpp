#pragma once

#include <Eigen/Dense>

#include "entlab/divergence.hpp"
#include "entlab/generator_measure.hpp"

namespace entlab {

// phi(q) = Psi_f(q) - Psi_f(1/q), positive and strictly decreasing on
// (0,1) for strictly convex smooth f. phi(q) -> 0 as q -> 1.
double phi(const FDivergence& f, double q);

// Entropy-minimizing weights for the harmonic measure of the symmetric
// walk mu: lambda_j = c / phi(q_j), c = (2 sum_{j=1}^d 1/phi(q_j))^{-1},
// where q is the hitting vector of mu. Requires symmetric mu and a
// strictly convex smooth f.
GeneratorMeasure t_forward(const GeneratorMeasure& mu, const FDivergence& f);

// Matrix of the symmetric hitting system read backwards: M p = 1 recovers
// the positive half of p from the positive half of q, with
// M_jj = 1/q_j + q_j and M_ji = 2 q_i for i != j. M is invertible for
// every q in (0,1)^d (rank-one update of a positive diagonal).
Eigen::MatrixXd q_system_matrix(const Eigen::VectorXd& q_pos);

// Inverts the hitting system. The solve alone does not force a probability
// measure: positivity and |2 sum p - 1| <= norm_tol are realizability
// checks, after which p is renormalized exactly.
GeneratorMeasure q_to_p(const Eigen::VectorXd& q_pos, double norm_tol = 1e-9);

struct TInverseResult {
  GeneratorMeasure mu;
  Eigen::VectorXd q;       // hitting vector of mu, 2d symmetric layout
  double lambda_residual;  // max_j |T(mu)_j - lambda_j|
  int iterations;          // outer bisection steps
};

// Preimage of lambda under the entropy-minimizing correspondence, by nested
// bisection: the outer variable is t = q_1, the inner solves
// phi(q_j) = phi(t) lambda_1 / lambda_j, and the outer root makes the
// recovered p a probability. The residual is reported, not enforced; the
// spurious zero of the normalization defect at t -> 1 is skipped by taking
// the first sign change from the left.
TInverseResult t_inverse(const GeneratorMeasure& lambda, const FDivergence& f,
                         double tol = 1e-12, int max_iter = 500);

}  // namespace entlab
