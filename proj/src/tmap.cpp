#include "entlab/tmap.hpp"

#include <algorithm>
#include <cmath>

#include "entlab/boundary.hpp"

namespace entlab {

double phi(const FDivergence& f, double q) {
  if (!(q > 0.0 && q < 1.0)) throw ValidationError("phi needs q in (0,1)");
  return psi(f, q) - psi(f, 1.0 / q);
}

namespace {

void require_minimizing_f(const FDivergence& f) {
  if (!f.smooth() || !f.strictly_convex())
    throw ValidationError(
        "the minimizing correspondence needs a strictly convex smooth f");
}

// phi^{-1}(y) for y > 0, by bisection; phi is strictly decreasing
double inverse_phi(const FDivergence& f, double y) {
  if (!(y > 0.0)) throw ValidationError("phi target must be positive");
  double lo = 1e-18, hi = 1.0 - 1e-16;
  if (phi(f, lo) < y)
    throw NumericError("phi target out of reach of the bracket");
  if (phi(f, hi) > y) return hi;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (phi(f, mid) >= y ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// positive half of p from the un-normalized hitting solve M p = 1
Eigen::VectorXd solve_half_p(const Eigen::VectorXd& q_pos) {
  const Eigen::MatrixXd M = q_system_matrix(q_pos);
  return M.partialPivLu().solve(Eigen::VectorXd::Ones(q_pos.size()));
}

}  // namespace

GeneratorMeasure t_forward(const GeneratorMeasure& mu, const FDivergence& f) {
  require_minimizing_f(f);
  if (!mu.symmetric_within())
    throw ValidationError("the correspondence is defined for symmetric mu");
  const BoundaryParams bp = solve_q(mu);
  const int d = mu.rank();
  Eigen::VectorXd inv_phi(d);
  for (int j = 1; j <= d; ++j) {
    const double ph = phi(f, bp.q_at(j));
    if (!(ph > 0.0)) throw NumericError("nonpositive phi at a hitting value");
    inv_phi[j - 1] = 1.0 / ph;
  }
  const double c = 1.0 / (2.0 * inv_phi.sum());
  return GeneratorMeasure::symmetric(d, c * inv_phi);
}

Eigen::MatrixXd q_system_matrix(const Eigen::VectorXd& q_pos) {
  const int d = static_cast<int>(q_pos.size());
  if (d < 1) throw ValidationError("empty hitting vector");
  for (int j = 0; j < d; ++j)
    if (!(q_pos[j] > 0.0 && q_pos[j] < 1.0))
      throw ValidationError("hitting values must lie in (0,1)");
  Eigen::MatrixXd M(d, d);
  for (int j = 0; j < d; ++j)
    for (int i = 0; i < d; ++i)
      M(j, i) = i == j ? 1.0 / q_pos[j] + q_pos[j] : 2.0 * q_pos[i];
  return M;
}

GeneratorMeasure q_to_p(const Eigen::VectorXd& q_pos, double norm_tol) {
  const Eigen::VectorXd p = solve_half_p(q_pos);
  for (int j = 0; j < p.size(); ++j)
    if (!(p[j] > 0.0))
      throw ValidationError("hitting vector is not realizable: p_" +
                            std::to_string(j + 1) + " <= 0");
  const double total = 2.0 * p.sum();
  if (std::abs(total - 1.0) > norm_tol)
    throw ValidationError("hitting vector is not realizable: 2 sum p = " +
                          std::to_string(total));
  return GeneratorMeasure::symmetric(static_cast<int>(p.size()), p / total);
}

TInverseResult t_inverse(const GeneratorMeasure& lambda, const FDivergence& f,
                         double tol, int max_iter) {
  require_minimizing_f(f);
  if (!lambda.symmetric_within())
    throw ValidationError("the correspondence is defined for symmetric lambda");
  const int d = lambda.rank();

  // q_j as a function of the outer variable t = q_1
  const auto q_of = [&](double t) {
    Eigen::VectorXd q(d);
    q[0] = t;
    const double base = phi(f, t) * lambda.p(1);
    for (int j = 2; j <= d; ++j) q[j - 1] = inverse_phi(f, base / lambda.p(j));
    return q;
  };
  // normalization defect of the recovered p; -1 at t -> 0, spurious zero
  // at t -> 1
  const auto defect = [&](double t) {
    return 2.0 * solve_half_p(q_of(t)).sum() - 1.0;
  };

  // first sign change from the left: geometric sweep, then a linear one
  std::vector<double> grid;
  for (double t = 1e-12; t < 1.0 / 16.0; t *= 2.0) grid.push_back(t);
  for (int i = 0; i <= 256; ++i)
    grid.push_back(1.0 / 16.0 + (1.0 - 1e-6 - 1.0 / 16.0) * i / 256.0);
  double lo = grid[0], hi = 0.0;
  double g_lo = defect(lo);
  bool bracketed = false;
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double g = defect(grid[i]);
    if (g_lo < 0.0 && g >= 0.0) {
      hi = grid[i];
      bracketed = true;
      break;
    }
    lo = grid[i];
    g_lo = g;
  }
  if (!bracketed)
    throw NumericError("no realizable preimage found for the given weights");

  int iters = 0;
  while (iters < max_iter) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    ++iters;
    (defect(mid) < 0.0 ? lo : hi) = mid;
  }
  const double t_root = 0.5 * (lo + hi);

  const Eigen::VectorXd q_pos = q_of(t_root);
  GeneratorMeasure mu = q_to_p(q_pos, std::max(tol, 1e-9));
  const GeneratorMeasure back = t_forward(mu, f);
  double res = 0;
  for (int j = 1; j <= d; ++j)
    res = std::max(res, std::abs(back.p(j) - lambda.p(j)));

  Eigen::VectorXd q_full(2 * d);
  q_full.head(d) = q_pos;
  q_full.tail(d) = q_pos;
  return TInverseResult{std::move(mu), std::move(q_full), res, iters};
}

}  // namespace entlab
