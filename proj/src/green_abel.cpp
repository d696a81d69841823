#include "entlab/green_abel.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "entlab/boundary.hpp"
#include "entlab/parallel.hpp"

namespace entlab {

namespace {

// slot of the inverse generator
inline int opp(int s, int d) { return s < d ? s + d : s - d; }

}  // namespace

GreenParams solve_first_passage(const GeneratorMeasure& p, double a, double tol) {
  if (!(a > 0.0 && a < 1.0))
    throw ValidationError("abel parameter must be in (0,1)");
  if (!(tol > 0.0)) throw ValidationError("tolerance must be positive");
  const int d = p.rank();
  const int n = 2 * d;
  const Eigen::VectorXd& pm = p.masses();

  // minimal solution of F_j = a p_j + a F_j sum_{i != j} p_i F_{-i}, reached
  // monotonically from 0; each sweep is a Jacobi update so the iterates stay
  // below the fixed point.
  Eigen::VectorXd F = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd next(n);
  for (int iter = 0; iter < 2000000; ++iter) {
    double S = 0;
    for (int i = 0; i < n; ++i) S += pm[i] * F[opp(i, d)];
    double delta = 0;
    for (int j = 0; j < n; ++j) {
      next[j] = a * pm[j] + a * F[j] * (S - pm[j] * F[opp(j, d)]);
      delta = std::max(delta, std::abs(next[j] - F[j]));
    }
    F = next;
    if (delta <= 1e-16) break;
  }

  GreenParams gp;
  gp.d = d;
  gp.a = a;
  gp.p = pm;
  gp.F = F;

  double S = 0;
  for (int i = 0; i < n; ++i) S += pm[i] * F[opp(i, d)];
  double res = 0;
  for (int j = 0; j < n; ++j) {
    if (!(F[j] > 0.0 && F[j] < 1.0))
      throw NumericError("first-passage value out of (0,1)");
    res = std::max(res, std::abs(F[j] - a * pm[j] -
                                 a * F[j] * (S - pm[j] * F[opp(j, d)])));
  }
  gp.residual = res;
  if (!(res <= tol))
    throw NumericError("first-passage iteration stalled at residual " +
                       std::to_string(res));

  const double U = a * S;  // generating function of returns to e
  if (!(U < 1.0)) throw NumericError("Green function diverges");
  gp.G_e = 1.0 / (1.0 - U);

  // branch sums: B_j = F_j (T - B_{-j}), T = 1 + sum_i B_i, solved densely
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n + 1, n + 1);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + 1);
  for (int j = 0; j < n; ++j) {
    M(j, j) = 1.0;
    M(j, opp(j, d)) += F[j];
    M(j, n) = -F[j];
  }
  for (int i = 0; i < n; ++i) M(n, i) = -1.0;
  M(n, n) = 1.0;
  rhs[n] = 1.0;
  Eigen::VectorXd z = M.partialPivLu().solve(rhs);
  gp.B = z.head(n);
  gp.T_total = z[n];
  for (int j = 0; j < n; ++j)
    if (!(gp.B[j] > 0.0)) throw NumericError("nonpositive branch sum");
  if (!(gp.T_total > 1.0)) throw NumericError("branch total not above 1");
  gp.mass_residual = std::abs((1.0 - a) * gp.G_e * gp.T_total - 1.0);
  return gp;
}

double mu_a_mass(const GreenParams& gp, const FreeWord& x) {
  if (x.rank() != gp.d)
    throw ValidationError("word rank does not match the walk");
  double m = (1.0 - gp.a) * gp.G_e;
  for (std::int8_t c : x.letters()) m *= gp.F_at(c);
  return m;
}

double abel_entropy(const GreenParams& gp, const GeneratorMeasure& lambda,
                    const FDivergence& f) {
  if (lambda.rank() != gp.d) throw ValidationError("generator rank mismatch");
  // ratio mu_a(a_j x)/mu_a(x) is 1/F_{-j} on the a_{-j} branch (mass W_{-j})
  // and F_j elsewhere
  double h = 0;
  for (int j = 1; j <= gp.d; ++j)
    for (int s : {j, -j}) {
      const double w = gp.W_at(-s);
      h += lambda.p(s) *
           (w * f.f(1.0 / gp.F_at(-s)) + (1.0 - w) * f.f(gp.F_at(s)));
    }
  return h;
}

std::vector<SweepRow> sweep_a(const GeneratorMeasure& p,
                              const GeneratorMeasure& lambda,
                              const FDivergence& f, std::vector<double> a_list,
                              int threads) {
  if (a_list.empty()) throw ValidationError("empty list of abel parameters");
  for (double a : a_list)
    if (!(a > 0.0 && a < 1.0))
      throw ValidationError("abel parameter must be in (0,1)");
  std::sort(a_list.begin(), a_list.end());

  const BoundaryParams bp = solve_q(p);
  const double hb = boundary_entropy(bp, lambda, f);

  std::vector<SweepRow> rows(a_list.size());
  parallel_blocks(a_list.size(), effective_threads(threads),
                  [&](std::uint64_t lo, std::uint64_t hi) {
                    for (std::uint64_t i = lo; i < hi; ++i) {
                      const GreenParams gp = solve_first_passage(p, a_list[i]);
                      const double hg = abel_entropy(gp, lambda, f);
                      rows[i] = {a_list[i], hg, hb, hg - hb, gp.mass_residual};
                    }
                  });
  return rows;
}

std::vector<double> radial_distribution(int d, int n) {
  if (d < 1 || d > 120) throw ValidationError("rank must be in [1, 120]");
  if (n < 0) throw ValidationError("negative step count");
  std::vector<double> cur(n + 1, 0.0), nxt(n + 1, 0.0);
  cur[0] = 1.0;
  const double up = (2.0 * d - 1.0) / (2.0 * d);
  const double down = 1.0 / (2.0 * d);
  for (int s = 1; s <= n; ++s) {
    std::fill(nxt.begin(), nxt.begin() + s + 1, 0.0);
    if (cur[0] > 0.0) nxt[1] += cur[0];
    for (int k = 1; k < s; ++k) {
      const double m = cur[k];
      if (m == 0.0) continue;
      nxt[k + 1] += m * up;
      nxt[k - 1] += m * down;
    }
    std::swap(cur, nxt);
  }
  return cur;
}

double kv_entropy_rate(int d, int n) {
  if (n < 1) throw ValidationError("need at least one step");
  const std::vector<double> row = radial_distribution(d, n);
  // ln sphere_size(d,k) in log space; the integer count overflows long
  // before n = 4000
  const double l2d = std::log(2.0 * d);
  const double l2dm1 = std::log(2.0 * d - 1.0);
  double H = 0;
  for (int k = 0; k <= n; ++k) {
    const double m = row[k];
    if (m <= 0.0) continue;
    const double log_sphere = k == 0 ? 0.0 : l2d + (k - 1) * l2dm1;
    H += m * (log_sphere - std::log(m));
  }
  return H / n;
}

double RadialAbel::point_mass(int k) const {
  if (k < 0 || k >= static_cast<int>(sphere_mass.size()))
    throw ValidationError("distance out of tabulated range");
  if (k == 0) return sphere_mass[0];
  return sphere_mass[k] / (2.0 * d * std::pow(2.0 * d - 1.0, k - 1));
}

RadialAbel radial_abel_mass(int d, double a, int max_k, double tail_eps) {
  if (d < 1 || d > 120) throw ValidationError("rank must be in [1, 120]");
  if (max_k < 0) throw ValidationError("negative distance bound");
  const int N = abel_truncation_index(a, tail_eps);

  RadialAbel out;
  out.d = d;
  out.a = a;
  out.n_terms = N;
  out.tail_bound = std::pow(a, N + 1);
  out.sphere_mass.assign(max_k + 1, 0.0);

  std::vector<double> cur(N + 2, 0.0), nxt(N + 2, 0.0);
  cur[0] = 1.0;
  double coeff = 1.0 - a;
  out.sphere_mass[0] += coeff;
  const double up = (2.0 * d - 1.0) / (2.0 * d);
  const double down = 1.0 / (2.0 * d);
  for (int s = 1; s <= N; ++s) {
    std::fill(nxt.begin(), nxt.begin() + s + 1, 0.0);
    if (cur[0] > 0.0) nxt[1] += cur[0];
    for (int k = 1; k < s; ++k) {
      const double m = cur[k];
      if (m == 0.0) continue;
      nxt[k + 1] += m * up;
      nxt[k - 1] += m * down;
    }
    std::swap(cur, nxt);
    coeff *= a;
    const int top = std::min(s, max_k);
    for (int k = 0; k <= top; ++k) out.sphere_mass[k] += coeff * cur[k];
  }
  return out;
}

BallAbelOracle::BallAbelOracle(const GeneratorMeasure& p, double a, double eps,
                               std::uint64_t cap)
    : d_(p.rank()), a_(a) {
  n_terms_ = abel_truncation_index(a, eps);
  tail_bound_ = std::pow(a, n_terms_ + 1);
  const int N = n_terms_;
  const std::uint64_t total = ball_size(d_, N);
  if (total > cap)
    throw BallCapExceeded("truncated abel support of " + std::to_string(total) +
                          " words exceeds cap of " + std::to_string(cap));

  offset_.resize(N + 2);
  offset_[0] = 0;
  offset_[1] = 1;
  for (int k = 1; k <= N; ++k) offset_[k + 1] = offset_[k] + sphere_size(d_, k);

  const int n2 = 2 * d_;
  const int branch = n2 - 1;
  std::vector<int> order;
  order.reserve(n2);
  for (int c = -d_; c <= d_; ++c)
    if (c != 0) order.push_back(c);  // ascending, rank i = letter_rank(order[i])

  last_.assign(total, 0);
  if (N >= 1)
    for (int i = 0; i < n2; ++i) last_[1 + i] = static_cast<std::int8_t>(order[i]);
  for (int k = 2; k <= N; ++k) {
    const std::uint64_t plo = offset_[k - 1];
    const std::uint64_t phi = offset_[k];
    for (std::uint64_t pr = 0; pr < phi - plo; ++pr) {
      const int pl = last_[plo + pr];
      const int skip = letter_rank(-pl);
      const std::uint64_t base = phi + pr * branch;
      int pos = 0;
      for (int i = 0; i < n2; ++i) {
        if (i == skip) continue;
        last_[base + pos] = static_cast<std::int8_t>(order[i]);
        ++pos;
      }
    }
  }

  std::vector<double> pw(n2), pw_cancel(n2);
  for (int i = 0; i < n2; ++i) {
    pw[i] = p.p(order[i]);
    pw_cancel[i] = p.p(-order[i]);  // step that cancels a last letter of rank i
  }

  acc_.assign(total, 0.0);
  std::vector<double> cur(total, 0.0), nxt(total, 0.0);
  cur[0] = 1.0;
  double coeff = 1.0 - a;
  acc_[0] = coeff;
  for (int n = 1; n <= N; ++n) {
    // mu^{*(n-1)} lives on levels <= n-1; its push reaches level <= n
    const std::uint64_t reach = offset_[std::min(n, N) + 1];
    std::fill(nxt.begin(), nxt.begin() + reach, 0.0);
    if (cur[0] != 0.0)
      for (int i = 0; i < n2; ++i) nxt[1 + i] += cur[0] * pw[i];
    const int top = std::min(n - 1, N);
    for (int k = 1; k <= top; ++k) {
      const std::uint64_t lo = offset_[k];
      const std::uint64_t hi = offset_[k + 1];
      for (std::uint64_t idx = lo; idx < hi; ++idx) {
        const double m = cur[idx];
        if (m == 0.0) continue;
        const int rank_last = letter_rank(last_[idx]);
        const std::uint64_t r = idx - lo;
        const std::uint64_t par = k == 1 ? 0 : offset_[k - 1] + r / branch;
        nxt[par] += m * pw_cancel[rank_last];
        if (k < N) {
          const std::uint64_t base = offset_[k + 1] + r * branch;
          const int skip = n2 - 1 - rank_last;  // rank of the cancelling letter
          int pos = 0;
          for (int i = 0; i < n2; ++i) {
            if (i == skip) continue;
            nxt[base + pos] += m * pw[i];
            ++pos;
          }
        }
      }
    }
    coeff *= a;
    Eigen::Map<Eigen::ArrayXd>(acc_.data(), static_cast<Eigen::Index>(reach)) +=
        coeff * Eigen::Map<const Eigen::ArrayXd>(nxt.data(),
                                                 static_cast<Eigen::Index>(reach));
    std::swap(cur, nxt);
  }
}

std::uint64_t BallAbelOracle::index_of(const std::int8_t* letters,
                                       std::size_t len) const {
  if (len == 0) return 0;
  const int branch = 2 * d_ - 1;
  std::uint64_t r = letter_rank(letters[0]);
  for (std::size_t i = 1; i < len; ++i) {
    const int rc = letter_rank(letters[i]);
    const int skip = letter_rank(-letters[i - 1]);
    r = r * branch + (rc > skip ? rc - 1 : rc);
  }
  return offset_[len] + r;
}

double BallAbelOracle::total() const {
  return Eigen::Map<const Eigen::ArrayXd>(acc_.data(),
                                          static_cast<Eigen::Index>(acc_.size()))
      .sum();
}

double BallAbelOracle::mass(const FreeWord& x) const {
  if (x.rank() != d_) throw ValidationError("word rank does not match the walk");
  if (static_cast<int>(x.length()) > n_terms_)
    throw ValidationError("word outside the truncated ball");
  return acc_[index_of(x.letters().data(), x.length())];
}

InteriorEntropy BallAbelOracle::interior_entropy(const GeneratorMeasure& lambda,
                                                 const FDivergence& f) const {
  if (lambda.rank() != d_) throw ValidationError("generator rank mismatch");
  const int N = n_terms_;
  InteriorEntropy out;
  if (N == 0) {
    out.shell_mass = total();
    return out;
  }
  const int n2 = 2 * d_;
  const int branch = n2 - 1;
  std::vector<int> order;
  order.reserve(n2);
  for (int c = -d_; c <= d_; ++c)
    if (c != 0) order.push_back(c);
  std::vector<double> lw(n2);
  for (int i = 0; i < n2; ++i) lw[i] = lambda.p(order[i]);

  std::vector<std::int8_t> ls;
  ls.reserve(N);
  std::vector<std::int8_t> scratch;
  scratch.reserve(N + 1);

  // depth-first over all words of length <= N-1 (every translate stays in
  // the ball), tracking the level rank to index the flat arrays
  std::function<void(std::uint64_t, int)> visit = [&](std::uint64_t rank, int k) {
    const double m = acc_[offset_[k] + rank];
    out.interior_mass += m;
    for (int i = 0; i < n2; ++i) {
      std::uint64_t tidx;
      if (k > 0 && ls[0] == -order[i]) {
        tidx = index_of(ls.data() + 1, k - 1);
      } else {
        scratch.assign(1, static_cast<std::int8_t>(order[i]));
        scratch.insert(scratch.end(), ls.begin(), ls.end());
        tidx = index_of(scratch.data(), k + 1);
      }
      const double val = f.f(acc_[tidx] / m);
      out.value += lw[i] * m * val;
      out.max_abs_f = std::max(out.max_abs_f, std::abs(val));
    }
    if (k + 1 > N - 1) return;
    const int pl = k ? ls.back() : 0;
    int pos = 0;
    for (int i = 0; i < n2; ++i) {
      if (pl != 0 && order[i] == -pl) continue;
      ls.push_back(static_cast<std::int8_t>(order[i]));
      visit(k == 0 ? static_cast<std::uint64_t>(i) : rank * branch + pos, k + 1);
      ls.pop_back();
      ++pos;
    }
  };
  visit(0, 0);

  out.shell_mass =
      Eigen::Map<const Eigen::ArrayXd>(acc_.data() + offset_[N],
                                       static_cast<Eigen::Index>(offset_[N + 1] -
                                                                 offset_[N]))
          .sum();
  out.bias_bound = out.shell_mass * out.max_abs_f;
  return out;
}

SparseMeasure<LatticePoint> lattice_simple_walk(int k) {
  SparseMeasure<LatticePoint> m;
  for (int i = 0; i < k; ++i)
    for (int s : {-1, 1}) {
      std::vector<std::int32_t> c(k, 0);
      c[i] = s;
      m.add(LatticePoint(std::move(c)), 1.0 / (2.0 * k));
    }
  return m;
}

SparseMeasure<LatticePoint> lattice_lazy_walk(int k) {
  SparseMeasure<LatticePoint> m;
  m.add(LatticePoint(k), 0.5);
  for (int i = 0; i < k; ++i)
    for (int s : {-1, 1}) {
      std::vector<std::int32_t> c(k, 0);
      c[i] = s;
      m.add(LatticePoint(std::move(c)), 1.0 / (4.0 * k));
    }
  return m;
}

LatticeAbelResult lattice_abel_entropy(const SparseMeasure<LatticePoint>& mu,
                                       const SparseMeasure<LatticePoint>& lambda,
                                       const FDivergence& f, double a, double eps,
                                       std::uint64_t op_cap) {
  if (mu.empty() || lambda.empty())
    throw ValidationError("empty lattice measure");
  if (!mu.is_probability() || !lambda.is_probability())
    throw ValidationError("lattice abel entropy requires probability measures");
  const int dim = mu.entries().begin()->first.dim();
  for (const auto& [x, m] : mu.entries()) {
    if (x.dim() != dim) throw ValidationError("lattice dimension mismatch");
    if (std::abs(mu.mass(inverse(x)) - m) > 1e-12)
      throw ValidationError("step measure must be symmetric");
  }
  for (const auto& [g, lg] : lambda.entries())
    if (g.dim() != dim) throw ValidationError("lattice dimension mismatch");

  const int N = abel_truncation_index(a, eps);
  std::vector<std::int64_t> R(dim, 0), L(dim), stride(dim);
  for (const auto& [x, m] : mu.entries())
    for (int c = 0; c < dim; ++c)
      R[c] = std::max<std::int64_t>(R[c], std::abs(static_cast<std::int64_t>(x[c])));
  double cells_est = 1;
  for (int c = 0; c < dim; ++c) {
    R[c] *= N;
    L[c] = 2 * R[c] + 1;
    cells_est *= static_cast<double>(L[c]);
  }
  const double ops = static_cast<double>(N) * cells_est *
                     static_cast<double>(mu.size());
  if (ops > static_cast<double>(op_cap))
    throw NumericError("dense abel truncation needs about " +
                       std::to_string(ops) + " updates, over the cap of " +
                       std::to_string(op_cap));
  std::uint64_t cells = 1;
  for (int c = 0; c < dim; ++c) cells *= static_cast<std::uint64_t>(L[c]);
  stride[dim - 1] = 1;
  for (int c = dim - 2; c >= 0; --c) stride[c] = stride[c + 1] * L[c + 1];

  const auto flat = [&](const std::vector<std::int64_t>& x) {
    std::int64_t i = 0;
    for (int c = 0; c < dim; ++c) i += (x[c] + R[c]) * stride[c];
    return static_cast<std::uint64_t>(i);
  };

  struct Step {
    std::int64_t delta;
    double w;
  };
  std::vector<Step> steps;
  steps.reserve(mu.size());
  for (const auto& [x, m] : mu.entries()) {
    std::int64_t delta = 0;
    for (int c = 0; c < dim; ++c) delta += static_cast<std::int64_t>(x[c]) * stride[c];
    steps.push_back({delta, m});
  }

  std::vector<double> cur(cells, 0.0), nxt(cells, 0.0), acc(cells, 0.0);
  std::vector<std::int64_t> origin(dim, 0);
  const std::uint64_t o = flat(origin);
  cur[o] = 1.0;
  double coeff = 1.0 - a;
  acc[o] = coeff;
  for (int n = 1; n <= N; ++n) {
    std::fill(nxt.begin(), nxt.end(), 0.0);
    for (std::uint64_t i = 0; i < cells; ++i) {
      const double m = cur[i];
      if (m == 0.0) continue;
      // support after n-1 steps is N-1 steps short of the box edge, so
      // every delta lands inside
      for (const Step& st : steps)
        nxt[static_cast<std::uint64_t>(static_cast<std::int64_t>(i) + st.delta)] +=
            m * st.w;
    }
    coeff *= a;
    Eigen::Map<Eigen::ArrayXd>(acc.data(), static_cast<Eigen::Index>(cells)) +=
        coeff *
        Eigen::Map<const Eigen::ArrayXd>(nxt.data(), static_cast<Eigen::Index>(cells));
    std::swap(cur, nxt);
  }

  LatticeAbelResult out;
  out.n_terms = N;
  out.tail_bound = std::pow(a, N + 1);
  std::vector<std::int64_t> x(dim), t(dim);
  for (std::uint64_t i = 0; i < cells; ++i) {
    const double m = acc[i];
    if (m == 0.0) continue;
    for (int c = 0; c < dim; ++c)
      x[c] = static_cast<std::int64_t>(i / static_cast<std::uint64_t>(stride[c])) %
                 L[c] -
             R[c];
    bool interior = true;
    double cell_val = 0, cell_max = 0;
    for (const auto& [g, lg] : lambda.entries()) {
      for (int c = 0; c < dim; ++c) t[c] = x[c] + g[c];
      bool inside = true;
      for (int c = 0; c < dim; ++c)
        if (t[c] < -R[c] || t[c] > R[c]) {
          inside = false;
          break;
        }
      const double mt = inside ? acc[flat(t)] : 0.0;
      if (mt == 0.0) {
        interior = false;
        break;
      }
      const double val = f.f(mt / m);
      cell_val += lg * m * val;
      cell_max = std::max(cell_max, std::abs(val));
    }
    if (interior) {
      out.value += cell_val;
      out.interior_mass += m;
      out.max_abs_f = std::max(out.max_abs_f, cell_max);
    } else {
      out.shell_mass += m;
    }
  }
  out.bias_bound = out.shell_mass * out.max_abs_f;
  return out;
}

}  // namespace entlab
