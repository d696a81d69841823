#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "entlab/errors.hpp"
#include "entlab/free_word.hpp"
#include "entlab/generator_measure.hpp"
#include "entlab/sparse_measure.hpp"

namespace entlab {

// Convex generator f of an f-divergence, f(1) = 0. KL here follows the
// convention D_KL(m||nu) = integral of -ln(dm/dnu) dnu, i.e. f(z) = -ln z.
//
// Construction validates f(1) = 0 within 1e-15, midpoint convexity on a
// log-spaced grid, and (when a derivative is supplied) agreement of f' with
// central differences within 1e-6 relative error on z in [1e-3, 1e3].
class FDivergence {
 public:
  using Fn = std::function<double(double)>;

  // smooth generator (derivative supplied)
  FDivergence(std::string name, Fn f, Fn f_prime, bool strictly_convex);
  // generator without usable derivative; rejected by psi/criterion paths
  FDivergence(std::string name, Fn f, bool strictly_convex);

  double f(double z) const { return f_(z); }
  double f_prime(double z) const;

  const std::string& name() const { return name_; }
  bool smooth() const { return smooth_; }
  bool strictly_convex() const { return strictly_convex_; }

  // built-ins: kl, reverse_kl, chi2, hellinger2, linear
  static const FDivergence& by_name(const std::string& name);
  static const std::vector<const FDivergence*>& builtins();

  static const FDivergence& kl();
  static const FDivergence& reverse_kl();
  static const FDivergence& chi2();
  static const FDivergence& hellinger2();
  static const FDivergence& linear();

 private:
  std::string name_;
  Fn f_;
  Fn f_prime_;
  bool smooth_;
  bool strictly_convex_;
  void validate() const;
};

// Value in [0, +inf]; off_class tags the +infinity assigned when the two
// measures are not in a common measure class (distinct supports). It is a
// tag, not a floating-point infinity, so it cannot be confused with
// overflow of a finite sum.
struct DivergenceValue {
  double value = 0.0;
  bool off_class = false;

  bool finite() const { return !off_class && std::isfinite(value); }
  static DivergenceValue of(double v) { return {v, false}; }
  static DivergenceValue infinite() { return {0.0, true}; }

  // a <= b in the extended order, with additive slack on the finite branch
  static bool leq(const DivergenceValue& a, const DivergenceValue& b, double slack) {
    if (b.off_class || !std::isfinite(b.value)) return true;
    if (a.off_class || !std::isfinite(a.value)) return false;
    return a.value <= b.value + slack;
  }
};

// Psi_f(z) = f(z) - z f'(z) + f'(1/z); strictly decreasing for strictly
// convex smooth f. Requires a smooth generator.
double psi(const FDivergence& f, double z);

// D_f(eta||m) = sum_x m(x) f(eta(x)/m(x)). Both arguments must be
// probabilities within 1e-12. Returns the off-class infinity if supports
// differ in either direction.
template <class G>
DivergenceValue f_divergence(const FDivergence& f, const SparseMeasure<G>& eta,
                             const SparseMeasure<G>& m) {
  if (!eta.is_probability() || !m.is_probability())
    throw ValidationError("f_divergence requires probability measures");
  for (const auto& [x, mass] : eta.entries())
    if (!m.contains(x)) return DivergenceValue::infinite();
  double s = 0;
  for (const auto& [x, mass] : m.entries()) {
    if (!eta.contains(x)) return DivergenceValue::infinite();
    s += mass * f.f(eta.mass(x) / mass);
  }
  return DivergenceValue::of(s);
}

// h_{lambda,f}(kappa) = sum_g lambda(g) D_f(g^{-1}kappa || kappa)
//                     = sum_g lambda(g) sum_x kappa(x) f(kappa(gx)/kappa(x)).
// Off-class infinity if any lambda-translate leaves the support of kappa
// (always true for truncated balls; see furstenberg_entropy_interior).
template <class G>
DivergenceValue furstenberg_entropy_group(const FDivergence& f,
                                          const SparseMeasure<G>& lambda,
                                          const SparseMeasure<G>& kappa) {
  if (!kappa.is_probability())
    throw ValidationError("furstenberg entropy requires a probability measure");
  double h = 0;
  for (const auto& [g, lg] : lambda.entries()) {
    double term = 0;
    for (const auto& [x, kx] : kappa.entries()) {
      double kgx = kappa.mass(mul(g, x));
      if (kgx == 0.0) return DivergenceValue::infinite();
      term += kx * f.f(kgx / kx);
    }
    h += lg * term;
  }
  return DivergenceValue::of(h);
}

DivergenceValue furstenberg_entropy_group(const FDivergence& f,
                                          const GeneratorMeasure& lambda,
                                          const SparseMeasure<FreeWord>& kappa);

struct InteriorEntropy {
  double value = 0;       // sum restricted to interior points
  double interior_mass = 0;
  double shell_mass = 0;  // kappa mass of points with some translate off support
  double max_abs_f = 0;   // max |f(ratio)| over realized interior ratios
  double bias_bound = 0;  // shell_mass * max_abs_f
};

// Entropy sum restricted to the interior {x : kappa(gx) > 0 for all g in
// supp lambda}. Used to compare truncated measures against closed forms;
// the reported bias bound covers the dropped shell terms.
template <class G>
InteriorEntropy furstenberg_entropy_interior(const FDivergence& f,
                                             const SparseMeasure<G>& lambda,
                                             const SparseMeasure<G>& kappa) {
  InteriorEntropy out;
  for (const auto& [x, kx] : kappa.entries()) {
    bool interior = true;
    for (const auto& [g, lg] : lambda.entries())
      if (kappa.mass(mul(g, x)) == 0.0) {
        interior = false;
        break;
      }
    if (!interior) {
      out.shell_mass += kx;
      continue;
    }
    out.interior_mass += kx;
    for (const auto& [g, lg] : lambda.entries()) {
      double val = f.f(kappa.mass(mul(g, x)) / kx);
      out.value += lg * kx * val;
      out.max_abs_f = std::max(out.max_abs_f, std::abs(val));
    }
  }
  out.bias_bound = out.shell_mass * out.max_abs_f;
  return out;
}

// First-order lower bound for D_f(gm||m) around a reference nu:
//   D_f(g nu||nu) + sum_x [f'(1/r_inv(x)) + f(r(x)) - r(x) f'(r(x))] (m-nu)(x)
// with r = d(g nu)/d nu and r_inv = d(g^{-1} nu)/d nu. All ratios must be
// defined on supp(m) + supp(nu); translates of nu must preserve its support
// (throws SupportMismatch otherwise, which on free products rules out every
// finitely supported nu with g != e; the quasi-invariant boundary densities
// are the natural carrier, see the boundary module tests).
template <class G>
double first_order_bound(const FDivergence& f, const SparseMeasure<G>& nu,
                         const SparseMeasure<G>& m, const G& g) {
  if (!f.smooth()) throw ValidationError("first_order_bound needs a smooth f");
  if (!nu.is_probability() || !m.is_probability())
    throw ValidationError("first_order_bound requires probability measures");
  DivergenceValue base = f_divergence(f, translate(g, nu), nu);
  if (base.off_class)
    throw SupportMismatch("translate of nu leaves its support");
  double corr = 0;
  auto term = [&](const G& x, double delta) {
    double nx = nu.mass(x);
    if (nx == 0.0) throw SupportMismatch("m is not dominated by nu");
    double r = nu.mass(mul(inverse(g), x)) / nx;      // d(g nu)/d nu at x
    double r_inv = nu.mass(mul(g, x)) / nx;           // d(g^{-1} nu)/d nu at x
    if (r == 0.0 || r_inv == 0.0)
      throw SupportMismatch("translate of nu leaves its support");
    corr += (f.f_prime(1.0 / r_inv) + f.f(r) - r * f.f_prime(r)) * delta;
  };
  for (const auto& [x, mx] : m.entries()) term(x, mx - nu.mass(x));
  for (const auto& [x, nx] : nu.entries())
    if (!m.contains(x)) term(x, -nx);
  return base.value + corr;
}

// KL-specific lower bound for the f-entropy of m against a reference nu:
//   sum_x m(x) [ 1 - (mu*nu)(x)/nu(x) - sum_g mu(g) ln(nu(gx)/nu(x)) ].
// mu is a finitely supported step measure. nu need not be a probability
// (any finite measure with the needed support works).
template <class G>
double kl_lower_bound(const SparseMeasure<G>& mu, const SparseMeasure<G>& nu,
                      const SparseMeasure<G>& m) {
  if (!mu.is_probability())
    throw ValidationError("kl_lower_bound requires a probability step measure");
  double s = 0;
  for (const auto& [x, mx] : m.entries()) {
    double nx = nu.mass(x);
    if (nx == 0.0) throw SupportMismatch("m is not dominated by nu");
    double conv = 0;   // (mu*nu)(x) = sum_g mu(g) nu(g^{-1}x)
    double logs = 0;
    for (const auto& [g, mg] : mu.entries()) {
      conv += mg * nu.mass(mul(inverse(g), x));
      double ngx = nu.mass(mul(g, x));
      if (ngx == 0.0) throw SupportMismatch("a mu-translate leaves supp(nu)");
      logs += mg * std::log(ngx / nx);
    }
    s += mx * (1.0 - conv / nx - logs);
  }
  return s;
}

}  // namespace entlab
