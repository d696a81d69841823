#include "entlab/divergence.hpp"

#include <cmath>

namespace entlab {

FDivergence::FDivergence(std::string name, Fn f, Fn f_prime, bool strictly_convex)
    : name_(std::move(name)),
      f_(std::move(f)),
      f_prime_(std::move(f_prime)),
      smooth_(true),
      strictly_convex_(strictly_convex) {
  validate();
}

FDivergence::FDivergence(std::string name, Fn f, bool strictly_convex)
    : name_(std::move(name)),
      f_(std::move(f)),
      smooth_(false),
      strictly_convex_(strictly_convex) {
  validate();
}

double FDivergence::f_prime(double z) const {
  if (!smooth_)
    throw ValidationError("generator '" + name_ + "' has no derivative");
  return f_prime_(z);
}

void FDivergence::validate() const {
  if (std::abs(f_(1.0)) > 1e-15)
    throw ValidationError("generator '" + name_ + "' violates f(1) = 0");
  // midpoint convexity spot check on a log grid
  for (double za = 1e-3; za < 1.1e3; za *= 10)
    for (double zb = 1e-3; zb < 1.1e3; zb *= 10) {
      double mid = 0.5 * (za + zb);
      if (f_(mid) > 0.5 * (f_(za) + f_(zb)) + 1e-12)
        throw ValidationError("generator '" + name_ + "' is not convex");
    }
  if (smooth_) {
    for (double z = 1e-3; z < 1.1e3; z *= 1.7) {
      double h = 1e-6 * z;
      double fd = (f_(z + h) - f_(z - h)) / (2 * h);
      double an = f_prime_(z);
      double scale = std::max({std::abs(fd), std::abs(an), 1e-9});
      if (std::abs(fd - an) > 1e-6 * scale)
        throw ValidationError("generator '" + name_ +
                              "' derivative disagrees with finite differences");
    }
  }
}

const FDivergence& FDivergence::kl() {
  static const FDivergence d(
      "kl", [](double z) { return -std::log(z); },
      [](double z) { return -1.0 / z; }, true);
  return d;
}

const FDivergence& FDivergence::reverse_kl() {
  static const FDivergence d(
      "reverse_kl", [](double z) { return z * std::log(z); },
      [](double z) { return std::log(z) + 1.0; }, true);
  return d;
}

const FDivergence& FDivergence::chi2() {
  static const FDivergence d(
      "chi2", [](double z) { return (z - 1.0) * (z - 1.0); },
      [](double z) { return 2.0 * (z - 1.0); }, true);
  return d;
}

const FDivergence& FDivergence::hellinger2() {
  static const FDivergence d(
      "hellinger2",
      [](double z) {
        double s = std::sqrt(z) - 1.0;
        return s * s;
      },
      [](double z) { return 1.0 - 1.0 / std::sqrt(z); }, true);
  return d;
}

const FDivergence& FDivergence::linear() {
  static const FDivergence d(
      "linear", [](double z) { return z - 1.0; }, [](double) { return 1.0; },
      false);
  return d;
}

const std::vector<const FDivergence*>& FDivergence::builtins() {
  static const std::vector<const FDivergence*> all = {
      &kl(), &reverse_kl(), &chi2(), &hellinger2(), &linear()};
  return all;
}

const FDivergence& FDivergence::by_name(const std::string& name) {
  for (const FDivergence* f : builtins())
    if (f->name() == name) return *f;
  throw ValidationError("unknown divergence generator '" + name +
                        "' (built-ins: kl, reverse_kl, chi2, hellinger2, linear)");
}

double psi(const FDivergence& f, double z) {
  if (!f.smooth()) throw ValidationError("psi needs a smooth generator");
  if (!(z > 0)) throw ValidationError("psi needs z > 0");
  return f.f(z) - z * f.f_prime(z) + f.f_prime(1.0 / z);
}

DivergenceValue furstenberg_entropy_group(const FDivergence& f,
                                          const GeneratorMeasure& lambda,
                                          const SparseMeasure<FreeWord>& kappa) {
  return furstenberg_entropy_group(f, lambda.to_sparse(), kappa);
}

}  // namespace entlab
