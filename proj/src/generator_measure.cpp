#include "entlab/generator_measure.hpp"

#include <cmath>

namespace entlab {

GeneratorMeasure::GeneratorMeasure(int d, Eigen::VectorXd masses)
    : d_(d), p_(std::move(masses)) {
  if (d < 1) throw ValidationError("generator measure needs rank >= 1");
  if (p_.size() != 2 * d)
    throw ValidationError("generator measure needs 2d masses, got " +
                          std::to_string(p_.size()));
  for (int i = 0; i < p_.size(); ++i)
    if (!(p_[i] > 0.0))
      throw ValidationError("generator masses must be strictly positive");
  if (std::abs(p_.sum() - 1.0) > kProbabilityTol)
    throw ValidationError("generator masses must sum to 1 within 1e-12");
}

GeneratorMeasure GeneratorMeasure::uniform(int d) {
  return GeneratorMeasure(d, Eigen::VectorXd::Constant(2 * d, 1.0 / (2 * d)));
}

GeneratorMeasure GeneratorMeasure::symmetric(int d, const Eigen::VectorXd& p_pos) {
  if (p_pos.size() != d)
    throw ValidationError("symmetric generator measure needs d positive-half masses");
  Eigen::VectorXd full(2 * d);
  full.head(d) = p_pos;
  full.tail(d) = p_pos;
  return GeneratorMeasure(d, std::move(full));
}

bool GeneratorMeasure::symmetric_within(double tol) const {
  for (int j = 0; j < d_; ++j)
    if (std::abs(p_[j] - p_[d_ + j]) > tol) return false;
  return true;
}

SparseMeasure<FreeWord> GeneratorMeasure::to_sparse() const {
  SparseMeasure<FreeWord> out;
  for (int s = 0; s < 2 * d_; ++s)
    out.add(FreeWord::generator(d_, index_at(s)), p_[s]);
  return out;
}

}  // namespace entlab
