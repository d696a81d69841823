#pragma once

#include <Eigen/Dense>

#include "entlab/errors.hpp"
#include "entlab/free_word.hpp"
#include "entlab/sparse_measure.hpp"

namespace entlab {

// Probability measure supported on the 2d generators a_{+-1},...,a_{+-d} of
// F_d. Storage layout is [p_1 .. p_d, p_{-1} .. p_{-d}].
class GeneratorMeasure {
 public:
  GeneratorMeasure(int d, Eigen::VectorXd masses);

  static GeneratorMeasure uniform(int d);
  // symmetric measure from the positive half (p_pos sums to 1/2)
  static GeneratorMeasure symmetric(int d, const Eigen::VectorXd& p_pos);

  int rank() const { return d_; }
  const Eigen::VectorXd& masses() const { return p_; }

  // index in {-d..-1, 1..d}
  double p(int index) const { return p_[slot(index)]; }

  bool symmetric_within(double tol = 1e-12) const;
  Eigen::VectorXd positive_half() const { return p_.head(d_); }

  SparseMeasure<FreeWord> to_sparse() const;

  int slot(int index) const {
    if (index == 0 || index < -d_ || index > d_)
      throw ValidationError("generator index out of range");
    return index > 0 ? index - 1 : d_ + (-index) - 1;
  }
  // inverse of slot(): generator index at storage position s
  int index_at(int s) const { return s < d_ ? s + 1 : -(s - d_ + 1); }

 private:
  int d_;
  Eigen::VectorXd p_;
};

}  // namespace entlab
