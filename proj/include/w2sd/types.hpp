#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace w2sd {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// A score evaluation produced a NaN or infinity.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Denoising score-matching diverged (non-finite loss).
class TrainingDivergence : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace w2sd
