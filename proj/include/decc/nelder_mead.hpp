#pragma once

#include <Eigen/Dense>

#include <functional>

namespace decc {

struct NelderMeadOptions {
  int max_iterations = 500;
  /// Stop once max - min of the objective over the simplex falls below this.
  double f_tolerance = 1e-6;
};

struct NelderMeadResult {
  Eigen::VectorXd x;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Derivative-free simplex minimisation with the standard reflection,
/// expansion, contraction and shrink coefficients (1, 2, 1/2, 1/2). The
/// initial simplex is x0 plus one axis step per coordinate.
NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& objective,
                             const Eigen::VectorXd& x0, const Eigen::VectorXd& steps,
                             NelderMeadOptions options = {});

}  // namespace decc
