#pragma once

#include <Eigen/Dense>

namespace disparity {

/// Ordinary least squares with classical (homoskedastic) standard errors.
struct OlsFit {
  Eigen::VectorXd coef;
  Eigen::VectorXd se;
  double residual_variance = 0.0;
  double r_squared = 0.0;
};

/// `design` must already contain an intercept column if one is wanted.
/// Throws std::invalid_argument when rows <= cols or the design is rank deficient.
OlsFit ols(const Eigen::MatrixXd& design, const Eigen::VectorXd& response);

}  // namespace disparity
