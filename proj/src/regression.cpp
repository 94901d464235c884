#include "disparity/regression.hpp"

#include <stdexcept>

namespace disparity {

OlsFit ols(const Eigen::MatrixXd& design, const Eigen::VectorXd& response) {
  const auto n = design.rows();
  const auto p = design.cols();
  if (n != response.size()) throw std::invalid_argument("ols: design and response differ in length");
  if (n <= p) throw std::invalid_argument("ols: need more rows than columns");
  if (Eigen::ColPivHouseholderQR<Eigen::MatrixXd>(design).rank() < p)
    throw std::invalid_argument("ols: rank-deficient design");
  const Eigen::MatrixXd gram = design.transpose() * design;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
  if (ldlt.info() != Eigen::Success || ldlt.rcond() < 1e-14) throw std::invalid_argument("ols: rank-deficient design");
  OlsFit fit;
  fit.coef = ldlt.solve(design.transpose() * response);
  const Eigen::VectorXd resid = response - design * fit.coef;
  const double rss = resid.squaredNorm();
  fit.residual_variance = rss / static_cast<double>(n - p);
  const Eigen::MatrixXd cov = ldlt.solve(Eigen::MatrixXd::Identity(p, p)) * fit.residual_variance;
  fit.se = cov.diagonal().cwiseMax(0.0).cwiseSqrt();
  const double centered = (response.array() - response.mean()).square().sum();
  fit.r_squared = centered > 0.0 ? 1.0 - rss / centered : 1.0;
  return fit;
}

}  // namespace disparity
