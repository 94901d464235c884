#pragma once

#include <functional>
#include <stdexcept>
#include <string>

namespace disparity {

struct QuadratureResult {
  double value = 0.0;
  double abs_error = 0.0;
  int intervals = 0;
  bool converged = false;
};

/// Adaptive Gauss-Kronrod (7/15) integration of f over the finite interval
/// [a, b]. Subdivides the interval with the largest error estimate until the
/// summed estimate falls below abs_tol or max_intervals is reached.
QuadratureResult integrate(const std::function<double(double)>& f, double a, double b, double abs_tol = 1e-10,
                           int max_intervals = 2000);

/// Raised when an integral that must meet its tolerance does not.
class IntegrationError : public std::runtime_error {
 public:
  IntegrationError(const std::string& what, double achieved)
      : std::runtime_error(what + " (achieved error bound " + std::to_string(achieved) + ")"), achieved_(achieved) {}
  double achieved_error() const { return achieved_; }

 private:
  double achieved_;
};

}  // namespace disparity
