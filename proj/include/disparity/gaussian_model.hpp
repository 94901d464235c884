#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "disparity/regression.hpp"

namespace disparity {

/// One group's signal model: S ~ N(mu, var_s), eps ~ N(0, var_eps), A = S + eps.
struct GaussianGroupSpec {
  double mu = 0.0;
  double var_s = 1.0;
  double var_eps = 1.0;

  /// Throws std::invalid_argument unless var_s > 0 and var_eps >= 0.
  void validate() const;
  double var_ability() const { return var_s + var_eps; }
  /// Same mean and total ability variance, with var_s = gamma * var_ability.
  GaussianGroupSpec with_gamma(double gamma) const;
};

struct ModelSpec {
  GaussianGroupSpec low;
  GaussianGroupSpec high;
  double creditworthy_threshold = 0.0;

  /// Throws std::invalid_argument unless both groups are valid and low.mu < high.mu.
  void validate() const;
};

/// Moments of S conditional on a one-sided truncation of A.
struct TruncatedCondParams {
  double mean = 0.0;
  double var = 0.0;
  double rho = 0.0;
  double trunc_point = 0.0;
};

enum class TprMethod { exact, normal_approx };

/// Share of ability variance carried by the score: var_s / (var_s + var_eps).
double gamma(const GaussianGroupSpec& g);

/// E[S | A = a] = (1 - gamma) * mu + gamma * a.
double expected_score_given_ability(const GaussianGroupSpec& g, double a);

/// Mean and variance of S | A > c:
///   E = mu + rho * sigma_s * lambda(z),  Var = var_s * (1 - rho^2 * lambda(z) * (lambda(z) - z)),
/// with z = (c - mu) / sigma_A and lambda the inverse Mills ratio.
TruncatedCondParams score_given_creditworthy(const GaussianGroupSpec& g, double c);

/// Mean and variance of S | A <= c (the mirror truncation).
TruncatedCondParams score_given_not_creditworthy(const GaussianGroupSpec& g, double c);

/// Exact density of S | A > c at s: phi_S(s) * P[A > c | S = s] / P[A > c].
double creditworthy_score_density(const GaussianGroupSpec& g, double s, double c);

/// P[S > cutoff | A > c]. `exact` integrates the joint normal as
/// int_c^inf P[S > cutoff | A = a] dPhi_A(a) to 1e-9 relative to P[A > c];
/// `normal_approx` uses the upper tail of a normal with the truncated moments.
/// Throws IntegrationError if the quadrature misses its tolerance.
double group_tpr(const GaussianGroupSpec& g, double cutoff, double c, TprMethod method = TprMethod::exact);

/// P[S > cutoff | A <= c].
double group_fpr(const GaussianGroupSpec& g, double cutoff, double c, TprMethod method = TprMethod::exact);

struct RatioPoint {
  double r = 0.0;
  double gamma_low = 0.0;
  double tpr_low = 0.0;
  double tpr_high = 0.0;
  double ratio = 0.0;
};

struct RatioCurve {
  std::vector<RatioPoint> points;
  /// Grid values whose gamma_L = r * gamma_H falls outside (0, 1].
  std::vector<double> skipped;
};

/// TPR_L / TPR_H as gamma_L = r * gamma_H varies with L's total ability variance fixed.
RatioCurve tpr_ratio_curve(const ModelSpec& spec, std::span<const double> gamma_ratio_grid, double cutoff,
                           TprMethod method = TprMethod::exact);

enum class ParityStatus { already_at_parity, solved, unreachable, non_bracketing };

struct ParityResult {
  double gamma_low = 0.0;
  double tpr_low = 0.0;
  double tpr_high = 0.0;
  ParityStatus status = ParityStatus::solved;

  double gap() const { return tpr_low - tpr_high; }
};

/// Bisection on gamma_L in (gamma_H, 1] for TPR_L = TPR_H, L's total ability
/// variance fixed. Stops when the bracket is narrower than 1e-10.
ParityResult solve_gamma_for_parity(const ModelSpec& spec, double cutoff, TprMethod method = TprMethod::exact);

struct MpcDiagnostics {
  OlsFit fit;  // coefficients: intercept, slope[, high-group dummy]
  std::size_t sample_size = 0;

  double intercept() const { return fit.coef[0]; }
  double slope() const { return fit.coef[1]; }
  double intercept_se() const { return fit.se[0]; }
  double slope_se() const { return fit.se[1]; }
};

/// Draws (S, A) from one group and regresses A on S.
MpcDiagnostics mpc_identity_check(const GaussianGroupSpec& g, std::size_t sample_size, std::uint64_t seed);

/// Draws a pooled L+H sample (H with probability high_share) and regresses A on
/// (1, S, 1{H}). coef[2] is the group coefficient.
MpcDiagnostics pooled_mpc_check(const ModelSpec& spec, std::size_t sample_size, double high_share,
                                std::uint64_t seed);

}  // namespace disparity
