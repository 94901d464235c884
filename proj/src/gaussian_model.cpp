#include "disparity/gaussian_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "disparity/normal.hpp"
#include "disparity/quadrature.hpp"
#include "disparity/random.hpp"

namespace disparity {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Standard-normal mass beyond 12 sigma is below 1e-32.
constexpr double kTailWidth = 12.0;
constexpr double kRelativeTolerance = 1e-9;

struct Moments {
  double mean;
  double var;
};

// Moments of X | Y > c (upper) or X | Y <= c (lower) for a joint normal with
// the given marginals and correlation.
Moments truncated_moments(double mu_x, double sd_x, double mu_y, double sd_y, double rho, double c, bool upper) {
  if (upper) {
    const double z = (c - mu_y) / sd_y;
    const double lambda = inverse_mills(z);
    return {mu_x + rho * sd_x * lambda, sd_x * sd_x * (1.0 - rho * rho * lambda * (lambda - z))};
  }
  // Reflect (X, Y) -> (-X, -Y) and reuse the upper case.
  const Moments m = truncated_moments(-mu_x, sd_x, -mu_y, sd_y, rho, -c, true);
  return {-m.mean, m.var};
}

TruncatedCondParams truncated_params(const GaussianGroupSpec& g, double c, bool upper) {
  g.validate();
  if (!std::isfinite(c)) throw std::invalid_argument("truncation point must be finite");
  const double rho = std::sqrt(gamma(g));
  const Moments m = truncated_moments(g.mu, std::sqrt(g.var_s), g.mu, std::sqrt(g.var_ability()), rho, c, upper);
  return {m.mean, m.var, rho, c};
}

// P[S > cutoff, A in the conditioning side of c] / P[A in that side].
double conditional_exceedance(const GaussianGroupSpec& g, double cutoff, double c, bool upper) {
  g.validate();
  const double sd_a = std::sqrt(g.var_ability());
  const double z_c = (c - g.mu) / sd_a;
  const double side_mass = upper ? normal_sf(z_c) : normal_cdf(z_c);
  if (!(side_mass > 0.0)) throw std::domain_error("conditioning event has zero probability");
  if (cutoff == -kInf) return 1.0;
  if (cutoff == kInf) return 0.0;

  if (g.var_eps == 0.0) {
    // S = A.
    const double z_s = (cutoff - g.mu) / sd_a;
    if (upper) return normal_sf(std::max(z_s, z_c)) / side_mass;
    return std::max(0.0, normal_cdf(z_c) - normal_cdf(z_s)) / side_mass;
  }

  const double gamma_g = gamma(g);
  const double sd_cond = std::sqrt(g.var_s * g.var_eps / g.var_ability());
  // Integrate over the standardized ability z; S | A ~ N(mu + gamma * sd_a * z, sd_cond^2).
  auto integrand = [&](double z) {
    return normal_pdf(z) * normal_sf((cutoff - g.mu - gamma_g * sd_a * z) / sd_cond) / side_mass;
  };
  double lo, hi;
  if (upper) {
    lo = std::isfinite(z_c) ? z_c : -kTailWidth;
    hi = std::max(lo, 0.0) + kTailWidth;
  } else {
    hi = std::isfinite(z_c) ? z_c : kTailWidth;
    lo = std::min(hi, 0.0) - kTailWidth;
  }
  const QuadratureResult q = integrate(integrand, lo, hi, kRelativeTolerance, 4000);
  if (!q.converged) throw IntegrationError("conditional exceedance integral did not converge", q.abs_error);
  return std::clamp(q.value, 0.0, 1.0);
}

double approx_exceedance(const GaussianGroupSpec& g, double cutoff, double c, bool upper) {
  if (cutoff == -kInf) return 1.0;
  if (cutoff == kInf) return 0.0;
  const TruncatedCondParams p = truncated_params(g, c, upper);
  if (p.var <= 0.0) return cutoff < p.mean ? 1.0 : 0.0;
  return normal_sf((cutoff - p.mean) / std::sqrt(p.var));
}

}  // namespace

void GaussianGroupSpec::validate() const {
  if (!std::isfinite(mu)) throw std::invalid_argument("group mean must be finite");
  if (!(var_s > 0.0) || !std::isfinite(var_s)) throw std::invalid_argument("score variance must be positive");
  if (!(var_eps >= 0.0) || !std::isfinite(var_eps)) throw std::invalid_argument("residual variance must be non-negative");
}

GaussianGroupSpec GaussianGroupSpec::with_gamma(double g) const {
  if (!(g > 0.0 && g <= 1.0)) throw std::invalid_argument("gamma must lie in (0, 1]");
  const double total = var_ability();
  return {mu, g * total, g == 1.0 ? 0.0 : (1.0 - g) * total};
}

void ModelSpec::validate() const {
  low.validate();
  high.validate();
  if (!(low.mu < high.mu)) throw std::invalid_argument("model requires low.mu < high.mu");
}

double gamma(const GaussianGroupSpec& g) { return g.var_s / (g.var_s + g.var_eps); }

double expected_score_given_ability(const GaussianGroupSpec& g, double a) {
  const double w = gamma(g);
  return (1.0 - w) * g.mu + w * a;
}

TruncatedCondParams score_given_creditworthy(const GaussianGroupSpec& g, double c) {
  return truncated_params(g, c, true);
}

TruncatedCondParams score_given_not_creditworthy(const GaussianGroupSpec& g, double c) {
  return truncated_params(g, c, false);
}

double creditworthy_score_density(const GaussianGroupSpec& g, double s, double c) {
  g.validate();
  const double sd_s = std::sqrt(g.var_s);
  const double mass = normal_sf((c - g.mu) / std::sqrt(g.var_ability()));
  const double marginal = normal_pdf((s - g.mu) / sd_s) / sd_s;
  if (g.var_eps == 0.0) return s > c ? marginal / mass : 0.0;
  return marginal * normal_sf((c - s) / std::sqrt(g.var_eps)) / mass;
}

double group_tpr(const GaussianGroupSpec& g, double cutoff, double c, TprMethod method) {
  return method == TprMethod::exact ? conditional_exceedance(g, cutoff, c, true) : approx_exceedance(g, cutoff, c, true);
}

double group_fpr(const GaussianGroupSpec& g, double cutoff, double c, TprMethod method) {
  return method == TprMethod::exact ? conditional_exceedance(g, cutoff, c, false)
                                    : approx_exceedance(g, cutoff, c, false);
}

RatioCurve tpr_ratio_curve(const ModelSpec& spec, std::span<const double> gamma_ratio_grid, double cutoff,
                           TprMethod method) {
  spec.low.validate();
  spec.high.validate();
  const double gamma_high = gamma(spec.high);
  const double tpr_high = group_tpr(spec.high, cutoff, spec.creditworthy_threshold, method);
  RatioCurve curve;
  for (const double r : gamma_ratio_grid) {
    const double gamma_low = r * gamma_high;
    if (!(gamma_low > 0.0 && gamma_low <= 1.0)) {
      curve.skipped.push_back(r);
      continue;
    }
    const double tpr_low = group_tpr(spec.low.with_gamma(gamma_low), cutoff, spec.creditworthy_threshold, method);
    curve.points.push_back({r, gamma_low, tpr_low, tpr_high, tpr_low / tpr_high});
  }
  return curve;
}

ParityResult solve_gamma_for_parity(const ModelSpec& spec, double cutoff, TprMethod method) {
  spec.low.validate();
  spec.high.validate();
  const double c = spec.creditworthy_threshold;
  const double gamma_high = gamma(spec.high);
  const double tpr_high = group_tpr(spec.high, cutoff, c, method);
  auto tpr_low_at = [&](double g) { return group_tpr(spec.low.with_gamma(g), cutoff, c, method); };

  ParityResult out;
  out.tpr_high = tpr_high;
  out.gamma_low = gamma_high;
  out.tpr_low = tpr_low_at(gamma_high);
  if (out.tpr_low >= tpr_high) {
    out.status = ParityStatus::already_at_parity;
    return out;
  }
  if (gamma_high >= 1.0) {
    out.status = ParityStatus::non_bracketing;
    return out;
  }
  const double tpr_at_one = tpr_low_at(1.0);
  if (tpr_at_one < tpr_high) {
    out.gamma_low = 1.0;
    out.tpr_low = tpr_at_one;
    out.status = ParityStatus::unreachable;
    return out;
  }
  double lo = gamma_high;  // TPR_L < TPR_H
  double hi = 1.0;         // TPR_L >= TPR_H
  double tpr_hi = tpr_at_one;
  while (hi - lo > 1e-10) {
    const double mid = 0.5 * (lo + hi);
    const double t = tpr_low_at(mid);
    if (t < tpr_high) {
      lo = mid;
    } else {
      hi = mid;
      tpr_hi = t;
    }
  }
  out.gamma_low = hi;
  out.tpr_low = tpr_hi;
  out.status = ParityStatus::solved;
  return out;
}

MpcDiagnostics mpc_identity_check(const GaussianGroupSpec& g, std::size_t sample_size, std::uint64_t seed) {
  g.validate();
  Rng rng(seed);
  const double sd_s = std::sqrt(g.var_s);
  const double sd_eps = std::sqrt(g.var_eps);
  const auto n = static_cast<Eigen::Index>(sample_size);
  Eigen::MatrixXd design(n, 2);
  Eigen::VectorXd ability(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double s = rng.normal(g.mu, sd_s);
    design(i, 0) = 1.0;
    design(i, 1) = s;
    ability(i) = s + sd_eps * rng.normal();
  }
  return {ols(design, ability), sample_size};
}

MpcDiagnostics pooled_mpc_check(const ModelSpec& spec, std::size_t sample_size, double high_share,
                                std::uint64_t seed) {
  spec.low.validate();
  spec.high.validate();
  if (!(high_share > 0.0 && high_share < 1.0)) throw std::invalid_argument("high_share must lie in (0, 1)");
  Rng rng(seed);
  const auto n = static_cast<Eigen::Index>(sample_size);
  Eigen::MatrixXd design(n, 3);
  Eigen::VectorXd ability(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const bool high = rng.uniform() < high_share;
    const GaussianGroupSpec& g = high ? spec.high : spec.low;
    const double s = rng.normal(g.mu, std::sqrt(g.var_s));
    design(i, 0) = 1.0;
    design(i, 1) = s;
    design(i, 2) = high ? 1.0 : 0.0;
    ability(i) = s + std::sqrt(g.var_eps) * rng.normal();
  }
  return {ols(design, ability), sample_size};
}

}  // namespace disparity
