#pragma once

namespace disparity {

inline constexpr double kInvSqrt2Pi = 0.39894228040143267794;
inline constexpr double kInvSqrt2 = 0.70710678118654752440;

/// Standard normal density.
double normal_pdf(double z);
/// Standard normal CDF, computed from erfc so both tails keep relative accuracy.
double normal_cdf(double z);
/// Upper tail 1 - Phi(z).
double normal_sf(double z);
/// Inverse CDF for p in (0, 1). Acklam's rational approximation polished
/// with Halley steps against normal_cdf.
double normal_quantile(double p);
/// Inverse Mills ratio phi(z) / (1 - Phi(z)), stable for large z.
double inverse_mills(double z);

}  // namespace disparity
