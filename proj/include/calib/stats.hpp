#pragma once

namespace calib {

/// Standard normal CDF.
double normal_cdf(double x);

/// Standard normal quantile function (inverse CDF).
///
/// Rational approximation refined with one Halley step against normal_cdf;
/// accurate to ~1e-15 over (0, 1). p must lie strictly inside (0, 1).
double normal_quantile(double p);

} // namespace calib
