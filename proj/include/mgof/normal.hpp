#pragma once

#include <cmath>

#include <boost/math/distributions/normal.hpp>

namespace mgof {

inline double normal_cdf(double x) {
  static const boost::math::normal_distribution<double> standard;
  return boost::math::cdf(standard, x);
}

inline double normal_quantile(double p) {
  static const boost::math::normal_distribution<double> standard;
  return boost::math::quantile(standard, p);
}

// Upper-alpha point: Phi^{-1}(1 - alpha).
inline double normal_upper_point(double alpha) {
  static const boost::math::normal_distribution<double> standard;
  return boost::math::quantile(boost::math::complement(standard, alpha));
}

// Asymptotic power of a level-alpha symmetric test with efficiency functional rho at
// contiguity index nabla: Phi(nabla |rho| / sqrt(2) - omega_alpha).
inline double asymptotic_power(double nabla, double rho, double alpha) {
  return normal_cdf(nabla * std::abs(rho) / std::sqrt(2.0) - normal_upper_point(alpha));
}

}  // namespace mgof
