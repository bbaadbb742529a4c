#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "mgof/errors.hpp"

namespace mgof {

// Regularly varying cell-count law N(x) ~ c x^q, q in (0, 2).
class GrowthLaw {
 public:
  GrowthLaw(double c, double q) : c_(c), q_(q) {
    if (!(c > 0.0) || !std::isfinite(c)) throw InvalidArgument("growth law needs c > 0");
    if (!(q > 0.0 && q < 2.0)) throw InvalidArgument("growth law index q must lie in (0, 2)");
  }

  double c() const noexcept { return c_; }
  double q() const noexcept { return q_; }

  // Integer cell count used by every finite-sample computation: max(2, round(c x^q)).
  std::uint64_t cells(double x) const {
    const double raw = std::round(c_ * std::pow(x, q_));
    return static_cast<std::uint64_t>(std::max(2.0, raw));
  }

  double cells_continuous(double x) const { return c_ * std::pow(x, q_); }

  double lambda(std::uint64_t n) const { return static_cast<double>(n) / static_cast<double>(cells(n)); }

  double lambda_continuous(double x) const { return x / cells_continuous(x); }

  // Exponent a with lambda_n = Theta(n^a).
  double lambda_exponent() const noexcept { return 1.0 - q_; }

 private:
  double c_;
  double q_;
};

}  // namespace mgof
