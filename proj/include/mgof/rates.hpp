#pragma once

#include <cmath>
#include <string>
#include <string_view>

namespace mgof {

// Asymptotic comparisons between power-law sequences a_n = Theta(n^x) are decided on
// exponents alone. Ties cannot be resolved without the slowly varying factors.
enum class RateStatus { Satisfied, Violated, Indeterminate };

inline constexpr double kExponentTieTol = 1e-12;

inline std::string_view to_string(RateStatus s) {
  switch (s) {
    case RateStatus::Satisfied:
      return "satisfied";
    case RateStatus::Violated:
      return "violated";
    case RateStatus::Indeterminate:
      return "indeterminate";
  }
  return "indeterminate";
}

// n^lhs << n^rhs.
inline RateStatus much_less(double lhs, double rhs) {
  if (std::abs(lhs - rhs) <= kExponentTieTol) return RateStatus::Indeterminate;
  return lhs < rhs ? RateStatus::Satisfied : RateStatus::Violated;
}

// n^lhs >> n^rhs (possibly up to a logarithmic factor on the right: a tie then stays
// indeterminate, never satisfied).
inline RateStatus much_greater(double lhs, double rhs) { return much_less(rhs, lhs); }

// n^x -> infinity.
inline RateStatus diverges(double x) { return much_greater(x, 0.0); }

// n^x -> 0.
inline RateStatus vanishes(double x) { return much_less(x, 0.0); }

inline RateStatus both(RateStatus a, RateStatus b) {
  if (a == RateStatus::Violated || b == RateStatus::Violated) return RateStatus::Violated;
  if (a == RateStatus::Indeterminate || b == RateStatus::Indeterminate) return RateStatus::Indeterminate;
  return RateStatus::Satisfied;
}

struct ConditionCheck {
  std::string text;
  RateStatus status;

  bool satisfied() const noexcept { return status == RateStatus::Satisfied; }
};

}  // namespace mgof
