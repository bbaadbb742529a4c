#pragma once

#include <cmath>
#include <cstdio>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "mgof/alternatives.hpp"
#include "mgof/cell_function.hpp"
#include "mgof/errors.hpp"
#include "mgof/growth.hpp"
#include "mgof/poisson_oracle.hpp"
#include "mgof/rates.hpp"

namespace mgof {

enum class RegimeTag { VerySparse, Sparse, Dense };

inline std::string_view to_string(RegimeTag r) {
  switch (r) {
    case RegimeTag::VerySparse:
      return "very-sparse";
    case RegimeTag::Sparse:
      return "sparse";
    case RegimeTag::Dense:
      return "dense";
  }
  return "sparse";
}

struct Regime {
  RegimeTag tag;
  std::optional<double> lambda;  // limit of lambda_n in the sparse case
};

inline constexpr double kSparseIndexTol = 1e-12;

inline Regime classify_regime(const GrowthLaw& g) {
  if (std::abs(g.q() - 1.0) <= kSparseIndexTol) return {RegimeTag::Sparse, 1.0 / g.c()};
  return {g.q() < 1.0 ? RegimeTag::Dense : RegimeTag::VerySparse, std::nullopt};
}

// tau_n: either a constant in (0, 1/2] or a sequence tending to 0.
class TauSpec {
 public:
  static TauSpec constant(double value) {
    if (!(value > 0.0 && value <= 0.5)) throw InvalidArgument("constant tau must lie in (0, 1/2]");
    return TauSpec(value);
  }
  static TauSpec vanishing() { return TauSpec(std::nullopt); }

  bool is_vanishing() const noexcept { return !value_; }
  double value() const {
    if (!value_) throw InvalidArgument("vanishing tau has no constant value");
    return *value_;
  }

 private:
  explicit TauSpec(std::optional<double> v) : value_(v) {}
  std::optional<double> value_;
};

struct IareOptions {
  double damping = 0.5;
  double tol = 1e-10;
  int max_iter = 200;
};

using RhoFunction = std::function<double(double)>;

// e = lim k/n where k = n (2 tau rho_h^2(lambda_n) / rho_psi^2(lambda_k))^{1/(2-q)}. Both
// cell means follow the continuous law lambda(x) = x / (c x^q).
inline double closed_form_iare(const RhoFunction& rho_h, const RhoFunction& rho_psi, const GrowthLaw& g,
                               const TauSpec& tau, std::uint64_t n, const IareOptions& opt = {}) {
  if (tau.is_vanishing()) return 0.0;
  if (n < 1) throw InvalidArgument("n must be >= 1");
  const double nn = static_cast<double>(n);
  const double power = 1.0 / (2.0 - g.q());
  const double rh = rho_h(g.lambda_continuous(nn));
  const double num = 2.0 * tau.value() * rh * rh;
  auto F = [&](double k) {
    const double rp = rho_psi(g.lambda_continuous(k));
    if (!(std::abs(rp) > 1e-12)) throw DegenerateVariance("rho(psi, lambda_k) vanishes on the iteration path");
    return nn * std::pow(num / (rp * rp), power);
  };
  double k = nn;
  for (int it = 0; it < opt.max_iter; ++it) {
    const double next = (1.0 - opt.damping) * k + opt.damping * F(k);
    if (std::abs(next - k) <= opt.tol * std::max(1.0, std::abs(k))) return F(next) / nn;
    k = next;
  }
  throw NonConvergence("IARE fixed point did not converge in " + std::to_string(opt.max_iter) + " iterations");
}

inline RhoFunction oracle_rho(const CellFunction& h) {
  return [h](double lambda) {
    const auto m = moment_summary(h, lambda);
    require_nondegenerate(m, h);
    return m.rho;
  };
}

inline double closed_form_iare(const CellFunction& h, const CellFunction& psi, const GrowthLaw& g,
                               const TauSpec& tau, std::uint64_t n, const IareOptions& opt = {}) {
  return closed_form_iare(oracle_rho(h), oracle_rho(psi), g, tau, n, opt);
}

// Pitman efficiency rho^2(h, lambda) / rho^2(psi, lambda).
inline double pitman_efficiency(const CellFunction& h, const CellFunction& psi, double lambda) {
  const double rh = oracle_rho(h)(lambda);
  const double rp = oracle_rho(psi)(lambda);
  if (!(std::abs(rp) > 1e-12)) throw DegenerateVariance("rho(psi) vanishes");
  return (rh * rh) / (rp * rp);
}

// ---------------------------------------------------------------------------------------------
// Verdict tables.

struct PsiDivergence {
  double d;
};
struct PsiIndicator {
  unsigned r;
};
struct PsiCollision {};

using PsiDescriptor = std::variant<PsiDivergence, PsiIndicator, PsiCollision>;

inline PsiDescriptor describe(const CellFunction& psi) {
  if (auto d = psi.divergence_index()) return PsiDivergence{*d};
  if (const auto* ind = std::get_if<Indicator>(&psi.kind())) return PsiIndicator{ind->r};
  if (psi.is<CollisionCell>()) return PsiCollision{};
  throw InvalidArgument("no verdict table covers the custom kernel '" + psi.name() + "'");
}

// Finite exponential moment of |psi(xi)|.
inline bool cramer_flag(const PsiDescriptor& psi) {
  if (const auto* pd = std::get_if<PsiDivergence>(&psi)) return pd->d > -1.0 && pd->d <= 0.0;
  return true;
}

enum class VerdictValue { Greater, One, Zero, Open };

inline std::string_view to_string(VerdictValue v) {
  switch (v) {
    case VerdictValue::Greater:
      return "e>1";
    case VerdictValue::One:
      return "e=1";
    case VerdictValue::Zero:
      return "e=0";
    case VerdictValue::Open:
      return "open";
  }
  return "open";
}

struct Verdict {
  VerdictValue value = VerdictValue::Open;
  std::string theorem;
  std::vector<ConditionCheck> conditions;

  std::string verdict() const { return std::string(to_string(value)); }
};

namespace detail {

inline std::string fmt_exp(double x) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

inline std::string eps_below(double exponent) { return "eps(n) << n^{" + fmt_exp(exponent) + "}"; }

}  // namespace detail

// Chi-square test against psi: which theorem decides e(chi^2, psi) for this growth law and
// rate family. Exponent ties never resolve a condition.
inline Verdict theorem_verdict(const PsiDescriptor& psi, const GrowthLaw& g, const RateFamily& fam) {
  const double q = g.q();
  const double a = g.lambda_exponent();
  const double e = -fam.gamma();
  const bool cramer = cramer_flag(psi);
  const auto* pd = std::get_if<PsiDivergence>(&psi);
  const auto* ind = std::get_if<PsiIndicator>(&psi);
  const bool loglik = pd && pd->d == 0.0;

  Verdict v;
  auto check = [&](std::string text, RateStatus s) {
    v.conditions.push_back({std::move(text), s});
    return s == RateStatus::Satisfied;
  };
  auto decide = [&](VerdictValue value, std::string theorem) {
    v.value = value;
    v.theorem = std::move(theorem);
    return v;
  };
  auto open = [&](std::string band) {
    v.conditions.push_back({"unresolved: " + band, RateStatus::Indeterminate});
    return decide(VerdictValue::Open, "Conclusion (open problem)");
  };

  switch (classify_regime(g).tag) {
    case RegimeTag::Sparse: {
      check("lambda_n -> lambda in (0, inf)", RateStatus::Satisfied);
      check(std::string("Cramer condition for psi: ") + (cramer ? "holds" : "fails"),
            cramer ? RateStatus::Satisfied : RateStatus::Violated);
      const std::string greater_cite = loglik ? "Corollary 2.1" : "Theorem 2.2(i)";
      const std::string zero_cite = loglik ? "Corollary 2.1" : "Theorem 2.2(ii)";
      if (pd && pd->d != 1.0) {
        const double ds = std::max(1.0, pd->d);
        if (check(detail::eps_below(-ds / (1.0 + 2.0 * ds)), much_less(e, -ds / (1.0 + 2.0 * ds)))) {
          return decide(VerdictValue::Greater, greater_cite);
        }
      }
      if (cramer) {
        if (check(std::string(condition_text::kBelowCubeRoot), much_less(e, -1.0 / 3.0))) {
          return decide(VerdictValue::Greater, greater_cite);
        }
        if (check(std::string(condition_text::kAboveCubeRootLog), much_greater(e, -1.0 / 3.0))) {
          return decide(VerdictValue::Zero, zero_cite);
        }
        return open("sparse band c1 n^{-1/3} <= eps(n) <= c2 n^{-1/3} log^{2/3} n");
      }
      if (pd && pd->d == 1.0) return open("psi is the chi-square kernel itself; no sparse verdict is stated");
      return open("sparse rates outside eps(n) << n^{-d*/(1+2d*)} for a non-Cramer kernel");
    }

    case RegimeTag::VerySparse: {
      check("lambda_n -> 0, n lambda_n -> inf", RateStatus::Satisfied);
      if (ind || std::holds_alternative<PsiCollision>(psi)) {
        if (ind && ind->r > 2) return open("count statistics mu_r with r > 2 are not covered");
        if (check(std::string(condition_text::kBelowCubeRoot), much_less(e, -1.0 / 3.0))) {
          return decide(VerdictValue::One, "Theorem 2.4");
        }
        return open("very sparse count statistics with eps(n) not << n^{-1/3}");
      }
      const double d = pd->d;
      const bool cubic = check(std::string(condition_text::kCubicOccupancy), diverges(1.0 + 3.0 * a));
      if (d < 0.5) {
        const double ds = std::max(0.0, d);
        const double lam_bound = -(1.0 - 2.0 * ds) / 6.0;
        const bool lam_ok = check("lambda_n >> n^{" + detail::fmt_exp(lam_bound) + "}", much_greater(a, lam_bound));
        if (cubic && lam_ok) {
          if (check(std::string(condition_text::kBelowCubeRoot), much_less(e, -1.0 / 3.0))) {
            return decide(VerdictValue::One, loglik ? "Corollary 2.2" : "Theorem 2.3(A)(i)");
          }
          const bool above = check(std::string(condition_text::kAboveSparseBandLog), much_greater(e, -(1.0 + a) / 3.0));
          const bool below = check(std::string(condition_text::kBelowQuarter), much_less(e, -(1.0 + 2.0 * a) / 4.0));
          if (above && below) return decide(VerdictValue::Zero, loglik ? "Corollary 2.2" : "Theorem 2.3(A)(ii)");
        }
        return open("very sparse, d in (-1, 1/2): n^{-1/3} <= eps(n) <= (n lambda_n)^{-1/3} or "
                    "eps(n) >= (n lambda_n^2)^{-1/4}, or lambda_n outside the covered range");
      }
      const double bound = ((1.0 - d) * a - d) / (2.0 * d + 1.0);
      const bool rate_ok = check(detail::eps_below(bound), much_less(e, bound));
      if (cubic && rate_ok) return decide(VerdictValue::One, "Theorem 2.3(B)");
      return open("very sparse, d >= 1/2: eps(n) >= (lambda_n^{1-d} / n^d)^{1/(2d+1)}");
    }

    case RegimeTag::Dense: {
      check("lambda_n -> inf", RateStatus::Satisfied);
      if (pd) {
        if (check(std::string(condition_text::kBelowDenseBand), much_less(e, -(1.0 + 2.0 * a) / 3.0))) {
          return decide(VerdictValue::One, "Theorem 2.5(i)");
        }
        if (loglik) {
          const bool few = check(std::string(condition_text::kFewCells), much_less(q, 3.0 / 8.0));
          const bool in_alt = check("family in F_alt", both(diverges(fam.nabla_exponent()),
                                                            vanishes(fam.max_term_exponent())));
          if (few && in_alt) return decide(VerdictValue::One, "Theorem 2.5(ii)");
        }
      }
      return open("dense: lambda_n << N, or lambda_n >> N with (n lambda_n)^{-1/3} <= eps(n) << (n lambda_n^2)^{-1/4}");
    }
  }
  return v;
}

inline Verdict theorem_verdict(const CellFunction& psi, const GrowthLaw& g, const RateFamily& fam) {
  return theorem_verdict(describe(psi), g, fam);
}

}  // namespace mgof
