#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "mgof/errors.hpp"

namespace mgof {

// Cressie-Read member psi_d, d > -1, d != 0.
struct PowerDivergence {
  double d;
};

// psi_0(x) = 2 x log(x / lambda).
struct LogLikelihood {};

// (x - lambda)^2 / lambda.
struct ChiSquareCell {};

// I{x = r}; summing over cells gives mu_r.
struct Indicator {
  unsigned r;
};

// (x - 1) I{x >= 1}; summing over cells gives the collision count C_n.
struct CollisionCell {};

enum class TailRule { Zero, HoldLast, Linear };

// User-supplied kernel. Must be total on the nonnegative integers.
struct Custom {
  std::string name;
  std::function<double(std::uint64_t, double)> fn;
};

// The per-cell function h of a symmetric statistic S = sum_m h(eta_m). Evaluation takes the
// null cell mean lambda = n / N because the divergence kernels are scaled by it.
class CellFunction {
 public:
  using Kind = std::variant<PowerDivergence, LogLikelihood, ChiSquareCell, Indicator, CollisionCell, Custom>;

  static constexpr double kMinAbsD = 1e-9;

  static CellFunction power_divergence(double d) {
    if (!(d > -1.0) || !std::isfinite(d)) {
      throw InvalidArgument("power divergence index must satisfy d > -1");
    }
    if (std::abs(d) < kMinAbsD) {
      throw InvalidArgument("power divergence index too close to 0; use the log-likelihood kernel");
    }
    return CellFunction(PowerDivergence{d});
  }
  static CellFunction log_likelihood() { return CellFunction(LogLikelihood{}); }
  static CellFunction chi_square() { return CellFunction(ChiSquareCell{}); }
  static CellFunction freeman_tukey() { return CellFunction(PowerDivergence{-0.5}); }
  static CellFunction indicator(unsigned r) { return CellFunction(Indicator{r}); }
  static CellFunction collision() { return CellFunction(CollisionCell{}); }

  static CellFunction custom(std::string name, std::function<double(std::uint64_t, double)> fn) {
    if (!fn) throw InvalidArgument("custom cell function is empty");
    return CellFunction(Custom{std::move(name), std::move(fn)});
  }

  // Table of values on 0..K; beyond K the tail rule applies.
  static CellFunction table(std::string name, std::vector<double> values, TailRule tail) {
    if (values.empty()) throw InvalidArgument("custom table must not be empty");
    if (tail == TailRule::Linear && values.size() < 2) {
      throw InvalidArgument("linear tail rule needs at least two table entries");
    }
    for (double v : values) {
      if (!std::isfinite(v)) throw InvalidArgument("custom table contains a non-finite value");
    }
    auto shared = std::make_shared<const std::vector<double>>(std::move(values));
    return custom(std::move(name), [shared, tail](std::uint64_t k, double) {
      const auto& t = *shared;
      if (k < t.size()) return t[k];
      switch (tail) {
        case TailRule::Zero:
          return 0.0;
        case TailRule::HoldLast:
          return t.back();
        case TailRule::Linear: {
          const double slope = t.back() - t[t.size() - 2];
          return t.back() + slope * static_cast<double>(k - (t.size() - 1));
        }
      }
      return 0.0;
    });
  }

  double operator()(std::uint64_t k, double lambda) const {
    const double x = static_cast<double>(k);
    return std::visit(
        [&](const auto& h) -> double {
          using T = std::decay_t<decltype(h)>;
          if constexpr (std::is_same_v<T, PowerDivergence>) {
            // x [(x/lambda)^d - 1] -> 0 as x -> 0 for d > -1.
            if (k == 0) return 0.0;
            return 2.0 / (h.d * (h.d + 1.0)) * x * std::expm1(h.d * std::log(x / lambda));
          } else if constexpr (std::is_same_v<T, LogLikelihood>) {
            if (k == 0) return 0.0;
            return 2.0 * x * std::log(x / lambda);
          } else if constexpr (std::is_same_v<T, ChiSquareCell>) {
            const double u = x - lambda;
            return u * u / lambda;
          } else if constexpr (std::is_same_v<T, Indicator>) {
            return k == h.r ? 1.0 : 0.0;
          } else if constexpr (std::is_same_v<T, CollisionCell>) {
            return k >= 1 ? x - 1.0 : 0.0;
          } else {
            return h.fn(k, lambda);
          }
        },
        kind_);
  }

  const Kind& kind() const noexcept { return kind_; }

  template <class T>
  bool is() const noexcept {
    return std::holds_alternative<T>(kind_);
  }

  // Power-divergence index when the kernel belongs to the Cressie-Read family
  // (chi-square is d = 1, log-likelihood d = 0).
  std::optional<double> divergence_index() const {
    if (const auto* pd = std::get_if<PowerDivergence>(&kind_)) return pd->d;
    if (is<LogLikelihood>()) return 0.0;
    if (is<ChiSquareCell>()) return 1.0;
    return std::nullopt;
  }

  std::string name() const {
    return std::visit(
        [](const auto& h) -> std::string {
          using T = std::decay_t<decltype(h)>;
          if constexpr (std::is_same_v<T, PowerDivergence>) {
            if (h.d == -0.5) return "freeman-tukey";
            std::ostringstream os;
            os.precision(15);
            os << "pd:" << h.d;
            return os.str();
          } else if constexpr (std::is_same_v<T, LogLikelihood>) {
            return "loglik";
          } else if constexpr (std::is_same_v<T, ChiSquareCell>) {
            return "chisq";
          } else if constexpr (std::is_same_v<T, Indicator>) {
            return "indicator:" + std::to_string(h.r);
          } else if constexpr (std::is_same_v<T, CollisionCell>) {
            return "collision";
          } else {
            return h.name;
          }
        },
        kind_);
  }

  // Values h(0..max_count) at the given lambda.
  std::vector<double> tabulate(std::uint64_t max_count, double lambda) const {
    std::vector<double> out(max_count + 1);
    for (std::uint64_t k = 0; k <= max_count; ++k) out[k] = (*this)(k, lambda);
    return out;
  }

 private:
  explicit CellFunction(Kind kind) : kind_(std::move(kind)) {}

  Kind kind_;
};

}  // namespace mgof
