#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "mgof/alternatives.hpp"
#include "mgof/cell_function.hpp"
#include "mgof/errors.hpp"
#include "mgof/summation.hpp"

namespace mgof {

inline constexpr double kDefaultTruncationTol = 1e-13;

// Rate of xi ~ Poi(lambda) together with the absolute error allowed for dropping the tail.
class PoissonContext {
 public:
  explicit PoissonContext(double lambda, double truncation_tol = kDefaultTruncationTol)
      : lambda_(lambda), tol_(truncation_tol) {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw InvalidArgument("Poisson rate must be > 0");
    if (!(truncation_tol > 0.0 && truncation_tol <= 1e-8)) {
      throw InvalidArgument("truncation tolerance must lie in (0, 1e-8]");
    }
  }

  double lambda() const noexcept { return lambda_; }
  double truncation_tol() const noexcept { return tol_; }

 private:
  double lambda_;
  double tol_;
};

// Poi(rate) probabilities on 0..K.
class PoissonWindow {
 public:
  PoissonWindow(double rate, std::uint64_t last) : rate_(rate), pmf_(last + 1) {
    // Start at the mode and recurse outwards so that large rates do not underflow.
    const std::uint64_t mode = std::min<std::uint64_t>(last, static_cast<std::uint64_t>(std::floor(rate)));
    const double m = static_cast<double>(mode);
    pmf_[mode] = std::exp(-rate + m * std::log(rate) - std::lgamma(m + 1.0));
    for (std::uint64_t k = mode + 1; k <= last; ++k) pmf_[k] = pmf_[k - 1] * rate / static_cast<double>(k);
    for (std::uint64_t k = mode; k-- > 0;) pmf_[k] = pmf_[k + 1] * static_cast<double>(k + 1) / rate;
  }

  double rate() const noexcept { return rate_; }
  std::uint64_t last() const noexcept { return pmf_.size() - 1; }
  const std::vector<double>& pmf() const noexcept { return pmf_; }
  double operator[](std::uint64_t k) const { return pmf_[k]; }

  // Upper bound on P{xi > K}: geometric majorant of the pmf ratios beyond K.
  double tail_bound() const {
    const double K = static_cast<double>(last());
    const double next = pmf_.back() * rate_ / (K + 1.0);
    const double ratio = rate_ / (K + 2.0);
    return ratio < 1.0 ? next / (1.0 - ratio) : 1.0;
  }

 private:
  double rate_;
  std::vector<double> pmf_;
};

// Smallest window whose neglected tail, weighted by the size of f beyond it, stays under tol.
template <class F>
PoissonWindow truncation_window(double rate, double tol, F&& magnitude) {
  std::uint64_t K = static_cast<std::uint64_t>(
      std::max(60.0, std::ceil(rate + 12.0 * std::sqrt(rate) + 30.0)));
  constexpr std::uint64_t kMaxWindow = 50'000'000;
  for (;;) {
    PoissonWindow w(rate, K);
    double probe = 1.0;
    for (int i = 0; i <= 8; ++i) {
      const std::uint64_t k = K + 1 + (K + 1) * static_cast<std::uint64_t>(i) / 8;
      const double v = std::abs(magnitude(k));
      if (std::isfinite(v)) probe = std::max(probe, v);
    }
    if (w.tail_bound() * probe < tol) return w;
    if (K >= kMaxWindow) throw InvalidArgument("Poisson truncation window does not close");
    K += std::max<std::uint64_t>(10, K / 4);
  }
}

// E f(xi), xi ~ Poi(lambda), by a truncated series.
template <class F>
double expect(F&& f, const PoissonContext& ctx) {
  const auto w = truncation_window(ctx.lambda(), ctx.truncation_tol(), f);
  CompensatedSum s;
  for (std::uint64_t k = 0; k <= w.last(); ++k) {
    const double v = f(k);
    if (!std::isfinite(v)) {
      throw InvalidArgument("f is not finite at k = " + std::to_string(k) + " inside the truncation window");
    }
    s += v * w[k];
  }
  return s.value();
}

// The second and third Poisson-Charlier polynomials centered at lambda.
struct CenteredPolys {
  double lambda;

  double phi2_at(double k) const {
    const double u = k - lambda;
    return u * u - u - lambda;
  }
  double phi3_at(double k) const {
    const double u = k - lambda;
    return u * u * u - 3.0 * u * u + (2.0 - 3.0 * lambda) * u + 2.0 * lambda;
  }
};

struct MomentSummary {
  double mean_h = 0.0;
  double var_h = 0.0;
  double cov_h_xi = 0.0;
  double r_n = 0.0;     // cov(h(xi), xi) / lambda
  double sigma2 = 0.0;  // Var g(xi), g(x) = h(x) - E h - r_n (x - lambda)
  double rho = 0.0;     // corr(g(xi), phi2(xi)); 0 when degenerate
  bool degenerate = false;
};

inline constexpr double kDegenerateRatio = 1e-14;

namespace detail {

inline double kernel_magnitude(const CellFunction& h, std::uint64_t k, double lambda) {
  const double v = 1.0 + std::abs(h(k, lambda));
  const double x = 1.0 + static_cast<double>(k);
  return v * v * x * x * x * x;
}

}  // namespace detail

inline MomentSummary moment_summary(const CellFunction& h, const PoissonContext& ctx) {
  const double lam = ctx.lambda();
  const auto w = truncation_window(lam, ctx.truncation_tol(),
                                   [&](std::uint64_t k) { return detail::kernel_magnitude(h, k, lam); });
  const std::uint64_t K = w.last();
  std::vector<double> hv(K + 1);
  for (std::uint64_t k = 0; k <= K; ++k) {
    hv[k] = h(k, lam);
    if (!std::isfinite(hv[k])) {
      throw InvalidArgument("cell function '" + h.name() + "' is not finite at k = " + std::to_string(k));
    }
  }

  MomentSummary out;
  CompensatedSum mean;
  for (std::uint64_t k = 0; k <= K; ++k) mean += hv[k] * w[k];
  out.mean_h = mean.value();

  CompensatedSum var, cov;
  for (std::uint64_t k = 0; k <= K; ++k) {
    const double dh = hv[k] - out.mean_h;
    var += dh * dh * w[k];
    cov += dh * (static_cast<double>(k) - lam) * w[k];
  }
  out.var_h = var.value();
  out.cov_h_xi = cov.value();
  out.r_n = out.cov_h_xi / lam;

  const CenteredPolys poly{lam};
  CompensatedSum g2, gphi, phi2;
  for (std::uint64_t k = 0; k <= K; ++k) {
    const double x = static_cast<double>(k);
    const double g = hv[k] - out.mean_h - out.r_n * (x - lam);
    const double p = poly.phi2_at(x);
    g2 += g * g * w[k];
    gphi += g * p * w[k];
    phi2 += p * p * w[k];
  }
  out.sigma2 = std::max(0.0, g2.value());
  if (!(out.var_h > 0.0) || out.sigma2 < kDegenerateRatio * out.var_h) {
    out.degenerate = true;
    out.rho = 0.0;
    return out;
  }
  out.rho = gphi.value() / std::sqrt(out.sigma2 * phi2.value());
  return out;
}

inline MomentSummary moment_summary(const CellFunction& h, double lambda) {
  return moment_summary(h, PoissonContext(lambda));
}

// Throws if the cell function carries no test at this lambda.
inline const MomentSummary& require_nondegenerate(const MomentSummary& m, const CellFunction& h) {
  if (m.degenerate) {
    throw DegenerateVariance("cell function '" + h.name() + "' is affine in the count; sigma^2(h) vanishes");
  }
  return m;
}

// Finite differences Delta^j h(0) at the given lambda.
inline double forward_difference_at_zero(const CellFunction& h, int order, double lambda) {
  double acc = 0.0;
  double binom = 1.0;
  for (int i = 0; i <= order; ++i) {
    const double sign = ((order - i) % 2 == 0) ? 1.0 : -1.0;
    acc += sign * binom * h(static_cast<std::uint64_t>(i), lambda);
    binom = binom * (order - i) / (i + 1);
  }
  return acc;
}

// Constant c in rho(h, lambda) = 1 - c lambda + O(lambda^2) as lambda -> 0, i.e.
// (Delta^3 h(0) / Delta^2 h(0))^2 / 6, using the closed forms for the divergence family and
// the low-order indicators.
inline double small_lambda_constant(const CellFunction& h, double lambda = 1.0) {
  if (const auto* pd = std::get_if<PowerDivergence>(&h.kind())) {
    const double d = pd->d;
    const double num = std::pow(3.0, d) - std::pow(2.0, d + 1.0) + 1.0;
    const double den = std::pow(2.0, d) - 1.0;
    return 3.0 * num * num / (8.0 * den * den);
  }
  if (h.is<LogLikelihood>()) {
    const double ratio = std::log(0.75) / std::log(2.0);
    return 3.0 / 8.0 * ratio * ratio;
  }
  if (const auto* ind = std::get_if<Indicator>(&h.kind())) {
    switch (ind->r) {
      case 0:
        return 1.0 / 6.0;
      case 1:
        return 3.0 / 8.0;
      case 2:
        return 1.5;
      default:
        throw InvalidArgument("indicator r >= 3 has Delta^2 h(0) = 0; no small-lambda expansion");
    }
  }
  const double d2 = forward_difference_at_zero(h, 2, lambda);
  if (std::abs(d2) < 1e-300) {
    throw InvalidArgument("Delta^2 h(0) = 0; no small-lambda expansion for '" + h.name() + "'");
  }
  const double d3 = forward_difference_at_zero(h, 3, lambda);
  const double ratio = d3 / d2;
  return ratio * ratio / 6.0;
}

inline double rho_small_lambda(const CellFunction& h, double lambda) {
  if (!(lambda > 0.0)) throw InvalidArgument("lambda must be > 0");
  return 1.0 - small_lambda_constant(h, lambda) * lambda;
}

inline double rho_large_lambda(double d, double lambda) {
  if (!(lambda > 0.0)) throw InvalidArgument("lambda must be > 0");
  return 1.0 - (d - 1.0) * (d - 1.0) / (6.0 * lambda);
}

// sqrt(n lambda_n / 2) eps(n) rho(h, lambda_n).
inline double kappa_asymptotic(const CellFunction& h, std::uint64_t n, std::uint64_t cells, double eps_norm,
                               double truncation_tol = kDefaultTruncationTol) {
  if (n < 2 || cells < 2) throw InvalidArgument("kappa needs n, N >= 2");
  if (!(eps_norm >= 0.0)) throw InvalidArgument("eps(n) must be >= 0");
  const double lam = static_cast<double>(n) / static_cast<double>(cells);
  const auto m = moment_summary(h, PoissonContext(lam, truncation_tol));
  require_nondegenerate(m, h);
  return std::sqrt(static_cast<double>(n) * lam / 2.0) * eps_norm * m.rho;
}

struct ShiftSummary {
  double a0 = 0.0;
  double a1 = 0.0;
  double sigma0 = 0.0;
  double sigma1 = 0.0;
  double kappa_exact = 0.0;
  double kappa_asymptotic = 0.0;
};

// Mean shift of the statistic under the alternative, in null standard-deviation units,
// from independent Poisson cells xi_m ~ Poi(n p_m).
inline ShiftSummary exact_shift(const CellFunction& h, std::uint64_t n, const AlternativeSpec& alt,
                                double truncation_tol = kDefaultTruncationTol) {
  const std::size_t cells = alt.cells();
  if (n < 1) throw InvalidArgument("exact shift needs n >= 1");
  const double lam = static_cast<double>(n) / static_cast<double>(cells);
  const auto null_m = moment_summary(h, PoissonContext(lam, truncation_tol));
  require_nondegenerate(null_m, h);

  auto g = [&](std::uint64_t k) {
    return h(k, lam) - null_m.mean_h - null_m.r_n * (static_cast<double>(k) - lam);
  };

  // Cells with equal perturbation share their Poisson moments.
  std::map<double, std::size_t> multiplicity;
  for (double e : alt.eps()) {
    if (!(1.0 + e > 0.0)) throw InvalidArgument("alternative has a nonpositive cell probability");
    ++multiplicity[e];
  }
  CompensatedSum a1, var1;
  for (const auto& [e, count] : multiplicity) {
    const double rate = lam * (1.0 + e);
    const auto w = truncation_window(rate, truncation_tol,
                                     [&](std::uint64_t k) { return detail::kernel_magnitude(h, k, lam); });
    CompensatedSum mh, mg, mg2;
    for (std::uint64_t k = 0; k <= w.last(); ++k) {
      const double hk = h(k, lam);
      const double gk = g(k);
      mh += hk * w[k];
      mg += gk * w[k];
      mg2 += gk * gk * w[k];
    }
    const double c = static_cast<double>(count);
    a1 += c * mh.value();
    var1 += c * (mg2.value() - mg.value() * mg.value());
  }
  const double N = static_cast<double>(cells);

  ShiftSummary out;
  out.a0 = null_m.mean_h;
  out.a1 = a1.value() / N;
  out.sigma0 = std::sqrt(null_m.sigma2);
  out.sigma1 = std::sqrt(std::max(0.0, var1.value() / N));
  out.kappa_exact = std::sqrt(N) * (out.a1 - out.a0) / out.sigma0;
  out.kappa_asymptotic = std::sqrt(static_cast<double>(n) * lam / 2.0) * alt.epsilon_norm() * null_m.rho;
  return out;
}

}  // namespace mgof
