#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "mgof/cell_function.hpp"
#include "mgof/errors.hpp"
#include "mgof/poisson_oracle.hpp"
#include "mgof/summation.hpp"

namespace mgof {

// Observed cell counts eta_1..eta_N of n balls.
class Frequencies {
 public:
  Frequencies(std::vector<std::uint64_t> counts, std::uint64_t n) : counts_(std::move(counts)), n_(n) {
    if (counts_.size() < 2) throw InvalidArgument("frequencies need N >= 2 cells");
    if (n_ == 0) throw InvalidArgument("frequencies need n >= 1");
    const auto total = std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0});
    if (total != n_) {
      throw InvalidArgument("counts sum to " + std::to_string(total) + ", expected n = " + std::to_string(n_));
    }
  }

  explicit Frequencies(std::vector<std::uint64_t> counts)
      : Frequencies(counts, std::accumulate(counts.begin(), counts.end(), std::uint64_t{0})) {}

  const std::vector<std::uint64_t>& counts() const noexcept { return counts_; }
  std::uint64_t n() const noexcept { return n_; }
  std::size_t cells() const noexcept { return counts_.size(); }
  double lambda() const noexcept { return static_cast<double>(n_) / static_cast<double>(counts_.size()); }

 private:
  std::vector<std::uint64_t> counts_;
  std::uint64_t n_;
};

// S = sum_m h(eta_m) with lambda = n / N.
inline double evaluate(const CellFunction& h, const Frequencies& freq) {
  const double lam = freq.lambda();
  CompensatedSum s;
  for (auto k : freq.counts()) s += h(k, lam);
  return s.value();
}

// Barred kernel psibar_d(x) = 2/(d(d+1)) [t^{d+1} - 1 - (d+1)(t-1)], t = x/lambda, written so
// that small |d| and t near 1 do not cancel.
inline double psi_bar(double d, std::uint64_t k, double lambda) {
  const double t = static_cast<double>(k) / lambda;
  if (std::abs(d) < CellFunction::kMinAbsD) {
    if (k == 0) return 2.0;
    return 2.0 * (t * std::log(t) - (t - 1.0));
  }
  if (k == 0) return 2.0 / (d + 1.0);
  return 2.0 / (d * (d + 1.0)) * (t * std::expm1(d * std::log(t)) - d * (t - 1.0));
}

// lambda sum_m psibar_d(eta_m): the same divergence as evaluate(power_divergence(d)) because
// the linear terms cancel over sum_m (eta_m - lambda) = 0.
inline double evaluate_pds_barred(double d, const Frequencies& freq) {
  if (!(d > -1.0)) throw InvalidArgument("power divergence index must satisfy d > -1");
  const double lam = freq.lambda();
  CompensatedSum s;
  for (auto k : freq.counts()) s += psi_bar(d, k, lam);
  return lam * s.value();
}

// (s - N E h) / (sigma(h) sqrt(N)) under the Poisson null at lambda = n / N.
inline double standardize(double s, const MomentSummary& m, std::uint64_t cells) {
  if (m.degenerate || !(m.sigma2 > 0.0)) throw DegenerateVariance("cannot standardize: sigma^2(h) vanishes");
  const double N = static_cast<double>(cells);
  return (s - N * m.mean_h) / (std::sqrt(m.sigma2) * std::sqrt(N));
}

inline double standardize(double s, const CellFunction& h, std::uint64_t n, std::uint64_t cells) {
  if (n < 1 || cells < 2) throw InvalidArgument("standardize needs n >= 1, N >= 2");
  const auto m = moment_summary(h, static_cast<double>(n) / static_cast<double>(cells));
  require_nondegenerate(m, h);
  return standardize(s, m, cells);
}

}  // namespace mgof
