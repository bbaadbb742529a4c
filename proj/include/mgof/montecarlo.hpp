#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "mgof/alternatives.hpp"
#include "mgof/cell_function.hpp"
#include "mgof/errors.hpp"
#include "mgof/exact_dist.hpp"
#include "mgof/normal.hpp"
#include "mgof/parallel.hpp"
#include "mgof/poisson_oracle.hpp"
#include "mgof/rng.hpp"
#include "mgof/statistics.hpp"
#include "mgof/summation.hpp"

namespace mgof {

struct TailEstimate {
  double p_hat = 0.0;
  double std_err = 0.0;
  std::uint64_t reps = 0;

  static TailEstimate from_count(std::uint64_t hits, std::uint64_t reps) {
    const double p = static_cast<double>(hits) / static_cast<double>(reps);
    return {p, std::sqrt(p * (1.0 - p) / static_cast<double>(reps)), reps};
  }
};

inline constexpr std::uint64_t kMinReps = 100;
inline constexpr std::uint64_t kMinCorrReps = 10'000;
inline constexpr std::size_t kReplicateBlock = 512;

struct McOptions {
  unsigned threads = 0;
};

// One multinomial draw of n balls into p.size() cells.
class MultinomialSampler {
 public:
  MultinomialSampler(std::uint64_t n, std::vector<double> p) : n_(n), p_(std::move(p)) {
    detail::check_probabilities(p_);
    const std::size_t N = p_.size();
    const double inv = 1.0 / static_cast<double>(N);
    uniform_ = std::all_of(p_.begin(), p_.end(), [&](double v) { return std::abs(v - inv) <= 1e-15; });
    by_binomial_ = n_ > 4 * N;
    if (!uniform_ && !by_binomial_) build_alias();
  }

  std::uint64_t n() const noexcept { return n_; }
  std::size_t cells() const noexcept { return p_.size(); }

  void draw(Xoshiro256& rng, std::vector<std::uint64_t>& counts) const {
    const std::size_t N = p_.size();
    counts.assign(N, 0);
    if (by_binomial_) {
      // Sequential conditional binomials: eta_m | earlier cells ~ Bin(left, p_m / mass_left).
      std::uint64_t left = n_;
      double mass = 1.0;
      for (std::size_t m = 0; m + 1 < N && left > 0; ++m) {
        const double pr = std::clamp(p_[m] / mass, 0.0, 1.0);
        std::binomial_distribution<std::uint64_t> bin(left, pr);
        counts[m] = bin(rng);
        left -= counts[m];
        mass -= p_[m];
        if (mass <= 0.0) mass = 0.0;
      }
      counts[N - 1] += left;
      return;
    }
    if (uniform_) {
      for (std::uint64_t i = 0; i < n_; ++i) ++counts[rng.below(N)];
      return;
    }
    for (std::uint64_t i = 0; i < n_; ++i) {
      const std::size_t col = rng.below(N);
      ++counts[rng.uniform() < prob_[col] ? col : alias_[col]];
    }
  }

 private:
  // Vose's alias method.
  void build_alias() {
    const std::size_t N = p_.size();
    prob_.assign(N, 0.0);
    alias_.assign(N, 0);
    std::vector<double> scaled(N);
    std::vector<std::size_t> small, large;
    for (std::size_t m = 0; m < N; ++m) {
      scaled[m] = p_[m] * static_cast<double>(N);
      (scaled[m] < 1.0 ? small : large).push_back(m);
    }
    while (!small.empty() && !large.empty()) {
      const std::size_t s = small.back(), l = large.back();
      small.pop_back();
      large.pop_back();
      prob_[s] = scaled[s];
      alias_[s] = l;
      scaled[l] = (scaled[l] + scaled[s]) - 1.0;
      (scaled[l] < 1.0 ? small : large).push_back(l);
    }
    for (auto m : large) prob_[m] = 1.0;
    for (auto m : small) prob_[m] = 1.0;
  }

  std::uint64_t n_;
  std::vector<double> p_;
  bool uniform_ = false;
  bool by_binomial_ = false;
  std::vector<double> prob_;
  std::vector<std::size_t> alias_;
};

inline std::vector<double> uniform_probabilities(std::size_t cells) {
  if (cells < 2) throw InvalidArgument("need N >= 2 cells");
  return std::vector<double>(cells, 1.0 / static_cast<double>(cells));
}

inline Frequencies sample_counts(std::uint64_t n, const std::vector<double>& p, const SeedSpec& seed,
                                 std::uint64_t replicate) {
  if (n < 1) throw InvalidArgument("sample size must be >= 1");
  const MultinomialSampler sampler(n, p);
  auto rng = seed.replicate(replicate);
  std::vector<std::uint64_t> counts;
  sampler.draw(rng, counts);
  return Frequencies(std::move(counts), n);
}

// Raw values of several statistics on the same draws: out[s][i] = sum_m tables[s][eta_m] on
// replicate i.
inline std::vector<std::vector<double>> simulate_statistics(const std::vector<std::vector<double>>& tables,
                                                            std::uint64_t n, const std::vector<double>& p,
                                                            std::uint64_t reps, const SeedSpec& seed,
                                                            const McOptions& opt = {}) {
  if (n < 1) throw InvalidArgument("sample size must be >= 1");
  for (const auto& t : tables) {
    if (t.size() < n + 1) throw InvalidArgument("statistic table shorter than n + 1");
  }
  const MultinomialSampler sampler(n, p);
  std::vector<std::vector<double>> out(tables.size(), std::vector<double>(reps));
  const std::size_t blocks = (reps + kReplicateBlock - 1) / kReplicateBlock;
  parallel_for(blocks, opt.threads, [&](std::size_t b) {
    std::vector<std::uint64_t> counts;
    const std::uint64_t first = b * kReplicateBlock;
    const std::uint64_t last = std::min<std::uint64_t>(reps, first + kReplicateBlock);
    for (std::uint64_t i = first; i < last; ++i) {
      auto rng = seed.replicate(i);
      sampler.draw(rng, counts);
      for (std::size_t s = 0; s < tables.size(); ++s) {
        const auto& tab = tables[s];
        double acc = 0.0;
        for (auto k : counts) acc += tab[k];
        out[s][i] = acc;
      }
    }
  });
  return out;
}

inline std::vector<double> simulate_statistic(const CellFunction& h, std::uint64_t n, const std::vector<double>& p,
                                              std::uint64_t reps, const SeedSpec& seed, const McOptions& opt = {}) {
  const double lam = static_cast<double>(n) / static_cast<double>(p.size());
  return simulate_statistics({h.tabulate(n, lam)}, n, p, reps, seed, opt).front();
}

// Standardized values (S - N E h) / (sigma sqrt(N)) using null moments at lambda = n / N.
inline std::vector<double> simulate_standardized(const CellFunction& h, std::uint64_t n, const std::vector<double>& p,
                                                 std::uint64_t reps, const SeedSpec& seed,
                                                 const McOptions& opt = {}) {
  const std::size_t N = p.size();
  const auto m = moment_summary(h, static_cast<double>(n) / static_cast<double>(N));
  require_nondegenerate(m, h);
  auto v = simulate_statistic(h, n, p, reps, seed, opt);
  for (double& x : v) x = standardize(x, m, N);
  return v;
}

inline TailEstimate tail_fraction(const std::vector<double>& values, double t) {
  const auto hits = static_cast<std::uint64_t>(std::count_if(values.begin(), values.end(), [t](double v) { return v > t; }));
  return TailEstimate::from_count(hits, values.size());
}

inline void require_reps(std::uint64_t reps, std::uint64_t minimum = kMinReps) {
  if (reps < minimum) {
    throw InsufficientReps("reps = " + std::to_string(reps) + " below the minimum " + std::to_string(minimum));
  }
}

// P{S > t} on the raw scale.
inline TailEstimate estimate_tail(const CellFunction& h, std::uint64_t n, const std::vector<double>& p, double t,
                                  std::uint64_t reps, const SeedSpec& seed, const McOptions& opt = {}) {
  require_reps(reps);
  return tail_fraction(simulate_statistic(h, n, p, reps, seed, opt), t);
}

// Several raw-scale thresholds on one set of draws.
inline std::vector<TailEstimate> estimate_tails(const CellFunction& h, std::uint64_t n, const std::vector<double>& p,
                                                const std::vector<double>& thresholds, std::uint64_t reps,
                                                const SeedSpec& seed, const McOptions& opt = {}) {
  require_reps(reps);
  const auto v = simulate_statistic(h, n, p, reps, seed, opt);
  std::vector<TailEstimate> out;
  for (double t : thresholds) out.push_back(tail_fraction(v, t));
  return out;
}

// Order statistic of rank ceil((1 - alpha)(R + 1)) of a sample.
inline double order_statistic_critical(std::vector<double> sample, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidArgument("alpha must lie in (0, 1)");
  const double R = static_cast<double>(sample.size());
  if (alpha * R < 20.0) {
    throw InsufficientReps("alpha * reps = " + std::to_string(alpha * R) + " < 20; critical value unreliable");
  }
  auto rank = static_cast<std::size_t>(std::ceil((1.0 - alpha) * (R + 1.0)));
  rank = std::clamp<std::size_t>(rank, 1, sample.size());
  std::nth_element(sample.begin(), sample.begin() + static_cast<std::ptrdiff_t>(rank - 1), sample.end());
  return sample[rank - 1];
}

// Sample analogue of exact_critical: the smallest sampled value t with #{S > t} / R <= alpha.
inline double empirical_critical(std::vector<double> sample, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidArgument("alpha must lie in (0, 1)");
  if (sample.empty()) throw InvalidArgument("empty sample");
  std::sort(sample.begin(), sample.end());
  // alpha often is itself a sample fraction hits / R; the nudge keeps floor from landing one below.
  const auto allowed =
      static_cast<std::size_t>(std::floor(alpha * static_cast<double>(sample.size()) * (1.0 + 1e-12)));
  // At most `allowed` values may lie strictly above t, so t is the (R - allowed)-th smallest;
  // anything below it has allowed + 1 values above.
  const std::size_t idx = sample.size() - 1 - std::min(allowed, sample.size() - 1);
  return sample[idx];
}

// Upper-alpha critical value of the standardized statistic under the uniform null.
inline double estimate_critical(const CellFunction& h, std::uint64_t n, std::size_t cells, double alpha,
                                std::uint64_t reps, const SeedSpec& seed, const McOptions& opt = {}) {
  require_reps(reps);
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidArgument("alpha must lie in (0, 1)");
  if (alpha * static_cast<double>(reps) < 20.0) {
    throw InsufficientReps("alpha * reps must be >= 20 for a critical value");
  }
  return order_statistic_critical(simulate_standardized(h, n, uniform_probabilities(cells), reps, seed, opt), alpha);
}

// P_1{S~ > t} on the standardized scale (null moments at lambda = n / N).
inline TailEstimate estimate_power(const CellFunction& h, std::uint64_t n, const AlternativeSpec& alt, double t,
                                   std::uint64_t reps, const SeedSpec& seed, const McOptions& opt = {}) {
  require_reps(reps);
  return tail_fraction(simulate_standardized(h, n, alt.probabilities(), reps, seed, opt), t);
}

inline double sample_correlation(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw InvalidArgument("correlation needs paired samples");
  const double R = static_cast<double>(x.size());
  CompensatedSum sx, sy;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx.value() / R, my = sy.value() / R;
  CompensatedSum xx, yy, xy;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    xx += dx * dx;
    yy += dy * dy;
    xy += dx * dy;
  }
  if (!(xx.value() > 0.0) || !(yy.value() > 0.0)) throw DegenerateVariance("sample variance vanishes");
  return xy.value() / std::sqrt(xx.value() * yy.value());
}

// Null sample correlation of S^h with the chi-square statistic.
inline double estimate_corr_chi2(const CellFunction& h, std::uint64_t n, std::size_t cells, std::uint64_t reps,
                                 const SeedSpec& seed, const McOptions& opt = {}) {
  require_reps(reps, kMinCorrReps);
  const double lam = static_cast<double>(n) / static_cast<double>(cells);
  const auto v = simulate_statistics({h.tabulate(n, lam), CellFunction::chi_square().tabulate(n, lam)}, n,
                                     uniform_probabilities(cells), reps, seed, opt);
  return sample_correlation(v[0], v[1]);
}

struct NormalityReport {
  double ks_distance = 0.0;
  double mean = 0.0;
  double var = 0.0;
};

// Kolmogorov distance between the empirical law of S~ and Phi, plus its first two moments.
inline NormalityReport normality_diagnostic(const CellFunction& h, std::uint64_t n, std::size_t cells,
                                            std::uint64_t reps, const SeedSpec& seed, const McOptions& opt = {}) {
  require_reps(reps);
  auto v = simulate_standardized(h, n, uniform_probabilities(cells), reps, seed, opt);
  const double R = static_cast<double>(v.size());
  NormalityReport out;
  CompensatedSum s;
  for (double x : v) s += x;
  out.mean = s.value() / R;
  CompensatedSum ss;
  for (double x : v) ss += (x - out.mean) * (x - out.mean);
  out.var = ss.value() / (R - 1.0);

  std::sort(v.begin(), v.end());
  double d = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double F = normal_cdf(v[i]);
    d = std::max({d, static_cast<double>(i + 1) / R - F, F - static_cast<double>(i) / R});
  }
  out.ks_distance = d;
  return out;
}

// ---------------------------------------------------------------------------------------------
// Operational sample-size search.

struct KnOptions {
  std::uint64_t window = 5;
  std::uint64_t k_min = 2;
  double k_max_factor = 64.0;
  bool exact_kappa = false;  // exact_shift instead of the asymptotic shift in the h threshold
  double enumeration_budget = kDefaultEnumerationBudget;
  unsigned threads = 0;
};

struct KnPoint {
  std::uint64_t k = 0;
  std::uint64_t cells = 0;
  double u_k = 0.0;
  TailEstimate power;
  bool exact = false;
};

struct KnSearchResult {
  double z = 0.0;
  double kappa = 0.0;
  double alpha_n = 0.0;
  double alpha_std_err = 0.0;
  bool alpha_exact = false;
  TailEstimate beta_n;  // power of the h-test at n
  std::uint64_t n = 0;
  std::uint64_t k_n = 0;
  std::uint64_t window_checked = 0;
  TailEstimate power_at_kn;
  std::map<std::uint64_t, double> critical_values;
  std::vector<KnPoint> evaluated;  // in evaluation order
  bool saturated = false;
  bool unstable = false;
};

namespace detail {

// Laws of a standardized statistic at one sample size: exact atoms or sampled values.
struct PowerEvaluator {
  const CellFunction& stat;
  double budget;
  SeedSpec null_stream;
  SeedSpec alt_stream;
  std::uint64_t reps;
  McOptions mc;

  bool exact_feasible(std::uint64_t k, std::size_t cells) const { return composition_count(k, cells) <= budget; }

  std::pair<ExactDistribution, ExactDistribution> exact_laws(std::uint64_t k, const AlternativeSpec& alt) const {
    const std::size_t N = alt.cells();
    const auto m = moment_summary(stat, static_cast<double>(k) / static_cast<double>(N));
    require_nondegenerate(m, stat);
    const double shift = static_cast<double>(N) * m.mean_h;
    const double scale = std::sqrt(m.sigma2) * std::sqrt(static_cast<double>(N));
    EnumerationOptions eo{budget, mc.threads};
    return {enumerate(stat, k, uniform_probabilities(N), eo).affine(shift, scale),
            enumerate(stat, k, alt.probabilities(), eo).affine(shift, scale)};
  }

  std::pair<std::vector<double>, std::vector<double>> sampled_laws(std::uint64_t k, const AlternativeSpec& alt) const {
    return {simulate_standardized(stat, k, uniform_probabilities(alt.cells()), reps, null_stream, mc),
            simulate_standardized(stat, k, alt.probabilities(), reps, alt_stream, mc)};
  }
};

}  // namespace detail

// Minimal k from which the psi-test at level alpha_n has at least the power of the h-test at n.
inline KnSearchResult find_kn(const CellFunction& h, const CellFunction& psi, double z, std::uint64_t n,
                              const RateFamily& fam, std::uint64_t reps, const SeedSpec& seed,
                              const KnOptions& opt = {}) {
  require_reps(reps);
  if (n < opt.k_min) throw InvalidArgument("n must be >= k_min");
  const McOptions mc{opt.threads};
  // The same null and alternative streams serve both tests, so psi = h at k = n replays the
  // h-test draw for draw.
  const SeedSpec null_stream = seed.substream("null");
  const SeedSpec alt_stream = seed.substream("alt");

  KnSearchResult res;
  res.z = z;
  res.n = n;
  res.window_checked = opt.window;

  const auto alt_n = fam.spec_at(n);
  const std::size_t N_n = alt_n.cells();
  if (opt.exact_kappa) {
    res.kappa = exact_shift(h, n, alt_n).kappa_exact;
  } else {
    res.kappa = kappa_asymptotic(h, n, N_n, alt_n.epsilon_norm());
  }
  const double t_h = z + res.kappa;

  const detail::PowerEvaluator h_eval{h, opt.enumeration_budget, null_stream, alt_stream, reps, mc};
  if (h_eval.exact_feasible(n, N_n)) {
    const auto [null_law, alt_law] = h_eval.exact_laws(n, alt_n);
    res.alpha_n = exact_tail(null_law, t_h);
    res.alpha_exact = true;
    res.beta_n = {exact_tail(alt_law, t_h), 0.0, 0};
  } else {
    const auto [null_s, alt_s] = h_eval.sampled_laws(n, alt_n);
    const auto a = tail_fraction(null_s, t_h);
    res.alpha_n = a.p_hat;
    res.alpha_std_err = a.std_err;
    res.beta_n = tail_fraction(alt_s, t_h);
  }
  if (!(res.alpha_n > 0.0 && res.alpha_n < 1.0)) {
    throw InvalidArgument("level alpha_n = " + std::to_string(res.alpha_n) +
                          " is degenerate; move the threshold offset z");
  }
  if (!res.alpha_exact && res.alpha_n * static_cast<double>(reps) < 20.0) {
    throw InsufficientReps("alpha_n * reps < 20; increase reps or lower z");
  }

  const detail::PowerEvaluator psi_eval{psi, opt.enumeration_budget, null_stream, alt_stream, reps, mc};
  std::map<std::uint64_t, KnPoint> memo;
  auto evaluate_at = [&](std::uint64_t k) -> const KnPoint& {
    if (auto it = memo.find(k); it != memo.end()) return it->second;
    const auto alt_k = fam.spec_at(k);
    KnPoint pt;
    pt.k = k;
    pt.cells = alt_k.cells();
    if (psi_eval.exact_feasible(k, pt.cells)) {
      const auto [null_law, alt_law] = psi_eval.exact_laws(k, alt_k);
      pt.u_k = exact_critical(null_law, res.alpha_n).t;
      pt.power = {exact_tail(alt_law, pt.u_k), 0.0, 0};
      pt.exact = true;
    } else {
      const auto [null_s, alt_s] = psi_eval.sampled_laws(k, alt_k);
      pt.u_k = empirical_critical(null_s, res.alpha_n);
      pt.power = tail_fraction(alt_s, pt.u_k);
    }
    res.critical_values[k] = pt.u_k;
    res.evaluated.push_back(pt);
    return memo.emplace(k, pt).first->second;
  };
  auto holds = [&](std::uint64_t k) { return evaluate_at(k).power.p_hat >= res.beta_n.p_hat; };

  const auto k_max = static_cast<std::uint64_t>(std::ceil(opt.k_max_factor * static_cast<double>(n)));
  auto not_found = [&] {
    return NotFound("power condition never holds up to k_max = " + std::to_string(k_max));
  };

  // Bracket: lo fails (0 = none known), hi holds.
  std::uint64_t lo = 0, hi = 0;
  if (holds(n)) {
    hi = n;
    while (hi > opt.k_min) {
      const std::uint64_t k = std::max(opt.k_min, hi / 2);
      if (!holds(k)) {
        lo = k;
        break;
      }
      hi = k;
    }
    if (lo == 0) res.saturated = true;
  } else {
    lo = n;
  }

  // Grows a bracket upwards from a known failure at lo.
  auto climb = [&](std::uint64_t from) {
    std::uint64_t step = std::max<std::uint64_t>(1, from);
    std::uint64_t last_fail = from;
    for (;;) {
      if (last_fail >= k_max) throw not_found();
      const std::uint64_t k = std::min(k_max, last_fail + step);
      if (holds(k)) return std::pair{last_fail, k};
      last_fail = k;
      step *= 2;
    }
  };

  if (hi == 0) std::tie(lo, hi) = climb(lo);
  for (;;) {
    while (lo != 0 && hi - lo > 1) {
      const std::uint64_t mid = lo + (hi - lo) / 2;
      (holds(mid) ? hi : lo) = mid;
    }
    std::uint64_t failed = 0;
    for (std::uint64_t j = 1; j <= opt.window; ++j) {
      if (!holds(hi + j)) {
        failed = hi + j;
        break;
      }
    }
    if (failed == 0) break;
    // The condition must hold from k_n onwards; restart above the failure.
    res.unstable = true;
    res.saturated = false;
    std::tie(lo, hi) = climb(failed);
  }

  res.k_n = hi;
  res.power_at_kn = memo.at(hi).power;
  if (res.k_n > opt.k_min) res.saturated = false;
  return res;
}

}  // namespace mgof
