#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mgof/errors.hpp"
#include "mgof/growth.hpp"
#include "mgof/rates.hpp"
#include "mgof/summation.hpp"

namespace mgof {

// Local alternative p_m = (1 + eps_m) / N.
class AlternativeSpec {
 public:
  explicit AlternativeSpec(std::vector<double> eps) : eps_(std::move(eps)) {
    if (eps_.size() < 2) throw InvalidArgument("an alternative needs at least two cells");
    CompensatedSum total;
    double scale = 1.0;
    for (double e : eps_) {
      if (!std::isfinite(e)) throw InvalidArgument("non-finite perturbation");
      if (!(1.0 + e > 0.0)) throw InvalidArgument("perturbation makes a cell probability nonpositive");
      total += e;
      scale = std::max(scale, std::abs(e));
    }
    if (std::abs(total.value()) > 1e-10 * scale * static_cast<double>(eps_.size())) {
      throw InvalidArgument("perturbations must sum to zero");
    }
  }

  static AlternativeSpec null(std::size_t cells) { return AlternativeSpec(std::vector<double>(cells, 0.0)); }

  std::size_t cells() const noexcept { return eps_.size(); }
  const std::vector<double>& eps() const noexcept { return eps_; }

  // eps_j(n) = N^{-1} sum_m eps_m^j.
  double epsilon_moment(int j) const {
    if (j < 1) throw InvalidArgument("moment order must be positive");
    CompensatedSum s;
    for (double e : eps_) s += std::pow(e, j);
    return s.value() / static_cast<double>(eps_.size());
  }

  // eps(n) = N^{-1} sum_m eps_m^2.
  double epsilon_norm() const { return epsilon_moment(2); }

  double max_abs_eps() const {
    double m = 0.0;
    for (double e : eps_) m = std::max(m, std::abs(e));
    return m;
  }

  bool is_null() const {
    return std::all_of(eps_.begin(), eps_.end(), [](double e) { return e == 0.0; });
  }

  std::vector<double> probabilities() const {
    std::vector<double> p(eps_.size());
    const double inv = 1.0 / static_cast<double>(eps_.size());
    for (std::size_t m = 0; m < eps_.size(); ++m) p[m] = (1.0 + eps_[m]) * inv;
    return p;
  }

 private:
  std::vector<double> eps_;
};

inline double epsilon_norm(const AlternativeSpec& spec) { return spec.epsilon_norm(); }

inline double epsilon_moment(const AlternativeSpec& spec, int j) { return spec.epsilon_moment(j); }

// Contiguity index n eps(n) / sqrt(N).
inline double nabla(std::uint64_t n, const AlternativeSpec& spec) {
  return static_cast<double>(n) * spec.epsilon_norm() / std::sqrt(static_cast<double>(spec.cells()));
}

enum class Profile { TwoBlock, SingleCell, Cosine };

inline std::string_view to_string(Profile p) {
  switch (p) {
    case Profile::TwoBlock:
      return "two-block";
    case Profile::SingleCell:
      return "single-cell";
    case Profile::Cosine:
      return "cosine";
  }
  return "two-block";
}

inline Profile parse_profile(std::string_view key) {
  if (key == "two-block") return Profile::TwoBlock;
  if (key == "single-cell") return Profile::SingleCell;
  if (key == "cosine") return Profile::Cosine;
  throw InvalidArgument("unknown alternative profile '" + std::string(key) + "'");
}

// Spec of the given shape with epsilon_norm equal to target.
inline AlternativeSpec make_profile(Profile profile, std::size_t cells, double target) {
  if (cells < 2) throw InvalidArgument("profiles need at least two cells");
  if (!(target >= 0.0) || !std::isfinite(target)) throw InvalidArgument("target eps(n) must be >= 0");
  if (target == 0.0) return AlternativeSpec::null(cells);

  const double N = static_cast<double>(cells);
  std::vector<double> eps(cells, 0.0);
  switch (profile) {
    case Profile::TwoBlock: {
      // Odd N: the middle cell stays unperturbed.
      const std::size_t half = cells / 2;
      const double delta = std::sqrt(target * N / static_cast<double>(2 * half));
      for (std::size_t m = 0; m < half; ++m) {
        eps[m] = delta;
        eps[cells - 1 - m] = -delta;
      }
      break;
    }
    case Profile::SingleCell: {
      const double a = std::sqrt(target * (N - 1.0));
      eps[0] = a;
      for (std::size_t m = 1; m < cells; ++m) eps[m] = -a / (N - 1.0);
      break;
    }
    case Profile::Cosine: {
      const double amp = std::sqrt(2.0 * target);
      CompensatedSum mean;
      for (std::size_t m = 0; m < cells; ++m) {
        eps[m] = amp * std::cos(2.0 * std::numbers::pi * static_cast<double>(m + 1) / N);
        mean += eps[m];
      }
      const double mu = mean.value() / N;
      CompensatedSum sq;
      for (double& e : eps) {
        e -= mu;
        sq += e * e;
      }
      const double scale = std::sqrt(target / (sq.value() / N));
      for (double& e : eps) e *= scale;
      break;
    }
  }
  for (double e : eps) {
    if (!(1.0 + e > 0.0)) {
      throw InvalidArgument("infeasible alternative: eps(n) = " + std::to_string(target) + " on " +
                            std::to_string(cells) + " cells drives a probability to zero");
    }
  }
  return AlternativeSpec(std::move(eps));
}

// A sequence of alternatives indexed by sample size: eps(n) = c n^{-gamma} on N(n) cells.
class RateFamily {
 public:
  RateFamily(Profile profile, double c, double gamma, GrowthLaw growth)
      : profile_(profile), c_(c), gamma_(gamma), growth_(growth) {
    if (!(c > 0.0) || !std::isfinite(c)) throw InvalidArgument("rate law needs c > 0");
    if (!(gamma > 0.0 && gamma <= 1.0)) throw InvalidArgument("rate exponent gamma must lie in (0, 1]");
  }

  Profile profile() const noexcept { return profile_; }
  double c() const noexcept { return c_; }
  double gamma() const noexcept { return gamma_; }
  const GrowthLaw& growth() const noexcept { return growth_; }

  double eps_norm(std::uint64_t n) const { return c_ * std::pow(static_cast<double>(n), -gamma_); }

  std::uint64_t cells(std::uint64_t n) const { return growth_.cells(static_cast<double>(n)); }

  AlternativeSpec spec_at(std::uint64_t n) const { return make_profile(profile_, cells(n), eps_norm(n)); }

  // Exponent of nabla_n = n eps(n) / sqrt(N).
  double nabla_exponent() const { return 1.0 - gamma_ - growth_.q() / 2.0; }

  // Exponent of (n / N) max_m eps_m^2; the single-cell profile concentrates the whole
  // perturbation so its maximum grows like N eps(n).
  double max_term_exponent() const {
    const double q = growth_.q();
    return (1.0 - q) - gamma_ + (profile_ == Profile::SingleCell ? q : 0.0);
  }

 private:
  Profile profile_;
  double c_;
  double gamma_;
  GrowthLaw growth_;
};

struct FamilySpot {
  std::uint64_t n;
  std::uint64_t cells;
  double eps_norm;
  double nabla;
  double max_term;  // (n / N) max_m eps_m^2
};

struct FamilyReport {
  std::vector<ConditionCheck> conditions;
  RateStatus in_alt_family;
  std::vector<FamilySpot> spots;

  const ConditionCheck* find(std::string_view text) const {
    for (const auto& c : conditions) {
      if (c.text == text) return &c;
    }
    return nullptr;
  }
};

namespace condition_text {
inline constexpr std::string_view kNablaDiverges = "nabla_n -> inf";
inline constexpr std::string_view kMaxTermVanishes = "(n/N) max eps_m^2 -> 0";
inline constexpr std::string_view kNablaSmall = "nabla_n = o(sqrt(N))";
inline constexpr std::string_view kBelowCubeRoot = "eps(n) << n^{-1/3}";
inline constexpr std::string_view kAboveCubeRootLog = "eps(n) >> n^{-1/3} log^{2/3} n";
inline constexpr std::string_view kBelowDenseBand = "eps(n) << (n lambda_n^2)^{-1/3}";
inline constexpr std::string_view kBelowQuarter = "eps(n) << (n lambda_n^2)^{-1/4}";
inline constexpr std::string_view kAboveSparseBandLog = "eps(n) >> (n lambda_n)^{-1/3} log^{2/3}(N^2/n)";
inline constexpr std::string_view kCubicOccupancy = "n lambda_n^3 -> inf";
inline constexpr std::string_view kFewCells = "N = o(n^{3/8})";
}  // namespace condition_text

// Exponent-level membership of a rate family in the alternative sub-families used by the
// efficiency verdicts, plus numeric spot values along n_grid.
inline FamilyReport classify_family(const RateFamily& fam, const std::vector<std::uint64_t>& n_grid) {
  if (!std::is_sorted(n_grid.begin(), n_grid.end())) throw InvalidArgument("n_grid must be ascending");
  namespace ct = condition_text;
  const double q = fam.growth().q();
  const double eps_exp = -fam.gamma();
  const double lam_exp = 1.0 - q;

  FamilyReport report;
  auto add = [&](std::string_view text, RateStatus s) { report.conditions.push_back({std::string(text), s}); };
  const RateStatus nabla_div = diverges(fam.nabla_exponent());
  const RateStatus max_vanish = vanishes(fam.max_term_exponent());
  add(ct::kNablaDiverges, nabla_div);
  add(ct::kMaxTermVanishes, max_vanish);
  add(ct::kNablaSmall, much_less(fam.nabla_exponent(), q / 2.0));
  add(ct::kBelowCubeRoot, much_less(eps_exp, -1.0 / 3.0));
  add(ct::kAboveCubeRootLog, much_greater(eps_exp, -1.0 / 3.0));
  add(ct::kBelowDenseBand, much_less(eps_exp, -(1.0 + 2.0 * lam_exp) / 3.0));
  add(ct::kBelowQuarter, much_less(eps_exp, -(1.0 + 2.0 * lam_exp) / 4.0));
  add(ct::kAboveSparseBandLog, much_greater(eps_exp, -(1.0 + lam_exp) / 3.0));
  add(ct::kCubicOccupancy, diverges(1.0 + 3.0 * lam_exp));
  add(ct::kFewCells, much_less(q, 3.0 / 8.0));
  report.in_alt_family = both(nabla_div, max_vanish);

  for (std::uint64_t n : n_grid) {
    const auto spec = fam.spec_at(n);
    const double N = static_cast<double>(spec.cells());
    const double m = spec.max_abs_eps();
    report.spots.push_back({n, spec.cells(), spec.epsilon_norm(), nabla(n, spec),
                            static_cast<double>(n) / N * m * m});
  }
  return report;
}

}  // namespace mgof
