#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <limits>
#include <ostream>
#include <utility>
#include <vector>

#include "mgof/cell_function.hpp"
#include "mgof/errors.hpp"
#include "mgof/parallel.hpp"
#include "mgof/summation.hpp"

namespace mgof {

inline constexpr double kDefaultEnumerationBudget = 5e6;
inline constexpr double kAtomMergeTol = 1e-12;

struct Atom {
  double value;
  double prob;
};

// Finite law of a statistic: atoms sorted by value, all with positive mass.
class ExactDistribution {
 public:
  ExactDistribution() = default;
  explicit ExactDistribution(std::vector<Atom> atoms) : atoms_(std::move(atoms)) {}

  const std::vector<Atom>& atoms() const noexcept { return atoms_; }
  std::size_t size() const noexcept { return atoms_.size(); }

  double total_mass() const {
    CompensatedSum s;
    for (const auto& a : atoms_) s += a.prob;
    return s.value();
  }

  double mean() const {
    CompensatedSum s;
    for (const auto& a : atoms_) s += a.value * a.prob;
    return s.value();
  }

  double variance() const {
    const double mu = mean();
    CompensatedSum s;
    for (const auto& a : atoms_) s += (a.value - mu) * (a.value - mu) * a.prob;
    return s.value();
  }

  // Image under the increasing map v -> (v - shift) / scale.
  ExactDistribution affine(double shift, double scale) const {
    if (!(scale > 0.0)) throw InvalidArgument("affine map of a distribution needs scale > 0");
    std::vector<Atom> out = atoms_;
    for (auto& a : out) a.value = (a.value - shift) / scale;
    return ExactDistribution(std::move(out));
  }

  void write_csv(std::ostream& os) const {
    const auto old = os.precision(15);
    os << "value,prob\n";
    for (const auto& a : atoms_) os << a.value << ',' << a.prob << '\n';
    os.precision(old);
  }

 private:
  std::vector<Atom> atoms_;
};

// C(n + N - 1, N - 1) as a double (saturates at infinity).
inline double composition_count(std::uint64_t n, std::uint64_t cells) {
  if (cells == 0) return 0.0;
  const double lg = std::lgamma(static_cast<double>(n + cells)) - std::lgamma(static_cast<double>(n + 1)) -
                    std::lgamma(static_cast<double>(cells));
  if (lg > 700.0) return std::numeric_limits<double>::infinity();
  return std::round(std::exp(lg));
}

struct EnumerationOptions {
  double budget = kDefaultEnumerationBudget;
  unsigned threads = 0;
};

namespace detail {

inline void check_probabilities(const std::vector<double>& p) {
  if (p.size() < 2) throw InvalidArgument("enumeration needs N >= 2 cells");
  CompensatedSum s;
  for (double v : p) {
    if (!(v > 0.0) || !std::isfinite(v)) throw InvalidArgument("cell probabilities must be > 0");
    s += v;
  }
  if (std::abs(s.value() - 1.0) > 1e-10) throw InvalidArgument("cell probabilities must sum to 1");
}

// Depth-first walk over all compositions whose first coordinate is k1. Calls
// visit(counts, log_weight) for each.
template <class Visit>
void walk_compositions(std::uint64_t n, std::uint64_t k1, const std::vector<double>& logp,
                       const std::vector<double>& lfact, Visit& visit) {
  const std::size_t N = logp.size();
  std::vector<std::uint64_t> k(N, 0);
  std::vector<double> lw(N + 1, 0.0);  // lw[m] = partial log weight of cells < m
  std::vector<std::uint64_t> left(N + 1, 0);
  k[0] = k1;
  lw[1] = lfact[n] - lfact[k1] + static_cast<double>(k1) * logp[0];
  left[1] = n - k1;

  auto close_last = [&] {
    k[N - 1] = left[N - 1];
    const double w = lw[N - 1] - lfact[k[N - 1]] + static_cast<double>(k[N - 1]) * logp[N - 1];
    visit(k, w);
  };
  if (N == 2) {
    close_last();
    return;
  }
  // Iterative odometer over cells 1..N-2; the last cell takes what is left.
  std::size_t m = 1;
  k[1] = 0;
  for (;;) {
    lw[m + 1] = lw[m] - lfact[k[m]] + static_cast<double>(k[m]) * logp[m];
    left[m + 1] = left[m] - k[m];
    if (m + 1 < N - 1) {
      ++m;
      k[m] = 0;
      continue;
    }
    close_last();
    // Advance: find the deepest cell that can still grow.
    while (m >= 1 && k[m] == left[m]) --m;
    if (m == 0) return;
    ++k[m];
  }
}

inline std::vector<double> log_factorials(std::uint64_t n) {
  std::vector<double> lf(n + 1, 0.0);
  for (std::uint64_t i = 1; i <= n; ++i) lf[i] = lf[i - 1] + std::log(static_cast<double>(i));
  return lf;
}

inline std::vector<Atom> merge_sorted(std::vector<Atom> raw) {
  std::stable_sort(raw.begin(), raw.end(), [](const Atom& a, const Atom& b) { return a.value < b.value; });
  std::vector<Atom> out;
  out.reserve(raw.size());
  for (const auto& a : raw) {
    if (!(a.prob > 0.0)) continue;
    if (!out.empty() && a.value - out.back().value <= kAtomMergeTol) {
      out.back().prob += a.prob;
    } else {
      out.push_back(a);
    }
  }
  return out;
}

inline void check_budget(std::uint64_t n, std::size_t cells, double budget) {
  const double count = composition_count(n, cells);
  if (count > budget) throw BudgetExceeded(count, budget);
}

}  // namespace detail

// Runs visit(counts, probability) over every outcome of Mult(n, p); one call per first-cell
// value, in parallel. make_visitor(k1) builds the per-chunk visitor; chunks are returned in k1
// order.
template <class MakeVisitor>
auto for_each_composition(std::uint64_t n, const std::vector<double>& p, const EnumerationOptions& opt,
                          MakeVisitor&& make_visitor) {
  detail::check_probabilities(p);
  detail::check_budget(n, p.size(), opt.budget);
  std::vector<double> logp(p.size());
  for (std::size_t m = 0; m < p.size(); ++m) logp[m] = std::log(p[m]);
  const auto lfact = detail::log_factorials(n);

  using Visitor = decltype(make_visitor(std::uint64_t{0}));
  std::vector<Visitor> chunks;
  chunks.reserve(n + 1);
  for (std::uint64_t k1 = 0; k1 <= n; ++k1) chunks.push_back(make_visitor(k1));
  parallel_for(n + 1, opt.threads, [&](std::size_t k1) {
    auto& v = chunks[k1];
    auto visit = [&](const std::vector<std::uint64_t>& k, double lw) { v(k, std::exp(lw)); };
    detail::walk_compositions(n, k1, logp, lfact, visit);
  });
  return chunks;
}

inline ExactDistribution enumerate(const CellFunction& h, std::uint64_t n, const std::vector<double>& p,
                                   const EnumerationOptions& opt = {}) {
  const double lam = static_cast<double>(n) / static_cast<double>(p.size());
  const auto hv = h.tabulate(n, lam);
  struct Chunk {
    const std::vector<double>* hv;
    std::vector<Atom> atoms;
    void operator()(const std::vector<std::uint64_t>& k, double w) {
      double s = 0.0;
      for (auto c : k) s += (*hv)[c];
      atoms.push_back({s, w});
    }
  };
  auto chunks = for_each_composition(n, p, opt, [&](std::uint64_t) { return Chunk{&hv, {}}; });
  std::vector<Atom> all;
  for (auto& c : chunks) {
    auto merged = detail::merge_sorted(std::move(c.atoms));
    all.insert(all.end(), merged.begin(), merged.end());
  }
  return ExactDistribution(detail::merge_sorted(std::move(all)));
}

inline ExactDistribution enumerate(const CellFunction& h, std::uint64_t n, std::size_t cells,
                                   const EnumerationOptions& opt = {}) {
  return enumerate(h, n, std::vector<double>(cells, 1.0 / static_cast<double>(cells)), opt);
}

// P{S > t}.
inline double exact_tail(const ExactDistribution& dist, double t) {
  const auto& a = dist.atoms();
  auto it = std::upper_bound(a.begin(), a.end(), t, [](double v, const Atom& x) { return v < x.value; });
  CompensatedSum s;
  for (; it != a.end(); ++it) s += it->prob;
  return s.value();
}

struct CriticalValue {
  double t;
  double achieved;
};

// Smallest atom t with P{S > t} <= alpha; never randomized.
inline CriticalValue exact_critical(const ExactDistribution& dist, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidArgument("alpha must lie in (0, 1)");
  const auto& a = dist.atoms();
  if (a.empty()) throw InvalidArgument("empty distribution");
  // Tail masses from the top so each P{S > a_i} is a single compensated suffix sum.
  std::vector<double> above(a.size(), 0.0);
  CompensatedSum s;
  for (std::size_t i = a.size(); i-- > 0;) {
    above[i] = s.value();
    s += a[i].prob;
  }
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (above[i] <= alpha) return {a[i].value, above[i]};
  }
  return {a.back().value, 0.0};
}

// Null correlation of S^{h1} and S^{h2} over every composition (two passes).
inline double exact_joint_corr(const CellFunction& h1, const CellFunction& h2, std::uint64_t n, std::size_t cells,
                               const EnumerationOptions& opt = {}) {
  const std::vector<double> p(cells, 1.0 / static_cast<double>(cells));
  const double lam = static_cast<double>(n) / static_cast<double>(cells);
  const auto v1 = h1.tabulate(n, lam);
  const auto v2 = h2.tabulate(n, lam);
  auto stats = [&](const std::vector<std::uint64_t>& k) {
    double a = 0.0, b = 0.0;
    for (auto c : k) {
      a += v1[c];
      b += v2[c];
    }
    return std::pair{a, b};
  };

  struct Means {
    decltype(stats)* f;
    CompensatedSum a, b;
    void operator()(const std::vector<std::uint64_t>& k, double w) {
      const auto [x, y] = (*f)(k);
      a += w * x;
      b += w * y;
    }
  };
  auto first = for_each_composition(n, p, opt, [&](std::uint64_t) { return Means{&stats, {}, {}}; });
  CompensatedSum ma, mb;
  for (const auto& c : first) {
    ma += c.a.value();
    mb += c.b.value();
  }
  const double mu1 = ma.value(), mu2 = mb.value();

  struct Moments {
    decltype(stats)* f;
    double mu1, mu2;
    CompensatedSum xx, yy, xy;
    void operator()(const std::vector<std::uint64_t>& k, double w) {
      const auto [x, y] = (*f)(k);
      const double dx = x - mu1, dy = y - mu2;
      xx += w * dx * dx;
      yy += w * dy * dy;
      xy += w * dx * dy;
    }
  };
  auto second = for_each_composition(n, p, opt, [&](std::uint64_t) { return Moments{&stats, mu1, mu2, {}, {}, {}}; });
  CompensatedSum sxx, syy, sxy;
  for (const auto& c : second) {
    sxx += c.xx.value();
    syy += c.yy.value();
    sxy += c.xy.value();
  }
  const double scale1 = std::max(1.0, std::abs(mu1)), scale2 = std::max(1.0, std::abs(mu2));
  if (sxx.value() <= 1e-24 * scale1 * scale1 || syy.value() <= 1e-24 * scale2 * scale2) {
    throw DegenerateVariance("statistic is almost surely constant under the null");
  }
  return sxy.value() / std::sqrt(sxx.value() * syy.value());
}

}  // namespace mgof
