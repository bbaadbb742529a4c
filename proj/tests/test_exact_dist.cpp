#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <iterator>
#include <random>
#include <sstream>

#include "mgof/exact_dist.hpp"
#include "mgof/poisson_oracle.hpp"

using namespace mgof;

namespace {

void expect_atoms(const ExactDistribution& d, const std::vector<Atom>& want, double tol = 1e-14) {
  ASSERT_EQ(d.size(), want.size());
  for (std::size_t i = 0; i < want.size(); ++i) {
    EXPECT_NEAR(d.atoms()[i].value, want[i].value, tol) << i;
    EXPECT_NEAR(d.atoms()[i].prob, want[i].prob, tol) << i;
  }
}

std::vector<double> random_p(std::mt19937_64& gen, std::size_t N) {
  std::uniform_real_distribution<double> u(0.2, 1.2);
  std::vector<double> p(N);
  double s = 0.0;
  for (auto& v : p) s += (v = u(gen));
  for (auto& v : p) v /= s;
  return p;
}

double binom_pmf(std::uint64_t n, std::uint64_t k, double p) {
  return std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) + k * std::log(p) +
                  (n - k) * std::log1p(-p));
}

}  // namespace

TEST(CompositionCount, Values) {
  EXPECT_EQ(composition_count(3, 2), 4.0);
  EXPECT_EQ(composition_count(8, 6), 1287.0);
  EXPECT_EQ(composition_count(0, 5), 1.0);
  EXPECT_TRUE(std::isinf(composition_count(100000, 100000)));
}

TEST(Enumerate, SmallExamples) {
  expect_atoms(enumerate(CellFunction::chi_square(), 2, 2), {{0.0, 0.5}, {2.0, 0.5}});
  expect_atoms(enumerate(CellFunction::chi_square(), 3, 2), {{1.0 / 3.0, 0.75}, {3.0, 0.25}});
  // Empty cells with 2 balls in 3 cells: one empty w.p. 2/3, two empty w.p. 1/3.
  expect_atoms(enumerate(CellFunction::indicator(0), 2, 3), {{1.0, 2.0 / 3.0}, {2.0, 1.0 / 3.0}});
}

TEST(Enumerate, MassAndMeans) {
  std::mt19937_64 gen(11);
  for (std::size_t N = 2; N <= 5; ++N) {
    for (std::uint64_t n = 1; n <= 9; ++n) {
      const auto p = random_p(gen, N);
      const auto d = enumerate(CellFunction::indicator(0), n, p);
      EXPECT_NEAR(d.total_mass(), 1.0, 1e-13);
      double want = 0.0;
      for (double v : p) want += std::pow(1.0 - v, static_cast<double>(n));
      EXPECT_NEAR(d.mean(), want, 1e-12) << n << " " << N;
      for (std::size_t i = 1; i < d.size(); ++i) EXPECT_GT(d.atoms()[i].value, d.atoms()[i - 1].value);
    }
  }
}

// Cell counts are binomial marginally, so E S = sum_m E h(Bin(n, p_m)).
TEST(Enumerate, MeanMatchesBinomialMarginals) {
  std::mt19937_64 gen(12);
  const auto p = random_p(gen, 4);
  const std::uint64_t n = 10;
  for (const auto& h : {CellFunction::chi_square(), CellFunction::log_likelihood(), CellFunction::freeman_tukey()}) {
    const double lam = n / 4.0;
    double want = 0.0;
    for (double pm : p) {
      for (std::uint64_t k = 0; k <= n; ++k) want += binom_pmf(n, k, pm) * h(k, lam);
    }
    EXPECT_NEAR(enumerate(h, n, p).mean(), want, 1e-11) << h.name();
  }
}

TEST(Enumerate, ThreadCountDoesNotMatter) {
  const auto one = enumerate(CellFunction::log_likelihood(), 9, 5, {kDefaultEnumerationBudget, 1});
  const auto four = enumerate(CellFunction::log_likelihood(), 9, 5, {kDefaultEnumerationBudget, 4});
  ASSERT_EQ(one.size(), four.size());
  for (std::size_t i = 0; i < one.size(); ++i) {
    EXPECT_EQ(one.atoms()[i].value, four.atoms()[i].value);
    EXPECT_EQ(one.atoms()[i].prob, four.atoms()[i].prob);
  }
}

TEST(Enumerate, Errors) {
  EXPECT_THROW(enumerate(CellFunction::chi_square(), 100, 50, {1e3, 0}), BudgetExceeded);
  EXPECT_THROW(enumerate(CellFunction::chi_square(), 3, std::vector<double>{0.5, 0.6}), InvalidArgument);
  EXPECT_THROW(enumerate(CellFunction::chi_square(), 3, std::vector<double>{1.0, 0.0}), InvalidArgument);
}

TEST(ExactTail, StrictInequality) {
  const auto d = enumerate(CellFunction::chi_square(), 2, 2);
  EXPECT_NEAR(exact_tail(d, -1.0), 1.0, 1e-15);
  EXPECT_NEAR(exact_tail(d, 0.0), 0.5, 1e-15);
  EXPECT_NEAR(exact_tail(d, 1.0), 0.5, 1e-15);
  EXPECT_EQ(exact_tail(d, 2.0), 0.0);
}

TEST(ExactCritical, SmallestAtomWithinLevel) {
  const auto d = enumerate(CellFunction::chi_square(), 2, 2);
  auto c = exact_critical(d, 0.3);
  EXPECT_EQ(c.t, 2.0);
  EXPECT_EQ(c.achieved, 0.0);
  c = exact_critical(d, 0.5);
  EXPECT_EQ(c.t, 0.0);
  EXPECT_NEAR(c.achieved, 0.5, 1e-15);
  EXPECT_THROW(exact_critical(d, 0.0), InvalidArgument);

  const auto big = enumerate(CellFunction::log_likelihood(), 12, 4);
  for (double a : {0.01, 0.05, 0.2}) {
    const auto cv = exact_critical(big, a);
    EXPECT_LE(cv.achieved, a);
    EXPECT_NEAR(exact_tail(big, cv.t), cv.achieved, 1e-14);
    // The atom just below would exceed the level.
    auto it = std::find_if(big.atoms().begin(), big.atoms().end(), [&](const Atom& x) { return x.value == cv.t; });
    if (it != big.atoms().begin()) {
      EXPECT_GT(exact_tail(big, std::prev(it)->value), a);
    }
  }
}

TEST(ExactDistribution, AffineAndCsv) {
  const auto d = enumerate(CellFunction::chi_square(), 2, 2).affine(2.0, 2.0);
  expect_atoms(d, {{-1.0, 0.5}, {0.0, 0.5}});
  EXPECT_THROW(d.affine(0.0, 0.0), InvalidArgument);
  std::ostringstream os;
  d.write_csv(os);
  EXPECT_EQ(os.str(), "value,prob\n-1,0.5\n0,0.5\n");
}

TEST(ExactJointCorr, Golden) {
  // 40-digit enumeration oracle.
  EXPECT_NEAR(exact_joint_corr(CellFunction::log_likelihood(), CellFunction::chi_square(), 8, 6),
              0.96033428062177501, 1e-12);
  // C = n - N + mu0 exactly.
  EXPECT_NEAR(exact_joint_corr(CellFunction::collision(), CellFunction::indicator(0), 7, 4), 1.0, 1e-12);
  const auto flat = CellFunction::custom("flat", [](std::uint64_t, double) { return 1.0; });
  EXPECT_THROW(exact_joint_corr(flat, CellFunction::chi_square(), 5, 3), DegenerateVariance);
}

TEST(Enumerate, ChiSquareShiftUnderAlternative) {
  const std::uint64_t n = 30;
  const auto alt = make_profile(Profile::TwoBlock, 6, 0.1);
  const auto d1 = enumerate(CellFunction::chi_square(), n, alt.probabilities());
  const auto d0 = enumerate(CellFunction::chi_square(), n, 6);
  // Multinomial moments give E_1 chi2 - E_0 chi2 = (n - 1) eps_norm exactly.
  EXPECT_NEAR(d1.mean() - d0.mean(), (n - 1.0) * alt.epsilon_norm(), 1e-10);
}
