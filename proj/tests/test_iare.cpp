#include <gtest/gtest.h>

#include <cmath>

#include "mgof/iare.hpp"

using namespace mgof;

namespace {
RhoFunction flat(double r) {
  return [r](double) { return r; };
}
const GrowthLaw kSparse(1.0, 1.0);
}  // namespace

TEST(Regime, Classification) {
  EXPECT_EQ(classify_regime(GrowthLaw(2.0, 1.0)).tag, RegimeTag::Sparse);
  EXPECT_DOUBLE_EQ(*classify_regime(GrowthLaw(2.0, 1.0)).lambda, 0.5);
  EXPECT_EQ(classify_regime(GrowthLaw(1.0, 0.5)).tag, RegimeTag::Dense);
  EXPECT_EQ(classify_regime(GrowthLaw(1.0, 1.5)).tag, RegimeTag::VerySparse);
  EXPECT_FALSE(classify_regime(GrowthLaw(1.0, 1.5)).lambda);
}

TEST(Tau, Validation) {
  EXPECT_THROW(TauSpec::constant(0.0), InvalidArgument);
  EXPECT_THROW(TauSpec::constant(0.6), InvalidArgument);
  EXPECT_THROW(TauSpec::vanishing().value(), InvalidArgument);
  EXPECT_EQ(TauSpec::constant(0.25).value(), 0.25);
}

TEST(ClosedFormIare, ConstantRho) {
  const auto half = TauSpec::constant(0.5);
  EXPECT_NEAR(closed_form_iare(flat(1.0), flat(0.9), kSparse, half, 1000), 1.0 / 0.81, 1e-10);
  EXPECT_NEAR(closed_form_iare(flat(0.9), flat(1.0), kSparse, half, 1000), 0.81, 1e-10);
  // Exponent 1 / (2 - q) away from q = 1.
  EXPECT_NEAR(closed_form_iare(flat(1.0), flat(0.9), GrowthLaw(1.0, 0.5), half, 1000), std::pow(1.0 / 0.81, 1 / 1.5),
              1e-9);
  EXPECT_NEAR(closed_form_iare(flat(1.0), flat(1.0), kSparse, TauSpec::constant(0.25), 1000), 0.5, 1e-10);
  EXPECT_EQ(closed_form_iare(flat(1.0), flat(0.9), kSparse, TauSpec::vanishing(), 1000), 0.0);
  EXPECT_THROW(closed_form_iare(flat(1.0), flat(0.0), kSparse, half, 1000), DegenerateVariance);
}

TEST(ClosedFormIare, SameStatisticIsOne) {
  const auto half = TauSpec::constant(0.5);
  for (const auto& h : {CellFunction::log_likelihood(), CellFunction::freeman_tukey(), CellFunction::indicator(0)}) {
    for (const auto& g : {kSparse, GrowthLaw(0.5, 1.0), GrowthLaw(1.0, 0.6), GrowthLaw(1.0, 1.4)}) {
      EXPECT_NEAR(closed_form_iare(h, h, g, half, 2000), 1.0, 1e-8) << h.name() << " q=" << g.q();
    }
  }
}

TEST(ClosedFormIare, SparseMatchesPitman) {
  // lambda_n is constant when q = 1, so e is the Pitman ratio.
  const auto h = CellFunction::chi_square(), psi = CellFunction::log_likelihood();
  const auto e = closed_form_iare(h, psi, GrowthLaw(1.0, 1.0), TauSpec::constant(0.5), 500);
  EXPECT_NEAR(e, pitman_efficiency(h, psi, 1.0), 1e-10);
  EXPECT_GT(e, 1.0);
}

TEST(ClosedFormIare, MonotoneInTau) {
  const auto h = CellFunction::chi_square(), psi = CellFunction::freeman_tukey();
  double prev = 0.0;
  for (double t : {0.05, 0.1, 0.2, 0.3, 0.5}) {
    const double e = closed_form_iare(h, psi, GrowthLaw(1.0, 0.8), TauSpec::constant(t), 5000);
    EXPECT_GT(e, prev);
    prev = e;
  }
}

TEST(ClosedFormIare, DenseTendsToOne) {
  const double e = closed_form_iare(CellFunction::chi_square(), CellFunction::log_likelihood(), GrowthLaw(1.0, 0.5),
                                    TauSpec::constant(0.5), 1'000'000);
  EXPECT_NEAR(e, 1.0, 0.02);
}

TEST(Pitman, LargeLambda) {
  // 40-digit oracle value.
  EXPECT_NEAR(pitman_efficiency(CellFunction::chi_square(), CellFunction::log_likelihood(), 100.0),
              1.0033675221019898, 1e-9);
}

TEST(Describe, Kinds) {
  EXPECT_EQ(std::get<PsiDivergence>(describe(CellFunction::log_likelihood())).d, 0.0);
  EXPECT_EQ(std::get<PsiDivergence>(describe(CellFunction::chi_square())).d, 1.0);
  EXPECT_EQ(std::get<PsiIndicator>(describe(CellFunction::indicator(2))).r, 2u);
  EXPECT_TRUE(std::holds_alternative<PsiCollision>(describe(CellFunction::collision())));
  EXPECT_THROW(describe(CellFunction::custom("x", [](std::uint64_t k, double) { return 1.0 * k; })),
               InvalidArgument);
}

TEST(Cramer, Flag) {
  EXPECT_TRUE(cramer_flag(PsiDivergence{0.0}));
  EXPECT_TRUE(cramer_flag(PsiDivergence{-0.5}));
  EXPECT_FALSE(cramer_flag(PsiDivergence{0.5}));
  EXPECT_FALSE(cramer_flag(PsiDivergence{1.0}));
  EXPECT_TRUE(cramer_flag(PsiIndicator{0}));
  EXPECT_TRUE(cramer_flag(PsiCollision{}));
}

namespace {
Verdict verdict_for(const PsiDescriptor& psi, double q, double gamma) {
  const GrowthLaw g(1.0, q);
  return theorem_verdict(psi, g, RateFamily(Profile::TwoBlock, 1.0, gamma, g));
}
}  // namespace

TEST(Verdict, Sparse) {
  auto v = verdict_for(PsiDivergence{0.0}, 1.0, 0.4);
  EXPECT_EQ(v.verdict(), "e>1");
  EXPECT_EQ(v.theorem, "Corollary 2.1");
  v = verdict_for(PsiDivergence{0.0}, 1.0, 0.3);
  EXPECT_EQ(v.verdict(), "e=0");
  v = verdict_for(PsiDivergence{-0.5}, 1.0, 0.3);
  EXPECT_EQ(v.verdict(), "e=0");
  EXPECT_EQ(v.theorem, "Theorem 2.2(ii)");
  v = verdict_for(PsiDivergence{0.0}, 1.0, 1.0 / 3.0);
  EXPECT_EQ(v.verdict(), "open");
  EXPECT_EQ(v.theorem, "Conclusion (open problem)");
  // Non-Cramer kernel: only the d*-dependent rate decides.
  v = verdict_for(PsiDivergence{2.0}, 1.0, 0.45);
  EXPECT_EQ(v.verdict(), "e>1");
  EXPECT_EQ(v.theorem, "Theorem 2.2(i)");
  EXPECT_EQ(verdict_for(PsiDivergence{2.0}, 1.0, 0.3).verdict(), "open");
  EXPECT_EQ(verdict_for(PsiDivergence{1.0}, 1.0, 0.45).verdict(), "open");
}

TEST(Verdict, VerySparse) {
  auto v = verdict_for(PsiDivergence{0.0}, 1.1, 0.4);
  EXPECT_EQ(v.verdict(), "e=1");
  EXPECT_EQ(v.theorem, "Corollary 2.2");
  // lambda_n ~ n^{-0.2} falls below n^{-1/6}: outside the covered range.
  EXPECT_EQ(verdict_for(PsiDivergence{0.0}, 1.2, 0.4).verdict(), "open");
  v = verdict_for(PsiIndicator{0}, 1.2, 0.4);
  EXPECT_EQ(v.verdict(), "e=1");
  EXPECT_EQ(v.theorem, "Theorem 2.4");
  EXPECT_EQ(verdict_for(PsiCollision{}, 1.5, 0.4).verdict(), "e=1");
  EXPECT_EQ(verdict_for(PsiIndicator{3}, 1.2, 0.4).verdict(), "open");
  v = verdict_for(PsiDivergence{1.0}, 1.1, 0.4);
  EXPECT_EQ(v.verdict(), "e=1");
  EXPECT_EQ(v.theorem, "Theorem 2.3(B)");
  v = verdict_for(PsiDivergence{-0.5}, 1.1, 0.4);
  EXPECT_EQ(v.theorem, "Theorem 2.3(A)(i)");
}

TEST(Verdict, Dense) {
  auto v = verdict_for(PsiDivergence{0.0}, 0.5, 0.7);
  EXPECT_EQ(v.verdict(), "e=1");
  EXPECT_EQ(v.theorem, "Theorem 2.5(i)");
  EXPECT_EQ(verdict_for(PsiDivergence{0.0}, 0.5, 0.5).verdict(), "open");
  v = verdict_for(PsiDivergence{0.0}, 0.3, 0.75);
  EXPECT_EQ(v.verdict(), "e=1");
  EXPECT_EQ(v.theorem, "Theorem 2.5(ii)");
  EXPECT_EQ(verdict_for(PsiDivergence{-0.5}, 0.3, 0.75).verdict(), "open");
  EXPECT_EQ(verdict_for(PsiIndicator{0}, 0.5, 0.7).verdict(), "open");
}

TEST(Verdict, ConditionsAreReported) {
  const auto v = verdict_for(PsiDivergence{0.0}, 1.0, 1.0 / 3.0);
  ASSERT_FALSE(v.conditions.empty());
  bool unresolved = false;
  for (const auto& c : v.conditions) {
    EXPECT_FALSE(c.text.empty());
    unresolved |= c.text.rfind("unresolved: ", 0) == 0;
  }
  EXPECT_TRUE(unresolved);
  for (const auto& c : verdict_for(PsiDivergence{0.0}, 1.0, 0.4).conditions) {
    if (c.text == condition_text::kBelowCubeRoot) {
      EXPECT_TRUE(c.satisfied());
    }
  }
}
