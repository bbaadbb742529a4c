#include <gtest/gtest.h>

#include <cmath>

#include "mgof/alternatives.hpp"

using namespace mgof;

TEST(AlternativeSpec, Moments) {
  const AlternativeSpec two({0.2, 0.2, -0.2, -0.2});
  EXPECT_NEAR(two.epsilon_norm(), 0.04, 1e-15);
  EXPECT_NEAR(two.epsilon_moment(3), 0.0, 1e-17);
  const AlternativeSpec one({0.3, -0.1, -0.1, -0.1});
  EXPECT_NEAR(epsilon_norm(one), 0.03, 1e-15);
  EXPECT_NEAR(epsilon_moment(one, 3), 0.006, 1e-15);
  EXPECT_EQ(epsilon_moment(one, 2), epsilon_norm(one));
  EXPECT_EQ(AlternativeSpec::null(7).epsilon_norm(), 0.0);
}

TEST(AlternativeSpec, Validation) {
  EXPECT_THROW(AlternativeSpec({0.1}), InvalidArgument);
  EXPECT_THROW(AlternativeSpec({0.1, 0.1}), InvalidArgument);
  EXPECT_THROW(AlternativeSpec({1.0, -1.0}), InvalidArgument);
  EXPECT_THROW(AlternativeSpec({NAN, 0.0}), InvalidArgument);
}

TEST(Nabla, Examples) {
  std::vector<double> e(25, std::sqrt(0.1));
  for (std::size_t m = 12; m < 24; ++m) e[m] = -std::sqrt(0.1);
  e[24] = 0.0;  // odd N: keep the sum at zero
  const AlternativeSpec spec(e);
  EXPECT_NEAR(nabla(100, spec), 100 * spec.epsilon_norm() / 5.0, 1e-12);
  EXPECT_EQ(nabla(100, AlternativeSpec::null(25)), 0.0);
  EXPECT_NEAR(nabla(400, make_profile(Profile::TwoBlock, 100, 0.09)), 3.6, 1e-12);
  EXPECT_NEAR(nabla(100, make_profile(Profile::Cosine, 25, 0.1)), 2.0, 1e-12);
}

TEST(MakeProfile, Examples) {
  const auto two = make_profile(Profile::TwoBlock, 4, 0.04);
  EXPECT_NEAR(two.eps()[0], 0.2, 1e-15);
  EXPECT_NEAR(two.eps()[3], -0.2, 1e-15);
  const auto one = make_profile(Profile::SingleCell, 4, 0.03);
  EXPECT_NEAR(one.eps()[0], 0.3, 1e-15);
  EXPECT_NEAR(one.eps()[1], -0.1, 1e-15);
  EXPECT_TRUE(make_profile(Profile::Cosine, 9, 0.0).is_null());
  EXPECT_THROW(make_profile(Profile::SingleCell, 4, 4.0), InvalidArgument);
  EXPECT_THROW(make_profile(Profile::TwoBlock, 4, 1.0), InvalidArgument);
  const auto odd = make_profile(Profile::TwoBlock, 5, 0.04);
  EXPECT_EQ(odd.eps()[2], 0.0);
}

TEST(MakeProfile, NormAndBalance) {
  for (auto prof : {Profile::TwoBlock, Profile::SingleCell, Profile::Cosine}) {
    for (std::size_t N : {2u, 3u, 10u, 101u, 1000u}) {
      for (double t : {1e-4, 0.01, 0.05}) {
        const auto s = make_profile(prof, N, t);
        EXPECT_NEAR(s.epsilon_norm(), t, 1e-12 * std::max(1.0, t)) << to_string(prof) << " " << N;
        double sum = 0.0, minp = 1.0;
        for (double e : s.eps()) {
          sum += e;
          minp = std::min(minp, 1.0 + e);
        }
        EXPECT_LE(std::abs(sum), 1e-12 * static_cast<double>(N));
        EXPECT_GT(minp, 0.0);
      }
    }
  }
}

TEST(MakeProfile, ThirdMoment) {
  EXPECT_NEAR(make_profile(Profile::TwoBlock, 100, 0.01).epsilon_moment(3), 0.0, 1e-18);
  for (std::size_t N : {10u, 100u, 1000u}) {
    const auto s = make_profile(Profile::Cosine, N, 0.01);
    EXPECT_LE(std::abs(s.epsilon_moment(3)), 1e-12 + std::pow(s.epsilon_norm(), 1.5));
  }
}

TEST(ParseProfile, Keys) {
  EXPECT_EQ(parse_profile("two-block"), Profile::TwoBlock);
  EXPECT_EQ(parse_profile("single-cell"), Profile::SingleCell);
  EXPECT_EQ(parse_profile("cosine"), Profile::Cosine);
  EXPECT_THROW(parse_profile("zigzag"), InvalidArgument);
}

TEST(ClassifyFamily, ExponentComparisons) {
  namespace ct = condition_text;
  const GrowthLaw sparse(1.0, 1.0);
  const RateFamily f04(Profile::TwoBlock, 1.0, 0.4, sparse);
  const auto r04 = classify_family(f04, {100, 1000, 10000});
  EXPECT_EQ(r04.find(ct::kBelowCubeRoot)->status, RateStatus::Satisfied);
  const auto rtie = classify_family(RateFamily(Profile::TwoBlock, 1.0, 1.0 / 3.0, sparse), {100});
  EXPECT_EQ(rtie.find(ct::kBelowCubeRoot)->status, RateStatus::Indeterminate);
  EXPECT_EQ(rtie.find(ct::kAboveCubeRootLog)->status, RateStatus::Indeterminate);

  const RateFamily f045(Profile::TwoBlock, 1.0, 0.45, sparse);
  EXPECT_NEAR(f045.nabla_exponent(), 0.05, 1e-15);
  const auto r045 = classify_family(f045, {1000, 100000});
  EXPECT_EQ(r045.in_alt_family, RateStatus::Satisfied);
  ASSERT_EQ(r045.spots.size(), 2u);
  EXPECT_GT(r045.spots[1].nabla, r045.spots[0].nabla);
  EXPECT_LT(r045.spots[1].max_term, r045.spots[0].max_term);

  // Too fast a rate: nabla_n -> 0, outside the family.
  EXPECT_EQ(classify_family(RateFamily(Profile::TwoBlock, 1.0, 0.6, sparse), {100}).in_alt_family, RateStatus::Violated);
  EXPECT_THROW(classify_family(f04, {1000, 100}), InvalidArgument);
}

TEST(RateFamily, Validation) {
  const GrowthLaw g(1.0, 1.0);
  EXPECT_THROW(RateFamily(Profile::TwoBlock, 0.0, 0.4, g), InvalidArgument);
  EXPECT_THROW(RateFamily(Profile::TwoBlock, 1.0, 0.0, g), InvalidArgument);
  EXPECT_THROW(RateFamily(Profile::TwoBlock, 1.0, 1.5, g), InvalidArgument);
  const RateFamily f(Profile::TwoBlock, 0.5, 0.4, g);
  EXPECT_NEAR(f.eps_norm(500), 0.5 * std::pow(500.0, -0.4), 1e-15);
  EXPECT_EQ(f.cells(500), 500u);
  EXPECT_NEAR(f.spec_at(500).epsilon_norm(), f.eps_norm(500), 1e-15);
}

TEST(GrowthLaw, Rounding) {
  const GrowthLaw g(2.0, 0.5);
  EXPECT_EQ(g.cells(1.0), 2u);
  EXPECT_EQ(g.cells(100.0), 20u);
  EXPECT_NEAR(g.lambda(100), 5.0, 1e-15);
  EXPECT_THROW(GrowthLaw(1.0, 2.0), InvalidArgument);
  EXPECT_THROW(GrowthLaw(-1.0, 1.0), InvalidArgument);
  std::uint64_t prev = 0;
  for (double x = 1; x < 5000; x *= 1.3) {
    EXPECT_GE(g.cells(x), prev);
    prev = g.cells(x);
  }
}
