#include <gtest/gtest.h>

#include "mgof/descriptors.hpp"
#include "mgof/statistics.hpp"

using namespace mgof;

TEST(ParseStatistic, Names) {
  EXPECT_TRUE(parse_statistic("chisq").is<ChiSquareCell>());
  EXPECT_TRUE(parse_statistic("loglik").is<LogLikelihood>());
  EXPECT_TRUE(parse_statistic("pd:0").is<LogLikelihood>());
  EXPECT_TRUE(parse_statistic("collision").is<CollisionCell>());
  EXPECT_EQ(*parse_statistic("freeman-tukey").divergence_index(), -0.5);
  EXPECT_EQ(*parse_statistic("pd:0.6667").divergence_index(), 0.6667);
  EXPECT_EQ(std::get<Indicator>(parse_statistic("indicator:2").kind()).r, 2u);
}

TEST(ParseStatistic, Rejects) {
  for (const char* bad : {"", "chi", "pd:", "pd:x", "pd:1x", "pd:-1", "indicator:", "indicator:-1", "indicator:1.5"}) {
    EXPECT_THROW(parse_statistic(bad), InvalidArgument) << bad;
  }
}

TEST(ParseStatistic, Evaluates) {
  // pd:1 and chisq differ cell by cell but agree as statistics.
  const Frequencies f({3, 0, 1, 0}, 4);
  EXPECT_NEAR(evaluate(parse_statistic("pd:1"), f), evaluate(CellFunction::chi_square(), f), 1e-12);
  EXPECT_EQ(parse_statistic("indicator:1")(1, 2.0), 1.0);
  EXPECT_EQ(parse_statistic("indicator:1")(2, 2.0), 0.0);
}
