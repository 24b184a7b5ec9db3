#include <gtest/gtest.h>

#include <cmath>

#include "orgbin/eval/student_t.hpp"
#include "support.hpp"

#ifdef ORGBIN_HAVE_BOOST
#include <boost/math/distributions/students_t.hpp>
#endif

using namespace orgbin;
using namespace orgbin::eval;

TEST(StudentT, TableValuesNineDegrees) {
  const std::vector<std::pair<double, double>> table{
      {0.0, 0.5}, {1.383, 0.10}, {1.833, 0.05}, {2.821, 0.01}, {4.781, 0.0005}};
  for (auto [t, p] : table) EXPECT_NEAR(student_t_upper_tail(t, 9), p, 2e-4) << t;
  EXPECT_NEAR(student_t_upper_tail(-1.833, 9), 0.95, 2e-4);
}

TEST(StudentT, CauchyClosedForm) {
  // df = 1 is the Cauchy distribution: P(T > t) = 1/2 - atan(t) / pi.
  for (double t : {-3.0, -0.5, 0.0, 0.25, 1.0, 7.5}) EXPECT_NEAR(student_t_upper_tail(t, 1), 0.5 - std::atan(t) / M_PI, 1e-12);
}

#ifdef ORGBIN_HAVE_BOOST
TEST(StudentT, MatchesReferenceLibrary) {
  Rng rng(3);
  for (int i = 0; i < 500; ++i) {
    const double df = 1 + static_cast<double>(rng.below(40));
    const double t = rng.uniform(-8, 8);
    boost::math::students_t dist(df);
    EXPECT_NEAR(student_t_upper_tail(t, df), boost::math::cdf(boost::math::complement(dist, t)), 1e-10);
  }
}
#endif

TEST(StudentT, IncompleteBetaEdges) {
  EXPECT_EQ(incomplete_beta(2, 3, 0), 0.0);
  EXPECT_EQ(incomplete_beta(2, 3, 1), 1.0);
  EXPECT_NEAR(incomplete_beta(1, 1, 0.3), 0.3, 1e-14);
  EXPECT_NEAR(incomplete_beta(2, 1, 0.3), 0.09, 1e-14);
  EXPECT_THROW(incomplete_beta(0, 1, 0.5), DataError);
  EXPECT_THROW(incomplete_beta(1, 1, 1.5), DataError);
  EXPECT_THROW(student_t_upper_tail(1, 0), DataError);
}

TEST(Stars, ThresholdsAreStrict) {
  EXPECT_EQ(significance_stars(0.05), "");
  EXPECT_EQ(significance_stars(std::nextafter(0.05, 0.0)), "*");
  EXPECT_EQ(significance_stars(0.01), "*");
  EXPECT_EQ(significance_stars(std::nextafter(0.01, 0.0)), "**");
  EXPECT_EQ(significance_stars(0.001), "**");
  EXPECT_EQ(significance_stars(std::nextafter(0.001, 0.0)), "***");
  EXPECT_EQ(significance_stars(0.5), "");
}

TEST(PairedTTest, HandComputed) {
  std::vector<double> a{0.9, 0.8, 0.85, 0.95}, b{0.7, 0.75, 0.8, 0.7};
  // Differences 0.2, 0.05, 0.05, 0.25: mean 0.1375, sample sd from the definition.
  const double mean = 0.1375;
  double ss = 0;
  for (double d : {0.2, 0.05, 0.05, 0.25}) ss += (d - mean) * (d - mean);
  const double t = mean / (std::sqrt(ss / 3) / 2);
  auto r = paired_ttest(a, b);
  EXPECT_NEAR(r.t, t, 1e-12);
  EXPECT_NEAR(r.p, student_t_upper_tail(t, 3), 1e-15);
  auto rev = paired_ttest(b, a);
  EXPECT_NEAR(rev.t, -t, 1e-12);
  EXPECT_NEAR(rev.p, 1 - r.p, 1e-12);
}

TEST(PairedTTest, ZeroVarianceCases) {
  std::vector<double> a{0.5, 0.6, 0.7}, b{0.4, 0.5, 0.6};
  auto same = paired_ttest(a, a);
  EXPECT_EQ(same.t, 0.0);
  EXPECT_EQ(same.p, 0.5);
  std::vector<double> c{0.75, 0.75, 0.75}, d{0.5, 0.5, 0.5};
  auto up = paired_ttest(c, d);
  EXPECT_TRUE(std::isinf(up.t) && up.t > 0);
  EXPECT_EQ(up.p, 0.0);
  EXPECT_EQ(paired_ttest(d, c).p, 1.0);
  EXPECT_THROW(paired_ttest(std::vector<double>{1.0}, std::vector<double>{2.0}), DataError);
  EXPECT_THROW(paired_ttest(a, std::vector<double>{1.0}), DataError);
}
