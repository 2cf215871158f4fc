#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "oubridge/statistics.hpp"

using namespace oubridge;

TEST(MomentAccumulator, SmallSampleExact) {
    MomentAccumulator acc;
    for (double v : {1.0, 2.0, 3.0, 4.0}) acc.add(v);
    EXPECT_EQ(acc.count(), 4u);
    EXPECT_DOUBLE_EQ(acc.mean(), 2.5);
    EXPECT_DOUBLE_EQ(acc.variance(), 5.0 / 3.0);
    EXPECT_DOUBLE_EQ(acc.mean_std_error(), std::sqrt(5.0 / 12.0));
    // central m2 = 1.25, m4 = (2 * 1.5^4 + 2 * 0.5^4) / 4 = 2.5625
    EXPECT_DOUBLE_EQ(acc.variance_std_error(), std::sqrt((2.5625 - 1.5625) / 4.0));
}

TEST(MomentAccumulator, MergeMatchesSequential) {
    std::mt19937_64 gen(5);
    std::gamma_distribution<double> skewed(2.0, 1.5);
    MomentAccumulator all, a, b;
    for (int i = 0; i < 1000; ++i) {
        const double v = skewed(gen);
        all.add(v);
        (i < 317 ? a : b).add(v);
    }
    a.merge(b);
    EXPECT_EQ(a.count(), all.count());
    EXPECT_NEAR(a.mean(), all.mean(), 1e-13);
    EXPECT_NEAR(a.variance(), all.variance(), 1e-12);
    EXPECT_NEAR(a.variance_std_error(), all.variance_std_error(), 1e-12);
    MomentAccumulator empty;
    empty.merge(all);
    EXPECT_EQ(empty.mean(), all.mean());
}

TEST(ExpMean, ShiftInvariantAndStable) {
    const std::vector<double> lw{0.0, std::log(2.0), std::log(3.0)};
    const ExpMeanSummary s = exp_mean(lw);
    EXPECT_DOUBLE_EQ(s.value, 2.0);
    EXPECT_DOUBLE_EQ(s.std_error, std::sqrt(1.0 / 3.0));
    EXPECT_DOUBLE_EQ(s.effective_sample_size, 36.0 / 14.0);
    // Exponents far beyond the double range still give a finite ratio.
    const std::vector<double> big{1000.0, 1000.0 + std::log(3.0)};
    const ExpMeanSummary t = exp_mean(big);
    EXPECT_TRUE(std::isinf(t.value));
    EXPECT_NEAR(t.effective_sample_size, 16.0 / 10.0, 1e-12);
    const std::vector<double> tiny{-1000.0, -1000.0};
    EXPECT_DOUBLE_EQ(exp_mean(tiny).effective_sample_size, 2.0);
    EXPECT_THROW(exp_mean(std::vector<double>{}), std::invalid_argument);
}
