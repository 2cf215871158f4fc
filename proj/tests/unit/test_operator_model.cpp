#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "oubridge/spectral_model.hpp"

using namespace oubridge;

namespace {

SpectralModel one_mode(double alpha, double lambda) { return SpectralModel({alpha}, {lambda}); }

// Reference values below were computed with 30-digit mpmath from the closed
// forms quoted next to each assertion.
constexpr double kExpMinus1 = 0.367879441171442321595523770161;
constexpr double kOneMinusExpMinus2 = 0.864664716763387308106000505028;

}  // namespace

TEST(SemigroupFactor, Examples) {
    EXPECT_EQ(semigroup_factor(one_mode(1, 1), 0.0, 0), 1.0);
    EXPECT_EQ(semigroup_factor(one_mode(0, 1), 5.0, 0), 1.0);
    EXPECT_NEAR(semigroup_factor(one_mode(1, 1), 1.0, 0), kExpMinus1, 1e-16);
    EXPECT_THROW(semigroup_factor(one_mode(1, 1), -1.0, 0), std::invalid_argument);
    EXPECT_THROW(semigroup_factor(one_mode(1, 1), 1.0, 1), std::out_of_range);
}

TEST(CovarianceQt, Examples) {
    EXPECT_NEAR(covariance_qt(one_mode(1, 2), 1.0, 0), kOneMinusExpMinus2, 1e-15);
    EXPECT_DOUBLE_EQ(covariance_qt(one_mode(0, 3), 2.0, 0), 6.0);
    EXPECT_EQ(covariance_qt(one_mode(2.5, 0.7), 0.0, 0), 0.0);
}

TEST(CovarianceQt, SmallDecayMatchesSeriesAcrossBranchSwitch) {
    // With lambda = t = 1: Q = 1 - a + 2/3 a^2 + O(a^3), probed on both sides of a = 1e-8.
    for (double a : {5e-9, 9.9e-9, 1.01e-8, 2e-8, 1e-6}) {
        const double exact = 1.0 - a + 2.0 / 3.0 * a * a;
        EXPECT_NEAR(covariance_qt(one_mode(a, 1.0), 1.0, 0), exact, 1e-15) << a;
    }
}

TEST(StationaryVariance, Examples) {
    EXPECT_DOUBLE_EQ(stationary_variance(one_mode(1, 2), 0), 1.0);
    EXPECT_DOUBLE_EQ(stationary_variance(one_mode(2, 2), 0), 0.5);
    EXPECT_THROW(stationary_variance(one_mode(0, 1), 0), std::domain_error);
    // Limit of Q_t.
    EXPECT_NEAR(covariance_qt(one_mode(1.3, 0.4), 50.0, 0), stationary_variance(one_mode(1.3, 0.4), 0), 1e-15);
}

TEST(ContractionVt, Examples) {
    const auto m = one_mode(1, 1);
    EXPECT_EQ(contraction_vt(m, 1.0, 1.0, 0), 1.0);
    EXPECT_EQ(contraction_vt(m, 0.0, 1.0, 0), 0.0);
    EXPECT_NEAR(contraction_vt(m, 0.5, 1.0, 0), 0.518595624133095747768, 1e-15);
    EXPECT_NEAR(contraction_vt(one_mode(0, 1), 0.25, 1.0, 0), 0.5, 1e-15);
    EXPECT_THROW(contraction_vt(m, 0.0, 0.0, 0), std::invalid_argument);
    EXPECT_THROW(contraction_vt(m, 1.5, 1.0, 0), std::invalid_argument);
}

TEST(ContractionVt, StrictlyInsideUnitIntervalAndIncreasing) {
    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> alpha(0.0, 50.0), T(0.05, 3.0);
    for (int trial = 0; trial < 50; ++trial) {
        const auto m = one_mode(trial % 5 == 0 ? 0.0 : alpha(gen), 1.0);
        const double horizon = T(gen);
        double previous = 0.0;
        for (int i = 1; i < 200; ++i) {
            const double v = contraction_vt(m, horizon * i / 200.0, horizon, 0);
            ASSERT_GT(v, 0.0);
            ASSERT_LT(v, 1.0);
            ASSERT_GT(v, previous);
            previous = v;
        }
        EXPECT_GT(contraction_vt(m, horizon * (1 - 1e-9), horizon, 0), 1.0 - 1e-6);
    }
}

TEST(BridgeGain, Examples) {
    const auto m = one_mode(1, 1);
    EXPECT_EQ(bridge_gain(m, 1.0, 1.0, 0), 1.0);
    EXPECT_EQ(bridge_gain(m, 0.0, 1.0, 0), 0.0);
    EXPECT_NEAR(bridge_gain(m, 0.5, 1.0, 0), 0.443409441985036954329, 1e-15);
    EXPECT_NEAR(bridge_gain(one_mode(0, 1), 0.3, 1.2, 0), 0.25, 1e-15);
}

TEST(BridgeVariance, Examples) {
    const auto m = one_mode(1.7, 0.8);
    EXPECT_EQ(bridge_variance(m, 0.0, 1.0, 0), 0.0);
    EXPECT_EQ(bridge_variance(m, 1.0, 1.0, 0), 0.0);
    EXPECT_NEAR(bridge_variance(one_mode(0, 1), 0.5, 1.0, 0), 0.25, 1e-15);
}

TEST(FeedbackFs, Examples) {
    EXPECT_NEAR(feedback_fs(one_mode(0, 1), 0.0, 1.0, 0), 1.0, 1e-15);
    // e^{-1} / sqrt((1 - e^{-2}) / 2)
    EXPECT_NEAR(feedback_fs(one_mode(1, 1), 1.0, 2.0, 0), 0.559495563431320966928, 1e-15);
    EXPECT_THROW(feedback_fs(one_mode(1, 1), 1.0, 1.0, 0), std::invalid_argument);
    double previous = 0.0;
    for (double s : {0.9, 0.99, 0.999, 0.9999, 0.99999}) {
        const double f = feedback_fs(one_mode(1, 1), s, 1.0, 0);
        EXPECT_GT(f, previous);
        previous = f;
    }
    EXPECT_GT(previous, 100.0);
}

TEST(FeedbackFs, NonincreasingInTimeToGo) {
    std::mt19937_64 gen(11);
    std::uniform_real_distribution<double> alpha(0.0, 100.0), lambda(0.1, 5.0);
    for (int trial = 0; trial < 20; ++trial) {
        const auto m = one_mode(alpha(gen), lambda(gen));
        double previous = std::numeric_limits<double>::infinity();
        for (int i = 1; i <= 1000; ++i) {
            const double tau = 2.0 * i / 1000.0;
            const double f = feedback_fs(m, 2.0 - tau, 2.0, 0);
            ASSERT_LE(f, previous);
            previous = f;
        }
    }
}

TEST(BOperators, Examples) {
    const auto m = one_mode(0, 1);
    EXPECT_NEAR(b_operators(m, 0.0, 1.0, 0).b3, 1.0, 1e-15);
    const auto h = SpectralModel::heat(4, 0.7);
    for (std::size_t n = 0; n < 4; ++n) {
        for (double s : {0.0, 0.1, 0.25, 0.299}) {
            const BOperators b = b_operators(h, s, 0.3, n);
            EXPECT_NEAR(b.b2 / b.b3, semigroup_factor(h, 0.3, n), 1e-15);
        }
    }
    EXPECT_THROW(b_operators(m, 1.0, 1.0, 0), std::invalid_argument);
}

TEST(BOperators, ComposedFromDefinitions) {
    // B1 = F_s Q_{T-s}^{-1/2} e^{-alpha (T-s)}; B3 = Q_T^{-1/2} e^{-alpha (T-s)} sqrt(lambda) Q_T^{-1/2}.
    const auto m = one_mode(2.3, 0.6);
    const double T = 0.8;
    for (double s : {0.0, 0.4, 0.79}) {
        const double tau = T - s;
        const BOperators b = b_operators(m, s, T, 0);
        const double q_tau = covariance_qt(m, tau, 0);
        const double q_T = covariance_qt(m, T, 0);
        EXPECT_NEAR(b.b1, feedback_fs(m, s, T, 0) / std::sqrt(q_tau) * std::exp(-2.3 * tau), 1e-12 * b.b1);
        EXPECT_NEAR(b.b3, std::exp(-2.3 * tau) * std::sqrt(0.6) / q_T, 1e-12 * b.b3);
    }
}

TEST(BOperators, B2SquaredQuadratureMatchesClosedForm) {
    const auto h = SpectralModel::heat(6, 1.0);
    const double T = 0.3;
    for (std::size_t n = 0; n < 6; ++n) {
        const double exact = std::exp(-2.0 * h.alpha(n) * T) / covariance_qt(h, T, n);
        // Midpoint rule on a fine grid as an independent check of the closed form.
        const int M = 200000;
        double sum = 0.0;
        for (int j = 0; j < M; ++j) {
            const double s = T * (j + 0.5) / M;
            const double b2 = b_operators(h, s, T, n).b2;
            sum += b2 * b2 * T / M;
        }
        EXPECT_NEAR(sum, exact, 1e-6 * exact) << n;
        ModeVector unit = ModeVector::Zero(6);
        unit[static_cast<Eigen::Index>(n)] = 1.0;
        EXPECT_NEAR(b2_isometry_integral(h, T, unit)[static_cast<Eigen::Index>(n)], exact, 1e-6 * exact);
    }
}

TEST(BOperators, B3NormScalesLikeInverseTimeToGoInTheSpectralRange) {
    const auto h = SpectralModel::heat(64, 1.0);
    const double T = 1.0;
    // tau between 1/alpha_max and 1/alpha_1: ||B3(s)|| (T - s) is bounded
    // above and below.
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    const double tau_min = 1.0 / h.alpha(63), tau_max = 1.0 / h.alpha(0);
    for (int i = 0; i <= 200; ++i) {
        const double tau = tau_min * std::pow(tau_max / tau_min, i / 200.0);
        const double v = b3_operator_norm(h, T - tau, T) * tau;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    EXPECT_GT(lo, 0.2);
    EXPECT_LT(hi, 1.0);
    // Each mode stays bounded as s -> T.
    EXPECT_NEAR(b_operators(h, T - 1e-12, T, 0).b3, std::sqrt(1.0) / covariance_qt(h, T, 0), 1e-6);
}

TEST(StationaryContraction, Examples) {
    EXPECT_EQ(stationary_contraction(one_mode(1, 1), 0.0, 0), 1.0);
    EXPECT_NEAR(stationary_contraction(one_mode(1, 1), 1.0, 0), kExpMinus1, 1e-16);
    EXPECT_NEAR(stationary_contraction_norm(SpectralModel::heat(8), 0.1), 0.372707838853437913578, 1e-15);
    EXPECT_THROW(stationary_contraction(one_mode(0, 1), 1.0, 0), std::domain_error);
}

TEST(RegularityCt, Examples) {
    EXPECT_NEAR(regularity_ct(one_mode(1, 2), 1.0, 0), 0.156517642749665651818, 1e-15);
    EXPECT_LT(regularity_ct(one_mode(1, 2), 40.0, 0), 1e-30);
    // 2 e^{-2 alpha T} (alpha / lambda) / (1 - e^{-2 alpha T})
    const double a = 3.1, l = 0.45, T = 0.2;
    EXPECT_NEAR(regularity_ct(one_mode(a, l), T, 0),
                2.0 * std::exp(-2 * a * T) * (a / l) / (1 - std::exp(-2 * a * T)), 1e-13);
}

TEST(OperatorIdentities, CovarianceSplitAndBridgeFactorization) {
    for (int ia = 0; ia < 10; ++ia) {
        const double alpha = ia == 0 ? 0.0 : std::pow(10.0, -3.0 + 0.6 * ia);
        for (int il = 0; il < 10; ++il) {
            const double lambda = std::pow(10.0, -2.0 + 0.45 * il);
            const auto m = one_mode(alpha, lambda);
            const double T = 0.7;
            for (int it = 0; it < 10; ++it) {
                const double t = T * it / 9.0;
                const double whole = covariance_qt(m, T, 0);
                const double split = covariance_qt(m, t, 0) +
                                     std::exp(-2 * alpha * t) * covariance_qt(m, T - t, 0);
                ASSERT_NEAR(split, whole, 1e-12 * whole);
                const double v = contraction_vt(m, t, T, 0);
                const double factored = covariance_qt(m, t, 0) * (1 - v * v);
                ASSERT_NEAR(bridge_variance(m, t, T, 0), factored, 1e-14 * std::max(whole, 1e-300) + 1e-13 * factored);
            }
        }
    }
}

TEST(SineTransform, Examples) {
    const auto h = SpectralModel::heat(3);
    ModeVector e1 = ModeVector::Zero(3);
    e1[0] = 1.0;
    const std::vector<double> half{0.5};
    EXPECT_NEAR(synthesize(h, e1, half)[0], std::numbers::sqrt2, 1e-15);
    const auto grid = interior_grid(7);
    EXPECT_EQ(synthesize(h, ModeVector::Zero(3), grid).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_THROW(synthesize(SpectralModel({1.0}, {1.0}), ModeVector::Ones(1), half), std::invalid_argument);
}

TEST(SineTransform, RoundTripOnFineGrid) {
    const auto h = SpectralModel::heat(64);
    std::mt19937_64 gen(3);
    std::normal_distribution<double> z;
    ModeVector c(64);
    for (auto& v : c) v = z(gen);
    const auto grid = interior_grid(512);
    const ModeVector back = analyze(h, synthesize(h, c, grid), grid);
    EXPECT_LT((back - c).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(SpectralModel, Validation) {
    EXPECT_THROW(SpectralModel({1.0}, {0.0}), std::invalid_argument);
    EXPECT_THROW(SpectralModel({-1.0}, {1.0}), std::invalid_argument);
    EXPECT_THROW(SpectralModel({1.0, 2.0}, {1.0}), std::invalid_argument);
    EXPECT_THROW(SpectralModel({1.0}, {1.0}, Basis::dirichlet_sine), std::invalid_argument);
    const auto h = SpectralModel::heat(8);
    EXPECT_NEAR(h.alpha(2), 9 * std::numbers::pi * std::numbers::pi, 1e-12);
    EXPECT_TRUE(h.has_invariant_measure());
    EXPECT_FALSE(SpectralModel({0.0, 1.0}, {1.0, 1.0}).has_invariant_measure());
    EXPECT_THROW(SpectralModel({0.0}, {1.0}).invariant_trace(), std::domain_error);
}
