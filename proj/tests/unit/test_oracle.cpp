#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "oubridge/errors.hpp"
#include "oubridge/gaussian_laws.hpp"
#include "oubridge/oracle.hpp"

using namespace oubridge;

namespace {

double normal_pdf(double z, double mean, double var) {
    return std::exp(-0.5 * (z - mean) * (z - mean) / var) / std::sqrt(2.0 * std::numbers::pi * var);
}

double max_abs_error(const MeshDensity& mesh, double mean, double var) {
    double worst = 0.0;
    for (std::size_t i = 0; i < mesh.nodes.size(); ++i) {
        worst = std::max(worst, std::abs(mesh.values[i] - normal_pdf(mesh.nodes[i], mean, var)));
    }
    return worst;
}

}  // namespace

TEST(FokkerPlanck, LinearCaseIsOuMarginal) {
    const double alpha = 1.0, lambda = 1.0, x0 = 0.5, T = 1.0;
    const MeshDensity fp = fokker_planck_1d(alpha, lambda, [](double) { return 0.0; }, x0, T);
    const double var = lambda * (1.0 - std::exp(-2.0 * alpha * T)) / (2.0 * alpha);
    EXPECT_LT(max_abs_error(fp, std::exp(-alpha * T) * x0, var), 1e-4);
    EXPECT_NEAR(fp.mass, 1.0, 1e-6);
}

TEST(FokkerPlanck, HeatKernelWithoutDecay) {
    const MeshDensity fp = fokker_planck_1d(0.0, 2.0, [](double) { return 0.0; }, -0.4, 0.5);
    EXPECT_LT(max_abs_error(fp, -0.4, 1.0), 1e-4);
    EXPECT_NEAR(fp.mass, 1.0, 1e-6);
}

TEST(FokkerPlanck, ConstantDriftShiftsMean) {
    // dX = (-X + sqrt(2) * 0.5) dt + sqrt(2) dW: mean 0.5 sqrt(2) (1 - e^{-T}) from 0.
    const MeshDensity fp = fokker_planck_1d(1.0, 2.0, [](double) { return 0.5; }, 0.0, 0.7);
    const double mean = 0.5 * std::sqrt(2.0) * (1.0 - std::exp(-0.7));
    EXPECT_LT(max_abs_error(fp, mean, 1.0 - std::exp(-1.4)), 1e-4);
}

TEST(FokkerPlanck, GuardsAgainstBadMeshes) {
    FokkerPlanckOptions coarse;
    coarse.cells = 20;
    EXPECT_THROW(fokker_planck_1d(50.0, 1.0, [](double) { return 0.0; }, 0.0, 1.0, coarse), NumericalError);
    FokkerPlanckOptions narrow;
    narrow.width_sd = 2.0;
    EXPECT_THROW(fokker_planck_1d(1.0, 1.0, [](double) { return 0.0; }, 0.0, 1.0, narrow), NumericalError);
    EXPECT_THROW(fokker_planck_1d(1.0, 0.0, [](double) { return 0.0; }, 0.0, 1.0), std::invalid_argument);
}

TEST(MeshDensity, CentralInterval) {
    const MeshDensity fp = fokker_planck_1d(0.0, 1.0, [](double) { return 0.0; }, 0.0, 1.0);
    const auto [lo, hi] = fp.central_interval(0.95);
    EXPECT_NEAR(lo, -1.959963984540054, 2e-3);
    EXPECT_NEAR(hi, 1.959963984540054, 2e-3);
    EXPECT_NEAR(fp.integrate(lo, hi), 0.95, 1e-4);
    EXPECT_THROW(fp.central_interval(1.0), std::invalid_argument);
}

TEST(Histogram, DensityAndErrorBars) {
    std::mt19937_64 gen(1);
    std::normal_distribution<double> normal;
    std::vector<double> big(160000);
    for (double& v : big) v = normal(gen);
    const std::span<const double> all(big);
    const HistogramDensity small = mc_histogram_density(all.first(40000), 20, -3.0, 3.0);
    const HistogramDensity large = mc_histogram_density(all, 20, -3.0, 3.0);
    for (std::size_t i = 5; i < 15; ++i) {
        EXPECT_NEAR(large.std_error[i] / small.std_error[i], 0.5, 0.05) << i;
        EXPECT_NEAR(large.density[i], normal_pdf(large.center(i), 0.0, 1.0), 5.0 * large.std_error[i] + 2e-3);
    }
    EXPECT_EQ(large.n, 160000u);
    EXPECT_THROW(mc_histogram_density([](std::size_t) { return 0.0; }, 100, 10, 0.0, 1.0), std::invalid_argument);
}

TEST(ChiSquare, AcceptsTrueLawRejectsShifted) {
    const MeshDensity fp = fokker_planck_1d(1.0, 2.0, [](double) { return 0.0; }, 0.0, 5.0);
    std::mt19937_64 gen(2);
    std::normal_distribution<double> normal;
    std::vector<double> good(20000), bad(20000);
    for (std::size_t i = 0; i < good.size(); ++i) {
        good[i] = normal(gen);
        bad[i] = 0.1 + normal(gen);
    }
    const ChiSquareResult ok = chi_square_test(mc_histogram_density(good, 40, -3.5, 3.5), fp);
    const ChiSquareResult shifted = chi_square_test(mc_histogram_density(bad, 40, -3.5, 3.5), fp);
    EXPECT_GT(ok.p_value, 1e-3) << ok.statistic;
    EXPECT_LT(shifted.p_value, 1e-6) << shifted.statistic;
    EXPECT_GE(ok.dof, 30u);
}

TEST(ScalarBridge, MatchesSpectralBridge) {
    for (const double alpha : {0.0, 0.3, 5.0}) {
        const SpectralModel m({alpha}, {1.7});
        const ModeVector x = ModeVector::Constant(1, 0.8), y = ModeVector::Constant(1, -1.1);
        for (const double t : {0.0, 0.1, 0.6, 1.2}) {
            const ScalarMoments s = scalar_bridge_moments(alpha, 1.7, 0.8, -1.1, 1.2, t);
            const GaussianMarginal law = bridge_marginal(m, x, y, t, 1.2);
            EXPECT_NEAR(s.mean, law.mean[0], 1e-12) << alpha << ' ' << t;
            EXPECT_NEAR(s.variance, law.variance[0], 1e-12) << alpha << ' ' << t;
        }
    }
}
