#include <cmath>
#include <stdexcept>

#include <gtest/gtest.h>

#include "oubridge/time_grid.hpp"

using namespace oubridge;

TEST(TimeGrid, UniformHitsHorizonExactly) {
    const TimeGrid g = TimeGrid::uniform(0.3, 7);
    EXPECT_EQ(g.size(), 8u);
    EXPECT_EQ(g.node(0), 0.0);
    EXPECT_EQ(g.node(7), 0.3);
    EXPECT_EQ(g.epsilon_cutoff(), 0.0);
    EXPECT_NEAR(g.max_step(), 0.3 / 7, 1e-16);
    EXPECT_NEAR(g.min_step(), 0.3 / 7, 1e-16);
    EXPECT_THROW(TimeGrid::uniform(1.0, 0), std::invalid_argument);
    EXPECT_THROW(TimeGrid::uniform(-1.0, 3), std::invalid_argument);
}

TEST(TimeGrid, RefinedIsGradedTowardHorizon) {
    const double T = 1.0, dt_max = 0.01, theta = 0.05, eps = 1e-6;
    const TimeGrid g = TimeGrid::refined(T, dt_max, theta, eps);
    EXPECT_NEAR(g.epsilon_cutoff(), eps, 1e-15);
    for (std::size_t k = 0; k < g.steps(); ++k) {
        const double remaining = T - g.node(k);
        EXPECT_LE(g.step(k), std::min(dt_max, theta * remaining) * (1 + 1e-3) + 1e-15) << k;
    }
    // Uniform part plus about log(dt_max / (theta eps)) / theta graded steps.
    const double graded = std::log(dt_max / (theta * eps)) / -std::log1p(-theta);
    EXPECT_LT(static_cast<double>(g.steps()), T / dt_max + graded + 5);
    EXPECT_GT(static_cast<double>(g.steps()), T / dt_max);
}

TEST(TimeGrid, RefinedWithoutGradingIsUniformToHorizon) {
    const TimeGrid g = TimeGrid::refined(0.5, 0.1, 1.0, 0.0);
    EXPECT_EQ(g.steps(), 5u);
    EXPECT_EQ(g.node(5), 0.5);
}

TEST(TimeGrid, RejectsBadArguments) {
    EXPECT_THROW(TimeGrid::refined(1.0, 0.0, 0.1, 1e-3), std::invalid_argument);
    EXPECT_THROW(TimeGrid::refined(1.0, 0.1, 0.0, 1e-3), std::invalid_argument);
    EXPECT_THROW(TimeGrid::refined(1.0, 0.1, 1.5, 1e-3), std::invalid_argument);
    EXPECT_THROW(TimeGrid::refined(1.0, 0.1, 0.5, 0.0), std::invalid_argument);
    EXPECT_THROW(TimeGrid::refined(1.0, 0.1, 0.5, 1.0), std::invalid_argument);
    EXPECT_THROW(TimeGrid::from_nodes(1.0, {0.0}), std::invalid_argument);
    EXPECT_THROW(TimeGrid::from_nodes(1.0, {0.1, 0.5}), std::invalid_argument);
    EXPECT_THROW(TimeGrid::from_nodes(1.0, {0.0, 0.5, 0.5}), std::invalid_argument);
    EXPECT_THROW(TimeGrid::from_nodes(1.0, {0.0, 1.5}), std::invalid_argument);
}

TEST(TimeGrid, ClosedAppendsHorizonOnce) {
    const TimeGrid g = TimeGrid::from_nodes(1.0, {0.0, 0.4, 0.9});
    const TimeGrid c = g.closed();
    EXPECT_EQ(c.size(), 4u);
    EXPECT_EQ(c.node(3), 1.0);
    EXPECT_EQ(c.epsilon_cutoff(), 0.0);
    EXPECT_EQ(c.closed().size(), 4u);
}

TEST(TimeGrid, NearestNode) {
    const TimeGrid g = TimeGrid::from_nodes(1.0, {0.0, 0.4, 0.9, 1.0});
    EXPECT_EQ(g.nearest_node(-1.0), 0u);
    EXPECT_EQ(g.nearest_node(0.19), 0u);
    EXPECT_EQ(g.nearest_node(0.21), 1u);
    EXPECT_EQ(g.nearest_node(0.9), 2u);
    EXPECT_EQ(g.nearest_node(0.96), 3u);
    EXPECT_EQ(g.nearest_node(7.0), 3u);
}
