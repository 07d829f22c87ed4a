#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "bidiruin/paths.hpp"
#include "oracles.hpp"

using namespace bidiruin;

namespace {

grid_path path_of(std::vector<double> v, double horizon = 1.0) {
    const std::size_t n = v.size() - 1;
    return grid_path{n, horizon, std::move(v)};
}

}  // namespace

TEST(SampleBm, StartsAtZeroAndIsDeterministic) {
    for (std::uint64_t s = 0; s < 20; ++s) {
        const auto p = sample_bm(64, 2.0, {s, s * 3});
        EXPECT_EQ(p.values[0], 0.0);
        EXPECT_EQ(p.values.size(), 65u);
        EXPECT_EQ(p.values, sample_bm(64, 2.0, {s, s * 3}).values);
    }
}

TEST(SampleBm, PrefixStableAcrossGridRefinement) {
    // Refining the grid changes the increments but keeps the raw noise prefix.
    const counter_stream noise({3, 4}, 0);
    const auto p = sample_bm(8, 1.0, {3, 4});
    const double sd = std::sqrt(1.0 / 8.0);
    double level = 0.0;
    for (std::size_t k = 1; k <= 8; ++k) {
        level += sd * noise.normal(k - 1);
        EXPECT_DOUBLE_EQ(p.values[k], level);
    }
}

TEST(SampleBm, TerminalVariance) {
    const std::size_t n = 100000;
    double s = 0, s2 = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = sample_bm(4, 1.0, {2024, i}).values.back();
        s += x;
        s2 += x * x;
    }
    const double var = (s2 - s * s / n) / (n - 1);
    EXPECT_NEAR(var, 1.0, 3.0 * std::sqrt(2.0 / n));
}

TEST(SampleBm, IncrementsIndependentAcrossSteps) {
    const std::size_t n = 50000;
    double cross = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto p = sample_bm(2, 2.0, {8, i});
        cross += p.values[1] * (p.values[2] - p.values[1]);
    }
    EXPECT_NEAR(cross / n, 0.0, 4.0 / std::sqrt(double(n)));
}

TEST(SampleBm, RejectsBadGrid) {
    EXPECT_THROW(sample_bm(0, 1.0, {}), error);
    EXPECT_THROW(sample_bm(4, 0.0, {}), error);
    EXPECT_THROW(sample_bm(4, -1.0, {}), error);
}

TEST(Drifted, HandExamples) {
    const auto p = path_of({0, 1, 2});
    EXPECT_EQ(drifted(p, 0).values, p.values);
    EXPECT_EQ(drifted(p, 2).values, (std::vector<double>{0, 0, 0}));
    EXPECT_EQ(drifted(path_of({0, 0, 0}), -1).values, (std::vector<double>{0, 0.5, 1}));
}

TEST(RunningInf, HandExamples) {
    EXPECT_EQ(running_inf(path_of({0, -1, 0.5})).values, (std::vector<double>{0, -1, -1}));
    EXPECT_EQ(running_inf(path_of({0, 1, 2})).values, (std::vector<double>{0, 0, 0}));
    EXPECT_EQ(running_inf(path_of({0.7, 0.7, 0.7})).values, (std::vector<double>{0.7, 0.7, 0.7}));
}

TEST(RunningInf, NonincreasingAndBelowInput) {
    for (std::uint64_t s = 0; s < 50; ++s) {
        const auto y = drifted(sample_bm(128, 1.0, {s, 0}), 0.5);
        const auto low = running_inf(y);
        const auto bridged = running_inf_bridge(y, counter_stream({s, 0}, 1));
        EXPECT_EQ(low.values[0], y.values[0]);
        for (std::size_t k = 0; k < y.values.size(); ++k) {
            EXPECT_LE(low.values[k], y.values[k]);
            EXPECT_LE(bridged.values[k], low.values[k]);
            if (k) {
                EXPECT_LE(low.values[k], low.values[k - 1]);
                EXPECT_LE(bridged.values[k], bridged.values[k - 1]);
            }
        }
    }
}

TEST(RunningInfBridge, ExactLawOfTheMinimumOnACoarseGrid) {
    // With bridge minima the infimum is exact in law: P(inf_[0,1] B < -1) = 2 Phi(-1).
    const std::size_t n = 100000;
    std::size_t below = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto p = sample_bm(4, 1.0, {99, i});
        below += running_inf_bridge(p, counter_stream({99, i}, 1)).values.back() < -1.0;
    }
    const double expected = 2.0 * oracle::normal_cdf(-1.0);
    const double frac = double(below) / n;
    EXPECT_NEAR(frac, expected, 3.0 * std::sqrt(expected * (1 - expected) / n));
}

TEST(Reflect, HandExamples) {
    const auto y = path_of({0, -1, 0.5});
    EXPECT_EQ(reflect(y, 0.0).values, y.values);
    EXPECT_EQ(reflect(y, 1.0).values, (std::vector<double>{0, 0, 1.5}));
    EXPECT_EQ(reflect(y, 0.5).values, (std::vector<double>{0, -0.5, 1.0}));
}

TEST(Reflect, WorkloadIsNonnegative) {
    for (std::uint64_t s = 0; s < 100; ++s) {
        const auto y = drifted(sample_bm(256, 1.0, {s, 1}), 1.0);
        for (double v : reflect(y, 1.0).values) EXPECT_GE(v, 0.0);
        const auto low = running_inf_bridge(y, counter_stream({s, 1}, 1));
        for (double v : reflect(y, 1.0, low).values) EXPECT_GE(v, 0.0);
    }
}

TEST(Reflect, RejectsTaxOutsideRange) {
    const auto y = path_of({0, -1, 0.5});
    EXPECT_THROW(reflect(y, 2.0), error);
    EXPECT_THROW(reflect(y, -0.5), error);
    EXPECT_THROW(reflect(y, 1.0, path_of({0, 0})), error);
}

TEST(Pipeline, BitIdenticalAcrossRuns) {
    auto run = [] {
        const auto y = drifted(sample_bm(512, 1.0, {5, 17}), 0.3);
        return reflect(y, 0.8, running_inf_bridge(y, counter_stream({5, 17}, 1))).values;
    };
    EXPECT_EQ(run(), run());
}

TEST(BridgeMin, UnitUniformGivesEndpointMinimum) {
    EXPECT_EQ(bridge_min_sample(0.3, -0.2, 0.1, 1.0), -0.2);
    EXPECT_EQ(bridge_min_sample(-1.0, 2.0, 5.0, 1.0), -1.0);
}

TEST(BridgeMin, VanishingInterval) {
    const double m = bridge_min_sample(0.0, 0.0, 1e-12, 0.5);
    EXPECT_LE(m, 0.0);
    EXPECT_NEAR(m, -0.5 * std::sqrt(2e-12 * std::log(2.0)), 1e-18);
    EXPECT_GT(m, -1e-6);
}

TEST(BridgeMin, NeverAboveEndpoints) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> X(-3, 3), D(1e-8, 4), U(0, 1);
    for (int i = 0; i < 10000; ++i) {
        const double x = X(rng), y = X(rng), u = 1.0 - U(rng);
        EXPECT_LE(bridge_min_sample(x, y, D(rng), u), std::min(x, y));
    }
}

TEST(BridgeMin, EmpiricalLaw) {
    const std::size_t n = 100000;
    const counter_stream s({12, 0}, 0);
    std::size_t below = 0;
    for (std::size_t j = 0; j < n; ++j) below += bridge_min_sample(0.0, 0.0, 1.0, s.uniform(j)) < -0.5;
    const double p = oracle::bridge_min_cdf(0.0, 0.0, 1.0, -0.5);
    EXPECT_NEAR(double(below) / n, p, 3.0 * std::sqrt(p * (1 - p) / n));
}

TEST(BridgeMin, RejectsBadArguments) {
    EXPECT_THROW(bridge_min_sample(0, 0, 0.0, 0.5), error);
    EXPECT_THROW(bridge_min_sample(0, 0, -1.0, 0.5), error);
    EXPECT_THROW(bridge_min_sample(0, 0, 1.0, 0.0), error);
}

TEST(BridgeSup, AtLeastGridSup) {
    for (std::uint64_t s = 0; s < 50; ++s) {
        const auto y = drifted(sample_bm(64, 1.0, {s, 2}), 1.0);
        std::vector<double> u(64);
        counter_stream({s, 2}, 1).fill_uniforms(u);
        EXPECT_GE(bridge_sup(y.values, y.dt(), u), grid_sup(y.values));
    }
}
