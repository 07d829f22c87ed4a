#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "bidiruin/closedform.hpp"
#include "bidiruin/mc.hpp"

using namespace bidiruin;

namespace {

canonical_problem prob(double u, double a, double c1, double c2, double g1, double g2) {
    return canonical_problem{u, a, c1, c2, g1, g2, false};
}

simulation_config sim(std::size_t n_paths, std::size_t n_grid, bool refine = true, std::uint64_t seed = 1) {
    return simulation_config{n_paths, n_grid, refine, seed, 1};
}

grid_path path_of(std::vector<double> v) {
    const std::size_t n = v.size() - 1;
    return grid_path{n, 1.0, std::move(v)};
}

}  // namespace

TEST(RuinIndicator, SimultaneityRequired) {
    const ruin_instance inst{{1, 1}, {0, 0}, {0, 0}, 1.0};
    EXPECT_FALSE(ruin_indicator(inst, path_of({0, 2, 0}), path_of({0, 0, 3})));
    EXPECT_TRUE(ruin_indicator(inst, path_of({0, 2, 0}), path_of({0, 3, 0})));
}

TEST(RuinIndicator, NegativeBarriersRuinAtTimeZero) {
    const auto p = prob(1, 0.5, 0, 0, 0, 0);
    ruin_instance inst = to_instance(p);
    inst.barrier = {-1.0, -0.5};
    for (std::uint64_t s = 0; s < 10; ++s) {
        EXPECT_TRUE(ruin_indicator(inst, sample_bm(16, 1.0, {s, 0}), sample_bm(16, 1.0, {s, 1})));
    }
}

TEST(RuinIndicator, HugeBarrierNeverRuins) {
    const auto p = prob(1e9, 1, 0, 0, 1, 1);
    for (std::uint64_t s = 0; s < 10; ++s) {
        EXPECT_FALSE(ruin_indicator(p, sample_bm(64, 1.0, {s, 0}), sample_bm(64, 1.0, {s, 1}), seed_spec{s, 2}));
    }
}

TEST(RuinIndicator, GridMismatch) {
    const auto p = prob(1, 1, 0, 0, 0, 0);
    EXPECT_THROW(ruin_indicator(p, sample_bm(16, 1.0, {}), sample_bm(8, 1.0, {})), error);
}

TEST(RuinIndicator, AgreesWithSimulator) {
    // The estimator's per-path event must equal the indicator built from the
    // same noise through the value-level path operations.
    const auto p = prob(0.6, 0.8, 0.2, -0.1, 0.5, 1.0);
    const auto inst = to_instance(p);
    const simulation_config cfg = sim(100, 128, true, 21);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < 100; ++i) {
        const seed_spec s{21, i};
        hits += ruin_indicator(inst, sample_bm(128, 1.0, s, increment_channel(0)),
                               sample_bm(128, 1.0, s, increment_channel(1)), s);
    }
    EXPECT_EQ(crude_mc(p, cfg).p_hat, double(hits) / 100.0);
}

TEST(CrudeMc, CertainRuin) {
    ruin_instance inst{{-1, -0.5}, {0, 0}, {0, 0}, 1.0};
    const auto est = crude_mc(inst, sim(500, 32));
    EXPECT_EQ(est.p_hat, 1.0);
    EXPECT_LE(est.ci95_high, 1.0);
    EXPECT_LE(est.ci95_low, 1.0);
}

TEST(CrudeMc, OneDimensionalSurrogate) {
    const auto est = crude_mc(prob(1, -1e6, 1, 0, 0, 1), sim(20000, 1024));
    const double exact = ruin_1d_finite(1, 1, 1);
    EXPECT_NEAR(est.p_hat, exact, 3 * est.std_error + 0.005);
    EXPECT_LE(est.p_hat, exact + 3 * est.std_error);
}

TEST(CrudeMc, WilsonIntervalInsideUnitInterval) {
    for (double u : {0.1, 1.0, 3.0}) {
        const auto est = crude_mc(prob(u, 1, 0, 0, 1, 1), sim(300, 64));
        EXPECT_GE(est.p_hat, 0.0);
        EXPECT_LE(est.p_hat, 1.0);
        EXPECT_GE(est.ci95_low, 0.0);
        EXPECT_LE(est.ci95_high, 1.0);
        EXPECT_LE(est.ci95_low, est.p_hat);
        EXPECT_GE(est.ci95_high, est.p_hat);
        EXPECT_GE(est.std_error, 0.0);
    }
}

TEST(CrudeMc, MonotoneInBarrierPerPath) {
    double prev = 1.0;
    for (double u : {0.25, 0.5, 1.0, 1.5}) {
        const double p = crude_mc(prob(u, 0.7, 0.5, 0.5, 1, 0.5), sim(2000, 256)).p_hat;
        EXPECT_LE(p, prev);
        prev = p;
    }
}

TEST(CrudeMc, RejectsTooFewPaths) {
    EXPECT_THROW(crude_mc(prob(1, 1, 0, 0, 0, 0), sim(99, 8)), error);
    EXPECT_THROW(crude_mc(prob(1, 1, 0, 0, 0, 0), sim(100, 0)), error);
}

TEST(TiltedMc, ZeroDriftReproducesCrude) {
    const auto p = prob(1, 1, 1, 1, 1, 1);
    const auto cfg = sim(3000, 128);
    const auto tilted = tilted_mc(p, cfg, std::array<double, 2>{0, 0});
    const auto crude = crude_mc(p, cfg);
    EXPECT_EQ(tilted.p_hat, crude.p_hat);
    EXPECT_EQ(tilted.estimator, estimator_kind::tilted);
    // With unit weights the diagnostic counts the paths that hit.
    EXPECT_NEAR(tilted.effective_sample_size, crude.p_hat * 3000.0, 1e-9);
}

TEST(TiltedMc, DefaultDrift) {
    EXPECT_EQ(default_drift(to_instance(prob(3, 0.5, 1, 2, 0, 0))), (std::array<double, 2>{4, 3.5}));
    EXPECT_EQ(default_drift(to_instance(prob(3, -0.5, 1, 2, 0, 0))), (std::array<double, 2>{4, 0}));
    EXPECT_EQ(default_drift(to_instance(prob(3, 0, 1, 2, 0, 0))), (std::array<double, 2>{4, 0}));
}

TEST(TiltedMc, LikelihoodHasUnitMean) {
    for (double u : {1.0, 2.0}) {
        const auto inst = to_instance(prob(u, 0.5, 0.5, 0.5, 1, 1));
        const auto est = likelihood_mean(inst, sim(20000, 4));
        EXPECT_NEAR(est.p_hat, 1.0, 3 * est.std_error) << u;
    }
}

TEST(TiltedMc, AgreesWithCrudeAtModerateBarrier) {
    const auto p = prob(1, 1, 1, 1, 1, 1);
    const auto crude = crude_mc(p, sim(20000, 256));
    const auto tilted = tilted_mc(p, sim(20000, 256, true, 2));
    EXPECT_NEAR(tilted.p_hat, crude.p_hat, 3 * std::hypot(tilted.std_error, crude.std_error));
}

TEST(TiltedMc, BeatsCrudeStandardErrorInTheTail) {
    const auto p = prob(3, 1, 1, 1, 1, 1);
    const auto tilted = tilted_mc(p, sim(4000, 256));
    EXPECT_GT(tilted.p_hat, 0.0);
    const double crude_se = std::sqrt(tilted.p_hat * (1 - tilted.p_hat) / 4000.0);
    EXPECT_LT(tilted.std_error, crude_se);
}

TEST(TiltedMc, OneDimensionalInstance) {
    // A single reflected coordinate against its closed-form tax-free law.
    const auto inst = reflected_1d_instance(1.0, 1.0, 0.0);
    const auto est = tilted_mc(inst, sim(20000, 1024));
    EXPECT_NEAR(est.p_hat, ruin_1d_finite(1, 1, 1), 3 * est.std_error + 0.005);
}

TEST(Determinism, IdenticalForAnyWorkerCount) {
    const auto p = prob(1.5, 0.6, 0.5, 1, 1, 0.5);
    for (auto kind : {estimator_kind::crude, estimator_kind::tilted}) {
        simulation_config cfg = sim(1500, 64);
        auto run = [&] { return kind == estimator_kind::crude ? crude_mc(p, cfg) : tilted_mc(p, cfg); };
        const auto one = run();
        cfg.workers = 4;
        const auto four = run();
        EXPECT_EQ(one.p_hat, four.p_hat);
        EXPECT_EQ(one.std_error, four.std_error);
        EXPECT_EQ(one.ci95_low, four.ci95_low);
        EXPECT_EQ(one.ci95_high, four.ci95_high);
        EXPECT_EQ(run().p_hat, four.p_hat);
    }
}

TEST(SelfSimilarity, SameSeedGivesSameIndicators) {
    // Scaling by 4 is exact in binary floating point, so the long-horizon
    // problem and its normalized form see identical events path by path.
    const model_params m{1, 0.5, 1, 1, 4, 2, 1};
    const auto direct = crude_mc(to_instance(m), sim(2000, 128));
    const auto normalized = crude_mc(canonical_form(m), sim(2000, 128));
    EXPECT_EQ(direct.p_hat, normalized.p_hat);
}

TEST(SelfSimilarity, IndependentSeedsAgree) {
    const model_params m{1, 0.5, 1, 1, 4, 2, 1};
    const auto direct = crude_mc(to_instance(m), sim(20000, 256, true, 5));
    const auto normalized = crude_mc(canonical_form(m), sim(20000, 256, true, 6));
    EXPECT_NEAR(direct.p_hat, normalized.p_hat, 3 * std::hypot(direct.std_error, normalized.std_error));
}

TEST(CompareAsymptotic, NonpositiveBranchRows) {
    comparison_config cfg;
    cfg.sim = sim(2000, 128);
    const std::vector<double> us{2, 3};
    const auto rows = compare_asymptotic(prob(1, -0.5, 1, 1, 1, 1), us, cfg);
    ASSERT_EQ(rows.size(), 2u);
    for (const auto& row : rows) {
        const auto p = prob(row.u, -0.5, 1, 1, 1, 1);
        EXPECT_EQ(row.branch, asymptotic_branch::a_negative);
        EXPECT_DOUBLE_EQ(row.asym, asymptotic_psi(p).value);
        EXPECT_DOUBLE_EQ(row.constant, constant_nonpositive_a(-0.5, 1, 1));
        EXPECT_DOUBLE_EQ(row.ratio, row.mc.p_hat / row.asym);
        EXPECT_DOUBLE_EQ(row.form_ratio, row.asym / row.tail_form);
    }
}

TEST(CompareAsymptotic, PositiveBranchUsesEstimatedConstant) {
    comparison_config cfg;
    cfg.sim = sim(500, 64);
    cfg.constant.lambda = 0.5;
    cfg.constant.n_paths = 200;
    const std::vector<double> us{2};
    const auto rows = compare_asymptotic(prob(1, 1, 0, 0, 0, 0), us, cfg);
    constant_config cc = cfg.constant;
    cc.a = 1;
    const auto est = estimate_constant(cc);
    EXPECT_EQ(rows[0].constant, est.mean);
    EXPECT_EQ(rows[0].constant_std_error, est.std_error);
    const double tail = est.mean * bivariate_tail(2, 1, 0, 0);
    EXPECT_NEAR(rows[0].tail_form, tail, 1e-13 * tail);

    cfg.constant_override = 3.5;
    EXPECT_EQ(compare_asymptotic(prob(1, 1, 0, 0, 0, 0), us, cfg)[0].constant, 3.5);
}

TEST(CompareAsymptotic, RejectsBadLists) {
    comparison_config cfg;
    cfg.sim = sim(100, 8);
    const std::vector<double> empty, decreasing{3, 2};
    EXPECT_THROW(compare_asymptotic(prob(1, -1, 0, 0, 0, 0), empty, cfg), error);
    EXPECT_THROW(compare_asymptotic(prob(1, -1, 0, 0, 0, 0), decreasing, cfg), error);
}
