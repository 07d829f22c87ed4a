#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "bidiruin/closedform.hpp"
#include "bidiruin/constant.hpp"
#include "bidiruin/error.hpp"
#include "bidiruin/model.hpp"
#include "bidiruin/parallel.hpp"
#include "bidiruin/paths.hpp"
#include "bidiruin/rng.hpp"

namespace bidiruin {

enum class estimator_kind { crude, tilted };

constexpr const char* to_string(estimator_kind e) noexcept {
    return e == estimator_kind::crude ? "crude" : "tilted";
}

struct estimate {
    double p_hat = 0.0;
    double std_error = 0.0;
    std::size_t n_paths = 0;
    double ci95_low = 0.0;
    double ci95_high = 0.0;
    estimator_kind estimator = estimator_kind::crude;
    double effective_sample_size = 0.0;
};

// Dim independent gamma-reflected coordinates on [0, horizon]; ruin means
// every coordinate is above its barrier at one common grid time.
template <std::size_t Dim>
struct basic_ruin_instance {
    std::array<double, Dim> barrier{};
    std::array<double, Dim> premium{};
    std::array<double, Dim> tax{};
    double horizon = 1.0;
};

using ruin_instance = basic_ruin_instance<2>;
using marginal_instance = basic_ruin_instance<1>;

template <std::size_t Dim>
void validate(const basic_ruin_instance<Dim>& inst) {
    detail::require(inst.horizon > 0.0 && std::isfinite(inst.horizon), error_code::invalid_horizon,
                    "horizon must be positive");
    for (std::size_t i = 0; i < Dim; ++i) {
        validate_tax(inst.tax[i]);
        detail::require(!std::isnan(inst.barrier[i]), error_code::invalid_barrier,
                        "barrier must not be NaN");
    }
}

inline ruin_instance to_instance(const canonical_problem& p) {
    validate(p);
    return {{p.u, p.a * p.u}, {p.c1, p.c2}, {p.gamma1, p.gamma2}, 1.0};
}

// Simulates on the model's own horizon, with no rescaling or relabelling.
inline ruin_instance to_instance(const model_params& p) {
    validate(p);
    return {{p.u1, p.u2}, {p.c1, p.c2}, {p.gamma1, p.gamma2}, p.horizon};
}

inline marginal_instance reflected_1d_instance(double u, double c, double gamma, double horizon = 1.0) {
    marginal_instance inst{{u}, {c}, {gamma}, horizon};
    validate(inst);
    return inst;
}

struct simulation_config {
    std::size_t n_paths = 100000;
    std::size_t n_grid = 4096;
    bool refine = false;
    std::uint64_t seed = 1;
    unsigned workers = 1;
};

inline void validate(const simulation_config& cfg) {
    detail::require(cfg.n_paths >= 100, error_code::invalid_input, "n_paths must be at least 100");
    detail::require(cfg.n_grid >= 1, error_code::invalid_grid, "n_grid must be at least 1");
}

// Dominant-point tilt: shift coordinate i so that it reaches its barrier at the
// horizon on average; coordinates whose barrier does not grow are left alone.
// On a canonical problem this is (u + c1, a u + c2) for a > 0 and (u + c1, 0) otherwise.
template <std::size_t Dim>
std::array<double, Dim> default_drift(const basic_ruin_instance<Dim>& inst) {
    std::array<double, Dim> mu{};
    for (std::size_t i = 0; i < Dim; ++i) {
        mu[i] = inst.barrier[i] > 0.0 ? inst.barrier[i] / inst.horizon + inst.premium[i] : 0.0;
    }
    return mu;
}

// Per-path stream layout: coordinate i draws increments from channel 2i and
// bridge uniforms from channel 2i + 1.
inline constexpr std::uint32_t increment_channel(std::size_t i) noexcept {
    return static_cast<std::uint32_t>(2 * i);
}
inline constexpr std::uint32_t bridge_channel(std::size_t i) noexcept {
    return static_cast<std::uint32_t>(2 * i + 1);
}

namespace detail {

// Simulates one path of every coordinate under an added drift mu and returns
// the ruin indicator together with log dP/dQ.
template <std::size_t Dim>
class path_simulator {
   public:
    path_simulator(const basic_ruin_instance<Dim>& inst, const simulation_config& cfg,
                   const std::array<double, Dim>& mu)
        : inst_(inst), cfg_(cfg), mu_(mu) {
        for (std::size_t i = 0; i < Dim; ++i) {
            level_[i].resize(cfg.n_grid + 1);
            low_[i].resize(cfg.n_grid + 1);
        }
        if (cfg.refine) uniforms_.resize(cfg.n_grid);
    }

    struct outcome {
        bool ruined = false;
        double log_weight = 0.0;
    };

    outcome run(std::size_t path) {
        const seed_spec seed{cfg_.seed, path};
        const double horizon = inst_.horizon;
        const double dt = horizon / static_cast<double>(cfg_.n_grid);
        outcome out;
        for (std::size_t i = 0; i < Dim; ++i) {
            std::span<double> x(level_[i]);
            fill_brownian(x, horizon, counter_stream(seed, increment_channel(i)));
            const double endpoint = x.back();
            if (mu_[i] != 0.0) {
                out.log_weight -= mu_[i] * endpoint + 0.5 * mu_[i] * mu_[i] * horizon;
            }
            apply_drift(x, horizon, inst_.premium[i] - mu_[i]);
            if (inst_.tax[i] != 0.0) {
                if (cfg_.refine) {
                    counter_stream(seed, bridge_channel(i)).fill_uniforms(uniforms_);
                    fill_running_min_bridge(x, low_[i], dt, uniforms_);
                } else {
                    fill_running_min(x, low_[i]);
                }
                apply_reflection(x, low_[i], inst_.tax[i], x);
            }
        }
        out.ruined = simultaneous_exceedance();
        return out;
    }

   private:
    bool simultaneous_exceedance() const noexcept {
        const std::size_t n = cfg_.n_grid + 1;
        for (std::size_t k = 0; k < n; ++k) {
            bool all = true;
            for (std::size_t i = 0; i < Dim && all; ++i) all = level_[i][k] > inst_.barrier[i];
            if (all) return true;
        }
        return false;
    }

    basic_ruin_instance<Dim> inst_;
    simulation_config cfg_;
    std::array<double, Dim> mu_;
    std::array<std::vector<double>, Dim> level_;
    std::array<std::vector<double>, Dim> low_;
    std::vector<double> uniforms_;
};

enum class payoff { ruin, one };

template <std::size_t Dim>
sample_stats simulate_weighted(const basic_ruin_instance<Dim>& inst, const simulation_config& cfg,
                               const std::array<double, Dim>& mu, payoff kind) {
    validate(inst);
    validate(cfg);
    struct body {
        path_simulator<Dim> sim;
        payoff kind;
        void operator()(std::size_t p, sample_stats& acc) {
            const auto result = sim.run(p);
            const double hit = (kind == payoff::one || result.ruined) ? 1.0 : 0.0;
            acc.add(result.log_weight == 0.0 ? hit : hit * std::exp(result.log_weight));
        }
    };
    return ordered_path_reduce(cfg.n_paths, cfg.workers, body{path_simulator<Dim>(inst, cfg, mu), kind});
}

inline constexpr double kZ95 = 1.959963984540054;

}  // namespace detail

// Wilson score interval for a binomial proportion; always contains p_hat.
inline std::pair<double, double> wilson_interval(double p_hat, std::size_t n, double z = detail::kZ95) {
    const double nn = static_cast<double>(n);
    const double z2 = z * z;
    const double denom = 1.0 + z2 / nn;
    const double center = (p_hat + z2 / (2.0 * nn)) / denom;
    const double half = z / denom * std::sqrt(p_hat * (1.0 - p_hat) / nn + z2 / (4.0 * nn * nn));
    return {std::clamp(std::min(center - half, p_hat), 0.0, 1.0),
            std::clamp(std::max(center + half, p_hat), 0.0, 1.0)};
}

inline estimate binomial_estimate(const sample_stats& stats) {
    estimate e;
    e.estimator = estimator_kind::crude;
    e.n_paths = stats.n;
    e.p_hat = stats.average();
    e.std_error = std::sqrt(e.p_hat * (1.0 - e.p_hat) / static_cast<double>(stats.n));
    std::tie(e.ci95_low, e.ci95_high) = wilson_interval(e.p_hat, stats.n);
    e.effective_sample_size = static_cast<double>(stats.n);
    return e;
}

inline estimate weighted_estimate(const sample_stats& stats) {
    estimate e;
    e.estimator = estimator_kind::tilted;
    e.n_paths = stats.n;
    e.p_hat = stats.average();
    e.std_error = stats.standard_error();
    e.ci95_low = std::max(0.0, e.p_hat - detail::kZ95 * e.std_error);
    e.ci95_high = e.p_hat + detail::kZ95 * e.std_error;
    e.effective_sample_size = stats.effective_sample_size();
    return e;
}

// ---------------------------------------------------------------------------

// Ruin on the given Brownian paths (driftless, common grid). Bridge
// refinement of the infimum uses channel 2i + 1 of `bridge_seed`.
inline bool ruin_indicator(const ruin_instance& inst, const grid_path& b1, const grid_path& b2,
                           std::optional<seed_spec> bridge_seed = std::nullopt) {
    validate(inst);
    validate(b1);
    validate(b2);
    detail::require(b1.n_steps == b2.n_steps && b1.horizon == b2.horizon, error_code::invalid_input,
                    "paths must share one grid");
    const std::array<const grid_path*, 2> paths{&b1, &b2};
    std::array<grid_path, 2> level;
    for (std::size_t i = 0; i < 2; ++i) {
        const grid_path y = drifted(*paths[i], inst.premium[i]);
        const grid_path low = bridge_seed
                                  ? running_inf_bridge(y, counter_stream(*bridge_seed, bridge_channel(i)))
                                  : running_inf(y);
        level[i] = reflect(y, inst.tax[i], low);
    }
    for (std::size_t k = 0; k <= b1.n_steps; ++k) {
        if (level[0].values[k] > inst.barrier[0] && level[1].values[k] > inst.barrier[1]) return true;
    }
    return false;
}

inline bool ruin_indicator(const canonical_problem& prob, const grid_path& b1, const grid_path& b2,
                           std::optional<seed_spec> bridge_seed = std::nullopt) {
    return ruin_indicator(to_instance(prob), b1, b2, bridge_seed);
}

template <std::size_t Dim>
estimate crude_mc(const basic_ruin_instance<Dim>& inst, const simulation_config& cfg) {
    return binomial_estimate(detail::simulate_weighted(inst, cfg, std::array<double, Dim>{},
                                                       detail::payoff::ruin));
}

inline estimate crude_mc(const canonical_problem& prob, const simulation_config& cfg) {
    return crude_mc(to_instance(prob), cfg);
}

// Importance sampling: B_i gets an extra drift mu_i and each path is weighted
// by exp(-sum mu_i W_i(T) - sum mu_i^2 T / 2), W_i the driftless noise.
template <std::size_t Dim>
estimate tilted_mc(const basic_ruin_instance<Dim>& inst, const simulation_config& cfg,
                   std::optional<std::array<double, Dim>> drift = std::nullopt) {
    const auto mu = drift.value_or(default_drift(inst));
    return weighted_estimate(detail::simulate_weighted(inst, cfg, mu, detail::payoff::ruin));
}

inline estimate tilted_mc(const canonical_problem& prob, const simulation_config& cfg,
                          std::optional<std::array<double, 2>> drift = std::nullopt) {
    return tilted_mc(to_instance(prob), cfg, drift);
}

// Weighted mean of the constant payoff 1; equals 1 in expectation.
template <std::size_t Dim>
estimate likelihood_mean(const basic_ruin_instance<Dim>& inst, const simulation_config& cfg,
                         std::optional<std::array<double, Dim>> drift = std::nullopt) {
    const auto mu = drift.value_or(default_drift(inst));
    return weighted_estimate(detail::simulate_weighted(inst, cfg, mu, detail::payoff::one));
}

// ---------------------------------------------------------------------------
// Comparison against the large-u equivalent

struct comparison_config {
    estimator_kind estimator = estimator_kind::tilted;
    simulation_config sim;
    constant_config constant;  // a and tax rates are taken from the problem
    std::optional<double> constant_override;
};

struct comparison_row {
    double u = 0.0;
    estimate mc;
    double asym = 0.0;
    double ratio = 0.0;
    double constant = 0.0;
    double constant_std_error = 0.0;
    asymptotic_branch branch = asymptotic_branch::a_positive;
    double tail_form = 0.0;  // a C(a) P(B(1) > au + c), or 4/(2-gamma1) P(...) for a <= 0
    double form_ratio = 0.0;  // asym / tail_form
};

struct resolved_constant {
    double value = 0.0;
    double std_error = 0.0;
};

inline resolved_constant resolve_constant(const canonical_problem& prob, const comparison_config& cfg) {
    if (prob.a <= 0.0) return {constant_nonpositive_a(prob.a, prob.gamma1, prob.c2), 0.0};
    if (cfg.constant_override) return {*cfg.constant_override, 0.0};
    constant_config cc = cfg.constant;
    cc.a = prob.a;
    cc.gamma1 = prob.gamma1;
    cc.gamma2 = prob.gamma2;
    const constant_estimate est = estimate_constant(cc);
    return {est.mean, est.std_error};
}

// Every row reuses the seed, so the rows are paired across u.
inline std::vector<comparison_row> compare_asymptotic(const canonical_problem& tmpl,
                                                      std::span<const double> u_list,
                                                      const comparison_config& cfg) {
    detail::require(!u_list.empty(), error_code::invalid_input, "u list must not be empty");
    for (std::size_t i = 1; i < u_list.size(); ++i) {
        detail::require(u_list[i] > u_list[i - 1], error_code::invalid_input,
                        "u list must be strictly increasing");
    }
    canonical_problem first = tmpl;
    first.u = u_list.front();
    validate(first);
    const resolved_constant constant = resolve_constant(first, cfg);

    std::vector<comparison_row> rows;
    rows.reserve(u_list.size());
    for (const double u : u_list) {
        canonical_problem prob = tmpl;
        prob.u = u;
        comparison_row row;
        row.u = u;
        row.mc = cfg.estimator == estimator_kind::crude ? crude_mc(prob, cfg.sim) : tilted_mc(prob, cfg.sim);
        const asymptotic_approx approx = asymptotic_psi(prob, constant.value);
        row.asym = approx.value;
        row.branch = approx.branch;
        row.constant = constant.value;
        row.constant_std_error = constant.std_error;
        row.ratio = row.asym > 0.0 ? row.mc.p_hat / row.asym : 0.0;
        row.tail_form = asymptotic_tail_form(prob, constant.value);
        row.form_ratio = row.tail_form > 0.0 ? row.asym / row.tail_form : 0.0;
        rows.push_back(row);
    }
    return rows;
}

}  // namespace bidiruin
