#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "bidiruin/error.hpp"
#include "bidiruin/model.hpp"
#include "bidiruin/parallel.hpp"
#include "bidiruin/paths.hpp"
#include "bidiruin/rng.hpp"

// Numerical estimation of the a > 0 asymptotic constant
//
//   C(a, L) = int_{R^2} P(exists (t, s) in [0, L]^3 :
//                 B*(t) - a t + gamma (B(s) - a s) > x) e^{x1 + a x2} dx,
//
// with a = (1, a). For each coordinate the s-supremum decouples from t, so
// the event is "exists t : A1(t) > x1 and A2(t) > x2" with
// A_i(t) = B*_i(t) - a_i t + gamma_i S_i. Exchanging expectation and the
// x-integral turns each path into a weighted area of a staircase region,
// which has a closed form.

namespace bidiruin {

enum class sup_mode { truncated_sup, exact_exponential_sup };

constexpr const char* to_string(sup_mode m) noexcept {
    return m == sup_mode::truncated_sup ? "truncated_sup" : "exact_exponential_sup";
}

struct frontier_sample {
    double lambda = 0.0;
    std::size_t n_grid = 0;
    std::vector<double> a1;
    std::vector<double> a2;
    double s1 = 0.0;
    double s2 = 0.0;
};

struct constant_config {
    double a = 1.0;
    double gamma1 = 0.0;
    double gamma2 = 0.0;
    double lambda = 8.0;
    std::size_t n_grid = 0;  // 0: 2048 points per unit of lambda
    std::size_t n_paths = 20000;
    sup_mode mode = sup_mode::exact_exponential_sup;
    std::uint64_t seed = 1;
    unsigned workers = 1;
};

struct constant_estimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t n_paths = 0;
    double lambda = 0.0;
    sup_mode mode = sup_mode::exact_exponential_sup;
};

inline std::size_t default_constant_grid(double lambda) {
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(2048.0 * lambda)));
}

// sup_{t >= 0} (B(t) - beta t) ~ Exp(rate 2 beta).
inline double sample_sup_drifted_exact(double beta, seed_spec seed, std::uint32_t channel = 0) {
    detail::require(beta > 0.0, error_code::divergent, "supremum diverges for beta <= 0");
    return -std::log(counter_stream(seed, channel).uniform(0)) / (2.0 * beta);
}

// ---------------------------------------------------------------------------
// Staircase integral

// Non-dominated points sorted by first coordinate descending (second then
// strictly increasing). `scratch` is reused storage.
inline void pareto_frontier(std::span<const double> xs, std::span<const double> ys,
                            std::vector<std::pair<double, double>>& out) {
    out.clear();
    const std::size_t n = xs.size();
    if (n == 0) return;

    // Anything not beating both the argmax-x point in y and the argmax-y
    // point in x is (weakly) dominated.
    std::size_t ix = 0;
    std::size_t iy = 0;
    for (std::size_t k = 1; k < n; ++k) {
        if (xs[k] > xs[ix] || (xs[k] == xs[ix] && ys[k] > ys[ix])) ix = k;
        if (ys[k] > ys[iy] || (ys[k] == ys[iy] && xs[k] > xs[iy])) iy = k;
    }
    out.emplace_back(xs[ix], ys[ix]);
    if (iy != ix) out.emplace_back(xs[iy], ys[iy]);
    for (std::size_t k = 0; k < n; ++k) {
        if (ys[k] > ys[ix] && xs[k] > xs[iy]) out.emplace_back(xs[k], ys[k]);
    }

    std::sort(out.begin(), out.end(), [](const auto& p, const auto& q) {
        return p.first > q.first || (p.first == q.first && p.second > q.second);
    });
    std::size_t kept = 0;
    for (std::size_t k = 0; k < out.size(); ++k) {
        if (kept == 0 || out[k].second > out[kept - 1].second) out[kept++] = out[k];
    }
    out.resize(kept);
}

inline double staircase_from_frontier(std::span<const std::pair<double, double>> frontier,
                                      double a) noexcept {
    double total = std::exp(frontier[0].first + a * frontier[0].second);
    for (std::size_t i = 1; i < frontier.size(); ++i) {
        const auto [x, y] = frontier[i];
        const double prev = frontier[i - 1].second;
        total += std::exp(x + a * prev) * std::expm1(a * (y - prev));
    }
    return total / a;
}

// int over the union of quadrants (-inf, xs[k]) x (-inf, ys[k]) of e^{x1 + a x2}.
inline double staircase_exp_integral(std::span<const double> xs, std::span<const double> ys,
                                     double a, std::vector<std::pair<double, double>>& scratch) {
    detail::require(!xs.empty(), error_code::invalid_input, "staircase needs at least one point");
    detail::require(xs.size() == ys.size(), error_code::invalid_input,
                    "staircase coordinates must have equal length");
    detail::require(a > 0.0, error_code::wrong_branch, "staircase weight needs a > 0");
    pareto_frontier(xs, ys, scratch);
    return staircase_from_frontier(scratch, a);
}

inline double staircase_exp_integral(std::span<const double> xs, std::span<const double> ys,
                                     double a) {
    std::vector<std::pair<double, double>> scratch;
    return staircase_exp_integral(xs, ys, a, scratch);
}

// ---------------------------------------------------------------------------
// Frontier sampling

inline void validate(const constant_config& cfg) {
    detail::require(cfg.a > 0.0, error_code::wrong_branch,
                    "numerical constant is for a > 0; use the closed form otherwise");
    detail::require(cfg.a <= 1.0, error_code::invalid_barrier, "barrier ratio must be <= 1");
    validate_tax(cfg.gamma1);
    validate_tax(cfg.gamma2);
    detail::require(cfg.lambda > 0.0 && std::isfinite(cfg.lambda), error_code::invalid_grid,
                    "lambda must be positive");
}

// Per-path stream layout.
namespace frontier_channel {
inline constexpr std::uint32_t kTimePath = 0;   // + coordinate: B*_i
inline constexpr std::uint32_t kSupPath = 2;    // + coordinate: B_i on the s-axis
inline constexpr std::uint32_t kSupBridge = 4;  // + coordinate: bridge maxima
inline constexpr std::uint32_t kSupTail = 6;    // + coordinate: supremum beyond lambda
}  // namespace frontier_channel

// Draws frontier arrays with reusable buffers. Path p uses stream index p.
class frontier_sampler {
   public:
    explicit frontier_sampler(const constant_config& cfg) : cfg_(cfg) {
        validate(cfg_);
        if (cfg_.n_grid == 0) cfg_.n_grid = default_constant_grid(cfg_.lambda);
        const std::size_t n = cfg_.n_grid + 1;
        a1_.resize(n);
        a2_.resize(n);
        sup_path_.resize(n);
        uniforms_.resize(cfg_.n_grid);
    }

    const constant_config& config() const noexcept { return cfg_; }

    void sample(std::size_t path) {
        const seed_spec seed{cfg_.seed, path};
        const double lambda = cfg_.lambda;
        const std::array<double, 2> slope{1.0, cfg_.a};
        const std::array<double, 2> tax{cfg_.gamma1, cfg_.gamma2};
        std::array<std::span<double>, 2> arrays{std::span<double>(a1_), std::span<double>(a2_)};
        for (std::uint32_t i = 0; i < 2; ++i) {
            fill_brownian(arrays[i], lambda, counter_stream(seed, frontier_channel::kTimePath + i));
            apply_drift(arrays[i], lambda, slope[i]);
            sups_[i] = tax[i] > 0.0 ? sample_sup(seed, i, slope[i]) : 0.0;
            const double lift = tax[i] * sups_[i];
            if (lift != 0.0) {
                for (double& v : arrays[i]) v += lift;
            }
        }
    }

    std::span<const double> a1() const noexcept { return a1_; }
    std::span<const double> a2() const noexcept { return a2_; }
    double s1() const noexcept { return sups_[0]; }
    double s2() const noexcept { return sups_[1]; }

    double integral() { return staircase_exp_integral(a1_, a2_, cfg_.a, frontier_); }

   private:
    // sup over [0, lambda] (bridge-exact between grid points), optionally
    // extended to [0, inf) through the Markov property:
    //   sup_{[0,inf)} = max(sup_{[0,L]}, Y(L) + sup_{s >= 0}(Y(L + s) - Y(L))).
    double sample_sup(seed_spec seed, std::uint32_t i, double beta) {
        fill_brownian(sup_path_, cfg_.lambda, counter_stream(seed, frontier_channel::kSupPath + i));
        apply_drift(sup_path_, cfg_.lambda, beta);
        counter_stream(seed, frontier_channel::kSupBridge + i).fill_uniforms(uniforms_);
        const double dt = cfg_.lambda / static_cast<double>(cfg_.n_grid);
        double sup = bridge_sup(sup_path_, dt, uniforms_);
        if (cfg_.mode == sup_mode::exact_exponential_sup) {
            const double tail = sample_sup_drifted_exact(beta, seed, frontier_channel::kSupTail + i);
            sup = std::max(sup, sup_path_.back() + tail);
        }
        return sup;
    }

    constant_config cfg_;
    std::vector<double> a1_;
    std::vector<double> a2_;
    std::vector<double> sup_path_;
    std::vector<double> uniforms_;
    std::array<double, 2> sups_{};
    std::vector<std::pair<double, double>> frontier_;
};

inline frontier_sample sample_frontier(double a, double gamma1, double gamma2, double lambda,
                                       std::size_t n_grid, sup_mode mode, seed_spec seed) {
    detail::require(n_grid >= 1, error_code::invalid_grid, "n_grid must be at least 1");
    constant_config cfg;
    cfg.a = a;
    cfg.gamma1 = gamma1;
    cfg.gamma2 = gamma2;
    cfg.lambda = lambda;
    cfg.n_grid = n_grid;
    cfg.mode = mode;
    cfg.seed = seed.master_seed;
    frontier_sampler sampler(cfg);
    sampler.sample(seed.stream_index);
    return {lambda,
            n_grid,
            std::vector<double>(sampler.a1().begin(), sampler.a1().end()),
            std::vector<double>(sampler.a2().begin(), sampler.a2().end()),
            sampler.s1(),
            sampler.s2()};
}

// Staircase integral of a single path; paths with the same index and seed
// are coupled across lambda and mode.
inline double constant_path_integral(const constant_config& cfg, std::size_t path) {
    frontier_sampler sampler(cfg);
    sampler.sample(path);
    return sampler.integral();
}

inline constant_estimate estimate_constant(const constant_config& cfg) {
    validate(cfg);
    detail::require(cfg.n_paths >= 2, error_code::invalid_input,
                    "constant estimate needs at least two paths");
    struct body {
        frontier_sampler sampler;
        void operator()(std::size_t p, sample_stats& acc) {
            sampler.sample(p);
            acc.add(sampler.integral());
        }
    };
    const sample_stats stats = ordered_path_reduce(cfg.n_paths, cfg.workers, body{frontier_sampler(cfg)});
    return {stats.average(), stats.standard_error(), stats.n, cfg.lambda, cfg.mode};
}

}  // namespace bidiruin
