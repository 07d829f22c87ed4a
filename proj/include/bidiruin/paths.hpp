#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "bidiruin/error.hpp"
#include "bidiruin/model.hpp"
#include "bidiruin/rng.hpp"

namespace bidiruin {

// Process values on the uniform grid t_k = k * horizon / n_steps, k = 0..n_steps.
struct grid_path {
    std::size_t n_steps = 0;
    double horizon = 1.0;
    std::vector<double> values;

    double dt() const noexcept { return horizon / static_cast<double>(n_steps); }
    double time(std::size_t k) const noexcept {
        return horizon * static_cast<double>(k) / static_cast<double>(n_steps);
    }
    std::span<const double> view() const noexcept { return values; }
};

inline void validate_grid(std::size_t n_steps, double horizon) {
    detail::require(n_steps >= 1, error_code::invalid_grid, "n_steps must be at least 1");
    detail::require(horizon > 0.0 && std::isfinite(horizon), error_code::invalid_grid,
                    "grid horizon must be positive");
}

inline void validate(const grid_path& path) {
    validate_grid(path.n_steps, path.horizon);
    detail::require(path.values.size() == path.n_steps + 1, error_code::invalid_input,
                    "grid path must hold n_steps + 1 values");
}

// ---------------------------------------------------------------------------
// In-place kernels. `values` always has n_steps + 1 entries.

// Brownian motion on the grid from a normal stream (values[0] = 0).
inline void fill_brownian(std::span<double> values, double horizon, const counter_stream& noise) {
    const std::size_t n_steps = values.size() - 1;
    const double scale = std::sqrt(horizon / static_cast<double>(n_steps));
    noise.fill_normals(values.subspan(1));
    double level = 0.0;
    values[0] = 0.0;
    for (std::size_t k = 1; k <= n_steps; ++k) {
        level += scale * values[k];
        values[k] = level;
    }
}

inline void apply_drift(std::span<double> values, double horizon, double c) noexcept {
    if (c == 0.0) return;
    const double n = static_cast<double>(values.size() - 1);
    for (std::size_t k = 1; k < values.size(); ++k) {
        values[k] -= c * (horizon * static_cast<double>(k) / n);
    }
}

inline void fill_running_min(std::span<const double> in, std::span<double> out) noexcept {
    double low = in[0];
    for (std::size_t k = 0; k < in.size(); ++k) {
        low = std::min(low, in[k]);
        out[k] = low;
    }
}

// Bridge minimum: (x + y - sqrt((y - x)^2 - 2 dt ln U)) / 2. Unchecked.
inline double bridge_min_unchecked(double x, double y, double dt, double unif) noexcept {
    const double gap = y - x;
    return 0.5 * (x + y - std::sqrt(gap * gap - 2.0 * dt * std::log(unif)));
}

inline double bridge_max_unchecked(double x, double y, double dt, double unif) noexcept {
    const double gap = y - x;
    return 0.5 * (x + y + std::sqrt(gap * gap - 2.0 * dt * std::log(unif)));
}

// Running infimum in continuous time: the minimum over each grid interval is
// drawn from the Brownian-bridge minimum law given its endpoints. The drift of
// the path does not change the bridge law, so this applies to drifted paths.
inline void fill_running_min_bridge(std::span<const double> in, std::span<double> out,
                                    double dt, std::span<const double> uniforms) noexcept {
    double low = in[0];
    out[0] = low;
    for (std::size_t k = 1; k < in.size(); ++k) {
        const double dip = bridge_min_unchecked(in[k - 1], in[k], dt, uniforms[k - 1]);
        low = std::min(low, std::min(dip, in[k]));
        out[k] = low;
    }
}

// out[k] = in[k] - gamma * running_min[k].
inline void apply_reflection(std::span<const double> in, std::span<const double> running_min,
                             double gamma, std::span<double> out) noexcept {
    for (std::size_t k = 0; k < in.size(); ++k) out[k] = in[k] - gamma * running_min[k];
}

// Maximum over [0, horizon] of the continuous path, exact given the grid values.
inline double bridge_sup(std::span<const double> values, double dt,
                         std::span<const double> uniforms) noexcept {
    double high = values[0];
    for (std::size_t k = 1; k < values.size(); ++k) {
        const double peak = bridge_max_unchecked(values[k - 1], values[k], dt, uniforms[k - 1]);
        high = std::max(high, std::max(peak, values[k]));
    }
    return high;
}

inline double grid_sup(std::span<const double> values) noexcept {
    return *std::max_element(values.begin(), values.end());
}

// ---------------------------------------------------------------------------
// Value-level operations.

inline grid_path sample_bm(std::size_t n_steps, double horizon, seed_spec seed,
                           std::uint32_t channel = 0) {
    validate_grid(n_steps, horizon);
    grid_path path{n_steps, horizon, std::vector<double>(n_steps + 1)};
    fill_brownian(path.values, horizon, counter_stream(seed, channel));
    return path;
}

// B(t_k) - c t_k.
inline grid_path drifted(const grid_path& path, double c) {
    validate(path);
    grid_path out = path;
    apply_drift(out.values, out.horizon, c);
    return out;
}

inline grid_path running_inf(const grid_path& path) {
    validate(path);
    grid_path out{path.n_steps, path.horizon, std::vector<double>(path.values.size())};
    fill_running_min(path.values, out.values);
    return out;
}

// Running infimum with per-interval bridge minima; uniforms come from `bridge`.
inline grid_path running_inf_bridge(const grid_path& path, const counter_stream& bridge) {
    validate(path);
    std::vector<double> unif(path.n_steps);
    bridge.fill_uniforms(unif);
    grid_path out{path.n_steps, path.horizon, std::vector<double>(path.values.size())};
    fill_running_min_bridge(path.values, out.values, path.dt(), unif);
    return out;
}

// X = Y - gamma * inf Y, Y the drifted path. The infimum defaults to the grid one.
inline grid_path reflect(const grid_path& drifted_path, double gamma,
                         const std::optional<grid_path>& running_min = std::nullopt) {
    validate(drifted_path);
    validate_tax(gamma);
    grid_path low = running_min ? *running_min : running_inf(drifted_path);
    detail::require(low.values.size() == drifted_path.values.size(), error_code::invalid_input,
                    "running infimum must share the path grid");
    grid_path out{drifted_path.n_steps, drifted_path.horizon,
                  std::vector<double>(drifted_path.values.size())};
    apply_reflection(drifted_path.values, low.values, gamma, out.values);
    return out;
}

// Exact draw of min over an interval of length dt of a Brownian bridge from x to y.
inline double bridge_min_sample(double x, double y, double dt, double unif) {
    detail::require(dt > 0.0, error_code::invalid_grid, "bridge interval must be positive");
    detail::require(unif > 0.0 && unif <= 1.0, error_code::invalid_input,
                    "bridge uniform must lie in (0, 1]");
    return std::min(bridge_min_unchecked(x, y, dt, unif), std::min(x, y));
}

}  // namespace bidiruin
