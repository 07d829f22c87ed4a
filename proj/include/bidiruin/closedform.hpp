#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "bidiruin/error.hpp"
#include "bidiruin/model.hpp"

namespace bidiruin {

inline constexpr double kLogSqrtTwoPi = 0.91893853320467274178;  // log(sqrt(2 pi))
inline constexpr double kSqrtTwoPi = 2.50662827463100050242;

// ---------------------------------------------------------------------------
// Gaussian helpers

inline double normal_cdf(double x) noexcept { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

inline double normal_sf(double x) noexcept { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

inline double log_normal_pdf(double x) noexcept { return -0.5 * x * x - kLogSqrtTwoPi; }

// log P(Z > x). erfc underflows near x = 38; beyond x = 35 the Mills-ratio
// series is accurate to ~1e-13 relative.
inline double log_normal_sf(double x) noexcept {
    if (x < 35.0) return std::log(normal_sf(x));
    const double r = 1.0 / (x * x);
    const double series = 1.0 - r * (1.0 - 3.0 * r * (1.0 - 5.0 * r * (1.0 - 7.0 * r)));
    return log_normal_pdf(x) - std::log(x) + std::log(series);
}

inline double log_normal_cdf(double x) noexcept { return log_normal_sf(-x); }

// Gaussian tail approximant psi(x) = exp(-x^2/2) / (sqrt(2 pi) x), x > 0.
inline double log_mills_tail(double x) noexcept { return log_normal_pdf(x) - std::log(x); }

inline double mills_tail(double x) noexcept { return std::exp(log_mills_tail(x)); }

// Density of (B1(1), B2(1)) with independent standard normal components.
inline double log_bivariate_density(double x, double y) noexcept {
    return log_normal_pdf(x) + log_normal_pdf(y);
}

inline double bivariate_density(double x, double y) noexcept {
    return std::exp(log_bivariate_density(x, y));
}

// ---------------------------------------------------------------------------
// One-dimensional ruin

// P(sup_{[0,T]} (B(t) - c t) > u).
inline double ruin_1d_finite(double u, double c, double horizon) {
    detail::require(horizon > 0.0, error_code::invalid_horizon, "horizon must be positive");
    const double root = std::sqrt(horizon);
    const double direct = normal_cdf(-u / root - c * root);
    const double reflected = std::exp(-2.0 * c * u + log_normal_cdf(-u / root + c * root));
    return std::clamp(direct + reflected, 0.0, 1.0);
}

// P(sup_{t >= 0} (B(t) - c t) > u) = exp(-2 c u).
inline double ruin_1d_infinite(double u, double c) {
    detail::require(c > 0.0, error_code::divergent,
                    "infinite-horizon ruin is certain for non-positive premium");
    detail::require(u >= 0.0, error_code::invalid_barrier, "barrier must be non-negative");
    return std::exp(-2.0 * c * u);
}

inline void require_reflected_regime(double u, double c, double gamma, double horizon) {
    validate_tax(gamma);
    detail::require(horizon > 0.0, error_code::invalid_horizon, "horizon must be positive");
    detail::require(u + c * horizon > 0.0, error_code::out_of_regime,
                    "asymptotic requires u + c T > 0");
}

inline double reflected_prefactor(double gamma) noexcept { return 4.0 / (2.0 - gamma); }

// 4/(2 - gamma) * psi((u + cT)/sqrt(T)): the large-u equivalent of the
// gamma-reflected ruin probability.
inline double ruin_1d_reflected_asym(double u, double c, double gamma, double horizon) {
    require_reflected_regime(u, c, gamma, horizon);
    const double x = (u + c * horizon) / std::sqrt(horizon);
    return reflected_prefactor(gamma) * mills_tail(x);
}

// Same equivalent written with the exact Gaussian tail, 4/(2 - gamma) P(B(T) > u + cT).
inline double ruin_1d_reflected_tail_form(double u, double c, double gamma, double horizon) {
    require_reflected_regime(u, c, gamma, horizon);
    const double x = (u + c * horizon) / std::sqrt(horizon);
    return std::exp(std::log(reflected_prefactor(gamma)) + log_normal_sf(x));
}

// ---------------------------------------------------------------------------
// Bivariate quantities

// log P(B1(1) > u + c1, B2(1) > a u + c2).
inline double log_bivariate_tail(double u, double a, double c1, double c2) noexcept {
    return log_normal_sf(u + c1) + log_normal_sf(a * u + c2);
}

inline double bivariate_tail(double u, double a, double c1, double c2) noexcept {
    return std::exp(log_bivariate_tail(u, a, c1, c2));
}

enum class asymptotic_branch { a_positive, a_zero, a_negative };

constexpr const char* to_string(asymptotic_branch b) noexcept {
    switch (b) {
        case asymptotic_branch::a_positive: return "a_positive";
        case asymptotic_branch::a_zero: return "a_zero";
        case asymptotic_branch::a_negative: return "a_negative";
    }
    return "unknown";
}

// The sign of a selects the branch; a == 0 exactly is its own branch.
constexpr asymptotic_branch branch_of(double a) noexcept {
    if (a > 0.0) return asymptotic_branch::a_positive;
    if (a == 0.0) return asymptotic_branch::a_zero;
    return asymptotic_branch::a_negative;
}

inline double log_constant_nonpositive_a(double a, double gamma1, double c2) {
    detail::require(a <= 0.0, error_code::wrong_branch, "closed-form constant needs a <= 0");
    validate_tax(gamma1);
    // Phi*(x) = 1 for a < 0 and Phi(x) for a = 0.
    const double log_phi_star = (a < 0.0) ? 0.0 : log_normal_cdf(-c2);
    return std::log(reflected_prefactor(gamma1)) + kLogSqrtTwoPi + 0.5 * c2 * c2 + log_phi_star;
}

// C(a) = 4/(2 - gamma1) sqrt(2 pi) exp(c2^2/2) Phi*(-c2) for a <= 0.
inline double constant_nonpositive_a(double a, double gamma1, double c2) {
    return std::exp(log_constant_nonpositive_a(a, gamma1, c2));
}

inline double constant_upper_bound(double a, double gamma1, double gamma2) {
    detail::require(a > 0.0, error_code::wrong_branch, "upper bound is stated for a > 0");
    validate_tax(gamma1);
    validate_tax(gamma2);
    return 16.0 / (a * (2.0 - gamma1) * (2.0 - gamma2));
}

struct asymptotic_approx {
    double value = 0.0;
    double log_value = -std::numeric_limits<double>::infinity();
    asymptotic_branch branch = asymptotic_branch::a_positive;
    double constant_used = 0.0;
};

// Large-u equivalent of the simultaneous ruin probability:
//   a > 0:  C(a) u^-2 phi(u + c1, a u + c2)
//   a <= 0: C(a) u^-1 phi(u + c1, c2)
inline asymptotic_approx asymptotic_psi(const canonical_problem& prob, double constant) {
    validate(prob);
    detail::require(constant > 0.0 && std::isfinite(constant), error_code::wrong_branch,
                    "asymptotic constant must be positive and finite");
    asymptotic_approx out;
    out.branch = branch_of(prob.a);
    out.constant_used = constant;
    if (out.branch == asymptotic_branch::a_positive) {
        out.log_value = std::log(constant) - 2.0 * std::log(prob.u) +
                        log_bivariate_density(prob.u + prob.c1, prob.a * prob.u + prob.c2);
    } else {
        const double expected = constant_nonpositive_a(prob.a, prob.gamma1, prob.c2);
        detail::require(std::abs(constant - expected) <= 1e-12 * expected, error_code::wrong_branch,
                        "constant does not match the closed form for a <= 0");
        out.log_value = std::log(constant) - std::log(prob.u) +
                        log_bivariate_density(prob.u + prob.c1, prob.c2);
    }
    out.value = std::exp(out.log_value);
    return out;
}

// a <= 0 only: the constant is known in closed form.
inline asymptotic_approx asymptotic_psi(const canonical_problem& prob) {
    return asymptotic_psi(prob, constant_nonpositive_a(prob.a, prob.gamma1, prob.c2));
}

// Equivalent tail forms: a C(a) P(B(1) > a u + c) for a > 0, and
// 4/(2 - gamma1) P(B(1) > a u + c) for a <= 0.
inline double asymptotic_tail_form(const canonical_problem& prob, double constant) {
    validate(prob);
    const double log_tail = log_bivariate_tail(prob.u, prob.a, prob.c1, prob.c2);
    if (prob.a > 0.0) return std::exp(std::log(prob.a * constant) + log_tail);
    return std::exp(std::log(reflected_prefactor(prob.gamma1)) + log_tail);
}

}  // namespace bidiruin
