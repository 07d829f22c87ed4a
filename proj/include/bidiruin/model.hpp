#pragma once

#include <cmath>
#include <utility>

#include "bidiruin/error.hpp"

namespace bidiruin {

// A bidimensional gamma-reflected Brownian risk model on [0, horizon] with
// barriers (u1, u2). Components are independent.
struct model_params {
    double c1 = 0.0;
    double c2 = 0.0;
    double gamma1 = 0.0;
    double gamma2 = 0.0;
    double horizon = 1.0;
    double u1 = 1.0;
    double u2 = 1.0;

    friend bool operator==(const model_params&, const model_params&) = default;
};

// Horizon-one form with the larger barrier first: barriers are (u, a*u), a <= 1.
struct canonical_problem {
    double u = 1.0;
    double a = 1.0;
    double c1 = 0.0;
    double c2 = 0.0;
    double gamma1 = 0.0;
    double gamma2 = 0.0;
    bool swapped = false;

    double barrier2() const noexcept { return a * u; }

    friend bool operator==(const canonical_problem&, const canonical_problem&) = default;
};

inline bool valid_tax(double gamma) noexcept { return gamma >= 0.0 && gamma < 2.0; }

inline void validate_tax(double gamma) {
    detail::require(valid_tax(gamma), error_code::invalid_tax, "tax rate must lie in [0, 2)");
}

inline void validate(const model_params& p) {
    detail::require(std::isfinite(p.c1) && std::isfinite(p.c2), error_code::invalid_input,
                    "premium rates must be finite");
    validate_tax(p.gamma1);
    validate_tax(p.gamma2);
    detail::require(p.horizon > 0.0 && std::isfinite(p.horizon), error_code::invalid_horizon,
                    "horizon must be positive and finite");
    detail::require(std::isfinite(p.u1) && std::isfinite(p.u2), error_code::invalid_barrier,
                    "barriers must be finite");
}

inline void validate(const canonical_problem& p) {
    detail::require(p.u > 0.0, error_code::invalid_barrier, "barrier u must be positive");
    detail::require(p.a <= 1.0, error_code::invalid_barrier, "barrier ratio a must be <= 1");
    validate_tax(p.gamma1);
    validate_tax(p.gamma2);
}

// Brownian scaling B(T t) = sqrt(T) B(t) maps the problem on [0, T] onto [0, 1]
// with barriers u / sqrt(T) and premiums c * sqrt(T).
inline model_params normalize_horizon(const model_params& p) {
    validate(p);
    const double root = std::sqrt(p.horizon);
    model_params out = p;
    out.horizon = 1.0;
    out.u1 = p.u1 / root;
    out.u2 = p.u2 / root;
    out.c1 = p.c1 * root;
    out.c2 = p.c2 * root;
    return out;
}

inline canonical_problem canonicalize(const model_params& p) {
    validate(p);
    detail::require(p.horizon == 1.0, error_code::invalid_horizon,
                    "canonicalize expects a horizon-one model; call normalize_horizon first");
    detail::require(p.u1 > 0.0, error_code::invalid_barrier, "first barrier must be positive");

    canonical_problem out;
    if (p.u2 <= p.u1) {
        out = {p.u1, p.u2 / p.u1, p.c1, p.c2, p.gamma1, p.gamma2, false};
    } else {
        // u2 > u1 > 0: relabel so the larger barrier leads.
        out = {p.u2, p.u1 / p.u2, p.c2, p.c1, p.gamma2, p.gamma1, true};
    }
    return out;
}

inline canonical_problem canonical_form(const model_params& p) {
    return canonicalize(normalize_horizon(p));
}

}  // namespace bidiruin
