#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace bidiruin {

enum class error_code {
    invalid_horizon,
    invalid_barrier,
    invalid_grid,
    invalid_tax,
    invalid_input,
    divergent,
    out_of_regime,
    wrong_branch,
};

constexpr std::string_view to_string(error_code code) noexcept {
    switch (code) {
        case error_code::invalid_horizon: return "invalid-horizon";
        case error_code::invalid_barrier: return "invalid-barrier";
        case error_code::invalid_grid: return "invalid-grid";
        case error_code::invalid_tax: return "invalid-tax";
        case error_code::invalid_input: return "invalid-input";
        case error_code::divergent: return "divergent";
        case error_code::out_of_regime: return "out-of-regime";
        case error_code::wrong_branch: return "wrong-branch";
    }
    return "unknown";
}

// Parameter violations are the caller's fault; the remaining codes mean the
// request is well-formed but asks for a quantity outside a formula's domain.
constexpr bool is_parameter_error(error_code code) noexcept {
    switch (code) {
        case error_code::divergent:
        case error_code::out_of_regime:
        case error_code::wrong_branch:
            return false;
        default:
            return true;
    }
}

class error : public std::runtime_error {
   public:
    error(error_code code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    error_code code() const noexcept { return code_; }

   private:
    error_code code_;
};

namespace detail {

inline void require(bool condition, error_code code, const char* what) {
    if (!condition) throw error(code, what);
}

}  // namespace detail
}  // namespace bidiruin
