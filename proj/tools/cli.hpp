#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bidiruin/bidiruin.hpp"

namespace bidiruin::cli {

enum class subcommand { simulate, constant, asymptotic, compare, selftest };
enum class output_format { csv, json };

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitNumerical = 2;

class usage_error : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

struct run_config {
    subcommand command = subcommand::simulate;

    model_params model;
    bool has_barriers = false;
    std::vector<double> u_list;

    estimator_kind estimator = estimator_kind::tilted;
    simulation_config sim;
    std::optional<std::array<double, 2>> drift;

    double lambda = 8.0;
    std::size_t constant_grid = 0;
    std::size_t constant_paths = 20000;
    sup_mode mode = sup_mode::exact_exponential_sup;
    std::optional<double> constant_value;

    std::string output;  // empty: standard output
    output_format format = output_format::json;
};

// `args` excludes the program name. A `--config FILE` (or the file named by
// BIDIRUIN_CONFIG) supplies `key = value` defaults; flags win over the file.
run_config parse_config(const std::vector<std::string>& args);

// Returns the process exit code: 0 success, 1 usage error, 2 numerical or
// regime error.
int run(const run_config& config, std::ostream& out, std::ostream& err);

int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

// 17 significant digits, '.' separator, no grouping.
std::string format_number(double value);

}  // namespace bidiruin::cli
