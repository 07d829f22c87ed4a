#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <sstream>
#include <utility>

namespace bidiruin::cli {
namespace {

// Keys accepted on the command line (as --key) and in config files.
const std::vector<std::string>& known_keys() {
    static const std::vector<std::string> keys = {
        "u",        "a",          "u1",       "u2",         "c1",           "c2",
        "gamma1",   "gamma2",     "T",        "n-paths",    "n-grid",       "refine",
        "estimator", "drift1",    "drift2",   "lambda",     "mode",         "constant-paths",
        "constant-grid", "constant", "seed",  "workers",    "output",       "format",
        "u-list"};
    return keys;
}

std::string trim(std::string_view s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string_view::npos) return {};
    const auto end = s.find_last_not_of(" \t\r");
    return std::string(s.substr(begin, end - begin + 1));
}

std::string normalize_key(std::string key) {
    std::replace(key.begin(), key.end(), '_', '-');
    if (key == "horizon") key = "T";
    return key;
}

bool is_known(const std::string& key) {
    const auto& keys = known_keys();
    return std::find(keys.begin(), keys.end(), key) != keys.end();
}

std::map<std::string, std::string> read_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw usage_error("cannot open config file '" + path + "'");
    std::map<std::string, std::string> values;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const std::string content = trim(line);
        if (content.empty()) continue;
        const auto eq = content.find('=');
        if (eq == std::string::npos) {
            throw usage_error(path + ":" + std::to_string(line_no) + ": expected 'key = value'");
        }
        const std::string key = normalize_key(trim(std::string_view(content).substr(0, eq)));
        const std::string value = trim(std::string_view(content).substr(eq + 1));
        if (!is_known(key)) {
            throw usage_error(path + ":" + std::to_string(line_no) + ": unknown key '" + key + "'");
        }
        if (value.empty()) {
            throw usage_error(path + ":" + std::to_string(line_no) + ": empty value for '" + key + "'");
        }
        values[key] = value;
    }
    return values;
}

double parse_double(const std::string& key, const std::string& text) {
    double value = 0.0;
    const char* first = text.data();
    const char* last = first + text.size();
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last || !std::isfinite(value)) {
        throw usage_error("invalid number for '" + key + "': '" + text + "'");
    }
    return value;
}

std::uint64_t parse_unsigned(const std::string& key, const std::string& text) {
    std::uint64_t value = 0;
    const char* first = text.data();
    const char* last = first + text.size();
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last) {
        throw usage_error("invalid non-negative integer for '" + key + "': '" + text + "'");
    }
    return value;
}

bool parse_bool(const std::string& key, const std::string& text) {
    std::string lower = text;
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
    if (lower == "true" || lower == "1" || lower == "yes" || lower == "on") return true;
    if (lower == "false" || lower == "0" || lower == "no" || lower == "off") return false;
    throw usage_error("invalid boolean for '" + key + "': '" + text + "'");
}

std::vector<double> parse_list(const std::string& key, const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_double(key, trim(item)));
    if (out.empty()) throw usage_error("empty list for '" + key + "'");
    return out;
}

subcommand parse_subcommand(const std::string& name) {
    if (name == "simulate") return subcommand::simulate;
    if (name == "constant") return subcommand::constant;
    if (name == "asymptotic") return subcommand::asymptotic;
    if (name == "compare") return subcommand::compare;
    return subcommand::selftest;
}

// Converts the merged key/value map into a validated configuration.
run_config build_config(subcommand command, const std::map<std::string, std::string>& kv) {
    run_config cfg;
    cfg.command = command;
    auto get = [&](const std::string& key) -> const std::string* {
        const auto it = kv.find(key);
        return it == kv.end() ? nullptr : &it->second;
    };
    auto number = [&](const std::string& key, double fallback) {
        const auto* v = get(key);
        return v ? parse_double(key, *v) : fallback;
    };

    cfg.model.c1 = number("c1", 0.0);
    cfg.model.c2 = number("c2", 0.0);
    cfg.model.gamma1 = number("gamma1", 0.0);
    cfg.model.gamma2 = number("gamma2", 0.0);
    cfg.model.horizon = number("T", 1.0);

    const bool has_u = get("u") != nullptr;
    const bool has_pair = get("u1") != nullptr || get("u2") != nullptr;
    if (has_u && has_pair) throw usage_error("give either --u/--a or --u1/--u2, not both");
    if (has_pair) {
        if (!get("u1") || !get("u2")) throw usage_error("--u1 and --u2 must be given together");
        if (get("a")) throw usage_error("--a cannot be combined with --u1/--u2");
        cfg.model.u1 = number("u1", 0.0);
        cfg.model.u2 = number("u2", 0.0);
        cfg.has_barriers = true;
    } else {
        const double a = number("a", 1.0);
        // The constant depends only on a, so u defaults to 1 there.
        const double u = number("u", 1.0);
        cfg.model.u1 = u;
        cfg.model.u2 = a * u;
        cfg.has_barriers = has_u || (command == subcommand::constant && get("a"));
    }

    if (const auto* v = get("u-list")) cfg.u_list = parse_list("u-list", *v);

    if (const auto* v = get("estimator")) {
        if (*v == "crude") cfg.estimator = estimator_kind::crude;
        else if (*v == "tilted") cfg.estimator = estimator_kind::tilted;
        else throw usage_error("estimator must be 'crude' or 'tilted'");
    }
    if (const auto* v = get("n-paths")) cfg.sim.n_paths = parse_unsigned("n-paths", *v);
    if (const auto* v = get("n-grid")) cfg.sim.n_grid = parse_unsigned("n-grid", *v);
    if (const auto* v = get("refine")) cfg.sim.refine = parse_bool("refine", *v);
    if (const auto* v = get("seed")) cfg.sim.seed = parse_unsigned("seed", *v);
    if (const auto* v = get("workers")) cfg.sim.workers = static_cast<unsigned>(parse_unsigned("workers", *v));

    const bool has_d1 = get("drift1") != nullptr;
    const bool has_d2 = get("drift2") != nullptr;
    if (has_d1 != has_d2) throw usage_error("--drift1 and --drift2 must be given together");
    if (has_d1) cfg.drift = std::array<double, 2>{number("drift1", 0.0), number("drift2", 0.0)};

    cfg.lambda = number("lambda", 8.0);
    if (const auto* v = get("constant-grid")) cfg.constant_grid = parse_unsigned("constant-grid", *v);
    if (const auto* v = get("constant-paths")) cfg.constant_paths = parse_unsigned("constant-paths", *v);
    if (const auto* v = get("mode")) {
        if (*v == "exact" || *v == "exact_exponential_sup") cfg.mode = sup_mode::exact_exponential_sup;
        else if (*v == "truncated" || *v == "truncated_sup") cfg.mode = sup_mode::truncated_sup;
        else throw usage_error("mode must be 'exact_exponential_sup' or 'truncated_sup'");
    }
    if (get("constant")) cfg.constant_value = number("constant", 0.0);

    if (const auto* v = get("output")) cfg.output = *v;
    cfg.format = command == subcommand::compare ? output_format::csv : output_format::json;
    if (const auto* v = get("format")) {
        if (*v == "csv") cfg.format = output_format::csv;
        else if (*v == "json") cfg.format = output_format::json;
        else throw usage_error("format must be 'csv' or 'json'");
    }

    if (command == subcommand::selftest) return cfg;

    // Numeric invariants go through the model module.
    try {
        validate(cfg.model);
        if (command == subcommand::compare) {
            if (cfg.u_list.empty()) throw usage_error("compare needs --u-list");
            for (double u : cfg.u_list) {
                model_params m = cfg.model;
                m.u1 = u;
                m.u2 = number("a", 1.0) * u;
                if (has_pair) throw usage_error("compare takes --a with --u-list, not --u1/--u2");
                (void)canonical_form(m);
            }
        } else {
            if (!cfg.has_barriers) throw usage_error("missing barrier: give --u (and --a) or --u1 and --u2");
            (void)canonical_form(cfg.model);
        }
    } catch (const bidiruin::error& e) {
        throw usage_error(e.what());
    }
    if (command == subcommand::simulate || command == subcommand::compare) {
        if (cfg.sim.n_paths < 100) throw usage_error("n-paths must be at least 100");
        if (cfg.sim.n_grid < 1) throw usage_error("n-grid must be at least 1");
    }
    if (!(cfg.lambda > 0.0)) throw usage_error("lambda must be positive");
    if (cfg.constant_paths < 2) throw usage_error("constant-paths must be at least 2");
    if (cfg.constant_value && !(*cfg.constant_value > 0.0)) throw usage_error("constant must be positive");
    return cfg;
}

// ---------------------------------------------------------------------------
// Output

class record_writer {
   public:
    void add(std::string key, double v) { fields_.emplace_back(std::move(key), format_number(v)); }
    void add_int(std::string key, std::uint64_t v) { fields_.emplace_back(std::move(key), std::to_string(v)); }
    void add_text(std::string key, std::string v) { fields_.emplace_back(std::move(key), quote(v)); }
    void add_raw(std::string key, std::string v) { fields_.emplace_back(std::move(key), std::move(v)); }

    std::string json() const {
        std::string s = "{";
        for (std::size_t i = 0; i < fields_.size(); ++i) {
            if (i) s += ", ";
            s += quote(fields_[i].first) + ": " + fields_[i].second;
        }
        return s + "}";
    }

    std::string csv_header() const {
        std::string s;
        for (std::size_t i = 0; i < fields_.size(); ++i) s += (i ? "," : "") + fields_[i].first;
        return s;
    }

    std::string csv_row() const {
        std::string s;
        for (std::size_t i = 0; i < fields_.size(); ++i) {
            std::string v = fields_[i].second;
            if (!v.empty() && v.front() == '"') v = v.substr(1, v.size() - 2);
            s += (i ? "," : "") + v;
        }
        return s;
    }

   private:
    static std::string quote(const std::string& v) { return "\"" + v + "\""; }
    std::vector<std::pair<std::string, std::string>> fields_;
};

void emit(const std::vector<record_writer>& records, output_format format, bool as_array, std::ostream& out) {
    if (format == output_format::json) {
        if (as_array) {
            out << "[\n";
            for (std::size_t i = 0; i < records.size(); ++i) {
                out << "  " << records[i].json() << (i + 1 < records.size() ? ",\n" : "\n");
            }
            out << "]\n";
        } else {
            out << records.front().json() << "\n";
        }
        return;
    }
    out << records.front().csv_header() << "\n";
    for (const auto& r : records) out << r.csv_row() << "\n";
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string_view branch_name(asymptotic_branch b) { return to_string(b); }

// Drift overrides are given in the user's coordinate order.
std::optional<std::array<double, 2>> canonical_drift(const run_config& cfg, const canonical_problem& prob) {
    if (!cfg.drift) return std::nullopt;
    auto d = *cfg.drift;
    if (prob.swapped) std::swap(d[0], d[1]);
    return d;
}

constant_config constant_settings(const run_config& cfg) {
    constant_config cc;
    cc.lambda = cfg.lambda;
    cc.n_grid = cfg.constant_grid;
    cc.n_paths = cfg.constant_paths;
    cc.mode = cfg.mode;
    cc.seed = cfg.sim.seed;
    cc.workers = cfg.sim.workers;
    return cc;
}

int run_simulate(const run_config& cfg, std::ostream& out) {
    const auto start = std::chrono::steady_clock::now();
    const canonical_problem prob = canonical_form(cfg.model);
    const estimate est = cfg.estimator == estimator_kind::crude
                             ? crude_mc(prob, cfg.sim)
                             : tilted_mc(prob, cfg.sim, canonical_drift(cfg, prob));
    record_writer r;
    r.add("p_hat", est.p_hat);
    r.add("stderr", est.std_error);
    if (cfg.format == output_format::json) {
        r.add_raw("ci95", "[" + format_number(est.ci95_low) + ", " + format_number(est.ci95_high) + "]");
    } else {
        r.add("ci95_low", est.ci95_low);
        r.add("ci95_high", est.ci95_high);
    }
    r.add_int("n_paths", est.n_paths);
    r.add_int("n_grid", cfg.sim.n_grid);
    r.add_int("seed", cfg.sim.seed);
    r.add_text("estimator", to_string(est.estimator));
    r.add("effective_sample_size", est.effective_sample_size);
    r.add("elapsed_s", seconds_since(start));
    emit({r}, cfg.format, false, out);
    return kExitOk;
}

int run_constant(const run_config& cfg, std::ostream& out) {
    const auto start = std::chrono::steady_clock::now();
    const canonical_problem prob = canonical_form(cfg.model);
    record_writer r;
    r.add("a", prob.a);
    r.add("gamma1", prob.gamma1);
    r.add("gamma2", prob.gamma2);
    r.add_text("branch", std::string(branch_name(branch_of(prob.a))));
    if (prob.a <= 0.0) {
        r.add("constant", constant_nonpositive_a(prob.a, prob.gamma1, prob.c2));
        r.add("stderr", 0.0);
        r.add_text("method", "closed_form");
    } else {
        constant_config cc = constant_settings(cfg);
        cc.a = prob.a;
        cc.gamma1 = prob.gamma1;
        cc.gamma2 = prob.gamma2;
        const constant_estimate est = estimate_constant(cc);
        r.add("constant", est.mean);
        r.add("stderr", est.std_error);
        r.add_text("method", to_string(est.mode));
        r.add_int("n_paths", est.n_paths);
        r.add("lambda", est.lambda);
        r.add("upper_bound", constant_upper_bound(prob.a, prob.gamma1, prob.gamma2));
    }
    r.add("elapsed_s", seconds_since(start));
    emit({r}, cfg.format, false, out);
    return kExitOk;
}

int run_asymptotic(const run_config& cfg, std::ostream& out) {
    const canonical_problem prob = canonical_form(cfg.model);
    double constant = 0.0;
    if (prob.a > 0.0) {
        if (!cfg.constant_value) {
            throw usage_error("asymptotic with a > 0 needs --constant (estimate it with 'constant')");
        }
        constant = *cfg.constant_value;
    } else {
        // A user-supplied constant must agree with the closed form.
        constant = cfg.constant_value.value_or(constant_nonpositive_a(prob.a, prob.gamma1, prob.c2));
    }
    const asymptotic_approx approx = asymptotic_psi(prob, constant);
    const double tail = asymptotic_tail_form(prob, constant);
    record_writer r;
    r.add("u", prob.u);
    r.add("a", prob.a);
    r.add_text("branch", std::string(branch_name(approx.branch)));
    r.add("constant", constant);
    r.add("asym", approx.value);
    r.add("log_asym", approx.log_value);
    r.add("tail_form", tail);
    r.add("form_ratio", tail > 0.0 ? approx.value / tail : 0.0);
    emit({r}, cfg.format, false, out);
    return kExitOk;
}

int run_compare(const run_config& cfg, std::ostream& out) {
    const double a = cfg.model.u1 != 0.0 ? cfg.model.u2 / cfg.model.u1 : 1.0;
    model_params m = cfg.model;
    m.u1 = cfg.u_list.front();
    m.u2 = a * m.u1;
    const canonical_problem tmpl = canonical_form(m);

    // Barriers scale with u only on a unit horizon; rescale the list otherwise.
    std::vector<double> us;
    for (double u : cfg.u_list) {
        model_params mu = cfg.model;
        mu.u1 = u;
        mu.u2 = a * u;
        us.push_back(canonical_form(mu).u);
    }

    comparison_config cc;
    cc.estimator = cfg.estimator;
    cc.sim = cfg.sim;
    cc.constant = constant_settings(cfg);
    cc.constant_override = cfg.constant_value;
    const auto rows = compare_asymptotic(tmpl, us, cc);

    std::vector<record_writer> records;
    for (const auto& row : rows) {
        record_writer r;
        r.add("u", row.u);
        r.add("p_hat", row.mc.p_hat);
        r.add("stderr", row.mc.std_error);
        r.add("asym", row.asym);
        r.add("ratio", row.ratio);
        r.add("constant", row.constant);
        r.add_text("branch", std::string(branch_name(row.branch)));
        if (cfg.format == output_format::json) {
            r.add("constant_stderr", row.constant_std_error);
            r.add("tail_form", row.tail_form);
            r.add("form_ratio", row.form_ratio);
        }
        records.push_back(std::move(r));
    }
    emit(records, cfg.format, true, out);
    return kExitOk;
}

// ---------------------------------------------------------------------------
// selftest: hand-checkable identities of every module.

using check = std::pair<std::string, std::function<bool()>>;

bool close(double x, double y, double tol) { return std::abs(x - y) <= tol; }

std::vector<check> selftest_checks() {
    std::vector<check> checks;
    checks.emplace_back("model.normalize_horizon.identity", [] {
        const model_params p{1, 1, 0, 0, 1, 1, 1};
        return normalize_horizon(p) == p;
    });
    checks.emplace_back("model.canonicalize.ratio", [] {
        const auto c = canonicalize(model_params{0, 0, 0, 0, 1, 2, 1});
        return c.u == 2 && c.a == 0.5 && !c.swapped;
    });
    checks.emplace_back("model.canonicalize.swap", [] {
        const auto c = canonicalize(model_params{1, 3, 0.5, 1.5, 1, 1, 2});
        return c.u == 2 && c.a == 0.5 && c.c1 == 3 && c.c2 == 1 && c.gamma1 == 1.5 && c.gamma2 == 0.5;
    });
    checks.emplace_back("model.canonicalize.negative_ratio", [] {
        const auto c = canonicalize(model_params{0, 0, 0, 0, 1, 3, -1.5});
        return c.u == 3 && c.a == -0.5;
    });
    checks.emplace_back("paths.sample_bm.origin_and_determinism", [] {
        const auto p = sample_bm(16, 1.0, {9, 4});
        return p.values[0] == 0.0 && p.values == sample_bm(16, 1.0, {9, 4}).values;
    });
    checks.emplace_back("paths.drifted.hand", [] {
        const grid_path p{2, 1.0, {0, 1, 2}};
        const grid_path z{2, 1.0, {0, 0, 0}};
        return drifted(p, 2).values == std::vector<double>{0, 0, 0} &&
               drifted(z, -1).values == std::vector<double>{0, 0.5, 1} && drifted(p, 0).values == p.values;
    });
    checks.emplace_back("paths.running_inf.hand", [] {
        return running_inf({2, 1.0, {0, -1, 0.5}}).values == std::vector<double>{0, -1, -1} &&
               running_inf({2, 1.0, {0, 1, 2}}).values == std::vector<double>{0, 0, 0};
    });
    checks.emplace_back("paths.reflect.hand", [] {
        const grid_path p{2, 1.0, {0, -1, 0.5}};
        return reflect(p, 1.0).values == std::vector<double>{0, 0, 1.5} &&
               reflect(p, 0.5).values == std::vector<double>{0, -0.5, 1.0} && reflect(p, 0.0).values == p.values;
    });
    checks.emplace_back("paths.bridge_min.unit_uniform", [] { return bridge_min_sample(0.3, -0.2, 0.1, 1.0) == -0.2; });
    checks.emplace_back("closedform.normal_cdf.symmetry", [] {
        return normal_cdf(0.0) == 0.5 && close(normal_cdf(1.7), 1.0 - normal_cdf(-1.7), 1e-15);
    });
    checks.emplace_back("closedform.ruin_1d_finite.zero_barrier", [] {
        return close(ruin_1d_finite(0, 1, 1), 1.0, 1e-12) && close(ruin_1d_finite(0, -1, 2), 1.0, 1e-12);
    });
    checks.emplace_back("closedform.ruin_1d_finite.reflection", [] {
        return close(ruin_1d_finite(1, 0, 1), 2.0 * normal_cdf(-1.0), 1e-15);
    });
    checks.emplace_back("closedform.ruin_1d_infinite", [] {
        return ruin_1d_infinite(0, 1) == 1.0 && close(ruin_1d_infinite(0.5, 2), ruin_1d_infinite(1, 1), 1e-16);
    });
    checks.emplace_back("closedform.reflected_prefactor", [] {
        return close(ruin_1d_reflected_asym(3, 1, 0, 1), 2.0 * mills_tail(4.0), 1e-20);
    });
    checks.emplace_back("closedform.bivariate_tail.center", [] { return close(bivariate_tail(1, 1, -1, -1), 0.25, 1e-15); });
    checks.emplace_back("closedform.constant_upper_bound", [] {
        return constant_upper_bound(1, 0, 0) == 4 && constant_upper_bound(1, 1, 1) == 16 &&
               constant_upper_bound(0.5, 0, 0) == 8;
    });
    checks.emplace_back("closedform.asymptotic_psi.density", [] {
        const canonical_problem p{1, 1, 0, 0, 0, 0, false};
        return close(asymptotic_psi(p, 1.0).value, std::exp(-1.0) / (2.0 * std::numbers::pi), 1e-15);
    });
    checks.emplace_back("constant.staircase.single_point", [] {
        const std::vector<double> x{0}, y{0};
        return close(staircase_exp_integral(x, y, 1.0), 1.0, 1e-15);
    });
    checks.emplace_back("constant.staircase.dominated", [] {
        const std::vector<double> x{1, 0.5}, y{0, -1};
        return close(staircase_exp_integral(x, y, 1.0), std::exp(1.0), 1e-14);
    });
    checks.emplace_back("constant.frontier.tax_free", [] {
        const auto f = sample_frontier(1.0, 0.0, 0.0, 1.0, 32, sup_mode::truncated_sup, {5, 0});
        const auto b1 = drifted(sample_bm(32, 1.0, {5, 0}, frontier_channel::kTimePath), 1.0);
        return f.a1 == b1.values && f.a1[0] == 0.0 && f.a2[0] == 0.0;
    });
    checks.emplace_back("mc.ruin_indicator.simultaneity", [] {
        const ruin_instance inst{{1, 1}, {0, 0}, {0, 0}, 1.0};
        return !ruin_indicator(inst, {2, 1.0, {0, 2, 0}}, {2, 1.0, {0, 0, 3}});
    });
    checks.emplace_back("mc.ruin_indicator.negative_barriers", [] {
        const ruin_instance inst{{-1, -0.5}, {0, 0}, {0, 0}, 1.0};
        return ruin_indicator(inst, sample_bm(8, 1.0, {1, 0}), sample_bm(8, 1.0, {1, 1}));
    });
    checks.emplace_back("mc.crude.certain_ruin", [] {
        const ruin_instance inst{{-1, -0.5}, {0, 0}, {0, 0}, 1.0};
        return crude_mc(inst, simulation_config{200, 8, false, 3, 1}).p_hat == 1.0;
    });
    checks.emplace_back("mc.tilted.zero_drift_is_crude", [] {
        const canonical_problem p{1, 1, 1, 1, 1, 1, false};
        const simulation_config sim{300, 32, true, 4, 1};
        return tilted_mc(p, sim, std::array<double, 2>{0, 0}).p_hat == crude_mc(p, sim).p_hat;
    });
    return checks;
}

int run_selftest(std::ostream& out) {
    int failures = 0;
    for (const auto& [name, fn] : selftest_checks()) {
        bool ok = false;
        try {
            ok = fn();
        } catch (const std::exception&) {
            ok = false;
        }
        out << (ok ? "PASS " : "FAIL ") << name << "\n";
        failures += ok ? 0 : 1;
    }
    out << (failures == 0 ? "selftest passed" : "selftest failed: " + std::to_string(failures)) << "\n";
    return failures == 0 ? kExitOk : kExitNumerical;
}

}  // namespace

std::string format_number(double value) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

run_config parse_config(const std::vector<std::string>& args) {
    CLI::App app{"Simultaneous ruin of the bidimensional gamma-reflected Brownian risk model"};
    app.require_subcommand(1);

    std::map<std::string, std::string> flag_values;
    std::map<std::string, bool> refine_flags;
    std::string config_path;
    std::map<std::string, CLI::App*> subs;

    const std::vector<std::pair<std::string, std::string>> commands = {
        {"simulate", "Monte Carlo estimate of the simultaneous ruin probability"},
        {"constant", "asymptotic constant C(a): closed form or numerical estimate"},
        {"asymptotic", "evaluate the large-u equivalent only"},
        {"compare", "Monte Carlo against the large-u equivalent over --u-list"},
        {"selftest", "run built-in identity checks"}};
    for (const auto& [name, desc] : commands) {
        CLI::App* sc = app.add_subcommand(name, desc);
        subs[name] = sc;
        sc->add_option("--config", config_path, "key = value defaults file");
        for (const auto& key : known_keys()) {
            if (key == "refine") {
                sc->add_flag("--refine", refine_flags[name], "bridge-sample the running infimum");
            } else {
                sc->add_option("--" + key, flag_values[name + "/" + key]);
            }
        }
    }

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);  // CLI11 consumes a reversed vector

    std::string chosen;
    for (const auto& [name, sc] : subs) {
        if (sc->parsed()) chosen = name;
    }
    CLI::App* sc = subs.at(chosen);

    std::map<std::string, std::string> merged;
    if (config_path.empty()) {
        if (const char* env = std::getenv("BIDIRUIN_CONFIG"); env && *env) config_path = env;
    }
    if (!config_path.empty()) merged = read_config_file(config_path);
    for (const auto& key : known_keys()) {
        if (sc->get_option("--" + key)->count() == 0) continue;
        merged[key] = key == "refine" ? "true" : flag_values[chosen + "/" + key];
    }
    return build_config(parse_subcommand(chosen), merged);
}

int run(const run_config& config, std::ostream& out, std::ostream& err) {
    try {
        std::ofstream file;
        std::ostream* sink = &out;
        if (!config.output.empty() && config.command != subcommand::selftest) {
            file.open(config.output);
            if (!file) throw usage_error("cannot open output file '" + config.output + "'");
            sink = &file;
        }
        switch (config.command) {
            case subcommand::simulate: return run_simulate(config, *sink);
            case subcommand::constant: return run_constant(config, *sink);
            case subcommand::asymptotic: return run_asymptotic(config, *sink);
            case subcommand::compare: return run_compare(config, *sink);
            case subcommand::selftest: return run_selftest(out);
        }
    } catch (const usage_error& e) {
        err << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const bidiruin::error& e) {
        err << "error: " << e.what() << "\n";
        return is_parameter_error(e.code()) ? kExitUsage : kExitNumerical;
    }
    return kExitOk;
}

int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    std::vector<std::string> args(argv + 1, argv + argc);
    run_config cfg;
    try {
        cfg = parse_config(args);
    } catch (const CLI::CallForHelp&) {
        out << "usage: bidiruin {simulate|constant|asymptotic|compare|selftest} [--key value ...]\n";
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const usage_error& e) {
        err << "usage error: " << e.what() << "\n";
        return kExitUsage;
    }
    return run(cfg, out, err);
}

}  // namespace bidiruin::cli
