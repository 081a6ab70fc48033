#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "aoi/analytic.hpp"
#include "aoi/simulator.hpp"

namespace aoi::cli {

enum class OutputFormat { text, csv };

/// Flags shared by every subcommand. Defaults are what the CLI echoes.
struct CommonOptions {
    int m = 3;
    double lambda = 1.0;
    std::string service = "exp:1";
    std::optional<std::string> arrivals;  // simulate only; exp:<lambda> when empty
    double horizon = 1e6;
    std::optional<double> warmup;
    std::uint64_t seed = 1;
    int replications = 8;
    std::string single_cell = "preempt";
    std::string out;
    std::string plot;
    std::string event_log;
    OutputFormat format = OutputFormat::text;
};

struct SweepOptions {
    CommonOptions common;
    std::string lambda_grid = "0.05:8:0.05";
    std::string m_list = "1,2,3";
    std::string methods = "analytic";
};

struct ValidationCase {
    double lambda;
    int m;
    std::string service;
};

struct ValidateOptions {
    CommonOptions common;  // horizon defaults to 1e7 via make_validate_options()
    std::optional<int> only_m;
    std::vector<ValidationCase> cases;  // default grid when empty
    double sigmas = 3.0;
    double wide_relative_ci = 0.01;
};

ValidateOptions make_validate_options();

struct SweepRow {
    double lambda;
    int m;
    Method method;
    double mean_aoi;
    double ci_halfwidth;
};

struct ValidationRow {
    ValidationCase spec;
    double analytic;
    double simulated;
    double std_error;
    double ci_halfwidth;
    bool pass;
    bool wide;
};

/// `start:stop:step` (inclusive) or a comma-separated list; all values > 0.
std::vector<double> parse_lambda_grid(std::string_view text);
/// Comma-separated positive integers; must be nonempty.
std::vector<int> parse_m_list(std::string_view text);
std::vector<Method> parse_methods(std::string_view text);
SingleCellPolicy parse_single_cell(std::string_view text);

SimConfig make_sim_config(const CommonOptions& opts);

/// The 24-case grid: 12 at m = 3 (lambda in {0.5,1,4} x det:1, exp:1,
/// erlang:3:3, gamma:0.5:0.5) and 6 each at m = 1, 2 (lambda x det:1, exp:1).
std::vector<ValidationCase> default_validation_grid();

/// Rows sorted by (lambda, m, method).
std::vector<SweepRow> run_sweep(const SweepOptions& opts);
std::vector<ValidationRow> run_validation(const ValidateOptions& opts);

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows);

/// Each command writes its report to `out`, diagnostics to `err`, and
/// returns the process exit code.
int cmd_analytic(const CommonOptions& opts, std::ostream& out, std::ostream& err);
int cmd_simulate(const CommonOptions& opts, std::ostream& out, std::ostream& err);
int cmd_sweep(const SweepOptions& opts, std::ostream& out, std::ostream& err);
int cmd_validate(const ValidateOptions& opts, std::ostream& out, std::ostream& err);

}  // namespace aoi::cli
