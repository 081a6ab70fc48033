// Command-line front end: analytic, simulate, sweep, validate.

#include <iostream>

#include <CLI11.hpp>

#include "cli/commands.hpp"

namespace {

using aoi::cli::CommonOptions;
using aoi::cli::OutputFormat;

void add_model_flags(CLI::App& app, CommonOptions& o) {
    app.add_option("--m", o.m, "Buffer size (cells, including the one in service)")
        ->capture_default_str();
    app.add_option("--lambda", o.lambda, "Poisson arrival rate")->capture_default_str();
    app.add_option("--service", o.service,
                   "Service law: det:<d> | exp:<mu> | erlang:<k>:<nu> | gamma:<alpha>:<nu>")
        ->capture_default_str();
}

void add_sim_flags(CLI::App& app, CommonOptions& o) {
    app.add_option("--horizon", o.horizon, "Simulated time per replication")->capture_default_str();
    app.add_option("--warmup", o.warmup, "Discarded initial time (default 5% of horizon)");
    app.add_option("--seed", o.seed, "Master seed")->capture_default_str();
    app.add_option("--replications", o.replications, "Independent replications")
        ->capture_default_str();
    app.add_option("--single-cell", o.single_cell,
                   "m=1 arrival to a busy server: preempt (P1) or block")
        ->capture_default_str();
}

void add_output_flags(CLI::App& app, CommonOptions& o) {
    app.add_option("--out", o.out, "Write results to this file instead of stdout");
    app.add_option("--format", o.format, "text or csv")
        ->transform(CLI::CheckedTransformer(
            std::map<std::string, OutputFormat>{{"text", OutputFormat::text},
                                                {"csv", OutputFormat::csv}}));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Mean age of information of LIFO pushout buffer systems"};
    app.require_subcommand(1);

    CommonOptions analytic_opts;
    auto* analytic = app.add_subcommand("analytic", "Closed-form mean AoI (m <= 3)");
    add_model_flags(*analytic, analytic_opts);
    add_output_flags(*analytic, analytic_opts);

    CommonOptions sim_opts;
    auto* simulate = app.add_subcommand("simulate", "Discrete-event simulation for any m");
    add_model_flags(*simulate, sim_opts);
    add_sim_flags(*simulate, sim_opts);
    add_output_flags(*simulate, sim_opts);
    simulate->add_option("--arrivals", sim_opts.arrivals,
                         "Interarrival law (default exp:<lambda>); non-exponential means renewal arrivals");
    simulate->add_option("--event-log", sim_opts.event_log,
                         "Write replication 0's departures as JSON lines to this file");

    aoi::cli::SweepOptions sweep_opts;
    auto* sweep = app.add_subcommand("sweep", "Mean AoI over a lambda grid, CSV and optional SVG");
    sweep->add_option("--service", sweep_opts.common.service, "Service law")->capture_default_str();
    sweep->add_option("--lambda-grid", sweep_opts.lambda_grid, "start:stop:step or a,b,c")
        ->capture_default_str();
    sweep->add_option("--m-list", sweep_opts.m_list, "Comma-separated buffer sizes")
        ->capture_default_str();
    sweep->add_option("--methods", sweep_opts.methods, "analytic,simulated")
        ->capture_default_str();
    sweep->add_option("--plot", sweep_opts.common.plot, "Write an SVG plot to this file");
    add_sim_flags(*sweep, sweep_opts.common);
    add_output_flags(*sweep, sweep_opts.common);

    aoi::cli::ValidateOptions validate_opts = aoi::cli::make_validate_options();
    auto* validate =
        app.add_subcommand("validate", "Check closed forms against simulation (3 standard errors)");
    validate->add_option("--m", validate_opts.only_m, "Restrict the default grid to one m");
    add_sim_flags(*validate, validate_opts.common);
    add_output_flags(*validate, validate_opts.common);

    CLI11_PARSE(app, argc, argv);

    if (*analytic) {
        return aoi::cli::cmd_analytic(analytic_opts, std::cout, std::cerr);
    }
    if (*simulate) {
        return aoi::cli::cmd_simulate(sim_opts, std::cout, std::cerr);
    }
    if (*sweep) {
        return aoi::cli::cmd_sweep(sweep_opts, std::cout, std::cerr);
    }
    return aoi::cli::cmd_validate(validate_opts, std::cout, std::cerr);
}
