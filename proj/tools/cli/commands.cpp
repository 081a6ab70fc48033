#include "commands.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <sstream>

#include "aoi/error.hpp"
#include "aoi/parallel.hpp"
#include "plot.hpp"

namespace aoi::cli {

namespace {

constexpr const char* kCsvHeader = "lambda,m,method,mean_aoi,ci_halfwidth";

std::string fmt10(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", x);
    return buf;
}

std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

double parse_positive(std::string_view text, const char* what) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size()) {
        throw ValidationError(std::string("bad ") + what + " '" + std::string(text) + "'");
    }
    if (!(v > 0.0) || !std::isfinite(v)) {
        throw ValidationError(std::string(what) + " must be positive, got '" + std::string(text) +
                              "'");
    }
    return v;
}

std::vector<std::string_view> split(std::string_view text, char sep) {
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto pos = text.find(sep, start);
        if (pos == std::string_view::npos) {
            pos = text.size();
        }
        auto piece = text.substr(start, pos - start);
        if (!piece.empty()) {
            parts.push_back(piece);
        }
        start = pos + 1;
    }
    return parts;
}

const char* format_name(OutputFormat f) { return f == OutputFormat::csv ? "csv" : "text"; }

void echo_common(std::ostream& os, const char* command, const CommonOptions& o) {
    os << "# aoi " << command << '\n';
    os << "# service = " << ServiceDistribution::parse(o.service).to_string() << '\n';
    os << "# format = " << format_name(o.format) << '\n';
}

void echo_sim(std::ostream& os, const SimConfig& c, const CommonOptions& o) {
    os << "# arrivals = " << c.arrivals().to_string()
       << (c.poisson_arrivals() ? " (poisson)" : " (renewal)") << '\n';
    os << "# horizon = " << fmt17(c.horizon) << '\n';
    os << "# warmup = " << fmt17(c.effective_warmup()) << '\n';
    os << "# seed = " << c.seed << '\n';
    os << "# replications = " << c.replications << '\n';
    os << "# confidence = " << fmt10(c.confidence) << '\n';
    os << "# single_cell = " << o.single_cell << '\n';
}

// Runs `body` against the file named by `path`, or against `fallback` when empty.
void with_output(const std::string& path, std::ostream& fallback,
                 const std::function<void(std::ostream&)>& body) {
    if (path.empty()) {
        body(fallback);
        return;
    }
    std::ofstream file(path, std::ios::binary);
    if (!file) {
        throw Error("cannot open output file '" + path + "'");
    }
    body(file);
    file.flush();
    if (!file) {
        throw Error("failed writing output file '" + path + "'");
    }
}

template <class Fn>
int guarded(std::ostream& err, Fn&& fn) {
    try {
        return fn();
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const UnsupportedConfiguration& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const NoDataError& e) {
        err << "error: " << e.what() << '\n';
        return 3;
    } catch (const DegenerateRegime& e) {
        err << "error: " << e.what() << '\n';
        return 4;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

SystemParams make_params(double lambda, int m, const std::string& service) {
    SystemParams p{lambda, m, ServiceDistribution::parse(service)};
    p.validate();
    return p;
}

struct SimTask {
    std::size_t cell;
    std::uint64_t replication;
};

// Runs every replication of every config as one flat parallel batch.
std::vector<SimulationResult> run_batch(const std::vector<SimConfig>& configs) {
    std::vector<SimTask> tasks;
    for (std::size_t c = 0; c < configs.size(); ++c) {
        configs[c].validate();
        for (int r = 0; r < configs[c].replications; ++r) {
            tasks.push_back({c, static_cast<std::uint64_t>(r)});
        }
    }
    std::vector<SamplePath> paths(tasks.size());
    parallel_for(tasks.size(), [&](std::size_t i) {
        paths[i] = run_replication(configs[tasks[i].cell], tasks[i].replication);
    });
    std::vector<std::vector<SamplePath>> grouped(configs.size());
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        grouped[tasks[i].cell].push_back(std::move(paths[i]));
    }
    std::vector<SimulationResult> results;
    results.reserve(configs.size());
    for (std::size_t c = 0; c < configs.size(); ++c) {
        results.push_back(pool(configs[c], std::move(grouped[c])));
    }
    return results;
}

}  // namespace

std::vector<double> parse_lambda_grid(std::string_view text) {
    std::vector<double> grid;
    if (text.find(':') != std::string_view::npos) {
        auto parts = split(text, ':');
        if (parts.size() != 3) {
            throw ValidationError("lambda grid must be start:stop:step or a comma list");
        }
        const double start = parse_positive(parts[0], "lambda grid start");
        const double stop = parse_positive(parts[1], "lambda grid stop");
        const double step = parse_positive(parts[2], "lambda grid step");
        if (stop < start) {
            throw ValidationError("lambda grid stop must be >= start");
        }
        const auto n = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9));
        for (std::size_t i = 0; i <= n; ++i) {
            grid.push_back(start + static_cast<double>(i) * step);
        }
    } else {
        for (auto piece : split(text, ',')) {
            grid.push_back(parse_positive(piece, "lambda"));
        }
    }
    if (grid.empty()) {
        throw ValidationError("lambda grid is empty");
    }
    return grid;
}

std::vector<int> parse_m_list(std::string_view text) {
    std::vector<int> ms;
    for (auto piece : split(text, ',')) {
        int m = 0;
        auto [ptr, ec] = std::from_chars(piece.data(), piece.data() + piece.size(), m);
        if (ec != std::errc{} || ptr != piece.data() + piece.size() || m < 1) {
            throw ValidationError("bad buffer size '" + std::string(piece) + "' in m list");
        }
        ms.push_back(m);
    }
    if (ms.empty()) {
        throw ValidationError("m list is empty");
    }
    std::sort(ms.begin(), ms.end());
    ms.erase(std::unique(ms.begin(), ms.end()), ms.end());
    return ms;
}

std::vector<Method> parse_methods(std::string_view text) {
    std::vector<Method> methods;
    for (auto piece : split(text, ',')) {
        if (piece == "analytic") {
            methods.push_back(Method::analytic);
        } else if (piece == "simulated" || piece == "sim") {
            methods.push_back(Method::simulated);
        } else {
            throw ValidationError("unknown method '" + std::string(piece) +
                                  "' (expected analytic or simulated)");
        }
    }
    if (methods.empty()) {
        throw ValidationError("method list is empty");
    }
    std::sort(methods.begin(), methods.end());
    methods.erase(std::unique(methods.begin(), methods.end()), methods.end());
    return methods;
}

SingleCellPolicy parse_single_cell(std::string_view text) {
    if (text == "preempt") {
        return SingleCellPolicy::preempt;
    }
    if (text == "block") {
        return SingleCellPolicy::block;
    }
    throw ValidationError("single-cell policy must be 'preempt' or 'block'");
}

SimConfig make_sim_config(const CommonOptions& opts) {
    SimConfig c{make_params(opts.lambda, opts.m, opts.service)};
    if (opts.arrivals) {
        c.interarrival = ServiceDistribution::parse(*opts.arrivals);
    }
    c.horizon = opts.horizon;
    c.warmup = opts.warmup;
    c.seed = opts.seed;
    c.replications = opts.replications;
    c.single_cell = parse_single_cell(opts.single_cell);
    c.validate();
    return c;
}

ValidateOptions make_validate_options() {
    ValidateOptions v;
    v.common.horizon = 1e7;
    return v;
}

std::vector<ValidationCase> default_validation_grid() {
    std::vector<ValidationCase> cases;
    const double lambdas[] = {0.5, 1.0, 4.0};
    for (const char* svc : {"det:1", "exp:1", "erlang:3:3", "gamma:0.5:0.5"}) {
        for (double lam : lambdas) {
            cases.push_back({lam, 3, svc});
        }
    }
    for (int m : {1, 2}) {
        for (const char* svc : {"det:1", "exp:1"}) {
            for (double lam : lambdas) {
                cases.push_back({lam, m, svc});
            }
        }
    }
    return cases;
}

std::vector<SweepRow> run_sweep(const SweepOptions& opts) {
    const auto lambdas = parse_lambda_grid(opts.lambda_grid);
    const auto ms = parse_m_list(opts.m_list);
    const auto methods = parse_methods(opts.methods);
    const auto service = ServiceDistribution::parse(opts.common.service);
    const bool want_analytic =
        std::find(methods.begin(), methods.end(), Method::analytic) != methods.end();
    const bool want_sim =
        std::find(methods.begin(), methods.end(), Method::simulated) != methods.end();
    if (want_analytic && ms.back() >= 4) {
        throw UnsupportedConfiguration("analytic values exist for m <= 3 only; drop m = " +
                                       std::to_string(ms.back()) +
                                       " or use --methods simulated");
    }

    std::vector<SweepRow> rows;
    std::vector<SimConfig> sims;
    for (double lam : lambdas) {
        for (int m : ms) {
            if (want_analytic) {
                const auto est = mean_aoi(SystemParams{lam, m, service});
                rows.push_back({lam, m, Method::analytic, est.mean_aoi, 0.0});
            }
            if (want_sim) {
                CommonOptions c = opts.common;
                c.lambda = lam;
                c.m = m;
                c.arrivals.reset();
                sims.push_back(make_sim_config(c));
            }
        }
    }
    const auto results = run_batch(sims);
    for (const auto& r : results) {
        rows.push_back({r.estimate.params.lambda, r.estimate.params.m, Method::simulated,
                        r.estimate.mean_aoi, r.estimate.ci_halfwidth});
    }
    std::sort(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) {
        if (a.lambda != b.lambda) return a.lambda < b.lambda;
        if (a.m != b.m) return a.m < b.m;
        return a.method < b.method;
    });
    return rows;
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
    os << kCsvHeader << '\n';
    for (const auto& r : rows) {
        os << fmt17(r.lambda) << ',' << r.m << ',' << to_string(r.method) << ','
           << fmt17(r.mean_aoi) << ',' << fmt17(r.ci_halfwidth) << '\n';
    }
}

std::vector<ValidationRow> run_validation(const ValidateOptions& opts) {
    auto cases = opts.cases.empty() ? default_validation_grid() : opts.cases;
    if (opts.only_m) {
        std::erase_if(cases, [&](const ValidationCase& c) { return c.m != *opts.only_m; });
    }
    if (cases.empty()) {
        throw ValidationError("no validation cases selected");
    }
    std::vector<SimConfig> configs;
    std::vector<double> analytic;
    for (const auto& vc : cases) {
        if (vc.m > 3) {
            throw UnsupportedConfiguration("validation needs a closed form; m must be <= 3");
        }
        CommonOptions c = opts.common;
        c.lambda = vc.lambda;
        c.m = vc.m;
        c.service = vc.service;
        c.arrivals.reset();
        configs.push_back(make_sim_config(c));
        analytic.push_back(mean_aoi(configs.back().params).mean_aoi);
    }
    const auto results = run_batch(configs);
    std::vector<ValidationRow> rows;
    for (std::size_t i = 0; i < cases.size(); ++i) {
        const auto& r = results[i];
        const double diff = std::abs(analytic[i] - r.estimate.mean_aoi);
        rows.push_back({cases[i], analytic[i], r.estimate.mean_aoi, r.std_error,
                        r.estimate.ci_halfwidth, diff <= opts.sigmas * r.std_error,
                        r.estimate.ci_halfwidth > opts.wide_relative_ci * r.estimate.mean_aoi});
    }
    return rows;
}

int cmd_analytic(const CommonOptions& opts, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const SystemParams p = make_params(opts.lambda, opts.m, opts.service);
        if (p.m > 3) {
            throw UnsupportedConfiguration("no closed form for m = " + std::to_string(p.m) +
                                           "; run `aoi simulate` instead");
        }
        const AoiEstimate est = mean_aoi(p);
        with_output(opts.out, out, [&](std::ostream& os) {
            echo_common(os, "analytic", opts);
            os << "# m = " << p.m << '\n';
            os << "# lambda = " << fmt17(p.lambda) << '\n';
            if (opts.format == OutputFormat::csv) {
                write_sweep_csv(os, {{p.lambda, p.m, Method::analytic, est.mean_aoi, 0.0}});
            } else {
                os << "mean_aoi = " << fmt10(est.mean_aoi) << '\n';
            }
        });
        return 0;
    });
}

int cmd_simulate(const CommonOptions& opts, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const SimConfig config = make_sim_config(opts);
        const SimulationResult result = run(config);
        std::optional<double> closed_form;
        if (config.params.m <= 3 && config.poisson_arrivals() &&
            (config.params.m > 1 || config.single_cell == SingleCellPolicy::preempt)) {
            closed_form = mean_aoi(config.params).mean_aoi;
        }
        with_output(opts.out, out, [&](std::ostream& os) {
            echo_common(os, "simulate", opts);
            os << "# m = " << config.params.m << '\n';
            os << "# lambda = " << fmt17(config.params.lambda) << '\n';
            echo_sim(os, config, opts);
            if (!config.poisson_arrivals()) {
                os << "# note: renewal arrivals; closed forms assume Poisson arrivals and are not compared\n";
            }
            if (opts.format == OutputFormat::csv) {
                write_sweep_csv(os, {{config.params.lambda, config.params.m, Method::simulated,
                                      result.estimate.mean_aoi, result.estimate.ci_halfwidth}});
                return;
            }
            const double stale_fraction =
                result.departures == 0 ? 0.0
                                       : static_cast<double>(result.stale_departures) /
                                             static_cast<double>(result.departures);
            os << "mean_aoi = " << fmt10(result.estimate.mean_aoi) << '\n';
            os << "ci_halfwidth = " << fmt10(result.estimate.ci_halfwidth) << '\n';
            os << "std_error = " << fmt10(result.std_error) << '\n';
            os << "departures = " << result.departures << '\n';
            os << "drop_fraction = " << fmt10(result.drop_fraction()) << '\n';
            os << "stale_departure_fraction = " << fmt10(stale_fraction) << '\n';
            if (closed_form) {
                os << "analytic_mean_aoi = " << fmt10(*closed_form) << '\n';
            }
        });
        if (!opts.event_log.empty()) {
            SimConfig logged = config;
            logged.record_departures = true;
            const SamplePath first = run_replication(logged, 0);
            with_output(opts.event_log, out,
                        [&](std::ostream& os) { write_departure_log(os, first); });
        }
        return 0;
    });
}

int cmd_sweep(const SweepOptions& opts, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const auto rows = run_sweep(opts);
        const auto methods = parse_methods(opts.methods);
        const bool with_sim =
            std::find(methods.begin(), methods.end(), Method::simulated) != methods.end();
        with_output(opts.common.out, out, [&](std::ostream& os) {
            echo_common(os, "sweep", opts.common);
            os << "# lambda_grid = " << opts.lambda_grid << '\n';
            os << "# m_list = " << opts.m_list << '\n';
            os << "# methods = " << opts.methods << '\n';
            if (with_sim) {
                CommonOptions c = opts.common;
                c.arrivals.reset();
                echo_sim(os, make_sim_config(c), c);
            }
            write_sweep_csv(os, rows);
        });
        if (!opts.common.plot.empty()) {
            std::map<std::pair<int, Method>, PlotSeries> series;
            for (const auto& r : rows) {
                auto& s = series[{r.m, r.method}];
                if (s.label.empty()) {
                    s.label = "m=" + std::to_string(r.m) + " " + to_string(r.method);
                }
                s.x.push_back(r.lambda);
                s.y.push_back(r.mean_aoi);
            }
            std::vector<PlotSeries> ordered;
            for (auto& [key, s] : series) {
                ordered.push_back(std::move(s));
            }
            const std::string title =
                "Mean AoI vs arrival rate, service " +
                ServiceDistribution::parse(opts.common.service).to_string();
            with_output(opts.common.plot, out, [&](std::ostream& os) {
                write_svg_plot(os, ordered, title, "arrival rate lambda", "mean AoI");
            });
        }
        return 0;
    });
}

int cmd_validate(const ValidateOptions& opts, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const auto rows = run_validation(opts);
        std::size_t passed = 0;
        for (const auto& r : rows) {
            passed += r.pass ? 1 : 0;
        }
        with_output(opts.common.out, out, [&](std::ostream& os) {
            os << "# aoi validate\n";
            os << "# horizon = " << fmt17(opts.common.horizon) << '\n';
            os << "# warmup = "
               << fmt17(opts.common.warmup.value_or(0.05 * opts.common.horizon)) << '\n';
            os << "# seed = " << opts.common.seed << '\n';
            os << "# replications = " << opts.common.replications << '\n';
            os << "# criterion = |analytic - simulated| <= " << fmt10(opts.sigmas)
               << " standard errors\n";
            if (opts.only_m) {
                os << "# m = " << *opts.only_m << '\n';
            }
            if (opts.common.format == OutputFormat::csv) {
                os << "lambda,m,service,analytic,simulated,std_error,ci_halfwidth,result,wide\n";
                for (const auto& r : rows) {
                    os << fmt17(r.spec.lambda) << ',' << r.spec.m << ',' << r.spec.service << ','
                       << fmt17(r.analytic) << ',' << fmt17(r.simulated) << ','
                       << fmt17(r.std_error) << ',' << fmt17(r.ci_halfwidth) << ','
                       << (r.pass ? "PASS" : "FAIL") << ',' << (r.wide ? "wide" : "") << '\n';
                }
            } else {
                for (const auto& r : rows) {
                    os << (r.pass ? "PASS" : "FAIL") << "  m=" << r.spec.m
                       << " lambda=" << fmt10(r.spec.lambda) << " service=" << r.spec.service
                       << "  analytic=" << fmt10(r.analytic) << " simulated=" << fmt10(r.simulated)
                       << " se=" << fmt10(r.std_error) << " ci95=" << fmt10(r.ci_halfwidth)
                       << (r.wide ? "  [wide CI]" : "") << '\n';
                }
            }
            os << "# summary: " << passed << '/' << rows.size() << " PASS\n";
        });
        return passed == rows.size() ? 0 : 1;
    });
}

}  // namespace aoi::cli
