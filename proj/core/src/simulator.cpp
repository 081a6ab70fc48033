#include "aoi/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>

#include <json.hpp>

#include "aoi/error.hpp"
#include "aoi/parallel.hpp"
#include "aoi/statistics.hpp"

namespace aoi {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kMaxChainStates = 64;
constexpr std::uint64_t kMinChainDepartures = 10'000;

// Integral of (t - freshest) over [t1, t2].
double sawtooth_area(double t1, double t2, double freshest) {
    return 0.5 * (t2 - t1) * ((t1 - freshest) + (t2 - freshest));
}

}  // namespace

void SimConfig::validate() const {
    params.validate();
    if (!(horizon > 0.0) || !std::isfinite(horizon)) {
        throw ValidationError("horizon must be positive and finite");
    }
    const double w = effective_warmup();
    if (!(w >= 0.0) || !(w < horizon)) {
        throw ValidationError("warmup must satisfy 0 <= warmup < horizon");
    }
    if (replications < 1) {
        throw ValidationError("replications must be >= 1");
    }
    if (!(confidence > 0.0 && confidence < 1.0)) {
        throw ValidationError("confidence must lie in (0, 1)");
    }
}

double SimConfig::effective_warmup() const { return warmup.value_or(0.05 * horizon); }

ServiceDistribution SimConfig::arrivals() const {
    return interarrival.value_or(ServiceDistribution::exponential(params.lambda));
}

bool SimConfig::poisson_arrivals() const {
    return !interarrival || *interarrival == ServiceDistribution::exponential(params.lambda);
}

BufferState::BufferState(int m, SingleCellPolicy single_cell) : m_(m), single_cell_(single_cell) {
    if (m < 1) {
        throw ValidationError("buffer size m must be >= 1");
    }
}

int BufferState::occupancy() const noexcept {
    return (in_service_ ? 1 : 0) + static_cast<int>(waiting_.size());
}

ArrivalOutcome BufferState::arrive(const Message& msg) {
    ArrivalOutcome out;
    if (!in_service_) {
        in_service_ = msg;
        out.entered_service = true;
        return out;
    }
    if (m_ == 1) {
        if (single_cell_ == SingleCellPolicy::preempt) {
            out.dropped = *in_service_;
            in_service_ = msg;
            out.entered_service = true;
        } else {
            out.dropped = msg;
        }
        return out;
    }
    waiting_.push_front(msg);
    if (static_cast<int>(waiting_.size()) > m_ - 1) {
        out.dropped = waiting_.back();
        waiting_.pop_back();
    }
    return out;
}

Message BufferState::depart() {
    if (!in_service_) {
        throw ProtocolViolation("departure from an idle server");
    }
    Message done = *in_service_;
    in_service_.reset();
    if (!waiting_.empty()) {
        in_service_ = waiting_.front();
        waiting_.pop_front();
    }
    return done;
}

BufferState step(BufferState state, const Event& event) {
    if (const auto* a = std::get_if<ArrivalEvent>(&event)) {
        state.arrive(a->message);
    } else {
        state.depart();
    }
    return state;
}

double SamplePath::mean_aoi() const {
    if (!(measured_time > 0.0)) {
        throw NoDataError("no measured time in replication " + std::to_string(replication));
    }
    return integrated_aoi / measured_time;
}

double SimulationResult::drop_fraction() const {
    return arrivals == 0 ? 0.0 : static_cast<double>(drops) / static_cast<double>(arrivals);
}

SamplePath run_replication(const SimConfig& config, std::uint64_t index) {
    config.validate();
    const int m = config.params.m;
    const ServiceDistribution arrivals = config.arrivals();
    const ServiceDistribution& service = config.params.service;
    const double horizon = config.horizon;
    const double warmup = config.effective_warmup();

    SamplePath path;
    path.replication = index;
    path.seed = replication_seed(config.seed, index);
    if (m <= kMaxChainStates) {
        path.chain_states = m;
        path.transitions.assign(static_cast<std::size_t>(m) * m, 0);
        path.gaps_by_k.assign(static_cast<std::size_t>(m), GapMoments{});
    }

    Rng rng(path.seed);
    BufferState buffer(m, config.single_cell);
    double next_arrival = arrivals.sample(rng);
    double next_departure = kInf;
    double freshest = -kInf;
    bool served_any = false;
    bool measuring = false;
    double last_t = 0.0;
    int prev_k = -1;
    double prev_departure = 0.0;

    while (true) {
        // Exact ties go to the departure.
        const bool is_departure = next_departure <= next_arrival;
        const double t = is_departure ? next_departure : next_arrival;
        if (t > horizon) {
            break;
        }
        if (!measuring && served_any && t >= warmup) {
            measuring = true;
            path.measure_start = warmup;
            last_t = warmup;
        }
        if (measuring) {
            path.integrated_aoi += sawtooth_area(last_t, t, freshest);
            last_t = t;
        }

        if (is_departure) {
            const Message done = buffer.depart();
            const bool stale = served_any && done.arrival < freshest;
            if (!served_any || done.arrival > freshest) {
                freshest = done.arrival;
            }
            served_any = true;
            next_departure = buffer.in_service() ? t + buffer.in_service()->service : kInf;
            if (!measuring && t >= warmup) {
                measuring = true;
                path.measure_start = t;
                last_t = t;
            }
            if (measuring) {
                const int k = buffer.occupancy();
                ++path.departures;
                if (stale) {
                    ++path.stale_departures;
                }
                if (path.chain_states > 0) {
                    if (prev_k >= 0) {
                        ++path.transitions[static_cast<std::size_t>(prev_k) * m + k];
                        const double gap = t - prev_departure;
                        auto& g = path.gaps_by_k[static_cast<std::size_t>(prev_k)];
                        ++g.count;
                        g.sum += gap;
                        g.sum_sq += gap * gap;
                    }
                    prev_k = k;
                    prev_departure = t;
                }
                if (config.record_departures) {
                    path.departure_log.push_back(DepartureRecord{t, done.arrival, k, t - freshest, stale});
                }
            }
        } else {
            const Message msg{t, service.sample(rng)};
            const ArrivalOutcome outcome = buffer.arrive(msg);
            if (outcome.entered_service) {
                next_departure = t + msg.service;
            }
            if (measuring) {
                ++path.arrivals;
                if (outcome.dropped) {
                    ++path.drops;
                }
            }
            next_arrival = t + arrivals.sample(rng);
        }
    }

    if (!measuring && served_any) {
        measuring = true;
        path.measure_start = warmup;
        last_t = warmup;
    }
    if (measuring) {
        path.integrated_aoi += sawtooth_area(last_t, horizon, freshest);
        path.measured_time = horizon - path.measure_start;
    }
    path.freshest_served_arrival = served_any ? freshest : 0.0;
    return path;
}

SimulationResult pool(const SimConfig& config, std::vector<SamplePath> paths) {
    if (paths.empty()) {
        throw NoDataError("no replications to pool");
    }
    std::sort(paths.begin(), paths.end(),
              [](const SamplePath& a, const SamplePath& b) { return a.replication < b.replication; });
    std::vector<double> means;
    means.reserve(paths.size());
    std::uint64_t arrivals = 0, departures = 0, drops = 0, stale = 0;
    for (const auto& p : paths) {
        if (!(p.measured_time > 0.0) || p.departures == 0) {
            throw NoDataError("replication " + std::to_string(p.replication) +
                              " saw no departure after warmup; increase the horizon");
        }
        means.push_back(p.mean_aoi());
        arrivals += p.arrivals;
        departures += p.departures;
        drops += p.drops;
        stale += p.stale_departures;
    }
    const ReplicationSummary s = summarize(means);
    const double halfwidth =
        std::isfinite(s.std_error) ? student_t_quantile(config.confidence, s.count - 1) * s.std_error
                                   : kInf;
    return SimulationResult{std::move(paths),
                            AoiEstimate{s.mean, Method::simulated, halfwidth, config.params},
                            s.std_error,
                            arrivals,
                            departures,
                            drops,
                            stale};
}

SimulationResult run(const SimConfig& config) {
    config.validate();
    std::vector<SamplePath> paths(static_cast<std::size_t>(config.replications));
    parallel_for(paths.size(), [&](std::size_t i) { paths[i] = run_replication(config, i); });
    return pool(config, std::move(paths));
}

namespace {

void require_m3_paths(const SimulationResult& result) {
    if (result.paths.empty() || result.estimate.params.m != 3 || result.paths.front().chain_states != 3) {
        throw UnsupportedConfiguration("embedded chain diagnostics require m = 3");
    }
}

}  // namespace

EmpiricalChain empirical_chain(const SimulationResult& result) {
    require_m3_paths(result);
    std::array<std::array<std::uint64_t, 3>, 3> counts{};
    std::uint64_t total = 0;
    for (const auto& p : result.paths) {
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) {
                counts[i][j] += p.transitions[static_cast<std::size_t>(i) * 3 + j];
                total += p.transitions[static_cast<std::size_t>(i) * 3 + j];
            }
        }
    }
    if (total < kMinChainDepartures) {
        throw NoDataError("only " + std::to_string(total) +
                          " departures observed; need at least 10000 for the empirical chain");
    }
    EmpiricalChain chain{};
    chain.departures = total;
    for (int i = 0; i < 3; ++i) {
        std::uint64_t row = 0;
        for (int j = 0; j < 3; ++j) {
            row += counts[i][j];
        }
        for (int j = 0; j < 3; ++j) {
            chain.P[i][j] = row == 0 ? 0.0 : static_cast<double>(counts[i][j]) / static_cast<double>(row);
        }
        chain.pi[i] = static_cast<double>(row) / static_cast<double>(total);
    }
    return chain;
}

EmpiricalChain empirical_chain(const SimConfig& config) {
    if (config.params.m != 3) {
        throw UnsupportedConfiguration("empirical_chain requires m = 3");
    }
    return empirical_chain(run(config));
}

CycleDiagnostics cycle_diagnostics(const SimulationResult& result) {
    require_m3_paths(result);
    std::vector<double> means, seconds;
    std::array<std::vector<double>, 3> by_k;
    std::uint64_t total = 0;
    for (const auto& p : result.paths) {
        GapMoments all;
        for (int k = 0; k < 3; ++k) {
            const auto& g = p.gaps_by_k[static_cast<std::size_t>(k)];
            all.count += g.count;
            all.sum += g.sum;
            all.sum_sq += g.sum_sq;
            if (g.count > 0) {
                by_k[k].push_back(g.sum / static_cast<double>(g.count));
            }
        }
        total += all.count;
        if (all.count > 0) {
            means.push_back(all.sum / static_cast<double>(all.count));
            seconds.push_back(all.sum_sq / static_cast<double>(all.count));
        }
    }
    if (total < kMinChainDepartures) {
        throw NoDataError("too few inter-departure gaps for cycle diagnostics");
    }
    CycleDiagnostics d{};
    const auto m = summarize(means);
    const auto s = summarize(seconds);
    d.mean_gap = m.mean;
    d.mean_gap_se = m.std_error;
    d.second_moment = s.mean;
    d.second_moment_se = s.std_error;
    for (int k = 0; k < 3; ++k) {
        if (by_k[k].empty()) {
            throw NoDataError("no cycles started in state K = " + std::to_string(k));
        }
        const auto sk = summarize(by_k[k]);
        d.mean_gap_given_k[k] = sk.mean;
        d.mean_gap_given_k_se[k] = sk.std_error;
    }
    return d;
}

CycleDiagnostics cycle_diagnostics(const SimConfig& config) {
    if (config.params.m != 3) {
        throw UnsupportedConfiguration("cycle_diagnostics requires m = 3");
    }
    return cycle_diagnostics(run(config));
}

void write_departure_log(std::ostream& os, const SamplePath& path) {
    for (const auto& r : path.departure_log) {
        nlohmann::json j{{"time", r.time},
                         {"served_arrival", r.served_arrival},
                         {"k_after", r.k_after},
                         {"aoi", r.aoi_after},
                         {"stale", r.stale}};
        os << j.dump() << '\n';
    }
}

}  // namespace aoi
