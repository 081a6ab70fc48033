#pragma once

#include <cstdint>
#include <deque>
#include <iosfwd>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

#include "aoi/analytic.hpp"
#include "aoi/distributions.hpp"

namespace aoi {

/// What a full single-cell system (m = 1) does with a new arrival.
///
/// `preempt` lets the newcomer push the message in service out of the
/// system; this is the P_1 system whose mean AoI is 1/(lambda G(lambda)).
/// `block` discards the newcomer instead. For m >= 2 service is never
/// interrupted and the policy is ignored.
enum class SingleCellPolicy { preempt, block };

struct SimConfig {
    explicit SimConfig(SystemParams p) : params(std::move(p)) {}

    SystemParams params;
    std::optional<ServiceDistribution> interarrival;  // exp(lambda) when empty
    double horizon = 1e6;
    std::optional<double> warmup;  // 5% of horizon when empty
    std::uint64_t seed = 1;
    int replications = 8;
    double confidence = 0.95;
    SingleCellPolicy single_cell = SingleCellPolicy::preempt;
    bool record_departures = false;

    void validate() const;
    double effective_warmup() const;
    ServiceDistribution arrivals() const;
    bool poisson_arrivals() const;
};

struct Message {
    double arrival;
    double service;
};

struct ArrivalOutcome {
    bool entered_service = false;
    std::optional<Message> dropped;
};

/// Contents of the m cells: the message in service plus up to m-1 waiting
/// messages kept newest-first.
class BufferState {
public:
    explicit BufferState(int m, SingleCellPolicy single_cell = SingleCellPolicy::preempt);

    const std::optional<Message>& in_service() const noexcept { return in_service_; }
    const std::deque<Message>& waiting() const noexcept { return waiting_; }
    int capacity() const noexcept { return m_; }
    int occupancy() const noexcept;

    /// A full waiting area loses its oldest message.
    ArrivalOutcome arrive(const Message& msg);

    /// Completes the current service; the newest waiting message moves into
    /// service. Throws ProtocolViolation when the server is idle.
    Message depart();

private:
    int m_;
    SingleCellPolicy single_cell_;
    std::optional<Message> in_service_;
    std::deque<Message> waiting_;
};

struct ArrivalEvent {
    double time;
    Message message;
};

struct DepartureEvent {
    double time;
};

using Event = std::variant<ArrivalEvent, DepartureEvent>;

BufferState step(BufferState state, const Event& event);

struct DepartureRecord {
    double time;
    double served_arrival;
    int k_after;       // occupied cells right after the departure
    double aoi_after;  // AoI right after the departure
    bool stale;        // served message older than the freshest already served

    friend bool operator==(const DepartureRecord&, const DepartureRecord&) = default;
};

struct GapMoments {
    std::uint64_t count = 0;
    double sum = 0.0;
    double sum_sq = 0.0;

    friend bool operator==(const GapMoments&, const GapMoments&) = default;
};

/// Measurements of one replication over [measure_start, horizon].
struct SamplePath {
    std::uint64_t replication = 0;
    std::uint64_t seed = 0;
    double measure_start = 0.0;
    double measured_time = 0.0;
    double integrated_aoi = 0.0;
    std::uint64_t arrivals = 0;
    std::uint64_t departures = 0;
    std::uint64_t drops = 0;
    std::uint64_t stale_departures = 0;
    double freshest_served_arrival = 0.0;
    int chain_states = 0;                      // m when chain statistics are kept, else 0
    std::vector<std::uint64_t> transitions;    // chain_states^2, row-major K_n -> K_{n+1}
    std::vector<GapMoments> gaps_by_k;         // inter-departure gap keyed by K at its start
    std::vector<DepartureRecord> departure_log;  // only with record_departures

    double mean_aoi() const;

    friend bool operator==(const SamplePath&, const SamplePath&) = default;
};

struct SimulationResult {
    std::vector<SamplePath> paths;  // ordered by replication index
    AoiEstimate estimate;
    double std_error;
    std::uint64_t arrivals;
    std::uint64_t departures;
    std::uint64_t drops;
    std::uint64_t stale_departures;

    double drop_fraction() const;
};

SamplePath run_replication(const SimConfig& config, std::uint64_t index);

/// Deterministic reduction over replications; input order does not matter.
SimulationResult pool(const SimConfig& config, std::vector<SamplePath> paths);

/// Runs all replications (in parallel when cores are available) and pools them.
SimulationResult run(const SimConfig& config);

struct EmpiricalChain {
    Matrix3 P;
    Vector3 pi;
    std::uint64_t departures;
};

EmpiricalChain empirical_chain(const SimulationResult& result);
EmpiricalChain empirical_chain(const SimConfig& config);

struct CycleDiagnostics {
    double mean_gap, mean_gap_se;
    double second_moment, second_moment_se;
    Vector3 mean_gap_given_k, mean_gap_given_k_se;
};

/// Inter-departure moments at m = 3; standard errors come from the spread
/// across replications.
CycleDiagnostics cycle_diagnostics(const SimulationResult& result);
CycleDiagnostics cycle_diagnostics(const SimConfig& config);

/// One JSON object per line: time, served_arrival, k_after, aoi, stale.
void write_departure_log(std::ostream& os, const SamplePath& path);

}  // namespace aoi
