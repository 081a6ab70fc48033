#include <benchmark/benchmark.h>

#include "aoi/analytic.hpp"
#include "aoi/simulator.hpp"

namespace {

aoi::SystemParams params(double lambda, int m, const char* service) {
    return aoi::SystemParams{lambda, m, aoi::ServiceDistribution::parse(service)};
}

void BM_MeanAoiM3(benchmark::State& state) {
    const auto p = params(1.0, 3, "gamma:0.5:0.5");
    for (auto _ : state) {
        benchmark::DoNotOptimize(aoi::mean_aoi(p).mean_aoi);
    }
}
BENCHMARK(BM_MeanAoiM3);

void BM_AnalyticSweep(benchmark::State& state) {
    for (auto _ : state) {
        double acc = 0.0;
        for (int k = 1; k <= 160; ++k) {
            for (int m = 1; m <= 3; ++m) {
                acc += aoi::mean_aoi(params(0.05 * k, m, "det:1")).mean_aoi;
            }
        }
        benchmark::DoNotOptimize(acc);
    }
}
BENCHMARK(BM_AnalyticSweep)->Unit(benchmark::kMillisecond);

// Events per second of one replication; argument is m.
void BM_Replication(benchmark::State& state) {
    aoi::SimConfig c(params(1.0, static_cast<int>(state.range(0)), "exp:1"));
    c.horizon = 1e5;
    std::uint64_t events = 0;
    std::uint64_t index = 0;
    for (auto _ : state) {
        const auto path = aoi::run_replication(c, index++);
        events += path.arrivals + path.departures;
        benchmark::DoNotOptimize(path.integrated_aoi);
    }
    state.counters["events/s"] =
        benchmark::Counter(static_cast<double>(events), benchmark::Counter::kIsRate);
}
BENCHMARK(BM_Replication)->Arg(1)->Arg(3)->Arg(16)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
