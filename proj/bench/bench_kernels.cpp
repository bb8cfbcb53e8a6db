// Parallel kernels against their serial references.

#include "sealmates/kernels.hpp"
#include "sealmates/simulator.hpp"

#include <benchmark/benchmark.h>

using namespace sealmates;

namespace {

const SessionLog& session()
{
    static const SessionLog log = [] {
        SessionConfig cfg;
        return run_scenario(builtin_scenario("balanced"), cfg, 1, 15);
    }();
    return log;
}

std::vector<kernels::GazeTrace> traces(int copies)
{
    const auto one = kernels::gaze_traces(session());
    std::vector<kernels::GazeTrace> all;
    for (int k = 0; k < copies; ++k) {
        all.insert(all.end(), one.begin(), one.end());
    }
    return all;
}

void rescore(benchmark::State& state, bool parallel)
{
    const auto& log = session();
    for (auto _ : state) {
        auto s = parallel ? kernels::rescore_buckets(log.frames, 3, log.config.bucket_frames)
                          : kernels::rescore_buckets_serial(log.frames, 3, log.config.bucket_frames);
        benchmark::DoNotOptimize(s);
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(log.frames.size()));
}

void fixations(benchmark::State& state, bool parallel)
{
    const auto t = traces(static_cast<int>(state.range(0)));
    const FixationParams params;
    for (auto _ : state) {
        auto f = parallel ? kernels::detect_fixations_batch(t, params)
                          : kernels::detect_fixations_batch_serial(t, params);
        benchmark::DoNotOptimize(f);
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(t.size() * t.front().points.size()));
}

} // namespace

BENCHMARK_CAPTURE(rescore, serial, false)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(rescore, parallel, true)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(fixations, serial, false)->Arg(1)->Arg(8)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(fixations, parallel, true)->Arg(1)->Arg(8)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
