#include <benchmark/benchmark.h>

#include <map>

#include "rlink/comparison.hpp"
#include "rlink/fs_mixture.hpp"
#include "rlink/synth.hpp"

using namespace rlink;

namespace {

const SyntheticPair& files(std::size_t n) {
    static std::map<std::size_t, SyntheticPair> cache;
    auto it = cache.find(n);
    if (it == cache.end()) {
        GeneratorConfig cfg;
        cfg.records_per_file = n;
        cfg.overlap = 0.5;
        cfg.erroneous_fields = 2;
        cfg.seed = 1;
        it = cache.emplace(n, generate_pair(cfg)).first;
    }
    return it->second;
}

void BM_CompareParallel(benchmark::State& state) {
    const auto& s = files(static_cast<std::size_t>(state.range(0)));
    const auto specs = synthetic_comparators();
    for (auto _ : state) benchmark::DoNotOptimize(build_comparison_data(s.file1, s.file2, specs));
    state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(0));
}

void BM_CompareSerial(benchmark::State& state) {
    const auto& s = files(static_cast<std::size_t>(state.range(0)));
    const auto specs = synthetic_comparators();
    for (auto _ : state) benchmark::DoNotOptimize(build_comparison_data_serial(s.file1, s.file2, specs));
    state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(0));
}

template <bool Parallel>
void BM_PairWeights(benchmark::State& state) {
    const auto& s = files(static_cast<std::size_t>(state.range(0)));
    const auto data = build_comparison_data(s.file1, s.file2, synthetic_comparators());
    const auto phi = em_fit(data).phi;
    for (auto _ : state) {
        if constexpr (Parallel) benchmark::DoNotOptimize(pair_weights(phi, data));
        else benchmark::DoNotOptimize(pair_weights_serial(phi, data));
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(data.num_pairs()));
}

}  // namespace

BENCHMARK(BM_CompareParallel)->Arg(200)->Arg(500)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CompareSerial)->Arg(200)->Arg(500)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PairWeights<true>)->Name("BM_PairWeightsParallel")->Arg(500)->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PairWeights<false>)->Name("BM_PairWeightsSerial")->Arg(500)->Arg(1000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
