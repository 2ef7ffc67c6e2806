// Serial reference vs OpenMP kernels. Arg 0 = serial, 1 = parallel.

#include "ringrc/kernels.hpp"

#include <benchmark/benchmark.h>

using namespace ringrc;

namespace {

Execution exec_of(const benchmark::State& state) {
    return state.range(0) ? Execution::parallel : Execution::serial;
}

void BM_Sweep(benchmark::State& state) {
    SweepSettings s;
    s.ring.dt = s.ring.round_trip_time / 16;
    s.preroll_time = 1000 * s.ring.round_trip_time;
    const BinarySeries series = gen_binary(2200, 1);
    std::vector<SweepPoint> points;
    for (int m = 1; m <= 9; ++m)
        for (double g : {0.25, 0.49, 1.0, 2.0}) points.push_back({(m + 0.25) * s.ring.round_trip_time, g});
    for (auto _ : state) benchmark::DoNotOptimize(sweep_capacities(s, series, points, exec_of(state)));
    state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(points.size()));
}
BENCHMARK(BM_Sweep)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();

void BM_Features(benchmark::State& state) {
    SynthOptions o;
    o.speakers = 2;
    const Corpus corpus = synth_corpus(o);
    for (auto _ : state) benchmark::DoNotOptimize(corpus_features(corpus, exec_of(state)));
    state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(corpus.size()));
}
BENCHMARK(BM_Features)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();

void BM_CrossValidate(benchmark::State& state) {
    SynthOptions o;
    o.speakers = 2;
    const Corpus corpus = synth_corpus(o);
    const auto inputs = corpus_inputs(corpus_features(corpus, Execution::parallel), make_mask(100, kFeatureCount, 11),
                                      NormalizationScope::unit, Execution::parallel);
    std::vector<int> labels;
    for (const auto& s : corpus) labels.push_back(s.label);
    const auto folds = make_folds(corpus, 10);
    for (auto _ : state) benchmark::DoNotOptimize(cross_validate(inputs, labels, folds, TrainOptions{}, exec_of(state)));
}
BENCHMARK(BM_CrossValidate)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();

}  // namespace

BENCHMARK_MAIN();
