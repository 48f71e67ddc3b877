#include <benchmark/benchmark.h>

#include <vector>

#include "noneguard/defense/profile.hpp"
#include "noneguard/defense/separation.hpp"
#include "noneguard/nn/network.hpp"
#include "noneguard/poison/dataset.hpp"
#include "noneguard/rng.hpp"

using namespace noneguard;

namespace {

Tensor random_tensor(Shape shape, std::uint64_t seed) {
    Tensor t(std::move(shape));
    Rng r(seed);
    for (auto& v : t.values()) v = r.uniform();
    return t;
}

poison::LabeledDataset random_images(std::size_t n) {
    poison::LabeledDataset d;
    d.class_count = 10;
    for (std::size_t i = 0; i < n; ++i) {
        d.inputs.push_back(random_tensor({1, 28, 28}, i));
        d.labels.push_back(static_cast<int>(i % 10));
    }
    d.poison_flags.assign(n, 0);
    return d;
}

void BM_ConvForward(benchmark::State& state) {
    const auto net = nn::init_network(nn::small_conv_spec(10), 1);
    const auto batch = random_tensor({static_cast<std::size_t>(state.range(0)), 1, 28, 28}, 2);
    for (auto _ : state) benchmark::DoNotOptimize(nn::forward(net, batch));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ConvForward)->Arg(1)->Arg(32);

void BM_ConvTrainStep(benchmark::State& state) {
    auto net = nn::init_network(nn::small_conv_spec(10), 1);
    const auto batch = random_tensor({32, 1, 28, 28}, 3);
    std::vector<int> labels(32);
    for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = static_cast<int>(i % 10);
    for (auto _ : state) benchmark::DoNotOptimize(nn::train_step(net, batch, labels, 0.01));
    state.SetItemsProcessed(state.iterations() * 32);
}
BENCHMARK(BM_ConvTrainStep);

void BM_MlpTrainStep(benchmark::State& state) {
    auto net = nn::init_network(nn::mlp_spec(2, 100, 5, 5), 1);
    const auto batch = random_tensor({32, 2}, 4);
    std::vector<int> labels(32);
    for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = static_cast<int>(i % 5);
    for (auto _ : state) benchmark::DoNotOptimize(nn::train_step(net, batch, labels, 0.01));
}
BENCHMARK(BM_MlpTrainStep);

void BM_JenksBreak(benchmark::State& state) {
    std::vector<double> v(static_cast<std::size_t>(state.range(0)));
    Rng r(5);
    for (auto& x : v) x = r.normal();
    for (auto _ : state) benchmark::DoNotOptimize(defense::jenks_break(v));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_JenksBreak)->RangeMultiplier(10)->Range(100, 100000)->Complexity(benchmark::oNLogN);

void BM_CollectProfile(benchmark::State& state) {
    const auto net = nn::init_network(nn::small_conv_spec(10), 1);
    const auto d = random_images(256);
    const auto threads = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(defense::collect_profile(net, d, threads));
    state.SetItemsProcessed(state.iterations() * 256);
}
BENCHMARK(BM_CollectProfile)->Arg(1)->Arg(4)->UseRealTime();

}  // namespace

BENCHMARK_MAIN();
