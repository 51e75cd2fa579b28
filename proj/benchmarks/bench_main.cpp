#include <benchmark/benchmark.h>

#include <random>

#include "eegdec/decode.hpp"

using namespace eegdec;

namespace {

void BM_RankGenerators(benchmark::State &state) {
    const auto n0 = static_cast<std::size_t>(state.range(0));
    EEGMatrices m = build_eeg(gen_repetition(n0, 3));
    for (auto _ : state) benchmark::DoNotOptimize(rank(m.G));
    state.SetLabel(std::to_string(m.G.rows()) + "x" + std::to_string(m.G.cols()));
}
BENCHMARK(BM_RankGenerators)->Arg(3)->Arg(5)->Arg(7);

void BM_PartitionFunction(benchmark::State &state) {
    const auto spins = static_cast<std::size_t>(state.range(0));
    std::mt19937_64 rng(1);
    BinaryMatrix theta(spins, 2 * spins);
    std::vector<double> K;
    std::uniform_real_distribution<double> kd(-1.0, 1.0);
    for (std::size_t b = 0; b < 2 * spins; ++b) {
        theta.set(b % spins, b);
        theta.set((b * 7 + 3) % spins, b);
        K.push_back(kd(rng));
    }
    EnumerationOptions opt;
    opt.workers = 1;
    BitVector signs(2 * spins);
    for (auto _ : state) benchmark::DoNotOptimize(log_partition_function(theta, K, signs, opt));
}
BENCHMARK(BM_PartitionFunction)->Arg(12)->Arg(16)->Arg(20);

void BM_StarPolygon(benchmark::State &state) {
    const auto w = static_cast<std::size_t>(state.range(0));
    BinaryMatrix theta(1, w);
    for (std::size_t b = 0; b < w; ++b) theta.set(0, b);
    IsingSystem s{theta, std::vector<double>(w, 0.3), 0.0, BinaryMatrix::identity(w)};
    ReducedSystem base = ReducedSystem::from_ising(s, 1);
    for (auto _ : state) benchmark::DoNotOptimize(reduce_spin(base, 0, true).bond_count());
}
BENCHMARK(BM_StarPolygon)->DenseRange(2, 12, 2);

void BM_FullReduce(benchmark::State &state) {
    const auto n0 = static_cast<std::size_t>(state.range(0));
    const auto ncyc = static_cast<std::size_t>(state.range(1));
    EEGMatrices m = build_eeg(gen_repetition(n0, ncyc));
    ErrorModel model = iid_xz(m.params.N, 0.05, 0.05);
    for (auto _ : state) benchmark::DoNotOptimize(reduce_circuit(m, model, Reduction::full).bond_count());
}
BENCHMARK(BM_FullReduce)->Args({3, 1})->Args({5, 2})->Args({7, 3})->Unit(benchmark::kMillisecond);

void BM_Decode(benchmark::State &state) {
    EEGMatrices m = build_eeg(gen_repetition(3, 3));
    ErrorModel model = depolarizing(m.params.N, 0.02);
    const auto red = static_cast<Reduction>(state.range(0));
    Decoder d(m, model, DecoderSpec{DecoderKind::ml, red});
    std::mt19937_64 rng(2);
    std::uniform_int_distribution<std::uint64_t> syn(0, (std::uint64_t{1} << m.params.na) - 1);
    for (auto _ : state) benchmark::DoNotOptimize(d.decode(BitVector::from_uint(m.params.na, syn(rng))).chosen());
    state.SetLabel(std::string(to_string(red)));
}
BENCHMARK(BM_Decode)
    ->Arg(static_cast<int>(Reduction::full))
    ->Arg(static_cast<int>(Reduction::complete))
    ->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
