#include <benchmark/benchmark.h>

#include <random>

#include "kpath/bovw.hpp"
#include "kpath/iksvm.hpp"
#include "kpath/lbp.hpp"
#include "kpath/metrics.hpp"
#include "kpath/parallel.hpp"

using namespace kpath;

namespace {

GrayImage random_image(int w, int h, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> d(0, 255);
    GrayImage img(w, h);
    for (auto& v : img.pixels()) v = static_cast<std::uint8_t>(d(rng));
    return img;
}

std::vector<FeatureVector> random_hists(std::size_t n, std::size_t dim, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<FeatureVector> X(n, FeatureVector(dim));
    for (auto& x : X) {
        double s = 0.0;
        for (double& v : x) s += (v = u(rng));
        for (double& v : x) v /= s;
    }
    return X;
}

}  // namespace

// Whole-image histogram at the Path960 image size.
static void BM_LbpHistogram(benchmark::State& state) {
    const auto img = random_image(308, 168, 1);
    const LbpConfig cfg{static_cast<int>(state.range(0)), static_cast<int>(state.range(1)), true, true};
    for (auto _ : state) benchmark::DoNotOptimize(lbp_histogram(img, cfg));
    state.SetItemsProcessed(state.iterations() * (308 - 2 * cfg.r) * (168 - 2 * cfg.r));
}
BENCHMARK(BM_LbpHistogram)->Args({8, 1})->Args({16, 2})->Args({24, 4})->Unit(benchmark::kMillisecond);

static void BM_Distance(benchmark::State& state) {
    const auto X = random_hists(2, 555, 2);
    const auto m = static_cast<MetricKind>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(distance(m, X[0], X[1]));
}
BENCHMARK(BM_Distance)
    ->Arg(static_cast<int>(MetricKind::L1))
    ->Arg(static_cast<int>(MetricKind::L2))
    ->Arg(static_cast<int>(MetricKind::Chi2));

// The LOO inner loop: all pairs of 960 uniform p=24 histograms.
static void BM_DistanceMatrix960(benchmark::State& state) {
    set_thread_count(1);
    const auto X = random_hists(960, 555, 3);
    for (auto _ : state) benchmark::DoNotOptimize(distance_matrix(X, X, MetricKind::Chi2));
    set_thread_count(0);
}
BENCHMARK(BM_DistanceMatrix960)->Unit(benchmark::kMillisecond);

static void BM_HikGram(benchmark::State& state) {
    const auto X = random_hists(static_cast<std::size_t>(state.range(0)), 800, 4);
    for (auto _ : state) benchmark::DoNotOptimize(hik_gram(X));
}
BENCHMARK(BM_HikGram)->Arg(100)->Arg(400)->Unit(benchmark::kMillisecond);

// One binary IKSVM problem: two classes of 46 training images each.
static void BM_SmoBinary(benchmark::State& state) {
    const auto X = random_hists(92, 800, 5);
    std::vector<int> y(X.size());
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = i < 46 ? 1 : -1;
    const auto K = hik_gram(X);
    for (auto _ : state) benchmark::DoNotOptimize(solve_dual(K, y, static_cast<double>(state.range(0))));
}
BENCHMARK(BM_SmoBinary)->Arg(1)->Arg(100)->Unit(benchmark::kMicrosecond);

static void BM_EncodeImage(benchmark::State& state) {
    const auto img = random_image(308, 168, 6);
    Codebook cb;
    cb.centroids = random_hists(static_cast<std::size_t>(state.range(0)), 59, 7);
    for (auto _ : state) benchmark::DoNotOptimize(encode(img, cb, GridStrategy{16, 8}, 256));
}
BENCHMARK(BM_EncodeImage)->Arg(800)->Arg(1200)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
