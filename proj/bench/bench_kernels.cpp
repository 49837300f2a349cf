// Serial reference vs OpenMP chunked kernels. The two must agree bitwise
// (tests enforce it); these benchmarks measure what the parallel path buys.

#include <benchmark/benchmark.h>

#include <cmath>

#include "funcdist/neural.hpp"
#include "funcdist/parallel.hpp"
#include "funcdist/rng.hpp"

namespace {

using namespace funcdist;

std::vector<double> make_values(std::size_t n) {
    Rng rng(12345);
    std::vector<double> v(n);
    for (auto& x : v) x = rng.normal();
    return v;
}

struct NetFixture {
    neural::WeightSet ws;
    Eigen::MatrixXd X;
    Eigen::VectorXd y;

    explicit NetFixture(Eigen::Index n) {
        ws = neural::init_network(neural::Architecture::default_arch(), 7);
        Rng rng(99);
        X.resize(n, 8);
        y.resize(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = 0; j < 8; ++j) X(i, j) = rng.normal();
            y(i) = rng.normal();
        }
    }
};

void BM_reduce_serial(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto v = make_values(n);
    for (auto _ : state) {
        double s = transform_reduce_serial(n, [&](std::size_t i) { return v[i] * v[i]; });
        benchmark::DoNotOptimize(s);
    }
    state.SetItemsProcessed(static_cast<int64_t>(state.iterations()) *
                            static_cast<int64_t>(n));
}

void BM_reduce_omp(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const int workers = static_cast<int>(state.range(1));
    const auto v = make_values(n);
    for (auto _ : state) {
        double s = transform_reduce(n, workers, [&](std::size_t i) { return v[i] * v[i]; });
        benchmark::DoNotOptimize(s);
    }
    state.SetItemsProcessed(static_cast<int64_t>(state.iterations()) *
                            static_cast<int64_t>(n));
}

void BM_rmse_serial(benchmark::State& state) {
    NetFixture f(state.range(0));
    for (auto _ : state) {
        double r = neural::rmse(f.ws, f.X, f.y, 1);
        benchmark::DoNotOptimize(r);
    }
}

void BM_rmse_omp(benchmark::State& state) {
    NetFixture f(state.range(0));
    const int workers = static_cast<int>(state.range(1));
    for (auto _ : state) {
        double r = neural::rmse(f.ws, f.X, f.y, workers);
        benchmark::DoNotOptimize(r);
    }
}

void BM_train_last_layer(benchmark::State& state) {
    NetFixture f(state.range(0));
    neural::TrainConfig cfg;
    cfg.seed = 5;
    cfg.epochs = 50;
    cfg.patience = 50;
    for (auto _ : state) {
        auto res = neural::train_last_layer(f.ws, f.X, f.y, cfg);
        benchmark::DoNotOptimize(res.rmse);
    }
}

}  // namespace

BENCHMARK(BM_reduce_serial)->Arg(1 << 16)->Arg(1 << 22);
BENCHMARK(BM_reduce_omp)
    ->Args({1 << 16, 2})
    ->Args({1 << 16, 8})
    ->Args({1 << 22, 2})
    ->Args({1 << 22, 8});
BENCHMARK(BM_rmse_serial)->Arg(1 << 12)->Arg(1 << 16);
BENCHMARK(BM_rmse_omp)->Args({1 << 12, 4})->Args({1 << 16, 4})->Args({1 << 16, 8});
BENCHMARK(BM_train_last_layer)->Arg(1 << 12);

BENCHMARK_MAIN();
