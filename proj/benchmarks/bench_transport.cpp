#include <benchmark/benchmark.h>

#include <distlab/empirical.hpp>
#include <distlab/rng.hpp>
#include <distlab/transport.hpp>

using namespace distlab;

namespace {

EmpiricalDistribution random_cloud(int n, int dim, std::uint64_t seed) {
    Rng rng(seed);
    Eigen::MatrixXd pts(n, dim);
    for (int i = 0; i < n; ++i)
        for (int c = 0; c < dim; ++c) pts(i, c) = rng.normal();
    return EmpiricalDistribution::uniform(std::move(pts));
}

} // namespace

static void BM_SolveExact(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    EmpiricalDistribution a = random_cloud(n, 2, 1);
    EmpiricalDistribution b = random_cloud(n, 2, 2);
    Eigen::MatrixXd cost = cost_matrix(a, b, GroundNorm::Euclidean, 2);
    for (auto _ : state) {
        benchmark::DoNotOptimize(solve_exact(a, b, cost).value);
    }
    state.SetComplexityN(n);
}
BENCHMARK(BM_SolveExact)->RangeMultiplier(2)->Range(32, 1024)->Complexity();

static void BM_Sinkhorn(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    EmpiricalDistribution a = random_cloud(n, 2, 1);
    EmpiricalDistribution b = random_cloud(n, 2, 2);
    Eigen::MatrixXd cost = cost_matrix(a, b, GroundNorm::Euclidean, 2);
    SinkhornOptions opts{0.1 * cost.mean(), 2000, 1e-8};
    for (auto _ : state) {
        benchmark::DoNotOptimize(solve_sinkhorn(a, b, cost, opts).value);
    }
    state.SetComplexityN(n);
}
BENCHMARK(BM_Sinkhorn)->RangeMultiplier(2)->Range(32, 256)->Complexity();

static void BM_CostMatrix(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    EmpiricalDistribution a = random_cloud(n, 3, 1);
    EmpiricalDistribution b = random_cloud(n, 3, 2);
    for (auto _ : state) {
        benchmark::DoNotOptimize(cost_matrix(a, b, GroundNorm::Euclidean, 2));
    }
}
BENCHMARK(BM_CostMatrix)->Range(64, 1024);
