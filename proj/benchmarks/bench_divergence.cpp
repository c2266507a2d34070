#include <benchmark/benchmark.h>

#include <distlab/divergence.hpp>
#include <distlab/generator.hpp>
#include <distlab/gradients.hpp>
#include <distlab/grid.hpp>

using namespace distlab;

namespace {

GridDensity mixture_grid(int cells, double location) {
    GeneratorFamily f = GeneratorFamily::gaussian_mixture(1, 1, false, false);
    Eigen::VectorXd theta(1);
    theta << location;
    return mixture_on_grid(f, theta, {{-8.0, 9.0}}, {cells});
}

} // namespace

static void BM_Jsd(benchmark::State& state) {
    const int cells = static_cast<int>(state.range(0));
    GridDensity p = mixture_grid(cells, 0.0);
    GridDensity q = mixture_grid(cells, 1.0);
    for (auto _ : state) {
        benchmark::DoNotOptimize(jsd(p, q));
    }
}
BENCHMARK(BM_Jsd)->Range(1 << 8, 1 << 14);

static void BM_Smooth(benchmark::State& state) {
    const int cells = static_cast<int>(state.range(0));
    GridDensity p = mixture_grid(cells, 0.0);
    double sigma = 4.0 * p.cell_width(0);
    for (auto _ : state) {
        benchmark::DoNotOptimize(smooth(p, sigma));
    }
}
BENCHMARK(BM_Smooth)->Range(1 << 8, 1 << 12);

static void BM_GradJsd(benchmark::State& state) {
    const int cells = static_cast<int>(state.range(0));
    GridDensity target = mixture_grid(cells, 0.0);
    GeneratorFamily f = GeneratorFamily::gaussian_mixture(1, 1, false, false);
    Eigen::VectorXd theta(1);
    theta << 1.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(jsd_gradient(f, theta, target));
    }
}
BENCHMARK(BM_GradJsd)->Range(1 << 10, 1 << 12);

BENCHMARK_MAIN();
