#include "rfpca/covariance.hpp"
#include "rfpca/metric_core.hpp"
#include "rfpca/rng.hpp"
#include "rfpca/simgen.hpp"
#include "rfpca/spectra.hpp"

#include <benchmark/benchmark.h>

#include <vector>

namespace {

using namespace rfpca;

std::vector<Point> random_laplacians(int count, int nodes, std::uint64_t seed) {
    Rng rng(seed, derive_stream("bench-laplacians", {}));
    std::vector<Point> pts;
    for (int i = 0; i < count; ++i) {
        Eigen::MatrixXd a = Eigen::MatrixXd::Zero(nodes, nodes);
        for (int u = 0; u < nodes; ++u)
            for (int v = u + 1; v < nodes; ++v) a(u, v) = a(v, u) = rng.exponential();
        pts.push_back(laplacian_from_adjacency(a));
    }
    return pts;
}

void BM_WeiszfeldLaplacian(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const auto pts = random_laplacians(n, 20, 1);
    const auto space = MetricSpace::laplacian(20);
    for (auto _ : state) benchmark::DoNotOptimize(frechet_median(space, pts));
    state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_WeiszfeldLaplacian)->Arg(50)->Arg(300)->Arg(1000);

void BM_WeiszfeldSphere(benchmark::State& state) {
    SphereSimConfig cfg;
    cfg.subjects = static_cast<int>(state.range(0));
    cfg.grid_points = 2;
    const auto s = gen_sphere_sample(cfg, 2);
    const auto xs = s.cross_section(0);
    for (auto _ : state) benchmark::DoNotOptimize(frechet_median(s.space(), xs));
}
BENCHMARK(BM_WeiszfeldSphere)->Arg(100)->Arg(1000);

void BM_WpuCovariance(benchmark::State& state) {
    const auto d = gen_score_trajectories(ScoreSimConfig{static_cast<int>(state.range(1)),
                                                         static_cast<int>(state.range(0)), {4.0, 2.0, 1.0}, 20.0},
                                          3);
    for (auto _ : state) {
        const auto pairs = pairwise_l2_distances(d);
        benchmark::DoNotOptimize(wpu_covariance(d, estimate_cutoff(pairs), &pairs));
    }
}
BENCHMARK(BM_WpuCovariance)->Args({100, 50})->Args({300, 50})->Args({600, 72})->Unit(benchmark::kMillisecond);

void BM_Eigendecompose(benchmark::State& state) {
    const int t = static_cast<int>(state.range(0));
    const auto d = gen_score_trajectories(ScoreSimConfig{t, 200, {4.0, 2.0, 1.0}, 20.0}, 4);
    const auto surface = classical_covariance(d);
    for (auto _ : state) benchmark::DoNotOptimize(eigendecompose(surface, 3));
}
BENCHMARK(BM_Eigendecompose)->Arg(30)->Arg(72)->Arg(200);

}  // namespace

BENCHMARK_MAIN();
