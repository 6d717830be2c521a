#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "t1moco/deformation.hpp"
#include "t1moco/losses.hpp"
#include "t1moco/metrics.hpp"
#include "t1moco/optimizer.hpp"
#include "t1moco/parallel.hpp"
#include "t1moco/phantom.hpp"
#include "t1moco/signal_model.hpp"

using namespace t1moco;

namespace {

PhantomScene scene(int size, double motion)
{
    PhantomConfig pc;
    pc.rows = pc.cols = size;
    pc.motion_min = pc.motion_max = motion;
    pc.deformation = motion > 0.0 ? 1.0 : 0.0;
    return generate_phantom(pc, 1);
}

VectorField random_velocity(int size, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n(0.0, 1.0);
    VectorField v(size, size);
    for (double& x : v.components()) x = n(rng);
    return gaussian_smooth(v, 4.0);
}

}  // namespace

static void BM_FitVoxel(benchmark::State& state)
{
    const std::vector<double> t = default_timestamps(11);
    std::vector<double> y;
    for (double ti : t) y.push_back(ir_signal(0.8, 1200.0, ti) + 0.003 * std::sin(ti));
    const FitConfig c;
    for (auto _ : state) benchmark::DoNotOptimize(fit_voxel(y, t, c));
}
BENCHMARK(BM_FitVoxel);

static void BM_FitMap(benchmark::State& state)
{
    set_thread_count(1);
    const PhantomScene s = scene(static_cast<int>(state.range(0)), 0.0);
    const FitConfig c;
    for (auto _ : state) benchmark::DoNotOptimize(fit_map(s.series, c));
    state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(0));
}
BENCHMARK(BM_FitMap)->Arg(64)->Arg(160)->Unit(benchmark::kMillisecond);

static void BM_IntegrateVelocity(benchmark::State& state)
{
    const int size = static_cast<int>(state.range(0));
    const VectorField v = random_velocity(size, 2);
    for (auto _ : state) benchmark::DoNotOptimize(integrate_velocity(v, 7));
}
BENCHMARK(BM_IntegrateVelocity)->Arg(64)->Arg(160)->Unit(benchmark::kMicrosecond);

static void BM_Warp(benchmark::State& state)
{
    const PhantomScene s = scene(160, 0.0);
    const DisplacementField u = integrate_velocity(random_velocity(160, 3), 7);
    for (auto _ : state) benchmark::DoNotOptimize(warp(s.series.frames[3], u));
}
BENCHMARK(BM_Warp)->Unit(benchmark::kMicrosecond);

static void BM_LossGradient(benchmark::State& state)
{
    set_thread_count(1);
    const int size = static_cast<int>(state.range(0));
    const PhantomScene s = scene(size, 3.0);
    VelocityFieldSet fields(s.series.size(), size, size, 0);
    for (int i = 1; i < s.series.size(); ++i) fields.field(i) = random_velocity(size, 10 + i);
    const FitConfig c;
    for (auto _ : state) benchmark::DoNotOptimize(total_loss_gradient(s.series, s.truth_maps, fields, &s.truth_masks, c));
}
BENCHMARK(BM_LossGradient)->Arg(64)->Arg(160)->Unit(benchmark::kMillisecond);

static void BM_Hausdorff(benchmark::State& state)
{
    const PhantomScene s = scene(160, 4.0);
    for (auto _ : state) {
        benchmark::DoNotOptimize(hausdorff(s.truth_masks.masks[0], s.truth_masks.masks[5], s.series.spacing));
    }
}
BENCHMARK(BM_Hausdorff)->Unit(benchmark::kMicrosecond);

static void BM_JointFitSmall(benchmark::State& state)
{
    set_thread_count(1);
    const PhantomScene s = scene(64, 4.0);
    FitConfig c;
    c.outer_iterations = 5;
    for (auto _ : state) benchmark::DoNotOptimize(joint_fit(s.series, c, &s.truth_masks));
}
BENCHMARK(BM_JointFitSmall)->Unit(benchmark::kMillisecond)->Iterations(2);

BENCHMARK_MAIN();
