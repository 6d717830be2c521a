#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "t1moco/error.hpp"
#include "t1moco/parallel.hpp"
#include "t1moco/phantom.hpp"
#include "t1moco/signal_model.hpp"

using namespace t1moco;

namespace {

std::vector<double> curve(double m0, double t1, const std::vector<double>& t)
{
    std::vector<double> y;
    for (double ti : t) y.push_back(ir_signal(m0, t1, ti));
    return y;
}

// Profile-likelihood scan: for each t1 on a fine log grid the best m0 is
// linear, so the global minimum over the range is bracketed by the scan.
double brute_force_min_sse(const std::vector<double>& y, const std::vector<double>& t, const FitConfig& c)
{
    double best = INFINITY;
    const int steps = 20000;
    for (int k = 0; k <= steps; ++k) {
        const double t1 = c.t1_min_ms * std::pow(c.t1_max_ms / c.t1_min_ms, static_cast<double>(k) / steps);
        double num = 0, den = 0;
        for (std::size_t i = 0; i < y.size(); ++i) {
            const double b = 1 - 2 * std::exp(-t[i] / t1);
            num += b * y[i];
            den += b * b;
        }
        const double m0 = num / den;
        double sse = 0;
        for (std::size_t i = 0; i < y.size(); ++i) {
            const double r = m0 * (1 - 2 * std::exp(-t[i] / t1)) - y[i];
            sse += r * r;
        }
        best = std::min(best, sse);
    }
    return best;
}

}  // namespace

TEST(IrSignal, NearZeroTimeIsMinusM0)
{
    EXPECT_NEAR(ir_signal(1.0, 1000.0, 1e-9), -1.0, 1e-11);
    EXPECT_EQ(ir_signal(1.0, 1000.0, 0.0), -1.0);
}

TEST(IrSignal, ZeroCrossingAtT1Ln2)
{
    EXPECT_NEAR(ir_signal(1.0, 1000.0, 1000.0 * std::numbers::ln2), 0.0, 1e-15);
}

TEST(IrSignal, OneT1MatchesHighPrecisionValue)
{
    // 1 - 2/e to 20 digits.
    const long double expected = 0.26424111765711535680L;
    EXPECT_NEAR(ir_signal(1.0, 1000.0, 1000.0), static_cast<double>(expected), 2e-16);
}

TEST(IrSignal, NonPositiveT1Throws)
{
    EXPECT_THROW(ir_signal(1.0, 0.0, 10.0), Error);
    EXPECT_THROW(ir_signal_jacobian(1.0, -5.0, 10.0), Error);
    try {
        ir_signal(1.0, -1.0, 1.0);
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::NonPositiveT1);
    }
}

TEST(IrSignal, StrictlyIncreasingInTime)
{
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> m0(0.01, 2.0), t1(50.0, 5000.0), u(0.0, 5.0);
    for (int k = 0; k < 2000; ++k) {
        const double a = m0(rng), b = t1(rng);
        // Within five T1 and at least 1e-3 T1 apart the increase is far above rounding.
        double x = u(rng) * b, y = u(rng) * b;
        if (std::abs(x - y) < 1e-3 * b) continue;
        if (x > y) std::swap(x, y);
        EXPECT_LT(ir_signal(a, b, x), ir_signal(a, b, y));
    }
}

TEST(IrSignalJacobian, AtTimeZero)
{
    const SignalJacobian j = ir_signal_jacobian(0.7, 900.0, 0.0);
    EXPECT_EQ(j.d_m0, -1.0);
    EXPECT_EQ(j.d_t1, 0.0);
}

TEST(IrSignalJacobian, ZeroCrossingHasZeroM0Derivative)
{
    EXPECT_NEAR(ir_signal_jacobian(1.0, 1234.0, 1234.0 * std::numbers::ln2).d_m0, 0.0, 1e-15);
}

TEST(IrSignalJacobian, MatchesCentralDifferences)
{
    std::mt19937_64 rng(22);
    std::uniform_real_distribution<double> m0(0.05, 2.0), t1(50.0, 5000.0), t(1.0, 6000.0);
    for (int k = 0; k < 2000; ++k) {
        const double a = m0(rng), b = t1(rng), x = t(rng);
        const SignalJacobian j = ir_signal_jacobian(a, b, x);
        const double hm = 1e-4 * a, ht = 1e-4 * b;
        const double fd_m0 = (ir_signal(a + hm, b, x) - ir_signal(a - hm, b, x)) / (2 * hm);
        const double fd_t1 = (ir_signal(a, b + ht, x) - ir_signal(a, b - ht, x)) / (2 * ht);
        const double floor = 1e-12;
        EXPECT_LT(std::abs(j.d_m0 - fd_m0) / std::max({std::abs(j.d_m0), std::abs(fd_m0), floor}), 1e-6);
        if (std::abs(j.d_t1) > 1e-9) {
            EXPECT_LT(std::abs(j.d_t1 - fd_t1) / std::max(std::abs(j.d_t1), std::abs(fd_t1)), 1e-5);
        }
    }
}

TEST(FitVoxel, RecoversNoiselessParameters)
{
    const auto t = default_timestamps(11);
    const VoxelFit f = fit_voxel(curve(0.8, 1200.0, t), t, FitConfig{});
    EXPECT_NEAR(f.m0, 0.8, 0.8e-3);
    EXPECT_NEAR(f.t1, 1200.0, 1.2);
    EXPECT_TRUE(f.converged);
    EXPECT_GE(f.sse, 0.0);
}

TEST(FitVoxel, AllZeroValues)
{
    const auto t = default_timestamps(11);
    const std::vector<double> zeros(11, 0.0);
    const VoxelFit f = fit_voxel(zeros, t, FitConfig{});
    EXPECT_EQ(f.m0, 0.0);
    EXPECT_EQ(f.sse, 0.0);
    EXPECT_FALSE(f.converged);
}

TEST(FitVoxel, FlatCurveIsFlaggedAtBound)
{
    const auto t = default_timestamps(11);
    const std::vector<double> flat(11, 0.4);
    const FitConfig c;
    const VoxelFit f = fit_voxel(flat, t, c);
    EXPECT_EQ(f.t1, c.t1_min_ms);
    EXPECT_FALSE(f.converged);
    EXPECT_TRUE(f.clamped);
    // m0 is the least-squares amplitude at the bound.
    double num = 0, den = 0;
    for (double ti : t) {
        const double b = 1 - 2 * std::exp(-ti / c.t1_min_ms);
        num += b * 0.4;
        den += b * b;
    }
    EXPECT_NEAR(f.m0, num / den, 1e-15);
}

TEST(FitVoxel, ShortT1HasNearPerfectR2)
{
    const auto t = default_timestamps(11);
    const VoxelFit f = fit_voxel(curve(0.5, 300.0, t), t, FitConfig{});
    EXPECT_GE(f.r2, 0.9999);
}

TEST(FitVoxel, RejectsShortOrMismatchedInput)
{
    const std::vector<double> y{0.1, 0.2}, t{100, 200};
    EXPECT_THROW(fit_voxel(y, t, FitConfig{}), Error);
    const std::vector<double> y3{0.1, 0.2, 0.3};
    EXPECT_THROW(fit_voxel(y3, t, FitConfig{}), Error);
}

TEST(FitVoxel, PropertyScaleEquivariance)
{
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> m0(0.2, 1.0), t1(200.0, 2500.0), alpha(0.1, 10.0);
    std::normal_distribution<double> noise(0.0, 0.01);
    const auto t = default_timestamps(11);
    for (int k = 0; k < 100; ++k) {
        auto y = curve(m0(rng), t1(rng), t);
        for (double& v : y) v += noise(rng);
        const double a = alpha(rng);
        std::vector<double> scaled;
        for (double v : y) scaled.push_back(a * v);
        const VoxelFit f = fit_voxel(y, t, FitConfig{});
        const VoxelFit g = fit_voxel(scaled, t, FitConfig{});
        EXPECT_NEAR(g.t1, f.t1, 1e-5 * f.t1);
        EXPECT_NEAR(g.m0, a * f.m0, 1e-5 * std::abs(a * f.m0));
    }
}

TEST(FitVoxel, PropertyNoWorseThanBruteForceScan)
{
    std::mt19937_64 rng(24);
    std::uniform_real_distribution<double> m0(0.1, 1.0), t1(60.0, 4500.0);
    std::normal_distribution<double> noise(0.0, 0.03);
    const auto t = default_timestamps(11);
    const FitConfig c;
    for (int k = 0; k < 60; ++k) {
        auto y = curve(m0(rng), t1(rng), t);
        for (double& v : y) v += noise(rng);
        const VoxelFit f = fit_voxel(y, t, c);
        EXPECT_LE(f.sse, brute_force_min_sse(y, t, c) * (1 + 1e-9) + 1e-15);
        EXPECT_GE(f.t1, c.t1_min_ms);
        EXPECT_LE(f.t1, c.t1_max_ms);
        EXPECT_LE(f.r2, 1.0);
        // sse is the residual at the returned parameters.
        double sse = 0;
        for (std::size_t i = 0; i < t.size(); ++i) {
            const double r = ir_signal(f.m0, f.t1, t[i]) - y[i];
            sse += r * r;
        }
        EXPECT_NEAR(f.sse, sse, 1e-14);
    }
}

TEST(FitVoxel, WarmStartNeverHurts)
{
    std::mt19937_64 rng(25);
    std::normal_distribution<double> noise(0.0, 0.02);
    const auto t = default_timestamps(11);
    for (int k = 0; k < 30; ++k) {
        auto y = curve(0.7, 900.0 + 40 * k, t);
        for (double& v : y) v += noise(rng);
        const VoxelFit cold = fit_voxel(y, t, FitConfig{});
        const VoxelFit warm = fit_voxel(y, t, FitConfig{}, FitStart{4000.0, -0.3});
        EXPECT_LE(warm.sse, cold.sse);
    }
}

TEST(FitVoxel, MagnitudeModeRestoresPolarity)
{
    const auto t = default_timestamps(11);
    auto y = curve(0.9, 1100.0, t);
    for (double& v : y) v = std::abs(v);
    FitConfig c;
    c.magnitude_mode = true;
    const VoxelFit f = fit_voxel(y, t, c);
    EXPECT_NEAR(f.t1, 1100.0, 1.1);
    EXPECT_NEAR(f.m0, 0.9, 1e-3);
}

TEST(StartGrid, LogSpacedOverRange)
{
    const FitConfig c;
    const auto g = t1_start_grid(c);
    ASSERT_EQ(g.size(), 8u);
    EXPECT_DOUBLE_EQ(g.front(), 50.0);
    EXPECT_EQ(g.back(), 5000.0);
    for (std::size_t k = 2; k < g.size(); ++k) {
        EXPECT_NEAR(g[k] / g[k - 1], g[1] / g[0], 1e-12);
    }
}

TEST(RSquared, PerfectNullAndHandComputed)
{
    const std::vector<double> obs{0, 1, 2};
    EXPECT_EQ(r_squared(obs, obs), 1.0);
    EXPECT_EQ(r_squared(obs, std::vector<double>{1, 1, 1}), 0.0);
    EXPECT_EQ(r_squared(obs, std::vector<double>{0, 1, 3}), 0.5);
}

TEST(RSquared, ConstantObservedThrows)
{
    try {
        r_squared(std::vector<double>{2, 2, 2}, std::vector<double>{1, 2, 3});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::ConstantObserved);
    }
}

TEST(FitMap, NoiselessPhantomWithinHalfPercent)
{
    PhantomConfig pc;
    pc.rows = pc.cols = 64;
    pc.motion_min = pc.motion_max = 0.0;
    pc.deformation = 0.0;
    pc.snr = 0.0;
    const PhantomScene scene = generate_phantom(pc, 4);
    const MapFit fit = fit_map(scene.series, FitConfig{});
    double sq = 0;
    long n = 0;
    for (std::size_t p = 0; p < fit.maps.t1.size(); ++p) {
        if (!scene.tissue[p]) continue;
        const double rel = (fit.maps.t1[p] - scene.truth_maps.t1[p]) / scene.truth_maps.t1[p];
        sq += rel * rel;
        ++n;
    }
    EXPECT_LT(std::sqrt(sq / n), 0.005);
}

TEST(FitMap, EmptyRoiGivesSentinels)
{
    PhantomConfig pc;
    pc.rows = pc.cols = 64;
    const PhantomScene scene = generate_phantom(pc, 5);
    const Mask empty(64, 64);
    const MapFit fit = fit_map(scene.series, FitConfig{}, &empty);
    for (std::size_t p = 0; p < fit.maps.t1.size(); ++p) {
        EXPECT_EQ(fit.maps.t1[p], 0.0);
        EXPECT_EQ(fit.maps.m0[p], 0.0);
    }
    for (const Image& s : synthesize(fit.maps, scene.series.timestamps_ms)) {
        for (double v : s.values()) EXPECT_EQ(v, 0.0);
    }
}

TEST(FitMap, DeterministicAcrossRunsAndThreads)
{
    PhantomConfig pc;
    pc.rows = pc.cols = 64;
    const PhantomScene scene = generate_phantom(pc, 6);
    const int saved = thread_count();
    set_thread_count(1);
    const MapFit a = fit_map(scene.series, FitConfig{});
    set_thread_count(3);
    const MapFit b = fit_map(scene.series, FitConfig{});
    const MapFit c = fit_map(scene.series, FitConfig{});
    set_thread_count(saved);
    EXPECT_EQ(a.maps, b.maps);
    EXPECT_EQ(b.maps, c.maps);
    EXPECT_EQ(a.r2, b.r2);
}

TEST(Synthesize, MatchesForwardModel)
{
    ParametricMaps maps{Image(2, 2, 1000.0), Image(2, 2, 0.5)};
    maps.t1(1, 1) = 0.0;
    const std::vector<double> t{100, 700, 2000};
    const auto s = synthesize(maps, t);
    ASSERT_EQ(s.size(), 3u);
    for (int i = 0; i < 3; ++i) {
        EXPECT_EQ(s[i](0, 0), ir_signal(0.5, 1000.0, t[i]));
        EXPECT_EQ(s[i](1, 1), 0.0);
    }
}
