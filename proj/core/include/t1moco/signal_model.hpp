#pragma once

#include <optional>
#include <span>
#include <vector>

#include "t1moco/grid.hpp"
#include "t1moco/series.hpp"

namespace t1moco {

/// Signed inversion-recovery signal m0 * (1 - 2 exp(-t / t1)).
/// Throws NonPositiveT1 when t1 <= 0.
double ir_signal(double m0, double t1_ms, double t_ms);

struct SignalJacobian {
    double d_m0 = 0.0;
    double d_t1 = 0.0;
};

/// Partial derivatives of ir_signal with respect to m0 and t1.
SignalJacobian ir_signal_jacobian(double m0, double t1_ms, double t_ms);

struct VoxelFit {
    double t1 = 0.0;
    double m0 = 0.0;
    double sse = 0.0;
    double r2 = 0.0;
    bool converged = false;
    bool clamped = false;  ///< t1 finished on a range bound
};

struct FitStart {
    double t1 = 0.0;
    double m0 = 0.0;
};

/// Least-squares (t1, m0) for one voxel curve.
///
/// Multi-start damped Gauss-Newton: each start t1 comes from a log-spaced
/// grid over [t1_min, t1_max] (plus `warm_start` when given), m0 is
/// initialised by the closed-form linear solve for that t1, and the pair is
/// refined with Levenberg damping (x10 on rejection, /10 on acceptance).
/// The best converged start wins. A flat curve returns m0 fitted at
/// t1 = t1_min with converged = false. In magnitude mode every prefix of
/// the samples is tried with its sign flipped and the lowest residual kept.
VoxelFit fit_voxel(std::span<const double> values, std::span<const double> timestamps_ms, const FitConfig& config,
                   std::optional<FitStart> warm_start = std::nullopt);

/// The log-spaced start grid used by fit_voxel.
std::vector<double> t1_start_grid(const FitConfig& config);

struct MapFit {
    ParametricMaps maps;
    Image r2;
    Image sse;
    Mask converged;
};

/// Voxelwise fit_voxel over `roi` (all voxels when null). Voxels outside
/// the roi hold t1 = m0 = 0 and r2 = 0. Never throws for per-voxel issues.
MapFit fit_map(const ImageSeries& series, const FitConfig& config, const Mask* roi = nullptr,
               const ParametricMaps* warm_start = nullptr);

/// Model images S_i for every timestamp.
std::vector<Image> synthesize(const ParametricMaps& maps, std::span<const double> timestamps_ms);

/// 1 - SS_res / SS_tot. Throws ConstantObserved when SS_tot is zero.
double r_squared(std::span<const double> observed, std::span<const double> predicted);

}  // namespace t1moco
