#include "t1moco/signal_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "t1moco/error.hpp"
#include "t1moco/parallel.hpp"

namespace t1moco {

namespace {

void require_positive_t1(double t1)
{
    if (!(t1 > 0.0)) {
        throw Error(ErrorCode::NonPositiveT1, "t1 must be positive, got " + std::to_string(t1));
    }
}

double sum_squared_residual(std::span<const double> y, std::span<const double> t, double m0, double t1)
{
    double sse = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double r = m0 * (1.0 - 2.0 * std::exp(-t[i] / t1)) - y[i];
        sse += r * r;
    }
    return sse;
}

// Optimal m0 for a fixed t1 (the model is linear in m0).
double linear_m0(std::span<const double> y, std::span<const double> t, double t1)
{
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double b = 1.0 - 2.0 * std::exp(-t[i] / t1);
        num += b * y[i];
        den += b * b;
    }
    return den > 0.0 ? num / den : 0.0;
}

struct LocalResult {
    double m0;
    double t1;
    double sse;
    bool converged;
};

LocalResult levenberg(std::span<const double> y, std::span<const double> t, double m0, double t1,
                      const FitConfig& config)
{
    double sse = sum_squared_residual(y, t, m0, t1);
    double mu = 1e-3;
    bool converged = false;
    for (int iter = 0; iter < config.max_fit_iterations; ++iter) {
        // Normal equations of the 2-parameter problem.
        double a00 = 0.0, a01 = 0.0, a11 = 0.0, g0 = 0.0, g1 = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i) {
            const double e = std::exp(-t[i] / t1);
            const double j0 = 1.0 - 2.0 * e;
            const double j1 = -2.0 * m0 * (t[i] / (t1 * t1)) * e;
            const double r = m0 * j0 - y[i];
            a00 += j0 * j0;
            a01 += j0 * j1;
            a11 += j1 * j1;
            g0 += j0 * r;
            g1 += j1 * r;
        }
        if (std::abs(g0) + std::abs(g1) == 0.0 || sse == 0.0) {
            converged = true;
            break;
        }
        bool accepted = false;
        while (mu < 1e12) {
            const double d00 = a00 * (1.0 + mu) + 1e-300;
            const double d11 = a11 * (1.0 + mu) + 1e-300;
            const double det = d00 * d11 - a01 * a01;
            if (!(det > 0.0)) {
                mu *= 10.0;
                continue;
            }
            const double step_m0 = -(d11 * g0 - a01 * g1) / det;
            const double step_t1 = -(d00 * g1 - a01 * g0) / det;
            const double cand_m0 = m0 + step_m0;
            const double cand_t1 = std::clamp(t1 + step_t1, config.t1_min_ms, config.t1_max_ms);
            const double cand_sse = sum_squared_residual(y, t, cand_m0, cand_t1);
            if (cand_sse < sse) {
                const double gain = sse - cand_sse;
                const bool small_step = std::abs(cand_m0 - m0) <= 1e-12 * (std::abs(m0) + 1e-12) &&
                                        std::abs(cand_t1 - t1) <= 1e-10 * t1;
                m0 = cand_m0;
                t1 = cand_t1;
                sse = cand_sse;
                mu = std::max(mu / 10.0, 1e-12);
                accepted = true;
                if (gain <= 1e-14 * sse || small_step) {
                    converged = true;
                }
                break;
            }
            mu *= 10.0;
        }
        if (!accepted) {
            // No descent direction left at machine precision: a stationary point.
            converged = true;
            break;
        }
        if (converged) {
            break;
        }
    }
    return {m0, t1, sse, converged};
}

VoxelFit fit_signed(std::span<const double> y, std::span<const double> t, const FitConfig& config,
                    std::optional<FitStart> warm_start)
{
    const auto [lo_it, hi_it] = std::minmax_element(y.begin(), y.end());
    const double scale = std::max(std::abs(*lo_it), std::abs(*hi_it));
    double mean = 0.0;
    for (double v : y) mean += v;
    mean /= static_cast<double>(y.size());
    double sst = 0.0;
    for (double v : y) sst += (v - mean) * (v - mean);

    VoxelFit out;
    if (*hi_it - *lo_it <= 1e-12 * scale || scale == 0.0) {
        out.t1 = config.t1_min_ms;
        out.m0 = linear_m0(y, t, out.t1);
        out.sse = sum_squared_residual(y, t, out.m0, out.t1);
        out.r2 = 0.0;
        out.converged = false;
        out.clamped = true;
        return out;
    }

    LocalResult best{0.0, config.t1_min_ms, std::numeric_limits<double>::infinity(), false};
    auto consider = [&](const LocalResult& r) {
        if (r.sse < best.sse) {
            best = r;
        }
    };
    if (warm_start && warm_start->t1 > 0.0 && std::isfinite(warm_start->m0)) {
        const double t1 = std::clamp(warm_start->t1, config.t1_min_ms, config.t1_max_ms);
        consider(levenberg(y, t, warm_start->m0, t1, config));
    }
    for (double t1 : t1_start_grid(config)) {
        consider(levenberg(y, t, linear_m0(y, t, t1), t1, config));
    }
    out.t1 = best.t1;
    out.m0 = best.m0;
    out.sse = best.sse;
    out.r2 = sst > 0.0 ? 1.0 - best.sse / sst : 0.0;
    out.converged = best.converged;
    out.clamped = best.t1 <= config.t1_min_ms || best.t1 >= config.t1_max_ms;
    return out;
}

}  // namespace

double ir_signal(double m0, double t1_ms, double t_ms)
{
    require_positive_t1(t1_ms);
    return m0 * (1.0 - 2.0 * std::exp(-t_ms / t1_ms));
}

SignalJacobian ir_signal_jacobian(double m0, double t1_ms, double t_ms)
{
    require_positive_t1(t1_ms);
    const double e = std::exp(-t_ms / t1_ms);
    return {1.0 - 2.0 * e, -2.0 * m0 * (t_ms / (t1_ms * t1_ms)) * e};
}

std::vector<double> t1_start_grid(const FitConfig& config)
{
    std::vector<double> grid(config.fit_starts);
    if (config.fit_starts == 1) {
        grid[0] = std::sqrt(config.t1_min_ms * config.t1_max_ms);
        return grid;
    }
    const double ratio = std::log(config.t1_max_ms / config.t1_min_ms);
    for (int k = 0; k < config.fit_starts; ++k) {
        grid[k] = config.t1_min_ms * std::exp(ratio * k / (config.fit_starts - 1));
    }
    grid.back() = config.t1_max_ms;
    return grid;
}

VoxelFit fit_voxel(std::span<const double> values, std::span<const double> timestamps_ms, const FitConfig& config,
                   std::optional<FitStart> warm_start)
{
    if (values.size() != timestamps_ms.size()) {
        throw Error(ErrorCode::ShapeMismatch, "values and timestamps differ in length");
    }
    if (values.size() < static_cast<std::size_t>(kMinFrames)) {
        throw Error(ErrorCode::TooFewFrames, "voxel fit needs at least 3 samples");
    }
    if (!config.magnitude_mode) {
        return fit_signed(values, timestamps_ms, config, warm_start);
    }

    // Polarity restoration: samples before the zero crossing were negative.
    std::vector<double> restored(values.begin(), values.end());
    for (double& v : restored) v = std::abs(v);
    VoxelFit best = fit_signed(restored, timestamps_ms, config, warm_start);
    for (std::size_t flipped = 1; flipped <= restored.size(); ++flipped) {
        restored[flipped - 1] = -restored[flipped - 1];
        const VoxelFit candidate = fit_signed(restored, timestamps_ms, config, std::nullopt);
        if (candidate.sse < best.sse) {
            best = candidate;
        }
    }
    return best;
}

MapFit fit_map(const ImageSeries& series, const FitConfig& config, const Mask* roi, const ParametricMaps* warm_start)
{
    validate_series(series);
    const int rows = series.rows();
    const int cols = series.cols();
    if (roi && (roi->rows() != rows || roi->cols() != cols)) {
        throw Error(ErrorCode::ShapeMismatch, "roi differs in size from the series");
    }
    if (warm_start && (!warm_start->t1.same_shape(series.frames[0]) || !warm_start->m0.same_shape(series.frames[0]))) {
        throw Error(ErrorCode::ShapeMismatch, "warm-start maps differ in size from the series");
    }
    MapFit out{{Image(rows, cols), Image(rows, cols)}, Image(rows, cols), Image(rows, cols), Mask(rows, cols)};
    const int n = series.size();
    parallel_rows(rows, [&](int begin, int end) {
        std::vector<double> curve(n);
        for (int r = begin; r < end; ++r) {
            for (int c = 0; c < cols; ++c) {
                if (roi && (*roi)(r, c) == 0) {
                    continue;
                }
                for (int i = 0; i < n; ++i) {
                    curve[i] = series.frames[i](r, c);
                }
                std::optional<FitStart> start;
                if (warm_start) {
                    start = FitStart{warm_start->t1(r, c), warm_start->m0(r, c)};
                }
                const VoxelFit fit = fit_voxel(curve, series.timestamps_ms, config, start);
                out.maps.t1(r, c) = fit.t1;
                out.maps.m0(r, c) = fit.m0;
                out.r2(r, c) = fit.r2;
                out.sse(r, c) = fit.sse;
                out.converged(r, c) = fit.converged ? 1 : 0;
            }
        }
    });
    return out;
}

std::vector<Image> synthesize(const ParametricMaps& maps, std::span<const double> timestamps_ms)
{
    if (!maps.t1.same_shape(maps.m0)) {
        throw Error(ErrorCode::ShapeMismatch, "t1 and m0 maps differ in size");
    }
    std::vector<Image> out(timestamps_ms.size(), Image(maps.t1.rows(), maps.t1.cols()));
    const std::size_t voxels = maps.t1.size();
    for (std::size_t i = 0; i < timestamps_ms.size(); ++i) {
        const double t = timestamps_ms[i];
        for (std::size_t p = 0; p < voxels; ++p) {
            const double t1 = maps.t1[p];
            // Sentinel voxels (t1 = 0) synthesize to zero.
            out[i][p] = t1 > 0.0 ? maps.m0[p] * (1.0 - 2.0 * std::exp(-t / t1)) : 0.0;
        }
    }
    return out;
}

double r_squared(std::span<const double> observed, std::span<const double> predicted)
{
    if (observed.size() != predicted.size()) {
        throw Error(ErrorCode::ShapeMismatch, "observed and predicted differ in length");
    }
    if (observed.size() < 2) {
        throw Error(ErrorCode::TooFewFrames, "r_squared needs at least 2 samples");
    }
    double mean = 0.0;
    for (double v : observed) mean += v;
    mean /= static_cast<double>(observed.size());
    double ss_tot = 0.0;
    double ss_res = 0.0;
    for (std::size_t i = 0; i < observed.size(); ++i) {
        ss_tot += (observed[i] - mean) * (observed[i] - mean);
        ss_res += (observed[i] - predicted[i]) * (observed[i] - predicted[i]);
    }
    if (ss_tot == 0.0) {
        throw Error(ErrorCode::ConstantObserved, "observed values are constant");
    }
    return 1.0 - ss_res / ss_tot;
}

}  // namespace t1moco
