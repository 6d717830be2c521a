#include "t1moco/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "t1moco/deformation.hpp"
#include "t1moco/error.hpp"
#include "t1moco/parallel.hpp"

namespace t1moco {

namespace {

constexpr double kNormalizedTolerance = 1e-9;
constexpr int kMinPyramidSize = 16;

struct Level {
    ImageSeries series;
    std::vector<Image> masks;  // empty without segmentation
};

struct State {
    ParametricMaps maps;
    VelocityFieldSet fields;
    LossBreakdown loss;
};

std::vector<Image> register_frames(const ImageSeries& series, const VelocityFieldSet& fields, int steps)
{
    std::vector<Image> out(series.frames.size());
    for (int i = 0; i < series.size(); ++i) {
        out[i] = fields.has_field(i) ? warp(series.frames[i], integrate_velocity(fields.field(i), steps))
                                     : series.frames[i];
    }
    return out;
}

// Per-voxel residual sum of squares of `maps` against the frames.
Image voxel_sse(const ParametricMaps& maps, const std::vector<Image>& frames, const std::vector<double>& t)
{
    const std::vector<Image> synthetic = synthesize(maps, t);
    Image sse(maps.t1.rows(), maps.t1.cols());
    for (std::size_t i = 0; i < frames.size(); ++i) {
        for (std::size_t p = 0; p < sse.size(); ++p) {
            const double d = synthetic[i][p] - frames[i][p];
            sse[p] += d * d;
        }
    }
    return sse;
}

// Step (A): refit maps on the registered frames, keeping per-voxel winners.
ParametricMaps refit_maps(const Level& level, const State& state, const FitConfig& config)
{
    ImageSeries registered = level.series;
    registered.frames = register_frames(level.series, state.fields, config.integration_steps);
    const MapFit fresh = fit_map(registered, config, nullptr, &state.maps);
    const Image old_sse = voxel_sse(state.maps, registered.frames, registered.timestamps_ms);
    ParametricMaps out = state.maps;
    for (std::size_t p = 0; p < out.t1.size(); ++p) {
        if (fresh.sse[p] < old_sse[p]) {
            out.t1[p] = fresh.maps.t1[p];
            out.m0[p] = fresh.maps.m0[p];
        }
    }
    return out;
}

struct FrameStep {
    double alpha;
    bool stalled = false;
};

double max_abs(std::span<const double> xs)
{
    double m = 0.0;
    for (double x : xs) m = std::max(m, std::abs(x));
    return m;
}

// Step (B) for one frame: up to `steps` line-searched descent steps.
void descend_frame(const FrameObjective& objective, VectorField& velocity, FrameStep& step, const FitConfig& config,
                   int steps)
{
    const double alpha_max = 4.0 * config.step_size;
    VectorField grad;
    double current = objective.evaluate(velocity, grad).total;
    for (int s = 0; s < steps; ++s) {
        if (config.gradient_mode == GradientMode::FiniteDifference) {
            grad = objective.numeric_gradient(velocity);
        }
        VectorField direction = gaussian_smooth(grad, config.gradient_sigma);
        double slope = 0.0;
        for (std::size_t j = 0; j < grad.components().size(); ++j) {
            slope += direction.components()[j] * grad.components()[j];
        }
        if (!(slope > 0.0)) {
            direction = grad;
        }
        const double scale = max_abs(direction.components());
        if (!(scale > 0.0) || !std::isfinite(scale)) {
            step.stalled = true;
            return;
        }
        bool accepted = false;
        VectorField candidate(velocity.rows(), velocity.cols());
        for (int h = 0; h <= config.max_halvings; ++h) {
            const double factor = step.alpha / scale;
            auto cand = candidate.components();
            auto base = velocity.components();
            auto dir = direction.components();
            for (std::size_t j = 0; j < cand.size(); ++j) {
                cand[j] = base[j] - factor * dir[j];
            }
            VectorField cand_grad;
            const double value = objective.evaluate(candidate, cand_grad).total;
            if (value < current) {
                velocity = candidate;
                grad = std::move(cand_grad);
                current = value;
                accepted = true;
                if (h == 0) {
                    step.alpha = std::min(2.0 * step.alpha, alpha_max);
                }
                break;
            }
            step.alpha *= 0.5;
        }
        if (!accepted) {
            step.alpha = config.step_size;
            step.stalled = true;
            return;
        }
    }
}

double relative_change(double before, double after)
{
    const double denom = std::max(std::abs(before), std::numeric_limits<double>::min());
    return (before - after) / denom;
}

struct LevelResult {
    State state;
    std::vector<LossBreakdown> trace;
    bool converged = false;
};

// Block-coordinate descent on one pyramid level, starting from `start`.
LevelResult optimize_level(const Level& level, State start, const FitConfig& config)
{
    LevelResult result;
    State state = std::move(start);
    state.loss = total_loss(level.series, state.maps, state.fields, level.masks, config);
    const int ref = state.fields.reference_index();
    std::vector<FrameStep> steps(level.series.size(), FrameStep{config.step_size});
    for (int iter = 0; iter < config.outer_iterations; ++iter) {
        const LossBreakdown before = state.loss;

        State trial = state;
        trial.maps = refit_maps(level, state, config);
        const LossBreakdown after_maps = total_loss(level.series, trial.maps, trial.fields, level.masks, config);
        if (after_maps.total <= state.loss.total) {
            state.maps = trial.maps;
            state.loss = after_maps;
        }

        trial = state;
        const std::vector<Image> synthetic = synthesize(trial.maps, level.series.timestamps_ms);
        const bool seg = !level.masks.empty();
        for (int i = 0; i < level.series.size(); ++i) {
            if (i == ref) {
                continue;
            }
            const FrameObjective objective(level.series.frames[i], synthetic[i], seg ? &level.masks[i] : nullptr,
                                           seg ? &level.masks[ref] : nullptr, config);
            steps[i].stalled = false;
            descend_frame(objective, trial.fields.field(i), steps[i], config, config.refit_interval);
        }
        const LossBreakdown after_fields = total_loss(level.series, trial.maps, trial.fields, level.masks, config);
        if (after_fields.total <= state.loss.total) {
            state.fields = std::move(trial.fields);
            state.loss = after_fields;
        }
        result.trace.push_back(state.loss);
        if (relative_change(before.total, state.loss.total) < config.tolerance) {
            result.converged = true;
            break;
        }
    }
    result.state = std::move(state);
    return result;
}

Level downsample_level(const Level& fine)
{
    Level coarse;
    coarse.series.timestamps_ms = fine.series.timestamps_ms;
    coarse.series.spacing = {fine.series.spacing.row_mm * 2.0, fine.series.spacing.col_mm * 2.0};
    for (const Image& f : fine.series.frames) {
        coarse.series.frames.push_back(downsample(f));
    }
    for (const Image& m : fine.masks) {
        coarse.masks.push_back(downsample(m));
    }
    return coarse;
}

VelocityFieldSet resample_fields(const VelocityFieldSet& fields, int rows, int cols)
{
    VelocityFieldSet out(fields.frames(), rows, cols, fields.reference_index());
    for (std::size_t k = 0; k < fields.fields().size(); ++k) {
        out.fields()[k] = resample_field(fields.fields()[k], rows, cols);
    }
    return out;
}

Image voxel_r2(const std::vector<Image>& observed, const std::vector<Image>& predicted)
{
    const int rows = observed.front().rows();
    const int cols = observed.front().cols();
    Image r2(rows, cols);
    std::vector<double> o(observed.size());
    std::vector<double> p(observed.size());
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            for (std::size_t i = 0; i < observed.size(); ++i) {
                o[i] = observed[i](r, c);
                p[i] = predicted[i](r, c);
            }
            try {
                r2(r, c) = r_squared(o, p);
            } catch (const Error&) {
                r2(r, c) = 0.0;
            }
        }
    }
    return r2;
}

JointSolution assemble(const ImageSeries& series, const State& state, const FitConfig& config)
{
    JointSolution out;
    out.maps = state.maps;
    out.fields = state.fields;
    out.registered = series;
    out.registered.frames = register_frames(series, state.fields, config.integration_steps);
    out.synthetic = series;
    out.synthetic.frames = synthesize(state.maps, series.timestamps_ms);
    out.r2 = voxel_r2(out.registered.frames, out.synthetic.frames);
    return out;
}

}  // namespace

void require_normalized(const ImageSeries& series)
{
    const auto [lo, hi] = intensity_range(series);
    if (lo < -1.0 - kNormalizedTolerance || hi > 1.0 + kNormalizedTolerance) {
        throw Error(ErrorCode::NotNormalized, "intensities span [" + std::to_string(lo) + ", " + std::to_string(hi) +
                                                  "], expected within [-1, 1]");
    }
}

JointSolution joint_fit(const ImageSeries& series, const FitConfig& config, const MaskSet* masks)
{
    validate_config(config);
    validate_series(series);
    require_normalized(series);
    if (config.reference_index >= series.size()) {
        throw Error(ErrorCode::InvalidConfig, "reference_index exceeds the frame count");
    }
    if (masks) {
        validate_masks(*masks, series.size(), series.rows(), series.cols());
    }

    std::vector<Level> pyramid(1);
    pyramid[0].series = series;
    if (masks) {
        pyramid[0].masks = masks_as_images(*masks);
    }
    while (static_cast<int>(pyramid.size()) < config.pyramid_levels &&
           std::min(pyramid.back().series.rows(), pyramid.back().series.cols()) / 2 >= kMinPyramidSize) {
        pyramid.push_back(downsample_level(pyramid.back()));
    }

    State state;
    state.maps = fit_map(series, config).maps;
    state.fields = VelocityFieldSet(series.size(), series.rows(), series.cols(), config.reference_index);
    state.loss = total_loss(series, state.maps, state.fields, pyramid[0].masks, config);

    std::vector<TraceEntry> trace{{-1, state.loss}};
    int coarse_iterations = 0;
    bool converged = false;

    if (config.outer_iterations > 0) {
        if (pyramid.size() > 1) {
            // Coarse-to-fine warm start; velocity rescaled with the voxel pitch.
            VelocityFieldSet coarse_fields;
            for (int l = static_cast<int>(pyramid.size()) - 1; l >= 1; --l) {
                const Level& level = pyramid[l];
                State start;
                start.fields = coarse_fields.frames() == 0
                                   ? VelocityFieldSet(series.size(), level.series.rows(), level.series.cols(),
                                                      config.reference_index)
                                   : resample_fields(coarse_fields, level.series.rows(), level.series.cols());
                ImageSeries registered = level.series;
                registered.frames = register_frames(level.series, start.fields, config.integration_steps);
                start.maps = fit_map(registered, config).maps;
                LevelResult result = optimize_level(level, std::move(start), config);
                coarse_iterations += static_cast<int>(result.trace.size());
                coarse_fields = std::move(result.state.fields);
            }
            State warm;
            warm.fields = resample_fields(coarse_fields, series.rows(), series.cols());
            warm.maps = state.maps;
            warm.maps = refit_maps(pyramid[0], warm, config);
            warm.loss = total_loss(series, warm.maps, warm.fields, pyramid[0].masks, config);
            if (warm.loss.total <= state.loss.total) {
                state = std::move(warm);
                trace.push_back({0, state.loss});
            }
        }
        LevelResult fine = optimize_level(pyramid[0], std::move(state), config);
        for (std::size_t k = 0; k < fine.trace.size(); ++k) {
            trace.push_back({static_cast<int>(k) + 1, fine.trace[k]});
        }
        state = std::move(fine.state);
        converged = fine.converged;
    }

    JointSolution out = assemble(series, state, config);
    out.trace = std::move(trace);
    out.converged = converged;
    out.coarse_iterations = coarse_iterations;
    return out;
}

MapFit fit_uncorrected(const ImageSeries& series, const FitConfig& config, const Mask* roi)
{
    validate_config(config);
    return fit_map(series, config, roi);
}

JointSolution static_solution(const ImageSeries& series, const MapFit& fit, int reference_index)
{
    JointSolution out;
    out.maps = fit.maps;
    out.r2 = fit.r2;
    out.fields = VelocityFieldSet(series.size(), series.rows(), series.cols(), reference_index);
    out.registered = series;
    out.synthetic = series;
    out.synthetic.frames = synthesize(fit.maps, series.timestamps_ms);
    return out;
}

}  // namespace t1moco
