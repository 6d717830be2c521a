#include "t1moco/series.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "t1moco/error.hpp"

namespace t1moco {

void validate_series(const ImageSeries& series)
{
    if (series.size() < kMinFrames) {
        throw Error(ErrorCode::TooFewFrames,
                    "series has " + std::to_string(series.size()) + " frames, need at least " +
                        std::to_string(kMinFrames));
    }
    if (series.timestamps_ms.size() != series.frames.size()) {
        throw Error(ErrorCode::ShapeMismatch, "timestamp count does not match frame count");
    }
    const int rows = series.rows();
    const int cols = series.cols();
    if (rows <= 0 || cols <= 0) {
        throw Error(ErrorCode::ShapeMismatch, "frames are empty");
    }
    for (int i = 0; i < series.size(); ++i) {
        const Image& f = series.frames[i];
        if (f.rows() != rows || f.cols() != cols) {
            throw Error(ErrorCode::ShapeMismatch, "frame " + std::to_string(i) + " differs in size from frame 0");
        }
    }
    for (int i = 0; i < series.size(); ++i) {
        const double t = series.timestamps_ms[i];
        if (!std::isfinite(t)) {
            throw Error(ErrorCode::NonFiniteValue, "timestamp " + std::to_string(i) + " is not finite");
        }
        if (t <= 0.0) {
            throw Error(ErrorCode::NonIncreasingTimestamps, "timestamp " + std::to_string(i) + " is not positive");
        }
        if (i > 0 && !(t > series.timestamps_ms[i - 1])) {
            throw Error(ErrorCode::NonIncreasingTimestamps,
                        "timestamp " + std::to_string(i) + " does not exceed its predecessor");
        }
    }
    if (!(series.spacing.row_mm > 0.0) || !(series.spacing.col_mm > 0.0) || !std::isfinite(series.spacing.row_mm) ||
        !std::isfinite(series.spacing.col_mm)) {
        throw Error(ErrorCode::NonFiniteValue, "voxel spacing must be finite and positive");
    }
    for (int i = 0; i < series.size(); ++i) {
        for (double v : series.frames[i].values()) {
            if (!std::isfinite(v)) {
                throw Error(ErrorCode::NonFiniteValue, "frame " + std::to_string(i) + " holds a non-finite value");
            }
        }
    }
}

std::pair<double, double> intensity_range(const ImageSeries& series)
{
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (const Image& f : series.frames) {
        for (double v : f.values()) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    return {lo, hi};
}

ImageSeries min_max_normalize(const ImageSeries& series)
{
    validate_series(series);
    const auto [lo, hi] = intensity_range(series);
    if (!(hi > lo)) {
        throw Error(ErrorCode::ConstantSeries, "cannot normalize a constant series");
    }
    const double range = hi - lo;
    ImageSeries out = series;
    for (Image& f : out.frames) {
        for (double& v : f.values()) {
            v = std::clamp((v - lo) / range, 0.0, 1.0);
        }
    }
    return out;
}

VelocityFieldSet::VelocityFieldSet(int frames, int rows, int cols, int reference_index)
    : frames_(frames), reference_(reference_index), rows_(rows), cols_(cols)
{
    if (frames < 1 || reference_index < 0 || reference_index >= frames) {
        throw Error(ErrorCode::InvalidConfig, "reference index outside the frame range");
    }
    fields_.assign(frames - 1, VectorField(rows, cols));
}

int VelocityFieldSet::slot(int frame) const
{
    if (!has_field(frame)) {
        throw Error(ErrorCode::InvalidConfig, "frame " + std::to_string(frame) + " has no velocity field");
    }
    return frame < reference_ ? frame : frame - 1;
}

VectorField& VelocityFieldSet::field(int frame)
{
    return fields_[slot(frame)];
}

const VectorField& VelocityFieldSet::field(int frame) const
{
    return fields_[slot(frame)];
}

void validate_masks(const MaskSet& masks, int frames, int rows, int cols)
{
    if (masks.size() != frames) {
        throw Error(ErrorCode::ShapeMismatch,
                    "mask count " + std::to_string(masks.size()) + " does not match frame count " + std::to_string(frames));
    }
    for (int i = 0; i < masks.size(); ++i) {
        const Mask& m = masks.masks[i];
        if (m.rows() != rows || m.cols() != cols) {
            throw Error(ErrorCode::ShapeMismatch, "mask " + std::to_string(i) + " differs in size from the series");
        }
        for (auto v : m.values()) {
            if (v > 1) {
                throw Error(ErrorCode::InvalidMask, "mask " + std::to_string(i) + " is not binary");
            }
        }
    }
}

void validate_config(const FitConfig& c)
{
    auto fail = [](const std::string& what) { throw Error(ErrorCode::InvalidConfig, what); };
    if (!(c.lambda_fit >= 0.0) || !(c.lambda_smooth >= 0.0) || !(c.lambda_seg >= 0.0)) {
        fail("loss weights must be nonnegative");
    }
    if (c.outer_iterations < 0) fail("outer_iterations must be >= 0");
    if (c.refit_interval < 1) fail("refit_interval must be >= 1");
    if (c.integration_steps < 1 || c.integration_steps > 20) fail("integration_steps must be in [1, 20]");
    if (c.pyramid_levels < 1) fail("pyramid_levels must be >= 1");
    if (!(c.step_size > 0.0)) fail("step_size must be positive");
    if (c.max_halvings < 0) fail("max_halvings must be >= 0");
    if (!(c.gradient_sigma >= 0.0)) fail("gradient_sigma must be >= 0");
    if (!(c.tolerance >= 0.0)) fail("tolerance must be >= 0");
    if (c.reference_index < 0) fail("reference_index must be >= 0");
    if (!(c.t1_min_ms > 0.0) || !(c.t1_max_ms > c.t1_min_ms) || !std::isfinite(c.t1_max_ms)) {
        fail("t1 range must satisfy 0 < t1_min < t1_max");
    }
    if (c.fit_starts < 1) fail("fit_starts must be >= 1");
    if (c.max_fit_iterations < 1) fail("max_fit_iterations must be >= 1");
}

}  // namespace t1moco
