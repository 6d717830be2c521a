#pragma once

#include <cstdint>
#include <vector>

#include "t1moco/grid.hpp"

namespace t1moco {

/// Voxel spacing in millimetres.
struct Spacing {
    double row_mm = 2.1;
    double col_mm = 2.1;

    bool operator==(const Spacing&) const = default;
};

/// N co-located 2D frames sampled at increasing inversion times.
struct ImageSeries {
    std::vector<Image> frames;
    std::vector<double> timestamps_ms;
    Spacing spacing;

    int size() const noexcept { return static_cast<int>(frames.size()); }
    int rows() const noexcept { return frames.empty() ? 0 : frames.front().rows(); }
    int cols() const noexcept { return frames.empty() ? 0 : frames.front().cols(); }

    bool operator==(const ImageSeries&) const = default;
};

inline constexpr int kMinFrames = 3;

/// Throws Error(TooFewFrames | ShapeMismatch | NonIncreasingTimestamps |
/// NonFiniteValue) for the first violated invariant.
void validate_series(const ImageSeries& series);

/// Global min-max rescale of all frames to [0, 1]. Throws ConstantSeries
/// when every intensity is equal.
ImageSeries min_max_normalize(const ImageSeries& series);

/// Smallest and largest intensity over every frame.
std::pair<double, double> intensity_range(const ImageSeries& series);

/// Per-voxel T1 (ms) and M0 (normalized intensity).
struct ParametricMaps {
    Image t1;
    Image m0;

    bool operator==(const ParametricMaps&) const = default;
};

/// One stationary velocity field per non-reference frame. The reference
/// frame carries no field; its deformation is the identity.
class VelocityFieldSet {
public:
    VelocityFieldSet() = default;
    VelocityFieldSet(int frames, int rows, int cols, int reference_index);

    int frames() const noexcept { return frames_; }
    int reference_index() const noexcept { return reference_; }
    int rows() const noexcept { return rows_; }
    int cols() const noexcept { return cols_; }

    bool has_field(int frame) const noexcept { return frame != reference_ && frame >= 0 && frame < frames_; }
    VectorField& field(int frame);
    const VectorField& field(int frame) const;

    /// Fields in frame order, skipping the reference.
    std::vector<VectorField>& fields() noexcept { return fields_; }
    const std::vector<VectorField>& fields() const noexcept { return fields_; }

    bool operator==(const VelocityFieldSet&) const = default;

private:
    int slot(int frame) const;

    int frames_ = 0;
    int reference_ = 0;
    int rows_ = 0;
    int cols_ = 0;
    std::vector<VectorField> fields_;
};

/// Per-frame binary myocardium masks.
struct MaskSet {
    std::vector<Mask> masks;

    int size() const noexcept { return static_cast<int>(masks.size()); }
    bool operator==(const MaskSet&) const = default;
};

/// Throws InvalidMask / ShapeMismatch when masks do not match the series.
void validate_masks(const MaskSet& masks, int frames, int rows, int cols);

enum class GradientMode { Analytic, FiniteDifference };

struct FitConfig {
    double lambda_fit = 1.0;
    double lambda_smooth = 500.0;
    double lambda_seg = 70000.0;

    int outer_iterations = 20;
    int refit_interval = 5;      ///< velocity steps between map re-fits
    int integration_steps = 7;
    int pyramid_levels = 3;
    double step_size = 0.5;      ///< initial largest per-step velocity change, voxels
    int max_halvings = 10;
    double gradient_sigma = 2.0; ///< Gaussian preconditioner width, voxels; 0 disables
    double tolerance = 1e-5;
    int reference_index = 0;

    double t1_min_ms = 50.0;
    double t1_max_ms = 5000.0;
    int fit_starts = 8;
    int max_fit_iterations = 100;
    bool magnitude_mode = false;

    GradientMode gradient_mode = GradientMode::Analytic;
    std::uint64_t seed = 0;

    bool operator==(const FitConfig&) const = default;
};

/// Throws InvalidConfig when a field is out of range.
void validate_config(const FitConfig& config);

}  // namespace t1moco
