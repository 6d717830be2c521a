#pragma once

#include <vector>

#include "t1moco/losses.hpp"
#include "t1moco/series.hpp"
#include "t1moco/signal_model.hpp"

namespace t1moco {

struct TraceEntry {
    /// -1 marks the initial state, 0 the pyramid warm start, otherwise the
    /// outer iteration at full resolution.
    int iteration = 0;
    LossBreakdown loss;
};

struct JointSolution {
    ParametricMaps maps;
    Image r2;
    VelocityFieldSet fields;
    ImageSeries registered;
    ImageSeries synthetic;
    std::vector<TraceEntry> trace;  ///< full-resolution loss, nonincreasing
    bool converged = false;
    int coarse_iterations = 0;      ///< outer iterations spent on pyramid levels
};

/// Throws NotNormalized unless every intensity lies in [-1, 1].
void require_normalized(const ImageSeries& series);

/// Joint estimate of T1/M0 maps and per-frame velocity fields.
///
/// Block-coordinate descent on the weighted objective: (A) refit the maps
/// voxelwise on the registered frames, keeping the old value wherever the
/// refit is not better; (B) `refit_interval` preconditioned gradient steps
/// on each velocity field with backtracking (halve until the frame loss
/// drops, at most `max_halvings` times). Coarser pyramid levels run the
/// same scheme first and seed the full-resolution fields when that lowers
/// the full-resolution loss. The reference frame is never warped.
JointSolution joint_fit(const ImageSeries& series, const FitConfig& config, const MaskSet* masks = nullptr);

/// Voxelwise fit of the acquired frames with no registration.
MapFit fit_uncorrected(const ImageSeries& series, const FitConfig& config, const Mask* roi = nullptr);

/// Wraps an unregistered fit as a solution with identity deformations.
JointSolution static_solution(const ImageSeries& series, const MapFit& fit, int reference_index = 0);

}  // namespace t1moco
