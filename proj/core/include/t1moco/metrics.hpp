#pragma once

#include <optional>
#include <vector>

#include "t1moco/grid.hpp"
#include "t1moco/optimizer.hpp"
#include "t1moco/phantom.hpp"
#include "t1moco/series.hpp"

namespace t1moco {

/// 2|A n B| / (|A| + |B|); 1 when both masks are empty.
double dice(const Mask& a, const Mask& b);

/// Foreground voxels with a 4-neighbour outside the mask or the image.
Mask boundary(const Mask& mask);

enum class HausdorffMode { Maximum, Percentile95 };

/// Symmetric Hausdorff distance between the boundaries of a and b in mm.
/// Throws EmptyMask when either mask is empty.
double hausdorff(const Mask& a, const Mask& b, Spacing spacing, HausdorffMode mode = HausdorffMode::Maximum);

/// Squared distance (mm^2) from every voxel to the nearest set voxel of
/// `sites`; +inf when sites is empty.
Image squared_distance_transform(const Mask& sites, Spacing spacing);

struct FrameEvaluation {
    int frame = 0;
    double dice = 0.0;
    std::optional<double> hausdorff_mm;  ///< empty when the warped mask vanished
};

struct EvalReport {
    double r2_mean = 0.0;
    double r2_std = 0.0;
    int r2_voxels = 0;
    double dice_mean = 0.0;
    std::optional<double> hausdorff_mm;  ///< mean over frames with a defined distance
    std::optional<double> t1_rmse_ms;
    std::optional<double> t1_relative_rmse;
    std::vector<FrameEvaluation> frames;
};

struct EvalOptions {
    bool pooled_r2 = false;  ///< one R^2 over all myocardial samples instead of a voxel mean
    HausdorffMode hausdorff_mode = HausdorffMode::Maximum;
};

/// Warps every non-reference mask by the solution's deformation,
/// thresholding the bilinear result at 0.5.
MaskSet warp_masks(const JointSolution& solution, const MaskSet& masks, int integration_steps);

/// R^2 over the reference-frame myocardium, overlap of each warped mask with
/// the reference mask, and T1 error against the phantom truth when given.
EvalReport evaluate(const JointSolution& solution, const MaskSet& masks, const PhantomScene* truth = nullptr,
                    const EvalOptions& options = {}, int integration_steps = 7);

/// Root-mean-square T1 error over `region`, in ms and relative to truth.
std::pair<double, double> t1_rmse(const Image& estimate, const Image& truth, const Mask& region);

}  // namespace t1moco
