#pragma once

#include <optional>
#include <span>
#include <vector>

#include "t1moco/deformation.hpp"
#include "t1moco/grid.hpp"
#include "t1moco/series.hpp"

namespace t1moco {

struct LossBreakdown {
    double fit = 0.0;
    double smooth = 0.0;
    double seg = 0.0;
    double total = 0.0;
};

inline constexpr double kDiceEpsilon = 1e-7;

/// Sum over frames of the per-voxel mean squared difference.
double fit_loss(std::span<const Image> synthetic, std::span<const Image> registered);

/// Forward-difference squared gradient norm of one field, summed over both
/// components and both axes, divided by the voxel count.
double smoothness_loss(const VectorField& velocity);
double smoothness_loss(const VelocityFieldSet& fields);

/// 1 - 2 sum(a b) / (sum a + sum b + eps).
double soft_dice_loss(const Image& fixed_mask, const Image& warped_mask);

/// Per-frame share of the objective for one non-reference frame, holding
/// the synthetic image fixed. The full objective is a sum of these plus the
/// reference frame's (velocity-independent) fit term.
class FrameObjective {
public:
    FrameObjective(const Image& frame, const Image& synthetic, const Image* moving_mask, const Image* fixed_mask,
                   const FitConfig& config);

    /// Unweighted fit / smooth / seg terms; total is the weighted sum.
    LossBreakdown evaluate(const VectorField& velocity) const;

    /// As evaluate, also writing d total / d velocity.
    LossBreakdown evaluate(const VectorField& velocity, VectorField& gradient) const;

    /// Central differences of evaluate().total, one component at a time.
    VectorField numeric_gradient(const VectorField& velocity, double step = 1e-6) const;

private:
    const Image& frame_;
    const Image& synthetic_;
    const Image* moving_mask_;
    const Image* fixed_mask_;
    const FitConfig& config_;
};

LossBreakdown weigh(LossBreakdown terms, const FitConfig& config);

/// Weighted objective for the whole series. Masks are optional; without
/// them the seg term is zero.
LossBreakdown total_loss(const ImageSeries& series, const ParametricMaps& maps, const VelocityFieldSet& fields,
                         const MaskSet* masks, const FitConfig& config);

/// As above with real-valued masks (empty span: no seg term). Fractional
/// masks arise on downsampled pyramid levels.
LossBreakdown total_loss(const ImageSeries& series, const ParametricMaps& maps, const VelocityFieldSet& fields,
                         std::span<const Image> mask_images, const FitConfig& config);

struct LossGradient {
    LossBreakdown loss;
    std::vector<VectorField> velocity;  ///< ordered like VelocityFieldSet::fields()
    Image m0;
    Image t1;
};

/// Gradient of total_loss with respect to every velocity component and every
/// map value. Uses config.gradient_mode to choose analytic chain rule or
/// central finite differences.
LossGradient total_loss_gradient(const ImageSeries& series, const ParametricMaps& maps,
                                 const VelocityFieldSet& fields, const MaskSet* masks, const FitConfig& config);

/// Masks as real-valued images, one per frame.
std::vector<Image> masks_as_images(const MaskSet& masks);

}  // namespace t1moco
