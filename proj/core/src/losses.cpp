#include "t1moco/losses.hpp"

#include <cmath>
#include <string>

#include "t1moco/error.hpp"
#include "t1moco/parallel.hpp"
#include "t1moco/signal_model.hpp"

namespace t1moco {

namespace {

double mean_squared_difference(const Image& a, const Image& b)
{
    if (!a.same_shape(b)) {
        throw Error(ErrorCode::ShapeMismatch, "synthetic and registered frames differ in size");
    }
    const double sum = parallel_row_sum(a.rows(), [&](int r) {
        double acc = 0.0;
        for (int c = 0; c < a.cols(); ++c) {
            const double d = a(r, c) - b(r, c);
            acc += d * d;
        }
        return acc;
    });
    return sum / static_cast<double>(a.size());
}

// Adds d smooth / d v (unweighted) into grad scaled by weight.
void accumulate_smoothness_gradient(const VectorField& v, double weight, VectorField& grad)
{
    const int rows = v.rows();
    const int cols = v.cols();
    const double scale = 2.0 * weight / static_cast<double>(v.voxels());
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            for (int k = 0; k < 2; ++k) {
                if (r + 1 < rows) {
                    const double d = scale * (v.at(r + 1, c, k) - v.at(r, c, k));
                    grad.at(r + 1, c, k) += d;
                    grad.at(r, c, k) -= d;
                }
                if (c + 1 < cols) {
                    const double d = scale * (v.at(r, c + 1, k) - v.at(r, c, k));
                    grad.at(r, c + 1, k) += d;
                    grad.at(r, c, k) -= d;
                }
            }
        }
    }
}

struct DiceSums {
    double overlap = 0.0;
    double fixed = 0.0;
    double moving = 0.0;
};

DiceSums dice_sums(const Image& fixed, const Image& moving)
{
    DiceSums s;
    for (std::size_t i = 0; i < fixed.size(); ++i) {
        s.overlap += fixed[i] * moving[i];
        s.fixed += fixed[i];
        s.moving += moving[i];
    }
    return s;
}

double dice_from_sums(const DiceSums& s)
{
    return 1.0 - 2.0 * s.overlap / (s.fixed + s.moving + kDiceEpsilon);
}

}  // namespace

double fit_loss(std::span<const Image> synthetic, std::span<const Image> registered)
{
    if (synthetic.size() != registered.size()) {
        throw Error(ErrorCode::ShapeMismatch, "synthetic and registered frame counts differ");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < synthetic.size(); ++i) {
        total += mean_squared_difference(synthetic[i], registered[i]);
    }
    return total;
}

double smoothness_loss(const VectorField& v)
{
    const int rows = v.rows();
    const int cols = v.cols();
    const double sum = parallel_row_sum(rows, [&](int r) {
        double acc = 0.0;
        for (int c = 0; c < cols; ++c) {
            for (int k = 0; k < 2; ++k) {
                if (r + 1 < rows) {
                    const double d = v.at(r + 1, c, k) - v.at(r, c, k);
                    acc += d * d;
                }
                if (c + 1 < cols) {
                    const double d = v.at(r, c + 1, k) - v.at(r, c, k);
                    acc += d * d;
                }
            }
        }
        return acc;
    });
    return v.voxels() > 0 ? sum / static_cast<double>(v.voxels()) : 0.0;
}

double smoothness_loss(const VelocityFieldSet& fields)
{
    double total = 0.0;
    for (const VectorField& v : fields.fields()) {
        total += smoothness_loss(v);
    }
    return total;
}

double soft_dice_loss(const Image& fixed_mask, const Image& warped_mask)
{
    if (!fixed_mask.same_shape(warped_mask)) {
        throw Error(ErrorCode::ShapeMismatch, "masks differ in size");
    }
    return dice_from_sums(dice_sums(fixed_mask, warped_mask));
}

LossBreakdown weigh(LossBreakdown t, const FitConfig& config)
{
    t.total = config.lambda_fit * t.fit + config.lambda_smooth * t.smooth + config.lambda_seg * t.seg;
    return t;
}

FrameObjective::FrameObjective(const Image& frame, const Image& synthetic, const Image* moving_mask,
                               const Image* fixed_mask, const FitConfig& config)
    : frame_(frame), synthetic_(synthetic), moving_mask_(moving_mask), fixed_mask_(fixed_mask), config_(config)
{
    if (!frame.same_shape(synthetic)) {
        throw Error(ErrorCode::ShapeMismatch, "frame and synthetic image differ in size");
    }
    if ((moving_mask == nullptr) != (fixed_mask == nullptr)) {
        throw Error(ErrorCode::InvalidMask, "segmentation term needs both moving and fixed masks");
    }
}

LossBreakdown FrameObjective::evaluate(const VectorField& velocity) const
{
    const DisplacementField u = integrate_velocity(velocity, config_.integration_steps);
    LossBreakdown t;
    t.fit = mean_squared_difference(synthetic_, warp(frame_, u));
    t.smooth = smoothness_loss(velocity);
    if (moving_mask_) {
        t.seg = soft_dice_loss(*fixed_mask_, warp(*moving_mask_, u));
    }
    return weigh(t, config_);
}

LossBreakdown FrameObjective::evaluate(const VectorField& velocity, VectorField& gradient) const
{
    IntegrationTape tape;
    const DisplacementField u = integrate_velocity(velocity, config_.integration_steps, &tape);
    const int rows = frame_.rows();
    const int cols = frame_.cols();
    const double voxels = static_cast<double>(frame_.size());

    VectorField image_slope;
    const Image registered = warp(frame_, u, image_slope);
    LossBreakdown t;
    t.fit = mean_squared_difference(synthetic_, registered);
    t.smooth = smoothness_loss(velocity);

    // d total / d u, voxelwise.
    VectorField grad_u(rows, cols);
    const double fit_scale = -2.0 * config_.lambda_fit / voxels;
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            const double d_reg = fit_scale * (synthetic_(r, c) - registered(r, c));
            grad_u.at(r, c, 0) = d_reg * image_slope.at(r, c, 0);
            grad_u.at(r, c, 1) = d_reg * image_slope.at(r, c, 1);
        }
    }
    if (moving_mask_) {
        VectorField mask_slope;
        const Image warped = warp(*moving_mask_, u, mask_slope);
        const DiceSums s = dice_sums(*fixed_mask_, warped);
        t.seg = dice_from_sums(s);
        const double denom = s.fixed + s.moving + kDiceEpsilon;
        const double inv_sq = 1.0 / (denom * denom);
        for (int r = 0; r < rows; ++r) {
            for (int c = 0; c < cols; ++c) {
                const double d_warped =
                    -2.0 * config_.lambda_seg * ((*fixed_mask_)(r, c) * denom - s.overlap) * inv_sq;
                grad_u.at(r, c, 0) += d_warped * mask_slope.at(r, c, 0);
                grad_u.at(r, c, 1) += d_warped * mask_slope.at(r, c, 1);
            }
        }
    }
    gradient = integrate_velocity_adjoint(tape, grad_u);
    accumulate_smoothness_gradient(velocity, config_.lambda_smooth, gradient);
    return weigh(t, config_);
}

VectorField FrameObjective::numeric_gradient(const VectorField& velocity, double step) const
{
    VectorField grad(velocity.rows(), velocity.cols());
    VectorField probe = velocity;
    auto comps = probe.components();
    auto out = grad.components();
    for (std::size_t j = 0; j < comps.size(); ++j) {
        const double saved = comps[j];
        comps[j] = saved + step;
        const LossBreakdown up = evaluate(probe);
        comps[j] = saved - step;
        const LossBreakdown down = evaluate(probe);
        comps[j] = saved;
        // Difference each term before weighting so a large seg value does
        // not swamp the smaller terms in rounding.
        const double denom = 2.0 * step;
        out[j] = config_.lambda_fit * ((up.fit - down.fit) / denom) +
                 config_.lambda_smooth * ((up.smooth - down.smooth) / denom) +
                 config_.lambda_seg * ((up.seg - down.seg) / denom);
    }
    return grad;
}

std::vector<Image> masks_as_images(const MaskSet& masks)
{
    std::vector<Image> out;
    out.reserve(masks.masks.size());
    for (const Mask& m : masks.masks) {
        Image img(m.rows(), m.cols());
        for (std::size_t i = 0; i < m.size(); ++i) {
            img[i] = m[i] ? 1.0 : 0.0;
        }
        out.push_back(std::move(img));
    }
    return out;
}

namespace {

void check_problem(const ImageSeries& series, const ParametricMaps& maps, const VelocityFieldSet& fields,
                   const MaskSet* masks)
{
    validate_series(series);
    const int rows = series.rows();
    const int cols = series.cols();
    if (maps.t1.rows() != rows || maps.t1.cols() != cols || !maps.t1.same_shape(maps.m0)) {
        throw Error(ErrorCode::ShapeMismatch, "maps differ in size from the series");
    }
    if (fields.frames() != series.size() || fields.rows() != rows || fields.cols() != cols) {
        throw Error(ErrorCode::ShapeMismatch, "velocity fields do not match the series");
    }
    if (masks) {
        validate_masks(*masks, series.size(), rows, cols);
    }
}

}  // namespace

LossBreakdown total_loss(const ImageSeries& series, const ParametricMaps& maps, const VelocityFieldSet& fields,
                         const MaskSet* masks, const FitConfig& config)
{
    check_problem(series, maps, fields, masks);
    const std::vector<Image> mask_images = masks ? masks_as_images(*masks) : std::vector<Image>{};
    return total_loss(series, maps, fields, mask_images, config);
}

LossBreakdown total_loss(const ImageSeries& series, const ParametricMaps& maps, const VelocityFieldSet& fields,
                         std::span<const Image> mask_images, const FitConfig& config)
{
    check_problem(series, maps, fields, nullptr);
    const bool masks = !mask_images.empty();
    if (masks && mask_images.size() != series.frames.size()) {
        throw Error(ErrorCode::ShapeMismatch, "mask count does not match frame count");
    }
    for (const Image& m : mask_images) {
        if (!m.same_shape(series.frames[0])) {
            throw Error(ErrorCode::ShapeMismatch, "mask differs in size from the series");
        }
    }
    const std::vector<Image> synthetic = synthesize(maps, series.timestamps_ms);
    const int ref = fields.reference_index();
    LossBreakdown sum;
    for (int i = 0; i < series.size(); ++i) {
        if (i == ref) {
            sum.fit += mean_squared_difference(synthetic[i], series.frames[i]);
            continue;
        }
        const FrameObjective objective(series.frames[i], synthetic[i], masks ? &mask_images[i] : nullptr,
                                       masks ? &mask_images[ref] : nullptr, config);
        const LossBreakdown t = objective.evaluate(fields.field(i));
        sum.fit += t.fit;
        sum.smooth += t.smooth;
        sum.seg += t.seg;
    }
    return weigh(sum, config);
}

LossGradient total_loss_gradient(const ImageSeries& series, const ParametricMaps& maps,
                                 const VelocityFieldSet& fields, const MaskSet* masks, const FitConfig& config)
{
    check_problem(series, maps, fields, masks);
    const int rows = series.rows();
    const int cols = series.cols();
    const double voxels = static_cast<double>(rows) * cols;
    const std::vector<Image> synthetic = synthesize(maps, series.timestamps_ms);
    std::vector<Image> mask_images;
    if (masks) {
        mask_images = masks_as_images(*masks);
    }
    const int ref = fields.reference_index();

    LossGradient out;
    out.m0 = Image(rows, cols);
    out.t1 = Image(rows, cols);
    std::vector<Image> registered(series.size());
    for (int i = 0; i < series.size(); ++i) {
        if (i == ref) {
            registered[i] = series.frames[i];
            out.loss.fit += mean_squared_difference(synthetic[i], registered[i]);
            continue;
        }
        const FrameObjective objective(series.frames[i], synthetic[i], masks ? &mask_images[i] : nullptr,
                                       masks ? &mask_images[ref] : nullptr, config);
        VectorField g;
        LossBreakdown t;
        if (config.gradient_mode == GradientMode::Analytic) {
            t = objective.evaluate(fields.field(i), g);
        } else {
            t = objective.evaluate(fields.field(i));
            g = objective.numeric_gradient(fields.field(i));
        }
        out.loss.fit += t.fit;
        out.loss.smooth += t.smooth;
        out.loss.seg += t.seg;
        out.velocity.push_back(std::move(g));
        registered[i] = warp(series.frames[i], integrate_velocity(fields.field(i), config.integration_steps));
    }
    out.loss = weigh(out.loss, config);

    if (config.gradient_mode == GradientMode::Analytic) {
        const double scale = 2.0 * config.lambda_fit / voxels;
        for (int i = 0; i < series.size(); ++i) {
            const double t = series.timestamps_ms[i];
            for (std::size_t p = 0; p < out.m0.size(); ++p) {
                const double t1 = maps.t1[p];
                if (!(t1 > 0.0)) {
                    continue;
                }
                const SignalJacobian j = ir_signal_jacobian(maps.m0[p], t1, t);
                const double residual = scale * (synthetic[i][p] - registered[i][p]);
                out.m0[p] += residual * j.d_m0;
                out.t1[p] += residual * j.d_t1;
            }
        }
    } else {
        // Map values only enter the fit term.
        ParametricMaps probe = maps;
        const double step_m0 = 1e-6;
        auto fit_term = [&]() {
            return config.lambda_fit * fit_loss(synthesize(probe, series.timestamps_ms), registered);
        };
        for (std::size_t p = 0; p < out.m0.size(); ++p) {
            const double m0 = probe.m0[p];
            probe.m0[p] = m0 + step_m0;
            const double up = fit_term();
            probe.m0[p] = m0 - step_m0;
            const double down = fit_term();
            probe.m0[p] = m0;
            out.m0[p] = (up - down) / (2.0 * step_m0);

            const double t1 = probe.t1[p];
            const double step_t1 = 1e-6 * std::max(1.0, std::abs(t1));
            probe.t1[p] = t1 + step_t1;
            const double up_t1 = fit_term();
            probe.t1[p] = t1 - step_t1;
            const double down_t1 = fit_term();
            probe.t1[p] = t1;
            out.t1[p] = (up_t1 - down_t1) / (2.0 * step_t1);
        }
    }
    return out;
}

}  // namespace t1moco
