#pragma once

#include <vector>

#include "t1moco/grid.hpp"

namespace t1moco {

/// Displacements u(p) in voxel units; a point p maps to p + u(p).
using DisplacementField = VectorField;

/// Clamp-to-edge bilinear stencil around a (row, col) sampling position.
struct Bilinear {
    int r0 = 0, r1 = 0, c0 = 0, c1 = 0;
    double fr = 0.0, fc = 0.0;
    /// False when the coordinate was clamped; the sample is then constant
    /// along that axis.
    bool row_free = true, col_free = true;

    static Bilinear at(int rows, int cols, double row, double col) noexcept;

    double weight00() const noexcept { return (1.0 - fr) * (1.0 - fc); }
    double weight01() const noexcept { return (1.0 - fr) * fc; }
    double weight10() const noexcept { return fr * (1.0 - fc); }
    double weight11() const noexcept { return fr * fc; }
};

double sample(const Image& image, double row, double col) noexcept;

/// Sample plus its spatial derivative with respect to the sampling position.
double sample(const Image& image, double row, double col, Vec2& gradient) noexcept;

/// Backward warp: out(p) = image(p + u(p)).
Image warp(const Image& image, const DisplacementField& u);

/// As warp, also returning d out(p) / d u(p) for every voxel.
Image warp(const Image& image, const DisplacementField& u, VectorField& position_gradient);

Image warp(const Mask& mask, const DisplacementField& u);

/// (a o b)(p) = b(p) + a(p + b(p)).
DisplacementField compose(const DisplacementField& a, const DisplacementField& b);

/// Intermediate fields of scaling-and-squaring, kept for the adjoint pass.
struct IntegrationTape {
    std::vector<DisplacementField> stages;  ///< stages[k] is the field before squaring k
    double scale = 1.0;                     ///< 2^-steps
};

/// Exponential map of a stationary velocity field by scaling and squaring:
/// u = v / 2^steps, then u <- u o u, `steps` times.
DisplacementField integrate_velocity(const VectorField& velocity, int steps, IntegrationTape* tape = nullptr);

/// Pulls dL/du of the integrated field back to dL/dv.
VectorField integrate_velocity_adjoint(const IntegrationTape& tape, const VectorField& grad_displacement);

/// det(I + grad u); central differences inside, one-sided on the border.
Image jacobian_determinant(const DisplacementField& u);

/// Fraction of voxels at least `margin` from the border with det > 0.
double positive_jacobian_fraction(const DisplacementField& u, int margin = 1);

/// 2x2 box average; odd trailing rows/columns are folded into the last cell.
Image downsample(const Image& image);

/// Bilinear resize onto a (rows, cols) grid with pixel-centre alignment.
Image resample(const Image& image, int rows, int cols);

/// Resize a field to (rows, cols) and rescale its components to the new
/// voxel pitch.
VectorField resample_field(const VectorField& field, int rows, int cols);

/// Separable Gaussian blur of each component, truncated at 3 sigma with
/// zero padding (a symmetric operator).
VectorField gaussian_smooth(const VectorField& field, double sigma);

}  // namespace t1moco
