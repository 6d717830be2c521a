#include "t1moco/deformation.hpp"

#include <algorithm>
#include <cmath>

#include "t1moco/error.hpp"
#include "t1moco/parallel.hpp"

namespace t1moco {

namespace {

void clamp_axis(int n, double x, int& i0, int& i1, double& frac, bool& free) noexcept
{
    free = true;
    if (!(x > 0.0)) {
        free = x == 0.0;
        x = 0.0;
    } else if (x >= n - 1) {
        free = x == n - 1;
        x = n - 1;
    }
    i0 = static_cast<int>(std::floor(x));
    i1 = std::min(i0 + 1, n - 1);
    frac = x - i0;
}

void require_same_shape(const VectorField& a, int rows, int cols)
{
    if (a.rows() != rows || a.cols() != cols) {
        throw Error(ErrorCode::ShapeMismatch, "field and image differ in size");
    }
}

}  // namespace

Bilinear Bilinear::at(int rows, int cols, double row, double col) noexcept
{
    Bilinear b;
    clamp_axis(rows, row, b.r0, b.r1, b.fr, b.row_free);
    clamp_axis(cols, col, b.c0, b.c1, b.fc, b.col_free);
    return b;
}

double sample(const Image& image, double row, double col) noexcept
{
    const Bilinear b = Bilinear::at(image.rows(), image.cols(), row, col);
    if (b.fr == 0.0 && b.fc == 0.0) {
        return image(b.r0, b.c0);
    }
    const double top = (1.0 - b.fc) * image(b.r0, b.c0) + b.fc * image(b.r0, b.c1);
    const double bottom = (1.0 - b.fc) * image(b.r1, b.c0) + b.fc * image(b.r1, b.c1);
    return (1.0 - b.fr) * top + b.fr * bottom;
}

double sample(const Image& image, double row, double col, Vec2& gradient) noexcept
{
    const Bilinear b = Bilinear::at(image.rows(), image.cols(), row, col);
    const double i00 = image(b.r0, b.c0);
    const double i01 = image(b.r0, b.c1);
    const double i10 = image(b.r1, b.c0);
    const double i11 = image(b.r1, b.c1);
    const double top = (1.0 - b.fc) * i00 + b.fc * i01;
    const double bottom = (1.0 - b.fc) * i10 + b.fc * i11;
    gradient.row = b.row_free && b.r1 != b.r0 ? bottom - top : 0.0;
    gradient.col = b.col_free && b.c1 != b.c0 ? (1.0 - b.fr) * (i01 - i00) + b.fr * (i11 - i10) : 0.0;
    if (b.fr == 0.0 && b.fc == 0.0) {
        return i00;
    }
    return (1.0 - b.fr) * top + b.fr * bottom;
}

Image warp(const Image& image, const DisplacementField& u)
{
    require_same_shape(u, image.rows(), image.cols());
    Image out(image.rows(), image.cols());
    parallel_rows(image.rows(), [&](int begin, int end) {
        for (int r = begin; r < end; ++r) {
            for (int c = 0; c < image.cols(); ++c) {
                out(r, c) = sample(image, r + u.at(r, c, 0), c + u.at(r, c, 1));
            }
        }
    });
    return out;
}

Image warp(const Image& image, const DisplacementField& u, VectorField& position_gradient)
{
    require_same_shape(u, image.rows(), image.cols());
    Image out(image.rows(), image.cols());
    position_gradient = VectorField(image.rows(), image.cols());
    parallel_rows(image.rows(), [&](int begin, int end) {
        for (int r = begin; r < end; ++r) {
            for (int c = 0; c < image.cols(); ++c) {
                Vec2 g;
                out(r, c) = sample(image, r + u.at(r, c, 0), c + u.at(r, c, 1), g);
                position_gradient.set(r, c, g);
            }
        }
    });
    return out;
}

Image warp(const Mask& mask, const DisplacementField& u)
{
    Image as_real(mask.rows(), mask.cols());
    for (std::size_t i = 0; i < mask.size(); ++i) {
        as_real[i] = mask[i] ? 1.0 : 0.0;
    }
    return warp(as_real, u);
}

namespace {

// Bilinear sample of both components of a field at (row, col).
Vec2 sample_field(const VectorField& f, double row, double col) noexcept
{
    const Bilinear b = Bilinear::at(f.rows(), f.cols(), row, col);
    Vec2 out;
    for (int k = 0; k < 2; ++k) {
        const double top = (1.0 - b.fc) * f.at(b.r0, b.c0, k) + b.fc * f.at(b.r0, b.c1, k);
        const double bottom = (1.0 - b.fc) * f.at(b.r1, b.c0, k) + b.fc * f.at(b.r1, b.c1, k);
        const double v = (b.fr == 0.0 && b.fc == 0.0) ? f.at(b.r0, b.c0, k) : (1.0 - b.fr) * top + b.fr * bottom;
        (k == 0 ? out.row : out.col) = v;
    }
    return out;
}

}  // namespace

DisplacementField compose(const DisplacementField& a, const DisplacementField& b)
{
    if (!a.same_shape(b)) {
        throw Error(ErrorCode::ShapeMismatch, "composed fields differ in size");
    }
    DisplacementField out(a.rows(), a.cols());
    parallel_rows(a.rows(), [&](int begin, int end) {
        for (int r = begin; r < end; ++r) {
            for (int c = 0; c < a.cols(); ++c) {
                const Vec2 inner = b(r, c);
                const Vec2 outer = sample_field(a, r + inner.row, c + inner.col);
                out.set(r, c, {inner.row + outer.row, inner.col + outer.col});
            }
        }
    });
    return out;
}

DisplacementField integrate_velocity(const VectorField& velocity, int steps, IntegrationTape* tape)
{
    if (steps < 1) {
        throw Error(ErrorCode::InvalidConfig, "integration needs at least one squaring step");
    }
    const double scale = std::ldexp(1.0, -steps);
    DisplacementField u = velocity;
    for (double& x : u.components()) {
        x *= scale;
    }
    if (tape) {
        tape->stages.clear();
        tape->scale = scale;
    }
    for (int k = 0; k < steps; ++k) {
        if (tape) {
            tape->stages.push_back(u);
        }
        u = compose(u, u);
    }
    return u;
}

VectorField integrate_velocity_adjoint(const IntegrationTape& tape, const VectorField& grad_displacement)
{
    VectorField grad = grad_displacement;
    for (auto stage = tape.stages.rbegin(); stage != tape.stages.rend(); ++stage) {
        const DisplacementField& u = *stage;
        const int rows = u.rows();
        const int cols = u.cols();
        // next(p) = u(p) + u(p + u(p)); the direct term passes grad through.
        VectorField prev = grad;
        // Scatter through the interpolation weights is serial so the
        // accumulation order is fixed.
        for (int r = 0; r < rows; ++r) {
            for (int c = 0; c < cols; ++c) {
                const double g0 = grad.at(r, c, 0);
                const double g1 = grad.at(r, c, 1);
                if (g0 == 0.0 && g1 == 0.0) {
                    continue;
                }
                const double qr = r + u.at(r, c, 0);
                const double qc = c + u.at(r, c, 1);
                const Bilinear b = Bilinear::at(rows, cols, qr, qc);
                const double w[4] = {b.weight00(), b.weight01(), b.weight10(), b.weight11()};
                const int cr[4] = {b.r0, b.r0, b.r1, b.r1};
                const int cc[4] = {b.c0, b.c1, b.c0, b.c1};
                for (int j = 0; j < 4; ++j) {
                    prev.at(cr[j], cc[j], 0) += w[j] * g0;
                    prev.at(cr[j], cc[j], 1) += w[j] * g1;
                }
                // Position dependence of the inner sample.
                double d_row = 0.0;
                double d_col = 0.0;
                for (int k = 0; k < 2; ++k) {
                    const double gk = k == 0 ? g0 : g1;
                    const double i00 = u.at(b.r0, b.c0, k);
                    const double i01 = u.at(b.r0, b.c1, k);
                    const double i10 = u.at(b.r1, b.c0, k);
                    const double i11 = u.at(b.r1, b.c1, k);
                    if (b.row_free && b.r1 != b.r0) {
                        const double top = (1.0 - b.fc) * i00 + b.fc * i01;
                        const double bottom = (1.0 - b.fc) * i10 + b.fc * i11;
                        d_row += gk * (bottom - top);
                    }
                    if (b.col_free && b.c1 != b.c0) {
                        d_col += gk * ((1.0 - b.fr) * (i01 - i00) + b.fr * (i11 - i10));
                    }
                }
                prev.at(r, c, 0) += d_row;
                prev.at(r, c, 1) += d_col;
            }
        }
        grad = std::move(prev);
    }
    for (double& x : grad.components()) {
        x *= tape.scale;
    }
    return grad;
}

Image jacobian_determinant(const DisplacementField& u)
{
    const int rows = u.rows();
    const int cols = u.cols();
    if (rows < 3 || cols < 3) {
        throw Error(ErrorCode::ShapeMismatch, "jacobian needs at least 3x3 voxels");
    }
    auto diff = [&](int r, int c, int k, bool along_rows) {
        if (along_rows) {
            if (r == 0) return u.at(1, c, k) - u.at(0, c, k);
            if (r == rows - 1) return u.at(rows - 1, c, k) - u.at(rows - 2, c, k);
            return 0.5 * (u.at(r + 1, c, k) - u.at(r - 1, c, k));
        }
        if (c == 0) return u.at(r, 1, k) - u.at(r, 0, k);
        if (c == cols - 1) return u.at(r, cols - 1, k) - u.at(r, cols - 2, k);
        return 0.5 * (u.at(r, c + 1, k) - u.at(r, c - 1, k));
    };
    Image det(rows, cols);
    parallel_rows(rows, [&](int begin, int end) {
        for (int r = begin; r < end; ++r) {
            for (int c = 0; c < cols; ++c) {
                const double a = 1.0 + diff(r, c, 0, true);
                const double b = diff(r, c, 0, false);
                const double d = diff(r, c, 1, true);
                const double e = 1.0 + diff(r, c, 1, false);
                det(r, c) = a * e - b * d;
            }
        }
    });
    return det;
}

double positive_jacobian_fraction(const DisplacementField& u, int margin)
{
    const Image det = jacobian_determinant(u);
    long total = 0;
    long positive = 0;
    for (int r = margin; r < u.rows() - margin; ++r) {
        for (int c = margin; c < u.cols() - margin; ++c) {
            ++total;
            positive += det(r, c) > 0.0 ? 1 : 0;
        }
    }
    return total > 0 ? static_cast<double>(positive) / total : 1.0;
}

Image downsample(const Image& image)
{
    const int rows = std::max(1, image.rows() / 2);
    const int cols = std::max(1, image.cols() / 2);
    Image out(rows, cols);
    for (int r = 0; r < rows; ++r) {
        const int r_end = r == rows - 1 ? image.rows() : 2 * r + 2;
        for (int c = 0; c < cols; ++c) {
            const int c_end = c == cols - 1 ? image.cols() : 2 * c + 2;
            double sum = 0.0;
            int count = 0;
            for (int rr = 2 * r; rr < r_end; ++rr) {
                for (int cc = 2 * c; cc < c_end; ++cc) {
                    sum += image(rr, cc);
                    ++count;
                }
            }
            out(r, c) = sum / count;
        }
    }
    return out;
}

Image resample(const Image& image, int rows, int cols)
{
    Image out(rows, cols);
    const double sr = static_cast<double>(image.rows()) / rows;
    const double sc = static_cast<double>(image.cols()) / cols;
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            out(r, c) = sample(image, (r + 0.5) * sr - 0.5, (c + 0.5) * sc - 0.5);
        }
    }
    return out;
}

VectorField resample_field(const VectorField& field, int rows, int cols)
{
    VectorField out(rows, cols);
    const double sr = static_cast<double>(field.rows()) / rows;
    const double sc = static_cast<double>(field.cols()) / cols;
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            const Vec2 v = sample_field(field, (r + 0.5) * sr - 0.5, (c + 0.5) * sc - 0.5);
            out.set(r, c, {v.row / sr, v.col / sc});
        }
    }
    return out;
}

VectorField gaussian_smooth(const VectorField& field, double sigma)
{
    if (!(sigma > 0.0)) {
        return field;
    }
    const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
    std::vector<double> kernel(2 * radius + 1);
    double norm = 0.0;
    for (int k = -radius; k <= radius; ++k) {
        kernel[k + radius] = std::exp(-0.5 * k * k / (sigma * sigma));
        norm += kernel[k + radius];
    }
    for (double& w : kernel) w /= norm;

    const int rows = field.rows();
    const int cols = field.cols();
    VectorField tmp(rows, cols);
    VectorField out(rows, cols);
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            for (int k = 0; k < 2; ++k) {
                double acc = 0.0;
                for (int j = std::max(-radius, -c); j <= std::min(radius, cols - 1 - c); ++j) {
                    acc += kernel[j + radius] * field.at(r, c + j, k);
                }
                tmp.at(r, c, k) = acc;
            }
        }
    }
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            for (int k = 0; k < 2; ++k) {
                double acc = 0.0;
                for (int j = std::max(-radius, -r); j <= std::min(radius, rows - 1 - r); ++j) {
                    acc += kernel[j + radius] * tmp.at(r + j, c, k);
                }
                out.at(r, c, k) = acc;
            }
        }
    }
    return out;
}

}  // namespace t1moco
