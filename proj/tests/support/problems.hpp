#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "t1moco/deformation.hpp"
#include "t1moco/grid.hpp"
#include "t1moco/series.hpp"
#include "t1moco/signal_model.hpp"

namespace t1moco::testing {

/// Smooth random field: a sum of low-frequency sinusoids with peak `amplitude`.
inline VectorField smooth_field(int rows, int cols, double amplitude, std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> phase(0.0, 6.283185307179586);
    std::uniform_real_distribution<double> weight(-1.0, 1.0);
    VectorField f(rows, cols);
    for (int k = 0; k < 2; ++k) {
        const double a = weight(rng), b = weight(rng), pa = phase(rng), pb = phase(rng);
        for (int r = 0; r < rows; ++r) {
            for (int c = 0; c < cols; ++c) {
                const double y = static_cast<double>(r) / rows, x = static_cast<double>(c) / cols;
                f.at(r, c, k) = amplitude * 0.5 * (a * std::sin(6.283185307179586 * y + pa) + b * std::cos(6.283185307179586 * x + pb));
            }
        }
    }
    return f;
}

inline Mask disk(int rows, int cols, double cr, double cc, double radius)
{
    Mask m(rows, cols);
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            m(r, c) = std::hypot(r - cr, c - cc) <= radius ? 1 : 0;
        }
    }
    return m;
}

inline Mask threshold(const Image& image, double level = 0.5)
{
    Mask m(image.rows(), image.cols());
    for (std::size_t p = 0; p < m.size(); ++p) m[p] = image[p] >= level ? 1 : 0;
    return m;
}

inline Mask random_mask(int rows, int cols, double density, std::mt19937_64& rng)
{
    std::bernoulli_distribution on(density);
    Mask m(rows, cols);
    for (auto& v : m.values()) v = on(rng) ? 1 : 0;
    return m;
}

/// A small registration problem: smooth maps, frames synthesised from them
/// and displaced by smooth motion, disc masks moved with the frames.
struct SmallProblem {
    ImageSeries series;
    ParametricMaps maps;
    MaskSet masks;
    VelocityFieldSet fields;
};

inline SmallProblem small_problem(int size, int frames, std::uint64_t seed, double velocity_amplitude = 0.6)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    SmallProblem p;
    p.maps.t1 = Image(size, size);
    p.maps.m0 = Image(size, size);
    const double c = (size - 1) / 2.0;
    for (int r = 0; r < size; ++r) {
        for (int k = 0; k < size; ++k) {
            const double d = std::hypot(r - c, k - c) / size;
            p.maps.t1(r, k) = 600.0 + 1200.0 * std::exp(-8.0 * d * d) + 100.0 * unit(rng);
            p.maps.m0(r, k) = 0.4 + 0.5 * std::exp(-6.0 * d * d) + 0.05 * unit(rng);
        }
    }
    p.series.timestamps_ms.resize(frames);
    for (int i = 0; i < frames; ++i) {
        p.series.timestamps_ms[i] = 100.0 * std::pow(40.0, static_cast<double>(i) / (frames - 1));
    }
    const std::vector<Image> clean = synthesize(p.maps, p.series.timestamps_ms);
    const Mask ring = disk(size, size, c, c, size * 0.3);
    std::normal_distribution<double> noise(0.0, 0.01);
    p.fields = VelocityFieldSet(frames, size, size, 0);
    for (int i = 0; i < frames; ++i) {
        if (i == 0) {
            p.series.frames.push_back(clean[i]);
            p.masks.masks.push_back(ring);
            continue;
        }
        const DisplacementField motion = smooth_field(size, size, 1.5, rng);
        Image f = warp(clean[i], motion);
        for (auto& v : f.values()) v = std::clamp(v + noise(rng), -1.0, 1.0);
        p.series.frames.push_back(f);
        p.masks.masks.push_back(threshold(warp(ring, motion)));
        p.fields.field(i) = smooth_field(size, size, velocity_amplitude, rng);
    }
    return p;
}

}  // namespace t1moco::testing
