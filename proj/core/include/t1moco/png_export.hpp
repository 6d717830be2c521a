#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "t1moco/series.hpp"

namespace t1moco {

using Rgb = std::array<std::uint8_t, 3>;

/// 256-entry colormap: piecewise-linear through dark blue, blue, cyan,
/// yellow, red and dark red (a jet-style ramp without pure black).
const std::array<Rgb, 256>& t1_colormap();

/// Colormap index for a T1 value, clamping to [lo, hi].
int colormap_index(double t1_ms, double lo_ms, double hi_ms);

/// RGB pixels, row-major; sentinel voxels (t1 <= 0) are black.
std::vector<std::uint8_t> render_t1(const ParametricMaps& maps, double lo_ms, double hi_ms);

/// 8-bit RGB PNG. Throws InvalidConfig unless lo < hi, IoError on failure.
void export_t1_png(const ParametricMaps& maps, double lo_ms, double hi_ms, const std::filesystem::path& path);

}  // namespace t1moco
