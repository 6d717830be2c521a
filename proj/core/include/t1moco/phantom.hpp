#pragma once

#include <cstdint>
#include <vector>

#include "t1moco/deformation.hpp"
#include "t1moco/series.hpp"

namespace t1moco {

struct TissueProperties {
    double t1_ms;
    double m0;
};

struct PhantomConfig {
    int rows = 160;
    int cols = 160;
    int frames = 11;
    std::vector<double> timestamps_ms;  ///< empty: default_timestamps(frames)
    Spacing spacing{2.1, 2.1};

    TissueProperties myocardium{1100.0, 0.75};
    TissueProperties blood{1700.0, 1.0};
    TissueProperties background{300.0, 0.15};
    double t1_variation = 0.04;  ///< relative amplitude of smooth intra-tissue T1 variation

    /// Radii as fractions of min(rows, cols).
    double blood_radius = 0.11;
    double myocardium_radius = 0.18;

    /// Per-frame rigid shift magnitude drawn uniformly from this range (voxels).
    double motion_min = 3.0;
    double motion_max = 5.0;
    /// Peak magnitude of the additional smooth non-rigid displacement (voxels, <= 2).
    double deformation = 1.0;

    /// Peak M0 over noise standard deviation; 0 disables noise.
    double snr = 30.0;
};

/// Synthetic short-axis scene with ground truth.
struct PhantomScene {
    ParametricMaps truth_maps;       ///< reference (frame 0) anatomy
    MaskSet truth_masks;             ///< myocardium ring as seen in each frame
    std::vector<DisplacementField> truth_motion;  ///< frame i samples clean anatomy at p + d_i(p)
    Mask tissue;                     ///< blood pool and myocardium in the reference frame
    ImageSeries series;
    std::uint64_t seed = 0;

    bool operator==(const PhantomScene&) const = default;
};

/// n inversion times, geometric from 100 ms to 4000 ms.
std::vector<double> default_timestamps(int n);

/// Deterministic in (config, seed). Throws InvalidConfig for images smaller
/// than 64x64, fewer than 3 frames, or out-of-range parameters.
PhantomScene generate_phantom(const PhantomConfig& config, std::uint64_t seed);

}  // namespace t1moco
