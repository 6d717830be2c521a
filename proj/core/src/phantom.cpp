#include "t1moco/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "t1moco/error.hpp"
#include "t1moco/signal_model.hpp"

namespace t1moco {

namespace {

constexpr double kFirstInversionMs = 100.0;
constexpr double kLastInversionMs = 4000.0;
constexpr int kDeformationModes = 3;

void check(const PhantomConfig& c)
{
    auto fail = [](const std::string& what) { throw Error(ErrorCode::InvalidConfig, what); };
    if (c.rows < 64 || c.cols < 64) fail("phantom needs at least 64x64 voxels");
    if (c.frames < kMinFrames) fail("phantom needs at least 3 frames");
    if (!c.timestamps_ms.empty() && static_cast<int>(c.timestamps_ms.size()) != c.frames) {
        fail("timestamp count does not match frame count");
    }
    if (!(c.motion_min >= 0.0) || !(c.motion_max >= c.motion_min)) fail("motion range must satisfy 0 <= min <= max");
    if (!(c.deformation >= 0.0) || c.deformation > 2.0) fail("deformation amplitude must be in [0, 2]");
    if (!(c.snr >= 0.0)) fail("snr must be >= 0");
    if (!(c.t1_variation >= 0.0) || c.t1_variation >= 0.5) fail("t1_variation must be in [0, 0.5)");
    if (!(c.blood_radius > 0.0) || !(c.myocardium_radius > c.blood_radius) || c.myocardium_radius >= 0.45) {
        fail("radii must satisfy 0 < blood < myocardium < 0.45");
    }
    for (const TissueProperties* t : {&c.myocardium, &c.blood, &c.background}) {
        if (!(t->t1_ms > 0.0) || !(t->m0 >= 0.0)) fail("tissue t1 must be positive and m0 nonnegative");
    }
}

// Smooth random displacement: a few low-frequency sinusoids per component,
// scaled so the peak magnitude equals `amplitude`.
DisplacementField smooth_deformation(int rows, int cols, double amplitude, std::mt19937_64& rng)
{
    DisplacementField d(rows, cols);
    if (amplitude <= 0.0) {
        return d;
    }
    std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
    std::uniform_real_distribution<double> weight(-1.0, 1.0);
    std::uniform_int_distribution<int> freq(1, 2);
    for (int k = 0; k < 2; ++k) {
        for (int m = 0; m < kDeformationModes; ++m) {
            const double fy = freq(rng);
            const double fx = freq(rng);
            const double ph = phase(rng);
            const double w = weight(rng);
            for (int r = 0; r < rows; ++r) {
                for (int c = 0; c < cols; ++c) {
                    d.at(r, c, k) += w * std::sin(std::numbers::pi * (fy * r / rows + fx * c / cols) + ph);
                }
            }
        }
    }
    double peak = 0.0;
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            peak = std::max(peak, std::hypot(d.at(r, c, 0), d.at(r, c, 1)));
        }
    }
    if (peak > 0.0) {
        for (double& x : d.components()) x *= amplitude / peak;
    }
    return d;
}

}  // namespace

std::vector<double> default_timestamps(int n)
{
    if (n < kMinFrames) {
        throw Error(ErrorCode::TooFewFrames, "need at least 3 inversion times");
    }
    std::vector<double> t(n);
    const double ratio = kLastInversionMs / kFirstInversionMs;
    for (int k = 0; k < n; ++k) {
        t[k] = kFirstInversionMs * std::pow(ratio, static_cast<double>(k) / (n - 1));
    }
    t.front() = kFirstInversionMs;
    t.back() = kLastInversionMs;
    return t;
}

PhantomScene generate_phantom(const PhantomConfig& config, std::uint64_t seed)
{
    check(config);
    const int rows = config.rows;
    const int cols = config.cols;
    const int n = config.frames;
    std::mt19937_64 rng(seed);

    PhantomScene scene;
    scene.seed = seed;
    scene.series.timestamps_ms = config.timestamps_ms.empty() ? default_timestamps(n) : config.timestamps_ms;
    scene.series.spacing = config.spacing;

    // Anatomy in the reference frame.
    const double size = std::min(rows, cols);
    const double r_blood = config.blood_radius * size;
    const double r_myo = config.myocardium_radius * size;
    const double cy = 0.5 * (rows - 1);
    const double cx = 0.5 * (cols - 1);
    ParametricMaps& truth = scene.truth_maps;
    truth.t1 = Image(rows, cols);
    truth.m0 = Image(rows, cols);
    scene.tissue = Mask(rows, cols);
    Image myocardium(rows, cols);
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            const double dy = r - cy;
            const double dx = c - cx;
            const double radius = std::hypot(dy, dx);
            const double angle = std::atan2(dy, dx);
            if (radius < r_blood) {
                truth.t1(r, c) = config.blood.t1_ms * (1.0 + 0.5 * config.t1_variation * std::cos(2.0 * std::numbers::pi * dx / size));
                truth.m0(r, c) = config.blood.m0;
                scene.tissue(r, c) = 1;
            } else if (radius < r_myo) {
                truth.t1(r, c) = config.myocardium.t1_ms * (1.0 + config.t1_variation * std::cos(angle));
                truth.m0(r, c) = config.myocardium.m0;
                scene.tissue(r, c) = 1;
                myocardium(r, c) = 1.0;
            } else {
                truth.t1(r, c) = config.background.t1_ms;
                truth.m0(r, c) = config.background.m0;
            }
        }
    }

    std::uniform_real_distribution<double> unit(0.0, 1.0);
    scene.truth_motion.assign(n, DisplacementField(rows, cols));
    for (int i = 1; i < n; ++i) {
        const double magnitude = config.motion_min + (config.motion_max - config.motion_min) * unit(rng);
        const double direction = 2.0 * std::numbers::pi * unit(rng);
        DisplacementField d = smooth_deformation(rows, cols, config.deformation, rng);
        for (int r = 0; r < rows; ++r) {
            for (int c = 0; c < cols; ++c) {
                d.at(r, c, 0) += magnitude * std::sin(direction);
                d.at(r, c, 1) += magnitude * std::cos(direction);
            }
        }
        scene.truth_motion[i] = std::move(d);
    }

    const std::vector<Image> clean = synthesize(truth, scene.series.timestamps_ms);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const double peak_m0 = std::max({config.myocardium.m0, config.blood.m0, config.background.m0});
    const double sigma = config.snr > 0.0 ? peak_m0 / config.snr : 0.0;
    scene.series.frames.resize(n);
    scene.truth_masks.masks.resize(n);
    for (int i = 0; i < n; ++i) {
        Image frame = i == 0 ? clean[i] : warp(clean[i], scene.truth_motion[i]);
        if (sigma > 0.0) {
            for (double& v : frame.values()) v += sigma * gauss(rng);
        }
        scene.series.frames[i] = std::move(frame);
        const Image moved = i == 0 ? myocardium : warp(myocardium, scene.truth_motion[i]);
        Mask mask(rows, cols);
        for (std::size_t p = 0; p < mask.size(); ++p) {
            mask[p] = moved[p] >= 0.5 ? 1 : 0;
        }
        scene.truth_masks.masks[i] = std::move(mask);
    }

    // Keep intensities inside [-1, 1]; the truth M0 follows the same scale.
    const auto [lo, hi] = intensity_range(scene.series);
    const double peak = std::max(std::abs(lo), std::abs(hi));
    if (peak > 1.0) {
        const double gain = 1.0 / peak;
        for (Image& f : scene.series.frames) {
            for (double& v : f.values()) v = std::clamp(v * gain, -1.0, 1.0);
        }
        for (double& v : truth.m0.values()) v *= gain;
    }
    return scene;
}

}  // namespace t1moco
