#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "t1moco/error.hpp"
#include "t1moco/phantom.hpp"
#include "t1moco/series.hpp"

using namespace t1moco;

namespace {

ImageSeries constant_series(int frames, int rows, int cols, double value = 0.0)
{
    ImageSeries s;
    for (int i = 0; i < frames; ++i) {
        s.frames.emplace_back(rows, cols, value);
        s.timestamps_ms.push_back(100.0 * (i + 1));
    }
    return s;
}

ErrorCode code_of(const auto& fn)
{
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no error thrown";
    return ErrorCode::IoError;
}

ImageSeries random_series(std::mt19937_64& rng)
{
    std::uniform_int_distribution<int> n(3, 8), dim(1, 12);
    std::uniform_real_distribution<double> value(-2000.0, 2000.0), gap(0.5, 300.0);
    ImageSeries s;
    const int rows = dim(rng), cols = dim(rng);
    double t = gap(rng);
    for (int i = 0, frames = n(rng); i < frames; ++i) {
        Image f(rows, cols);
        for (auto& v : f.values()) v = value(rng);
        s.frames.push_back(f);
        s.timestamps_ms.push_back(t);
        t += gap(rng);
    }
    return s;
}

}  // namespace

TEST(ValidateSeries, AcceptsElevenFramesOf160)
{
    ImageSeries s = constant_series(11, 160, 160, 0.5);
    s.timestamps_ms = default_timestamps(11);
    EXPECT_NO_THROW(validate_series(s));
}

TEST(ValidateSeries, TwoFramesAreTooFew)
{
    EXPECT_EQ(code_of([] { validate_series(constant_series(2, 4, 4)); }), ErrorCode::TooFewFrames);
}

TEST(ValidateSeries, TiedTimestampsAreRejected)
{
    ImageSeries s = constant_series(3, 4, 4);
    s.timestamps_ms = {100, 100, 200};
    EXPECT_EQ(code_of([&] { validate_series(s); }), ErrorCode::NonIncreasingTimestamps);
}

TEST(ValidateSeries, NonPositiveTimestampIsRejected)
{
    ImageSeries s = constant_series(3, 4, 4);
    s.timestamps_ms = {0, 100, 200};
    EXPECT_EQ(code_of([&] { validate_series(s); }), ErrorCode::NonIncreasingTimestamps);
}

TEST(ValidateSeries, ShapeMismatch)
{
    ImageSeries s = constant_series(3, 4, 4);
    s.frames[2] = Image(4, 5);
    EXPECT_EQ(code_of([&] { validate_series(s); }), ErrorCode::ShapeMismatch);
    ImageSeries t = constant_series(3, 4, 4);
    t.timestamps_ms.pop_back();
    EXPECT_EQ(code_of([&] { validate_series(t); }), ErrorCode::ShapeMismatch);
}

TEST(ValidateSeries, NonFiniteValue)
{
    ImageSeries s = constant_series(3, 4, 4);
    s.frames[1](2, 3) = std::numeric_limits<double>::quiet_NaN();
    EXPECT_EQ(code_of([&] { validate_series(s); }), ErrorCode::NonFiniteValue);
    s.frames[1](2, 3) = std::numeric_limits<double>::infinity();
    EXPECT_EQ(code_of([&] { validate_series(s); }), ErrorCode::NonFiniteValue);
}

TEST(MinMaxNormalize, MapsGlobalRangeToUnitInterval)
{
    ImageSeries s = constant_series(3, 2, 2, 0.0);
    s.frames[0](0, 0) = -500.0;
    s.frames[2](1, 1) = 1500.0;
    s.frames[1](0, 1) = 500.0;
    const ImageSeries n = min_max_normalize(s);
    EXPECT_EQ(n.frames[0](0, 0), 0.0);
    EXPECT_EQ(n.frames[2](1, 1), 1.0);
    EXPECT_DOUBLE_EQ(n.frames[1](0, 1), 0.5);
    EXPECT_DOUBLE_EQ(n.frames[0](1, 0), 0.25);
    EXPECT_EQ(n.timestamps_ms, s.timestamps_ms);
    EXPECT_EQ(n.spacing, s.spacing);
}

TEST(MinMaxNormalize, UnitRangeSeriesIsUnchanged)
{
    ImageSeries s = constant_series(3, 2, 2, 0.25);
    s.frames[0](0, 0) = 0.0;
    s.frames[1](1, 1) = 1.0;
    EXPECT_EQ(min_max_normalize(s), s);
}

TEST(MinMaxNormalize, ConstantSeriesIsRejected)
{
    EXPECT_EQ(code_of([] { min_max_normalize(constant_series(3, 3, 3, 7.0)); }), ErrorCode::ConstantSeries);
}

TEST(MinMaxNormalize, PropertyValidAndIdempotent)
{
    std::mt19937_64 rng(101);
    for (int trial = 0; trial < 200; ++trial) {
        const ImageSeries s = random_series(rng);
        const ImageSeries n = min_max_normalize(s);
        EXPECT_NO_THROW(validate_series(n));
        const auto [lo, hi] = intensity_range(n);
        EXPECT_EQ(lo, 0.0);
        EXPECT_EQ(hi, 1.0);
        const ImageSeries twice = min_max_normalize(n);
        for (int i = 0; i < n.size(); ++i) {
            for (std::size_t p = 0; p < n.frames[i].size(); ++p) {
                EXPECT_NEAR(twice.frames[i][p], n.frames[i][p], 1e-15);
            }
        }
    }
}

TEST(VelocityFieldSet, ReferenceFrameHasNoField)
{
    VelocityFieldSet set(5, 3, 4, 2);
    EXPECT_EQ(set.fields().size(), 4u);
    EXPECT_FALSE(set.has_field(2));
    EXPECT_TRUE(set.has_field(0));
    EXPECT_TRUE(set.has_field(4));
    EXPECT_EQ(code_of([&] { set.field(2); }), ErrorCode::InvalidConfig);
    set.field(3).at(1, 1, 0) = 2.5;
    EXPECT_EQ(set.fields()[2].at(1, 1, 0), 2.5);
    EXPECT_EQ(code_of([] { VelocityFieldSet(3, 2, 2, 3); }), ErrorCode::InvalidConfig);
}

TEST(ValidateMasks, RejectsNonBinaryAndWrongShape)
{
    MaskSet masks;
    for (int i = 0; i < 3; ++i) masks.masks.emplace_back(4, 4);
    EXPECT_NO_THROW(validate_masks(masks, 3, 4, 4));
    EXPECT_EQ(code_of([&] { validate_masks(masks, 4, 4, 4); }), ErrorCode::ShapeMismatch);
    EXPECT_EQ(code_of([&] { validate_masks(masks, 3, 4, 5); }), ErrorCode::ShapeMismatch);
    masks.masks[1](0, 0) = 2;
    EXPECT_EQ(code_of([&] { validate_masks(masks, 3, 4, 4); }), ErrorCode::InvalidMask);
}

TEST(FitConfig, DefaultWeights)
{
    const FitConfig c;
    EXPECT_EQ(c.lambda_fit, 1.0);
    EXPECT_EQ(c.lambda_smooth, 500.0);
    EXPECT_EQ(c.lambda_seg, 70000.0);
    EXPECT_EQ(c.reference_index, 0);
    EXPECT_NO_THROW(validate_config(c));
}

TEST(FitConfig, RejectsNegativeWeightsAndBadRanges)
{
    FitConfig c;
    c.lambda_smooth = -1.0;
    EXPECT_EQ(code_of([&] { validate_config(c); }), ErrorCode::InvalidConfig);
    c = {};
    c.t1_min_ms = 0.0;
    EXPECT_EQ(code_of([&] { validate_config(c); }), ErrorCode::InvalidConfig);
    c = {};
    c.t1_max_ms = 40.0;
    EXPECT_EQ(code_of([&] { validate_config(c); }), ErrorCode::InvalidConfig);
    c = {};
    c.integration_steps = -1;
    EXPECT_EQ(code_of([&] { validate_config(c); }), ErrorCode::InvalidConfig);
}

TEST(Error, MessageAndCategory)
{
    const Error e(ErrorCode::SizeMismatch, "frame_03.f32");
    EXPECT_EQ(std::string(e.what()), "SizeMismatch: frame_03.f32");
    EXPECT_EQ(e.category(), ErrorCategory::Io);
    EXPECT_EQ(category_of(ErrorCode::TooFewFrames), ErrorCategory::Validation);
    EXPECT_EQ(category_of(ErrorCode::InvalidConfig), ErrorCategory::Config);
    EXPECT_EQ(category_of(ErrorCode::ConstantObserved), ErrorCategory::Numerical);
}
