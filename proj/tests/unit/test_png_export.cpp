#include <gtest/gtest.h>

#include <png.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <vector>

#include "t1moco/error.hpp"
#include "t1moco/png_export.hpp"

using namespace t1moco;
namespace fs = std::filesystem;

namespace {

struct Decoded {
    int width = 0;
    int height = 0;
    int color_type = 0;
    int bit_depth = 0;
    std::vector<std::uint8_t> rgb;
};

// Independent reader built on libpng's simplified API.
Decoded decode(const fs::path& path)
{
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    EXPECT_TRUE(png_image_begin_read_from_file(&image, path.c_str()));
    Decoded out;
    out.width = static_cast<int>(image.width);
    out.height = static_cast<int>(image.height);
    image.format = PNG_FORMAT_RGB;
    out.rgb.resize(PNG_IMAGE_SIZE(image));
    EXPECT_TRUE(png_image_finish_read(&image, nullptr, out.rgb.data(), 0, nullptr));

    FILE* f = std::fopen(path.c_str(), "rb");
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png_create_info_struct(png);
    png_init_io(png, f);
    png_read_info(png, info);
    out.color_type = png_get_color_type(png, info);
    out.bit_depth = png_get_bit_depth(png, info);
    png_destroy_read_struct(&png, &info, nullptr);
    std::fclose(f);
    return out;
}

ParametricMaps constant_maps(int rows, int cols, double t1)
{
    ParametricMaps m;
    m.t1 = Image(rows, cols, t1);
    m.m0 = Image(rows, cols, 1.0);
    return m;
}

std::vector<char> file_bytes(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

fs::path temp_png(const char* name)
{
    return fs::temp_directory_path() / (std::string("t1moco_png_") + name + ".png");
}

}  // namespace

TEST(Colormap, AnchorsAndEndpoints)
{
    const auto& c = t1_colormap();
    EXPECT_EQ(c[0], (Rgb{0, 0, 128}));
    EXPECT_EQ(c[255], (Rgb{128, 0, 0}));
    for (const Rgb& e : c) EXPECT_NE(e, (Rgb{0, 0, 0}));
}

TEST(Colormap, IndexClampsAndRounds)
{
    EXPECT_EQ(colormap_index(1000.0, 1000.0, 2000.0), 0);
    EXPECT_EQ(colormap_index(2000.0, 1000.0, 2000.0), 255);
    EXPECT_EQ(colormap_index(50.0, 1000.0, 2000.0), 0);
    EXPECT_EQ(colormap_index(9000.0, 1000.0, 2000.0), 255);
    EXPECT_EQ(colormap_index(1500.0, 1000.0, 2000.0), 128);
}

TEST(ExportPng, MidpointIsUniformMidColor)
{
    const fs::path p = temp_png("mid");
    export_t1_png(constant_maps(5, 7, 1500.0), 1000.0, 2000.0, p);
    const Decoded d = decode(p);
    EXPECT_EQ(d.width, 7);
    EXPECT_EQ(d.height, 5);
    EXPECT_EQ(d.color_type, PNG_COLOR_TYPE_RGB);
    EXPECT_EQ(d.bit_depth, 8);
    const Rgb mid = t1_colormap()[128];
    for (std::size_t i = 0; i < d.rgb.size(); i += 3) {
        ASSERT_EQ((Rgb{d.rgb[i], d.rgb[i + 1], d.rgb[i + 2]}), mid);
    }
    fs::remove(p);
}

TEST(ExportPng, RangeMaxIsLastEntryAndSentinelBlack)
{
    ParametricMaps m = constant_maps(2, 2, 2000.0);
    m.t1(1, 1) = 0.0;
    m.t1(0, 1) = 99999.0;
    const fs::path p = temp_png("max");
    export_t1_png(m, 1000.0, 2000.0, p);
    const Decoded d = decode(p);
    const Rgb last = t1_colormap()[255];
    EXPECT_EQ((Rgb{d.rgb[0], d.rgb[1], d.rgb[2]}), last);
    EXPECT_EQ((Rgb{d.rgb[3], d.rgb[4], d.rgb[5]}), last);
    EXPECT_EQ((Rgb{d.rgb[9], d.rgb[10], d.rgb[11]}), (Rgb{0, 0, 0}));
    fs::remove(p);
}

TEST(ExportPng, PixelsMatchRender)
{
    ParametricMaps m = constant_maps(9, 11, 0.0);
    for (int r = 0; r < 9; ++r) {
        for (int c = 0; c < 11; ++c) m.t1(r, c) = 100.0 * (r * 11 + c);
    }
    const fs::path p = temp_png("ramp");
    export_t1_png(m, 200.0, 8000.0, p);
    EXPECT_EQ(decode(p).rgb, render_t1(m, 200.0, 8000.0));
    fs::remove(p);
}

TEST(ExportPng, DeterministicBytes)
{
    ParametricMaps m = constant_maps(16, 16, 0.0);
    for (std::size_t i = 0; i < m.t1.size(); ++i) m.t1[i] = 37.0 * i;
    const fs::path a = temp_png("a");
    const fs::path b = temp_png("b");
    export_t1_png(m, 0.0, 5000.0, a);
    export_t1_png(m, 0.0, 5000.0, b);
    EXPECT_EQ(file_bytes(a), file_bytes(b));
    fs::remove(a);
    fs::remove(b);
}

TEST(ExportPng, Errors)
{
    try {
        export_t1_png(constant_maps(2, 2, 1000.0), 2000.0, 2000.0, temp_png("bad"));
        ADD_FAILURE();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::InvalidConfig);
    }
    try {
        export_t1_png(constant_maps(2, 2, 1000.0), 0.0, 2000.0, "/nonexistent-dir/x.png");
        ADD_FAILURE();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::IoError);
    }
}
