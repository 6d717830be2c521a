#include "t1moco/png_export.hpp"

#include <png.h>

#include <algorithm>

#include <cmath>
#include <cstdio>
#include <memory>

#include "t1moco/error.hpp"

namespace t1moco {

const std::array<Rgb, 256>& t1_colormap()
{
    static const std::array<Rgb, 256> table = [] {
        struct Anchor {
            double at;
            double r, g, b;
        };
        constexpr Anchor anchors[] = {
            {0.0, 0, 0, 128}, {0.125, 0, 0, 255}, {0.375, 0, 255, 255},
            {0.625, 255, 255, 0}, {0.875, 255, 0, 0}, {1.0, 128, 0, 0},
        };
        std::array<Rgb, 256> t{};
        for (int i = 0; i < 256; ++i) {
            const double x = i / 255.0;
            int k = 0;
            while (k + 2 < static_cast<int>(std::size(anchors)) && x > anchors[k + 1].at) ++k;
            const Anchor& a = anchors[k];
            const Anchor& b = anchors[k + 1];
            const double f = (x - a.at) / (b.at - a.at);
            auto mix = [f](double u, double v) { return static_cast<std::uint8_t>(std::lround(u + f * (v - u))); };
            t[i] = {mix(a.r, b.r), mix(a.g, b.g), mix(a.b, b.b)};
        }
        return t;
    }();
    return table;
}

int colormap_index(double t1_ms, double lo_ms, double hi_ms)
{
    const double x = std::clamp((t1_ms - lo_ms) / (hi_ms - lo_ms), 0.0, 1.0);
    return static_cast<int>(std::lround(x * 255.0));
}

std::vector<std::uint8_t> render_t1(const ParametricMaps& maps, double lo_ms, double hi_ms)
{
    if (!(hi_ms > lo_ms)) {
        throw Error(ErrorCode::InvalidConfig, "display range needs min < max");
    }
    const auto& cmap = t1_colormap();
    std::vector<std::uint8_t> rgb(3 * maps.t1.size(), 0);
    for (std::size_t p = 0; p < maps.t1.size(); ++p) {
        const double t1 = maps.t1[p];
        if (!(t1 > 0.0)) continue;
        const Rgb& c = cmap[colormap_index(t1, lo_ms, hi_ms)];
        rgb[3 * p] = c[0];
        rgb[3 * p + 1] = c[1];
        rgb[3 * p + 2] = c[2];
    }
    return rgb;
}

void export_t1_png(const ParametricMaps& maps, double lo_ms, double hi_ms, const std::filesystem::path& path)
{
    const std::vector<std::uint8_t> rgb = render_t1(maps, lo_ms, hi_ms);
    const int rows = maps.t1.rows();
    const int cols = maps.t1.cols();

    std::unique_ptr<FILE, int (*)(FILE*)> file(std::fopen(path.c_str(), "wb"), &std::fclose);
    if (!file) {
        throw Error(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
    }
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_write_struct(&png, &info);
        throw Error(ErrorCode::IoError, "libpng initialisation failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw Error(ErrorCode::IoError, "libpng failed writing " + path.string());
    }
    png_init_io(png, file.get());
    png_set_IHDR(png, info, cols, rows, 8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (int r = 0; r < rows; ++r) {
        png_write_row(png, const_cast<png_bytep>(rgb.data() + 3 * static_cast<std::size_t>(r) * cols));
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

}  // namespace t1moco
