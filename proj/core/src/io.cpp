#include "t1moco/io.hpp"

#include <zlib.h>

#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "json.hpp"
#include "t1moco/error.hpp"

namespace t1moco::io {

using nlohmann::json;

namespace {

static_assert(std::numeric_limits<float>::is_iec559, "float32 files need IEEE-754 floats");

[[noreturn]] void parse_error(const fs::path& path, const std::string& what)
{
    throw Error(ErrorCode::ParseError, path.string() + ": " + what);
}

json read_json(const fs::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::IoError, "cannot open " + path.string());
    }
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        parse_error(path, e.what());
    }
}

void write_json(const fs::path& path, const json& j)
{
    write_text(path, j.dump(2) + "\n");
}

template <typename T>
T field_of(const json& j, const char* key, const fs::path& path)
{
    if (!j.contains(key)) {
        parse_error(path, std::string("missing key '") + key + "'");
    }
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        parse_error(path, std::string("bad value for '") + key + "': " + e.what());
    }
}

void expect_format(const json& j, const char* format, const fs::path& path)
{
    const auto got = field_of<std::string>(j, "format", path);
    if (got != format) {
        parse_error(path, "expected format '" + std::string(format) + "', found '" + got + "'");
    }
    const int version = field_of<int>(j, "version", path);
    if (version != kFormatVersion) {
        parse_error(path, "unsupported version " + std::to_string(version));
    }
}

fs::path resolve(const fs::path& manifest, const std::string& file)
{
    return manifest.parent_path() / file;
}

std::string frame_name(const char* stem, int i)
{
    std::ostringstream s;
    s << stem << '_' << std::setw(2) << std::setfill('0') << i << ".f32";
    return s.str();
}

json loss_json(const LossBreakdown& l)
{
    return {{"fit", l.fit}, {"smooth", l.smooth}, {"seg", l.seg}, {"total", l.total}};
}

json config_json(const FitConfig& c)
{
    return {
        {"lambda_fit", c.lambda_fit},
        {"lambda_smooth", c.lambda_smooth},
        {"lambda_seg", c.lambda_seg},
        {"outer_iterations", c.outer_iterations},
        {"refit_interval", c.refit_interval},
        {"integration_steps", c.integration_steps},
        {"pyramid_levels", c.pyramid_levels},
        {"step_size", c.step_size},
        {"max_halvings", c.max_halvings},
        {"gradient_sigma", c.gradient_sigma},
        {"tolerance", c.tolerance},
        {"reference_index", c.reference_index},
        {"t1_min_ms", c.t1_min_ms},
        {"t1_max_ms", c.t1_max_ms},
        {"fit_starts", c.fit_starts},
        {"max_fit_iterations", c.max_fit_iterations},
        {"magnitude_mode", c.magnitude_mode},
        {"gradient_mode", c.gradient_mode == GradientMode::Analytic ? "analytic" : "finite_difference"},
        {"seed", c.seed},
    };
}

json optional_number(const std::optional<double>& v)
{
    return v ? json(*v) : json(nullptr);
}

}  // namespace

void write_text(const fs::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
    }
    out << text;
    if (!out) {
        throw Error(ErrorCode::IoError, "failed writing " + path.string());
    }
}

std::string read_text(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::IoError, "cannot open " + path.string());
    }
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

void write_raw(const fs::path& path, std::span<const double> values)
{
    std::string bytes(4 * values.size(), '\0');
    for (std::size_t i = 0; i < values.size(); ++i) {
        const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(values[i]));
        for (int b = 0; b < 4; ++b) {
            bytes[4 * i + b] = static_cast<char>((bits >> (8 * b)) & 0xFFu);
        }
    }
    write_text(path, bytes);
}

std::vector<double> read_raw(const fs::path& path, std::size_t expected_values)
{
    if (!fs::exists(path)) {
        throw Error(ErrorCode::MissingFrame, "missing data file " + path.string());
    }
    const std::string bytes = read_text(path);
    if (bytes.size() != 4 * expected_values) {
        throw Error(ErrorCode::SizeMismatch, path.string() + " holds " + std::to_string(bytes.size()) +
                                                 " bytes, expected " + std::to_string(4 * expected_values));
    }
    std::vector<double> out(expected_values);
    for (std::size_t i = 0; i < expected_values; ++i) {
        std::uint32_t bits = 0;
        for (int b = 0; b < 4; ++b) {
            bits |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[4 * i + b])) << (8 * b);
        }
        out[i] = static_cast<double>(std::bit_cast<float>(bits));
    }
    return out;
}

Image read_image(const fs::path& path, int rows, int cols)
{
    const std::vector<double> values = read_raw(path, static_cast<std::size_t>(rows) * cols);
    Image img(rows, cols);
    std::copy(values.begin(), values.end(), img.values().begin());
    return img;
}

void write_image(const fs::path& path, const Image& image)
{
    write_raw(path, image.values());
}

void write_field(const fs::path& path, const VectorField& field)
{
    write_raw(path, field.components());
}

VectorField read_field(const fs::path& path, int rows, int cols)
{
    const std::vector<double> values = read_raw(path, 2 * static_cast<std::size_t>(rows) * cols);
    VectorField f(rows, cols);
    std::copy(values.begin(), values.end(), f.components().begin());
    return f;
}

std::uint32_t file_crc32(const fs::path& path)
{
    const std::string bytes = read_text(path);
    uLong crc = crc32(0L, Z_NULL, 0);
    crc = crc32(crc, reinterpret_cast<const Bytef*>(bytes.data()), static_cast<uInt>(bytes.size()));
    return static_cast<std::uint32_t>(crc);
}

SeriesManifest read_series_manifest(const fs::path& path)
{
    const json j = read_json(path);
    expect_format(j, "t1moco-series", path);
    SeriesManifest m;
    m.version = field_of<int>(j, "version", path);
    m.rows = field_of<int>(j, "rows", path);
    m.cols = field_of<int>(j, "cols", path);
    m.frames = field_of<int>(j, "frames", path);
    m.timestamps_ms = field_of<std::vector<double>>(j, "timestamps_ms", path);
    const auto spacing = field_of<std::vector<double>>(j, "spacing_mm", path);
    if (spacing.size() != 2) {
        parse_error(path, "spacing_mm needs two entries (row, col)");
    }
    m.spacing = {spacing[0], spacing[1]};
    m.files = field_of<std::vector<std::string>>(j, "files", path);
    m.endianness = field_of<std::string>(j, "endianness", path);
    m.normalize = j.value("normalize", false);
    if (j.contains("crc32")) {
        m.crc32 = field_of<std::vector<std::uint32_t>>(j, "crc32", path);
    }
    if (field_of<std::string>(j, "dtype", path) != "float32") {
        parse_error(path, "only float32 frames are supported");
    }
    if (m.endianness != "little") {
        parse_error(path, "only little-endian frames are supported");
    }
    if (m.rows <= 0 || m.cols <= 0 || m.frames <= 0) {
        parse_error(path, "rows, cols and frames must be positive");
    }
    if (static_cast<int>(m.timestamps_ms.size()) != m.frames) {
        parse_error(path, "timestamp count does not match frames");
    }
    if (!m.crc32.empty() && m.crc32.size() != m.files.size()) {
        parse_error(path, "crc32 count does not match file count");
    }
    return m;
}

void save_series(const fs::path& manifest_path, const ImageSeries& series, bool normalize_on_load,
                 bool with_checksums)
{
    const fs::path dir = manifest_path.parent_path();
    if (!dir.empty()) fs::create_directories(dir);
    json files = json::array();
    json crcs = json::array();
    for (int i = 0; i < series.size(); ++i) {
        const std::string name = frame_name("frame", i);
        write_image(resolve(manifest_path, name), series.frames[i]);
        files.push_back(name);
        if (with_checksums) crcs.push_back(file_crc32(resolve(manifest_path, name)));
    }
    json j = {
        {"format", "t1moco-series"},
        {"version", kFormatVersion},
        {"rows", series.rows()},
        {"cols", series.cols()},
        {"frames", series.size()},
        {"timestamps_ms", series.timestamps_ms},
        {"spacing_mm", {series.spacing.row_mm, series.spacing.col_mm}},
        {"dtype", "float32"},
        {"endianness", "little"},
        {"normalize", normalize_on_load},
        {"files", files},
    };
    if (with_checksums) j["crc32"] = crcs;
    write_json(manifest_path, j);
}

ImageSeries load_series(const fs::path& manifest_path)
{
    const SeriesManifest m = read_series_manifest(manifest_path);
    if (static_cast<int>(m.files.size()) != m.frames) {
        throw Error(ErrorCode::MissingFrame, manifest_path.string() + ": manifest lists " +
                                                 std::to_string(m.files.size()) + " files for " +
                                                 std::to_string(m.frames) + " frames");
    }
    ImageSeries series;
    series.timestamps_ms = m.timestamps_ms;
    series.spacing = m.spacing;
    for (int i = 0; i < m.frames; ++i) {
        const fs::path file = resolve(manifest_path, m.files[i]);
        series.frames.push_back(read_image(file, m.rows, m.cols));
        if (!m.crc32.empty() && file_crc32(file) != m.crc32[i]) {
            throw Error(ErrorCode::ChecksumMismatch, file.string() + " fails its crc32 check");
        }
    }
    validate_series(series);
    return m.normalize ? min_max_normalize(series) : series;
}

void save_masks(const fs::path& manifest_path, const MaskSet& masks)
{
    const fs::path dir = manifest_path.parent_path();
    if (!dir.empty()) fs::create_directories(dir);
    json files = json::array();
    for (int i = 0; i < masks.size(); ++i) {
        const std::string name = frame_name("mask", i);
        const Mask& m = masks.masks[i];
        std::vector<double> values(m.values().begin(), m.values().end());
        write_raw(resolve(manifest_path, name), values);
        files.push_back(name);
    }
    const int rows = masks.masks.empty() ? 0 : masks.masks[0].rows();
    const int cols = masks.masks.empty() ? 0 : masks.masks[0].cols();
    write_json(manifest_path, {
                                  {"format", "t1moco-masks"},
                                  {"version", kFormatVersion},
                                  {"rows", rows},
                                  {"cols", cols},
                                  {"frames", masks.size()},
                                  {"dtype", "float32"},
                                  {"endianness", "little"},
                                  {"files", files},
                              });
}

MaskSet load_masks(const fs::path& manifest_path)
{
    const json j = read_json(manifest_path);
    expect_format(j, "t1moco-masks", manifest_path);
    const int rows = field_of<int>(j, "rows", manifest_path);
    const int cols = field_of<int>(j, "cols", manifest_path);
    const int frames = field_of<int>(j, "frames", manifest_path);
    const auto files = field_of<std::vector<std::string>>(j, "files", manifest_path);
    if (static_cast<int>(files.size()) != frames) {
        throw Error(ErrorCode::MissingFrame, manifest_path.string() + ": mask count does not match frames");
    }
    MaskSet out;
    for (const std::string& f : files) {
        const Image values = read_image(resolve(manifest_path, f), rows, cols);
        Mask m(rows, cols);
        for (std::size_t p = 0; p < m.size(); ++p) {
            if (values[p] != 0.0 && values[p] != 1.0) {
                throw Error(ErrorCode::InvalidMask, f + " holds a value other than 0 or 1");
            }
            m[p] = values[p] == 1.0 ? 1 : 0;
        }
        out.masks.push_back(std::move(m));
    }
    return out;
}

namespace {

json phantom_config_json(const PhantomConfig& c)
{
    auto tissue = [](const TissueProperties& t) { return json{{"t1_ms", t.t1_ms}, {"m0", t.m0}}; };
    return {
        {"rows", c.rows},
        {"cols", c.cols},
        {"frames", c.frames},
        {"spacing_mm", {c.spacing.row_mm, c.spacing.col_mm}},
        {"myocardium", tissue(c.myocardium)},
        {"blood", tissue(c.blood)},
        {"background", tissue(c.background)},
        {"t1_variation", c.t1_variation},
        {"blood_radius", c.blood_radius},
        {"myocardium_radius", c.myocardium_radius},
        {"motion_min", c.motion_min},
        {"motion_max", c.motion_max},
        {"deformation", c.deformation},
        {"snr", c.snr},
    };
}

Mask image_to_mask(const Image& values)
{
    Mask m(values.rows(), values.cols());
    for (std::size_t p = 0; p < m.size(); ++p) m[p] = values[p] != 0.0 ? 1 : 0;
    return m;
}

Image mask_to_image(const Mask& mask)
{
    Image img(mask.rows(), mask.cols());
    for (std::size_t p = 0; p < mask.size(); ++p) img[p] = mask[p] ? 1.0 : 0.0;
    return img;
}

}  // namespace

void save_phantom(const fs::path& directory, const PhantomScene& scene, const PhantomConfig& config)
{
    fs::create_directories(directory);
    save_series(directory / "series.json", scene.series);
    save_masks(directory / "masks.json", scene.truth_masks);
    write_image(directory / "truth_t1.f32", scene.truth_maps.t1);
    write_image(directory / "truth_m0.f32", scene.truth_maps.m0);
    write_image(directory / "tissue.f32", mask_to_image(scene.tissue));
    json motion = json::array();
    for (std::size_t i = 0; i < scene.truth_motion.size(); ++i) {
        const std::string name = frame_name("motion", static_cast<int>(i));
        write_field(directory / name, scene.truth_motion[i]);
        motion.push_back(name);
    }
    write_json(directory / "phantom.json", {
                                               {"format", "t1moco-phantom"},
                                               {"version", kFormatVersion},
                                               {"seed", scene.seed},
                                               {"rows", scene.series.rows()},
                                               {"cols", scene.series.cols()},
                                               {"series", "series.json"},
                                               {"masks", "masks.json"},
                                               {"truth_t1", "truth_t1.f32"},
                                               {"truth_m0", "truth_m0.f32"},
                                               {"tissue", "tissue.f32"},
                                               {"motion", motion},
                                               {"config", phantom_config_json(config)},
                                           });
}

PhantomScene load_phantom(const fs::path& manifest)
{
    const json j = read_json(manifest);
    expect_format(j, "t1moco-phantom", manifest);
    PhantomScene scene;
    scene.seed = field_of<std::uint64_t>(j, "seed", manifest);
    const int rows = field_of<int>(j, "rows", manifest);
    const int cols = field_of<int>(j, "cols", manifest);
    scene.series = load_series(resolve(manifest, field_of<std::string>(j, "series", manifest)));
    scene.truth_masks = load_masks(resolve(manifest, field_of<std::string>(j, "masks", manifest)));
    scene.truth_maps.t1 = read_image(resolve(manifest, field_of<std::string>(j, "truth_t1", manifest)), rows, cols);
    scene.truth_maps.m0 = read_image(resolve(manifest, field_of<std::string>(j, "truth_m0", manifest)), rows, cols);
    scene.tissue = image_to_mask(read_image(resolve(manifest, field_of<std::string>(j, "tissue", manifest)), rows, cols));
    for (const auto& name : field_of<std::vector<std::string>>(j, "motion", manifest)) {
        scene.truth_motion.push_back(read_field(resolve(manifest, name), rows, cols));
    }
    return scene;
}

void save_solution(const fs::path& directory, const JointSolution& solution)
{
    fs::create_directories(directory);
    const ImageSeries& reg = solution.registered;
    write_image(directory / "t1.f32", solution.maps.t1);
    write_image(directory / "m0.f32", solution.maps.m0);
    write_image(directory / "r2.f32", solution.r2);
    json velocity = json::array();
    json registered = json::array();
    json synthetic = json::array();
    for (int i = 0; i < reg.size(); ++i) {
        if (solution.fields.has_field(i)) {
            const std::string name = frame_name("velocity", i);
            write_field(directory / name, solution.fields.field(i));
            velocity.push_back(name);
        } else {
            velocity.push_back(nullptr);
        }
        const std::string rname = frame_name("registered", i);
        write_image(directory / rname, reg.frames[i]);
        registered.push_back(rname);
        const std::string sname = frame_name("synthetic", i);
        write_image(directory / sname, solution.synthetic.frames[i]);
        synthetic.push_back(sname);
    }
    write_text(directory / "trace.json", trace_json(solution));
    write_json(directory / "solution.json", {
                                                {"format", "t1moco-solution"},
                                                {"version", kFormatVersion},
                                                {"rows", reg.rows()},
                                                {"cols", reg.cols()},
                                                {"frames", reg.size()},
                                                {"timestamps_ms", reg.timestamps_ms},
                                                {"spacing_mm", {reg.spacing.row_mm, reg.spacing.col_mm}},
                                                {"reference_index", solution.fields.reference_index()},
                                                {"converged", solution.converged},
                                                {"coarse_iterations", solution.coarse_iterations},
                                                {"t1", "t1.f32"},
                                                {"m0", "m0.f32"},
                                                {"r2", "r2.f32"},
                                                {"velocity", velocity},
                                                {"registered", registered},
                                                {"synthetic", synthetic},
                                                {"trace", "trace.json"},
                                            });
}

JointSolution load_solution(const fs::path& manifest)
{
    const json j = read_json(manifest);
    expect_format(j, "t1moco-solution", manifest);
    const int rows = field_of<int>(j, "rows", manifest);
    const int cols = field_of<int>(j, "cols", manifest);
    const int frames = field_of<int>(j, "frames", manifest);
    const int ref = field_of<int>(j, "reference_index", manifest);
    if (rows <= 0 || cols <= 0 || frames < kMinFrames || ref < 0 || ref >= frames) {
        parse_error(manifest, "inconsistent solution dimensions");
    }
    const auto spacing = field_of<std::vector<double>>(j, "spacing_mm", manifest);
    if (spacing.size() != 2) parse_error(manifest, "spacing_mm needs two entries");

    JointSolution s;
    s.converged = field_of<bool>(j, "converged", manifest);
    s.coarse_iterations = j.value("coarse_iterations", 0);
    s.maps.t1 = read_image(resolve(manifest, field_of<std::string>(j, "t1", manifest)), rows, cols);
    s.maps.m0 = read_image(resolve(manifest, field_of<std::string>(j, "m0", manifest)), rows, cols);
    s.r2 = read_image(resolve(manifest, field_of<std::string>(j, "r2", manifest)), rows, cols);
    s.fields = VelocityFieldSet(frames, rows, cols, ref);
    const json& velocity = j.at("velocity");
    const auto registered = field_of<std::vector<std::string>>(j, "registered", manifest);
    const auto synthetic = field_of<std::vector<std::string>>(j, "synthetic", manifest);
    if (!velocity.is_array() || static_cast<int>(velocity.size()) != frames ||
        static_cast<int>(registered.size()) != frames || static_cast<int>(synthetic.size()) != frames) {
        throw Error(ErrorCode::MissingFrame, manifest.string() + ": per-frame file lists do not match frames");
    }
    for (int i = 0; i < frames; ++i) {
        if (i != ref) {
            if (!velocity[i].is_string()) parse_error(manifest, "velocity entry missing for a moving frame");
            s.fields.field(i) = read_field(resolve(manifest, velocity[i].get<std::string>()), rows, cols);
        }
    }
    s.registered.timestamps_ms = field_of<std::vector<double>>(j, "timestamps_ms", manifest);
    s.registered.spacing = {spacing[0], spacing[1]};
    s.synthetic.timestamps_ms = s.registered.timestamps_ms;
    s.synthetic.spacing = s.registered.spacing;
    for (int i = 0; i < frames; ++i) {
        s.registered.frames.push_back(read_image(resolve(manifest, registered[i]), rows, cols));
        s.synthetic.frames.push_back(read_image(resolve(manifest, synthetic[i]), rows, cols));
    }
    const fs::path trace_path = resolve(manifest, j.value("trace", std::string("trace.json")));
    if (fs::exists(trace_path)) {
        const json t = read_json(trace_path);
        for (const json& e : t.at("entries")) {
            TraceEntry entry;
            entry.iteration = e.at("iteration").get<int>();
            entry.loss = {e.at("fit").get<double>(), e.at("smooth").get<double>(), e.at("seg").get<double>(),
                          e.at("total").get<double>()};
            s.trace.push_back(entry);
        }
    }
    return s;
}

FitConfig parse_config(const std::string& text, FitConfig c)
{
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    auto bad = [&](const std::string& what) {
        throw Error(ErrorCode::ParseError, "config line " + std::to_string(line_no) + ": " + what);
    };
    auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        const auto e = s.find_last_not_of(" \t\r");
        return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) bad("expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (value.empty()) bad("empty value for '" + key + "'");

        auto as_double = [&]() {
            std::size_t used = 0;
            double v = 0.0;
            try {
                v = std::stod(value, &used);
            } catch (...) {
                bad("'" + value + "' is not a number");
            }
            if (used != value.size()) bad("'" + value + "' is not a number");
            return v;
        };
        auto as_int = [&]() {
            const double v = as_double();
            if (v != std::floor(v) || std::abs(v) > 1e9) bad("'" + value + "' is not an integer");
            return static_cast<int>(v);
        };
        auto as_bool = [&]() {
            if (value == "true" || value == "1") return true;
            if (value == "false" || value == "0") return false;
            bad("'" + value + "' is not a boolean");
            return false;
        };

        if (key == "lambda_fit") c.lambda_fit = as_double();
        else if (key == "lambda_smooth") c.lambda_smooth = as_double();
        else if (key == "lambda_seg") c.lambda_seg = as_double();
        else if (key == "outer_iterations") c.outer_iterations = as_int();
        else if (key == "refit_interval") c.refit_interval = as_int();
        else if (key == "integration_steps") c.integration_steps = as_int();
        else if (key == "pyramid_levels") c.pyramid_levels = as_int();
        else if (key == "step_size") c.step_size = as_double();
        else if (key == "max_halvings") c.max_halvings = as_int();
        else if (key == "gradient_sigma") c.gradient_sigma = as_double();
        else if (key == "tolerance") c.tolerance = as_double();
        else if (key == "reference_index") c.reference_index = as_int();
        else if (key == "t1_min_ms") c.t1_min_ms = as_double();
        else if (key == "t1_max_ms") c.t1_max_ms = as_double();
        else if (key == "fit_starts") c.fit_starts = as_int();
        else if (key == "max_fit_iterations") c.max_fit_iterations = as_int();
        else if (key == "magnitude_mode") c.magnitude_mode = as_bool();
        else if (key == "seed") {
            std::uint64_t v = 0;
            const auto [end, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
            if (ec != std::errc() || end != value.data() + value.size()) bad("seed must be a nonnegative integer");
            c.seed = v;
        } else if (key == "gradient_mode") {
            if (value == "analytic") c.gradient_mode = GradientMode::Analytic;
            else if (value == "finite_difference") c.gradient_mode = GradientMode::FiniteDifference;
            else bad("gradient_mode must be analytic or finite_difference");
        } else {
            bad("unknown key '" + key + "'");
        }
    }
    return c;
}

FitConfig load_config(const fs::path& path, FitConfig base)
{
    return parse_config(read_text(path), base);
}

std::string format_config(const FitConfig& c)
{
    std::ostringstream out;
    out << std::setprecision(17);
    const json fields = config_json(c);
    for (const auto& [key, value] : fields.items()) {
        out << key << " = ";
        if (value.is_string()) out << value.get<std::string>();
        else if (value.is_boolean()) out << (value.get<bool>() ? "true" : "false");
        else out << value.dump();
        out << '\n';
    }
    return out.str();
}

std::string report_json(const EvalReport& r, const EvalOptions& options)
{
    json frames = json::array();
    for (const FrameEvaluation& f : r.frames) {
        frames.push_back({{"frame", f.frame}, {"dice", f.dice}, {"hausdorff_mm", optional_number(f.hausdorff_mm)}});
    }
    json j = {
        {"schema", kReportSchema},
        {"version", kFormatVersion},
        {"r2", {{"mean", r.r2_mean}, {"std", r.r2_std}, {"voxels", r.r2_voxels}, {"pooled", options.pooled_r2}}},
        {"dice_mean", r.dice_mean},
        {"hausdorff_mm", optional_number(r.hausdorff_mm)},
        {"hausdorff_mode", options.hausdorff_mode == HausdorffMode::Maximum ? "max" : "p95"},
        {"frames", frames},
    };
    if (r.t1_rmse_ms) j["t1_rmse_ms"] = *r.t1_rmse_ms;
    if (r.t1_relative_rmse) j["t1_relative_rmse"] = *r.t1_relative_rmse;
    return j.dump(2) + "\n";
}

std::string trace_json(const JointSolution& solution)
{
    json entries = json::array();
    for (const TraceEntry& e : solution.trace) {
        json row = loss_json(e.loss);
        row["iteration"] = e.iteration;
        entries.push_back(row);
    }
    return json{{"schema", "t1moco-trace"}, {"version", kFormatVersion}, {"entries", entries}}.dump(2) + "\n";
}

std::string fit_report_json(const JointSolution& solution, const FitConfig& config, bool corrected)
{
    double r2_sum = 0.0;
    long r2_count = 0;
    for (std::size_t p = 0; p < solution.r2.size(); ++p) {
        if (solution.maps.t1[p] > 0.0) {
            r2_sum += solution.r2[p];
            ++r2_count;
        }
    }
    json j = {
        {"schema", kFitReportSchema},
        {"version", kFormatVersion},
        {"corrected", corrected},
        {"converged", solution.converged},
        {"iterations", solution.trace.empty() ? 0 : static_cast<int>(solution.trace.size()) - 1},
        {"coarse_iterations", solution.coarse_iterations},
        {"r2_mean", r2_count ? r2_sum / r2_count : 0.0},
        {"config", config_json(config)},
    };
    if (!solution.trace.empty()) {
        j["initial_loss"] = loss_json(solution.trace.front().loss);
        j["final_loss"] = loss_json(solution.trace.back().loss);
    }
    return j.dump(2) + "\n";
}

}  // namespace t1moco::io
