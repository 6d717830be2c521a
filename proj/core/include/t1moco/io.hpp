#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "t1moco/metrics.hpp"
#include "t1moco/optimizer.hpp"
#include "t1moco/phantom.hpp"
#include "t1moco/series.hpp"

namespace t1moco::io {

namespace fs = std::filesystem;

inline constexpr int kFormatVersion = 1;
inline constexpr const char* kReportSchema = "t1moco-eval-report";
inline constexpr const char* kFitReportSchema = "t1moco-fit-report";

/// Raw frame files: rows*cols IEEE-754 float32, little-endian, row-major.
void write_raw(const fs::path& path, std::span<const double> values);
std::vector<double> read_raw(const fs::path& path, std::size_t expected_values);
Image read_image(const fs::path& path, int rows, int cols);
void write_image(const fs::path& path, const Image& image);
/// Fields interleave (row, col) per voxel.
void write_field(const fs::path& path, const VectorField& field);
VectorField read_field(const fs::path& path, int rows, int cols);

/// CRC-32 (zlib polynomial) of a file's bytes.
std::uint32_t file_crc32(const fs::path& path);

struct SeriesManifest {
    int version = kFormatVersion;
    int rows = 0;
    int cols = 0;
    int frames = 0;
    std::vector<double> timestamps_ms;
    Spacing spacing;
    std::vector<std::string> files;
    std::string endianness = "little";
    bool normalize = false;
    std::vector<std::uint32_t> crc32;  ///< optional; verified on load when present
};

SeriesManifest read_series_manifest(const fs::path& path);

/// Writes frame files next to the manifest and the manifest itself.
void save_series(const fs::path& manifest_path, const ImageSeries& series, bool normalize_on_load = false,
                 bool with_checksums = true);

/// Validated series; min-max normalized when the manifest asks for it.
ImageSeries load_series(const fs::path& manifest_path);

void save_masks(const fs::path& manifest_path, const MaskSet& masks);
MaskSet load_masks(const fs::path& manifest_path);

/// Phantom directory: series.json, masks.json, phantom.json and raw files.
void save_phantom(const fs::path& directory, const PhantomScene& scene, const PhantomConfig& config);
PhantomScene load_phantom(const fs::path& phantom_manifest);

/// Solution directory: solution.json, maps, fields, registered and
/// synthetic frames, trace.json.
void save_solution(const fs::path& directory, const JointSolution& solution);
JointSolution load_solution(const fs::path& solution_manifest);

/// Plain `key = value` lines; `#` starts a comment. Unknown keys and
/// malformed values throw ParseError. Keys match FitConfig member names.
FitConfig parse_config(const std::string& text, FitConfig base = {});
FitConfig load_config(const fs::path& path, FitConfig base = {});
std::string format_config(const FitConfig& config);

std::string report_json(const EvalReport& report, const EvalOptions& options = {});
std::string fit_report_json(const JointSolution& solution, const FitConfig& config, bool corrected);
std::string trace_json(const JointSolution& solution);

void write_text(const fs::path& path, const std::string& text);
std::string read_text(const fs::path& path);

}  // namespace t1moco::io
