/**
 * @file ingest.hpp
 * @brief Flight-log text format and corpus manifests.
 *
 * Log file: UTF-8, comma-delimited, one header line with exactly
 *   t,gyro_x,gyro_y,gyro_z,acc_x,acc_y,acc_z,roll,pitch,yaw,pos_x,pos_y,pos_z,pressure
 * Numbers are written in shortest round-trip form, so render/parse is lossless.
 *
 * Manifest: one JSON array of {"path", "label", "flight_id"} objects. Relative
 * paths resolve against the manifest's own directory.
 */
#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "walldetect/core.hpp"

namespace walldetect {

inline constexpr std::string_view kFlightLogHeader =
    "t,gyro_x,gyro_y,gyro_z,acc_x,acc_y,acc_z,roll,pitch,yaw,pos_x,pos_y,pos_z,pressure";
inline constexpr std::size_t kFlightLogColumns = 14;

/// Parses a log. Throws ParseError for malformed rows (with line number) and
/// ValidationError for timestamp or attitude violations. Short logs are accepted;
/// their eligibility for windowing is checked at extraction time.
FlightLog parse_flight_log(std::string_view content, WallLabel label, std::string flight_id,
                           double sample_rate_hz = kDefaultSampleRateHz);

std::string render_flight_log(const FlightLog& log);

struct ManifestEntry {
    std::filesystem::path path;
    WallLabel label = WallLabel::NoWall;
    std::string flight_id;

    bool operator==(const ManifestEntry&) const = default;
};

struct CorpusManifest {
    std::vector<ManifestEntry> entries;
    /// Directory that relative entry paths resolve against.
    std::filesystem::path base_dir;

    std::filesystem::path resolve(const ManifestEntry& entry) const;
};

/// Duplicate flight ids and missing files are errors.
void check_manifest(const CorpusManifest& manifest);

CorpusManifest parse_manifest(std::string_view json_text, std::filesystem::path base_dir);
CorpusManifest read_manifest(const std::filesystem::path& manifest_path);
std::string render_manifest(const CorpusManifest& manifest);
void write_manifest(const CorpusManifest& manifest, const std::filesystem::path& manifest_path);

/// One FlightLog per entry, in manifest order. Labels come from the manifest.
std::vector<FlightLog> load_corpus(const CorpusManifest& manifest);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view content);

/// Appends `value` in shortest round-trip decimal form.
void append_number(std::string& out, double value);

}  // namespace walldetect
