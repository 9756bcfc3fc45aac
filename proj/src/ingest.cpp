#include "walldetect/ingest.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>
#include <system_error>

#include <json.hpp>

namespace walldetect {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    return s;
}

constexpr std::array<std::string_view, kFlightLogColumns> kColumnNames = {
    "t", "gyro_x", "gyro_y", "gyro_z", "acc_x", "acc_y", "acc_z",
    "roll", "pitch", "yaw", "pos_x", "pos_y", "pos_z", "pressure"};

constexpr std::array<double ImuSample::*, kFlightLogColumns> kColumns = {
    &ImuSample::t,     &ImuSample::gyro_x, &ImuSample::gyro_y, &ImuSample::gyro_z, &ImuSample::acc_x,
    &ImuSample::acc_y, &ImuSample::acc_z,  &ImuSample::roll,   &ImuSample::pitch,  &ImuSample::yaw,
    &ImuSample::pos_x, &ImuSample::pos_y,  &ImuSample::pos_z,  &ImuSample::pressure};

bool parse_double(std::string_view field, double& out) {
    field = trim(field);
    if (!field.empty() && field.front() == '+') field.remove_prefix(1);
    if (field.empty()) return false;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), out);
    return ec == std::errc() && ptr == field.data() + field.size();
}

}  // namespace

void append_number(std::string& out, double value) {
    std::array<char, 32> buf{};
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    out.append(buf.data(), ptr);
}

FlightLog parse_flight_log(std::string_view content, WallLabel label, std::string flight_id,
                           double sample_rate_hz) {
    FlightLog log;
    log.label = label;
    log.flight_id = std::move(flight_id);
    log.sample_rate_hz = sample_rate_hz;

    std::size_t line_no = 0;
    bool have_header = false;
    std::size_t pos = 0;
    while (pos < content.size()) {
        std::size_t end = content.find('\n', pos);
        if (end == std::string_view::npos) end = content.size();
        const std::string_view line = trim(content.substr(pos, end - pos));
        pos = end + 1;
        ++line_no;
        if (line.empty()) continue;

        if (!have_header) {
            if (line != kFlightLogHeader) throw ParseError(line_no, "unexpected header '" + std::string(line) + "'");
            have_header = true;
            continue;
        }

        ImuSample sample;
        std::size_t column = 0;
        std::size_t field_start = 0;
        while (true) {
            const std::size_t comma = line.find(',', field_start);
            const std::string_view field =
                line.substr(field_start, comma == std::string_view::npos ? std::string_view::npos : comma - field_start);
            if (column < kFlightLogColumns) {
                double value = 0.0;
                if (!parse_double(field, value)) {
                    throw ParseError(line_no, "non-numeric field '" + std::string(field) + "' in column " +
                                                  std::string(kColumnNames[column]));
                }
                sample.*kColumns[column] = value;
            }
            ++column;
            if (comma == std::string_view::npos) break;
            field_start = comma + 1;
        }
        if (column != kFlightLogColumns) {
            throw ParseError(line_no, "expected " + std::to_string(kFlightLogColumns) + " columns, got " +
                                          std::to_string(column));
        }
        log.samples.push_back(sample);
    }

    if (!have_header) throw ParseError(1, "missing header");
    if (log.samples.empty()) throw ParseError(line_no, "no samples");

    for (const auto& v : validate_flight_log(log)) {
        if (is_hard_rule(v.rule)) {
            throw ValidationError("flight '" + log.flight_id + "': " + v.message);
        }
    }
    return log;
}

std::string render_flight_log(const FlightLog& log) {
    std::string out;
    out.reserve(log.samples.size() * 160 + 96);
    out.append(kFlightLogHeader);
    out.push_back('\n');
    for (const auto& s : log.samples) {
        for (std::size_t c = 0; c < kFlightLogColumns; ++c) {
            if (c > 0) out.push_back(',');
            append_number(out, s.*kColumns[c]);
        }
        out.push_back('\n');
    }
    return out;
}

std::filesystem::path CorpusManifest::resolve(const ManifestEntry& entry) const {
    return entry.path.is_absolute() ? entry.path : base_dir / entry.path;
}

void check_manifest(const CorpusManifest& manifest) {
    std::set<std::string> seen;
    for (const auto& entry : manifest.entries) {
        if (entry.flight_id.empty()) throw ValidationError("manifest entry with empty flight_id");
        if (!seen.insert(entry.flight_id).second) {
            throw ValidationError("duplicate flight_id '" + entry.flight_id + "' in manifest");
        }
        const auto path = manifest.resolve(entry);
        if (!std::filesystem::is_regular_file(path)) {
            throw Error("missing flight log file '" + path.string() + "'");
        }
    }
}

CorpusManifest parse_manifest(std::string_view json_text, std::filesystem::path base_dir) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(std::string("manifest is not valid JSON: ") + e.what());
    }
    if (!doc.is_array()) throw Error("manifest must be a JSON array");

    CorpusManifest manifest;
    manifest.base_dir = std::move(base_dir);
    for (std::size_t i = 0; i < doc.size(); ++i) {
        const auto& item = doc[i];
        const auto field = [&](const char* key) -> std::string {
            if (!item.is_object() || !item.contains(key) || !item[key].is_string()) {
                throw Error("manifest entry " + std::to_string(i) + ": missing string field '" + key + "'");
            }
            return item[key].get<std::string>();
        };
        ManifestEntry entry;
        entry.path = field("path");
        entry.label = decode_label(field("label"));
        entry.flight_id = field("flight_id");
        manifest.entries.push_back(std::move(entry));
    }
    return manifest;
}

CorpusManifest read_manifest(const std::filesystem::path& manifest_path) {
    const std::string text = read_text_file(manifest_path);
    return parse_manifest(text, manifest_path.parent_path());
}

std::string render_manifest(const CorpusManifest& manifest) {
    nlohmann::ordered_json doc = nlohmann::ordered_json::array();
    for (const auto& entry : manifest.entries) {
        nlohmann::ordered_json item;
        item["path"] = entry.path.generic_string();
        item["label"] = std::string(encode_label(entry.label));
        item["flight_id"] = entry.flight_id;
        doc.push_back(std::move(item));
    }
    return doc.dump(2) + "\n";
}

void write_manifest(const CorpusManifest& manifest, const std::filesystem::path& manifest_path) {
    write_text_file(manifest_path, render_manifest(manifest));
}

std::vector<FlightLog> load_corpus(const CorpusManifest& manifest) {
    check_manifest(manifest);
    std::vector<FlightLog> logs;
    logs.reserve(manifest.entries.size());
    for (const auto& entry : manifest.entries) {
        try {
            logs.push_back(parse_flight_log(read_text_file(manifest.resolve(entry)), entry.label, entry.flight_id));
        } catch (const Error& e) {
            throw Error("flight '" + entry.flight_id + "': " + e.what());
        }
    }
    return logs;
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path.string() + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return std::move(buffer).str();
}

void write_text_file(const std::filesystem::path& path, std::string_view content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error("write failed for '" + path.string() + "'");
}

}  // namespace walldetect
