/**
 * @file core.hpp
 * @brief Domain types shared by every stage of the wall-detection pipeline.
 *
 * Angles are kept in degrees exactly as the flight controller logs them;
 * conversion to radians happens only inside the angle features.
 */
#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace walldetect {

// ========== Errors ==========

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed delimited-text input. `line` is 1-based.
class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class ValidationError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

// ========== Labels ==========

enum class WallLabel : std::uint8_t { Left = 0, Right = 1, Front = 2, NoWall = 3 };

inline constexpr std::array<WallLabel, 4> kAllLabels = {
    WallLabel::Left, WallLabel::Right, WallLabel::Front, WallLabel::NoWall};

enum class BinaryLabel : std::uint8_t { Wall = 0, NoWall = 1 };

constexpr BinaryLabel binary_view(WallLabel label) noexcept {
    return label == WallLabel::NoWall ? BinaryLabel::NoWall : BinaryLabel::Wall;
}

std::string_view encode_label(WallLabel label) noexcept;
std::string_view encode_binary(BinaryLabel label) noexcept;

/// Inverse of encode_label. Throws Error on an unknown token.
WallLabel decode_label(std::string_view token);
std::optional<WallLabel> try_decode_label(std::string_view token) noexcept;

// ========== Telemetry ==========

/// One 100 Hz telemetry row. Rates in deg/s, attitude in degrees,
/// acceleration in g, position in meters.
struct ImuSample {
    double t = 0.0;
    double gyro_x = 0.0;
    double gyro_y = 0.0;
    double gyro_z = 0.0;
    double acc_x = 0.0;
    double acc_y = 0.0;
    double acc_z = 0.0;
    double roll = 0.0;
    double pitch = 0.0;
    double yaw = 0.0;
    double pos_x = 0.0;
    double pos_y = 0.0;
    double pos_z = 0.0;
    double pressure = 0.0;

    bool operator==(const ImuSample&) const = default;
};

inline constexpr double kDefaultSampleRateHz = 100.0;
inline constexpr double kMaxAttitudeDeg = 90.0;

struct FlightLog {
    std::vector<ImuSample> samples;
    WallLabel label = WallLabel::NoWall;
    std::string flight_id;
    double sample_rate_hz = kDefaultSampleRateHz;

    bool operator==(const FlightLog&) const = default;
};

/// Number of samples in a one-second window at the log's rate.
std::size_t window_length(double sample_rate_hz);

enum class Rule : std::uint8_t {
    TimeNotFinite,
    TimeNegative,
    NonMonotonicTime,
    AttitudeOutOfRange,
    TooShort,
    SampleRateOff,
};

std::string_view rule_name(Rule rule) noexcept;

/// Hard rules make a log unusable; soft ones (length, timing) are advisory.
constexpr bool is_hard_rule(Rule rule) noexcept {
    return rule != Rule::TooShort && rule != Rule::SampleRateOff;
}

struct Violation {
    std::size_t index = 0;
    Rule rule = Rule::TooShort;
    std::string message;
};

/// Checks every FlightLog invariant. Empty result iff the log is well formed.
std::vector<Violation> validate_flight_log(const FlightLog& log);

// ========== Features ==========

inline constexpr std::size_t kFeatureCount = 18;
using FeatureVector = std::array<double, kFeatureCount>;

/// Feature order: 5 means, 5 stds, 5 MADs over (gyro_x, gyro_y, gyro_z,
/// roll, pitch), then average_resultant, theta, omega.
const std::array<std::string_view, kFeatureCount>& feature_names() noexcept;

namespace feature_index {
inline constexpr std::size_t kMean = 0;
inline constexpr std::size_t kStd = 5;
inline constexpr std::size_t kMad = 10;
inline constexpr std::size_t kAverageResultant = 15;
inline constexpr std::size_t kTheta = 16;
inline constexpr std::size_t kOmega = 17;
}  // namespace feature_index

struct DatasetRow {
    FeatureVector features{};
    WallLabel label = WallLabel::NoWall;
    std::string flight_id;
    std::size_t start_index = 0;

    bool operator==(const DatasetRow&) const = default;
};

/// Window-level example set. Rows are kept ordered by (flight_id, start_index).
class Dataset {
public:
    Dataset() = default;
    explicit Dataset(std::vector<DatasetRow> rows);

    const std::vector<DatasetRow>& rows() const noexcept { return rows_; }
    std::size_t size() const noexcept { return rows_.size(); }
    bool empty() const noexcept { return rows_.empty(); }

    /// Rows per label, indexed by WallLabel value.
    std::array<std::size_t, 4> label_counts() const noexcept;

    bool operator==(const Dataset&) const = default;

private:
    std::vector<DatasetRow> rows_;
};

}  // namespace walldetect
