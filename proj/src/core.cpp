#include "walldetect/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace walldetect {

std::string_view encode_label(WallLabel label) noexcept {
    switch (label) {
        case WallLabel::Left: return "left";
        case WallLabel::Right: return "right";
        case WallLabel::Front: return "front";
        case WallLabel::NoWall: return "nowall";
    }
    return "nowall";
}

std::string_view encode_binary(BinaryLabel label) noexcept {
    return label == BinaryLabel::Wall ? "wall" : "nowall";
}

std::optional<WallLabel> try_decode_label(std::string_view token) noexcept {
    for (WallLabel label : kAllLabels) {
        if (encode_label(label) == token) return label;
    }
    return std::nullopt;
}

WallLabel decode_label(std::string_view token) {
    if (auto label = try_decode_label(token)) return *label;
    throw Error("unknown wall label '" + std::string(token) + "'");
}

std::size_t window_length(double sample_rate_hz) {
    if (!(sample_rate_hz > 0.0) || !std::isfinite(sample_rate_hz)) {
        throw ConfigError("sample rate must be positive and finite");
    }
    return std::max<std::size_t>(2, static_cast<std::size_t>(std::llround(sample_rate_hz)));
}

std::string_view rule_name(Rule rule) noexcept {
    switch (rule) {
        case Rule::TimeNotFinite: return "time-not-finite";
        case Rule::TimeNegative: return "time-negative";
        case Rule::NonMonotonicTime: return "non-monotonic-time";
        case Rule::AttitudeOutOfRange: return "attitude-out-of-range";
        case Rule::TooShort: return "too-short";
        case Rule::SampleRateOff: return "sample-rate-off";
    }
    return "unknown";
}

std::vector<Violation> validate_flight_log(const FlightLog& log) {
    std::vector<Violation> out;
    const auto& s = log.samples;
    const auto at = [](std::size_t i) { return " at index " + std::to_string(i); };

    for (std::size_t i = 0; i < s.size(); ++i) {
        const double t = s[i].t;
        if (!std::isfinite(t)) {
            out.push_back({i, Rule::TimeNotFinite, "non-finite t" + at(i)});
        } else if (t < 0.0) {
            out.push_back({i, Rule::TimeNegative, "negative t" + at(i)});
        }
        if (i > 0 && std::isfinite(t) && std::isfinite(s[i - 1].t) && !(t > s[i - 1].t)) {
            out.push_back({i, Rule::NonMonotonicTime, "non-monotonic t" + at(i)});
        }
        const bool roll_ok = std::abs(s[i].roll) < kMaxAttitudeDeg;
        const bool pitch_ok = std::abs(s[i].pitch) < kMaxAttitudeDeg;
        if (!roll_ok || !pitch_ok) {
            out.push_back({i, Rule::AttitudeOutOfRange,
                           std::string(roll_ok ? "pitch" : "roll") + " outside (-90, 90) degrees" + at(i)});
        }
    }

    std::size_t needed = 0;
    try {
        needed = window_length(log.sample_rate_hz);
    } catch (const ConfigError&) {
        out.push_back({0, Rule::SampleRateOff, "sample rate must be positive"});
        return out;
    }
    if (s.size() < needed) {
        out.push_back({s.size(), Rule::TooShort, "too short for one window"});
    }

    // Timing is advisory: flag when the mean gap strays more than 20% from nominal.
    if (s.size() >= 2 && std::isfinite(s.front().t) && std::isfinite(s.back().t)) {
        const double mean_gap = (s.back().t - s.front().t) / static_cast<double>(s.size() - 1);
        const double nominal = 1.0 / log.sample_rate_hz;
        if (std::abs(mean_gap - nominal) > 0.2 * nominal) {
            out.push_back({0, Rule::SampleRateOff,
                           "mean sample gap " + std::to_string(mean_gap) + " s outside 20% of nominal"});
        }
    }
    return out;
}

const std::array<std::string_view, kFeatureCount>& feature_names() noexcept {
    static const std::array<std::string_view, kFeatureCount> names = {
        "mean_gyro_x", "mean_gyro_y", "mean_gyro_z", "mean_roll", "mean_pitch",
        "std_gyro_x",  "std_gyro_y",  "std_gyro_z",  "std_roll",  "std_pitch",
        "mad_gyro_x",  "mad_gyro_y",  "mad_gyro_z",  "mad_roll",  "mad_pitch",
        "average_resultant", "theta", "omega",
    };
    return names;
}

Dataset::Dataset(std::vector<DatasetRow> rows) : rows_(std::move(rows)) {
    std::stable_sort(rows_.begin(), rows_.end(), [](const DatasetRow& a, const DatasetRow& b) {
        if (a.flight_id != b.flight_id) return a.flight_id < b.flight_id;
        return a.start_index < b.start_index;
    });
    for (std::size_t i = 0; i < rows_.size(); ++i) {
        const auto& row = rows_[i];
        for (double v : row.features) {
            if (!std::isfinite(v)) {
                throw ValidationError("non-finite feature in flight '" + row.flight_id + "' window " +
                                      std::to_string(row.start_index));
            }
        }
        if (i > 0 && rows_[i - 1].flight_id == row.flight_id &&
            rows_[i - 1].start_index == row.start_index) {
            throw ValidationError("duplicate window " + std::to_string(row.start_index) + " in flight '" +
                                  row.flight_id + "'");
        }
    }
}

std::array<std::size_t, 4> Dataset::label_counts() const noexcept {
    std::array<std::size_t, 4> counts{};
    for (const auto& row : rows_) ++counts[static_cast<std::size_t>(row.label)];
    return counts;
}

}  // namespace walldetect
