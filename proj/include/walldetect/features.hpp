/**
 * @file features.hpp
 * @brief 18-feature summaries over a one-second window advanced one sample at a time.
 *
 * Per window and per channel (gyro_x, gyro_y, gyro_z, roll, pitch): mean,
 * sample standard deviation (n - 1 divisor) and mean absolute deviation; then
 * the mean per-sample gyro norm and the two attitude angles theta and omega.
 * Statistics stay in logged units; only the angle features use radians.
 */
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "walldetect/core.hpp"

namespace walldetect {

struct Window {
    std::span<const ImuSample> samples;
    std::string_view flight_id;
    std::size_t start_index = 0;
};

/// Window-averaged roll (phi) and pitch (psi), radians.
struct WindowSummary {
    double mean_phi = 0.0;
    double mean_psi = 0.0;
};

/// Every full window of the log at stride 1; exactly len - W + 1 of them.
/// Throws ValidationError when the log is shorter than one window.
std::vector<Window> sliding_windows(const FlightLog& log);

struct StatisticalFeatures {
    std::array<double, 5> mean{};
    std::array<double, 5> std{};
    std::array<double, 5> mad{};
    double average_resultant = 0.0;
};

StatisticalFeatures summarize_window(const Window& w);

/// Angle between the projected roll/pitch unit-vector sum and the x axis:
/// atan(|sin psi| / |sin phi|), in [0, pi/2]. 0/0 gives 0, x/0 gives pi/2.
double wall_angle_theta(const WindowSummary& s);

/// atan2(cos psi, cos phi).
double cosine_angle_omega(const WindowSummary& s);

double degrees_to_radians(double deg) noexcept;

/**
 * Streaming window statistics for one channel.
 *
 * Values live in a treap keyed by (value, sample index) whose priorities are a
 * bijective hash of the sample index. That makes the tree shape a function of
 * the window contents only, so the subtree sums (and with them the mean and
 * MAD) do not depend on insertion history. Push/pop/query are O(log W).
 * The second moment is updated incrementally and recomputed exactly whenever
 * the window start is a multiple of W, which bounds drift while keeping every
 * window's output independent of samples after it.
 */
class RollingChannel {
public:
    explicit RollingChannel(std::size_t window);

    void push(double value, std::uint64_t index);
    /// Removes the oldest value.
    void pop();
    /// Re-derives the second moment from the buffered values.
    void recompute_second_moment();

    std::size_t size() const noexcept { return count_; }
    double sum() const noexcept;
    double mean() const noexcept;
    double sample_std() const noexcept;
    double mean_absolute_deviation() const noexcept;

private:
    struct Node {
        double value = 0.0;
        std::uint64_t index = 0;
        std::uint64_t priority = 0;
        std::int32_t left = -1;
        std::int32_t right = -1;
        std::uint32_t count = 0;
        double sum = 0.0;
    };

    void update(std::int32_t n) noexcept;
    bool key_less(std::int32_t n, double value, std::uint64_t index) const noexcept;
    void split(std::int32_t t, double value, std::uint64_t index, std::int32_t& lo, std::int32_t& hi);
    std::int32_t merge(std::int32_t a, std::int32_t b);
    /// Count and sum of values strictly below x.
    std::pair<std::size_t, double> below(double x) const noexcept;

    std::size_t window_;
    std::vector<Node> nodes_;
    std::vector<std::int32_t> free_;
    std::int32_t root_ = -1;
    // Ring buffer of (value, index, node) in arrival order.
    std::vector<double> ring_values_;
    std::vector<std::uint64_t> ring_index_;
    std::vector<std::int32_t> ring_node_;
    std::size_t head_ = 0;
    std::size_t count_ = 0;
    double m2_ = 0.0;
};

/// Features for every window of one flight, in start-index order.
std::vector<DatasetRow> extract_flight_features(const FlightLog& log);

/// Rows for all logs, ordered by (flight_id, start_index). Errors name the flight.
Dataset extract_features(const std::vector<FlightLog>& logs);

/// Feature file: header `flight_id,start_index,label,<18 feature names>`.
std::string render_feature_file(const Dataset& dataset);
Dataset parse_feature_file(std::string_view content);

}  // namespace walldetect
