#include "walldetect/features.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>

#include "walldetect/ingest.hpp"
#include "walldetect/parallel.hpp"
#include "walldetect/rng.hpp"

namespace walldetect {

double degrees_to_radians(double deg) noexcept { return deg * (std::numbers::pi / 180.0); }

double wall_angle_theta(const WindowSummary& s) {
    // atan2 of the absolute sines equals atan(|sin psi| / |sin phi|) and
    // already yields the 0/0 -> 0 and x/0 -> pi/2 limits.
    return std::atan2(std::abs(std::sin(s.mean_psi)), std::abs(std::sin(s.mean_phi)));
}

double cosine_angle_omega(const WindowSummary& s) {
    const double r = std::cos(s.mean_phi);
    const double p = std::cos(s.mean_psi);
    return std::atan2(p, r);
}

// ---------------------------------------------------------------------------
// RollingChannel
// ---------------------------------------------------------------------------

RollingChannel::RollingChannel(std::size_t window)
    : window_(window), ring_values_(window), ring_index_(window), ring_node_(window) {
    if (window == 0) throw ConfigError("window length must be positive");
    nodes_.reserve(window);
}

bool RollingChannel::key_less(std::int32_t n, double value, std::uint64_t index) const noexcept {
    const Node& node = nodes_[static_cast<std::size_t>(n)];
    return node.value < value || (node.value == value && node.index < index);
}

void RollingChannel::update(std::int32_t n) noexcept {
    Node& node = nodes_[static_cast<std::size_t>(n)];
    std::uint32_t count = 1;
    double sum = 0.0;
    if (node.left >= 0) {
        count += nodes_[static_cast<std::size_t>(node.left)].count;
        sum = nodes_[static_cast<std::size_t>(node.left)].sum;
    }
    sum += node.value;
    if (node.right >= 0) {
        count += nodes_[static_cast<std::size_t>(node.right)].count;
        sum += nodes_[static_cast<std::size_t>(node.right)].sum;
    }
    node.count = count;
    node.sum = sum;
}

void RollingChannel::split(std::int32_t t, double value, std::uint64_t index, std::int32_t& lo, std::int32_t& hi) {
    if (t < 0) {
        lo = hi = -1;
        return;
    }
    Node& node = nodes_[static_cast<std::size_t>(t)];
    if (key_less(t, value, index)) {
        split(node.right, value, index, node.right, hi);
        lo = t;
    } else {
        split(node.left, value, index, lo, node.left);
        hi = t;
    }
    update(t);
}

std::int32_t RollingChannel::merge(std::int32_t a, std::int32_t b) {
    if (a < 0) return b;
    if (b < 0) return a;
    Node& na = nodes_[static_cast<std::size_t>(a)];
    Node& nb = nodes_[static_cast<std::size_t>(b)];
    if (na.priority > nb.priority) {
        na.right = merge(na.right, b);
        update(a);
        return a;
    }
    nb.left = merge(a, nb.left);
    update(b);
    return b;
}

void RollingChannel::push(double value, std::uint64_t index) {
    if (count_ == window_) throw Error("rolling window is full");
    const double old_mean = mean();

    std::int32_t id;
    if (!free_.empty()) {
        id = free_.back();
        free_.pop_back();
    } else {
        id = static_cast<std::int32_t>(nodes_.size());
        nodes_.emplace_back();
    }
    Node& node = nodes_[static_cast<std::size_t>(id)];
    node = Node{value, index, mix64(index), -1, -1, 1, value};

    std::int32_t lo = -1;
    std::int32_t hi = -1;
    split(root_, value, index, lo, hi);
    root_ = merge(merge(lo, id), hi);

    const std::size_t slot = (head_ + count_) % window_;
    ring_values_[slot] = value;
    ring_index_[slot] = index;
    ring_node_[slot] = id;
    ++count_;

    if (count_ == 1) {
        m2_ = 0.0;
    } else {
        m2_ += (value - old_mean) * (value - mean());
    }
}

void RollingChannel::pop() {
    if (count_ == 0) return;
    const double value = ring_values_[head_];
    const std::uint64_t index = ring_index_[head_];
    const std::int32_t id = ring_node_[head_];
    const double old_mean = mean();

    std::int32_t lo = -1;
    std::int32_t rest = -1;
    std::int32_t mid = -1;
    std::int32_t hi = -1;
    split(root_, value, index, lo, rest);
    split(rest, value, index + 1, mid, hi);
    root_ = merge(lo, hi);
    free_.push_back(id);

    head_ = (head_ + 1) % window_;
    --count_;
    if (count_ == 0) {
        m2_ = 0.0;
    } else {
        m2_ -= (value - old_mean) * (value - mean());
    }
}

void RollingChannel::recompute_second_moment() {
    const double m = mean();
    double acc = 0.0;
    for (std::size_t k = 0; k < count_; ++k) {
        const double d = ring_values_[(head_ + k) % window_] - m;
        acc += d * d;
    }
    m2_ = acc;
}

double RollingChannel::sum() const noexcept {
    return root_ < 0 ? 0.0 : nodes_[static_cast<std::size_t>(root_)].sum;
}

double RollingChannel::mean() const noexcept {
    return count_ == 0 ? 0.0 : sum() / static_cast<double>(count_);
}

double RollingChannel::sample_std() const noexcept {
    if (count_ < 2) return 0.0;
    return std::sqrt(std::max(0.0, m2_) / static_cast<double>(count_ - 1));
}

std::pair<std::size_t, double> RollingChannel::below(double x) const noexcept {
    std::size_t count = 0;
    double sum = 0.0;
    std::int32_t n = root_;
    while (n >= 0) {
        const Node& node = nodes_[static_cast<std::size_t>(n)];
        if (node.value < x) {
            if (node.left >= 0) {
                count += nodes_[static_cast<std::size_t>(node.left)].count;
                sum += nodes_[static_cast<std::size_t>(node.left)].sum;
            }
            count += 1;
            sum += node.value;
            n = node.right;
        } else {
            n = node.left;
        }
    }
    return {count, sum};
}

double RollingChannel::mean_absolute_deviation() const noexcept {
    if (count_ == 0) return 0.0;
    const double total = sum();
    const double n = static_cast<double>(count_);
    const double m = total / n;
    const auto [below_count, below_sum] = below(m);
    const double c = static_cast<double>(below_count);
    // sum |x - m| = (m*c - S_lo) + (S_hi - m*(n - c))
    const double lower = m * c - below_sum;
    const double upper = (total - below_sum) - m * (n - c);
    return std::max(0.0, (lower + upper) / n);
}

// ---------------------------------------------------------------------------
// Windows and features
// ---------------------------------------------------------------------------

namespace {

constexpr std::array<double ImuSample::*, 5> kChannels = {
    &ImuSample::gyro_x, &ImuSample::gyro_y, &ImuSample::gyro_z, &ImuSample::roll, &ImuSample::pitch};

double gyro_norm(const ImuSample& s) {
    return std::sqrt(s.gyro_x * s.gyro_x + s.gyro_y * s.gyro_y + s.gyro_z * s.gyro_z);
}

struct WindowEngine {
    explicit WindowEngine(std::size_t w)
        : channels{RollingChannel(w), RollingChannel(w), RollingChannel(w), RollingChannel(w), RollingChannel(w)},
          norm(w) {}

    void push(const ImuSample& s, std::uint64_t index) {
        for (std::size_t c = 0; c < kChannels.size(); ++c) channels[c].push(s.*kChannels[c], index);
        norm.push(gyro_norm(s), index);
    }

    void pop() {
        for (auto& ch : channels) ch.pop();
        norm.pop();
    }

    void recompute() {
        for (auto& ch : channels) ch.recompute_second_moment();
    }

    StatisticalFeatures stats() const {
        StatisticalFeatures f;
        for (std::size_t c = 0; c < kChannels.size(); ++c) {
            f.mean[c] = channels[c].mean();
            f.std[c] = channels[c].sample_std();
            f.mad[c] = channels[c].mean_absolute_deviation();
        }
        f.average_resultant = norm.mean();
        return f;
    }

    std::array<RollingChannel, 5> channels;
    RollingChannel norm;
};

FeatureVector assemble(const StatisticalFeatures& st) {
    FeatureVector fv{};
    for (std::size_t c = 0; c < 5; ++c) {
        fv[feature_index::kMean + c] = st.mean[c];
        fv[feature_index::kStd + c] = st.std[c];
        fv[feature_index::kMad + c] = st.mad[c];
    }
    fv[feature_index::kAverageResultant] = st.average_resultant;
    const WindowSummary summary{degrees_to_radians(st.mean[3]), degrees_to_radians(st.mean[4])};
    fv[feature_index::kTheta] = wall_angle_theta(summary);
    fv[feature_index::kOmega] = cosine_angle_omega(summary);
    return fv;
}

void require_windowable(const FlightLog& log) {
    for (const auto& v : validate_flight_log(log)) {
        if (is_hard_rule(v.rule) || v.rule == Rule::TooShort) {
            throw ValidationError("flight '" + log.flight_id + "': " + v.message);
        }
    }
}

}  // namespace

std::vector<Window> sliding_windows(const FlightLog& log) {
    const std::size_t w = window_length(log.sample_rate_hz);
    if (log.samples.size() < w) {
        throw ValidationError("flight '" + log.flight_id + "': too short for one window (" +
                              std::to_string(log.samples.size()) + " < " + std::to_string(w) + ")");
    }
    std::vector<Window> out;
    out.reserve(log.samples.size() - w + 1);
    const std::span<const ImuSample> all(log.samples);
    for (std::size_t i = 0; i + w <= log.samples.size(); ++i) {
        out.push_back({all.subspan(i, w), log.flight_id, i});
    }
    return out;
}

StatisticalFeatures summarize_window(const Window& w) {
    if (w.samples.size() < 2) throw ValidationError("window needs at least two samples");
    WindowEngine engine(w.samples.size());
    for (std::size_t j = 0; j < w.samples.size(); ++j) engine.push(w.samples[j], w.start_index + j);
    engine.recompute();
    return engine.stats();
}

std::vector<DatasetRow> extract_flight_features(const FlightLog& log) {
    require_windowable(log);
    const std::size_t w = window_length(log.sample_rate_hz);
    const std::size_t n = log.samples.size();

    std::vector<DatasetRow> rows;
    rows.reserve(n - w + 1);
    WindowEngine engine(w);
    for (std::size_t i = 0; i < n; ++i) {
        if (i >= w) engine.pop();
        engine.push(log.samples[i], i);
        if (i + 1 < w) continue;
        const std::size_t start = i + 1 - w;
        if (start % w == 0) engine.recompute();
        rows.push_back({assemble(engine.stats()), log.label, log.flight_id, start});
    }
    return rows;
}

Dataset extract_features(const std::vector<FlightLog>& logs) {
    std::vector<std::vector<DatasetRow>> per_flight(logs.size());
    parallel_for(logs.size(), [&](std::size_t i) { per_flight[i] = extract_flight_features(logs[i]); });

    std::size_t total = 0;
    for (const auto& rows : per_flight) total += rows.size();
    std::vector<DatasetRow> rows;
    rows.reserve(total);
    for (auto& part : per_flight) std::move(part.begin(), part.end(), std::back_inserter(rows));
    return Dataset(std::move(rows));
}

// ---------------------------------------------------------------------------
// Feature file
// ---------------------------------------------------------------------------

namespace {

std::string feature_header() {
    std::string header = "flight_id,start_index,label";
    for (auto name : feature_names()) {
        header += ',';
        header += name;
    }
    return header;
}

}  // namespace

std::string render_feature_file(const Dataset& dataset) {
    std::string out = feature_header();
    out.push_back('\n');
    out.reserve(dataset.size() * 360 + out.size());
    for (const auto& row : dataset.rows()) {
        out += row.flight_id;
        out.push_back(',');
        out += std::to_string(row.start_index);
        out.push_back(',');
        out += encode_label(row.label);
        for (double v : row.features) {
            out.push_back(',');
            append_number(out, v);
        }
        out.push_back('\n');
    }
    return out;
}

Dataset parse_feature_file(std::string_view content) {
    const std::string header = feature_header();
    std::vector<DatasetRow> rows;
    std::size_t line_no = 0;
    bool have_header = false;
    std::size_t pos = 0;
    std::vector<std::string_view> fields;
    while (pos < content.size()) {
        std::size_t end = content.find('\n', pos);
        if (end == std::string_view::npos) end = content.size();
        std::string_view line = content.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty()) continue;
        if (!have_header) {
            if (line != header) throw ParseError(line_no, "unexpected feature file header");
            have_header = true;
            continue;
        }

        fields.clear();
        std::size_t start = 0;
        while (true) {
            const std::size_t comma = line.find(',', start);
            if (comma == std::string_view::npos) {
                fields.push_back(line.substr(start));
                break;
            }
            fields.push_back(line.substr(start, comma - start));
            start = comma + 1;
        }
        if (fields.size() != 3 + kFeatureCount) {
            throw ParseError(line_no, "expected " + std::to_string(3 + kFeatureCount) + " columns, got " +
                                          std::to_string(fields.size()));
        }

        DatasetRow row;
        row.flight_id = std::string(fields[0]);
        if (row.flight_id.empty()) throw ParseError(line_no, "empty flight_id");
        {
            const auto f = fields[1];
            const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), row.start_index);
            if (ec != std::errc() || ptr != f.data() + f.size()) throw ParseError(line_no, "bad start_index");
        }
        const auto label = try_decode_label(fields[2]);
        if (!label) throw ParseError(line_no, "unknown label '" + std::string(fields[2]) + "'");
        row.label = *label;
        for (std::size_t k = 0; k < kFeatureCount; ++k) {
            const auto f = fields[3 + k];
            const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), row.features[k]);
            if (ec != std::errc() || ptr != f.data() + f.size()) {
                throw ParseError(line_no, "non-numeric value in column " + std::string(feature_names()[k]));
            }
        }
        rows.push_back(std::move(row));
    }
    if (!have_header) throw ParseError(1, "missing feature file header");
    return Dataset(std::move(rows));
}

}  // namespace walldetect
