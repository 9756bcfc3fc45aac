#include "walldetect/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <json.hpp>

#include "walldetect/parallel.hpp"

namespace walldetect {

namespace {

constexpr double kReferenceDistance = 0.1;
constexpr double kMinDistance = 0.05;
constexpr double kFlightSpeed = 0.1;     // m/s
constexpr double kFlightHeight = 0.25;   // m
constexpr double kAccelNoise = 0.02;     // g
constexpr double kPositionNoise = 0.005; // m
constexpr double kSeaLevelPressure = 1013.25;  // hPa
constexpr double kPressureLapse = 0.12;        // hPa per m
constexpr double kPressureNoise = 0.02;

void require(bool ok, const char* field, const char* rule) {
    if (!ok) throw ConfigError(std::string("sim config: ") + field + " " + rule);
}

double deg2rad(double deg) { return deg * std::numbers::pi / 180.0; }

/// "left-03" and "right-03" map to one key when side noise is paired.
std::string noise_key(WallLabel label, const SimConfig& cfg, const std::string& flight_id) {
    if (!cfg.paired_side_noise || (label != WallLabel::Left && label != WallLabel::Right)) return flight_id;
    const std::string prefix = std::string(encode_label(label)) + "-";
    if (flight_id.rfind(prefix, 0) != 0) return flight_id;
    return "side-" + flight_id.substr(prefix.size());
}

template <typename T>
void read_field(const nlohmann::json& doc, const char* key, T& out) {
    if (!doc.contains(key)) return;
    try {
        out = doc.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ConfigError(std::string("sim config: field '") + key + "' has the wrong type");
    }
}

}  // namespace

void validate_sim_config(const SimConfig& cfg) {
    const auto finite_nonneg = [](double v) { return std::isfinite(v) && v >= 0.0; };
    require(std::isfinite(cfg.sample_rate_hz) && cfg.sample_rate_hz > 0.0, "sample_rate_hz", "must be > 0");
    require(std::isfinite(cfg.duration_s) && cfg.duration_s >= 1.0, "duration_s", "must be >= 1");
    require(cfg.wall_duration_s == 0.0 || (std::isfinite(cfg.wall_duration_s) && cfg.wall_duration_s >= 1.0),
            "wall_duration_s", "must be 0 or >= 1");
    require(finite_nonneg(cfg.base_noise_std), "base_noise_std", "must be non-negative");
    require(finite_nonneg(cfg.yaw_noise_std), "yaw_noise_std", "must be non-negative");
    require(finite_nonneg(cfg.disturbance_amp), "disturbance_amp", "must be non-negative");
    require(finite_nonneg(cfg.disturbance_freq_hz), "disturbance_freq_hz", "must be non-negative");
    require(finite_nonneg(cfg.band_noise_fraction), "band_noise_fraction", "must be non-negative");
    require(finite_nonneg(cfg.band_cutoff_hz), "band_cutoff_hz", "must be non-negative");
    require(finite_nonneg(cfg.attitude_gain), "attitude_gain", "must be non-negative");
    require(finite_nonneg(cfg.cross_axis_bleed), "cross_axis_bleed", "must be non-negative");
    require(finite_nonneg(cfg.stabilizer_gain), "stabilizer_gain", "must be non-negative");
    require(std::isfinite(cfg.wall_range_m) && cfg.wall_range_m > 0.0, "wall_range_m", "must be > 0");
    require(!cfg.distance_profile.empty(), "distance_profile", "must have at least one knot");
    for (std::size_t i = 0; i < cfg.distance_profile.size(); ++i) {
        const auto& k = cfg.distance_profile[i];
        require(finite_nonneg(k.t) && finite_nonneg(k.distance_m), "distance_profile", "knots must be non-negative");
        require(i == 0 || k.t > cfg.distance_profile[i - 1].t, "distance_profile", "knot times must increase");
    }
}

SimConfig parse_sim_config(std::string_view json_text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("sim config is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ConfigError("sim config must be a JSON object");

    static const std::vector<std::string> known = {
        "duration_s", "wall_duration_s", "sample_rate_hz", "base_noise_std", "yaw_noise_std",
        "disturbance_amp", "disturbance_freq_hz", "band_noise_fraction", "band_cutoff_hz",
        "attitude_gain", "cross_axis_bleed", "stabilizer_gain", "wall_range_m", "paired_side_noise",
        "distance_profile", "seed"};
    for (const auto& item : doc.items()) {
        if (std::find(known.begin(), known.end(), item.key()) == known.end()) {
            throw ConfigError("sim config: unknown field '" + item.key() + "'");
        }
    }

    SimConfig cfg;
    read_field(doc, "duration_s", cfg.duration_s);
    read_field(doc, "wall_duration_s", cfg.wall_duration_s);
    read_field(doc, "sample_rate_hz", cfg.sample_rate_hz);
    read_field(doc, "base_noise_std", cfg.base_noise_std);
    read_field(doc, "yaw_noise_std", cfg.yaw_noise_std);
    read_field(doc, "disturbance_amp", cfg.disturbance_amp);
    read_field(doc, "disturbance_freq_hz", cfg.disturbance_freq_hz);
    read_field(doc, "band_noise_fraction", cfg.band_noise_fraction);
    read_field(doc, "band_cutoff_hz", cfg.band_cutoff_hz);
    read_field(doc, "attitude_gain", cfg.attitude_gain);
    read_field(doc, "cross_axis_bleed", cfg.cross_axis_bleed);
    read_field(doc, "stabilizer_gain", cfg.stabilizer_gain);
    read_field(doc, "wall_range_m", cfg.wall_range_m);
    read_field(doc, "paired_side_noise", cfg.paired_side_noise);
    read_field(doc, "seed", cfg.seed);
    if (doc.contains("distance_profile")) {
        const auto& profile = doc["distance_profile"];
        if (!profile.is_array()) throw ConfigError("sim config: distance_profile must be an array");
        cfg.distance_profile.clear();
        for (const auto& knot : profile) {
            if (!knot.is_array() || knot.size() != 2 || !knot[0].is_number() || !knot[1].is_number()) {
                throw ConfigError("sim config: distance_profile entries must be [t, distance_m] pairs");
            }
            cfg.distance_profile.push_back({knot[0].get<double>(), knot[1].get<double>()});
        }
    }
    validate_sim_config(cfg);
    return cfg;
}

std::string render_sim_config(const SimConfig& cfg) {
    nlohmann::ordered_json doc;
    doc["duration_s"] = cfg.duration_s;
    doc["wall_duration_s"] = cfg.wall_duration_s;
    doc["sample_rate_hz"] = cfg.sample_rate_hz;
    doc["base_noise_std"] = cfg.base_noise_std;
    doc["yaw_noise_std"] = cfg.yaw_noise_std;
    doc["disturbance_amp"] = cfg.disturbance_amp;
    doc["disturbance_freq_hz"] = cfg.disturbance_freq_hz;
    doc["band_noise_fraction"] = cfg.band_noise_fraction;
    doc["band_cutoff_hz"] = cfg.band_cutoff_hz;
    doc["attitude_gain"] = cfg.attitude_gain;
    doc["cross_axis_bleed"] = cfg.cross_axis_bleed;
    doc["stabilizer_gain"] = cfg.stabilizer_gain;
    doc["wall_range_m"] = cfg.wall_range_m;
    doc["paired_side_noise"] = cfg.paired_side_noise;
    auto profile = nlohmann::ordered_json::array();
    for (const auto& k : cfg.distance_profile) profile.push_back({k.t, k.distance_m});
    doc["distance_profile"] = std::move(profile);
    doc["seed"] = cfg.seed;
    return doc.dump(2) + "\n";
}

double distance_at(const SimConfig& cfg, double t) {
    const auto& knots = cfg.distance_profile;
    if (knots.empty()) return kReferenceDistance;
    if (t <= knots.front().t) return knots.front().distance_m;
    if (t >= knots.back().t) return knots.back().distance_m;
    const auto hi = std::upper_bound(knots.begin(), knots.end(), t,
                                     [](double value, const DistanceKnot& k) { return value < k.t; });
    const auto lo = hi - 1;
    const double frac = (t - lo->t) / (hi->t - lo->t);
    return lo->distance_m + frac * (hi->distance_m - lo->distance_m);
}

NoiseSource::NoiseSource(std::uint64_t seed, const SimConfig& cfg) : rng_(seed) {
    phase_ = 2.0 * std::numbers::pi * uniform01(rng_);
    const double dt = 1.0 / cfg.sample_rate_hz;
    band_coeff_ = std::exp(-2.0 * std::numbers::pi * cfg.band_cutoff_hz * dt);
    band_innovation_ = std::sqrt(std::max(0.0, 1.0 - band_coeff_ * band_coeff_));
    band_ = normal_(rng_);
}

double NoiseSource::gaussian() { return normal_(rng_); }

double NoiseSource::band_step() {
    band_ = band_coeff_ * band_ + band_innovation_ * normal_(rng_);
    return band_;
}

DisturbanceIncrement disturbance_at(WallLabel label, double t, const SimConfig& cfg, NoiseSource& noise) {
    const double band = noise.band_step();
    if (label == WallLabel::NoWall) return {};

    const double distance = distance_at(cfg, t);
    if (distance >= cfg.wall_range_m) return {};
    const double scale = kReferenceDistance / std::max(distance, kMinDistance);
    const double amp = cfg.disturbance_amp * scale;
    const double wave = std::sin(2.0 * std::numbers::pi * cfg.disturbance_freq_hz * t + noise.phase());
    const double rate = amp * (wave + cfg.band_noise_fraction * band);
    const double bias = cfg.attitude_gain * amp;
    const double bleed = cfg.cross_axis_bleed;

    DisturbanceIncrement inc;
    switch (label) {
        case WallLabel::Left:
        case WallLabel::Right: {
            const double sign = label == WallLabel::Left ? 1.0 : -1.0;
            inc.gyro_x = sign * rate;
            inc.roll = sign * bias;
            inc.gyro_y = bleed * rate;
            inc.pitch = bleed * bias;
            break;
        }
        case WallLabel::Front:
            inc.gyro_y = rate;
            inc.pitch = bias;
            inc.gyro_x = bleed * rate;
            inc.roll = bleed * bias;
            break;
        case WallLabel::NoWall:
            break;
    }
    return inc;
}

FlightLog simulate_flight(WallLabel label, const SimConfig& cfg, const std::string& flight_id, NoiseMirror mirror) {
    validate_sim_config(cfg);
    const auto n = static_cast<std::size_t>(std::llround(cfg.duration_for(label) * cfg.sample_rate_hz));
    const double dt = 1.0 / cfg.sample_rate_hz;

    NoiseSource noise(derive_seed(cfg.seed, hash_string(noise_key(label, cfg, flight_id))), cfg);
    const bool along_y = label == WallLabel::Front;
    const double k = cfg.stabilizer_gain;

    FlightLog log;
    log.label = label;
    log.flight_id = flight_id;
    log.sample_rate_hz = cfg.sample_rate_hz;
    log.samples.reserve(n);

    double roll = 0.0;
    double pitch = 0.0;
    double yaw = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / cfg.sample_rate_hz;
        const DisturbanceIncrement inc = disturbance_at(label, t, cfg, noise);
        double noise_x = cfg.base_noise_std * noise.gaussian();
        if (mirror == NoiseMirror::Roll) noise_x = -noise_x;
        const double noise_y = cfg.base_noise_std * noise.gaussian();
        const double noise_z = cfg.yaw_noise_std * noise.gaussian();

        ImuSample s;
        s.t = t;
        s.gyro_x = noise_x + inc.gyro_x;
        s.gyro_y = noise_y + inc.gyro_y;
        s.gyro_z = noise_z + inc.gyro_z;
        roll += dt * (s.gyro_x - k * (roll - inc.roll));
        pitch += dt * (s.gyro_y - k * (pitch - inc.pitch));
        yaw += dt * (s.gyro_z - k * yaw);
        s.roll = roll;
        s.pitch = pitch;
        s.yaw = yaw;

        const double r = deg2rad(roll);
        const double p = deg2rad(pitch);
        s.acc_x = -std::sin(p) + kAccelNoise * noise.gaussian();
        s.acc_y = std::sin(r) * std::cos(p) + kAccelNoise * noise.gaussian();
        s.acc_z = std::cos(r) * std::cos(p) + kAccelNoise * noise.gaussian();

        const double travel = kFlightSpeed * t;
        s.pos_x = (along_y ? 0.0 : travel) + kPositionNoise * noise.gaussian();
        s.pos_y = (along_y ? travel : 0.0) + kPositionNoise * noise.gaussian();
        s.pos_z = kFlightHeight + kPositionNoise * noise.gaussian();
        s.pressure = kSeaLevelPressure - kPressureLapse * s.pos_z + kPressureNoise * noise.gaussian();
        log.samples.push_back(s);
    }

    for (const auto& v : validate_flight_log(log)) {
        if (is_hard_rule(v.rule)) {
            throw ConfigError("sim config produces an invalid flight '" + flight_id + "': " + v.message);
        }
    }
    return log;
}

CorpusManifest generate_corpus(const SimConfig& cfg, std::size_t flights_per_class,
                               const std::filesystem::path& out_dir) {
    validate_sim_config(cfg);

    CorpusManifest manifest;
    manifest.base_dir = out_dir;
    for (WallLabel label : kAllLabels) {
        for (std::size_t k = 0; k < flights_per_class; ++k) {
            char id[64];
            std::snprintf(id, sizeof id, "%s-%02zu", std::string(encode_label(label)).c_str(), k + 1);
            manifest.entries.push_back({std::string(id) + ".csv", label, id});
        }
    }

    std::vector<std::string> rendered(manifest.entries.size());
    parallel_for(manifest.entries.size(), [&](std::size_t i) {
        const auto& e = manifest.entries[i];
        rendered[i] = render_flight_log(simulate_flight(e.label, cfg, e.flight_id));
    });

    std::vector<std::filesystem::path> written;
    try {
        std::filesystem::create_directories(out_dir);
        for (std::size_t i = 0; i < manifest.entries.size(); ++i) {
            const auto path = manifest.resolve(manifest.entries[i]);
            written.push_back(path);
            write_text_file(path, rendered[i]);
        }
        const auto manifest_path = out_dir / kManifestFileName;
        written.push_back(manifest_path);
        write_manifest(manifest, manifest_path);
    } catch (...) {
        std::error_code ec;
        for (const auto& path : written) std::filesystem::remove(path, ec);
        throw;
    }
    return manifest;
}

}  // namespace walldetect
