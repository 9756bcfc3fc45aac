/**
 * @file simulate.hpp
 * @brief Synthetic flight generator built around a one-sided ground-effect model.
 *
 * A wall near the vehicle deflects rotor downwash into a cushion of air under
 * one side. The model turns that into:
 *   - an oscillating rate disturbance (sinusoid with random phase plus
 *     band-limited noise) on the axis facing the wall: roll for left/right
 *     walls, pitch for a front wall;
 *   - a constant-sign attitude bias toward the wall side;
 *   - a fixed fraction of the dominant-axis disturbance bleeding onto the
 *     other axis.
 * Both scale with 0.1 m / max(distance, 0.05 m), so the reference amplitude is
 * the one felt at 10 cm. Roll and pitch are integrated from the disturbed rates
 * with a proportional stabilizer pull toward the (biased) setpoint.
 *
 * Every flight draws from its own stream seeded by (seed, flight_id), so
 * generation order and parallelism never change the output.
 */
#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "walldetect/core.hpp"
#include "walldetect/ingest.hpp"
#include "walldetect/rng.hpp"

namespace walldetect {

struct DistanceKnot {
    double t = 0.0;           ///< seconds
    double distance_m = 0.1;  ///< wall distance, meters

    bool operator==(const DistanceKnot&) const = default;
};

struct SimConfig {
    double duration_s = 30.0;       ///< flights without a wall
    double wall_duration_s = 18.0;  ///< flights along a wall; 0 means use duration_s
    double sample_rate_hz = 100.0;
    double base_noise_std = 4.0;    ///< deg/s, roll/pitch rate jitter
    double yaw_noise_std = 20.0;    ///< deg/s, yaw rate jitter
    double disturbance_amp = 9.0;   ///< deg/s at the 0.1 m reference distance
    double disturbance_freq_hz = 2.5;
    double band_noise_fraction = 1.0;  ///< band-limited noise std relative to amp
    double band_cutoff_hz = 0.5;
    double attitude_gain = 0.05;    ///< degrees of bias per deg/s of disturbance amplitude
    double cross_axis_bleed = 0.1;
    double stabilizer_gain = 2.0;   ///< 1/s pull of roll/pitch toward the setpoint
    double wall_range_m = 0.5;      ///< no disturbance at or beyond this distance
    /// Left and right flights with the same number replay one base-noise stream.
    bool paired_side_noise = true;
    /// Wall distance along each pass: close for 10.5 s, then drifting out of range.
    std::vector<DistanceKnot> distance_profile = {{0.0, 0.1}, {10.5, 0.1}, {11.5, 1.0}};
    std::uint64_t seed = 42;

    bool operator==(const SimConfig&) const = default;

    double duration_for(WallLabel label) const noexcept {
        return (label != WallLabel::NoWall && wall_duration_s > 0.0) ? wall_duration_s : duration_s;
    }
};

/// Throws ConfigError naming the first invalid field.
void validate_sim_config(const SimConfig& cfg);

/// Unspecified fields keep their defaults; unknown fields are an error.
SimConfig parse_sim_config(std::string_view json_text);
std::string render_sim_config(const SimConfig& cfg);

/// Piecewise-linear wall distance at time t, held constant outside the knots.
double distance_at(const SimConfig& cfg, double t);

/// Random state consumed by the disturbance model and the base sensor noise.
class NoiseSource {
public:
    NoiseSource(std::uint64_t seed, const SimConfig& cfg);

    double gaussian();
    /// Advances the unit-variance AR(1) band-limited process by one sample.
    double band_step();
    double phase() const noexcept { return phase_; }

private:
    Rng rng_;
    double phase_ = 0.0;
    double band_ = 0.0;
    double band_coeff_ = 0.0;
    double band_innovation_ = 0.0;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

/// Additive disturbance at one sample: rate increments in deg/s, attitude
/// setpoint bias in degrees.
struct DisturbanceIncrement {
    double gyro_x = 0.0;
    double gyro_y = 0.0;
    double gyro_z = 0.0;
    double roll = 0.0;
    double pitch = 0.0;

    bool operator==(const DisturbanceIncrement&) const = default;
};

/// Consumes exactly one band-noise step regardless of label, so streams stay
/// aligned across labels.
DisturbanceIncrement disturbance_at(WallLabel label, double t, const SimConfig& cfg, NoiseSource& noise);

enum class NoiseMirror : std::uint8_t { None, Roll };

/// Exactly round(duration_for(label) * sample_rate_hz) samples. With
/// NoiseMirror::Roll the roll-axis base noise is negated, which makes a Right
/// flight the exact roll mirror of the Left flight with the same id.
FlightLog simulate_flight(WallLabel label, const SimConfig& cfg, const std::string& flight_id,
                          NoiseMirror mirror = NoiseMirror::None);

/// Writes flights_per_class logs per label plus manifest.json into out_dir.
/// On failure every file written so far is removed.
CorpusManifest generate_corpus(const SimConfig& cfg, std::size_t flights_per_class,
                               const std::filesystem::path& out_dir);

inline constexpr std::string_view kManifestFileName = "manifest.json";

}  // namespace walldetect
