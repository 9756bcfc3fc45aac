#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "walldetect/features.hpp"

using namespace walldetect;

namespace {

constexpr double kPi = std::numbers::pi;

FlightLog constant_log(std::size_t n) {
    FlightLog log;
    log.flight_id = "c";
    for (std::size_t i = 0; i < n; ++i) {
        ImuSample s;
        s.t = static_cast<double>(i) * 0.01;
        s.gyro_x = 3.0;
        s.gyro_y = 4.0;
        s.gyro_z = 0.0;
        s.roll = 4.0;
        s.pitch = 5.0;
        log.samples.push_back(s);
    }
    return log;
}

}  // namespace

TEST(SummarizeWindow, ConstantWindow) {
    const FlightLog log = constant_log(100);
    const auto windows = sliding_windows(log);
    ASSERT_EQ(windows.size(), 1u);
    const auto f = summarize_window(windows[0]);
    const std::array<double, 5> means = {3, 4, 0, 4, 5};
    for (int k = 0; k < 5; ++k) {
        EXPECT_DOUBLE_EQ(f.mean[k], means[k]);
        EXPECT_EQ(f.std[k], 0.0);
        EXPECT_EQ(f.mad[k], 0.0);
    }
    EXPECT_DOUBLE_EQ(f.average_resultant, 5.0);
}

TEST(SummarizeWindow, AlternatingSigns) {
    FlightLog log = constant_log(100);
    for (std::size_t i = 0; i < 100; ++i) log.samples[i].gyro_x = i % 2 == 0 ? 1.0 : -1.0;
    const auto f = summarize_window(sliding_windows(log)[0]);
    EXPECT_NEAR(f.mean[0], 0.0, 1e-15);
    EXPECT_NEAR(f.mad[0], 1.0, 1e-15);
    EXPECT_NEAR(f.std[0], std::sqrt(100.0 / 99.0), 1e-12);
    EXPECT_NEAR(f.std[0], 1.00504, 1e-5);
}

TEST(SlidingWindows, Counts) {
    for (std::size_t n : {100u, 101u, 1000u, 3000u}) {
        const auto log = oracle::random_log(n, n);
        const auto w = sliding_windows(log);
        ASSERT_EQ(w.size(), n - 99);
        EXPECT_EQ(w.back().start_index, n - 100);
        EXPECT_EQ(w.back().samples.size(), 100u);
        EXPECT_EQ(extract_flight_features(log).size(), n - 99);
    }
    EXPECT_THROW(sliding_windows(oracle::random_log(99, 1)), ValidationError);
}

TEST(Theta, WorkedExamplesAndConventions) {
    EXPECT_NEAR(wall_angle_theta({0.3, 0.3}), kPi / 4, 1e-15);
    EXPECT_EQ(wall_angle_theta({0.3, 0.0}), 0.0);
    EXPECT_NEAR(wall_angle_theta({0.0, 0.3}), kPi / 2, 1e-15);
    EXPECT_EQ(wall_angle_theta({0.0, 0.0}), 0.0);
    const double phi = degrees_to_radians(30.0);
    const double psi = degrees_to_radians(45.0);
    EXPECT_NEAR(wall_angle_theta({phi, psi}), std::atan(std::sin(psi) / std::sin(phi)), 1e-15);
    EXPECT_NEAR(wall_angle_theta({phi, psi}), 0.95532, 1e-5);
}

TEST(Theta, MatchesVectorConstruction) {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(-1.5, 1.5);
    for (int i = 0; i < 10000; ++i) {
        const double a = u(rng);
        const double b = u(rng);
        EXPECT_NEAR(wall_angle_theta({a, b}), oracle::theta_from_vectors(a, b), 1e-14);
        EXPECT_EQ(wall_angle_theta({a, b}), wall_angle_theta({-a, b}));
        EXPECT_EQ(wall_angle_theta({a, b}), wall_angle_theta({a, -b}));
        EXPECT_NEAR(wall_angle_theta({a, b}) + wall_angle_theta({b, a}), kPi / 2, 1e-12);
    }
}

TEST(Omega, Examples) {
    EXPECT_NEAR(cosine_angle_omega({0.0, 0.0}), kPi / 4, 1e-15);
    EXPECT_NEAR(cosine_angle_omega({0.7, 0.7}), kPi / 4, 1e-15);
    const double phi = degrees_to_radians(60.0);
    const double psi = degrees_to_radians(30.0);
    EXPECT_NEAR(cosine_angle_omega({phi, psi}), std::atan2(std::cos(psi), std::cos(phi)), 1e-15);
    EXPECT_NEAR(cosine_angle_omega({phi, psi}), 1.04720, 1e-5);
    EXPECT_NEAR(cosine_angle_omega({phi, psi}) + cosine_angle_omega({psi, phi}), kPi / 2, 1e-12);
}

TEST(RollingChannel, MatchesNaiveWindow) {
    std::mt19937_64 rng(8);
    std::normal_distribution<double> g(10.0, 3.0);
    std::vector<double> xs(2000);
    for (auto& x : xs) x = g(rng);
    xs[500] = xs[501] = xs[502];  // repeated values
    RollingChannel ch(100);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (ch.size() == 100) ch.pop();
        ch.push(xs[i], i);
        if (ch.size() < 100) continue;
        double mean = 0.0;
        for (std::size_t j = i - 99; j <= i; ++j) mean += xs[j];
        mean /= 100.0;
        double ss = 0.0;
        double ad = 0.0;
        for (std::size_t j = i - 99; j <= i; ++j) {
            ss += (xs[j] - mean) * (xs[j] - mean);
            ad += std::abs(xs[j] - mean);
        }
        ASSERT_NEAR(ch.mean(), mean, 1e-12);
        ASSERT_NEAR(ch.sample_std(), std::sqrt(ss / 99.0), 1e-9);
        ASSERT_NEAR(ch.mean_absolute_deviation(), ad / 100.0, 1e-10);
    }
}

TEST(ExtractFeatures, MatchesNaiveOracle) {
    FlightLog log = oracle::random_log(700, 21, "n");
    // A drifting offset stresses the incremental second moment.
    for (std::size_t i = 0; i < log.samples.size(); ++i) log.samples[i].gyro_x += 1e4 + static_cast<double>(i);
    const auto rows = extract_flight_features(log);
    ASSERT_EQ(rows.size(), 601u);
    for (const auto& row : rows) {
        const auto w = std::span(log.samples).subspan(row.start_index, 100);
        const auto ref = oracle::window_stats(w);
        for (int k = 0; k < 5; ++k) {
            const double scale = std::max(1.0, std::abs(ref.mean[k]));
            ASSERT_NEAR(row.features[feature_index::kMean + k], ref.mean[k], 1e-12 * scale);
            ASSERT_NEAR(row.features[feature_index::kStd + k], ref.std[k], 1e-8 * std::max(1.0, ref.std[k]));
            ASSERT_NEAR(row.features[feature_index::kMad + k], ref.mad[k], 1e-9 * std::max(1.0, ref.mad[k]));
        }
        ASSERT_NEAR(row.features[feature_index::kAverageResultant], ref.resultant, 1e-9 * ref.resultant);
        const double phi = degrees_to_radians(ref.mean[3]);
        const double psi = degrees_to_radians(ref.mean[4]);
        ASSERT_NEAR(row.features[feature_index::kTheta], oracle::theta_from_vectors(phi, psi), 1e-12);
        ASSERT_NEAR(row.features[feature_index::kOmega], std::atan2(std::cos(psi), std::cos(phi)), 1e-12);
    }
}

TEST(ExtractFeatures, PrefixStable) {
    const FlightLog full = oracle::random_log(1500, 5, "p");
    FlightLog prefix = full;
    prefix.samples.resize(777);
    const auto a = extract_flight_features(full);
    const auto b = extract_flight_features(prefix);
    ASSERT_EQ(b.size(), 678u);
    for (std::size_t i = 0; i < b.size(); ++i) ASSERT_EQ(a[i], b[i]) << "row " << i;
}

TEST(ExtractFeatures, RowCountsAndOrder) {
    std::vector<FlightLog> logs;
    for (int i = 0; i < 5; ++i) logs.push_back(oracle::random_log(3000, 100 + i, "f" + std::to_string(4 - i)));
    const Dataset ds = extract_features(logs);
    EXPECT_EQ(ds.size(), 14505u);
    EXPECT_EQ(ds.rows().front().flight_id, "f0");
    EXPECT_EQ(ds.rows().back().flight_id, "f4");
    EXPECT_EQ(ds.rows().back().start_index, 2900u);
}

TEST(ExtractFeatures, ErrorNamesFlight) {
    std::vector<FlightLog> logs = {oracle::random_log(300, 1, "good"), oracle::random_log(50, 2, "stubby")};
    try {
        extract_features(logs);
        FAIL();
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find("stubby"), std::string::npos);
    }
}

TEST(FeatureFile, RoundTrip) {
    const Dataset ds = extract_features({oracle::random_log(250, 9, "a"), oracle::random_log(180, 10, "b")});
    const std::string text = render_feature_file(ds);
    EXPECT_EQ(text.substr(0, text.find('\n')),
              "flight_id,start_index,label,mean_gyro_x,mean_gyro_y,mean_gyro_z,mean_roll,mean_pitch,std_gyro_x,"
              "std_gyro_y,std_gyro_z,std_roll,std_pitch,mad_gyro_x,mad_gyro_y,mad_gyro_z,mad_roll,mad_pitch,"
              "average_resultant,theta,omega");
    const Dataset back = parse_feature_file(text);
    EXPECT_EQ(back.rows(), ds.rows());
    EXPECT_EQ(render_feature_file(back), text);
    EXPECT_THROW(parse_feature_file("flight_id,start_index\n"), Error);
}
