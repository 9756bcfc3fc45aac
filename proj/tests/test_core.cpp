#include <gtest/gtest.h>

#include <cmath>

#include "walldetect/core.hpp"

using namespace walldetect;

namespace {

FlightLog make_log(std::size_t n) {
    FlightLog log;
    log.flight_id = "f";
    for (std::size_t i = 0; i < n; ++i) {
        ImuSample s;
        s.t = static_cast<double>(i) * 0.01;
        log.samples.push_back(s);
    }
    return log;
}

bool has_message(const std::vector<Violation>& vs, const std::string& msg) {
    for (const auto& v : vs) {
        if (v.message == msg) return true;
    }
    return false;
}

}  // namespace

TEST(LabelCodec, FixedTokens) {
    EXPECT_EQ(encode_label(WallLabel::Left), "left");
    EXPECT_EQ(encode_label(WallLabel::Right), "right");
    EXPECT_EQ(encode_label(WallLabel::Front), "front");
    EXPECT_EQ(encode_label(WallLabel::NoWall), "nowall");
}

TEST(LabelCodec, RoundTripsEveryLabel) {
    for (auto label : kAllLabels) EXPECT_EQ(decode_label(encode_label(label)), label);
    EXPECT_THROW(decode_label("ceiling"), Error);
    EXPECT_FALSE(try_decode_label("Left").has_value());
}

TEST(LabelCodec, BinaryView) {
    for (auto label : kAllLabels) {
        EXPECT_EQ(binary_view(label) == BinaryLabel::Wall, label != WallLabel::NoWall);
    }
}

TEST(Validate, WellFormedLogIsClean) { EXPECT_TRUE(validate_flight_log(make_log(3000)).empty()); }

TEST(Validate, NonMonotonicTime) {
    FlightLog log = make_log(3);
    log.samples[0].t = 0.00;
    log.samples[1].t = 0.02;
    log.samples[2].t = 0.01;
    const auto vs = validate_flight_log(log);
    EXPECT_TRUE(has_message(vs, "non-monotonic t at index 2"));
    bool found = false;
    for (const auto& v : vs) found |= v.rule == Rule::NonMonotonicTime && v.index == 2;
    EXPECT_TRUE(found);
}

TEST(Validate, TooShort) {
    const auto vs = validate_flight_log(make_log(50));
    EXPECT_TRUE(has_message(vs, "too short for one window"));
}

TEST(Validate, AttitudeAndTime) {
    FlightLog log = make_log(200);
    log.samples[10].roll = 95.0;
    log.samples[20].pitch = -90.0;
    log.samples[0].t = -1.0;
    const auto vs = validate_flight_log(log);
    int attitude = 0;
    int negative = 0;
    for (const auto& v : vs) {
        attitude += v.rule == Rule::AttitudeOutOfRange;
        negative += v.rule == Rule::TimeNegative;
    }
    EXPECT_EQ(attitude, 2);
    EXPECT_EQ(negative, 1);
}

TEST(Validate, SampleRateIsAdvisory) {
    FlightLog log = make_log(200);
    for (std::size_t i = 0; i < log.samples.size(); ++i) log.samples[i].t = static_cast<double>(i) * 0.02;
    const auto vs = validate_flight_log(log);
    ASSERT_EQ(vs.size(), 1u);
    EXPECT_EQ(vs[0].rule, Rule::SampleRateOff);
    EXPECT_FALSE(is_hard_rule(vs[0].rule));
}

TEST(Dataset, SortsAndRejectsDuplicates) {
    DatasetRow a;
    a.flight_id = "b";
    a.start_index = 1;
    DatasetRow b;
    b.flight_id = "a";
    b.start_index = 5;
    DatasetRow c = b;
    c.start_index = 2;
    const Dataset ds({a, b, c});
    ASSERT_EQ(ds.size(), 3u);
    EXPECT_EQ(ds.rows()[0].flight_id, "a");
    EXPECT_EQ(ds.rows()[0].start_index, 2u);
    EXPECT_EQ(ds.rows()[2].flight_id, "b");
    EXPECT_THROW(Dataset({a, a}), Error);

    DatasetRow bad = a;
    bad.features[3] = std::nan("");
    EXPECT_THROW(Dataset({bad}), Error);
}

TEST(Features, NamesAreStable) {
    const auto& names = feature_names();
    EXPECT_EQ(names[feature_index::kMean], "mean_gyro_x");
    EXPECT_EQ(names[feature_index::kTheta], "theta");
    EXPECT_EQ(names[feature_index::kOmega], "omega");
}
