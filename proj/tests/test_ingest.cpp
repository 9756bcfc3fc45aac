#include <gtest/gtest.h>

#include <filesystem>
#include <string>

#include "oracles.hpp"
#include "walldetect/ingest.hpp"
#include "walldetect/simulate.hpp"

using namespace walldetect;
namespace fs = std::filesystem;

namespace {

const std::string kHeader = "t,gyro_x,gyro_y,gyro_z,acc_x,acc_y,acc_z,roll,pitch,yaw,pos_x,pos_y,pos_z,pressure\n";

fs::path temp_dir(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("walldetect-ingest-" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

}  // namespace

TEST(ParseFlightLog, ThreeRows) {
    const std::string text = kHeader +
                             "0,1,2,3,0.1,0.2,0.9,4,5,6,0.5,0.6,0.25,1013.2\n"
                             "0.01,-1.5,2.5,3.5,0,0,1,4.5,5.5,6.5,0.51,0.61,0.26,1013.1\n"
                             "0.02,1e-3,2,3,0,0,1,-4,-5,6,0.52,0.62,0.27,1013\n";
    const FlightLog log = parse_flight_log(text, WallLabel::Front, "front-01");
    ASSERT_EQ(log.samples.size(), 3u);
    EXPECT_EQ(log.label, WallLabel::Front);
    EXPECT_EQ(log.flight_id, "front-01");
    EXPECT_DOUBLE_EQ(log.samples[1].gyro_x, -1.5);
    EXPECT_DOUBLE_EQ(log.samples[1].roll, 4.5);
    EXPECT_DOUBLE_EQ(log.samples[2].gyro_x, 1e-3);
    EXPECT_DOUBLE_EQ(log.samples[2].pressure, 1013.0);
    EXPECT_DOUBLE_EQ(log.samples[0].pos_z, 0.25);
}

TEST(ParseFlightLog, HeaderOnly) {
    try {
        parse_flight_log(kHeader, WallLabel::Left, "x");
        FAIL();
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find("no samples"), std::string::npos);
    }
}

TEST(ParseFlightLog, WrongColumnCountNamesLine) {
    const std::string text = kHeader + "0,1,2,3,0,0,1,4,5,6,0,0,0,1013\n" + "0.01,1,2,3,0,0,1,4,5,6,0,0,0\n";
    try {
        parse_flight_log(text, WallLabel::Left, "x");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 3u);
        EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
    }
}

TEST(ParseFlightLog, NonNumericField) {
    const std::string text = kHeader + "0,1,2,abc,0,0,1,4,5,6,0,0,0,1013\n";
    EXPECT_THROW(parse_flight_log(text, WallLabel::Left, "x"), ParseError);
}

TEST(ParseFlightLog, MissingHeader) {
    EXPECT_THROW(parse_flight_log("0,1,2,3,0,0,1,4,5,6,0,0,0,1013\n", WallLabel::Left, "x"), Error);
}

TEST(ParseFlightLog, NonMonotonicTimeIsValidationError) {
    const std::string text = kHeader + "0,1,2,3,0,0,1,4,5,6,0,0,0,1013\n" + "0.02,1,2,3,0,0,1,4,5,6,0,0,0,1013\n" +
                             "0.01,1,2,3,0,0,1,4,5,6,0,0,0,1013\n";
    EXPECT_THROW(parse_flight_log(text, WallLabel::Left, "x"), ValidationError);
}

TEST(ParseFlightLog, RenderRoundTripIsExact) {
    FlightLog log = oracle::random_log(500, 11, "r");
    log.samples[3].gyro_x = 0.1 + 0.2;  // not representable in short decimal
    log.samples[4].pressure = 1013.25;
    const FlightLog back = parse_flight_log(render_flight_log(log), log.label, log.flight_id);
    EXPECT_EQ(back, log);
    EXPECT_EQ(render_flight_log(back), render_flight_log(log));
}

TEST(Manifest, RoundTripAndDuplicates) {
    const auto dir = temp_dir("manifest");
    CorpusManifest m;
    m.base_dir = dir;
    m.entries = {{"a.csv", WallLabel::Left, "a"}, {"b.csv", WallLabel::NoWall, "b"}};
    const auto parsed = parse_manifest(render_manifest(m), dir);
    EXPECT_EQ(parsed.entries, m.entries);

    m.entries[1].flight_id = "a";
    write_text_file(dir / "a.csv", kHeader);
    write_text_file(dir / "b.csv", kHeader);
    try {
        check_manifest(parse_manifest(render_manifest(m), dir));
        FAIL();
    } catch (const ValidationError& e) {
        EXPECT_NE(std::string(e.what()).find("duplicate"), std::string::npos);
    }
}

TEST(Manifest, MissingFileNamesPath) {
    const auto dir = temp_dir("missing");
    CorpusManifest m;
    m.base_dir = dir;
    m.entries = {{"gone.csv", WallLabel::Left, "gone"}};
    try {
        load_corpus(m);
        FAIL();
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find("gone.csv"), std::string::npos);
    }
}

TEST(Manifest, EmptyManifestLoadsNothing) {
    CorpusManifest m;
    m.base_dir = temp_dir("empty");
    EXPECT_TRUE(load_corpus(m).empty());
}

TEST(LoadCorpus, TwentyFlightsFivePerLabel) {
    const auto dir = temp_dir("corpus");
    SimConfig cfg;
    cfg.duration_s = 2.0;
    cfg.wall_duration_s = 2.0;
    generate_corpus(cfg, 5, dir);
    const auto logs = load_corpus(read_manifest(dir / "manifest.json"));
    ASSERT_EQ(logs.size(), 20u);
    std::array<int, 4> per_label{};
    for (const auto& log : logs) ++per_label[static_cast<std::size_t>(log.label)];
    for (int c : per_label) EXPECT_EQ(c, 5);
}

TEST(LoadCorpus, LabelsComeFromManifest) {
    const auto dir = temp_dir("relabel");
    FlightLog log = oracle::random_log(120, 3, "x");
    write_text_file(dir / "x.csv", render_flight_log(log));
    CorpusManifest m;
    m.base_dir = dir;
    m.entries = {{"x.csv", WallLabel::Front, "x"}};
    const auto logs = load_corpus(m);
    ASSERT_EQ(logs.size(), 1u);
    EXPECT_EQ(logs[0].label, WallLabel::Front);
}

TEST(LoadCorpus, ParseFailureNamesFlight) {
    const auto dir = temp_dir("broken");
    write_text_file(dir / "bad.csv", kHeader + "0,1,2\n");
    CorpusManifest m;
    m.base_dir = dir;
    m.entries = {{"bad.csv", WallLabel::Left, "bad-flight"}};
    try {
        load_corpus(m);
        FAIL();
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find("bad-flight"), std::string::npos);
    }
}
