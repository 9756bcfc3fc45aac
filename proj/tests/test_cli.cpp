#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <string>

#include "walldetect/eval.hpp"
#include "walldetect/ingest.hpp"

namespace fs = std::filesystem;

namespace {

int run(const std::string& args) {
    const std::string cmd = std::string(WALLDETECT_CLI) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return status == -1 ? -1 : WEXITSTATUS(status);
}

}  // namespace

TEST(Cli, SimulateExtractEvaluate) {
    const auto dir = fs::temp_directory_path() / "walldetect-cli";
    fs::remove_all(dir);
    const std::string d = dir.string();
    ASSERT_EQ(run("simulate --flights-per-class 1 --out " + d + "/corpus"), 0);
    ASSERT_EQ(run("ingest --manifest " + d + "/corpus/manifest.json"), 0);
    ASSERT_EQ(run("extract --manifest " + d + "/corpus/manifest.json --out " + d + "/features.csv"), 0);
    ASSERT_EQ(run("evaluate --features " + d + "/features.csv --experiment e1 --classifier rf --reps 2 --rf-trees 10 "
                  "--report " + d + "/report.json"),
              0);
    const auto report = walldetect::parse_report(walldetect::read_text_file(dir / "report.json"));
    EXPECT_EQ(report.repetitions, 2u);
    ASSERT_EQ(report.classifiers.size(), 1u);
    EXPECT_EQ(report.classifiers[0].spec.rf_trees, 10u);
    ASSERT_EQ(run("train --features " + d + "/features.csv --experiment e2 --classifier knn --out " + d + "/m.json"),
              0);
    EXPECT_TRUE(fs::exists(dir / "m.json"));
}

TEST(Cli, ErrorsExitNonZero) {
    EXPECT_NE(run("evaluate --features nowhere.csv --experiment e9"), 0);
    EXPECT_NE(run("extract --manifest /nonexistent/manifest.json"), 0);
    EXPECT_NE(run("frobnicate"), 0);
}
