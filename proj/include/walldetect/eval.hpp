/**
 * @file eval.hpp
 * @brief Repeated train/test evaluation of the four wall-detection experiments.
 *
 *   e1  wall (left + right) vs no wall
 *   e2  left vs right
 *   e3  left vs right vs front
 *   e4  left vs right vs front vs no wall, no-wall rows from 3 flights only
 *
 * Each repetition draws a fresh split from a seed derived from (master seed,
 * repetition), trains every classifier and scores plain accuracy. Row-mode
 * splits assign windows independently, so overlapping windows of one flight
 * can sit on both sides; flight mode keeps each flight on one side. Reports
 * always carry the mode so the two are never mixed up.
 */
#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "walldetect/classify.hpp"
#include "walldetect/core.hpp"

namespace walldetect {

enum class ExperimentId : std::uint8_t { E1, E2, E3, E4 };
inline constexpr std::array<ExperimentId, 4> kAllExperiments = {ExperimentId::E1, ExperimentId::E2,
                                                                ExperimentId::E3, ExperimentId::E4};

std::string_view experiment_name(ExperimentId id) noexcept;  ///< "e1".."e4"
std::string_view experiment_description(ExperimentId id) noexcept;
ExperimentId parse_experiment_id(std::string_view name);

enum class SplitMode : std::uint8_t { Row, Flight };
std::string_view split_mode_name(SplitMode mode) noexcept;
SplitMode parse_split_mode(std::string_view name);

struct ExperimentSpec {
    ExperimentId id = ExperimentId::E1;
    std::vector<std::string> classes;
    /// Class index per WallLabel; nullopt drops the label.
    std::array<std::optional<std::int32_t>, 4> class_of{};
    /// Cap on distinct no-wall flights, chosen from the master seed.
    std::optional<std::size_t> nowall_flight_limit;
    double test_fraction = 0.2;
    std::size_t repetitions = 100;
    SplitMode split_mode = SplitMode::Row;
    bool stratified = false;
    bool standardize = false;  ///< z-score features with training-split statistics
    std::vector<ModelSpec> classifiers;
    std::uint64_t master_seed = 42;
};

/// Class mapping for `id` with KNN (k = 5), RF and GB at their defaults.
ExperimentSpec make_experiment(ExperimentId id, std::uint64_t master_seed = 42, std::size_t repetitions = 100);

struct ExampleSet {
    TrainingSet data;
    std::vector<std::string> flights;  ///< distinct flight ids, sorted
    std::vector<std::uint32_t> flight_of_row;
    std::vector<std::size_t> start_index;
    std::vector<std::size_t> class_counts;
    std::vector<std::string> nowall_flights;  ///< no-wall flights used, sorted
};

/// Filters and relabels rows for the experiment. Throws Error naming any class
/// that ends up with no rows.
ExampleSet assemble(const Dataset& dataset, const ExperimentSpec& spec);

struct TrainTestSplit {
    std::vector<std::size_t> train;  ///< ascending row indices
    std::vector<std::size_t> test;
};

/// Uniform partition without replacement. Row mode: |test| = round(fraction * n).
/// Flight mode: round(fraction * flights) whole flights (at least one per side).
TrainTestSplit split_train_test(const ExampleSet& examples, double fraction, std::uint64_t seed,
                                SplitMode mode = SplitMode::Row, bool stratified = false);

using ConfusionMatrix = std::vector<std::vector<std::size_t>>;

/// entry(i, j) counts truth i predicted as j.
ConfusionMatrix confusion_matrix(std::span<const std::int32_t> truth, std::span<const std::int32_t> predicted,
                                 std::size_t class_count);
double accuracy(const ConfusionMatrix& m);

struct ClassifierResult {
    ModelSpec spec;
    std::vector<double> accuracies;
    double mean_accuracy = 0.0;
    double std_accuracy = 0.0;  ///< sample std over repetitions, 0 for one repetition
    ConfusionMatrix confusion;  ///< summed over repetitions

    bool operator==(const ClassifierResult&) const = default;
};

struct ExperimentReport {
    ExperimentId id = ExperimentId::E1;
    std::vector<std::string> classes;
    std::vector<std::size_t> class_counts;
    std::vector<std::string> nowall_flights;
    double test_fraction = 0.2;
    std::size_t repetitions = 0;
    SplitMode split_mode = SplitMode::Row;
    bool stratified = false;
    bool standardize = false;
    std::uint64_t master_seed = 0;
    std::vector<ClassifierResult> classifiers;

    bool operator==(const ExperimentReport&) const = default;
};

/// Called once per classifier with the model trained in repetition 0.
using ModelSink = std::function<void(std::size_t classifier, const TrainedModel& model)>;

ExperimentReport run_experiment(const Dataset& dataset, const ExperimentSpec& spec, const ModelSink& sink = {});

struct SuiteFailure {
    ExperimentId id = ExperimentId::E1;
    std::string error;

    bool operator==(const SuiteFailure&) const = default;
};

struct SuiteReport {
    std::vector<ExperimentReport> reports;
    std::vector<SuiteFailure> failures;

    bool operator==(const SuiteReport&) const = default;
};

using SuiteModelSink = std::function<void(ExperimentId, std::size_t classifier, const TrainedModel& model)>;

/// Runs each spec in order; a failing experiment is recorded and the rest continue.
SuiteReport run_suite(const Dataset& dataset, const std::vector<ExperimentSpec>& specs,
                      const SuiteModelSink& sink = {});

/// JSON with a fixed field order; equal reports emit identical bytes.
std::string emit_report(const ExperimentReport& report);
ExperimentReport parse_report(std::string_view json_text);
std::string emit_suite_report(const SuiteReport& suite);
SuiteReport parse_suite_report(std::string_view json_text);

/// Human-readable mean ± std table, one line per classifier.
std::string summary_table(const ExperimentReport& report);

}  // namespace walldetect
