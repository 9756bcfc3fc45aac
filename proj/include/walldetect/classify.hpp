/**
 * @file classify.hpp
 * @brief K-nearest-neighbors, random forest and gradient boosting behind one interface.
 *
 * All three learners are deterministic for a fixed (spec, training set):
 * randomness comes from spec.seed only, and the forest gives every tree its
 * own substream derived from (seed, tree index).
 */
#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "walldetect/cart.hpp"
#include "walldetect/core.hpp"

namespace walldetect {

enum class ModelKind : std::uint8_t { Knn, RandomForest, GradientBoosting };

/// "knn", "rf", "gb".
std::string_view model_kind_name(ModelKind kind) noexcept;
ModelKind parse_model_kind(std::string_view name);

struct ModelSpec {
    ModelKind kind = ModelKind::RandomForest;
    std::size_t knn_k = 5;
    std::size_t rf_trees = 100;
    std::size_t rf_max_depth = 0;       ///< 0 = unlimited
    std::size_t rf_feature_subset = 0;  ///< 0 = ceil(sqrt(d))
    std::size_t gb_stages = 100;
    double gb_learning_rate = 0.1;
    std::size_t gb_max_depth = 3;
    std::uint64_t seed = 0;

    bool operator==(const ModelSpec&) const = default;
};

ModelSpec default_spec(ModelKind kind, std::uint64_t seed = 0);

/// Examples as a row-major matrix with labels indexing into `classes`.
struct TrainingSet {
    std::size_t dims = kFeatureCount;
    std::vector<double> features;
    std::vector<std::int32_t> labels;
    std::vector<std::string> classes;

    std::size_t size() const noexcept { return labels.size(); }
    std::span<const double> row(std::size_t i) const noexcept {
        return {features.data() + i * dims, dims};
    }
    void add(std::span<const double> x, std::int32_t label);
};

struct KnnPayload {
    std::vector<double> rows;  ///< row-major, `dims` wide
    std::vector<std::int32_t> labels;

    bool operator==(const KnnPayload&) const = default;
};

struct ForestPayload {
    std::vector<DecisionTree> trees;

    bool operator==(const ForestPayload&) const = default;
};

/// trees[stage * classes + k] is class k's regression tree at that stage; its
/// leaf values are Newton steps before the learning-rate shrinkage.
struct BoostingPayload {
    std::vector<double> initial_scores;
    std::vector<DecisionTree> trees;

    bool operator==(const BoostingPayload&) const = default;
};

struct TrainedModel {
    ModelSpec spec;
    std::vector<std::string> classes;
    std::size_t dims = kFeatureCount;
    std::variant<KnnPayload, ForestPayload, BoostingPayload> payload;

    bool operator==(const TrainedModel&) const = default;
};

/// Throws Error for an empty set, k > n, fewer than two classes for boosting,
/// non-finite features or out-of-range hyperparameters.
TrainedModel train(const ModelSpec& spec, const TrainingSet& data);

/// Class index for x. Throws Error on a dimension mismatch.
std::int32_t predict_index(const TrainedModel& model, std::span<const double> x);
/// Class name for x.
const std::string& predict(const TrainedModel& model, std::span<const double> x);
std::vector<std::int32_t> predict_all(const TrainedModel& model, const TrainingSet& data);

/// Raw per-class boosting scores for x (initial scores plus shrunk stage outputs).
std::vector<double> boosting_scores(const TrainedModel& model, std::span<const double> x,
                                    std::optional<std::size_t> stages = std::nullopt);

/// Mean multinomial deviance of a boosting model on `data` after 0..S stages.
std::vector<double> boosting_deviance_trace(const TrainedModel& model, const TrainingSet& data);

// ========== Serialization ==========

inline constexpr int kModelFormatVersion = 1;

class ModelFormatError : public Error {
public:
    ModelFormatError(const std::string& what, std::optional<std::size_t> offset = std::nullopt)
        : Error(offset ? what + " (at byte " + std::to_string(*offset) + ")" : what), offset_(offset) {}
    std::optional<std::size_t> offset() const noexcept { return offset_; }

private:
    std::optional<std::size_t> offset_;
};

std::string save_model(const TrainedModel& model);
TrainedModel load_model(std::string_view bytes);

}  // namespace walldetect
