// JSON mapping for ModelSpec, shared by the model and report writers.
#pragma once

#include <json.hpp>

#include "walldetect/classify.hpp"

namespace walldetect::detail {

using ojson = nlohmann::ordered_json;

inline ojson spec_to_json(const ModelSpec& spec) {
    ojson j;
    j["kind"] = std::string(model_kind_name(spec.kind));
    j["knn_k"] = spec.knn_k;
    j["rf_trees"] = spec.rf_trees;
    j["rf_max_depth"] = spec.rf_max_depth;
    j["rf_feature_subset"] = spec.rf_feature_subset;
    j["gb_stages"] = spec.gb_stages;
    j["gb_learning_rate"] = spec.gb_learning_rate;
    j["gb_max_depth"] = spec.gb_max_depth;
    j["seed"] = spec.seed;
    return j;
}

template <typename Json>
ModelSpec spec_from_json(const Json& j) {
    ModelSpec spec;
    spec.kind = parse_model_kind(j.at("kind").template get<std::string>());
    spec.knn_k = j.at("knn_k").template get<std::size_t>();
    spec.rf_trees = j.at("rf_trees").template get<std::size_t>();
    spec.rf_max_depth = j.at("rf_max_depth").template get<std::size_t>();
    spec.rf_feature_subset = j.at("rf_feature_subset").template get<std::size_t>();
    spec.gb_stages = j.at("gb_stages").template get<std::size_t>();
    spec.gb_learning_rate = j.at("gb_learning_rate").template get<double>();
    spec.gb_max_depth = j.at("gb_max_depth").template get<std::size_t>();
    spec.seed = j.at("seed").template get<std::uint64_t>();
    return spec;
}

}  // namespace walldetect::detail
