#include <cmath>

#include "spec_json.hpp"
#include "walldetect/classify.hpp"

namespace walldetect {

namespace {

using detail::ojson;
constexpr const char* kFormatTag = "walldetect-model";

ojson tree_to_json(const DecisionTree& tree) {
    ojson j;
    j["value_width"] = tree.value_width;
    j["feature"] = tree.feature;
    j["threshold"] = tree.threshold;
    j["left"] = tree.left;
    j["right"] = tree.right;
    j["values"] = tree.values;
    return j;
}

DecisionTree tree_from_json(const nlohmann::json& j, std::size_t dims, std::size_t expected_width,
                            const std::string& where) {
    DecisionTree tree;
    tree.value_width = j.at("value_width").get<std::size_t>();
    tree.feature = j.at("feature").get<std::vector<std::int32_t>>();
    tree.threshold = j.at("threshold").get<std::vector<double>>();
    tree.left = j.at("left").get<std::vector<std::int32_t>>();
    tree.right = j.at("right").get<std::vector<std::int32_t>>();
    tree.values = j.at("values").get<std::vector<double>>();

    const std::size_t n = tree.feature.size();
    if (tree.value_width != expected_width) throw ModelFormatError(where + ": unexpected value_width");
    if (n == 0 || tree.threshold.size() != n || tree.left.size() != n || tree.right.size() != n ||
        tree.values.size() != n * tree.value_width) {
        throw ModelFormatError(where + ": inconsistent node array lengths");
    }
    for (std::size_t node = 0; node < n; ++node) {
        const auto f = tree.feature[node];
        if (f < 0) {
            if (tree.left[node] != -1 || tree.right[node] != -1) {
                throw ModelFormatError(where + ": leaf " + std::to_string(node) + " has children");
            }
            continue;
        }
        const auto id = static_cast<std::int64_t>(node);
        const auto count = static_cast<std::int64_t>(n);
        if (static_cast<std::size_t>(f) >= dims || tree.left[node] <= id || tree.right[node] <= id ||
            tree.left[node] >= count || tree.right[node] >= count || !std::isfinite(tree.threshold[node])) {
            throw ModelFormatError(where + ": invalid split at node " + std::to_string(node));
        }
    }
    for (double v : tree.values) {
        if (!std::isfinite(v)) throw ModelFormatError(where + ": non-finite node value");
    }
    return tree;
}

}  // namespace

std::string save_model(const TrainedModel& model) {
    ojson doc;
    doc["format"] = kFormatTag;
    doc["version"] = kModelFormatVersion;
    doc["kind"] = std::string(model_kind_name(model.spec.kind));
    doc["spec"] = detail::spec_to_json(model.spec);
    doc["classes"] = model.classes;
    doc["dims"] = model.dims;

    ojson payload;
    if (const auto* knn = std::get_if<KnnPayload>(&model.payload)) {
        payload["rows"] = knn->rows;
        payload["labels"] = knn->labels;
    } else if (const auto* forest = std::get_if<ForestPayload>(&model.payload)) {
        ojson trees = ojson::array();
        for (const auto& tree : forest->trees) trees.push_back(tree_to_json(tree));
        payload["trees"] = std::move(trees);
    } else {
        const auto& gb = std::get<BoostingPayload>(model.payload);
        payload["initial_scores"] = gb.initial_scores;
        ojson trees = ojson::array();
        for (const auto& tree : gb.trees) trees.push_back(tree_to_json(tree));
        payload["trees"] = std::move(trees);
    }
    doc["payload"] = std::move(payload);
    return doc.dump() + "\n";
}

TrainedModel load_model(std::string_view bytes) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(bytes);
    } catch (const nlohmann::json::parse_error& e) {
        throw ModelFormatError(std::string("corrupted model file: ") + e.what(), e.byte);
    }

    try {
        if (!doc.is_object() || doc.value("format", std::string()) != kFormatTag) {
            throw ModelFormatError("not a walldetect model file");
        }
        const int version = doc.at("version").get<int>();
        if (version != kModelFormatVersion) {
            throw ModelFormatError("unsupported version " + std::to_string(version) + " (expected " +
                                   std::to_string(kModelFormatVersion) + ")");
        }

        TrainedModel model;
        model.spec = detail::spec_from_json(doc.at("spec"));
        if (doc.at("kind").get<std::string>() != model_kind_name(model.spec.kind)) {
            throw ModelFormatError("kind does not match spec.kind");
        }
        model.classes = doc.at("classes").get<std::vector<std::string>>();
        model.dims = doc.at("dims").get<std::size_t>();
        if (model.classes.empty() || model.dims == 0) throw ModelFormatError("model needs classes and dims");
        const std::size_t classes = model.classes.size();
        const auto& payload = doc.at("payload");

        switch (model.spec.kind) {
            case ModelKind::Knn: {
                KnnPayload knn;
                knn.rows = payload.at("rows").get<std::vector<double>>();
                knn.labels = payload.at("labels").get<std::vector<std::int32_t>>();
                if (knn.rows.size() != knn.labels.size() * model.dims || knn.labels.size() < model.spec.knn_k) {
                    throw ModelFormatError("knn payload has inconsistent sizes");
                }
                for (auto y : knn.labels) {
                    if (y < 0 || static_cast<std::size_t>(y) >= classes) throw ModelFormatError("knn label out of range");
                }
                model.payload = std::move(knn);
                break;
            }
            case ModelKind::RandomForest: {
                ForestPayload forest;
                const auto& trees = payload.at("trees");
                for (std::size_t t = 0; t < trees.size(); ++t) {
                    forest.trees.push_back(tree_from_json(trees[t], model.dims, classes, "tree " + std::to_string(t)));
                }
                if (forest.trees.empty()) throw ModelFormatError("forest has no trees");
                model.payload = std::move(forest);
                break;
            }
            case ModelKind::GradientBoosting: {
                BoostingPayload gb;
                gb.initial_scores = payload.at("initial_scores").get<std::vector<double>>();
                const auto& trees = payload.at("trees");
                for (std::size_t t = 0; t < trees.size(); ++t) {
                    gb.trees.push_back(tree_from_json(trees[t], model.dims, 1, "tree " + std::to_string(t)));
                }
                if (gb.initial_scores.size() != classes || gb.trees.empty() || gb.trees.size() % classes != 0) {
                    throw ModelFormatError("boosting payload has inconsistent sizes");
                }
                model.payload = std::move(gb);
                break;
            }
        }
        return model;
    } catch (const nlohmann::json::exception& e) {
        throw ModelFormatError(std::string("malformed model file: ") + e.what());
    } catch (const ModelFormatError&) {
        throw;
    } catch (const Error& e) {
        throw ModelFormatError(std::string("malformed model file: ") + e.what());
    }
}

}  // namespace walldetect
