#include "walldetect/classify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "walldetect/parallel.hpp"
#include "walldetect/rng.hpp"

namespace walldetect {

std::string_view model_kind_name(ModelKind kind) noexcept {
    switch (kind) {
        case ModelKind::Knn: return "knn";
        case ModelKind::RandomForest: return "rf";
        case ModelKind::GradientBoosting: return "gb";
    }
    return "rf";
}

ModelKind parse_model_kind(std::string_view name) {
    for (ModelKind kind : {ModelKind::Knn, ModelKind::RandomForest, ModelKind::GradientBoosting}) {
        if (model_kind_name(kind) == name) return kind;
    }
    throw Error("unknown classifier '" + std::string(name) + "' (expected knn, rf or gb)");
}

ModelSpec default_spec(ModelKind kind, std::uint64_t seed) {
    ModelSpec spec;
    spec.kind = kind;
    spec.seed = seed;
    return spec;
}

void TrainingSet::add(std::span<const double> x, std::int32_t label) {
    if (x.size() != dims) throw Error("training row has wrong dimension");
    features.insert(features.end(), x.begin(), x.end());
    labels.push_back(label);
}

namespace {

void check_training_set(const TrainingSet& data) {
    if (data.size() == 0) throw Error("empty training set");
    if (data.dims == 0) throw Error("training set has zero feature dimensions");
    if (data.classes.empty()) throw Error("training set has no classes");
    if (data.features.size() != data.size() * data.dims) throw Error("training matrix size mismatch");
    for (double v : data.features) {
        if (!std::isfinite(v)) throw Error("training set contains non-finite features");
    }
    for (auto label : data.labels) {
        if (label < 0 || static_cast<std::size_t>(label) >= data.classes.size()) {
            throw Error("training label out of range");
        }
    }
}

std::vector<double> column_major(const TrainingSet& data) {
    const std::size_t n = data.size();
    std::vector<double> cols(n * data.dims);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t f = 0; f < data.dims; ++f) cols[f * n + r] = data.features[r * data.dims + f];
    }
    return cols;
}

std::int32_t argmax_lowest(std::span<const double> values) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < values.size(); ++k) {
        if (values[k] > values[best]) best = k;
    }
    return static_cast<std::int32_t>(best);
}

// ---------------------------------------------------------------------------
// KNN
// ---------------------------------------------------------------------------

struct Neighbor {
    double dist2;
    std::int32_t label;

    bool operator<(const Neighbor& o) const noexcept {
        return dist2 < o.dist2 || (dist2 == o.dist2 && label < o.label);
    }
};

std::int32_t knn_predict(const TrainedModel& model, const KnnPayload& p, std::span<const double> x) {
    const std::size_t k = model.spec.knn_k;
    const std::size_t d = model.dims;
    const std::size_t n = p.labels.size();
    std::vector<Neighbor> best;
    best.reserve(k + 1);

    for (std::size_t i = 0; i < n; ++i) {
        const double* row = p.rows.data() + i * d;
        const bool full = best.size() == k;
        const double bound = full ? best.back().dist2 : std::numeric_limits<double>::infinity();
        double acc = 0.0;
        std::size_t f = 0;
        bool abandoned = false;
        while (f < d) {
            const std::size_t stop = std::min(d, f + 6);
            for (; f < stop; ++f) {
                const double diff = row[f] - x[f];
                acc += diff * diff;
            }
            if (acc > bound) {
                abandoned = true;
                break;
            }
        }
        if (abandoned) continue;
        const Neighbor cand{acc, p.labels[i]};
        if (full && !(cand < best.back())) continue;
        if (full) best.pop_back();
        best.insert(std::upper_bound(best.begin(), best.end(), cand), cand);
    }

    const std::size_t classes = model.classes.size();
    std::vector<std::size_t> votes(classes, 0);
    std::vector<double> dist_sum(classes, 0.0);
    for (const auto& nb : best) {
        ++votes[static_cast<std::size_t>(nb.label)];
        dist_sum[static_cast<std::size_t>(nb.label)] += std::sqrt(nb.dist2);
    }
    std::size_t winner = 0;
    for (std::size_t c = 1; c < classes; ++c) {
        if (votes[c] > votes[winner] || (votes[c] == votes[winner] && votes[c] > 0 && dist_sum[c] < dist_sum[winner])) {
            winner = c;
        }
    }
    return static_cast<std::int32_t>(winner);
}

// ---------------------------------------------------------------------------
// Random forest
// ---------------------------------------------------------------------------

ForestPayload train_forest(const ModelSpec& spec, const TrainingSet& data) {
    const std::size_t n = data.size();
    const std::vector<double> cols = column_major(data);
    CartData cart{n, data.dims, cols, data.labels, {}};
    const PresortedColumns presorted(cart);

    CartParams params;
    params.criterion = SplitCriterion::Gini;
    params.max_depth = spec.rf_max_depth;
    params.max_features = spec.rf_feature_subset > 0
                              ? spec.rf_feature_subset
                              : static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(data.dims))));
    params.num_classes = data.classes.size();

    ForestPayload forest;
    forest.trees.resize(spec.rf_trees);
    parallel_for(spec.rf_trees, [&](std::size_t t) {
        Rng rng(derive_seed(spec.seed, t));
        std::vector<std::uint32_t> weights(n, 0);
        for (std::size_t draw = 0; draw < n; ++draw) ++weights[uniform_index(rng, n)];
        forest.trees[t] = build_cart_tree(cart, presorted, weights, params, rng);
    });
    return forest;
}

std::int32_t forest_predict(const TrainedModel& model, const ForestPayload& p, std::span<const double> x) {
    std::vector<double> votes(model.classes.size(), 0.0);
    for (const auto& tree : p.trees) {
        const auto leaf = tree.apply(x);
        votes[static_cast<std::size_t>(argmax_lowest(tree.node_value(leaf)))] += 1.0;
    }
    return argmax_lowest(votes);
}

// ---------------------------------------------------------------------------
// Gradient boosting
// ---------------------------------------------------------------------------

void softmax_row(std::span<const double> scores, std::span<double> out) {
    const double top = *std::max_element(scores.begin(), scores.end());
    double total = 0.0;
    for (std::size_t k = 0; k < scores.size(); ++k) {
        out[k] = std::exp(scores[k] - top);
        total += out[k];
    }
    for (auto& v : out) v /= total;
}

double log_softmax_at(std::span<const double> scores, std::size_t k) {
    const double top = *std::max_element(scores.begin(), scores.end());
    double total = 0.0;
    for (double s : scores) total += std::exp(s - top);
    return scores[k] - top - std::log(total);
}

BoostingPayload train_boosting(const ModelSpec& spec, const TrainingSet& data) {
    const std::size_t n = data.size();
    const std::size_t classes = data.classes.size();
    const std::vector<double> cols = column_major(data);

    std::vector<double> counts(classes, 0.0);
    for (auto y : data.labels) counts[static_cast<std::size_t>(y)] += 1.0;

    BoostingPayload model;
    model.initial_scores.resize(classes);
    for (std::size_t k = 0; k < classes; ++k) {
        model.initial_scores[k] = std::log(std::max(counts[k] / static_cast<double>(n), 1e-15));
    }

    std::vector<double> scores(n * classes);
    for (std::size_t i = 0; i < n; ++i) {
        std::copy(model.initial_scores.begin(), model.initial_scores.end(), scores.begin() + static_cast<std::ptrdiff_t>(i * classes));
    }

    std::vector<double> residual(n);
    CartData cart{n, data.dims, cols, {}, residual};
    const PresortedColumns presorted(cart);
    const std::vector<std::uint32_t> weights(n, 1U);
    CartParams params;
    params.criterion = SplitCriterion::Variance;
    params.max_depth = spec.gb_max_depth;
    params.max_features = 0;
    Rng rng(spec.seed);

    std::vector<double> probs(n * classes);
    std::vector<std::int32_t> leaf_of_row;
    std::vector<double> numerator;
    std::vector<double> denominator;
    const double newton_scale = static_cast<double>(classes - 1) / static_cast<double>(classes);
    model.trees.reserve(spec.gb_stages * classes);

    for (std::size_t stage = 0; stage < spec.gb_stages; ++stage) {
        for (std::size_t i = 0; i < n; ++i) {
            softmax_row({scores.data() + i * classes, classes}, {probs.data() + i * classes, classes});
        }
        for (std::size_t k = 0; k < classes; ++k) {
            for (std::size_t i = 0; i < n; ++i) {
                const double target = data.labels[i] == static_cast<std::int32_t>(k) ? 1.0 : 0.0;
                residual[i] = target - probs[i * classes + k];
            }
            DecisionTree tree = build_cart_tree(cart, presorted, weights, params, rng, &leaf_of_row);

            numerator.assign(tree.node_count(), 0.0);
            denominator.assign(tree.node_count(), 0.0);
            for (std::size_t i = 0; i < n; ++i) {
                const auto leaf = static_cast<std::size_t>(leaf_of_row[i]);
                const double p = probs[i * classes + k];
                numerator[leaf] += residual[i];
                denominator[leaf] += p * (1.0 - p);
            }
            for (std::size_t node = 0; node < tree.node_count(); ++node) {
                if (!tree.is_leaf(node)) continue;
                const double den = denominator[node];
                tree.values[node] = std::abs(den) < 1e-150 ? 0.0 : newton_scale * numerator[node] / den;
            }
            for (std::size_t i = 0; i < n; ++i) {
                scores[i * classes + k] += spec.gb_learning_rate * tree.values[static_cast<std::size_t>(leaf_of_row[i])];
            }
            model.trees.push_back(std::move(tree));
        }
    }
    return model;
}

void check_spec(const ModelSpec& spec, const TrainingSet& data) {
    switch (spec.kind) {
        case ModelKind::Knn:
            if (spec.knn_k < 1) throw Error("knn_k must be at least 1");
            if (spec.knn_k > data.size()) {
                throw Error("knn_k (" + std::to_string(spec.knn_k) + ") exceeds training size (" +
                            std::to_string(data.size()) + ")");
            }
            break;
        case ModelKind::RandomForest:
            if (spec.rf_trees < 1) throw Error("rf_trees must be at least 1");
            break;
        case ModelKind::GradientBoosting: {
            if (spec.gb_stages < 1) throw Error("gb_stages must be at least 1");
            if (spec.gb_max_depth < 1) throw Error("gb_max_depth must be at least 1");
            if (!(spec.gb_learning_rate > 0.0 && spec.gb_learning_rate <= 1.0)) {
                throw Error("gb_learning_rate must be in (0, 1]");
            }
            std::vector<bool> seen(data.classes.size(), false);
            for (auto y : data.labels) seen[static_cast<std::size_t>(y)] = true;
            if (std::count(seen.begin(), seen.end(), true) < 2) {
                throw Error("gradient boosting needs at least two classes in the training set");
            }
            break;
        }
    }
}

}  // namespace

TrainedModel train(const ModelSpec& spec, const TrainingSet& data) {
    check_training_set(data);
    check_spec(spec, data);

    TrainedModel model;
    model.spec = spec;
    model.classes = data.classes;
    model.dims = data.dims;
    switch (spec.kind) {
        case ModelKind::Knn:
            model.payload = KnnPayload{data.features, data.labels};
            break;
        case ModelKind::RandomForest:
            model.payload = train_forest(spec, data);
            break;
        case ModelKind::GradientBoosting:
            model.payload = train_boosting(spec, data);
            break;
    }
    return model;
}

std::int32_t predict_index(const TrainedModel& model, std::span<const double> x) {
    if (x.size() != model.dims) {
        throw Error("feature vector has dimension " + std::to_string(x.size()) + ", model expects " +
                    std::to_string(model.dims));
    }
    if (const auto* knn = std::get_if<KnnPayload>(&model.payload)) return knn_predict(model, *knn, x);
    if (const auto* forest = std::get_if<ForestPayload>(&model.payload)) return forest_predict(model, *forest, x);
    const auto scores = boosting_scores(model, x);
    return argmax_lowest(scores);
}

const std::string& predict(const TrainedModel& model, std::span<const double> x) {
    return model.classes[static_cast<std::size_t>(predict_index(model, x))];
}

std::vector<std::int32_t> predict_all(const TrainedModel& model, const TrainingSet& data) {
    if (data.dims != model.dims) throw Error("dataset dimension does not match the model");
    std::vector<std::int32_t> out(data.size());
    parallel_for(data.size(), [&](std::size_t i) { out[i] = predict_index(model, data.row(i)); });
    return out;
}

std::vector<double> boosting_scores(const TrainedModel& model, std::span<const double> x,
                                    std::optional<std::size_t> stages) {
    const auto* gb = std::get_if<BoostingPayload>(&model.payload);
    if (!gb) throw Error("model is not a gradient boosting model");
    if (x.size() != model.dims) throw Error("feature vector has wrong dimension");
    const std::size_t classes = model.classes.size();
    const std::size_t total_stages = gb->trees.size() / classes;
    const std::size_t use = std::min(stages.value_or(total_stages), total_stages);
    std::vector<double> scores = gb->initial_scores;
    for (std::size_t s = 0; s < use; ++s) {
        for (std::size_t k = 0; k < classes; ++k) {
            const auto& tree = gb->trees[s * classes + k];
            scores[k] += model.spec.gb_learning_rate * tree.values[tree.apply(x)];
        }
    }
    return scores;
}

std::vector<double> boosting_deviance_trace(const TrainedModel& model, const TrainingSet& data) {
    const auto* gb = std::get_if<BoostingPayload>(&model.payload);
    if (!gb) throw Error("model is not a gradient boosting model");
    const std::size_t classes = model.classes.size();
    const std::size_t n = data.size();
    const std::size_t stages = gb->trees.size() / classes;

    std::vector<double> scores(n * classes);
    for (std::size_t i = 0; i < n; ++i) {
        std::copy(gb->initial_scores.begin(), gb->initial_scores.end(), scores.begin() + static_cast<std::ptrdiff_t>(i * classes));
    }
    const auto deviance = [&] {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            total -= log_softmax_at({scores.data() + i * classes, classes}, static_cast<std::size_t>(data.labels[i]));
        }
        return total / static_cast<double>(n);
    };

    std::vector<double> trace;
    trace.reserve(stages + 1);
    trace.push_back(deviance());
    for (std::size_t s = 0; s < stages; ++s) {
        for (std::size_t k = 0; k < classes; ++k) {
            const auto& tree = gb->trees[s * classes + k];
            for (std::size_t i = 0; i < n; ++i) {
                scores[i * classes + k] += model.spec.gb_learning_rate * tree.values[tree.apply(data.row(i))];
            }
        }
        trace.push_back(deviance());
    }
    return trace;
}

}  // namespace walldetect
