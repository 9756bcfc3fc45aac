#include "walldetect/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>

#include "spec_json.hpp"
#include "walldetect/parallel.hpp"
#include "walldetect/rng.hpp"

namespace walldetect {

std::string_view experiment_name(ExperimentId id) noexcept {
    switch (id) {
        case ExperimentId::E1: return "e1";
        case ExperimentId::E2: return "e2";
        case ExperimentId::E3: return "e3";
        case ExperimentId::E4: return "e4";
    }
    return "e1";
}

std::string_view experiment_description(ExperimentId id) noexcept {
    switch (id) {
        case ExperimentId::E1: return "wall vs no wall";
        case ExperimentId::E2: return "left vs right";
        case ExperimentId::E3: return "left vs right vs front";
        case ExperimentId::E4: return "left vs right vs front vs no wall";
    }
    return "";
}

ExperimentId parse_experiment_id(std::string_view name) {
    for (auto id : kAllExperiments) {
        if (experiment_name(id) == name) return id;
    }
    throw Error("unknown experiment '" + std::string(name) + "' (expected e1, e2, e3 or e4)");
}

std::string_view split_mode_name(SplitMode mode) noexcept { return mode == SplitMode::Row ? "row" : "flight"; }

SplitMode parse_split_mode(std::string_view name) {
    if (name == "row") return SplitMode::Row;
    if (name == "flight") return SplitMode::Flight;
    throw Error("unknown split mode '" + std::string(name) + "' (expected row or flight)");
}

ExperimentSpec make_experiment(ExperimentId id, std::uint64_t master_seed, std::size_t repetitions) {
    ExperimentSpec spec;
    spec.id = id;
    spec.master_seed = master_seed;
    spec.repetitions = repetitions;
    constexpr auto L = static_cast<std::size_t>(WallLabel::Left);
    constexpr auto R = static_cast<std::size_t>(WallLabel::Right);
    constexpr auto F = static_cast<std::size_t>(WallLabel::Front);
    constexpr auto N = static_cast<std::size_t>(WallLabel::NoWall);
    switch (id) {
        case ExperimentId::E1:
            spec.classes = {"wall", "nowall"};
            spec.class_of[L] = 0;
            spec.class_of[R] = 0;
            spec.class_of[N] = 1;
            break;
        case ExperimentId::E2:
            spec.classes = {"left", "right"};
            spec.class_of[L] = 0;
            spec.class_of[R] = 1;
            break;
        case ExperimentId::E3:
            spec.classes = {"left", "right", "front"};
            spec.class_of[L] = 0;
            spec.class_of[R] = 1;
            spec.class_of[F] = 2;
            break;
        case ExperimentId::E4:
            spec.classes = {"left", "right", "front", "nowall"};
            spec.class_of[L] = 0;
            spec.class_of[R] = 1;
            spec.class_of[F] = 2;
            spec.class_of[N] = 3;
            spec.nowall_flight_limit = 3;
            break;
    }
    spec.classifiers = {default_spec(ModelKind::Knn), default_spec(ModelKind::RandomForest),
                        default_spec(ModelKind::GradientBoosting)};
    return spec;
}

ExampleSet assemble(const Dataset& dataset, const ExperimentSpec& spec) {
    if (spec.classes.empty()) throw Error("experiment has no classes");

    std::vector<std::string> nowall_flights;
    for (const auto& row : dataset.rows()) {
        if (row.label == WallLabel::NoWall &&
            (nowall_flights.empty() || nowall_flights.back() != row.flight_id)) {
            nowall_flights.push_back(row.flight_id);
        }
    }
    std::sort(nowall_flights.begin(), nowall_flights.end());
    nowall_flights.erase(std::unique(nowall_flights.begin(), nowall_flights.end()), nowall_flights.end());
    const bool uses_nowall = spec.class_of[static_cast<std::size_t>(WallLabel::NoWall)].has_value();
    if (!uses_nowall) {
        nowall_flights.clear();
    } else if (spec.nowall_flight_limit && nowall_flights.size() > *spec.nowall_flight_limit) {
        Rng rng(derive_seed(spec.master_seed, 0x4e4f57414c4cULL));
        shuffle(nowall_flights.begin(), nowall_flights.end(), rng);
        nowall_flights.resize(*spec.nowall_flight_limit);
        std::sort(nowall_flights.begin(), nowall_flights.end());
    }

    ExampleSet out;
    out.data.dims = kFeatureCount;
    out.data.classes = spec.classes;
    out.class_counts.assign(spec.classes.size(), 0);
    out.nowall_flights = nowall_flights;
    std::map<std::string, std::uint32_t> flight_index;

    for (const auto& row : dataset.rows()) {
        const auto cls = spec.class_of[static_cast<std::size_t>(row.label)];
        if (!cls) continue;
        if (row.label == WallLabel::NoWall &&
            !std::binary_search(nowall_flights.begin(), nowall_flights.end(), row.flight_id)) {
            continue;
        }
        out.data.add(row.features, *cls);
        ++out.class_counts[static_cast<std::size_t>(*cls)];
        auto [it, inserted] = flight_index.try_emplace(row.flight_id, 0);
        out.flight_of_row.push_back(0);  // patched below once ids are sorted
        out.start_index.push_back(row.start_index);
        (void)it;
        (void)inserted;
    }
    for (std::size_t c = 0; c < spec.classes.size(); ++c) {
        if (out.class_counts[c] == 0) {
            throw Error("experiment " + std::string(experiment_name(spec.id)) + " needs class '" + spec.classes[c] +
                        "' but the dataset has no rows for it");
        }
    }

    std::uint32_t next = 0;
    for (auto& [id, index] : flight_index) {
        index = next++;
        out.flights.push_back(id);
    }
    std::size_t i = 0;
    for (const auto& row : dataset.rows()) {
        const auto cls = spec.class_of[static_cast<std::size_t>(row.label)];
        if (!cls) continue;
        if (row.label == WallLabel::NoWall &&
            !std::binary_search(nowall_flights.begin(), nowall_flights.end(), row.flight_id)) {
            continue;
        }
        out.flight_of_row[i++] = flight_index.at(row.flight_id);
    }
    return out;
}

TrainTestSplit split_train_test(const ExampleSet& examples, double fraction, std::uint64_t seed, SplitMode mode,
                                bool stratified) {
    const std::size_t n = examples.data.size();
    if (!(fraction > 0.0 && fraction < 1.0)) throw Error("test fraction must be in (0, 1)");
    if (n < 5) throw Error("need at least 5 examples to split, got " + std::to_string(n));

    Rng rng(seed);
    TrainTestSplit split;
    const auto take = [&](std::vector<std::size_t> pool, std::size_t n_test) {
        shuffle(pool.begin(), pool.end(), rng);
        split.test.insert(split.test.end(), pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(n_test));
        split.train.insert(split.train.end(), pool.begin() + static_cast<std::ptrdiff_t>(n_test), pool.end());
    };

    if (mode == SplitMode::Row) {
        if (stratified) {
            std::vector<std::vector<std::size_t>> by_class(examples.data.classes.size());
            for (std::size_t i = 0; i < n; ++i) by_class[static_cast<std::size_t>(examples.data.labels[i])].push_back(i);
            for (auto& pool : by_class) {
                const auto n_test = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(pool.size())));
                take(std::move(pool), n_test);
            }
        } else {
            std::vector<std::size_t> all(n);
            std::iota(all.begin(), all.end(), std::size_t{0});
            take(std::move(all), static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n))));
        }
    } else {
        const std::size_t flights = examples.flights.size();
        if (flights < 2) throw Error("flight split needs at least two flights");
        std::vector<std::size_t> order(flights);
        std::iota(order.begin(), order.end(), std::size_t{0});
        shuffle(order.begin(), order.end(), rng);
        auto n_test = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(flights)));
        n_test = std::clamp<std::size_t>(n_test, 1, flights - 1);
        std::vector<bool> is_test(flights, false);
        for (std::size_t k = 0; k < n_test; ++k) is_test[order[k]] = true;
        for (std::size_t i = 0; i < n; ++i) {
            (is_test[examples.flight_of_row[i]] ? split.test : split.train).push_back(i);
        }
    }

    std::sort(split.train.begin(), split.train.end());
    std::sort(split.test.begin(), split.test.end());
    if (split.train.empty() || split.test.empty()) {
        throw Error("degenerate split: " + std::to_string(split.train.size()) + " train / " +
                    std::to_string(split.test.size()) + " test rows");
    }
    return split;
}

ConfusionMatrix confusion_matrix(std::span<const std::int32_t> truth, std::span<const std::int32_t> predicted,
                                 std::size_t class_count) {
    if (truth.size() != predicted.size()) throw Error("truth and prediction lengths differ");
    ConfusionMatrix m(class_count, std::vector<std::size_t>(class_count, 0));
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const auto t = truth[i];
        const auto p = predicted[i];
        if (t < 0 || p < 0 || static_cast<std::size_t>(t) >= class_count || static_cast<std::size_t>(p) >= class_count) {
            throw Error("unknown label index in confusion matrix input");
        }
        ++m[static_cast<std::size_t>(t)][static_cast<std::size_t>(p)];
    }
    return m;
}

double accuracy(const ConfusionMatrix& m) {
    std::size_t total = 0;
    std::size_t trace = 0;
    for (std::size_t i = 0; i < m.size(); ++i) {
        trace += m[i][i];
        total += std::accumulate(m[i].begin(), m[i].end(), std::size_t{0});
    }
    return total == 0 ? 0.0 : static_cast<double>(trace) / static_cast<double>(total);
}

namespace {

TrainingSet subset(const ExampleSet& examples, const std::vector<std::size_t>& rows) {
    TrainingSet out;
    out.dims = examples.data.dims;
    out.classes = examples.data.classes;
    out.features.reserve(rows.size() * out.dims);
    out.labels.reserve(rows.size());
    for (auto r : rows) out.add(examples.data.row(r), examples.data.labels[r]);
    return out;
}

/// z-scores both sets with the training set's per-feature mean and std.
void standardize(TrainingSet& train, TrainingSet& test) {
    const std::size_t d = train.dims;
    const std::size_t n = train.size();
    for (std::size_t f = 0; f < d; ++f) {
        double mean = 0.0;
        for (std::size_t i = 0; i < n; ++i) mean += train.features[i * d + f];
        mean /= static_cast<double>(n);
        double var = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double diff = train.features[i * d + f] - mean;
            var += diff * diff;
        }
        const double sd = std::sqrt(var / static_cast<double>(n));
        const double scale = sd > 0.0 ? 1.0 / sd : 1.0;
        for (std::size_t i = 0; i < n; ++i) train.features[i * d + f] = (train.features[i * d + f] - mean) * scale;
        for (std::size_t i = 0; i < test.size(); ++i) test.features[i * d + f] = (test.features[i * d + f] - mean) * scale;
    }
}

std::uint64_t classifier_seed(const ExperimentSpec& spec, std::size_t rep, std::size_t c) {
    return derive_seed(spec.classifiers[c].seed ^ derive_seed(spec.master_seed, rep), c);
}

}  // namespace

ExperimentReport run_experiment(const Dataset& dataset, const ExperimentSpec& spec, const ModelSink& sink) {
    if (spec.repetitions < 1) throw Error("repetitions must be at least 1");
    if (spec.classifiers.empty()) throw Error("experiment has no classifiers");
    const ExampleSet examples = assemble(dataset, spec);
    const std::size_t classes = spec.classes.size();
    const std::size_t n_clf = spec.classifiers.size();

    struct RepResult {
        std::vector<ConfusionMatrix> confusion;
    };
    std::vector<RepResult> results(spec.repetitions);
    std::vector<std::optional<TrainedModel>> first_models(n_clf);

    parallel_for(spec.repetitions, [&](std::size_t rep) {
        const auto split = split_train_test(examples, spec.test_fraction, derive_seed(spec.master_seed, rep),
                                            spec.split_mode, spec.stratified);
        TrainingSet train_set = subset(examples, split.train);
        TrainingSet test_set = subset(examples, split.test);
        if (spec.standardize) standardize(train_set, test_set);

        results[rep].confusion.resize(n_clf);
        for (std::size_t c = 0; c < n_clf; ++c) {
            ModelSpec model_spec = spec.classifiers[c];
            model_spec.seed = classifier_seed(spec, rep, c);
            try {
                TrainedModel model = train(model_spec, train_set);
                const auto predicted = predict_all(model, test_set);
                results[rep].confusion[c] = confusion_matrix(test_set.labels, predicted, classes);
                if (rep == 0 && sink) first_models[c] = std::move(model);
            } catch (const Error& e) {
                throw Error(std::string(model_kind_name(model_spec.kind)) + " (classifier " + std::to_string(c) +
                            ") failed in repetition " + std::to_string(rep) + ": " + e.what());
            }
        }
    });

    ExperimentReport report;
    report.id = spec.id;
    report.classes = spec.classes;
    report.class_counts = examples.class_counts;
    report.nowall_flights = examples.nowall_flights;
    report.test_fraction = spec.test_fraction;
    report.repetitions = spec.repetitions;
    report.split_mode = spec.split_mode;
    report.stratified = spec.stratified;
    report.standardize = spec.standardize;
    report.master_seed = spec.master_seed;
    for (std::size_t c = 0; c < n_clf; ++c) {
        ClassifierResult result;
        result.spec = spec.classifiers[c];
        result.confusion.assign(classes, std::vector<std::size_t>(classes, 0));
        for (const auto& rep : results) {
            result.accuracies.push_back(accuracy(rep.confusion[c]));
            for (std::size_t i = 0; i < classes; ++i) {
                for (std::size_t j = 0; j < classes; ++j) result.confusion[i][j] += rep.confusion[c][i][j];
            }
        }
        const double reps = static_cast<double>(result.accuracies.size());
        result.mean_accuracy = std::accumulate(result.accuracies.begin(), result.accuracies.end(), 0.0) / reps;
        double ss = 0.0;
        for (double a : result.accuracies) ss += (a - result.mean_accuracy) * (a - result.mean_accuracy);
        result.std_accuracy = result.accuracies.size() > 1 ? std::sqrt(ss / (reps - 1.0)) : 0.0;
        report.classifiers.push_back(std::move(result));
    }
    if (sink) {
        for (std::size_t c = 0; c < n_clf; ++c) sink(c, *first_models[c]);
    }
    return report;
}

SuiteReport run_suite(const Dataset& dataset, const std::vector<ExperimentSpec>& specs, const SuiteModelSink& sink) {
    SuiteReport suite;
    for (const auto& spec : specs) {
        try {
            ModelSink inner;
            if (sink) inner = [&](std::size_t c, const TrainedModel& m) { sink(spec.id, c, m); };
            suite.reports.push_back(run_experiment(dataset, spec, inner));
        } catch (const Error& e) {
            suite.failures.push_back({spec.id, e.what()});
        }
    }
    return suite;
}

// ---------------------------------------------------------------------------
// Report I/O
// ---------------------------------------------------------------------------

namespace {

using detail::ojson;

ojson report_to_json(const ExperimentReport& r) {
    ojson j;
    j["experiment"] = std::string(experiment_name(r.id));
    j["description"] = std::string(experiment_description(r.id));
    j["split_mode"] = std::string(split_mode_name(r.split_mode));
    j["stratified"] = r.stratified;
    j["standardize"] = r.standardize;
    j["test_fraction"] = r.test_fraction;
    j["repetitions"] = r.repetitions;
    j["seed"] = r.master_seed;
    j["classes"] = r.classes;
    j["class_counts"] = r.class_counts;
    j["nowall_flights"] = r.nowall_flights;
    ojson classifiers = ojson::array();
    for (const auto& c : r.classifiers) {
        ojson cj;
        cj["name"] = std::string(model_kind_name(c.spec.kind));
        cj["spec"] = detail::spec_to_json(c.spec);
        cj["mean_accuracy"] = c.mean_accuracy;
        cj["std_accuracy"] = c.std_accuracy;
        cj["accuracies"] = c.accuracies;
        cj["confusion"] = c.confusion;
        classifiers.push_back(std::move(cj));
    }
    j["classifiers"] = std::move(classifiers);
    return j;
}

ExperimentReport report_from_json(const ojson& j) {
    ExperimentReport r;
    r.id = parse_experiment_id(j.at("experiment").get<std::string>());
    r.split_mode = parse_split_mode(j.at("split_mode").get<std::string>());
    r.stratified = j.at("stratified").get<bool>();
    r.standardize = j.at("standardize").get<bool>();
    r.test_fraction = j.at("test_fraction").get<double>();
    r.repetitions = j.at("repetitions").get<std::size_t>();
    r.master_seed = j.at("seed").get<std::uint64_t>();
    r.classes = j.at("classes").get<std::vector<std::string>>();
    r.class_counts = j.at("class_counts").get<std::vector<std::size_t>>();
    r.nowall_flights = j.at("nowall_flights").get<std::vector<std::string>>();
    for (const auto& cj : j.at("classifiers")) {
        ClassifierResult c;
        c.spec = detail::spec_from_json(cj.at("spec"));
        c.mean_accuracy = cj.at("mean_accuracy").get<double>();
        c.std_accuracy = cj.at("std_accuracy").get<double>();
        c.accuracies = cj.at("accuracies").get<std::vector<double>>();
        c.confusion = cj.at("confusion").get<ConfusionMatrix>();
        r.classifiers.push_back(std::move(c));
    }
    return r;
}

ojson parse_json(std::string_view text, const char* what) {
    try {
        return ojson::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(std::string(what) + " is not valid JSON: " + e.what());
    }
}

}  // namespace

std::string emit_report(const ExperimentReport& report) { return report_to_json(report).dump(2) + "\n"; }

ExperimentReport parse_report(std::string_view json_text) {
    const ojson j = parse_json(json_text, "report");
    try {
        return report_from_json(j);
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("malformed report: ") + e.what());
    }
}

std::string emit_suite_report(const SuiteReport& suite) {
    ojson j;
    ojson experiments = ojson::array();
    for (const auto& r : suite.reports) experiments.push_back(report_to_json(r));
    j["experiments"] = std::move(experiments);
    ojson failures = ojson::array();
    for (const auto& f : suite.failures) {
        ojson fj;
        fj["experiment"] = std::string(experiment_name(f.id));
        fj["error"] = f.error;
        failures.push_back(std::move(fj));
    }
    j["failures"] = std::move(failures);
    return j.dump(2) + "\n";
}

SuiteReport parse_suite_report(std::string_view json_text) {
    const ojson j = parse_json(json_text, "suite report");
    try {
        SuiteReport suite;
        for (const auto& r : j.at("experiments")) suite.reports.push_back(report_from_json(r));
        for (const auto& f : j.at("failures")) {
            suite.failures.push_back({parse_experiment_id(f.at("experiment").get<std::string>()),
                                      f.at("error").get<std::string>()});
        }
        return suite;
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("malformed suite report: ") + e.what());
    }
}

std::string summary_table(const ExperimentReport& report) {
    std::string out;
    char line[256];
    std::snprintf(line, sizeof line, "%s (%s), split=%s%s, reps=%zu, seed=%llu\n",
                  std::string(experiment_name(report.id)).c_str(),
                  std::string(experiment_description(report.id)).c_str(),
                  std::string(split_mode_name(report.split_mode)).c_str(), report.stratified ? " stratified" : "",
                  report.repetitions, static_cast<unsigned long long>(report.master_seed));
    out += line;
    out += "  classes:";
    for (std::size_t c = 0; c < report.classes.size(); ++c) {
        out += " " + report.classes[c] + "=" + std::to_string(report.class_counts[c]);
    }
    out += "\n";
    std::snprintf(line, sizeof line, "  %-10s %10s %10s\n", "classifier", "mean", "std");
    out += line;
    for (const auto& c : report.classifiers) {
        std::snprintf(line, sizeof line, "  %-10s %9.2f%% +/- %6.2f%%\n",
                      std::string(model_kind_name(c.spec.kind)).c_str(), 100.0 * c.mean_accuracy,
                      100.0 * c.std_accuracy);
        out += line;
    }
    return out;
}

}  // namespace walldetect
