// walldetect: simulate, ingest, extract, train, evaluate, reproduce.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "walldetect/classify.hpp"
#include "walldetect/eval.hpp"
#include "walldetect/features.hpp"
#include "walldetect/ingest.hpp"
#include "walldetect/pipeline.hpp"
#include "walldetect/simulate.hpp"

namespace fs = std::filesystem;
using namespace walldetect;
using ojson = nlohmann::ordered_json;

namespace {

const std::vector<std::string> kExperimentNames = {"e1", "e2", "e3", "e4"};
const std::vector<std::string> kClassifierNames = {"knn", "rf", "gb"};

void print_config(const std::string& command, const ojson& config) {
    std::cout << "# " << command << " configuration\n" << config.dump(2) << "\n" << std::flush;
}

SimConfig load_sim_config(const std::string& path) {
    if (path.empty()) return SimConfig{};
    return parse_sim_config(read_text_file(path));
}

/// Overrides applied on top of the per-kind defaults.
struct SpecOverrides {
    std::size_t knn_k = 5;
    std::size_t rf_trees = 100;
    std::size_t rf_max_depth = 0;
    std::size_t rf_feature_subset = 0;
    std::size_t gb_stages = 100;
    double gb_learning_rate = 0.1;
    std::size_t gb_max_depth = 3;

    void add_to(CLI::App& app) {
        app.add_option("--knn-k", knn_k, "KNN neighbour count")->capture_default_str();
        app.add_option("--rf-trees", rf_trees, "random forest size")->capture_default_str();
        app.add_option("--rf-max-depth", rf_max_depth, "RF tree depth, 0 = unlimited")->capture_default_str();
        app.add_option("--rf-features", rf_feature_subset, "features per split, 0 = ceil(sqrt(d))")
            ->capture_default_str();
        app.add_option("--gb-stages", gb_stages, "boosting stages")->capture_default_str();
        app.add_option("--gb-learning-rate", gb_learning_rate, "boosting shrinkage")->capture_default_str();
        app.add_option("--gb-max-depth", gb_max_depth, "boosting tree depth")->capture_default_str();
    }

    ModelSpec make(ModelKind kind, std::uint64_t seed) const {
        ModelSpec s = default_spec(kind, seed);
        s.knn_k = knn_k;
        s.rf_trees = rf_trees;
        s.rf_max_depth = rf_max_depth;
        s.rf_feature_subset = rf_feature_subset;
        s.gb_stages = gb_stages;
        s.gb_learning_rate = gb_learning_rate;
        s.gb_max_depth = gb_max_depth;
        return s;
    }
};

ojson spec_json(const ModelSpec& s) {
    ojson j;
    j["kind"] = std::string(model_kind_name(s.kind));
    j["knn_k"] = s.knn_k;
    j["rf_trees"] = s.rf_trees;
    j["rf_max_depth"] = s.rf_max_depth;
    j["rf_feature_subset"] = s.rf_feature_subset;
    j["gb_stages"] = s.gb_stages;
    j["gb_learning_rate"] = s.gb_learning_rate;
    j["gb_max_depth"] = s.gb_max_depth;
    j["seed"] = s.seed;
    return j;
}

void print_label_counts(const Dataset& dataset) {
    const auto counts = dataset.label_counts();
    for (auto label : kAllLabels) {
        std::cout << "  " << encode_label(label) << ": " << counts[static_cast<std::size_t>(label)] << " rows\n";
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Wall detection from IMU flight logs"};
    app.require_subcommand(1);

    // simulate
    auto* simulate = app.add_subcommand("simulate", "generate a synthetic labelled corpus");
    std::string sim_config_path;
    std::string sim_out = "corpus";
    std::uint64_t sim_seed = 42;
    std::size_t sim_flights = 5;
    simulate->add_option("--config", sim_config_path, "SimConfig JSON file")->check(CLI::ExistingFile);
    simulate->add_option("--out", sim_out, "output directory")->capture_default_str();
    simulate->add_option("--seed", sim_seed, "simulation seed")->capture_default_str();
    simulate->add_option("--flights-per-class", sim_flights, "flights per label")->capture_default_str();

    // ingest
    auto* ingest = app.add_subcommand("ingest", "validate a manifest and its flight logs");
    std::string ingest_manifest;
    ingest->add_option("--manifest", ingest_manifest, "manifest.json")->required();

    // extract
    auto* extract = app.add_subcommand("extract", "compute window features for a corpus");
    std::string extract_manifest;
    std::string extract_out = "features.csv";
    extract->add_option("--manifest", extract_manifest, "manifest.json")->required();
    extract->add_option("--out", extract_out, "feature file")->capture_default_str();

    // train
    auto* train_cmd = app.add_subcommand("train", "train one classifier on an experiment's full data");
    std::string train_features;
    std::string train_experiment = "e1";
    std::string train_classifier = "rf";
    std::string train_out = "model.json";
    std::uint64_t train_seed = 42;
    SpecOverrides train_overrides;
    train_cmd->add_option("--features", train_features, "feature file")->required();
    train_cmd->add_option("--experiment", train_experiment, "e1..e4")
        ->check(CLI::IsMember(kExperimentNames))
        ->capture_default_str();
    train_cmd->add_option("--classifier", train_classifier, "knn, rf or gb")
        ->check(CLI::IsMember(kClassifierNames))
        ->capture_default_str();
    train_cmd->add_option("--out", train_out, "model file")->capture_default_str();
    train_cmd->add_option("--seed", train_seed, "training seed")->capture_default_str();
    train_overrides.add_to(*train_cmd);

    // evaluate
    auto* evaluate = app.add_subcommand("evaluate", "repeated train/test evaluation of one experiment");
    std::string eval_features;
    std::string eval_experiment;
    std::vector<std::string> eval_classifiers = kClassifierNames;
    std::size_t eval_reps = 100;
    std::uint64_t eval_seed = 42;
    std::string eval_split = "row";
    double eval_fraction = 0.2;
    bool eval_stratified = false;
    bool eval_standardize = false;
    std::string eval_report = "report.json";
    SpecOverrides eval_overrides;
    evaluate->add_option("--features", eval_features, "feature file")->required();
    evaluate->add_option("--experiment", eval_experiment, "e1..e4")
        ->check(CLI::IsMember(kExperimentNames))
        ->required();
    evaluate->add_option("--classifier", eval_classifiers, "knn, rf, gb (repeatable)")
        ->check(CLI::IsMember(kClassifierNames))
        ->capture_default_str();
    evaluate->add_option("--reps", eval_reps, "repetitions")->check(CLI::PositiveNumber)->capture_default_str();
    evaluate->add_option("--seed", eval_seed, "master seed")->capture_default_str();
    evaluate->add_option("--split", eval_split, "row or flight")
        ->check(CLI::IsMember({"row", "flight"}))
        ->capture_default_str();
    evaluate->add_option("--test-fraction", eval_fraction, "test share")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    evaluate->add_flag("--stratified", eval_stratified, "stratify row splits by class");
    evaluate->add_flag("--standardize", eval_standardize, "z-score features per split");
    evaluate->add_option("--report", eval_report, "report file")->capture_default_str();
    eval_overrides.add_to(*evaluate);

    // reproduce
    auto* repro = app.add_subcommand("reproduce", "simulate, extract and evaluate all experiments");
    ReproduceOptions repro_opts;
    std::string repro_out = "reproduce-out";
    std::string repro_config_path;
    std::string repro_split = "row";
    repro->add_option("--out", repro_out, "output directory")->capture_default_str();
    repro->add_option("--seed", repro_opts.seed, "seed for simulation and evaluation")->capture_default_str();
    repro->add_option("--reps", repro_opts.repetitions, "repetitions per experiment")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    repro->add_option("--flights-per-class", repro_opts.flights_per_class, "flights per label")
        ->capture_default_str();
    repro->add_option("--config", repro_config_path, "SimConfig JSON file")->check(CLI::ExistingFile);
    repro->add_option("--split", repro_split, "row or flight")
        ->check(CLI::IsMember({"row", "flight"}))
        ->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        if (simulate->parsed()) {
            SimConfig cfg = load_sim_config(sim_config_path);
            cfg.seed = sim_seed;
            validate_sim_config(cfg);
            ojson config;
            config["out"] = sim_out;
            config["flights_per_class"] = sim_flights;
            config["sim"] = ojson::parse(render_sim_config(cfg));
            print_config("simulate", config);
            const CorpusManifest manifest = generate_corpus(cfg, sim_flights, sim_out);
            std::map<std::string, std::vector<std::string>> by_label;
            for (const auto& e : manifest.entries) by_label[std::string(encode_label(e.label))].push_back(e.path.string());
            for (const auto& [label, files] : by_label) {
                std::cout << label << ":";
                for (const auto& f : files) std::cout << " " << f;
                std::cout << "\n";
            }
            std::cout << "wrote " << manifest.entries.size() << " logs and "
                      << (fs::path(sim_out) / kManifestFileName).string() << "\n";
        } else if (ingest->parsed()) {
            ojson config;
            config["manifest"] = ingest_manifest;
            print_config("ingest", config);
            const CorpusManifest manifest = read_manifest(ingest_manifest);
            const auto logs = load_corpus(manifest);
            for (const auto& log : logs) {
                const auto issues = validate_flight_log(log);
                std::cout << log.flight_id << " " << encode_label(log.label) << " " << log.samples.size()
                          << " samples";
                for (const auto& v : issues) std::cout << "; warning: " << v.message;
                std::cout << "\n";
            }
            std::cout << logs.size() << " flights ok\n";
        } else if (extract->parsed()) {
            ojson config;
            config["manifest"] = extract_manifest;
            config["out"] = extract_out;
            config["window_samples"] = window_length(kDefaultSampleRateHz);
            config["stride"] = 1;
            print_config("extract", config);
            const Dataset dataset = extract_features(load_corpus(read_manifest(extract_manifest)));
            write_text_file(extract_out, render_feature_file(dataset));
            print_label_counts(dataset);
            std::cout << "wrote " << dataset.size() << " rows to " << extract_out << "\n";
        } else if (train_cmd->parsed()) {
            const ExperimentSpec exp = make_experiment(parse_experiment_id(train_experiment), train_seed, 1);
            const ModelSpec spec = train_overrides.make(parse_model_kind(train_classifier), train_seed);
            ojson config;
            config["features"] = train_features;
            config["experiment"] = train_experiment;
            config["classes"] = exp.classes;
            config["out"] = train_out;
            config["spec"] = spec_json(spec);
            print_config("train", config);
            const ExampleSet examples = assemble(parse_feature_file(read_text_file(train_features)), exp);
            const TrainedModel model = train(spec, examples.data);
            write_text_file(train_out, save_model(model));
            const auto predicted = predict_all(model, examples.data);
            const double acc = accuracy(confusion_matrix(examples.data.labels, predicted, exp.classes.size()));
            std::printf("trained %s on %zu rows, training accuracy %.4f, wrote %s\n", train_classifier.c_str(),
                        examples.data.size(), acc, train_out.c_str());
        } else if (evaluate->parsed()) {
            ExperimentSpec exp = make_experiment(parse_experiment_id(eval_experiment), eval_seed, eval_reps);
            exp.split_mode = parse_split_mode(eval_split);
            exp.test_fraction = eval_fraction;
            exp.stratified = eval_stratified;
            exp.standardize = eval_standardize;
            exp.classifiers.clear();
            for (const auto& name : eval_classifiers) exp.classifiers.push_back(eval_overrides.make(parse_model_kind(name), 0));
            ojson config;
            config["features"] = eval_features;
            config["experiment"] = eval_experiment;
            config["classes"] = exp.classes;
            config["repetitions"] = exp.repetitions;
            config["seed"] = exp.master_seed;
            config["split_mode"] = eval_split;
            config["test_fraction"] = exp.test_fraction;
            config["stratified"] = exp.stratified;
            config["standardize"] = exp.standardize;
            ojson specs = ojson::array();
            for (const auto& s : exp.classifiers) specs.push_back(spec_json(s));
            config["classifiers"] = std::move(specs);
            config["report"] = eval_report;
            print_config("evaluate", config);
            const Dataset dataset = parse_feature_file(read_text_file(eval_features));
            const ExperimentReport report = run_experiment(dataset, exp);
            write_text_file(eval_report, emit_report(report));
            std::cout << summary_table(report) << "wrote " << eval_report << "\n";
        } else if (repro->parsed()) {
            repro_opts.out_dir = repro_out;
            repro_opts.split_mode = parse_split_mode(repro_split);
            repro_opts.sim = load_sim_config(repro_config_path);
            repro_opts.sim.seed = repro_opts.seed;
            validate_sim_config(repro_opts.sim);
            ojson config;
            config["out"] = repro_out;
            config["seed"] = repro_opts.seed;
            config["repetitions"] = repro_opts.repetitions;
            config["flights_per_class"] = repro_opts.flights_per_class;
            config["split_mode"] = repro_split;
            config["sim"] = ojson::parse(render_sim_config(repro_opts.sim));
            ojson specs = ojson::array();
            for (auto kind : {ModelKind::Knn, ModelKind::RandomForest, ModelKind::GradientBoosting}) {
                specs.push_back(spec_json(default_spec(kind)));
            }
            config["classifiers"] = std::move(specs);
            print_config("reproduce", config);
            const ReproduceResult result =
                reproduce(repro_opts, [](std::string_view line) { std::cout << line << "\n" << std::flush; });
            std::cout << render_summary_text(result.summary, result.suite);
            std::cout << "artifacts in " << repro_out << "\n";
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
