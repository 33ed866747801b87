// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The appraisal-annot Authors

#include "appraisal/commands.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <fstream>
#include <future>
#include <iostream>
#include <optional>
#include <sstream>

#include "appraisal/aggregate.hpp"
#include "appraisal/evaluation.hpp"
#include "appraisal/random.hpp"
#include "csv.hpp"

namespace appraisal {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
    if (!out) throw std::runtime_error("error while writing " + path.string());
}

void write_run_record(const fs::path& out_dir, const std::string& command, const json& params) {
    write_file(out_dir / "run.json", json{{"command", command}, {"parameters", params}}.dump(2) + "\n");
}

Corpus load_checked(const fs::path& corpus_path) {
    Corpus corpus = load_corpus_file(corpus_path.string());
    const auto report = validate(corpus);
    for (const auto& f : report) {
        if (f.severity == Severity::Error)
            throw std::runtime_error("corpus is invalid (" + f.code + " at " + f.entity_id + "); run `validate`");
    }
    return corpus;
}

template <typename Fn>
std::string render(Fn&& fn) {
    std::ostringstream out;
    fn(out);
    return out.str();
}

}  // namespace

int cmd_validate(const fs::path& corpus_path, const fs::path& out_dir, std::ostream& err) {
    ValidationReport report;
    try {
        report = validate(load_corpus_file(corpus_path.string()));
    } catch (const CorpusError& e) {
        report.push_back({Severity::Error, "load_error", e.what(), corpus_path.string()});
    }
    fs::create_directories(out_dir);
    write_file(out_dir / "validation.csv", render([&](std::ostream& o) { write_validation_csv(o, report); }));
    write_run_record(out_dir, "validate", {{"corpus", corpus_path.string()}});

    const std::size_t errors = count_severity(report, Severity::Error);
    const std::size_t warnings = count_severity(report, Severity::Warning);
    if (warnings > 0) err << warnings << " warning(s)\n";
    if (errors > 0) {
        err << errors << " error(s)\n";
        return kExitValidation;
    }
    return kExitOk;
}

int cmd_stats(const fs::path& corpus_path, const fs::path& out_dir) {
    const Corpus corpus = load_checked(corpus_path);
    const CorpusStats stats = descriptive_stats(corpus);
    fs::create_directories(out_dir);
    write_file(out_dir / "stats.csv", render([&](std::ostream& o) { write_stats_csv(o, stats); }));
    write_run_record(out_dir, "stats", {{"corpus", corpus_path.string()}});
    return kExitOk;
}

int cmd_agreement(const fs::path& corpus_path, const fs::path& out_dir, DistanceMetric metric) {
    const Corpus corpus = load_checked(corpus_path);
    const AgreementReport report = agreement_report(corpus, metric);
    fs::create_directories(out_dir);
    write_file(out_dir / "agreement.csv", render([&](std::ostream& o) { write_agreement_csv(o, report); }));
    write_run_record(out_dir, "agreement",
                     {{"corpus", corpus_path.string()}, {"metric", std::string(metric_name(metric))}});
    return kExitOk;
}

int cmd_aggregate(const fs::path& corpus_path, const fs::path& out_dir) {
    const Corpus corpus = load_checked(corpus_path);
    const std::string soft = render([&](std::ostream& o) { write_aggregate_csv(o, corpus); });

    // one histogram per (dimension, annotator count)
    std::ostringstream hist;
    hist << "dimension,m,level,mean,count\n";
    for (Dimension d : kDimensions) {
        std::map<std::uint32_t, SoftLabelMap> by_m;
        for (auto& [id, label] : aggregate(corpus, d)) by_m[label.m()].emplace(id, label);
        for (const auto& [m, labels] : by_m) {
            const GradientHistogram h = gradient_histogram(labels, d);
            for (int k = -static_cast<int>(m); k <= static_cast<int>(m); ++k) {
                hist << dimension_code(d) << ',' << m << ',' << k << ','
                     << csv::real(static_cast<double>(k) / static_cast<double>(m)) << ',' << h.at_level(k) << '\n';
            }
        }
    }
    fs::create_directories(out_dir);
    write_file(out_dir / "aggregate.csv", soft);
    write_file(out_dir / "gradient_histogram.csv", hist.str());
    write_run_record(out_dir, "aggregate", {{"corpus", corpus_path.string()}});
    return kExitOk;
}

int cmd_simulate(const SimulatorConfig& config, const fs::path& out_dir) {
    const Simulation sim = generate(config);
    const std::string corpus = render([&](std::ostream& o) { write_corpus(o, sim.corpus); });
    const std::string truth = render([&](std::ostream& o) { write_ground_truth(o, sim.truth); });
    fs::create_directories(out_dir);
    write_file(out_dir / "corpus.jsonl", corpus);
    write_file(out_dir / "ground_truth.jsonl", truth);
    write_run_record(out_dir, "simulate", json(config));
    return kExitOk;
}

// --- experiment -------------------------------------------------------------

void to_json(json& j, const ExperimentOptions& o) {
    std::vector<std::string> dims;
    for (Dimension d : o.dimensions) dims.emplace_back(dimension_code(d));
    j = json{{"corpus", o.corpus_path.string()},
             {"features", o.features},
             {"dimensions", dims},
             {"folds", o.folds},
             {"seed", o.seed},
             {"train", o.train},
             {"featurizer",
              {{"ngram_min", o.featurizer.ngram_min},
               {"ngram_max", o.featurizer.ngram_max},
               {"buckets", o.featurizer.buckets},
               {"signed", o.featurizer.signed_hash},
               {"lowercase", o.featurizer.lowercase},
               {"hash", std::string(kFeaturizerVersion)}}}};
}

void merge_json(const json& j, ExperimentOptions& o) {
    if (j.contains("corpus")) o.corpus_path = j["corpus"].get<std::string>();
    o.features = j.value("features", o.features);
    o.folds = j.value("folds", o.folds);
    o.seed = j.value("seed", o.seed);
    if (j.contains("dimensions")) {
        o.dimensions.clear();
        for (const auto& code : j["dimensions"]) {
            auto d = parse_dimension(code.get<std::string>());
            if (!d) throw UsageError("unknown dimension " + code.dump());
            o.dimensions.push_back(*d);
        }
    }
    if (j.contains("train")) {
        TrainConfig t = o.train;
        from_json(j["train"], t);
        o.train = t;
    }
    if (j.contains("featurizer")) {
        const json& f = j["featurizer"];
        o.featurizer.ngram_min = f.value("ngram_min", o.featurizer.ngram_min);
        o.featurizer.ngram_max = f.value("ngram_max", o.featurizer.ngram_max);
        o.featurizer.buckets = f.value("buckets", o.featurizer.buckets);
        o.featurizer.signed_hash = f.value("signed", o.featurizer.signed_hash);
        o.featurizer.lowercase = f.value("lowercase", o.featurizer.lowercase);
    }
}

int cmd_experiment(const ExperimentOptions& options, const fs::path& out_dir) {
    try {
        options.train.check();
        options.featurizer.check();
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    if (options.dimensions.empty()) throw UsageError("no dimension selected");

    const Corpus corpus = load_checked(options.corpus_path);

    FeatureMap features;
    std::string feature_source;
    if (options.features == "hash") {
        for (const auto& v : corpus.verbatims) features.emplace(v.id, hash_featurize(v.text, options.featurizer));
        feature_source = std::string(kFeaturizerVersion);
    } else {
        features = load_embeddings_file(options.features).as_features();
        feature_source = "embeddings:" + fs::path(options.features).filename().string();
    }

    std::vector<std::string> projects;
    for (const auto& p : corpus.projects) projects.push_back(p.id);
    if (options.folds < 2 || options.folds > projects.size())
        throw UsageError(fmt::format("--folds must be between 2 and {} for this corpus", projects.size()));
    const FoldPlan plan = make_folds(projects, options.folds, derive_seed(options.seed, "folds"));

    TrainConfig train = options.train;
    train.seed = options.seed;

    std::map<std::string, std::string> files;
    std::vector<std::pair<Dimension, ThresholdReport>> thresholds;
    json cv_logs = json::array();
    std::ostringstream summary;
    summary << "dimension,evaluated,mse,spearman,band1_mass\n";

    // dimensions are independent; results are consumed in canonical order
    std::vector<std::future<CrossValidationResult>> pending;
    for (Dimension d : options.dimensions) {
        pending.push_back(std::async(std::launch::async, [&, d] { return cross_validate(corpus, features, d, train, plan); }));
    }

    for (std::size_t i = 0; i < options.dimensions.size(); ++i) {
        const Dimension d = options.dimensions[i];
        const std::string code(dimension_code(d));
        const CrossValidationResult cv = pending[i].get();
        cv_logs.push_back(cross_validation_log_to_json(cv));
        if (cv.predictions.empty()) throw std::runtime_error("no verbatim evaluated for dimension " + code);

        std::ostringstream pred;
        pred << "verbatim_id,project_id,fold,m,true_mean,predicted,q_neg,q_zero,q_pos\n";
        std::vector<double> truth, predicted;
        std::map<std::uint32_t, std::map<std::string, Prediction>> by_m;
        for (const auto& [id, p] : cv.predictions) {
            pred << csv::escape(id) << ',' << csv::escape(p.project_id) << ',' << p.fold << ',' << p.truth.m() << ','
                 << csv::real(mean_value(p.truth)) << ',' << csv::real(p.value) << ',' << csv::real(p.dist[0])
                 << ',' << csv::real(p.dist[1]) << ',' << csv::real(p.dist[2]) << '\n';
            truth.push_back(mean_value(p.truth));
            predicted.push_back(p.value);
            by_m[p.truth.m()].emplace(id, p);
        }
        files["predictions_" + code + ".csv"] = pred.str();

        double band1 = 0.0;
        for (const auto& [m, preds] : by_m) {
            const ConfusionGrid grid = confusion_grid(preds, m);
            const std::string stem = fmt::format("grid_{}_m{}", code, m);
            files[stem + ".csv"] = render([&](std::ostream& o) { write_grid_csv(o, grid); });
            files[stem + ".json"] = grid_to_json(grid).dump(2) + "\n";
            band1 += grid.band_mass(1) * static_cast<double>(grid.total());
        }
        band1 /= static_cast<double>(cv.predictions.size());

        thresholds.emplace_back(d, threshold_report(cv.predictions));
        summary << code << ',' << cv.predictions.size() << ',' << csv::real(mean_squared_error(cv.predictions))
                << ',' << csv::real(spearman(truth, predicted)) << ',' << csv::real(band1) << '\n';
    }
    files["threshold_report.csv"] = render([&](std::ostream& o) { write_threshold_csv(o, thresholds); });
    files["summary.csv"] = summary.str();

    json listed = json::array();
    for (const auto& [name, content] : files) listed.push_back(name);
    listed.push_back("manifest.json");
    const json manifest = {
        {"command", "experiment"},
        {"config", options},
        {"feature_source", feature_source},
        {"seed_derivation",
         {{"folds", "splitmix64(seed ^ fnv1a64(\"folds\"))"},
          {"train", "splitmix64(seed ^ fnv1a64(\"train/<dimension>/<fold>\"))"}}},
        {"fold_plan", fold_plan_to_json(plan)},
        {"cross_validation", cv_logs},
        {"threshold_rule", "+1 if v > 1/3, -1 if v < -1/3, else 0; global_accuracy = share of exact class matches"},
        {"files", listed}};
    files["manifest.json"] = manifest.dump(2) + "\n";

    fs::create_directories(out_dir);
    for (const auto& [name, content] : files) write_file(out_dir / name, content);
    return kExitOk;
}

// --- argument parsing -------------------------------------------------------

namespace {

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open config file " + path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw UsageError("config file " + path + ": " + e.what());
    }
}

}  // namespace

int run_cli(int argc, char** argv) {
    CLI::App app{"Agreement, aggregation and probe experiments for multi-annotator appraisal corpora"};
    app.require_subcommand(1);

    std::string corpus_path;
    std::string out_dir = "out";
    std::optional<std::uint64_t> seed;
    std::string config_path;

    auto add_common = [&](CLI::App* sub, bool needs_corpus) {
        auto* opt = sub->add_option("--corpus", corpus_path, "Corpus JSONL file");
        if (needs_corpus) opt->required()->check(CLI::ExistingFile);
        sub->add_option("--out", out_dir, "Output directory")->capture_default_str();
    };

    auto* validate_cmd = app.add_subcommand("validate", "Check a corpus file; exit 1 on errors");
    add_common(validate_cmd, true);
    auto* stats_cmd = app.add_subcommand("stats", "Descriptive annotation shares");
    add_common(stats_cmd, true);
    std::string metric_name_arg = "nominal";
    auto* agreement_cmd = app.add_subcommand("agreement", "Krippendorff's alpha per dimension and modality");
    add_common(agreement_cmd, true);
    agreement_cmd->add_option("--metric", metric_name_arg, "nominal or interval")
        ->check(CLI::IsMember({"nominal", "interval"}))
        ->capture_default_str();
    auto* aggregate_cmd = app.add_subcommand("aggregate", "Soft labels and gradient histograms");
    add_common(aggregate_cmd, true);

    auto* simulate_cmd = app.add_subcommand("simulate", "Generate a synthetic corpus and its ground truth");
    simulate_cmd->add_option("--out", out_dir, "Output directory")->capture_default_str();
    simulate_cmd->add_option("--config", config_path, "Simulator config JSON")->check(CLI::ExistingFile);
    simulate_cmd->add_option("--seed", seed, "Master seed (overrides the config)");
    std::string preset = "default";
    simulate_cmd->add_option("--preset", preset, "Base config: default or campaign-shape")
        ->check(CLI::IsMember({"default", "campaign-shape"}))
        ->capture_default_str();

    auto* experiment_cmd = app.add_subcommand("experiment", "Project-grouped cross-validated probe");
    experiment_cmd->add_option("--corpus", corpus_path, "Corpus JSONL file");
    experiment_cmd->add_option("--out", out_dir, "Output directory")->capture_default_str();
    experiment_cmd->add_option("--config", config_path, "Experiment config JSON (flags override)")
        ->check(CLI::ExistingFile);
    experiment_cmd->add_option("--seed", seed, "Master seed");
    std::optional<std::string> features;
    std::optional<std::vector<std::string>> dimensions;
    std::optional<std::size_t> folds;
    std::optional<double> learning_rate, l2_lambda, early_stop_tol;
    std::optional<std::uint32_t> epochs, batch_size, ngram_min, ngram_max, buckets;
    experiment_cmd->add_option("--features", features, "\"hash\" or an embeddings JSONL path");
    experiment_cmd->add_option("--dimensions", dimensions, "Subset of F P U L")->delimiter(',');
    experiment_cmd->add_option("--folds", folds, "Number of project folds (default 5)");
    experiment_cmd->add_option("--learning-rate", learning_rate);
    experiment_cmd->add_option("--epochs", epochs);
    experiment_cmd->add_option("--l2", l2_lambda);
    experiment_cmd->add_option("--batch-size", batch_size);
    experiment_cmd->add_option("--early-stop-tol", early_stop_tol);
    experiment_cmd->add_option("--ngram-min", ngram_min);
    experiment_cmd->add_option("--ngram-max", ngram_max);
    experiment_cmd->add_option("--buckets", buckets);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*validate_cmd) return cmd_validate(corpus_path, out_dir, std::cerr);
        if (*stats_cmd) return cmd_stats(corpus_path, out_dir);
        if (*agreement_cmd) return cmd_agreement(corpus_path, out_dir, *parse_metric(metric_name_arg));
        if (*aggregate_cmd) return cmd_aggregate(corpus_path, out_dir);
        if (*simulate_cmd) {
            SimulatorConfig config = preset == "campaign-shape" ? SimulatorConfig::campaign_shape() : SimulatorConfig::defaults();
            if (!config_path.empty()) {
                json j = json(config);
                j.merge_patch(read_json_file(config_path));
                try {
                    config = j.get<SimulatorConfig>();
                    config.check();
                } catch (const std::exception& e) {
                    throw UsageError(e.what());
                }
            }
            if (seed) config.seed = *seed;
            return cmd_simulate(config, out_dir);
        }
        if (*experiment_cmd) {
            ExperimentOptions options;
            if (!config_path.empty()) merge_json(read_json_file(config_path), options);
            if (!corpus_path.empty()) options.corpus_path = corpus_path;
            if (seed) options.seed = *seed;
            if (features) options.features = *features;
            if (dimensions) merge_json(json{{"dimensions", *dimensions}}, options);
            if (folds) options.folds = *folds;
            if (learning_rate) options.train.learning_rate = *learning_rate;
            if (epochs) options.train.epochs = *epochs;
            if (l2_lambda) options.train.l2_lambda = *l2_lambda;
            if (batch_size) options.train.batch_size = *batch_size;
            if (early_stop_tol) options.train.early_stop_tol = *early_stop_tol;
            if (ngram_min) options.featurizer.ngram_min = *ngram_min;
            if (ngram_max) options.featurizer.ngram_max = *ngram_max;
            if (buckets) options.featurizer.buckets = *buckets;
            options.train.seed = options.seed;
            if (options.corpus_path.empty()) throw UsageError("--corpus is required");
            if (!fs::exists(options.corpus_path)) throw UsageError("corpus file not found: " + options.corpus_path.string());
            return cmd_experiment(options, out_dir);
        }
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitUsage;
}

}  // namespace appraisal
