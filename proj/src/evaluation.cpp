// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The appraisal-annot Authors

#include "appraisal/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "appraisal/random.hpp"
#include "csv.hpp"

namespace appraisal {

using nlohmann::json;

// --- folds ----------------------------------------------------------------

std::vector<std::string> FoldPlan::all_projects() const {
    std::vector<std::string> out;
    for (const auto& f : folds) out.insert(out.end(), f.begin(), f.end());
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<std::string> FoldPlan::train_projects(std::size_t i) const {
    std::vector<std::string> out;
    for (std::size_t f = 0; f < folds.size(); ++f) {
        if (f != i) out.insert(out.end(), folds[f].begin(), folds[f].end());
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::optional<std::size_t> FoldPlan::fold_of(const std::string& project) const {
    for (std::size_t f = 0; f < folds.size(); ++f) {
        if (std::binary_search(folds[f].begin(), folds[f].end(), project)) return f;
    }
    return std::nullopt;
}

FoldPlan make_folds(std::vector<std::string> projects, std::size_t fold_count, std::uint64_t seed) {
    std::sort(projects.begin(), projects.end());
    projects.erase(std::unique(projects.begin(), projects.end()), projects.end());
    if (fold_count < 2 || fold_count > projects.size())
        throw std::invalid_argument("fold count " + std::to_string(fold_count) + " must be between 2 and " +
                                    std::to_string(projects.size()) + " (the number of projects)");

    Rng rng(seed);
    rng.shuffle(std::span<std::string>(projects));

    FoldPlan plan;
    const std::size_t base = projects.size() / fold_count;
    const std::size_t extra = projects.size() % fold_count;
    std::size_t next = 0;
    for (std::size_t f = 0; f < fold_count; ++f) {
        const std::size_t size = base + (f < extra ? 1 : 0);
        std::vector<std::string> fold(projects.begin() + static_cast<std::ptrdiff_t>(next),
                                      projects.begin() + static_cast<std::ptrdiff_t>(next + size));
        std::sort(fold.begin(), fold.end());
        plan.folds.push_back(std::move(fold));
        next += size;
    }
    return plan;
}

json fold_plan_to_json(const FoldPlan& plan) {
    json folds = json::array();
    for (std::size_t f = 0; f < plan.size(); ++f) {
        folds.push_back({{"fold", f}, {"test_projects", plan.folds[f]}, {"train_projects", plan.train_projects(f)}});
    }
    return folds;
}

// --- cross-validation ------------------------------------------------------

CrossValidationResult cross_validate(const Corpus& corpus, const FeatureMap& features, Dimension dimension,
                                     const TrainConfig& config, const FoldPlan& plan) {
    CrossValidationResult result;
    result.dimension = dimension;

    const SoftLabelMap labels = aggregate(corpus, dimension);
    std::map<std::string_view, std::string_view> project_of;
    for (const auto& v : corpus.verbatims) project_of[v.id] = v.project_id;

    for (const auto& [id, fv] : features) {
        if (!labels.contains(id)) result.skipped.missing_label.push_back(id);
    }

    // usable[f] = ids whose project is in fold f
    std::vector<std::vector<std::string>> by_fold(plan.size());
    for (const auto& [id, label] : labels) {
        if (!features.contains(id)) {
            result.skipped.missing_features.push_back(id);
            continue;
        }
        auto fold = plan.fold_of(std::string(project_of.at(id)));
        if (!fold) {
            result.skipped.unassigned_project.push_back(id);
            continue;
        }
        by_fold[*fold].push_back(id);
    }

    const std::string dim_code(dimension_code(dimension));
    for (std::size_t f = 0; f < plan.size(); ++f) {
        FoldLog log;
        log.fold = f;
        log.test_projects = plan.folds[f];
        log.train_projects = plan.train_projects(f);

        SoftLabelMap train_labels;
        for (std::size_t g = 0; g < plan.size(); ++g) {
            if (g == f) continue;
            for (const auto& id : by_fold[g]) train_labels.emplace(id, labels.at(id));
        }
        log.n_train = train_labels.size();
        log.n_test = by_fold[f].size();

        TrainConfig fold_config = config;
        fold_config.seed = derive_seed(config.seed, "train/" + dim_code + "/" + std::to_string(f));
        const ProbeModel model = train_probe(dimension, features, train_labels, fold_config);
        log.initial_loss = model.initial_loss;
        log.final_loss = model.final_loss;
        log.epochs_run = model.epochs_run;

        for (const auto& id : by_fold[f]) {
            const FeatureVector& x = features.at(id);
            Prediction p;
            p.project_id = std::string(project_of.at(id));
            p.fold = f;
            p.truth = labels.at(id);
            p.dist = predict_dist(model, x);
            p.value = p.dist[2] - p.dist[0];
            result.predictions.emplace(id, std::move(p));
        }
        result.folds.push_back(std::move(log));
    }
    return result;
}

json cross_validation_log_to_json(const CrossValidationResult& result) {
    json folds = json::array();
    for (const auto& log : result.folds) {
        folds.push_back({{"fold", log.fold},
                         {"train_projects", log.train_projects},
                         {"test_projects", log.test_projects},
                         {"n_train", log.n_train},
                         {"n_test", log.n_test},
                         {"epochs_run", log.epochs_run},
                         {"initial_loss", log.initial_loss},
                         {"final_loss", log.final_loss}});
    }
    return json{{"dimension", std::string(dimension_code(result.dimension))},
                {"folds", folds},
                {"evaluated", result.predictions.size()},
                {"skipped",
                 {{"missing_features", result.skipped.missing_features.size()},
                  {"missing_label", result.skipped.missing_label.size()},
                  {"unassigned_project", result.skipped.unassigned_project.size()}}}};
}

// --- confusion grid ---------------------------------------------------------

double ConfusionGrid::center(std::size_t index) const noexcept {
    return static_cast<double>(static_cast<long long>(index) - static_cast<long long>(m)) / static_cast<double>(m);
}

std::size_t ConfusionGrid::total() const noexcept {
    std::size_t t = 0;
    for (const auto& row : counts) t = std::accumulate(row.begin(), row.end(), t);
    return t;
}

double ConfusionGrid::band_mass(std::size_t band) const {
    const std::size_t all = total();
    if (all == 0) return 0.0;
    std::size_t near = 0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        for (std::size_t j = 0; j < counts[i].size(); ++j) {
            if ((i > j ? i - j : j - i) <= band) near += counts[i][j];
        }
    }
    return static_cast<double>(near) / static_cast<double>(all);
}

std::size_t nearest_level(double v, std::uint32_t m) {
    if (m == 0) throw std::invalid_argument("annotator count must be positive");
    const double md = static_cast<double>(m);
    v = std::clamp(v, -1.0, 1.0);
    const auto top = static_cast<std::size_t>(2 * m);
    auto lo = static_cast<std::size_t>(std::floor((v + 1.0) * md));
    lo = std::min(lo, top);
    if (lo == top) return top;
    auto center = [&](std::size_t i) { return (static_cast<double>(i) - md) / md; };
    const double d_lo = std::abs(v - center(lo));
    const double d_hi = std::abs(v - center(lo + 1));
    return d_hi < d_lo ? lo + 1 : lo;
}

ConfusionGrid confusion_grid(const std::map<std::string, Prediction>& predictions, std::uint32_t m) {
    if (m == 0) throw std::invalid_argument("annotator count must be positive");
    ConfusionGrid grid;
    grid.m = m;
    const std::size_t n = grid.levels();
    grid.counts.assign(n, std::vector<std::size_t>(n, 0));
    for (const auto& [id, p] : predictions) {
        if (p.truth.m() != m)
            throw MixedAnnotatorCountError("verbatim " + id + " has " + std::to_string(p.truth.m()) +
                                           " annotations, grid expects " + std::to_string(m));
        const auto row = static_cast<std::size_t>(p.truth.level() + static_cast<int>(m));
        ++grid.counts[row][nearest_level(p.value, m)];
    }
    grid.row_normalized.assign(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t row_total = std::accumulate(grid.counts[i].begin(), grid.counts[i].end(), std::size_t{0});
        if (row_total == 0) continue;
        for (std::size_t j = 0; j < n; ++j)
            grid.row_normalized[i][j] = static_cast<double>(grid.counts[i][j]) / static_cast<double>(row_total);
    }
    return grid;
}

void write_grid_csv(std::ostream& out, const ConfusionGrid& grid) {
    out << "true\\predicted";
    for (std::size_t j = 0; j < grid.levels(); ++j) out << ',' << csv::real(grid.center(j));
    out << '\n';
    for (std::size_t i = 0; i < grid.levels(); ++i) {
        out << csv::real(grid.center(i));
        for (std::size_t j = 0; j < grid.levels(); ++j) out << ',' << grid.counts[i][j];
        out << '\n';
    }
}

json grid_to_json(const ConfusionGrid& grid) {
    std::vector<double> centers;
    for (std::size_t i = 0; i < grid.levels(); ++i) centers.push_back(grid.center(i));
    return json{{"m", grid.m}, {"centers", centers}, {"counts", grid.counts}, {"row_normalized", grid.row_normalized}};
}

// --- threshold report -------------------------------------------------------

int threshold_classify(double v) noexcept {
    constexpr double cut = 1.0 / 3.0;
    if (v > cut) return 1;
    if (v < -cut) return -1;
    return 0;
}

namespace {

// exact version for level / m: compares 3 * level against m
int threshold_classify(const SoftLabel& label) noexcept {
    const long long three_level = 3LL * label.level();
    const auto m = static_cast<long long>(label.m());
    if (three_level > m) return 1;
    if (three_level < -m) return -1;
    return 0;
}

}  // namespace

ThresholdReport threshold_report(const std::map<std::string, Prediction>& predictions) {
    if (predictions.empty()) throw std::invalid_argument("no predictions to score");
    std::array<std::size_t, 3> tp{}, predicted{}, actual{};
    for (const auto& [id, p] : predictions) {
        const auto t = static_cast<std::size_t>(threshold_classify(p.truth) + 1);
        const auto q = static_cast<std::size_t>(threshold_classify(p.value) + 1);
        ++actual[t];
        ++predicted[q];
        if (t == q) ++tp[t];
    }
    ThresholdReport r;
    r.evaluated = predictions.size();
    r.support = actual;
    std::size_t correct = 0;
    for (std::size_t c = 0; c < 3; ++c) {
        if (predicted[c] > 0) r.precision[c] = static_cast<double>(tp[c]) / static_cast<double>(predicted[c]);
        if (actual[c] > 0) r.recall[c] = static_cast<double>(tp[c]) / static_cast<double>(actual[c]);
        correct += tp[c];
    }
    r.global_accuracy = static_cast<double>(correct) / static_cast<double>(r.evaluated);
    return r;
}

void write_threshold_csv(std::ostream& out, const std::vector<std::pair<Dimension, ThresholdReport>>& reports) {
    out << "metric";
    for (const auto& [d, r] : reports) out << ',' << dimension_code(d);
    out << '\n';
    static constexpr std::array<const char*, 3> names = {"neg", "zero", "pos"};
    for (std::size_t c = 0; c < 3; ++c) {
        out << "precision_" << names[c];
        for (const auto& [d, r] : reports) out << ',' << csv::real_or_na(r.precision[c]);
        out << "\nrecall_" << names[c];
        for (const auto& [d, r] : reports) out << ',' << csv::real_or_na(r.recall[c]);
        out << '\n';
    }
    out << "global_accuracy";
    for (const auto& [d, r] : reports) out << ',' << csv::real(r.global_accuracy);
    out << '\n';
    for (std::size_t c = 0; c < 3; ++c) {
        out << "support_" << names[c];
        for (const auto& [d, r] : reports) out << ',' << r.support[c];
        out << '\n';
    }
    out << "evaluated";
    for (const auto& [d, r] : reports) out << ',' << r.evaluated;
    out << '\n';
}

// --- summary metrics --------------------------------------------------------

double mean_squared_error(const std::map<std::string, Prediction>& predictions) {
    if (predictions.empty()) throw std::invalid_argument("no predictions to score");
    double sum = 0.0;
    for (const auto& [id, p] : predictions) {
        const double e = p.value - mean_value(p.truth);
        sum += e * e;
    }
    return sum / static_cast<double>(predictions.size());
}

namespace {

std::vector<double> average_ranks(std::span<const double> x) {
    std::vector<std::size_t> idx(x.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
    std::vector<double> ranks(x.size());
    std::size_t i = 0;
    while (i < idx.size()) {
        std::size_t j = i;
        while (j + 1 < idx.size() && x[idx[j + 1]] == x[idx[i]]) ++j;
        const double r = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = r;
        i = j + 1;
    }
    return ranks;
}

}  // namespace

double spearman(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw std::invalid_argument("spearman: length mismatch");
    if (a.size() < 2) return 0.0;
    const auto ra = average_ranks(a);
    const auto rb = average_ranks(b);
    const double n = static_cast<double>(a.size());
    const double mean_a = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
    const double mean_b = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
    double cov = 0.0, var_a = 0.0, var_b = 0.0;
    for (std::size_t i = 0; i < ra.size(); ++i) {
        cov += (ra[i] - mean_a) * (rb[i] - mean_b);
        var_a += (ra[i] - mean_a) * (ra[i] - mean_a);
        var_b += (rb[i] - mean_b) * (rb[i] - mean_b);
    }
    if (var_a == 0.0 || var_b == 0.0) return 0.0;
    return cov / std::sqrt(var_a * var_b);
}

}  // namespace appraisal
