// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The appraisal-annot Authors

// Project-grouped cross-validation and the reports built from its
// held-out predictions: gradient confusion grids and +/-1/3 threshold
// precision/recall.

#ifndef APPRAISAL_EVALUATION_HPP
#define APPRAISAL_EVALUATION_HPP

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "appraisal/aggregate.hpp"
#include "appraisal/corpus.hpp"
#include "appraisal/features.hpp"
#include "appraisal/probe.hpp"

namespace appraisal {

// --- folds ----------------------------------------------------------------

struct FoldPlan {
    std::vector<std::vector<std::string>> folds;  // test projects per fold, each sorted

    std::size_t size() const noexcept { return folds.size(); }
    std::vector<std::string> all_projects() const;
    /// Every project outside fold i.
    std::vector<std::string> train_projects(std::size_t i) const;
    /// Index of the fold holding `project`, if any.
    std::optional<std::size_t> fold_of(const std::string& project) const;
};

/// Shuffles the (sorted) project ids with `seed`, then deals them into
/// `fold_count` contiguous blocks whose sizes differ by at most one; the
/// first (|projects| mod fold_count) blocks get the extra project.
/// Throws std::invalid_argument unless 2 <= fold_count <= |projects|.
FoldPlan make_folds(std::vector<std::string> projects, std::size_t fold_count, std::uint64_t seed);

nlohmann::json fold_plan_to_json(const FoldPlan& plan);

// --- cross-validation ------------------------------------------------------

struct Prediction {
    std::string project_id;
    std::size_t fold = 0;
    SoftLabel truth;
    double value = 0.0;
    Distribution dist{};
};

struct FoldLog {
    std::size_t fold = 0;
    std::vector<std::string> train_projects;
    std::vector<std::string> test_projects;
    std::size_t n_train = 0;
    std::size_t n_test = 0;
    double initial_loss = 0.0;
    double final_loss = 0.0;
    std::uint32_t epochs_run = 0;
};

struct SkipReport {
    std::vector<std::string> missing_features;  // labeled, no features
    std::vector<std::string> missing_label;     // features, no label
    std::vector<std::string> unassigned_project;  // project not in any fold
    std::size_t total() const noexcept {
        return missing_features.size() + missing_label.size() + unassigned_project.size();
    }
};

struct CrossValidationResult {
    Dimension dimension = Dimension::Familiarity;
    std::map<std::string, Prediction> predictions;  // by verbatim id
    std::vector<FoldLog> folds;
    SkipReport skipped;
};

/// Each verbatim is predicted only by the model trained without its project.
/// Fold f trains with seed derive_seed(config.seed, "train/<dim>/<f>").
CrossValidationResult cross_validate(const Corpus& corpus, const FeatureMap& features, Dimension dimension,
                                     const TrainConfig& config, const FoldPlan& plan);

nlohmann::json cross_validation_log_to_json(const CrossValidationResult& result);

// --- confusion grid ---------------------------------------------------------

struct ConfusionGrid {
    std::uint32_t m = 0;
    /// counts[true level index][predicted level index], indices 0..2m for k/m, k = -m..m
    std::vector<std::vector<std::size_t>> counts;
    std::vector<std::vector<double>> row_normalized;

    std::size_t levels() const noexcept { return 2 * static_cast<std::size_t>(m) + 1; }
    double center(std::size_t index) const noexcept;
    std::size_t total() const noexcept;
    /// Share of mass with |true index - predicted index| <= band.
    double band_mass(std::size_t band) const;
};

/// Index of the bin center k/m nearest to v (clamped to [-1, 1]); exact
/// midpoints go to the lower index.
std::size_t nearest_level(double v, std::uint32_t m);

/// Throws MixedAnnotatorCountError if any truth label has m != `m`.
ConfusionGrid confusion_grid(const std::map<std::string, Prediction>& predictions, std::uint32_t m);

void write_grid_csv(std::ostream& out, const ConfusionGrid& grid);
nlohmann::json grid_to_json(const ConfusionGrid& grid);

// --- threshold report -------------------------------------------------------

/// +1 above 1/3, -1 below -1/3, 0 otherwise (both cutoffs belong to 0).
int threshold_classify(double v) noexcept;

struct ThresholdReport {
    /// Index 0, 1, 2 for classes -1, 0, +1. Undefined metrics are nullopt.
    std::array<std::optional<double>, 3> precision{};
    std::array<std::optional<double>, 3> recall{};
    std::array<std::size_t, 3> support{};  // true instances per class
    double global_accuracy = 0.0;
    std::size_t evaluated = 0;
};

/// Throws std::invalid_argument on an empty prediction set.
ThresholdReport threshold_report(const std::map<std::string, Prediction>& predictions);

/// Rows are metrics, columns are the given dimensions.
void write_threshold_csv(std::ostream& out, const std::vector<std::pair<Dimension, ThresholdReport>>& reports);

// --- summary metrics --------------------------------------------------------

double mean_squared_error(const std::map<std::string, Prediction>& predictions);

/// Spearman's rho with average ranks for ties. Returns 0 when either side is constant.
double spearman(std::span<const double> a, std::span<const double> b);

}  // namespace appraisal

#endif  // APPRAISAL_EVALUATION_HPP
