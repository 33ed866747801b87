// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The appraisal-annot Authors

// Subcommands of the `appraisal` tool. Each writes only under its output
// directory and records its resolved parameters in run.json there.

#ifndef APPRAISAL_COMMANDS_HPP
#define APPRAISAL_COMMANDS_HPP

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "appraisal/agreement.hpp"
#include "appraisal/corpus.hpp"
#include "appraisal/features.hpp"
#include "appraisal/probe.hpp"
#include "appraisal/simulator.hpp"

namespace appraisal {

enum ExitCode : int { kExitOk = 0, kExitValidation = 1, kExitUsage = 2, kExitRuntime = 3 };

/// Bad parameters detected before any work starts (mapped to exit code 2).
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

int cmd_validate(const std::filesystem::path& corpus_path, const std::filesystem::path& out_dir,
                 std::ostream& err);
int cmd_stats(const std::filesystem::path& corpus_path, const std::filesystem::path& out_dir);
int cmd_agreement(const std::filesystem::path& corpus_path, const std::filesystem::path& out_dir,
                  DistanceMetric metric);
int cmd_aggregate(const std::filesystem::path& corpus_path, const std::filesystem::path& out_dir);
int cmd_simulate(const SimulatorConfig& config, const std::filesystem::path& out_dir);

struct ExperimentOptions {
    std::filesystem::path corpus_path;
    /// "hash" for the built-in featurizer, otherwise a path to an embeddings JSONL file.
    std::string features = "hash";
    std::vector<Dimension> dimensions{kDimensions.begin(), kDimensions.end()};
    std::size_t folds = 5;
    TrainConfig train;
    FeaturizerConfig featurizer;
    std::uint64_t seed = 0;
};

void to_json(nlohmann::json& j, const ExperimentOptions& o);
/// Keys absent from `j` keep their current values in `o`.
void merge_json(const nlohmann::json& j, ExperimentOptions& o);

/// Writes, per dimension D and annotator count m: grid_<D>_m<m>.csv/.json and
/// predictions_<D>.csv; plus threshold_report.csv, summary.csv and
/// manifest.json. Nothing is written unless every input loads and every
/// model trains.
int cmd_experiment(const ExperimentOptions& options, const std::filesystem::path& out_dir);

/// Parses argv and dispatches; returns the process exit code.
int run_cli(int argc, char** argv);

}  // namespace appraisal

#endif  // APPRAISAL_COMMANDS_HPP
